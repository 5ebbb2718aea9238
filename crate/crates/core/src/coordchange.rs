//! Quantum coordinate changes between triangulations.
//!
//! A [`Homomorphism`] from `T_{source}` to `T_{target}` stores the image of
//! every generator of the source algebra as an expression over the target
//! algebra. For a flip at edge `i` of `lambda` the source is
//! `flip(lambda, i)` and the target is `lambda`; the images follow the eight
//! cases of the flip square as recorded in a [`FlipTable`].

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::classical::classical_move;
use crate::ncrational::{equals, Monomial, OracleConfig, RationalExpression, Verdict};
use crate::surface::{FlipTag, IdealTriangulation, Move, Permutation, SigmaMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoordChangeError {
    #[error("cannot compose: the inner map ends at a different triangulation than the outer map starts")]
    ChainMismatch,
    #[error("move {mv} is not applicable: {why}")]
    InapplicableMove { mv: String, why: String },
    #[error("paths end at different triangulations")]
    EndpointMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    I,
    J,
    K,
    L,
    M,
}

/// `(1 + q^offset X_i^{±1})^power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomRule {
    pub inverse_diagonal: bool,
    pub offset: i64,
    pub power: i64,
}

/// `X'_role ↦ q^qexp · (binomials) · X_i^diagonal_power · X_role`; for the
/// diagonal itself the trailing `X_role` is omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRule {
    pub role: Role,
    pub qexp: i64,
    pub binoms: Vec<BinomRule>,
    pub diagonal_power: i64,
}

/// Address of one q-exponent in a [`FlipTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExponentSlot {
    pub case: FlipTag,
    pub rule: usize,
    /// `None` for the monomial q-power, `Some(b)` for the offset of binomial `b`.
    pub binom: Option<usize>,
}

impl std::fmt::Display for ExponentSlot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.binom {
            None => write!(f, "case {} rule {} monomial", self.case.number(), self.rule),
            Some(b) => write!(f, "case {} rule {} binomial {}", self.case.number(), self.rule, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipTable {
    cases: Vec<Vec<ImageRule>>,
}

fn rule(role: Role, diagonal_power: i64, binoms: &[(bool, i64, i64)]) -> ImageRule {
    ImageRule {
        role,
        qexp: 0,
        binoms: binoms
            .iter()
            .map(|&(inverse_diagonal, offset, power)| BinomRule { inverse_diagonal, offset, power })
            .collect(),
        diagonal_power,
    }
}

impl FlipTable {
    /// The eight quantum flip formulas.
    pub fn standard() -> Self {
        use Role::*;
        let jl = [(false, 1, 1)];
        let km = [(true, 1, -1)];
        let jl2 = [(false, 1, 1), (false, 3, 1)];
        let km2 = [(true, 1, -1), (true, 3, -1)];
        let diag = || rule(I, -1, &[]);
        let cases = vec![
            vec![diag(), rule(J, 0, &jl), rule(K, 0, &km), rule(L, 0, &jl), rule(M, 0, &km)],
            vec![diag(), rule(J, 1, &[]), rule(L, 0, &jl), rule(M, 0, &km)],
            vec![diag(), rule(J, 1, &[]), rule(K, 0, &km), rule(L, 0, &jl)],
            vec![diag(), rule(J, 0, &jl2), rule(K, 0, &km), rule(M, 0, &km)],
            vec![diag(), rule(J, 0, &jl), rule(L, 0, &jl), rule(K, 0, &km2)],
            vec![diag(), rule(J, 1, &[]), rule(L, 1, &[])],
            vec![diag(), rule(J, 1, &[]), rule(K, 1, &[])],
            vec![diag(), rule(J, 0, &jl2), rule(K, 0, &km2)],
        ];
        FlipTable { cases }
    }

    pub fn rules(&self, tag: FlipTag) -> &[ImageRule] {
        match tag {
            FlipTag::Degenerate => &[],
            t => &self.cases[t.number() - 1],
        }
    }

    /// Every q-exponent in the table, monomial powers included.
    pub fn exponent_slots(&self) -> Vec<ExponentSlot> {
        let mut out = Vec::new();
        for case in FlipTag::CASES {
            for (r, rule) in self.rules(case).iter().enumerate() {
                out.push(ExponentSlot { case, rule: r, binom: None });
                for b in 0..rule.binoms.len() {
                    out.push(ExponentSlot { case, rule: r, binom: Some(b) });
                }
            }
        }
        out
    }

    pub fn exponent(&self, slot: ExponentSlot) -> i64 {
        let r = &self.cases[slot.case.number() - 1][slot.rule];
        match slot.binom {
            None => r.qexp,
            Some(b) => r.binoms[b].offset,
        }
    }

    /// Copy with one exponent shifted by `delta`.
    pub fn mutated(&self, slot: ExponentSlot, delta: i64) -> Self {
        let mut t = self.clone();
        let r = &mut t.cases[slot.case.number() - 1][slot.rule];
        match slot.binom {
            None => r.qexp += delta,
            Some(b) => r.binoms[b].offset += delta,
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Homomorphism {
    source: IdealTriangulation,
    target: IdealTriangulation,
    source_sigma: Arc<SigmaMatrix>,
    target_sigma: Arc<SigmaMatrix>,
    images: Vec<RationalExpression>,
}

impl Homomorphism {
    pub fn identity(lambda: &IdealTriangulation) -> Self {
        let s = Arc::new(lambda.sigma());
        let images = (1..=lambda.edge_count()).map(|h| RationalExpression::generator(s.clone(), h)).collect();
        Homomorphism {
            source: lambda.clone(),
            target: lambda.clone(),
            source_sigma: s.clone(),
            target_sigma: s,
            images,
        }
    }

    pub fn source(&self) -> &IdealTriangulation {
        &self.source
    }

    pub fn target(&self) -> &IdealTriangulation {
        &self.target
    }

    pub fn source_sigma(&self) -> &Arc<SigmaMatrix> {
        &self.source_sigma
    }

    pub fn target_sigma(&self) -> &Arc<SigmaMatrix> {
        &self.target_sigma
    }

    /// Image of generator `X'_h` (1-based).
    pub fn image(&self, h: usize) -> &RationalExpression {
        &self.images[h - 1]
    }

    pub fn images(&self) -> &[RationalExpression] {
        &self.images
    }

    /// Structural substitution of the generator images into `e`.
    pub fn apply(&self, e: &RationalExpression) -> RationalExpression {
        e.substitute(&self.images, &self.target_sigma)
    }

    /// Pairs `(h, h')` whose images fail `I_h I_h' = q^{2 sigma'_hh'} I_h' I_h`.
    pub fn compatibility_failures(&self, cfg: &OracleConfig) -> Vec<(usize, usize, Verdict)> {
        let n = self.images.len();
        let mut out = Vec::new();
        for h in 1..=n {
            for g in h + 1..=n {
                let a = self.image(h);
                let b = self.image(g);
                let lhs = a.multiply(b);
                let scalar = RationalExpression::q_power(self.target_sigma.clone(), 2 * self.source_sigma.get(h, g));
                let rhs = scalar.multiply(b).multiply(a);
                let v = equals(&lhs, &rhs, cfg);
                if !v.is_equal() {
                    out.push((h, g, v));
                }
            }
        }
        out
    }
}

fn diagonal_binom(sigma: &Arc<SigmaMatrix>, i: usize, b: &BinomRule) -> RationalExpression {
    let k = if b.inverse_diagonal { -1 } else { 1 };
    RationalExpression::binom(b.offset, RationalExpression::generator_pow(sigma.clone(), i, k), b.power)
}

/// `Phi_{lambda, flip(lambda, i)}` built from the standard table.
pub fn flip_hom(lambda: &IdealTriangulation, i: usize) -> Homomorphism {
    flip_hom_with(lambda, i, &FlipTable::standard())
}

pub fn flip_hom_with(lambda: &IdealTriangulation, i: usize, table: &FlipTable) -> Homomorphism {
    let case = lambda.classify_flip(i);
    let Some(lab) = case.labels else { return Homomorphism::identity(lambda) };
    let mut hom = Homomorphism::identity(lambda);
    hom.source = lambda.flip(i);
    hom.source_sigma = Arc::new(hom.source.sigma());
    let s = hom.target_sigma.clone();
    let n = lambda.edge_count();
    for r in table.rules(case.tag) {
        let edge = match r.role {
            Role::I => lab.i,
            Role::J => lab.j,
            Role::K => lab.k,
            Role::L => lab.l,
            Role::M => lab.m,
        };
        let mut e = RationalExpression::q_power(s.clone(), r.qexp);
        for b in &r.binoms {
            e = e.multiply(&diagonal_binom(&s, lab.i, b));
        }
        let mut exps = vec![0; n];
        exps[lab.i - 1] += r.diagonal_power;
        if r.role != Role::I {
            // Identified sides can make the diagonal itself appear here.
            let mono = RationalExpression::monomial(s.clone(), Monomial { negative: false, qexp: 0, exps });
            e = e.multiply(&mono).multiply(&RationalExpression::generator(s.clone(), edge));
        } else {
            e = e.multiply(&RationalExpression::monomial(s.clone(), Monomial { negative: false, qexp: 0, exps }));
        }
        hom.images[edge - 1] = e;
    }
    hom
}

/// `Phi_{lambda, alpha(lambda)}`: `X'_h ↦ X_{alpha(h)}`.
pub fn reindex_hom(lambda: &IdealTriangulation, alpha: &Permutation) -> Homomorphism {
    let mut hom = Homomorphism::identity(lambda);
    hom.source = lambda.reindex(alpha);
    hom.source_sigma = Arc::new(hom.source.sigma());
    hom.images = (1..=lambda.edge_count())
        .map(|h| RationalExpression::generator(hom.target_sigma.clone(), alpha.apply(h)))
        .collect();
    hom
}

pub fn move_hom(lambda: &IdealTriangulation, mv: &Move, table: &FlipTable) -> Result<Homomorphism, CoordChangeError> {
    let n = lambda.edge_count();
    match mv {
        Move::Flip(i) if *i == 0 || *i > n => {
            Err(CoordChangeError::InapplicableMove { mv: mv.to_string(), why: format!("edge out of range 1..={n}") })
        }
        Move::Flip(i) => Ok(flip_hom_with(lambda, *i, table)),
        Move::Reindex(a) if a.len() != n => Err(CoordChangeError::InapplicableMove {
            mv: mv.to_string(),
            why: format!("permutation of {} letters on {n} edges", a.len()),
        }),
        Move::Reindex(a) => Ok(reindex_hom(lambda, a)),
    }
}

/// `outer ∘ inner`; `inner` must end where `outer` starts.
pub fn compose(outer: &Homomorphism, inner: &Homomorphism) -> Result<Homomorphism, CoordChangeError> {
    if inner.target.canonical() != outer.source.canonical() {
        return Err(CoordChangeError::ChainMismatch);
    }
    Ok(Homomorphism {
        source: inner.source.clone(),
        target: outer.target.clone(),
        source_sigma: inner.source_sigma.clone(),
        target_sigma: outer.target_sigma.clone(),
        images: inner.images.iter().map(|e| crate::ncrational::normalize(&outer.apply(e)).expr).collect(),
    })
}

/// `Phi_{lambda_0, lambda_m}` for `lambda_{k+1} = move_k(lambda_k)`.
pub fn path_hom(lambda: &IdealTriangulation, moves: &[Move]) -> Result<Homomorphism, CoordChangeError> {
    path_hom_with(lambda, moves, &FlipTable::standard())
}

pub fn path_hom_with(
    lambda: &IdealTriangulation,
    moves: &[Move],
    table: &FlipTable,
) -> Result<Homomorphism, CoordChangeError> {
    let mut current = Homomorphism::identity(lambda);
    let mut here = lambda.clone();
    for mv in moves {
        let step = move_hom(&here, mv, table)?;
        here = step.source.clone();
        current = compose(&current, &step)?;
    }
    Ok(current)
}

/// A point of `(0, ∞)^n` with no coincidences among its flip images; its
/// transport along a path tells isotopy classes apart.
pub fn reference_point(n: usize) -> Vec<BigRational> {
    let primes: Vec<i64> = (2i64..).filter(|p| (2..*p).take_while(|d| d * d <= *p).all(|d| p % d != 0)).take(2 * n).collect();
    (0..n).map(|i| BigRational::new(primes[i].into(), primes[i + n].into())).collect()
}

/// Transports the reference point along a path and returns the endpoint
/// triangulation with its coordinates.
pub fn transport_reference(lambda: &IdealTriangulation, moves: &[Move]) -> (IdealTriangulation, Vec<BigRational>) {
    let mut here = lambda.clone();
    let mut x = reference_point(lambda.edge_count());
    for mv in moves {
        x = classical_move(&x, &here, mv);
        here = here.apply_move(mv);
    }
    (here, x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorVerdict {
    pub generator: usize,
    pub verdict: Verdict,
}

/// Compares two homomorphisms with the same source and target generator by
/// generator.
pub fn compare_homs(a: &Homomorphism, b: &Homomorphism, cfg: &OracleConfig) -> Vec<GeneratorVerdict> {
    (1..=a.images.len())
        .map(|h| GeneratorVerdict { generator: h, verdict: equals(a.image(h), b.image(h), cfg) })
        .collect()
}

pub fn verify_path_independence(
    lambda: &IdealTriangulation,
    path1: &[Move],
    path2: &[Move],
    cfg: &OracleConfig,
) -> Result<Vec<GeneratorVerdict>, CoordChangeError> {
    verify_path_independence_with(lambda, path1, path2, cfg, &FlipTable::standard())
}

pub fn verify_path_independence_with(
    lambda: &IdealTriangulation,
    path1: &[Move],
    path2: &[Move],
    cfg: &OracleConfig,
    table: &FlipTable,
) -> Result<Vec<GeneratorVerdict>, CoordChangeError> {
    let h1 = path_hom_with(lambda, path1, table)?;
    let h2 = path_hom_with(lambda, path2, table)?;
    if h1.source != h2.source && h1.source.canonical() != h2.source.canonical() {
        return Err(CoordChangeError::EndpointMismatch);
    }
    // Same combinatorics is not enough: the two endpoints must also be the
    // same isotopy class, which the transported coordinates detect.
    if transport_reference(lambda, path1).1 != transport_reference(lambda, path2).1 {
        return Err(CoordChangeError::EndpointMismatch);
    }
    Ok(compare_homs(&h1, &h2, cfg))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationCheck {
    pub relation: &'static str,
    pub detail: String,
    pub verdicts: Vec<GeneratorVerdict>,
}

impl RelationCheck {
    pub fn all_exact(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == Verdict::EqualExact)
    }

    pub fn all_equal(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict.is_equal())
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct GroupoidReport {
    pub checks: Vec<RelationCheck>,
}

impl GroupoidReport {
    pub fn all_exact(&self) -> bool {
        self.checks.iter().all(RelationCheck::all_exact)
    }
}

fn cyclic_shift(n: usize) -> Permutation {
    Permutation::from_one_line((1..=n).map(|i| i % n + 1).collect()).expect("a cycle is a permutation")
}

fn check(
    lambda: &IdealTriangulation,
    relation: &'static str,
    p1: Vec<Move>,
    p2: Vec<Move>,
    cfg: &OracleConfig,
    table: &FlipTable,
) -> Result<RelationCheck, CoordChangeError> {
    let detail = format!("[{}] vs [{}]", crate::surface::format_moves(&p1), crate::surface::format_moves(&p2));
    let verdicts = verify_path_independence_with(lambda, &p1, &p2, cfg, table)?;
    Ok(RelationCheck { relation, detail, verdicts })
}

/// The four groupoid relations on `lambda`: composition of reindexings,
/// reflexivity of every move, the reindexing relation and distant
/// commutativity.
pub fn verify_groupoid(lambda: &IdealTriangulation, cfg: &OracleConfig) -> Result<GroupoidReport, CoordChangeError> {
    verify_groupoid_with(lambda, cfg, &FlipTable::standard())
}

pub fn verify_groupoid_with(
    lambda: &IdealTriangulation,
    cfg: &OracleConfig,
    table: &FlipTable,
) -> Result<GroupoidReport, CoordChangeError> {
    let n = lambda.edge_count();
    let mut report = GroupoidReport::default();
    let alpha = cyclic_shift(n);
    let beta = if n >= 2 { Permutation::transposition(n, 1, 2) } else { Permutation::identity(n) };

    let composite = vec![Move::Reindex(alpha.product(&beta))];
    let stepwise = vec![Move::Reindex(beta.clone()), Move::Reindex(alpha.clone())];
    report.checks.push(check(lambda, "composition", composite, stepwise, cfg, table)?);

    for i in 1..=n {
        report.checks.push(check(lambda, "reflexivity", vec![Move::Flip(i), Move::Flip(i)], vec![], cfg, table)?);
    }
    for a in [&alpha, &beta] {
        let there_and_back = vec![Move::Reindex(a.clone()), Move::Reindex(a.inverse())];
        report.checks.push(check(lambda, "reflexivity", there_and_back, vec![], cfg, table)?);
    }

    for a in [&alpha, &beta] {
        for i in 1..=n {
            let lhs = vec![Move::Reindex(a.clone()), Move::Flip(i)];
            let rhs = vec![Move::Flip(a.apply(i)), Move::Reindex(a.clone())];
            report.checks.push(check(lambda, "reindexing", lhs, rhs, cfg, table)?);
        }
    }

    for i in 1..=n {
        for j in i + 1..=n {
            if !lambda.share_triangle(i, j) {
                let lhs = vec![Move::Flip(i), Move::Flip(j)];
                let rhs = vec![Move::Flip(j), Move::Flip(i)];
                report.checks.push(check(lambda, "distant commutativity", lhs, rhs, cfg, table)?);
            }
        }
    }
    Ok(report)
}

/// An element of the quantum Teichmüller space: an expression on a
/// carrier triangulation, compared across triangulations by transport.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumTeichElement {
    pub carrier: IdealTriangulation,
    pub expr: RationalExpression,
}

impl QuantumTeichElement {
    /// Compares `self` with `other`, where `path` leads from `self.carrier`
    /// to `other.carrier`.
    pub fn equals_via(&self, other: &QuantumTeichElement, path: &[Move], cfg: &OracleConfig) -> Result<Verdict, CoordChangeError> {
        let hom = path_hom(&self.carrier, path)?;
        if hom.source().canonical() != other.carrier.canonical() {
            return Err(CoordChangeError::EndpointMismatch);
        }
        Ok(equals(&self.expr, &hom.apply(&other.expr), cfg))
    }
}

/// Checks whether a verdict list is all exact; convenience for reports.
pub fn all_exact(v: &[GeneratorVerdict]) -> bool {
    v.iter().all(|g| g.verdict == Verdict::EqualExact)
}

/// The reference point is generic enough that `x_i != 1`.
pub fn is_generic(x: &[BigRational]) -> bool {
    x.iter().all(|v| !v.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::examples::*;

    #[test]
    fn case_one_images() {
        let t = five_punctured_sphere();
        let i = (1..=9).find(|&i| t.classify_flip(i).tag == FlipTag::Case1).expect("a Case 1 square");
        let lab = t.classify_flip(i).labels.unwrap();
        let h = flip_hom(&t, i);
        assert_eq!(h.image(lab.j).to_string(), format!("(1 + q^1*X{i})^1*X{}", lab.j));
        assert_eq!(h.image(lab.k).to_string(), format!("(1 + q^1*X{i}^-1)^-1*X{}", lab.k));
        assert_eq!(h.image(i).to_string(), format!("X{i}^-1"));
    }

    #[test]
    fn case_eight_images() {
        let t = once_punctured_torus();
        let lab = t.classify_flip(1).labels.unwrap();
        let h = flip_hom(&t, 1);
        assert_eq!(h.image(lab.j).to_string(), format!("(1 + q^1*X1)^1*(1 + q^3*X1)^1*X{}", lab.j));
    }

    #[test]
    fn degenerate_flip_is_identity() {
        let t = three_punctured_sphere().flip(1);
        let d = (1..=3).find(|&i| t.classify_flip(i).tag == FlipTag::Degenerate).unwrap();
        assert_eq!(flip_hom(&t, d), Homomorphism::identity(&t));
    }

    #[test]
    fn reindex_and_identity() {
        let t = five_punctured_sphere();
        assert_eq!(reindex_hom(&t, &Permutation::identity(9)), Homomorphism::identity(&t));
        let swap = reindex_hom(&t, &Permutation::transposition(9, 2, 5));
        assert_eq!(swap.image(2).to_string(), "X5");
        assert_eq!(swap.image(5).to_string(), "X2");
        let id = Homomorphism::identity(&t);
        let e = flip_hom(&t, 6).image(6).clone();
        assert_eq!(id.apply(&e), e);
        assert!(path_hom(&t, &[]).unwrap() == id);
    }

    #[test]
    fn compatibility_on_test_surfaces() {
        let cfg = OracleConfig::default();
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            for i in 1..=t.edge_count() {
                assert!(flip_hom(&t, i).compatibility_failures(&cfg).is_empty(), "edge {i}");
            }
        }
    }

    #[test]
    fn groupoid_relations_exact() {
        let cfg = OracleConfig::default();
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            let r = verify_groupoid(&t, &cfg).unwrap();
            for c in &r.checks {
                assert!(c.all_exact(), "{} {}: {:?}", c.relation, c.detail, c.verdicts);
            }
        }
    }

    #[test]
    fn compose_rejects_mismatch() {
        let t = five_punctured_sphere();
        let a = flip_hom(&t, 6);
        let b = flip_hom(&t, 7);
        assert_eq!(compose(&a, &b), Err(CoordChangeError::ChainMismatch));
    }

    #[test]
    fn mutated_case_one_is_caught() {
        let t = five_punctured_sphere();
        let i = (1..=9).find(|&i| t.classify_flip(i).tag == FlipTag::Case1).unwrap();
        let table = FlipTable::standard();
        let slot = ExponentSlot { case: FlipTag::Case1, rule: 1, binom: Some(0) };
        assert_eq!(table.exponent(slot), 1);
        let bad = table.mutated(slot, 2);
        let cfg = OracleConfig::default();
        let v = verify_path_independence_with(&t, &[Move::Flip(i), Move::Flip(i)], &[], &cfg, &bad).unwrap();
        assert!(v.iter().any(|g| matches!(g.verdict, Verdict::NotEqual { .. })), "{v:?}");
    }

    #[test]
    fn reference_point_is_generic() {
        let x = reference_point(9);
        assert!(is_generic(&x));
        let t = once_punctured_torus();
        // Flipping twice returns the same marked triangulation.
        assert_eq!(transport_reference(&t, &[Move::Flip(1), Move::Flip(1)]).1, reference_point(3));
    }
}
