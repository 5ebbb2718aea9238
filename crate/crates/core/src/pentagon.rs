//! The order-5 recursion in the two-generator quantum torus `VU = q^2 UV`
//! and the per-case verification of the pentagon relation.
//!
//! Each pentagon check multiplies the binomial factors a side of the pentagon
//! picks up along the five flips and asks whether the product is 1. This is
//! decided twice, independently: symbolically, by rewriting every factor
//! into a word in the `U(k)` and cancelling, and numerically, by evaluating
//! the product with `U(k)` replaced by its explicit expression in `U, V`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ncrational::oracle::residual;
use crate::ncrational::{equals, OracleConfig, RationalExpression, Verdict};
use crate::surface::SigmaMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PentagonError {
    #[error("unsupported factor {0}: only odd offsets and powers ±1 have word forms")]
    UnsupportedFactor(String),
    #[error("unknown pentagon case {0}; cases are 1..=6")]
    UnknownCase(u8),
}

/// Skew form of `(U, V)` with `VU = q^2 UV`.
pub fn weyl_pair() -> Arc<SigmaMatrix> {
    Arc::new(SigmaMatrix::from_rows(vec![vec![0, -1], vec![1, 0]]))
}

#[derive(Clone, Debug)]
pub struct USequence {
    u: Vec<RationalExpression>,
    v: Vec<RationalExpression>,
}

impl USequence {
    /// `U(k)` for `0 <= k < 10`.
    pub fn u(&self, k: usize) -> &RationalExpression {
        &self.u[k]
    }

    pub fn v(&self, k: usize) -> &RationalExpression {
        &self.v[k]
    }

    /// `U(k)` with the index read mod 5.
    pub fn u_mod(&self, k: i64) -> &RationalExpression {
        &self.u[k.rem_euclid(5) as usize]
    }
}

/// `U(k+1) = (1 + q U(k)) V(k)`, `V(k+1) = U(k)^{-1}`, up to `k = 9`.
pub fn u_sequence() -> USequence {
    let s = weyl_pair();
    let mut u = vec![RationalExpression::generator(s.clone(), 1)];
    let mut v = vec![RationalExpression::generator(s, 2)];
    for k in 0..9 {
        let next = RationalExpression::binom(1, u[k].clone(), 1).multiply(&v[k]);
        v.push(u[k].invert());
        u.push(next);
    }
    USequence { u, v }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderFiveCheck {
    pub k: usize,
    pub u: Verdict,
    pub v: Verdict,
}

/// `U(k+5) = U(k)` and `V(k+5) = V(k)` for `k = 0..4`.
pub fn verify_order_five(seq: &USequence, cfg: &OracleConfig) -> Vec<OrderFiveCheck> {
    (0..5)
        .map(|k| OrderFiveCheck {
            k,
            u: equals(seq.u(k + 5), seq.u(k), cfg),
            v: equals(seq.v(k + 5), seq.v(k), cfg),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    /// Index mod 5.
    pub index: u8,
    pub power: i64,
}

impl Letter {
    pub fn new(index: i64, power: i64) -> Self {
        Letter { index: index.rem_euclid(5) as u8, power }
    }
}

/// `q^qexp` times an ordered product of `U(index)^power`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PentagonWord {
    pub qexp: i64,
    pub letters: Vec<Letter>,
}

impl PentagonWord {
    pub fn letter(index: i64, power: i64) -> Self {
        PentagonWord { qexp: 0, letters: vec![Letter::new(index, power)] }
    }

    pub fn is_scalar(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.letters.is_empty() && self.qexp == 0
    }

    pub fn concat(&self, other: &PentagonWord) -> PentagonWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PentagonWord { qexp: self.qexp + other.qexp, letters }
    }

    pub fn inverse(&self) -> PentagonWord {
        PentagonWord {
            qexp: -self.qexp,
            letters: self.letters.iter().rev().map(|l| Letter { index: l.index, power: -l.power }).collect(),
        }
    }

    /// The element of `W^q` the word denotes.
    pub fn to_expression(&self, seq: &USequence) -> RationalExpression {
        let mut e = RationalExpression::q_power(weyl_pair(), self.qexp);
        for l in &self.letters {
            e = e.multiply(&seq.u(l.index as usize).pow(l.power));
        }
        e
    }
}

impl fmt::Display for PentagonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.qexp != 0 || self.letters.is_empty() {
            parts.push(if self.qexp == 0 { "1".to_string() } else { format!("q^{}", self.qexp) });
        }
        for l in &self.letters {
            parts.push(if l.power == 1 { format!("U({})", l.index) } else { format!("U({})^{}", l.index, l.power) });
        }
        f.write_str(&parts.join("*"))
    }
}

/// `(1 + q^offset U(index)^{±1})^power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinomFactor {
    pub index: i64,
    pub offset: i64,
    pub inverse_generator: bool,
    pub power: i64,
}

impl fmt::Display for BinomFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = if self.inverse_generator { "^-1" } else { "" };
        write!(f, "(1 + q^{}*U({}){g})^{}", self.offset, self.index.rem_euclid(5), self.power)
    }
}

/// Rewrites a binomial factor as a word, using `U(k+1)U(k-1) = 1 + qU(k)`,
/// `U(k-1)U(k+1) = 1 + q^{-1}U(k)` and their deformed versions for
/// `U(k)^{-1}`. Other odd offsets are reached by conjugating with `U(k-1)`.
pub fn binom_to_word(f: &BinomFactor) -> Result<PentagonWord, PentagonError> {
    if f.power.abs() != 1 || f.offset.rem_euclid(2) != 1 {
        return Err(PentagonError::UnsupportedFactor(f.to_string()));
    }
    let k = f.index;
    let s: i64 = if f.inverse_generator { -1 } else { 1 };
    let base = |c: i64| -> PentagonWord {
        let w = |q: i64, idx: &[(i64, i64)]| PentagonWord {
            qexp: q,
            letters: idx.iter().map(|&(i, p)| Letter::new(i, p)).collect(),
        };
        match (c, s) {
            (1, 1) => w(0, &[(k + 1, 1), (k - 1, 1)]),
            (-1, 1) => w(0, &[(k - 1, 1), (k + 1, 1)]),
            (-1, _) => w(-1, &[(k, -1), (k + 1, 1), (k - 1, 1)]),
            _ => w(1, &[(k, -1), (k - 1, 1), (k + 1, 1)]),
        }
    };
    let oriented = |w: PentagonWord| if f.power < 0 { w.inverse() } else { w };
    if f.offset.abs() == 1 {
        return Ok(oriented(base(f.offset)));
    }
    // U(k-1)^a U(k)^s U(k-1)^{-a} = q^{-2as} U(k)^s
    let a = (1 - f.offset) / (2 * s);
    let conj = PentagonWord::letter(k - 1, a);
    Ok(conj.concat(&oriented(base(1))).concat(&conj.inverse()))
}

/// `x y = q^e y x`, when the two letters skew-commute.
fn swap_exponent(x: Letter, y: Letter) -> Option<i64> {
    if x.index == y.index {
        Some(0)
    } else if x.index == (y.index + 1) % 5 {
        Some(2 * x.power * y.power)
    } else if y.index == (x.index + 1) % 5 {
        Some(-2 * x.power * y.power)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: &'static str,
    pub before: PentagonWord,
    pub after: PentagonWord,
}

/// Deterministic reduction: merge equal neighbours, and otherwise bring the
/// leftmost letter that has a later partner of the same index next to it
/// through letters it q-commutes with.
pub fn reduce_word(w: &PentagonWord) -> (PentagonWord, Vec<Step>) {
    let mut cur = w.clone();
    let mut steps = Vec::new();
    loop {
        if let Some(i) = (0..cur.letters.len().saturating_sub(1)).find(|&i| cur.letters[i].index == cur.letters[i + 1].index) {
            let before = cur.clone();
            let p = cur.letters[i].power + cur.letters[i + 1].power;
            cur.letters.remove(i + 1);
            let rule = if p == 0 {
                cur.letters.remove(i);
                "cancel"
            } else {
                cur.letters[i].power = p;
                "merge"
            };
            steps.push(Step { rule, before, after: cur.clone() });
            continue;
        }
        let Some((i, j)) = movable_pair(&cur) else { break };
        let before = cur.clone();
        // Move letter j left until it sits right after letter i.
        for t in (i + 1..j).rev() {
            let (x, y) = (cur.letters[t], cur.letters[t + 1]);
            cur.qexp += swap_exponent(x, y).expect("checked by movable_pair");
            cur.letters.swap(t, t + 1);
        }
        steps.push(Step { rule: "commute", before, after: cur.clone() });
    }
    (cur, steps)
}

fn movable_pair(w: &PentagonWord) -> Option<(usize, usize)> {
    let n = w.letters.len();
    for i in 0..n {
        for j in i + 1..n {
            let y = w.letters[j];
            if y.index == w.letters[i].index {
                if (i + 1..j).all(|t| swap_exponent(w.letters[t], y).is_some()) {
                    return Some((i, j));
                }
                break;
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideFactor {
    Binom(BinomFactor),
    /// The flipped diagonal itself, when a side fills two slots of the square.
    Diagonal(i64),
}

impl SideFactor {
    pub fn to_word(&self) -> Result<PentagonWord, PentagonError> {
        match self {
            SideFactor::Binom(b) => binom_to_word(b),
            SideFactor::Diagonal(k) => Ok(PentagonWord::letter(*k, 1)),
        }
    }

    pub fn to_expression(&self, seq: &USequence) -> RationalExpression {
        match self {
            SideFactor::Binom(b) => {
                let g = seq.u_mod(b.index).pow(if b.inverse_generator { -1 } else { 1 });
                RationalExpression::binom(b.offset, g, b.power)
            }
            SideFactor::Diagonal(k) => seq.u_mod(*k).clone(),
        }
    }
}

impl fmt::Display for SideFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideFactor::Binom(b) => write!(f, "{b}"),
            SideFactor::Diagonal(k) => write!(f, "U({})", k.rem_euclid(5)),
        }
    }
}

const SIDES: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

/// At flip `k` of the embedded pentagon: the side in the slot paired with
/// the other diagonal (factor `1 + qU(k)`) and the two sides in the other
/// slots (factor `(1 + qU(k)^{-1})^{-1}`).
const ROLES: [(usize, [usize; 2]); 5] = [(0, [1, 4]), (3, [2, 4]), (1, [0, 2]), (4, [0, 3]), (2, [1, 3])];

/// Which sides are the same edge, per case.
fn identifications(case: u8) -> Result<Vec<Vec<usize>>, PentagonError> {
    Ok(match case {
        1 => vec![vec![0], vec![1], vec![2], vec![3], vec![4]],
        2 => vec![vec![0, 1], vec![2], vec![3], vec![4]],
        3 => vec![vec![0, 2], vec![1], vec![3], vec![4]],
        4 => vec![vec![0, 1], vec![2, 3], vec![4]],
        5 => vec![vec![0, 1], vec![2, 4], vec![3]],
        6 => vec![vec![0, 2], vec![1, 4], vec![3]],
        _ => return Err(PentagonError::UnknownCase(case)),
    })
}

fn binom(index: i64, offset: i64, inverse_generator: bool, power: i64) -> SideFactor {
    SideFactor::Binom(BinomFactor { index, offset, inverse_generator, power })
}

/// Factors, leftmost first, of `X(5) X(0)^{-1}` for every edge among the
/// pentagon's sides.
pub fn side_products(case: u8) -> Result<Vec<(String, Vec<SideFactor>)>, PentagonError> {
    let classes = identifications(case)?;
    let mut out = Vec::new();
    for class in classes {
        let name: String = class.iter().map(|&s| SIDES[s]).collect();
        let mut factors = Vec::new();
        for k in (0..5).rev() {
            let (jl, km) = ROLES[k];
            let k = k as i64;
            let in_jl = class.contains(&jl);
            let in_km = km.iter().filter(|s| class.contains(s)).count();
            match (in_jl, in_km) {
                (false, 0) => {}
                (true, 0) => factors.push(binom(k, 1, false, 1)),
                (false, 1) => factors.push(binom(k, 1, true, -1)),
                (false, _) => {
                    factors.push(binom(k, 1, true, -1));
                    factors.push(binom(k, 3, true, -1));
                }
                (true, _) => factors.push(SideFactor::Diagonal(k)),
            }
        }
        out.push((name, factors));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SideCheck {
    pub side: String,
    pub factors: Vec<SideFactor>,
    pub word: PentagonWord,
    pub reduced: PentagonWord,
    pub steps: Vec<Step>,
    /// `(N, residual)` of the product against 1.
    pub residuals: Vec<(u64, Result<f64, String>)>,
}

impl SideCheck {
    pub fn symbolic_ok(&self) -> bool {
        self.reduced.is_one()
    }

    pub fn numeric_ok(&self, tol: f64) -> bool {
        !self.residuals.is_empty() && self.residuals.iter().all(|(_, r)| matches!(r, Ok(x) if *x < tol))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PentagonReport {
    pub case: u8,
    pub tolerance: f64,
    pub sides: Vec<SideCheck>,
}

impl PentagonReport {
    pub fn passes(&self) -> bool {
        self.sides.iter().all(|s| s.symbolic_ok() && s.numeric_ok(self.tolerance))
    }
}

pub fn verify_pentagon_case(case: u8, cfg: &OracleConfig) -> Result<PentagonReport, PentagonError> {
    let seq = u_sequence();
    let one = RationalExpression::one(weyl_pair());
    let mut sides = Vec::new();
    for (side, factors) in side_products(case)? {
        let mut word = PentagonWord::default();
        let mut expr = one.clone();
        for f in &factors {
            word = word.concat(&f.to_word()?);
            expr = expr.multiply(&f.to_expression(&seq));
        }
        let (reduced, steps) = reduce_word(&word);
        let residuals = cfg
            .moduli
            .iter()
            .map(|&n| (n, residual(&expr, &one, n, cfg).map_err(|e| e.to_string())))
            .collect();
        sides.push(SideCheck { side, factors, word, reduced, steps, residuals });
    }
    Ok(PentagonReport { case, tolerance: cfg.tolerance, sides })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncrational::oracle::equals_numeric;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_terms() {
        let seq = u_sequence();
        assert_eq!(seq.u(1).to_string(), "(1 + q^1*X1)^1*X2");
        assert_eq!(seq.v(1).to_string(), "X1^-1");
    }

    #[test]
    fn order_five() {
        let seq = u_sequence();
        let checks = verify_order_five(&seq, &OracleConfig::default());
        assert_eq!(checks[0].u, Verdict::EqualExact);
        assert!(checks.iter().all(|c| c.u.is_equal() && c.v.is_equal()), "{checks:?}");
    }

    #[test]
    fn word_rules() {
        let w = |f| binom_to_word(&f).unwrap().to_string();
        let b = |index, offset, inverse_generator, power| BinomFactor { index, offset, inverse_generator, power };
        assert_eq!(w(b(2, 1, false, 1)), "U(3)*U(1)");
        assert_eq!(w(b(2, -1, false, 1)), "U(1)*U(3)");
        assert_eq!(w(b(2, 1, false, -1)), "U(1)^-1*U(3)^-1");
        assert_eq!(w(b(2, 1, true, -1)), "q^-1*U(3)^-1*U(1)^-1*U(2)");
        assert_eq!(w(b(0, 1, false, 1)), "U(1)*U(4)");
        assert!(binom_to_word(&b(0, 2, false, 1)).is_err());
        assert!(binom_to_word(&b(0, 1, false, 2)).is_err());
    }

    #[test]
    fn word_rules_are_sound() {
        let seq = u_sequence();
        let cfg = OracleConfig::default();
        for k in 0..5 {
            for offset in [-3, -1, 1, 3] {
                for inverse_generator in [false, true] {
                    for power in [1, -1] {
                        let f = SideFactor::Binom(BinomFactor { index: k, offset, inverse_generator, power });
                        let word = f.to_word().unwrap().to_expression(&seq);
                        let v = equals_numeric(&word, &f.to_expression(&seq), &cfg);
                        assert!(v.is_equal(), "{f}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn three_term_collapse() {
        for k in 0..5 {
            let a = binom_to_word(&BinomFactor { index: k + 3, offset: 1, inverse_generator: true, power: -1 }).unwrap();
            let b = binom_to_word(&BinomFactor { index: k + 2, offset: 1, inverse_generator: true, power: -1 }).unwrap();
            let target = binom_to_word(&BinomFactor { index: k, offset: 1, inverse_generator: false, power: -1 }).unwrap();
            let (r, _) = reduce_word(&a.concat(&b).concat(&target.inverse()));
            assert!(r.is_one(), "k={k}: {r}");
        }
    }

    #[test]
    fn case_three_word() {
        let l = |i, p| Letter::new(i, p);
        let w = PentagonWord {
            qexp: -2,
            letters: vec![
                l(0, 1), l(3, 1), l(4, -1), l(3, -1), l(1, -1), l(2, 1), l(1, -1), l(2, -1), l(0, -1), l(1, 1),
                l(1, 1), l(4, 1),
            ],
        };
        let (r, steps) = reduce_word(&w);
        assert!(r.is_one(), "{r}");
        assert!(!steps.is_empty());
        assert!(reduce_word(&PentagonWord::letter(2, 1).concat(&PentagonWord::letter(2, -1))).0.is_one());
    }

    #[test]
    fn worked_products() {
        let p = side_products(2).unwrap();
        let ab = p.iter().find(|(s, _)| s == "ab").unwrap();
        let text: Vec<String> = ab.1.iter().map(|f| f.to_string()).collect();
        assert_eq!(text, ["(1 + q^1*U(4)^-1)^-1", "(1 + q^1*U(3)^-1)^-1", "U(2)", "U(0)"]);
        let p = side_products(3).unwrap();
        let ac = p.iter().find(|(s, _)| s == "ac").unwrap();
        let text: Vec<String> = ac.1.iter().map(|f| f.to_string()).collect();
        assert_eq!(
            text,
            [
                "(1 + q^1*U(4))^1",
                "(1 + q^1*U(3)^-1)^-1",
                "(1 + q^1*U(2)^-1)^-1",
                "(1 + q^3*U(2)^-1)^-1",
                "(1 + q^1*U(1)^-1)^-1",
                "(1 + q^1*U(0))^1"
            ]
        );
    }

    #[test]
    fn all_cases_pass() {
        let cfg = OracleConfig::default();
        for case in 1..=6 {
            let r = verify_pentagon_case(case, &cfg).unwrap();
            for s in &r.sides {
                assert!(s.symbolic_ok(), "case {case} side {}: {}", s.side, s.reduced);
                assert!(s.numeric_ok(1e-9), "case {case} side {}: {:?}", s.side, s.residuals);
            }
        }
        assert_eq!(verify_pentagon_case(7, &cfg), Err(PentagonError::UnknownCase(7)));
    }

    #[test]
    fn reduction_preserves_value() {
        let seq = u_sequence();
        let cfg = OracleConfig { moduli: vec![5, 7], ..OracleConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let len = rng.gen_range(1..=12);
            let letters = (0..len).map(|_| Letter::new(rng.gen_range(0..5), if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
            let w = PentagonWord { qexp: rng.gen_range(-3..=3), letters };
            let (r, _) = reduce_word(&w);
            let v = equals_numeric(&w.to_expression(&seq), &r.to_expression(&seq), &cfg);
            assert!(v.is_equal(), "{w} -> {r}: {v}");
        }
    }
}
