//! The q-ordered puncture elements `P_j`, the element `H`, and their
//! invariance under the coordinate changes.

use std::sync::Arc;

use num_bigint::Sign;

use crate::coordchange::{move_hom, CoordChangeError, FlipTable};
use crate::ncrational::{equals, Monomial, OracleConfig, RationalExpression, Verdict};
use crate::qtorus::{comm_exponent, unit_vector, ExponentVector, QCoefficient, TorusPolynomial};
use crate::surface::{FlipTag, IdealTriangulation, Move, SigmaMatrix};

/// `q^{-Σ_{i<i'} σ_ii' u_i u_i'}` in front of the ordered monomial `X^u`,
/// which makes the result independent of the order of the generators.
pub fn weyl_exponent(u: &[i64], sigma: &SigmaMatrix) -> i64 {
    let n = u.len();
    let mut e = 0;
    for i in 0..n {
        for j in i + 1..n {
            e -= sigma.at(i, j) * u[i] * u[j];
        }
    }
    e
}

fn weyl_monomial(u: ExponentVector, sigma: &Arc<SigmaMatrix>) -> TorusPolynomial {
    let c = QCoefficient::q_pow(weyl_exponent(&u, sigma));
    TorusPolynomial::monomial(c, u, sigma.clone()).expect("exponent vector matches the algebra")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralElements {
    pub p: Vec<TorusPolynomial>,
    pub h: TorusPolynomial,
}

impl CentralElements {
    /// `P_1, …, P_p, H` with display names.
    pub fn named(&self) -> Vec<(String, &TorusPolynomial)> {
        let mut out: Vec<(String, &TorusPolynomial)> =
            self.p.iter().enumerate().map(|(j, p)| (format!("P{}", j + 1), p)).collect();
        out.push(("H".to_string(), &self.h));
        out
    }
}

pub fn central_elements(t: &IdealTriangulation) -> CentralElements {
    let sigma = Arc::new(t.sigma());
    let pd = t.vertex_orbits();
    let n = t.edge_count();
    let p = (0..pd.puncture_count()).map(|j| weyl_monomial((0..n).map(|i| i64::from(pd.k[i][j])).collect(), &sigma)).collect();
    CentralElements { p, h: weyl_monomial(vec![1; n], &sigma) }
}

fn as_expression(z: &TorusPolynomial) -> RationalExpression {
    let (c, u) = z.as_monomial().expect("central elements are monomials");
    let (coeff, qexp) = c.as_monomial().expect("unit coefficient");
    RationalExpression::monomial(z.sigma().clone(), Monomial { negative: coeff.sign() == Sign::Minus, qexp, exps: u.clone() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityReport {
    /// `(element, generator, exponent of q in Z X_i Z^{-1} X_i^{-1})`.
    pub exponents: Vec<(String, usize, i64)>,
    /// Whether `Z X_i = X_i Z` holds as a product of torus polynomials.
    pub products_commute: bool,
}

impl CentralityReport {
    pub fn all_zero(&self) -> bool {
        self.products_commute && self.exponents.iter().all(|e| e.2 == 0)
    }
}

pub fn verify_centrality(t: &IdealTriangulation) -> CentralityReport {
    let sigma = Arc::new(t.sigma());
    let z = central_elements(t);
    let n = t.edge_count();
    let mut exponents = Vec::new();
    let mut products_commute = true;
    for (name, p) in z.named() {
        let (_, u) = p.as_monomial().expect("monomial");
        for i in 1..=n {
            exponents.push((name.clone(), i, 2 * comm_exponent(u, &unit_vector(n, i), &sigma)));
            let x = TorusPolynomial::generator(sigma.clone(), i);
            products_commute &= p * &x == &x * p;
        }
    }
    CentralityReport { exponents, products_commute }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub mv: Move,
    pub tag: Option<FlipTag>,
    /// `(element, verdict)` for `Phi(Z') = Z`.
    pub checks: Vec<(String, Verdict)>,
}

impl InvarianceReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.1.is_equal())
    }
}

pub fn verify_invariance(t: &IdealTriangulation, mv: &Move, cfg: &OracleConfig) -> Result<InvarianceReport, CoordChangeError> {
    verify_invariance_with(t, mv, cfg, &FlipTable::standard())
}

/// Transports the central elements of `mv(t)` back to `t` and compares them
/// with those of `t`, punctures matched through the move.
pub fn verify_invariance_with(
    t: &IdealTriangulation,
    mv: &Move,
    cfg: &OracleConfig,
    table: &FlipTable,
) -> Result<InvarianceReport, CoordChangeError> {
    let hom = move_hom(t, mv, table)?;
    let tag = match mv {
        Move::Flip(i) => Some(t.classify_flip(*i).tag),
        Move::Reindex(_) => None,
    };
    let here = central_elements(t);
    let there = central_elements(hom.source());
    let origin = t.puncture_correspondence(mv);
    let mut checks = Vec::new();
    for (j, p) in there.p.iter().enumerate() {
        let image = hom.apply(&as_expression(p));
        checks.push((format!("P{}", origin[j] + 1), equals(&image, &as_expression(&here.p[origin[j]]), cfg)));
    }
    checks.sort_by(|a, b| a.0.cmp(&b.0));
    let image = hom.apply(&as_expression(&there.h));
    checks.push(("H".to_string(), equals(&image, &as_expression(&here.h), cfg)));
    Ok(InvarianceReport { mv: mv.clone(), tag, checks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SquareComparison {
    pub h_squared: TorusPolynomial,
    pub product: TorusPolynomial,
    /// `e` with `P_1 ⋯ P_p = q^e H^2`, when both are the same monomial up
    /// to a power of `q`.
    pub q_shift: Option<i64>,
}

impl SquareComparison {
    pub fn equal(&self) -> bool {
        self.q_shift == Some(0)
    }
}

/// Compares `H^2` with `P_1 ⋯ P_p`.
pub fn compare_h_squared(t: &IdealTriangulation) -> SquareComparison {
    let z = central_elements(t);
    let h_squared = &z.h * &z.h;
    let product = z.p.iter().fold(TorusPolynomial::one(z.h.sigma().clone()), |acc, p| &acc * p);
    let q_shift = match (h_squared.as_monomial(), product.as_monomial()) {
        (Some((c1, u1)), Some((c2, u2))) if u1 == u2 => match (c1.as_monomial(), c2.as_monomial()) {
            (Some((a1, e1)), Some((a2, e2))) if a1 == a2 => Some(e2 - e1),
            _ => None,
        },
        _ => None,
    };
    SquareComparison { h_squared, product, q_shift }
}

/// `P_j - 1` for every puncture, then `H - 1`.
pub fn cusped_ideal(t: &IdealTriangulation) -> Vec<TorusPolynomial> {
    let z = central_elements(t);
    let one = TorusPolynomial::one(z.h.sigma().clone());
    z.p.iter().chain(std::iter::once(&z.h)).map(|p| p - &one).collect()
}
