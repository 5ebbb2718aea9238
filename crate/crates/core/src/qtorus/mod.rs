//! The Chekhov-Fock quantum torus: Laurent polynomials in generators
//! `X_1..X_n` subject to `X_i X_j = q^{2 sigma_ij} X_j X_i`, over integer
//! Laurent polynomials in `q`.
//!
//! Terms are stored in the ordered basis `X^v = X_1^{v_1} ... X_n^{v_n}`.

mod coeff;

pub use coeff::QCoefficient;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::surface::SigmaMatrix;

pub type ExponentVector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QTorusError {
    #[error("exponent vector of length {got} in an algebra with {expected} generators")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operands live over different skew forms")]
    AmbientMismatch,
    #[error("element is not an invertible monomial")]
    NotInvertible,
}

/// `d` with `X^u X^v = q^{2d} X^v X^u`.
pub fn comm_exponent(u: &[i64], v: &[i64], sigma: &SigmaMatrix) -> i64 {
    let n = sigma.dim();
    let mut d = 0;
    for i in 0..n {
        if u[i] == 0 {
            continue;
        }
        for j in 0..n {
            d += sigma.at(i, j) * u[i] * v[j];
        }
    }
    d
}

/// `r` with `X^u X^v = q^{2r} X^{u+v}` in the ordered basis.
pub fn reorder_exponent(u: &[i64], v: &[i64], sigma: &SigmaMatrix) -> i64 {
    let n = sigma.dim();
    let mut r = 0;
    for i in 0..n {
        if u[i] == 0 {
            continue;
        }
        for j in 0..i {
            r += sigma.at(i, j) * u[i] * v[j];
        }
    }
    r
}

pub fn unit_vector(n: usize, i: usize) -> ExponentVector {
    let mut v = vec![0; n];
    v[i - 1] = 1;
    v
}

fn add_vec(u: &[i64], v: &[i64]) -> ExponentVector {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPolynomial {
    sigma: Arc<SigmaMatrix>,
    terms: BTreeMap<ExponentVector, QCoefficient>,
}

impl TorusPolynomial {
    pub fn zero(sigma: Arc<SigmaMatrix>) -> Self {
        TorusPolynomial { sigma, terms: BTreeMap::new() }
    }

    pub fn constant(sigma: Arc<SigmaMatrix>, c: QCoefficient) -> Self {
        let n = sigma.dim();
        Self::monomial(c, vec![0; n], sigma).expect("length matches")
    }

    pub fn one(sigma: Arc<SigmaMatrix>) -> Self {
        Self::constant(sigma, QCoefficient::one())
    }

    pub fn monomial(c: QCoefficient, v: ExponentVector, sigma: Arc<SigmaMatrix>) -> Result<Self, QTorusError> {
        if v.len() != sigma.dim() {
            return Err(QTorusError::DimensionMismatch { expected: sigma.dim(), got: v.len() });
        }
        let mut p = Self::zero(sigma);
        p.add_term(v, c);
        Ok(p)
    }

    /// The generator `X_i` (1-based).
    pub fn generator(sigma: Arc<SigmaMatrix>, i: usize) -> Self {
        let v = unit_vector(sigma.dim(), i);
        Self::monomial(QCoefficient::one(), v, sigma).expect("length matches")
    }

    pub fn sigma(&self) -> &Arc<SigmaMatrix> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &QCoefficient)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, v: ExponentVector, c: QCoefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&v) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&v);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(v, c);
            }
        }
    }

    fn check_ambient(&self, other: &Self) -> Result<(), QTorusError> {
        if Arc::ptr_eq(&self.sigma, &other.sigma) || self.sigma == other.sigma {
            Ok(())
        } else {
            Err(QTorusError::AmbientMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, QTorusError> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, QTorusError> {
        self.check_ambient(other)?;
        let mut out = Self::zero(self.sigma.clone());
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let r = reorder_exponent(u, v, &self.sigma);
                out.add_term(add_vec(u, v), (a * b).shift(2 * r));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &QCoefficient) -> Self {
        let mut out = Self::zero(self.sigma.clone());
        for (v, a) in &self.terms {
            out.add_term(v.clone(), a * c);
        }
        out
    }

    /// `Some((c, v))` for a single-term polynomial.
    pub fn as_monomial(&self) -> Option<(&QCoefficient, &ExponentVector)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(v, c)| (c, v))
        } else {
            None
        }
    }

    /// Inverse of a monomial `±q^e X^v`.
    pub fn inverse_monomial(&self) -> Result<Self, QTorusError> {
        let (c, v) = self.as_monomial().ok_or(QTorusError::NotInvertible)?;
        let (k, e) = c.as_monomial().ok_or(QTorusError::NotInvertible)?;
        if k.abs() != BigInt::one() {
            return Err(QTorusError::NotInvertible);
        }
        let neg: ExponentVector = v.iter().map(|x| -x).collect();
        // X^v X^{-v} = q^{2r} and so (X^v)^{-1} = q^{-2r} X^{-v}.
        let r = reorder_exponent(v, &neg, &self.sigma);
        let coef = QCoefficient::term(k.clone(), -e - 2 * r);
        Self::monomial(coef, neg, self.sigma.clone())
    }

    /// Integer power; negative powers need an invertible monomial.
    pub fn pow(&self, k: i64) -> Result<Self, QTorusError> {
        let base = if k < 0 { self.inverse_monomial()? } else { self.clone() };
        let mut out = Self::one(self.sigma.clone());
        for _ in 0..k.unsigned_abs() {
            out = out.try_mul(&base)?;
        }
        Ok(out)
    }

    /// Replaces `q` by `1`, returning commutative terms.
    pub fn at_q_one(&self) -> BTreeMap<ExponentVector, BigInt> {
        self.terms
            .iter()
            .map(|(v, c)| (v.clone(), c.at_one()))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }
}

impl Add for &TorusPolynomial {
    type Output = TorusPolynomial;
    fn add(self, rhs: &TorusPolynomial) -> TorusPolynomial {
        self.try_add(rhs).expect("ambient mismatch in add")
    }
}

impl Neg for &TorusPolynomial {
    type Output = TorusPolynomial;
    fn neg(self) -> TorusPolynomial {
        self.scale(&QCoefficient::term(-1, 0))
    }
}

impl Sub for &TorusPolynomial {
    type Output = TorusPolynomial;
    fn sub(self, rhs: &TorusPolynomial) -> TorusPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &TorusPolynomial {
    type Output = TorusPolynomial;
    fn mul(self, rhs: &TorusPolynomial) -> TorusPolynomial {
        self.try_mul(rhs).expect("ambient mismatch in mul")
    }
}

/// `X1^2*X3^-1`; empty for the zero vector.
pub fn format_exponents(v: &[i64]) -> String {
    let parts: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, e)| **e != 0)
        .map(|(i, e)| if *e == 1 { format!("X{}", i + 1) } else { format!("X{}^{e}", i + 1) })
        .collect();
    parts.join("*")
}

/// One term with its sign pulled out when the coefficient is a negative
/// single term.
fn format_term(c: &QCoefficient, v: &[i64]) -> (bool, String) {
    let mono = format_exponents(v);
    let (negative, coef) = match c.as_monomial() {
        Some((k, e)) => {
            let neg = k.is_negative();
            let k = k.abs();
            let mut parts = Vec::new();
            if !k.is_one() {
                parts.push(k.to_string());
            }
            if e != 0 {
                parts.push(format!("q^{e}"));
            }
            (neg, parts.join("*"))
        }
        None => (false, format!("({c})")),
    };
    let body = match (coef.is_empty(), mono.is_empty()) {
        (true, true) => "1".to_string(),
        (true, false) => mono,
        (false, true) => coef,
        (false, false) => format!("{coef}*{mono}"),
    };
    (negative, body)
}

/// Terms in lexicographic exponent order, e.g. `q^-2*X1^2*X3^-1 + X2`.
impl fmt::Display for TorusPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (v, c)) in self.terms.iter().enumerate() {
            let (neg, body) = format_term(c, v);
            match (n, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(rows: Vec<Vec<i64>>) -> Arc<SigmaMatrix> {
        Arc::new(SigmaMatrix::from_rows(rows))
    }

    fn sigma3() -> Arc<SigmaMatrix> {
        sig(vec![vec![0, -2, 1], vec![2, 0, -1], vec![-1, 1, 0]])
    }

    #[test]
    fn generators_skew_commute() {
        let s = sigma3();
        for i in 1..=3 {
            for j in 1..=3 {
                let xi = TorusPolynomial::generator(s.clone(), i);
                let xj = TorusPolynomial::generator(s.clone(), j);
                let lhs = &xi * &xj;
                let rhs = (&xj * &xi).scale(&QCoefficient::q_pow(2 * s.get(i, j)));
                assert_eq!(lhs, rhs, "{i} {j}");
            }
        }
    }

    #[test]
    fn case_four_relation() {
        let s = sigma3();
        let x1 = TorusPolynomial::generator(s.clone(), 1);
        let x2 = TorusPolynomial::generator(s.clone(), 2);
        assert_eq!(&x1 * &x2, (&x2 * &x1).scale(&QCoefficient::q_pow(-4)));
    }

    #[test]
    fn square_of_sum() {
        let s = sig(vec![vec![0, 1], vec![-1, 0]]);
        let x1 = TorusPolynomial::generator(s.clone(), 1);
        let x2 = TorusPolynomial::generator(s.clone(), 2);
        let p = &x1 + &x2;
        let sq = &p * &p;
        assert_eq!(sq.to_string(), "X2^2 + (q^-2 + 1)*X1*X2 + X1^2");
    }

    #[test]
    fn comm_exponent_examples() {
        let s = sig(vec![vec![0, -2, 0], vec![2, 0, 0], vec![0, 0, 0]]);
        assert_eq!(comm_exponent(&[2, 0, 0], &[0, 2, 0], &s), -8);
        assert_eq!(comm_exponent(&[1, 2, 3], &[1, 2, 3], &s), 0);
        assert_eq!(comm_exponent(&[1, 0, 0], &[0, 1, 0], &s), -2);
    }

    #[test]
    fn monomials_and_inverses() {
        let s = sigma3();
        let q2 = TorusPolynomial::constant(s.clone(), QCoefficient::q_pow(2));
        assert_eq!(q2.to_string(), "q^2");
        let m = TorusPolynomial::monomial(QCoefficient::term(-1, 3), vec![1, 2, -1], s.clone()).unwrap();
        let inv = m.inverse_monomial().unwrap();
        assert_eq!(&m * &inv, TorusPolynomial::one(s.clone()));
        assert_eq!(&inv * &m, TorusPolynomial::one(s.clone()));
        let x1 = TorusPolynomial::generator(s.clone(), 1);
        assert_eq!(&x1 * &x1.pow(-1).unwrap(), TorusPolynomial::one(s.clone()));
        assert!(TorusPolynomial::monomial(QCoefficient::one(), vec![1], s).is_err());
    }

    #[test]
    fn commutative_when_sigma_vanishes() {
        let s = Arc::new(SigmaMatrix::zero(2));
        let x1 = TorusPolynomial::generator(s.clone(), 1);
        let x2 = TorusPolynomial::generator(s.clone(), 2);
        let p = &x1 + &TorusPolynomial::one(s.clone());
        let r = &x2 - &x1;
        assert_eq!(&p * &r, &r * &p);
    }

    fn arb_poly() -> impl Strategy<Value = Vec<(Vec<i64>, i64, i64)>> {
        prop::collection::vec((prop::collection::vec(-2i64..=2, 3), -3i64..=3, -2i64..=2), 1..4)
    }

    fn build(s: &Arc<SigmaMatrix>, t: Vec<(Vec<i64>, i64, i64)>) -> TorusPolynomial {
        let mut p = TorusPolynomial::zero(s.clone());
        for (v, c, e) in t {
            p = &p + &TorusPolynomial::monomial(QCoefficient::term(c, e), v, s.clone()).unwrap();
        }
        p
    }

    proptest! {
        #[test]
        fn associative(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            let s = sigma3();
            let (a, b, c) = (build(&s, a), build(&s, b), build(&s, c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn distributive(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            let s = sigma3();
            let (a, b, c) = (build(&s, a), build(&s, b), build(&s, c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }
}
