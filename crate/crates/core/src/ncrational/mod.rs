//! Noncommutative rational expressions over a quantum torus.
//!
//! An expression is a word of factors, each either a signed q-monomial
//! `±q^e X^v` or a binomial power `(1 + q^c B)^s` whose base `B` is again an
//! expression. This is closed under substitution of generator images,
//! which is all the coordinate changes need.
//!
//! Equality is decided in two tiers: [`normalize`] is an exact rewriting
//! normal form, and [`oracle`] evaluates expressions in finite-dimensional
//! root-of-unity representations.

mod normal;
pub mod oracle;
mod parse;
mod skew;

pub use normal::{normalize, NormalForm, NormalStatus};
pub use oracle::{equals, OracleConfig, OracleError, Verdict};
pub use parse::parse_expression;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::qtorus::{reorder_exponent, ExponentVector, QCoefficient, TorusPolynomial};
use crate::surface::SigmaMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("expressions live over different skew forms")]
    AmbientMismatch,
    #[error("generator X{index} out of range 1..={n}")]
    GeneratorOutOfRange { index: usize, n: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expression is not a Laurent polynomial")]
    NotPolynomial,
}

/// `±q^qexp X^exps` in the ordered basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub negative: bool,
    pub qexp: i64,
    pub exps: ExponentVector,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial { negative: false, qexp: 0, exps: vec![0; n] }
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.qexp == 0 && self.is_scalar()
    }

    pub fn is_scalar(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial, sigma: &SigmaMatrix) -> Monomial {
        Monomial {
            negative: self.negative != other.negative,
            qexp: self.qexp + other.qexp + 2 * reorder_exponent(&self.exps, &other.exps, sigma),
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn inverse(&self, sigma: &SigmaMatrix) -> Monomial {
        let neg: ExponentVector = self.exps.iter().map(|x| -x).collect();
        let r = reorder_exponent(&self.exps, &neg, sigma);
        Monomial { negative: self.negative, qexp: -self.qexp - 2 * r, exps: neg }
    }

    pub fn pow(&self, k: i64, sigma: &SigmaMatrix) -> Monomial {
        let base = if k < 0 { self.inverse(sigma) } else { self.clone() };
        let mut out = Monomial::one(self.exps.len());
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base, sigma);
        }
        out
    }

    pub fn to_polynomial(&self, sigma: Arc<SigmaMatrix>) -> TorusPolynomial {
        let c = QCoefficient::term(if self.negative { -1 } else { 1 }, self.qexp);
        TorusPolynomial::monomial(c, self.exps.clone(), sigma).expect("length matches")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Mono(Monomial),
    /// `(1 + q^offset * base)^power`, `power != 0`.
    Binom { offset: i64, base: RationalExpression, power: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalExpression {
    sigma: Arc<SigmaMatrix>,
    factors: Vec<Factor>,
}

impl RationalExpression {
    pub fn one(sigma: Arc<SigmaMatrix>) -> Self {
        RationalExpression { sigma, factors: Vec::new() }
    }

    pub fn generator(sigma: Arc<SigmaMatrix>, i: usize) -> Self {
        Self::generator_pow(sigma, i, 1)
    }

    pub fn generator_pow(sigma: Arc<SigmaMatrix>, i: usize, k: i64) -> Self {
        let mut exps = vec![0; sigma.dim()];
        exps[i - 1] = k;
        Self::monomial(sigma, Monomial { negative: false, qexp: 0, exps })
    }

    pub fn q_power(sigma: Arc<SigmaMatrix>, e: i64) -> Self {
        let n = sigma.dim();
        Self::monomial(sigma, Monomial { negative: false, qexp: e, exps: vec![0; n] })
    }

    pub fn monomial(sigma: Arc<SigmaMatrix>, m: Monomial) -> Self {
        assert_eq!(m.exps.len(), sigma.dim(), "monomial length must match the algebra");
        let mut e = Self::one(sigma);
        e.push(Factor::Mono(m));
        e
    }

    /// `(1 + q^offset * base)^power`. A leading q-power of the base is moved
    /// into the offset so that printing and parsing agree.
    pub fn binom(offset: i64, base: RationalExpression, power: i64) -> Self {
        let sigma = base.sigma.clone();
        let mut e = Self::one(sigma);
        e.push(Self::binom_factor(offset, base, power));
        e
    }

    pub(crate) fn binom_factor(mut offset: i64, mut base: RationalExpression, power: i64) -> Factor {
        if let Some(Factor::Mono(m)) = base.factors.first_mut() {
            offset += m.qexp;
            m.qexp = 0;
            if m.is_one() {
                base.factors.remove(0);
            }
        }
        Factor::Binom { offset, base, power }
    }

    pub fn sigma(&self) -> &Arc<SigmaMatrix> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Appends a factor, merging adjacent monomials and dropping trivial ones.
    fn push(&mut self, f: Factor) {
        match f {
            Factor::Mono(m) => {
                let merged = match self.factors.last() {
                    Some(Factor::Mono(prev)) => {
                        let p = prev.mul(&m, &self.sigma);
                        self.factors.pop();
                        p
                    }
                    _ => m,
                };
                if !merged.is_one() {
                    self.factors.push(Factor::Mono(merged));
                }
            }
            Factor::Binom { power: 0, .. } => {}
            b => self.factors.push(b),
        }
    }

    fn check_ambient(&self, other: &Self) -> Result<(), NcError> {
        if Arc::ptr_eq(&self.sigma, &other.sigma) || self.sigma == other.sigma {
            Ok(())
        } else {
            Err(NcError::AmbientMismatch)
        }
    }

    pub fn try_multiply(&self, other: &Self) -> Result<Self, NcError> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for f in &other.factors {
            out.push(f.clone());
        }
        Ok(out)
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.try_multiply(other).expect("ambient mismatch in multiply")
    }

    pub fn invert(&self) -> Self {
        let mut out = Self::one(self.sigma.clone());
        for f in self.factors.iter().rev() {
            out.push(match f {
                Factor::Mono(m) => Factor::Mono(m.inverse(&self.sigma)),
                Factor::Binom { offset, base, power } => {
                    Factor::Binom { offset: *offset, base: base.clone(), power: -power }
                }
            });
        }
        out
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.invert() } else { self.clone() };
        let mut out = Self::one(self.sigma.clone());
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// Generators (1-based) with a nonzero exponent anywhere in the word.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.dim()];
        self.mark_support(&mut used);
        used.iter().enumerate().filter(|(_, u)| **u).map(|(i, _)| i + 1).collect()
    }

    fn mark_support(&self, used: &mut [bool]) {
        for f in &self.factors {
            match f {
                Factor::Mono(m) => {
                    for (u, e) in used.iter_mut().zip(&m.exps) {
                        *u |= *e != 0;
                    }
                }
                Factor::Binom { base, .. } => base.mark_support(used),
            }
        }
    }

    /// Maximum binomial nesting depth.
    pub fn depth(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Mono(_) => 0,
                Factor::Binom { base, .. } => 1 + base.depth(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Exact expansion; fails on any binomial that is still inverted after
    /// normalization.
    pub fn as_polynomial(&self) -> Result<TorusPolynomial, NcError> {
        let nf = normalize(self);
        nf.expr.expand()
    }

    fn expand(&self) -> Result<TorusPolynomial, NcError> {
        let mut out = TorusPolynomial::one(self.sigma.clone());
        for f in &self.factors {
            let p = match f {
                Factor::Mono(m) => m.to_polynomial(self.sigma.clone()),
                Factor::Binom { power, .. } if *power < 0 => return Err(NcError::NotPolynomial),
                Factor::Binom { offset, base, power } => {
                    let b = base.expand()?.scale(&QCoefficient::q_pow(*offset));
                    let step = &TorusPolynomial::one(self.sigma.clone()) + &b;
                    step.pow(*power).expect("nonnegative power")
                }
            };
            out = &out * &p;
        }
        Ok(out)
    }

    /// Replaces every generator `X_i` by `images[i-1]`, monomials being
    /// expanded in the ordered basis.
    pub fn substitute(&self, images: &[RationalExpression], target: &Arc<SigmaMatrix>) -> RationalExpression {
        assert_eq!(images.len(), self.dim(), "one image per generator");
        let mut out = RationalExpression::one(target.clone());
        for f in &self.factors {
            match f {
                Factor::Mono(m) => {
                    let scalar = Monomial { negative: m.negative, qexp: m.qexp, exps: vec![0; target.dim()] };
                    out.push(Factor::Mono(scalar));
                    for (i, &k) in m.exps.iter().enumerate() {
                        if k != 0 {
                            out = out.multiply(&images[i].pow(k));
                        }
                    }
                }
                Factor::Binom { offset, base, power } => {
                    let b = base.substitute(images, target);
                    out.push(Self::binom_factor(*offset, b, *power));
                }
            }
        }
        out
    }
}

pub(crate) fn format_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    if m.qexp != 0 {
        parts.push(format!("q^{}", m.qexp));
    }
    let x = crate::qtorus::format_exponents(&m.exps);
    if !x.is_empty() {
        parts.push(x);
    }
    let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
    if m.negative {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Mono(m) => write!(f, "{}", format_monomial(m)),
            Factor::Binom { offset, base, power } => write!(f, "(1 + q^{offset}*{base})^{power}"),
        }
    }
}

impl fmt::Display for RationalExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("*"))
    }
}
