use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Integer Laurent polynomial in `q`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QCoefficient {
    terms: BTreeMap<i64, BigInt>,
}

impl QCoefficient {
    pub fn zero() -> Self {
        QCoefficient::default()
    }

    pub fn one() -> Self {
        QCoefficient::q_pow(0)
    }

    pub fn q_pow(e: i64) -> Self {
        QCoefficient::term(BigInt::one(), e)
    }

    /// `c * q^e`.
    pub fn term(c: impl Into<BigInt>, e: i64) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        QCoefficient { terms }
    }

    pub fn from_terms(pairs: impl IntoIterator<Item = (i64, BigInt)>) -> Self {
        let mut out = QCoefficient::zero();
        for (e, c) in pairs {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_monomial().is_some_and(|(c, e)| e == 0 && c.is_one())
    }

    /// `Some((c, e))` when the coefficient is a single term `c q^e`.
    pub fn as_monomial(&self) -> Option<(&BigInt, i64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (c, *e))
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Multiplies by `q^e`.
    pub fn shift(&self, e: i64) -> Self {
        QCoefficient { terms: self.terms.iter().map(|(k, c)| (k + e, c.clone())).collect() }
    }

    /// Exact division by a unit `±q^e`; `None` for any other divisor.
    pub fn div_unit(&self, d: &QCoefficient) -> Option<Self> {
        let (c, e) = d.as_monomial()?;
        if c.abs() != BigInt::one() {
            return None;
        }
        let shifted = self.shift(-e);
        Some(if c.is_negative() { -shifted } else { shifted })
    }

    /// Replaces `q` by `q^k`.
    pub fn substitute_power(&self, k: i64) -> Self {
        QCoefficient::from_terms(self.terms.iter().map(|(e, c)| (e * k, c.clone())))
    }

    pub fn eval(&self, q: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| q.powi(*e as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> BigInt {
        self.terms.values().sum()
    }
}

impl Add for &QCoefficient {
    type Output = QCoefficient;
    fn add(self, rhs: &QCoefficient) -> QCoefficient {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &QCoefficient {
    type Output = QCoefficient;
    fn sub(self, rhs: &QCoefficient) -> QCoefficient {
        self + &(-rhs)
    }
}

impl Neg for &QCoefficient {
    type Output = QCoefficient;
    fn neg(self) -> QCoefficient {
        QCoefficient { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Neg for QCoefficient {
    type Output = QCoefficient;
    fn neg(self) -> QCoefficient {
        -&self
    }
}

impl Mul for &QCoefficient {
    type Output = QCoefficient;
    fn mul(self, rhs: &QCoefficient) -> QCoefficient {
        let mut out = QCoefficient::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

fn fmt_q_term(f: &mut fmt::Formatter<'_>, c: &BigInt, e: i64) -> fmt::Result {
    let one = BigInt::one();
    match (e, c) {
        (0, c) => write!(f, "{c}"),
        (e, c) if *c == one => write!(f, "q^{e}"),
        (e, c) if *c == -one => write!(f, "-q^{e}"),
        (e, c) => write!(f, "{c}*q^{e}"),
    }
}

/// Renders as a sum of `c*q^e` terms in increasing exponent order; the zero
/// coefficient prints as `0`.
impl fmt::Display for QCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                if c.is_negative() {
                    write!(f, " - ")?;
                    fmt_q_term(f, &-c, *e)?;
                    continue;
                }
                write!(f, " + ")?;
            }
            fmt_q_term(f, c, *e)?;
        }
        Ok(())
    }
}
