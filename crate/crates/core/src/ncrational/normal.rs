//! Exact rewriting normal form.
//!
//! A normalized word is a single monomial followed by binomial letters
//! `(1 + q^c B)^s`. Rewrites used:
//!
//! - bases are normalized first, their leading q-power moves into `c`;
//! - a letter with a monomial base `X^w` whose first nonzero exponent is
//!   negative is turned around with `1 + K = K (1 + K^{-1})`;
//! - monomials are pushed to the front, conjugating the letters they pass:
//!   `(1 + q^c B) X^u = X^u (1 + q^c X^{-u} B X^u)`;
//! - letters are put in the lexicographically least order reachable by
//!   swapping adjacent commuting letters, and equal neighbours are merged.

use std::sync::Arc;

use super::{Factor, Monomial, RationalExpression};
use crate::qtorus::{comm_exponent, ExponentVector};
use crate::surface::SigmaMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalStatus {
    /// No binomial letters remain.
    Monomial,
    /// Only binomials with monomial bases remain.
    MonomialTimesBinomials,
    /// Some binomial base did not reduce to a monomial.
    Partial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub status: NormalStatus,
    pub expr: RationalExpression,
}

impl NormalForm {
    pub fn is_one(&self) -> bool {
        self.expr.is_one()
    }

    pub fn leading_monomial(&self) -> Monomial {
        match self.expr.factors().first() {
            Some(Factor::Mono(m)) => m.clone(),
            _ => Monomial::one(self.expr.dim()),
        }
    }

    /// The binomial letters after the leading monomial.
    pub fn binomials(&self) -> &[Factor] {
        match self.expr.factors().first() {
            Some(Factor::Mono(_)) => &self.expr.factors()[1..],
            _ => self.expr.factors(),
        }
    }
}

pub fn normalize(e: &RationalExpression) -> NormalForm {
    let expr = normalize_word(e);
    let status = if expr.factors().iter().all(|f| matches!(f, Factor::Mono(_))) {
        NormalStatus::Monomial
    } else if expr
        .factors()
        .iter()
        .all(|f| matches!(f, Factor::Mono(_)) || simple_base(f).is_some_and(|m| !m.is_scalar()))
    {
        NormalStatus::MonomialTimesBinomials
    } else {
        NormalStatus::Partial
    };
    NormalForm { status, expr }
}

/// The monomial base of a letter, if its base is a single monomial.
fn simple_base(f: &Factor) -> Option<&Monomial> {
    match f {
        Factor::Binom { base, .. } => match base.factors() {
            [Factor::Mono(m)] => Some(m),
            _ => None,
        },
        Factor::Mono(_) => None,
    }
}

fn normalize_word(e: &RationalExpression) -> RationalExpression {
    let sigma = e.sigma().clone();
    let n = sigma.dim();

    let mut items: Vec<Factor> = Vec::with_capacity(e.factors().len());
    for f in e.factors() {
        match f {
            Factor::Mono(m) => items.push(Factor::Mono(m.clone())),
            Factor::Binom { offset, base, power } => {
                let letter = RationalExpression::binom_factor(*offset, normalize_word(base), *power);
                match orient(&letter, &sigma) {
                    Some((k, turned)) => {
                        items.push(Factor::Mono(k));
                        items.push(turned);
                    }
                    None => items.push(letter),
                }
            }
        }
    }

    let mut prefix = Monomial::one(n);
    let mut letters: Vec<Factor> = Vec::new();
    for item in items {
        match item {
            Factor::Mono(m) => {
                if !m.is_scalar() {
                    for l in letters.iter_mut() {
                        *l = conjugate_letter(l, &m.exps, &sigma);
                    }
                }
                prefix = prefix.mul(&m, &sigma);
            }
            letter => letters.push(letter),
        }
    }

    loop {
        letters = lexmin_order(letters, &sigma);
        let before = letters.len();
        letters = merge_neighbours(letters);
        if letters.len() == before {
            break;
        }
    }

    let mut out = RationalExpression::one(sigma);
    out.push(Factor::Mono(prefix));
    for l in letters {
        out.push(l);
    }
    out
}

/// `1 + K = K (1 + K^{-1})` for a monomial base with negative leading
/// exponent; returns `K^s` and the turned letter.
fn orient(letter: &Factor, sigma: &SigmaMatrix) -> Option<(Monomial, Factor)> {
    let m = simple_base(letter)?;
    let lead = m.exps.iter().find(|&&x| x != 0)?;
    if *lead > 0 {
        return None;
    }
    let Factor::Binom { offset, power, .. } = letter else { return None };
    let k = Monomial { negative: m.negative, qexp: *offset, exps: m.exps.clone() };
    let kinv = k.inverse(sigma);
    let base = RationalExpression::monomial(Arc::new(sigma.clone()), kinv);
    Some((k.pow(*power, sigma), RationalExpression::binom_factor(0, base, *power)))
}

/// `X^{-u} B X^u` for an arbitrary word.
fn conjugate_expr(e: &RationalExpression, u: &[i64], sigma: &SigmaMatrix) -> RationalExpression {
    let mut out = RationalExpression::one(e.sigma().clone());
    for f in e.factors() {
        match f {
            Factor::Mono(m) => {
                let mut m = m.clone();
                m.qexp += 2 * comm_exponent(&m.exps, u, sigma);
                out.push(Factor::Mono(m));
            }
            Factor::Binom { offset, base, power } => {
                out.push(RationalExpression::binom_factor(*offset, conjugate_expr(base, u, sigma), *power));
            }
        }
    }
    out
}

fn conjugate_letter(letter: &Factor, u: &[i64], sigma: &SigmaMatrix) -> Factor {
    match letter {
        Factor::Binom { offset, base, power } => {
            let conj = conjugate_expr(base, u, sigma);
            let conj = if simple_base(letter).is_some() { conj } else { normalize_word(&conj) };
            RationalExpression::binom_factor(*offset, conj, *power)
        }
        Factor::Mono(_) => unreachable!("letters are binomials"),
    }
}

fn collect_monomials(e: &RationalExpression, out: &mut Vec<ExponentVector>) {
    for f in e.factors() {
        match f {
            Factor::Mono(m) => {
                if !m.is_scalar() {
                    out.push(m.exps.clone());
                }
            }
            Factor::Binom { base, .. } => collect_monomials(base, out),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct LetterKey {
    kind: u8,
    exps: ExponentVector,
    negative: bool,
    text: String,
    offset: i64,
    power: i64,
}

struct Letter {
    factor: Factor,
    key: LetterKey,
    monos: Vec<ExponentVector>,
}

fn letter_of(factor: Factor) -> Letter {
    let Factor::Binom { offset, base, power } = &factor else { unreachable!("letters are binomials") };
    let key = match simple_base(&factor) {
        Some(m) => LetterKey {
            kind: 0,
            exps: m.exps.clone(),
            negative: m.negative,
            text: String::new(),
            offset: *offset,
            power: *power,
        },
        None => LetterKey {
            kind: 1,
            exps: Vec::new(),
            negative: false,
            text: base.to_string(),
            offset: *offset,
            power: *power,
        },
    };
    let mut monos = Vec::new();
    collect_monomials(base, &mut monos);
    Letter { factor, key, monos }
}

fn same_base(a: &Factor, b: &Factor) -> bool {
    match (a, b) {
        (Factor::Binom { base: x, .. }, Factor::Binom { base: y, .. }) => x == y,
        _ => false,
    }
}

fn commute(a: &Letter, b: &Letter, sigma: &SigmaMatrix) -> bool {
    same_base(&a.factor, &b.factor)
        || a.monos.iter().all(|u| b.monos.iter().all(|v| comm_exponent(u, v, sigma) == 0))
}

/// Lexicographically least linearization of the trace of `letters`.
fn lexmin_order(letters: Vec<Factor>, sigma: &SigmaMatrix) -> Vec<Factor> {
    let mut remaining: Vec<Letter> = letters.into_iter().map(letter_of).collect();
    let mut out = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<usize> = None;
        for p in 0..remaining.len() {
            if best.is_some_and(|b| remaining[b].key <= remaining[p].key) {
                continue;
            }
            if (0..p).all(|r| commute(&remaining[r], &remaining[p], sigma)) {
                best = Some(p);
            }
        }
        let p = best.expect("the first letter is always available");
        out.push(remaining.remove(p).factor);
    }
    out
}

fn merge_neighbours(letters: Vec<Factor>) -> Vec<Factor> {
    let mut out: Vec<Factor> = Vec::with_capacity(letters.len());
    for l in letters {
        if let (Some(Factor::Binom { offset: c1, base: b1, power: s1 }), Factor::Binom { offset: c2, base: b2, power: s2 }) =
            (out.last_mut(), &l)
        {
            if c1 == c2 && b1 == b2 {
                *s1 += s2;
                if *s1 == 0 {
                    out.pop();
                }
                continue;
            }
        }
        out.push(l);
    }
    out
}
