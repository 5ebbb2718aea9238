//! Exact arithmetic in the division ring of a quantum torus.
//!
//! With generators ordered `Y_1, …, Y_r`, an element of level `k` is a right
//! fraction `A·B^{-1}` of skew Laurent polynomials in `Y_k` whose (left)
//! coefficients live at level `k-1`; level 0 is the field `Q(q)`. Moving
//! `Y_k` past a coefficient applies the conjugation `Y_k c Y_k^{-1}`, which
//! rescales each lower generator by a power of `q`. Both the Ore condition and
//! fraction reduction come from the Euclidean algorithm, so this decides
//! equality completely; a work budget keeps it from running away.

use std::cell::Cell;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Factor, RationalExpression};

type RPoly = Vec<BigRational>;

fn trim(p: &mut RPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn r_add(a: &RPoly, b: &RPoly) -> RPoly {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    trim(&mut out);
    out
}

fn r_mul(a: &RPoly, b: &RPoly) -> RPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn r_divrem(a: &RPoly, b: &RPoly) -> (RPoly, RPoly) {
    let mut r = a.clone();
    let mut quot = vec![BigRational::zero(); a.len().saturating_sub(b.len()) + 1];
    let lead = b.last().expect("division by zero polynomial");
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / lead;
        for (j, c) in b.iter().enumerate() {
            r[shift + j] -= &f * c;
        }
        quot[shift] = f;
        r.pop();
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

fn r_gcd(a: &RPoly, b: &RPoly) -> RPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let (_, r) = r_divrem(&x, &y);
        x = y;
        y = r;
    }
    x
}

/// `q^shift · num(q) / den(q)`, reduced, `den` monic, neither divisible by `q`.
#[derive(Clone, Debug, PartialEq)]
struct QFrac {
    shift: i64,
    num: RPoly,
    den: RPoly,
}

impl QFrac {
    fn zero() -> Self {
        QFrac { shift: 0, num: Vec::new(), den: vec![BigRational::one()] }
    }

    fn q_pow(e: i64) -> Self {
        QFrac { shift: e, num: vec![BigRational::one()], den: vec![BigRational::one()] }
    }

    fn minus_one() -> Self {
        QFrac { shift: 0, num: vec![-BigRational::one()], den: vec![BigRational::one()] }
    }

    fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn size(&self) -> usize {
        self.num.len() + self.den.len()
    }

    fn bits(&self) -> u64 {
        self.num
            .iter()
            .chain(&self.den)
            .map(|c| c.numer().bits() + c.denom().bits())
            .max()
            .unwrap_or(0)
    }

    fn reduced(mut shift: i64, mut num: RPoly, mut den: RPoly) -> Self {
        trim(&mut num);
        trim(&mut den);
        if num.is_empty() {
            return QFrac::zero();
        }
        let lz = num.iter().take_while(|c| c.is_zero()).count();
        num.drain(..lz);
        shift += lz as i64;
        let lz = den.iter().take_while(|c| c.is_zero()).count();
        den.drain(..lz);
        shift -= lz as i64;
        let g = r_gcd(&num, &den);
        if g.len() > 1 {
            num = r_divrem(&num, &g).0;
            den = r_divrem(&den, &g).0;
        }
        let lead = den.last().unwrap().clone();
        if !lead.is_one() {
            num.iter_mut().for_each(|c| *c /= &lead);
            den.iter_mut().for_each(|c| *c /= &lead);
        }
        QFrac { shift, num, den }
    }

    fn mul(&self, o: &QFrac) -> QFrac {
        if self.is_zero() || o.is_zero() {
            return QFrac::zero();
        }
        QFrac::reduced(self.shift + o.shift, r_mul(&self.num, &o.num), r_mul(&self.den, &o.den))
    }

    fn add(&self, o: &QFrac) -> QFrac {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let m = self.shift.min(o.shift);
        let lift = |p: &RPoly, by: i64| {
            let mut v = vec![BigRational::zero(); by as usize];
            v.extend(p.iter().cloned());
            v
        };
        let a = r_mul(&lift(&self.num, self.shift - m), &o.den);
        let b = r_mul(&lift(&o.num, o.shift - m), &self.den);
        QFrac::reduced(m, r_add(&a, &b), r_mul(&self.den, &o.den))
    }

    fn inv(&self) -> QFrac {
        QFrac::reduced(-self.shift, self.den.clone(), self.num.clone())
    }

    fn neg(&self) -> QFrac {
        QFrac { shift: self.shift, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Elem {
    Q(QFrac),
    F(Box<Frac>),
}

/// `num · den^{-1}` at `level`.
#[derive(Clone, Debug, PartialEq)]
struct Frac {
    level: usize,
    num: Poly,
    den: Poly,
}

/// `Σ c[m] Y^{low+m}` with coefficients on the left; trimmed at both ends.
#[derive(Clone, Debug, PartialEq)]
struct Poly {
    low: i64,
    c: Vec<Elem>,
}

impl Poly {
    fn empty() -> Self {
        Poly { low: 0, c: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn high(&self) -> i64 {
        self.low + self.c.len() as i64 - 1
    }

    fn monomial(c: Elem, m: i64) -> Self {
        let mut p = Poly { low: m, c: vec![c] };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(is_zero) {
            self.c.pop();
        }
        let lz = self.c.iter().take_while(|e| is_zero(e)).count();
        if lz == self.c.len() {
            *self = Poly::empty();
            return;
        }
        self.c.drain(..lz);
        self.low += lz as i64;
    }

    fn coeff(&self, m: i64) -> Option<&Elem> {
        if m < self.low {
            return None;
        }
        self.c.get((m - self.low) as usize)
    }
}

fn is_zero(e: &Elem) -> bool {
    match e {
        Elem::Q(f) => f.is_zero(),
        Elem::F(f) => f.num.is_zero(),
    }
}

/// Decides equality of expressions in the division ring.
pub(crate) struct SkewField {
    /// `twist[k][j]`: `Y_k Y_j Y_k^{-1} = q^{twist} Y_j`, levels 1-based.
    twist: Vec<Vec<i64>>,
    /// Original (0-based) generator index of each level.
    generators: Vec<usize>,
    work: Cell<u64>,
    limit: u64,
    failed: Cell<bool>,
}

const MAX_DEGREE: usize = 64;
const MAX_QFRAC: usize = 48;
const MAX_BITS: u64 = 2048;

impl SkewField {
    /// Field generated by the listed (0-based) generators in that order.
    pub(crate) fn new(e: &RationalExpression, generators: Vec<usize>, limit: u64) -> Self {
        let r = generators.len();
        let s = e.sigma();
        let mut twist = vec![vec![0; r + 1]; r + 1];
        for k in 1..=r {
            for j in 1..=r {
                twist[k][j] = 2 * s.at(generators[k - 1], generators[j - 1]);
            }
        }
        SkewField { twist, generators, work: Cell::new(0), limit, failed: Cell::new(false) }
    }

    fn top(&self) -> usize {
        self.generators.len()
    }

    fn charge(&self, units: usize) {
        let w = self.work.get() + units as u64;
        self.work.set(w);
        if w > self.limit {
            self.failed.set(true);
        }
    }

    fn charge_q(&self, f: &QFrac) {
        let bits = f.bits();
        self.charge(f.size() * f.size() * (1 + bits as usize / 64));
        if f.size() > MAX_QFRAC || bits > MAX_BITS {
            self.fail();
        }
    }

    fn fail(&self) {
        self.failed.set(true);
    }

    fn one(&self, level: usize) -> Elem {
        self.q_pow(level, 0)
    }

    fn q_pow(&self, level: usize, e: i64) -> Elem {
        self.scalar(level, QFrac::q_pow(e))
    }

    fn scalar(&self, level: usize, f: QFrac) -> Elem {
        if level == 0 {
            return Elem::Q(f);
        }
        let inner = self.scalar(level - 1, f);
        let one = self.one(level - 1);
        Elem::F(Box::new(Frac { level, num: Poly::monomial(inner, 0), den: Poly::monomial(one, 0) }))
    }


    fn zero_like(&self, e: &Elem) -> Elem {
        match e {
            Elem::Q(_) => Elem::Q(QFrac::zero()),
            Elem::F(f) => Elem::F(Box::new(Frac {
                level: f.level,
                num: Poly::empty(),
                den: Poly::monomial(self.one(f.level - 1), 0),
            })),
        }
    }

    /// `Y_k^n e Y_k^{-n}` for `e` below level `k`.
    fn tau(&self, e: &Elem, k: usize, n: i64) -> Elem {
        match e {
            Elem::Q(_) => e.clone(),
            _ if n == 0 => e.clone(),
            Elem::F(f) => {
                self.charge(f.num.c.len() + f.den.c.len());
                let t = self.twist[k][f.level] * n;
                let conj = |p: &Poly| Poly {
                    low: p.low,
                    c: p
                        .c
                        .iter()
                        .enumerate()
                        .map(|(m, c)| self.scale_q(&self.tau(c, k, n), t * (p.low + m as i64)))
                        .collect(),
                };
                Elem::F(Box::new(Frac { level: f.level, num: conj(&f.num), den: conj(&f.den) }))
            }
        }
    }

    /// Multiplies by the central element `q^p`.
    fn scale_q(&self, e: &Elem, p: i64) -> Elem {
        if p == 0 {
            return e.clone();
        }
        match e {
            Elem::Q(f) => Elem::Q(f.mul(&QFrac::q_pow(p))),
            Elem::F(f) => Elem::F(Box::new(Frac {
                level: f.level,
                num: Poly { low: f.num.low, c: f.num.c.iter().map(|c| self.scale_q(c, p)).collect() },
                den: f.den.clone(),
            })),
        }
    }

    fn neg(&self, e: &Elem) -> Elem {
        match e {
            Elem::Q(f) => Elem::Q(f.neg()),
            Elem::F(f) => Elem::F(Box::new(Frac { level: f.level, num: self.p_neg(&f.num), den: f.den.clone() })),
        }
    }

    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        if self.failed.get() {
            return a.clone();
        }
        match (a, b) {
            (Elem::Q(x), Elem::Q(y)) => {
                let s = x.add(y);
                self.charge_q(&s);
                Elem::Q(s)
            }
            (Elem::F(x), Elem::F(y)) => Elem::F(Box::new(self.f_add(x, y))),
            _ => unreachable!("mixed levels"),
        }
    }

    fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        if self.failed.get() {
            return a.clone();
        }
        match (a, b) {
            (Elem::Q(x), Elem::Q(y)) => {
                let p = x.mul(y);
                self.charge_q(&p);
                Elem::Q(p)
            }
            (Elem::F(x), Elem::F(y)) => Elem::F(Box::new(self.f_mul(x, y))),
            _ => unreachable!("mixed levels"),
        }
    }

    fn inv(&self, a: &Elem) -> Elem {
        if is_zero(a) {
            self.fail();
            return a.clone();
        }
        match a {
            Elem::Q(x) => Elem::Q(x.inv()),
            Elem::F(f) => Elem::F(Box::new(self.f_reduce(f.level, f.den.clone(), f.num.clone()))),
        }
    }

    fn p_neg(&self, a: &Poly) -> Poly {
        Poly { low: a.low, c: a.c.iter().map(|c| self.neg(c)).collect() }
    }

    fn p_add(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let low = a.low.min(b.low);
        let high = a.high().max(b.high());
        let mut c = Vec::with_capacity((high - low + 1) as usize);
        for m in low..=high {
            c.push(match (a.coeff(m), b.coeff(m)) {
                (Some(x), Some(y)) => self.add(x, y),
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => self.zero_like(&a.c[0]),
            });
        }
        let mut p = Poly { low, c };
        p.trim();
        p
    }

    fn p_sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.p_add(a, &self.p_neg(b))
    }

    /// Product at level `k`: `(a Y^m)(b Y^n) = a tau_k^m(b) Y^{m+n}`.
    fn p_mul(&self, k: usize, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() || self.failed.get() {
            return Poly::empty();
        }
        if a.c.len() + b.c.len() > MAX_DEGREE {
            self.fail();
            return Poly::empty();
        }
        self.charge(a.c.len() * b.c.len());
        let mut acc: Vec<Option<Elem>> = vec![None; a.c.len() + b.c.len() - 1];
        for (i, x) in a.c.iter().enumerate() {
            let m = a.low + i as i64;
            for (j, y) in b.c.iter().enumerate() {
                let t = self.mul(x, &self.tau(y, k, m));
                acc[i + j] = Some(match acc[i + j].take() {
                    None => t,
                    Some(s) => self.add(&s, &t),
                });
            }
        }
        let mut p = Poly { low: a.low + b.low, c: acc.into_iter().map(|e| e.unwrap()).collect() };
        p.trim();
        p
    }

    fn p_right_scalar(&self, k: usize, a: &Poly, s: &Elem) -> Poly {
        self.p_mul(k, a, &Poly::monomial(s.clone(), 0))
    }

    /// `Y_k^s · a`.
    fn p_shift_left(&self, k: usize, s: i64, a: &Poly) -> Poly {
        Poly { low: a.low + s, c: a.c.iter().map(|c| self.tau(c, k, s)).collect() }
    }

    /// `a = b·Q + R`.
    fn p_divrem_right(&self, k: usize, a: &Poly, b: &Poly) -> (Poly, Poly) {
        if b.is_zero() {
            self.fail();
            return (Poly::empty(), Poly::empty());
        }
        let mut r = a.clone();
        let mut quot = Poly::empty();
        let n = b.high();
        let beta_inv = self.inv(b.c.last().unwrap());
        while !r.is_zero() && r.high() >= n && !self.failed.get() {
            let m = r.high();
            let gamma = self.tau(&self.mul(&beta_inv, r.c.last().unwrap()), k, -n);
            let step = Poly::monomial(gamma, m - n);
            r = self.p_sub(&r, &self.p_mul(k, b, &step));
            if !r.is_zero() && r.high() >= m {
                self.fail();
            }
            quot = self.p_add(&quot, &step);
        }
        (quot, r)
    }

    /// `a = Q·b + R`.
    fn p_divrem_left(&self, k: usize, a: &Poly, b: &Poly) -> (Poly, Poly) {
        if b.is_zero() {
            self.fail();
            return (Poly::empty(), Poly::empty());
        }
        let mut r = a.clone();
        let mut quot = Poly::empty();
        let n = b.high();
        let beta = b.c.last().unwrap();
        while !r.is_zero() && r.high() >= n && !self.failed.get() {
            let m = r.high();
            let gamma = self.mul(r.c.last().unwrap(), &self.inv(&self.tau(beta, k, m - n)));
            let step = Poly::monomial(gamma, m - n);
            r = self.p_sub(&r, &self.p_mul(k, &step, b));
            if !r.is_zero() && r.high() >= m {
                self.fail();
            }
            quot = self.p_add(&quot, &step);
        }
        (quot, r)
    }

    /// `(s, u)` with `b·s = d·u`; both inputs start at `Y^0`.
    fn p_crm(&self, k: usize, b: &Poly, d: &Poly) -> (Poly, Poly) {
        let one = Poly::monomial(self.one(k - 1), 0);
        let (mut a0, mut a1) = (b.clone(), d.clone());
        let (mut s0, mut s1) = (one.clone(), Poly::empty());
        let (mut t0, mut t1) = (Poly::empty(), one);
        loop {
            if self.failed.get() {
                return (Poly::empty(), Poly::empty());
            }
            let (quot, rem) = self.p_divrem_right(k, &a0, &a1);
            let s2 = self.p_sub(&s0, &self.p_mul(k, &s1, &quot));
            let t2 = self.p_sub(&t0, &self.p_mul(k, &t1, &quot));
            if rem.is_zero() {
                return (s2, self.p_neg(&t2));
            }
            (a0, a1) = (a1, rem);
            (s0, s1) = (s1, s2);
            (t0, t1) = (t1, t2);
        }
    }

    fn p_gcrd(&self, k: usize, a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() && !self.failed.get() {
            let (_, r) = self.p_divrem_left(k, &x, &y);
            let r = if r.is_zero() { r } else { self.p_shift_left(k, -r.low, &r) };
            x = y;
            y = r;
        }
        x
    }

    fn f_reduce(&self, k: usize, num: Poly, den: Poly) -> Frac {
        if num.is_zero() || self.failed.get() {
            return Frac { level: k, num: Poly::empty(), den: Poly::monomial(self.one(k - 1), 0) };
        }
        let (mut num, mut den) = (num, den);
        // Units Y^m on the right of both parts.
        num.low -= den.low;
        den.low = 0;
        if den.c.len() > 1 {
            let a = num.low;
            let num0 = self.p_shift_left(k, -a, &num);
            let g = self.p_gcrd(k, &num0, &den);
            if g.c.len() > 1 && !self.failed.get() {
                num = self.p_shift_left(k, a, &self.p_divrem_left(k, &num0, &g).0);
                den = self.p_divrem_left(k, &den, &g).0;
                num.low -= den.low;
                den.low = 0;
            }
        }
        let n = den.high();
        let c = self.tau(&self.inv(den.c.last().unwrap()), k, -n);
        Frac { level: k, num: self.p_right_scalar(k, &num, &c), den: self.p_right_scalar(k, &den, &c) }
    }

    fn f_mul(&self, x: &Frac, y: &Frac) -> Frac {
        let k = x.level;
        // x.den^{-1} y.num = c · b^{-1}
        let (c, b) = if x.den.c.len() == 1 {
            let inv = self.inv(&x.den.c[0]);
            let lifted = self.p_shift_left(k, -x.den.low, &Poly { low: 0, c: vec![inv] });
            (self.p_mul(k, &lifted, &y.num), Poly::monomial(self.one(k - 1), 0))
        } else {
            let shift = y.num.low;
            let c0 = Poly { low: 0, c: y.num.c.clone() };
            let (s, u) = self.p_crm(k, &x.den, &c0);
            let s = Poly { low: s.low + shift, c: s.c };
            (s, self.p_shift_left(k, -shift, &Poly { low: u.low + shift, c: u.c }))
        };
        let num = self.p_mul(k, &x.num, &c);
        let den = self.p_mul(k, &y.den, &b);
        self.f_reduce(k, num, den)
    }

    fn f_add(&self, x: &Frac, y: &Frac) -> Frac {
        let k = x.level;
        if x.num.is_zero() {
            return y.clone();
        }
        if y.num.is_zero() {
            return x.clone();
        }
        let (s, u) = if x.den == y.den {
            let one = Poly::monomial(self.one(k - 1), 0);
            (one.clone(), one)
        } else {
            self.p_crm(k, &x.den, &y.den)
        };
        let num = self.p_add(&self.p_mul(k, &x.num, &s), &self.p_mul(k, &y.num, &u));
        let den = self.p_mul(k, &x.den, &s);
        self.f_reduce(k, num, den)
    }

    fn generator_pow(&self, level: usize, e: i64, inner: Elem) -> Elem {
        let one = self.one(level - 1);
        Elem::F(Box::new(Frac { level, num: Poly::monomial(inner, e), den: Poly::monomial(one, 0) }))
    }

    fn eval(&self, e: &RationalExpression) -> Elem {
        let top = self.top();
        let mut acc = self.one(top);
        for f in e.factors() {
            if self.failed.get() {
                break;
            }
            let v = match f {
                Factor::Mono(m) => {
                    let mut q = QFrac::q_pow(m.qexp);
                    if m.negative {
                        q = q.mul(&QFrac::minus_one());
                    }
                    let mut v = Elem::Q(q);
                    for (level, &g) in self.generators.iter().enumerate() {
                        v = self.generator_pow(level + 1, m.exps[g], v);
                    }
                    v
                }
                Factor::Binom { offset, base, power } => {
                    let b = self.add(&self.one(top), &self.scale_q(&self.eval(base), *offset));
                    let b = if *power < 0 { self.inv(&b) } else { b };
                    let mut v = self.one(top);
                    for _ in 0..power.unsigned_abs() {
                        v = self.mul(&v, &b);
                    }
                    v
                }
            };
            acc = self.mul(&acc, &v);
        }
        acc
    }

    /// `Some(true)` when `a = b`, `None` if the budget ran out.
    pub(crate) fn decide(&self, a: &RationalExpression, b: &RationalExpression) -> Option<bool> {
        let d = self.sub(&self.eval(a), &self.eval(b));
        if self.failed.get() {
            None
        } else {
            Some(is_zero(&d))
        }
    }
}

/// Exact equality over the generators appearing in either expression.
pub(crate) fn skew_equal(a: &RationalExpression, b: &RationalExpression, limit: u64) -> Option<bool> {
    let mut gens: Vec<usize> = a.support().into_iter().chain(b.support()).map(|g| g - 1).collect();
    gens.sort_unstable();
    gens.dedup();
    SkewField::new(a, gens, limit).decide(a, b)
}
