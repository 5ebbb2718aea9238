//! Randomized evaluation at roots of unity.
//!
//! With `q = exp(i pi r / N)` (`r` odd, prime to `N`) and `w = q^2`, the
//! generators in the support of an expression act on functions on
//! `Z_N^r` by `X_i d_y = t_i w^{a_i . y} d_{y + e_i}`, where `a` is the
//! strict upper triangle of the restricted skew form and the `t_i` are random
//! nonzero reals. This is a representation of the quantum torus, so
//! expressions that are equal act identically. Binomials with a monomial
//! base are inverted exactly cycle by cycle; other inverses use GMRES.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use super::{normalize, Factor, Monomial, RationalExpression};
use crate::surface::SigmaMatrix;

type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("binomial factor is singular in the N = {modulus} representation")]
    SingularBinomial { modulus: u64 },
    #[error("representation of dimension {modulus}^{generators} exceeds the budget {budget}")]
    DimensionOverflow { modulus: u64, generators: usize, budget: usize },
    #[error("iterative solve did not converge (N = {modulus})")]
    NoConvergence { modulus: u64 },
    #[error("modulus {0} is not an odd prime")]
    InvalidModulus(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub moduli: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    /// Relative residual below which two evaluations count as equal.
    pub tolerance: f64,
    /// Largest admissible `N^r`.
    pub dimension_budget: usize,
    /// Work allowed to the division-ring decision before falling back to
    /// numerics; 0 disables it.
    pub exact_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { moduli: vec![5, 7, 11], trials: 2, seed: 1, tolerance: 1e-9, dimension_budget: 200_000, exact_budget: 2_000_000 }
    }
}

/// Moduli tried, smallest first, when a configured one fails.
const ALTERNATE_MODULI: [u64; 6] = [3, 5, 7, 11, 13, 17];
const MAX_RETRIES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    EqualExact,
    EqualNumeric { residual: f64, moduli: Vec<u64> },
    NotEqual { modulus: u64, seed: u64, residual: f64 },
    Undecided { reason: String },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::EqualExact | Verdict::EqualNumeric { .. })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::EqualExact => write!(f, "EqualExact"),
            Verdict::EqualNumeric { residual, moduli } => {
                let m: Vec<String> = moduli.iter().map(|x| x.to_string()).collect();
                write!(f, "EqualNumeric(residual={residual:.2e}, N={})", m.join(","))
            }
            Verdict::NotEqual { modulus, seed, residual } => {
                write!(f, "NotEqual(N={modulus}, seed={seed}, residual={residual:.2e})")
            }
            Verdict::Undecided { reason } => write!(f, "Undecided({reason})"),
        }
    }
}

fn is_odd_prime(n: u64) -> bool {
    n >= 3 && n % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A generalized permutation: `M d_y = phase[y] d_{target[y]}`.
struct GenPerm {
    target: Vec<usize>,
    phase: Vec<C>,
}

pub struct Representation {
    modulus: u64,
    /// 0-based generator positions in the representation, in order.
    support: Vec<usize>,
    local: Vec<Option<usize>>,
    dim: usize,
    strides: Vec<usize>,
    /// `q = exp(i pi root / N)`.
    root: u64,
    omega: Vec<C>,
    t: Vec<f64>,
    /// `a_k . y mod N` for every support generator `k` and basis index `y`.
    phase_exp: Vec<Vec<u32>>,
    cache: RefCell<HashMap<Vec<i64>, Rc<GenPerm>>>,
}

impl Representation {
    /// `support` lists 1-based generators; `seed` fixes `r` and the `t_i`.
    pub fn new(
        sigma: &SigmaMatrix,
        support: &[usize],
        modulus: u64,
        seed: u64,
        budget: usize,
    ) -> Result<Self, OracleError> {
        if !is_odd_prime(modulus) {
            return Err(OracleError::InvalidModulus(modulus));
        }
        let r = support.len();
        let nn = modulus as usize;
        let dim = nn
            .checked_pow(r as u32)
            .filter(|d| *d <= budget)
            .ok_or(OracleError::DimensionOverflow { modulus, generators: r, budget })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rr = loop {
            let c = 2 * rng.gen_range(0..modulus) + 1;
            if gcd(c, modulus) == 1 {
                break c;
            }
        };
        let omega: Vec<C> = (0..nn)
            .map(|k| C::from_polar(1.0, 2.0 * std::f64::consts::PI * ((rr as usize * k) % nn) as f64 / nn as f64))
            .collect();
        let t: Vec<f64> = (0..r)
            .map(|_| {
                let mag: f64 = rng.gen_range(0.3..1.0);
                let mag = if rng.gen_bool(0.5) { mag } else { -mag };
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                sign * mag.exp()
            })
            .collect();
        let positions: Vec<usize> = support.iter().map(|i| i - 1).collect();
        let mut local = vec![None; sigma.dim()];
        for (k, &p) in positions.iter().enumerate() {
            local[p] = Some(k);
        }
        let strides: Vec<usize> = (0..r).map(|k| nn.pow(k as u32)).collect();
        let a: Vec<Vec<i64>> = (0..r)
            .map(|k| {
                (0..r)
                    .map(|j| if k < j { sigma.at(positions[k], positions[j]).rem_euclid(modulus as i64) } else { 0 })
                    .collect()
            })
            .collect();
        let mut phase_exp = vec![vec![0u32; dim]; r];
        for idx in 0..dim {
            let y: Vec<i64> = (0..r).map(|j| ((idx / strides[j]) % nn) as i64).collect();
            for k in 0..r {
                let s: i64 = (0..r).map(|j| a[k][j] * y[j]).sum();
                phase_exp[k][idx] = s.rem_euclid(modulus as i64) as u32;
            }
        }
        Ok(Representation {
            modulus,
            support: positions,
            local,
            dim,
            strides,
            root: rr,
            omega,
            t,
            phase_exp,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// 1-based generators the representation acts on.
    pub fn support(&self) -> Vec<usize> {
        self.support.iter().map(|p| p + 1).collect()
    }

    pub fn random_vector(&self, seed: u64) -> Vec<C> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.dim)
            .map(|_| C::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
            .collect()
    }

    /// `q^e`, reduced exactly modulo `2N` before taking the angle.
    fn q_pow(&self, e: i64) -> C {
        let m = 2 * self.modulus as i64;
        let k = (self.root as i64 * e.rem_euclid(m)).rem_euclid(m);
        C::from_polar(1.0, std::f64::consts::PI * k as f64 / self.modulus as f64)
    }

    fn scalar(&self, m: &Monomial) -> C {
        let s = self.q_pow(m.qexp);
        if m.negative {
            -s
        } else {
            s
        }
    }

    fn shift(&self, idx: usize, k: usize, up: bool) -> usize {
        let nn = self.modulus as usize;
        let digit = (idx / self.strides[k]) % nn;
        match (up, digit) {
            (true, d) if d == nn - 1 => idx - (nn - 1) * self.strides[k],
            (true, _) => idx + self.strides[k],
            (false, 0) => idx + (nn - 1) * self.strides[k],
            (false, _) => idx - self.strides[k],
        }
    }

    /// `X^w` without its scalar, as a generalized permutation.
    fn monomial_perm(&self, exps: &[i64]) -> Rc<GenPerm> {
        if let Some(p) = self.cache.borrow().get(exps) {
            return p.clone();
        }
        let mut target: Vec<usize> = (0..self.dim).collect();
        let mut phase = vec![C::new(1.0, 0.0); self.dim];
        for (pos, &w) in exps.iter().enumerate().rev() {
            if w == 0 {
                continue;
            }
            let k = self.local[pos].expect("generator outside the representation support");
            let up = w > 0;
            let tk = if up { self.t[k] } else { 1.0 / self.t[k] };
            let nn = self.modulus as usize;
            for _ in 0..w.unsigned_abs() {
                for idx in 0..self.dim {
                    let cur = target[idx];
                    let e = self.phase_exp[k][cur] as usize;
                    let ph = if up { self.omega[e] } else { self.omega[(nn - e) % nn] };
                    phase[idx] *= ph * tk;
                    target[idx] = self.shift(cur, k, up);
                }
            }
        }
        let p = Rc::new(GenPerm { target, phase });
        self.cache.borrow_mut().insert(exps.to_vec(), p.clone());
        p
    }

    fn apply_perm(&self, p: &GenPerm, scale: C, x: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.dim];
        for idx in 0..self.dim {
            out[p.target[idx]] = scale * p.phase[idx] * x[idx];
        }
        out
    }

    /// `(I + k M)^{-1} b` for a generalized permutation `M`, cycle by cycle.
    fn solve_perm(&self, p: &GenPerm, k: C, b: &[C]) -> Result<Vec<C>, OracleError> {
        let mut x = vec![C::new(0.0, 0.0); self.dim];
        let mut seen = vec![false; self.dim];
        let mut cycle = Vec::new();
        for start in 0..self.dim {
            if seen[start] {
                continue;
            }
            cycle.clear();
            let mut y = start;
            while !seen[y] {
                seen[y] = true;
                cycle.push(y);
                y = p.target[y];
            }
            let len = cycle.len();
            // Equation at node y_{j+1}: x_{j+1} + k phi_j x_j = b_{j+1}.
            let coef: Vec<C> = cycle.iter().map(|&y| k * p.phase[y]).collect();
            let next = |j: usize| cycle[(j + 1) % len];
            let gain: C = coef.iter().map(|c| -c).product();
            if gain.norm() <= 1.0 {
                let (mut a, mut g) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
                for j in 0..len {
                    a = b[next(j)] - coef[j] * a;
                    g = -coef[j] * g;
                }
                let denom = C::new(1.0, 0.0) - g;
                if denom.norm() < 1e-10 {
                    return Err(OracleError::SingularBinomial { modulus: self.modulus });
                }
                let mut xj = a / denom;
                x[cycle[0]] = xj;
                for j in 0..len - 1 {
                    xj = b[next(j)] - coef[j] * xj;
                    x[next(j)] = xj;
                }
            } else {
                // Backward: x_j = (b_{j+1} - x_{j+1}) / (k phi_j).
                let (mut c, mut d) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
                for j in (0..len).rev() {
                    c = (b[next(j)] - c) / coef[j];
                    d = -d / coef[j];
                }
                let denom = C::new(1.0, 0.0) - d;
                if denom.norm() < 1e-10 {
                    return Err(OracleError::SingularBinomial { modulus: self.modulus });
                }
                let x0 = c / denom;
                x[cycle[0]] = x0;
                let mut xj = x0;
                for j in (1..len).rev() {
                    xj = (b[next(j)] - xj) / coef[j];
                    x[cycle[j]] = xj;
                }
            }
        }
        Ok(x)
    }

    /// Applies the operator of `e` to `x`.
    pub fn apply(&self, e: &RationalExpression, x: &[C]) -> Result<Vec<C>, OracleError> {
        let mut v = x.to_vec();
        for f in e.factors().iter().rev() {
            v = self.apply_factor(f, &v)?;
        }
        Ok(v)
    }

    fn apply_factor(&self, f: &Factor, x: &[C]) -> Result<Vec<C>, OracleError> {
        match f {
            Factor::Mono(m) => {
                let s = self.scalar(m);
                if m.is_scalar() {
                    return Ok(x.iter().map(|v| s * v).collect());
                }
                let p = self.monomial_perm(&m.exps);
                Ok(self.apply_perm(&p, s, x))
            }
            Factor::Binom { offset, base, power } => {
                let k = self.q_pow(*offset);
                let mut v = x.to_vec();
                match base.factors() {
                    [] => {
                        let s = C::new(1.0, 0.0) + k;
                        if s.norm() < 1e-12 {
                            return Err(OracleError::SingularBinomial { modulus: self.modulus });
                        }
                        let s = s.powi(*power as i32);
                        return Ok(v.iter().map(|z| s * z).collect());
                    }
                    [Factor::Mono(m)] => {
                        let kk = k * self.scalar(m);
                        if m.is_scalar() {
                            let s = (C::new(1.0, 0.0) + kk).powi(*power as i32);
                            return Ok(v.iter().map(|z| s * z).collect());
                        }
                        let p = self.monomial_perm(&m.exps);
                        for _ in 0..power.unsigned_abs() {
                            v = if *power > 0 {
                                let mv = self.apply_perm(&p, kk, &v);
                                v.iter().zip(&mv).map(|(a, b)| a + b).collect()
                            } else {
                                self.solve_perm(&p, kk, &v)?
                            };
                        }
                    }
                    _ => {
                        for _ in 0..power.unsigned_abs() {
                            v = if *power > 0 {
                                let bv = self.apply(base, &v)?;
                                v.iter().zip(&bv).map(|(a, b)| a + k * b).collect()
                            } else {
                                let op = |y: &[C]| -> Result<Vec<C>, OracleError> {
                                    let by = self.apply(base, y)?;
                                    Ok(y.iter().zip(&by).map(|(a, b)| a + k * b).collect())
                                };
                                gmres(op, &v, self.modulus)?
                            };
                        }
                    }
                }
                Ok(v)
            }
        }
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES for `A x = b` with a zero initial guess.
fn gmres<F>(op: F, b: &[C], modulus: u64) -> Result<Vec<C>, OracleError>
where
    F: Fn(&[C]) -> Result<Vec<C>, OracleError>,
{
    const RESTART: usize = 60;
    const MAX_CYCLES: usize = 60;
    const TOL: f64 = 1e-13;
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![C::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    for _ in 0..MAX_CYCLES {
        let ax = op(&x)?;
        let r: Vec<C> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = norm(&r);
        if beta <= TOL * bnorm {
            return Ok(x);
        }
        let mut basis: Vec<Vec<C>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![C::new(0.0, 0.0); RESTART]; RESTART + 1];
        let mut cs = vec![C::new(0.0, 0.0); RESTART];
        let mut sn = vec![C::new(0.0, 0.0); RESTART];
        let mut g = vec![C::new(0.0, 0.0); RESTART + 1];
        g[0] = C::new(beta, 0.0);
        let mut steps = 0;
        for j in 0..RESTART {
            let mut w = op(&basis[j])?;
            for i in 0..=j {
                h[i][j] = dot(&basis[i], &w);
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= h[i][j] * vk;
                }
            }
            let wn = norm(&w);
            h[j + 1][j] = C::new(wn, 0.0);
            for i in 0..j {
                let tmp = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = tmp;
            }
            let denom = (h[j][j].norm_sqr() + h[j + 1][j].norm_sqr()).sqrt();
            if denom == 0.0 {
                return Err(OracleError::SingularBinomial { modulus });
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = C::new(denom, 0.0);
            h[j + 1][j] = C::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            steps = j + 1;
            if g[j + 1].norm() <= TOL * bnorm || wn <= 1e-300 {
                break;
            }
            basis.push(w.iter().map(|z| z / wn).collect());
        }
        let mut yv = vec![C::new(0.0, 0.0); steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[i][k] * yv[k];
            }
            yv[i] = s / h[i][i];
        }
        for (i, yi) in yv.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[i]) {
                *xk += yi * vk;
            }
        }
    }
    let ax = op(&x)?;
    let res: Vec<C> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
    if norm(&res) <= 1e-10 * bnorm {
        Ok(x)
    } else {
        Err(OracleError::NoConvergence { modulus })
    }
}

/// Evaluates `e` on `x` in the representation over `e`'s own support.
pub fn oracle_eval(e: &RationalExpression, modulus: u64, seed: u64, x: &[C]) -> Result<Vec<C>, OracleError> {
    let rep = Representation::new(e.sigma(), &e.support(), modulus, seed, usize::MAX)?;
    assert_eq!(x.len(), rep.dim(), "vector length must be N^r");
    rep.apply(e, x)
}

fn trial_seed(seed: u64, modulus: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (modulus << 32) ^ trial as u64
}

/// Largest relative residual over the trials at one modulus, with the seed
/// achieving it.
fn residual_at(
    e1: &RationalExpression,
    e2: &RationalExpression,
    support: &[usize],
    modulus: u64,
    cfg: &OracleConfig,
) -> Result<(f64, u64), OracleError> {
    let mut worst = (0.0, 0);
    for trial in 0..cfg.trials.max(1) {
        let seed = trial_seed(cfg.seed, modulus, trial);
        let rep = Representation::new(e1.sigma(), support, modulus, seed, cfg.dimension_budget)?;
        let x = rep.random_vector(seed ^ 0xA5A5);
        let y1 = rep.apply(e1, &x)?;
        let y2 = rep.apply(e2, &x)?;
        let diff: Vec<C> = y1.iter().zip(&y2).map(|(a, b)| a - b).collect();
        let scale = norm(&y1).max(norm(&y2)).max(f64::MIN_POSITIVE);
        let res = norm(&diff) / scale;
        if res >= worst.0 {
            worst = (res, seed);
        }
    }
    Ok(worst)
}

/// Worst relative residual between `e1` and `e2` at a single modulus.
pub fn residual(e1: &RationalExpression, e2: &RationalExpression, modulus: u64, cfg: &OracleConfig) -> Result<f64, OracleError> {
    let mut support = e1.support();
    support.extend(e2.support());
    support.sort_unstable();
    support.dedup();
    residual_at(e1, e2, &support, modulus, cfg).map(|(r, _)| r)
}

/// Numeric tier only.
pub fn equals_numeric(e1: &RationalExpression, e2: &RationalExpression, cfg: &OracleConfig) -> Verdict {
    let mut support = e1.support();
    support.extend(e2.support());
    support.sort_unstable();
    support.dedup();

    let mut queue: Vec<u64> = cfg.moduli.clone();
    let mut alternates = ALTERNATE_MODULI.iter().copied().filter(|m| !cfg.moduli.contains(m));
    let mut retries = 0;
    let mut passed: Vec<u64> = Vec::new();
    let mut worst: f64 = 0.0;
    let mut last_error = String::new();
    let mut i = 0;
    while i < queue.len() {
        let n = queue[i];
        i += 1;
        match residual_at(e1, e2, &support, n, cfg) {
            Ok((res, seed)) => {
                if !(res <= cfg.tolerance) {
                    return Verdict::NotEqual { modulus: n, seed, residual: res };
                }
                worst = worst.max(res);
                passed.push(n);
            }
            Err(e) => {
                last_error = e.to_string();
                if retries < MAX_RETRIES {
                    if let Some(alt) = alternates.next() {
                        queue.push(alt);
                    }
                    retries += 1;
                }
            }
        }
    }
    if passed.len() >= 2 {
        Verdict::EqualNumeric { residual: worst, moduli: passed }
    } else {
        Verdict::Undecided { reason: format!("agreement at {} modulus only; last error: {last_error}", passed.len()) }
    }
}

/// Exact tier first, then the numeric oracle.
pub fn equals(e1: &RationalExpression, e2: &RationalExpression, cfg: &OracleConfig) -> Verdict {
    if normalize(&e1.multiply(&e2.invert())).is_one() {
        return Verdict::EqualExact;
    }
    if cfg.exact_budget > 0 && super::skew::skew_equal(e1, e2, cfg.exact_budget) == Some(true) {
        return Verdict::EqualExact;
    }
    equals_numeric(e1, e2, cfg)
}
