//! The `q = 1` theory: exponential shear coordinates and their changes
//! under flips, the length parameters `p_j` and `h`.

use num_traits::Num;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coordchange::flip_hom;
use crate::ncrational::{Factor, RationalExpression};
use crate::surface::{FlipTag, IdealTriangulation, Move};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("coordinate {index} = {value} is not a positive finite number")]
    NotPositive { index: usize, value: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// Positive edge weights on a triangulation, indexed by edge (0-based storage).
#[derive(Clone, Debug, PartialEq)]
pub struct ShearCoordinates(Vec<f64>);

impl ShearCoordinates {
    pub fn new(x: Vec<f64>) -> Result<Self, ClassicalError> {
        for (index, &value) in x.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ClassicalError::NotPositive { index: index + 1, value });
            }
        }
        Ok(ShearCoordinates(x))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    /// Log-uniform sample in `[1e-6, 1e6]` per coordinate.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let span = 1e6f64.ln();
        ShearCoordinates((0..n).map(|_| rng.gen_range(-span..span).exp()).collect())
    }

    pub fn flip(&self, tri: &IdealTriangulation, i: usize) -> Self {
        ShearCoordinates(classical_flip(&self.0, tri, i))
    }

    pub fn apply_move(&self, tri: &IdealTriangulation, mv: &Move) -> Self {
        ShearCoordinates(classical_move(&self.0, tri, mv))
    }
}

/// Coordinates on `flip(tri, i)` of the point with coordinates `x` on `tri`.
pub fn classical_flip<T: Num + Clone>(x: &[T], tri: &IdealTriangulation, i: usize) -> Vec<T> {
    let case = tri.classify_flip(i);
    let Some(lab) = case.labels else { return x.to_vec() };
    let get = |e: usize| x[e - 1].clone();
    let xi = get(lab.i);
    let up = T::one() + xi.clone();
    let down = xi.clone() / up.clone();
    let mut out = x.to_vec();
    let mut set = |e: usize, factor: T| out[e - 1] = factor * get(e);
    match case.tag {
        FlipTag::Case1 => {
            set(lab.j, up.clone());
            set(lab.k, down.clone());
            set(lab.l, up);
            set(lab.m, down);
        }
        FlipTag::Case2 => {
            set(lab.j, xi.clone());
            set(lab.l, up);
            set(lab.m, down);
        }
        FlipTag::Case3 => {
            set(lab.j, xi.clone());
            set(lab.k, down);
            set(lab.l, up);
        }
        FlipTag::Case4 => {
            set(lab.j, up.clone() * up);
            set(lab.k, down.clone());
            set(lab.m, down);
        }
        FlipTag::Case5 => {
            set(lab.j, up.clone());
            set(lab.l, up);
            set(lab.k, down.clone() * down);
        }
        FlipTag::Case6 => {
            set(lab.j, xi.clone());
            set(lab.l, xi.clone());
        }
        FlipTag::Case7 => {
            set(lab.j, xi.clone());
            set(lab.k, xi.clone());
        }
        FlipTag::Case8 => {
            set(lab.j, up.clone() * up);
            set(lab.k, down.clone() * down);
        }
        FlipTag::Degenerate => unreachable!("degenerate flips carry no labels"),
    }
    out[lab.i - 1] = T::one() / xi;
    out
}

/// Reindexing: coordinate `i` of the result is coordinate `alpha(i)` of `x`.
pub fn classical_move<T: Num + Clone>(x: &[T], tri: &IdealTriangulation, mv: &Move) -> Vec<T> {
    match mv {
        Move::Flip(i) => classical_flip(x, tri, *i),
        Move::Reindex(alpha) => (1..=x.len()).map(|i| x[alpha.apply(i) - 1].clone()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthParameters {
    pub p: Vec<f64>,
    pub h: f64,
}

pub fn length_params(x: &ShearCoordinates, tri: &IdealTriangulation) -> LengthParameters {
    let pd = tri.vertex_orbits();
    let p = (0..pd.puncture_count())
        .map(|j| (0..tri.edge_count()).map(|i| x.0[i].powi(pd.k[i][j] as i32)).product())
        .collect();
    LengthParameters { p, h: x.0.iter().product() }
}

pub fn is_cusped(x: &ShearCoordinates, tri: &IdealTriangulation, tol: f64) -> bool {
    length_params(x, tri).p.iter().all(|p| (p - 1.0).abs() <= tol)
}

/// Evaluates an expression with commuting numeric generators and `q = 1`.
pub fn eval_at_q1(e: &RationalExpression, x: &[f64]) -> f64 {
    e.factors()
        .iter()
        .map(|f| match f {
            Factor::Mono(m) => {
                let v: f64 = m.exps.iter().zip(x).map(|(k, xi)| xi.powi(*k as i32)).product();
                if m.negative {
                    -v
                } else {
                    v
                }
            }
            Factor::Binom { base, power, .. } => (1.0 + eval_at_q1(base, x)).powi(*power as i32),
        })
        .product()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Q1Report {
    pub samples: usize,
    pub seed: u64,
    /// Largest relative deviation between the classical formulas and the
    /// quantum images at `q = 1`.
    pub max_flip_error: f64,
    pub max_h_error: f64,
    pub max_p_error: f64,
}

impl Q1Report {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_flip_error < tol && self.max_h_error < tol && self.max_p_error < tol
    }
}

/// Compares [`classical_move`] with the `q = 1` value of the quantum
/// homomorphism on seeded random points and checks that `h` and every
/// `p_j` (followed through the move) are unchanged.
pub fn check_q1_consistency(tri: &IdealTriangulation, mv: &Move, samples: usize, seed: u64) -> Q1Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tri.edge_count();
    let after = tri.apply_move(mv);
    let images: Vec<RationalExpression> = match mv {
        Move::Flip(i) => flip_hom(tri, *i).images().to_vec(),
        Move::Reindex(alpha) => {
            let s = std::sync::Arc::new(tri.sigma());
            (1..=n).map(|h| RationalExpression::generator(s.clone(), alpha.apply(h))).collect()
        }
    };
    let puncture_map = tri.puncture_correspondence(mv);

    let mut report = Q1Report { samples, seed, max_flip_error: 0.0, max_h_error: 0.0, max_p_error: 0.0 };
    for _ in 0..samples {
        let x = ShearCoordinates::random(n, &mut rng);
        let y = x.apply_move(tri, mv);
        for h in 0..n {
            let quantum = eval_at_q1(&images[h], x.values());
            report.max_flip_error = report.max_flip_error.max(rel_err(quantum, y.0[h]));
        }
        let before = length_params(&x, tri);
        let now = length_params(&y, &after);
        report.max_h_error = report.max_h_error.max(rel_err(before.h, now.h));
        for (j, &old) in puncture_map.iter().enumerate() {
            report.max_p_error = report.max_p_error.max(rel_err(before.p[old], now.p[j]));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::examples::*;
    use crate::surface::Permutation;
    use num_rational::BigRational;

    fn find_case(tag: FlipTag) -> (IdealTriangulation, usize) {
        let t = five_punctured_sphere();
        for i in 1..=t.edge_count() {
            if t.classify_flip(i).tag == tag {
                return (t, i);
            }
        }
        panic!("no {tag:?} flip on the 5-punctured sphere");
    }

    #[test]
    fn case_one_at_unit_diagonal() {
        let (t, i) = find_case(FlipTag::Case1);
        let lab = t.classify_flip(i).labels.unwrap();
        let mut x = vec![3.0; t.edge_count()];
        x[i - 1] = 1.0;
        let y = classical_flip(&x, &t, i);
        assert_eq!(y[lab.j - 1], 6.0);
        assert_eq!(y[lab.k - 1], 1.5);
        assert_eq!(y[lab.l - 1], 6.0);
        assert_eq!(y[lab.m - 1], 1.5);
        assert_eq!(y[i - 1], 1.0);
    }

    #[test]
    fn case_eight_at_unit_diagonal() {
        let t = once_punctured_torus();
        let lab = t.classify_flip(1).labels.unwrap();
        let x = vec![1.0, 5.0, 8.0];
        let y = classical_flip(&x, &t, 1);
        assert_eq!(y[lab.j - 1], 4.0 * x[lab.j - 1]);
        assert_eq!(y[lab.k - 1], x[lab.k - 1] / 4.0);
    }

    #[test]
    fn double_flip_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            for i in 1..=t.edge_count() {
                let x = ShearCoordinates::random(t.edge_count(), &mut rng);
                let y = x.flip(&t, i).flip(&t.flip(i), i);
                for (a, b) in x.values().iter().zip(y.values()) {
                    assert!(rel_err(*a, *b) < 1e-12);
                    assert!(*b > 0.0);
                }
            }
        }
    }

    #[test]
    fn exact_double_flip() {
        let t = five_punctured_sphere();
        let x: Vec<BigRational> = (1..=9).map(|k| BigRational::new(k.into(), (k + 2).into())).collect();
        for i in 1..=9 {
            assert_eq!(classical_flip(&classical_flip(&x, &t, i), &t.flip(i), i), x);
        }
    }

    #[test]
    fn length_parameters() {
        let t = once_punctured_torus();
        let x = ShearCoordinates::new(vec![2.0, 1.0, 0.5]).unwrap();
        let lp = length_params(&x, &t);
        assert_eq!(lp.p, vec![1.0]);
        assert!(is_cusped(&x, &t, 1e-12));
        let ones = ShearCoordinates::new(vec![1.0; 9]).unwrap();
        assert!(is_cusped(&ones, &five_punctured_sphere(), 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            let x = ShearCoordinates::random(t.edge_count(), &mut rng);
            let lp = length_params(&x, &t);
            assert!(rel_err(lp.h * lp.h, lp.p.iter().product()) < 1e-12);
        }
        assert!(ShearCoordinates::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn q1_consistency_on_flips_and_reindexings() {
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            for i in 1..=t.edge_count() {
                let r = check_q1_consistency(&t, &Move::Flip(i), 20, 5);
                assert!(r.passes(1e-12), "{r:?}");
            }
            let swap = Permutation::transposition(t.edge_count(), 1, 2);
            assert!(check_q1_consistency(&t, &Move::Reindex(swap), 5, 1).passes(1e-12));
        }
    }
}
