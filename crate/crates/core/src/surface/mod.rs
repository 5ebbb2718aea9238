//! Indexed ideal triangulations of punctured surfaces.
//!
//! A triangulation is stored as a list of triangles, each carrying the edge
//! indices of its three sides in counterclockwise order. Two sides carrying
//! the same index are glued; since the surface is oriented the gluing is
//! determined by the pair of slots alone. Corner `c` of a triangle sits at
//! vertex `v_c`, between the arriving side `c - 1` and the leaving side `c`.

mod flip;
mod graph;
mod io;
mod perm;

pub use flip::{FlipCase, FlipLabels, FlipTag};
pub use graph::{FlipGraph, FlipGraphConfig, GraphArc};
pub use io::{format_triangulation, parse_triangulation};
pub use perm::{parse_moves, format_moves, Move, Permutation};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid triangulation: {0}")]
    Invalid(String),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("bad permutation: {0}")]
    BadPermutation(String),
    #[error("bad move sequence: {0}")]
    BadMove(String),
}

/// One triangle: a display name and the edge indices (1-based) on its
/// three sides, counterclockwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub name: String,
    pub sides: [usize; 3],
}

/// A side slot: triangle position and slot index in `0..3`.
pub type Slot = (usize, usize);

/// A corner of a triangle, addressed the same way as a slot: corner `c`
/// of triangle `t` sits between sides `c - 1` and `c`.
pub type Corner = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealTriangulation {
    genus: u32,
    punctures: u32,
    edges: usize,
    triangles: Vec<Triangle>,
}

/// Triangle-relabeling-invariant key: every triangle rotated to its
/// lexicographically least slot order, then sorted. Edge indices are kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(pub Vec<[usize; 3]>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantFailure {
    EdgeMultiplicity { edge: usize, slots: usize },
    EdgeIndexRange { edge: usize },
    EdgeCountFormula { declared: usize, expected: i64 },
    TriangleCount { triangles: usize, edges: usize },
    PunctureCount { declared: u32, found: usize },
    EulerCharacteristic { chi: i64, expected: i64 },
}

impl fmt::Display for InvariantFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantFailure::EdgeMultiplicity { edge, slots } => {
                write!(f, "edge multiplicity: edge {edge} labels {slots} slots (expected 2)")
            }
            InvariantFailure::EdgeIndexRange { edge } => {
                write!(f, "edge index range: edge {edge} outside 1..n")
            }
            InvariantFailure::EdgeCountFormula { declared, expected } => {
                write!(f, "edge count: n = {declared} but 6g-6+3p = {expected}")
            }
            InvariantFailure::TriangleCount { triangles, edges } => {
                write!(f, "triangle count: t = {triangles} but 2n/3 = {}", 2 * edges / 3)
            }
            InvariantFailure::PunctureCount { declared, found } => {
                write!(f, "puncture count: declared {declared}, found {found} vertex orbits")
            }
            InvariantFailure::EulerCharacteristic { chi, expected } => {
                write!(f, "euler characteristic: p - n + t = {chi}, expected 2 - 2g = {expected}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<InvariantFailure>,
    pub edges: usize,
    pub triangles: usize,
    pub punctures_found: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Vertex orbits (one per puncture) and the endpoint counts `k[i][j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PunctureData {
    /// Corners around each puncture in counterclockwise order, starting
    /// from the smallest corner.
    pub orbits: Vec<Vec<Corner>>,
    /// `k[i - 1][j]` = number of endpoints of edge `i` at puncture `j`.
    pub k: Vec<Vec<u8>>,
}

impl PunctureData {
    pub fn puncture_count(&self) -> usize {
        self.orbits.len()
    }

    /// Puncture index containing the given corner.
    pub fn puncture_of(&self, corner: Corner) -> Option<usize> {
        self.orbits.iter().position(|o| o.contains(&corner))
    }
}

/// Antisymmetric integer form `sigma[i][j] = a_ij - a_ji` (0-based storage,
/// accessors take 1-based edge indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SigmaMatrix {
    entries: Vec<Vec<i64>>,
}

impl SigmaMatrix {
    pub fn from_rows(entries: Vec<Vec<i64>>) -> Self {
        SigmaMatrix { entries }
    }

    pub fn zero(n: usize) -> Self {
        SigmaMatrix { entries: vec![vec![0; n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entry for 1-based edge indices.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i - 1][j - 1]
    }

    /// Entry for 0-based positions.
    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == -self.entries[j][i]))
    }

    /// Restriction to the given 0-based positions, in the given order.
    pub fn restrict(&self, positions: &[usize]) -> SigmaMatrix {
        SigmaMatrix {
            entries: positions
                .iter()
                .map(|&a| positions.iter().map(|&b| self.entries[a][b]).collect())
                .collect(),
        }
    }
}

impl fmt::Display for SigmaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            writeln!(f, "{}", cells.join(""))?;
        }
        Ok(())
    }
}

impl IdealTriangulation {
    /// Builds a triangulation without checking invariants; see [`Self::validate`].
    pub fn new_unchecked(genus: u32, punctures: u32, edges: usize, triangles: Vec<Triangle>) -> Self {
        IdealTriangulation { genus, punctures, edges, triangles }
    }

    /// Builds and validates; the puncture count is recomputed from the gluing.
    pub fn from_sides(genus: u32, sides: &[[usize; 3]]) -> Result<Self, SurfaceError> {
        let triangles: Vec<Triangle> = sides
            .iter()
            .enumerate()
            .map(|(t, s)| Triangle { name: triangle_name(t), sides: *s })
            .collect();
        let edges = 3 * triangles.len() / 2;
        let mut tri = IdealTriangulation { genus, punctures: 0, edges, triangles };
        tri.punctures = tri.validate().punctures_found as u32;
        let report = tri.validate();
        if report.is_valid() {
            Ok(tri)
        } else {
            Err(SurfaceError::Invalid(join_failures(&report)))
        }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn punctures(&self) -> u32 {
        self.punctures
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Edge on a given slot.
    pub fn side(&self, slot: Slot) -> usize {
        self.triangles[slot.0].sides[slot.1]
    }

    /// All slots labeled by edge `e`, in (triangle, slot) order.
    pub fn slots_of(&self, e: usize) -> Vec<Slot> {
        let mut out = Vec::with_capacity(2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for s in 0..3 {
                if tri.sides[s] == e {
                    out.push((t, s));
                }
            }
        }
        out
    }

    /// The slot glued to `slot` (the other slot with the same label).
    pub fn partner(&self, slot: Slot) -> Slot {
        let e = self.side(slot);
        self.slots_of(e)
            .into_iter()
            .find(|&s| s != slot)
            .expect("every edge labels exactly two slots")
    }

    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let n = self.edges;
        let mut counts = vec![0usize; n + 1];
        for tri in &self.triangles {
            for &e in &tri.sides {
                if e == 0 || e > n {
                    failures.push(InvariantFailure::EdgeIndexRange { edge: e });
                } else {
                    counts[e] += 1;
                }
            }
        }
        for (e, &c) in counts.iter().enumerate().skip(1) {
            if c != 2 {
                failures.push(InvariantFailure::EdgeMultiplicity { edge: e, slots: c });
            }
        }
        let expected_n = 6 * self.genus as i64 - 6 + 3 * self.punctures as i64;
        if expected_n != n as i64 {
            failures.push(InvariantFailure::EdgeCountFormula { declared: n, expected: expected_n });
        }
        let t = self.triangles.len();
        if 3 * t != 2 * n {
            failures.push(InvariantFailure::TriangleCount { triangles: t, edges: n });
        }
        let mut found = 0;
        // Orbit tracing needs a well-formed gluing.
        if failures
            .iter()
            .all(|f| !matches!(f, InvariantFailure::EdgeMultiplicity { .. } | InvariantFailure::EdgeIndexRange { .. }))
        {
            found = self.raw_orbits().len();
            if found != self.punctures as usize {
                failures.push(InvariantFailure::PunctureCount { declared: self.punctures, found });
            }
            let chi = found as i64 - n as i64 + t as i64;
            let expected = 2 - 2 * self.genus as i64;
            if chi != expected {
                failures.push(InvariantFailure::EulerCharacteristic { chi, expected });
            }
        }
        ValidationReport { failures, edges: n, triangles: t, punctures_found: found }
    }

    /// Counterclockwise successor of a corner around its vertex.
    fn next_corner(&self, (t, c): Corner) -> Corner {
        // Cross the arriving side c-1; the vertex becomes the start of the partner slot.
        let (t2, s2) = self.partner((t, (c + 2) % 3));
        (t2, s2)
    }

    fn raw_orbits(&self) -> Vec<Vec<Corner>> {
        let t = self.triangles.len();
        let mut seen = vec![false; 3 * t];
        let mut orbits = Vec::new();
        for start in 0..3 * t {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut cur = (start / 3, start % 3);
            loop {
                let idx = cur.0 * 3 + cur.1;
                if seen[idx] {
                    break;
                }
                seen[idx] = true;
                orbit.push(cur);
                cur = self.next_corner(cur);
            }
            orbits.push(orbit);
        }
        orbits
    }

    pub fn vertex_orbits(&self) -> PunctureData {
        let orbits = self.raw_orbits();
        let n = self.edges;
        let mut k = vec![vec![0u8; orbits.len()]; n];
        for (j, orbit) in orbits.iter().enumerate() {
            let mut incid = vec![0u8; n + 1];
            for &(t, c) in orbit {
                incid[self.triangles[t].sides[c]] += 1;
                incid[self.triangles[t].sides[(c + 2) % 3]] += 1;
            }
            for e in 1..=n {
                k[e - 1][j] = incid[e] / 2;
            }
        }
        PunctureData { orbits, k }
    }

    /// `a[i-1][j-1]` = number of spikes with `λ_i` on the left and `λ_j` on the right.
    ///
    /// At corner `c` the leaving side `c` is the left one and the arriving
    /// side `c - 1` the right one; [`calibration_self_test`] pins this choice.
    pub fn spike_counts(&self) -> Vec<Vec<i64>> {
        let n = self.edges;
        let mut a = vec![vec![0i64; n]; n];
        for tri in &self.triangles {
            for c in 0..3 {
                let left = tri.sides[c];
                let right = tri.sides[(c + 2) % 3];
                a[left - 1][right - 1] += 1;
            }
        }
        a
    }

    pub fn sigma(&self) -> SigmaMatrix {
        let a = self.spike_counts();
        let n = self.edges;
        let entries = (0..n).map(|i| (0..n).map(|j| a[i][j] - a[j][i]).collect()).collect();
        SigmaMatrix { entries }
    }

    pub fn canonical(&self) -> CanonicalForm {
        let mut v: Vec<[usize; 3]> = self.triangles.iter().map(|t| min_rotation(t.sides)).collect();
        v.sort();
        CanonicalForm(v)
    }

    /// Same indexed triangulation up to relabeling triangles.
    pub fn same_as(&self, other: &IdealTriangulation) -> bool {
        self.edges == other.edges && self.canonical() == other.canonical()
    }

    /// True when edges `i` and `j` lie on a common triangle.
    pub fn share_triangle(&self, i: usize, j: usize) -> bool {
        self.triangles.iter().any(|t| t.sides.contains(&i) && t.sides.contains(&j))
    }

    pub(crate) fn with_triangles(&self, triangles: Vec<Triangle>) -> Self {
        IdealTriangulation { genus: self.genus, punctures: self.punctures, edges: self.edges, triangles }
    }
}

fn min_rotation(s: [usize; 3]) -> [usize; 3] {
    let r = [s, [s[1], s[2], s[0]], [s[2], s[0], s[1]]];
    *r.iter().min().unwrap()
}

pub(crate) fn triangle_name(t: usize) -> String {
    let letters = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if t < 26 {
        (letters[t] as char).to_string()
    } else {
        format!("T{t}")
    }
}

pub(crate) fn join_failures(report: &ValidationReport) -> String {
    report.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
}

/// Standard small surfaces used throughout tests and the CLI.
pub mod examples {
    use super::IdealTriangulation;

    /// Two triangles, side `s` of `A` glued to side `s` of `B`.
    pub fn once_punctured_torus() -> IdealTriangulation {
        IdealTriangulation::from_sides(1, &[[1, 2, 3], [1, 2, 3]]).unwrap()
    }

    /// Two triangles, side `s` of `A` glued to side `2 - s` of `B`.
    pub fn three_punctured_sphere() -> IdealTriangulation {
        IdealTriangulation::from_sides(0, &[[1, 2, 3], [3, 2, 1]]).unwrap()
    }

    /// Double of a pentagon: vertices 1..5 on the equator, both hemispheres
    /// fanned from vertex 1. Edges 1-5 are the equator, 6 and 7 the upper
    /// diagonals (an embedded pentagon), 8 and 9 the lower ones.
    pub fn five_punctured_sphere() -> IdealTriangulation {
        IdealTriangulation::from_sides(
            0,
            &[[1, 2, 6], [6, 3, 7], [7, 4, 5], [8, 2, 1], [9, 3, 8], [5, 4, 9]],
        )
        .unwrap()
    }

    /// Two upper diagonals of the embedded pentagon of [`five_punctured_sphere`].
    pub const PENTAGON_DIAGONALS: (usize, usize) = (6, 7);
}

/// Checks the spike orientation against the commutation relation
/// `X_i X_j = q^{-4} X_j X_i` required on a once-punctured torus flip
/// square where `λ_j` and `λ_l` coincide.
pub fn calibration_self_test() -> Result<(), String> {
    let torus = examples::once_punctured_torus();
    let sigma = torus.sigma();
    for i in 1..=3 {
        let case = torus.classify_flip(i);
        let labels = case.labels.ok_or("torus flip unexpectedly degenerate")?;
        if case.tag != FlipTag::Case8 {
            return Err(format!("torus flip {i} classified as {:?}", case.tag));
        }
        if sigma.get(labels.i, labels.j) != -2 || sigma.get(labels.i, labels.k) != 2 {
            return Err(format!(
                "spike orientation mismatch at edge {i}: sigma_ij = {}, sigma_ik = {}",
                sigma.get(labels.i, labels.j),
                sigma.get(labels.i, labels.k)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    #[test]
    fn torus_is_valid() {
        let t = once_punctured_torus();
        let r = t.validate();
        assert!(r.is_valid(), "{:?}", r.failures);
        assert_eq!(r.edges, 3);
        assert_eq!(r.triangles, 2);
    }

    #[test]
    fn three_punctured_sphere_has_three_orbits() {
        let t = three_punctured_sphere();
        assert_eq!(t.punctures(), 3);
        let pd = t.vertex_orbits();
        assert_eq!(pd.orbits.len(), 3);
        assert!(pd.orbits.iter().all(|o| o.len() == 2));
    }

    #[test]
    fn torus_single_orbit() {
        let pd = once_punctured_torus().vertex_orbits();
        assert_eq!(pd.orbits.len(), 1);
        assert_eq!(pd.orbits[0].len(), 6);
        for i in 0..3 {
            assert_eq!(pd.k[i][0], 2);
        }
    }

    #[test]
    fn five_punctured_sphere_counts() {
        let t = five_punctured_sphere();
        assert_eq!(t.punctures(), 5);
        assert_eq!(t.edge_count(), 9);
        let pd = t.vertex_orbits();
        for row in &pd.k {
            assert_eq!(row.iter().map(|&x| x as u32).sum::<u32>(), 2);
        }
    }

    #[test]
    fn edge_on_three_slots_is_reported() {
        let t = IdealTriangulation::new_unchecked(
            1,
            1,
            3,
            vec![
                Triangle { name: "A".into(), sides: [1, 1, 3] },
                Triangle { name: "B".into(), sides: [1, 2, 3] },
            ],
        );
        let r = t.validate();
        assert!(!r.is_valid());
        assert!(r.failures.iter().any(|f| f.to_string().starts_with("edge multiplicity")));
    }

    #[test]
    fn spike_totals() {
        for t in [once_punctured_torus(), three_punctured_sphere()] {
            let a = t.spike_counts();
            let total: i64 = a.iter().flatten().sum();
            assert_eq!(total, 6);
        }
        let a = once_punctured_torus().spike_counts();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(a[i][j] + a[j][i], 2);
                }
            }
        }
        let a = three_punctured_sphere().spike_counts();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(a[i][j] + a[j][i], 2);
                }
            }
        }
    }

    #[test]
    fn sigma_entries() {
        let s = once_punctured_torus().sigma();
        assert!(s.is_antisymmetric());
        for i in 1..=3 {
            for j in 1..=3 {
                if i != j {
                    assert_eq!(s.get(i, j).abs(), 2);
                }
            }
        }
        // cyclic: sigma_12 = sigma_23 = sigma_31
        assert_eq!(s.get(1, 2), s.get(2, 3));
        assert_eq!(s.get(2, 3), s.get(3, 1));
        // Every pair delimits one spike in each direction, so the form vanishes.
        let s = three_punctured_sphere().sigma();
        assert_eq!(s, SigmaMatrix::zero(3));
    }

    #[test]
    fn calibration_holds() {
        calibration_self_test().unwrap();
    }
}
