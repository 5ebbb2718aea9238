//! Diagonal exchanges and reindexings.
//!
//! For a flip at edge `i` with slots `(A, s)` and `(B, s')`, the square has
//! counterclockwise vertices `P0 = A.v_s`, `P1` (apex of `B`),
//! `P2 = A.v_{s+1}`, `P3` (apex of `A`) and sides
//!
//! ```text
//!            P3
//!          /    \
//!       k /  A   \ j
//!        /        \
//!      P0 ---i---- P2
//!        \        /
//!       l \  B   / m
//!          \    /
//!            P1
//! ```
//!
//! `j = A(s+1)`, `k = A(s+2)`, `l = B(s'+1)`, `m = B(s'+2)`; read
//! counterclockwise around the square this is `j, k, l, m` starting from
//! the side at the head `P2` of the diagonal. The new diagonal joins `P1`
//! and `P3`; the new triangles are `A = [i, m, j]` and `B = [i, k, l]`.

use super::{Corner, IdealTriangulation, Permutation, Triangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlipTag {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Case6,
    Case7,
    Case8,
    Degenerate,
}

impl FlipTag {
    pub const CASES: [FlipTag; 8] = [
        FlipTag::Case1,
        FlipTag::Case2,
        FlipTag::Case3,
        FlipTag::Case4,
        FlipTag::Case5,
        FlipTag::Case6,
        FlipTag::Case7,
        FlipTag::Case8,
    ];

    /// 1..=8 for proper cases, 0 for degenerate.
    pub fn number(self) -> usize {
        match self {
            FlipTag::Case1 => 1,
            FlipTag::Case2 => 2,
            FlipTag::Case3 => 3,
            FlipTag::Case4 => 4,
            FlipTag::Case5 => 5,
            FlipTag::Case6 => 6,
            FlipTag::Case7 => 7,
            FlipTag::Case8 => 8,
            FlipTag::Degenerate => 0,
        }
    }

    pub fn from_number(n: usize) -> Option<FlipTag> {
        FlipTag::CASES.get(n.checked_sub(1)?).copied()
    }
}

/// Local edge labels of a flip square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlipLabels {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlipCase {
    pub tag: FlipTag,
    /// `None` exactly for degenerate flips.
    pub labels: Option<FlipLabels>,
}

impl IdealTriangulation {
    fn flip_slots(&self, i: usize) -> ((usize, usize), (usize, usize)) {
        let slots = self.slots_of(i);
        assert_eq!(slots.len(), 2, "edge {i} must label two slots");
        (slots[0], slots[1])
    }

    /// Geometric labels `(j, k, l, m)` before any case-driven rotation.
    fn raw_labels(&self, i: usize) -> Option<(FlipLabels, (usize, usize), (usize, usize))> {
        let ((a, s), (b, s2)) = self.flip_slots(i);
        if a == b {
            return None;
        }
        let ta = &self.triangles()[a].sides;
        let tb = &self.triangles()[b].sides;
        let labels = FlipLabels {
            i,
            j: ta[(s + 1) % 3],
            k: ta[(s + 2) % 3],
            l: tb[(s2 + 1) % 3],
            m: tb[(s2 + 2) % 3],
        };
        Some((labels, (a, s), (b, s2)))
    }

    /// Identifies the side identifications of the flip square at edge `i`.
    ///
    /// When the pattern only matches a case after swapping the roles of the
    /// two triangles (a half turn of the square), the returned labels are
    /// rotated accordingly.
    pub fn classify_flip(&self, i: usize) -> FlipCase {
        let Some((raw, _, _)) = self.raw_labels(i) else {
            return FlipCase { tag: FlipTag::Degenerate, labels: None };
        };
        let FlipLabels { j, k, l, m, .. } = raw;
        let rotated = FlipLabels { i, j: l, k: m, l: j, m: k };
        let (tag, labels) = if j == l && k == m {
            (FlipTag::Case8, raw)
        } else if j == k && l == m {
            (FlipTag::Case6, raw)
        } else if j == m && k == l {
            (FlipTag::Case7, raw)
        } else if j == l {
            (FlipTag::Case4, raw)
        } else if k == m {
            (FlipTag::Case5, raw)
        } else if j == k {
            (FlipTag::Case2, raw)
        } else if l == m {
            (FlipTag::Case2, rotated)
        } else if j == m {
            (FlipTag::Case3, raw)
        } else if k == l {
            (FlipTag::Case3, rotated)
        } else {
            (FlipTag::Case1, raw)
        };
        FlipCase { tag, labels: Some(labels) }
    }

    /// Diagonal exchange at edge `i`; degenerate flips return a copy.
    pub fn flip(&self, i: usize) -> IdealTriangulation {
        self.flip_with_corner_map(i).0
    }

    /// Flip together with, for each corner of the result, a corner of `self`
    /// at the same puncture.
    pub fn flip_with_corner_map(&self, i: usize) -> (IdealTriangulation, Vec<Vec<Corner>>) {
        let identity: Vec<Vec<Corner>> = (0..self.triangle_count())
            .map(|t| (0..3).map(|c| (t, c)).collect())
            .collect();
        let Some((lab, (a, s), (b, s2))) = self.raw_labels(i) else {
            return (self.clone(), identity);
        };
        let mut tris: Vec<Triangle> = self.triangles().to_vec();
        tris[a].sides = [i, lab.m, lab.j];
        tris[b].sides = [i, lab.k, lab.l];
        // Square vertices as old corners.
        let p0 = (a, s);
        let p2 = (a, (s + 1) % 3);
        let p3 = (a, (s + 2) % 3);
        let p1 = (b, (s2 + 2) % 3);
        let mut map = identity;
        map[a] = vec![p3, p1, p2];
        map[b] = vec![p1, p3, p0];
        (self.with_triangles(tris), map)
    }

    /// Reindexing: edge `i` of the result is edge `alpha(i)` of `self`.
    pub fn reindex(&self, alpha: &Permutation) -> IdealTriangulation {
        assert_eq!(alpha.len(), self.edge_count(), "permutation size must equal edge count");
        let inv = alpha.inverse();
        let tris = self
            .triangles()
            .iter()
            .map(|t| Triangle {
                name: t.name.clone(),
                sides: [inv.apply(t.sides[0]), inv.apply(t.sides[1]), inv.apply(t.sides[2])],
            })
            .collect();
        self.with_triangles(tris)
    }

    /// For each puncture of `self.apply_move(mv)`, the puncture of `self`
    /// it came from.
    pub fn puncture_correspondence(&self, mv: &super::Move) -> Vec<usize> {
        let (after, corner_map) = match mv {
            super::Move::Flip(i) => self.flip_with_corner_map(*i),
            super::Move::Reindex(_) => {
                let map = (0..self.triangle_count()).map(|t| (0..3).map(|c| (t, c)).collect()).collect();
                (self.apply_move(mv), map)
            }
        };
        let before = self.vertex_orbits();
        after
            .vertex_orbits()
            .orbits
            .iter()
            .map(|orbit| {
                let (t, c) = orbit[0];
                before.puncture_of(corner_map[t][c]).expect("corner belongs to a puncture")
            })
            .collect()
    }

    /// Applies a move.
    pub fn apply_move(&self, mv: &super::Move) -> IdealTriangulation {
        match mv {
            super::Move::Flip(i) => self.flip(*i),
            super::Move::Reindex(p) => self.reindex(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::examples::*;
    use super::super::Move;
    use super::*;

    #[test]
    fn torus_flips_are_case_8() {
        let t = once_punctured_torus();
        for i in 1..=3 {
            assert_eq!(t.classify_flip(i).tag, FlipTag::Case8);
        }
    }

    #[test]
    fn three_punctured_sphere_cases() {
        let t = three_punctured_sphere();
        for i in 1..=3 {
            let tag = t.classify_flip(i).tag;
            assert!(matches!(tag, FlipTag::Case6 | FlipTag::Case7), "{tag:?}");
        }
        // After one flip both triangles are self-folded; flipping back is Case 6
        // and the enclosed edges are degenerate.
        let f = t.flip(1);
        assert_eq!(f.classify_flip(1).tag, FlipTag::Case6);
        assert_eq!(f.classify_flip(2).tag, FlipTag::Degenerate);
        assert_eq!(f.flip(2), f);
    }

    #[test]
    fn flip_is_involutive() {
        for t in [once_punctured_torus(), three_punctured_sphere(), five_punctured_sphere()] {
            for i in 1..=t.edge_count() {
                let back = t.flip(i).flip(i);
                assert_eq!(back.canonical(), t.canonical(), "edge {i}");
                assert!(t.flip(i).validate().is_valid());
            }
        }
    }

    #[test]
    fn pentagon_relation_combinatorial() {
        let t = five_punctured_sphere();
        let (i, j) = PENTAGON_DIAGONALS;
        let r = t.flip(i).flip(j).flip(i).flip(j).flip(i);
        let swap = Permutation::transposition(t.edge_count(), i, j);
        assert_eq!(r.canonical(), t.reindex(&swap).canonical());
    }

    #[test]
    fn reindex_composition() {
        let t = five_punctured_sphere();
        let a = Permutation::from_one_line(vec![2, 3, 1, 4, 5, 6, 7, 9, 8]).unwrap();
        let b = Permutation::from_one_line(vec![1, 2, 3, 5, 4, 7, 6, 8, 9]).unwrap();
        let ab = a.product(&b);
        assert_eq!(t.reindex(&ab), t.reindex(&b).reindex(&a));
        assert_eq!(t.reindex(&Permutation::identity(9)), t);
        let tr = Permutation::transposition(9, 2, 5);
        assert_eq!(t.reindex(&tr).reindex(&tr), t);
    }

    #[test]
    fn reindexing_relation_on_moves() {
        let t = five_punctured_sphere();
        let a = Permutation::from_one_line(vec![3, 1, 2, 6, 4, 5, 9, 7, 8]).unwrap();
        for i in 1..=9 {
            let lhs = t.reindex(&a).flip(i);
            let rhs = t.flip(a.apply(i)).reindex(&a);
            assert_eq!(lhs.canonical(), rhs.canonical());
        }
    }

    #[test]
    fn distant_flips_commute() {
        let t = five_punctured_sphere();
        for i in 1..=9 {
            for j in 1..=9 {
                if i != j && !t.share_triangle(i, j) {
                    let a = t.apply_move(&Move::Flip(i)).flip(j);
                    let b = t.flip(j).flip(i);
                    assert_eq!(a.canonical(), b.canonical());
                }
            }
        }
    }

    #[test]
    fn corner_map_tracks_punctures() {
        let t = five_punctured_sphere();
        let pd = t.vertex_orbits();
        for i in 1..=9 {
            let (f, map) = t.flip_with_corner_map(i);
            let pf = f.vertex_orbits();
            // Each new orbit maps into a single old orbit, bijectively.
            let mut image = Vec::new();
            for orbit in &pf.orbits {
                let olds: std::collections::BTreeSet<usize> =
                    orbit.iter().map(|&(t, c)| pd.puncture_of(map[t][c]).unwrap()).collect();
                assert_eq!(olds.len(), 1);
                image.push(*olds.iter().next().unwrap());
            }
            image.sort();
            assert_eq!(image, (0..5).collect::<Vec<_>>());
        }
    }
}
