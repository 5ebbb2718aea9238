use std::fmt;

use super::SurfaceError;

/// Permutation of `{1..n}` in one-line notation: `images[i - 1] = alpha(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn from_one_line(images: Vec<usize>) -> Result<Self, SurfaceError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &x in &images {
            if x == 0 || x > n || seen[x] {
                return Err(SurfaceError::BadPermutation(format!("{images:?} is not a bijection of 1..{n}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &x)| x == k + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (k, &x) in self.images.iter().enumerate() {
            inv[x - 1] = k + 1;
        }
        Permutation { images: inv }
    }

    /// The product `alpha beta` under the convention that reindexing by it
    /// equals reindexing by `beta` and then by `alpha`, i.e. `i -> beta(alpha(i))`.
    pub fn product(&self, beta: &Permutation) -> Permutation {
        Permutation { images: self.images.iter().map(|&x| beta.apply(x)).collect() }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|x| x.to_string()).collect();
        write!(f, "P({})", parts.join(" "))
    }
}

/// A single step in the flip/reindex groupoid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Reindex(Permutation),
    Flip(usize),
}

impl Move {
    /// The move that undoes this one.
    pub fn inverse(&self) -> Move {
        match self {
            Move::Flip(i) => Move::Flip(*i),
            Move::Reindex(p) => Move::Reindex(p.inverse()),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Flip(i) => write!(f, "D{i}"),
            Move::Reindex(p) => write!(f, "{p}"),
        }
    }
}

pub fn format_moves(moves: &[Move]) -> String {
    moves.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `D3,D1,P(2 1 3)`. An empty string is the empty path.
pub fn parse_moves(text: &str) -> Result<Vec<Move>, SurfaceError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut moves = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix('D') {
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            let i: usize = r[..end]
                .parse()
                .map_err(|_| SurfaceError::BadMove(format!("expected edge index after 'D' in {text:?}")))?;
            if i == 0 {
                return Err(SurfaceError::BadMove("edge indices start at 1".into()));
            }
            moves.push(Move::Flip(i));
            rest = &r[end..];
        } else if let Some(r) = rest.strip_prefix("P(") {
            let close = r.find(')').ok_or_else(|| SurfaceError::BadMove(format!("unclosed permutation in {text:?}")))?;
            let images = r[..close]
                .split_whitespace()
                .map(|w| w.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SurfaceError::BadMove(format!("permutation entry: {e}")))?;
            moves.push(Move::Reindex(Permutation::from_one_line(images)?));
            rest = &r[close + 1..];
        } else {
            return Err(SurfaceError::BadMove(format!("unexpected input {rest:?}")));
        }
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest
            .strip_prefix(',')
            .ok_or_else(|| SurfaceError::BadMove(format!("expected ',' before {rest:?}")))?;
    }
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let m = parse_moves("D3,D1,P(2 1 3)").unwrap();
        assert_eq!(m, vec![Move::Flip(3), Move::Flip(1), Move::Reindex(Permutation::from_one_line(vec![2, 1, 3]).unwrap())]);
        assert_eq!(format_moves(&m), "D3,D1,P(2 1 3)");
        assert!(parse_moves("").unwrap().is_empty());
        assert!(parse_moves("D0").is_err());
        assert!(parse_moves("P(1 1 2)").is_err());
        assert!(parse_moves("D1;D2").is_err());
    }

    #[test]
    fn product_and_inverse() {
        let a = Permutation::from_one_line(vec![2, 3, 1]).unwrap();
        let b = Permutation::from_one_line(vec![1, 3, 2]).unwrap();
        assert_eq!(a.product(&b).apply(1), b.apply(a.apply(1)));
        assert!(a.product(&a.inverse()).is_identity());
    }
}
