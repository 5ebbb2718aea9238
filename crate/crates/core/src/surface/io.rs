//! Line-oriented triangulation files.
//!
//! ```text
//! surface genus=1 punctures=1 edges=3
//! edge 1 A:0 B:0
//! edge 2 A:1 B:1
//! edge 3 A:2 B:2
//! ```

use std::collections::HashMap;

use super::{IdealTriangulation, SurfaceError, Triangle};

fn perr(line: usize, msg: impl Into<String>) -> SurfaceError {
    SurfaceError::Parse { line, msg: msg.into() }
}

fn parse_slot(word: &str, line: usize) -> Result<(String, usize), SurfaceError> {
    let (name, slot) = word
        .rsplit_once(':')
        .ok_or_else(|| perr(line, format!("expected <triangle>:<slot>, got {word:?}")))?;
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '#') {
        return Err(perr(line, format!("bad triangle name {name:?}")));
    }
    let slot: usize = slot.parse().map_err(|_| perr(line, format!("bad slot {slot:?}")))?;
    if slot > 2 {
        return Err(perr(line, format!("slot {slot} not in 0..=2")));
    }
    Ok((name.to_string(), slot))
}

/// Parses a triangulation file. Structural problems (malformed lines,
/// unfilled or doubly filled slots) are errors; the topological invariants
/// are left to [`IdealTriangulation::validate`].
pub fn parse_triangulation(text: &str) -> Result<IdealTriangulation, SurfaceError> {
    let mut header: Option<(u32, u32, usize)> = None;
    let mut edges: Vec<(usize, usize, [(String, usize); 2])> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "surface" => {
                if header.is_some() {
                    return Err(perr(line, "duplicate header"));
                }
                let mut fields: HashMap<&str, &str> = HashMap::new();
                for w in &words[1..] {
                    let (k, v) = w.split_once('=').ok_or_else(|| perr(line, format!("expected key=value, got {w:?}")))?;
                    if fields.insert(k, v).is_some() {
                        return Err(perr(line, format!("duplicate field {k}")));
                    }
                }
                let get = |k: &str| -> Result<&str, SurfaceError> {
                    fields.get(k).copied().ok_or_else(|| perr(line, format!("missing field {k}")))
                };
                let genus = get("genus")?.parse().map_err(|_| perr(line, "bad genus"))?;
                let punctures = get("punctures")?.parse().map_err(|_| perr(line, "bad punctures"))?;
                let n = get("edges")?.parse().map_err(|_| perr(line, "bad edges"))?;
                if fields.len() != 3 {
                    return Err(perr(line, "unknown header field"));
                }
                header = Some((genus, punctures, n));
            }
            "edge" => {
                if header.is_none() {
                    return Err(perr(line, "edge line before header"));
                }
                if words.len() != 4 {
                    return Err(perr(line, "expected: edge <index> <triangle>:<slot> <triangle>:<slot>"));
                }
                let e: usize = words[1].parse().map_err(|_| perr(line, format!("bad edge index {:?}", words[1])))?;
                if e == 0 {
                    return Err(perr(line, "edge indices start at 1"));
                }
                let a = parse_slot(words[2], line)?;
                let b = parse_slot(words[3], line)?;
                edges.push((line, e, [a, b]));
            }
            other => return Err(perr(line, format!("unknown directive {other:?}"))),
        }
    }
    let (genus, punctures, n) = header.ok_or_else(|| perr(1, "missing header"))?;

    let mut seen_edges: HashMap<usize, usize> = HashMap::new();
    for (line, e, _) in &edges {
        if let Some(prev) = seen_edges.insert(*e, *line) {
            return Err(perr(*line, format!("edge {e} already listed on line {prev}")));
        }
    }
    edges.sort_by_key(|(_, e, _)| *e);

    let mut order: Vec<String> = Vec::new();
    let mut sides: HashMap<String, [Option<usize>; 3]> = HashMap::new();
    for (line, e, slots) in &edges {
        for (name, slot) in slots {
            let entry = sides.entry(name.clone()).or_insert_with(|| {
                order.push(name.clone());
                [None; 3]
            });
            if entry[*slot].is_some() {
                return Err(perr(*line, format!("slot {name}:{slot} assigned twice")));
            }
            entry[*slot] = Some(*e);
        }
    }
    let mut triangles = Vec::with_capacity(order.len());
    for name in order {
        let s = sides[&name];
        let filled = |c: usize| s[c].ok_or_else(|| perr(0, format!("slot {name}:{c} is not assigned")));
        let sides = [filled(0)?, filled(1)?, filled(2)?];
        triangles.push(Triangle { name, sides });
    }
    Ok(IdealTriangulation::new_unchecked(genus, punctures, n, triangles))
}

/// Deterministic writer; edges in ascending index order, the two slots of
/// an edge in name order.
pub fn format_triangulation(t: &IdealTriangulation) -> String {
    let mut out = format!("surface genus={} punctures={} edges={}\n", t.genus(), t.punctures(), t.edge_count());
    let max_edge = t.triangles().iter().flat_map(|tr| tr.sides).max().unwrap_or(0).max(t.edge_count());
    for e in 1..=max_edge {
        let slots = t.slots_of(e);
        if slots.is_empty() {
            continue;
        }
        // Sorted by name so that parsing and printing again is a fixed point.
        let mut named: Vec<(&str, usize)> = slots.iter().map(|&(tri, s)| (t.triangles()[tri].name.as_str(), s)).collect();
        named.sort();
        out.push_str(&format!("edge {e}"));
        for (name, s) in named {
            out.push_str(&format!(" {name}:{s}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::examples::*;
    use super::*;

    #[test]
    fn torus_text() {
        let t = once_punctured_torus();
        let text = format_triangulation(&t);
        assert_eq!(
            text,
            "surface genus=1 punctures=1 edges=3\nedge 1 A:0 B:0\nedge 2 A:1 B:1\nedge 3 A:2 B:2\n"
        );
        assert_eq!(parse_triangulation(&text).unwrap(), t);
    }

    #[test]
    fn comments_and_order() {
        let text = "# torus\nsurface edges=3 genus=1 punctures=1\nedge 3 A:2 B:2  # last\n\nedge 1 A:0 B:0\nedge 2 A:1 B:1\n";
        assert_eq!(parse_triangulation(text).unwrap(), once_punctured_torus());
    }

    #[test]
    fn structural_errors() {
        let bad = [
            "edge 1 A:0 B:0\n",
            "surface genus=1 punctures=1 edges=3\nedge 1 A:0 B:0\nedge 2 A:0 B:1\nedge 3 A:2 B:2\n",
            "surface genus=1 punctures=1 edges=3\nedge 1 A:0 B:3\n",
            "surface genus=1 punctures=1 edges=3\nedge 1 A:0 B:0\nedge 2 A:1 B:1\n",
            "surface genus=1 punctures=1 edges=3\nedge 1 A:0 B:0\nedge 1 A:1 B:1\n",
            "surface genus=1 punctures=1\n",
            "surface genus=1 punctures=1 edges=3\nvertex 1\n",
        ];
        for text in bad {
            assert!(parse_triangulation(text).is_err(), "{text}");
        }
    }

    #[test]
    fn invariants_reported_not_rejected() {
        let text = "surface genus=0 punctures=1 edges=3\nedge 1 A:0 B:0\nedge 2 A:1 B:1\nedge 3 A:2 B:2\n";
        let t = parse_triangulation(text).unwrap();
        assert!(!t.validate().is_valid());
    }
}
