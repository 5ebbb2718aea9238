//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use qteich::central::{compare_h_squared, verify_centrality, verify_invariance, verify_invariance_with};
use qteich::classical::check_q1_consistency;
use qteich::coordchange::{
    flip_hom, flip_hom_with, verify_groupoid, verify_groupoid_with, verify_path_independence,
    verify_path_independence_with, FlipTable, GeneratorVerdict,
};
use qteich::ncrational::{equals, parse_expression, OracleConfig, Verdict};
use qteich::pentagon::{u_sequence, verify_order_five, verify_pentagon_case};
use qteich::surface::examples::*;
use qteich::surface::{
    calibration_self_test, format_triangulation, parse_triangulation, FlipGraph, FlipGraphConfig, FlipTag,
    IdealTriangulation, Move, Permutation,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn surfaces() -> [(&'static str, IdealTriangulation); 3] {
    [
        ("torus", once_punctured_torus()),
        ("3-sphere", three_punctured_sphere()),
        ("5-sphere", five_punctured_sphere()),
    ]
}

/// Shallowest flip of each case found by searching the test surfaces.
fn case_witnesses() -> BTreeMap<FlipTag, (IdealTriangulation, usize)> {
    let mut out = BTreeMap::new();
    for (_, t) in surfaces() {
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 3, node_budget: 5_000, include_reindex: false });
        for node in g.nodes() {
            let tri = &node.triangulation;
            for i in 1..=tri.edge_count() {
                let tag = tri.classify_flip(i).tag;
                if tag != FlipTag::Degenerate {
                    out.entry(tag).or_insert_with(|| (tri.clone(), i));
                }
            }
        }
    }
    out
}

fn transpositions(n: usize) -> Vec<Move> {
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            out.push(Move::Reindex(Permutation::transposition(n, a, b)));
        }
    }
    out
}

fn not_equal(vs: &[GeneratorVerdict]) -> Option<String> {
    vs.iter()
        .find(|g| matches!(g.verdict, Verdict::NotEqual { .. }))
        .map(|g| format!("X{} {}", g.generator, g.verdict))
}

fn lemma_order_five() -> Outcome {
    let checks = verify_order_five(&u_sequence(), &OracleConfig::default());
    let all = checks.iter().all(|c| c.u.is_equal() && c.v.is_equal());
    let exact0 = checks.iter().any(|c| c.k == 0 && c.u == Verdict::EqualExact && c.v == Verdict::EqualExact);
    let exact = checks.iter().filter(|c| c.u == Verdict::EqualExact && c.v == Verdict::EqualExact).count();
    outcome(all && exact0 && checks.len() == 5, format!("k=0..4 equal, {exact}/5 decided exactly"))
}

fn pentagon_cases() -> Outcome {
    let cfg = OracleConfig { moduli: vec![5, 7, 11], ..OracleConfig::default() };
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    let mut sides = 0;
    for case in 1..=6 {
        match verify_pentagon_case(case, &cfg) {
            Ok(r) => {
                sides += r.sides.len();
                for s in &r.sides {
                    for (_, x) in &s.residuals {
                        if let Ok(x) = x {
                            worst = worst.max(*x);
                        }
                    }
                }
                if !r.passes() {
                    failed.push(case);
                }
            }
            Err(_) => failed.push(case),
        }
    }
    outcome(failed.is_empty(), format!("6 cases, {sides} side products reduce to 1, max residual {worst:.1e}, failed {failed:?}"))
}

fn groupoid_relations() -> Outcome {
    let cfg = OracleConfig::default();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, t) in surfaces() {
        match verify_groupoid(&t, &cfg) {
            Ok(r) => {
                let exact = r.all_exact();
                ok &= exact && !r.checks.is_empty();
                detail.push(format!("{name}: {} relations {}", r.checks.len(), if exact { "exact" } else { "NOT exact" }));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, detail.join("; "))
}

fn numeric_agreement(vs: &[GeneratorVerdict]) -> bool {
    vs.iter().all(|g| match &g.verdict {
        Verdict::EqualExact => true,
        Verdict::EqualNumeric { moduli, .. } => moduli.len() >= 2,
        _ => false,
    })
}

fn path_independence() -> Outcome {
    let cfg = OracleConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    // Closed walks of length at most 10 stay within distance 5 of the start,
    // and the fundamental cycles of that ball generate all of them.
    for (name, t) in [("torus", once_punctured_torus()), ("3-sphere", three_punctured_sphere())] {
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 5, node_budget: 100_000, include_reindex: true });
        let cycles = g.cycles();
        let mut bad = 0;
        for c in &cycles {
            match verify_path_independence(&t, c, &[], &cfg) {
                Ok(v) if numeric_agreement(&v) => {}
                _ => bad += 1,
            }
        }
        ok &= !g.truncated() && bad == 0 && !cycles.is_empty();
        detail.push(format!("{name}: {} nodes, {} cycles, {bad} failing", g.node_count(), cycles.len()));
    }
    let t = five_punctured_sphere();
    let (i, j) = PENTAGON_DIAGONALS;
    let mut walk: Vec<Move> = [i, j, i, j, i].map(Move::Flip).to_vec();
    walk.push(Move::Reindex(Permutation::transposition(9, i, j)));
    match verify_path_independence(&t, &walk, &[], &cfg) {
        Ok(v) => {
            let good = numeric_agreement(&v);
            ok &= good;
            let exact = v.iter().filter(|g| g.verdict == Verdict::EqualExact).count();
            detail.push(format!("5-sphere pentagon cycle: {exact}/{} exact{}", v.len(), if good { "" } else { ", FAILED" }));
        }
        Err(e) => {
            ok = false;
            detail.push(format!("5-sphere pentagon cycle: {e}"));
        }
    }
    outcome(ok, detail.join("; "))
}

fn sigma_calibration() -> Outcome {
    let cfg = OracleConfig::default();
    let mut ok = true;
    let mut detail = Vec::new();
    if let Err(e) = calibration_self_test() {
        ok = false;
        detail.push(e);
    }
    let mut squares = 0;
    let mut failures = 0;
    let mut flips: Vec<(IdealTriangulation, usize)> = Vec::new();
    for (_, t) in surfaces() {
        flips.extend((1..=t.edge_count()).map(|i| (t.clone(), i)));
    }
    let witnesses = case_witnesses();
    flips.extend(witnesses.values().cloned());
    for (t, i) in &flips {
        if t.classify_flip(*i).tag == FlipTag::Degenerate {
            continue;
        }
        squares += 1;
        failures += flip_hom(t, *i).compatibility_failures(&cfg).len();
    }
    ok &= failures == 0;
    detail.push(format!("{squares} flip squares, {failures} failing pairs"));
    // X_i X_j = q^-4 X_j X_i where the j and l sides are glued together.
    for tag in [FlipTag::Case4, FlipTag::Case8] {
        let Some((t, i)) = witnesses.get(&tag) else {
            ok = false;
            detail.push(format!("no case {} flip found", tag.number()));
            continue;
        };
        let l = t.classify_flip(*i).labels.expect("proper flip");
        let s = Arc::new(t.sigma());
        let lhs = parse_expression(&format!("X{}*X{}", l.i, l.j), s.clone()).unwrap();
        let rhs = parse_expression(&format!("q^-4*X{}*X{}", l.j, l.i), s).unwrap();
        let v = equals(&lhs, &rhs, &cfg);
        ok &= v == Verdict::EqualExact;
        detail.push(format!("case {}: X_iX_j = q^-4 X_jX_i {v}", tag.number()));
    }
    outcome(ok, detail.join("; "))
}

fn central_elements() -> Outcome {
    let cfg = OracleConfig::default();
    let mut ok = true;
    let mut checked = 0;
    let mut cases = std::collections::BTreeSet::new();
    let mut squares = Vec::new();
    let mut jobs: Vec<(IdealTriangulation, Vec<Move>)> = Vec::new();
    for (name, t) in surfaces() {
        let c = verify_centrality(&t);
        ok &= c.all_zero();
        let sq = compare_h_squared(&t);
        squares.push(format!("{name} {}", match sq.q_shift {
            Some(0) => "H^2 = P1...Pp".to_string(),
            Some(e) => format!("H^2 = q^{} P1...Pp", -e),
            None => "H^2 differs from P1...Pp".to_string(),
        }));
        let n = t.edge_count();
        let mut moves: Vec<Move> = (1..=n).map(Move::Flip).collect();
        moves.extend(transpositions(n));
        jobs.push((t, moves));
    }
    for (t, i) in case_witnesses().into_values() {
        ok &= verify_centrality(&t).all_zero();
        jobs.push((t, vec![Move::Flip(i)]));
    }
    for (t, moves) in &jobs {
        for mv in moves {
            if let Move::Flip(i) = mv {
                let tag = t.classify_flip(*i).tag;
                if tag == FlipTag::Degenerate {
                    continue;
                }
                cases.insert(tag.number());
            }
            match verify_invariance(t, mv, &cfg) {
                Ok(r) => ok &= r.passes(),
                Err(_) => ok = false,
            }
            checked += 1;
        }
    }
    ok &= cases.len() == 8;
    outcome(ok, format!("{checked} moves, cases {cases:?}, centrality exponents 0; {}", squares.join(", ")))
}

fn q_one_consistency() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let witnesses = case_witnesses();
    for (tag, (t, i)) in &witnesses {
        let r = check_q1_consistency(t, &Move::Flip(*i), 100, 17 + tag.number() as u64);
        worst = worst.max(r.max_flip_error).max(r.max_h_error).max(r.max_p_error);
        ok &= r.passes(1e-12);
    }
    ok &= witnesses.len() == 8;
    outcome(ok, format!("{} cases x 100 samples, max relative deviation {worst:.1e}", witnesses.len()))
}

/// Runs the table-driven checks of criteria 3-6 with `table` on a square of
/// the given case and names the first one that reports `NotEqual`.
fn mutation_witness(t: &IdealTriangulation, i: usize, table: &FlipTable, cfg: &OracleConfig) -> Option<String> {
    let bad = flip_hom_with(t, i, table).compatibility_failures(cfg);
    if let Some((h, g, v)) = bad.iter().find(|b| matches!(b.2, Verdict::NotEqual { .. })) {
        return Some(format!("commutation X{h} X{g} {v}"));
    }
    if let Ok(r) = verify_invariance_with(t, &Move::Flip(i), cfg, table) {
        if let Some((name, v)) = r.checks.iter().find(|c| matches!(c.1, Verdict::NotEqual { .. })) {
            return Some(format!("invariance {name} {v}"));
        }
    }
    if let Ok(v) = verify_path_independence_with(t, &[Move::Flip(i), Move::Flip(i)], &[], cfg, table) {
        if let Some(w) = not_equal(&v) {
            return Some(format!("reflexivity {w}"));
        }
    }
    if let Ok(r) = verify_groupoid_with(t, cfg, table) {
        for c in &r.checks {
            if let Some(w) = not_equal(&c.verdicts) {
                return Some(format!("{} {w}", c.relation));
            }
        }
    }
    None
}

fn mutation_sensitivity() -> Outcome {
    let cfg = OracleConfig::default();
    let table = FlipTable::standard();
    let witnesses = case_witnesses();
    let slots = table.exponent_slots();
    let mut missed = Vec::new();
    for &slot in &slots {
        let Some((t, i)) = witnesses.get(&slot.case) else {
            missed.push(format!("{slot} (no square)"));
            continue;
        };
        if mutation_witness(t, *i, &table.mutated(slot, 1), &cfg).is_none() {
            missed.push(slot.to_string());
        }
    }
    outcome(missed.is_empty(), format!("{} exponent slots corrupted by +1, {} undetected {missed:?}", slots.len(), missed.len()))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn round_trip_and_golden() -> Outcome {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut items = 0;
    let mut bad = Vec::new();
    let mut tri_files: Vec<PathBuf> =
        std::fs::read_dir(corpus.join("tri")).unwrap().map(|e| e.unwrap().path()).collect();
    tri_files.sort();
    for f in &tri_files {
        items += 1;
        let text = std::fs::read_to_string(f).unwrap();
        match parse_triangulation(&text) {
            Ok(t) if format_triangulation(&t) == text && parse_triangulation(&text).as_ref() == Ok(&t) => {}
            _ => bad.push(f.file_name().unwrap().to_string_lossy().into_owned()),
        }
    }
    let base: BTreeMap<&str, IdealTriangulation> = surfaces().into_iter().collect();
    let names = [("torus1", "torus"), ("sphere3", "3-sphere"), ("sphere5", "5-sphere")];
    for (line_no, line) in std::fs::read_to_string(corpus.join("expressions.txt")).unwrap().lines().enumerate() {
        items += 1;
        let (name, text) = line.split_once(' ').unwrap();
        let key = names.iter().find(|n| n.0 == name).unwrap().1;
        let s = Arc::new(base[key].sigma());
        match parse_expression(text, s.clone()) {
            Ok(e) if e.to_string() == text && parse_expression(&e.to_string(), s).as_ref() == Ok(&e) => {}
            _ => bad.push(format!("expression line {}", line_no + 1)),
        }
    }

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut cmds: Vec<PathBuf> = std::fs::read_dir(&golden)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cmd"))
        .collect();
    cmds.sort();
    std::env::set_current_dir(workspace_root()).unwrap();
    let mut golden_bad = Vec::new();
    for cmd in &cmds {
        let mut argv = vec!["qteich".to_string()];
        argv.extend(std::fs::read_to_string(cmd).unwrap().lines().map(str::to_string));
        let expected = std::fs::read_to_string(cmd.with_extension("out")).unwrap();
        let render = |(code, text): (i32, String)| format!("{text}exit {code}\n");
        let first = render(qteich::cli::run(&argv));
        let second = render(qteich::cli::run(&argv));
        if first != expected || second != first {
            golden_bad.push(cmd.file_stem().unwrap().to_string_lossy().into_owned());
        }
    }
    let ok = items == 50 && bad.is_empty() && golden_bad.is_empty() && !cmds.is_empty();
    outcome(
        ok,
        format!("{items} corpus items, {} mismatched; {} golden CLI runs, unstable {golden_bad:?}", bad.len(), cmds.len()),
    )
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [(u8, &str, Option<Duration>, fn() -> Outcome); 9] = [
        (1, "order-five recursion", secs(5), lemma_order_five),
        (2, "pentagon identities", secs(30), pentagon_cases),
        (3, "groupoid relations", secs(30), groupoid_relations),
        (4, "path independence", secs(300), path_independence),
        (5, "sigma calibration", None, sigma_calibration),
        (6, "central elements", secs(60), central_elements),
        (7, "q=1 consistency", None, q_one_consistency),
        (8, "mutation sensitivity", None, mutation_sensitivity),
        (9, "round trip and golden output", None, round_trip_and_golden),
    ];
    let mut failures = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run)
            .unwrap_or_else(|_| outcome(false, "panicked"));
        let took = start.elapsed();
        let ok = result.ok && limit.is_none_or(|l| took <= l);
        if !ok {
            failures += 1;
        }
        let limit = limit.map(|l| format!(", limit {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {n} {} {name} ({:.2}s{limit}): {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            result.detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
