//! `qteich` command-line front end. Every report starts with a header line
//! recording the subcommand, the seed and the oracle moduli, and output
//! depends only on the arguments and the input files.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::central::{central_elements, compare_h_squared, cusped_ideal, verify_centrality, verify_invariance};
use crate::classical::{length_params, ShearCoordinates};
use crate::coordchange::{flip_hom, path_hom, verify_groupoid, verify_path_independence, CoordChangeError};
use crate::ncrational::{parse_expression, OracleConfig, Verdict};
use crate::pentagon::{verify_order_five, verify_pentagon_case, u_sequence};
use crate::surface::{
    format_moves, format_triangulation, parse_moves, parse_triangulation, FlipGraph, FlipGraphConfig, FlipTag,
    IdealTriangulation, Move, Permutation,
};

#[derive(Debug, Parser)]
#[command(name = "qteich", version, about = "Quantum Teichmüller coordinate changes on punctured surfaces")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Odd prime orders of q used by the numeric oracle.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [5u64, 7, 11])]
    moduli: Vec<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the topological invariants of a triangulation file.
    Validate { file: PathBuf },
    /// Print the skew form.
    Sigma { file: PathBuf },
    /// Classify a flip and print its generator images and the result.
    Flip { file: PathBuf, edge: usize },
    /// Coordinate change along a move sequence.
    Change(ChangeArgs),
    #[command(subcommand)]
    Verify(Verify),
    /// Central elements with centrality and invariance reports.
    Central { file: PathBuf },
    /// Shear coordinates along a move sequence at q = 1.
    Classical(ClassicalArgs),
    /// Breadth-first flip graph with its fundamental cycles.
    Flipgraph(FlipgraphArgs),
}

#[derive(Debug, Args)]
struct ChangeArgs {
    file: PathBuf,
    #[arg(long)]
    moves: String,
    /// Expression in the generators of the final triangulation to carry back.
    #[arg(long)]
    expr: Option<String>,
}

#[derive(Debug, Args)]
struct ClassicalArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    coords: Vec<f64>,
    #[arg(long, default_value = "")]
    moves: String,
}

#[derive(Debug, Args)]
struct FlipgraphArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Also follow transpositions of edge indices.
    #[arg(long)]
    reindex: bool,
    /// Check every fundamental cycle against the identity.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Groupoid relations and the commutation invariant of every flip.
    Relations { file: PathBuf },
    /// Two-generator pentagon identities for one identification case.
    Pentagon {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        case: u8,
    },
    /// Two move sequences give the same coordinate change.
    Paths {
        file: PathBuf,
        #[arg(long)]
        path1: String,
        #[arg(long)]
        path2: String,
    },
    /// Centrality and invariance of the central elements.
    Central { file: PathBuf },
}

#[derive(Debug, Error)]
enum InputError {
    #[error("{0}: {1}")]
    Read(String, std::io::Error),
    #[error("{0}: {1}")]
    Surface(String, crate::surface::SurfaceError),
    #[error("{0}: invalid triangulation\n{1}")]
    Invalid(String, String),
    #[error("{0}")]
    Other(String),
}

const PASS: i32 = 0;
const FAIL: i32 = 1;
const USAGE: i32 = 2;

/// Runs the command line `argv` (program name first) and returns the exit
/// code with the full report.
pub fn run(argv: &[String]) -> (i32, String) {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            return (code, e.render().to_string());
        }
    };
    let cfg = OracleConfig { moduli: cli.moduli.clone(), seed: cli.seed, ..OracleConfig::default() };
    let mut out = String::new();
    let _ = writeln!(out, "# qteich {} seed={} moduli={}", name(&cli.command), cfg.seed, join(&cfg.moduli, ","));
    match dispatch(&cli.command, &cfg, &mut out) {
        Ok(ok) => {
            if ok {
                (PASS, out)
            } else {
                out.push_str("FAIL\n");
                (FAIL, out)
            }
        }
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            (USAGE, out)
        }
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Sigma { .. } => "sigma",
        Command::Flip { .. } => "flip",
        Command::Change(_) => "change",
        Command::Verify(Verify::Relations { .. }) => "verify relations",
        Command::Verify(Verify::Pentagon { .. }) => "verify pentagon",
        Command::Verify(Verify::Paths { .. }) => "verify paths",
        Command::Verify(Verify::Central { .. }) => "verify central",
        Command::Central { .. } => "central",
        Command::Classical(_) => "classical",
        Command::Flipgraph(_) => "flipgraph",
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn read(file: &PathBuf) -> Result<IdealTriangulation, InputError> {
    let label = file.display().to_string();
    let text = std::fs::read_to_string(file).map_err(|e| InputError::Read(label.clone(), e))?;
    let t = parse_triangulation(&text).map_err(|e| InputError::Surface(label.clone(), e))?;
    let report = t.validate();
    if !report.is_valid() {
        return Err(InputError::Invalid(label, join(&report.failures, "\n")));
    }
    Ok(t)
}

/// Parses a move sequence and checks every move against the triangulation
/// it is applied to.
fn moves_for(t: &IdealTriangulation, text: &str) -> Result<Vec<Move>, InputError> {
    let moves = parse_moves(text).map_err(|e| InputError::Other(e.to_string()))?;
    let n = t.edge_count();
    for mv in &moves {
        match mv {
            Move::Flip(i) if *i > n => return Err(InputError::Other(format!("D{i}: edge index out of range 1..{n}"))),
            Move::Reindex(p) if p.len() != n => {
                return Err(InputError::Other(format!("{p}: permutation must have length {n}")))
            }
            _ => {}
        }
    }
    Ok(moves)
}

fn coord_error(e: CoordChangeError) -> InputError {
    InputError::Other(e.to_string())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dispatch(cmd: &Command, cfg: &OracleConfig, out: &mut String) -> Result<bool, InputError> {
    match cmd {
        Command::Validate { file } => {
            let label = file.display().to_string();
            let text = std::fs::read_to_string(file).map_err(|e| InputError::Read(label.clone(), e))?;
            let t = parse_triangulation(&text).map_err(|e| InputError::Surface(label.clone(), e))?;
            let r = t.validate();
            let _ = writeln!(out, "edges {} triangles {} punctures {}", r.edges, r.triangles, r.punctures_found);
            if !r.is_valid() {
                return Err(InputError::Invalid(label, join(&r.failures, "\n")));
            }
            let _ = writeln!(out, "genus {} punctures {}", t.genus(), t.punctures());
            out.push_str("valid\n");
            Ok(true)
        }
        Command::Sigma { file } => {
            let _ = write!(out, "{}", read(file)?.sigma());
            Ok(true)
        }
        Command::Flip { file, edge } => {
            let t = read(file)?;
            moves_for(&t, &format!("D{edge}"))?;
            let case = t.classify_flip(*edge);
            let _ = writeln!(out, "case {}", case_name(case.tag));
            if let Some(l) = case.labels {
                let _ = writeln!(out, "labels i={} j={} k={} l={} m={}", l.i, l.j, l.k, l.l, l.m);
            }
            let h = flip_hom(&t, *edge);
            for g in 1..=t.edge_count() {
                let _ = writeln!(out, "X'{g} -> {}", h.image(g));
            }
            out.push_str("result\n");
            out.push_str(&format_triangulation(h.source()));
            Ok(true)
        }
        Command::Change(a) => {
            let t = read(&a.file)?;
            let moves = moves_for(&t, &a.moves)?;
            let h = path_hom(&t, &moves).map_err(coord_error)?;
            let _ = writeln!(out, "path {}", format_moves(&moves));
            match &a.expr {
                Some(e) => {
                    let e = parse_expression(e, h.source_sigma().clone()).map_err(|e| InputError::Other(e.to_string()))?;
                    let _ = writeln!(out, "{e} -> {}", h.apply(&e));
                }
                None => {
                    for g in 1..=t.edge_count() {
                        let _ = writeln!(out, "X'{g} -> {}", h.image(g));
                    }
                }
            }
            out.push_str("result\n");
            out.push_str(&format_triangulation(h.source()));
            Ok(true)
        }
        Command::Verify(v) => verify(v, cfg, out),
        Command::Central { file } => {
            let t = read(file)?;
            let z = central_elements(&t);
            for (name, p) in z.named() {
                let _ = writeln!(out, "{name} = {p}");
            }
            for (j, g) in cusped_ideal(&t).iter().enumerate() {
                let _ = writeln!(out, "ideal[{}] = {g}", j + 1);
            }
            central_checks(&t, cfg, out)
        }
        Command::Classical(a) => {
            let t = read(&a.file)?;
            if a.coords.len() != t.edge_count() {
                return Err(InputError::Other(format!("expected {} coordinates, got {}", t.edge_count(), a.coords.len())));
            }
            let moves = moves_for(&t, &a.moves)?;
            let mut x = ShearCoordinates::new(a.coords.clone()).map_err(|e| InputError::Other(e.to_string()))?;
            let mut here = t;
            for mv in &moves {
                x = x.apply_move(&here, mv);
                here = here.apply_move(mv);
            }
            let lp = length_params(&x, &here);
            let _ = writeln!(out, "path {}", format_moves(&moves));
            let _ = writeln!(out, "x = {}", join(&x.values().iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>(), ","));
            for (j, p) in lp.p.iter().enumerate() {
                let _ = writeln!(out, "p{} = {p:.12e}", j + 1);
            }
            let _ = writeln!(out, "h = {:.12e}", lp.h);
            Ok(true)
        }
        Command::Flipgraph(a) => {
            let t = read(&a.file)?;
            let g = FlipGraph::explore(
                &t,
                &FlipGraphConfig { depth: a.depth, node_budget: a.budget, include_reindex: a.reindex },
            );
            let cycles = g.cycles();
            let _ = writeln!(out, "nodes {} arcs {} truncated {}", g.node_count(), g.arcs().len(), g.truncated());
            let cases: Vec<String> = g.cases_seen().into_iter().map(case_name).collect();
            let _ = writeln!(out, "cases {}", cases.join(","));
            let _ = writeln!(out, "cycles {}", cycles.len());
            let mut ok = true;
            for c in &cycles {
                if a.check {
                    let v = verify_path_independence(&t, c, &[], cfg).map_err(coord_error)?;
                    let good = v.iter().all(|g| g.verdict.is_equal());
                    ok &= good;
                    let _ = writeln!(out, "{} {}", mark(good), format_moves(c));
                } else {
                    let _ = writeln!(out, "{}", format_moves(c));
                }
            }
            Ok(ok)
        }
    }
}

fn case_name(tag: FlipTag) -> String {
    match tag {
        FlipTag::Degenerate => "degenerate".to_string(),
        t => t.number().to_string(),
    }
}

fn verify(v: &Verify, cfg: &OracleConfig, out: &mut String) -> Result<bool, InputError> {
    match v {
        Verify::Relations { file } => {
            let t = read(file)?;
            let report = verify_groupoid(&t, cfg).map_err(coord_error)?;
            let mut ok = true;
            for c in &report.checks {
                let good = c.all_equal();
                ok &= good;
                let _ = writeln!(out, "{} {} {}", mark(good), c.relation, c.detail);
                for g in c.verdicts.iter().filter(|g| g.verdict != Verdict::EqualExact) {
                    let _ = writeln!(out, "  X{}: {}", g.generator, g.verdict);
                }
            }
            for i in 1..=t.edge_count() {
                let tag = t.classify_flip(i).tag;
                if tag == FlipTag::Degenerate {
                    continue;
                }
                let bad = flip_hom(&t, i).compatibility_failures(cfg);
                ok &= bad.is_empty();
                let _ = writeln!(out, "{} commutation D{i} case {}", mark(bad.is_empty()), case_name(tag));
                for (h, g, v) in bad {
                    let _ = writeln!(out, "  X{h} X{g}: {v}");
                }
            }
            Ok(ok)
        }
        Verify::Pentagon { case } => {
            let mut ok = true;
            if *case == 1 {
                for c in verify_order_five(&u_sequence(), cfg) {
                    let good = c.u.is_equal() && c.v.is_equal();
                    ok &= good;
                    let _ = writeln!(out, "{} U({}) = U({}): {}; V: {}", mark(good), c.k + 5, c.k, c.u, c.v);
                }
            }
            let r = verify_pentagon_case(*case, cfg).map_err(|e| InputError::Other(e.to_string()))?;
            for s in &r.sides {
                let _ = writeln!(out, "side {}", s.side);
                let _ = writeln!(out, "  factors {}", join(&s.factors, " * "));
                let _ = writeln!(out, "  word {}", s.word);
                for st in &s.steps {
                    let _ = writeln!(out, "  {} {} => {}", st.rule, st.before, st.after);
                }
                let _ = writeln!(out, "  reduced {}", s.reduced);
                for (n, res) in &s.residuals {
                    match res {
                        Ok(x) => {
                            let _ = writeln!(out, "  N={n} residual {x:.2e}");
                        }
                        Err(e) => {
                            let _ = writeln!(out, "  N={n} error {e}");
                        }
                    }
                }
                let good = s.symbolic_ok() && s.numeric_ok(r.tolerance);
                let _ = writeln!(out, "  {}", mark(good));
            }
            ok &= r.passes();
            let _ = writeln!(out, "case {} {}", case, mark(ok));
            Ok(ok)
        }
        Verify::Paths { file, path1, path2 } => {
            let t = read(file)?;
            let p1 = moves_for(&t, path1)?;
            let p2 = moves_for(&t, path2)?;
            let verdicts = match verify_path_independence(&t, &p1, &p2, cfg) {
                Ok(v) => v,
                Err(CoordChangeError::EndpointMismatch) => {
                    out.push_str("endpoints differ\n");
                    return Ok(false);
                }
                Err(e) => return Err(coord_error(e)),
            };
            let mut ok = true;
            for g in &verdicts {
                ok &= g.verdict.is_equal();
                let _ = writeln!(out, "X{}: {}", g.generator, g.verdict);
            }
            let _ = writeln!(out, "{}", mark(ok));
            Ok(ok)
        }
        Verify::Central { file } => {
            let t = read(file)?;
            central_checks(&t, cfg, out)
        }
    }
}

fn central_checks(t: &IdealTriangulation, cfg: &OracleConfig, out: &mut String) -> Result<bool, InputError> {
    let c = verify_centrality(t);
    let nonzero: Vec<_> = c.exponents.iter().filter(|e| e.2 != 0).collect();
    let _ = writeln!(out, "{} centrality ({} commutators)", mark(c.all_zero()), c.exponents.len());
    for (name, i, e) in &nonzero {
        let _ = writeln!(out, "  {name} X{i}: q^{e}");
    }
    let mut ok = c.all_zero();
    let n = t.edge_count();
    let mut moves: Vec<Move> = (1..=n).map(Move::Flip).collect();
    for a in 1..=n {
        for b in a + 1..=n {
            moves.push(Move::Reindex(Permutation::transposition(n, a, b)));
        }
    }
    for mv in &moves {
        if let Move::Flip(i) = mv {
            if t.classify_flip(*i).tag == FlipTag::Degenerate {
                let _ = writeln!(out, "skip {mv} degenerate");
                continue;
            }
        }
        let r = verify_invariance(t, mv, cfg).map_err(coord_error)?;
        let tag = r.tag.map(|t| format!(" case {}", case_name(t))).unwrap_or_default();
        ok &= r.passes();
        let _ = writeln!(out, "{} invariance {mv}{tag}", mark(r.passes()));
        for (name, v) in r.checks.iter().filter(|c| c.1 != Verdict::EqualExact) {
            let _ = writeln!(out, "  {name}: {v}");
        }
    }
    let sq = compare_h_squared(t);
    match sq.q_shift {
        Some(0) => out.push_str("H^2 = P1...Pp exactly\n"),
        Some(e) => {
            let _ = writeln!(out, "H^2 = q^{} P1...Pp", -e);
        }
        None => {
            let _ = writeln!(out, "H^2 = {} differs from P1...Pp = {}", sq.h_squared, sq.product);
        }
    }
    Ok(ok)
}
