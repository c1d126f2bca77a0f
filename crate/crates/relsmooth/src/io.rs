//! Plain-text file formats for traces, bound overlays, check reports and
//! problem instances. Everything is either a comma-delimited table with a
//! header row, or flat `key = value` lines with dotted section names; floats
//! are written in shortest round-trippable form.

use std::fmt::Write as _;

use crate::algorithms::{RunRecord, RunTrace};
use crate::error::{Error, Result};
use crate::problems::{
    d_optimal_design, noisy_quadratic, poisson_kl, quad_quartic_euclidean, quad_quartic_split,
    quadratic, regularized_poisson, Objective, Problem, RowMatrix,
};
use crate::verify::CheckReport;

pub const TRACE_HEADER: &str = "iter,epoch,f,gap_if_known,stepsize,breg_to_opt_if_known,seed";

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Data(format!("bad float {s:?}")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

/// Renders a trace as a delimited table, one row per recorded iteration
/// thinned by `stride` (the final record always included). The gap column is
/// present only when the trace knows `f*`.
pub fn trace_to_csv(trace: &RunTrace, stride: usize) -> String {
    let stride = stride.max(1);
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    let last = trace.records.len().saturating_sub(1);
    for (idx, r) in trace.records.iter().enumerate() {
        if idx % stride != 0 && idx != last {
            continue;
        }
        let gap = trace.f_star.map(|fs| r.objective - fs);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.epoch),
            fmt_f64(r.objective),
            fmt_opt(gap),
            fmt_f64(r.stepsize),
            fmt_opt(r.breg_to_opt),
            trace.seed.map(|s| s.to_string()).unwrap_or_default(),
        );
    }
    out
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub epoch: f64,
    pub objective: f64,
    pub gap: Option<f64>,
    pub stepsize: f64,
    pub breg_to_opt: Option<f64>,
    pub seed: Option<u64>,
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(Error::Data(format!("bad trace header: {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Data(format!("bad trace row: {line:?}")));
        }
        rows.push(TraceRow {
            iter: cols[0]
                .parse()
                .map_err(|_| Error::Data(format!("bad iter {:?}", cols[0])))?,
            epoch: parse_f64(cols[1])?,
            objective: parse_f64(cols[2])?,
            gap: parse_opt(cols[3])?,
            stepsize: parse_f64(cols[4])?,
            breg_to_opt: parse_opt(cols[5])?,
            seed: if cols[6].is_empty() {
                None
            } else {
                Some(
                    cols[6]
                        .parse()
                        .map_err(|_| Error::Data(format!("bad seed {:?}", cols[6])))?,
                )
            },
        });
    }
    Ok(rows)
}

/// Bound overlay: per-iteration theoretical values aligned with a trace.
pub fn bounds_to_csv(values: &[(usize, f64)]) -> String {
    let mut out = String::from("iter,bound\n");
    for (k, v) in values {
        let _ = writeln!(out, "{},{}", k, fmt_f64(*v));
    }
    out
}

pub fn bounds_from_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("iter,bound") => {}
        other => return Err(Error::Data(format!("bad bounds header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Data(format!("bad bounds row: {line:?}")))?;
        rows.push((
            k.parse()
                .map_err(|_| Error::Data(format!("bad iter {k:?}")))?,
            parse_f64(v)?,
        ));
    }
    Ok(rows)
}

/// Flat `key = value` rendering of a check report.
pub fn check_report_to_text(r: &CheckReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "check = {}", r.name);
    let _ = writeln!(out, "samples = {}", r.samples);
    let _ = writeln!(out, "worst_slack = {}", fmt_f64(r.worst_slack));
    let _ = writeln!(out, "tolerance = {}", fmt_f64(r.tolerance));
    let _ = writeln!(out, "pass = {}", r.pass);
    if let Some(w) = &r.witness {
        let _ = writeln!(out, "witness.x = {}", join_floats(&w.x));
        if let Some(y) = &w.y {
            let _ = writeln!(out, "witness.y = {}", join_floats(y));
        }
        let _ = writeln!(out, "witness.detail = {}", w.detail);
    }
    out
}

pub fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ")
}

pub fn split_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_f64).collect()
}

/// Parses flat `key = value` lines; `#` starts a comment, blank lines are
/// skipped, keys stay in file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Data(format!("line {}: expected `key = value`", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

const PROBLEM_FORMAT: &str = "relsmooth-problem-v1";

/// Serializes a problem instance (matrices row-major) so the CLI can reload
/// fixed instances. Certificate overrides travel along when they differ from
/// the builder defaults.
pub fn problem_to_text(p: &Problem) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "format = {PROBLEM_FORMAT}");
    match &p.objective {
        Objective::QuadQuartic { m, a, a_ref } => {
            let kind = if *a_ref == 0.0 {
                if *a == 0.0 {
                    "quadratic"
                } else {
                    "quad_quartic_euclidean"
                }
            } else {
                "quad_quartic"
            };
            let _ = writeln!(out, "kind = {kind}");
            let _ = writeln!(out, "rows = {}", m.rows());
            let _ = writeln!(out, "cols = {}", m.cols());
            let _ = writeln!(out, "m = {}", join_floats(m.data()));
            if *a_ref > 0.0 {
                let _ = writeln!(out, "a = {}", fmt_f64(*a));
                let _ = writeln!(out, "a_ref = {}", fmt_f64(*a_ref));
            } else if *a > 0.0 {
                let _ = writeln!(out, "a = {}", fmt_f64(*a));
                let _ = writeln!(out, "l = {}", fmt_f64(p.smoothness));
            }
        }
        Objective::PoissonKl { a, b, mu_reg } => {
            let kind = if *mu_reg > 0.0 {
                "regularized_poisson"
            } else {
                "poisson_kl"
            };
            let _ = writeln!(out, "kind = {kind}");
            let _ = writeln!(out, "rows = {}", a.rows());
            let _ = writeln!(out, "cols = {}", a.cols());
            let _ = writeln!(out, "a = {}", join_floats(a.data()));
            let _ = writeln!(out, "b = {}", join_floats(b));
            if *mu_reg > 0.0 {
                let _ = writeln!(out, "mu_reg = {}", fmt_f64(*mu_reg));
            }
        }
        Objective::DOptimalDesign { h_mat } => {
            let _ = writeln!(out, "kind = d_optimal_design");
            let _ = writeln!(out, "rows = {}", h_mat.rows());
            let _ = writeln!(out, "cols = {}", h_mat.cols());
            let _ = writeln!(out, "h = {}", join_floats(h_mat.data()));
        }
        Objective::NoisyQuadratic { diag, sigma } => {
            let _ = writeln!(out, "kind = noisy_quadratic");
            let _ = writeln!(out, "diag = {}", join_floats(diag));
            let _ = writeln!(out, "sigma = {}", fmt_f64(*sigma));
        }
        Objective::ScaledReference { .. } => {
            return Err(Error::Data(
                "scaled-reference objectives are test fixtures, not serializable".into(),
            ));
        }
    }
    if let Some(s2) = p.noise_level {
        let _ = writeln!(out, "sigma2 = {}", fmt_f64(s2));
    }
    if let Some(fs) = p.optimum_value {
        let _ = writeln!(out, "f_star = {}", fmt_f64(fs));
    }
    if let Some(xs) = &p.optimum_point {
        let _ = writeln!(out, "x_star = {}", join_floats(xs));
    }
    Ok(out)
}

/// Rebuilds a problem from [`problem_to_text`] output; unknown keys are hard
/// errors.
pub fn problem_from_text(text: &str) -> Result<Problem> {
    let kv = parse_kv(text)?;
    let mut map: std::collections::BTreeMap<&str, &str> = std::collections::BTreeMap::new();
    for (k, v) in &kv {
        if map.insert(k.as_str(), v.as_str()).is_some() {
            return Err(Error::Data(format!("duplicate key {k}")));
        }
    }
    let taken: std::cell::RefCell<std::collections::BTreeSet<&str>> =
        std::cell::RefCell::new(std::collections::BTreeSet::new());
    let get = |key: &'static str| -> Option<&str> {
        taken.borrow_mut().insert(key);
        map.get(key).copied()
    };
    let require = |key: &'static str| -> Result<&str> {
        get(key).ok_or_else(|| Error::Data(format!("missing key {key}")))
    };

    match require("format")? {
        PROBLEM_FORMAT => {}
        other => return Err(Error::Data(format!("unknown format {other}"))),
    }
    let kind = require("kind")?;
    let mut problem = match kind {
        "quadratic" | "quad_quartic" | "quad_quartic_euclidean" => {
            let rows: usize = require("rows")?
                .parse()
                .map_err(|_| Error::Data("bad rows".into()))?;
            let cols: usize = require("cols")?
                .parse()
                .map_err(|_| Error::Data("bad cols".into()))?;
            let m = RowMatrix::new(rows, cols, split_floats(require("m")?)?)?;
            match kind {
                "quadratic" => quadratic(m)?,
                "quad_quartic" => {
                    let a = parse_f64(require("a")?)?;
                    let a_ref = match get("a_ref") {
                        Some(v) => parse_f64(v)?,
                        None => a,
                    };
                    quad_quartic_split(m, a, a_ref)?
                }
                _ => {
                    let a = parse_f64(require("a")?)?;
                    let l = parse_f64(require("l")?)?;
                    quad_quartic_euclidean(m, a, l)?
                }
            }
        }
        "poisson_kl" | "regularized_poisson" => {
            let rows: usize = require("rows")?
                .parse()
                .map_err(|_| Error::Data("bad rows".into()))?;
            let cols: usize = require("cols")?
                .parse()
                .map_err(|_| Error::Data("bad cols".into()))?;
            let a = RowMatrix::new(rows, cols, split_floats(require("a")?)?)?;
            let b = split_floats(require("b")?)?;
            if kind == "regularized_poisson" {
                regularized_poisson(a, b, parse_f64(require("mu_reg")?)?)?
            } else {
                poisson_kl(a, b)?
            }
        }
        "d_optimal_design" => {
            let rows: usize = require("rows")?
                .parse()
                .map_err(|_| Error::Data("bad rows".into()))?;
            let cols: usize = require("cols")?
                .parse()
                .map_err(|_| Error::Data("bad cols".into()))?;
            let h = RowMatrix::new(rows, cols, split_floats(require("h")?)?)?;
            d_optimal_design(h)?
        }
        "noisy_quadratic" => {
            let diag = split_floats(require("diag")?)?;
            let sigma = parse_f64(require("sigma")?)?;
            noisy_quadratic(diag, sigma)?
        }
        other => return Err(Error::Data(format!("unknown problem kind {other}"))),
    };
    if let Some(v) = get("sigma2") {
        problem.noise_level = Some(parse_f64(v)?);
    }
    if let Some(v) = get("f_star") {
        problem.optimum_value = Some(parse_f64(v)?);
    }
    if let Some(v) = get("x_star") {
        problem.optimum_point = Some(split_floats(v)?);
    }
    let taken = taken.into_inner();
    for (k, _) in &kv {
        if !taken.contains(k.as_str()) {
            return Err(Error::Data(format!("unknown key {k}")));
        }
    }
    Ok(problem)
}

/// Convenience: the gap-aware trace rows a run produces, for tests.
pub fn trace_rows(trace: &RunTrace) -> Vec<&RunRecord> {
    trace.records.iter().collect()
}
