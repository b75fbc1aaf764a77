//! Linear solve and post-processing.

mod post;

pub use post::{
    element_dofs, element_mismatch, error_norms, flux_report, pressure_jumps, pressure_value, projected_velocity,
    velocity_value, DomainErrors, FluxEdge, FluxReport, Node,
};

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Par};
use serde::Serialize;

use crate::assembly::GlobalSystem;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Largest system factorised directly.
    pub direct_limit: usize,
    /// Required `‖Mx − b‖ / ‖b‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
    pub refinement_steps: usize,
    /// Largest system whose null space is estimated densely on failure.
    pub nullity_limit: usize,
    /// Sequential factorisation, for bit-identical results.
    pub deterministic: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            direct_limit: 500_000,
            tolerance: 1e-10,
            max_iterations: 20_000,
            restart: 200,
            refinement_steps: 4,
            nullity_limit: 1500,
            deterministic: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveStats {
    pub method: String,
    pub relative_residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(sys: &GlobalSystem, x: &[f64]) -> Vec<f64> {
    let ax = sys.apply(x);
    sys.rhs.iter().zip(ax).map(|(b, a)| b - a).collect()
}

pub fn solve(sys: &GlobalSystem, opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    if sys.floating > 0 {
        return Err(Error::Singular { nullity: Some(sys.floating) });
    }
    let bnorm = norm(&sys.rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; sys.n], SolveStats { method: "trivial".into(), relative_residual: 0.0, iterations: 0 }));
    }
    let result = if sys.n <= opts.direct_limit { direct(sys, opts, bnorm) } else { gmres(sys, opts, bnorm) };
    match result {
        Err(Error::Singular { .. }) if sys.n <= opts.nullity_limit => {
            Err(Error::Singular { nullity: Some(nullity(sys)) })
        }
        other => other,
    }
}

fn direct(sys: &GlobalSystem, opts: &SolverOptions, bnorm: f64) -> Result<(Vec<f64>, SolveStats)> {
    if opts.deterministic {
        faer::set_global_parallelism(Par::Seq);
    }
    let trip: Vec<Triplet<usize, usize, f64>> = sys.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &trip)
        .map_err(|e| Error::Solver(format!("matrix construction: {e:?}")))?;
    let lu = m.sp_lu().map_err(|_| Error::Singular { nullity: None })?;
    let mut x = vec![0.0; sys.n];
    let mut r = sys.rhs.clone();
    let mut rel = 1.0;
    let mut steps = 0;
    for _ in 0..=opts.refinement_steps {
        let dx = lu.solve(Col::from_fn(sys.n, |i| r[i]));
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dx[i];
        }
        r = residual(sys, &x);
        let next = norm(&r) / bnorm;
        steps += 1;
        if !next.is_finite() {
            return Err(Error::Singular { nullity: None });
        }
        let stalled = next > 0.5 * rel;
        rel = next;
        if rel <= opts.tolerance * 1e-2 || (rel <= opts.tolerance && stalled) {
            break;
        }
    }
    if rel > opts.tolerance {
        return Err(Error::Solver(format!("relative residual {rel:.3e} after {steps} refinement steps")));
    }
    Ok((x, SolveStats { method: "sparse LU".into(), relative_residual: rel, iterations: steps }))
}

/// Restarted GMRES with row-scaled Jacobi preconditioning.
fn gmres(sys: &GlobalSystem, opts: &SolverOptions, bnorm: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = sys.n;
    let mut diag = vec![1.0; n];
    for &(r, c, v) in &sys.entries {
        if r == c && v != 0.0 {
            diag[r] = 1.0 / v;
        }
    }
    let prec = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(a, d)| a * d).collect() };
    let m = opts.restart.max(1);
    let mut x = vec![0.0; n];
    let mut iters = 0;
    loop {
        let r = residual(sys, &x);
        let beta = norm(&r);
        if beta / bnorm <= opts.tolerance {
            return Ok((x, SolveStats { method: "GMRES".into(), relative_residual: beta / bnorm, iterations: iters }));
        }
        if iters >= opts.max_iterations {
            return Err(Error::Solver(format!("GMRES stopped at relative residual {:.3e}", beta / bnorm)));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|a| a / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut used = 0;
        for j in 0..m {
            let zj = prec(&v[j]);
            let mut w = sys.apply(&zj);
            z.push(zj);
            for i in 0..=j {
                let hij: f64 = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(&v[i]) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if d == 0.0 {
                return Err(Error::Singular { nullity: None });
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            iters += 1;
            if g[j + 1].abs() / bnorm <= opts.tolerance * 0.1 || hn == 0.0 || iters >= opts.max_iterations {
                break;
            }
            v.push(w.iter().map(|a| a / hn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[k]) {
                *xi += yk * zi;
            }
        }
    }
}

/// Dimension of the numerical null space, from a dense SVD.
pub fn nullity(sys: &GlobalSystem) -> usize {
    let m = sys.dense();
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s <= 1e-10 * max).count()
}
