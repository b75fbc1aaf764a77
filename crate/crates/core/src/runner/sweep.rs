use serde::Serialize;

use super::{run, RunOptions};
use crate::config::{MeshSource, ProblemConfig};
use crate::error::{Error, Result};

/// Relative errors below this are treated as exact reproduction.
pub const EXACT_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SweepLevel {
    /// Mesh size relative to the coarsest level.
    pub h: f64,
    pub cells: usize,
    pub dofs: usize,
    /// Largest relative pressure, velocity and divergence error over all domains.
    pub relative: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub name: String,
    pub levels: Vec<SweepLevel>,
    /// Least-squares slopes of `log e` against `log h`, or `None` when the
    /// errors sit at round-off on every level.
    pub rates: [Option<f64>; 3],
    /// All errors at round-off: the solution lies in the discrete space.
    pub exact: bool,
}

impl RateTable {
    pub fn to_text(&self) -> String {
        let mut s = String::from("level,h,cells,dofs,e_p,e_u,e_div\n");
        for (i, l) in self.levels.iter().enumerate() {
            s.push_str(&format!(
                "{i},{:.6e},{},{},{:.6e},{:.6e},{:.6e}\n",
                l.h, l.cells, l.dofs, l.relative[0], l.relative[1], l.relative[2]
            ));
        }
        let r: Vec<String> = self.rates.iter().map(|r| r.map_or("exact".into(), |v| format!("{v:.4}"))).collect();
        s.push_str(&format!("rate,,,,{},{},{}\n", r[0], r[1], r[2]));
        s
    }
}

/// Slope of the least-squares line through `(log x, log y)`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs `cfg` on `levels` uniformly refined box meshes, doubling the cell
/// counts each time, and measures the observed orders.
pub fn convergence_sweep(cfg: &ProblemConfig, levels: usize, opts: &RunOptions) -> Result<RateTable> {
    if levels < 3 {
        return Err(Error::Config(format!("a convergence sweep needs at least 3 levels, got {levels}")));
    }
    if cfg.manufactured.is_none() {
        return Err(Error::Config("a convergence sweep needs a manufactured solution".into()));
    }
    let MeshSource::Box { cells, .. } = &cfg.mesh.source else {
        return Err(Error::Config("a convergence sweep needs a box mesh".into()));
    };
    let base = *cells;
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut c = cfg.clone();
        let f = 1usize << l;
        if let MeshSource::Box { cells, .. } = &mut c.mesh.source {
            *cells = [base[0] * f, base[1] * f, base[2] * f];
        }
        let mut o = opts.clone();
        o.output_dir = opts.output_dir.as_ref().map(|d| d.join(format!("level{l}")));
        let r = run(&c, &o)?;
        out.push(SweepLevel {
            h: 1.0 / f as f64,
            cells: r.manifest.elements[3],
            dofs: r.manifest.dofs.total,
            relative: r.manifest.max_relative_error.unwrap_or_default(),
        });
    }
    let h: Vec<f64> = out.iter().map(|l| l.h).collect();
    let mut rates = [None; 3];
    for (i, rate) in rates.iter_mut().enumerate() {
        let e: Vec<f64> = out.iter().map(|l| l.relative[i]).collect();
        if e.iter().any(|v| *v > EXACT_THRESHOLD) {
            *rate = Some(log_slope(&h, &e));
        }
    }
    let exact = rates.iter().all(|r| r.is_none());
    Ok(RateTable { name: cfg.name.clone(), levels: out, rates, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let h = [1.0, 0.5, 0.25];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_slope(&h, &e) - 2.0).abs() < 1e-12);
    }
}
