use std::collections::BTreeMap;
use std::path::PathBuf;

use fracvem::config::{apply_overrides, ProblemConfig};
use fracvem::runner::{builtin_config, builtin_names, convergence_sweep, run, RunOptions};
use fracvem::solve::pressure_value;
use fracvem::Error;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> ProblemConfig {
    ProblemConfig::from_toml(&std::fs::read_to_string(config_path(name)).unwrap()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracvem-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(config_path("")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            ProblemConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
    for name in builtin_names() {
        builtin_config(name).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn linear_field_rt0_flux_exact_and_cell_means() {
    let cfg = load("linear_no_fractures.toml");
    let r = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(r.errors.len(), 1);
    let [_, e_u, e_div] = r.errors[0].relative();
    assert!(e_u < 1e-12 && e_div < 1e-12, "e_u {e_u:e}, e_div {e_div:e}");
    // P0 pressure equals the cell mean of p = x - 2y + z/2 + 3, i.e. its centroid value
    let d = &r.mesh.matrix;
    assert_eq!(r.system.dofs.domains[0].id, d.id);
    for e in 0..d.elements.len() {
        let c = d.element_geometry(e, 1).unwrap().centroid;
        let g = d.frame.to_global(&c);
        let exact = g.x - 2.0 * g.y + 0.5 * g.z + 3.0;
        let ph = pressure_value(&r.system, 0, e, &r.solution, &c);
        assert!((ph - exact).abs() < 1e-11, "cell {e}: {ph} vs {exact}");
    }
    assert!(r.manifest.element_mismatch < 1e-12);
}

#[test]
fn rt1_reproduces_linear_pressure() {
    let mut cfg = load("linear_no_fractures.toml");
    cfg.discretization.order = 1;
    let r = run(&cfg, &RunOptions::default()).unwrap();
    let worst = r.manifest.max_relative_error.unwrap();
    assert!(worst.iter().all(|e| *e < 1e-10), "{worst:?}");
}

#[test]
fn manifest_matches_the_system() {
    let cfg = load("linear_no_fractures.toml");
    let r = run(&cfg, &RunOptions::default()).unwrap();
    let m = &r.manifest;
    assert_eq!(m.elements, [0, 0, 0, 24]);
    assert_eq!(m.dofs.total, r.system.n);
    assert_eq!(r.solution.len(), r.system.n);
    assert_eq!(m.nonzeros, r.system.nnz());
    assert!(m.solver.relative_residual < 1e-10);
    for stage in ["mesh", "assemble", "solve"] {
        assert!(m.timings.keys().any(|k| k.contains(stage)), "no {stage} timing in {:?}", m.timings.keys());
    }
}

#[test]
fn deterministic_runs_are_bitwise_equal() {
    let cfg = builtin_config("problem2_finite_eta").unwrap();
    let opts = RunOptions { deterministic: true, ..RunOptions::default() };
    let a = run(&cfg, &opts).unwrap();
    let b = run(&cfg, &opts).unwrap();
    assert_eq!(a.solution, b.solution);
    assert_eq!(a.manifest.dofs.total, b.manifest.dofs.total);
}

#[test]
fn fractured_run_conserves_flux() {
    let cfg = builtin_config("problem2_finite_eta").unwrap();
    let r = run(&cfg, &RunOptions::default()).unwrap();
    assert!(r.manifest.elements[2] > 0);
    assert!(r.manifest.element_mismatch < 1e-9, "{:e}", r.manifest.element_mismatch);
    assert!(r.manifest.max_imbalance < 1e-9, "{:e}", r.manifest.max_imbalance);
    assert!(r.flux.gross_inflow > 0.0);
}

#[test]
fn outputs_are_written() {
    let mut cfg = load("linear_no_fractures.toml");
    cfg.output.vtk = true;
    cfg.output.matrix = true;
    cfg.output.elements = true;
    let dir = scratch("outputs");
    let r = run(&cfg, &RunOptions { output_dir: Some(dir.clone()), ..RunOptions::default() }).unwrap();
    for f in ["manifest.json", "config.toml", "errors.csv", "flux.csv", "matrix.coo", "elements.csv", "fields_3d.vtk"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["dofs"]["total"].as_u64().unwrap() as usize, r.system.n);
    let coo = std::fs::read_to_string(dir.join("matrix.coo")).unwrap();
    assert!(coo.lines().filter(|l| !l.starts_with('%') && !l.starts_with('#')).count() >= r.system.nnz());
    let echoed = ProblemConfig::from_toml(&std::fs::read_to_string(dir.join("config.toml")).unwrap()).unwrap();
    assert_eq!(echoed, cfg);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_configs_are_rejected() {
    let base = std::fs::read_to_string(config_path("linear_no_fractures.toml")).unwrap();
    let bad = [
        ("discretization.order", "-1"),
        ("discretization.order", "5"),
        ("discretization.family", "\"nedelec\""),
        ("mesh.cells", "[0, 1, 1]"),
        ("coefficients.matrix", "-2.0"),
        ("manufactured.field", "\"polynomial\""),
    ];
    for (key, value) in bad {
        let overrides = BTreeMap::from([(key.to_string(), value.to_string())]);
        let outcome = apply_overrides(&base, &overrides).and_then(|t| ProblemConfig::from_toml(&t));
        assert!(matches!(outcome, Err(Error::Config(_))), "{key} = {value} accepted");
    }
    let bdm0 = BTreeMap::from([
        ("discretization.family".to_string(), "\"bdm\"".to_string()),
        ("discretization.order".to_string(), "0".to_string()),
    ]);
    assert!(ProblemConfig::from_toml(&apply_overrides(&base, &bdm0).unwrap()).is_err());
    assert!(ProblemConfig::from_toml("name = \"x\"\nunknown = 1\n").is_err());
}

#[test]
fn overrides_change_values() {
    let base = std::fs::read_to_string(config_path("linear_no_fractures.toml")).unwrap();
    let overrides = BTreeMap::from([("discretization.order".to_string(), "2".to_string())]);
    let cfg = ProblemConfig::from_toml(&apply_overrides(&base, &overrides).unwrap()).unwrap();
    assert_eq!(cfg.discretization.order, 2);
}

#[test]
fn sweep_flags_exact_reproduction() {
    let mut cfg = load("linear_no_fractures.toml");
    cfg.discretization.order = 1;
    if let fracvem::config::MeshSource::Box { cells, .. } = &mut cfg.mesh.source {
        *cells = [1, 1, 1];
    }
    let table = convergence_sweep(&cfg, 3, &RunOptions::default()).unwrap();
    assert!(table.exact);
    assert_eq!(table.levels.iter().map(|l| l.cells).collect::<Vec<_>>(), [1, 8, 64]);
    assert!(convergence_sweep(&cfg, 2, &RunOptions::default()).is_err());
}
