use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fracvem::config::{apply_overrides, ProblemConfig};
use fracvem::mesh::{read_mesh, validate_polymesh};
use fracvem::runner::{self, builtin_names, RunOptions};

/// Mixed virtual element solver for Darcy flow in fractured porous media.
#[derive(Parser)]
#[command(name = "fracvem", version)]
struct Cli {
    /// Directory for output files and the run manifest.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Single-threaded, bit-reproducible solve.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Relative residual tolerance of the solver.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "FRACVEM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file or a builtin benchmark.
    Run {
        /// Problem file, or the name of a builtin.
        config: String,
        /// Override a configuration value, e.g. `--set discretization.order=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the builtin benchmark names.
    ListBuiltins,
    /// Check a mesh table or the cut mesh of a problem file.
    ValidateMesh { file: PathBuf },
    /// Observed convergence orders under uniform refinement.
    Convergence {
        config: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn load(config: &str, set: &[String]) -> Result<(ProblemConfig, PathBuf)> {
    let path = Path::new(config);
    let (text, base) = if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {config}"))?;
        (text, path.parent().map(Path::to_path_buf).unwrap_or_default())
    } else if builtin_names().contains(&config) {
        (runner::builtin_config(config)?.to_toml()?, PathBuf::new())
    } else {
        bail!("{config}: no such file or builtin");
    };
    let mut overrides = BTreeMap::new();
    for s in set {
        let Some((k, v)) = s.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {s}");
        };
        overrides.insert(k.trim().to_string(), v.trim().to_string());
    }
    let text = if overrides.is_empty() { text } else { apply_overrides(&text, &overrides)? };
    Ok((ProblemConfig::from_toml(&text)?, base))
}

fn run(cli: &Cli, config: &str, set: &[String]) -> Result<bool> {
    let opts = RunOptions {
        output_dir: cli.output_dir.clone(),
        base_dir: PathBuf::new(),
        deterministic: cli.deterministic,
        tolerance: cli.tolerance,
    };
    if set.is_empty() && !Path::new(config).exists() && builtin_names().contains(&config) {
        let report = runner::run_builtin(config, &opts)?;
        print!("{}", report.to_text());
        if let Some(dir) = &cli.output_dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{config}.json")), serde_json::to_string_pretty(&report)?)?;
        }
        return Ok(report.passed());
    }
    let (cfg, base) = load(config, set)?;
    let result = runner::run(&cfg, &RunOptions { base_dir: base, ..opts })?;
    let m = &result.manifest;
    println!("{}: {} dofs order {}", m.name, m.dofs.total, m.order);
    println!("elements per dimension {:?}, nonzeros {}", m.elements, m.nonzeros);
    println!("solver {} residual {:.3e}", m.solver.method, m.solver.relative_residual);
    for e in &result.errors {
        let [p, u, d] = e.relative();
        println!("{}: e_p {p:.3e} e_u {u:.3e} e_div {d:.3e}", e.domain);
    }
    println!("gross inflow {:.9e}", result.flux.gross_inflow);
    println!("flux imbalance {:.3e}, element mismatch {:.3e}", m.max_imbalance, m.element_mismatch);
    Ok(true)
}

fn validate(file: &Path) -> Result<bool> {
    let violations: Vec<String> = if file.extension().is_some_and(|e| e == "toml") {
        let (cfg, base) = load(&file.to_string_lossy(), &[])?;
        let (mesh, _) = runner::build_mesh(&cfg, &base)?;
        let counts = runner::element_counts(&mesh);
        println!("elements per dimension {counts:?}");
        mesh.validate().iter().map(|v| v.to_string()).collect()
    } else {
        let mesh = read_mesh(&fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?)?;
        println!("{} vertices, {} faces, {} cells", mesh.vertices.len(), mesh.faces.len(), mesh.cells.len());
        let tol = 1e-9 * mesh.diameter().max(1.0);
        validate_polymesh(&mesh, tol).iter().map(|v| v.to_string()).collect()
    };
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() {
        println!("mesh is valid");
    }
    Ok(violations.is_empty())
}

fn convergence(cli: &Cli, config: &str, levels: usize, set: &[String]) -> Result<bool> {
    let (cfg, base) = load(config, set)?;
    let opts = RunOptions {
        output_dir: cli.output_dir.clone(),
        base_dir: base,
        deterministic: cli.deterministic,
        tolerance: cli.tolerance,
    };
    let table = runner::convergence_sweep(&cfg, levels, &opts)?;
    print!("{}", table.to_text());
    if let Some(dir) = &cli.output_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("rates.csv"), table.to_text())?;
        fs::write(dir.join("rates.json"), serde_json::to_string_pretty(&table)?)?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match &cli.command {
        Command::Run { config, set } => run(&cli, config, set),
        Command::ListBuiltins => {
            for n in builtin_names() {
                println!("{n}");
            }
            Ok(true)
        }
        Command::ValidateMesh { file } => validate(file),
        Command::Convergence { config, levels, set } => convergence(&cli, config, *levels, set),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
