use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fracvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracvem")).args(args).current_dir(root()).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracvem-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn lists_four_builtins() {
    let o = fracvem(&["list-builtins"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(names.len(), 4);
    assert!(names.iter().any(|n| n == "patch_tests"));
}

#[test]
fn validates_a_mesh_file() {
    let o = fracvem(&["validate-mesh", "configs/meshes/two_cells.mesh"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("mesh is valid"));
}

#[test]
fn validates_a_problem_mesh() {
    let o = fracvem(&["validate-mesh", "configs/problem2_finite_eta.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn run_writes_the_manifest() {
    let dir = scratch("run");
    let o = fracvem(&[
        "run",
        "configs/linear_no_fractures.toml",
        "--set",
        "discretization.order=1",
        "--output-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("order 1"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["order"], 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn patch_tests_pass() {
    let o = fracvem(&["--deterministic", "run", "patch_tests"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_input_exits_with_two() {
    let o = fracvem(&["convergence", "configs/linear_no_fractures.toml", "--levels", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3 levels"));
    let o = fracvem(&["run", "no_such_problem"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fracvem(&["run", "configs/linear_no_fractures.toml", "--set", "discretization.order"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_fracvem"))
        .args(["run", "configs/linear_no_fractures.toml"])
        .env("FRACVEM_THREADS", "2")
        .current_dir(root())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
