use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dg_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaunay-glue")).args(args).current_dir(dir).output().unwrap()
}

fn summary(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn floquet_prints_gamma_and_writes_summary() {
    let d = tmp("floquet");
    let out = run(&d, &["floquet", "--epsilon", "1.0", "--j", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "gamma = 1.73205081");
    let s = summary(&d.join("floquet.summary.json"));
    assert_eq!(s["status"], "ok");
    assert_eq!(s["exit_code"], 0);
    assert_eq!(s["subcommand"], "floquet");
    assert_eq!(s["config"]["j"], 2);
    assert!(s["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn exit_codes() {
    let d = tmp("codes");
    assert_eq!(run(&d, &["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&d, &["floquet", "--epsilon", "x"]).status.code(), Some(1));
    let domain = run(&d, &["floquet", "--epsilon", "1.5"]);
    assert_eq!(domain.status.code(), Some(2));
    let s = summary(&d.join("floquet.summary.json"));
    assert_eq!(s["status"], "error");
    assert_eq!(s["exit_code"], 2);
    assert!(s["error"].as_str().unwrap().contains("necksize"));
    assert_eq!(run(&d, &["profile"]).status.code(), Some(2), "missing epsilon");
    assert_eq!(run(&d, &["profile", "--config", "missing.json"]).status.code(), Some(2));
    // low modes are not Poisson data
    assert_eq!(run(&d, &["bvp", "--epsilon", "0.1", "--j", "1"]).status.code(), Some(2));
}

#[test]
fn flags_override_config() {
    let d = tmp("override");
    std::fs::write(d.join("c.json"), r#"{"epsilon": 0.5, "j": 3}"#).unwrap();
    let out = run(&d, &["floquet", "--config", "c.json", "--epsilon", "1.0", "--summary", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "gamma = 2.82842712");
    let s = summary(&d.join("s.json"));
    assert_eq!(s["config"]["epsilon"], 1.0);
    assert_eq!(s["config"]["j"], 3);
}

#[test]
fn periods_table() {
    let d = tmp("periods");
    let out = run(&d, &["periods", "--epsilons", "0.2,0.1", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(d.join("p.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("epsilon,tau,period_s,period_t"));
    assert!(lines[1].starts_with("2.00000000e-1,6.00000000e-1,"));
    let s = summary(&d.join("p.csv.summary.json"));
    assert_eq!(s["result"]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn profile_and_mesh_outputs() {
    let d = tmp("mesh");
    assert_eq!(run(&d, &["profile", "--epsilon", "0.3", "--out-dir", "prof"]).status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("prof/profile.csv")).unwrap();
    assert!(csv.starts_with("s,sigma,sigma_s,k,rho,invariant_drift\n"));
    let args = ["mesh", "--surface", "delaunay", "--epsilon", "0.3", "--rows", "40", "--cols", "16", "--out-dir", "m"];
    assert_eq!(run(&d, &args).status.code(), Some(0));
    let obj = std::fs::read_to_string(d.join("m/mesh.obj")).unwrap();
    let vertices = delaunay_glue::geometry::parse_obj_vertices(&obj).unwrap();
    assert_eq!(vertices.len(), 40 * 16);
    let s = summary(&d.join("m/summary.json"));
    assert!(s["result"]["max_abs_h_deviation"].as_f64().unwrap() < 1e-5);
    for surface in ["sphere", "cylinder", "catenoid"] {
        let out = run(&d, &["mesh", "--surface", surface, "--rows", "30", "--cols", "12", "--format", "ply", "--out-dir", surface]);
        assert_eq!(out.status.code(), Some(0), "{surface}");
        let s = summary(&d.join(surface).join("summary.json"));
        assert!(s["result"]["max_abs_h_deviation"].as_f64().unwrap() < 1e-10, "{surface}");
        assert!(std::fs::read(d.join(surface).join("mesh.ply")).unwrap().starts_with(b"ply"));
    }
    assert_eq!(run(&d, &["mesh", "--surface", "torus"]).status.code(), Some(2));
}

#[test]
fn analysis_subcommands() {
    let d = tmp("analysis");
    assert_eq!(run(&d, &["estimates", "--epsilon", "0.01"]).status.code(), Some(0));
    let s = summary(&d.join("estimates.summary.json"));
    assert!(!s["result"]["checks"].as_array().unwrap().is_empty());
    assert_eq!(run(&d, &["jacobi", "--epsilon", "0.5", "--j", "0"]).status.code(), Some(0));
    let s = summary(&d.join("jacobi.summary.json"));
    let fields = s["result"]["fields"].as_array().unwrap();
    assert_eq!(fields.len(), 2);
    assert!(fields.iter().all(|f| f["residual"].as_f64().unwrap() < 1e-4));
    assert_eq!(run(&d, &["bvp", "--epsilon", "1.0", "--j", "2", "--out", "w.csv"]).status.code(), Some(0));
    let s = summary(&d.join("w.csv.summary.json"));
    assert!((s["result"]["interface_slope"].as_f64().unwrap() + 3f64.sqrt()).abs() < 1e-4);
    assert!(std::fs::read_to_string(d.join("w.csv")).unwrap().starts_with("s,w,w_s\n"));
}

#[test]
fn threads_flag_gives_identical_results() {
    let d = tmp("threads");
    for (dir, threads) in [("one", "1"), ("two", "2")] {
        let args = ["bvp", "--epsilon", "0.05", "--j", "3", "--threads", threads, "--out-dir", dir];
        assert_eq!(run(&d, &args).status.code(), Some(0));
    }
    let a = std::fs::read(d.join("one/bvp.csv")).unwrap();
    let b = std::fs::read(d.join("two/bvp.csv")).unwrap();
    assert_eq!(a, b);
}
