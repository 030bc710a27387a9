use std::path::Path;
use std::process::{Command, Output};

fn stcphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stcphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analytic_defaults_to_csv_on_stdout() {
    let out = stcphase(&["analytic"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "z_ohm,q,n,j_ghz,eps_d_over_eps_a,g_mhz,delta_mhz,t_g_ns,f_analytic,f_numeric,infidelity_powerlaw,clamped,max_fock_pop"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("5000,20000,2,"));
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"qbits": 2}"#);
    let out = stcphase(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qbits"));
}

#[test]
fn missing_config_exits_2() {
    let out = stcphase(&["optimize", "--config", "/nonexistent/c.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"axes": [{"name": "q", "values": []}]}}"#,
    );
    let out = stcphase(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.axes[0].values"));
}

#[test]
fn guard_failure_exits_3() {
    // two Fock levels cannot hold the gate's displacement
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"fock_dim": 2}"#);
    let out = stcphase(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_json_is_versioned_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"initial_cavity": {"thermal": {"n_bar": 0.1, "samples": 3}},
            "sweep": {"axes": [{"name": "z_ohm", "values": [500, 5000]}]}}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = stcphase(&[
            "sweep",
            "--config",
            &cfg,
            "--numeric",
            "--seed",
            "7",
            "--jobs",
            "2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["seed"], 7);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (fa, fnum) = (r["f_analytic"].as_f64().unwrap(), r["f_numeric"].as_f64().unwrap());
        assert!((fa - fnum).abs() < 2e-3);
    }
}

#[test]
fn reference_sweep_has_32_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("grid.csv");
    let out = stcphase(&["sweep", "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 33);
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let out = stcphase(&["simulate", "--format", "json", "--trajectory", traj.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["rows"][0]["f_numeric"].as_f64().unwrap() > 0.98);
    let text = std::fs::read_to_string(traj).unwrap();
    assert!(text.starts_with("t_ns,trace,purity,mean_photon,top_level_pop,polaron_residual"));
    assert!(text.lines().count() > 10);
}

#[test]
fn optimize_improves_on_analytic_point() {
    let f = |cmd: &str| -> f64 {
        let out = stcphase(&[cmd, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["rows"][0]["f_analytic"].as_f64().unwrap()
    };
    assert!(f("optimize") > f("analytic"));
}
