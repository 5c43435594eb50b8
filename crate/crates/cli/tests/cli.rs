use std::path::Path;
use std::process::{Command, Output};

fn chafem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chafem"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn chafem")
}

fn history(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("history.csv")).unwrap()
}

#[test]
fn constant_preset_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = chafem(&["run", "constant_one", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = history(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().starts_with("step,t,tau,nodes,elements,energy,mass"));
    assert!(out.join("mesh_0000.vtk").is_file());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("steps        1"), "{stdout}");
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(
        &cfg,
        "problem = example1\nmesh.cells = 4\nadapt.t_final = 3e-5\nadapt.max_space_iterations = 2\n\
         snapshot_every = 100\n",
    )
    .unwrap();
    let mut rows = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let o = chafem(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        rows.push(history(&out));
    }
    assert!(rows[0].lines().count() > 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn residual_estimator_and_fixed_mesh_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = chafem(&[
        "run",
        "example2",
        "--estimator",
        "residual",
        "--fixed-mesh",
        "--fixed-tau",
        "1e-5",
        "--set",
        "mesh.cells=16",
        "--set",
        "adapt.t_final=3e-5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = history(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let nodes: Vec<&str> = rows.iter().map(|r| r.split(',').nth(3).unwrap()).collect();
    assert!(nodes.iter().all(|n| *n == "545"), "{nodes:?}");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "problem = example1\nadapt.tol_x = 3\n").unwrap();
    let o = chafem(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key `adapt.tol_x`"));

    assert_eq!(chafem(&["run", "no_such_problem"]).status.code(), Some(2));
    assert_eq!(chafem(&["run", "example1", "--set", "eps=-1"]).status.code(), Some(2));
    assert_eq!(chafem(&["run", "example1", "--set", "eps"]).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_with_2() {
    let o = chafem(&["verify", "everything"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracles"));
}

#[test]
fn oracle_suite_passes() {
    let o = chafem(&["verify", "oracles"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[pass]  1 neg_norm"));
}
