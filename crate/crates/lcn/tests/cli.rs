use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lcn-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lcn")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn converge_writes_identical_csv_for_identical_seed() {
    let dir = scratch("converge");
    let cfg = write_config(
        &dir,
        "# small run\ncorrection.p = 0\nquad.q = 2\nproblem.solution = y1\nrun.eval_points = 20\n",
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("out{k}"));
        let o = run(&[
            "converge",
            "--config",
            &cfg,
            "--levels",
            "1..2",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("convergence.csv")).unwrap());
        assert!(out.join("convergence.txt").exists());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("level,"), "{header}");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), header.split(',').count());
    assert!(row.iter().any(|f| f.contains('e')));
}

#[test]
fn solve_writes_nodal_values() {
    let dir = scratch("solve");
    let cfg = write_config(&dir, "mesh.level = 1\nproblem.solution = one\n");
    let out = dir.join("out");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "node,x,y,z,phi");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 96);
    for r in rows {
        let phi: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!((phi - 1.0).abs() < 1e-3, "{phi}");
    }
}

#[test]
fn moments_and_invariants_subcommands() {
    let dir = scratch("diag");
    let out = dir.join("out");
    let o = run(&["moments", "--p", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("moments.csv")).unwrap();
    assert!(text.starts_with("node,x,y,z,support,relative_min_eigenvalue,max_correction,moment_defect\n"));

    let o = run(&["invariants", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("invariants.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn bad_config_is_reported_with_line() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, "quad.q = 2\nmesh.lvl = 3\n");
    let o = run(&["solve", "--config", &cfg, "--out", dir.join("out").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("mesh.lvl"), "{err}");
}
