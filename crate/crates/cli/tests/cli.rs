use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polariton-casimir"));
    c.env_remove("POLARITON_CASIMIR_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap().lines().next().unwrap().to_string()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn epsilon_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "eps.json",
        r#"{"sweep": {"variable": "omega", "from": 0.5, "to": 100, "points": 2, "spacing": "linear"}}"#,
    );
    let out = run(&["epsilon", "--config", &cfg]);
    assert!(out.status.success());
    assert_eq!(header(&out), "omega,re_eps_minus_1,im_eps,status");
    let r = rows(&out);
    assert_eq!(r[1][0], "1.0000000000000000e2");
    assert!(num(&r[1][1]).abs() < 1e-3 && num(&r[1][2]).abs() < 1e-3);

    let cfg = write_config(
        dir.path(),
        "one.json",
        r#"{"sweep": {"variable": "omega", "from": 1, "to": 3, "points": 3, "spacing": "linear"}}"#,
    );
    let r = rows(&run(&["epsilon", "--config", &cfg]));
    assert_eq!(num(&r[0][0]), 1.0);
    assert!((num(&r[0][1]) + 1.0).abs() < 1e-14);
    assert!((num(&r[0][2]) - 1.0).abs() < 1e-14);
    assert_eq!(r[0][3], "ok");

    let r = rows(&run(&["epsilon", "--alpha", "0", "--points", "5"]));
    assert_eq!(r.len(), 5);
    for row in r {
        assert_eq!(num(&row[1]), 0.0);
        assert_eq!(num(&row[2]), 0.0);
    }
}

#[test]
fn energy_sweep_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"sweep": {"variable": "a", "from": 1, "to": 8, "points": 4, "spacing": "log"}}"#,
    );
    let out = run(&["energy", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&out), "a,e_vacuum,e1_d,e1_hb,err_d,err_hb,status");
    let r = rows(&out);
    let a: Vec<f64> = r.iter().map(|row| num(&row[0])).collect();
    assert_eq!((a[0], a[3]), (1.0, 8.0));
    assert!((a[1] - 2.0).abs() < 1e-14 && (a[2] - 4.0).abs() < 1e-14);
    assert!((num(&r[0][1]) + 0.130900).abs() < 1e-6);
    for row in &r {
        assert!(num(&row[2]) < 0.0 && num(&row[3]) < 0.0);
        assert_eq!(row[6], "ok");
    }
}

#[test]
fn single_model_leaves_other_columns_empty() {
    let out = run(&["energy", "--model", "d", "--points", "2"]);
    assert!(out.status.success());
    for row in rows(&out) {
        assert!(!row[2].is_empty());
        assert!(row[3].is_empty() && row[5].is_empty());
    }
}

#[test]
fn alpha_sweep_names_its_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "al.json",
        r#"{"model": "d", "sweep": {"variable": "alpha", "from": 0.5, "to": 1, "points": 2, "spacing": "linear"}}"#,
    );
    let out = run(&["energy", "--config", &cfg, "--a", "2"]);
    assert!(out.status.success());
    assert!(header(&out).starts_with("alpha,e_vacuum,"));
    let r = rows(&out);
    assert!((num(&r[0][1]) + std::f64::consts::PI / 48.0).abs() < 1e-15);
    assert!(num(&r[1][2]) < num(&r[0][2]));
}

#[test]
fn force_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{"sweep": {"variable": "a", "from": 2, "to": 4, "points": 2, "spacing": "linear"}}"#,
    );
    let out = run(&["force", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&out), "a,f_d,f_hb,err_d,err_hb,status");
    let r = rows(&out);
    assert!(num(&r[0][1]) > num(&r[1][1]));

    let out = run(&["compare", "--config", &cfg]);
    assert!(out.status.success());
    assert_eq!(header(&out), "a,e1_d,e1_hb,e1_hb_minus_e1_d,err_d,err_hb,status");
    for row in rows(&out) {
        let diff = num(&row[2]) - num(&row[1]);
        assert_eq!(num(&row[3]), diff);
    }
}

#[test]
fn emitted_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("energy.csv");
    let out_str = out_path.to_str().unwrap();
    let first = run(&["energy", "--points", "3", "--alpha", "0.7", "--out", out_str]);
    assert!(first.status.success());
    let csv = fs::read(&out_path).unwrap();
    let cfg_path = format!("{out_str}.config.json");
    fs::remove_file(&out_path).unwrap();
    let again = run(&["energy", "--config", &cfg_path]);
    assert!(again.status.success());
    assert_eq!(fs::read(&out_path).unwrap(), csv);
}

#[test]
fn thread_count_does_not_change_output() {
    let one = bin().args(["energy", "--points", "3"]).env("POLARITON_CASIMIR_THREADS", "1").output().unwrap();
    let two = run(&["energy", "--points", "3", "--threads", "2"]);
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn json_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "j.json",
        r#"{"model": "d", "sweep": {"variable": "a", "from": 1, "to": 2, "points": 2, "spacing": "linear"}, "output": {"format": "json"}}"#,
    );
    let out = run(&["energy", "--config", &cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["a"], 1.0);
    assert!(rows[0]["e1_hb"].is_null());
    assert_eq!(rows[1]["status"], "ok");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"sweep": {"variable": "a", "from": 1, "to": 2, "points": 1, "spacing": "log"}}"#,
        r#"{"sweep": {"variable": "a", "from": 2, "to": 1, "points": 3, "spacing": "log"}}"#,
        r#"{"params": {"a": -1}}"#,
        r#"{"colour": "blue"}"#,
        r#"{"model": "d""#,
        r#"{"quad": {"rel_tol": 0}}"#,
    ];
    for (i, json) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), json);
        let out = run(&["energy", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {json}");
    }
    assert_eq!(run(&["energy", "--a", "2"]).status.code(), Some(2));
    assert_eq!(run(&["epsilon", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "omega.json", r#"{"sweep": {"variable": "omega", "from": 1, "to": 2, "points": 2, "spacing": "log"}}"#);
    assert_eq!(run(&["energy", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn failed_rows_are_kept_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "starved.json",
        r#"{"model": "d", "sweep": {"variable": "a", "from": 1, "to": 2, "points": 2, "spacing": "linear"}, "quad": {"max_subdivisions": 1}}"#,
    );
    let out = run(&["energy", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row.last().unwrap() != "ok"));
}

#[test]
fn validate_benchmark_passes() {
    let out = run(&["validate"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text.contains("FAIL"));
}
