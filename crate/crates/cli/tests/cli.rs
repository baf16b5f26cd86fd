use std::process::{Command, Output};

fn projgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projgap"))
        .args(args)
        .env_remove("PROJGAP_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn group_info_sizes() {
    let v = json(&projgap(&["group", "info", "--k", "5"]));
    assert_eq!(v["ring_order"], 5);
    assert_eq!(v["sl2_order"], 120);
    assert_eq!(v["group_order"], 3000);
    let v = json(&projgap(&[
        "group",
        "info",
        "--ring",
        r#"{"kind":"poly","p":3,"f":[1,0,1]}"#,
    ]));
    assert_eq!(v["group_order"], 58320);
}

#[test]
fn cocycle_verdict_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("c3.json");
    let out = projgap(&[
        "cocycle",
        "--k",
        "3",
        "--subgroup",
        "translations",
        "--decide",
        "--export",
        table.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["coboundary"]["verdict"]["reason"], "symmetry_violation");
    assert_eq!(v["restricted"]["symmetry"]["elements"][0], "(1,0)");
    assert_eq!(v["restricted"]["symmetry"]["elements"][1], "(0,1)");
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["order"], 3);
    assert_eq!(t["values"].as_array().unwrap().len(), 9);
}

#[test]
fn norm_reports_rerun_from_their_echo() {
    let v = json(&projgap(&["norm", "pair", "--k", "2", "--kprime", "3"]));
    assert!(v["norm"]["value"].as_f64().unwrap() < 3.0);
    let echo = v["command"].as_str().unwrap().to_string();
    let args: Vec<&str> = echo.split_whitespace().skip(1).collect();
    let mut again = json(&projgap(&args));
    let mut first = v.clone();
    first.as_object_mut().unwrap().remove("wall_ms");
    again.as_object_mut().unwrap().remove("wall_ms");
    assert_eq!(first, again);
}

#[test]
fn single_norm_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("single.json");
    let out = projgap(&[
        "norm",
        "single",
        "--k",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["norm"]["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn scan_writes_json_lines_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = projgap(&[
        "scan",
        "--kmin",
        "1",
        "--kmax",
        "2",
        "--csv",
        csv.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "k,kprime,m,dim,norm,residual,iterations,gap,coboundary_verdict,wall_ms"
    );
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(
        projgap(&["scan", "--kmin", "4", "--kmax", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        projgap(&["norm", "single", "--k", "3", "--m", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        projgap(&[
            "group",
            "info",
            "--ring",
            r#"{"kind":"poly","p":4,"f":[1,1]}"#
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        projgap(&["norm", "single", "--k", "3", "--delta", "9"])
            .status
            .code(),
        Some(2)
    );
    let out = projgap(&[
        "norm",
        "single",
        "--k",
        "3",
        "--max-iters",
        "1",
        "--solver",
        "power",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_converged"], false);
}
