use std::fs;
use std::process::{Command, Output};

fn muss_ti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muss-ti"))
        .args(args)
        .env("MUSS_TI_LOG", "off")
        .output()
        .expect("binary runs")
}

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn compile_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = muss_ti(&[
        "compile", "--bench", "ghz", "--qubits", "32", "--grid", "2x2", "--trap-capacity", "12", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["version"], 1);
    assert_eq!(report["valid"], true);
    assert_eq!(report["circuit"]["source"], "synthetic");
    assert!(report["summary"]["shuttle_count"].as_u64().unwrap() <= 3);

    let schedule = fs::read_to_string(dir.path().join("schedule.jsonl")).unwrap();
    let last: serde_json::Value = serde_json::from_str(schedule.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"], report["summary"]);
    assert!(dir.path().join("placement.json").exists());
}

#[test]
fn qasm_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.qasm");
    fs::write(
        &path,
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nmeasure q[0] -> c[0];\nmeasure q[1] -> c[1];\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = muss_ti(&[
        "compile", "--circuit", path.to_str().unwrap(), "--auto-size", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out_dir.join("report.json"));
    assert_eq!(report["circuit"]["name"], "bell");
    assert_eq!(report["circuit"]["ignored"]["measurements"], 2);
    assert_eq!(report["summary"]["shuttle_count"], 0);
}

#[test]
fn empty_circuit_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.qasm");
    fs::write(&path, "OPENQASM 2.0;\nqreg q[3];\n").unwrap();
    let out = muss_ti(&["compile", "--circuit", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["summary"]["shuttle_count"], 0);
    assert_eq!(report["summary"]["makespan_us"], 0.0);
    assert_eq!(report["summary"]["fidelity"], 1.0);
}

#[test]
fn sweep_emits_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = muss_ti(&[
        "sweep", "--bench", "qaoa", "--qubits", "40", "--axis", "lookahead", "--values", "1,4,8", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("lookahead,"));
    assert!(rows[1].starts_with("1,"));
}

#[test]
fn ideal_perfect_shuttle_keeps_traps_cold() {
    let out = muss_ti(&[
        "ideal", "--bench", "random", "--qubits", "40", "--auto-size", "8", "--mode", "perfect_shuttle",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["summary"]["shuttle_count"].as_u64().unwrap() > 0);
    let heat = report["summary"]["zone_heat"].as_array().unwrap();
    assert!(heat.iter().all(|h| h.as_f64() == Some(0.0)));
    assert_eq!(report["options"]["scheduler"]["cost"]["perfect_shuttle"], true);
}

#[test]
fn oracle_table() {
    let out = muss_ti(&["oracle", "--tiny", "0", "--count", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let ours: usize = cols[2].parse().unwrap();
        let opt: usize = cols[3].parse().unwrap();
        assert!(ours >= opt);
    }
}

#[test]
fn oracle_refuses_large_instances() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.qasm");
    fs::write(&circuit, "OPENQASM 2.0;\nqreg q[6];\ncx q[0],q[1];\n").unwrap();
    let device = dir.path().join("d.json");
    let text = r#"{"mode":"grid","modules":[{"id":0,"zones":[
        {"id":0,"level":1,"capacity":4,"position":0},
        {"id":1,"level":1,"capacity":4,"position":1}]}]}"#;
    fs::write(&device, text).unwrap();
    let out = muss_ti(&["oracle", "--circuit", circuit.to_str().unwrap(), "--device", device.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors_exit_three() {
    for args in [
        &["compile", "--bench", "ghz", "--qubits", "8", "--threshold", "2"][..],
        &["compile", "--bench", "ghz", "--qubits", "8", "--lookahead", "0"][..],
        &["compile", "--circuit", "/no/such/file.qasm"][..],
        &["compile", "--bench", "ghz", "--qubits", "8", "--device", "/no/such/device.json"][..],
    ] {
        let out = muss_ti(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn bad_qasm_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.qasm");
    fs::write(&path, "OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[5];\n").unwrap();
    let out = muss_ti(&["compile", "--circuit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.qasm"));
}
