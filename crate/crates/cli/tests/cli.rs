use std::process::{Command, Output};

use serde_json::Value;

fn liouville(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liouville")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_small_config_passes_and_is_byte_stable() {
    let args = ["verify", "--m", "1", "--degrees", "0,1,2,3", "--trials", "1", "--seed", "9"];
    let first = liouville(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = liouville(&args);
    assert_eq!(first.stdout, second.stdout);

    let report: Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert!(report["version"].as_str().unwrap().starts_with("liouville-report-"));
    assert_eq!(report["config"]["seed"], 9);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(report["summary"]["total"].as_u64().unwrap() as usize, checks.len());
    assert_eq!(report["summary"]["pass"], report["summary"]["total"]);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn injected_fault_fails_with_witness_and_exit_one() {
    let dir = std::env::temp_dir().join(format!("liouville-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let o = liouville(&[
        "verify",
        "--m",
        "1",
        "--degrees",
        "3",
        "--signs",
        "+",
        "--trials",
        "2",
        "--inject-fault",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let failed: Vec<&Value> = report["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], "f_conjugation");
    assert!(failed[0]["witness"]["map"].is_array());
    assert_eq!(report["summary"]["fail"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_configs_are_usage_errors() {
    for args in [
        &["verify", "--trials", "0"][..],
        &["verify", "--float-tol-flow", "-1"],
        &["verify", "--m", "0"],
        &["verify", "--signs", "x"],
        &["verify", "--format", "yaml"],
        &["verify", "--degrees", "0,1", "--inject-fault"],
    ] {
        let o = liouville(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn flow_csv_header_and_canonical_row() {
    let o = liouville(&["flow", "--z", "1,0", "--t-range", "0:1:0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,z_1,z_2,zn_1,zn_2,err");
    assert_eq!(lines.len(), 4);
    let row: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - 1.64872).abs() < 1e-5);
    assert!(row[2].abs() < 1e-15);
}

#[test]
fn flow_header_for_m_two_and_error_column() {
    let o = liouville(&[
        "flow",
        "--a",
        "1/2,0,-1,1/4",
        "--z",
        "0.1,-0.2,0.3,1",
        "--degree",
        "4",
        "--sign",
        "-",
        "--t-range",
        "-1:1:0.25",
        "--rk4-steps",
        "2000",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,z_1,z_2,z_3,z_4,zn_1,zn_2,zn_3,zn_4,err");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let err: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err < 1e-8, "{row}");
    }
}

#[test]
fn flow_single_row_at_zero_time() {
    let o = liouville(&["flow", "--degree", "2", "--a", "1,0", "--z", "0,1", "--t-range", "0:0:0.1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().nth(1).unwrap(), "0,0,1,0,1,0");
}

#[test]
fn malformed_flow_arguments_are_usage_errors() {
    for args in [
        &["flow", "--z", "1,0,0"][..],
        &["flow", "--z", "1,x"],
        &["flow", "--z", "1,0", "--a", "1,2,3,4"],
        &["flow", "--z", "1,0", "--a", "1,q"],
        &["flow", "--z", "1,0", "--t-range", "0:1"],
        &["flow", "--z", "1,0", "--t-range", "0:1:0"],
        &["flow", "--z", "1,0", "--sign", "*"],
    ] {
        let o = liouville(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sample_sp_identity_and_membership() {
    let o = liouville(&["sample-sp", "--m", "2", "--seed", "1", "--count", "0"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_symplectic"], true);
    let id: Vec<Vec<&str>> = (0..4).map(|i| (0..4).map(|j| if i == j { "1" } else { "0" }).collect()).collect();
    assert_eq!(v["matrix"], serde_json::json!(id));

    let o = liouville(&["sample-sp", "--m", "2", "--seed", "7", "--count", "10"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["is_symplectic"], true);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 4);
    assert_eq!(o.stdout, liouville(&["sample-sp", "--m", "2", "--seed", "7", "--count", "10"]).stdout);

    assert_eq!(liouville(&["sample-sp", "--m", "0"]).status.code(), Some(2));
}
