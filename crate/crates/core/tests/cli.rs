use std::process::Command;

fn aimg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aimg"))
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn classify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = aimg()
        .args(["classify", "--catalog", &data("sample_catalog.json"), "--jobs", "2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("Theorem2"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["entries"][0]["label"], "2A-2A");
    assert_eq!(report["entries"][0]["j"], "t + 1728");
}

#[test]
fn invariant_violation_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("bad.json");
    std::fs::write(
        &cat,
        r#"{"entries":[{"label":"7X","group":{"level":7,"gens":[[1,0,0,1]]},"pi":"t","u":"t"}]}"#,
    )
    .unwrap();
    let o = aimg()
        .args(["classify", "--catalog"])
        .arg(&cat)
        .arg("--out")
        .arg(dir.path().join("r.json"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_curve_and_condition() {
    let o = aimg().args(["check-curve", "--label", "2A-2A", "--j", "1732"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["Member"]["witness"], "2");
    let o = aimg().args(["check-curve", "--label", "nope", "--j", "3"]).output().unwrap();
    assert!(!o.status.success());
    let o = aimg().args(["condition", "--label", "2A-2A", "--v", "-1"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["trace"]["holds"], false);
    assert_eq!(v["rows"][1]["trace"]["holds"], true);
}

#[test]
fn group_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"level": 1, "gens": []}"#).unwrap();
    let o = aimg().arg("commutator").arg("--group").arg(&g).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["index"], 2);
    let o = aimg().arg("genus").arg("--group").arg(&g).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["genus"], 0);

    let t = dir.path().join("t.json");
    std::fs::write(&t, r#"{"m_part": {"level": 4, "gens": [[1,1,0,1],[1,0,1,1],[3,0,0,1],[1,0,0,3]]}, "primes": [{"ell": 5, "power": 1}]}"#).unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"level": 20, "gens": [[1,1,0,1],[1,0,1,1],[3,0,0,1],[1,0,0,3],[11,0,0,1],[1,0,0,11]]}"#).unwrap();
    let o = aimg().arg("surjectivity").arg("--group").arg(&t).arg("--subgroup").arg(&h).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["verdict"].is_string(), "{v}");
    let o = aimg().env("AIMG_CAP_ORDER", "10").arg("genus").arg("--group").arg(&t).output().unwrap();
    assert!(!o.status.success());
}
