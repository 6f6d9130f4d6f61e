use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bellsim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sample_lines(text: &str) -> Vec<&str> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bellsamples v1 n=1 pairing=zx"));
    lines.collect()
}

#[test]
fn identity_samples_are_i_and_z() {
    let out = ok(&["sample-bell", "--generator", "identity", "--n", "1", "--shots", "1000", "--seed", "3"]);
    let lines = sample_lines(&out);
    assert_eq!(lines.len(), 1000);
    // Bit order is (z, x): I = 00, Z = 10.
    assert!(lines.iter().all(|l| *l == "00" || *l == "10"));
    assert!(lines.contains(&"00") && lines.contains(&"10"));
}

#[test]
fn magic_on_t_state_finds_one_t_gate() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "t.json", r#"{"n":1,"gates":[{"g":"H","q":[0]},{"g":"T","q":[0]}]}"#);
    let samples = dir.path().join("s.txt");
    ok(&["sample-bell", "--circuit", s(&c), "--shots", "2000", "--seed", "1", "--out", s(&samples)]);
    let v: serde_json::Value = serde_json::from_str(&ok(&["magic", "--samples", s(&samples)])).unwrap();
    assert_eq!(v["t_hat"], 1);
    // The stabilizer engine refuses the T gate.
    let out = run(&["sample-bell", "--circuit", s(&c), "--shots", "10", "--seed", "1", "--engine", "stab"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn depth_one_samples_bound_depth_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.txt");
    ok(&[
        "sample-bell", "--generator", "brickwork_clifford", "--n", "8", "--depth", "1", "--closed",
        "--circuit-seed", "4", "--shots", "100000", "--seed", "2", "--out", s(&samples),
    ]);
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["depth-test", "--samples", s(&samples), "--arch", "closed-chain"])).unwrap();
    assert!(v["d_lower"].as_u64().unwrap() <= 1);
}

#[test]
fn average_depth_test_with_page_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("page.json");
    ok(&["page-table", "--n", "6", "--depths", "1,2,3", "--circuits", "50", "--seed", "1", "--out", s(&table)]);
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["n"], 6);
    let mut files = Vec::new();
    for i in 0..4 {
        let f = dir.path().join(format!("s{i}.txt"));
        let seed = (10 + i).to_string();
        ok(&[
            "sample-bell", "--generator", "brickwork_clifford", "--n", "6", "--depth", "1", "--closed",
            "--circuit-seed", &seed, "--shots", "20000", "--seed", &seed, "--out", s(&f),
        ]);
        files.push(f);
    }
    let mut args = vec!["depth-test", "--page-table", s(&table), "--samples"];
    args.extend(files.iter().map(|f| s(f)));
    let v: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
    assert!(v["d_lower"].as_u64().unwrap() <= 1);
}

#[test]
fn estimate_reports_records() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.txt");
    ok(&["sample-bell", "--generator", "all_to_all_clifford", "--n", "4", "--depth", "3", "--circuit-seed", "1",
        "--shots", "5000", "--seed", "2", "--out", s(&samples)]);
    let v: serde_json::Value = serde_json::from_str(&ok(&[
        "estimate", "--samples", s(&samples), "--subsystem", "0,1", "--pauli", "IIII", "--gates", "6",
    ]))
    .unwrap();
    let recs = v.as_array().unwrap();
    let get = |name: &str| recs.iter().find(|r| r["estimator"] == name).unwrap();
    assert_eq!(get("overlap")["value"], 1.0);
    assert_eq!(get("rejection_rate")["value"], 0.0);
    assert_eq!(get("virtual_distillation")["value"], 1.0);
    assert_eq!(get("corrected_fidelity")["M"], 5000);
}

#[test]
fn learn_ct_writes_state_and_reports_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "t.json", r#"{"n":2,"gates":[{"g":"H","q":[0]},{"g":"T","q":[0]},{"g":"CNOT","q":[0,1]}]}"#);
    let state = dir.path().join("learned.json");
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["learn-ct", "--circuit", s(&c), "--seed", "5", "--out", s(&state)])).unwrap();
    assert_eq!(v["t_hat"], 1);
    assert!(v["fidelity"].as_f64().unwrap() > 0.95);
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&state).unwrap()).unwrap();
    assert!(saved["clifford"]["gates"].is_array());
    assert_eq!(saved["phi"].as_array().unwrap().len(), 2);
}

#[test]
fn gadget_estimates_half_for_hadamard() {
    let v: serde_json::Value = serde_json::from_str(&ok(&[
        "gadget-p1", "--generator", "clifford_plus_t", "--n", "1", "--t", "0", "--depth", "1", "--circuit-seed", "0",
        "--shots", "20000", "--seed", "1",
    ]))
    .unwrap();
    let p1 = &v.as_array().unwrap()[1];
    assert_eq!(p1["estimator"], "p1");
    assert!(p1["value"].as_f64().unwrap() <= 1.0);
}

const CONFIG: &str = r#"{
  "name": "small",
  "circuit": { "generator": "all_to_all_clifford", "n": 6, "depth": 6, "seed": 3 },
  "noise": { "channel": { "px": 1.0, "py": 0.3333333333333333, "pz": 0.1 }, "measurement": { "px": 1.0, "py": 0.3333333333333333, "pz": 0.1 } },
  "sweep": { "scale": [0.0, 0.002, 0.01] },
  "shots": 20000,
  "seed": 9,
  "estimators": ["dfe", "exact_fidelity", "root_purity", "corrected_fidelity", "xeb", "rejection_rate", "magic"]
}"#;

#[test]
fn run_is_deterministic_and_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CONFIG);
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    ok(&["run", "--config", s(&cfg), "--out", s(&a)]);
    ok(&["run", "--config", s(&cfg), "--out", s(&b)]);
    ok(&["--workers", "1", "run", "--config", s(&cfg), "--out", s(&c)]);
    let (ta, tb, tc) = (
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        std::fs::read(&c).unwrap(),
    );
    assert_eq!(ta, tb);
    assert_eq!(ta, tc);
    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,point,estimator,value,std_error,M,flags"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    // The noiseless point reports unit fidelity for every fidelity estimator.
    for r in rows.iter().filter(|r| r[1] == "0") {
        if matches!(r[2], "dfe" | "exact_fidelity" | "root_purity" | "corrected_fidelity" | "xeb") {
            let v: f64 = r[3].parse().unwrap();
            let se: f64 = r[4].parse().unwrap();
            assert!((v - 1.0).abs() <= se.max(1e-12), "{r:?}");
        }
    }
    // A different seed changes the sampled values.
    let d = dir.path().join("d.csv");
    ok(&["run", "--config", s(&cfg), "--seed", "10", "--out", s(&d)]);
    assert_ne!(std::fs::read(&d).unwrap(), std::fs::read(&a).unwrap());
}

#[test]
fn engine_cap_errors_stay_in_their_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"name":"cap","circuit":{"generator":"all_to_all_clifford","n":12,"depth":2,"seed":1},
            "noise":{"channel":{"px":0.01}},"shots":1000,"seed":1,
            "estimators":["exact_fidelity","root_purity"]}"#,
    );
    let out = ok(&["run", "--config", s(&cfg)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("cap,1,exact_fidelity,,,0,") && lines[1].contains("error="));
    assert!(lines[2].starts_with("cap,1,root_purity,0."));
}

#[test]
fn usage_and_runtime_errors_have_distinct_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sample-bell", "--generator", "identity"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"name":"x","circuit":{"generator":"all_to_all_clifford","n":4},"shots":10,"seed":1,"estimators":["purity"]}"#,
    );
    let out = run(&["run", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["message"], "circuit.depth: required");
    let noseed = write(
        dir.path(),
        "noseed.json",
        r#"{"name":"x","circuit":{"generator":"identity","n":2},"shots":10,"estimators":["purity"]}"#,
    );
    let out = run(&["run", "--config", s(&noseed)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn presets_parse_and_build() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    for name in ["fig2a-desk.json", "figS1d-desk.json"] {
        let text = std::fs::read_to_string(root.join(name)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["seed"].is_u64(), "{name} must pin a seed");
    }
    // A reduced-shot single run of the crystalline preset.
    let out = ok(&["run", "--config", s(&root.join("figS1d-desk.json")), "--shots", "2000"]);
    assert_eq!(out.lines().count(), 1 + 6 * 4);
}
