use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_qubit-ot");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("QOT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/qubit-ot.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Validates against the whole schema and against the named definition.
fn assert_valid(doc: &Value, def: &str) {
    let root = schema();
    let mut specific = root.clone();
    let obj = specific.as_object_mut().unwrap();
    obj.remove("oneOf");
    obj.insert("$ref".into(), Value::String(format!("#/$defs/{def}")));
    for s in [&root, &specific] {
        let v = jsonschema::validator_for(s).unwrap();
        let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
        assert!(errors.is_empty(), "{def}: {errors:#?}");
    }
}

#[test]
fn single_trial_transcript() {
    let args = ["teleport", "--b2", "0.2", "--state", "0", "--trials", "1", "--seed", "3"];
    let doc = json_of(&args);
    assert_valid(&doc, "transcript");
    let text = stdout(&run(&args));
    let keys = ["seed", "b2", "input", "bm_outcome", "m_outcome", "success", "bob_state", "fidelity"];
    let at: Vec<usize> = keys.iter().map(|k| text.find(&format!("\n  \"{k}\"")).unwrap()).collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "{text}");
    assert_eq!(doc["seed"], 3);
    assert_eq!(doc["b2"], 0.2);
    assert_eq!(doc["success"], doc["m_outcome"] == 0);
}

#[test]
fn teleport_statistics() {
    let doc = json_of(&["teleport", "--b2", "0.2", "--state", "plus", "--trials", "100000"]);
    assert_valid(&doc, "teleport_report");
    let rate = doc["success"]["empirical"].as_f64().unwrap();
    assert!((rate - 0.4).abs() < 3.0 * (0.24f64 / 1e5).sqrt(), "{rate}");
    assert_eq!(doc["agrees"], true);
}

#[test]
fn invalid_b2_is_a_usage_error() {
    for b2 in ["0.6", "0", "0.5", "-0.1"] {
        let o = run(&["teleport", &format!("--b2={b2}"), "--state", "plus"]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("|a| > |b|"), "{}", stderr(&o));
    }
    assert_eq!(run(&["teleport", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(run(&["teleport", "--state", "1,2,3"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn renormalization_warning() {
    let o = run(&["teleport", "--state", "3,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("renormalized"));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc["input"]["alpha"][0].as_f64().unwrap() - 0.6).abs() < 1e-15);
    assert!(run(&["teleport", "--state", "0.6,0.8"]).stderr.is_empty());
}

#[test]
fn ot_reports() {
    let doc = json_of(&["ot", "--b2", "0.25", "--mode", "bit", "--encoding", "plus-minus", "--bit", "1", "--trials", "20000"]);
    assert_valid(&doc, "ot_report");
    let rate = doc["learn_rate"]["empirical"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 3.0 * (0.25f64 / 2e4).sqrt());
    assert_eq!(doc["decode_accuracy"]["accuracy"], 1.0);
    assert_eq!(doc["non_oblivious"], false);

    let doc = json_of(&["ot", "--mode", "bit", "--encoding", "computational", "--trials", "2000"]);
    assert_valid(&doc, "ot_report");
    assert_eq!(doc["learn_rate"]["empirical"], 1.0);
    assert_eq!(doc["non_oblivious"], true);
    assert!(doc["note"].as_str().unwrap().contains("non-oblivious encoding"));

    let doc = json_of(&["ot", "--b2", "0.2", "--mode", "qubit", "--repetitions", "3", "--trials", "5000"]);
    assert_valid(&doc, "ot_report");
    let closed = doc["repetition_curve"][2]["closed_form"].as_f64().unwrap();
    assert!((closed - 0.784).abs() < 1e-12);
}

#[test]
fn ot_curve_csv() {
    let o = run(&["ot", "--b2", "0.2", "--repetitions", "3", "--trials", "2000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,closed_form,empirical,stderr,episodes"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn attack_reports() {
    let doc = json_of(&["attack", "fake-bm", "--true", "2", "--reported", "3", "--state", "0.6,0.8"]);
    assert_valid(&doc, "attack_report");
    assert!(doc["outcome"]["fidelity_to_intended"].as_f64().unwrap() < 1e-12);
    let s = &doc["outcome"]["bob_success_state"]["state"];
    assert!((s["alpha"][0].as_f64().unwrap() + 0.8).abs() < 1e-12);
    assert!((s["beta"][0].as_f64().unwrap() - 0.6).abs() < 1e-12);

    let doc = json_of(&["attack", "pauli", "--k", "1,0,0,0"]);
    assert_valid(&doc, "attack_report");
    assert_eq!(doc["equivalent_to_honest"], true);
    assert_eq!(doc["note"], "equivalent to honest protocol");
    assert!((doc["total_success_probability"].as_f64().unwrap() - 0.4).abs() < 1e-12);

    let h = std::f64::consts::FRAC_1_SQRT_2.to_string();
    let k = format!("0,{h},{h},0");
    let doc = json_of(&["attack", "pauli", "--k", &k, "--state", "0.6,0.8"]);
    assert_valid(&doc, "attack_report");
    assert_eq!(doc["equivalent_to_honest"], false);

    let doc = json_of(&["attack", "entangle", "--state", "0.6,0.8"]);
    assert_valid(&doc, "attack_report");
    assert!(doc["mutual_information_x_bits"].as_f64().unwrap() < 1e-10);
    assert!(doc["mutual_information_z_bits"].as_f64().is_some());
}

#[test]
fn non_unitary_attack_reports_deviation() {
    let o = run(&["attack", "pauli", "--k", "1,1,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("not unitary") && err.contains("3.162e0"), "{err}");
}

#[test]
fn attack_has_no_csv() {
    assert_eq!(run(&["attack", "entangle", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn channel_runs() {
    let doc = json_of(&["channel", "--n", "4", "--m", "4", "--k", "8"]);
    assert_valid(&doc, "channel_run");
    assert_eq!(doc["report"]["accepted"], true);

    let o = run(&["channel", "--k", "20", "--eavesdropper", "intercept-resend", "--seed", "1"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid(&doc, "channel_run");
    let accepted = doc["report"]["accepted"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if accepted { 0 } else { 1 }));

    let doc = json_of(&["channel", "--k", "20", "--eavesdropper", "intercept-resend", "--runs", "2000"]);
    assert_valid(&doc, "channel_statistics");
    assert_eq!(doc["agrees"], true);
}

#[test]
fn sweep_csv_and_json() {
    let o = run(&["sweep", "--grid", "0.1,0.2,0.3,0.4", "--trials", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rows.headers().unwrap().iter().collect::<Vec<_>>(),
        ["b2", "analytic_p", "empirical_p", "stderr", "trials"]
    );
    let analytic: Vec<f64> = rows.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(analytic, [0.2, 0.4, 0.6, 0.8]);

    let doc = json_of(&["sweep", "--grid", "0.1,0.3", "--trials", "2000", "--format", "json"]);
    assert_valid(&doc, "sweep_report");

    assert_eq!(run(&["sweep", "--grid", ""]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--grid", "0.2,0.7"]).status.code(), Some(2));
}

#[test]
fn every_subcommand_is_deterministic() {
    let cases: &[&[&str]] = &[
        &["teleport", "--trials", "1", "--seed", "9"],
        &["teleport", "--trials", "3000", "--seed", "9"],
        &["ot", "--trials", "2000", "--seed", "9"],
        &["ot", "--mode", "bit", "--trials", "2000", "--seed", "9"],
        &["attack", "fake-bm", "--true", "1", "--reported", "4"],
        &["attack", "pauli", "--k", "0,1,0,0"],
        &["attack", "entangle"],
        &["channel", "--eavesdropper", "intercept-resend", "--seed", "9"],
        &["channel", "--runs", "50", "--seed", "9"],
        &["sweep", "--trials", "2000", "--seed", "9"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert!(!a.stdout.is_empty(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let args = ["ot", "--trials", "1000", "--seed", "4"];
    let o = Command::new(BIN)
        .args(args)
        .args(["--output", path.to_str().unwrap()])
        .env_remove("QOT_SEED")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), run(&args).stdout);
}

#[test]
fn seed_from_environment() {
    let env = Command::new(BIN)
        .args(["teleport", "--trials", "1"])
        .env("QOT_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(env.stdout, run(&["teleport", "--trials", "1", "--seed", "77"]).stdout);
}
