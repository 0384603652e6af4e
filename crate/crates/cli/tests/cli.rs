mod common;

use std::fs;

use common::{nonholo, shared_seed};
use serde_json::Value;

fn seed_arg() -> String {
    shared_seed().display().to_string()
}

#[test]
fn uncontrollable_cell_exits_with_convergence_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cell.json"),
        r#"{"D":[0,0,0],"A":[0,0,0],"Delta":[0,0,0],"V":[0,0,0],"T":250}"#,
    )
    .unwrap();
    let run = nonholo(
        dir.path(),
        &[
            "solve-identity",
            "--cell",
            "cell.json",
            "--restarts",
            "2",
            "--out",
            "s.json",
        ],
    );
    assert_eq!(run.code, 2);
    assert!(run.report()["best"].as_f64().unwrap() > 2.0);
    assert!(!dir.path().join("s.json").exists());
}

#[test]
fn seed_from_another_cell_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cell.json"),
        r#"{"D":[1.1,0.946,0.87],"A":[0,0,0],"Delta":[0.1,0.11,0.312],"V":[0.3,0.33,0.24],"T":250}"#,
    )
    .unwrap();
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "toffoli",
            "--cell",
            "cell.json",
            "--seed",
            &seed_arg(),
            "--out",
            "t.json",
        ],
    );
    assert_eq!(run.code, 3, "{}", run.stdout);
}

#[test]
fn identity_target_leaves_controls_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "identity",
            "--seed",
            &seed_arg(),
            "--out",
            "id.json",
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stdout);
    let csv = fs::read_to_string(dir.path().join("id.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,kind,C_k,delta_C_k"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], (i + 1).to_string());
        assert_eq!(fields[1], if i % 2 == 0 { "S" } else { "omega" });
        assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
    }
    let verify = nonholo(dir.path(), &["verify", "--schedule", "id.json"]);
    assert_eq!(verify.code, 0, "{}", verify.stdout);
}

#[test]
fn conditional_phase_on_a_cell_pair() {
    let dir = tempfile::tempdir().unwrap();
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "phase(pi/32)@2,3",
            "--seed",
            &seed_arg(),
            "--out",
            "b.json",
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert_eq!(run.report()["n_star"], 1);
}

#[test]
fn perturbed_schedule_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "toffoli",
            "--seed",
            &seed_arg(),
            "--out",
            "t.json",
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert_eq!(
        nonholo(dir.path(), &["verify", "--schedule", "t.json"]).code,
        0
    );

    let mut schedule: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    let c = schedule["base_controls"][10].as_f64().unwrap();
    schedule["base_controls"][10] = Value::from(c + 0.1);
    fs::write(
        dir.path().join("bad.json"),
        serde_json::to_string(&schedule).unwrap(),
    )
    .unwrap();
    let bad = nonholo(dir.path(), &["verify", "--schedule", "bad.json"]);
    assert_eq!(bad.code, 2);
    assert_eq!(bad.report()["pass"], false);

    let wrong = nonholo(
        dir.path(),
        &["verify", "--schedule", "t.json", "--gate", "p12"],
    );
    assert_eq!(wrong.code, 2);
}

#[test]
fn physical_qft_without_schedules_is_missing_dependency() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let run = nonholo(
        dir.path(),
        &["qft", "--mode", "physical", "--schedules", "empty"],
    );
    assert_eq!(run.code, 3, "{}", run.stdout);
}

#[test]
fn malformed_inputs_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        nonholo(dir.path(), &["qft", "--input", "missing.json"]).code,
        1
    );
    fs::write(dir.path().join("short.json"), "[[1.0, 0.0]]").unwrap();
    assert_eq!(
        nonholo(dir.path(), &["qft", "--input", "short.json"]).code,
        1
    );
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "teleport",
            "--seed",
            &seed_arg(),
            "--out",
            "x.json",
        ],
    );
    assert_eq!(run.code, 1);
    let run = nonholo(
        dir.path(),
        &[
            "synthesize",
            "toffoli",
            "--seed",
            &seed_arg(),
            "--out",
            "x.json",
            "--tol",
            "0",
        ],
    );
    assert_eq!(run.code, 1);
}

#[test]
fn ideal_qft_of_ground_state_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let run = nonholo(
        dir.path(),
        &["qft", "--out", "out.json", "--program", "program.json"],
    );
    assert_eq!(run.code, 0);
    let report = run.report();
    assert_eq!(report["mode"], "ideal");
    assert!((report["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let state: Vec<[f64; 2]> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(state.len(), 512);
    let want = 1.0 / 512f64.sqrt();
    assert!(state
        .iter()
        .all(|[re, im]| (re - want).abs() < 1e-10 && im.abs() < 1e-10));
    let program: Vec<Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("program.json")).unwrap())
            .unwrap();
    assert_eq!(program.len() as u64, report["op_count"].as_u64().unwrap());
}

#[test]
fn ideal_qft_of_random_state_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut x = 0x2545f4914f6cdd1du64;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let raw: Vec<[f64; 2]> = (0..512).map(|_| [next(), next()]).collect();
    let n = raw.iter().map(|[a, b]| a * a + b * b).sum::<f64>().sqrt();
    let state: Vec<[f64; 2]> = raw.iter().map(|[a, b]| [a / n, b / n]).collect();
    fs::write(
        dir.path().join("in.json"),
        serde_json::to_string(&state).unwrap(),
    )
    .unwrap();
    let run = nonholo(dir.path(), &["qft", "--input", "in.json"]);
    assert_eq!(run.code, 0);
    assert!(run.report()["fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
}
