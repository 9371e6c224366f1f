use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adiabatic_rl::quantum::{evolve_two_level, EvolutionConfig};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adiabatic-rl"));
    for (k, _) in std::env::vars() {
        if k.starts_with("ADIABATIC_RL_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn train_writes_schedule_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["train", "--problem", "grover-easy", "--n", "4", "--T", "62.2", "--seed", "7", "--l-sa", "2", "--l-ps", "40"];
    let o = run(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["schedule.json", "final_schedule.json", "checkpoint.json", "trace.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["problem"]["T"], 62.2);
    assert_eq!(m["summary"]["iterations"], 80);
    let record: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("schedule.json")).unwrap()).unwrap();
    assert_eq!(record["format_version"], 1);
    assert_eq!(record["C"], 6);
    assert_eq!(csv_rows(&dir.path().join("trace.csv")).len(), 81);

    // identical config and seed give byte-identical traces
    let again = tempfile::tempdir().unwrap();
    assert!(run(&args, again.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("trace.csv")).unwrap(),
        fs::read(again.path().join("trace.csv")).unwrap()
    );
}

#[test]
fn sat_training_uses_sat_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "train", "--problem", "sat3", "--n-bits", "10", "--n-clauses", "3", "--T", "6", "--mi", "100", "--l-sa", "1",
            "--l-ps", "2", "--set", "evolution.steps_per_unit_time=20",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let agent = &manifest(dir.path())["config"]["agent"];
    assert_eq!(agent["hidden_layers"], serde_json::json!([12, 12]));
    assert_eq!(agent["capacity"], 1000);
    assert_eq!(agent["mi"], 100);
    assert_eq!(agent["batch_size"], 32);
    let record: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("schedule.json")).unwrap()).unwrap();
    assert_eq!(record["problem"], "sat3");
}

#[test]
fn resume_and_warm_start_read_checkpoints() {
    let src = tempfile::tempdir().unwrap();
    let base = ["train", "--n", "4", "--seed", "3", "--l-sa", "1", "--l-ps", "40"];
    assert!(run(&base, src.path()).status.success());
    let cp = src.path().join("checkpoint.json");

    let warm = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["train", "--n", "5", "--l-sa", "1", "--l-ps", "10", "--warm-start"])
        .arg(&cp)
        .arg("--out")
        .arg(warm.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(warm.path())["inputs"][0], cp.display().to_string());

    // a finished run resumes to an empty continuation
    let resumed = tempfile::tempdir().unwrap();
    let o = bin().args(["train", "--resume"]).arg(&cp).arg("--out").arg(resumed.path()).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(resumed.path())["summary"]["iterations"], 40);

    let o = bin().args(["train", "--resume", "/does/not/exist.json", "--out"]).arg(resumed.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/does/not/exist.json"));
}

#[test]
fn eval_linear_matches_two_level_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eval", "--schedule", "linear", "--problem", "grover-easy", "--n", "1", "--T", "22.0"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("fidelity.csv"));
    assert_eq!(rows[0], ["n", "T", "schedule_kind", "success_probability"]);
    let p: f64 = rows[1][3].parse().unwrap();
    let oracle = evolve_two_level(1, &|x: f64| x, &EvolutionConfig::default().settings(22.0).unwrap())
        .unwrap()
        .success_probability();
    assert!((p - oracle).abs() < 1e-6);
}

#[test]
fn roland_cerf_baseline_at_ten_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "--kind", "roland-cerf", "--n", "10", "--T", "497.8"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("fidelity.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2], "roland-cerf");
    assert!(rows[1][3].parse::<f64>().unwrap() >= 0.99);
}

#[test]
fn baseline_defaults_to_benchmark_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "--kind", "linear", "--set", "evolution.steps_per_unit_time=20"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("fidelity.csv"));
    let ns: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, ["1", "2", "4", "6", "8", "10"]);
}

#[test]
fn stats_reports_every_clause_number() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("rl.json");
    fs::write(&sched, r#"{"format_version":1,"problem":"sat3","variant":null,"n":10,"T":6.0,"C":6,"b":[0.05,0,0,0,0,0]}"#)
        .unwrap();
    let out = dir.path().join("stats");
    let o = bin()
        .args(["stats", "--schedule"])
        .arg(&sched)
        .args(["--samples", "10000", "--clauses", "1..6", "--set", "evolution.steps_per_unit_time=20", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let stats: Value = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let blocks = stats["clauses"].as_array().unwrap();
    assert_eq!(blocks.len(), 6);
    for (k, b) in blocks.iter().enumerate() {
        assert_eq!(b["n_clauses"], k + 1);
        assert!(b["success_se"].as_f64().unwrap().is_finite());
        assert!(b["second_moment_se"].as_f64().unwrap().is_finite());
        assert_eq!(b["samples"].as_u64().unwrap() + b["unsatisfiable"].as_u64().unwrap(), 10_000);
    }
    assert_eq!(stats["schedule_kind"], "rl");
    assert_eq!(stats["pooled_clauses"], serde_json::json!([2, 3, 4, 5, 6]));
    let rows = csv_rows(&out.join("infidelity.csv"));
    assert_eq!(rows[0], ["n_clauses", "sample_index", "infidelity"]);
    let hist = csv_rows(&out.join("histogram.csv"));
    assert_eq!(hist[0].len(), 8);
    let constants: Value = serde_json::from_str(&fs::read_to_string(out.join("constants.json")).unwrap()).unwrap();
    assert_eq!(constants["ensemble"], "goe");
    let m = manifest(&out);
    let kinds: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["infidelity", "histogram", "stats", "constants"]);
}

#[test]
fn single_worker_matches_default_pool() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["stats", "--samples", "300", "--clauses", "2..3", "--set", "evolution.steps_per_unit_time=20"];
    assert!(run(&args, a.path()).status.success());
    let mut one = args.to_vec();
    one.extend(["--jobs", "1"]);
    assert!(run(&one, b.path()).status.success());
    assert_eq!(fs::read(a.path().join("infidelity.csv")).unwrap(), fs::read(b.path().join("infidelity.csv")).unwrap());
    assert_eq!(fs::read(a.path().join("stats.json")).unwrap(), fs::read(b.path().join("stats.json")).unwrap());
}

#[test]
fn spectrum_and_transfer_tables() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("rl.json");
    fs::write(&sched, r#"{"format_version":1,"problem":"grover","variant":"easy","n":3,"T":15.6,"C":6,"b":[0.1,0,0,0,0,0]}"#)
        .unwrap();
    let out = dir.path().join("spec");
    let o = bin()
        .args(["spectrum", "--schedule"])
        .arg(&sched)
        .args(["--set", "evaluation.grid=11", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(&rows[0][..6], ["t_over_T", "E0", "E1", "E_dyn_linear", "E_dyn_rl", "E_dyn_nonlinear"]);
    assert_eq!(rows.len(), 12);
    for col in 3..6 {
        assert!(rows[1][col].parse::<f64>().unwrap().abs() < 1e-12);
    }

    let out = dir.path().join("transfer");
    let o = bin()
        .args(["transfer", "--schedule"])
        .arg(&sched)
        .args(["--targets", "4..5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("transfer.csv"));
    assert_eq!(rows[0], ["n", "T", "rl_infidelity", "linear_infidelity"]);
    let t4: f64 = rows[1][1].parse().unwrap();
    assert!((t4 - 15.6 * 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    fs::write(&file, "seed = 5\n[agent]\nl_ps = 7\nl_sa = 3\n").unwrap();
    let l_ps = |envs: &[(&str, &str)], extra: &[&str]| -> (Value, Value) {
        let out = tempfile::tempdir().unwrap();
        let mut c = bin();
        c.args(["eval", "--n", "1", "--config"]).arg(&file).args(extra).arg("--out").arg(out.path());
        for (k, v) in envs {
            c.env(k, v);
        }
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        let m = manifest(out.path());
        (m["config"]["agent"]["l_ps"].clone(), m["config"]["agent"]["l_sa"].clone())
    };
    assert_eq!(l_ps(&[], &[]), (7.into(), 3.into()));
    assert_eq!(l_ps(&[("ADIABATIC_RL_AGENT_L_PS", "8")], &[]), (8.into(), 3.into()));
    assert_eq!(l_ps(&[("ADIABATIC_RL_AGENT_L_PS", "8")], &["--l-ps", "9"]), (9.into(), 3.into()));

    // without a file, the published default
    let out = tempfile::tempdir().unwrap();
    assert!(run(&["eval", "--n", "1"], out.path()).status.success());
    let m = manifest(out.path());
    assert_eq!(m["config"]["agent"]["l_ps"], 1000);
    assert_eq!(m["config"]["agent"]["l_sa"], 80);
    assert_eq!(m["seed"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eval", "--schedule", "missing/rl.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing/rl.json"));

    let o = run(&["eval", "--set", "agent.learnin_rate=0.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("learnin_rate"));

    let o = run(&["eval", "--set", "agent.gamma=1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"));

    let o = run(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));

    // a steep path on the shortest grid with no doubling allowed
    let wild = dir.path().join("wild.json");
    fs::write(&wild, r#"{"format_version":1,"problem":"grover","variant":"easy","n":4,"T":62.2,"C":6,"b":[40.0,0,0,0,0,0]}"#)
        .unwrap();
    let o = bin()
        .args(["eval", "--schedule"])
        .arg(&wild)
        .args(["--set", "evolution.steps_per_unit_time=20", "--set", "evolution.max_doublings=0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
