use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blockfade_cli::commands::{self, golden_model_file, ValidateArgs};
use blockfade_cli::ModelFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockfade"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("BLOCKFADE_SEED").output().unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn golden_files_are_byte_exact() {
    for hpbw in [7.0, 15.0, 60.0] {
        for (kind, tag) in [(blockfade::StateModel::TwoState, "two"), (blockfade::StateModel::FourState, "four")] {
            let path = golden(&format!("hpbw{hpbw}_{tag}_state.json"));
            let on_disk = std::fs::read_to_string(&path).unwrap();
            let built = golden_model_file(hpbw, kind).unwrap().to_canonical_json();
            assert_eq!(on_disk, built, "{}", path.display());
            assert_eq!(ModelFile::from_json(&on_disk).unwrap().to_canonical_json(), on_disk);
        }
    }
}

#[test]
fn golden_files_match_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/model.schema.json")).unwrap())
            .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for entry in std::fs::read_dir(golden("")).unwrap() {
        let path = entry.unwrap().path();
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    }
}

#[test]
fn simulate_135_s_gives_40909_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&["simulate", s(&golden("hpbw7_four_state.json")), "--duration-s", "135", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = std::fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(lines - 1, 40_909);
    assert!(((40_909.0 - 40_800.0) / 40_800.0_f64).abs() < 0.003);
    assert!(stdout(&o).starts_with("40909 samples"));
}

#[test]
fn simulate_is_deterministic_and_seed_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let model = golden("hpbw60_four_state.json");
    let paths: Vec<PathBuf> = (0..4).map(|i| dir.path().join(format!("t{i}.csv"))).collect();
    let truth: Vec<PathBuf> = (0..4).map(|i| dir.path().join(format!("e{i}.csv"))).collect();
    for i in 0..2 {
        let o = run(&["simulate", s(&model), "--duration-s", "60", "--seed", "42", "--out", s(&paths[i]), "--truth", s(&truth[i])]);
        assert!(o.status.success());
    }
    let o = bin()
        .args(["simulate", s(&model), "--duration-s", "60", "--out", s(&paths[2]), "--truth", s(&truth[2])])
        .env("BLOCKFADE_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success());
    run(&["simulate", s(&model), "--duration-s", "60", "--seed", "43", "--out", s(&paths[3])]);
    let read = |p: &PathBuf| std::fs::read(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_eq!(read(&truth[0]), read(&truth[1]));
    assert_eq!(read(&paths[0]), read(&paths[2]));
    assert_ne!(read(&paths[0]), read(&paths[3]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["analyze", "/no/such/trace.csv", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("no such file"), "{}", stderr(&o));

    let o = run(&["simulate", s(&golden("hpbw7_four_state.json")), "--duration-s", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "time_s,atten_db\n").unwrap();
    let o = run(&["validate", s(&golden("hpbw7_four_state.json")), s(&empty)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no samples"));

    let o = run(&["simulate", "/no/such/model.json", "--duration-s", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["analyze"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flat_trace_has_zero_events() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("flat.csv");
    let mut body = String::from("time_s,atten_db\n");
    for i in 0..1000 {
        body.push_str(&format!("{},0\n", i as f64 * 0.0033));
    }
    std::fs::write(&trace, body).unwrap();
    let events = dir.path().join("ev.csv");
    let o = run(&["analyze", s(&trace), "--out", s(&events)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("0 events"));
    assert_eq!(std::fs::read_to_string(&events).unwrap().lines().count(), 1);
    assert!(dir.path().join("ev.labels.csv").exists());
}

#[test]
fn analyze_synthetic_7deg_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = run(&["simulate", s(&golden("hpbw7_four_state.json")), "--duration-s", "1800", "--seed", "7", "--out", s(&trace)]);
    assert!(o.status.success());
    let events = dir.path().join("ev.csv");
    let o = run(&["analyze", s(&trace), "--model", "four", "--out", s(&events)]);
    assert!(o.status.success());
    let line = stdout(&o);
    let t_d: f64 = line.split("mean t_D ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((t_d / 378.0 - 1.0).abs() < 0.10, "{line}");
}

#[test]
fn fit_needs_eight_events() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    run(&["simulate", s(&golden("hpbw7_four_state.json")), "--duration-s", "10", "--seed", "1", "--out", s(&trace)]);
    let events = dir.path().join("ev.csv");
    assert!(run(&["analyze", s(&trace), "--out", s(&events)]).status.success());
    let o = run(&["fit", s(&events), s(&dir.path().join("ev.labels.csv")), "--hpbw", "7", "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("insufficient events"), "{}", stderr(&o));
}

/// simulate → analyze → fit; returns the fitted model file path.
fn refit(dir: &Path, model: &Path, tag: &str, seed: u64, duration_s: u64) -> PathBuf {
    let trace = dir.join(format!("{tag}.csv"));
    let truth = dir.join(format!("{tag}_truth.csv"));
    let o = run(&["simulate", s(model), "--duration-s", &duration_s.to_string(), "--seed", &seed.to_string(), "--out", s(&trace), "--truth", s(&truth)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let events = dir.join(format!("{tag}_events.csv"));
    assert!(run(&["analyze", s(&trace), "--out", s(&events)]).status.success());
    let out = dir.join(format!("{tag}.json"));
    let o = run(&["fit", s(&events), s(&dir.join(format!("{tag}_events.labels.csv"))), "--hpbw", "60", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("unshadowed → decaying") && table.contains("t_D (ms)"), "{table}");
    out
}

#[test]
fn fit_of_simulation_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let golden_path = golden("hpbw60_four_state.json");
    let first = refit(dir.path(), &golden_path, "a", 60, 7200);
    let second = refit(dir.path(), &first, "b", 61, 7200);
    let golden_model = ModelFile::read(&golden_path).unwrap().to_model().unwrap();
    let m1 = ModelFile::read(&first).unwrap();
    assert_eq!(m1.provenance.source_sha256.as_ref().unwrap().len(), 64);
    let m1 = m1.to_model().unwrap();
    let m2 = ModelFile::read(&second).unwrap().to_model().unwrap();
    assert!((m1.onset_rate() / golden_model.onset_rate() - 1.0).abs() < 0.10);
    for t in m1.rate_table.transitions() {
        let r = m2.rate_table.rate(t.from, t.to).unwrap();
        assert!((r / t.rate_per_s - 1.0).abs() < 0.10, "{} -> {}: {r} vs {}", t.from, t.to, t.rate_per_s);
    }
}

#[test]
fn ground_truth_t_d_prefers_log_normal() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let truth = dir.path().join("truth.csv");
    let o = run(&["simulate", s(&golden("hpbw60_four_state.json")), "--duration-s", "1800", "--seed", "60", "--out", s(&trace), "--truth", s(&truth)]);
    assert!(o.status.success());
    let events = dir.path().join("ev.csv");
    assert!(run(&["analyze", s(&trace), "--out", s(&events)]).status.success());
    let out = dir.path().join("truth.json");
    let o = run(&["fit", s(&truth), s(&dir.path().join("ev.labels.csv")), "--hpbw", "60", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fitted = ModelFile::read(&out).unwrap();
    assert_eq!(fitted.fits.t_d_ms.distribution.family(), blockfade::Family::LogNormal);
}

#[test]
fn validate_self_and_cross_model() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let m7 = golden("hpbw7_four_state.json");
    let m60 = golden("hpbw60_four_state.json");
    assert!(run(&["simulate", s(&m7), "--duration-s", "1800", "--seed", "11", "--out", s(&trace)]).status.success());
    let cdf = dir.path().join("cdf.csv");
    let args = |model: &Path, cdf_out| ValidateArgs {
        model: model.to_path_buf(),
        trace: trace.clone(),
        threshold_db: 3.0,
        zero_cross_db: 0.5,
        cdf_out,
    };
    let mut sink = Vec::new();
    let own = commands::validate(&args(&m7, Some(cdf.clone())), &mut sink).unwrap();
    assert!(own.checks.iter().all(|c| c.nmse >= 0.95), "{own:?}");
    let other = commands::validate(&args(&m60, None), &mut Vec::new()).unwrap();
    let se = |r: &commands::ValidationReport| r.checks.iter().find(|c| c.quantity.starts_with("SE_mean")).unwrap().nmse;
    assert!(se(&other) < se(&own) - 0.1, "{} vs {}", se(&other), se(&own));
    let text = String::from_utf8(sink).unwrap();
    assert!(!text.contains("LOW"));
    let cdf_text = std::fs::read_to_string(&cdf).unwrap();
    assert!(cdf_text.starts_with("quantity,x,empirical_cdf,model_cdf\n"));
    assert_eq!(cdf_text.lines().count(), 1 + 4 * own.n_events);

    let o = run(&["validate", s(&m60), s(&trace)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("LOW"));
}
