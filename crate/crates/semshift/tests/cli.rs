//! End-to-end tests that drive the compiled binary against the committed
//! corpus fixture. Numeric outputs are compared byte-for-byte against the
//! goldens under `tests/fixtures/golden/`; regenerate both as described in
//! `tests/fixture_gen.rs` if the fixture is ever rebuilt.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn corpus(rel: &str) -> String {
    fixture("corpus").join(rel).display().to_string()
}

/// Runs the binary with the fixture corpus preconfigured and `--out` set to
/// `out`. Extra arguments come after the shared ones so they can override.
fn run(out: &Path, args: &[&str]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_semshift"));
    command
        .env_remove("SEMSHIFT_DATA")
        .args([
            "--embeddings-dir",
            &corpus("embeddings"),
            "--pos",
            &corpus("pos.txt"),
            "--freq",
            &corpus("freq.txt"),
            "--lexicon",
            &corpus("lexicon.csv"),
            "--t1",
            "1890",
            "--t2",
            "1990",
            "--deterministic",
            "--out",
        ])
        .arg(out)
        .args(args);
    command.output().expect("binary runs")
}

fn assert_ok(output: &Output) {
    assert!(
        output.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn assert_fails_with(output: &Output, needle: &str) {
    assert!(!output.status.success(), "expected failure");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains(needle),
        "stderr {stderr:?} does not mention {needle:?}"
    );
}

fn assert_matches_golden(out: &Path, golden: &str) {
    let golden_dir = fixture("golden").join(golden);
    for entry in fs::read_dir(&golden_dir).unwrap() {
        let golden_path = entry.unwrap().path();
        let name = golden_path.file_name().unwrap();
        let produced = fs::read(out.join(name)).unwrap_or_else(|_| {
            panic!("missing output file {:?}", out.join(name));
        });
        let expected = fs::read(&golden_path).unwrap();
        assert_eq!(
            produced,
            expected,
            "{} diverges from golden {}",
            out.join(name).display(),
            golden_path.display()
        );
    }
}

fn read_csv_column(path: &Path, index: usize) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(index).unwrap().to_string())
        .collect()
}

#[test]
fn rate_whole_lexicon_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(dir.path(), &["rate", "--k", "5"]));
    assert_matches_golden(dir.path(), "rate_lexicon_k5");
}

#[test]
fn rate_category_bounded_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(dir.path(), &["rate", "--k", "2", "--mode", "category"]));
    assert_matches_golden(dir.path(), "rate_category_k2");
}

#[test]
fn proto_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(dir.path(), &["proto", "--k", "5"]));
    assert_matches_golden(dir.path(), "proto_1890");
}

#[test]
fn sweep_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(dir.path(), &["sweep", "--ks", "2,3"]));
    assert_matches_golden(dir.path(), "sweep_k23");
}

#[test]
fn equal_decades_rate_zero_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args([
            "--embeddings-dir",
            &corpus("embeddings"),
            "--pos",
            &corpus("pos.txt"),
            "--freq",
            &corpus("freq.txt"),
            "--lexicon",
            &corpus("lexicon.csv"),
            "--t1",
            "1890",
            "--t2",
            "1890",
            "--k",
            "5",
            "--out",
        ])
        .arg(dir.path())
        .arg("rate")
        .output()
        .unwrap();
    assert_ok(&output);
    // ghost survives a single-decade intersection, so 13 rows, not 12.
    let rates = read_csv_column(&dir.path().join("rates.csv"), 5);
    assert_eq!(rates.len(), 13);
    assert!(rates.iter().all(|r| r == "0"), "rates: {rates:?}");
}

#[test]
fn reversed_decades_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args([
            "--embeddings-dir",
            &corpus("embeddings"),
            "--pos",
            &corpus("pos.txt"),
            "--freq",
            &corpus("freq.txt"),
            "--lexicon",
            &corpus("lexicon.csv"),
            "--t1",
            "1990",
            "--t2",
            "1890",
            "--out",
        ])
        .arg(dir.path().join("results"))
        .arg("rate")
        .output()
        .unwrap();
    assert_fails_with(&output, "1990");
    assert!(!dir.path().join("results").exists());
}

#[test]
fn fixed_formula_rejects_predictor_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &["regress", "--formula", "eq4", "--predictors", "proto_emp"],
    );
    assert_fails_with(&output, "fixed predictor set");
}

#[test]
fn c3_requires_its_decades_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &[
            "regress",
            "--formula",
            "c3",
            "--covariates",
            &corpus("covariates"),
        ],
    );
    assert_fails_with(&output, "--force");

    let output = run(
        dir.path(),
        &[
            "regress",
            "--formula",
            "c3",
            "--covariates",
            &corpus("covariates"),
            "--force",
            "--k",
            "5",
        ],
    );
    assert_ok(&output);
    let names = read_csv_column(&dir.path().join("regression.csv"), 0);
    assert_eq!(
        names,
        ["intercept", "proto_emp", "log10(freq)", "poly", "valence", "depth", "aoa"]
    );
}

#[test]
fn c2_regression_emits_all_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &[
            "regress",
            "--formula",
            "c2",
            "--covariates",
            &corpus("covariates"),
            "--k",
            "5",
        ],
    );
    assert_ok(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("rate ~ proto_est + log10(freq) + poly + valence + depth + aoa"));
    assert!(stdout.contains("n = 12 (0 rows dropped"));
    let names = read_csv_column(&dir.path().join("regression.csv"), 0);
    assert_eq!(names.len(), 7);
    let cooks = read_csv_column(&dir.path().join("influence.csv"), 3);
    assert_eq!(cooks.len(), 12);
    for value in cooks {
        assert!(value.parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn missing_covariates_name_the_flag_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["regress", "--formula", "c2", "--k", "5"]);
    assert_fails_with(&output, "--covariates");
    assert_fails_with(&output, "sense_dates.tsv");
}

#[test]
fn custom_formula_runs_arbitrary_columns() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &[
            "regress",
            "--formula",
            "custom",
            "--predictors",
            "valence,log10(freq)",
            "--k",
            "5",
        ],
    );
    assert_ok(&output);
    let names = read_csv_column(&dir.path().join("regression.csv"), 0);
    assert_eq!(names, ["intercept", "valence", "log10(freq)"]);
}

#[test]
fn project_writes_coordinates_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["project", "--tokens", "joy,grief,turkey"]);
    assert_ok(&output);
    let tokens = read_csv_column(&dir.path().join("pca.csv"), 0);
    assert_eq!(tokens, ["joy", "joy", "grief", "grief", "turkey", "turkey"]);
    let svg = fs::read_to_string(dir.path().join("projection.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "deterministic SVG has no comment");
    assert!(svg.contains("1890"));
    assert!(svg.contains("1990"));
}

#[test]
fn project_rejects_tokens_missing_from_a_decade() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(dir.path(), &["project", "--tokens", "ghost"]);
    assert_fails_with(&output, "ghost");
    assert_fails_with(&output, "1990");
}

#[test]
fn density_accepts_explicit_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        dir.path(),
        &["density", "--k", "5", "--bandwidth", "0.25"],
    );
    assert_ok(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("bandwidth=0.250000"));
    let groups = read_csv_column(&dir.path().join("density.csv"), 0);
    assert!(groups.contains(&"emotion".to_string()));
    assert!(groups.contains(&"bird".to_string()));
}

#[test]
fn report_is_deterministic_and_verifiable() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let args = [
        "report",
        "--formula",
        "c2",
        "--covariates",
        &corpus("covariates"),
        "--k",
        "5",
    ];
    assert_ok(&run(first.path(), &args));
    assert_ok(&run(second.path(), &args));

    let mut names: Vec<String> = fs::read_dir(first.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "band.csv",
            "coefficients.svg",
            "density.csv",
            "density.svg",
            "exclusions.csv",
            "influence.csv",
            "lexicon_normalized.csv",
            "manifest.txt",
            "proto.csv",
            "rate_vs_predictor.svg",
            "rates.csv",
            "regression.csv",
            "summary.txt",
        ]
    );
    for name in &names {
        let a = fs::read(first.path().join(name)).unwrap();
        let b = fs::read(second.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let verify = run(
        first.path(),
        &[
            "report",
            "--formula",
            "c2",
            "--covariates",
            &corpus("covariates"),
            "--k",
            "5",
            "--verify",
        ],
    );
    assert_ok(&verify);
    assert!(String::from_utf8_lossy(&verify.stdout).contains("manifest ok"));
}

#[test]
fn verify_detects_input_drift() {
    let out = tempfile::tempdir().unwrap();
    let altered = tempfile::tempdir().unwrap();
    for name in ["pos.txt", "freq.txt", "lexicon.csv"] {
        fs::copy(fixture("corpus").join(name), altered.path().join(name)).unwrap();
    }
    let embeddings = altered.path().join("embeddings");
    fs::create_dir(&embeddings).unwrap();
    for name in ["1890.txt", "1990.txt"] {
        fs::copy(
            fixture("corpus").join("embeddings").join(name),
            embeddings.join(name),
        )
        .unwrap();
    }

    let base: Vec<String> = vec![
        "--embeddings-dir".into(),
        embeddings.display().to_string(),
        "--pos".into(),
        altered.path().join("pos.txt").display().to_string(),
        "--freq".into(),
        altered.path().join("freq.txt").display().to_string(),
        "--lexicon".into(),
        altered.path().join("lexicon.csv").display().to_string(),
        "--t1".into(),
        "1890".into(),
        "--t2".into(),
        "1990".into(),
        "--k".into(),
        "5".into(),
        "--deterministic".into(),
        "--out".into(),
        out.path().display().to_string(),
    ];
    let report = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args(&base)
        .arg("report")
        .output()
        .unwrap();
    assert_ok(&report);

    // Appending a frequency row changes the checksum but stays loadable.
    let freq_path = altered.path().join("freq.txt");
    let mut text = fs::read_to_string(&freq_path).unwrap();
    text.push_str("zzz\t1890\t0.001\n");
    fs::write(&freq_path, text).unwrap();

    let verify = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args(&base)
        .args(["report", "--verify"])
        .output()
        .unwrap();
    assert!(!verify.status.success());
    let stdout = String::from_utf8_lossy(&verify.stdout);
    assert!(stdout.contains("MISMATCH input.freq.sha256"), "{stdout}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.conf");
    fs::write(
        &config_path,
        format!(
            "# fixture run\n\
             embeddings-dir = {}\n\
             pos = {}\n\
             freq = {}\n\
             lexicon = {}\n\
             t1 = 1890\n\
             t2 = 1990\n\
             k = 2\n\
             deterministic = true\n",
            corpus("embeddings"),
            corpus("pos.txt"),
            corpus("freq.txt"),
            corpus("lexicon.csv"),
        ),
    )
    .unwrap();

    let out = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args(["--config", &config_path.display().to_string(), "--out"])
        .arg(out.path())
        .args(["--k", "5", "rate"])
        .output()
        .unwrap();
    assert_ok(&output);
    assert_matches_golden(out.path(), "rate_lexicon_k5");

    // Without the override the file's k=2 applies.
    let out2 = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args(["--config", &config_path.display().to_string(), "--out"])
        .arg(out2.path())
        .arg("rate")
        .output()
        .unwrap();
    assert_ok(&output);
    let ks = read_csv_column(&out2.path().join("rates.csv"), 3);
    assert!(ks.iter().all(|k| k == "2"), "ks: {ks:?}");
}

#[test]
fn data_root_env_var_fills_in_conventional_paths() {
    let root = tempfile::tempdir().unwrap();
    let embeddings = root.path().join("embeddings");
    fs::create_dir(&embeddings).unwrap();
    for name in ["1890.txt", "1990.txt"] {
        fs::copy(
            fixture("corpus").join("embeddings").join(name),
            embeddings.join(name),
        )
        .unwrap();
    }
    fs::copy(fixture("corpus").join("pos.txt"), root.path().join("pos.txt")).unwrap();
    fs::copy(fixture("corpus").join("freq.txt"), root.path().join("freq.txt")).unwrap();
    fs::copy(
        fixture("corpus").join("lexicon.csv"),
        root.path().join("lexicon.csv"),
    )
    .unwrap();

    let out = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env("SEMSHIFT_DATA", root.path())
        .args([
            "--t1", "1890", "--t2", "1990", "--k", "5", "--deterministic", "--out",
        ])
        .arg(out.path())
        .arg("rate")
        .output()
        .unwrap();
    assert_ok(&output);
    assert_matches_golden(out.path(), "rate_lexicon_k5");
}

#[test]
fn missing_input_reports_flag_and_leaves_no_output() {
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("results");
    let output = Command::new(env!("CARGO_BIN_EXE_semshift"))
        .env_remove("SEMSHIFT_DATA")
        .args([
            "--embeddings-dir",
            &corpus("embeddings"),
            "--pos",
            "/nonexistent/pos.txt",
            "--freq",
            &corpus("freq.txt"),
            "--lexicon",
            &corpus("lexicon.csv"),
            "--t1",
            "1890",
            "--t2",
            "1990",
            "--out",
        ])
        .arg(&target)
        .arg("rate")
        .output()
        .unwrap();
    assert_fails_with(&output, "--pos");
    assert!(!target.exists(), "failed run must not create the out dir");
}

#[test]
fn neighbors_dump_lists_ranked_neighbors_for_both_decades() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run(dir.path(), &["rate", "--k", "5", "--dump-neighbors"]));
    let text = fs::read_to_string(dir.path().join("neighbors.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "token,decade,rank,neighbor,similarity"
    );
    // 12 tokens, two decades, five ranked neighbors each.
    assert_eq!(text.lines().count() - 1, 12 * 2 * 5);
    let decades: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert!(decades.contains(&"1890"));
    assert!(decades.contains(&"1990"));
}
