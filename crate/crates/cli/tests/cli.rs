use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gender-trends"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config() -> String {
    fixtures().join("config.json").display().to_string()
}

fn ssa() -> String {
    fixtures().join("ssa").display().to_string()
}

#[test]
fn ingest_reports_years_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let ssa = dir.path().join("ssa");
    fs::create_dir(&ssa).unwrap();
    fs::write(ssa.join("yob1940.txt"), "Mary,F,100\nJohn,M,90\nLeslie,F,5\n").unwrap();
    fs::write(ssa.join("yob1941.txt"), "Mary,F,110\n").unwrap();
    let o = run(&["--ssa-dir", ssa.to_str().unwrap(), "ingest-ssa"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("corpus_summary.json")).unwrap()).unwrap();
    assert_eq!(v["first_year"], 1940);
    assert_eq!(v["last_year"], 1941);
    assert_eq!(v["gaps"], serde_json::json!([]));
    assert_eq!(v["total_rows"], 4);
}

#[test]
fn ingest_row_count_matches_line_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--ssa-dir", &ssa(), "ingest-ssa"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: usize = fs::read_dir(fixtures().join("ssa"))
        .unwrap()
        .map(|e| {
            fs::read_to_string(e.unwrap().path())
                .unwrap()
                .lines()
                .filter(|l| !l.trim().is_empty())
                .count()
        })
        .sum();
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("corpus_summary.json")).unwrap()).unwrap();
    assert_eq!(v["total_rows"].as_u64().unwrap() as usize, lines);
    assert_eq!(v["gaps"], serde_json::json!([]));
}

#[test]
fn ingest_of_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = run(&["--ssa-dir", empty.to_str().unwrap(), "ingest-ssa"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn lookup_reports_probability_and_class() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--ssa-dir", &ssa(), "lookup", "Leslie", "1971", "--shift", "30"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("0.2449"), "{s}");
    assert!(s.contains("classification: Male"), "{s}");

    let o = run(&["--ssa-dir", &ssa(), "lookup", "Xqz", "1971"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("Unidentified(non_ssa)"));

    let o = run(&["--ssa-dir", &ssa(), "lookup", "J. Smith", "1990"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("Unidentified(initials_only)"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config(), "lookup", "Leslie", "1971", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lookup_year"], 1941);
    let o = run(
        &["--config", &config(), "--shift", "25", "lookup", "Leslie", "1971", "--json"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lookup_year"], 1946);
}

#[test]
fn overrides_take_precedence_in_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let ov = dir.path().join("ov.csv");
    fs::write(&ov, "full_name,gender,provenance\nLeslie Lamport,F,checked by hand\n").unwrap();
    let o = run(
        &["--ssa-dir", &ssa(), "--overrides", ov.to_str().unwrap(), "lookup", "Leslie Lamport", "1971", "--json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"], "Female");
    assert_eq!(v["basis"], "override");
}

#[test]
fn calibrate_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config(), "calibrate"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert_eq!(v["consensus"], 30);
    let fig2 = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert!(fig2.starts_with("subgroup,shift,differential,coverage\n"));
    assert_eq!(fig2.lines().count(), 1 + 4 * 7);
}

#[test]
fn single_shift_grid_echoes_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config(), "calibrate", "--grid", "35"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert_eq!(v["consensus"], 35);
}

#[test]
fn analyze_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config(), "analyze", "--svg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "observations.csv",
        "observations.json",
        "trends.json",
        "trends.csv",
        "fig34.csv",
        "fig5.csv",
        "rejects.csv",
        "fig34.svg",
        "fig5.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let fig5 = fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    assert!(fig5.starts_with("group,median,a_scaled,quadrant\n"));
    assert_eq!(fig5.lines().count(), 14);
}

#[test]
fn figure_rows_come_from_observations() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config(), "analyze"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut obs = csv::Reader::from_path(dir.path().join("observations.csv")).unwrap();
    let mut fig = csv::Reader::from_path(dir.path().join("fig34.csv")).unwrap();
    let obs: Vec<csv::StringRecord> = obs.records().map(Result::unwrap).collect();
    let fig: Vec<csv::StringRecord> = fig.records().map(Result::unwrap).collect();
    assert_eq!(obs.len(), fig.len());
    for (o, f) in obs.iter().zip(&fig) {
        // group, year, pct_women_all, n_total
        assert_eq!((&o[0], &o[1], &o[6], &o[2]), (&f[0], &f[1], &f[2], &f[3]));
    }
}

#[test]
fn missing_group_year_names_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixtures().join("authorship.csv")).unwrap();
    let kept: String = text
        .lines()
        .filter(|l| !l.starts_with("SIGIR,1990,"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = dir.path().join("gap.csv");
    fs::write(&path, kept).unwrap();
    let o = run(
        &["--config", &config(), "analyze", "--authorship", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("(SIGIR, 1990)"), "{}", stderr(&o));
}

#[test]
fn malformed_rows_go_to_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(fixtures().join("authorship.csv")).unwrap();
    text.push_str("SIGIR,nineteen,a-1,Ann Smith,\nSIGIR,1990,a-2,,\n");
    let path = dir.path().join("bad.csv");
    fs::write(&path, text).unwrap();
    let o = run(
        &["--config", &config(), "analyze", "--authorship", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rejects = fs::read_to_string(dir.path().join("rejects.csv")).unwrap();
    assert_eq!(rejects.lines().count(), 3, "{rejects}");
    assert!(rejects.contains("empty author_full_name"));
}

#[test]
fn oversampling_directive_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let f = fixtures();
    fs::write(
        &cfg,
        serde_json::json!({
            "ssa_dir": f.join("ssa"),
            "authorship_csv": f.join("authorship.csv"),
            "oversample": [{"group_id": "SIGSIM", "year": 1970, "half_window": 1}],
        })
        .to_string(),
    )
    .unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "analyze"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let obs = fs::read_to_string(dir.path().join("observations.csv")).unwrap();
    let scaled: Vec<&str> = obs.lines().filter(|l| l.contains(",true,")).collect();
    assert_eq!(scaled.len(), 1, "{obs}");
    assert!(scaled[0].starts_with("SIGSIM,1970,"));
    assert!(scaled[0].ends_with(",1,1969,1971,54"), "{}", scaled[0]);

    fs::write(
        &cfg,
        serde_json::json!({
            "ssa_dir": f.join("ssa"),
            "authorship_csv": f.join("authorship.csv"),
            "oversample": [{"group_id": "SIGSIM", "year": 1975, "half_window": 1}],
        })
        .to_string(),
    )
    .unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "analyze"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("SIGSIM"));
}

#[test]
fn unknown_config_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"yearshift": 30}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "--ssa-dir", &ssa(), "ingest-ssa"], dir.path());
    assert!(!o.status.success());
}
