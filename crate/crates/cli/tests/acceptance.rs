//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gender_trends::calibration::{calibrate, Subgroup, DEFAULT_GRID};
use gender_trends::cohort::{
    apportion, build_cohorts, observe, read_authorship, windowed_observe, write_observations_csv,
    AuthorshipRecord, CohortObservation,
};
use gender_trends::inference::{CountingMode, InferenceConfig, OverrideTable};
use gender_trends::ssa::SsaCorpus;
use gender_trends::synthetic::{
    synthesize_subgroup, synthetic_authorship, synthetic_corpus, CohortTally, CorpusSpec,
};
use gender_trends::trends::{
    classify_shape, composite, composite_without, fit_quadratic, median_share, Series, Shape, TrendOptions,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {got}, expected {want} ± {tol}"))
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gender-trends"))
}

fn leslie_anchor() -> Outcome {
    let out = bin()
        .arg("--ssa-dir")
        .arg(fixtures().join("ssa"))
        .args(["lookup", "Leslie", "1971", "--shift", "30", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let p = v["p_female"].as_f64().ok_or("no p_female in output")?;
    close("p(F)", p, 505.0 / 2062.0, 1e-4)?;
    close("p(F)", p, 0.2449, 1e-4)?;
    if v["lookup_year"] != 1941 || v["female_count"] != 505 || v["male_count"] != 1557 {
        return Err(format!("unexpected lookup record: {v}"));
    }
    if v["classification"] != "Male" {
        return Err(format!("class {}, expected Male", v["classification"]));
    }
    Ok(format!("p(F) = {p:.4}, Male"))
}

fn pinv_quadratic(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let v = DMatrix::from_fn(xs.len(), 3, |r, c| xs[r].powi(2 - c as i32));
    let coef = v.pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(ys);
    (coef[0], coef[1], coef[2])
}

fn composite_anchor() -> Outcome {
    let pts = [(0.0, 3.6), (1.0, 12.4), (2.0, 15.1), (3.0, 17.3)];
    let series = Series::from_xy("composite", &pts).map_err(|e| e.to_string())?;
    let fit = fit_quadratic(&series).map_err(|e| e.to_string())?;
    let (a, b, c) = pinv_quadratic(&[0.0, 1.0, 2.0, 3.0], &[3.6, 12.4, 15.1, 17.3]);
    close("a vs oracle", fit.a, a, 1e-9)?;
    close("b vs oracle", fit.b, b, 1e-9)?;
    close("c vs oracle", fit.c, c, 1e-9)?;
    close("a", fit.a, -1.65, 0.01)?;
    close("a scaled", fit.a * 100.0, -165.0, 1.0)?;
    close("r2", fit.r2, 0.986, 0.005)?;
    let shape = classify_shape(&fit, 0.0);
    if shape != Shape::Concave {
        return Err(format!("shape {shape:?}, expected Concave"));
    }
    let med = median_share(&series).map_err(|e| e.to_string())?;
    close("median", med, 13.75, 0.01)?;

    Ok(format!(
        "a = {:.4} ({:.1} scaled), r2 = {:.4}, Concave, median {med}",
        fit.a,
        fit.a * 100.0,
        fit.r2
    ))
}

fn calibration_recovery() -> Outcome {
    let corpus = synthetic_corpus(&CorpusSpec::default());
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let groups: Vec<Subgroup> = (0..4)
            .map(|i| Subgroup {
                id: format!("s{i}"),
                authors: synthesize_subgroup(&corpus, 500, 30, 1960..=2000, &mut rng).unwrap(),
            })
            .collect();
        let report = calibrate(&corpus, &groups, &DEFAULT_GRID).map_err(|e| e.to_string())?;
        if report.consensus == 30 {
            hits += 1;
        } else {
            misses.push(format!("seed {seed} → {}", report.consensus));
        }
    }
    if hits >= 19 {
        Ok(format!("consensus 30 in {hits}/20 runs"))
    } else {
        Err(format!("consensus 30 in only {hits}/20 runs ({})", misses.join(", ")))
    }
}

fn fit_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs = [0.0, 1.0, 2.0, 3.0];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let ys: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..60.0)).collect();
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let fit = fit_quadratic(&Series::from_xy("r", &pts).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let (a, b, c) = pinv_quadratic(&xs, &ys);
        let err = (fit.a - a).abs().max((fit.b - b).abs()).max((fit.c - c).abs());
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("series {i}: coefficient error {err:e}"));
        }
        if fit.r2 < fit.r2_linear {
            return Err(format!("series {i}: r2 {} < r2_linear {}", fit.r2, fit.r2_linear));
        }
    }
    Ok(format!("100 series, worst coefficient error {worst:.1e}"))
}

fn observations_bytes(records: &[AuthorshipRecord], corpus: &SsaCorpus) -> Result<Vec<u8>, String> {
    let cfg = InferenceConfig::default();
    let overrides = OverrideTable::new();
    let obs: Vec<CohortObservation> = build_cohorts(records)
        .cohorts
        .iter()
        .map(|c| observe(c, corpus, &cfg, &overrides))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_observations_csv(&mut buf, &obs).map_err(|e| e.to_string())?;
    buf.extend(serde_json::to_vec(&obs).map_err(|e| e.to_string())?);
    Ok(buf)
}

fn dedup_idempotence() -> Outcome {
    let corpus = SsaCorpus::load_dir(fixtures().join("ssa")).map_err(|e| e.to_string())?;
    let f = fs::File::open(fixtures().join("authorship.csv")).map_err(|e| e.to_string())?;
    let (records, rejects) = read_authorship(f, None).map_err(|e| e.to_string())?;
    if !rejects.is_empty() {
        return Err(format!("{} fixture rows rejected", rejects.len()));
    }
    let doubled: Vec<AuthorshipRecord> = records.iter().chain(records.iter()).cloned().collect();
    let once = observations_bytes(&records, &corpus)?;
    let twice = observations_bytes(&doubled, &corpus)?;
    if once != twice {
        return Err("observations differ after duplicating every row".into());
    }
    Ok(format!("{} rows doubled, {} bytes identical", records.len(), once.len()))
}

fn oversampling_contract() -> Outcome {
    let corpus = synthetic_corpus(&CorpusSpec::default());
    let tally = |female, male, non_ssa| CohortTally {
        female,
        male,
        non_ssa,
        initials_only: 0,
    };
    // Window 1969-1971 pools 50 F / 140 M / 10 unidentified = 25/70/5 %;
    // the target year alone (15/20/5) would give a different split.
    let tallies: BTreeMap<(String, i32), CohortTally> = [
        (("G".to_string(), 1969), tally(17, 60, 3)),
        (("G".to_string(), 1970), tally(15, 20, 5)),
        (("G".to_string(), 1971), tally(18, 60, 2)),
    ]
    .into_iter()
    .collect();
    let records = synthetic_authorship(&tallies, 6);
    let cfg = InferenceConfig::default();
    let o = windowed_observe(&records, "G", 1970, 1, &corpus, &cfg, &OverrideTable::new())
        .map_err(|e| e.to_string())?;
    let got = (o.n_female, o.n_male, o.n_unidentified);
    if got != (10.0, 28.0, 2.0) || o.n_total != 40 {
        return Err(format!("counts {got:?} of {}, expected (10, 28, 2) of 40", o.n_total));
    }
    let s = o.scaled.ok_or("no scaling metadata")?;
    if s.pooled_n != 200 || (s.window_start, s.window_end) != (1969, 1971) {
        return Err(format!("unexpected scaling metadata {s:?}"));
    }
    if apportion(40, &[25.0, 70.0, 5.0]) != vec![10, 28, 2] {
        return Err("apportion(40, 25/70/5) is not (10, 28, 2)".into());
    }
    let ev = InferenceConfig {
        mode: CountingMode::ExpectedValue,
        ..cfg
    };
    let e = windowed_observe(&records, "G", 1970, 1, &corpus, &ev, &OverrideTable::new())
        .map_err(|e| e.to_string())?;
    close("expected-value total", e.n_female + e.n_male + e.n_unidentified, 40.0, 1e-9)?;
    Ok("(10, 28, 2) of 40 from a 200-author window".into())
}

fn obs(group: &str, year: i32, n: usize, pct: f64) -> CohortObservation {
    let f = n as f64 * pct / 100.0;
    CohortObservation {
        group_id: group.to_string(),
        year,
        n_total: n,
        n_female: f,
        n_male: n as f64 - f,
        n_unidentified: 0.0,
        pct_women_all: pct,
        pct_women_identified: Some(pct),
        pct_non_ssa: 0.0,
        scaled: None,
    }
}

/// Twelve groups averaging exactly 11.8 when weighted by authors, plus one
/// small group with median 40.5. Group sizes come from apportioning the
/// 7456-author population.
fn leave_one_out() -> Outcome {
    const TOTAL: usize = 7456;
    const OUTLIER: usize = 520;
    let years = [1970, 1980, 1990, 2000];
    let year_split = [0.05, 0.25, 0.33, 0.37];
    let outlier_shares = [0.5, 35.9, 45.9, 45.1];
    let base = [
        [3.0, 10.0, 12.0, 13.0],
        [2.0, 9.0, 11.0, 12.0],
        [2.0, 4.0, 9.0, 16.0],
        [3.0, 11.0, 12.0, 13.0],
        [6.0, 18.0, 21.0, 24.0],
        [2.0, 12.0, 12.0, 13.0],
        [3.0, 10.0, 12.0, 14.0],
        [5.0, 15.0, 18.0, 19.0],
        [3.0, 5.0, 9.0, 17.0],
        [2.0, 10.0, 11.0, 12.0],
        [3.0, 9.0, 10.0, 11.0],
        [2.0, 4.0, 8.0, 15.0],
    ];
    let sizes = apportion(
        TOTAL - OUTLIER,
        &[70.0, 110.0, 90.0, 190.0, 160.0, 90.0, 220.0, 80.0, 60.0, 160.0, 230.0, 60.0],
    );
    let med = |s: &[f64; 4]| {
        let mut v = *s;
        v.sort_by(f64::total_cmp);
        (v[1] + v[2]) / 2.0
    };
    let raw: f64 = base.iter().zip(&sizes).map(|(s, &n)| med(s) * n as f64).sum::<f64>()
        / (TOTAL - OUTLIER) as f64;
    let shift = 11.8 - raw;

    let mut all = Vec::new();
    let mut push = |name: &str, n: usize, shares: [f64; 4]| {
        let per_year = apportion(n, &year_split);
        for i in 0..4 {
            all.push(obs(name, years[i], per_year[i], shares[i]));
        }
    };
    for (i, (s, &n)) in base.iter().zip(&sizes).enumerate() {
        push(&format!("G{i:02}"), n, s.map(|v| v + shift));
    }
    push("OUTLIER", OUTLIER, outlier_shares);

    let opts = TrendOptions::default();
    let full = composite(&all, &opts).map_err(|e| e.to_string())?;
    let without = composite_without(&all, "OUTLIER", &opts).map_err(|e| e.to_string())?;
    let want_full = (11.8 * (TOTAL - OUTLIER) as f64 + 40.5 * OUTLIER as f64) / TOTAL as f64;
    close("weighted median with outlier", full.median_weighted, want_full, 1e-9)?;
    close("weighted median with outlier", full.median_weighted, 13.8, 0.05)?;
    close("weighted median without outlier", without.median_weighted, 11.8, 0.2)?;
    Ok(format!(
        "{:.2} → {:.2} after dropping the 40.5-median group",
        full.median_weighted, without.median_weighted
    ))
}

fn run_analyze(out: &Path) -> Result<(), String> {
    let o = bin()
        .arg("--config")
        .arg(fixtures().join("config.json"))
        .arg("--output-dir")
        .arg(out)
        .args(["analyze", "--svg"])
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&o.stderr).into_owned())
    }
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_analyze(a.path())?;
    run_analyze(b.path())?;
    let mut names: Vec<_> = fs::read_dir(a.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for n in &names {
        let x = fs::read(a.path().join(n)).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join(n)).map_err(|e| format!("{n:?} missing in second run: {e}"))?;
        if x != y {
            return Err(format!("{n:?} differs between runs"));
        }
    }
    // The bundled fixture is built to reproduce the composite anchor.
    let trends: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("trends.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let scaled = trends["composite"]["a_scaled"].as_f64().ok_or("no composite a_scaled")?;
    close("fixture composite a_scaled", scaled, -165.0, 1.0)?;
    Ok(format!(
        "{} output files byte-identical; composite a_scaled {scaled:.2}",
        names.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 Leslie anchor", leslie_anchor, Some(Duration::from_secs(1))),
        ("2 composite fit anchor", composite_anchor, Some(Duration::from_secs(1))),
        ("3 calibration recovery", calibration_recovery, Some(Duration::from_secs(10))),
        ("4 quadratic fit oracle", fit_oracle, Some(Duration::from_secs(1))),
        ("5 dedup idempotence", dedup_idempotence, Some(Duration::from_secs(1))),
        ("6 oversampling contract", oversampling_contract, Some(Duration::from_secs(1))),
        ("7 composite leave-one-out", leave_one_out, Some(Duration::from_secs(1))),
        ("8 determinism", determinism, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("[PASS] {name}: {detail} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({took:.2?})");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
