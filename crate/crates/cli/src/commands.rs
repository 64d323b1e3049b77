use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use gender_trends::calibration::{calibrate as run_calibration, read_labeled, write_labeled, Subgroup};
use gender_trends::cohort::{
    build_cohorts, observe, read_authorship, windowed_observe, write_authorship, write_observations_csv,
    CohortObservation,
};
use gender_trends::inference::{infer_author, OverrideTable};
use gender_trends::ssa::{lookup_key, Lookup, SsaCorpus};
use gender_trends::synthetic::{
    sig_fixture_tallies, synthesize_subgroup, synthetic_authorship, synthetic_ssa_files, CorpusSpec,
    FIXTURE_COMPOSITE_PCT,
};
use gender_trends::trends::{trend_report, ShareBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::svg;

fn load_corpus(cfg: &RunConfig) -> Result<SsaCorpus> {
    let dir = cfg.require_ssa_dir()?;
    SsaCorpus::load_dir(dir).with_context(|| format!("loading SSA corpus from {}", dir.display()))
}

fn load_overrides(cfg: &RunConfig) -> Result<OverrideTable> {
    match &cfg.overrides_csv {
        Some(p) => OverrideTable::load(p).with_context(|| format!("loading overrides {}", p.display())),
        None => Ok(OverrideTable::new()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct CorpusSummary {
    first_year: i32,
    last_year: i32,
    years_loaded: usize,
    gaps: Vec<i32>,
    total_rows: usize,
    rows_per_year: BTreeMap<i32, usize>,
}

pub fn ingest(cfg: &RunConfig, dump: Option<i32>) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let (first_year, last_year) = corpus.year_range();
    let summary = CorpusSummary {
        first_year,
        last_year,
        years_loaded: corpus.years().count(),
        gaps: corpus.gaps(),
        total_rows: corpus.row_count(),
        rows_per_year: corpus
            .years()
            .filter_map(|y| corpus.table(y).map(|t| (y, t.row_count())))
            .collect(),
    };
    println!(
        "loaded {} years ({first_year}-{last_year}), {} rows, gaps: {}",
        summary.years_loaded,
        summary.total_rows,
        if summary.gaps.is_empty() {
            "none".to_string()
        } else {
            format!("{:?}", summary.gaps)
        }
    );
    let out = output_dir(cfg)?;
    write_json(&out.join("corpus_summary.json"), &summary)?;
    if let Some(year) = dump {
        let table = corpus
            .table(year)
            .with_context(|| format!("year {year} is not loaded"))?;
        println!("{}", serde_json::to_string_pretty(&table.dump())?);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LookupReport {
    name: String,
    publication_year: i32,
    year_shift: i32,
    lookup_year: i32,
    given_name: Option<String>,
    female_count: Option<u64>,
    male_count: Option<u64>,
    p_female: Option<f64>,
    basis: Option<gender_trends::inference::Basis>,
    reliability: Option<gender_trends::ssa::Reliability>,
    classification: String,
}

pub fn lookup(cfg: &RunConfig, name: &str, publication_year: i32, json: bool) -> Result<()> {
    let inference = cfg.inference()?;
    let corpus = load_corpus(cfg)?;
    let overrides = load_overrides(cfg)?;
    let a = infer_author(&corpus, name, publication_year, &inference, &overrides);
    let lookup_year = publication_year - inference.year_shift;
    let counts = a
        .given_name
        .as_deref()
        .and_then(|g| match corpus.lookup(g, lookup_year) {
            Lookup::Found(c) => Some(c),
            _ => None,
        });
    let report = LookupReport {
        name: name.to_string(),
        publication_year,
        year_shift: inference.year_shift,
        lookup_year,
        given_name: a.given_name.clone(),
        female_count: counts.map(|c| c.female),
        male_count: counts.map(|c| c.male),
        p_female: a.estimate.map(|e| e.p_female),
        basis: a.estimate.map(|e| e.basis),
        reliability: corpus.table(lookup_year).map(|_| corpus.reliability(lookup_year)),
        classification: a.classification.outcome.to_string(),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    let key = a.given_name.as_deref().and_then(lookup_key);
    println!("name:           {name}");
    println!("given name:     {}", key.as_deref().unwrap_or("-"));
    println!("lookup year:    {lookup_year} ({publication_year} - {})", inference.year_shift);
    if let (Some(f), Some(m)) = (report.female_count, report.male_count) {
        println!("births:         {f} female, {m} male");
    }
    match report.p_female {
        Some(p) => println!("p(F):           {p:.4}"),
        None => println!("p(F):           -"),
    }
    println!("classification: {}", report.classification);
    Ok(())
}

#[derive(Debug, Serialize)]
struct Fig2Row<'a> {
    subgroup: &'a str,
    shift: i32,
    differential: Option<f64>,
    coverage: f64,
}

pub fn calibrate(cfg: &RunConfig) -> Result<()> {
    cfg.check_inputs()?;
    if cfg.labeled_subgroups.is_empty() {
        bail!("no labeled subgroups given (--labeled or \"labeled_subgroups\" in the config file)");
    }
    let corpus = load_corpus(cfg)?;
    let mut subgroups = Vec::new();
    let mut seen = BTreeSet::new();
    for path in &cfg.labeled_subgroups {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        if !seen.insert(id.clone()) {
            bail!("two labeled files share the subgroup name {id:?}");
        }
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let authors = read_labeled(f).with_context(|| format!("reading {}", path.display()))?;
        subgroups.push(Subgroup { id, authors });
    }
    let report = run_calibration(&corpus, &subgroups, &cfg.grid())?;

    for c in &report.curves {
        match (c.argmin, &c.error) {
            (Some(a), _) => println!("{:<24} n={:<6} argmin {a}", c.subgroup, c.size),
            (None, Some(e)) => println!("{:<24} n={:<6} failed: {e}", c.subgroup, c.size),
            (None, None) => println!("{:<24} n={:<6} no argmin", c.subgroup, c.size),
        }
    }
    println!("consensus year shift: {}", report.consensus);
    if !report.dissenting.is_empty() {
        println!("dissenting subgroups: {}", report.dissenting.join(", "));
    }

    let out = output_dir(cfg)?;
    write_json(&out.join("calibration.json"), &report)?;
    write_csv(
        &out.join("fig2.csv"),
        report.curves.iter().flat_map(|c| {
            c.points.iter().map(|p| Fig2Row {
                subgroup: &c.subgroup,
                shift: p.shift,
                differential: p.differential,
                coverage: p.coverage,
            })
        }),
    )
}

#[derive(Debug, Serialize)]
struct Fig34Row<'a> {
    group: &'a str,
    year: i32,
    pct_women: Option<f64>,
    n_total: usize,
}

#[derive(Debug, Serialize)]
struct Fig5Row<'a> {
    group: &'a str,
    median: f64,
    a_scaled: f64,
    quadrant: &'a str,
}

pub fn analyze(cfg: &RunConfig) -> Result<()> {
    cfg.check_inputs()?;
    let inference = cfg.inference()?;
    let opts = cfg.trend_options();
    let path = cfg
        .authorship_csv
        .as_deref()
        .context("no authorship CSV given (--authorship or \"authorship_csv\" in the config file)")?;
    let corpus = load_corpus(cfg)?;
    let overrides = load_overrides(cfg)?;
    let study = cfg.study_years.map(|(a, b)| a..=b);
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (records, mut rejects) = read_authorship(f, study).with_context(|| format!("reading {}", path.display()))?;
    let set = build_cohorts(&records);
    rejects.extend(set.rejects);

    let out = output_dir(cfg)?;
    if rejects.is_empty() {
        fs::write(out.join("rejects.csv"), "line,reason,raw\n")?;
    } else {
        write_csv(&out.join("rejects.csv"), &rejects)?;
    }
    if !rejects.is_empty() {
        log::warn!("{} authorship rows rejected; see rejects.csv", rejects.len());
    }

    let mut windows: BTreeMap<(&str, i32), u32> = BTreeMap::new();
    for d in &cfg.oversample {
        if !set.cohorts.iter().any(|c| c.group_id == d.group_id && c.year == d.year) {
            bail!("oversampling directive names ({}, {}), which has no records", d.group_id, d.year);
        }
        windows.insert((&d.group_id, d.year), d.half_window);
    }
    let mut observations: Vec<CohortObservation> = Vec::with_capacity(set.cohorts.len());
    for c in &set.cohorts {
        let o = match windows.get(&(c.group_id.as_str(), c.year)) {
            Some(&h) => windowed_observe(&records, &c.group_id, c.year, h, &corpus, &inference, &overrides)?,
            None => observe(c, &corpus, &inference, &overrides)?,
        };
        observations.push(o);
    }

    let obs_csv = create(&out.join("observations.csv"))?;
    write_observations_csv(obs_csv, &observations)?;
    write_json(&out.join("observations.json"), &observations)?;

    let report = trend_report(&observations, &opts)?;
    write_json(&out.join("trends.json"), &report)?;
    gender_trends::trends::write_trends_csv(create(&out.join("trends.csv"))?, &report)?;

    let fig34: Vec<Fig34Row> = observations
        .iter()
        .map(|o| Fig34Row {
            group: &o.group_id,
            year: o.year,
            pct_women: match opts.basis {
                ShareBasis::All => Some(o.pct_women_all),
                ShareBasis::Identified => o.pct_women_identified,
            },
            n_total: o.n_total,
        })
        .collect();
    write_csv(&out.join("fig34.csv"), &fig34)?;
    write_csv(
        &out.join("fig5.csv"),
        report.groups.iter().map(|g| Fig5Row {
            group: &g.group_id,
            median: g.median,
            a_scaled: g.a_scaled,
            quadrant: g.quadrant.as_str(),
        }),
    )?;
    if cfg.svg.unwrap_or(false) {
        fs::write(out.join("fig34.svg"), svg::bubble_chart(&observations, opts.basis))?;
        fs::write(out.join("fig5.svg"), svg::quadrant_chart(&report))?;
    }

    let c = &report.composite;
    println!(
        "{} cohorts in {} groups; composite median {:.2}% (weighted), a = {:.4} ({:.0} scaled), {:?}, r2 = {:.3}",
        observations.len(),
        report.groups.len(),
        c.median_weighted,
        c.a,
        c.a_scaled,
        c.shape,
        c.r2
    );
    println!("outputs written to {}", out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Destination directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// First and last birth year of the generated corpus
    #[arg(long, num_args = 2, value_names = ["FIRST", "LAST"], default_values_t = [1930, 1980])]
    ssa_years: Vec<i32>,
    #[arg(long, default_value_t = 1941)]
    seed: u64,
    /// True birth-year offsets, one labeled subgroup per value
    #[arg(long, value_delimiter = ',', default_values_t = [30, 30, 30, 30], allow_negative_numbers = true)]
    offsets: Vec<i32>,
    /// Authors per labeled subgroup
    #[arg(long, default_value_t = 500)]
    subgroup_size: usize,
    /// Authors per analyzed year in the authorship fixture
    #[arg(long, default_value_t = 1000)]
    authors_per_year: usize,
}

/// Writes `ssa/`, `labeled/`, `authorship.csv` and `config.json` under
/// `--out`. The corpus is always generated over its full default span so
/// that filtering years does not change the counts of the years kept.
pub fn synth(args: &SynthArgs) -> Result<()> {
    let (first, last) = (args.ssa_years[0], args.ssa_years[1]);
    if first > last {
        bail!("--ssa-years {first} {last}: first year after last");
    }
    let spec = CorpusSpec {
        seed: args.seed,
        ..CorpusSpec::default()
    };
    if first < spec.first_year || last > spec.last_year {
        bail!(
            "--ssa-years must lie within {}-{}",
            spec.first_year,
            spec.last_year
        );
    }
    let files = synthetic_ssa_files(&spec);
    let ssa = args.out.join("ssa");
    fs::create_dir_all(&ssa)?;
    for (year, text) in files.iter().filter(|(y, _)| (first..=last).contains(y)) {
        fs::write(ssa.join(format!("yob{year}.txt")), text)?;
    }

    let corpus = gender_trends::ssa::load_corpus(files.iter().map(|(y, t)| (*y, t.as_str())))?;
    let labeled = args.out.join("labeled");
    fs::create_dir_all(&labeled)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut labeled_paths = Vec::new();
    for (i, &offset) in args.offsets.iter().enumerate() {
        let authors = synthesize_subgroup(&corpus, args.subgroup_size, offset, 1980..=2000, &mut rng)?;
        let name = format!("subgroup_{}.csv", (b'a' + i as u8) as char);
        write_labeled(create(&labeled.join(&name))?, &authors)?;
        labeled_paths.push(PathBuf::from("labeled").join(name));
    }

    let tallies = sig_fixture_tallies(args.authors_per_year, FIXTURE_COMPOSITE_PCT);
    let records = synthetic_authorship(&tallies, args.seed);
    write_authorship(create(&args.out.join("authorship.csv"))?, &records)?;

    let config = serde_json::json!({
        "ssa_dir": "ssa",
        "authorship_csv": "authorship.csv",
        "labeled_subgroups": labeled_paths,
        "year_shift": 30,
        "mode": "threshold",
    });
    write_json(&args.out.join("config.json"), &config)?;
    println!(
        "wrote {} SSA years, {} labeled subgroups and {} authorship rows to {}",
        last - first + 1,
        args.offsets.len(),
        records.len(),
        args.out.display()
    );
    Ok(())
}
