//! Author populations per (group, year) and their gender composition.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    extract_given_name, infer_author, normalize_full_name, CountingMode, InferenceConfig, Outcome,
    OverrideTable, UnidentifiedReason,
};
use crate::ssa::SsaCorpus;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorshipRecord {
    pub group_id: String,
    pub year: i32,
    pub article_id: String,
    pub author_full_name: String,
    #[serde(default, deserialize_with = "blank_as_none")]
    pub author_stable_id: Option<String>,
}

fn blank_as_none<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    Ok(s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based line in the source file; 0 for in-memory records.
    pub line: usize,
    pub reason: String,
    pub raw: String,
}

impl AuthorshipRecord {
    fn problem(&self, study: Option<&RangeInclusive<i32>>) -> Option<String> {
        if self.group_id.trim().is_empty() {
            return Some("empty group_id".into());
        }
        if self.article_id.trim().is_empty() {
            return Some("empty article_id".into());
        }
        if self.author_full_name.trim().is_empty() {
            return Some("empty author_full_name".into());
        }
        if let Some(r) = study {
            if !r.contains(&self.year) {
                return Some(format!(
                    "year {} outside study range {}-{}",
                    self.year,
                    r.start(),
                    r.end()
                ));
            }
        }
        None
    }

    /// Stable id when present, else the normalized full name.
    pub fn member_key(&self) -> String {
        match &self.author_stable_id {
            Some(id) => format!("id:{id}"),
            None => format!("name:{}", normalize_full_name(&self.author_full_name)),
        }
    }
}

/// Reads the authorship CSV (`group_id,year,article_id,author_full_name,
/// author_stable_id`). Rows that fail to parse or validate go to the
/// reject list instead of aborting the load.
pub fn read_authorship<R: Read>(
    reader: R,
    study: Option<RangeInclusive<i32>>,
) -> Result<(Vec<AuthorshipRecord>, Vec<Reject>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let raw = row.iter().collect::<Vec<_>>().join(",");
        match row.deserialize::<AuthorshipRecord>(Some(&headers)) {
            Ok(rec) => match rec.problem(study.as_ref()) {
                None => records.push(rec),
                Some(reason) => rejects.push(Reject { line, reason, raw }),
            },
            Err(e) => rejects.push(Reject {
                line,
                reason: e.to_string(),
                raw,
            }),
        }
    }
    Ok((records, rejects))
}

pub fn write_authorship<W: std::io::Write>(writer: W, records: &[AuthorshipRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Member {
    pub full_name: String,
    /// Publication year used for this member's corpus lookup.
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohort {
    pub group_id: String,
    pub year: i32,
    pub members: BTreeMap<String, Member>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Ranks spellings of the same person so the choice does not depend on
/// record order: a usable given name first, then the longer form.
fn better_name(candidate: &str, current: &str) -> bool {
    let rank = |n: &str| (extract_given_name(n).is_some(), n.chars().count());
    let (rc, rn) = (rank(candidate), rank(current));
    rc > rn || (rc == rn && candidate < current)
}

fn merge_member(members: &mut BTreeMap<String, Member>, rec: &AuthorshipRecord, target: i32) {
    let key = rec.member_key();
    match members.get_mut(&key) {
        None => {
            members.insert(
                key,
                Member {
                    full_name: rec.author_full_name.trim().to_string(),
                    year: rec.year,
                },
            );
        }
        Some(m) => {
            let name = rec.author_full_name.trim();
            if better_name(name, &m.full_name) {
                m.full_name = name.to_string();
            }
            let dist = |y: i32| ((y - target).abs(), y);
            if dist(rec.year) < dist(m.year) {
                m.year = rec.year;
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CohortSet {
    /// Sorted by group, then year.
    pub cohorts: Vec<Cohort>,
    pub rejects: Vec<Reject>,
}

/// One cohort per (group, year), deduplicated within the year.
pub fn build_cohorts(records: &[AuthorshipRecord]) -> CohortSet {
    let mut map: BTreeMap<(String, i32), BTreeMap<String, Member>> = BTreeMap::new();
    let mut rejects = Vec::new();
    for rec in records {
        if let Some(reason) = rec.problem(None) {
            rejects.push(Reject {
                line: 0,
                reason,
                raw: format!(
                    "{},{},{},{},{}",
                    rec.group_id,
                    rec.year,
                    rec.article_id,
                    rec.author_full_name,
                    rec.author_stable_id.as_deref().unwrap_or("")
                ),
            });
            continue;
        }
        let members = map.entry((rec.group_id.clone(), rec.year)).or_default();
        merge_member(members, rec, rec.year);
    }
    CohortSet {
        cohorts: map
            .into_iter()
            .map(|((group_id, year), members)| Cohort {
                group_id,
                year,
                members,
            })
            .collect(),
        rejects,
    }
}

/// Provenance of an oversampled observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaling {
    pub half_window: u32,
    pub window_start: i32,
    pub window_end: i32,
    /// Unique authors in the pooled window.
    pub pooled_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortObservation {
    pub group_id: String,
    pub year: i32,
    pub n_total: usize,
    /// Integral in threshold mode, fractional in expected-value mode.
    pub n_female: f64,
    pub n_male: f64,
    pub n_unidentified: f64,
    pub pct_women_all: f64,
    /// `None` when no member was identified.
    pub pct_women_identified: Option<f64>,
    pub pct_non_ssa: f64,
    pub scaled: Option<Scaling>,
}

impl CohortObservation {
    fn from_tallies(
        group_id: &str,
        year: i32,
        n_total: usize,
        female: f64,
        male: f64,
        unidentified: f64,
        pct_non_ssa: f64,
        scaled: Option<Scaling>,
    ) -> Self {
        let total = n_total as f64;
        let identified = female + male;
        CohortObservation {
            group_id: group_id.to_string(),
            year,
            n_total,
            n_female: female,
            n_male: male,
            n_unidentified: unidentified,
            pct_women_all: 100.0 * female / total,
            pct_women_identified: (identified > 0.0).then(|| 100.0 * female / identified),
            pct_non_ssa,
            scaled,
        }
    }
}

struct Tally {
    female: f64,
    male: f64,
    unidentified: f64,
    non_ssa: usize,
}

fn tally(cohort: &Cohort, corpus: &SsaCorpus, config: &InferenceConfig, overrides: &OverrideTable) -> Tally {
    let mut t = Tally {
        female: 0.0,
        male: 0.0,
        unidentified: 0.0,
        non_ssa: 0,
    };
    for m in cohort.members.values() {
        let a = infer_author(corpus, &m.full_name, m.year, config, overrides);
        if a.classification.reason() == Some(UnidentifiedReason::NonSsa) {
            t.non_ssa += 1;
        }
        match config.mode {
            CountingMode::Threshold => match a.classification.outcome {
                Outcome::Female => t.female += 1.0,
                Outcome::Male => t.male += 1.0,
                Outcome::Unidentified(_) => t.unidentified += 1.0,
            },
            CountingMode::ExpectedValue => match a.estimate {
                Some(e) => {
                    t.female += e.p_female;
                    t.male += 1.0 - e.p_female;
                }
                None => t.unidentified += 1.0,
            },
        }
    }
    t
}

/// Classifies every member of `cohort` and tallies the result.
pub fn observe(
    cohort: &Cohort,
    corpus: &SsaCorpus,
    config: &InferenceConfig,
    overrides: &OverrideTable,
) -> Result<CohortObservation> {
    if cohort.is_empty() {
        return Err(Error::Empty("cohort"));
    }
    let t = tally(cohort, corpus, config, overrides);
    let n = cohort.len();
    Ok(CohortObservation::from_tallies(
        &cohort.group_id,
        cohort.year,
        n,
        t.female,
        t.male,
        t.unidentified,
        100.0 * t.non_ssa as f64 / n as f64,
        None,
    ))
}

/// Splits `total` into parts proportional to `weights`, rounding by the
/// largest-remainder rule. Equal remainders go to the earlier part.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        parts[i] += 1;
    }
    parts
}

/// Cohort for `group_id` pooled over `[target - h, target + h]`, with
/// each person counted once.
pub fn pooled_cohort(records: &[AuthorshipRecord], group_id: &str, target_year: i32, half_window: u32) -> Cohort {
    let h = half_window as i32;
    let mut members = BTreeMap::new();
    for rec in records {
        if rec.group_id == group_id && (rec.year - target_year).abs() <= h && rec.problem(None).is_none() {
            merge_member(&mut members, rec, target_year);
        }
    }
    Cohort {
        group_id: group_id.to_string(),
        year: target_year,
        members,
    }
}

/// Estimates gender shares over a widened window of years, then scales
/// the counts back to the target year's own population.
///
/// In threshold mode the scaled counts are integers apportioned by largest
/// remainder; in expected-value mode they are scaled proportionally.
pub fn windowed_observe(
    records: &[AuthorshipRecord],
    group_id: &str,
    target_year: i32,
    half_window: u32,
    corpus: &SsaCorpus,
    config: &InferenceConfig,
    overrides: &OverrideTable,
) -> Result<CohortObservation> {
    if half_window > 2 {
        return Err(Error::Config(format!(
            "oversampling half-window must be 1 or 2 years, got {half_window}"
        )));
    }
    let target = pooled_cohort(records, group_id, target_year, 0);
    if target.is_empty() {
        return Err(Error::Empty("target-year population"));
    }
    if half_window == 0 {
        return observe(&target, corpus, config, overrides);
    }
    let pooled = pooled_cohort(records, group_id, target_year, half_window);
    let t = tally(&pooled, corpus, config, overrides);
    let n = target.len();
    let (female, male, unidentified) = match config.mode {
        CountingMode::Threshold => {
            let parts = apportion(n, &[t.female, t.male, t.unidentified]);
            (parts[0] as f64, parts[1] as f64, parts[2] as f64)
        }
        CountingMode::ExpectedValue => {
            let k = n as f64 / pooled.len() as f64;
            (t.female * k, t.male * k, t.unidentified * k)
        }
    };
    let h = half_window as i32;
    Ok(CohortObservation::from_tallies(
        group_id,
        target_year,
        n,
        female,
        male,
        unidentified,
        100.0 * t.non_ssa as f64 / pooled.len() as f64,
        Some(Scaling {
            half_window,
            window_start: target_year - h,
            window_end: target_year + h,
            pooled_n: pooled.len(),
        }),
    ))
}

/// Flat CSV row for [`CohortObservation`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObservationRow {
    pub group_id: String,
    pub year: i32,
    pub n_total: usize,
    pub n_female: f64,
    pub n_male: f64,
    pub n_unidentified: f64,
    pub pct_women_all: f64,
    pub pct_women_identified: Option<f64>,
    pub pct_non_ssa: f64,
    pub scaled: bool,
    pub half_window: Option<u32>,
    pub window_start: Option<i32>,
    pub window_end: Option<i32>,
    pub pooled_n: Option<usize>,
}

impl From<&CohortObservation> for ObservationRow {
    fn from(o: &CohortObservation) -> Self {
        ObservationRow {
            group_id: o.group_id.clone(),
            year: o.year,
            n_total: o.n_total,
            n_female: o.n_female,
            n_male: o.n_male,
            n_unidentified: o.n_unidentified,
            pct_women_all: o.pct_women_all,
            pct_women_identified: o.pct_women_identified,
            pct_non_ssa: o.pct_non_ssa,
            scaled: o.scaled.is_some(),
            half_window: o.scaled.map(|s| s.half_window),
            window_start: o.scaled.map(|s| s.window_start),
            window_end: o.scaled.map(|s| s.window_end),
            pooled_n: o.scaled.map(|s| s.pooled_n),
        }
    }
}

pub fn write_observations_csv<W: std::io::Write>(writer: W, obs: &[CohortObservation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for o in obs {
        w.serialize(ObservationRow::from(o))?;
    }
    w.flush()?;
    Ok(())
}

/// Groups and years that have records, for gap reporting.
pub fn coverage(cohorts: &[Cohort]) -> (BTreeSet<String>, BTreeSet<i32>) {
    let groups = cohorts.iter().map(|c| c.group_id.clone()).collect();
    let years = cohorts.iter().map(|c| c.year).collect();
    (groups, years)
}
