//! Year-aware gender inference for author names.
//!
//! An author's birth year is approximated as the publication year minus a
//! fixed shift, and the SSA counts for their given name in that year give
//! p(F). Personally verified identifications in an [`OverrideTable`] take
//! precedence over the corpus.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ssa::{normalize, Lookup, NameCounts, SsaCorpus};

pub const DEFAULT_YEAR_SHIFT: i32 = 30;
pub const MAX_YEAR_SHIFT: i32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CountingMode {
    /// Each member contributes p(F) to the female tally.
    #[serde(alias = "expected")]
    ExpectedValue,
    /// Each member is hard-classified Female, Male or Unidentified.
    #[default]
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub year_shift: i32,
    pub smoothing_window: u32,
    pub mode: CountingMode,
    pub threshold: f64,
    pub ambiguity_band: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            year_shift: DEFAULT_YEAR_SHIFT,
            smoothing_window: 0,
            mode: CountingMode::Threshold,
            threshold: 0.5,
            ambiguity_band: 0.0,
        }
    }
}

impl InferenceConfig {
    pub fn with_shift(year_shift: i32) -> Self {
        InferenceConfig {
            year_shift,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0..=MAX_YEAR_SHIFT).contains(&self.year_shift) {
            return Err(Error::Config(format!(
                "year shift {} outside [0, {MAX_YEAR_SHIFT}]",
                self.year_shift
            )));
        }
        if !(self.ambiguity_band >= 0.0) {
            return Err(Error::Config(format!(
                "ambiguity band {} must be non-negative",
                self.ambiguity_band
            )));
        }
        let lo = self.threshold - self.ambiguity_band;
        let hi = self.threshold + self.ambiguity_band;
        if !(lo > 0.0 && hi < 1.0) {
            return Err(Error::Config(format!(
                "threshold {} ± band {} must stay inside (0, 1)",
                self.threshold, self.ambiguity_band
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Ssa,
    Override,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenderEstimate {
    pub p_female: f64,
    pub basis: Basis,
    pub lookup_year: i32,
    /// Births (female + male) backing the estimate; zero for overrides.
    pub total_count: u64,
}

impl GenderEstimate {
    fn from_counts(counts: NameCounts, lookup_year: i32) -> Option<Self> {
        Some(GenderEstimate {
            p_female: counts.p_female()?,
            basis: Basis::Ssa,
            lookup_year,
            total_count: counts.total(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn p_female(self) -> f64 {
        match self {
            Gender::Female => 1.0,
            Gender::Male => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnidentifiedReason {
    InitialsOnly,
    NonSsa,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Female,
    Male,
    Unidentified(UnidentifiedReason),
}

impl From<Gender> for Outcome {
    fn from(g: Gender) -> Self {
        match g {
            Gender::Female => Outcome::Female,
            Gender::Male => Outcome::Male,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Classification {
    pub outcome: Outcome,
    pub basis: Basis,
}

impl Classification {
    pub fn unidentified(reason: UnidentifiedReason) -> Self {
        Classification {
            outcome: Outcome::Unidentified(reason),
            basis: Basis::Ssa,
        }
    }

    pub fn reason(&self) -> Option<UnidentifiedReason> {
        match self.outcome {
            Outcome::Unidentified(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Female => f.write_str("Female"),
            Outcome::Male => f.write_str("Male"),
            Outcome::Unidentified(r) => {
                let r = match r {
                    UnidentifiedReason::InitialsOnly => "initials_only",
                    UnidentifiedReason::NonSsa => "non_ssa",
                    UnidentifiedReason::Ambiguous => "ambiguous",
                };
                write!(f, "Unidentified({r})")
            }
        }
    }
}

/// A token counts as an initial when no period-separated piece of it has
/// more than one letter ("J.", "J", "J.R.").
fn is_initial(token: &str) -> bool {
    token
        .split('.')
        .all(|piece| piece.chars().filter(|c| c.is_alphabetic()).count() <= 1)
}

fn is_name_like(token: &str) -> bool {
    token.chars().filter(|c| c.is_alphabetic()).count() >= 2
        && token
            .chars()
            .all(|c| c.is_alphabetic() || matches!(c, '-' | '\'' | '’' | '.'))
}

/// Returns the first usable given-name token of `full_name`, skipping
/// leading initials. In "Given Middle Surname" order the last token is the
/// surname and never a candidate; in "Surname, Given" order everything
/// after the comma is.
pub fn extract_given_name(full_name: &str) -> Option<&str> {
    let tokens: Vec<&str> = match full_name.split_once(',') {
        Some((_, rest)) if !rest.trim().is_empty() => rest.split_whitespace().collect(),
        _ => {
            let mut t: Vec<&str> = full_name.split_whitespace().collect();
            if t.len() > 1 {
                t.pop();
            }
            t
        }
    };
    tokens
        .into_iter()
        .filter(|t| !is_initial(t))
        .find(|t| is_name_like(t))
        .map(|t| t.trim_end_matches('.'))
}

/// Computes p(F) for `given_name` as of `publication_year - year_shift`.
///
/// With a smoothing window `w > 0`, counts from every loaded year in
/// `[lookup - w, lookup + w]` are pooled. Returns `None` when the name has
/// no counts in range, i.e. the author is non-SSA.
pub fn infer_pf(
    corpus: &SsaCorpus,
    given_name: &str,
    publication_year: i32,
    config: &InferenceConfig,
) -> Option<GenderEstimate> {
    let lookup_year = publication_year - config.year_shift;
    let w = config.smoothing_window as i32;
    if w == 0 {
        return match corpus.lookup(given_name, lookup_year) {
            Lookup::Found(c) => GenderEstimate::from_counts(c, lookup_year),
            _ => None,
        };
    }
    let mut pooled = NameCounts::default();
    for year in lookup_year - w..=lookup_year + w {
        if let Lookup::Found(c) = corpus.lookup(given_name, year) {
            pooled += c;
        }
    }
    GenderEstimate::from_counts(pooled, lookup_year)
}

/// Applies the threshold rule: `p >= threshold + band` is Female,
/// `p <= threshold - band` is Male, anything between is ambiguous.
///
/// In expected-value mode cohort tallies use p(F) directly; this rule is
/// then used only for per-author reporting.
pub fn classify(estimate: Option<&GenderEstimate>, config: &InferenceConfig) -> Classification {
    let Some(est) = estimate else {
        return Classification::unidentified(UnidentifiedReason::NonSsa);
    };
    let p = est.p_female;
    let outcome = if p >= config.threshold + config.ambiguity_band {
        Outcome::Female
    } else if p <= config.threshold - config.ambiguity_band {
        Outcome::Male
    } else {
        Outcome::Unidentified(UnidentifiedReason::Ambiguous)
    };
    Classification {
        outcome,
        basis: est.basis,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideEntry {
    pub gender: Gender,
    pub provenance: String,
}

/// Personally verified author identifications.
///
/// Keys are normalized full names, optionally qualified by a normalized
/// affiliation to separate people who share a name. The table ships
/// empty. Names known to need review include Andrea, Jan, Jean, Joan and
/// Laurence, which are usually female in US data but often male in
/// Italian, Dutch, Francophone or Scandinavian usage.
#[derive(Debug, Clone, Default)]
pub struct OverrideTable {
    entries: HashMap<(String, Option<String>), OverrideEntry>,
}

/// Normalization for person-level keys: case- and diacritic-folded with
/// whitespace collapsed.
pub fn normalize_full_name(name: &str) -> String {
    normalize(name).split_whitespace().collect::<Vec<_>>().join(" ")
}

impl OverrideTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(
        &mut self,
        full_name: &str,
        affiliation: Option<&str>,
        gender: Gender,
        provenance: &str,
    ) -> Result<()> {
        if provenance.trim().is_empty() {
            return Err(Error::Config(format!(
                "override for {full_name:?} has no provenance note"
            )));
        }
        let key = (
            normalize_full_name(full_name),
            affiliation
                .map(normalize_full_name)
                .filter(|a| !a.is_empty()),
        );
        self.entries.insert(
            key,
            OverrideEntry {
                gender,
                provenance: provenance.trim().to_string(),
            },
        );
        Ok(())
    }

    /// An affiliation-qualified entry wins over an unqualified one.
    pub fn get(&self, full_name: &str, affiliation: Option<&str>) -> Option<&OverrideEntry> {
        let name = normalize_full_name(full_name);
        if let Some(aff) = affiliation.map(normalize_full_name) {
            if let Some(e) = self.entries.get(&(name.clone(), Some(aff))) {
                return Some(e);
            }
        }
        self.entries.get(&(name, None))
    }

    /// Reads `full_name,gender,provenance[,affiliation]` CSV with a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = OverrideTable::new();
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = idx + 2;
            let err = |msg: String| Error::Override { line, msg };
            let name = rec.get(0).filter(|s| !s.is_empty()).ok_or_else(|| err("missing full_name".into()))?;
            let gender = match rec.get(1) {
                Some("F") => Gender::Female,
                Some("M") => Gender::Male,
                other => return Err(err(format!("gender must be F or M, got {other:?}"))),
            };
            let provenance = rec.get(2).unwrap_or("");
            if provenance.is_empty() {
                return Err(err(format!("override for {name:?} has no provenance note")));
            }
            let affiliation = rec.get(3).filter(|s| !s.is_empty());
            table.insert(name, affiliation, gender, provenance)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

pub fn apply_overrides(full_name: &str, base: Classification, table: &OverrideTable) -> Classification {
    apply_overrides_at(full_name, None, base, table)
}

pub fn apply_overrides_at(
    full_name: &str,
    affiliation: Option<&str>,
    base: Classification,
    table: &OverrideTable,
) -> Classification {
    match table.get(full_name, affiliation) {
        Some(entry) => Classification {
            outcome: entry.gender.into(),
            basis: Basis::Override,
        },
        None => base,
    }
}

/// Fraction of classifications that are Unidentified for lack of SSA data.
pub fn non_ssa_rate(classifications: &[Classification]) -> Result<f64> {
    if classifications.is_empty() {
        return Err(Error::Empty("classifications"));
    }
    let n = classifications
        .iter()
        .filter(|c| c.reason() == Some(UnidentifiedReason::NonSsa))
        .count();
    Ok(n as f64 / classifications.len() as f64)
}

/// Everything known about one author after inference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorInference {
    pub given_name: Option<String>,
    pub estimate: Option<GenderEstimate>,
    pub classification: Classification,
}

/// Full per-author pipeline: name extraction, corpus lookup, threshold
/// classification and overrides.
pub fn infer_author(
    corpus: &SsaCorpus,
    full_name: &str,
    publication_year: i32,
    config: &InferenceConfig,
    overrides: &OverrideTable,
) -> AuthorInference {
    let given = extract_given_name(full_name);
    let estimate = given.and_then(|g| infer_pf(corpus, g, publication_year, config));
    let base = match given {
        None => Classification::unidentified(UnidentifiedReason::InitialsOnly),
        Some(_) => classify(estimate.as_ref(), config),
    };
    let classification = apply_overrides(full_name, base, overrides);
    let estimate = match (classification.basis, classification.outcome) {
        (Basis::Override, Outcome::Female) | (Basis::Override, Outcome::Male) => {
            let g = if classification.outcome == Outcome::Female {
                Gender::Female
            } else {
                Gender::Male
            };
            Some(GenderEstimate {
                p_female: g.p_female(),
                basis: Basis::Override,
                lookup_year: publication_year - config.year_shift,
                total_count: 0,
            })
        }
        _ => estimate,
    };
    AuthorInference {
        given_name: given.map(str::to_string),
        estimate,
        classification,
    }
}
