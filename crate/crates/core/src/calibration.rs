//! Grid search for the year shift used in corpus lookups.
//!
//! For each labeled subgroup and candidate shift, the differential is the
//! mean of `|computed p(F) - true p(F)|` over the authors the corpus can
//! resolve at that shift. The shift with the smallest differential wins
//! per subgroup, and the modal winner across subgroups is the consensus.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{infer_pf, Gender, InferenceConfig};
use crate::ssa::SsaCorpus;

pub const DEFAULT_GRID: [i32; 7] = [20, 25, 30, 35, 40, 45, 50];

/// Shift preferred when subgroups disagree evenly.
pub const PREFERRED_SHIFT: i32 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledAuthor {
    pub given_name: String,
    pub publication_year: i32,
    /// Always exactly 0.0 or 1.0.
    pub true_p_female: f64,
}

impl LabeledAuthor {
    pub fn new(given_name: impl Into<String>, publication_year: i32, gender: Gender) -> Self {
        LabeledAuthor {
            given_name: given_name.into(),
            publication_year,
            true_p_female: gender.p_female(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Subgroup {
    pub id: String,
    pub authors: Vec<LabeledAuthor>,
}

/// Reads `given_name,publication_year,gender` CSV with a header.
pub fn read_labeled<R: Read>(reader: R) -> Result<Vec<LabeledAuthor>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let err = |msg: String| Error::Labeled { line, msg };
        let name = rec
            .get(0)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| err("missing given_name".into()))?;
        let year: i32 = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(format!("bad publication_year {:?}", rec.get(1))))?;
        let gender = match rec.get(2) {
            Some("F") => Gender::Female,
            Some("M") => Gender::Male,
            other => return Err(err(format!("gender must be F or M, got {other:?}"))),
        };
        out.push(LabeledAuthor::new(name, year, gender));
    }
    Ok(out)
}

pub fn write_labeled<W: std::io::Write>(writer: W, authors: &[LabeledAuthor]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["given_name", "publication_year", "gender"])?;
    for a in authors {
        let g = if a.true_p_female == 1.0 { "F" } else { "M" };
        w.write_record([a.given_name.as_str(), &a.publication_year.to_string(), g])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Differential {
    pub mean_abs_diff: f64,
    /// Fraction of the subgroup the corpus resolved at this shift.
    pub coverage: f64,
}

/// Mean absolute error of corpus p(F) against true p(F) at `year_shift`.
/// Authors the corpus cannot resolve are left out of the mean and lower
/// the coverage instead.
pub fn differential(
    corpus: &SsaCorpus,
    subgroup: &[LabeledAuthor],
    year_shift: i32,
) -> Result<Differential> {
    if subgroup.is_empty() {
        return Err(Error::Empty("labeled subgroup"));
    }
    let config = InferenceConfig::with_shift(year_shift);
    let mut sum = 0.0;
    let mut resolved = 0usize;
    for a in subgroup {
        if let Some(e) = infer_pf(corpus, &a.given_name, a.publication_year, &config) {
            sum += (e.p_female - a.true_p_female).abs();
            resolved += 1;
        }
    }
    if resolved == 0 {
        return Err(Error::NoResolvableAuthors {
            shift: year_shift,
            size: subgroup.len(),
        });
    }
    Ok(Differential {
        mean_abs_diff: sum / resolved as f64,
        coverage: resolved as f64 / subgroup.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub shift: i32,
    /// `None` when no author resolves at this shift.
    pub differential: Option<f64>,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub subgroup: String,
    pub size: usize,
    pub points: Vec<CurvePoint>,
    pub argmin: Option<i32>,
    /// Set when several shifts share the minimum; the smallest is taken.
    pub argmin_tied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub curves: Vec<CalibrationCurve>,
    /// Curve over all subgroups pooled, so larger subgroups weigh more.
    pub pooled: CalibrationCurve,
    pub consensus: i32,
    /// Set when the modal argmin was not unique.
    pub consensus_tie_broken: bool,
    /// Subgroups whose argmin differs from the consensus.
    pub dissenting: Vec<String>,
}

fn argmin(points: &[CurvePoint]) -> (Option<i32>, bool) {
    let mut best: Option<(f64, i32)> = None;
    let mut tied = false;
    for p in points {
        let Some(d) = p.differential else { continue };
        match best {
            None => best = Some((d, p.shift)),
            Some((bd, bs)) => {
                if d < bd || (d == bd && p.shift < bs) {
                    tied = d == bd;
                    best = Some((d, p.shift));
                } else if d == bd {
                    tied = true;
                }
            }
        }
    }
    (best.map(|(_, s)| s), tied)
}

fn curve(corpus: &SsaCorpus, id: &str, authors: &[LabeledAuthor], grid: &[i32]) -> CalibrationCurve {
    let mut points = Vec::with_capacity(grid.len());
    let mut error = None;
    for &shift in grid {
        match differential(corpus, authors, shift) {
            Ok(d) => points.push(CurvePoint {
                shift,
                differential: Some(d.mean_abs_diff),
                coverage: d.coverage,
            }),
            Err(e) => {
                points.push(CurvePoint {
                    shift,
                    differential: None,
                    coverage: 0.0,
                });
                error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let (argmin, argmin_tied) = argmin(&points);
    if argmin.is_some() {
        // Partial failures are visible as null points.
        error = None;
    }
    CalibrationCurve {
        subgroup: id.to_string(),
        size: authors.len(),
        points,
        argmin,
        argmin_tied,
        error,
    }
}

/// Picks the modal argmin. Ties prefer [`PREFERRED_SHIFT`], then the
/// candidate closest to it, then the smaller shift.
fn consensus(argmins: &[i32]) -> Option<(i32, bool)> {
    let mut votes: BTreeMap<i32, usize> = BTreeMap::new();
    for &a in argmins {
        *votes.entry(a).or_default() += 1;
    }
    let top = *votes.values().max()?;
    let mut modes: Vec<i32> = votes
        .into_iter()
        .filter(|&(_, n)| n == top)
        .map(|(s, _)| s)
        .collect();
    modes.sort_by_key(|s| ((s - PREFERRED_SHIFT).abs(), *s));
    Some((modes[0], modes.len() > 1))
}

pub fn calibrate(corpus: &SsaCorpus, subgroups: &[Subgroup], grid: &[i32]) -> Result<CalibrationReport> {
    if grid.is_empty() {
        return Err(Error::Empty("year-shift grid"));
    }
    if subgroups.is_empty() {
        return Err(Error::Empty("labeled subgroups"));
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let curves: Vec<CalibrationCurve> = subgroups
        .iter()
        .map(|s| curve(corpus, &s.id, &s.authors, &grid))
        .collect();
    let argmins: Vec<i32> = curves.iter().filter_map(|c| c.argmin).collect();
    let Some((consensus, tie)) = consensus(&argmins) else {
        let why = curves
            .iter()
            .filter_map(|c| c.error.as_deref().map(|e| format!("{}: {e}", c.subgroup)))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Config(format!("no subgroup could be calibrated ({why})")));
    };
    if tie {
        log::warn!("subgroup argmins tie; consensus year shift resolved to {consensus}");
    }
    let dissenting = curves
        .iter()
        .filter(|c| c.argmin.is_some_and(|a| a != consensus))
        .map(|c| c.subgroup.clone())
        .collect();
    let all: Vec<LabeledAuthor> = subgroups.iter().flat_map(|s| s.authors.iter().cloned()).collect();
    let pooled = curve(corpus, "pooled", &all, &grid);

    Ok(CalibrationReport {
        curves,
        pooled,
        consensus,
        consensus_tie_broken: tie,
        dissenting,
    })
}
