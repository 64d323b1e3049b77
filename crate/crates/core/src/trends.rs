//! Quadratic trendlines over women's-share series, growth-shape
//! classification, group medians and the author-weighted composite.
//!
//! Years are encoded as decade indices from the first analyzed year
//! (1970, 1980, 1990, 2000 become 0, 1, 2, 3), so the x² coefficient is in
//! percentage points per decade².

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cohort::CohortObservation;
use crate::error::{Error, Result};

pub const DEFAULT_DISPLAY_SCALE: i32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub group_id: String,
    pub points: Vec<SeriesPoint>,
}

impl Series {
    pub fn new(group_id: impl Into<String>, points: Vec<SeriesPoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(Error::InvalidSeries("x values must be strictly increasing".into()));
            }
        }
        for p in &points {
            if !(0.0..=100.0).contains(&p.y) {
                return Err(Error::InvalidSeries(format!("share {} outside [0, 100]", p.y)));
            }
            if !(p.weight > 0.0) {
                return Err(Error::InvalidSeries(format!("weight {} must be positive", p.weight)));
            }
        }
        Ok(Series {
            group_id: group_id.into(),
            points,
        })
    }

    /// Unit-weight series from (x, y) pairs.
    pub fn from_xy(group_id: impl Into<String>, xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            group_id,
            xy.iter()
                .map(|&(x, y)| SeriesPoint { x, y, weight: 1.0 })
                .collect(),
        )
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    /// x² coefficient.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub r2_linear: f64,
    /// The series was constant; R² is reported as 1 by convention.
    pub degenerate: bool,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (v[row] - tail) / m[row][row];
    }
    Some(out)
}

fn r_squared(ss_res: f64, ss_tot: f64) -> f64 {
    1.0 - ss_res / ss_tot
}

/// Unweighted least-squares fit of `y = a x² + b x + c`, plus the R² of
/// the straight-line fit for comparison.
pub fn fit_quadratic(series: &Series) -> Result<QuadraticFit> {
    let n = series.points.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mean_y = series.points.iter().map(|p| p.y).sum::<f64>() / nf;
    let ss_tot: f64 = series.points.iter().map(|p| (p.y - mean_y).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(QuadraticFit {
            a: 0.0,
            b: 0.0,
            c: mean_y,
            r2: 1.0,
            r2_linear: 1.0,
            degenerate: true,
        });
    }

    // Center x so the normal equations stay well conditioned, then map the
    // coefficients back.
    let mean_x = series.points.iter().map(|p| p.x).sum::<f64>() / nf;
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for p in &series.points {
        let u = p.x - mean_x;
        let mut pow = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += pow;
            if k < 3 {
                t[k] += pow * p.y;
            }
            pow *= u;
        }
    }
    let m = [[s[4], s[3], s[2]], [s[3], s[2], s[1]], [s[2], s[1], s[0]]];
    let [qa, qb, qc] = solve3(m, [t[2], t[1], t[0]])
        .ok_or_else(|| Error::InvalidSeries("x values do not determine a quadratic".into()))?;
    let a = qa;
    let b = qb - 2.0 * qa * mean_x;
    let c = qa * mean_x * mean_x - qb * mean_x + qc;

    let ss_res: f64 = series
        .points
        .iter()
        .map(|p| {
            let u = p.x - mean_x;
            (p.y - ((qa * u + qb) * u + qc)).powi(2)
        })
        .sum();

    // Linear comparison fit (centered, so cov/var directly).
    let slope = t[1] / s[2];
    let ss_res_lin: f64 = series
        .points
        .iter()
        .map(|p| (p.y - (mean_y + slope * (p.x - mean_x))).powi(2))
        .sum();

    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::Degenerate);
    }
    let r2_linear = r_squared(ss_res_lin, ss_tot);
    // Adding a degree cannot increase the least-squares residual; clamp
    // away rounding noise only.
    let r2 = r_squared(ss_res.min(ss_res_lin), ss_tot);
    Ok(QuadraticFit {
        a,
        b,
        c,
        r2,
        r2_linear,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Convex,
    Linear,
    Concave,
}

pub fn classify_shape(fit: &QuadraticFit, tolerance: f64) -> Shape {
    if fit.a > tolerance {
        Shape::Convex
    } else if fit.a < -tolerance {
        Shape::Concave
    } else {
        Shape::Linear
    }
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

pub fn median_share(series: &Series) -> Result<f64> {
    median(&series.points.iter().map(|p| p.y).collect::<Vec<_>>()).ok_or(Error::Empty("series"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group_id: String,
    pub median_pct: f64,
    pub shape: Shape,
    pub fit: QuadraticFit,
    pub total_authors: f64,
}

impl GroupSummary {
    pub fn a(&self) -> f64 {
        self.fit.a
    }
}

pub fn summarize_group(series: &Series, shape_tolerance: f64) -> Result<GroupSummary> {
    let fit = fit_quadratic(series)?;
    Ok(GroupSummary {
        group_id: series.group_id.clone(),
        median_pct: median_share(series)?,
        shape: classify_shape(&fit, shape_tolerance),
        fit,
        total_authors: series.total_weight(),
    })
}

/// Which women's-share denominator trend series use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareBasis {
    /// Female over all authors, unidentified included.
    #[default]
    All,
    /// Female over female + male.
    Identified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendOptions {
    pub basis: ShareBasis,
    pub shape_tolerance: f64,
    pub display_scale: i32,
}

impl Default for TrendOptions {
    fn default() -> Self {
        TrendOptions {
            basis: ShareBasis::All,
            shape_tolerance: 0.0,
            display_scale: DEFAULT_DISPLAY_SCALE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeYear {
    pub year: i32,
    pub pct: f64,
    pub total_authors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSummary {
    pub per_year: Vec<CompositeYear>,
    /// Author-weighted average of the group medians.
    pub median_weighted: f64,
    /// Median of the per-year composite shares.
    pub median_series: f64,
    pub fit: QuadraticFit,
    pub shape: Shape,
    pub display_scale: i32,
}

impl CompositeSummary {
    pub fn a(&self) -> f64 {
        self.fit.a
    }

    pub fn a_scaled(&self) -> f64 {
        self.fit.a * f64::from(self.display_scale)
    }
}

pub fn decade_index(year: i32, origin: i32) -> f64 {
    f64::from(year - origin) / 10.0
}

fn share(female: f64, male: f64, total: f64, basis: ShareBasis) -> f64 {
    let denom = match basis {
        ShareBasis::All => total,
        ShareBasis::Identified => female + male,
    };
    if denom > 0.0 {
        100.0 * female / denom
    } else {
        0.0
    }
}

/// Observations indexed by group then year, with every gap reported.
fn index_observations(
    observations: &[CohortObservation],
) -> Result<(BTreeMap<&str, BTreeMap<i32, &CohortObservation>>, Vec<i32>)> {
    if observations.is_empty() {
        return Err(Error::Empty("observations"));
    }
    let mut by_group: BTreeMap<&str, BTreeMap<i32, &CohortObservation>> = BTreeMap::new();
    let mut years = BTreeSet::new();
    for o in observations {
        years.insert(o.year);
        if by_group
            .entry(o.group_id.as_str())
            .or_default()
            .insert(o.year, o)
            .is_some()
        {
            return Err(Error::InvalidSeries(format!(
                "duplicate observation for ({}, {})",
                o.group_id, o.year
            )));
        }
    }
    let mut gaps = Vec::new();
    for (g, ys) in &by_group {
        for y in &years {
            if !ys.contains_key(y) {
                gaps.push((g.to_string(), *y));
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::CoverageGaps(gaps));
    }
    Ok((by_group, years.into_iter().collect()))
}

/// Per-group series with decade-index x, share y and author-count weight.
pub fn group_series(observations: &[CohortObservation], basis: ShareBasis) -> Result<Vec<Series>> {
    let (by_group, years) = index_observations(observations)?;
    let origin = years[0];
    by_group
        .into_iter()
        .map(|(g, ys)| {
            let points = ys
                .values()
                .map(|o| SeriesPoint {
                    x: decade_index(o.year, origin),
                    y: share(o.n_female, o.n_male, o.n_total as f64, basis),
                    weight: o.n_total as f64,
                })
                .collect();
            Series::new(g, points)
        })
        .collect()
}

/// Author-weighted composite over every group.
pub fn composite(observations: &[CohortObservation], opts: &TrendOptions) -> Result<CompositeSummary> {
    let (_, years) = index_observations(observations)?;
    let origin = years[0];
    let mut per_year = Vec::with_capacity(years.len());
    for &year in &years {
        let (mut f, mut m, mut n) = (0.0, 0.0, 0usize);
        for o in observations.iter().filter(|o| o.year == year) {
            f += o.n_female;
            m += o.n_male;
            n += o.n_total;
        }
        per_year.push(CompositeYear {
            year,
            pct: share(f, m, n as f64, opts.basis),
            total_authors: n,
        });
    }

    let groups = group_series(observations, opts.basis)?;
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for s in &groups {
        let w = s.total_weight();
        weighted += median_share(s)? * w;
        weight += w;
    }

    let series = Series::new(
        "composite",
        per_year
            .iter()
            .map(|p| SeriesPoint {
                x: decade_index(p.year, origin),
                y: p.pct,
                weight: p.total_authors as f64,
            })
            .collect(),
    )?;
    let fit = fit_quadratic(&series)?;
    Ok(CompositeSummary {
        median_series: median_share(&series)?,
        per_year,
        median_weighted: weighted / weight,
        shape: classify_shape(&fit, opts.shape_tolerance),
        fit,
        display_scale: opts.display_scale,
    })
}

/// Composite recomputed with one group left out.
pub fn composite_without(
    observations: &[CohortObservation],
    group_id: &str,
    opts: &TrendOptions,
) -> Result<CompositeSummary> {
    let kept: Vec<CohortObservation> = observations
        .iter()
        .filter(|o| o.group_id != group_id)
        .cloned()
        .collect();
    composite(&kept, opts)
}

/// Position relative to the composite: vertical axis is median share,
/// horizontal axis is curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrant {
    /// Above the composite median, more accelerating than the composite.
    UpperRight,
    UpperLeft,
    LowerRight,
    LowerLeft,
    /// Exactly on one of the composite axes.
    OnAxis,
}

impl Quadrant {
    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::UpperRight => "upper-right",
            Quadrant::UpperLeft => "upper-left",
            Quadrant::LowerRight => "lower-right",
            Quadrant::LowerLeft => "lower-left",
            Quadrant::OnAxis => "on-axis",
        }
    }
}

pub fn quadrant_of(summary: &GroupSummary, composite: &CompositeSummary) -> Quadrant {
    let dm = summary.median_pct - composite.median_weighted;
    let da = summary.a() - composite.a();
    if dm == 0.0 || da == 0.0 {
        return Quadrant::OnAxis;
    }
    match (dm > 0.0, da > 0.0) {
        (true, true) => Quadrant::UpperRight,
        (true, false) => Quadrant::UpperLeft,
        (false, true) => Quadrant::LowerRight,
        (false, false) => Quadrant::LowerLeft,
    }
}

pub fn quadrant(summaries: &[GroupSummary], composite: &CompositeSummary) -> Vec<(String, Quadrant)> {
    summaries
        .iter()
        .map(|s| (s.group_id.clone(), quadrant_of(s, composite)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTrend {
    pub group_id: String,
    pub median: f64,
    pub a: f64,
    pub a_scaled: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub r2_linear: f64,
    pub shape: Shape,
    pub quadrant: Quadrant,
    pub total_authors: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeTrend {
    pub per_year: Vec<CompositeYear>,
    pub median_weighted: f64,
    pub median_series: f64,
    pub a: f64,
    pub a_scaled: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub r2_linear: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub groups: Vec<GroupTrend>,
    pub composite: CompositeTrend,
}

/// Fits every group and the composite and places groups in quadrants.
pub fn trend_report(observations: &[CohortObservation], opts: &TrendOptions) -> Result<TrendReport> {
    let comp = composite(observations, opts)?;
    let scale = f64::from(opts.display_scale);
    let mut groups = Vec::new();
    for s in group_series(observations, opts.basis)? {
        let g = summarize_group(&s, opts.shape_tolerance)?;
        groups.push(GroupTrend {
            quadrant: quadrant_of(&g, &comp),
            group_id: g.group_id,
            median: g.median_pct,
            a: g.fit.a,
            a_scaled: g.fit.a * scale,
            b: g.fit.b,
            c: g.fit.c,
            r2: g.fit.r2,
            r2_linear: g.fit.r2_linear,
            shape: g.shape,
            total_authors: g.total_authors,
            degenerate: g.fit.degenerate,
        });
    }
    Ok(TrendReport {
        groups,
        composite: CompositeTrend {
            a_scaled: comp.a_scaled(),
            a: comp.fit.a,
            b: comp.fit.b,
            c: comp.fit.c,
            r2: comp.fit.r2,
            r2_linear: comp.fit.r2_linear,
            shape: comp.shape,
            per_year: comp.per_year,
            median_weighted: comp.median_weighted,
            median_series: comp.median_series,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
struct TrendRow<'a> {
    scope: &'a str,
    group_id: &'a str,
    median: f64,
    a: f64,
    a_scaled: f64,
    b: f64,
    c: f64,
    r2: f64,
    r2_linear: f64,
    shape: Shape,
    quadrant: &'a str,
}

/// Flat CSV: one row per group plus a final `composite` row whose median
/// is the weighted median.
pub fn write_trends_csv<W: std::io::Write>(writer: W, report: &TrendReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for g in &report.groups {
        w.serialize(TrendRow {
            scope: "group",
            group_id: &g.group_id,
            median: g.median,
            a: g.a,
            a_scaled: g.a_scaled,
            b: g.b,
            c: g.c,
            r2: g.r2,
            r2_linear: g.r2_linear,
            shape: g.shape,
            quadrant: g.quadrant.as_str(),
        })?;
    }
    let c = &report.composite;
    w.serialize(TrendRow {
        scope: "composite",
        group_id: "",
        median: c.median_weighted,
        a: c.a,
        a_scaled: c.a_scaled,
        b: c.b,
        c: c.c,
        r2: c.r2,
        r2_linear: c.r2_linear,
        shape: c.shape,
        quadrant: "",
    })?;
    w.flush()?;
    Ok(())
}
