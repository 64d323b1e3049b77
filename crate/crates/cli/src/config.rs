//! Run configuration: CLI flags override the JSON config file, which
//! overrides built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gender_trends::calibration::DEFAULT_GRID;
use gender_trends::inference::{CountingMode, InferenceConfig};
use gender_trends::trends::{ShareBasis, TrendOptions, DEFAULT_DISPLAY_SCALE};
use serde::{Deserialize, Serialize};

/// One oversampling directive: estimate `(group_id, year)` from the pooled
/// window `year ± half_window`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OversampleDirective {
    pub group_id: String,
    pub year: i32,
    pub half_window: u32,
}

/// Mirrors the JSON config file. Every field is optional there.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ssa_dir: Option<PathBuf>,
    pub authorship_csv: Option<PathBuf>,
    pub overrides_csv: Option<PathBuf>,
    pub labeled_subgroups: Vec<PathBuf>,
    pub year_shift: Option<i32>,
    pub mode: Option<CountingMode>,
    pub threshold: Option<f64>,
    pub ambiguity_band: Option<f64>,
    pub smoothing_window: Option<u32>,
    pub oversample: Vec<OversampleDirective>,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<Vec<i32>>,
    pub study_years: Option<(i32, i32)>,
    pub basis: Option<ShareBasis>,
    pub shape_tolerance: Option<f64>,
    pub display_scale: Option<i32>,
    pub svg: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg.relative_to(path.parent().unwrap_or(Path::new(""))))
    }

    /// Resolves relative paths against `base`, the config file's directory.
    fn relative_to(mut self, base: &Path) -> RunConfig {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.ssa_dir.as_mut().map(fix);
        self.authorship_csv.as_mut().map(fix);
        self.overrides_csv.as_mut().map(fix);
        self.output_dir.as_mut().map(fix);
        self.labeled_subgroups.iter_mut().for_each(fix);
        self
    }

    /// Fills every field of `self` that is unset from `fallback`.
    pub fn or(self, fallback: RunConfig) -> RunConfig {
        RunConfig {
            ssa_dir: self.ssa_dir.or(fallback.ssa_dir),
            authorship_csv: self.authorship_csv.or(fallback.authorship_csv),
            overrides_csv: self.overrides_csv.or(fallback.overrides_csv),
            labeled_subgroups: if self.labeled_subgroups.is_empty() {
                fallback.labeled_subgroups
            } else {
                self.labeled_subgroups
            },
            year_shift: self.year_shift.or(fallback.year_shift),
            mode: self.mode.or(fallback.mode),
            threshold: self.threshold.or(fallback.threshold),
            ambiguity_band: self.ambiguity_band.or(fallback.ambiguity_band),
            smoothing_window: self.smoothing_window.or(fallback.smoothing_window),
            oversample: if self.oversample.is_empty() {
                fallback.oversample
            } else {
                self.oversample
            },
            output_dir: self.output_dir.or(fallback.output_dir),
            grid: self.grid.or(fallback.grid),
            study_years: self.study_years.or(fallback.study_years),
            basis: self.basis.or(fallback.basis),
            shape_tolerance: self.shape_tolerance.or(fallback.shape_tolerance),
            display_scale: self.display_scale.or(fallback.display_scale),
            svg: self.svg.or(fallback.svg),
        }
    }

    pub fn inference(&self) -> Result<InferenceConfig> {
        let d = InferenceConfig::default();
        let cfg = InferenceConfig {
            year_shift: self.year_shift.unwrap_or(d.year_shift),
            smoothing_window: self.smoothing_window.unwrap_or(d.smoothing_window),
            mode: self.mode.unwrap_or(d.mode),
            threshold: self.threshold.unwrap_or(d.threshold),
            ambiguity_band: self.ambiguity_band.unwrap_or(d.ambiguity_band),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn trend_options(&self) -> TrendOptions {
        TrendOptions {
            basis: self.basis.unwrap_or_default(),
            shape_tolerance: self.shape_tolerance.unwrap_or(0.0),
            display_scale: self.display_scale.unwrap_or(DEFAULT_DISPLAY_SCALE),
        }
    }

    pub fn grid(&self) -> Vec<i32> {
        self.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn require_ssa_dir(&self) -> Result<&Path> {
        let dir = self
            .ssa_dir
            .as_deref()
            .context("no SSA directory given (--ssa-dir or \"ssa_dir\" in the config file)")?;
        if !dir.is_dir() {
            bail!("SSA directory {} does not exist", dir.display());
        }
        Ok(dir)
    }

    /// Checks that every referenced input exists before any work starts.
    pub fn check_inputs(&self) -> Result<()> {
        let files = self
            .authorship_csv
            .iter()
            .chain(self.overrides_csv.iter())
            .chain(self.labeled_subgroups.iter());
        for f in files {
            if !f.is_file() {
                bail!("input file {} does not exist", f.display());
            }
        }
        Ok(())
    }
}
