//! Grid configuration: TOML loading, validation, and the standard benchmark
//! grids behind `reproduce`.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::covariance::CovarianceSpec;
use crate::harness::HarnessError;
use crate::model::SeedSpec;
use crate::procedures::Method;

/// A simulation sweep over (p, Σ) cells, as read from a config file.
///
/// `sigma_grid` entries use the covariance textual forms: `identity`,
/// `equi:RHO`, `blocks:SIZE@RHO,...`, `dense:PATH`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub p_grid: Vec<f64>,
    pub sigma_grid: Vec<String>,
    pub k: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub base_seed: u64,
    #[serde(default = "all_method_names")]
    pub methods: Vec<String>,
}

fn all_method_names() -> Vec<String> {
    Method::ALL.iter().map(|m| m.name().to_string()).collect()
}

/// A validated grid with parsed covariance specs, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedGrid {
    pub n: usize,
    pub p_grid: Vec<f64>,
    /// (spec, label) pairs; the label is the textual form, used in reports.
    pub sigmas: Vec<(CovarianceSpec<f64>, String)>,
    pub k: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub seeds: SeedSpec,
    /// Requested methods in canonical order, deduplicated.
    pub methods: Vec<Method>,
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("bad config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn resolve(&self) -> Result<ResolvedGrid, HarnessError> {
        if self.p_grid.is_empty() || self.sigma_grid.is_empty() {
            return Err(HarnessError::Config("p_grid and sigma_grid must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HarnessError::Config(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.k == 0.0 || !self.k.is_finite() {
            return Err(HarnessError::Config(format!("k must be nonzero and finite, got {}", self.k)));
        }
        for &p in &self.p_grid {
            if !(p > 0.0 && p < 1.0) {
                return Err(HarnessError::Config(format!("p values must be in (0,1), got {p}")));
            }
        }
        let mut sigmas = Vec::with_capacity(self.sigma_grid.len());
        for text in &self.sigma_grid {
            let spec = CovarianceSpec::<f64>::parse(text, self.n)?;
            sigmas.push((spec, text.trim().to_string()));
        }
        let mut methods = Vec::new();
        for name in &self.methods {
            let m = Method::from_str(name).map_err(HarnessError::Config)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(HarnessError::Config("methods must be non-empty".into()));
        }
        methods.sort_by_key(|m| Method::ALL.iter().position(|a| a == m));
        Ok(ResolvedGrid {
            n: self.n,
            p_grid: self.p_grid.clone(),
            sigmas,
            k: self.k,
            alpha: self.alpha,
            replicates: self.replicates,
            seeds: SeedSpec::new(self.base_seed),
            methods,
        })
    }
}

/// Default seed for the `reproduce` grids.
pub const DEFAULT_BASE_SEED: u64 = 17;

/// The standard benchmark grids: tables 1-3 share the equicorrelated sweep
/// (n = 5000, p = 0.01..0.10, ρ = 0.2..0.8), tables 4-6 share the four-block
/// diagonal sweep. All columns of the report come out of either run.
pub fn paper_grid(table: u8, replicates: usize, base_seed: u64) -> Result<GridConfig, HarnessError> {
    let sigma_grid = match table {
        1..=3 => (2..=8).map(|r| format!("equi:0.{r}")).collect(),
        4..=6 => vec!["blocks:1250@0.25,1250@0.5,1250@0.15,1250@0.75".to_string()],
        other => {
            return Err(HarnessError::Config(format!("table must be 1..=6, got {other}")));
        }
    };
    Ok(GridConfig {
        n: 5000,
        p_grid: (1..=10).map(|i| i as f64 / 100.0).collect(),
        sigma_grid,
        k: 2.5,
        alpha: 0.05,
        replicates,
        base_seed,
        methods: all_method_names(),
    })
}
