//! Config-driven simulation driver: sweep (p, Σ) grids, run seeded
//! replicates of all requested procedures on shared draws, aggregate, and
//! emit CSV reports.

pub mod config;
pub mod report;
pub mod verify;

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::covariance::{self, CovError};
use crate::metrics::{self, ConfusionCounts};
use crate::model::{self, ModelParams, SeedSpec};
use crate::oracle::{self, OracleContext, OracleError};
use crate::procedures::{self, Method};

pub use config::{paper_grid, GridConfig, ResolvedGrid, DEFAULT_BASE_SEED};
pub use report::{format_sig9, sort_reports, write_csv, CellReport, CSV_HEADER};

/// Failures classified by exit code: 1 config, 2 numerical, 3 I/O.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

impl From<CovError> for HarnessError {
    fn from(e: CovError) -> Self {
        match e {
            CovError::Io { source, .. } => HarnessError::Io(source),
            CovError::Parse { .. } | CovError::DimensionMismatch { .. } | CovError::EmptyBlocks
            | CovError::EmptyBlock { .. } => HarnessError::Config(e.to_string()),
            CovError::EquicorrelatedBound { .. }
            | CovError::BlockBound { .. }
            | CovError::Asymmetric { .. }
            | CovError::NonUnitDiagonal { .. }
            | CovError::NotPositiveDefinite { .. } => HarnessError::Numerical(e.to_string()),
        }
    }
}

impl From<model::ModelError> for HarnessError {
    fn from(e: model::ModelError) -> Self {
        match e {
            model::ModelError::Covariance(c) => c.into(),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<metrics::MetricsError> for HarnessError {
    fn from(e: metrics::MetricsError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(std::io::Error::other(e))
    }
}

fn method_slot(m: Method) -> usize {
    Method::ALL.iter().position(|a| *a == m).expect("known method")
}

/// Run one grid cell: build the covariance artifacts once, then draw
/// `replicates` seeded replicates. Every requested method sees the same
/// (θ, x) within a replicate (a paired comparison), and each replicate owns
/// the stream derived from (cell_index, replicate_index), so results do not
/// depend on scheduling or worker count.
pub fn run_cell(
    params: &ModelParams<f64>,
    replicates: usize,
    seeds: SeedSpec,
    cell_index: u64,
    methods: &[Method],
    sigma_label: &str,
) -> Result<Vec<CellReport>, HarnessError> {
    if replicates == 0 {
        return Err(HarnessError::Config("replicates must be >= 1".into()));
    }
    if methods.is_empty() {
        return Err(HarnessError::Config("methods must be non-empty".into()));
    }
    let cell_err = |e: HarnessError| match e {
        HarnessError::Numerical(msg) => HarnessError::Numerical(format!(
            "cell (sigma={sigma_label}, p={}): {msg}",
            params.p
        )),
        other => other,
    };
    params.validate().map_err(|e| cell_err(e.into()))?;

    let started = Instant::now();
    let factor = covariance::cholesky(&params.sigma).map_err(|e| cell_err(e.into()))?;
    let context: Option<OracleContext<f64>> = if methods.contains(&Method::Oracle) {
        let precision = covariance::precision(&params.sigma).map_err(|e| cell_err(e.into()))?;
        Some(oracle::build_context(precision, params.k, params.p).map_err(|e| cell_err(e.into()))?)
    } else {
        None
    };

    let per_replicate: Result<Vec<[Option<ConfusionCounts>; 3]>, HarnessError> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds.replicate_rng(cell_index, r as u64);
            let draw = model::sample_draw(params.n, params.p, params.k, &factor, &mut rng);
            let mut out: [Option<ConfusionCounts>; 3] = [None, None, None];
            for &m in methods {
                let decision = match m {
                    Method::Oracle => {
                        let ctx = context.as_ref().expect("context built for oracle");
                        let t = oracle::oracle_statistics(&draw.x, ctx)?;
                        procedures::oracle_procedure(&t, params.alpha)
                    }
                    Method::Bh => procedures::bh_procedure(&draw.x, params.alpha),
                    Method::Marginal => {
                        procedures::marginal_procedure(&draw.x, params.p, params.k, params.alpha)?
                    }
                };
                out[method_slot(m)] = Some(metrics::confusion(&decision, &draw.theta));
            }
            Ok(out)
        })
        .collect();
    let per_replicate = per_replicate.map_err(cell_err)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let mut reports = Vec::with_capacity(methods.len());
    for &m in methods {
        let counts: Vec<ConfusionCounts> =
            per_replicate.iter().map(|row| row[method_slot(m)].expect("method ran")).collect();
        reports.push(CellReport {
            method: m,
            sigma: sigma_label.to_string(),
            p: params.p,
            rates: metrics::aggregate(&counts)?,
            wall_time_s,
        });
    }
    Ok(reports)
}

/// Run the full cross product of a resolved grid. Cell indices (and with
/// them the random streams) are assigned in config order; the returned rows
/// are sorted by (sigma label, p, method).
pub fn run_resolved_grid(grid: &ResolvedGrid) -> Result<Vec<CellReport>, HarnessError> {
    let mut reports = Vec::new();
    for (sigma_idx, (sigma, label)) in grid.sigmas.iter().enumerate() {
        for (p_idx, &p) in grid.p_grid.iter().enumerate() {
            let cell_index = (sigma_idx * grid.p_grid.len() + p_idx) as u64;
            let params = ModelParams {
                n: grid.n,
                p,
                k: grid.k,
                sigma: sigma.clone(),
                alpha: grid.alpha,
            };
            reports.extend(run_cell(
                &params,
                grid.replicates,
                grid.seeds,
                cell_index,
                &grid.methods,
                label,
            )?);
        }
    }
    sort_reports(&mut reports);
    Ok(reports)
}

/// Load, resolve, run, and write a config-driven grid to a CSV file.
pub fn run_grid(config: &GridConfig, out_path: &std::path::Path) -> Result<(), HarnessError> {
    let grid = config.resolve()?;
    let reports = run_resolved_grid(&grid)?;
    let file = std::fs::File::create(out_path)?;
    write_csv(&reports, std::io::BufWriter::new(file))
}
