//! Closed form versus exact enumeration on random small instances.
//!
//! The sweep draws random dense positive-definite correlation matrices
//! (random-factor construction), samples (θ, x) from the model, and compares
//! [`crate::oracle::oracle_statistics`] against
//! [`crate::oracle::brute_force_posterior`] coordinate by coordinate. The two
//! agree exactly when the precision matrix is diagonal; under correlation the
//! closed form's prior-averaged interaction product deviates from the exact
//! posterior, and the report carries the measured maximum, split by regime.

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::covariance::{self, CovarianceSpec};
use crate::harness::HarnessError;
use crate::linalg::SquareMatrix;
use crate::model::{self, SeedSpec};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    pub n: usize,
    pub p: f64,
    pub k: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    pub instances: usize,
    /// Max relative error over random correlated Σ.
    pub max_rel_error: f64,
    /// Max relative error with Σ = I on the same (n, p, k, x) stream.
    pub max_rel_error_diagonal: f64,
    pub worst: WorstCase,
}

/// Random dense correlation matrix: A = G·Gᵀ + 0.05n·I scaled to unit
/// diagonal, G with iid standard normal entries.
fn random_correlation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SquareMatrix<f64> {
    let mut g = vec![0.0f64; n * n];
    for v in &mut g {
        *v = StandardNormal.sample(rng);
    }
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += g[i * n + k] * g[j * n + k];
            }
            a[(i, j)] = s;
        }
    }
    let ridge = 0.05 * n as f64;
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].sqrt()).collect();
    let mut c = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = a[(i, j)] / (d[i] * d[j]);
        }
    }
    // exact unit diagonal and symmetry regardless of rounding
    for i in 0..n {
        c[(i, i)] = 1.0;
        for j in 0..i {
            let m = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    c
}

fn max_rel_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

/// Run `instances` random comparisons with n ∈ 1..=10, p ∈ {0.05, 0.3, 0.7},
/// k ∈ {−1.5, 2.5}.
pub fn equivalence_sweep(instances: usize, seed: u64) -> Result<EquivalenceReport, HarnessError> {
    let seeds = SeedSpec::new(seed);
    let ps = [0.05, 0.3, 0.7];
    let ks = [-1.5, 2.5];
    let mut max_corr = 0.0f64;
    let mut max_diag = 0.0f64;
    let mut worst = WorstCase { n: 0, p: 0.0, k: 0.0, rel_error: 0.0 };
    for i in 0..instances {
        let mut rng = seeds.replicate_rng(0, i as u64);
        let n = 1 + (i % 10);
        let p = ps[i % ps.len()];
        let k = ks[i % ks.len()];
        let sigma = random_correlation(n, &mut rng);
        let spec = CovarianceSpec::Dense { matrix: sigma.clone() };
        spec.validate().map_err(HarnessError::from)?;

        let factor = covariance::cholesky(&spec)?;
        let draw = model::sample_draw(n, p, k, &factor, &mut rng);
        let closed = {
            let precision = covariance::precision(&spec)?;
            let ctx = oracle::build_context(precision, k, p)?;
            oracle::oracle_statistics(&draw.x, &ctx)?
        };
        let brute = oracle::brute_force_posterior(&draw.x, &sigma, k, p)?;
        let rel = max_rel_error(closed.values(), brute.values());
        if rel > max_corr {
            max_corr = rel;
            worst = WorstCase { n, p, k, rel_error: rel };
        }

        // same draw pushed through the diagonal regime
        let ident = CovarianceSpec::Identity { n };
        let ctx = oracle::build_context(covariance::precision(&ident)?, k, p)?;
        let closed_i = oracle::oracle_statistics(&draw.x, &ctx)?;
        let brute_i = oracle::brute_force_posterior(&draw.x, &SquareMatrix::identity(n), k, p)?;
        max_diag = max_diag.max(max_rel_error(closed_i.values(), brute_i.values()));
    }
    Ok(EquivalenceReport {
        instances,
        max_rel_error: max_corr,
        max_rel_error_diagonal: max_diag,
        worst,
    })
}
