//! Confusion counts per replicate and their aggregation into error rates.

use thiserror::Error;

use crate::procedures::DecisionResult;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty replicate list")]
    Empty,
}

/// Rejection/acceptance counts for one replicate.
///
/// v = false rejections, r = rejections, w = false acceptances,
/// a = acceptances; r + a = n always.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub v: usize,
    pub r: usize,
    pub w: usize,
    pub a: usize,
}

/// Count the confusion cells of one decision against the latent states.
pub fn confusion(decision: &DecisionResult, theta: &[u8]) -> ConfusionCounts {
    assert_eq!(decision.reject.len(), theta.len(), "decision/state length mismatch");
    let mut v = 0;
    let mut r = 0;
    let mut w = 0;
    for (&rej, &t) in decision.reject.iter().zip(theta) {
        if rej {
            r += 1;
            if t == 0 {
                v += 1;
            }
        } else if t == 1 {
            w += 1;
        }
    }
    ConfusionCounts { v, r, w, a: theta.len() - r }
}

/// Aggregated error rates over replicates.
///
/// `fdr`/`fnr` are means of the per-replicate ratios V/R and W/A with the
/// 0/0 → 0 convention; `mfdr`/`mfnr` are the pooled ratios ΣV/ΣR and ΣW/ΣA
/// (again 0 when the denominator is 0). The pooled ratio dominates the mean
/// ratio when every denominator is positive; the flags record whether that
/// precondition held so downstream checks can condition on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub fdr: f64,
    pub se_fdr: f64,
    pub fnr: f64,
    pub se_fnr: f64,
    pub mfdr: f64,
    pub mfnr: f64,
    pub mean_rejections: f64,
    pub replicates: usize,
    pub all_rejections_positive: bool,
    pub all_acceptances_positive: bool,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Mean and standard error (sample sd / √m; 0 when m = 1).
fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

pub fn aggregate(counts: &[ConfusionCounts]) -> Result<ErrorRates, MetricsError> {
    if counts.is_empty() {
        return Err(MetricsError::Empty);
    }
    let fdps: Vec<f64> = counts.iter().map(|c| ratio(c.v, c.r)).collect();
    let fnps: Vec<f64> = counts.iter().map(|c| ratio(c.w, c.a)).collect();
    let (fdr, se_fdr) = mean_se(&fdps);
    let (fnr, se_fnr) = mean_se(&fnps);
    let (sv, sr, sw, sa) = counts.iter().fold((0, 0, 0, 0), |(v, r, w, a), c| {
        (v + c.v, r + c.r, w + c.w, a + c.a)
    });
    Ok(ErrorRates {
        fdr,
        se_fdr,
        fnr,
        se_fnr,
        mfdr: ratio(sv, sr),
        mfnr: ratio(sw, sa),
        mean_rejections: counts.iter().map(|c| c.r as f64).sum::<f64>() / counts.len() as f64,
        replicates: counts.len(),
        all_rejections_positive: counts.iter().all(|c| c.r > 0),
        all_acceptances_positive: counts.iter().all(|c| c.a > 0),
    })
}

/// Weighted classification loss
/// L = (1/n)·Σ[δ_i(1−θ_i) + λ·θ_i(1−δ_i)], λ > 0.
pub fn classification_loss<T: Real>(decision: &DecisionResult, theta: &[u8], lambda: T) -> T {
    assert_eq!(decision.reject.len(), theta.len(), "decision/state length mismatch");
    assert!(lambda > T::zero(), "loss weight must be positive");
    let mut loss = T::zero();
    for (&rej, &t) in decision.reject.iter().zip(theta) {
        if rej && t == 0 {
            loss = loss + T::one();
        } else if !rej && t == 1 {
            loss = loss + lambda;
        }
    }
    loss / T::of_usize(theta.len())
}
