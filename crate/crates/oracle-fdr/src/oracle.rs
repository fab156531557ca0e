//! Per-hypothesis statistics: the closed-form posterior-null score driven by
//! the precision matrix, the per-coordinate marginal lfdr, and an exact
//! enumeration posterior for small n.
//!
//! The closed-form score for hypothesis i is
//!
//! ```text
//! T_i = 1 / (1 + (p/(1−p))·U_i),
//! ln U_i = −(k²/2)·t_{i,i} + k·(Σ⁻¹x)_i + S_i,
//! S_i    = Σ_{j≠i} ln(p·e^{−k²·t_{j,i}} + (1−p)),
//! ```
//!
//! where t_{·,i} is the i-th column of Σ⁻¹. The interaction sum S_i averages
//! the coupling terms over the *prior* state distribution, which makes the
//! whole evaluation O(n²) per draw (O(n) for structured Σ) after an O(n²)
//! context build; the exact posterior (see [`brute_force_posterior`]) instead
//! weights states by the data and agrees with the closed form exactly when
//! Σ⁻¹ is diagonal. Everything is evaluated in log space: linear-space
//! products of n ≈ 5000 terms would overflow or underflow long before they
//! finish.

use thiserror::Error;

use crate::covariance::PrecisionMatrix;
use crate::linalg::{self, SquareMatrix};
use crate::math::{log_sum_exp, log_sum_exp_slice, sigmoid};
use crate::scalar::Real;

/// Enumeration bound for the exact posterior: 2^20 states is seconds of
/// work, anything beyond explodes in time and memory.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("non-null proportion must satisfy 0 < p < 1, got {0}")]
    InvalidProportion(f64),
    #[error("mean shift k must be nonzero and finite, got {0}")]
    InvalidShift(f64),
    #[error("statistic vector contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("statistic {value} at index {index} falls outside the {scale:?} range")]
    OutOfRange { index: usize, value: f64, scale: Scale },
    #[error("enumeration posterior limited to n <= {ENUMERATION_LIMIT}, got n = {0}")]
    EnumerationBound(usize),
    #[error("covariance is not positive definite: leading minor {0} is not positive")]
    NotPositiveDefinite(usize),
}

/// Which scale a statistic vector lives on. All three order hypotheses the
/// same way: smaller means more significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// P(θ_i = 0 | X), in (0,1) up to floating-point saturation.
    PosteriorNull,
    /// One-sided p-value in [0,1].
    PValue,
    /// Per-coordinate two-group posterior-null probability.
    MarginalLfdr,
}

/// Per-hypothesis scores on a declared scale.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticVector<T> {
    values: Vec<T>,
    scale: Scale,
}

impl<T: Real> StatisticVector<T> {
    /// Validates finiteness and the scale range ([0,1] for every scale;
    /// exact 0/1 can only arise from floating-point saturation and is
    /// accepted — nothing is clipped here or anywhere upstream).
    pub fn new(values: Vec<T>, scale: Scale) -> Result<Self, OracleError> {
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(OracleError::NonFinite(index));
            }
            if v < T::zero() || v > T::one() {
                return Err(OracleError::OutOfRange {
                    index,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    scale,
                });
            }
        }
        Ok(Self { values, scale })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Everything that depends only on (Σ⁻¹, k, p), built once per covariance and
/// shared read-only across draws and workers.
#[derive(Debug, Clone)]
pub struct OracleContext<T> {
    precision: PrecisionMatrix<T>,
    k: T,
    p: T,
    log_prior_odds: T,
    half_k2: T,
    diag: Vec<T>,
    column_logterm_sums: Vec<T>,
}

impl<T: Real> OracleContext<T> {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn precision(&self) -> &PrecisionMatrix<T> {
        &self.precision
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn log_prior_odds(&self) -> T {
        self.log_prior_odds
    }

    /// S_i for each column.
    pub fn column_logterm_sums(&self) -> &[T] {
        &self.column_logterm_sums
    }
}

/// Precompute the interaction sums S_i in one sweep over the precision
/// entries. Each term ln(p·e^w + (1−p)) with w = −k²·t is evaluated as
/// logsumexp(ln p + w, ln(1−p)), which survives |w| in the hundreds.
pub fn build_context<T: Real>(
    precision: PrecisionMatrix<T>,
    k: T,
    p: T,
) -> Result<OracleContext<T>, OracleError> {
    if !(p > T::zero() && p < T::one()) {
        return Err(OracleError::InvalidProportion(p.to_f64().unwrap_or(f64::NAN)));
    }
    if k == T::zero() || !k.is_finite() {
        return Err(OracleError::InvalidShift(k.to_f64().unwrap_or(f64::NAN)));
    }
    let ln_p = p.ln();
    let ln_1mp = (-p).ln_1p();
    let k2 = k * k;
    let term = |t: T| {
        if t == T::zero() {
            T::zero() // ln(p + (1-p)) exactly
        } else {
            log_sum_exp(ln_p - k2 * t, ln_1mp)
        }
    };
    let column_logterm_sums = precision.column_offdiag_sums(term);
    if let Some(index) = column_logterm_sums.iter().position(|s| !s.is_finite()) {
        return Err(OracleError::NonFinite(index));
    }
    let diag = precision.diag_vec();
    if let Some(index) = diag.iter().position(|d| !d.is_finite()) {
        return Err(OracleError::NonFinite(index));
    }
    Ok(OracleContext {
        precision,
        k,
        p,
        log_prior_odds: ln_p - ln_1mp,
        half_k2: k2 / T::of(2.0),
        diag,
        column_logterm_sums,
    })
}

/// ln U_i = −(k²/2)·t_{i,i} + k·(Σ⁻¹x)_i + S_i for all i, sharing the single
/// matrix-vector product s = Σ⁻¹x.
///
/// Panics if `x.len()` does not match the context dimension.
pub fn log_u<T: Real>(x: &[T], ctx: &OracleContext<T>) -> Vec<T> {
    assert_eq!(x.len(), ctx.n(), "observation length does not match the context");
    let s = ctx.precision.mul_vec(x);
    (0..x.len())
        .map(|i| -ctx.half_k2 * ctx.diag[i] + ctx.k * s[i] + ctx.column_logterm_sums[i])
        .collect()
}

/// The posterior-null score T_i = σ(−(ln(p/(1−p)) + ln U_i)), i.e.
/// 1/(1 + (p/(1−p))U_i) evaluated in the stable sigmoid branch.
pub fn oracle_statistics<T: Real>(
    x: &[T],
    ctx: &OracleContext<T>,
) -> Result<StatisticVector<T>, OracleError> {
    let values = log_u(x, ctx)
        .into_iter()
        .map(|lu| sigmoid(-(ctx.log_prior_odds + lu)))
        .collect();
    StatisticVector::new(values, Scale::PosteriorNull)
}

/// Per-coordinate marginal lfdr under the two-group mixture with N(0,1) and
/// N(k,1) components:
/// (1−p)φ(x)/((1−p)φ(x) + p·φ(x−k)) = σ(−(ln(p/(1−p)) + k·x − k²/2)).
pub fn marginal_lfdr<T: Real>(x: &[T], p: T, k: T) -> Result<StatisticVector<T>, OracleError> {
    if !(p > T::zero() && p < T::one()) {
        return Err(OracleError::InvalidProportion(p.to_f64().unwrap_or(f64::NAN)));
    }
    if k == T::zero() || !k.is_finite() {
        return Err(OracleError::InvalidShift(k.to_f64().unwrap_or(f64::NAN)));
    }
    let lpo = p.ln() - (-p).ln_1p();
    let half_k2 = k * k / T::of(2.0);
    let values = x.iter().map(|&xi| sigmoid(-(lpo + k * xi - half_k2))).collect();
    StatisticVector::new(values, Scale::MarginalLfdr)
}

/// Λ_i = T_i/(1−T_i), strictly increasing in T_i.
///
/// Expects posterior-scale inputs in (0,1); a saturated T_i = 1 yields +∞.
pub fn bayes_lambda<T: Real>(t: &StatisticVector<T>) -> Vec<T> {
    t.values().iter().map(|&v| v / (T::one() - v)).collect()
}

/// Exact P(θ_i = 0 | x) by enumerating all 2ⁿ latent states.
///
/// Each state θ gets log weight Σ_j[θ_j ln p + (1−θ_j) ln(1−p)] − ½‖L⁻¹(x−kθ)‖²
/// with Σ = L·Lᵀ (the density constant cancels); per-hypothesis posteriors
/// are ratios of log-sum-exp accumulations over the states with θ_i = 0.
/// This is the verification oracle for the closed form: independent of the
/// precision-matrix route, cost O(2ⁿ·n²), refused above n = 20.
pub fn brute_force_posterior<T: Real>(
    x: &[T],
    sigma: &SquareMatrix<T>,
    k: T,
    p: T,
) -> Result<StatisticVector<T>, OracleError> {
    let n = sigma.n();
    assert_eq!(x.len(), n, "observation length does not match sigma");
    if n > ENUMERATION_LIMIT {
        return Err(OracleError::EnumerationBound(n));
    }
    if !(p > T::zero() && p < T::one()) {
        return Err(OracleError::InvalidProportion(p.to_f64().unwrap_or(f64::NAN)));
    }
    let l = linalg::cholesky(sigma).map_err(OracleError::NotPositiveDefinite)?;
    let ln_p = p.ln();
    let ln_1mp = (-p).ln_1p();

    let states = 1usize << n;
    let mut log_weights = Vec::with_capacity(states);
    let mut delta = vec![T::zero(); n];
    for s in 0..states {
        let mut log_prior = T::zero();
        for (j, d) in delta.iter_mut().enumerate() {
            if s >> j & 1 == 1 {
                *d = x[j] - k;
                log_prior = log_prior + ln_p;
            } else {
                *d = x[j];
                log_prior = log_prior + ln_1mp;
            }
        }
        let y = linalg::solve_lower(&l, &delta);
        let quad: T = y.iter().map(|&v| v * v).sum();
        log_weights.push(log_prior - quad / T::of(2.0));
    }

    let denominator = log_sum_exp_slice(&log_weights);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        // logsumexp over the states with θ_i = 0, max-shifted.
        let mut m = T::neg_infinity();
        for (s, &w) in log_weights.iter().enumerate() {
            if s >> i & 1 == 0 && w > m {
                m = w;
            }
        }
        let mut acc = T::zero();
        for (s, &w) in log_weights.iter().enumerate() {
            if s >> i & 1 == 0 {
                acc = acc + (w - m).exp();
            }
        }
        values.push((m + acc.ln() - denominator).exp());
    }
    StatisticVector::new(values, Scale::PosteriorNull)
}
