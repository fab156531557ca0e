//! The two-group generative model: θ_i iid Bernoulli(p), X | θ ~ N(kθ, Σ).

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::covariance::{CholeskyFactor, CovError, CovarianceSpec};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("non-null proportion must satisfy 0 < p < 1, got {0}")]
    InvalidProportion(f64),
    #[error("mean shift k must be nonzero and finite, got {0}")]
    InvalidShift(f64),
    #[error("level must satisfy 0 < alpha < 1, got {0}")]
    InvalidAlpha(f64),
    #[error("covariance is {sigma_n}-dimensional but n = {n}")]
    DimensionMismatch { n: usize, sigma_n: usize },
    #[error(transparent)]
    Covariance(#[from] CovError),
}

/// Full oracle knowledge the procedures consume.
#[derive(Debug, Clone)]
pub struct ModelParams<T> {
    pub n: usize,
    /// Non-null proportion.
    pub p: T,
    /// Non-null mean shift.
    pub k: T,
    pub sigma: CovarianceSpec<T>,
    /// Target error-rate level.
    pub alpha: T,
}

impl<T: Real> ModelParams<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        if !(self.p > T::zero() && self.p < T::one()) {
            return Err(ModelError::InvalidProportion(f(self.p)));
        }
        if self.k == T::zero() || !self.k.is_finite() {
            return Err(ModelError::InvalidShift(f(self.k)));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(ModelError::InvalidAlpha(f(self.alpha)));
        }
        if self.sigma.n() != self.n {
            return Err(ModelError::DimensionMismatch { n: self.n, sigma_n: self.sigma.n() });
        }
        self.sigma.validate()?;
        Ok(())
    }
}

/// One replicate: latent states and observed statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraw<T> {
    /// 1 = non-null.
    pub theta: Vec<u8>,
    pub x: Vec<T>,
}

/// Deterministic per-replicate random streams.
///
/// Every (cell, replicate) pair owns an independent ChaCha8 stream: the
/// cipher key comes from `base_seed`, the stream id is `cell << 32 |
/// replicate`. Within a replicate the draw order is fixed — first the n
/// Bernoulli states, then the `noise_dim()` standard normals — so results are
/// bit-reproducible regardless of scheduling or worker count. Standard
/// normals use the ziggurat sampler (`rand_distr::StandardNormal`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub base_seed: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed }
    }

    /// The stream for one replicate of one grid cell.
    pub fn replicate_rng(&self, cell: u64, replicate: u64) -> ChaCha8Rng {
        debug_assert!(cell < (1 << 32), "cell index exceeds stream space");
        debug_assert!(replicate < (1 << 32), "replicate index exceeds stream space");
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream((cell << 32) | replicate);
        rng
    }
}

/// iid Bernoulli(p) states.
pub fn sample_states<T: Real, R: Rng + ?Sized>(n: usize, p: T, rng: &mut R) -> Vec<u8> {
    let p = p.to_f64().expect("p convertible to f64");
    assert!(p > 0.0 && p < 1.0, "need 0 < p < 1");
    let bern = Bernoulli::new(p).expect("valid probability");
    (0..n).map(|_| u8::from(bern.sample(rng))).collect()
}

/// x = kθ + F·z with z iid standard normal and F·Fᵀ = Σ.
pub fn sample_observations<T, R>(
    theta: &[u8],
    k: T,
    factor: &CholeskyFactor<T>,
    rng: &mut R,
) -> Vec<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    assert_eq!(theta.len(), factor.n(), "theta length does not match the factor dimension");
    let z: Vec<T> = (0..factor.noise_dim()).map(|_| rng.sample(StandardNormal)).collect();
    let mut x = factor.apply(&z);
    for (xi, &t) in x.iter_mut().zip(theta) {
        if t == 1 {
            *xi = *xi + k;
        }
    }
    x
}

/// One full replicate in the documented draw order (states, then noise).
pub fn sample_draw<T, R>(
    n: usize,
    p: T,
    k: T,
    factor: &CholeskyFactor<T>,
    rng: &mut R,
) -> SampleDraw<T>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let theta = sample_states(n, p, rng);
    let x = sample_observations(&theta, k, factor, rng);
    SampleDraw { theta, x }
}
