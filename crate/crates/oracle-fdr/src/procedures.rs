//! Decision procedures: running-average step-up on posterior-scale
//! statistics, the Benjamini–Hochberg rule on one-sided p-values, and the
//! marginal-lfdr variant of the step-up rule.

use std::fmt;
use std::str::FromStr;

use crate::math::normal_sf;
use crate::oracle::{self, OracleError, Scale, StatisticVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Oracle,
    Bh,
    Marginal,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Oracle, Method::Bh, Method::Marginal];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Bh => "bh",
            Method::Marginal => "marginal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "oracle" => Ok(Method::Oracle),
            "bh" => Ok(Method::Bh),
            "marginal" => Ok(Method::Marginal),
            other => Err(format!("unknown method `{other}` (expected oracle, bh, marginal)")),
        }
    }
}

/// Rejection decisions for one draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionResult {
    /// true = reject H_{0,i}.
    pub reject: Vec<bool>,
    pub num_rejected: usize,
    /// The rank k selected by the step-up rule (0 when nothing is rejected).
    pub cutoff_rank: usize,
    pub method: Method,
}

/// Indices 0..n sorted ascending by (value, original index). The index
/// tiebreak makes decisions on tied statistics deterministic.
fn sorted_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("statistics must be comparable (finite)")
            .then(a.cmp(&b))
    });
    order
}

fn step_up_rank<T: Real>(values: &[T], order: &[usize], alpha: T) -> usize {
    let mut best = 0;
    let mut sum = T::zero();
    for (rank, &idx) in order.iter().enumerate() {
        sum = sum + values[idx];
        // running mean <= alpha, multiplied out to avoid a division per rank
        if sum <= alpha * T::of_usize(rank + 1) {
            best = rank + 1;
        }
    }
    best
}

/// k = max{ l : (1/l)·Σ_{i≤l} v_{(i)} ≤ α } over the ascending order
/// statistics; 0 when even the smallest value fails.
pub fn step_up_threshold<T: Real>(values: &[T], alpha: T) -> usize {
    step_up_rank(values, &sorted_order(values), alpha)
}

fn decide_from_order(n: usize, order: &[usize], k: usize, method: Method) -> DecisionResult {
    let mut reject = vec![false; n];
    for &idx in &order[..k] {
        reject[idx] = true;
    }
    DecisionResult { reject, num_rejected: k, cutoff_rank: k, method }
}

fn step_up_decide<T: Real>(values: &[T], alpha: T, method: Method) -> DecisionResult {
    let order = sorted_order(values);
    let k = step_up_rank(values, &order, alpha);
    decide_from_order(values.len(), &order, k, method)
}

/// Step-up rule on posterior-scale statistics: reject the k smallest, k from
/// [`step_up_threshold`].
pub fn oracle_procedure<T: Real>(t: &StatisticVector<T>, alpha: T) -> DecisionResult {
    assert!(
        matches!(t.scale(), Scale::PosteriorNull | Scale::MarginalLfdr),
        "step-up rule expects posterior-scale statistics"
    );
    step_up_decide(t.values(), alpha, Method::Oracle)
}

fn bh_rank_ordered<T: Real>(pvalues: &[T], order: &[usize], alpha: T) -> usize {
    let n = T::of_usize(pvalues.len());
    let mut best = 0;
    for (rank, &idx) in order.iter().enumerate() {
        // p_(rank+1) <= (rank+1)·α/n, multiplied out
        if pvalues[idx] * n <= alpha * T::of_usize(rank + 1) {
            best = rank + 1;
        }
    }
    best
}

/// Largest rank l with p_(l) ≤ l·α/n (0 if none), the BH step-up.
pub fn bh_rank<T: Real>(pvalues: &[T], alpha: T) -> usize {
    bh_rank_ordered(pvalues, &sorted_order(pvalues), alpha)
}

/// Benjamini–Hochberg on one-sided p-values p_i = P(Z > x_i): the
/// alternatives shift the mean upward, so large positive x is the evidence
/// direction and no absolute values are taken.
pub fn bh_procedure<T: Real>(x: &[T], alpha: T) -> DecisionResult {
    let pvalues: Vec<T> = x.iter().map(|&xi| normal_sf(xi)).collect();
    let order = sorted_order(&pvalues);
    let k = bh_rank_ordered(&pvalues, &order, alpha);
    decide_from_order(pvalues.len(), &order, k, Method::Bh)
}

/// Marginal procedure: per-coordinate lfdr scores fed through the same
/// running-average step-up rule.
pub fn marginal_procedure<T: Real>(
    x: &[T],
    p: T,
    k: T,
    alpha: T,
) -> Result<DecisionResult, OracleError> {
    let m = oracle::marginal_lfdr(x, p, k)?;
    Ok(step_up_decide(m.values(), alpha, Method::Marginal))
}
