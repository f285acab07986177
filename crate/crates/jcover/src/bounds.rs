//! Closed-form counting: radius-r neighborhood sizes and the sphere-covering
//! lower bound, valid for any parameters the core accepts.

use crate::core::{binomial, Params};

/// The counting bracket around the minimum family size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundSummary {
    pub params: Params,
    /// `N = |{S : |S ∩ B| >= threshold}|` for any fixed block B.
    pub neighborhood_size: u64,
    /// `C(n, k)`.
    pub total_subsets: u64,
    /// `ceil(C(n, k) / N)`.
    pub lower_bound: u64,
    /// Size of a verified covering family, when one is known.
    pub upper_bound_known: Option<u64>,
}

/// Number of k-subsets within covering radius of a fixed block:
/// `Σ_{i=threshold}^{k} C(k, i) · C(n-k, k-i)`.
///
/// Independent of which block is fixed; `C(a, b) = 0` for `b > a` makes the
/// formula degrade gracefully for small ground sets.
pub fn neighborhood_size(params: &Params) -> u64 {
    let k = params.k();
    let n = params.n();
    let mut acc: u128 = 0;
    for i in params.threshold()..=k {
        acc += binomial(k, i) as u128 * binomial(n - k, k - i) as u128;
    }
    acc as u64
}

/// Sphere-covering bound: any family meeting every k-subset in `threshold`
/// elements needs at least `ceil(C(n,k) / N)` blocks.
///
/// The ceiling is computed in integer arithmetic; no floating point anywhere.
pub fn sphere_covering_lower_bound(params: &Params) -> BoundSummary {
    let neighborhood = neighborhood_size(params);
    let total = params.total_subsets();
    let lower = (total as u128).div_ceil(neighborhood as u128) as u64;
    BoundSummary {
        params: *params,
        neighborhood_size: neighborhood,
        total_subsets: total,
        lower_bound: lower,
        upper_bound_known: None,
    }
}

impl BoundSummary {
    pub fn with_upper_bound(mut self, size: u64) -> Self {
        self.upper_bound_known = Some(size);
        self
    }
}
