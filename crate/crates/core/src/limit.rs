//! Limit laws of the scaled order statistics `D_(N-k+1) / u_N`.
//!
//! With `rho = x^(1-tau)`, the points `{D_j / u_N}` converge to a Poisson
//! process whose count above level `x` is Poisson(`rho`). The `k`-th largest
//! scaled degree `xi_k` therefore satisfies
//! `P(xi_k < x) = sum_{r<k} rho^r / r! * exp(-rho)`, with the Fréchet law
//! `exp(-x^(1-tau))` for `k = 1`.

use crate::error::{input, Result};

/// Largest `k` accepted by the joint CDF enumeration.
pub const MAX_JOINT_K: usize = 8;

/// Law of the `k`-th largest limit point `xi_k` (`k = 1` is the maximum).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiMarginal {
    tau: f64,
    k: usize,
}

impl XiMarginal {
    pub fn new(tau: f64, k: usize) -> Result<Self> {
        if !(tau > 1.0 && tau < 2.0) {
            return input(format!("tau = {tau} is outside (1, 2)"));
        }
        if k < 1 {
            return input("order-statistic index k must be >= 1");
        }
        Ok(XiMarginal { tau, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `P(xi_k < x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return input(format!("x = {x} must be > 0"));
        }
        Ok(poisson_cdf(x.powf(1.0 - self.tau), self.k - 1))
    }
}

/// `P(Poisson(mean) <= m)` by forward summation of terms.
fn poisson_cdf(mean: f64, m: usize) -> f64 {
    if mean.is_infinite() {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for r in 1..=m {
        term *= mean / r as f64;
        sum += term;
    }
    (sum * (-mean).exp()).min(1.0)
}

pub fn xi_marginal_cdf(m: XiMarginal, x: f64) -> Result<f64> {
    m.cdf(x)
}

/// Joint CDF `P(xi_1 < y_1, ..., xi_k < y_k)` for `y_1 > ... > y_k > 0`.
///
/// Writing `rho_i = y_i^(1-tau)` (increasing in `i`, `rho_0 = 0`) and `l_i`
/// for the number of limit points in `[y_i, y_{i-1})`, the event requires
/// `l_1 + ... + l_i <= i - 1` for every `i`. The cumulative counts
/// `r_i = l_1 + ... + l_i` run over the weakly increasing tuples with
/// `r_i < i`, each contributing
/// `prod_i (rho_i - rho_{i-1})^{l_i} / l_i! * exp(-rho_k)`.
pub fn xi_joint_cdf(tau: f64, y: &[f64]) -> Result<f64> {
    if !(tau > 1.0 && tau < 2.0) {
        return input(format!("tau = {tau} is outside (1, 2)"));
    }
    let k = y.len();
    if k == 0 {
        return input("joint CDF needs at least one coordinate");
    }
    if k > MAX_JOINT_K {
        return input(format!("joint CDF supports k <= {MAX_JOINT_K}, got {k}"));
    }
    if y.iter().any(|&v| !(v > 0.0)) {
        return input("joint CDF arguments must be strictly positive");
    }
    if y.windows(2).any(|w| !(w[0] > w[1])) {
        return input("joint CDF arguments must be strictly decreasing");
    }
    let rho: Vec<f64> = y.iter().map(|&v| v.powf(1.0 - tau)).collect();
    let gaps: Vec<f64> = rho
        .iter()
        .scan(0.0, |prev, &r| {
            let g = r - *prev;
            *prev = r;
            Some(g)
        })
        .collect();
    let sum = enumerate_counts(&gaps, 0, 0);
    Ok((sum * (-rho[k - 1]).exp()).clamp(0.0, 1.0))
}

/// Sum over admissible count increments for bands `i..k`, given the
/// cumulative count `used` of points in earlier bands.
fn enumerate_counts(gaps: &[f64], i: usize, used: usize) -> f64 {
    if i == gaps.len() {
        return 1.0;
    }
    // band i (0-based) may bring the cumulative count up to i
    let mut total = 0.0;
    let mut weight = 1.0;
    for extra in 0..=(i - used) {
        if extra > 0 {
            weight *= gaps[i] / extra as f64;
        }
        total += weight * enumerate_counts(gaps, i + 1, used + extra);
    }
    total
}

/// `[P(xi_k < x)]` for `k = 1..=k_max`; non-decreasing in `k` and tending
/// to one, since `xi_k -> 0` in probability.
pub fn xi_marginal_tends_to_zero(tau: f64, x: f64, k_max: usize) -> Result<Vec<f64>> {
    if k_max < 1 {
        return input("k_max must be >= 1");
    }
    (1..=k_max)
        .map(|k| XiMarginal::new(tau, k)?.cdf(x))
        .collect()
}
