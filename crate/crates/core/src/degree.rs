//! Degree distribution, samplers and the normalizing sequence `u_N`.
//!
//! The default law is the integer power law `D = ceil(U^(-1/(tau-1)))` with
//! `U` uniform on `(0, 1)`, which gives `P(D > k) = k^(1-tau)` for every
//! integer `k >= 1` and never produces a zero degree. An optional truncation
//! exponent `alpha` conditions every draw on `D < N^alpha`.

use std::fmt;
use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;

use crate::error::{input, Error, Result};

/// Degrees are computed in `f64` and clamped here; `2^53` is the largest
/// integer below which every `f64` integer is exact.
pub const DEFAULT_DEGREE_CAP: u64 = 1 << 53;

/// User-supplied inverse CDF: maps `u in (0, 1)` to a positive degree.
pub type InverseCdf = Arc<dyn Fn(f64) -> u64 + Send + Sync>;

#[derive(Clone)]
pub struct DegreeLaw {
    tau: f64,
    truncation: Option<f64>,
    inverse_cdf: Option<InverseCdf>,
    degree_cap: u64,
}

impl fmt::Debug for DegreeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DegreeLaw")
            .field("tau", &self.tau)
            .field("truncation", &self.truncation)
            .field("custom_inverse_cdf", &self.inverse_cdf.is_some())
            .field("degree_cap", &self.degree_cap)
            .finish()
    }
}

/// A single degree draw together with whether the hard cap was applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub value: u64,
    pub capped: bool,
}

impl DegreeLaw {
    /// Pure power law with `1 - F(k) = k^(1-tau)`.
    pub fn power_law(tau: f64) -> Result<Self> {
        if !(tau > 1.0 && tau < 2.0) {
            return input(format!(
                "tau = {tau} is outside the supported range (1, 2)"
            ));
        }
        Ok(DegreeLaw {
            tau,
            truncation: None,
            inverse_cdf: None,
            degree_cap: DEFAULT_DEGREE_CAP,
        })
    }

    /// Condition every draw on `D < N^alpha`. `alpha = +inf` is accepted and
    /// behaves exactly like the unconditioned law.
    pub fn with_truncation(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return input(format!("truncation exponent alpha = {alpha} must be > 0"));
        }
        self.truncation = Some(alpha);
        Ok(self)
    }

    /// Replace the default sampler by a custom inverse CDF. Tail, quantile
    /// and `u_N` computations keep using the reference power law.
    pub fn with_inverse_cdf(mut self, f: InverseCdf) -> Self {
        self.inverse_cdf = Some(f);
        self
    }

    pub fn with_degree_cap(mut self, cap: u64) -> Result<Self> {
        if cap == 0 || cap > DEFAULT_DEGREE_CAP {
            return input(format!("degree cap must lie in [1, 2^53], got {cap}"));
        }
        self.degree_cap = cap;
        Ok(self)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    pub fn degree_cap(&self) -> u64 {
        self.degree_cap
    }

    pub fn is_conditioned(&self) -> bool {
        self.truncation.is_some()
    }

    /// Truncation horizon `N^alpha`, if the law is conditioned.
    pub fn horizon(&self, n: usize) -> Option<f64> {
        self.truncation.map(|alpha| (n as f64).powf(alpha))
    }

    /// Inverse-transform draw from the unconditioned law.
    pub fn sample_degree(&self, u: f64) -> Result<Draw> {
        if !(u > 0.0 && u < 1.0) {
            return input(format!("uniform variate u = {u} must lie strictly inside (0, 1)"));
        }
        Ok(self.degree_from_uniform(u))
    }

    fn degree_from_uniform(&self, u: f64) -> Draw {
        if let Some(f) = &self.inverse_cdf {
            let v = f(u);
            return if v > self.degree_cap {
                Draw { value: self.degree_cap, capped: true }
            } else {
                Draw { value: v, capped: false }
            };
        }
        let x = u.powf(-1.0 / (self.tau - 1.0)).ceil();
        if !x.is_finite() || x >= self.degree_cap as f64 {
            Draw { value: self.degree_cap, capped: true }
        } else {
            Draw { value: x as u64, capped: false }
        }
    }

    /// One draw from the law as configured: unconditioned, or conditioned on
    /// `D < N^alpha` by rejection.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Draw {
        match self.horizon(n) {
            None => self.degree_from_uniform(rng.sample(Open01)),
            Some(h) => self.rejection_draw(h, rng),
        }
    }

    /// Draw from `P(D^(N) = k) = f_k / P(D < N^alpha)`.
    pub fn sample_degree_conditioned<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Draw> {
        if n < 2 {
            return input("conditioned sampling needs N >= 2");
        }
        match self.horizon(n) {
            Some(h) => Ok(self.rejection_draw(h, rng)),
            None => Err(Error::Usage(
                "conditioned sampling requires a truncation exponent".into(),
            )),
        }
    }

    fn rejection_draw<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Draw {
        loop {
            let d = self.degree_from_uniform(rng.sample(Open01));
            if (d.value as f64) < horizon {
                return d;
            }
        }
    }

    /// Draw `N` i.i.d. degrees and apply the parity correction.
    pub fn sample_sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DegreeSequence> {
        if n < 2 {
            return input(format!("a degree sequence needs N >= 2 nodes, got {n}"));
        }
        let mut capped = false;
        let raw: Vec<u64> = (0..n)
            .map(|_| {
                let d = self.sample(n, rng);
                capped |= d.capped;
                d.value
            })
            .collect();
        let mut seq = DegreeSequence::from_raw(raw)?;
        seq.capped = capped;
        Ok(seq)
    }

    /// Reference tail `1 - F(k) = k^(1-tau)` of the unconditioned law.
    pub fn tail(&self, k: u64) -> Result<f64> {
        if k < 1 {
            return input("tail is defined for k >= 1");
        }
        Ok(self.tail_at(k as f64))
    }

    fn tail_at(&self, x: f64) -> f64 {
        if x < 1.0 {
            1.0
        } else {
            x.powf(1.0 - self.tau)
        }
    }

    /// Tail of the law conditioned on `D < N^alpha`:
    /// `(P(D > k) - P(D >= N^alpha))+ / P(D < N^alpha)`.
    /// Falls back to [`DegreeLaw::tail`] for unconditioned laws.
    pub fn conditioned_tail(&self, k: u64, n: usize) -> Result<f64> {
        let plain = self.tail(k)?;
        let Some(h) = self.horizon(n) else {
            return Ok(plain);
        };
        if h.is_infinite() {
            return Ok(plain);
        }
        if h <= 1.0 {
            return input(format!("horizon N^alpha = {h} leaves no admissible degree"));
        }
        // D >= h  <=>  D >= ceil(h)  <=>  D > ceil(h) - 1
        let largest = h.ceil() - 1.0;
        let beyond = self.tail_at(largest);
        Ok(((plain - beyond) / (1.0 - beyond)).max(0.0))
    }

    /// `b_{D,eps} = min { k : 1 - F(k) < eps / 8 }`.
    pub fn quantile_b(&self, epsilon: f64) -> Result<u64> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return input(format!("epsilon = {epsilon} must lie in (0, 1)"));
        }
        let target = epsilon / 8.0;
        let guess = target.powf(-1.0 / (self.tau - 1.0));
        if !guess.is_finite() || guess > 1e18 {
            return input(format!("quantile for epsilon = {epsilon} exceeds the integer range"));
        }
        let mut k = (guess.floor() as u64).saturating_sub(2).max(1);
        while self.tail_at(k as f64) >= target {
            k += 1;
        }
        while k > 1 && self.tail_at((k - 1) as f64) < target {
            k -= 1;
        }
        Ok(k)
    }

    /// Normalizing sequence solving `N (1 - F(u)) = 1` for the continuous
    /// tail `x^(1-tau)`, i.e. `u_N = N^(1/(tau-1))`.
    pub fn u_n(&self, n: usize) -> f64 {
        (n as f64).powf(1.0 / (self.tau - 1.0))
    }
}

/// Realized degrees `D_1..D_N` with an even total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u64>,
    total: u64,
    pub parity_corrected: bool,
    /// Some draw hit the hard degree cap.
    pub capped: bool,
}

impl DegreeSequence {
    /// Build from raw draws; an odd total is fixed by incrementing the last
    /// degree.
    pub fn from_raw(mut degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return input("degree sequence is empty");
        }
        let mut total = degrees
            .iter()
            .try_fold(0u64, |acc, &d| acc.checked_add(d))
            .ok_or(Error::DegreeOverflow)?;
        let parity_corrected = total % 2 == 1;
        if parity_corrected {
            *degrees.last_mut().unwrap() += 1;
            total = total.checked_add(1).ok_or(Error::DegreeOverflow)?;
        }
        Ok(DegreeSequence { degrees, total, parity_corrected, capped: false })
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// `L_N`, the number of stubs.
    pub fn total(&self) -> u64 {
        self.total
    }
}
