//! Replicated experiments: seeding, per-replica measurement and aggregation.
//!
//! Every replica owns an RNG stream whose 256-bit ChaCha8 seed is a pure
//! function of `(master_seed, size_index, replica)` (see [`replica_seed`]).
//! Results are therefore independent of execution order and thread count,
//! and the aggregated tables are folded in replica order.

mod output;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::DegreeLaw;
use crate::diagnostics::{event_flags, giant_mass_fraction, giants_beta, giants_topk, order_stats, EventFlags, OrderStats};
use crate::distance::{bidirectional_hopcount, Hopcount, DEFAULT_CUTOFF};
use crate::error::{input, Error, Result};
use crate::matching::{EagerMatching, LazyMatching, Mode, StubGraph, DEFAULT_STUB_CAP};
use crate::stats::{total_variation, wilson, Z95};

pub use output::{summary_json, write_csv, write_histogram_tsv, write_outputs, write_summary_json, CSV_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GiantsMode {
    /// The `k` largest-degree nodes.
    TopK(usize),
    /// Nodes with degree in `(N^beta, N^alpha)`; needs a truncated law.
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Measure between nodes 1 and 2.
    FirstTwo,
    /// Measure between a uniformly drawn pair of distinct nodes.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tau: f64,
    pub alpha: Option<f64>,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub master_seed: u64,
    pub cutoff: u32,
    pub giants: GiantsMode,
    pub epsilon: f64,
    pub collect_flags: bool,
    pub mode: Mode,
    pub pair: PairMode,
    pub stub_cap: u64,
    /// Number of top order statistics recorded per replica.
    pub top_m: usize,
}

impl ExperimentConfig {
    pub fn new(tau: f64, sizes: Vec<usize>, replicas: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            tau,
            alpha: None,
            sizes,
            replicas,
            master_seed,
            cutoff: DEFAULT_CUTOFF,
            giants: GiantsMode::TopK(10),
            epsilon: 0.5,
            collect_flags: false,
            mode: Mode::Lazy,
            pair: PairMode::FirstTwo,
            stub_cap: DEFAULT_STUB_CAP,
            top_m: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law()?;
        if self.replicas < 1 {
            return input("replicas must be >= 1");
        }
        if self.sizes.is_empty() {
            return input("the list of node counts is empty");
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return input(format!("node count {n} is below 2"));
        }
        if self.cutoff < 1 {
            return input("cutoff must be >= 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return input(format!("epsilon = {} must lie in (0, 1)", self.epsilon));
        }
        if self.top_m < 1 {
            return input("top_m must be >= 1");
        }
        match self.giants {
            GiantsMode::TopK(0) => return input("top-k giants need k >= 1"),
            GiantsMode::Beta if self.alpha.is_none() => {
                return input("beta giants need a truncation exponent alpha")
            }
            _ => {}
        }
        Ok(())
    }

    pub fn law(&self) -> Result<DegreeLaw> {
        let law = DegreeLaw::power_law(self.tau)?;
        match self.alpha {
            Some(a) => law.with_truncation(a),
            None => Ok(law),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `replica` at size index `size_index`:
/// `h = sm(sm(sm(master) ^ size_index) ^ replica)` and seed word `j` is
/// `sm(h ^ j)` for `j = 0..4`, with `sm` the SplitMix64 finalizer.
pub fn replica_seed(master_seed: u64, size_index: usize, replica: usize) -> [u8; 32] {
    let h = splitmix64(splitmix64(splitmix64(master_seed) ^ size_index as u64) ^ replica as u64);
    let mut seed = [0u8; 32];
    for (j, chunk) in seed.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(h ^ j as u64).to_le_bytes());
    }
    seed
}

pub fn replica_rng(master_seed: u64, size_index: usize, replica: usize) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(replica_seed(master_seed, size_index, replica))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaOutcome {
    pub size_index: usize,
    pub n: usize,
    pub replica: usize,
    /// `None` if the replica failed.
    pub hopcount: Option<Hopcount>,
    pub l_n: u64,
    /// Degrees of the two measured endpoints.
    pub d1: u64,
    pub d2: u64,
    /// Top order statistics divided by `u_N`.
    pub ratios: Vec<f64>,
    pub l_ratio: f64,
    pub flags: Option<EventFlags>,
    pub giant_mass: Option<f64>,
    pub parity_corrected: bool,
    pub capped: bool,
    pub failure: Option<String>,
    pub wall_time: Duration,
}

impl ReplicaOutcome {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let x = rng.random_range(0..n);
    let mut y = rng.random_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    (x, y)
}

struct Measured {
    hopcount: Hopcount,
    flags: Option<EventFlags>,
    giant_mass: Option<f64>,
}

/// Run one replica. A pure function of the configuration and the indices.
pub fn run_replica(cfg: &ExperimentConfig, size_index: usize, replica: usize) -> ReplicaOutcome {
    let start = Instant::now();
    let n = cfg.sizes[size_index];
    let mut outcome = ReplicaOutcome {
        size_index,
        n,
        replica,
        hopcount: None,
        l_n: 0,
        d1: 0,
        d2: 0,
        ratios: Vec::new(),
        l_ratio: f64::NAN,
        flags: None,
        giant_mass: None,
        parity_corrected: false,
        capped: false,
        failure: None,
        wall_time: Duration::ZERO,
    };
    let result = measure_replica(cfg, size_index, replica, &mut outcome);
    if let Err(e) = result {
        outcome.failure = Some(e.to_string());
    }
    outcome.wall_time = start.elapsed();
    outcome
}

fn measure_replica(
    cfg: &ExperimentConfig,
    size_index: usize,
    replica: usize,
    out: &mut ReplicaOutcome,
) -> Result<()> {
    let n = out.n;
    let law = cfg.law()?;
    let mut rng = replica_rng(cfg.master_seed, size_index, replica);
    let seq = law.sample_sequence(n, &mut rng)?;
    let stats = order_stats(&seq, &law, cfg.top_m.min(n))?;
    let endpoints = match cfg.pair {
        PairMode::FirstTwo => (0, 1),
        PairMode::Random => distinct_pair(n, &mut rng),
    };
    out.l_n = seq.total();
    out.d1 = seq.degrees()[endpoints.0];
    out.d2 = seq.degrees()[endpoints.1];
    out.ratios = stats.ratios;
    out.l_ratio = stats.l_ratio;
    out.parity_corrected = seq.parity_corrected;
    out.capped = seq.capped;

    let giants = if cfg.collect_flags {
        Some(match cfg.giants {
            GiantsMode::TopK(k) => giants_topk(&seq, k.min(n))?,
            GiantsMode::Beta => giants_beta(&seq, &law, n)?.nodes,
        })
    } else {
        None
    };
    let bound = law.quantile_b(cfg.epsilon)?;
    let measure = |g: &mut dyn StubGraph| -> Result<Measured> {
        let hopcount = bidirectional_hopcount(g, endpoints.0, endpoints.1, cfg.cutoff);
        let (flags, giant_mass) = match &giants {
            None => (None, None),
            Some(gs) if gs.is_empty() => (None, Some(0.0)),
            Some(gs) => (
                Some(event_flags(g, endpoints, gs, bound)?),
                Some(giant_mass_fraction(&seq, gs)),
            ),
        };
        Ok(Measured { hopcount, flags, giant_mass })
    };
    let measured = match cfg.mode {
        Mode::Eager => {
            let m = EagerMatching::build_with_cap(&seq, cfg.stub_cap, &mut rng)?;
            measure(&mut &m)?
        }
        Mode::Lazy => {
            let mut m = LazyMatching::new(&seq)?;
            measure(&mut m.walk(&mut rng))?
        }
    };
    out.hopcount = Some(measured.hopcount);
    out.flags = measured.flags;
    out.giant_mass = measured.giant_mass;
    Ok(())
}

/// Histogram bucket of a hopcount: `1..=cutoff`, then exceeded, then
/// infinite. Index 0 holds distance 0 (only possible when endpoints coincide).
pub fn bucket_labels(cutoff: u32) -> Vec<String> {
    (0..=cutoff)
        .map(|d| d.to_string())
        .chain([format!(">{cutoff}"), "inf".to_string()])
        .collect()
}

pub fn bucket_index(h: Hopcount, cutoff: u32) -> usize {
    match h {
        Hopcount::Finite(d) => d.min(cutoff) as usize,
        Hopcount::ExceedsCutoff(_) => cutoff as usize + 1,
        Hopcount::Infinite => cutoff as usize + 2,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketRow {
    pub bucket: String,
    pub count: u64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub successes: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EventCounts {
    /// Replicas for which flags were evaluated.
    pub evaluated: u64,
    /// Replicas with an empty giant set.
    pub no_giants: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub a: u64,
    /// Replicas with A true and hopcount above 3.
    pub violations: u64,
}

/// Per-size accumulator. `merge` is associative and commutative on all
/// integer counters.
#[derive(Clone, Debug, PartialEq)]
struct Accumulator {
    counts: Vec<u64>,
    replicas: u64,
    failed: u64,
    capped: u64,
    parity_corrected: u64,
    giant_mass_sum: f64,
    giant_mass_n: u64,
    events: EventCounts,
    flags_requested: bool,
}

impl Accumulator {
    fn new(cutoff: u32, flags_requested: bool) -> Self {
        Accumulator {
            counts: vec![0; cutoff as usize + 3],
            replicas: 0,
            failed: 0,
            capped: 0,
            parity_corrected: 0,
            giant_mass_sum: 0.0,
            giant_mass_n: 0,
            events: EventCounts::default(),
            flags_requested,
        }
    }

    fn add(&mut self, o: &ReplicaOutcome, cutoff: u32) {
        self.replicas += 1;
        self.capped += o.capped as u64;
        self.parity_corrected += o.parity_corrected as u64;
        let Some(h) = o.hopcount else {
            self.failed += 1;
            return;
        };
        self.counts[bucket_index(h, cutoff)] += 1;
        if let Some(m) = o.giant_mass {
            self.giant_mass_sum += m;
            self.giant_mass_n += 1;
        }
        if self.flags_requested {
            match &o.flags {
                Some(f) => {
                    let e = &mut self.events;
                    e.evaluated += 1;
                    e.b += f.b as u64;
                    e.c += f.c as u64;
                    e.d += f.d as u64;
                    e.a += f.a as u64;
                    let beyond_three = !matches!(h, Hopcount::Finite(d) if d <= 3);
                    e.violations += (f.a && beyond_three) as u64;
                }
                None => self.events.no_giants += 1,
            }
        }
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.replicas += other.replicas;
        self.failed += other.failed;
        self.capped += other.capped;
        self.parity_corrected += other.parity_corrected;
        self.giant_mass_sum += other.giant_mass_sum;
        self.giant_mass_n += other.giant_mass_n;
        let (e, f) = (&mut self.events, &other.events);
        e.evaluated += f.evaluated;
        e.no_giants += f.no_giants;
        e.b += f.b;
        e.c += f.c;
        e.d += f.d;
        e.a += f.a;
        e.violations += f.violations;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub replicas: u64,
    pub completed: u64,
    pub failed: u64,
    pub capped: u64,
    pub parity_corrected: u64,
    pub cutoff: u32,
    pub buckets: Vec<BucketRow>,
    pub p_hat: Option<Estimate>,
    pub giant_mass_mean: Option<f64>,
    pub events: Option<EventCounts>,
}

impl SizeSummary {
    fn from_accumulator(n: usize, cutoff: u32, acc: &Accumulator) -> Self {
        let completed = acc.replicas - acc.failed;
        let buckets = bucket_labels(cutoff)
            .into_iter()
            .zip(&acc.counts)
            .map(|(bucket, &count)| {
                let p = if completed > 0 { count as f64 / completed as f64 } else { f64::NAN };
                let (ci_lo, ci_hi) = wilson(count, completed, Z95);
                BucketRow { bucket, count, p, ci_lo, ci_hi }
            })
            .collect();
        let mut s = SizeSummary {
            n,
            replicas: acc.replicas,
            completed,
            failed: acc.failed,
            capped: acc.capped,
            parity_corrected: acc.parity_corrected,
            cutoff,
            buckets,
            p_hat: None,
            giant_mass_mean: (acc.giant_mass_n > 0)
                .then(|| acc.giant_mass_sum / acc.giant_mass_n as f64),
            events: acc.flags_requested.then(|| acc.events.clone()),
        };
        s.p_hat = estimate_p(&s).ok();
        s
    }

    pub fn counts(&self) -> Vec<u64> {
        self.buckets.iter().map(|b| b.count).collect()
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.p).collect()
    }

    pub fn count(&self, h: Hopcount) -> u64 {
        self.buckets[bucket_index(h, self.cutoff)].count
    }

    pub fn prob(&self, h: Hopcount) -> f64 {
        self.buckets[bucket_index(h, self.cutoff)].p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryTable {
    pub sizes: Vec<SizeSummary>,
}

impl SummaryTable {
    pub fn size(&self, n: usize) -> Option<&SizeSummary> {
        self.sizes.iter().find(|s| s.n == n)
    }
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub outcomes: Vec<ReplicaOutcome>,
    pub summary: SummaryTable,
}

/// Fold outcomes (in the given order) into the per-size summary.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[ReplicaOutcome]) -> SummaryTable {
    let mut per_size: BTreeMap<usize, Accumulator> = BTreeMap::new();
    for o in outcomes {
        per_size
            .entry(o.size_index)
            .or_insert_with(|| Accumulator::new(cfg.cutoff, cfg.collect_flags))
            .add(o, cfg.cutoff);
    }
    let sizes = cfg
        .sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let empty = Accumulator::new(cfg.cutoff, cfg.collect_flags);
            let acc = per_size.get(&i).map_or(empty.clone(), |a| empty.merge(a));
            SizeSummary::from_accumulator(n, cfg.cutoff, &acc)
        })
        .collect();
    SummaryTable { sizes }
}

/// Run every replica of every size; replicas run in parallel.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let mut outcomes = Vec::with_capacity(cfg.sizes.len() * cfg.replicas);
    for i in 0..cfg.sizes.len() {
        let batch: Vec<ReplicaOutcome> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| run_replica(cfg, i, r))
            .collect();
        outcomes.extend(batch);
    }
    let summary = summarize(cfg, &outcomes);
    Ok(Experiment { config: cfg.clone(), outcomes, summary })
}

/// `p_hat = #{H = 2} / #{H in {2, 3}}` with a Wilson interval.
pub fn estimate_p(size: &SizeSummary) -> Result<Estimate> {
    estimate_p_from_counts(size.count(Hopcount::Finite(2)), size.count(Hopcount::Finite(3)))
}

pub fn estimate_p_from_counts(twos: u64, threes: u64) -> Result<Estimate> {
    if twos == 0 || threes == 0 {
        return Err(Error::Estimation(format!(
            "p needs positive counts at both 2 and 3 (got {twos} and {threes})"
        )));
    }
    let trials = twos + threes;
    let (ci_lo, ci_hi) = wilson(twos, trials, Z95);
    Ok(Estimate { p: twos as f64 / trials as f64, ci_lo, ci_hi, successes: twos, trials })
}

/// Total-variation distance between hopcount pmfs, per common node count.
pub fn summary_tv(a: &SummaryTable, b: &SummaryTable) -> Vec<(usize, f64)> {
    a.sizes
        .iter()
        .filter_map(|sa| {
            let sb = b.size(sa.n)?;
            (sa.cutoff == sb.cutoff).then(|| (sa.n, total_variation(&sa.pmf(), &sb.pmf())))
        })
        .collect()
}

/// Run an unconditioned and a conditioned experiment (`alpha > 1/(tau-1)`)
/// and report the total-variation distance of their hopcount pmfs.
pub fn compare_conditioned(
    uncond: &ExperimentConfig,
    cond: &ExperimentConfig,
) -> Result<Vec<(usize, f64)>> {
    if uncond.alpha.is_some() {
        return input("the reference experiment must be unconditioned");
    }
    let Some(alpha) = cond.alpha else {
        return input("the conditioned experiment needs alpha");
    };
    let boundary = 1.0 / (cond.tau - 1.0);
    if !(alpha > boundary) {
        return input(format!(
            "alpha = {alpha} must exceed 1/(tau-1) = {boundary}; the boundary itself is excluded"
        ));
    }
    if uncond.tau != cond.tau || uncond.sizes != cond.sizes || uncond.cutoff != cond.cutoff {
        return input("both experiments need the same tau, node counts and cutoff");
    }
    let a = run_experiment(uncond)?;
    let b = run_experiment(cond)?;
    Ok(summary_tv(&a.summary, &b.summary))
}

/// Order statistics of `replicas` independent degree sequences of size `n`,
/// without building graphs. Replica `r` uses the stream of `(seed, 0, r)`.
pub fn sample_order_stats(
    law: &DegreeLaw,
    n: usize,
    replicas: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<OrderStats>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, 0, r);
            let seq = law.sample_sequence(n, &mut rng)?;
            order_stats(&seq, law, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(1.8, vec![200, 500], 40, 7);
        c.collect_flags = true;
        c
    }

    #[test]
    fn seeds_differ_across_indices() {
        let a = replica_seed(1, 0, 0);
        assert_ne!(a, replica_seed(1, 0, 1));
        assert_ne!(a, replica_seed(1, 1, 0));
        assert_ne!(a, replica_seed(2, 0, 0));
        assert_eq!(a, replica_seed(1, 0, 0));
    }

    #[test]
    fn validation() {
        let mut c = small_cfg();
        assert!(c.validate().is_ok());
        c.tau = 2.5;
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.replicas = 0;
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.sizes.clear();
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.giants = GiantsMode::Beta;
        assert!(c.validate().is_err());
        c.alpha = Some(1.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn pmf_normalized_and_intervals_cover() {
        let exp = run_experiment(&small_cfg()).unwrap();
        for s in &exp.summary.sizes {
            let total: f64 = s.pmf().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for b in &s.buckets {
                assert!(b.ci_lo <= b.p && b.p <= b.ci_hi);
            }
            assert_eq!(s.completed + s.failed, 40);
        }
    }

    #[test]
    fn replica_order_does_not_matter() {
        let cfg = small_cfg();
        let exp = run_experiment(&cfg).unwrap();
        for o in exp.outcomes.iter().rev().step_by(7) {
            let again = run_replica(&cfg, o.size_index, o.replica);
            assert_eq!(again.hopcount, o.hopcount);
            assert_eq!(again.l_n, o.l_n);
            assert_eq!(again.flags, o.flags);
            assert_eq!(again.ratios, o.ratios);
        }
        let mut shuffled = exp.outcomes.clone();
        shuffled.reverse();
        assert_eq!(summarize(&cfg, &shuffled).sizes[0].counts(), exp.summary.sizes[0].counts());
    }

    #[test]
    fn stub_cap_failures_are_counted() {
        let mut cfg = small_cfg();
        cfg.mode = Mode::Eager;
        cfg.stub_cap = 64;
        let exp = run_experiment(&cfg).unwrap();
        let s = &exp.summary.sizes[1];
        assert!(s.failed > 0);
        let failed = exp.outcomes.iter().filter(|o| o.failed()).count() as u64;
        assert_eq!(failed, exp.summary.sizes.iter().map(|s| s.failed).sum::<u64>());
        assert!(exp.outcomes.iter().filter(|o| o.failed()).all(|o| o
            .failure
            .as_deref()
            .unwrap()
            .contains("stub cap 64")));
    }

    #[test]
    fn estimate_examples() {
        let e = estimate_p_from_counts(500, 500).unwrap();
        assert_eq!(e.p, 0.5);
        assert!(e.ci_lo < 0.5 && e.ci_hi > 0.5);
        assert!(matches!(estimate_p_from_counts(0, 100), Err(Error::Estimation(_))));
        assert!(estimate_p_from_counts(100, 0).is_err());
    }

    #[test]
    fn conditioned_comparison_guards() {
        let u = ExperimentConfig::new(1.8, vec![300], 20, 1);
        let mut c = u.clone();
        c.alpha = Some(1.25);
        assert!(compare_conditioned(&u, &c).is_err());
        c.alpha = Some(f64::INFINITY);
        let tv = compare_conditioned(&u, &c).unwrap();
        assert_eq!(tv, vec![(300, 0.0)]);
    }

    #[test]
    fn random_pair_is_distinct() {
        let mut rng = replica_rng(3, 0, 0);
        for _ in 0..1000 {
            let (x, y) = distinct_pair(2, &mut rng);
            assert_ne!(x, y);
            assert!(x < 2 && y < 2);
        }
    }
}
