use std::collections::{BTreeMap, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hopcount_core::diagnostics::giants_topk;
use hopcount_core::distance::{bidirectional_hopcount, hopcount, Hopcount};
use hopcount_core::enumerate::exact_table;
use hopcount_core::limit::{xi_joint_cdf, XiMarginal};
use hopcount_core::stats::chi2_homogeneity;
use hopcount_core::{DegreeLaw, DegreeSequence, EagerMatching, LazyMatching, StubGraph};

/// All-pairs distances on the node multigraph by repeated BFS.
fn all_distances(m: &EagerMatching) -> Vec<Vec<Option<u32>>> {
    let n = m.node_count();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in m.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    (0..n)
        .map(|s| {
            let mut d = vec![None; n];
            d[s] = Some(0);
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w].is_none() {
                        d[w] = Some(d[v].unwrap() + 1);
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

fn reference(dist: &[Vec<Option<u32>>], a: usize, b: usize, cutoff: u32) -> Hopcount {
    let ecc = |v: usize| dist[v].iter().flatten().copied().max().unwrap_or(0);
    match dist[a][b] {
        Some(d) if d <= cutoff => Hopcount::Finite(d),
        None if ecc(a).min(ecc(b)) < cutoff => Hopcount::Infinite,
        _ => Hopcount::ExceedsCutoff(cutoff),
    }
}

fn small_graph() -> impl Strategy<Value = (Vec<u64>, u64)> {
    (prop::collection::vec(0u64..5, 2..12), any::<u64>())
        .prop_filter("needs at least one stub", |(d, _)| d.iter().any(|&x| x > 0))
}

fn build(degrees: Vec<u64>, seed: u64) -> EagerMatching {
    let seq = DegreeSequence::from_raw(degrees).unwrap();
    EagerMatching::build(&seq, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn searches_match_brute_force((degrees, seed) in small_graph(), cutoff in 1u32..7) {
        let m = build(degrees, seed);
        let dist = all_distances(&m);
        let n = m.node_count();
        for a in 0..n {
            for b in 0..n {
                let want = reference(&dist, a, b, cutoff);
                prop_assert_eq!(hopcount(&mut &m, a, b, cutoff), want);
                prop_assert_eq!(bidirectional_hopcount(&mut &m, a, b, cutoff), want);
                prop_assert_eq!(bidirectional_hopcount(&mut &m, b, a, cutoff), want);
            }
        }
    }

    #[test]
    fn triangle_inequality((degrees, seed) in small_graph()) {
        let m = build(degrees, seed);
        let n = m.node_count();
        let cutoff = n as u32 + 1;
        let d = |x: usize, y: usize| bidirectional_hopcount(&mut &m, x, y, cutoff).finite();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if let (Some(ab), Some(bc)) = (d(a, b), d(b, c)) {
                        let ac = d(a, c);
                        prop_assert!(ac.is_some() && ac.unwrap() <= ab + bc);
                    }
                }
            }
        }
    }

    #[test]
    fn lazy_walk_agrees_with_its_revealed_graph((degrees, seed) in small_graph(), cutoff in 1u32..7) {
        let seq = DegreeSequence::from_raw(degrees.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lazy = LazyMatching::new(&seq).unwrap();
        let n = seq.len();
        let (a, b) = (0, n - 1);
        let h = bidirectional_hopcount(&mut lazy.walk(&mut rng), a, b, cutoff);
        lazy.reveal_all(&mut rng);
        let full = EagerMatching::from_pairs(seq.degrees(), &lazy.revealed_pairs()).unwrap();
        prop_assert_eq!(hopcount(&mut &full, a, b, cutoff), h);
    }

    #[test]
    fn partner_is_an_involution((degrees, seed) in small_graph()) {
        let m = build(degrees, seed);
        for s in 0..m.total_stubs() {
            let p = m.partner_of(s);
            prop_assert_ne!(p, s);
            prop_assert_eq!(m.partner_of(p), s);
        }
        let degree_sum: u64 = (0..m.node_count()).map(|v| m.degree(v)).sum();
        prop_assert_eq!(degree_sum, 2 * m.edges().count() as u64);
    }

    #[test]
    fn topk_giants_are_nested(degrees in prop::collection::vec(1u64..50, 2..40), k in 1usize..39) {
        let seq = DegreeSequence::from_raw(degrees).unwrap();
        prop_assume!(k < seq.len());
        let small = giants_topk(&seq, k).unwrap();
        let large = giants_topk(&seq, k + 1).unwrap();
        prop_assert!(small.iter().all(|v| large.contains(v)));
        let d = seq.degrees();
        let min_in = small.iter().map(|&v| d[v]).min().unwrap();
        prop_assert!((0..seq.len()).filter(|v| !small.contains(v)).all(|v| d[v] <= min_in));
    }

    #[test]
    fn inverse_transform_brackets(u in 1e-12f64..1.0, tau in 1.05f64..1.95) {
        prop_assume!(u < 1.0);
        let law = DegreeLaw::power_law(tau).unwrap();
        let d = law.sample_degree(u).unwrap();
        prop_assume!(!d.capped);
        // ceil(x) = d  <=>  d - 1 < x <= d with x = u^(-1/(tau-1))
        let x = u.powf(-1.0 / (tau - 1.0));
        prop_assert!((d.value as f64 - 1.0) < x && x <= d.value as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn tails_are_monotone(tau in 1.05f64..1.95, alpha in 0.3f64..3.0, k in 1u64..10_000) {
        let law = DegreeLaw::power_law(tau).unwrap();
        prop_assert!(law.tail(k + 1).unwrap() <= law.tail(k).unwrap());
        let cond = law.clone().with_truncation(alpha).unwrap();
        let n = 1000;
        let c = cond.conditioned_tail(k, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!(c <= law.tail(k).unwrap() + 1e-15);
        prop_assert!(cond.conditioned_tail(k + 1, n).unwrap() <= c);
    }

    #[test]
    fn joint_cdf_bounded_by_marginals(tau in 1.1f64..1.9, ys in prop::collection::vec(0.05f64..20.0, 1..6)) {
        let mut y = ys;
        y.sort_by(|a, b| b.total_cmp(a));
        y.dedup();
        prop_assume!(y.windows(2).all(|w| w[0] > w[1] * (1.0 + 1e-9)));
        let joint = xi_joint_cdf(tau, &y).unwrap();
        for (i, &yi) in y.iter().enumerate() {
            let m = XiMarginal::new(tau, i + 1).unwrap().cdf(yi).unwrap();
            prop_assert!(joint <= m + 1e-12);
        }
    }
}

#[test]
fn empirical_tail_within_three_standard_errors() {
    let law = DegreeLaw::power_law(1.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let draws: Vec<u64> = (0..n).map(|_| law.sample(n, &mut rng).value).collect();
    for k in [1u64, 2, 3, 5, 10, 100, 1000] {
        let p = law.tail(k).unwrap();
        let emp = draws.iter().filter(|&&d| d > k).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() <= 3.0 * se, "k = {k}: {emp} vs {p}");
    }
}

#[test]
fn conditioned_pmf_matches_samples() {
    let law = DegreeLaw::power_law(1.5).unwrap().with_truncation(1.0).unwrap();
    let n = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let draws = 1_000_000;
    let mut counts = vec![0u64; n + 1];
    for _ in 0..draws {
        let d = law.sample_degree_conditioned(n, &mut rng).unwrap().value as usize;
        assert!((1..n).contains(&d));
        counts[d] += 1;
    }
    for k in 1..n as u64 {
        let below = if k == 1 { 1.0 } else { law.conditioned_tail(k - 1, n).unwrap() };
        let p = below - law.conditioned_tail(k, n).unwrap();
        let emp = counts[k as usize] as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((emp - p).abs() <= 4.5 * se, "k = {k}: {emp} vs {p}");
    }
    assert_eq!(law.conditioned_tail(99, n).unwrap(), 0.0);
}

#[test]
fn joint_cdf_matches_point_process_simulation() {
    // xi_i = Gamma_i^(-1/(tau-1)) with Gamma_i the arrival times of a rate-one
    // Poisson process
    let tau = 1.8;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let reps = 400_000;
    let samples: Vec<[f64; 3]> = (0..reps)
        .map(|_| {
            let mut g = 0.0;
            let mut xi = [0.0; 3];
            for x in &mut xi {
                g += -(1.0 - rng.random::<f64>()).ln();
                *x = g.powf(-1.0 / (tau - 1.0));
            }
            xi
        })
        .collect();
    let cases: [&[f64]; 5] = [&[1.0], &[2.0, 0.5], &[1.0, 0.3], &[3.0, 1.0, 0.4], &[0.9, 0.6, 0.5]];
    for y in cases {
        let exact = xi_joint_cdf(tau, y).unwrap();
        let hits = samples
            .iter()
            .filter(|s| y.iter().zip(s.iter()).all(|(yi, xi)| xi < yi))
            .count();
        let emp = hits as f64 / reps as f64;
        let se = (exact * (1.0 - exact) / reps as f64).sqrt().max(1e-6);
        assert!((emp - exact).abs() <= 4.0 * se, "y = {y:?}: {emp} vs {exact}");
    }
}

/// Empirical matching frequencies against the exact enumeration.
fn check_uniform(degrees: &[u64], lazy: bool, seed: u64) {
    let exact = exact_table(degrees, 10).unwrap();
    let seq = DegreeSequence::from_raw(degrees.to_vec()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let builds = 60_000u64;
    let mut seen: BTreeMap<Vec<(usize, usize)>, u64> = BTreeMap::new();
    for _ in 0..builds {
        let m = if lazy {
            let mut l = LazyMatching::new(&seq).unwrap();
            l.reveal_all(&mut rng);
            EagerMatching::from_pairs(degrees, &l.revealed_pairs()).unwrap()
        } else {
            EagerMatching::build(&seq, &mut rng).unwrap()
        };
        let mut e: Vec<(usize, usize)> = m.edges().map(|(u, v)| (u.min(v), u.max(v))).collect();
        e.sort_unstable();
        *seen.entry(e).or_default() += 1;
    }
    assert!(seen.keys().all(|k| exact.multigraphs.contains_key(k)));
    let observed: Vec<u64> = exact.multigraphs.keys().map(|k| seen.get(k).copied().unwrap_or(0)).collect();
    // expected counts, scaled so both rows have the same total
    let expected: Vec<u64> = exact
        .multigraphs
        .values()
        .map(|&c| c * builds * 1000 / exact.matchings)
        .collect();
    let r = chi2_homogeneity(&observed, &expected);
    assert!(r.p_value > 1e-3, "{degrees:?} lazy={lazy}: p = {}", r.p_value);
}

#[test]
fn eager_matching_is_uniform() {
    check_uniform(&[1, 1, 2, 2], false, 21);
    check_uniform(&[3, 1, 2, 2], false, 22);
}

#[test]
fn lazy_matching_is_uniform() {
    check_uniform(&[1, 1, 2, 2], true, 23);
    check_uniform(&[3, 1, 2, 2], true, 24);
}

#[test]
fn lazy_hopcount_matches_exact_law() {
    let degrees = [1, 1, 2, 2, 3, 1];
    let exact = exact_table(&degrees, 10).unwrap();
    let seq = DegreeSequence::from_raw(degrees.to_vec()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let runs = 100_000u64;
    let mut seen: BTreeMap<Hopcount, u64> = BTreeMap::new();
    for _ in 0..runs {
        let mut l = LazyMatching::new(&seq).unwrap();
        let h = bidirectional_hopcount(&mut l.walk(&mut rng), 0, 1, 10);
        *seen.entry(h).or_default() += 1;
    }
    let observed: Vec<u64> = exact.hopcount.keys().map(|k| seen.get(k).copied().unwrap_or(0)).collect();
    let expected: Vec<u64> = exact.hopcount.values().map(|&c| c * runs * 1000 / exact.matchings).collect();
    assert_eq!(observed.iter().sum::<u64>(), runs);
    let r = chi2_homogeneity(&observed, &expected);
    assert!(r.p_value > 1e-3, "p = {}", r.p_value);
}
