//! Order statistics, giant nodes and the structural events behind the
//! `{2, 3}` concentration of the hopcount.
//!
//! For endpoints `a`, `b` and a giant set `G`:
//!
//! * **B**: every stub of `a` and of `b` is paired with a stub of a giant;
//! * **C**: every two distinct giants share at least one edge;
//! * **D**: `D_a <= b_{D,eps}` and `D_b <= b_{D,eps}`;
//! * **A** = B and C and D.
//!
//! B and C together force a path `a - g - (g') - b` through giants, so A
//! implies a hopcount of at most 3 on every matching.

use crate::degree::{DegreeLaw, DegreeSequence};
use crate::error::{input, Error, Result};
use crate::matching::StubGraph;

#[derive(Clone, Debug, PartialEq)]
pub struct OrderStats {
    /// Largest `m` degrees, non-increasing.
    pub sorted_degrees_desc: Vec<u64>,
    pub u_n: f64,
    pub l_n: u64,
    /// `sorted_degrees_desc[i] / u_N`.
    pub ratios: Vec<f64>,
    /// `L_N / u_N`.
    pub l_ratio: f64,
}

pub fn order_stats(seq: &DegreeSequence, law: &DegreeLaw, m: usize) -> Result<OrderStats> {
    let n = seq.len();
    if m < 1 || m > n {
        return input(format!("order statistics need 1 <= m <= N, got m = {m}, N = {n}"));
    }
    let mut top = seq.degrees().to_vec();
    if m < n {
        top.select_nth_unstable_by(m - 1, |a, b| b.cmp(a));
        top.truncate(m);
    }
    top.sort_unstable_by(|a, b| b.cmp(a));
    let u_n = law.u_n(n);
    let l_n = seq.total();
    Ok(OrderStats {
        ratios: top.iter().map(|&d| d as f64 / u_n).collect(),
        sorted_degrees_desc: top,
        u_n,
        l_n,
        l_ratio: l_n as f64 / u_n,
    })
}

/// Ids of the `k` largest-degree nodes, ascending. Ties go to the smaller id.
pub fn giants_topk(seq: &DegreeSequence, k: usize) -> Result<Vec<usize>> {
    let n = seq.len();
    if k < 1 || k > n {
        return input(format!("giant count k must satisfy 1 <= k <= N, got k = {k}, N = {n}"));
    }
    let d = seq.degrees();
    let mut ids: Vec<usize> = (0..n).collect();
    let rank = |a: &usize, b: &usize| d[*b].cmp(&d[*a]).then(a.cmp(b));
    if k < n {
        ids.select_nth_unstable_by(k - 1, rank);
        ids.truncate(k);
    }
    ids.sort_unstable();
    Ok(ids)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaGiants {
    pub nodes: Vec<usize>,
    /// `beta = (1 + alpha (4 - tau)) / 4`.
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    /// Whether `1/tau < alpha < 1/(tau - 1)`.
    pub in_regime: bool,
}

pub fn beta_exponent(tau: f64, alpha: f64) -> f64 {
    (1.0 + alpha * (4.0 - tau)) / 4.0
}

/// Nodes with `N^beta < D < N^alpha` in the conditioned model. Outside the
/// regime `1/tau < alpha < 1/(tau - 1)` the set is still computed and
/// `in_regime` is false.
pub fn giants_beta(seq: &DegreeSequence, law: &DegreeLaw, n: usize) -> Result<BetaGiants> {
    let Some(alpha) = law.truncation() else {
        return Err(Error::Usage("beta giants need a truncated degree law".into()));
    };
    let tau = law.tau();
    let beta = beta_exponent(tau, alpha);
    let nf = n as f64;
    let (lower, upper) = (nf.powf(beta), nf.powf(alpha));
    let nodes = seq
        .degrees()
        .iter()
        .enumerate()
        .filter(|&(_, &d)| (d as f64) > lower && (d as f64) < upper)
        .map(|(i, _)| i)
        .collect();
    Ok(BetaGiants {
        nodes,
        beta,
        lower,
        upper,
        in_regime: 1.0 / tau < alpha && alpha < 1.0 / (tau - 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventFlags {
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub a: bool,
    pub giant_count: usize,
}

/// Evaluate events B, C, D for endpoints `(x, y)` and the sorted giant ids
/// `giants`. Only the stubs of the endpoints and of the giants are queried;
/// on a lazy matching they are revealed as needed.
pub fn event_flags<G: StubGraph + ?Sized>(
    g: &mut G,
    endpoints: (usize, usize),
    giants: &[usize],
    endpoint_bound: u64,
) -> Result<EventFlags> {
    if giants.is_empty() {
        return Err(Error::Usage("event flags need a nonempty giant set".into()));
    }
    let index_of = |v: usize| giants.binary_search(&v).ok();
    let (x, y) = endpoints;

    let mut b = true;
    'outer: for v in [x, y] {
        for s in g.stubs(v) {
            if index_of(g.across(s)).is_none() {
                b = false;
                break 'outer;
            }
        }
    }

    let k = giants.len();
    let mut adjacent = vec![false; k * k];
    let mut c = true;
    for i in 0..k {
        let mut missing = (0..k).filter(|&j| j != i && !adjacent[i * k + j]).count();
        if missing == 0 {
            continue;
        }
        for s in g.stubs(giants[i]) {
            if let Some(j) = index_of(g.across(s)) {
                if j != i && !adjacent[i * k + j] {
                    adjacent[i * k + j] = true;
                    adjacent[j * k + i] = true;
                    missing -= 1;
                    if missing == 0 {
                        break;
                    }
                }
            }
        }
        if missing > 0 {
            c = false;
            break;
        }
    }

    let d = g.degree(x) <= endpoint_bound && g.degree(y) <= endpoint_bound;
    Ok(EventFlags { b, c, d, a: b && c && d, giant_count: k })
}

/// Share of all stubs owned by `giants`.
pub fn giant_mass_fraction(seq: &DegreeSequence, giants: &[usize]) -> f64 {
    let mass: u64 = giants.iter().map(|&v| seq.degrees()[v]).sum();
    mass as f64 / seq.total() as f64
}
