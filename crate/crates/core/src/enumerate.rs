//! Exhaustive enumeration of all `(L-1)!!` perfect matchings of a small stub
//! set, for exact small-instance answers.

use std::collections::BTreeMap;

use crate::distance::{hopcount, Hopcount};
use crate::error::{input, Result};
use crate::matching::EagerMatching;

/// Largest stub count accepted by the exhaustive routines.
pub const MAX_ENUMERATED_STUBS: u64 = 12;

/// `(l - 1)!!` for even `l`, the number of perfect matchings of `l` stubs.
pub fn double_factorial_odd(l: u64) -> u64 {
    (1..l).step_by(2).product::<u64>().max(1)
}

/// All perfect matchings of stubs `0..l`, each as pairs `(a, b)` with `a < b`
/// listed by increasing `a`.
pub fn perfect_matchings(l: u64) -> Vec<Vec<(u64, u64)>> {
    fn go(free: &mut Vec<u64>, cur: &mut Vec<(u64, u64)>, out: &mut Vec<Vec<(u64, u64)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = free.remove(0);
        for i in 0..free.len() {
            let other = free.remove(i);
            cur.push((first, other));
            go(free, cur, out);
            cur.pop();
            free.insert(i, other);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if l.is_multiple_of(2) {
        go(&mut (0..l).collect(), &mut Vec::new(), &mut out);
    }
    out
}

/// Exact law of the matching on a small degree sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactTable {
    /// Number of stub matchings, `(L-1)!!`.
    pub matchings: u64,
    /// Count of matchings per value of the hopcount between nodes 0 and 1.
    pub hopcount: BTreeMap<Hopcount, u64>,
    /// Count of matchings per resulting multigraph, given as its sorted
    /// node-level edge list (0-based).
    pub multigraphs: BTreeMap<Vec<(usize, usize)>, u64>,
}

/// Enumerate every matching of `degrees` (at most [`MAX_ENUMERATED_STUBS`]
/// stubs) and tabulate the hopcount between nodes 0 and 1 and the induced
/// multigraphs.
pub fn exact_table(degrees: &[u64], cutoff: u32) -> Result<ExactTable> {
    let l: u64 = degrees.iter().sum();
    if l > MAX_ENUMERATED_STUBS {
        return input(format!(
            "exhaustive enumeration supports at most {MAX_ENUMERATED_STUBS} stubs, got {l}"
        ));
    }
    if l == 0 || l % 2 == 1 {
        return input(format!("stub count {l} must be even and positive"));
    }
    if degrees.len() < 2 {
        return input("need at least two nodes");
    }
    let all = perfect_matchings(l);
    let mut table = ExactTable {
        matchings: all.len() as u64,
        hopcount: BTreeMap::new(),
        multigraphs: BTreeMap::new(),
    };
    for pairs in &all {
        let m = EagerMatching::from_pairs(degrees, pairs)?;
        let h = hopcount(&mut &m, 0, 1, cutoff);
        *table.hopcount.entry(h).or_default() += 1;
        let mut edges: Vec<(usize, usize)> = m
            .edges()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        *table.multigraphs.entry(edges).or_default() += 1;
    }
    Ok(table)
}
