//! Uniform random stub matchings.
//!
//! Node `v` owns the contiguous stub range `offsets[v]..offsets[v + 1]`.
//! [`EagerMatching`] pairs all `L_N` stubs up front by shuffling and pairing
//! consecutive entries. [`LazyMatching`] defers every pairing until a stub is
//! queried: the partner is drawn uniformly from the stubs that are still
//! unpaired, which yields the same law as the eager build while touching
//! only the explored part of the graph.

use std::collections::HashMap;
use std::io::{self, Write};
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::degree::DegreeSequence;
use crate::error::{input, Error, Result};

/// Default ceiling on `L_N` for eager builds.
pub const DEFAULT_STUB_CAP: u64 = 1 << 31;

/// Largest stub cap an eager build can represent (stub ids are `u32`).
pub const MAX_EAGER_STUBS: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Eager,
    Lazy,
}

/// Read access to a stub pairing. `partner` may reveal a pairing on demand,
/// hence `&mut self`.
pub trait StubGraph {
    fn offsets(&self) -> &[u64];

    fn partner(&mut self, stub: u64) -> u64;

    fn node_count(&self) -> usize {
        self.offsets().len() - 1
    }

    fn total_stubs(&self) -> u64 {
        *self.offsets().last().unwrap()
    }

    fn degree(&self, v: usize) -> u64 {
        let o = self.offsets();
        o[v + 1] - o[v]
    }

    fn stubs(&self, v: usize) -> Range<u64> {
        let o = self.offsets();
        o[v]..o[v + 1]
    }

    fn node_of(&self, stub: u64) -> usize {
        self.offsets().partition_point(|&o| o <= stub) - 1
    }

    /// Node at the other end of `stub`.
    fn across(&mut self, stub: u64) -> usize {
        let p = self.partner(stub);
        self.node_of(p)
    }

    /// Multiset of neighbors of `v`, one entry per stub; a self-loop
    /// contributes `v` twice.
    fn neighbors(&mut self, v: usize) -> Vec<usize> {
        self.stubs(v).map(|s| self.across(s)).collect()
    }
}

fn stub_offsets(degrees: &[u64]) -> Vec<u64> {
    let mut offsets = Vec::with_capacity(degrees.len() + 1);
    let mut acc = 0u64;
    offsets.push(0);
    for &d in degrees {
        acc += d;
        offsets.push(acc);
    }
    offsets
}

/// Fully materialized matching. Immutable once built.
#[derive(Clone, Debug)]
pub struct EagerMatching {
    offsets: Vec<u64>,
    partner: Vec<u32>,
}

impl EagerMatching {
    pub fn build<R: Rng + ?Sized>(seq: &DegreeSequence, rng: &mut R) -> Result<Self> {
        Self::build_with_cap(seq, DEFAULT_STUB_CAP, rng)
    }

    /// Uniform perfect matching: shuffle all stubs, pair entries `2i, 2i+1`.
    pub fn build_with_cap<R: Rng + ?Sized>(
        seq: &DegreeSequence,
        cap: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if cap > MAX_EAGER_STUBS {
            return input(format!("eager stub cap {cap} exceeds the supported maximum 2^32"));
        }
        let total = seq.total();
        if total > cap {
            return Err(Error::StubCap { stubs: total, cap });
        }
        if total < 2 || total % 2 == 1 {
            return input(format!("cannot pair {total} stubs"));
        }
        let mut order: Vec<u32> = (0..total as u32).collect();
        order.shuffle(rng);
        let mut partner = vec![0u32; total as usize];
        for pair in order.chunks_exact(2) {
            partner[pair[0] as usize] = pair[1];
            partner[pair[1] as usize] = pair[0];
        }
        Ok(EagerMatching { offsets: stub_offsets(seq.degrees()), partner })
    }

    /// Matching from explicit stub pairs (0-based stub ids); every stub must
    /// appear in exactly one pair.
    pub fn from_pairs(degrees: &[u64], pairs: &[(u64, u64)]) -> Result<Self> {
        let offsets = stub_offsets(degrees);
        let total = *offsets.last().unwrap();
        if total > MAX_EAGER_STUBS {
            return input("too many stubs for an eager matching");
        }
        let mut partner = vec![u32::MAX; total as usize];
        for &(a, b) in pairs {
            if a == b || a >= total || b >= total {
                return input(format!("invalid stub pair ({a}, {b})"));
            }
            if partner[a as usize] != u32::MAX || partner[b as usize] != u32::MAX {
                return input(format!("stub pair ({a}, {b}) reuses a stub"));
            }
            partner[a as usize] = b as u32;
            partner[b as usize] = a as u32;
        }
        if partner.contains(&u32::MAX) {
            return input("pairs do not cover every stub");
        }
        Ok(EagerMatching { offsets, partner })
    }

    pub fn partner_of(&self, stub: u64) -> u64 {
        self.partner[stub as usize] as u64
    }

    /// Every edge once, as 0-based node pairs, ordered by its lower stub.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let this = self;
        (0..self.partner.len() as u64).filter_map(move |s| {
            let p = this.partner_of(s);
            (s < p).then(|| (this.node_of(s), this.node_of(p)))
        })
    }

    /// Edge list with 1-based node ids, one `u v` line per edge; self-loops
    /// appear as `u u`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

impl StubGraph for EagerMatching {
    fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    fn partner(&mut self, stub: u64) -> u64 {
        self.partner_of(stub)
    }
}

impl StubGraph for &EagerMatching {
    fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    fn partner(&mut self, stub: u64) -> u64 {
        self.partner_of(stub)
    }
}

/// Virtual array holding the unpaired stubs, stored as a sparse diff against
/// the identity permutation so that memory scales with the number of
/// removals rather than with `L_N`.
#[derive(Clone, Debug, Default)]
struct SparsePool {
    len: u64,
    at: HashMap<u64, u64>,
    pos: HashMap<u64, u64>,
}

impl SparsePool {
    fn new(len: u64) -> Self {
        SparsePool { len, ..Default::default() }
    }

    fn get(&self, index: u64) -> u64 {
        self.at.get(&index).copied().unwrap_or(index)
    }

    fn position(&self, stub: u64) -> u64 {
        self.pos.get(&stub).copied().unwrap_or(stub)
    }

    fn place(&mut self, index: u64, stub: u64) {
        if index == stub {
            self.at.remove(&index);
            self.pos.remove(&stub);
        } else {
            self.at.insert(index, stub);
            self.pos.insert(stub, index);
        }
    }

    /// Swap-with-last removal.
    fn remove(&mut self, stub: u64) {
        let p = self.position(stub);
        let last = self.len - 1;
        if p != last {
            let moved = self.get(last);
            self.place(p, moved);
        }
        self.at.remove(&last);
        self.pos.remove(&stub);
        self.len -= 1;
    }

    fn take_uniform<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let i = rng.random_range(0..self.len);
        let stub = self.get(i);
        self.remove(stub);
        stub
    }
}

/// Matching revealed on demand (principle of deferred decisions).
#[derive(Clone, Debug)]
pub struct LazyMatching {
    offsets: Vec<u64>,
    pool: SparsePool,
    revealed: HashMap<u64, u64>,
}

impl LazyMatching {
    pub fn new(seq: &DegreeSequence) -> Result<Self> {
        let total = seq.total();
        if total < 2 || total % 2 == 1 {
            return input(format!("cannot pair {total} stubs"));
        }
        Ok(LazyMatching {
            offsets: stub_offsets(seq.degrees()),
            pool: SparsePool::new(total),
            revealed: HashMap::new(),
        })
    }

    pub fn revealed_partner(&self, stub: u64) -> Option<u64> {
        self.revealed.get(&stub).copied()
    }

    pub fn is_revealed(&self, stub: u64) -> bool {
        self.revealed.contains_key(&stub)
    }

    pub fn unrevealed_count(&self) -> u64 {
        self.pool.len
    }

    pub fn revealed_count(&self) -> u64 {
        self.revealed.len() as u64
    }

    /// Pair `stub` with a uniformly chosen stub among the other unpaired
    /// ones.
    pub fn reveal_partner<R: Rng + ?Sized>(&mut self, stub: u64, rng: &mut R) -> Result<u64> {
        let total = *self.offsets.last().unwrap();
        if stub >= total {
            return input(format!("stub {stub} out of range (L_N = {total})"));
        }
        if self.is_revealed(stub) {
            return Err(Error::Usage(format!("stub {stub} is already paired")));
        }
        self.pool.remove(stub);
        let other = self.pool.take_uniform(rng);
        self.revealed.insert(stub, other);
        self.revealed.insert(other, stub);
        Ok(other)
    }

    /// Reveal every remaining pair, lowest unpaired stub first.
    pub fn reveal_all<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let total = *self.offsets.last().unwrap();
        for s in 0..total {
            if !self.is_revealed(s) {
                self.reveal_partner(s, rng).expect("stub is unpaired");
            }
        }
    }

    /// Revealed pairs `(a, b)` with `a < b`, sorted.
    pub fn revealed_pairs(&self) -> Vec<(u64, u64)> {
        let mut pairs: Vec<(u64, u64)> = self
            .revealed
            .iter()
            .filter(|(a, b)| a < b)
            .map(|(&a, &b)| (a, b))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// View that reveals pairings through `rng` as they are queried.
    pub fn walk<'a, R: Rng + ?Sized>(&'a mut self, rng: &'a mut R) -> LazyWalk<'a, R> {
        LazyWalk { matching: self, rng }
    }
}

pub struct LazyWalk<'a, R: ?Sized> {
    matching: &'a mut LazyMatching,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> StubGraph for LazyWalk<'_, R> {
    fn offsets(&self) -> &[u64] {
        &self.matching.offsets
    }

    fn partner(&mut self, stub: u64) -> u64 {
        match self.matching.revealed_partner(stub) {
            Some(p) => p,
            None => self
                .matching
                .reveal_partner(stub, self.rng)
                .expect("stub is unpaired"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(d: &[u64]) -> DegreeSequence {
        DegreeSequence::from_raw(d.to_vec()).unwrap()
    }

    fn assert_involution(m: &EagerMatching) {
        for s in 0..m.partner.len() as u64 {
            let p = m.partner_of(s);
            assert_ne!(p, s);
            assert_eq!(m.partner_of(p), s);
        }
    }

    #[test]
    fn two_stubs_single_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = EagerMatching::build(&seq(&[1, 1]), &mut rng).unwrap();
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let mut out = Vec::new();
        m.write_edge_list(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 2\n");
    }

    #[test]
    fn single_node_self_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = EagerMatching::build(&seq(&[2]), &mut rng).unwrap();
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(m.neighbors(0), vec![0, 0]);
        let mut out = Vec::new();
        m.write_edge_list(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 1\n");
    }

    #[test]
    fn stub_cap_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = EagerMatching::build_with_cap(&seq(&[6, 6]), 10, &mut rng).unwrap_err();
        assert!(err.to_string().contains("stub cap 10"));
        assert!(matches!(err, Error::StubCap { stubs: 12, cap: 10 }));
    }

    #[test]
    fn neighbors_of_hand_built() {
        // degrees [2,1,1]: node 0 stubs 0,1; node 1 stub 2; node 2 stub 3
        let mut m = EagerMatching::from_pairs(&[2, 1, 1], &[(0, 2), (1, 3)]).unwrap();
        assert_eq!(m.neighbors(0), vec![1, 2]);
        assert_eq!(m.neighbors(1), vec![0]);
        assert!(EagerMatching::from_pairs(&[2, 1, 1], &[(0, 2)]).is_err());
        assert!(EagerMatching::from_pairs(&[2, 1, 1], &[(0, 2), (2, 3)]).is_err());
        assert!(EagerMatching::from_pairs(&[2, 1, 1], &[(0, 0), (2, 3)]).is_err());
    }

    #[test]
    fn eager_is_involution_and_handshake() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = seq(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let mut m = EagerMatching::build(&s, &mut rng).unwrap();
        assert_involution(&m);
        let mut sum = 0;
        for v in 0..s.len() {
            let nb = m.neighbors(v);
            assert_eq!(nb.len() as u64, s.degrees()[v]);
            sum += nb.len() as u64;
        }
        assert_eq!(sum, s.total());
        assert_eq!(2 * m.edges().count() as u64, s.total());
    }

    #[test]
    fn lazy_two_stubs_forced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = LazyMatching::new(&seq(&[1, 1])).unwrap();
        assert_eq!(m.reveal_partner(0, &mut rng).unwrap(), 1);
        assert!(matches!(m.reveal_partner(1, &mut rng), Err(Error::Usage(_))));
        assert!(matches!(m.reveal_partner(0, &mut rng), Err(Error::Usage(_))));
        assert_eq!(m.unrevealed_count(), 0);
    }

    #[test]
    fn lazy_reveal_all_is_perfect_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = seq(&[5, 2, 7, 1, 1, 3, 9]);
            let mut m = LazyMatching::new(&s).unwrap();
            // reveal some out of order first
            m.reveal_partner(17, &mut rng).unwrap();
            let p = m.revealed_partner(17).unwrap();
            m.reveal_all(&mut rng);
            assert_eq!(m.revealed_partner(17), Some(p));
            assert_eq!(m.unrevealed_count(), 0);
            let pairs = m.revealed_pairs();
            assert_eq!(pairs.len() as u64 * 2, s.total());
            let mut seen = vec![false; s.total() as usize];
            for (a, b) in pairs {
                assert!(!seen[a as usize] && !seen[b as usize]);
                seen[a as usize] = true;
                seen[b as usize] = true;
            }
            assert!(seen.iter().all(|&x| x));
        }
    }

    #[test]
    fn sparse_pool_stays_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = seq(&[1_000_000, 1_000_000]);
        let mut m = LazyMatching::new(&s).unwrap();
        for stub in 0..100 {
            if !m.is_revealed(stub) {
                m.reveal_partner(stub, &mut rng).unwrap();
            }
        }
        assert!(m.pool.at.len() <= 400);
        assert_eq!(m.unrevealed_count() + m.revealed_count(), s.total());
    }
}
