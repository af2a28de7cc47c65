//! Graph distance between two nodes, with a depth cutoff.
//!
//! Results follow one contract shared by both searches, so that they agree
//! exactly on every fixed matching and are symmetric in `(a, b)`:
//!
//! * `Finite(d)` when `dist(a, b) = d <= cutoff`;
//! * `Infinite` when `a` and `b` are disconnected and at least one of their
//!   components is exhausted within depth `cutoff - 1` of its endpoint;
//! * `ExceedsCutoff(cutoff)` otherwise, i.e. the distance is larger than the
//!   cutoff or could not be told apart from that without exploring further.

use std::collections::HashMap;
use std::fmt;

use crate::matching::StubGraph;

pub const DEFAULT_CUTOFF: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hopcount {
    Finite(u32),
    ExceedsCutoff(u32),
    Infinite,
}

impl Hopcount {
    pub fn finite(self) -> Option<u32> {
        match self {
            Hopcount::Finite(d) => Some(d),
            _ => None,
        }
    }

    /// Label used in CSV and JSON outputs: `3`, `>10`, `inf`.
    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Hopcount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hopcount::Finite(d) => write!(f, "{d}"),
            Hopcount::ExceedsCutoff(c) => write!(f, ">{c}"),
            Hopcount::Infinite => f.write_str("inf"),
        }
    }
}

/// Outcome of a depth-limited breadth-first search from one endpoint.
enum Reach {
    Found(u32),
    Exhausted,
    Frontier,
}

/// Layered BFS from `src` up to depth `limit`. Stops as soon as a node in
/// `stop` is discovered; `depths` receives every visited node.
fn layered_bfs<G: StubGraph + ?Sized>(
    g: &mut G,
    src: usize,
    limit: u32,
    stop: impl Fn(usize) -> bool,
    depths: &mut HashMap<usize, u32>,
) -> Reach {
    depths.insert(src, 0);
    let mut frontier = vec![src];
    let mut depth = 0;
    while depth < limit {
        let mut next = Vec::new();
        for &v in &frontier {
            for s in g.stubs(v) {
                let w = g.across(s);
                if stop(w) {
                    return Reach::Found(depth + 1);
                }
                if let std::collections::hash_map::Entry::Vacant(e) = depths.entry(w) {
                    e.insert(depth + 1);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return Reach::Exhausted;
        }
        frontier = next;
        depth += 1;
    }
    Reach::Frontier
}

/// Single-source breadth-first hopcount from `a`.
pub fn hopcount<G: StubGraph + ?Sized>(g: &mut G, a: usize, b: usize, cutoff: u32) -> Hopcount {
    assert!(cutoff >= 1, "cutoff must be >= 1");
    if a == b {
        return Hopcount::Finite(0);
    }
    let mut from_a = HashMap::new();
    match layered_bfs(g, a, cutoff, |w| w == b, &mut from_a) {
        Reach::Found(d) => return Hopcount::Finite(d),
        Reach::Exhausted => return Hopcount::Infinite,
        Reach::Frontier => {}
    }
    // a's ball of radius `cutoff` misses b; b's component may still be small.
    let mut from_b = HashMap::new();
    match layered_bfs(g, b, cutoff, |w| from_a.contains_key(&w), &mut from_b) {
        Reach::Exhausted => Hopcount::Infinite,
        Reach::Found(_) | Reach::Frontier => Hopcount::ExceedsCutoff(cutoff),
    }
}

struct Side {
    depths: HashMap<usize, u32>,
    frontier: Vec<usize>,
    depth: u32,
    /// A layer at depth `cutoff` exists, so this endpoint's component
    /// reaches beyond the cutoff.
    saturated: bool,
}

impl Side {
    fn new(v: usize) -> Self {
        Side {
            depths: HashMap::from([(v, 0)]),
            frontier: vec![v],
            depth: 0,
            saturated: false,
        }
    }

    fn weight<G: StubGraph + ?Sized>(&self, g: &G) -> u64 {
        self.frontier.iter().map(|&v| g.degree(v)).sum()
    }
}

enum Step {
    Met(u32),
    Grew,
    Exhausted,
}

fn expand<G: StubGraph + ?Sized>(g: &mut G, side: &mut Side, other: &Side) -> Step {
    let mut next = Vec::new();
    for &v in &side.frontier {
        for s in g.stubs(v) {
            let w = g.across(s);
            if let Some(&dw) = other.depths.get(&w) {
                return Step::Met(side.depth + 1 + dw);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = side.depths.entry(w) {
                e.insert(side.depth + 1);
                next.push(w);
            }
        }
    }
    if next.is_empty() {
        return Step::Exhausted;
    }
    side.frontier = next;
    side.depth += 1;
    Step::Grew
}

/// Bidirectional breadth-first hopcount. Always expands the endpoint whose
/// current frontier carries fewer stubs, and stops at the first stub that
/// links the two explored regions.
pub fn bidirectional_hopcount<G: StubGraph + ?Sized>(
    g: &mut G,
    a: usize,
    b: usize,
    cutoff: u32,
) -> Hopcount {
    assert!(cutoff >= 1, "cutoff must be >= 1");
    if a == b {
        return Hopcount::Finite(0);
    }
    let mut sides = [Side::new(a), Side::new(b)];
    loop {
        // Invariant: no path of length <= depth_a + depth_b exists.
        let pick = match (sides[0].saturated, sides[1].saturated) {
            (true, true) => return Hopcount::ExceedsCutoff(cutoff),
            (true, false) => 1,
            (false, true) => 0,
            (false, false) => usize::from(sides[1].weight(g) < sides[0].weight(g)),
        };
        let [first, second] = &mut sides;
        let (side, other) = if pick == 0 { (first, &*second) } else { (second, &*first) };
        match expand(g, side, other) {
            Step::Met(d) if d <= cutoff => return Hopcount::Finite(d),
            Step::Met(_) => return Hopcount::ExceedsCutoff(cutoff),
            Step::Exhausted => return Hopcount::Infinite,
            Step::Grew => {
                if side.depth >= cutoff {
                    side.saturated = true;
                }
            }
        }
    }
}
