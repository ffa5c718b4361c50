//! Traversal pairs and the viable-interval machinery built on them.
//!
//! A traversal pair is two walks over an st-ordered graph: `pi_l` explores
//! `v_1..v_n` reaching each new node through already-ordered smaller nodes,
//! `pi_r` mirrors it from the top. The pair gives every agent a shared,
//! precomputable route plan; its `size` bounds walk lengths and its `radius`
//! bounds constrained homebase round trips.

use crate::error::TraversalError;
use crate::graph::{Graph, NodeId, Ordering};
use serde::{Deserialize, Serialize};

/// Which walk (and which constraint family) an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalPair {
    pub ordering: Ordering,
    /// Walk from `v_1` visiting first occurrences in increasing order.
    pub pi_l: Vec<NodeId>,
    /// Walk from `v_n` visiting first occurrences in decreasing order.
    pub pi_r: Vec<NodeId>,
    /// max walk length, in edges.
    pub size: usize,
    /// max over nodes of the constrained shortest-path length from the
    /// homebase (prefix-constrained on the left, suffix-constrained on the
    /// right, with the homebase itself always permitted as start).
    pub radius: usize,
}

/// Contiguous block of ordering indices with its traversal weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    /// 1-based ordering index, inclusive.
    pub lo: usize,
    pub hi: usize,
    pub weight: usize,
}

impl Interval {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.lo <= idx && idx <= self.hi
    }
}

/// Disjoint cover of `1..=n` by intervals, all but the last of weight at
/// least `2 * radius`, each of weight at most `6 * radius` and node count at
/// most `radius + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalPartition {
    pub intervals: Vec<Interval>,
}

impl TraversalPair {
    pub fn n(&self) -> usize {
        self.ordering.len()
    }

    pub fn homebase(&self) -> NodeId {
        self.ordering.homebase
    }

    /// 1-based ordering index of a node.
    pub fn rank(&self, v: NodeId) -> usize {
        self.ordering.rank[v]
    }

    pub fn node(&self, idx: usize) -> NodeId {
        self.ordering.node(idx)
    }

    pub fn walk(&self, side: Side) -> &[NodeId] {
        match side {
            Side::Left => &self.pi_l,
            Side::Right => &self.pi_r,
        }
    }

    /// Position of the first occurrence of ordering index `idx` in the walk.
    pub fn first_occurrence(&self, side: Side, idx: usize) -> usize {
        let v = self.node(idx);
        self.walk(side)
            .iter()
            .position(|&w| w == v)
            .expect("walk visits every node")
    }
}

fn prefix_mask(tp_ordering: &Ordering, upto: usize) -> Vec<bool> {
    let mut allowed = vec![false; tp_ordering.len()];
    for k in 1..=upto {
        allowed[tp_ordering.node(k)] = true;
    }
    allowed
}

/// Suffix members only; the base right walk must not shortcut through the
/// homebase.
fn suffix_mask_pure(tp_ordering: &Ordering, from: usize) -> Vec<bool> {
    let mut allowed = vec![false; tp_ordering.len()];
    for k in from..=tp_ordering.len() {
        allowed[tp_ordering.node(k)] = true;
    }
    allowed
}

/// Suffix members plus the homebase, which is always a permitted start point
/// for radius paths, access paths and normalization detours.
fn suffix_mask(tp_ordering: &Ordering, from: usize) -> Vec<bool> {
    let mut allowed = suffix_mask_pure(tp_ordering, from);
    allowed[tp_ordering.homebase] = true;
    allowed
}

/// Builds the pair by chaining lexicographically-least shortest paths between
/// consecutive ordered nodes inside the growing prefix (resp. shrinking
/// suffix) subgraph, then computes size and radius.
pub fn build_traversal_pair(g: &Graph, o: &Ordering) -> Result<TraversalPair, TraversalError> {
    o.validate(g)
        .map_err(|e| TraversalError::InvalidOrdering(e.to_string()))?;
    let n = o.len();

    let mut pi_l = vec![o.node(1)];
    for i in 1..n {
        let allowed = prefix_mask(o, i + 1);
        let hop = g
            .lex_shortest_path(o.node(i), o.node(i + 1), &allowed)
            .expect("prefix is connected");
        pi_l.extend_from_slice(&hop[1..]);
    }

    let mut pi_r = vec![o.node(n)];
    for i in (1..n).rev() {
        let allowed = suffix_mask_pure(o, i);
        let hop = g
            .lex_shortest_path(o.node(i + 1), o.node(i), &allowed)
            .expect("suffix is connected");
        pi_r.extend_from_slice(&hop[1..]);
    }

    let radius = compute_radius(g, o);
    let size = (pi_l.len() - 1).max(pi_r.len() - 1);
    let tp = TraversalPair { ordering: o.clone(), pi_l, pi_r, size, radius };
    debug_assert!(validate_pair(g, &tp).is_ok());
    Ok(tp)
}

fn compute_radius(g: &Graph, o: &Ordering) -> usize {
    let n = o.len();
    let h = o.homebase;
    let mut radius = 0;
    for idx in 1..=n {
        let w = o.node(idx);
        let d_left = g.bfs_dist(h, &prefix_mask(o, idx))[w];
        let d_right = g.bfs_dist(h, &suffix_mask(o, idx))[w];
        assert_ne!(d_left, usize::MAX, "prefix path to v_{idx} must exist");
        assert_ne!(d_right, usize::MAX, "suffix path to v_{idx} must exist");
        radius = radius.max(d_left).max(d_right);
    }
    radius
}

/// Checks the walk invariants: endpoints, adjacency of consecutive entries,
/// first occurrences in order, and the crossing constraint (nodes visited
/// before first reaching `v_j` have rank at most `j` on the left and at
/// least `j` on the right, the homebase being exempt on the right).
pub fn validate_pair(g: &Graph, tp: &TraversalPair) -> Result<(), TraversalError> {
    let bad = |m: String| Err(TraversalError::InvalidOrdering(m));
    let n = tp.n();
    for (side, walk) in [(Side::Left, &tp.pi_l), (Side::Right, &tp.pi_r)] {
        let start = match side {
            Side::Left => tp.node(1),
            Side::Right => tp.node(n),
        };
        if walk.first() != Some(&start) {
            return bad(format!("{side:?} walk does not start at its endpoint"));
        }
        for pair in walk.windows(2) {
            if !g.has_edge(pair[0], pair[1]) {
                return bad(format!("{side:?} walk uses a non-edge {}-{}", pair[0], pair[1]));
            }
        }
        let mut next_expected: Box<dyn Iterator<Item = usize>> = match side {
            Side::Left => Box::new(1..=n),
            Side::Right => Box::new((1..=n).rev()),
        };
        let mut want = next_expected.next();
        let mut seen_rank_bound: Vec<usize> = Vec::new();
        for &v in walk {
            let r = tp.rank(v);
            if Some(r) == want {
                want = next_expected.next();
            }
            seen_rank_bound.push(r);
            // crossing constraint relative to the next first occurrence
            if let Some(j) = want {
                let ok = match side {
                    Side::Left => r <= j,
                    Side::Right => r >= j || v == tp.homebase(),
                };
                if !ok {
                    return bad(format!(
                        "{side:?} walk crosses rank {r} before first reaching v_{j}"
                    ));
                }
            }
        }
        if want.is_some() {
            return bad(format!("{side:?} walk does not visit every node"));
        }
    }
    if tp.size != (tp.pi_l.len() - 1).max(tp.pi_r.len() - 1) {
        return bad("size field inconsistent with walks".into());
    }
    Ok(())
}

/// Weight of the interval `[v_lo, v_hi]`: edges between first occurrences in
/// each walk, summed.
pub fn interval_weight(tp: &TraversalPair, lo: usize, hi: usize) -> Result<usize, TraversalError> {
    let n = tp.n();
    if lo < 1 || hi > n || lo > hi {
        return Err(TraversalError::IndexError { lo, hi, n });
    }
    let wl = tp.first_occurrence(Side::Left, hi) - tp.first_occurrence(Side::Left, lo);
    let wr = tp.first_occurrence(Side::Right, lo) - tp.first_occurrence(Side::Right, hi);
    Ok(wl + wr)
}

/// Rewrites any consecutive-pair subwalk longer than `2 * radius` into the
/// homebase-routed detour (constrained shortest path to the homebase, then
/// back out), forcing `w([v_i, v_{i+1}]) <= 4 * radius` everywhere.
/// Idempotent.
pub fn normalize_property1(g: &Graph, tp: &TraversalPair) -> TraversalPair {
    let n = tp.n();
    let o = &tp.ordering;
    let h = tp.homebase();
    let r = tp.radius;

    let rebuild = |side: Side| -> Vec<NodeId> {
        let walk = tp.walk(side);
        let idx_seq: Vec<usize> = match side {
            Side::Left => (1..=n).collect(),
            Side::Right => (1..=n).rev().collect(),
        };
        let mut out = vec![walk[0]];
        for w in idx_seq.windows(2) {
            let (from_idx, to_idx) = (w[0], w[1]);
            let a = tp.first_occurrence(side, from_idx);
            let b = tp.first_occurrence(side, to_idx);
            let (a, b) = (a.min(b), a.max(b));
            let seg = &walk[a..=b];
            if seg.len() - 1 <= 2 * r {
                out.extend_from_slice(&seg[1..]);
            } else {
                // via the homebase: constrained both ways, each half <= radius
                let (back_mask, fwd_mask) = match side {
                    Side::Left => (prefix_mask(o, from_idx), prefix_mask(o, to_idx)),
                    Side::Right => (suffix_mask(o, from_idx), suffix_mask(o, to_idx)),
                };
                let to_home = g
                    .lex_shortest_path(o.node(from_idx), h, &back_mask)
                    .expect("radius bound guarantees a constrained path");
                let from_home = g
                    .lex_shortest_path(h, o.node(to_idx), &fwd_mask)
                    .expect("radius bound guarantees a constrained path");
                debug_assert!(to_home.len() - 1 <= r && from_home.len() - 1 <= r);
                out.extend_from_slice(&to_home[1..]);
                out.extend_from_slice(&from_home[1..]);
            }
        }
        out
    };

    let pi_l = rebuild(Side::Left);
    let pi_r = rebuild(Side::Right);
    let size = (pi_l.len() - 1).max(pi_r.len() - 1);
    TraversalPair { ordering: tp.ordering.clone(), pi_l, pi_r, size, radius: tp.radius }
}

/// Greedy left-to-right viable partition: grow the current interval until its
/// weight first reaches `2 * radius`, close it, continue; the last interval
/// keeps whatever remains.
pub fn partition_viable(tp: &TraversalPair) -> IntervalPartition {
    let n = tp.n();
    let target = 2 * tp.radius;
    let mut intervals = Vec::new();
    let mut lo = 1;
    while lo <= n {
        let mut hi = lo;
        let mut weight = 0;
        while hi < n && weight < target {
            hi += 1;
            weight = interval_weight(tp, lo, hi).expect("in range");
        }
        intervals.push(Interval { lo, hi, weight });
        lo = hi + 1;
    }
    IntervalPartition { intervals }
}

impl IntervalPartition {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Interval containing ordering index `idx`.
    pub fn containing(&self, idx: usize) -> Option<&Interval> {
        self.intervals.iter().find(|u| u.contains(idx))
    }

    /// Disjoint cover, weight floor for all but the last, weight ceiling and
    /// node-count ceiling for all.
    pub fn validate(&self, tp: &TraversalPair) -> Result<(), TraversalError> {
        let bad = |m: String| Err(TraversalError::InvalidOrdering(m));
        let n = tp.n();
        let f = self.intervals.len();
        let mut expect = 1;
        for (i, u) in self.intervals.iter().enumerate() {
            if u.lo != expect || u.hi < u.lo || u.hi > n {
                return bad(format!("interval {i} breaks the disjoint cover"));
            }
            expect = u.hi + 1;
            let w = interval_weight(tp, u.lo, u.hi)?;
            if w != u.weight {
                return bad(format!("interval {i} has stale weight"));
            }
            if i + 1 < f && w < 2 * tp.radius {
                return bad(format!("interval {i} under the 2r floor"));
            }
            if w > 6 * tp.radius {
                return bad(format!("interval {i} over the 6r ceiling"));
            }
            if u.len() > tp.radius + 1 {
                return bad(format!("interval {i} has more than r+1 nodes"));
            }
        }
        if expect != n + 1 {
            return bad("intervals do not cover the ordering".into());
        }
        Ok(())
    }
}

/// Shortest homebase-to-target path crossing only `[v_1, target]` (left) or
/// `[target, v_n]` plus the homebase (right). Length is at most `radius` by
/// definition of the radius.
pub fn access_path(tp: &TraversalPair, g: &Graph, target_idx: usize, side: Side) -> Vec<NodeId> {
    let o = &tp.ordering;
    let allowed = match side {
        Side::Left => prefix_mask(o, target_idx),
        Side::Right => suffix_mask(o, target_idx),
    };
    let path = g
        .lex_shortest_path(tp.homebase(), o.node(target_idx), &allowed)
        .expect("radius definition guarantees existence");
    debug_assert!(path.len() - 1 <= tp.radius);
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{default_endpoints, generate_graph, st_numbering, GraphSpec};

    fn pair_for(spec: &GraphSpec, seed: u64) -> (Graph, TraversalPair) {
        let g = generate_graph(spec, seed).unwrap();
        let (s, t) = default_endpoints(&g);
        let o = st_numbering(&g, s, t).unwrap();
        let tp = build_traversal_pair(&g, &o).unwrap();
        (g, tp)
    }

    /// Independent radius oracle: plain BFS per node over the masked graph.
    fn radius_oracle(g: &Graph, o: &Ordering) -> usize {
        let n = o.len();
        let mut best = 0;
        for idx in 1..=n {
            for left in [true, false] {
                let mut allowed = vec![false; n];
                if left {
                    for k in 1..=idx {
                        allowed[o.node(k)] = true;
                    }
                } else {
                    for k in idx..=n {
                        allowed[o.node(k)] = true;
                    }
                    allowed[o.homebase] = true;
                }
                let d = g.bfs_dist(o.homebase, &allowed)[o.node(idx)];
                assert_ne!(d, usize::MAX);
                best = best.max(d);
            }
        }
        best
    }

    #[test]
    fn ring4_pair_matches_oracle() {
        let (g, tp) = pair_for(&GraphSpec::Ring(4), 0);
        assert_eq!(tp.pi_l, vec![0, 1, 2, 3]);
        assert_eq!(tp.pi_r, vec![3, 2, 1, 0]);
        assert_eq!(tp.size, 3);
        // r_u(v3) = 2 inside the prefix {v1,v2,v3}; every right-side target
        // is one hop from the homebase or reachable through the terminal.
        assert_eq!(tp.radius, 2);
        assert_eq!(tp.radius, radius_oracle(&g, &tp.ordering));
    }

    #[test]
    fn k5_pair_size_and_radius() {
        let (g, tp) = pair_for(&GraphSpec::Complete(5), 0);
        assert_eq!(tp.size, 4);
        assert_eq!(tp.radius, 1);
        assert_eq!(tp.radius, radius_oracle(&g, &tp.ordering));
    }

    #[test]
    fn k3_pair() {
        let (_, tp) = pair_for(&GraphSpec::Complete(3), 0);
        assert_eq!(tp.pi_l.len() - 1, 2);
        assert_eq!(tp.pi_r.len() - 1, 2);
        assert_eq!(tp.size, 2);
    }

    #[test]
    fn interval_weights_ring() {
        let (_, tp) = pair_for(&GraphSpec::Ring(4), 0);
        assert_eq!(interval_weight(&tp, 2, 3).unwrap(), 2);
        assert_eq!(interval_weight(&tp, 2, 2).unwrap(), 0);
        let (_, tp8) = pair_for(&GraphSpec::Ring(8), 0);
        assert_eq!(interval_weight(&tp8, 1, 8).unwrap(), 14);
        assert!(matches!(
            interval_weight(&tp8, 0, 3),
            Err(TraversalError::IndexError { .. })
        ));
        assert!(interval_weight(&tp8, 3, 9).is_err());
    }

    #[test]
    fn interval_weight_is_additive() {
        let (_, tp) = pair_for(&GraphSpec::RandomBiconnected { n: 14, m: 25 }, 3);
        let n = tp.n();
        for lo in 1..=n {
            for hi in lo..=n {
                let direct = interval_weight(&tp, lo, hi).unwrap();
                let summed: usize = (lo..hi)
                    .map(|j| interval_weight(&tp, j, j + 1).unwrap())
                    .sum();
                assert_eq!(direct, summed);
            }
        }
    }

    #[test]
    fn normalization_bounds_and_idempotence() {
        for spec in [
            GraphSpec::Ring(4),
            GraphSpec::Complete(5),
            GraphSpec::Grid(3, 4),
            GraphSpec::RandomBiconnected { n: 20, m: 40 },
        ] {
            let (g, tp) = pair_for(&spec, 11);
            let norm = normalize_property1(&g, &tp);
            validate_pair(&g, &norm).unwrap();
            for i in 1..norm.n() {
                assert!(
                    interval_weight(&norm, i, i + 1).unwrap() <= 4 * norm.radius,
                    "{spec:?}: consecutive weight above 4r at {i}"
                );
            }
            let twice = normalize_property1(&g, &norm);
            assert_eq!(norm, twice, "{spec:?}: normalize not idempotent");
        }
    }

    #[test]
    fn ring4_already_normalized() {
        let (g, tp) = pair_for(&GraphSpec::Ring(4), 0);
        let norm = normalize_property1(&g, &tp);
        assert_eq!(tp, norm);
    }

    #[test]
    fn k5_normalized_hops_within_2r() {
        let (g, tp) = pair_for(&GraphSpec::Complete(5), 0);
        let norm = normalize_property1(&g, &tp);
        for i in 1..norm.n() {
            let wl = norm.first_occurrence(Side::Left, i + 1) - norm.first_occurrence(Side::Left, i);
            let wr = norm.first_occurrence(Side::Right, i) - norm.first_occurrence(Side::Right, i + 1);
            assert!(wl <= 2 && wr <= 2, "each consecutive subwalk forced to <= 2 = 2r");
        }
    }

    /// Independent greedy oracle for the partition.
    fn greedy_oracle(tp: &TraversalPair) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut lo = 1;
        while lo <= tp.n() {
            let mut hi = lo;
            while hi < tp.n() && interval_weight(tp, lo, hi).unwrap() < 2 * tp.radius {
                hi += 1;
            }
            out.push((lo, hi));
            lo = hi + 1;
        }
        out
    }

    #[test]
    fn partition_examples() {
        let (g, tp) = pair_for(&GraphSpec::Complete(5), 0);
        let tp = normalize_property1(&g, &tp);
        let p = partition_viable(&tp);
        let got: Vec<_> = p.intervals.iter().map(|u| (u.lo, u.hi, u.weight)).collect();
        assert_eq!(got, vec![(1, 2, 2), (3, 4, 2), (5, 5, 0)]);
        p.validate(&tp).unwrap();

        // ring:8 has radius 6 (r_u(v7) walks the whole low arc), so the
        // greedy closes its first interval once the weight reaches 12
        let (g8, tp8) = pair_for(&GraphSpec::Ring(8), 0);
        let tp8 = normalize_property1(&g8, &tp8);
        assert_eq!(tp8.radius, 6);
        let p8 = partition_viable(&tp8);
        let got8: Vec<_> = p8.intervals.iter().map(|u| (u.lo, u.hi, u.weight)).collect();
        assert_eq!(got8, vec![(1, 7, 12), (8, 8, 0)]);
        p8.validate(&tp8).unwrap();

        let (g3, tp3) = pair_for(&GraphSpec::Complete(3), 0);
        let tp3 = normalize_property1(&g3, &tp3);
        let p3 = partition_viable(&tp3);
        let got3: Vec<_> = p3.intervals.iter().map(|u| (u.lo, u.hi, u.weight)).collect();
        assert_eq!(got3, vec![(1, 2, 2), (3, 3, 0)]);
    }

    #[test]
    fn partition_matches_oracle_on_random_graphs() {
        for seed in 0..30 {
            let n = 5 + (seed as usize % 24);
            let m = n + 1 + (seed as usize % n);
            let (g, tp) = pair_for(&GraphSpec::RandomBiconnected { n, m }, 400 + seed);
            let tp = normalize_property1(&g, &tp);
            let p = partition_viable(&tp);
            let got: Vec<_> = p.intervals.iter().map(|u| (u.lo, u.hi)).collect();
            assert_eq!(got, greedy_oracle(&tp), "seed {seed}");
            p.validate(&tp).unwrap();
        }
    }

    #[test]
    fn access_paths_ring4() {
        let (g, tp) = pair_for(&GraphSpec::Ring(4), 0);
        assert_eq!(access_path(&tp, &g, 2, Side::Left), vec![0, 1]);
        // the homebase is a permitted start, so its direct edge into the
        // suffix is the shortest right-side access
        assert_eq!(access_path(&tp, &g, 2, Side::Right), vec![0, 1]);
        assert_eq!(access_path(&tp, &g, 3, Side::Right), vec![0, 3, 2]);
        assert_eq!(access_path(&tp, &g, 1, Side::Left), vec![0]);
    }

    #[test]
    fn access_paths_constrained_on_random_graphs() {
        for seed in 0..20 {
            let n = 6 + (seed as usize % 27);
            let m = n + (seed as usize % (2 * n));
            let m = m.min(n * (n - 1) / 2);
            let (g, tp) = pair_for(&GraphSpec::RandomBiconnected { n, m }, 900 + seed);
            for idx in 1..=tp.n() {
                for side in [Side::Left, Side::Right] {
                    let path = access_path(&tp, &g, idx, side);
                    assert!(path.len() - 1 <= tp.radius, "length within radius");
                    assert_eq!(*path.first().unwrap(), tp.homebase());
                    assert_eq!(*path.last().unwrap(), tp.node(idx));
                    for &v in &path {
                        let ok = match side {
                            Side::Left => tp.rank(v) <= idx,
                            Side::Right => tp.rank(v) >= idx || v == tp.homebase(),
                        };
                        assert!(ok, "membership constraint violated");
                    }
                }
            }
        }
    }

    #[test]
    fn radius_le_size_across_arenas() {
        for spec in [
            GraphSpec::Ring(6),
            GraphSpec::Complete(7),
            GraphSpec::Grid(3, 4),
            GraphSpec::RandomBiconnected { n: 18, m: 30 },
        ] {
            let (_, tp) = pair_for(&spec, 21);
            assert!(tp.radius <= tp.size, "{spec:?}");
            let n = tp.n();
            assert!(tp.size <= n * (n - 1), "{spec:?}: loose construction bound");
        }
    }
}
