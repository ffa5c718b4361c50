//! Graph arena: parsing, generators, biconnectivity, st-ordering.
//!
//! Nodes are `0..n` internally. Agents treat nodes as anonymous; protocols
//! only ever address topology through the ordering and traversal pair that
//! every agent derives from the same shared map, so the internal ids are
//! simulation bookkeeping, not protocol inputs.

use crate::error::GraphError;
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub type NodeId = usize;

/// Undirected simple graph with per-node port labels.
///
/// Ports at each node are `0..degree`, assigned in ascending neighbor-id
/// order, so any two parties that agree on the edge list agree on ports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from an explicit node count and edge set.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        if n == 0 || edges.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n || v >= n {
                return Err(GraphError::Malformed(format!(
                    "edge {u}-{v} references node >= {n}"
                )));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { adj })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    /// Neighbors in ascending id order; position is the port label.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Port at `u` leading to `v`.
    pub fn port_to(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.adj[u].binary_search(&v).ok()
    }

    pub fn neighbor_at(&self, u: NodeId, port: usize) -> Option<NodeId> {
        self.adj[u].get(port).copied()
    }

    /// Every unordered edge once, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, vs)| {
            vs.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.node_count()
    }

    /// True iff the graph has >= 3 nodes, is connected, and has no cut vertex.
    pub fn is_biconnected(&self) -> bool {
        let n = self.node_count();
        if n < 3 || !self.is_connected() {
            return false;
        }
        // Iterative Hopcroft-Tarjan lowpoint scan rooted at 0.
        let mut depth = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut parent = vec![usize::MAX; n];
        let mut next_child = vec![0usize; n];
        let mut root_children = 0usize;
        depth[0] = 0;
        low[0] = 0;
        let mut stack = vec![0usize];
        while let Some(&u) = stack.last() {
            if next_child[u] < self.adj[u].len() {
                let v = self.adj[u][next_child[u]];
                next_child[u] += 1;
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    low[v] = depth[v];
                    parent[v] = u;
                    if u == 0 {
                        root_children += 1;
                    }
                    stack.push(v);
                } else if v != parent[u] {
                    low[u] = low[u].min(depth[v]);
                }
            } else {
                stack.pop();
                if let Some(&p) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if p != 0 && low[u] >= depth[p] {
                        return false; // p is a cut vertex
                    }
                }
            }
        }
        root_children <= 1
    }

    /// BFS distances from `src` over the nodes where `allowed` is true.
    /// `usize::MAX` marks unreachable. `src` must be allowed.
    pub fn bfs_dist(&self, src: NodeId, allowed: &[bool]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        debug_assert!(allowed[src]);
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if allowed[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Lexicographically smallest shortest path from `src` to `dst` inside
    /// the allowed node set. Returns the node sequence including endpoints.
    pub fn lex_shortest_path(
        &self,
        src: NodeId,
        dst: NodeId,
        allowed: &[bool],
    ) -> Option<Vec<NodeId>> {
        if !allowed[src] || !allowed[dst] {
            return None;
        }
        let dist = self.bfs_dist(dst, allowed);
        if dist[src] == usize::MAX {
            return None;
        }
        let mut path = vec![src];
        let mut cur = src;
        while cur != dst {
            let next = self
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&v| allowed[v] && dist[v] == dist[cur] - 1)
                .expect("BFS distance field must admit a descent step");
            path.push(next);
            cur = next;
        }
        Some(path)
    }
}

/// Total ordering of the nodes between two adjacent endpoints such that
/// every prefix and every suffix induces a connected subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    /// `perm[k]` is the node with 1-based ordering index `k + 1`.
    pub perm: Vec<NodeId>,
    /// `rank[node]` is the 1-based ordering index of `node`.
    pub rank: Vec<usize>,
    pub homebase: NodeId,
    pub terminal: NodeId,
}

impl Ordering {
    fn from_perm(perm: Vec<NodeId>) -> Self {
        let mut rank = vec![0; perm.len()];
        for (i, &v) in perm.iter().enumerate() {
            rank[v] = i + 1;
        }
        let homebase = perm[0];
        let terminal = *perm.last().expect("ordering is nonempty");
        Self { perm, rank, homebase, terminal }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Node at 1-based index.
    pub fn node(&self, idx: usize) -> NodeId {
        self.perm[idx - 1]
    }

    /// Checks the full ordering contract against `g`: a bijection on the
    /// nodes, adjacent endpoints, and connected prefixes and suffixes.
    pub fn validate(&self, g: &Graph) -> Result<(), GraphError> {
        let n = g.node_count();
        if self.perm.len() != n {
            return Err(GraphError::NotBiconnected);
        }
        let mut seen = vec![false; n];
        for &v in &self.perm {
            if v >= n || seen[v] {
                return Err(GraphError::Malformed("ordering is not a permutation".into()));
            }
            seen[v] = true;
        }
        if !g.has_edge(self.homebase, self.terminal) {
            return Err(GraphError::NotAdjacent(self.homebase, self.terminal));
        }
        let connected_induced = |members: &[NodeId]| -> bool {
            let mut allowed = vec![false; n];
            for &v in members {
                allowed[v] = true;
            }
            let dist = g.bfs_dist(members[0], &allowed);
            members.iter().all(|&v| dist[v] != usize::MAX)
        };
        for k in 1..=n {
            if !connected_induced(&self.perm[..k]) || !connected_induced(&self.perm[k - 1..]) {
                return Err(GraphError::Malformed(format!(
                    "prefix/suffix at cut {k} not connected"
                )));
            }
        }
        Ok(())
    }
}

/// st-ordering via DFS lowpoints and Tarjan's sign rule. The contract is the
/// prefix/suffix connectivity invariant, which `Ordering::validate` checks.
pub fn st_numbering(g: &Graph, s: NodeId, t: NodeId) -> Result<Ordering, GraphError> {
    if !g.has_edge(s, t) {
        return Err(GraphError::NotAdjacent(s, t));
    }
    if !g.is_biconnected() {
        return Err(GraphError::NotBiconnected);
    }
    let n = g.node_count();

    // DFS from s forcing the tree edge s->t first; neighbor ties by id.
    let mut pre = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut low_vertex = vec![usize::MAX; n]; // vertex attaining the lowpoint
    let mut preorder = Vec::with_capacity(n);
    let mut next_child = vec![0usize; n];
    let order_at = |u: NodeId, k: usize| -> Option<NodeId> {
        if u == s {
            // t first, then the rest ascending with t skipped.
            if k == 0 {
                return Some(t);
            }
            let mut idx = k - 1;
            for &v in g.neighbors(u) {
                if v == t {
                    continue;
                }
                if idx == 0 {
                    return Some(v);
                }
                idx -= 1;
            }
            None
        } else {
            g.neighbors(u).get(k).copied()
        }
    };

    pre[s] = 0;
    low_vertex[s] = s;
    preorder.push(s);
    let mut stack = vec![s];
    while let Some(&u) = stack.last() {
        if let Some(v) = order_at(u, next_child[u]) {
            next_child[u] += 1;
            if pre[v] == usize::MAX {
                pre[v] = preorder.len();
                low_vertex[v] = v;
                parent[v] = u;
                preorder.push(v);
                stack.push(v);
            } else if v != parent[u] && pre[v] < pre[low_vertex[u]] {
                low_vertex[u] = v;
            }
        } else {
            stack.pop();
            if let Some(&p) = stack.last() {
                if pre[low_vertex[u]] < pre[low_vertex[p]] {
                    low_vertex[p] = low_vertex[u];
                }
            }
        }
    }

    // Sign pass over a linked list seeded with <s, t>.
    #[derive(Clone, Copy, PartialEq)]
    enum Sign {
        Plus,
        Minus,
    }
    let mut sign = vec![Sign::Plus; n];
    sign[s] = Sign::Minus;
    let mut next = vec![usize::MAX; n];
    let mut prev = vec![usize::MAX; n];
    next[s] = t;
    prev[t] = s;
    let mut head = s;
    for &v in preorder.iter().skip(1) {
        if v == t {
            continue;
        }
        let p = parent[v];
        if sign[low_vertex[v]] == Sign::Minus {
            // insert v before p
            let before = prev[p];
            prev[v] = before;
            next[v] = p;
            prev[p] = v;
            if before == usize::MAX {
                head = v;
            } else {
                next[before] = v;
            }
            sign[p] = Sign::Plus;
        } else {
            // insert v after p
            let after = next[p];
            next[v] = after;
            prev[v] = p;
            next[p] = v;
            if after != usize::MAX {
                prev[after] = v;
            }
            sign[p] = Sign::Minus;
        }
    }

    let mut perm = Vec::with_capacity(n);
    let mut cur = head;
    while cur != usize::MAX {
        perm.push(cur);
        cur = next[cur];
    }
    let ordering = Ordering::from_perm(perm);
    debug_assert!(ordering.validate(g).is_ok());
    Ok(ordering)
}

/// Parses an edge-list document: one `u v` pair per line, `#` comments and
/// blank lines ignored. Node ids are compacted to `0..n` preserving order.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut raw_edges = Vec::new();
    let mut ids = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (a, b) = (it.next(), it.next());
        let (a, b) = match (a, b, it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::Malformed(format!(
                    "line {}: expected 'u v'",
                    lineno + 1
                )))
            }
        };
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| {
                GraphError::Malformed(format!("line {}: bad node id '{s}'", lineno + 1))
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        ids.insert(u);
        ids.insert(v);
        raw_edges.push((u, v));
    }
    if raw_edges.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let compact: std::collections::BTreeMap<usize, usize> =
        ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges: Vec<(usize, usize)> = raw_edges
        .iter()
        .map(|&(u, v)| (compact[&u], compact[&v]))
        .collect();
    Graph::from_edges(ids.len(), &edges)
}

/// Generator descriptor, e.g. `ring:8` or `random-biconnected:12,20`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphSpec {
    Ring(usize),
    Complete(usize),
    /// Torus grid `a x b`; both dimensions wrap.
    Grid(usize, usize),
    RandomBiconnected { n: usize, m: usize },
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Ring(n) => write!(f, "ring:{n}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Grid(a, b) => write!(f, "grid:{a}x{b}"),
            GraphSpec::RandomBiconnected { n, m } => write!(f, "random-biconnected:{n},{m}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::InfeasibleSpec(format!("unrecognized descriptor '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "ring" => Ok(GraphSpec::Ring(rest.parse().map_err(|_| bad())?)),
            "complete" => Ok(GraphSpec::Complete(rest.parse().map_err(|_| bad())?)),
            "grid" => {
                let (a, b) = rest.split_once(['x', 'X']).ok_or_else(bad)?;
                Ok(GraphSpec::Grid(
                    a.parse().map_err(|_| bad())?,
                    b.parse().map_err(|_| bad())?,
                ))
            }
            "random-biconnected" => {
                let (n, m) = rest.split_once(',').ok_or_else(bad)?;
                Ok(GraphSpec::RandomBiconnected {
                    n: n.parse().map_err(|_| bad())?,
                    m: m.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Deterministic per `(spec, seed)`; the output always passes
/// [`Graph::is_biconnected`].
pub fn generate_graph(spec: &GraphSpec, seed: u64) -> Result<Graph, GraphError> {
    let g = match *spec {
        GraphSpec::Ring(n) => {
            if n < 3 {
                return Err(GraphError::InfeasibleSpec(format!("ring:{n} needs n >= 3")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Complete(n) => {
            if n < 3 {
                return Err(GraphError::InfeasibleSpec(format!("complete:{n} needs n >= 3")));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, &edges)?
        }
        GraphSpec::Grid(a, b) => {
            if a < 3 || b < 3 {
                return Err(GraphError::InfeasibleSpec(format!(
                    "grid:{a}x{b} needs both dimensions >= 3"
                )));
            }
            let id = |r: usize, c: usize| r * b + c;
            let mut edges = Vec::new();
            for r in 0..a {
                for c in 0..b {
                    edges.push((id(r, c), id(r, (c + 1) % b)));
                    edges.push((id(r, c), id((r + 1) % a, c)));
                }
            }
            Graph::from_edges(a * b, &edges)?
        }
        GraphSpec::RandomBiconnected { n, m } => {
            if n < 3 || m < n || m > n * (n - 1) / 2 {
                return Err(GraphError::InfeasibleSpec(format!(
                    "random-biconnected:{n},{m} needs 3 <= n <= m <= n(n-1)/2"
                )));
            }
            let mut rng = SplitMix64::new(seed);
            let mut perm: Vec<usize> = (0..n).collect();
            rng.shuffle(&mut perm);
            // A full cycle guarantees biconnectivity; extra chords keep it.
            let mut chosen = BTreeSet::new();
            for i in 0..n {
                let (u, v) = (perm[i], perm[(i + 1) % n]);
                chosen.insert((u.min(v), u.max(v)));
            }
            while chosen.len() < m {
                let u = rng.index(n);
                let v = rng.index(n);
                if u != v {
                    chosen.insert((u.min(v), u.max(v)));
                }
            }
            let edges: Vec<_> = chosen.into_iter().collect();
            Graph::from_edges(n, &edges)?
        }
    };
    debug_assert!(g.is_biconnected());
    Ok(g)
}

/// Default ordering endpoints used by the harness: homebase is node 0 and
/// the terminal is its highest-id neighbor (on rings this yields the ring
/// order itself).
pub fn default_endpoints(g: &Graph) -> (NodeId, NodeId) {
    let h = 0;
    let t = *g.neighbors(h).last().expect("node 0 has a neighbor");
    (h, t)
}
