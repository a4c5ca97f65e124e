//! Undirected graphs, chordality, triangulation and clique trees.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::VarId;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: BTreeMap<VarId, BTreeSet<VarId>>,
}

impl UndirectedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices(vertices: impl IntoIterator<Item = VarId>) -> Self {
        let mut g = Self::new();
        for v in vertices {
            g.add_vertex(v);
        }
        g
    }

    /// A complete graph over `vertices`.
    pub fn complete(vertices: &[VarId]) -> Self {
        let mut g = Self::with_vertices(vertices.iter().copied());
        g.add_clique(vertices);
        g
    }

    pub fn add_vertex(&mut self, v: VarId) {
        self.adj.entry(v).or_default();
    }

    /// Adds edge `u-v`, inserting missing endpoints.
    ///
    /// # Panics
    /// On a self-loop.
    pub fn add_edge(&mut self, u: VarId, v: VarId) {
        assert_ne!(u, v, "self-loop on vertex {u}");
        self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
    }

    pub fn add_clique(&mut self, vertices: &[VarId]) {
        for &v in vertices {
            self.add_vertex(v);
        }
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                self.add_edge(u, v);
            }
        }
    }

    /// Adds every vertex and edge of `other`.
    pub fn extend(&mut self, other: &UndirectedGraph) {
        for (&u, nbrs) in &other.adj {
            self.add_vertex(u);
            for &v in nbrs {
                if u < v {
                    self.add_edge(u, v);
                }
            }
        }
    }

    pub fn vertices(&self) -> impl DoubleEndedIterator<Item = VarId> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn contains_vertex(&self, v: VarId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn neighbors(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.adj.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn degree(&self, v: VarId) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    pub fn has_edge(&self, u: VarId, v: VarId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        self.adj
            .iter()
            .flat_map(|(&u, s)| s.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn is_clique(&self, vertices: &[VarId]) -> bool {
        vertices.iter().all(|&v| self.contains_vertex(v))
            && vertices
                .iter()
                .enumerate()
                .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Vertices in `keep` and the edges with both endpoints in it. Vertices of
    /// `keep` that are absent from the graph are ignored.
    pub fn induced_subgraph(&self, keep: &BTreeSet<VarId>) -> UndirectedGraph {
        let mut adj = BTreeMap::new();
        for (&u, nbrs) in &self.adj {
            if keep.contains(&u) {
                adj.insert(u, nbrs.iter().copied().filter(|v| keep.contains(v)).collect());
            }
        }
        UndirectedGraph { adj }
    }
}

/// Elimination heuristics used to complete a graph into a chordal one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Triangulation {
    /// Greedy minimum fill-in, ties broken by smallest vertex id.
    #[default]
    MinFill,
    /// Eliminate vertices from the largest id down.
    ReverseId,
}

/// A chordal graph with a perfect elimination ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalGraph {
    graph: UndirectedGraph,
    peo: Vec<VarId>,
}

/// Maximum cardinality search, ties broken by smallest id. Returns vertices
/// in visit order.
fn max_cardinality_search(g: &UndirectedGraph) -> Vec<VarId> {
    let mut weight: BTreeMap<VarId, usize> = g.vertices().map(|v| (v, 0)).collect();
    // buckets[w] holds unvisited vertices of weight w
    let mut buckets: Vec<BTreeSet<VarId>> = vec![g.vertices().collect()];
    let mut order = Vec::with_capacity(weight.len());
    let mut top = 0usize;
    while order.len() < g.vertex_count() {
        while buckets[top].is_empty() {
            top -= 1;
        }
        let v = *buckets[top].iter().next().unwrap();
        buckets[top].remove(&v);
        weight.remove(&v);
        order.push(v);
        for u in g.neighbors(v) {
            if let Some(w) = weight.get_mut(&u) {
                buckets[*w].remove(&u);
                *w += 1;
                if buckets.len() <= *w {
                    buckets.push(BTreeSet::new());
                }
                buckets[*w].insert(u);
                top = top.max(*w);
            }
        }
    }
    order
}

fn is_perfect_elimination_ordering(g: &UndirectedGraph, order: &[VarId]) -> bool {
    let pos: BTreeMap<VarId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    order.iter().all(|&v| {
        let later: Vec<VarId> = g.neighbors(v).filter(|u| pos[u] > pos[&v]).collect();
        match later.iter().min_by_key(|u| pos[u]) {
            None => true,
            Some(&first) => later.iter().all(|&w| w == first || g.has_edge(first, w)),
        }
    })
}

/// True iff `g` admits a perfect elimination ordering.
pub fn is_chordal(g: &UndirectedGraph) -> bool {
    let mut order = max_cardinality_search(g);
    order.reverse();
    is_perfect_elimination_ordering(g, &order)
}

fn fill_count(adj: &BTreeMap<VarId, BTreeSet<VarId>>, v: VarId) -> usize {
    let nbrs: Vec<VarId> = adj[&v].iter().copied().collect();
    let mut fill = 0;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if !adj[&a].contains(&b) {
                fill += 1;
            }
        }
    }
    fill
}

/// Greedy min-fill elimination order with smallest-id tie-break.
pub fn min_fill_order(g: &UndirectedGraph) -> Vec<VarId> {
    let mut adj = g.adj.clone();
    let mut fill: BTreeMap<VarId, usize> = adj.keys().map(|&v| (v, fill_count(&adj, v))).collect();
    let mut queue: BTreeSet<(usize, VarId)> = fill.iter().map(|(&v, &f)| (f, v)).collect();
    let mut order = Vec::with_capacity(adj.len());
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<VarId> = adj[&v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
            }
        }
        for &a in &nbrs {
            adj.get_mut(&a).unwrap().remove(&v);
        }
        adj.remove(&v);
        fill.remove(&v);
        // fill counts change only within distance two of v
        let mut touched: BTreeSet<VarId> = nbrs.iter().copied().collect();
        for &a in &nbrs {
            touched.extend(adj[&a].iter().copied());
        }
        for w in touched {
            let old = fill[&w];
            let new = fill_count(&adj, w);
            if old != new {
                queue.remove(&(old, w));
                queue.insert((new, w));
                fill.insert(w, new);
            }
        }
    }
    order
}

impl ChordalGraph {
    /// Wraps `g` if it is chordal, computing a perfect elimination ordering.
    pub fn from_graph(g: UndirectedGraph) -> Result<Self> {
        let mut peo = max_cardinality_search(&g);
        peo.reverse();
        if !is_perfect_elimination_ordering(&g, &peo) {
            return Err(Error::NotChordal);
        }
        Ok(ChordalGraph { graph: g, peo })
    }

    /// Completes `g` by eliminating vertices in the heuristic's order.
    pub fn triangulate(g: &UndirectedGraph, heuristic: Triangulation) -> Self {
        let order = match heuristic {
            Triangulation::MinFill => min_fill_order(g),
            Triangulation::ReverseId => g.vertices().rev().collect(),
        };
        Self::eliminate(g, order)
    }

    /// Adds the fill-in produced by eliminating vertices in `order`.
    pub fn eliminate(g: &UndirectedGraph, order: Vec<VarId>) -> Self {
        let mut filled = g.clone();
        let mut work = g.adj.clone();
        for &v in &order {
            let nbrs: Vec<VarId> = work[&v].iter().copied().collect();
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if work.get_mut(&a).unwrap().insert(b) {
                        work.get_mut(&b).unwrap().insert(a);
                        filled.add_edge(a, b);
                    }
                }
            }
            for &a in &nbrs {
                work.get_mut(&a).unwrap().remove(&v);
            }
            work.remove(&v);
        }
        ChordalGraph {
            graph: filled,
            peo: order,
        }
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn peo(&self) -> &[VarId] {
        &self.peo
    }

    pub fn into_graph(self) -> UndirectedGraph {
        self.graph
    }

    /// Maximal cliques, each sorted, listed in lexicographic order.
    pub fn maximal_cliques(&self) -> Vec<Vec<VarId>> {
        let pos: BTreeMap<VarId, usize> = self.peo.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut candidates: Vec<Vec<VarId>> = self
            .peo
            .iter()
            .map(|&v| {
                let mut c: Vec<VarId> = self
                    .graph
                    .neighbors(v)
                    .filter(|u| pos[u] > pos[&v])
                    .collect();
                c.push(v);
                c.sort_unstable();
                c
            })
            .collect();
        candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        candidates.dedup();
        let mut by_vertex: BTreeMap<VarId, Vec<usize>> = BTreeMap::new();
        let mut kept: Vec<Vec<VarId>> = Vec::new();
        for c in candidates {
            let contained = by_vertex
                .get(&c[0])
                .is_some_and(|ids| ids.iter().any(|&i| is_subset(&c, &kept[i])));
            if !contained {
                for &v in &c {
                    by_vertex.entry(v).or_default().push(kept.len());
                }
                kept.push(c);
            }
        }
        kept.sort();
        kept
    }

    /// Size of the largest maximal clique minus one (zero for empty graphs).
    pub fn treewidth(&self) -> usize {
        self.maximal_cliques()
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
    }

    pub fn clique_tree(&self) -> CliqueTree {
        CliqueTree::build(self.maximal_cliques())
    }
}

fn is_subset(small: &[VarId], big: &[VarId]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

fn intersection(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

/// Union of the inputs completed into a chordal graph.
pub fn computation_graph(graphs: &[&UndirectedGraph], heuristic: Triangulation) -> ChordalGraph {
    let mut union = UndirectedGraph::new();
    for g in graphs {
        union.extend(g);
    }
    ChordalGraph::triangulate(&union, heuristic)
}

/// Each vertex set becomes a clique.
pub fn kappa(groups: &[Vec<VarId>]) -> UndirectedGraph {
    let mut g = UndirectedGraph::new();
    for grp in groups {
        g.add_clique(grp);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<VarId>,
}

/// Tree over maximal cliques with separators on its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueTree {
    cliques: Vec<Vec<VarId>>,
    edges: Vec<TreeEdge>,
    neighbors: Vec<Vec<(usize, usize)>>,
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl CliqueTree {
    /// Maximum-weight spanning tree over clique intersections, ties by
    /// lexicographic clique pair. Disconnected parts are joined to clique 0
    /// through empty separators.
    pub fn build(cliques: Vec<Vec<VarId>>) -> Self {
        let m = cliques.len();
        let mut by_vertex: BTreeMap<VarId, Vec<usize>> = BTreeMap::new();
        for (i, c) in cliques.iter().enumerate() {
            for &v in c {
                by_vertex.entry(v).or_default().push(i);
            }
        }
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for ids in by_vertex.values() {
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    pairs.insert((i, j));
                }
            }
        }
        let mut weighted: Vec<(usize, usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| (intersection(&cliques[i], &cliques[j]).len(), i, j))
            .collect();
        weighted.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut sets = DisjointSets((0..m).collect());
        let mut edges = Vec::with_capacity(m.saturating_sub(1));
        for (_, i, j) in weighted {
            if sets.union(i, j) {
                edges.push(TreeEdge {
                    a: i,
                    b: j,
                    separator: intersection(&cliques[i], &cliques[j]),
                });
            }
        }
        for j in 1..m {
            if sets.union(0, j) {
                edges.push(TreeEdge {
                    a: 0,
                    b: j,
                    separator: Vec::new(),
                });
            }
        }
        let mut neighbors = vec![Vec::new(); m];
        for (e, edge) in edges.iter().enumerate() {
            neighbors[edge.a].push((edge.b, e));
            neighbors[edge.b].push((edge.a, e));
        }
        CliqueTree {
            cliques,
            edges,
            neighbors,
        }
    }

    pub fn cliques(&self) -> &[Vec<VarId>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    /// `(neighbor clique, edge index)` pairs of clique `c`.
    pub fn neighbors(&self, c: usize) -> &[(usize, usize)] {
        &self.neighbors[c]
    }

    /// Separator multiset, sorted.
    pub fn separators(&self) -> Vec<Vec<VarId>> {
        let mut s: Vec<Vec<VarId>> = self.edges.iter().map(|e| e.separator.clone()).collect();
        s.sort();
        s
    }

    /// First clique (in clique order) containing every variable of `scope`.
    pub fn covering_clique(&self, scope: &[VarId]) -> Option<usize> {
        self.cliques.iter().position(|c| is_subset(scope, c))
    }

    pub fn is_spanning_tree(&self) -> bool {
        let m = self.cliques.len();
        if self.edges.len() != m.saturating_sub(1) {
            return false;
        }
        let mut sets = DisjointSets((0..m).collect());
        self.edges.iter().all(|e| sets.union(e.a, e.b))
    }

    /// For every vertex, the cliques containing it form a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        let mut vertices: BTreeSet<VarId> = BTreeSet::new();
        for c in &self.cliques {
            vertices.extend(c);
        }
        vertices.into_iter().all(|v| {
            let holders: Vec<usize> = (0..self.cliques.len())
                .filter(|&i| self.cliques[i].binary_search(&v).is_ok())
                .collect();
            let mut seen = vec![false; self.cliques.len()];
            let mut stack = vec![holders[0]];
            seen[holders[0]] = true;
            let mut count = 0;
            while let Some(c) = stack.pop() {
                count += 1;
                for &(n, _) in &self.neighbors[c] {
                    if !seen[n] && self.cliques[n].binary_search(&v).is_ok() {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            count == holders.len()
        })
    }

    pub fn separators_are_intersections(&self) -> bool {
        self.edges
            .iter()
            .all(|e| e.separator == intersection(&self.cliques[e.a], &self.cliques[e.b]))
    }
}
