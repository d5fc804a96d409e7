//! Network characterization: degrees, strengths, distributions, shortest
//! paths, transitivity, density, and centralities.
//!
//! Self-loop policy, fixed across the module: self-loops are excluded from
//! degree, transitivity, paths, and centralities, and included once in
//! strength. Directed networks are measured on their undirected projection
//! (in+out aggregates), matching the projection rule `w{u,v} = w_uv + w_vu`.
//!
//! Weighted distances use edge length `1/w`, so recurrent (strong) links are
//! short: a node with strong links is close to its neighbors.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellId;
use crate::network::Chronnet;

/// Indexed undirected adjacency over the sorted node list. Directed input is
/// symmetrized by weight summation; self-loops are kept aside.
pub(crate) struct GraphView {
    pub nodes: Vec<CellId>,
    /// Per node: (neighbor index, combined weight), ascending by neighbor.
    pub adj: Vec<Vec<(usize, u64)>>,
    pub self_loops: Vec<u64>,
}

impl GraphView {
    pub fn new(c: &Chronnet) -> Self {
        let nodes: Vec<CellId> = c.nodes().collect();
        let index: BTreeMap<CellId, usize> =
            nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut maps: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); nodes.len()];
        let mut self_loops = vec![0u64; nodes.len()];
        for ((u, v), w) in c.links() {
            let iu = index[&u];
            let iv = index[&v];
            if iu == iv {
                self_loops[iu] += w;
            } else {
                *maps[iu].entry(iv).or_insert(0) += w;
                *maps[iv].entry(iu).or_insert(0) += w;
            }
        }
        let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        GraphView {
            nodes,
            adj,
            self_loops,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Count of simple (non-loop) undirected links.
    pub fn simple_link_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search_by_key(&b, |&(j, _)| j).is_ok()
    }

    /// Hop distances from `src`; `-1` marks unreachable nodes.
    pub fn bfs(&self, src: usize) -> Vec<i64> {
        let mut dist = vec![-1i64; self.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path distances from `src` with edge length `1/w`;
    /// `f64::INFINITY` marks unreachable nodes.
    pub fn dijkstra_inverse_weight(&self, src: usize) -> Vec<f64> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
            }
        }

        let mut dist = vec![f64::INFINITY; self.len()];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::from([Reverse(Entry(0.0, src))]);
        while let Some(Reverse(Entry(d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, weight) in &self.adj[v] {
                let nd = d + 1.0 / weight as f64;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse(Entry(nd, w)));
                }
            }
        }
        dist
    }

    /// Connected-component id per node (ignoring self-loops) plus sizes.
    pub fn components(&self) -> (Vec<usize>, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.len()];
        let mut sizes = Vec::new();
        for start in 0..self.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(v) = stack.pop() {
                size += 1;
                for &(w, _) in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        (comp, sizes)
    }
}

/// Per-node degree: number of distinct neighbors other than the node itself.
pub fn degree(c: &Chronnet) -> Vec<(CellId, u64)> {
    let view = GraphView::new(c);
    view.nodes
        .iter()
        .zip(&view.adj)
        .map(|(&id, adj)| (id, adj.len() as u64))
        .collect()
}

/// Per-node strength: sum of incident link weights, self-loop counted once.
pub fn strength(c: &Chronnet) -> Vec<(CellId, u64)> {
    let view = GraphView::new(c);
    view.nodes
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let s: u64 = view.adj[i].iter().map(|&(_, w)| w).sum::<u64>() + view.self_loops[i];
            (id, s)
        })
        .collect()
}

/// Normalized histogram of an integer sample: fraction of entries per value.
pub fn distribution(values: &[u64]) -> Result<BTreeMap<u64, f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput(
            "cannot build a distribution of zero samples".into(),
        ));
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let n = values.len() as f64;
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect())
}

/// Path-length summary over ordered reachable pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub avg_path_length: f64,
    pub diameter: f64,
    pub component_count: usize,
    pub largest_component_fraction: f64,
}

/// Shortest-path statistics. Unweighted mode counts hops; weighted mode uses
/// edge length `1/w`. The average runs over ordered reachable pairs only and
/// is reported with component counts for disconnected graphs.
pub fn path_stats(c: &Chronnet, weighted: bool) -> Result<PathStats> {
    let view = GraphView::new(c);
    if view.len() < 2 {
        return Err(Error::InvalidParameter(
            "path statistics need at least 2 nodes".into(),
        ));
    }
    let (_, sizes) = view.components();
    let largest = sizes.iter().copied().max().unwrap_or(0);

    let mut sum = 0.0;
    let mut pairs = 0u64;
    let mut diameter = 0.0f64;
    for src in 0..view.len() {
        if weighted {
            for (v, &d) in view.dijkstra_inverse_weight(src).iter().enumerate() {
                if v != src && d.is_finite() {
                    sum += d;
                    pairs += 1;
                    diameter = diameter.max(d);
                }
            }
        } else {
            for (v, &d) in view.bfs(src).iter().enumerate() {
                if v != src && d >= 0 {
                    sum += d as f64;
                    pairs += 1;
                    diameter = diameter.max(d as f64);
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::EmptyInput("no reachable pairs".into()));
    }
    Ok(PathStats {
        avg_path_length: sum / pairs as f64,
        diameter,
        component_count: sizes.len(),
        largest_component_fraction: largest as f64 / view.len() as f64,
    })
}

/// Global transitivity: 3 x triangles / connected triples. Weights and
/// self-loops are ignored.
pub fn transitivity(c: &Chronnet) -> Result<f64> {
    let view = GraphView::new(c);
    if view.len() < 3 {
        return Err(Error::InvalidParameter(
            "transitivity needs at least 3 nodes".into(),
        ));
    }
    let mut triples = 0u64;
    let mut closed = 0u64;
    for i in 0..view.len() {
        let k = view.adj[i].len() as u64;
        triples += k * k.saturating_sub(1) / 2;
        for (a, &(j, _)) in view.adj[i].iter().enumerate() {
            for &(l, _) in &view.adj[i][a + 1..] {
                if view.has_edge(j, l) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        return Err(Error::EmptyInput("no connected triple".into()));
    }
    Ok(closed as f64 / triples as f64)
}

/// Fraction of realized simple links: `|E| / (n (n-1) / 2)`, self-loops
/// excluded.
pub fn edge_density(c: &Chronnet) -> Result<f64> {
    let view = GraphView::new(c);
    let n = view.len() as f64;
    if view.len() < 2 {
        return Err(Error::InvalidParameter(
            "edge density needs at least 2 nodes".into(),
        ));
    }
    Ok(view.simple_link_count() as f64 / (n * (n - 1.0) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralityKind {
    Degree,
    Betweenness,
    Closeness,
    WeightedCloseness,
}

impl CentralityKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "degree" => Ok(CentralityKind::Degree),
            "betweenness" => Ok(CentralityKind::Betweenness),
            "closeness" => Ok(CentralityKind::Closeness),
            "weighted-closeness" => Ok(CentralityKind::WeightedCloseness),
            other => Err(Error::InvalidParameter(format!(
                "unknown centrality kind `{other}`"
            ))),
        }
    }
}

/// Node centrality scores, ascending by cell id.
///
/// Betweenness counts shortest-path pass-throughs over unordered pairs
/// (Brandes' accumulation, unnormalized). Closeness is `1 / sum of
/// distances` to the reachable nodes of the own component, hops for the
/// unweighted kind and `1/w` lengths for the weighted kind; nodes with no
/// reachable peer score 0.
pub fn centrality(c: &Chronnet, kind: CentralityKind) -> Result<Vec<(CellId, f64)>> {
    let view = GraphView::new(c);
    let scores = match kind {
        CentralityKind::Degree => view.adj.iter().map(|a| a.len() as f64).collect(),
        CentralityKind::Betweenness => betweenness(&view),
        CentralityKind::Closeness => (0..view.len())
            .map(|src| {
                let total: i64 = view.bfs(src).iter().filter(|&&d| d > 0).sum();
                if total > 0 {
                    1.0 / total as f64
                } else {
                    0.0
                }
            })
            .collect(),
        CentralityKind::WeightedCloseness => (0..view.len())
            .map(|src| {
                let total: f64 = view
                    .dijkstra_inverse_weight(src)
                    .iter()
                    .filter(|d| d.is_finite() && **d > 0.0)
                    .sum();
                if total > 0.0 {
                    1.0 / total
                } else {
                    0.0
                }
            })
            .collect(),
    };
    Ok(view.nodes.iter().copied().zip(scores).collect())
}

/// Brandes' betweenness for the unweighted undirected view; each unordered
/// pair contributes once.
fn betweenness(view: &GraphView) -> Vec<f64> {
    let n = view.len();
    let mut scores = vec![0.0f64; n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    for s in 0..n {
        stack.clear();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &(w, _) in &view.adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    pred[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &pred[w] {
                delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w]);
            }
            if w != s {
                scores[w] += delta[w];
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    for s in &mut scores {
        *s /= 2.0;
    }
    scores
}

/// Connected components (self-loops ignored), largest first; members sorted
/// by cell id. Ties order by smallest member.
pub fn components(c: &Chronnet) -> Vec<Vec<CellId>> {
    let view = GraphView::new(c);
    let (comp, sizes) = view.components();
    let mut groups: Vec<Vec<CellId>> = vec![Vec::new(); sizes.len()];
    for (i, &g) in comp.iter().enumerate() {
        groups[g].push(view.nodes[i]);
    }
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    groups
}

/// Articulation points by brute force: every node whose removal increases
/// the component count among the remaining nodes.
pub fn articulation_points(c: &Chronnet) -> Vec<CellId> {
    let view = GraphView::new(c);
    let n = view.len();
    if n < 3 {
        return Vec::new();
    }
    let (_, sizes) = view.components();
    let base = sizes.len();
    let mut out = Vec::new();
    for victim in 0..n {
        let mut comp = vec![usize::MAX; n];
        comp[victim] = usize::MAX - 1; // already "visited", never assigned
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            comp[start] = count;
            while let Some(v) = stack.pop() {
                for &(w, _) in &view.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
        }
        if count > base {
            out.push(view.nodes[victim]);
        }
    }
    out
}

/// Sample skewness g1 of a data vector.
pub fn sample_skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    m3 / m2.powf(1.5)
}

/// Excess kurtosis g2 of a data vector.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    m4 / (m2 * m2) - 3.0
}
