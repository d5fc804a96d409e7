//! Data-mining tasks on top of a chronnet: community detection, event
//! clustering, label correction, change-point detection, and outlier nodes.
//!
//! Community structure is the workhorse: regions active in the same period
//! interlink densely and surface as communities. Two detectors are provided,
//! the agglomerative greedy modularity method (returning the full merge
//! dendrogram) and seeded asynchronous label propagation. Per-event
//! community labels then turn a partition into a time series from which
//! change points and spatiotemporal clusters fall out.
//!
//! Modularity uses link weights; self-loops are excluded throughout (they
//! encode same-cell recurrence, not inter-cell structure).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSet;
use crate::grid::{CellId, GridSpec};
use crate::measures::GraphView;
use crate::network::Chronnet;

/// Reserved label for events whose cell carries no community assignment.
pub const NOISE_LABEL: usize = usize::MAX;

/// One agglomerative merge: community `b` absorbed into `a` (both keyed by
/// the smallest leaf index they contain), with the modularity after merging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub q: f64,
}

/// Full merge tree of the agglomerative detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    /// Chronnet nodes in ascending id order; merge indices refer into this.
    pub leaves: Vec<CellId>,
    pub merges: Vec<Merge>,
    /// Modularity of the all-singletons state.
    pub initial_q: f64,
    /// Community count of the maximum-modularity cut.
    pub best_cut: usize,
    pub best_q: f64,
    pub method: String,
}

/// Flat community assignment with contiguous labels starting at 0, ordered
/// by each community's smallest node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: BTreeMap<CellId, usize>,
    pub community_count: usize,
    pub q: f64,
    pub method: String,
}

impl Partition {
    fn from_groups(view: &GraphView, group_of: Vec<usize>, q: f64, method: &str) -> Partition {
        // Relabel so communities are numbered by their smallest member.
        let mut first_seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for (i, &g) in group_of.iter().enumerate() {
            let next = first_seen.len();
            let label = *first_seen.entry(g).or_insert(next);
            labels.insert(view.nodes[i], label);
        }
        Partition {
            labels,
            community_count: first_seen.len(),
            q,
            method: method.to_string(),
        }
    }
}

/// Weighted modularity of a labeled partition, by direct summation:
/// `Q = sum_c [ w_in(c)/W - (s(c)/2W)^2 ]` with self-loops excluded.
///
/// This is the reference computation; the agglomerative detector maintains Q
/// incrementally and is checked against this in tests.
pub fn modularity(c: &Chronnet, labels: &BTreeMap<CellId, usize>) -> Result<f64> {
    let view = GraphView::new(c);
    modularity_view(&view, &resolve_labels(&view, labels)?)
}

fn resolve_labels(view: &GraphView, labels: &BTreeMap<CellId, usize>) -> Result<Vec<usize>> {
    view.nodes
        .iter()
        .map(|id| {
            labels
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("node {id} is unlabeled")))
        })
        .collect()
}

fn modularity_view(view: &GraphView, group_of: &[usize]) -> Result<f64> {
    let two_w: u64 = view.adj.iter().flatten().map(|&(_, w)| w).sum();
    if two_w == 0 {
        return Err(Error::NoLinks);
    }
    let w_total = two_w as f64 / 2.0;
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut strength: BTreeMap<usize, f64> = BTreeMap::new();
    for i in 0..view.len() {
        let s: u64 = view.adj[i].iter().map(|&(_, w)| w).sum();
        *strength.entry(group_of[i]).or_insert(0.0) += s as f64;
        for &(j, w) in &view.adj[i] {
            if j > i && group_of[i] == group_of[j] {
                *internal.entry(group_of[i]).or_insert(0.0) += w as f64;
            }
        }
    }
    let mut q = 0.0;
    for (&g, &s) in &strength {
        let w_in = internal.get(&g).copied().unwrap_or(0.0);
        q += w_in / w_total - (s / (2.0 * w_total)).powi(2);
    }
    Ok(q)
}

/// Agglomerative greedy modularity maximization.
///
/// Starts from singleton communities and repeatedly merges the connected
/// pair with the largest modularity gain (ties resolve to the lowest
/// community labels); once the remaining communities are mutually
/// disconnected they merge by smallest strength product so the tree always
/// completes. Records every merge and the maximum-modularity cut.
pub fn fast_greedy(c: &Chronnet) -> Result<Dendrogram> {
    let view = GraphView::new(c);
    let n = view.len();
    let two_w: u64 = view.adj.iter().flatten().map(|&(_, w)| w).sum();
    if two_w == 0 {
        return Err(Error::NoLinks);
    }
    let w_total = two_w as f64 / 2.0;

    // Community state, keyed by smallest contained node index.
    let mut strength: BTreeMap<usize, f64> = BTreeMap::new();
    let mut nbrs: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut q = 0.0;
    for i in 0..n {
        let s: u64 = view.adj[i].iter().map(|&(_, w)| w).sum();
        strength.insert(i, s as f64);
        nbrs.insert(i, view.adj[i].iter().map(|&(j, w)| (j, w as f64)).collect());
        q -= (s as f64 / (2.0 * w_total)).powi(2);
    }
    let initial_q = q;

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut best_q = q;
    let mut best_cut = n;
    for round in 0..n.saturating_sub(1) {
        // Best connected pair by modularity gain.
        let mut best: Option<(f64, usize, usize)> = None;
        for (&a, map) in &nbrs {
            let sa = strength[&a];
            for (&b, &w) in map.range(a + 1..) {
                let dq = w / w_total - sa * strength[&b] / (2.0 * w_total * w_total);
                if best.is_none_or(|(bq, ..)| dq > bq) {
                    best = Some((dq, a, b));
                }
            }
        }
        // Disconnected remainder: merge the smallest strength product.
        let (dq, a, b) = match best {
            Some(found) => found,
            None => {
                let keys: Vec<usize> = strength.keys().copied().collect();
                let mut fallback: Option<(f64, usize, usize)> = None;
                for (i, &a) in keys.iter().enumerate() {
                    for &b in &keys[i + 1..] {
                        let dq = -strength[&a] * strength[&b] / (2.0 * w_total * w_total);
                        if fallback.is_none_or(|(bq, ..)| dq > bq) {
                            fallback = Some((dq, a, b));
                        }
                    }
                }
                fallback.expect("at least two communities remain")
            }
        };

        // Merge b into a (a < b, so keys stay the smallest member).
        let sb = strength.remove(&b).expect("community b active");
        *strength.get_mut(&a).expect("community a active") += sb;
        let map_b = nbrs.remove(&b).unwrap_or_default();
        nbrs.get_mut(&a).expect("community a active").remove(&b);
        for (c_key, w) in map_b {
            if c_key == a {
                continue;
            }
            *nbrs.get_mut(&a).unwrap().entry(c_key).or_insert(0.0) += w;
            let peer = nbrs.get_mut(&c_key).expect("neighbor community active");
            peer.remove(&b);
            *peer.entry(a).or_insert(0.0) += w;
        }

        q += dq;
        merges.push(Merge { a, b, q });
        if q > best_q {
            best_q = q;
            best_cut = n - (round + 1);
        }
    }

    Ok(Dendrogram {
        leaves: view.nodes,
        merges,
        initial_q,
        best_cut,
        best_q,
        method: "fastgreedy".to_string(),
    })
}

/// Partition obtained by undoing the last `k - 1` merges of the dendrogram
/// (equivalently, replaying the first `n - k`).
pub fn cut_dendrogram(d: &Dendrogram, k: usize) -> Result<Partition> {
    let n = d.leaves.len();
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cut size {k} out of range 1..={n}"
        )));
    }
    let replay = n - k;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for m in &d.merges[..replay] {
        let root = find(&mut parent, m.a);
        let absorbed = find(&mut parent, m.b);
        parent[absorbed] = root;
    }
    let group_of: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let q = if replay == 0 {
        d.initial_q
    } else {
        d.merges[replay - 1].q
    };

    // Rebuild a view-like label mapping without re-deriving the graph.
    let mut first_seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (i, &g) in group_of.iter().enumerate() {
        let next = first_seen.len();
        let label = *first_seen.entry(g).or_insert(next);
        labels.insert(d.leaves[i], label);
    }
    Ok(Partition {
        labels,
        community_count: k,
        q,
        method: d.method.clone(),
    })
}

/// The maximum-modularity partition recorded in the dendrogram.
pub fn best_partition(d: &Dendrogram) -> Result<Partition> {
    cut_dendrogram(d, d.best_cut)
}

/// Seeded asynchronous weighted label propagation.
///
/// Each round visits the nodes in a fresh seeded order; a node adopts the
/// label with the maximum summed incident weight, breaking ties uniformly at
/// random from the same seed stream. Terminates when a full round changes
/// nothing; isolated nodes keep their own singleton labels.
pub fn label_propagation(c: &Chronnet, seed: u64) -> Result<Partition> {
    let view = GraphView::new(c);
    let n = view.len();
    if view.adj.iter().all(Vec::is_empty) {
        return Err(Error::NoLinks);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();

    let max_rounds = 100 * n;
    let mut rounds = 0;
    loop {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            if view.adj[v].is_empty() {
                continue;
            }
            let mut votes: BTreeMap<usize, u64> = BTreeMap::new();
            for &(w, weight) in &view.adj[v] {
                *votes.entry(labels[w]).or_insert(0) += weight;
            }
            let top = *votes.values().max().expect("non-empty votes");
            let winners: Vec<usize> = votes
                .iter()
                .filter(|(_, &w)| w == top)
                .map(|(&l, _)| l)
                .collect();
            let pick = if winners.len() == 1 {
                winners[0]
            } else {
                winners[rng.random_range(0..winners.len())]
            };
            if labels[v] != pick {
                labels[v] = pick;
                changed = true;
            }
        }
        rounds += 1;
        if !changed {
            break;
        }
        if rounds >= max_rounds {
            return Err(Error::NonConvergence(max_rounds));
        }
    }
    let q = modularity_view(&view, &labels)?;
    Ok(Partition::from_groups(&view, labels, q, "labelprop"))
}

/// Per-event community labels in event time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySeries {
    pub labels: Vec<usize>,
    /// Events whose cell had no community (reserved [`NOISE_LABEL`]).
    pub noise_count: usize,
}

/// Labels every event with the community of its cell. Events in unlabeled
/// cells (pruned away or isolated-removed) receive the reserved noise label
/// and are counted.
pub fn cluster_events(es: &EventSet, grid: &GridSpec, p: &Partition) -> Result<CommunitySeries> {
    if !es.is_sorted() {
        return Err(Error::UnsortedEvents);
    }
    let mut labels = Vec::with_capacity(es.len());
    let mut noise_count = 0;
    for e in es.events() {
        let cell = grid.assign_cell(e.x, e.y)?;
        match p.labels.get(&cell) {
            Some(&l) => labels.push(l),
            None => {
                labels.push(NOISE_LABEL);
                noise_count += 1;
            }
        }
    }
    Ok(CommunitySeries {
        labels,
        noise_count,
    })
}

/// Temporal label correction with window radius `delta` (an odd number).
///
/// An element is replaced when the `2 * delta` neighbors around it (itself
/// excluded) all carry one single value. Every replacement reads the
/// original series, so the result is independent of scan order, and
/// positions without a full window are left unchanged.
pub fn correct_series(cs: &CommunitySeries, delta: usize) -> Result<CommunitySeries> {
    if delta < 1 || delta.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window radius must be an odd number >= 1, got {delta}"
        )));
    }
    let src = &cs.labels;
    let mut out = src.clone();
    if src.len() > 2 * delta {
        for t in delta..src.len() - delta {
            let v = src[t - delta];
            let unanimous = (t - delta..t).chain(t + 1..=t + delta).all(|i| src[i] == v);
            if unanimous {
                out[t] = v;
            }
        }
    }
    let noise_count = out.iter().filter(|&&l| l == NOISE_LABEL).count();
    Ok(CommunitySeries {
        labels: out,
        noise_count,
    })
}

/// 1-based positions `t` (in series order) where the label differs from its
/// predecessor.
pub fn change_points(cs: &CommunitySeries) -> Vec<usize> {
    (1..cs.labels.len())
        .filter(|&i| cs.labels[i] != cs.labels[i - 1])
        .map(|i| i + 1)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierMetric {
    Degree,
    Strength,
}

impl OutlierMetric {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "degree" => Ok(OutlierMetric::Degree),
            "strength" => Ok(OutlierMetric::Strength),
            other => Err(Error::InvalidParameter(format!(
                "unknown outlier metric `{other}`"
            ))),
        }
    }
}

/// Top-fraction outlier selection result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub nodes: Vec<CellId>,
    pub cutoff: u64,
    pub requested: usize,
    /// Set when cutoff ties ballooned the selection to the whole node set.
    pub degenerate: bool,
}

/// Nodes in the top `top_fraction` by the chosen metric; every node tied
/// with the cutoff value is included.
pub fn outlier_nodes(
    c: &Chronnet,
    metric: OutlierMetric,
    top_fraction: f64,
) -> Result<OutlierReport> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "top fraction must be in (0, 1), got {top_fraction}"
        )));
    }
    let values = match metric {
        OutlierMetric::Degree => crate::measures::degree(c),
        OutlierMetric::Strength => crate::measures::strength(c),
    };
    if values.is_empty() {
        return Err(Error::EmptyInput("no nodes to rank".into()));
    }
    let n = values.len();
    let requested = ((top_fraction * n as f64).floor() as usize).max(1);
    let mut ranked = values.clone();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let cutoff = ranked[requested - 1].1;
    let nodes: Vec<CellId> = values
        .iter()
        .filter(|&&(_, v)| v >= cutoff)
        .map(|&(id, _)| id)
        .collect();
    let degenerate = nodes.len() == n && n > requested;
    Ok(OutlierReport {
        nodes,
        cutoff,
        requested,
        degenerate,
    })
}

/// Adjusted Rand index between two labelings of the same items.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("ARI needs at least 2 items".into()));
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    fn comb2(x: u64) -> f64 {
        (x * x.saturating_sub(1) / 2) as f64
    }
    let index: f64 = table.values().map(|&v| comb2(v)).sum();
    let sum_a: f64 = rows.values().map(|&v| comb2(v)).sum();
    let sum_b: f64 = cols.values().map(|&v| comb2(v)).sum();
    let total = comb2(a.len() as u64);
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if max_index == expected {
        // Degenerate case (e.g. both partitions trivial): identical labelings
        // count as perfect agreement.
        return Ok(if index == max_index { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max_index - expected))
}
