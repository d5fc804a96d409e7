//! Chronnet construction: weighted directed graphs over grid cells whose
//! links count chronologically consecutive events.
//!
//! Construction slides over the sorted event sequence: events `a` and `a + h`
//! link the cells they fall in, self-loops counting same-cell recurrence.
//! Runs of equal timestamps (parallel events) are first collapsed into
//! groups; the offset `h` then counts groups, and a pair of groups where
//! either side holds more than one event links every ordered pair of
//! *distinct* cells between the two groups. An optional `d_max` drops pairs
//! whose cells lie further apart than the threshold.
//!
//! Construction is linear in the number of events and splits cleanly into
//! chunks: [`build_parallel`] shards the group sequence, counts each pair in
//! the chunk owning its first group, and merges by summation, reproducing
//! [`build`] exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSet;
use crate::grid::{CellId, GridSpec};

/// Construction parameters carried alongside a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildMeta {
    pub h: usize,
    /// Maximum link distance; `None` means unrestricted.
    pub d_max: Option<f64>,
    /// Effective prune threshold applied so far, if any.
    pub tau: Option<u64>,
    /// Quantile-prune keep fraction applied, if any.
    pub keep_fraction: Option<f64>,
    /// Snapshot window `[t_start, t_end)`, if this network is one layer.
    pub window: Option<(f64, f64)>,
}

impl BuildMeta {
    fn new(h: usize, d_max: Option<f64>) -> Self {
        BuildMeta {
            h,
            d_max,
            tau: None,
            keep_fraction: None,
            window: None,
        }
    }
}

impl Default for BuildMeta {
    fn default() -> Self {
        BuildMeta::new(1, None)
    }
}

/// Weighted graph over grid cells, directed on construction and undirected
/// after projection. Self-loops are allowed and count same-cell recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Chronnet {
    directed: bool,
    nodes: BTreeSet<CellId>,
    /// Undirected networks store one entry per unordered pair, keyed
    /// `(min, max)`.
    weights: BTreeMap<(CellId, CellId), u64>,
    grid: GridSpec,
    meta: BuildMeta,
}

impl Chronnet {
    /// Assembles a network from explicit parts, enforcing the structural
    /// invariants (positive weights, endpoints among the nodes, canonical
    /// undirected keys).
    pub fn from_links(
        grid: GridSpec,
        directed: bool,
        nodes: BTreeSet<CellId>,
        links: BTreeMap<(CellId, CellId), u64>,
        meta: BuildMeta,
    ) -> Result<Self> {
        if let Some(&bad) = nodes.iter().find(|n| !grid.is_valid_cell(**n)) {
            return Err(Error::InvalidCell(bad.0));
        }
        for (&(u, v), &w) in &links {
            if w == 0 {
                return Err(Error::InvalidParameter(format!(
                    "link {u}->{v} has zero weight"
                )));
            }
            if !nodes.contains(&u) || !nodes.contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "link {u}->{v} references a missing node"
                )));
            }
            if !directed && u > v {
                return Err(Error::InvalidParameter(format!(
                    "undirected link key ({u},{v}) is not canonical"
                )));
            }
        }
        Ok(Chronnet {
            directed,
            nodes,
            weights: links,
            grid,
            meta,
        })
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn meta(&self) -> &BuildMeta {
        &self.meta
    }

    pub fn nodes(&self) -> impl Iterator<Item = CellId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_node(&self, c: CellId) -> bool {
        self.nodes.contains(&c)
    }

    /// Links in ascending key order. Undirected keys are `(min, max)`.
    pub fn links(&self) -> impl Iterator<Item = ((CellId, CellId), u64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn link_count(&self) -> usize {
        self.weights.len()
    }

    /// Sum of all link weights, self-loops included.
    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    /// Weight of a specific link; for undirected networks the endpoint order
    /// is irrelevant.
    pub fn weight(&self, u: CellId, v: CellId) -> u64 {
        let key = if self.directed || u <= v {
            (u, v)
        } else {
            (v, u)
        };
        self.weights.get(&key).copied().unwrap_or(0)
    }

    /// Removes every link with weight `<= tau` (self-loops included). Nodes
    /// are retained and may become isolated; the effective threshold is
    /// recorded in the metadata.
    pub fn prune(&self, tau: u64) -> Chronnet {
        let weights = self
            .weights
            .iter()
            .filter(|(_, &w)| w > tau)
            .map(|(&k, &w)| (k, w))
            .collect();
        let mut meta = self.meta.clone();
        meta.tau = Some(meta.tau.map_or(tau, |prev| prev.max(tau)));
        Chronnet {
            directed: self.directed,
            nodes: self.nodes.clone(),
            weights,
            grid: self.grid.clone(),
            meta,
        }
    }

    /// Keeps the `ceil(keep_fraction * |E|)` highest-weight links; every link
    /// tied with the cutoff weight is kept as well.
    pub fn prune_quantile(&self, keep_fraction: f64) -> Result<Chronnet> {
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "keep fraction must be in (0, 1], got {keep_fraction}"
            )));
        }
        let mut meta = self.meta.clone();
        meta.keep_fraction = Some(keep_fraction);
        if self.weights.is_empty() {
            return Ok(Chronnet {
                directed: self.directed,
                nodes: self.nodes.clone(),
                weights: BTreeMap::new(),
                grid: self.grid.clone(),
                meta,
            });
        }
        let mut ws: Vec<u64> = self.weights.values().copied().collect();
        ws.sort_unstable_by(|a, b| b.cmp(a));
        let keep = (keep_fraction * ws.len() as f64).ceil() as usize;
        let cutoff = ws[keep.clamp(1, ws.len()) - 1];
        let weights = self
            .weights
            .iter()
            .filter(|(_, &w)| w >= cutoff)
            .map(|(&k, &w)| (k, w))
            .collect();
        Ok(Chronnet {
            directed: self.directed,
            nodes: self.nodes.clone(),
            weights,
            grid: self.grid.clone(),
            meta,
        })
    }

    /// Undirected projection: `w{u,v} = w(u->v) + w(v->u)` for distinct
    /// cells, self-loop weights copied unchanged.
    pub fn undirect(&self) -> Result<Chronnet> {
        if !self.directed {
            return Err(Error::InvalidParameter(
                "network is already undirected".into(),
            ));
        }
        let mut weights: BTreeMap<(CellId, CellId), u64> = BTreeMap::new();
        for (&(u, v), &w) in &self.weights {
            let key = if u <= v { (u, v) } else { (v, u) };
            *weights.entry(key).or_insert(0) += w;
        }
        Ok(Chronnet {
            directed: false,
            nodes: self.nodes.clone(),
            weights,
            grid: self.grid.clone(),
            meta: self.meta.clone(),
        })
    }

    /// Restriction to `keep`: retains those nodes and the links with both
    /// endpoints among them.
    pub fn induced_subgraph(&self, keep: &BTreeSet<CellId>) -> Chronnet {
        let nodes: BTreeSet<CellId> = self.nodes.intersection(keep).copied().collect();
        let weights = self
            .weights
            .iter()
            .filter(|((u, v), _)| nodes.contains(u) && nodes.contains(v))
            .map(|(&k, &w)| (k, w))
            .collect();
        Chronnet {
            directed: self.directed,
            nodes,
            weights,
            grid: self.grid.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Drops nodes without any incident link (self-loops count as incident).
    pub fn remove_isolated(&self) -> Chronnet {
        let mut connected = BTreeSet::new();
        for &(u, v) in self.weights.keys() {
            connected.insert(u);
            connected.insert(v);
        }
        Chronnet {
            directed: self.directed,
            nodes: connected,
            weights: self.weights.clone(),
            grid: self.grid.clone(),
            meta: self.meta.clone(),
        }
    }
}

fn within_dmax(grid: &GridSpec, d_max: Option<f64>, u: CellId, v: CellId) -> Result<bool> {
    match d_max {
        None => Ok(true),
        Some(d) => Ok(grid.cell_distance(u, v)? <= d),
    }
}

/// Counts the links contributed by the group pair `(a, b)` into `acc`.
///
/// A singleton-singleton pair follows the base rule and may increment a
/// self-loop; as soon as either group holds parallel events, every ordered
/// pair of distinct cells between the two groups gets one increment.
fn accumulate_pair(
    groups: &[(f64, Range<usize>)],
    cells: &[CellId],
    a: usize,
    b: usize,
    grid: &GridSpec,
    d_max: Option<f64>,
    acc: &mut BTreeMap<(CellId, CellId), u64>,
) -> Result<()> {
    let ra = &groups[a].1;
    let rb = &groups[b].1;
    if ra.len() == 1 && rb.len() == 1 {
        let u = cells[ra.start];
        let v = cells[rb.start];
        if within_dmax(grid, d_max, u, v)? {
            *acc.entry((u, v)).or_insert(0) += 1;
        }
        return Ok(());
    }
    let us: BTreeSet<CellId> = ra.clone().map(|i| cells[i]).collect();
    let vs: BTreeSet<CellId> = rb.clone().map(|i| cells[i]).collect();
    for &u in &us {
        for &v in &vs {
            if u != v && within_dmax(grid, d_max, u, v)? {
                *acc.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    Ok(())
}

fn assign_all(es: &EventSet, grid: &GridSpec) -> Result<Vec<CellId>> {
    es.events()
        .iter()
        .map(|e| grid.assign_cell(e.x, e.y))
        .collect()
}

fn check_build_params(grid: &GridSpec, h: usize) -> Result<()> {
    grid.validate()?;
    if h < 1 {
        return Err(Error::InvalidParameter("window size h must be >= 1".into()));
    }
    Ok(())
}

/// Builds the directed chronnet of a sorted event set.
///
/// Nodes are the cells containing at least one event; every group pair at
/// offset `h` contributes link increments as described in the module docs.
pub fn build(es: &EventSet, grid: &GridSpec, h: usize, d_max: Option<f64>) -> Result<Chronnet> {
    check_build_params(grid, h)?;
    let groups = es.group_parallel()?;
    let cells = assign_all(es, grid)?;
    let nodes: BTreeSet<CellId> = cells.iter().copied().collect();

    let mut weights = BTreeMap::new();
    for gi in 0..groups.len().saturating_sub(h) {
        accumulate_pair(&groups, &cells, gi, gi + h, grid, d_max, &mut weights)?;
    }
    Ok(Chronnet {
        directed: true,
        nodes,
        weights,
        grid: grid.clone(),
        meta: BuildMeta::new(h, d_max),
    })
}

/// Chunked construction. The group sequence is cut into `chunks` contiguous
/// segments; each segment counts the pairs whose first group it owns (the
/// tail of one segment overlaps the head of the next by `h` groups), partial
/// maps are built concurrently and merged by summation. The result equals
/// [`build`] exactly.
pub fn build_parallel(
    es: &EventSet,
    grid: &GridSpec,
    h: usize,
    d_max: Option<f64>,
    chunks: usize,
) -> Result<Chronnet> {
    check_build_params(grid, h)?;
    if chunks < 1 {
        return Err(Error::InvalidParameter("chunk count must be >= 1".into()));
    }
    let groups = es.group_parallel()?;
    let cells = assign_all(es, grid)?;
    let nodes: BTreeSet<CellId> = cells.iter().copied().collect();

    let first_indices = groups.len().saturating_sub(h);
    let per_chunk = first_indices.div_ceil(chunks.max(1)).max(1);
    let bounds: Vec<(usize, usize)> = (0..chunks)
        .map(|c| (per_chunk * c, (per_chunk * (c + 1)).min(first_indices)))
        .filter(|(lo, hi)| lo < hi)
        .collect();

    let partials: Vec<Result<BTreeMap<(CellId, CellId), u64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = bounds
            .iter()
            .map(|&(lo, hi)| {
                let groups = &groups;
                let cells = &cells;
                scope.spawn(move || {
                    let mut acc = BTreeMap::new();
                    for gi in lo..hi {
                        accumulate_pair(groups, cells, gi, gi + h, grid, d_max, &mut acc)?;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|j| j.join().expect("chunk worker panicked"))
            .collect()
    });

    let mut weights = BTreeMap::new();
    for partial in partials {
        for (k, w) in partial? {
            *weights.entry(k).or_insert(0) += w;
        }
    }
    Ok(Chronnet {
        directed: true,
        nodes,
        weights,
        grid: grid.clone(),
        meta: BuildMeta::new(h, d_max),
    })
}

/// One layer of a temporal chronnet.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t_start: f64,
    pub t_end: f64,
    pub net: Chronnet,
}

/// Contiguous, non-overlapping layers covering the full observation period.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSequence {
    pub windows: Vec<Snapshot>,
}

/// Partitions events into consecutive windows of length `dt` and builds one
/// chronnet per window independently; consecutive events in different
/// windows never link.
pub fn build_snapshots(
    es: &EventSet,
    grid: &GridSpec,
    h: usize,
    d_max: Option<f64>,
    dt: f64,
) -> Result<SnapshotSequence> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window length must be > 0, got {dt}"
        )));
    }
    if !es.is_sorted() {
        return Err(Error::UnsortedEvents);
    }
    if es.is_empty() {
        return Ok(SnapshotSequence {
            windows: Vec::new(),
        });
    }
    let t_min = es.events()[0].t;
    let n_windows = (es.span() / dt).floor() as usize + 1;
    let mut buckets: Vec<Vec<crate::events::Event>> = vec![Vec::new(); n_windows];
    for e in es.events() {
        let k = (((e.t - t_min) / dt).floor() as usize).min(n_windows - 1);
        buckets[k].push(e.clone());
    }
    let mut windows = Vec::with_capacity(n_windows);
    for (k, bucket) in buckets.into_iter().enumerate() {
        let t_start = t_min + k as f64 * dt;
        let t_end = t_min + (k + 1) as f64 * dt;
        let mut net = build(&EventSet::new(bucket), grid, h, d_max)?;
        net.meta.window = Some((t_start, t_end));
        windows.push(Snapshot {
            t_start,
            t_end,
            net,
        });
    }
    Ok(SnapshotSequence { windows })
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    directed: bool,
    #[serde(flatten)]
    meta: BuildMeta,
    grid: GridSpec,
    nodes: Vec<u32>,
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Writes the edge list (`src,dst,weight`, keys ascending) plus a companion
/// `<stem>.meta.json` holding directedness, parameters, grid, and the full
/// node list so isolated nodes survive the round trip.
pub fn write_network(c: &Chronnet, path: &Path) -> Result<()> {
    let mut out = String::from("src,dst,weight\n");
    for ((u, v), w) in c.links() {
        out.push_str(&format!("{u},{v},{w}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let meta = MetaFile {
        directed: c.directed,
        meta: c.meta.clone(),
        grid: c.grid.clone(),
        nodes: c.nodes.iter().map(|c| c.0).collect(),
    };
    let mp = meta_path(path);
    let body = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::InvalidParameter(format!("meta serialization failed: {e}")))?;
    fs::write(&mp, body).map_err(|e| Error::io(&mp, e))
}

/// Reads a network written by [`write_network`]. Malformed rows, zero or
/// negative weights, unknown endpoints, and duplicate keys are rejected with
/// the offending line number.
pub fn read_network(path: &Path) -> Result<Chronnet> {
    let mp = meta_path(path);
    let meta_text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta: MetaFile =
        serde_json::from_str(&meta_text).map_err(|e| Error::parse(&mp, e.line(), e.to_string()))?;
    meta.grid.validate()?;
    let nodes: BTreeSet<CellId> = meta.nodes.iter().map(|&i| CellId(i)).collect();

    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "src,dst,weight" => {}
        _ => return Err(Error::parse(path, 1, "expected header `src,dst,weight`")),
    }
    let mut weights = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let src: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad src `{}`", fields[0])))?;
        let dst: u32 = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad dst `{}`", fields[1])))?;
        let w: i64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad weight `{}`", fields[2])))?;
        if w < 1 {
            return Err(Error::parse(
                path,
                line,
                format!("weight must be positive, got {w}"),
            ));
        }
        let key = (CellId(src), CellId(dst));
        if weights.insert(key, w as u64).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate link {src}->{dst}"),
            ));
        }
    }
    Chronnet::from_links(meta.grid, meta.directed, nodes, weights, meta.meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Event;
    use crate::grid::BBox;

    fn grid10() -> GridSpec {
        GridSpec::rect(BBox::new(0.0, 10.0, 0.0, 10.0), 10, 10).unwrap()
    }

    /// Events at the centers of the given cells, timestamps 1..=n.
    fn events_at(grid: &GridSpec, cells: &[u32]) -> EventSet {
        let events = cells
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (x, y) = grid.cell_center(CellId(c)).unwrap();
                Event::new((i + 1) as f64, x, y)
            })
            .collect();
        EventSet::new(events)
    }

    /// Events at cell centers with explicit timestamps.
    fn events_at_times(grid: &GridSpec, seq: &[(f64, u32)]) -> EventSet {
        let events = seq
            .iter()
            .map(|&(t, c)| {
                let (x, y) = grid.cell_center(CellId(c)).unwrap();
                Event::new(t, x, y)
            })
            .collect();
        EventSet::new(events)
    }

    #[test]
    fn sequence_counts_by_definition() {
        let g = grid10();
        let es = events_at(&g, &[1, 2, 1, 2, 3]);
        let c = build(&es, &g, 1, None).unwrap();
        assert_eq!(c.weight(CellId(1), CellId(2)), 2);
        assert_eq!(c.weight(CellId(2), CellId(1)), 1);
        assert_eq!(c.weight(CellId(2), CellId(3)), 1);
        assert_eq!(c.link_count(), 3);
        assert_eq!(c.node_count(), 3);
    }

    #[test]
    fn single_event_has_no_links() {
        let g = grid10();
        let c = build(&events_at(&g, &[5]), &g, 1, None).unwrap();
        assert_eq!(c.node_count(), 1);
        assert_eq!(c.link_count(), 0);
    }

    #[test]
    fn empty_event_set_gives_empty_network() {
        let g = grid10();
        let c = build(&EventSet::empty(), &g, 1, None).unwrap();
        assert_eq!(c.node_count(), 0);
        assert_eq!(c.link_count(), 0);
    }

    #[test]
    fn parallel_groups_link_all_distinct_combinations() {
        let g = grid10();
        let es = events_at_times(&g, &[(1.0, 0), (1.0, 1), (2.0, 2)]);
        let c = build(&es, &g, 1, None).unwrap();
        assert_eq!(c.weight(CellId(0), CellId(2)), 1);
        assert_eq!(c.weight(CellId(1), CellId(2)), 1);
        assert_eq!(c.link_count(), 2);
    }

    #[test]
    fn parallel_pair_never_self_loops_and_dedups_cells() {
        let g = grid10();
        // Two parallel events in cell 0, then cell 0 again.
        let es = events_at_times(&g, &[(1.0, 0), (1.0, 0), (2.0, 0)]);
        let c = build(&es, &g, 1, None).unwrap();
        assert_eq!(
            c.link_count(),
            0,
            "distinct-cell rule suppresses the self pair"
        );
        // Two parallel events in the same cell before a different cell.
        let es = events_at_times(&g, &[(1.0, 0), (1.0, 0), (2.0, 3)]);
        let c = build(&es, &g, 1, None).unwrap();
        assert_eq!(
            c.weight(CellId(0), CellId(3)),
            1,
            "set semantics: one increment per cell pair"
        );
    }

    #[test]
    fn offset_h_pairs_and_self_loop() {
        let g = grid10();
        let es = events_at(&g, &[1, 2, 1]);
        let c = build(&es, &g, 2, None).unwrap();
        assert_eq!(c.weight(CellId(1), CellId(1)), 1);
        assert_eq!(c.link_count(), 1);
    }

    #[test]
    fn h_zero_and_unsorted_are_errors() {
        let g = grid10();
        let es = events_at(&g, &[1, 2]);
        assert!(build(&es, &g, 0, None).is_err());
        let unsorted = events_at_times(&g, &[(2.0, 1), (1.0, 2)]);
        assert!(matches!(
            build(&unsorted, &g, 1, None),
            Err(Error::UnsortedEvents)
        ));
    }

    #[test]
    fn d_max_limits_link_span() {
        let g = grid10();
        // Cells 0 and 99 are far apart; 0 and 1 adjacent.
        let es = events_at(&g, &[0, 99, 0, 1]);
        let c = build(&es, &g, 1, Some(2.0)).unwrap();
        assert_eq!(c.weight(CellId(0), CellId(99)), 0);
        assert_eq!(c.weight(CellId(99), CellId(0)), 0);
        assert_eq!(c.weight(CellId(0), CellId(1)), 1);
        // All four cells remain nodes.
        assert_eq!(c.node_count(), 3);
    }

    #[test]
    fn parallel_build_degenerate_and_oversized_chunks() {
        let g = grid10();
        let es = events_at(&g, &[1, 2, 1, 2, 3, 7, 7, 1]);
        let seq = build(&es, &g, 1, None).unwrap();
        assert_eq!(build_parallel(&es, &g, 1, None, 1).unwrap(), seq);
        assert_eq!(build_parallel(&es, &g, 1, None, 100).unwrap(), seq);
        assert!(build_parallel(&es, &g, 1, None, 0).is_err());
    }

    #[test]
    fn prune_threshold_rule() {
        let g = grid10();
        let mut links = BTreeMap::new();
        links.insert((CellId(0), CellId(1)), 1);
        links.insert((CellId(1), CellId(2)), 2);
        links.insert((CellId(2), CellId(3)), 5);
        let nodes: BTreeSet<CellId> = (0..4).map(CellId).collect();
        let c = Chronnet::from_links(g, true, nodes, links, BuildMeta::new(1, None)).unwrap();

        let p = c.prune(1);
        assert_eq!(p.link_count(), 2);
        assert_eq!(p.weight(CellId(1), CellId(2)), 2);
        assert_eq!(p.node_count(), 4, "pruning keeps nodes");
        assert_eq!(p.meta().tau, Some(1));

        let same = c.prune(0);
        assert_eq!(same.link_count(), c.link_count());

        // Composition equals pruning at the max threshold.
        assert_eq!(c.prune(1).prune(2), c.prune(2));
        assert_eq!(c.prune(2).prune(1), c.prune(2));
    }

    #[test]
    fn prune_quantile_keeps_ties() {
        let g = grid10();
        let nodes: BTreeSet<CellId> = (0..8).map(CellId).collect();
        let mut links = BTreeMap::new();
        for i in 0..3u32 {
            links.insert((CellId(i), CellId(i + 1)), 5);
        }
        links.insert((CellId(4), CellId(5)), 1);
        let c =
            Chronnet::from_links(g.clone(), true, nodes, links, BuildMeta::new(1, None)).unwrap();
        let kept = c.prune_quantile(0.25).unwrap();
        assert_eq!(kept.link_count(), 3, "all weight-5 ties survive");

        // Ten distinct weights, keep 0.2 -> two heaviest.
        let nodes: BTreeSet<CellId> = (0..11).map(CellId).collect();
        let mut links = BTreeMap::new();
        for i in 0..10u32 {
            links.insert((CellId(i), CellId(i + 1)), (i + 1) as u64);
        }
        let c = Chronnet::from_links(g, true, nodes, links, BuildMeta::new(1, None)).unwrap();
        let kept = c.prune_quantile(0.2).unwrap();
        assert_eq!(kept.link_count(), 2);
        assert!(kept.links().all(|(_, w)| w >= 9));
        assert_eq!(c.prune_quantile(1.0).unwrap().link_count(), c.link_count());
        assert!(c.prune_quantile(0.0).is_err());
    }

    #[test]
    fn undirect_sums_opposite_links() {
        let g = grid10();
        let nodes: BTreeSet<CellId> = [CellId(0), CellId(1)].into_iter().collect();
        let mut links = BTreeMap::new();
        links.insert((CellId(0), CellId(1)), 2);
        links.insert((CellId(1), CellId(0)), 1);
        let c = Chronnet::from_links(g, true, nodes, links, BuildMeta::new(1, None)).unwrap();
        let u = c.undirect().unwrap();
        assert_eq!(u.weight(CellId(0), CellId(1)), 3);
        assert_eq!(u.weight(CellId(1), CellId(0)), 3);
        assert_eq!(u.link_count(), 1);
        assert!(u.undirect().is_err());
    }

    #[test]
    fn undirect_copies_self_loops_and_empty() {
        let g = grid10();
        let nodes: BTreeSet<CellId> = [CellId(4)].into_iter().collect();
        let mut links = BTreeMap::new();
        links.insert((CellId(4), CellId(4)), 4);
        let c =
            Chronnet::from_links(g.clone(), true, nodes, links, BuildMeta::new(1, None)).unwrap();
        assert_eq!(c.undirect().unwrap().weight(CellId(4), CellId(4)), 4);

        let empty = Chronnet::from_links(
            g,
            true,
            BTreeSet::new(),
            BTreeMap::new(),
            BuildMeta::new(1, None),
        )
        .unwrap();
        let u = empty.undirect().unwrap();
        assert_eq!(u.node_count(), 0);
        assert_eq!(u.link_count(), 0);
    }

    #[test]
    fn snapshots_cover_and_match_single_build() {
        let g = grid10();
        let es = events_at(&g, &[0, 1, 2, 3, 4, 0, 1, 2, 3, 4]);
        let single = build_snapshots(&es, &g, 1, None, 100.0).unwrap();
        assert_eq!(single.windows.len(), 1);
        let direct = build(&es, &g, 1, None).unwrap();
        assert_eq!(single.windows[0].net.weights, direct.weights);

        let two = build_snapshots(&es, &g, 1, None, 5.0).unwrap();
        assert_eq!(two.windows.len(), 2);
        assert_eq!(two.windows[0].net.nodes.len(), 5);
        assert_eq!(two.windows[1].net.nodes.len(), 5);
        assert!(build_snapshots(&es, &g, 1, None, 0.0).is_err());
    }

    #[test]
    fn snapshot_weight_conservation_oracle() {
        let g = grid10();
        let cells: Vec<u32> = (0..97).map(|i| (i * 13 + 7) % 100).collect();
        let es = events_at(&g, &cells[..]);
        let dt = 7.0;
        let snaps = build_snapshots(&es, &g, 1, None, dt).unwrap();
        let windowed: u64 = snaps.windows.iter().map(|s| s.net.total_weight()).sum();
        // Oracle: count consecutive event pairs whose endpoints straddle a
        // window boundary directly from the raw sequence.
        let t_min = es.events()[0].t;
        let crossing = es
            .events()
            .windows(2)
            .filter(|p| {
                let wa = ((p[0].t - t_min) / dt).floor() as usize;
                let wb = ((p[1].t - t_min) / dt).floor() as usize;
                wa != wb
            })
            .count() as u64;
        let total = build(&es, &g, 1, None).unwrap().total_weight();
        assert_eq!(windowed + crossing, total);
    }

    #[test]
    fn network_file_round_trip() {
        let g = grid10();
        let es = events_at(&g, &[1, 2, 1, 2, 3, 9, 1]);
        let c = build(&es, &g, 1, None)
            .unwrap()
            .undirect()
            .unwrap()
            .prune(0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.csv");
        write_network(&c, &path).unwrap();
        let back = read_network(&path).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_network_round_trip() {
        let g = grid10();
        let c = build(&EventSet::empty(), &g, 1, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.csv");
        write_network(&c, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "src,dst,weight\n");
        assert_eq!(read_network(&path).unwrap(), c);
    }

    #[test]
    fn negative_weight_rejected_on_read() {
        let g = grid10();
        let es = events_at(&g, &[1, 2]);
        let c = build(&es, &g, 1, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.csv");
        write_network(&c, &path).unwrap();
        fs::write(&path, "src,dst,weight\n1,2,-3\n").unwrap();
        let err = read_network(&path).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }
}
