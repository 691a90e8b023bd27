//! Data-driven design of rate-compatible code sequences: the augmented
//! graph over (information set, zero-padding) designs, its shortest-path
//! search, the sequential multi-length variant, and disambiguation of the
//! resulting partial order into a single reliability order.
//!
//! Vertices at effective dimension `k` are either measured codes or a
//! zero-padded view of a larger code; consecutive dimensions are linked
//! when the designs nest. Edge costs average the endpoint metrics, so the
//! cheapest path minimizes the summed metric over the whole sequence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::code::{InformationSet, TotalOrder};
use crate::error::{Error, Result};
use crate::upo;

/// Simulation provenance attached to a measured record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimMeta {
    pub decoder: String,
    pub m: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One dataset entry: a code and (once simulated) its required Eb/N0 in
/// dB. Skeleton files carry `mu_db: null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub info: InformationSet,
    pub mu_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<SimMeta>,
}

impl DatasetRecord {
    pub fn skeleton(info: InformationSet) -> Self {
        Self { info, mu_db: None, meta: None }
    }
}

/// Metric degradation of zero-padding: transmitting `k_full - z` useful
/// bits through a `k_full`-dimensional code costs `10 log10(k_full /
/// (k_full - z))` dB of Eb/N0.
pub fn zero_pad_mu(mu_db: f64, k_full: usize, z: usize) -> Result<f64> {
    if z >= k_full {
        return Err(Error::InvalidArgument(format!(
            "padding {z} must be smaller than the dimension {k_full}"
        )));
    }
    Ok(mu_db + 10.0 * (k_full as f64 / (k_full - z) as f64).log10())
}

/// Cost of an edge between connected designs.
pub fn edge_cost(mu_i: f64, mu_j: f64) -> f64 {
    0.5 * (mu_i + mu_j)
}

/// A graph vertex: a dataset code used with `z` bits of zero-padding.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignVertex {
    pub info: InformationSet,
    pub z: usize,
    pub mu_db: f64,
}

impl DesignVertex {
    pub fn effective_k(&self) -> usize {
        self.info.len() - self.z
    }
}

/// The augmented design graph, leveled by effective dimension.
pub struct DesignGraph {
    pub n: usize,
    pub vertices: Vec<DesignVertex>,
    /// Vertex ids per effective dimension 0..=N, each level in canonical
    /// order (info set, then z).
    levels: Vec<Vec<usize>>,
}

impl DesignGraph {
    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    fn connected(&self, from: &DesignVertex, to: &DesignVertex) -> bool {
        debug_assert_eq!(to.effective_k(), from.effective_k() + 1);
        from.info == to.info || (from.z == 0 && from.info.is_subset_of(&to.info))
    }
}

/// Build the graph: each record spawns vertices for `z` in
/// `0..=min(z_max, K-1)` with the rate-loss-adjusted metric. The dataset
/// must contain both trivial codes and exactly one record per set.
pub fn build_graph(dataset: &[DatasetRecord], z_max: usize) -> Result<DesignGraph> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let n = dataset[0].info.n();
    let block_len = 1usize << n;
    let mut seen: Vec<&InformationSet> = Vec::with_capacity(dataset.len());
    let mut vertices = Vec::new();
    for rec in dataset {
        if rec.info.n() != n {
            return Err(Error::InvalidArgument("mixed block lengths in dataset".into()));
        }
        if seen.contains(&&rec.info) {
            return Err(Error::InvalidArgument(format!(
                "duplicate information set {:?}",
                rec.info.indices()
            )));
        }
        seen.push(&rec.info);
        let mu = rec.mu_db.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "record {:?} has no metric; simulate the dataset first",
                rec.info.indices()
            ))
        })?;
        let k = rec.info.len();
        for z in 0..=z_max.min(k.saturating_sub(1)) {
            let mu_z = if z == 0 { mu } else { zero_pad_mu(mu, k, z)? };
            vertices.push(DesignVertex { info: rec.info, z, mu_db: mu_z });
        }
    }
    if !seen.iter().any(|i| i.is_empty()) {
        return Err(Error::InvalidArgument("dataset lacks the K = 0 trivial code".into()));
    }
    if !seen.iter().any(|i| i.len() == block_len) {
        return Err(Error::InvalidArgument("dataset lacks the K = N trivial code".into()));
    }
    vertices.sort_by(|a, b| a.info.cmp(&b.info).then(a.z.cmp(&b.z)));
    let mut levels = vec![Vec::new(); block_len + 1];
    for (id, v) in vertices.iter().enumerate() {
        levels[v.effective_k()].push(id);
    }
    Ok(DesignGraph { n, vertices, levels })
}

/// A K = 0 to K = N chain of designs and its summed edge cost.
#[derive(Clone, Debug)]
pub struct SequencePath {
    pub vertices: Vec<DesignVertex>,
    pub total_cost: f64,
}

impl SequencePath {
    /// Summed metric over all designs in the sequence.
    pub fn mu_sum(&self) -> f64 {
        self.vertices.iter().map(|v| v.mu_db).sum()
    }
}

/// Cheapest path from the K = 0 vertex to the K = N vertex; the graph is
/// leveled, so one pass of relaxation per dimension suffices. Cost ties
/// prefer the canonically smaller predecessor (lexicographic information
/// set, then smaller z).
pub fn shortest_path(graph: &DesignGraph) -> Result<SequencePath> {
    let block_len = graph.block_len();
    let mut dist = vec![f64::INFINITY; graph.vertices.len()];
    let mut pred = vec![usize::MAX; graph.vertices.len()];
    let [start] = graph.levels[0][..] else {
        return Err(Error::Design("expected exactly one K = 0 vertex".into()));
    };
    dist[start] = 0.0;
    for k in 1..=block_len {
        for &v in &graph.levels[k] {
            for &u in &graph.levels[k - 1] {
                if dist[u].is_finite() && graph.connected(&graph.vertices[u], &graph.vertices[v]) {
                    let cand = dist[u] + edge_cost(graph.vertices[u].mu_db, graph.vertices[v].mu_db);
                    // strict improvement; level order breaks cost ties
                    if cand < dist[v] {
                        dist[v] = cand;
                        pred[v] = u;
                    }
                }
            }
        }
    }
    let [terminal] = graph.levels[block_len][..] else {
        return Err(Error::Design("expected exactly one K = N vertex".into()));
    };
    if !dist[terminal].is_finite() {
        return Err(Error::Design(format!(
            "no K = 0 to K = {block_len} path exists in the design graph"
        )));
    }
    let mut chain = vec![terminal];
    while *chain.last().unwrap() != start {
        chain.push(pred[*chain.last().unwrap()]);
    }
    chain.reverse();
    Ok(SequencePath {
        vertices: chain.iter().map(|&id| graph.vertices[id].clone()).collect(),
        total_cost: dist[terminal],
    })
}

/// Ordered index groups per designed block length, least reliable group
/// first; singleton groups from unit steps, larger groups from padding
/// jumps. Within a group no order is asserted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialOrder {
    groups: BTreeMap<usize, Vec<Vec<u16>>>,
}

impl PartialOrder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, block_len: usize, mut groups: Vec<Vec<u16>>) -> Result<()> {
        if self.groups.contains_key(&block_len) {
            return Err(Error::InvalidArgument(format!(
                "partial order already holds groups for N = {block_len}"
            )));
        }
        let mut seen = vec![false; block_len];
        for group in &mut groups {
            group.sort_unstable();
            for &i in group.iter() {
                if (i as usize) >= block_len || seen[i as usize] {
                    return Err(Error::InvalidArgument(format!(
                        "groups for N = {block_len} are not a partition: index {i}"
                    )));
                }
                seen[i as usize] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidArgument(format!(
                "groups for N = {block_len} do not cover [0, {block_len})"
            )));
        }
        self.groups.insert(block_len, groups);
        Ok(())
    }

    pub fn single(block_len: usize, groups: Vec<Vec<u16>>) -> Result<Self> {
        let mut p = Self::new();
        p.insert(block_len, groups)?;
        Ok(p)
    }

    pub fn merge(&mut self, other: PartialOrder) -> Result<()> {
        for (block_len, groups) in other.groups {
            self.insert(block_len, groups)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.keys().copied()
    }

    pub fn groups_for(&self, block_len: usize) -> Option<&[Vec<u16>]> {
        self.groups.get(&block_len).map(|g| g.as_slice())
    }

    pub fn max_len(&self) -> Option<usize> {
        self.groups.keys().next_back().copied()
    }
}

/// Read the partial order off a path: the indices added between
/// consecutive unpadded checkpoints form one group each; the walk runs
/// from K = 0 upward, and the groups are reversed so the ones added last
/// (least reliable) come first.
pub fn extract_partial_order(path: &SequencePath) -> Vec<Vec<u16>> {
    let checkpoints: Vec<&DesignVertex> = path.vertices.iter().filter(|v| v.z == 0).collect();
    let mut groups: Vec<Vec<u16>> = checkpoints
        .windows(2)
        .map(|w| w[1].info.difference(&w[0].info))
        .collect();
    groups.reverse();
    groups
}

/// Restrict a group sequence to indices below `limit`, dropping empty
/// groups.
fn restrict_groups(groups: &[Vec<u16>], limit: u16) -> Vec<Vec<u16>> {
    groups
        .iter()
        .map(|g| g.iter().copied().filter(|&i| i < limit).collect::<Vec<u16>>())
        .filter(|g| !g.is_empty())
        .collect()
}

/// Compatibility of a set with a group sequence (ascending reliability):
/// walking from the most reliable end, the set must contain whole
/// groups, then may cut one group partially, and must not touch anything
/// less reliable.
fn compatible_with_groups(info: &InformationSet, groups: &[Vec<u16>], limit: u16) -> bool {
    let restricted = restrict_groups(groups, limit);
    let contains_all = |g: &[u16]| g.iter().all(|&i| info.contains(i));
    let mut idx = restricted.len();
    while idx > 0 && contains_all(&restricted[idx - 1]) {
        idx -= 1;
    }
    if idx == 0 {
        return true;
    }
    // restricted[idx - 1] is the boundary group; partial overlap is fine
    restricted[..idx - 1]
        .iter()
        .all(|g| g.iter().all(|&i| !info.contains(i)))
}

/// Keep only the records whose restriction to each previously designed
/// length is compatible with that length's groups.
pub fn filter_dataset(dataset: &[DatasetRecord], p: &PartialOrder, block_len: usize) -> Vec<DatasetRecord> {
    dataset
        .iter()
        .filter(|rec| {
            p.lengths().all(|fixed_len| {
                let limit = block_len.min(fixed_len) as u16;
                let groups = p.groups_for(fixed_len).expect("length listed");
                compatible_with_groups(&rec.info, groups, limit)
            })
        })
        .cloned()
        .collect()
}

/// Outcome of a single-length design: the extracted groups and the path
/// they came from.
pub struct DesignOutcome {
    pub block_len: usize,
    pub groups: Vec<Vec<u16>>,
    pub path: SequencePath,
}

/// Design one block length: build the augmented graph, find the cheapest
/// sequence, extract the group order.
pub fn design_rate_compatible(dataset: &[DatasetRecord], z_max: usize) -> Result<DesignOutcome> {
    let graph = build_graph(dataset, z_max)?;
    let path = shortest_path(&graph)?;
    let groups = extract_partial_order(&path);
    Ok(DesignOutcome { block_len: graph.block_len(), groups, path })
}

/// Sequentially design every scheduled block length, filtering each
/// dataset by the relations fixed so far and merging the new groups in.
pub fn design_nested(
    schedule: &[usize],
    datasets: &BTreeMap<usize, Vec<DatasetRecord>>,
    z_max: usize,
) -> Result<(PartialOrder, Vec<DesignOutcome>)> {
    let mut p = PartialOrder::new();
    let mut outcomes = Vec::new();
    for &block_len in schedule {
        let dataset = datasets.get(&block_len).ok_or_else(|| {
            Error::InvalidArgument(format!("no dataset for scheduled N = {block_len}"))
        })?;
        let filtered = filter_dataset(dataset, &p, block_len);
        let outcome = design_rate_compatible(&filtered, z_max).map_err(|e| match e {
            Error::Design(msg) => Error::Design(format!("N = {block_len}: {msg}")),
            other => other,
        })?;
        p.insert(block_len, outcome.groups.clone())?;
        outcomes.push(outcome);
    }
    Ok((p, outcomes))
}

/// Turn the merged partial order into a total order over the largest
/// designed length. Indices become available once every index of an
/// earlier (less reliable) group is placed, for every length that
/// constrains them; with `enforce_upo` an index additionally waits for
/// all its UPO predecessors. Among the available, the smallest auxiliary
/// reliability goes first (the order lists channels in ascending
/// reliability); remaining ties pick the smallest index.
pub fn disambiguate(p: &PartialOrder, nu: &[f64], enforce_upo: bool) -> Result<TotalOrder> {
    let block_len = p
        .max_len()
        .ok_or_else(|| Error::InvalidArgument("empty partial order".into()))?;
    if nu.len() != block_len {
        return Err(Error::InvalidArgument(format!(
            "reliability vector has {} entries, expected {block_len}",
            nu.len()
        )));
    }
    let n = block_len.trailing_zeros() as usize;
    // group_rank[length index][channel] = position of its group
    let constraints: Vec<(usize, Vec<usize>)> = p
        .lengths()
        .map(|len| {
            let groups = p.groups_for(len).expect("length listed");
            let mut rank = vec![usize::MAX; len];
            for (g, group) in groups.iter().enumerate() {
                for &i in group {
                    rank[i as usize] = g;
                }
            }
            (len, rank)
        })
        .collect();
    let mut placed = vec![false; block_len];
    // per length: count of not-yet-placed indices in each group
    let mut remaining: Vec<Vec<usize>> = p
        .lengths()
        .map(|len| {
            p.groups_for(len).expect("length listed").iter().map(|g| g.len()).collect()
        })
        .collect();
    let mut q = Vec::with_capacity(block_len);
    for _ in 0..block_len {
        let mut best: Option<u16> = None;
        'cand: for j in 0..block_len as u16 {
            if placed[j as usize] {
                continue;
            }
            for (c, (len, rank)) in constraints.iter().enumerate() {
                if (j as usize) < *len {
                    let g = rank[j as usize];
                    if remaining[c][..g].iter().any(|&r| r > 0) {
                        continue 'cand;
                    }
                }
            }
            if enforce_upo {
                for i in 0..block_len as u16 {
                    if i != j && !placed[i as usize] && upo::upo_leq(i, j, n) {
                        continue 'cand;
                    }
                }
            }
            match best {
                Some(b) if nu[b as usize] <= nu[j as usize] => {}
                _ => best = Some(j),
            }
        }
        let pick = best.ok_or_else(|| {
            Error::Design(
                "partial order is inconsistent: no placeable index remains".into(),
            )
        })?;
        placed[pick as usize] = true;
        for (c, (len, rank)) in constraints.iter().enumerate() {
            if (pick as usize) < *len {
                remaining[c][rank[pick as usize]] -= 1;
            }
        }
        q.push(pick);
    }
    TotalOrder::new(n, q)
}

/// Validation report for a reliability order; empty means clean.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a total order: it must be a permutation, respect the universal
/// partial order, respect the group precedence of `p` when given, and
/// every power-of-two nesting restriction must itself be a clean order.
pub fn validate_order(q: &TotalOrder, p: Option<&PartialOrder>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = q.n();
    let block_len = q.block_len();
    // permutation (the constructor enforces it; re-check for callers
    // that built the value by hand)
    let mut seen = vec![false; block_len];
    for &x in &q.q {
        if (x as usize) >= block_len || seen[x as usize] {
            report.violations.push(format!("not a permutation: entry {x}"));
            return report;
        }
        seen[x as usize] = true;
    }
    let mut pos = vec![0usize; block_len];
    for (at, &x) in q.q.iter().enumerate() {
        pos[x as usize] = at;
    }
    for i in 0..block_len as u16 {
        for j in 0..block_len as u16 {
            if i != j && upo::upo_leq(i, j, n) && pos[i as usize] > pos[j as usize] {
                report
                    .violations
                    .push(format!("order breaks the partial order: {i} placed after {j}"));
            }
        }
    }
    if let Some(p) = p {
        for len in p.lengths() {
            let groups = p.groups_for(len).expect("length listed");
            for w in 0..groups.len().saturating_sub(1) {
                let early_max = groups[w].iter().map(|&i| pos[i as usize]).max();
                let late_min = groups[w + 1].iter().map(|&i| pos[i as usize]).min();
                if let (Some(a), Some(b)) = (early_max, late_min) {
                    if a > b {
                        report.violations.push(format!(
                            "N = {len}: group {w} is not fully before group {}",
                            w + 1
                        ));
                    }
                }
            }
        }
    }
    // nesting: every restriction must be a clean shorter order
    for sub_n in 1..n {
        let sub = q.restrict_below(1 << sub_n);
        match TotalOrder::new(sub_n, sub) {
            Ok(sub_q) => {
                let sub_report = validate_order(&sub_q, None);
                for v in sub_report.violations {
                    report.violations.push(format!("restriction to N = {}: {v}", 1 << sub_n));
                }
            }
            Err(e) => report
                .violations
                .push(format!("restriction to N = {} malformed: {e}", 1 << sub_n)),
        }
    }
    report
}
