//! Divisive community detection.
//!
//! Girvan–Newman removes the edge with the highest edge betweenness,
//! recomputing after every removal, and records a partition each time the
//! graph falls apart into more components. The recorded partitions are
//! scored with Newman–Girvan modularity and the best one is selected.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::network::{component_indices, StudentId, UndirectedView};
use crate::par::map_sources;

pub const DEFAULT_K_MAX: usize = 15;

/// Relative tolerance used when comparing edge-betweenness values for the
/// maximum; fractional path splitting makes exact float ties unreliable.
const EB_TIE_TOLERANCE: f64 = 1e-9;
const Q_TIE_TOLERANCE: f64 = 1e-12;

pub type Edge = (StudentId, StudentId);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommunityError {
    #[error("graph has no edges; modularity is undefined")]
    EmptyEdgeSet,
    #[error("student {0} is not assigned to any cluster")]
    UnassignedNode(StudentId),
    #[error("cluster ids must be dense in 0..{k}; id {missing} is unused")]
    SparseClusterIds { k: usize, missing: usize },
    #[error("division trace is empty")]
    EmptyTrace,
    #[error("no recorded partition has at most {k_max} clusters (smallest has {smallest})")]
    NoPartitionWithinKMax { k_max: usize, smallest: usize },
}

/// Node-to-cluster assignment with its modularity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    assignment: BTreeMap<StudentId, usize>,
    k: usize,
    /// Modularity on the view the partition was scored against; 0 until
    /// scored.
    pub q: f64,
}

impl Partition {
    /// Clusters numbered by decreasing size, ties by smallest member id.
    /// Empty clusters are dropped.
    pub fn from_clusters(clusters: impl IntoIterator<Item = Vec<StudentId>>) -> Partition {
        let mut clusters: Vec<Vec<StudentId>> = clusters
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        clusters.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
        let assignment = clusters
            .iter()
            .enumerate()
            .flat_map(|(c, members)| members.iter().map(move |&m| (m, c)))
            .collect();
        Partition {
            assignment,
            k: clusters.len(),
            q: 0.0,
        }
    }

    /// Takes cluster ids as given; they must cover `0..k` densely.
    pub fn from_assignment(
        assignment: BTreeMap<StudentId, usize>,
    ) -> Result<Partition, CommunityError> {
        let used: BTreeSet<usize> = assignment.values().copied().collect();
        let k = used.iter().next_back().map_or(0, |&m| m + 1);
        if let Some(missing) = (0..k).find(|c| !used.contains(c)) {
            return Err(CommunityError::SparseClusterIds { k, missing });
        }
        Ok(Partition {
            assignment,
            k,
            q: 0.0,
        })
    }

    /// Recomputes `q` against `view`.
    pub fn scored(mut self, view: &UndirectedView) -> Result<Partition, CommunityError> {
        self.q = modularity(view, &self)?;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_of(&self, id: StudentId) -> Option<usize> {
        self.assignment.get(&id).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<StudentId, usize> {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Members of each cluster, indexed by cluster id, ascending ids.
    pub fn clusters(&self) -> Vec<Vec<StudentId>> {
        let mut out = vec![Vec::new(); self.k];
        for (&id, &c) in &self.assignment {
            out[c].push(id);
        }
        out
    }

    /// True when every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.clusters().iter().all(|members| {
            let parents: BTreeSet<_> = members.iter().map(|&m| coarser.cluster_of(m)).collect();
            parents.len() == 1 && !parents.contains(&None)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionStep {
    pub removed: Edge,
    pub components: usize,
    /// Present when this removal increased the component count.
    pub snapshot: Option<Partition>,
}

/// Record of one Girvan–Newman run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionTrace {
    /// Components of the untouched view.
    pub initial: Partition,
    pub steps: Vec<DivisionStep>,
}

impl DivisionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The initial partition followed by every recorded snapshot, in
    /// increasing cluster count.
    pub fn snapshots(&self) -> impl Iterator<Item = &Partition> {
        std::iter::once(&self.initial).chain(self.steps.iter().filter_map(|s| s.snapshot.as_ref()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ModularityCurve {
    /// `(k, Q)` with strictly increasing `k`.
    pub points: Vec<(usize, f64)>,
}

/// Edges of the view paired with their dense endpoint indices.
struct EdgeIndex {
    edges: Vec<Edge>,
    /// neighbour, edge id
    adj: Vec<Vec<(usize, usize)>>,
}

impl EdgeIndex {
    fn new(view: &UndirectedView) -> EdgeIndex {
        let edges: Vec<Edge> = view.edges().collect();
        let mut adj = vec![Vec::new(); view.node_count()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            let (i, j) = (view.index_of(a).unwrap(), view.index_of(b).unwrap());
            adj[i].push((j, e));
            adj[j].push((i, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        EdgeIndex { edges, adj }
    }

    /// Dependency of one source on every edge (both directions of travel).
    fn source_contribution(&self, source: usize) -> Vec<f64> {
        let n = self.adj.len();
        let mut dist = vec![usize::MAX; n];
        let mut sigma = vec![0.0; n];
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut order = Vec::new();
        dist[source] = 0;
        sigma[source] = 1.0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, e) in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push((v, e));
                }
            }
        }
        let mut delta = vec![0.0; n];
        let mut eb = vec![0.0; self.edges.len()];
        for &w in order.iter().rev() {
            for &(v, e) in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                eb[e] += c;
                delta[v] += c;
            }
        }
        eb
    }

    /// Edge betweenness using only the given sources, each unordered pair
    /// counted once.
    fn betweenness_from(&self, sources: &[usize]) -> Vec<f64> {
        let per_source = map_sources(sources.len(), |i| self.source_contribution(sources[i]));
        let mut total = vec![0.0; self.edges.len()];
        for contribution in per_source {
            for (t, c) in total.iter_mut().zip(contribution) {
                *t += c;
            }
        }
        total.iter_mut().for_each(|t| *t /= 2.0);
        total
    }
}

/// Geodesic edge betweenness; each unordered node pair is counted once.
pub fn edge_betweenness(view: &UndirectedView) -> BTreeMap<Edge, f64> {
    let index = EdgeIndex::new(view);
    let sources: Vec<usize> = (0..view.node_count()).collect();
    let eb = index.betweenness_from(&sources);
    index.edges.into_iter().zip(eb).collect()
}

/// Edge to cut next: the maximum, ties to the lexicographically smallest.
fn pick_edge(eb: &BTreeMap<Edge, f64>) -> Option<Edge> {
    let max = eb.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max - EB_TIE_TOLERANCE * max.abs().max(1.0);
    eb.iter().find(|(_, &v)| v >= floor).map(|(&e, _)| e)
}

fn reachable(view: &UndirectedView, from: StudentId) -> BTreeSet<StudentId> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    // Linear scan per node is fine at cohort scale.
    while let Some(v) = queue.pop_front() {
        for (a, b) in view.edges() {
            let other = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if seen.insert(other) {
                queue.push_back(other);
            }
        }
    }
    seen
}

fn component_partition(view: &UndirectedView) -> Partition {
    let comps = component_indices(&view.adjacency());
    Partition::from_clusters(
        comps
            .into_iter()
            .map(|c| c.into_iter().map(|i| view.nodes()[i]).collect()),
    )
}

fn score_against(p: Partition, original: &UndirectedView) -> Partition {
    if original.edge_count() == 0 {
        p
    } else {
        // every node of `original` is assigned, so this cannot fail
        p.scored(original).expect("snapshot covers the view")
    }
}

pub fn girvan_newman(view: &UndirectedView) -> DivisionTrace {
    let initial = score_against(component_partition(view), view);
    let mut components = initial.k();
    let mut current = view.clone();
    let mut eb = edge_betweenness(&current);
    let mut steps = Vec::with_capacity(view.edge_count());

    while let Some(edge) = pick_edge(&eb) {
        current.without_edge(edge);
        eb.remove(&edge);

        // Only pairs inside the component(s) touched by the cut change.
        let mut affected = reachable(&current, edge.0);
        let split = !affected.contains(&edge.1);
        if split {
            components += 1;
            affected.extend(reachable(&current, edge.1));
        }
        let local = current.restricted_to(&affected);
        for (e, v) in edge_betweenness(&local) {
            eb.insert(e, v);
        }

        let snapshot = split.then(|| score_against(component_partition(&current), view));
        steps.push(DivisionStep {
            removed: edge,
            components,
            snapshot,
        });
    }
    DivisionTrace { initial, steps }
}

/// Newman–Girvan modularity `sum_c (e_cc - a_c^2)`.
pub fn modularity(view: &UndirectedView, p: &Partition) -> Result<f64, CommunityError> {
    let m = view.edge_count();
    if m == 0 {
        return Err(CommunityError::EmptyEdgeSet);
    }
    for &id in view.nodes() {
        if p.cluster_of(id).is_none() {
            return Err(CommunityError::UnassignedNode(id));
        }
    }
    let mut inside = vec![0usize; p.k()];
    let mut endpoints = vec![0usize; p.k()];
    for (a, b) in view.edges() {
        let (ca, cb) = (p.cluster_of(a).unwrap(), p.cluster_of(b).unwrap());
        endpoints[ca] += 1;
        endpoints[cb] += 1;
        if ca == cb {
            inside[ca] += 1;
        }
    }
    let m = m as f64;
    Ok(inside
        .iter()
        .zip(&endpoints)
        .map(|(&e, &a)| {
            let frac = a as f64 / (2.0 * m);
            e as f64 / m - frac * frac
        })
        .sum())
}

/// Highest-modularity snapshot with at most `k_max` clusters (ties: fewer
/// clusters), plus the modularity curve over those snapshots.
pub fn best_partition(
    view: &UndirectedView,
    trace: &DivisionTrace,
    k_max: usize,
) -> Result<(Partition, ModularityCurve), CommunityError> {
    if trace.is_empty() {
        return Err(CommunityError::EmptyTrace);
    }
    let mut best: Option<Partition> = None;
    let mut curve = ModularityCurve::default();
    for snapshot in trace.snapshots().filter(|p| p.k() <= k_max) {
        let scored = snapshot.clone().scored(view)?;
        curve.points.push((scored.k(), scored.q));
        if best
            .as_ref()
            .is_none_or(|b| scored.q > b.q + Q_TIE_TOLERANCE)
        {
            best = Some(scored);
        }
    }
    best.map(|b| (b, curve))
        .ok_or(CommunityError::NoPartitionWithinKMax {
            k_max,
            smallest: trace.initial.k(),
        })
}

/// Convenience: run the division and select in one go.
pub fn detect_communities(
    view: &UndirectedView,
    k_max: usize,
) -> Result<(Partition, ModularityCurve, DivisionTrace), CommunityError> {
    let trace = girvan_newman(view);
    let (best, curve) = best_partition(view, &trace, k_max)?;
    Ok((best, curve, trace))
}
