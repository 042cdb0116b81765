//! Node centrality measures.
//!
//! Betweenness is unnormalized geodesic betweenness (Brandes), split
//! fractionally across equal-length shortest paths. Closeness refuses
//! disconnected graphs, and eigenvector centrality attaches a warning when
//! the input contains one-way ties, because its symmetrized result can
//! misrepresent a directed network.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::network::{symmetrize, FriendshipNetwork, StudentId, SymmetrizeRule};
use crate::par::map_sources;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Measure {
    Degree,
    Betweenness,
    Closeness,
    Eigenvector,
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "degree" => Ok(Measure::Degree),
            "betweenness" => Ok(Measure::Betweenness),
            "closeness" => Ok(Measure::Closeness),
            "eigenvector" => Ok(Measure::Eigenvector),
            other => Err(format!("unknown centrality measure `{other}`")),
        }
    }
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Betweenness => "betweenness",
            Measure::Closeness => "closeness",
            Measure::Eigenvector => "eigenvector",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Directed,
    Undirected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityScores {
    pub measure: Measure,
    pub mode: Mode,
    pub scores: BTreeMap<StudentId, f64>,
    pub warnings: Vec<String>,
}

impl CentralityScores {
    pub fn get(&self, id: StudentId) -> Option<f64> {
        self.scores.get(&id).copied()
    }

    /// Node ids by descending score, ties by ascending id.
    pub fn ranked(&self) -> Vec<(StudentId, f64)> {
        let mut v: Vec<_> = self.scores.iter().map(|(&k, &s)| (k, s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CentralityError {
    #[error("graph is disconnected ({components} components); closeness is undefined, analyse each component separately")]
    DisconnectedGraph { components: usize },
    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("network has no edges")]
    EmptyEdgeSet,
    #[error("cannot pick {k} representatives from {nodes} students")]
    KTooLarge { k: usize, nodes: usize },
    #[error("number of representatives must be positive")]
    ZeroK,
}

/// Shortest-path DAG from one source: BFS visitation order, path counts and
/// predecessor lists.
pub(crate) struct ShortestPaths {
    pub order: Vec<usize>,
    pub sigma: Vec<f64>,
    pub preds: Vec<Vec<usize>>,
}

pub(crate) fn shortest_paths(adj: &[Vec<usize>], source: usize) -> ShortestPaths {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    dist[source] = 0;
    sigma[source] = 1.0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    ShortestPaths {
        order,
        sigma,
        preds,
    }
}

/// Per-node dependency of `source` on every other node.
fn node_dependencies(adj: &[Vec<usize>], source: usize) -> Vec<f64> {
    let sp = shortest_paths(adj, source);
    let mut delta = vec![0.0; adj.len()];
    for &w in sp.order.iter().rev() {
        for &v in &sp.preds[w] {
            delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[source] = 0.0;
    delta
}

/// Raw Brandes betweenness over an adjacency list. Every ordered
/// source/target pair is counted; callers halve for undirected graphs.
pub(crate) fn brandes(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let per_source = map_sources(n, |s| node_dependencies(adj, s));
    let mut total = vec![0.0; n];
    for delta in per_source {
        for (t, d) in total.iter_mut().zip(delta) {
            *t += d;
        }
    }
    total
}

pub fn betweenness(net: &FriendshipNetwork, mode: Mode) -> CentralityScores {
    let (ids, raw) = match mode {
        Mode::Directed => (net.node_ids(), brandes(&net.out_adjacency())),
        Mode::Undirected => {
            let view = symmetrize(net, SymmetrizeRule::Union);
            let raw = brandes(&view.adjacency()).into_iter().map(|b| b / 2.0).collect();
            (view.nodes().to_vec(), raw)
        }
    };
    CentralityScores {
        measure: Measure::Betweenness,
        mode,
        scores: ids.into_iter().zip(raw).collect(),
        warnings: Vec::new(),
    }
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Closeness `(n-1) / sum of distances` on the Union view.
pub fn closeness(net: &FriendshipNetwork) -> Result<CentralityScores, CentralityError> {
    let view = symmetrize(net, SymmetrizeRule::Union);
    let components = view.components().len();
    if components > 1 {
        return Err(CentralityError::DisconnectedGraph { components });
    }
    let adj = view.adjacency();
    let n = adj.len();
    let scores = view
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let total: usize = bfs_distances(&adj, i).into_iter().flatten().sum();
            let score = if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            };
            (id, score)
        })
        .collect();
    Ok(CentralityScores {
        measure: Measure::Closeness,
        mode: Mode::Undirected,
        scores,
        warnings: Vec::new(),
    })
}

pub const EIGENVECTOR_TOLERANCE: f64 = 1e-10;
pub const EIGENVECTOR_MAX_ITERATIONS: usize = 1000;

pub const DIRECTED_EIGENVECTOR_WARNING: &str =
    "input has one-way ties; eigenvector centrality was computed on the symmetrized graph and can be misleading for directed networks";

/// Dominant eigenvector of the Union adjacency, scaled so the largest
/// component is 1.
pub fn eigenvector(net: &FriendshipNetwork) -> Result<CentralityScores, CentralityError> {
    if net.edge_count() == 0 {
        return Err(CentralityError::EmptyEdgeSet);
    }
    let view = symmetrize(net, SymmetrizeRule::Union);
    let adj = view.adjacency();
    // Iterating on A + I keeps bipartite graphs from oscillating; the
    // eigenvectors are those of A.
    let mut x = vec![1.0; adj.len()];
    let mut converged = false;
    for _ in 0..EIGENVECTOR_MAX_ITERATIONS {
        let mut next: Vec<f64> = adj
            .iter()
            .enumerate()
            .map(|(i, nbrs)| x[i] + nbrs.iter().map(|&j| x[j]).sum::<f64>())
            .collect();
        let max = next.iter().copied().fold(0.0, f64::max);
        for v in &mut next {
            *v /= max;
        }
        let change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if change < EIGENVECTOR_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CentralityError::NoConvergence {
            iterations: EIGENVECTOR_MAX_ITERATIONS,
        });
    }
    let mut warnings = Vec::new();
    if net.has_unreciprocated_edges() {
        warnings.push(DIRECTED_EIGENVECTOR_WARNING.to_string());
    }
    Ok(CentralityScores {
        measure: Measure::Eigenvector,
        mode: Mode::Undirected,
        scores: view.nodes().iter().copied().zip(x).collect(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCounts {
    pub in_degree: BTreeMap<StudentId, usize>,
    pub out_degree: BTreeMap<StudentId, usize>,
}

impl DegreeCounts {
    pub fn total(&self, id: StudentId) -> usize {
        self.in_degree[&id] + self.out_degree[&id]
    }

    /// Total (in + out) degree as scores.
    pub fn scores(&self) -> CentralityScores {
        CentralityScores {
            measure: Measure::Degree,
            mode: Mode::Directed,
            scores: self
                .in_degree
                .keys()
                .map(|&id| (id, self.total(id) as f64))
                .collect(),
            warnings: Vec::new(),
        }
    }
}

pub fn degree(net: &FriendshipNetwork) -> DegreeCounts {
    let mut in_degree: BTreeMap<_, _> = net.node_ids().into_iter().map(|id| (id, 0)).collect();
    let mut out_degree = in_degree.clone();
    for (s, t) in net.edges() {
        *out_degree.get_mut(&s).unwrap() += 1;
        *in_degree.get_mut(&t).unwrap() += 1;
    }
    DegreeCounts {
        in_degree,
        out_degree,
    }
}

/// Top `k` students by directed betweenness (ties: ascending id).
pub fn rank_representatives(
    net: &FriendshipNetwork,
    k: usize,
) -> Result<Vec<StudentId>, CentralityError> {
    if k == 0 {
        return Err(CentralityError::ZeroK);
    }
    if k > net.node_count() {
        return Err(CentralityError::KTooLarge {
            k,
            nodes: net.node_count(),
        });
    }
    Ok(betweenness(net, Mode::Directed)
        .ranked()
        .into_iter()
        .take(k)
        .map(|(id, _)| id)
        .collect())
}
