//! Directed friendship network and its undirected views.
//!
//! A [`FriendshipNetwork`] is a directed simple graph over the students of a
//! cohort. Nodes are addressed by [`StudentId`]; internally every algorithm
//! works on dense indices `0..n` assigned in ascending id order, so results
//! never depend on insertion order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Anonymized student code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StudentId(pub u32);

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for StudentId {
    fn from(v: u32) -> Self {
        StudentId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn code(self) -> char {
        match self {
            Gender::Male => 'M',
            Gender::Female => 'F',
            Gender::Unspecified => 'U',
        }
    }

    pub fn from_code(code: &str) -> Option<Gender> {
        match code {
            "M" | "m" => Some(Gender::Male),
            "F" | "f" => Some(Gender::Female),
            "U" | "u" | "" => Some(Gender::Unspecified),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Student {
    pub id: StudentId,
    pub gender: Gender,
    /// Mark in percent keyed by semester label (e.g. `"S5"`).
    #[serde(default)]
    pub marks: BTreeMap<String, f64>,
}

impl Student {
    pub fn new(id: impl Into<StudentId>, gender: Gender) -> Self {
        Student {
            id: id.into(),
            gender,
            marks: BTreeMap::new(),
        }
    }

    pub fn with_mark(mut self, semester: &str, mark: f64) -> Self {
        self.marks.insert(semester.to_string(), mark);
        self
    }

    pub fn mark(&self, semester: &str) -> Option<f64> {
        self.marks.get(semester).copied()
    }
}

pub fn is_valid_mark(mark: f64) -> bool {
    (0.0..=100.0).contains(&mark)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("student id {0} appears more than once in the roster")]
    DuplicateId(StudentId),
    #[error("nomination ({from}, {to}) references unknown student {unknown}")]
    UnknownId {
        from: StudentId,
        to: StudentId,
        unknown: StudentId,
    },
    #[error("self-nomination by student {0}")]
    SelfLoop(StudentId),
    #[error("duplicate nomination ({0}, {1})")]
    DuplicateEdge(StudentId, StudentId),
    #[error("student {id} has mark {mark} for {semester}, outside [0, 100]")]
    InvalidMark {
        id: StudentId,
        semester: String,
        mark: f64,
    },
    #[error("network has no edges")]
    EmptyEdgeSet,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Drop repeated nominations with a warning instead of failing.
    pub dedupe: bool,
}

/// Directed simple graph over a cohort of students.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct FriendshipNetwork {
    label: String,
    students: BTreeMap<StudentId, Student>,
    edges: BTreeSet<(StudentId, StudentId)>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    label: String,
    students: Vec<Student>,
    edges: Vec<(StudentId, StudentId)>,
}

impl TryFrom<RawNetwork> for FriendshipNetwork {
    type Error = NetworkError;

    fn try_from(raw: RawNetwork) -> Result<Self, Self::Error> {
        build_network(raw.students, raw.edges, &raw.label)
    }
}

impl From<FriendshipNetwork> for RawNetwork {
    fn from(net: FriendshipNetwork) -> Self {
        RawNetwork {
            label: net.label,
            students: net.students.into_values().collect(),
            edges: net.edges.into_iter().collect(),
        }
    }
}

/// Builds a network, rejecting any repeated nomination.
pub fn build_network(
    roster: Vec<Student>,
    nominations: impl IntoIterator<Item = (StudentId, StudentId)>,
    label: &str,
) -> Result<FriendshipNetwork, NetworkError> {
    build_network_with(roster, nominations, label, BuildOptions::default()).map(|(net, _)| net)
}

/// Builds a network; returns the network together with any warnings
/// produced by lenient options.
pub fn build_network_with(
    roster: Vec<Student>,
    nominations: impl IntoIterator<Item = (StudentId, StudentId)>,
    label: &str,
    options: BuildOptions,
) -> Result<(FriendshipNetwork, Vec<String>), NetworkError> {
    let mut students = BTreeMap::new();
    for student in roster {
        for (semester, &mark) in &student.marks {
            if !is_valid_mark(mark) {
                return Err(NetworkError::InvalidMark {
                    id: student.id,
                    semester: semester.clone(),
                    mark,
                });
            }
        }
        let id = student.id;
        if students.insert(id, student).is_some() {
            return Err(NetworkError::DuplicateId(id));
        }
    }

    let mut warnings = Vec::new();
    let mut edges = BTreeSet::new();
    for (source, target) in nominations {
        for end in [source, target] {
            if !students.contains_key(&end) {
                return Err(NetworkError::UnknownId {
                    from: source,
                    to: target,
                    unknown: end,
                });
            }
        }
        if source == target {
            return Err(NetworkError::SelfLoop(source));
        }
        if !edges.insert((source, target)) {
            if options.dedupe {
                warnings.push(format!("dropped duplicate nomination ({source}, {target})"));
            } else {
                return Err(NetworkError::DuplicateEdge(source, target));
            }
        }
    }

    Ok((
        FriendshipNetwork {
            label: label.to_string(),
            students,
            edges,
        },
        warnings,
    ))
}

impl FriendshipNetwork {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same graph under a different snapshot name.
    pub fn relabeled(&self, label: &str) -> FriendshipNetwork {
        FriendshipNetwork {
            label: label.to_string(),
            ..self.clone()
        }
    }

    pub fn node_count(&self) -> usize {
        self.students.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node ids in ascending order; position in this list is the dense index.
    pub fn node_ids(&self) -> Vec<StudentId> {
        self.students.keys().copied().collect()
    }

    pub fn students(&self) -> impl Iterator<Item = &Student> {
        self.students.values()
    }

    pub fn student(&self, id: StudentId) -> Option<&Student> {
        self.students.get(&id)
    }

    pub fn contains(&self, id: StudentId) -> bool {
        self.students.contains_key(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (StudentId, StudentId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, source: StudentId, target: StudentId) -> bool {
        self.edges.contains(&(source, target))
    }

    /// Semester labels for which at least one student has a mark.
    pub fn semesters(&self) -> BTreeSet<String> {
        self.students
            .values()
            .flat_map(|s| s.marks.keys().cloned())
            .collect()
    }

    /// Marks for one semester; students without a mark are omitted.
    pub fn marks(&self, semester: &str) -> BTreeMap<StudentId, f64> {
        self.students
            .values()
            .filter_map(|s| s.mark(semester).map(|m| (s.id, m)))
            .collect()
    }

    pub(crate) fn index_map(&self) -> BTreeMap<StudentId, usize> {
        self.students
            .keys()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect()
    }

    /// Out-neighbour lists over dense indices, each sorted ascending.
    pub(crate) fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let index = self.index_map();
        let mut adj = vec![Vec::new(); self.students.len()];
        for &(s, t) in &self.edges {
            adj[index[&s]].push(index[&t]);
        }
        adj
    }

    /// True when some nomination is not returned.
    pub fn has_unreciprocated_edges(&self) -> bool {
        self.edges.iter().any(|&(s, t)| !self.edges.contains(&(t, s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetrizeRule {
    /// `{u,v}` when either direction was nominated.
    Union,
    /// `{u,v}` only for reciprocal ties.
    Intersection,
}

impl std::str::FromStr for SymmetrizeRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "union" => Ok(SymmetrizeRule::Union),
            "intersection" | "reciprocal" => Ok(SymmetrizeRule::Intersection),
            other => Err(format!("unknown symmetrization rule `{other}`")),
        }
    }
}

/// Undirected simple graph derived from a [`FriendshipNetwork`].
///
/// Edges are stored as `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedView {
    nodes: Vec<StudentId>,
    edges: BTreeSet<(StudentId, StudentId)>,
    rule: SymmetrizeRule,
}

fn ordered(a: StudentId, b: StudentId) -> (StudentId, StudentId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl UndirectedView {
    /// Builds a view directly from undirected edges. Self-loops are ignored
    /// and endpoints missing from `nodes` are added.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = StudentId>,
        edges: impl IntoIterator<Item = (StudentId, StudentId)>,
    ) -> UndirectedView {
        let mut node_set: BTreeSet<StudentId> = nodes.into_iter().collect();
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            node_set.insert(a);
            node_set.insert(b);
            if a != b {
                edge_set.insert(ordered(a, b));
            }
        }
        UndirectedView {
            nodes: node_set.into_iter().collect(),
            edges: edge_set,
            rule: SymmetrizeRule::Union,
        }
    }

    pub fn rule(&self) -> SymmetrizeRule {
        self.rule
    }

    pub fn nodes(&self) -> &[StudentId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (StudentId, StudentId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: StudentId, b: StudentId) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    pub fn degree(&self, id: StudentId) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == id || b == id)
            .count()
    }

    pub fn index_of(&self, id: StudentId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    /// Neighbour lists over dense indices (position in [`Self::nodes`]),
    /// each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            let (i, j) = (self.index_of(a).unwrap(), self.index_of(b).unwrap());
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Induced subgraph on `keep`.
    pub fn restricted_to(&self, keep: &BTreeSet<StudentId>) -> UndirectedView {
        UndirectedView {
            nodes: self.nodes.iter().copied().filter(|n| keep.contains(n)).collect(),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .collect(),
            rule: self.rule,
        }
    }

    pub(crate) fn without_edge(&mut self, edge: (StudentId, StudentId)) -> bool {
        self.edges.remove(&ordered(edge.0, edge.1))
    }

    /// Connected components, ordered by decreasing size then smallest member.
    pub fn components(&self) -> Vec<Vec<StudentId>> {
        let adj = self.adjacency();
        let mut comps: Vec<Vec<StudentId>> = component_indices(&adj)
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.nodes[i]).collect())
            .collect();
        sort_components(&mut comps);
        comps
    }
}

pub(crate) fn component_indices(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn sort_components(comps: &mut [Vec<StudentId>]) {
    for c in comps.iter_mut() {
        c.sort_unstable();
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
}

pub fn symmetrize(net: &FriendshipNetwork, rule: SymmetrizeRule) -> UndirectedView {
    let edges = net
        .edges
        .iter()
        .filter(|&&(s, t)| match rule {
            SymmetrizeRule::Union => true,
            SymmetrizeRule::Intersection => net.edges.contains(&(t, s)),
        })
        .map(|&(s, t)| ordered(s, t))
        .collect();
    UndirectedView {
        nodes: net.node_ids(),
        edges,
        rule,
    }
}

/// Weakly connected components, largest first, ties by smallest member id.
pub fn weak_components(net: &FriendshipNetwork) -> Vec<Vec<StudentId>> {
    symmetrize(net, SymmetrizeRule::Union).components()
}

/// Nodes with exactly one neighbour once direction is ignored.
pub fn pendant_vertices(net: &FriendshipNetwork) -> BTreeSet<StudentId> {
    let view = symmetrize(net, SymmetrizeRule::Union);
    let adj = view.adjacency();
    adj.iter()
        .enumerate()
        .filter(|(_, nbrs)| nbrs.len() == 1)
        .map(|(i, _)| view.nodes[i])
        .collect()
}

/// Fraction of nominations whose reverse nomination also exists.
pub fn reciprocity_rate(net: &FriendshipNetwork) -> Result<f64, NetworkError> {
    if net.edges.is_empty() {
        return Err(NetworkError::EmptyEdgeSet);
    }
    let mutual = net
        .edges
        .iter()
        .filter(|&&(s, t)| net.edges.contains(&(t, s)))
        .count();
    Ok(mutual as f64 / net.edges.len() as f64)
}
