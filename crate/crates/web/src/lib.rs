//! Browser bindings: explore a cohort's communities, try intervention
//! policies and re-bin the grade distribution. Every method returns JSON
//! text so the page can stay plain JavaScript.

use std::collections::BTreeMap;

use cohort_sna::io;
use cohort_sna::prelude::*;
use cohort_sna::synthetic;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Explorer {
    net: FriendshipNetwork,
    view: UndirectedView,
    trace: DivisionTrace,
    curve: ModularityCurve,
    best_k: usize,
    current: Partition,
    semester: Option<String>,
}

#[derive(Serialize)]
struct NodeOut {
    id: StudentId,
    gender: char,
    mark: Option<f64>,
    cluster: Option<usize>,
}

#[derive(Serialize)]
struct EdgeOut {
    source: StudentId,
    target: StudentId,
    mutual: bool,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

impl Explorer {
    fn build(net: FriendshipNetwork) -> Result<Explorer, String> {
        let view = symmetrize(&net, SymmetrizeRule::Union);
        let (best, curve, trace) =
            detect_communities(&view, DEFAULT_K_MAX).map_err(|e| e.to_string())?;
        let semester = net.semesters().into_iter().next();
        Ok(Explorer {
            best_k: best.k(),
            current: best,
            net,
            view,
            trace,
            curve,
            semester,
        })
    }

    fn marks(&self) -> Result<BTreeMap<StudentId, f64>, String> {
        let semester = self.semester.as_deref().ok_or("the roster has no marks")?;
        let marks = self.net.marks(semester);
        match self.net.node_ids().into_iter().find(|id| !marks.contains_key(id)) {
            Some(id) => Err(format!("student {id} has no {semester} mark")),
            None => Ok(marks),
        }
    }
}

#[wasm_bindgen]
impl Explorer {
    /// The bundled synthetic 100-student cohort.
    #[wasm_bindgen(constructor)]
    pub fn new() -> Explorer {
        Explorer::build(synthetic::demo_cohort().network).expect("demo cohort has edges")
    }

    /// A cohort from roster and `source,target` CSV text.
    pub fn from_csv(roster: &str, edges: &str) -> Result<Explorer, String> {
        let students = io::parse_roster(roster.as_bytes()).map_err(|e| format!("roster: {e}"))?;
        let nominations = io::parse_edges(edges.as_bytes()).map_err(|e| format!("edges: {e}"))?;
        let net = build_network(students, nominations, "uploaded").map_err(|e| e.to_string())?;
        Explorer::build(net)
    }

    /// Headline numbers for the loaded cohort.
    pub fn summary(&self) -> String {
        json!({
            "label": self.net.label(),
            "students": self.net.node_count(),
            "nominations": self.net.edge_count(),
            "reciprocity": reciprocity_rate(&self.net).ok(),
            "components": weak_components(&self.net).len(),
            "semester": self.semester,
            "best_k": self.best_k,
        })
        .to_string()
    }

    /// Modularity curve plus the partition with `k` clusters; `k = 0`
    /// selects the best one. The chosen partition is used by `plan`.
    pub fn communities(&mut self, k: usize) -> Result<String, String> {
        let want = if k == 0 { self.best_k } else { k };
        let snapshot = self
            .trace
            .snapshots()
            .find(|p| p.k() == want)
            .cloned()
            .ok_or_else(|| {
                let ks: Vec<String> = self.trace.snapshots().map(|p| p.k().to_string()).collect();
                format!("no division step yields {want} clusters; available: {}", ks.join(", "))
            })?;
        self.current = snapshot;
        Ok(json!({
            "curve": self.curve.points,
            "k": self.current.k(),
            "q": self.current.q,
            "best_k": self.best_k,
            "clusters": self.current.clusters(),
        })
        .to_string())
    }

    /// Assignment plan over the current partition. `max_group = 0` means
    /// no upper bound.
    pub fn plan(&self, high_t: f64, low_t: f64, max_group: usize, keep_low_subgroups: bool) -> Result<String, String> {
        let thresholds = Thresholds::new(high_t, low_t).map_err(|e| e.to_string())?;
        let marks = self.marks()?;
        let policy = InterventionPolicy {
            thresholds,
            max_group: if max_group == 0 { usize::MAX } else { max_group },
            keep_low_subgroups,
            ..Default::default()
        };
        let classes = cluster_performance(&self.current, &marks, thresholds).map_err(|e| e.to_string())?;
        let plan = plan_intervention(&self.net, &self.current, &marks, &policy).map_err(|e| e.to_string())?;
        let profile = predicted_group_profile(&plan, &marks).map_err(|e| e.to_string())?;
        Ok(json!({
            "clusters": classes,
            "plan": plan,
            "profile": profile,
        })
        .to_string())
    }

    /// Grade histogram and summary for the given bin width.
    pub fn histogram(&self, bin_width: f64) -> Result<String, String> {
        let marks: Vec<f64> = self.marks()?.into_values().collect();
        let summary = summarize(&marks, bin_width).map_err(|e| e.to_string())?;
        Ok(to_json(&summary))
    }

    /// Nodes coloured by the current partition and directed edges.
    pub fn graph(&self) -> String {
        let marks = self.semester.as_deref().map(|s| self.net.marks(s)).unwrap_or_default();
        let nodes: Vec<NodeOut> = self
            .net
            .students()
            .map(|s| NodeOut {
                id: s.id,
                gender: s.gender.code(),
                mark: marks.get(&s.id).copied(),
                cluster: self.current.cluster_of(s.id),
            })
            .collect();
        let edges: Vec<EdgeOut> = self
            .net
            .edges()
            .map(|(a, b)| EdgeOut {
                source: a,
                target: b,
                mutual: self.net.has_edge(b, a),
            })
            .collect();
        json!({ "nodes": nodes, "edges": edges, "undirected_ties": self.view.edge_count() }).to_string()
    }
}

impl Default for Explorer {
    fn default() -> Self {
        Explorer::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn demo_summary_and_best_partition() {
        let mut ex = Explorer::new();
        let s = parse(&ex.summary());
        assert_eq!(s["students"], 100);
        assert_eq!(s["components"], 3);
        let c = parse(&ex.communities(0).unwrap());
        assert_eq!(c["k"], s["best_k"]);
        let total: usize = c["clusters"].as_array().unwrap().iter().map(|c| c.as_array().unwrap().len()).sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn choosing_k_changes_plan_input() {
        let mut ex = Explorer::new();
        let c = parse(&ex.communities(6).unwrap());
        assert_eq!(c["k"], 6);
        let p = parse(&ex.plan(70.0, 60.0, 0, true).unwrap());
        assert_eq!(p["clusters"].as_array().unwrap().len(), 6);
        let placed: usize = p["plan"]["groups"]
            .as_array()
            .unwrap()
            .iter()
            .map(|g| g["members"].as_array().unwrap().len())
            .sum();
        assert_eq!(placed, 100);
        assert!(ex.communities(1).is_err());
    }

    #[test]
    fn plan_rejects_bad_thresholds_and_impossible_policy() {
        let mut ex = Explorer::new();
        ex.communities(0).unwrap();
        assert!(ex.plan(60.0, 70.0, 0, true).is_err());
        assert!(ex.plan(99.0, 98.0, 0, true).unwrap_err().to_lowercase().contains("high"));
    }

    #[test]
    fn histogram_rebins() {
        let ex = Explorer::new();
        let five = parse(&ex.histogram(5.0).unwrap());
        let ten = parse(&ex.histogram(10.0).unwrap());
        let count = |v: &Value| v["histogram"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum::<u64>();
        assert_eq!(count(&five), 100);
        assert_eq!(count(&ten), 100);
        assert!(ex.histogram(0.0).is_err());
    }

    #[test]
    fn graph_lists_every_node_and_edge() {
        let ex = Explorer::new();
        let g = parse(&ex.graph());
        assert_eq!(g["nodes"].as_array().unwrap().len(), 100);
        assert_eq!(g["edges"].as_array().unwrap().len(), ex.net.edge_count());
        assert!(g["nodes"][0]["cluster"].is_u64());
    }

    #[test]
    fn from_csv_input() {
        let roster = "id,gender,mark_S1\n1,F,80\n2,M,75\n3,F,78\n4,M,40\n5,F,45\n6,U,50\n";
        let edges = "source,target\n1,2\n2,3\n3,1\n4,5\n5,6\n6,4\n3,4\n";
        let mut ex = Explorer::from_csv(roster, edges).unwrap();
        let c = parse(&ex.communities(0).unwrap());
        assert_eq!(c["k"], 2);
        let p = parse(&ex.plan(70.0, 60.0, 0, false).unwrap());
        assert_eq!(p["plan"]["groups"].as_array().unwrap().len(), 1);
        assert!(Explorer::from_csv("id,gender\n1,F\n1,F\n", edges).is_err());
    }
}
