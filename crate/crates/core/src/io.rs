//! Text formats: roster, edge list and adjacency matrix ingestion, and CSV,
//! DOT and GraphML export.
//!
//! Input may use CRLF line endings; output is always UTF-8 with LF endings
//! and comma delimiters. Every parse error carries a 1-based line number.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::centrality::CentralityScores;
use crate::community::{ModularityCurve, Partition};
use crate::intervention::AssignmentPlan;
use crate::network::{is_valid_mark, FriendshipNetwork, Gender, Student, StudentId};
use crate::stats::{ClusterPerformance, DistributionSummary};

const MARK_PREFIX: &str = "mark_";

/// Node fill colours indexed by cluster id (wrapping past the end).
pub const CLUSTER_PALETTE: [&str; 15] = [
    "green", "pink", "red", "palegreen", "brown", "grey", "black", "yellow", "cyan", "blue",
    "orange", "purple", "magenta", "navy", "olive",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("line {line}: bad header: {message}")]
    BadHeader { line: u64, message: String },
    #[error("line {line}: duplicate student id {id}")]
    DuplicateId { line: u64, id: StudentId },
    #[error("line {line}: mark `{value}` is not a number in [0, 100]")]
    InvalidMark { line: u64, value: String },
    #[error("line {line}: gender `{value}` is not one of M, F, U")]
    InvalidGender { line: u64, value: String },
    #[error("line {line}: `{value}` is not a valid student id")]
    InvalidId { line: u64, value: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: matrix is not square ({detail})")]
    NonSquareMatrix { line: u64, detail: String },
    #[error("line {line}, column {column}: entry `{value}` is not 0 or 1")]
    NonBinaryEntry {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("line {line}, column {column}: diagonal entry must be 0")]
    SelfLoopEntry { line: u64, column: usize },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("partition assigns student {0}, who is not in the network")]
    UnknownNodeInPartition(StudentId),
    #[error("student {0} has no cluster in the supplied partition")]
    MissingNodeInPartition(StudentId),
    #[error("student {0} has no mark in the supplied marks")]
    MissingMark(StudentId),
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

/// Records paired with their 1-based line numbers. Blank lines are skipped.
fn records(bytes: &[u8]) -> Result<Vec<(u64, csv::StringRecord)>, IoError> {
    let mut out = Vec::new();
    for result in reader(bytes).records() {
        let record = result.map_err(|e| IoError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, record));
    }
    Ok(out)
}

fn parse_id(line: u64, value: &str) -> Result<StudentId, IoError> {
    value.parse::<u32>().map(StudentId).map_err(|_| IoError::InvalidId {
        line,
        value: value.to_string(),
    })
}

fn expect_fields(line: u64, record: &csv::StringRecord, expected: usize) -> Result<(), IoError> {
    if record.len() != expected {
        return Err(IoError::FieldCount {
            line,
            expected,
            found: record.len(),
        });
    }
    Ok(())
}

/// Parses `id,gender,mark_<semester>...`; an empty mark cell means absent.
pub fn parse_roster(bytes: &[u8]) -> Result<Vec<Student>, IoError> {
    let rows = records(bytes)?;
    let Some((header_line, header)) = rows.first() else {
        return Err(IoError::BadHeader {
            line: 1,
            message: "file is empty".into(),
        });
    };
    let header_line = *header_line;
    let bad_header = |message: String| IoError::BadHeader {
        line: header_line,
        message,
    };
    if header.len() < 2 || &header[0] != "id" || &header[1] != "gender" {
        return Err(bad_header("expected `id,gender[,mark_<semester>...]`".into()));
    }
    let mut semesters = Vec::new();
    for col in header.iter().skip(2) {
        match col.strip_prefix(MARK_PREFIX) {
            Some(label) if !label.is_empty() => {
                if semesters.iter().any(|s| s == label) {
                    return Err(bad_header(format!("column `{col}` repeated")));
                }
                semesters.push(label.to_string());
            }
            _ => return Err(bad_header(format!("column `{col}` is not `mark_<semester>`"))),
        }
    }

    let mut seen = BTreeSet::new();
    let mut students = Vec::with_capacity(rows.len() - 1);
    for (line, record) in &rows[1..] {
        let line = *line;
        expect_fields(line, record, header.len())?;
        let id = parse_id(line, &record[0])?;
        if !seen.insert(id) {
            return Err(IoError::DuplicateId { line, id });
        }
        let gender = Gender::from_code(&record[1]).ok_or_else(|| IoError::InvalidGender {
            line,
            value: record[1].to_string(),
        })?;
        let mut student = Student::new(id, gender);
        for (semester, cell) in semesters.iter().zip(record.iter().skip(2)) {
            if cell.is_empty() {
                continue;
            }
            let mark = cell
                .parse::<f64>()
                .ok()
                .filter(|&m| is_valid_mark(m))
                .ok_or_else(|| IoError::InvalidMark {
                    line,
                    value: cell.to_string(),
                })?;
            student.marks.insert(semester.clone(), mark);
        }
        students.push(student);
    }
    Ok(students)
}

pub fn write_roster<'a>(students: impl IntoIterator<Item = &'a Student>) -> String {
    let mut students: Vec<&Student> = students.into_iter().collect();
    students.sort_by_key(|s| s.id);
    let semesters: BTreeSet<&String> = students.iter().flat_map(|s| s.marks.keys()).collect();
    let mut out = String::from("id,gender");
    for s in &semesters {
        let _ = write!(out, ",{MARK_PREFIX}{s}");
    }
    out.push('\n');
    for student in students {
        let _ = write!(out, "{},{}", student.id, student.gender.code());
        for s in &semesters {
            out.push(',');
            if let Some(m) = student.marks.get(*s) {
                let _ = write!(out, "{m}");
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a `source,target` nomination list.
pub fn parse_edges(bytes: &[u8]) -> Result<Vec<(StudentId, StudentId)>, IoError> {
    let rows = records(bytes)?;
    match rows.first() {
        Some((_, h)) if h.len() == 2 && &h[0] == "source" && &h[1] == "target" => {}
        Some((line, _)) => {
            return Err(IoError::BadHeader {
                line: *line,
                message: "expected `source,target`".into(),
            })
        }
        None => {
            return Err(IoError::BadHeader {
                line: 1,
                message: "file is empty".into(),
            })
        }
    }
    rows[1..]
        .iter()
        .map(|(line, record)| {
            expect_fields(*line, record, 2)?;
            Ok((parse_id(*line, &record[0])?, parse_id(*line, &record[1])?))
        })
        .collect()
}

pub fn write_edges(net: &FriendshipNetwork) -> String {
    let mut out = String::from("source,target\n");
    for (s, t) in net.edges() {
        let _ = writeln!(out, "{s},{t}");
    }
    out
}

/// Parses a square 0/1 matrix whose first row and first column hold ids.
/// Entry (row r, column c) = 1 yields the nomination (r, c).
pub fn parse_adjacency(bytes: &[u8]) -> Result<Vec<(StudentId, StudentId)>, IoError> {
    let rows = records(bytes)?;
    let Some((header_line, header)) = rows.first() else {
        return Err(IoError::BadHeader {
            line: 1,
            message: "file is empty".into(),
        });
    };
    let columns = header
        .iter()
        .skip(1)
        .map(|v| parse_id(*header_line, v))
        .collect::<Result<Vec<_>, _>>()?;
    let n = columns.len();
    if columns.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(IoError::BadHeader {
            line: *header_line,
            message: "column ids are not unique".into(),
        });
    }
    let body = &rows[1..];
    if body.len() != n {
        return Err(IoError::NonSquareMatrix {
            line: body.last().map_or(*header_line, |r| r.0),
            detail: format!("{} row(s) for {n} column(s)", body.len()),
        });
    }

    let mut edges = Vec::new();
    for (r, (line, record)) in body.iter().enumerate() {
        let line = *line;
        if record.len() != n + 1 {
            return Err(IoError::NonSquareMatrix {
                line,
                detail: format!("row has {} entries, expected {n}", record.len().saturating_sub(1)),
            });
        }
        let row_id = parse_id(line, &record[0])?;
        if row_id != columns[r] {
            return Err(IoError::BadHeader {
                line,
                message: format!("row id {row_id} does not match column id {}", columns[r]),
            });
        }
        for (c, cell) in record.iter().skip(1).enumerate() {
            let column = c + 2;
            match cell {
                "0" => {}
                "1" if c == r => return Err(IoError::SelfLoopEntry { line, column }),
                "1" => edges.push((row_id, columns[c])),
                other => {
                    return Err(IoError::NonBinaryEntry {
                        line,
                        column,
                        value: other.to_string(),
                    })
                }
            }
        }
    }
    Ok(edges)
}

pub fn write_adjacency(net: &FriendshipNetwork) -> String {
    let ids = net.node_ids();
    let mut out = String::from("id");
    for id in &ids {
        let _ = write!(out, ",{id}");
    }
    out.push('\n');
    for &r in &ids {
        let _ = write!(out, "{r}");
        for &c in &ids {
            out.push_str(if net.has_edge(r, c) { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

pub fn write_scores(scores: &CentralityScores) -> String {
    let mut out = String::from("node,score\n");
    for (id, s) in &scores.scores {
        let _ = writeln!(out, "{id},{s}");
    }
    out
}

pub fn write_partition(p: &Partition) -> String {
    let mut out = String::from("node,cluster\n");
    for (id, c) in p.assignment() {
        let _ = writeln!(out, "{id},{c}");
    }
    out
}

/// Reads a `node,cluster` file; the modularity is left unscored.
pub fn parse_partition(bytes: &[u8]) -> Result<Partition, IoError> {
    let rows = records(bytes)?;
    match rows.first() {
        Some((_, h)) if h.len() == 2 && &h[0] == "node" && &h[1] == "cluster" => {}
        other => {
            return Err(IoError::BadHeader {
                line: other.map_or(1, |r| r.0),
                message: "expected `node,cluster`".into(),
            })
        }
    }
    let mut assignment = BTreeMap::new();
    for (line, record) in &rows[1..] {
        let line = *line;
        expect_fields(line, record, 2)?;
        let id = parse_id(line, &record[0])?;
        let cluster = record[1].parse::<usize>().map_err(|_| IoError::Malformed {
            line,
            message: format!("`{}` is not a cluster index", &record[1]),
        })?;
        if assignment.insert(id, cluster).is_some() {
            return Err(IoError::DuplicateId { line, id });
        }
    }
    let last_line = rows.last().map_or(1, |r| r.0);
    Partition::from_assignment(assignment).map_err(|e| IoError::Malformed {
        line: last_line,
        message: e.to_string(),
    })
}

pub fn write_curve(curve: &ModularityCurve) -> String {
    let mut out = String::from("k,q\n");
    for (k, q) in &curve.points {
        let _ = writeln!(out, "{k},{q}");
    }
    out
}

pub fn write_plan(plan: &AssignmentPlan) -> String {
    let mut out = String::from("student,group,role\n");
    for (id, g, role) in plan.assignments() {
        let _ = writeln!(out, "{id},{g},{}", role.name());
    }
    out
}

pub fn write_cluster_performance(clusters: &[ClusterPerformance]) -> String {
    let mut out = String::from("cluster,size,mean_mark,class\n");
    for c in clusters {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.cluster,
            c.members.len(),
            c.mean_mark,
            c.class.name()
        );
    }
    out
}

pub fn write_histogram(summary: &DistributionSummary) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for bin in &summary.histogram {
        let _ = writeln!(
            out,
            "{},{},{}",
            bin.lower,
            (bin.lower + summary.bin_width).min(100.0),
            bin.count
        );
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per labelled summary.
pub fn write_summaries(summaries: &[(&str, &DistributionSummary)]) -> String {
    let mut out = String::from("cohort,n,mean,median,min,max,std_dev,skewness,shape\n");
    for (label, s) in summaries {
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{},{},{},{}",
            s.n,
            s.mean,
            s.median,
            s.min,
            s.max,
            opt(s.std_dev),
            opt(s.skewness),
            s.shape.map(|sh| sh.name()).unwrap_or("")
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
}

/// Node width for a mark in percent.
pub fn node_width(mark: f64) -> f64 {
    0.2 + 0.8 * (mark / 100.0)
}

pub fn node_shape(gender: Gender) -> &'static str {
    match gender {
        Gender::Male => "circle",
        Gender::Female => "square",
        Gender::Unspecified => "ellipse",
    }
}

pub fn cluster_color(cluster: usize) -> &'static str {
    CLUSTER_PALETTE[cluster % CLUSTER_PALETTE.len()]
}

struct NodeStyle {
    id: StudentId,
    gender: Gender,
    mark: Option<f64>,
    cluster: Option<usize>,
}

fn node_styles(
    net: &FriendshipNetwork,
    partition: Option<&Partition>,
    marks: Option<&BTreeMap<StudentId, f64>>,
) -> Result<Vec<NodeStyle>, IoError> {
    if let Some(p) = partition {
        if let Some(&id) = p.assignment().keys().find(|&&id| !net.contains(id)) {
            return Err(IoError::UnknownNodeInPartition(id));
        }
    }
    net.students()
        .map(|s| {
            let cluster = partition
                .map(|p| p.cluster_of(s.id).ok_or(IoError::MissingNodeInPartition(s.id)))
                .transpose()?;
            let mark = marks
                .map(|m| m.get(&s.id).copied().ok_or(IoError::MissingMark(s.id)))
                .transpose()?;
            Ok(NodeStyle {
                id: s.id,
                gender: s.gender,
                mark,
                cluster,
            })
        })
        .collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the network as a sociogram document: shape by gender, width by
/// mark, fill colour by cluster.
pub fn export_graph(
    net: &FriendshipNetwork,
    partition: Option<&Partition>,
    marks: Option<&BTreeMap<StudentId, f64>>,
    format: GraphFormat,
) -> Result<String, IoError> {
    let nodes = node_styles(net, partition, marks)?;
    Ok(match format {
        GraphFormat::Dot => render_dot(net, &nodes),
        GraphFormat::GraphMl => render_graphml(net, &nodes),
    })
}

fn render_dot(net: &FriendshipNetwork, nodes: &[NodeStyle]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(net.label()));
    let _ = writeln!(out, "  node [style=filled, fillcolor=white, fixedsize=true];");
    for n in nodes {
        let mut attrs = vec![format!("shape={}", node_shape(n.gender))];
        if let Some(m) = n.mark {
            attrs.push(format!("width={:.3}", node_width(m)));
        }
        if let Some(c) = n.cluster {
            attrs.push(format!("fillcolor=\"{}\"", cluster_color(c)));
        }
        let _ = writeln!(out, "  \"{}\" [{}];", n.id, attrs.join(", "));
    }
    for (s, t) in net.edges() {
        let _ = writeln!(out, "  \"{s}\" -> \"{t}\";");
    }
    out.push_str("}\n");
    out
}

fn render_graphml(net: &FriendshipNetwork, nodes: &[NodeStyle]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (key, ty) in [
        ("gender", "string"),
        ("shape", "string"),
        ("mark", "double"),
        ("width", "double"),
        ("cluster", "int"),
        ("color", "string"),
    ] {
        let _ = writeln!(
            out,
            "  <key id=\"{key}\" for=\"node\" attr.name=\"{key}\" attr.type=\"{ty}\"/>"
        );
    }
    let _ = writeln!(
        out,
        "  <graph id=\"{}\" edgedefault=\"directed\">",
        xml_escape(net.label())
    );
    for n in nodes {
        let _ = writeln!(out, "    <node id=\"n{}\">", n.id);
        let _ = writeln!(out, "      <data key=\"gender\">{}</data>", n.gender.code());
        let _ = writeln!(out, "      <data key=\"shape\">{}</data>", node_shape(n.gender));
        if let Some(m) = n.mark {
            let _ = writeln!(out, "      <data key=\"mark\">{m}</data>");
            let _ = writeln!(out, "      <data key=\"width\">{:.3}</data>", node_width(m));
        }
        if let Some(c) = n.cluster {
            let _ = writeln!(out, "      <data key=\"cluster\">{c}</data>");
            let _ = writeln!(out, "      <data key=\"color\">{}</data>", cluster_color(c));
        }
        out.push_str("    </node>\n");
    }
    for (i, (s, t)) in net.edges().enumerate() {
        let _ = writeln!(out, "    <edge id=\"e{i}\" source=\"n{s}\" target=\"n{t}\"/>");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Self-contained cohort document (roster, marks and nominations).
pub fn write_cohort(net: &FriendshipNetwork) -> String {
    let mut s = serde_json::to_string_pretty(net).expect("network serializes");
    s.push('\n');
    s
}

pub fn read_cohort(bytes: &[u8]) -> Result<FriendshipNetwork, serde_json::Error> {
    serde_json::from_slice(bytes)
}
