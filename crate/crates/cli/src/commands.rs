use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use cohort_sna::centrality::{self, CentralityError, CentralityScores, Mode};
use cohort_sna::community::{detect_communities, Partition};
use cohort_sna::intervention::{plan_intervention, predicted_group_profile, render_report, InterventionError};
use cohort_sna::io::{self, GraphFormat};
use cohort_sna::network::{
    build_network_with, pendant_vertices, reciprocity_rate, symmetrize, weak_components, BuildOptions,
    FriendshipNetwork, StudentId,
};
use cohort_sna::stats::{cluster_performance, summarize, DistributionSummary};
use cohort_sna::synthetic;

use crate::config::RunConfig;
use crate::{ExportFormat, MeasureArg, ModeArg};

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const REFUSAL: u8 = 3;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type CmdResult<T = ()> = Result<T, Failure>;

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    fail(DATA)(e.into())
}

fn refuse<E: Into<anyhow::Error>>(e: E) -> Failure {
    fail(REFUSAL)(e.into())
}

fn read(path: &Path) -> CmdResult<Vec<u8>> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(data)
}

fn load_cohort(path: &Path) -> CmdResult<FriendshipNetwork> {
    io::read_cohort(&read(path)?)
        .with_context(|| format!("{}: not a valid cohort file", path.display()))
        .map_err(data)
}

fn write_output(cfg: &RunConfig, name: &str, contents: &str) -> CmdResult {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.out_dir.display()))
        .map_err(data)?;
    let path = cfg.out_dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(data)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn pick_semester(net: &FriendshipNetwork, requested: Option<&str>) -> CmdResult<String> {
    let available = net.semesters();
    match requested {
        Some(s) if available.contains(s) => Ok(s.to_string()),
        Some(s) => Err(data(anyhow!(
            "no marks recorded for semester `{s}` (available: {})",
            available.into_iter().collect::<Vec<_>>().join(", ")
        ))),
        None if available.len() == 1 => Ok(available.into_iter().next().unwrap()),
        None if available.is_empty() => Err(data(anyhow!("cohort has no marks"))),
        None => Err(fail(USAGE)(anyhow!(
            "cohort has marks for several semesters ({}); pass --semester",
            available.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Marks for `semester`; every student must have one.
fn complete_marks(net: &FriendshipNetwork, semester: &str) -> CmdResult<BTreeMap<StudentId, f64>> {
    let marks = net.marks(semester);
    if let Some(id) = net.node_ids().into_iter().find(|id| !marks.contains_key(id)) {
        return Err(data(anyhow!("student {id} has no mark for semester `{semester}`")));
    }
    Ok(marks)
}

fn partition_for(cfg: &RunConfig, net: &FriendshipNetwork, file: Option<&Path>) -> CmdResult<Partition> {
    let view = symmetrize(net, cfg.rule);
    match file {
        Some(path) => {
            let p = io::parse_partition(&read(path)?)
                .with_context(|| path.display().to_string())
                .map_err(data)?;
            if let Some(id) = net.node_ids().into_iter().find(|&id| p.cluster_of(id).is_none()) {
                return Err(data(anyhow!("{}: student {id} has no cluster", path.display())));
            }
            if let Some(&id) = p.assignment().keys().find(|&&id| !net.contains(id)) {
                return Err(data(anyhow!("{}: student {id} is not in the cohort", path.display())));
            }
            if view.edge_count() == 0 {
                Ok(p)
            } else {
                p.scored(&view).map_err(data)
            }
        }
        None => detect_communities(&view, cfg.k_max)
            .map(|(best, _, _)| best)
            .context("community detection failed")
            .map_err(refuse),
    }
}

pub fn ingest(
    roster: &Path,
    edges: Option<&Path>,
    adjacency: Option<&Path>,
    out: &Path,
    label: &str,
    dedupe: bool,
) -> CmdResult {
    let students = io::parse_roster(&read(roster)?)
        .with_context(|| roster.display().to_string())
        .map_err(data)?;
    let nominations = match (edges, adjacency) {
        (Some(p), _) => io::parse_edges(&read(p)?).with_context(|| p.display().to_string()),
        (None, Some(p)) => io::parse_adjacency(&read(p)?).with_context(|| p.display().to_string()),
        (None, None) => return Err(fail(USAGE)(anyhow!("pass --edges or --adjacency"))),
    }
    .map_err(data)?;
    let (net, warnings) = build_network_with(students, nominations, label, BuildOptions { dedupe })
        .context("cannot build network")
        .map_err(data)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))
            .map_err(data)?;
    }
    fs::write(out, io::write_cohort(&net))
        .with_context(|| format!("cannot write {}", out.display()))
        .map_err(data)?;
    println!(
        "{}: {} students, {} nominations, {} weak component(s); wrote {}",
        net.label(),
        net.node_count(),
        net.edge_count(),
        weak_components(&net).len(),
        out.display()
    );
    Ok(())
}

fn print_top(scores: &CentralityScores, top: usize) {
    for (rank, (id, s)) in scores.ranked().into_iter().take(top).enumerate() {
        println!("{:>3}. student {id:<6} {s:.3}", rank + 1);
    }
    for w in &scores.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn analyze(
    cfg: &RunConfig,
    cohort: &Path,
    measure: Option<MeasureArg>,
    mode: ModeArg,
    top: usize,
) -> CmdResult {
    let net = load_cohort(cohort)?;
    let Some(measure) = measure else {
        return communities(cfg, &net);
    };
    let refusal = |e: CentralityError| refuse(anyhow::Error::new(e));
    let scores = match measure {
        MeasureArg::Degree => centrality::degree(&net).scores(),
        MeasureArg::Betweenness => centrality::betweenness(
            &net,
            match mode {
                ModeArg::Directed => Mode::Directed,
                ModeArg::Undirected => Mode::Undirected,
            },
        ),
        MeasureArg::Closeness => centrality::closeness(&net).map_err(refusal)?,
        MeasureArg::Eigenvector => centrality::eigenvector(&net).map_err(refusal)?,
    };
    write_output(
        cfg,
        &format!("centrality_{}.csv", scores.measure.name()),
        &io::write_scores(&scores),
    )?;
    print_top(&scores, top);
    Ok(())
}

fn communities(cfg: &RunConfig, net: &FriendshipNetwork) -> CmdResult {
    let view = symmetrize(net, cfg.rule);
    let (best, curve, _) = detect_communities(&view, cfg.k_max)
        .context("community detection failed")
        .map_err(refuse)?;
    write_output(cfg, "modularity_curve.csv", &io::write_curve(&curve))?;
    write_output(cfg, "partition.csv", &io::write_partition(&best))?;
    let line: Vec<String> = curve.points.iter().map(|(k, q)| format!("Q{k}={q:.3}")).collect();
    println!("{}", line.join(" "));
    println!("best partition: k={} Q={:.3}", best.k(), best.q);
    if let Ok(r) = reciprocity_rate(net) {
        println!("reciprocity: {r:.3}; pendant vertices: {}", pendant_vertices(net).len());
    }
    Ok(())
}

pub fn classify(cfg: &RunConfig, cohort: &Path, semester: Option<&str>, partition: Option<&Path>) -> CmdResult {
    let net = load_cohort(cohort)?;
    let semester = pick_semester(&net, semester)?;
    let marks = complete_marks(&net, &semester)?;
    let p = partition_for(cfg, &net, partition)?;
    let perf = cluster_performance(&p, &marks, cfg.thresholds()).map_err(data)?;
    write_output(cfg, "cluster_performance.csv", &io::write_cluster_performance(&perf))?;
    for c in &perf {
        println!(
            "cluster {:>2}: {:>3} students, mean {:>6.2} -> {}",
            c.cluster,
            c.members.len(),
            c.mean_mark,
            c.class.name()
        );
    }
    Ok(())
}

pub fn plan(cfg: &RunConfig, cohort: &Path, semester: Option<&str>, partition: Option<&Path>) -> CmdResult {
    let net = load_cohort(cohort)?;
    let semester = pick_semester(&net, semester)?;
    let marks = complete_marks(&net, &semester)?;
    let p = partition_for(cfg, &net, partition)?;
    let plan = plan_intervention(&net, &p, &marks, &cfg.policy()).map_err(|e| match e {
        InterventionError::NoHighCluster { .. } => refuse(e),
        other => data(other),
    })?;
    let profile = predicted_group_profile(&plan, &marks).map_err(data)?;
    let mut report = format!(
        "Cohort {} ({} students), marks from {semester}\nThresholds: high >= {}, low < {}; {} cluster(s), Q = {:.3}\n\n",
        net.label(),
        net.node_count(),
        cfg.high_t,
        cfg.low_t,
        p.k(),
        p.q
    );
    report.push_str(&render_report(&plan, &profile));
    write_output(cfg, "plan.csv", &io::write_plan(&plan))?;
    write_output(cfg, "plan_report.txt", &report)?;
    print!("{}", render_report(&plan, &profile));
    Ok(())
}

fn summary_block(name: &str, net: &FriendshipNetwork, s: &DistributionSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Cohort {name} ({})", net.label());
    let _ = writeln!(
        out,
        "  n {}  mean {:.2}  median {:.2}  min {}  max {}",
        s.n, s.mean, s.median, s.min, s.max
    );
    if let Some(sd) = s.std_dev {
        let _ = writeln!(out, "  std dev {sd:.3}");
    }
    match (s.skewness, s.shape) {
        (Some(g), Some(shape)) => {
            let _ = writeln!(out, "  skewness {g:.3} ({})", shape.name());
        }
        _ => {
            let _ = writeln!(out, "  skewness undefined");
        }
    }
    if let Some(peak) = s.modal_bin() {
        let _ = writeln!(out, "  modal bin [{peak}, {})", peak + s.bin_width);
    }
    out
}

pub fn report(cfg: &RunConfig, cohort: &Path, cohort_b: Option<&Path>, semester: Option<&str>) -> CmdResult {
    let mut cohorts = vec![("a", load_cohort(cohort)?)];
    if let Some(b) = cohort_b {
        cohorts.push(("b", load_cohort(b)?));
    }
    let mut summaries = Vec::new();
    for (_, net) in &cohorts {
        let semester = pick_semester(net, semester)?;
        let marks: Vec<f64> = complete_marks(net, &semester)?.into_values().collect();
        summaries.push(summarize(&marks, cfg.bin_width).map_err(data)?);
    }

    let mut text = String::new();
    for ((name, net), s) in cohorts.iter().zip(&summaries) {
        write_output(cfg, &format!("histogram_{name}.csv"), &io::write_histogram(s))?;
        text.push_str(&summary_block(name, net, s));
    }
    let labelled: Vec<(&str, &DistributionSummary)> =
        cohorts.iter().map(|c| c.0).zip(summaries.iter()).collect();
    write_output(cfg, "summary.csv", &io::write_summaries(&labelled))?;
    if let [a, b] = &summaries[..] {
        let _ = writeln!(text, "Mean difference (a - b): {:+.2}", a.mean - b.mean);
    }
    write_output(cfg, "report.txt", &text)?;
    print!("{text}");
    Ok(())
}

pub fn export(
    cfg: &RunConfig,
    cohort: &Path,
    format: ExportFormat,
    semester: Option<&str>,
    communities: bool,
    partition: Option<&Path>,
) -> CmdResult {
    let net = load_cohort(cohort)?;
    let (name, text) = match format {
        ExportFormat::Edges => ("edges.csv", io::write_edges(&net)),
        ExportFormat::Adjacency => ("adjacency.csv", io::write_adjacency(&net)),
        ExportFormat::Roster => ("roster.csv", io::write_roster(net.students())),
        ExportFormat::Dot | ExportFormat::Graphml => {
            let marks = semester
                .map(|s| pick_semester(&net, Some(s)).and_then(|s| complete_marks(&net, &s)))
                .transpose()?;
            let p = if communities || partition.is_some() {
                Some(partition_for(cfg, &net, partition)?)
            } else {
                None
            };
            let (name, fmt) = match format {
                ExportFormat::Dot => ("graph.dot", GraphFormat::Dot),
                _ => ("graph.graphml", GraphFormat::GraphMl),
            };
            let text = io::export_graph(&net, p.as_ref(), marks.as_ref(), fmt).map_err(data)?;
            (name, text)
        }
    };
    write_output(cfg, name, &text)
}

pub fn demo(cfg: &RunConfig) -> CmdResult {
    let demo = synthetic::demo_cohort();
    let net = &demo.network;
    write_output(cfg, "demo_roster.csv", &io::write_roster(net.students()))?;
    write_output(cfg, "demo_edges.csv", &io::write_edges(net))?;
    write_output(cfg, "demo_planted.csv", &io::write_partition(&demo.planted))?;
    write_output(cfg, "demo_cohort.json", &io::write_cohort(net))?;
    println!(
        "demo cohort {}: {} students, {} nominations, {} planted communities",
        net.label(),
        net.node_count(),
        net.edge_count(),
        demo.planted.k()
    );
    Ok(())
}
