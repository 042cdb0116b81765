//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are printed without `--nocapture`.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use cohort_sna::io;
use cohort_sna::prelude::*;
use cohort_sna::synthetic::random_cohort;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles;

type Outcome = Result<String, String>;

fn ids(edges: &[(usize, usize)]) -> Vec<(StudentId, StudentId)> {
    edges
        .iter()
        .map(|&(a, b)| (StudentId(a as u32 + 1), StudentId(b as u32 + 1)))
        .collect()
}

fn directed_net(n: usize, edges: &[(usize, usize)]) -> FriendshipNetwork {
    let roster = (1..=n as u32).map(|i| Student::new(i, Gender::Female)).collect();
    build_network(roster, ids(edges), "T").unwrap()
}

fn random_directed(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cohort-sna"))
}

fn run(args: &[&str], out_dir: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .env_remove("COHORT_SNA_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ac1_betweenness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for g in 0..200 {
        let n = rng.gen_range(1..=7);
        let p = rng.gen_range(0.1..0.7);
        let edges = random_directed(&mut rng, n, p);
        let net = directed_net(n, &edges);

        let expected = oracles::brute_force_betweenness(n, &edges);
        let got = betweenness(&net, Mode::Directed);
        // Undirected mode against the oracle on the symmetric closure, halved.
        let mut both: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(a, b) in &edges {
            both.insert((a, b));
            both.insert((b, a));
        }
        let sym: Vec<_> = both.into_iter().collect();
        let expected_u = oracles::brute_force_betweenness(n, &sym);
        let got_u = betweenness(&net, Mode::Undirected);

        for v in 0..n {
            let id = StudentId(v as u32 + 1);
            let d = (got.get(id).unwrap() - expected[v]).abs();
            let du = (got_u.get(id).unwrap() - expected_u[v] / 2.0).abs();
            worst = worst.max(d).max(du);
            if d > 1e-9 || du > 1e-9 {
                return Err(format!("graph {g} node {id}: directed err {d:e}, undirected err {du:e}"));
            }
        }
    }
    let took = within_time(start, Duration::from_secs(30))?;
    Ok(format!("200 graphs, max error {worst:.1e}, {took:.2?}"))
}

fn ac2_modularity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=8);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.4) {
                    edges.push((a, b));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let c = rng.gen_range(1..=n);
        let label: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let view = UndirectedView::from_edges((1..=n as u32).map(StudentId), ids(&edges));
        let mut groups: BTreeMap<usize, Vec<StudentId>> = BTreeMap::new();
        for (v, &l) in label.iter().enumerate() {
            groups.entry(l).or_default().push(StudentId(v as u32 + 1));
        }
        let partition = Partition::from_clusters(groups.into_values());

        let exact: Ratio<i64> = oracles::rational_modularity(n, &edges, &label);
        let expected = *exact.numer() as f64 / *exact.denom() as f64;
        let got = modularity(&view, &partition).map_err(|e| e.to_string())?;
        let d = (got - expected).abs();
        worst = worst.max(d);
        if d > 1e-12 {
            return Err(format!("graph {done}: Q {got} vs exact {exact} (err {d:e})"));
        }
        done += 1;
    }
    let took = within_time(start, Duration::from_secs(10))?;
    Ok(format!("100 graphs, max error {worst:.1e}, {took:.2?}"))
}

fn two_cliques(s: u32) -> (UndirectedView, Vec<StudentId>, Vec<StudentId>) {
    let left: Vec<StudentId> = (1..=s).map(StudentId).collect();
    let right: Vec<StudentId> = (s + 1..=2 * s).map(StudentId).collect();
    let mut edges = Vec::new();
    for side in [&left, &right] {
        for (i, &a) in side.iter().enumerate() {
            for &b in &side[i + 1..] {
                edges.push((a, b));
            }
        }
    }
    edges.push((StudentId(s), StudentId(s + 1)));
    (UndirectedView::from_edges([], edges), left, right)
}

fn ac3_two_cliques() -> Outcome {
    let mut q5 = None;
    for s in 4..=8 {
        let (view, left, right) = two_cliques(s);
        let (best, _, _) = detect_communities(&view, DEFAULT_K_MAX).map_err(|e| e.to_string())?;
        let mut got = best.clusters();
        got.sort();
        if got != vec![left, right] {
            return Err(format!("s={s}: got clusters {got:?}"));
        }
        if s == 5 {
            q5 = Some(best.q);
        }
    }
    let q = q5.unwrap();
    if (q - 0.45238).abs() > 1e-4 {
        return Err(format!("s=5: Q={q:.6}, expected 0.45238"));
    }
    Ok(format!("s=4..8 split exactly, Q(s=5)={q:.5}"))
}

fn ac4_barbell() -> Outcome {
    let edges = [(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6), (3, 4)];
    let view = UndirectedView::from_edges([], edges.map(|(a, b)| (StudentId(a), StudentId(b))));
    let (best, _, trace) = detect_communities(&view, DEFAULT_K_MAX).map_err(|e| e.to_string())?;
    let first = trace.steps.first().ok_or("empty trace")?.removed;
    if first != (StudentId(3), StudentId(4)) {
        return Err(format!("first removal {first:?}"));
    }
    if best.k() != 2 || (best.q - 0.35714).abs() > 1e-4 {
        return Err(format!("best k={} Q={:.6}", best.k(), best.q));
    }
    Ok(format!("first cut 3-4, best k=2 Q={:.5}", best.q))
}

/// Two connected halves with no tie between them.
fn two_component_net(rng: &mut ChaCha8Rng) -> FriendshipNetwork {
    let a = rng.gen_range(1..=8);
    let b = rng.gen_range(1..=8);
    let n = a + b;
    let mut edges = BTreeSet::new();
    for (lo, hi) in [(0, a), (a, n)] {
        // random spanning tree keeps each half connected
        for v in lo + 1..hi {
            let u = rng.gen_range(lo..v);
            edges.insert(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
        }
        for u in lo..hi {
            for v in lo..hi {
                if u != v && rng.gen_bool(0.2) {
                    edges.insert((u, v));
                }
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    directed_net(n, &edges)
}

fn ac5_disconnected_refusal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cli_runs = 0;
    for i in 0..100 {
        let net = two_component_net(&mut rng);
        match closeness(&net) {
            Err(CentralityError::DisconnectedGraph { components: 2 }) => {}
            other => return Err(format!("cohort {i}: closeness gave {other:?}")),
        }
        if i % 10 == 0 {
            let path = dir.path().join(format!("c{i}.json"));
            std::fs::write(&path, io::write_cohort(&net)).map_err(|e| e.to_string())?;
            let out = run(
                &["analyze", path.to_str().unwrap(), "--measure", "closeness"],
                dir.path(),
            );
            if out.status.code() != Some(3) {
                return Err(format!("cohort {i}: CLI exit {:?}", out.status.code()));
            }
            cli_runs += 1;
        }
    }
    Ok(format!("100 cohorts refused, {cli_runs} CLI runs exited 3"))
}

fn check_plan(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let students = rng.gen_range(20..=120);
    let clusters = rng.gen_range(3..=15);
    let max_group = if rng.gen_bool(0.5) { usize::MAX } else { rng.gen_range(8..=40) };
    let cohort = random_cohort(seed, students, clusters);
    let policy = InterventionPolicy {
        max_group,
        keep_low_subgroups: true,
        ..Default::default()
    };
    let plan = plan_intervention(&cohort.network, &cohort.partition, &cohort.marks, &policy)
        .map_err(|e| format!("seed {seed}: {e}"))?;

    let placed: Vec<StudentId> = plan.groups.iter().flat_map(|g| g.member_ids()).collect();
    let unique: BTreeSet<StudentId> = placed.iter().copied().collect();
    if placed.len() != unique.len() || unique.into_iter().collect::<Vec<_>>() != cohort.network.node_ids() {
        return Err(format!("seed {seed}: plan is not a partition of the cohort"));
    }

    let perf = cluster_performance(&cohort.partition, &cohort.marks, policy.thresholds)
        .map_err(|e| e.to_string())?;
    for c in perf.iter().filter(|c| c.class == PerformanceClass::High) {
        let groups: BTreeSet<_> = c.members.iter().map(|&m| plan.group_of(m)).collect();
        if groups.len() != 1 {
            return Err(format!("seed {seed}: High cluster {} split over {groups:?}", c.cluster));
        }
    }
    for c in perf.iter().filter(|c| c.class == PerformanceClass::Low) {
        for &a in &c.members {
            for &b in &c.members {
                let mutual = cohort.network.has_edge(a, b) && cohort.network.has_edge(b, a);
                if mutual && plan.group_of(a) != plan.group_of(b) {
                    return Err(format!("seed {seed}: reciprocal Low pair {a},{b} separated"));
                }
            }
        }
    }

    let again = plan_intervention(&cohort.network, &cohort.partition, &cohort.marks, &policy)
        .map_err(|e| e.to_string())?;
    if again != plan {
        return Err(format!("seed {seed}: plan differs between runs"));
    }
    Ok(())
}

fn ac6_plan_invariants() -> Outcome {
    let start = Instant::now();
    for seed in 0..1000 {
        check_plan(seed)?;
    }
    let took = within_time(start, Duration::from_secs(60))?;
    Ok(format!("1000 cohorts, {took:.2?}"))
}

fn ac7_skewness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_sym: f64 = 0.0;
    for i in 0..200 {
        let centre = rng.gen_range(20.0..80.0);
        let half = rng.gen_range(1..=20);
        let mut sample = Vec::new();
        for _ in 0..half {
            let d = rng.gen_range(0.1..20.0);
            sample.push(centre + d);
            sample.push(centre - d);
        }
        if rng.gen_bool(0.5) {
            sample.push(centre);
        }
        if sample.len() < 3 {
            sample.push(centre);
        }
        let g = skewness(&sample).map_err(|e| format!("symmetric {i}: {e}"))?;
        worst_sym = worst_sym.max(g.abs());
        if g.abs() >= 1e-12 {
            return Err(format!("symmetric sample {i}: g1={g:e}"));
        }
    }
    for i in 0..200 {
        let n = rng.gen_range(3..60);
        let sample: Vec<f64> = (0..n).map(|_| (rng.gen_range(0.0..=100.0f64) * 10.0).round() / 10.0).collect();
        let Ok(g) = skewness(&sample) else { continue };
        let reflected: Vec<f64> = sample.iter().map(|x| 100.0 - x).collect();
        let h = skewness(&reflected).map_err(|e| e.to_string())?;
        if (g + h).abs() > 1e-9 * g.abs().max(1.0) || (g.abs() > 1e-9 && g.signum() == h.signum()) {
            return Err(format!("reflection {i}: g1={g} reflected={h}"));
        }
    }
    for (i, c) in [0.0, 50.0, 62.5, 73.3, 100.0].into_iter().enumerate() {
        for n in [3, 7, 40] {
            match skewness(&vec![c; n]) {
                Err(StatsError::ZeroVariance) => {}
                other => return Err(format!("constant {i} (n={n}): {other:?}")),
            }
        }
    }
    Ok(format!("symmetric max |g1| {worst_sym:.1e}, reflection flips, constants refused"))
}

fn ac8_demo_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let s = |p: &str| d.join(p).to_str().unwrap().to_owned();
    let start = Instant::now();
    let steps: Vec<Vec<String>> = vec![
        vec!["demo".into()],
        vec!["ingest".into(), "--roster".into(), s("demo_roster.csv"), "--edges".into(), s("demo_edges.csv"), "--out".into(), s("cohort.json")],
        vec!["analyze".into(), s("cohort.json"), "--communities".into()],
        vec!["plan".into(), s("cohort.json"), "--partition".into(), s("partition.csv")],
        vec!["report".into(), s("cohort.json")],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let out = run(&args, d);
        if !out.status.success() {
            return Err(format!("`{}` exited {:?}: {}", step[0], out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
    }
    let took = within_time(start, Duration::from_secs(10))?;
    let partition = std::fs::read(d.join("partition.csv")).map_err(|e| e.to_string())?;
    let k = io::parse_partition(&partition).map_err(|e| e.to_string())?.k();
    if !(10..=14).contains(&k) {
        return Err(format!("best k={k}, expected 12 +/- 2"));
    }
    for f in ["plan.csv", "plan_report.txt", "histogram_a.csv", "report.txt"] {
        if !d.join(f).exists() {
            return Err(format!("{f} not written"));
        }
    }
    Ok(format!("best k={k}, {took:.2?}"))
}

fn ac9_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..100 {
        let students = rng.gen_range(3..=60);
        let clusters = rng.gen_range(1..=students.min(8));
        let net = random_cohort(rng.gen(), students, clusters).network;
        let roster = io::parse_roster(io::write_roster(net.students()).as_bytes())
            .map_err(|e| format!("cohort {i} roster: {e}"))?;
        let edges = io::parse_edges(io::write_edges(&net).as_bytes())
            .map_err(|e| format!("cohort {i} edges: {e}"))?;
        let adj = io::parse_adjacency(io::write_adjacency(&net).as_bytes())
            .map_err(|e| format!("cohort {i} adjacency: {e}"))?;
        let via_edges = build_network(roster.clone(), edges, net.label()).map_err(|e| e.to_string())?;
        let via_adj = build_network(roster, adj, net.label()).map_err(|e| e.to_string())?;
        if via_edges != net {
            return Err(format!("cohort {i}: roster + edge list round trip differs"));
        }
        if via_adj != net {
            return Err(format!("cohort {i}: roster + adjacency round trip differs"));
        }
    }
    Ok("100 cohorts through roster, edge list and adjacency".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("betweenness matches brute force", ac1_betweenness),
        ("modularity matches exact formula", ac2_modularity),
        ("two cliques separated", ac3_two_cliques),
        ("barbell bridge and best k", ac4_barbell),
        ("closeness refuses disconnected cohorts", ac5_disconnected_refusal),
        ("assignment plan invariants", ac6_plan_invariants),
        ("skewness symmetry, reflection, constants", ac7_skewness),
        ("demo pipeline", ac8_demo_pipeline),
        ("file format round trips", ac9_round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
