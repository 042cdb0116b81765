//! Seeded synthetic cohorts with planted friendship communities.
//!
//! The bundled demo mirrors the scale of a 100-student class: 96 students in
//! one connected component split into ten communities, plus two isolated
//! reciprocal pairs, for twelve planted communities in total. One community
//! is all male and a few communities are given low mean marks so the
//! intervention planner has something to disperse.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::community::Partition;
use crate::network::{build_network, FriendshipNetwork, Gender, Student, StudentId};

pub const DEMO_SEED: u64 = 2018;
pub const DEMO_SEMESTER: &str = "S5";

#[derive(Debug, Clone)]
pub struct PlantedCommunity {
    pub size: usize,
    pub mean_mark: f64,
    pub all_male: bool,
    /// Whether the community hangs off the main component.
    pub attached: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub label: String,
    pub semester: String,
    pub communities: Vec<PlantedCommunity>,
    /// Probability that a student nominates a given member of their own
    /// community (on top of a guaranteed reciprocal ring).
    pub p_within: f64,
    /// Probability that a nomination is returned.
    pub p_reciprocate: f64,
    /// Number of one-way nominations between attached communities, beyond
    /// the chain that keeps the main component connected.
    pub extra_cross_edges: usize,
    /// Probability that a student outside all-male communities is male.
    pub p_male: f64,
    pub mark_spread: f64,
}

impl SyntheticConfig {
    /// The 100-student, 12-community demo cohort.
    pub fn demo() -> SyntheticConfig {
        let attached = [
            (12, 81.0, false),
            (11, 78.0, false),
            (10, 53.0, false),
            (10, 52.0, true),
            (10, 64.0, false),
            (9, 74.0, false),
            (9, 66.0, false),
            (9, 50.0, false),
            (8, 71.0, false),
            (8, 61.0, false),
        ];
        let mut communities: Vec<PlantedCommunity> = attached
            .iter()
            .map(|&(size, mean_mark, all_male)| PlantedCommunity {
                size,
                mean_mark,
                all_male,
                attached: true,
            })
            .collect();
        for mean_mark in [48.0, 67.0] {
            communities.push(PlantedCommunity {
                size: 2,
                mean_mark,
                all_male: false,
                attached: false,
            });
        }
        SyntheticConfig {
            seed: DEMO_SEED,
            label: "F5".into(),
            semester: DEMO_SEMESTER.into(),
            communities,
            p_within: 0.33,
            p_reciprocate: 0.6,
            extra_cross_edges: 6,
            p_male: 0.16,
            mark_spread: 7.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCohort {
    pub network: FriendshipNetwork,
    pub planted: Partition,
}

pub fn demo_cohort() -> SyntheticCohort {
    generate(&SyntheticConfig::demo())
}

pub fn generate(config: &SyntheticConfig) -> SyntheticCohort {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut roster = Vec::new();
    let mut groups: Vec<Vec<StudentId>> = Vec::new();
    let mut next_id = 1u32;

    for community in &config.communities {
        let mut members = Vec::with_capacity(community.size);
        for _ in 0..community.size {
            let id = StudentId(next_id);
            next_id += 1;
            let gender = if community.all_male || rng.gen_bool(config.p_male) {
                Gender::Male
            } else {
                Gender::Female
            };
            let noise = (rng.gen::<f64>() * 2.0 - 1.0) * config.mark_spread;
            let mark = ((community.mean_mark + noise).clamp(0.0, 100.0) * 10.0).round() / 10.0;
            roster.push(Student::new(id, gender).with_mark(&config.semester, mark));
            members.push(id);
        }
        groups.push(members);
    }

    let mut edges = std::collections::BTreeSet::new();
    let nominate = |edges: &mut std::collections::BTreeSet<_>, rng: &mut ChaCha8Rng, a, b| {
        edges.insert((a, b));
        if rng.gen_bool(config.p_reciprocate) {
            edges.insert((b, a));
        }
    };

    for members in &groups {
        let n = members.len();
        if n < 2 {
            continue;
        }
        // Reciprocal ring keeps each community connected.
        for i in 0..n {
            let (a, b) = (members[i], members[(i + 1) % n]);
            edges.insert((a, b));
            edges.insert((b, a));
        }
        for &a in members {
            for &b in members {
                if a != b && rng.gen_bool(config.p_within) {
                    nominate(&mut edges, &mut rng, a, b);
                }
            }
        }
    }

    let attached: Vec<&Vec<StudentId>> = config
        .communities
        .iter()
        .zip(&groups)
        .filter(|(c, m)| c.attached && !m.is_empty())
        .map(|(_, m)| m)
        .collect();
    for pair in attached.windows(2) {
        let a = *pair[0].choose(&mut rng).unwrap();
        let b = *pair[1].choose(&mut rng).unwrap();
        nominate(&mut edges, &mut rng, a, b);
    }
    if attached.len() > 1 {
        for _ in 0..config.extra_cross_edges {
            let i = rng.gen_range(0..attached.len());
            let mut j = rng.gen_range(0..attached.len() - 1);
            if j >= i {
                j += 1;
            }
            let a = *attached[i].choose(&mut rng).unwrap();
            let b = *attached[j].choose(&mut rng).unwrap();
            edges.insert((a, b));
        }
    }

    let network = build_network(roster, edges, &config.label).expect("generator yields a valid network");
    SyntheticCohort {
        network,
        planted: Partition::from_clusters(groups),
    }
}

/// A random cohort with a partition and one mark per student.
#[derive(Debug, Clone)]
pub struct RandomCohort {
    pub network: FriendshipNetwork,
    pub partition: Partition,
    pub marks: std::collections::BTreeMap<StudentId, f64>,
}

/// Random cohort of `students` students split into `clusters` non-empty
/// clusters. Cluster 0 always averages at least 75 so a plan can be made;
/// other clusters get mean marks anywhere in [35, 95].
pub fn random_cohort(seed: u64, students: usize, clusters: usize) -> RandomCohort {
    assert!(clusters >= 1 && clusters <= students);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (1..=students as u32).collect();
    order.shuffle(&mut rng);
    // First `clusters` students seed one cluster each; the rest land randomly.
    let mut groups: Vec<Vec<StudentId>> = vec![Vec::new(); clusters];
    for (i, &id) in order.iter().enumerate() {
        let c = if i < clusters { i } else { rng.gen_range(0..clusters) };
        groups[c].push(StudentId(id));
    }

    let mut roster = Vec::with_capacity(students);
    let mut marks = std::collections::BTreeMap::new();
    for (c, members) in groups.iter().enumerate() {
        let (lo, hi) = if c == 0 {
            (75.0, 95.0)
        } else {
            let centre = rng.gen_range(35.0..95.0);
            (f64::max(centre - 8.0, 0.0), f64::min(centre + 8.0, 100.0))
        };
        for &id in members {
            let mark = (rng.gen_range(lo..=hi) * 10.0f64).round() / 10.0;
            let gender = if rng.gen_bool(0.3) { Gender::Male } else { Gender::Female };
            roster.push(Student::new(id, gender).with_mark(DEMO_SEMESTER, mark));
            marks.insert(id, mark);
        }
    }

    let mut cluster_of = std::collections::BTreeMap::new();
    for (c, members) in groups.iter().enumerate() {
        for &m in members {
            cluster_of.insert(m, c);
        }
    }
    let mut edges = std::collections::BTreeSet::new();
    let ids: Vec<StudentId> = cluster_of.keys().copied().collect();
    for &a in &ids {
        for &b in &ids {
            if a == b {
                continue;
            }
            let p = if cluster_of[&a] == cluster_of[&b] { 0.35 } else { 0.02 };
            if rng.gen_bool(p) {
                edges.insert((a, b));
            }
        }
    }

    let network = build_network(roster, edges, "random").expect("generator yields a valid network");
    let partition = Partition::from_assignment(cluster_of).expect("every cluster is seeded");
    RandomCohort {
        network,
        partition,
        marks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::weak_components;

    #[test]
    fn demo_shape() {
        let demo = demo_cohort();
        let net = &demo.network;
        assert_eq!(net.node_count(), 100);
        assert_eq!(demo.planted.k(), 12);
        let comps = weak_components(net);
        assert_eq!(comps.len(), 3);
        assert_eq!(comps.iter().map(Vec::len).collect::<Vec<_>>(), vec![96, 2, 2]);
        let males = net.students().filter(|s| s.gender == Gender::Male).count();
        assert!((15..=35).contains(&males), "{males}");
        assert_eq!(net.marks(DEMO_SEMESTER).len(), 100);
    }

    #[test]
    fn deterministic() {
        assert_eq!(demo_cohort().network, demo_cohort().network);
    }
}
