//! Group-assignment planning.
//!
//! High and Average clusters are kept intact as groups. Low clusters are
//! broken into dispersal units (reciprocal-tie subgroups, or singletons) and
//! handed out greedily to the High groups, smallest group first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::community::Partition;
use crate::network::{symmetrize, FriendshipNetwork, StudentId, SymmetrizeRule};
use crate::stats::{cluster_performance, PerformanceClass, StatsError, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterventionPolicy {
    pub thresholds: Thresholds,
    pub min_group: usize,
    pub max_group: usize,
    /// Keep reciprocally tied Low students together when dispersing.
    pub keep_low_subgroups: bool,
}

impl Default for InterventionPolicy {
    fn default() -> Self {
        InterventionPolicy {
            thresholds: Thresholds::default(),
            min_group: 1,
            max_group: usize::MAX,
            keep_low_subgroups: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterventionError {
    #[error("no cluster has a mean mark of at least {high_t}; there is no high-performing group to disperse low performers into")]
    NoHighCluster { high_t: f64 },
    #[error("student {0} has no mark")]
    MissingMark(StudentId),
    #[error("student {0} is in the partition but not in the network")]
    UnknownStudent(StudentId),
    #[error("student {0} is not assigned to any cluster")]
    Unassigned(StudentId),
    #[error("invalid policy: {0}")]
    BadPolicy(String),
}

impl From<StatsError> for InterventionError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::MissingMark(id) => InterventionError::MissingMark(id),
            other => InterventionError::BadPolicy(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Preserved,
    Dispersed,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Preserved => "preserved",
            Role::Dispersed => "dispersed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanMember {
    pub id: StudentId,
    pub role: Role,
    /// Cluster the student came from.
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentGroup {
    /// Cluster the group was built around.
    pub anchor: usize,
    pub anchor_class: PerformanceClass,
    pub members: Vec<PlanMember>,
    /// Set when a dispersal unit had to be forced past `max_group`.
    pub overflow: bool,
}

impl AssignmentGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = StudentId> + '_ {
        self.members.iter().map(|m| m.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentPlan {
    pub groups: Vec<AssignmentGroup>,
    pub notes: Vec<String>,
}

impl AssignmentPlan {
    /// `(student, group index, role)` sorted by student id.
    pub fn assignments(&self) -> Vec<(StudentId, usize, Role)> {
        let mut rows: Vec<_> = self
            .groups
            .iter()
            .enumerate()
            .flat_map(|(g, group)| group.members.iter().map(move |m| (m.id, g, m.role)))
            .collect();
        rows.sort_by_key(|r| r.0);
        rows
    }

    pub fn group_of(&self, id: StudentId) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.members.iter().any(|m| m.id == id))
    }
}

/// Students moved together out of one Low cluster.
#[derive(Debug, Clone)]
struct Unit {
    origin: usize,
    members: Vec<StudentId>,
}

fn dispersal_units(
    net: &FriendshipNetwork,
    cluster: usize,
    members: &[StudentId],
    keep_subgroups: bool,
) -> Vec<Unit> {
    if !keep_subgroups {
        return members
            .iter()
            .map(|&m| Unit {
                origin: cluster,
                members: vec![m],
            })
            .collect();
    }
    let keep: BTreeSet<StudentId> = members.iter().copied().collect();
    symmetrize(net, SymmetrizeRule::Intersection)
        .restricted_to(&keep)
        .components()
        .into_iter()
        .map(|members| Unit {
            origin: cluster,
            members,
        })
        .collect()
}

pub fn plan_intervention(
    net: &FriendshipNetwork,
    p: &Partition,
    marks: &BTreeMap<StudentId, f64>,
    policy: &InterventionPolicy,
) -> Result<AssignmentPlan, InterventionError> {
    if policy.min_group == 0 || policy.min_group > policy.max_group {
        return Err(InterventionError::BadPolicy(format!(
            "group size bounds must satisfy 1 <= min ({}) <= max ({})",
            policy.min_group, policy.max_group
        )));
    }
    for &id in p.assignment().keys() {
        if !net.contains(id) {
            return Err(InterventionError::UnknownStudent(id));
        }
    }
    if let Some(id) = net.node_ids().into_iter().find(|&id| p.cluster_of(id).is_none()) {
        return Err(InterventionError::Unassigned(id));
    }

    let performance = cluster_performance(p, marks, policy.thresholds)?;
    if !performance.iter().any(|c| c.class == PerformanceClass::High) {
        return Err(InterventionError::NoHighCluster {
            high_t: policy.thresholds.high,
        });
    }

    let mut groups = Vec::new();
    let mut high_groups = Vec::new();
    let mut units = Vec::new();
    for cluster in &performance {
        match cluster.class {
            PerformanceClass::High | PerformanceClass::Average => {
                if cluster.class == PerformanceClass::High {
                    high_groups.push(groups.len());
                }
                groups.push(AssignmentGroup {
                    anchor: cluster.cluster,
                    anchor_class: cluster.class,
                    members: cluster
                        .members
                        .iter()
                        .map(|&id| PlanMember {
                            id,
                            role: Role::Preserved,
                            origin: cluster.cluster,
                        })
                        .collect(),
                    overflow: false,
                });
            }
            PerformanceClass::Low => units.extend(dispersal_units(
                net,
                cluster.cluster,
                &cluster.members,
                policy.keep_low_subgroups,
            )),
        }
    }

    units.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members[0].cmp(&b.members[0]))
    });

    let mut notes = Vec::new();
    for unit in units {
        let smallest_fitting = high_groups
            .iter()
            .copied()
            .filter(|&g| groups[g].len() + unit.members.len() <= policy.max_group)
            .min_by_key(|&g| (groups[g].len(), g));
        let target = match smallest_fitting {
            Some(g) => g,
            None => {
                let g = high_groups
                    .iter()
                    .copied()
                    .min_by_key(|&g| (groups[g].len(), g))
                    .expect("at least one high group");
                groups[g].overflow = true;
                notes.push(format!(
                    "group {g} exceeds the size limit of {} after receiving {} student(s) from cluster {}",
                    policy.max_group,
                    unit.members.len(),
                    unit.origin
                ));
                g
            }
        };
        groups[target]
            .members
            .extend(unit.members.iter().map(|&id| PlanMember {
                id,
                role: Role::Dispersed,
                origin: unit.origin,
            }));
    }

    for (g, group) in groups.iter().enumerate() {
        if group.len() < policy.min_group {
            notes.push(format!(
                "group {g} has {} member(s), below the minimum of {}",
                group.len(),
                policy.min_group
            ));
        }
    }

    Ok(AssignmentPlan { groups, notes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupProfile {
    pub group: usize,
    pub size: usize,
    pub mean_mark: f64,
    /// Members whose original cluster was High.
    pub from_high: usize,
    pub dispersed: usize,
}

/// Size and mean mark of each planned group, using current marks.
pub fn predicted_group_profile(
    plan: &AssignmentPlan,
    marks: &BTreeMap<StudentId, f64>,
) -> Result<Vec<GroupProfile>, InterventionError> {
    // Origin clusters anchored by a High group; dispersed members come from Low.
    let high_origins: BTreeSet<usize> = plan
        .groups
        .iter()
        .filter(|g| g.anchor_class == PerformanceClass::High)
        .map(|g| g.anchor)
        .collect();
    plan.groups
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let mut total = 0.0;
            for id in group.member_ids() {
                total += marks
                    .get(&id)
                    .copied()
                    .ok_or(InterventionError::MissingMark(id))?;
            }
            Ok(GroupProfile {
                group: g,
                size: group.len(),
                mean_mark: if group.is_empty() { 0.0 } else { total / group.len() as f64 },
                from_high: group
                    .members
                    .iter()
                    .filter(|m| m.role == Role::Preserved && high_origins.contains(&m.origin))
                    .count(),
                dispersed: group.members.iter().filter(|m| m.role == Role::Dispersed).count(),
            })
        })
        .collect()
}

/// Plain-text summary of a plan and its profile.
pub fn render_report(plan: &AssignmentPlan, profile: &[GroupProfile]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Assignment plan: {} group(s)", plan.groups.len());
    for (group, prof) in plan.groups.iter().zip(profile) {
        let _ = writeln!(
            out,
            "\nGroup {} (cluster {}, {}{})",
            prof.group,
            group.anchor,
            group.anchor_class.name(),
            if group.overflow { ", OVERFLOW" } else { "" }
        );
        let _ = writeln!(
            out,
            "  size {}  mean mark {:.2}  from high clusters {}  dispersed {}",
            prof.size, prof.mean_mark, prof.from_high, prof.dispersed
        );
        let preserved: Vec<String> = group
            .members
            .iter()
            .filter(|m| m.role == Role::Preserved)
            .map(|m| m.id.to_string())
            .collect();
        let dispersed: Vec<String> = group
            .members
            .iter()
            .filter(|m| m.role == Role::Dispersed)
            .map(|m| format!("{} (from {})", m.id, m.origin))
            .collect();
        let _ = writeln!(out, "  preserved: {}", preserved.join(", "));
        if !dispersed.is_empty() {
            let _ = writeln!(out, "  dispersed: {}", dispersed.join(", "));
        }
    }
    if !plan.notes.is_empty() {
        let _ = writeln!(out, "\nNotes:");
        for note in &plan.notes {
            let _ = writeln!(out, "  - {note}");
        }
    }
    out
}
