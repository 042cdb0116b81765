//! Grade-distribution statistics and per-cluster performance classes.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::community::Partition;
use crate::network::{is_valid_mark, StudentId};

pub const DEFAULT_BIN_WIDTH: f64 = 5.0;
pub const DEFAULT_HIGH_THRESHOLD: f64 = 70.0;
pub const DEFAULT_LOW_THRESHOLD: f64 = 60.0;
/// |g1| above this counts as skewed.
pub const SKEW_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("skewness needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("all samples are equal; skewness is undefined")]
    ZeroVariance,
    #[error("mark {0} is outside [0, 100]")]
    InvalidMark(f64),
    #[error("no marks to summarize")]
    EmptyGroup,
    #[error("bin width must be at least 1, got {0}")]
    BadBinWidth(f64),
    #[error("student {0} has no mark")]
    MissingMark(StudentId),
    #[error("low threshold {low} must be below high threshold {high}")]
    BadThresholds { low: f64, high: f64 },
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std_dev(xs: &[f64], mean: f64) -> f64 {
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Adjusted Fisher–Pearson skewness `n/((n-1)(n-2)) * sum(((x - mean)/s)^3)`.
pub fn skewness(xs: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples(n));
    }
    let m = mean(xs);
    let s = sample_std_dev(xs, m);
    // Relative cut: rounding in the mean leaves tiny residuals on constant input.
    if s <= 1e-12 * m.abs().max(1.0) {
        return Err(StatsError::ZeroVariance);
    }
    let sum: f64 = xs.iter().map(|x| ((x - m) / s).powi(3)).sum();
    let n = n as f64;
    Ok(n / ((n - 1.0) * (n - 2.0)) * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    LeftSkewed,
    RightSkewed,
    ApproxSymmetric,
}

impl Shape {
    pub fn from_skewness(g1: f64) -> Shape {
        if g1 > SKEW_THRESHOLD {
            Shape::RightSkewed
        } else if g1 < -SKEW_THRESHOLD {
            Shape::LeftSkewed
        } else {
            Shape::ApproxSymmetric
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::LeftSkewed => "left-skewed",
            Shape::RightSkewed => "right-skewed",
            Shape::ApproxSymmetric => "approximately symmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Absent for a single sample.
    pub std_dev: Option<f64>,
    /// Absent when n < 3 or all marks are equal.
    pub skewness: Option<f64>,
    pub shape: Option<Shape>,
    pub bin_width: f64,
    /// Contiguous bins from the one holding `min` to the one holding `max`.
    pub histogram: Vec<Bin>,
}

impl DistributionSummary {
    /// Lower bound of the fullest bin (first one on ties).
    pub fn modal_bin(&self) -> Option<f64> {
        self.histogram
            .iter()
            .rev()
            .max_by_key(|b| b.count)
            .map(|b| b.lower)
    }
}

/// Bin index for a mark; 100 falls in the top bin rather than opening its own.
fn bin_index(mark: f64, width: f64) -> usize {
    let top = ((100.0 / width).ceil() as usize).max(1) - 1;
    ((mark / width).floor() as usize).min(top)
}

pub fn summarize(marks: &[f64], bin_width: f64) -> Result<DistributionSummary, StatsError> {
    if !(bin_width >= 1.0) {
        return Err(StatsError::BadBinWidth(bin_width));
    }
    if marks.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if let Some(&bad) = marks.iter().find(|&&m| !is_valid_mark(m)) {
        return Err(StatsError::InvalidMark(bad));
    }
    let mut sorted = marks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = mean(&sorted);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std_dev = (n >= 2).then(|| sample_std_dev(&sorted, m));
    let skew = skewness(&sorted).ok();

    let first = bin_index(sorted[0], bin_width);
    let last = bin_index(sorted[n - 1], bin_width);
    let mut counts = vec![0usize; last - first + 1];
    for &x in &sorted {
        counts[bin_index(x, bin_width) - first] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lower: (first + i) as f64 * bin_width,
            count,
        })
        .collect();

    Ok(DistributionSummary {
        n,
        mean: m,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        std_dev,
        skewness: skew,
        shape: skew.map(Shape::from_skewness),
        bin_width,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub high: f64,
    pub low: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            high: DEFAULT_HIGH_THRESHOLD,
            low: DEFAULT_LOW_THRESHOLD,
        }
    }
}

impl Thresholds {
    pub fn new(high: f64, low: f64) -> Result<Thresholds, StatsError> {
        if !(low < high) {
            return Err(StatsError::BadThresholds { low, high });
        }
        Ok(Thresholds { high, low })
    }

    pub fn classify(&self, mean: f64) -> PerformanceClass {
        if mean >= self.high {
            PerformanceClass::High
        } else if mean < self.low {
            PerformanceClass::Low
        } else {
            PerformanceClass::Average
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PerformanceClass {
    High,
    Average,
    Low,
}

impl PerformanceClass {
    pub fn name(self) -> &'static str {
        match self {
            PerformanceClass::High => "high",
            PerformanceClass::Average => "average",
            PerformanceClass::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPerformance {
    pub cluster: usize,
    pub members: Vec<StudentId>,
    pub mean_mark: f64,
    pub class: PerformanceClass,
}

/// Mean mark and class for every cluster, in cluster-id order.
pub fn cluster_performance(
    p: &Partition,
    marks: &BTreeMap<StudentId, f64>,
    thresholds: Thresholds,
) -> Result<Vec<ClusterPerformance>, StatsError> {
    Thresholds::new(thresholds.high, thresholds.low)?;
    p.clusters()
        .into_iter()
        .enumerate()
        .map(|(cluster, members)| {
            let values = members
                .iter()
                .map(|id| marks.get(id).copied().ok_or(StatsError::MissingMark(*id)))
                .collect::<Result<Vec<_>, _>>()?;
            let mean_mark = mean(&values);
            Ok(ClusterPerformance {
                cluster,
                members,
                mean_mark,
                class: thresholds.classify(mean_mark),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub a: DistributionSummary,
    pub b: DistributionSummary,
    /// mean(a) - mean(b)
    pub mean_difference: f64,
}

pub fn compare_groups(a: &[f64], b: &[f64], bin_width: f64) -> Result<GroupComparison, StatsError> {
    let a = summarize(a, bin_width)?;
    let b = summarize(b, bin_width)?;
    let mean_difference = a.mean - b.mean;
    Ok(GroupComparison {
        a,
        b,
        mean_difference,
    })
}
