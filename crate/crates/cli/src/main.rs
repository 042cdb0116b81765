//! `cohort-sna` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 analysis refusal.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohort_sna::network::SymmetrizeRule;

use crate::config::{Overrides, RunConfig};

pub const OUT_DIR_ENV: &str = "COHORT_SNA_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "cohort-sna", version, about = "Friendship-network analysis and group planning for a student cohort")]
struct Cli {
    #[command(flatten)]
    tuning: Tuning,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Tuning {
    /// key=value configuration file (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that receives every output file
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    /// Mean mark at or above which a cluster is high performing
    #[arg(long, global = true)]
    high_t: Option<f64>,
    /// Mean mark below which a cluster is low performing
    #[arg(long, global = true)]
    low_t: Option<f64>,
    /// Largest cluster count considered when picking the best partition
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Histogram bin width in percentage points
    #[arg(long = "bins", global = true)]
    bin_width: Option<f64>,
    #[arg(long, global = true)]
    min_group: Option<usize>,
    #[arg(long, global = true)]
    max_group: Option<usize>,
    /// Keep reciprocally tied low performers together when dispersing
    #[arg(long, global = true)]
    keep_low_subgroups: Option<bool>,
    /// How one-way nominations become undirected ties
    #[arg(long, global = true, value_enum)]
    rule: Option<RuleArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    Union,
    Intersection,
}

impl From<RuleArg> for SymmetrizeRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Union => SymmetrizeRule::Union,
            RuleArg::Intersection => SymmetrizeRule::Intersection,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeasureArg {
    Degree,
    Betweenness,
    Closeness,
    Eigenvector,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Directed,
    Undirected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Graphml,
    Edges,
    Adjacency,
    Roster,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Combine a roster with nominations into a cohort file
    Ingest {
        #[arg(long)]
        roster: PathBuf,
        #[arg(long, conflicts_with = "adjacency", required_unless_present = "adjacency")]
        edges: Option<PathBuf>,
        #[arg(long)]
        adjacency: Option<PathBuf>,
        /// Cohort file to write
        #[arg(long)]
        out: PathBuf,
        /// Snapshot label, e.g. F5
        #[arg(long, default_value = "F5")]
        label: String,
        /// Drop repeated nominations with a warning instead of failing
        #[arg(long)]
        dedupe: bool,
    },
    /// Centrality scores or community detection
    Analyze {
        cohort: PathBuf,
        #[arg(long, required_unless_present = "communities", conflicts_with = "communities", value_enum)]
        measure: Option<MeasureArg>,
        #[arg(long)]
        communities: bool,
        /// Betweenness mode
        #[arg(long, value_enum, default_value = "directed")]
        mode: ModeArg,
        /// Print this many top-ranked students
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Mean mark and performance class per cluster
    Classify {
        cohort: PathBuf,
        #[arg(long)]
        semester: Option<String>,
        /// node,cluster file; computed with Girvan–Newman when omitted
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Build the assignment plan
    Plan {
        cohort: PathBuf,
        #[arg(long)]
        semester: Option<String>,
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Grade distributions, optionally comparing two cohorts
    Report {
        cohort: PathBuf,
        cohort_b: Option<PathBuf>,
        #[arg(long)]
        semester: Option<String>,
    },
    /// Write the network as DOT, GraphML or CSV
    Export {
        cohort: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// Size nodes by this semester's marks
        #[arg(long)]
        semester: Option<String>,
        /// Colour nodes by detected community
        #[arg(long)]
        communities: bool,
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Write the bundled synthetic 100-student cohort
    Demo,
}

impl Tuning {
    fn overrides(&self) -> Overrides {
        Overrides {
            high_t: self.high_t,
            low_t: self.low_t,
            k_max: self.k_max,
            bin_width: self.bin_width,
            min_group: self.min_group,
            max_group: self.max_group,
            keep_low_subgroups: self.keep_low_subgroups,
            rule: self.rule.map(Into::into),
            out_dir: self.out_dir.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let cfg = match RunConfig::resolve(cli.tuning.config.as_deref(), &cli.tuning.overrides()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Ingest {
            roster,
            edges,
            adjacency,
            out,
            label,
            dedupe,
        } => commands::ingest(&roster, edges.as_deref(), adjacency.as_deref(), &out, &label, dedupe),
        Command::Analyze {
            cohort,
            measure,
            communities,
            mode,
            top,
        } => commands::analyze(&cfg, &cohort, if communities { None } else { measure }, mode, top),
        Command::Classify {
            cohort,
            semester,
            partition,
        } => commands::classify(&cfg, &cohort, semester.as_deref(), partition.as_deref()),
        Command::Plan {
            cohort,
            semester,
            partition,
        } => commands::plan(&cfg, &cohort, semester.as_deref(), partition.as_deref()),
        Command::Report {
            cohort,
            cohort_b,
            semester,
        } => commands::report(&cfg, &cohort, cohort_b.as_deref(), semester.as_deref()),
        Command::Export {
            cohort,
            format,
            semester,
            communities,
            partition,
        } => commands::export(&cfg, &cohort, format, semester.as_deref(), communities, partition.as_deref()),
        Command::Demo => commands::demo(&cfg),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
