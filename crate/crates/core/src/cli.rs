//! The `covnet` command line.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 violated precondition,
//! 3 infeasible synthesis target.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dismantling::{
    run_strategy, threshold_cost, CostModel, DismantleError, DismantlingTrace, ResidualStats,
    StrategyKind, StrategySpec,
};
use crate::graph::{GraphError, LabeledGraph};
use crate::metrics::{self, MetricsError, MetricsReport};
use crate::sampling::{snowball_with_stats, SamplingConfig, SamplingError};
use crate::synthesis::{self, AchievedMetric, SynthesisError, SynthesisTarget};

/// Dismantled fractions reported in threshold tables.
pub const THRESHOLDS: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Debug, Parser)]
#[command(
    name = "covnet",
    version,
    about = "Covert-network metrics, dismantling and synthesis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural metrics of a network.
    Metrics(MetricsArgs),
    /// Run one removal strategy and write its trace as CSV.
    Dismantle(DismantleArgs),
    /// Run all strategies and tabulate threshold costs and curves.
    Compare(CompareArgs),
    /// Simulate snowball sampling on a ground-truth network.
    Sample(SampleArgs),
    /// Anneal a network matching a target.
    Synthesize(SynthesizeArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Edge-list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Optional `label,role` CSV.
    #[arg(long)]
    pub roles: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    Hub,
    Gnd,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => StrategyKind::Random,
            StrategyArg::Hub => StrategyKind::Hub,
            StrategyArg::Gnd => StrategyKind::Gnd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostModelArg {
    /// Degree at the moment of removal.
    Residual,
    /// Degree in the untouched network.
    Original,
}

impl From<CostModelArg> for CostModel {
    fn from(c: CostModelArg) -> Self {
        match c {
            CostModelArg::Residual => CostModel::Residual,
            CostModelArg::Original => CostModel::Original,
        }
    }
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DismantleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Stop once the LCC holds at most this fraction of the nodes.
    #[arg(long, default_value_t = 0.2)]
    pub target_lcc: f64,
    /// Seed of the random strategy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "residual")]
    pub cost_model: CostModelArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Random-baseline replicates, seeded `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub target_lcc: f64,
    #[arg(long, value_enum, default_value = "residual")]
    pub cost_model: CostModelArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of seed interviewees.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Contacts named per interview.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub waves: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Keep edges named by only one side.
    #[arg(long)]
    pub no_confirmation: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Target JSON; the bundled trafficking-network target when omitted.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Override the annealing seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Edge list of the synthesized network.
    #[arg(long)]
    pub output: PathBuf,
    /// Roles CSV; next to the edge list as `<stem>.roles.csv` when omitted.
    #[arg(long)]
    pub roles: Option<PathBuf>,
    /// Achieved-versus-target report; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn io(path: &Path, e: io::Error) -> Self {
        CliError {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    fn precondition(message: impl ToString) -> Self {
        CliError {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::precondition(e)
    }
}

impl From<DismantleError> for CliError {
    fn from(e: DismantleError) -> Self {
        let code = match e {
            DismantleError::Io(_) | DismantleError::Csv(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        CliError::precondition(e)
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        let code = match e {
            SynthesisError::Infeasible(_) | SynthesisError::ObjectiveAboveBound { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load(input: &InputArgs) -> Result<LabeledGraph, CliError> {
    let g = LabeledGraph::parse_edge_list(&read(&input.input)?)
        .map_err(|e| CliError::from(e).context(&input.input))?;
    match &input.roles {
        Some(path) => Ok(g
            .load_roles(&read(path)?)
            .map_err(|e| CliError::from(e).context(path))?),
        None => Ok(g),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn percent_key(p: f64) -> String {
    format!("{p}")
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let g = load(&args.input)?;
    let report = metrics::report(&g)?;
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Table => report.to_string(),
        Format::Csv => metrics_csv(&report),
    };
    emit(args.output.as_deref(), &text)
}

fn metrics_csv(r: &MetricsReport) -> String {
    let mut s = String::from("metric,value\n");
    let rows: [(&str, String); 9] = [
        ("node_count", r.node_count.to_string()),
        ("edge_count", r.edge_count.to_string()),
        ("density", r.density.to_string()),
        ("fragmentation", r.fragmentation.to_string()),
        ("diameter_lcc", r.diameter_lcc.to_string()),
        ("average_degree", r.average_degree.to_string()),
        ("average_clustering", r.average_clustering.to_string()),
        ("mean_betweenness", r.mean_betweenness.to_string()),
        ("degree_centralization", r.degree_centralization.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    for (label, score) in &r.eigenvector_centrality {
        let _ = writeln!(s, "eigenvector:{label},{score}");
    }
    s
}

fn strategy_spec(
    kind: StrategyKind,
    target: f64,
    seed: u64,
    cost_model: CostModelArg,
) -> Result<StrategySpec, CliError> {
    let spec = match kind {
        StrategyKind::Gnd => StrategySpec::gnd(target)?,
        StrategyKind::Hub => StrategySpec::hub(target)?,
        StrategyKind::Random => StrategySpec::random(target, seed)?,
    };
    Ok(spec.with_cost_model(cost_model.into()))
}

pub fn cmd_dismantle(args: &DismantleArgs) -> Result<(), CliError> {
    let g = load(&args.input)?;
    let spec = strategy_spec(
        args.strategy.into(),
        args.target_lcc,
        args.seed,
        args.cost_model,
    )?;
    let trace = run_strategy(&g, &spec)?;
    emit(args.output.as_deref(), &trace.to_csv_string()?)?;
    let mut summary = String::new();
    for p in THRESHOLDS {
        if let Ok(cost) = threshold_cost(&trace, p) {
            let _ = writeln!(summary, "threshold cost at {:.0}%: {cost}", 100.0 * p);
        }
    }
    eprint!("{summary}");
    Ok(())
}

/// A point of a dismantling curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lcc_fraction: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyCurves {
    pub strategy: StrategyKind,
    /// Seed of the plotted run, for the random strategy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub removal_order: Vec<String>,
    pub cost_curve: Vec<CurvePoint>,
    pub density_curve: Vec<CurvePoint>,
    pub betweenness_curve: Vec<CurvePoint>,
}

impl StrategyCurves {
    fn of(trace: &DismantlingTrace, initial: &ResidualStats) -> Self {
        let start = trace.lcc_fraction(trace.initial_lcc_size);
        let mut cost_curve = vec![CurvePoint {
            lcc_fraction: start,
            value: 0.0,
        }];
        let mut density_curve = vec![CurvePoint {
            lcc_fraction: start,
            value: initial.density,
        }];
        let mut betweenness_curve = vec![CurvePoint {
            lcc_fraction: start,
            value: initial.mean_betweenness,
        }];
        for s in &trace.steps {
            let x = trace.lcc_fraction(s.lcc_size_after);
            cost_curve.push(CurvePoint {
                lcc_fraction: x,
                value: s.cumulative_cost as f64,
            });
            density_curve.push(CurvePoint {
                lcc_fraction: x,
                value: s.density_after,
            });
            betweenness_curve.push(CurvePoint {
                lcc_fraction: x,
                value: s.mean_betweenness_after,
            });
        }
        StrategyCurves {
            strategy: trace.strategy.kind,
            seed: trace.strategy.rng_seed,
            removal_order: trace.removal_order().map(str::to_string).collect(),
            cost_curve,
            density_curve,
            betweenness_curve,
        }
    }
}

/// Threshold costs of one strategy, keyed by dismantled fraction. The random
/// row holds the mean over all replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub strategy: StrategyKind,
    pub costs: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub target_lcc_fraction: f64,
    pub random_runs: usize,
    pub random_base_seed: u64,
    pub threshold_costs: Vec<ThresholdRow>,
    pub random_mean: BTreeMap<String, Option<f64>>,
    /// Sample standard deviation; 0 for a single run.
    pub random_stddev: BTreeMap<String, Option<f64>>,
    pub strategies: Vec<StrategyCurves>,
}

fn mean_and_stddev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs GND, hub and `runs` random replicates. Replicates run in parallel;
/// results are reduced in seed order so the report never depends on
/// scheduling.
pub fn compare(
    g: &LabeledGraph,
    runs: usize,
    base_seed: u64,
    target_lcc: f64,
    cost_model: CostModelArg,
) -> Result<ComparisonReport, CliError> {
    if runs == 0 {
        return Err(CliError::precondition("--runs must be at least 1"));
    }
    let gnd = run_strategy(
        g,
        &strategy_spec(StrategyKind::Gnd, target_lcc, 0, cost_model)?,
    )?;
    let hub = run_strategy(
        g,
        &strategy_spec(StrategyKind::Hub, target_lcc, 0, cost_model)?,
    )?;
    let random: Vec<DismantlingTrace> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let spec = strategy_spec(
                StrategyKind::Random,
                target_lcc,
                base_seed.wrapping_add(i),
                cost_model,
            )?;
            Ok(run_strategy(g, &spec)?)
        })
        .collect::<Result<_, CliError>>()?;

    let row = |trace: &DismantlingTrace| -> BTreeMap<String, Option<f64>> {
        THRESHOLDS
            .iter()
            .map(|&p| {
                (
                    percent_key(p),
                    threshold_cost(trace, p).ok().map(|c| c as f64),
                )
            })
            .collect()
    };
    let mut random_mean = BTreeMap::new();
    let mut random_stddev = BTreeMap::new();
    for p in THRESHOLDS {
        let costs: Option<Vec<f64>> = random
            .iter()
            .map(|t| threshold_cost(t, p).ok().map(|c| c as f64))
            .collect();
        let stats = costs.map(|c| mean_and_stddev(&c));
        random_mean.insert(percent_key(p), stats.map(|s| s.0));
        random_stddev.insert(percent_key(p), stats.map(|s| s.1));
    }

    let initial = ResidualStats::of(g);
    Ok(ComparisonReport {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        target_lcc_fraction: target_lcc,
        random_runs: runs,
        random_base_seed: base_seed,
        threshold_costs: vec![
            ThresholdRow {
                strategy: StrategyKind::Gnd,
                costs: row(&gnd),
            },
            ThresholdRow {
                strategy: StrategyKind::Hub,
                costs: row(&hub),
            },
            ThresholdRow {
                strategy: StrategyKind::Random,
                costs: random_mean.clone(),
            },
        ],
        random_mean,
        random_stddev,
        strategies: vec![
            StrategyCurves::of(&gnd, &initial),
            StrategyCurves::of(&hub, &initial),
            StrategyCurves::of(&random[0], &initial),
        ],
    })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

fn comparison_table(r: &ComparisonReport) -> String {
    let mut s = format!(
        "{:<10} {:>10} {:>10} {:>10}\n",
        "strategy", "20%", "50%", "80%"
    );
    for row in &r.threshold_costs {
        let c: Vec<String> = THRESHOLDS
            .iter()
            .map(|&p| cell(row.costs[&percent_key(p)]))
            .collect();
        let _ = writeln!(
            s,
            "{:<10} {:>10} {:>10} {:>10}",
            row.strategy.as_str(),
            c[0],
            c[1],
            c[2]
        );
    }
    let sd: Vec<String> = THRESHOLDS
        .iter()
        .map(|&p| cell(r.random_stddev[&percent_key(p)]))
        .collect();
    let _ = writeln!(
        s,
        "{:<10} {:>10} {:>10} {:>10}",
        "random sd", sd[0], sd[1], sd[2]
    );
    let _ = writeln!(
        s,
        "random baseline: {} runs from seed {}",
        r.random_runs, r.random_base_seed
    );
    s
}

/// One row per curve point: strategy, step (0 is the untouched network),
/// removed node, LCC fraction and the three plotted quantities.
fn comparison_csv(r: &ComparisonReport) -> String {
    let mut s = String::from(
        "strategy,step,removed_node,lcc_fraction,cumulative_cost,density,mean_betweenness\n",
    );
    for c in &r.strategies {
        for (i, cost) in c.cost_curve.iter().enumerate() {
            let node = if i == 0 { "" } else { &c.removal_order[i - 1] };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                c.strategy.as_str(),
                i,
                node,
                cost.lcc_fraction,
                cost.value,
                c.density_curve[i].value,
                c.betweenness_curve[i].value
            );
        }
    }
    s
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let g = load(&args.input)?;
    let report = compare(&g, args.runs, args.seed, args.target_lcc, args.cost_model)?;
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Table => comparison_table(&report),
        Format::Csv => comparison_csv(&report),
    };
    emit(args.output.as_deref(), &text)
}

pub fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let g = load(&args.input)?;
    let cfg = SamplingConfig {
        seed_count: args.seeds,
        names_per_interview: args.k,
        waves: args.waves,
        rng_seed: args.rng_seed,
        mutual_confirmation: !args.no_confirmation,
    };
    let sample = snowball_with_stats(&g, &cfg)?;
    emit(args.output.as_deref(), &sample.graph.to_edge_list())?;
    let mut stats = String::from("wave new_nodes total_nodes total_edges\n");
    for w in &sample.waves {
        let _ = writeln!(
            stats,
            "{} {} {} {}",
            w.wave, w.new_nodes, w.total_nodes, w.total_edges
        );
    }
    eprint!("{stats}");
    Ok(())
}

/// Side-by-side report written by `synthesize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub objective: f64,
    pub restart: usize,
    pub hard_constraints_satisfied: bool,
    pub soft_targets: Vec<AchievedMetric>,
    pub metrics: Option<MetricsReport>,
}

pub fn cmd_synthesize(args: &SynthesizeArgs) -> Result<(), CliError> {
    let mut target = match &args.target {
        Some(path) => {
            serde_json::from_str::<SynthesisTarget>(&read(path)?).map_err(|e| CliError {
                code: 1,
                message: format!("{}: {e}", path.display()),
            })?
        }
        None => SynthesisTarget::chiapas(),
    };
    if let Some(seed) = args.seed {
        target.schedule.rng_seed = seed;
    }
    let outcome = synthesis::synthesize_reference(&target)?;
    let g = &outcome.graph;
    let report = SynthesisReport {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        objective: outcome.objective,
        restart: outcome.restart,
        hard_constraints_satisfied: synthesis::satisfies_hard_constraints(g, &target)?,
        soft_targets: synthesis::achieved_metrics(g, &target)?,
        metrics: metrics::report(g).ok(),
    };

    emit(Some(&args.output), &g.to_edge_list())?;
    let roles_path = args.roles.clone().unwrap_or_else(|| {
        let stem = args
            .output
            .file_stem()
            .map_or_else(|| OsString::from("network"), |s| s.to_os_string());
        let mut name = stem;
        name.push(".roles.csv");
        args.output.with_file_name(name)
    });
    emit(Some(&roles_path), &g.roles_csv())?;
    emit(args.report.as_deref(), &to_json(&report))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Metrics(a) => cmd_metrics(a),
        Command::Dismantle(a) => cmd_dismantle(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Synthesize(a) => cmd_synthesize(a),
    }
}

/// Parses `std::env::args` and runs the command.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
