//! `kgdd`: batch front end over a state directory.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (bad input files,
//! unknown ids, invalid configurations), 3 internal error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kgdedup::learn::{
    analyze, analyze_closed_world, read_ground_truth, simulate_active_learning, validate_strategy, IgnoreList,
    LearnError, Metric, MetricPrefs, MetricsReport, SimulationOptions, StrategyStep, TruthError,
};
use kgdedup::synth::{synth, SynthOptions};
use kgdedup::workspace::{SpecSource, Workspace, WorkspaceError, WorkspaceOptions};
use kgdedup::{DDConfig, RunOptions};
use serde_json::json;

use crate::api::{serve, AppState};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "kgdd", version, about = "Duplicate detection for knowledge graphs")]
struct Cli {
    /// State directory holding graphs, indices, pairs and jobs.
    #[arg(long, global = true, env = "KGDD_STATE", default_value = "kgdd-state")]
    state: PathBuf,
    /// Candidates retrieved per instance during pre-filtering (0 = unlimited).
    #[arg(long, global = true)]
    candidate_limit: Option<usize>,
    /// Comma-separated fields left out of default configurations.
    #[arg(long, global = true, value_delimiter = ',')]
    ignore: Option<Vec<String>>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest an N-Triples file.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Index the instances of a type.
    Index {
        #[arg(long)]
        graph: String,
        #[arg(long = "type")]
        type_iri: String,
        /// `emergent` or the IRI of a node shape.
        #[arg(long, default_value = "emergent")]
        spec: String,
        /// Graph holding the shape, when it is not the indexed graph.
        #[arg(long)]
        shapes_graph: Option<String>,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Create an index pair; the same index twice deduplicates it.
    Pair {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: Option<String>,
    },
    /// Run duplicate detection on a pair.
    Run {
        #[command(flatten)]
        pair: PairSel,
        /// JSON configuration to store before running.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate the latest results of a pair against a ground-truth CSV.
    Eval {
        #[command(flatten)]
        pair: PairSel,
        #[arg(long)]
        truth: PathBuf,
        /// Count only the pairs listed in the truth file instead of treating
        /// unlisted pairs as non-duplicates.
        #[arg(long)]
        labelled_only: bool,
    },
    /// Simulate active learning with the ground truth as labeller.
    Strategy {
        #[command(flatten)]
        pair: PairSel,
        /// JSON array of strategy steps.
        #[arg(long)]
        steps: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        #[arg(long, default_value_t = 20)]
        labels_per_round: usize,
        #[arg(long, default_value = "f1")]
        primary: String,
        #[arg(long, default_value = "precision")]
        secondary: String,
    },
    /// Generate a synthetic event graph and its ground truth.
    Synth {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0.1)]
        dup_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.15)]
        typo_rate: f64,
        #[arg(long, default_value_t = 0.3)]
        case_flip_rate: f64,
        #[arg(long, default_value_t = 0.2)]
        drop_rate: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth_out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

/// A pair id, or an index to deduplicate (a pair is created when none exists).
#[derive(Args, Debug)]
struct PairSel {
    #[arg(long, conflicts_with = "index", required_unless_present = "index")]
    pair: Option<String>,
    #[arg(long)]
    index: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Data(String),
    Internal(String),
}

impl From<WorkspaceError> for CliError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::Store(_) | WorkspaceError::Learn(LearnError::Store(_)) => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        WorkspaceError::from(e).into()
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn read_truth(path: &Path) -> Result<kgdedup::learn::LabelSet, CliError> {
    let text = read_input(path)?;
    read_ground_truth(text.as_bytes()).map_err(|e: TruthError| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_metric(s: &str) -> Result<Metric, CliError> {
    serde_json::from_value(json!(s)).map_err(|_| CliError::Data(format!("unknown metric {s}")))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(CliError::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
        Err(CliError::Internal(msg)) => {
            let _ = writeln!(err, "internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn options(cli: &Cli) -> WorkspaceOptions {
    let mut opts = WorkspaceOptions::default();
    if let Some(limit) = cli.candidate_limit {
        opts.run = RunOptions {
            candidate_limit: (limit > 0).then_some(limit),
        };
    }
    if let Some(ignore) = &cli.ignore {
        opts.ignore = IgnoreList(ignore.iter().filter(|s| !s.is_empty()).cloned().collect());
    }
    opts
}

fn emit(out: &mut dyn Write, json: bool, value: serde_json::Value, text: String) -> Result<(), CliError> {
    let res = if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))
    } else {
        writeln!(out, "{text}")
    };
    res.map_err(|e| CliError::Internal(e.to_string()))
}

fn report_line(r: &MetricsReport) -> String {
    let mut line = format!(
        "precision {:.3}  recall {:.3}  f1 {:.3}  (tp {} fp {} fn {} tn {})",
        r.precision, r.recall, r.f1, r.true_pos, r.false_pos, r.false_neg, r.true_neg
    );
    if r.degenerate {
        line.push_str("  [degenerate]");
    }
    line
}

/// Resolves a pair selection, creating a self-join pair for a bare index.
fn resolve_pair(ws: &mut Workspace, sel: &PairSel) -> Result<String, CliError> {
    if let Some(p) = &sel.pair {
        ws.pair(p)?;
        return Ok(p.clone());
    }
    let index = sel.index.as_deref().expect("clap requires --pair or --index");
    if let Some(p) = ws.pairs().find(|p| p.source_index == index && p.target_index == index) {
        return Ok(p.id.clone());
    }
    Ok(ws.create_pair(index, index)?.id)
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let json = cli.json;
    if let Command::Synth {
        instances,
        dup_rate,
        seed,
        typo_rate,
        case_flip_rate,
        drop_rate,
        out: graph_out,
        truth_out,
    } = &cli.command
    {
        let opts = SynthOptions {
            instances: *instances,
            dup_rate: *dup_rate,
            seed: *seed,
            typo_rate: *typo_rate,
            case_flip_rate: *case_flip_rate,
            drop_rate: *drop_rate,
        };
        let data = synth(&opts);
        write_output(graph_out, &data.ntriples())?;
        write_output(truth_out, &data.truth_csv())?;
        return emit(
            out,
            json,
            json!({ "triples": data.graph.len(), "duplicates": data.truth.len() }),
            format!(
                "wrote {} triples and {} duplicate pairs",
                data.graph.len(),
                data.truth.len()
            ),
        );
    }
    let mut ws = Workspace::open(&cli.state, options(&cli))?;
    match cli.command {
        Command::Ingest { file, name } => {
            let text = read_input(&file)?;
            let name = name.unwrap_or_else(|| {
                file.file_name()
                    .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
            });
            let info = ws
                .add_graph(&name, &text)
                .map_err(|e| CliError::from(e).prefixed(&file))?;
            let mut text = format!("{} {} ({} triples)", info.id, info.name, info.triples);
            for (t, n) in &info.types {
                text.push_str(&format!("\n  {n} {t}"));
            }
            emit(out, json, json!(info), text)
        }
        Command::Index {
            graph,
            type_iri,
            spec,
            shapes_graph,
            depth,
        } => {
            let source = if spec == "emergent" {
                SpecSource::Emergent
            } else {
                SpecSource::Shacl(spec)
            };
            let info = ws.create_index(&graph, &type_iri, source, shapes_graph.as_deref(), depth)?;
            let mut text = format!("{} {} instances of {}", info.id, info.instances, info.type_iri);
            for f in &info.spec.properties {
                text.push_str(&format!(
                    "\n  {} {:?}{}",
                    f.field,
                    f.category,
                    if f.multi_valued { " multi" } else { "" }
                ));
            }
            emit(out, json, json!(info), text)
        }
        Command::Pair { source, target } => {
            let target = target.unwrap_or_else(|| source.clone());
            let info = ws.create_pair(&source, &target)?;
            let text = format!("{} {} x {}", info.id, info.source_index, info.target_index);
            emit(out, json, json!(info), text)
        }
        Command::Run { pair, config } => {
            let id = resolve_pair(&mut ws, &pair)?;
            if let Some(path) = config {
                let cfg: DDConfig = serde_json::from_str(&read_input(&path)?)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                ws.set_config(&id, cfg)?;
            }
            let results = ws.run_now(&id)?.to_vec();
            let accepted: Vec<_> = results.iter().filter(|p| p.accepted).collect();
            let mut text = format!("{id}: {} candidate pairs, {} accepted", results.len(), accepted.len());
            for p in &accepted {
                text.push_str(&format!("\n  {:.4} {} {}", p.similarity, p.source_id, p.target_id));
            }
            emit(out, json, json!({ "pair": id, "results": results }), text)
        }
        Command::Eval {
            pair,
            truth,
            labelled_only,
        } => {
            let id = resolve_pair(&mut ws, &pair)?;
            let truth = read_truth(&truth)?;
            if ws.pair(&id)?.results_version.is_none() {
                ws.run_now(&id)?;
            }
            let results = ws.all_results(&id)?;
            let report = if labelled_only {
                analyze(results, &truth)
            } else {
                analyze_closed_world(results, &truth)
            };
            emit(out, json, json!(report), report_line(&report))
        }
        Command::Strategy {
            pair,
            steps,
            truth,
            rounds,
            labels_per_round,
            primary,
            secondary,
        } => {
            let id = resolve_pair(&mut ws, &pair)?;
            let steps: Vec<StrategyStep> = serde_json::from_str(&read_input(&steps)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", steps.display())))?;
            validate_strategy(&steps)?;
            let truth = read_truth(&truth)?;
            let prefs = MetricPrefs::new(parse_metric(&primary)?, parse_metric(&secondary)?)
                .ok_or_else(|| CliError::Data("primary and secondary metric must differ".into()))?;
            let info = ws.pair(&id)?.clone();
            if info.source_index != info.target_index {
                return Err(CliError::Data(format!("pair {id} is not a self-join")));
            }
            let index = ws.index(&info.source_index)?.1.clone();
            let opts = SimulationOptions {
                rounds,
                labels_per_round,
                steps,
                prefs,
                run: ws.options().run,
                ignore: ws.options().ignore.clone(),
                stop_at_f1: None,
            };
            let reports = simulate_active_learning(&index, &truth, &opts)?;
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!(
                    "round {}  labels {}  evaluations {}  {}\n",
                    r.round,
                    r.labelled,
                    r.evaluations,
                    report_line(&r.truth)
                ));
                if let Some(e) = &r.strategy_error {
                    text.push_str(&format!("  strategy stopped: {e}\n"));
                }
            }
            if let Some(last) = reports.last() {
                ws.set_config(&id, last.config.clone())?;
                ws.run_now(&id)?;
            }
            text.push_str(&format!(
                "total evaluations {}",
                reports.iter().map(|r| r.evaluations).sum::<usize>()
            ));
            emit(out, json, json!({ "pair": id, "rounds": reports }), text)
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            rt.block_on(serve(addr, AppState::new(ws)))
                .map_err(|e| CliError::Internal(format!("{addr}: {e}")))
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

impl CliError {
    fn prefixed(self, path: &Path) -> Self {
        match self {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}
