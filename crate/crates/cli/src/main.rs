//! `steinerbead`: bead counts, heuristics, oracles and constructions from the
//! command line.
//!
//! Exit codes: 0 success, 1 malformed input or bad usage, 2 capacity error,
//! 3 bound violation, 4 a construction or search that did not succeed.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use steinerbead::constructions::{canonicalize_zpacked, critical_smt3_with, tight_instance, CRITICAL_MAX_TRIALS};
use steinerbead::experiment::{parse_config, run_experiment, write_outputs};
use steinerbead::io::{seed_override, Instance, InstanceFile, NormSpec, TreeFile, SCHEMA_VERSION};
use steinerbead::oracle::{
    bound_report_from, mspt_search, mst_heuristic, smt_heuristic, BoundReport, OracleStatus, SearchTrace,
    DEFAULT_BUDGET, DEFAULT_SEED,
};
use steinerbead::render::render_svg;
use steinerbead::smt::{smt, SmtOptions};
use steinerbead::topology::{caterpillar_topology, FullTopology};
use steinerbead::{EmbeddedTree, Error, Point};

const EXIT_INPUT: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "steinerbead", version, about = "Minimum Steiner point trees in normed planes")]
struct Cli {
    /// Seed for randomized searches; beats STEINERBEAD_SEED and the file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steiner minimal tree of an instance.
    Smt {
        instance: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Beaded SMT or MST.
    Heuristic {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "smt")]
        kind: Kind,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Fewest beads found by the oracle.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// SMT heuristic against the oracle, with every applicable bound.
    Bounds {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Instance whose SMT wastes exactly 2n - 4 beads.
    MakeTight {
        #[arg(long = "n")]
        n: Option<usize>,
        /// Tree file whose topology is used; positions are ignored.
        #[arg(long)]
        topology: Option<PathBuf>,
        /// JSON-lines file for the displacement steps.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Three-terminal instance in a polygon norm whose SMT wastes two beads.
    MakeCritical {
        /// Norm literal file.
        #[arg(long)]
        norm: PathBuf,
        /// Fractional parts of the three SMT edges.
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.25, 0.3, 0.2])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = CRITICAL_MAX_TRIALS)]
        trials: usize,
    },
    /// Moves the Steiner beads of a Euclidean MSPT onto integer circles.
    Canonicalize {
        tree: PathBuf,
        /// JSON-lines file for the displacement steps.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Batch run writing rows.csv and summary.json.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker cap; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// SVG drawing of a tree file.
    Render { tree: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Smt,
    Mst,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn at(path: &Path, e: Error) -> Self {
        let code = match &e {
            Error::Capacity(_) => EXIT_CAPACITY,
            Error::Construction(_) | Error::SearchFailed { .. } | Error::BondEncountered { .. } => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        let message = match &e {
            Error::Json(j) if j.line() > 0 => format!("{}:{}:{}: {j}", path.display(), j.line(), j.column()),
            _ => format!("{}: {e}", path.display()),
        };
        Failure { code, message }
    }

    fn plain(e: Error) -> Self {
        Failure::at(Path::new("-"), e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::at(path, e.into()))
}

fn load_instance(path: &Path, seed: Option<u64>) -> CliResult<Instance> {
    let text = read(path)?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| Failure::at(path, e.into()))?;
    let mut inst = Instance::from_file(file).and_then(Instance::with_env_seed).map_err(|e| Failure::at(path, e))?;
    if let Some(s) = seed {
        inst.seed = s;
    }
    Ok(inst)
}

fn load_tree(path: &Path) -> CliResult<EmbeddedTree> {
    let text = read(path)?;
    let file: TreeFile = serde_json::from_str(&text).map_err(|e| Failure::at(path, e.into()))?;
    file.to_tree().map_err(|e| Failure::at(path, e))
}

fn emit(output: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::at(p, e.into())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::plain(e.into()))
        }
    }
}

fn emit_json<S: Serialize>(output: &Option<PathBuf>, value: &S) -> CliResult<()> {
    emit(output, &(serde_json::to_string_pretty(value).expect("reports serialize") + "\n"))
}

fn write_svg(svg: &Option<PathBuf>, tree: &EmbeddedTree) -> CliResult<()> {
    if let Some(p) = svg {
        fs::write(p, render_svg(tree)).map_err(|e| Failure::at(p, e.into()))?;
    }
    Ok(())
}

fn write_lines<S: Serialize>(path: &Path, items: &[S]) -> CliResult<()> {
    let mut text = String::new();
    for item in items {
        text += &serde_json::to_string(item).expect("trace steps serialize");
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Failure::at(path, e.into()))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SmtReport {
    label: String,
    length: f64,
    topology_rank: usize,
    runner_up_gap: Option<f64>,
    degenerate_edges: Vec<(String, String)>,
    warnings: Vec<String>,
    bead_count: i64,
    tree: TreeFile,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HeuristicReport {
    label: String,
    heuristic: &'static str,
    bead_count: i64,
    integer_edges: usize,
    full_components: usize,
    tree: TreeFile,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleReport {
    label: String,
    best_beads: i64,
    status: OracleStatus,
    search_trace: SearchTrace,
    tree: TreeFile,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BoundsOutput {
    instance: InstanceFile,
    seed: u64,
    budget: u64,
    report: BoundReport,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TightOutput {
    instance: InstanceFile,
    expected_gap: i64,
    smt_beads: i64,
    displaced_beads: i64,
    smt_verified: bool,
    smt_tree: TreeFile,
    displaced_tree: TreeFile,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CriticalOutput {
    instance: InstanceFile,
    epsilons: [f64; 3],
    gap: i64,
    smt_beads: i64,
    optimal_beads: i64,
    witness_direction: Point,
    witness_pair: (usize, usize),
    jitter: f64,
    trials: usize,
    smt_tree: TreeFile,
    optimal_tree: TreeFile,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CanonicalOutput {
    bead_count: i64,
    integer_edges: Vec<(String, String)>,
    non_integer_edge: Option<(String, String)>,
    tree: TreeFile,
}

fn euclidean_instance(label: &str, seed: u64, terminals: &[Point]) -> InstanceFile {
    InstanceFile {
        schema_version: SCHEMA_VERSION,
        label: label.into(),
        seed,
        edge_bound: 1.0,
        norm: NormSpec::Euclidean,
        terminals: terminals.iter().map(|&p| p.into()).collect(),
    }
}

fn effective_seed(flag: Option<u64>) -> CliResult<u64> {
    match flag {
        Some(s) => Ok(s),
        None => Ok(seed_override().map_err(Failure::plain)?.unwrap_or(DEFAULT_SEED)),
    }
}

/// A false bound flag means a refuted bound or a bug; either way it must not
/// look like success.
fn report_exit_code(report: &BoundReport) -> u8 {
    if report.has_violation() {
        EXIT_VIOLATION
    } else {
        0
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    let out = &cli.output;
    match cli.command {
        Command::Smt { instance, svg } => {
            let inst = load_instance(&instance, cli.seed)?;
            let r = smt(&inst.norm, &inst.terminals, &SmtOptions::default()).map_err(|e| Failure::at(&instance, e))?;
            write_svg(&svg, &r.tree)?;
            emit_json(
                out,
                &SmtReport {
                    label: inst.label,
                    length: r.length,
                    topology_rank: r.topology_rank,
                    runner_up_gap: r.runner_up_gap,
                    degenerate_edges: r.degenerate_edges.clone(),
                    warnings: r.warnings.clone(),
                    bead_count: r.tree.bead_count().bead_count,
                    tree: TreeFile::from_tree(&r.tree),
                },
            )?;
        }
        Command::Heuristic { instance, kind, svg } => {
            let inst = load_instance(&instance, cli.seed)?;
            let h = match kind {
                Kind::Smt => smt_heuristic(&inst.terminals, &inst.norm),
                Kind::Mst => mst_heuristic(&inst.terminals, &inst.norm),
            }
            .map_err(|e| Failure::at(&instance, e))?;
            write_svg(&svg, &h.tree)?;
            emit_json(
                out,
                &HeuristicReport {
                    label: inst.label,
                    heuristic: match kind {
                        Kind::Smt => "smt",
                        Kind::Mst => "mst",
                    },
                    bead_count: h.report.bead_count,
                    integer_edges: h.report.integer_edge_count,
                    full_components: h.report.full_component_count,
                    tree: TreeFile::from_tree(&h.tree),
                },
            )?;
        }
        Command::Oracle { instance, budget, svg } => {
            let inst = load_instance(&instance, cli.seed)?;
            let o = mspt_search(&inst.terminals, &inst.norm, budget, inst.seed).map_err(|e| Failure::at(&instance, e))?;
            write_svg(&svg, &o.best_tree)?;
            emit_json(
                out,
                &OracleReport {
                    label: inst.label,
                    best_beads: o.best_beads,
                    status: o.status,
                    search_trace: o.search_trace.clone(),
                    tree: TreeFile::from_tree(&o.best_tree),
                },
            )?;
        }
        Command::Bounds { instance, budget, svg } => {
            let inst = load_instance(&instance, cli.seed)?;
            let at = |e| Failure::at(&instance, e);
            let s = smt(&inst.norm, &inst.terminals, &SmtOptions::default()).map_err(at)?;
            let o = mspt_search(&inst.terminals, &inst.norm, budget, inst.seed).map_err(at)?;
            let report = bound_report_from(&inst.terminals, &inst.norm, &s, &o).map_err(at)?;
            write_svg(&svg, &s.tree)?;
            let code = report_exit_code(&report);
            emit_json(out, &BoundsOutput { instance: inst.to_file(), seed: inst.seed, budget, report })?;
            if code != 0 {
                eprintln!("error: {}: a bound is violated (see the report flags)", instance.display());
                return Ok(code);
            }
        }
        Command::MakeTight { n, topology, trace } => {
            let target = match (&topology, n) {
                (Some(path), _) => {
                    let tree = load_tree(path)?;
                    let top = FullTopology::new(tree.topology().clone()).map_err(|e| Failure::at(path, e))?;
                    if let Some(k) = n.filter(|&k| k != top.terminal_count()) {
                        return Err(Failure::plain(Error::Usage(format!(
                            "--n {k} disagrees with the topology's {} terminals",
                            top.terminal_count()
                        ))));
                    }
                    top
                }
                (None, Some(k)) => caterpillar_topology(k).map_err(Failure::plain)?,
                (None, None) => return Err(Failure::plain(Error::Usage("give --n or --topology".into()))),
            };
            let t = tight_instance::<f64>(&target).map_err(Failure::plain)?;
            if let Some(p) = &trace {
                write_lines(p, &t.steps)?;
            }
            let seed = effective_seed(cli.seed)?;
            emit_json(
                out,
                &TightOutput {
                    instance: euclidean_instance(&format!("tight{}", t.terminals.len()), seed, &t.terminals),
                    expected_gap: t.expected_gap,
                    smt_beads: t.smt_tree.bead_count().bead_count,
                    displaced_beads: t.displaced_tree.bead_count().bead_count,
                    smt_verified: t.smt_verified,
                    smt_tree: TreeFile::from_tree(&t.smt_tree),
                    displaced_tree: TreeFile::from_tree(&t.displaced_tree),
                },
            )?;
        }
        Command::MakeCritical { norm, eps, trials } => {
            let text = read(&norm)?;
            let spec: NormSpec = serde_json::from_str(&text).map_err(|e| Failure::at(&norm, e.into()))?;
            let n = spec.to_norm().map_err(|e| Failure::at(&norm, e))?;
            let eps = [eps[0], eps[1], eps[2]];
            let seed = effective_seed(cli.seed)?;
            let c = critical_smt3_with(&n, eps, seed, trials).map_err(|e| Failure::at(&norm, e))?;
            emit_json(
                out,
                &CriticalOutput {
                    instance: InstanceFile {
                        schema_version: SCHEMA_VERSION,
                        label: format!("critical-{}", spec.name()),
                        seed,
                        edge_bound: 1.0,
                        norm: spec,
                        terminals: c.terminals.iter().map(|&p| p.into()).collect(),
                    },
                    epsilons: c.epsilons,
                    gap: c.gap,
                    smt_beads: c.smt_beads,
                    optimal_beads: c.optimal_beads,
                    witness_direction: c.witness_direction,
                    witness_pair: c.witness_pair,
                    jitter: c.jitter,
                    trials: c.trials,
                    smt_tree: TreeFile::from_tree(&c.smt_tree),
                    optimal_tree: TreeFile::from_tree(&c.optimal_tree),
                },
            )?;
        }
        Command::Canonicalize { tree, trace } => {
            let input = load_tree(&tree)?;
            let z = canonicalize_zpacked(&input).map_err(|e| Failure::at(&tree, e))?;
            if let Some(p) = &trace {
                write_lines(p, &z.trace)?;
            }
            emit_json(
                out,
                &CanonicalOutput {
                    bead_count: z.bead_count,
                    integer_edges: z.integer_edges.clone(),
                    non_integer_edge: z.non_integer_edge.clone(),
                    tree: TreeFile::from_tree(&z.tree),
                },
            )?;
        }
        Command::Experiment { config, workers } => {
            let text = read(&config)?;
            let mut cfg = parse_config(&text).map_err(|e| Failure::at(&config, e))?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            if let Some(s) = cli.seed.or(seed_override().map_err(Failure::plain)?) {
                cfg.seed = s;
            }
            let result = run_experiment(&cfg).map_err(|e| Failure::at(&config, e))?;
            let (rows, summary) = write_outputs(&cfg, &result).map_err(|e| Failure::at(&cfg.output_dir, e))?;
            log::info!("wrote {} and {}", rows.display(), summary.display());
            emit_json(out, &result.summary)?;
            if result.summary.violations > 0 {
                eprintln!("error: {} rows violate a bound", result.summary.violations);
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Render { tree } => {
            let t = load_tree(&tree)?;
            emit(out, &render_svg(&t))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap would exit 2, which is reserved for capacity errors
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
