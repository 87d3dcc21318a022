//! Batch experiments: random instances, heuristic-versus-oracle rows, and a
//! summary that can be recomputed from the rows alone.
//!
//! Row `i` draws from its own ChaCha stream keyed by `(seed, i)`, so a row is
//! reproducible without running the others and the output does not depend
//! on the worker count.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::io::{Instance, InstanceFile, NormSpec, SCHEMA_VERSION};
use crate::norms::Norm;
use crate::oracle::{
    bound_report_from, minimize_beads_fixed_topology, mspt_search, BoundReport, OracleResult, OracleStatus,
    DEFAULT_BUDGET, DEFAULT_SEED,
};
use crate::scalar::DEGENERATE_EPS;
use crate::smt::{smt, SmtOptions, SmtResult};

/// Largest Euclidean instance the SMT solver accepts.
pub const EUCLIDEAN_MAX_N: usize = 8;
/// Largest polygon-norm instance the SMT solver accepts.
pub const POLYGON_MAX_N: usize = 3;
pub const ROWS_FILE: &str = "rows.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Generator {
    /// Uniform in `[0, scale]^2`.
    UniformSquare { scale: f64 },
    /// Cluster centres uniform in `[0, scale]^2`, terminals uniform in the
    /// square of half-side `spread` around a random centre.
    Clustered { scale: f64, clusters: usize, spread: f64 },
    /// A JSON array of instance files; row `i` uses entry `i`.
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub generator: Generator,
    pub count: usize,
    /// Inclusive range of terminal counts.
    pub n_range: [usize; 2],
    pub norm: NormSpec,
    #[serde(default = "default_budget")]
    pub oracle_budget: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker cap; `None` means the available parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Probe whether a degeneracy of the SMT topology reaches the oracle count.
    #[serde(default = "default_true")]
    pub probe_degeneracy: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported schemaVersion {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.count == 0 {
            return Err(Error::Input("count must be at least 1".into()));
        }
        let [lo, hi] = self.n_range;
        if lo < 2 || lo > hi {
            return Err(Error::Input(format!("nRange [{lo}, {hi}] must satisfy 2 <= min <= max")));
        }
        let norm = self.norm.to_norm()?;
        let cap = if norm.is_euclidean() { EUCLIDEAN_MAX_N } else { POLYGON_MAX_N };
        if hi > cap {
            return Err(Error::Capacity(format!("nRange max {hi} exceeds the SMT solver cap n <= {cap} for this norm")));
        }
        match &self.generator {
            Generator::UniformSquare { scale } if !(*scale > 0.0 && scale.is_finite()) => {
                Err(Error::Input(format!("scale must be positive, got {scale}")))
            }
            Generator::Clustered { scale, clusters, spread } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*spread >= 0.0 && spread.is_finite()) || *clusters == 0 {
                    Err(Error::Input("clustered generator needs scale > 0, spread >= 0 and clusters >= 1".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn scale(&self) -> Option<f64> {
        match self.generator {
            Generator::UniformSquare { scale } | Generator::Clustered { scale, .. } => Some(scale),
            Generator::FromFile { .. } => None,
        }
    }
}

pub fn parse_config(json: &str) -> Result<ExperimentConfig> {
    let c: ExperimentConfig = serde_json::from_str(json)?;
    c.validate()?;
    Ok(c)
}

/// The random generator for row `index`.
pub fn row_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Terminals for one generated row.
pub fn generate(generator: &Generator, n_range: [usize; 2], rng: &mut impl Rng) -> Vec<Point<f64>> {
    let n = rng.gen_range(n_range[0]..=n_range[1]);
    match *generator {
        Generator::UniformSquare { scale } => {
            (0..n).map(|_| Point::new(rng.gen_range(0.0..scale), rng.gen_range(0.0..scale))).collect()
        }
        Generator::Clustered { scale, clusters, spread } => {
            let centres: Vec<Point<f64>> =
                (0..clusters).map(|_| Point::new(rng.gen_range(0.0..scale), rng.gen_range(0.0..scale))).collect();
            (0..n)
                .map(|_| {
                    let c = centres[rng.gen_range(0..clusters)];
                    if spread > 0.0 {
                        Point::new(c.x + rng.gen_range(-spread..spread), c.y + rng.gen_range(-spread..spread))
                    } else {
                        c
                    }
                })
                .collect()
        }
        Generator::FromFile { .. } => unreachable!("file instances are loaded, not generated"),
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentRow {
    pub index: usize,
    pub n: usize,
    pub norm: String,
    pub scale: Option<f64>,
    /// Mean distance from a terminal to its nearest neighbour.
    pub spacing: f64,
    pub smt_beads: i64,
    pub mst_beads: i64,
    pub oracle_beads: i64,
    pub oracle_status: String,
    pub gap: i64,
    pub j: usize,
    pub c: usize,
    #[serde(rename = "bound2n4")]
    pub bound_2n4: bool,
    #[serde(rename = "boundC")]
    pub bound_c: bool,
    pub eq_corollary: bool,
    pub para_bound: Option<bool>,
    /// `gap / max(oracleBeads, 1)`.
    pub gap_ratio: f64,
    pub smt_full: bool,
    /// Only for full SMTs with the probe enabled.
    pub degeneracy_hit: Option<bool>,
}

impl ExperimentRow {
    pub fn has_violation(&self) -> bool {
        !self.bound_2n4 || !self.bound_c || !self.eq_corollary || self.para_bound == Some(false)
    }

    pub fn is_verified(&self) -> bool {
        self.oracle_status != "BestEffort"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowFailure {
    pub index: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub count: usize,
    pub rows: usize,
    pub verified_rows: usize,
    pub failures: Vec<RowFailure>,
    /// Rows where some bound flag is false.
    pub violations: usize,
    pub verified_violations: usize,
    pub scale: Option<f64>,
    pub mean_spacing: f64,
    pub mean_gap: f64,
    pub mean_gap_ratio: f64,
    pub full_smt_rows: usize,
    pub degeneracy_probed: usize,
    pub degeneracy_hits: usize,
    pub degeneracy_hit_rate: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        0.0
    } else {
        s / k as f64
    }
}

/// Aggregates computed from the rows only (in row order).
pub fn summarize(count: usize, scale: Option<f64>, rows: &[ExperimentRow], failures: Vec<RowFailure>) -> ExperimentSummary {
    let probed: Vec<bool> = rows.iter().filter_map(|r| r.degeneracy_hit).collect();
    let hits = probed.iter().filter(|h| **h).count();
    ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        count,
        rows: rows.len(),
        verified_rows: rows.iter().filter(|r| r.is_verified()).count(),
        failures,
        violations: rows.iter().filter(|r| r.has_violation()).count(),
        verified_violations: rows.iter().filter(|r| r.is_verified() && r.has_violation()).count(),
        scale,
        mean_spacing: mean(rows.iter().map(|r| r.spacing)),
        mean_gap: mean(rows.iter().map(|r| r.gap as f64)),
        mean_gap_ratio: mean(rows.iter().map(|r| r.gap_ratio)),
        full_smt_rows: rows.iter().filter(|r| r.smt_full).count(),
        degeneracy_probed: probed.len(),
        degeneracy_hits: hits,
        degeneracy_hit_rate: if probed.is_empty() { None } else { Some(hits as f64 / probed.len() as f64) },
    }
}

fn nearest_spacing(terminals: &[Point<f64>], norm: &Norm<f64>) -> f64 {
    mean(terminals.iter().enumerate().map(|(i, &a)| {
        terminals
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, &b)| norm.distance(a, b))
            .fold(f64::INFINITY, f64::min)
    }))
}

/// Whether a degeneracy of the SMT's full topology reaches the oracle count:
/// first by comparing the oracle tree's splits, then by a fixed-topology
/// search on the SMT topology.
pub fn degeneracy_hit(
    smt_result: &SmtResult<f64>,
    oracle: &OracleResult<f64>,
    norm: &Norm<f64>,
    budget: u64,
    seed: u64,
) -> Result<bool> {
    let smt_splits = smt_result.tree.topology().splits();
    let opt = oracle.best_tree.contract_degenerate(DEGENERATE_EPS)?;
    if opt.topology().splits().is_subset(&smt_splits) {
        return Ok(true);
    }
    let top = smt_result.tree.topology();
    let tree = minimize_beads_fixed_topology(top, &smt_result.tree.terminal_positions(), norm, seed, budget)?;
    Ok(tree.bead_count().bead_count <= oracle.best_beads)
}

/// Runs one instance: SMT, oracle, bound report and the degeneracy probe.
pub fn run_instance(
    index: usize,
    instance: &Instance,
    scale: Option<f64>,
    budget: u64,
    probe: bool,
) -> Result<(ExperimentRow, BoundReport)> {
    let norm = &instance.norm;
    let t = &instance.terminals;
    let s = smt(norm, t, &SmtOptions::default())?;
    let oracle = mspt_search(t, norm, budget, instance.seed)?;
    let report = bound_report_from(t, norm, &s, &oracle)?;
    if report.has_violation() {
        log::error!("row {index}: bound violated: {report:?}");
    }
    let smt_full = s.degenerate_edges.is_empty() && t.len() >= 3;
    let hit = if probe && smt_full { Some(degeneracy_hit(&s, &oracle, norm, budget, instance.seed)?) } else { None };
    let row = ExperimentRow {
        index,
        n: t.len(),
        norm: instance.norm_spec.name(),
        scale,
        spacing: nearest_spacing(t, norm),
        smt_beads: report.smt_beads,
        mst_beads: report.mst_beads,
        oracle_beads: report.oracle_beads,
        oracle_status: status_name(oracle.status),
        gap: report.gap,
        j: report.j,
        c: report.c,
        bound_2n4: report.bound_2n4,
        bound_c: report.bound_c,
        eq_corollary: report.eq_corollary,
        para_bound: report.para_bound,
        gap_ratio: report.gap as f64 / report.oracle_beads.max(1) as f64,
        smt_full,
        degeneracy_hit: hit,
    };
    Ok((row, report))
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub summary: ExperimentSummary,
}

fn load_instances(path: &Path, config: &ExperimentConfig) -> Result<Vec<Instance>> {
    let text = fs::read_to_string(path)?;
    let files: Vec<InstanceFile> = serde_json::from_str(&text)?;
    if files.len() < config.count {
        return Err(Error::Input(format!("{} holds {} instances, count is {}", path.display(), files.len(), config.count)));
    }
    files.into_iter().take(config.count).map(Instance::from_file).collect()
}

/// Runs every row (in parallel up to the worker cap) without touching disk
/// beyond a `fromFile` generator. Row failures are collected, not raised.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let loaded = match &config.generator {
        Generator::FromFile { path } => Some(load_instances(path, config)?),
        _ => None,
    };
    let scale = config.scale();
    let job = |i: usize| -> Result<ExperimentRow> {
        let instance = match &loaded {
            Some(list) => list[i].clone(),
            None => {
                let mut rng = row_rng(config.seed, i);
                let terminals = generate(&config.generator, config.n_range, &mut rng);
                Instance::new(format!("row{i}"), config.seed, config.norm.clone(), terminals)?
            }
        };
        let n = instance.terminals.len();
        if n < config.n_range[0] || n > config.n_range[1] {
            return Err(Error::Input(format!("instance has {n} terminals, outside nRange")));
        }
        run_instance(i, &instance, scale, config.oracle_budget, config.probe_degeneracy).map(|(r, _)| r)
    };
    let workers = config.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {workers} workers: {e}")))?;
    // collect keeps index order whatever the completion order
    let results: Vec<Result<ExperimentRow>> = pool.install(|| (0..config.count).into_par_iter().map(job).collect());
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("row {index} failed: {e}");
                failures.push(RowFailure { index, error: e.to_string() });
            }
        }
    }
    let summary = summarize(config.count, scale, &rows, failures);
    Ok(ExperimentOutput { rows, summary })
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `rows.csv` and `summary.json` into the configured output directory.
pub fn write_outputs(config: &ExperimentConfig, out: &ExperimentOutput) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(&config.output_dir)?;
    let rows = config.output_dir.join(ROWS_FILE);
    let summary = config.output_dir.join(SUMMARY_FILE);
    fs::write(&rows, rows_to_csv(&out.rows)?)?;
    fs::write(&summary, serde_json::to_string_pretty(&out.summary)? + "\n")?;
    Ok((rows, summary))
}

/// Status of an oracle result as written in the CSV.
pub fn status_name(s: OracleStatus) -> String {
    format!("{s:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(count: usize, scale: f64, n: [usize; 2]) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: 1,
            generator: Generator::UniformSquare { scale },
            count,
            n_range: n,
            norm: NormSpec::Euclidean,
            oracle_budget: DEFAULT_BUDGET,
            output_dir: PathBuf::from("unused"),
            seed: 7,
            workers: Some(2),
            probe_degeneracy: true,
        }
    }

    #[test]
    fn validation() {
        let mut c = config(0, 5.0, [3, 4]);
        assert!(matches!(c.validate(), Err(Error::Input(_))));
        c.count = 3;
        c.validate().unwrap();
        c.n_range = [3, 9];
        assert!(matches!(c.validate(), Err(Error::Capacity(_))));
        c.n_range = [3, 4];
        c.norm = NormSpec::L1;
        assert!(matches!(c.validate(), Err(Error::Capacity(_))));
        c.n_range = [4, 3];
        assert!(c.validate().is_err());
        let typo = r#"{"schemaVersion":1,"generator":{"kind":"uniformSquare","scale":5},"count":2,"nRange":[3,3],"norm":{"kind":"euclidean"},"outputDir":"x","seeed":1}"#;
        assert!(parse_config(typo).is_err());
        let ok = typo.replace("seeed", "seed");
        assert_eq!(parse_config(&ok).unwrap().oracle_budget, DEFAULT_BUDGET);
    }

    #[test]
    fn streams_are_per_row() {
        let g = Generator::UniformSquare { scale: 10.0 };
        let a = generate(&g, [3, 6], &mut row_rng(1, 5));
        let b = generate(&g, [3, 6], &mut row_rng(1, 5));
        let c = generate(&g, [3, 6], &mut row_rng(1, 6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rows_independent_of_workers_and_csv_round_trips() {
        let mut c = config(12, 4.0, [3, 4]);
        let one = run_experiment(&ExperimentConfig { workers: Some(1), ..c.clone() }).unwrap();
        c.workers = Some(3);
        let three = run_experiment(&c).unwrap();
        assert_eq!(one.rows, three.rows);
        assert_eq!(one.rows.len() + one.summary.failures.len(), 12);
        assert!(one.rows.iter().enumerate().all(|(i, r)| r.index == i));
        let csv = rows_to_csv(&one.rows).unwrap();
        let back = rows_from_csv(&csv).unwrap();
        assert_eq!(back, one.rows);
        assert_eq!(summarize(12, Some(4.0), &back, one.summary.failures.clone()), one.summary);
        assert_eq!(one.summary.violations, 0);
        // three terminals have a single full topology: every full SMT is a hit
        for r in one.rows.iter().filter(|r| r.n == 3 && r.smt_full) {
            assert_eq!(r.degeneracy_hit, Some(true));
        }
    }
}
