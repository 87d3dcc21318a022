//! JSON formats for instances and trees.
//!
//! Every file carries `"schemaVersion": 1` and unknown fields are rejected.
//! Instances are normalized on ingestion: coordinates are divided by the
//! edge bound `R`, after which `R = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::norms::Norm;
use crate::oracle::DEFAULT_SEED;
use crate::topology::Topology;
use crate::tree::EmbeddedTree;

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides instance seeds.
pub const SEED_ENV: &str = "STEINERBEAD_SEED";

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn unit() -> f64 {
    1.0
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Input(format!("unsupported schemaVersion {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// A norm literal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean,
    /// Counterclockwise vertices of a centrally symmetric convex polygon.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Regular polygon with vertices on the unit circle, the first at `rotation` radians.
    Regular {
        sides: usize,
        #[serde(default)]
        rotation: f64,
    },
    L1,
    Linf,
}

impl NormSpec {
    pub fn to_norm(&self) -> Result<Norm<f64>> {
        match self {
            NormSpec::Euclidean => Ok(Norm::Euclidean),
            NormSpec::Polygon { vertices } => Norm::polygon(vertices.iter().map(|&v| Point::from(v)).collect()),
            NormSpec::Regular { sides, rotation } => Norm::regular(*sides, *rotation),
            NormSpec::L1 => Ok(Norm::l1()),
            NormSpec::Linf => Ok(Norm::linf()),
        }
    }

    pub fn from_norm(norm: &Norm<f64>) -> Self {
        match norm.ball() {
            None => NormSpec::Euclidean,
            Some(b) => NormSpec::Polygon { vertices: b.vertices().iter().map(|&v| v.into()).collect() },
        }
    }

    /// Short name for reports and CSV rows.
    pub fn name(&self) -> String {
        match self {
            NormSpec::Euclidean => "euclidean".into(),
            NormSpec::Polygon { vertices } => format!("polygon{}", vertices.len()),
            NormSpec::Regular { sides, .. } => format!("regular{sides}"),
            NormSpec::L1 => "l1".into(),
            NormSpec::Linf => "linf".into(),
        }
    }
}

/// The instance file as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Longest allowed edge `R`.
    #[serde(default = "unit")]
    pub edge_bound: f64,
    pub norm: NormSpec,
    pub terminals: Vec<[f64; 2]>,
}

/// A validated instance with `R = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub label: String,
    pub seed: u64,
    pub norm_spec: NormSpec,
    pub norm: Norm<f64>,
    pub terminals: Vec<Point<f64>>,
}

impl Instance {
    pub fn new(label: impl Into<String>, seed: u64, norm_spec: NormSpec, terminals: Vec<Point<f64>>) -> Result<Self> {
        let norm = norm_spec.to_norm()?;
        if terminals.len() < 2 {
            return Err(Error::Input(format!("an instance needs at least 2 terminals, got {}", terminals.len())));
        }
        if let Some(i) = terminals.iter().position(|p| !p.is_finite()) {
            return Err(Error::Input(format!("terminal {} is not finite", i + 1)));
        }
        Ok(Instance { label: label.into(), seed, norm_spec, norm, terminals })
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        check_version(file.schema_version)?;
        let r = file.edge_bound;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Input(format!("edgeBound must be positive, got {r}")));
        }
        if r != 1.0 {
            log::info!("rescaling coordinates by 1/{r}");
        }
        let terminals = file.terminals.iter().map(|&t| Point::from(t) * (1.0 / r)).collect();
        Instance::new(file.label, file.seed, file.norm, terminals)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            label: self.label.clone(),
            seed: self.seed,
            edge_bound: 1.0,
            norm: self.norm_spec.clone(),
            terminals: self.terminals.iter().map(|&p| p.into()).collect(),
        }
    }

    /// Replaces the seed with `STEINERBEAD_SEED` when that is set.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Some(s) = seed_override()? {
            self.seed = s;
        }
        Ok(self)
    }
}

pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Input(format!("{SEED_ENV}={v:?} is not a 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    Instance::from_file(serde_json::from_str(json)?)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&instance.to_file()).expect("instances serialize")
}

/// The tree file: labelled positions plus an edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TreeFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    pub terminals: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub steiners: BTreeMap<String, [f64; 2]>,
    pub edges: Vec<[String; 2]>,
}

impl TreeFile {
    pub fn from_tree(tree: &EmbeddedTree<f64>) -> Self {
        let t = tree.topology();
        let mut terminals = BTreeMap::new();
        let mut steiners = BTreeMap::new();
        for v in 0..t.node_count() {
            let slot = if t.is_terminal(v) { &mut terminals } else { &mut steiners };
            slot.insert(t.label(v).to_string(), tree.position(v).into());
        }
        let mut edges: Vec<[String; 2]> = t.edge_labels().into_iter().map(|(a, b)| [a, b]).collect();
        edges.sort();
        TreeFile { schema_version: SCHEMA_VERSION, norm: Some(NormSpec::from_norm(tree.norm())), terminals, steiners, edges }
    }

    /// The embedded tree; a missing norm means Euclidean.
    pub fn to_tree(&self) -> Result<EmbeddedTree<f64>> {
        check_version(self.schema_version)?;
        let norm = self.norm.as_ref().map_or(Ok(Norm::Euclidean), NormSpec::to_norm)?;
        let terminals: Vec<(&str, Point<f64>)> = self.terminals.iter().map(|(l, &p)| (l.as_str(), p.into())).collect();
        let steiners: Vec<(&str, Point<f64>)> = self.steiners.iter().map(|(l, &p)| (l.as_str(), p.into())).collect();
        let edges: Vec<(&str, &str)> = self.edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        if let Some((l, _)) = terminals.iter().chain(&steiners).find(|(_, p)| !p.is_finite()) {
            return Err(Error::Input(format!("node {l} has a non-finite position")));
        }
        EmbeddedTree::from_parts(&terminals, &steiners, &edges, norm)
    }
}

pub fn parse_tree(json: &str) -> Result<EmbeddedTree<f64>> {
    serde_json::from_str::<TreeFile>(json)?.to_tree()
}

pub fn tree_to_json(tree: &EmbeddedTree<f64>) -> String {
    serde_json::to_string_pretty(&TreeFile::from_tree(tree)).expect("trees serialize")
}

/// Relabels a topology's nodes from a tree file's label order; used when a
/// topology is supplied as a tree file whose positions are ignored.
pub fn topology_from_tree_file(json: &str) -> Result<Topology> {
    let file: TreeFile = serde_json::from_str(json)?;
    let mut positions = file.clone();
    for p in positions.terminals.values_mut().chain(positions.steiners.values_mut()) {
        *p = [0.0, 0.0];
    }
    Ok(positions.to_tree()?.topology().clone())
}
