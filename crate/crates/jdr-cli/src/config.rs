//! Experiment configuration: TOML file + dotted-path overrides.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use jdr_core::physmodel::TransducerParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

fn tau_chi() -> f64 {
    std::f64::consts::TAU * 100e6
}

/// Transducer block: every field optional, falling back to the fiducial
/// device values at the experiment temperature.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TransducerBlock {
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub omega3: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa3: Option<f64>,
    pub gamma: Option<f64>,
    pub g1_max: Option<f64>,
    pub g3_max: Option<f64>,
    pub g1_lin_max: Option<f64>,
    pub g3_lin_max: Option<f64>,
}

impl TransducerBlock {
    pub fn params(&self, temperature: f64) -> TransducerParams {
        let mut p = TransducerParams::fiducial(temperature);
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        take!(omega1, omega2, omega3, kappa1, kappa3, gamma, g1_max, g3_max, g1_lin_max, g3_lin_max);
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub scale: GridScale,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Log,
    Linear,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: 0.05,
            hi: 2.0,
            points: 40,
            scale: GridScale::Log,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Ok(Vec::new());
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        match self.scale {
            GridScale::Log => Ok(jdr_core::limits::log_grid(self.lo, self.hi, self.points)?),
            GridScale::Linear => {
                if !(self.hi >= self.lo) {
                    bail!("grid hi {} below lo {}", self.hi, self.lo);
                }
                let step = (self.hi - self.lo) / (self.points - 1) as f64;
                Ok((0..self.points).map(|i| self.lo + step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentBlock {
    /// Mechanical reservoir temperatures to sweep, kelvin.
    pub temperatures: Vec<f64>,
    /// Jaynes-Cummings coupling chi, rad/s.
    pub chi: f64,
    /// Root seed; all per-task seeds derive from it by position.
    pub seed: u64,
    pub rmpn: GridSpec,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            temperatures: vec![1e-3],
            chi: tau_chi(),
            seed: 0,
            rmpn: GridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CodebookBlock {
    pub n: usize,
    pub m: usize,
    pub kind: CodebookKindSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CodebookKindSpec {
    Parity,
    Random,
}

impl Default for CodebookBlock {
    fn default() -> Self {
        Self {
            n: 3,
            m: 4,
            kind: CodebookKindSpec::Parity,
            seed: 0,
        }
    }
}

impl CodebookBlock {
    pub fn build(&self) -> Result<jdr_core::decoder::Codebook> {
        let kind = match self.kind {
            CodebookKindSpec::Parity => jdr_core::decoder::CodebookKind::Parity,
            CodebookKindSpec::Random => jdr_core::decoder::CodebookKind::Random,
        };
        Ok(jdr_core::decoder::make_codebook(self.n, self.m, kind, self.seed)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitBlock {
    /// Ansatz depths to sweep.
    pub layers: Vec<usize>,
    /// Also fit the unconstrained optimal unitary at each grid point.
    pub include_unitary: bool,
}

impl Default for CircuitBlock {
    fn default() -> Self {
        Self {
            layers: vec![3],
            include_unitary: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerBlock {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for OptimizerBlock {
    fn default() -> Self {
        let d = jdr_core::decoder::TrainOpts::default();
        Self {
            restarts: d.restarts,
            max_iters: d.max_iters,
            tol: d.tol,
        }
    }
}

impl OptimizerBlock {
    pub fn opts(&self, seed: u64) -> jdr_core::decoder::TrainOpts {
        jdr_core::decoder::TrainOpts {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tol: self.tol,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseBlock {
    pub p1: f64,
    pub p2: f64,
    pub pm: f64,
}

impl NoiseBlock {
    pub fn model(&self) -> jdr_core::qsim::NoiseModel {
        jdr_core::qsim::NoiseModel {
            p1: self.p1,
            p2: self.p2,
            pm: self.pm,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainBlock {
    /// Received mean photon number used by the single-point subcommands
    /// (train, qubits).
    pub rmpn: f64,
}

impl Default for TrainBlock {
    fn default() -> Self {
        Self { rmpn: 0.2 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub transducer: TransducerBlock,
    pub experiment: ExperimentBlock,
    pub codebook: CodebookBlock,
    pub circuit: CircuitBlock,
    pub optimizer: OptimizerBlock,
    pub noise: NoiseBlock,
    pub train: TrainBlock,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiment.temperatures.is_empty() {
            bail!("experiment.temperatures must be non-empty");
        }
        for &t in &self.experiment.temperatures {
            if !(t > 0.0) {
                bail!("temperatures must be positive, got {t}");
            }
        }
        if !(self.experiment.chi > 0.0) {
            bail!("experiment.chi must be positive");
        }
        if self.circuit.layers.is_empty() && !self.circuit.include_unitary {
            bail!("circuit.layers empty and include_unitary false: nothing to fit");
        }
        if !(self.train.rmpn > 0.0) {
            bail!("train.rmpn must be positive");
        }
        self.noise.model().validate()?;
        self.codebook.build()?;
        Ok(())
    }

    /// Canonical resolved TOML text, used for manifests and the config hash.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn sha256(&self) -> Result<String> {
        let text = self.to_toml()?;
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        Ok(format!("{:x}", h.finalize()))
    }
}

/// Load the config file (or defaults when absent), apply `--set` overrides,
/// then deserialize with unknown-key rejection.
pub fn load(path: Option<&Path>, sets: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            text.parse::<toml::Table>()
                .with_context(|| format!("invalid TOML in {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for entry in sets {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got '{entry}'"))?;
        apply_override(&mut table, key.trim(), raw.trim())?;
    }
    if let Some(s) = seed {
        apply_override(&mut table, "experiment.seed", &s.to_string())?;
    }
    let config: ExperimentConfig = Value::Table(table)
        .try_into()
        .map_err(|e| anyhow!("invalid config: {e}"))?;
    config.validate()?;
    Ok(config)
}

/// Shorthand keys accepted by --set in addition to full dotted paths.
fn expand_alias(key: &str) -> (String, bool) {
    match key {
        "temperature" => ("experiment.temperatures".into(), true),
        "chi" => ("experiment.chi".into(), false),
        "seed" => ("experiment.seed".into(), false),
        "rmpn" => ("train.rmpn".into(), false),
        other => (other.to_string(), false),
    }
}

fn parse_value(raw: &str) -> Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let (path, wrap_list) = expand_alias(key);
    let mut value = parse_value(raw);
    if wrap_list && !matches!(value, Value::Array(_)) {
        value = Value::Array(vec![value]);
    }
    let parts: Vec<&str> = path.split('.').collect();
    let mut cursor = table;
    for part in &parts[..parts.len() - 1] {
        cursor = cursor
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("--set path '{path}' crosses a non-table value"))?;
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
