//! Experiment configuration: the JSON document read by `run`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::{GraphModel, ModelKind};
use crate::spectral::SpectralOptions;
use crate::structure::StructureParams;
use crate::vectors::VectorClassParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(alias = "zero_column_probability")]
    ZeroColumnProbability,
    #[serde(alias = "phase_transition")]
    PhaseTransition,
    #[serde(alias = "smin_scaling")]
    SminScaling,
    #[serde(alias = "norm_concentration")]
    NormConcentration,
    #[serde(alias = "structure_audit")]
    StructureAudit,
    #[serde(alias = "distance_identity")]
    DistanceIdentity,
    #[serde(alias = "hs_norm_check")]
    HsNormCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::ZeroColumnProbability,
        ExperimentKind::PhaseTransition,
        ExperimentKind::SminScaling,
        ExperimentKind::NormConcentration,
        ExperimentKind::StructureAudit,
        ExperimentKind::DistanceIdentity,
        ExperimentKind::HsNormCheck,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::ZeroColumnProbability => "zero_column_probability",
            ExperimentKind::PhaseTransition => "phase_transition",
            ExperimentKind::SminScaling => "smin_scaling",
            ExperimentKind::NormConcentration => "norm_concentration",
            ExperimentKind::StructureAudit => "structure_audit",
            ExperimentKind::DistanceIdentity => "distance_identity",
            ExperimentKind::HsNormCheck => "hs_norm_check",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.id() == s || format!("{k:?}") == s)
            .ok_or_else(|| Error::param(format!("unknown experiment '{s}'")))
    }
}

/// How edge probabilities are laid out for each `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PGrid {
    /// `np = log n + k` for each listed `k`.
    Offsets(Vec<f64>),
    /// The listed `p`, independent of `n`.
    Probabilities(Vec<f64>),
    /// `np = c·log n` for each listed `c`.
    LogMultiples(Vec<f64>),
}

impl PGrid {
    fn values(&self) -> &[f64] {
        match self {
            PGrid::Offsets(v) | PGrid::Probabilities(v) | PGrid::LogMultiples(v) => v,
        }
    }

    /// Edge probability at size `n` for the grid value `v`.
    pub fn p_at(&self, n: usize, v: f64) -> f64 {
        let nf = n as f64;
        match self {
            PGrid::Offsets(_) => (nf.ln() + v) / nf,
            PGrid::Probabilities(_) => v,
            PGrid::LogMultiples(_) => v * nf.ln() / nf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentParams {
    pub structure: StructureParams,
    pub vectors: VectorClassParams,
    pub spectral: SpectralOptions,
    /// Compute the dominant eigenpair in phase-transition runs.
    pub eigenpair: bool,
    /// `ε⋆` levels for the Hilbert–Schmidt check.
    pub eps_star: Vec<f64>,
    /// Random vectors per matrix in the Hilbert–Schmidt check.
    pub x_draws: usize,
    /// Run the normal-coordinates probe in structure audits.
    pub normal_coordinates: bool,
    /// The constant `C'` in the probe's `1/(C'·np)` bound.
    pub normal_c: f64,
    /// Fill `wall_time_ms`; outputs are then no longer byte-reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            structure: StructureParams::default(),
            vectors: VectorClassParams::default(),
            spectral: SpectralOptions::default(),
            eigenpair: true,
            eps_star: vec![0.1, 0.25],
            x_draws: 100,
            normal_coordinates: true,
            normal_c: 10.0,
            record_timing: false,
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::UndirectedEr]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    pub n: Vec<usize>,
    pub grid: PGrid,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ExperimentParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// One `(model, n, p)` cell of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub model: GraphModel,
    /// The grid value that produced `p` (offset, probability or multiple).
    pub grid_value: f64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, models: Vec<ModelKind>, n: Vec<usize>, grid: PGrid, trials: usize, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            models,
            n,
            grid,
            trials,
            seed,
            params: ExperimentParams::default(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.models.is_empty() || self.n.is_empty() || self.grid.values().is_empty() {
            return Err(Error::param("models, n and the p grid must be nonempty"));
        }
        self.params.structure.validate()?;
        self.params.vectors.validate()?;
        self.params.spectral.validate()?;
        if self.params.eps_star.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::param("eps_star levels must be positive"));
        }
        if !(self.params.normal_c > 0.0) {
            return Err(Error::param("normal_c must be positive"));
        }
        self.points().map(|_| ())
    }

    /// Grid cells in model, `n`, grid-value order; every cell is validated.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let mut out = Vec::new();
        for &kind in &self.models {
            for &n in &self.n {
                for &v in self.grid.values() {
                    let model = GraphModel::new(kind, n, self.grid.p_at(n, v))?;
                    out.push(GridPoint { model, grid_value: v });
                }
            }
        }
        Ok(out)
    }

    /// Apply `key=value` overrides. Keys are dotted paths into the JSON form
    /// (`trials`, `params.structure.delta0`); values are parsed as JSON and
    /// fall back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw
                .split_once('=')
                .filter(|(k, _)| !k.trim().is_empty())
                .ok_or_else(|| Error::param(format!("override '{raw}' is not of the form key=value")))?;
            let value: Value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
            let mut slot = &mut doc;
            for part in key.trim().split('.') {
                let obj = slot
                    .as_object_mut()
                    .ok_or_else(|| Error::param(format!("override key '{key}' does not name a field")))?;
                slot = obj.entry(part.to_string()).or_insert(Value::Null);
            }
            *slot = value;
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| Error::param(format!("invalid override: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> &'static str {
        r#"{
            "experiment": "PhaseTransition",
            "models": ["undirected", "directed"],
            "n": [100],
            "grid": {"offsets": [-3, 0, 3]},
            "trials": 10,
            "seed": 7
        }"#
    }

    #[test]
    fn parses_and_expands_grid() {
        let cfg = ExperimentConfig::from_json(sample_json()).unwrap();
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 6);
        let expect = ((100f64).ln() + 3.0) / 100.0;
        assert!((pts[2].model.p - expect).abs() < 1e-15);
        assert_eq!(pts[3].model.kind, ModelKind::DirectedEr);
    }

    #[test]
    fn overrides_apply_after_load() {
        let cfg = ExperimentConfig::from_json(sample_json()).unwrap();
        let c2 = cfg.with_overrides(&["trials=50", "params.structure.delta0=0.02", "experiment=SminScaling"]).unwrap();
        assert_eq!(c2.trials, 50);
        assert_eq!(c2.params.structure.delta0, 0.02);
        assert_eq!(c2.experiment, ExperimentKind::SminScaling);
        assert!(cfg.with_overrides(&["trials"]).is_err());
        assert!(cfg.with_overrides(&["trials=0"]).is_err());
        assert!(cfg.with_overrides(&["trials=abc"]).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = ExperimentConfig::from_json(sample_json()).unwrap();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_json(sample_json()).unwrap();
        cfg.grid = PGrid::Probabilities(vec![0.0]);
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::from_json(sample_json()).unwrap();
        cfg.params.structure.delta0 = 0.0;
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"Nope","n":[1],"grid":{"offsets":[0]},"trials":1}"#).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.id().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
