//! One row of experiment output and its fixed CSV layout.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::serde_inf::format_f64;
use crate::spectral::DistanceKind;

/// Quantities not computed by an experiment stay `None` and are written as
/// empty CSV cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub n: usize,
    pub p: f64,
    /// Grid value that produced `p`.
    pub grid_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// Random stream of this trial under `seed`.
    pub stream: u64,
    pub omega0: bool,
    pub omega_col: bool,
    /// Exact invertibility, when certified.
    pub invertible: Option<bool>,
    #[serde(with = "crate::serde_inf::option")]
    pub s_min: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub s2: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub s_max: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub centered_norm: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub sigma_tilde: Option<f64>,
    pub light_count: Option<usize>,
    pub structure_props: Option<[bool; 6]>,
    #[serde(with = "crate::serde_inf::option")]
    pub lambda0: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub eigvec_dev: Option<f64>,
    /// `λ₀ ≥ np/2`.
    pub lambda_flag: Option<bool>,
    /// `eigvec_dev·√(np) ≤ 16·K̂`, with `K̂` measured over the grid cell.
    pub eigvec_flag: Option<bool>,
    /// Norm of the smallest singular vector off the light columns.
    #[serde(with = "crate::serde_inf::option")]
    pub offlight_norm: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub dist_projection: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub dist_formula: Option<f64>,
    pub dist_branch: Option<DistanceKind>,
    #[serde(with = "crate::serde_inf::option")]
    pub dist_rel_gap: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub hs_norm: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub eps_star: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub hs_event_freq: Option<f64>,
    #[serde(with = "crate::serde_inf::option")]
    pub wall_time_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 36] = [
    "experiment",
    "model",
    "n",
    "p",
    "grid_value",
    "trial",
    "seed",
    "stream",
    "omega0",
    "omega_col",
    "invertible",
    "s_min",
    "s2",
    "s_max",
    "centered_norm",
    "sigma_tilde",
    "light_count",
    "prop1",
    "prop2",
    "prop3",
    "prop4",
    "prop5",
    "prop6",
    "lambda0",
    "eigvec_dev",
    "lambda_flag",
    "eigvec_flag",
    "offlight_norm",
    "dist_projection",
    "dist_formula",
    "dist_branch",
    "dist_rel_gap",
    "hs_norm",
    "eps_star",
    "hs_event_freq",
    "wall_time_ms",
];

fn opt_f(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn opt_b(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

fn parse_f(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s.parse().map_err(|_| format!("bad number {s:?}")),
    }
}

fn parse_opt<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Option<T>, String> {
    if s.is_empty() { Ok(None) } else { f(s).map(Some) }
}

fn parse_b(s: &str) -> std::result::Result<bool, String> {
    s.parse().map_err(|_| format!("bad flag {s:?}"))
}

fn parse_u<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("bad integer {s:?}"))
}

impl TrialRecord {
    pub fn new(experiment: ExperimentKind, model: ModelKind, n: usize, p: f64, grid_value: f64, trial: usize, seed: u64, stream: u64) -> Self {
        Self {
            experiment,
            model,
            n,
            p,
            grid_value,
            trial,
            seed,
            stream,
            omega0: false,
            omega_col: false,
            invertible: None,
            s_min: None,
            s2: None,
            s_max: None,
            centered_norm: None,
            sigma_tilde: None,
            light_count: None,
            structure_props: None,
            lambda0: None,
            eigvec_dev: None,
            lambda_flag: None,
            eigvec_flag: None,
            offlight_norm: None,
            dist_projection: None,
            dist_formula: None,
            dist_branch: None,
            dist_rel_gap: None,
            hs_norm: None,
            eps_star: None,
            hs_event_freq: None,
            wall_time_ms: None,
        }
    }

    /// Canonical order: `n`, `p`, model, trial, then `ε⋆`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (self.experiment, self.n)
            .cmp(&(other.experiment, other.n))
            .then(self.p.total_cmp(&other.p))
            .then(self.model.cmp(&other.model))
            .then(self.trial.cmp(&other.trial))
            .then(self.eps_star.unwrap_or(f64::NAN).total_cmp(&other.eps_star.unwrap_or(f64::NAN)))
    }

    pub fn to_csv_row(&self) -> Vec<String> {
        let props = self.structure_props;
        let prop = |i: usize| opt_b(props.map(|p| p[i]));
        vec![
            self.experiment.id().to_string(),
            self.model.name().to_string(),
            self.n.to_string(),
            format_f64(self.p),
            format_f64(self.grid_value),
            self.trial.to_string(),
            self.seed.to_string(),
            self.stream.to_string(),
            self.omega0.to_string(),
            self.omega_col.to_string(),
            opt_b(self.invertible),
            opt_f(self.s_min),
            opt_f(self.s2),
            opt_f(self.s_max),
            opt_f(self.centered_norm),
            opt_f(self.sigma_tilde),
            self.light_count.map(|c| c.to_string()).unwrap_or_default(),
            prop(0),
            prop(1),
            prop(2),
            prop(3),
            prop(4),
            prop(5),
            opt_f(self.lambda0),
            opt_f(self.eigvec_dev),
            opt_b(self.lambda_flag),
            opt_b(self.eigvec_flag),
            opt_f(self.offlight_norm),
            opt_f(self.dist_projection),
            opt_f(self.dist_formula),
            self.dist_branch
                .map(|b| match b {
                    DistanceKind::Exact => "exact".to_string(),
                    DistanceKind::LowerBound => "lower_bound".to_string(),
                })
                .unwrap_or_default(),
            opt_f(self.dist_rel_gap),
            opt_f(self.hs_norm),
            opt_f(self.eps_star),
            opt_f(self.hs_event_freq),
            opt_f(self.wall_time_ms),
        ]
    }

    /// Inverse of [`TrialRecord::to_csv_row`]; `line` is only used in errors.
    pub fn from_csv_row(cells: &[&str], line: usize) -> Result<Self> {
        let header = CSV_HEADER;
        if cells.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), cells.len()),
            });
        }
        let at = |name: &str| cells[header.iter().position(|h| *h == name).expect("known column")];
        let parse = || -> std::result::Result<Self, String> {
            let props: Vec<Option<bool>> = (1..=6).map(|i| parse_opt(at(&format!("prop{i}")), parse_b)).collect::<std::result::Result<_, _>>()?;
            let structure_props = if props.iter().all(Option::is_some) {
                let mut arr = [false; 6];
                for (a, b) in arr.iter_mut().zip(&props) {
                    *a = b.unwrap_or(false);
                }
                Some(arr)
            } else {
                None
            };
            Ok(Self {
                experiment: at("experiment").parse().map_err(|e: Error| e.to_string())?,
                model: at("model").parse().map_err(|e: Error| e.to_string())?,
                n: parse_u(at("n"))?,
                p: parse_f(at("p"))?,
                grid_value: parse_f(at("grid_value"))?,
                trial: parse_u(at("trial"))?,
                seed: parse_u(at("seed"))?,
                stream: parse_u(at("stream"))?,
                omega0: parse_b(at("omega0"))?,
                omega_col: parse_b(at("omega_col"))?,
                invertible: parse_opt(at("invertible"), parse_b)?,
                s_min: parse_opt(at("s_min"), parse_f)?,
                s2: parse_opt(at("s2"), parse_f)?,
                s_max: parse_opt(at("s_max"), parse_f)?,
                centered_norm: parse_opt(at("centered_norm"), parse_f)?,
                sigma_tilde: parse_opt(at("sigma_tilde"), parse_f)?,
                light_count: parse_opt(at("light_count"), parse_u)?,
                structure_props,
                lambda0: parse_opt(at("lambda0"), parse_f)?,
                eigvec_dev: parse_opt(at("eigvec_dev"), parse_f)?,
                lambda_flag: parse_opt(at("lambda_flag"), parse_b)?,
                eigvec_flag: parse_opt(at("eigvec_flag"), parse_b)?,
                offlight_norm: parse_opt(at("offlight_norm"), parse_f)?,
                dist_projection: parse_opt(at("dist_projection"), parse_f)?,
                dist_formula: parse_opt(at("dist_formula"), parse_f)?,
                dist_branch: parse_opt(at("dist_branch"), |s| match s {
                    "exact" => Ok(DistanceKind::Exact),
                    "lower_bound" => Ok(DistanceKind::LowerBound),
                    other => Err(format!("bad branch {other:?}")),
                })?,
                dist_rel_gap: parse_opt(at("dist_rel_gap"), parse_f)?,
                hs_norm: parse_opt(at("hs_norm"), parse_f)?,
                eps_star: parse_opt(at("eps_star"), parse_f)?,
                hs_event_freq: parse_opt(at("hs_event_freq"), parse_f)?,
                wall_time_ms: parse_opt(at("wall_time_ms"), parse_f)?,
            })
        };
        parse().map_err(|message| Error::Parse { line, message })
    }
}
