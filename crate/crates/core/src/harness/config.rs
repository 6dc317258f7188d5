//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::vacant::{DirectionSet, PlaneScope};
use crate::walk::Start;

use super::HarnessError;

/// Default per-replica step budget.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Disconnect,
    Scaling,
    Excursions,
    Events,
    Expbound,
    Localtime,
    Qtable,
    Thresholds,
    Peierls,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Disconnect,
        ExperimentKind::Scaling,
        ExperimentKind::Excursions,
        ExperimentKind::Events,
        ExperimentKind::Expbound,
        ExperimentKind::Localtime,
        ExperimentKind::Qtable,
        ExperimentKind::Thresholds,
        ExperimentKind::Peierls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Disconnect => "disconnect",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Excursions => "excursions",
            ExperimentKind::Events => "events",
            ExperimentKind::Expbound => "expbound",
            ExperimentKind::Localtime => "localtime",
            ExperimentKind::Qtable => "qtable",
            ExperimentKind::Thresholds => "thresholds",
            ExperimentKind::Peierls => "peierls",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExcursionParams {
    /// Excursion count parameter: `t = u N^{d−1}`.
    pub u: f64,
    /// Grid of `γ`; the event is checked at time `γ N^{2d}`.
    pub gammas: Vec<f64>,
    /// `M` in the supplementary local-time comparison at index `M γ N^{2d−2}`.
    pub local_time_factor: f64,
}

impl Default for ExcursionParams {
    fn default() -> Self {
        Self {
            u: 0.5,
            gammas: vec![0.01, 0.03, 0.1, 0.3, 1.0, 3.0],
            local_time_factor: 1.0,
        }
    }
}

/// When the planar event is evaluated along `[0, D^j_[t]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UTimes {
    /// Only at `n = D^j_[t]`.
    FinalOnly,
    /// At every departure `D^j_1, …, D^j_[t]` (and at 0 when `[t] = 0`).
    #[default]
    ExcursionBoundaries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventParams {
    /// Segment-length constant `K` in `[K log N]`.
    pub k: f64,
    /// Grid of `u`; events are evaluated at `D^j_[t]`, `t = u N^{d−1}`.
    pub us: Vec<f64>,
    pub level: i64,
    /// Planes sampled per check when `N > 16`.
    pub plane_samples: usize,
    pub u_times: UTimes,
    pub directions: DirectionSet,
}

impl Default for EventParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            us: vec![0.0, 0.004, 0.008, 0.016, 0.05, 0.1],
            level: 0,
            plane_samples: 256,
            u_times: UTimes::ExcursionBoundaries,
            directions: DirectionSet::Signed,
        }
    }
}

impl EventParams {
    pub fn plane_scope(&self, side: u32, seed: u64) -> PlaneScope {
        PlaneScope::for_side(side, self.plane_samples, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpBoundParams {
    /// Dimension of the plane holding the sets `A` (1 or 2).
    pub m: usize,
    /// The trace is taken at `D^j_[u N^{d−1}]`.
    pub u: f64,
    /// Largest `|A|` (at most 12).
    pub max_size: usize,
    pub level: i64,
    /// Reference decay rate reported next to the fitted one.
    pub lambda: f64,
}

impl Default for ExpBoundParams {
    fn default() -> Self {
        Self {
            m: 2,
            u: 0.1,
            max_size: 8,
            level: 0,
            lambda: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalTimeParams {
    pub ks: Vec<u64>,
}

impl Default for LocalTimeParams {
    fn default() -> Self {
        Self { ks: vec![50, 200, 1000] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QTableParams {
    pub nus: Vec<usize>,
    pub tol: f64,
    /// Adds staged Monte Carlo rows at this horizon when set.
    pub mc_horizon: Option<u64>,
    pub mc_replicas: u64,
}

impl Default for QTableParams {
    fn default() -> Self {
        Self {
            nus: (1..=30).collect(),
            tol: 1e-8,
            mc_horizon: None,
            mc_replicas: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdParams {
    pub d_min: usize,
    pub d_max: usize,
    pub tol: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            d_min: 4,
            d_max: 30,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeierlsParams {
    pub n_max: usize,
}

impl Default for PeierlsParams {
    fn default() -> Self {
        Self { n_max: 8 }
    }
}

/// One experiment. Every key has a default, so a config file only needs the
/// keys it changes; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Replicas per side length.
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_sides")]
    pub sides: Vec<u32>,
    #[serde(default)]
    pub start: Start,
    /// Connectivity check cadence for disconnection runs (default `N^d`).
    #[serde(default)]
    pub cadence: Option<u64>,
    /// Per-replica step budget; also the step cap.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub excursions: ExcursionParams,
    #[serde(default)]
    pub events: EventParams,
    #[serde(default)]
    pub expbound: ExpBoundParams,
    #[serde(default)]
    pub localtime: LocalTimeParams,
    #[serde(default)]
    pub qtable: QTableParams,
    #[serde(default)]
    pub thresholds: ThresholdParams,
    #[serde(default)]
    pub peierls: PeierlsParams,
}

fn default_seed() -> u64 {
    1
}
fn default_replicas() -> u64 {
    100
}
fn default_d() -> usize {
    1
}
fn default_sides() -> Vec<u32> {
    vec![8, 16, 32]
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Writes `top` over `base`, merging tables key by key.
fn overlay(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => overlay(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Defaults for `kind`, tuned to run in seconds to minutes on one core.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg: Self = toml::from_str(&format!("experiment = \"{kind}\"")).expect("defaults parse");
        match kind {
            ExperimentKind::Disconnect | ExperimentKind::Scaling => {
                cfg.sides = vec![8, 16, 32, 64];
                cfg.replicas = 200;
            }
            ExperimentKind::Excursions => {
                cfg.d = 2;
                cfg.sides = vec![8, 12];
                cfg.replicas = 1000;
            }
            ExperimentKind::Events => {
                cfg.d = 3;
                cfg.sides = vec![16];
                cfg.replicas = 20;
                cfg.start = Start::UniformB0;
            }
            ExperimentKind::Expbound => {
                cfg.d = 4;
                cfg.sides = vec![12];
                cfg.replicas = 2000;
                cfg.start = Start::UniformB0;
            }
            ExperimentKind::Localtime => {
                cfg.sides = vec![4];
                cfg.replicas = 10_000;
            }
            ExperimentKind::Qtable | ExperimentKind::Thresholds | ExperimentKind::Peierls => {}
        }
        cfg
    }

    /// Parses a config file. Keys it leaves out take the defaults of the
    /// experiment it names, section by section.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config_err = |e: &dyn std::fmt::Display| HarnessError::Config(e.to_string());
        let file: toml::Table = toml::from_str(text).map_err(|e| config_err(&e))?;
        let kind: ExperimentKind = match file.get("experiment") {
            Some(v) => v.clone().try_into().map_err(|e| config_err(&e))?,
            None => return Err(HarnessError::Config("missing field `experiment`".into())),
        };
        let mut merged = toml::Table::try_from(Self::defaults(kind)).map_err(|e| config_err(&e))?;
        overlay(&mut merged, file);
        let cfg: Self = merged.try_into().map_err(|e| config_err(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let simulates = !matches!(
            self.experiment,
            ExperimentKind::Qtable | ExperimentKind::Thresholds | ExperimentKind::Peierls
        );
        if simulates {
            if self.d == 0 {
                return bad("d must be at least 1".into());
            }
            if self.sides.is_empty() || self.sides.iter().any(|&n| n < 2) {
                return bad("sides must be a nonempty list of integers ≥ 2".into());
            }
            if self.replicas == 0 {
                return bad("replicas must be positive".into());
            }
        }
        if self.cadence == Some(0) {
            return bad("cadence must be at least 1".into());
        }
        if self.budget == 0 {
            return bad("budget must be positive".into());
        }
        match self.experiment {
            ExperimentKind::Scaling if self.sides.len() < 2 => bad("scaling needs at least two side lengths".into()),
            ExperimentKind::Excursions if self.excursions.gammas.is_empty() || self.excursions.u <= 0.0 => {
                bad("excursions needs u > 0 and a nonempty γ grid".into())
            }
            ExperimentKind::Events if self.events.us.is_empty() || self.events.k <= 0.0 || self.events.us.iter().any(|&u| u < 0.0) => {
                bad("events needs K > 0 and a nonempty grid of u ≥ 0".into())
            }
            ExperimentKind::Expbound
                if !(1..=2).contains(&self.expbound.m) || !(1..=12).contains(&self.expbound.max_size) || self.expbound.u < 0.0 =>
            {
                bad("expbound needs m ∈ {1, 2}, 1 ≤ max_size ≤ 12 and u ≥ 0".into())
            }
            ExperimentKind::Localtime if self.localtime.ks.is_empty() => bad("localtime needs a nonempty list ks".into()),
            ExperimentKind::Qtable if self.qtable.nus.is_empty() || self.qtable.nus.contains(&0) || self.qtable.tol.is_nan() || self.qtable.tol <= 0.0 => {
                bad("qtable needs dimensions ν ≥ 1 and tol > 0".into())
            }
            ExperimentKind::Thresholds
                if self.thresholds.d_min < 4 || self.thresholds.d_max > 64 || self.thresholds.d_min > self.thresholds.d_max =>
            {
                bad("thresholds range must lie within 4..=64".into())
            }
            ExperimentKind::Peierls if !(1..=crate::criticality::SAW_BUDGET).contains(&self.peierls.n_max) => {
                bad("peierls n_max must lie in 1..=10".into())
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn cadence_for(&self, side: u32) -> u64 {
        self.cadence.unwrap_or_else(|| u64::from(side).pow(self.d as u32))
    }
}
