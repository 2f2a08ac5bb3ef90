use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scarlab::models::{build_model, product_state, scar_state, LindbladModel, ModelId, ScarState};
use scarlab::operator::{Boundary, HilbertSpec, LocalKind, SparseOperator};
use scarlab::models::terms::site_operator;
use scarlab::CVector;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    pub model: ModelConfig,
    #[serde(default)]
    pub initial: Vec<InitialState>,
    #[serde(default)]
    pub observable: Option<ObservableConfig>,
    #[serde(default)]
    pub times: Option<TimeGrid>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub commutant: Option<CommutantConfig>,
    #[serde(default)]
    pub collapse: Option<CollapseConfig>,
    #[serde(default)]
    pub coherence: Option<CoherenceConfig>,
    #[serde(default)]
    pub brownian: Option<BrownianConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: String,
    #[serde(default)]
    pub len: Option<usize>,
    #[serde(default = "open")]
    pub boundary: BoundaryName,
    /// Missing parameters take the catalog defaults.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn open() -> BoundaryName {
    BoundaryName::Open
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Open,
    Periodic,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Open => Boundary::Open,
            BoundaryName::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// Product state, the pattern repeated until the chain is filled.
    Pattern(String),
    FerromagnetUp,
    FerromagnetDown,
    Tower { n: usize },
    /// `k` defaults to `π + 2π/L`.
    Aqmbs {
        n: usize,
        #[serde(default)]
        k: Option<f64>,
    },
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::Pattern(p) => p.clone(),
            InitialState::FerromagnetUp => "ferromagnet-up".into(),
            InitialState::FerromagnetDown => "ferromagnet-down".into(),
            InitialState::Tower { n } => format!("tower-{n}"),
            InitialState::Aqmbs { n, .. } => format!("aqmbs-{n}"),
        }
    }

    pub fn scar(&self) -> Option<ScarState> {
        match *self {
            InitialState::Pattern(_) => None,
            InitialState::FerromagnetUp => Some(ScarState::FerromagnetUp),
            InitialState::FerromagnetDown => Some(ScarState::FerromagnetDown),
            InitialState::Tower { n } => Some(ScarState::Tower { n }),
            InitialState::Aqmbs { n, k } => Some(ScarState::Aqmbs { n, k: k.unwrap_or(f64::NAN) }),
        }
    }

    fn resolve(&mut self, len: usize) {
        if let InitialState::Aqmbs { k, .. } = self {
            k.get_or_insert(ScarState::default_momentum(len));
        }
    }

    pub fn vector(&self, spec: &HilbertSpec) -> Result<CVector, CliError> {
        let v = match self {
            InitialState::Pattern(p) => product_state(spec, p),
            _ => scar_state(&self.scar().expect("scar variant"), spec),
        };
        v.map_err(CliError::config)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    /// Local operator kind: `x`, `y`, `z`, `z2`, …
    pub op: String,
    /// 1-based site.
    pub site: usize,
}

impl ObservableConfig {
    pub fn build(&self, spec: &HilbertSpec) -> Result<SparseOperator, CliError> {
        let kind: LocalKind = self.op.parse().map_err(CliError::config)?;
        site_operator(spec, kind, self.site).map_err(CliError::config)
    }

    pub fn label(&self) -> String {
        format!("{}@{}", self.op, self.site)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    /// Number of uniformly spaced points including `t = 0`.
    pub n_points: usize,
}

impl TimeGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![0.0];
        }
        (0..self.n_points)
            .map(|i| self.t_max * i as f64 / (self.n_points - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Method {
    #[default]
    Exact,
    Trajectories { n_traj: usize, dt: Option<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutantConfig {
    #[serde(default = "kernel_tol")]
    pub tol: f64,
}

fn kernel_tol() -> f64 {
    scarlab::algebra::DEFAULT_KERNEL_TOL
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub lens: Vec<usize>,
    /// Largest scaled time `t²/L²` (tower-1) or `t/L²` (tower-2).
    pub x_max: f64,
    pub n_points: usize,
    #[serde(default = "threshold")]
    pub threshold: f64,
    #[serde(default = "n_grid")]
    pub n_grid: usize,
    /// Bimagnon number of `|n, π + 2π/L⟩`.
    #[serde(default = "one")]
    pub n: usize,
}

fn threshold() -> f64 {
    0.8
}

fn n_grid() -> usize {
    401
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case", deny_unknown_fields)]
pub enum CoherenceConfig {
    /// Coherence between the first initial state (a singlet) and the second,
    /// against `‖·‖²(0) e^{−λt}` with `λ` the gap of `H2` above the singlet.
    DephasingBound,
    /// Tower-2 exact law with `ρ0 = |ψ⟩⟨ψ|`, `ψ = (|n0⟩ + |n0, k⟩)/√2`.
    TowerLaw {
        #[serde(default = "one")]
        n0: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianConfig {
    pub k: f64,
    pub gamma: f64,
    #[serde(default = "eps")]
    pub eps: f64,
    #[serde(default = "n_samples")]
    pub n_samples: usize,
}

fn eps() -> f64 {
    1e-2
}

fn n_samples() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn model_id(&self) -> Result<ModelId, CliError> {
        self.model.id.parse().map_err(CliError::config)
    }

    pub fn len(&self) -> Result<usize, CliError> {
        self.model
            .len
            .ok_or_else(|| CliError::Config("model.len is required".into()))
    }

    pub fn boundary(&self) -> Boundary {
        self.model.boundary.into()
    }

    pub fn build_model(&self, len: usize) -> Result<LindbladModel, CliError> {
        build_model(self.model_id()?, len, self.boundary(), &self.model.params).map_err(CliError::config)
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let grid = self
            .times
            .as_ref()
            .ok_or_else(|| CliError::Config("`times` is required".into()))?;
        if !(grid.t_max >= 0.0) || grid.n_points == 0 {
            return Err(CliError::Config("times need t_max ≥ 0 and n_points ≥ 1".into()));
        }
        Ok(grid.values())
    }

    /// Fills every default so that the echoed configuration fully determines the run.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        let id = self.model_id()?;
        for (k, v) in id.default_params() {
            self.model.params.entry(k).or_insert(v);
        }
        if let Some(len) = self.model.len {
            for s in &mut self.initial {
                s.resolve(len);
            }
            if self.observable.is_none() {
                self.observable = Some(ObservableConfig {
                    op: "z".into(),
                    site: (len / 2).max(1),
                });
            }
        }
        if let Some(c) = &self.collapse {
            if c.lens.len() < 2 || !(c.x_max > 0.0) || c.n_points < 2 {
                return Err(CliError::Config("collapse needs ≥ 2 lengths, x_max > 0, n_points ≥ 2".into()));
            }
        }
        Ok(())
    }

    /// Canonical JSON of the resolved configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
