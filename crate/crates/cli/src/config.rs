//! Scenario configuration, a single JSON document.

use std::collections::BTreeMap;

use pmme_core::kernels::MemoryKernel;
use pmme_core::laplace::TalbotConfig;
use pmme_core::linalg::{c, CMatrix};
use pmme_core::liouville::{build_gksl_generator, BlochVector, DensityMatrix, Superoperator};
use pmme_core::models::{appendix_generator, dephasing_generator};
use pmme_core::solver::{InversionMethod, SolverConfig, TimeGrid, VolterraOrder};
use pmme_core::witnesses::DEFAULT_DIVISIBILITY_DT;
use serde::{Deserialize, Serialize};

use crate::registry;

/// A config problem, with the offending key path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Semantic { path: String, message: String },
}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Semantic { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelSpec,
    pub kernel: KernelSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub initial_states: Vec<StateSpec>,
    #[serde(default)]
    pub witnesses: WitnessFlags,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Dephasing {
        #[serde(default = "default_dephasing_rate")]
        a: f64,
    },
    AmplitudeDamping {
        #[serde(default = "default_dissipation_rate")]
        gamma0: f64,
        #[serde(rename = "N", default = "default_mean_excitation")]
        mean_excitation: f64,
    },
    Custom {
        #[serde(default)]
        hamiltonian: Option<MatrixSpec>,
        #[serde(default)]
        dissipators: Vec<DissipatorSpec>,
    },
}

fn default_dephasing_rate() -> f64 {
    1.0
}

fn default_dissipation_rate() -> f64 {
    1.0
}

fn default_mean_excitation() -> f64 {
    0.5
}

impl ModelSpec {
    pub fn type_name(&self) -> &'static str {
        match self {
            ModelSpec::Dephasing { .. } => "dephasing",
            ModelSpec::AmplitudeDamping { .. } => "amplitude_damping",
            ModelSpec::Custom { .. } => "custom",
        }
    }
}

/// A matrix entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// Row-major matrix.
pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorSpec {
    pub operator: MatrixSpec,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Bloch([f64; 3]),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessFlags {
    pub sigma: bool,
    pub blp: bool,
    pub divisibility: bool,
    pub rates: bool,
    pub cp_condition: bool,
    /// Cross-check the spectral solution against the Volterra solver.
    pub volterra: bool,
}

impl Default for WitnessFlags {
    fn default() -> Self {
        Self { sigma: true, blp: true, divisibility: true, rates: true, cp_condition: true, volterra: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InversionSpec {
    #[default]
    Auto,
    PartialFractions,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VolterraOrderSpec {
    Trapezoidal,
    #[default]
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub inversion: InversionSpec,
    pub talbot_nodes: usize,
    pub talbot_scale: f64,
    pub talbot_aspect: f64,
    pub talbot_shift: f64,
    pub talbot_tol: f64,
    pub volterra_step: f64,
    pub volterra_order: VolterraOrderSpec,
    pub volterra_tol: f64,
    /// Step of the intermediate maps in the divisibility witness.
    pub divisibility_dt: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            inversion: InversionSpec::Auto,
            talbot_nodes: s.talbot.nodes,
            talbot_scale: s.talbot.scale,
            talbot_aspect: s.talbot.aspect,
            talbot_shift: s.talbot.shift,
            talbot_tol: s.talbot.tol,
            volterra_step: s.volterra_step,
            volterra_order: VolterraOrderSpec::Extrapolated,
            volterra_tol: s.volterra_tol,
            divisibility_dt: DEFAULT_DIVISIBILITY_DT,
        }
    }
}

impl SolverSpec {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            inversion: match self.inversion {
                InversionSpec::Auto => InversionMethod::Auto,
                InversionSpec::PartialFractions => InversionMethod::PartialFractions,
                InversionSpec::Talbot => InversionMethod::Talbot,
            },
            talbot: TalbotConfig {
                nodes: self.talbot_nodes,
                scale: self.talbot_scale,
                aspect: self.talbot_aspect,
                shift: self.talbot_shift,
                tol: self.talbot_tol,
            },
            volterra_step: self.volterra_step,
            volterra_order: match self.volterra_order {
                VolterraOrderSpec::Trapezoidal => VolterraOrder::Trapezoidal,
                VolterraOrderSpec::Extrapolated => VolterraOrder::Extrapolated,
            },
            volterra_tol: self.volterra_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: Option<String>,
    pub plot: bool,
}

/// A validated config together with the objects it describes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub generator: Superoperator,
    pub kernel: MemoryKernel,
    pub states: Vec<DensityMatrix>,
    pub grid: TimeGrid,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.generator.dim()
    }
}

fn matrix(spec: &MatrixSpec, path: &str) -> Result<CMatrix, ConfigError> {
    let n = spec.len();
    if n == 0 || spec.iter().any(|row| row.len() != n) {
        return Err(semantic(path, "matrix must be square and non-empty"));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in spec.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let (re, im) = match *e {
                Entry::Real(x) => (x, 0.0),
                Entry::Complex([x, y]) => (x, y),
            };
            if !(re.is_finite() && im.is_finite()) {
                return Err(semantic(format!("{path}[{i}][{j}]"), "entry must be finite"));
            }
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(semantic(path, format!("must be positive, got {v}")))
    }
}

fn build_generator(model: &ModelSpec) -> Result<Superoperator, ConfigError> {
    match model {
        ModelSpec::Dephasing { a } => {
            positive("model.a", *a)?;
            Ok(dephasing_generator(*a))
        }
        ModelSpec::AmplitudeDamping { gamma0, mean_excitation } => {
            positive("model.gamma0", *gamma0)?;
            if !(mean_excitation.is_finite() && *mean_excitation >= 0.0) {
                return Err(semantic("model.N", format!("must be nonnegative, got {mean_excitation}")));
            }
            Ok(appendix_generator(*gamma0, *mean_excitation))
        }
        ModelSpec::Custom { hamiltonian, dissipators } => {
            let mut ops = Vec::with_capacity(dissipators.len());
            for (k, d) in dissipators.iter().enumerate() {
                let path = format!("model.dissipators[{k}]");
                ops.push((matrix(&d.operator, &format!("{path}.operator"))?, d.rate));
            }
            let h = match hamiltonian {
                Some(h) => matrix(h, "model.hamiltonian")?,
                None => match ops.first() {
                    Some((op, _)) => CMatrix::zeros(op.nrows(), op.nrows()),
                    None => return Err(semantic("model", "custom model needs a hamiltonian or dissipators")),
                },
            };
            build_gksl_generator(&h, &ops).map_err(|e| semantic("model", e.to_string()))
        }
    }
}

/// The stock states for qubit models: the `|±⟩` pair, as in the dephasing
/// examples.
fn default_states(dim: usize) -> Vec<DensityMatrix> {
    if dim == 2 {
        let plus = BlochVector::new(1.0, 0.0, 0.0).expect("unit vector");
        vec![DensityMatrix::from_bloch(plus), DensityMatrix::from_bloch(plus.antipode())]
    } else {
        vec![DensityMatrix::maximally_mixed(dim)]
    }
}

fn build_state(spec: &StateSpec, dim: usize, path: &str) -> Result<DensityMatrix, ConfigError> {
    match spec {
        StateSpec::Bloch([x, y, z]) => {
            if dim != 2 {
                return Err(semantic(path, format!("Bloch vectors need a qubit model, got dimension {dim}")));
            }
            let b = BlochVector::new(*x, *y, *z).map_err(|e| semantic(path, e.to_string()))?;
            Ok(DensityMatrix::from_bloch(b))
        }
        StateSpec::Matrix(m) => {
            let m = matrix(m, path)?;
            if m.nrows() != dim {
                return Err(semantic(path, format!("state has dimension {}, model has {dim}", m.nrows())));
            }
            DensityMatrix::new(m).map_err(|e| semantic(path, e.to_string()))
        }
    }
}

impl ScenarioConfig {
    /// Resolve defaults and build the scenario objects.
    pub fn resolve(mut self) -> Result<Scenario, ConfigError> {
        if self.name.trim().is_empty() {
            return Err(semantic("name", "must not be empty"));
        }
        if !(self.time.t_max.is_finite() && self.time.t_max > 0.0) {
            return Err(semantic("time.t_max", format!("must be positive, got {}", self.time.t_max)));
        }
        if self.time.steps < 2 {
            return Err(semantic("time.steps", format!("must be at least 2, got {}", self.time.steps)));
        }
        let grid = TimeGrid::new(self.time.t_max, self.time.steps).map_err(|e| semantic("time", e.to_string()))?;

        let entry = registry::kernel_entry(&self.kernel.name).ok_or_else(|| {
            let names: Vec<&str> = registry::KERNELS.iter().map(|e| e.name).collect();
            semantic("kernel.name", format!("unknown kernel `{}`; registry: {}", self.kernel.name, names.join(", ")))
        })?;
        self.kernel.params =
            registry::resolve_params(entry, &self.kernel.params).map_err(|m| semantic("kernel.params", m))?;
        let kernel = registry::build_kernel(entry.name, &self.kernel.params)
            .map_err(|e| semantic("kernel.params", e.to_string()))?;

        let generator = build_generator(&self.model)?;
        let dim = generator.dim();
        let states = if self.initial_states.is_empty() {
            default_states(dim)
        } else {
            self.initial_states
                .iter()
                .enumerate()
                .map(|(i, s)| build_state(s, dim, &format!("initial_states[{i}]")))
                .collect::<Result<_, _>>()?
        };
        if self.witnesses.blp && dim != 2 {
            return Err(semantic("witnesses.blp", "the BLP pair sampler covers qubit models only"));
        }

        let solver = self.solver.solver_config();
        solver.validate().map_err(|e| semantic("solver", e.to_string()))?;
        positive("solver.divisibility_dt", self.solver.divisibility_dt)?;
        Ok(Scenario { config: self, generator, kernel, states, grid, solver })
    }
}

/// Parse and validate a config document.
pub fn validate_config(text: &str) -> Result<Scenario, ConfigError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "model": {"type": "dephasing", "a": 1},
        "kernel": {"name": "exponential", "params": {"A": 6, "gamma": 1.1}},
        "time": {"t_max": 5, "steps": 100}
    }"#;

    #[test]
    fn minimal_config_is_valid() {
        let s = validate_config(MINIMAL).unwrap();
        assert_eq!(s.states.len(), 2);
        assert_eq!(s.config.kernel.params["A"], 6.0);
        assert!(s.config.witnesses.sigma);
        assert_eq!(s.grid.steps(), 100);
    }

    #[test]
    fn unknown_kernel_names_the_registry() {
        let text = MINIMAL.replace("\"exponential\"", "\"nonexistent\"");
        let err = validate_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("kernel.name"), "{msg}");
        assert!(msg.contains("registry") && msg.contains("damped_oscillatory"), "{msg}");
    }

    #[test]
    fn single_step_is_rejected() {
        let text = MINIMAL.replace("\"steps\": 100", "\"steps\": 1");
        assert!(matches!(validate_config(&text), Err(ConfigError::Semantic { path, .. }) if path == "time.steps"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"name\": \"minimal\",", "\"name\": \"minimal\", \"colour\": 1,");
        assert!(matches!(validate_config(&text), Err(ConfigError::Parse(_))));
        let text = MINIMAL.replace("\"a\": 1", "\"a\": 1, \"b\": 2");
        assert!(matches!(validate_config(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn custom_model_matches_builtin_amplitude_damping() {
        let text = r#"{
            "name": "custom",
            "model": {"type": "custom", "dissipators": [
                {"operator": [[0, 1], [0, 0]], "rate": 1.5},
                {"operator": [[0, 0], [1, 0]], "rate": 0.5}
            ]},
            "kernel": {"name": "appendix"},
            "time": {"t_max": 1, "steps": 10},
            "initial_states": [{"bloch": [0, 0, 1]}, {"matrix": [[0.5, [0, -0.5]], [[0, 0.5], 0.5]]}]
        }"#;
        let s = validate_config(text).unwrap();
        assert!(s.generator.max_abs_diff(&appendix_generator(1.0, 0.5)) < 1e-14);
        assert_eq!(s.states.len(), 2);
    }

    #[test]
    fn invalid_states_are_semantic_errors() {
        let text = MINIMAL.replace("\"time\"", "\"initial_states\": [{\"bloch\": [1, 1, 0]}], \"time\"");
        let err = validate_config(&text).unwrap_err();
        assert!(err.to_string().starts_with("initial_states[0]"), "{err}");
    }
}
