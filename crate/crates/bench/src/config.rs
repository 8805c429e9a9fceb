//! Experiment configuration (TOML).
//!
//! Every field has a default; an empty file runs the default benchmark.
//!
//! ```toml
//! seed = 0
//! fom_solver = "oracle"        # or "midpoint"
//! scheme = "oracle"            # reduced solves and quadrature: "oracle" or "midpoint"
//! bounds = ["standard", "alp", "hier"]
//!
//! [model]
//! kind = "msd_chain"           # or kind = "file", manifest = "model/manifest.toml"
//! n_masses = 100
//! damping = 5.0
//!
//! [train_input]
//! kind = "sinusoid"
//! frequency = 0.8
//!
//! [grid]
//! t_end = 10.0
//! n_steps = 1000
//!
//! [basis]
//! n = 10
//! n_a = 20
//! n_h = 20
//! ```

use std::path::PathBuf;

use nalgebra::DVector;
use phmor::integrators::TimeGrid;
use phmor::{InputSignal, Scheme, SolverKind, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, ParseError};
use crate::manifest::toml_parse_error;
use crate::models::MsdChain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    MsdChain(MsdChain),
    File { manifest: PathBuf },
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self::MsdChain(MsdChain::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Zero,
    Sinusoid {
        #[serde(default = "one")]
        amplitude: f64,
        /// Hz.
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Piecewise linear samples, `values[k]` holding one entry per input.
    Tabulated {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

impl InputSpec {
    pub fn sinusoid(frequency: f64) -> Self {
        Self::Sinusoid {
            amplitude: 1.0,
            frequency,
            phase: 0.0,
        }
    }

    pub fn to_signal(&self, n_inputs: usize) -> Result<InputSignal, BenchError> {
        let sig = match self {
            Self::Zero => InputSignal::zero(n_inputs),
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => InputSignal::sinusoid(*amplitude, *frequency, *phase, n_inputs)?,
            Self::Tabulated { times, values } => InputSignal::tabulated(
                times.clone(),
                values.iter().map(|v| DVector::from_column_slice(v)).collect(),
            )?,
        };
        if sig.dim() != n_inputs {
            return Err(BenchError::Config(format!(
                "input has {} channels, the model has {n_inputs}",
                sig.dim()
            )));
        }
        Ok(sig)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t_end: 10.0,
            n_steps: 1000,
        }
    }
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<TimeGrid, BenchError> {
        TimeGrid::new(self.t0, self.t_end, self.n_steps).map_err(|e| BenchError::Config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub n: usize,
    pub n_a: usize,
    pub n_h: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            n: 10,
            n_a: 20,
            n_h: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Standard,
    Alp,
    #[serde(alias = "hierarchical")]
    Hier,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Standard, BoundKind::Alp, BoundKind::Hier];

    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Alp => "alp",
            Self::Hier => "hier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Some(Self::Standard),
            "alp" => Some(Self::Alp),
            "hier" | "hierarchical" => Some(Self::Hier),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Oracle,
    Midpoint,
}

impl SolverChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Some(Self::Oracle),
            "midpoint" => Some(Self::Midpoint),
            _ => None,
        }
    }

    pub fn solver(self) -> SolverKind {
        match self {
            Self::Oracle => SolverKind::Oracle,
            Self::Midpoint => SolverKind::Midpoint,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Self::Oracle => Scheme::Oracle,
            Self::Midpoint => Scheme::Midpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    pub structural: f64,
    pub psd: f64,
    pub prop1: f64,
    /// Effectivity floor relative to `max_k ||x(t_k)||_H`.
    pub effectivity_floor: f64,
    /// Accepted shortfall `1 - eff` of a bound.
    pub rigor_slack: f64,
    /// Fail the run when a bound's effectivity drops below `1 - rigor_slack`.
    pub strict_rigor: bool,
    /// Use the decay kernel `exp(-mu (t - s))` in the standard bound.
    pub decay_kernel: bool,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            structural: t.structural,
            psd: t.psd,
            prop1: 1e-8,
            effectivity_floor: 1e-14,
            rigor_slack: 1e-6,
            strict_rigor: true,
            decay_kernel: false,
        }
    }
}

impl ToleranceSpec {
    pub fn core(&self) -> Tolerances {
        Tolerances {
            structural: self.structural,
            psd: self.psd,
        }
    }
}

/// Initial state used by the `prop1` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop1InitialState {
    #[default]
    Zero,
    /// Random combination of the primal basis vectors.
    InSpan,
    /// Random vector, generally outside the primal span.
    Random,
}

/// Where the extension `V_+` of the primal basis comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondarySource {
    /// Next POD modes of the training states.
    PodPrefix,
    /// POD modes of the training errors, H-orthogonalized against `V`.
    ErrorAugmented,
    /// Random vectors, H-orthogonalized against `V`.
    RandomComplement,
}

impl SecondarySource {
    pub const ALL: [SecondarySource; 3] = [Self::PodPrefix, Self::ErrorAugmented, Self::RandomComplement];

    pub fn name(self) -> &'static str {
        match self {
            Self::PodPrefix => "pod_prefix",
            Self::ErrorAugmented => "error_augmented",
            Self::RandomComplement => "random_complement",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prop1Spec {
    pub x0: Prop1InitialState,
    pub sources: Vec<SecondarySource>,
    /// Factor applied to `V_+` in the non-orthonormal cases.
    pub scale: f64,
    /// Also run the random-`x0`, scaled-`V_+` case outside the hypotheses.
    pub negative_control: bool,
}

impl Default for Prop1Spec {
    fn default() -> Self {
        Self {
            x0: Prop1InitialState::Zero,
            sources: SecondarySource::ALL.to_vec(),
            scale: 2.0,
            negative_control: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub train_input: InputSpec,
    pub test_input: InputSpec,
    pub grid: GridSpec,
    pub basis: BasisSpec,
    pub bounds: Vec<BoundKind>,
    pub fom_solver: SolverChoice,
    pub scheme: SolverChoice,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tolerances: ToleranceSpec,
    pub prop1: Prop1Spec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::default(),
            train_input: InputSpec::sinusoid(0.8),
            test_input: InputSpec::sinusoid(1.3),
            grid: GridSpec::default(),
            basis: BasisSpec::default(),
            bounds: BoundKind::ALL.to_vec(),
            fom_solver: SolverChoice::Oracle,
            scheme: SolverChoice::Oracle,
            out: None,
            seed: 0,
            tolerances: ToleranceSpec::default(),
            prop1: Prop1Spec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn wants(&self, kind: BoundKind) -> bool {
        self.bounds.contains(&kind)
    }

    /// Checks everything that does not need the model.
    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: String| Err(BenchError::Config(m));
        self.grid.to_grid()?;
        let BasisSpec { n, n_a, n_h } = self.basis;
        if n == 0 {
            return err("basis.n must be at least 1".into());
        }
        if self.wants(BoundKind::Alp) && n_a == 0 {
            return err("basis.n_a must be at least 1".into());
        }
        if self.wants(BoundKind::Hier) && n_h <= n {
            return err(format!("basis.n_h = {n_h} must exceed basis.n = {n}"));
        }
        if self.bounds.is_empty() {
            return err("no bounds selected".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("structural", t.structural),
            ("psd", t.psd),
            ("prop1", t.prop1),
            ("effectivity_floor", t.effectivity_floor),
            ("rigor_slack", t.rigor_slack),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return err(format!("tolerances.{name} = {v} must be positive"));
            }
        }
        let scale = self.prop1.scale;
        if !(scale.is_finite() && scale != 0.0 && scale.abs() != 1.0) {
            return err(format!("prop1.scale = {scale} must be finite with |scale| != 0, 1"));
        }
        if self.prop1.sources.is_empty() {
            return err("prop1.sources is empty".into());
        }
        for input in [&self.train_input, &self.test_input] {
            if let InputSpec::Sinusoid {
                amplitude,
                frequency,
                phase,
            } = input
            {
                if ![amplitude, frequency, phase].iter().all(|v| v.is_finite()) {
                    return err("sinusoid parameters must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Checks the basis sizes against the model order `dim`.
    pub fn validate_sizes(&self, dim: usize, prop1: bool) -> Result<(), BenchError> {
        let BasisSpec { n, n_a, n_h } = self.basis;
        let mut sizes = vec![("n", n)];
        if self.wants(BoundKind::Alp) {
            sizes.push(("n_a", n_a));
        }
        if self.wants(BoundKind::Hier) || prop1 {
            sizes.push(("n_h", n_h));
        }
        for (name, v) in sizes {
            if v > dim {
                return Err(BenchError::Config(format!(
                    "basis.{name} = {v} exceeds the model order {dim}"
                )));
            }
        }
        if prop1 && n_h <= n {
            return Err(BenchError::Config(format!(
                "prop1 mode needs basis.n_h = {n_h} > basis.n = {n}"
            )));
        }
        Ok(())
    }
}

/// Parses a configuration document without validating it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ParseError> {
    toml::from_str(text).map_err(|e| toml_parse_error(text, &e))
}

/// Reads, parses and validates a configuration file. A relative model
/// manifest path is resolved against the file's directory.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let cfg = parse_config(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = cfg;
    if let ModelSpec::File { manifest } = &mut cfg.model {
        if manifest.is_relative() {
            if let Some(dir) = path.parent() {
                *manifest = dir.join(&*manifest);
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
