//! Run configuration: a flat TOML file with sections, plus validation that
//! turns it into concrete solver inputs.

use crate::errors::{CliError, CliResult};
use qhdlab::data;
use qhdlab::field::{ComplexField, RealField, VectorField};
use qhdlab::grid::SpectralGrid;
use qhdlab::law::{CapillarityLaw, NonlinearityLaw};
use qhdlab::madelung;
use qhdlab::Cplx;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// A numeric entry that is either a single value or a list. Lists are
/// consumed by harness experiments (which fit over them) and by `sweep`
/// (which expands them into cells).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    One(f64),
    Many(Vec<f64>),
}

impl ScalarOrList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ScalarOrList::One(x) => vec![*x],
            ScalarOrList::Many(v) => v.clone(),
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            ScalarOrList::One(x) => Some(*x),
            ScalarOrList::Many(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn is_list(&self) -> bool {
        matches!(self, ScalarOrList::Many(_))
    }
}

fn default_eps() -> ScalarOrList {
    ScalarOrList::One(1.0)
}

fn default_law() -> String {
    "cubic".into()
}

fn default_family() -> String {
    "constant".into()
}

fn one() -> f64 {
    1.0
}

fn default_mode() -> i32 {
    1
}

fn default_max_mode() -> i32 {
    4
}

fn default_observe() -> usize {
    1
}

fn default_normalization() -> String {
    "scaled".into()
}

fn default_branch() -> String {
    "left".into()
}

fn default_modes() -> Vec<i32> {
    vec![1, 2, 4]
}

fn default_amplitudes() -> Vec<f64> {
    vec![0.1, 0.025]
}

fn default_times() -> usize {
    4
}

fn default_tau() -> Vec<f64> {
    vec![0.5]
}

fn default_kdv_dtau() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// One of `nls`, `euler`, `qhd`, `korteweg`, `linear`, `kdv`, or
    /// `harness:<name>` with name in `euler_limit`, `wave_approx`,
    /// `dispersion`, `transonic`.
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_eps")]
    pub eps: ScalarOrList,
    #[serde(default = "default_law")]
    pub law: String,
    #[serde(default)]
    pub sigma: Option<u32>,
    #[serde(default)]
    pub strength: Option<f64>,
    /// Constant capillarity coefficient for `korteweg` runs; when omitted
    /// the dispersively scaled coefficient `eps^2 / (4 rho)` is used.
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            law: default_law(),
            sigma: None,
            strength: None,
            kappa: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub background: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_mode")]
    pub mode: i32,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_max_mode")]
    pub max_mode: i32,
    #[serde(default = "one")]
    pub speed: f64,
    /// Phase profile `phase_amplitude * sin(2 pi phase_mode x / L)` applied
    /// when a density family is lifted to a wave function.
    #[serde(default)]
    pub phase_amplitude: f64,
    #[serde(default = "default_mode")]
    pub phase_mode: i32,
    /// Velocity profile `velocity_amplitude * cos(2 pi velocity_mode x / L)`
    /// for the hydrodynamic experiments.
    #[serde(default)]
    pub velocity_amplitude: f64,
    #[serde(default = "default_mode")]
    pub velocity_mode: i32,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            family: default_family(),
            background: 0.0,
            amplitude: 1.0,
            width: 1.0,
            center: 0.0,
            mode: 1,
            radius: 1.0,
            max_mode: 4,
            speed: 1.0,
            phase_amplitude: 0.0,
            phase_mode: 1,
            velocity_amplitude: 0.0,
            velocity_mode: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: ScalarOrList,
    /// Steps between diagnostics records; 0 records only the endpoints.
    #[serde(default = "default_observe")]
    pub observe_every: usize,
    /// Steps between stored field snapshots; 0 stores only the endpoints.
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakdownSection {
    pub max_gradient: f64,
    #[serde(default)]
    pub min_density: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    /// Wavenumber indices probed by the dispersion harness.
    #[serde(default = "default_modes")]
    pub modes: Vec<i32>,
    /// `scaled` checks `omega = |k| sqrt(1 + eps^2 k^2 / 4)`;
    /// `unit` checks the unit-background relation and phase speed.
    #[serde(default = "default_normalization")]
    pub normalization: String,
    /// Deviation amplitudes for the acoustic-regime harness.
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
    /// Number of observation times for the acoustic-regime harness.
    #[serde(default = "default_times")]
    pub times: usize,
    /// Slow-time checkpoints for the transonic harness.
    #[serde(default = "default_tau")]
    pub tau: Vec<f64>,
    /// Slow-time step for the reference integrable solver.
    #[serde(default = "default_kdv_dtau")]
    pub kdv_dtau: f64,
    /// Branch evolved by the `kdv` experiment: `left` or `right`.
    #[serde(default = "default_branch")]
    pub branch: String,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            normalization: default_normalization(),
            amplitudes: default_amplitudes(),
            times: default_times(),
            tau: default_tau(),
            kdv_dtau: default_kdv_dtau(),
            branch: default_branch(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Hard floor on the density for the extended-formulation solvers;
    /// defaults to a small fraction of the initial minimum.
    #[serde(default)]
    pub density_floor: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub data: DataSection,
    pub time: TimeSection,
    #[serde(default)]
    pub breakdown: Option<BreakdownSection>,
    #[serde(default)]
    pub harness: HarnessSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnessKind {
    EulerLimit,
    WaveApprox,
    Dispersion,
    Transonic,
}

impl HarnessKind {
    pub fn name(&self) -> &'static str {
        match self {
            HarnessKind::EulerLimit => "euler_limit",
            HarnessKind::WaveApprox => "wave_approx",
            HarnessKind::Dispersion => "dispersion",
            HarnessKind::Transonic => "transonic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Nls,
    Euler,
    Qhd,
    Korteweg,
    Linear,
    Kdv,
    Harness(HarnessKind),
}

pub const EXPERIMENT_NAMES: &[&str] = &[
    "nls",
    "euler",
    "qhd",
    "korteweg",
    "linear",
    "kdv",
    "harness:euler_limit",
    "harness:wave_approx",
    "harness:dispersion",
    "harness:transonic",
];

pub const FAMILY_NAMES: &[&str] = &[
    "constant",
    "gaussian",
    "sine",
    "random",
    "compact_bump",
    "packet",
    "dark_pair",
    "vortex_lattice",
    "kdv_soliton",
];

pub const LAW_NAMES: &[&str] = &["cubic", "gp", "power"];

impl ExperimentKind {
    pub fn parse(name: &str) -> CliResult<Self> {
        let kind = match name {
            "nls" => ExperimentKind::Nls,
            "euler" => ExperimentKind::Euler,
            "qhd" => ExperimentKind::Qhd,
            "korteweg" => ExperimentKind::Korteweg,
            "linear" => ExperimentKind::Linear,
            "kdv" => ExperimentKind::Kdv,
            "harness:euler_limit" => ExperimentKind::Harness(HarnessKind::EulerLimit),
            "harness:wave_approx" => ExperimentKind::Harness(HarnessKind::WaveApprox),
            "harness:dispersion" => ExperimentKind::Harness(HarnessKind::Dispersion),
            "harness:transonic" => ExperimentKind::Harness(HarnessKind::Transonic),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown experiment kind {other:?}; expected one of {}",
                    EXPERIMENT_NAMES.join(", ")
                )))
            }
        };
        Ok(kind)
    }

    pub fn name(&self) -> String {
        match self {
            ExperimentKind::Nls => "nls".into(),
            ExperimentKind::Euler => "euler".into(),
            ExperimentKind::Qhd => "qhd".into(),
            ExperimentKind::Korteweg => "korteweg".into(),
            ExperimentKind::Linear => "linear".into(),
            ExperimentKind::Kdv => "kdv".into(),
            ExperimentKind::Harness(h) => format!("harness:{}", h.name()),
        }
    }

}

/// Everything needed to execute one run: parsed kind, grid, law, and the
/// scalar-resolved time stepping. Field construction happens in `run`.
pub struct Validated {
    pub config: RunConfig,
    pub kind: ExperimentKind,
    pub grid: Arc<SpectralGrid<f64>>,
    pub law: NonlinearityLaw<f64>,
    pub eps_values: Vec<f64>,
    pub seed: u64,
}

pub fn build_law(model: &ModelSection, dim: usize) -> CliResult<NonlinearityLaw<f64>> {
    let base = match model.law.as_str() {
        "cubic" => NonlinearityLaw::cubic(),
        "gp" | "gross_pitaevskii" => NonlinearityLaw::gross_pitaevskii(),
        "power" => {
            let sigma = model.sigma.ok_or_else(|| {
                CliError::Validation("law = \"power\" requires a sigma entry".into())
            })?;
            let law = NonlinearityLaw::power(sigma).map_err(CliError::validation_from)?;
            // embedding hypothesis for the weak formulation: sigma * dim <= 2
            qhdlab::weakqhd::check_law_admissible(&law, dim).map_err(|e| {
                CliError::Validation(format!("embedding hypothesis violated: {e}"))
            })?;
            law
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown law {other:?}; expected one of {}",
                LAW_NAMES.join(", ")
            )))
        }
    };
    Ok(match model.strength {
        Some(c) if c != 1.0 => base.with_strength(c),
        _ => base,
    })
}

/// Parses and validates a config against the gates that do not depend on
/// the initial fields: kind, grid, law, eps positivity, seed override.
pub fn validate(config: RunConfig, seed_override: Option<u64>) -> CliResult<Validated> {
    let kind = ExperimentKind::parse(&config.experiment.kind)?;
    let grid = SpectralGrid::new(config.grid.dim, config.grid.n, config.grid.length)
        .map_err(CliError::validation_from)?;
    let law = build_law(&config.model, config.grid.dim)?;

    let eps_values = config.model.eps.values();
    if eps_values.is_empty() {
        return Err(CliError::Validation("eps list must not be empty".into()));
    }
    for &e in &eps_values {
        if !(e > 0.0) || !e.is_finite() {
            return Err(CliError::Validation(format!("eps must be positive and finite, got {e}")));
        }
    }
    let dt_values = config.time.dt.values();
    if dt_values.is_empty() {
        return Err(CliError::Validation("dt list must not be empty".into()));
    }
    for &dt in &dt_values {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CliError::Validation(format!("dt must be positive and finite, got {dt}")));
        }
    }
    if !(config.time.t_end > 0.0) {
        return Err(CliError::Validation("t_end must be positive".into()));
    }

    if matches!(kind, ExperimentKind::Harness(HarnessKind::Transonic)) {
        for &e in &eps_values {
            if e >= 1.0 {
                return Err(CliError::Validation(format!(
                    "the transonic harness requires eps < 1, got {e}"
                )));
            }
        }
    }

    let seed = seed_override.unwrap_or(config.experiment.seed);
    Ok(Validated { config, kind, grid, law, eps_values, seed })
}

/// Builds the real density-like field for the configured family.
pub fn build_real_field(
    data: &DataSection,
    grid: Arc<SpectralGrid<f64>>,
    seed: u64,
) -> CliResult<RealField<f64>> {
    let f = match data.family.as_str() {
        "constant" => {
            let value = data.background + data.amplitude;
            RealField::from_fn(grid, move |_| value)
        }
        "gaussian" => {
            data::gaussian_density(grid, data.background, data.amplitude, data.width, data.center)
        }
        "sine" => data::sine_density(grid, data.background, data.amplitude, data.mode),
        "random" => data::random_band(grid, data.background, data.amplitude, data.max_mode, seed),
        "compact_bump" => data::compact_bump(grid, data.background, data.amplitude, data.radius),
        "kdv_soliton" => data::kdv_soliton(grid, data.speed),
        other => {
            return Err(CliError::Validation(format!(
                "family {other:?} does not define a density profile; expected one of \
                 constant, gaussian, sine, random, compact_bump, kdv_soliton"
            )))
        }
    };
    Ok(f)
}

/// Velocity field `velocity_amplitude * cos(2 pi velocity_mode x / L)` along
/// the first axis.
pub fn build_velocity(data: &DataSection, grid: Arc<SpectralGrid<f64>>) -> VectorField<f64> {
    let mut v = VectorField::zeros(grid.clone());
    if data.velocity_amplitude != 0.0 {
        let k = 2.0 * std::f64::consts::PI / grid.length() * data.velocity_mode as f64;
        let amp = data.velocity_amplitude;
        v.components[0] = RealField::from_fn(grid, move |p| amp * (k * p[0]).cos());
    }
    v
}

fn build_phase(data: &DataSection, grid: Arc<SpectralGrid<f64>>) -> RealField<f64> {
    if data.phase_amplitude == 0.0 {
        return RealField::zeros(grid);
    }
    let k = 2.0 * std::f64::consts::PI / grid.length() * data.phase_mode as f64;
    let amp = data.phase_amplitude;
    RealField::from_fn(grid, move |p| amp * (k * p[0]).sin())
}

/// Builds the wave-function data for an `nls` run.
pub fn build_wave_field(
    data: &DataSection,
    grid: Arc<SpectralGrid<f64>>,
    eps: f64,
    seed: u64,
) -> CliResult<ComplexField<f64>> {
    match data.family.as_str() {
        "packet" => Ok(data::gaussian_packet(grid, data.amplitude, data.width, data.center, data.mode)),
        "dark_pair" => Ok(data::dark_pair(grid)),
        "vortex_lattice" => {
            if grid.dim() != 2 {
                return Err(CliError::Validation(
                    "family \"vortex_lattice\" needs a two-dimensional grid".into(),
                ));
            }
            Ok(data::vortex_lattice(grid))
        }
        "constant" => {
            let value = data.background + data.amplitude;
            Ok(ComplexField::constant(grid, Cplx::new(value, 0.0)))
        }
        "gaussian" | "sine" | "random" | "compact_bump" => {
            let rho = build_real_field(data, grid.clone(), seed)?;
            let phi = build_phase(data, grid);
            madelung::from_hydro(&rho, &phi, eps).map_err(CliError::validation_from)
        }
        other => {
            return Err(CliError::Validation(format!(
                "family {other:?} does not define wave-function data; expected one of \
                 constant, packet, dark_pair, vortex_lattice, gaussian, sine, random, compact_bump"
            )))
        }
    }
}

/// Capillarity for a `korteweg` run: the configured constant, or the
/// dispersively scaled closure when no constant is given.
pub fn build_capillarity(model: &ModelSection, eps: f64) -> CliResult<CapillarityLaw<f64>> {
    match model.kappa {
        Some(k) => CapillarityLaw::constant(k).map_err(CliError::validation_from),
        None => CapillarityLaw::qhd_scaled(eps).map_err(CliError::validation_from),
    }
}
