//! Run configuration: JSON schema with full defaults, command-line
//! overrides, and validation into core types. An empty config object (or no
//! config file at all) yields the reference setup: omega=1, mu=0.1,
//! gamma=0.01, T=5, M=10, epsilon=1e-3, h0=1, c=1.1, d=0.5, stuck_limit=20,
//! n_partition=20, H gate, default initial controls.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex;
use serde::Deserialize;

use qugrape::{
    default_initial_controls, gate_h, gate_x, CMat2, ControlGridF64, GaussianFilter,
    OptimizerConfigF64, PiecewiseControlsF64, QuadratureConfig, SpectralDensityF64,
    SystemParamsF64,
};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    system: SystemSection,
    grid: GridSection,
    gate: GateChoice,
    optimizer: OptimizerSection,
    quadrature: QuadratureSection,
    initial_controls: ControlsChoice,
    spectrum: SpectrumSection,
    propagate: PropagateSection,
    grad_check: GradCheckSection,
    outputs: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SystemSection {
    omega: f64,
    mu: f64,
    gamma: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            omega: 1.0,
            mu: 0.1,
            gamma: 0.01,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    total_time: f64,
    intervals: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            total_time: 5.0,
            intervals: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GateChoice {
    Named(String),
    Explicit {
        re: [[f64; 2]; 2],
        im: [[f64; 2]; 2],
    },
}

impl Default for GateChoice {
    fn default() -> Self {
        GateChoice::Named("H".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptimizerSection {
    initial_step: f64,
    growth: f64,
    shrink: f64,
    epsilon: f64,
    stuck_limit: usize,
    max_iter: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            initial_step: 1.0,
            growth: 1.1,
            shrink: 0.5,
            epsilon: 1e-3,
            stuck_limit: 20,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct QuadratureSection {
    n_partition: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        QuadratureSection { n_partition: 20 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ControlsChoice {
    Named(String),
    Explicit { u: Vec<f64>, w: Vec<f64> },
}

impl Default for ControlsChoice {
    fn default() -> Self {
        ControlsChoice::Named("default".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpectrumSection {
    betas: Vec<f64>,
    filter: Option<FilterSection>,
    omega_max: f64,
    samples: usize,
    totals_omega_max: f64,
    totals_nodes: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            betas: vec![0.8, 1.0],
            filter: Some(FilterSection::default()),
            omega_max: 20.0,
            samples: 401,
            totals_omega_max: 50.0,
            totals_nodes: 2001,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FilterSection {
    beta: f64,
    center: f64,
    variance: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            beta: 0.8,
            center: 5.0,
            variance: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PropagateSection {
    samples_per_interval: usize,
}

impl Default for PropagateSection {
    fn default() -> Self {
        PropagateSection {
            samples_per_interval: 20,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GradCheckSection {
    fd_step: f64,
}

impl Default for GradCheckSection {
    fn default() -> Self {
        GradCheckSection { fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    directory: PathBuf,
    svg: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            svg: true,
        }
    }
}

/// Command-line overrides that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub gate: Option<String>,
    pub seed_controls: Option<String>,
    pub n_partition: Option<usize>,
}

/// Fully validated run setup in core types.
#[derive(Debug)]
pub struct RunConfig {
    pub params: SystemParamsF64,
    pub grid: ControlGridF64,
    pub gate_unitary: CMat2<f64>,
    pub optimizer: OptimizerConfigF64,
    pub quad: QuadratureConfig,
    pub initial: PiecewiseControlsF64,
    pub spectrum_curves: Vec<(String, SpectralDensityF64)>,
    pub spectrum_omega_max: f64,
    pub spectrum_samples: usize,
    pub totals_omega_max: f64,
    pub totals_nodes: usize,
    pub samples_per_interval: usize,
    pub fd_step: f64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

/// Seed-controls file: either bare vectors or a full optimize summary.
#[derive(Debug, Deserialize)]
struct SeedVectors {
    u: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct SeedSummary {
    controls: SeedVectors,
}

pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let raw: RawConfig = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))?
        }
        None => RawConfig::default(),
    };
    validate(raw, overrides)
}

fn validate(raw: RawConfig, overrides: &Overrides) -> Result<RunConfig> {
    let params = SystemParamsF64::new(raw.system.omega, raw.system.mu, raw.system.gamma)
        .map_err(|e| anyhow!("config system: {e}"))?;
    let grid = ControlGridF64::uniform(raw.grid.total_time, raw.grid.intervals)
        .map_err(|e| anyhow!("config grid: {e}"))?;

    let gate_choice = match &overrides.gate {
        Some(name) => GateChoice::Named(name.clone()),
        None => raw.gate.clone(),
    };
    let gate_unitary = gate_matrix(&gate_choice)?;

    let optimizer = OptimizerConfigF64 {
        initial_step: raw.optimizer.initial_step,
        growth: raw.optimizer.growth,
        shrink: raw.optimizer.shrink,
        epsilon: raw.optimizer.epsilon,
        stuck_limit: raw.optimizer.stuck_limit,
        max_iter: raw.optimizer.max_iter,
    };
    optimizer
        .validate()
        .map_err(|e| anyhow!("config optimizer: {e}"))?;

    let n_partition = overrides.n_partition.unwrap_or(raw.quadrature.n_partition);
    let quad = QuadratureConfig::new(n_partition).map_err(|e| anyhow!("config quadrature: {e}"))?;

    let controls_choice = match &overrides.seed_controls {
        Some(s) if s == "default" => ControlsChoice::Named("default".into()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading seed controls {path}"))?;
            let vectors =
                parse_seed(&text).with_context(|| format!("parsing seed controls {path}"))?;
            ControlsChoice::Explicit {
                u: vectors.u,
                w: vectors.w,
            }
        }
        None => raw.initial_controls.clone(),
    };
    let initial = match controls_choice {
        ControlsChoice::Named(name) if name == "default" => default_initial_controls(&grid),
        ControlsChoice::Named(name) => {
            bail!("config initial_controls: unknown preset {name:?} (expected \"default\")")
        }
        ControlsChoice::Explicit { u, w } => PiecewiseControlsF64::new(grid.clone(), u, w)
            .map_err(|e| anyhow!("config initial_controls: {e}"))?,
    };

    let mut spectrum_curves = Vec::new();
    for beta in &raw.spectrum.betas {
        let density =
            SpectralDensityF64::planck(*beta).map_err(|e| anyhow!("config spectrum.betas: {e}"))?;
        spectrum_curves.push((format!("planck_beta_{beta}"), density));
    }
    if let Some(f) = &raw.spectrum.filter {
        let filter = GaussianFilter::new(f.center, f.variance)
            .map_err(|e| anyhow!("config spectrum.filter: {e}"))?;
        let density = SpectralDensityF64::filtered(f.beta, filter)
            .map_err(|e| anyhow!("config spectrum.filter: {e}"))?;
        spectrum_curves.push((format!("filtered_beta_{}", f.beta), density));
    }
    if spectrum_curves.is_empty() {
        bail!("config spectrum: needs at least one curve (betas or filter)");
    }
    if !raw.spectrum.omega_max.is_finite() || raw.spectrum.omega_max <= 0.0 {
        bail!(
            "config spectrum.omega_max: must be positive, got {}",
            raw.spectrum.omega_max
        );
    }
    if raw.spectrum.samples < 2 {
        bail!("config spectrum.samples: must be at least 2");
    }
    if !raw.spectrum.totals_omega_max.is_finite() || raw.spectrum.totals_omega_max <= 0.0 {
        bail!(
            "config spectrum.totals_omega_max: must be positive, got {}",
            raw.spectrum.totals_omega_max
        );
    }
    if raw.spectrum.totals_nodes < 2 {
        bail!("config spectrum.totals_nodes: must be at least 2");
    }
    if raw.propagate.samples_per_interval == 0 {
        bail!("config propagate.samples_per_interval: must be at least 1");
    }
    if !raw.grad_check.fd_step.is_finite() || raw.grad_check.fd_step <= 0.0 {
        bail!(
            "config grad_check.fd_step: must be positive, got {}",
            raw.grad_check.fd_step
        );
    }

    Ok(RunConfig {
        params,
        grid,
        gate_unitary,
        optimizer,
        quad,
        initial,
        spectrum_curves,
        spectrum_omega_max: raw.spectrum.omega_max,
        spectrum_samples: raw.spectrum.samples,
        totals_omega_max: raw.spectrum.totals_omega_max,
        totals_nodes: raw.spectrum.totals_nodes,
        samples_per_interval: raw.propagate.samples_per_interval,
        fd_step: raw.grad_check.fd_step,
        out_dir: overrides.out.clone().unwrap_or(raw.outputs.directory),
        svg: raw.outputs.svg,
    })
}

fn gate_matrix(choice: &GateChoice) -> Result<CMat2<f64>> {
    match choice {
        GateChoice::Named(name) => match name.as_str() {
            "H" | "h" => Ok(gate_h::<f64>()),
            "X" | "x" => Ok(gate_x::<f64>()),
            other => bail!("config gate: unknown gate {other:?} (expected \"H\" or \"X\")"),
        },
        GateChoice::Explicit { re, im } => {
            let mut m = CMat2::<f64>::zero();
            for i in 0..2 {
                for j in 0..2 {
                    m.0[i][j] = Complex::new(re[i][j], im[i][j]);
                }
            }
            // reject non-unitary matrices up front with the core diagnostic
            qugrape::unitary_to_bloch_rotation(&m).map_err(|e| anyhow!("config gate: {e}"))?;
            Ok(m)
        }
    }
}

fn parse_seed(text: &str) -> Result<SeedVectors> {
    if let Ok(v) = serde_json::from_str::<SeedVectors>(text) {
        return Ok(v);
    }
    let summary: SeedSummary = serde_json::from_str(text).context(
        "expected {\"u\": [...], \"w\": [...]} or an optimize summary with a \"controls\" object",
    )?;
    Ok(summary.controls)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_str(text: &str) -> Result<RunConfig> {
        let raw: RawConfig = serde_json::from_str(text)?;
        validate(raw, &Overrides::default())
    }

    #[test]
    fn empty_object_yields_reference_defaults() {
        let config = from_str("{}").unwrap();
        assert_eq!(config.params.omega, 1.0);
        assert_eq!(config.params.mu, 0.1);
        assert_eq!(config.params.gamma, 0.01);
        assert_eq!(config.grid.total_time(), 5.0);
        assert_eq!(config.grid.intervals(), 10);
        assert_eq!(config.optimizer.epsilon, 1e-3);
        assert_eq!(config.optimizer.initial_step, 1.0);
        assert_eq!(config.optimizer.growth, 1.1);
        assert_eq!(config.optimizer.shrink, 0.5);
        assert_eq!(config.optimizer.stuck_limit, 20);
        assert_eq!(config.quad.n_partition, 20);
        assert_eq!(config.gate_unitary, gate_h::<f64>());
        assert_eq!(config.initial, default_initial_controls(&config.grid));
        assert_eq!(config.spectrum_curves.len(), 3);
        assert!(config.svg);
    }

    #[test]
    fn named_gate_and_overrides() {
        let config = from_str(r#"{"gate": "X"}"#).unwrap();
        assert_eq!(config.gate_unitary, gate_x::<f64>());

        let raw: RawConfig = serde_json::from_str("{}").unwrap();
        let config = validate(
            raw,
            &Overrides {
                gate: Some("X".into()),
                n_partition: Some(80),
                out: Some(PathBuf::from("elsewhere")),
                seed_controls: None,
            },
        )
        .unwrap();
        assert_eq!(config.gate_unitary, gate_x::<f64>());
        assert_eq!(config.quad.n_partition, 80);
        assert_eq!(config.out_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn negative_gamma_is_rejected_with_field_name() {
        let err = from_str(r#"{"system": {"gamma": -1}}"#).unwrap_err();
        let text = format!("{err:#}");
        assert!(text.contains("gamma"), "{text}");
    }

    #[test]
    fn unknown_fields_and_bad_gates_are_rejected() {
        assert!(from_str(r#"{"sytem": {}}"#).is_err());
        assert!(from_str(r#"{"gate": "Z"}"#).is_err());
        assert!(from_str(r#"{"optimizer": {"shrink": 1.5}}"#).is_err());
        assert!(from_str(r#"{"initial_controls": {"u": [1.0], "w": []}}"#).is_err());
    }

    #[test]
    fn explicit_unitary_gate_must_be_unitary() {
        let ok = from_str(
            r#"{"gate": {"re": [[0.0, 1.0], [1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}}"#,
        )
        .unwrap();
        assert_eq!(ok.gate_unitary, gate_x::<f64>());
        let err = from_str(
            r#"{"gate": {"re": [[0.0, 2.0], [2.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}}"#,
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("unitary"));
    }

    #[test]
    fn explicit_controls_are_validated_against_grid() {
        let config = from_str(
            r#"{"grid": {"total_time": 2.0, "intervals": 2},
                "initial_controls": {"u": [0.5, -0.5], "w": [0.1, 0.2]}}"#,
        )
        .unwrap();
        assert_eq!(config.initial.u, vec![0.5, -0.5]);
        assert_eq!(config.initial.w, vec![0.1, 0.2]);
    }

    #[test]
    fn seed_file_accepts_bare_vectors_and_summaries() {
        let bare: SeedVectors = parse_seed(r#"{"u": [1.0], "w": [0.5]}"#).unwrap();
        assert_eq!(bare.u, vec![1.0]);
        let summary = parse_seed(
            r#"{"stop_reason": "threshold", "controls": {"t": [0.0], "u": [2.0], "w": [0.25], "n": [0.0625]}}"#,
        )
        .unwrap();
        assert_eq!(summary.u, vec![2.0]);
        assert_eq!(summary.w, vec![0.25]);
        assert!(parse_seed("[1, 2]").is_err());
    }
}
