//! Command-line driver. Loads a JSON run configuration (all fields
//! defaulted), dispatches to one of five workflows, and writes CSV/JSON
//! results plus static SVG plots into the output directory. Outputs are
//! byte-deterministic for a fixed config.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{load_config, Overrides, RunConfig};
use output::{fmt_float, staircase, write_csv, write_json, write_text, Plot, Series, PALETTE};

use qugrape::{
    adaptive_grape, canonical_basis, choi_from_affine, compose_affine_map, cptp_report,
    finite_difference_gradient, kraus_from_choi, max_abs_component_error, objective_gradient,
    propagate_dense, relative_l2_error, stiefel_embedding, total_density, GateProblemF64,
    PiecewiseControlsF64, DEFAULT_RANK_TOL,
};

#[derive(Parser)]
#[command(
    name = "qugrape",
    version,
    about = "Gate synthesis for an open two-level quantum system by coherent and incoherent controls"
)]
struct Cli {
    /// JSON configuration file; omitted means built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config file)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Target gate: X or H (overrides the config file)
    #[arg(long, global = true)]
    gate: Option<String>,

    /// Initial controls: "default" or a path to JSON with {"u": [...], "w": [...]}
    /// (an optimize summary.json also works)
    #[arg(long, global = true)]
    seed_controls: Option<String>,

    /// Trapezoid nodes for the gradient quadrature (overrides the config file)
    #[arg(long, global = true)]
    n_partition: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive gradient search for the configured gate
    Optimize,
    /// Integrate the four canonical initial states under the configured controls
    Propagate,
    /// Compare the analytic gradient against central finite differences
    GradCheck,
    /// Reconstruct the channel of the configured controls: Choi, Kraus, Stiefel
    Channel,
    /// Tabulate photon spectral densities and their integrals
    Spectrum,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let overrides = Overrides {
        out: cli.out,
        gate: cli.gate,
        seed_controls: cli.seed_controls,
        n_partition: cli.n_partition,
    };
    let config = load_config(cli.config.as_deref(), &overrides)?;
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating {}", config.out_dir.display()))?;
    match cli.command {
        Command::Optimize => optimize(&config),
        Command::Propagate => propagate(&config),
        Command::GradCheck => grad_check(&config),
        Command::Channel => channel(&config),
        Command::Spectrum => spectrum(&config),
    }
}

fn gate_problem(config: &RunConfig) -> Result<GateProblemF64> {
    GateProblemF64::for_gate(
        config.params,
        config.grid.clone(),
        &config.gate_unitary,
        canonical_basis().to_vec(),
    )
    .map_err(Into::into)
}

#[derive(Serialize)]
struct ControlsJson {
    t: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
    n: Vec<f64>,
}

impl ControlsJson {
    fn from_controls(controls: &PiecewiseControlsF64) -> Self {
        let m = controls.grid.intervals();
        ControlsJson {
            t: controls.grid.breakpoints()[..m].to_vec(),
            u: controls.u.clone(),
            w: controls.w.clone(),
            n: controls.n_values(),
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary {
    stop_reason: String,
    iterations: usize,
    final_objective: f64,
    controls: ControlsJson,
}

fn optimize(config: &RunConfig) -> Result<()> {
    let problem = gate_problem(config)?;
    let result = adaptive_grape(&problem, &config.initial, &config.optimizer, &config.quad)?;

    let rows: Vec<Vec<String>> = result
        .history
        .iter()
        .map(|rec| {
            vec![
                rec.iteration.to_string(),
                fmt_float(rec.objective),
                fmt_float(rec.grad_norm),
                fmt_float(rec.step),
                rec.accepted.to_string(),
            ]
        })
        .collect();
    write_csv(
        &config.out_dir.join("convergence.csv"),
        &["l", "objective", "grad_norm", "step", "accepted"],
        &rows,
    )?;

    let controls = ControlsJson::from_controls(&result.controls);
    let rows: Vec<Vec<String>> = (0..controls.t.len())
        .map(|k| {
            vec![
                fmt_float(controls.t[k]),
                fmt_float(controls.u[k]),
                fmt_float(controls.n[k]),
            ]
        })
        .collect();
    write_csv(
        &config.out_dir.join("controls.csv"),
        &["t", "u", "n"],
        &rows,
    )?;

    write_json(
        &config.out_dir.join("summary.json"),
        &OptimizeSummary {
            stop_reason: result.stop_reason.to_string(),
            iterations: result.history.len(),
            final_objective: result.final_objective,
            controls,
        },
    )?;

    if config.svg {
        let breakpoints = result.controls.grid.breakpoints();
        let plot = Plot {
            title: "optimized piecewise-constant controls".into(),
            x_label: "t".into(),
            y_label: "control value".into(),
            log_y: false,
            series: vec![
                Series {
                    label: "u (coherent)".into(),
                    color: PALETTE[0].into(),
                    points: staircase(breakpoints, &result.controls.u),
                },
                Series {
                    label: "n = w^2 (incoherent)".into(),
                    color: PALETTE[1].into(),
                    points: staircase(breakpoints, &result.controls.n_values()),
                },
            ],
        };
        write_text(&config.out_dir.join("controls.svg"), &plot.svg())?;

        let objective_points: Vec<(f64, f64)> = result
            .history
            .iter()
            .map(|rec| (rec.iteration as f64, rec.objective))
            .collect();
        let grad_points: Vec<(f64, f64)> = result
            .history
            .iter()
            .map(|rec| (rec.iteration as f64, rec.grad_norm))
            .collect();
        let plot = Plot {
            title: "optimization convergence".into(),
            x_label: "iteration".into(),
            y_label: "value (log scale)".into(),
            log_y: true,
            series: vec![
                Series {
                    label: "objective".into(),
                    color: PALETTE[0].into(),
                    points: objective_points,
                },
                Series {
                    label: "gradient norm".into(),
                    color: PALETTE[1].into(),
                    points: grad_points,
                },
            ],
        };
        write_text(&config.out_dir.join("convergence.svg"), &plot.svg())?;
    }

    println!(
        "optimize: stop_reason={} iterations={} final_objective={:.6e} -> {}",
        result.stop_reason,
        result.history.len(),
        result.final_objective,
        config.out_dir.display()
    );
    Ok(())
}

fn propagate(config: &RunConfig) -> Result<()> {
    for (index, state) in canonical_basis::<f64>().iter().enumerate() {
        let trajectory = propagate_dense(
            &config.params,
            &config.initial,
            state,
            config.samples_per_interval,
        )?;
        let rows: Vec<Vec<String>> = trajectory
            .iter()
            .map(|(t, r)| {
                let v = r.vec();
                vec![
                    fmt_float(*t),
                    fmt_float(v.x()),
                    fmt_float(v.y()),
                    fmt_float(v.z()),
                ]
            })
            .collect();
        write_csv(
            &config.out_dir.join(format!("trajectory_{}.csv", index + 1)),
            &["t", "r_x", "r_y", "r_z"],
            &rows,
        )?;
    }
    println!(
        "propagate: 4 trajectories x {} samples/interval -> {}",
        config.samples_per_interval,
        config.out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct GradCheckReport {
    n_partition: usize,
    fd_step: f64,
    rel_error_l2: f64,
    max_abs_component_error: f64,
}

fn grad_check(config: &RunConfig) -> Result<()> {
    let problem = gate_problem(config)?;
    let analytic = objective_gradient(&problem, &config.initial, &config.quad)?;
    let reference = finite_difference_gradient(&problem, &config.initial, config.fd_step)?;
    let report = GradCheckReport {
        n_partition: config.quad.n_partition,
        fd_step: config.fd_step,
        rel_error_l2: relative_l2_error(&analytic, &reference),
        max_abs_component_error: max_abs_component_error(&analytic, &reference),
    };
    write_json(&config.out_dir.join("grad_check.json"), &report)?;
    println!(
        "grad-check: rel_error_l2={:.3e} max_abs={:.3e} -> {}",
        report.rel_error_l2,
        report.max_abs_component_error,
        config.out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ComplexMatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn complex_json<const C: usize>(rows: &[[num_complex::Complex<f64>; C]]) -> ComplexMatrixJson {
    ComplexMatrixJson {
        re: rows
            .iter()
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect(),
        im: rows
            .iter()
            .map(|r| r.iter().map(|z| z.im).collect())
            .collect(),
    }
}

#[derive(Serialize)]
struct ChannelReport {
    choi: ComplexMatrixJson,
    min_eigenvalue: f64,
    tp_residual: f64,
    kraus: Vec<ComplexMatrixJson>,
    stiefel: ComplexMatrixJson,
}

fn channel(config: &RunConfig) -> Result<()> {
    let map = compose_affine_map(&config.params, &config.initial)?;
    let choi = choi_from_affine(&map);
    let report = cptp_report(&choi)?;
    let kraus = kraus_from_choi(&choi, DEFAULT_RANK_TOL)?;
    let stiefel = stiefel_embedding(&kraus)?;
    write_json(
        &config.out_dir.join("channel.json"),
        &ChannelReport {
            choi: complex_json(&choi.matrix.0),
            min_eigenvalue: report.min_eigenvalue,
            tp_residual: report.tp_residual,
            kraus: kraus.iter().map(|k| complex_json(&k.0)).collect(),
            stiefel: complex_json(&stiefel.rows),
        },
    )?;
    println!(
        "channel: {} Kraus operators, min_eigenvalue={:.3e}, tp_residual={:.3e} -> {}",
        kraus.len(),
        report.min_eigenvalue,
        report.tp_residual,
        config.out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct CurveTotal {
    curve: String,
    total: f64,
}

#[derive(Serialize)]
struct SpectrumSummary {
    omega_max: f64,
    nodes: usize,
    totals: Vec<CurveTotal>,
}

fn spectrum(config: &RunConfig) -> Result<()> {
    let samples = config.spectrum_samples;
    let omegas: Vec<f64> = (0..samples)
        .map(|j| config.spectrum_omega_max * j as f64 / (samples - 1) as f64)
        .collect();

    let mut header = vec!["omega".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (name, density) in &config.spectrum_curves {
        header.push(name.clone());
        let column = omegas
            .iter()
            .map(|&omega| density.eval(omega))
            .collect::<qugrape::Result<Vec<f64>>>()?;
        columns.push(column);
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = omegas
        .iter()
        .enumerate()
        .map(|(j, &omega)| {
            let mut row = vec![fmt_float(omega)];
            row.extend(columns.iter().map(|c| fmt_float(c[j])));
            row
        })
        .collect();
    write_csv(&config.out_dir.join("spectrum.csv"), &header_refs, &rows)?;

    if config.svg {
        let series = config
            .spectrum_curves
            .iter()
            .zip(&columns)
            .enumerate()
            .map(|(i, ((name, _), column))| Series {
                label: name.clone(),
                color: PALETTE[i % PALETTE.len()].into(),
                points: omegas.iter().copied().zip(column.iter().copied()).collect(),
            })
            .collect();
        let plot = Plot {
            title: "photon spectral density".into(),
            x_label: "omega".into(),
            y_label: "n(omega)".into(),
            log_y: false,
            series,
        };
        write_text(&config.out_dir.join("spectrum.svg"), &plot.svg())?;
    }

    let mut totals = Vec::new();
    for (name, density) in &config.spectrum_curves {
        totals.push(CurveTotal {
            curve: name.clone(),
            total: total_density(density, config.totals_omega_max, config.totals_nodes)?,
        });
    }
    write_json(
        &config.out_dir.join("spectrum.json"),
        &SpectrumSummary {
            omega_max: config.totals_omega_max,
            nodes: config.totals_nodes,
            totals,
        },
    )?;
    println!(
        "spectrum: {} curves x {} samples -> {}",
        config.spectrum_curves.len(),
        samples,
        config.out_dir.display()
    );
    Ok(())
}
