//! Adaptive-step gradient descent over the piecewise-constant controls.
//!
//! Each iteration proposes v - h grad G(v) and keeps it only if the
//! objective strictly decreases; the step grows by `growth` on acceptance
//! and shrinks by `shrink` on rejection, so the logged objective sequence is
//! non-increasing by construction. The gradient at a rejected iterate is
//! unchanged and therefore cached — one gradient evaluation per distinct
//! iterate, one objective evaluation per trial.

use crate::error::{Error, Result};
use crate::gradient::{objective_gradient, ControlGradient, QuadratureConfig};
use crate::objective::{gate_objective, GateProblem};
use crate::propagator::{ControlGrid, PiecewiseControls};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Step size h of the very first trial.
    pub initial_step: T,
    /// Step multiplier on acceptance, >= 1.
    pub growth: T,
    /// Step multiplier on rejection, in (0, 1).
    pub shrink: T,
    /// Stop once the objective falls below this threshold.
    pub epsilon: T,
    /// Stop after this many consecutive rejected trials.
    pub stuck_limit: usize,
    /// Hard cap on the total number of trials.
    pub max_iter: usize,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        OptimizerConfig {
            initial_step: T::one(),
            growth: T::of(1.1),
            shrink: T::of(0.5),
            epsilon: T::of(1e-3),
            stuck_limit: 20,
            max_iter: 1000,
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.initial_step.is_finite() || self.initial_step <= T::zero() {
            return Err(Error::NotPositiveParameter {
                what: "initial step size",
                value: self.initial_step.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !self.growth.is_finite() || self.growth < T::one() {
            return Err(Error::InvalidConfig(
                "step growth factor must be >= 1".into(),
            ));
        }
        if !self.shrink.is_finite() || self.shrink <= T::zero() || self.shrink >= T::one() {
            return Err(Error::InvalidConfig(
                "step shrink factor must lie in (0, 1)".into(),
            ));
        }
        if !self.epsilon.is_finite() || self.epsilon <= T::zero() {
            return Err(Error::NotPositiveParameter {
                what: "objective threshold",
                value: self.epsilon.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.stuck_limit == 0 {
            return Err(Error::InvalidConfig("stuck limit must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One logged trial. `objective` is the value held after the trial, so the
/// sequence over records never increases; `step` is the size used by the
/// trial itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub objective: T,
    pub grad_norm: T,
    pub step: T,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Threshold,
    Stuck,
    MaxIter,
}

impl core::fmt::Display for StopReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            StopReason::Threshold => "threshold",
            StopReason::Stuck => "stuck",
            StopReason::MaxIter => "max_iter",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult<T> {
    pub controls: PiecewiseControls<T>,
    pub final_objective: T,
    pub history: Vec<IterationRecord<T>>,
    pub stop_reason: StopReason,
}

/// Reference initial guess: u_k = sin(2 pi t_{k-1} / T) and
/// n_k = exp(-4 (t_{k-1}/T - 1/2)^2) with w_k = +sqrt(n_k), both sampled at
/// the left endpoint of interval k.
pub fn default_initial_controls<T: Real>(grid: &ControlGrid<T>) -> PiecewiseControls<T> {
    let total = grid.total_time();
    let two_pi = T::PI() + T::PI();
    let m = grid.intervals();
    let mut u = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for k in 0..m {
        let x = grid.breakpoints()[k] / total;
        u.push((two_pi * x).sin());
        let centered = x - T::of(0.5);
        let n = (-T::of(4.0) * centered * centered).exp();
        w.push(n.sqrt());
    }
    PiecewiseControls::new(grid.clone(), u, w).expect("reference guess is always finite")
}

fn descend<T: Real>(
    controls: &PiecewiseControls<T>,
    grad: &ControlGradient<T>,
    step: T,
) -> Result<PiecewiseControls<T>> {
    let u = controls
        .u
        .iter()
        .zip(&grad.du)
        .map(|(&v, &g)| v - step * g)
        .collect();
    let w = controls
        .w
        .iter()
        .zip(&grad.dw)
        .map(|(&v, &g)| v - step * g)
        .collect();
    PiecewiseControls::new(controls.grid.clone(), u, w)
}

/// Runs the descent until the objective threshold, the stuck limit, or the
/// iteration cap fires — all three checked before each trial, so an init
/// already below threshold returns with an empty history.
pub fn adaptive_grape<T: Real>(
    problem: &GateProblem<T>,
    init: &PiecewiseControls<T>,
    config: &OptimizerConfig<T>,
    quad: &QuadratureConfig,
) -> Result<OptimizationResult<T>> {
    config.validate()?;
    problem.check_controls(init)?;
    let mut controls = init.clone();
    let mut objective = gate_objective(problem, &controls)?;
    if !objective.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut step = config.initial_step;
    let mut history: Vec<IterationRecord<T>> = Vec::new();
    let mut rejections = 0usize;
    let mut cached_grad: Option<ControlGradient<T>> = None;

    loop {
        let stop = if objective < config.epsilon {
            Some(StopReason::Threshold)
        } else if rejections >= config.stuck_limit {
            Some(StopReason::Stuck)
        } else if history.len() >= config.max_iter {
            Some(StopReason::MaxIter)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            return Ok(OptimizationResult {
                controls,
                final_objective: objective,
                history,
                stop_reason,
            });
        }

        if cached_grad.is_none() {
            let g = objective_gradient(problem, &controls, quad)?;
            if !g.entries_finite() {
                return Err(Error::NonFinite {
                    context: "objective gradient",
                });
            }
            cached_grad = Some(g);
        }
        let grad = cached_grad.as_ref().unwrap();
        let grad_norm = grad.norm();
        let trial = descend(&controls, grad, step)?;
        let trial_objective = gate_objective(problem, &trial)?;
        if !trial_objective.is_finite() {
            return Err(Error::NonFiniteObjective {
                iteration: history.len(),
            });
        }

        let accepted = trial_objective < objective;
        if accepted {
            controls = trial;
            objective = trial_objective;
            cached_grad = None;
            rejections = 0;
        } else {
            rejections += 1;
        }
        history.push(IterationRecord {
            iteration: history.len(),
            objective,
            grad_norm,
            step,
            accepted,
        });
        step = step
            * if accepted {
                config.growth
            } else {
                config.shrink
            };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::final_state_gradient;
    use crate::linalg::{CMat2, Mat3, Vec3};
    use crate::model::{canonical_basis, gate_h, GateTarget, SystemParams};
    use crate::propagator::propagate;
    use approx::assert_relative_eq;

    fn params() -> SystemParams<f64> {
        SystemParams::new(1.0, 0.1, 0.01).unwrap()
    }

    fn h_problem(grid: &ControlGrid<f64>) -> GateProblem<f64> {
        GateProblem::for_gate(
            params(),
            grid.clone(),
            &gate_h::<f64>(),
            canonical_basis::<f64>().to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn default_controls_match_reference_samples() {
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let c = default_initial_controls(&grid);
        assert_eq!(c.u[0], 0.0); // sin(0)

        let grid20 = ControlGrid::uniform(5.0, 20).unwrap();
        let c20 = default_initial_controls(&grid20);
        // t_5 = T/4 -> sin(pi/2); t_10 = T/2 -> Gaussian peak
        assert_relative_eq!(c20.u[5], 1.0, epsilon = 1e-15);
        assert_eq!(c20.w[10], 1.0);
        assert_relative_eq!(c20.n(10), 1.0, epsilon = 1e-15);
        // envelope symmetric about T/2 in the left-endpoint samples
        for k in 1..20 {
            assert_relative_eq!(c20.w[k], c20.w[20 - k], epsilon = 1e-12);
        }
    }

    #[test]
    fn hadamard_run_reaches_threshold() {
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let problem = h_problem(&grid);
        let init = default_initial_controls(&grid);
        let result = adaptive_grape(
            &problem,
            &init,
            &OptimizerConfig::default(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(result.stop_reason, StopReason::Threshold);
        assert!(result.final_objective < 1e-3);
        assert!(
            result.history.len() <= 100,
            "took {} iterations",
            result.history.len()
        );
        assert_eq!(
            result.final_objective,
            result.history.last().unwrap().objective
        );
        for r in &result.history {
            assert!(r.step > 1e-300);
        }
    }

    #[test]
    fn history_is_monotone_with_exact_step_coupling() {
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let problem = h_problem(&grid);
        let init = default_initial_controls(&grid);
        let config = OptimizerConfig::default();
        let result =
            adaptive_grape(&problem, &init, &config, &QuadratureConfig::default()).unwrap();
        assert!(result.history.len() >= 2);
        assert_eq!(result.history[0].step, config.initial_step);
        for pair in result.history.windows(2) {
            assert!(pair[1].objective <= pair[0].objective);
            let factor = if pair[0].accepted {
                config.growth
            } else {
                config.shrink
            };
            assert_eq!(pair[1].step, pair[0].step * factor);
            assert_eq!(pair[1].iteration, pair[0].iteration + 1);
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let problem = h_problem(&grid);
        let init = default_initial_controls(&grid);
        let config = OptimizerConfig::default();
        let quad = QuadratureConfig::default();
        let a = adaptive_grape(&problem, &init, &config, &quad).unwrap();
        let b = adaptive_grape(&problem, &init, &config, &quad).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_below_threshold_returns_immediately() {
        // target the exact reachable state so the initial objective is 0
        let p = params();
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let init = default_initial_controls(&grid);
        let basis = canonical_basis::<f64>().to_vec();
        let finals: Vec<Vec3<f64>> = basis
            .iter()
            .map(|s| propagate(&p, &init, s).unwrap().last().unwrap().vec())
            .collect();
        let mut problem = h_problem(&grid);
        problem.target.target_bloch = finals;
        let result = adaptive_grape(
            &problem,
            &init,
            &OptimizerConfig::default(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(result.stop_reason, StopReason::Threshold);
        assert!(result.history.is_empty());
        assert_eq!(result.final_objective, 0.0);
        assert_eq!(result.controls, init);
    }

    #[test]
    fn flat_objective_stops_stuck_after_exact_limit() {
        // Single interval, w = 0 (kills the w-gradient exactly), u so large
        // that any u-update below half an ulp is lost, and a target whose
        // residual is numerically orthogonal to dr(T)/du. Every trial then
        // reproduces the same controls bitwise, so every trial is rejected
        // and the stuck limit fires after exactly stuck_limit records.
        let p = params();
        let grid = ControlGrid::uniform(5.0, 1).unwrap();
        let init = PiecewiseControls::new(grid.clone(), vec![1.0e6], vec![0.0]).unwrap();
        let r0 = canonical_basis::<f64>()[0];
        let d = final_state_gradient(&p, &init, &r0, &QuadratureConfig::default())
            .unwrap()
            .du[0];
        let e = if d.x().abs() < 0.9 * d.norm() {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        // z = d x e, normalized to |z| = 0.2 -> objective 0.02
        let cross = Vec3::new(
            d.y() * e.z() - d.z() * e.y(),
            d.z() * e.x() - d.x() * e.z(),
            d.x() * e.y() - d.y() * e.x(),
        );
        let z = cross.scale(0.2 / cross.norm());
        let r_t = propagate(&p, &init, &r0).unwrap().last().unwrap().vec();
        let problem = GateProblem::new(
            p,
            grid,
            GateTarget {
                unitary: CMat2::identity(),
                rotation: Mat3::identity(),
                target_bloch: vec![r_t - z],
            },
            vec![r0],
        )
        .unwrap();
        let config = OptimizerConfig {
            epsilon: 1e-6,
            stuck_limit: 7,
            max_iter: 50,
            ..OptimizerConfig::default()
        };
        let result =
            adaptive_grape(&problem, &init, &config, &QuadratureConfig::default()).unwrap();
        assert_eq!(result.stop_reason, StopReason::Stuck);
        assert_eq!(result.history.len(), 7);
        let first = result.history[0].objective;
        assert_relative_eq!(first, 0.02, max_relative = 1e-12);
        for r in &result.history {
            assert!(!r.accepted);
            assert_eq!(r.objective, first);
        }
        assert_eq!(result.controls, init);
        assert_eq!(result.final_objective, first);
    }

    #[test]
    fn iteration_cap_fires() {
        let grid = ControlGrid::uniform(5.0, 10).unwrap();
        let problem = h_problem(&grid);
        let init = default_initial_controls(&grid);
        let config = OptimizerConfig {
            max_iter: 3,
            ..OptimizerConfig::default()
        };
        let result =
            adaptive_grape(&problem, &init, &config, &QuadratureConfig::default()).unwrap();
        assert_eq!(result.stop_reason, StopReason::MaxIter);
        assert_eq!(result.history.len(), 3);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let ok = OptimizerConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        let cases = [
            OptimizerConfig {
                initial_step: 0.0,
                ..ok
            },
            OptimizerConfig {
                initial_step: -1.0,
                ..ok
            },
            OptimizerConfig { growth: 0.99, ..ok },
            OptimizerConfig { shrink: 0.0, ..ok },
            OptimizerConfig { shrink: 1.0, ..ok },
            OptimizerConfig { epsilon: 0.0, ..ok },
            OptimizerConfig {
                stuck_limit: 0,
                ..ok
            },
            OptimizerConfig { max_iter: 0, ..ok },
        ];
        for bad in cases {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn stop_reason_display() {
        assert_eq!(StopReason::Threshold.to_string(), "threshold");
        assert_eq!(StopReason::Stuck.to_string(), "stuck");
        assert_eq!(StopReason::MaxIter.to_string(), "max_iter");
    }
}
