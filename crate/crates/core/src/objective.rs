//! Gate-generation objective in Bloch form.
//!
//! The figure of merit is the mean squared Hilbert-Schmidt distance between
//! the evolved basis states and the gate-rotated targets,
//! F = (1/2N) sum_j |r_j(T) - R_U r_j(0)|^2. Lower is better; 0 means the
//! gate is realized exactly on the chosen basis. F is bounded by 2 since all
//! vectors live in the unit ball.

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::model::{BlochState, DensityMatrix, GateTarget, SystemParams};
use crate::propagator::{interval_maps, AffineBlochMap, ControlGrid, PiecewiseControls};
use crate::scalar::Real;

/// A gate-synthesis problem: system, time grid, target gate, and the basis
/// states the gate action is matched on.
#[derive(Clone, Debug, PartialEq)]
pub struct GateProblem<T> {
    pub params: SystemParams<T>,
    pub grid: ControlGrid<T>,
    pub target: GateTarget<T>,
    pub basis: Vec<BlochState<T>>,
}

impl<T: Real> GateProblem<T> {
    pub fn new(
        params: SystemParams<T>,
        grid: ControlGrid<T>,
        target: GateTarget<T>,
        basis: Vec<BlochState<T>>,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyInput);
        }
        if basis.len() != target.target_bloch.len() {
            return Err(Error::BasisTargetMismatch {
                basis: basis.len(),
                targets: target.target_bloch.len(),
            });
        }
        Ok(GateProblem {
            params,
            grid,
            target,
            basis,
        })
    }

    /// Convenience constructor: builds the rotated targets from a unitary.
    pub fn for_gate(
        params: SystemParams<T>,
        grid: ControlGrid<T>,
        unitary: &crate::linalg::CMat2<T>,
        basis: Vec<BlochState<T>>,
    ) -> Result<Self> {
        let target = crate::model::gate_targets(unitary, &basis)?;
        Self::new(params, grid, target, basis)
    }

    pub(crate) fn check_controls(&self, controls: &PiecewiseControls<T>) -> Result<()> {
        if controls.grid != self.grid {
            return Err(Error::GridConflict);
        }
        Ok(())
    }
}

/// Hilbert-Schmidt distance Tr((rho1 - rho2)^2); equals |r1 - r2|^2 / 2 in
/// Bloch coordinates.
pub fn hs_distance<T: Real>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> T {
    let d = rho1.matrix().sub(rho2.matrix());
    d.mul(&d).trace().re
}

/// Mean squared Bloch distance between the images of two affine maps over a
/// state set: D = (1/N) sum_j |map1(r_j) - map2(r_j)|^2 / 2.
pub fn map_distance<T: Real>(
    map1: &AffineBlochMap<T>,
    map2: &AffineBlochMap<T>,
    states: &[BlochState<T>],
) -> Result<T> {
    if states.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut acc = T::zero();
    for s in states {
        let d = map1.apply(s.vec()) - map2.apply(s.vec());
        acc = acc + d.norm_sq();
    }
    Ok(acc * T::of(0.5) / T::from_usize(states.len()).unwrap())
}

/// Final Bloch vectors of all basis states under the given controls, sharing
/// one set of per-interval transition maps.
pub(crate) fn final_states<T: Real>(
    problem: &GateProblem<T>,
    controls: &PiecewiseControls<T>,
) -> Result<Vec<Vec3<T>>> {
    let maps = interval_maps(&problem.params, controls)?;
    Ok(problem
        .basis
        .iter()
        .map(|s| {
            let mut r = s.vec();
            for (e, g) in &maps {
                r = e.apply(r) + *g;
            }
            r
        })
        .collect())
}

/// Objective F = (1/2N) sum_j |r_j(T) - target_j|^2, in [0, 2].
pub fn gate_objective<T: Real>(
    problem: &GateProblem<T>,
    controls: &PiecewiseControls<T>,
) -> Result<T> {
    problem.check_controls(controls)?;
    let finals = final_states(problem, controls)?;
    let mut acc = T::zero();
    for (r, target) in finals.iter().zip(&problem.target.target_bloch) {
        acc = acc + (*r - *target).norm_sq();
    }
    Ok(acc * T::of(0.5) / T::from_usize(problem.basis.len()).unwrap())
}
