//! Analytic gradient of the gate objective with respect to the
//! piecewise-constant controls, plus a finite-difference oracle.
//!
//! The derivative of a matrix exponential along a direction E is the
//! integral int_0^dt exp(A s) E exp(A (dt-s)) ds, approximated here by the
//! trapezoidal rule on a shared power ladder of exp(A dt/n). The derivative
//! of the final state assembles these per-interval pieces with suffix
//! products of the remaining transition matrices (one reverse sweep, O(M)
//! matrix products).

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Matrix, Vec3};
use crate::model::{
    assemble_generator, coherent_direction, incoherent_direction, BlochState, SystemParams,
};
use crate::objective::{gate_objective, GateProblem};
use crate::propagator::{interval_maps, matrix_exponential, PiecewiseControls, COND_LIMIT};
use crate::scalar::Real;

/// Trapezoid node count for the exponential-derivative integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub n_partition: usize,
}

impl QuadratureConfig {
    pub fn new(n_partition: usize) -> Result<Self> {
        if n_partition == 0 {
            return Err(Error::InvalidConfig("n_partition must be >= 1".into()));
        }
        Ok(QuadratureConfig { n_partition })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { n_partition: 20 }
    }
}

/// Objective gradient per interval: du[k] = dF/du_k, dw[k] = dF/dw_k.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlGradient<T> {
    pub du: Vec<T>,
    pub dw: Vec<T>,
}

impl<T: Real> ControlGradient<T> {
    /// Euclidean norm over all 2M entries.
    pub fn norm(&self) -> T {
        let mut s = T::zero();
        for &x in self.du.iter().chain(&self.dw) {
            s = s + x * x;
        }
        s.sqrt()
    }

    pub fn entries_finite(&self) -> bool {
        self.du.iter().chain(&self.dw).all(|x| x.is_finite())
    }
}

/// Trapezoid approximations of int_0^dt exp(A s) E exp(A (dt-s)) ds for
/// several directions E at once, sharing one power ladder of exp(A dt/n).
fn exp_derivative_many<T: Real, const N: usize, const K: usize>(
    a: &Matrix<T, N>,
    dt: T,
    dirs: [&Matrix<T, N>; K],
    quad: &QuadratureConfig,
) -> Result<[Matrix<T, N>; K]> {
    if !dt.is_finite() || dt < T::zero() {
        return Err(Error::NegativeDuration {
            value: dt.to_f64().unwrap_or(f64::NAN),
        });
    }
    if dt == T::zero() {
        return Ok([Matrix::zero(); K]);
    }
    let n = quad.n_partition;
    let h = dt / T::from_usize(n).unwrap();
    let p = a.scale(h).expm()?;
    let mut ladder = Vec::with_capacity(n + 1);
    ladder.push(Matrix::<T, N>::identity());
    for i in 1..=n {
        let next = ladder[i - 1].mul(&p);
        ladder.push(next);
    }
    let half = T::of(0.5);
    let mut out = [Matrix::zero(); K];
    for (slot, dir) in out.iter_mut().zip(dirs) {
        let mut acc = Matrix::<T, N>::zero();
        for i in 0..=n {
            let term = ladder[i].mul(dir).mul(&ladder[n - i]);
            let weight = if i == 0 || i == n { half } else { T::one() };
            acc = acc.add(&term.scale(weight));
        }
        *slot = acc.scale(h);
    }
    Ok(out)
}

/// Directional derivative of the matrix exponential,
/// d/de exp((A + e E) dt) at e = 0, by trapezoid quadrature.
pub fn directional_exp_derivative<T: Real>(
    a: &Mat3<T>,
    dt: T,
    e: &Mat3<T>,
    quad: &QuadratureConfig,
) -> Result<Mat3<T>> {
    let [d] = exp_derivative_many(a, dt, [e], quad)?;
    Ok(d)
}

/// Per-interval derivatives of the transition pair (exp(A dt), g) with
/// respect to u_k and w_k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDerivatives<T> {
    pub d_exp_du: Mat3<T>,
    pub d_exp_dw: Mat3<T>,
    pub dg_du: Vec3<T>,
    pub dg_dw: Vec3<T>,
}

impl<T: Real> StepDerivatives<T> {
    fn zero() -> Self {
        StepDerivatives {
            d_exp_du: Mat3::zero(),
            d_exp_dw: Mat3::zero(),
            dg_du: Vec3::zero(),
            dg_dw: Vec3::zero(),
        }
    }
}

fn augment_generator<T: Real>(a: &Mat3<T>, b: &Vec3<T>) -> Matrix<T, 4> {
    let mut aug = Matrix::<T, 4>::zero();
    for i in 0..3 {
        for j in 0..3 {
            aug.0[i][j] = a.0[i][j];
        }
        aug.0[i][3] = b.0[i];
    }
    aug
}

fn embed_direction<T: Real>(e: &Mat3<T>) -> Matrix<T, 4> {
    augment_generator(e, &Vec3::zero())
}

/// Derivatives of exp(A_k dt) and of the offset g_k with respect to the two
/// control amplitudes. The w-derivatives carry the chain-rule factor 2 w_k
/// from n = w^2. Near-singular A falls back to the directional derivative of
/// the augmented exponential so no inverse is formed.
pub fn step_derivatives<T: Real>(
    params: &SystemParams<T>,
    u_k: T,
    w_k: T,
    dt: T,
    quad: &QuadratureConfig,
) -> Result<StepDerivatives<T>> {
    if !dt.is_finite() || dt < T::zero() {
        return Err(Error::NegativeDuration {
            value: dt.to_f64().unwrap_or(f64::NAN),
        });
    }
    if dt == T::zero() {
        return Ok(StepDerivatives::zero());
    }
    let gen = assemble_generator(params, u_k, w_k * w_k)?;
    let bu = coherent_direction(params);
    let bn = incoherent_direction(params);
    let [int_u, int_n] = exp_derivative_many(&gen.a, dt, [&bu, &bn], quad)?;
    let two_w = w_k + w_k;

    let (dg_du, dg_dn) = match gen.a.inverse() {
        Ok(inv) if gen.a.norm_one() * inv.norm_one() <= T::of(COND_LIMIT) => {
            let ainv_b = inv.apply(gen.b);
            let e_minus_i = matrix_exponential(&gen.a, dt)?.sub(&Mat3::identity());
            // dg/dv = (dExp/dv - (e^{A dt} - I) A^{-1} dA/dv) A^{-1} b
            let dg_du = int_u.apply(ainv_b) - e_minus_i.apply(inv.apply(bu.apply(ainv_b)));
            let dg_dn = int_n.apply(ainv_b) - e_minus_i.apply(inv.apply(bn.apply(ainv_b)));
            (dg_du, dg_dn)
        }
        _ => {
            // g is the upper-right column of exp([[A, b], [0, 0]] dt), so its
            // control derivative is the same column of that exponential's
            // directional derivative.
            let aug = augment_generator(&gen.a, &gen.b);
            let [du4, dn4] = exp_derivative_many(
                &aug,
                dt,
                [&embed_direction(&bu), &embed_direction(&bn)],
                quad,
            )?;
            (
                Vec3([du4.0[0][3], du4.0[1][3], du4.0[2][3]]),
                Vec3([dn4.0[0][3], dn4.0[1][3], dn4.0[2][3]]),
            )
        }
    };

    Ok(StepDerivatives {
        d_exp_du: int_u,
        d_exp_dw: int_n.scale(two_w),
        dg_du,
        dg_dw: dg_dn.scale(two_w),
    })
}

/// Derivatives of the final state r(T) with respect to every control entry.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalStateGradient<T> {
    pub du: Vec<Vec3<T>>,
    pub dw: Vec<Vec3<T>>,
}

fn suffix_products<T: Real>(maps: &[(Mat3<T>, Vec3<T>)]) -> Vec<Mat3<T>> {
    let m = maps.len();
    let mut suffix = vec![Mat3::identity(); m];
    for k in (0..m.saturating_sub(1)).rev() {
        suffix[k] = suffix[k + 1].mul(&maps[k + 1].0);
    }
    suffix
}

/// d r(T) / d v_k for a single initial state:
/// suffix_k (dExp_k r_{k-1} + dg_k) with suffix_k = prod_{j>k} exp(A_j dt_j).
pub fn final_state_gradient<T: Real>(
    params: &SystemParams<T>,
    controls: &PiecewiseControls<T>,
    r0: &BlochState<T>,
    quad: &QuadratureConfig,
) -> Result<FinalStateGradient<T>> {
    let maps = interval_maps(params, controls)?;
    let m = maps.len();
    let mut states = Vec::with_capacity(m + 1);
    states.push(r0.vec());
    for (e, g) in &maps {
        let last = *states.last().unwrap();
        states.push(e.apply(last) + *g);
    }
    let suffix = suffix_products(&maps);
    let mut du = Vec::with_capacity(m);
    let mut dw = Vec::with_capacity(m);
    for k in 0..m {
        let sd = step_derivatives(
            params,
            controls.u[k],
            controls.w[k],
            controls.grid.delta(k),
            quad,
        )?;
        du.push(suffix[k].apply(sd.d_exp_du.apply(states[k]) + sd.dg_du));
        dw.push(suffix[k].apply(sd.d_exp_dw.apply(states[k]) + sd.dg_dw));
    }
    Ok(FinalStateGradient { du, dw })
}

/// Gradient of the objective: dF/dv_k = (1/N) sum_j (r_j(T) - target_j) . (d r_j(T)/dv_k).
/// The per-interval step derivatives and suffix products are shared across
/// basis states.
pub fn objective_gradient<T: Real>(
    problem: &GateProblem<T>,
    controls: &PiecewiseControls<T>,
    quad: &QuadratureConfig,
) -> Result<ControlGradient<T>> {
    problem.check_controls(controls)?;
    let maps = interval_maps(&problem.params, controls)?;
    let m = maps.len();
    let nb = problem.basis.len();

    let mut trajs: Vec<Vec<Vec3<T>>> = Vec::with_capacity(nb);
    for s in &problem.basis {
        let mut states = Vec::with_capacity(m + 1);
        states.push(s.vec());
        for (e, g) in &maps {
            let last = *states.last().unwrap();
            states.push(e.apply(last) + *g);
        }
        trajs.push(states);
    }
    let residuals: Vec<Vec3<T>> = trajs
        .iter()
        .zip(&problem.target.target_bloch)
        .map(|(traj, target)| *traj.last().unwrap() - *target)
        .collect();
    let suffix = suffix_products(&maps);
    let inv_n = T::one() / T::from_usize(nb).unwrap();

    let mut du = Vec::with_capacity(m);
    let mut dw = Vec::with_capacity(m);
    for k in 0..m {
        let sd = step_derivatives(
            &problem.params,
            controls.u[k],
            controls.w[k],
            controls.grid.delta(k),
            quad,
        )?;
        let mut acc_u = T::zero();
        let mut acc_w = T::zero();
        for j in 0..nb {
            let r_before = trajs[j][k];
            let v_u = suffix[k].apply(sd.d_exp_du.apply(r_before) + sd.dg_du);
            let v_w = suffix[k].apply(sd.d_exp_dw.apply(r_before) + sd.dg_dw);
            acc_u = acc_u + residuals[j].dot(&v_u);
            acc_w = acc_w + residuals[j].dot(&v_w);
        }
        du.push(acc_u * inv_n);
        dw.push(acc_w * inv_n);
    }
    Ok(ControlGradient { du, dw })
}

/// Central finite differences of an arbitrary controls functional.
fn central_diff_all<T: Real>(
    controls: &PiecewiseControls<T>,
    step: T,
    mut f: impl FnMut(&PiecewiseControls<T>) -> Result<T>,
) -> Result<ControlGradient<T>> {
    let m = controls.grid.intervals();
    let mut du = Vec::with_capacity(m);
    let mut dw = Vec::with_capacity(m);
    let two_step = step + step;
    let mut eval = |u: Vec<T>, w: Vec<T>| -> Result<T> {
        f(&PiecewiseControls::new(controls.grid.clone(), u, w)?)
    };
    for k in 0..m {
        let mut up = controls.u.clone();
        let mut um = controls.u.clone();
        up[k] = up[k] + step;
        um[k] = um[k] - step;
        let fp = eval(up, controls.w.clone())?;
        let fm = eval(um, controls.w.clone())?;
        du.push((fp - fm) / two_step);

        let mut wp = controls.w.clone();
        let mut wm = controls.w.clone();
        wp[k] = wp[k] + step;
        wm[k] = wm[k] - step;
        let fp = eval(controls.u.clone(), wp)?;
        let fm = eval(controls.u.clone(), wm)?;
        dw.push((fp - fm) / two_step);
    }
    Ok(ControlGradient { du, dw })
}

/// Ground-truth gradient oracle: central differences of the objective
/// itself, exact matrix exponentials throughout (no quadrature), error
/// O(step^2).
pub fn finite_difference_gradient<T: Real>(
    problem: &GateProblem<T>,
    controls: &PiecewiseControls<T>,
    step: T,
) -> Result<ControlGradient<T>> {
    if !step.is_finite() || step <= T::zero() {
        return Err(Error::NotPositiveParameter {
            what: "finite-difference step",
            value: step.to_f64().unwrap_or(f64::NAN),
        });
    }
    problem.check_controls(controls)?;
    central_diff_all(controls, step, |c| gate_objective(problem, c))
}

/// Relative L2 error between two gradients, |a - b| / |b|.
pub fn relative_l2_error<T: Real>(a: &ControlGradient<T>, b: &ControlGradient<T>) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for (x, y) in a.du.iter().zip(&b.du).chain(a.dw.iter().zip(&b.dw)) {
        let d = *x - *y;
        num = num + d * d;
        den = den + *y * *y;
    }
    num.sqrt() / den.sqrt()
}

/// Largest absolute per-component difference between two gradients.
pub fn max_abs_component_error<T: Real>(a: &ControlGradient<T>, b: &ControlGradient<T>) -> T {
    let mut best = T::zero();
    for (x, y) in a.du.iter().zip(&b.du).chain(a.dw.iter().zip(&b.dw)) {
        let d = (*x - *y).abs();
        if d > best {
            best = d;
        }
    }
    best
}
