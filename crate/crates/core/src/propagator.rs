//! Piecewise-constant propagation of the Bloch ODE.
//!
//! On each interval the generator (A_k, b) is constant, so the flow is the
//! exact affine map r -> E_k r + g_k with E_k = exp(A_k dt_k) and
//! g_k = (E_k - I) A_k^{-1} b. When A_k is singular or severely
//! ill-conditioned, g_k falls back to the augmented exponential
//! exp([[A, b], [0, 0]] dt), whose upper-right column is the same integral
//! int_0^dt exp(A s) b ds without any inverse.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Matrix, Vec3};
use crate::model::{assemble_generator, BlochGenerator, BlochState, SystemParams};
use crate::scalar::Real;

/// Condition-number threshold beyond which `step_offset` (and the matching
/// gradient path) switches to the augmented-exponential form.
pub(crate) const COND_LIMIT: f64 = 1e12;

/// Time grid 0 = t_0 < t_1 < ... < t_M = total_time.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlGrid<T> {
    breakpoints: Vec<T>,
}

impl<T: Real> ControlGrid<T> {
    /// Uniform grid with `m` intervals on [0, total_time].
    pub fn uniform(total_time: T, m: usize) -> Result<Self> {
        if !total_time.is_finite() || total_time <= T::zero() {
            return Err(Error::NotPositiveParameter {
                what: "total_time",
                value: total_time.to_f64().unwrap_or(f64::NAN),
            });
        }
        if m == 0 {
            return Err(Error::InvalidGrid);
        }
        let breakpoints = (0..=m)
            .map(|k| total_time * T::from_usize(k).unwrap() / T::from_usize(m).unwrap())
            .collect();
        Ok(ControlGrid { breakpoints })
    }

    /// Grid from explicit breakpoints; must start at 0 and strictly increase.
    pub fn from_breakpoints(breakpoints: Vec<T>) -> Result<Self> {
        if breakpoints.len() < 2
            || breakpoints[0] != T::zero()
            || breakpoints.iter().any(|t| !t.is_finite())
            || breakpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidGrid);
        }
        Ok(ControlGrid { breakpoints })
    }

    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn total_time(&self) -> T {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    /// Duration of interval `k` (0-based, spanning [t_k, t_{k+1}]).
    pub fn delta(&self, k: usize) -> T {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }
}

/// Piecewise-constant control amplitudes. The incoherent photon density is
/// parameterized as n_k = w_k^2, which keeps n >= 0 for unconstrained w.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseControls<T> {
    pub grid: ControlGrid<T>,
    pub u: Vec<T>,
    pub w: Vec<T>,
}

impl<T: Real> PiecewiseControls<T> {
    pub fn new(grid: ControlGrid<T>, u: Vec<T>, w: Vec<T>) -> Result<Self> {
        let m = grid.intervals();
        for v in [&u, &w] {
            if v.len() != m {
                return Err(Error::GridMismatch {
                    expected: m,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "control amplitudes",
                });
            }
        }
        Ok(PiecewiseControls { grid, u, w })
    }

    /// Photon densities n_k = w_k^2.
    pub fn n(&self, k: usize) -> T {
        self.w[k] * self.w[k]
    }

    pub fn n_values(&self) -> Vec<T> {
        self.w.iter().map(|&w| w * w).collect()
    }
}

/// Affine map r -> matrix r + offset accumulated over an interval sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineBlochMap<T> {
    pub matrix: Mat3<T>,
    pub offset: Vec3<T>,
}

impl<T: Real> AffineBlochMap<T> {
    pub fn identity() -> Self {
        AffineBlochMap {
            matrix: Mat3::identity(),
            offset: Vec3::zero(),
        }
    }

    pub fn apply(&self, r: Vec3<T>) -> Vec3<T> {
        self.matrix.apply(r) + self.offset
    }

    /// Composition `after . self` (self acts first).
    pub fn then(&self, after: &AffineBlochMap<T>) -> Self {
        AffineBlochMap {
            matrix: after.matrix.mul(&self.matrix),
            offset: after.matrix.apply(self.offset) + after.offset,
        }
    }
}

/// exp(A dt) for a 3x3 real generator; dt must be non-negative and finite.
pub fn matrix_exponential<T: Real>(a: &Mat3<T>, dt: T) -> Result<Mat3<T>> {
    if !dt.is_finite() || dt < T::zero() {
        return Err(Error::NegativeDuration {
            value: dt.to_f64().unwrap_or(f64::NAN),
        });
    }
    a.scale(dt).expm()
}

fn augmented_offset<T: Real>(gen: &BlochGenerator<T>, dt: T) -> Result<Vec3<T>> {
    let mut aug = Matrix::<T, 4>::zero();
    for i in 0..3 {
        for j in 0..3 {
            aug.0[i][j] = gen.a.0[i][j];
        }
        aug.0[i][3] = gen.b.0[i];
    }
    let e = aug.scale(dt).expm()?;
    Ok(Vec3([e.0[0][3], e.0[1][3], e.0[2][3]]))
}

/// Transition pair (exp(A dt), g) for one interval, sharing one exponential.
pub(crate) fn step_transition<T: Real>(
    gen: &BlochGenerator<T>,
    dt: T,
) -> Result<(Mat3<T>, Vec3<T>)> {
    let e = matrix_exponential(&gen.a, dt)?;
    if gen.b == Vec3::zero() || dt == T::zero() {
        return Ok((e, Vec3::zero()));
    }
    let g = match gen.a.inverse() {
        Ok(inv) if gen.a.norm_one() * inv.norm_one() <= T::of(COND_LIMIT) => {
            e.sub(&Mat3::identity()).apply(inv.apply(gen.b))
        }
        _ => augmented_offset(gen, dt)?,
    };
    Ok((e, g))
}

/// Inhomogeneous offset g = int_0^dt exp(A s) b ds over one interval.
pub fn step_offset<T: Real>(gen: &BlochGenerator<T>, dt: T) -> Result<Vec3<T>> {
    Ok(step_transition(gen, dt)?.1)
}

/// Per-interval transition pairs (E_k, g_k) for a control sequence.
pub(crate) fn interval_maps<T: Real>(
    params: &SystemParams<T>,
    controls: &PiecewiseControls<T>,
) -> Result<Vec<(Mat3<T>, Vec3<T>)>> {
    (0..controls.grid.intervals())
        .map(|k| {
            let gen = assemble_generator(params, controls.u[k], controls.n(k))?;
            step_transition(&gen, controls.grid.delta(k))
        })
        .collect()
}

/// States at the grid breakpoints, starting from `r0` (M+1 entries).
pub fn propagate<T: Real>(
    params: &SystemParams<T>,
    controls: &PiecewiseControls<T>,
    r0: &BlochState<T>,
) -> Result<Vec<BlochState<T>>> {
    let maps = interval_maps(params, controls)?;
    let mut out = Vec::with_capacity(maps.len() + 1);
    out.push(*r0);
    let mut r = r0.vec();
    for (e, g) in &maps {
        r = e.apply(r) + *g;
        out.push(BlochState::new(r)?);
    }
    Ok(out)
}

/// Trajectory sampled `samples_per_interval` times inside each interval
/// (plus the initial point). Sampling is exact: substeps reuse the constant
/// generator of their interval.
pub fn propagate_dense<T: Real>(
    params: &SystemParams<T>,
    controls: &PiecewiseControls<T>,
    r0: &BlochState<T>,
    samples_per_interval: usize,
) -> Result<Vec<(T, BlochState<T>)>> {
    if samples_per_interval == 0 {
        return Err(Error::InvalidConfig(
            "samples_per_interval must be >= 1".into(),
        ));
    }
    let grid = &controls.grid;
    let spi = T::from_usize(samples_per_interval).unwrap();
    let mut out = Vec::with_capacity(grid.intervals() * samples_per_interval + 1);
    let mut r = r0.vec();
    out.push((T::zero(), *r0));
    for k in 0..grid.intervals() {
        let gen = assemble_generator(params, controls.u[k], controls.n(k))?;
        let sub = grid.delta(k) / spi;
        let (e, g) = step_transition(&gen, sub)?;
        for j in 1..=samples_per_interval {
            r = e.apply(r) + g;
            let t = grid.breakpoints()[k] + sub * T::from_usize(j).unwrap();
            out.push((t, BlochState::new(r)?));
        }
    }
    Ok(out)
}

/// Affine map of the whole control sequence: r(T) = matrix r(0) + offset.
pub fn compose_affine_map<T: Real>(
    params: &SystemParams<T>,
    controls: &PiecewiseControls<T>,
) -> Result<AffineBlochMap<T>> {
    let mut map = AffineBlochMap::identity();
    for (e, g) in interval_maps(params, controls)? {
        map = map.then(&AffineBlochMap {
            matrix: e,
            offset: g,
        });
    }
    Ok(map)
}
