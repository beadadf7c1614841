//! Two-level open-system model in Bloch form.
//!
//! States are Bloch vectors r with rho = (I + r . sigma)/2. The master
//! equation with a coherent drive u(t) and an incoherent photon density n(t)
//! becomes the affine ODE dr/dt = A(u, n) r + b with
//!
//! ```text
//! A(u, n) = B + B_u u + B_n n,
//! B   = [[-g/2,  w,  0], [-w, -g/2, 0], [0, 0, -g]],
//! B_u = 2 mu [[0,0,0], [0,0,-1], [0,1,0]],
//! B_n = -g diag(1, 1, 2),   b = (0, 0, g),
//! ```
//!
//! where w is the transition frequency, mu the dipole coupling and g the
//! spontaneous decay rate.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMat2, Mat3, Matrix, Vec3};
use crate::scalar::Real;

/// Validation tolerance with a floor of 64 machine epsilons so the f32 path
/// stays usable; for f64 the `base` value is the effective tolerance.
pub(crate) fn tol_floor<T: Real>(base: f64) -> T {
    T::of(base).max(T::epsilon() * T::of(64.0))
}

/// Physical parameters of the driven qubit. All three are strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    pub omega: T,
    pub mu: T,
    pub gamma: T,
}

impl<T: Real> SystemParams<T> {
    pub fn new(omega: T, mu: T, gamma: T) -> Result<Self> {
        for (what, v) in [("omega", omega), ("mu", mu), ("gamma", gamma)] {
            if !v.is_finite() || v <= T::zero() {
                return Err(Error::NotPositiveParameter {
                    what,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(SystemParams { omega, mu, gamma })
    }
}

/// Bloch vector constrained to the closed unit ball (small tolerance for
/// roundoff at the boundary).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T>(Vec3<T>);

/// Admissible overshoot of |r| beyond 1.
pub const BALL_TOL: f64 = 1e-9;

impl<T: Real> BlochState<T> {
    pub fn new(r: Vec3<T>) -> Result<Self> {
        if !r.entries_finite() {
            return Err(Error::NonFinite {
                context: "Bloch vector",
            });
        }
        let norm = r.norm();
        if norm > T::one() + tol_floor::<T>(BALL_TOL) {
            return Err(Error::OutsideBlochBall {
                norm: norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(BlochState(r))
    }

    pub fn vec(&self) -> Vec3<T> {
        self.0
    }
}

/// Generator of the Bloch ODE at fixed control values: dr/dt = A r + b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochGenerator<T> {
    pub a: Mat3<T>,
    pub b: Vec3<T>,
}

/// Drift part B (free evolution with decay).
pub fn drift_matrix<T: Real>(params: &SystemParams<T>) -> Mat3<T> {
    let g = params.gamma;
    let w = params.omega;
    let half = T::of(0.5);
    Matrix([
        [-g * half, w, T::zero()],
        [-w, -g * half, T::zero()],
        [T::zero(), T::zero(), -g],
    ])
}

/// Direction of the coherent control, dA/du = 2 mu [[0,0,0],[0,0,-1],[0,1,0]].
pub fn coherent_direction<T: Real>(params: &SystemParams<T>) -> Mat3<T> {
    let m2 = params.mu + params.mu;
    let mut d = Mat3::zero();
    d.0[1][2] = -m2;
    d.0[2][1] = m2;
    d
}

/// Direction of the incoherent control, dA/dn = -gamma diag(1, 1, 2).
pub fn incoherent_direction<T: Real>(params: &SystemParams<T>) -> Mat3<T> {
    let g = params.gamma;
    let mut d = Mat3::zero();
    d.0[0][0] = -g;
    d.0[1][1] = -g;
    d.0[2][2] = -(g + g);
    d
}

/// Assembles A(u, n) and the offset b. The photon density n must be >= 0;
/// the coherent amplitude u is unrestricted.
pub fn assemble_generator<T: Real>(
    params: &SystemParams<T>,
    u: T,
    n: T,
) -> Result<BlochGenerator<T>> {
    if !u.is_finite() || !n.is_finite() {
        return Err(Error::NonFinite {
            context: "control values",
        });
    }
    if n < T::zero() {
        return Err(Error::NegativePhotonDensity {
            value: n.to_f64().unwrap_or(f64::NAN),
        });
    }
    let a = drift_matrix(params)
        .add(&coherent_direction(params).scale(u))
        .add(&incoherent_direction(params).scale(n));
    let b = Vec3::new(T::zero(), T::zero(), params.gamma);
    Ok(BlochGenerator { a, b })
}

/// Density matrix: 2x2 complex, Hermitian, unit trace, positive semidefinite
/// (all up to small tolerances checked at construction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T>(CMat2<T>);

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: CMat2<T>) -> Result<Self> {
        let herm = m.hermitian_residual();
        if herm > tol_floor::<T>(1e-12) {
            return Err(Error::NotHermitian {
                residual: herm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > tol_floor::<T>(1e-12) || tr.im.abs() > tol_floor::<T>(1e-12) {
            return Err(Error::TraceNotOne {
                trace: tr.re.to_f64().unwrap_or(f64::NAN),
            });
        }
        let min = min_eigenvalue_h2(&m);
        if min < -tol_floor::<T>(1e-10) {
            return Err(Error::NotPositive {
                min_eigenvalue: min.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(DensityMatrix(m))
    }

    pub fn matrix(&self) -> &CMat2<T> {
        &self.0
    }
}

/// Smaller eigenvalue of a 2x2 Hermitian matrix, in closed form.
fn min_eigenvalue_h2<T: Real>(m: &CMat2<T>) -> T {
    let tr = m.trace().re;
    let det = (m.0[0][0] * m.0[1][1] - m.0[0][1] * m.0[1][0]).re;
    let disc = (tr * tr - T::of(4.0) * det).max(T::zero());
    (tr - disc.sqrt()) * T::of(0.5)
}

/// Pauli matrices (sigma_x, sigma_y, sigma_z).
pub fn pauli<T: Real>() -> [CMat2<T>; 3] {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    [
        Matrix([[zero, one], [one, zero]]),
        Matrix([[zero, -i], [i, zero]]),
        Matrix([[one, zero], [zero, -one]]),
    ]
}

/// rho = (I + r . sigma)/2.
pub fn density_from_bloch<T: Real>(r: &BlochState<T>) -> DensityMatrix<T> {
    let v = r.vec();
    let half = T::of(0.5);
    let m = Matrix([
        [
            Complex::new((T::one() + v.z()) * half, T::zero()),
            Complex::new(v.x() * half, -v.y() * half),
        ],
        [
            Complex::new(v.x() * half, v.y() * half),
            Complex::new((T::one() - v.z()) * half, T::zero()),
        ],
    ]);
    // Hermitian and unit-trace by construction; PSD up to the ball tolerance.
    DensityMatrix(m)
}

/// r_alpha = Tr(rho sigma_alpha).
pub fn bloch_from_density<T: Real>(rho: &DensityMatrix<T>) -> BlochState<T> {
    let s = pauli::<T>();
    let mut r = [T::zero(); 3];
    for (alpha, sig) in s.iter().enumerate() {
        r[alpha] = rho.0.mul(sig).trace().re;
    }
    BlochState::new(Vec3(r)).expect("Bloch image of a valid density matrix stays in the ball")
}

/// The four canonical initial states: |0>, |1>, |+>, |+i> as Bloch vectors
/// (0,0,1), (0,0,-1), (1,0,0), (0,1,0).
pub fn canonical_basis<T: Real>() -> [BlochState<T>; 4] {
    let o = T::one();
    let z = T::zero();
    [
        BlochState(Vec3::new(z, z, o)),
        BlochState(Vec3::new(z, z, -o)),
        BlochState(Vec3::new(o, z, z)),
        BlochState(Vec3::new(z, o, z)),
    ]
}

/// SO(3) rotation induced by conjugation with a unitary U:
/// R[a][b] = Re Tr(sigma_a U sigma_b U^dag) / 2.
pub fn unitary_to_bloch_rotation<T: Real>(u: &CMat2<T>) -> Result<Mat3<T>> {
    let resid = u.adjoint().mul(u).sub(&CMat2::identity()).max_abs_c();
    if resid > tol_floor::<T>(1e-12) {
        return Err(Error::NotUnitary {
            residual: resid.to_f64().unwrap_or(f64::NAN),
        });
    }
    let s = pauli::<T>();
    let udag = u.adjoint();
    let half = T::of(0.5);
    let mut r = Mat3::zero();
    for a in 0..3 {
        for b in 0..3 {
            r.0[a][b] = s[a].mul(u).mul(&s[b]).mul(&udag).trace().re * half;
        }
    }
    Ok(r)
}

/// Gate target: the unitary, its Bloch rotation, and the rotated images of
/// the chosen basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct GateTarget<T> {
    pub unitary: CMat2<T>,
    pub rotation: Mat3<T>,
    pub target_bloch: Vec<Vec3<T>>,
}

/// Rotated Bloch targets R_U r_j for each basis state.
pub fn gate_targets<T: Real>(unitary: &CMat2<T>, basis: &[BlochState<T>]) -> Result<GateTarget<T>> {
    if basis.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rotation = unitary_to_bloch_rotation(unitary)?;
    let target_bloch = basis.iter().map(|s| rotation.apply(s.vec())).collect();
    Ok(GateTarget {
        unitary: *unitary,
        rotation,
        target_bloch,
    })
}

/// Pauli X gate.
pub fn gate_x<T: Real>() -> CMat2<T> {
    pauli::<T>()[0]
}

/// Hadamard gate.
pub fn gate_h<T: Real>() -> CMat2<T> {
    let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let zero = T::zero();
    Matrix([
        [Complex::new(s, zero), Complex::new(s, zero)],
        [Complex::new(s, zero), Complex::new(-s, zero)],
    ])
}
