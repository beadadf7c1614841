//! Channel reconstruction for the dynamical map induced by a control
//! sequence: Choi matrix, CPTP diagnostics, Kraus decomposition, the stacked
//! Stiefel-manifold embedding, and Bloch-sphere distance profiles.
//!
//! Choi convention: C = sum_{ab} |a><b| (x) Phi(|a><b|), input system first,
//! unnormalized (trace 2 for trace-preserving Phi). Entry layout
//! C[2a+i][2b+j] = <i| Phi(|a><b|) |j>.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{CMat2, CMat4, Matrix, Vec3};
use crate::model::{tol_floor, BlochState};
use crate::propagator::AffineBlochMap;
use crate::scalar::Real;

/// CP tolerance shared by the report checks and the Kraus rank cut.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiMatrix<T> {
    pub matrix: CMat4<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport<T> {
    /// Smallest Choi eigenvalue; >= -1e-8 for maps that are CP in exact
    /// arithmetic.
    pub min_eigenvalue: T,
    /// Frobenius distance of the output-partial-trace from the identity.
    pub tp_residual: T,
}

/// Up to four 2x2 Kraus operators stacked into an 8x2 matrix S with
/// S^dagger S = I (zero rows pad missing operators).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StiefelPoint<T> {
    pub rows: [[Complex<T>; 2]; 8],
}

impl<T: Real> StiefelPoint<T> {
    pub fn s_dagger_s(&self) -> CMat2<T> {
        let mut out = CMat2::zero();
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Complex::new(T::zero(), T::zero());
                for row in &self.rows {
                    acc = acc + row[a].conj() * row[b];
                }
                out.0[a][b] = acc;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereDistanceProfile<T> {
    pub max_distance: T,
    pub per_point: Vec<T>,
}

/// (I + r . sigma) / 2 without any ball check: channel reconstruction must
/// represent non-positive images (e.g. of non-CP affine maps) faithfully.
fn density_of_vec<T: Real>(r: Vec3<T>) -> CMat2<T> {
    let half = T::of(0.5);
    Matrix([
        [
            Complex::new((T::one() + r.z()) * half, T::zero()),
            Complex::new(r.x() * half, -r.y() * half),
        ],
        [
            Complex::new(r.x() * half, r.y() * half),
            Complex::new((T::one() - r.z()) * half, T::zero()),
        ],
    ])
}

/// Choi matrix of the channel whose Bloch action is r -> M r + v.
///
/// The four matrix units are recovered by linearity from the channel images
/// of |0><0|, |1><1|, (I+sigma_x)/2, (I+sigma_y)/2: with S = 2 Phi(rho_x) -
/// Phi(rho_0) - Phi(rho_1) and A the same for rho_y, Phi(|0><1|) = (S + iA)/2.
pub fn choi_from_affine<T: Real>(map: &AffineBlochMap<T>) -> ChoiMatrix<T> {
    let one = T::one();
    let zero = T::zero();
    let states = [
        Vec3::new(zero, zero, one),
        Vec3::new(zero, zero, -one),
        Vec3::new(one, zero, zero),
        Vec3::new(zero, one, zero),
    ];
    let y: Vec<CMat2<T>> = states
        .iter()
        .map(|v| density_of_vec(map.apply(*v)))
        .collect();
    let two = T::of(2.0);
    let half = T::of(0.5);
    let s = y[2].scale_re(two).sub(&y[0]).sub(&y[1]);
    let a = y[3].scale_re(two).sub(&y[0]).sub(&y[1]);
    let i_unit = Complex::new(zero, one);
    let phi_01 = s.add(&a.scale(i_unit)).scale_re(half);
    let phi_10 = s.sub(&a.scale(i_unit)).scale_re(half);
    let blocks = [[&y[0], &phi_01], [&phi_10, &y[1]]];

    let mut c = CMat4::<T>::zero();
    for a_in in 0..2 {
        for b_in in 0..2 {
            let block = blocks[a_in][b_in];
            for i in 0..2 {
                for j in 0..2 {
                    c.0[2 * a_in + i][2 * b_in + j] = block.0[i][j];
                }
            }
        }
    }
    // rounding can leave a tiny anti-Hermitian part; fold it away
    ChoiMatrix {
        matrix: c.add(&c.adjoint()).scale_re(half),
    }
}

/// Smallest eigenvalue and trace-preservation residual of a Choi matrix.
pub fn cptp_report<T: Real>(choi: &ChoiMatrix<T>) -> Result<CptpReport<T>> {
    let (vals, _) = choi.matrix.hermitian_eigen()?;
    let mut tr_out = CMat2::<T>::zero();
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                tr_out.0[a][b] = tr_out.0[a][b] + choi.matrix.0[2 * a + i][2 * b + i];
            }
        }
    }
    let tp_residual = tr_out.sub(&CMat2::identity()).frobenius_c();
    Ok(CptpReport {
        min_eigenvalue: vals[0],
        tp_residual,
    })
}

/// Operator-sum representation from the Choi eigendecomposition: every
/// eigenpair with lambda > rank_tol contributes K with K[i][a] =
/// sqrt(lambda) v[2a+i], ordered by descending eigenvalue.
pub fn kraus_from_choi<T: Real>(choi: &ChoiMatrix<T>, rank_tol: T) -> Result<Vec<CMat2<T>>> {
    if !rank_tol.is_finite() || rank_tol <= T::zero() {
        return Err(Error::NotPositiveParameter {
            what: "rank tolerance",
            value: rank_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let (vals, vecs) = choi.matrix.hermitian_eigen()?;
    if vals[0] < -rank_tol {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: vals[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut kraus = Vec::new();
    for idx in (0..4).rev() {
        if vals[idx] > rank_tol {
            let root = Complex::new(vals[idx].sqrt(), T::zero());
            let mut k = CMat2::<T>::zero();
            for i in 0..2 {
                for a in 0..2 {
                    k.0[i][a] = vecs.0[2 * a + i][idx] * root;
                }
            }
            kraus.push(k);
        }
    }
    Ok(kraus)
}

/// sum_i K_i rho K_i^dagger.
pub fn apply_kraus<T: Real>(kraus: &[CMat2<T>], rho: &CMat2<T>) -> CMat2<T> {
    let mut out = CMat2::zero();
    for k in kraus {
        out = out.add(&k.mul(rho).mul(&k.adjoint()));
    }
    out
}

/// Stacks at most four Kraus operators into an 8x2 Stiefel point; the
/// completeness relation sum K^dagger K = I must hold to 1e-9.
pub fn stiefel_embedding<T: Real>(kraus: &[CMat2<T>]) -> Result<StiefelPoint<T>> {
    if kraus.len() > 4 {
        return Err(Error::InvalidConfig(format!(
            "a qubit channel takes at most 4 Kraus operators, got {}",
            kraus.len()
        )));
    }
    let mut sum = CMat2::<T>::zero();
    for k in kraus {
        sum = sum.add(&k.adjoint().mul(k));
    }
    let residual = sum.sub(&CMat2::identity()).frobenius_c();
    if residual > tol_floor::<T>(1e-9) {
        return Err(Error::IncompleteKraus {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut rows = [[Complex::new(T::zero(), T::zero()); 2]; 8];
    for (m, k) in kraus.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                rows[2 * m + i][j] = k.0[i][j];
            }
        }
    }
    Ok(StiefelPoint { rows })
}

/// Distance 1 - |r_k| of every trajectory point from the Bloch sphere.
pub fn sphere_distance_profile<T: Real>(
    trajectory: &[BlochState<T>],
) -> Result<SphereDistanceProfile<T>> {
    if trajectory.is_empty() {
        return Err(Error::EmptyInput);
    }
    let per_point: Vec<T> = trajectory
        .iter()
        .map(|s| T::one() - s.vec().norm())
        .collect();
    let mut max_distance = per_point[0];
    for &d in &per_point[1..] {
        if d > max_distance {
            max_distance = d;
        }
    }
    Ok(SphereDistanceProfile {
        max_distance,
        per_point,
    })
}
