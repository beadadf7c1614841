//! Small fixed-size dense linear algebra.
//!
//! Sizes in this crate are tiny and known at compile time (3x3 real Bloch
//! generators, their 4x4 and 6x6 augmentations, 2x2 and 4x4 complex
//! operators), so the matrix type is a plain row-major array with no heap
//! allocation. The matrix exponential uses diagonal Pade approximants of
//! degree 6 or 13 with scaling and squaring, selected by the 1-norm.

use num_complex::Complex;
use num_traits::{Num, NumAssign};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Entry type for [`Matrix`]: a commutative ring with assignment ops.
/// Covers both `T: Real` and `Complex<T>`.
pub trait Ring: Copy + Num + NumAssign + std::ops::Neg<Output = Self> {}
impl<S> Ring for S where S: Copy + Num + NumAssign + std::ops::Neg<Output = S> {}

/// Square `N x N` matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix<S, const N: usize>(pub [[S; N]; N]);

pub type Mat3<T> = Matrix<T, 3>;
pub type CMat2<T> = Matrix<Complex<T>, 2>;
pub type CMat4<T> = Matrix<Complex<T>, 4>;

/// Real 3-vector (Bloch components and generator offsets).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

impl<S: Ring, const N: usize> Matrix<S, N> {
    pub fn zero() -> Self {
        Matrix([[S::zero(); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = S::one();
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] -= other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == S::zero() {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * other.0[k][j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S; N]) -> [S; N] {
        let mut out = [S::zero(); N];
        for i in 0..N {
            for j in 0..N {
                out[i] += self.0[i][j] * v[j];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..N {
            t += self.0[i][i];
        }
        t
    }
}

// Real-matrix numerics: norms, linear solve, matrix exponential.
impl<T: Real, const N: usize> Matrix<T, N> {
    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let mut best = T::zero();
        for j in 0..N {
            let mut s = T::zero();
            for i in 0..N {
                s = s + self.0[i][j].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn max_abs(&self) -> T {
        let mut best = T::zero();
        for row in &self.0 {
            for &x in row {
                if x.abs() > best {
                    best = x.abs();
                }
            }
        }
        best
    }

    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for row in &self.0 {
            for &x in row {
                s = s + x * x;
            }
        }
        s.sqrt()
    }

    pub fn entries_finite(&self) -> bool {
        self.0.iter().all(|row| row.iter().all(|x| x.is_finite()))
    }

    fn gauss<const M: usize>(&self, rhs: [[T; M]; N]) -> Result<[[T; M]; N]> {
        let mut a = self.0;
        let mut b = rhs;
        for col in 0..N {
            let mut piv = col;
            let mut best = a[col][col].abs();
            for r in col + 1..N {
                let v = a[r][col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            // negated form on purpose: a NaN pivot must land in the error arm
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(best > T::zero()) || !best.is_finite() {
                return Err(Error::SingularMatrix);
            }
            a.swap(col, piv);
            b.swap(col, piv);
            let d = a[col][col];
            for r in 0..N {
                if r == col {
                    continue;
                }
                let f = a[r][col] / d;
                if f == T::zero() {
                    continue;
                }
                for c in col..N {
                    let t = a[col][c];
                    a[r][c] = a[r][c] - f * t;
                }
                for c in 0..M {
                    let t = b[col][c];
                    b[r][c] = b[r][c] - f * t;
                }
            }
        }
        for r in 0..N {
            let d = a[r][r];
            for c in 0..M {
                b[r][c] = b[r][c] / d;
            }
        }
        Ok(b)
    }

    /// Solves `self * X = rhs` by Gauss-Jordan elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        Ok(Matrix(self.gauss(rhs.0)?))
    }

    pub fn solve_vec(&self, rhs: &[T; N]) -> Result<[T; N]> {
        let cols = self.gauss(rhs.map(|x| [x]))?;
        Ok(cols.map(|row| row[0]))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity())
    }

    /// Estimated 1-norm condition number; infinity if singular.
    pub fn cond_one(&self) -> T {
        match self.inverse() {
            Ok(inv) => self.norm_one() * inv.norm_one(),
            Err(_) => T::infinity(),
        }
    }

    /// Matrix exponential by scaling and squaring with diagonal Pade
    /// approximants (degree 6 below `THETA6`, degree 13 otherwise).
    pub fn expm(&self) -> Result<Self> {
        if !self.entries_finite() {
            return Err(Error::NonFinite {
                context: "matrix exponential input",
            });
        }
        // Conservative switch points; the published backward-error radii are
        // ~0.54 (degree 6) and ~5.37 (degree 13).
        let theta6 = T::of(0.5);
        let theta13 = T::of(4.25);
        let norm = self.norm_one();
        if norm <= theta6 {
            return self.pade6();
        }
        let mut s = 0u32;
        let mut scaled = *self;
        if norm > theta13 {
            let k = (norm / theta13).log2().ceil();
            s = k.to_f64().expect("finite scaling exponent").max(0.0) as u32;
            scaled = self.scale(T::of(0.5).powi(s as i32));
        }
        let mut f = scaled.pade13()?;
        for _ in 0..s {
            f = f.mul(&f);
        }
        Ok(f)
    }

    fn pade6(&self) -> Result<Self> {
        let b: [T; 7] = [665280.0, 332640.0, 75600.0, 10080.0, 840.0, 42.0, 1.0].map(T::of);
        let id = Self::identity();
        let a2 = self.mul(self);
        let a4 = a2.mul(&a2);
        let a6 = a4.mul(&a2);
        let u = self.mul(&a4.scale(b[5]).add(&a2.scale(b[3])).add(&id.scale(b[1])));
        let v = a6
            .scale(b[6])
            .add(&a4.scale(b[4]))
            .add(&a2.scale(b[2]))
            .add(&id.scale(b[0]));
        v.sub(&u).solve(&v.add(&u))
    }

    fn pade13(&self) -> Result<Self> {
        let b: [T; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ]
        .map(T::of);
        let id = Self::identity();
        let a2 = self.mul(self);
        let a4 = a2.mul(&a2);
        let a6 = a4.mul(&a2);
        let u = self.mul(
            &a6.mul(&a6.scale(b[13]).add(&a4.scale(b[11])).add(&a2.scale(b[9])))
                .add(&a6.scale(b[7]))
                .add(&a4.scale(b[5]))
                .add(&a2.scale(b[3]))
                .add(&id.scale(b[1])),
        );
        let v = a6
            .mul(&a6.scale(b[12]).add(&a4.scale(b[10])).add(&a2.scale(b[8])))
            .add(&a6.scale(b[6]))
            .add(&a4.scale(b[4]))
            .add(&a2.scale(b[2]))
            .add(&id.scale(b[0]));
        v.sub(&u).solve(&v.add(&u))
    }
}

impl<T: Real> Matrix<T, 3> {
    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3(self.mul_vec(&v.0))
    }
}

// Complex-matrix operations used by the channel module.
impl<T: Real, const N: usize> Matrix<Complex<T>, N> {
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn max_abs_c(&self) -> T {
        let mut best = T::zero();
        for row in &self.0 {
            for x in row {
                let a = x.norm();
                if a > best {
                    best = a;
                }
            }
        }
        best
    }

    pub fn frobenius_c(&self) -> T {
        let mut s = T::zero();
        for row in &self.0 {
            for x in row {
                s = s + x.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Max-entry deviation from Hermitian symmetry.
    pub fn hermitian_residual(&self) -> T {
        self.sub(&self.adjoint()).max_abs_c()
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns eigenvalues in ascending order and the matching
    /// unitary eigenvector columns. The input is symmetrized internally.
    pub fn hermitian_eigen(&self) -> Result<([T; N], Self)> {
        let mut h = self.add(&self.adjoint()).scale_re(T::of(0.5)).0;
        let mut v = Self::identity().0;
        let fro = self.frobenius_c();
        let stop = T::epsilon() * T::of(32.0) * fro.max(T::one());
        let mut converged = false;
        for _sweep in 0..60 {
            let mut off = T::zero();
            for p in 0..N {
                for q in 0..N {
                    if p != q {
                        off = off + h[p][q].norm_sqr();
                    }
                }
            }
            if off.sqrt() <= stop {
                converged = true;
                break;
            }
            for p in 0..N - 1 {
                for q in p + 1..N {
                    let beta = h[p][q];
                    let b_abs = beta.norm();
                    let scale = h[p][p].re.abs() + h[q][q].re.abs() + b_abs;
                    if b_abs <= scale * T::epsilon() {
                        continue;
                    }
                    let alpha = h[p][p].re;
                    let delta = h[q][q].re;
                    let tau = (delta - alpha) / (b_abs + b_abs);
                    let root = (T::one() + tau * tau).sqrt();
                    let t = if tau >= T::zero() {
                        T::one() / (tau + root)
                    } else {
                        -T::one() / (-tau + root)
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let phase = beta.unscale(b_abs);
                    // J is the identity outside rows/cols p,q with
                    // J[p][p]=c, J[p][q]=s*phase, J[q][p]=-s*conj(phase), J[q][q]=c;
                    // it zeroes the (p,q) entry of J^H H J.
                    let jc = Complex::new(c, T::zero());
                    let js = phase.scale(s);
                    for r in 0..N {
                        let hp = h[r][p];
                        let hq = h[r][q];
                        h[r][p] = hp * jc - hq * js.conj();
                        h[r][q] = hp * js + hq * jc;
                        let vp = v[r][p];
                        let vq = v[r][q];
                        v[r][p] = vp * jc - vq * js.conj();
                        v[r][q] = vp * js + vq * jc;
                    }
                    for r in 0..N {
                        let hp = h[p][r];
                        let hq = h[q][r];
                        h[p][r] = hp * jc - hq * js;
                        h[q][r] = hp * js.conj() + hq * jc;
                    }
                }
            }
        }
        if !converged {
            return Err(Error::EigenNoConvergence);
        }
        let mut order: [usize; N] = std::array::from_fn(|i| i);
        order.sort_by(|&a, &b| {
            h[a][a]
                .re
                .partial_cmp(&h[b][b].re)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut values = [T::zero(); N];
        let mut vectors = Self::zero();
        for (slot, &idx) in order.iter().enumerate() {
            values[slot] = h[idx][idx].re;
            for r in 0..N {
                vectors.0[r][slot] = v[r][idx];
            }
        }
        Ok((values, vectors))
    }
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn x(&self) -> T {
        self.0[0]
    }

    pub fn y(&self) -> T {
        self.0[1]
    }

    pub fn z(&self) -> T {
        self.0[2]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn entries_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<T: Real> std::ops::Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec3([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl<T: Real> std::ops::Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec3([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }
}
