//! Gate synthesis for an open two-level quantum system driven by a coherent
//! field amplitude u(t) and an incoherent photon density n(t).
//!
//! The dynamics is a GKSL master equation written in Bloch coordinates,
//! propagated exactly over piecewise-constant control intervals by matrix
//! exponentials. On top of that sit an analytic objective gradient, an
//! adaptive-step gradient-descent optimizer for single-qubit gates, channel
//! reconstruction (Choi, Kraus, Stiefel embedding) for the resulting
//! dynamical maps, and Planck-type photon spectral densities.
//!
//! Every numeric routine is generic over [`scalar::Real`] (implemented for
//! `f32` and `f64`); the `*F64` aliases at the crate root pin the default
//! double-precision instantiations.

// Index loops mirror the matrix algebra, and the generic scalar carries no
// `AddAssign` bound, so `s = s + x` is the uniform accumulation form.
#![allow(clippy::needless_range_loop, clippy::assign_op_pattern)]

pub mod channel;
pub mod error;
pub mod gradient;
pub mod linalg;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod propagator;
pub mod scalar;
pub mod spectrum;

pub use channel::{
    apply_kraus, choi_from_affine, cptp_report, kraus_from_choi, sphere_distance_profile,
    stiefel_embedding, ChoiMatrix, CptpReport, SphereDistanceProfile, StiefelPoint,
    DEFAULT_RANK_TOL,
};
pub use error::{Error, Result};
pub use gradient::{
    directional_exp_derivative, final_state_gradient, finite_difference_gradient,
    max_abs_component_error, objective_gradient, relative_l2_error, ControlGradient,
    FinalStateGradient, QuadratureConfig, StepDerivatives,
};
pub use linalg::{CMat2, CMat4, Mat3, Matrix, Vec3};
pub use model::{
    assemble_generator, bloch_from_density, canonical_basis, coherent_direction,
    density_from_bloch, drift_matrix, gate_h, gate_targets, gate_x, incoherent_direction, pauli,
    unitary_to_bloch_rotation, BlochGenerator, BlochState, DensityMatrix, GateTarget, SystemParams,
};
pub use objective::{gate_objective, hs_distance, map_distance, GateProblem};
pub use optimizer::{
    adaptive_grape, default_initial_controls, IterationRecord, OptimizationResult, OptimizerConfig,
    StopReason,
};
pub use propagator::{
    compose_affine_map, matrix_exponential, propagate, propagate_dense, step_offset,
    AffineBlochMap, ControlGrid, PiecewiseControls,
};
pub use spectrum::{
    filtered_density, planck_density, total_density, GaussianFilter, SpectralDensity,
};

pub type SystemParamsF64 = SystemParams<f64>;
pub type BlochStateF64 = BlochState<f64>;
pub type ControlGridF64 = ControlGrid<f64>;
pub type PiecewiseControlsF64 = PiecewiseControls<f64>;
pub type AffineBlochMapF64 = AffineBlochMap<f64>;
pub type GateTargetF64 = GateTarget<f64>;
pub type GateProblemF64 = GateProblem<f64>;
pub type ControlGradientF64 = ControlGradient<f64>;
pub type OptimizerConfigF64 = OptimizerConfig<f64>;
pub type OptimizationResultF64 = OptimizationResult<f64>;
pub type ChoiMatrixF64 = ChoiMatrix<f64>;
pub type StiefelPointF64 = StiefelPoint<f64>;
pub type SpectralDensityF64 = SpectralDensity<f64>;
