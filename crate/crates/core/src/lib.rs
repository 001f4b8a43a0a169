//! Identification of Hawkes excitation kernels by centered least squares in
//! an orthonormal Laguerre basis.
//!
//! The pipeline is
//! [`KernelBasis`] → [`StateSpaceModel`] → [`estimate::propagate_regressors`]
//! → [`estimate::empirical_cross_covariance`] → [`estimate::empirical_gram`]
//! → [`estimate::cls_estimate`]; [`estimate::estimate_from_stream`] runs all
//! of it. The [`asymptotics`] module computes the population limits of the
//! same quantities by spectral quadrature and compares the conditioning of
//! the Laguerre and Erlang parameterizations.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which the documented
//! tolerances assume.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod basis;
pub mod error;
pub mod estimate;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod simulate;
pub mod statespace;
pub mod stats;
pub mod stream;

pub use asymptotics::{AsymptoticResult, ConditioningRow, KernelSpectrum, SpectralModel};
pub use basis::{BasisFamily, ErlangTransform, KernelBasis, RecursionCoeffs};
pub use error::{HawkesError, Result};
pub use estimate::{EstimateWarning, GramSystem, HawkesEstimate, RegressorTrajectory};
pub use scalar::Real;
pub use simulate::{HawkesModel, TrueKernel};
pub use statespace::StateSpaceModel;
pub use stream::EventStream;

pub type KernelBasis64 = KernelBasis<f64>;
pub type KernelBasis32 = KernelBasis<f32>;
pub type StateSpaceModel64 = StateSpaceModel<f64>;
pub type StateSpaceModel32 = StateSpaceModel<f32>;
pub type EventStream64 = EventStream<f64>;
pub type EventStream32 = EventStream<f32>;
pub type HawkesModel64 = HawkesModel<f64>;
pub type HawkesEstimate64 = HawkesEstimate<f64>;
pub type HawkesEstimate32 = HawkesEstimate<f32>;
pub type GramSystem64 = GramSystem<f64>;
pub type SpectralModel64 = SpectralModel<f64>;
pub type AsymptoticResult64 = AsymptoticResult<f64>;
