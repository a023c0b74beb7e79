//! Kernelized metric and preference learning.
//!
//! Items `s_1..s_m` are mapped into a reproducing kernel Hilbert space and
//! expressed in an orthonormal basis of their span, which turns learning a
//! generalized Mahalanobis inner product (and an ideal point) into an
//! optimization over `m x m` positive definite matrices.
//!
//! Modules, bottom up:
//!
//! - [`kernels`]: kernel functions and Gram matrices.
//! - [`embedding`]: orthonormal coordinates for the span of the items.
//! - [`mahalanobis`]: positive definite forms, cone projection, ambient
//!   extension and restriction.
//! - [`losses`]: 0-1 loss and its hinge/logistic surrogates.
//! - [`preference`]: ideal-point preference learning from paired comparisons.
//! - [`triplet`]: metric learning from triplet comparisons.
//! - [`lab`]: randomized verification of the subspace reduction.
//! - [`synthetic`]: planted-model comparison generators.

pub mod embedding;
pub mod error;
pub mod kernels;
pub mod lab;
pub mod losses;
pub mod mahalanobis;
mod optim;
pub mod preference;
pub mod synthetic;
pub mod triplet;

pub use embedding::GramBasis;
pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use losses::{Label, LossSpec};
pub use mahalanobis::MahalanobisForm;
pub use optim::{FitTrace, Init, SolverConfig};
pub use preference::{PairedSample, PreferenceModel};
pub use triplet::{TripletModel, TripletSample};
