//! Multi-image super-resolution (MISR) core library.
//!
//! Reconstructs one high-resolution image from k subpixel-shifted
//! low-resolution frames by minimizing
//!
//! ```text
//! J(x) = Σ_i ||A_i x − y_i||_p^p + λ Σ_d α^(dx+dy) ||x − S_d x||_1
//! ```
//!
//! where each `A_i = D·B·M_i` chains decimation, blur, and subpixel motion.
//! The minimizer is a scaled conjugate gradient whose scalar quantities are
//! aggregated across banded image partitions every iteration, so any number
//! of workers converges along the centralized trajectory. Overlap rows
//! between neighboring bands are kept consistent by an inner/outer border
//! exchange.
//!
//! All numeric kernels are generic over the scalar type ([`Scalar`]); the
//! reconstruction path normally runs in `f64`, while memory-bound harness
//! work can use `f32`.

pub mod error;
pub mod grid;
pub mod metrics;
pub mod objective;
pub mod partition;
pub mod pattern;
pub mod scg;
pub mod sparse;
pub mod system;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub use error::{Error, Result};
pub use grid::ImageGrid;
pub use objective::{DataNorm, ObjectiveParams, Patch};
pub use partition::PartitionPlan;
pub use scg::{reconstruct, Execution, ReconstructOptions, Reconstruction, Solver};
pub use sparse::SparseOperator;
pub use system::{BlurKernel, DegradationSpec, SystemModel};

/// Scalar type for all numeric kernels: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<Self>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for converting an `f64` constant into the working scalar type.
pub(crate) fn cast<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("constant representable in scalar type")
}

pub type ImageGridF64 = ImageGrid<f64>;
pub type ImageGridF32 = ImageGrid<f32>;
pub type SparseOperatorF64 = SparseOperator<f64>;
pub type SparseOperatorF32 = SparseOperator<f32>;
pub type SystemModelF64 = SystemModel<f64>;
pub type SystemModelF32 = SystemModel<f32>;
