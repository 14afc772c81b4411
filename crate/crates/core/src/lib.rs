//! Steady two-dimensional irrotational flow around bodies with corners.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compressible;
pub mod error;
pub mod forces;
pub mod gas;
pub mod geometry;
pub mod incompressible;
pub mod linalg;
pub mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type BodyF64 = geometry::Body<f64>;
pub type BodyF32 = geometry::Body<f32>;
pub type GasModelF64 = gas::GasModel<f64>;
pub type GasModelF32 = gas::GasModel<f32>;
pub type ComplexFlowF64 = incompressible::ComplexFlow<f64>;
pub type ComplexFlowF32 = incompressible::ComplexFlow<f32>;
pub type FarFieldF64 = incompressible::FarField<f64>;
pub type FarFieldF32 = incompressible::FarField<f32>;
pub type ConformalGridF64 = compressible::ConformalGrid<f64>;
pub type ConformalGridF32 = compressible::ConformalGrid<f32>;
pub type CompressibleSolutionF64 = compressible::CompressibleSolution<f64>;
pub type CompressibleSolutionF32 = compressible::CompressibleSolution<f32>;
