//! Exact obstruction calculus for CR deformations of the circle bundle
//! `O(-1, 1)` over `P^1 x P^{n-2}`.

pub mod bott;
pub mod cech;
pub mod crx;
pub mod exactalg;
pub mod kuranishi;
pub mod obstruction;

pub use bott::{BundleSpec, CohomologyTable};
pub use crx::{DeformationTensor, TensorFile, WeightComplex, SCHEMA_VERSION};
pub use exactalg::Scalar;
pub use kuranishi::{FormalSeries, SeriesFile};
pub use obstruction::{FillabilityVerdict, ObstructionReport};
