//! Per-weight model of the CR deformation complex of `X^{2n-1}`, the circle
//! bundle `O(-1,1)` over `P^1 x P^{n-2}`.
//!
//! Sections of weight `k` are bi-homogeneous polynomial Dolbeault forms on
//! the cone `C^2 x C^{n-1}`: coefficients `p / (r_x^{s_x} r_y^{s_y})` with
//! `p` polynomial in the coordinates and their conjugates, horizontal for
//! the anti-holomorphic Euler fields. Vectors are horizontal lifts
//! (`zbar . U = 0` on each factor). The anti-holomorphic degree of the
//! numerators (the level) is fixed per factor; the spaces split into torus
//! blocks, and blocks related by coordinate permutations are isomorphic.

mod block;
mod complex;
mod factor;
mod form;
mod mono;
mod sample;
mod solve;
mod tensor;

pub use block::{block_matrices, block_space_dim, BlockSpace, BlockWeight, Geometry, Levels, POp, Part, Sector, SpaceKind};
pub use complex::{
    all_blocks, build_stable, build_weight_complex, permutations, sorted_blocks, build_with_cache, check_n, dims_at_levels, BlockData, BlockDims, CrxError, Diagnostics,
    WeightComplex, WeightDims,
};
pub use factor::{FactorCache, FactorCtx, Kind};
pub use form::{sector_of, set_bracket_fault, Form, PTerm};
pub use mono::FMono;
pub use sample::random_form;
pub use solve::Preimage;
pub use tensor::{parse_term, term_label, BigNum, DeformationTensor, TensorEntry, TensorFile, SCHEMA_VERSION};

#[cfg(test)]
mod tests;
