//! Singular integrals over the annulus `G_R` and the Beltrami solver built on them.

pub mod density;
pub mod ops;
pub mod phi;
pub mod solve;

pub use density::{AnnulusSpec, LaurentDensity, Monomial};
pub use ops::{
    basis_fraction, basis_fraction_conj, beurling_pi, cauchy_t, gram_r2, pair_with_basis, pairing,
    BeurlingImage,
};
pub use phi::{phi_functional, PhiData};
pub use solve::{build_map, neumann_solve, MapRepresentation, NeumannOptions, NeumannSolution};
