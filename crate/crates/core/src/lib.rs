//! Scattering and trapped-mode solver for 2D Helmholtz / Schrödinger problems
//! on domains with finitely many semi-infinite channels (waveguide junctions)
//! or quasi-periodic strips (diffraction gratings).
//!
//! The pipeline:
//!
//! 1. describe the geometry ([`geometry`]) and truncate the channels at a
//!    finite coordinate `z_j = R`, producing a polygonal domain with tagged
//!    cuts;
//! 2. mesh it with an in-repo conforming Delaunay mesher ([`geometry::mesh`]);
//! 3. build the channel mode bases u_n± with the branch convention
//!    Im λ_n ≤ 0 ([`modes`]);
//! 4. for every included mode solve the auxiliary difference problem with the
//!    artificial Robin operator B_j = ∂/∂z_j + iζ at the cuts ([`solver`]);
//! 5. assemble the Hermitian Gram matrix of cut-trace differences, extract
//!    the coefficient matrices Ĉ± from its smallest eigenpairs, and form the
//!    scattering matrix S and the trapped-mode indicator σ_min(C₂₂)
//!    ([`scattering`]).
//!
//! [`scenarios`] provides parametrized generators for the example systems
//! (bent waveguide with leads, one-side indentation, three-channel resonator
//! with an electrostatic handling potential, lamellar grating).

pub mod geometry;
pub mod linalg;
pub mod modes;
pub mod scattering;
pub mod scenarios;
pub mod solver;

pub use num_complex::Complex64;
