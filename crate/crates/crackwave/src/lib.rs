//! Trapped modes of the traction-free elasticity operator on a cracked strip (2D)
//! and a cracked plate (3D) at zero Poisson ratio.
//!
//! The pipeline: Rayleigh–Lamb dispersion and its threshold ([`dispersion`]), the
//! threshold eigenfunction ([`modes`]), the Dirichlet-to-Neumann symbol ([`dtn`]),
//! Galerkin blocks of the truncated boundary operator ([`boundary_op`]), the
//! eigenvalue solvers ([`spectral`]) and the asymptotic constants ([`asymptotics`]).
//!
//! Scalar kernels are generic over [`Real`] (`f32`/`f64`); the solvers work in `f64`.

pub mod asymptotics;
pub mod boundary_op;
pub mod context;
pub mod dispersion;
pub mod dtn;
pub mod error;
pub mod modes;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double precision dispersion context.
pub type Dispersion = dispersion::DispersionContext<f64>;
/// Double precision Gauss–Legendre rule.
pub type GaussRule = quad::GaussLegendre<f64>;
