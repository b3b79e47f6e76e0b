//! Green's functions of implicit finite-difference schemes `Q1 u^{n+1} = Q0 u^n`
//! on the integer lattice, and generalized Gaussian bounds for their temporal
//! convolution powers.

pub mod assumptions;
pub mod banded;
pub mod contour;
pub mod envelope;
pub mod error;
pub mod profile;
pub mod quadrature;
pub mod roots;
pub mod schemes;
pub mod spatial_green;
pub mod spectral;
pub mod symbols;
pub mod temporal_green;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use profile::{GreenProfile, ProfileMeta};
pub use symbols::{ConvolutionOperator, SchemePair};
