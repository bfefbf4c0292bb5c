//! Finite-N kernels of the normal matrix ensemble with radial potential
//! `|z|^α`, their asymptotics and the numerical checks around them.

pub mod asymptotic;
pub mod correlations;
pub mod error;
pub mod euler_maclaurin;
pub mod kernel_exact;
pub mod quad;
pub mod radial_sampler;
pub mod saddle;
pub mod specfun;
pub mod taylor_a2;

pub use error::{Error, Result};
pub use kernel_exact::KernelParams;
pub use specfun::ScaledComplex;
