//! Generic numerical kernels: ODE integration, root finding, symmetric
//! eigenproblems and Fourier tools.

pub mod eigen;
pub mod fourier;
pub mod ode;
pub mod roots;

pub use eigen::{eigen_sym, eigenvalues_sym, EigenError, SymmetricEigen, SymmetricMatrix};
pub use fourier::{periodic_trapezoid, spectral_derivative, wavenumbers, FourierError, SpectralGrid};
pub use ode::{
    integrate, integrate_until_event, Crossing, EventHit, EventSpec, IvpSpec, OdeError, Trajectory,
};
pub use roots::{bisect, brent, RootError};
