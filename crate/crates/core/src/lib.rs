//! Finite-field fractional random walks X ↦ 1/X + ε: kernels, spectra,
//! mixing bounds, comparison of Dirichlet forms and hyperbola counts.

pub mod ffield;
pub mod kernels;
pub mod spectral;
pub mod mixing;
pub mod comparison;
pub mod hyperbola;
