//! Numerics for dissipation, noise, and memory effects of strongly driven
//! Josephson junctions: lead Green's functions, polarization operators,
//! driven-junction admittance harmonics, shunted-resonator spectra and heat
//! flow, and a time-domain Langevin oracle for the frequency-domain results.

pub mod bessel;
pub mod config;
pub mod error;
pub mod junction;
pub mod material;
pub mod polarization;
pub mod quadrature;
pub mod resonator;
pub mod stochastic;
pub mod tasks;
pub mod units;

pub use error::{Error, Result};
