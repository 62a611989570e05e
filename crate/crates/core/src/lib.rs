//! Spatial correlation and secret-key-rate bounds for reciprocity-based key
//! generation under realistic propagation.
//!
//! The library models the downlink channel seen by two legitimate parties and
//! a nearby eavesdropper as a multipath process with a configurable angular
//! power spectrum, computes the eavesdropper's spatial correlation coefficient
//! (closed forms where they exist, spherical quadrature otherwise), and
//! evaluates the Gaussian mutual informations and secret-key-rate bounds that
//! follow from it. A Monte Carlo multipath simulator acts as an independent
//! oracle for both the correlation coefficient and the information quantities.

pub mod bessel;
pub mod bounds;
pub mod correlation;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod spectrum;

pub use bounds::{BoundsReport, CovarianceSet, Scenario, TightCase};
pub use correlation::{CorrelationCoefficient, Displacement};
pub use error::{Error, Result};
pub use montecarlo::{McConfig, ObservationTriple, PathMode, ValidationReport};
pub use rng::CounterRng;
pub use num_complex::Complex64;
pub use spectrum::{AngularSpectrum, Direction, PathComponent};
