//! Heterodyne detection of light whose image band is quantum-correlated with
//! the signal by a parametric amplifier.
//!
//! Three independent routes to the same observables:
//! closed forms ([`analytic`]), a Gaussian-state engine ([`gaussian`],
//! [`oracle`]) and Monte-Carlo records ([`synth`]) measured by a spectral
//! estimator ([`spectral`]). [`experiments`] ties them into sweeps and the
//! cross-validation suite.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod oracle;
pub mod scenario;
pub mod spectral;
pub mod synth;

pub use analytic::{Method, NoiseFigureResult, PsdForm, PsdModel};
pub use error::{QhetError, Result};
pub use gaussian::{BeatStatistics, GaussianState, ModeMoments, SymplecticTransform};
pub use spectral::{PsdEstimate, WelchConfig, Window};
pub use synth::{TimeSeries, synthesize_colored_noise, synthesize_photocurrent};
pub use scenario::{load_scenario, DerivedParams, PhysicalConstants, Scenario, UnitSystem};
