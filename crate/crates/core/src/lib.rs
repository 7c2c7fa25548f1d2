//! Leading-order curvature corrections to the fluctuations of a
//! Gaussian-smeared massless scalar field, and the resulting state of a
//! gapless Unruh-DeWitt detector.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: point curvature data and sign conventions;
//! * [`presets`]: analytic spacetimes (curvature at an event and full charts);
//! * [`smearing`]: the Gaussian smearing and its closed-form Fourier data;
//! * [`variance`]: closed-form coefficients and the corrected variance;
//! * [`oracle`]: brute-force quadrature and Monte-Carlo cross-checks;
//! * [`synge`]: numeric world function, Riemann normal coordinates and the
//!   short-distance expansions they validate;
//! * [`detector`]: gapless channel and gapped excitation probability;
//! * [`validation`]: the oracle-vs-closed-form report.
//!
//! Units are geometric (`c = ħ = 1`) with one global length unit.

pub mod detector;
pub mod ode;
pub mod oracle;
pub mod presets;
pub mod quadrature;
pub mod smearing;
pub mod synge;
pub mod tensor;
pub mod validation;
pub mod variance;

pub use detector::{QubitState, ChannelStrength};
pub use presets::{MetricChart, PresetSpec};
pub use smearing::{EffectiveSmearing, GaussianSmearing};
pub use tensor::{CurvatureData, MinkowskiMetric};
pub use variance::{CoefficientSet, VarianceBreakdown};
