//! Numerical toolkit for wave propagation in radially symmetric media:
//! geodesic kinematics, periodic broken-ray length spectra, quantized mode
//! frequencies, synthetic wave traces with singularity prediction, and the
//! Abel-transform machinery behind length-spectral rigidity experiments.

pub mod error;
pub mod lsp;
pub mod model;
pub mod modes;
pub mod num;
pub mod profile;
pub mod trace;
pub mod rays;
pub mod rigidity;

pub use error::{Error, Result};
pub use lsp::{PeriodicOrbit, Stability};
pub use model::{normalize_metric, MetricTable, ModelDocument, RadialModel};
pub use modes::Mode;
pub use profile::{Profile, ProfileDoc};
pub use rays::{GeodesicSummary, PathSample, Regime};
