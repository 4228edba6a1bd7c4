//! Anomaly detection on acoustic segments with fidelity quantum kernels.
//!
//! Pipeline: audio segment → AR(d) coefficients ([`ar`]) → min-max scaling
//! into rotation angles → QK1/QK2 state encoding ([`featuremap`], simulated by
//! [`statevector`]) or an RBF baseline ([`classical`]) → Gram matrix
//! ([`gram`]) → ν one-class SVM ([`ocsvm`]) → decision scores and metrics
//! ([`eval`]). [`synth`] provides seeded stand-in datasets.

pub mod ar;
pub mod classical;
pub mod dataset;
pub mod detector;
pub mod error;
pub mod eval;
pub mod featuremap;
pub mod gram;
pub mod io;
pub mod ocsvm;
pub mod statevector;
pub mod synth;

pub use ar::{ArFit, Scaler, Signal};
pub use classical::RbfSpec;
pub use detector::AnomalyDetector;
pub use error::{Error, Result};
pub use featuremap::{Entanglement, FeatureMapSpec, GateCounts};
pub use gram::{GammaRule, GramMatrix, Kernel, KernelKind, KernelParams};
pub use ocsvm::{OcSvmModel, Prediction};
pub use statevector::StateVector;
pub use synth::{DatasetConfig, Label, LabeledSegment, Regime};
