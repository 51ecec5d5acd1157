//! Simulation laboratory for biased opinion dynamics on regular expanders.
//!
//! Two synchronous update rules are provided: the biased voter rule and the
//! biased 2-choices rule. Agents holding opinion `0` update with probability
//! `q0`, agents holding the superior opinion `1` with the smaller probability
//! `q1`. The crate covers:
//!
//! * [`graph`]: regular graph construction, spectral profile, conductance;
//! * [`dynamics`]: one-round steps, exact expected drift, the adversary;
//! * [`theory`]: closed-form drift bounds, thresholds and phase times;
//! * [`oracle`]: exact absorption analysis of the full chain for tiny graphs;
//! * [`harness`]: reproducible Monte Carlo trials, sweeps and scaling studies.

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod theory;

pub use dynamics::{AdversaryMode, BiasParams, DriftSample, OpinionState, Rule};
pub use error::{Error, Result};
pub use graph::{Graph, SpectralProfile};

/// Version tag embedded in every exported CSV/JSON document.
pub const SCHEMA_VERSION: u32 = 1;
