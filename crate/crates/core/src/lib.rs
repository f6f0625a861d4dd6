//! Bayesian monotone ordinal regression.
//!
//! The cumulative category probabilities `S(k | x)` are modelled as
//! piecewise-constant surfaces that are non-decreasing in every covariate and
//! ordered across categories. The prior is a marked Poisson point process on
//! the union of covariate subspaces, and the posterior is explored with a
//! reversible-jump Metropolis-Hastings sampler.
//!
//! Modules:
//! - [`mpp`]: point configurations, envelope evaluation and constraint bounds
//! - [`marks`]: uniform sampling of ordered mark vectors
//! - [`likelihood`]: data, link functions and the incremental likelihood cache
//! - [`sampler`]: the reversible-jump chain
//! - [`diagnostics`]: error metrics, covariate selection summaries, posterior
//!   surfaces and the proportional-odds baseline
//! - [`simgen`]: simulation scenarios with exact truth
//! - [`io`]: CSV ingestion, ECDF transforms, configuration files and sample streams

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod marks;
pub mod mpp;
pub mod sampler;
pub mod simgen;

pub use error::{Error, Result};
pub use likelihood::{Dataset, LinkKind, LinkSpec, ParametricState, SurvivalCache};
pub use mpp::{Configuration, Interval, SubspaceId, SupportPoint};
pub use sampler::{ModelSpec, SampleRecord, SamplerConfig};
