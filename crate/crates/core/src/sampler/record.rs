use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::likelihood::ParametricState;
use crate::mpp::{Configuration, SupportPoint};

/// One retained state of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub chain: u64,
    /// Iteration count (burn-in included) at which the state was taken.
    pub iteration: usize,
    pub log_likelihood: f64,
    /// Points per subspace, in enumeration order.
    pub counts: Vec<usize>,
    pub intensities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ParametricState>,
    pub origin: Vec<f64>,
    pub points: Vec<SupportPoint>,
    /// Survival values `S_2..S_K` at each recorded grid location, flattened.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_survival: Vec<f64>,
}

impl SampleRecord {
    pub fn total_points(&self) -> usize {
        self.points.len()
    }

    /// Rebuilds the configuration, checking every invariant.
    pub fn to_configuration(&self, spec: &ModelSpec) -> Result<Configuration> {
        let mut config = Configuration::new(spec.covariates, spec.levels, spec.range, spec.pins_top(), self.origin.clone())?;
        if self.intensities.len() != config.subspaces().len() {
            return Err(Error::Format(format!(
                "record has {} intensities, model has {} subspaces",
                self.intensities.len(),
                config.subspaces().len()
            )));
        }
        for (slot, &v) in self.intensities.iter().enumerate() {
            config.set_intensity(slot, v);
        }
        for pt in &self.points {
            config.push_point(pt.clone())?;
        }
        if let Some(v) = config.validate().first() {
            return Err(Error::Format(format!("record at iteration {}: {v}", self.iteration)));
        }
        if config.counts() != self.counts.as_slice() {
            return Err(Error::Format(format!("record at iteration {}: counts disagree with points", self.iteration)));
        }
        Ok(config)
    }

    pub fn theta_or_empty(&self) -> ParametricState {
        self.theta.clone().unwrap_or_else(ParametricState::empty)
    }
}
