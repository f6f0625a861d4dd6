use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical distribution function of a training column.
///
/// `apply(v)` is the fraction of training values `<= v`, so tied values share
/// the largest rank and the training maximum maps to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcdfTransform {
    sorted: Vec<f64>,
}

impl EcdfTransform {
    pub fn fit(column: &[f64]) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::Data("cannot fit an ECDF to an empty column".into()));
        }
        if let Some(v) = column.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value {v} in ECDF column")));
        }
        let mut sorted = column.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// All training values equal: the transformed covariate is constant.
    pub fn is_degenerate(&self) -> bool {
        self.sorted.first() == self.sorted.last()
    }

    pub fn apply(&self, value: f64) -> f64 {
        let rank = self.sorted.partition_point(|&s| s <= value);
        rank as f64 / self.sorted.len() as f64
    }

    pub fn apply_all(&self, column: &[f64]) -> Vec<f64> {
        column.iter().map(|&v| self.apply(v)).collect()
    }
}

/// Fits and applies the ECDF in one step.
pub fn ecdf_transform(column: &[f64]) -> Result<Vec<f64>> {
    Ok(EcdfTransform::fit(column)?.apply_all(column))
}
