use std::path::Path;

use anyhow::{Context, Result};
use monord_core::io::write_csv;
use monord_core::SubspaceId;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_csv(path, &header, rows)?;
    Ok(())
}

pub fn numbered(prefix: &str, from: usize, to: usize) -> Vec<String> {
    (from..=to).map(|i| format!("{prefix}{i}")).collect()
}

/// Column-friendly subspace name such as `x1_x3`.
pub fn subspace_label(id: SubspaceId) -> String {
    id.indices().map(|j| format!("x{}", j + 1)).collect::<Vec<_>>().join("_")
}

pub fn fmt(v: f64) -> String {
    v.to_string()
}

/// Mean, standard deviation and the 2.5%, 50% and 97.5% quantiles.
pub fn describe(values: &[f64]) -> [f64; 5] {
    if values.is_empty() {
        return [f64::NAN; 5];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    [mean, var.sqrt(), quantile(&sorted, 0.025), quantile(&sorted, 0.5), quantile(&sorted, 0.975)]
}

/// Linearly interpolated quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}
