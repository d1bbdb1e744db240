use serde_json::json;

use super::{antagonists, stats, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Signed sample z-score per cell; cells beyond `threshold` deviations in
/// magnitude are outliers.
pub fn outliers(cube: &Cube, measure: &str, threshold: f64) -> Result<Model> {
    let values = cube.values(measure)?;
    if values.len() < 2 {
        return Err(Error::model("outliers", "at least two cells are required"));
    }
    let z = stats::signed_zscores(&values);
    let mut m = Model::new("outliers", cube, measure).bind("threshold", threshold);
    m.characterize("mean", json!(stats::mean(&values)));
    m.characterize("stdev", json!(stats::sample_sd(&values)));
    let bits = z.iter().map(|v| v.abs() > threshold).collect();
    m.push(Component::numeric("Outlierness", z));
    antagonists(&mut m, "outliers", "Outliers", "Non-outliers", bits);
    Ok(m)
}
