use serde_json::json;

use super::{antagonists, attribute_column, stats, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Ordinary least squares of the measure on the attributes. Cells whose
/// residual exceeds `threshold` residual standard deviations are `Above`.
pub fn regression(cube: &Cube, measure: &str, attributes: &[String], threshold: f64) -> Result<Model> {
    let y = cube.values(measure)?;
    let cols = attributes.iter().map(|a| attribute_column(cube, a)).collect::<Result<Vec<_>>>()?;
    if y.len() < attributes.len() + 1 {
        return Err(Error::model("regression", "fewer cells than coefficients"));
    }
    let beta = stats::ols(&cols, &y).map_err(|k| {
        let what = if k == 0 { "the intercept".to_string() } else { format!("attribute {}", attributes[k - 1]) };
        Error::model("regression", format!("rank-deficient design: {what} is collinear with the preceding columns"))
    })?;
    let expected: Vec<f64> = (0..y.len())
        .map(|i| beta[0] + cols.iter().zip(&beta[1..]).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect();
    let resid: Vec<f64> = y.iter().zip(&expected).map(|(a, b)| a - b).collect();
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let my = stats::mean(&y);
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let sd = stats::sample_sd(&resid);
    let cut = threshold * if sd.is_finite() { sd } else { 0.0 };
    let mut m = Model::new("regression", cube, measure)
        .bind("attributes", attributes.join(","))
        .bind("threshold", threshold);
    m.characterize("coefficients", json!(beta));
    m.characterize("r2", json!(r2));
    m.characterize("residual_stdev", json!(sd));
    let above = resid.iter().map(|r| r.abs() > cut && r.abs() > 1e-12 * (1.0 + my.abs())).collect();
    m.push(Component::numeric("Expected", expected));
    m.push(Component::numeric("Discrepancy", resid));
    antagonists(&mut m, "residual", "Above", "Below", above);
    Ok(m)
}
