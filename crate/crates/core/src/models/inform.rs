use crate::cube::Cube;
use crate::error::Result;

/// Kullback-Leibler divergence of the normalized values from the uniform
/// distribution over the same cells. `None` when the values cannot be read as
/// a distribution (a negative value or a non-positive total).
pub fn kl_to_uniform(values: &[f64]) -> Option<f64> {
    let total: f64 = values.iter().sum();
    if values.is_empty() || !(total > 0.0) || values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return None;
    }
    let n = values.len() as f64;
    Some(
        values
            .iter()
            .map(|v| v / total)
            .filter(|p| *p > 0.0)
            .map(|p| p * (p * n).ln())
            .sum::<f64>()
            .max(0.0),
    )
}

/// Score of each candidate cube, `None` for candidates that cannot be scored.
pub fn inform_scores(candidates: &[Cube], measure: &str) -> Result<Vec<Option<f64>>> {
    candidates
        .iter()
        .map(|c| {
            let s = kl_to_uniform(&c.values(measure)?);
            if s.is_none() {
                log::warn!("inform: candidate {} has no positive total and is skipped", c.name);
            }
            Ok(s)
        })
        .collect()
}
