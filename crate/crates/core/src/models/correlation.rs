use serde_json::json;

use super::{antagonists, attribute_column, stats, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Pearson and Kendall coefficients between a measure and an attribute, with
/// each cell's participation measured as the change in Pearson's r when the
/// cell is left out.
pub fn correlation(cube: &Cube, measure: &str, attribute: &str, threshold: Option<f64>) -> Result<Model> {
    let y = cube.values(measure)?;
    let x = attribute_column(cube, attribute)?;
    let n = y.len();
    if n < 3 {
        return Err(Error::model("correlation", "at least three cells are required"));
    }
    if !(stats::sample_var(&x) > 0.0) || !(stats::sample_var(&y) > 0.0) {
        return Err(Error::model("correlation", "zero variance"));
    }
    let r = stats::pearson(&x, &y);
    let participation: Vec<f64> = (0..n)
        .map(|i| {
            let xs: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let ys: Vec<f64> = y.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let loo = stats::pearson(&xs, &ys);
            if loo.is_finite() {
                r - loo
            } else {
                0.0
            }
        })
        .collect();
    let threshold = threshold.unwrap_or_else(|| stats::mean(&participation.iter().map(|p| p.abs()).collect::<Vec<_>>()));
    let mut m = Model::new("correlation", cube, measure).bind("attribute", attribute).bind("threshold", threshold);
    m.characterize("pearson", json!(r));
    m.characterize("kendall", json!(stats::kendall_tau(&x, &y)));
    let above = participation.iter().map(|p| p.abs() > threshold).collect();
    m.push(Component::numeric("Participation", participation));
    antagonists(&mut m, "participation", "Participating", "Non-participating", above);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::cn;

    #[test]
    fn linear_pairs() {
        let c = cn();
        let v = c.values("HoursPerWeek").unwrap();
        let up = c.with_measure("twice", &v.iter().map(|x| 2.0 * x + 1.0).collect::<Vec<_>>()).unwrap();
        let m = correlation(&up, "HoursPerWeek", "twice", None).unwrap();
        assert!((m.characterization["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let down = c.with_measure("neg", &v.iter().map(|x| -x).collect::<Vec<_>>()).unwrap();
        let m = correlation(&down, "HoursPerWeek", "neg", None).unwrap();
        assert!((m.characterization["pearson"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        assert!((m.characterization["kendall"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let c = cn();
        let flat = c.with_measure("flat", &vec![1.0; c.len()]).unwrap();
        assert!(correlation(&flat, "HoursPerWeek", "flat", None).is_err());
    }
}
