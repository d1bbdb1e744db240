use serde_json::json;

use super::{antagonists, stats, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Variance comparison of `new` against `old` plus per-cell deviation from the
/// mean of `new`, split at one sample standard deviation.
pub fn variance_test(new: &Cube, old: &Cube, measure: &str) -> Result<Model> {
    let nv = new.values(measure)?;
    let ov = old.values(measure)?;
    if nv.len() < 2 || ov.len() < 2 {
        return Err(Error::model("ftest", "both cubes need at least two cells"));
    }
    let (var_new, var_old) = (stats::sample_var(&nv), stats::sample_var(&ov));
    let f = var_old / var_new;
    let mean = stats::mean(&nv);
    let sd = var_new.sqrt();
    let disc: Vec<f64> = nv.iter().map(|v| v - mean).collect();
    let mut m = Model::new("ftest", new, measure).bind("reference", &old.name);
    m.characterize("F", json!(f));
    m.characterize("F_inverse", json!(var_new / var_old));
    m.characterize("p_value", json!(two_sided_p(f, ov.len() - 1, nv.len() - 1)));
    m.characterize("mean", json!(mean));
    m.characterize("stdev", json!(sd));
    m.push(Component::numeric("Fstat", vec![f; nv.len()]));
    let above = disc.iter().map(|d| d.abs() > sd).collect();
    m.push(Component::numeric("Discrepancy", disc));
    antagonists(&mut m, "stdev", "AboveStdev", "BelowStdev", above);
    Ok(m)
}

/// Two-sided p-value of the variance ratio `f` with `(d1, d2)` degrees of
/// freedom. NaN when a variance is zero.
fn two_sided_p(f: f64, d1: usize, d2: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, FisherSnedecor};
    if !f.is_finite() || f <= 0.0 {
        return f64::NAN;
    }
    match FisherSnedecor::new(d1 as f64, d2 as f64) {
        Ok(dist) => {
            let lower = dist.cdf(f);
            (2.0 * lower.min(1.0 - lower)).min(1.0)
        }
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::cn;

    #[test]
    fn self_comparison_has_unit_ratio() {
        let c = cn();
        let m = variance_test(&c, &c, "HoursPerWeek").unwrap();
        assert!((m.characterization["F"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let d = m.component("Discrepancy").unwrap().elements.numeric().unwrap();
        assert!(d.iter().sum::<f64>().abs() < 1e-9);
        assert!((m.characterization["p_value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn p_value_is_symmetric_in_the_ratio() {
        let a = two_sided_p(3.0, 4, 7);
        let b = two_sided_p(1.0 / 3.0, 7, 4);
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn p_value_matches_closed_form_cdf() {
        // F(2, 2) has cdf x / (1 + x).
        for x in [0.2, 1.0, 3.0, 9.0] {
            let lower: f64 = x / (1.0 + x);
            let expect = 2.0 * lower.min(1.0 - lower);
            assert!((two_sided_p(x, 2, 2) - expect).abs() < 1e-12, "{x}");
        }
    }
}
