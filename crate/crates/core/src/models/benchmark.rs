use serde_json::json;

use super::{antagonists, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Benchmark value for every cell of `cube`, looked up by coordinates in
/// `bench`. Both cubes must use the same levels on the cube's dimensions.
pub fn benchmark_values(cube: &Cube, measure: &str, bench: &Cube, name: &str) -> Result<Vec<f64>> {
    let mut map = Vec::with_capacity(cube.axes().len());
    for a in cube.axes() {
        let bi = bench.axis_of(a.dim_name()).ok_or_else(|| {
            Error::Schema(format!("benchmark {name} has no dimension {}", a.dim_name()))
        })?;
        if bench.axes()[bi].level_name() != a.level_name() {
            return Err(Error::Schema(format!(
                "benchmark {name} is at level {}.{}, cube at {}.{}",
                a.dim_name(),
                bench.axes()[bi].level_name(),
                a.dim_name(),
                a.level_name()
            )));
        }
        map.push(bi);
    }
    if bench.axes().len() != map.len() {
        return Err(Error::Schema(format!("benchmark {name} has dimensions the cube lacks")));
    }
    let k = match bench.measure_index(measure) {
        Ok(k) => k,
        Err(_) if bench.measures().len() == 1 => 0,
        Err(e) => return Err(e),
    };
    cube.cells()
        .iter()
        .map(|c| {
            let mut coords = vec![String::new(); map.len()];
            for (ci, &bi) in map.iter().enumerate() {
                coords[bi] = c.coords[ci].clone();
            }
            bench.find(&coords).map(|i| bench.cells()[i].values[k]).ok_or_else(|| Error::BenchmarkMismatch {
                benchmark: name.to_string(),
                coordinates: c.coords.clone(),
            })
        })
        .collect()
}

/// Discrepancy of every cell from its benchmark value, split by sign.
pub fn benchmark_discrepancy(cube: &Cube, measure: &str, bench_name: &str, bench: &[f64]) -> Result<Model> {
    let values = cube.values(measure)?;
    if bench.len() != values.len() {
        return Err(Error::model("benchmark", format!("{} benchmark values for {} cells", bench.len(), values.len())));
    }
    let disc: Vec<f64> = values.iter().zip(bench).map(|(v, b)| v - b).collect();
    let mut m = Model::new("benchmark", cube, measure).bind("benchmark", bench_name);
    m.characterize("positive", json!(disc.iter().filter(|d| **d > 0.0).count()));
    m.push(Component::numeric("BenchmarkValue", bench.to_vec()));
    let nonpositive = disc.iter().map(|d| *d <= 0.0).collect();
    m.push(Component::numeric("Discrepancy", disc));
    antagonists(&mut m, "sign", "MC-", "MC+", nonpositive);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::cn;

    #[test]
    fn self_benchmark_is_all_nonpositive() {
        let c = cn();
        let b = benchmark_values(&c, "HoursPerWeek", &c, "self").unwrap();
        let m = benchmark_discrepancy(&c, "HoursPerWeek", "self", &b).unwrap();
        assert_eq!(m.component("MC-").unwrap().core_cells().len(), c.len());
        assert!(m.component("Discrepancy").unwrap().elements.numeric().unwrap().iter().all(|d| *d == 0.0));
    }

    #[test]
    fn missing_coordinate_is_named() {
        let c = cn();
        let partial = c.subset(&[0, 1]);
        let err = benchmark_values(&c, "HoursPerWeek", &partial, "p").unwrap_err();
        assert!(matches!(err, Error::BenchmarkMismatch { .. }));
    }
}
