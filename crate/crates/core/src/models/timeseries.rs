use std::collections::BTreeMap;

use serde_json::json;

use super::{antagonists, stats, Component, Model};
use crate::cube::{Cell, Cube};
use crate::error::{Error, Result};

/// Cell positions of each series in `cube`, ordered by the time level's
/// domain order. Series are keyed by their non-time coordinates.
fn series(cube: &Cube, time_dim: &str) -> Result<(usize, Vec<(Vec<String>, Vec<usize>)>)> {
    let t = cube
        .axis_of(time_dim)
        .ok_or_else(|| Error::Plan(format!("cube `{}` has no time dimension `{time_dim}`", cube.name)))?;
    let ax = &cube.axes()[t];
    let level = ax.dimension.level(ax.level);
    let mut map: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for (i, c) in cube.cells().iter().enumerate() {
        let mut key = c.coords.clone();
        key.remove(t);
        map.entry(key).or_default().push(i);
    }
    let mut out: Vec<(Vec<String>, Vec<usize>)> = map.into_iter().collect();
    for (_, cells) in out.iter_mut() {
        cells.sort_by_key(|&i| level.position(&cube.cells()[i].coords[t]));
    }
    Ok((t, out))
}

/// Centered moving average; the window shrinks symmetrically at the edges.
pub fn centered_ma(x: &[f64], window: usize) -> Vec<f64> {
    let h = window / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let r = h.min(i).min(n - 1 - i);
            stats::mean(&x[i - r..=i + r])
        })
        .collect()
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::model("ts_decompose", format!("window {window} must be odd")));
    }
    Ok(())
}

/// Trend, seasonality and noise per series. No period is configured, so the
/// seasonality is zero and noise is the residual from the trend.
pub fn ts_decompose(cube: &Cube, measure: &str, time_dim: &str, window: usize) -> Result<Model> {
    check_window(window)?;
    let values = cube.values(measure)?;
    let (_, all) = series(cube, time_dim)?;
    let mut trend = vec![0.0; cube.len()];
    for (key, cells) in &all {
        if cells.len() < 2 {
            return Err(Error::model("ts_decompose", format!("series {key:?} has fewer than two points")));
        }
        let x: Vec<f64> = cells.iter().map(|&i| values[i]).collect();
        for (&i, t) in cells.iter().zip(centered_ma(&x, window)) {
            trend[i] = t;
        }
    }
    let season = vec![0.0; cube.len()];
    let noise = values.iter().zip(&trend).zip(&season).map(|((v, t), s)| v - t - s).collect();
    let mut m = Model::new("ts_decompose", cube, measure).bind("time", time_dim).bind("window", window);
    m.characterize("window", json!(window));
    m.push(Component::numeric("Trend", trend));
    m.push(Component::numeric("Seasonality", season));
    m.push(Component::numeric("Noise", noise));
    Ok(m)
}

struct ArFit {
    coefficients: Option<Vec<f64>>,
    drift: f64,
    rmse: f64,
}

fn fit_ar(x: &[f64], p: usize) -> ArFit {
    let n = x.len();
    let drift = (x[n - 1] - x[0]) / (n - 1) as f64;
    let rows = n - p;
    let fallback = |x: &[f64]| {
        let err: Vec<f64> = (1..n).map(|t| x[t] - (x[t - 1] + drift)).collect();
        ArFit {
            coefficients: None,
            drift,
            rmse: (err.iter().map(|e| e * e).sum::<f64>() / err.len() as f64).sqrt(),
        }
    };
    if rows < p + 1 {
        return fallback(x);
    }
    let cols: Vec<Vec<f64>> = (1..=p).map(|j| (p..n).map(|t| x[t - j]).collect()).collect();
    let y: Vec<f64> = x[p..].to_vec();
    match stats::ols(&cols, &y) {
        Ok(beta) => {
            let err: Vec<f64> = (p..n)
                .map(|t| x[t] - (beta[0] + (1..=p).map(|j| beta[j] * x[t - j]).sum::<f64>()))
                .collect();
            ArFit {
                rmse: (err.iter().map(|e| e * e).sum::<f64>() / err.len() as f64).sqrt(),
                coefficients: Some(beta),
                drift,
            }
        }
        Err(_) => fallback(x),
    }
}

/// Forecasts `k` points per series with a least-squares AR(`p`) model fitted
/// on the trend. Returns the cube extended with the forecast cells and a model
/// over it whose `Predicted` component marks those cells.
pub fn ar_predict(
    cube: &Cube,
    measure: &str,
    time_dim: &str,
    k: usize,
    p: usize,
    window: usize,
) -> Result<(Cube, Model)> {
    if k == 0 || p == 0 {
        return Err(Error::model("ar", "k and the order must be positive"));
    }
    check_window(window)?;
    let mk = cube.measure_index(measure)?;
    let values = cube.values(measure)?;
    let (t, all) = series(cube, time_dim)?;
    let ax = &cube.axes()[t];
    let level = ax.dimension.level(ax.level);

    let mut cells: Vec<Cell> = cube.cells().to_vec();
    let mut trend_of: BTreeMap<Vec<String>, f64> = BTreeMap::new();
    let mut fits = Vec::new();
    for (key, idx) in &all {
        if idx.len() <= p {
            return Err(Error::model("ar", format!("series {key:?} has {} points, order {p} needs more", idx.len())));
        }
        let x: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let mut trend = centered_ma(&x, window);
        for (&i, tv) in idx.iter().zip(&trend) {
            trend_of.insert(cube.cells()[i].coords.clone(), *tv);
        }
        let fit = fit_ar(&trend, p);
        let last_pos = level.position(&cube.cells()[*idx.last().unwrap()].coords[t]).expect("member");
        for h in 1..=k {
            let next = match &fit.coefficients {
                Some(b) => b[0] + (1..=p).map(|j| b[j] * trend[trend.len() - j]).sum::<f64>(),
                None => trend[trend.len() - 1] + fit.drift,
            };
            trend.push(next);
            let member = level.members().get(last_pos + h).ok_or_else(|| {
                Error::model("ar", format!("time level {time_dim} has no member {h} steps after the series end"))
            })?;
            let mut coords = key.clone();
            coords.insert(t, member.clone());
            let mut vals = vec![f64::NAN; cube.measures().len()];
            vals[mk] = next;
            trend_of.insert(coords.clone(), next);
            cells.push(Cell { coords, values: vals });
        }
        fits.push(json!({
            "series": key,
            "method": if fit.coefficients.is_some() { "ar" } else { "drift" },
            "coefficients": fit.coefficients,
            "drift": fit.drift,
            "rmse": fit.rmse,
        }));
    }
    let mut extended = Cube::new(&cube.name, cube.axes().to_vec(), cube.measures().to_vec(), cells)?;
    extended.query = cube.query.clone();
    let known: Vec<bool> = extended.cells().iter().map(|c| cube.find(&c.coords).is_some()).collect();
    let trend: Vec<f64> = extended.cells().iter().map(|c| trend_of[&c.coords]).collect();
    let mut m = Model::new("ar", &extended, measure)
        .bind("time", time_dim)
        .bind("k", k)
        .bind("order", p)
        .bind("window", window);
    m.characterize("fits", json!(fits));
    m.push(Component::numeric("Trend", trend));
    antagonists(&mut m, "forecast", "Known", "Predicted", known);
    Ok((extended, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Axis;
    use crate::dimension::Dimension;
    use std::sync::Arc;

    fn series_cube(values: &[f64], horizon: usize) -> Cube {
        let years: Vec<String> = (0..values.len() + horizon).map(|i| (2000 + i).to_string()).collect();
        let rows: Vec<[&str; 1]> = years.iter().map(|y| [y.as_str()]).collect();
        let refs: Vec<&[&str]> = rows.iter().map(|r| &r[..]).collect();
        let d = Arc::new(Dimension::chain("year", &["L0"], &refs).unwrap());
        let cells = values
            .iter()
            .enumerate()
            .map(|(i, v)| Cell { coords: vec![years[i].clone()], values: vec![*v] })
            .collect();
        Cube::new("s", vec![Axis::new(d, 0)], vec!["m".into()], cells).unwrap()
    }

    #[test]
    fn linear_trend_away_from_edges() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = ts_decompose(&series_cube(&x, 0), "m", "year", 5).unwrap();
        let t = m.component("Trend").unwrap().elements.numeric().unwrap();
        for i in 2..8 {
            assert!((t[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series() {
        let c = series_cube(&[4.0; 6], 3);
        let m = ts_decompose(&c, "m", "year", 5).unwrap();
        assert!(m.component("Noise").unwrap().elements.numeric().unwrap().iter().all(|v| *v == 0.0));
        let (ext, model) = ar_predict(&c, "m", "year", 3, 2, 5).unwrap();
        assert_eq!(ext.len(), 9);
        for i in model.component("Predicted").unwrap().core_cells() {
            assert!((ext.cells()[i].values[0] - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ar1_matches_recursion() {
        let mut x = vec![0.0];
        for _ in 0..11 {
            let last = *x.last().unwrap();
            x.push(0.5 * last + 3.0);
        }
        let c = series_cube(&x, 4);
        let (ext, m) = ar_predict(&c, "m", "year", 4, 1, 1).unwrap();
        let mut expect = *x.last().unwrap();
        for i in m.component("Predicted").unwrap().core_cells() {
            expect = 0.5 * expect + 3.0;
            assert!((ext.cells()[i].values[0] - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn exhausted_time_domain() {
        let c = series_cube(&[1.0, 2.0, 3.0, 5.0], 1);
        assert!(ar_predict(&c, "m", "year", 2, 1, 1).is_err());
    }
}
