use serde_json::json;

use super::{antagonists, stats, Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

/// Ranks cells by descending measure and splits them into the top `k` and the rest.
pub fn topk_rank(cube: &Cube, measure: &str, k: usize) -> Result<Model> {
    if k == 0 {
        return Err(Error::model("topk", "k must be at least 1"));
    }
    let values = cube.values(measure)?;
    let k = if k > values.len() {
        log::warn!("topk: k = {k} exceeds the {} cells of {}; clamped", values.len(), cube.name);
        values.len()
    } else {
        k
    };
    let rank = stats::descending_rank(&values);
    let mut m = Model::new("topk", cube, measure).bind("k", k);
    m.characterize("k", json!(k));
    m.push(Component::numeric("Rank", rank.iter().map(|&r| r as f64).collect()));
    let top = rank.iter().map(|&r| r <= k).collect();
    antagonists(&mut m, "top-k", &format!("Top-{k}"), &format!("Non-top-{k}"), top);
    Ok(m)
}
