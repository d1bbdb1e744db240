//! Interestingness: per-cell significance, surprise against proxies,
//! component and model aggregation, and the selection of the winning
//! component.

use serde_json::{json, Map, Value};

use crate::cube::{num, Cube};
use crate::error::{Error, Result};
use crate::models::{stats, Model};

/// Per-cell significance of a cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Significance {
    /// Unsigned sample z-score of the measure.
    ZScore,
    /// The measure value itself.
    Measure,
    /// The mean of the measure over the whole cube, for every cell.
    Mean,
    Const(f64),
    /// Values of another column of the cube.
    Column(String),
}

impl Significance {
    pub fn name(&self) -> String {
        match self {
            Significance::ZScore => "zscore".into(),
            Significance::Measure => "measure".into(),
            Significance::Mean => "mean".into(),
            Significance::Const(v) => format!("const({v})"),
            Significance::Column(c) => format!("column({c})"),
        }
    }

    pub fn scores(&self, cube: &Cube, measure: &str) -> Result<Vec<f64>> {
        Ok(match self {
            Significance::ZScore => stats::abs_zscores(&cube.values(measure)?),
            Significance::Measure => cube.values(measure)?,
            Significance::Mean => {
                let v = cube.values(measure)?;
                vec![stats::mean(&v); v.len()]
            }
            Significance::Const(c) => vec![*c; cube.len()],
            Significance::Column(c) => cube.values(c)?,
        })
    }
}

/// Contrast between a new cell's significance and its proxies'.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    AbsDiff,
    /// new − old
    Difference,
    /// old − new
    ReverseDifference,
}

impl Delta {
    pub fn name(self) -> &'static str {
        match self {
            Delta::AbsDiff => "absdiff",
            Delta::Difference => "difference",
            Delta::ReverseDifference => "reverse_difference",
        }
    }

    pub fn apply(self, new: f64, old: f64) -> f64 {
        match self {
            Delta::AbsDiff => (new - old).abs(),
            Delta::Difference => new - old,
            Delta::ReverseDifference => old - new,
        }
    }
}

/// Aggregation of the surprises of a component's core cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompAgg {
    Mean,
    Sum,
    Max,
    Min,
    /// Cell count of the cube minus the sum of the core surprises.
    CountComplement,
}

impl CompAgg {
    pub fn name(self) -> &'static str {
        match self {
            CompAgg::Mean => "mean",
            CompAgg::Sum => "sum",
            CompAgg::Max => "max",
            CompAgg::Min => "min",
            CompAgg::CountComplement => "count_complement",
        }
    }

    /// Negative infinity for an empty core, so that it never wins.
    pub fn apply(self, core: &[f64], cells: usize) -> f64 {
        if core.is_empty() {
            return f64::NEG_INFINITY;
        }
        match self {
            CompAgg::Mean => core.iter().sum::<f64>() / core.len() as f64,
            CompAgg::Sum => core.iter().sum(),
            CompAgg::Max => core.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            CompAgg::Min => core.iter().copied().fold(f64::INFINITY, f64::min),
            CompAgg::CountComplement => cells as f64 - core.iter().sum::<f64>(),
        }
    }
}

/// Aggregation of the component scores of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelAgg {
    Mean,
    Max,
}

impl ModelAgg {
    pub fn name(self) -> &'static str {
        match self {
            ModelAgg::Mean => "mean",
            ModelAgg::Max => "max",
        }
    }

    /// Aggregates the finite scores; negative infinity when there are none.
    pub fn apply(self, scores: &[f64]) -> f64 {
        let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
        if finite.is_empty() {
            return f64::NEG_INFINITY;
        }
        match self {
            ModelAgg::Mean => stats::mean(&finite),
            ModelAgg::Max => finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoringPlan {
    pub sig_new: Significance,
    pub sig_old: Significance,
    pub delta: Delta,
    pub comp_agg: CompAgg,
    pub model_agg: ModelAgg,
}

impl ScoringPlan {
    /// z-scores on both cubes, absolute difference, mean over core cells.
    pub fn describe() -> Self {
        ScoringPlan {
            sig_new: Significance::ZScore,
            sig_old: Significance::ZScore,
            delta: Delta::AbsDiff,
            comp_agg: CompAgg::Mean,
            model_agg: ModelAgg::Mean,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "significance_new": self.sig_new.name(),
            "significance_old": self.sig_old.name(),
            "delta": self.delta.name(),
            "component_aggregation": self.comp_agg.name(),
            "model_aggregation": self.model_agg.name(),
        })
    }
}

/// Per-new-cell surprise. Significances over a proxy set are averaged before
/// the contrast is taken.
pub fn surprise(sig_new: &[f64], sig_old: &[f64], proxies: &[Vec<usize>], delta: Delta) -> Vec<f64> {
    assert_eq!(sig_new.len(), proxies.len(), "one proxy set per new cell");
    sig_new
        .iter()
        .zip(proxies)
        .map(|(&s, p)| {
            assert!(!p.is_empty(), "proxy sets are never empty");
            let old = p.iter().map(|&i| sig_old[i]).sum::<f64>() / p.len() as f64;
            delta.apply(s, old)
        })
        .collect()
}

/// Score of one component: `agg` over the surprises of its core cells.
pub fn component_score(model: &Model, component: usize, surprises: &[f64], agg: CompAgg) -> f64 {
    let core: Vec<f64> = model.components[component]
        .core_cells()
        .iter()
        .map(|&i| surprises[i])
        .collect();
    agg.apply(&core, surprises.len())
}

/// Components that compete for the highlight: members of some family.
pub fn candidates(model: &Model) -> Vec<usize> {
    let mut out: Vec<usize> = model.families.iter().flat_map(|f| f.members.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentScore {
    pub model: usize,
    pub component: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Highlight {
    pub model: usize,
    pub model_type: String,
    pub component: usize,
    pub component_name: String,
    pub score: f64,
    pub core_cells: Vec<usize>,
    pub core_coordinates: Vec<Vec<String>>,
    pub core_elements: Vec<String>,
    pub surprises: Vec<f64>,
    pub component_scores: Vec<ComponentScore>,
    pub model_scores: Vec<f64>,
}

impl Highlight {
    /// Highlight fixed by definition, without a scoring race.
    pub fn fixed(models: &[Model], model: usize, component: usize, cube: &Cube) -> Highlight {
        let c = &models[model].components[component];
        let core = c.core_cells();
        Highlight {
            model,
            model_type: models[model].model_type.clone(),
            component,
            component_name: c.name.clone(),
            score: f64::NAN,
            core_coordinates: core.iter().map(|&i| cube.cells()[i].coords.clone()).collect(),
            core_elements: core.iter().map(|&i| c.elements.display(i)).collect(),
            core_cells: core,
            surprises: Vec::new(),
            component_scores: Vec::new(),
            model_scores: Vec::new(),
        }
    }

    pub fn to_json(&self, models: &[Model]) -> Value {
        let labels = model_labels(models);
        let mut per_model = Map::new();
        for (l, s) in labels.iter().zip(&self.model_scores) {
            per_model.insert(l.clone(), num(*s));
        }
        json!({
            "model": labels[self.model],
            "model_type": self.model_type,
            "component": self.component_name,
            "score": num(self.score),
            "core_cells": self.core_cells,
            "core_cell_coordinates": self.core_coordinates,
            "core_elements": self.core_elements,
            "per_model_scores": per_model,
            "component_scores": self.component_scores.iter().map(|c| json!({
                "model": labels[c.model],
                "component": models[c.model].components[c.component].name,
                "score": num(c.score),
            })).collect::<Vec<_>>(),
            "surprises": self.surprises.iter().map(|s| num(*s)).collect::<Vec<_>>(),
        })
    }
}

/// Distinct display labels: the model type, suffixed with its position when
/// the type repeats.
pub fn model_labels(models: &[Model]) -> Vec<String> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if models.iter().filter(|o| o.model_type == m.model_type).count() > 1 {
                format!("{}#{}", m.model_type, i + 1)
            } else {
                m.model_type.clone()
            }
        })
        .collect()
}

/// Surprises of one model's cube under one scoring plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoring {
    pub plan: ScoringPlan,
    pub surprises: Vec<f64>,
}

impl Scoring {
    pub fn compute(plan: &ScoringPlan, old: &Cube, new: &Cube, measure: &str, proxies: &[Vec<usize>]) -> Result<Scoring> {
        let sn = plan.sig_new.scores(new, measure)?;
        let so = plan.sig_old.scores(old, measure)?;
        Ok(Scoring {
            plan: plan.clone(),
            surprises: surprise(&sn, &so, proxies, plan.delta),
        })
    }
}

/// Scores every candidate component of every model, `scorings[i]` applying
/// to `models[i]`, and returns the arg-max. Ties go to the earlier model, then
/// to the earlier component.
pub fn select(models: &[Model], scorings: &[Scoring], new: &Cube) -> Result<Highlight> {
    assert_eq!(models.len(), scorings.len(), "one scoring per model");
    let mut scores = Vec::new();
    let mut model_scores = Vec::new();
    for (mi, (m, sc)) in models.iter().zip(scorings).enumerate() {
        let mut own = Vec::new();
        for ci in candidates(m) {
            let score = component_score(m, ci, &sc.surprises, sc.plan.comp_agg);
            own.push(score);
            scores.push(ComponentScore { model: mi, component: ci, score });
        }
        model_scores.push(sc.plan.model_agg.apply(&own));
    }
    let mut best: Option<&ComponentScore> = None;
    for s in &scores {
        if best.is_none_or(|b| s.score > b.score) {
            best = Some(s);
        }
    }
    let best = best.ok_or(Error::NothingToHighlight)?.clone();
    let mut h = Highlight::fixed(models, best.model, best.component, new);
    h.score = best.score;
    h.surprises = scorings[best.model].surprises.clone();
    h.component_scores = scores;
    h.model_scores = model_scores;
    Ok(h)
}

/// One plan for every model: significance on both cubes (on the measure each
/// model is bound to), surprise through `proxies`, component and model
/// scores, and the winning component.
pub fn select_highlight(
    models: &[Model],
    plan: &ScoringPlan,
    old: &Cube,
    new: &Cube,
    proxies: &[Vec<usize>],
) -> Result<Highlight> {
    let mut cache: Vec<(String, Scoring)> = Vec::new();
    let mut scorings = Vec::new();
    for m in models {
        let measure = m.binding.get("measure").cloned().unwrap_or_default();
        let sc = match cache.iter().find(|(k, _)| *k == measure) {
            Some((_, s)) => s.clone(),
            None => {
                let s = Scoring::compute(plan, old, new, &measure, proxies)?;
                cache.push((measure, s.clone()));
                s
            }
        };
        scorings.push(sc);
    }
    select(models, &scorings, new)
}

/// Plan-free scoring from precomputed surprises shared by all models.
pub fn select_from_surprises(models: &[Model], surprises: &[f64], plan: &ScoringPlan, new: &Cube) -> Result<Highlight> {
    let sc = Scoring {
        plan: plan.clone(),
        surprises: surprises.to_vec(),
    };
    select(models, &vec![sc; models.len()], new)
}
