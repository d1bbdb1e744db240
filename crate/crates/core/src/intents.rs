//! Execution of the five intentional operators: data acquisition, model
//! construction and highlight selection, producing an enhanced cube.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::catalog::Catalog;
use crate::cube::{Axis, Cell, Cube};
use crate::dimension::{Dimension, ALL_LEVEL, ALL_MEMBER};
use crate::error::{Error, Result};
use crate::highlights::{self, CompAgg, Delta, Highlight, ModelAgg, Scoring, ScoringPlan, Significance};
use crate::iql::{render_cube_query, render_intention, By, Intention, ModelCall, Verb};
use crate::models::{
    ar_predict, inform_scores, kpi, stats, ts_decompose, Component, Elements, Model, ModelRequest, Param,
};
use crate::proxies::{proxies, same_coordinates};
use crate::query::CubeQuery;
use crate::selection::{eval_selection, Condition};

/// Number of candidate queries a suggestion considers.
pub const SUGGEST_CANDIDATES: usize = 4;
/// Autoregression order and trend window of the forecasting model.
pub const AR_ORDER: usize = 2;
pub const TREND_WINDOW: usize = 5;

/// A cube with its models and highlight.
#[derive(Debug, Clone)]
pub struct EnhancedCube {
    pub cube: Cube,
    pub models: Vec<Model>,
    pub highlight: Option<Highlight>,
    pub provenance: Value,
}

impl EnhancedCube {
    pub fn to_json(&self) -> Value {
        json!({
            "cube": self.cube.to_json(),
            "models": self.models.iter().map(Model::to_json).collect::<Vec<_>>(),
            "highlight": self.highlight.as_ref().map(|h| h.to_json(&self.models)),
            "provenance": self.provenance,
        })
    }

    /// A plain cube-query result: no models, no highlight.
    pub fn plain(cube: Cube, text: &str) -> Self {
        let plan = json!({"query": cube.query.as_ref().map(render_cube_query)});
        EnhancedCube {
            cube,
            models: Vec::new(),
            highlight: None,
            provenance: json!({"intention_text": text, "plan": plan}),
        }
    }
}

/// What an intention may read: the catalog, the cubes bound in the session
/// and the seed of the seeded models.
pub struct Context<'a> {
    pub catalog: &'a Catalog,
    pub bindings: &'a BTreeMap<String, Cube>,
    pub seed: u64,
}

impl Context<'_> {
    pub fn cube(&self, name: &str) -> Result<Cube> {
        match self.bindings.get(name) {
            Some(c) => Ok(c.clone()),
            None => self.catalog.resolve_cube(name),
        }
    }

    fn eval(&self, q: &CubeQuery, name: &str) -> Result<Cube> {
        self.catalog.eval_query(q, name)
    }

    #[allow(clippy::too_many_arguments)]
    fn model(
        &self,
        name: &str,
        cube: &Cube,
        measure: &str,
        attributes: &[String],
        params: &BTreeMap<String, Param>,
        other: Option<&Cube>,
    ) -> Result<Model> {
        let req = ModelRequest {
            cube,
            measure,
            attributes,
            params,
            other,
            benchmark: None,
            rules: None,
            seed: self.seed,
        };
        self.catalog.models.compute(name, &req)
    }
}

/// The source cube with the `for` filter applied, by conjunction with the
/// source query's selection when there is one.
fn acquire(ctx: &Context, source: &Cube, filter: Option<&Condition>, name: &str) -> Result<Cube> {
    match (filter, &source.query) {
        (None, _) => Ok(source.clone().renamed(name)),
        (Some(phi), Some(q)) => ctx.eval(&q.and_filter(phi), name),
        (Some(phi), None) => Ok(eval_selection(source, phi)?.renamed(name)),
    }
}

fn same_schema(a: &Cube, b: &Cube) -> bool {
    a.axes() == b.axes()
}

fn params(call: &ModelCall) -> BTreeMap<String, Param> {
    call.params.iter().cloned().collect()
}

fn provenance(i: &Intention, text: &str, plan: Value) -> Value {
    json!({
        "intention_text": text,
        "canonical": render_intention(i),
        "plan": plan,
    })
}

fn query_text(c: &Cube) -> Value {
    json!(c.query.as_ref().map(render_cube_query))
}

fn check_measures(cube: &Cube, measures: &[String]) -> Result<()> {
    for m in measures {
        cube.measure_index(m)?;
    }
    Ok(())
}

/// Runs `i` and names the resulting cube `name`.
pub fn execute(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    match &i.verb {
        Verb::Describe { .. } => exec_describe(ctx, i, text, name),
        Verb::Assess { .. } => exec_assess(ctx, i, text, name),
        Verb::Explain { .. } => exec_explain(ctx, i, text, name),
        Verb::Predict { .. } => exec_predict(ctx, i, text, name),
        Verb::Suggest { .. } => exec_suggest(ctx, i, text, name),
    }
}

pub fn exec_describe(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    let Verb::Describe { measures, filter, by } = &i.verb else {
        return Err(Error::Plan("not a describe intention".into()));
    };
    let source = ctx.cube(&i.cube)?;
    check_measures(&source, measures)?;
    let levels = match by {
        Some(By::Levels(ls)) => ls.as_slice(),
        _ => &[],
    };
    let new = if levels.is_empty() {
        acquire(ctx, &source, filter.as_ref(), name)?
    } else {
        match &source.query {
            Some(q0) => {
                let mut q = q0.clone();
                for l in levels {
                    q = if l.level == ALL_LEVEL {
                        q.without_dimension(&l.dimension)
                    } else {
                        q.with_level(&l.dimension, &l.level)
                    };
                }
                if let Some(phi) = filter {
                    q = q.and_filter(phi);
                }
                ctx.eval(&q, name)?
            }
            None => {
                let unchanged = levels.iter().all(|l| {
                    source
                        .axis_of(&l.dimension)
                        .is_some_and(|a| source.axes()[a].level_name() == l.level)
                });
                if !unchanged {
                    return Err(Error::Plan(format!(
                        "cube `{}` was not computed by a query and cannot be regrouped",
                        i.cube
                    )));
                }
                acquire(ctx, &source, filter.as_ref(), name)?
            }
        }
    };
    let mut models = Vec::new();
    let none = BTreeMap::new();
    for m in measures {
        match by {
            Some(By::Size(k)) => {
                let p: BTreeMap<String, Param> = [("k".to_string(), Param::Num(*k as f64))].into_iter().collect();
                models.push(ctx.model("kmeans", &new, m, &[], &p, None)?);
            }
            _ => {
                models.push(ctx.model("topk", &new, m, &[], &none, None)?);
                models.push(ctx.model("outliers", &new, m, &[], &none, None)?);
            }
        }
    }
    let mut plan = ScoringPlan::describe();
    // With the schema unchanged and no filter, every cell is its own proxy and
    // the surprise is the significance itself.
    if same_schema(&source, &new) && filter.is_none() {
        plan.sig_old = Significance::Const(0.0);
    }
    let prox = proxies(&source, &new)?;
    let h = highlights::select_highlight(&models, &plan, &source, &new, &prox)?;
    let prov = provenance(
        i,
        text,
        json!({"source": i.cube, "query": query_text(&new), "scoring": [plan.to_json()]}),
    );
    Ok(EnhancedCube {
        cube: new,
        models,
        highlight: Some(h),
        provenance: prov,
    })
}

/// Benchmark cube sharing `cube`'s schema, with the benchmark values under
/// the measure name.
fn benchmark_cube(cube: &Cube, measure: &str, values: &[f64], name: &str) -> Result<Cube> {
    let cells = cube
        .cells()
        .iter()
        .zip(values)
        .map(|(c, v)| Cell {
            coords: c.coords.clone(),
            values: vec![*v],
        })
        .collect();
    Cube::new(name, cube.axes().to_vec(), vec![measure.to_string()], cells)
}

pub fn exec_assess(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    let Verb::Assess {
        measures,
        filter,
        benchmarks,
    } = &i.verb
    else {
        return Err(Error::Plan("not an assess intention".into()));
    };
    let source = ctx.cube(&i.cube)?;
    let new = acquire(ctx, &source, filter.as_ref(), name)?;
    check_measures(&new, measures)?;
    let mut models = Vec::new();
    let mut scorings = Vec::new();
    // Every benchmark applies to every measure.
    for m in measures {
        for b in benchmarks {
            if let Some(rules) = ctx.catalog.kpi_rules.get(b) {
                if rules.measure.as_ref().is_some_and(|rm| rm != m) {
                    return Err(Error::Plan(format!("KPI rules {b} are written for {}", rules.measure.as_ref().unwrap())));
                }
                let model = kpi(&new, m, rules)?.bind("rules", b);
                model.validate(new.len())?;
                let plan = ScoringPlan {
                    sig_new: Significance::Measure,
                    sig_old: Significance::Mean,
                    delta: Delta::AbsDiff,
                    comp_agg: CompAgg::Mean,
                    model_agg: ModelAgg::Mean,
                };
                scorings.push(Scoring::compute(&plan, &new, &new, m, &same_coordinates(&new, &new))?);
                models.push(model);
            } else {
                let values = ctx.catalog.benchmark_for(b, &new, m)?;
                let req = ModelRequest {
                    cube: &new,
                    measure: m,
                    attributes: &[],
                    params: &BTreeMap::new(),
                    other: None,
                    benchmark: Some((b, &values)),
                    rules: None,
                    seed: ctx.seed,
                };
                let model = ctx.catalog.models.compute("benchmark", &req)?;
                let old = benchmark_cube(&new, m, &values, b)?;
                let plan = ScoringPlan {
                    sig_new: Significance::Measure,
                    sig_old: Significance::Measure,
                    delta: Delta::ReverseDifference,
                    comp_agg: CompAgg::CountComplement,
                    model_agg: ModelAgg::Mean,
                };
                scorings.push(Scoring::compute(&plan, &old, &new, m, &same_coordinates(&old, &new))?);
                models.push(model);
            }
        }
    }
    let h = highlights::select(&models, &scorings, &new)?;
    let prov = provenance(
        i,
        text,
        json!({
            "source": i.cube,
            "query": query_text(&new),
            "benchmarks": benchmarks,
            "scoring": scorings.iter().map(|s| s.plan.to_json()).collect::<Vec<_>>(),
        }),
    );
    Ok(EnhancedCube {
        cube: new,
        models,
        highlight: Some(h),
        provenance: prov,
    })
}

/// Cube the explanation models run on: the filtered source, or for a
/// variance test the source regrouped at the test's level.
fn explain_target(ctx: &Context, source: &Cube, filtered: &Cube, models: &[ModelCall], name: &str) -> Result<(Cube, Cube)> {
    let mut level: Option<&str> = None;
    for call in models.iter().filter(|c| c.name.eq_ignore_ascii_case("ftest")) {
        let arg = call
            .args
            .first()
            .ok_or_else(|| Error::model("ftest", "a level argument is required"))?;
        if level.is_some_and(|l| l != arg) {
            return Err(Error::Plan("variance tests at different levels in one intention".into()));
        }
        level = Some(arg);
    }
    let Some(level) = level else {
        return Ok((filtered.clone(), filtered.clone()));
    };
    let (d, l) = level
        .split_once('.')
        .ok_or_else(|| Error::Plan(format!("`{level}` is not a dimension.level reference")))?;
    let q = filtered
        .query
        .as_ref()
        .or(source.query.as_ref())
        .ok_or_else(|| Error::Plan("the variance test needs a cube computed by a query".into()))?;
    let target = ctx.eval(&q.with_level(d, l), name)?;
    // Already at the test level: compare with the slice one level up instead.
    let reference = match filtered.axis_of(d).map(|a| &filtered.axes()[a]) {
        Some(ax) if ax.level_name() == l => {
            let dim = &ax.dimension;
            match dim.parents(ax.level).iter().find(|&&p| p != dim.all()) {
                Some(&p) => ctx.eval(&q.with_level(d, &dim.level(p).name), name)?,
                None => filtered.clone(),
            }
        }
        _ => filtered.clone(),
    };
    Ok((target, reference))
}

/// Element-wise differences of the numeric components of two homologous
/// models, with cells matched by coordinates, and a Changed/Unchanged split of
/// the first difference at one standard deviation.
fn delta_model(target: &Model, tc: &Cube, other: &Model, oc: &Cube) -> Result<Model> {
    let mut m = Model::new(&format!("delta({})", target.model_type), tc, target.binding["measure"].as_str())
        .bind("against", &oc.name);
    let mut first: Option<Vec<f64>> = None;
    for c in &target.components {
        let (Elements::Numeric(a), Some(Elements::Numeric(b))) =
            (&c.elements, other.component(&c.name).map(|o| &o.elements))
        else {
            continue;
        };
        let mut d = Vec::with_capacity(a.len());
        for (idx, cell) in tc.cells().iter().enumerate() {
            let j = oc.find(&cell.coords).ok_or_else(|| Error::BenchmarkMismatch {
                benchmark: oc.name.clone(),
                coordinates: cell.coords.clone(),
            })?;
            d.push(a[idx] - b[j]);
        }
        if first.is_none() {
            first = Some(d.clone());
        }
        m.push(Component::numeric(&format!("delta_{}", c.name), d));
    }
    let d = first.ok_or_else(|| Error::model(&target.model_type, "no numeric component to compare"))?;
    let sd = stats::sample_sd(&d);
    let changed: Vec<bool> = d.iter().map(|x| sd > 0.0 && x.abs() > sd).collect();
    m.characterize("stdev", crate::cube::num(sd));
    crate::models::antagonists(&mut m, "change", "Changed", "Unchanged", changed);
    Ok(m)
}

pub fn exec_explain(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    let Verb::Explain {
        measure,
        filter,
        models: calls,
        against,
    } = &i.verb
    else {
        return Err(Error::Plan("not an explain intention".into()));
    };
    let source = ctx.cube(&i.cube)?;
    source.measure_index(measure)?;
    let filtered = acquire(ctx, &source, filter.as_ref(), name)?;
    let (target, reference) = explain_target(ctx, &source, &filtered, calls, name)?;
    for call in calls {
        ctx.catalog.models.get(&call.name)?;
    }

    let mut models = Vec::new();
    let mut scorings = Vec::new();
    let mut plans = Vec::new();
    match against {
        None => {
            for call in calls {
                let model = ctx.model(&call.name, &target, measure, &call.args, &params(call), Some(&reference))?;
                let is_ftest = call.name.eq_ignore_ascii_case("ftest");
                let (plan, old) = if is_ftest {
                    let plan = ScoringPlan {
                        sig_new: Significance::Measure,
                        sig_old: Significance::Mean,
                        delta: Delta::Difference,
                        comp_agg: CompAgg::CountComplement,
                        model_agg: ModelAgg::Mean,
                    };
                    (plan, &filtered)
                } else {
                    let mut plan = ScoringPlan::describe();
                    if filter.is_none() && same_schema(&source, &target) {
                        plan.sig_old = Significance::Const(0.0);
                    }
                    (plan, &source)
                };
                let prox = proxies(old, &target)?;
                scorings.push(Scoring::compute(&plan, old, &target, measure, &prox)?);
                plans.push(plan.to_json());
                models.push(model);
            }
        }
        Some(other_name) => {
            let other_src = ctx.cube(other_name)?;
            let other = acquire(ctx, &other_src, filter.as_ref(), other_name)?;
            if !same_schema(&other, &target) {
                return Err(Error::Plan(format!(
                    "comparison cube `{other_name}` does not share the schema of the explained cube"
                )));
            }
            for call in calls {
                let p = params(call);
                let mt = ctx.model(&call.name, &target, measure, &call.args, &p, Some(&filtered))?;
                let mo = ctx.model(&call.name, &other, measure, &call.args, &p, Some(&other))?;
                let dm = delta_model(&mt, &target, &mo, &other)?;
                dm.validate(target.len())?;
                let d = dm.components[0].elements.numeric().expect("numeric delta").to_vec();
                let plan = ScoringPlan {
                    sig_new: Significance::Column(dm.components[0].name.clone()),
                    sig_old: Significance::Const(0.0),
                    delta: Delta::AbsDiff,
                    comp_agg: CompAgg::Mean,
                    model_agg: ModelAgg::Mean,
                };
                plans.push(plan.to_json());
                // Only the difference models compete; the target's own model is context.
                let mut mt = mt;
                mt.families.clear();
                scorings.push(Scoring {
                    plan: plan.clone(),
                    surprises: vec![0.0; target.len()],
                });
                models.push(mt);
                scorings.push(Scoring {
                    plan,
                    surprises: d.iter().map(|x| x.abs()).collect(),
                });
                models.push(dm);
            }
        }
    }
    let h = highlights::select(&models, &scorings, &target)?;
    let prov = provenance(
        i,
        text,
        json!({
            "source": i.cube,
            "query": query_text(&target),
            "reference_query": query_text(&reference),
            "against": against,
            "scoring": plans,
        }),
    );
    Ok(EnhancedCube {
        cube: target,
        models,
        highlight: Some(h),
        provenance: prov,
    })
}

/// Re-expresses a model over `from` as a model over `to`, matching cells by
/// coordinates. Cells of `to` missing from `from` get empty elements.
fn rebind(model: Model, from: &Cube, to: &Cube) -> Model {
    let pos: Vec<Option<usize>> = to.cells().iter().map(|c| from.find(&c.coords)).collect();
    let mut m = model;
    for c in &mut m.components {
        c.elements = match &c.elements {
            Elements::Numeric(v) => Elements::Numeric(pos.iter().map(|p| p.map_or(f64::NAN, |i| v[i])).collect()),
            Elements::Bitmap(v) => Elements::Bitmap(pos.iter().map(|p| p.is_some_and(|i| v[i])).collect()),
            Elements::Label(v) => Elements::Label(pos.iter().map(|p| p.map_or(String::new(), |i| v[i].clone())).collect()),
        };
    }
    m
}

pub fn exec_predict(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    let Verb::Predict {
        k,
        measure,
        filter,
        over,
        model,
    } = &i.verb
    else {
        return Err(Error::Plan("not a predict intention".into()));
    };
    if !model.eq_ignore_ascii_case("ar") {
        return Err(Error::UnknownModel(model.clone()));
    }
    let source = ctx.cube(&i.cube)?;
    let series = acquire(ctx, &source, filter.as_ref(), name)?;
    series.measure_index(measure)?;
    let decomposition = ts_decompose(&series, measure, over, TREND_WINDOW)?;
    decomposition.validate(series.len())?;
    let (extended, forecast) = ar_predict(&series, measure, over, *k as usize, AR_ORDER, TREND_WINDOW)?;
    forecast.validate(extended.len())?;
    let models = vec![rebind(decomposition, &series, &extended), forecast];
    let predicted = models[1]
        .components
        .iter()
        .position(|c| c.name == "Predicted")
        .expect("forecast model has a Predicted component");
    let h = Highlight::fixed(&models, 1, predicted, &extended);
    let prov = provenance(
        i,
        text,
        json!({
            "source": i.cube,
            "query": query_text(&series),
            "time": over,
            "order": AR_ORDER,
            "window": TREND_WINDOW,
            "highlight": "forecast cells by definition",
        }),
    );
    Ok(EnhancedCube {
        cube: extended,
        models,
        highlight: Some(h),
        provenance: prov,
    })
}

/// One-step refinements and coarsenings of the grouping of `q`, one
/// dimension at a time, skipping degenerate dimensions.
pub fn suggest_candidates(base: &Cube, q: &CubeQuery, cap: usize) -> Vec<CubeQuery> {
    let mut out: Vec<CubeQuery> = Vec::new();
    for ax in base.axes() {
        let d = &ax.dimension;
        if d.degenerate {
            continue;
        }
        let current = match q.group.iter().find(|l| l.dimension == d.name) {
            Some(l) => match d.level_index(&l.level) {
                Ok(i) => i,
                Err(_) => continue,
            },
            None => d.all(),
        };
        let finer = d.children(current).into_iter().filter(|&c| d.precedes_eq(ax.level, c));
        let coarser = d.parents(current).iter().copied();
        for l in finer.chain(coarser) {
            let cand = if l == d.all() {
                q.without_dimension(&d.name)
            } else {
                q.with_level(&d.name, &d.level(l).name)
            };
            if !out.contains(&cand) && cand != *q {
                out.push(cand);
            }
        }
    }
    out.truncate(cap);
    out
}

/// Union of candidate cubes under a `candidate` pseudo-dimension and one
/// flat pseudo-dimension per grouped dimension.
fn union_cube(name: &str, candidates: &[(String, Cube)], measure: &str, scores: &[f64]) -> Result<Cube> {
    let mut dims: Vec<String> = Vec::new();
    let mut members: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (_, c) in candidates {
        for (a, ax) in c.axes().iter().enumerate() {
            if !dims.contains(&ax.dimension.name) {
                dims.push(ax.dimension.name.clone());
            }
            let set = members.entry(ax.dimension.name.clone()).or_default();
            for cell in c.cells() {
                set.insert(cell.coords[a].clone());
            }
        }
    }
    let flat = |dname: &str, values: Vec<String>| -> Result<Arc<Dimension>> {
        let rows: Vec<[&str; 1]> = values.iter().map(|v| [v.as_str()]).collect();
        let refs: Vec<&[&str]> = rows.iter().map(|r| &r[..]).collect();
        Ok(Arc::new(Dimension::chain(dname, &["*"], &refs)?))
    };
    let mut axes = vec![Axis::new(
        flat("candidate", candidates.iter().map(|(n, _)| n.clone()).collect())?,
        0,
    )];
    for d in &dims {
        let mut vals: Vec<String> = members[d].iter().cloned().collect();
        vals.push(ALL_MEMBER.to_string());
        vals.dedup();
        axes.push(Axis::new(flat(d, vals)?, 0));
    }
    let mut cells = Vec::new();
    for ((cname, c), score) in candidates.iter().zip(scores) {
        let k = c.measure_index(measure)?;
        for cell in c.cells() {
            let mut coords = vec![cname.clone()];
            for d in &dims {
                coords.push(match c.axis_of(d) {
                    Some(a) => cell.coords[a].clone(),
                    None => ALL_MEMBER.to_string(),
                });
            }
            cells.push(Cell {
                coords,
                values: vec![cell.values[k], *score],
            });
        }
    }
    Cube::new(name, axes, vec![measure.to_string(), "Score".to_string()], cells)
}

pub fn exec_suggest(ctx: &Context, i: &Intention, text: &str, name: &str) -> Result<EnhancedCube> {
    let Verb::Suggest { model } = &i.verb else {
        return Err(Error::Plan("not a suggest intention".into()));
    };
    if let Some(m) = model {
        if !m.eq_ignore_ascii_case("inform") {
            return Err(Error::UnknownModel(m.clone()));
        }
    }
    let source = ctx.cube(&i.cube)?;
    let q = source
        .query
        .clone()
        .ok_or_else(|| Error::Plan(format!("cube `{}` was not computed by a query", i.cube)))?;
    let measure = q
        .output_names()
        .first()
        .cloned()
        .ok_or_else(|| Error::Plan("the source query aggregates no measure".into()))?;
    let base = ctx.catalog.base(&q.base)?;
    let mut viable = Vec::new();
    let mut texts = Vec::new();
    let queries = suggest_candidates(&base, &q, SUGGEST_CANDIDATES);
    let cubes = queries
        .iter()
        .enumerate()
        .map(|(n, cq)| ctx.eval(cq, &format!("q{}", n + 1)))
        .collect::<Result<Vec<_>>>()?;
    let scores = inform_scores(&cubes, &measure)?;
    for ((cq, c), s) in queries.iter().zip(cubes).zip(&scores) {
        if let Some(s) = s {
            texts.push(json!({"candidate": c.name, "query": render_cube_query(cq), "score": s}));
            viable.push((c.name.clone(), c, *s));
        }
    }
    if viable.is_empty() {
        return Err(Error::model("inform", "no viable candidate query"));
    }
    let named: Vec<(String, Cube)> = viable.iter().map(|(n, c, _)| (n.clone(), c.clone())).collect();
    let sc: Vec<f64> = viable.iter().map(|v| v.2).collect();
    let union = union_cube(name, &named, &measure, &sc)?;
    let mut m = Model::new("inform", &union, &measure);
    m.characterize("candidates", json!(texts));
    m.push(Component::numeric("Score", union.values("Score")?));
    let mut members = Vec::new();
    for (cname, _, _) in &viable {
        let bits = union.cells().iter().map(|c| &c.coords[0] == cname).collect();
        members.push(m.push(Component::bitmap(cname, bits)));
    }
    m.family("candidates", members, true);
    m.validate(union.len())?;
    let models = vec![m];

    // Every candidate cell has the source's grand total as its proxy.
    let total_q = CubeQuery {
        group: Vec::new(),
        ..q.clone()
    };
    let total = ctx.eval(&total_q, "total")?;
    let plan = ScoringPlan {
        sig_new: Significance::Column("Score".into()),
        sig_old: Significance::Const(0.0),
        delta: Delta::Difference,
        comp_agg: CompAgg::Max,
        model_agg: ModelAgg::Mean,
    };
    let prox = proxies(&total, &union)?;
    let h = highlights::select_highlight(&models, &plan, &total, &union, &prox)?;
    let prov = provenance(
        i,
        text,
        json!({"source": i.cube, "query": render_cube_query(&q), "candidates": texts, "scoring": [plan.to_json()]}),
    );
    Ok(EnhancedCube {
        cube: union,
        models,
        highlight: Some(h),
        provenance: prov,
    })
}
