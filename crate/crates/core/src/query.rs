//! Cube queries: selection over a base cube, grouping by one level per
//! dimension and aggregation of measures.

use std::collections::HashMap;

use crate::cube::{Axis, Cell, Cube};
use crate::error::{Error, Result};
use crate::selection::{Condition, LevelRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFn {
    Sum,
    Min,
    Max,
    Count,
    Avg,
}

impl AggFn {
    pub const ALL: [AggFn; 5] = [AggFn::Sum, AggFn::Min, AggFn::Max, AggFn::Count, AggFn::Avg];

    pub fn name(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Count => "count",
            AggFn::Avg => "avg",
        }
    }

    pub fn from_name(s: &str) -> Option<AggFn> {
        AggFn::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub func: AggFn,
    pub measure: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeQuery {
    pub base: String,
    pub selection: Condition,
    pub group: Vec<LevelRef>,
    pub aggregates: Vec<Aggregate>,
}

impl CubeQuery {
    /// Same query with `dim` grouped at `level` (added when absent).
    pub fn with_level(&self, dim: &str, level: &str) -> CubeQuery {
        let mut q = self.clone();
        match q.group.iter_mut().find(|l| l.dimension == dim) {
            Some(l) => l.level = level.to_string(),
            None => q.group.push(LevelRef::new(dim, level)),
        }
        q
    }

    /// Same query without a grouping level for `dim` (rolled up to ALL).
    pub fn without_dimension(&self, dim: &str) -> CubeQuery {
        let mut q = self.clone();
        q.group.retain(|l| l.dimension != dim);
        q
    }

    pub fn and_filter(&self, phi: &Condition) -> CubeQuery {
        let mut q = self.clone();
        q.selection = Condition::and(q.selection.clone(), phi.clone());
        q
    }

    pub fn output_names(&self) -> Vec<String> {
        self.aggregates
            .iter()
            .map(|a| {
                let dup = self.aggregates.iter().filter(|b| b.measure == a.measure).count() > 1;
                if dup {
                    format!("{}({})", a.func.name(), a.measure)
                } else {
                    a.measure.clone()
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
struct Acc {
    sum: f64,
    min: f64,
    max: f64,
    count: usize,
}

impl Acc {
    fn new() -> Self {
        Acc {
            sum: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
        }
    }

    fn push(&mut self, v: f64) {
        self.sum += v;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.count += 1;
    }

    fn finish(&self, f: AggFn) -> f64 {
        match f {
            AggFn::Sum => self.sum,
            AggFn::Min => self.min,
            AggFn::Max => self.max,
            AggFn::Count => self.count as f64,
            AggFn::Avg => self.sum / self.count as f64,
        }
    }
}

/// Evaluates `q` over `base`. One output cell per nonempty group; the group
/// key is the ancestor of each coordinate at the grouping level.
pub fn eval_cube_query(base: &Cube, q: &CubeQuery, name: &str) -> Result<Cube> {
    let mut axes = Vec::new();
    let mut group_axes = Vec::new();
    for (i, l) in q.group.iter().enumerate() {
        if q.group[..i].iter().any(|o| o.dimension == l.dimension) {
            return Err(Error::Plan(format!("dimension {} grouped twice", l.dimension)));
        }
        let ai = base.axis_of(&l.dimension).ok_or_else(|| Error::UnknownDimension(l.dimension.clone()))?;
        let ax = &base.axes()[ai];
        let target = ax.dimension.level_index(&l.level)?;
        if !ax.dimension.precedes_eq(ax.level, target) {
            return Err(Error::Plan(format!(
                "grouping level {l} is finer than the base level {}.{}",
                l.dimension,
                ax.level_name()
            )));
        }
        if target == ax.dimension.all() {
            continue;
        }
        group_axes.push((ai, target));
        axes.push(Axis::new(ax.dimension.clone(), target));
    }
    let mcols = q
        .aggregates
        .iter()
        .map(|a| base.measure_index(&a.measure))
        .collect::<Result<Vec<_>>>()?;
    let phi = q.selection.compile(base)?;

    let mut groups: HashMap<Vec<usize>, Vec<Acc>> = HashMap::new();
    for i in 0..base.len() {
        if !phi.eval(base, i)? {
            continue;
        }
        let cell = &base.cells()[i];
        let key: Vec<usize> = group_axes
            .iter()
            .map(|&(ai, target)| {
                let ax = &base.axes()[ai];
                let m = ax.dimension.level(ax.level).position(&cell.coords[ai]).expect("member");
                ax.dimension.anc_idx(ax.level, target, m).expect("comparable")
            })
            .collect();
        let accs = groups.entry(key).or_insert_with(|| vec![Acc::new(); mcols.len()]);
        for (acc, &k) in accs.iter_mut().zip(&mcols) {
            acc.push(cell.values[k]);
        }
    }
    let cells = groups
        .into_iter()
        .map(|(key, accs)| Cell {
            coords: key
                .iter()
                .zip(&axes)
                .map(|(&m, ax)| ax.dimension.level(ax.level).members()[m].clone())
                .collect(),
            values: accs.iter().zip(&q.aggregates).map(|(a, g)| a.finish(g.func)).collect(),
        })
        .collect();
    Ok(Cube::new(name, axes, q.output_names(), cells)?.with_query(q.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::Dimension;
    use crate::selection::CmpOp;
    use std::sync::Arc;

    fn base() -> Cube {
        let wc = Arc::new(
            Dimension::chain(
                "wc",
                &["L0", "L1"],
                &[&["Federal-gov", "Gov"], &["State-gov", "Gov"], &["Private", "Private"]],
            )
            .unwrap(),
        );
        let cells = vec![
            Cell { coords: vec!["Federal-gov".into()], values: vec![40.0] },
            Cell { coords: vec!["State-gov".into()], values: vec![44.0] },
            Cell { coords: vec!["Private".into()], values: vec![50.0] },
        ];
        Cube::new("b", vec![Axis::new(wc, 0)], vec!["h".into()], cells).unwrap()
    }

    fn q(group: &[(&str, &str)], f: AggFn) -> CubeQuery {
        CubeQuery {
            base: "b".into(),
            selection: Condition::True,
            group: group.iter().map(|(d, l)| LevelRef::new(d, l)).collect(),
            aggregates: vec![Aggregate { func: f, measure: "h".into() }],
        }
    }

    #[test]
    fn rollup_avg() {
        let out = eval_cube_query(&base(), &q(&[("wc", "L1")], AggFn::Avg), "o").unwrap();
        assert_eq!(out.values("h").unwrap(), vec![42.0, 50.0]);
        assert_eq!(out.cells()[0].coords, vec!["Gov"]);
        assert!(out.query.is_some());
    }

    #[test]
    fn identity_grouping() {
        let b = base();
        let out = eval_cube_query(&b, &q(&[("wc", "L0")], AggFn::Sum), "o").unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn grand_total_and_selection() {
        let b = base();
        let total = eval_cube_query(&b, &q(&[], AggFn::Count), "o").unwrap();
        assert_eq!(total.axes().len(), 0);
        assert_eq!(total.values("h").unwrap(), vec![3.0]);
        let mut gov = q(&[("wc", "ALL")], AggFn::Max);
        gov.selection = Condition::atom("wc", "L1", CmpOp::Eq, "Gov");
        assert_eq!(eval_cube_query(&b, &gov, "o").unwrap().values("h").unwrap(), vec![44.0]);
        let mut none = q(&[("wc", "L1")], AggFn::Sum);
        none.selection = Condition::False;
        assert!(eval_cube_query(&b, &none, "o").unwrap().is_empty());
    }

    #[test]
    fn invalid_queries() {
        let b = base();
        assert!(eval_cube_query(&b, &q(&[("edu", "L0")], AggFn::Sum), "o").is_err());
        let mut bad = q(&[("wc", "L1")], AggFn::Sum);
        bad.aggregates[0].measure = "nope".into();
        assert!(matches!(eval_cube_query(&b, &bad, "o"), Err(Error::UnknownMeasure(_))));
    }
}
