//! Derived measures: functions bound to cube attributes and applied per
//! equivalence class of cells (cell, subcube or whole cube).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::models::stats;

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Measure(String),
    /// Numeric reading of the cell's coordinate on a dimension.
    Level(String),
    Property {
        dimension: String,
        level: String,
        property: String,
    },
    Const(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scope {
    Cell,
    /// Cells sharing coordinates on these dimensions form one class.
    Subcube(Vec<String>),
    Cube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionBinding {
    pub function: String,
    pub inputs: BTreeMap<String, Input>,
    pub scope: Scope,
    /// Output column names; defaults to the function's own output names.
    pub outputs: Vec<String>,
}

pub trait DerivedFunction: Send + Sync {
    fn name(&self) -> &str;
    fn params(&self) -> &[&'static str];
    fn outputs(&self) -> Vec<String>;
    /// `args[p][i]` is parameter `p` for the `i`-th cell of the class; returns
    /// `out[o][i]`.
    fn apply(&self, args: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, String>;
}

struct Simple {
    name: &'static str,
    params: &'static [&'static str],
    f: fn(&[Vec<f64>]) -> std::result::Result<Vec<f64>, String>,
}

impl DerivedFunction for Simple {
    fn name(&self) -> &str {
        self.name
    }
    fn params(&self) -> &[&'static str] {
        self.params
    }
    fn outputs(&self) -> Vec<String> {
        vec![self.name.to_string()]
    }
    fn apply(&self, args: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, String> {
        (self.f)(args).map(|v| vec![v])
    }
}

#[derive(Clone)]
pub struct FunctionRegistry {
    map: BTreeMap<String, Arc<dyn DerivedFunction>>,
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        let mut r = FunctionRegistry { map: BTreeMap::new() };
        let builtins: [Simple; 5] = [
            Simple {
                name: "difference",
                params: &["a", "b"],
                f: |a| Ok(a[0].iter().zip(&a[1]).map(|(x, y)| x - y).collect()),
            },
            Simple {
                name: "const",
                params: &["value"],
                f: |a| Ok(a[0].clone()),
            },
            Simple {
                name: "rank",
                params: &["x"],
                f: |a| Ok(stats::descending_rank(&a[0]).into_iter().map(|r| r as f64).collect()),
            },
            Simple {
                name: "mean",
                params: &["x"],
                f: |a| {
                    let m = stats::mean(&a[0]);
                    Ok(vec![m; a[0].len()])
                },
            },
            Simple {
                name: "zscore",
                params: &["x"],
                f: |a| {
                    if a[0].len() < 2 {
                        return Err("needs at least two cells".into());
                    }
                    Ok(stats::abs_zscores(&a[0]))
                },
            },
        ];
        for f in builtins {
            r.register(Arc::new(f)).expect("distinct builtins");
        }
        r
    }
}

impl FunctionRegistry {
    pub fn register(&mut self, f: Arc<dyn DerivedFunction>) -> Result<()> {
        if self.map.contains_key(f.name()) {
            return Err(Error::Duplicate(f.name().to_string()));
        }
        self.map.insert(f.name().to_string(), f);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn DerivedFunction>> {
        self.map.get(name)
    }
}

fn input_column(cube: &Cube, fname: &str, input: &Input) -> Result<Vec<f64>> {
    let bad = |message: String| Error::Binding {
        function: fname.to_string(),
        message,
    };
    match input {
        Input::Measure(m) => cube.values(m).map_err(|_| bad(format!("unknown measure {m}"))),
        Input::Const(v) => Ok(vec![*v; cube.len()]),
        Input::Level(d) => {
            let a = cube.axis_of(d).ok_or_else(|| bad(format!("unknown dimension {d}")))?;
            cube.cells()
                .iter()
                .map(|c| {
                    c.coords[a]
                        .parse::<f64>()
                        .map_err(|_| bad(format!("member `{}` of {d} is not numeric", c.coords[a])))
                })
                .collect()
        }
        Input::Property {
            dimension,
            level,
            property,
        } => {
            let a = cube.axis_of(dimension).ok_or_else(|| bad(format!("unknown dimension {dimension}")))?;
            let ax = &cube.axes()[a];
            let target = ax.dimension.level_index(level)?;
            cube.cells()
                .iter()
                .map(|c| {
                    let m = ax.dimension.anc(ax.level, target, &c.coords[a])?;
                    let raw = ax
                        .dimension
                        .level(target)
                        .property(property, m)
                        .ok_or_else(|| bad(format!("level {dimension}.{level} has no property {property}")))?;
                    raw.parse::<f64>()
                        .map_err(|_| bad(format!("property {property} of `{m}` is not numeric")))
                })
                .collect()
        }
    }
}

/// Equivalence classes of cell positions under `scope`, each with its key.
pub fn classes(cube: &Cube, scope: &Scope) -> Result<Vec<(Vec<String>, Vec<usize>)>> {
    Ok(match scope {
        Scope::Cell => cube.cells().iter().enumerate().map(|(i, c)| (c.coords.clone(), vec![i])).collect(),
        Scope::Cube => vec![(Vec::new(), (0..cube.len()).collect())],
        Scope::Subcube(dims) => {
            let axes = dims
                .iter()
                .map(|d| cube.axis_of(d).ok_or_else(|| Error::UnknownDimension(d.clone())))
                .collect::<Result<Vec<_>>>()?;
            let mut map: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
            for (i, c) in cube.cells().iter().enumerate() {
                map.entry(axes.iter().map(|&a| c.coords[a].clone()).collect()).or_default().push(i);
            }
            map.into_iter().collect()
        }
    })
}

/// Extends `cube` with the outputs of `binding`. Cell count and existing
/// measure values are unchanged.
pub fn extend_cube(cube: &Cube, binding: &FunctionBinding, registry: &FunctionRegistry) -> Result<Cube> {
    let f = registry.get(&binding.function).ok_or_else(|| Error::Binding {
        function: binding.function.clone(),
        message: "unknown function".into(),
    })?;
    for p in f.params() {
        if !binding.inputs.contains_key(*p) {
            return Err(Error::Binding {
                function: binding.function.clone(),
                message: format!("parameter {p} is unbound"),
            });
        }
    }
    if let Some(extra) = binding.inputs.keys().find(|k| !f.params().contains(&k.as_str())) {
        return Err(Error::Binding {
            function: binding.function.clone(),
            message: format!("no parameter named {extra}"),
        });
    }
    let names = if binding.outputs.is_empty() { f.outputs() } else { binding.outputs.clone() };
    if names.len() != f.outputs().len() {
        return Err(Error::Binding {
            function: binding.function.clone(),
            message: format!("expected {} output names", f.outputs().len()),
        });
    }
    let cols = f
        .params()
        .iter()
        .map(|p| input_column(cube, &binding.function, &binding.inputs[*p]))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![vec![f64::NAN; cube.len()]; names.len()];
    for (key, members) in classes(cube, &binding.scope)? {
        let args: Vec<Vec<f64>> = cols.iter().map(|c| members.iter().map(|&i| c[i]).collect()).collect();
        let res = f.apply(&args).map_err(|message| Error::Function {
            function: binding.function.clone(),
            class: key.clone(),
            message,
        })?;
        for (o, col) in res.iter().enumerate() {
            for (&i, v) in members.iter().zip(col) {
                out[o][i] = *v;
            }
        }
    }
    let mut result = cube.clone();
    for (name, col) in names.iter().zip(&out) {
        result = result.with_measure(name, col)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Axis, Cell};
    use crate::dimension::Dimension;

    fn cube() -> Cube {
        let p = Arc::new(Dimension::chain("p", &["L0", "L1"], &[&["a", "X"], &["b", "X"], &["c", "Y"]]).unwrap());
        let cells = vec![
            Cell { coords: vec!["a".into()], values: vec![10.0, 4.0] },
            Cell { coords: vec!["b".into()], values: vec![7.0, 5.0] },
            Cell { coords: vec!["c".into()], values: vec![9.0, 1.0] },
        ];
        Cube::new("sales", vec![Axis::new(p, 0)], vec!["price".into(), "cost".into()], cells).unwrap()
    }

    fn bind(f: &str, inputs: &[(&str, Input)], scope: Scope, outputs: &[&str]) -> FunctionBinding {
        FunctionBinding {
            function: f.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            scope,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn profit_per_cell() {
        let b = bind(
            "difference",
            &[("a", Input::Measure("price".into())), ("b", Input::Measure("cost".into()))],
            Scope::Cell,
            &["profit"],
        );
        let out = extend_cube(&cube(), &b, &FunctionRegistry::default()).unwrap();
        assert_eq!(out.values("profit").unwrap(), vec![6.0, 2.0, 8.0]);
        assert_eq!(out.values("price").unwrap(), cube().values("price").unwrap());
    }

    #[test]
    fn subcube_scope_is_class_constant() {
        let b = bind("mean", &[("x", Input::Measure("price".into()))], Scope::Subcube(vec!["p".into()]), &[]);
        let out = extend_cube(&cube(), &b, &FunctionRegistry::default()).unwrap();
        assert_eq!(out.values("mean").unwrap(), vec![10.0, 7.0, 9.0]);
        let b = bind("mean", &[("x", Input::Measure("price".into()))], Scope::Cube, &[]);
        let out = extend_cube(&cube(), &b, &FunctionRegistry::default()).unwrap();
        assert!(out.values("mean").unwrap().iter().all(|&v| (v - 26.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn binding_errors() {
        let reg = FunctionRegistry::default();
        let missing = bind("difference", &[("a", Input::Const(1.0))], Scope::Cell, &[]);
        assert!(matches!(extend_cube(&cube(), &missing, &reg), Err(Error::Binding { .. })));
        let failing = bind("zscore", &[("x", Input::Measure("price".into()))], Scope::Cell, &[]);
        let err = extend_cube(&cube(), &failing, &reg).unwrap_err();
        assert!(matches!(err, Error::Function { ref class, .. } if class == &vec!["a".to_string()]));
    }
}
