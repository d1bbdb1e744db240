//! Cubes: a schema of one level per dimension plus measures, and a set of cells.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::dimension::{Dimension, ALL_MEMBER};
use crate::error::{Error, Result};
use crate::query::CubeQuery;

#[derive(Debug, Clone)]
pub struct Axis {
    pub dimension: Arc<Dimension>,
    pub level: usize,
}

impl Axis {
    pub fn new(dimension: Arc<Dimension>, level: usize) -> Self {
        Axis { dimension, level }
    }

    pub fn dim_name(&self) -> &str {
        &self.dimension.name
    }

    pub fn level_name(&self) -> &str {
        &self.dimension.level(self.level).name
    }
}

impl PartialEq for Axis {
    fn eq(&self, other: &Self) -> bool {
        self.dimension.name == other.dimension.name && self.level_name() == other.level_name()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub coords: Vec<String>,
    pub values: Vec<f64>,
}

/// A finite set of cells under a schema. Cells are kept in canonical order
/// (lexicographic by coordinates). A dimension absent from the schema is
/// implicitly at its `ALL` level.
#[derive(Debug, Clone)]
pub struct Cube {
    pub name: String,
    axes: Vec<Axis>,
    measures: Vec<String>,
    cells: Vec<Cell>,
    index: HashMap<Vec<String>, usize>,
    /// The query that produced this cube, when it was computed by one.
    pub query: Option<CubeQuery>,
}

impl PartialEq for Cube {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes && self.measures == other.measures && self.cells == other.cells
    }
}

impl Cube {
    pub fn new(name: &str, axes: Vec<Axis>, measures: Vec<String>, mut cells: Vec<Cell>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.dim_name() == a.dim_name()) {
                return Err(Error::Schema(format!("dimension {} appears twice", a.dim_name())));
            }
        }
        for (i, m) in measures.iter().enumerate() {
            if measures[..i].contains(m) {
                return Err(Error::Schema(format!("measure {m} appears twice")));
            }
        }
        for c in &cells {
            if c.coords.len() != axes.len() || c.values.len() != measures.len() {
                return Err(Error::Arity(format!(
                    "cell {:?} has {} coordinates and {} measures, schema has {} and {}",
                    c.coords,
                    c.coords.len(),
                    c.values.len(),
                    axes.len(),
                    measures.len()
                )));
            }
            for (a, m) in axes.iter().zip(&c.coords) {
                if !a.dimension.level(a.level).contains(m) {
                    return Err(Error::UnknownMember {
                        dimension: a.dim_name().to_string(),
                        level: a.level_name().to_string(),
                        member: m.clone(),
                    });
                }
            }
        }
        cells.sort_by(|a, b| a.coords.cmp(&b.coords));
        let mut index = HashMap::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            if index.insert(c.coords.clone(), i).is_some() {
                return Err(Error::DuplicateCoordinates(c.coords.clone()));
            }
        }
        Ok(Cube {
            name: name.to_string(),
            axes,
            measures,
            cells,
            index,
            query: None,
        })
    }

    pub fn with_query(mut self, q: CubeQuery) -> Self {
        self.query = Some(q);
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn measures(&self) -> &[String] {
        &self.measures
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True when every schema level is its dimension's bottom level.
    pub fn is_detailed(&self) -> bool {
        self.axes.iter().all(|a| a.level == a.dimension.bottom())
    }

    pub fn axis_of(&self, dim: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.dim_name() == dim)
    }

    pub fn measure_index(&self, m: &str) -> Result<usize> {
        self.measures.iter().position(|x| x == m).ok_or_else(|| Error::UnknownMeasure(m.into()))
    }

    pub fn values(&self, m: &str) -> Result<Vec<f64>> {
        let k = self.measure_index(m)?;
        Ok(self.cells.iter().map(|c| c.values[k]).collect())
    }

    pub fn find(&self, coords: &[String]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    /// Level index and member of `cell` on dimension `dim`; `ALL` when the
    /// dimension is not in the schema.
    pub fn coordinate<'a>(&'a self, cell: usize, dim: &Dimension) -> (usize, &'a str) {
        match self.axis_of(&dim.name) {
            Some(a) => (self.axes[a].level, &self.cells[cell].coords[a]),
            None => (dim.all(), ALL_MEMBER),
        }
    }

    /// Subcube keeping the given cell positions; schema unchanged.
    pub fn subset(&self, keep: &[usize]) -> Cube {
        let cells: Vec<Cell> = keep.iter().map(|&i| self.cells[i].clone()).collect();
        let index = cells.iter().enumerate().map(|(i, c)| (c.coords.clone(), i)).collect();
        Cube {
            name: self.name.clone(),
            axes: self.axes.clone(),
            measures: self.measures.clone(),
            cells,
            index,
            query: self.query.clone(),
        }
    }

    /// Copy with one more measure column.
    pub fn with_measure(&self, name: &str, values: &[f64]) -> Result<Cube> {
        if values.len() != self.cells.len() {
            return Err(Error::Arity(format!("column {name} has {} values for {} cells", values.len(), self.len())));
        }
        let mut measures = self.measures.clone();
        measures.push(name.to_string());
        let cells = self
            .cells
            .iter()
            .zip(values)
            .map(|(c, v)| {
                let mut values = c.values.clone();
                values.push(*v);
                Cell {
                    coords: c.coords.clone(),
                    values,
                }
            })
            .collect();
        let mut out = Cube::new(&self.name, self.axes.clone(), measures, cells)?;
        out.query = self.query.clone();
        Ok(out)
    }

    pub fn schema_json(&self) -> Value {
        json!({
            "dimensions": self.axes.iter().map(|a| json!({"dimension": a.dim_name(), "level": a.level_name()})).collect::<Vec<_>>(),
            "measures": self.measures,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "schema": self.schema_json(),
            "cells": self.cells.iter().map(|c| json!({
                "coordinates": c.coords,
                "measures": c.values.iter().map(|v| num(*v)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// CSV export: one coordinate column per dimension, then measures, then
    /// any extra named columns (model components).
    pub fn to_csv(&self, extra: &[(String, Vec<String>)]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self
            .axes
            .iter()
            .map(|a| format!("{}.{}", a.dim_name(), a.level_name()))
            .chain(self.measures.iter().cloned())
            .chain(extra.iter().map(|(n, _)| n.clone()))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (i, c) in self.cells.iter().enumerate() {
            let mut row = c.coords.clone();
            row.extend(c.values.iter().map(|v| fmt_num(*v)));
            row.extend(extra.iter().map(|(_, col)| col[i].clone()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }

    /// Builds a cube from a CSV table whose coordinate columns are named after
    /// dimensions and whose remaining columns are numeric measures.
    pub fn from_csv<R: std::io::Read>(
        name: &str,
        reader: R,
        axes: Vec<Axis>,
        measures: &[String],
    ) -> Result<Cube> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() != axes.len() + measures.len() {
            return Err(Error::Arity(format!(
                "fact table has {} columns, schema expects {}",
                header.len(),
                axes.len() + measures.len()
            )));
        }
        let col = |h: &str| {
            header
                .iter()
                .position(|x| x == h)
                .ok_or_else(|| Error::Schema(format!("fact table has no column `{h}`")))
        };
        let dim_cols = axes.iter().map(|a| col(a.dim_name())).collect::<Result<Vec<_>>>()?;
        let m_cols = measures.iter().map(|m| col(m)).collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        let mut seen = HashMap::new();
        for (r, rec) in rdr.records().enumerate() {
            let row = r + 1;
            let rec = rec.map_err(|e| Error::FactRow {
                row,
                message: e.to_string(),
            })?;
            if rec.len() != header.len() {
                return Err(Error::FactRow {
                    row,
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            let mut coords = Vec::with_capacity(axes.len());
            for (a, &c) in axes.iter().zip(&dim_cols) {
                let m = &rec[c];
                if !a.dimension.level(a.level).contains(m) {
                    return Err(Error::FactRow {
                        row,
                        message: format!("`{m}` is not a member of {}.{}", a.dim_name(), a.level_name()),
                    });
                }
                coords.push(m.to_string());
            }
            let mut values = Vec::with_capacity(measures.len());
            for (m, &c) in measures.iter().zip(&m_cols) {
                let raw = &rec[c];
                let v: f64 = raw.parse().map_err(|_| Error::FactRow {
                    row,
                    message: format!("measure {m}: `{raw}` is not a number"),
                })?;
                values.push(v);
            }
            if let Some(prev) = seen.insert(coords.clone(), row) {
                return Err(Error::FactRow {
                    row,
                    message: format!("coordinates {coords:?} repeat row {prev}"),
                });
            }
            cells.push(Cell { coords, values });
        }
        if cells.is_empty() {
            log::warn!("cube {name}: fact table is empty");
        }
        Cube::new(name, axes, measures.to_vec(), cells)
    }
}

/// JSON number, with non-finite values as null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn fmt_num(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim() -> Arc<Dimension> {
        Arc::new(Dimension::chain("g", &["L0"], &[&["a"], &["b"], &["c"]]).unwrap())
    }

    #[test]
    fn canonical_order_and_lookup() {
        let d = dim();
        let cube = Cube::new(
            "t",
            vec![Axis::new(d, 0)],
            vec!["m".into()],
            vec![
                Cell { coords: vec!["c".into()], values: vec![3.0] },
                Cell { coords: vec!["a".into()], values: vec![1.0] },
            ],
        )
        .unwrap();
        assert_eq!(cube.cells()[0].coords, vec!["a"]);
        assert_eq!(cube.find(&["c".to_string()]), Some(1));
        assert!(cube.is_detailed());
        assert_eq!(cube.values("m").unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        let err = Cube::new(
            "t",
            vec![Axis::new(dim(), 0)],
            vec!["m".into()],
            vec![
                Cell { coords: vec!["a".into()], values: vec![1.0] },
                Cell { coords: vec!["a".into()], values: vec![2.0] },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateCoordinates(_)));
    }

    #[test]
    fn csv_ingest_errors_name_the_row() {
        let axes = vec![Axis::new(dim(), 0)];
        let err = Cube::from_csv("t", "g,m\na,1\nz,2\n".as_bytes(), axes.clone(), &["m".into()]).unwrap_err();
        assert!(matches!(err, Error::FactRow { row: 2, ref message } if message.contains("`z`")), "{err}");
        let empty = Cube::from_csv("t", "g,m\n".as_bytes(), axes.clone(), &["m".into()]).unwrap();
        assert!(empty.is_empty());
        let arity = Cube::from_csv("t", "g\na\n".as_bytes(), axes, &["m".into()]).unwrap_err();
        assert!(matches!(arity, Error::Arity(_)));
    }

    #[test]
    fn csv_export_has_extra_columns() {
        let cube = Cube::new(
            "t",
            vec![Axis::new(dim(), 0)],
            vec!["m".into()],
            vec![Cell { coords: vec!["a".into()], values: vec![1.5] }],
        )
        .unwrap();
        let text = cube.to_csv(&[("Rank".into(), vec!["1".into()])]);
        assert_eq!(text, "g.L0,m,Rank\na,1.5,1\n");
    }
}
