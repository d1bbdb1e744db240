//! Selection conditions: boolean formulas over `level op 'member'` atoms.

use std::cmp::Ordering;

use crate::cube::Cube;
use crate::dimension::{ALL_LEVEL, ALL_MEMBER};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelRef {
    pub dimension: String,
    pub level: String,
}

impl LevelRef {
    pub fn new(dimension: &str, level: &str) -> Self {
        LevelRef {
            dimension: dimension.to_string(),
            level: level.to_string(),
        }
    }
}

impl std::fmt::Display for LevelRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.dimension, self.level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
    Le,
    Ge,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
            CmpOp::Ne => o != Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub level: LevelRef,
    pub op: CmpOp,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    True,
    False,
    Atom(Atom),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn atom(dim: &str, level: &str, op: CmpOp, value: &str) -> Self {
        Condition::Atom(Atom {
            level: LevelRef::new(dim, level),
            op,
            value: value.to_string(),
        })
    }

    /// Conjunction that folds away `true` operands.
    pub fn and(a: Condition, b: Condition) -> Condition {
        match (a, b) {
            (Condition::True, x) | (x, Condition::True) => x,
            (a, b) => Condition::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Condition::Atom(a) => out.push(a),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Condition::Not(a) => a.collect_atoms(out),
            Condition::True | Condition::False => {}
        }
    }

    /// Compiles the condition against a cube's schema. Atoms on levels at or
    /// above the cube's level are evaluated through the ancestor map.
    pub fn compile(&self, cube: &Cube) -> Result<Compiled> {
        Ok(Compiled(self.compile_node(cube)?))
    }

    fn compile_node(&self, cube: &Cube) -> Result<Node> {
        Ok(match self {
            Condition::True => Node::Const(true),
            Condition::False => Node::Const(false),
            Condition::And(a, b) => Node::And(Box::new(a.compile_node(cube)?), Box::new(b.compile_node(cube)?)),
            Condition::Or(a, b) => Node::Or(Box::new(a.compile_node(cube)?), Box::new(b.compile_node(cube)?)),
            Condition::Not(a) => Node::Not(Box::new(a.compile_node(cube)?)),
            Condition::Atom(a) => compile_atom(a, cube)?,
        })
    }

    /// True when every atom can be evaluated on `cube`.
    pub fn applicable(&self, cube: &Cube) -> bool {
        self.compile(cube).is_ok()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Not(Box<Node>),
    /// A cube without the atom's dimension sits at `ALL`.
    AllAtom { op: CmpOp, value: String },
    Atom(CompiledAtom),
}

#[derive(Debug, Clone)]
struct CompiledAtom {
    axis: usize,
    /// Per member of the cube's level, the ancestor's position at the atom level.
    anc: Vec<usize>,
    level_members: Vec<String>,
    op: CmpOp,
    value: String,
    value_pos: Option<usize>,
    value_num: Option<f64>,
}

fn compile_atom(a: &Atom, cube: &Cube) -> Result<Node> {
    let Some(axis) = cube.axis_of(&a.level.dimension) else {
        if a.level.level == ALL_LEVEL {
            return Ok(Node::AllAtom {
                op: a.op,
                value: a.value.clone(),
            });
        }
        return Err(Error::Plan(format!(
            "cube `{}` has no dimension `{}` for condition on {}",
            cube.name, a.level.dimension, a.level
        )));
    };
    let ax = &cube.axes()[axis];
    let dim = &ax.dimension;
    let target = dim.level_index(&a.level.level)?;
    if !dim.precedes_eq(ax.level, target) {
        return Err(Error::Plan(format!(
            "condition on {} cannot be evaluated on cube `{}` at level {}.{}",
            a.level,
            cube.name,
            dim.name,
            ax.level_name()
        )));
    }
    let n = dim.level(ax.level).members().len();
    let anc = (0..n).map(|m| dim.anc_idx(ax.level, target, m).expect("comparable levels")).collect();
    let level = dim.level(target);
    let value_pos = level.position(&a.value);
    let value_num = a.value.parse::<f64>().ok();
    if !matches!(a.op, CmpOp::Eq | CmpOp::Ne) && value_pos.is_none() && value_num.is_none() {
        return Err(Error::TypeMismatch(format!(
            "`{}` is neither a member of {} nor a number",
            a.value, a.level
        )));
    }
    Ok(Node::Atom(CompiledAtom {
        axis,
        anc,
        level_members: level.members().to_vec(),
        op: a.op,
        value: a.value.clone(),
        value_pos,
        value_num,
    }))
}

fn compare_members(op: CmpOp, member: &str, value: &str) -> Result<bool> {
    match op {
        CmpOp::Eq => Ok(member == value),
        CmpOp::Ne => Ok(member != value),
        _ => match (member.parse::<f64>(), value.parse::<f64>()) {
            (Ok(x), Ok(y)) => Ok(op.holds(x.partial_cmp(&y).unwrap_or(Ordering::Equal))),
            _ => Err(Error::TypeMismatch(format!("cannot order `{member}` against `{value}`"))),
        },
    }
}

/// A condition bound to one cube schema.
#[derive(Debug, Clone)]
pub struct Compiled(Node);

impl Compiled {
    pub fn eval(&self, cube: &Cube, cell: usize) -> Result<bool> {
        eval_node(&self.0, cube, cell)
    }
}

fn eval_node(n: &Node, cube: &Cube, cell: usize) -> Result<bool> {
    Ok(match n {
        Node::Const(b) => *b,
        Node::And(a, b) => eval_node(a, cube, cell)? && eval_node(b, cube, cell)?,
        Node::Or(a, b) => eval_node(a, cube, cell)? || eval_node(b, cube, cell)?,
        Node::Not(a) => !eval_node(a, cube, cell)?,
        Node::AllAtom { op, value } => compare_members(*op, ALL_MEMBER, value)?,
        Node::Atom(at) => {
            let coord = &cube.cells()[cell].coords[at.axis];
            let ax = &cube.axes()[at.axis];
            let m = ax.dimension.level(ax.level).position(coord).expect("cube coordinates are members");
            let pos = at.anc[m];
            match (at.op, at.value_pos) {
                (CmpOp::Eq, _) => at.value_pos == Some(pos),
                (CmpOp::Ne, _) => at.value_pos != Some(pos),
                (op, Some(vp)) => op.holds(pos.cmp(&vp)),
                (op, None) => {
                    let member = &at.level_members[pos];
                    match (member.parse::<f64>(), at.value_num) {
                        (Ok(x), Some(y)) => op.holds(x.partial_cmp(&y).unwrap_or(Ordering::Equal)),
                        _ => {
                            return Err(Error::TypeMismatch(format!(
                                "cannot order `{member}` against `{}`",
                                at.value
                            )))
                        }
                    }
                }
            }
        }
    })
}

/// Subcube of the cells satisfying `phi`; the schema is unchanged.
pub fn eval_selection(cube: &Cube, phi: &Condition) -> Result<Cube> {
    let c = phi.compile(cube)?;
    let mut keep = Vec::new();
    for i in 0..cube.len() {
        if c.eval(cube, i)? {
            keep.push(i);
        }
    }
    Ok(cube.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Axis, Cell};
    use crate::dimension::Dimension;
    use std::sync::Arc;

    fn cube() -> Cube {
        let wc = Arc::new(
            Dimension::chain(
                "wc",
                &["L0", "L1"],
                &[&["Federal-gov", "Gov"], &["State-gov", "Gov"], &["Private", "Private"]],
            )
            .unwrap(),
        );
        let year = Arc::new(Dimension::chain("year", &["L0"], &[&["2000"], &["2001"]]).unwrap());
        let mut cells = Vec::new();
        for w in ["Federal-gov", "State-gov", "Private"] {
            for y in ["2000", "2001"] {
                cells.push(Cell {
                    coords: vec![w.into(), y.into()],
                    values: vec![1.0],
                });
            }
        }
        Cube::new("c", vec![Axis::new(wc, 0), Axis::new(year, 0)], vec!["m".into()], cells).unwrap()
    }

    #[test]
    fn coarse_atoms_are_rewritten_through_anc() {
        let c = cube();
        let gov = eval_selection(&c, &Condition::atom("wc", "L1", CmpOp::Eq, "Gov")).unwrap();
        assert_eq!(gov.len(), 4);
        assert_eq!(eval_selection(&c, &Condition::True).unwrap(), c);
    }

    #[test]
    fn contradiction_is_empty() {
        let c = cube();
        let a = Condition::atom("wc", "L0", CmpOp::Eq, "Private");
        let b = Condition::atom("wc", "L0", CmpOp::Ne, "Private");
        assert!(eval_selection(&c, &Condition::And(Box::new(a), Box::new(b))).unwrap().is_empty());
    }

    #[test]
    fn order_comparisons() {
        let c = cube();
        let later = eval_selection(&c, &Condition::atom("year", "L0", CmpOp::Ge, "2001")).unwrap();
        assert_eq!(later.len(), 3);
        let numeric = eval_selection(&c, &Condition::atom("year", "L0", CmpOp::Lt, "2000.5")).unwrap();
        assert_eq!(numeric.len(), 3);
        let bad = eval_selection(&c, &Condition::atom("wc", "L0", CmpOp::Lt, "zzz"));
        assert!(matches!(bad, Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn unresolved_levels() {
        let c = cube();
        assert!(eval_selection(&c, &Condition::atom("wc", "L9", CmpOp::Eq, "x")).is_err());
        assert!(eval_selection(&c, &Condition::atom("edu", "L0", CmpOp::Eq, "x")).is_err());
        let all = eval_selection(&c, &Condition::atom("edu", "ALL", CmpOp::Eq, "all")).unwrap();
        assert_eq!(all.len(), c.len());
    }
}
