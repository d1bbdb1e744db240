//! Random schemas, brute-force oracles and AST generators shared by the
//! property suites and the acceptance target.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use iolap::iql::{By, Intention, ModelCall, Statement, Verb};
use iolap::models::{self, KpiRule, KpiRules, Model, Param};
use iolap::{
    eval_cube_query, AggFn, Aggregate, Axis, Cell, CmpOp, Condition, Cube, CubeQuery, Dimension, LevelRef, ALL_LEVEL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random chain dimension with its parent maps kept aside for the oracle.
pub struct Chain {
    pub name: String,
    pub levels: Vec<String>,
    /// `up[l][member index at l]` = parent index at `l + 1`.
    pub up: Vec<Vec<usize>>,
    pub sizes: Vec<usize>,
    pub dim: Arc<Dimension>,
}

impl Chain {
    pub fn member(&self, level: usize, i: usize) -> String {
        format!("{}{}_{}", self.name, level, i)
    }

    pub fn anc(&self, mut i: usize, to: usize) -> usize {
        for l in 0..to {
            i = self.up[l][i];
        }
        i
    }
}

pub fn random_chain(rng: &mut ChaCha8Rng, name: &str) -> Chain {
    let depth = rng.gen_range(1..=3);
    let mut sizes = vec![rng.gen_range(2..=6)];
    for _ in 1..depth {
        let prev = *sizes.last().unwrap();
        sizes.push(rng.gen_range(1..=prev));
    }
    let mut up = Vec::new();
    for l in 0..depth - 1 {
        // Every parent keeps at least one child.
        let mut map: Vec<usize> = (0..sizes[l]).map(|i| if i < sizes[l + 1] { i } else { rng.gen_range(0..sizes[l + 1]) }).collect();
        for k in (1..map.len()).rev() {
            let j = rng.gen_range(0..=k);
            map.swap(j, k);
        }
        up.push(map);
    }
    let levels: Vec<String> = (0..depth).map(|l| format!("L{l}")).collect();
    let mut c = Chain {
        name: name.to_string(),
        levels,
        up,
        sizes,
        dim: Arc::new(Dimension::chain("x", &["L0"], &[&["x"]]).unwrap()),
    };
    let rows: Vec<Vec<String>> = (0..c.sizes[0])
        .map(|i| (0..depth).map(|l| c.member(l, c.anc(i, l))).collect())
        .collect();
    let row_refs: Vec<Vec<&str>> = rows.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let slices: Vec<&[&str]> = row_refs.iter().map(Vec::as_slice).collect();
    let names: Vec<&str> = c.levels.iter().map(String::as_str).collect();
    c.dim = Arc::new(Dimension::chain(name, &names, &slices).unwrap());
    c
}

pub struct Schema {
    pub chains: Vec<Chain>,
    /// Bottom member indices per fact, and the fact's value.
    pub facts: Vec<(Vec<usize>, f64)>,
    pub cube: Cube,
}

pub fn random_schema(seed: u64) -> Schema {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = rng.gen_range(1..=3);
    let chains: Vec<Chain> = (0..nd).map(|d| random_chain(&mut rng, &format!("d{d}"))).collect();
    let mut facts = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..rng.gen_range(1..40) {
        let key: Vec<usize> = chains.iter().map(|c| rng.gen_range(0..c.sizes[0])).collect();
        if seen.insert(key.clone()) {
            facts.push((key, rng.gen_range(-50..100) as f64));
        }
    }
    let axes = chains.iter().map(|c| Axis::new(c.dim.clone(), 0)).collect();
    let cells = facts
        .iter()
        .map(|(k, v)| Cell {
            coords: k.iter().zip(&chains).map(|(i, c)| c.member(0, *i)).collect(),
            values: vec![*v],
        })
        .collect();
    let cube = Cube::new("F", axes, vec!["m".into()], cells).unwrap();
    Schema { chains, facts, cube }
}

/// Equality atoms only, so the oracle needs no member order.
#[derive(Debug, Clone)]
pub enum Phi {
    True,
    Eq(usize, usize, usize, bool),
    And(Box<Phi>, Box<Phi>),
    Or(Box<Phi>, Box<Phi>),
    Not(Box<Phi>),
}

pub fn random_phi(rng: &mut ChaCha8Rng, s: &Schema, depth: u32) -> Phi {
    match rng.gen_range(0..if depth == 0 { 2 } else { 5 }) {
        0 => Phi::True,
        1 => {
            let d = rng.gen_range(0..s.chains.len());
            let l = rng.gen_range(0..s.chains[d].levels.len());
            let m = rng.gen_range(0..s.chains[d].sizes[l]);
            Phi::Eq(d, l, m, rng.gen_bool(0.7))
        }
        2 => Phi::And(Box::new(random_phi(rng, s, depth - 1)), Box::new(random_phi(rng, s, depth - 1))),
        3 => Phi::Or(Box::new(random_phi(rng, s, depth - 1)), Box::new(random_phi(rng, s, depth - 1))),
        _ => Phi::Not(Box::new(random_phi(rng, s, depth - 1))),
    }
}

pub fn to_condition(p: &Phi, s: &Schema) -> Condition {
    match p {
        Phi::True => Condition::True,
        Phi::Eq(d, l, m, eq) => {
            let c = &s.chains[*d];
            Condition::atom(&c.name, &c.levels[*l], if *eq { CmpOp::Eq } else { CmpOp::Ne }, &c.member(*l, *m))
        }
        Phi::And(a, b) => Condition::And(Box::new(to_condition(a, s)), Box::new(to_condition(b, s))),
        Phi::Or(a, b) => Condition::Or(Box::new(to_condition(a, s)), Box::new(to_condition(b, s))),
        Phi::Not(a) => Condition::Not(Box::new(to_condition(a, s))),
    }
}

pub fn holds(p: &Phi, s: &Schema, key: &[usize]) -> bool {
    match p {
        Phi::True => true,
        Phi::Eq(d, l, m, eq) => (s.chains[*d].anc(key[*d], *l) == *m) == *eq,
        Phi::And(a, b) => holds(a, s, key) && holds(b, s, key),
        Phi::Or(a, b) => holds(a, s, key) || holds(b, s, key),
        Phi::Not(a) => !holds(a, s, key),
    }
}

/// Runs one random query over the schema built from `seed` and compares every
/// aggregate with a brute-force group-by over the facts.
pub fn check_group_by(seed: u64) -> Result<(), String> {
    let s = random_schema(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let phi = random_phi(&mut rng, &s, 3);
    // Grouping level per dimension; `None` rolls the dimension up to ALL.
    let group: Vec<Option<usize>> = s
        .chains
        .iter()
        .map(|c| {
            let l = rng.gen_range(0..=c.levels.len());
            (l < c.levels.len()).then_some(l)
        })
        .collect();
    let q = CubeQuery {
        base: "F".into(),
        selection: to_condition(&phi, &s),
        group: s
            .chains
            .iter()
            .zip(&group)
            .map(|(c, g)| LevelRef::new(&c.name, g.map_or(ALL_LEVEL, |l| c.levels[l].as_str())))
            .collect(),
        aggregates: AggFn::ALL.iter().map(|f| Aggregate { func: *f, measure: "m".into() }).collect(),
    };
    let out = eval_cube_query(&s.cube, &q, "out").map_err(|e| e.to_string())?;

    let mut groups: BTreeMap<Vec<String>, Vec<f64>> = BTreeMap::new();
    for (key, v) in &s.facts {
        if !holds(&phi, &s, key) {
            continue;
        }
        let gk = s
            .chains
            .iter()
            .enumerate()
            .zip(&group)
            .filter_map(|((d, c), g)| g.map(|l| c.member(l, c.anc(key[d], l))))
            .collect();
        groups.entry(gk).or_default().push(*v);
    }
    if out.len() != groups.len() {
        return Err(format!("seed {seed}: {} groups, expected {}", out.len(), groups.len()));
    }
    let names = q.output_names();
    for (gk, vals) in &groups {
        let i = out.find(gk).ok_or_else(|| format!("seed {seed}: group {gk:?} missing"))?;
        let cell = &out.cells()[i];
        let sum: f64 = vals.iter().sum();
        let expect = [
            ("sum", sum),
            ("min", vals.iter().cloned().fold(f64::INFINITY, f64::min)),
            ("max", vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            ("count", vals.len() as f64),
            ("avg", sum / vals.len() as f64),
        ];
        for (f, e) in expect {
            let k = names.iter().position(|n| n == &format!("{f}(m)")).unwrap();
            let got = cell.values[out.measure_index(&names[k]).unwrap()];
            let ok = if f == "avg" { (got - e).abs() <= 1e-9 * e.abs().max(1.0) } else { got == e };
            if !ok {
                return Err(format!("seed {seed}: {f} of {gk:?} is {got}, expected {e}"));
            }
        }
    }
    Ok(())
}

pub fn check_anc_desc(d: &Dimension) {
    let n = d.levels().len();
    for a in 0..n {
        for b in 0..n {
            if a == b || !d.precedes_eq(a, b) {
                continue;
            }
            let mut covered = Vec::new();
            for m in d.level(b).members() {
                for x in d.desc(b, a, m).unwrap() {
                    assert_eq!(d.anc(a, b, x).unwrap(), m);
                    covered.push(x.to_string());
                }
            }
            covered.sort();
            let mut all: Vec<String> = d.level(a).members().to_vec();
            all.sort();
            assert_eq!(covered, all, "desc sets partition {}.{}", d.name, d.level(a).name);
            for c in 0..n {
                if b == c || !d.precedes_eq(b, c) {
                    continue;
                }
                for x in d.level(a).members() {
                    let direct = d.anc(a, c, x).unwrap();
                    let composed = d.anc(b, c, d.anc(a, b, x).unwrap()).unwrap();
                    assert_eq!(direct, composed);
                }
            }
        }
    }
}

pub fn partition_ok(m: &Model, cells: usize) -> bool {
    m.families.iter().filter(|f| f.partitioning).all(|f| {
        (0..cells).all(|i| {
            f.members
                .iter()
                .filter(|&&c| m.components[c].core_cells().contains(&i))
                .count()
                == 1
        })
    })
}

pub fn random_cube(seed: u64) -> Cube {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(2..6);
    let b = rng.gen_range(2..5);
    let am: Vec<String> = (0..a).map(|i| format!("a{i}")).collect();
    let bm: Vec<String> = (0..b).map(|i| format!("b{i}")).collect();
    let da = Dimension::chain("A", &["L0"], &am.iter().map(|m| vec![m.as_str()]).collect::<Vec<_>>().iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap();
    let db = Dimension::chain("B", &["L0"], &bm.iter().map(|m| vec![m.as_str()]).collect::<Vec<_>>().iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap();
    let mut cells = Vec::new();
    for x in &am {
        for y in &bm {
            // A few repeated values exercise the tie rules.
            let v = if rng.gen_bool(0.2) { 40.0 } else { rng.gen_range(20.0..60.0) };
            cells.push(Cell { coords: vec![x.clone(), y.clone()], values: vec![v, rng.gen_range(0.0..10.0)] });
        }
    }
    Cube::new("R", vec![Axis::new(Arc::new(da), 0), Axis::new(Arc::new(db), 0)], vec!["m".into(), "x".into()], cells).unwrap()
}

/// One instance of every model type with antagonist components, built over
/// `cube` (as produced by `random_cube`).
pub fn antagonist_models(cube: &Cube, seed: u64) -> Vec<Model> {
    let n = cube.len();
    let rules = KpiRules::new(
        "r",
        None,
        vec![
            KpiRule { lo: f64::NEG_INFINITY, hi: 40.0, label: "Low".into() },
            KpiRule { lo: 40.0, hi: f64::INFINITY, label: "High".into() },
        ],
    )
    .unwrap();
    let other = cube.subset(&(0..n).filter(|i| i % 2 == 0).collect::<Vec<_>>());
    let bench: Vec<f64> = cube.values("x").unwrap().iter().map(|v| v * 5.0).collect();
    vec![
        models::topk_rank(cube, "m", 3).unwrap(),
        models::outliers(cube, "m", 1.0).unwrap(),
        models::kpi(cube, "m", &rules).unwrap(),
        models::benchmark_discrepancy(cube, "m", "b", &bench).unwrap(),
        models::variance_test(cube, &other, "m").unwrap(),
        models::kmeans(cube, &["m".to_string()], 2, seed).unwrap(),
        models::regression(cube, "m", &["x".to_string()], 1.0).unwrap(),
    ]
}

pub fn ident_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[A-Za-z_][A-Za-z0-9_]{0,6}",
        1 => "[A-Za-z][A-Za-z0-9 ._'\"-]{0,8}",
        1 => prop::sample::select(vec!["with", "Group", "AND", "cube", "by"]).prop_map(String::from),
    ]
}

pub fn level_strategy() -> impl Strategy<Value = LevelRef> {
    (ident_strategy(), ident_strategy()).prop_map(|(d, l)| LevelRef { dimension: d, level: l })
}

pub fn condition_strategy() -> impl Strategy<Value = Condition> {
    let op = prop::sample::select(vec![CmpOp::Lt, CmpOp::Gt, CmpOp::Eq, CmpOp::Le, CmpOp::Ge, CmpOp::Ne]);
    let leaf = prop_oneof![
        1 => Just(Condition::True),
        1 => Just(Condition::False),
        6 => (level_strategy(), op, "[ -~]{0,8}")
            .prop_map(|(l, op, v)| Condition::atom(&l.dimension, &l.level, op, &v)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Condition::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Condition::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Condition::Not(Box::new(a))),
        ]
    })
}

pub fn param_strategy() -> impl Strategy<Value = Param> {
    prop_oneof![
        (-1.0e6..1.0e6f64).prop_map(Param::Num),
        (0u32..1000).prop_map(|n| Param::Num(n as f64)),
        "[ -~]{0,6}".prop_map(Param::Str),
    ]
}

pub fn model_call_strategy() -> impl Strategy<Value = ModelCall> {
    (
        ident_strategy(),
        // Arguments are dotted paths, so their segments cannot contain dots.
        prop::collection::vec(
            prop::collection::vec(ident_strategy().prop_filter("dotless segment", |s| !s.contains('.')), 1..3)
                .prop_map(|p| p.join(".")),
            0..3,
        ),
        prop::collection::btree_map(ident_strategy(), param_strategy(), 0..3),
    )
        .prop_map(|(name, args, params)| ModelCall { name, args, params: params.into_iter().collect() })
}

pub fn opt_filter() -> impl Strategy<Value = Option<Condition>> {
    prop::option::of(condition_strategy())
}

pub fn verb_strategy() -> impl Strategy<Value = Verb> {
    let ids = || prop::collection::vec(ident_strategy(), 1..3);
    prop_oneof![
        (ids(), opt_filter(), prop::option::of(prop_oneof![
            prop::collection::vec(level_strategy(), 1..3).prop_map(By::Levels),
            (1u32..20).prop_map(By::Size),
        ]))
            .prop_map(|(measures, filter, by)| Verb::Describe { measures, filter, by }),
        (ids(), opt_filter(), ids()).prop_map(|(measures, filter, benchmarks)| Verb::Assess { measures, filter, benchmarks }),
        (ident_strategy(), opt_filter(), prop::collection::vec(model_call_strategy(), 1..3), prop::option::of(ident_strategy()))
            .prop_map(|(measure, filter, models, against)| Verb::Explain { measure, filter, models, against }),
        (1u32..50, ident_strategy(), opt_filter(), ident_strategy(), ident_strategy())
            .prop_map(|(k, measure, filter, over, model)| Verb::Predict { k, measure, filter, over, model }),
        prop::option::of(ident_strategy()).prop_map(|model| Verb::Suggest { model }),
    ]
}

pub fn statement_strategy() -> impl Strategy<Value = Statement> {
    let agg = prop::sample::select(AggFn::ALL.to_vec());
    prop_oneof![
        (ident_strategy(), verb_strategy()).prop_map(|(cube, verb)| Statement::Intention(Intention { cube, verb })),
        (
            ident_strategy(),
            condition_strategy(),
            prop::collection::vec(level_strategy(), 0..3),
            prop::collection::vec((agg, ident_strategy()), 1..3),
        )
            .prop_map(|(base, selection, group, aggs)| Statement::Query(CubeQuery {
                base,
                selection,
                group,
                aggregates: aggs.into_iter().map(|(func, measure)| Aggregate { func, measure }).collect(),
            })),
    ]
}
