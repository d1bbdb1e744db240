use std::collections::HashMap;

use iolap::iql::{parse_statement, render_statement};
use iolap::models;
use iolap::{eval_cube_query, eval_selection, AggFn, Aggregate, Catalog, CmpOp, Condition, CubeQuery, LevelRef};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cube_query_matches_brute_force_group_by(seed in any::<u64>()) {
        check_group_by(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn anc_desc_inverse_and_composition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_chain(&mut rng, "d");
        check_anc_desc(&c.dim);
        for l in 0..c.levels.len() {
            for i in 0..c.sizes[0] {
                prop_assert_eq!(c.dim.anc(0, l, &c.member(0, i)).unwrap(), c.member(l, c.anc(i, l)));
            }
        }
    }

    #[test]
    fn selection_on_coarse_members_commutes_with_grouping(seed in any::<u64>()) {
        let s = random_schema(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let d = rng.gen_range(0..s.chains.len());
        let c = &s.chains[d];
        let l = c.levels.len() - 1;
        let m = c.member(l, rng.gen_range(0..c.sizes[l]));
        let phi = Condition::atom(&c.name, &c.levels[l], CmpOp::Eq, &m);
        let q = CubeQuery {
            base: "F".into(),
            selection: Condition::True,
            group: s.chains.iter().map(|c| LevelRef::new(&c.name, &c.levels[c.levels.len() - 1])).collect(),
            aggregates: vec![Aggregate { func: AggFn::Sum, measure: "m".into() }],
        };
        let after = eval_selection(&eval_cube_query(&s.cube, &q, "a").unwrap(), &phi).unwrap();
        let before = eval_cube_query(&s.cube, &q.and_filter(&phi), "a").unwrap();
        prop_assert_eq!(after.cells(), before.cells());
    }
}

#[test]
fn anc_desc_laws_hold_on_fixture_dimensions() {
    let c = Catalog::load_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/catalog")).unwrap();
    for d in c.dimensions.values() {
        check_anc_desc(d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn antagonists_partition_cells(seed in any::<u64>()) {
        let cube = random_cube(seed);
        let n = cube.len();
        for m in &antagonist_models(&cube, seed) {
            m.validate(n).unwrap();
            prop_assert!(partition_ok(m, n), "{}", m.model_type);
            for c in &m.components {
                prop_assert_eq!(c.elements.len(), n);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_inverts_render(stmt in statement_strategy()) {
        let text = render_statement(&stmt);
        let back = parse_statement(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, stmt, "{}", text);
    }

    #[test]
    fn parser_never_panics(src in "[ -~]{0,60}") {
        let _ = parse_statement(&src);
    }

    #[test]
    fn parser_never_panics_on_near_misses(stmt in statement_strategy(), cut in 0usize..200) {
        let text = render_statement(&stmt);
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let _ = parse_statement(&text[..at]);
    }
}

#[test]
fn identity_proxies_give_zero_surprise() {
    let cube = random_cube(3);
    let plan = iolap::highlights::ScoringPlan::describe();
    let s = iolap::highlights::Scoring::compute(&plan, &cube, &cube, "m", &iolap::proxies::same_coordinates(&cube, &cube)).unwrap();
    assert!(s.surprises.iter().all(|v| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn winner_scores_at_least_every_candidate(seed in any::<u64>()) {
        let cube = random_cube(seed);
        let ms = vec![
            models::topk_rank(&cube, "m", 3).unwrap(),
            models::outliers(&cube, "m", 1.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let surprises: Vec<f64> = (0..cube.len()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let plan = iolap::highlights::ScoringPlan::describe();
        let h = iolap::highlights::select_from_surprises(&ms, &surprises, &plan, &cube).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut scores: HashMap<(usize, usize), f64> = HashMap::new();
        for (mi, m) in ms.iter().enumerate() {
            for c in iolap::highlights::candidates(m) {
                let core = m.components[c].core_cells();
                let v = if core.is_empty() {
                    f64::NEG_INFINITY
                } else {
                    core.iter().map(|&i| surprises[i]).sum::<f64>() / core.len() as f64
                };
                scores.insert((mi, c), v);
                best = best.max(v);
            }
        }
        prop_assert!((h.score - best).abs() < 1e-12);
        prop_assert_eq!(scores[&(h.model, h.component)], h.score);
    }
}
