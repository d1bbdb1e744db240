//! The proxies relation between the cells of a new cube and an old one.

use std::sync::Arc;

use crate::cube::Cube;
use crate::error::{Error, Result};

/// For every cell of `new`, the positions of the old cells covering an
/// overlapping region of the multidimensional space (ancestors on drill-down,
/// descendants on roll-up). Cells without a structural relative map to the
/// whole old cube.
pub fn proxies(old: &Cube, new: &Cube) -> Result<Vec<Vec<usize>>> {
    let shared: Vec<(usize, usize)> = new
        .axes()
        .iter()
        .enumerate()
        .filter_map(|(ni, a)| old.axis_of(a.dim_name()).map(|oi| (ni, oi)))
        .collect();
    if shared.is_empty() && !new.axes().is_empty() && !old.axes().is_empty() {
        return Err(Error::Schema(format!(
            "cubes `{}` and `{}` have disjoint dimension sets",
            new.name, old.name
        )));
    }
    // Per shared dimension: the old level inside the new cube's dimension, when
    // both cubes use the same hierarchy.
    let levels: Vec<Option<usize>> = shared
        .iter()
        .map(|&(ni, oi)| {
            let (na, oa) = (&new.axes()[ni], &old.axes()[oi]);
            if Arc::ptr_eq(&na.dimension, &oa.dimension) {
                Some(oa.level)
            } else {
                na.dimension
                    .level_index(oa.level_name())
                    .ok()
                    .filter(|&l| na.dimension.level(l).members() == oa.dimension.level(oa.level).members())
            }
        })
        .collect();
    let all_old: Vec<usize> = (0..old.len()).collect();
    Ok(new
        .cells()
        .iter()
        .map(|nc| {
            let related: Vec<usize> = old
                .cells()
                .iter()
                .enumerate()
                .filter(|(_, oc)| {
                    shared.iter().zip(&levels).all(|(&(ni, oi), lo)| {
                        let na = &new.axes()[ni];
                        match lo {
                            Some(lo) => na.dimension.related(na.level, &nc.coords[ni], *lo, &oc.coords[oi]),
                            None => nc.coords[ni] == oc.coords[oi],
                        }
                    })
                })
                .map(|(i, _)| i)
                .collect();
            if related.is_empty() {
                all_old.clone()
            } else {
                related
            }
        })
        .collect())
}

/// Identity relation by equal coordinates, falling back to the whole cube.
pub fn same_coordinates(old: &Cube, new: &Cube) -> Vec<Vec<usize>> {
    new.cells()
        .iter()
        .map(|c| match old.find(&c.coords) {
            Some(i) => vec![i],
            None => (0..old.len()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{Axis, Cell};
    use crate::dimension::Dimension;

    fn wc() -> Arc<Dimension> {
        Arc::new(
            Dimension::chain(
                "wc",
                &["L0", "L1"],
                &[&["Federal-gov", "Gov"], &["State-gov", "Gov"], &["Private", "Private"]],
            )
            .unwrap(),
        )
    }

    fn cube(d: &Arc<Dimension>, level: usize, members: &[&str]) -> Cube {
        let cells = members
            .iter()
            .map(|m| Cell {
                coords: vec![m.to_string()],
                values: vec![1.0],
            })
            .collect();
        Cube::new("c", vec![Axis::new(d.clone(), level)], vec!["m".into()], cells).unwrap()
    }

    #[test]
    fn drill_down_maps_to_ancestor() {
        let d = wc();
        let old = cube(&d, 1, &["Gov", "Private"]);
        let new = cube(&d, 0, &["Federal-gov", "Private", "State-gov"]);
        assert_eq!(proxies(&old, &new).unwrap(), vec![vec![0], vec![1], vec![0]]);
        // Roll-up maps to descendants.
        assert_eq!(proxies(&new, &old).unwrap(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn identity_and_fallback() {
        let d = wc();
        let c = cube(&d, 0, &["Federal-gov", "Private"]);
        assert_eq!(proxies(&c, &c).unwrap(), vec![vec![0], vec![1]]);
        let other = cube(&d, 0, &["State-gov"]);
        assert_eq!(proxies(&other, &c).unwrap(), vec![vec![0], vec![0]]);
    }

    #[test]
    fn grand_total_is_everyones_proxy() {
        let d = wc();
        let total = Cube::new("t", vec![], vec!["m".into()], vec![Cell { coords: vec![], values: vec![2.0] }]).unwrap();
        let c = cube(&d, 0, &["Federal-gov", "Private"]);
        assert_eq!(proxies(&total, &c).unwrap(), vec![vec![0], vec![0]]);
    }

    #[test]
    fn disjoint_dimensions() {
        let g = Arc::new(Dimension::chain("g", &["L0"], &[&["F"]]).unwrap());
        let a = cube(&wc(), 0, &["Private"]);
        let b = cube(&g, 0, &["F"]);
        assert!(proxies(&a, &b).is_err());
    }
}
