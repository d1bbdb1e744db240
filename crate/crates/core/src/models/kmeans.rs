use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Component, Model};
use crate::cube::Cube;
use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-9;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    for (j, c) in centroids.iter().enumerate().skip(1) {
        if dist2(p, c) < dist2(p, &centroids[best]) {
            best = j;
        }
    }
    best
}

/// Lloyd's algorithm over the given measures with seeded farthest-point
/// initialization. Clusters are numbered by their smallest cell position.
pub fn kmeans(cube: &Cube, measures: &[String], k: usize, seed: u64) -> Result<Model> {
    let n = cube.len();
    if k == 0 || k > n {
        return Err(Error::model("kmeans", format!("k = {k} must be between 1 and the {n} cells")));
    }
    let cols = measures.iter().map(|m| cube.values(m)).collect::<Result<Vec<_>>>()?;
    let points: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    while centroids.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| {
                let da = centroids.iter().map(|c| dist2(&points[a], c)).fold(f64::INFINITY, f64::min);
                let db = centroids.iter().map(|c| dist2(&points[b], c)).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("nonempty");
        centroids.push(points[far].clone());
    }

    let mut assign = vec![0usize; n];
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        for (i, p) in points.iter().enumerate() {
            assign[i] = nearest(p, &centroids);
        }
        let mut next = vec![vec![0.0; cols.len()]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in next[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                // Re-seed an empty cluster from the point farthest from its centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = dist2(&points[a], &centroids[assign[a]]);
                        let db = dist2(&points[b], &centroids[assign[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("nonempty");
                next[j] = points[far].clone();
                assign[far] = j;
            } else {
                for s in next[j].iter_mut() {
                    *s /= counts[j] as f64;
                }
            }
        }
        let shift = centroids.iter().zip(&next).map(|(a, b)| dist2(a, b)).fold(0.0, f64::max);
        centroids = next;
        if shift <= TOL {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        assign[i] = nearest(p, &centroids);
    }

    // Relabel by first occurrence so labels do not depend on initialization order.
    let mut relabel = vec![usize::MAX; k];
    let mut next_label = 0;
    for &a in &assign {
        if relabel[a] == usize::MAX {
            relabel[a] = next_label;
            next_label += 1;
        }
    }
    for r in relabel.iter_mut().filter(|r| **r == usize::MAX) {
        *r = next_label;
        next_label += 1;
    }
    let assign: Vec<usize> = assign.iter().map(|&a| relabel[a]).collect();
    let mut cents = vec![Vec::new(); k];
    for (old, &new) in relabel.iter().enumerate() {
        cents[new] = centroids[old].clone();
    }

    let inertia: f64 = points.iter().zip(&assign).map(|(p, &a)| dist2(p, &cents[a])).sum();
    let mut representative = vec![false; n];
    for (j, c) in cents.iter().enumerate() {
        let medoid = (0..n)
            .filter(|&i| assign[i] == j)
            .min_by(|&a, &b| dist2(&points[a], c).total_cmp(&dist2(&points[b], c)).then(a.cmp(&b)));
        if let Some(i) = medoid {
            representative[i] = true;
        }
    }

    let mut m = Model::new("kmeans", cube, &measures.join(",")).bind("k", k).bind("seed", seed);
    m.characterize("inertia", json!(inertia));
    m.characterize("iterations", json!(iterations));
    m.characterize("centroids", json!(cents));
    let members = (0..k)
        .map(|j| m.push(Component::bitmap(&format!("Cluster_{}", j + 1), assign.iter().map(|&a| a == j).collect())))
        .collect();
    m.family("clusters", members, true);
    m.push(Component::bitmap("Representative", representative));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fixtures::cn;

    #[test]
    fn single_cluster_medoid_is_nearest_to_mean() {
        let c = cn();
        let m = kmeans(&c, &["HoursPerWeek".into()], 1, 42).unwrap();
        m.validate(c.len()).unwrap();
        assert_eq!(m.component("Cluster_1").unwrap().core_cells().len(), c.len());
        let v = c.values("HoursPerWeek").unwrap();
        let mean = crate::models::stats::mean(&v);
        let rep = m.component("Representative").unwrap().core_cells();
        let best = (0..v.len()).min_by(|&a, &b| (v[a] - mean).abs().total_cmp(&(v[b] - mean).abs())).unwrap();
        assert_eq!(rep, vec![best]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let c = cn();
        let a = kmeans(&c, &["HoursPerWeek".into()], 3, 7).unwrap();
        let b = kmeans(&c, &["HoursPerWeek".into()], 3, 7).unwrap();
        assert_eq!(a, b);
        assert!(kmeans(&c, &["HoursPerWeek".into()], 25, 7).is_err());
    }
}
