#![allow(dead_code)]

use std::collections::BTreeSet;

use dect_core::complex::{normalize, GeometricComplex};
use dect_core::ect::{DirectionSet, FiltrationValues};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type TestRng = dect_core::rng::Rng;

pub fn rng(seed: u64) -> TestRng {
    dect_core::rng::seeded(seed)
}

/// Random normalised complex with closed faces. Every triangle contributes
/// its edges; extra random edges are added up to `max_edges`.
pub fn random_complex(
    r: &mut TestRng,
    dim: usize,
    max_vertices: usize,
    max_edges: usize,
    max_triangles: usize,
) -> GeometricComplex {
    let n = r.random_range(3..=max_vertices);
    let vertices: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let mut edges: BTreeSet<[usize; 2]> = BTreeSet::new();
    let mut triangles: BTreeSet<[usize; 3]> = BTreeSet::new();
    let target_t = r.random_range(0..=max_triangles);
    for _ in 0..target_t * 4 {
        if triangles.len() >= target_t {
            break;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(r);
        let mut t = [idx[0], idx[1], idx[2]];
        t.sort_unstable();
        let new_edges = [[t[0], t[1]], [t[1], t[2]], [t[0], t[2]]];
        let added = new_edges.iter().filter(|e| !edges.contains(*e)).count();
        if edges.len() + added > max_edges || triangles.contains(&t) {
            continue;
        }
        triangles.insert(t);
        edges.extend(new_edges);
    }
    let target_e = r.random_range(edges.len()..=max_edges.max(edges.len()));
    for _ in 0..target_e * 4 {
        if edges.len() >= target_e {
            break;
        }
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b {
            edges.insert([a.min(b), a.max(b)]);
        }
    }
    let c = GeometricComplex::new(
        vertices,
        edges.into_iter().collect(),
        triangles.into_iter().collect(),
    )
    .unwrap();
    normalize(&c).unwrap()
}

pub fn random_directions(
    r: &mut TestRng,
    dim: usize,
    count: usize,
    constrained: bool,
) -> DirectionSet {
    let data: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(r)).collect();
            let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            // Unconstrained sets get norms in [0.7, 1.3].
            let scale = if constrained {
                1.0
            } else {
                r.random_range(0.7..1.3)
            };
            v.iter().map(|x| scale * x / norm).collect()
        })
        .collect();
    DirectionSet::new(data, constrained).unwrap()
}

/// Smallest gap between two vertex heights of the same direction.
pub fn min_vertex_gap(f: &FiltrationValues) -> f64 {
    let mut best = f64::INFINITY;
    for d in 0..f.num_directions() {
        let mut row = f.vertex_heights.row(d).to_vec();
        row.sort_by(f64::total_cmp);
        for w in row.windows(2) {
            best = best.min(w[1] - w[0]);
        }
    }
    best
}

/// Applies a vertex permutation: new vertex `i` is old vertex `order[i]`.
/// Simplex lists are remapped and then reversed.
pub fn permute(c: &GeometricComplex, order: &[usize]) -> GeometricComplex {
    let mut inv = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    let vertices = order.iter().map(|&i| c.vertex(i).to_vec()).collect();
    let edges = c
        .edges()
        .iter()
        .rev()
        .map(|e| [inv[e[1]], inv[e[0]]])
        .collect();
    let triangles = c
        .triangles()
        .iter()
        .rev()
        .map(|t| [inv[t[2]], inv[t[0]], inv[t[1]]])
        .collect();
    GeometricComplex::new(vertices, edges, triangles).unwrap()
}

/// Random orthogonal matrix (row-major) from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal(r: &mut TestRng, dim: usize) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(r)).collect();
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    basis.concat()
}

pub fn rotate(q: &[f64], dim: usize, v: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| (0..dim).map(|j| q[i * dim + j] * v[j]).sum())
        .collect()
}

pub fn rotate_complex(c: &GeometricComplex, q: &[f64]) -> GeometricComplex {
    let coords = c.vertices().flat_map(|v| rotate(q, c.dim(), v)).collect();
    c.with_coords(coords).unwrap()
}

pub fn rotate_directions(d: &DirectionSet, q: &[f64]) -> DirectionSet {
    let data = d.iter().flat_map(|v| rotate(q, d.dim(), v)).collect();
    DirectionSet::from_flat(d.dim(), data, false).unwrap()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
