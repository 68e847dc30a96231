#![allow(dead_code)]

use nlplap::graph::{GraphKind, WeightedGraph};
use nlplap::{rng, SquareMatrix};
use rand::Rng;

/// Symmetric random weights in `[0, 1]`, about a third of them zero.
pub fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    let mut r = rng::stream(seed, "test-graph", n as u64, 0);
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let w = if r.random::<f64>() < 0.33 { 0.0 } else { r.random::<f64>() };
            m.set(i, j, w);
            m.set(j, i, w);
        }
    }
    WeightedGraph::new(m, GraphKind::WeightedAvg).unwrap()
}

pub fn random_vec(n: usize, seed: u64, name: &str, scale: f64) -> Vec<f64> {
    let mut r = rng::stream(seed, name, n as u64, 0);
    (0..n).map(|_| scale * (2.0 * r.random::<f64>() - 1.0)).collect()
}

pub fn norm_n(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

pub fn dist_n(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}
