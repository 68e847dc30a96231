use nlplap::graph::{
    deterministic_weighted, sample_inhomogeneous, simple_graph, wedge_weights, NodeMode, RandomGraphConfig,
    WeightedGraph,
};
use nlplap::graphon::{Graphon, Partition};

fn assert_valid(g: &WeightedGraph) {
    let w = g.weights();
    for i in 0..g.n() {
        assert_eq!(w.get(i, i), 0.0);
        for j in 0..g.n() {
            assert_eq!(w.get(i, j), w.get(j, i));
            assert!(w.get(i, j) >= 0.0);
        }
    }
}

#[test]
fn constructors_give_valid_tables() {
    let band = Graphon::band(0.2).unwrap();
    assert_valid(&deterministic_weighted(&band, 41).unwrap());
    assert_valid(&simple_graph(&band, 41).unwrap());
    for mode in [NodeMode::Equispaced, NodeMode::UniformOrderStatistics] {
        for q_n in [1.0, 0.25] {
            let cfg = RandomGraphConfig { n: 41, q_n, seed: 9, node_mode: mode };
            let g = sample_inhomogeneous(&band, &cfg).unwrap();
            assert_valid(&g);
            let again = sample_inhomogeneous(&band, &cfg).unwrap();
            assert_eq!(g.weights(), again.weights());
        }
    }
}

#[test]
fn bernoulli_entries_match_wedge_on_average() {
    // {0,1} band kernel: boundary cells carry fractional wedge entries
    let band = Graphon::band(0.23).unwrap();
    let n = 30;
    let wedge = wedge_weights(&band, &Partition::equispaced(n).unwrap(), 1.0).unwrap();
    let draws = 400;
    let mut sum = vec![0.0; n * n];
    for s in 0..draws {
        let g = sample_inhomogeneous(&band, &RandomGraphConfig { n, q_n: 1.0, seed: s, node_mode: NodeMode::Equispaced }).unwrap();
        assert!(g.weights().as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        for (acc, v) in sum.iter_mut().zip(g.weights().as_slice()) {
            *acc += v;
        }
    }
    // pooled over the fractional boundary cells of the upper triangle, and
    // per cell with a Bonferroni-sized band
    let (mut got, mut want, mut var) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let p = wedge.get(i, j);
            let mean = sum[i * n + j] / draws as f64;
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((mean - p).abs() <= 5.0 * sd + 1e-12, "cell ({i},{j}): {mean} vs {p}");
            got += mean;
            want += p;
            var += sd * sd;
        }
    }
    assert!((got - want).abs() <= 3.0 * var.sqrt(), "{got} vs {want}");
}
