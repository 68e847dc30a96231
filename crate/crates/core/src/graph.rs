//! Discrete graphs built from kernels or point coordinates.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graphon::{project_kernel, project_kernel_simple, Graphon, Partition};
use crate::{rng, Error, Execution, Result, SquareMatrix};

/// Version of the graph header JSON schema.
pub const GRAPH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphKind {
    /// Cell averages of a kernel.
    WeightedAvg,
    /// `{0,1}` support adjacency.
    Simple01,
    /// Entries in `{0, 1/q_n}`.
    BernoulliScaled { q_n: f64 },
    /// `exp(-|x-y|)` weights within radius `delta` of point coordinates.
    Coordinate { delta: f64 },
}

/// Undirected weighted graph on `n` nodes stored as a dense symmetric
/// table with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: SquareMatrix,
    kind: GraphKind,
    seed: Option<u64>,
}

/// One undirected edge `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl WeightedGraph {
    /// Validates symmetry, nonnegativity, zero diagonal and the value set
    /// implied by `kind`.
    pub fn new(weights: SquareMatrix, kind: GraphKind) -> Result<Self> {
        let n = weights.n();
        for i in 0..n {
            if weights.get(i, i) != 0.0 {
                return Err(Error::invalid(format!("graph has a loop at node {i}")));
            }
            for j in 0..n {
                let w = weights.get(i, j);
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::invalid(format!("weight ({i},{j}) = {w} must be finite and >= 0")));
                }
                if w != weights.get(j, i) {
                    return Err(Error::invalid(format!("weights not symmetric at ({i},{j})")));
                }
                let allowed = match kind {
                    GraphKind::Simple01 => w == 0.0 || w == 1.0,
                    GraphKind::BernoulliScaled { q_n } => w == 0.0 || w == 1.0 / q_n,
                    _ => true,
                };
                if !allowed {
                    return Err(Error::invalid(format!("weight {w} not allowed for {kind:?}")));
                }
            }
        }
        Ok(Self {
            weights,
            kind,
            seed: None,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &SquareMatrix {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// Seed the graph was sampled with, for random graphs.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn has_edges(&self) -> bool {
        self.weights.as_slice().iter().any(|&w| w != 0.0)
    }

    /// Fraction of off-diagonal entries that are nonzero.
    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let nnz = self.weights.as_slice().iter().filter(|&&w| w != 0.0).count();
        nnz as f64 / (n * (n - 1)) as f64
    }

    /// Coordinate-list view of the upper triangle.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for (j, &weight) in self.weights.row(i).iter().enumerate().skip(i + 1) {
                if weight != 0.0 {
                    out.push(Edge { i, j, weight });
                }
            }
        }
        out
    }

    pub fn header(&self, edges_file: &str) -> GraphHeader {
        GraphHeader {
            schema_version: GRAPH_SCHEMA_VERSION,
            n: self.n(),
            kind: self.kind,
            seed: self.seed,
            edges_file: edges_file.to_string(),
        }
    }

    /// Edge list CSV with columns `i,j,weight` (0-based, `i < j`).
    pub fn write_edges_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for e in self.edges() {
            wtr.serialize(e)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn from_edges_csv<R: Read>(header: &GraphHeader, r: R) -> Result<Self> {
        if header.schema_version != GRAPH_SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported graph schema version {}",
                header.schema_version
            )));
        }
        let n = header.n;
        let mut m = SquareMatrix::zeros(n);
        for row in csv::Reader::from_reader(r).deserialize() {
            let e: Edge = row?;
            if e.i >= n || e.j >= n {
                return Err(Error::invalid(format!("edge ({},{}) out of range for n = {n}", e.i, e.j)));
            }
            if e.i == e.j {
                return Err(Error::invalid(format!("edge list has a loop at node {}", e.i)));
            }
            m.set(e.i, e.j, e.weight);
            m.set(e.j, e.i, e.weight);
        }
        let mut g = Self::new(m, header.kind)?;
        g.seed = header.seed;
        Ok(g)
    }
}

/// JSON header accompanying an edge-list CSV. The graph kind is flattened
/// into the header, so Bernoulli graphs carry their `q_n` at top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphHeader {
    pub schema_version: u32,
    pub n: usize,
    #[serde(flatten)]
    pub kind: GraphKind,
    pub seed: Option<u64>,
    pub edges_file: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMode {
    #[default]
    Equispaced,
    UniformOrderStatistics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphConfig {
    pub n: usize,
    pub q_n: f64,
    pub seed: u64,
    #[serde(default)]
    pub node_mode: NodeMode,
}

impl RandomGraphConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("random graph needs n >= 2"));
        }
        if !(self.q_n.is_finite() && self.q_n > 0.0) {
            return Err(Error::invalid(format!("q_n = {} must be finite and > 0", self.q_n)));
        }
        Ok(())
    }
}

fn zero_diagonal(m: &mut SquareMatrix) {
    for i in 0..m.n() {
        m.set(i, i, 0.0);
    }
}

/// Cell-averaged kernel on the equispaced `n`-partition.
pub fn deterministic_weighted(kernel: &Graphon, n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid("graph needs n >= 2"));
    }
    let mut m = project_kernel(kernel, &Partition::equispaced(n)?)?;
    zero_diagonal(&mut m);
    WeightedGraph::new(m, GraphKind::WeightedAvg)
}

/// `{0,1}` graph joining cells that meet the closed support of `kernel`.
/// The kernel must carry a support descriptor.
pub fn simple_graph(kernel: &Graphon, n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid("graph needs n >= 2"));
    }
    let proj = project_kernel_simple(kernel, &Partition::equispaced(n)?)?;
    if !proj.exact {
        return Err(Error::UnsupportedKernel(
            "simple graphs need a kernel with a support descriptor".into(),
        ));
    }
    let mut m = proj.matrix;
    zero_diagonal(&mut m);
    WeightedGraph::new(m, GraphKind::Simple01)
}

/// Node partition for the random model: equispaced, or the order
/// statistics of `n` uniform draws with breakpoints
/// `{0, X_(1), …, X_(n-1), 1}` (the last cell absorbs `]X_(n), 1]`).
pub fn sample_nodes(cfg: &RandomGraphConfig) -> Result<Partition> {
    cfg.validate()?;
    match cfg.node_mode {
        NodeMode::Equispaced => Partition::equispaced(cfg.n),
        NodeMode::UniformOrderStatistics => {
            let mut rng = rng::stream(cfg.seed, "nodes", 0, 0);
            loop {
                let mut xs: Vec<f64> = (0..cfg.n).map(|_| rng.random::<f64>()).collect();
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut bps = Vec::with_capacity(cfg.n + 1);
                bps.push(0.0);
                bps.extend_from_slice(&xs[..cfg.n - 1]);
                bps.push(1.0);
                // ties have probability ~2^-53; redraw deterministically
                if let Ok(p) = Partition::from_breakpoints(bps) {
                    return Ok(p);
                }
            }
        }
    }
}

/// `Ŵ_ij = min(cell average of K, 1/q_n)` with zero diagonal.
pub fn wedge_weights(kernel: &Graphon, partition: &Partition, q_n: f64) -> Result<SquareMatrix> {
    if !(q_n.is_finite() && q_n > 0.0) {
        return Err(Error::invalid(format!("q_n = {q_n} must be finite and > 0")));
    }
    let cap = 1.0 / q_n;
    let mut m = project_kernel(kernel, partition)?.map(|v| v.min(cap));
    zero_diagonal(&mut m);
    Ok(m)
}

/// Independent Bernoulli edges: for `i < j`, `Λ_ij = 1/q_n` with
/// probability `q_n·Ŵ_ij`, mirrored to `j > i`. Row `i` draws from the
/// named stream `("edges", i)` so the result does not depend on thread
/// scheduling.
pub fn bernoulli_graph(wedge: &SquareMatrix, q_n: f64, seed: u64, exec: Execution) -> Result<WeightedGraph> {
    if !(q_n.is_finite() && q_n > 0.0) {
        return Err(Error::invalid(format!("q_n = {q_n} must be finite and > 0")));
    }
    let n = wedge.n();
    let value = 1.0 / q_n;
    let mut data = vec![0.0; n * n];
    exec.for_each_chunk_mut(&mut data, n.max(1), |i, row| {
        let mut rng = rng::stream(seed, "edges", i as u64, 0);
        for (j, slot) in row.iter_mut().enumerate().skip(i + 1) {
            let p = (q_n * wedge.get(i, j)).clamp(0.0, 1.0);
            if rng.random::<f64>() < p {
                *slot = value;
            }
        }
    });
    let mut m = SquareMatrix::from_vec(n, data)?;
    for i in 0..n {
        for j in i + 1..n {
            let v = m.get(i, j);
            m.set(j, i, v);
        }
    }
    let mut g = WeightedGraph::new(m, GraphKind::BernoulliScaled { q_n })?;
    g.seed = Some(seed);
    Ok(g)
}

/// `K`-random inhomogeneous graph `G_{q_n}(n, K)`.
pub fn sample_inhomogeneous(kernel: &Graphon, cfg: &RandomGraphConfig) -> Result<WeightedGraph> {
    let partition = sample_nodes(cfg)?;
    let wedge = wedge_weights(kernel, &partition, cfg.q_n)?;
    bernoulli_graph(&wedge, cfg.q_n, cfg.seed, Execution::default())
}

/// Weights `exp(-|x_i - x_j| / scale)` when `|x_i - x_j| <= delta`, else 0.
pub fn coordinate_graph(coords: &[Vec<f64>], delta: f64, scale: f64) -> Result<WeightedGraph> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("delta = {delta} must be finite and > 0")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!("scale = {scale} must be finite and > 0")));
    }
    let dim = coords.first().map_or(0, Vec::len);
    for (k, c) in coords.iter().enumerate() {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("coordinates of point {k} are not finite")));
        }
    }
    let n = coords.len();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = coords[i]
                .iter()
                .zip(&coords[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d <= delta {
                let w = (-d / scale).exp();
                m.set(i, j, w);
                m.set(j, i, w);
            }
        }
    }
    WeightedGraph::new(m, GraphKind::Coordinate { delta })
}
