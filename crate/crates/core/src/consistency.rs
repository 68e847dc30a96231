//! Discrete-to-continuum consistency experiments.
//!
//! A reference `I_N u_N*` is computed once from noisy data `g_N` on the
//! equispaced `N`-grid. Each replication draws `n` of the `N` nodes without
//! replacement, keeps their data in sorted order on the equispaced
//! `n`-partition, solves there with the same `λ`, and measures
//! `‖I_n u_n* - I_N u_N*‖²_{L²}` exactly. Rates are fitted by least squares
//! on `(log n, log mean err²)`.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::graph::{
    bernoulli_graph, deterministic_weighted, sample_nodes, simple_graph, wedge_weights, NodeMode, RandomGraphConfig,
    WeightedGraph,
};
use crate::graphon::{
    inject, l2_distance_pwc, project_kernel, project_signal, ContinuumSignal, Graphon, KernelForm, KernelSpec,
    Partition, PiecewiseConstantFn, SignalSpec,
};
use crate::solver::{solve, SolverConfig};
use crate::{rng, Error, Execution, Result, SquareMatrix};

/// Half-width of the band around the theoretical exponent accepted as
/// consistent.
pub const VERDICT_BAND: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphMode {
    DeterministicWeighted,
    Simple,
    Random { q_n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Reference size `N`.
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub lambda: f64,
    pub p: f64,
    pub kernel: KernelSpec,
    pub signal: SignalSpec,
    pub noise_sigma: f64,
    pub graph_mode: GraphMode,
    pub seed: u64,
    /// Solver tolerance for the subsampled problems.
    pub tol: f64,
    /// Solver tolerance for the reference problem.
    pub reference_tol: f64,
    pub max_iter: usize,
    pub reference_max_iter: usize,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            big_n: 1000,
            n_grid: vec![100, 125, 160, 200, 250],
            replications: 20,
            lambda: 5.0,
            p: 1.0,
            kernel: KernelSpec::Band { delta: 0.1 },
            signal: SignalSpec::default(),
            noise_sigma: 0.5,
            graph_mode: GraphMode::DeterministicWeighted,
            seed: 0,
            tol: 1e-7,
            reference_tol: 1e-11,
            max_iter: 5000,
            reference_max_iter: 20_000,
            execution: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.big_n < 2 {
            return Err(Error::invalid("reference size N must be >= 2"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid is empty"));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 2 || n > self.big_n) {
            return Err(Error::invalid(format!("grid size n = {n} must lie in [2, N = {}]", self.big_n)));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be >= 1"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid(format!("noise_sigma = {} must be >= 0", self.noise_sigma)));
        }
        if let GraphMode::Random { q_n } = self.graph_mode {
            if !(q_n.is_finite() && q_n > 0.0) {
                return Err(Error::invalid(format!("q_n = {q_n} must be finite and > 0")));
            }
        }
        self.solver(self.tol, self.max_iter).validate()?;
        self.solver(self.reference_tol, self.reference_max_iter).validate()
    }

    fn solver(&self, tol: f64, max_iter: usize) -> SolverConfig {
        SolverConfig {
            tol,
            max_iter,
            execution: self.execution,
            ..SolverConfig::new(self.p, self.lambda)
        }
    }

    /// Exponent of `n` expected for the mean squared error. The random
    /// model loses a `√log n` factor, linearised at the geometric mean of
    /// the grid.
    pub fn theoretical_exponent(&self) -> f64 {
        match self.graph_mode {
            GraphMode::DeterministicWeighted | GraphMode::Simple => -0.5,
            GraphMode::Random { .. } => {
                let mean_log = self.n_grid.iter().map(|&n| (n as f64).ln()).sum::<f64>() / self.n_grid.len() as f64;
                -0.5 + 0.5 / mean_log
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reference {
    pub solution: PiecewiseConstantFn,
    pub data: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Graph on the equispaced `n`-grid used by every mode except for the
/// Bernoulli draw of the random mode.
fn base_graph(kernel: &Graphon, mode: GraphMode, n: usize) -> Result<WeightedGraph> {
    match mode {
        GraphMode::DeterministicWeighted | GraphMode::Random { .. } => deterministic_weighted(kernel, n),
        GraphMode::Simple => simple_graph(kernel, n),
    }
}

/// Noisy data `g_N` and the reference solve. The random mode is compared
/// against the deterministic weighted graph, its expectation.
pub fn make_reference(cfg: &ExperimentConfig) -> Result<Reference> {
    cfg.validate()?;
    let big_n = cfg.big_n;
    let signal = ContinuumSignal::from_spec(&cfg.signal)?;
    let partition = Partition::equispaced(big_n)?;
    let mut data = project_signal(&signal, &partition)?;
    if cfg.noise_sigma > 0.0 {
        let noise = gaussian_noise(cfg.seed, "noise", big_n, cfg.noise_sigma)?;
        data.iter_mut().zip(noise).for_each(|(x, e)| *x += e);
    }
    let kernel = Graphon::from_spec(&cfg.kernel)?;
    let graph = base_graph(&kernel, cfg.graph_mode, big_n)?;
    let res = solve(&graph, &data, &cfg.solver(cfg.reference_tol, cfg.reference_max_iter))?;
    Ok(Reference {
        solution: inject(&res.u_star, &partition)?,
        data,
        iterations: res.iterations,
        converged: res.converged,
    })
}

/// Per-`n` graph ingredients shared by all replications.
#[derive(Debug, Clone)]
enum Prepared {
    Fixed(WeightedGraph),
    Wedge(SquareMatrix, f64),
}

fn prepare(kernel: &Graphon, mode: GraphMode, n: usize) -> Result<Prepared> {
    match mode {
        GraphMode::Random { q_n } => Ok(Prepared::Wedge(
            wedge_weights(kernel, &Partition::equispaced(n)?, q_n)?,
            q_n,
        )),
        _ => Ok(Prepared::Fixed(base_graph(kernel, mode, n)?)),
    }
}

fn replicate_seed(seed: u64, n: usize, rep: usize) -> u64 {
    rng::derive_seed(seed, "replicate", n as u64, rep as u64)
}

fn replication_error(
    cfg: &ExperimentConfig,
    reference: &Reference,
    prepared: &Prepared,
    indices: &[usize],
    edge_seed: u64,
    exec: Execution,
) -> Result<f64> {
    let n = indices.len();
    if n < 2 {
        return Err(Error::invalid("a replication needs n >= 2 nodes"));
    }
    let mut idx = indices.to_vec();
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[0] == w[1]) || idx[n - 1] >= reference.data.len() {
        return Err(Error::invalid("sampled node indices must be distinct and < N"));
    }
    let g: Vec<f64> = idx.iter().map(|&i| reference.data[i]).collect();
    let sampled;
    let graph = match prepared {
        Prepared::Fixed(graph) => graph,
        Prepared::Wedge(wedge, q_n) => {
            sampled = bernoulli_graph(wedge, *q_n, edge_seed, exec)?;
            &sampled
        }
    };
    let solver = SolverConfig {
        execution: exec,
        ..cfg.solver(cfg.tol, cfg.max_iter)
    };
    let res = solve(graph, &g, &solver)?;
    let u = inject(&res.u_star, &Partition::equispaced(n)?)?;
    Ok(l2_distance_pwc(&u, &reference.solution).powi(2))
}

/// Squared `L²` error of replication `rep` at size `n`.
pub fn run_replication(cfg: &ExperimentConfig, reference: &Reference, n: usize, rep: usize) -> Result<f64> {
    cfg.validate()?;
    if n < 2 || n > cfg.big_n {
        return Err(Error::invalid(format!("replication size n = {n} must lie in [2, N]")));
    }
    let kernel = Graphon::from_spec(&cfg.kernel)?;
    let prepared = prepare(&kernel, cfg.graph_mode, n)?;
    let indices = draw_indices(cfg, n, rep);
    replication_error(cfg, reference, &prepared, &indices, replicate_seed(cfg.seed, n, rep), cfg.execution)
}

/// Same as [`run_replication`] with explicitly chosen node indices.
pub fn run_replication_on(
    cfg: &ExperimentConfig,
    reference: &Reference,
    indices: &[usize],
    edge_seed: u64,
) -> Result<f64> {
    cfg.validate()?;
    let kernel = Graphon::from_spec(&cfg.kernel)?;
    let prepared = prepare(&kernel, cfg.graph_mode, indices.len().max(2))?;
    replication_error(cfg, reference, &prepared, indices, edge_seed, cfg.execution)
}

/// `n` distinct node indices of `0..N` for replication `rep`.
pub fn draw_indices(cfg: &ExperimentConfig, n: usize, rep: usize) -> Vec<usize> {
    let mut r = rng::stream(cfg.seed, "replicate", n as u64, rep as u64);
    index::sample(&mut r, cfg.big_n, n).into_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Twice the standard error of the slope.
    pub half_width: f64,
}

/// Least squares fit of `log err² = intercept + slope · log n`.
pub fn fit_rate(ns: &[usize], mean_sq_errors: &[f64]) -> Result<RateFit> {
    if ns.len() != mean_sq_errors.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            got: mean_sq_errors.len(),
        });
    }
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::invalid("rate fit needs at least 3 distinct n"));
    }
    if distinct[0] == 0 {
        return Err(Error::invalid("rate fit needs n > 0"));
    }
    if let Some(e) = mean_sq_errors.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::invalid(format!("rate fit needs positive errors, got {e}")));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = mean_sq_errors.iter().map(|e| e.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let se = (rss / (m - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        half_width: 2.0 * se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    TooSlow,
    TooFast,
}

impl Verdict {
    pub fn classify(slope: f64, theory: f64) -> Self {
        if slope > theory + VERDICT_BAND {
            Verdict::TooSlow
        } else if slope < theory - VERDICT_BAND {
            Verdict::TooFast
        } else {
            Verdict::Consistent
        }
    }
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub schema_version: u32,
    pub ns: Vec<usize>,
    pub mean_sq_error: Vec<f64>,
    /// Standard deviation of the squared errors across replications.
    pub std: Vec<f64>,
    /// Standard deviation of the mean (`std / √replications`).
    pub std_of_mean: Vec<f64>,
    /// Squared errors, `errors[i][r]` for `ns[i]` and replication `r`.
    pub errors: Vec<Vec<f64>>,
    pub slope: f64,
    pub intercept: f64,
    pub half_width: f64,
    pub theoretical_exponent: f64,
    pub verdict: Verdict,
    pub lambda: f64,
    pub reference_iterations: usize,
    pub reference_converged: bool,
}

impl RateReport {
    /// Mean squared errors do not increase between consecutive grid points
    /// by more than one pooled standard deviation.
    pub fn monotone_trend(&self) -> bool {
        self.mean_sq_error.windows(2).zip(self.std.windows(2)).all(|(m, s)| {
            let pooled = (0.5 * (s[0] * s[0] + s[1] * s[1])).sqrt();
            m[1] <= m[0] + pooled
        })
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    let reference = make_reference(cfg)?;
    run_experiment_with(cfg, &reference)
}

/// Replications are independent jobs with pre-assigned seeds; the outer
/// loop is parallel and each solve runs sequentially.
pub fn run_experiment_with(cfg: &ExperimentConfig, reference: &Reference) -> Result<RateReport> {
    cfg.validate()?;
    let kernel = Graphon::from_spec(&cfg.kernel)?;
    let mut ns = cfg.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut prepared = BTreeMap::new();
    for &n in &ns {
        prepared.insert(n, prepare(&kernel, cfg.graph_mode, n)?);
    }
    let jobs: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();
    let inner = if cfg.execution.is_parallel() {
        Execution::Sequential
    } else {
        cfg.execution
    };
    let results = cfg.execution.map_indices(jobs.len(), |j| {
        let (n, r) = jobs[j];
        let indices = draw_indices(cfg, n, r);
        replication_error(cfg, reference, &prepared[&n], &indices, replicate_seed(cfg.seed, n, r), inner)
    });
    let flat = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let errors: Vec<Vec<f64>> = flat.chunks(cfg.replications).map(<[f64]>::to_vec).collect();

    let reps = cfg.replications as f64;
    let mean_sq_error: Vec<f64> = errors.iter().map(|e| e.iter().sum::<f64>() / reps).collect();
    let std: Vec<f64> = errors
        .iter()
        .zip(&mean_sq_error)
        .map(|(e, m)| {
            if e.len() < 2 {
                0.0
            } else {
                (e.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps - 1.0)).sqrt()
            }
        })
        .collect();
    let std_of_mean = std.iter().map(|s| s / reps.sqrt()).collect();
    let fit = fit_rate(&ns, &mean_sq_error)?;
    if !fit.slope.is_finite() {
        return Err(Error::Degenerate("fitted slope is not finite".into()));
    }
    let theoretical_exponent = cfg.theoretical_exponent();
    Ok(RateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        ns,
        mean_sq_error,
        std,
        std_of_mean,
        errors,
        slope: fit.slope,
        intercept: fit.intercept,
        half_width: fit.half_width,
        theoretical_exponent,
        verdict: Verdict::classify(fit.slope, theoretical_exponent),
        lambda: cfg.lambda,
        reference_iterations: reference.iterations,
        reference_converged: reference.converged,
    })
}

/// `‖K - I_n K_n‖^{p'}_{L^{p'}}` on the equispaced `n`-mesh for `{0,1}`
/// valued kernels. With `a` the fraction of a cell covered by the support,
/// the cell contributes `area · (a (1-a)^{p'} + (1-a) a^{p'})`.
pub fn kernel_approx_error(kernel: &Graphon, n: usize, p_prime: f64) -> Result<f64> {
    if !(p_prime.is_finite() && p_prime >= 1.0) {
        return Err(Error::invalid(format!("exponent p' = {p_prime} must lie in [1, ∞)")));
    }
    match kernel.form() {
        KernelForm::Constant(_) => return Ok(0.0),
        KernelForm::Band { .. } => {}
        _ => {
            return Err(Error::UnsupportedKernel(
                "kernel approximation error is available for band kernels".into(),
            ))
        }
    }
    let m = project_kernel(kernel, &Partition::equispaced(n)?)?;
    let area = 1.0 / (n * n) as f64;
    Ok(m.as_slice()
        .iter()
        .map(|&a| area * (a * (1.0 - a).powf(p_prime) + (1.0 - a) * a.powf(p_prime)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub n: usize,
    pub t: f64,
    pub draws: usize,
    pub violations: usize,
    pub rate: f64,
    /// `n^{-t} + 3` binomial standard deviations at that probability.
    pub threshold: f64,
    pub within_bound: bool,
}

/// Frequency of `max spacing > t log n / n` over `draws` samples of `n`
/// uniform nodes.
pub fn spacing_violation_rate(n: usize, t: f64, draws: usize, seed: u64) -> Result<SpacingReport> {
    if draws == 0 {
        return Err(Error::invalid("draws must be positive"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("t = {t} must be > 0")));
    }
    let bound = t * (n as f64).ln() / n as f64;
    let mut violations = 0;
    for d in 0..draws {
        let cfg = RandomGraphConfig {
            n,
            q_n: 1.0,
            seed: rng::derive_seed(seed, "spacing", n as u64, d as u64),
            node_mode: NodeMode::UniformOrderStatistics,
        };
        if sample_nodes(&cfg)?.max_spacing() > bound {
            violations += 1;
        }
    }
    let p = (n as f64).powf(-t);
    let threshold = p + 3.0 * (p * (1.0 - p) / draws as f64).sqrt();
    let rate = violations as f64 / draws as f64;
    Ok(SpacingReport {
        n,
        t,
        draws,
        violations,
        rate,
        threshold,
        within_bound: rate <= threshold,
    })
}

/// Gaussian noise of standard deviation `sigma` from the stream `name`.
pub fn gaussian_noise(seed: u64, name: &str, len: usize, sigma: f64) -> Result<Vec<f64>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut r = rng::stream(seed, name, 0, 0);
    Ok((0..len).map(|_| normal.sample(&mut r)).collect())
}

/// Uniform draw helper used for synthetic oracles.
pub fn uniform_noise(seed: u64, name: &str, len: usize, amplitude: f64) -> Vec<f64> {
    let mut r = rng::stream(seed, name, 0, 0);
    (0..len).map(|_| amplitude * (2.0 * r.random::<f64>() - 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: GraphMode) -> ExperimentConfig {
        ExperimentConfig {
            big_n: 60,
            n_grid: vec![20, 30, 40],
            replications: 3,
            lambda: 1.0,
            kernel: KernelSpec::Band { delta: 0.2 },
            noise_sigma: 0.3,
            graph_mode: mode,
            seed: 11,
            tol: 1e-9,
            reference_tol: 1e-9,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn fit_rate_examples() {
        let ns = [100, 200, 400];
        let f = fit_rate(&ns, &ns.map(|n| (n as f64).powf(-0.5))).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && f.half_width < 1e-10);
        let f = fit_rate(&ns, &[0.3; 3]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        let ns = [100, 150, 200, 300, 400, 600];
        let noise = uniform_noise(3, "fit", ns.len(), 0.01);
        let errs: Vec<f64> = ns.iter().zip(&noise).map(|(&n, e)| (1.0 + e) / n as f64).collect();
        let f = fit_rate(&ns, &errs).unwrap();
        assert!((f.slope + 1.0).abs() < 0.1);
        assert!(fit_rate(&[1, 2], &[1.0, 1.0]).is_err());
        assert!(fit_rate(&[1, 2, 3], &[1.0, 0.0, 1.0]).is_err());
        assert!(fit_rate(&[4, 4, 4, 5], &[1.0; 4]).is_err());
    }

    #[test]
    fn verdict_band() {
        assert_eq!(Verdict::classify(-0.5, -0.5), Verdict::Consistent);
        assert_eq!(Verdict::classify(-0.1, -0.5), Verdict::TooSlow);
        assert_eq!(Verdict::classify(-0.9, -0.5), Verdict::TooFast);
    }

    #[test]
    fn noiseless_reference_without_edges_is_projection() {
        let cfg = ExperimentConfig {
            noise_sigma: 0.0,
            kernel: KernelSpec::Constant { c: 0.0 },
            ..small(GraphMode::DeterministicWeighted)
        };
        let r = make_reference(&cfg).unwrap();
        let clean = project_signal(
            &ContinuumSignal::from_spec(&cfg.signal).unwrap(),
            &Partition::equispaced(cfg.big_n).unwrap(),
        )
        .unwrap();
        assert_eq!(r.solution.values(), clean.as_slice());
    }

    #[test]
    fn full_sample_reproduces_reference() {
        let cfg = small(GraphMode::DeterministicWeighted);
        let r = make_reference(&cfg).unwrap();
        let all: Vec<usize> = (0..cfg.big_n).rev().collect();
        let e = run_replication_on(&cfg, &r, &all, 0).unwrap();
        assert!(e <= 1e-16, "{e}");
    }

    #[test]
    fn relabelling_and_full_bernoulli() {
        let cfg = small(GraphMode::DeterministicWeighted);
        let r = make_reference(&cfg).unwrap();
        let idx = draw_indices(&cfg, 25, 0);
        let mut shuffled = idx.clone();
        shuffled.reverse();
        shuffled.swap(0, 7);
        let a = run_replication_on(&cfg, &r, &idx, 0).unwrap();
        assert_eq!(a, run_replication_on(&cfg, &r, &shuffled, 0).unwrap());
        assert!(run_replication_on(&cfg, &r, &[3], 0).is_err());
        assert!(run_replication_on(&cfg, &r, &[3, 3, 4], 0).is_err());

        let full = |mode| ExperimentConfig {
            kernel: KernelSpec::Constant { c: 1.0 },
            ..small(mode)
        };
        let det = full(GraphMode::DeterministicWeighted);
        let rnd = full(GraphMode::Random { q_n: 1.0 });
        let rd = make_reference(&det).unwrap();
        for rep in 0..3 {
            assert_eq!(
                run_replication(&det, &rd, 30, rep).unwrap(),
                run_replication(&rnd, &rd, 30, rep).unwrap()
            );
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        for mode in [GraphMode::DeterministicWeighted, GraphMode::Simple, GraphMode::Random { q_n: 1.0 }] {
            let cfg = ExperimentConfig {
                replications: 1,
                ..small(mode)
            };
            let a = run_experiment(&cfg).unwrap();
            let b = run_experiment(&cfg).unwrap();
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
            assert!(a.mean_sq_error.iter().all(|m| *m >= 0.0) && a.slope.is_finite());
            let seq = run_experiment(&ExperimentConfig {
                execution: Execution::Sequential,
                ..cfg
            })
            .unwrap();
            assert_eq!(a, seq);
        }
    }

    #[test]
    fn config_validation() {
        let ok = small(GraphMode::DeterministicWeighted);
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentConfig { n_grid: vec![100], ..ok.clone() },
            ExperimentConfig { replications: 0, ..ok.clone() },
            ExperimentConfig { noise_sigma: -1.0, ..ok.clone() },
            ExperimentConfig { graph_mode: GraphMode::Random { q_n: 0.0 }, ..ok.clone() },
            ExperimentConfig { lambda: 0.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
        let json = serde_json::to_string(&ok).unwrap();
        assert!(json.contains("\"N\":60"));
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn band_kernel_error_closed_form() {
        // n = 1: a single cell covering 1 - (1-δ)² of the square
        let k = Graphon::band(0.3).unwrap();
        let a: f64 = 1.0 - 0.49;
        let want = a * (1.0 - a).powi(2) + (1.0 - a) * a * a;
        assert!((kernel_approx_error(&k, 1, 2.0).unwrap() - want).abs() < 1e-12);
        assert_eq!(kernel_approx_error(&Graphon::constant(1.0).unwrap(), 8, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn spacing_report_fields() {
        let r = spacing_violation_rate(64, 1.0, 200, 5).unwrap();
        assert_eq!(r.draws, 200);
        assert!((r.rate - r.violations as f64 / 200.0).abs() < 1e-15);
        assert!(spacing_violation_rate(64, 1.0, 0, 5).is_err());
    }
}
