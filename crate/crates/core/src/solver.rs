//! Accelerated proximal-gradient solver on the dual of
//!
//! ```text
//! min_u  1/(2λn) ‖u - g‖² + 1/(2n²p) Σ K_ij |u_j - u_i|^p
//! ```
//!
//! Multiplying by `λn` gives `½‖u - g‖² + (λ_n/p)‖∇u‖_p^p` with
//! `λ_n = λ/(2n)`. The dual is `min_V ½‖g - div V‖² + Σ F*(V_ij)`, solved by
//!
//! ```text
//! W^k     = V^k + (k-1)/(k+b) (V^k - V^{k-1})
//! V^{k+1} = prox_{γF*}(W^k + γ ∇(g - div W^k))
//! u^{k+1} = g - div V^{k+1}
//! ```
//!
//! starting from `V⁰ = V¹ = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;
use crate::operators::{check_p, energy_total, DualField, EnergyBreakdown, GradientWeights};
use crate::prox::{conjugate_exponent, prox_scalar, ProxParams};
use crate::{Error, Execution, Result, SquareMatrix};

/// Relative tolerance of the power iteration behind the automatic step.
const POWER_TOL: f64 = 1e-7;
/// Safety factor on the power-iteration estimate of `‖∇‖²`.
const POWER_INFLATION: f64 = 1.01;
/// Iterates larger than this multiple of `max(1, ‖g‖)` count as divergence.
const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSize {
    /// `γ = min(1/L, 1/√L)` with `L` an estimate of `‖∇‖²`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub p: f64,
    pub lambda: f64,
    pub step: StepSize,
    /// FISTA inertia parameter `b > 2`.
    pub inertia: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub record_history: bool,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            lambda: 1.0,
            step: StepSize::Auto,
            inertia: 3.0,
            max_iter: 5000,
            tol: 1e-9,
            record_history: false,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(p: f64, lambda: f64) -> Self {
        Self {
            p,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid(format!("lambda = {} must be > 0", self.lambda)));
        }
        if let StepSize::Fixed(g) = self.step {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid(format!("step gamma = {g} must be > 0")));
            }
        }
        if !(self.inertia.is_finite() && self.inertia > 2.0) {
            return Err(Error::invalid(format!("inertia b = {} must be > 2", self.inertia)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::invalid(format!("tol = {} must be >= 0", self.tol)));
        }
        Ok(())
    }

    /// Solver penalty `λ_n = λ/(2n)`.
    pub fn lambda_n(&self, n: usize) -> f64 {
        self.lambda / (2.0 * n as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u_star: Vec<f64>,
    pub v_star: DualField,
    /// Number of dual updates performed.
    pub iterations: usize,
    pub gamma: f64,
    /// Value of `‖∇‖²` the automatic step was derived from.
    pub lipschitz: f64,
    pub converged: bool,
    /// Last relative primal change.
    pub final_residual: f64,
    pub energy: EnergyBreakdown,
    /// `‖u^{k+1} - u^k‖` per iteration.
    pub primal_history: Option<Vec<f64>>,
    /// `E(u^{k+1})` per iteration.
    pub energy_history: Option<Vec<f64>>,
}

pub fn solve(graph: &WeightedGraph, g: &[f64], cfg: &SolverConfig) -> Result<SolveResult> {
    solve_observed(graph, g, cfg, |_, _| {})
}

/// Like [`solve`], calling `observer(k, u^k)` for every primal iterate,
/// starting with `u¹ = g`.
pub fn solve_observed<F>(graph: &WeightedGraph, g: &[f64], cfg: &SolverConfig, mut observer: F) -> Result<SolveResult>
where
    F: FnMut(usize, &[f64]),
{
    cfg.validate()?;
    let n = graph.n();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("data vector has non-finite entries"));
    }
    let weights = GradientWeights::new(graph, cfg.p)?;
    let lambda_n = cfg.lambda_n(n);
    observer(1, g);

    if !graph.has_edges() {
        let energy = energy_total(graph, g, g, cfg.lambda, cfg.p)?;
        return Ok(SolveResult {
            u_star: g.to_vec(),
            v_star: DualField::zeros(n),
            iterations: 1,
            gamma: match cfg.step {
                StepSize::Fixed(gm) => gm,
                StepSize::Auto => 1.0,
            },
            lipschitz: 0.0,
            converged: true,
            final_residual: 0.0,
            energy,
            primal_history: cfg.record_history.then(|| vec![0.0]),
            energy_history: cfg.record_history.then(|| vec![energy.total]),
        });
    }

    let lipschitz = (POWER_INFLATION * weights.norm_sq(POWER_TOL, cfg.execution)).min(weights.norm_sq_bound());
    let gamma = match cfg.step {
        StepSize::Fixed(gm) => gm,
        StepSize::Auto => (1.0 / lipschitz).min(1.0 / lipschitz.sqrt()),
    };
    let params = ProxParams::new(conjugate_exponent(cfg.p)?, gamma, lambda_n)?;

    let w = weights.matrix().as_slice();
    let mut v = vec![0.0; n * n];
    let mut v_prev = vec![0.0; n * n];
    let mut u = g.to_vec();
    let mut u_prev = g.to_vec();
    let mut u_next = vec![0.0; n];
    let mut z = vec![0.0; n];
    let g_norm = norm(g).max(1.0);

    let mut primal_history = cfg.record_history.then(Vec::new);
    let mut energy_history = cfg.record_history.then(Vec::new);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    for k in 1..=cfg.max_iter {
        let beta = (k as f64 - 1.0) / (k as f64 + cfg.inertia);
        // g - div W^k, using linearity of div
        for i in 0..n {
            z[i] = (1.0 + beta) * u[i] - beta * u_prev[i];
        }
        // V^{k+1} overwrites V^{k-1} in place
        {
            let (v_cur, z) = (&v, &z);
            cfg.execution.for_each_row_with(&mut v_prev, n, &mut u_next, |i, row, ui| {
                let wr = &w[i * n..(i + 1) * n];
                let vr = &v_cur[i * n..(i + 1) * n];
                let zi = z[i];
                let mut acc = 0.0;
                for j in 0..n {
                    let ext = vr[j] + beta * (vr[j] - row[j]);
                    let a = prox_scalar(ext + gamma * wr[j] * (z[j] - zi), &params);
                    row[j] = a;
                    acc += wr[j] * a;
                }
                // V stays antisymmetric, so (div V)_i = -2 Σ_j w_ij V_ij
                *ui = g[i] + 2.0 * acc;
            });
        }
        std::mem::swap(&mut v, &mut v_prev);
        iterations = k;

        let mut diff = 0.0;
        let mut size = 0.0;
        let mut next_size = 0.0;
        for i in 0..n {
            let d = u_next[i] - u[i];
            diff += d * d;
            size += u[i] * u[i];
            next_size += u_next[i] * u_next[i];
        }
        if !next_size.is_finite() || next_size.sqrt() > BLOWUP * g_norm {
            return Err(Error::Divergence { gamma, iteration: k });
        }
        let diff = diff.sqrt();
        residual = diff / size.sqrt().max(1.0);

        std::mem::swap(&mut u_prev, &mut u);
        std::mem::swap(&mut u, &mut u_next);
        observer(k + 1, &u);

        if let Some(h) = primal_history.as_mut() {
            h.push(diff);
        }
        if let Some(h) = energy_history.as_mut() {
            let e = energy_total(graph, &u, g, cfg.lambda, cfg.p)?.total;
            if !e.is_finite() {
                return Err(Error::Divergence { gamma, iteration: k });
            }
            h.push(e);
        }
        if residual <= cfg.tol {
            converged = true;
            break;
        }
    }

    let energy = energy_total(graph, &u, g, cfg.lambda, cfg.p)?;
    if !energy.total.is_finite() {
        return Err(Error::Divergence {
            gamma,
            iteration: iterations,
        });
    }
    Ok(SolveResult {
        u_star: u,
        v_star: DualField(SquareMatrix::from_vec(n, v)?),
        iterations,
        gamma,
        lipschitz,
        converged,
        final_residual: residual,
        energy,
        primal_history,
        energy_history,
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Exact minimiser for `p = 2`: solves `(I + (λ/n) D) u = g` with
/// `(D u)_i = Σ_j K_ij (u_i - u_j)` by Cholesky factorisation.
pub fn solve_p2_direct(graph: &WeightedGraph, g: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = graph.n();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda = {lambda} must be > 0")));
    }
    let c = lambda / n as f64;
    let k = graph.weights();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut deg = 0.0;
        for j in 0..n {
            if i != j {
                a[(i, j)] = -c * k.get(i, j);
                deg += k.get(i, j);
            }
        }
        a[(i, i)] = 1.0 + c * deg;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Degenerate("p = 2 system is not positive definite".into()))?;
    let u = chol.solve(&DVector::from_column_slice(g));
    Ok(u.iter().copied().collect())
}

/// `P(u) + D(V) - ½‖g‖²` for the scaled primal
/// `P(u) = ½‖u - g‖² + (λ_n/p)‖∇u‖_p^p` and the dual
/// `D(V) = ½‖g - div V‖² + Σ (λ_n/q)|V_ij/λ_n|^q`. Zero exactly at a
/// primal-dual optimal pair; `+∞` when `V` leaves the box for `p = 1`.
pub fn duality_gap(graph: &WeightedGraph, g: &[f64], res: &SolveResult, cfg: &SolverConfig) -> Result<f64> {
    let n = graph.n();
    let lambda_n = cfg.lambda_n(n);
    let weights = GradientWeights::new(graph, cfg.p)?;
    let primal = cfg.lambda * n as f64 * energy_total(graph, &res.u_star, g, cfg.lambda, cfg.p)?.total;
    let div = weights.divergence(&res.v_star)?;
    let smooth: f64 = 0.5 * g.iter().zip(&div).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let q = conjugate_exponent(cfg.p)?;
    let mut conj = 0.0;
    for &v in res.v_star.matrix().as_slice() {
        if q.is_infinite() {
            if v.abs() > lambda_n * (1.0 + 1e-12) {
                return Ok(f64::INFINITY);
            }
        } else {
            conj += lambda_n / q * (v / lambda_n).abs().powf(q);
        }
    }
    let half_g: f64 = 0.5 * g.iter().map(|x| x * x).sum::<f64>();
    Ok(primal + smooth + conj - half_g)
}

/// Tail analysis of `k ‖u^k - u*‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    /// `k ‖u^k - u*‖` for `k = 1, 2, …`.
    pub scaled: Vec<f64>,
    /// Iterates used (those with error above the floor).
    pub resolved: usize,
    /// Maxima of four consecutive blocks covering the last quartile.
    pub block_maxima: Vec<f64>,
    pub non_increasing: bool,
}

/// Number of blocks the last quartile is split into.
const TAIL_BLOCKS: usize = 4;
/// Allowed growth between consecutive block maxima.
const TAIL_SLACK: f64 = 0.10;

/// `errors[k-1] = ‖u^k - u*‖`. Errors at or below `floor` (the accuracy
/// of the reference) are not resolved and end the analysed sequence. The
/// tail passes when no block maximum of the last quartile exceeds an
/// earlier one by more than 10%.
pub fn convergence_rate_check(errors: &[f64], floor: f64) -> Result<RateCheck> {
    if errors.is_empty() {
        return Err(Error::invalid("convergence history is absent"));
    }
    if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(Error::invalid("convergence history has invalid entries"));
    }
    let scaled: Vec<f64> = errors
        .iter()
        .enumerate()
        .map(|(i, e)| (i + 1) as f64 * e)
        .collect();
    let resolved = errors.iter().position(|e| *e <= floor).unwrap_or(errors.len());
    let tail = &scaled[resolved - resolved / 4..resolved];
    let block_maxima: Vec<f64> = if tail.len() < TAIL_BLOCKS {
        tail.to_vec()
    } else {
        let len = tail.len() / TAIL_BLOCKS;
        let skip = tail.len() - len * TAIL_BLOCKS;
        tail[skip..]
            .chunks(len)
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .collect()
    };
    let non_increasing = block_maxima
        .iter()
        .enumerate()
        .all(|(j, m)| block_maxima[..j].iter().all(|prev| *m <= (1.0 + TAIL_SLACK) * prev));
    Ok(RateCheck {
        scaled,
        resolved,
        block_maxima,
        non_increasing,
    })
}

/// Iterate errors `‖u^k - u*‖` of a run against `reference`.
pub fn error_history(graph: &WeightedGraph, g: &[f64], cfg: &SolverConfig, reference: &[f64]) -> Result<Vec<f64>> {
    if reference.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: reference.len(),
        });
    }
    let mut errors = Vec::new();
    solve_observed(graph, g, cfg, |_, u| {
        errors.push(
            u.iter()
                .zip(reference)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    })?;
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::operators::energy_reg;

    fn pair() -> WeightedGraph {
        WeightedGraph::new(SquareMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 }), GraphKind::WeightedAvg).unwrap()
    }

    fn tight(p: f64, lambda: f64) -> SolverConfig {
        SolverConfig {
            tol: 1e-13,
            max_iter: 100_000,
            ..SolverConfig::new(p, lambda)
        }
    }

    #[test]
    fn two_node_p2() {
        let r = solve(&pair(), &[0.0, 1.0], &tight(2.0, 1.0)).unwrap();
        assert!((r.u_star[0] - 0.25).abs() < 1e-9 && (r.u_star[1] - 0.75).abs() < 1e-9, "{:?}", r.u_star);
        let d = solve_p2_direct(&pair(), &[0.0, 1.0], 1.0).unwrap();
        assert!((d[0] - 0.25).abs() < 1e-14 && (d[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn two_node_p1() {
        let r = solve(&pair(), &[0.0, 1.0], &tight(1.0, 1.0)).unwrap();
        assert!((r.u_star[0] - 0.5).abs() < 1e-9 && (r.u_star[1] - 0.5).abs() < 1e-9, "{:?}", r.u_star);
        // 1-D reduction over the difference d = u2 - u1 with u1 + u2 = 1
        let f = |d: f64| (1.0 - d) * (1.0 - d) / 8.0 + d.abs() / 4.0;
        let best = (0..=200_000)
            .map(|k| -1.0 + 2.0 * k as f64 / 200_000.0)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        assert!(best.abs() < 1e-5);
    }

    #[test]
    fn zero_graph_returns_data() {
        let g = WeightedGraph::new(SquareMatrix::zeros(4), GraphKind::WeightedAvg).unwrap();
        let data = [1.0, -2.0, 0.5, 3.0];
        let r = solve(&g, &data, &SolverConfig::default()).unwrap();
        assert_eq!(r.u_star, data);
        assert_eq!(r.iterations, 1);
        assert_eq!(solve_p2_direct(&g, &data, 2.0).unwrap(), data);
        let errs = error_history(&g, &data, &SolverConfig::default(), &data).unwrap();
        assert!(errs.iter().all(|e| *e == 0.0));
        assert!(convergence_rate_check(&errs, 0.0).unwrap().non_increasing);
    }

    #[test]
    fn forced_large_step_diverges() {
        let err = solve(
            &pair(),
            &[0.0, 1.0],
            &SolverConfig {
                step: StepSize::Fixed(50.0),
                ..SolverConfig::new(2.0, 1.0)
            },
        )
        .unwrap_err();
        match err {
            Error::Divergence { gamma, .. } => assert_eq!(gamma, 50.0),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn rejects_invalid_config() {
        for cfg in [
            SolverConfig::new(0.5, 1.0),
            SolverConfig::new(1.0, 0.0),
            SolverConfig {
                inertia: 2.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                step: StepSize::Fixed(-1.0),
                ..SolverConfig::default()
            },
        ] {
            assert!(solve(&pair(), &[0.0, 1.0], &cfg).is_err());
        }
        assert!(solve(&pair(), &[0.0], &SolverConfig::default()).is_err());
        assert!(convergence_rate_check(&[], 0.0).is_err());
    }

    #[test]
    fn direct_solution_has_zero_gradient() {
        let n = 12;
        let k = SquareMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) });
        let graph = WeightedGraph::new(k.clone(), GraphKind::WeightedAvg).unwrap();
        let g: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let lambda = 3.0;
        let u = solve_p2_direct(&graph, &g, lambda).unwrap();
        let nf = n as f64;
        for i in 0..n {
            let d: f64 = (0..n).map(|j| k.get(i, j) * (u[i] - u[j])).sum();
            let grad = (u[i] - g[i]) / (lambda * nf) + d / (nf * nf);
            assert!(grad.abs() < 1e-10);
        }
        let r = solve(&graph, &g, &tight(2.0, lambda)).unwrap();
        let dist = r.u_star.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dist < 1e-9, "{dist}");
        let gap = duality_gap(&graph, &g, &r, &tight(2.0, lambda)).unwrap();
        assert!(gap.abs() < 1e-9, "{gap}");
        // regularizer bound and mean preservation
        let fid0 = g.iter().map(|x| x * x).sum::<f64>() / (2.0 * lambda * nf);
        assert!(energy_reg(&graph, &r.u_star, 2.0).unwrap() <= fid0 + 1e-9);
        let (su, sg): (f64, f64) = (r.u_star.iter().sum(), g.iter().sum());
        assert!((su - sg).abs() < 1e-9);
    }

    #[test]
    fn histories_and_modes() {
        let n = 30;
        let k = SquareMatrix::from_fn(n, |i, j| if i != j && (i as isize - j as isize).abs() < 6 { 1.0 } else { 0.0 });
        let graph = WeightedGraph::new(k, GraphKind::WeightedAvg).unwrap();
        let g: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { 3.0 } + 0.3 * (i as f64 * 1.3).sin()).collect();
        let cfg = SolverConfig {
            record_history: true,
            max_iter: 400,
            ..SolverConfig::new(1.5, 2.0)
        };
        let r = solve(&graph, &g, &cfg).unwrap();
        let ph = r.primal_history.as_ref().unwrap();
        let eh = r.energy_history.as_ref().unwrap();
        assert_eq!(ph.len(), r.iterations);
        assert_eq!(eh.len(), r.iterations);
        assert!((eh.last().unwrap() - r.energy.total).abs() < 1e-15);
        let seq = solve(
            &graph,
            &g,
            &SolverConfig {
                execution: Execution::Sequential,
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(seq.u_star, r.u_star);
        assert_eq!(seq.v_star, r.v_star);
        // the dual iterate stays exactly antisymmetric
        let v = r.v_star.matrix();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(v.get(i, j), -v.get(j, i));
            }
        }
    }

    #[test]
    fn rate_check_on_synthetic_sequences() {
        let decaying: Vec<f64> = (1..=400).map(|k| 1.0 / (k as f64).powf(1.5)).collect();
        let r = convergence_rate_check(&decaying, 0.0).unwrap();
        assert!(r.non_increasing);
        assert_eq!(r.block_maxima.len(), 4);
        let slow: Vec<f64> = (1..=400).map(|k| 1.0 / (k as f64).sqrt()).collect();
        assert!(!convergence_rate_check(&slow, 0.0).unwrap().non_increasing);
        let floored: Vec<f64> = (1..=400).map(|k| (1.0 / (k as f64).sqrt()).max(0.08)).collect();
        let r = convergence_rate_check(&floored, 0.08).unwrap();
        assert_eq!(r.resolved, 156);
    }
}
