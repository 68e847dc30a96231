//! Weighted nonlocal gradient, its adjoint divergence, discrete energies
//! and the operator norm that fixes the solver step.
//!
//! With `w_ij = K_ij^{1/p}`:
//!
//! * `(∇u)_ij = w_ij (u_j - u_i)`
//! * `(div V)_i = Σ_m w_mi V_mi - Σ_j w_ij V_ij`
//!
//! so that `⟨∇u, V⟩ = ⟨u, div V⟩` for the Euclidean inner products.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;
use crate::{rng, Error, Execution, Result, SquareMatrix};

/// Edge field `V ∈ R^{n×n}`, the dual variable of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualField(pub SquareMatrix);

impl DualField {
    pub fn zeros(n: usize) -> Self {
        DualField(SquareMatrix::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub fidelity: f64,
    pub regularizer: f64,
    pub total: f64,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    Ok(())
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// `K^{1/p}` for one `(graph, p)` pair, computed once.
#[derive(Debug, Clone)]
pub struct GradientWeights {
    p: f64,
    w: SquareMatrix,
}

impl GradientWeights {
    pub fn new(graph: &WeightedGraph, p: f64) -> Result<Self> {
        check_p(p)?;
        let w = if p == 1.0 {
            graph.weights().clone()
        } else {
            graph.weights().map(|k| k.powf(1.0 / p))
        };
        Ok(Self { p, w })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.w
    }

    pub fn gradient(&self, u: &[f64]) -> Result<DualField> {
        let n = self.n();
        check_len(u, n)?;
        Ok(DualField(SquareMatrix::from_fn(n, |i, j| {
            self.w.get(i, j) * (u[j] - u[i])
        })))
    }

    pub fn divergence(&self, v: &DualField) -> Result<Vec<f64>> {
        self.divergence_with(v.matrix(), Execution::Sequential)
    }

    pub(crate) fn divergence_with(&self, v: &SquareMatrix, exec: Execution) -> Result<Vec<f64>> {
        let n = self.n();
        if v.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.n(),
            });
        }
        let mut out = vec![0.0; n];
        divergence_into(&self.w, v.as_slice(), &mut out, exec);
        Ok(out)
    }

    /// `div(∇u)_i = 2 Σ_j w_ij² (u_i - u_j)` without materialising `∇u`.
    pub fn div_grad(&self, u: &[f64], exec: Execution) -> Vec<f64> {
        let w = &self.w;
        exec.map_indices(self.n(), |i| {
            let ui = u[i];
            2.0 * w
                .row(i)
                .iter()
                .zip(u)
                .map(|(wij, uj)| wij * wij * (ui - uj))
                .sum::<f64>()
        })
    }

    /// Gershgorin bound `4 max_i Σ_j K_ij^{2/p}` on `‖∇‖²`.
    pub fn norm_sq_bound(&self) -> f64 {
        (0..self.n())
            .map(|i| self.w.row(i).iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max)
            * 4.0
    }

    /// Power iteration on `div∘∇` to relative tolerance `tol`.
    pub fn norm_sq(&self, tol: f64, exec: Execution) -> f64 {
        let n = self.n();
        let bound = self.norm_sq_bound();
        if bound == 0.0 {
            return 0.0;
        }
        let mut r = rng::stream(0, "power-iteration", n as u64, 0);
        let mut x: Vec<f64> = (0..n).map(|_| r.random::<f64>() - 0.5).collect();
        normalize(&mut x);
        let mut est = 0.0;
        for _ in 0..20_000 {
            let y = self.div_grad(&x, exec);
            let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            x = y;
            if normalize(&mut x) == 0.0 {
                return 0.0;
            }
            let done = (rayleigh - est).abs() <= tol * rayleigh.abs();
            est = rayleigh;
            if done {
                break;
            }
        }
        est.min(bound)
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Column sums are accumulated per column chunk in row order so the result
/// is the same for every thread count.
pub(crate) fn divergence_into(w: &SquareMatrix, v: &[f64], out: &mut [f64], exec: Execution) {
    let n = w.n();
    let chunk = 64usize.min(n.max(1));
    exec.for_each_chunk_mut(out, chunk, |c, slot| {
        let start = c * chunk;
        let len = slot.len();
        slot.iter_mut().for_each(|s| *s = 0.0);
        for m in 0..n {
            let wr = &w.row(m)[start..start + len];
            let vr = &v[m * n + start..m * n + start + len];
            for k in 0..len {
                slot[k] += wr[k] * vr[k];
            }
        }
        for (k, s) in slot.iter_mut().enumerate() {
            let i = start + k;
            let row: f64 = w
                .row(i)
                .iter()
                .zip(&v[i * n..(i + 1) * n])
                .map(|(a, b)| a * b)
                .sum();
            *s -= row;
        }
    });
}

pub fn gradient(graph: &WeightedGraph, u: &[f64], p: f64) -> Result<DualField> {
    GradientWeights::new(graph, p)?.gradient(u)
}

pub fn divergence(graph: &WeightedGraph, v: &DualField, p: f64) -> Result<Vec<f64>> {
    GradientWeights::new(graph, p)?.divergence(v)
}

#[inline]
fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x.abs()
    } else if p == 2.0 {
        x * x
    } else {
        x.abs().powf(p)
    }
}

/// `R_n(u) = 1/(2 n² p) Σ_ij K_ij |u_j - u_i|^p`.
pub fn energy_reg(graph: &WeightedGraph, u: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    let n = graph.n();
    check_len(u, n)?;
    let rows = Execution::default().map_indices(n, |i| {
        graph
            .weights()
            .row(i)
            .iter()
            .zip(u)
            .map(|(k, uj)| k * abs_pow(uj - u[i], p))
            .sum::<f64>()
    });
    let s: f64 = rows.iter().sum();
    Ok(s / (2.0 * (n * n) as f64 * p))
}

/// `E(u) = 1/(2λn) ‖u - g‖² + R_n(u)`.
pub fn energy_total(graph: &WeightedGraph, u: &[f64], g: &[f64], lambda: f64, p: f64) -> Result<EnergyBreakdown> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda = {lambda} must be > 0")));
    }
    let n = graph.n();
    check_len(g, n)?;
    let regularizer = energy_reg(graph, u, p)?;
    let sq: f64 = u.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum();
    let fidelity = sq / (2.0 * lambda * n as f64);
    Ok(EnergyBreakdown {
        fidelity,
        regularizer,
        total: fidelity + regularizer,
    })
}

/// Estimate of `‖∇_K‖²_op`, the largest eigenvalue of `div∘∇`.
pub fn operator_norm_sq(graph: &WeightedGraph, p: f64, tol: f64) -> Result<f64> {
    Ok(GradientWeights::new(graph, p)?.norm_sq(tol, Execution::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn pair(k: f64) -> WeightedGraph {
        let mut m = SquareMatrix::zeros(2);
        m.set(0, 1, k);
        m.set(1, 0, k);
        WeightedGraph::new(m, GraphKind::WeightedAvg).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let g = pair(1.0);
        let v = gradient(&g, &[3.0, 3.0], 2.0).unwrap();
        assert!(v.matrix().as_slice().iter().all(|&x| x == 0.0));
        let v = gradient(&g, &[0.0, 1.0], 2.0).unwrap();
        assert_eq!((v.get(0, 1), v.get(1, 0)), (1.0, -1.0));
        let v = gradient(&pair(4.0), &[0.0, 1.0], 2.0).unwrap();
        assert_eq!(v.get(0, 1), 2.0);
        assert!(gradient(&g, &[0.0, 1.0], 0.5).is_err());
        assert!(gradient(&g, &[0.0], 2.0).is_err());
    }

    #[test]
    fn divergence_examples() {
        let g = pair(2.0);
        assert_eq!(divergence(&g, &DualField::zeros(2), 1.5).unwrap(), vec![0.0, 0.0]);
        let v = gradient(&g, &[1.0, 1.0], 1.5).unwrap();
        assert_eq!(divergence(&g, &v, 1.5).unwrap(), vec![0.0, 0.0]);
        assert!(divergence(&g, &DualField::zeros(3), 1.5).is_err());
    }

    #[test]
    fn energy_examples() {
        let g = pair(1.0);
        assert_eq!(energy_reg(&g, &[2.0, 2.0], 1.0).unwrap(), 0.0);
        assert!((energy_reg(&g, &[0.0, 1.0], 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((energy_reg(&g, &[0.0, 1.0], 2.0).unwrap() - 0.125).abs() < 1e-15);

        let e = energy_total(&g, &[0.5, 0.5], &[0.0, 1.0], 1.0, 1.0).unwrap();
        assert!((e.fidelity - 0.125).abs() < 1e-15);
        assert_eq!(e.regularizer, 0.0);
        assert_eq!(e.total, e.fidelity + e.regularizer);
        let e = energy_total(&g, &[0.0, 1.0], &[0.0, 1.0], 1.0, 1.0).unwrap();
        assert_eq!(e.fidelity, 0.0);
        assert!(energy_total(&g, &[0.0, 1.0], &[0.0, 1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let l = operator_norm_sq(&pair(1.0), 2.0, 1e-12).unwrap();
        assert!((l - 4.0).abs() < 1e-10, "{l}");
        let empty = WeightedGraph::new(SquareMatrix::zeros(3), GraphKind::WeightedAvg).unwrap();
        assert_eq!(operator_norm_sq(&empty, 2.0, 1e-9).unwrap(), 0.0);
        assert_eq!(GradientWeights::new(&pair(1.0), 2.0).unwrap().norm_sq_bound(), 4.0);
    }

    #[test]
    fn divergence_modes_agree() {
        let n = 150;
        let w = SquareMatrix::from_fn(n, |i, j| ((i * 7 + j * 7) % 13) as f64 / 13.0);
        let v: Vec<f64> = (0..n * n).map(|k| ((k * 31) % 17) as f64 - 8.0).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        divergence_into(&w, &v, &mut a, Execution::Sequential);
        divergence_into(&w, &v, &mut b, Execution::Parallel);
        assert_eq!(a, b);
    }
}
