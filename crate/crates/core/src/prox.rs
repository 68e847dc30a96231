//! Proximal maps of the separable dual penalty `(λ_n/q) |·/λ_n|^q`.
//!
//! For `t >= 0` and step `γ`:
//!
//! | regime        | prox(t)                                             |
//! |---------------|-----------------------------------------------------|
//! | `q = ∞`       | `min(t, λ_n)` (projection on `[-λ_n, λ_n]`)          |
//! | `q = 1`       | `max(t - γ, 0)` (soft thresholding)                 |
//! | `q = 2`       | `t / (1 + γ/λ_n)`                                   |
//! | `1 < q < ∞`   | root `α >= 0` of `α - t + γ λ_n^{1-q} α^{q-1} = 0`   |
//!
//! and the map is odd in `t`.

use serde::{Deserialize, Serialize};

use crate::operators::DualField;
use crate::{Error, Execution, Result, SquareMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    q: f64,
    gamma: f64,
    lambda_n: f64,
}

impl ProxParams {
    pub fn new(q: f64, gamma: f64, lambda_n: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::invalid(format!("prox exponent q = {q} must be >= 1")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("prox step gamma = {gamma} must be > 0")));
        }
        if !(lambda_n.is_finite() && lambda_n > 0.0) {
            return Err(Error::invalid(format!("lambda_n = {lambda_n} must be > 0")));
        }
        Ok(Self { q, gamma, lambda_n })
    }

    /// Parameters for the Hölder conjugate of the primal exponent `p`.
    pub fn for_primal_exponent(p: f64, gamma: f64, lambda_n: f64) -> Result<Self> {
        Self::new(conjugate_exponent(p)?, gamma, lambda_n)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda_n(&self) -> f64 {
        self.lambda_n
    }

    /// `φ(α) = ½(α - t)² + γ (λ_n/q) |α/λ_n|^q`, `+∞` outside the box when
    /// `q = ∞`.
    pub fn objective(&self, alpha: f64, t: f64) -> f64 {
        let quad = 0.5 * (alpha - t) * (alpha - t);
        if self.q.is_infinite() {
            if alpha.abs() <= self.lambda_n {
                quad
            } else {
                f64::INFINITY
            }
        } else {
            quad + self.gamma * self.lambda_n / self.q * (alpha / self.lambda_n).abs().powf(self.q)
        }
    }
}

/// `q` with `1/p + 1/q = 1`; `p = 1 ↦ ∞`, `p = ∞ ↦ 1`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("exponent p = {p} must be >= 1")));
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

pub fn prox_scalar(t: f64, params: &ProxParams) -> f64 {
    let a = prox_nonneg(t.abs(), params);
    if t < 0.0 {
        -a
    } else {
        a
    }
}

fn prox_nonneg(t: f64, params: &ProxParams) -> f64 {
    let ProxParams { q, gamma, lambda_n } = *params;
    if q.is_infinite() {
        t.min(lambda_n)
    } else if q == 1.0 {
        (t - gamma).max(0.0)
    } else if q == 2.0 {
        t / (1.0 + gamma / lambda_n)
    } else if t == 0.0 {
        0.0
    } else {
        lambda_n * newton_root(t / lambda_n, gamma / lambda_n, q)
    }
}

/// Root of `h(β) = β - τ + c β^{q-1}` on `[0, τ]`, the prox equation in the
/// scaled variable `β = α/λ_n` (avoids overflowing `λ_n^{1-q}`). Newton
/// from `τ/(1+c)`, falling back to bisection whenever a step leaves the
/// current bracket.
fn newton_root(tau: f64, c: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, tau);
    let mut b = tau / (1.0 + c);
    let scale = tau.max(1.0);
    for _ in 0..200 {
        let pow = b.powf(q - 2.0);
        let h = b - tau + c * pow * b;
        if h.abs() <= 1e-15 * scale {
            return b;
        }
        if h > 0.0 {
            hi = b;
        } else {
            lo = b;
        }
        let dh = 1.0 + c * (q - 1.0) * pow;
        let mut next = b - h / dh;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == b || hi - lo <= f64::EPSILON * hi {
            return next;
        }
        b = next;
    }
    b
}

/// Elementwise prox of an edge field.
pub fn prox_field(w: &DualField, params: &ProxParams) -> Result<DualField> {
    prox_field_with(w, params, Execution::default())
}

pub fn prox_field_with(w: &DualField, params: &ProxParams, exec: Execution) -> Result<DualField> {
    if w.matrix().as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("dual field has non-finite entries"));
    }
    let n = w.n();
    let src = w.matrix().as_slice();
    let mut out = vec![0.0; n * n];
    exec.for_each_chunk_mut(&mut out, n.max(1), |i, row| {
        for (slot, &x) in row.iter_mut().zip(&src[i * n..(i + 1) * n]) {
            *slot = prox_scalar(x, params);
        }
    });
    Ok(DualField(SquareMatrix::from_vec(n, out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(q: f64, gamma: f64, lambda_n: f64) -> ProxParams {
        ProxParams::new(q, gamma, lambda_n).unwrap()
    }

    /// Bisection on the derivative of the scalar objective, in the
    /// original (unscaled) variable.
    fn bisection_oracle(t: f64, q: f64, gamma: f64, lambda_n: f64) -> f64 {
        let d = |a: f64| a - t + gamma * lambda_n.powf(1.0 - q) * a.powf(q - 1.0);
        let (mut lo, mut hi) = (0.0, t);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if d(m) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    }

    /// Grid search over `[-|t|-1, |t|+1]`, then golden-section refinement
    /// around the best grid point.
    fn grid_oracle(t: f64, p: &ProxParams) -> f64 {
        let steps = 80_000;
        let half = t.abs() + 1.0;
        let h = 2.0 * half / steps as f64;
        let mut best = (f64::INFINITY, t);
        for k in 0..=steps {
            let a = -half + h * k as f64;
            let v = p.objective(a, t);
            if v < best.0 {
                best = (v, a);
            }
        }
        let (mut lo, mut hi) = (best.1 - h, best.1 + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let x1 = hi - r * (hi - lo);
            let x2 = lo + r * (hi - lo);
            if p.objective(x1, t) <= p.objective(x2, t) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(prox_scalar(2.0, &params(f64::INFINITY, 0.7, 1.0)), 1.0);
        assert_eq!(prox_scalar(0.3, &params(1.0, 0.5, 1.0)), 0.0);
        assert_eq!(prox_scalar(1.0, &params(2.0, 0.4, 0.4)), 0.5);
    }

    #[test]
    fn quartic_example_matches_bisection() {
        let oracle = bisection_oracle(1.0, 4.0, 1.0, 1.0);
        assert!((oracle - 0.682_327_803_828_019_3).abs() < 1e-12);
        let got = prox_scalar(1.0, &params(4.0, 1.0, 1.0));
        assert!((got - oracle).abs() < 1e-12, "{got}");
        assert!((got + got.powi(3) - 1.0).abs() < 1e-12);
        assert!((grid_oracle(1.0, &params(4.0, 1.0, 1.0)) - oracle).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProxParams::new(0.5, 1.0, 1.0).is_err());
        assert!(ProxParams::new(2.0, 0.0, 1.0).is_err());
        assert!(ProxParams::new(2.0, 1.0, -1.0).is_err());
        assert!(conjugate_exponent(0.9).is_err());
        assert_eq!(conjugate_exponent(1.0).unwrap(), f64::INFINITY);
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert_eq!(conjugate_exponent(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn field_examples() {
        let p = params(3.0, 0.8, 0.3);
        let zero = DualField::zeros(4);
        assert_eq!(prox_field(&zero, &p).unwrap(), zero);
        let w = DualField(SquareMatrix::from_fn(5, |i, j| (i as f64 - 2.0 * j as f64) * 0.37));
        let neg = DualField(w.matrix().map(|x| -x));
        let a = prox_field(&w, &p).unwrap();
        let b = prox_field(&neg, &p).unwrap();
        assert_eq!(a.matrix().map(|x| -x), *b.matrix());
        // scalar optimality condition of every entry
        for (t, alpha) in w.matrix().as_slice().iter().zip(a.matrix().as_slice()) {
            let r = alpha - t + p.gamma() * p.lambda_n().powf(1.0 - p.q()) * alpha.abs().powf(p.q() - 1.0) * alpha.signum();
            assert!(r.abs() < 1e-10, "{r}");
        }
        let seq = prox_field_with(&w, &p, Execution::Sequential).unwrap();
        assert_eq!(seq, a);
        let bad = DualField(SquareMatrix::from_fn(2, |_, _| f64::NAN));
        assert!(prox_field(&bad, &p).is_err());
    }

    #[test]
    fn continuity_at_q_two() {
        for &t in &[0.1, 1.0, 3.7] {
            let closed = prox_scalar(t, &params(2.0, 0.6, 0.45));
            for q in [2.0 - 1e-9, 2.0 + 1e-9] {
                let newton = prox_scalar(t, &params(q, 0.6, 0.45));
                assert!((newton - closed).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn extreme_exponents_do_not_overflow() {
        let p = params(101.0, 0.5, 1e-4);
        let a = prox_scalar(3.0, &p);
        assert!(a.is_finite() && a > 0.0 && a <= 3.0);
        let p = params(1.0001, 0.5, 1e-3);
        let a = prox_scalar(3.0, &p);
        assert!(a.is_finite() && (0.0..=3.0).contains(&a));
    }

    fn any_q() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(f64::INFINITY),
            Just(1.0),
            Just(2.0),
            1.1f64..8.0,
        ]
    }

    proptest! {
        #[test]
        fn prox_minimises_scalar_objective(
            t in -3.0f64..3.0, q in any_q(), gamma in 0.05f64..2.0, lambda_n in 0.05f64..2.0,
        ) {
            let p = params(q, gamma, lambda_n);
            let got = prox_scalar(t, &p);
            let oracle = grid_oracle(t, &p);
            prop_assert!((got - oracle).abs() < 1e-7, "t={} q={} got={} oracle={}", t, q, got, oracle);
            prop_assert!(p.objective(got, t) <= p.objective(oracle, t) + 1e-14);
        }

        #[test]
        fn prox_is_nonexpansive_and_odd(
            t1 in -5.0f64..5.0, t2 in -5.0f64..5.0, q in any_q(),
            gamma in 0.01f64..3.0, lambda_n in 0.01f64..3.0,
        ) {
            let p = params(q, gamma, lambda_n);
            let (a, b) = (prox_scalar(t1, &p), prox_scalar(t2, &p));
            prop_assert!((a - b).abs() <= (t1 - t2).abs() + 1e-12);
            prop_assert_eq!(prox_scalar(-t1, &p), -a);
        }
    }
}
