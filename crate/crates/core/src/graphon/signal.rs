use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{quadrature, Partition, PiecewiseConstantFn};
use crate::{Error, Result};

pub type SignalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Regularity class of a signal given by a closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    /// Member of `Lip(s, L^q)` with the given seminorm bound.
    Lipschitz { s: f64, constant: f64 },
    Generic,
}

#[derive(Clone)]
enum Form {
    Steps(PiecewiseConstantFn),
    Function { f: SignalFn, smoothness: Smoothness },
}

/// A function on `[0,1]`.
#[derive(Clone)]
pub struct ContinuumSignal {
    form: Form,
}

impl fmt::Debug for ContinuumSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Steps(p) => f.debug_tuple("Steps").field(p).finish(),
            Form::Function { smoothness, .. } => f
                .debug_struct("Function")
                .field("smoothness", smoothness)
                .finish(),
        }
    }
}

impl ContinuumSignal {
    /// Step function taking `levels[k]` on `[jumps[k-1], jumps[k])`.
    pub fn steps(jumps: &[f64], levels: &[f64]) -> Result<Self> {
        if levels.len() != jumps.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: jumps.len() + 1,
                got: levels.len(),
            });
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("step levels must be finite"));
        }
        let mut bps = Vec::with_capacity(jumps.len() + 2);
        bps.push(0.0);
        bps.extend_from_slice(jumps);
        bps.push(1.0);
        let partition = Partition::from_breakpoints(bps)?;
        Ok(Self {
            form: Form::Steps(PiecewiseConstantFn::new(partition, levels.to_vec())?),
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::steps(&[], &[c])
    }

    pub fn function(f: SignalFn, smoothness: Smoothness) -> Self {
        Self {
            form: Form::Function { f, smoothness },
        }
    }

    pub fn from_spec(spec: &SignalSpec) -> Result<Self> {
        match spec {
            SignalSpec::Steps { jumps, levels } => Self::steps(jumps, levels),
        }
    }

    /// Step representation when the signal is piecewise constant.
    pub fn as_steps(&self) -> Option<&PiecewiseConstantFn> {
        match &self.form {
            Form::Steps(p) => Some(p),
            Form::Function { .. } => None,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match &self.form {
            // BV functions on [0,1] lie in Lip(1/2, L²)
            Form::Steps(p) => Smoothness::Lipschitz {
                s: 0.5,
                constant: p.total_variation().sqrt(),
            },
            Form::Function { smoothness, .. } => *smoothness,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.form {
            Form::Steps(p) => p.evaluate(x),
            Form::Function { f, .. } => f(x),
        }
    }

    /// `∫_a^b g`, exact for step signals.
    pub(crate) fn integral(&self, a: f64, b: f64, tol: f64) -> Result<f64> {
        match &self.form {
            Form::Steps(p) => Ok(p.integral(a, b)),
            Form::Function { f, .. } => quadrature::integrate(|x| f(x), a, b, tol),
        }
    }

    /// `‖g‖_{L^q}`; `q = ∞` for the sup norm. Exact for steps; closures use
    /// quadrature (finite q) or a 10⁵-point sample (q = ∞).
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::invalid(format!("norm exponent {q} must be >= 1")));
        }
        match &self.form {
            Form::Steps(p) => Ok(p.lq_norm(q)),
            Form::Function { f, .. } => {
                if q.is_infinite() {
                    let m = 100_000;
                    Ok((0..=m).map(|i| f(i as f64 / m as f64).abs()).fold(0.0, f64::max))
                } else {
                    Ok(quadrature::integrate(|x| f(x).abs().powf(q), 0.0, 1.0, 1e-13)?.powf(1.0 / q))
                }
            }
        }
    }
}

/// Serializable signal description for experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalSpec {
    Steps { jumps: Vec<f64>, levels: Vec<f64> },
}

impl Default for SignalSpec {
    /// Five-level step signal with values in {1,…,5}.
    fn default() -> Self {
        SignalSpec::Steps {
            jumps: vec![0.17, 0.38, 0.61, 0.83],
            levels: vec![1.0, 4.0, 2.0, 5.0, 3.0],
        }
    }
}
