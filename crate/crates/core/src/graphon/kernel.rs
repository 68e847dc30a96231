use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature;
use crate::{Error, Result};

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shape of a kernel, which decides how cell averages and support tests
/// are computed.
#[derive(Clone)]
pub enum KernelForm {
    /// `K ≡ c`.
    Constant(f64),
    /// `K(x,y) = 1` if `|x-y| <= delta`, else 0.
    Band { delta: f64 },
    /// `K(x,y) = J(|x-y|)` for `|x-y| <= cutoff` (J assumed positive there),
    /// zero beyond. `cutoff = None` means `J` is positive everywhere.
    Radial {
        profile: ProfileFn,
        cutoff: Option<f64>,
    },
    /// Arbitrary symmetric kernel with no support descriptor.
    General(KernelFn),
}

/// A symmetric, nonnegative, bounded kernel on `[0,1]²`.
#[derive(Clone)]
pub struct Graphon {
    form: KernelForm,
    bound: f64,
    spec: Option<KernelSpec>,
}

impl fmt::Debug for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match &self.form {
            KernelForm::Constant(c) => format!("Constant({c})"),
            KernelForm::Band { delta } => format!("Band {{ delta: {delta} }}"),
            KernelForm::Radial { cutoff, .. } => format!("Radial {{ cutoff: {cutoff:?} }}"),
            KernelForm::General(_) => "General".to_string(),
        };
        f.debug_struct("Graphon")
            .field("form", &form)
            .field("bound", &self.bound)
            .finish()
    }
}

impl Graphon {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(format!("constant kernel value {c} must be finite and >= 0")));
        }
        Ok(Self {
            form: KernelForm::Constant(c),
            bound: c,
            spec: Some(KernelSpec::Constant { c }),
        })
    }

    pub fn band(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::invalid(format!("band half-width {delta} must be finite and >= 0")));
        }
        Ok(Self {
            form: KernelForm::Band { delta },
            bound: 1.0,
            spec: Some(KernelSpec::Band { delta }),
        })
    }

    /// `J(r) = exp(-rate·r)` on `r <= cutoff`.
    pub fn exp_radial(rate: f64, cutoff: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0 && cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::invalid("exp kernel needs rate >= 0 and cutoff > 0"));
        }
        let mut g = Self::radial(Arc::new(move |r: f64| (-rate * r).exp()), Some(cutoff), 1.0)?;
        g.spec = Some(KernelSpec::Exp { rate, cutoff });
        Ok(g)
    }

    pub fn radial(profile: ProfileFn, cutoff: Option<f64>, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid("kernel bound must be finite and >= 0"));
        }
        if let Some(c) = cutoff {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid("radial cutoff must be finite and >= 0"));
            }
        }
        Ok(Self {
            form: KernelForm::Radial { profile, cutoff },
            bound,
            spec: None,
        })
    }

    /// Arbitrary kernel; the caller promises symmetry and `0 <= f <= bound`.
    pub fn general(f: KernelFn, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid("kernel bound must be finite and >= 0"));
        }
        Ok(Self {
            form: KernelForm::General(f),
            bound,
            spec: None,
        })
    }

    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        match *spec {
            KernelSpec::Constant { c } => Self::constant(c),
            KernelSpec::Band { delta } => Self::band(delta),
            KernelSpec::Exp { rate, cutoff } => Self::exp_radial(rate, cutoff),
        }
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    /// Essential supremum of the kernel.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        match &self.form {
            KernelForm::Constant(c) => *c,
            KernelForm::Band { delta } => {
                if (x - y).abs() <= *delta {
                    1.0
                } else {
                    0.0
                }
            }
            KernelForm::Radial { profile, cutoff } => {
                let r = (x - y).abs();
                match cutoff {
                    Some(c) if r > *c => 0.0,
                    _ => profile(r),
                }
            }
            KernelForm::General(f) => f(x, y),
        }
    }

    /// Radius of the closed support `{|x-y| <= r}` for translation-invariant
    /// kernels; `None` when no analytic support description exists.
    pub(crate) fn support_radius(&self) -> Option<f64> {
        match &self.form {
            KernelForm::Constant(c) => Some(if *c > 0.0 { f64::INFINITY } else { -1.0 }),
            KernelForm::Band { delta } => Some(*delta),
            KernelForm::Radial { cutoff, .. } => Some(cutoff.unwrap_or(f64::INFINITY)),
            KernelForm::General(_) => None,
        }
    }

    /// Integral of `K` over the rectangle `[a,b] × [c,d]`.
    pub(crate) fn cell_integral(&self, rect: [f64; 4], tol: f64) -> Result<f64> {
        let [a, b, c, d] = rect;
        match &self.form {
            KernelForm::Constant(k) => Ok(k * (b - a) * (d - c)),
            KernelForm::Band { delta } => Ok(band_cell_integral(*delta, rect)),
            KernelForm::Radial { profile, cutoff } => {
                radial_cell_integral(profile.as_ref(), *cutoff, rect, tol)
            }
            KernelForm::General(f) => quadrature::integrate_2d(|x, y| f(x, y), rect, tol),
        }
    }
}

/// Length of `{x ∈ [a,b] : x + t ∈ [c,d]}`.
#[inline]
fn overlap(rect: [f64; 4], t: f64) -> f64 {
    let [a, b, c, d] = rect;
    (b.min(d - t) - a.max(c - t)).max(0.0)
}

/// Sorted cut points of the offset variable `t = y - x` inside the range.
fn offset_pieces(rect: [f64; 4], extra: &[f64]) -> Vec<f64> {
    let [a, b, c, d] = rect;
    let (lo, hi) = (c - b, d - a);
    let mut cuts = vec![lo, hi, c - a, d - b, 0.0];
    cuts.extend_from_slice(extra);
    cuts.retain(|t| *t >= lo && *t <= hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    cuts
}

/// Exact area of `{|y-x| <= delta}` inside the rectangle: the overlap
/// length is piecewise linear in the offset, so one Gauss panel per piece
/// integrates it exactly.
fn band_cell_integral(delta: f64, rect: [f64; 4]) -> f64 {
    let cuts = offset_pieces(rect, &[-delta, delta]);
    cuts.windows(2)
        .filter(|w| w[0] >= -delta && w[1] <= delta)
        .map(|w| 0.5 * (w[1] - w[0]) * (overlap(rect, w[0]) + overlap(rect, w[1])))
        .sum()
}

/// `∫∫ J(|y-x|) dy dx = ∫ J(|t|) · overlap(t) dt`, integrated piecewise
/// between kinks of the overlap, the origin and the cutoff.
fn radial_cell_integral(
    profile: &(dyn Fn(f64) -> f64 + Send + Sync),
    cutoff: Option<f64>,
    rect: [f64; 4],
    tol: f64,
) -> Result<f64> {
    let extra: Vec<f64> = cutoff.map(|c| vec![-c, c]).unwrap_or_default();
    let cuts = offset_pieces(rect, &extra);
    let pieces = cuts.len().max(2) as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if let Some(c) = cutoff {
            if mid.abs() > c {
                continue;
            }
        }
        total += quadrature::integrate(
            |t| profile(t.abs()) * overlap(rect, t),
            w[0],
            w[1],
            tol / pieces,
        )?;
    }
    Ok(total)
}

/// Kernel description used by configuration files and the CLI.
///
/// String form: `band:delta=0.3`, `constant:c=1`, `exp:rate=10,cutoff=0.2`;
/// `kind=band, delta=0.3` is accepted as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Constant { c: f64 },
    Band { delta: f64 },
    Exp { rate: f64, cutoff: f64 },
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Constant { c } => write!(f, "constant:c={c}"),
            KernelSpec::Band { delta } => write!(f, "band:delta={delta}"),
            KernelSpec::Exp { rate, cutoff } => write!(f, "exp:rate={rate},cutoff={cutoff}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut params = std::collections::BTreeMap::new();
        for tok in s.split([',', ':', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            match tok.split_once('=') {
                Some((k, v)) if k.trim() == "kind" => kind = Some(v.trim().to_lowercase()),
                Some((k, v)) => {
                    let v: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("kernel parameter `{tok}` is not a number")))?;
                    params.insert(k.trim().to_lowercase(), v);
                }
                None if kind.is_none() => kind = Some(tok.to_lowercase()),
                None => return Err(Error::invalid(format!("unexpected kernel token `{tok}`"))),
            }
        }
        let get = |name: &str| {
            params
                .get(name)
                .copied()
                .ok_or_else(|| Error::invalid(format!("kernel `{s}` is missing `{name}`")))
        };
        match kind.as_deref() {
            Some("constant") | Some("const") => Ok(KernelSpec::Constant { c: get("c")? }),
            Some("band") => Ok(KernelSpec::Band { delta: get("delta")? }),
            Some("exp") => Ok(KernelSpec::Exp {
                rate: get("rate")?,
                cutoff: get("cutoff")?,
            }),
            _ => Err(Error::invalid(format!(
                "unknown kernel `{s}` (expected constant, band or exp)"
            ))),
        }
    }
}
