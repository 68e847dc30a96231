//! Adaptive composite Gauss-Legendre quadrature (8 nodes per panel,
//! dyadic refinement).

use crate::{Error, Result};

const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

const MAX_DEPTH_1D: u32 = 40;
const MAX_DEPTH_2D: u32 = 9;

/// Single 8-point panel on `[a, b]`.
pub(crate) fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let whole = gl_panel(&f, a, b);
    let v = refine(&f, a, b, whole, tol, 0);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid("integrand is not finite"))
    }
}

fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m);
    let right = gl_panel(f, m, b);
    let sum = left + right;
    if !sum.is_finite() || (sum - whole).abs() <= tol || depth >= MAX_DEPTH_1D {
        return sum;
    }
    refine(f, a, m, left, 0.5 * tol, depth + 1) + refine(f, m, b, right, 0.5 * tol, depth + 1)
}

fn gl_panel_2d(f: &impl Fn(f64, f64) -> f64, rect: [f64; 4]) -> f64 {
    let [a, b, c, d] = rect;
    let (mx, hx) = (0.5 * (a + b), 0.5 * (b - a));
    let (my, hy) = (0.5 * (c + d), 0.5 * (d - c));
    let mut acc = 0.0;
    for (xi, wi) in NODES.iter().zip(WEIGHTS.iter()) {
        for sx in [-1.0, 1.0] {
            let x = mx + sx * hx * xi;
            for (yj, wj) in NODES.iter().zip(WEIGHTS.iter()) {
                acc += wi * wj * (f(x, my - hy * yj) + f(x, my + hy * yj));
            }
        }
    }
    acc * hx * hy
}

/// Integral of `f` over `[a,b] × [c,d]` by adaptive tensor-product
/// Gauss-Legendre with quadrant refinement.
pub fn integrate_2d(f: impl Fn(f64, f64) -> f64, rect: [f64; 4], tol: f64) -> Result<f64> {
    let [a, b, c, d] = rect;
    if b <= a || d <= c {
        return Ok(0.0);
    }
    let whole = gl_panel_2d(&f, rect);
    let v = refine_2d(&f, rect, whole, tol, 0);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid("kernel evaluation is not finite"))
    }
}

fn refine_2d(f: &impl Fn(f64, f64) -> f64, rect: [f64; 4], whole: f64, tol: f64, depth: u32) -> f64 {
    let [a, b, c, d] = rect;
    let (mx, my) = (0.5 * (a + b), 0.5 * (c + d));
    let quads = [[a, mx, c, my], [mx, b, c, my], [a, mx, my, d], [mx, b, my, d]];
    let parts = quads.map(|q| gl_panel_2d(f, q));
    let sum: f64 = parts.iter().sum();
    if !sum.is_finite() || (sum - whole).abs() <= tol || depth >= MAX_DEPTH_2D {
        return sum;
    }
    quads
        .iter()
        .zip(parts)
        .map(|(q, p)| refine_2d(f, *q, p, 0.25 * tol, depth + 1))
        .sum()
}
