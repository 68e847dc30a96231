//! Continuum-side objects: kernels, signals, partitions, and the
//! projector/injector pair between `L^q(0,1)` and `R^n`.

mod kernel;
mod partition;
mod pwc;
pub mod quadrature;
mod signal;

pub use kernel::{Graphon, KernelFn, KernelForm, KernelSpec, ProfileFn};
pub use partition::Partition;
pub use pwc::{inject, l2_distance_pwc, PiecewiseConstantFn};
pub use signal::{ContinuumSignal, SignalFn, SignalSpec, Smoothness};

use crate::{Error, Execution, Result, SquareMatrix};

/// Absolute tolerance for cell averages of signals.
pub const SIGNAL_TOL: f64 = 1e-10;
/// Absolute tolerance for cell averages of kernels.
pub const KERNEL_TOL: f64 = 1e-8;

/// Sub-sampling resolution of the support test for kernels without a
/// support descriptor.
const SUPPORT_SAMPLES: usize = 32;

/// Cell averages of `g` over the partition.
pub fn project_signal(g: &ContinuumSignal, partition: &Partition) -> Result<Vec<f64>> {
    (0..partition.n())
        .map(|i| {
            let (a, b) = partition.cell(i);
            // a cell inside one step takes its value without rounding
            if let Some(steps) = g.as_steps() {
                let k = steps.partition().locate(0.5 * (a + b));
                let (l, r) = steps.partition().cell(k);
                if l <= a && b <= r {
                    return Ok(steps.values()[k]);
                }
            }
            let w = b - a;
            let v = g.integral(a, b, SIGNAL_TOL * w)? / w;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("signal average on cell {i} is not finite")))
            }
        })
        .collect()
}

/// Cell averages of `K` over `Ω_i × Ω_j`.
pub fn project_kernel(kernel: &Graphon, partition: &Partition) -> Result<SquareMatrix> {
    project_kernel_with(kernel, partition, Execution::default())
}

pub fn project_kernel_with(
    kernel: &Graphon,
    partition: &Partition,
    exec: Execution,
) -> Result<SquareMatrix> {
    let n = partition.n();
    let rows = exec.map_indices(n, |i| -> Result<Vec<f64>> {
        let (a, b) = partition.cell(i);
        (i..n)
            .map(|j| {
                let (c, d) = partition.cell(j);
                let area = (b - a) * (d - c);
                let v = kernel.cell_integral([a, b, c, d], KERNEL_TOL * area)? / area;
                Ok(v.clamp(0.0, kernel.bound()))
            })
            .collect()
    });
    let mut m = SquareMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            m.set(i, i + k, v);
            m.set(i + k, i, v);
        }
    }
    Ok(m)
}

/// `{0,1}` adjacency of cells meeting the closed support of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleProjection {
    pub matrix: SquareMatrix,
    /// `false` when the support was probed by sampling rather than decided
    /// analytically.
    pub exact: bool,
}

/// Entry `(i,j)` is 1 iff the closed cell `Ω_i × Ω_j` meets the closure of
/// `supp K`. Translation-invariant kernels are decided by the distance of
/// the cell to the diagonal; other kernels fall back to a 32×32 grid of
/// samples (including the cell edges) and are flagged non-exact.
pub fn project_kernel_simple(kernel: &Graphon, partition: &Partition) -> Result<SimpleProjection> {
    let n = partition.n();
    let mut m = SquareMatrix::zeros(n);
    let exact = match kernel.support_radius() {
        Some(radius) => {
            for i in 0..n {
                let (a, b) = partition.cell(i);
                for j in i..n {
                    let (c, d) = partition.cell(j);
                    let gap = (c - b).max(a - d).max(0.0);
                    if gap <= radius {
                        m.set(i, j, 1.0);
                        m.set(j, i, 1.0);
                    }
                }
            }
            true
        }
        None => {
            let k = SUPPORT_SAMPLES;
            for i in 0..n {
                let (a, b) = partition.cell(i);
                for j in i..n {
                    let (c, d) = partition.cell(j);
                    let hit = (0..k).any(|s| {
                        let x = a + (b - a) * s as f64 / (k - 1) as f64;
                        (0..k).any(|t| {
                            let y = c + (d - c) * t as f64 / (k - 1) as f64;
                            kernel.evaluate(x, y) != 0.0
                        })
                    });
                    if hit {
                        m.set(i, j, 1.0);
                        m.set(j, i, 1.0);
                    }
                }
            }
            false
        }
    };
    Ok(SimpleProjection { matrix: m, exact })
}

/// `C(n)`: cells of the equispaced `n × n` mesh whose closed square meets
/// the boundary of `cl(supp K)` inside the open unit square. For band and
/// cut-off radial kernels that boundary is the pair of segments
/// `|x - y| = r`.
pub fn boundary_cell_count(kernel: &Graphon, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("mesh size must be positive"));
    }
    let radius = match kernel.form() {
        KernelForm::Constant(_) => return Ok(0),
        KernelForm::Band { delta } => *delta,
        KernelForm::Radial {
            cutoff: Some(c), ..
        } => *c,
        KernelForm::Radial { cutoff: None, .. } => return Ok(0),
        KernelForm::General(_) => {
            return Err(Error::UnsupportedKernel(
                "boundary cell count needs a band or cut-off radial kernel".into(),
            ))
        }
    };
    if radius >= 1.0 {
        return Ok(0);
    }
    let h = 1.0 / n as f64;
    let mut count = 0;
    for i in 0..n {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        for j in 0..n {
            let (c, d) = (j as f64 * h, (j + 1) as f64 * h);
            // segment y = x + r, x ∈ (0, 1-r), and its mirror x = y + r
            let upper = segment_hits(a, b, c, d, radius);
            let lower = segment_hits(c, d, a, b, radius);
            if upper || lower {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Does `{(x, x + r) : 0 < x < 1 - r}` meet `[a,b] × [c,d]`?
fn segment_hits(a: f64, b: f64, c: f64, d: f64, r: f64) -> bool {
    let lo = a.max(c - r);
    let hi = b.min(d - r);
    lo <= hi && hi > 0.0 && lo < 1.0 - r
}

/// `‖v‖_{q,n} = ((1/n) Σ |v_i|^q)^{1/q}`, or `max |v_i|` for `q = ∞`.
pub fn discrete_norm(v: &[f64], q: f64, n: usize) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("norm exponent {q} must be >= 1")));
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if q.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let s: f64 = v.iter().map(|x| x.abs().powf(q)).sum();
    Ok((s / n as f64).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn eq(n: usize) -> Partition {
        Partition::equispaced(n).unwrap()
    }

    #[test]
    fn project_signal_examples() {
        let c = ContinuumSignal::constant(1.7).unwrap();
        let p = Partition::from_breakpoints(vec![0.0, 0.1, 0.55, 1.0]).unwrap();
        for v in project_signal(&c, &p).unwrap() {
            assert!((v - 1.7).abs() < 1e-15);
        }

        let step = ContinuumSignal::steps(&[0.5], &[0.0, 1.0]).unwrap();
        assert_eq!(project_signal(&step, &eq(4)).unwrap(), vec![0.0, 0.0, 1.0, 1.0]);

        let ramp = ContinuumSignal::function(
            Arc::new(|x| x),
            Smoothness::Lipschitz { s: 1.0, constant: 1.0 },
        );
        let v = project_signal(&ramp, &eq(2)).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-12 && (v[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn project_signal_rejects_non_finite() {
        let bad = ContinuumSignal::function(Arc::new(|_| f64::INFINITY), Smoothness::Generic);
        assert!(project_signal(&bad, &eq(3)).is_err());
    }

    #[test]
    fn project_kernel_examples() {
        let one = Graphon::constant(1.0).unwrap();
        let p = Partition::from_breakpoints(vec![0.0, 0.3, 0.35, 1.0]).unwrap();
        assert!(project_kernel(&one, &p).unwrap().as_slice().iter().all(|&v| v == 1.0));

        let full = Graphon::band(1.0).unwrap();
        let m = project_kernel(&full, &eq(5)).unwrap();
        assert!(m.as_slice().iter().all(|&v| (v - 1.0).abs() < 1e-15));

        let band = Graphon::band(0.3).unwrap();
        let m = project_kernel(&band, &eq(4)).unwrap();
        assert_eq!(m.get(0, 3), 0.0);
        assert_eq!(m.get(0, 0), 1.0);
        // cells [0,.25]x[.25,.5]: area of {y - x <= 0.3} is 1/16 - 0.2²/2
        assert!((m.get(0, 1) - (0.0625 - 0.02) / 0.0625).abs() < 1e-14);
    }

    #[test]
    fn project_kernel_general_matches_closed_form() {
        let band = Graphon::band(0.3).unwrap();
        let general = Graphon::general(Arc::new(|x: f64, y: f64| (x * y).sqrt() + 0.5), 1.5).unwrap();
        let p = eq(6);
        let m = project_kernel(&general, &p).unwrap();
        assert_eq!(m.asymmetry(), 0.0);
        // ∫∫ sqrt(xy) over a cell factorizes
        let f = |a: f64, b: f64| (2.0 / 3.0) * (b.powf(1.5) - a.powf(1.5));
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = p.cell(i);
                let (c, d) = p.cell(j);
                let want = f(a, b) * f(c, d) / ((b - a) * (d - c)) + 0.5;
                assert!((m.get(i, j) - want).abs() < 1e-8, "{i} {j}");
            }
        }
        let mb = project_kernel(&band, &p).unwrap();
        assert!(mb.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn project_kernel_radial_matches_2d_quadrature() {
        let k = Graphon::exp_radial(4.0, 0.35).unwrap();
        let p = Partition::from_breakpoints(vec![0.0, 0.13, 0.4, 0.41, 0.8, 1.0]).unwrap();
        let m = project_kernel(&k, &p).unwrap();
        for i in 0..p.n() {
            for j in 0..p.n() {
                let (a, b) = p.cell(i);
                let (c, d) = p.cell(j);
                // nested 1-D quadrature split at every kink and jump
                let split = |lo: f64, hi: f64, pts: &[f64]| {
                    let mut v = vec![lo, hi];
                    v.extend(pts.iter().copied().filter(|t| *t > lo && *t < hi));
                    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    v
                };
                let inner = |x: f64| -> f64 {
                    split(c, d, &[x, x - 0.35, x + 0.35])
                        .windows(2)
                        .map(|w| quadrature::integrate(|y| k.evaluate(x, y), w[0], w[1], 1e-14).unwrap())
                        .sum()
                };
                let direct: f64 = split(a, b, &[c, d, c - 0.35, c + 0.35, d - 0.35, d + 0.35])
                    .windows(2)
                    .map(|w| quadrature::integrate(inner, w[0], w[1], 1e-13).unwrap())
                    .sum::<f64>()
                    / ((b - a) * (d - c));
                assert!((m.get(i, j) - direct).abs() < 1e-8, "{i} {j}: {} vs {direct}", m.get(i, j));
            }
        }
    }

    #[test]
    fn simple_projection_examples() {
        let one = Graphon::constant(1.0).unwrap();
        let s = project_kernel_simple(&one, &eq(3)).unwrap();
        assert!(s.exact && s.matrix.as_slice().iter().all(|&v| v == 1.0));

        let band = Graphon::band(0.3).unwrap();
        let s = project_kernel_simple(&band, &eq(4)).unwrap();
        assert_eq!(s.matrix.get(0, 3), 0.0);
        assert_eq!(s.matrix.get(0, 1), 1.0);
        assert_eq!(s.matrix.get(0, 2), 1.0); // gap 0.25 <= 0.3
        assert_eq!(s.matrix.asymmetry(), 0.0);
    }

    #[test]
    fn simple_projection_sampling_fallback_is_flagged() {
        let band_like = Graphon::general(
            Arc::new(|x: f64, y: f64| if (x - y).abs() <= 0.3 { 1.0 } else { 0.0 }),
            1.0,
        )
        .unwrap();
        let s = project_kernel_simple(&band_like, &eq(4)).unwrap();
        assert!(!s.exact);
        let exact = project_kernel_simple(&Graphon::band(0.3).unwrap(), &eq(4)).unwrap();
        assert_eq!(s.matrix, exact.matrix);

        let zero = Graphon::general(Arc::new(|_, _| 0.0), 0.0).unwrap();
        let s = project_kernel_simple(&zero, &eq(3)).unwrap();
        assert!(!s.exact && s.matrix.as_slice().iter().all(|&v| v == 0.0));
    }

    /// Independent oracle: a line meets a closed convex cell iff the signed
    /// offsets at the four corners do not all share one strict sign.
    fn corner_sign_count(delta: f64, n: usize) -> usize {
        let h = 1.0 / n as f64;
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                let corners = [
                    (i as f64 * h, j as f64 * h),
                    ((i + 1) as f64 * h, j as f64 * h),
                    (i as f64 * h, (j + 1) as f64 * h),
                    ((i + 1) as f64 * h, (j + 1) as f64 * h),
                ];
                let hits = |s: f64| {
                    let v: Vec<f64> = corners.iter().map(|(x, y)| s * (y - x) - delta).collect();
                    !(v.iter().all(|&t| t > 0.0) || v.iter().all(|&t| t < 0.0))
                };
                if hits(1.0) || hits(-1.0) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn boundary_cells_match_enumeration() {
        let band = Graphon::band(0.3).unwrap();
        assert_eq!(corner_sign_count(0.3, 4), 10);
        assert_eq!(boundary_cell_count(&band, 4).unwrap(), 10);
        for n in [7, 16, 33, 64] {
            assert_eq!(boundary_cell_count(&band, n).unwrap(), corner_sign_count(0.3, n), "n={n}");
        }
        assert_eq!(boundary_cell_count(&Graphon::constant(1.0).unwrap(), 8).unwrap(), 0);
        assert_eq!(boundary_cell_count(&Graphon::band(1.0).unwrap(), 8).unwrap(), 0);
        let general = Graphon::general(Arc::new(|_, _| 1.0), 1.0).unwrap();
        assert!(matches!(
            boundary_cell_count(&general, 4),
            Err(Error::UnsupportedKernel(_))
        ));
    }

    #[test]
    fn boundary_count_doubles_with_resolution() {
        let band = Graphon::band(0.3).unwrap();
        let c: Vec<usize> = [64, 128, 256]
            .iter()
            .map(|&n| corner_sign_count(0.3, n))
            .collect();
        for w in c.windows(2) {
            let r = w[1] as f64 / w[0] as f64;
            assert!((r - 2.0).abs() < 0.05, "{r}");
        }
        assert_eq!(boundary_cell_count(&band, 256).unwrap(), c[2]);
    }

    #[test]
    fn discrete_norm_examples() {
        assert_eq!(discrete_norm(&[1.0; 7], 3.0, 7).unwrap(), 1.0);
        assert_eq!(discrete_norm(&[1.0; 7], f64::INFINITY, 7).unwrap(), 1.0);
        assert!((discrete_norm(&[3.0, 4.0], 2.0, 2).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(discrete_norm(&[-2.0, 5.0], f64::INFINITY, 2).unwrap(), 5.0);
        assert!(discrete_norm(&[1.0], 0.5, 1).is_err());
        assert!(discrete_norm(&[1.0], 2.0, 2).is_err());
    }

    #[test]
    fn injector_reproduces_cell_aligned_steps() {
        let step = ContinuumSignal::steps(&[0.25, 0.5], &[3.0, -1.0, 2.0]).unwrap();
        let p = eq(8);
        let f = inject(&project_signal(&step, &p).unwrap(), &p).unwrap();
        let exact = step.as_steps().unwrap();
        assert_eq!(l2_distance_pwc(&f, exact), 0.0);
    }
}
