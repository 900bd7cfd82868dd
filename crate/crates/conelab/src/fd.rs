//! Central-difference derivative estimates, independent of the jet path.
//!
//! This is the cross-check oracle: it sees only scalar evaluations of a
//! closure, so agreement with [`crate::jet`] validates the Taylor
//! arithmetic and everything built on it. Plain stencils have O(h²)
//! truncation error; [`fd_derivatives_refined`] adds one Richardson
//! extrapolation level (same stencils at h and h/2, O(h⁴)) for the
//! tight comparison suites.

use crate::chart::Chart;
use crate::error::{Error, Result};

/// Jet-shaped central-difference coefficients. Orders above the
/// requested one are left at zero.
#[derive(Clone, Debug)]
pub struct FdJet {
    pub dim: usize,
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub third: Vec<f64>,
}

impl FdJet {
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }
    pub fn t3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.dim + j) * self.dim + k]
    }
}

/// Default step sizes: relative 1e-3 steps for orders 1–2, 1e-2 for
/// the order-3 stencils (balancing truncation against round-off for
/// the third-order stencils).
pub fn default_steps(x: &[f64], order: u8) -> Vec<f64> {
    let rel: f64 = if order >= 3 { 1e-2 } else { 1e-3 };
    x.iter().map(|&c| rel.max(rel * c.abs())).collect()
}

fn eval_shift(f: &dyn Fn(&[f64]) -> f64, x: &[f64], shifts: &[(usize, f64)]) -> f64 {
    let mut y = x.to_vec();
    for &(i, dx) in shifts {
        y[i] += dx;
    }
    f(&y)
}

fn grad_once(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: &[f64], out: &mut FdJet) {
    for i in 0..x.len() {
        let p = eval_shift(f, x, &[(i, h[i])]);
        let m = eval_shift(f, x, &[(i, -h[i])]);
        out.grad[i] = (p - m) / (2.0 * h[i]);
    }
}

fn hess_once(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: &[f64], f0: f64, out: &mut FdJet) {
    let d = x.len();
    for i in 0..d {
        let p = eval_shift(f, x, &[(i, h[i])]);
        let m = eval_shift(f, x, &[(i, -h[i])]);
        out.hess[i * d + i] = (p - 2.0 * f0 + m) / (h[i] * h[i]);
        for j in (i + 1)..d {
            let pp = eval_shift(f, x, &[(i, h[i]), (j, h[j])]);
            let pm = eval_shift(f, x, &[(i, h[i]), (j, -h[j])]);
            let mp = eval_shift(f, x, &[(i, -h[i]), (j, h[j])]);
            let mm = eval_shift(f, x, &[(i, -h[i]), (j, -h[j])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            out.hess[i * d + j] = v;
            out.hess[j * d + i] = v;
        }
    }
}

fn set_t3_all(out: &mut FdJet, i: usize, j: usize, k: usize, v: f64) {
    let d = out.dim;
    for (a, b, c) in [
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ] {
        out.third[(a * d + b) * d + c] = v;
    }
}

fn third_once(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: &[f64], out: &mut FdJet) {
    let d = x.len();
    for i in 0..d {
        // ∂³/∂x_i³
        let p2 = eval_shift(f, x, &[(i, 2.0 * h[i])]);
        let p1 = eval_shift(f, x, &[(i, h[i])]);
        let m1 = eval_shift(f, x, &[(i, -h[i])]);
        let m2 = eval_shift(f, x, &[(i, -2.0 * h[i])]);
        set_t3_all(out, i, i, i, (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h[i].powi(3)));
        // ∂²/∂x_i² ∂/∂x_j with j ≠ i
        for j in 0..d {
            if j == i {
                continue;
            }
            let mut acc = 0.0;
            for sj in [1.0f64, -1.0] {
                let pc = eval_shift(f, x, &[(i, h[i]), (j, sj * h[j])]);
                let cc = eval_shift(f, x, &[(j, sj * h[j])]);
                let mc = eval_shift(f, x, &[(i, -h[i]), (j, sj * h[j])]);
                acc += sj * (pc - 2.0 * cc + mc);
            }
            let v = acc / (2.0 * h[i] * h[i] * h[j]);
            if i < j {
                set_t3_all(out, i, i, j, v);
            } else {
                set_t3_all(out, j, i, i, v);
            }
        }
        // fully mixed
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                let mut acc = 0.0;
                for si in [1.0f64, -1.0] {
                    for sj in [1.0f64, -1.0] {
                        for sk in [1.0f64, -1.0] {
                            let v = eval_shift(
                                f,
                                x,
                                &[(i, si * h[i]), (j, sj * h[j]), (k, sk * h[k])],
                            );
                            acc += si * sj * sk * v;
                        }
                    }
                }
                set_t3_all(out, i, j, k, acc / (8.0 * h[i] * h[j] * h[k]));
            }
        }
    }
}

fn fd_at_step(f: &dyn Fn(&[f64]) -> f64, x: &[f64], order: u8, h: &[f64]) -> FdJet {
    let d = x.len();
    let mut out = FdJet {
        dim: d,
        value: f(x),
        grad: vec![0.0; d],
        hess: vec![0.0; d * d],
        third: vec![0.0; d * d * d],
    };
    grad_once(f, x, h, &mut out);
    if order >= 2 {
        hess_once(f, x, h, out.value, &mut out);
    }
    if order >= 3 {
        third_once(f, x, h, &mut out);
    }
    out
}

/// Central-difference estimates up to `order` ∈ {1,2,3} at steps `h`
/// (per coordinate). Truncation error O(h²).
pub fn fd_derivatives(f: &dyn Fn(&[f64]) -> f64, x: &[f64], order: u8, h: &[f64]) -> FdJet {
    assert!((1..=3).contains(&order));
    assert_eq!(x.len(), h.len());
    fd_at_step(f, x, order, h)
}

/// Like [`fd_derivatives`] with one Richardson extrapolation level:
/// combines the O(h²) stencils at `h` and `h/2` into an O(h⁴) estimate.
pub fn fd_derivatives_refined(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    order: u8,
    h: &[f64],
) -> FdJet {
    fd_derivatives_extrapolated(f, x, order, h, 1)
}

/// Richardson tableau over `levels` halvings of the step: level 1 gives
/// O(h⁴), level 2 gives O(h⁶). More levels trade truncation error for
/// round-off amplification.
pub fn fd_derivatives_extrapolated(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    order: u8,
    h: &[f64],
    levels: usize,
) -> FdJet {
    let mut rows: Vec<FdJet> = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let hl: Vec<f64> = h.iter().map(|v| v / (1 << l) as f64).collect();
        rows.push(fd_at_step(f, x, order, &hl));
    }
    // error series is in h²: eliminate one power of h² per column
    for col in 1..=levels {
        let factor = (4.0f64).powi(col as i32);
        for r in (col..=levels).rev() {
            let combine = |a: f64, b: f64| (factor * b - a) / (factor - 1.0);
            let (head, tail) = rows.split_at_mut(r);
            let prev = &head[r - 1];
            let cur = &mut tail[0];
            for i in 0..cur.grad.len() {
                cur.grad[i] = combine(prev.grad[i], cur.grad[i]);
            }
            for i in 0..cur.hess.len() {
                cur.hess[i] = combine(prev.hess[i], cur.hess[i]);
            }
            for i in 0..cur.third.len() {
                cur.third[i] = combine(prev.third[i], cur.third[i]);
            }
        }
    }
    rows.pop().unwrap()
}

/// Checks that the full stencil (offsets up to ±2h) stays inside the
/// chart before differencing.
pub fn fd_derivatives_on_chart(
    chart: &Chart,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    order: u8,
    h: &[f64],
) -> Result<FdJet> {
    for i in 0..x.len() {
        for s in [-2.0, 2.0] {
            let mut y = x.to_vec();
            y[i] += s * h[i];
            if !chart.contains(&y) {
                return Err(Error::StencilOutsideChart {
                    chart: chart.id.clone(),
                    coords: x.to_vec(),
                });
            }
        }
    }
    Ok(fd_derivatives(f, x, order, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_of_square() {
        let f = |x: &[f64]| x[0] * x[0];
        let got = fd_derivatives(&f, &[1.0], 2, &[1e-3]);
        assert!((got.h(0, 0) - 2.0).abs() < 1e-7);
        assert!((got.grad[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn third_derivative_of_exp_2s() {
        let f = |x: &[f64]| (2.0 * x[0]).exp();
        let got = fd_derivatives(&f, &[0.0], 3, &[1e-2]);
        // leading truncation is exactly (h²/4)(f⁽⁵⁾/f''') = 1e-4 relative
        // here; allow the O(h⁴) correction on top
        assert!((got.t3(0, 0, 0) - 8.0).abs() / 8.0 < 1.01e-4);
        let refined = fd_derivatives_refined(&f, &[0.0], 3, &[1e-2]);
        assert!((refined.t3(0, 0, 0) - 8.0).abs() / 8.0 < 1e-7);
    }

    #[test]
    fn mixed_partials_of_product() {
        // f = x y² z: ∂x∂y∂z = 2y, ∂y∂y∂x = 2z
        let f = |x: &[f64]| x[0] * x[1] * x[1] * x[2];
        let x = [0.7, -0.3, 1.1];
        let h = default_steps(&x, 3);
        let got = fd_derivatives(&f, &x, 3, &h);
        assert!((got.t3(0, 1, 2) - 2.0 * x[1]).abs() < 1e-6);
        assert!((got.t3(1, 1, 0) - 2.0 * x[2]).abs() < 1e-5);
        assert!((got.t3(0, 1, 1) - got.t3(1, 0, 1)).abs() == 0.0);
    }

    #[test]
    fn refined_beats_plain_on_oscillatory() {
        let f = |x: &[f64]| (3.0 * x[0]).sin();
        let h = [1e-2];
        let plain = fd_derivatives(&f, &[0.4], 3, &h);
        let refined = fd_derivatives_refined(&f, &[0.4], 3, &h);
        let exact = -27.0 * (3.0f64 * 0.4).cos();
        assert!((refined.t3(0, 0, 0) - exact).abs() < (plain.t3(0, 0, 0) - exact).abs());
        assert!((refined.t3(0, 0, 0) - exact).abs() < 1e-7);
    }

    #[test]
    fn stencil_leaving_chart_is_an_error() {
        let chart = Chart::new("box", &[0.0], &[1.0]);
        let f = |x: &[f64]| x[0];
        let err = fd_derivatives_on_chart(&chart, &f, &[0.999], 1, &[1e-3]);
        assert!(err.is_err());
    }
}
