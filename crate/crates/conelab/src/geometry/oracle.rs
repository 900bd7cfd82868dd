//! Finite-difference counterparts of the jet-based geometry operations.
//!
//! Everything here differentiates only scalar *values* of the field
//! evaluators with central stencils, so these functions are independent
//! of the jet derivative lanes they are used to cross-check.

use nalgebra::DMatrix;

use crate::chart::Point;
use crate::error::Result;
use crate::fd::{default_steps, fd_derivatives_refined};
use crate::field::{MetricField, ScalarField};
use crate::linalg::invert_values;

/// Christoffel values from difference quotients of the metric components.
pub fn fd_christoffel_values(g: &MetricField, p: &Point) -> Result<Vec<f64>> {
    g.chart.check_point(p)?;
    let d = g.dim();
    let x = &p.coords;
    let h = default_steps(x, 1);
    let mut vals = DMatrix::zeros(d, d);
    let mut dg = vec![0.0; d * d * d];
    for i in 0..d {
        for j in i..d {
            let f = |c: &[f64]| g.components_coords(c).get(i, j).value;
            let est = fd_derivatives_refined(&f, x, 1, &h);
            vals[(i, j)] = est.value;
            vals[(j, i)] = est.value;
            for m in 0..d {
                dg[(m * d + i) * d + j] = est.grad[m];
                dg[(m * d + j) * d + i] = est.grad[m];
            }
        }
    }
    let ginv = invert_values(&vals)?;
    let mut out = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[(k, l)]
                        * (dg[(i * d + j) * d + l] + dg[(j * d + i) * d + l]
                            - dg[(l * d + i) * d + j]);
                }
                out[(k * d + i) * d + j] = 0.5 * acc;
            }
        }
    }
    Ok(out)
}

/// ∂_m Γ^k_{ij} by differencing [`fd_christoffel_values`], with one
/// Richardson level.
pub fn fd_dgamma(g: &MetricField, p: &Point) -> Result<Vec<f64>> {
    let d = g.dim();
    let x = &p.coords;
    let h = default_steps(x, 1);
    let mut out = vec![0.0; d * d * d * d];
    for m in 0..d {
        let central = |step: f64| -> Result<Vec<f64>> {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[m] += step;
            xm[m] -= step;
            let gp = fd_christoffel_values(g, &Point::new(xp, &p.chart_id))?;
            let gm = fd_christoffel_values(g, &Point::new(xm, &p.chart_id))?;
            Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
        };
        let coarse = central(h[m])?;
        let fine = central(h[m] / 2.0)?;
        for idx in 0..d * d * d {
            out[m * d * d * d + idx] = (4.0 * fine[idx] - coarse[idx]) / 3.0;
        }
    }
    Ok(out)
}

/// Covariant Hessian from difference quotients of α and the FD
/// Christoffel symbols.
pub fn fd_covariant_hessian(
    g: &MetricField,
    alpha: &ScalarField,
    p: &Point,
) -> Result<DMatrix<f64>> {
    let d = g.dim();
    let x = &p.coords;
    let f = |c: &[f64]| alpha.eval_coords(c).value;
    let est = fd_derivatives_refined(&f, x, 2, &default_steps(x, 2));
    let gamma = fd_christoffel_values(g, p)?;
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut v = est.h(i, j);
            for k in 0..d {
                v -= gamma[(k * d + i) * d + j] * est.grad[k];
            }
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Third covariant derivative with all ingredients estimated by
/// differences: ∂³α, ∂Γ, Γ, ∂²α, ∂α.
pub fn fd_covariant_third(g: &MetricField, alpha: &ScalarField, p: &Point) -> Result<Vec<f64>> {
    let d = g.dim();
    let x = &p.coords;
    let f = |c: &[f64]| alpha.eval_coords(c).value;
    let lo = fd_derivatives_refined(&f, x, 2, &default_steps(x, 2));
    let hi = fd_derivatives_refined(&f, x, 3, &default_steps(x, 3));
    let gamma = fd_christoffel_values(g, p)?;
    let dgamma = fd_dgamma(g, p)?;
    let gm = |k: usize, i: usize, j: usize| gamma[(k * d + i) * d + j];
    let dgm = |m: usize, k: usize, i: usize, j: usize| dgamma[((m * d + k) * d + i) * d + j];

    // (DDα)_{jk} and its partials ∂_i(DDα)_{jk}
    let dd = |j: usize, k: usize| -> f64 {
        let mut v = lo.h(j, k);
        for m in 0..d {
            v -= gm(m, j, k) * lo.grad[m];
        }
        v
    };
    let ddd_partial = |i: usize, j: usize, k: usize| -> f64 {
        let mut v = hi.t3(i, j, k);
        for m in 0..d {
            v -= dgm(i, m, j, k) * lo.grad[m] + gm(m, j, k) * lo.h(i, m);
        }
        v
    };
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut v = ddd_partial(i, j, k);
                for m in 0..d {
                    v -= gm(m, i, j) * dd(m, k) + gm(m, i, k) * dd(j, m);
                }
                out[(i * d + j) * d + k] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::round_sphere_2;
    use crate::geometry;

    #[test]
    fn fd_christoffel_agrees_with_jets_on_sphere() {
        let g = round_sphere_2();
        let p = Point::new(vec![1.1, 0.9], &g.chart.id);
        let fd = fd_christoffel_values(&g, &p).unwrap();
        let jets = geometry::christoffel(&g, &p).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let a = fd[(k * 2 + i) * 2 + j];
                    let b = jets.val(k, i, j);
                    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn fd_third_agrees_with_jets_on_sphere() {
        let g = round_sphere_2();
        let alpha = ScalarField::from_fn(g.chart.clone(), "cos2", |j| &j[0].cos() * &j[0].cos());
        let p = Point::new(vec![0.8, 2.2], &g.chart.id);
        let fd = fd_covariant_third(&g, &alpha, &p).unwrap();
        let jets = geometry::covariant_third(&g, &alpha, &p).unwrap();
        for idx in 0..8 {
            assert!((fd[idx] - jets[idx]).abs() < 1e-5, "{} vs {}", fd[idx], jets[idx]);
        }
    }
}
