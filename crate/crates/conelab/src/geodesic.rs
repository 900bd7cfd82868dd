//! Fixed-step RK4 geodesic integration and the closed-form radial law
//! on cones.
//!
//! A cone geodesic launched from (r₀, m₀) along ±rY in the projector
//! case has the radial closed form
//!
//! ```text
//! r(t) = √((α₀t + r₀)² + (α₀ − α₀²) r₀² t²)
//! ```
//!
//! with base reparameterization f(t) = arctan/argtanh depending on the
//! sign of α₀ − α₀²; along the opposite branch A = r²α decays as
//! r₀²α₀(1−t)², reaching zero at t = 1 where Y vanishes.

use crate::chart::Point;
use crate::cone::ConeSolution;
use crate::error::{Error, Result};
use crate::field::MetricField;
use crate::geometry::christoffel_values;
use crate::linalg::invert_values;

/// Discretized geodesic: parameters, points and velocities at the nodes.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub metric_id: String,
    pub chart_id: String,
    pub step: f64,
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl GeodesicPath {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// g(γ̇, γ̇) at every node.
    pub fn energies(&self, g: &MetricField) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len());
        for (x, v) in self.points.iter().zip(&self.velocities) {
            let gv = g.values(&Point::new(x.clone(), &self.chart_id))?;
            let mut e = 0.0;
            for i in 0..v.len() {
                for j in 0..v.len() {
                    e += gv[(i, j)] * v[i] * v[j];
                }
            }
            out.push(e);
        }
        Ok(out)
    }

    /// max |g(γ̇,γ̇) − g(γ̇,γ̇)(0)| along the path.
    pub fn energy_drift(&self, g: &MetricField) -> Result<f64> {
        let e = self.energies(g)?;
        let e0 = e[0];
        Ok(e.iter().fold(0.0f64, |a, &x| a.max((x - e0).abs())))
    }

    /// Five-point difference of the stored velocities: γ̈ at node k
    /// (needs 2 ≤ k ≤ len − 3).
    pub fn accel_fd(&self, k: usize) -> Vec<f64> {
        let h = self.step;
        let d = self.dim();
        let v = &self.velocities;
        (0..d)
            .map(|i| {
                (v[k - 2][i] - 8.0 * v[k - 1][i] + 8.0 * v[k + 1][i] - v[k + 2][i]) / (12.0 * h)
            })
            .collect()
    }

    /// sup over interior nodes of |γ̈^k + Γ^k_{ij} γ̇^i γ̇^j|.
    pub fn geodesic_residual(&self, g: &MetricField) -> Result<f64> {
        let d = self.dim();
        let mut sup: f64 = 0.0;
        for k in 2..self.len().saturating_sub(2) {
            let acc = self.accel_fd(k);
            let x = &self.points[k];
            let v = &self.velocities[k];
            let gamma = christoffel_values(&g.components_coords(x))?;
            for a in 0..d {
                let mut res = acc[a];
                for i in 0..d {
                    for j in 0..d {
                        res += gamma[(a * d + i) * d + j] * v[i] * v[j];
                    }
                }
                sup = sup.max(res.abs());
            }
        }
        Ok(sup)
    }

    /// Cubic Hermite evaluation of the position at parameter `t` inside
    /// the covered span.
    pub fn position_at(&self, t: f64) -> Vec<f64> {
        let t0 = self.params[0];
        let h = self.step;
        let n = self.len();
        let kf = ((t - t0) / h).floor();
        let k = (kf.max(0.0) as usize).min(n - 2);
        let s = ((t - self.params[k]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (0..self.dim())
            .map(|i| {
                h00 * self.points[k][i]
                    + h10 * h * self.velocities[k][i]
                    + h01 * self.points[k + 1][i]
                    + h11 * h * self.velocities[k + 1][i]
            })
            .collect()
    }

    /// Projection dropping coordinate 0 (cone radial slot).
    pub fn drop_first_coordinate(&self, chart_id: &str, metric_id: &str) -> GeodesicPath {
        GeodesicPath {
            metric_id: metric_id.to_string(),
            chart_id: chart_id.to_string(),
            step: self.step,
            params: self.params.clone(),
            points: self.points.iter().map(|p| p[1..].to_vec()).collect(),
            velocities: self.velocities.iter().map(|v| v[1..].to_vec()).collect(),
        }
    }
}

/// RK4 on ẋ = v, v̇^k = −Γ^k_{ij} v^i v^j with a fixed step; errors with
/// `LeftChart` as soon as a node exits the chart box.
pub fn integrate_geodesic(
    g: &MetricField,
    p0: &Point,
    v0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<GeodesicPath> {
    g.chart.check_point(p0)?;
    assert!(step > 0.0 && t_end > 0.0);
    let d = g.dim();
    assert_eq!(v0.len(), d);

    let deriv = |x: &[f64], v: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let gamma = christoffel_values(&g.components_coords(x))?;
        let mut dv = vec![0.0; d];
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc -= gamma[(k * d + i) * d + j] * v[i] * v[j];
                }
            }
            dv[k] = acc;
        }
        Ok((v.to_vec(), dv))
    };

    // the step is adjusted to divide the span evenly so the final node
    // lands exactly on t_end
    let n_steps = ((t_end / step).round() as usize).max(1);
    let step = t_end / n_steps as f64;
    let mut x = p0.coords.clone();
    let mut v = v0.to_vec();
    let mut params = Vec::with_capacity(n_steps + 1);
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut velocities = Vec::with_capacity(n_steps + 1);
    params.push(0.0);
    points.push(x.clone());
    velocities.push(v.clone());
    for n in 0..n_steps {
        let (k1x, k1v) = deriv(&x, &v)?;
        let (x2, v2) = shift(&x, &v, &k1x, &k1v, 0.5 * step);
        let (k2x, k2v) = deriv(&x2, &v2)?;
        let (x3, v3) = shift(&x, &v, &k2x, &k2v, 0.5 * step);
        let (k3x, k3v) = deriv(&x3, &v3)?;
        let (x4, v4) = shift(&x, &v, &k3x, &k3v, step);
        let (k4x, k4v) = deriv(&x4, &v4)?;
        for i in 0..d {
            x[i] += step / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += step / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        let t = (n + 1) as f64 * step;
        if !g.chart.contains(&x) {
            return Err(Error::LeftChart { chart: g.chart.id.clone(), param: t });
        }
        params.push(t);
        points.push(x.clone());
        velocities.push(v.clone());
    }
    Ok(GeodesicPath {
        metric_id: g.id.clone(),
        chart_id: g.chart.id.clone(),
        step,
        params,
        points,
        velocities,
    })
}

fn shift(x: &[f64], v: &[f64], kx: &[f64], kv: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let xs = x.iter().zip(kx).map(|(&a, &k)| a + h * k).collect();
    let vs = v.iter().zip(kv).map(|(&a, &k)| a + h * k).collect();
    (xs, vs)
}

/// Radial part of the closed-form cone geodesic.
pub fn cone_radial_r(alpha0: f64, r0: f64, t: f64) -> f64 {
    let beta = alpha0 - alpha0 * alpha0;
    ((alpha0 * t + r0).powi(2) + beta * r0 * r0 * t * t).sqrt()
}

/// Base reparameterization of the closed-form cone geodesic. Undefined
/// at the branch points α₀ ∈ {0, 1}.
pub fn cone_radial_f(alpha0: f64, r0: f64, t: f64) -> Result<f64> {
    let beta = alpha0 - alpha0 * alpha0;
    if beta == 0.0 {
        return Err(Error::BranchUndefined { alpha0 });
    }
    let denom = alpha0 * t + r0;
    if denom == 0.0 {
        return Err(Error::BranchUndefined { alpha0 });
    }
    if beta > 0.0 {
        let s = beta.sqrt();
        Ok((s * r0 * t / denom).atan() / s)
    } else {
        let s = (-beta).sqrt();
        let arg = s * r0 * t / denom;
        if arg.abs() >= 1.0 {
            return Err(Error::BranchUndefined { alpha0 });
        }
        Ok(arg.atanh() / s)
    }
}

/// Both parts of the radial law.
pub fn cone_radial_law(alpha0: f64, r0: f64, t: f64) -> Result<(f64, f64)> {
    Ok((cone_radial_r(alpha0, r0, t), cone_radial_f(alpha0, r0, t)?))
}

/// Result of comparing an integrated cone geodesic against the closed
/// form (projector case, r₀ = 1, α₀ ∈ (0,1)).
#[derive(Clone, Debug)]
pub struct RadialComparison {
    pub alpha0: f64,
    /// sup |r_num(t) − r_closed(t)| along the outward branch
    pub sup_r_dev: f64,
    /// sup |m_num(t) − γ_base(f(t))| along the outward branch
    pub sup_base_dev: f64,
    /// |A∘Γ(1)| on the inward branch (the vanishing point of Y)
    pub a_end: f64,
    /// sup |dA/dt + 2r₀√α₀ √(A)| on the inward branch
    pub a_ode_residual: f64,
    /// sup |d²A/dt² − 2r₀²α₀| (A is quadratic in t)
    pub a_second_dev: f64,
    /// energy drift of the two integrated branches
    pub energy_drift: f64,
}

/// Integrates the cone geodesics through (1, p0) with initial velocity
/// ±rY and checks them against the closed-form radial law and the decay
/// law of A = r²α.
pub fn cone_geodesic_vs_closed_form(
    solution: &ConeSolution,
    p0: &Point,
    t_out: f64,
    step: f64,
) -> Result<RadialComparison> {
    let alpha0 = solution.alpha.value(p0)?;
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::Config(format!("radial comparison needs α₀ ∈ (0,1), got {alpha0}")));
    }
    let r0 = 1.0;
    let cone_p0 = solution.cone.point(r0, &p0.coords);
    let ry = {
        let y = solution.y_vector(&cone_p0)?;
        (r0 * y).iter().copied().collect::<Vec<f64>>()
    };

    // outward branch: +rY, against the printed closed form
    let out_path = integrate_geodesic(&solution.cone.metric, &cone_p0, &ry, t_out, step)?;
    let mut sup_r: f64 = 0.0;
    for (k, &t) in out_path.params.iter().enumerate() {
        let r_closed = cone_radial_r(alpha0, r0, t);
        sup_r = sup_r.max((out_path.points[k][0] - r_closed).abs());
    }

    // base projection: γ_base with initial velocity rX = ½ grad α,
    // compared at the reparameterized times f(t)
    let d = solution.cone.base.dim();
    let rx: Vec<f64> = ry[1..].to_vec();
    let f_end = cone_radial_f(alpha0, r0, t_out)?;
    let base_path =
        integrate_geodesic(&solution.cone.base, p0, &rx, f_end.abs().max(1e-6) * 1.02, step)?;
    let mut sup_base: f64 = 0.0;
    for (k, &t) in out_path.params.iter().enumerate().step_by(10) {
        if t == 0.0 {
            continue;
        }
        let f_t = cone_radial_f(alpha0, r0, t)?;
        let predicted = base_path.position_at(f_t);
        for i in 0..d {
            sup_base = sup_base.max((out_path.points[k][i + 1] - predicted[i]).abs());
        }
    }

    // inward branch: −rY, A = r²α reaches 0 exactly at t = 1
    let neg: Vec<f64> = ry.iter().map(|v| -v).collect();
    let in_path = integrate_geodesic(&solution.cone.metric, &cone_p0, &neg, 1.0, step)?;
    let a_values: Vec<f64> = in_path
        .points
        .iter()
        .map(|x| {
            let a = solution.alpha.eval_coords(&x[1..]).value;
            x[0] * x[0] * a
        })
        .collect();
    let n = a_values.len();
    let a_end = a_values[n - 1].abs();
    let mut a_ode: f64 = 0.0;
    let mut a_second: f64 = 0.0;
    for k in 1..n - 1 {
        let t = in_path.params[k];
        let da = (a_values[k + 1] - a_values[k - 1]) / (2.0 * step);
        if t <= 0.95 {
            let a_k = a_values[k].max(0.0);
            a_ode = a_ode.max((da + 2.0 * r0 * alpha0.sqrt() * a_k.sqrt()).abs());
        }
        let dda = (a_values[k + 1] - 2.0 * a_values[k] + a_values[k - 1]) / (step * step);
        a_second = a_second.max((dda - 2.0 * r0 * r0 * alpha0).abs());
    }

    let drift = out_path
        .energy_drift(&solution.cone.metric)?
        .max(in_path.energy_drift(&solution.cone.metric)?);

    Ok(RadialComparison {
        alpha0,
        sup_r_dev: sup_r,
        sup_base_dev: sup_base,
        a_end,
        a_ode_residual: a_ode,
        a_second_dev: a_second,
        energy_drift: drift,
    })
}

/// Endpoint-error ratio err(h)/err(h/2) against a fine-step reference;
/// ≈ 16 for a fourth-order scheme.
pub fn rk4_convergence_ratio(
    g: &MetricField,
    p0: &Point,
    v0: &[f64],
    t_end: f64,
) -> Result<f64> {
    let reference = integrate_geodesic(g, p0, v0, t_end, 1e-4)?;
    let exact = reference.points.last().unwrap().clone();
    let err = |h: f64| -> Result<f64> {
        let path = integrate_geodesic(g, p0, v0, t_end, h)?;
        let end = path.points.last().unwrap();
        Ok(end
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    };
    Ok(err(1e-2)? / err(5e-3)?)
}

/// g-gradient of a scalar as plain values at a point.
pub fn gradient_values(g: &MetricField, alpha: &crate::field::ScalarField, p: &Point) -> Result<Vec<f64>> {
    let gv = g.values(p)?;
    let a = alpha.eval(p)?;
    let ginv = invert_values(&gv)?;
    let d = g.dim();
    Ok((0..d)
        .map(|i| (0..d).map(|j| ginv[(i, j)] * a.grad[j]).sum())
        .collect())
}
