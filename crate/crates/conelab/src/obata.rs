//! Residual of the third-order equation and the α-profiles along the
//! normalized gradient flow.
//!
//! The equation tested is
//!
//! ```text
//! DDDα(X,Y,Z) + 2 Dα(X)g(Y,Z) + Dα(Y)g(X,Z) + Dα(Z)g(X,Y) = 0,
//! ```
//!
//! and along an integral curve of X̄ = −grad α/√|g(grad α, grad α)| a
//! solution follows one of six closed-form profiles depending on the
//! case and the range of α.

use crate::chart::Point;
use crate::cone::CaseTag;
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField};
use crate::geometry::{christoffel_from_jets, covariant_third};
use crate::jet::Jet3;

/// Pointwise sup-residual report for one (metric, scalar) pair.
#[derive(Clone, Debug)]
pub struct ObataReport {
    pub metric_id: String,
    pub alpha_id: String,
    pub n_points: usize,
    pub per_point: Vec<(Point, f64)>,
    pub sup_residual: f64,
}

/// The full residual tensor at one point, flat index (i·d + j)·d + k.
pub fn obata_residual_tensor(
    g: &MetricField,
    alpha: &ScalarField,
    p: &Point,
) -> Result<Vec<f64>> {
    let d = g.dim();
    let third = covariant_third(g, alpha, p)?;
    let a = alpha.eval(p)?;
    let gv = g.values(p)?;
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[(i * d + j) * d + k] = third[(i * d + j) * d + k]
                    + 2.0 * a.grad[i] * gv[(j, k)]
                    + a.grad[j] * gv[(i, k)]
                    + a.grad[k] * gv[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Evaluates the equation residual at each point and reports the sup.
pub fn obata_residual(
    g: &MetricField,
    alpha: &ScalarField,
    points: &[Point],
) -> Result<ObataReport> {
    let mut per_point = Vec::with_capacity(points.len());
    let mut sup: f64 = 0.0;
    for p in points {
        let tensor = obata_residual_tensor(g, alpha, p)?;
        let local = tensor.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        sup = sup.max(local);
        per_point.push((p.clone(), local));
    }
    Ok(ObataReport {
        metric_id: g.id.clone(),
        alpha_id: alpha.id.clone(),
        n_points: points.len(),
        per_point,
        sup_residual: sup,
    })
}

/// The six closed-form α-profiles along the flow of X̄.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaProfile {
    /// cos²(s+c), projector with 0 < α < 1
    CosSquared,
    /// cosh²(s+c), projector with α > 1
    CoshSquared,
    /// −sinh²(s+c), projector with α < 0
    NegSinhSquared,
    /// e^{2s+c}, nilpotent with α > 0
    ExpGrowth,
    /// −e^{−2s+c}, nilpotent with α < 0
    NegExpDecay,
    /// sinh(2s+c), complex
    SinhDouble,
}

impl AlphaProfile {
    pub fn select(case: CaseTag, alpha0: f64) -> Result<AlphaProfile> {
        match case {
            CaseTag::Projector => {
                if alpha0 > 0.0 && alpha0 < 1.0 {
                    Ok(AlphaProfile::CosSquared)
                } else if alpha0 > 1.0 {
                    Ok(AlphaProfile::CoshSquared)
                } else if alpha0 < 0.0 {
                    Ok(AlphaProfile::NegSinhSquared)
                } else {
                    Err(Error::NearSingularLevel { value: alpha0 })
                }
            }
            CaseTag::Nilpotent => {
                if alpha0 > 0.0 {
                    Ok(AlphaProfile::ExpGrowth)
                } else if alpha0 < 0.0 {
                    Ok(AlphaProfile::NegExpDecay)
                } else {
                    Err(Error::NearSingularLevel { value: alpha0 })
                }
            }
            CaseTag::Complex => Ok(AlphaProfile::SinhDouble),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AlphaProfile::CosSquared => "cos_squared",
            AlphaProfile::CoshSquared => "cosh_squared",
            AlphaProfile::NegSinhSquared => "neg_sinh_squared",
            AlphaProfile::ExpGrowth => "exp_growth",
            AlphaProfile::NegExpDecay => "neg_exp_decay",
            AlphaProfile::SinhDouble => "sinh_double",
        }
    }

    /// Fits the phase constant from the initial value and the sign of
    /// dα/ds at s = 0.
    pub fn fit_constant(&self, alpha0: f64, slope0: f64) -> f64 {
        match self {
            AlphaProfile::CosSquared => {
                let c = alpha0.sqrt().clamp(-1.0, 1.0).acos();
                // d/ds cos²(s+c) at 0 is −sin(2c)
                if slope0 <= 0.0 {
                    c
                } else {
                    -c
                }
            }
            AlphaProfile::CoshSquared => {
                let c = alpha0.sqrt().acosh();
                if slope0 >= 0.0 {
                    c
                } else {
                    -c
                }
            }
            AlphaProfile::NegSinhSquared => {
                let c = (-alpha0).sqrt().asinh();
                // d/ds −sinh²(s+c) at 0 is −sinh(2c)
                if slope0 <= 0.0 {
                    c
                } else {
                    -c
                }
            }
            AlphaProfile::ExpGrowth => alpha0.ln(),
            AlphaProfile::NegExpDecay => (-alpha0).ln(),
            AlphaProfile::SinhDouble => alpha0.asinh(),
        }
    }

    pub fn value(&self, s: f64, c: f64) -> f64 {
        match self {
            AlphaProfile::CosSquared => (s + c).cos().powi(2),
            AlphaProfile::CoshSquared => (s + c).cosh().powi(2),
            AlphaProfile::NegSinhSquared => -(s + c).sinh().powi(2),
            AlphaProfile::ExpGrowth => (2.0 * s + c).exp(),
            AlphaProfile::NegExpDecay => -(-2.0 * s + c).exp(),
            AlphaProfile::SinhDouble => (2.0 * s + c).sinh(),
        }
    }
}

/// Outcome of following the flow of X̄ from a start point.
#[derive(Clone, Debug)]
pub struct ProfileOutcome {
    pub profile: AlphaProfile,
    pub phase: f64,
    /// sup |α(γ(s)) − profile(s)|
    pub sup_deviation: f64,
    /// sup |D_X̄ X̄| along the trajectory
    pub flow_geodesic_residual: f64,
    /// (s, measured α, profile α) samples for export
    pub trace: Vec<(f64, f64, f64)>,
}

const FLOW_STEP: f64 = 1e-3;
const SINGULAR_LEVEL_GUARD: f64 = 1e-6;

/// Jets of X̄ = −grad α / √|g(grad α, grad α)| at given coordinates,
/// together with the squared-norm jet of grad α.
fn xbar_jets(g: &MetricField, alpha: &ScalarField, coords: &[f64]) -> Result<(Vec<Jet3>, Jet3)> {
    let d = g.dim();
    let gj = g.components_coords(coords);
    let ginv = gj.inverse()?;
    let a = alpha.eval_coords(coords);
    let w: Vec<Jet3> = (0..d)
        .map(|i| {
            let mut acc = Jet3::zero(d);
            for j in 0..d {
                acc = &acc + &(ginv.get(i, j) * &a.partial(j));
            }
            acc
        })
        .collect();
    let mut n2 = Jet3::zero(d);
    for i in 0..d {
        for j in 0..d {
            n2 = &n2 + &(&(gj.get(i, j) * &w[i]) * &w[j]);
        }
    }
    let abs_n2 = if n2.value < 0.0 { n2.scale(-1.0) } else { n2.clone() };
    if abs_n2.value < SINGULAR_LEVEL_GUARD {
        return Err(Error::NearSingularLevel { value: abs_n2.value });
    }
    let inv_norm = abs_n2.sqrt()?.recip()?;
    let xbar: Vec<Jet3> = w.iter().map(|wi| (wi * &inv_norm).scale(-1.0)).collect();
    Ok((xbar, n2))
}

/// |D_X̄ X̄| (sup over components) at given coordinates.
fn flow_geodesic_residual_at(g: &MetricField, alpha: &ScalarField, coords: &[f64]) -> Result<f64> {
    let d = g.dim();
    let (xbar, _) = xbar_jets(g, alpha, coords)?;
    let gj = g.components_coords(coords);
    let gamma = christoffel_from_jets(&gj)?;
    let mut sup: f64 = 0.0;
    for k in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            let mut di = xbar[k].grad[i];
            for j in 0..d {
                di += gamma.val(k, i, j) * xbar[j].value;
            }
            acc += xbar[i].value * di;
        }
        sup = sup.max(acc.abs());
    }
    Ok(sup)
}

/// Integrates the flow of X̄ from `p0` for parameter length `s_max`
/// (fixed-step RK4) and compares α along the trajectory against the
/// closed-form profile for the case. The flow field is checked to be
/// geodesic along the way.
pub fn profile_check(
    g: &MetricField,
    alpha: &ScalarField,
    case: CaseTag,
    p0: &Point,
    s_max: f64,
) -> Result<ProfileOutcome> {
    g.chart.check_point(p0)?;
    let alpha0 = alpha.value(p0)?;
    let profile = AlphaProfile::select(case, alpha0)?;

    let deriv = |coords: &[f64]| -> Result<Vec<f64>> {
        let (xbar, _) = xbar_jets(g, alpha, coords)?;
        Ok(xbar.iter().map(|j| j.value).collect())
    };

    let n_steps = (s_max / FLOW_STEP).round() as usize;
    let mut x = p0.coords.clone();
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push((0.0, alpha0));
    let mut geo_res: f64 = 0.0;
    for step in 0..n_steps {
        let s = step as f64 * FLOW_STEP;
        if step % 25 == 0 {
            geo_res = geo_res.max(flow_geodesic_residual_at(g, alpha, &x)?);
        }
        let h = FLOW_STEP;
        let k1 = deriv(&x)?;
        let k2 = deriv(&rk_shift(&x, &k1, 0.5 * h))?;
        let k3 = deriv(&rk_shift(&x, &k2, 0.5 * h))?;
        let k4 = deriv(&rk_shift(&x, &k3, h))?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !g.chart.contains(&x) {
            return Err(Error::LeftChart { chart: g.chart.id.clone(), param: s + h });
        }
        samples.push((s + h, alpha.eval_coords(&x).value));
    }
    geo_res = geo_res.max(flow_geodesic_residual_at(g, alpha, &x)?);

    let slope0 = (samples[1].1 - samples[0].1) / FLOW_STEP;
    let phase = profile.fit_constant(alpha0, slope0);
    let mut sup: f64 = 0.0;
    let trace: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|&(s, measured)| {
            let predicted = profile.value(s, phase);
            sup = sup.max((measured - predicted).abs());
            (s, measured, predicted)
        })
        .collect();

    Ok(ProfileOutcome {
        profile,
        phase,
        sup_deviation: sup,
        flow_geodesic_residual: geo_res,
        trace,
    })
}

fn rk_shift(x: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(&xi, &ki)| xi + h * ki).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::round_sphere_2;

    fn sphere_solution() -> (MetricField, ScalarField) {
        let g = round_sphere_2();
        // restriction of the ambient z² to the sphere: cos²θ
        let alpha = ScalarField::from_fn(g.chart.clone(), "cos2_theta", |j| {
            let c = j[0].cos();
            &c * &c
        });
        (g, alpha)
    }

    #[test]
    fn sphere_alpha_is_a_solution() {
        let (g, alpha) = sphere_solution();
        let pts = g.chart.sample_points(30, 42);
        let report = obata_residual(&g, &alpha, &pts).unwrap();
        assert!(report.sup_residual < 1e-10, "sup {}", report.sup_residual);
    }

    #[test]
    fn constants_solve_trivially() {
        let (g, _) = sphere_solution();
        let c = ScalarField::constant(g.chart.clone(), "const", 4.2);
        let pts = g.chart.sample_points(10, 3);
        let rep = obata_residual(&g, &c, &pts).unwrap();
        assert_eq!(rep.sup_residual, 0.0);
        assert_eq!(rep.n_points, 10);
        assert!(rep.per_point.iter().all(|(_, r)| *r == 0.0));
    }

    #[test]
    fn shift_invariance_and_linearity() {
        let (g, alpha) = sphere_solution();
        let shifted = ScalarField::from_fn(g.chart.clone(), "cos2_plus_k", |j| {
            let c = j[0].cos();
            &(&c * &c) + &Jet3::constant(2.5, j.len())
        });
        // a non-solution to make the linearity check non-trivial
        let beta = ScalarField::from_fn(g.chart.clone(), "theta", |j| j[0].clone());
        let combo = ScalarField::from_fn(g.chart.clone(), "cos2_plus_theta", |j| {
            let c = j[0].cos();
            &(&c * &c) + &j[0]
        });
        let pts = g.chart.sample_points(15, 7);
        let r_alpha = obata_residual(&g, &alpha, &pts).unwrap();
        let r_shift = obata_residual(&g, &shifted, &pts).unwrap();
        assert!((r_alpha.sup_residual - r_shift.sup_residual).abs() < 1e-12);

        // residual tensor of a sum equals the sum of residual tensors
        let theta3 = ScalarField::from_fn(g.chart.clone(), "theta3", |j| {
            (&j[0] * &j[0]) * &j[0]
        });
        let both = ScalarField::from_fn(g.chart.clone(), "theta_plus_theta3", |j| {
            &j[0] + &((&j[0] * &j[0]) * &j[0])
        });
        for p in &pts {
            let ta = obata_residual_tensor(&g, &beta, p).unwrap();
            let tb = obata_residual_tensor(&g, &theta3, p).unwrap();
            let tsum = obata_residual_tensor(&g, &both, p).unwrap();
            for idx in 0..ta.len() {
                assert!((tsum[idx] - ta[idx] - tb[idx]).abs() < 1e-10);
            }
        }

        // since alpha solves the equation, residual(alpha + beta) agrees
        // with residual(beta) pointwise
        let r_beta = obata_residual(&g, &beta, &pts).unwrap();
        let r_combo = obata_residual(&g, &combo, &pts).unwrap();
        for (a, b) in r_beta.per_point.iter().zip(&r_combo.per_point) {
            assert!((a.1 - b.1).abs() < 1e-10);
        }
        assert!(r_beta.sup_residual > 1e-1);
    }

    #[test]
    fn sphere_profile_follows_cos_squared() {
        let (g, alpha) = sphere_solution();
        // θ0 = 1.0: α = cos²θ ∈ (0,1), flow pushes θ towards π/2
        let p0 = Point::new(vec![1.0, 0.5], &g.chart.id);
        let out = profile_check(&g, &alpha, CaseTag::Projector, &p0, 0.4).unwrap();
        assert_eq!(out.profile, AlphaProfile::CosSquared);
        assert!(out.sup_deviation < 1e-7, "dev {}", out.sup_deviation);
        assert!(out.flow_geodesic_residual < 1e-7);
    }

    #[test]
    fn flow_leaving_the_chart_is_reported() {
        // α = e^{2s} grows along the flow, which runs through the upper
        // chart edge s = 0.8 before the requested length is covered
        let inst = crate::fixtures::nilpotent_flat();
        let p0 = Point::new(vec![0.5, 0.0, 0.0], &inst.metric.chart.id);
        assert!(matches!(
            profile_check(&inst.metric, &inst.alpha, CaseTag::Nilpotent, &p0, 0.6),
            Err(Error::LeftChart { .. })
        ));
    }

    #[test]
    fn singular_level_is_detected() {
        let (g, alpha) = sphere_solution();
        // at θ = π/2 the gradient of cos²θ vanishes: singular level
        let p0 = Point::new(vec![std::f64::consts::FRAC_PI_2, 1.0], &g.chart.id);
        assert!(matches!(
            profile_check(&g, &alpha, CaseTag::Projector, &p0, 0.2),
            Err(Error::NearSingularLevel { .. })
        ));
    }
}
