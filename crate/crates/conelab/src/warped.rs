//! The warped product of a negative-definite hyperbolic leaf with a
//! pseudo-Riemannian fiber, in two charts.
//!
//! Polar chart (s, angles, y): `g = −ds² − sinh²(s)g₁ + cosh²(s)h`
//! with g₁ the round sphere metric — the hyperbolic-projector family
//! over (S^{n₁−1} × N, −g₁ ⊕ h) with S the projection onto the fiber.
//!
//! Hyperboloid-graph chart (u, y): the leaf is parameterized by
//! u ∈ ℝ^{n₁} with metric −[Σdu² − (u·du)²/(1+|u|²)], the warp function
//! is f = √(1+|u|²) and the fiber block is f²h. The warp critical point
//! u = 0 is interior here, which the polar chart cannot offer. In these
//! coordinates the flat-factor projection has α = −|u|², and the
//! sub-projection onto the first flat direction has α = −u₁².

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::families::{
    build_projector, sphere_metric, BaseData, FamilyInstance, ProjectorBranch,
};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::geodesic::GeodesicPath;
use crate::geometry::christoffel_values;
use crate::jet::Jet3;
use crate::linalg::{invert_values, JetMatrix};

pub struct WarpedHyperbolicProduct {
    pub n1: usize,
    /// family form on (s, angles, y)
    pub polar: FamilyInstance,
    /// warp f = cosh(s) on the polar chart
    pub polar_warp: ScalarField,
    /// product metric on (u, y)
    pub cartesian: MetricField,
    /// leaf metric on u alone (negative definite)
    pub leaf_metric: MetricField,
    /// fiber metric (N, h)
    pub fiber_metric: MetricField,
    /// warp f = √(1+|u|²) on the leaf chart
    pub warp: ScalarField,
    /// α of the full flat-factor projection: −|u|²
    pub cartesian_alpha: ScalarField,
    /// α of the projection onto the first flat direction: −u₁²
    pub split_alpha: ScalarField,
}

/// Builds the warped product over the fiber (N, h) with an n₁-dimensional
/// hyperbolic leaf (n₁ ≥ 2).
pub fn build_warped_hyperbolic(n1: usize, fiber: MetricField) -> Result<WarpedHyperbolicProduct> {
    if n1 < 2 {
        return Err(Error::Config("warped leaf needs n1 >= 2".into()));
    }
    let m = fiber.dim();

    // polar chart: base (S^{n1-1} × N, −g₁ ⊕ h), S = fiber projection
    let sphere_neg = sphere_metric(n1 - 1).scaled(-1.0, &format!("neg_s{}", n1 - 1));
    let base_metric = MetricField::product(&sphere_neg, &fiber, "sphere_x_fiber");
    let fiber_for_tensor = fiber.clone();
    let nsphere = n1 - 1;
    let base_dim = base_metric.dim();
    let s_tensor = SymTensorField::from_fn(
        base_metric.chart.clone(),
        "fiber_projection",
        move |jets| {
            let y_vals: Vec<f64> = jets[nsphere..].iter().map(|j| j.value).collect();
            let hm = fiber_for_tensor.components_coords(&y_vals);
            JetMatrix::from_fn(base_dim, |i, j| {
                if i >= nsphere && j >= nsphere {
                    hm.get(i - nsphere, j - nsphere).embed(base_dim, nsphere)
                } else {
                    Jet3::zero(base_dim)
                }
            })
        },
    );
    let base = BaseData::new(base_metric, s_tensor, crate::cone::CaseTag::Projector, (0.1, 3.0))?;
    let polar = build_projector("warped_polar", base, ProjectorBranch::HypNeg)?;
    let polar_warp =
        ScalarField::from_fn(polar.metric.chart.clone(), "cosh_s", |j| j[0].cosh());

    // hyperboloid-graph chart
    let mut lo = vec![-1.2; n1];
    let mut hi = vec![1.2; n1];
    lo.extend_from_slice(&fiber.chart.lo);
    hi.extend_from_slice(&fiber.chart.hi);
    let chart = Chart::new("warped_graph", &lo, &hi);
    let d = n1 + m;
    let fiber_comp = fiber.clone();
    let signature = (fiber.signature.0, fiber.signature.1 + n1);
    let cartesian = MetricField::from_fn(chart.clone(), "warped_graph", signature, move |jets| {
        let one = Jet3::constant(1.0, d);
        let mut u2 = Jet3::zero(d);
        for ju in &jets[..n1] {
            u2 = &u2 + &(ju * ju);
        }
        let f2 = &one + &u2;
        let f2inv = f2.recip().expect("1 + |u|² > 0");
        let y_vals: Vec<f64> = jets[n1..].iter().map(|j| j.value).collect();
        let hm = fiber_comp.components_coords(&y_vals);
        JetMatrix::from_fn(d, |i, j| {
            if i < n1 && j < n1 {
                let mut v = (&(&jets[i] * &jets[j]) * &f2inv).scale(1.0);
                if i == j {
                    v = &v - &one;
                }
                v
            } else if i >= n1 && j >= n1 {
                &f2 * &hm.get(i - n1, j - n1).embed(d, n1)
            } else {
                Jet3::zero(d)
            }
        })
    });

    let leaf_chart = Chart::new("warped_leaf", &vec![-1.2; n1], &vec![1.2; n1]);
    let leaf_metric = MetricField::from_fn(leaf_chart.clone(), "hyperbolic_leaf", (0, n1), move |jets| {
        let one = Jet3::constant(1.0, n1);
        let mut u2 = Jet3::zero(n1);
        for ju in jets {
            u2 = &u2 + &(ju * ju);
        }
        let f2inv = (&one + &u2).recip().expect("1 + |u|² > 0");
        JetMatrix::from_fn(n1, |i, j| {
            let mut v = &(&jets[i] * &jets[j]) * &f2inv;
            if i == j {
                v = &v - &one;
            }
            v
        })
    });
    let warp = ScalarField::from_fn(leaf_chart, "warp", move |jets| {
        let mut u2 = Jet3::constant(1.0, n1);
        for ju in jets {
            u2 = &u2 + &(ju * ju);
        }
        u2.sqrt().expect("1 + |u|² > 0")
    });
    let cartesian_alpha = ScalarField::from_fn(chart.clone(), "neg_u_sq", move |jets| {
        let mut u2 = Jet3::zero(d);
        for ju in &jets[..n1] {
            u2 = &u2 + &(ju * ju);
        }
        u2.scale(-1.0)
    });
    let split_alpha = ScalarField::from_fn(chart, "neg_u1_sq", move |jets| {
        (&jets[0] * &jets[0]).scale(-1.0)
    });

    cartesian.validate(25, 43)?;
    Ok(WarpedHyperbolicProduct {
        n1,
        polar,
        polar_warp,
        cartesian,
        leaf_metric,
        fiber_metric: fiber,
        warp,
        cartesian_alpha,
        split_alpha,
    })
}

impl WarpedHyperbolicProduct {
    pub fn point(&self, u: &[f64], y: &[f64]) -> Point {
        let mut c = u.to_vec();
        c.extend_from_slice(y);
        Point::new(c, &self.cartesian.chart.id)
    }

    /// Residuals of the warped-product geodesic equations along a path
    /// γ = (γ₁, γ₂) on the graph chart:
    ///
    /// ```text
    /// γ₁'' = h(γ₂',γ₂')·(f∘γ₁)·grad f,   γ₂'' = −(2/(f∘γ₁))·(f∘γ₁)'·γ₂',
    /// ```
    ///
    /// where γ₁'' and γ₂'' are covariant accelerations in the leaf and
    /// the fiber, with the plain second derivatives estimated by
    /// differences along the path. Returns the sup of both residuals.
    pub fn warped_geodesic_residual(&self, path: &GeodesicPath) -> Result<f64> {
        let n1 = self.n1;
        let m = self.fiber_metric.dim();
        let mut sup: f64 = 0.0;
        for k in (2..path.len().saturating_sub(2)).step_by(5) {
            let x = &path.points[k];
            let v = &path.velocities[k];
            let acc = path.accel_fd(k);
            let (u, y) = x.split_at(n1);
            let (du, dy) = v.split_at(n1);
            let (ddu, ddy) = acc.split_at(n1);

            // leaf data at u
            let leaf_jets = self.leaf_metric.components_coords(u);
            let leaf_gamma = christoffel_values(&leaf_jets)?;
            let leaf_inv = invert_values(&leaf_jets.values())?;
            let f_jet = self.warp.eval_coords(u);
            let f = f_jet.value;
            let grad_f: Vec<f64> = (0..n1)
                .map(|i| (0..n1).map(|j| leaf_inv[(i, j)] * f_jet.grad[j]).sum())
                .collect();
            let df_dt: f64 = (0..n1).map(|i| f_jet.grad[i] * du[i]).sum();

            // fiber data at y
            let h_vals = self.fiber_metric.components_coords(y).values();
            let h_gamma = christoffel_values(&self.fiber_metric.components_coords(y))?;
            let mut h_speed = 0.0;
            for a in 0..m {
                for b in 0..m {
                    h_speed += h_vals[(a, b)] * dy[a] * dy[b];
                }
            }

            for i in 0..n1 {
                let mut cov = ddu[i];
                for a in 0..n1 {
                    for b in 0..n1 {
                        cov += leaf_gamma[(i * n1 + a) * n1 + b] * du[a] * du[b];
                    }
                }
                let rhs = h_speed * f * grad_f[i];
                sup = sup.max((cov - rhs).abs());
            }
            for a in 0..m {
                let mut cov = ddy[a];
                for b in 0..m {
                    for c in 0..m {
                        cov += h_gamma[(a * m + b) * m + c] * dy[b] * dy[c];
                    }
                }
                let rhs = -2.0 / f * df_dt * dy[a];
                sup = sup.max((cov - rhs).abs());
            }
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{build_cone, CaseTag, ConeSolution};
    use crate::geodesic::integrate_geodesic;
    use crate::geometry::{riemann, sectional_curvature, EndoClass};
    use nalgebra::DMatrix;

    fn flat_line() -> MetricField {
        let chart = Chart::new("line", &[-1.5], &[1.5]);
        MetricField::constant(chart, "flat1", DMatrix::identity(1, 1))
    }

    fn warped() -> WarpedHyperbolicProduct {
        build_warped_hyperbolic(2, flat_line()).unwrap()
    }

    #[test]
    fn polar_leaf_block_has_curvature_one() {
        // the (s, φ) block −ds² − sinh²(s)dφ² alone: negative-definite
        // hyperbolic plane, sectional curvature +1
        let chart = Chart::new("leaf_polar", &[0.2, 0.3], &[2.5, 5.9]);
        let leaf = MetricField::from_fn(chart, "leaf_polar", (0, 2), |j| {
            let d = j.len();
            JetMatrix::from_fn(2, |a, b| match (a, b) {
                (0, 0) => Jet3::constant(-1.0, d),
                (1, 1) => {
                    let s = j[0].sinh();
                    (&s * &s).scale(-1.0)
                }
                _ => Jet3::zero(d),
            })
        });
        for p in leaf.chart.sample_points(8, 3) {
            let r = riemann(&leaf, &p).unwrap();
            let gv = leaf.values(&p).unwrap();
            let k = sectional_curvature(&gv, &r, 0, 1).unwrap();
            assert!((k - 1.0).abs() < 1e-9, "K = {k}");
        }
    }

    #[test]
    fn both_charts_carry_the_projector_solution() {
        let w = warped();
        // polar chart: family residuals
        let sol = w.polar.cone_solution();
        let pts = sol.cone.sample_points(8, 3);
        assert!(sol.parallel_residual(&pts).unwrap() < 1e-7);
        assert_eq!(sol.classify_at(&pts[0]).unwrap().class, EndoClass::Projector);

        // graph chart: α = −|u|² and α = −u₁² both give parallel tensors
        for (alpha, id) in [(&w.cartesian_alpha, "full"), (&w.split_alpha, "split")] {
            let sol = ConeSolution::new(
                build_cone(&w.cartesian),
                alpha.clone(),
                CaseTag::Projector,
            );
            let pts = sol.cone.sample_points(8, 3);
            let res = sol.parallel_residual(&pts).unwrap();
            assert!(res < 1e-9, "{id}: {res}");
            assert_eq!(sol.classify_at(&pts[0]).unwrap().class, EndoClass::Projector);
            assert!(sol.xx_table_residual(&pts).unwrap() < 1e-9);
        }
    }

    #[test]
    fn polar_warp_derivative_vanishes_towards_the_tip() {
        let w = warped();
        // f = cosh(s): f' = sinh(s) shrinks monotonically towards the
        // excluded tip s = 0
        let mut prev = f64::INFINITY;
        for s in [0.8, 0.4, 0.2, 0.12] {
            let mut coords = vec![s];
            coords.extend(w.polar.metric.chart.center().coords[1..].to_vec());
            let jet = w.polar_warp.eval_coords(&coords);
            assert!((jet.value - s.cosh()).abs() < 1e-14);
            assert!((jet.grad[0] - s.sinh()).abs() < 1e-14);
            assert!(jet.grad[0] < prev);
            prev = jet.grad[0];
        }
        assert!(prev < 0.13);
    }

    #[test]
    fn fiber_constant_geodesic_stays_in_leaf() {
        let w = warped();
        let p0 = w.point(&[0.3, -0.1], &[0.2]);
        let path = integrate_geodesic(&w.cartesian, &p0, &[0.2, 0.1, 0.0], 1.0, 1e-3).unwrap();
        // y stays frozen and the equations hold
        for p in &path.points {
            assert!((p[2] - 0.2).abs() < 1e-12);
        }
        assert!(w.warped_geodesic_residual(&path).unwrap() < 1e-5);
    }

    #[test]
    fn critical_point_fiber_is_totally_geodesic() {
        let w = warped();
        let p0 = w.point(&[0.0, 0.0], &[-0.3]);
        let path = integrate_geodesic(&w.cartesian, &p0, &[0.0, 0.0, 0.5], 2.0, 1e-3).unwrap();
        for p in &path.points {
            assert!(p[0].abs() < 1e-10 && p[1].abs() < 1e-10, "left the fiber over O");
        }
        assert!(w.warped_geodesic_residual(&path).unwrap() < 1e-5);
        // fiber geodesic is a straight line in y
        let end = path.points.last().unwrap();
        assert!((end[2] - (-0.3 + 2.0 * 0.5)).abs() < 1e-9);
    }

    #[test]
    fn three_dimensional_leaf_works_too() {
        let w = build_warped_hyperbolic(3, flat_line()).unwrap();
        let sol = ConeSolution::new(
            build_cone(&w.cartesian),
            w.cartesian_alpha.clone(),
            CaseTag::Projector,
        );
        let pts = sol.cone.sample_points(5, 3);
        assert!(sol.parallel_residual(&pts).unwrap() < 1e-9);
        assert_eq!(sol.classify_at(&pts[0]).unwrap().class, EndoClass::Projector);

        let p0 = w.point(&[0.2, -0.1, 0.3], &[0.1]);
        let path =
            integrate_geodesic(&w.cartesian, &p0, &[0.2, 0.1, -0.15, 0.3], 0.8, 1e-3).unwrap();
        assert!(w.warped_geodesic_residual(&path).unwrap() < 1e-4);
    }

    #[test]
    fn generic_geodesic_satisfies_warped_equations() {
        let w = warped();
        let p0 = w.point(&[0.3, -0.2], &[0.1]);
        let path =
            integrate_geodesic(&w.cartesian, &p0, &[0.25, 0.1, 0.4], 1.0, 1e-3).unwrap();
        let res = w.warped_geodesic_residual(&path).unwrap();
        assert!(res < 1e-4, "residual {res}");
        assert!(path.energy_drift(&w.cartesian).unwrap() < 1e-6);
    }
}
