//! Projectively equivalent partner metrics from parallel cone tensors.
//!
//! Shifting a parallel tensor by a·T + b·ĝ keeps it parallel; when the
//! shift is nondegenerate with α' = aα + b > 0 it is itself a cone
//! metric in the radial coordinate ρ = √α'·r, and the base metric it
//! cones over is
//!
//! ```text
//! g' = g + DDα'/(2α') − dα'⊗dα'/(4α'²),
//! ```
//!
//! which shares its unparameterized geodesics with g (projections of
//! cone geodesics are pregeodesics of both) without sharing its
//! connection.

use nalgebra::{DMatrix, DVector};

use crate::chart::Point;
use crate::cone::{tensor_from_alpha, ConeSpace};
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::geodesic::GeodesicPath;
use crate::geometry::christoffel_values;
use crate::jet::Jet3;
use crate::linalg::{self, JetMatrix};

pub struct ProjectivePair {
    pub cone: ConeSpace,
    pub a: f64,
    pub b: f64,
    /// α' = a·α + b on the base
    pub alpha_shift: ScalarField,
    /// the shifted parallel tensor a·T + b·ĝ on the cone
    pub tensor: SymTensorField,
    /// ρ = √α'·r on the cone chart
    pub rho: ScalarField,
    /// the original base metric
    pub base_metric: MetricField,
    /// the partner metric g'
    pub partner: MetricField,
}

/// Builds the partner metric for the shift (a, b) of the tensor
/// associated to `alpha`. Admissibility (α' > 0 and nondegeneracy of
/// the shifted tensor) is checked on cone samples.
pub fn projective_partner(
    cone: &ConeSpace,
    alpha: &ScalarField,
    a: f64,
    b: f64,
) -> Result<ProjectivePair> {
    let base = cone.base.clone();
    let d = base.dim();
    let alpha_shift = ScalarField::from_fn(
        base.chart.clone(),
        &format!("shift_{a}_{b}_{}", alpha.id),
        {
            let af = alpha.clone();
            move |jets| {
                let v = af.eval_jets(jets);
                &v.scale(a) + &Jet3::constant(b, v.dim)
            }
        },
    );

    // shifted tensor on the cone: a·T + b·ĝ
    let t_alpha = tensor_from_alpha(cone, alpha);
    let ghat = cone.metric.clone();
    let tensor = SymTensorField::from_fn(
        cone.metric.chart.clone(),
        &format!("shifted_tensor_{a}_{b}"),
        move |jets| {
            let tm = t_alpha.components_jets(jets);
            let gm = ghat.components_jets(jets);
            JetMatrix::from_fn(tm.n, |i, j| &tm.get(i, j).scale(a) + &gm.get(i, j).scale(b))
        },
    );

    // admissibility on samples
    for p in cone.sample_points(30, 47) {
        let m = cone.base_point(&p);
        let av = alpha_shift.value(&m)?;
        if av <= 0.0 {
            return Err(Error::InadmissibleShift {
                a,
                b,
                reason: format!("shifted alpha = {av} not positive at {:?}", m.coords),
            });
        }
        let tv = tensor.values(&p)?;
        let det = tv.determinant();
        if det.abs() <= 1e-12 {
            return Err(Error::InadmissibleShift {
                a,
                b,
                reason: format!("shifted tensor degenerate (det {det:e}) at {:?}", p.coords),
            });
        }
    }

    let rho = {
        let ash = alpha_shift.clone();
        let d1 = cone.dim();
        ScalarField::from_fn(cone.metric.chart.clone(), &format!("rho_{a}_{b}"), move |jets| {
            let base_vals: Vec<f64> = jets[1..].iter().map(|j| j.value).collect();
            let av = ash.eval_coords(&base_vals).embed(d1, 1);
            &jets[0] * &av.sqrt().expect("shifted alpha positive on chart")
        })
    };

    // partner metric g' = g + DDα'/(2α') − dα'⊗dα'/(4α'²)
    let gbase = base.clone();
    let ash = alpha_shift.clone();
    let comp = move |jets: &[Jet3]| {
        let gm = gbase.components_jets(jets);
        let av = ash.eval_jets(jets);
        let gamma = crate::geometry::christoffel_from_jets(&gm)
            .expect("base metric degenerate inside partner evaluator");
        let dd = crate::geometry::covariant_hessian_jets(&gamma, &av);
        let inv2a = av.scale(2.0).recip().expect("shifted alpha positive");
        let inv4a2 = (&av * &av).scale(4.0).recip().expect("shifted alpha positive");
        JetMatrix::from_fn(d, |i, j| {
            let grad_term = (&av.partial(i) * &av.partial(j)) * &inv4a2;
            &(gm.get(i, j) + &(dd.get(i, j) * &inv2a)) - &grad_term
        })
    };
    // signature read off the center point
    let center = base.chart.center();
    let center_jets = crate::jet::seed_all(&center.coords);
    let sig = linalg::signature_of(&comp(&center_jets).values(), 1e-12);
    let partner = MetricField::from_fn(
        base.chart.clone(),
        &format!("partner_{a}_{b}_of_{}", base.id),
        sig,
        comp,
    );

    Ok(ProjectivePair {
        cone: cone.clone(),
        a,
        b,
        alpha_shift,
        tensor,
        rho,
        base_metric: base,
        partner,
    })
}

impl ProjectivePair {
    /// sup |T' − (dρ² + ρ²g')| over cone samples: the shifted tensor
    /// reassembles as a cone metric in the radial coordinate ρ.
    pub fn reassembly_residual(&self, points: &[Point]) -> Result<f64> {
        let d = self.base_metric.dim();
        let mut sup: f64 = 0.0;
        for p in points {
            let t = self.tensor.values(p)?;
            let rho = self.rho.eval(p)?;
            let m = self.cone.base_point(p);
            let gp = self.partner.values(&m)?;
            for i in 0..=d {
                for j in 0..=d {
                    let mut v = rho.grad[i] * rho.grad[j];
                    if i > 0 && j > 0 {
                        v += rho.value * rho.value * gp[(i - 1, j - 1)];
                    }
                    sup = sup.max((t[(i, j)] - v).abs());
                }
            }
        }
        Ok(sup)
    }
}

/// sup over interior nodes of the non-tangential part of the covariant
/// acceleration of `path` with respect to `g`: zero exactly when the
/// path is a geodesic up to reparameterization.
///
/// The tangential split uses the Euclidean coordinate inner product as
/// gauge: the pregeodesic property is metric-free and γ̇ may be
/// g-null. Near g-null velocities the scale-invariant wedge norm
/// |a ∧ γ̇| replaces the orthogonal projection.
pub fn pregeodesic_residual(g: &MetricField, path: &GeodesicPath) -> Result<f64> {
    let d = path.dim();
    assert_eq!(d, g.dim());
    let mut sup: f64 = 0.0;
    for k in 2..path.len().saturating_sub(2) {
        let x = &path.points[k];
        let v = &path.velocities[k];
        let acc = path.accel_fd(k);
        let gamma = christoffel_values(&g.components_coords(x))?;
        let mut a = vec![0.0; d];
        for c in 0..d {
            let mut val = acc[c];
            for i in 0..d {
                for j in 0..d {
                    val += gamma[(c * d + i) * d + j] * v[i] * v[j];
                }
            }
            a[c] = val;
        }
        let gv = g.components_coords(x).values();
        let mut gnorm = 0.0;
        for i in 0..d {
            for j in 0..d {
                gnorm += gv[(i, j)] * v[i] * v[j];
            }
        }
        let dot = |p: &[f64], q: &[f64]| -> f64 { p.iter().zip(q).map(|(x, y)| x * y).sum() };
        let av = dot(&a, v);
        let vv = dot(v, v);
        let res = if gnorm.abs() < 1e-8 {
            let aa = dot(&a, &a);
            (aa * vv - av * av).max(0.0).sqrt()
        } else {
            let mut s = 0.0;
            for i in 0..d {
                let perp = a[i] - av / vv * v[i];
                s += perp * perp;
            }
            s.sqrt()
        };
        sup = sup.max(res);
    }
    Ok(sup)
}

#[derive(Clone, Debug)]
pub struct AffineComparison {
    /// max over samples and indices of |Γ(g) − Γ(g')|
    pub max_connection_diff: f64,
    /// residual of the best fit ΔΓ^k_{ij} ≈ δ^k_i ψ_j + δ^k_j ψ_i
    pub projective_form_residual: f64,
}

/// Compares the connections of two metrics on a shared chart. A large
/// connection difference certifies that the metrics are not affinely
/// equivalent; the fit residual reports whether the difference tensor
/// has the projective shape (diagnostic).
pub fn affine_inequivalence_check(
    g: &MetricField,
    g_prime: &MetricField,
    points: &[Point],
) -> Result<AffineComparison> {
    let d = g.dim();
    let mut max_diff: f64 = 0.0;
    let mut fit_res: f64 = 0.0;
    for p in points {
        let ga = christoffel_values(&g.components_coords(&p.coords))?;
        let gb = christoffel_values(&g_prime.components_coords(&p.coords))?;
        let diff: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
        for &v in &diff {
            max_diff = max_diff.max(v.abs());
        }
        // least-squares ψ_j = Σ_k ΔΓ^k_{kj} / (d + 1)
        let mut psi = DVector::zeros(d);
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += diff[(k * d + k) * d + j];
            }
            psi[j] = acc / (d as f64 + 1.0);
        }
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let model = if k == i { psi[j] } else { 0.0 }
                        + if k == j { psi[i] } else { 0.0 };
                    fit_res = fit_res.max((diff[(k * d + i) * d + j] - model).abs());
                }
            }
        }
    }
    Ok(AffineComparison { max_connection_diff: max_diff, projective_form_residual: fit_res })
}

/// Smallest singular value of the span of symmetric matrices evaluated
/// at a point, as a linear-independence certificate.
pub fn tensor_independence(mats: &[DMatrix<f64>]) -> f64 {
    let d = mats[0].nrows();
    let rows = mats.len();
    let cols = d * (d + 1) / 2;
    let mut stack = DMatrix::zeros(rows, cols);
    for (r, m) in mats.iter().enumerate() {
        let scale = linalg::max_abs(m).max(1e-300);
        let mut c = 0;
        for i in 0..d {
            for j in i..d {
                stack[(r, c)] = m[(i, j)] / scale;
                c += 1;
            }
        }
    }
    let svd = stack.svd(false, false);
    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::cone::build_cone;
    use crate::families::{round_sphere_2, sphere_height_squared};
    use crate::geodesic::integrate_geodesic;

    #[test]
    fn identity_partner_reproduces_the_metric() {
        let g = round_sphere_2();
        let cone = build_cone(&g);
        let alpha = sphere_height_squared();
        let pair = projective_partner(&cone, &alpha, 0.0, 1.0).unwrap();
        for p in g.chart.sample_points(10, 3) {
            let a = g.values(&p).unwrap();
            let b = pair.partner.values(&p).unwrap();
            assert!(linalg::max_abs(&(a - b)) < 1e-12);
        }
        let pts = cone.sample_points(10, 3);
        assert!(pair.reassembly_residual(&pts).unwrap() < 1e-12);
        let cmp = affine_inequivalence_check(&g, &pair.partner, &g.chart.sample_points(10, 3))
            .unwrap();
        assert!(cmp.max_connection_diff < 1e-10);
    }

    #[test]
    fn scaled_metric_shares_the_connection() {
        let g = round_sphere_2();
        let g2 = g.scaled(2.0, "doubled");
        let cmp =
            affine_inequivalence_check(&g, &g2, &g.chart.sample_points(8, 5)).unwrap();
        assert!(cmp.max_connection_diff < 1e-12);
    }

    #[test]
    fn sphere_partner_is_projectively_but_not_affinely_equivalent() {
        let g = round_sphere_2();
        let cone = build_cone(&g);
        let alpha = sphere_height_squared();
        let pair = projective_partner(&cone, &alpha, 1.0, 2.0).unwrap();
        let pts = cone.sample_points(10, 7);
        assert!(pair.reassembly_residual(&pts).unwrap() < 1e-10);

        // projected cone geodesic is pregeodesic for both
        let p0 = cone.point(1.0, &[1.1, 0.4]);
        let v0 = [0.1, 0.4, 0.3];
        let cone_path = integrate_geodesic(&cone.metric, &p0, &v0, 0.5, 1e-3).unwrap();
        let projected = cone_path.drop_first_coordinate(&g.chart.id, &g.id);
        assert!(pregeodesic_residual(&g, &projected).unwrap() < 1e-5);
        assert!(pregeodesic_residual(&pair.partner, &projected).unwrap() < 1e-5);

        let cmp = affine_inequivalence_check(&g, &pair.partner, &g.chart.sample_points(10, 7))
            .unwrap();
        assert!(cmp.max_connection_diff > 1e-2, "diff {}", cmp.max_connection_diff);
        assert!(cmp.projective_form_residual < 1e-6, "fit {}", cmp.projective_form_residual);
    }

    #[test]
    fn actual_geodesics_pass_the_pregeodesic_test() {
        let g = round_sphere_2();
        let p0 = crate::chart::Point::new(vec![1.2, 0.5], &g.chart.id);
        let path = integrate_geodesic(&g, &p0, &[0.6, 0.5], 1.2, 1e-3).unwrap();
        assert!(pregeodesic_residual(&g, &path).unwrap() < 1e-8);
    }

    #[test]
    fn inadmissible_shifts_are_rejected() {
        let g = round_sphere_2();
        let cone = build_cone(&g);
        let alpha = sphere_height_squared();
        // α' = cos²θ − 2 is negative everywhere
        assert!(matches!(
            projective_partner(&cone, &alpha, 1.0, -2.0),
            Err(crate::error::Error::InadmissibleShift { .. })
        ));
    }

    #[test]
    fn non_geodesic_curve_fails_the_pregeodesic_test() {
        let chart = Chart::new("flat2", &[-2.0, -2.0], &[2.0, 2.0]);
        let g = MetricField::constant(chart, "flat2", nalgebra::DMatrix::identity(2, 2));
        // unit circle traversed at unit speed: acceleration ⊥ velocity
        let step = 1e-2;
        let n = 100;
        let params: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        let points: Vec<Vec<f64>> = params.iter().map(|t| vec![t.cos(), t.sin()]).collect();
        let velocities: Vec<Vec<f64>> = params.iter().map(|t| vec![-t.sin(), t.cos()]).collect();
        let path = GeodesicPath {
            metric_id: g.id.clone(),
            chart_id: g.chart.id.clone(),
            step,
            params,
            points,
            velocities,
        };
        assert!(pregeodesic_residual(&g, &path).unwrap() > 1e-1);
    }

    #[test]
    fn independence_certificate_behaves() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(tensor_independence(&[a.clone(), b, c]) > 1e-3);
        let a2 = a.clone() * 2.0;
        assert!(tensor_independence(&[a, a2]) < 1e-12);
    }
}
