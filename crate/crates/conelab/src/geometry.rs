//! Levi-Civita connection, curvature and covariant derivatives.
//!
//! Index conventions: tensors are stored fully covariant except the
//! Christoffel symbols Γ^k_{ij} and the curvature R^l_{ijk} (one upper
//! first slot). `R(e_i,e_j)e_k = R^l_{ijk} e_l`, antisymmetric in
//! (i,j); a metric of constant curvature K satisfies
//! `R^l_{ijk} = K (g_{jk} δ^l_i − g_{ik} δ^l_j)`.

use nalgebra::DMatrix;

use crate::chart::Point;
use crate::error::Result;
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::jet::Jet3;
use crate::linalg::{self, JetMatrix};

pub mod oracle;

/// Christoffel symbols as jets: values plus first (and second)
/// coordinate derivatives, inherited from exact metric jets.
pub struct Christoffel {
    pub d: usize,
    /// Γ^k_{ij} at flat index (k·d + i)·d + j.
    pub sym: Vec<Jet3>,
}

impl Christoffel {
    #[inline]
    pub fn jet(&self, k: usize, i: usize, j: usize) -> &Jet3 {
        &self.sym[(k * self.d + i) * self.d + j]
    }

    #[inline]
    pub fn val(&self, k: usize, i: usize, j: usize) -> f64 {
        self.jet(k, i, j).value
    }

    /// ∂_m Γ^k_{ij}.
    #[inline]
    pub fn deriv(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        self.jet(k, i, j).grad[m]
    }
}

/// Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}) from the
/// jet components of the metric at a point.
pub fn christoffel_from_jets(g: &JetMatrix) -> Result<Christoffel> {
    let d = g.n;
    let ginv = g.inverse()?;
    // ∂_i g_{jl} as jets, one order down
    let mut dg = vec![Jet3::zero(0); d * d * d];
    for i in 0..d {
        for j in 0..d {
            for l in j..d {
                let p = g.get(j, l).partial(i);
                dg[(i * d + j) * d + l] = p.clone();
                dg[(i * d + l) * d + j] = p;
            }
        }
    }
    let idx = |i: usize, j: usize, l: usize| (i * d + j) * d + l;
    let mut sym: Vec<Jet3> = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                if j < i {
                    // Γ^k_{ij} = Γ^k_{ji}: reuse the computed entry
                    let prev = sym[(k * d + j) * d + i].clone();
                    sym.push(prev);
                    continue;
                }
                let mut acc = Jet3::zero(dg[0].dim);
                for l in 0..d {
                    let s = &(&dg[idx(i, j, l)] + &dg[idx(j, i, l)]) - &dg[idx(l, i, j)];
                    acc = &acc + &(ginv.get(k, l) * &s);
                }
                sym.push(acc.scale(0.5));
            }
        }
    }
    Ok(Christoffel { d, sym })
}

/// Christoffel symbols (with first derivatives) at a point of a
/// metric field.
pub fn christoffel(g: &MetricField, p: &Point) -> Result<Christoffel> {
    christoffel_from_jets(&g.components(p)?)
}

/// Fast value-only Christoffel symbols (f64 inverse, no jet division);
/// used inside integration loops.
pub fn christoffel_values(g: &JetMatrix) -> Result<Vec<f64>> {
    let d = g.n;
    let ginv = linalg::invert_values(&g.values())?;
    let mut out = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut acc = 0.0;
                for l in 0..d {
                    let s = g.get(j, l).grad[i] + g.get(i, l).grad[j] - g.get(i, j).grad[l];
                    acc += ginv[(k, l)] * s;
                }
                acc *= 0.5;
                out[(k * d + i) * d + j] = acc;
                out[(k * d + j) * d + i] = acc;
            }
        }
    }
    Ok(out)
}

/// Curvature values R^l_{ijk}.
pub struct Riemann {
    pub d: usize,
    data: Vec<f64>,
}

impl Riemann {
    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.d;
        self.data[((l * d + i) * d + j) * d + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    /// R^l_{ijk} + R^l_{jki} + R^l_{kij}, sup over indices.
    pub fn first_bianchi_residual(&self) -> f64 {
        let d = self.d;
        let mut m: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let s = self.get(l, i, j, k) + self.get(l, j, k, i) + self.get(l, k, i, j);
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }

    /// sup |R^l_{ijk} + R^l_{jik}| (antisymmetry in the pair (i,j)).
    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.d;
        let mut m: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        m = m.max((self.get(l, i, j, k) + self.get(l, j, i, k)).abs());
                    }
                }
            }
        }
        m
    }
}

pub fn riemann_from_christoffel(gamma: &Christoffel) -> Riemann {
    let d = gamma.d;
    let mut data = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = gamma.deriv(i, l, j, k) - gamma.deriv(j, l, i, k);
                    for m in 0..d {
                        v += gamma.val(l, i, m) * gamma.val(m, j, k)
                            - gamma.val(l, j, m) * gamma.val(m, i, k);
                    }
                    data[((l * d + i) * d + j) * d + k] = v;
                }
            }
        }
    }
    Riemann { d, data }
}

pub fn riemann(g: &MetricField, p: &Point) -> Result<Riemann> {
    Ok(riemann_from_christoffel(&christoffel(g, p)?))
}

/// Sectional curvature of the coordinate plane (e_i, e_j); `None` when
/// the plane is degenerate for g.
pub fn sectional_curvature(g: &DMatrix<f64>, r: &Riemann, i: usize, j: usize) -> Option<f64> {
    let denom = g[(i, i)] * g[(j, j)] - g[(i, j)] * g[(i, j)];
    if denom.abs() < 1e-8 {
        return None;
    }
    let mut num = 0.0;
    for l in 0..r.d {
        num += r.get(l, i, j, j) * g[(l, i)];
    }
    Some(num / denom)
}

/// Jet of ∂_i∂_j f, valid to order 1.
fn second_partial_jet(f: &Jet3, i: usize, j: usize) -> Jet3 {
    let d = f.dim;
    let mut out = Jet3::zero(d);
    out.value = f.h(i, j);
    for m in 0..d {
        out.grad[m] = f.t3(i, j, m);
    }
    out
}

/// Covariant Hessian (DDf)_{ij} = ∂_i∂_j f − Γ^k_{ij} ∂_k f as jets
/// valid to order 1 (values and first derivatives).
pub fn covariant_hessian_jets(gamma: &Christoffel, f: &Jet3) -> JetMatrix {
    let d = gamma.d;
    JetMatrix::from_fn(d, |i, j| {
        let mut acc = second_partial_jet(f, i, j);
        for k in 0..d {
            acc = &acc - &(gamma.jet(k, i, j) * &f.partial(k));
        }
        acc
    })
}

/// Covariant Hessian values of a scalar field at a point.
pub fn covariant_hessian(g: &MetricField, alpha: &ScalarField, p: &Point) -> Result<DMatrix<f64>> {
    let gamma = christoffel(g, p)?;
    let f = alpha.eval(p)?;
    Ok(covariant_hessian_jets(&gamma, &f).values())
}

/// Third covariant derivative values:
/// (DDDf)_{ijk} = ∂_i (DDf)_{jk} − Γ^m_{ij} (DDf)_{mk} − Γ^m_{ik} (DDf)_{jm},
/// symmetric in (j,k). Flat index (i·d + j)·d + k.
pub fn covariant_third(g: &MetricField, alpha: &ScalarField, p: &Point) -> Result<Vec<f64>> {
    let gamma = christoffel(g, p)?;
    let f = alpha.eval(p)?;
    let ddf = covariant_hessian_jets(&gamma, &f);
    let d = gamma.d;
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut v = ddf.get(j, k).grad[i];
                for m in 0..d {
                    v -= gamma.val(m, i, j) * ddf.get(m, k).value;
                    v -= gamma.val(m, i, k) * ddf.get(j, m).value;
                }
                out[(i * d + j) * d + k] = v;
            }
        }
    }
    Ok(out)
}

/// D_i T_{jk} = ∂_i T_{jk} − Γ^m_{ij} T_{mk} − Γ^m_{ik} T_{jm} from jet
/// components at a point. Flat index (i·d + j)·d + k.
pub fn covariant_derivative_2tensor_from(gamma: &Christoffel, t: &JetMatrix) -> Vec<f64> {
    let d = gamma.d;
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut v = t.get(j, k).grad[i];
                for m in 0..d {
                    v -= gamma.val(m, i, j) * t.get(m, k).value;
                    v -= gamma.val(m, i, k) * t.get(j, m).value;
                }
                out[(i * d + j) * d + k] = v;
            }
        }
    }
    out
}

pub fn covariant_derivative_2tensor(
    g: &MetricField,
    t: &SymTensorField,
    p: &Point,
) -> Result<Vec<f64>> {
    let gamma = christoffel(g, p)?;
    Ok(covariant_derivative_2tensor_from(&gamma, &t.components(p)?))
}

/// sup |D g| at a point: must vanish for the Levi-Civita connection.
pub fn metric_compatibility_residual(g: &MetricField, p: &Point) -> Result<f64> {
    let comps = g.components(p)?;
    let gamma = christoffel_from_jets(&comps)?;
    let dt = covariant_derivative_2tensor_from(&gamma, &comps);
    Ok(dt.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
}

/// Algebraic type of the endomorphism g⁻¹T after the affine
/// normalization T̃' = (T̃ − a·Id)/b.
#[derive(Clone, Debug, PartialEq)]
pub enum EndoClass {
    /// T̃'² = 0
    Nilpotent,
    /// T̃'² = T̃'
    Projector,
    /// T̃'² = −Id
    Complex,
    /// none of the above; carries the estimated eigenvalues (re, im)
    Other(Vec<(f64, f64)>),
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub class: EndoClass,
    /// the defining norm after normalization (‖T̃'²‖, ‖T̃'²−T̃'‖ or ‖T̃'²+Id‖)
    pub residual: f64,
}

const CLASSIFY_TOL: f64 = 1e-8;

/// Classifies g⁻¹T at a point into the projector / nilpotent / complex
/// trichotomy, up to affine combinations with the identity.
pub fn classify_endomorphism(
    g: &MetricField,
    t: &SymTensorField,
    p: &Point,
) -> Result<Classification> {
    let gv = g.values(p)?;
    let tv = t.values(p)?;
    let endo = linalg::invert_values(&gv)? * tv;
    Ok(classify_matrix(&endo))
}

pub fn classify_matrix(endo: &DMatrix<f64>) -> Classification {
    let d = endo.nrows();
    let df = d as f64;
    let id = DMatrix::<f64>::identity(d, d);
    let scale = linalg::max_abs(endo).max(1.0);

    // mean eigenvalue is exact from the trace, immune to Jordan blocks
    let a = endo.trace() / df;
    let m = endo - a * &id;
    let m_norm = linalg::max_abs(&m);

    if m_norm <= CLASSIFY_TOL * scale {
        // scalar multiple of the identity
        return if a.abs() <= CLASSIFY_TOL {
            Classification { class: EndoClass::Nilpotent, residual: linalg::max_abs(&(&m * &m)) }
        } else {
            let tp = endo / a;
            let res = linalg::max_abs(&(&tp * &tp - &tp));
            Classification { class: EndoClass::Projector, residual: res }
        };
    }

    let m2 = &m * &m;
    let m2_norm = linalg::max_abs(&m2);
    if m2_norm <= CLASSIFY_TOL * scale * scale.max(1.0) {
        return Classification { class: EndoClass::Nilpotent, residual: m2_norm };
    }

    let q = m2.trace() / df;
    if q < 0.0 {
        let b = (-q).sqrt();
        let tp = &m / b;
        let res = linalg::max_abs(&(&tp * &tp + &id));
        if res <= CLASSIFY_TOL {
            return Classification { class: EndoClass::Complex, residual: res };
        }
    }

    // two real eigenvalue clusters → affine image of a projector
    let eigs = endo.complex_eigenvalues();
    let mut evs: Vec<(f64, f64)> = eigs.iter().map(|c| (c.re, c.im)).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if evs.iter().all(|&(_, im)| im.abs() <= 1e-7 * scale) {
        let reals: Vec<f64> = evs.iter().map(|&(re, _)| re).collect();
        let mut clusters = vec![reals[0]];
        for &v in &reals[1..] {
            if (v - clusters.last().unwrap()).abs() > 1e-6 * scale {
                clusters.push(v);
            }
        }
        if clusters.len() == 2 {
            let (mu, lambda) = (clusters[0], clusters[1]);
            let tp = (endo - mu * &id) / (lambda - mu);
            let res = linalg::max_abs(&(&tp * &tp - &tp));
            if res <= CLASSIFY_TOL {
                return Classification { class: EndoClass::Projector, residual: res };
            }
        }
    }

    Classification { class: EndoClass::Other(evs), residual: f64::INFINITY }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::families::round_sphere_2;
    use crate::jet::Jet3;

    fn flat2() -> MetricField {
        let chart = Chart::new("flat2", &[-2.0, -2.0], &[2.0, 2.0]);
        MetricField::constant(chart, "flat2", DMatrix::identity(2, 2))
    }

    #[test]
    fn flat_metric_has_no_connection_coefficients() {
        let g = flat2();
        let p = g.chart.center();
        let gamma = christoffel(&g, &p).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(gamma.val(k, i, j), 0.0);
                }
            }
        }
        assert_eq!(riemann(&g, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn polar_plane_connection() {
        // dr² + r²dθ²: Γ^r_{θθ} = −r, Γ^θ_{rθ} = 1/r
        let chart = Chart::new("polar", &[0.2, -1.0], &[3.0, 7.0]);
        let g = MetricField::from_fn(chart, "polar_plane", (2, 0), |j| {
            let d = j.len();
            JetMatrix::from_fn(2, |i, k| match (i, k) {
                (0, 0) => Jet3::constant(1.0, d),
                (1, 1) => &j[0] * &j[0],
                _ => Jet3::zero(d),
            })
        });
        let p = Point::new(vec![1.7, 0.4], "polar");
        let gamma = christoffel(&g, &p).unwrap();
        assert!((gamma.val(0, 1, 1) - (-1.7)).abs() < 1e-12);
        assert!((gamma.val(1, 0, 1) - 1.0 / 1.7).abs() < 1e-12);
        assert!((gamma.val(1, 1, 0) - 1.0 / 1.7).abs() < 1e-12);
        // flat in disguise
        assert!(riemann(&g, &p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn sphere_connection_and_curvature() {
        let g = round_sphere_2();
        let p = Point::new(vec![1.0, 0.8], &g.chart.id);
        let gamma = christoffel(&g, &p).unwrap();
        // Γ^θ_{φφ} = −sinθ cosθ at θ = 1
        let expect = -(1.0f64).sin() * (1.0f64).cos();
        assert!((gamma.val(0, 1, 1) - expect).abs() < 1e-12);
        assert!((expect - (-0.4546487134128409)).abs() < 1e-15);

        let r = riemann(&g, &p).unwrap();
        assert!(r.antisymmetry_residual() < 1e-12);
        assert!(r.first_bianchi_residual() < 1e-12);
        let gv = g.values(&p).unwrap();
        let k = sectional_curvature(&gv, &r, 0, 1).unwrap();
        assert!((k - 1.0).abs() < 1e-10);

        // constant curvature identity R^l_{ijk} = g_{jk} δ^l_i − g_{ik} δ^l_j
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    for kk in 0..2 {
                        let expect = gv[(j, kk)] * ((l == i) as i32 as f64)
                            - gv[(i, kk)] * ((l == j) as i32 as f64);
                        assert!((r.get(l, i, j, kk) - expect).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_sectional_everywhere() {
        let g = round_sphere_2();
        for p in g.chart.sample_points(10, 7) {
            let r = riemann(&g, &p).unwrap();
            let gv = g.values(&p).unwrap();
            let k = sectional_curvature(&gv, &r, 0, 1).unwrap();
            assert!((k - 1.0).abs() < 1e-9);
            assert!(metric_compatibility_residual(&g, &p).unwrap() < 1e-10);
        }
    }

    #[test]
    fn hessian_of_constant_and_linear() {
        let g = flat2();
        let p = Point::new(vec![0.7, -0.4], "flat2");
        let c = ScalarField::constant(g.chart.clone(), "const", 3.0);
        assert!(linalg::max_abs(&covariant_hessian(&g, &c, &p).unwrap()) == 0.0);
        let lin = ScalarField::from_fn(g.chart.clone(), "x", |j| j[0].clone());
        assert!(linalg::max_abs(&covariant_hessian(&g, &lin, &p).unwrap()) == 0.0);
        let third = covariant_third(&g, &lin, &p).unwrap();
        assert!(third.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cubic_third_derivative_on_line() {
        let chart = Chart::new("line", &[-2.0], &[2.0]);
        let g = MetricField::constant(chart.clone(), "flat1", DMatrix::identity(1, 1));
        let cubic = ScalarField::from_fn(chart, "x3", |j| (&j[0] * &j[0]) * &j[0]);
        let p = Point::new(vec![0.5], "line");
        let third = covariant_third(&g, &cubic, &p).unwrap();
        assert!((third[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_on_sphere_matches_difference_oracle() {
        let g = round_sphere_2();
        let alpha =
            ScalarField::from_fn(g.chart.clone(), "cos2_theta", |j| &j[0].cos() * &j[0].cos());
        let p = Point::new(vec![0.7, 1.1], &g.chart.id);
        let jets = covariant_hessian(&g, &alpha, &p).unwrap();
        let fd = crate::geometry::oracle::fd_covariant_hessian(&g, &alpha, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((jets[(i, j)] - fd[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn tensor_derivative_of_metric_vanishes() {
        let g = round_sphere_2();
        let gc = g.clone();
        let t = SymTensorField::from_fn(g.chart.clone(), "metric_as_tensor", move |j| {
            gc.components_jets(j)
        });
        let p = Point::new(vec![1.2, 2.0], &g.chart.id);
        let dt = covariant_derivative_2tensor(&g, &t, &p).unwrap();
        assert!(dt.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn degenerate_metric_is_a_loud_error() {
        let chart = Chart::new("pinch", &[-1.0, -1.0], &[1.0, 1.0]);
        let g = MetricField::from_fn(chart, "pinched", (2, 0), |j| {
            let d = j.len();
            JetMatrix::from_fn(2, |a, b| match (a, b) {
                (0, 0) => &j[0] * &j[0],
                (1, 1) => Jet3::constant(1.0, d),
                _ => Jet3::zero(d),
            })
        });
        let p = Point::new(vec![0.0, 0.3], "pinch");
        assert!(matches!(
            christoffel(&g, &p),
            Err(crate::error::Error::DegenerateMetric { .. })
        ));
        let ok = Point::new(vec![0.8, 0.3], "pinch");
        assert!(christoffel(&g, &ok).is_ok());
    }

    #[test]
    fn classify_basic_cases() {
        let id4 = DMatrix::<f64>::identity(4, 4);
        assert_eq!(classify_matrix(&id4).class, EndoClass::Projector);
        assert_eq!(classify_matrix(&DMatrix::zeros(3, 3)).class, EndoClass::Nilpotent);

        // affine image of a projector
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        assert_eq!(classify_matrix(&m).class, EndoClass::Projector);

        // shifted nilpotent
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 5.0, 0.0, 2.0]);
        assert_eq!(classify_matrix(&m).class, EndoClass::Nilpotent);

        // rotation-like: a + bJ
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 2.0, 1.5]);
        assert_eq!(classify_matrix(&m).class, EndoClass::Complex);

        // three distinct eigenvalues: none of the three types
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 7.0]);
        assert!(matches!(classify_matrix(&m).class, EndoClass::Other(_)));
    }
}
