//! The metric cone `dr² + r²g` over a base metric, and the dictionary
//! between scalar solutions on the base and parallel symmetric
//! 2-tensors upstairs.
//!
//! For a solution α the tensor is assembled from
//!
//! ```text
//! T(∂_r,∂_r) = α,   2T(∂_r,X) = r Dα(X),   2T(X,Y) = r²(2αg(X,Y) + DDα(X,Y)),
//! ```
//!
//! its Hessian identity is `D̂D̂(r²α) = 2T`, and `Y = T̃(∂_r) = α∂_r + X`
//! with `2rX` projecting onto grad α.

use nalgebra::DVector;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::geometry::{
    self, christoffel_from_jets, covariant_derivative_2tensor_from, covariant_hessian_jets,
};
use crate::jet::{seed_all, Jet3};
use crate::linalg::{self, JetMatrix};

/// Algebraic type of the parallel endomorphism on the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    Nilpotent,
    Complex,
    Projector,
}

impl CaseTag {
    /// ĝ(X,X) as a function of α.
    pub fn xx_value(&self, alpha: f64) -> f64 {
        match self {
            CaseTag::Projector => alpha - alpha * alpha,
            CaseTag::Nilpotent => -alpha * alpha,
            CaseTag::Complex => -1.0 - alpha * alpha,
        }
    }

    /// factor c(α) in D_{rX} rX = c(α)·rX on the base.
    pub fn pregeodesic_factor(&self, alpha: f64) -> f64 {
        match self {
            CaseTag::Projector => 1.0 - 2.0 * alpha,
            CaseTag::Nilpotent | CaseTag::Complex => -2.0 * alpha,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Nilpotent => "nilpotent",
            CaseTag::Complex => "complex",
            CaseTag::Projector => "projector",
        }
    }
}

/// A base metric together with its cone.
#[derive(Clone)]
pub struct ConeSpace {
    pub base: MetricField,
    pub metric: MetricField,
}

/// Builds the cone metric `dr² + r²g` on (1e-3, 1e3) × base box;
/// coordinate 0 is r.
pub fn build_cone(base: &MetricField) -> ConeSpace {
    let d = base.dim();
    let d1 = d + 1;
    let mut lo = vec![1e-3];
    let mut hi = vec![1e3];
    lo.extend_from_slice(&base.chart.lo);
    hi.extend_from_slice(&base.chart.hi);
    let id = format!("cone({})", base.chart.id);
    let chart = Chart::new(&id, &lo, &hi);
    let base_comp = base.clone();
    let signature = (base.signature.0 + 1, base.signature.1);
    let metric = MetricField::from_fn(chart, &format!("cone({})", base.id), signature, move |jets| {
        let r = &jets[0];
        let r2 = r * r;
        let base_vals: Vec<f64> = jets[1..].iter().map(|j| j.value).collect();
        let gb = base_comp.components_coords(&base_vals);
        JetMatrix::from_fn(d1, |i, j| {
            if i == 0 && j == 0 {
                Jet3::constant(1.0, d1)
            } else if i == 0 || j == 0 {
                Jet3::zero(d1)
            } else {
                &r2 * &gb.get(i - 1, j - 1).embed(d1, 1)
            }
        })
    });
    ConeSpace { base: base.clone(), metric }
}

impl ConeSpace {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn point(&self, r: f64, base_coords: &[f64]) -> Point {
        let mut c = vec![r];
        c.extend_from_slice(base_coords);
        Point::new(c, &self.metric.chart.id)
    }

    pub fn base_point(&self, p: &Point) -> Point {
        Point::new(p.coords[1..].to_vec(), &self.base.chart.id)
    }

    /// Deterministic samples with r restricted to (0.5, 2): residual
    /// checks never need the far ends of the radial domain.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut lo = vec![0.5];
        let mut hi = vec![2.0];
        lo.extend_from_slice(&self.base.chart.lo);
        hi.extend_from_slice(&self.base.chart.hi);
        let sampling = Chart::new(&self.metric.chart.id, &lo, &hi);
        sampling.sample_points(n, seed)
    }

    /// The scalar `r² · α(m)` on the cone chart.
    pub fn lift_quadratic(&self, alpha: &ScalarField, id: &str) -> ScalarField {
        let af = alpha.clone();
        let d1 = self.dim();
        ScalarField::from_fn(self.metric.chart.clone(), id, move |jets| {
            let r = &jets[0];
            let base_vals: Vec<f64> = jets[1..].iter().map(|j| j.value).collect();
            let a = af.eval_coords(&base_vals).embed(d1, 1);
            &(r * r) * &a
        })
    }
}

/// The parallel-candidate tensor associated to a scalar on the base.
/// The components are exact in value and first derivatives, which is
/// what the parallelism residual consumes.
pub fn tensor_from_alpha(cone: &ConeSpace, alpha: &ScalarField) -> SymTensorField {
    let base = cone.base.clone();
    let af = alpha.clone();
    let d = base.dim();
    let d1 = d + 1;
    SymTensorField::from_fn(
        cone.metric.chart.clone(),
        &format!("tensor({})", alpha.id),
        move |jets| {
            let r = &jets[0];
            let base_vals: Vec<f64> = jets[1..].iter().map(|j| j.value).collect();
            let base_jets = seed_all(&base_vals);
            let a = af.eval_jets(&base_jets);
            let gb = base.components_jets(&base_jets);
            let gamma = christoffel_from_jets(&gb)
                .expect("base metric degenerate inside cone tensor evaluator");
            let dda = covariant_hessian_jets(&gamma, &a);
            let r2 = r * r;
            JetMatrix::from_fn(d1, |i, j| {
                if i == 0 && j == 0 {
                    a.embed(d1, 1)
                } else if i == 0 || j == 0 {
                    let k = i.max(j) - 1;
                    (r * &a.partial(k).embed(d1, 1)).scale(0.5)
                } else {
                    let gij = gb.get(i - 1, j - 1).embed(d1, 1);
                    let hij = dda.get(i - 1, j - 1).embed(d1, 1);
                    &r2 * &(&(&gij * &a.embed(d1, 1)) + &hij.scale(0.5))
                }
            })
        },
    )
}

/// A cone, a base solution and its associated tensor, tagged by case.
pub struct ConeSolution {
    pub cone: ConeSpace,
    pub alpha: ScalarField,
    pub big_a: ScalarField,
    pub tensor: SymTensorField,
    pub case: CaseTag,
}

impl ConeSolution {
    pub fn new(cone: ConeSpace, alpha: ScalarField, case: CaseTag) -> Self {
        let big_a = cone.lift_quadratic(&alpha, &format!("r2_{}", alpha.id));
        let tensor = tensor_from_alpha(&cone, &alpha);
        ConeSolution { cone, alpha, big_a, tensor, case }
    }

    /// Y = T̃(∂_r) by linear solve ĝ Y = T(·, ∂_r).
    pub fn y_vector(&self, p: &Point) -> Result<DVector<f64>> {
        let ghat = self.cone.metric.values(p)?;
        let det = ghat.determinant();
        let t = self.tensor.values(p)?;
        let rhs = t.column(0).into_owned();
        ghat.lu().solve(&rhs).ok_or(Error::DegenerateMetric { det })
    }

    /// sup |D̂T| over the sample set.
    pub fn parallel_residual(&self, points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in points {
            let ghat = self.cone.metric.components(p)?;
            let gamma = christoffel_from_jets(&ghat)?;
            let t = self.tensor.components(p)?;
            let dt = covariant_derivative_2tensor_from(&gamma, &t);
            sup = sup.max(dt.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        }
        Ok(sup)
    }

    /// sup |D̂D̂(r²α) − 2T| over the sample set.
    pub fn hessian_identity_residual(&self, points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in points {
            let gamma = geometry::christoffel(&self.cone.metric, p)?;
            let a = self.big_a.eval(p)?;
            let hess = covariant_hessian_jets(&gamma, &a).values();
            let t = self.tensor.values(p)?;
            sup = sup.max(linalg::max_abs(&(hess - 2.0 * t)));
        }
        Ok(sup)
    }

    /// sup |ĝ(X,X) − table(α)| with X = Y − α∂_r.
    pub fn xx_table_residual(&self, points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in points {
            let ghat = self.cone.metric.values(p)?;
            let alpha = self.tensor.values(p)?[(0, 0)];
            let mut x = self.y_vector(p)?;
            x[0] -= alpha;
            let v = (x.transpose() * &ghat * &x)[(0, 0)];
            sup = sup.max((v - self.case.xx_value(alpha)).abs());
        }
        Ok(sup)
    }

    /// sup over coordinate directions of |T(∂_r, Z) − ĝ(Y, Z)|.
    pub fn radial_pairing_residual(&self, points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in points {
            let ghat = self.cone.metric.values(p)?;
            let t = self.tensor.values(p)?;
            let y = self.y_vector(p)?;
            let gy = ghat * y;
            for k in 0..gy.len() {
                sup = sup.max((t[(0, k)] - gy[k]).abs());
            }
        }
        Ok(sup)
    }

    /// Directional derivative of A = r²α along sampled kernel vectors of
    /// T̃ (the function is constant along the kernel foliation).
    pub fn kernel_constancy_residual(&self, points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in points {
            let ghat = self.cone.metric.values(p)?;
            let t = self.tensor.values(p)?;
            let endo = linalg::invert_values(&ghat)? * t;
            let a = self.big_a.eval(p)?;
            let svd = endo.svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max).max(1.0);
            let vt = svd.v_t.as_ref().unwrap();
            for (k, &s) in svd.singular_values.iter().enumerate() {
                if s < 1e-9 * smax {
                    let v = vt.row(k);
                    let da: f64 = (0..a.dim).map(|i| a.grad[i] * v[i]).sum();
                    sup = sup.max(da.abs());
                }
            }
        }
        Ok(sup)
    }

    /// Gradient relations at base samples: the base gradient of α versus
    /// the projection of 2rX, the cone gradient of A versus 2rY, and the
    /// pregeodesic law D_{rX} rX = c(α)·rX. Returns the sup residual.
    pub fn gradient_relation_residual(&self, base_points: &[Point]) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for m in base_points {
            for r in [0.7, 1.3] {
                let p = self.cone.point(r, &m.coords);
                sup = sup.max(self.gradient_relation_at(&p)?);
            }
            sup = sup.max(self.pregeodesic_law_residual(m)?);
        }
        Ok(sup)
    }

    fn gradient_relation_at(&self, p: &Point) -> Result<f64> {
        let m = self.cone.base_point(p);
        let r = p.coords[0];
        let d = self.cone.base.dim();
        let mut sup: f64 = 0.0;

        // grad_g α versus projection of 2rX
        let gb = self.cone.base.values(&m)?;
        let a = self.alpha.eval(&m)?;
        let da = DVector::from_fn(d, |i, _| a.grad[i]);
        let grad_alpha = linalg::invert_values(&gb)? * da;
        let alpha_val = a.value;
        let mut x = self.y_vector(&p)?;
        x[0] -= alpha_val;
        for i in 0..d {
            sup = sup.max((grad_alpha[i] - 2.0 * r * x[i + 1]).abs());
        }

        // grad_ĝ A versus 2rY
        let ghat = self.cone.metric.values(&p)?;
        let big = self.big_a.eval(&p)?;
        let dbig = DVector::from_fn(d + 1, |i, _| big.grad[i]);
        let grad_a = linalg::invert_values(&ghat)? * dbig;
        let y = self.y_vector(&p)?;
        for k in 0..=d {
            sup = sup.max((grad_a[k] - 2.0 * r * y[k]).abs());
        }
        Ok(sup)
    }

    /// |D_V V − c(α) V| with V = rX = ½ grad α on the base.
    pub fn pregeodesic_law_residual(&self, m: &Point) -> Result<f64> {
        let d = self.cone.base.dim();
        let gb = self.cone.base.components(&m.clone())?;
        let gamma = christoffel_from_jets(&gb)?;
        let ginv = gb.inverse()?;
        let a = self.alpha.eval(m)?;
        // V^i = ½ g^{ij} ∂_j α as jets (valid to first order)
        let v: Vec<Jet3> = (0..d)
            .map(|i| {
                let mut acc = Jet3::zero(d);
                for j in 0..d {
                    acc = &acc + &(ginv.get(i, j) * &a.partial(j));
                }
                acc.scale(0.5)
            })
            .collect();
        let c = self.case.pregeodesic_factor(a.value);
        let mut sup: f64 = 0.0;
        for k in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                let mut di = v[k].grad[i];
                for j in 0..d {
                    di += gamma.val(k, i, j) * v[j].value;
                }
                acc += v[i].value * di;
            }
            sup = sup.max((acc - c * v[k].value).abs());
        }
        Ok(sup)
    }

    pub fn classify_at(&self, p: &Point) -> Result<geometry::Classification> {
        geometry::classify_endomorphism(&self.cone.metric, &self.tensor, p)
    }
}

/// sup over samples of |R̂(X,Y)Z − (R(X,Y)Z − g(Y,Z)X + g(X,Z)Y)| in
/// coordinates; components of R̂ touching the radial slot must vanish.
pub fn cone_curvature_relation_residual(cone: &ConeSpace, points: &[Point]) -> Result<f64> {
    let d = cone.base.dim();
    let mut sup: f64 = 0.0;
    for p in points {
        let rhat = geometry::riemann(&cone.metric, p)?;
        let m = cone.base_point(p);
        let rbase = geometry::riemann(&cone.base, &m)?;
        let gb = cone.base.values(&m)?;
        for l in 0..=d {
            for i in 0..=d {
                for j in 0..=d {
                    for k in 0..=d {
                        let expected = if l > 0 && i > 0 && j > 0 && k > 0 {
                            let (l, i, j, k) = (l - 1, i - 1, j - 1, k - 1);
                            rbase.get(l, i, j, k) - gb[(j, k)] * ((l == i) as i32 as f64)
                                + gb[(i, k)] * ((l == j) as i32 as f64)
                        } else {
                            0.0
                        };
                        sup = sup.max((rhat.get(l, i, j, k) - expected).abs());
                    }
                }
            }
        }
    }
    Ok(sup)
}

/// The cone metric seen as a symmetric tensor field (useful as the
/// trivially parallel tensor).
pub fn metric_as_tensor(g: &MetricField) -> SymTensorField {
    let gc = g.clone();
    SymTensorField::from_fn(g.chart.clone(), &format!("{}_as_tensor", g.id), move |jets| {
        gc.components_jets(jets)
    })
}
