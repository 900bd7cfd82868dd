//! Pointwise evaluators for scalars, metrics and symmetric 2-tensors.
//!
//! A field owns its chart and a closure mapping seeded coordinate jets
//! to jet-valued components, so every evaluation carries exact
//! derivatives to order 3. Evaluators are pure and `Send + Sync`;
//! fields can be shared across threads and evaluated concurrently.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::jet::{seed_all, Jet3};
use crate::linalg::{self, JetMatrix};

pub type JetFn = Arc<dyn Fn(&[Jet3]) -> Jet3 + Send + Sync>;
pub type JetMatFn = Arc<dyn Fn(&[Jet3]) -> JetMatrix + Send + Sync>;

/// Scalar field with exact order-3 jets.
#[derive(Clone)]
pub struct ScalarField {
    pub chart: Chart,
    pub id: String,
    f: JetFn,
}

impl ScalarField {
    pub fn from_fn(
        chart: Chart,
        id: &str,
        f: impl Fn(&[Jet3]) -> Jet3 + Send + Sync + 'static,
    ) -> Self {
        ScalarField { chart, id: id.to_string(), f: Arc::new(f) }
    }

    pub fn constant(chart: Chart, id: &str, c: f64) -> Self {
        let d = chart.dim();
        Self::from_fn(chart, id, move |_| Jet3::constant(c, d))
    }

    pub fn eval(&self, p: &Point) -> Result<Jet3> {
        self.chart.check_point(p)?;
        Ok(self.eval_coords(&p.coords))
    }

    pub fn eval_coords(&self, coords: &[f64]) -> Jet3 {
        (self.f)(&seed_all(coords))
    }

    pub fn eval_jets(&self, jets: &[Jet3]) -> Jet3 {
        (self.f)(jets)
    }

    pub fn value(&self, p: &Point) -> Result<f64> {
        Ok(self.eval(p)?.value)
    }

    /// Same field with every jet scaled by `c`.
    pub fn scaled(&self, c: f64, id: &str) -> ScalarField {
        let f = self.f.clone();
        ScalarField {
            chart: self.chart.clone(),
            id: id.to_string(),
            f: Arc::new(move |jets| f(jets).scale(c)),
        }
    }
}

/// Pseudo-Riemannian metric: symmetric jet-valued components plus a
/// declared signature.
#[derive(Clone)]
pub struct MetricField {
    pub chart: Chart,
    pub id: String,
    pub signature: (usize, usize),
    comp: JetMatFn,
}

impl MetricField {
    pub fn from_fn(
        chart: Chart,
        id: &str,
        signature: (usize, usize),
        f: impl Fn(&[Jet3]) -> JetMatrix + Send + Sync + 'static,
    ) -> Self {
        MetricField { chart, id: id.to_string(), signature, comp: Arc::new(f) }
    }

    /// Constant-coefficient metric; the signature is read off the matrix.
    pub fn constant(chart: Chart, id: &str, m: DMatrix<f64>) -> Self {
        let d = chart.dim();
        assert_eq!(m.nrows(), d);
        let signature = linalg::signature_of(&m, 1e-12);
        let mm = m.clone();
        Self::from_fn(chart, id, signature, move |_| {
            JetMatrix::from_fn(d, |i, j| Jet3::constant(mm[(i, j)], d))
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn components(&self, p: &Point) -> Result<JetMatrix> {
        self.chart.check_point(p)?;
        Ok(self.components_coords(&p.coords))
    }

    pub fn components_coords(&self, coords: &[f64]) -> JetMatrix {
        (self.comp)(&seed_all(coords))
    }

    pub fn components_jets(&self, jets: &[Jet3]) -> JetMatrix {
        (self.comp)(jets)
    }

    pub fn values(&self, p: &Point) -> Result<DMatrix<f64>> {
        Ok(self.components(p)?.values())
    }

    /// Block-diagonal product metric on the concatenated chart box.
    pub fn product(a: &MetricField, b: &MetricField, id: &str) -> MetricField {
        let lo: Vec<f64> = a.chart.lo.iter().chain(&b.chart.lo).copied().collect();
        let hi: Vec<f64> = a.chart.hi.iter().chain(&b.chart.hi).copied().collect();
        let chart = Chart::new(id, &lo, &hi);
        let (da, db) = (a.dim(), b.dim());
        let d = da + db;
        let fa = a.comp.clone();
        let fb = b.comp.clone();
        let signature = (a.signature.0 + b.signature.0, a.signature.1 + b.signature.1);
        MetricField::from_fn(chart, id, signature, move |jets| {
            // restrict the product-chart jets back to each factor
            let ja: Vec<Jet3> = (0..da).map(|i| Jet3::coordinate(jets[i].value, i, da)).collect();
            let jb: Vec<Jet3> =
                (0..db).map(|i| Jet3::coordinate(jets[da + i].value, i, db)).collect();
            let ma = fa(&ja);
            let mb = fb(&jb);
            JetMatrix::from_fn(d, |i, j| {
                if i < da && j < da {
                    ma.get(i, j).embed(d, 0)
                } else if i >= da && j >= da {
                    mb.get(i - da, j - da).embed(d, da)
                } else {
                    Jet3::zero(d)
                }
            })
        })
    }

    /// Metric multiplied by a nonzero constant.
    pub fn scaled(&self, c: f64, id: &str) -> MetricField {
        assert!(c != 0.0);
        let f = self.comp.clone();
        let signature =
            if c > 0.0 { self.signature } else { (self.signature.1, self.signature.0) };
        MetricField {
            chart: self.chart.clone(),
            id: id.to_string(),
            signature,
            comp: Arc::new(move |jets| {
                let m = f(jets);
                JetMatrix { n: m.n, data: m.data.iter().map(|x| x.scale(c)).collect() }
            }),
        }
    }

    /// Symmetry, nondegeneracy and signature checks over sampled points
    /// plus boundary-offset probes.
    pub fn validate(&self, n_samples: usize, seed: u64) -> Result<()> {
        let mut pts = self.chart.sample_points(n_samples, seed);
        pts.extend(self.chart.boundary_offset_points());
        for p in &pts {
            let m = self.components(p)?;
            if m.max_abs_asymmetry() > 1e-12 {
                return Err(Error::Config(format!(
                    "metric '{}' asymmetric at {:?}",
                    self.id, p.coords
                )));
            }
            let vals = m.values();
            let det = vals.determinant();
            if det.abs() <= 1e-12 {
                return Err(Error::DegenerateMetric { det });
            }
            let sig = linalg::signature_of(&vals, 1e-12);
            if sig != self.signature {
                return Err(Error::Config(format!(
                    "metric '{}' has signature {:?} at {:?}, declared {:?}",
                    self.id, sig, p.coords, self.signature
                )));
            }
        }
        Ok(())
    }
}

/// Symmetric 2-tensor field (fully covariant components).
#[derive(Clone)]
pub struct SymTensorField {
    pub chart: Chart,
    pub id: String,
    comp: JetMatFn,
}

impl SymTensorField {
    pub fn from_fn(
        chart: Chart,
        id: &str,
        f: impl Fn(&[Jet3]) -> JetMatrix + Send + Sync + 'static,
    ) -> Self {
        SymTensorField { chart, id: id.to_string(), comp: Arc::new(f) }
    }

    pub fn constant(chart: Chart, id: &str, m: DMatrix<f64>) -> Self {
        let d = chart.dim();
        assert_eq!(m.nrows(), d);
        let mm = m.clone();
        Self::from_fn(chart, id, move |_| {
            JetMatrix::from_fn(d, |i, j| Jet3::constant(mm[(i, j)], d))
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn components(&self, p: &Point) -> Result<JetMatrix> {
        self.chart.check_point(p)?;
        Ok(self.components_coords(&p.coords))
    }

    pub fn components_coords(&self, coords: &[f64]) -> JetMatrix {
        (self.comp)(&seed_all(coords))
    }

    pub fn components_jets(&self, jets: &[Jet3]) -> JetMatrix {
        (self.comp)(jets)
    }

    pub fn values(&self, p: &Point) -> Result<DMatrix<f64>> {
        Ok(self.components(p)?.values())
    }

    pub fn scaled(&self, c: f64, id: &str) -> SymTensorField {
        let f = self.comp.clone();
        SymTensorField {
            chart: self.chart.clone(),
            id: id.to_string(),
            comp: Arc::new(move |jets| {
                let m = f(jets);
                JetMatrix { n: m.n, data: m.data.iter().map(|x| x.scale(c)).collect() }
            }),
        }
    }

    pub fn validate_symmetry(&self, n_samples: usize, seed: u64) -> Result<()> {
        for p in self.chart.sample_points(n_samples, seed) {
            if self.components(&p)?.max_abs_asymmetry() > 1e-12 {
                return Err(Error::Config(format!(
                    "tensor '{}' asymmetric at {:?}",
                    self.id, p.coords
                )));
            }
        }
        Ok(())
    }
}

/// Endomorphism field g⁻¹T associated to a symmetric tensor.
pub struct EndoField<'a> {
    pub metric: &'a MetricField,
    pub tensor: &'a SymTensorField,
}

impl<'a> EndoField<'a> {
    pub fn new(metric: &'a MetricField, tensor: &'a SymTensorField) -> Self {
        EndoField { metric, tensor }
    }

    pub fn matrix(&self, p: &Point) -> Result<DMatrix<f64>> {
        let g = self.metric.values(p)?;
        let t = self.tensor.values(p)?;
        Ok(linalg::invert_values(&g)? * t)
    }

    /// g(T̃u, v) − g(u, T̃v) reduces to the asymmetry of T itself.
    pub fn self_adjoint_residual(&self, p: &Point) -> Result<f64> {
        let t = self.tensor.values(p)?;
        Ok(linalg::max_abs(&(&t - &t.transpose())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(d: usize) -> MetricField {
        let chart = Chart::new("flat", &vec![-2.0; d], &vec![2.0; d]);
        MetricField::constant(chart, "euclidean", DMatrix::identity(d, d))
    }

    #[test]
    fn constant_metric_validates() {
        let g = euclid(3);
        assert_eq!(g.signature, (3, 0));
        g.validate(20, 42).unwrap();
    }

    #[test]
    fn product_metric_blocks() {
        let a = euclid(1);
        let b = euclid(2).scaled(-1.0, "neg");
        let g = MetricField::product(&a, &b, "prod");
        assert_eq!(g.signature, (1, 2));
        let p = g.chart.center();
        let v = g.values(&p).unwrap();
        assert_eq!(v[(0, 0)], 1.0);
        assert_eq!(v[(1, 1)], -1.0);
        assert_eq!(v[(2, 2)], -1.0);
        assert_eq!(v[(0, 1)], 0.0);
    }

    #[test]
    fn scalar_field_jets() {
        let chart = Chart::new("c", &[-1.0, -1.0], &[1.0, 1.0]);
        let f = ScalarField::from_fn(chart, "xy2", |j| &j[0] * &(&j[1] * &j[1]));
        let p = Point::new(vec![0.5, 0.3], "c");
        let jet = f.eval(&p).unwrap();
        assert!((jet.value - 0.5 * 0.09).abs() < 1e-15);
        assert!((jet.grad[0] - 0.09).abs() < 1e-15);
        assert!((jet.grad[1] - 0.3).abs() < 1e-15);
        assert!(f.eval(&Point::new(vec![2.0, 0.0], "c")).is_err());
    }

    #[test]
    fn shared_fields_evaluate_concurrently() {
        let g = std::sync::Arc::new(euclid(3));
        std::thread::scope(|scope| {
            for t in 0..4 {
                let g = g.clone();
                scope.spawn(move || {
                    for p in g.chart.sample_points(25, t) {
                        let m = g.values(&p).unwrap();
                        assert_eq!(m[(0, 0)], 1.0);
                    }
                });
            }
        });
    }

    #[test]
    fn signature_mismatch_detected() {
        let chart = Chart::new("c", &[-1.0], &[1.0]);
        let bad = MetricField::from_fn(chart, "bad", (0, 1), |j| {
            JetMatrix::from_fn(1, |_, _| Jet3::constant(1.0, j.len()))
        });
        assert!(bad.validate(5, 1).is_err());
    }
}
