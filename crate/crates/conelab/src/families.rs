//! Explicit metric families whose cones carry parallel symmetric
//! 2-tensors, plus the quadric model spaces and their perturbations.
//!
//! Each family lives on a product I × N with coordinate 0 = s and has
//! the shape `g = ε ds² + g_s`, `g_s = c_h(s)(h−S) + c_s(s)S`, where
//! (N,h) carries a parallel symmetric tensor S whose endomorphism
//! satisfies S̃² ∈ {S̃, 0, −Id}. The slice restriction of the cone
//! tensor at r = 1 is `S_s = d_h(s)(h−S) + d_s(s)S`.

use nalgebra::DMatrix;

use crate::chart::{Chart, Point};
use crate::cone::{build_cone, CaseTag, ConeSolution};
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::geometry::{self, EndoClass};
use crate::jet::Jet3;
use crate::linalg::{self, JetMatrix};

/// Round metric on S^dim in nested polar coordinates, kept away from
/// the poles.
pub fn sphere_metric(dim: usize) -> MetricField {
    assert!(dim >= 1);
    let mut lo = vec![0.3; dim];
    let mut hi = vec![std::f64::consts::PI - 0.3; dim];
    hi[dim - 1] = 2.0 * std::f64::consts::PI - 0.3;
    lo[dim - 1] = 0.3;
    let chart = Chart::new(&format!("sphere{dim}"), &lo, &hi);
    MetricField::from_fn(chart, &format!("round_s{dim}"), (dim, 0), move |j| {
        JetMatrix::from_fn(dim, |a, b| {
            if a != b {
                return Jet3::zero(dim);
            }
            let mut acc = Jet3::constant(1.0, dim);
            for prev in 0..a {
                let s = j[prev].sin();
                acc = &acc * &(&s * &s);
            }
            acc
        })
    })
}

/// Round 2-sphere in (θ, φ) with a wide φ-range so closed geodesics can
/// complete a full turn inside the chart.
pub fn round_sphere_2() -> MetricField {
    let chart = Chart::new("s2_polar", &[0.2, -7.0], &[2.94, 7.0]);
    MetricField::from_fn(chart, "round_s2", (2, 0), |j| {
        let d = j.len();
        JetMatrix::from_fn(2, |a, b| match (a, b) {
            (0, 0) => Jet3::constant(1.0, d),
            (1, 1) => {
                let s = j[0].sin();
                &s * &s
            }
            _ => Jet3::zero(d),
        })
    })
}

/// The solution cos²θ on the round 2-sphere (restriction of the squared
/// ambient height function).
pub fn sphere_height_squared() -> ScalarField {
    let g = round_sphere_2();
    ScalarField::from_fn(g.chart, "cos2_theta", |j| {
        let c = j[0].cos();
        &c * &c
    })
}

/// Base data for a family: (N,h) with a parallel symmetric tensor S of
/// the declared algebraic type, and an s-interval.
#[derive(Clone)]
pub struct BaseData {
    pub metric: MetricField,
    pub tensor: SymTensorField,
    pub case: CaseTag,
    pub interval: (f64, f64),
}

impl BaseData {
    /// Validates the algebraic type of S̃ = h⁻¹S and DS = 0 on samples.
    pub fn new(
        metric: MetricField,
        tensor: SymTensorField,
        case: CaseTag,
        interval: (f64, f64),
    ) -> Result<Self> {
        if interval.0 >= interval.1 {
            return Err(Error::InvalidBase("empty s-interval".into()));
        }
        let pts = metric.chart.sample_points(20, 17);
        for p in &pts {
            let hv = metric.values(p)?;
            let sv = tensor.values(p)?;
            let endo = linalg::invert_values(&hv)? * sv;
            if linalg::max_abs(&endo) < 1e-10 {
                if case == CaseTag::Complex {
                    return Err(Error::InvalidBase(
                        "trivial S cannot have complex type".into(),
                    ));
                }
            } else {
                let cls = geometry::classify_matrix(&endo);
                let ok = matches!(
                    (&cls.class, case),
                    (EndoClass::Nilpotent, CaseTag::Nilpotent)
                        | (EndoClass::Projector, CaseTag::Projector)
                        | (EndoClass::Complex, CaseTag::Complex)
                );
                if !ok {
                    return Err(Error::InvalidBase(format!(
                        "S has type {:?}, declared {:?}",
                        cls.class, case
                    )));
                }
            }
            let ds = geometry::covariant_derivative_2tensor(&metric, &tensor, p)?;
            let sup = ds.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if sup > 1e-9 {
                return Err(Error::InvalidBase(format!("S is not parallel: |DS| = {sup:e}")));
            }
        }
        Ok(BaseData { metric, tensor, case, interval })
    }
}

/// Which of the explicit families, including the two sub-cases of the
/// hyperbolic projector family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyBranch {
    Nilpotent,
    Complex,
    ProjectorTrig,
    ProjectorHypPos,
    ProjectorHypNeg,
}

/// Branch selector for the projector constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectorBranch {
    Trig,
    HypPos,
    HypNeg,
}

impl FamilyBranch {
    pub fn case(&self) -> CaseTag {
        match self {
            FamilyBranch::Nilpotent => CaseTag::Nilpotent,
            FamilyBranch::Complex => CaseTag::Complex,
            _ => CaseTag::Projector,
        }
    }

    /// sign of g(∂_s, ∂_s)
    pub fn eps(&self) -> f64 {
        match self {
            FamilyBranch::ProjectorTrig => 1.0,
            _ => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FamilyBranch::Nilpotent => "nilpotent",
            FamilyBranch::Complex => "complex",
            FamilyBranch::ProjectorTrig => "projector_trig",
            FamilyBranch::ProjectorHypPos => "projector_hyp_pos",
            FamilyBranch::ProjectorHypNeg => "projector_hyp_neg",
        }
    }

    /// coefficient of (h − S) in g_s
    pub fn coeff_h(&self, s: &Jet3) -> Jet3 {
        let one = Jet3::constant(1.0, s.dim);
        match self {
            FamilyBranch::Nilpotent => (s * 2.0).exp(),
            FamilyBranch::Complex => one,
            FamilyBranch::ProjectorTrig => {
                let v = s.sin();
                &v * &v
            }
            FamilyBranch::ProjectorHypPos | FamilyBranch::ProjectorHypNeg => {
                let v = s.sinh();
                &v * &v
            }
        }
    }

    /// coefficient of S in g_s
    pub fn coeff_s(&self, s: &Jet3) -> Jet3 {
        let one = Jet3::constant(1.0, s.dim);
        match self {
            FamilyBranch::Nilpotent => one,
            FamilyBranch::Complex => &one - &(s * 2.0).sinh(),
            FamilyBranch::ProjectorTrig => {
                let v = s.cos();
                &v * &v
            }
            FamilyBranch::ProjectorHypPos | FamilyBranch::ProjectorHypNeg => {
                let v = s.cosh();
                &v * &v
            }
        }
    }

    /// coefficient of (h − S) in the slice tensor S_s
    pub fn slice_coeff_h(&self, s: &Jet3) -> Jet3 {
        match self {
            FamilyBranch::Nilpotent => Jet3::zero(s.dim),
            FamilyBranch::Complex => (s * 2.0).sinh(),
            FamilyBranch::ProjectorTrig | FamilyBranch::ProjectorHypPos => Jet3::zero(s.dim),
            FamilyBranch::ProjectorHypNeg => {
                let v = s.sinh();
                &v * &v
            }
        }
    }

    /// coefficient of S in the slice tensor S_s
    pub fn slice_coeff_s(&self, s: &Jet3) -> Jet3 {
        let one = Jet3::constant(1.0, s.dim);
        match self {
            FamilyBranch::Nilpotent => (s * 2.0).exp(),
            FamilyBranch::Complex => &one + &(s * 2.0).sinh(),
            FamilyBranch::ProjectorTrig => {
                let v = s.cos();
                &v * &v
            }
            FamilyBranch::ProjectorHypPos => {
                let v = s.cosh();
                &v * &v
            }
            FamilyBranch::ProjectorHypNeg => Jet3::zero(s.dim),
        }
    }

    pub fn alpha(&self, s: &Jet3) -> Jet3 {
        match self {
            FamilyBranch::Nilpotent => (s * 2.0).exp(),
            FamilyBranch::Complex => (s * 2.0).sinh(),
            FamilyBranch::ProjectorTrig => {
                let v = s.cos();
                &v * &v
            }
            FamilyBranch::ProjectorHypPos => {
                let v = s.cosh();
                &v * &v
            }
            FamilyBranch::ProjectorHypNeg => {
                let v = s.sinh();
                (&v * &v).scale(-1.0)
            }
        }
    }
}

/// A constructed family metric on I × N with its solution and slice data.
pub struct FamilyInstance {
    pub id: String,
    pub branch: FamilyBranch,
    pub case: CaseTag,
    pub metric: MetricField,
    pub alpha: ScalarField,
    pub base: BaseData,
    /// +1, or −1 for the negated solution (tensor −T)
    pub alpha_sign: f64,
}

fn family_metric(id: &str, branch: FamilyBranch, base: &BaseData) -> MetricField {
    let n = base.metric.dim();
    let d = n + 1;
    let lo: Vec<f64> = std::iter::once(base.interval.0).chain(base.metric.chart.lo.clone()).collect();
    let hi: Vec<f64> = std::iter::once(base.interval.1).chain(base.metric.chart.hi.clone()).collect();
    let chart = Chart::new(id, &lo, &hi);
    let h = base.metric.clone();
    let s_tensor = base.tensor.clone();
    let eps = branch.eps();

    // signature determined at the center slice
    let center = chart.center();
    let sc = Jet3::constant(center.coords[0], 1);
    let ch = branch.coeff_h(&sc).value;
    let cs = branch.coeff_s(&sc).value;
    let hc = h.values(&Point::new(center.coords[1..].to_vec(), &h.chart.id)).unwrap();
    let tc = s_tensor
        .values(&Point::new(center.coords[1..].to_vec(), &s_tensor.chart.id))
        .unwrap();
    let slice_vals = ch * (&hc - &tc) + cs * &tc;
    let (sp, sm) = linalg::signature_of(&slice_vals, 1e-12);
    let signature = if eps > 0.0 { (sp + 1, sm) } else { (sp, sm + 1) };

    MetricField::from_fn(chart, id, signature, move |jets| {
        let s = &jets[0];
        let c_h = branch.coeff_h(s);
        let c_s = branch.coeff_s(s);
        let base_vals: Vec<f64> = jets[1..].iter().map(|j| j.value).collect();
        let hm = h.components_coords(&base_vals);
        let sm = s_tensor.components_coords(&base_vals);
        JetMatrix::from_fn(d, |i, j| {
            if i == 0 && j == 0 {
                Jet3::constant(eps, d)
            } else if i == 0 || j == 0 {
                Jet3::zero(d)
            } else {
                let hij = hm.get(i - 1, j - 1).embed(d, 1);
                let sij = sm.get(i - 1, j - 1).embed(d, 1);
                &(&c_h * &(&hij - &sij)) + &(&c_s * &sij)
            }
        })
    })
}

fn build_family(id: &str, branch: FamilyBranch, base: BaseData) -> Result<FamilyInstance> {
    if base.case != branch.case() {
        return Err(Error::InvalidBase(format!(
            "base tensor type {:?} does not match family branch {:?}",
            base.case, branch
        )));
    }
    let metric = family_metric(id, branch, &base);
    let alpha = ScalarField::from_fn(metric.chart.clone(), &format!("alpha_{id}"), move |jets| {
        branch.alpha(&jets[0])
    });
    let instance =
        FamilyInstance { id: id.to_string(), branch, case: branch.case(), metric, alpha, base, alpha_sign: 1.0 };
    instance.check_slice_nondegeneracy(30, 23)?;
    Ok(instance)
}

/// Family with S̃² = 0: `g = −ds² + e^{2s}(h−S) + S`, α = e^{2s}.
pub fn build_nilpotent(id: &str, base: BaseData) -> Result<FamilyInstance> {
    build_family(id, FamilyBranch::Nilpotent, base)
}

/// Family with S̃² = −Id: `g = −ds² + h − sinh(2s)S`, α = sinh(2s).
pub fn build_complex(id: &str, base: BaseData) -> Result<FamilyInstance> {
    build_family(id, FamilyBranch::Complex, base)
}

/// Families with S̃² = S̃: the trigonometric branch
/// `g = ds² + sin²(s)(h−S) + cos²(s)S` with α = cos²(s) on I ⊂ (0,π/2),
/// and the hyperbolic branch `g = −ds² + sinh²(s)(h−S) + cosh²(s)S` with
/// α = cosh²(s) (alpha > 1) or α = −sinh²(s) (alpha < 0) on I ⊂ (0,∞).
pub fn build_projector(id: &str, base: BaseData, branch: ProjectorBranch) -> Result<FamilyInstance> {
    let fb = match branch {
        ProjectorBranch::Trig => FamilyBranch::ProjectorTrig,
        ProjectorBranch::HypPos => FamilyBranch::ProjectorHypPos,
        ProjectorBranch::HypNeg => FamilyBranch::ProjectorHypNeg,
    };
    if branch == ProjectorBranch::Trig {
        if base.interval.0 <= 0.0 || base.interval.1 >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidBase("trig interval must sit inside (0, π/2)".into()));
        }
    } else if base.interval.0 <= 0.0 {
        return Err(Error::InvalidBase("hyperbolic interval must sit inside (0, ∞)".into()));
    }
    build_family(id, fb, base)
}

impl FamilyInstance {
    /// The same metric with the negated solution −α (tensor −T).
    pub fn negated(&self) -> FamilyInstance {
        let alpha = self.alpha.scaled(-1.0, &format!("alpha_{}_neg", self.id));
        FamilyInstance {
            id: format!("{}_neg", self.id),
            branch: self.branch,
            case: self.case,
            metric: self.metric.clone(),
            alpha,
            base: self.base.clone(),
            alpha_sign: -self.alpha_sign,
        }
    }

    pub fn cone_solution(&self) -> ConeSolution {
        ConeSolution::new(build_cone(&self.metric), self.alpha.clone(), self.case)
    }

    pub fn eps(&self) -> f64 {
        self.branch.eps()
    }

    pub fn alpha_of_s(&self, s: f64) -> f64 {
        self.alpha_sign * self.branch.alpha(&Jet3::constant(s, 1)).value
    }

    pub fn alpha_prime(&self, s: f64) -> f64 {
        self.alpha_sign * self.branch.alpha(&Jet3::coordinate(s, 0, 1)).grad[0]
    }

    /// Slice metric g_s on N for a fixed s.
    pub fn slice_metric(&self, s: f64) -> MetricField {
        let sj = Jet3::constant(s, 1);
        let ch = self.branch.coeff_h(&sj).value;
        let cs = self.branch.coeff_s(&sj).value;
        let h = self.base.metric.clone();
        let t = self.base.tensor.clone();
        let n = h.dim();
        let center = h.chart.center();
        let hv = h.values(&center).unwrap();
        let tv = t.values(&center).unwrap();
        let sig = linalg::signature_of(&(ch * (&hv - &tv) + cs * &tv), 1e-12);
        MetricField::from_fn(
            h.chart.clone(),
            &format!("{}_slice_metric", self.id),
            sig,
            move |jets| {
                let hm = h.components_jets(jets);
                let sm = t.components_jets(jets);
                JetMatrix::from_fn(n, |i, j| {
                    let hij = hm.get(i, j);
                    let sij = sm.get(i, j);
                    &(hij - sij).scale(ch) + &sij.scale(cs)
                })
            },
        )
    }

    /// Slice tensor S_s on N (restriction of the cone tensor at r = 1).
    pub fn slice_tensor(&self, s: f64) -> SymTensorField {
        let sj = Jet3::constant(s, 1);
        let dh = self.branch.slice_coeff_h(&sj).value * self.alpha_sign;
        let ds = self.branch.slice_coeff_s(&sj).value * self.alpha_sign;
        let h = self.base.metric.clone();
        let t = self.base.tensor.clone();
        let n = h.dim();
        SymTensorField::from_fn(
            h.chart.clone(),
            &format!("{}_slice_tensor", self.id),
            move |jets| {
                let hm = h.components_jets(jets);
                let sm = t.components_jets(jets);
                JetMatrix::from_fn(n, |i, j| {
                    let hij = hm.get(i, j);
                    let sij = sm.get(i, j);
                    &(hij - sij).scale(dh) + &sij.scale(ds)
                })
            },
        )
    }

    fn check_slice_nondegeneracy(&self, n: usize, seed: u64) -> Result<()> {
        for p in self.metric.chart.sample_points(n, seed) {
            let s = p.coords[0];
            let g = self.metric.values(&p)?;
            let slice = g.view((1, 1), (g.nrows() - 1, g.ncols() - 1)).into_owned();
            let det = slice.determinant();
            if det.abs() <= 1e-10 {
                return Err(Error::DegenerateSlice { s, det });
            }
        }
        Ok(())
    }

    /// Smallest |det g_s| over samples.
    pub fn min_slice_det(&self, n: usize, seed: u64) -> Result<f64> {
        let mut min = f64::INFINITY;
        for p in self.metric.chart.sample_points(n, seed) {
            let g = self.metric.values(&p)?;
            let slice = g.view((1, 1), (g.nrows() - 1, g.ncols() - 1)).into_owned();
            min = min.min(slice.determinant().abs());
        }
        Ok(min)
    }

    /// sup |DᵗS_s| over slice samples: the slice tensor is parallel for
    /// the slice metric.
    pub fn slice_parallelism_residual(&self, n: usize, seed: u64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for p in self.metric.chart.sample_points(n, seed) {
            let s = p.coords[0];
            let gs = self.slice_metric(s);
            let ts = self.slice_tensor(s);
            let np = Point::new(p.coords[1..].to_vec(), &gs.chart.id);
            let dt = geometry::covariant_derivative_2tensor(&gs, &ts, &np)?;
            sup = sup.max(dt.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        }
        Ok(sup)
    }

    /// Residuals of the slice evolution equations along the
    /// t-parameterization ∂_t = rX = ½ ε α'(s) ∂_s:
    ///
    /// ```text
    /// g'_t = −2ᾱ(t) g_t + 2 S_t,    S'_t = −2ᾱ(t) S_t + 2 S_t²,
    /// ```
    ///
    /// with S_t² = S_t g_t⁻¹ S_t. Differences in t use the base step
    /// 1e-3 with one Richardson level.
    pub fn slice_evolution_residual(&self, n: usize, seed: u64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        let delta = 1e-3;
        for p in self.metric.chart.sample_points(n, seed) {
            let s0 = p.coords[0];
            let np = Point::new(p.coords[1..].to_vec(), &self.base.metric.chart.id);
            let g0 = self.slice_metric(s0).values(&np)?;
            let t0 = self.slice_tensor(s0).values(&np)?;
            let alpha0 = self.alpha_of_s(s0);
            let t0_sq = &t0 * linalg::invert_values(&g0)? * &t0;
            let rhs_g = -2.0 * alpha0 * &g0 + 2.0 * &t0;
            let rhs_t = -2.0 * alpha0 * &t0 + 2.0 * t0_sq;

            let diff = |dt: f64| -> Result<(DMatrix<f64>, DMatrix<f64>)> {
                let sp = self.flow_s(s0, dt);
                let sm = self.flow_s(s0, -dt);
                let gp = self.slice_metric(sp).values(&np)?;
                let gm = self.slice_metric(sm).values(&np)?;
                let tp = self.slice_tensor(sp).values(&np)?;
                let tm = self.slice_tensor(sm).values(&np)?;
                Ok(((gp - gm) / (2.0 * dt), (tp - tm) / (2.0 * dt)))
            };
            let (dg1, dt1) = diff(delta)?;
            let (dg2, dt2) = diff(delta / 2.0)?;
            let dg = (4.0 * dg2 - dg1) / 3.0;
            let dtt = (4.0 * dt2 - dt1) / 3.0;
            sup = sup.max(linalg::max_abs(&(dg - rhs_g)));
            sup = sup.max(linalg::max_abs(&(dtt - rhs_t)));
        }
        Ok(sup)
    }

    /// Integrates ds/dt = ½ ε α'(s) from s0 over parameter t (RK4, a
    /// few substeps; |t| is tiny here).
    fn flow_s(&self, s0: f64, t: f64) -> f64 {
        let f = |s: f64| 0.5 * self.eps() * self.alpha_prime(s);
        let n = 4;
        let h = t / n as f64;
        let mut s = s0;
        for _ in 0..n {
            let k1 = f(s);
            let k2 = f(s + 0.5 * h * k1);
            let k3 = f(s + 0.5 * h * k2);
            let k4 = f(s + h * k3);
            s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        s
    }
}

/// Quadric chart branch: which half-space of the solved coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadricBranch {
    PosX2,
    NegX2,
}

/// Unit quadric {⟨x,x⟩ = 1} of signature (p, q) inside the (p+q+1)-dim
/// flat space of signature (p+1, q), with α the square of the first
/// ambient coordinate.
///
/// For q ≥ 1 the ambient form is `2x₁x₂ + Σᵢ₌₃ xᵢ² − Σⱼ xⱼ²` (p plus
/// squares, q−1 minus squares); chart coordinates are (x₂, x₃, …) with
/// x₁ = (1 − Q)/(2x₂) solved on x₂ ≠ 0, where Q is the diagonal part.
/// For q = 0 the ambient form is Euclidean and the chart is the graph
/// x₁ = √(1 − Σxⱼ²) over a cap.
pub fn build_pseudosphere(p: usize, q: usize) -> Result<(MetricField, ScalarField)> {
    build_pseudosphere_branch(p, q, QuadricBranch::PosX2)
}

pub fn build_pseudosphere_branch(
    p: usize,
    q: usize,
    branch: QuadricBranch,
) -> Result<(MetricField, ScalarField)> {
    if p + q < 2 {
        return Err(Error::Config("quadric needs p + q >= 2".into()));
    }
    let d = p + q;
    if q == 0 {
        // Euclidean cap: coords (x₂..x_{p+1}), x₁ = sqrt(1 − Σ)
        let chart = Chart::new(&format!("cap_s{p}_{q}"), &vec![-0.45; d], &vec![0.45; d]);
        let g = MetricField::from_fn(chart.clone(), &format!("quadric_s{p}_{q}"), (p, 0), move |j| {
            let d = j.len();
            let mut sum = Jet3::zero(d);
            for ji in j {
                sum = &sum + &(ji * ji);
            }
            let w = &Jet3::constant(1.0, d) - &sum; // x₁²
            let winv = w.recip().expect("chart cap keeps 1 - Σx² positive");
            JetMatrix::from_fn(d, |a, b| {
                let mut v = &(&j[a] * &j[b]) * &winv;
                if a == b {
                    v = &v + &Jet3::constant(1.0, d);
                }
                v
            })
        });
        let alpha = ScalarField::from_fn(chart, &format!("x1sq_s{p}_{q}"), |j| {
            let d = j.len();
            let mut sum = Jet3::zero(d);
            for ji in j {
                sum = &sum + &(ji * ji);
            }
            &Jet3::constant(1.0, d) - &sum
        });
        g.validate(30, 19)?;
        return Ok((g, alpha));
    }

    // null-pair chart: coords u0 = x₂, u_a = x_{a+2} (a = 1..d-1),
    // sign ε_a = +1 for a ≤ p, −1 for a > p
    let (x2_lo, x2_hi) = match branch {
        QuadricBranch::PosX2 => (0.4, 2.0),
        QuadricBranch::NegX2 => (-2.0, -0.4),
    };
    let mut lo = vec![x2_lo];
    let mut hi = vec![x2_hi];
    lo.extend(vec![-0.8; d - 1]);
    hi.extend(vec![0.8; d - 1]);
    let tag = match branch {
        QuadricBranch::PosX2 => "pos",
        QuadricBranch::NegX2 => "neg",
    };
    let chart = Chart::new(&format!("quadric_s{p}_{q}_{tag}"), &lo, &hi);
    let eps_of = move |a: usize| if a <= p { 1.0 } else { -1.0 };

    let g = MetricField::from_fn(
        chart.clone(),
        &format!("quadric_s{p}_{q}_{tag}"),
        (p, q),
        move |j| {
            let d = j.len();
            let x2 = &j[0];
            let x2inv = x2.recip().expect("chart excludes x2 = 0");
            // Q = Σ ε_a u_a², x₁ = (1 − Q)/(2 x₂)
            let mut qq = Jet3::zero(d);
            for a in 1..d {
                qq = &qq + &(&j[a] * &j[a]).scale(eps_of(a));
            }
            let one = Jet3::constant(1.0, d);
            // ∂x₁/∂x₂ = −(1−Q)/(2x₂²), ∂x₁/∂u_a = −ε_a u_a / x₂
            let dx1_dx2 = (&(&one - &qq) * &(&x2inv * &x2inv)).scale(-0.5);
            JetMatrix::from_fn(d, |a, b| {
                if a == 0 && b == 0 {
                    dx1_dx2.scale(2.0)
                } else if a == 0 || b == 0 {
                    let c = a.max(b);
                    (&j[c] * &x2inv).scale(-eps_of(c))
                } else if a == b {
                    Jet3::constant(eps_of(a), d)
                } else {
                    Jet3::zero(d)
                }
            })
        },
    );
    let alpha = ScalarField::from_fn(chart, &format!("x1sq_s{p}_{q}_{tag}"), move |j| {
        let d = j.len();
        let x2inv = j[0].recip().expect("chart excludes x2 = 0");
        let mut qq = Jet3::zero(d);
        for a in 1..d {
            qq = &qq + &(&j[a] * &j[a]).scale(eps_of(a));
        }
        let x1 = (&(&Jet3::constant(1.0, d) - &qq) * &x2inv).scale(0.5);
        &x1 * &x1
    });
    g.validate(30, 19)?;
    Ok((g, alpha))
}

/// Ambient x₁ for the null-pair quadric chart; errors when the solved
/// coordinate's denominator is near zero.
pub fn quadric_ambient_x1(p: usize, coords: &[f64]) -> Result<f64> {
    let x2 = coords[0];
    if x2.abs() < 1e-3 {
        return Err(Error::ChartSingularity { value: x2 });
    }
    let mut qq = 0.0;
    for (a, &u) in coords.iter().enumerate().skip(1) {
        let eps = if a <= p { 1.0 } else { -1.0 };
        qq += eps * u * u;
    }
    Ok((1.0 - qq) / (2.0 * x2))
}

/// Compactly supported smooth bump `exp(−1/(1−u²))` with
/// `u = |y − center|/radius`.
#[derive(Clone, Debug)]
pub struct BumpSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

pub(crate) fn bump_jet(spec: &BumpSpec, y: &[Jet3]) -> Jet3 {
    let d = y[0].dim;
    let mut u2 = Jet3::zero(d);
    for (yi, &ci) in y.iter().zip(&spec.center) {
        let s = yi - &Jet3::constant(ci, d);
        u2 = &u2 + &(&s * &s);
    }
    u2 = u2.scale(1.0 / (spec.radius * spec.radius));
    if u2.value >= 1.0 - 1e-3 {
        // outside (or within underflow distance of) the support
        return Jet3::zero(d);
    }
    let w = &Jet3::constant(1.0, d) - &u2;
    let neg_inv = w.recip().expect("w > 0 inside support").scale(-1.0);
    neg_inv.exp()
}

/// Nilpotent-type metric `−dt² + e^{−2t}(h₀ + amplitude·bump(y)·dy₁²)`
/// on (t, y) with flat h₀ of signature (p, q−1), and the exact solution
/// α = e^{−2t}. With amplitude 0 this is a flat-sliced chart of the
/// unit quadric; the bump makes the curvature non-constant inside its
/// support without disturbing the solution property.
pub fn build_perturbed_pseudosphere(
    p: usize,
    q: usize,
    bump: BumpSpec,
) -> Result<(MetricField, ScalarField)> {
    if q < 1 {
        return Err(Error::Config("perturbed chart needs q >= 1".into()));
    }
    let n_base = p + q - 1;
    if bump.center.len() != n_base {
        return Err(Error::Config(format!("bump center must have dimension {n_base}")));
    }
    let t_box = (-1.0, 1.2);
    let y_box = (-1.5, 1.5);
    let mut lo = vec![t_box.0];
    let mut hi = vec![t_box.1];
    lo.extend(vec![y_box.0; n_base]);
    hi.extend(vec![y_box.1; n_base]);
    // support strictly inside the y-box
    for &c in &bump.center {
        if c - bump.radius <= y_box.0 || c + bump.radius >= y_box.1 {
            return Err(Error::Config("bump support must sit strictly inside the chart".into()));
        }
    }
    let chart = Chart::new(&format!("perturbed_s{p}_{q}"), &lo, &hi);
    let spec = bump.clone();
    let signature = (p, q);
    let g = MetricField::from_fn(
        chart.clone(),
        &format!("perturbed_s{p}_{q}"),
        signature,
        move |j| {
            let d = j.len();
            let warp = (&j[0] * -2.0).exp();
            let b = bump_jet(&spec, &j[1..]);
            JetMatrix::from_fn(d, |a, bb| {
                if a == 0 && bb == 0 {
                    Jet3::constant(-1.0, d)
                } else if a == 0 || bb == 0 {
                    Jet3::zero(d)
                } else if a == bb {
                    let base = if a <= p { 1.0 } else { -1.0 };
                    let mut comp = Jet3::constant(base, d);
                    if a == 1 {
                        comp = &comp + &b.scale(spec.amplitude);
                    }
                    &warp * &comp
                } else {
                    Jet3::zero(d)
                }
            })
        },
    );
    // the perturbed slice metric must stay nondegenerate
    let max_bump = (-1.0f64).exp();
    if 1.0 + bump.amplitude * max_bump <= 1e-6 {
        return Err(Error::BumpTooLarge { det: 1.0 + bump.amplitude * max_bump });
    }
    g.validate(30, 29)?;
    let alpha = ScalarField::from_fn(chart, &format!("exp_m2t_s{p}_{q}"), |j| (&j[0] * -2.0).exp());
    Ok((g, alpha))
}
