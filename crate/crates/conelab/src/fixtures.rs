//! The standard instance set used by the verification suites.

use nalgebra::DMatrix;

use crate::chart::{Chart, Point};
use crate::cone::CaseTag;
use crate::error::Result;
use crate::families::{
    build_complex, build_nilpotent, build_projector, build_pseudosphere,
    build_perturbed_pseudosphere, BaseData, BumpSpec, FamilyInstance, ProjectorBranch,
};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::warped::{build_warped_hyperbolic, WarpedHyperbolicProduct};

fn flat_chart(name: &str, n: usize, half: f64) -> Chart {
    Chart::new(name, &vec![-half; n], &vec![half; n])
}

/// Flat ℝ² with trivial S: `g = −ds² + e^{2s}(dx² + dy²)`.
pub fn nilpotent_flat() -> FamilyInstance {
    let chart = flat_chart("nil_flat_base", 2, 1.5);
    let h = MetricField::constant(chart.clone(), "flat2", DMatrix::identity(2, 2));
    let s = SymTensorField::constant(chart, "zero", DMatrix::zeros(2, 2));
    let base = BaseData::new(h, s, CaseTag::Nilpotent, (-0.8, 0.8)).unwrap();
    build_nilpotent("nilpotent_flat", base).unwrap()
}

/// Flat ℝ^{1,1} in a null frame with the rank-one nilpotent block.
pub fn nilpotent_null_frame() -> FamilyInstance {
    let chart = flat_chart("nil_null_base", 2, 1.5);
    let h = MetricField::constant(
        chart.clone(),
        "null_frame",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
    );
    let s = SymTensorField::constant(
        chart,
        "rank1_null",
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
    );
    let base = BaseData::new(h, s, CaseTag::Nilpotent, (-0.8, 0.8)).unwrap();
    build_nilpotent("nilpotent_null", base).unwrap()
}

/// Split-signature plane with a rotation-like S, S̃² = −Id.
pub fn complex_minimal() -> FamilyInstance {
    let chart = flat_chart("cx_base", 2, 1.5);
    let h = MetricField::constant(
        chart.clone(),
        "split2",
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
    );
    let s = SymTensorField::constant(
        chart,
        "rotation",
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
    );
    let base = BaseData::new(h, s, CaseTag::Complex, (-0.7, 0.7)).unwrap();
    build_complex("complex_minimal", base).unwrap()
}

/// Flat 2-torus with projection onto the first circle:
/// `g = ds² + sin²(s)dθ₂² + cos²(s)dθ₁²`, a round 3-sphere chart.
pub fn projector_trig_torus() -> FamilyInstance {
    let chart = Chart::new("torus_base", &[0.3, 0.3], &[5.9, 5.9]);
    let h = MetricField::constant(chart.clone(), "flat_torus", DMatrix::identity(2, 2));
    let s = SymTensorField::constant(
        chart,
        "first_factor",
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
    );
    let base = BaseData::new(h, s, CaseTag::Projector, (0.25, 1.3)).unwrap();
    build_projector("projector_trig_torus", base, ProjectorBranch::Trig).unwrap()
}

/// Circle fiber with trivial S: `g = ds² + sin²(s)dφ²`, a round
/// 2-sphere band.
pub fn projector_trig_circle() -> FamilyInstance {
    let chart = Chart::new("circle_base", &[0.3], &[5.9]);
    let h = MetricField::constant(chart.clone(), "circle", DMatrix::identity(1, 1));
    let s = SymTensorField::constant(chart, "zero", DMatrix::zeros(1, 1));
    let base = BaseData::new(h, s, CaseTag::Projector, (0.25, 1.32)).unwrap();
    build_projector("projector_trig_circle", base, ProjectorBranch::Trig).unwrap()
}

fn hyp_base() -> BaseData {
    let chart = flat_chart("hyp_base", 2, 1.5);
    let h = MetricField::constant(chart.clone(), "flat2", DMatrix::identity(2, 2));
    let s = SymTensorField::constant(
        chart,
        "first_axis",
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
    );
    BaseData::new(h, s, CaseTag::Projector, (0.3, 1.5)).unwrap()
}

/// Hyperbolic projector branch with α = cosh²(s) > 1.
pub fn projector_hyp_pos() -> FamilyInstance {
    build_projector("projector_hyp_pos", hyp_base(), ProjectorBranch::HypPos).unwrap()
}

/// Hyperbolic projector branch with α = −sinh²(s) < 0 (the
/// complementary tensor on the same metric).
pub fn projector_hyp_neg() -> FamilyInstance {
    build_projector("projector_hyp_neg", hyp_base(), ProjectorBranch::HypNeg).unwrap()
}

/// The family fixture set: all four construction cases, both hyperbolic
/// sub-cases, and a negated solution.
pub fn family_set() -> Vec<FamilyInstance> {
    vec![
        nilpotent_flat(),
        nilpotent_null_frame(),
        nilpotent_flat().negated(),
        complex_minimal(),
        projector_trig_torus(),
        projector_trig_circle(),
        projector_hyp_pos(),
        projector_hyp_neg(),
    ]
}

/// Start point and flow length for the profile check of an instance.
pub fn profile_plan(instance: &FamilyInstance) -> (Point, f64) {
    use crate::families::FamilyBranch::*;
    let s0 = match (instance.branch, instance.alpha_sign > 0.0) {
        (Nilpotent, true) => -0.4,
        (Nilpotent, false) => 0.4,
        (Complex, _) => -0.25,
        (ProjectorTrig, _) => 0.7,
        (ProjectorHypPos, _) => 0.5,
        (ProjectorHypNeg, _) => 1.1,
    };
    let s_max = match instance.branch {
        ProjectorTrig | Complex => 0.5,
        _ => 0.55,
    };
    let mut coords = vec![s0];
    coords.extend(instance.base.metric.chart.center().coords);
    (Point::new(coords, &instance.metric.chart.id), s_max)
}

/// The quadric model instances (round, and two indefinite charts).
pub fn pseudosphere_set() -> Result<Vec<((usize, usize), MetricField, ScalarField)>> {
    let mut out = Vec::new();
    for (p, q) in [(2usize, 0usize), (2, 1), (1, 2)] {
        let (g, alpha) = build_pseudosphere(p, q)?;
        out.push(((p, q), g, alpha));
    }
    Ok(out)
}

pub fn default_bump() -> BumpSpec {
    BumpSpec { center: vec![0.2, -0.1], radius: 0.5, amplitude: 0.1 }
}

pub fn perturbed_instance(bump: &BumpSpec) -> Result<(MetricField, ScalarField)> {
    build_perturbed_pseudosphere(2, 1, bump.clone())
}

/// Warped product over a flat line fiber with an n₁-dimensional leaf.
pub fn warped_instance(n1: usize) -> Result<WarpedHyperbolicProduct> {
    let chart = Chart::new("fiber_line", &[-1.5], &[1.5]);
    let fiber = MetricField::constant(chart, "flat_line", DMatrix::identity(1, 1));
    build_warped_hyperbolic(n1, fiber)
}
