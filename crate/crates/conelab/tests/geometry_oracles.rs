//! Jet-computed geometry against the difference-composed oracles over
//! seeded sample sweeps on the metric zoo.

use conelab::families::{build_pseudosphere, round_sphere_2};
use conelab::field::{MetricField, ScalarField};
use conelab::fixtures;
use conelab::geometry::{self, oracle};

fn close(a: f64, b: f64, what: &str) {
    let tol = 1e-5 * a.abs().max(b.abs()).max(1.0);
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
}

fn sweep_christoffel(g: &MetricField, n: usize) {
    let d = g.dim();
    for p in g.chart.sample_points(n, 42) {
        let fd = oracle::fd_christoffel_values(g, &p).unwrap();
        let jets = geometry::christoffel(g, &p).unwrap();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    close(jets.val(k, i, j), fd[(k * d + i) * d + j], &g.id);
                }
            }
        }
        // exact symmetry of the connection coefficients
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(jets.val(k, i, j), jets.val(k, j, i));
                }
            }
        }
    }
}

fn sweep_hessian_and_third(g: &MetricField, alpha: &ScalarField, n: usize) {
    let d = g.dim();
    for p in g.chart.sample_points(n, 43) {
        let fd_h = oracle::fd_covariant_hessian(g, alpha, &p).unwrap();
        let jet_h = geometry::covariant_hessian(g, alpha, &p).unwrap();
        for i in 0..d {
            for j in 0..d {
                close(jet_h[(i, j)], fd_h[(i, j)], &format!("{} hessian", g.id));
            }
        }
        let fd_t = oracle::fd_covariant_third(g, alpha, &p).unwrap();
        let jet_t = geometry::covariant_third(g, alpha, &p).unwrap();
        for idx in 0..d * d * d {
            close(jet_t[idx], fd_t[idx], &format!("{} third", g.id));
        }
    }
}

#[test]
fn sphere_quantities_match_oracles() {
    let g = round_sphere_2();
    sweep_christoffel(&g, 50);
    let alpha = conelab::families::sphere_height_squared();
    sweep_hessian_and_third(&g, &alpha, 50);
}

#[test]
fn quadric_quantities_match_oracles() {
    let (g, alpha) = build_pseudosphere(2, 1).unwrap();
    sweep_christoffel(&g, 50);
    sweep_hessian_and_third(&g, &alpha, 20);
}

#[test]
fn family_quantities_match_oracles() {
    let inst = fixtures::nilpotent_null_frame();
    sweep_christoffel(&inst.metric, 50);
    sweep_hessian_and_third(&inst.metric, &inst.alpha, 20);

    let cx = fixtures::complex_minimal();
    sweep_christoffel(&cx.metric, 50);
}

#[test]
fn warped_chart_matches_oracles() {
    let w = fixtures::warped_instance(2).unwrap();
    sweep_christoffel(&w.cartesian, 30);
    sweep_hessian_and_third(&w.cartesian, &w.cartesian_alpha, 12);
}

#[test]
fn metric_compatibility_and_bianchi_across_the_zoo() {
    let (quadric, _) = build_pseudosphere(1, 2).unwrap();
    let metrics = vec![round_sphere_2(), quadric, fixtures::projector_hyp_pos().metric];
    for g in &metrics {
        for p in g.chart.sample_points(20, 44) {
            assert!(geometry::metric_compatibility_residual(g, &p).unwrap() < 1e-10);
            let r = geometry::riemann(g, &p).unwrap();
            assert!(r.first_bianchi_residual() < 1e-9);
            assert!(r.antisymmetry_residual() < 1e-9);
        }
    }
}
