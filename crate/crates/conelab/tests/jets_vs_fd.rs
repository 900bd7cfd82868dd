//! The Taylor arithmetic against the independent difference oracle:
//! every primitive, 1000 random composition trees, and the algebraic
//! jet invariants.

use conelab::fd::{default_steps, fd_derivatives, fd_derivatives_refined};
use conelab::hygiene::composition_agreement;
use conelab::jet::{seed_all, Jet3};
use proptest::prelude::*;

fn against_oracle(name: &str, f64_eval: impl Fn(&[f64]) -> f64, jet_eval: impl Fn(&[Jet3]) -> Jet3, x: &[f64]) {
    let jet = jet_eval(&seed_all(x));
    let scale = jet.max_abs().max(1.0);
    let lo = fd_derivatives_refined(&|c: &[f64]| f64_eval(c), x, 2, &default_steps(x, 2));
    let h3: Vec<f64> = default_steps(x, 3).iter().map(|v| 2.0 * v).collect();
    let hi = conelab::fd::fd_derivatives_extrapolated(&|c: &[f64]| f64_eval(c), x, 3, &h3, 2);
    let d = x.len();
    let check = |a: f64, b: f64, what: &str| {
        let tol = 1e-5 * a.abs().max(b.abs()).max(1e-3 * scale);
        assert!((a - b).abs() <= tol, "{name} {what}: jet {a} vs fd {b}");
    };
    for i in 0..d {
        check(jet.grad[i], lo.grad[i], "grad");
        for j in 0..d {
            check(jet.h(i, j), lo.h(i, j), "hess");
            for k in 0..d {
                check(jet.t3(i, j, k), hi.t3(i, j, k), "third");
            }
        }
    }
}

#[test]
fn every_primitive_matches_the_oracle() {
    let x = [0.37, -0.61];
    against_oracle("add", |c| c[0] + c[1], |j| &j[0] + &j[1], &x);
    against_oracle("sub", |c| c[0] - c[1], |j| &j[0] - &j[1], &x);
    against_oracle("mul", |c| c[0] * c[1], |j| &j[0] * &j[1], &x);
    against_oracle("neg", |c| -c[0], |j| -j[0].clone(), &x);
    against_oracle(
        "div",
        |c| c[0] / (2.0 + c[1]),
        |j| j[0].try_div(&(&j[1] + &Jet3::constant(2.0, 2))).unwrap(),
        &x,
    );
    against_oracle(
        "sqrt",
        |c| (1.5 + c[0]).sqrt(),
        |j| (&j[0] + &Jet3::constant(1.5, 2)).sqrt().unwrap(),
        &x,
    );
    against_oracle("exp", |c| c[0].exp(), |j| j[0].exp(), &x);
    against_oracle("sin", |c| c[0].sin(), |j| j[0].sin(), &x);
    against_oracle("cos", |c| c[0].cos(), |j| j[0].cos(), &x);
    against_oracle("sinh", |c| c[0].sinh(), |j| j[0].sinh(), &x);
    against_oracle("cosh", |c| c[0].cosh(), |j| j[0].cosh(), &x);
    against_oracle("tanh", |c| c[0].tanh(), |j| j[0].tanh(), &x);
    against_oracle("pow2", |c| c[0].powi(2), |j| j[0].powi(2).unwrap(), &x);
    against_oracle("pow3", |c| c[0].powi(3), |j| j[0].powi(3).unwrap(), &x);
}

#[test]
fn thousand_random_trees_agree() {
    let report = composition_agreement(42, 1000);
    assert_eq!(report.n_trees, 1000);
    assert!(
        report.worst_relative < 1e-5,
        "worst relative mismatch {} over 1000 trees",
        report.worst_relative
    );
}

#[test]
fn derived_cos_squared_coefficients() {
    // frozen values computed with the difference oracle first
    let f = |c: &[f64]| c[0].cos() * c[0].cos();
    let fd = fd_derivatives(&f, &[0.0], 3, &[1e-2]);
    assert!((fd.value - 1.0).abs() < 1e-12);
    assert!(fd.grad[0].abs() < 1e-10);
    assert!((fd.h(0, 0) + 2.0).abs() < 1e-4);
    assert!(fd.t3(0, 0, 0).abs() < 1e-4);
    // the jet path reproduces the frozen coefficients exactly
    let x = seed_all(&[0.0]);
    let jet = &x[0].cos() * &x[0].cos();
    assert!((jet.value - 1.0).abs() < 1e-15);
    assert!(jet.grad[0].abs() < 1e-15);
    assert!((jet.h(0, 0) + 2.0).abs() < 1e-15);
    assert!(jet.t3(0, 0, 0).abs() < 1e-15);
}

fn arb_jet(dim: usize) -> impl Strategy<Value = Jet3> {
    let coeff = -2.0f64..2.0;
    (
        coeff.clone(),
        proptest::collection::vec(coeff.clone(), dim),
        proptest::collection::vec(coeff.clone(), dim * dim),
        proptest::collection::vec(coeff, dim * dim * dim),
    )
        .prop_map(move |(value, grad, h_raw, t_raw)| {
            // symmetrize the raw arrays so the inputs are valid jets
            let mut jet = Jet3::zero(dim);
            jet.value = value;
            jet.grad = grad;
            for i in 0..dim {
                for j in 0..dim {
                    let v = 0.5 * (h_raw[i * dim + j] + h_raw[j * dim + i]);
                    jet.hess[i * dim + j] = v;
                }
            }
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        let mut acc = 0.0;
                        for (a, b, c) in
                            [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
                        {
                            acc += t_raw[(a * dim + b) * dim + c];
                        }
                        jet.third[(i * dim + j) * dim + k] = acc / 6.0;
                    }
                }
            }
            jet
        })
}

fn assert_jets_close(a: &Jet3, b: &Jet3, tol: f64) {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    assert!((a.value - b.value).abs() <= tol * scale);
    for (x, y) in a.grad.iter().zip(&b.grad) {
        assert!((x - y).abs() <= tol * scale);
    }
    for (x, y) in a.hess.iter().zip(&b.hess) {
        assert!((x - y).abs() <= tol * scale);
    }
    for (x, y) in a.third.iter().zip(&b.third) {
        assert!((x - y).abs() <= tol * scale);
    }
}

proptest! {
    #[test]
    fn addition_commutes_and_associates(a in arb_jet(3), b in arb_jet(3), c in arb_jet(3)) {
        assert_jets_close(&(&a + &b), &(&b + &a), 0.0);
        assert_jets_close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-15);
    }

    #[test]
    fn multiplication_commutes_and_associates(a in arb_jet(3), b in arb_jet(3), c in arb_jet(3)) {
        assert_jets_close(&(&a * &b), &(&b * &a), 1e-15);
        assert_jets_close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-13);
    }

    #[test]
    fn symmetry_is_bitwise_after_operations(a in arb_jet(3), b in arb_jet(3)) {
        let results = [&a + &b, &a * &b, a.exp(), a.tanh(), &(&a * &b) - &b];
        for r in &results {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(r.h(i, j), r.h(j, i));
                    for k in 0..3 {
                        assert_eq!(r.t3(i, j, k), r.t3(j, i, k));
                        assert_eq!(r.t3(i, j, k), r.t3(i, k, j));
                        assert_eq!(r.t3(i, j, k), r.t3(k, j, i));
                    }
                }
            }
        }
    }

    #[test]
    fn finite_inputs_stay_finite(a in arb_jet(2), b in arb_jet(2)) {
        let c = &(&a * &b) + &(&a - &b);
        prop_assert!(c.is_finite());
        prop_assert!(c.sin().is_finite());
        prop_assert!(c.tanh().is_finite());
    }
}
