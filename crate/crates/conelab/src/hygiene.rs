//! Cross-validation of the Taylor arithmetic against difference
//! quotients on randomly composed expression trees.
//!
//! The f64 evaluator used by the difference oracle is a plain
//! arithmetic walk of the tree — it shares no code with the jet lanes
//! it checks. Trees are accepted only if every probe on a grid
//! enclosing the difference stencils stays finite and inside the
//! domain guards (bounded exp/sinh arguments, denominators and sqrt
//! arguments away from zero), which bounds the derivative growth the
//! stencils have to resolve.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fd::{default_steps, fd_derivatives_extrapolated, fd_derivatives_refined};
use crate::jet::{seed_all, Jet3};

#[derive(Clone, Debug)]
pub enum Expr {
    Coord(usize),
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sinh(Box<Expr>),
    Cosh(Box<Expr>),
    Tanh(Box<Expr>),
    PowInt(Box<Expr>, i32),
}

impl Expr {
    /// Plain arithmetic with domain guards; NaN marks a rejected region.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let guard = |v: f64| if v.is_finite() && v.abs() <= 100.0 { v } else { f64::NAN };
        match self {
            Expr::Coord(i) => x[*i],
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval_f64(x),
            Expr::Add(a, b) => guard(a.eval_f64(x) + b.eval_f64(x)),
            Expr::Sub(a, b) => guard(a.eval_f64(x) - b.eval_f64(x)),
            Expr::Mul(a, b) => guard(a.eval_f64(x) * b.eval_f64(x)),
            Expr::Div(a, b) => {
                let den = b.eval_f64(x);
                if den.abs() < 0.5 {
                    return f64::NAN;
                }
                guard(a.eval_f64(x) / den)
            }
            Expr::Sqrt(a) => {
                let v = a.eval_f64(x);
                if v < 0.5 {
                    return f64::NAN;
                }
                v.sqrt()
            }
            Expr::Exp(a) => {
                let v = a.eval_f64(x);
                if v > 2.0 {
                    return f64::NAN;
                }
                v.exp()
            }
            Expr::Sin(a) => guard(a.eval_f64(x)).sin(),
            Expr::Cos(a) => guard(a.eval_f64(x)).cos(),
            Expr::Sinh(a) | Expr::Cosh(a) => {
                let v = a.eval_f64(x);
                if v.abs() > 2.0 {
                    return f64::NAN;
                }
                if matches!(self, Expr::Sinh(_)) {
                    v.sinh()
                } else {
                    v.cosh()
                }
            }
            Expr::Tanh(a) => guard(a.eval_f64(x)).tanh(),
            Expr::PowInt(a, n) => {
                let v = a.eval_f64(x);
                if v.abs() > 10.0 {
                    return f64::NAN;
                }
                v.powi(*n)
            }
        }
    }

    pub fn eval_jet(&self, jets: &[Jet3]) -> Jet3 {
        let d = jets[0].dim;
        match self {
            Expr::Coord(i) => jets[*i].clone(),
            Expr::Const(c) => Jet3::constant(*c, d),
            Expr::Neg(a) => -a.eval_jet(jets),
            Expr::Add(a, b) => a.eval_jet(jets) + b.eval_jet(jets),
            Expr::Sub(a, b) => a.eval_jet(jets) - b.eval_jet(jets),
            Expr::Mul(a, b) => a.eval_jet(jets) * b.eval_jet(jets),
            Expr::Div(a, b) => a.eval_jet(jets).try_div(&b.eval_jet(jets)).expect("guarded"),
            Expr::Sqrt(a) => a.eval_jet(jets).sqrt().expect("guarded"),
            Expr::Exp(a) => a.eval_jet(jets).exp(),
            Expr::Sin(a) => a.eval_jet(jets).sin(),
            Expr::Cos(a) => a.eval_jet(jets).cos(),
            Expr::Sinh(a) => a.eval_jet(jets).sinh(),
            Expr::Cosh(a) => a.eval_jet(jets).cosh(),
            Expr::Tanh(a) => a.eval_jet(jets).tanh(),
            Expr::PowInt(a, n) => a.eval_jet(jets).powi(*n).expect("guarded"),
        }
    }

    #[doc(hidden)]
    pub fn random_pub(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> Expr {
        Expr::random(rng, dim, depth)
    }

    fn random(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> Expr {
        if depth == 0 {
            return if rng.gen::<f64>() < 0.7 {
                Expr::Coord(rng.gen_range(0..dim))
            } else {
                Expr::Const(rng.gen_range(-1.5..1.5))
            };
        }
        let next = |rng: &mut ChaCha8Rng| Box::new(Expr::random(rng, dim, depth - 1));
        // nonlinear compositions get a damped argument, which keeps the
        // high-order derivative growth within what the difference
        // stencils can resolve at their fixed steps
        let damped = |rng: &mut ChaCha8Rng| {
            let c = rng.gen_range(0.3..0.6);
            Box::new(Expr::Mul(Box::new(Expr::Const(c)), Box::new(Expr::random(rng, dim, depth - 1))))
        };
        match rng.gen_range(0..14) {
            0 | 1 => Expr::Add(next(rng), next(rng)),
            2 => Expr::Sub(next(rng), next(rng)),
            3 | 4 => Expr::Mul(next(rng), next(rng)),
            5 => Expr::Div(next(rng), damped(rng)),
            6 => Expr::Sqrt(damped(rng)),
            7 => Expr::Exp(damped(rng)),
            8 => Expr::Sin(damped(rng)),
            9 => Expr::Cos(damped(rng)),
            10 => Expr::Sinh(damped(rng)),
            11 => Expr::Cosh(damped(rng)),
            12 => Expr::Tanh(damped(rng)),
            _ => Expr::PowInt(damped(rng), rng.gen_range(2..=3)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub n_trees: usize,
    /// worst |jet − difference| / max(|jet|, |difference|, 1e-3·scale):
    /// ≤ 1e-5 encodes "1e-5 relative with a 1e-8 absolute floor at the
    /// function's own scale"
    pub worst_relative: f64,
}

#[doc(hidden)]
pub fn finite_on_probe_grid_pub(expr: &Expr, x: &[f64]) -> bool { finite_on_probe_grid(expr, x) }

fn finite_on_probe_grid(expr: &Expr, x: &[f64]) -> bool {
    let d = x.len();
    let h = default_steps(x, 3);
    let n_grid = 3usize.pow(d as u32);
    for g in 0..n_grid {
        let mut y = x.to_vec();
        let mut idx = g;
        for i in 0..d {
            let shift = [(-2.2), 0.0, 2.2][idx % 3];
            y[i] += shift * h[i];
            idx /= 3;
        }
        if !expr.eval_f64(&y).is_finite() {
            return false;
        }
    }
    true
}

/// Generates `n_trees` accepted random composition trees of depth ≤ 5
/// over 1–4 variables and compares all jet coefficients against the
/// refined difference oracle.
pub fn composition_agreement(seed: u64, n_trees: usize) -> AgreementReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut worst: f64 = 0.0;
    while accepted < n_trees {
        let dim = rng.gen_range(1..=4);
        let depth = rng.gen_range(1..=5);
        let expr = Expr::random(&mut rng, dim, depth);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.2..1.2)).collect();
        if !finite_on_probe_grid(&expr, &x) {
            continue;
        }
        accepted += 1;

        let jet = expr.eval_jet(&seed_all(&x));
        let scale = jet.max_abs().max(1.0);
        let f = |c: &[f64]| expr.eval_f64(c);
        let lo = fd_derivatives_refined(&f, &x, 2, &default_steps(&x, 2));
        // two-level tableau over steps {2h, h, h/2} around the standard
        // order-3 step h: O(h^6) truncation with round-off still below
        // the absolute floor on vanishing coefficients
        let h3: Vec<f64> = default_steps(&x, 3).iter().map(|v| 2.0 * v).collect();
        let hi = fd_derivatives_extrapolated(&f, &x, 3, &h3, 2);
        let mut record = |a: f64, b: f64| {
            let denom = a.abs().max(b.abs()).max(1e-3 * scale);
            worst = worst.max((a - b).abs() / denom);
        };
        for i in 0..dim {
            record(jet.grad[i], lo.grad[i]);
            for j in 0..dim {
                record(jet.h(i, j), lo.h(i, j));
                for k in 0..dim {
                    record(jet.t3(i, j, k), hi.t3(i, j, k));
                }
            }
        }
    }
    AgreementReport { n_trees, worst_relative: worst }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_tree_agreement() {
        let report = composition_agreement(7, 100);
        assert_eq!(report.n_trees, 100);
        assert!(report.worst_relative < 1e-5, "worst {}", report.worst_relative);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = composition_agreement(42, 50);
        let b = composition_agreement(42, 50);
        assert_eq!(a.worst_relative, b.worst_relative);
    }
}
