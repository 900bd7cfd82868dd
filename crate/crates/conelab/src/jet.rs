//! Truncated Taylor arithmetic of order 3 in `d` variables.
//!
//! A [`Jet3`] carries the value of a scalar together with its first,
//! second and third coordinate derivatives at a point. Arithmetic
//! propagates derivatives exactly (Leibniz / Faà di Bruno truncated at
//! order 3), so any scalar built from seeded coordinates by the
//! supported primitives carries exact derivatives, up to rounding.
//!
//! `hess` and `third` are stored full; entries are computed once per
//! sorted index tuple and mirrored, so symmetry holds bitwise.

use crate::error::{Error, Result};

/// Order-3 jet of a scalar in `dim` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet3 {
    pub dim: usize,
    pub value: f64,
    /// ∂_i, length `dim`.
    pub grad: Vec<f64>,
    /// ∂_i∂_j, row-major `dim × dim`, symmetric.
    pub hess: Vec<f64>,
    /// ∂_i∂_j∂_k, `dim³`, symmetric under all permutations.
    pub third: Vec<f64>,
}

impl Jet3 {
    pub fn zero(dim: usize) -> Self {
        Jet3 {
            dim,
            value: 0.0,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
            third: vec![0.0; dim * dim * dim],
        }
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        let mut j = Self::zero(dim);
        j.value = value;
        j
    }

    /// Jet of the `i`-th coordinate function at a point with coordinate
    /// value `value`: gradient `e_i`, higher orders zero.
    pub fn coordinate(value: f64, i: usize, dim: usize) -> Self {
        assert!(i < dim, "coordinate index {i} out of range for dim {dim}");
        let mut j = Self::zero(dim);
        j.value = value;
        j.grad[i] = 1.0;
        j
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }

    #[inline]
    pub fn t3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    fn set_h(&mut self, i: usize, j: usize, v: f64) {
        self.hess[i * self.dim + j] = v;
        self.hess[j * self.dim + i] = v;
    }

    #[inline]
    fn set_t3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim;
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            self.third[(a * d + b) * d + c] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
            && self.third.iter().all(|x| x.is_finite())
    }

    /// Largest absolute coefficient over all orders.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.value.abs();
        for x in self.grad.iter().chain(&self.hess).chain(&self.third) {
            m = m.max(x.abs());
        }
        m
    }

    /// Jet of ∂_i of this scalar, valid one order lower (its `third`
    /// is set to zero and must not be consumed).
    pub fn partial(&self, i: usize) -> Jet3 {
        let d = self.dim;
        let mut out = Jet3::zero(d);
        out.value = self.grad[i];
        for j in 0..d {
            out.grad[j] = self.h(i, j);
        }
        for j in 0..d {
            for k in j..d {
                out.set_h(j, k, self.t3(i, j, k));
            }
        }
        out
    }

    /// Re-index into a larger variable space: old variable `i` becomes
    /// `offset + i`, derivatives along the new variables are zero.
    pub fn embed(&self, new_dim: usize, offset: usize) -> Jet3 {
        assert!(offset + self.dim <= new_dim);
        let d = self.dim;
        let mut out = Jet3::zero(new_dim);
        out.value = self.value;
        for i in 0..d {
            out.grad[offset + i] = self.grad[i];
        }
        for i in 0..d {
            for j in i..d {
                out.set_h(offset + i, offset + j, self.h(i, j));
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    out.set_t3(offset + i, offset + j, offset + k, self.t3(i, j, k));
                }
            }
        }
        out
    }

    fn binary(&self, rhs: &Jet3, f: impl Fn(f64, f64) -> f64) -> Jet3 {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let d = self.dim;
        let mut out = Jet3::zero(d);
        out.value = f(self.value, rhs.value);
        for i in 0..d {
            out.grad[i] = f(self.grad[i], rhs.grad[i]);
        }
        for i in 0..d {
            for j in i..d {
                out.set_h(i, j, f(self.h(i, j), rhs.h(i, j)));
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    out.set_t3(i, j, k, f(self.t3(i, j, k), rhs.t3(i, j, k)));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        let mut out = self.clone();
        out.value *= c;
        out.grad.iter_mut().for_each(|x| *x *= c);
        out.hess.iter_mut().for_each(|x| *x *= c);
        out.third.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Composition with a univariate function: `w = φ(value)`,
    /// `p1..p3` its first three derivatives at `value`.
    fn chain(&self, w: f64, p1: f64, p2: f64, p3: f64) -> Jet3 {
        let d = self.dim;
        let g = &self.grad;
        let mut out = Jet3::zero(d);
        out.value = w;
        for i in 0..d {
            out.grad[i] = p1 * g[i];
        }
        for i in 0..d {
            for j in i..d {
                out.set_h(i, j, p2 * g[i] * g[j] + p1 * self.h(i, j));
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    let v = p3 * g[i] * g[j] * g[k]
                        + p2 * (self.h(i, j) * g[k] + self.h(i, k) * g[j] + self.h(j, k) * g[i])
                        + p1 * self.t3(i, j, k);
                    out.set_t3(i, j, k, v);
                }
            }
        }
        out
    }

    pub fn exp(&self) -> Jet3 {
        let w = self.value.exp();
        self.chain(w, w, w, w)
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s, -c)
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c, s)
    }

    pub fn sinh(&self) -> Jet3 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s, c)
    }

    pub fn cosh(&self) -> Jet3 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c, s)
    }

    pub fn tanh(&self) -> Jet3 {
        let u = self.value.tanh();
        let u1 = 1.0 - u * u;
        let u2 = -2.0 * u * u1;
        let u3 = u1 * (6.0 * u * u - 2.0);
        self.chain(u, u1, u2, u3)
    }

    /// Square root; the argument value must be strictly positive.
    pub fn sqrt(&self) -> Result<Jet3> {
        if self.value <= 0.0 {
            return Err(Error::Domain { op: "sqrt", value: self.value });
        }
        let s = self.value.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * s * s), 0.375 / (s * s * s * s * s)))
    }

    /// Reciprocal; the value must be nonzero.
    pub fn recip(&self) -> Result<Jet3> {
        if self.value == 0.0 {
            return Err(Error::Domain { op: "recip", value: self.value });
        }
        let v = self.value;
        let inv = 1.0 / v;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv, -6.0 * inv * inv * inv * inv))
    }

    /// Integer power. Negative exponents require a nonzero value.
    pub fn powi(&self, n: i32) -> Result<Jet3> {
        let v = self.value;
        if v == 0.0 && n < 0 {
            return Err(Error::Domain { op: "powi", value: v });
        }
        // negative powers of zero only ever occur with a vanishing
        // derivative coefficient in front
        let pw = |e: i32| -> f64 {
            if e >= 0 || v != 0.0 {
                v.powi(e)
            } else {
                0.0
            }
        };
        let nf = n as f64;
        let w = pw(n);
        let p1 = nf * pw(n - 1);
        let p2 = nf * (nf - 1.0) * pw(n - 2);
        let p3 = nf * (nf - 1.0) * (nf - 2.0) * pw(n - 3);
        Ok(self.chain(w, p1, p2, p3))
    }

    pub fn try_div(&self, rhs: &Jet3) -> Result<Jet3> {
        Ok(self * &rhs.recip()?)
    }
}

impl std::ops::Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.binary(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.binary(rhs, |a, b| a - b)
    }
}

impl std::ops::Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl std::ops::Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let d = self.dim;
        let (f, g) = (self, rhs);
        let mut out = Jet3::zero(d);
        out.value = f.value * g.value;
        for i in 0..d {
            out.grad[i] = f.grad[i] * g.value + f.value * g.grad[i];
        }
        for i in 0..d {
            for j in i..d {
                let v = f.h(i, j) * g.value
                    + f.grad[i] * g.grad[j]
                    + f.grad[j] * g.grad[i]
                    + f.value * g.h(i, j);
                out.set_h(i, j, v);
            }
        }
        for i in 0..d {
            for j in i..d {
                for k in j..d {
                    let v = f.t3(i, j, k) * g.value
                        + f.h(i, j) * g.grad[k]
                        + f.h(i, k) * g.grad[j]
                        + f.h(j, k) * g.grad[i]
                        + f.grad[i] * g.h(j, k)
                        + f.grad[j] * g.h(i, k)
                        + f.grad[k] * g.h(i, j)
                        + f.value * g.t3(i, j, k);
                    out.set_t3(i, j, k, v);
                }
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet3> for Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: &Jet3) -> Jet3 {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet3> for &Jet3 {
            type Output = Jet3;
            fn $method(self, rhs: Jet3) -> Jet3 {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::ops::Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl std::ops::Mul<f64> for &Jet3 {
    type Output = Jet3;
    fn mul(self, c: f64) -> Jet3 {
        self.scale(c)
    }
}

impl std::ops::Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, c: f64) -> Jet3 {
        self.scale(c)
    }
}

/// Jet of coordinate `i` at the point with coordinates `coords`.
pub fn seed_coordinate(i: usize, coords: &[f64]) -> Result<Jet3> {
    let dim = coords.len();
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, dim });
    }
    Ok(Jet3::coordinate(coords[i], i, dim))
}

/// Jets of all coordinates at once; the usual entry point for evaluators.
pub fn seed_all(coords: &[f64]) -> Vec<Jet3> {
    (0..coords.len())
        .map(|i| Jet3::coordinate(coords[i], i, coords.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn seed_examples() {
        let j = seed_coordinate(0, &[2.0]).unwrap();
        assert_eq!(j.value, 2.0);
        assert_eq!(j.grad, vec![1.0]);
        assert!(j.hess.iter().all(|&x| x == 0.0));
        assert!(j.third.iter().all(|&x| x == 0.0));

        let j = seed_coordinate(1, &[1.0, 5.0]).unwrap();
        assert_eq!(j.value, 5.0);
        assert_eq!(j.grad, vec![0.0, 1.0]);

        assert!(seed_coordinate(2, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn exp_at_zero() {
        let x = seed_coordinate(0, &[0.0]).unwrap();
        let e = x.exp();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.grad[0], 1.0);
        assert_eq!(e.h(0, 0), 1.0);
        assert_eq!(e.t3(0, 0, 0), 1.0);
    }

    #[test]
    fn square_at_three() {
        let x = seed_coordinate(0, &[3.0]).unwrap();
        let sq = &x * &x;
        assert_eq!(sq.value, 9.0);
        assert_eq!(sq.grad[0], 6.0);
        assert_eq!(sq.h(0, 0), 2.0);
        assert_eq!(sq.t3(0, 0, 0), 0.0);
    }

    #[test]
    fn sinh_at_zero() {
        let x = seed_coordinate(0, &[0.0]).unwrap();
        let s = x.sinh();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.grad[0], 1.0);
        assert_eq!(s.h(0, 0), 0.0);
        assert_eq!(s.t3(0, 0, 0), 1.0);
    }

    #[test]
    fn cos_squared_at_zero() {
        // cos²x = (1+cos 2x)/2: value 1, first 0, second −2, third 0 at x = 0
        let x = seed_coordinate(0, &[0.0]).unwrap();
        let c = x.cos();
        let c2 = &c * &c;
        assert_close(c2.value, 1.0, 1e-15);
        assert_close(c2.grad[0], 0.0, 1e-15);
        assert_close(c2.h(0, 0), -2.0, 1e-15);
        assert_close(c2.t3(0, 0, 0), 0.0, 1e-15);
    }

    #[test]
    fn third_derivative_of_exp_2s() {
        let s = seed_coordinate(0, &[0.7]).unwrap();
        let f = (s * 2.0).exp();
        assert_close(f.t3(0, 0, 0), 8.0 * (1.4f64).exp(), 1e-12);
    }

    #[test]
    fn quotient_and_sqrt() {
        // f = sqrt(1 + x²) / (2 + sin x) at x = 0.3, mixed with a second variable
        let c = seed_all(&[0.3, -0.4]);
        let x = &c[0];
        let y = &c[1];
        let num = (&(x * x) + &Jet3::constant(1.0, 2)).sqrt().unwrap();
        let den = &x.sin() + &Jet3::constant(2.0, 2);
        let f = &num.try_div(&den).unwrap() * &y.cosh();
        assert!(f.is_finite());
        // symmetry is bitwise by construction
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(f.h(i, j), f.h(j, i));
                for k in 0..2 {
                    assert_eq!(f.t3(i, j, k), f.t3(i, k, j));
                    assert_eq!(f.t3(i, j, k), f.t3(j, i, k));
                }
            }
        }
        assert!(x.try_div(&Jet3::zero(2)).is_err());
        assert!(Jet3::constant(-1.0, 2).sqrt().is_err());
    }

    #[test]
    fn partial_extraction() {
        // f = x²y: ∂_x f = 2xy with gradient (2y, 2x)
        let c = seed_all(&[1.5, -2.0]);
        let f = &(&c[0] * &c[0]) * &c[1];
        let fx = f.partial(0);
        assert_close(fx.value, 2.0 * 1.5 * -2.0, 1e-14);
        assert_close(fx.grad[0], 2.0 * -2.0, 1e-14);
        assert_close(fx.grad[1], 2.0 * 1.5, 1e-14);
        assert_close(fx.h(0, 1), 2.0, 1e-14);
    }

    #[test]
    fn embed_shifts_indices() {
        let c = seed_all(&[0.5, 0.25]);
        let f = &c[0] * &c[1];
        let g = f.embed(4, 1);
        assert_eq!(g.dim, 4);
        assert_eq!(g.value, f.value);
        assert_eq!(g.grad, vec![0.0, 0.25, 0.5, 0.0]);
        assert_eq!(g.h(1, 2), 1.0);
        assert_eq!(g.h(0, 2), 0.0);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = seed_coordinate(0, &[1.3]).unwrap();
        let a = x.powi(4).unwrap();
        let b = &(&x * &x) * &(&x * &x);
        assert_close(a.value, b.value, 1e-12);
        assert_close(a.grad[0], b.grad[0], 1e-12);
        assert_close(a.h(0, 0), b.h(0, 0), 1e-11);
        assert_close(a.t3(0, 0, 0), b.t3(0, 0, 0), 1e-11);
        assert!(Jet3::zero(1).powi(-1).is_err());
    }
}
