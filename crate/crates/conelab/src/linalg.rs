//! Small dense linear algebra over jets and plain floats.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// Square matrix with jet entries (row-major).
#[derive(Clone, Debug)]
pub struct JetMatrix {
    pub n: usize,
    pub data: Vec<Jet3>,
}

impl JetMatrix {
    pub fn zero(n: usize, var_dim: usize) -> Self {
        JetMatrix { n, data: vec![Jet3::zero(var_dim); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet3) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        JetMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Jet3 {
        &self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Jet3) {
        self.data[i * self.n + j] = v;
    }

    /// Value part as an nalgebra matrix.
    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).value)
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.max((self.get(i, j).value - self.get(j, i).value).abs());
            }
        }
        m
    }

    /// Gauss–Jordan inverse with partial pivoting on the value parts.
    /// Fails with `DegenerateMetric` when |det| of the value matrix is
    /// at or below 1e-12.
    pub fn inverse(&self) -> Result<JetMatrix> {
        let det = self.values().determinant();
        if det.abs() <= 1e-12 {
            return Err(Error::DegenerateMetric { det });
        }
        let n = self.n;
        let var_dim = self.data[0].dim;
        let mut a = self.clone();
        let mut inv = JetMatrix::from_fn(n, |i, j| {
            Jet3::constant(if i == j { 1.0 } else { 0.0 }, var_dim)
        });
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| {
                    a.get(r, col)
                        .value
                        .abs()
                        .partial_cmp(&a.get(s, col).value.abs())
                        .unwrap()
                })
                .unwrap();
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot_inv = a.get(col, col).recip().map_err(|_| Error::DegenerateMetric { det })?;
            for j in 0..n {
                let va = a.get(col, j) * &pivot_inv;
                a.set(col, j, va);
                let vi = inv.get(col, j) * &pivot_inv;
                inv.set(col, j, vi);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.value == 0.0 && factor.max_abs() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let va = a.get(r, j) - &(&factor * a.get(col, j));
                    a.set(r, j, va);
                    let vi = inv.get(r, j) - &(&factor * inv.get(col, j));
                    inv.set(r, j, vi);
                }
            }
        }
        Ok(inv)
    }
}

/// f64 inverse with the same degeneracy policy as the jet path.
pub fn invert_values(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = m.determinant();
    if det.abs() <= 1e-12 {
        return Err(Error::DegenerateMetric { det });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::DegenerateMetric { det })
}

/// Signature of a symmetric matrix as (positive, negative) eigenvalue
/// counts; eigenvalues within `tol` of zero count as neither.
pub fn signature_of(m: &DMatrix<f64>, tol: f64) -> (usize, usize) {
    let sym = 0.5 * (m + m.transpose());
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut plus = 0;
    let mut minus = 0;
    for &l in eig.eigenvalues.iter() {
        if l > tol {
            plus += 1;
        } else if l < -tol {
            minus += 1;
        }
    }
    (plus, minus)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed_all;

    #[test]
    fn jet_inverse_matches_identity() {
        // metric-like matrix depending on two variables
        let c = seed_all(&[0.8, -0.3]);
        let x = &c[0];
        let y = &c[1];
        let mut m = JetMatrix::zero(2, 2);
        m.set(0, 0, &x.cosh() + &Jet3::constant(1.0, 2));
        m.set(1, 1, &(y * y) + &Jet3::constant(2.0, 2));
        let off = &x.sin() * &y.cos();
        m.set(0, 1, off.clone());
        m.set(1, 0, off);
        let inv = m.inverse().unwrap();
        // A * A^{-1} = Id as jets (all derivative orders vanish)
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Jet3::zero(2);
                for k in 0..2 {
                    acc = &acc + &(m.get(i, k) * inv.get(k, j));
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value - expect).abs() < 1e-13);
                assert!(acc.grad.iter().all(|v| v.abs() < 1e-12));
                assert!(acc.hess.iter().all(|v| v.abs() < 1e-11));
                assert!(acc.third.iter().all(|v| v.abs() < 1e-10));
            }
        }
    }

    #[test]
    fn degenerate_matrix_is_rejected() {
        let mut m = JetMatrix::zero(2, 1);
        m.set(0, 0, Jet3::constant(1.0, 1));
        m.set(0, 1, Jet3::constant(2.0, 1));
        m.set(1, 0, Jet3::constant(2.0, 1));
        m.set(1, 1, Jet3::constant(4.0, 1));
        assert!(matches!(m.inverse(), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn signature_counts() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(signature_of(&m, 1e-10), (2, 1));
    }
}
