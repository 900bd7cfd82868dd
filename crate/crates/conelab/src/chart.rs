//! Coordinate charts (open boxes) and points in them.

use crate::error::{Error, Result};

/// An open coordinate box with an identifier.
#[derive(Clone, Debug)]
pub struct Chart {
    pub id: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A point together with the chart it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
    pub chart_id: String,
}

impl Point {
    pub fn new(coords: Vec<f64>, chart_id: &str) -> Self {
        Point { coords, chart_id: chart_id.to_string() }
    }
}

impl Chart {
    pub fn new(id: &str, lo: &[f64], hi: &[f64]) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(hi).all(|(a, b)| a < b), "empty chart box");
        Chart { id: id.to_string(), lo: lo.to_vec(), hi: hi.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&a, &b))| v > a && v < b)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.chart_id != self.id {
            return Err(Error::ChartMismatch {
                point_chart: p.chart_id.clone(),
                expected: self.id.clone(),
            });
        }
        if !self.contains(&p.coords) {
            return Err(Error::OutsideChart { chart: self.id.clone(), coords: p.coords.clone() });
        }
        Ok(())
    }

    pub fn center(&self) -> Point {
        let c = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        Point::new(c, &self.id)
    }

    /// `n` deterministic low-discrepancy points (Kronecker sequence with
    /// a seed-dependent offset), kept a 6% margin away from the box
    /// boundary so difference stencils stay inside.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let d = self.dim();
        let alphas = kronecker_alphas(d);
        let mut offset = vec![0.0f64; d];
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        for o in offset.iter_mut() {
            state = splitmix64(state);
            *o = (state >> 11) as f64 / (1u64 << 53) as f64;
        }
        let margin = 0.06;
        (0..n)
            .map(|k| {
                let coords = (0..d)
                    .map(|i| {
                        let u = (offset[i] + (k as f64 + 1.0) * alphas[i]).fract();
                        let w = self.hi[i] - self.lo[i];
                        self.lo[i] + w * (margin + (1.0 - 2.0 * margin) * u)
                    })
                    .collect();
                Point::new(coords, &self.id)
            })
            .collect()
    }

    /// Extra probe points offset 1e-2 of the box width inside each face,
    /// other coordinates at the center. Used by validity sweeps only
    /// (no stencils).
    pub fn boundary_offset_points(&self) -> Vec<Point> {
        let d = self.dim();
        let center = self.center();
        let mut pts = Vec::with_capacity(2 * d);
        for i in 0..d {
            let w = self.hi[i] - self.lo[i];
            for (edge, sign) in [(self.lo[i], 1.0), (self.hi[i], -1.0)] {
                let mut c = center.coords.clone();
                c[i] = edge + sign * 1e-2 * w;
                pts.push(Point::new(c, &self.id));
            }
        }
        pts
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut x = z;
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Coordinates of the d-dimensional Kronecker (generalized golden
/// ratio) sequence: powers of the root of x^{d+1} = x + 1.
fn kronecker_alphas(d: usize) -> Vec<f64> {
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (0..d).map(|i| (1.0 / phi.powi(i as i32 + 1)).fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let c = Chart::new("c", &[0.0, -1.0], &[2.0, 1.0]);
        let a = c.sample_points(50, 42);
        let b = c.sample_points(50, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| c.contains(&p.coords)));
        let other = c.sample_points(50, 43);
        assert_ne!(a, other);
    }

    #[test]
    fn boundary_points_sit_just_inside() {
        let c = Chart::new("c", &[0.0], &[10.0]);
        let pts = c.boundary_offset_points();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].coords[0] - 0.1).abs() < 1e-12);
        assert!((pts[1].coords[0] - 9.9).abs() < 1e-12);
    }

    #[test]
    fn chart_membership_errors() {
        let c = Chart::new("c", &[0.0], &[1.0]);
        assert!(c.check_point(&Point::new(vec![0.5], "c")).is_ok());
        assert!(c.check_point(&Point::new(vec![1.5], "c")).is_err());
        assert!(c.check_point(&Point::new(vec![0.5], "other")).is_err());
    }
}
