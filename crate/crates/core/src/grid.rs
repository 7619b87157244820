//! Uniform radial grids and quadrature against the measure r dr.
//!
//! All fields in the crate live on uniform grids with r_min > 0; the left
//! clamp keeps the centrifugal 1/r^2 term finite, and the mass lost below it
//! is super-exponentially small for every mode this crate targets. Masses and
//! norms use the trapezoidal rule; the O(spacing^2) quadrature error is far
//! below every tolerance built on top of it.

use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Left end of every grid: keeps 1/r^2 finite while truncating only
/// super-exponentially small mass near the origin.
pub const R_MIN_CLAMP: f64 = 0.02;

/// Default window half-width in units of the oscillator width h_n.
pub const DEFAULT_WIDTH: f64 = 15.0;

/// Default node count per unit of h_n (about 600 nodes per mode well).
pub const DEFAULT_PPW: usize = 40;

/// A uniform grid on [r_min, r_max], r_min > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min > 0.0) {
            return Err(Error::invalid(format!("r_min must be positive, got {r_min}")));
        }
        if !(r_max > r_min) {
            return Err(Error::invalid(format!("need r_max > r_min, got [{r_min}, {r_max}]")));
        }
        if n_points < 64 {
            return Err(Error::invalid(format!("need at least 64 nodes, got {n_points}")));
        }
        Ok(RadialGrid { r_min, r_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to r.
    pub fn nearest(&self, r: f64) -> usize {
        let i = ((r - self.r_min) / self.spacing()).round() as isize;
        i.clamp(0, self.n_points as isize - 1) as usize
    }
}

/// Grid covering [max(0.02, center - width*h), center + width*h] with
/// ceil(width * points_per_width) nodes: the well of a mode problem with
/// well location `center` and oscillator width `h`.
pub fn build_grid(center: f64, h: f64, width: f64, points_per_width: usize) -> Result<RadialGrid> {
    if !(width >= 6.0) {
        return Err(Error::invalid(format!(
            "window half-width {width} h would truncate non-negligible mass; need >= 6"
        )));
    }
    if !(h > 0.0 && center > 0.0) {
        return Err(Error::invalid("need positive well location and width"));
    }
    let r_min = (center - width * h).max(R_MIN_CLAMP);
    let r_max = center + width * h;
    let n_points = (width * points_per_width as f64).ceil() as usize;
    RadialGrid::new(r_min, r_max, n_points.max(64))
}

/// Trapezoidal approximation of Int f(r) r dr over the grid (no 2 pi factor).
pub fn integrate_rdr(f: &[f64], g: &RadialGrid) -> Result<f64> {
    if f.len() != g.n_points {
        return Err(Error::invalid(format!(
            "sample count {} does not match grid ({} nodes)",
            f.len(),
            g.n_points
        )));
    }
    let dx = g.spacing();
    let mut acc = 0.0;
    for (i, &v) in f.iter().enumerate() {
        let w = if i == 0 || i == g.n_points - 1 { 0.5 } else { 1.0 };
        acc += w * v * g.node(i);
    }
    Ok(acc * dx)
}

/// A sampled radial function. Real-valued fields store a zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::invalid("field length does not match grid"));
        }
        Ok(RadialField { grid, values })
    }

    pub fn from_real(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::invalid("field length does not match grid"));
        }
        Ok(RadialField { grid, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() })
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// 2 pi Int |f|^2 r dr by the trapezoidal rule.
    pub fn mass(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        2.0 * std::f64::consts::PI * integrate_rdr(&sq, &self.grid).expect("length matches grid")
    }

    /// Rescale to unit mass; phase/sign pattern unchanged.
    pub fn normalize(&self) -> Result<RadialField> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::invalid("cannot normalize a zero field"));
        }
        let s = 1.0 / m.sqrt();
        Ok(RadialField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        })
    }

    /// 2 pi Int f conj(g) r dr.
    pub fn inner(&self, other: &RadialField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::invalid("inner product requires a shared grid"));
        }
        let re: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| (a * b.conj()).re).collect();
        let im: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| (a * b.conj()).im).collect();
        Ok(Complex64::new(
            2.0 * std::f64::consts::PI * integrate_rdr(&re, &self.grid)?,
            2.0 * std::f64::consts::PI * integrate_rdr(&im, &self.grid)?,
        ))
    }

    /// L^2(r dr) distance, 2 pi convention: sqrt(2 pi Int |f - g|^2 r dr).
    pub fn distance(&self, other: &RadialField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("distance requires a shared grid"));
        }
        let sq: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).collect();
        Ok((2.0 * std::f64::consts::PI * integrate_rdr(&sq, &self.grid)?).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn build_grid_examples() {
        let g = build_grid(1.0, 0.05, 15.0, 40).unwrap();
        assert_relative_eq!(g.r_min, 0.25);
        assert_relative_eq!(g.r_max, 1.75);
        assert_eq!(g.n_points, 600);

        // Wide well clamps on the left.
        let g = build_grid(1.0, 0.2, 15.0, 40).unwrap();
        assert_relative_eq!(g.r_min, R_MIN_CLAMP);

        // Doubling points-per-width halves the spacing (same interval).
        let a = build_grid(1.0, 0.05, 15.0, 40).unwrap();
        let b = build_grid(1.0, 0.05, 15.0, 80).unwrap();
        assert_relative_eq!(a.spacing() / b.spacing(), 2.0, max_relative = 2e-3);

        assert!(build_grid(1.0, 0.05, 5.0, 40).is_err());
    }

    #[test]
    fn integrate_examples() {
        // Int_0^1 r dr = 1/2.
        let g = RadialGrid::new(1e-9, 1.0, 4001).unwrap();
        let ones = vec![1.0; g.n_points];
        assert_relative_eq!(integrate_rdr(&ones, &g).unwrap(), 0.5, epsilon = 1e-8);

        let zeros = vec![0.0; g.n_points];
        assert_eq!(integrate_rdr(&zeros, &g).unwrap(), 0.0);

        // Int_0^inf e^{-r^2} r dr = 1/2; truncation to [0.02, 10] keeps 0.4998.
        let g = RadialGrid::new(0.02, 10.0, 20001).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&r| (-r * r).exp()).collect();
        let exact = 0.5 * ((-0.02f64 * 0.02).exp() - (-100.0f64).exp());
        assert_relative_eq!(integrate_rdr(&f, &g).unwrap(), exact, epsilon = 1e-7);
        assert!((integrate_rdr(&f, &g).unwrap() - 0.4998).abs() < 1e-4);

        assert!(integrate_rdr(&[1.0; 3], &g).is_err());
    }

    #[test]
    fn normalize_examples() {
        let g = build_grid(1.0, 0.05, 15.0, 40).unwrap();
        let h = 0.05;
        let f: Vec<f64> =
            g.nodes().iter().map(|&r| (-(r - 1.0) * (r - 1.0) / (2.0 * h * h)).exp()).collect();
        let field = RadialField::from_real(g, f).unwrap();
        let n = field.normalize().unwrap();
        assert_relative_eq!(n.mass(), 1.0, epsilon = 1e-12);

        // Idempotence and scale invariance.
        let again = n.normalize().unwrap();
        for (a, b) in again.values.iter().zip(&n.values) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
        }
        let scaled = RadialField {
            grid: field.grid,
            values: field.values.iter().map(|v| v * 7.0).collect(),
        };
        let n2 = scaled.normalize().unwrap();
        assert!(n.distance(&n2).unwrap() < 1e-12);

        // Gaussian of width h around R = 1: amplitude ~ (2 pi h sqrt(pi) R)^{-1/2}.
        let predicted = 1.0 / (2.0 * std::f64::consts::PI * h * std::f64::consts::PI.sqrt()).sqrt();
        let peak = n.values[n.grid.nearest(1.0)].re;
        assert_relative_eq!(peak, predicted, max_relative = 0.02);

        let zeros = RadialField::from_real(field.grid, vec![0.0; field.grid.n_points]).unwrap();
        assert!(zeros.normalize().is_err());
    }
}
