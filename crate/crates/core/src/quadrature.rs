//! Uniform frequency grid with trapezoid weights.
//!
//! Every `∫dω` in the crate is a trapezoid sum over a [`FrequencyGrid`]:
//! interior points carry weight `dω`, the two endpoints `dω/2`.

use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    span: f64,
    step: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    /// `n` uniformly spaced points covering `[center − span, center + span]`.
    pub fn new(center: f64, span: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs n ≥ 2 points, got {n}")));
        }
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::Config(format!("grid span must be > 0, got {span}")));
        }
        if !center.is_finite() {
            return Err(Error::Config("grid center must be finite".into()));
        }
        let step = 2.0 * span / (n - 1) as f64;
        let lo = center - span;
        let mut points: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
        points[n - 1] = center + span;
        let mut weights = vec![step; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Self {
            center,
            span,
            step,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Half-width of the grid.
    pub fn span(&self) -> f64 {
        self.span
    }

    /// Point spacing `dω`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.len() - 1]
    }

    pub fn point(&self, k: usize) -> f64 {
        self.points[k]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same number of points and width, centred at `center + delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self::new(self.center + delta, self.span, self.len()).expect("valid grid stays valid")
    }

    /// Trapezoid sum `Σ_k w_k f(k)`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(k, &w)| w * f(k)).sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(usize) -> C64) -> C64 {
        self.weights.iter().enumerate().map(|(k, &w)| w * f(k)).sum()
    }

    /// `Σ_k w_k |v_k|²`.
    pub fn norm_sqr(&self, v: &[C64]) -> f64 {
        debug_assert_eq!(v.len(), self.len());
        v.iter().zip(&self.weights).map(|(z, w)| w * z.norm_sqr()).sum()
    }

    /// `Σ_{jk} w_j w_k |m_{jk}|²` for a row-major `n × n` block.
    pub fn norm_sqr_2d(&self, m: &[C64]) -> f64 {
        let n = self.len();
        debug_assert_eq!(m.len(), n * n);
        m.chunks_exact(n)
            .zip(&self.weights)
            .map(|(row, wj)| wj * self.norm_sqr(row))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_grid() {
        let g = FrequencyGrid::new(0.0, 1.0, 2).unwrap();
        assert_eq!(g.points(), &[-1.0, 1.0]);
        assert_eq!(g.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn schmidt_grid_spacing() {
        let gamma0 = 0.2;
        let g = FrequencyGrid::new(0.0, 25.0 * gamma0, 100).unwrap();
        assert!((g.step() - 50.0 * gamma0 / 99.0).abs() < 1e-15);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.hi(), 5.0);
        assert!((g.weights().iter().sum::<f64>() - 10.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(FrequencyGrid::new(0.0, 1.0, 1).unwrap_err().is_config());
        assert!(FrequencyGrid::new(0.0, 0.0, 10).unwrap_err().is_config());
        assert!(FrequencyGrid::new(0.0, -1.0, 10).is_err());
    }

    #[test]
    fn trapezoid_is_second_order() {
        // ∫_{-1}^{1} cos x dx = 2 sin 1
        let exact = 2.0 * 1f64.sin();
        let err = |n| {
            let g = FrequencyGrid::new(0.0, 1.0, n).unwrap();
            (g.integrate(|k| g.point(k).cos()) - exact).abs()
        };
        let ratio = err(41) / err(81);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }
}
