//! Single-photon spectra of the input pair and of the scattered pair.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;

use crate::analytic::{scattered_pair_sdf, ScatteredSdf};
use crate::model::{Pulse, SystemParams};
use crate::quadrature::FrequencyGrid;
use crate::{Result, C64};

/// `S^in_ω = 2|ξ_ω|²` on the grid.
pub fn input_spectrum(pulse: &Pulse, grid: &FrequencyGrid) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&w| 2.0 * pulse.sdf(w).norm_sqr())
        .collect()
}

/// Trapezoid integrals of each spectral component.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpectrumIntegrals {
    pub s_in: f64,
    pub s_out: f64,
    pub s_inel: f64,
    pub s_el_in: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub grid: FrequencyGrid,
    pub s_in: Vec<f64>,
    pub s_out: Vec<f64>,
    pub s_inel: Vec<f64>,
    /// Elastic-inelastic interference; may be negative.
    pub s_el_in: Vec<f64>,
    pub integrals: SpectrumIntegrals,
    /// Input photon number of the continuum Lorentzian that falls outside
    /// the grid, an estimate of the truncation error of the integrals.
    pub tail_estimate: f64,
}

/// Photon number of `S^in` outside `[lo, hi]` for the unit-norm Lorentzian.
pub fn lorentzian_tail(pulse: &Pulse, lo: f64, hi: f64) -> f64 {
    let x = |d: f64| 0.5 - (2.0 * d / pulse.gamma0).atan() / PI;
    2.0 * (x(hi - pulse.omega0) + x(pulse.omega0 - lo))
}

/// Output spectrum and its decomposition
/// `S^out = S^in + S^inel + S^el-in`.
///
/// `S^in` is taken from the elastic part, `2Σ_j|φ^el_{kj}|²dω`, which is
/// `2|ξ_k|²` for a grid-normalised packet and keeps the decomposition exact.
pub fn output_spectrum(sdf: &ScatteredSdf) -> SpectrumResult {
    let grid = &sdf.grid;
    let n = grid.len();
    let w = grid.weights();
    let rows: Vec<[f64; 4]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = [0.0; 4];
            for j in 0..n {
                let el = sdf.elastic[[k, j]];
                let inel = sdf.inelastic[[k, j]];
                let tot = sdf.total[[k, j]];
                acc[0] += w[j] * el.norm_sqr();
                acc[1] += w[j] * tot.norm_sqr();
                acc[2] += w[j] * inel.norm_sqr();
                acc[3] += w[j] * (el.conj() * inel).re;
            }
            [2.0 * acc[0], 2.0 * acc[1], 2.0 * acc[2], 4.0 * acc[3]]
        })
        .collect();
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let (s_in, s_out, s_inel, s_el_in) = (col(0), col(1), col(2), col(3));
    let integrals = SpectrumIntegrals {
        s_in: grid.integrate(|k| s_in[k]),
        s_out: grid.integrate(|k| s_out[k]),
        s_inel: grid.integrate(|k| s_inel[k]),
        s_el_in: grid.integrate(|k| s_el_in[k]),
    };
    SpectrumResult {
        grid: grid.clone(),
        tail_estimate: lorentzian_tail(&sdf.pulse, grid.lo(), grid.hi()),
        s_in,
        s_out,
        s_inel,
        s_el_in,
        integrals,
    }
}

/// Output spectra for a sweep of carrier frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumScan {
    pub omega0: Vec<f64>,
    /// Grid offsets `ω − ω₀`, shared by every row.
    pub offsets: Vec<f64>,
    /// `S^out` with one row per carrier frequency.
    pub s_out: Array2<f64>,
    /// `max_ω |S^out − S^in|` per carrier frequency.
    pub deformation: Vec<f64>,
}

/// Sweeps `ω₀` with a grid of `n` points over `ω₀ ± span` that moves with
/// the carrier. Each packet is renormalised on its grid.
pub fn spectrum_scan(
    params: &SystemParams,
    pulse: &Pulse,
    omega0: &[f64],
    span: f64,
    n: usize,
    gamma_reg: f64,
) -> Result<SpectrumScan> {
    let base = FrequencyGrid::new(0.0, span, n)?;
    let mut s_out = Array2::zeros((omega0.len(), n));
    let mut deformation = Vec::with_capacity(omega0.len());
    for (i, &w0) in omega0.iter().enumerate() {
        let grid = base.shifted(w0);
        let p = pulse.with_carrier(w0)?.normalized_on(&grid);
        let spec = output_spectrum(&scattered_pair_sdf(params, &p, &grid, gamma_reg)?);
        for k in 0..n {
            s_out[[i, k]] = spec.s_out[k];
        }
        deformation.push(
            spec.s_out
                .iter()
                .zip(&spec.s_in)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    Ok(SpectrumScan {
        omega0: omega0.to_vec(),
        offsets: base.points().to_vec(),
        s_out,
        deformation,
    })
}

/// `2Σ_j|m_{kj}|²dω` for an arbitrary two-photon amplitude.
pub fn marginal_spectrum(m: &Array2<C64>, grid: &FrequencyGrid) -> Vec<f64> {
    m.outer_iter()
        .map(|row| 2.0 * grid.integrate(|j| row[j].norm_sqr()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(g: f64, n: usize) -> (SystemParams, Pulse, FrequencyGrid) {
        let params = SystemParams::resonant(g).unwrap();
        let gamma0 = 0.2;
        let w0 = params.resonances().e1_plus.re;
        let grid = FrequencyGrid::new(w0, 25.0 * gamma0, n).unwrap();
        let pulse = Pulse::new(gamma0, w0, 0.0).unwrap().normalized_on(&grid);
        (params, pulse, grid)
    }

    #[test]
    fn input_spectrum_examples() {
        let pulse = Pulse::new(0.2, 0.4, 0.0).unwrap();
        let grid = FrequencyGrid::new(0.4, 5.0, 101).unwrap();
        let s = input_spectrum(&pulse, &grid);
        assert!((s[50] - 4.0 / (PI * 0.2)).abs() < 1e-12);
        for k in 0..50 {
            assert!((s[k] - s[100 - k]).abs() < 1e-12 * s[50]);
        }

        // grid-normalised packet
        let normed = pulse.normalized_on(&grid);
        let s = input_spectrum(&normed, &grid);
        let total = grid.integrate(|k| s[k]);
        assert!((total - 2.0).abs() < 2e-2, "{total}");

        // continuum packet: the missing weight is the Lorentzian tail
        let fine = FrequencyGrid::new(0.4, 5.0, 2001).unwrap();
        let s = input_spectrum(&pulse, &fine);
        let total = fine.integrate(|k| s[k]);
        assert!((total + lorentzian_tail(&pulse, fine.lo(), fine.hi()) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn empty_cavity_leaves_the_spectrum_unchanged() {
        let (params, pulse, grid) = setup(0.0, 100);
        let spec = output_spectrum(&scattered_pair_sdf(&params, &pulse, &grid, 0.2).unwrap());
        let s_in = input_spectrum(&pulse, &grid);
        for k in 0..grid.len() {
            assert!((spec.s_out[k] - s_in[k]).abs() < 1e-10);
            assert!((spec.s_in[k] - s_in[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_and_dip() {
        for g in [1.0, 2.0, 10.0] {
            let (params, pulse, grid) = setup(g, 100);
            let spec =
                output_spectrum(&scattered_pair_sdf(&params, &pulse, &grid, 0.2).unwrap());
            for k in 0..grid.len() {
                let sum = spec.s_in[k] + spec.s_inel[k] + spec.s_el_in[k];
                assert!((spec.s_out[k] - sum).abs() < 1e-10);
                assert!(spec.s_out[k] >= 0.0 && spec.s_inel[k] >= 0.0);
            }
            assert!(spec.s_el_in.iter().any(|&v| v < 0.0));
            assert!((spec.integrals.s_out - 2.0).abs() < 3e-2, "g = {g}");
        }
    }

    #[test]
    fn marginal_of_the_total_is_s_out() {
        let (params, pulse, grid) = setup(2.0, 40);
        let sdf = scattered_pair_sdf(&params, &pulse, &grid, 0.2).unwrap();
        let spec = output_spectrum(&sdf);
        let m = marginal_spectrum(&sdf.total, &grid);
        for k in 0..grid.len() {
            assert!((m[k] - spec.s_out[k]).abs() < 1e-12 * spec.s_out[k].max(1.0));
        }
    }
}
