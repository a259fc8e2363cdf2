//! Closed-form solutions for a Lorentzian drive.
//!
//! After arrival the drive is `Ξ(t) = Ξ₀ e^{−ip(t−t₀)}` with `p = ω₀ − iγ₀/2`,
//! so every convolution with an exponential propagator is elementary. The
//! one-excitation amplitudes are written out explicitly; the two-excitation
//! transient is assembled from [`expsum::ExpSum`] convolutions through the
//! 2×2 `(X^g, X^e)` and `(Z^g, Z^e)` blocks and finally into `Φ`.

pub mod expsum;

use std::f64::consts::{PI, SQRT_2};

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::dynamics::{FrequencyGrid, OneExcState, TwoExcState};
use crate::model::{Pulse, Resonances, SystemParams};
use crate::{Error, Result, C64};

use expsum::{ExpSum, Projectors, COINCIDENCE_EPS};

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// `∫_0^T dσ Ξ₀e^{−ipσ} e^{−iℰ(T−σ)}`, with the coincident-pole limit.
fn drive_convolution(xi0: C64, p: C64, e: C64, t: f64) -> C64 {
    let ie = (MINUS_I * e * t).exp();
    if (p - e).norm() < COINCIDENCE_EPS {
        return xi0 * t * ie;
    }
    C64::i() * xi0 * ((MINUS_I * p * t).exp() - ie) / (p - e)
}

fn check_exceptional(res: &Resonances, params: &SystemParams) -> Result<()> {
    if res.r1.norm() < COINCIDENCE_EPS * params.kappa.max(params.g) {
        return Err(Error::Numerical(
            "exceptional point (R₁ = 0): single-photon poles coincide".into(),
        ));
    }
    Ok(())
}

/// Free propagation of the input packet before the drive reaches the system.
fn free_one(pulse: &Pulse, grid: &FrequencyGrid, t: f64) -> OneExcState {
    OneExcState {
        a_g: ZERO,
        a_e: ZERO,
        b: grid
            .points()
            .iter()
            .map(|&w| pulse.sdf(w) * (MINUS_I * w * t).exp())
            .collect(),
    }
}

/// One-excitation amplitudes at time `t` (the input packet enters at `t = 0`).
pub fn one_exc_closed_form(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    t: f64,
) -> Result<OneExcState> {
    params.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be ≥ 0, got {t}")));
    }
    if t < pulse.t0 {
        return Ok(free_one(pulse, grid, t));
    }
    let res = params.resonances();
    check_exceptional(&res, params)?;
    let tt = t - pulse.t0;
    let f = params.f();
    let wa = C64::from(params.omega_a());
    let xi0 = pulse.drive_at_arrival();
    let p = pulse.pole();

    let (ep, em, r1) = (res.e1_plus, res.e1_minus, res.r1);
    let conv_p = drive_convolution(xi0, p, ep, tt);
    let conv_m = drive_convolution(xi0, p, em, tt);
    let a_g = MINUS_I * f / r1 * ((ep - wa) * conv_p - (em - wa) * conv_m);
    let a_e = MINUS_I * f * params.g / r1 * (conv_p - conv_m);

    // B_ω = ξ̂ e^{−iωT} − i f ∫ A^g(σ) e^{−iω(T−σ)} dσ, with A^g as a sum of
    // exponentials in the three rates p, ℰ⁺, ℰ⁻.
    let mut ag = ExpSum::zero();
    for (e, sign) in [(ep, 1.0), (em, -1.0)] {
        let coef = MINUS_I * f / r1 * sign * (e - wa);
        ag.add_scaled(&drive_exp(xi0, p, e), coef);
    }
    let b = grid
        .points()
        .iter()
        .map(|&w| {
            let hat = pulse.sdf(w) * (MINUS_I * w * pulse.t0).exp();
            hat * (MINUS_I * w * tt).exp() + MINUS_I * f * ag.convolve_eval(C64::from(w), tt)
        })
        .collect();
    Ok(OneExcState { a_g, a_e, b })
}

/// `drive_convolution` as an exponential sum in `T`.
fn drive_exp(xi0: C64, p: C64, e: C64) -> ExpSum {
    ExpSum::exp(xi0, p).convolve(e)
}

/// Long-time single-photon SDF without the free phase: `e^{iΘ_ω}ξ_ω`.
pub fn scattered_single_sdf(params: &SystemParams, pulse: &Pulse, omega: f64) -> C64 {
    params.transmission(&params.resonances(), omega) * pulse.sdf(omega)
}

/// Long-time two-photon SDF split into its elastic and inelastic parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteredSdf {
    pub elastic: Array2<C64>,
    pub inelastic: Array2<C64>,
    pub total: Array2<C64>,
    pub grid: FrequencyGrid,
    pub gamma_reg: f64,
    pub pulse: Pulse,
}

impl ScatteredSdf {
    /// `Σ w_j w_k |total_{jk}|²`.
    pub fn norm(&self) -> f64 {
        weighted_norm(&self.total, &self.grid)
    }
}

pub(crate) fn weighted_norm(m: &Array2<C64>, grid: &FrequencyGrid) -> f64 {
    let w = grid.weights();
    m.indexed_iter()
        .map(|((j, k), z)| w[j] * w[k] * z.norm_sqr())
        .sum()
}

/// Outgoing two-photon SDF on `grid`:
/// `Φ^out = e^{i(Θ_ω+Θ_ω′)}ξ_ωξ_ω′ + F_{ω,ω′} ∏_μ ξ_{ω+ω′−ℰ^μ₁}`.
///
/// The bracket of `F` reads `1/2 + (W − ℰ⁺₁ − ℰ⁻₁)/(W − 2ω₀ + i·gamma_reg)`
/// with `W = ω + ω′`. The inelastic part is evaluated for the packet
/// arriving at `t₀ = 0` and carried to the actual `t₀` by the phase
/// `e^{i(W − 2ω₀)t₀}`, the same factor the input pair acquires.
pub fn scattered_pair_sdf(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    gamma_reg: f64,
) -> Result<ScatteredSdf> {
    params.validate()?;
    if !gamma_reg.is_finite() || gamma_reg <= 0.0 {
        return Err(Error::Config(format!("gamma_reg must be > 0, got {gamma_reg}")));
    }
    let res = params.resonances();
    let n = grid.len();
    let w = grid.points();
    let xi: Vec<C64> = w.iter().map(|&x| pulse.sdf(x)).collect();
    let trans: Vec<C64> = w.iter().map(|&x| params.transmission(&res, x)).collect();
    let elastic = Array2::from_shape_fn((n, n), |(j, k)| trans[j] * trans[k] * xi[j] * xi[k]);

    let mut inelastic = Array2::<C64>::zeros((n, n));
    if params.g > 0.0 {
        let f = params.f();
        let g = params.g;
        let pref = 16.0 * PI * PI * f.powi(4) * g.powi(4);
        let at_zero = pulse.arriving_at(0.0)?;
        let e1 = res.e1();
        let e2 = res.e2();
        // 1/((ω − ℰ⁺₁)(ω − ℰ⁻₁)) per grid point
        let single: Vec<C64> = w
            .iter()
            .map(|&x| ((x - e1[0]) * (x - e1[1])).inv())
            .collect();
        let sum1 = e1[0] + e1[1];
        Zip::indexed(&mut inelastic).par_for_each(|(j, k), out| {
            let ww = w[j] + w[k];
            let bracket = 0.5 + (ww - sum1) / C64::new(ww - 2.0 * pulse.omega0, gamma_reg);
            let pair = ((ww - e2[0]) * (ww - e2[1])).inv();
            let f_jk = pref * bracket * single[j] * single[k] * pair;
            let xs = at_zero.sdf_complex(ww - e1[0]).and_then(|a| {
                at_zero.sdf_complex(ww - e1[1]).map(|b| a * b)
            });
            match xs {
                Ok(xs) => {
                    let shift = C64::new(0.0, (ww - 2.0 * pulse.omega0) * pulse.t0).exp();
                    *out = f_jk * xs * shift;
                }
                Err(_) => *out = C64::new(f64::NAN, f64::NAN),
            }
        });
        if inelastic.iter().any(|z| z.is_nan()) {
            return Err(Error::Numerical(
                "inelastic SDF hit the pulse pole or a resonance".into(),
            ));
        }
    }
    let total = &elastic + &inelastic;
    Ok(ScatteredSdf {
        elastic,
        inelastic,
        total,
        grid: grid.clone(),
        gamma_reg,
        pulse: *pulse,
    })
}

/// The full two-excitation state at time `t` for the pair entering at
/// `t = 0`, evaluated in closed form.
pub fn two_exc_transient(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    t: f64,
) -> Result<TwoExcState> {
    params.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be ≥ 0, got {t}")));
    }
    let n = grid.len();
    let w = grid.points();
    let free_phase = |x: f64, s: f64| (MINUS_I * x * s).exp();
    if t < pulse.t0 {
        let b: Vec<C64> = w.iter().map(|&x| pulse.sdf(x) * free_phase(x, t)).collect();
        return Ok(TwoExcState {
            phi: Array2::from_shape_fn((n, n), |(j, k)| b[j] * b[k]),
            ..TwoExcState::zeros(n)
        });
    }
    let res = params.resonances();
    check_exceptional(&res, params)?;
    let tt = t - pulse.t0;
    let f = params.f();
    let g = C64::from(params.g);
    let wc = params.omega_c_tilde();
    let wa = C64::from(params.omega_a());
    let scale = params.kappa.max(params.g).max(params.delta_a.abs());
    let p = pulse.pole();
    let drive = ExpSum::exp(pulse.drive_at_arrival(), p);

    let m1 = Projectors::new([[wc, g], [g, wa]], res.e1(), scale)?;
    let gs2 = g * SQRT_2;
    let mz = Projectors::new([[2.0 * wc, gs2], [gs2, wc + wa]], res.e2(), scale)?;

    // (A^g, A^e)
    let [ag, ae] = m1.propagate(ZERO, [&drive.scaled(C64::from(f)), &ExpSum::zero()]);
    // (Z^g, Z^e)
    let src_zg = ag.times_exp(2.0 * f * pulse.drive_at_arrival(), p);
    let src_ze = ae.times_exp(SQRT_2 * f * pulse.drive_at_arrival(), p);
    let [zg, ze] = mz.propagate(ZERO, [&src_zg, &src_ze]);
    let zg_src = zg.scaled(C64::from(SQRT_2 * f));
    let ze_src = ze.scaled(C64::from(f));

    // (X^g_ω, X^e_ω) per grid point
    let xhat: Vec<C64> = w
        .iter()
        .map(|&x| pulse.sdf(x) * free_phase(x, pulse.t0))
        .collect();
    let xs: Vec<[ExpSum; 2]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let wk = C64::from(w[k]);
            let mut b = ExpSum::exp(xhat[k], wk);
            b.add_scaled(&ag.convolve(wk), MINUS_I * f);
            let mut src_g = b.times_exp(SQRT_2 * f * pulse.drive_at_arrival(), p);
            src_g.add_scaled(&zg_src, C64::new(1.0, 0.0));
            m1.propagate(wk, [&src_g, &ze_src])
        })
        .collect();

    let c = f / SQRT_2;
    let mut phi = Array2::<C64>::zeros((n, n));
    phi.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(j, mut row)| {
            for k in 0..n {
                let wsum = C64::from(w[j] + w[k]);
                let conv = xs[j][0].convolve_eval(wsum, tt) + xs[k][0].convolve_eval(wsum, tt);
                row[k] = xhat[j] * xhat[k] * free_phase(w[j] + w[k], tt) + MINUS_I * c * conv;
            }
        });
    Ok(TwoExcState {
        phi,
        x_g: xs.iter().map(|x| x[0].eval(tt)).collect(),
        x_e: xs.iter().map(|x| x[1].eval(tt)).collect(),
        z_g: zg.eval(tt),
        z_e: ze.eval(tt),
    })
}
