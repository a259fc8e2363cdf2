//! Physical parameters, JC resonances and the Lorentzian input pulse.
//!
//! Frequencies are detunings from the bare cavity frequency `ω_c`, so the
//! cavity sits at the origin and the atom at `delta_a`.

use std::f64::consts::PI;

use crate::quadrature::FrequencyGrid;
use crate::{Error, Result, C64};

/// Waveguide + Jaynes-Cummings constants (rad/time, offset frame).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    /// Atom-cavity coupling.
    pub g: f64,
    /// Cavity decay rate into the waveguide.
    pub kappa: f64,
    /// Atom-cavity detuning `ω_a − ω_c`.
    pub delta_a: f64,
}

impl SystemParams {
    pub fn new(g: f64, kappa: f64, delta_a: f64) -> Result<Self> {
        let params = Self { g, kappa, delta_a };
        params.validate()?;
        Ok(params)
    }

    /// Cavity-only parameters in `kappa = 1` units.
    pub fn resonant(g: f64) -> Result<Self> {
        Self::new(g, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::InvalidParameter("kappa must be > 0".into()));
        }
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(Error::InvalidParameter("g must be ≥ 0".into()));
        }
        if !self.delta_a.is_finite() {
            return Err(Error::InvalidParameter("delta_a must be finite".into()));
        }
        Ok(())
    }

    /// Waveguide-cavity coupling `f = sqrt(kappa / 2π)`.
    pub fn f(&self) -> f64 {
        (self.kappa / (2.0 * PI)).sqrt()
    }

    /// Atomic transition frequency in the offset frame.
    pub fn omega_a(&self) -> f64 {
        self.delta_a
    }

    /// Complex cavity frequency `−iκ/2` (the cavity is the origin).
    pub fn omega_c_tilde(&self) -> C64 {
        C64::new(0.0, -0.5 * self.kappa)
    }

    /// Complex detuning `ω_a − ω̃_c`.
    pub fn delta_a_tilde(&self) -> C64 {
        C64::from(self.delta_a) - self.omega_c_tilde()
    }

    /// Vacuum Rabi frequency `sqrt(g² + (Δ_a/2)²)` of the closed JC system.
    pub fn vacuum_rabi_frequency(&self) -> f64 {
        self.g.hypot(0.5 * self.delta_a)
    }

    pub fn resonances(&self) -> Resonances {
        Resonances::of(self)
    }

    /// Unit-modulus single-photon transmission factor
    /// `∏_μ (ω − ℰ^μ₁)* / (ω − ℰ^μ₁)` for a real frequency.
    ///
    /// A pole sitting exactly on the real axis (the undamped atom at `g = 0`)
    /// contributes the limit value 1.
    pub fn transmission(&self, res: &Resonances, omega: f64) -> C64 {
        [res.e1_plus, res.e1_minus]
            .iter()
            .map(|&e| {
                let z = C64::from(omega) - e;
                if z == C64::new(0.0, 0.0) {
                    C64::new(1.0, 0.0)
                } else {
                    z.conj() / z
                }
            })
            .product()
    }
}

/// Complex poles of the open JC system in the one- and two-excitation
/// manifolds.
///
/// The `+` label goes to the pole with the larger real part (ties: larger
/// imaginary part); `r1` and `r2` are defined as `plus − minus`, i.e. the
/// principal Rabi radical up to the sign fixed by the labelling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonances {
    pub e1_plus: C64,
    pub e1_minus: C64,
    pub e2_plus: C64,
    pub e2_minus: C64,
    pub r1: C64,
    pub r2: C64,
}

impl Resonances {
    pub fn of(params: &SystemParams) -> Self {
        let wc = params.omega_c_tilde();
        let dt = params.delta_a_tilde();
        let g2 = params.g * params.g;
        let r1 = (4.0 * g2 + dt * dt).sqrt();
        let r2 = (8.0 * g2 + dt * dt).sqrt();
        let scale = params.kappa.max(params.g).max(params.delta_a.abs());
        let (e1_plus, e1_minus) = label(wc + 0.5 * dt + 0.5 * r1, wc + 0.5 * dt - 0.5 * r1, scale);
        let (e2_plus, e2_minus) =
            label(2.0 * wc + 0.5 * dt + 0.5 * r2, 2.0 * wc + 0.5 * dt - 0.5 * r2, scale);
        Self {
            e1_plus,
            e1_minus,
            e2_plus,
            e2_minus,
            r1: e1_plus - e1_minus,
            r2: e2_plus - e2_minus,
        }
    }

    pub fn e1(&self) -> [C64; 2] {
        [self.e1_plus, self.e1_minus]
    }

    pub fn e2(&self) -> [C64; 2] {
        [self.e2_plus, self.e2_minus]
    }
}

fn label(a: C64, b: C64, scale: f64) -> (C64, C64) {
    let tie = (a.re - b.re).abs() <= 1e-13 * scale;
    let a_first = if tie { a.im >= b.im } else { a.re > b.re };
    if a_first {
        (a, b)
    } else {
        (b, a)
    }
}

/// `(ℰ⁺₁, ℰ⁻₁)` with `ℰ±₁ = ω̃_c + Δ̃_a/2 ± R₁/2`, `R₁ = sqrt(4g² + Δ̃_a²)`.
pub fn single_photon_resonances(params: &SystemParams) -> (C64, C64) {
    let r = Resonances::of(params);
    (r.e1_plus, r.e1_minus)
}

/// `(ℰ⁺₂, ℰ⁻₂)` with `ℰ±₂ = 2ω̃_c + Δ̃_a/2 ± R₂/2`, `R₂ = sqrt(8g² + Δ̃_a²)`.
pub fn two_photon_resonances(params: &SystemParams) -> (C64, C64) {
    let r = Resonances::of(params);
    (r.e2_plus, r.e2_minus)
}

/// Single-photon scattering phase `Θ_ω ∈ (−π, π]`.
pub fn single_photon_phase(params: &SystemParams, omega: f64) -> f64 {
    let t = params.transmission(&params.resonances(), omega);
    let a = t.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhotonCount {
    One,
    Two,
}

impl TryFrom<u32> for PhotonCount {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        match n {
            1 => Ok(PhotonCount::One),
            2 => Ok(PhotonCount::Two),
            _ => Err(Error::InvalidParameter(format!(
                "photon count must be 1 or 2, got {n}"
            ))),
        }
    }
}

/// Lorentzian single-photon wave packet
/// `ξ_ω = A sqrt(γ₀/2π) / ((ω − ω₀) + iγ₀/2) · exp(i(ω − ω₀)t₀)`.
///
/// `A` is 1 for the continuum-normalised packet; [`Pulse::normalized_on`]
/// rescales it so that the packet has unit norm under the grid quadrature.
/// The same factor multiplies the drive `Ξ(t)`, keeping the two consistent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub gamma0: f64,
    pub omega0: f64,
    pub t0: f64,
    pub photons: PhotonCount,
    amplitude: f64,
}

impl Pulse {
    pub fn new(gamma0: f64, omega0: f64, t0: f64) -> Result<Self> {
        if !gamma0.is_finite() || gamma0 <= 0.0 {
            return Err(Error::InvalidParameter("gamma0 must be > 0".into()));
        }
        if !omega0.is_finite() {
            return Err(Error::InvalidParameter("omega0 must be finite".into()));
        }
        if !t0.is_finite() || t0 < 0.0 {
            return Err(Error::InvalidParameter("t0 must be ≥ 0".into()));
        }
        Ok(Self {
            gamma0,
            omega0,
            t0,
            photons: PhotonCount::Two,
            amplitude: 1.0,
        })
    }

    pub fn with_photons(mut self, photons: PhotonCount) -> Self {
        self.photons = photons;
        self
    }

    /// The same packet arriving at `t0` instead.
    pub fn arriving_at(&self, t0: f64) -> Result<Self> {
        if !t0.is_finite() || t0 < 0.0 {
            return Err(Error::InvalidParameter("t0 must be ≥ 0".into()));
        }
        Ok(Self { t0, ..*self })
    }

    /// The same packet with carrier `omega0`.
    pub fn with_carrier(&self, omega0: f64) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(Error::InvalidParameter("omega0 must be finite".into()));
        }
        Ok(Self { omega0, ..*self })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Pulse duration `τ_p = 1/γ₀`.
    pub fn duration(&self) -> f64 {
        1.0 / self.gamma0
    }

    /// Pole of `ξ` in the lower half plane, `ω₀ − iγ₀/2`.
    pub fn pole(&self) -> C64 {
        C64::new(self.omega0, -0.5 * self.gamma0)
    }

    /// `Ξ(t₀⁺)`; for `t ≥ t₀` the drive is `Ξ(t₀⁺)·exp(−i·pole·(t − t₀))`.
    pub fn drive_at_arrival(&self) -> C64 {
        let phase = C64::new(0.0, -self.omega0 * self.t0).exp();
        C64::new(0.0, -self.amplitude * (2.0 * PI * self.gamma0).sqrt()) * phase
    }

    /// `ξ` at a real frequency.
    pub fn sdf(&self, omega: f64) -> C64 {
        let u = omega - self.omega0;
        let pref = self.amplitude * (self.gamma0 / (2.0 * PI)).sqrt();
        pref * C64::new(0.0, u * self.t0).exp() / C64::new(u, 0.5 * self.gamma0)
    }

    /// `ξ` analytically continued to complex frequency.
    pub fn sdf_complex(&self, z: C64) -> Result<C64> {
        let u = z - self.omega0;
        let den = u + C64::new(0.0, 0.5 * self.gamma0);
        if den == C64::new(0.0, 0.0) {
            return Err(Error::Domain(format!(
                "pulse SDF evaluated on its pole ω₀ − iγ₀/2 = {}",
                self.pole()
            )));
        }
        let pref = self.amplitude * (self.gamma0 / (2.0 * PI)).sqrt();
        Ok(pref * (C64::i() * u * self.t0).exp() / den)
    }

    /// `Ξ(t) = ∫dω e^{−iωt} ξ_ω`, with `θ(0) = 1`.
    pub fn drive(&self, t: f64) -> C64 {
        if t < self.t0 {
            return C64::new(0.0, 0.0);
        }
        let dt = t - self.t0;
        self.drive_at_arrival() * (C64::new(-0.5 * self.gamma0, -self.omega0) * dt).exp()
    }

    /// Copy of the pulse rescaled to unit trapezoid norm on `grid`.
    pub fn normalized_on(&self, grid: &FrequencyGrid) -> Self {
        let unit = Self {
            amplitude: 1.0,
            ..*self
        };
        let norm = grid.integrate(|k| unit.sdf(grid.point(k)).norm_sqr());
        Self {
            amplitude: norm.sqrt().recip(),
            ..*self
        }
    }
}

/// `ξ_z` for complex `z`; rejects the pole `ω₀ − iγ₀/2`.
pub fn pulse_sdf(pulse: &Pulse, z: C64) -> Result<C64> {
    pulse.sdf_complex(z)
}

/// Exact Fourier transform of the Lorentzian packet:
/// `Ξ(t) = −i sqrt(2πγ₀) e^{−iω₀t} e^{−γ₀(t−t₀)/2} θ(t − t₀)`.
pub fn pulse_time_profile(pulse: &Pulse, t: f64) -> C64 {
    pulse.drive(t)
}
