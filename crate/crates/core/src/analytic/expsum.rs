//! Finite sums `Σ c·T^m·e^{−iλT}` closed under products with exponentials
//! and under convolution with exponential kernels.
//!
//! Every amplitude of the driven hierarchy is such a sum once the drive is a
//! decaying exponential, so the whole transient is evaluated without
//! quadrature.

use crate::{Error, Result, C64};

/// Rates closer than this are treated as coincident in a convolution.
pub const COINCIDENCE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Term {
    c: C64,
    m: u32,
    rate: C64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpSum {
    terms: Vec<Term>,
}

impl ExpSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c·e^{−i·rate·T}`.
    pub fn exp(c: C64, rate: C64) -> Self {
        let mut s = Self::zero();
        s.push(c, 0, rate);
        s
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, c: C64, m: u32, rate: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let scale = 1.0 + rate.norm();
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| t.m == m && (t.rate - rate).norm() <= 1e-15 * scale)
        {
            t.c += c;
        } else {
            self.terms.push(Term { c, m, rate });
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|term| term.c * t.powi(term.m as i32) * (C64::new(0.0, -t) * term.rate).exp())
            .sum()
    }

    /// `self + s·other`.
    pub fn add_scaled(&mut self, other: &ExpSum, s: C64) {
        for t in &other.terms {
            self.push(s * t.c, t.m, t.rate);
        }
    }

    pub fn scaled(&self, s: C64) -> ExpSum {
        let mut out = ExpSum::zero();
        out.add_scaled(self, s);
        out
    }

    /// `self · c·e^{−i·rate·T}`.
    pub fn times_exp(&self, c: C64, rate: C64) -> ExpSum {
        let mut out = ExpSum::zero();
        for t in &self.terms {
            out.push(c * t.c, t.m, t.rate + rate);
        }
        out
    }

    /// `∫_0^T dσ e^{−i·rate·(T−σ)} self(σ)`.
    pub fn convolve(&self, rate: C64) -> ExpSum {
        let mut out = ExpSum::zero();
        for t in &self.terms {
            convolve_term(t, rate, |c, m, r| out.push(c, m, r));
        }
        out
    }

    /// `convolve(rate).eval(t)` without building the intermediate sum.
    pub fn convolve_eval(&self, rate: C64, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for term in &self.terms {
            convolve_term(term, rate, |c, m, r| {
                acc += c * t.powi(m as i32) * (C64::new(0.0, -t) * r).exp()
            });
        }
        acc
    }
}

fn convolve_term(t: &Term, rate: C64, mut emit: impl FnMut(C64, u32, C64)) {
    let m = t.m;
    if (t.rate - rate).norm() < COINCIDENCE_EPS {
        // ∫ σ^m dσ = T^{m+1}/(m+1)
        emit(t.c / (m + 1) as f64, m + 1, rate);
        return;
    }
    // e^{−iℰT} ∫_0^T σ^m e^{dσ} dσ with d = −i(λ − ℰ)
    let d = C64::new(0.0, -1.0) * (t.rate - rate);
    let mut fact_ratio = 1.0; // m!/k!, built downward from k = m
    let mut dpow = d; // d^{m−k+1}
    for k in (0..=m).rev() {
        let sign = if (m - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        emit(t.c * sign * fact_ratio / dpow, k, t.rate);
        fact_ratio *= k.max(1) as f64;
        dpow *= d;
    }
    // fact_ratio is m! and dpow is d^{m+2} here
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    emit(-t.c * sign * fact_ratio * d / dpow, 0, rate);
}

/// Spectral projectors of a complex symmetric 2×2 matrix
/// `[[a, b], [b, d]]` with eigenvalues `λ₊`, `λ₋`:
/// `P± = (M − λ∓)/(λ± − λ∓)`.
#[derive(Clone, Copy, Debug)]
pub struct Projectors {
    pub lambda: [C64; 2],
    pub p: [[[C64; 2]; 2]; 2],
}

impl Projectors {
    pub fn new(m: [[C64; 2]; 2], lambda: [C64; 2], scale: f64) -> Result<Self> {
        let gap = lambda[0] - lambda[1];
        if gap.norm() < COINCIDENCE_EPS * scale.max(1.0) {
            return Err(Error::Numerical(format!(
                "exceptional point: eigenvalues {} and {} coincide, projector form undefined",
                lambda[0], lambda[1]
            )));
        }
        let mut p = [[[C64::new(0.0, 0.0); 2]; 2]; 2];
        for (mu, other, den) in [(0, 1, gap), (1, 0, -gap)] {
            for r in 0..2 {
                for c in 0..2 {
                    let shift = if r == c { lambda[other] } else { C64::new(0.0, 0.0) };
                    p[mu][r][c] = (m[r][c] - shift) / den;
                }
            }
        }
        Ok(Self { lambda, p })
    }

    /// Solution of `i dy/dT = (M + shift) y + s(T)`, `y(0) = 0`:
    /// `y = −i Σ_μ P_μ ∫ e^{−i(λ_μ + shift)(T−σ)} s(σ) dσ`.
    pub fn propagate(&self, shift: C64, src: [&ExpSum; 2]) -> [ExpSum; 2] {
        let mi = C64::new(0.0, -1.0);
        let mut out = [ExpSum::zero(), ExpSum::zero()];
        for mu in 0..2 {
            let rate = self.lambda[mu] + shift;
            let conv = [src[0].convolve(rate), src[1].convolve(rate)];
            for r in 0..2 {
                for c in 0..2 {
                    let w = self.p[mu][r][c];
                    if w != C64::new(0.0, 0.0) {
                        out[r].add_scaled(&conv[c], mi * w);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson quadrature of the defining convolution integral.
    fn convolve_numerically(s: &ExpSum, rate: C64, t: f64) -> C64 {
        let n = 4000;
        let h = t / n as f64;
        let f = |x: f64| (C64::new(0.0, -(t - x)) * rate).exp() * s.eval(x);
        let mut acc = f(0.0) + f(t);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(h * k as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn convolution_matches_quadrature() {
        let mut s = ExpSum::exp(C64::new(1.0, 0.5), C64::new(0.7, -0.3));
        s.push(C64::new(-0.4, 0.2), 2, C64::new(-1.1, -0.6));
        s.push(C64::new(0.3, 0.0), 1, C64::new(0.0, 0.0));
        for rate in [C64::new(0.2, -0.5), C64::new(0.7, -0.3), C64::new(-1.1, -0.6)] {
            let exact = s.convolve(rate).eval(2.5);
            let quad = convolve_numerically(&s, rate, 2.5);
            assert!((exact - quad).norm() < 1e-10, "{rate}: {}", (exact - quad).norm());
            assert!((s.convolve_eval(rate, 2.5) - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn coincident_rates_use_the_limit() {
        let lam = C64::new(0.4, -0.2);
        let s = ExpSum::exp(C64::new(1.0, 0.0), lam);
        let conv = s.convolve(lam);
        let t = 3.0;
        let exact = t * (C64::new(0.0, -t) * lam).exp();
        assert!((conv.eval(t) - exact).norm() < 1e-15);
    }

    #[test]
    fn exceptional_point_is_rejected() {
        let a = C64::new(0.0, -0.5);
        let b = C64::new(0.25, 0.0);
        let d = C64::new(0.0, 0.0);
        // eigenvalues of [[−i/2, 1/4], [1/4, 0]] coincide at −i/4
        let l = C64::new(0.0, -0.25);
        assert!(matches!(
            Projectors::new([[a, b], [b, d]], [l, l], 1.0),
            Err(Error::Numerical(_))
        ));
    }

    proptest! {
        #[test]
        fn projectors_resolve_identity(
            ar in -2.0f64..2.0, ai in -1.0f64..0.0, b in 0.1f64..3.0, d in -2.0f64..2.0,
        ) {
            let a = C64::new(ar, ai);
            let bb = C64::from(b);
            let dd = C64::from(d);
            let disc = ((a - dd) * (a - dd) * 0.25 + bb * bb).sqrt();
            let mean = (a + dd) * 0.5;
            let pr = Projectors::new([[a, bb], [bb, dd]], [mean + disc, mean - disc], 3.0).unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    let sum = pr.p[0][r][c] + pr.p[1][r][c];
                    let id = if r == c { 1.0 } else { 0.0 };
                    prop_assert!((sum - id).norm() < 1e-9);
                    // M = Σ λ_μ P_μ
                    let m = pr.lambda[0] * pr.p[0][r][c] + pr.lambda[1] * pr.p[1][r][c];
                    let want = [[a, bb], [bb, dd]][r][c];
                    prop_assert!((m - want).norm() < 1e-9);
                }
            }
        }
    }
}
