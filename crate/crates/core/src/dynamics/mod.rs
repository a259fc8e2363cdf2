//! Amplitude equations of the one- and two-excitation sectors on a
//! discretised waveguide continuum.
//!
//! The hierarchy is one-way coupled: the two-excitation sector is driven by
//! `Ξ(t)` times one-excitation amplitudes, never the reverse. No frequency
//! integral appears on the right-hand side, so every grid point evolves
//! pointwise and the grid only enters through the quadrature of observables.

mod dopri;

use std::f64::consts::SQRT_2;

use ndarray::Array2;
use rayon::prelude::*;

pub use dopri::{integrate, StepStats, StepperOptions};

use crate::model::{PhotonCount, Pulse, SystemParams};
pub use crate::quadrature::FrequencyGrid;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Below this many points per row the Φ right-hand side runs serially.
const PAR_ROWS_MIN: usize = 48;

/// Uniform grid of `n` points on `[center − span, center + span]`.
pub fn make_grid(center: f64, span: f64, n: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::new(center, span, n)
}

/// Frequency window a dynamics grid should cover: both single-photon
/// resonances with a `5κ` margin, and `ω₀ ± 25γ₀`.
pub fn coverage_window(params: &SystemParams, pulse: &Pulse) -> (f64, f64) {
    let r = params.resonances();
    let reach = params
        .g
        .max(r.e1_plus.re.abs())
        .max(r.e1_minus.re.abs())
        + 5.0 * params.kappa;
    let lo = (-reach).min(pulse.omega0 - 25.0 * pulse.gamma0);
    let hi = reach.max(pulse.omega0 + 25.0 * pulse.gamma0);
    (lo, hi)
}

/// Smallest `n`-point grid satisfying the coverage rule.
pub fn coverage_grid(params: &SystemParams, pulse: &Pulse, n: usize) -> Result<FrequencyGrid> {
    let (lo, hi) = coverage_window(params, pulse);
    FrequencyGrid::new(0.5 * (lo + hi), 0.5 * (hi - lo), n)
}

/// Description of the uncovered part of the window, if any.
pub fn coverage_gap(params: &SystemParams, pulse: &Pulse, grid: &FrequencyGrid) -> Option<String> {
    let (lo, hi) = coverage_window(params, pulse);
    let tol = 1e-9 * (hi - lo);
    if grid.lo() <= lo + tol && grid.hi() >= hi - tol {
        None
    } else {
        Some(format!(
            "grid [{:.4}, {:.4}] does not cover [{:.4}, {:.4}] (resonances ± 5κ and ω₀ ± 25γ₀)",
            grid.lo(),
            grid.hi(),
            lo,
            hi
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneExcState {
    pub a_g: C64,
    pub a_e: C64,
    pub b: Vec<C64>,
}

impl OneExcState {
    pub fn zeros(n: usize) -> Self {
        Self {
            a_g: ZERO,
            a_e: ZERO,
            b: vec![ZERO; n],
        }
    }

    pub fn norm(&self, grid: &FrequencyGrid) -> f64 {
        self.a_g.norm_sqr() + self.a_e.norm_sqr() + grid.norm_sqr(&self.b)
    }

    fn flat_len(n: usize) -> usize {
        n + 2
    }

    fn write_flat(&self, out: &mut [C64]) {
        out[0] = self.a_g;
        out[1] = self.a_e;
        out[2..].copy_from_slice(&self.b);
    }

    fn from_flat(y: &[C64]) -> Self {
        Self {
            a_g: y[0],
            a_e: y[1],
            b: y[2..].to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoExcState {
    /// `Φ_{ω_j, ω_k}`, indexed `[j, k]`.
    pub phi: Array2<C64>,
    pub x_g: Vec<C64>,
    pub x_e: Vec<C64>,
    pub z_g: C64,
    pub z_e: C64,
}

impl TwoExcState {
    pub fn zeros(n: usize) -> Self {
        Self {
            phi: Array2::zeros((n, n)),
            x_g: vec![ZERO; n],
            x_e: vec![ZERO; n],
            z_g: ZERO,
            z_e: ZERO,
        }
    }

    pub fn norm(&self, grid: &FrequencyGrid) -> f64 {
        observables(self, grid).norm
    }

    /// `max_{jk} |Φ_{jk} − Φ_{kj}|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.phi.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in j + 1..n {
                worst = worst.max((self.phi[[j, k]] - self.phi[[k, j]]).norm());
            }
        }
        worst
    }

    fn flat_len(n: usize) -> usize {
        n * n + 2 * n + 2
    }

    fn write_flat(&self, out: &mut [C64]) {
        let n = self.x_g.len();
        for (o, v) in out[..n * n].iter_mut().zip(self.phi.iter()) {
            *o = *v;
        }
        out[n * n..n * n + n].copy_from_slice(&self.x_g);
        out[n * n + n..n * n + 2 * n].copy_from_slice(&self.x_e);
        out[n * n + 2 * n] = self.z_g;
        out[n * n + 2 * n + 1] = self.z_e;
    }

    fn from_flat(y: &[C64], n: usize) -> Self {
        Self {
            phi: Array2::from_shape_vec((n, n), y[..n * n].to_vec()).expect("n × n block"),
            x_g: y[n * n..n * n + n].to_vec(),
            x_e: y[n * n + n..n * n + 2 * n].to_vec(),
            z_g: y[n * n + 2 * n],
            z_e: y[n * n + 2 * n + 1],
        }
    }
}

/// Input states on `grid` with `B = ξ`, `Φ = ξ ⊗ ξ`, plus the pulse
/// rescaled so that both discrete norms are exactly 1. The rescaled pulse
/// must be used for the drive as well.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialStates {
    pub one: OneExcState,
    pub two: TwoExcState,
    pub pulse: Pulse,
}

pub fn initial_states(pulse: &Pulse, grid: &FrequencyGrid) -> InitialStates {
    let pulse = pulse.normalized_on(grid);
    let n = grid.len();
    let xi: Vec<C64> = grid.points().iter().map(|&w| pulse.sdf(w)).collect();
    let phi = Array2::from_shape_fn((n, n), |(j, k)| xi[j] * xi[k]);
    InitialStates {
        one: OneExcState {
            a_g: ZERO,
            a_e: ZERO,
            b: xi,
        },
        two: TwoExcState {
            phi,
            ..TwoExcState::zeros(n)
        },
        pulse,
    }
}

/// Constants shared by the flat right-hand sides.
#[derive(Clone, Debug)]
pub(crate) struct Coefficients<'a> {
    f: f64,
    g: f64,
    wc: C64,
    wa: C64,
    omega: &'a [f64],
}

impl<'a> Coefficients<'a> {
    pub(crate) fn new(params: &SystemParams, grid: &'a FrequencyGrid) -> Self {
        Self {
            f: params.f(),
            g: params.g,
            wc: params.omega_c_tilde(),
            wa: C64::from(params.omega_a()),
            omega: grid.points(),
        }
    }

    /// One-excitation sector, layout `[A^g, A^e, B_0..B_{n-1}]`.
    pub(crate) fn one(&self, drive: C64, y: &[C64], dy: &mut [C64]) {
        let (ag, ae) = (y[0], y[1]);
        dy[0] = MINUS_I * (self.wc * ag + self.f * drive + self.g * ae);
        dy[1] = MINUS_I * (self.wa * ae + self.g * ag);
        let fag = self.f * ag;
        for ((d, b), &w) in dy[2..].iter_mut().zip(&y[2..]).zip(self.omega) {
            *d = MINUS_I * (w * b + fag);
        }
    }

    /// Two-excitation sector, layout `[Φ (row-major), X^g, X^e, Z^g, Z^e]`,
    /// sourced by the one-excitation amplitudes `one`.
    pub(crate) fn two(&self, drive: C64, one: &[C64], y: &[C64], dy: &mut [C64]) {
        let n = self.omega.len();
        let nn = n * n;
        let (ag, ae, b) = (one[0], one[1], &one[2..]);
        let (phi, rest) = y.split_at(nn);
        let (xg, rest) = rest.split_at(n);
        let (xe, z) = rest.split_at(n);
        let (zg, ze) = (z[0], z[1]);
        let (dphi, drest) = dy.split_at_mut(nn);
        let (dxg, drest) = drest.split_at_mut(n);
        let (dxe, dz) = drest.split_at_mut(n);

        let c = self.f / SQRT_2;
        let omega = self.omega;
        let row = |j: usize, out: &mut [C64], phi_row: &[C64]| {
            let wj = omega[j];
            let xj = xg[j];
            for k in 0..n {
                out[k] = MINUS_I * ((wj + omega[k]) * phi_row[k] + c * (xj + xg[k]));
            }
        };
        if n >= PAR_ROWS_MIN {
            dphi.par_chunks_mut(n)
                .zip(phi.par_chunks(n))
                .enumerate()
                .for_each(|(j, (out, p))| row(j, out, p));
        } else {
            dphi.chunks_mut(n)
                .zip(phi.chunks(n))
                .enumerate()
                .for_each(|(j, (out, p))| row(j, out, p));
        }

        let fs2 = self.f * SQRT_2;
        let gs2 = self.g * SQRT_2;
        for k in 0..n {
            let w = omega[k];
            dxg[k] = MINUS_I
                * ((w + self.wc) * xg[k] + fs2 * drive * b[k] + self.g * xe[k] + fs2 * zg);
            dxe[k] = MINUS_I * ((w + self.wa) * xe[k] + self.g * xg[k] + self.f * ze);
        }
        dz[0] = MINUS_I * (2.0 * self.wc * zg + 2.0 * self.f * drive * ag + gs2 * ze);
        dz[1] = MINUS_I * ((self.wc + self.wa) * ze + fs2 * drive * ae + gs2 * zg);
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}

/// Time derivative of the one-excitation amplitudes.
pub fn rhs_one(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    t: f64,
    state: &OneExcState,
) -> Result<OneExcState> {
    let n = grid.len();
    check_len("one-excitation state", n, state.b.len())?;
    let mut y = vec![ZERO; OneExcState::flat_len(n)];
    let mut dy = y.clone();
    state.write_flat(&mut y);
    Coefficients::new(params, grid).one(pulse.drive(t), &y, &mut dy);
    Ok(OneExcState::from_flat(&dy))
}

/// Time derivative of the two-excitation amplitudes.
pub fn rhs_two(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    t: f64,
    one: &OneExcState,
    two: &TwoExcState,
) -> Result<TwoExcState> {
    let n = grid.len();
    check_len("one-excitation state", n, one.b.len())?;
    check_len("X^g", n, two.x_g.len())?;
    check_len("X^e", n, two.x_e.len())?;
    check_len("Φ rows", n, two.phi.nrows())?;
    check_len("Φ columns", n, two.phi.ncols())?;
    let mut y1 = vec![ZERO; OneExcState::flat_len(n)];
    one.write_flat(&mut y1);
    let mut y2 = vec![ZERO; TwoExcState::flat_len(n)];
    two.write_flat(&mut y2);
    let mut dy = vec![ZERO; y2.len()];
    Coefficients::new(params, grid).two(pulse.drive(t), &y1, &y2, &mut dy);
    Ok(TwoExcState::from_flat(&dy, n))
}

/// Populations of the two-excitation state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Observables {
    /// Mean cavity photon number.
    pub n_c: f64,
    /// Atomic excited-state population.
    pub p_a: f64,
    /// Probability of one excitation in the JC system.
    pub p1: f64,
    /// Probability of two excitations in the JC system.
    pub p2: f64,
    /// Mean number of photons in the waveguide.
    pub n_wg: f64,
    pub norm: f64,
}

pub fn observables(two: &TwoExcState, grid: &FrequencyGrid) -> Observables {
    let xg = grid.norm_sqr(&two.x_g);
    let xe = grid.norm_sqr(&two.x_e);
    let zg = two.z_g.norm_sqr();
    let ze = two.z_e.norm_sqr();
    let phi = match two.phi.as_slice() {
        Some(s) => grid.norm_sqr_2d(s),
        None => grid.norm_sqr_2d(&two.phi.iter().copied().collect::<Vec<_>>()),
    };
    Observables {
        n_c: xg + ze + 2.0 * zg,
        p_a: xe + ze,
        p1: xg + xe,
        p2: zg + ze,
        n_wg: 2.0 * phi + xg + xe,
        norm: phi + xg + xe + zg + ze,
    }
}

/// Populations of a one-photon state (`p2 = 0`).
pub fn observables_one(one: &OneExcState, grid: &FrequencyGrid) -> Observables {
    let ag = one.a_g.norm_sqr();
    let ae = one.a_e.norm_sqr();
    let b = grid.norm_sqr(&one.b);
    Observables {
        n_c: ag,
        p_a: ae,
        p1: ag + ae,
        p2: 0.0,
        n_wg: b,
        norm: ag + ae + b,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Times at which full states are stored.
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        let s = StepperOptions::default();
        Self {
            rtol: s.rtol,
            atol: s.atol,
            max_step: s.max_step,
            max_steps: s.max_steps,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub one: OneExcState,
    /// Absent for one-photon runs.
    pub two: Option<TwoExcState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Two-excitation observables for two-photon runs, one-excitation ones
    /// otherwise.
    pub observables: Vec<Observables>,
    pub snapshots: Vec<Snapshot>,
    /// The grid-normalised pulse that was propagated.
    pub pulse: Pulse,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }
}

fn sorted_times(what: &str, times: &[f64], t_end: f64) -> Result<Vec<f64>> {
    let mut v = times.to_vec();
    if let Some(bad) = v.iter().find(|t| !t.is_finite() || **t < 0.0 || **t > t_end) {
        return Err(Error::Config(format!(
            "{what} time {bad} outside [0, t_end = {t_end}]"
        )));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// Integrates from `t = 0` (input state `B = ξ`, `Φ = ξξ`) to `t_end`,
/// recording observables at `output_times` and full states at
/// `opts.snapshot_times`. The pulse is renormalised on `grid` first.
pub fn evolve(
    params: &SystemParams,
    pulse: &Pulse,
    grid: &FrequencyGrid,
    t_end: f64,
    output_times: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    if !t_end.is_finite() || t_end <= pulse.t0 {
        return Err(Error::Config(format!(
            "t_end = {t_end} must exceed the pulse arrival t0 = {}",
            pulse.t0
        )));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.max_step > 0.0) {
        return Err(Error::Config(
            "solver tolerances and max_step must be > 0".into(),
        ));
    }
    if let Some(gap) = coverage_gap(params, pulse, grid) {
        log::warn!("{gap}");
    }
    let outputs = sorted_times("output", output_times, t_end)?;
    let snaps = sorted_times("snapshot", &opts.snapshot_times, t_end)?;
    let mut all: Vec<f64> = outputs.iter().chain(&snaps).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();

    let init = initial_states(pulse, grid);
    let pulse = init.pulse;
    let n = grid.len();
    let two_photons = pulse.photons == PhotonCount::Two;
    let n1 = OneExcState::flat_len(n);
    let n2 = if two_photons {
        TwoExcState::flat_len(n)
    } else {
        0
    };
    let mut y = vec![ZERO; n1 + n2];
    init.one.write_flat(&mut y[..n1]);
    if two_photons {
        init.two.write_flat(&mut y[n1..]);
    }

    let coeffs = Coefficients::new(params, grid);
    let stepper = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_step: opts.max_step,
        max_steps: opts.max_steps,
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(outputs.len()),
        observables: Vec::with_capacity(outputs.len()),
        snapshots: Vec::with_capacity(snaps.len()),
        pulse,
        stats: StepStats::default(),
    };
    let mut emit = |t: f64, y: &[C64]| {
        let one = &y[..n1];
        let want_obs = outputs.binary_search_by(|s| s.total_cmp(&t)).is_ok();
        let want_snap = snaps.binary_search_by(|s| s.total_cmp(&t)).is_ok();
        let two = (two_photons && (want_obs || want_snap))
            .then(|| TwoExcState::from_flat(&y[n1..], n));
        if want_obs {
            traj.times.push(t);
            traj.observables.push(match &two {
                Some(two) => observables(two, grid),
                None => observables_one(&OneExcState::from_flat(one), grid),
            });
        }
        if want_snap {
            traj.snapshots.push(Snapshot {
                t,
                one: OneExcState::from_flat(one),
                two,
            });
        }
    };

    let mut total = StepStats::default();
    // The drive switches on discontinuously at t0, so the two pieces are
    // integrated separately; the first one sees no drive at all.
    let segments: [(f64, f64, bool); 2] = [(0.0, pulse.t0, false), (pulse.t0, t_end, true)];
    for (k, &(a, b, driven)) in segments.iter().enumerate() {
        if b <= a {
            if k == 0 {
                // t0 = 0: report outputs at the start once.
                let start: Vec<f64> = all.iter().copied().filter(|&s| s == 0.0).collect();
                for s in start {
                    emit(s, &y);
                }
            }
            continue;
        }
        let lo = if k == 0 {
            0
        } else {
            all.partition_point(|&s| s <= a)
        };
        let hi = all.partition_point(|&s| s <= b);
        let seg_outputs = &all[lo..hi];
        let stats = integrate(
            |t, y: &[C64], dy: &mut [C64]| {
                let drive = if driven { pulse.drive(t) } else { ZERO };
                let (y1, y2) = y.split_at(n1);
                let (dy1, dy2) = dy.split_at_mut(n1);
                coeffs.one(drive, y1, dy1);
                if two_photons {
                    coeffs.two(drive, y1, y2, dy2);
                }
            },
            a,
            &mut y,
            b,
            seg_outputs,
            &stepper,
            &mut emit,
        )?;
        total.accepted += stats.accepted;
        total.rejected += stats.rejected;
        total.rhs_evals += stats.rhs_evals;
    }
    Ok(Trajectory {
        stats: total,
        ..traj
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn small_setup(g: f64) -> (SystemParams, Pulse, FrequencyGrid) {
        let params = SystemParams::resonant(g).unwrap();
        let pulse = Pulse::new(0.5, 0.3, 1.0).unwrap();
        let grid = make_grid(0.0, 4.0, 9).unwrap();
        (params, pulse, grid)
    }

    #[test]
    fn coverage_warning_rule() {
        let params = SystemParams::resonant(10.0).unwrap();
        let pulse = Pulse::new(0.2, 0.0, 0.0).unwrap();
        let grid = make_grid(0.0, 25.0 * 0.2, 100).unwrap();
        assert!(coverage_gap(&params, &pulse, &grid).is_some());
        let grid = coverage_grid(&params, &pulse, 64).unwrap();
        assert!(coverage_gap(&params, &pulse, &grid).is_none());
        assert!(grid.hi() >= 15.0 && grid.lo() <= -15.0);
    }

    #[test]
    fn initial_state_contents() {
        let pulse = Pulse::new(0.2, 0.0, 0.0).unwrap();
        // odd n so that ω₀ is a grid point
        let grid = make_grid(0.0, 5.0, 101).unwrap();
        let init = initial_states(&pulse, &grid);
        assert_eq!(init.one.a_g, ZERO);
        assert_eq!(init.one.a_e, ZERO);
        assert_eq!(init.two.z_g, ZERO);
        assert_eq!(init.two.z_e, ZERO);
        assert!(init.two.x_g.iter().chain(&init.two.x_e).all(|z| *z == ZERO));
        assert!((init.one.norm(&grid) - 1.0).abs() < 1e-14);
        assert!((init.two.norm(&grid) - 1.0).abs() < 1e-14);

        let peak = init.two.phi[[50, 50]].norm_sqr();
        let exact = 4.0 / (PI * 0.2).powi(2);
        assert!((peak / exact - 1.0).abs() < 2e-2, "{}", peak / exact);
    }

    #[test]
    fn rhs_one_examples() {
        let (params, pulse, grid) = small_setup(2.0);
        let zero = OneExcState::zeros(grid.len());
        let d = rhs_one(&params, &pulse, &grid, 0.5, &zero).unwrap();
        assert_eq!(d, zero);

        let d = rhs_one(&params, &pulse, &grid, pulse.t0, &zero).unwrap();
        let expected = MINUS_I * params.f() * pulse.drive(pulse.t0);
        assert!((d.a_g - expected).norm() < 1e-15);
        assert!(expected.norm() > 0.0);
        assert_eq!(d.a_e, ZERO);
        assert!(d.b.iter().all(|z| *z == ZERO));

        let p0 = SystemParams::new(0.0, 1.0, 0.8).unwrap();
        let mut s = OneExcState::zeros(grid.len());
        s.a_g = c(0.3, -0.1);
        s.a_e = c(-0.7, 0.4);
        let d = rhs_one(&p0, &pulse, &grid, 2.0, &s).unwrap();
        assert_eq!(d.a_e, MINUS_I * 0.8 * s.a_e);

        let bad = OneExcState::zeros(3);
        assert!(matches!(
            rhs_one(&params, &pulse, &grid, 0.0, &bad),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn rhs_two_before_arrival_is_zero() {
        let (params, pulse, grid) = small_setup(2.0);
        let n = grid.len();
        let mut one = OneExcState::zeros(n);
        one.a_g = c(1.0, 0.5);
        one.b = vec![c(0.2, 0.1); n];
        let d = rhs_two(&params, &pulse, &grid, 0.5, &one, &TwoExcState::zeros(n)).unwrap();
        assert_eq!(d, TwoExcState::zeros(n));
    }

    #[test]
    fn rhs_two_dimension_mismatch() {
        let (params, pulse, grid) = small_setup(2.0);
        let n = grid.len();
        let err = rhs_two(
            &params,
            &pulse,
            &grid,
            2.0,
            &OneExcState::zeros(n),
            &TwoExcState::zeros(n + 1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn observables_examples() {
        let grid = make_grid(0.0, 1.0, 5).unwrap();
        let mut two = TwoExcState::zeros(5);
        two.z_g = c(1.0, 0.0);
        let o = observables(&two, &grid);
        assert_eq!((o.n_c, o.p_a, o.p2, o.p1, o.norm), (2.0, 0.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn g_zero_keeps_atom_sector_empty() {
        let params = SystemParams::resonant(0.0).unwrap();
        let pulse = Pulse::new(0.5, 0.0, 0.0).unwrap();
        let grid = coverage_grid(&params, &pulse, 24).unwrap();
        let opts = EvolveOptions {
            snapshot_times: vec![3.0, 8.0],
            ..Default::default()
        };
        let traj = evolve(&params, &pulse, &grid, 8.0, &[1.0, 3.0, 8.0], &opts).unwrap();
        for s in &traj.snapshots {
            let two = s.two.as_ref().unwrap();
            assert_eq!(s.one.a_e, ZERO);
            assert!(two.x_e.iter().all(|z| *z == ZERO));
            assert_eq!(two.z_e, ZERO);
        }
        assert_eq!(traj.times, vec![1.0, 3.0, 8.0]);
    }

    #[test]
    fn excitation_number_bookkeeping() {
        let params = SystemParams::resonant(2.0).unwrap();
        let pulse = Pulse::new(1.0, 1.9, 0.5).unwrap();
        let grid = coverage_grid(&params, &pulse, 40).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| 0.6 * k as f64).collect();
        let traj = evolve(&params, &pulse, &grid, 6.0, &times, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.times, times);
        for o in &traj.observables {
            assert!((o.n_c + o.p_a + o.n_wg - 2.0 * o.norm).abs() < 1e-12);
        }
        assert!(traj.observables.iter().any(|o| o.p2 > 1e-4));
    }

    #[test]
    fn free_field_before_arrival() {
        // Before t0 every waveguide amplitude only picks up e^{-iωt}.
        let params = SystemParams::resonant(3.0).unwrap();
        let pulse = Pulse::new(0.4, 0.0, 2.0).unwrap();
        let grid = make_grid(0.0, 6.0, 20).unwrap();
        let opts = EvolveOptions {
            snapshot_times: vec![1.5],
            ..Default::default()
        };
        let traj = evolve(&params, &pulse, &grid, 2.5, &[], &opts).unwrap();
        let snap = traj.snapshot_at(1.5).unwrap();
        let init = initial_states(&pulse, &grid);
        for (k, &w) in grid.points().iter().enumerate() {
            let exact = init.one.b[k] * C64::new(0.0, -w * 1.5).exp();
            assert!((snap.one.b[k] - exact).norm() < 1e-8 * init.one.b[k].norm().max(1.0));
        }
        assert_eq!(snap.one.a_g, ZERO);
    }

    #[test]
    fn rejects_bad_run_requests() {
        let (params, pulse, grid) = small_setup(1.0);
        let opts = EvolveOptions::default();
        assert!(evolve(&params, &pulse, &grid, 0.5, &[], &opts).unwrap_err().is_config());
        assert!(evolve(&params, &pulse, &grid, 3.0, &[4.0], &opts).unwrap_err().is_config());
    }

    proptest! {
        #[test]
        fn rhs_two_preserves_symmetry(
            seed in proptest::collection::vec(-1.0f64..1.0, 2 * (6 * 7 / 2) + 4 * 6 + 4 + 2 * 8),
            g in 0.0f64..5.0,
            t in 0.0f64..5.0,
        ) {
            let n = 6;
            let params = SystemParams::resonant(g).unwrap();
            let pulse = Pulse::new(0.5, 0.3, 0.0).unwrap();
            let grid = make_grid(0.2, 3.0, n).unwrap();
            let mut it = seed.chunks(2).map(|p| c(p[0], p[1]));
            let mut two = TwoExcState::zeros(n);
            for j in 0..n {
                for k in j..n {
                    let v = it.next().unwrap();
                    two.phi[[j, k]] = v;
                    two.phi[[k, j]] = v;
                }
            }
            for k in 0..n {
                two.x_g[k] = it.next().unwrap();
                two.x_e[k] = it.next().unwrap();
            }
            two.z_g = it.next().unwrap();
            two.z_e = it.next().unwrap();
            let mut one = OneExcState::zeros(n);
            one.a_g = it.next().unwrap();
            one.a_e = it.next().unwrap();
            for k in 0..n {
                one.b[k] = it.next().unwrap_or(c(0.1, 0.0));
            }
            let d = rhs_two(&params, &pulse, &grid, t, &one, &two).unwrap();
            prop_assert_eq!(d.max_asymmetry(), 0.0);
        }
    }
}
