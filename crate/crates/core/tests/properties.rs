use jcsim_core::analytic::two_exc_transient;
use jcsim_core::dynamics::coverage_grid;
use jcsim_core::spectrum::spectrum_scan;
use jcsim_core::validation::resonant_setup;
use jcsim_core::{evolve, EvolveOptions, FrequencyGrid};

fn tight() -> EvolveOptions {
    EvolveOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..Default::default()
    }
}

#[test]
fn refining_the_grid_converges_at_least_quadratically() {
    let (params, pulse) = resonant_setup(2.0, 0.5).unwrap();
    let p1: Vec<f64> = [65, 129, 257]
        .iter()
        .map(|&n| {
            let grid = FrequencyGrid::new(0.0, 8.0, n).unwrap();
            evolve(&params, &pulse, &grid, 6.0, &[6.0], &tight()).unwrap().observables[0].p1
        })
        .collect();
    // nested grids: halving dω must shrink the change by about 4 or more
    let d1 = (p1[1] - p1[0]).abs();
    let d2 = (p1[2] - p1[1]).abs();
    assert!(d1 / d2 > 3.5, "{p1:?}");
}

#[test]
fn symmetry_and_closed_form_hold_along_the_run() {
    let (params, pulse) = resonant_setup(2.0, 0.5).unwrap();
    let pulse = pulse.arriving_at(0.8).unwrap();
    let grid = coverage_grid(&params, &pulse, 40).unwrap();
    let times = vec![0.5, 1.0, 2.5, 5.0, 8.0];
    let opts = EvolveOptions {
        snapshot_times: times.clone(),
        ..tight()
    };
    let traj = evolve(&params, &pulse, &grid, 8.0, &times, &opts).unwrap();
    for s in &traj.snapshots {
        let two = s.two.as_ref().unwrap();
        let peak = two.phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(two.max_asymmetry() < 1e-10 * peak, "t = {}", s.t);
        let cf = two_exc_transient(&params, &traj.pulse, &grid, s.t).unwrap();
        let dev = cf
            .phi
            .iter()
            .zip(two.phi.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-6 * peak, "t = {}: {dev:e}", s.t);
        assert!((cf.z_g - two.z_g).norm() < 1e-7 && (cf.z_e - two.z_e).norm() < 1e-7);
    }
}

#[test]
fn empty_cavity_pair_regains_its_shape() {
    // The drive envelope decays as e^{−γ₀t/2}; with γ₀ = 0.2 the leftover
    // tail is below 1e-3 of the peak only after t ≈ 90.
    let (params, pulse) = resonant_setup(0.0, 0.2).unwrap();
    let grid = coverage_grid(&params, &pulse, 64).unwrap();
    let t_end = 100.0;
    let opts = EvolveOptions {
        snapshot_times: vec![t_end],
        ..Default::default()
    };
    let traj = evolve(&params, &pulse, &grid, t_end, &[t_end], &opts).unwrap();
    let o = traj.observables[0];
    assert!(o.p1 < 1e-3 && o.p2 < 1e-3, "{o:?}");

    let two = traj.snapshot_at(t_end).unwrap().two.as_ref().unwrap();
    let w = grid.points();
    let input = |j: usize, k: usize| (traj.pulse.sdf(w[j]) * traj.pulse.sdf(w[k])).norm_sqr();
    let peak = (0..w.len()).map(|j| input(j, j)).fold(0.0, f64::max);
    let dev = two
        .phi
        .indexed_iter()
        .map(|((j, k), z)| (z.norm_sqr() - input(j, k)).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-3 * peak, "{}", dev / peak);
}

#[test]
fn photon_blockade_at_narrow_bandwidth() {
    let peak_p2 = |g: f64| {
        let (params, pulse) = resonant_setup(g, 0.2).unwrap();
        let grid = coverage_grid(&params, &pulse, 64).unwrap();
        let times: Vec<f64> = (0..=200).map(|k| 0.2 * k as f64).collect();
        let traj = evolve(&params, &pulse, &grid, 40.0, &times, &EvolveOptions::default()).unwrap();
        traj.observables.iter().map(|o| o.p2).fold(0.0, f64::max)
    };
    let (free, coupled) = (peak_p2(0.0), peak_p2(5.0));
    assert!(coupled < free / 3.0, "{coupled} vs {free}");
}

#[test]
fn spectral_deformation_peaks_at_a_resonance() {
    let (params, pulse) = resonant_setup(2.0, 0.2).unwrap();
    let omegas: Vec<f64> = (0..=120).map(|k| -6.0 + 0.1 * k as f64).collect();
    let scan = spectrum_scan(&params, &pulse, &omegas, 5.0, 100, 0.2).unwrap();
    let (i, _) = scan
        .deformation
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let r = params.resonances();
    let best = omegas[i];
    assert!(
        (best - r.e1_plus.re).abs() <= 1.0 || (best - r.e1_minus.re).abs() <= 1.0,
        "strongest deformation at {best}"
    );
    assert_eq!(scan.s_out.dim(), (omegas.len(), 100));
}
