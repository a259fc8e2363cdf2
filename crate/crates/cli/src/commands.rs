use std::path::PathBuf;

use jcsim_core::analytic::ScatteredSdf;
use jcsim_core::entanglement::schmidt_sdf;
use jcsim_core::spectrum::spectrum_scan;
use jcsim_core::validation::{oracle_checks, spectral_dip, CriterionReport, Relation, Suite};
use jcsim_core::{evolve, output_spectrum, scattered_pair_sdf, PhotonCount};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, num, write_json, Table};

const VARPI: (&str, &str) = ("varpi", "(omega - omega0)/gamma0");
const OMEGA: (&str, &str) = ("omega_kappa", "omega/kappa, detuning from the cavity frequency");

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: PathBuf,
    /// Overrides `run.snapshot_times`.
    pub snapshot_times: Option<Vec<f64>>,
    pub quiet: bool,
}

impl Options {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn say_written(opts: &Options, paths: &[PathBuf]) {
    for p in paths {
        opts.say(format!("wrote {}", p.display()));
    }
}

fn owned(cols: &[(String, String)]) -> Vec<(&str, &str)> {
    cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
}

/// Snapshot file name, e.g. `snapshot_t12.5.csv`.
fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{}.csv", num(t))
}

#[derive(Serialize)]
struct EvolveSummary {
    t_end: f64,
    final_observables: ObsRecord,
    peak_p2: f64,
    max_norm_deviation: f64,
    steps_accepted: usize,
    steps_rejected: usize,
    rhs_evaluations: usize,
}

#[derive(Serialize)]
struct ObsRecord {
    n_c: f64,
    p_a: f64,
    p1: f64,
    p2: f64,
    n_wg: f64,
    norm: f64,
}

/// Time series of the populations and optional state snapshots.
pub fn run_evolve(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.params();
    let pulse = cfg.pulse();
    let grid = cfg.grid();
    let mut evo = cfg.evolve_options();
    if let Some(ts) = &opts.snapshot_times {
        evo.snapshot_times = ts.clone();
    }
    let times = cfg.output_times();
    let traj = evolve(&params, &pulse, &grid, cfg.run.t_end, &times, &evo)?;
    ensure_dir(&opts.out)?;
    let mut written = Vec::new();

    let mut table = Table::create(
        &opts.out,
        "evolve_timeseries.csv",
        "evolve: populations of the JC system and the waveguide",
        &[
            ("t_kappa", "time t*kappa"),
            ("N_c", "mean cavity photon number"),
            ("P_a", "atomic excited-state population"),
            ("p1", "probability of one excitation in the JC system"),
            ("p2", "probability of two excitations in the JC system"),
            ("n_wg", "mean photon number in the waveguide"),
            ("norm", "discrete norm of the state"),
        ],
        Some(cfg),
    )?;
    for (t, o) in traj.times.iter().zip(&traj.observables) {
        table.row(&[*t, o.n_c, o.p_a, o.p1, o.p2, o.n_wg, o.norm])?;
    }
    written.push(table.finish()?);

    let w = grid.points();
    let varpi = |x: f64| (x - pulse.omega0) / pulse.gamma0;
    for snap in &traj.snapshots {
        let name = snapshot_name(snap.t);
        match &snap.two {
            Some(two) => {
                let title = format!(
                    "evolve: two-photon SDF Phi(omega_j, omega_k) at t*kappa = {}; \
                     z_g = {} {}i, z_e = {} {}i",
                    num(snap.t),
                    num(two.z_g.re),
                    num(two.z_g.im),
                    num(two.z_e.re),
                    num(two.z_e.im)
                );
                let mut t = Table::create(
                    &opts.out,
                    &name,
                    &title,
                    &[
                        ("varpi_j", "(omega_j - omega0)/gamma0"),
                        ("varpi_k", "(omega_k - omega0)/gamma0"),
                        ("omega_j_kappa", "omega_j/kappa"),
                        ("omega_k_kappa", "omega_k/kappa"),
                        ("phi_re", "Re Phi"),
                        ("phi_im", "Im Phi"),
                        ("jps", "two-photon joint spectrum |Phi|^2"),
                    ],
                    Some(cfg),
                )?;
                for ((j, k), z) in two.phi.indexed_iter() {
                    t.row(&[varpi(w[j]), varpi(w[k]), w[j], w[k], z.re, z.im, z.norm_sqr()])?;
                }
                written.push(t.finish()?);
            }
            None => {
                let one = &snap.one;
                let title = format!(
                    "evolve: single-photon SDF B(omega_k) at t*kappa = {}; \
                     A^g = {} {}i, A^e = {} {}i",
                    num(snap.t),
                    num(one.a_g.re),
                    num(one.a_g.im),
                    num(one.a_e.re),
                    num(one.a_e.im)
                );
                let mut t = Table::create(
                    &opts.out,
                    &name,
                    &title,
                    &[
                        VARPI,
                        OMEGA,
                        ("b_re", "Re B"),
                        ("b_im", "Im B"),
                        ("abs2", "|B|^2"),
                    ],
                    Some(cfg),
                )?;
                for (k, z) in one.b.iter().enumerate() {
                    t.row(&[varpi(w[k]), w[k], z.re, z.im, z.norm_sqr()])?;
                }
                written.push(t.finish()?);
            }
        }
    }

    let last = traj.observables.last().copied().unwrap_or_default();
    let summary = EvolveSummary {
        t_end: cfg.run.t_end,
        final_observables: ObsRecord {
            n_c: last.n_c,
            p_a: last.p_a,
            p1: last.p1,
            p2: last.p2,
            n_wg: last.n_wg,
            norm: last.norm,
        },
        peak_p2: traj.observables.iter().map(|o| o.p2).fold(0.0, f64::max),
        max_norm_deviation: traj
            .observables
            .iter()
            .map(|o| (o.norm - 1.0).abs())
            .fold(0.0, f64::max),
        steps_accepted: traj.stats.accepted,
        steps_rejected: traj.stats.rejected,
        rhs_evaluations: traj.stats.rhs_evals,
    };
    written.push(write_json(&opts.out, "evolve_summary.json", Some(cfg), &summary)?);

    opts.say(format!(
        "t = {}: N_c = {:.6e}, P_a = {:.6e}, p1 = {:.6e}, p2 = {:.6e}, norm = {:.9}",
        cfg.run.t_end, last.n_c, last.p_a, last.p1, last.p2, last.norm
    ));
    say_written(opts, &written);
    Ok(written)
}

fn pair_sdf(cfg: &RunConfig, what: &str) -> Result<ScatteredSdf, CliError> {
    let pulse = cfg.pulse();
    if pulse.photons != PhotonCount::Two {
        return Err(CliError::Config(format!(
            "{what} analyses the scattered photon pair; set pulse.photons = 2"
        )));
    }
    let grid = cfg.grid();
    let pulse = pulse.normalized_on(&grid);
    Ok(scattered_pair_sdf(&cfg.params(), &pulse, &grid, cfg.analysis.gamma_reg)?)
}

#[derive(Serialize)]
struct SpectrumSummary {
    integral_s_in: f64,
    integral_s_out: f64,
    integral_s_inel: f64,
    integral_s_el_in: f64,
    /// Input photon number outside the grid.
    tail_estimate: f64,
    min_s_el_in: f64,
    /// `S^in − S^out` at the local minimum of `S^out` nearest `ω₀`.
    dip_depth: Option<f64>,
    dip_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<ScanSummary>,
}

#[derive(Serialize)]
struct ScanSummary {
    omega0: Vec<f64>,
    /// `max_ω |S^out − S^in|` per carrier.
    deformation: Vec<f64>,
    strongest_omega0: f64,
}

/// One-photon spectra of the scattered pair, and optionally a carrier sweep.
pub fn run_spectrum(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let sdf = pair_sdf(cfg, "spectrum")?;
    let spec = output_spectrum(&sdf);
    ensure_dir(&opts.out)?;
    let mut written = Vec::new();

    let (w0, g0) = (cfg.pulse.omega0, cfg.pulse.gamma0);
    let mut t = Table::create(
        &opts.out,
        "spectrum.csv",
        "spectrum: one-photon spectra of the input and scattered pair",
        &[
            VARPI,
            OMEGA,
            ("S_in", "input spectrum 2|xi|^2"),
            ("S_out", "scattered spectrum"),
            ("S_inel", "inelastic part"),
            ("S_el_in", "elastic-inelastic interference"),
        ],
        Some(cfg),
    )?;
    for (k, &w) in spec.grid.points().iter().enumerate() {
        t.row(&[
            (w - w0) / g0,
            w,
            spec.s_in[k],
            spec.s_out[k],
            spec.s_inel[k],
            spec.s_el_in[k],
        ])?;
    }
    written.push(t.finish()?);

    let scan = match cfg.scan_omegas() {
        None => None,
        Some(omegas) => {
            let grid = cfg.grid();
            let sc = spectrum_scan(
                &cfg.params(),
                &cfg.pulse(),
                &omegas,
                grid.span(),
                grid.len(),
                cfg.analysis.gamma_reg,
            )?;
            let mut t = Table::create(
                &opts.out,
                "spectrum_scan.csv",
                "spectrum: scattered spectrum against the carrier frequency (grid moves with omega0)",
                &[
                    ("omega0_kappa", "carrier frequency omega0/kappa"),
                    VARPI,
                    OMEGA,
                    ("S_out", "scattered spectrum"),
                ],
                Some(cfg),
            )?;
            for (i, &c) in sc.omega0.iter().enumerate() {
                for (k, &d) in sc.offsets.iter().enumerate() {
                    t.row(&[c, d / g0, c + d, sc.s_out[[i, k]]])?;
                }
            }
            written.push(t.finish()?);
            let best = sc
                .deformation
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| sc.omega0[i])
                .unwrap_or(f64::NAN);
            Some(ScanSummary {
                omega0: sc.omega0,
                deformation: sc.deformation,
                strongest_omega0: best,
            })
        }
    };

    let dip = spectral_dip(&spec, w0, g0);
    let summary = SpectrumSummary {
        integral_s_in: spec.integrals.s_in,
        integral_s_out: spec.integrals.s_out,
        integral_s_inel: spec.integrals.s_inel,
        integral_s_el_in: spec.integrals.s_el_in,
        tail_estimate: spec.tail_estimate,
        min_s_el_in: spec.s_el_in.iter().copied().fold(f64::INFINITY, f64::min),
        dip_depth: dip.map(|d| d.1),
        dip_omega: dip.map(|d| spec.grid.point(d.0)),
        scan,
    };
    written.push(write_json(&opts.out, "spectrum_summary.json", Some(cfg), &summary)?);

    opts.say(format!(
        "integral S_out = {:.6} (S_in {:.6}, tail estimate {:.3e})",
        summary.integral_s_out, summary.integral_s_in, summary.tail_estimate
    ));
    say_written(opts, &written);
    Ok(written)
}

#[derive(Serialize)]
struct SchmidtSummary {
    lambdas: Vec<f64>,
    entropy_bits: f64,
    /// Two-photon norm of the scattered SDF on the grid.
    trace: f64,
}

/// Schmidt coefficients, mode functions and entropy of the scattered pair.
pub fn run_schmidt(cfg: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let sdf = pair_sdf(cfg, "schmidt")?;
    let res = schmidt_sdf(&sdf, cfg.analysis.n_modes)?;
    ensure_dir(&opts.out)?;
    let mut written = Vec::new();

    let mut t = Table::create(
        &opts.out,
        "schmidt_lambdas.csv",
        "schmidt: Schmidt coefficients, descending, summing to 1",
        &[("j", "mode index from 1"), ("lambda", "Schmidt coefficient")],
        Some(cfg),
    )?;
    for (j, l) in res.lambdas.iter().enumerate() {
        t.row(&[(j + 1) as f64, *l])?;
    }
    written.push(t.finish()?);

    let m = res.modes.ncols();
    let mut cols = vec![
        (VARPI.0.to_string(), VARPI.1.to_string()),
        (OMEGA.0.to_string(), OMEGA.1.to_string()),
    ];
    for j in 1..=m {
        cols.push((format!("phi{j}_re"), format!("Re of Schmidt mode {j}")));
        cols.push((format!("phi{j}_im"), format!("Im of Schmidt mode {j}")));
    }
    let mut t = Table::create(
        &opts.out,
        "schmidt_modes.csv",
        "schmidt: mode functions, sum_k |phi_jk|^2 domega = 1",
        &owned(&cols),
        Some(cfg),
    )?;
    let (w0, g0) = (cfg.pulse.omega0, cfg.pulse.gamma0);
    let mut row = Vec::with_capacity(2 + 2 * m);
    for (k, &w) in res.grid.points().iter().enumerate() {
        row.clear();
        row.push((w - w0) / g0);
        row.push(w);
        for j in 0..m {
            row.push(res.modes[[k, j]].re);
            row.push(res.modes[[k, j]].im);
        }
        t.row(&row)?;
    }
    written.push(t.finish()?);

    let summary = SchmidtSummary {
        lambdas: res.lambdas[..m].to_vec(),
        entropy_bits: res.entropy,
        trace: res.trace,
    };
    written.push(write_json(&opts.out, "schmidt_summary.json", Some(cfg), &summary)?);

    for (j, l) in summary.lambdas.iter().enumerate() {
        opts.say(format!("lambda_{} = {l:.6}", j + 1));
    }
    opts.say(format!("S_vN = {:.6} bits", res.entropy));
    say_written(opts, &written);
    Ok(written)
}

#[derive(Serialize)]
struct CheckRecord {
    label: String,
    value: f64,
    threshold: f64,
    relation: &'static str,
    passed: bool,
}

#[derive(Serialize)]
struct CriterionRecord {
    id: u8,
    title: &'static str,
    passed: bool,
    seconds: f64,
    checks: Vec<CheckRecord>,
}

impl From<&CriterionReport> for CriterionRecord {
    fn from(r: &CriterionReport) -> Self {
        Self {
            id: r.id,
            title: r.title,
            passed: r.passed(),
            seconds: r.seconds,
            checks: r
                .checks
                .iter()
                .map(|c| CheckRecord {
                    label: c.label.clone(),
                    value: c.value,
                    threshold: c.threshold,
                    relation: match c.relation {
                        Relation::Below => "below",
                        Relation::Above => "above",
                    },
                    passed: c.passed(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ValidateSummary {
    passed: bool,
    criteria: Vec<CriterionRecord>,
}

/// Number of sampled times in the configured-system oracle.
const ORACLE_SAMPLES: usize = 10;

/// Runs the acceptance suite (all criteria, or the listed ones) and, with a
/// configuration, the closed-form oracles for the configured system.
pub fn run_validate(
    cfg: Option<&RunConfig>,
    criteria: Option<&[u8]>,
    opts: &Options,
) -> Result<Vec<PathBuf>, CliError> {
    let mut reports = Vec::new();
    if let Some(cfg) = cfg {
        let mut evo = cfg.evolve_options();
        evo.rtol = evo.rtol.min(1e-10);
        evo.atol = evo.atol.min(1e-12);
        let r = oracle_checks(
            &cfg.params(),
            &cfg.pulse(),
            &cfg.grid(),
            cfg.run.t_end,
            ORACLE_SAMPLES,
            &evo,
        )?;
        opts.say(r.render());
        reports.push(r);
    }
    let ids: Vec<u8> = match criteria {
        Some(ids) => ids.to_vec(),
        None => (1..=9).collect(),
    };
    let mut suite = Suite::new();
    for id in ids {
        let r = suite.criterion(id)?;
        opts.say(r.render());
        reports.push(r);
    }

    let failed = reports.iter().filter(|r| !r.passed()).count();
    ensure_dir(&opts.out)?;
    let summary = ValidateSummary {
        passed: failed == 0,
        criteria: reports.iter().map(CriterionRecord::from).collect(),
    };
    let path = write_json(&opts.out, "validate_summary.json", cfg, &summary)?;
    opts.say(format!(
        "{} of {} passed",
        reports.len() - failed,
        reports.len()
    ));
    say_written(opts, std::slice::from_ref(&path));
    if failed > 0 {
        return Err(CliError::ValidationFailed(failed));
    }
    Ok(vec![path])
}
