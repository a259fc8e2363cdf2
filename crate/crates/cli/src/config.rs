//! TOML run configuration.
//!
//! ```toml
//! units = "kappa=1"            # optional; no other value is accepted
//!
//! [system]
//! g = 2.0
//! delta_a = 0.0               # default 0
//!
//! [pulse]
//! gamma0 = 0.2
//! omega0 = "E1+"              # number, "E1+" or "E1-"
//! t0 = 0.0                    # default 0
//! photons = 2                 # default 2
//!
//! [grid]                      # default: 100 points over omega0 ± 25 gamma0
//! n = 100
//! span_in_gamma0 = 25.0       # or span = 5.0 (half-width) or span = "coverage"
//! center = "omega0"           # or a number
//!
//! [run]
//! t_end = 60.0
//! output_dt = 0.1             # or output_times = [...]
//! snapshot_times = [10.0, 30.0]
//! rtol = 1e-8
//! atol = 1e-10
//! max_step = 0.5              # default unlimited
//!
//! [analysis]
//! gamma_reg = "gamma0"        # or a number
//! n_modes = 5
//! omega0_scan = { from = -3.0, to = 3.0, n = 61, unit = "g" }   # unit "kappa" or "g"
//! ```

use std::path::Path;

use jcsim_core::dynamics::{coverage_window, EvolveOptions};
use jcsim_core::{FrequencyGrid, PhotonCount, Pulse, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_N: usize = 100;
pub const DEFAULT_SPAN_IN_GAMMA0: f64 = 25.0;
pub const DEFAULT_T_END: f64 = 60.0;
pub const DEFAULT_OUTPUT_DT: f64 = 0.1;
pub const DEFAULT_N_MODES: usize = 5;

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrName {
    Num(f64),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    units: Option<String>,
    system: RawSystem,
    pulse: RawPulse,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    analysis: RawAnalysis,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    g: f64,
    #[serde(default)]
    delta_a: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    gamma0: f64,
    omega0: NumOrName,
    #[serde(default)]
    t0: f64,
    photons: Option<u32>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    span: Option<NumOrName>,
    span_in_gamma0: Option<f64>,
    center: Option<NumOrName>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    t_end: Option<f64>,
    output_dt: Option<f64>,
    output_times: Option<Vec<f64>>,
    snapshot_times: Option<Vec<f64>>,
    rtol: Option<f64>,
    atol: Option<f64>,
    max_step: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    gamma_reg: Option<NumOrName>,
    n_modes: Option<usize>,
    omega0_scan: Option<RawScan>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    from: f64,
    to: f64,
    n: usize,
    unit: Option<String>,
}

/// Fully resolved configuration. Every field is explicit, so serialising it
/// reproduces the run exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub units: String,
    pub system: SystemSection,
    pub pulse: PulseSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub analysis: AnalysisSection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSection {
    pub g: f64,
    pub delta_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSection {
    pub gamma0: f64,
    pub omega0: f64,
    /// The resonance name `omega0` was resolved from, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0_from: Option<String>,
    pub t0: f64,
    pub photons: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSection {
    pub n: usize,
    pub center: f64,
    /// Half-width.
    pub span: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSection {
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_times: Option<Vec<f64>>,
    pub snapshot_times: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// `None` leaves the step unbounded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisSection {
    pub gamma_reg: f64,
    pub n_modes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0_scan: Option<ScanSection>,
}

/// Carrier sweep in units of `κ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSection {
    pub from: f64,
    pub to: f64,
    pub n: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve_resonance(key: &str, name: &str, params: &SystemParams) -> Result<f64, CliError> {
    let res = params.resonances();
    match name {
        "E1+" => Ok(res.e1_plus.re),
        "E1-" => Ok(res.e1_minus.re),
        other => Err(config_err(format!(
            "{key}: unknown value {other:?}; expected a number, \"E1+\" or \"E1-\""
        ))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(format!("{key} must be a positive number, got {v}")))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;

    let units = raw.units.unwrap_or_else(|| "kappa=1".into());
    if units.replace(' ', "") != "kappa=1" {
        return Err(config_err(format!(
            "units: only \"kappa=1\" is supported, got {units:?}"
        )));
    }

    let params = SystemParams::new(raw.system.g, 1.0, raw.system.delta_a)?;

    let (omega0, omega0_from) = match raw.pulse.omega0 {
        NumOrName::Num(w) => (w, None),
        NumOrName::Name(name) => (resolve_resonance("pulse.omega0", &name, &params)?, Some(name)),
    };
    let photons = raw.pulse.photons.unwrap_or(2);
    PhotonCount::try_from(photons)?;
    let pulse = Pulse::new(raw.pulse.gamma0, omega0, raw.pulse.t0)?;

    let g = &raw.grid;
    let n = g.n.unwrap_or(DEFAULT_N);
    let (center, span) = match (&g.span, g.span_in_gamma0) {
        (Some(_), Some(_)) => {
            return Err(config_err(
                "grid: give either span or span_in_gamma0, not both",
            ))
        }
        (Some(NumOrName::Name(s)), None) if s == "coverage" => {
            if g.center.is_some() {
                return Err(config_err("grid.center cannot be combined with span = \"coverage\""));
            }
            let (lo, hi) = coverage_window(&params, &pulse);
            (0.5 * (lo + hi), 0.5 * (hi - lo))
        }
        (Some(NumOrName::Name(s)), None) => {
            return Err(config_err(format!(
                "grid.span: unknown value {s:?}; expected a number or \"coverage\""
            )))
        }
        (Some(NumOrName::Num(s)), None) => (0.0, positive("grid.span", *s)?),
        (None, k) => {
            let k = positive("grid.span_in_gamma0", k.unwrap_or(DEFAULT_SPAN_IN_GAMMA0))?;
            (0.0, k * pulse.gamma0)
        }
    };
    let center = match &g.center {
        None => {
            if matches!(&g.span, Some(NumOrName::Name(_))) {
                center
            } else {
                omega0
            }
        }
        Some(NumOrName::Num(c)) => *c,
        Some(NumOrName::Name(s)) if s == "omega0" => omega0,
        Some(NumOrName::Name(s)) => resolve_resonance("grid.center", s, &params)?,
    };
    FrequencyGrid::new(center, span, n)?;

    let r = &raw.run;
    let t_end = r.t_end.unwrap_or(DEFAULT_T_END);
    if !(t_end.is_finite() && t_end > pulse.t0) {
        return Err(config_err(format!(
            "run.t_end = {t_end} must exceed pulse.t0 = {}",
            pulse.t0
        )));
    }
    let (output_dt, output_times) = match (r.output_dt, &r.output_times) {
        (Some(_), Some(_)) => {
            return Err(config_err("run: give either output_dt or output_times, not both"))
        }
        (None, Some(ts)) => {
            check_times("run.output_times", ts, t_end)?;
            (None, Some(ts.clone()))
        }
        (dt, None) => (Some(positive("run.output_dt", dt.unwrap_or(DEFAULT_OUTPUT_DT))?), None),
    };
    let snapshot_times = r.snapshot_times.clone().unwrap_or_default();
    check_times("run.snapshot_times", &snapshot_times, t_end)?;
    let defaults = EvolveOptions::default();
    let rtol = positive("run.rtol", r.rtol.unwrap_or(defaults.rtol))?;
    let atol = positive("run.atol", r.atol.unwrap_or(defaults.atol))?;
    let max_step = r.max_step.map(|h| positive("run.max_step", h)).transpose()?;

    let a = &raw.analysis;
    let gamma_reg = match &a.gamma_reg {
        None => pulse.gamma0,
        Some(NumOrName::Name(s)) if s == "gamma0" => pulse.gamma0,
        Some(NumOrName::Name(s)) => {
            return Err(config_err(format!(
                "analysis.gamma_reg: unknown value {s:?}; expected a number or \"gamma0\""
            )))
        }
        Some(NumOrName::Num(v)) => positive("analysis.gamma_reg", *v)?,
    };
    let n_modes = a.n_modes.unwrap_or(DEFAULT_N_MODES);
    if n_modes == 0 {
        return Err(config_err("analysis.n_modes must be at least 1"));
    }
    let omega0_scan = match &a.omega0_scan {
        None => None,
        Some(s) => {
            let unit = match s.unit.as_deref().unwrap_or("kappa") {
                "kappa" => 1.0,
                "g" if params.g > 0.0 => params.g,
                "g" => return Err(config_err("analysis.omega0_scan: unit \"g\" needs g > 0")),
                other => {
                    return Err(config_err(format!(
                        "analysis.omega0_scan.unit: unknown unit {other:?}; expected \"kappa\" or \"g\""
                    )))
                }
            };
            if s.n == 0 || !(s.from.is_finite() && s.to.is_finite()) {
                return Err(config_err("analysis.omega0_scan needs finite bounds and n ≥ 1"));
            }
            Some(ScanSection {
                from: s.from * unit,
                to: s.to * unit,
                n: s.n,
            })
        }
    };

    Ok(RunConfig {
        units: "kappa=1".into(),
        system: SystemSection {
            g: params.g,
            delta_a: params.delta_a,
        },
        pulse: PulseSection {
            gamma0: pulse.gamma0,
            omega0,
            omega0_from,
            t0: pulse.t0,
            photons,
        },
        grid: GridSection { n, center, span },
        run: RunSection {
            t_end,
            output_dt,
            output_times,
            snapshot_times,
            rtol,
            atol,
            max_step,
        },
        analysis: AnalysisSection {
            gamma_reg,
            n_modes,
            omega0_scan,
        },
    })
}

fn check_times(key: &str, ts: &[f64], t_end: f64) -> Result<(), CliError> {
    match ts.iter().find(|t| !(t.is_finite() && **t >= 0.0 && **t <= t_end)) {
        Some(bad) => Err(config_err(format!("{key}: time {bad} outside [0, {t_end}]"))),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams::new(self.system.g, 1.0, self.system.delta_a).expect("validated on load")
    }

    pub fn pulse(&self) -> Pulse {
        let photons = PhotonCount::try_from(self.pulse.photons).expect("validated on load");
        Pulse::new(self.pulse.gamma0, self.pulse.omega0, self.pulse.t0)
            .expect("validated on load")
            .with_photons(photons)
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid::new(self.grid.center, self.grid.span, self.grid.n).expect("validated on load")
    }

    /// Explicit output times, or `0, dt, 2dt, …` up to and including `t_end`.
    pub fn output_times(&self) -> Vec<f64> {
        if let Some(ts) = &self.run.output_times {
            let mut v = ts.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            return v;
        }
        let dt = self.run.output_dt.unwrap_or(DEFAULT_OUTPUT_DT);
        let t_end = self.run.t_end;
        let m = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
        let mut v: Vec<f64> = (0..=m).map(|k| k as f64 * dt).collect();
        if t_end - v[m] > 1e-9 * t_end {
            v.push(t_end);
        }
        v
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let mut opts = EvolveOptions {
            rtol: self.run.rtol,
            atol: self.run.atol,
            snapshot_times: self.run.snapshot_times.clone(),
            ..Default::default()
        };
        if let Some(h) = self.run.max_step {
            opts.max_step = h;
        }
        opts
    }

    /// Carrier frequencies of the sweep, evenly spaced and inclusive.
    pub fn scan_omegas(&self) -> Option<Vec<f64>> {
        self.analysis.omega0_scan.as_ref().map(|s| {
            if s.n == 1 {
                return vec![s.from];
            }
            let step = (s.to - s.from) / (s.n - 1) as f64;
            (0..s.n).map(|k| s.from + step * k as f64).collect()
        })
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_times_include_the_end() {
        let cfg = parse_config(
            "[system]\ng = 1\n[pulse]\ngamma0 = 1\nomega0 = 0\n[run]\nt_end = 1.05\noutput_dt = 0.5",
        )
        .unwrap();
        assert_eq!(cfg.output_times(), vec![0.0, 0.5, 1.0, 1.05]);
    }

    #[test]
    fn scan_in_units_of_g() {
        let cfg = parse_config(
            "[system]\ng = 2\n[pulse]\ngamma0 = 0.2\nomega0 = 0\n\
             [analysis]\nomega0_scan = { from = -3, to = 3, n = 3, unit = \"g\" }",
        )
        .unwrap();
        assert_eq!(cfg.scan_omegas().unwrap(), vec![-6.0, 0.0, 6.0]);
    }
}
