use std::path::Path;
use std::process::{Command, Output};

use jcsim::{parse_config, CliError};
use jcsim_core::{single_photon_resonances, SystemParams};

fn jcsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("jcsim runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const MINIMAL: &str = "[system]\ng = 2\n[pulse]\ngamma0 = 0.2\nomega0 = \"E1+\"\n";

#[test]
fn minimal_config_gets_documented_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.units, "kappa=1");
    assert_eq!(cfg.system.delta_a, 0.0);
    assert_eq!(cfg.grid.n, 100);
    assert!((cfg.grid.span - 25.0 * 0.2).abs() < 1e-15);
    assert_eq!(cfg.grid.center, cfg.pulse.omega0);
    assert_eq!(cfg.run.t_end, 60.0);
    assert_eq!(cfg.pulse.photons, 2);
    assert_eq!(cfg.analysis.gamma_reg, 0.2);
    assert_eq!(cfg.analysis.n_modes, 5);
}

#[test]
fn named_carrier_resolves_to_the_resonance() {
    let cfg = parse_config(MINIMAL).unwrap();
    let (plus, _) = single_photon_resonances(&SystemParams::resonant(2.0).unwrap());
    assert_eq!(cfg.pulse.omega0, plus.re);
    // resonant case: E± = −iκ/4 ± sqrt(g² − κ²/16)
    assert!((cfg.pulse.omega0 - (4.0f64 - 1.0 / 16.0).sqrt()).abs() < 1e-12);

    let minus = parse_config(&MINIMAL.replace("E1+", "E1-")).unwrap();
    assert!((minus.pulse.omega0 + cfg.pulse.omega0).abs() < 1e-12);
}

#[test]
fn negative_coupling_is_rejected_verbatim() {
    let err = parse_config(&MINIMAL.replace("g = 2", "g = -1")).unwrap_err();
    assert_eq!(err.to_string(), "g must be ≥ 0");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn config_errors_name_the_key() {
    let cases = [
        (format!("units = \"kappa=2\"\n{MINIMAL}"), "units"),
        (MINIMAL.replace("gamma0 = 0.2\n", ""), "gamma0"),
        (format!("{MINIMAL}[grid]\nwidth = 3\n"), "width"),
        (MINIMAL.replace("E1+", "E3"), "pulse.omega0"),
        (format!("{MINIMAL}[grid]\nspan = 1\nspan_in_gamma0 = 5\n"), "span_in_gamma0"),
        (format!("{MINIMAL}[run]\nt_end = 5\nsnapshot_times = [6]\n"), "run.snapshot_times"),
        (format!("{MINIMAL}[analysis]\nn_modes = 0\n"), "analysis.n_modes"),
    ];
    for (text, key) in cases {
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{key}: {err}");
        assert!(err.to_string().contains(key), "{key}: {err}");
    }
}

#[test]
fn coverage_span_covers_both_resonances() {
    let cfg = parse_config(&format!("{MINIMAL}[grid]\nspan = \"coverage\"\n")).unwrap();
    let lo = cfg.grid.center - cfg.grid.span;
    let hi = cfg.grid.center + cfg.grid.span;
    assert!(lo <= -7.0 + 1e-9 && hi >= 7.0 - 1e-9, "[{lo}, {hi}]");
}

#[test]
fn bad_input_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.toml", &MINIMAL.replace("g = 2", "g = -1"));
    let out = jcsim(&["schmidt", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g must be ≥ 0"));

    let out = jcsim(&["evolve", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    write(dir.path(), "one.toml", &format!("{MINIMAL}photons = 1\n"));
    let out = jcsim(&["spectrum", "--config", "one.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_3() {
    // g = κ/4 at zero detuning is the exceptional point of the
    // one-excitation block, where the closed form is undefined.
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "ep.toml",
        "[system]\ng = 0.25\n[pulse]\ngamma0 = 0.5\nomega0 = 0\n[grid]\nn = 16\n[run]\nt_end = 2\n",
    );
    let out = jcsim(&["validate", "--config", "ep.toml", "--criteria", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_cavity_schmidt_report() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "g0.toml",
        "[system]\ng = 0\n[pulse]\ngamma0 = 0.2\nomega0 = 0\n",
    );
    let out = jcsim(&["schmidt", "--config", "g0.toml", "--out", "o"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("lambda_1 = 1.000000"), "{stdout}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/schmidt_summary.json")).unwrap())
            .unwrap();
    assert!(summary["entropy_bits"].as_f64().unwrap() < 1e-3);
    assert_eq!(summary["lambdas"].as_array().unwrap().len(), 5);
}

#[test]
fn evolve_table_has_time_and_population_columns() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "ev.toml",
        "[system]\ng = 5\n[pulse]\ngamma0 = 1\nomega0 = \"E1+\"\n[grid]\nn = 24\nspan = \"coverage\"\n\
         [run]\nt_end = 4\noutput_dt = 0.5\n",
    );
    let out = jcsim(
        &["evolve", "--config", "ev.toml", "--out", "o", "--snapshot-times", "1,2", "--quiet"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(dir.path().join("o/evolve_timeseries.csv")).unwrap();
    assert!(text.starts_with("# jcsim "));
    assert!(text.contains("#   g = 5.0"));
    let mut rows = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(rows.next().unwrap(), "t_kappa,N_c,P_a,p1,p2,n_wg,norm");
    assert_eq!(rows.count(), 9);

    let snap = std::fs::read_to_string(dir.path().join("o/snapshot_t1.csv")).unwrap();
    let data: Vec<&str> = snap.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "varpi_j,varpi_k,omega_j_kappa,omega_k_kappa,phi_re,phi_im,jps");
    assert_eq!(data.len(), 1 + 24 * 24);
    assert!(dir.path().join("o/snapshot_t2.csv").exists());
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.toml",
        "[system]\ng = 2\n[pulse]\ngamma0 = 0.5\nomega0 = \"E1+\"\n[grid]\nn = 32\n\
         [run]\nt_end = 3\nsnapshot_times = [3]\n\
         [analysis]\nomega0_scan = { from = -1, to = 1, n = 3, unit = \"g\" }\n",
    );
    for sub in ["evolve", "spectrum", "schmidt"] {
        for out in ["a", "b"] {
            let r = jcsim(&[sub, "--config", "c.toml", "--out", out, "--quiet"], dir.path());
            assert!(r.status.success(), "{sub}: {}", String::from_utf8_lossy(&r.stderr));
        }
    }
    let a = read_all(&dir.path().join("a"));
    let b = read_all(&dir.path().join("b"));
    assert_eq!(a.len(), 9);
    assert_eq!(a, b);
}
