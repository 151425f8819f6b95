use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use qhet_core::analytic::{self, PsdForm};
use qhet_core::experiments::sweep::{cross_method_disagreements, DEFAULT_MC_SAMPLES};
use qhet_core::experiments::{run_sweep, run_validation, Level, SweepSpec};
use qhet_core::scenario::load_scenario_file;
use qhet_core::spectral::{measure_nf_detailed, WelchConfig};
use qhet_core::synth::{self, TOOL_VERSION};
use qhet_core::{QhetError, Scenario, UnitSystem};
use serde_json::json;

use crate::{AnalyticArgs, Cli, Command, Failure, Form, Format, Quantity, SimulateArgs, SweepArgs, Units, ValidateArgs};

/// Exit code for a sweep stopped by an interrupt after flushing its
/// partial results.
const EXIT_INTERRUPTED: u8 = 130;

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Analytic(args) => cmd_analytic(cli, args),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Validate(args) => cmd_validate(cli, args),
    }
}

/// Scenario from --config (or `fallback`, or the built-in default), with the
/// unit-system flag and `KEY=VALUE` overrides applied.
fn load_base(cli: &Cli, fallback: Option<&Path>, sets: &[String]) -> Result<Scenario, Failure> {
    let base = match cli.config.as_deref().or(fallback) {
        Some(path) => load_scenario_file(path).map_err(|e| match e {
            QhetError::Io(msg) => Failure::config(format!("cannot read {}: {msg}", path.display())),
            other => other.into(),
        })?,
        None => Scenario::default(),
    };
    let mut b = base.to_builder();
    if let Some(u) = cli.unit_system {
        b = b.unit_system(match u {
            Units::Scaled => UnitSystem::Scaled,
            Units::Si => UnitSystem::Si,
        });
    }
    for kv in sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        b = b.set(k.trim(), v.trim())?;
    }
    Ok(b.build()?)
}

/// Nine decimals, without a sign on values that round to zero.
pub fn fixed9(v: f64) -> String {
    let s = format!("{v:.9}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Nine significant digits; fixed notation where that stays readable.
pub fn sig9(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0.00000000".into()
    } else if (1e-4..1e9).contains(&a) {
        let decimals = (8 - a.log10().floor() as i32).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

fn cmd_analytic(cli: &Cli, args: &AnalyticArgs) -> Result<u8, Failure> {
    let mut sets = args.set.clone();
    for (key, v) in [("q", args.q), ("r", args.r), ("theta_l", args.theta_l)] {
        if let Some(v) = v {
            sets.push(format!("{key}={v}"));
        }
    }
    let sc = load_base(cli, None, &sets)?;
    let omega = args.omega.unwrap_or(sc.derive().omega_beat);
    let form = match args.form {
        Form::Exact => PsdForm::Exact,
        Form::HighGain => PsdForm::HighGain,
    };
    let (name, value, in_db) = match args.quantity {
        Quantity::SnrIn => ("snr_in", analytic::snr_in(&sc), false),
        Quantity::SnrOut => ("snr_out", analytic::snr_out(&sc), false),
        Quantity::POut => ("p_out", analytic::output_power(&sc), false),
        Quantity::Beat => match args.t {
            Some(t) => ("beat", analytic::beat_signal(t, &sc), false),
            None => ("beat_amplitude", analytic::beat_amplitude(&sc), false),
        },
        Quantity::F => ("F", analytic::spectral_factor_f_strict(omega, &sc)?, false),
        Quantity::Chi => {
            let v = match (form, args.omega) {
                (PsdForm::Exact, None) => analytic::noise_psd_baseband(&sc),
                _ => analytic::PsdModel::new(sc.clone(), form).strict().evaluate(omega)?,
            };
            ("chi", v, false)
        }
        Quantity::Nf => ("nf_db", analytic::noise_figure(&sc)?.nf_db, true),
        Quantity::NfRegular => {
            let xi = args.xi.unwrap_or(sc.q());
            ("nf_regular_db", analytic::noise_figure_regular(xi)?, true)
        }
    };
    let text = if in_db { fixed9(value) } else { sig9(value) };
    match cli.format {
        Format::Csv => println!("{text}"),
        Format::Json => println!(
            "{}",
            json!({ "quantity": name, "value": value, "formatted": text, "scenario_digest": sc.digest() })
        ),
    }
    Ok(0)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<u8, Failure> {
    let spec = SweepSpec::parse_file(&args.sweep_file).map_err(|e| match e {
        QhetError::Io(msg) => Failure::config(format!("cannot read {}: {msg}", args.sweep_file.display())),
        other => other.into(),
    })?;
    let base = load_base(cli, spec.scenario_path.as_deref(), &[])?;

    let cancel = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&cancel);
    // A second handler cannot be installed (e.g. in tests); sweeps then
    // simply run to completion.
    let _ = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst));

    let report = run_sweep(&spec, &base, &cancel)?;
    let csv = report.to_csv_string();
    let json = report.to_json()?;
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
            let stem = args
                .sweep_file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sweep".into());
            let (csv_path, json_path) = (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.json")));
            write(&csv_path, &csv)?;
            write(&json_path, &json)?;
            eprintln!(
                "wrote {} and {} ({} records{})",
                csv_path.display(),
                json_path.display(),
                report.records.len(),
                if report.truncated { ", truncated" } else { "" }
            );
        }
        None => match cli.format {
            Format::Csv => print!("{csv}"),
            Format::Json => println!("{json}"),
        },
    }
    if report.truncated {
        eprintln!("qhet: sweep interrupted; partial results flushed");
        return Ok(EXIT_INTERRUPTED);
    }
    let bad = cross_method_disagreements(&report, &spec, &base)?;
    if !bad.is_empty() {
        for d in &bad {
            eprintln!(
                "cross-method check failed: {} {}={} {}: analytic {} vs {} (tolerance {})",
                d.quantity.as_str(),
                report.parameter.as_str(),
                d.value,
                d.method.as_str(),
                d.analytic,
                d.other,
                d.tolerance
            );
        }
        return Err(Failure::validation(format!("{} cross-method disagreements", bad.len())));
    }
    Ok(0)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<u8, Failure> {
    let sc = load_base(cli, None, &args.set)?;
    let fs_rate = args.sample_rate.unwrap_or_else(|| synth::default_sample_rate(&sc));
    let duration = args.duration.unwrap_or(DEFAULT_MC_SAMPLES as f64 / fs_rate);
    let ts = synth::synthesize_photocurrent(&sc, fs_rate, duration, cli.seed)?;
    let cfg = WelchConfig {
        segment_len: args.segment_len,
        ..WelchConfig::default()
    };
    let m = measure_nf_detailed(&ts, &sc, &cfg)?;

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("qhet_out"));
    fs::create_dir_all(&dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    let record = dir.join("record.f64");
    let sidecar = ts.write_binary(&record)?;
    let mut files = vec![record.clone(), sidecar];
    if args.csv_record {
        let p = dir.join("record.csv");
        let mut buf = Vec::new();
        ts.write_csv(&mut buf)?;
        fs::write(&p, buf).map_err(QhetError::from)?;
        files.push(p);
    }
    let psd_path = match cli.format {
        Format::Csv => {
            let p = dir.join("psd.csv");
            let mut buf = Vec::new();
            m.psd.write_csv(&mut buf)?;
            fs::write(&p, buf).map_err(QhetError::from)?;
            p
        }
        Format::Json => {
            let p = dir.join("psd.json");
            write(&p, &m.psd.to_json()?)?;
            p
        }
    };
    files.push(psd_path);
    let nf_path = dir.join("nf.json");
    let nf = json!({
        "result": m.result,
        "nf_std_err_db": m.nf_std_err_db,
        "tone_power": m.tone_power,
        "tone_power_std_err": m.tone_power_std_err,
        "chi": m.chi,
        "chi_std_err": m.chi_std_err,
        "seed": m.seed,
    });
    write(&nf_path, &serde_json::to_string_pretty(&nf).map_err(QhetError::from)?)?;
    files.push(nf_path);

    let analytic_nf = analytic::noise_figure(&sc)?.nf_db;
    let summary = json!({
        "tool_version": TOOL_VERSION,
        "seed": cli.seed,
        "scenario_digest": sc.digest(),
        "scenario": sc.serialize(),
        "sample_rate": fs_rate,
        "samples": ts.len(),
        "welch_segments": m.psd.n_segments,
        "nf_db": m.result.nf_db,
        "nf_std_err_db": m.nf_std_err_db,
        "analytic_nf_db": analytic_nf,
        "tone_power": m.tone_power,
        "analytic_p_out": analytic::output_power(&sc),
        "chi": m.chi,
        "analytic_chi": analytic::noise_psd_baseband(&sc),
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&summary).map_err(QhetError::from)?;
    write(&dir.join("summary.json"), &text)?;
    println!("{text}");
    Ok(0)
}

fn cmd_validate(cli: &Cli, args: &ValidateArgs) -> Result<u8, Failure> {
    let level: Level = args.level.parse()?;
    let sc = load_base(cli, None, &[])?;
    let report = run_validation(&sc, cli.seed, level);
    match cli.format {
        Format::Csv => print!("{}", report.table()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).map_err(QhetError::from)?),
    }
    if let Some(path) = &cli.out {
        write(path, &serde_json::to_string_pretty(&report).map_err(QhetError::from)?)?;
    }
    if report.all_passed() {
        Ok(0)
    } else {
        Err(Failure::validation(format!("failed checks: {}", report.failing().join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::{fixed9, sig9};

    #[test]
    fn rounded_zero_has_no_sign() {
        assert_eq!(fixed9(-4e-15), "0.000000000");
        assert_eq!(fixed9(-0.5), "-0.500000000");
        assert_eq!(fixed9(3.0102999566), "3.010299957");
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(481.424946), "481.424946");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(2.5e-17), "2.50000000e-17");
        assert_eq!(sig9(-0.5), "-0.500000000");
    }
}
