//! Parameter sweeps over a scenario, evaluated by one or more methods.
//!
//! A sweep file uses the scenario file syntax:
//!
//! ```text
//! parameter = gain_db            # r | gain_db | q | theta_l | omega
//! grid = linear 0 45 10          # or: grid = log 1 100 5, or: values = 0, 0.5, 1
//! outputs = nf_db, chi           # nf_db p_out chi F snr_out beat_cos beat_sin
//! methods = analytic, oracle     # analytic oracle monte-carlo
//! form = exact                   # analytic χ form: exact | high_gain
//! seed_base = 1
//! mc_duration = 6.6e6            # Monte-Carlo record length (time units)
//! scenario = optical.conf        # relative to the sweep file
//! set.q = 0.5                    # scenario overrides applied before sweeping
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::analytic::{self, Method, PsdForm};
use crate::error::{QhetError, Result};
use crate::oracle;
use crate::scenario::{fmt_num, parse_kv, Scenario};
use crate::spectral::{self, WelchConfig};
use crate::synth::{self, SynthesisPlan};

use super::report::{Record, RunReport};

/// Samples per Monte-Carlo record when no duration is given: enough for a
/// ±0.1 dB noise figure at the default sample rate.
pub const DEFAULT_MC_SAMPLES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    R,
    /// Amplifier gain in dB; r = gain_db·ln 10 / 20.
    GainDb,
    Q,
    ThetaL,
    /// Analysis frequency of the noise density (rad per time unit).
    Omega,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::R => "r",
            Parameter::GainDb => "gain_db",
            Parameter::Q => "q",
            Parameter::ThetaL => "theta_l",
            Parameter::Omega => "omega",
        }
    }
}

impl std::str::FromStr for Parameter {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "r" => Parameter::R,
            "gain_db" => Parameter::GainDb,
            "q" => Parameter::Q,
            "theta_l" => Parameter::ThetaL,
            "omega" => Parameter::Omega,
            other => {
                return Err(QhetError::validation(
                    "parameter",
                    format!("`{other}` is not one of r, gain_db, q, theta_l, omega"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    NfDb,
    POut,
    Chi,
    #[serde(rename = "F")]
    F,
    SnrOut,
    /// Coefficient of cos(Ωt − Δθ) in the photocurrent.
    BeatCos,
    /// Coefficient of sin(Ωt − Δθ) in the photocurrent.
    BeatSin,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::NfDb => "nf_db",
            Quantity::POut => "p_out",
            Quantity::Chi => "chi",
            Quantity::F => "F",
            Quantity::SnrOut => "snr_out",
            Quantity::BeatCos => "beat_cos",
            Quantity::BeatSin => "beat_sin",
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nf_db" => Quantity::NfDb,
            "p_out" => Quantity::POut,
            "chi" => Quantity::Chi,
            "F" => Quantity::F,
            "snr_out" => Quantity::SnrOut,
            "beat_cos" => Quantity::BeatCos,
            "beat_sin" => Quantity::BeatSin,
            other => {
                return Err(QhetError::validation("outputs", format!("unknown quantity `{other}`")))
            }
        })
    }
}

/// Sweep values: an explicit list or a linear/log grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    List(Vec<f64>),
    Linear { start: f64, stop: f64, count: usize },
    Log { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Linear { start, stop, count } => spaced(start, stop, count, |x| x, |x| x),
            Grid::Log { start, stop, count } => spaced(start, stop, count, f64::ln, f64::exp),
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let bad = || {
            QhetError::validation(
                "grid",
                format!("expected `linear|log <start> <stop> <count>`, got `{text}`"),
            )
        };
        if parts.len() != 4 {
            return Err(bad());
        }
        let start: f64 = parts[1].parse().map_err(|_| bad())?;
        let stop: f64 = parts[2].parse().map_err(|_| bad())?;
        let count: usize = parts[3].parse().map_err(|_| bad())?;
        match parts[0] {
            "linear" => Ok(Grid::Linear { start, stop, count }),
            "log" if start > 0.0 && stop > 0.0 => Ok(Grid::Log { start, stop, count }),
            "log" => Err(QhetError::validation("grid", "log grid needs positive endpoints")),
            _ => Err(bad()),
        }
    }
}

fn spaced(start: f64, stop: f64, count: usize, fwd: fn(f64) -> f64, inv: fn(f64) -> f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (fwd(start), fwd(stop));
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        stop
                    } else if k == 0 {
                        start
                    } else {
                        inv(a + (b - a) * k as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub values: Grid,
    pub outputs: Vec<Quantity>,
    pub methods: Vec<Method>,
    pub form: PsdForm,
    pub seed_base: u64,
    /// Monte-Carlo record duration; `None` means [`DEFAULT_MC_SAMPLES`]
    /// samples at the default sample rate.
    pub mc_duration: Option<f64>,
    pub mc_sample_rate: Option<f64>,
    /// Scenario file referenced by the sweep, resolved against its directory.
    pub scenario_path: Option<PathBuf>,
    /// Scenario overrides applied before sweeping.
    pub overrides: Vec<(String, String)>,
}

impl SweepSpec {
    pub fn new(parameter: Parameter, values: Grid) -> Self {
        SweepSpec {
            parameter,
            values,
            outputs: vec![Quantity::NfDb],
            methods: vec![Method::Analytic],
            form: PsdForm::Exact,
            seed_base: 0,
            mc_duration: None,
            mc_sample_rate: None,
            scenario_path: None,
            overrides: Vec::new(),
        }
    }

    /// Parses sweep text; `base_dir` resolves a relative `scenario` path.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let map = parse_kv(text)?;
        let get = |k: &str| map.get(k).map(|(_, v)| v.as_str());
        for (k, (line, _)) in &map {
            let known = [
                "parameter",
                "values",
                "grid",
                "outputs",
                "methods",
                "form",
                "seed_base",
                "mc_duration",
                "mc_sample_rate",
                "scenario",
            ];
            if !known.contains(&k.as_str()) && !k.starts_with("set.") {
                return Err(QhetError::Parse {
                    line: *line,
                    message: format!("unknown key `{k}`"),
                });
            }
        }
        let parameter: Parameter = get("parameter")
            .ok_or_else(|| QhetError::validation("parameter", "required key missing"))?
            .parse()?;
        let values = match (get("values"), get("grid")) {
            (Some(_), Some(_)) => {
                return Err(QhetError::validation("values", "give either `values` or `grid`, not both"))
            }
            (Some(v), None) => Grid::List(parse_list(v, "values")?),
            (None, Some(g)) => Grid::parse(g)?,
            (None, None) => return Err(QhetError::validation("values", "required key missing")),
        };
        let mut spec = SweepSpec::new(parameter, values);
        if let Some(v) = get("outputs") {
            spec.outputs = split_list(v).map(str::parse).collect::<Result<_>>()?;
        }
        if let Some(v) = get("methods") {
            spec.methods = split_list(v)
                .map(|m| m.parse().map_err(|_| QhetError::validation("methods", format!("unknown method `{m}`"))))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = get("form") {
            spec.form = v.parse().map_err(|_| QhetError::validation("form", format!("unknown form `{v}`")))?;
        }
        if let Some(v) = get("seed_base") {
            spec.seed_base = v
                .parse()
                .map_err(|_| QhetError::validation("seed_base", format!("`{v}` is not a non-negative integer")))?;
        }
        if let Some(v) = get("mc_duration") {
            spec.mc_duration = Some(parse_num(v, "mc_duration")?);
        }
        if let Some(v) = get("mc_sample_rate") {
            spec.mc_sample_rate = Some(parse_num(v, "mc_sample_rate")?);
        }
        if let Some(v) = get("scenario") {
            let p = PathBuf::from(v);
            spec.scenario_path = Some(match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            });
        }
        spec.overrides = map
            .iter()
            .filter_map(|(k, (_, v))| k.strip_prefix("set.").map(|k| (k.to_string(), v.clone())))
            .collect();
        spec.check()?;
        Ok(spec)
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SweepSpec::parse(&text, path.parent())
    }

    /// Structural checks that do not need the scenario.
    pub fn check(&self) -> Result<()> {
        if self.values.values().is_empty() {
            return Err(QhetError::validation("values", "sweep has no points"));
        }
        if self.outputs.is_empty() {
            return Err(QhetError::validation("outputs", "no quantities requested"));
        }
        if self.methods.is_empty() {
            return Err(QhetError::validation("methods", "no methods requested"));
        }
        if self.values.values().iter().any(|v| !v.is_finite()) {
            return Err(QhetError::validation("values", "values must be finite"));
        }
        let only_analytic = self.outputs.contains(&Quantity::F) || self.parameter == Parameter::Omega;
        if only_analytic && self.methods.iter().any(|&m| m != Method::Analytic) {
            return Err(QhetError::validation(
                "methods",
                "F and omega sweeps are analytic-only",
            ));
        }
        if self.parameter == Parameter::Omega
            && self.outputs.iter().any(|q| !matches!(q, Quantity::Chi | Quantity::F))
        {
            return Err(QhetError::validation("outputs", "an omega sweep supports chi and F only"));
        }
        for (key, v) in [("mc_duration", self.mc_duration), ("mc_sample_rate", self.mc_sample_rate)] {
            if matches!(v, Some(x) if !(x > 0.0 && x.is_finite())) {
                return Err(QhetError::validation(key, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Base scenario with the sweep's overrides applied.
    pub fn apply_overrides(&self, base: &Scenario) -> Result<Scenario> {
        let mut b = base.to_builder();
        for (k, v) in &self.overrides {
            b = b.set(k, v)?;
        }
        b.build()
    }

    /// Scenario at one sweep value. `omega` leaves the scenario unchanged.
    pub fn point_scenario(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        let key = self.parameter.as_str();
        match self.parameter {
            Parameter::Omega => {
                if value.abs() >= base.omega_l() {
                    return Err(QhetError::validation(
                        "values",
                        format!("|omega| = {} must stay below omega_l = {}", value.abs(), base.omega_l()),
                    ));
                }
                Ok(base.clone())
            }
            _ => base
                .to_builder()
                .set(key, &fmt_num(value))?
                .build()
                .map_err(|e| match e {
                    QhetError::Validation { message, .. } => {
                        QhetError::validation("values", format!("{key} = {value}: {message}"))
                    }
                    other => other,
                }),
        }
    }

    /// Canonical text with the grid expanded and overrides already folded
    /// into the scenario; parsing it back yields an equivalent sweep.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let join = |it: Vec<String>| it.join(", ");
        let _ = writeln!(out, "parameter = {}", self.parameter.as_str());
        let _ = writeln!(out, "values = {}", join(self.values.values().into_iter().map(fmt_num).collect()));
        let _ = writeln!(out, "outputs = {}", join(self.outputs.iter().map(|q| q.as_str().to_string()).collect()));
        let _ = writeln!(out, "methods = {}", join(self.methods.iter().map(|m| m.as_str().to_string()).collect()));
        let form = match self.form {
            PsdForm::Exact => "exact",
            PsdForm::HighGain => "high_gain",
        };
        let _ = writeln!(out, "form = {form}");
        let _ = writeln!(out, "seed_base = {}", self.seed_base);
        if let Some(d) = self.mc_duration {
            let _ = writeln!(out, "mc_duration = {}", fmt_num(d));
        }
        if let Some(fs) = self.mc_sample_rate {
            let _ = writeln!(out, "mc_sample_rate = {}", fmt_num(fs));
        }
        out
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num(v: &str, key: &str) -> Result<f64> {
    v.parse().map_err(|_| QhetError::validation(key, format!("`{v}` is not a number")))
}

fn parse_list(v: &str, key: &str) -> Result<Vec<f64>> {
    split_list(v).map(|x| parse_num(x, key)).collect()
}

/// Seed of the Monte-Carlo record at sweep point `index`.
pub fn point_seed(seed_base: u64, index: usize) -> u64 {
    seed_base.wrapping_add(index as u64)
}

/// Monte-Carlo sample rate and duration used for a scenario.
pub fn mc_timing(spec: &SweepSpec, sc: &Scenario) -> (f64, f64) {
    let fs = spec.mc_sample_rate.unwrap_or_else(|| synth::default_sample_rate(sc));
    let duration = spec.mc_duration.unwrap_or(DEFAULT_MC_SAMPLES as f64 / fs);
    (fs, duration)
}

/// Runs every point of the sweep. Points are visited in order; `cancel`
/// is polled between points and a set flag yields a truncated report.
pub fn run_sweep(spec: &SweepSpec, base: &Scenario, cancel: &AtomicBool) -> Result<RunReport> {
    spec.check()?;
    let start = std::time::Instant::now();
    let scenario = spec.apply_overrides(base)?;
    let values = spec.values.values();
    // Validate every point before spending time on any of them.
    let points: Vec<Scenario> = values
        .iter()
        .map(|&v| spec.point_scenario(&scenario, v))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut truncated = false;
    for (idx, (&value, sc)) in values.iter().zip(&points).enumerate() {
        if cancel.load(Ordering::SeqCst) {
            truncated = true;
            break;
        }
        for &method in &spec.methods {
            let seed = point_seed(spec.seed_base, idx);
            for (quantity, v, err) in evaluate_point(spec, sc, value, method, seed)? {
                records.push(Record {
                    value,
                    quantity,
                    method,
                    result: v,
                    std_err: err,
                    seed: (method == Method::MonteCarlo).then_some(seed),
                });
            }
        }
    }
    Ok(RunReport {
        tool_version: synth::TOOL_VERSION.to_string(),
        parameter: spec.parameter,
        seed_base: spec.seed_base,
        scenario: scenario.serialize(),
        scenario_digest: scenario.digest(),
        sweep: spec.serialize(),
        records,
        truncated,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

type PointValues = Vec<(Quantity, f64, Option<f64>)>;

fn evaluate_point(spec: &SweepSpec, sc: &Scenario, value: f64, method: Method, seed: u64) -> Result<PointValues> {
    let omega = if spec.parameter == Parameter::Omega {
        value
    } else {
        sc.derive().omega_beat
    };
    match method {
        Method::Analytic => spec
            .outputs
            .iter()
            .map(|&q| {
                let v = match q {
                    Quantity::NfDb => analytic::noise_figure(sc)?.nf_db,
                    Quantity::POut => analytic::output_power(sc),
                    Quantity::Chi => analytic_chi(spec, sc, omega),
                    Quantity::F => analytic::spectral_factor_f(omega, sc),
                    Quantity::SnrOut => analytic::snr_out(sc),
                    Quantity::BeatCos => analytic::beat_coefficients(sc).0,
                    Quantity::BeatSin => analytic::beat_coefficients(sc).1,
                };
                Ok((q, v, None))
            })
            .collect(),
        Method::Oracle => {
            let obs = oracle::observables(sc)?;
            let (a, b) = oracle_beat(sc, &obs);
            spec.outputs
                .iter()
                .map(|&q| {
                    let v = match q {
                        Quantity::NfDb => oracle::noise_figure(sc)?.nf_db,
                        Quantity::POut => obs.p_out,
                        Quantity::Chi => obs.chi,
                        Quantity::SnrOut => obs.snr_out,
                        Quantity::BeatCos => a,
                        Quantity::BeatSin => b,
                        Quantity::F => unreachable!("rejected by SweepSpec::check"),
                    };
                    Ok((q, v, None))
                })
                .collect()
        }
        Method::MonteCarlo => {
            let (fs, duration) = mc_timing(spec, sc);
            let plan = SynthesisPlan::new(sc, fs, duration)?;
            let ts = synth::synthesize_from_plan(&plan, sc, seed)?;
            let m = spectral::measure_nf_detailed(&ts, sc, &WelchConfig::default())?;
            let (c, s, t_obs) = spectral::tone_quadratures(&ts, omega)?;
            // Rotate from the cos(Ωt)/sin(Ωt) basis to cos/sin(Ωt − Δθ).
            let (sn, cs) = sc.delta_theta().sin_cos();
            let (a, b) = (c * cs + s * sn, -c * sn + s * cs);
            let amp_err = (m.chi / t_obs).sqrt();
            let snr_rel = m.nf_std_err_db * std::f64::consts::LN_10 / 10.0;
            Ok(spec
                .outputs
                .iter()
                .map(|&q| match q {
                    Quantity::NfDb => (q, m.result.nf_db, Some(m.nf_std_err_db)),
                    Quantity::POut => (q, m.tone_power, Some(m.tone_power_std_err)),
                    Quantity::Chi => (q, m.chi, Some(m.chi_std_err)),
                    Quantity::SnrOut => (q, m.result.snr_out, Some(snr_rel * m.result.snr_out)),
                    Quantity::BeatCos => (q, a, Some(amp_err)),
                    Quantity::BeatSin => (q, b, Some(amp_err)),
                    Quantity::F => unreachable!("rejected by SweepSpec::check"),
                })
                .collect())
        }
    }
}

fn analytic_chi(spec: &SweepSpec, sc: &Scenario, omega: f64) -> f64 {
    match (spec.form, spec.parameter) {
        (PsdForm::Exact, Parameter::Omega) => analytic::noise_psd(omega, sc, PsdForm::Exact),
        // At the beat frequency the baseband limit is the exact density with
        // the cancellation in the squeezed quadrature removed.
        (PsdForm::Exact, _) => analytic::noise_psd_baseband(sc),
        (PsdForm::HighGain, _) => analytic::noise_psd(omega, sc, PsdForm::HighGain),
    }
}

/// Photocurrent beat coefficients from the engine's quadrature means.
fn oracle_beat(sc: &Scenario, obs: &oracle::OracleObservables) -> (f64, f64) {
    let k = sc.constants();
    let scale = k.c * k.e_charge * k.epsilon0 * sc.derive().eta * sc.epsilon_l() / sc.q().sqrt();
    (scale * obs.beat.cos_mean, scale * obs.beat.sin_mean)
}

/// One failed cross-method comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub value: f64,
    pub quantity: Quantity,
    pub method: Method,
    pub analytic: f64,
    pub other: f64,
    pub tolerance: f64,
}

/// Compares every non-analytic record with its analytic counterpart:
/// the oracle within the conditioning-limited tolerance of
/// [`oracle::comparison_tolerance`] (1e-9 unless the detected quadrature is
/// deeply squeezed), Monte-Carlo within 3σ of its error bar.
pub fn cross_method_disagreements(report: &RunReport, spec: &SweepSpec, base: &Scenario) -> Result<Vec<Disagreement>> {
    let scenario = spec.apply_overrides(base)?;
    let mut out = Vec::new();
    for rec in report.records.iter().filter(|r| r.method != Method::Analytic) {
        let Some(reference) = report
            .records
            .iter()
            .find(|a| a.method == Method::Analytic && a.quantity == rec.quantity && a.value == rec.value)
        else {
            continue;
        };
        let sc = spec.point_scenario(&scenario, rec.value)?;
        let (diff, tolerance) = match rec.method {
            Method::Oracle => {
                if rec.quantity == Quantity::Chi && spec.form != PsdForm::Exact {
                    continue;
                }
                let rel = oracle::comparison_tolerance(&sc);
                let tol = match rec.quantity {
                    Quantity::NfDb => 10.0 / std::f64::consts::LN_10 * rel,
                    Quantity::BeatCos | Quantity::BeatSin => rel * analytic::beat_amplitude(&sc),
                    _ => rel * reference.result.abs(),
                };
                ((rec.result - reference.result).abs(), tol)
            }
            _ => {
                if rec.quantity == Quantity::Chi && spec.form != PsdForm::Exact {
                    continue;
                }
                let sigma = rec.std_err.unwrap_or(0.0);
                ((rec.result - reference.result).abs(), 3.0 * sigma)
            }
        };
        if !(diff <= tolerance) {
            out.push(Disagreement {
                value: rec.value,
                quantity: rec.quantity,
                method: rec.method,
                analytic: reference.result,
                other: rec.result,
                tolerance,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> RunReport {
        let spec = SweepSpec::parse(text, None).unwrap();
        run_sweep(&spec, &Scenario::default(), &AtomicBool::new(false)).unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::parse("linear 0 45 10").unwrap().values()[9], 45.0);
        assert_eq!(Grid::parse("linear 0 45 10").unwrap().values()[1], 5.0);
        let lg = Grid::parse("log 1 100 3").unwrap().values();
        assert!((lg[1] - 10.0).abs() < 1e-12);
        assert!(Grid::parse("log 0 1 3").is_err());
        assert!(Grid::parse("cubic 0 1 3").is_err());
    }

    #[test]
    fn nf_versus_gain_endpoints() {
        let rep = run("parameter = gain_db\ngrid = linear 0 45 10\nset.q = 0.5\n");
        let nf: Vec<f64> = rep.records.iter().map(|r| r.result).collect();
        assert_eq!(nf.len(), 10);
        assert!((nf[0] - 3.0103).abs() < 1e-4, "{}", nf[0]);
        assert!((nf[9] - 0.00014).abs() < 5e-6, "{}", nf[9]);
        assert!(nf.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn q_sweep_at_zero_gain() {
        let rep = run("parameter = q\nvalues = 0.25, 0.5, 1\nset.r = 0\n");
        for rec in &rep.records {
            assert!((rec.result - 10.0 * (1.0 / rec.value).log10()).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_and_oracle_agree() {
        let text = "parameter = theta_l\ngrid = linear 0 1.5707963267948966 7\n\
                    outputs = nf_db, p_out, chi, snr_out, beat_cos, beat_sin\n\
                    methods = analytic, oracle\nset.gain_db = 45\n";
        let spec = SweepSpec::parse(text, None).unwrap();
        let rep = run_sweep(&spec, &Scenario::default(), &AtomicBool::new(false)).unwrap();
        assert_eq!(rep.records.len(), 7 * 6 * 2);
        let bad = cross_method_disagreements(&rep, &spec, &Scenario::default()).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn rejects_bad_specs() {
        let base = Scenario::default();
        let err = |t: &str| -> QhetError {
            match SweepSpec::parse(t, None) {
                Err(e) => e,
                Ok(s) => run_sweep(&s, &base, &AtomicBool::new(false)).unwrap_err(),
            }
        };
        assert!(matches!(err("values = 1\n"), QhetError::Validation { key, .. } if key == "parameter"));
        assert!(matches!(err("parameter = q\nvalues = 0.5, 1.5\n"), QhetError::Validation { key, .. } if key == "values"));
        assert!(matches!(err("parameter = r\nvalues = -1\n"), QhetError::Validation { key, .. } if key == "values"));
        assert!(matches!(err("parameter = omega\nvalues = 2e15\noutputs = chi\n"), QhetError::Validation { .. }));
        assert!(matches!(err("parameter = r\nvalues = 1\noutputs = F\nmethods = oracle\n"), QhetError::Validation { .. }));
        assert!(matches!(err("parameter = r\nbogus = 1\nvalues = 1\n"), QhetError::Parse { .. }));
    }

    #[test]
    fn cancellation_truncates() {
        let spec = SweepSpec::parse("parameter = r\nvalues = 0, 1\n", None).unwrap();
        let rep = run_sweep(&spec, &Scenario::default(), &AtomicBool::new(true)).unwrap();
        assert!(rep.truncated);
        assert!(rep.records.is_empty());
    }

    #[test]
    fn serialize_round_trips() {
        let spec = SweepSpec::parse(
            "parameter = gain_db\ngrid = linear 0 45 4\noutputs = nf_db, chi\nmethods = analytic, oracle\nseed_base = 9\nmc_duration = 1000\n",
            None,
        )
        .unwrap();
        let back = SweepSpec::parse(&spec.serialize(), None).unwrap();
        assert_eq!(back.values.values(), spec.values.values());
        assert_eq!(back.serialize(), spec.serialize());
    }
}
