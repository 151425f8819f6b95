//! Cross-method validation suite.
//!
//! Each check compares two independent routes to the same number (closed
//! form vs Gaussian engine, closed form vs Monte-Carlo measurement, target
//! density vs spectral estimate) or asserts an engine invariant. The quick
//! level runs in seconds; the full level adds long Monte-Carlo grids and the
//! multi-seed spectral ensembles.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use serde::Serialize;

use crate::analytic::{self, PsdForm, PsdModel};
use crate::error::{QhetError, Result};
use crate::gaussian::{GaussianState, SymplecticTransform};
use crate::oracle;
use crate::scenario::Scenario;
use crate::spectral::{self, WelchConfig, Window};
use crate::synth::{self, SynthesisPlan, TargetPsd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(QhetError::validation("level", format!("`{other}` is not quick or full"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub level: Level,
    pub seed: u64,
    pub scenario_digest: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  result  seconds  detail\n", "check");
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:<6}  {:>7.2}  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.seconds,
                c.detail
            ));
        }
        out
    }
}

/// Noise-only scenario whose exact density varies across [0, fs/2] at
/// fs = 1: the semicircle term is resolved and the |ω| > ω_l branch is
/// reached inside the band.
pub fn colored_scenario() -> Scenario {
    Scenario::builder()
        .omega_l(1.0)
        .omega_s(1.1)
        .alpha_s_mag(0.0)
        .epsilon_l(1.0)
        .r(0.5)
        .q(1.0)
        .theta_l(0.3)
        .build()
        .expect("colored scenario is valid")
}

pub const COLORED_SAMPLE_RATE: f64 = 1.0;

type Outcome = Result<(bool, String)>;

/// Runs the suite against `scenario` (the heterodyne operating point used
/// by the oracle and Monte-Carlo comparisons).
pub fn run_validation(scenario: &Scenario, seed: u64, level: Level) -> ValidationReport {
    let mut checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("analytic_identities", Box::new(check_analytic_identities)),
        ("oracle_vs_analytic", Box::new(|| check_oracle_vs_analytic(scenario))),
        ("engine_symplectic", Box::new(check_engine_symplectic)),
        ("engine_tms_moments", Box::new(check_engine_tms_moments)),
        ("engine_beat_means", Box::new(|| check_engine_beat_means(scenario))),
        ("engine_image_band_doubling", Box::new(check_image_band_doubling)),
        ("engine_physicality", Box::new(|| check_engine_physicality(scenario))),
        ("mc_vs_analytic", Box::new(|| check_mc_point(scenario, seed))),
        ("synthesis_determinism", Box::new(|| check_determinism(scenario, seed))),
        ("beat_removal", Box::new(|| check_beat_removal(scenario, seed))),
    ];
    if level == Level::Full {
        checks.push(("mc_nf_grid", Box::new(|| check_mc_grid(scenario, seed))));
        checks.push(("mc_nf_seed_ensemble", Box::new(|| check_mc_seeds(scenario, seed))));
        checks.push(("tone_quadrature_ratio", Box::new(|| check_tone_ratio(scenario, seed))));
        checks.push(("welch_colored_record", Box::new(|| check_welch_colored(seed))));
        checks.push(("ensemble_psd_200_seeds", Box::new(|| check_ensemble_psd(seed))));
        checks.push(("wiener_khinchin_lags", Box::new(|| check_wiener_khinchin(seed))));
        checks.push(("excess_noise_nonnegative", Box::new(|| check_excess_noise(scenario, seed))));
    }
    let checks = checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f() {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect();
    ValidationReport {
        level,
        seed,
        scenario_digest: scenario.digest(),
        checks,
    }
}

fn check_analytic_identities() -> Outcome {
    let base = Scenario::default();
    let mut worst: f64 = 0.0;
    for xi in [0.25, 0.5, 1.0] {
        let regular = analytic::noise_figure_regular(xi)?;
        worst = worst.max((regular - 10.0 * (1.0 / xi).log10()).abs());
        let sc = base.to_builder().r(0.0).q(xi).build()?;
        worst = worst.max((analytic::noise_figure(&sc)?.nf_db - regular).abs());
    }
    let f_ex = f_example_scenario()?;
    let f = analytic::spectral_factor_f(10.0, &f_ex);
    let hand = 200.0 + 2.0 * 2f64.sqrt() * 9900f64.sqrt();
    let f_ok = (f - hand).abs() <= 1e-9 * hand && (f - 481.42494).abs() < 1e-5;
    let mut parity: f64 = 0.0;
    for w in [0.5, 10.0, 50.0, 99.0] {
        let (a, b) = (
            analytic::noise_psd(w, &f_ex, PsdForm::Exact),
            analytic::noise_psd(-w, &f_ex, PsdForm::Exact),
        );
        parity = parity.max((a - b).abs() / a);
    }
    Ok((
        worst <= 1e-12 && f_ok && parity <= 1e-12,
        format!("nf identities max |Δ| = {worst:.1e} dB; F(10) = {f:.5}; parity {parity:.1e}"),
    ))
}

/// ω_l = 100, sinh r = 1, θ_l = 0: F(10) = 2·100 + 2√2·√9900.
pub fn f_example_scenario() -> Result<Scenario> {
    Scenario::builder()
        .omega_l(100.0)
        .omega_s(100.5)
        .alpha_s_mag(1.0)
        .epsilon_l(1.0)
        .r(1f64.asinh())
        .q(1.0)
        .build()
}

fn check_oracle_vs_analytic(base: &Scenario) -> Outcome {
    let mut worst = 0.0f64;
    let mut at = String::new();
    for r in [0.0, 0.5, 1.0, 2.5, 5.0] {
        for q in [0.25, 0.5, 1.0] {
            for th in [0.0, 0.3, FRAC_PI_2] {
                let sc = base.to_builder().r(r).q(q).theta_l(th).build()?;
                let tol = oracle::comparison_tolerance(&sc);
                let o = oracle::observables(&sc)?;
                let nf_a = analytic::noise_figure(&sc)?.nf_db;
                let nf_o = oracle::noise_figure(&sc)?.nf_db;
                let ratios = [
                    (o.p_out - analytic::output_power(&sc)).abs() / analytic::output_power(&sc),
                    (o.chi - analytic::noise_psd_baseband(&sc)).abs() / analytic::noise_psd_baseband(&sc),
                    (nf_a - nf_o).abs() / (10.0 / std::f64::consts::LN_10),
                ];
                for v in ratios {
                    let score = v / tol;
                    if !(score <= worst) {
                        worst = score;
                        at = format!("r={r} q={q} θ_l={th:.3}");
                    }
                }
            }
        }
    }
    Ok((worst <= 1.0, format!("worst |Δ|/tolerance = {worst:.2e} at {at}")))
}

fn check_engine_symplectic() -> Outcome {
    let mut ok = true;
    let mut det_err = 0.0f64;
    for r in [0.0, 0.5, 1.0, 2.5, 5.0] {
        let s = SymplecticTransform::two_mode_squeeze(2, r, 0, 1);
        ok &= s.is_symplectic();
        let st = GaussianState::vacuum(2)?.two_mode_squeeze(r, 0, 1)?;
        let scale = (2.0 * r).cosh().powi(2);
        det_err = det_err.max((st.purity_determinant() - 1.0).abs() / scale);
    }
    Ok((
        ok && det_err <= 1e-12,
        format!("S·J·Sᵀ = J for r ≤ 5; max |det(2V) − 1|/cosh²2r = {det_err:.1e}"),
    ))
}

fn check_engine_tms_moments() -> Outcome {
    let mut worst = 0.0f64;
    for r in [0.1, 0.5, 1.0, 2.5, 5.0] {
        let m = GaussianState::vacuum(2)?.two_mode_squeeze(r, 0, 1)?.mode_moments(0, 1)?;
        let (s, c) = (r.sinh(), r.cosh());
        worst = worst
            .max((m.n_sig - s * s).abs() / (s * s))
            .max((m.n_img - s * s).abs() / (s * s))
            .max((m.m_cross.re + s * c).abs() / (s * c))
            .max(m.m_cross.im.abs() / (s * c));
    }
    Ok((worst <= 1e-12, format!("max relative deviation {worst:.1e} for r ≤ 5")))
}

fn check_engine_beat_means(base: &Scenario) -> Outcome {
    let mut worst = 0.0f64;
    for r in [0.0, 1.0, 2.5, 5.0] {
        for th in [0.0, 0.7, FRAC_PI_2] {
            for ts in [0.0, 1.1] {
                let sc = base.to_builder().r(r).theta_l(th).theta_s(ts).q(1.0).build()?;
                let beat = oracle::detected_state(&sc)?.heterodyne_beat_statistics(&sc)?;
                let (a, b) = analytic::beat_coefficients(&sc);
                let k = sc.constants();
                let scale = k.c * k.e_charge * k.epsilon0 * sc.derive().eta * sc.epsilon_l();
                let amp = a.hypot(b);
                worst = worst
                    .max((scale * beat.cos_mean - a).abs() / amp)
                    .max((scale * beat.sin_mean - b).abs() / amp);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max |Δ|/amplitude = {worst:.1e}")))
}

fn check_image_band_doubling() -> Outcome {
    let vac = GaussianState::vacuum(2)?;
    let single = vac.cov()[(0, 0)];
    let sc = Scenario::default().to_builder().r(0.0).alpha_s_mag(0.0).build()?;
    let beat = vac.heterodyne_beat_statistics(&sc)?;
    let ok = (single - 0.5).abs() <= 1e-12
        && (beat.cos_var - 1.0).abs() <= 1e-12
        && (beat.sin_var - 1.0).abs() <= 1e-12;
    Ok((
        ok,
        format!(
            "single-mode variance {single}, beat variances ({}, {})",
            beat.cos_var, beat.sin_var
        ),
    ))
}

fn check_engine_physicality(base: &Scenario) -> Outcome {
    let mut count = 0;
    let mut worst = f64::INFINITY;
    for r in [0.0, 1.0, 3.0] {
        for q in [0.3, 1.0] {
            let sc = base.to_builder().r(r).q(q).build()?;
            let st = oracle::detected_state(&sc)?;
            worst = worst.min(st.min_uncertainty_eigenvalue());
            if st.is_physical() && st.mode_moments(0, 1)?.satisfies_physicality_bound() {
                count += 1;
            }
        }
    }
    Ok((count == 6, format!("{count}/6 detected states physical; min eig(V + iJ/2) = {worst:.1e}")))
}

/// NF measured on one record against the analytic value; the tolerance is
/// 3σ of the measurement's own error bar.
fn mc_nf(sc: &Scenario, seed: u64, n_samples: usize) -> Result<(f64, f64, f64)> {
    let fs = synth::default_sample_rate(sc);
    let plan = SynthesisPlan::new(sc, fs, n_samples as f64 / fs)?;
    let ts = synth::synthesize_from_plan(&plan, sc, seed)?;
    let m = spectral::measure_nf_detailed(&ts, sc, &WelchConfig::default())?;
    Ok((m.result.nf_db, m.nf_std_err_db, analytic::noise_figure(sc)?.nf_db))
}

fn check_mc_point(base: &Scenario, seed: u64) -> Outcome {
    let sc = base.to_builder().r(1.0).q(1.0).theta_l(0.0).build()?;
    let (mc, err, a) = mc_nf(&sc, seed, 1 << 22)?;
    Ok((
        (mc - a).abs() <= 3.0 * err,
        format!("r=1 q=1: MC {mc:.4} ± {err:.4} dB vs analytic {a:.4} dB"),
    ))
}

/// The grid criterion is agreement within 0.1 dB per point; the largest
/// normalized deviation |Δ|/σ is reported alongside.
fn check_mc_grid(base: &Scenario, seed: u64) -> Outcome {
    let mut fails = Vec::new();
    let (mut worst, mut worst_pull) = (0.0f64, 0.0f64);
    let mut i = 0;
    for r in [0.0, 0.5, 1.0, 2.5] {
        for q in [0.25, 0.5, 1.0] {
            let sc = base.to_builder().r(r).q(q).theta_l(0.0).build()?;
            let (mc, err, a) = mc_nf(&sc, seed.wrapping_add(i), 1 << 24)?;
            i += 1;
            worst = worst.max((mc - a).abs());
            worst_pull = worst_pull.max((mc - a).abs() / err);
            if (mc - a).abs() > 0.1 {
                fails.push(format!("r={r} q={q}: {mc:.4}±{err:.4} vs {a:.4}"));
            }
        }
    }
    Ok((
        fails.is_empty(),
        if fails.is_empty() {
            format!("12 points within 0.1 dB; max |Δ| = {worst:.4} dB, max |Δ|/σ = {worst_pull:.2}")
        } else {
            fails.join("; ")
        },
    ))
}

fn check_mc_seeds(base: &Scenario, seed: u64) -> Outcome {
    let sc = base.to_builder().r(1.0).q(1.0).theta_l(0.0).build()?;
    let mut worst = 0.0f64;
    let mut sum = 0.0;
    for k in 0..10 {
        let (mc, _, _) = mc_nf(&sc, seed.wrapping_add(100 + k), 1 << 24)?;
        worst = worst.max(mc.abs());
        sum += mc;
    }
    Ok((
        worst <= 0.1,
        format!("10 seeds at r=1 q=1: max |NF| = {worst:.4} dB, mean {:.4} dB", sum / 10.0),
    ))
}

/// Tone amplitudes of θ_l = 0 and θ_l = π/2 records; their ratio should be
/// e^{2r}.
pub fn tone_amplitude_ratio(base: &Scenario, r: f64, seed: u64) -> Result<f64> {
    let amp = |th: f64, s: u64| -> Result<f64> {
        let sc = base.to_builder().r(r).theta_l(th).build()?;
        let fs = synth::default_sample_rate(&sc);
        let ts = synth::synthesize_photocurrent(&sc, fs, (1 << 22) as f64 / fs, s)?;
        Ok((2.0 * spectral::tone_power(&ts, sc.derive().omega_beat)?).sqrt())
    };
    Ok(amp(0.0, seed)? / amp(FRAC_PI_2, seed.wrapping_add(1))?)
}

fn check_tone_ratio(base: &Scenario, seed: u64) -> Outcome {
    let r = 2f64.ln();
    let ratio = tone_amplitude_ratio(base, r, seed)?;
    let want = (2.0 * r).exp();
    Ok((
        (ratio / want - 1.0).abs() <= 0.01,
        format!("r = ln 2: amplitude ratio {ratio:.5} vs e^{{2r}} = {want}"),
    ))
}

/// Records whose beat has been removed leave ≤ 1% of the tone power.
fn check_beat_removal(base: &Scenario, seed: u64) -> Outcome {
    let sc = base.to_builder().r(1.0).build()?;
    let fs = synth::default_sample_rate(&sc);
    let mut ts = synth::synthesize_photocurrent(&sc, fs, (1 << 20) as f64 / fs, seed)?;
    let omega = sc.derive().omega_beat;
    let injected = analytic::output_power(&sc);
    let (c, s, _) = spectral::tone_quadratures(&ts, omega)?;
    for (k, v) in ts.samples.iter_mut().enumerate() {
        let t = k as f64 / fs;
        *v -= c * (omega * t).cos() + s * (omega * t).sin();
    }
    let residual = spectral::tone_power(&ts, omega)?;
    Ok((
        residual <= 0.01 * injected,
        format!("residual/injected tone power = {:.1e}", residual / injected),
    ))
}

fn check_determinism(base: &Scenario, seed: u64) -> Outcome {
    let fs = synth::default_sample_rate(base);
    let duration = (1 << 16) as f64 / fs;
    let a = synth::synthesize_photocurrent(base, fs, duration, seed)?;
    let b = synth::synthesize_photocurrent(base, fs, duration, seed)?;
    let same_bits = a.samples.iter().zip(&b.samples).all(|(x, y)| x.to_bits() == y.to_bits());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca)?;
    b.write_csv(&mut cb)?;
    Ok((
        same_bits && a.len() == b.len() && ca == cb,
        format!("{} samples, bit-identical: {same_bits}", a.len()),
    ))
}

/// RMS of (estimate/target − 1) over bins 1..=fs/4 (the one-sided DC bin
/// holds half the density by construction and is excluded).
pub fn rms_relative_error(values: &[f64], freqs: &[f64], target: &dyn Fn(f64) -> f64, f_max: f64) -> f64 {
    let errs: Vec<f64> = values
        .iter()
        .zip(freqs)
        .skip(1)
        .take_while(|(_, f)| **f <= f_max * (1.0 + 1e-12))
        .map(|(v, f)| v / target(*f) - 1.0)
        .collect();
    (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
}

fn colored_target() -> PsdModel {
    PsdModel::new(colored_scenario(), PsdForm::Exact)
}

fn check_welch_colored(seed: u64) -> Outcome {
    let psd = colored_target();
    let fs = COLORED_SAMPLE_RATE;
    let ts = synth::synthesize_colored_noise(&psd, fs, 1 << 20, seed)?;
    let cfg = WelchConfig {
        segment_len: 1024,
        overlap: 0.5,
        window: Window::Hann,
    };
    let est = spectral::welch_psd(&ts, &cfg)?;
    let rms = rms_relative_error(&est.values, &est.freqs, &|f| psd.density(f), fs / 4.0);
    let parseval = est.integrated_power() / ts.variance() - 1.0;
    Ok((
        est.n_segments >= 200 && rms <= 0.05 && parseval.abs() <= 0.02,
        format!(
            "{} segments: RMS error {:.2}%, Parseval {:+.2}%",
            est.n_segments,
            100.0 * rms,
            100.0 * parseval
        ),
    ))
}

fn check_ensemble_psd(seed: u64) -> Outcome {
    use rayon::prelude::*;
    let psd = colored_target();
    let fs = COLORED_SAMPLE_RATE;
    let cfg = WelchConfig {
        segment_len: 1024,
        overlap: 0.5,
        window: Window::Hann,
    };
    let seeds: Vec<u64> = (0..200).map(|k| seed.wrapping_add(1000 + k)).collect();
    let estimates = seeds
        .par_iter()
        .map(|&s| {
            let ts = synth::synthesize_colored_noise(&psd, fs, 1 << 16, s)?;
            spectral::welch_psd(&ts, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let n_bins = estimates[0].values.len();
    let mut mean = vec![0.0; n_bins];
    for est in &estimates {
        for (m, v) in mean.iter_mut().zip(&est.values) {
            *m += v / estimates.len() as f64;
        }
    }
    let rms = rms_relative_error(&mean, &estimates[0].freqs, &|f| psd.density(f), fs / 4.0);
    let ratio: f64 = estimates
        .iter()
        .map(|e| e.integrated_power())
        .sum::<f64>()
        / estimates.len() as f64
        / target_variance(&psd, fs);
    Ok((
        rms <= 0.05 && (0.98..=1.02).contains(&ratio),
        format!("200 seeds: RMS error {:.2}%, mean power/target {ratio:.4}", 100.0 * rms),
    ))
}

/// ∫₀^{fs/2} S(f)·cos(2πfτ) df by composite Simpson integration.
pub fn target_autocorrelation(psd: &dyn TargetPsd, fs: f64, tau: f64) -> f64 {
    let n = 1 << 16;
    let h = fs / 2.0 / n as f64;
    let g = |k: usize| {
        let f = k as f64 * h;
        psd.density(f) * (2.0 * PI * f * tau).cos()
    };
    let mut s = g(0) + g(n);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k);
    }
    s * h / 3.0
}

fn target_variance(psd: &dyn TargetPsd, fs: f64) -> f64 {
    target_autocorrelation(psd, fs, 0.0)
}

/// Lags 0..10 of the record's autocorrelation against the transform of the
/// target density. Each lag must match within 5% of its value, or within
/// four standard errors of the biased estimator (Bartlett) where 5% of the
/// value is below the estimator's statistical resolution.
fn check_wiener_khinchin(seed: u64) -> Outcome {
    let psd = colored_target();
    let fs = COLORED_SAMPLE_RATE;
    let n = 1 << 20;
    let ts = synth::synthesize_colored_noise(&psd, fs, n, seed)?;
    let acf = synth::autocorrelation_estimate(&ts, 10)?;
    let target: Vec<f64> = (0..=10).map(|k| target_autocorrelation(&psd, fs, k as f64 / fs)).collect();
    let bartlett = (target.iter().map(|v| v * v).sum::<f64>() * 2.0 / n as f64).sqrt();
    let mut fails = Vec::new();
    let mut worst_rel = 0.0f64;
    for (k, (est, want)) in acf.iter().zip(&target).enumerate() {
        let tol = (0.05 * want.abs()).max(4.0 * bartlett);
        worst_rel = worst_rel.max((est - want).abs() / want.abs().max(1e-300));
        if (est - want).abs() > tol {
            fails.push(format!("lag {k}: {est:.4e} vs {want:.4e}"));
        }
    }
    Ok((
        fails.is_empty(),
        if fails.is_empty() {
            format!("lags 0..10 agree; R(0) = {:.4}, R(1)/R(0) = {:.3}", target[0], target[1] / target[0])
        } else {
            fails.join("; ")
        },
    ))
}

fn check_excess_noise(base: &Scenario, seed: u64) -> Outcome {
    let var = |r: f64| -> Result<f64> {
        let sc = base.to_builder().r(r).theta_l(0.0).alpha_s_mag(0.0).build()?;
        let fs = synth::default_sample_rate(&sc);
        let ts = synth::synthesize_photocurrent(&sc, fs, (1 << 20) as f64 / fs, seed)?;
        Ok(ts.variance())
    };
    let v0 = var(0.0)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [0.1, 1.0, 2.5] {
        let v = var(r)?;
        ok &= v - v0 >= 0.0;
        detail.push(format!("r={r}: {:.3e}", v - v0));
    }
    Ok((ok, format!("variance excess over r=0: {}", detail.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_on_default_scenario() {
        let rep = run_validation(&Scenario::default(), 1, Level::Quick);
        assert!(rep.all_passed(), "\n{}", rep.table());
    }

    #[test]
    fn corrupted_scenario_names_failing_checks() {
        let sc = Scenario::builder()
            .omega_l(1.0)
            .omega_s(1.5)
            .epsilon_l(1.0)
            .alpha_s_mag(1.0)
            .r(1.0)
            .q(1.0)
            .build()
            .unwrap();
        let rep = run_validation(&sc, 1, Level::Quick);
        assert!(!rep.all_passed());
        assert!(rep.failing().contains(&"oracle_vs_analytic"), "\n{}", rep.table());
    }

    #[test]
    fn f_example_value() {
        let sc = f_example_scenario().unwrap();
        let want = 200.0 + 2.0 * 2f64.sqrt() * 9900f64.sqrt();
        assert!((analytic::spectral_factor_f(10.0, &sc) - want).abs() < 1e-9);
    }

    #[test]
    fn simpson_autocorrelation_of_flat_density() {
        let psd = crate::synth::ConstantPsd(2.0);
        assert!((target_autocorrelation(&psd, 1.0, 0.0) - 1.0).abs() < 1e-12);
        assert!(target_autocorrelation(&psd, 1.0, 3.0).abs() < 1e-9);
    }
}
