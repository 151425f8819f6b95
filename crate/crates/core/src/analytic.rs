//! Closed-form photocurrent, noise density and noise figure.
//!
//! All spectral densities are one-sided: the factor 2 that folds negative
//! frequencies is applied everywhere, including the r = 0 shot floor.

use serde::{Deserialize, Serialize};

use crate::error::{QhetError, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdForm {
    /// χ(ω) = 2ηcε₀e²ε_l²·[1 + ηħ·sinh r·F(ω)]
    Exact,
    /// χ = 2ηcε₀e²ε_l²·[1 + ηħω_l·e^{2r}·cos²θ_l]
    HighGain,
}

impl std::str::FromStr for PsdForm {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PsdForm::Exact),
            "high_gain" | "high-gain" => Ok(PsdForm::HighGain),
            other => Err(QhetError::Domain(format!("unknown PSD form `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Oracle,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Oracle => "oracle",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "oracle" => Ok(Method::Oracle),
            "monte-carlo" | "monte_carlo" | "mc" => Ok(Method::MonteCarlo),
            other => Err(QhetError::Domain(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFigureResult {
    pub snr_in: f64,
    pub snr_out: f64,
    pub nf_db: f64,
    pub method: Method,
}

impl NoiseFigureResult {
    pub fn new(snr_in: f64, snr_out: f64, method: Method) -> Self {
        NoiseFigureResult {
            snr_in,
            snr_out,
            nf_db: 10.0 * (snr_in / snr_out).log10(),
            method,
        }
    }
}

/// Analytic noise density of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdModel {
    pub scenario: Scenario,
    pub one_sided: bool,
    pub form: PsdForm,
    /// Reject |ω| > ω_l instead of continuing the square root as zero.
    pub strict: bool,
}

impl PsdModel {
    pub fn new(scenario: Scenario, form: PsdForm) -> Self {
        PsdModel {
            scenario,
            one_sided: true,
            form,
            strict: false,
        }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        let v = match self.form {
            PsdForm::Exact => {
                let sc = &self.scenario;
                let d = sc.derive();
                let f = if self.strict {
                    spectral_factor_f_strict(omega, sc)?
                } else {
                    spectral_factor_f(omega, sc)
                };
                2.0 * d.shot_level * (1.0 + d.eta * sc.constants().hbar * sc.r().sinh() * f)
            }
            PsdForm::HighGain => high_gain_psd(&self.scenario),
        };
        Ok(if self.one_sided { v } else { 0.5 * v })
    }

    /// One-sided density per unit cycle frequency, the convention of the
    /// spectral estimator.
    pub fn at_frequency(&self, f: f64) -> Result<f64> {
        self.evaluate(2.0 * std::f64::consts::PI * f)
    }
}

/// Intrinsic SNR of the input field, c·ε₀·|α_s|²/(2ħω_s·B).
pub fn snr_in(sc: &Scenario) -> f64 {
    let k = sc.constants();
    k.c * k.epsilon0 * sc.alpha_s_mag().powi(2) / (2.0 * k.hbar * sc.omega_s() * sc.bandwidth())
}

/// c·e·ε₀·η·ε_l·|α_s|, the common photocurrent scale.
fn current_scale(sc: &Scenario) -> f64 {
    let k = sc.constants();
    k.c * k.e_charge * k.epsilon0 * sc.derive().eta * sc.epsilon_l() * sc.alpha_s_mag()
}

/// Coefficients (a, b) of J₋(t) = a·cos(Ωt − Δθ) + b·sin(Ωt − Δθ).
pub fn beat_coefficients(sc: &Scenario) -> (f64, f64) {
    let k = std::f64::consts::SQRT_2 * current_scale(sc);
    let r = sc.r();
    (
        k * r.exp() * sc.theta_l().cos(),
        -k * (-r).exp() * sc.theta_l().sin(),
    )
}

/// Differential photocurrent J₋(t).
pub fn beat_signal(t: f64, sc: &Scenario) -> f64 {
    let (a, b) = beat_coefficients(sc);
    let phase = sc.derive().omega_beat * t - sc.delta_theta();
    a * phase.cos() + b * phase.sin()
}

/// Peak amplitude of J₋(t).
pub fn beat_amplitude(sc: &Scenario) -> f64 {
    let (a, b) = beat_coefficients(sc);
    a.hypot(b)
}

/// Time-averaged J₋² over whole beat periods:
/// (c·e·ε₀·η·ε_l·|α_s|)²·(e^{2r}cos²θ_l + e^{−2r}sin²θ_l).
pub fn output_power(sc: &Scenario) -> f64 {
    current_scale(sc).powi(2) * quadrature_weight(sc)
}

/// F(ω) with the conjugate pair expanded to 2·cos 2θ_l·cosh r·√(ω_l² − ω²).
/// Beyond |ω| > ω_l the square-root term is taken as zero.
pub fn spectral_factor_f(omega: f64, sc: &Scenario) -> f64 {
    let wl = sc.omega_l();
    let r = sc.r();
    let root = (wl * wl - omega * omega).max(0.0).sqrt();
    r.sinh() * ((wl + omega).abs() + (wl - omega).abs())
        + 2.0 * (2.0 * sc.theta_l()).cos() * r.cosh() * root
}

pub fn spectral_factor_f_strict(omega: f64, sc: &Scenario) -> Result<f64> {
    if omega.abs() > sc.omega_l() {
        return Err(QhetError::Domain(format!(
            "|omega| = {} exceeds omega_l = {}",
            omega.abs(),
            sc.omega_l()
        )));
    }
    Ok(spectral_factor_f(omega, sc))
}

fn high_gain_psd(sc: &Scenario) -> f64 {
    let d = sc.derive();
    let hbar = sc.constants().hbar;
    2.0 * d.shot_level * (1.0 + d.eta * hbar * sc.omega_l() * d.gain * sc.theta_l().cos().powi(2))
}

/// One-sided noise density χ(ω) in the requested form. The exact form is
/// non-strict here; use [`PsdModel::strict`] to reject |ω| > ω_l.
pub fn noise_psd(omega: f64, sc: &Scenario, form: PsdForm) -> f64 {
    PsdModel::new(sc.clone(), form)
        .evaluate(omega)
        .expect("non-strict evaluation is total")
}

/// χ at the beat frequency in the baseband limit ω ≪ ω_l, where
/// sinh r·F → 2ω_l(sinh²r + sinh r·cosh r·cos 2θ_l)
///           = ω_l(e^{2r}cos²θ_l + e^{−2r}sin²θ_l − 1).
/// The second form avoids cancellation in the squeezed quadrature.
pub fn noise_psd_baseband(sc: &Scenario) -> f64 {
    let d = sc.derive();
    let k = d.eta * sc.constants().hbar * sc.omega_l();
    2.0 * d.shot_level * ((1.0 - k) + k * quadrature_weight(sc))
}

/// e^{2r}cos²θ_l + e^{−2r}sin²θ_l, the noise (and power) weight of the
/// detected beat quadrature relative to r = 0.
pub fn quadrature_weight(sc: &Scenario) -> f64 {
    let (c, s) = (sc.theta_l().cos(), sc.theta_l().sin());
    let g = sc.derive().gain;
    g * c * c + s * s / g
}

pub fn snr_out(sc: &Scenario) -> f64 {
    output_power(sc) / (noise_psd_baseband(sc) * sc.bandwidth())
}

/// Finite-gain noise figure, obtained by carrying the exact density through
/// SNR_out without the sinh r ≈ cosh r approximation. At θ_l = 0 it reads
/// 10·log10[(1 + q·(ω_l/ω_s)·(e^{2r} − 1)) / (q·e^{2r})].
pub fn noise_figure(sc: &Scenario) -> Result<NoiseFigureResult> {
    if sc.alpha_s_mag() <= 0.0 {
        return Err(QhetError::Domain(
            "noise figure undefined without a signal (alpha_s_mag = 0)".into(),
        ));
    }
    Ok(NoiseFigureResult::new(snr_in(sc), snr_out(sc), Method::Analytic))
}

/// Noise figure of a plain detector with efficiency ξ: 10·log10(1/ξ).
pub fn noise_figure_regular(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(QhetError::Domain(format!("efficiency {xi} outside (0, 1]")));
    }
    Ok(10.0 * (1.0 / xi).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, SQRT_2};

    /// Scaled units with ω_s = 1 exactly, so η = q.
    fn unit() -> Scenario {
        Scenario::builder()
            .omega_l(0.9995)
            .omega_s(1.0)
            .alpha_s_mag(1.0)
            .epsilon_l(1.0)
            .r(0.0)
            .q(1.0)
            .build()
            .unwrap()
    }

    fn with(f: impl FnOnce(crate::scenario::ScenarioBuilder) -> crate::scenario::ScenarioBuilder) -> Scenario {
        f(unit().to_builder()).build().unwrap()
    }

    #[test]
    fn input_snr() {
        let s = with(|b| b.alpha_s_mag(2.0));
        assert!((snr_in(&s) - 2.0).abs() < 1e-12);
        assert_eq!(snr_in(&with(|b| b.alpha_s_mag(0.0))), 0.0);
        let s2 = with(|b| b.alpha_s_mag(2.0).bandwidth(2.0));
        assert!((snr_in(&s2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beat_amplitudes() {
        assert!((beat_amplitude(&with(|b| b.r(LN_2))) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((beat_amplitude(&with(|b| b.r(LN_2).theta_l(FRAC_PI_2))) - SQRT_2 / 2.0).abs() < 1e-12);
        for th in [0.0, 0.4, 1.9, -2.2] {
            assert!((beat_amplitude(&with(|b| b.theta_l(th))) - SQRT_2).abs() < 1e-12);
        }
        let s = with(|b| b.r(LN_2));
        assert!((beat_signal(0.0, &s) - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn output_power_cases() {
        assert!((output_power(&with(|b| b.r(LN_2))) - 4.0).abs() < 1e-12);
        assert!((output_power(&with(|b| b.r(LN_2).theta_l(FRAC_PI_2))) - 0.25).abs() < 1e-12);
        for (th, ts) in [(0.0, 0.0), (1.0, 2.0), (2.5, -1.0)] {
            assert!((output_power(&with(|b| b.theta_l(th).theta_s(ts))) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn output_power_is_time_average_of_beat() {
        let s = with(|b| b.r(0.7).theta_l(0.9).theta_s(0.3));
        let omega = s.derive().omega_beat;
        let period = 2.0 * std::f64::consts::PI / omega;
        let n = 20_000;
        let avg: f64 = (0..n)
            .map(|k| beat_signal(period * k as f64 / n as f64, &s).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((avg - output_power(&s)).abs() < 1e-12 * avg);
    }

    #[test]
    fn spectral_factor_examples() {
        let r = (1.0 + SQRT_2).ln();
        let s = Scenario::builder()
            .omega_l(100.0)
            .omega_s(100.5)
            .r(r)
            .build()
            .unwrap();
        let expect = 110.0 + 90.0 + 2.0 * SQRT_2 * 9900f64.sqrt();
        assert!((spectral_factor_f(10.0, &s) - expect).abs() < 1e-9);
        assert!((expect - 481.424_94).abs() < 1e-5);

        // At r = 0 only the cos 2θ_l cross term survives in F, and the
        // excess density sinh r·F vanishes.
        let s0 = s.to_builder().r(0.0).build().unwrap();
        for w in [0.0, 3.0, 99.0] {
            let f = spectral_factor_f(w, &s0);
            assert!((f - 2.0 * (1e4 - w * w).sqrt()).abs() < 1e-9);
            assert_eq!(s0.r().sinh() * f, 0.0);
            assert_eq!(noise_psd(w, &s0, PsdForm::Exact), 2.0 * s0.derive().shot_level);
        }
        let s4 = s.to_builder().theta_l(FRAC_PI_4).build().unwrap();
        assert!((spectral_factor_f(0.0, &s4) - 200.0 * r.sinh()).abs() < 1e-9);

        assert!(spectral_factor_f_strict(150.0, &s).is_err());
        assert!((spectral_factor_f(150.0, &s) - r.sinh() * 300.0).abs() < 1e-9);
    }

    #[test]
    fn noise_psd_examples() {
        assert!((noise_psd(0.0, &unit(), PsdForm::Exact) - 2.0).abs() < 1e-12);
        // q = 1, e^{2r} = 4, ω_l = 1.
        let s = Scenario::builder()
            .omega_l(1.0)
            .omega_s(1.0 + 1e-13)
            .alpha_s_mag(1.0)
            .epsilon_l(1.0)
            .r(LN_2)
            .build()
            .unwrap();
        assert!((noise_psd(0.0, &s, PsdForm::HighGain) - 10.0).abs() < 1e-9);
        let s = s.to_builder().theta_l(FRAC_PI_2).build().unwrap();
        assert!((noise_psd(0.0, &s, PsdForm::HighGain) - 2.0).abs() < 1e-12);
        let strict = PsdModel::new(s.clone(), PsdForm::Exact).strict();
        assert!(strict.evaluate(1.5).is_err());
    }

    #[test]
    fn output_snr_cases() {
        for r in [0.0, 0.5, 2.0] {
            let s = Scenario::default().to_builder().r(r).build().unwrap();
            assert!((snr_out(&s) / snr_in(&s) - 1.0).abs() < 1e-12);
        }
        let s = with(|b| b.q(0.5));
        assert!((snr_out(&s) - snr_in(&s) / 2.0).abs() < 1e-12);
        assert_eq!(snr_out(&with(|b| b.alpha_s_mag(0.0))), 0.0);
    }

    #[test]
    fn noise_figure_cases() {
        let d = Scenario::default();
        for r in [0.0, 1.0, 2.5, 5.0] {
            let nf = noise_figure(&d.to_builder().r(r).build().unwrap()).unwrap();
            assert!(nf.nf_db.abs() < 1e-12, "r={r}: {}", nf.nf_db);
        }
        let nf = noise_figure(&with(|b| b.q(0.5))).unwrap();
        assert!((nf.nf_db - 3.010_299_956_639_812).abs() < 1e-12);
        let nf = noise_figure(&d.to_builder().q(0.5).gain_db(45.0).build().unwrap()).unwrap();
        assert!((nf.nf_db - 0.000_137_3).abs() < 1e-7, "{}", nf.nf_db);
        let nf = noise_figure(&d.to_builder().q(0.5).gain_db(20.0).build().unwrap()).unwrap();
        assert!((nf.nf_db - 10.0 * (50.5f64 / 50.0).log10()).abs() < 1e-12);
        assert!(noise_figure(&with(|b| b.alpha_s_mag(0.0))).is_err());
        assert!((nf.nf_db - 10.0 * (nf.snr_in / nf.snr_out).log10()).abs() < 1e-12);
    }

    #[test]
    fn regular_detector() {
        assert_eq!(noise_figure_regular(1.0).unwrap(), 0.0);
        assert!((noise_figure_regular(0.25).unwrap() - 6.020_599_913).abs() < 1e-9);
        assert!((noise_figure_regular(0.5).unwrap() - 3.010_299_957).abs() < 1e-9);
        assert!(noise_figure_regular(0.0).is_err());
        assert!(noise_figure_regular(1.01).is_err());
    }
}
