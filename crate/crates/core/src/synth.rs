//! Monte-Carlo photocurrent records.
//!
//! Noise is synthesized in the frequency domain: independent complex
//! Gaussian bins scaled to the target one-sided density, Hermitian symmetry
//! implied by a real inverse FFT, DC and Nyquist bins real. The RNG is
//! ChaCha20 seeded from the user seed with one stream per block of
//! [`RNG_BLOCK`] bins, so a record is bit-identical for a given
//! (seed, sample rate, length) regardless of the thread count.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, PsdForm, PsdModel};
use crate::error::{QhetError, Result};
use crate::scenario::{fmt_num, Scenario};
use crate::spectral::fit_tone;

/// Frequency bins per RNG stream.
pub const RNG_BLOCK: usize = 1 << 16;

pub const TOOL_VERSION: &str = concat!("qhet ", env!("CARGO_PKG_VERSION"));

/// A one-sided power spectral density as a function of cycle frequency.
pub trait TargetPsd: Sync {
    fn density(&self, freq: f64) -> f64;

    fn provenance(&self) -> String {
        "custom".into()
    }
}

impl TargetPsd for PsdModel {
    fn density(&self, freq: f64) -> f64 {
        let non_strict = PsdModel {
            strict: false,
            ..self.clone()
        };
        non_strict.at_frequency(freq).expect("non-strict evaluation is total")
    }

    fn provenance(&self) -> String {
        self.scenario.digest()
    }
}

/// Flat density, e.g. a pure shot floor.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPsd(pub f64);

impl TargetPsd for ConstantPsd {
    fn density(&self, _freq: f64) -> f64 {
        self.0
    }
}

/// Sampled differential photocurrent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub scenario_hash: String,
    /// Angular beat frequency of the deterministic part, when known.
    pub beat_omega: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    sample_rate: f64,
    seed: u64,
    scenario_hash: String,
    length: usize,
    beat_omega: Option<f64>,
    format: String,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, samples: Vec<f64>, seed: u64, scenario_hash: String) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(QhetError::Domain("sample rate must be > 0".into()));
        }
        if samples.len() < 2 {
            return Err(QhetError::Length("a time series needs at least 2 samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(QhetError::Domain("time series contains non-finite samples".into()));
        }
        Ok(TimeSeries {
            sample_rate,
            samples,
            seed,
            scenario_hash,
            beat_omega: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.len() as f64
    }

    /// Writes little-endian f64 samples to `path` and a JSON sidecar next to
    /// it (same stem, `.json`). Returns the sidecar path.
    pub fn write_binary(&self, path: &Path) -> Result<PathBuf> {
        let mut bytes = Vec::with_capacity(8 * self.len());
        for v in &self.samples {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, bytes)?;
        let sidecar = path.with_extension("json");
        let meta = Sidecar {
            sample_rate: self.sample_rate,
            seed: self.seed,
            scenario_hash: self.scenario_hash.clone(),
            length: self.len(),
            beat_omega: self.beat_omega,
            format: "f64-le".into(),
        };
        std::fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)?;
        Ok(sidecar)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let meta: Sidecar =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
        let bytes = std::fs::read(path)?;
        if bytes.len() != 8 * meta.length {
            return Err(QhetError::Length(format!(
                "expected {} samples, file holds {} bytes",
                meta.length,
                bytes.len()
            )));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let mut ts = TimeSeries::new(meta.sample_rate, samples, meta.seed, meta.scenario_hash)?;
        ts.beat_omega = meta.beat_omega;
        Ok(ts)
    }

    /// `#` header block, then `t,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {TOOL_VERSION}")?;
        writeln!(w, "# seed = {}", self.seed)?;
        writeln!(w, "# scenario = {}", self.scenario_hash)?;
        writeln!(w, "# sample_rate = {}", fmt_num(self.sample_rate))?;
        writeln!(w, "t,value")?;
        for (k, v) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", fmt_num(k as f64 / self.sample_rate), fmt_num(*v))?;
        }
        Ok(())
    }
}

/// Longest record a plan accepts (2^32 samples, 32 GiB of f64).
pub const MAX_SAMPLES: usize = 1 << 32;

/// Synthesis parameters for a photocurrent record.
#[derive(Debug, Clone)]
pub struct SynthesisPlan {
    pub duration: f64,
    pub fs: f64,
    /// Number of samples kept.
    pub n_samples: usize,
    /// Synthesis FFT size, the next power of two ≥ `n_samples`.
    pub n_fft: usize,
    pub psd: PsdModel,
    /// (cos, sin) coefficients of the beat and its angular frequency.
    pub beat: (f64, f64, f64),
}

impl SynthesisPlan {
    pub fn new(scenario: &Scenario, fs: f64, duration: f64) -> Result<Self> {
        if !(fs > 0.0 && duration > 0.0) {
            return Err(QhetError::Domain("fs and duration must be > 0".into()));
        }
        let omega = scenario.derive().omega_beat;
        if fs <= 4.0 * omega / (2.0 * std::f64::consts::PI) {
            return Err(QhetError::Domain(format!(
                "sample rate {fs} too low for beat frequency {} (need > 4x)",
                omega / (2.0 * std::f64::consts::PI)
            )));
        }
        let n = (duration * fs).round();
        if n > MAX_SAMPLES as f64 {
            return Err(QhetError::Length(format!(
                "record of {n:e} samples exceeds the limit of {MAX_SAMPLES}"
            )));
        }
        let n_samples = n as usize;
        if n_samples < 256 {
            return Err(QhetError::Length(format!(
                "record of {n_samples} samples is shorter than 256"
            )));
        }
        let (a, b) = analytic::beat_coefficients(scenario);
        Ok(SynthesisPlan {
            duration,
            fs,
            n_samples,
            n_fft: n_samples.next_power_of_two(),
            psd: PsdModel::new(scenario.clone(), PsdForm::Exact),
            beat: (a, b, omega),
        })
    }
}

/// Default sample rate for a scenario: beat at fs/16, i.e. on a bin centre
/// for every segment length divisible by 16.
pub fn default_sample_rate(scenario: &Scenario) -> f64 {
    16.0 * scenario.derive().omega_beat / (2.0 * std::f64::consts::PI)
}

/// Zero-mean Gaussian record whose expected one-sided PSD equals `psd` on
/// the FFT grid.
pub fn synthesize_colored_noise<P: TargetPsd + ?Sized>(
    psd: &P,
    fs: f64,
    n: usize,
    seed: u64,
) -> Result<TimeSeries> {
    if !(2..=MAX_SAMPLES).contains(&n) {
        return Err(QhetError::Length(format!("need 2 to {MAX_SAMPLES} samples, got {n}")));
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(QhetError::Domain("sample rate must be > 0".into()));
    }
    let n_fft = n.next_power_of_two().max(2);
    let n_bins = n_fft / 2 + 1;
    let df = fs / n_fft as f64;

    let density: Vec<f64> = (0..n_bins).map(|m| psd.density(m as f64 * df)).collect();
    if let Some((m, v)) = density
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        return Err(QhetError::Domain(format!(
            "target PSD is {v} at f = {}",
            m as f64 * df
        )));
    }

    let scale = (fs * n_fft as f64).sqrt() / 2.0;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n_bins];
    spectrum
        .par_chunks_mut(RNG_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            for (j, bin) in chunk.iter_mut().enumerate() {
                let m = block * RNG_BLOCK + j;
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let amp = scale * density[m].sqrt();
                *bin = if m == 0 || m == n_fft / 2 {
                    Complex64::new(std::f64::consts::SQRT_2 * amp * g1, 0.0)
                } else {
                    Complex64::new(amp * g1, amp * g2)
                };
            }
        });

    let c2r = RealFftPlanner::<f64>::new().plan_fft_inverse(n_fft);
    let mut out = c2r.make_output_vec();
    c2r.process(&mut spectrum, &mut out)
        .map_err(|e| QhetError::Domain(format!("inverse FFT failed: {e}")))?;
    let norm = 1.0 / n_fft as f64;
    out.truncate(n);
    out.iter_mut().for_each(|v| *v *= norm);

    TimeSeries::new(fs, out, seed, psd.provenance())
}

/// Beat signal plus colored noise with the exact-form density of the scenario.
pub fn synthesize_photocurrent(
    scenario: &Scenario,
    fs: f64,
    duration: f64,
    seed: u64,
) -> Result<TimeSeries> {
    let plan = SynthesisPlan::new(scenario, fs, duration)?;
    synthesize_from_plan(&plan, scenario, seed)
}

pub fn synthesize_from_plan(plan: &SynthesisPlan, scenario: &Scenario, seed: u64) -> Result<TimeSeries> {
    let mut ts = synthesize_colored_noise(&plan.psd, plan.fs, plan.n_samples, seed)?;
    let (a, b, omega) = plan.beat;
    let dtheta = scenario.delta_theta();
    let fs = plan.fs;
    ts.samples
        .par_chunks_mut(RNG_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            for (j, v) in chunk.iter_mut().enumerate() {
                let t = (block * RNG_BLOCK + j) as f64 / fs;
                let ph = omega * t - dtheta;
                *v += a * ph.cos() + b * ph.sin();
            }
        });
    ts.scenario_hash = scenario.digest();
    ts.beat_omega = Some(omega);
    Ok(ts)
}

/// Biased autocorrelation estimate (1/N)·Σ y_k y_{k+lag} for lags
/// 0..=max_lag, after least-squares removal of the known beat.
pub fn autocorrelation_estimate(ts: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let n = ts.len();
    if max_lag >= n / 4 {
        return Err(QhetError::Length(format!(
            "max_lag {max_lag} must be below length/4 = {}",
            n / 4
        )));
    }
    let mut y = ts.samples.clone();
    if let Some(omega) = ts.beat_omega {
        let (c, s) = fit_tone(&ts.samples, ts.sample_rate, omega, n);
        for (k, v) in y.iter_mut().enumerate() {
            let t = k as f64 / ts.sample_rate;
            *v -= c * (omega * t).cos() + s * (omega * t).sin();
        }
    }

    let n_pad = (2 * n).next_power_of_two();
    let mut planner = RealFftPlanner::<f64>::new();
    let r2c = planner.plan_fft_forward(n_pad);
    let c2r = planner.plan_fft_inverse(n_pad);
    y.resize(n_pad, 0.0);
    let mut spec = r2c.make_output_vec();
    r2c.process(&mut y, &mut spec)
        .map_err(|e| QhetError::Domain(format!("forward FFT failed: {e}")))?;
    for v in spec.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    let mut acf = c2r.make_output_vec();
    c2r.process(&mut spec, &mut acf)
        .map_err(|e| QhetError::Domain(format!("inverse FFT failed: {e}")))?;
    let norm = 1.0 / (n_pad as f64 * n as f64);
    Ok(acf[..=max_lag].iter().map(|v| v * norm).collect())
}
