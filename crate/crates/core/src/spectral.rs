//! Welch PSD estimation, coherent tone extraction and Monte-Carlo noise
//! figure measurement.

use std::io::Write;

use rayon::prelude::*;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{snr_in, Method, NoiseFigureResult};
use crate::error::{QhetError, Result};
use crate::scenario::{fmt_num, Scenario};
use crate::synth::{TimeSeries, TOOL_VERSION};

/// Segments processed per parallel work item. Partial sums are combined in
/// segment order, so results do not depend on the thread count.
const SEGMENTS_PER_CHUNK: usize = 32;

/// Minimum number of Welch segments for a noise-figure measurement.
pub const MIN_SEGMENTS_FOR_NF: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    pub fn as_str(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }

    /// Periodic window of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|k| {
                    0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / len as f64).cos()
                })
                .collect(),
        }
    }

    /// Half-width, in bins, of the region a bin-centred tone leaks into.
    fn tone_half_width(self) -> usize {
        match self {
            Window::Rectangular => 0,
            Window::Hann => 1,
        }
    }
}

impl std::str::FromStr for Window {
    type Err = QhetError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
            "hann" | "hanning" => Ok(Window::Hann),
            other => Err(QhetError::Domain(format!("unknown window `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: 4096,
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub n_segments: usize,
    pub window: Window,
    pub segment_len: usize,
    pub overlap: f64,
    pub sample_rate: f64,
    pub seed: u64,
    pub scenario_hash: String,
}

impl PsdEstimate {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.segment_len as f64
    }

    /// Σ values·Δf; approximates the record variance.
    pub fn integrated_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {TOOL_VERSION}")?;
        writeln!(w, "# seed = {}", self.seed)?;
        writeln!(w, "# scenario = {}", self.scenario_hash)?;
        writeln!(w, "# window = {}", self.window.as_str())?;
        writeln!(w, "# segments = {}", self.n_segments)?;
        writeln!(w, "# segment_len = {}", self.segment_len)?;
        writeln!(w, "# overlap = {}", self.overlap)?;
        writeln!(w, "freq,psd")?;
        for (f, v) in self.freqs.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt_num(*f), fmt_num(*v))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Weighted combination of bins tracked per segment, giving a scatter-based
/// standard error alongside the averaged value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Default)]
struct Partial {
    sum: Vec<f64>,
    probe_sum: f64,
    probe_sq: f64,
}

/// Welch estimate plus a per-segment probe `Σ w_k·P_seg[bin_k]`.
pub fn welch_with_probe(
    ts: &TimeSeries,
    cfg: &WelchConfig,
    probe: &[(usize, f64)],
) -> Result<(PsdEstimate, ProbeStats)> {
    let len = cfg.segment_len;
    if len < 2 || len > ts.len() {
        return Err(QhetError::Length(format!(
            "segment length {len} must lie in [2, {}]",
            ts.len()
        )));
    }
    if !(0.0..=0.9).contains(&cfg.overlap) {
        return Err(QhetError::Domain(format!(
            "overlap {} outside [0, 0.9]",
            cfg.overlap
        )));
    }
    let step = len - (len as f64 * cfg.overlap).floor() as usize;
    let n_segments = (ts.len() - len) / step + 1;
    let n_bins = len / 2 + 1;
    let window = cfg.window.coefficients(len);
    let w_power: f64 = window.iter().map(|w| w * w).sum();
    let fs = ts.sample_rate;
    let bin_scale: Vec<f64> = (0..n_bins)
        .map(|m| {
            let one_sided = if m == 0 || (len % 2 == 0 && m == len / 2) { 1.0 } else { 2.0 };
            one_sided / (fs * w_power)
        })
        .collect();

    let r2c = RealFftPlanner::<f64>::new().plan_fft_forward(len);
    let starts: Vec<usize> = (0..n_segments).map(|k| k * step).collect();
    let partials: Vec<Partial> = starts
        .par_chunks(SEGMENTS_PER_CHUNK)
        .map(|chunk| {
            let mut buf = r2c.make_input_vec();
            let mut spec = r2c.make_output_vec();
            let mut scratch = r2c.make_scratch_vec();
            let mut acc = Partial {
                sum: vec![0.0; n_bins],
                ..Default::default()
            };
            for &start in chunk {
                for (b, (x, w)) in buf.iter_mut().zip(ts.samples[start..start + len].iter().zip(&window)) {
                    *b = x * w;
                }
                r2c.process_with_scratch(&mut buf, &mut spec, &mut scratch)
                    .expect("buffer sizes come from the plan");
                for ((a, s), k) in acc.sum.iter_mut().zip(&spec).zip(&bin_scale) {
                    *a += s.norm_sqr() * k;
                }
                let p: f64 = probe
                    .iter()
                    .map(|&(m, wt)| wt * spec[m].norm_sqr() * bin_scale[m])
                    .sum();
                acc.probe_sum += p;
                acc.probe_sq += p * p;
            }
            acc
        })
        .collect();

    let mut total = vec![0.0; n_bins];
    let (mut ps, mut pq) = (0.0, 0.0);
    for part in &partials {
        for (t, v) in total.iter_mut().zip(&part.sum) {
            *t += v;
        }
        ps += part.probe_sum;
        pq += part.probe_sq;
    }
    let k = n_segments as f64;
    total.iter_mut().for_each(|v| *v /= k);
    let probe_mean = ps / k;
    let probe_var = if n_segments > 1 {
        ((pq - k * probe_mean * probe_mean) / (k - 1.0)).max(0.0)
    } else {
        0.0
    };

    let df = fs / len as f64;
    let est = PsdEstimate {
        freqs: (0..n_bins).map(|m| m as f64 * df).collect(),
        values: total,
        n_segments,
        window: cfg.window,
        segment_len: len,
        overlap: cfg.overlap,
        sample_rate: fs,
        seed: ts.seed,
        scenario_hash: ts.scenario_hash.clone(),
    };
    Ok((
        est,
        ProbeStats {
            value: probe_mean,
            std_err: (probe_var / k).sqrt(),
        },
    ))
}

/// One-sided, window-power-corrected Welch estimate.
pub fn welch_psd(ts: &TimeSeries, cfg: &WelchConfig) -> Result<PsdEstimate> {
    welch_with_probe(ts, cfg, &[]).map(|(est, _)| est)
}

/// Least-squares (cos, sin) amplitudes of a tone at `omega` over the first
/// `n_use` samples, with t_k = k/fs.
pub(crate) fn fit_tone(samples: &[f64], fs: f64, omega: f64, n_use: usize) -> (f64, f64) {
    const CHUNK: usize = 1 << 16;
    let sums: Vec<[f64; 5]> = samples[..n_use]
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(b, chunk)| {
            let mut s = [0.0; 5];
            for (j, x) in chunk.iter().enumerate() {
                let (sn, cs) = (omega * (b * CHUNK + j) as f64 / fs).sin_cos();
                s[0] += cs * cs;
                s[1] += sn * sn;
                s[2] += cs * sn;
                s[3] += x * cs;
                s[4] += x * sn;
            }
            s
        })
        .collect();
    let mut s = [0.0; 5];
    for part in &sums {
        for (a, b) in s.iter_mut().zip(part) {
            *a += b;
        }
    }
    let det = s[0] * s[1] - s[2] * s[2];
    if det.abs() < 1e-300 {
        return (0.0, 0.0);
    }
    ((s[3] * s[1] - s[4] * s[2]) / det, (s[4] * s[0] - s[3] * s[2]) / det)
}

/// Number of samples spanning the largest whole number of periods.
fn whole_period_samples(n: usize, fs: f64, omega: f64) -> usize {
    let period = 2.0 * std::f64::consts::PI * fs / omega;
    let periods = (n as f64 / period).floor();
    ((periods * period).round() as usize).min(n)
}

/// Power (c² + s²)/2 of the sinusoid at `omega` fitted over an integer
/// number of periods.
pub fn tone_power(ts: &TimeSeries, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || omega >= std::f64::consts::PI * ts.sample_rate {
        return Err(QhetError::Domain(format!(
            "tone frequency {omega} rad/s must lie in (0, pi*fs)"
        )));
    }
    let (c, s, _) = tone_quadratures(ts, omega)?;
    Ok(0.5 * (c * c + s * s))
}

/// Coefficients (c, s) of c·cos(ωt) + s·sin(ωt) fitted over an integer
/// number of periods, with the observation time used.
pub(crate) fn tone_quadratures(ts: &TimeSeries, omega: f64) -> Result<(f64, f64, f64)> {
    let n_use = whole_period_samples(ts.len(), ts.sample_rate, omega);
    if n_use < 2 {
        return Err(QhetError::Length("record shorter than one tone period".into()));
    }
    let (c, s) = fit_tone(&ts.samples, ts.sample_rate, omega, n_use);
    Ok((c, s, n_use as f64 / ts.sample_rate))
}

/// Probe bins and weights for χ at a tone: two bins on each side outside
/// the tone's leakage region, combined as the least-squares line through
/// them evaluated at the tone frequency.
pub fn noise_probe(
    fs: f64,
    cfg: &WelchConfig,
    omega: f64,
) -> Result<Vec<(usize, f64)>> {
    let len = cfg.segment_len;
    let pos = omega / (2.0 * std::f64::consts::PI) * len as f64 / fs;
    let hw = cfg.window.tone_half_width();
    let lo_tone = (pos.floor() as isize) - hw as isize;
    let hi_tone = (pos.ceil() as isize) + hw as isize;
    let bins = [lo_tone - 2, lo_tone - 1, hi_tone + 1, hi_tone + 2];
    if bins[0] < 1 || bins[3] as usize >= len / 2 {
        return Err(QhetError::Domain(format!(
            "tone at bin {pos:.2} leaves no clean neighbouring bins"
        )));
    }
    let xs: Vec<f64> = bins.iter().map(|&b| b as f64 - pos).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    // Line fit y = a + b·x evaluated at x = 0: weights 1/n − mx·(x_k − mx)/Sxx.
    Ok(bins
        .iter()
        .zip(&xs)
        .map(|(&b, &x)| (b as usize, 1.0 / n - mx * (x - mx) / sxx))
        .collect())
}

/// Everything a Monte-Carlo noise-figure measurement produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NfMeasurement {
    pub result: NoiseFigureResult,
    pub tone_power: f64,
    pub tone_power_std_err: f64,
    /// One-sided noise density at the beat frequency.
    pub chi: f64,
    pub chi_std_err: f64,
    pub nf_std_err_db: f64,
    pub seed: u64,
    pub psd: PsdEstimate,
}

pub fn measure_nf_detailed(
    ts: &TimeSeries,
    scenario: &Scenario,
    cfg: &WelchConfig,
) -> Result<NfMeasurement> {
    let omega = scenario.derive().omega_beat;
    let probe = noise_probe(ts.sample_rate, cfg, omega)?;
    let (psd, chi) = welch_with_probe(ts, cfg, &probe)?;
    if psd.n_segments < MIN_SEGMENTS_FOR_NF {
        return Err(QhetError::Length(format!(
            "{} Welch segments, need at least {MIN_SEGMENTS_FOR_NF}",
            psd.n_segments
        )));
    }
    let p = tone_power(ts, omega)?;
    let n_use = whole_period_samples(ts.len(), ts.sample_rate, omega);
    let t_obs = n_use as f64 / ts.sample_rate;
    // var(P̂) = 2·P·S/T for a tone in noise of one-sided density S.
    let p_err = (2.0 * p * chi.value / t_obs).sqrt();

    let snr_out = p / (chi.value * scenario.bandwidth());
    let result = NoiseFigureResult::new(snr_in(scenario), snr_out, Method::MonteCarlo);
    let rel = ((chi.std_err / chi.value).powi(2) + (p_err / p).powi(2)).sqrt();
    Ok(NfMeasurement {
        result,
        tone_power: p,
        tone_power_std_err: p_err,
        chi: chi.value,
        chi_std_err: chi.std_err,
        nf_std_err_db: 10.0 / std::f64::consts::LN_10 * rel,
        seed: ts.seed,
        psd,
    })
}

/// Noise figure measured from a record with the default Welch settings.
pub fn measure_nf(ts: &TimeSeries, scenario: &Scenario) -> Result<NoiseFigureResult> {
    measure_nf_detailed(ts, scenario, &WelchConfig::default()).map(|m| m.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize_colored_noise, ConstantPsd};
    use std::f64::consts::PI;

    fn record(samples: Vec<f64>, fs: f64) -> TimeSeries {
        TimeSeries::new(fs, samples, 0, "test".into()).unwrap()
    }

    #[test]
    fn white_noise_level() {
        let ts = synthesize_colored_noise(&ConstantPsd(2.0), 1.0, 1 << 20, 3).unwrap();
        let cfg = WelchConfig {
            segment_len: 256,
            ..Default::default()
        };
        let est = welch_psd(&ts, &cfg).unwrap();
        let rms = (est.values[1..128].iter().map(|v| (v / 2.0 - 1.0).powi(2)).sum::<f64>() / 127.0).sqrt();
        assert!(rms < 0.05, "{rms}");
        assert!((est.integrated_power() / ts.variance() - 1.0).abs() < 0.02);
    }

    #[test]
    fn tone_parseval() {
        let (fs, len, amp) = (1.0, 256usize, 1.7);
        let f0 = 20.0 / len as f64;
        let ts = record((0..1 << 14).map(|k| amp * (2.0 * PI * f0 * k as f64 + 0.3).cos()).collect(), fs);
        let cfg = WelchConfig {
            segment_len: len,
            overlap: 0.5,
            window: Window::Rectangular,
        };
        let est = welch_psd(&ts, &cfg).unwrap();
        let p = est.integrated_power();
        assert!((p / (amp * amp / 2.0) - 1.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn zero_record() {
        let ts = record(vec![0.0; 4096], 1.0);
        let est = welch_psd(&ts, &WelchConfig { segment_len: 512, ..Default::default() }).unwrap();
        assert!(est.values.iter().all(|&v| v == 0.0));
        assert_eq!(tone_power(&ts, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn argument_errors() {
        let ts = record(vec![0.0; 1000], 1.0);
        assert!(matches!(welch_psd(&ts, &WelchConfig::default()), Err(QhetError::Length(_))));
        let bad = WelchConfig { segment_len: 100, overlap: 0.95, window: Window::Hann };
        assert!(matches!(welch_psd(&ts, &bad), Err(QhetError::Domain(_))));
        assert!("triangle".parse::<Window>().is_err());
        assert!(matches!(tone_power(&ts, 4.0), Err(QhetError::Domain(_))));
    }

    #[test]
    fn tone_power_rejects_other_frequencies() {
        let fs = 1.0;
        let n = 1 << 16;
        let a = 2.0;
        let w1 = 2.0 * PI * 0.1;
        let w2 = 2.0 * PI * 0.1 * 2f64.sqrt();
        let ts = record((0..n).map(|k| a * (w2 * k as f64).sin()).collect(), fs);
        let leak = tone_power(&ts, w1).unwrap();
        assert!(leak <= 0.01 * a * a / 2.0, "{leak}");
        let ts = record((0..n).map(|k| a * (w1 * k as f64 - 0.4).cos()).collect(), fs);
        assert!((tone_power(&ts, w1).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn probe_weights() {
        let cfg = WelchConfig::default();
        let fs = 1.0;
        let w = noise_probe(fs, &cfg, 2.0 * PI * 256.0 / 4096.0).unwrap();
        let bins: Vec<usize> = w.iter().map(|p| p.0).collect();
        assert_eq!(bins, vec![253, 254, 258, 259]);
        assert!(w.iter().all(|p| (p.1 - 0.25).abs() < 1e-12));
        let off = noise_probe(fs, &cfg, 2.0 * PI * 256.3 / 4096.0).unwrap();
        assert!((off.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(noise_probe(fs, &cfg, 2.0 * PI * 1.0 / 4096.0).is_err());
    }

    #[test]
    fn estimates_are_thread_count_independent() {
        let ts = synthesize_colored_noise(&ConstantPsd(1.0), 1.0, 1 << 17, 5).unwrap();
        let cfg = WelchConfig { segment_len: 512, ..Default::default() };
        let a = welch_psd(&ts, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| welch_psd(&ts, &cfg).unwrap());
        assert_eq!(a, b);
    }
}
