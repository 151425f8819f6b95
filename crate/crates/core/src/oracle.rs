//! Detector observables computed from the Gaussian engine alone.
//!
//! The detected state is prepared as: coherent signal (phase Δθ) plus
//! image-band vacuum, two-mode squeezed by r, then a loss channel of
//! transmissivity q on both modes. The beat-quadrature moments are mapped to
//! photocurrent units with the same prefactors the closed forms use, so the
//! two routes can be compared number for number.

use serde::Serialize;

use crate::analytic::{snr_in, Method, NoiseFigureResult};
use crate::error::{QhetError, Result};
use crate::gaussian::{BeatStatistics, GaussianState};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleObservables {
    pub beat: BeatStatistics,
    /// Time-averaged J₋² of the mean beat.
    pub p_out: f64,
    /// One-sided noise density at the beat frequency.
    pub chi: f64,
    pub snr_out: f64,
}

pub fn detected_state(sc: &Scenario) -> Result<GaussianState> {
    GaussianState::vacuum(2)?
        .displace(0, sc.alpha_s_mag(), sc.delta_theta())?
        .two_mode_squeeze(sc.r(), 0, 1)?
        .loss_channel(0, sc.q())?
        .loss_channel(1, sc.q())
}

pub fn observables(sc: &Scenario) -> Result<OracleObservables> {
    let beat = detected_state(sc)?.heterodyne_beat_statistics(sc)?;
    let d = sc.derive();
    let k = sc.constants();
    // Photocurrent per unit beat quadrature; η already carries one factor q
    // and the loss channel a √q on the amplitude.
    let scale = k.c * k.e_charge * k.epsilon0 * d.eta * sc.epsilon_l() / sc.q().sqrt();
    let p_out = scale * scale * (beat.cos_mean.powi(2) + beat.sin_mean.powi(2)) / 2.0;
    // Vacuum gives cos_var = sin_var = 1, i.e. the one-sided shot floor.
    let chi = 2.0 * d.shot_level * 0.5 * (beat.cos_var + beat.sin_var);
    Ok(OracleObservables {
        beat,
        p_out,
        chi,
        snr_out: p_out / (chi * sc.bandwidth()),
    })
}

/// Relative tolerance for comparing oracle and closed-form values.
///
/// The congruence S·V·Sᵀ carries absolute round-off of order ε·e^{2r} in the
/// beat variance, so a deeply squeezed detected quadrature (variance near
/// e^{−2r}) cannot be resolved to better than that relative to its size.
pub fn comparison_tolerance(sc: &Scenario) -> f64 {
    let g = sc.derive().gain;
    let weight = 1.0 - sc.q() + sc.q() * crate::analytic::quadrature_weight(sc);
    1e-9 + 64.0 * f64::EPSILON * g / weight
}

pub fn noise_figure(sc: &Scenario) -> Result<NoiseFigureResult> {
    if sc.alpha_s_mag() <= 0.0 {
        return Err(QhetError::Domain(
            "noise figure undefined without a signal (alpha_s_mag = 0)".into(),
        ));
    }
    let obs = observables(sc)?;
    Ok(NoiseFigureResult::new(snr_in(sc), obs.snr_out, Method::Oracle))
}
