//! Gaussian states of discrete optical modes.
//!
//! Quadratures are ordered (x₁, p₁, …, x_N, p_N) with x = (a + a†)/√2 and
//! p = (a − a†)/(i√2); the vacuum covariance is I/2. The engine serves as a
//! brute-force oracle for the closed forms in [`crate::analytic`]: every
//! moment here comes from matrix congruence, not from the Bogoliubov algebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QhetError, Result};
use crate::scenario::Scenario;

/// Tolerance of the symplectic condition S·J·Sᵀ = J.
pub const SYMPLECTIC_TOL: f64 = 1e-12;
/// Smallest eigenvalue of cov + (i/2)·J accepted as physical.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

/// Standard symplectic form ⊕ [[0, 1], [−1, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SymplecticTransform {
    pub matrix: DMatrix<f64>,
    pub label: String,
}

impl SymplecticTransform {
    /// Two-mode squeezer acting as b_a = a_a cosh r + a_b† sinh r,
    /// b_b = a_a† sinh r + a_b cosh r (real squeeze parameter).
    pub fn two_mode_squeeze(n_modes: usize, r: f64, mode_a: usize, mode_b: usize) -> Self {
        let (c, s) = (r.cosh(), r.sinh());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (xa, pa, xb, pb) = (2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1);
        m[(xa, xa)] = c;
        m[(xa, xb)] = s;
        m[(pa, pa)] = c;
        m[(pa, pb)] = -s;
        m[(xb, xa)] = s;
        m[(xb, xb)] = c;
        m[(pb, pa)] = -s;
        m[(pb, pb)] = c;
        SymplecticTransform {
            matrix: m,
            label: format!("tms(r={r}, {mode_a}, {mode_b})"),
        }
    }

    /// Largest entrywise deviation of S·J·Sᵀ from J.
    pub fn symplectic_defect(&self) -> f64 {
        let n = self.matrix.nrows() / 2;
        let j = symplectic_form(n);
        let sjs = &self.matrix * &j * self.matrix.transpose();
        (sjs - j).amax()
    }

    pub fn is_symplectic(&self) -> bool {
        // Scale by ‖S‖² so large r keeps a relative check.
        let scale = self.matrix.amax().powi(2).max(1.0);
        self.symplectic_defect() <= SYMPLECTIC_TOL * scale
    }
}

/// Fluctuation moments of the positive-frequency field amplitudes i·b̂ of a
/// (signal, image) mode pair.
///
/// The factor i is the one carried by the field expansion, so
/// `m_cross = ⟨(iΔb̂_s)(iΔb̂_i)⟩ = −⟨Δb̂_s Δb̂_i⟩`; number-like moments are
/// unaffected by it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeMoments {
    pub n_sig: f64,
    pub n_img: f64,
    pub m_cross: Complex64,
    pub m_self_sig: Complex64,
}

impl ModeMoments {
    pub fn satisfies_physicality_bound(&self) -> bool {
        self.n_sig >= -1e-12
            && self.n_img >= -1e-12
            && self.m_cross.norm_sqr()
                <= self.n_sig * self.n_img + self.n_sig.max(self.n_img) + 0.25 + 1e-9
    }
}

/// Means and variances of the two beat quadratures of the differential
/// photocurrent, in units where one vacuum mode contributes 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeatStatistics {
    /// Mean of the quadrature multiplying cos(Ωt − Δθ).
    pub cos_mean: f64,
    /// Mean of the quadrature multiplying sin(Ωt − Δθ).
    pub sin_mean: f64,
    pub cos_var: f64,
    pub sin_var: f64,
}

#[derive(Serialize)]
struct StateDump<'a> {
    n_modes: usize,
    mean: &'a [f64],
    cov: Vec<f64>,
}

impl GaussianState {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(QhetError::Domain("a state needs at least one mode".into()));
        }
        Ok(GaussianState {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(QhetError::Index {
                index: mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    /// Coherent displacement ⟨â⟩ += amp·e^{i·phase}.
    pub fn displace(&self, mode: usize, amp_mag: f64, phase: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if amp_mag < 0.0 {
            return Err(QhetError::Domain("displacement amplitude must be >= 0".into()));
        }
        let mut out = self.clone();
        out.mean[2 * mode] += std::f64::consts::SQRT_2 * amp_mag * phase.cos();
        out.mean[2 * mode + 1] += std::f64::consts::SQRT_2 * amp_mag * phase.sin();
        Ok(out)
    }

    pub fn apply(&self, s: &SymplecticTransform) -> Result<Self> {
        if s.matrix.nrows() != 2 * self.n_modes || s.matrix.ncols() != 2 * self.n_modes {
            return Err(QhetError::Shape(format!(
                "transform `{}` is {}x{}, state has {} modes",
                s.label,
                s.matrix.nrows(),
                s.matrix.ncols(),
                self.n_modes
            )));
        }
        Ok(GaussianState {
            n_modes: self.n_modes,
            mean: &s.matrix * &self.mean,
            cov: &s.matrix * &self.cov * s.matrix.transpose(),
        })
    }

    pub fn two_mode_squeeze(&self, r: f64, mode_a: usize, mode_b: usize) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(QhetError::Domain("two-mode squeezing needs distinct modes".into()));
        }
        if !(r >= 0.0) {
            return Err(QhetError::Domain("squeeze parameter must be >= 0".into()));
        }
        let s = SymplecticTransform::two_mode_squeeze(self.n_modes, r, mode_a, mode_b);
        debug_assert!(s.is_symplectic(), "{} fails S J S^T = J", s.label);
        self.apply(&s)
    }

    /// Pure-loss (beamsplitter) channel of transmissivity q on one mode.
    pub fn loss_channel(&self, mode: usize, q: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !(q > 0.0 && q <= 1.0) {
            return Err(QhetError::Domain(format!("transmissivity {q} outside (0, 1]")));
        }
        let t = q.sqrt();
        let mut out = self.clone();
        let (x, p) = (2 * mode, 2 * mode + 1);
        out.mean[x] *= t;
        out.mean[p] *= t;
        for k in 0..2 * self.n_modes {
            for idx in [x, p] {
                out.cov[(idx, k)] *= t;
                out.cov[(k, idx)] *= t;
            }
        }
        out.cov[(x, x)] += (1.0 - q) * 0.5;
        out.cov[(p, p)] += (1.0 - q) * 0.5;
        Ok(out)
    }

    pub fn mode_moments(&self, mode_a: usize, mode_b: usize) -> Result<ModeMoments> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(QhetError::Domain("moments need two distinct modes".into()));
        }
        let v = &self.cov;
        let (xa, pa, xb, pb) = (2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1);
        // Symmetric-ordered covariances; the −1/2 is the commutator
        // correction from ⟨(b†b + bb†)/2⟩ to normal order.
        let n_sig = 0.5 * (v[(xa, xa)] + v[(pa, pa)]) - 0.5;
        let n_img = 0.5 * (v[(xb, xb)] + v[(pb, pb)]) - 0.5;
        let bb_sig = Complex64::new(
            0.5 * (v[(xa, xa)] - v[(pa, pa)]),
            v[(xa, pa)],
        );
        let b_sig_b_img = Complex64::new(
            0.5 * (v[(xa, xb)] - v[(pa, pb)]),
            0.5 * (v[(xa, pb)] + v[(pa, xb)]),
        );
        Ok(ModeMoments {
            n_sig,
            n_img,
            m_cross: -b_sig_b_img,
            m_self_sig: -bb_sig,
        })
    }

    /// Statistics of the beat quadratures for a (signal, image) state,
    /// demodulated against the scenario's LO phase θ_l and reference Δθ.
    ///
    /// The photocurrent is proportional to Re[Ĉ e^{−i(Ωt−Δθ)}] with
    /// Ĉ = e^{−iΔθ}(e^{−iθ_l} b̂_s + e^{iθ_l} b̂_i†); the reported
    /// quadratures are √2·Re Ĉ and √2·Im Ĉ.
    pub fn heterodyne_beat_statistics(&self, scenario: &Scenario) -> Result<BeatStatistics> {
        if self.n_modes != 2 {
            return Err(QhetError::Shape(format!(
                "beat statistics need exactly 2 modes, state has {}",
                self.n_modes
            )));
        }
        let phi = scenario.theta_l() + scenario.delta_theta();
        let psi = scenario.theta_l() - scenario.delta_theta();
        let g_cos = DVector::from_vec(vec![phi.cos(), phi.sin(), psi.cos(), psi.sin()]);
        let g_sin = DVector::from_vec(vec![-phi.sin(), phi.cos(), psi.sin(), -psi.cos()]);
        Ok(BeatStatistics {
            cos_mean: g_cos.dot(&self.mean),
            sin_mean: g_sin.dot(&self.mean),
            cos_var: (g_cos.transpose() * &self.cov * &g_cos)[(0, 0)],
            sin_var: (g_sin.transpose() * &self.cov * &g_sin)[(0, 0)],
        })
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.cov - self.cov.transpose()).amax()
    }

    /// Smallest eigenvalue of the Hermitian matrix cov + (i/2)·J.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        let j = symplectic_form(self.n_modes);
        let m = DMatrix::from_fn(self.cov.nrows(), self.cov.ncols(), |r, c| {
            Complex64::new(self.cov[(r, c)], 0.5 * j[(r, c)])
        });
        m.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self) -> bool {
        self.symmetry_defect() <= 1e-12 && self.min_uncertainty_eigenvalue() >= -UNCERTAINTY_TOL
    }

    /// det(2·cov); equals 1 for pure states.
    pub fn purity_determinant(&self) -> f64 {
        (&self.cov * 2.0).determinant()
    }

    /// Debug dump: mean array and row-major covariance.
    pub fn to_json(&self) -> String {
        let dump = StateDump {
            n_modes: self.n_modes,
            mean: self.mean.as_slice(),
            cov: self.cov.transpose().as_slice().to_vec(),
        };
        serde_json::to_string(&dump).expect("state serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmsv(r: f64) -> GaussianState {
        GaussianState::vacuum(2)
            .unwrap()
            .two_mode_squeeze(r, 0, 1)
            .unwrap()
    }

    #[test]
    fn vacuum_convention() {
        let v = GaussianState::vacuum(2).unwrap();
        assert!(v.mean().iter().all(|&m| m == 0.0));
        assert_eq!(v.cov(), &(DMatrix::identity(4, 4) * 0.5));
        assert_eq!(
            GaussianState::vacuum(1).unwrap().cov(),
            &(DMatrix::identity(2, 2) * 0.5)
        );
        assert!(GaussianState::vacuum(0).is_err());
    }

    #[test]
    fn displacement() {
        let v = GaussianState::vacuum(1).unwrap();
        let d = v.displace(0, 1.0, 0.0).unwrap();
        assert!((d.mean()[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.mean()[1], 0.0);
        assert_eq!(d.cov(), v.cov());
        assert_eq!(v.displace(0, 0.0, 1.3).unwrap(), v);
        let d = v.displace(0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(d.mean()[0].abs() < 1e-15);
        assert!((d.mean()[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(v.displace(1, 1.0, 0.0), Err(QhetError::Index { .. })));
    }

    #[test]
    fn squeezed_vacuum_covariance() {
        // sinh r = 1: cosh 2r = 3, sinh 2r = 2√2.
        let r = (1.0 + 2f64.sqrt()).ln();
        let s = tmsv(r);
        let c = s.cov();
        for k in 0..4 {
            assert!((c[(k, k)] - 1.5).abs() < 1e-12);
        }
        assert!((c[(0, 2)] - 1.414_213_56).abs() < 1e-8);
        assert!((c[(1, 3)] + 1.414_213_56).abs() < 1e-8);
        assert!(c[(0, 1)].abs() < 1e-15 && c[(0, 3)].abs() < 1e-15);
        assert_eq!(GaussianState::vacuum(2).unwrap().two_mode_squeeze(0.0, 0, 1).unwrap(),
            GaussianState::vacuum(2).unwrap());
    }

    #[test]
    fn squeezing_a_coherent_signal() {
        let s = GaussianState::vacuum(2)
            .unwrap()
            .displace(0, 1.0, 0.0)
            .unwrap()
            .two_mode_squeeze(2f64.ln(), 0, 1)
            .unwrap();
        assert!((s.mean()[0] - 1.767_766_95).abs() < 1e-8);
        assert!((s.mean()[2] - 1.060_660_17).abs() < 1e-8);
        assert!(GaussianState::vacuum(2).unwrap().two_mode_squeeze(1.0, 1, 1).is_err());
    }

    #[test]
    fn loss_channel_cases() {
        let v = GaussianState::vacuum(2).unwrap();
        for q in [0.1, 0.5, 0.9] {
            let l = v.loss_channel(1, q).unwrap();
            assert!((l.cov() - v.cov()).amax() < 1e-15);
            assert_eq!(l.mean(), v.mean());
        }
        let s = tmsv(0.7);
        assert_eq!(s.loss_channel(0, 1.0).unwrap(), s);
        let var = s.cov()[(0, 0)];
        let l = s.loss_channel(0, 0.5).unwrap();
        assert!((l.cov()[(0, 0)] - (0.5 * var + 0.25)).abs() < 1e-15);
        assert!(matches!(s.loss_channel(0, 0.0), Err(QhetError::Domain(_))));
        assert!(matches!(s.loss_channel(0, 1.2), Err(QhetError::Domain(_))));
    }

    #[test]
    fn moments_of_squeezed_vacuum() {
        let m = GaussianState::vacuum(2).unwrap().mode_moments(0, 1).unwrap();
        assert_eq!((m.n_sig, m.n_img), (0.0, 0.0));
        assert_eq!(m.m_cross.norm(), 0.0);

        let r = 2f64.ln();
        let m = tmsv(r).mode_moments(0, 1).unwrap();
        assert!((m.n_sig - 0.5625).abs() < 1e-12);
        assert!((m.m_cross.re + r.sinh() * r.cosh()).abs() < 1e-12);
        assert!(m.m_self_sig.norm() < 1e-15);
        assert!(m.satisfies_physicality_bound());
    }

    #[test]
    fn image_band_doubles_beat_noise() {
        let sc = Scenario::default().to_builder().r(0.0).build().unwrap();
        let st = GaussianState::vacuum(2)
            .unwrap()
            .displace(0, 3.0, sc.delta_theta())
            .unwrap();
        let b = st.heterodyne_beat_statistics(&sc).unwrap();
        assert!((b.cos_var - 1.0).abs() < 1e-12);
        assert!((b.sin_var - 1.0).abs() < 1e-12);
        // A single mode alone contributes half of that.
        let single = GaussianState::vacuum(1).unwrap();
        assert!((single.cov()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(GaussianState::vacuum(3)
            .unwrap()
            .heterodyne_beat_statistics(&sc)
            .is_err());
    }

    #[test]
    fn beat_means_follow_quadrature_gain() {
        let sc = Scenario::default();
        let r = 0.8;
        let run = |r: f64, theta_l: f64| {
            let sc = sc.to_builder().r(r).theta_l(theta_l).build().unwrap();
            GaussianState::vacuum(2)
                .unwrap()
                .displace(0, 1.0, sc.delta_theta())
                .unwrap()
                .two_mode_squeeze(r, 0, 1)
                .unwrap()
                .heterodyne_beat_statistics(&sc)
                .unwrap()
        };
        let base = run(0.0, 0.0);
        let amp = run(r, 0.0);
        assert!((amp.cos_mean / base.cos_mean - r.exp()).abs() < 1e-12);
        let base = run(0.0, std::f64::consts::FRAC_PI_2);
        let de = run(r, std::f64::consts::FRAC_PI_2);
        assert!((de.sin_mean / base.sin_mean - (-r).exp()).abs() < 1e-12);

        let dark = sc.to_builder().alpha_s_mag(0.0).build().unwrap();
        let b = tmsv(1.3).heterodyne_beat_statistics(&dark).unwrap();
        assert_eq!((b.cos_mean, b.sin_mean), (0.0, 0.0));
    }

    #[test]
    fn json_dump_is_row_major() {
        let s = tmsv(0.3).displace(0, 1.0, 0.2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["n_modes"], 2);
        assert_eq!(v["cov"].as_array().unwrap().len(), 16);
        assert_eq!(v["cov"][2].as_f64().unwrap(), s.cov()[(0, 2)]);
    }

    proptest! {
        #[test]
        fn squeezers_are_symplectic(r in prop::sample::select(vec![0.0, 0.1, 1.0, 5.0])) {
            let s = SymplecticTransform::two_mode_squeeze(2, r, 0, 1);
            prop_assert!(s.symplectic_defect() <= 1e-12 * s.matrix.amax().powi(2).max(1.0));
            let s3 = SymplecticTransform::two_mode_squeeze(3, r, 2, 0);
            prop_assert!(s3.is_symplectic());
        }

        #[test]
        fn operation_sequences_stay_physical(
            ops in prop::collection::vec((0u8..3, 0.0f64..0.4, 0.0f64..6.3, 0.05f64..=1.0), 1..8)
        ) {
            let mut st = GaussianState::vacuum(2).unwrap();
            let mut unitary_only = true;
            for (kind, x, ph, q) in ops {
                st = match kind {
                    0 => st.displace((ph > 3.0) as usize, 5.0 * x, ph).unwrap(),
                    1 => st.two_mode_squeeze(x, 0, 1).unwrap(),
                    _ => { unitary_only = false; st.loss_channel((ph > 3.0) as usize, q).unwrap() }
                };
                prop_assert!(st.is_physical());
            }
            if unitary_only {
                prop_assert!((st.purity_determinant() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn squeezed_moments_match_closed_form(r in 0.0f64..=5.0) {
            let m = tmsv(r).mode_moments(0, 1).unwrap();
            let (sh, ch) = (r.sinh(), r.cosh());
            let scale = (ch * ch).max(1.0);
            prop_assert!((m.n_sig - sh * sh).abs() <= 1e-12 * scale);
            prop_assert!((m.n_img - sh * sh).abs() <= 1e-12 * scale);
            prop_assert!((m.m_cross.re + sh * ch).abs() <= 1e-12 * scale);
            prop_assert!(m.m_cross.im.abs() <= 1e-12 * scale);
            prop_assert!(m.m_self_sig.norm() <= 1e-12 * scale);
        }

        #[test]
        fn losses_compose(q1 in 0.01f64..=1.0, q2 in 0.01f64..=1.0, r in 0.0f64..2.0) {
            let st = tmsv(r).displace(0, 1.5, 0.4).unwrap();
            let a = st.loss_channel(0, q1).unwrap().loss_channel(0, q2).unwrap();
            let b = st.loss_channel(0, q1 * q2).unwrap();
            prop_assert!((a.mean() - b.mean()).amax() <= 1e-12);
            prop_assert!((a.cov() - b.cov()).amax() <= 1e-12);
        }

        #[test]
        fn amplified_quadrature_ignores_signal_phase(theta_s in -6.3f64..6.3, r in 0.0f64..3.0) {
            let sc0 = Scenario::default().to_builder().r(r).build().unwrap();
            let sc = sc0.to_builder().theta_s(theta_s).build().unwrap();
            let mean = |sc: &Scenario| GaussianState::vacuum(2).unwrap()
                .displace(0, 1.0, sc.delta_theta()).unwrap()
                .two_mode_squeeze(r, 0, 1).unwrap()
                .heterodyne_beat_statistics(sc).unwrap();
            let (a, b) = (mean(&sc0), mean(&sc));
            prop_assert!((a.cos_mean - b.cos_mean).abs() <= 1e-12 * a.cos_mean.abs().max(1.0));
            prop_assert!(b.sin_mean.abs() <= 1e-12 * a.cos_mean.abs().max(1.0));
        }
    }
}
