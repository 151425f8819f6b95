//! Physical constants, the validated detection scenario and its config format.
//!
//! A scenario file is UTF-8 text with one `key = value` per line and `#`
//! comments. Required keys: `omega_s`, `omega_l`, `alpha_s_mag`,
//! `epsilon_l`, `r`, `q`. Optional keys and their defaults:
//!
//! | key           | default              |
//! |---------------|----------------------|
//! | `omega_i`     | `2·omega_l − omega_s`|
//! | `theta_s`     | `0`                  |
//! | `theta_l`     | `0`                  |
//! | `bandwidth_B` | `1`                  |
//! | `unit_system` | `scaled`             |
//! | `delta_theta` | `−theta_s`           |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QhetError, Result};

/// Relative tolerance of the phase-matching condition ω_s + ω_i = 2ω_l.
pub const PHASE_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Scaled,
    Si,
}

impl UnitSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitSystem::Scaled => "scaled",
            UnitSystem::Si => "si",
        }
    }
}

impl std::str::FromStr for UnitSystem {
    type Err = QhetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled" => Ok(UnitSystem::Scaled),
            "si" => Ok(UnitSystem::Si),
            other => Err(QhetError::validation(
                "unit_system",
                format!("expected `scaled` or `si`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub epsilon0: f64,
    pub e_charge: f64,
}

impl PhysicalConstants {
    pub const fn scaled() -> Self {
        PhysicalConstants {
            hbar: 1.0,
            c: 1.0,
            epsilon0: 1.0,
            e_charge: 1.0,
        }
    }

    /// CODATA 2018 values.
    pub const fn si() -> Self {
        PhysicalConstants {
            hbar: 1.054_571_817e-34,
            c: 299_792_458.0,
            epsilon0: 8.854_187_812_8e-12,
            e_charge: 1.602_176_634e-19,
        }
    }

    pub fn for_units(units: UnitSystem) -> Self {
        match units {
            UnitSystem::Scaled => Self::scaled(),
            UnitSystem::Si => Self::si(),
        }
    }
}

/// A validated detection configuration. Immutable; use [`Scenario::to_builder`]
/// to derive a modified copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    omega_s: f64,
    omega_i: f64,
    omega_l: f64,
    alpha_s_mag: f64,
    theta_s: f64,
    epsilon_l: f64,
    theta_l: f64,
    r: f64,
    q: f64,
    bandwidth_b: f64,
    delta_theta: f64,
    unit_system: UnitSystem,
    constants: PhysicalConstants,
}

/// Quantities that follow from a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Beat angular frequency (ω_s − ω_i)/2.
    pub omega_beat: f64,
    /// Detector efficiency in units of (ħω_s)⁻¹.
    pub eta: f64,
    /// Amplifier power gain e^{2r}.
    pub gain: f64,
    /// η·c·ε₀·e²·ε_l², the two-sided shot-noise density.
    pub shot_level: f64,
}

impl Scenario {
    pub fn builder() -> ScenarioBuilder {
        ScenarioBuilder::default()
    }

    pub fn to_builder(&self) -> ScenarioBuilder {
        ScenarioBuilder {
            omega_s: Some(self.omega_s),
            omega_i: Some(self.omega_i),
            omega_l: Some(self.omega_l),
            alpha_s_mag: Some(self.alpha_s_mag),
            theta_s: self.theta_s,
            epsilon_l: Some(self.epsilon_l),
            theta_l: self.theta_l,
            r: Some(self.r),
            q: Some(self.q),
            bandwidth_b: self.bandwidth_b,
            delta_theta: Some(self.delta_theta),
            unit_system: self.unit_system,
        }
    }

    pub fn omega_s(&self) -> f64 {
        self.omega_s
    }
    pub fn omega_i(&self) -> f64 {
        self.omega_i
    }
    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }
    pub fn alpha_s_mag(&self) -> f64 {
        self.alpha_s_mag
    }
    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }
    pub fn epsilon_l(&self) -> f64 {
        self.epsilon_l
    }
    pub fn theta_l(&self) -> f64 {
        self.theta_l
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth_b
    }
    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }
    pub fn unit_system(&self) -> UnitSystem {
        self.unit_system
    }
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    /// Carrier ratio ω_l/ω_s.
    pub fn carrier_ratio(&self) -> f64 {
        self.omega_l / self.omega_s
    }

    pub fn derive(&self) -> DerivedParams {
        let k = &self.constants;
        let eta = self.q / (k.hbar * self.omega_s);
        DerivedParams {
            omega_beat: 0.5 * (self.omega_s - self.omega_i),
            eta,
            gain: (2.0 * self.r).exp(),
            shot_level: eta * k.c * k.epsilon0 * k.e_charge.powi(2) * self.epsilon_l.powi(2),
        }
    }

    /// Canonical config text. Every field is written explicitly, so
    /// `load_scenario(&s.serialize())` reproduces `s` field for field.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: f64| {
            let _ = writeln!(out, "{k} = {}", fmt_num(v));
        };
        put("omega_s", self.omega_s);
        put("omega_i", self.omega_i);
        put("omega_l", self.omega_l);
        put("alpha_s_mag", self.alpha_s_mag);
        put("theta_s", self.theta_s);
        put("epsilon_l", self.epsilon_l);
        put("theta_l", self.theta_l);
        put("r", self.r);
        put("q", self.q);
        put("bandwidth_B", self.bandwidth_b);
        put("delta_theta", self.delta_theta);
        let _ = writeln!(out, "unit_system = {}", self.unit_system.as_str());
        out
    }

    /// Short hex digest of the canonical text; used as provenance in outputs.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.serialize().as_bytes());
        hex::encode(&h[..8])
    }
}

impl Default for Scenario {
    /// Optical-carrier heterodyne regime: ω_l = 10¹⁵, Ω = 1, so that
    /// |ω_l − ω_s|/ω_l = 10⁻¹⁵. ε_l is chosen so the shot level is ≈ 1.
    fn default() -> Self {
        ScenarioBuilder::default()
            .build()
            .expect("default scenario is valid")
    }
}

/// Number formatting that round-trips through `str::parse::<f64>`.
pub(crate) fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    omega_s: Option<f64>,
    omega_i: Option<f64>,
    omega_l: Option<f64>,
    alpha_s_mag: Option<f64>,
    theta_s: f64,
    epsilon_l: Option<f64>,
    theta_l: f64,
    r: Option<f64>,
    q: Option<f64>,
    bandwidth_b: f64,
    delta_theta: Option<f64>,
    unit_system: UnitSystem,
}

impl Default for ScenarioBuilder {
    fn default() -> Self {
        ScenarioBuilder {
            omega_s: Some(1e15 + 1.0),
            omega_i: None,
            omega_l: Some(1e15),
            alpha_s_mag: Some(1e8),
            theta_s: 0.0,
            epsilon_l: Some(1e15f64.sqrt()),
            theta_l: 0.0,
            r: Some(1.0),
            q: Some(1.0),
            bandwidth_b: 1.0,
            delta_theta: None,
            unit_system: UnitSystem::Scaled,
        }
    }
}

impl ScenarioBuilder {
    /// A builder with no required field set; used by the config parser.
    fn empty() -> Self {
        ScenarioBuilder {
            omega_s: None,
            omega_i: None,
            omega_l: None,
            alpha_s_mag: None,
            theta_s: 0.0,
            epsilon_l: None,
            theta_l: 0.0,
            r: None,
            q: None,
            bandwidth_b: 1.0,
            delta_theta: None,
            unit_system: UnitSystem::Scaled,
        }
    }

    /// Sets the signal frequency. A previously derived or explicit ω_i is
    /// dropped so that it is re-derived from phase matching.
    pub fn omega_s(mut self, v: f64) -> Self {
        self.omega_s = Some(v);
        self.omega_i = None;
        self
    }
    pub fn omega_i(mut self, v: f64) -> Self {
        self.omega_i = Some(v);
        self
    }
    pub fn omega_l(mut self, v: f64) -> Self {
        self.omega_l = Some(v);
        self.omega_i = None;
        self
    }
    pub fn alpha_s_mag(mut self, v: f64) -> Self {
        self.alpha_s_mag = Some(v);
        self
    }
    /// Sets θ_s. Unless Δθ was set explicitly afterwards, Δθ follows as −θ_s.
    pub fn theta_s(mut self, v: f64) -> Self {
        self.theta_s = v;
        self.delta_theta = None;
        self
    }
    pub fn epsilon_l(mut self, v: f64) -> Self {
        self.epsilon_l = Some(v);
        self
    }
    pub fn theta_l(mut self, v: f64) -> Self {
        self.theta_l = v;
        self
    }
    pub fn r(mut self, v: f64) -> Self {
        self.r = Some(v);
        self
    }
    /// Sets r from an amplifier power gain in dB (G = e^{2r}).
    pub fn gain_db(self, db: f64) -> Self {
        self.r(db * std::f64::consts::LN_10 / 20.0)
    }
    pub fn q(mut self, v: f64) -> Self {
        self.q = Some(v);
        self
    }
    pub fn bandwidth(mut self, v: f64) -> Self {
        self.bandwidth_b = v;
        self
    }
    pub fn delta_theta(mut self, v: f64) -> Self {
        self.delta_theta = Some(v);
        self
    }
    pub fn unit_system(mut self, u: UnitSystem) -> Self {
        self.unit_system = u;
        self
    }

    /// Sets a field by its config-file key.
    pub fn set(self, key: &str, value: &str) -> Result<Self> {
        if key == "unit_system" {
            return Ok(self.unit_system(value.parse()?));
        }
        let v: f64 = value.trim().parse().map_err(|_| {
            QhetError::validation(key, format!("`{value}` is not a number"))
        })?;
        Ok(match key {
            "omega_s" => self.omega_s(v),
            "omega_i" => self.omega_i(v),
            "omega_l" => self.omega_l(v),
            "alpha_s_mag" => self.alpha_s_mag(v),
            "theta_s" => self.theta_s(v),
            "epsilon_l" => self.epsilon_l(v),
            "theta_l" => self.theta_l(v),
            "r" => self.r(v),
            "gain_db" => self.gain_db(v),
            "q" => self.q(v),
            "bandwidth_B" => self.bandwidth(v),
            "delta_theta" => self.delta_theta(v),
            other => return Err(QhetError::validation(other, "unknown key")),
        })
    }

    pub fn build(self) -> Result<Scenario> {
        fn req(v: Option<f64>, key: &str) -> Result<f64> {
            v.ok_or_else(|| QhetError::validation(key, "required key missing"))
        }
        let omega_s = req(self.omega_s, "omega_s")?;
        let omega_l = req(self.omega_l, "omega_l")?;
        let alpha_s_mag = req(self.alpha_s_mag, "alpha_s_mag")?;
        let epsilon_l = req(self.epsilon_l, "epsilon_l")?;
        let r = req(self.r, "r")?;
        let q = req(self.q, "q")?;
        let omega_i = self.omega_i.unwrap_or(2.0 * omega_l - omega_s);
        let delta_theta = self.delta_theta.unwrap_or(-self.theta_s);

        let finite = [
            ("omega_s", omega_s),
            ("omega_i", omega_i),
            ("omega_l", omega_l),
            ("alpha_s_mag", alpha_s_mag),
            ("theta_s", self.theta_s),
            ("epsilon_l", epsilon_l),
            ("theta_l", self.theta_l),
            ("r", r),
            ("q", q),
            ("bandwidth_B", self.bandwidth_b),
            ("delta_theta", delta_theta),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(QhetError::validation(k, "must be finite"));
            }
        }
        if omega_l <= 0.0 {
            return Err(QhetError::validation("omega_l", "must be > 0"));
        }
        if omega_i <= 0.0 {
            return Err(QhetError::validation("omega_i", "must be > 0"));
        }
        if omega_s <= omega_i {
            return Err(QhetError::validation("omega_s", "must exceed omega_i"));
        }
        if (omega_s + omega_i - 2.0 * omega_l).abs() > PHASE_MATCH_TOL * omega_l {
            return Err(QhetError::validation(
                "omega_i",
                "phase matching omega_s + omega_i = 2*omega_l violated",
            ));
        }
        if epsilon_l <= 0.0 {
            return Err(QhetError::validation("epsilon_l", "must be > 0"));
        }
        if alpha_s_mag < 0.0 {
            return Err(QhetError::validation("alpha_s_mag", "must be >= 0"));
        }
        if r < 0.0 {
            return Err(QhetError::validation("r", "must be >= 0"));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(QhetError::validation("q", "must lie in (0, 1]"));
        }
        if self.bandwidth_b <= 0.0 {
            return Err(QhetError::validation("bandwidth_B", "must be > 0"));
        }

        Ok(Scenario {
            omega_s,
            omega_i,
            omega_l,
            alpha_s_mag,
            theta_s: self.theta_s,
            epsilon_l,
            theta_l: self.theta_l,
            r,
            q,
            bandwidth_b: self.bandwidth_b,
            delta_theta,
            unit_system: self.unit_system,
            constants: PhysicalConstants::for_units(self.unit_system),
        })
    }
}

/// Parses `key = value` lines into an ordered map, rejecting malformed lines
/// and duplicate keys. Shared by the scenario and sweep file formats.
pub(crate) fn parse_kv(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| QhetError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(QhetError::Parse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if map.insert(k.to_string(), (line_no, v.to_string())).is_some() {
            return Err(QhetError::Parse {
                line: line_no,
                message: format!("duplicate key `{k}`"),
            });
        }
    }
    Ok(map)
}

const SCENARIO_KEYS: &[&str] = &[
    "omega_s",
    "omega_i",
    "omega_l",
    "alpha_s_mag",
    "theta_s",
    "epsilon_l",
    "theta_l",
    "r",
    "q",
    "bandwidth_B",
    "unit_system",
    "delta_theta",
];

/// Parses scenario config text.
pub fn load_scenario(config_text: &str) -> Result<Scenario> {
    let map = parse_kv(config_text)?;
    for (k, (line, _)) in &map {
        if !SCENARIO_KEYS.contains(&k.as_str()) {
            return Err(QhetError::Parse {
                line: *line,
                message: format!("unknown key `{k}`"),
            });
        }
    }
    // theta_s must be applied before delta_theta so an explicit Δθ wins.
    let mut b = ScenarioBuilder::empty();
    if let Some((_, v)) = map.get("theta_s") {
        b = b.set("theta_s", v)?;
    }
    for (k, (_, v)) in &map {
        if k != "theta_s" && k != "omega_i" {
            b = b.set(k, v)?;
        }
    }
    // omega_i last: setting omega_s/omega_l clears it.
    if let Some((_, v)) = map.get("omega_i") {
        b = b.set("omega_i", v)?;
    }
    b.build()
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    load_scenario(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASE: &str = "\
# worked example
omega_l = 1
omega_s = 1.001
q = 1
r = 0
epsilon_l = 1
alpha_s_mag = 1
theta_s = 0
theta_l = 0
bandwidth_B = 1
";

    #[test]
    fn image_frequency_is_derived() {
        let s = load_scenario(BASE).unwrap();
        assert!((s.omega_i() - 0.999).abs() < 1e-12);
    }

    #[test]
    fn efficiency_above_one_is_rejected() {
        let text = BASE.replace("q = 1", "q = 1.5");
        match load_scenario(&text) {
            Err(QhetError::Validation { key, .. }) => assert_eq!(key, "q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn broken_phase_matching_is_rejected() {
        let text = format!("{BASE}omega_i = 0.5\n");
        match load_scenario(&text) {
            Err(QhetError::Validation { key, .. }) => assert_eq!(key, "omega_i"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_lines() {
        assert!(matches!(
            load_scenario(&format!("{BASE}garbage\n")),
            Err(QhetError::Parse { line: 11, .. })
        ));
        assert!(matches!(
            load_scenario(&format!("{BASE}r = 2\n")),
            Err(QhetError::Parse { .. })
        ));
        assert!(matches!(
            load_scenario(&format!("{BASE}colour = red\n")),
            Err(QhetError::Parse { .. })
        ));
        let missing = BASE.replace("epsilon_l = 1\n", "");
        match load_scenario(&missing) {
            Err(QhetError::Validation { key, .. }) => assert_eq!(key, "epsilon_l"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn derived_quantities() {
        let s = load_scenario(BASE).unwrap();
        assert!((s.derive().omega_beat - 0.001).abs() < 1e-12);

        let s = s.to_builder().r(2f64.ln()).build().unwrap();
        assert!((s.derive().gain - 4.0).abs() < 1e-12);

        let s = Scenario::builder()
            .omega_l(0.9995)
            .omega_s(1.0)
            .q(0.5)
            .build()
            .unwrap();
        assert_eq!(s.derive().eta, 0.5);
        assert_eq!(s.to_builder().r(0.0).build().unwrap().derive().gain, 1.0);
    }

    #[test]
    fn delta_theta_follows_theta_s_unless_given() {
        let s = load_scenario(&BASE.replace("theta_s = 0", "theta_s = 0.3")).unwrap();
        assert_eq!(s.delta_theta(), -0.3);
        let s = load_scenario(&format!(
            "{}delta_theta = 1.25\n",
            BASE.replace("theta_s = 0", "theta_s = 0.3")
        ))
        .unwrap();
        assert_eq!(s.delta_theta(), 1.25);
    }

    #[test]
    fn si_units_are_selectable() {
        let s = load_scenario(&format!("{BASE}unit_system = si\n")).unwrap();
        assert_eq!(s.constants().c, 299_792_458.0);
        assert_eq!(Scenario::default().constants(), &PhysicalConstants::scaled());
    }

    #[test]
    fn default_scenario_is_optical_regime() {
        let s = Scenario::default();
        assert_eq!(s.derive().omega_beat, 1.0);
        assert!((s.carrier_ratio() - 1.0).abs() < 2e-15);
        assert!((s.derive().shot_level - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn serialize_round_trips(
            omega_l in 1e-3f64..1e12,
            frac in 1e-6f64..0.5,
            alpha in 0.0f64..1e6,
            theta_s in -10.0f64..10.0,
            theta_l in -10.0f64..10.0,
            eps in 1e-3f64..1e9,
            r in 0.0f64..8.0,
            q in 1e-3f64..=1.0,
            bw in 1e-6f64..1e6,
        ) {
            let s = Scenario::builder()
                .omega_l(omega_l)
                .omega_s(omega_l * (1.0 + frac))
                .alpha_s_mag(alpha)
                .theta_s(theta_s)
                .theta_l(theta_l)
                .epsilon_l(eps)
                .r(r)
                .q(q)
                .bandwidth(bw)
                .build()
                .unwrap();
            let back = load_scenario(&s.serialize()).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert!((s.omega_s() + s.omega_i() - 2.0 * s.omega_l()).abs() <= 1e-12 * s.omega_l());
            prop_assert_eq!(s.derive(), back.derive());
        }
    }
}
