//! Scenario parameters and the TOML loader.
//!
//! Everything downstream (path loss, SDE engine, channel assembly, link
//! harness) consumes the validated types defined here. Validation is eager:
//! a parsed config either satisfies every invariant or loading fails with an
//! error naming the offending field. All values are stored in SI units; the
//! file format accepts the customary units (GHz, MHz, dBm, dB, km/h, ms) via
//! unit-suffixed key names.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Propagation speed (m/s), fixed by convention for the whole model.
pub const PROPAGATION_SPEED: f64 = 2.998e8;

/// Relative tolerance for the derived-parameter consistency identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Which expression defines the diffuse per-component scale σ.
///
/// `UnitPower` uses σ² = 1/(2μ(1+K)), the only choice under which the total
/// mean power V1² + V2² + ΣU_i² + 2μσ² equals one. `Quartic` keeps the
/// alternative σ = (2μ(1+K))^(-1/4) form for reproduction studies; it breaks
/// unit-power normalization but still satisfies the K and Δ identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaFormula {
    #[default]
    UnitPower,
    Quartic,
}

/// Macro-parameters of the multi-cluster fluctuating two-ray fading model.
#[derive(Debug, Clone, PartialEq)]
pub struct MftrParams {
    /// Specular-to-diffuse power ratio, K > 0.
    pub k: f64,
    /// Specular similarity index, Δ ∈ [0, 1].
    pub delta: f64,
    /// Number of multipath clusters, μ ≥ 1.
    pub mu: usize,
    /// Shadowing severity, m ≥ 1 (keeps the square-root diffusion away from
    /// its boundary).
    pub m: f64,
    /// Optional extra specular amplitudes, one per cluster (defaults to all
    /// zero; cluster 1 is the two-ray cluster).
    pub u: Vec<f64>,
    pub sigma_formula: SigmaFormula,
}

impl MftrParams {
    /// Plain parameter set with U = 0 and the unit-power σ.
    pub fn new(k: f64, delta: f64, mu: usize, m: f64) -> Self {
        MftrParams {
            k,
            delta,
            mu,
            m,
            u: vec![0.0; mu],
            sigma_formula: SigmaFormula::UnitPower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::config("mftr.k", format!("must be > 0, got {}", self.k)));
        }
        if !(self.delta.is_finite() && (0.0..=1.0).contains(&self.delta)) {
            return Err(Error::config(
                "mftr.delta",
                format!("must lie in [0, 1], got {}", self.delta),
            ));
        }
        if self.mu < 1 {
            return Err(Error::config("mftr.mu", "must be an integer >= 1"));
        }
        if !(self.m.is_finite() && self.m >= 1.0) {
            return Err(Error::config(
                "mftr.m",
                format!("must be >= 1 (square-root diffusion boundary condition), got {}", self.m),
            ));
        }
        if self.u.len() != self.mu {
            return Err(Error::config(
                "mftr.u",
                format!("needs one amplitude per cluster: expected {}, got {}", self.mu, self.u.len()),
            ));
        }
        if self.u.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("mftr.u", "amplitudes must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Macro-parameters plus the derived quantities everything else consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct MftrModel {
    pub params: MftrParams,
    /// Per-component diffuse scale σ.
    pub sigma: f64,
    /// Dominant specular amplitudes of cluster 1.
    pub v1: f64,
    pub v2: f64,
    /// Power normalization constant √(V1² + V2² + 2μσ²).
    pub norm: f64,
}

/// Derives σ, V1, V2 (and the normalization constant) from the
/// macro-parameters.
///
/// With U = 0 this reduces to V1,2 = √(σ²μK(1 ± √(1−Δ²))). Nonzero U is
/// folded back through the defining identities K = (V1²+V2²+ΣU²)/(2σ²μ) and
/// Δ = 2V1V2/(V1²+V2²+ΣU²), which stay exact by construction.
pub fn derive_secondary_params(p: &MftrParams) -> Result<MftrModel> {
    p.validate()?;
    let mu = p.mu as f64;
    let sigma2 = match p.sigma_formula {
        SigmaFormula::UnitPower => 1.0 / (2.0 * mu * (1.0 + p.k)),
        SigmaFormula::Quartic => 1.0 / (2.0 * mu * (1.0 + p.k)).sqrt(),
    };
    let spec_power = 2.0 * sigma2 * mu * p.k; // V1² + V2² + ΣU²
    let u2: f64 = p.u.iter().map(|v| v * v).sum();
    if u2 >= spec_power {
        return Err(Error::config(
            "mftr.u",
            format!(
                "ΣU² = {u2:.6e} exhausts the specular power budget 2σ²μK = {spec_power:.6e}"
            ),
        ));
    }
    let pair_power = spec_power - u2; // V1² + V2²
    let cross = p.delta * spec_power; // 2 V1 V2
    if cross > pair_power * (1.0 + 1e-12) {
        return Err(Error::config(
            "mftr.delta",
            "no real V1, V2 satisfy the similarity identity with these U amplitudes",
        ));
    }
    let disc = (pair_power * pair_power - cross * cross).max(0.0).sqrt();
    let v1 = ((pair_power + disc) / 2.0).sqrt();
    let v2 = ((pair_power - disc) / 2.0).sqrt();
    let norm = (v1 * v1 + v2 * v2 + 2.0 * mu * sigma2).sqrt();
    Ok(MftrModel {
        params: p.clone(),
        sigma: sigma2.sqrt(),
        v1,
        v2,
        norm,
    })
}

impl MftrModel {
    /// Total mean envelope power V1² + V2² + ΣU² + 2μσ².
    pub fn mean_power(&self) -> f64 {
        let u2: f64 = self.params.u.iter().map(|v| v * v).sum();
        self.v1 * self.v1 + self.v2 * self.v2 + u2 + 2.0 * self.params.mu as f64 * self.sigma * self.sigma
    }
}

/// Antenna geometry and radio-frequency settings, all SI after loading.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRadioParams {
    /// Transmitter / receiver / effective duct heights (m).
    pub h_t: f64,
    pub h_r: f64,
    pub h_e: f64,
    /// Start of the two-ray region (m).
    pub d0: f64,
    /// Earth curvature radius (m). 6.371e6 geometric, 8.495e6 for the
    /// 4/3-effective-radius convention.
    pub r_earth: f64,
    /// Carrier, maximum Doppler and sampling frequencies (Hz).
    pub f_c: f64,
    pub f_d: f64,
    pub f_s: f64,
    /// Transmit and noise powers (dBm).
    pub p_t_dbm: f64,
    pub p_w_dbm: f64,
    /// Antenna gains (dB).
    pub g_t_db: f64,
    pub g_r_db: f64,
    /// Platform speed (m/s).
    pub v: f64,
}

impl GeometryRadioParams {
    pub fn lambda(&self) -> f64 {
        PROPAGATION_SPEED / self.f_c
    }

    /// Two-ray breakpoint distance 4 h_t h_r / λ (m).
    pub fn d_break(&self) -> f64 {
        4.0 * self.h_t * self.h_r / self.lambda()
    }

    /// Line-of-sight horizon √(h_t² + 2 h_t R) + √(h_r² + 2 h_r R) (m).
    pub fn d_los(&self) -> f64 {
        (self.h_t * self.h_t + 2.0 * self.h_t * self.r_earth).sqrt()
            + (self.h_r * self.h_r + 2.0 * self.h_r * self.r_earth).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("geometry.h_t_m", self.h_t),
            ("geometry.h_r_m", self.h_r),
            ("geometry.h_e_m", self.h_e),
            ("geometry.d0_m", self.d0),
            ("geometry.r_earth_m", self.r_earth),
            ("radio.f_c_ghz", self.f_c),
            ("radio.f_s_mhz", self.f_s),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(name, format!("must be > 0, got {value}")));
            }
        }
        if !(self.f_d.is_finite() && self.f_d >= 0.0) {
            return Err(Error::config("radio.f_d_hz", "must be >= 0"));
        }
        if !(self.v.is_finite() && self.v >= 0.0) {
            return Err(Error::config("radio.v_kmh", "must be >= 0"));
        }
        if self.h_e <= self.h_t.max(self.h_r) {
            return Err(Error::config(
                "geometry.h_e_m",
                format!(
                    "duct height must exceed both antenna heights (h_t = {}, h_r = {})",
                    self.h_t, self.h_r
                ),
            ));
        }
        if !self.p_t_dbm.is_finite() {
            return Err(Error::config("radio.p_t_dbm", "must be finite"));
        }
        if self.p_w_dbm.is_nan() || self.p_w_dbm == f64::INFINITY {
            return Err(Error::config("radio.p_w_dbm", "must be a number or -inf"));
        }
        if !self.g_t_db.is_finite() || !self.g_r_db.is_finite() {
            return Err(Error::config("radio.g_t_db/g_r_db", "must be finite"));
        }
        let (d_break, d_los) = (self.d_break(), self.d_los());
        if self.d0 >= d_break {
            return Err(Error::config(
                "geometry.d0_m",
                format!("must be below the breakpoint distance {d_break:.1} m"),
            ));
        }
        if d_break >= d_los {
            return Err(Error::config(
                "geometry",
                format!("breakpoint {d_break:.1} m must lie below the horizon {d_los:.1} m"),
            ));
        }
        Ok(())
    }
}

/// Diffusion coefficients and the integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeParams {
    /// Phase increment variance rate (rad²/s).
    pub c_phi: f64,
    /// Delay process variance (s²); the stationary delay scale is √C_τ.
    pub c_tau: f64,
    /// Euler-Maruyama step (s).
    pub dt: f64,
    /// Coherence time (s): channel held constant within one block.
    pub t_c: f64,
}

impl SdeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_phi.is_finite() && self.c_phi >= 0.0) {
            return Err(Error::config("sde.c_phi", "must be >= 0"));
        }
        if !(self.c_tau.is_finite() && self.c_tau >= 0.0) {
            return Err(Error::config("sde.c_tau", "must be >= 0"));
        }
        if !(self.t_c.is_finite() && self.t_c > 0.0) {
            return Err(Error::config("sde.t_c_ms", "must be > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t_c) {
            return Err(Error::config(
                "sde.dt_s",
                format!("must satisfy 0 < dt <= t_c ({} s), got {}", self.t_c, self.dt),
            ));
        }
        Ok(())
    }
}

/// How per-cluster Doppler frequencies are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DopplerMode {
    /// Every component shares the maximum Doppler frequency.
    #[default]
    Shared,
    /// f_di = f_d · cos(θ_i) with θ_i uniform on (0, 2π).
    Jakes,
}

/// OFDM / modulation settings for the link harness.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub n_subcarriers: usize,
    /// Total guarded subcarriers, split evenly between the band edges.
    pub n_guard: usize,
    /// Cyclic prefix length in samples.
    pub cp_len: usize,
    /// Constellation order; only 16 is supported.
    pub qam_order: usize,
    /// OFDM symbols simulated per distance point.
    pub symbols_per_point: usize,
    pub doppler_mode: DopplerMode,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            n_subcarriers: 1024,
            n_guard: 64,
            cp_len: 256,
            qam_order: 16,
            symbols_per_point: 20,
            doppler_mode: DopplerMode::Shared,
        }
    }
}

impl LinkParams {
    pub fn occupied_subcarriers(&self) -> usize {
        self.n_subcarriers - self.n_guard
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.occupied_subcarriers() * 4
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(Error::config("link.n_subcarriers", "must be > 0"));
        }
        if self.n_guard >= self.n_subcarriers {
            return Err(Error::config(
                "link.n_guard",
                "must be smaller than n_subcarriers",
            ));
        }
        if self.n_guard % 2 != 0 {
            return Err(Error::config(
                "link.n_guard",
                "must be even (split evenly between band edges)",
            ));
        }
        if self.qam_order != 16 {
            return Err(Error::config(
                "link.qam_order",
                "only the 16-point constellation is supported",
            ));
        }
        if self.symbols_per_point == 0 {
            return Err(Error::config("link.symbols_per_point", "must be >= 1"));
        }
        Ok(())
    }
}

/// A fully validated scenario: everything a subcommand needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mftr: MftrModel,
    pub geometry: GeometryRadioParams,
    pub sde: SdeParams,
    pub link: LinkParams,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        raw.into_config()
    }

    /// Swap in a different macro-parameter set, re-deriving σ, V1, V2.
    pub fn with_mftr(&self, params: MftrParams) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.mftr = derive_secondary_params(&params)?;
        Ok(cfg)
    }
}

/// Loads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    ScenarioConfig::from_toml_str(&text)
}

// ---------------------------------------------------------------------------
// Raw file schema (unit-suffixed keys, optional sections defaulted here).
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mftr: RawMftr,
    geometry: RawGeometry,
    radio: RawRadio,
    sde: RawSde,
    #[serde(default)]
    link: RawLink,
    run: RawRun,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMftr {
    k: f64,
    delta: f64,
    mu: i64,
    m: f64,
    u: Option<Vec<f64>>,
    sigma_formula: Option<SigmaFormula>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    h_t_m: f64,
    h_r_m: f64,
    h_e_m: f64,
    d0_m: f64,
    r_earth_m: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    f_c_ghz: f64,
    f_d_hz: f64,
    f_s_mhz: f64,
    p_t_dbm: f64,
    p_w_dbm: f64,
    g_t_db: f64,
    g_r_db: f64,
    v_kmh: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSde {
    c_phi: f64,
    c_tau: f64,
    t_c_ms: f64,
    dt_s: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLink {
    n_subcarriers: Option<usize>,
    n_guard: Option<usize>,
    cp_len: Option<usize>,
    qam_order: Option<usize>,
    symbols_per_point: Option<usize>,
    doppler_mode: Option<DopplerMode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: u64,
}

impl RawConfig {
    fn into_config(self) -> Result<ScenarioConfig> {
        if self.mftr.mu < 1 {
            return Err(Error::config("mftr.mu", "must be an integer >= 1"));
        }
        let mu = self.mftr.mu as usize;
        let params = MftrParams {
            k: self.mftr.k,
            delta: self.mftr.delta,
            mu,
            m: self.mftr.m,
            u: self.mftr.u.unwrap_or_else(|| vec![0.0; mu]),
            sigma_formula: self.mftr.sigma_formula.unwrap_or_default(),
        };
        let mftr = derive_secondary_params(&params)?;

        let geometry = GeometryRadioParams {
            h_t: self.geometry.h_t_m,
            h_r: self.geometry.h_r_m,
            h_e: self.geometry.h_e_m,
            d0: self.geometry.d0_m,
            r_earth: self.geometry.r_earth_m.unwrap_or(6.371e6),
            f_c: self.radio.f_c_ghz * 1e9,
            f_d: self.radio.f_d_hz,
            f_s: self.radio.f_s_mhz * 1e6,
            p_t_dbm: self.radio.p_t_dbm,
            p_w_dbm: self.radio.p_w_dbm,
            g_t_db: self.radio.g_t_db,
            g_r_db: self.radio.g_r_db,
            v: self.radio.v_kmh / 3.6,
        };
        geometry.validate()?;

        let t_c = self.sde.t_c_ms * 1e-3;
        let sde = SdeParams {
            c_phi: self.sde.c_phi,
            c_tau: self.sde.c_tau,
            dt: self.sde.dt_s.unwrap_or(t_c / 100.0),
            t_c,
        };
        sde.validate()?;

        let defaults = LinkParams::default();
        let link = LinkParams {
            n_subcarriers: self.link.n_subcarriers.unwrap_or(defaults.n_subcarriers),
            n_guard: self.link.n_guard.unwrap_or(defaults.n_guard),
            cp_len: self.link.cp_len.unwrap_or(defaults.cp_len),
            qam_order: self.link.qam_order.unwrap_or(defaults.qam_order),
            symbols_per_point: self
                .link
                .symbols_per_point
                .unwrap_or(defaults.symbols_per_point),
            doppler_mode: self.link.doppler_mode.unwrap_or_default(),
        };
        link.validate()?;

        Ok(ScenarioConfig {
            mftr,
            geometry,
            sde,
            link,
            seed: self.run.seed,
        })
    }
}

impl fmt::Display for SigmaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaFormula::UnitPower => write!(f, "unit-power"),
            SigmaFormula::Quartic => write!(f, "quartic"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coastal_toml() -> String {
        r#"
[mftr]
k = 10.788
delta = 0.29
mu = 40
m = 90.252

[geometry]
h_t_m = 8.0
h_r_m = 15.0
h_e_m = 35.0
d0_m = 200.0

[radio]
f_c_ghz = 5.0
f_d_hz = 100.0
f_s_mhz = 20.0
p_t_dbm = 40.0
p_w_dbm = -100.0
g_t_db = 0.0
g_r_db = 0.0
v_kmh = 25.0

[sde]
c_phi = 6.283185307179586
c_tau = 1e-10
t_c_ms = 10.0

[run]
seed = 7
"#
        .to_string()
    }

    /// Independent re-evaluation of the closed forms for the headline set.
    #[test]
    fn derives_reference_set() {
        let model = derive_secondary_params(&MftrParams::new(10.788, 0.29, 40, 90.252)).unwrap();
        let sigma2: f64 = 1.0 / (2.0 * 40.0 * 11.788);
        assert_relative_eq!(model.sigma, sigma2.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(model.sigma, 0.032_563_8, max_relative = 1e-4);
        let s = (1.0f64 - 0.29 * 0.29).sqrt();
        assert_relative_eq!(
            model.v1,
            (sigma2 * 40.0 * 10.788 * (1.0 + s)).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(model.v1, 0.9463, max_relative = 5e-4);
        assert_relative_eq!(model.v2, 0.1402, max_relative = 5e-4);
        // Unit total power and the defining identities.
        assert_relative_eq!(model.mean_power(), 1.0, max_relative = IDENTITY_TOL);
        let k_back = (model.v1.powi(2) + model.v2.powi(2)) / (2.0 * model.sigma.powi(2) * 40.0);
        assert_relative_eq!(k_back, 10.788, max_relative = IDENTITY_TOL);
        let delta_back = 2.0 * model.v1 * model.v2 / (model.v1.powi(2) + model.v2.powi(2));
        assert_relative_eq!(delta_back, 0.29, max_relative = IDENTITY_TOL);
    }

    #[test]
    fn delta_limits() {
        let eq = derive_secondary_params(&MftrParams::new(5.0, 1.0, 3, 2.0)).unwrap();
        let expected = (eq.sigma * eq.sigma * 3.0 * 5.0).sqrt();
        assert_relative_eq!(eq.v1, expected, max_relative = 1e-12);
        assert_relative_eq!(eq.v2, expected, max_relative = 1e-12);

        let single = derive_secondary_params(&MftrParams::new(5.0, 0.0, 3, 2.0)).unwrap();
        assert_eq!(single.v2, 0.0);
        assert_relative_eq!(
            single.v1,
            (2.0 * single.sigma * single.sigma * 3.0 * 5.0).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(derive_secondary_params(&MftrParams::new(5.0, 1.2, 3, 2.0)).is_err());
        assert!(derive_secondary_params(&MftrParams::new(5.0, -0.1, 3, 2.0)).is_err());
        let mut p = MftrParams::new(5.0, 0.5, 3, 2.0);
        p.mu = 0;
        p.u = vec![];
        assert!(derive_secondary_params(&p).is_err());
        assert!(derive_secondary_params(&MftrParams::new(-1.0, 0.5, 3, 2.0)).is_err());
        assert!(derive_secondary_params(&MftrParams::new(5.0, 0.5, 3, 0.5)).is_err());
    }

    #[test]
    fn derivation_is_pure() {
        let p = MftrParams::new(10.788, 0.29, 40, 90.252);
        let a = derive_secondary_params(&p).unwrap();
        let b = derive_secondary_params(&p).unwrap();
        assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
        assert_eq!(a.v1.to_bits(), b.v1.to_bits());
        assert_eq!(a.v2.to_bits(), b.v2.to_bits());
    }

    #[test]
    fn quartic_formula_keeps_identities_but_not_unit_power() {
        let mut p = MftrParams::new(10.788, 0.29, 40, 90.252);
        p.sigma_formula = SigmaFormula::Quartic;
        let model = derive_secondary_params(&p).unwrap();
        assert_relative_eq!(
            model.sigma,
            (1.0 / (80.0 * 11.788f64).sqrt()).sqrt(),
            max_relative = 1e-12
        );
        let k_back = (model.v1.powi(2) + model.v2.powi(2)) / (2.0 * model.sigma.powi(2) * 40.0);
        assert_relative_eq!(k_back, 10.788, max_relative = IDENTITY_TOL);
        assert!((model.mean_power() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn nonzero_u_rederivation() {
        let mut p = MftrParams::new(10.788, 0.29, 4, 90.252);
        p.u = vec![0.0, 0.05, 0.05, 0.02];
        let model = derive_secondary_params(&p).unwrap();
        let u2: f64 = p.u.iter().map(|v| v * v).sum();
        let s2 = model.sigma * model.sigma;
        let k_back = (model.v1.powi(2) + model.v2.powi(2) + u2) / (2.0 * s2 * 4.0);
        assert_relative_eq!(k_back, 10.788, max_relative = IDENTITY_TOL);
        let delta_back =
            2.0 * model.v1 * model.v2 / (model.v1.powi(2) + model.v2.powi(2) + u2);
        assert_relative_eq!(delta_back, 0.29, max_relative = IDENTITY_TOL);
        assert_relative_eq!(model.mean_power(), 1.0, max_relative = IDENTITY_TOL);
    }

    #[test]
    fn loads_reference_scenario() {
        let cfg = ScenarioConfig::from_toml_str(&coastal_toml()).unwrap();
        // d_break = 4*8*15 / (2.998e8/5e9); hand value 8005.3369 m.
        assert_relative_eq!(cfg.geometry.d_break(), 480.0 / 0.05996, max_relative = 1e-12);
        assert!((cfg.geometry.d_break() - 8005.34).abs() < 0.01);
        assert!((cfg.geometry.d_los() - 23_921.0).abs() < 1.0);
        assert_eq!(cfg.link.n_subcarriers, 1024);
        assert_eq!(cfg.sde.dt, cfg.sde.t_c / 100.0);
        assert_eq!(cfg.seed, 7);
        assert_relative_eq!(cfg.geometry.v, 25.0 / 3.6, max_relative = 1e-12);
    }

    #[test]
    fn load_rejects_bad_fields() {
        let bad_delta = coastal_toml().replace("delta = 0.29", "delta = 1.2");
        let err = ScenarioConfig::from_toml_str(&bad_delta).unwrap_err();
        assert!(err.to_string().contains("delta"), "{err}");

        let missing = coastal_toml().replace("f_c_ghz = 5.0", "");
        let err = ScenarioConfig::from_toml_str(&missing).unwrap_err();
        assert!(err.to_string().contains("f_c_ghz"), "{err}");

        // d0 beyond the breakpoint.
        let bad_d0 = coastal_toml().replace("d0_m = 200.0", "d0_m = 9000.0");
        let err = ScenarioConfig::from_toml_str(&bad_d0).unwrap_err();
        assert!(err.to_string().contains("d0"), "{err}");
    }

    #[test]
    fn u_defaults_to_zero_per_cluster() {
        let text = coastal_toml().replace("mu = 40", "mu = 1");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.mftr.params.u, vec![0.0]);
    }

    #[test]
    fn d0_breakpoint_horizon_ordering_holds_for_accepted_geometries() {
        let cfg = ScenarioConfig::from_toml_str(&coastal_toml()).unwrap();
        let g = &cfg.geometry;
        assert!(g.d0 < g.d_break() && g.d_break() < g.d_los());
    }
}
