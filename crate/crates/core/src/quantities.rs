//! Physical constants, unit conventions, and the validated configuration
//! consumed by every other module.
//!
//! Unit convention: all frequencies and rates are stored as angular
//! frequencies in rad/s. Gyromagnetic ratios are stored as magnitudes in
//! rad/(s·T); the paper's positive-precession-frequency convention is used
//! throughout. Laser intensity is accepted in mW/cm² at the document
//! interface and stored in W/m².

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::sweep::DischargeModel;

/// Fundamental constants (CODATA 2018), fixed at build time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Elementary charge [C]
    pub e: f64,
    /// Electron mass [kg]
    pub m_e: f64,
    /// Speed of light [m/s]
    pub c: f64,
    /// Vacuum permittivity [F/m]
    pub epsilon0: f64,
    /// Reduced Planck constant [J·s]
    pub hbar: f64,
    /// Boltzmann constant [J/K]
    pub k_b: f64,
    /// Mass of the ³He atom [kg]
    pub m_he3: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    e: 1.602176634e-19,
    m_e: 9.1093837015e-31,
    c: 299_792_458.0,
    epsilon0: 8.8541878128e-12,
    hbar: 1.054571817e-34,
    k_b: 1.380649e-23,
    // 3.0160293 u (atomic mass of ³He) × 1.66053906660e-27 kg/u
    m_he3: 3.0160293 * 1.66053906660e-27,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA
    }
}

/// Atomic structure and line parameters of the 2³S₁ → 2³P₀ system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicConfig {
    /// Oscillator strength of the 2³S₁-2³P₀ transition [dimensionless]
    pub f_ge: f64,
    /// C₈ transition angular frequency, 2³S₁(F=1/2) → 2³P₀ [rad/s]
    pub omega8: f64,
    /// C₉ transition angular frequency, 2³S₁(F=3/2) → 2³P₀ [rad/s]
    pub omega9: f64,
    /// Radiative decay rate of 2³P₀ [rad/s]
    pub gamma_e: f64,
    /// Doppler linewidth D [rad/s]
    pub doppler_width: f64,
    /// Electron gyromagnetic ratio magnitude [rad/(s·T)]
    pub gamma_m: f64,
    /// ³He nuclear gyromagnetic ratio magnitude [rad/(s·T)]
    pub gamma_g: f64,
    /// Cell temperature [K]
    pub temperature: f64,
}

/// Metastability-exchange collision times and the intrinsic relaxation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeConfig {
    /// Mean MEC time for a ground-state atom, T [s]
    pub t_ground: f64,
    /// Mean MEC time for a metastable atom, τ [s]
    pub tau_metastable: f64,
    /// Intrinsic (non-MEC) transverse relaxation time T_r [s]
    pub t_relax: f64,
}

impl ExchangeConfig {
    /// Metastable-to-ground number density ratio n/N = τ/T.
    pub fn density_ratio(&self) -> f64 {
        self.tau_metastable / self.t_ground
    }
}

/// Pump laser parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserConfig {
    /// Intensity [W/m²]
    pub intensity: f64,
    /// Angular frequency ω [rad/s]
    pub angular_frequency: f64,
    /// Complex unit polarization vector ε (Cartesian components)
    pub polarization: [Complex64; 3],
}

impl LaserConfig {
    /// Detuning ω − ω₈ from the C₈ line [rad/s].
    pub fn detuning_from_c8(&self, atomic: &AtomicConfig) -> f64 {
        self.angular_frequency - atomic.omega8
    }
}

/// Polarization ε = −(x̂+iŷ)/√2, photon spin +ẑ.
pub fn sigma_plus() -> [Complex64; 3] {
    let r = 1.0 / 2.0f64.sqrt();
    [
        Complex64::new(-r, 0.0),
        Complex64::new(0.0, -r),
        Complex64::new(0.0, 0.0),
    ]
}

/// Polarization ε = (x̂−iŷ)/√2, photon spin −ẑ.
pub fn sigma_minus() -> [Complex64; 3] {
    let r = 1.0 / 2.0f64.sqrt();
    [
        Complex64::new(r, 0.0),
        Complex64::new(0.0, -r),
        Complex64::new(0.0, 0.0),
    ]
}

/// Linear polarization along x̂, photon spin 0.
pub fn linear_x() -> [Complex64; 3] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]
}

/// Where a resolved configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated in the source publication (Table 1 or text).
    Paper,
    /// Taken from external literature (not in the paper).
    External,
    /// Supplied by the user document.
    User,
}

/// One resolved configuration value together with its origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub key: String,
    pub value: String,
    pub source: Provenance,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub constants: PhysicalConstants,
    pub atomic: AtomicConfig,
    pub exchange: ExchangeConfig,
    pub laser: LaserConfig,
    /// Guiding magnetic field B₀ [T]
    pub b0: f64,
    /// Discharge phenomenology 1/T = k·(V_dis − V₀), if configured.
    pub discharge: Option<DischargeModel>,
    /// Provenance echo for every resolved value.
    pub provenance: Vec<ProvenanceEntry>,
    /// Validity warnings (non-fatal).
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("domain error: {0}")]
    Domain(String),
}

// ---------------------------------------------------------------------------
// Defaults. Values marked `paper` come from Table 1 or the text; `external`
// values are not stated in the paper and come from standard literature.

/// f_ge = 0.0599 (paper).
pub const DEFAULT_F_GE: f64 = 0.0599;
/// γ_e = 1.022×10⁷ rad/s (paper Table 1 "γ_e (MHz) 10.22", read as the 2³P
/// radiative decay rate; the only reading consistent with the 1083 nm line).
pub const DEFAULT_GAMMA_E: f64 = 1.022e7;
/// C₈ frequency, 1083 nm line of ³He (external literature): ω₈/2π ≈ 276.73 THz.
pub const DEFAULT_OMEGA8: f64 = 2.0 * PI * 276.73e12;
/// 2³S₁ hyperfine splitting: ω₉ − ω₈ = 2π × 6.7397 GHz (external literature).
pub const HYPERFINE_SPLITTING: f64 = 2.0 * PI * 6.7397e9;
/// Electron gyromagnetic ratio magnitude, 2π × 28.025 GHz/T (external).
pub const DEFAULT_GAMMA_M: f64 = 2.0 * PI * 28.025e9;
/// ³He nuclear gyromagnetic ratio magnitude, 2π × 32.434 MHz/T (external).
pub const DEFAULT_GAMMA_G: f64 = 2.0 * PI * 32.434e6;
/// Cell temperature [K] (room temperature; paper's Doppler width matches).
pub const DEFAULT_TEMPERATURE: f64 = 300.0;
/// Table 1: T = 0.37 s.
pub const DEFAULT_T_GROUND: f64 = 0.37;
/// Table 1: τ = 2.2×10⁻⁷ s.
pub const DEFAULT_TAU: f64 = 2.2e-7;
/// Table 1: T_r = 170 s.
pub const DEFAULT_T_RELAX: f64 = 170.0;
/// Table 1: I = 100 mW/cm².
pub const DEFAULT_INTENSITY_MW_PER_CM2: f64 = 100.0;
/// Default pump detuning: 1 GHz red of the C₈ line (Fig. 5 right panel).
pub const DEFAULT_DETUNING_HZ: f64 = -1.0e9;
/// Default guiding field: γ_g·B₀/2π = 7.821 Hz (the paper's unshifted Larmor
/// frequency), i.e. B₀ ≈ 0.2411 µT.
pub fn default_b0() -> f64 {
    7.821 * 2.0 * PI / DEFAULT_GAMMA_G
}

/// Saturation-validity boundary: ~1 W/cm²; warn above half of it.
pub const INTENSITY_WARNING_W_PER_M2: f64 = 5000.0;

// ---------------------------------------------------------------------------
// Document schema (TOML). Unknown keys are rejected.

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atomic: Option<AtomicDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exchange: Option<ExchangeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    laser: Option<LaserDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<FieldDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discharge: Option<DischargeDoc>,
    /// Optional run manifest section (written by the CLI; ignored here so a
    /// manifest can be fed back as a config document).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<toml::Value>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomicDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    f_ge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega8_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega9_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_e_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    doppler_width_rad_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_m_rad_per_s_per_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_g_rad_per_s_per_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature_k: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExchangeDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    t_ground_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_metastable_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_relax_s: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaserDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    intensity_mw_per_cm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angular_frequency_rad_per_s: Option<f64>,
    /// Detuning from the (resolved) C₈ line, in Hz (not rad/s).
    #[serde(skip_serializing_if = "Option::is_none")]
    detuning_from_c8_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    polarization: Option<PolarizationDoc>,
}

/// Either a named polarization or explicit complex Cartesian components
/// `[[re, im], [re, im], [re, im]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PolarizationDoc {
    Named(String),
    Components([[f64; 2]; 3]),
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    b0_tesla: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DischargeDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    v_extinguish_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_per_s_per_v: Option<f64>,
}

// ---------------------------------------------------------------------------

/// Doppler linewidth D = ω₀·√(2·k_B·T / (m·c²)) [rad/s].
///
/// Accepts temperature = 0 (D = 0); rejects negative or non-positive inputs
/// otherwise.
pub fn doppler_width(
    omega0: f64,
    temperature: f64,
    mass: f64,
    constants: &PhysicalConstants,
) -> Result<f64, ConfigError> {
    if omega0 <= 0.0 || mass <= 0.0 || temperature < 0.0 {
        return Err(ConfigError::Domain(format!(
            "doppler_width requires omega0 > 0, mass > 0, temperature >= 0 \
             (got omega0={omega0}, temperature={temperature}, mass={mass})"
        )));
    }
    let c2 = constants.c * constants.c;
    Ok(omega0 * (2.0 * constants.k_b * temperature / (mass * c2)).sqrt())
}

/// Parse, default, and validate a configuration document (TOML).
///
/// Every resolved value is echoed with its provenance; the empty document
/// yields the all-defaults configuration.
pub fn load_config(source: &str) -> Result<Config, ConfigError> {
    let doc: ConfigDoc =
        toml::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(doc)
}

fn resolve(doc: ConfigDoc) -> Result<Config, ConfigError> {
    let mut prov = Vec::new();
    let mut warnings = Vec::new();
    let constants = CODATA;

    let a = doc.atomic.unwrap_or_default();
    let x = doc.exchange.unwrap_or_default();
    let l = doc.laser.unwrap_or_default();

    let mut tag = |key: &str, value: f64, user: bool, default_src: Provenance| {
        prov.push(ProvenanceEntry {
            key: key.to_string(),
            value: format!("{value:e}"),
            source: if user { Provenance::User } else { default_src },
        });
        value
    };

    use Provenance::{External, Paper, User};

    let f_ge = tag("atomic.f_ge", a.f_ge.unwrap_or(DEFAULT_F_GE), a.f_ge.is_some(), Paper);
    let omega8 = tag(
        "atomic.omega8_rad_per_s",
        a.omega8_rad_per_s.unwrap_or(DEFAULT_OMEGA8),
        a.omega8_rad_per_s.is_some(),
        External,
    );
    let omega9 = tag(
        "atomic.omega9_rad_per_s",
        a.omega9_rad_per_s.unwrap_or(omega8 + HYPERFINE_SPLITTING),
        a.omega9_rad_per_s.is_some(),
        External,
    );
    let gamma_e = tag(
        "atomic.gamma_e_rad_per_s",
        a.gamma_e_rad_per_s.unwrap_or(DEFAULT_GAMMA_E),
        a.gamma_e_rad_per_s.is_some(),
        Paper,
    );
    let gamma_m = tag(
        "atomic.gamma_m_rad_per_s_per_t",
        a.gamma_m_rad_per_s_per_t.unwrap_or(DEFAULT_GAMMA_M),
        a.gamma_m_rad_per_s_per_t.is_some(),
        External,
    );
    let gamma_g = tag(
        "atomic.gamma_g_rad_per_s_per_t",
        a.gamma_g_rad_per_s_per_t.unwrap_or(DEFAULT_GAMMA_G),
        a.gamma_g_rad_per_s_per_t.is_some(),
        External,
    );
    let temperature = tag(
        "atomic.temperature_k",
        a.temperature_k.unwrap_or(DEFAULT_TEMPERATURE),
        a.temperature_k.is_some(),
        External,
    );
    let derived_d = doppler_width(omega8, temperature, constants.m_he3, &constants)?;
    let dw = tag(
        "atomic.doppler_width_rad_per_s",
        a.doppler_width_rad_per_s.unwrap_or(derived_d),
        a.doppler_width_rad_per_s.is_some(),
        Paper, // Table 1 gives D = 1.18 GHz; the derived 300 K value matches it
    );

    let t_ground = tag(
        "exchange.t_ground_s",
        x.t_ground_s.unwrap_or(DEFAULT_T_GROUND),
        x.t_ground_s.is_some(),
        Paper,
    );
    let tau = tag(
        "exchange.tau_metastable_s",
        x.tau_metastable_s.unwrap_or(DEFAULT_TAU),
        x.tau_metastable_s.is_some(),
        Paper,
    );
    let t_relax = tag(
        "exchange.t_relax_s",
        x.t_relax_s.unwrap_or(DEFAULT_T_RELAX),
        x.t_relax_s.is_some(),
        Paper,
    );

    let intensity_mw = tag(
        "laser.intensity_mw_per_cm2",
        l.intensity_mw_per_cm2.unwrap_or(DEFAULT_INTENSITY_MW_PER_CM2),
        l.intensity_mw_per_cm2.is_some(),
        Paper,
    );
    // mW/cm² → W/m²: ×10
    let intensity = intensity_mw * 10.0;

    let angular_frequency = match (l.angular_frequency_rad_per_s, l.detuning_from_c8_hz) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invariant(
                "laser: give either angular_frequency_rad_per_s or detuning_from_c8_hz, not both"
                    .into(),
            ))
        }
        (Some(w), None) => tag("laser.angular_frequency_rad_per_s", w, true, User),
        (None, det) => {
            let det_hz = tag(
                "laser.detuning_from_c8_hz",
                det.unwrap_or(DEFAULT_DETUNING_HZ),
                det.is_some(),
                Paper,
            );
            omega8 + 2.0 * PI * det_hz
        }
    };

    // the provenance entry is pushed after the last `tag` call (the
    // closure holds the mutable borrow of `prov` until then)
    let (polarization, pol_entry) = match &l.polarization {
        None => (
            sigma_plus(),
            ProvenanceEntry {
                key: "laser.polarization".into(),
                value: "sigma_plus".into(),
                source: Paper,
            },
        ),
        Some(PolarizationDoc::Named(name)) => {
            let value = match name.as_str() {
                "sigma_plus" | "sigma+" => sigma_plus(),
                "sigma_minus" | "sigma-" => sigma_minus(),
                "linear_x" | "linear" => linear_x(),
                other => {
                    return Err(ConfigError::Parse(format!(
                        "unknown polarization name {other:?} \
                         (expected sigma_plus, sigma_minus, or linear_x)"
                    )))
                }
            };
            (
                value,
                ProvenanceEntry {
                    key: "laser.polarization".into(),
                    value: name.clone(),
                    source: User,
                },
            )
        }
        Some(PolarizationDoc::Components(c)) => (
            [
                Complex64::new(c[0][0], c[0][1]),
                Complex64::new(c[1][0], c[1][1]),
                Complex64::new(c[2][0], c[2][1]),
            ],
            ProvenanceEntry {
                key: "laser.polarization".into(),
                value: format!("{c:?}"),
                source: User,
            },
        ),
    };

    let fld = doc.field.unwrap_or_default();
    let b0 = tag(
        "field.b0_tesla",
        fld.b0_tesla.unwrap_or_else(default_b0),
        fld.b0_tesla.is_some(),
        Paper,
    );

    let discharge = match doc.discharge {
        None => None,
        Some(d) => {
            let v0 = tag(
                "discharge.v_extinguish_v",
                d.v_extinguish_v.unwrap_or(0.035),
                d.v_extinguish_v.is_some(),
                Paper,
            );
            let k = tag(
                "discharge.slope_per_s_per_v",
                d.slope_per_s_per_v.unwrap_or(3.0),
                d.slope_per_s_per_v.is_some(),
                User,
            );
            Some(DischargeModel::new(v0, k).map_err(ConfigError::Invariant)?)
        }
    };

    drop(tag);
    prov.push(pol_entry);

    let atomic = AtomicConfig {
        f_ge,
        omega8,
        omega9,
        gamma_e,
        doppler_width: dw,
        gamma_m,
        gamma_g,
        temperature,
    };
    let exchange = ExchangeConfig {
        t_ground,
        tau_metastable: tau,
        t_relax,
    };
    let laser = LaserConfig {
        intensity,
        angular_frequency,
        polarization,
    };

    validate_atomic(&atomic)?;
    validate_exchange(&exchange, &mut warnings)?;
    validate_laser(&laser, &mut warnings)?;
    if b0 < 0.0 {
        return Err(ConfigError::Invariant("field.b0_tesla must be >= 0".into()));
    }

    Ok(Config {
        constants,
        atomic,
        exchange,
        laser,
        b0,
        discharge,
        provenance: prov,
        warnings,
    })
}

fn validate_atomic(a: &AtomicConfig) -> Result<(), ConfigError> {
    for (name, v) in [
        ("f_ge", a.f_ge),
        ("omega8", a.omega8),
        ("omega9", a.omega9),
        ("gamma_e", a.gamma_e),
        ("doppler_width", a.doppler_width),
        ("gamma_m", a.gamma_m),
        ("gamma_g", a.gamma_g),
    ] {
        if !(v > 0.0) {
            return Err(ConfigError::Invariant(format!("atomic.{name} must be > 0, got {v}")));
        }
    }
    if a.omega9 <= a.omega8 {
        return Err(ConfigError::Invariant(format!(
            "omega9 must exceed omega8 (hyperfine splitting), got omega8={}, omega9={}",
            a.omega8, a.omega9
        )));
    }
    if a.temperature < 0.0 {
        return Err(ConfigError::Invariant("temperature must be >= 0".into()));
    }
    Ok(())
}

fn validate_exchange(x: &ExchangeConfig, warnings: &mut Vec<String>) -> Result<(), ConfigError> {
    for (name, v) in [
        ("t_ground_s", x.t_ground),
        ("tau_metastable_s", x.tau_metastable),
        ("t_relax_s", x.t_relax),
    ] {
        if !(v > 0.0) {
            return Err(ConfigError::Invariant(format!("exchange.{name} must be > 0, got {v}")));
        }
    }
    let ratio = x.density_ratio();
    if ratio >= 1.0 {
        return Err(ConfigError::Invariant(format!(
            "τ ≪ T violated: tau_metastable_s/t_ground_s = {ratio:.3e} >= 1"
        )));
    }
    if ratio >= 1e-3 {
        warnings.push(format!(
            "adiabatic elimination validity: τ/T = {ratio:.3e} >= 1e-3; \
             eliminated results are approximate"
        ));
    }
    Ok(())
}

fn validate_laser(l: &LaserConfig, warnings: &mut Vec<String>) -> Result<(), ConfigError> {
    if l.intensity < 0.0 {
        return Err(ConfigError::Invariant(format!(
            "laser intensity must be >= 0, got {} W/m²",
            l.intensity
        )));
    }
    let norm2: f64 = l.polarization.iter().map(|c| c.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return Err(ConfigError::Invariant(format!(
            "polarization must be a unit vector: ‖ε‖ = {} (tolerance 1e-12)",
            norm2.sqrt()
        )));
    }
    if l.angular_frequency <= 0.0 {
        return Err(ConfigError::Invariant("laser angular frequency must be > 0".into()));
    }
    if l.intensity > INTENSITY_WARNING_W_PER_M2 {
        warnings.push(format!(
            "intensity {} W/m² approaches the saturation intensity (~1 W/cm²); \
             the linear light-shift model loses validity",
            l.intensity
        ));
    }
    Ok(())
}

impl Config {
    /// Serialize back to a TOML document with every resolved value explicit.
    /// `load_config(serialize(cfg))` reparses to an equal configuration.
    pub fn to_document(&self) -> String {
        let pol: [[f64; 2]; 3] = [
            [self.laser.polarization[0].re, self.laser.polarization[0].im],
            [self.laser.polarization[1].re, self.laser.polarization[1].im],
            [self.laser.polarization[2].re, self.laser.polarization[2].im],
        ];
        let doc = ConfigDoc {
            atomic: Some(AtomicDoc {
                f_ge: Some(self.atomic.f_ge),
                omega8_rad_per_s: Some(self.atomic.omega8),
                omega9_rad_per_s: Some(self.atomic.omega9),
                gamma_e_rad_per_s: Some(self.atomic.gamma_e),
                doppler_width_rad_per_s: Some(self.atomic.doppler_width),
                gamma_m_rad_per_s_per_t: Some(self.atomic.gamma_m),
                gamma_g_rad_per_s_per_t: Some(self.atomic.gamma_g),
                temperature_k: Some(self.atomic.temperature),
            }),
            exchange: Some(ExchangeDoc {
                t_ground_s: Some(self.exchange.t_ground),
                tau_metastable_s: Some(self.exchange.tau_metastable),
                t_relax_s: Some(self.exchange.t_relax),
            }),
            laser: Some(LaserDoc {
                intensity_mw_per_cm2: Some(self.laser.intensity / 10.0),
                angular_frequency_rad_per_s: Some(self.laser.angular_frequency),
                detuning_from_c8_hz: None,
                polarization: Some(PolarizationDoc::Components(pol)),
            }),
            field: Some(FieldDoc {
                b0_tesla: Some(self.b0),
            }),
            discharge: self.discharge.as_ref().map(|d| DischargeDoc {
                v_extinguish_v: Some(d.v_extinguish),
                slope_per_s_per_v: Some(d.slope),
            }),
            run: None,
        };
        toml::to_string(&doc).expect("config serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_document_gives_defaults_with_paper_provenance() {
        let cfg = load_config("").unwrap();
        assert_relative_eq!(cfg.atomic.f_ge, 0.0599);
        let entry = cfg
            .provenance
            .iter()
            .find(|p| p.key == "atomic.f_ge")
            .unwrap();
        assert_eq!(entry.source, Provenance::Paper);
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn table1_document_accepted() {
        let cfg = load_config(
            r#"
            [exchange]
            t_relax_s = 170.0
            t_ground_s = 0.37
            tau_metastable_s = 2.2e-7

            [laser]
            intensity_mw_per_cm2 = 100.0

            [atomic]
            gamma_e_rad_per_s = 1.022e7
            doppler_width_rad_per_s = 7.414e9
            "#,
        )
        .unwrap();
        assert_relative_eq!(cfg.laser.intensity, 1000.0); // W/m²
        assert_relative_eq!(cfg.exchange.density_ratio(), 2.2e-7 / 0.37);
    }

    #[test]
    fn tau_equal_t_rejected() {
        let err = load_config(
            "[exchange]\nt_ground_s = 0.37\ntau_metastable_s = 0.37\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("τ ≪ T violated"), "{err}");
    }

    #[test]
    fn tau_ratio_warning_not_fatal() {
        let cfg = load_config(
            "[exchange]\nt_ground_s = 1.0\ntau_metastable_s = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(cfg.warnings[0].contains("adiabatic"));
    }

    #[test]
    fn non_unit_polarization_rejected() {
        let err = load_config(
            "[laser]\npolarization = [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("unit vector"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load_config("[atomic]\nbogus_key = 1.0\n").is_err());
        assert!(load_config("[bogus_section]\nx = 1\n").is_err());
    }

    #[test]
    fn both_frequency_keys_rejected() {
        let err = load_config(
            "[laser]\nangular_frequency_rad_per_s = 1.0e15\ndetuning_from_c8_hz = 0.0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn doppler_width_matches_table1() {
        // ω₀ = 2π×276.7 THz, 300 K, m = 3.016 u → D/2π ∈ [1.18, 1.19] GHz
        let d = doppler_width(2.0 * PI * 276.7e12, 300.0, CODATA.m_he3, &CODATA).unwrap();
        let d_ghz = d / (2.0 * PI * 1e9);
        assert!((1.18..=1.19).contains(&d_ghz), "D = {d_ghz} GHz");
    }

    #[test]
    fn doppler_width_zero_temperature() {
        let d = doppler_width(1e15, 0.0, CODATA.m_he3, &CODATA).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn doppler_width_rejects_nonpositive() {
        assert!(doppler_width(-1.0, 300.0, 5e-27, &CODATA).is_err());
        assert!(doppler_width(1e15, -1.0, 5e-27, &CODATA).is_err());
        assert!(doppler_width(1e15, 300.0, 0.0, &CODATA).is_err());
    }

    #[test]
    fn doppler_scaling_laws() {
        let base = doppler_width(1e15, 300.0, CODATA.m_he3, &CODATA).unwrap();
        let double_omega = doppler_width(2e15, 300.0, CODATA.m_he3, &CODATA).unwrap();
        let double_temp = doppler_width(1e15, 600.0, CODATA.m_he3, &CODATA).unwrap();
        assert_relative_eq!(double_omega, 2.0 * base, max_relative = 1e-14);
        assert_relative_eq!(double_temp, 2.0f64.sqrt() * base, max_relative = 1e-14);
    }

    #[test]
    fn default_config_invariants() {
        let cfg = load_config("").unwrap();
        let split = (cfg.atomic.omega9 - cfg.atomic.omega8) / (2.0 * PI);
        assert_relative_eq!(split, 6.74e9, max_relative = 0.01);
        let ratio = cfg.atomic.gamma_m / cfg.atomic.gamma_g;
        assert_relative_eq!(ratio, 864.0, max_relative = 0.01);
        // Table 1 Doppler width reproduced within 1%
        assert_relative_eq!(
            cfg.atomic.doppler_width,
            2.0 * PI * 1.18e9,
            max_relative = 0.01
        );
    }

    #[test]
    fn serialize_roundtrip() {
        let cfg = load_config(
            "[laser]\ndetuning_from_c8_hz = -2.0e9\n[field]\nb0_tesla = 1.0e-6\n[discharge]\n",
        )
        .unwrap();
        let doc = cfg.to_document();
        let cfg2 = load_config(&doc).unwrap();
        assert_eq!(cfg.atomic, cfg2.atomic);
        assert_eq!(cfg.exchange, cfg2.exchange);
        assert_eq!(cfg.laser, cfg2.laser);
        assert_eq!(cfg.b0, cfg2.b0);
        assert_eq!(cfg.discharge, cfg2.discharge);
    }
}
