//! Parameter sweeps over field, detuning, intensity, or discharge strength,
//! producing deterministic CSV tables plus a re-runnable manifest, and the
//! discharge line-intersection analysis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{beta_closed_form, EliminationResult};
use crate::lightshift::{effective_fields, LightShiftFields};
use crate::quantities::{Config, LaserConfig};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep specification: {0}")]
    Spec(String),
    #[error("discharge analysis error: {0}")]
    Discharge(String),
}

/// Linear discharge phenomenology 1/T = k·(V_dis − V₀) for V_dis > V₀ (the
/// MEC rate grows with the metastable density, which grows with discharge
/// strength); below the extinction voltage V₀ the rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DischargeModel {
    /// Extinction voltage V₀ [V].
    pub v_extinguish: f64,
    /// Rate slope k [s⁻¹/V].
    pub slope: f64,
}

impl DischargeModel {
    pub fn new(v_extinguish: f64, slope: f64) -> Result<Self, String> {
        if !(v_extinguish >= 0.0) || !v_extinguish.is_finite() {
            return Err(format!("extinction voltage must be ≥ 0, got {v_extinguish}"));
        }
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(format!("discharge slope must be > 0, got {slope}"));
        }
        Ok(DischargeModel { v_extinguish, slope })
    }

    /// The MEC rate 1/T [s⁻¹] at a discharge voltage; zero at or below
    /// extinction.
    pub fn inverse_t(&self, v_dis: f64) -> f64 {
        (self.slope * (v_dis - self.v_extinguish)).max(0.0)
    }
}

/// Which base-config parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Guiding field B₀ [T].
    Field,
    /// Laser detuning from the F = 1/2 resonance [Hz].
    Detuning,
    /// Laser intensity [mW/cm²].
    Intensity,
    /// Discharge voltage [V] (requires a discharge model in the config).
    Discharge,
}

impl SweepAxis {
    /// CSV column name for the axis value.
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepAxis::Field => "b0_tesla",
            SweepAxis::Detuning => "detuning_hz",
            SweepAxis::Intensity => "intensity_mw_per_cm2",
            SweepAxis::Discharge => "v_dis_volt",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepAxis::Field => "field",
            SweepAxis::Detuning => "detuning",
            SweepAxis::Intensity => "intensity",
            SweepAxis::Discharge => "discharge",
        };
        f.write_str(s)
    }
}

impl FromStr for SweepAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "field" => Ok(SweepAxis::Field),
            "detuning" => Ok(SweepAxis::Detuning),
            "intensity" => Ok(SweepAxis::Intensity),
            "discharge" => Ok(SweepAxis::Discharge),
            other => Err(SweepError::Spec(format!(
                "unknown axis '{other}' (expected field|detuning|intensity|discharge)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScale {
    Lin,
    Log,
}

/// A one-dimensional evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.count < 2 {
            return Err(SweepError::Spec(format!(
                "grid needs at least 2 points, got {}",
                self.count
            )));
        }
        if !(self.min < self.max) {
            return Err(SweepError::Spec(format!(
                "grid needs min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if matches!(self.scale, GridScale::Log) && self.min <= 0.0 {
            return Err(SweepError::Spec(format!(
                "log grid needs min > 0, got {}",
                self.min
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        match self.scale {
            GridScale::Lin => (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect(),
            GridScale::Log => {
                let (la, lb) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Parse a grid flag of the form `min:max:count:lin|log`.
impl FromStr for GridSpec {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(SweepError::Spec(format!(
                "grid '{s}' must be min:max:count:lin|log"
            )));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|e| SweepError::Spec(format!("grid min '{}': {e}", parts[0])))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|e| SweepError::Spec(format!("grid max '{}': {e}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|e| SweepError::Spec(format!("grid count '{}': {e}", parts[2])))?;
        let scale = match parts[3] {
            "lin" => GridScale::Lin,
            "log" => GridScale::Log,
            other => {
                return Err(SweepError::Spec(format!(
                    "grid scale '{other}' must be lin or log"
                )))
            }
        };
        let g = GridSpec {
            min,
            max,
            count,
            scale,
        };
        g.validate()?;
        Ok(g)
    }
}

/// A full sweep request: base configuration, varied axis, and pump state.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub config: Config,
    pub axis: SweepAxis,
    pub grid: GridSpec,
    pub pump: bool,
}

/// One evaluated grid point. `values` is `None` exactly when `error` holds
/// the per-point failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub values: Option<RowValues>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValues {
    pub frequency_shift: f64,
    pub gamma2: f64,
    pub beta: Complex64,
    pub delta_b_half: Complex64,
    pub delta_b_threehalf: Complex64,
}

fn point_values(
    cfg: &Config,
    axis: SweepAxis,
    value: f64,
    pump: bool,
) -> Result<RowValues, String> {
    let mut b0 = cfg.b0;
    let mut laser = cfg.laser.clone();
    let mut exch = cfg.exchange.clone();
    match axis {
        SweepAxis::Field => b0 = value,
        SweepAxis::Detuning => {
            laser.angular_frequency = cfg.atomic.omega8 + 2.0 * PI * value;
        }
        SweepAxis::Intensity => {
            if value < 0.0 {
                return Err(format!("negative intensity {value}"));
            }
            laser.intensity = value * 10.0; // mW/cm² → W/m²
        }
        SweepAxis::Discharge => {
            let model = cfg
                .discharge
                .as_ref()
                .ok_or("discharge axis requires a [discharge] model in the config")?;
            let inv_t = model.inverse_t(value);
            exch.t_ground = if inv_t > 0.0 { 1.0 / inv_t } else { f64::INFINITY };
        }
    }
    let fields = if pump {
        effective_fields(&cfg.constants, &cfg.atomic, &laser).map_err(|e| e.to_string())?
    } else {
        LightShiftFields::dark()
    };
    let elim: EliminationResult =
        beta_closed_form(b0, &fields, &cfg.atomic, &exch).map_err(|e| e.to_string())?;
    let vals = RowValues {
        frequency_shift: elim.frequency_shift,
        gamma2: elim.gamma2,
        beta: elim.beta,
        delta_b_half: fields.delta_b_half,
        delta_b_threehalf: fields.delta_b_threehalf,
    };
    for v in [
        vals.frequency_shift,
        vals.gamma2,
        vals.beta.re,
        vals.beta.im,
    ] {
        if !v.is_finite() {
            return Err(format!("non-finite observable at {axis} = {value}"));
        }
    }
    Ok(vals)
}

/// Evaluate the sweep. Grid points are independent (evaluated in parallel
/// when the `parallel` feature is on); rows come back ordered by axis
/// value. Per-point failures land in the row's error column and do not
/// abort the run.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.grid.validate()?;
    if matches!(spec.axis, SweepAxis::Discharge) && spec.config.discharge.is_none() {
        return Err(SweepError::Spec(
            "discharge axis requires a [discharge] model in the config".into(),
        ));
    }
    let values = spec.grid.values();
    let eval = |&v: &f64| -> SweepRow {
        match point_values(&spec.config, spec.axis, v, spec.pump) {
            Ok(vals) => SweepRow {
                axis_value: v,
                values: Some(vals),
                error: None,
            },
            Err(e) => SweepRow {
                axis_value: v,
                values: None,
                error: Some(e),
            },
        }
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<SweepRow> = {
        use rayon::prelude::*;
        values.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<SweepRow> = values.iter().map(eval).collect();
    Ok(rows)
}

/// Render rows as CSV: fixed column order, '.' decimal separator, LF line
/// endings, shortest-round-trip float formatting (byte-deterministic).
pub fn rows_to_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(axis.column_name());
    out.push_str(
        ",delta_f_hz,gamma2_per_s,beta_re,beta_im,delta_b_half_re_t,delta_b_half_im_t,\
         delta_b_threehalf_re_t,delta_b_threehalf_im_t,error\n",
    );
    for row in rows {
        match (&row.values, &row.error) {
            (Some(v), None) => out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},\n",
                row.axis_value,
                v.frequency_shift,
                v.gamma2,
                v.beta.re,
                v.beta.im,
                v.delta_b_half.re,
                v.delta_b_half.im,
                v.delta_b_threehalf.re,
                v.delta_b_threehalf.im,
            )),
            (_, Some(e)) => out.push_str(&format!(
                "{:e},,,,,,,,,\"{}\"\n",
                row.axis_value,
                e.replace('"', "'")
            )),
            (None, None) => unreachable!("row without values must carry an error"),
        }
    }
    out
}

/// Side-car manifest: the fully resolved configuration plus the run
/// parameters. The manifest itself re-parses as a configuration document,
/// so a run is reproducible from its manifest alone.
pub fn sweep_manifest(spec: &SweepSpec, seed: Option<u64>) -> String {
    let mut doc = spec.config.to_document();
    doc.push_str("\n[run]\n");
    doc.push_str(&format!("axis = \"{}\"\n", spec.axis));
    doc.push_str(&format!(
        "grid = \"{:e}:{:e}:{}:{}\"\n",
        spec.grid.min,
        spec.grid.max,
        spec.grid.count,
        match spec.grid.scale {
            GridScale::Lin => "lin",
            GridScale::Log => "log",
        }
    ));
    doc.push_str(&format!("pump = {}\n", spec.pump));
    if let Some(s) = seed {
        doc.push_str(&format!("seed = {s}\n"));
    }
    doc
}

/// Read the `[run]` section back out of a manifest document.
pub fn run_section(doc: &str) -> Result<Option<(SweepAxis, GridSpec, bool)>, SweepError> {
    let value: toml::Table = doc
        .parse()
        .map_err(|e| SweepError::Spec(format!("manifest parse: {e}")))?;
    let Some(run) = value.get("run") else {
        return Ok(None);
    };
    let axis: SweepAxis = run
        .get("axis")
        .and_then(|v| v.as_str())
        .ok_or_else(|| SweepError::Spec("manifest [run] lacks axis".into()))?
        .parse()?;
    let grid: GridSpec = run
        .get("grid")
        .and_then(|v| v.as_str())
        .ok_or_else(|| SweepError::Spec("manifest [run] lacks grid".into()))?
        .parse()?;
    let pump = run
        .get("pump")
        .and_then(|v| v.as_bool())
        .ok_or_else(|| SweepError::Spec("manifest [run] lacks pump".into()))?;
    Ok(Some((axis, grid, pump)))
}

/// One fitted discharge line f(V_dis) = slope·V + intercept for a pump
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DischargeLine {
    pub setting: usize,
    pub slope: f64,
    pub intercept: f64,
}

/// Crossing point of two discharge lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineIntersection {
    pub setting_a: usize,
    pub setting_b: usize,
    pub v_dis: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DischargeAnalysis {
    pub lines: Vec<DischargeLine>,
    pub intersections: Vec<LineIntersection>,
}

/// For each pump setting, compute the precession frequency
/// f(V_dis) = γ_g·B₀/(2π) − Im[β]/(2π·T(V_dis)) on the voltage grid, fit a
/// line, and intersect all line pairs. With the linear 1/T model every pair
/// crosses at (V₀, γ_g·B₀/(2π)); settings with identical β give parallel
/// lines and report no intersection.
pub fn discharge_lines(
    model: &DischargeModel,
    cfg: &Config,
    settings: &[LaserConfig],
    v_grid: &[f64],
) -> Result<DischargeAnalysis, SweepError> {
    if v_grid.len() < 2 {
        return Err(SweepError::Discharge(format!(
            "need at least 2 discharge voltages, got {}",
            v_grid.len()
        )));
    }
    if settings.is_empty() {
        return Err(SweepError::Discharge("need at least one pump setting".into()));
    }
    let base_hz = cfg.atomic.gamma_g * cfg.b0 / (2.0 * PI);
    let mut lines = Vec::with_capacity(settings.len());
    for (idx, laser) in settings.iter().enumerate() {
        let fields = if laser.intensity > 0.0 {
            effective_fields(&cfg.constants, &cfg.atomic, laser)
                .map_err(|e| SweepError::Discharge(e.to_string()))?
        } else {
            LightShiftFields::dark()
        };
        let pts: Vec<(f64, f64)> = v_grid
            .iter()
            .map(|&v| {
                let inv_t = model.inverse_t(v);
                let mut exch = cfg.exchange.clone();
                exch.t_ground = if inv_t > 0.0 { 1.0 / inv_t } else { f64::INFINITY };
                let elim = beta_closed_form(cfg.b0, &fields, &cfg.atomic, &exch)
                    .map_err(|e| SweepError::Discharge(e.to_string()))?;
                Ok((v, base_hz + elim.frequency_shift))
            })
            .collect::<Result<_, SweepError>>()?;
        let (slope, intercept) = fit_line(&pts).ok_or_else(|| {
            SweepError::Discharge("degenerate voltage grid for line fit".into())
        })?;
        lines.push(DischargeLine {
            setting: idx,
            slope,
            intercept,
        });
    }

    let mut intersections = Vec::new();
    let slope_scale = lines
        .iter()
        .map(|l| l.slope.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for a in 0..lines.len() {
        for b in (a + 1)..lines.len() {
            let ds = lines[a].slope - lines[b].slope;
            if ds.abs() <= 1e-12 * slope_scale {
                continue; // parallel: identical β
            }
            let v = (lines[b].intercept - lines[a].intercept) / ds;
            intersections.push(LineIntersection {
                setting_a: a,
                setting_b: b,
                v_dis: v,
                frequency: lines[a].slope * v + lines[a].intercept,
            });
        }
    }
    Ok(DischargeAnalysis {
        lines,
        intersections,
    })
}

fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    Some((slope, (sy - slope * sx) / n))
}
