//! Browser bindings for the `mecshift` engine.
//!
//! Three interactive operations are exposed to JavaScript, all speaking JSON
//! strings so the page needs no generated glue beyond wasm-bindgen itself:
//!
//! - [`sweep_curves`]: observables (frequency shift, relaxation rate) over a
//!   field or detuning grid, with pump on and off, for plotting.
//! - [`fid_demo`]: synthesize a noisy free-induction-decay trace and fit it,
//!   returning the trace, the fit curve, and the recovered parameters.
//! - [`verify_report`]: the cross-module identity checks as JSON.
//!
//! Build for the browser with `wasm-pack build crates/web --target web`;
//! the crate also compiles natively so the bindings stay under `cargo test`
//! (the `*_impl` functions carry the logic; the exports only translate
//! errors for JavaScript).

use mecshift::dynamics::beta_closed_form;
use mecshift::fid::{fit, initial_guess, synthesize, FidParams};
use mecshift::lightshift::{effective_fields, LightShiftFields};
use mecshift::quantities::load_config;
use mecshift::sweep::{run_sweep, GridSpec, SweepAxis, SweepSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    axis: String,
    axis_values: Vec<f64>,
    /// Light-on frequency shift Δf [Hz] (failed grid points are dropped).
    shift_on: Vec<f64>,
    /// Light-on relaxation rate Γ₂ [s⁻¹].
    gamma2_on: Vec<f64>,
    shift_off: Vec<f64>,
    gamma2_off: Vec<f64>,
}

fn sweep_once(
    config_toml: &str,
    axis: SweepAxis,
    grid: GridSpec,
    pump: bool,
) -> Result<Vec<(f64, f64, f64)>, String> {
    let config = load_config(config_toml).map_err(|e| e.to_string())?;
    let spec = SweepSpec {
        config,
        axis,
        grid,
        pump,
    };
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .filter_map(|r| r.values.map(|v| (r.axis_value, v.frequency_shift, v.gamma2)))
        .collect())
}

fn sweep_curves_impl(config_toml: &str, axis: &str, grid: &str) -> Result<String, String> {
    let axis: SweepAxis = axis.parse().map_err(|e: mecshift::sweep::SweepError| e.to_string())?;
    let grid: GridSpec = grid.parse().map_err(|e: mecshift::sweep::SweepError| e.to_string())?;
    let on = sweep_once(config_toml, axis, grid, true)?;
    let off = sweep_once(config_toml, axis, grid, false)?;
    let curve = Curve {
        axis: axis.to_string(),
        axis_values: on.iter().map(|p| p.0).collect(),
        shift_on: on.iter().map(|p| p.1).collect(),
        gamma2_on: on.iter().map(|p| p.2).collect(),
        shift_off: off.iter().map(|p| p.1).collect(),
        gamma2_off: off.iter().map(|p| p.2).collect(),
    };
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

fn point_observables_impl(config_toml: &str, detuning_hz: f64) -> Result<String, String> {
    let config = load_config(config_toml).map_err(|e| e.to_string())?;
    let mut laser = config.laser.clone();
    laser.angular_frequency = config.atomic.omega8 + 2.0 * std::f64::consts::PI * detuning_hz;
    let fields = if laser.intensity > 0.0 {
        effective_fields(&config.constants, &config.atomic, &laser).map_err(|e| e.to_string())?
    } else {
        LightShiftFields::dark()
    };
    let r = beta_closed_form(config.b0, &fields, &config.atomic, &config.exchange)
        .map_err(|e| e.to_string())?;
    let out = serde_json::json!({
        "shift_hz": r.frequency_shift,
        "gamma2_per_s": r.gamma2,
        "delta_b_half": [fields.delta_b_half.re, fields.delta_b_half.im],
        "delta_b_threehalf": [fields.delta_b_threehalf.re, fields.delta_b_threehalf.im],
    });
    Ok(out.to_string())
}

#[derive(Serialize)]
struct FidDemo {
    time_s: Vec<f64>,
    signal: Vec<f64>,
    fit_curve: Vec<f64>,
    truth: FidParams,
    fitted: FidParams,
    converged: bool,
    iterations: usize,
    residual_rms: f64,
    f0_error_hz: f64,
}

fn fid_demo_impl(f0: f64, t2: f64, snr: f64, seed: u32) -> Result<String, String> {
    if !(snr > 0.0) {
        return Err("snr must be positive".into());
    }
    let truth = FidParams {
        s0: 1.0,
        f0,
        phi: 0.4,
        t2,
        s1: 0.1,
        t1: t2 / 2.5,
    };
    let trace =
        synthesize(&truth, 100.0, 60.0, 1.0 / snr, seed as u64).map_err(|e| e.to_string())?;
    let guess = initial_guess(&trace).map_err(|e| e.to_string())?;
    let report = fit(&trace, &guess).map_err(|e| e.to_string())?;
    // decimate for the canvas
    let step = (trace.samples.len() / 3000).max(1);
    let dt = 1.0 / trace.sample_rate;
    let mut time_s = Vec::new();
    let mut signal = Vec::new();
    let mut fit_curve = Vec::new();
    for (i, &s) in trace.samples.iter().enumerate().step_by(step) {
        let t = i as f64 * dt;
        time_s.push(t);
        signal.push(s);
        fit_curve.push(report.params.eval(t));
    }
    let demo = FidDemo {
        time_s,
        signal,
        fit_curve,
        truth,
        f0_error_hz: report.params.f0 - truth.f0,
        fitted: report.params,
        converged: report.converged,
        iterations: report.iterations,
        residual_rms: report.residual_rms,
    };
    serde_json::to_string(&demo).map_err(|e| e.to_string())
}

fn verify_report_impl() -> Result<String, String> {
    let config = load_config("").map_err(|e| e.to_string())?;
    let report = mecshift::verify::verify(&config);
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Evaluate pump-on and pump-off observable curves over one axis.
///
/// `axis` is `field | detuning | intensity | discharge`; `grid` is
/// `min:max:count:lin|log`; `config_toml` may be empty for defaults.
/// Returns a JSON object with parallel arrays, or throws a string error.
#[wasm_bindgen]
pub fn sweep_curves(config_toml: &str, axis: &str, grid: &str) -> Result<String, JsError> {
    sweep_curves_impl(config_toml, axis, grid).map_err(|e| JsError::new(&e))
}

/// Frequency shift and relaxation at a single detuning, as a JSON object
/// `{shift_hz, gamma2_per_s, delta_b_half: [re, im], delta_b_threehalf: [re, im]}`.
#[wasm_bindgen]
pub fn point_observables(config_toml: &str, detuning_hz: f64) -> Result<String, JsError> {
    point_observables_impl(config_toml, detuning_hz).map_err(|e| JsError::new(&e))
}

/// Synthesize a noisy decay trace, fit it, and return everything a plot
/// needs. `snr` is S₀ divided by the noise standard deviation.
#[wasm_bindgen]
pub fn fid_demo(f0: f64, t2: f64, snr: f64, seed: u32) -> Result<String, JsError> {
    fid_demo_impl(f0, t2, snr, seed).map_err(|e| JsError::new(&e))
}

/// Run the cross-module verification suite on the default configuration.
#[wasm_bindgen]
pub fn verify_report() -> Result<String, JsError> {
    verify_report_impl().map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_curves_returns_parallel_arrays() {
        let json = sweep_curves_impl("", "field", "1e-9:1e-5:9:log").unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let n = v["axis_values"].as_array().unwrap().len();
        assert_eq!(n, 9);
        for key in ["shift_on", "gamma2_on", "shift_off", "gamma2_off"] {
            assert_eq!(v[key].as_array().unwrap().len(), n, "{key}");
        }
        // the pump light relaxes faster than dark at low field
        assert!(v["gamma2_on"][0].as_f64().unwrap() > v["gamma2_off"][0].as_f64().unwrap());
    }

    #[test]
    fn bad_axis_and_bad_grid_are_clean_errors() {
        assert!(sweep_curves_impl("", "volume", "1:2:3:lin").is_err());
        assert!(sweep_curves_impl("", "field", "3:2:5:lin").is_err());
    }

    #[test]
    fn fid_demo_recovers_the_frequency() {
        let json = fid_demo_impl(7.821, 30.0, 100.0, 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["converged"].as_bool().unwrap());
        assert!(v["f0_error_hz"].as_f64().unwrap().abs() < 1e-3);
        assert_eq!(
            v["time_s"].as_array().unwrap().len(),
            v["fit_curve"].as_array().unwrap().len()
        );
    }

    #[test]
    fn point_observables_match_dark_limit_at_zero_intensity() {
        let json =
            point_observables_impl("[laser]\nintensity_mw_per_cm2 = 0.0\n", -1e9).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["delta_b_half"][0].as_f64().unwrap(), 0.0);
        assert_eq!(v["delta_b_half"][1].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn verify_report_passes() {
        let json = verify_report_impl().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["passed"].as_bool().unwrap());
    }
}
