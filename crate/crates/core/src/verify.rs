//! Cross-module verification suite: every closed form in the crate is
//! checked against its independent oracle, producing a machine-readable
//! pass/warn/fail report.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::angular::{closed_form_parts, effective_hamiltonian_brute};
use crate::dynamics::{
    beta_closed_form, beta_quasistatic, build_system_matrix, conserved_functional, evolve,
    gamma2_dark, pure_mec_matrix, slow_mode, SystemMatrix, TransverseState,
};
use crate::lightshift::LightShiftFields;
use crate::lineshape::{faddeeva, integral_oracle, plasma_dispersion};
use crate::quantities::Config;

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Worst relative error observed.
    pub measured_error: f64,
    /// Error bound the check enforces.
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Knobs for self-testing the suite itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Negative control: deliberately flip a sign in the dark-reduction
    /// closed form so the corresponding check must fail.
    pub tamper_reduction_sign: bool,
}

fn result(name: &str, err: f64, tol: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: if err <= tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        measured_error: err,
        tolerance: tol,
        detail,
    }
}

/// Run the full verification suite on a configuration.
pub fn verify(cfg: &Config) -> VerifyReport {
    verify_with(cfg, &VerifyOptions::default())
}

pub fn verify_with(cfg: &Config, opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    checks.push(hamiltonian_identity(cfg));
    checks.push(elimination_oracle(cfg));
    checks.push(dark_reduction(cfg, opts.tamper_reduction_sign));
    checks.push(mec_conservation(cfg));
    checks.push(spectral_consistency(cfg));
    checks.push(lineshape_quadrature(cfg));
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    VerifyReport { checks, passed }
}

/// Brute-force effective Hamiltonian vs the scalar+vector+tensor closed
/// forms over random laser configurations.
fn hamiltonian_identity(cfg: &Config) -> CheckResult {
    let mut rng = StdRng::seed_from_u64(0xACC0_0001);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut laser = cfg.laser.clone();
        let raw: [Complex64; 3] = std::array::from_fn(|_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        laser.polarization = [raw[0] / norm, raw[1] / norm, raw[2] / norm];
        laser.intensity = rng.random::<f64>() * 4000.0 + 1.0;
        laser.angular_frequency =
            cfg.atomic.omega8 + 2.0 * PI * (rng.random::<f64>() - 0.5) * 60.0e9;
        let brute = match effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &laser) {
            Ok(h) => h,
            Err(e) => {
                return result(
                    "hamiltonian-identity",
                    f64::INFINITY,
                    1e-12,
                    format!("brute-force construction failed: {e}"),
                )
            }
        };
        let closed = match closed_form_parts(&cfg.constants, &cfg.atomic, &laser) {
            Ok(h) => h,
            Err(e) => {
                return result(
                    "hamiltonian-identity",
                    f64::INFINITY,
                    1e-12,
                    format!("closed-form construction failed: {e}"),
                )
            }
        };
        let rel = (&brute - &closed.matrix).norm() / brute.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    result(
        "hamiltonian-identity",
        worst,
        1e-12,
        "second-order operator: direct dipole assembly vs irreducible closed forms, \
         100 random polarizations/detunings/intensities"
            .into(),
    )
}

/// Closed-form elimination coefficient vs the quasi-static 2×2 solve.
fn elimination_oracle(cfg: &Config) -> CheckResult {
    let mut rng = StdRng::seed_from_u64(0xACC0_0002);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b0 = rng.random::<f64>() * 100e-6;
        let fields = LightShiftFields {
            delta_b_half: Complex64::new(
                (rng.random::<f64>() - 0.5) * 2e-5,
                rng.random::<f64>() * 1e-5,
            ),
            delta_b_threehalf: Complex64::new(
                (rng.random::<f64>() - 0.5) * 2e-5,
                rng.random::<f64>() * 1e-5,
            ),
        };
        let a = beta_closed_form(b0, &fields, &cfg.atomic, &cfg.exchange);
        let b = beta_quasistatic(b0, &fields, &cfg.atomic, &cfg.exchange);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let rel = (a.beta - b.beta).norm() / a.beta.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
            }
            _ => worst = f64::INFINITY,
        }
    }
    result(
        "elimination-oracle",
        worst,
        1e-12,
        "adiabatic-elimination coefficient: closed form vs quasi-static linear solve, \
         1000 random (B₀, δB) points"
            .into(),
    )
}

/// Dark closed form against the independent relaxation formula on a log
/// field grid, plus the exact zero-field and high-field limits.
fn dark_reduction(cfg: &Config, tamper: bool) -> CheckResult {
    let dark = LightShiftFields::dark();
    let mut worst = 0.0f64;
    for k in 0..=70 {
        let b0 = 1e-9 * 10f64.powf(k as f64 / 10.0);
        let r = match beta_closed_form(b0, &dark, &cfg.atomic, &cfg.exchange) {
            Ok(r) => r,
            Err(e) => {
                return result(
                    "dark-reduction",
                    f64::INFINITY,
                    1e-12,
                    format!("closed form failed: {e}"),
                )
            }
        };
        let sign = if tamper { -1.0 } else { 1.0 };
        let g = gamma2_dark(b0, &cfg.exchange, &cfg.atomic);
        let rel = (sign * r.gamma2 - g).abs() / g;
        worst = worst.max(rel);
    }
    // exact limits
    if let Ok(r0) = beta_closed_form(0.0, &dark, &cfg.atomic, &cfg.exchange) {
        if r0.beta != Complex64::new(-1.0, 0.0) {
            worst = worst.max((r0.beta + 1.0).norm());
        }
    }
    // high-field limit: β decays as (γ_m·B₀·τ)⁻², so 10 kT pushes the
    // residual far below the grid tolerance
    if let Ok(rinf) = beta_closed_form(1.0e4, &dark, &cfg.atomic, &cfg.exchange) {
        let expect = 1.0 / cfg.exchange.t_relax + 1.0 / cfg.exchange.t_ground;
        worst = worst.max(((rinf.gamma2 - expect) / expect).abs());
    }
    result(
        "dark-reduction",
        worst,
        1e-12,
        "pump-off relaxation: elimination coefficient vs direct Lorentzian formula \
         on a 1 nT–10 mT log grid, plus exact limits"
            .into(),
    )
}

/// MEC conservation: exact weighted row sums plus functional drift under
/// exact propagation out to ten ground-exchange times.
fn mec_conservation(cfg: &Config) -> CheckResult {
    let mut exch = cfg.exchange;
    exch.t_relax = f64::INFINITY;
    let m = pure_mec_matrix(&exch);
    let ratio = exch.density_ratio();
    let scale = 1.0 / exch.t_ground;
    let mut worst = 0.0f64;
    for col in 0..3 {
        let s = m[(0, col)] + (m[(1, col)] + m[(2, col)]) * ratio;
        worst = worst.max(s.norm() / scale);
    }
    let sys = SystemMatrix {
        m,
        b0: 0.0,
        fields: LightShiftFields::dark(),
        exchange: exch,
    };
    let s0 = TransverseState::new(
        Complex64::new(1.0, 0.4),
        Complex64::new(-0.3, 0.2),
        Complex64::new(0.2, -0.6),
    );
    let q0 = conserved_functional(&s0, &exch);
    for t in [1e-6, 1e-2, 1.0, 10.0 * exch.t_ground] {
        match evolve(&sys, &s0, t) {
            Ok(s) => {
                let q = conserved_functional(&s, &exch);
                worst = worst.max((q - q0).norm() / q0.norm());
            }
            Err(e) => {
                return result(
                    "mec-conservation",
                    f64::INFINITY,
                    1e-12,
                    format!("propagation failed: {e}"),
                )
            }
        }
    }
    result(
        "mec-conservation",
        worst,
        1e-12,
        "weighted angular-momentum total under pure exchange: row sums and \
         propagation drift over [0, 10T]"
            .into(),
    )
}

/// Slow eigenvalue of the full 3×3 system vs the adiabatic-elimination
/// prediction. Downgraded to a warning when τ/T exceeds 1e-3: outside the
/// adiabatic regime the 1e-3 agreement is not promised, so the measured
/// error is reported instead of enforced.
fn spectral_consistency(cfg: &Config) -> CheckResult {
    let dark = LightShiftFields::dark();
    let mut worst = 0.0f64;
    let mut detail_err = None;
    for b0 in [0.1e-6, 0.5e-6, 1e-6, 2e-6, 5e-6, 10e-6] {
        let sys = build_system_matrix(b0, &dark, &cfg.exchange, &cfg.atomic);
        let sm = match slow_mode(&sys) {
            Ok(s) => s,
            Err(e) => {
                detail_err = Some(format!("eigensolve failed at B₀ = {b0:e}: {e}"));
                worst = f64::INFINITY;
                break;
            }
        };
        let elim = match beta_closed_form(b0, &dark, &cfg.atomic, &cfg.exchange) {
            Ok(r) => r,
            Err(e) => {
                detail_err = Some(format!("elimination failed at B₀ = {b0:e}: {e}"));
                worst = f64::INFINITY;
                break;
            }
        };
        let predicted = Complex64::new(
            -elim.gamma2,
            cfg.atomic.gamma_g * b0 - elim.beta.im / cfg.exchange.t_ground,
        );
        let rel = (sm.eigenvalue - predicted).norm() / predicted.norm();
        worst = worst.max(rel);
    }
    let tol = 1e-3;
    let adiabatic = cfg.exchange.density_ratio() <= 1e-3;
    let status = if worst <= tol {
        CheckStatus::Pass
    } else if !adiabatic {
        CheckStatus::Warn
    } else {
        CheckStatus::Fail
    };
    CheckResult {
        name: "spectral-consistency".into(),
        status,
        measured_error: worst,
        tolerance: tol,
        detail: detail_err.unwrap_or_else(|| {
            if adiabatic {
                "slow eigenvalue vs adiabatic elimination at B₀ ≤ 10 µT".into()
            } else {
                format!(
                    "τ/T = {:.2e} is outside the adiabatic regime; agreement reported, \
                     not enforced",
                    cfg.exchange.density_ratio()
                )
            }
        }),
    }
}

/// Faddeeva-based lineshape vs direct quadrature of the defining integral
/// on a 100-point grid spanning resonance to far detuning.
fn lineshape_quadrature(cfg: &Config) -> CheckResult {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let detuning = -50.0e9 + 1.0e9 * k as f64;
        let omega = cfg.atomic.omega8 + 2.0 * PI * detuning;
        let fast = plasma_dispersion(
            omega,
            cfg.atomic.omega8,
            cfg.atomic.doppler_width,
            cfg.atomic.gamma_e,
        );
        let slow = integral_oracle(
            omega,
            cfg.atomic.omega8,
            cfg.atomic.doppler_width,
            cfg.atomic.gamma_e,
        );
        match (fast, slow) {
            (Ok(f), Ok(s)) => {
                let rel = (f.value - s).norm() / s.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
            }
            _ => worst = f64::INFINITY,
        }
    }
    // sanity pin: w(i) has a known closed value
    if let Ok(wi) = faddeeva(Complex64::new(0.0, 1.0)) {
        let expect = 0.42758357615580700442;
        worst = worst.max(((wi.re - expect) / expect).abs().max(wi.im.abs()));
    }
    result(
        "lineshape-quadrature",
        worst,
        1e-8,
        "Doppler-broadened response: rational/continued-fraction evaluation vs \
         adaptive quadrature of the defining integral, 100 detunings"
            .into(),
    )
}
