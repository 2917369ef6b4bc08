//! Coupled transverse-spin dynamics of ground-state and metastable ³He
//! under metastability-exchange collisions (MEC) and the light-shift
//! fields.
//!
//! The three complex amplitudes (I₊, F₃/₂,₊, F₁/₂,₊) obey a linear system
//! ds/dt = M·s that is extremely stiff (MEC timescale τ ~ 10⁻⁷ s against
//! ground-state times of seconds), so propagation uses the exact
//! eigendecomposition of the 3×3 matrix rather than step integration, with
//! a scaling-and-squaring matrix exponential as fallback for defective
//! cases. Adiabatic elimination of the two fast metastable modes yields the
//! complex coefficient β whose imaginary part shifts the nuclear precession
//! frequency and whose real part sets the transverse relaxation rate.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::lightshift::LightShiftFields;
use crate::quantities::{AtomicConfig, ExchangeConfig};

type C = Complex64;
type CMat3 = Matrix3<Complex64>;
type CVec3 = Vector3<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("eigendecomposition failed and fallback exhausted: {0}")]
    Eigen(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// The three transverse amplitudes, ordering (I₊, F₃/₂,₊, F₁/₂,₊).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseState {
    pub i_plus: Complex64,
    pub f32_plus: Complex64,
    pub f12_plus: Complex64,
}

impl TransverseState {
    pub fn new(i_plus: Complex64, f32_plus: Complex64, f12_plus: Complex64) -> Self {
        TransverseState {
            i_plus,
            f32_plus,
            f12_plus,
        }
    }

    fn to_vector(self) -> CVec3 {
        CVec3::new(self.i_plus, self.f32_plus, self.f12_plus)
    }

    fn from_vector(v: CVec3) -> Self {
        TransverseState {
            i_plus: v[0],
            f32_plus: v[1],
            f12_plus: v[2],
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.i_plus, self.f32_plus, self.f12_plus]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// The 3×3 complex generator of the coupled transverse dynamics, with the
/// inputs it was built from.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    pub m: CMat3,
    pub b0: f64,
    pub fields: LightShiftFields,
    pub exchange: ExchangeConfig,
}

/// Assemble the generator: ground row carries the Larmor term iγ_g·B₀, the
/// MEC feed 1/(3T) and the intrinsic loss 1/T_r; the two metastable rows
/// carry their Larmor terms at Landé-scaled γ_m·(B₀+δB_F) and the MEC
/// exchange rates in units of 1/(9τ).
pub fn build_system_matrix(
    b0: f64,
    fields: &LightShiftFields,
    exch: &ExchangeConfig,
    atomic: &AtomicConfig,
) -> SystemMatrix {
    let i = C::new(0.0, 1.0);
    let inv_t = 1.0 / exch.t_ground;
    let inv_tr = 1.0 / exch.t_relax;
    let inv_9tau = 1.0 / (9.0 * exch.tau_metastable);
    let gm = atomic.gamma_m;
    let b0c = C::new(b0, 0.0);

    let m = CMat3::new(
        i * atomic.gamma_g * b0 - C::new(inv_t + inv_tr, 0.0),
        C::new(inv_t / 3.0, 0.0),
        C::new(-inv_t / 3.0, 0.0),
        //
        C::new(10.0 * inv_9tau, 0.0),
        i * (2.0 / 3.0) * gm * (b0c + fields.delta_b_threehalf) - C::new(4.0 * inv_9tau, 0.0),
        C::new(10.0 * inv_9tau, 0.0),
        //
        C::new(-inv_9tau, 0.0),
        C::new(inv_9tau, 0.0),
        i * (4.0 / 3.0) * gm * (b0c + fields.delta_b_half) - C::new(7.0 * inv_9tau, 0.0),
    );
    SystemMatrix {
        m,
        b0,
        fields: *fields,
        exchange: exch.clone(),
    }
}

/// Roots of λ³ + aλ² + bλ + c with complex coefficients (Cardano, with a
/// Newton polish on the original polynomial).
fn cubic_roots(a: C, b: C, c: C) -> [C; 3] {
    let third = C::new(1.0 / 3.0, 0.0);
    let p = b - a * a * third;
    let q = a * a * a * C::new(2.0 / 27.0, 0.0) - a * b * third + c;
    let half_q = q * 0.5;
    let disc = half_q * half_q + (p * third) * (p * third) * (p * third);
    let s = disc.sqrt();
    // pick the cube-root argument with the larger magnitude to dodge
    // cancellation
    let u3 = if (-half_q + s).norm() >= (-half_q - s).norm() {
        -half_q + s
    } else {
        -half_q - s
    };
    let shift = a * third;
    let mut roots = if u3.norm() == 0.0 {
        [-shift; 3]
    } else {
        let u = u3.powf(1.0 / 3.0);
        let v = -p * third / u;
        let w = C::new(-0.5, 0.75f64.sqrt());
        let wc = w.conj();
        [
            u + v - shift,
            u * w + v * wc - shift,
            u * wc + v * w - shift,
        ]
    };
    // Newton polish
    for r in &mut roots {
        for _ in 0..6 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (*r * 3.0 + a * 2.0) * *r + b;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    roots
}

/// Eigenvalues and (column) eigenvectors of the generator. Eigenvectors are
/// unit-norm; eigenvalues come from the characteristic cubic with residual
/// polish, eigenvectors from the adjugate (cross products of rows of
/// M − λI).
pub fn eigensystem(sys: &SystemMatrix) -> Result<([C; 3], CMat3), DynamicsError> {
    let m = &sys.m;
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let n = m / C::new(scale, 0.0);

    // characteristic polynomial of the normalized matrix:
    // λ³ − tr·λ² + (sum of principal 2-minors)·λ − det
    let tr = n.trace();
    let minors = n[(0, 0)] * n[(1, 1)] - n[(0, 1)] * n[(1, 0)]
        + n[(0, 0)] * n[(2, 2)]
        - n[(0, 2)] * n[(2, 0)]
        + n[(1, 1)] * n[(2, 2)]
        - n[(1, 2)] * n[(2, 1)];
    let det = n.determinant();
    let roots = cubic_roots(-tr, minors, -det);

    let mut vectors = CMat3::zeros();
    for (k, lam) in roots.iter().enumerate() {
        let a = n - CMat3::identity() * *lam;
        let r0 = CVec3::new(a[(0, 0)], a[(0, 1)], a[(0, 2)]);
        let r1 = CVec3::new(a[(1, 0)], a[(1, 1)], a[(1, 2)]);
        let r2 = CVec3::new(a[(2, 0)], a[(2, 1)], a[(2, 2)]);
        // bilinear (unconjugated) cross products: each is orthogonal to two
        // rows, hence proportional to the null vector when rank(A) = 2
        let cands = [bilinear_cross(&r0, &r1), bilinear_cross(&r0, &r2), bilinear_cross(&r1, &r2)];
        let best = cands
            .iter()
            .max_by(|x, y| x.norm().partial_cmp(&y.norm()).expect("finite norms"))
            .expect("three candidates");
        if best.norm() < 1e-14 {
            return Err(DynamicsError::Eigen(format!(
                "rank-deficient adjugate at eigenvalue {lam} (defective or \
                 degenerate matrix)"
            )));
        }
        let v = best / C::new(best.norm(), 0.0);
        // residual check against the normalized matrix
        let res = (&a * v).norm();
        if res > 1e-9 {
            return Err(DynamicsError::Eigen(format!(
                "eigenpair residual {res:.3e} at eigenvalue {lam}"
            )));
        }
        vectors.set_column(k, &v);
    }
    let eigenvalues = [
        roots[0] * scale,
        roots[1] * scale,
        roots[2] * scale,
    ];
    Ok((eigenvalues, vectors))
}

fn bilinear_cross(a: &CVec3, b: &CVec3) -> CVec3 {
    CVec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

/// Matrix exponential exp(M·t) by scaling and squaring with a Taylor core.
fn expm(m: &CMat3, t: f64) -> CMat3 {
    let a = m * C::new(t, 0.0);
    let norm = a.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a / C::new(2f64.powi(squarings as i32), 0.0);
    let mut result = CMat3::identity();
    let mut term = CMat3::identity();
    for k in 1..=24 {
        term = term * b / C::new(k as f64, 0.0);
        result += term;
        if term.norm() < 1e-18 * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Exact propagation s(t) = exp(M·t)·s₀ via eigendecomposition; falls back
/// to scaling-and-squaring when the eigensystem is defective.
pub fn evolve(
    sys: &SystemMatrix,
    s0: &TransverseState,
    t: f64,
) -> Result<TransverseState, DynamicsError> {
    if !(t >= 0.0) {
        return Err(DynamicsError::Domain(format!("negative time {t}")));
    }
    let v0 = s0.to_vector();
    match eigensystem(sys) {
        Ok((lams, vecs)) => {
            let lu = vecs.full_piv_lu();
            if let Some(coeffs) = lu.solve(&v0) {
                let mut acc = CVec3::zeros();
                for k in 0..3 {
                    acc += vecs.column(k) * (coeffs[k] * (lams[k] * C::new(t, 0.0)).exp());
                }
                let out = TransverseState::from_vector(acc);
                if out.is_finite() {
                    return Ok(out);
                }
            }
            // ill-conditioned eigenbasis: fall through to the exponential
        }
        Err(_) => {}
    }
    let out = TransverseState::from_vector(expm(&sys.m, t) * v0);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(DynamicsError::Eigen(
            "both eigendecomposition and matrix exponential produced \
             non-finite amplitudes"
                .into(),
        ))
    }
}

/// The slow eigenvalue and how unambiguously it was identified.
#[derive(Debug, Clone, Copy)]
pub struct SlowMode {
    pub eigenvalue: Complex64,
    /// |I₊| weight of the winning eigenvector over the runner-up; < 1.1
    /// means the identification is ambiguous.
    pub dominance_ratio: f64,
}

impl SlowMode {
    pub fn is_ambiguous(&self) -> bool {
        self.dominance_ratio < 1.1
    }
}

/// Pick the slow (ground-state-like) mode: the eigenvalue whose unit
/// eigenvector has the largest |I₊| component, ties broken by smaller
/// |Im λ|. Selection by eigenvector dominance rather than eigenvalue
/// magnitude — near zero field with light on, the real parts of fast and
/// slow modes can be comparable.
pub fn slow_mode(sys: &SystemMatrix) -> Result<SlowMode, DynamicsError> {
    let (lams, vecs) = eigensystem(sys)?;
    let mut weights: Vec<(usize, f64)> = (0..3)
        .map(|k| (k, vecs[(0, k)].norm()))
        .collect();
    weights.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| lams[a.0].im.abs().partial_cmp(&lams[b.0].im.abs()).unwrap())
    });
    let best = weights[0];
    let second = weights[1];
    let dominance_ratio = if second.1 > 0.0 {
        best.1 / second.1
    } else {
        f64::INFINITY
    };
    Ok(SlowMode {
        eigenvalue: lams[best.0],
        dominance_ratio,
    })
}

/// β plus the observables derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliminationResult {
    pub beta: Complex64,
    /// Frequency shift of the nuclear precession, −Im[β]/(2πT) [Hz].
    pub frequency_shift: f64,
    /// Transverse relaxation rate 1/T_r + (1+Re[β])/T [s⁻¹].
    pub gamma2: f64,
}

impl EliminationResult {
    fn from_beta(beta: Complex64, exch: &ExchangeConfig) -> Self {
        EliminationResult {
            beta,
            frequency_shift: -beta.im / (2.0 * std::f64::consts::PI * exch.t_ground),
            gamma2: 1.0 / exch.t_relax + (1.0 + beta.re) / exch.t_ground,
        }
    }
}

/// Closed-form adiabatic-elimination coefficient
///
/// β = (−iγ_m(20δB₁/₂+δB₃/₂)τ − 21iω_mτ + 9) /
///     (12γ_mδB₁/₂τ(3ω_mτ + 3γ_mδB₃/₂τ + 2i) + 3γ_mδB₃/₂τ(7i + 12ω_mτ)
///      − 9(1 − iω_mτ)(1 − 4iω_mτ)),
///
/// with ω_m = γ_m·B₀.
pub fn beta_closed_form(
    b0: f64,
    fields: &LightShiftFields,
    atomic: &AtomicConfig,
    exch: &ExchangeConfig,
) -> Result<EliminationResult, DynamicsError> {
    let i = C::new(0.0, 1.0);
    let tau = exch.tau_metastable;
    let gm = atomic.gamma_m;
    let wm_tau = C::new(gm * b0 * tau, 0.0);
    let gb12 = fields.delta_b_half * gm * tau;
    let gb32 = fields.delta_b_threehalf * gm * tau;
    let one = C::new(1.0, 0.0);

    let num = -i * (gb12 * 20.0 + gb32) - i * wm_tau * 21.0 + 9.0;
    let den = gb12 * 12.0 * (wm_tau * 3.0 + gb32 * 3.0 + i * 2.0)
        + gb32 * 3.0 * (i * 7.0 + wm_tau * 12.0)
        - (one - i * wm_tau) * (one - i * wm_tau * 4.0) * 9.0;
    if den.norm() < 1e-300 {
        return Err(DynamicsError::Singular(
            "vanishing denominator in the elimination coefficient".into(),
        ));
    }
    Ok(EliminationResult::from_beta(num / den, exch))
}

/// Independent oracle for β: solve the quasi-static 2×2 system
/// dF₃/₂,₊/dt = dF₁/₂,₊/dt = 0 for the metastable amplitudes at fixed I₊
/// and form β = −(F₃/₂,₊ − F₁/₂,₊)/(3I₊).
pub fn beta_quasistatic(
    b0: f64,
    fields: &LightShiftFields,
    atomic: &AtomicConfig,
    exch: &ExchangeConfig,
) -> Result<EliminationResult, DynamicsError> {
    let sys = build_system_matrix(b0, fields, exch, atomic);
    let m = &sys.m;
    // rows 1 and 2 of M: [m10 m11 m12; m20 m21 m22]·(I₊,F₃/₂,F₁/₂)ᵀ = 0
    // with I₊ = 1:
    //   m11·F₃/₂ + m12·F₁/₂ = −m10
    //   m21·F₃/₂ + m22·F₁/₂ = −m20
    let det = m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    if det.norm() < 1e-300 {
        return Err(DynamicsError::Singular(
            "quasi-static metastable balance is singular".into(),
        ));
    }
    let f32p = (-m[(1, 0)] * m[(2, 2)] + m[(1, 2)] * m[(2, 0)]) / det;
    let f12p = (-m[(1, 1)] * m[(2, 0)] + m[(2, 1)] * m[(1, 0)]) / det;
    let beta = -(f32p - f12p) / 3.0;
    Ok(EliminationResult::from_beta(beta, exch))
}

/// Dark (pump-off) transverse relaxation rate
/// Γ₂ = 1/T_r + (1/T)·(1 − (4/9)/(1+x²) − (5/9)/(1+16x²)), x = γ_m·B₀·τ.
pub fn gamma2_dark(b0: f64, exch: &ExchangeConfig, atomic: &AtomicConfig) -> f64 {
    let x = atomic.gamma_m * b0 * exch.tau_metastable;
    let bracket = 1.0 - (4.0 / 9.0) / (1.0 + x * x) - (5.0 / 9.0) / (1.0 + 16.0 * x * x);
    1.0 / exch.t_relax + bracket / exch.t_ground
}

/// Steady-state direction of the pure-MEC system (B₀ = 0, δB = 0,
/// 1/T_r = 0): the one-dimensional null space, normalized to I₊ = 1. On it
/// the ground polarization equals the metastable one,
/// I₊ = (F₃/₂,₊ − F₁/₂,₊)/3.
pub fn mec_steady_state(exch: &ExchangeConfig) -> Result<TransverseState, DynamicsError> {
    mec_steady_state_of(&pure_mec_matrix(exch))
}

/// Null-space extraction for an explicitly supplied MEC matrix (exposed so
/// the verification suite can run a perturbed negative control).
pub fn mec_steady_state_of(m: &CMat3) -> Result<TransverseState, DynamicsError> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let n = m / C::new(scale, 0.0);
    let r0 = CVec3::new(n[(0, 0)], n[(0, 1)], n[(0, 2)]);
    let r1 = CVec3::new(n[(1, 0)], n[(1, 1)], n[(1, 2)]);
    let r2 = CVec3::new(n[(2, 0)], n[(2, 1)], n[(2, 2)]);
    let cands = [bilinear_cross(&r0, &r1), bilinear_cross(&r0, &r2), bilinear_cross(&r1, &r2)];
    let best = cands
        .iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).expect("finite norms"))
        .expect("three candidates");
    if best.norm() < 1e-14 {
        return Err(DynamicsError::Singular(
            "null space of the MEC matrix is not one-dimensional".into(),
        ));
    }
    let v = best / C::new(best.norm(), 0.0);
    // the direction must actually be a null vector
    let res = (n * v).norm();
    if res > 1e-12 {
        return Err(DynamicsError::Singular(format!(
            "candidate steady state has residual {res:.3e}; null space \
             dimension ≠ 1"
        )));
    }
    let out = TransverseState::from_vector(v / v[0]);
    let imbalance = (out.i_plus - (out.f32_plus - out.f12_plus) / 3.0).norm();
    if imbalance > 1e-12 {
        return Err(DynamicsError::Singular(format!(
            "steady state violates the polarization-equality relation by \
             {imbalance:.3e}"
        )));
    }
    Ok(out)
}

/// The MEC-only generator: no precession, no light, no intrinsic loss.
pub fn pure_mec_matrix(exch: &ExchangeConfig) -> CMat3 {
    let inv_t = 1.0 / exch.t_ground;
    let inv_9tau = 1.0 / (9.0 * exch.tau_metastable);
    CMat3::new(
        C::new(-inv_t, 0.0),
        C::new(inv_t / 3.0, 0.0),
        C::new(-inv_t / 3.0, 0.0),
        C::new(10.0 * inv_9tau, 0.0),
        C::new(-4.0 * inv_9tau, 0.0),
        C::new(10.0 * inv_9tau, 0.0),
        C::new(-inv_9tau, 0.0),
        C::new(inv_9tau, 0.0),
        C::new(-7.0 * inv_9tau, 0.0),
    )
}

/// The conserved MEC functional N·I₊ + n·(F₃/₂,₊ + F₁/₂,₊), evaluated with
/// n/N = τ/T.
pub fn conserved_functional(s: &TransverseState, exch: &ExchangeConfig) -> Complex64 {
    let ratio = exch.density_ratio();
    s.i_plus + (s.f32_plus + s.f12_plus) * ratio
}
