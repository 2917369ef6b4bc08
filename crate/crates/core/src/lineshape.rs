//! Complex error (Faddeeva) function and the plasma dispersion function
//! Z(ω;ω₀) — the Doppler-convolved Lorentzian response of the atomic line.
//!
//! Only the upper half-plane branch is supported (Im z ≥ 0): the radiative
//! decay γ_e is positive, so the physics never reaches the lower half-plane.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::f64::consts::PI;

const SQRT_PI: f64 = 1.772453850905516;

#[derive(Debug, thiserror::Error)]
pub enum LineshapeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

/// Value of Z(ω;ω₀) with the physical split into shift and absorption parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLineshape {
    /// Z [s/rad]
    pub value: Complex64,
}

impl ComplexLineshape {
    /// Dispersive (frequency-shift) part, Re Z.
    pub fn shift_part(&self) -> f64 {
        self.value.re
    }
    /// Absorptive part, Im Z. Positive for all physical inputs.
    pub fn absorption_part(&self) -> f64 {
        self.value.im
    }
}

// Weideman rational approximation of w(z), uniformly accurate in the closed
// upper half-plane. Coefficients depend only on N and are computed once by a
// direct DFT of the sampled Gaussian.
const WEIDEMAN_N: usize = 64;
static WEIDEMAN_L: Lazy<f64> = Lazy::new(|| (WEIDEMAN_N as f64 / 2.0f64.sqrt()).sqrt());
static WEIDEMAN_A: Lazy<Vec<f64>> = Lazy::new(|| {
    let n = WEIDEMAN_N;
    let m = 2 * n;
    let m2 = 2 * m;
    let l = *WEIDEMAN_L;
    // f(θ_k) = (L² + t²)·e^{−t²} at t = L·tan(θ_k/2), θ_k = kπ/M, plus f = 0
    // at the endpoint θ = ±π (t → ∞).
    let mut f = vec![0.0f64; m2];
    for (j, fj) in f.iter_mut().enumerate() {
        let k = j as i64 - m as i64; // k = −M .. M−1; k = −M endpoint stays 0
        if k == -(m as i64) {
            continue;
        }
        let theta = k as f64 * PI / m as f64;
        let t = l * (theta / 2.0).tan();
        *fj = (l * l + t * t) * (-t * t).exp();
    }
    // Real DFT: a_j = (1/M2) Σ_k f_k e^{−2πi jk/M2}, with f sampled on the
    // shifted grid. Only the low-order cosine coefficients are needed.
    let mut a = vec![0.0f64; n];
    for (j, aj) in a.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, fk) in f.iter().enumerate() {
            // index k corresponds to θ index (k − M)
            let kk = k as f64 - m as f64;
            acc += fk * ((j + 1) as f64 * kk * PI / m as f64).cos();
        }
        *aj = acc / m2 as f64;
    }
    a
});

fn faddeeva_weideman(z: Complex64) -> Complex64 {
    let l = *WEIDEMAN_L;
    let a = &*WEIDEMAN_A;
    let iz = Complex64::new(-z.im, z.re); // i·z
    let zz = (Complex64::new(l, 0.0) + iz) / (Complex64::new(l, 0.0) - iz);
    // Horner evaluation of p(Z) = Σ_{n=0}^{N−1} a_{n+1}·Z^n (the DFT
    // coefficient of frequency n+1 multiplies the power Z^n)
    let mut p = Complex64::new(0.0, 0.0);
    for &an in a.iter().rev() {
        p = p * zz + an;
    }
    let denom = Complex64::new(l, 0.0) - iz;
    2.0 * p / (denom * denom) + Complex64::new(1.0 / SQRT_PI, 0.0) / denom
}

// Laplace continued fraction, accurate for large |z| in the upper half-plane.
fn faddeeva_confrac(z: Complex64) -> Complex64 {
    // w(z) = (i/√π) / (z − 1/2/(z − 1/(z − 3/2/(z − ...))))
    let depth = 24;
    let mut f = Complex64::new(0.0, 0.0);
    for k in (1..=depth).rev() {
        f = Complex64::new(k as f64 / 2.0, 0.0) / (z - f);
    }
    Complex64::new(0.0, 1.0 / SQRT_PI) / (z - f)
}

/// Faddeeva function w(z) = e^{−z²}·[1 + erf(iz)] for Im z ≥ 0.
///
/// Relative accuracy ≤ 1e-10 over the supported branch.
pub fn faddeeva(z: Complex64) -> Result<Complex64, LineshapeError> {
    if z.im < 0.0 {
        return Err(LineshapeError::Domain(format!(
            "faddeeva: Im z = {} < 0; lower half-plane continuation unsupported",
            z.im
        )));
    }
    if z.norm_sqr() > 64.0 {
        Ok(faddeeva_confrac(z))
    } else {
        Ok(faddeeva_weideman(z))
    }
}

/// Plasma dispersion function
/// Z(ω;ω₀) = (i√π/D)·w((ω₀ − ω + iγ_e)/D) [s/rad].
pub fn plasma_dispersion(
    omega: f64,
    omega0: f64,
    doppler: f64,
    gamma_e: f64,
) -> Result<ComplexLineshape, LineshapeError> {
    if doppler <= 0.0 {
        return Err(LineshapeError::Domain(format!(
            "plasma_dispersion requires D > 0, got {doppler}"
        )));
    }
    if gamma_e <= 0.0 {
        return Err(LineshapeError::Domain(format!(
            "plasma_dispersion requires gamma_e > 0, got {gamma_e}"
        )));
    }
    let arg = Complex64::new((omega0 - omega) / doppler, gamma_e / doppler);
    let w = faddeeva(arg)?;
    Ok(ComplexLineshape {
        value: Complex64::new(0.0, SQRT_PI / doppler) * w,
    })
}

/// Reference quadrature of the defining integral
/// Z = (1/D√π)·∫ e^{−u²}/(u − ζ) du with ζ = (ω₀ − ω + iγ_e)/D.
///
/// Independent of the Faddeeva evaluation path; used by tests and `verify`.
/// The contour is shifted to Im u = −1 (no poles are crossed: ζ lies in the
/// upper half-plane), which keeps the integrand smooth even for γ_e ≪ D.
pub fn integral_oracle(
    omega: f64,
    omega0: f64,
    doppler: f64,
    gamma_e: f64,
) -> Result<Complex64, LineshapeError> {
    if doppler <= 0.0 || gamma_e <= 0.0 {
        return Err(LineshapeError::Domain(
            "integral_oracle requires D > 0 and gamma_e > 0".into(),
        ));
    }
    let zeta = Complex64::new((omega0 - omega) / doppler, gamma_e / doppler);
    let shift = Complex64::new(0.0, -1.0);
    let f = |t: f64| {
        let u = Complex64::new(t, 0.0) + shift;
        (-(u * u)).exp() / (u - zeta)
    };
    // e^{−t²+1} < 1e−34 beyond |t| = 9; integrate the rest adaptively.
    let integral = adaptive_simpson(&f, -9.0, 9.0, 1e-13, 40)?;
    Ok(integral / (doppler * SQRT_PI))
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Complex64, LineshapeError> {
    fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (fa + 4.0 * fm + fb) * (h / 6.0)
    }
    fn recurse(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Result<Complex64, LineshapeError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.norm() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(LineshapeError::Quadrature(format!(
                "max recursion depth reached on [{a}, {b}], residual {:.3e}",
                delta.norm()
            )));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
        Ok(l + r)
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}
