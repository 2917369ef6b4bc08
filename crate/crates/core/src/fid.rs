//! Free-induction-decay signals: synthesis, spectral initial guess, and
//! damped nonlinear least-squares extraction of the precession parameters.
//!
//! The signal model is a damped oscillation plus a longitudinal leak,
//! S(t) = S₀·sin(2πf₀t + φ)·e^(−t/T₂) + S₁·e^(−t/T₁),
//! fitted with an analytic-Jacobian Levenberg–Marquardt loop. Callers may
//! freeze any parameter subset (typically S₁ = 0 for clean traces).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum FidError {
    #[error("Nyquist violation: sample rate {rate} Hz ≤ 2·f₀ = {nyquist} Hz")]
    Nyquist { rate: f64, nyquist: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no spectral peak above the noise floor (peak/floor = {ratio:.2})")]
    NoPeak { ratio: f64 },
    #[error("trace format error: {0}")]
    Csv(String),
    #[error("normal matrix is rank-deficient at iteration {0}")]
    Singular(usize),
}

/// The six parameters of the FID model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidParams {
    /// Oscillation amplitude [signal units].
    pub s0: f64,
    /// Precession frequency [Hz].
    pub f0: f64,
    /// Initial phase [rad], wrapped to (−π, π].
    pub phi: f64,
    /// Transverse decay time [s].
    pub t2: f64,
    /// Longitudinal-leak amplitude [signal units].
    pub s1: f64,
    /// Longitudinal decay time [s].
    pub t1: f64,
}

impl FidParams {
    pub fn validate(&self) -> Result<(), FidError> {
        if !(self.t2 > 0.0) || !(self.t1 > 0.0) {
            return Err(FidError::Domain(format!(
                "decay times must be positive (T₂ = {}, T₁ = {})",
                self.t2, self.t1
            )));
        }
        if !(self.f0 > 0.0) {
            return Err(FidError::Domain(format!("f₀ must be positive, got {}", self.f0)));
        }
        Ok(())
    }

    /// The model evaluated at time t.
    pub fn eval(&self, t: f64) -> f64 {
        self.s0 * (2.0 * PI * self.f0 * t + self.phi).sin() * (-t / self.t2).exp()
            + self.s1 * (-t / self.t1).exp()
    }

    /// Parameters in fit order: [S₀, f₀, φ, T₂, S₁, T₁].
    pub fn to_array(self) -> [f64; 6] {
        [self.s0, self.f0, self.phi, self.t2, self.s1, self.t1]
    }

    /// Inverse of [`FidParams::to_array`].
    pub fn from_array(p: [f64; 6]) -> Self {
        FidParams {
            s0: p[0],
            f0: p[1],
            phi: p[2],
            t2: p[3],
            s1: p[4],
            t1: p[5],
        }
    }
}

/// Wrap a phase to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// A uniformly sampled real trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FidTrace {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    pub noise_sigma: f64,
}

impl FidTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = 1.0 / self.sample_rate;
        (0..self.samples.len()).map(move |n| n as f64 * dt)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Evaluate the model on a uniform grid and add white Gaussian noise of the
/// given sigma, reproducibly for a fixed seed.
pub fn synthesize(
    p: &FidParams,
    sample_rate: f64,
    duration: f64,
    noise_sigma: f64,
    rng_seed: u64,
) -> Result<FidTrace, FidError> {
    p.validate()?;
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(FidError::Domain(format!(
            "need positive duration and rate, got {duration} s at {sample_rate} Hz"
        )));
    }
    if sample_rate <= 2.0 * p.f0 {
        return Err(FidError::Nyquist {
            rate: sample_rate,
            nyquist: 2.0 * p.f0,
        });
    }
    if !(noise_sigma >= 0.0) {
        return Err(FidError::Domain(format!("negative noise sigma {noise_sigma}")));
    }
    let n = (duration * sample_rate).round() as usize;
    let dt = 1.0 / sample_rate;
    let mut samples: Vec<f64> = (0..n).map(|k| p.eval(k as f64 * dt)).collect();
    if noise_sigma > 0.0 {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(rng_seed);
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| FidError::Domain(format!("noise distribution: {e}")))?;
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    Ok(FidTrace {
        sample_rate,
        samples,
        noise_sigma,
    })
}

/// Spectral-peak initial guess: f₀ from the discrete-spectrum maximum with
/// quadratic interpolation, φ from the peak-bin phase, T₂ from a
/// log-envelope fit of the demodulated magnitude, and the baseline pair
/// (S₁, T₁) from period-averaged residual means.
pub fn initial_guess(trace: &FidTrace) -> Result<FidParams, FidError> {
    let n = trace.samples.len();
    if n < 16 {
        return Err(FidError::Domain(format!("trace too short ({n} samples)")));
    }
    let rate = trace.sample_rate;

    // spectrum of the mean-removed trace
    let mean = trace.samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = trace
        .samples
        .iter()
        .map(|&s| Complex64::new(s - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    // skip bins bleeding from the (removed) baseline: anything slower than
    // a couple of resolution widths
    let k_min = 3.min(half.saturating_sub(1)).max(1);
    // peak detection runs on the first-differenced trace: differencing tilts
    // the spectrum by ~sin(πk/n), flattening the 1/f tail a slow baseline
    // leaks past k_min while leaving a genuine oscillation peak dominant
    let mut dbuf: Vec<Complex64> = trace
        .samples
        .windows(2)
        .map(|w| Complex64::new(w[1] - w[0], 0.0))
        .collect();
    dbuf.push(Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut dbuf);
    let mags: Vec<f64> = dbuf[..half].iter().map(|c| c.norm()).collect();
    let (k_peak, peak) = mags
        .iter()
        .enumerate()
        .skip(k_min)
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite magnitudes"))
        .ok_or_else(|| FidError::Domain("empty spectrum".into()))?;
    let mut floor: Vec<f64> = mags[k_min..].to_vec();
    floor.sort_by(|a, b| a.partial_cmp(b).expect("finite magnitudes"));
    let median = floor[floor.len() / 2];
    let ratio = peak / median.max(f64::MIN_POSITIVE);
    if ratio < 5.0 {
        return Err(FidError::NoPeak { ratio });
    }
    // a monotone leakage tail (e.g. a slow baseline alone) has its maximum
    // pinned to the first admissible bin; a genuine tone sits interior
    if k_peak == k_min {
        return Err(FidError::NoPeak { ratio });
    }

    // quadratic interpolation on log magnitudes around the peak bin
    let delta = if k_peak > k_min && k_peak + 1 < half {
        let lm = mags[k_peak - 1].max(f64::MIN_POSITIVE).ln();
        let l0 = mags[k_peak].max(f64::MIN_POSITIVE).ln();
        let lp = mags[k_peak + 1].max(f64::MIN_POSITIVE).ln();
        let denom = lm - 2.0 * l0 + lp;
        if denom.abs() > 1e-12 {
            (0.5 * (lm - lp) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let f0 = (k_peak as f64 + delta) * rate / n as f64;
    if !(f0 > 0.0) {
        return Err(FidError::Domain(format!("non-positive frequency guess {f0}")));
    }
    // sin(θ) contributes (S₀/2i)e^{iφ} at +f₀, so φ ≈ arg X[k] + π/2
    let phi = wrap_phase(buf[k_peak].arg() + PI / 2.0);

    // envelope from I/Q demodulation at f₀, block-averaged over one period
    let dt = 1.0 / rate;
    let block = ((rate / f0).round() as usize).clamp(2, n / 4);
    let mut env_t = Vec::new();
    let mut env_v = Vec::new();
    let mut base_t = Vec::new();
    let mut base_v = Vec::new();
    let mut start = 0;
    while start + block <= n {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut dc = 0.0;
        for k in start..start + block {
            let t = k as f64 * dt;
            acc += Complex64::from_polar(trace.samples[k], 0.0)
                * Complex64::from_polar(1.0, -2.0 * PI * f0 * t);
            dc += trace.samples[k];
        }
        let t_mid = (start + block / 2) as f64 * dt;
        env_t.push(t_mid);
        env_v.push(2.0 * acc.norm() / block as f64);
        base_t.push(t_mid);
        base_v.push(dc / block as f64);
        start += block;
    }

    // log-linear fit of the envelope where it is resolvable
    let vmax = env_v.iter().cloned().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = env_t
        .iter()
        .zip(&env_v)
        .filter(|(_, &v)| v > 0.05 * vmax)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    let (slope, intercept) = linear_fit(&pts)
        .ok_or_else(|| FidError::Domain("envelope fit degenerate".into()))?;
    let t2 = if slope < -1e-12 {
        -1.0 / slope
    } else {
        10.0 * trace.duration()
    };
    let s0 = intercept.exp();

    // baseline: the demodulation average removes the oscillation, leaving
    // S₁·e^{−t/T₁}
    let quarter = base_v.len() / 4;
    let (s1, t1) = if quarter >= 1 {
        let early: f64 = base_v[..quarter].iter().sum::<f64>() / quarter as f64;
        let late: f64 =
            base_v[base_v.len() - quarter..].iter().sum::<f64>() / quarter as f64;
        let t_early = base_t[quarter / 2];
        let t_late = base_t[base_t.len() - 1 - quarter / 2];
        if early.abs() > 1e-6 * vmax && late / early > 0.0 && (early / late).abs() > 1.0 {
            let t1 = (t_late - t_early) / (early / late).ln();
            let t1 = if t1 > 0.0 { t1 } else { trace.duration() };
            (early * (t_early / t1).exp(), t1)
        } else {
            (early, trace.duration())
        }
    } else {
        (0.0, trace.duration())
    };

    Ok(FidParams {
        s0,
        f0,
        phi,
        t2,
        s1,
        t1: t1.max(1e-3 / rate),
    })
}

fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
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
    let intercept = (sy - slope * sx) / n;
    Some((slope, intercept))
}

/// Result of a least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub params: FidParams,
    /// 6×6 covariance in the parameter order (S₀, f₀, φ, T₂, S₁, T₁);
    /// rows/columns of frozen parameters are zero.
    pub covariance: Vec<Vec<f64>>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Analytic Jacobian row of the model at time t: derivatives with respect
/// to (S₀, f₀, φ, T₂, S₁, T₁).
pub fn jacobian_row(p: &FidParams, t: f64) -> [f64; 6] {
    let theta = 2.0 * PI * p.f0 * t + p.phi;
    let e2 = (-t / p.t2).exp();
    let e1 = (-t / p.t1).exp();
    let (sin_t, cos_t) = theta.sin_cos();
    [
        sin_t * e2,
        p.s0 * cos_t * 2.0 * PI * t * e2,
        p.s0 * cos_t * e2,
        p.s0 * sin_t * e2 * t / (p.t2 * p.t2),
        e1,
        p.s1 * e1 * t / (p.t1 * p.t1),
    ]
}

/// Fit all six parameters.
pub fn fit(trace: &FidTrace, guess: &FidParams) -> Result<FitReport, FidError> {
    fit_with_mask(trace, guess, &[true; 6])
}

/// Damped least squares with an analytic Jacobian. `free[i]` = false
/// freezes parameter i at its guess value. Convergence when the relative
/// cost change drops below 1e-12 or the gradient norm below 1e-10 (scaled
/// by the data); iteration exhaustion returns the best parameters with
/// `converged = false`.
pub fn fit_with_mask(
    trace: &FidTrace,
    guess: &FidParams,
    free: &[bool; 6],
) -> Result<FitReport, FidError> {
    let n = trace.samples.len();
    let free_idx: Vec<usize> = (0..6).filter(|&i| free[i]).collect();
    let k = free_idx.len();
    if k == 0 {
        return Err(FidError::Domain("all parameters frozen".into()));
    }
    if n <= k {
        return Err(FidError::Domain(format!(
            "{n} samples cannot constrain {k} parameters"
        )));
    }
    let times: Vec<f64> = trace.times().collect();
    let mut p = guess.to_array();
    for v in &p {
        if !v.is_finite() {
            return Err(FidError::Domain("non-finite initial guess".into()));
        }
    }

    let cost_of = |p: &[f64; 6]| -> f64 {
        let fp = FidParams::from_array(*p);
        times
            .iter()
            .zip(&trace.samples)
            .map(|(&t, &s)| {
                let r = s - fp.eval(t);
                r * r
            })
            .sum()
    };

    let data_scale: f64 = trace.samples.iter().map(|s| s * s).sum::<f64>().max(1e-300);
    let mut cost = cost_of(&p);
    let mut lambda = 1e-3;
    let max_iter = 200;
    let mut converged = false;
    let mut iterations = 0;
    let mut jtj = DMatrix::<f64>::zeros(k, k);
    let mut jtr = DMatrix::<f64>::zeros(k, 1);

    for iter in 0..max_iter {
        iterations = iter + 1;
        let fp = FidParams::from_array(p);
        jtj.fill(0.0);
        jtr.fill(0.0);
        for (&t, &s) in times.iter().zip(&trace.samples) {
            let row = jacobian_row(&fp, t);
            let r = s - fp.eval(t);
            for (a, &ia) in free_idx.iter().enumerate() {
                jtr[(a, 0)] += row[ia] * r;
                for (b, &ib) in free_idx.iter().enumerate() {
                    jtj[(a, b)] += row[ia] * row[ib];
                }
            }
        }
        let grad_norm = jtr.norm();
        if grad_norm <= 1e-10 * data_scale.sqrt() {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for a in 0..k {
                damped[(a, a)] += lambda * jtj[(a, a)].max(1e-300);
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => match damped.full_piv_lu().solve(&jtr) {
                    Some(s) => s,
                    None => return Err(FidError::Singular(iterations)),
                },
            };
            let mut trial = p;
            for (a, &ia) in free_idx.iter().enumerate() {
                trial[ia] += step[(a, 0)];
            }
            // keep decay times positive
            if trial[3] <= 0.0 || trial[5] <= 0.0 || trial[1] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let trial_cost = cost_of(&trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_change = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                if rel_change < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // damping exhausted: no downhill step exists at this scale
            converged = true;
        }
        if converged {
            break;
        }
    }

    let mut params = FidParams::from_array(p);
    params.phi = wrap_phase(params.phi);
    let residual_rms = (cost / n as f64).sqrt();

    // covariance of the free parameters from the final normal matrix,
    // scaled by the residual variance
    let fp = params;
    jtj.fill(0.0);
    for &t in &times {
        let row = jacobian_row(&fp, t);
        for (a, &ia) in free_idx.iter().enumerate() {
            for (b, &ib) in free_idx.iter().enumerate() {
                jtj[(a, b)] += row[ia] * row[ib];
            }
        }
    }
    let sigma2 = cost / (n - k) as f64;
    let mut covariance = vec![vec![0.0; 6]; 6];
    if let Some(inv) = jtj.clone().try_inverse() {
        for (a, &ia) in free_idx.iter().enumerate() {
            for (b, &ib) in free_idx.iter().enumerate() {
                covariance[ia][ib] = sigma2 * inv[(a, b)];
            }
        }
    }

    Ok(FitReport {
        params,
        covariance,
        residual_rms,
        converged,
        iterations,
    })
}

/// Serialize a trace as two-column CSV (time [s], signal) with one header
/// line, '.' decimal separator, LF line endings.
pub fn trace_to_csv(trace: &FidTrace) -> String {
    let mut out = String::from("time_s,signal\n");
    for (t, s) in trace.times().zip(&trace.samples) {
        out.push_str(&format!("{t:.9e},{s:.12e}\n"));
    }
    out
}

/// Parse a two-column CSV trace; requires a header line and uniform
/// sampling.
pub fn trace_from_csv(text: &str) -> Result<FidTrace, FidError> {
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            continue; // header
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let t: f64 = parts
            .next()
            .ok_or_else(|| FidError::Csv(format!("line {}: missing time column", lineno + 1)))?
            .trim()
            .parse()
            .map_err(|e| FidError::Csv(format!("line {}: bad time: {e}", lineno + 1)))?;
        let s: f64 = parts
            .next()
            .ok_or_else(|| FidError::Csv(format!("line {}: missing signal column", lineno + 1)))?
            .trim()
            .parse()
            .map_err(|e| FidError::Csv(format!("line {}: bad signal: {e}", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(FidError::Csv(format!("line {}: extra columns", lineno + 1)));
        }
        times.push(t);
        samples.push(s);
    }
    if times.len() < 2 {
        return Err(FidError::Csv("need at least two data rows".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(FidError::Csv(format!("non-increasing time step {dt}")));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt.max(1e-12) {
            return Err(FidError::Csv(format!(
                "non-uniform sampling: step {} after {}",
                w[1] - w[0],
                dt
            )));
        }
    }
    Ok(FidTrace {
        sample_rate: 1.0 / dt,
        samples,
        noise_sigma: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn standard_params() -> FidParams {
        FidParams {
            s0: 1.0,
            f0: 7.821,
            phi: 0.0,
            t2: 30.0,
            s1: 0.1,
            t1: 50.0,
        }
    }

    #[test]
    fn pure_exponential_when_oscillation_is_off() {
        let p = FidParams {
            s0: 0.0,
            f0: 1.0,
            phi: 0.0,
            t2: 1.0,
            s1: 1.0,
            t1: 10.0,
        };
        let tr = synthesize(&p, 100.0, 5.0, 0.0, 0).unwrap();
        for (t, s) in tr.times().zip(&tr.samples) {
            assert_relative_eq!(*s, (-t / 10.0).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn standard_trace_matches_the_analytic_model() {
        let p = standard_params();
        let tr = synthesize(&p, 100.0, 60.0, 0.0, 0).unwrap();
        assert_eq!(tr.samples.len(), 6000);
        // t = 0: the oscillation vanishes, only the baseline remains
        assert_relative_eq!(tr.samples[0], p.s1, max_relative = 1e-14);
        // quarter-period sample against the closed form
        let t_q = 0.25 / p.f0;
        let k = (t_q * 100.0).round() as usize;
        let t_k = k as f64 / 100.0;
        assert!((tr.samples[k] - p.eval(t_k)).abs() < 1e-6);
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let p = standard_params();
        let a = synthesize(&p, 100.0, 10.0, 0.01, 42).unwrap();
        let b = synthesize(&p, 100.0, 10.0, 0.01, 42).unwrap();
        assert_eq!(a, b);
        let c = synthesize(&p, 100.0, 10.0, 0.01, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn nyquist_violation_is_rejected() {
        let p = standard_params();
        assert!(matches!(
            synthesize(&p, 15.0, 10.0, 0.0, 0),
            Err(FidError::Nyquist { .. })
        ));
    }

    #[test]
    fn initial_guess_locates_the_frequency() {
        let p = standard_params();
        let tr = synthesize(&p, 100.0, 60.0, 0.0, 0).unwrap();
        let g = initial_guess(&tr).unwrap();
        assert!((g.f0 - p.f0).abs() < 0.01, "f₀ guess {} vs {}", g.f0, p.f0);
        assert!((g.s0 - p.s0).abs() < 0.3, "S₀ guess {}", g.s0);
        assert!(g.t2 > 10.0 && g.t2 < 100.0, "T₂ guess {}", g.t2);
    }

    #[test]
    fn initial_guess_fails_without_a_peak() {
        let p = FidParams {
            s0: 0.0,
            f0: 1.0,
            phi: 0.0,
            t2: 1.0,
            s1: 1.0,
            t1: 10.0,
        };
        let tr = synthesize(&p, 100.0, 30.0, 1e-4, 7).unwrap();
        assert!(matches!(initial_guess(&tr), Err(FidError::NoPeak { .. })));
    }

    #[test]
    fn noiseless_fit_recovers_parameters_exactly() {
        let p = standard_params();
        let tr = synthesize(&p, 100.0, 60.0, 0.0, 0).unwrap();
        let g = initial_guess(&tr).unwrap();
        let rep = fit(&tr, &g).unwrap();
        assert!(rep.converged);
        assert_relative_eq!(rep.params.f0, p.f0, max_relative = 1e-8);
        assert_relative_eq!(rep.params.s0, p.s0, max_relative = 1e-8);
        assert_relative_eq!(rep.params.t2, p.t2, max_relative = 1e-8);
        assert_relative_eq!(rep.params.s1, p.s1, max_relative = 1e-6);
        assert_relative_eq!(rep.params.t1, p.t1, max_relative = 1e-6);
        assert!(rep.params.phi.abs() < 1e-8);
        assert!(rep.residual_rms < 1e-10);
    }

    #[test]
    fn noisy_fit_recovers_frequency_to_a_millihertz() {
        let p = standard_params();
        // SNR = 100 → σ = S₀/100
        for seed in 0..20u64 {
            let tr = synthesize(&p, 100.0, 60.0, 0.01, seed).unwrap();
            let g = initial_guess(&tr).unwrap();
            let rep = fit(&tr, &g).unwrap();
            assert!(rep.converged, "seed {seed} did not converge");
            assert!(
                (rep.params.f0 - p.f0).abs() < 1e-3,
                "seed {seed}: f₀ error {:.2e}",
                (rep.params.f0 - p.f0).abs()
            );
        }
    }

    #[test]
    fn frozen_baseline_fit_on_a_clean_trace() {
        let mut p = standard_params();
        p.s1 = 0.0;
        let tr = synthesize(&p, 100.0, 60.0, 0.005, 3).unwrap();
        let mut g = initial_guess(&tr).unwrap();
        g.s1 = 0.0;
        let rep = fit_with_mask(&tr, &g, &[true, true, true, true, false, false]).unwrap();
        assert!(rep.converged);
        assert_relative_eq!(rep.params.f0, p.f0, max_relative = 1e-5);
        assert_eq!(rep.params.s1, 0.0);
        // frozen rows/columns of the covariance stay zero
        assert_eq!(rep.covariance[4][4], 0.0);
        assert_eq!(rep.covariance[5][5], 0.0);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let cases = [
            standard_params(),
            FidParams {
                s0: 0.3,
                f0: 13.7,
                phi: 1.1,
                t2: 4.0,
                s1: -0.4,
                t1: 2.5,
            },
            FidParams {
                s0: 2.0,
                f0: 0.9,
                phi: -2.9,
                t2: 80.0,
                s1: 0.01,
                t1: 300.0,
            },
        ];
        for p in cases {
            for t in [0.0, 0.013, 0.37, 2.2, 11.0] {
                let row = jacobian_row(&p, t);
                let arr = p.to_array();
                for i in 0..6 {
                    let h = 1e-6 * arr[i].abs().max(1e-2);
                    let mut hi = arr;
                    hi[i] += h;
                    let mut lo = arr;
                    lo[i] -= h;
                    let fd = (FidParams::from_array(hi).eval(t)
                        - FidParams::from_array(lo).eval(t))
                        / (2.0 * h);
                    let scale = row[i].abs().max(fd.abs()).max(1e-8);
                    assert!(
                        (row[i] - fd).abs() <= 1e-5 * scale,
                        "param {i} at t = {t}: analytic {} vs fd {}",
                        row[i],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn covariance_is_symmetric_positive_semidefinite() {
        let p = standard_params();
        let tr = synthesize(&p, 100.0, 60.0, 0.01, 11).unwrap();
        let g = initial_guess(&tr).unwrap();
        let rep = fit(&tr, &g).unwrap();
        assert!(rep.converged);
        let c = DMatrix::<f64>::from_fn(6, 6, |i, j| rep.covariance[i][j]);
        assert!((c.clone() - c.transpose()).norm() <= 1e-10 * c.norm());
        let scale = c.norm();
        let eig = c.symmetric_eigen();
        for ev in eig.eigenvalues.iter() {
            assert!(*ev >= -1e-12 * scale, "negative covariance eigenvalue {ev}");
        }
    }

    #[test]
    fn csv_round_trip_preserves_the_trace() {
        let p = standard_params();
        let tr = synthesize(&p, 100.0, 5.0, 0.01, 5).unwrap();
        let text = trace_to_csv(&tr);
        let back = trace_from_csv(&text).unwrap();
        assert_relative_eq!(back.sample_rate, tr.sample_rate, max_relative = 1e-9);
        assert_eq!(back.samples.len(), tr.samples.len());
        for (a, b) in back.samples.iter().zip(&tr.samples) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn malformed_csv_is_reported() {
        assert!(matches!(
            trace_from_csv("time,signal\n0.0,1.0\nnot,a number\n"),
            Err(FidError::Csv(_))
        ));
        assert!(matches!(trace_from_csv("header only\n"), Err(FidError::Csv(_))));
    }

    #[test]
    fn phase_wrapping_convention() {
        assert_relative_eq!(wrap_phase(3.0 * PI), PI, max_relative = 1e-12);
        assert_relative_eq!(wrap_phase(-PI), PI, max_relative = 1e-12);
        assert_relative_eq!(wrap_phase(0.3), 0.3, max_relative = 1e-12);
        assert!((wrap_phase(-0.3) + 0.3).abs() < 1e-12);
    }
}
