//! Wigner 3j/6j symbols and Clebsch–Gordan coefficients in exact
//! rational-with-square-root arithmetic.
//!
//! Racah's closed-form summations cancel catastrophically in floating point,
//! so every symbol is evaluated as `sign·√(p/q)` with exact big-integer
//! rationals and converted to f64 only at the caller's boundary.
//!
//! Angular momenta and projections are passed doubled (`two_j = 2j`) so that
//! half-integers stay exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WignerError {
    #[error("inconsistent half-integers: {0}")]
    HalfInteger(String),
}

/// Signed square root of a rational: the value `sign(r)·√|r|`, stored as the
/// signed square `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSqrt(pub BigRational);

impl SignedSqrt {
    pub fn zero() -> Self {
        SignedSqrt(BigRational::zero())
    }

    /// Construct `c·√r` (r ≥ 0).
    pub fn new(c: BigRational, r: BigRational) -> Self {
        debug_assert!(!r.is_negative());
        let sq = &c * &c * r;
        SignedSqrt(if c.is_negative() { -sq } else { sq })
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.0.abs().to_f64().unwrap_or(f64::INFINITY).sqrt();
        if self.0.is_negative() {
            -mag
        } else {
            mag
        }
    }
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn triangle_ok(two_a: i64, two_b: i64, two_c: i64) -> bool {
    two_c >= (two_a - two_b).abs() && two_c <= two_a + two_b && (two_a + two_b + two_c) % 2 == 0
}

/// Δ(abc) = (a+b−c)!(a−b+c)!(−a+b+c)!/(a+b+c+1)!; all arguments doubled.
fn triangle_coefficient(two_a: i64, two_b: i64, two_c: i64) -> BigRational {
    let num = factorial((two_a + two_b - two_c) / 2)
        * factorial((two_a - two_b + two_c) / 2)
        * factorial((-two_a + two_b + two_c) / 2);
    let den = factorial((two_a + two_b + two_c) / 2 + 1);
    BigRational::new(num, den)
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) via the Racah summation.
///
/// Returns exact zero when a selection rule (triangle, projection sum,
/// |m| ≤ j) fails; errors only on inconsistent half-integers.
pub fn wigner3j(
    two_j1: i64,
    two_j2: i64,
    two_j3: i64,
    two_m1: i64,
    two_m2: i64,
    two_m3: i64,
) -> Result<SignedSqrt, WignerError> {
    for (tj, tm) in [(two_j1, two_m1), (two_j2, two_m2), (two_j3, two_m3)] {
        if tj < 0 || (tj + tm) % 2 != 0 {
            return Err(WignerError::HalfInteger(format!(
                "j={}/2, m={}/2: 2j must be a nonnegative integer and j−m an integer",
                tj, tm
            )));
        }
        if tm.abs() > tj {
            return Ok(SignedSqrt::zero());
        }
    }
    if two_m1 + two_m2 + two_m3 != 0 || !triangle_ok(two_j1, two_j2, two_j3) {
        return Ok(SignedSqrt::zero());
    }

    // Racah sum bounds
    let k_min = 0
        .max((two_j2 - two_j3 - two_m1) / 2)
        .max((two_j1 - two_j3 + two_m2) / 2);
    let k_max = ((two_j1 + two_j2 - two_j3) / 2)
        .min((two_j1 - two_m1) / 2)
        .min((two_j2 + two_m2) / 2);
    if k_min > k_max {
        return Ok(SignedSqrt::zero());
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial((two_j1 + two_j2 - two_j3) / 2 - k)
            * factorial((two_j1 - two_m1) / 2 - k)
            * factorial((two_j2 + two_m2) / 2 - k)
            * factorial((two_j3 - two_j2 + two_m1) / 2 + k)
            * factorial((two_j3 - two_j1 - two_m2) / 2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let radical = triangle_coefficient(two_j1, two_j2, two_j3)
        * BigRational::from(
            factorial((two_j1 + two_m1) / 2)
                * factorial((two_j1 - two_m1) / 2)
                * factorial((two_j2 + two_m2) / 2)
                * factorial((two_j2 - two_m2) / 2)
                * factorial((two_j3 + two_m3) / 2)
                * factorial((two_j3 - two_m3) / 2),
        );

    // phase (−1)^{j1 − j2 − m3}
    let phase_exp = (two_j1 - two_j2 - two_m3) / 2;
    let sum = if phase_exp.rem_euclid(2) == 1 { -sum } else { sum };
    Ok(SignedSqrt::new(sum, radical))
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah formula.
pub fn wigner6j(
    two_j1: i64,
    two_j2: i64,
    two_j3: i64,
    two_j4: i64,
    two_j5: i64,
    two_j6: i64,
) -> Result<SignedSqrt, WignerError> {
    for tj in [two_j1, two_j2, two_j3, two_j4, two_j5, two_j6] {
        if tj < 0 {
            return Err(WignerError::HalfInteger(format!("2j = {tj} must be nonnegative")));
        }
    }
    let triads = [
        (two_j1, two_j2, two_j3),
        (two_j1, two_j5, two_j6),
        (two_j4, two_j2, two_j6),
        (two_j4, two_j5, two_j3),
    ];
    if triads.iter().any(|&(a, b, c)| !triangle_ok(a, b, c)) {
        return Ok(SignedSqrt::zero());
    }

    let t: Vec<i64> = triads.iter().map(|&(a, b, c)| (a + b + c) / 2).collect();
    let q1 = (two_j1 + two_j2 + two_j4 + two_j5) / 2;
    let q2 = (two_j2 + two_j3 + two_j5 + two_j6) / 2;
    let q3 = (two_j3 + two_j1 + two_j6 + two_j4) / 2;

    let k_min = *t.iter().max().unwrap();
    let k_max = q1.min(q2).min(q3);
    if k_min > k_max {
        return Ok(SignedSqrt::zero());
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let num = factorial(k + 1);
        let den = factorial(k - t[0])
            * factorial(k - t[1])
            * factorial(k - t[2])
            * factorial(k - t[3])
            * factorial(q1 - k)
            * factorial(q2 - k)
            * factorial(q3 - k);
        let term = BigRational::new(num, den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let radical = triads
        .iter()
        .map(|&(a, b, c)| triangle_coefficient(a, b, c))
        .product::<BigRational>();
    Ok(SignedSqrt::new(sum, radical))
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ with the Condon–Shortley
/// phase, from the 3j symbol.
pub fn clebsch_gordan(
    two_j1: i64,
    two_m1: i64,
    two_j2: i64,
    two_m2: i64,
    two_j: i64,
    two_m: i64,
) -> Result<SignedSqrt, WignerError> {
    if two_m1 + two_m2 != two_m {
        // still validate consistency before returning the selection-rule zero
        for (tj, tm) in [(two_j1, two_m1), (two_j2, two_m2), (two_j, two_m)] {
            if tj < 0 || (tj + tm) % 2 != 0 {
                return Err(WignerError::HalfInteger(format!("j={}/2, m={}/2", tj, tm)));
            }
        }
        return Ok(SignedSqrt::zero());
    }
    let tj = wigner3j(two_j1, two_j2, two_j, two_m1, two_m2, -two_m)?;
    // (−1)^{j1 − j2 + M}·√(2J+1)·(3j)
    let phase_exp = (two_j1 - two_j2 + two_m) / 2;
    let sign = if phase_exp.rem_euclid(2) == 1 {
        -BigRational::one()
    } else {
        BigRational::one()
    };
    let scaled = SignedSqrt::new(sign, BigRational::from(BigInt::from(two_j + 1)));
    Ok(SignedSqrt(scaled.0 * tj.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_violation_is_zero() {
        assert!(wigner3j(0, 0, 2, 0, 0, 0).unwrap().is_zero());
        assert!(wigner6j(0, 0, 2, 1, 1, 1).unwrap().is_zero());
    }

    #[test]
    fn inconsistent_half_integers_rejected() {
        // j = 1, m = 1/2 is not a valid pair
        assert!(wigner3j(2, 2, 2, 1, 0, 0).is_err());
        assert!(clebsch_gordan(2, 1, 0, 0, 2, 1).is_err());
    }

    #[test]
    fn known_3j_value() {
        // (1 1 0; 0 0 0) = −1/√3
        let v = wigner3j(2, 2, 0, 0, 0, 0).unwrap();
        assert_relative_eq!(v.to_f64(), -1.0 / 3.0f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn known_cg_value() {
        // ⟨1/2,1/2; 1/2,−1/2 | 0,0⟩ = 1/√2
        let v = clebsch_gordan(1, 1, 1, -1, 0, 0).unwrap();
        assert_relative_eq!(v.to_f64(), 1.0 / 2.0f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn cg_projection_rule() {
        assert!(clebsch_gordan(1, 1, 1, 1, 0, 0).unwrap().is_zero());
    }

    #[test]
    fn known_6j_value() {
        // {a a 0; c c e} = (−1)^{a+c+e}/√((2a+1)(2c+1)):
        // {1 1 0; 1/2 1/2 1/2} = (−1)²/√6 = 1/√6
        let v = wigner6j(2, 2, 0, 1, 1, 1).unwrap();
        let expect = 1.0 / 6.0f64.sqrt();
        assert_relative_eq!(v.to_f64(), expect, max_relative = 1e-15);
    }

    #[test]
    fn three_j_orthogonality_exhaustive() {
        // Σ_{m1,m2} 3j(...)² = 1 for all valid (j1,j2,j3), j ≤ 4: each of
        // the 2j3+1 fixed-m3 sub-sums contributes exactly 1/(2j3+1)
        for two_j1 in 0..=8 {
            for two_j2 in 0..=8 {
                for two_j3 in ((two_j1 - two_j2).abs()..=(two_j1 + two_j2).min(8)).step_by(2) {
                    let mut acc = BigRational::zero();
                    for two_m1 in (-two_j1..=two_j1).step_by(2) {
                        for two_m2 in (-two_j2..=two_j2).step_by(2) {
                            let two_m3 = -(two_m1 + two_m2);
                            if two_m3.abs() > two_j3 {
                                continue;
                            }
                            let v =
                                wigner3j(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3).unwrap();
                            acc += v.0.abs();
                        }
                    }
                    assert_eq!(
                        acc,
                        BigRational::one(),
                        "j = {two_j1}/2 {two_j2}/2 {two_j3}/2"
                    );
                }
            }
        }
    }

    #[test]
    fn cg_block_unitarity() {
        // Unitarity of the (j1, j2, M) block: Σ_J |⟨j1 m1 j2 m2|J M⟩|² = 1
        let two_j1 = 3;
        let two_j2 = 2;
        for two_m1 in (-two_j1..=two_j1).step_by(2) {
            for two_m2 in (-two_j2..=two_j2).step_by(2) {
                let two_m = two_m1 + two_m2;
                let mut acc = BigRational::zero();
                for two_j in ((two_j1 - two_j2).abs()..=(two_j1 + two_j2)).step_by(2) {
                    let v = clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m).unwrap();
                    acc += v.0.abs();
                }
                assert_eq!(acc, BigRational::one());
            }
        }
    }

    #[test]
    fn biedenharn_elliott_sum_rule() {
        // Σ_x (−1)^{...}(2x+1){a b x; c d p}{c d x; e f q}{e f x; b a r}
        //   = {p q r; e a d}{p q r; f b c}
        // Checked on a fixed valid input set with half-integers.
        // Each symbol is exact to 1e-15 in f64, and the sum has few terms,
        // so a floating comparison at 1e-12 is a sound identity check.
        let cases = [
            ((2i64, 2i64, 1i64, 1i64, 2i64, 1i64), (2i64, 1i64, 1i64)),
            ((2, 4, 2, 2, 2, 2), (2, 2, 2)),
            ((1, 1, 2, 2, 3, 3), (2, 2, 2)),
        ];
        for &((ta, tb, tc, td, te, tf), (tp, tq, tr)) in &cases {
            let phase_sum = ta + tb + tc + td + te + tf + tp + tq + tr;
            let mut lhs = 0.0f64;
            for tx in 0..=12 {
                let s1 = wigner6j(ta, tb, tx, tc, td, tp).unwrap();
                let s2 = wigner6j(tc, td, tx, te, tf, tq).unwrap();
                let s3 = wigner6j(te, tf, tx, tb, ta, tr).unwrap();
                if s1.is_zero() || s2.is_zero() || s3.is_zero() {
                    continue;
                }
                let texp = phase_sum + tx;
                assert_eq!(texp % 2, 0, "nonzero term with half-integer phase");
                let sign = if (texp / 2).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                lhs += sign * (tx as f64 + 1.0) * s1.to_f64() * s2.to_f64() * s3.to_f64();
            }
            let r1 = wigner6j(tp, tq, tr, te, ta, td).unwrap().to_f64();
            let r2 = wigner6j(tp, tq, tr, tf, tb, tc).unwrap().to_f64();
            assert_relative_eq!(lhs, r1 * r2, max_relative = 1e-12, epsilon = 1e-14);
        }
    }
}
