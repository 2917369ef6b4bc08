//! Angular-momentum machinery for the 2³S₁ → 2³P₀ light shift: hyperfine
//! bases, dipole coupling matrices by Wigner–Eckart, the brute-force
//! second-order effective Hamiltonian, and its decomposition into
//! scalar/vector/tensor closed forms.
//!
//! The brute-force operator and the closed forms are two independent routes
//! to the same 6×6 matrix; their agreement is the central identity check of
//! this module.

pub mod wigner;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::lineshape::{plasma_dispersion, LineshapeError};
use crate::quantities::{AtomicConfig, LaserConfig, PhysicalConstants};
use wigner::{clebsch_gordan, wigner6j};

type CMat = DMatrix<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum AngularError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Lineshape(#[from] LineshapeError),
    #[error("irreducible decomposition failed: residual {residual:.3e} of ‖H‖ = {norm:.3e}")]
    Decomposition { residual: f64, norm: f64 },
}

/// One |F, m_F⟩ level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// 2F
    pub two_f: i64,
    /// 2m_F
    pub two_m: i64,
}

/// Ordered basis of hyperfine levels for one electronic state.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineBasis {
    /// 2J of the electronic state
    pub two_j: i64,
    /// 2I of the nucleus
    pub two_i: i64,
    /// Levels ordered by (F ascending, m_F ascending)
    pub levels: Vec<Level>,
}

impl HyperfineBasis {
    fn build(two_j: i64, two_i: i64) -> Self {
        let mut levels = Vec::new();
        let mut two_f = (two_j - two_i).abs();
        while two_f <= two_j + two_i {
            let mut two_m = -two_f;
            while two_m <= two_f {
                levels.push(Level { two_f, two_m });
                two_m += 2;
            }
            two_f += 2;
        }
        HyperfineBasis { two_j, two_i, levels }
    }

    /// Metastable 2³S₁ of ³He: J = 1, I = 1/2 → F = 1/2 (2 levels) then
    /// F = 3/2 (4 levels); dimension 6.
    pub fn metastable() -> Self {
        Self::build(2, 1)
    }

    /// Excited 2³P₀: J = 0, F = 1/2; dimension 2.
    pub fn excited() -> Self {
        Self::build(0, 1)
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }
}

/// Mean photon spin s = (ε* × ε)/i for a unit polarization vector.
pub fn photon_spin(epsilon: &[Complex64; 3]) -> Result<[f64; 3], AngularError> {
    let norm2: f64 = epsilon.iter().map(|c| c.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return Err(AngularError::Domain(format!(
            "photon_spin requires a unit polarization, ‖ε‖ = {}",
            norm2.sqrt()
        )));
    }
    let e = epsilon;
    let c = [
        e[1].conj() * e[2] - e[2].conj() * e[1],
        e[2].conj() * e[0] - e[0].conj() * e[2],
        e[0].conj() * e[1] - e[1].conj() * e[0],
    ];
    let mut s = [0.0; 3];
    for (si, ci) in s.iter_mut().zip(&c) {
        let v = ci / Complex64::new(0.0, 1.0);
        if v.im.abs() > 1e-12 {
            return Err(AngularError::Domain(format!(
                "photon spin has imaginary residue {:.3e}",
                v.im
            )));
        }
        *si = v.re;
    }
    Ok(s)
}

/// Spin matrices (F_x, F_y, F_z) for spin F in the m = −F..F ascending basis.
pub fn spin_matrices(two_f: i64) -> [CMat; 3] {
    let d = (two_f + 1) as usize;
    let f = two_f as f64 / 2.0;
    let mut fz = CMat::zeros(d, d);
    let mut fp = CMat::zeros(d, d);
    for k in 0..d {
        let m = -f + k as f64;
        fz[(k, k)] = Complex64::new(m, 0.0);
        if k + 1 < d {
            fp[(k + 1, k)] = Complex64::new((f * (f + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let fm = fp.adjoint();
    let fx = (&fp + &fm) * Complex64::new(0.5, 0.0);
    let fy = (&fp - &fm) * Complex64::new(0.0, -0.5);
    [fx, fy, fz]
}

/// Second-order effective Hamiltonian over the metastable basis [J], with
/// its irreducible parts.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    /// 6×6 complex matrix, basis ordering F=1/2 (m=−1/2,+1/2) then
    /// F=3/2 (m=−3/2..+3/2)
    pub matrix: CMat,
    pub scalar: CMat,
    pub vector: CMat,
    pub tensor: CMat,
}

impl EffectiveHamiltonian {
    /// Light-shift operator δÊ = (δH + δH†)/2.
    pub fn light_shift_operator(&self) -> CMat {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Light-absorption operator δΓ̂ = i(δH − δH†).
    pub fn absorption_operator(&self) -> CMat {
        (&self.matrix - self.matrix.adjoint()) * Complex64::new(0.0, 1.0)
    }
}

/// ⟨F_e m_e|r_q|F_g m_g⟩ over the two bases, in units of the J-reduced
/// matrix element ⟨J_e||r||J_g⟩ (Wigner–Eckart twice: F-level CG and the
/// J→F reduction with a 6j symbol).
fn dipole_component(
    excited: &HyperfineBasis,
    ground: &HyperfineBasis,
    q: i64,
    e_idx: usize,
    g_idx: usize,
) -> f64 {
    let le = excited.levels[e_idx];
    let lg = ground.levels[g_idx];
    let cg = clebsch_gordan(lg.two_f, lg.two_m, 2, 2 * q, le.two_f, le.two_m)
        .expect("basis quantum numbers are consistent")
        .to_f64();
    if cg == 0.0 {
        return 0.0;
    }
    // ⟨F_e||r||F_g⟩/⟨J_e||r||J_g⟩ =
    //   (−1)^{F_g + J_e + 1 + I}·√((2F_g+1)(2J_e+1))·{J_e J_g 1; F_g F_e I}
    let six = wigner6j(
        excited.two_j,
        ground.two_j,
        2,
        lg.two_f,
        le.two_f,
        excited.two_i,
    )
    .expect("valid triads")
    .to_f64();
    let phase_exp = (lg.two_f + excited.two_j) / 2 + 1 + excited.two_i / 2;
    let phase = if (lg.two_f + excited.two_j) % 2 != 0 || excited.two_i % 2 != 0 {
        // half-integer exponent cannot occur for F_g ± J_e + I integer sums
        // in this level scheme; guard anyway
        ((phase_exp as f64) * std::f64::consts::PI).cos()
    } else if phase_exp.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    };
    let scale = (((lg.two_f + 1) * (excited.two_j + 1)) as f64).sqrt();
    phase * scale * six * cg
}

/// Matrix of ⟨F_e m_e|ε·r|F_g m_g⟩ restricted to one ground F manifold,
/// in units of ⟨J_e||r||J_g⟩. Rows: excited levels; columns: the (2F_g+1)
/// levels of the manifold starting at `g_offset`.
fn polarization_coupling(
    excited: &HyperfineBasis,
    ground: &HyperfineBasis,
    epsilon: &[Complex64; 3],
    g_offset: usize,
    g_dim: usize,
) -> CMat {
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let mut m = CMat::zeros(excited.dim(), g_dim);
    for e_idx in 0..excited.dim() {
        for gc in 0..g_dim {
            let g_idx = g_offset + gc;
            let dm1 = dipole_component(excited, ground, -1, e_idx, g_idx);
            let d0 = dipole_component(excited, ground, 0, e_idx, g_idx);
            let dp1 = dipole_component(excited, ground, 1, e_idx, g_idx);
            // Cartesian components from the spherical ones:
            // r_x = (r_{−1} − r_{+1})/√2, r_y = i(r_{−1} + r_{+1})/√2, r_z = r_0
            let rx = Complex64::new((dm1 - dp1) * inv_sqrt2, 0.0);
            let ry = Complex64::new(0.0, (dm1 + dp1) * inv_sqrt2);
            let rz = Complex64::new(d0, 0.0);
            m[(e_idx, gc)] = epsilon[0] * rx + epsilon[1] * ry + epsilon[2] * rz;
        }
    }
    m
}

/// Brute-force effective Hamiltonian δH [J]: dipole matrices by
/// Wigner–Eckart, reduced element fixed from the oscillator strength,
/// second-order assembly with the lineshape factor Z(ω;ω_{F_g}) per
/// manifold. Coherence between the two ground hyperfine manifolds is zeroed
/// (washed out by the fast MEC process).
pub fn effective_hamiltonian_brute(
    constants: &PhysicalConstants,
    atomic: &AtomicConfig,
    laser: &LaserConfig,
) -> Result<CMat, AngularError> {
    let meta = HyperfineBasis::metastable();
    let exc = HyperfineBasis::excited();
    let mut h = CMat::zeros(meta.dim(), meta.dim());

    // manifold table: (offset, dim, transition frequency)
    let manifolds = [(0usize, 2usize, atomic.omega8), (2usize, 4usize, atomic.omega9)];
    for &(off, dim, omega_fg) in &manifolds {
        let z = plasma_dispersion(
            laser.angular_frequency,
            omega_fg,
            atomic.doppler_width,
            atomic.gamma_e,
        )?
        .value;
        // |⟨J_e||r||J_g⟩|² = (2J_g+1)/(2J_e+1)·|⟨J_g||r||J_e⟩|², and
        // f_ge = 2 m_e ω/(ħ (2J_e+1)(2J_g+1))·|⟨J_g||r||J_e⟩|²
        let two_jg1 = (meta.two_j + 1) as f64;
        let two_je1 = (exc.two_j + 1) as f64;
        let r2_ge =
            atomic.f_ge * constants.hbar * two_je1 * two_jg1 / (2.0 * constants.m_e * omega_fg);
        let r2_eg = r2_ge * two_jg1 / two_je1;

        let m = polarization_coupling(&exc, &meta, &laser.polarization, off, dim);
        let a = m.adjoint() * &m; // ⟨g|ε*·r|e⟩⟨e|ε·r|g'⟩, PSD Hermitian
        let pref = -laser.intensity * constants.e * constants.e
            / (2.0 * constants.c * constants.epsilon0 * constants.hbar)
            * r2_eg;
        let block = a * (z * pref);
        for r in 0..dim {
            for c in 0..dim {
                h[(off + r, off + c)] = block[(r, c)];
            }
        }
    }
    Ok(h)
}

/// Embed a manifold-local operator into the 6×6 metastable space.
fn embed(block: &CMat, off: usize, dim: usize) -> CMat {
    let mut m = CMat::zeros(6, 6);
    for r in 0..dim {
        for c in 0..dim {
            m[(off + r, off + c)] = block[(r, c)];
        }
    }
    m
}

/// The closed-form scalar (K=0), vector (K=1), and tensor (K=2) parts of the
/// effective Hamiltonian [J], evaluated as 6×6 matrices.
///
/// The K=2 product of polarization and spin operators is symmetrized,
/// (ε·F)(ε*·F) → ((ε·F)(ε*·F) + (ε*·F)(ε·F))/2: the unsymmetrized product
/// contains a hidden K=1 piece −s·F/2 for complex ε, and only the
/// symmetrized form reproduces the brute-force operator.
pub fn closed_form_parts(
    constants: &PhysicalConstants,
    atomic: &AtomicConfig,
    laser: &LaserConfig,
) -> Result<EffectiveHamiltonian, AngularError> {
    let s = photon_spin(&laser.polarization)?;
    let z8 = plasma_dispersion(
        laser.angular_frequency,
        atomic.omega8,
        atomic.doppler_width,
        atomic.gamma_e,
    )?
    .value;
    let z9 = plasma_dispersion(
        laser.angular_frequency,
        atomic.omega9,
        atomic.doppler_width,
        atomic.gamma_e,
    )?
    .value;
    let c0 = laser.intensity * constants.e * constants.e * atomic.f_ge
        / (4.0 * constants.m_e * constants.c * constants.epsilon0);
    let z8w = z8 / atomic.omega8;
    let z9w = z9 / atomic.omega9;

    let f12 = spin_matrices(1);
    let f32 = spin_matrices(3);
    let id = |d: usize| CMat::identity(d, d);

    // scalar: −c0·(Z₈/ω₈ P_{1/2} + Z₉/ω₉ P_{3/2})
    let scalar = embed(&(id(2) * (-c0 * z8w)), 0, 2) + embed(&(id(4) * (-c0 * z9w)), 2, 4);

    // vector: +c0·(2 Z₈/ω₈ s·F_{1/2} + Z₉/ω₉ s·F_{3/2})
    let sdotf = |f: &[CMat; 3]| -> CMat {
        &f[0] * Complex64::new(s[0], 0.0)
            + &f[1] * Complex64::new(s[1], 0.0)
            + &f[2] * Complex64::new(s[2], 0.0)
    };
    let vector =
        embed(&(sdotf(&f12) * (c0 * 2.0 * z8w)), 0, 2) + embed(&(sdotf(&f32) * (c0 * z9w)), 2, 4);

    // tensor (F=3/2 only): +(c0/3)·Z₉/ω₉·[3·sym((ε·F)(ε*·F)) − F²]
    let eps = &laser.polarization;
    let edotf = |conj: bool| -> CMat {
        let e = |i: usize| if conj { eps[i].conj() } else { eps[i] };
        &f32[0] * e(0) + &f32[1] * e(1) + &f32[2] * e(2)
    };
    let ef = edotf(false);
    let efc = edotf(true);
    let sym = (&ef * &efc + &efc * &ef) * Complex64::new(0.5, 0.0);
    let f2 = &f32[0] * &f32[0] + &f32[1] * &f32[1] + &f32[2] * &f32[2];
    let tensor_block = (sym * Complex64::new(3.0, 0.0) - f2) * (c0 / 3.0 * z9w);
    let tensor = embed(&tensor_block, 2, 4);

    let matrix = &scalar + &vector + &tensor;
    Ok(EffectiveHamiltonian {
        matrix,
        scalar,
        vector,
        tensor,
    })
}

/// Irreducible parts recovered from a block-diagonal metastable operator by
/// Frobenius projection onto {1, F_i, symmetric-traceless F_iF_j} per
/// F manifold.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub scalar: CMat,
    pub vector: CMat,
    pub tensor: CMat,
    /// Complex vector coefficients (coefficient of F_x, F_y, F_z) per
    /// manifold: `[0]` for F=1/2, `[1]` for F=3/2.
    pub vector_coefficients: [[Complex64; 3]; 2],
}

fn frobenius(a: &CMat, b: &CMat) -> Complex64 {
    (a.adjoint() * b).trace()
}

/// Project a 6×6 block-diagonal operator onto its K = 0, 1, 2 parts.
/// Fails if a residual beyond K = 2 remains (non-neglected coherence or an
/// assembly bug).
pub fn decompose_irreducible(h: &CMat) -> Result<Decomposition, AngularError> {
    assert_eq!(h.nrows(), 6);
    let mut scalar = CMat::zeros(6, 6);
    let mut vector = CMat::zeros(6, 6);
    let mut tensor = CMat::zeros(6, 6);
    let mut vector_coefficients = [[Complex64::new(0.0, 0.0); 3]; 2];

    for (mfold, &(off, dim, two_f)) in [(0usize, 2usize, 1i64), (2, 4, 3)].iter().enumerate() {
        let block = h.view((off, off), (dim, dim)).clone_owned();
        let id = CMat::identity(dim, dim);
        let fs = spin_matrices(two_f);

        // K = 0
        let c_scalar = block.trace() / Complex64::new(dim as f64, 0.0);
        let s_part = &id * c_scalar;

        // K = 1: the F_i are mutually Frobenius-orthogonal and traceless
        let mut v_part = CMat::zeros(dim, dim);
        for (i, fi) in fs.iter().enumerate() {
            let c = frobenius(fi, &block) / frobenius(fi, fi);
            vector_coefficients[mfold][i] = c;
            v_part += fi * c;
        }

        // K = 2: Gram–Schmidt over symmetric traceless F_iF_j products,
        // fixed ordering (xx, xy, xz, yy, yz, zz)
        let mut residual = &block - &s_part - &v_part;
        let mut t_part = CMat::zeros(dim, dim);
        let f2 = &fs[0] * &fs[0] + &fs[1] * &fs[1] + &fs[2] * &fs[2];
        let mut basis: Vec<CMat> = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                let delta = if i == j { 1.0 / 3.0 } else { 0.0 };
                let mut op = (&fs[i] * &fs[j] + &fs[j] * &fs[i]) * Complex64::new(0.5, 0.0);
                op -= &f2 * Complex64::new(delta, 0.0);
                for b in &basis {
                    let c = frobenius(b, &op);
                    op -= b * c;
                }
                let n2 = frobenius(&op, &op).re;
                if n2 > 1e-20 {
                    basis.push(op / Complex64::new(n2.sqrt(), 0.0));
                }
            }
        }
        for b in &basis {
            let c = frobenius(b, &residual);
            t_part += b * c;
        }
        residual -= &t_part;

        let res_norm = residual.norm();
        let h_norm = h.norm();
        if h_norm > 0.0 && res_norm > 1e-12 * h_norm {
            return Err(AngularError::Decomposition {
                residual: res_norm,
                norm: h_norm,
            });
        }

        scalar += embed(&s_part, off, dim);
        vector += embed(&v_part, off, dim);
        tensor += embed(&t_part, off, dim);
    }

    Ok(Decomposition {
        scalar,
        vector,
        tensor,
        vector_coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::{linear_x, load_config, sigma_minus, sigma_plus, Config};
    use approx::assert_relative_eq;

    fn defaults() -> Config {
        load_config("").expect("defaults parse")
    }

    fn elliptical() -> [Complex64; 3] {
        // unit vector with all three components complex and s not axis-aligned
        let raw = [
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.2, 0.55),
            Complex64::new(0.5, -0.1),
        ];
        let n = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        [raw[0] / n, raw[1] / n, raw[2] / n]
    }

    #[test]
    fn basis_ordering_and_dimensions() {
        let meta = HyperfineBasis::metastable();
        assert_eq!(meta.dim(), 6);
        assert_eq!(meta.levels[0], Level { two_f: 1, two_m: -1 });
        assert_eq!(meta.levels[1], Level { two_f: 1, two_m: 1 });
        assert_eq!(meta.levels[2], Level { two_f: 3, two_m: -3 });
        assert_eq!(meta.levels[5], Level { two_f: 3, two_m: 3 });
        let exc = HyperfineBasis::excited();
        assert_eq!(exc.dim(), 2);
        assert_eq!(exc.levels[0], Level { two_f: 1, two_m: -1 });
    }

    #[test]
    fn photon_spin_of_reference_polarizations() {
        let s = photon_spin(&sigma_plus()).unwrap();
        assert_relative_eq!(s[2], 1.0, epsilon = 1e-14);
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
        let s = photon_spin(&sigma_minus()).unwrap();
        assert_relative_eq!(s[2], -1.0, epsilon = 1e-14);
        let s = photon_spin(&linear_x()).unwrap();
        assert!(s.iter().all(|c| c.abs() < 1e-14));
        // elliptical spin has |s| ≤ 1
        let s = photon_spin(&elliptical()).unwrap();
        let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        assert!(n > 0.1 && n <= 1.0 + 1e-12, "|s| = {n}");
    }

    #[test]
    fn photon_spin_rejects_non_unit_polarization() {
        let eps = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(photon_spin(&eps).is_err());
    }

    #[test]
    fn spin_matrices_satisfy_su2_algebra() {
        for two_f in [1i64, 3] {
            let f = spin_matrices(two_f);
            let comm = &f[0] * &f[1] - &f[1] * &f[0];
            let ifz = &f[2] * Complex64::new(0.0, 1.0);
            assert!((comm - ifz).norm() < 1e-13);
            let casimir = &f[0] * &f[0] + &f[1] * &f[1] + &f[2] * &f[2];
            let j = two_f as f64 / 2.0;
            let expect = CMat::identity(f[2].nrows(), f[2].ncols())
                * Complex64::new(j * (j + 1.0), 0.0);
            assert!((casimir - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn brute_force_is_block_diagonal() {
        let cfg = defaults();
        let h = effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &cfg.laser).unwrap();
        for r in 0..2 {
            for c in 2..6 {
                assert_eq!(h[(r, c)], Complex64::new(0.0, 0.0));
                assert_eq!(h[(c, r)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn brute_force_matches_closed_forms_for_all_polarizations() {
        let cfg = defaults();
        for pol in [sigma_plus(), sigma_minus(), linear_x(), elliptical()] {
            for det_hz in [-40.0e9, -1.0e9, 0.3e9, 6.7397e9, 25.0e9] {
                let mut laser = cfg.laser.clone();
                laser.polarization = pol;
                laser.angular_frequency =
                    cfg.atomic.omega8 + 2.0 * std::f64::consts::PI * det_hz;
                let brute =
                    effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &laser).unwrap();
                let closed = closed_form_parts(&cfg.constants, &cfg.atomic, &laser).unwrap();
                let diff = (&brute - &closed.matrix).norm();
                assert!(
                    diff <= 1e-12 * brute.norm(),
                    "relative mismatch {:.3e} at detuning {det_hz:.3e} Hz",
                    diff / brute.norm()
                );
            }
        }
    }

    #[test]
    fn decomposition_of_brute_force_reproduces_closed_parts() {
        let cfg = defaults();
        let mut laser = cfg.laser.clone();
        laser.polarization = elliptical();
        let brute = effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &laser).unwrap();
        let closed = closed_form_parts(&cfg.constants, &cfg.atomic, &laser).unwrap();
        let dec = decompose_irreducible(&brute).unwrap();
        assert!((&dec.scalar - &closed.scalar).norm() <= 1e-12 * brute.norm());
        assert!((&dec.vector - &closed.vector).norm() <= 1e-12 * brute.norm());
        assert!((&dec.tensor - &closed.tensor).norm() <= 1e-12 * brute.norm());
        // parts must sum back to the input
        let sum = &dec.scalar + &dec.vector + &dec.tensor;
        assert!((&sum - &brute).norm() <= 1e-12 * brute.norm());
    }

    #[test]
    fn linear_polarization_has_no_vector_part() {
        let cfg = defaults();
        let mut laser = cfg.laser.clone();
        laser.polarization = linear_x();
        let closed = closed_form_parts(&cfg.constants, &cfg.atomic, &laser).unwrap();
        assert!(closed.vector.norm() <= 1e-14 * closed.matrix.norm());
    }

    #[test]
    fn absorption_operator_is_positive_semidefinite() {
        let cfg = defaults();
        for pol in [sigma_plus(), linear_x(), elliptical()] {
            for det_hz in [-15.0e9, -1.0e9, 2.0e9, 6.7397e9] {
                let mut laser = cfg.laser.clone();
                laser.polarization = pol;
                laser.angular_frequency =
                    cfg.atomic.omega8 + 2.0 * std::f64::consts::PI * det_hz;
                let closed = closed_form_parts(&cfg.constants, &cfg.atomic, &laser).unwrap();
                let gamma = closed.absorption_operator();
                // δΓ̂ is Hermitian; its spectrum must be non-negative
                let scale = gamma.norm();
                let eig = gamma.symmetric_eigen();
                for ev in eig.eigenvalues.iter() {
                    assert!(*ev >= -1e-12 * scale, "negative absorption rate {ev}");
                }
            }
        }
    }

    #[test]
    fn unsymmetrized_tensor_product_hides_a_vector_piece() {
        // (ε·F)(ε*·F) − sym = [ε·F, ε*·F]/2 = s·F/2, nonzero for
        // elliptical ε: this is why the tensor part uses the symmetrized
        // product.
        let eps = elliptical();
        let s = photon_spin(&eps).unwrap();
        let f = spin_matrices(3);
        let ef = &f[0] * eps[0] + &f[1] * eps[1] + &f[2] * eps[2];
        let efc = &f[0] * eps[0].conj() + &f[1] * eps[1].conj() + &f[2] * eps[2].conj();
        let unsym = &ef * &efc;
        let sym = (&ef * &efc + &efc * &ef) * Complex64::new(0.5, 0.0);
        let sdotf = &f[0] * Complex64::new(s[0], 0.0)
            + &f[1] * Complex64::new(s[1], 0.0)
            + &f[2] * Complex64::new(s[2], 0.0);
        let diff = unsym - sym - sdotf * Complex64::new(0.5, 0.0);
        assert!(diff.norm() < 1e-13);
    }

    #[test]
    fn vector_coefficients_scale_linearly_with_intensity() {
        let cfg = defaults();
        let mut laser = cfg.laser.clone();
        laser.polarization = sigma_plus();
        let h1 = effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &laser).unwrap();
        laser.intensity *= 3.0;
        let h3 = effective_hamiltonian_brute(&cfg.constants, &cfg.atomic, &laser).unwrap();
        let d1 = decompose_irreducible(&h1).unwrap();
        let d3 = decompose_irreducible(&h3).unwrap();
        for m in 0..2 {
            for i in 0..3 {
                let a = d1.vector_coefficients[m][i] * 3.0;
                let b = d3.vector_coefficients[m][i];
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-30));
            }
        }
    }
}
