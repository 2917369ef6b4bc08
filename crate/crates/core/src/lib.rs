//! Numerical engine for the light-induced frequency shift and relaxation of
//! ground-state ³He nuclear spin precession under metastability-exchange
//! optical pumping (MEOP).
//!
//! The pump laser shifts and broadens the Zeeman sublevels of the 2³S₁
//! metastable state (an AC-Stark effect). Metastability-exchange collisions
//! (MECs) couple the metastable manifolds to the ground-state nuclear spin,
//! so the light shift appears in the nuclear precession as an extra frequency
//! shift and relaxation. The crate models this chain end to end:
//!
//! - [`quantities`]: unit-carrying configuration, constants, validation.
//! - [`lineshape`]: Faddeeva function and the Doppler-broadened plasma
//!   dispersion function `Z(ω;ω₀)`.
//! - [`angular`]: Wigner symbols in exact arithmetic, dipole coupling
//!   matrices, and the second-order effective Hamiltonian with its
//!   scalar/vector/tensor decomposition.
//! - [`lightshift`]: complex effective fields δB₁/₂, δB₃/₂ acting on the two
//!   metastable hyperfine manifolds.
//! - [`dynamics`]: the coupled three-mode transverse-spin system, its exact
//!   eigendecomposition-based propagation, and the adiabatic-elimination
//!   coefficient β with the derived observables Δf and Γ₂.
//! - [`fid`]: free-induction-decay synthesis and nonlinear least-squares
//!   parameter extraction.
//! - [`sweep`]: parameter-sweep scenarios and discharge-line analysis.
//! - [`verify`]: cross-module identity checks as a machine-readable report.

pub mod angular;
pub mod dynamics;
pub mod fid;
pub mod lightshift;
pub mod lineshape;
pub mod quantities;
pub mod sweep;
pub mod verify;

pub use num_complex::Complex64;
