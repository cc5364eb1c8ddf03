//! Numerics toolkit for simulating noisy quantum channels on small entangled
//! systems and constructing (approximate) error-correction recovery maps.
//!
//! The crate is organized bottom-up:
//!
//! - [`matkernel`]: a self-contained dense complex-matrix kernel (Hermitian
//!   eigendecomposition via cyclic Jacobi, SVD, polar decomposition, spectral
//!   matrix functions) sized for dimensions up to a few hundred.
//! - [`states`]: multipartite pure/mixed states over labeled subsystems with
//!   tensor products, partial traces, Schmidt decompositions and purifications.
//! - [`channels`]: CPTP maps as Kraus families with explicit Stinespring
//!   dilations, standard noise families, and tripartite reference/system/
//!   environment evolution.
//! - [`measures`]: von Neumann entropy, coherent information and loss,
//!   relative entropy (quantum and classical), trace distance, fidelity, and
//!   the support-projector measurement split, together with monotonicity
//!   checks.
//! - [`recovery`]: construction of the projective-measurement-plus-conditional-
//!   unitary recovery operation from the product structure of the final state,
//!   and the end-to-end `correct` pipeline that evaluates achieved fidelity
//!   against the `1 - sqrt(eps)` / `1 - 2 sqrt(eps)` bounds.
//! - [`random`]: seeded sampling of unitaries, density operators, pure states
//!   and CPTP channels for property testing and sweeps.
//!
//! All entropic quantities are in bits (base-2 logarithms). Values are
//! immutable after construction and every operation is a pure function of its
//! inputs, so everything here is safe to share across threads.

// Dense index arithmetic is the house style in the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod matkernel;
pub mod measures;
pub mod random;
pub mod recovery;
pub mod states;

/// Numerical tolerances used across the crate.
///
/// Centralized so that support decisions, clamping and validation thresholds
/// stay consistent between modules.
pub mod tol {
    /// Absolute cutoff below which an eigenvalue is treated as zero for
    /// support and rank decisions. Well above accumulated rounding at the
    /// dimensions handled here (<= 256), far below physically meaningful
    /// eigenvalues in practice.
    pub const EIGEN_CUTOFF: f64 = 1e-12;

    /// Maximum entrywise deviation from `H = H†` accepted by the Hermitian
    /// eigensolver (inputs are symmetrized before iteration).
    pub const HERMITIAN: f64 = 1e-10;

    /// Eigenvalues in `[-PSD_CLAMP, 0)` are clamped to zero before `sqrt` or
    /// `log`; anything below `-PSD_CLAMP` is rejected. Positive-semidefinite
    /// inputs arrive through partial traces and accumulate rounding.
    pub const PSD_CLAMP: f64 = 1e-10;

    /// Norm / trace tolerance for state validation.
    pub const STATE_NORM: f64 = 1e-10;

    /// Kraus completeness tolerance for directly constructed channels.
    pub const KRAUS_COMPLETENESS: f64 = 1e-9;

    /// Relaxed completeness tolerance for composed channels.
    pub const COMPOSE_COMPLETENESS: f64 = 1e-8;

    /// If projecting rho onto sigma's support loses more than this much
    /// trace, the relative entropy D(rho || sigma) is +infinity.
    pub const SUPPORT_DEFICIT: f64 = 1e-10;
}
