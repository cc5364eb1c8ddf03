//! Entropic and distance measures, all in bits.
//!
//! Covers von Neumann entropy, coherent information and loss, quantum and
//! classical relative entropy, trace distance, Uhlmann fidelity, the
//! support-projector measurement split used in the Pinsker argument, and
//! monotonicity checks under CPTP maps.
//!
//! Relative entropy is `+∞` whenever the first argument has support outside
//! the second's; that is an explicit, typed outcome ([`RelativeEntropy`]),
//! not an error.

use std::f64::consts::LN_2;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::channels::{ChannelError, QuantumChannel};
use crate::matkernel::{self, ComplexMatrix, MatError};
use crate::states::{LabeledState, StateError};
use crate::tol;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("operation requires a pure state")]
    NotPure,
    #[error("expected a tripartite (R, Q, E) state, got {0} subsystems")]
    NotTripartite(usize),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Quantum or classical relative entropy in bits, or `+∞` on support
/// violation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn is_finite(&self) -> bool {
        matches!(self, RelativeEntropy::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            RelativeEntropy::Finite(v) => Some(*v),
            RelativeEntropy::Infinite => None,
        }
    }

    /// Value as a float, mapping `Infinite` to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        match self {
            RelativeEntropy::Finite(v) => *v,
            RelativeEntropy::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for RelativeEntropy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RelativeEntropy::Finite(v) => write!(f, "{v}"),
            RelativeEntropy::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for RelativeEntropy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            RelativeEntropy::Finite(v) => serializer.serialize_f64(*v),
            // JSON has no infinity literal; use a string marker.
            RelativeEntropy::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Entropy bookkeeping for one channel use on an entangled input.
///
/// `loss` is the drop in coherent information `S^Q − I`; it equals both the
/// subadditivity combination `S^{R'} + S^{E'} − S^{RE'}` and the relative
/// entropy of the final `RE` state to the product of its marginals.
#[derive(Clone, Debug, Serialize)]
pub struct LossReport {
    pub s_q: f64,
    pub s_q_out: f64,
    pub s_rq_out: f64,
    pub s_r_out: f64,
    pub s_e_out: f64,
    pub s_re_out: f64,
    pub coherent_info: f64,
    pub loss: f64,
    pub loss_via_relent: f64,
}

/// The three closeness measures for one pair of density operators.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub relent: RelativeEntropy,
    pub trace_dist: f64,
    pub fidelity: f64,
}

impl DistanceReport {
    /// Internal-consistency violations beyond the given slack
    /// (empty when every inequality holds).
    pub fn violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.fidelity < 1.0 - self.trace_dist - slack {
            out.push(format!(
                "fidelity {} below 1 - trace_dist {}",
                self.fidelity, self.trace_dist
            ));
        }
        if let Some(re) = self.relent.finite() {
            if re < (2.0 / LN_2) * self.trace_dist * self.trace_dist - slack {
                out.push(format!(
                    "relent {re} below (2/ln2) trace_dist^2 {}",
                    (2.0 / LN_2) * self.trace_dist * self.trace_dist
                ));
            }
            if self.fidelity < 1.0 - re.max(0.0).sqrt() - slack {
                out.push(format!(
                    "fidelity {} below 1 - sqrt(relent) {}",
                    self.fidelity,
                    1.0 - re.max(0.0).sqrt()
                ));
            }
        }
        out
    }
}

/// Two-outcome projective measurement split of `ρ − σ = A − B`: `pi`
/// projects onto the support of the positive part `A`.
#[derive(Clone, Debug)]
pub struct HelstromSplit {
    pub pi: ComplexMatrix,
    pub a_trace: f64,
    pub p: [f64; 2],
    pub q: [f64; 2],
}

impl HelstromSplit {
    /// `Σ_k |P_k − Q_k|`, which equals `2 · Tr A`.
    pub fn l1_difference(&self) -> f64 {
        (self.p[0] - self.q[0]).abs() + (self.p[1] - self.q[1]).abs()
    }
}

/// Before/after values of all three measures under one channel application.
#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub relent_before: RelativeEntropy,
    pub relent_after: RelativeEntropy,
    pub trace_dist_before: f64,
    pub trace_dist_after: f64,
    pub fidelity_before: f64,
    pub fidelity_after: f64,
}

impl MonotonicityReport {
    /// Violations beyond `slack`, with magnitudes.
    pub fn violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        match (self.relent_before, self.relent_after) {
            (RelativeEntropy::Finite(b), RelativeEntropy::Finite(a)) if a > b + slack => {
                out.push(format!("relative entropy increased by {}", a - b));
            }
            (RelativeEntropy::Finite(b), RelativeEntropy::Infinite) => {
                out.push(format!("relative entropy became infinite (was {b})"));
            }
            _ => {}
        }
        if self.trace_dist_after > self.trace_dist_before + slack {
            out.push(format!(
                "trace distance increased by {}",
                self.trace_dist_after - self.trace_dist_before
            ));
        }
        if self.fidelity_after < self.fidelity_before - slack {
            out.push(format!(
                "fidelity decreased by {}",
                self.fidelity_before - self.fidelity_after
            ));
        }
        out
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.violations(slack).is_empty()
    }
}

fn check_density(m: &ComplexMatrix) -> Result<(), MeasureError> {
    if !m.is_square() {
        return Err(MeasureError::NotDensity(format!(
            "{}x{} is not square",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_hermitian(tol::HERMITIAN) {
        return Err(MeasureError::NotDensity(format!(
            "Hermitian deviation {:.3e}",
            m.hermitian_deviation()
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(MeasureError::NotDensity(format!("trace {tr}")));
    }
    Ok(())
}

fn check_pair(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<(), MeasureError> {
    check_density(rho)?;
    check_density(sigma)?;
    if rho.rows() != sigma.rows() {
        return Err(MeasureError::DimMismatch {
            left: rho.rows(),
            right: sigma.rows(),
        });
    }
    Ok(())
}

/// Shannon entropy of an eigenvalue list in bits, with `0·log 0 = 0`.
fn entropy_of_eigenvalues(eigenvalues: &[f64]) -> f64 {
    let mut s = 0.0;
    for &w in eigenvalues {
        if w > tol::EIGEN_CUTOFF {
            s -= w * w.log2();
        }
    }
    s.max(0.0)
}

/// Von Neumann entropy `S(ρ) = −Tr ρ log2 ρ` in bits.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64, MeasureError> {
    check_density(rho)?;
    let eig = matkernel::herm_eig(rho)?;
    if let Some(&min) = eig
        .eigenvalues
        .first()
        .filter(|&&w| w < -tol::PSD_CLAMP)
    {
        return Err(MeasureError::NotDensity(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(entropy_of_eigenvalues(&eig.eigenvalues))
}

/// Quantum relative entropy `D(ρ‖σ) = Tr ρ log2 ρ − Tr ρ log2 σ` in bits.
///
/// Evaluated on σ's support (eigenvalues above [`tol::EIGEN_CUTOFF`]);
/// returns `+∞` when projecting ρ onto that support loses more than
/// [`tol::SUPPORT_DEFICIT`] of its trace.
pub fn relative_entropy(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
) -> Result<RelativeEntropy, MeasureError> {
    check_pair(rho, sigma)?;
    let sig = matkernel::herm_eig(sigma)?;
    let rho_eig = matkernel::herm_eig(rho)?;

    // Weight of rho on sigma's support; the complement is the deficit.
    let mut on_support = 0.0;
    let mut cross = 0.0;
    for (j, &w) in sig.eigenvalues.iter().enumerate() {
        if w <= tol::EIGEN_CUTOFF {
            continue;
        }
        let weight = quadratic_form(rho, &sig.eigenvectors.column(j));
        on_support += weight;
        cross += weight * w.log2();
    }
    if (1.0 - on_support) > tol::SUPPORT_DEFICIT {
        return Ok(RelativeEntropy::Infinite);
    }

    let tr_rho_log_rho = -entropy_of_eigenvalues(&rho_eig.eigenvalues);
    Ok(RelativeEntropy::Finite((tr_rho_log_rho - cross).max(0.0)))
}

/// `⟨v|M|v⟩` for Hermitian `M` (real part; the imaginary part is rounding).
fn quadratic_form(m: &ComplexMatrix, v: &[num_complex::Complex64]) -> f64 {
    let mv = m.matvec(v);
    matkernel::vec_dot(v, &mv).re
}

/// Classical relative entropy `Σ_k P_k log2(P_k/Q_k)` in bits, `+∞` when
/// some `Q_k = 0 < P_k`.
pub fn classical_relative_entropy(
    p: &[f64],
    q: &[f64],
) -> Result<RelativeEntropy, MeasureError> {
    if p.len() != q.len() {
        return Err(MeasureError::DimMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    for (name, dist) in [("P", p), ("Q", q)] {
        if dist.iter().any(|&x| x < -1e-12) {
            return Err(MeasureError::InvalidDistribution(format!(
                "{name} has a negative entry"
            )));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MeasureError::InvalidDistribution(format!(
                "{name} sums to {sum}"
            )));
        }
    }
    let mut total = 0.0;
    for (&pk, &qk) in p.iter().zip(q) {
        if pk <= tol::EIGEN_CUTOFF {
            continue;
        }
        if qk <= 1e-15 {
            return Ok(RelativeEntropy::Infinite);
        }
        total += pk * (pk / qk).log2();
    }
    Ok(RelativeEntropy::Finite(total.max(0.0)))
}

/// Trace distance `D(ρ,σ) = ½ Tr|ρ − σ|` (half the sum of absolute
/// eigenvalues of the difference), clamped into `[0, 1]`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64, MeasureError> {
    check_pair(rho, sigma)?;
    let diff = (rho - sigma).hermitize();
    let eig = matkernel::herm_eig(&diff)?;
    let half_sum: f64 = 0.5 * eig.eigenvalues.iter().map(|w| w.abs()).sum::<f64>();
    Ok(half_sum.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `F(ρ,σ) = Tr √(√ρ σ √ρ)`, clamped into `[0, 1]`.
///
/// The closed form equals the maximal purification overlap; the recovery
/// module cross-checks that agreement rather than assuming it.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64, MeasureError> {
    check_pair(rho, sigma)?;
    let root = matkernel::matrix_sqrt(&rho.hermitize())?;
    let inner = (&(&root * sigma) * &root).hermitize();
    let eig = matkernel::herm_eig(&inner)?;
    // Eigenvalues at rounding level must contribute exactly zero: sqrt of
    // 1e-16 noise would otherwise pollute the sum at the 1e-8 scale.
    let f: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&w| w > tol::EIGEN_CUTOFF)
        .map(|&w| w.sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Projective split of `ρ − σ` into positive/negative parts: `Π` projects
/// onto the support of the positive part `A`, and `(P, Q)` are the
/// two-outcome statistics of the `{Π, 1−Π}` measurement on ρ and σ.
pub fn helstrom_split(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
) -> Result<HelstromSplit, MeasureError> {
    check_pair(rho, sigma)?;
    let diff = (rho - sigma).hermitize();
    let eig = matkernel::herm_eig(&diff)?;
    let n = diff.rows();
    let mut pi = ComplexMatrix::zeros(n, n);
    let mut a_trace = 0.0;
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        if w > tol::EIGEN_CUTOFF {
            a_trace += w;
            let col = eig.eigenvectors.column(j);
            for r in 0..n {
                for c in 0..n {
                    pi[(r, c)] += col[r] * col[c].conj();
                }
            }
        }
    }
    let p1 = trace_product(&pi, rho).clamp(0.0, 1.0);
    let q1 = trace_product(&pi, sigma).clamp(0.0, 1.0);
    Ok(HelstromSplit {
        pi,
        a_trace,
        p: [p1, 1.0 - p1],
        q: [q1, 1.0 - q1],
    })
}

/// `Tr(A B)` for Hermitian `A`, `B` (real part).
fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.rows(), b.rows());
    let mut acc = 0.0;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            acc += (a[(r, c)] * b[(c, r)]).re;
        }
    }
    acc
}

/// All three closeness measures for a pair of density operators.
pub fn distance_report(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
) -> Result<DistanceReport, MeasureError> {
    Ok(DistanceReport {
        relent: relative_entropy(rho, sigma)?,
        trace_dist: trace_distance(rho, sigma)?,
        fidelity: fidelity(rho, sigma)?,
    })
}

/// Before/after values of the three measures under one application of `ch`
/// to both states.
pub fn monotonicity_check(
    ch: &QuantumChannel,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
) -> Result<MonotonicityReport, MeasureError> {
    check_pair(rho, sigma)?;
    let rho_out = ch.apply(rho)?;
    let sigma_out = ch.apply(sigma)?;
    Ok(MonotonicityReport {
        relent_before: relative_entropy(rho, sigma)?,
        relent_after: relative_entropy(&rho_out, &sigma_out)?,
        trace_dist_before: trace_distance(rho, sigma)?,
        trace_dist_after: trace_distance(&rho_out, &sigma_out)?,
        fidelity_before: fidelity(rho, sigma)?,
        fidelity_after: fidelity(&rho_out, &sigma_out)?,
    })
}

/// Full entropy bookkeeping for a pure tripartite `(R, Q, E)` state after
/// one channel use.
///
/// The reference system never interacts, so the input entanglement entropy
/// `S^Q` equals `S(ρ^{R'})` and is recomputed from the final state.
pub fn coherent_information(final_state: &LabeledState) -> Result<LossReport, MeasureError> {
    if !final_state.is_pure() {
        return Err(MeasureError::NotPure);
    }
    if final_state.layout().len() != 3 {
        return Err(MeasureError::NotTripartite(final_state.layout().len()));
    }
    let labels: Vec<&str> = final_state.layout().labels().collect();
    let (r, q, e) = (labels[0], labels[1], labels[2]);

    let rho_q = final_state.partial_trace(&[q])?.density_matrix();
    let rho_rq = final_state.partial_trace(&[r, q])?.density_matrix();
    let rho_r = final_state.partial_trace(&[r])?.density_matrix();
    let rho_e = final_state.partial_trace(&[e])?.density_matrix();
    let rho_re = final_state.partial_trace(&[r, e])?.density_matrix();

    let s_q_out = von_neumann_entropy(&rho_q)?;
    let s_rq_out = von_neumann_entropy(&rho_rq)?;
    let s_r_out = von_neumann_entropy(&rho_r)?;
    let s_e_out = von_neumann_entropy(&rho_e)?;
    let s_re_out = von_neumann_entropy(&rho_re)?;

    let s_q = s_r_out;
    let coherent_info = s_q_out - s_rq_out;
    let loss = s_q - coherent_info;
    let product = rho_r.kron(&rho_e);
    let loss_via_relent = relative_entropy(&rho_re, &product)?.as_f64();

    Ok(LossReport {
        s_q,
        s_q_out,
        s_rq_out,
        s_r_out,
        s_e_out,
        s_re_out,
        coherent_info,
        loss,
        loss_via_relent,
    })
}
