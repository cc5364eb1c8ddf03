//! Construction and evaluation of (approximate) error-correction recovery
//! operations.
//!
//! The recovery exploits the product structure of the final pure state: when
//! the reference/environment marginal factorizes, the final state can be
//! written `Σ_{kl} √(λ_k μ_l) |k^R⟩ ⊗ |φ_{kl}^Q⟩ ⊗ |l^E⟩` with orthonormal
//! `|φ_{kl}⟩`, and an incomplete projective measurement `Π_l = Σ_k
//! |φ_{kl}⟩⟨φ_{kl}|` followed by conditional unitaries `U_l |φ_{kl}⟩ =
//! |k^Q⟩` restores the input exactly. When it does not factorize, the same
//! construction is run on the product purification nearest to the true final
//! state (found by a polar alignment over the receiver's space), and the
//! restored fidelity is bounded below by `1 − √ε` where `ε` is the loss of
//! coherent information.
//!
//! The orthonormal family needs `rank(ρ^{R'}) · rank(ρ^{E'})` dimensions on
//! the receiver's side. [`correct`] enlarges the working space with an
//! ancilla (in the `|0⟩` state) whenever the channel system alone is too
//! small; appending an ancilla is itself a valid receiver-side operation,
//! and it keeps the purification exact on every input. A direct call to
//! [`product_purification`] with a fixed dimension instead truncates the
//! smallest `λ_k μ_l` products and reports the dropped mass.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::channels::{evolve_tripartite, ChannelError, QuantumChannel};
use crate::matkernel::{self, ComplexMatrix, MatError};
use crate::measures::{self, LossReport, MeasureError};
use crate::states::{LabeledState, StateError, SubsystemLayout};
use crate::tol;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("phi family is not orthonormal (max deviation {deviation:.3e})")]
    NonOrthonormalPhi { deviation: f64 },
    #[error("target basis has {got} columns, expected {expected}")]
    BasisSizeMismatch { expected: usize, got: usize },
    #[error("target basis is not orthonormal (max deviation {deviation:.3e})")]
    NonOrthonormalTarget { deviation: f64 },
    #[error("layout mismatch between target and seed purifications")]
    LayoutMismatch,
    #[error("loss of coherent information is negative ({0}); inconsistent pipeline")]
    NegativeLoss(f64),
    #[error("channel is not square ({dim_in} -> {dim_out}); recovery needs dim_out = dim_in")]
    NotSquareChannel { dim_in: usize, dim_out: usize },
    #[error("purifying system must have dimension >= 1")]
    ZeroQDimension,
    #[error("channel input dimension {expected} does not divide recovery dimension {got}")]
    IncompatibleRecoveryDim { expected: usize, got: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// The `(λ_k, μ_l, |k^R⟩, |l^E⟩, |φ_{kl}⟩)` data of a product-state
/// purification. `phi` holds the orthonormal family as columns in `(k, l)`
/// lexicographic order (`k` slow, `l` fast).
#[derive(Clone, Debug)]
pub struct ProductStructure {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub r_basis: ComplexMatrix,
    pub e_basis: ComplexMatrix,
    pub phi: ComplexMatrix,
    pub truncated_weight: f64,
}

impl ProductStructure {
    /// Assemble the structure from spectra and bases, truncating the
    /// smallest `λ_k μ_l` products when `rank(λ) · rank(μ)` exceeds
    /// `dim_q`. Spectra must be sorted descending with matching basis
    /// columns; entries at or below the eigenvalue cutoff are dropped as
    /// rank-zero modes.
    pub fn from_parts(
        lambda: &[f64],
        r_basis: &ComplexMatrix,
        mu: &[f64],
        e_basis: &ComplexMatrix,
        dim_q: usize,
    ) -> Self {
        assert!(dim_q >= 1, "dim_q must be >= 1");
        debug_assert!(lambda.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        debug_assert!(mu.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        let rank_l = lambda
            .iter()
            .take_while(|&&v| v > tol::EIGEN_CUTOFF)
            .count();
        let rank_m = mu.iter().take_while(|&&v| v > tol::EIGEN_CUTOFF).count();
        assert!(rank_l >= 1 && rank_m >= 1, "zero-rank marginal");

        // Keep the (k_count, l_count) prefix pair with maximal retained mass
        // subject to k_count * l_count <= dim_q.
        let prefix = |v: &[f64], n: usize| v.iter().take(n).sum::<f64>();
        let mut best: Option<(usize, usize, f64)> = None;
        for k_count in 1..=rank_l {
            let l_count = (dim_q / k_count).min(rank_m);
            if l_count == 0 {
                continue;
            }
            let mass = prefix(lambda, k_count) * prefix(mu, l_count);
            let better = match best {
                None => true,
                Some((bk, bl, bm)) => {
                    mass > bm + 1e-15
                        || ((mass - bm).abs() <= 1e-15
                            && (k_count * l_count > bk * bl
                                || (k_count * l_count == bk * bl && k_count > bk)))
                }
            };
            if better {
                best = Some((k_count, l_count, mass));
            }
        }
        let (k_count, l_count, mass) =
            best.expect("dim_q >= 1 always admits the (1, 1) prefix pair");

        let kept_lambda: Vec<f64> = lambda[..k_count].to_vec();
        let kept_mu: Vec<f64> = mu[..l_count].to_vec();
        let r_kept =
            ComplexMatrix::from_fn(r_basis.rows(), k_count, |r, c| r_basis[(r, c)]);
        let e_kept =
            ComplexMatrix::from_fn(e_basis.rows(), l_count, |r, c| e_basis[(r, c)]);
        // Initial phi family: first basis vectors of Q in (k, l) order.
        let phi = ComplexMatrix::from_fn(dim_q, k_count * l_count, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        ProductStructure {
            lambda: kept_lambda,
            mu: kept_mu,
            r_basis: r_kept,
            e_basis: e_kept,
            phi,
            truncated_weight: (1.0 - mass).max(0.0),
        }
    }

    pub fn dim_q(&self) -> usize {
        self.phi.rows()
    }

    /// Retained `(k, l)` grid shape.
    pub fn counts(&self) -> (usize, usize) {
        (self.lambda.len(), self.mu.len())
    }

    /// Rotate the phi family by a unitary on Q (used after alignment).
    pub fn rotated(&self, v: &ComplexMatrix) -> Self {
        let mut out = self.clone();
        out.phi = v * &self.phi;
        out
    }

    /// The purification vector over `(R, Q, E)` flat ordering, normalized.
    fn assemble_vector(&self) -> Vec<Complex64> {
        let (dr, de, dq) = (self.r_basis.rows(), self.e_basis.rows(), self.dim_q());
        let (k_count, l_count) = self.counts();
        let norm: f64 = self.lambda.iter().sum::<f64>() * self.mu.iter().sum::<f64>();
        let mut v = vec![Complex64::new(0.0, 0.0); dr * dq * de];
        for k in 0..k_count {
            for l in 0..l_count {
                let amp = (self.lambda[k] * self.mu[l] / norm).sqrt();
                let col = k * l_count + l;
                for r in 0..dr {
                    let rk = self.r_basis[(r, k)];
                    if rk.norm_sqr() == 0.0 {
                        continue;
                    }
                    for q in 0..dq {
                        let phi = self.phi[(q, col)];
                        if phi.norm_sqr() == 0.0 {
                            continue;
                        }
                        for e in 0..de {
                            v[(r * dq + q) * de + e] +=
                                rk * phi * self.e_basis[(e, l)] * amp;
                        }
                    }
                }
            }
        }
        v
    }
}

/// Pure product-state purification `Σ √(λ_k μ_l) |k^R⟩|φ_{kl}^Q⟩|l^E⟩` of
/// `ρ_r ⊗ ρ_e` over a Q system of the given dimension, on labels
/// `(R, Q, E)`.
///
/// When `rank(ρ_r) · rank(ρ_e) > dim_q` the smallest `λ_k μ_l` products are
/// dropped and the state renormalized; the dropped mass is recorded in
/// `truncated_weight` and the reduction is then the truncated-renormalized
/// product rather than `ρ_r ⊗ ρ_e` itself.
pub fn product_purification(
    rho_r: &ComplexMatrix,
    rho_e: &ComplexMatrix,
    dim_q: usize,
) -> Result<(LabeledState, ProductStructure), RecoveryError> {
    if dim_q == 0 {
        return Err(RecoveryError::ZeroQDimension);
    }
    let (lambda, r_basis) = descending_eig(rho_r)?;
    let (mu, e_basis) = descending_eig(rho_e)?;
    let structure = ProductStructure::from_parts(&lambda, &r_basis, &mu, &e_basis, dim_q);
    let layout = SubsystemLayout::new(&[
        ("R", rho_r.rows()),
        ("Q", dim_q),
        ("E", rho_e.rows()),
    ])?;
    let state = LabeledState::pure(layout, structure.assemble_vector())?;
    Ok((state, structure))
}

/// Full descending eigen-spectrum with matching eigenvector columns.
fn descending_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), RecoveryError> {
    let eig = matkernel::herm_eig(m)?;
    let n = eig.eigenvalues.len();
    let values: Vec<f64> = eig.eigenvalues.iter().rev().copied().collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, n - 1 - c)]);
    Ok((values, vectors))
}

/// Result of aligning a seed purification against a target by a unitary on
/// the purifying subsystem(s).
#[derive(Clone, Debug)]
pub struct AlignedPurification {
    pub state: LabeledState,
    /// `|⟨target|aligned⟩|`, the maximum overlap over all unitaries on the
    /// purifier; equals the sum of singular values of the contraction.
    pub overlap: f64,
    /// The maximizing unitary on the purifier.
    pub rotation: ComplexMatrix,
}

/// Rotate `seed` by the purifier-space unitary that maximizes its overlap
/// with `target`.
///
/// Both states must be pure on identical layouts; `purifier` lists the
/// subsystems the rotation may act on. The maximizer is the polar unitary of
/// the contraction of target against seed over the remaining subsystems, and
/// the achieved overlap is the contraction's trace norm. When the seed
/// purifies the complement marginal exactly (no truncation), that overlap
/// equals the Uhlmann fidelity between the two complement marginals.
pub fn optimal_purification(
    target: &LabeledState,
    seed: &LabeledState,
    purifier: &[&str],
) -> Result<AlignedPurification, RecoveryError> {
    if target.layout() != seed.layout() {
        return Err(RecoveryError::LayoutMismatch);
    }
    let t = target.vector().ok_or(StateError::NotPure)?;
    let s = seed.vector().ok_or(StateError::NotPure)?;
    let (sub, comp) = target.layout().split_offsets(purifier)?;
    let dim = sub.len();

    // C[x][x'] = Σ_c conj(target[c + x]) seed[c + x'].
    let mut c_mat = ComplexMatrix::zeros(dim, dim);
    for (x, &ox) in sub.iter().enumerate() {
        for (xp, &oxp) in sub.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in &comp {
                acc += t[c + ox].conj() * s[c + oxp];
            }
            c_mat[(x, xp)] = acc;
        }
    }
    // max_V |Tr(V Cᵀ)| over unitaries is Σ singular values, at V = W U†.
    let a = c_mat.transpose();
    let svd = matkernel::svd(&a);
    let overlap = svd
        .singular_values
        .iter()
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let rotation = &svd.v * &svd.u.dagger();
    let state = seed.apply_unitary_on(&rotation, purifier)?;
    debug_assert!({
        let achieved = target.overlap(&state).map(|z| z.norm()).unwrap_or(0.0);
        (achieved - overlap).abs() < 1e-8
    });
    Ok(AlignedPurification {
        state,
        overlap,
        rotation,
    })
}

/// The measurement-plus-conditional-unitary recovery packaged as one CPTP
/// channel with Kraus family `{U_l Π_l}` (plus an identity-action element on
/// any residual subspace, for trace preservation).
#[derive(Clone, Debug)]
pub struct RecoveryPlan {
    pub projectors: Vec<ComplexMatrix>,
    pub unitaries: Vec<ComplexMatrix>,
    pub as_channel: QuantumChannel,
}

/// Build the recovery from a product structure: `Π_l = Σ_k
/// |φ_{kl}⟩⟨φ_{kl}|` and unitaries `U_l` extending the partial isometries
/// `|φ_{kl}⟩ ↦ |k⟩` (target basis columns), completed orthonormally.
pub fn build_recovery(
    structure: &ProductStructure,
    target_q_basis: &ComplexMatrix,
) -> Result<RecoveryPlan, RecoveryError> {
    let dq = structure.dim_q();
    let (k_count, l_count) = structure.counts();
    if target_q_basis.cols() != k_count || target_q_basis.rows() != dq {
        return Err(RecoveryError::BasisSizeMismatch {
            expected: k_count,
            got: target_q_basis.cols(),
        });
    }
    let phi_gram = &structure.phi.dagger() * &structure.phi;
    let phi_dev = (&phi_gram - &ComplexMatrix::identity(k_count * l_count)).max_abs();
    if phi_dev > 1e-9 {
        return Err(RecoveryError::NonOrthonormalPhi { deviation: phi_dev });
    }
    let target_gram = &target_q_basis.dagger() * target_q_basis;
    let target_dev = (&target_gram - &ComplexMatrix::identity(k_count)).max_abs();
    if target_dev > 1e-9 {
        return Err(RecoveryError::NonOrthonormalTarget {
            deviation: target_dev,
        });
    }

    let target_cols: Vec<Vec<Complex64>> =
        (0..k_count).map(|k| target_q_basis.column(k)).collect();
    let range = matkernel::extend_to_unitary(dq, target_cols);

    let mut projectors = Vec::with_capacity(l_count);
    let mut unitaries = Vec::with_capacity(l_count);
    let mut kraus = Vec::with_capacity(l_count + 1);
    let mut projector_sum = ComplexMatrix::zeros(dq, dq);
    for l in 0..l_count {
        let phi_cols: Vec<Vec<Complex64>> = (0..k_count)
            .map(|k| structure.phi.column(k * l_count + l))
            .collect();
        let mut pi = ComplexMatrix::zeros(dq, dq);
        for col in &phi_cols {
            for r in 0..dq {
                for c in 0..dq {
                    pi[(r, c)] += col[r] * col[c].conj();
                }
            }
        }
        let domain = matkernel::extend_to_unitary(dq, phi_cols);
        // U_l maps φ_{kl} to target_k and the completed domain to the
        // completed range.
        let u = &range * &domain.dagger();
        kraus.push(&u * &pi);
        projector_sum = &projector_sum + &pi;
        projectors.push(pi);
        unitaries.push(u);
    }
    // Residual subspace gets an identity-action Kraus element.
    let residual = &ComplexMatrix::identity(dq) - &projector_sum;
    if residual.trace().re > 0.5 {
        kraus.push(residual);
    }
    let as_channel = QuantumChannel::from_kraus(kraus)?;
    Ok(RecoveryPlan {
        projectors,
        unitaries,
        as_channel,
    })
}

/// Everything produced on the way to a correction: the true final state,
/// its ancilla-extended version, the aligned product structure, and the
/// recovery plan built from it.
#[derive(Clone, Debug)]
pub struct CorrectionPipeline {
    /// True final pure state on `(R, Q, E)`.
    pub final_state: LabeledState,
    /// Final state with the recovery ancilla appended, on `(R, Q, E, A)`.
    pub embedded: LabeledState,
    /// Product structure after polar alignment (phi lives on Q ⊗ A).
    pub structure: ProductStructure,
    /// Recovery plan acting on Q ⊗ A.
    pub plan: RecoveryPlan,
    /// Maximal overlap of the final state with the product purification.
    pub uhlmann_overlap: f64,
    pub loss: LossReport,
    labels: (String, String),
    dims: (usize, usize),
}

impl CorrectionPipeline {
    pub fn ancilla_dim(&self) -> usize {
        self.embedded.layout().dims()[3]
    }
}

/// Outcome of one end-to-end correction run.
#[derive(Clone, Debug)]
pub struct CorrectionOutcome {
    /// Error-corrected state of `(R, Q)`.
    pub omega_rq: LabeledState,
    /// Loss of coherent information, in bits.
    pub epsilon: f64,
    pub achieved_f: f64,
    pub achieved_fe: f64,
    /// `1 − √ε` (negative values mean the bound is vacuous).
    pub bound_f: f64,
    /// `1 − 2√ε`.
    pub bound_fe: f64,
    pub uhlmann_overlap: f64,
    pub truncated_weight: f64,
    pub loss_report: LossReport,
}

impl CorrectionOutcome {
    pub fn margin_f(&self) -> f64 {
        self.achieved_f - self.bound_f
    }

    pub fn margin_fe(&self) -> f64 {
        self.achieved_fe - self.bound_fe
    }

    /// The fidelity bound says nothing once ε ≥ 1.
    pub fn bound_is_vacuous(&self) -> bool {
        self.epsilon >= 1.0
    }

    pub fn to_record(&self) -> CorrectionRecord {
        CorrectionRecord {
            epsilon: self.epsilon,
            achieved_f: self.achieved_f,
            bound_f: self.bound_f,
            margin_f: self.margin_f(),
            achieved_fe: self.achieved_fe,
            bound_fe: self.bound_fe,
            uhlmann_overlap: self.uhlmann_overlap,
            truncated_weight: self.truncated_weight,
        }
    }
}

/// Flat serialized form of a [`CorrectionOutcome`].
#[derive(Clone, Debug, Serialize)]
pub struct CorrectionRecord {
    pub epsilon: f64,
    pub achieved_f: f64,
    pub bound_f: f64,
    pub margin_f: f64,
    pub achieved_fe: f64,
    pub bound_fe: f64,
    pub uhlmann_overlap: f64,
    pub truncated_weight: f64,
}

/// Run the pipeline up to the recovery plan: dilate, evolve, measure the
/// loss, build the aligned product purification, and construct the recovery.
pub fn prepare(
    input: &LabeledState,
    ch: &QuantumChannel,
) -> Result<CorrectionPipeline, RecoveryError> {
    if !input.is_pure() {
        return Err(StateError::NotPure.into());
    }
    if input.layout().len() != 2 {
        return Err(StateError::NotBipartite(input.layout().len()).into());
    }
    if ch.dim_in() != ch.dim_out() {
        return Err(RecoveryError::NotSquareChannel {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
        });
    }
    let labels: Vec<String> = input.layout().labels().map(str::to_string).collect();
    let (r_label, q_label) = (labels[0].clone(), labels[1].clone());
    let dq = input.layout().dims()[1];
    if ch.dim_in() != dq {
        return Err(ChannelError::DimMismatch {
            expected: ch.dim_in(),
            got: dq,
        }
        .into());
    }

    // Schmidt data of the input fixes both the λ/|k^R⟩ pairing and the
    // target basis |k^Q⟩, so the recovery restores the input with matching
    // indices and phases even under spectral degeneracy.
    let schmidt = input.schmidt()?;
    let lambda: Vec<f64> = schmidt.coefficients.iter().map(|c| c * c).collect();
    let k_count = lambda.len();

    let final_state = evolve_tripartite(input, &ch.dilate())?;
    let loss = measures::coherent_information(&final_state)?;
    if loss.loss < -1e-9 {
        return Err(RecoveryError::NegativeLoss(loss.loss));
    }

    let rho_e = final_state.partial_trace(&["E"])?.density_matrix();
    let (mu_full, e_basis_full) = descending_eig(&rho_e)?;
    let l_count = mu_full
        .iter()
        .take_while(|&&v| v > tol::EIGEN_CUTOFF)
        .count()
        .max(1);

    // Enlarge the receiver's space so the orthonormal phi family fits:
    // dim(Q ⊗ A) >= k_count * l_count.
    let dim_a = (k_count * l_count).div_ceil(dq);
    let dq_tilde = dq * dim_a;
    let structure = ProductStructure::from_parts(
        &lambda,
        &schmidt.left_basis,
        &mu_full,
        &e_basis_full,
        dq_tilde,
    );
    debug_assert!(structure.truncated_weight < 1e-9);

    let embedded = final_state.tensor(&LabeledState::basis("A", dim_a, 0))?;

    // Seed purification on (R, Q, E, A): reindex the (R, Q̃, E) assembly
    // with the composite q̃ = q · dim_a + a.
    let seed3 = structure.assemble_vector();
    let (dr, de) = (structure.r_basis.rows(), structure.e_basis.rows());
    let mut seed_vec =
        vec![Complex64::new(0.0, 0.0); dr * dq * de * dim_a];
    for r in 0..dr {
        for q in 0..dq {
            for a in 0..dim_a {
                for e in 0..de {
                    seed_vec[((r * dq + q) * de + e) * dim_a + a] =
                        seed3[(r * dq_tilde + q * dim_a + a) * de + e];
                }
            }
        }
    }
    let seed = LabeledState::pure_unchecked(embedded.layout().clone(), seed_vec);

    let aligned = optimal_purification(&embedded, &seed, &[&q_label, "A"])?;
    let structure = structure.rotated(&aligned.rotation);

    // Target basis: input Schmidt |k^Q⟩ columns with the ancilla in |0⟩.
    let target = ComplexMatrix::from_fn(dq_tilde, k_count, |row, k| {
        if row % dim_a == 0 {
            schmidt.right_basis[(row / dim_a, k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let plan = build_recovery(&structure, &target)?;

    Ok(CorrectionPipeline {
        final_state,
        embedded,
        structure,
        plan,
        uhlmann_overlap: aligned.overlap,
        loss,
        labels: (r_label, q_label),
        dims: (dq, dim_a),
    })
}

/// End-to-end correction: run [`prepare`], apply the recovery channel to
/// the receiver's side of the true final state, discard the ancilla and
/// environment, and evaluate the achieved fidelity against the bounds.
pub fn correct(
    input: &LabeledState,
    ch: &QuantumChannel,
) -> Result<CorrectionOutcome, RecoveryError> {
    let pipeline = prepare(input, ch)?;
    let (r_label, q_label) = (&pipeline.labels.0, &pipeline.labels.1);

    // ω^{RQ} = Tr_{EA} [ Σ_j (K_j on QA) |final⟩⟨final| (K_j on QA)† ].
    let mut omega = ComplexMatrix::zeros(
        pipeline.embedded.layout().dims()[0] * pipeline.dims.0,
        pipeline.embedded.layout().dims()[0] * pipeline.dims.0,
    );
    for k in pipeline.plan.as_channel.kraus() {
        let branch = pipeline.embedded.apply_op_on(k, &[q_label, "A"])?;
        let contribution = pipeline
            .embedded
            .partial_trace_of_vector(&branch, &[r_label, q_label])?;
        omega = &omega + &contribution;
    }
    let omega = omega.hermitize();
    let omega_rq = LabeledState::mixed_unchecked(input.layout().clone(), omega.clone());

    let input_vec = input.vector().expect("validated pure");
    let achieved_fe = {
        let mv = omega.matvec(input_vec);
        matkernel::vec_dot(input_vec, &mv).re.clamp(0.0, 1.0)
    };
    let achieved_f = measures::fidelity(&omega, &input.density_matrix())?;

    let epsilon = pipeline.loss.loss;
    let sqrt_eps = epsilon.max(0.0).sqrt();
    Ok(CorrectionOutcome {
        omega_rq,
        epsilon,
        achieved_f,
        achieved_fe,
        bound_f: 1.0 - sqrt_eps,
        bound_fe: 1.0 - 2.0 * sqrt_eps,
        uhlmann_overlap: pipeline.uhlmann_overlap,
        truncated_weight: pipeline.structure.truncated_weight,
        loss_report: pipeline.loss.clone(),
    })
}

/// Coherent information before and after running the recovery channel's
/// dilation on the receiver's side (recovery environment absorbed alongside
/// `E`). Data processing cannot increase it.
pub fn data_processing_check(
    final_state: &LabeledState,
    plan: &RecoveryPlan,
) -> Result<(f64, f64), RecoveryError> {
    if final_state.layout().len() != 3 {
        return Err(MeasureError::NotTripartite(final_state.layout().len()).into());
    }
    let labels: Vec<String> = final_state.layout().labels().map(str::to_string).collect();
    let (r_label, q_label) = (labels[0].as_str(), labels[1].as_str());
    let dq = final_state.layout().dims()[1];
    let recovery_dim = plan.as_channel.dim_in();
    if !recovery_dim.is_multiple_of(dq) {
        return Err(RecoveryError::IncompatibleRecoveryDim {
            expected: dq,
            got: recovery_dim,
        });
    }
    let dim_a = recovery_dim / dq;

    let before = measures::coherent_information(final_state)?;
    let i_before = before.coherent_info;

    let dilation = plan.as_channel.dilate();
    let extended = final_state
        .tensor(&LabeledState::basis("A", dim_a, 0))?
        .tensor(&LabeledState::pure(
            SubsystemLayout::new(&[("E2", dilation.env_dim)])?,
            dilation.env_init.clone(),
        )?)?;
    let evolved = extended.apply_unitary_on(&dilation.u, &[q_label, "A", "E2"])?;

    // The receiver now holds (Q, A).
    let rho_recv = evolved.partial_trace(&[q_label, "A"])?.density_matrix();
    let rho_r_recv = evolved
        .partial_trace(&[r_label, q_label, "A"])?
        .density_matrix();
    let i_after = measures::von_neumann_entropy(&rho_recv)?
        - measures::von_neumann_entropy(&rho_r_recv)?;
    Ok((i_before, i_after))
}
