//! Multipartite pure and mixed states over labeled subsystems.
//!
//! A [`SubsystemLayout`] is an ordered list of labeled subsystems (for
//! example `R`, `Q`, `E`) with per-label dimensions. Tensor indices are
//! row-major: the leftmost label varies slowest. That single fixed
//! convention keeps all partial-trace and operator-embedding index
//! arithmetic exact and testable.

use num_complex::Complex64;
use thiserror::Error;

use crate::matkernel::{self, ComplexMatrix, MatError, Svd};
use crate::tol;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("duplicate label `{0}` in layout")]
    DuplicateLabel(String),
    #[error("label collision on `{0}` between tensor factors")]
    LabelCollision(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("keep set must be a nonempty subset of the layout")]
    EmptyKeep,
    #[error("operation requires a pure state")]
    NotPure,
    #[error("operation requires exactly two subsystems, layout has {0}")]
    NotBipartite(usize),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("{count} Schmidt coefficients do not fit in dimension {dim}")]
    TooManyCoefficients { count: usize, dim: usize },
    #[error("ancilla dimension {dim} below state rank {rank}")]
    AncillaTooSmall { rank: usize, dim: usize },
    #[error("state vector/matrix size {got} does not match layout dimension {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("not a valid state: {0}")]
    InvalidState(String),
    #[error("operator dimension {got} does not match target subsystems ({expected})")]
    OperatorDimMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Ordered list of labeled subsystems with their dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(parts: &[(&str, usize)]) -> Result<Self, StateError> {
        if parts.is_empty() {
            return Err(StateError::InvalidState(
                "layout must have at least one subsystem".into(),
            ));
        }
        let mut labels = Vec::with_capacity(parts.len());
        let mut dims = Vec::with_capacity(parts.len());
        for &(label, dim) in parts {
            if dim < 1 {
                return Err(StateError::InvalidState(format!(
                    "subsystem `{label}` has dimension 0"
                )));
            }
            if labels.iter().any(|l| l == label) {
                return Err(StateError::DuplicateLabel(label.to_string()));
            }
            labels.push(label.to_string());
            dims.push(dim);
        }
        Ok(SubsystemLayout { labels, dims })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|s| s.as_str())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize, StateError> {
        self.position(label)
            .map(|p| self.dims[p])
            .ok_or_else(|| StateError::UnknownLabel(label.to_string()))
    }

    fn concat(&self, other: &Self) -> Result<Self, StateError> {
        for l in other.labels() {
            if self.position(l).is_some() {
                return Err(StateError::LabelCollision(l.to_string()));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(SubsystemLayout { labels, dims })
    }

    /// Row-major strides: the leftmost label varies slowest.
    fn strides(&self) -> Vec<usize> {
        let n = self.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Positions of the given labels, in the order given, erroring on
    /// unknowns.
    fn resolve(&self, labels: &[&str]) -> Result<Vec<usize>, StateError> {
        let mut positions = Vec::with_capacity(labels.len());
        for l in labels {
            positions.push(
                self.position(l)
                    .ok_or_else(|| StateError::UnknownLabel(l.to_string()))?,
            );
        }
        Ok(positions)
    }

    /// Flat offsets for every joint index of the labeled subsystems (in the
    /// order given) and, separately, of their complement (in layout order).
    pub(crate) fn split_offsets(
        &self,
        labels: &[&str],
    ) -> Result<(Vec<usize>, Vec<usize>), StateError> {
        let positions = self.resolve(labels)?;
        let complement: Vec<usize> = (0..self.len())
            .filter(|p| !positions.contains(p))
            .collect();
        let subset = self.subset_offsets(&positions);
        let comp = if complement.is_empty() {
            vec![0usize]
        } else {
            self.subset_offsets(&complement)
        };
        Ok((subset, comp))
    }

    /// Flat offsets into the full index space for every joint index of the
    /// subsystems at `positions` (enumerated row-major in the order given).
    fn subset_offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.dims[p]).collect();
        let total: usize = dims.iter().product();
        let mut offsets = vec![0usize; total];
        for (flat, offset) in offsets.iter_mut().enumerate() {
            let mut rem = flat;
            let mut off = 0;
            for (i, &p) in positions.iter().enumerate().rev() {
                let digit = rem % dims[i];
                rem /= dims[i];
                off += digit * strides[p];
            }
            *offset = off;
        }
        offsets
    }
}

#[derive(Clone, Debug)]
enum StateBody {
    Pure(Vec<Complex64>),
    Mixed(ComplexMatrix),
}

/// A pure state vector or density operator over a [`SubsystemLayout`].
#[derive(Clone, Debug)]
pub struct LabeledState {
    layout: SubsystemLayout,
    body: StateBody,
}

impl LabeledState {
    /// A normalized pure state (‖ψ‖ = 1 within tolerance).
    pub fn pure(layout: SubsystemLayout, vector: Vec<Complex64>) -> Result<Self, StateError> {
        if vector.len() != layout.total_dim() {
            return Err(StateError::SizeMismatch {
                expected: layout.total_dim(),
                got: vector.len(),
            });
        }
        let norm = matkernel::vec_norm(&vector);
        if (norm - 1.0).abs() > tol::STATE_NORM {
            return Err(StateError::InvalidState(format!(
                "pure state norm {norm} deviates from 1"
            )));
        }
        Ok(LabeledState {
            layout,
            body: StateBody::Pure(vector),
        })
    }

    /// A density operator (Hermitian, PSD and unit trace within tolerance).
    pub fn mixed(layout: SubsystemLayout, matrix: ComplexMatrix) -> Result<Self, StateError> {
        let d = layout.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(StateError::SizeMismatch {
                expected: d,
                got: matrix.rows(),
            });
        }
        if !matrix.is_hermitian(tol::HERMITIAN) {
            return Err(StateError::InvalidState(format!(
                "density operator deviates from Hermitian by {:.3e}",
                matrix.hermitian_deviation()
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::STATE_NORM || trace.im.abs() > tol::STATE_NORM {
            return Err(StateError::InvalidState(format!(
                "density operator trace {trace} deviates from 1"
            )));
        }
        if !matrix.is_psd(tol::PSD_CLAMP) {
            return Err(StateError::InvalidState(
                "density operator is not positive semidefinite".into(),
            ));
        }
        Ok(LabeledState {
            layout,
            body: StateBody::Mixed(matrix),
        })
    }

    /// Internal constructor for operators that are valid by construction
    /// (partial traces, Kraus sums). Skips the eigenvalue-based PSD check.
    pub(crate) fn mixed_unchecked(layout: SubsystemLayout, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), layout.total_dim());
        debug_assert!(matrix.is_hermitian(1e-8));
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8);
        LabeledState {
            layout,
            body: StateBody::Mixed(matrix),
        }
    }

    pub(crate) fn pure_unchecked(layout: SubsystemLayout, vector: Vec<Complex64>) -> Self {
        debug_assert_eq!(vector.len(), layout.total_dim());
        debug_assert!((matkernel::vec_norm(&vector) - 1.0).abs() < 1e-8);
        LabeledState {
            layout,
            body: StateBody::Pure(vector),
        }
    }

    /// Basis state |i⟩ on a single labeled subsystem.
    pub fn basis(label: &str, dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        LabeledState {
            layout: SubsystemLayout::new(&[(label, dim)]).expect("single label"),
            body: StateBody::Pure(v),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.body, StateBody::Pure(_))
    }

    pub fn vector(&self) -> Option<&[Complex64]> {
        match &self.body {
            StateBody::Pure(v) => Some(v),
            StateBody::Mixed(_) => None,
        }
    }

    /// Density operator view: |ψ⟩⟨ψ| for pure states, a copy otherwise.
    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.body {
            StateBody::Pure(v) => {
                ComplexMatrix::from_fn(v.len(), v.len(), |r, c| v[r] * v[c].conj())
            }
            StateBody::Mixed(m) => m.clone(),
        }
    }

    /// ⟨a|b⟩ for two pure states on identical layouts.
    pub fn overlap(&self, other: &Self) -> Result<Complex64, StateError> {
        let (a, b) = match (&self.body, &other.body) {
            (StateBody::Pure(a), StateBody::Pure(b)) => (a, b),
            _ => return Err(StateError::NotPure),
        };
        if self.layout != other.layout {
            return Err(StateError::InvalidState(
                "layout mismatch in overlap".into(),
            ));
        }
        Ok(matkernel::vec_dot(a, b))
    }

    /// Tensor product. Pure ⊗ pure stays pure; any mixed factor yields a
    /// density operator.
    pub fn tensor(&self, other: &Self) -> Result<Self, StateError> {
        let layout = self.layout.concat(&other.layout)?;
        match (&self.body, &other.body) {
            (StateBody::Pure(a), StateBody::Pure(b)) => {
                let mut v = Vec::with_capacity(a.len() * b.len());
                for &x in a {
                    for &y in b {
                        v.push(x * y);
                    }
                }
                Ok(LabeledState {
                    layout,
                    body: StateBody::Pure(v),
                })
            }
            _ => {
                let m = self.density_matrix().kron(&other.density_matrix());
                Ok(LabeledState {
                    layout,
                    body: StateBody::Mixed(m),
                })
            }
        }
    }

    /// Reduced density operator on the subsystems in `keep` (in layout
    /// order), tracing out the rest.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptyKeep);
        }
        let mut keep_positions = self.layout.resolve(keep)?;
        keep_positions.sort_unstable();
        keep_positions.dedup();
        let traced_positions: Vec<usize> = (0..self.layout.len())
            .filter(|p| !keep_positions.contains(p))
            .collect();

        let keep_parts: Vec<(&str, usize)> = keep_positions
            .iter()
            .map(|&p| (self.layout.labels[p].as_str(), self.layout.dims[p]))
            .collect();
        let out_layout = SubsystemLayout::new(&keep_parts)?;

        if traced_positions.is_empty() {
            return Ok(LabeledState::mixed_unchecked(
                out_layout,
                self.density_matrix(),
            ));
        }

        let keep_offsets = self.layout.subset_offsets(&keep_positions);
        let traced_offsets = self.layout.subset_offsets(&traced_positions);
        let rho = partial_trace_raw(&self.body, &keep_offsets, &traced_offsets);
        Ok(LabeledState::mixed_unchecked(out_layout, rho))
    }

    /// Schmidt decomposition of a pure bipartite state.
    pub fn schmidt(&self) -> Result<SchmidtForm, StateError> {
        let v = self.vector().ok_or(StateError::NotPure)?;
        if self.layout.len() != 2 {
            return Err(StateError::NotBipartite(self.layout.len()));
        }
        let (da, db) = (self.layout.dims[0], self.layout.dims[1]);
        let amps = ComplexMatrix::from_fn(da, db, |r, c| v[r * db + c]);
        let Svd {
            u,
            singular_values,
            v: right,
        } = matkernel::svd(&amps);

        // Keep coefficients above the support cutoff; ψ = Σ s_k u_k ⊗ conj(v_k).
        let rank = singular_values
            .iter()
            .take_while(|&&s| s > tol::EIGEN_CUTOFF)
            .count()
            .max(1);
        let coefficients: Vec<f64> = singular_values[..rank].to_vec();
        let left_basis = ComplexMatrix::from_fn(da, rank, |r, c| u[(r, c)]);
        let right_basis = ComplexMatrix::from_fn(db, rank, |r, c| right[(r, c)].conj());
        Ok(SchmidtForm {
            coefficients,
            left_basis,
            right_basis,
        })
    }

    /// Canonical purification over a fresh ancilla: with eigenpairs
    /// `(p_i, |v_i⟩)` of the state, returns `Σ √p_i |v_i⟩ ⊗ |i⟩`.
    pub fn purify(&self, ancilla_label: &str, ancilla_dim: usize) -> Result<Self, StateError> {
        let rho = self.density_matrix();
        let eig = matkernel::herm_eig(&rho)?;
        let d = rho.rows();
        // Descending eigenvalues above the cutoff.
        let mut pairs: Vec<(f64, usize)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > tol::EIGEN_CUTOFF)
            .map(|(i, &w)| (w, i))
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let rank = pairs.len();
        if ancilla_dim < rank {
            return Err(StateError::AncillaTooSmall {
                rank,
                dim: ancilla_dim,
            });
        }
        let anc = SubsystemLayout::new(&[(ancilla_label, ancilla_dim)])?;
        let layout = self.layout.concat(&anc)?;
        let mut v = vec![Complex64::new(0.0, 0.0); d * ancilla_dim];
        for (i, &(w, col)) in pairs.iter().enumerate() {
            let amp = w.sqrt();
            for r in 0..d {
                v[r * ancilla_dim + i] = eig.eigenvectors[(r, col)] * amp;
            }
        }
        // Renormalize tiny cutoff losses away.
        let norm = matkernel::vec_norm(&v);
        for z in &mut v {
            *z /= norm;
        }
        Ok(LabeledState {
            layout,
            body: StateBody::Pure(v),
        })
    }

    /// Apply an operator to the listed subsystems of a pure state. The
    /// operator is indexed row-major over `labels` in the order given; it
    /// need not be unitary (callers may pass Kraus operators), so the result
    /// is returned as a raw vector.
    pub fn apply_op_on(
        &self,
        op: &ComplexMatrix,
        labels: &[&str],
    ) -> Result<Vec<Complex64>, StateError> {
        let psi = self.vector().ok_or(StateError::NotPure)?;
        let positions = self.layout.resolve(labels)?;
        let op_dim: usize = positions.iter().map(|&p| self.layout.dims[p]).product();
        if op.rows() != op_dim || op.cols() != op_dim {
            return Err(StateError::OperatorDimMismatch {
                expected: op_dim,
                got: op.rows(),
            });
        }
        let op_offsets = self.layout.subset_offsets(&positions);
        let complement: Vec<usize> = (0..self.layout.len())
            .filter(|p| !positions.contains(p))
            .collect();
        let comp_offsets = if complement.is_empty() {
            vec![0usize]
        } else {
            self.layout.subset_offsets(&complement)
        };

        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        let mut gathered = vec![Complex64::new(0.0, 0.0); op_dim];
        for &c in &comp_offsets {
            for (x, g) in op_offsets.iter().zip(gathered.iter_mut()) {
                *g = psi[c + x];
            }
            let transformed = op.matvec(&gathered);
            for (x, t) in op_offsets.iter().zip(transformed) {
                out[c + x] = t;
            }
        }
        Ok(out)
    }

    /// Apply a unitary to the listed subsystems, returning a state.
    pub fn apply_unitary_on(
        &self,
        u: &ComplexMatrix,
        labels: &[&str],
    ) -> Result<Self, StateError> {
        match &self.body {
            StateBody::Pure(_) => {
                let v = self.apply_op_on(u, labels)?;
                Ok(LabeledState {
                    layout: self.layout.clone(),
                    body: StateBody::Pure(v),
                })
            }
            StateBody::Mixed(rho) => {
                let full = embed_operator(&self.layout, u, labels)?;
                let out = &(&full * rho) * &full.dagger();
                Ok(LabeledState::mixed_unchecked(self.layout.clone(), out))
            }
        }
    }

    /// Partial trace of an arbitrary (not necessarily normalized) pure
    /// vector over this state's layout, keeping `keep`. Used to accumulate
    /// Kraus-branch contributions without intermediate normalization.
    pub(crate) fn partial_trace_of_vector(
        &self,
        psi: &[Complex64],
        keep: &[&str],
    ) -> Result<ComplexMatrix, StateError> {
        let mut keep_positions = self.layout.resolve(keep)?;
        keep_positions.sort_unstable();
        let traced_positions: Vec<usize> = (0..self.layout.len())
            .filter(|p| !keep_positions.contains(p))
            .collect();
        let keep_offsets = self.layout.subset_offsets(&keep_positions);
        let traced_offsets = if traced_positions.is_empty() {
            vec![0usize]
        } else {
            self.layout.subset_offsets(&traced_positions)
        };
        Ok(partial_trace_raw(
            &StateBody::Pure(psi.to_vec()),
            &keep_offsets,
            &traced_offsets,
        ))
    }
}

fn partial_trace_raw(
    body: &StateBody,
    keep_offsets: &[usize],
    traced_offsets: &[usize],
) -> ComplexMatrix {
    let kd = keep_offsets.len();
    let mut rho = ComplexMatrix::zeros(kd, kd);
    match body {
        StateBody::Pure(psi) => {
            for (i, &ki) in keep_offsets.iter().enumerate() {
                for (j, &kj) in keep_offsets.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &t in traced_offsets {
                        acc += psi[ki + t] * psi[kj + t].conj();
                    }
                    rho[(i, j)] = acc;
                }
            }
        }
        StateBody::Mixed(m) => {
            for (i, &ki) in keep_offsets.iter().enumerate() {
                for (j, &kj) in keep_offsets.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &t in traced_offsets {
                        acc += m[(ki + t, kj + t)];
                    }
                    rho[(i, j)] = acc;
                }
            }
        }
    }
    rho
}

/// Embed an operator acting on the listed subsystems into the full space
/// (identity elsewhere).
pub fn embed_operator(
    layout: &SubsystemLayout,
    op: &ComplexMatrix,
    labels: &[&str],
) -> Result<ComplexMatrix, StateError> {
    let positions = layout.resolve(labels)?;
    let op_dim: usize = positions.iter().map(|&p| layout.dims[p]).product();
    if op.rows() != op_dim || op.cols() != op_dim {
        return Err(StateError::OperatorDimMismatch {
            expected: op_dim,
            got: op.rows(),
        });
    }
    let op_offsets = layout.subset_offsets(&positions);
    let complement: Vec<usize> = (0..layout.len())
        .filter(|p| !positions.contains(p))
        .collect();
    let comp_offsets = if complement.is_empty() {
        vec![0usize]
    } else {
        layout.subset_offsets(&complement)
    };
    let d = layout.total_dim();
    let mut full = ComplexMatrix::zeros(d, d);
    for &c in &comp_offsets {
        for (xr, &or) in op_offsets.iter().enumerate() {
            for (xc, &oc) in op_offsets.iter().enumerate() {
                full[(c + or, c + oc)] = op[(xr, xc)];
            }
        }
    }
    Ok(full)
}

/// Schmidt form of a pure bipartite state: `ψ = Σ_k c_k |k^A⟩ ⊗ |k^B⟩` with
/// `c_k` nonnegative descending and orthonormal basis columns.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left_basis: ComplexMatrix,
    pub right_basis: ComplexMatrix,
}

impl SchmidtForm {
    /// Reassemble the state vector, for reconstruction checks.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let da = self.left_basis.rows();
        let db = self.right_basis.rows();
        let mut v = vec![Complex64::new(0.0, 0.0); da * db];
        for (k, &ck) in self.coefficients.iter().enumerate() {
            for a in 0..da {
                for b in 0..db {
                    v[a * db + b] += self.left_basis[(a, k)] * self.right_basis[(b, k)] * ck;
                }
            }
        }
        v
    }
}

/// Entangled input state `Σ_k √λ_k |k^R⟩ ⊗ |k^Q⟩` on labels `(R, Q)` with
/// `dim R = len(λ)`.
pub fn entangled_input(lambda: &[f64], dim_q: usize) -> Result<LabeledState, StateError> {
    if lambda.is_empty() {
        return Err(StateError::InvalidDistribution("empty".into()));
    }
    if lambda.iter().any(|&l| l < 0.0) {
        return Err(StateError::InvalidDistribution(
            "negative coefficient".into(),
        ));
    }
    let sum: f64 = lambda.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(StateError::InvalidDistribution(format!(
            "sum {sum} deviates from 1"
        )));
    }
    if lambda.len() > dim_q {
        return Err(StateError::TooManyCoefficients {
            count: lambda.len(),
            dim: dim_q,
        });
    }
    let dim_r = lambda.len();
    let layout = SubsystemLayout::new(&[("R", dim_r), ("Q", dim_q)])?;
    let mut v = vec![Complex64::new(0.0, 0.0); dim_r * dim_q];
    for (k, &l) in lambda.iter().enumerate() {
        v[k * dim_q + k] = Complex64::new(l.sqrt(), 0.0);
    }
    LabeledState::pure(layout, v)
}
