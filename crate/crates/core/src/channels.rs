//! CPTP channels as Kraus families with explicit Stinespring dilations.
//!
//! A [`QuantumChannel`] stores a Kraus family `{K_l}` with `Σ K†K = 1`. Its
//! [`Dilation`] is the unitary-plus-environment picture: a unitary `U` on
//! system ⊗ environment and a fixed environment start state `|0⟩`, with
//! `Tr_E[U (ρ ⊗ |0⟩⟨0|) U†]` reproducing the Kraus action. The environment
//! dimension equals the Kraus count; `U` is pinned on the `|·⟩⊗|0⟩` sector
//! by the Kraus family and completed to a unitary elsewhere.

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::matkernel::{self, ComplexMatrix, MatError};
use crate::states::{LabeledState, StateError, SubsystemLayout};
use crate::tol;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("Kraus family is empty")]
    EmptyKraus,
    #[error("Kraus operator {index} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("Kraus completeness violated: ‖Σ K†K − 1‖_max = {residual:.3e}")]
    CompletenessViolation { residual: f64 },
    #[error("dimension mismatch: channel expects {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("unknown channel family `{0}`")]
    UnknownFamily(String),
    #[error("parameter `{name}` = {value} outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("channel family `{family}` requires dimension >= {expected}, got {got}")]
    UnsupportedDim {
        family: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("malformed channel spec `{spec}`: {reason}")]
    MalformedSpec { spec: String, reason: String },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// A trace-preserving completely positive map held as a Kraus family.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Build a channel from its Kraus family, verifying completeness
    /// `Σ K†K = 1` within [`tol::KRAUS_COMPLETENESS`].
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        Self::from_kraus_with_tol(kraus, tol::KRAUS_COMPLETENESS)
    }

    fn from_kraus_with_tol(
        kraus: Vec<ComplexMatrix>,
        completeness_tol: f64,
    ) -> Result<Self, ChannelError> {
        let first = kraus.first().ok_or(ChannelError::EmptyKraus)?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for (index, k) in kraus.iter().enumerate() {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(ChannelError::ShapeMismatch {
                    index,
                    rows: k.rows(),
                    cols: k.cols(),
                    expected_rows: dim_out,
                    expected_cols: dim_in,
                });
            }
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = &sum + &(&k.dagger() * k);
        }
        let residual = (&sum - &ComplexMatrix::identity(dim_in)).max_abs();
        if residual > completeness_tol {
            return Err(ChannelError::CompletenessViolation { residual });
        }
        Ok(QuantumChannel {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn identity(dim: usize) -> Self {
        QuantumChannel {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `ρ ↦ Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(ChannelError::DimMismatch {
                expected: self.dim_in,
                got: rho.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * rho) * &k.dagger());
        }
        Ok(out.hermitize())
    }

    /// Apply the channel to the listed subsystems of a labeled state,
    /// returning a density operator over the same layout.
    pub fn apply_on(
        &self,
        state: &LabeledState,
        labels: &[&str],
    ) -> Result<LabeledState, ChannelError> {
        let op_dim: usize = labels
            .iter()
            .map(|l| state.layout().dim_of(l))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .product();
        if op_dim != self.dim_in {
            return Err(ChannelError::DimMismatch {
                expected: self.dim_in,
                got: op_dim,
            });
        }
        let full_dim = state.layout().total_dim();
        let mut out = ComplexMatrix::zeros(full_dim, full_dim);
        if state.is_pure() {
            for k in &self.kraus {
                let branch = state.apply_op_on(k, labels)?;
                for r in 0..full_dim {
                    if branch[r].norm_sqr() == 0.0 {
                        continue;
                    }
                    for c in 0..full_dim {
                        out[(r, c)] += branch[r] * branch[c].conj();
                    }
                }
            }
        } else {
            let rho = state.density_matrix();
            for k in &self.kraus {
                let full = crate::states::embed_operator(state.layout(), k, labels)?;
                out = &out + &(&(&full * &rho) * &full.dagger());
            }
        }
        Ok(LabeledState::mixed_unchecked(
            state.layout().clone(),
            out.hermitize(),
        ))
    }

    /// Stinespring dilation: environment dimension equals the Kraus count,
    /// `U (|i⟩ ⊗ |0⟩) = Σ_l (K_l |i⟩) ⊗ |l⟩`, remaining columns completed
    /// to a unitary by orthonormal extension.
    pub fn dilate(&self) -> Dilation {
        let env_dim = self.kraus.len();
        let total = self.dim_out * env_dim;
        assert!(
            total >= self.dim_in,
            "dilation space smaller than the input space"
        );
        let mut placed: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(self.dim_in);
        for i in 0..self.dim_in {
            let mut col = vec![Complex64::new(0.0, 0.0); total];
            for (l, k) in self.kraus.iter().enumerate() {
                for q in 0..self.dim_out {
                    col[q * env_dim + l] = k[(q, i)];
                }
            }
            placed.push((i * env_dim, col));
        }
        let u = unitary_with_columns(total, placed);
        let mut env_init = vec![Complex64::new(0.0, 0.0); env_dim];
        env_init[0] = Complex64::new(1.0, 0.0);
        Dilation {
            env_dim,
            u,
            env_init,
        }
    }

    /// Composition `after ∘ before`: Kraus family of all products.
    pub fn compose(after: &Self, before: &Self) -> Result<Self, ChannelError> {
        if before.dim_out != after.dim_in {
            return Err(ChannelError::DimMismatch {
                expected: after.dim_in,
                got: before.dim_out,
            });
        }
        let mut kraus = Vec::with_capacity(after.kraus.len() * before.kraus.len());
        for a in &after.kraus {
            for b in &before.kraus {
                kraus.push(a * b);
            }
        }
        Self::from_kraus_with_tol(kraus, tol::COMPOSE_COMPLETENESS)
    }
}

/// Unitary with the given columns placed at the given indices (columns must
/// be orthonormal); the rest is filled by orthonormal extension.
fn unitary_with_columns(dim: usize, placed: Vec<(usize, Vec<Complex64>)>) -> ComplexMatrix {
    let fixed: Vec<Vec<Complex64>> = placed.iter().map(|(_, c)| c.clone()).collect();
    let extended = matkernel::extend_to_unitary(dim, fixed);
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut taken = vec![false; dim];
    for (slot, (col_index, _)) in placed.iter().enumerate() {
        u.set_column(*col_index, &extended.column(slot));
        taken[*col_index] = true;
    }
    let mut next = placed.len();
    for c in 0..dim {
        if !taken[c] {
            u.set_column(c, &extended.column(next));
            next += 1;
        }
    }
    u
}

/// Unitary environment model of a channel: `U` on system ⊗ environment with
/// a fixed environment start vector.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub env_dim: usize,
    pub u: ComplexMatrix,
    pub env_init: Vec<Complex64>,
}

/// Evolve a pure two-subsystem input through a dilation: tensors on the
/// environment in its start state, applies `1 ⊗ U` on (second subsystem,
/// environment), and returns the pure tripartite final state.
///
/// The second label of the input is the channel's system; the environment
/// label is `E`.
pub fn evolve_tripartite(
    input: &LabeledState,
    dilation: &Dilation,
) -> Result<LabeledState, ChannelError> {
    if !input.is_pure() {
        return Err(StateError::NotPure.into());
    }
    if input.layout().len() != 2 {
        return Err(StateError::NotBipartite(input.layout().len()).into());
    }
    let labels: Vec<&str> = input.layout().labels().collect();
    let q_label = labels[1];
    let q_dim = input.layout().dims()[1];
    if dilation.u.rows() != q_dim * dilation.env_dim {
        return Err(ChannelError::DimMismatch {
            expected: dilation.u.rows(),
            got: q_dim * dilation.env_dim,
        });
    }
    let env = LabeledState::pure(
        SubsystemLayout::new(&[("E", dilation.env_dim)])?,
        dilation.env_init.clone(),
    )?;
    let joint = input.tensor(&env)?;
    Ok(joint.apply_unitary_on(&dilation.u, &[q_label, "E"])?)
}

/// Specification of a standard channel family.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Identity { dim: usize },
    PhaseFlip { p: f64 },
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma: f64 },
    Random { dim: usize, env: usize, seed: u64 },
}

impl ChannelSpec {
    /// Parse CLI-style spec strings: `identity:d=2`, `phaseflip:p=0.1`,
    /// `depolarizing:p=0.05`, `ampdamp:g=0.3`, `random:d=2,e=4,seed=7`.
    pub fn parse(spec: &str) -> Result<Self, ChannelError> {
        let malformed = |reason: &str| ChannelError::MalformedSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = spec.splitn(2, ':');
        let family = parts.next().unwrap_or("").trim();
        let args = parts.next().unwrap_or("");
        let mut kv = std::collections::BTreeMap::new();
        for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
            let mut it = pair.splitn(2, '=');
            let key = it.next().unwrap_or("").trim().to_string();
            let value = it
                .next()
                .ok_or_else(|| malformed(&format!("missing value in `{pair}`")))?
                .trim()
                .to_string();
            kv.insert(key, value);
        }
        let get_f64 = |kv: &std::collections::BTreeMap<String, String>, key: &str| {
            kv.get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| malformed(&format!("`{key}` is not a number")))
                })
                .transpose()
        };
        let get_usize = |kv: &std::collections::BTreeMap<String, String>, key: &str| {
            kv.get(key)
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| malformed(&format!("`{key}` is not an integer")))
                })
                .transpose()
        };
        match family {
            "identity" => Ok(ChannelSpec::Identity {
                dim: get_usize(&kv, "d")?.unwrap_or(2),
            }),
            "phaseflip" | "phase-flip" => Ok(ChannelSpec::PhaseFlip {
                p: get_f64(&kv, "p")?.ok_or_else(|| malformed("missing `p`"))?,
            }),
            "depolarizing" => Ok(ChannelSpec::Depolarizing {
                p: get_f64(&kv, "p")?.ok_or_else(|| malformed("missing `p`"))?,
            }),
            "ampdamp" | "amplitude-damping" => Ok(ChannelSpec::AmplitudeDamping {
                gamma: get_f64(&kv, "g")?.ok_or_else(|| malformed("missing `g`"))?,
            }),
            "random" => Ok(ChannelSpec::Random {
                dim: get_usize(&kv, "d")?.unwrap_or(2),
                env: get_usize(&kv, "e")?.unwrap_or(2),
                seed: kv
                    .get("seed")
                    .map(|v| {
                        v.parse::<u64>()
                            .map_err(|_| malformed("`seed` is not an integer"))
                    })
                    .transpose()?
                    .unwrap_or(0),
            }),
            other => Err(ChannelError::UnknownFamily(other.to_string())),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = ChannelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChannelSpec::parse(s)
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ChannelError::ParamOutOfRange { name, value });
    }
    Ok(())
}

/// Build a channel from a [`ChannelSpec`].
///
/// The noise families (`phaseflip`, `depolarizing`, `ampdamp`) are qubit
/// channels; `identity` and `random` take any dimension. The `random` family
/// orthonormalizes seeded Gaussian columns into an isometry, so it is
/// reproducible given the seed.
pub fn standard_channel(spec: &ChannelSpec) -> Result<QuantumChannel, ChannelError> {
    let one = Complex64::new(1.0, 0.0);
    let dim_check = |family: &'static str, dim: usize| {
        if dim < 1 {
            Err(ChannelError::UnsupportedDim {
                family,
                expected: 1,
                got: dim,
            })
        } else {
            Ok(())
        }
    };
    match *spec {
        ChannelSpec::Identity { dim } => {
            dim_check("identity", dim)?;
            Ok(QuantumChannel::identity(dim))
        }
        ChannelSpec::PhaseFlip { p } => {
            check_prob("p", p)?;
            let k0 = ComplexMatrix::identity(2).scale((1.0 - p).sqrt());
            let mut z = ComplexMatrix::identity(2);
            z[(1, 1)] = -one;
            let k1 = z.scale(p.sqrt());
            QuantumChannel::from_kraus(vec![k0, k1])
        }
        ChannelSpec::Depolarizing { p } => {
            check_prob("p", p)?;
            // ρ ↦ (1−p)ρ + p·1/2 via the four-Pauli Kraus family.
            let mut x = ComplexMatrix::zeros(2, 2);
            x[(0, 1)] = one;
            x[(1, 0)] = one;
            let mut y = ComplexMatrix::zeros(2, 2);
            y[(0, 1)] = Complex64::new(0.0, -1.0);
            y[(1, 0)] = Complex64::new(0.0, 1.0);
            let mut z = ComplexMatrix::identity(2);
            z[(1, 1)] = -one;
            let k0 = ComplexMatrix::identity(2).scale((1.0 - 3.0 * p / 4.0).sqrt());
            let w = (p / 4.0).sqrt();
            QuantumChannel::from_kraus(vec![k0, x.scale(w), y.scale(w), z.scale(w)])
        }
        ChannelSpec::AmplitudeDamping { gamma } => {
            check_prob("g", gamma)?;
            let mut k0 = ComplexMatrix::identity(2);
            k0[(1, 1)] = Complex64::new((1.0 - gamma).sqrt(), 0.0);
            let mut k1 = ComplexMatrix::zeros(2, 2);
            k1[(0, 1)] = Complex64::new(gamma.sqrt(), 0.0);
            QuantumChannel::from_kraus(vec![k0, k1])
        }
        ChannelSpec::Random { dim, env, seed } => {
            dim_check("random", dim)?;
            dim_check("random", env)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            Ok(crate::random::random_channel(dim, env, &mut rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::entangled_input;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn plus_projector() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0))
    }

    fn bell() -> LabeledState {
        entangled_input(&[0.5, 0.5], 2).unwrap()
    }

    #[test]
    fn from_kraus_accepts_identity_and_phase_flip() {
        assert!(QuantumChannel::from_kraus(vec![ComplexMatrix::identity(2)]).is_ok());
        let ch = standard_channel(&ChannelSpec::PhaseFlip { p: 0.1 }).unwrap();
        assert_eq!(ch.kraus().len(), 2);
    }

    #[test]
    fn from_kraus_rejects_double_identity() {
        let err = QuantumChannel::from_kraus(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2),
        ])
        .unwrap_err();
        match err {
            ChannelError::CompletenessViolation { residual } => {
                assert!((residual - 1.0).abs() < 1e-12, "residual {residual}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn identity_dilation_fixes_env_sector() {
        let ch = QuantumChannel::identity(3);
        let d = ch.dilate();
        assert_eq!(d.env_dim, 1);
        assert!((&d.u - &ComplexMatrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn dilation_columns_stack_kraus_entries() {
        // U (|i⟩ ⊗ |0⟩) = Σ_l (K_l |i⟩) ⊗ |l⟩, entry (q·env + l, i·env).
        let ch = standard_channel(&ChannelSpec::PhaseFlip { p: 0.3 }).unwrap();
        let d = ch.dilate();
        for i in 0..2 {
            for (l, k) in ch.kraus().iter().enumerate() {
                for q in 0..2 {
                    let diff = (d.u[(q * d.env_dim + l, i * d.env_dim)] - k[(q, i)]).norm();
                    assert!(diff < 1e-12, "i={i} l={l} q={q}");
                }
            }
        }
    }

    #[test]
    fn dilation_reproduces_kraus_action() {
        let ch = standard_channel(&ChannelSpec::AmplitudeDamping { gamma: 0.3 }).unwrap();
        let d = ch.dilate();
        assert!(d.u.is_unitary(1e-9));
        let mut rng = StdRng::seed_from_u64(42);
        let env = LabeledState::pure(
            SubsystemLayout::new(&[("E", d.env_dim)]).unwrap(),
            d.env_init.clone(),
        )
        .unwrap();
        for _ in 0..20 {
            let rho = crate::random::random_density(2, 2, &mut rng);
            let sys = LabeledState::mixed(
                SubsystemLayout::new(&[("Q", 2)]).unwrap(),
                rho.clone(),
            )
            .unwrap();
            let joint = sys.tensor(&env).unwrap();
            let evolved = joint.apply_unitary_on(&d.u, &["Q", "E"]).unwrap();
            let traced = evolved.partial_trace(&["Q"]).unwrap().density_matrix();
            let direct = ch.apply(&rho).unwrap();
            assert!((&traced - &direct).max_abs() < 1e-9);
        }
    }

    #[test]
    fn dilated_phase_flip_half_dephases_plus() {
        let ch = standard_channel(&ChannelSpec::PhaseFlip { p: 0.5 }).unwrap();
        let d = ch.dilate();
        let amp = 1.0 / 2f64.sqrt();
        let sys = LabeledState::pure(
            SubsystemLayout::new(&[("Q", 2)]).unwrap(),
            vec![Complex64::new(amp, 0.0), Complex64::new(amp, 0.0)],
        )
        .unwrap();
        let env = LabeledState::pure(
            SubsystemLayout::new(&[("E", d.env_dim)]).unwrap(),
            d.env_init.clone(),
        )
        .unwrap();
        let evolved = sys
            .tensor(&env)
            .unwrap()
            .apply_unitary_on(&d.u, &["Q", "E"])
            .unwrap();
        let out = evolved.partial_trace(&["Q"]).unwrap().density_matrix();
        assert!((&out - &ComplexMatrix::from_real_diag(&[0.5, 0.5])).max_abs() < 1e-9);
    }

    #[test]
    fn apply_identity_and_phase_flip() {
        let mut rng = StdRng::seed_from_u64(1);
        let rho = crate::random::random_density(2, 2, &mut rng);
        let id = QuantumChannel::identity(2);
        assert!((&id.apply(&rho).unwrap() - &rho).max_abs() < 1e-14);

        let ch = standard_channel(&ChannelSpec::PhaseFlip { p: 0.5 }).unwrap();
        let out = ch.apply(&plus_projector()).unwrap();
        assert!((&out - &ComplexMatrix::from_real_diag(&[0.5, 0.5])).max_abs() < 1e-12);
    }

    #[test]
    fn full_amplitude_damping_is_absorbing() {
        let ch = standard_channel(&ChannelSpec::AmplitudeDamping { gamma: 1.0 }).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let rho = crate::random::random_density(2, 2, &mut rng);
        let out = ch.apply(&rho).unwrap();
        assert!((&out - &ComplexMatrix::from_real_diag(&[1.0, 0.0])).max_abs() < 1e-12);
        // Trace preserved.
        assert!((out.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let ch = QuantumChannel::identity(2);
        let rho = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!(matches!(
            ch.apply(&rho),
            Err(ChannelError::DimMismatch { .. })
        ));
    }

    #[test]
    fn evolve_tripartite_identity_keeps_input() {
        let ch = QuantumChannel::identity(2);
        let out = evolve_tripartite(&bell(), &ch.dilate()).unwrap();
        assert!(out.is_pure());
        let with_env = bell().tensor(&LabeledState::basis("E", 1, 0)).unwrap();
        let fid = out.overlap(&with_env).unwrap().norm();
        assert!((fid - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolve_tripartite_leaves_reference_untouched() {
        let ch = standard_channel(&ChannelSpec::PhaseFlip { p: 0.3 }).unwrap();
        let out = evolve_tripartite(&bell(), &ch.dilate()).unwrap();
        let rho_r = out.partial_trace(&["R"]).unwrap().density_matrix();
        assert!((&rho_r - &ComplexMatrix::from_real_diag(&[0.5, 0.5])).max_abs() < 1e-9);
        // Output is normalized pure.
        let v = out.vector().unwrap();
        assert!((crate::matkernel::vec_norm(v) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolve_tripartite_matches_kraus_prediction() {
        let ch = standard_channel(&ChannelSpec::AmplitudeDamping { gamma: 0.3 }).unwrap();
        let out = evolve_tripartite(&bell(), &ch.dilate()).unwrap();
        let rho_q = out.partial_trace(&["Q"]).unwrap().density_matrix();
        let predicted = ch
            .apply(&ComplexMatrix::from_real_diag(&[0.5, 0.5]))
            .unwrap();
        assert!((&rho_q - &predicted).max_abs() < 1e-9);
        let rho_rq = out.partial_trace(&["R", "Q"]).unwrap().density_matrix();
        assert!((rho_rq.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn depolarizing_p1_is_complete() {
        let ch = standard_channel(&ChannelSpec::Depolarizing { p: 1.0 }).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..5 {
            let rho = crate::random::random_density(2, 2, &mut rng);
            let out = ch.apply(&rho).unwrap();
            assert!((&out - &ComplexMatrix::from_real_diag(&[0.5, 0.5])).max_abs() < 1e-10);
        }
    }

    #[test]
    fn random_channel_is_reproducible() {
        let spec = ChannelSpec::Random {
            dim: 2,
            env: 3,
            seed: 7,
        };
        let a = standard_channel(&spec).unwrap();
        let b = standard_channel(&spec).unwrap();
        for (ka, kb) in a.kraus().iter().zip(b.kraus()) {
            assert!((ka - kb).max_abs() == 0.0);
        }
        assert_eq!(a.kraus().len(), 3);
    }

    #[test]
    fn spec_parsing_and_errors() {
        assert_eq!(
            ChannelSpec::parse("identity:d=2").unwrap(),
            ChannelSpec::Identity { dim: 2 }
        );
        assert_eq!(
            ChannelSpec::parse("phaseflip:p=0.1").unwrap(),
            ChannelSpec::PhaseFlip { p: 0.1 }
        );
        assert_eq!(
            ChannelSpec::parse("random:d=2,e=4,seed=7").unwrap(),
            ChannelSpec::Random {
                dim: 2,
                env: 4,
                seed: 7
            }
        );
        assert!(matches!(
            ChannelSpec::parse("squeeze:r=1"),
            Err(ChannelError::UnknownFamily(_))
        ));
        assert!(matches!(
            standard_channel(&ChannelSpec::PhaseFlip { p: 1.5 }),
            Err(ChannelError::ParamOutOfRange { .. })
        ));
    }

    #[test]
    fn compose_identity_is_neutral() {
        let mut rng = StdRng::seed_from_u64(4);
        let ch = crate::random::random_channel(2, 3, &mut rng);
        let composed = QuantumChannel::compose(&QuantumChannel::identity(2), &ch).unwrap();
        let rho = crate::random::random_density(2, 2, &mut rng);
        let a = ch.apply(&rho).unwrap();
        let b = composed.apply(&rho).unwrap();
        assert!((&a - &b).max_abs() < 1e-10);
    }

    #[test]
    fn compose_phase_flips_combines_parameters() {
        // Oracle: two phase flips compose to one with p + q − 2pq, checked
        // on |+⟩⟨+| where the off-diagonal shrinks by (1−2p)(1−2q).
        let p = 0.3;
        let q = 0.2;
        let a = standard_channel(&ChannelSpec::PhaseFlip { p }).unwrap();
        let b = standard_channel(&ChannelSpec::PhaseFlip { p: q }).unwrap();
        let composed = QuantumChannel::compose(&a, &b).unwrap();
        let effective = standard_channel(&ChannelSpec::PhaseFlip { p: p + q - 2.0 * p * q })
            .unwrap();
        let out_composed = composed.apply(&plus_projector()).unwrap();
        let out_effective = effective.apply(&plus_projector()).unwrap();
        assert!((&out_composed - &out_effective).max_abs() < 1e-12);
    }

    #[test]
    fn compose_with_full_damping_is_constant() {
        let damp = standard_channel(&ChannelSpec::AmplitudeDamping { gamma: 1.0 }).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let other = crate::random::random_channel(2, 2, &mut rng);
        let composed = QuantumChannel::compose(&damp, &other).unwrap();
        let rho = crate::random::random_density(2, 2, &mut rng);
        let out = composed.apply(&rho).unwrap();
        assert!((&out - &ComplexMatrix::from_real_diag(&[1.0, 0.0])).max_abs() < 1e-10);
    }

    #[test]
    fn apply_on_pure_state_matches_density_path() {
        let mut rng = StdRng::seed_from_u64(6);
        let ch = crate::random::random_channel(2, 3, &mut rng);
        let state = bell();
        let out = ch.apply_on(&state, &["Q"]).unwrap();
        // Against the embedded-Kraus density path.
        let rho = state.density_matrix();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for k in ch.kraus() {
            let full = crate::states::embed_operator(state.layout(), k, &["Q"]).unwrap();
            expected = &expected + &(&(&full * &rho) * &full.dagger());
        }
        assert!((&out.density_matrix() - &expected).max_abs() < 1e-10);
    }
}
