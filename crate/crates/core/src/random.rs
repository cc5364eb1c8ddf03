//! Seeded random sampling of states, unitaries and channels.
//!
//! Everything takes a caller-supplied [`Rng`], so reproducibility is a
//! matter of seeding. Sweeps and verification runs use `ChaCha12Rng` with a
//! documented stream-splitting rule; see the harness crate.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::QuantumChannel;
use crate::matkernel::{self, ComplexMatrix};
use crate::states::{LabeledState, SubsystemLayout};

/// Standard complex Gaussian entry (independent N(0,1) parts).
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-style random unitary: orthonormalized Gaussian columns.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    matkernel::orthonormalize_columns(&gaussian_matrix(dim, dim, rng))
}

/// Random normalized pure-state vector.
pub fn random_pure(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = matkernel::vec_norm(&v);
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random density operator of the given rank: `G G† / Tr(G G†)` with `G`
/// a `dim x rank` Gaussian matrix. Full rank when `rank == dim`.
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(rank >= 1 && rank <= dim);
    let g = gaussian_matrix(dim, rank, rng);
    let m = (&g * &g.dagger()).hermitize();
    let tr = m.trace().re;
    m.scale(1.0 / tr)
}

/// Random CPTP channel drawn by orthonormalizing Gaussian columns into an
/// isometry from the system into system ⊗ environment and reading off the
/// Kraus family.
pub fn random_channel(dim: usize, env_dim: usize, rng: &mut impl Rng) -> QuantumChannel {
    assert!(dim >= 1 && env_dim >= 1);
    let isometry = matkernel::orthonormalize_columns(&gaussian_matrix(dim * env_dim, dim, rng));
    // Isometry index convention (Q, E): row = q * env_dim + l.
    let kraus: Vec<ComplexMatrix> = (0..env_dim)
        .map(|l| ComplexMatrix::from_fn(dim, dim, |q, i| isometry[(q * env_dim + l, i)]))
        .collect();
    QuantumChannel::from_kraus(kraus).expect("isometry columns give a complete Kraus family")
}

/// Random entangled pure state on labels `(R, Q)` (a normalized Gaussian
/// vector, which is entangled with probability one).
pub fn random_entangled_pure(dim_r: usize, dim_q: usize, rng: &mut impl Rng) -> LabeledState {
    let layout = SubsystemLayout::new(&[("R", dim_r), ("Q", dim_q)]).expect("two labels");
    LabeledState::pure(layout, random_pure(dim_r * dim_q, rng)).expect("normalized")
}
