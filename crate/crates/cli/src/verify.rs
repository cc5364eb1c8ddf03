//! Random-corpus verification of the inequality suite.
//!
//! Draws random density pairs and channels, evaluates every inequality the
//! measures module promises, and counts violations beyond slack together
//! with minimum margins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use qrecover_core::matkernel::ComplexMatrix;
use qrecover_core::measures::{self, RelativeEntropy};
use qrecover_core::random;

use crate::HarnessError;

const LN_2: f64 = std::f64::consts::LN_2;
/// Slack for the entropy-valued inequalities.
const ENTROPY_SLACK: f64 = 1e-9;
/// Slack for before/after monotonicity comparisons.
const MONO_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials < 1 {
            return Err(HarnessError::BadConfig("trials must be >= 1".into()));
        }
        if !(2..=16).contains(&self.max_dim) {
            return Err(HarnessError::BadConfig(
                "max_dim must be in 2..=16".into(),
            ));
        }
        Ok(())
    }
}

/// Violation count and minimum margin for one inequality.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckStat {
    pub checked: usize,
    pub violations: usize,
    /// Minimum of (lhs − rhs) over all finite evaluations; positive means
    /// the inequality held with room to spare.
    pub min_margin: f64,
}

impl CheckStat {
    fn new() -> Self {
        CheckStat {
            checked: 0,
            violations: 0,
            min_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64, slack: f64) {
        self.checked += 1;
        if margin.is_finite() {
            self.min_margin = self.min_margin.min(margin);
        }
        if margin < -slack {
            self.violations += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub quantum_pinsker: CheckStat,
    pub classical_pinsker: CheckStat,
    pub measurement_bound: CheckStat,
    pub fidelity_vs_trace: CheckStat,
    pub fidelity_vs_relent: CheckStat,
    pub mono_relent: CheckStat,
    pub mono_trace: CheckStat,
    pub mono_fidelity: CheckStat,
    pub finite_relent_cases: usize,
}

impl VerifySummary {
    pub fn total_violations(&self) -> usize {
        self.quantum_pinsker.violations
            + self.classical_pinsker.violations
            + self.measurement_bound.violations
            + self.fidelity_vs_trace.violations
            + self.fidelity_vs_relent.violations
            + self.mono_relent.violations
            + self.mono_trace.violations
            + self.mono_fidelity.violations
    }
}

impl std::fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "verified {} trials (dims 2..={}, seed {})",
            self.config.trials, self.config.max_dim, self.config.seed
        )?;
        writeln!(f, "  finite relative-entropy cases: {}", self.finite_relent_cases)?;
        let rows = [
            ("quantum Pinsker", &self.quantum_pinsker),
            ("classical Pinsker", &self.classical_pinsker),
            ("measurement bound", &self.measurement_bound),
            ("F >= 1 - D", &self.fidelity_vs_trace),
            ("F >= 1 - sqrt(relent)", &self.fidelity_vs_relent),
            ("monotone relent", &self.mono_relent),
            ("monotone trace dist", &self.mono_trace),
            ("monotone fidelity", &self.mono_fidelity),
        ];
        for (name, stat) in rows {
            writeln!(
                f,
                "  {name:<22} checked {:>7}  violations {:>3}  min margin {:+.3e}",
                stat.checked,
                stat.violations,
                if stat.min_margin.is_finite() {
                    stat.min_margin
                } else {
                    f64::NAN
                }
            )?;
        }
        write!(
            f,
            "result: {}",
            if self.total_violations() == 0 {
                "PASS"
            } else {
                "FAIL"
            }
        )
    }
}

struct PairChecks<'a> {
    summary: &'a mut VerifySummary,
}

impl PairChecks<'_> {
    fn run(
        &mut self,
        rho: &ComplexMatrix,
        sigma: &ComplexMatrix,
        ch: &qrecover_core::channels::QuantumChannel,
    ) -> Result<(), HarnessError> {
        let d = measures::trace_distance(rho, sigma)?;
        let fid = measures::fidelity(rho, sigma)?;
        let re = measures::relative_entropy(rho, sigma)?;

        self.summary
            .fidelity_vs_trace
            .record(fid - (1.0 - d), ENTROPY_SLACK);

        if let Some(re) = re.finite() {
            self.summary.finite_relent_cases += 1;
            self.summary
                .quantum_pinsker
                .record(re - (2.0 / LN_2) * d * d, ENTROPY_SLACK);
            self.summary
                .fidelity_vs_relent
                .record(fid - (1.0 - re.max(0.0).sqrt()), ENTROPY_SLACK);
        }

        let split = measures::helstrom_split(rho, sigma)?;
        let classical = measures::classical_relative_entropy(&split.p, &split.q)?;
        if let Some(c) = classical.finite() {
            let l1 = split.l1_difference();
            self.summary
                .classical_pinsker
                .record(c - l1 * l1 / (2.0 * LN_2), ENTROPY_SLACK);
        }
        // Measurement statistics carry at most the quantum relative entropy.
        let margin = match (re, classical) {
            (RelativeEntropy::Infinite, _) => f64::INFINITY,
            (RelativeEntropy::Finite(q), RelativeEntropy::Finite(c)) => q - c,
            (RelativeEntropy::Finite(_), RelativeEntropy::Infinite) => f64::NEG_INFINITY,
        };
        self.summary.measurement_bound.record(margin, ENTROPY_SLACK);

        let mono = measures::monotonicity_check(ch, rho, sigma)?;
        let relent_margin = match (mono.relent_before, mono.relent_after) {
            (RelativeEntropy::Infinite, _) => f64::INFINITY,
            (RelativeEntropy::Finite(b), RelativeEntropy::Finite(a)) => b - a,
            (RelativeEntropy::Finite(_), RelativeEntropy::Infinite) => f64::NEG_INFINITY,
        };
        self.summary.mono_relent.record(relent_margin, MONO_SLACK);
        self.summary
            .mono_trace
            .record(mono.trace_dist_before - mono.trace_dist_after, MONO_SLACK);
        self.summary
            .mono_fidelity
            .record(mono.fidelity_after - mono.fidelity_before, MONO_SLACK);
        Ok(())
    }
}

/// Run the verification corpus.
pub fn verify_inequalities(cfg: VerifyConfig) -> Result<VerifySummary, HarnessError> {
    cfg.validate()?;
    let mut summary = VerifySummary {
        config: cfg,
        quantum_pinsker: CheckStat::new(),
        classical_pinsker: CheckStat::new(),
        measurement_bound: CheckStat::new(),
        fidelity_vs_trace: CheckStat::new(),
        fidelity_vs_relent: CheckStat::new(),
        mono_relent: CheckStat::new(),
        mono_trace: CheckStat::new(),
        mono_fidelity: CheckStat::new(),
        finite_relent_cases: 0,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    for trial in 0..cfg.trials {
        let dim = rng.gen_range(2..=cfg.max_dim);
        let rho = random::random_density(dim, dim, &mut rng);
        // Every few trials draw a rank-deficient second state so the
        // infinite relative-entropy branch is exercised too.
        let sigma = if trial % 5 == 4 {
            let rank = rng.gen_range(1..=dim);
            random::random_density(dim, rank, &mut rng)
        } else {
            random::random_density(dim, dim, &mut rng)
        };
        let env = rng.gen_range(1..=3);
        let ch = random::random_channel(dim, env, &mut rng);
        PairChecks {
            summary: &mut summary,
        }
        .run(&rho, &sigma, &ch)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_pair_satisfies_everything_trivially() {
        let mut summary = VerifySummary {
            config: VerifyConfig {
                trials: 1,
                max_dim: 2,
                seed: 0,
            },
            quantum_pinsker: CheckStat::new(),
            classical_pinsker: CheckStat::new(),
            measurement_bound: CheckStat::new(),
            fidelity_vs_trace: CheckStat::new(),
            fidelity_vs_relent: CheckStat::new(),
            mono_relent: CheckStat::new(),
            mono_trace: CheckStat::new(),
            mono_fidelity: CheckStat::new(),
            finite_relent_cases: 0,
        };
        let rho = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        let ch = qrecover_core::channels::QuantumChannel::identity(2);
        PairChecks {
            summary: &mut summary,
        }
        .run(&rho, &rho, &ch)
        .unwrap();
        assert_eq!(summary.total_violations(), 0);
    }

    #[test]
    fn small_corpus_has_zero_violations() {
        let summary = verify_inequalities(VerifyConfig {
            trials: 300,
            max_dim: 6,
            seed: 42,
        })
        .unwrap();
        assert_eq!(summary.total_violations(), 0, "{summary}");
        assert!(summary.finite_relent_cases > 0);
        assert_eq!(summary.quantum_pinsker.checked, summary.finite_relent_cases);
    }

    #[test]
    fn rerun_with_same_seed_is_identical() {
        let cfg = VerifyConfig {
            trials: 50,
            max_dim: 4,
            seed: 9,
        };
        let a = serde_json::to_string(&verify_inequalities(cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_inequalities(cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_bounds_checked() {
        assert!(verify_inequalities(VerifyConfig {
            trials: 0,
            max_dim: 4,
            seed: 0
        })
        .is_err());
        assert!(verify_inequalities(VerifyConfig {
            trials: 1,
            max_dim: 20,
            seed: 0
        })
        .is_err());
    }
}
