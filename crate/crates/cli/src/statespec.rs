//! Input-state literals for the CLI and sweep configs.
//!
//! Accepted forms:
//!
//! - `bell` — the two-qubit maximally entangled state.
//! - `uniform-k` (e.g. `uniform-3`) — `k` equal Schmidt coefficients on an
//!   `R ⊗ Q` pair of dimension `k` each.
//! - `lambda:0.7,0.2,0.1[;dq=4]` — explicit Schmidt weights, `dim Q`
//!   defaulting to their count.
//! - `amps:dr=2,dq=2,v=0.707,0,0,0.707` — raw amplitudes in row-major
//!   `(R, Q)` order; each entry is `re` or `re:im`.

use num_complex::Complex64;

use qrecover_core::states::{entangled_input, LabeledState, SubsystemLayout};

use crate::HarnessError;

/// Parse a state literal and build the `(R, Q)` input state.
pub fn parse_state(spec: &str) -> Result<LabeledState, HarnessError> {
    let bad = |reason: &str| HarnessError::BadStateSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let spec = spec.trim();
    if spec == "bell" {
        return Ok(entangled_input(&[0.5, 0.5], 2)?);
    }
    if let Some(k) = spec.strip_prefix("uniform-") {
        let k: usize = k.parse().map_err(|_| bad("uniform-k needs an integer k"))?;
        if k == 0 {
            return Err(bad("uniform-0 is empty"));
        }
        let lambda = vec![1.0 / k as f64; k];
        return Ok(entangled_input(&lambda, k)?);
    }
    if let Some(rest) = spec.strip_prefix("lambda:") {
        let mut parts = rest.splitn(2, ';');
        let weights: Vec<f64> = parts
            .next()
            .unwrap_or("")
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("lambda weights must be numbers"))?;
        let dq = match parts.next() {
            Some(opt) => {
                let opt = opt.trim();
                let v = opt
                    .strip_prefix("dq=")
                    .ok_or_else(|| bad("expected `;dq=<n>`"))?;
                v.parse::<usize>().map_err(|_| bad("dq must be an integer"))?
            }
            None => weights.len(),
        };
        return Ok(entangled_input(&weights, dq)?);
    }
    if let Some(rest) = spec.strip_prefix("amps:") {
        let mut dr = None;
        let mut dq = None;
        let mut amps: Option<Vec<Complex64>> = None;
        for field in rest.splitn(3, ',') {
            let field = field.trim();
            if let Some(v) = field.strip_prefix("dr=") {
                dr = Some(v.parse::<usize>().map_err(|_| bad("dr must be an integer"))?);
            } else if let Some(v) = field.strip_prefix("dq=") {
                dq = Some(v.parse::<usize>().map_err(|_| bad("dq must be an integer"))?);
            } else if let Some(v) = field.strip_prefix("v=") {
                let parsed: Result<Vec<Complex64>, String> =
                    v.split(',').map(|e| parse_complex(e.trim())).collect();
                amps = Some(parsed.map_err(|reason| bad(&reason))?);
            } else {
                return Err(bad(&format!("unknown field `{field}`")));
            }
        }
        let dr = dr.ok_or_else(|| bad("missing dr="))?;
        let dq = dq.ok_or_else(|| bad("missing dq="))?;
        let mut v = amps.ok_or_else(|| bad("missing v="))?;
        if v.len() != dr * dq {
            return Err(bad(&format!(
                "expected {} amplitudes, got {}",
                dr * dq,
                v.len()
            )));
        }
        // Normalize caller-supplied amplitudes.
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(bad("zero state vector"));
        }
        for z in &mut v {
            *z /= norm;
        }
        let layout = SubsystemLayout::new(&[("R", dr), ("Q", dq)])?;
        return Ok(LabeledState::pure(layout, v)?);
    }
    Err(bad(
        "expected `bell`, `uniform-k`, `lambda:...` or `amps:...`",
    ))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let mut parts = s.splitn(2, ':');
    let re: f64 = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| format!("bad amplitude `{s}`"))?;
    let im: f64 = match parts.next() {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("bad amplitude `{s}`"))?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}
