//! Ansatz-evolution timings on synthetic hydrogen-chain circuits.
//!
//! A chain of `N/4` dimers is modelled in a bond-orbital basis: spatial
//! orbital `2d` is the occupied bonding orbital of dimer `d`, `2d + 1` its
//! antibonding partner. Excitations are kept when their orbitals lie within
//! a fixed span, so the gate count grows linearly with the chain.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_uccsd_with, UccsdAnsatz};
use crate::circuit::cancel_inverse_pairs;
use crate::error::{Error, Result};
use crate::mps::MpsState;

/// Orbital span of the kept excitations.
pub const CHAIN_SPAN: usize = 2;
/// Rotation angles are drawn uniformly from `[-ANGLE_RANGE, ANGLE_RANGE]`.
pub const ANGLE_RANGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_qubits: usize,
    pub seconds: f64,
    pub n_parameters: usize,
    pub n_two_qubit_gates: usize,
    pub max_bond_dim: usize,
    pub truncation_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn chain_ansatz(n_qubits: usize) -> Result<UccsdAnsatz> {
    if n_qubits == 0 || n_qubits % 4 != 0 {
        return Err(Error::Argument(format!(
            "hydrogen-chain circuits need a multiple of 4 qubits, got {n_qubits}"
        )));
    }
    let n_orbitals = n_qubits / 2;
    let occupied: Vec<usize> = (0..n_orbitals).step_by(2).collect();
    build_uccsd_with(n_orbitals, &occupied, Some(CHAIN_SPAN))
}

/// Best of `repeats` wall-clock timings of evolving the reference through
/// the ansatz at seeded random angles.
pub fn time_chain_circuit(n_qubits: usize, max_bond: usize, seed: u64, repeats: usize) -> Result<ScalingPoint> {
    let ansatz = chain_ansatz(n_qubits)?;
    let gates = cancel_inverse_pairs(&ansatz.ansatz_gates(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n_qubits as u64);
    let theta: Vec<f64> = (0..ansatz.parameter_count())
        .map(|_| rng.random_range(-ANGLE_RANGE..=ANGLE_RANGE))
        .collect();
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let mut s = MpsState::product_state(&ansatz.reference_bits, max_bond, 0.0)?;
        s.apply_gates(gates.iter(), &theta)?;
        best = best.min(start.elapsed().as_secs_f64());
        last = Some(s);
    }
    let s = last.expect("at least one repeat");
    Ok(ScalingPoint {
        n_qubits,
        seconds: best,
        n_parameters: ansatz.parameter_count(),
        n_two_qubit_gates: gates.iter().filter(|g| g.arity() == 2).count(),
        max_bond_dim: s.max_bond_dim(),
        truncation_error: s.truncation_error(),
    })
}

/// Ordinary least squares `y = slope x + intercept`; `None` below two
/// distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y[..n].iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

pub fn fit_points(points: &[ScalingPoint]) -> Option<LinearFit> {
    let x: Vec<f64> = points.iter().map(|p| p.n_qubits as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.seconds).collect();
    linear_fit(&x, &y)
}

pub fn scaling_csv(points: &[ScalingPoint]) -> String {
    let mut out = String::from("n_qubits,seconds,n_parameters,n_two_qubit_gates,max_bond_dim,truncation_error\n");
    for p in points {
        out.push_str(&format!(
            "{},{:.6e},{},{},{},{:.6e}\n",
            p.n_qubits, p.seconds, p.n_parameters, p.n_two_qubit_gates, p.max_bond_dim, p.truncation_error
        ));
    }
    out
}
