use ndarray::Array2;

use super::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::tensor::C64;

/// Replaces parameter references by their numeric angles.
pub fn bind_parameters(gates: &[Gate], theta: &[f64]) -> Result<Vec<Gate>> {
    gates
        .iter()
        .map(|g| {
            Ok(match (g.param, &g.kind) {
                (None, _) => g.clone(),
                (Some(_), kind) => {
                    let a = g.angle(theta)?;
                    let kind = match kind {
                        GateKind::Rx(_) => GateKind::Rx(a),
                        GateKind::Ry(_) => GateKind::Ry(a),
                        _ => GateKind::Rz(a),
                    };
                    Gate {
                        kind,
                        qubits: g.qubits,
                        param: None,
                    }
                }
            })
        })
        .collect()
}

/// Makes every two-qubit gate act on neighbouring qubits.
///
/// For a gate on `(lo, hi)` with `hi - lo > 1`, the state of `lo` is carried
/// up to `hi - 1` by a SWAP chain, the gate is applied there, and the chain is
/// undone so the qubit mapping is the identity after every gate.
pub fn route_nearest_neighbour(gates: &[Gate]) -> Vec<Gate> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        if g.arity() == 1 {
            out.push(g.clone());
            continue;
        }
        let (lo, hi) = g.span();
        if hi - lo == 1 {
            out.push(g.clone());
            continue;
        }
        for q in lo..hi - 1 {
            out.push(Gate::swap(q, q + 1));
        }
        let mut moved = g.clone();
        for q in moved.qubits.iter_mut() {
            if *q == lo {
                *q = hi - 1;
            }
        }
        out.push(moved);
        for q in (lo..hi - 1).rev() {
            out.push(Gate::swap(q, q + 1));
        }
    }
    out
}

/// True when `b` undoes `a` exactly. Parametric gates never cancel.
fn cancels(a: &Gate, b: &Gate) -> bool {
    if a.param.is_some() || b.param.is_some() {
        return false;
    }
    let same = a.qubits() == b.qubits();
    let mirrored = a.arity() == 2 && a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0];
    match (&a.kind, &b.kind) {
        (GateKind::S, GateKind::Sdg) | (GateKind::Sdg, GateKind::S) => same,
        (GateKind::X, GateKind::X)
        | (GateKind::Y, GateKind::Y)
        | (GateKind::Z, GateKind::Z)
        | (GateKind::H, GateKind::H)
        | (GateKind::Cnot, GateKind::Cnot) => same,
        (GateKind::Cz, GateKind::Cz) | (GateKind::Swap, GateKind::Swap) => same || mirrored,
        _ => false,
    }
}

/// Removes pairs of mutually inverse fixed gates that meet with nothing on
/// their qubits in between, repeating as removals expose new pairs.
pub fn cancel_inverse_pairs(gates: &[Gate]) -> Vec<Gate> {
    let n = gates
        .iter()
        .flat_map(|g| g.qubits().iter().copied())
        .max()
        .map_or(0, |q| q + 1);
    let mut kept: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    // indices into `kept` of the live gates on each qubit, most recent last
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in gates {
        let qs = g.qubits();
        let top = wires[qs[0]].last().copied();
        let shared = top.is_some() && qs.iter().all(|&q| wires[q].last().copied() == top);
        if let Some(i) = top.filter(|_| shared) {
            let prev = kept[i].as_ref().expect("live gate");
            if prev.arity() == g.arity() && cancels(prev, g) {
                kept[i] = None;
                for &q in qs {
                    wires[q].pop();
                }
                continue;
            }
        }
        for &q in qs {
            wires[q].push(kept.len());
        }
        kept.push(Some(g.clone()));
    }
    kept.into_iter().flatten().collect()
}

fn kron2(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    Array2::from_shape_fn((4, 4), |(r, c)| a[[r >> 1, c >> 1]] * b[[r & 1, c & 1]])
}

fn identity2() -> Array2<C64> {
    Array2::eye(2)
}

/// Fuses a routed gate list into neighbouring U4 gates, with parameters
/// resolved from `theta`.
///
/// Single-qubit gates are held until the next two-qubit gate on their qubit
/// absorbs them; consecutive gates on the same pair are multiplied together.
/// Leftover single-qubit gates are absorbed into the last U4 on their qubit,
/// or padded with the identity on a neighbour.
pub fn fuse_gates(gates: &[Gate], n_qubits: usize, theta: &[f64]) -> Result<Vec<Gate>> {
    if n_qubits < 2 {
        return Err(Error::Argument("gate fusion needs at least two qubits".into()));
    }
    let mut pending: Vec<Option<Array2<C64>>> = vec![None; n_qubits];
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    let mut out: Vec<(usize, Array2<C64>)> = Vec::new();
    for g in gates {
        for &q in g.qubits() {
            if q >= n_qubits {
                return Err(Error::Index(format!("gate {g} touches qubit {q} of {n_qubits}")));
            }
        }
        if g.arity() == 1 {
            let q = g.qubits[0];
            let m = g.matrix(theta)?;
            pending[q] = Some(match pending[q].take() {
                Some(p) => m.dot(&p),
                None => m,
            });
            continue;
        }
        let (lo, hi) = g.span();
        if hi - lo != 1 {
            return Err(Error::RoutingRequired(g.qubits[0], g.qubits[1]));
        }
        let mut m = g.ascending_matrix(theta)?;
        if pending[lo].is_some() || pending[hi].is_some() {
            let a = pending[lo].take().unwrap_or_else(identity2);
            let b = pending[hi].take().unwrap_or_else(identity2);
            m = m.dot(&kron2(&a, &b));
        }
        match (last[lo], last[hi]) {
            (Some(i), Some(j)) if i == j => {
                out[i].1 = m.dot(&out[i].1);
            }
            _ => {
                out.push((lo, m));
                last[lo] = Some(out.len() - 1);
                last[hi] = Some(out.len() - 1);
            }
        }
    }
    let mut q = 0;
    while q < n_qubits {
        let Some(p) = pending[q].take() else {
            q += 1;
            continue;
        };
        if let Some(i) = last[q] {
            let lift = if out[i].0 == q {
                kron2(&p, &identity2())
            } else {
                kron2(&identity2(), &p)
            };
            out[i].1 = lift.dot(&out[i].1);
        } else if q + 1 < n_qubits {
            let right = match (last[q + 1], pending[q + 1].take()) {
                (None, Some(r)) => r,
                (Some(_), Some(r)) => {
                    pending[q + 1] = Some(r);
                    identity2()
                }
                (_, None) => identity2(),
            };
            out.push((q, kron2(&p, &right)));
        } else {
            out.push((q - 1, kron2(&identity2(), &p)));
        }
        q += 1;
    }
    Ok(out.into_iter().map(|(lo, m)| Gate::u4(lo, lo + 1, m)).collect())
}
