//! Reversible (classical-permutation) circuits on a small register.
//!
//! Qubit 0 is the most significant bit of the basis index.

use crate::error::{invalid, Result};
use crate::ops::PermutationMap;

#[derive(Clone, Debug)]
pub enum Gate {
    X(usize),
    /// Flip `target` when every `(qubit, value)` control matches.
    ControlledX { controls: Vec<(usize, bool)>, target: usize },
}

fn bit(index: usize, qubits: usize, q: usize) -> bool {
    (index >> (qubits - 1 - q)) & 1 == 1
}

fn flip(index: usize, qubits: usize, q: usize) -> usize {
    index ^ (1 << (qubits - 1 - q))
}

/// The permutation realised by `gates`, applied first to last.
pub fn circuit_permutation(qubits: usize, gates: &[Gate]) -> Result<PermutationMap> {
    for g in gates {
        let touched: Vec<usize> = match g {
            Gate::X(q) => vec![*q],
            Gate::ControlledX { controls, target } => {
                let mut t: Vec<usize> = controls.iter().map(|c| c.0).collect();
                t.push(*target);
                t
            }
        };
        if touched.iter().any(|&q| q >= qubits) {
            return Err(invalid("gate", format!("qubit index out of range for {qubits} qubits")));
        }
    }
    let dim = 1usize << qubits;
    let image = (0..dim)
        .map(|mut i| {
            for g in gates {
                i = match g {
                    Gate::X(q) => flip(i, qubits, *q),
                    Gate::ControlledX { controls, target } => {
                        if controls.iter().all(|&(q, v)| bit(i, qubits, q) == v) {
                            flip(i, qubits, *target)
                        } else {
                            i
                        }
                    }
                };
            }
            i
        })
        .collect();
    PermutationMap::table(image)
}

/// Controls matching the `width`-bit register starting at `first` to `value`.
pub fn register_controls(first: usize, width: usize, value: usize) -> Vec<(usize, bool)> {
    (0..width)
        .map(|k| (first + k, (value >> (width - 1 - k)) & 1 == 1))
        .collect()
}
