//! Permutation-with-phase gates on computational basis labels.

use serde::{Deserialize, Serialize};

use crate::layout::WireLayout;
use crate::error::{Result, SimError};

/// A gate that maps each basis label to exactly one basis label times a unit phase.
///
/// Classically controlled gates (`ClassicalZ`, `ClassicalXTilde`, and `Mcx` with a
/// `cell`) carry a memory-cell index instead of a decision; binding a circuit to
/// [`crate::circuits::ClassicalData`] turns them into concrete gates or drops them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    /// Qubit bit flip.
    X(usize),
    /// Qubit phase flip on |1>.
    Z(usize),
    /// Qutrit flip exchanging |0> and |1> and fixing the wait state.
    XTilde(usize),
    Swap(usize, usize),
    /// Swaps `a` and `b` when `control` holds `value`.
    CSwap { control: usize, value: u8, a: usize, b: usize },
    /// Flips `target` (X on qubits, X-tilde on qutrits) when `control` holds `value`.
    CNot { control: usize, value: u8, target: usize },
    ClassicalZ { wire: usize, cell: usize },
    ClassicalXTilde { wire: usize, cell: usize },
    /// Flips `target` when every control wire holds its listed value.
    Mcx { controls: Vec<(usize, u8)>, target: usize, cell: Option<usize> },
}

impl Gate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::Z(_) => "Z",
            Gate::XTilde(_) => "XTILDE",
            Gate::Swap(..) => "SWAP",
            Gate::CSwap { .. } => "CSWAP",
            Gate::CNot { .. } => "CNOT",
            Gate::ClassicalZ { .. } => "CLASSICAL_Z",
            Gate::ClassicalXTilde { .. } => "CLASSICAL_XTILDE",
            Gate::Mcx { .. } => "MCX",
        }
    }

    /// Wires touched by the gate, controls first.
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::X(w) | Gate::Z(w) | Gate::XTilde(w) => vec![*w],
            Gate::ClassicalZ { wire, .. } | Gate::ClassicalXTilde { wire, .. } => vec![*wire],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::CSwap { control, a, b, .. } => vec![*control, *a, *b],
            Gate::CNot { control, target, .. } => vec![*control, *target],
            Gate::Mcx { controls, target, .. } => {
                let mut w: Vec<usize> = controls.iter().map(|c| c.0).collect();
                w.push(*target);
                w
            }
        }
    }

    /// Memory cell consulted by a classically controlled gate.
    pub fn classical_cell(&self) -> Option<usize> {
        match self {
            Gate::ClassicalZ { cell, .. } | Gate::ClassicalXTilde { cell, .. } => Some(*cell),
            Gate::Mcx { cell, .. } => *cell,
            _ => None,
        }
    }

    /// Resolves a classically controlled gate against a data bit.
    ///
    /// Returns `None` when the gate disappears (bit is 0); other gates pass through.
    pub fn bind(&self, bit: impl Fn(usize) -> u8) -> Option<Gate> {
        match self {
            Gate::ClassicalZ { wire, cell } => (bit(*cell) == 1).then_some(Gate::Z(*wire)),
            Gate::ClassicalXTilde { wire, cell } => (bit(*cell) == 1).then_some(Gate::XTilde(*wire)),
            Gate::Mcx { controls, target, cell: Some(c) } => (bit(*c) == 1)
                .then(|| Gate::Mcx { controls: controls.clone(), target: *target, cell: None }),
            g => Some(g.clone()),
        }
    }

    /// Checks wire ranges, distinctness and dimension compatibility.
    pub fn validate(&self, layout: &WireLayout) -> Result<()> {
        let wires = self.wires();
        for (i, &w) in wires.iter().enumerate() {
            layout.check_wire(w)?;
            if wires[..i].contains(&w) {
                return Err(SimError::DuplicateWire { wire: w });
            }
        }
        let need = |w: usize, dim: u8| -> Result<()> {
            if layout.dim(w) == dim {
                Ok(())
            } else {
                Err(SimError::GateDimension { gate: self.kind_name(), wire: w, dim: layout.dim(w) })
            }
        };
        let control = |w: usize, value: u8| -> Result<()> {
            if value < layout.dim(w) {
                Ok(())
            } else {
                Err(SimError::ControlValue { wire: w, value, dim: layout.dim(w) })
            }
        };
        match self {
            Gate::X(w) | Gate::Z(w) | Gate::ClassicalZ { wire: w, .. } => need(*w, 2),
            Gate::XTilde(w) | Gate::ClassicalXTilde { wire: w, .. } => need(*w, 3),
            Gate::Swap(a, b) => {
                if layout.dim(*a) != layout.dim(*b) {
                    return Err(SimError::GateDimension { gate: "SWAP", wire: *b, dim: layout.dim(*b) });
                }
                Ok(())
            }
            Gate::CSwap { control: c, value, a, b } => {
                control(*c, *value)?;
                if layout.dim(*a) != layout.dim(*b) {
                    return Err(SimError::GateDimension { gate: "CSWAP", wire: *b, dim: layout.dim(*b) });
                }
                Ok(())
            }
            Gate::CNot { control: c, value, .. } => control(*c, *value),
            Gate::Mcx { controls, .. } => controls.iter().try_for_each(|&(w, v)| control(w, v)),
        }
    }

    /// Rewrites `label` in place and returns the phase picked up.
    ///
    /// The gate must already be validated and bound.
    #[inline]
    pub fn act(&self, label: &mut [u8], dims: &[u8]) -> Result<f64> {
        match *self {
            Gate::X(w) => label[w] ^= 1,
            Gate::Z(w) => {
                if label[w] == 1 {
                    return Ok(-1.0);
                }
            }
            Gate::XTilde(w) => label[w] = xtilde(label[w]),
            Gate::Swap(a, b) => label.swap(a, b),
            Gate::CSwap { control, value, a, b } => {
                if label[control] == value {
                    label.swap(a, b);
                }
            }
            Gate::CNot { control, value, target } => {
                if label[control] == value {
                    label[target] = flip(label[target], dims[target]);
                }
            }
            Gate::Mcx { ref controls, target, cell: None } => {
                if controls.iter().all(|&(w, v)| label[w] == v) {
                    label[target] = flip(label[target], dims[target]);
                }
            }
            Gate::ClassicalZ { cell, .. }
            | Gate::ClassicalXTilde { cell, .. }
            | Gate::Mcx { cell: Some(cell), .. } => return Err(SimError::UnboundClassicalGate { cell }),
        }
        Ok(1.0)
    }
}

/// X-tilde on an encoded qutrit value.
#[inline]
pub fn xtilde(v: u8) -> u8 {
    match v {
        1 => 2,
        2 => 1,
        other => other,
    }
}

/// Logical flip: X on qubits, X-tilde on qutrits.
#[inline]
pub fn flip(v: u8, dim: u8) -> u8 {
    if dim == 3 {
        xtilde(v)
    } else {
        v ^ 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_labels(dims: &[u8]) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for &d in dims {
            out = out
                .into_iter()
                .flat_map(|l| (0..d).map(move |v| {
                    let mut l2 = l.clone();
                    l2.push(v);
                    l2
                }))
                .collect();
        }
        out
    }

    fn sample_gates(dim: u8) -> Vec<Gate> {
        let mut g = vec![
            Gate::Swap(0, 1),
            Gate::CSwap { control: 0, value: 1, a: 1, b: 2 },
            Gate::CSwap { control: 2, value: dim - 1, a: 0, b: 1 },
            Gate::CNot { control: 0, value: dim - 1, target: 2 },
            Gate::Mcx { controls: vec![(0, 1), (1, 0)], target: 2, cell: None },
        ];
        if dim == 2 {
            g.extend([Gate::X(1), Gate::Z(2)]);
        } else {
            g.push(Gate::XTilde(1));
        }
        g
    }

    #[test]
    fn every_gate_is_a_phase_permutation_on_local_labels() {
        for dim in [2u8, 3] {
            let dims = vec![dim; 3];
            let labels = all_labels(&dims);
            for gate in sample_gates(dim) {
                let mut images = std::collections::HashSet::new();
                for l in &labels {
                    let mut out = l.clone();
                    let phase = gate.act(&mut out, &dims).unwrap();
                    assert_eq!(phase.abs(), 1.0);
                    assert!(out.iter().zip(&dims).all(|(v, d)| v < d));
                    images.insert(out.clone());
                    // Every gate in the set is an involution.
                    let mut back = out.clone();
                    gate.act(&mut back, &dims).unwrap();
                    assert_eq!(&back, l, "{gate:?} is not self-inverse");
                }
                assert_eq!(images.len(), labels.len(), "{gate:?} is not a bijection");
            }
        }
    }

    #[test]
    fn xtilde_fixes_wait_and_swaps_active_levels() {
        assert_eq!(xtilde(0), 0);
        assert_eq!(xtilde(1), 2);
        assert_eq!(xtilde(2), 1);
    }

    #[test]
    fn binding_classical_gates() {
        let bits = [0u8, 1];
        let bit = |c: usize| bits[c];
        assert_eq!(Gate::ClassicalZ { wire: 3, cell: 0 }.bind(bit), None);
        assert_eq!(Gate::ClassicalZ { wire: 3, cell: 1 }.bind(bit), Some(Gate::Z(3)));
        assert_eq!(Gate::ClassicalXTilde { wire: 2, cell: 1 }.bind(bit), Some(Gate::XTilde(2)));
        assert_eq!(Gate::Swap(0, 1).bind(bit), Some(Gate::Swap(0, 1)));
    }

    #[test]
    fn validation_rejects_bad_wires() {
        let l = WireLayout::flat(2, 2).unwrap();
        assert!(matches!(Gate::XTilde(0).validate(&l), Err(SimError::GateDimension { .. })));
        assert!(matches!(Gate::X(7).validate(&l), Err(SimError::WireOutOfRange { .. })));
        assert!(matches!(Gate::Swap(1, 1).validate(&l), Err(SimError::DuplicateWire { .. })));
        let q = WireLayout::flat(2, 3).unwrap();
        assert!(Gate::XTilde(0).validate(&q).is_ok());
        assert!(matches!(Gate::Z(0).validate(&q), Err(SimError::GateDimension { .. })));
    }
}
