//! Explicit local matrices for every gate kind.
//!
//! Matrices are assembled from projectors and Kronecker products and do not reuse the
//! label-rewriting rules of the sparse engine, so the two can check each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::layout::WireLayout;

type Mat = DMatrix<Complex64>;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn projector(dim: usize, value: usize) -> Mat {
    let mut m = Mat::zeros(dim, dim);
    m[(value, value)] = one();
    m
}

fn identity(dim: usize) -> Mat {
    Mat::identity(dim, dim)
}

/// X on a qubit; on a qutrit the exchange of |0> and |1> (values 1 and 2) fixing the wait state.
fn flip_matrix(dim: usize) -> Mat {
    let mut m = Mat::zeros(dim, dim);
    if dim == 2 {
        m[(0, 1)] = one();
        m[(1, 0)] = one();
    } else {
        m[(0, 0)] = one();
        m[(1, 2)] = one();
        m[(2, 1)] = one();
    }
    m
}

fn z_matrix() -> Mat {
    let mut m = identity(2);
    m[(1, 1)] = -one();
    m
}

fn swap_matrix(dim: usize) -> Mat {
    let mut m = Mat::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(j * dim + i, i * dim + j)] = one();
        }
    }
    m
}

/// `P (x) U + (I - P) (x) I` for a projector `P` on the leading wires.
fn controlled(p: &Mat, u: &Mat) -> Mat {
    let id_c = identity(p.nrows());
    let id_t = identity(u.nrows());
    p.kronecker(u) + (id_c - p).kronecker(&id_t)
}

/// Dense operator on a list of wires; the first wire is the most significant local digit.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub wires: Vec<usize>,
    pub dims: Vec<usize>,
    pub matrix: Mat,
    /// Nonzero entries of each column as `(row, value)`.
    pub columns: Vec<Vec<(usize, Complex64)>>,
}

impl LocalOperator {
    pub fn new(wires: Vec<usize>, dims: Vec<usize>, matrix: Mat) -> Self {
        let columns = (0..matrix.ncols())
            .map(|c| {
                (0..matrix.nrows())
                    .filter(|&r| matrix[(r, c)].norm() > 0.0)
                    .map(|r| (r, matrix[(r, c)]))
                    .collect()
            })
            .collect();
        LocalOperator { wires, dims, matrix, columns }
    }

    /// Local index of the digits `values` (one per wire).
    pub fn local_index(&self, values: impl Iterator<Item = usize>) -> usize {
        values.zip(&self.dims).fold(0, |acc, (v, d)| acc * d + v)
    }

    /// Digits of local index `idx`, most significant first.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }
}

/// Source of gate matrices, optionally with one gate kind replaced by the identity.
#[derive(Debug, Clone, Default)]
pub struct GateTable {
    faulty_kind: Option<String>,
}

impl GateTable {
    pub fn standard() -> Self {
        GateTable { faulty_kind: None }
    }

    /// A table in which every gate of `kind` (as in [`Gate::kind_name`]) does nothing.
    pub fn with_fault(kind: &str) -> Self {
        GateTable { faulty_kind: Some(kind.to_string()) }
    }

    pub fn is_faulty(&self) -> bool {
        self.faulty_kind.is_some()
    }

    /// Matrix of `gate`, additionally controlled on every `(wire, value)` in `condition`.
    pub fn operator(&self, gate: &Gate, condition: &[(usize, u8)], layout: &WireLayout) -> Result<LocalOperator> {
        let d = |w: usize| layout.dim(w) as usize;
        let (wires, matrix): (Vec<usize>, Mat) = match gate {
            Gate::X(w) => (vec![*w], flip_matrix(2)),
            Gate::XTilde(w) => (vec![*w], flip_matrix(3)),
            Gate::Z(w) => (vec![*w], z_matrix()),
            Gate::Swap(a, b) => (vec![*a, *b], swap_matrix(d(*a))),
            Gate::CSwap { control, value, a, b } => {
                (vec![*control, *a, *b], controlled(&projector(d(*control), *value as usize), &swap_matrix(d(*a))))
            }
            Gate::CNot { control, value, target } => (
                vec![*control, *target],
                controlled(&projector(d(*control), *value as usize), &flip_matrix(d(*target))),
            ),
            Gate::Mcx { controls, target, cell: None } => {
                let mut p = Mat::identity(1, 1);
                for &(w, v) in controls {
                    p = p.kronecker(&projector(d(w), v as usize));
                }
                let mut wires: Vec<usize> = controls.iter().map(|c| c.0).collect();
                wires.push(*target);
                (wires, controlled(&p, &flip_matrix(d(*target))))
            }
            Gate::ClassicalZ { cell, .. } | Gate::ClassicalXTilde { cell, .. } | Gate::Mcx { cell: Some(cell), .. } => {
                return Err(SimError::UnboundClassicalGate { cell: *cell });
            }
        };
        let matrix = if self.faulty_kind.as_deref() == Some(gate.kind_name()) {
            identity(matrix.nrows())
        } else {
            matrix
        };
        let mut all_wires: Vec<usize> = condition.iter().map(|c| c.0).collect();
        let matrix = if condition.is_empty() {
            matrix
        } else {
            let mut p = Mat::identity(1, 1);
            for &(w, v) in condition {
                p = p.kronecker(&projector(d(w), v as usize));
            }
            controlled(&p, &matrix)
        };
        all_wires.extend(wires);
        let dims = all_wires.iter().map(|&w| d(w)).collect();
        Ok(LocalOperator::new(all_wires, dims, matrix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_unitary(m: &Mat) -> bool {
        let p = m.adjoint() * m;
        (p - identity(m.nrows())).iter().all(|z| z.norm() < 1e-14)
    }

    #[test]
    fn gate_matrices_are_unitary_permutations() {
        let layout = WireLayout::from_dims(1, vec![3, 3, 3, 3]).unwrap();
        let table = GateTable::standard();
        let gates = [
            Gate::XTilde(0),
            Gate::Swap(0, 1),
            Gate::CSwap { control: 0, value: 2, a: 1, b: 2 },
            Gate::CNot { control: 1, value: 1, target: 3 },
            Gate::Mcx { controls: vec![(0, 1), (1, 2)], target: 2, cell: None },
        ];
        for g in &gates {
            let op = table.operator(g, &[(3, 0)], &layout).unwrap();
            assert!(is_unitary(&op.matrix), "{g:?}");
            assert!(op.columns.iter().all(|c| c.len() == 1));
        }
    }

    #[test]
    fn cswap_moves_the_right_amplitudes() {
        let layout = WireLayout::from_dims(0, vec![2, 2, 2]).unwrap();
        let op = GateTable::standard().operator(&Gate::CSwap { control: 0, value: 1, a: 1, b: 2 }, &[], &layout).unwrap();
        // |1,1,0> -> |1,0,1>, |0,1,0> unchanged.
        let col = op.local_index([1, 1, 0].into_iter());
        assert_eq!(op.digits(op.columns[col][0].0), vec![1, 0, 1]);
        let col = op.local_index([0, 1, 0].into_iter());
        assert_eq!(op.digits(op.columns[col][0].0), vec![0, 1, 0]);
    }

    #[test]
    fn faulty_table_turns_gate_into_identity() {
        let layout = WireLayout::from_dims(0, vec![2, 2]).unwrap();
        let op = GateTable::with_fault("SWAP").operator(&Gate::Swap(0, 1), &[], &layout).unwrap();
        assert!((op.matrix - identity(4)).iter().all(|z| z.norm() == 0.0));
    }
}
