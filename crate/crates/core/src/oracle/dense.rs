//! Full state-vector simulation over the product basis of every wire.

use std::sync::Arc;

use num_complex::Complex64;

use crate::circuits::Circuit;
use crate::error::{Result, SimError};
use crate::layout::WireLayout;
use crate::oracle::gate_table::{GateTable, LocalOperator};
use crate::state::SparseState;

/// Largest Hilbert-space dimension a [`DenseState`] may have.
pub const DENSE_LIMIT: u128 = 1 << 22;

#[derive(Debug, Clone)]
pub struct DenseState {
    layout: Arc<WireLayout>,
    /// `strides[w]` is the index step of wire `w`; wire 0 is most significant.
    strides: Vec<usize>,
    pub amps: Vec<Complex64>,
}

fn guard(layout: &WireLayout) -> Result<usize> {
    let d = layout.hilbert_dim();
    if d > DENSE_LIMIT {
        return Err(SimError::Guard { what: "dense state dimension".into(), size: d, limit: DENSE_LIMIT });
    }
    Ok(d as usize)
}

impl DenseState {
    pub fn zeros(layout: Arc<WireLayout>) -> Result<Self> {
        let d = guard(&layout)?;
        let mut strides = vec![1usize; layout.wire_count()];
        for w in (0..layout.wire_count().saturating_sub(1)).rev() {
            strides[w] = strides[w + 1] * layout.dim(w + 1) as usize;
        }
        Ok(DenseState { layout, strides, amps: vec![Complex64::new(0.0, 0.0); d] })
    }

    pub fn from_sparse(state: &SparseState) -> Result<Self> {
        let mut out = Self::zeros(state.layout_arc().clone())?;
        for (label, amp) in state.terms() {
            let i = out.index(label);
            out.amps[i] += amp;
        }
        Ok(out)
    }

    pub fn layout(&self) -> &WireLayout {
        &self.layout
    }

    pub fn index(&self, label: &[u8]) -> usize {
        label.iter().zip(&self.strides).map(|(&v, &s)| v as usize * s).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest `|dense - sparse|` over all basis states.
    pub fn max_deviation(&self, sparse: &SparseState) -> Result<f64> {
        if sparse.layout().wire_dims() != self.layout.wire_dims() {
            return Err(SimError::LayoutMismatch("dense and sparse layouts differ".into()));
        }
        let mut other = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (label, amp) in sparse.terms() {
            other[self.index(label)] += amp;
        }
        Ok(self.amps.iter().zip(&other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Applies a local operator to the full amplitude array.
    pub fn apply(&mut self, op: &LocalOperator) {
        let local_offsets: Vec<usize> = (0..op.matrix.ncols())
            .map(|c| op.digits(c).iter().zip(&op.wires).map(|(&v, &w)| v * self.strides[w]).sum())
            .collect();
        let mut bases = vec![0usize];
        for w in 0..self.layout.wire_count() {
            if op.wires.contains(&w) {
                continue;
            }
            let d = self.layout.dim(w) as usize;
            let s = self.strides[w];
            bases = bases.iter().flat_map(|&b| (0..d).map(move |v| b + v * s)).collect();
        }
        let l = local_offsets.len();
        let mut input = vec![Complex64::new(0.0, 0.0); l];
        let mut output = vec![Complex64::new(0.0, 0.0); l];
        for &base in &bases {
            for (slot, off) in input.iter_mut().zip(&local_offsets) {
                *slot = self.amps[base + off];
            }
            output.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            for (c, col) in op.columns.iter().enumerate() {
                let x = input[c];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                for &(r, m) in col {
                    output[r] += m * x;
                }
            }
            for (o, off) in output.iter().zip(&local_offsets) {
                self.amps[base + off] = *o;
            }
        }
    }
}

/// Runs every gate of a bound circuit on a dense state using matrices from `table`.
pub fn dense_unitary_sim(circuit: &Circuit, initial: &DenseState, table: &GateTable) -> Result<DenseState> {
    if initial.layout().wire_dims() != circuit.layout.wire_dims() {
        return Err(SimError::LayoutMismatch("initial state does not match the circuit layout".into()));
    }
    let mut state = initial.clone();
    for block in &circuit.blocks {
        for gate in block.gates() {
            let op = table.operator(gate, &block.condition, &circuit.layout)?;
            state.apply(&op);
        }
    }
    Ok(state)
}
