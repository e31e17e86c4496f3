//! Query fidelity against the ideal address-and-bus state.

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::{Result, SimError};
use crate::state::SparseState;

/// Hash index of an ideal address-and-bus state, reusable across trajectories.
#[derive(Debug, Clone)]
pub struct IdealIndex {
    width: usize,
    dims: Vec<u8>,
    map: FxHashMap<Vec<u8>, Complex64>,
}

impl IdealIndex {
    pub fn new(ideal: &SparseState) -> Self {
        IdealIndex {
            width: ideal.layout().wire_count(),
            dims: ideal.layout().wire_dims().to_vec(),
            map: ideal.terms().map(|(l, a)| (l.to_vec(), a)).collect(),
        }
    }

    /// `<psi| Tr_anc |phi><phi| |psi>` for a normalized `final_state`.
    ///
    /// Terms are grouped by the ancilla part of their label; each group contributes
    /// `|sum conj(psi(q)) phi(q, f)|^2`.
    pub fn fidelity(&self, final_state: &SparseState) -> Result<f64> {
        let layout = final_state.layout();
        if layout.query_width() != self.width || layout.wire_dims()[..self.width] != self.dims[..] {
            return Err(SimError::LayoutMismatch(format!(
                "ideal state covers {} wires, final state has query width {}",
                self.width,
                layout.query_width()
            )));
        }
        let q = self.width;
        let mut groups: FxHashMap<&[u8], Complex64> = FxHashMap::default();
        for (label, amp) in final_state.terms() {
            if let Some(psi) = self.map.get(&label[..q]) {
                *groups.entry(&label[q..]).or_default() += psi.conj() * amp;
            }
        }
        // Exceeding one is only possible through rounding.
        Ok(groups.values().map(|z| z.norm_sqr()).sum::<f64>().clamp(0.0, 1.0))
    }
}

/// Fidelity of `final_state` with `ideal`, tracing out every wire beyond the address and bus.
pub fn config_fidelity(final_state: &SparseState, ideal: &SparseState) -> Result<f64> {
    IdealIndex::new(ideal).fidelity(final_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::WireLayout;
    use std::sync::Arc;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn orthogonal_ancillas_decohere() {
        // (|0,0>|a> + |1,1>|b>)/sqrt2 against (|00> + |11>)/sqrt2 gives 1/2.
        let full = Arc::new(WireLayout::from_dims(1, vec![2, 2, 2]).unwrap());
        let q = Arc::new(WireLayout::from_dims(1, vec![2, 2]).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ideal = SparseState::new(q, vec![(vec![0, 0], c(h)), (vec![1, 1], c(h))]).unwrap();
        let split = SparseState::new(full.clone(), vec![(vec![0, 0, 0], c(h)), (vec![1, 1, 1], c(h))]).unwrap();
        let joint = SparseState::new(full, vec![(vec![0, 0, 1], c(h)), (vec![1, 1, 1], c(h))]).unwrap();
        assert!((config_fidelity(&split, &ideal).unwrap() - 0.5).abs() < 1e-12);
        assert!((config_fidelity(&joint, &ideal).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layout_mismatch_is_reported() {
        let full = Arc::new(WireLayout::from_dims(1, vec![3, 3, 3]).unwrap());
        let q = Arc::new(WireLayout::from_dims(1, vec![2, 2]).unwrap());
        let ideal = SparseState::new(q, vec![(vec![0, 0], c(1.0))]).unwrap();
        let s = SparseState::new(full, vec![(vec![1, 1, 0], c(1.0))]).unwrap();
        assert!(config_fidelity(&s, &ideal).is_err());
    }
}
