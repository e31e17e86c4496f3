//! Initial states and ideal outputs of a query.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{BusEncoding, Circuit, ClassicalData};
use crate::error::{Result, SimError};
use crate::layout::WireLayout;
use crate::state::SparseState;

/// Initial contents of the tree wires (input rail, routers, output modes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TreeInit {
    /// Wait state (three-level) or |0> (two-level).
    #[default]
    Clean,
    /// Uniformly random basis label drawn from ChaCha8 seeded with `seed`.
    Random { seed: u64 },
}

/// Address superposition plus tree initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub address_amps: Vec<(usize, Complex64)>,
    pub tree_init: TreeInit,
}

impl Query {
    /// Equal-weight superposition over all `2^n` addresses.
    pub fn uniform(n: usize) -> Self {
        let big_n = 1usize << n;
        let a = Complex64::new(1.0 / (big_n as f64).sqrt(), 0.0);
        Query { address_amps: (0..big_n).map(|i| (i, a)).collect(), tree_init: TreeInit::Clean }
    }

    pub fn single(address: usize) -> Self {
        Query { address_amps: vec![(address, Complex64::new(1.0, 0.0))], tree_init: TreeInit::Clean }
    }

    pub fn with_tree_init(mut self, init: TreeInit) -> Self {
        self.tree_init = init;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        let big_n = 1usize << n;
        if let Some(&(i, _)) = self.address_amps.iter().find(|(i, _)| *i >= big_n) {
            return Err(SimError::InvalidParameter(format!("address {i} out of range for {big_n} cells")));
        }
        let norm: f64 = self.address_amps.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidParameter(format!("address amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(())
    }
}

fn address_values(layout: &WireLayout, n: usize, i: usize, label: &mut [u8]) {
    for (j, slot) in label.iter_mut().enumerate().take(n) {
        let bit = ((i >> (n - 1 - j)) & 1) as u8;
        *slot = layout.logical(j, bit);
    }
}

/// State entering the circuit: address superposition, bus, ancillas and tree wires.
pub fn initial_state(circuit: &Circuit, query: &Query) -> Result<SparseState> {
    query.check(circuit.n)?;
    let layout = &circuit.layout;
    let mut base = circuit.base_label.clone();
    if let TreeInit::Random { seed } = query.tree_init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &w in &circuit.scrambled_wires {
            base[w] = rng.gen_range(0..layout.dim(w));
        }
    }
    let k = circuit.plus_wires.len();
    let scale = (0.5f64).powf(k as f64 / 2.0);
    let mut terms = Vec::with_capacity(query.address_amps.len() << k);
    for &(i, alpha) in &query.address_amps {
        let mut label = base.clone();
        address_values(layout, circuit.n, i, &mut label);
        for combo in 0..1usize << k {
            let mut l = label.clone();
            for (t, &w) in circuit.plus_wires.iter().enumerate() {
                l[w] = layout.logical(w, ((combo >> t) & 1) as u8);
            }
            terms.push((l, alpha * scale));
        }
    }
    SparseState::new(layout.clone(), terms)
}

/// Layout of the address register plus bus of `layout`.
pub fn query_layout(layout: &WireLayout) -> Result<WireLayout> {
    let n = layout.address_len();
    WireLayout::from_dims(n, layout.wire_dims()[..n + 1].to_vec())
}

/// Ideal address-and-bus state: `sum_i alpha_i |i>|x_i>` in the circuit's bus encoding.
pub fn ideal_output(address_amps: &[(usize, Complex64)], data: &ClassicalData, circuit: &Circuit) -> Result<SparseState> {
    let query = Query { address_amps: address_amps.to_vec(), tree_init: TreeInit::Clean };
    query.check(circuit.n)?;
    if data.len() != circuit.big_n() {
        return Err(SimError::InvalidParameter(format!(
            "data has {} cells, circuit addresses {}",
            data.len(),
            circuit.big_n()
        )));
    }
    let sub = Arc::new(query_layout(&circuit.layout)?);
    let n = circuit.n;
    let bus = n;
    let mut terms = Vec::new();
    for &(i, alpha) in address_amps {
        let x = data.bits[i];
        let mut label = vec![0u8; n + 1];
        address_values(&sub, n, i, &mut label);
        match circuit.bus_encoding {
            BusEncoding::Zero => {
                label[bus] = sub.logical(bus, x);
                terms.push((label, alpha));
            }
            BusEncoding::Plus => {
                let h = alpha * std::f64::consts::FRAC_1_SQRT_2;
                let sign = if x == 1 { -1.0 } else { 1.0 };
                let mut l0 = label.clone();
                l0[bus] = sub.logical(bus, 0);
                label[bus] = sub.logical(bus, 1);
                terms.push((l0, h));
                terms.push((label, h * sign));
            }
        }
    }
    SparseState::new(sub, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_bb_circuit, CopyVariant, RouterLevels};

    #[test]
    fn ideal_single_address_encodings() {
        let data = ClassicalData::new(vec![0, 1, 0, 0]).unwrap();
        let bb3 = build_bb_circuit(2, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
        let s = ideal_output(&Query::single(1).address_amps, &data, &bb3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.label(0), &[1, 2, 2]);
        let bb2 = build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
        let s = ideal_output(&Query::single(1).address_amps, &data, &bb2).unwrap();
        assert_eq!(s.len(), 2);
        let minus = s.amplitude(&[0, 1, 1]);
        assert!((minus.re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn ideal_uniform_term_counts() {
        let data = ClassicalData::new(vec![0, 1, 1, 0]).unwrap();
        let bb3 = build_bb_circuit(2, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
        let bb2 = build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
        let q = Query::uniform(2);
        let a = ideal_output(&q.address_amps, &data, &bb3).unwrap();
        let b = ideal_output(&q.address_amps, &data, &bb2).unwrap();
        assert_eq!((a.len(), b.len()), (4, 8));
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12 && (b.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_query_is_rejected() {
        let data = ClassicalData::zeros(1);
        let c = build_bb_circuit(1, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
        let amps = vec![(0, Complex64::new(0.5, 0.0))];
        assert!(ideal_output(&amps, &data, &c).is_err());
    }
}
