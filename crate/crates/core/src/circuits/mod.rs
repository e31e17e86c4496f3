//! Timed, noise-annotated QRAM circuits.
//!
//! Circuits are built independently of the memory contents: the copy step uses
//! classically controlled gates that name a memory cell. [`Circuit::bind`] resolves them
//! against a [`ClassicalData`] before simulation.

mod query;
mod qrom;
mod tree;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::layout::WireLayout;

pub use query::{ideal_output, initial_state, query_layout, Query, TreeInit};
pub use qrom::{build_hybrid_circuit, build_qrom_circuit};
pub use tree::{build_bb_circuit, build_double_query_circuit, build_fanout_circuit, route_in_blocks};

/// Router flavour of a tree circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouterLevels {
    /// Qubit routers, always active.
    Two,
    /// Qutrit routers with a wait state.
    Three,
}

impl RouterLevels {
    pub fn dim(self) -> u8 {
        match self {
            RouterLevels::Two => 2,
            RouterLevels::Three => 3,
        }
    }
}

/// QRAM size used inside each hybrid iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HybridSub {
    Fanout,
    Bb2,
    Bb3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Variant {
    Fanout,
    Bb3,
    Bb2,
    Bb2Modified,
    Bb3Modified,
    Qrom,
    Hybrid { sub: HybridSub, m: usize },
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Fanout => "fanout".into(),
            Variant::Bb3 => "bb3".into(),
            Variant::Bb2 => "bb2".into(),
            Variant::Bb2Modified => "bb2_modified".into(),
            Variant::Bb3Modified => "bb3_modified".into(),
            Variant::Qrom => "qrom".into(),
            Variant::Hybrid { sub, .. } => format!(
                "hybrid_{}",
                match sub {
                    HybridSub::Fanout => "fanout",
                    HybridSub::Bb2 => "bb2",
                    HybridSub::Bb3 => "bb3",
                }
            ),
        }
    }
}

/// How data reaches the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyVariant {
    /// Bus starts in |+>, classically controlled Z on the bottom outputs.
    PlusZ,
    /// Bus starts in |0>, classically controlled flip on the bottom outputs.
    ZeroXTilde,
    /// Query, copy the bus to an ancilla, query again, swap the ancilla back.
    DoubleQuery,
}

/// Basis in which the bus carries the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusEncoding {
    /// Answer x encoded as (|0> + (-1)^x |1>)/sqrt(2).
    Plus,
    /// Answer x encoded as |x>.
    Zero,
}

/// Which wires the error channel hits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePolicy {
    /// Router internal wires (plus address and bus for QROM and hybrids).
    #[default]
    Routers,
    /// Additionally the router output modes and the input rail.
    RoutersAndModes,
}

/// Gates applied during one time step, followed by `noise_rounds` applications of the
/// error channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Gate layers in order; gates within a layer act on disjoint wires.
    pub layers: Vec<Vec<Gate>>,
    pub noise_rounds: u32,
    /// The block only acts on terms where every `(wire, value)` holds.
    pub condition: Vec<(usize, u8)>,
}

impl Block {
    pub fn new(layers: Vec<Vec<Gate>>) -> Self {
        Block { layers: layers.into_iter().filter(|l| !l.is_empty()).collect(), noise_rounds: 1, condition: Vec::new() }
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    /// Same block with layers in reverse order; every gate here is an involution.
    pub fn inverse(&self) -> Block {
        Block { layers: self.layers.iter().rev().cloned().collect(), ..self.clone() }
    }

    pub fn is_noise_round(&self) -> bool {
        self.noise_rounds > 0
    }
}

/// A single-bit-per-cell classical memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalData {
    pub bits: Vec<u8>,
    pub seed: Option<u64>,
}

impl ClassicalData {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if !bits.len().is_power_of_two() {
            return Err(SimError::InvalidParameter(format!("data length {} is not a power of two", bits.len())));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(SimError::InvalidParameter("data bits must be 0 or 1".into()));
        }
        Ok(ClassicalData { bits, seed: None })
    }

    /// `2^n` fair bits from ChaCha8 seeded with `seed`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..1usize << n).map(|_| rng.gen_range(0..2u8)).collect();
        ClassicalData { bits, seed: Some(seed) }
    }

    pub fn zeros(n: usize) -> Self {
        ClassicalData { bits: vec![0; 1 << n], seed: None }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// A QRAM query circuit.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub layout: Arc<WireLayout>,
    pub blocks: Vec<Block>,
    pub noisy_wires: Vec<usize>,
    pub variant: Variant,
    pub copy_variant: CopyVariant,
    pub bus_encoding: BusEncoding,
    /// Address width.
    pub n: usize,
    /// Hybrid block exponent (0 for plain circuits).
    pub m: usize,
    /// Initial value of every wire except the address; `plus_wires` override it with |+>.
    pub base_label: Vec<u8>,
    pub plus_wires: Vec<usize>,
    /// Wires whose initial value may be arbitrary (double-query robustness runs).
    pub scrambled_wires: Vec<usize>,
    /// Router-wire noise is attributed to branches for the good-branch weight.
    pub tracks_branches: bool,
    /// Index of the first block after route-in, if the circuit has a single copy step.
    pub copy_block: Option<usize>,
}

/// JSON-friendly description of a circuit's size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub variant: String,
    pub copy_variant: CopyVariant,
    pub n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "T")]
    pub t: u32,
    pub blocks: usize,
    pub wire_count: usize,
    pub wires_per_register: BTreeMap<String, usize>,
    pub noisy_wires: usize,
    pub gate_counts: BTreeMap<String, usize>,
}

impl Circuit {
    /// Number of noise rounds.
    pub fn t(&self) -> u32 {
        self.blocks.iter().map(|b| b.noise_rounds).sum()
    }

    pub fn big_n(&self) -> usize {
        1 << self.n
    }

    pub fn gate_count(&self) -> usize {
        self.blocks.iter().map(|b| b.gates().count()).sum()
    }

    /// Replaces classically controlled gates with their data-dependent resolution.
    pub fn bind(&self, data: &ClassicalData) -> Result<Circuit> {
        if data.len() != self.big_n() {
            return Err(SimError::InvalidParameter(format!(
                "data has {} cells, circuit addresses {}",
                data.len(),
                self.big_n()
            )));
        }
        let bit = |c: usize| data.bits[c];
        let blocks = self
            .blocks
            .iter()
            .map(|b| Block {
                layers: b
                    .layers
                    .iter()
                    .map(|l| l.iter().filter_map(|g| g.bind(bit)).collect::<Vec<_>>())
                    .filter(|l| !l.is_empty())
                    .collect(),
                ..b.clone()
            })
            .collect();
        Ok(Circuit { blocks, ..self.clone() })
    }

    pub fn is_bound(&self) -> bool {
        self.blocks.iter().flat_map(|b| b.gates()).all(|g| g.classical_cell().is_none())
    }

    /// Checks gate validity, layer disjointness and that conditions stay untouched.
    pub fn validate(&self) -> Result<()> {
        let layout = &*self.layout;
        for block in &self.blocks {
            let cond: HashSet<usize> = block.condition.iter().map(|c| c.0).collect();
            for &(w, v) in &block.condition {
                layout.check_wire(w)?;
                if v >= layout.dim(w) {
                    return Err(SimError::ControlValue { wire: w, value: v, dim: layout.dim(w) });
                }
            }
            for layer in &block.layers {
                let mut used = HashSet::new();
                for gate in layer {
                    gate.validate(layout)?;
                    for w in gate.wires() {
                        if !used.insert(w) || cond.contains(&w) {
                            return Err(SimError::LayerOverlap { wire: w });
                        }
                    }
                }
            }
        }
        for &w in &self.noisy_wires {
            layout.check_wire(w)?;
        }
        layout.validate_label(&self.base_label)?;
        Ok(())
    }

    /// Recomputes the noisy wire set under `policy`.
    pub fn with_noise_policy(mut self, policy: NoisePolicy) -> Circuit {
        let l = &self.layout;
        let mut wires: Vec<usize> = Vec::new();
        let whole_query = matches!(self.variant, Variant::Qrom | Variant::Hybrid { .. });
        if whole_query {
            wires.extend(l.address_wires());
            wires.push(l.bus_wire());
        }
        wires.extend(l.router_wires());
        if policy == NoisePolicy::RoutersAndModes {
            wires.extend(l.input_rail());
            wires.extend(l.output_wires());
        }
        wires.sort_unstable();
        wires.dedup();
        self.noisy_wires = wires;
        self
    }

    pub fn summary(&self) -> CircuitSummary {
        let mut gate_counts = BTreeMap::new();
        for g in self.blocks.iter().flat_map(|b| b.gates()) {
            *gate_counts.entry(g.kind_name().to_string()).or_insert(0) += 1;
        }
        CircuitSummary {
            variant: self.variant.name(),
            copy_variant: self.copy_variant,
            n: self.n,
            big_m: 1 << self.m,
            t: self.t(),
            blocks: self.blocks.len(),
            wire_count: self.layout.wire_count(),
            wires_per_register: self
                .layout
                .registers()
                .iter()
                .map(|r| (r.kind.name().to_string(), r.len))
                .collect(),
            noisy_wires: self.noisy_wires.len(),
            gate_counts,
        }
    }
}

/// `ceil(log2(x))` for `x >= 1`.
pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_generation_is_deterministic() {
        assert_eq!(ClassicalData::random(5, 9), ClassicalData::random(5, 9));
        assert_ne!(ClassicalData::random(5, 9).bits, ClassicalData::random(5, 10).bits);
        assert_eq!(ClassicalData::random(0, 1).len(), 1);
    }

    #[test]
    fn data_validation() {
        assert!(ClassicalData::new(vec![0, 1, 1]).is_err());
        assert!(ClassicalData::new(vec![0, 2]).is_err());
        assert!(ClassicalData::new(vec![0, 1, 1, 0]).is_ok());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }
}
