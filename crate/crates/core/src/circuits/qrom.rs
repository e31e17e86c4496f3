//! QROM and hybrid (QROM-over-QRAM) circuits.

use std::sync::Arc;

use crate::circuits::tree::{copy_gate, single_query, Tree, MAX_TREE_DEPTH};
use crate::circuits::{ceil_log2, Block, BusEncoding, Circuit, CopyVariant, HybridSub, NoisePolicy, RouterLevels, Variant};
use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::layout::WireLayout;

pub(crate) const MAX_QROM_WIDTH: usize = 8;

/// Encoded control pattern selecting value `j` on `wires` (most significant first).
fn pattern(layout: &WireLayout, wires: &[usize], j: usize) -> Vec<(usize, u8)> {
    let m = wires.len();
    wires
        .iter()
        .enumerate()
        .map(|(t, &w)| (w, layout.logical(w, ((j >> (m - 1 - t)) & 1) as u8)))
        .collect()
}

/// QROM: one multi-controlled flip per address pattern, each counting as
/// `ceil(log2 n) + 1` noise rounds.
pub fn build_qrom_circuit(n: usize) -> Result<Circuit> {
    if !(1..=MAX_QROM_WIDTH).contains(&n) {
        return Err(SimError::InvalidParameter(format!("QROM width must be in 1..={MAX_QROM_WIDTH}, got {n}")));
    }
    let layout = WireLayout::flat(n, 2)?;
    let addr: Vec<usize> = layout.address_wires().collect();
    let bus = layout.bus_wire();
    let rounds = ceil_log2(n) + 1;
    let blocks = (0..1usize << n)
        .map(|j| Block {
            layers: vec![vec![Gate::Mcx { controls: pattern(&layout, &addr, j), target: bus, cell: Some(j) }]],
            noise_rounds: rounds,
            condition: Vec::new(),
        })
        .collect();
    let circuit = Circuit {
        base_label: vec![0; layout.wire_count()],
        layout: Arc::new(layout),
        blocks,
        noisy_wires: Vec::new(),
        variant: Variant::Qrom,
        copy_variant: CopyVariant::ZeroXTilde,
        bus_encoding: BusEncoding::Zero,
        n,
        m: 0,
        plus_wires: Vec::new(),
        scrambled_wires: Vec::new(),
        tracks_branches: false,
        copy_block: None,
    }
    .with_noise_policy(NoisePolicy::Routers);
    circuit.validate()?;
    Ok(circuit)
}

/// Hybrid circuit: iterate over the `M = 2^m` values of the top `m` address bits and,
/// conditioned on each, query an `N/M`-cell QRAM of kind `sub` with the low bits.
///
/// With `m = n` the subtree is empty and each iteration flips (or phase-flips) the bus
/// directly, which is a QROM in the chosen bus encoding.
pub fn build_hybrid_circuit(n: usize, m: usize, sub: HybridSub) -> Result<Circuit> {
    if !(1..=MAX_TREE_DEPTH).contains(&n) {
        return Err(SimError::InvalidParameter(format!("address width must be in 1..={MAX_TREE_DEPTH}, got {n}")));
    }
    if m > n {
        return Err(SimError::InvalidParameter(format!("block exponent m = {m} exceeds n = {n}")));
    }
    let levels = match sub {
        HybridSub::Bb3 => RouterLevels::Three,
        HybridSub::Bb2 | HybridSub::Fanout => RouterLevels::Two,
    };
    let (encoding, copy_variant) = match levels {
        RouterLevels::Two => (BusEncoding::Plus, CopyVariant::PlusZ),
        RouterLevels::Three => (BusEncoding::Zero, CopyVariant::ZeroXTilde),
    };
    let depth = n - m;
    let layout = WireLayout::tree(n, depth, levels.dim(), 0)?;
    let top: Vec<usize> = (0..m).collect();
    let sub_query: Vec<Block>;
    let mut copy_block = None;
    if depth > 0 {
        let tree = Tree { layout: &layout, depth, addr: (m..n).collect(), levels, modified: false };
        let route_in = match sub {
            HybridSub::Fanout => tree.fanout_route_in(),
            _ => tree.bb_route_in(),
        };
        if m == 0 {
            copy_block = Some(route_in.len());
        }
        sub_query = single_query(route_in, tree.copy_block(encoding, 0));
    } else {
        sub_query = vec![Block::new(vec![vec![copy_gate(encoding, layout.bus_wire(), 0)]])];
    }
    let cells = 1usize << depth;
    let mut blocks = Vec::with_capacity(sub_query.len() << m);
    for j in 0..1usize << m {
        let condition = pattern(&layout, &top, j);
        for b in &sub_query {
            let layers = b
                .layers
                .iter()
                .map(|l| l.iter().map(|g| offset_cell(g, j * cells)).collect())
                .collect();
            blocks.push(Block { layers, noise_rounds: b.noise_rounds, condition: condition.clone() });
        }
    }
    let mut base = vec![0u8; layout.wire_count()];
    let bus = layout.bus_wire();
    let mut plus = Vec::new();
    match encoding {
        BusEncoding::Plus => plus.push(bus),
        BusEncoding::Zero => base[bus] = layout.logical(bus, 0),
    }
    let scrambled_wires = layout.input_rail().into_iter().chain(layout.router_wires()).chain(layout.output_wires()).collect();
    let circuit = Circuit {
        layout: Arc::new(layout),
        blocks,
        noisy_wires: Vec::new(),
        variant: Variant::Hybrid { sub, m },
        copy_variant,
        bus_encoding: encoding,
        n,
        m,
        base_label: base,
        plus_wires: plus,
        scrambled_wires,
        tracks_branches: false,
        copy_block,
    }
    .with_noise_policy(NoisePolicy::Routers);
    circuit.validate()?;
    Ok(circuit)
}

fn offset_cell(g: &Gate, offset: usize) -> Gate {
    match g {
        Gate::ClassicalZ { wire, cell } => Gate::ClassicalZ { wire: *wire, cell: cell + offset },
        Gate::ClassicalXTilde { wire, cell } => Gate::ClassicalXTilde { wire: *wire, cell: cell + offset },
        other => other.clone(),
    }
}
