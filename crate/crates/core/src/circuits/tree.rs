//! Router-tree circuits: bucket brigade (two- and three-level routers, with the
//! standard or modified routing operation), fanout, and the double-query wrapper.
//!
//! Route-in schedule. Qubits enter the root one per block: address bit 0 (the most
//! significant) first, the bus last. A block is
//! `[inject] [routing at even levels] [routing at odd levels] [absorb]`; a routing
//! stage applies the routing operation to every router of the listed levels. Each
//! in-flight qubit therefore descends two levels per block, and address bit `j` is
//! swapped into the level-`j` routers as soon as it reaches their incident modes.
//! Route-out is the exact reverse.

use std::sync::Arc;

use crate::circuits::{Block, BusEncoding, Circuit, CopyVariant, NoisePolicy, RouterLevels, Variant};
use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::layout::WireLayout;

pub(crate) const MAX_TREE_DEPTH: usize = 12;

/// A router tree inside a layout, queried with the listed address wires.
pub(crate) struct Tree<'a> {
    pub layout: &'a WireLayout,
    pub depth: usize,
    /// Address wires routed into this tree, most significant first.
    pub addr: Vec<usize>,
    pub levels: RouterLevels,
    pub modified: bool,
}

impl<'a> Tree<'a> {
    /// Encoded router value that sends the incident qubit to `side`.
    fn direction(&self, side: usize) -> u8 {
        match self.levels {
            RouterLevels::Two => side as u8,
            RouterLevels::Three => side as u8 + 1,
        }
    }

    /// Two gate layers applying the routing operation at every router of `levels`.
    fn routing_layers(&self, levels: &[usize]) -> [Vec<Gate>; 2] {
        let (left_v, right_v) = (self.direction(0), self.direction(1));
        let mut first = Vec::new();
        let mut second = Vec::new();
        for &level in levels {
            for k in 0..1usize << level {
                let r = self.layout.router(level, k);
                let inc = self.layout.incident(level, k);
                let left = self.layout.output(level, k, 0);
                let right = self.layout.output(level, k, 1);
                if self.modified {
                    // Unconditionally hand the qubit to the left port, then move it right
                    // if the router says so.
                    first.push(Gate::Swap(inc, left));
                    second.push(Gate::CSwap { control: r, value: right_v, a: left, b: right });
                } else {
                    first.push(Gate::CSwap { control: r, value: left_v, a: inc, b: left });
                    second.push(Gate::CSwap { control: r, value: right_v, a: inc, b: right });
                }
            }
        }
        [first, second]
    }

    fn absorb_layer(&self, level: usize) -> Vec<Gate> {
        (0..1usize << level)
            .map(|k| Gate::Swap(self.layout.incident(level, k), self.layout.router(level, k)))
            .collect()
    }

    fn inject(&self, source: usize) -> Gate {
        Gate::Swap(source, self.layout.input_rail().expect("tree layout has an input rail"))
    }

    /// Moves the queued qubits down the tree; `absorb` marks qubits that stop inside a
    /// router (with the level they stop at) rather than at the bottom output modes.
    fn pipelined(&self, queue: &[(usize, Option<usize>)], mut prefix: Vec<Block>) -> Vec<Block> {
        struct Flight {
            pos: usize,
            target: usize,
            absorb: bool,
            done: bool,
        }
        let mut flights: Vec<Flight> = Vec::new();
        let mut next = 0usize;
        loop {
            let mut layers: Vec<Vec<Gate>> = Vec::new();
            if next < queue.len() {
                let (src, stop) = queue[next];
                layers.push(vec![self.inject(src)]);
                flights.push(Flight { pos: 0, target: stop.unwrap_or(self.depth), absorb: stop.is_some(), done: false });
                next += 1;
            }
            for parity in [0usize, 1] {
                let mut levels = Vec::new();
                for f in flights.iter_mut().filter(|f| !f.done) {
                    if f.pos < f.target && f.pos % 2 == parity {
                        levels.push(f.pos);
                        f.pos += 1;
                    }
                }
                if !levels.is_empty() {
                    layers.extend(self.routing_layers(&levels));
                }
            }
            for f in flights.iter_mut().filter(|f| !f.done) {
                if f.pos == f.target {
                    if f.absorb {
                        layers.push(self.absorb_layer(f.target));
                    }
                    f.done = true;
                }
            }
            prefix.push(Block::new(layers));
            if next == queue.len() && flights.iter().all(|f| f.done) {
                return prefix;
            }
        }
    }

    /// Bucket-brigade route-in: addresses are absorbed level by level, then the bus
    /// descends to the bottom output modes.
    pub fn bb_route_in(&self) -> Vec<Block> {
        let bus = self.layout.bus_wire();
        let mut queue: Vec<(usize, Option<usize>)> =
            self.addr.iter().enumerate().map(|(j, &w)| (w, Some(j))).collect();
        queue.push((bus, None));
        self.pipelined(&queue, Vec::new())
    }

    /// Fanout route-in: one broadcast block per level sets every router from its address
    /// bit, then the bus descends.
    pub fn fanout_route_in(&self) -> Vec<Block> {
        let blocks: Vec<Block> = (0..self.depth)
            .map(|level| {
                let control = self.addr[level];
                let value = self.layout.logical(control, 1);
                Block::new(
                    (0..1usize << level)
                        .map(|k| vec![Gate::CNot { control, value, target: self.layout.router(level, k) }])
                        .collect(),
                )
            })
            .collect();
        self.pipelined(&[(self.layout.bus_wire(), None)], blocks)
    }

    /// Classically controlled copy on every bottom output mode; cell `offset + 2k + s`.
    pub fn copy_block(&self, encoding: BusEncoding, offset: usize) -> Block {
        let bottom = self.depth - 1;
        let mut layer = Vec::new();
        for k in 0..1usize << bottom {
            for side in 0..2 {
                let wire = self.layout.output(bottom, k, side);
                let cell = offset + 2 * k + side;
                layer.push(copy_gate(encoding, wire, cell));
            }
        }
        Block::new(vec![layer])
    }
}

pub(crate) fn copy_gate(encoding: BusEncoding, wire: usize, cell: usize) -> Gate {
    match encoding {
        BusEncoding::Plus => Gate::ClassicalZ { wire, cell },
        BusEncoding::Zero => Gate::ClassicalXTilde { wire, cell },
    }
}

/// `route_in`, copy, then the inverse of `route_in`.
pub(crate) fn single_query(route_in: Vec<Block>, copy: Block) -> Vec<Block> {
    let back: Vec<Block> = route_in.iter().rev().map(Block::inverse).collect();
    let mut blocks = route_in;
    blocks.push(copy);
    blocks.extend(back);
    blocks
}

fn check_depth(n: usize) -> Result<()> {
    if (1..=MAX_TREE_DEPTH).contains(&n) {
        Ok(())
    } else {
        Err(SimError::InvalidParameter(format!("tree depth must be in 1..={MAX_TREE_DEPTH}, got {n}")))
    }
}

fn encoding_for(levels: RouterLevels) -> (BusEncoding, CopyVariant) {
    match levels {
        RouterLevels::Two => (BusEncoding::Plus, CopyVariant::PlusZ),
        RouterLevels::Three => (BusEncoding::Zero, CopyVariant::ZeroXTilde),
    }
}

fn scrambled(layout: &WireLayout) -> Vec<usize> {
    layout.input_rail().into_iter().chain(layout.router_wires()).chain(layout.output_wires()).collect()
}

/// Route-in blocks of a plain bucket-brigade tree of depth `n`.
pub fn route_in_blocks(n: usize, levels: RouterLevels, modified: bool) -> Result<Vec<Block>> {
    check_depth(n)?;
    let layout = WireLayout::tree(n, n, levels.dim(), 0)?;
    let tree = Tree { layout: &layout, depth: n, addr: (0..n).collect(), levels, modified };
    Ok(tree.bb_route_in())
}

/// Bucket-brigade query circuit.
///
/// `PlusZ` requires two-level routers and `ZeroXTilde` three-level routers;
/// `DoubleQuery` builds the arbitrary-initial-state wrapper.
pub fn build_bb_circuit(n: usize, levels: RouterLevels, modified: bool, copy_variant: CopyVariant) -> Result<Circuit> {
    check_depth(n)?;
    match (copy_variant, levels) {
        (CopyVariant::PlusZ, RouterLevels::Three) => {
            return Err(SimError::InvalidParameter("the |+>/Z copy needs two-level routers".into()))
        }
        (CopyVariant::ZeroXTilde, RouterLevels::Two) => {
            return Err(SimError::InvalidParameter("the |0>/X-tilde copy needs three-level routers".into()))
        }
        (CopyVariant::DoubleQuery, _) => return double_query(n, levels, modified),
        _ => {}
    }
    let (encoding, _) = encoding_for(levels);
    let layout = WireLayout::tree(n, n, levels.dim(), 0)?;
    let tree = Tree { layout: &layout, depth: n, addr: (0..n).collect(), levels, modified };
    let route_in = tree.bb_route_in();
    let copy_at = route_in.len();
    let blocks = single_query(route_in, tree.copy_block(encoding, 0));
    finish(layout, blocks, bb_variant(levels, modified), copy_variant, encoding, n, Some(copy_at), 0)
}

fn bb_variant(levels: RouterLevels, modified: bool) -> Variant {
    match (levels, modified) {
        (RouterLevels::Two, false) => Variant::Bb2,
        (RouterLevels::Three, false) => Variant::Bb3,
        (RouterLevels::Two, true) => Variant::Bb2Modified,
        (RouterLevels::Three, true) => Variant::Bb3Modified,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    layout: WireLayout,
    blocks: Vec<Block>,
    variant: Variant,
    copy_variant: CopyVariant,
    encoding: BusEncoding,
    n: usize,
    copy_block: Option<usize>,
    ancillas: usize,
) -> Result<Circuit> {
    let mut base = vec![0u8; layout.wire_count()];
    let mut plus = Vec::new();
    let bus = layout.bus_wire();
    let anc: Vec<usize> = layout.ancilla_wires().collect();
    debug_assert_eq!(anc.len(), ancillas);
    match encoding {
        BusEncoding::Plus => {
            plus.push(bus);
            plus.extend(&anc);
        }
        BusEncoding::Zero => {
            base[bus] = layout.logical(bus, 0);
            for &a in &anc {
                base[a] = layout.logical(a, 0);
            }
        }
    }
    let scrambled_wires = scrambled(&layout);
    let circuit = Circuit {
        layout: Arc::new(layout),
        blocks,
        noisy_wires: Vec::new(),
        variant,
        copy_variant,
        bus_encoding: encoding,
        n,
        m: 0,
        base_label: base,
        plus_wires: plus,
        scrambled_wires,
        tracks_branches: true,
        copy_block,
    }
    .with_noise_policy(NoisePolicy::Routers);
    circuit.validate()?;
    Ok(circuit)
}

/// Fanout query circuit with two-level routers and the |+>/Z copy.
pub fn build_fanout_circuit(n: usize) -> Result<Circuit> {
    check_depth(n)?;
    let layout = WireLayout::tree(n, n, 2, 0)?;
    let tree = Tree { layout: &layout, depth: n, addr: (0..n).collect(), levels: RouterLevels::Two, modified: false };
    let route_in = tree.fanout_route_in();
    let copy_at = route_in.len();
    let blocks = single_query(route_in, tree.copy_block(BusEncoding::Plus, 0));
    finish(layout, blocks, Variant::Fanout, CopyVariant::PlusZ, BusEncoding::Plus, n, Some(copy_at), 0)
}

/// Query twice around a copy into an ancilla; correct for arbitrary initial tree labels.
pub fn build_double_query_circuit(n: usize, levels: RouterLevels) -> Result<Circuit> {
    check_depth(n)?;
    double_query(n, levels, false)
}

fn double_query(n: usize, levels: RouterLevels, modified: bool) -> Result<Circuit> {
    let (encoding, _) = encoding_for(levels);
    let layout = WireLayout::tree(n, n, levels.dim(), 1)?;
    let tree = Tree { layout: &layout, depth: n, addr: (0..n).collect(), levels, modified };
    let route_in = tree.bb_route_in();
    let copy_at = route_in.len();
    let query = single_query(route_in, tree.copy_block(encoding, 0));
    let bus = layout.bus_wire();
    let anc = layout.ancilla_wires().start;
    let transfer = match encoding {
        // Phase kickback: the bus's |+>/|-> sign lands on the |+> ancilla.
        BusEncoding::Plus => Gate::CNot { control: anc, value: 1, target: bus },
        BusEncoding::Zero => Gate::CNot { control: bus, value: layout.logical(bus, 1), target: anc },
    };
    let mut blocks = query.clone();
    blocks.push(Block::new(vec![vec![transfer]]));
    blocks.extend(query);
    blocks.push(Block::new(vec![vec![Gate::Swap(anc, bus)]]));
    finish(layout, blocks, bb_variant(levels, modified), CopyVariant::DoubleQuery, encoding, n, Some(copy_at), 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bb3_depth_three_has_eleven_rounds() {
        let c = build_bb_circuit(3, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
        assert_eq!(c.t(), 11);
        assert_eq!(c.copy_block, Some(5));
    }

    #[test]
    fn route_in_length_matches_pipeline_formula() {
        for n in 1..=10 {
            let r = route_in_blocks(n, RouterLevels::Three, false).unwrap().len();
            assert_eq!(r, n + n.div_ceil(2), "n = {n}");
        }
    }

    #[test]
    fn blocks_have_at_most_two_routing_stages() {
        let c = build_bb_circuit(6, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
        for b in &c.blocks {
            let cswap_layers = b.layers.iter().filter(|l| l.iter().any(|g| matches!(g, Gate::CSwap { .. }))).count();
            assert!(cswap_layers <= 4);
        }
    }

    #[test]
    fn copy_variant_compatibility() {
        assert!(build_bb_circuit(2, RouterLevels::Three, false, CopyVariant::PlusZ).is_err());
        assert!(build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::ZeroXTilde).is_err());
        assert!(build_bb_circuit(0, RouterLevels::Two, false, CopyVariant::PlusZ).is_err());
        assert!(build_bb_circuit(13, RouterLevels::Two, false, CopyVariant::PlusZ).is_err());
    }

    #[test]
    fn uncompute_mirrors_compute() {
        let c = build_bb_circuit(4, RouterLevels::Two, true, CopyVariant::PlusZ).unwrap();
        let k = c.copy_block.unwrap();
        let len = c.blocks.len();
        assert_eq!(len, 2 * k + 1);
        for i in 0..k {
            assert_eq!(c.blocks[len - 1 - i], c.blocks[i].inverse());
        }
    }
}
