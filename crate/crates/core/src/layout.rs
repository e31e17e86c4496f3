//! Wire layouts: per-wire local dimensions, named registers and the router tree index.
//!
//! Wires are ordered so that the address register and the bus always come first.
//! Everything after them is ancilla, which lets fidelity code split a label into the
//! query part and the traced-out part with a single slice.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Local value of the wait state on a qutrit wire.
pub const WAIT: u8 = 0;

/// Which registers a layout can contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterKind {
    Address,
    Bus,
    InputRail,
    RouterInternal,
    RouterOutput,
    Ancilla,
}

impl RegisterKind {
    pub fn name(self) -> &'static str {
        match self {
            RegisterKind::Address => "address",
            RegisterKind::Bus => "bus",
            RegisterKind::InputRail => "input_rail",
            RegisterKind::RouterInternal => "router_internal",
            RegisterKind::RouterOutput => "router_output",
            RegisterKind::Ancilla => "ancilla",
        }
    }
}

/// A contiguous run of wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub kind: RegisterKind,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn wires(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Wire dimensions and register structure of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireLayout {
    wire_dims: Vec<u8>,
    registers: Vec<Register>,
    tree_depth: Option<usize>,
}

impl WireLayout {
    /// Layout of a router tree of depth `tree_depth` serving `address_len` address wires.
    ///
    /// `tree_depth` may be smaller than `address_len` (hybrid circuits query a subtree
    /// with the low address bits). A depth of zero yields a layout without tree wires.
    pub fn tree(address_len: usize, tree_depth: usize, dim: u8, ancillas: usize) -> Result<Self> {
        check_dim(dim)?;
        if tree_depth > address_len {
            return Err(SimError::InvalidParameter(format!(
                "tree depth {tree_depth} exceeds address length {address_len}"
            )));
        }
        let mut regs = Vec::new();
        let mut next = 0usize;
        let mut push = |kind, len: usize| {
            if len > 0 {
                regs.push(Register { kind, start: next, len });
                next += len;
            }
        };
        push(RegisterKind::Address, address_len);
        push(RegisterKind::Bus, 1);
        if tree_depth > 0 {
            let routers = (1usize << tree_depth) - 1;
            push(RegisterKind::InputRail, 1);
            push(RegisterKind::RouterInternal, routers);
            push(RegisterKind::RouterOutput, 2 * routers);
        }
        push(RegisterKind::Ancilla, ancillas);
        Ok(WireLayout {
            wire_dims: vec![dim; next],
            registers: regs,
            tree_depth: (tree_depth > 0).then_some(tree_depth),
        })
    }

    /// Address register plus bus, no tree (QROM).
    pub fn flat(address_len: usize, dim: u8) -> Result<Self> {
        Self::tree(address_len, 0, dim, 0)
    }

    /// Arbitrary layout with a single ancilla register; used by tests and oracles.
    pub fn from_dims(address_len: usize, wire_dims: Vec<u8>) -> Result<Self> {
        for &d in &wire_dims {
            check_dim(d)?;
        }
        if wire_dims.len() < address_len + 1 {
            return Err(SimError::InvalidParameter("layout needs address wires and a bus".into()));
        }
        let mut regs = Vec::new();
        if address_len > 0 {
            regs.push(Register { kind: RegisterKind::Address, start: 0, len: address_len });
        }
        regs.push(Register { kind: RegisterKind::Bus, start: address_len, len: 1 });
        let rest = wire_dims.len() - address_len - 1;
        if rest > 0 {
            regs.push(Register { kind: RegisterKind::Ancilla, start: address_len + 1, len: rest });
        }
        Ok(WireLayout { wire_dims, registers: regs, tree_depth: None })
    }

    pub fn wire_count(&self) -> usize {
        self.wire_dims.len()
    }

    pub fn wire_dims(&self) -> &[u8] {
        &self.wire_dims
    }

    pub fn dim(&self, wire: usize) -> u8 {
        self.wire_dims[wire]
    }

    /// Local dimension shared by every wire.
    pub fn uniform_dim(&self) -> Option<u8> {
        let d = *self.wire_dims.first()?;
        self.wire_dims.iter().all(|&x| x == d).then_some(d)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, kind: RegisterKind) -> Option<Register> {
        self.registers.iter().copied().find(|r| r.kind == kind)
    }

    fn register_range(&self, kind: RegisterKind) -> std::ops::Range<usize> {
        self.register(kind).map(|r| r.wires()).unwrap_or(0..0)
    }

    pub fn address_len(&self) -> usize {
        self.register_range(RegisterKind::Address).len()
    }

    pub fn address_wires(&self) -> std::ops::Range<usize> {
        self.register_range(RegisterKind::Address)
    }

    pub fn bus_wire(&self) -> usize {
        self.register_range(RegisterKind::Bus).start
    }

    /// Number of leading wires forming the query (address + bus).
    pub fn query_width(&self) -> usize {
        self.address_len() + 1
    }

    pub fn input_rail(&self) -> Option<usize> {
        self.register(RegisterKind::InputRail).map(|r| r.start)
    }

    pub fn router_wires(&self) -> std::ops::Range<usize> {
        self.register_range(RegisterKind::RouterInternal)
    }

    pub fn output_wires(&self) -> std::ops::Range<usize> {
        self.register_range(RegisterKind::RouterOutput)
    }

    pub fn ancilla_wires(&self) -> std::ops::Range<usize> {
        self.register_range(RegisterKind::Ancilla)
    }

    pub fn tree_depth(&self) -> Option<usize> {
        self.tree_depth
    }

    /// Internal wire of router `k` at level `level`.
    pub fn router(&self, level: usize, k: usize) -> usize {
        debug_assert!(k < (1 << level));
        self.router_wires().start + (1 << level) - 1 + k
    }

    /// Inverse of [`WireLayout::router`].
    pub fn router_position(&self, wire: usize) -> Option<(usize, usize)> {
        let range = self.router_wires();
        if !range.contains(&wire) {
            return None;
        }
        let heap = wire - range.start + 1;
        let level = (usize::BITS - 1 - heap.leading_zeros()) as usize;
        Some((level, heap - (1 << level)))
    }

    /// Output mode of router `(level, k)` on `side` (0 = left, 1 = right).
    pub fn output(&self, level: usize, k: usize, side: usize) -> usize {
        let heap = (1 << level) - 1 + k;
        self.output_wires().start + 2 * heap + side
    }

    /// Incident mode of router `(level, k)`: the input rail at the root, otherwise the
    /// parent's output mode facing this router.
    pub fn incident(&self, level: usize, k: usize) -> usize {
        if level == 0 {
            self.input_rail().expect("tree layout has an input rail")
        } else {
            self.output(level - 1, k / 2, k % 2)
        }
    }

    /// Encoded value of logical bit `b` on `wire`.
    pub fn logical(&self, wire: usize, b: u8) -> u8 {
        encode_bit(self.wire_dims[wire], b)
    }

    /// Checks a label against this layout.
    pub fn validate_label(&self, label: &[u8]) -> Result<()> {
        if label.len() != self.wire_count() {
            return Err(SimError::LabelLength { expected: self.wire_count(), got: label.len() });
        }
        for (wire, (&value, &dim)) in label.iter().zip(&self.wire_dims).enumerate() {
            if value >= dim {
                return Err(SimError::LabelValue { wire, value, dim });
            }
        }
        Ok(())
    }

    pub fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.wire_count() {
            Err(SimError::WireOutOfRange { wire, wire_count: self.wire_count() })
        } else {
            Ok(())
        }
    }

    /// Product of all wire dimensions, saturating.
    pub fn hilbert_dim(&self) -> u128 {
        self.wire_dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }
}

/// Qutrits store logical |0>, |1> as values 1, 2 (value 0 is the wait state);
/// qubits store them directly.
pub fn encode_bit(dim: u8, b: u8) -> u8 {
    debug_assert!(b < 2);
    if dim == 3 {
        b + 1
    } else {
        b
    }
}

/// Logical bit stored in an encoded value, `None` for the wait state.
pub fn decode_bit(dim: u8, value: u8) -> Option<u8> {
    if dim == 3 {
        value.checked_sub(1)
    } else {
        Some(value)
    }
}

fn check_dim(dim: u8) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(SimError::InvalidParameter(format!("wire dimension must be 2 or 3, got {dim}")))
    }
}
