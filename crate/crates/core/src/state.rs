//! Sparse superpositions of computational basis labels.
//!
//! Labels are stored flat, one byte per wire, `width` bytes per term. Gates rewrite the
//! bytes in place; since every gate is a bijection on labels, distinct terms stay
//! distinct and no hashing is needed on the gate path. Only non-injective local maps
//! (some Kraus operators) trigger a merge.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::{Result, SimError};
use crate::gate::{xtilde, Gate};
use crate::layout::WireLayout;

/// Amplitudes with modulus below this are dropped.
pub const DROP_THRESHOLD: f64 = 1e-15;

/// Image of one local value under a monomial map: new value and coefficient, or `None`
/// when the value is annihilated.
pub type LocalImage = Option<(u8, Complex64)>;

#[derive(Debug, Clone)]
pub struct SparseState {
    layout: Arc<WireLayout>,
    width: usize,
    labels: Vec<u8>,
    amps: Vec<Complex64>,
}

impl SparseState {
    /// Builds a normalized state from `(label, amplitude)` pairs, merging duplicates.
    pub fn new(layout: Arc<WireLayout>, terms: impl IntoIterator<Item = (Vec<u8>, Complex64)>) -> Result<Self> {
        let width = layout.wire_count();
        let mut state = SparseState { layout, width, labels: Vec::new(), amps: Vec::new() };
        for (label, amp) in terms {
            state.layout.validate_label(&label)?;
            state.labels.extend_from_slice(&label);
            state.amps.push(amp);
        }
        state.merge_duplicates();
        if state.amps.is_empty() {
            return Err(SimError::EmptyState);
        }
        state.normalize()?;
        Ok(state)
    }

    pub fn layout(&self) -> &WireLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<WireLayout> {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn label(&self, i: usize) -> &[u8] {
        &self.labels[i * self.width..(i + 1) * self.width]
    }

    pub fn amp(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], Complex64)> + '_ {
        self.labels.chunks_exact(self.width.max(1)).zip(self.amps.iter().copied())
    }

    /// Amplitude of `label`, zero when absent.
    pub fn amplitude(&self, label: &[u8]) -> Complex64 {
        self.terms().find(|(l, _)| *l == label).map(|(_, a)| a).unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        for a in &mut self.amps {
            *a *= s;
        }
        Ok(())
    }

    /// Validates then applies one gate.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(&self.layout)?;
        self.apply_validated(gate, None)
    }

    /// Applies a gate already checked against this layout, optionally restricted to the
    /// terms flagged in `mask`.
    pub fn apply_validated(&mut self, gate: &Gate, mask: Option<&[bool]>) -> Result<()> {
        if let Some(cell) = gate.classical_cell() {
            return Err(SimError::UnboundClassicalGate { cell });
        }
        let dims = self.layout.wire_dims();
        let width = self.width;
        for (i, (label, amp)) in self.labels.chunks_exact_mut(width).zip(self.amps.iter_mut()).enumerate() {
            if let Some(m) = mask {
                if !m[i] {
                    continue;
                }
            }
            let phase = gate.act(label, dims)?;
            if phase != 1.0 {
                *amp *= phase;
            }
        }
        Ok(())
    }

    /// Runs a compiled gate sequence on the terms whose labels satisfy `condition`.
    ///
    /// Gates are label bijections, so each term can run through the whole program
    /// before the next one is touched. The program must not act on the condition wires.
    pub fn run_program(&mut self, program: &GateProgram, condition: &[(usize, u8)]) {
        let width = self.width;
        for (label, amp) in self.labels.chunks_exact_mut(width).zip(self.amps.iter_mut()) {
            if !condition.iter().all(|&(w, v)| label[w] == v) {
                continue;
            }
            if program.run(label) {
                *amp = -*amp;
            }
        }
    }

    /// Flags the terms whose label matches every `(wire, value)` pair.
    pub fn condition_mask(&self, condition: &[(usize, u8)]) -> Vec<bool> {
        self.labels
            .chunks_exact(self.width)
            .map(|l| condition.iter().all(|&(w, v)| l[w] == v))
            .collect()
    }

    /// Applies a monomial map to one wire of every term, dropping annihilated terms
    /// and merging any labels that collide.
    pub fn apply_local(&mut self, wire: usize, map: &[LocalImage]) {
        let width = self.width;
        let mut write = 0usize;
        let mut targets = [false; 4];
        let mut collide = false;
        for img in map.iter().flatten() {
            let t = img.0 as usize;
            collide |= targets[t];
            targets[t] = true;
        }
        for read in 0..self.amps.len() {
            let v = self.labels[read * width + wire] as usize;
            let Some((nv, coef)) = map[v] else { continue };
            let amp = self.amps[read] * coef;
            if amp.norm() < DROP_THRESHOLD {
                continue;
            }
            if write != read {
                self.labels.copy_within(read * width..(read + 1) * width, write * width);
            }
            self.labels[write * width + wire] = nv;
            self.amps[write] = amp;
            write += 1;
        }
        self.labels.truncate(write * width);
        self.amps.truncate(write);
        if collide {
            self.merge_duplicates();
        }
    }

    /// Multiplies each term by `prod_w diag[label[w]]` over the listed wires.
    pub fn scale_diagonal(&mut self, wires: &[usize], diag: &[Complex64]) {
        let width = self.width;
        let unit = Complex64::new(1.0, 0.0);
        let active: Vec<(u8, Complex64)> =
            diag.iter().enumerate().filter(|(_, &d)| d != unit).map(|(v, &d)| (v as u8, d)).collect();
        if active.is_empty() || wires.is_empty() {
            return;
        }
        let contiguous = wires.windows(2).all(|p| p[1] == p[0] + 1);
        for (label, amp) in self.labels.chunks_exact(width).zip(self.amps.iter_mut()) {
            for &(v, d) in &active {
                let count = if contiguous {
                    label[wires[0]..=wires[wires.len() - 1]].iter().filter(|&&x| x == v).count()
                } else {
                    wires.iter().filter(|&&w| label[w] == v).count()
                };
                if count > 0 {
                    *amp *= d.powi(count as i32);
                }
            }
        }
    }

    /// Probability of each local value on `wire` (entries beyond the wire dimension are zero).
    pub fn wire_distribution(&self, wire: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (label, amp) in self.labels.chunks_exact(self.width).zip(&self.amps) {
            p[label[wire] as usize] += amp.norm_sqr();
        }
        p
    }

    /// Merges terms with equal labels and drops those below the threshold.
    pub fn merge_duplicates(&mut self) {
        let width = self.width;
        let mut index: FxHashMap<&[u8], usize> = FxHashMap::default();
        let mut order: Vec<usize> = Vec::with_capacity(self.amps.len());
        let mut sums: Vec<Complex64> = Vec::with_capacity(self.amps.len());
        for (i, label) in self.labels.chunks_exact(width.max(1)).enumerate().take(self.amps.len()) {
            match index.get(label) {
                Some(&slot) => sums[slot] += self.amps[i],
                None => {
                    index.insert(label, sums.len());
                    order.push(i);
                    sums.push(self.amps[i]);
                }
            }
        }
        drop(index);
        let mut labels = Vec::with_capacity(order.len() * width);
        let mut amps = Vec::with_capacity(order.len());
        for (slot, &i) in order.iter().enumerate() {
            if sums[slot].norm() >= DROP_THRESHOLD {
                labels.extend_from_slice(&self.labels[i * width..(i + 1) * width]);
                amps.push(sums[slot]);
            }
        }
        self.labels = labels;
        self.amps = amps;
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(SimError::LayoutMismatch("inner product of states on different layouts".into()));
        }
        let index: FxHashMap<&[u8], Complex64> = self.terms().collect();
        Ok(other
            .terms()
            .filter_map(|(l, b)| index.get(l).map(|a| a.conj() * b))
            .sum())
    }

    /// Reduced density matrix of one wire, in encoded-value order.
    pub fn reduced_density_matrix(&self, wire: usize) -> Result<DMatrix<Complex64>> {
        self.layout.check_wire(wire)?;
        let d = self.layout.dim(wire) as usize;
        let mut groups: FxHashMap<Vec<u8>, [Complex64; 3]> = FxHashMap::default();
        for (label, amp) in self.terms() {
            let mut key = label.to_vec();
            key[wire] = u8::MAX;
            groups.entry(key).or_default()[label[wire] as usize] += amp;
        }
        let mut rho = DMatrix::<Complex64>::zeros(d, d);
        for amps in groups.values() {
            for r in 0..d {
                for c in 0..d {
                    rho[(r, c)] += amps[r] * amps[c].conj();
                }
            }
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Flip2(usize),
    Flip3(usize),
    Z(usize),
    Swap(usize, usize),
    CSwap { control: usize, value: u8, a: usize, b: usize },
    CFlip2 { control: usize, value: u8, target: usize },
    CFlip3 { control: usize, value: u8, target: usize },
    /// Controls live in `GateProgram::controls[start..start + len]`.
    MultiFlip { start: usize, len: usize, target: usize, three: bool },
}

/// A bound gate sequence lowered to a flat list of label operations.
#[derive(Debug, Clone, Default)]
pub struct GateProgram {
    ops: Vec<Op>,
    controls: Vec<(usize, u8)>,
}

impl GateProgram {
    /// Lowers `gates` for a layout with wire dimensions `dims`.
    ///
    /// The gates must be validated against that layout; unbound classical gates fail.
    pub fn compile<'g>(gates: impl IntoIterator<Item = &'g Gate>, dims: &[u8]) -> Result<Self> {
        let mut prog = GateProgram::default();
        for g in gates {
            let op = match *g {
                Gate::X(w) => Op::Flip2(w),
                Gate::XTilde(w) => Op::Flip3(w),
                Gate::Z(w) => Op::Z(w),
                Gate::Swap(a, b) => Op::Swap(a, b),
                Gate::CSwap { control, value, a, b } => Op::CSwap { control, value, a, b },
                Gate::CNot { control, value, target } => {
                    if dims[target] == 3 {
                        Op::CFlip3 { control, value, target }
                    } else {
                        Op::CFlip2 { control, value, target }
                    }
                }
                Gate::Mcx { ref controls, target, cell: None } => {
                    let start = prog.controls.len();
                    prog.controls.extend_from_slice(controls);
                    Op::MultiFlip { start, len: controls.len(), target, three: dims[target] == 3 }
                }
                Gate::ClassicalZ { cell, .. } | Gate::ClassicalXTilde { cell, .. } | Gate::Mcx { cell: Some(cell), .. } => {
                    return Err(SimError::UnboundClassicalGate { cell });
                }
            };
            prog.ops.push(op);
        }
        Ok(prog)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Rewrites `label`; returns true when the accumulated phase is -1.
    #[inline]
    fn run(&self, label: &mut [u8]) -> bool {
        let mut negate = false;
        for op in &self.ops {
            match *op {
                Op::Flip2(w) => label[w] ^= 1,
                Op::Flip3(w) => label[w] = xtilde(label[w]),
                Op::Z(w) => negate ^= label[w] == 1,
                Op::Swap(a, b) => label.swap(a, b),
                Op::CSwap { control, value, a, b } => {
                    if label[control] == value {
                        label.swap(a, b);
                    }
                }
                Op::CFlip2 { control, value, target } => {
                    if label[control] == value {
                        label[target] ^= 1;
                    }
                }
                Op::CFlip3 { control, value, target } => {
                    if label[control] == value {
                        label[target] = xtilde(label[target]);
                    }
                }
                Op::MultiFlip { start, len, target, three } => {
                    if self.controls[start..start + len].iter().all(|&(w, v)| label[w] == v) {
                        label[target] = if three { xtilde(label[target]) } else { label[target] ^ 1 };
                    }
                }
            }
        }
        negate
    }
}

/// Builds a normalized state; see [`SparseState::new`].
pub fn make_state(layout: Arc<WireLayout>, terms: Vec<(Vec<u8>, Complex64)>) -> Result<SparseState> {
    SparseState::new(layout, terms)
}

/// Functional form of [`SparseState::apply_gate`].
pub fn apply_gate(mut state: SparseState, gate: &Gate) -> Result<SparseState> {
    state.apply_gate(gate)?;
    Ok(state)
}

pub fn inner_product(a: &SparseState, b: &SparseState) -> Result<Complex64> {
    a.inner_product(b)
}

pub fn reduced_density_matrix(state: &SparseState, wire: usize) -> Result<DMatrix<Complex64>> {
    state.reduced_density_matrix(wire)
}

/// Von Neumann entropy in bits; rejects matrices that are not Hermitian within 1e-9.
pub fn entanglement_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    if !rho.is_square() {
        return Err(SimError::InvalidParameter("density matrix must be square".into()));
    }
    let residual = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(SimError::NotHermitian { residual });
    }
    let eig = rho.clone().symmetric_eigen();
    let s: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(s.max(0.0))
}
