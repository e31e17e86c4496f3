//! Exact channel simulation with a density matrix on the reachable basis.
//!
//! The matrix is indexed by the basis labels that can carry weight at the current
//! step. The support starts as the labels of the initial pure state and is pushed
//! forward through every operator, so the dimension stays far below the full product
//! space for the circuits of interest.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::channels::KrausChannel;
use crate::circuits::{ideal_output, initial_state, Circuit, ClassicalData, Query};
use crate::error::{Result, SimError};
use crate::layout::WireLayout;
use crate::oracle::gate_table::{GateTable, LocalOperator};
use crate::trajectory::NoiseLocations;

/// Largest support dimension of a [`DenseDensityMatrix`].
pub const DENSITY_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub struct DenseDensityMatrix {
    layout: Arc<WireLayout>,
    basis: Vec<Vec<u8>>,
    pub matrix: DMatrix<Complex64>,
}

/// Final density matrix and its query fidelity.
#[derive(Debug, Clone)]
pub struct ChannelSimResult {
    pub rho: DenseDensityMatrix,
    pub fidelity: f64,
    /// Largest support dimension met during the run.
    pub peak_dimension: usize,
}

impl DenseDensityMatrix {
    /// `|psi><psi|` for a list of `(label, amplitude)` pairs.
    pub fn pure(layout: Arc<WireLayout>, terms: &[(Vec<u8>, Complex64)]) -> Result<Self> {
        if terms.len() > DENSITY_LIMIT {
            return Err(SimError::Guard { what: "density support".into(), size: terms.len() as u128, limit: DENSITY_LIMIT as u128 });
        }
        let basis: Vec<Vec<u8>> = terms.iter().map(|t| t.0.clone()).collect();
        let v = DMatrix::from_iterator(terms.len(), 1, terms.iter().map(|t| t.1));
        Ok(DenseDensityMatrix { layout, basis, matrix: &v * v.adjoint() })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest `|rho - rho^dag|` entry.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `rho -> sum_k A_k rho A_k^dag` for local operators `A_k`.
    pub fn apply_sum(&mut self, ops: &[LocalOperator]) -> Result<()> {
        let mut index: FxHashMap<Vec<u8>, usize> = FxHashMap::default();
        let mut new_basis: Vec<Vec<u8>> = Vec::new();
        // Per operator: list of (new row, old column, coefficient).
        let mut maps: Vec<Vec<(usize, usize, Complex64)>> = Vec::with_capacity(ops.len());
        for op in ops {
            let mut entries = Vec::new();
            for (old, label) in self.basis.iter().enumerate() {
                let col = op.local_index(op.wires.iter().map(|&w| label[w] as usize));
                for &(row, coef) in &op.columns[col] {
                    let mut l = label.clone();
                    for (&w, v) in op.wires.iter().zip(op.digits(row)) {
                        l[w] = v as u8;
                    }
                    let next = new_basis.len();
                    let idx = *index.entry(l.clone()).or_insert(next);
                    if idx == next {
                        new_basis.push(l);
                    }
                    entries.push((idx, old, coef));
                }
            }
            maps.push(entries);
        }
        let d = new_basis.len();
        if d > DENSITY_LIMIT {
            return Err(SimError::Guard { what: "density support".into(), size: d as u128, limit: DENSITY_LIMIT as u128 });
        }
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        let old_d = self.basis.len();
        for entries in &maps {
            // T = A rho, then out += T A^dag.
            let mut t = DMatrix::<Complex64>::zeros(d, old_d);
            for &(r, c, a) in entries {
                for j in 0..old_d {
                    t[(r, j)] += a * self.matrix[(c, j)];
                }
            }
            for &(r, c, a) in entries {
                let ac = a.conj();
                for i in 0..d {
                    out[(i, r)] += t[(i, c)] * ac;
                }
            }
        }
        self.basis = new_basis;
        self.matrix = out;
        Ok(())
    }

    /// `<psi| Tr_anc rho |psi>` for an ideal state on the leading `q` wires.
    pub fn fidelity(&self, ideal: &FxHashMap<Vec<u8>, Complex64>, q: usize) -> f64 {
        let w: Vec<Complex64> = self
            .basis
            .iter()
            .map(|l| ideal.get(&l[..q]).copied().unwrap_or_default())
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for a in 0..self.basis.len() {
            if w[a] == Complex64::default() {
                continue;
            }
            for b in 0..self.basis.len() {
                if w[b] == Complex64::default() || self.basis[a][q..] != self.basis[b][q..] {
                    continue;
                }
                total += w[a].conj() * self.matrix[(a, b)] * w[b];
            }
        }
        total.re
    }

    pub fn layout(&self) -> &WireLayout {
        &self.layout
    }
}

fn kraus_operators(channel: &KrausChannel, wire: usize) -> Vec<LocalOperator> {
    let d = channel.dim as usize;
    channel.kraus.iter().map(|k| LocalOperator::new(vec![wire], vec![d], k.clone())).collect()
}

/// Exact evolution of `query` through the circuit bound to `data`, with `channel`
/// applied at `locations` after the gates of each block.
pub fn dense_channel_sim(
    circuit: &Circuit,
    channel: &KrausChannel,
    locations: &NoiseLocations,
    data: &ClassicalData,
    query: &Query,
    table: &GateTable,
) -> Result<ChannelSimResult> {
    let bound = circuit.bind(data)?;
    let t = bound.t() as usize;
    let mut per_round: Vec<Vec<usize>> = vec![Vec::new(); t];
    match locations {
        NoiseLocations::Circuit => per_round.iter_mut().for_each(|r| r.clone_from(&bound.noisy_wires)),
        NoiseLocations::Only(list) => {
            for &(r, w) in list {
                if r as usize >= t {
                    return Err(SimError::InvalidParameter(format!("noise round {r} out of range for T = {t}")));
                }
                if !per_round[r as usize].contains(&w) {
                    per_round[r as usize].push(w);
                }
            }
        }
    }
    for &w in per_round.iter().flatten() {
        bound.layout.check_wire(w)?;
        if bound.layout.dim(w) != channel.dim {
            return Err(SimError::LayoutMismatch(format!("channel dimension {} on wire {w}", channel.dim)));
        }
    }
    let init = initial_state(&bound, query)?;
    let terms: Vec<(Vec<u8>, Complex64)> = init.terms().map(|(l, a)| (l.to_vec(), a)).collect();
    let mut rho = DenseDensityMatrix::pure(bound.layout.clone(), &terms)?;
    let mut peak = rho.dimension();
    let mut round = 0usize;
    for block in &bound.blocks {
        for gate in block.gates() {
            let op = table.operator(gate, &block.condition, &bound.layout)?;
            rho.apply_sum(std::slice::from_ref(&op))?;
        }
        for _ in 0..block.noise_rounds {
            for &w in &per_round[round] {
                rho.apply_sum(&kraus_operators(channel, w))?;
                peak = peak.max(rho.dimension());
            }
            round += 1;
        }
    }
    let ideal = ideal_output(&query.address_amps, data, &bound)?;
    let q = ideal.layout().wire_count();
    let map: FxHashMap<Vec<u8>, Complex64> = ideal.terms().map(|(l, a)| (l.to_vec(), a)).collect();
    let fidelity = rho.fidelity(&map, q);
    Ok(ChannelSimResult { rho, fidelity, peak_dimension: peak })
}
