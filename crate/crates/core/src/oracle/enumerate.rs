//! Exact fidelity by summing over every error configuration on a small set of locations.

use crate::channels::KrausChannel;
use crate::circuits::{ideal_output, initial_state, Circuit, ClassicalData, Query};
use crate::error::{Result, SimError};
use crate::fidelity::IdealIndex;
use crate::state::SparseState;
use crate::trajectory::apply_block;

/// Largest number of configurations [`enumerate_configs_fidelity`] will visit.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    /// `sum_c p(c) F(c)`.
    pub fidelity: f64,
    /// `sum_c p(c)`; equals one for trace-preserving channels.
    pub total_probability: f64,
    /// Configurations with non-zero probability.
    pub configurations: usize,
}

enum Op {
    Block(usize),
    Location(usize),
}

/// Exhaustive `sum_c p(c) F(c)` with `channel` acting only at `allowed` `(round, wire)`
/// locations; all other locations are noiseless.
pub fn enumerate_configs_fidelity(
    circuit: &Circuit,
    channel: &KrausChannel,
    allowed: &[(u32, usize)],
    data: &ClassicalData,
    query: &Query,
) -> Result<EnumerationResult> {
    let mut locs = allowed.to_vec();
    locs.sort_unstable();
    locs.dedup();
    let count = (channel.kraus_count() as u128).checked_pow(locs.len() as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(SimError::Guard { what: "error configurations".into(), size: count, limit: ENUMERATION_LIMIT });
    }
    if !channel.basis_preserving {
        return Err(SimError::UnsupportedChannel("enumeration needs a basis-preserving channel".into()));
    }
    let bound = circuit.bind(data)?;
    let t = bound.t();
    for &(r, w) in &locs {
        if r >= t {
            return Err(SimError::InvalidParameter(format!("noise round {r} out of range for T = {t}")));
        }
        bound.layout.check_wire(w)?;
        if bound.layout.dim(w) != channel.dim {
            return Err(SimError::LayoutMismatch(format!("channel dimension {} on wire {w}", channel.dim)));
        }
    }
    let mut ops = Vec::new();
    let mut round = 0u32;
    for (b, block) in bound.blocks.iter().enumerate() {
        ops.push(Op::Block(b));
        for _ in 0..block.noise_rounds {
            ops.extend(locs.iter().filter(|l| l.0 == round).map(|l| Op::Location(l.1)));
            round += 1;
        }
    }
    let ideal = IdealIndex::new(&ideal_output(&query.address_amps, data, &bound)?);
    let start = initial_state(&bound, query)?;
    let mut acc = Accumulator { fidelity: 0.0, probability: 0.0, configurations: 0 };
    descend(&bound, channel, &ops, 0, start, &ideal, &mut acc)?;
    Ok(EnumerationResult { fidelity: acc.fidelity, total_probability: acc.probability, configurations: acc.configurations })
}

struct Accumulator {
    fidelity: f64,
    probability: f64,
    configurations: usize,
}

fn descend(
    circuit: &Circuit,
    channel: &KrausChannel,
    ops: &[Op],
    pos: usize,
    mut state: SparseState,
    ideal: &IdealIndex,
    acc: &mut Accumulator,
) -> Result<()> {
    let mut pos = pos;
    while pos < ops.len() {
        match ops[pos] {
            Op::Block(b) => apply_block(&mut state, &circuit.blocks[b])?,
            Op::Location(w) => {
                for m in 0..channel.kraus_count() {
                    let mut branch = state.clone();
                    branch.apply_local(w, channel.monomial(m));
                    if branch.is_empty() {
                        continue;
                    }
                    descend(circuit, channel, ops, pos + 1, branch, ideal, acc)?;
                }
                return Ok(());
            }
        }
        pos += 1;
    }
    // `state` carries the unnormalized amplitude sqrt(p(c)) psi_c.
    let p = state.norm_sqr();
    if p <= 0.0 {
        return Ok(());
    }
    let mut normalized = state;
    normalized.normalize()?;
    acc.fidelity += p * ideal.fidelity(&normalized)?;
    acc.probability += p;
    acc.configurations += 1;
    Ok(())
}
