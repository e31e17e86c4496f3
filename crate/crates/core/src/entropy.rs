//! Router entanglement entropy at the moment the bus reaches the bottom of the tree.

use serde::{Deserialize, Serialize};

use crate::circuits::{initial_state, Circuit, ClassicalData, Query, Variant};
use crate::error::{Result, SimError};
use crate::state::entanglement_entropy;
use crate::trajectory::apply_block;

/// Largest address width accepted by [`entropy_profile`].
pub const MAX_ENTROPY_WIDTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub level: usize,
    pub router_wire: usize,
    /// Entropy in bits of the router's reduced density matrix.
    pub entropy: f64,
    /// Analytic value for the architectures that have one.
    pub closed_form: Option<f64>,
}

/// Entropy of a three-level router at depth `level` under a uniform query:
/// `-(1-p) log2(1-p) + p (level + 1)` with `p = 2^-level`.
pub fn bb3_closed_form(level: usize) -> f64 {
    let p = (-(level as f64)).exp2();
    let rest = if p < 1.0 { -(1.0 - p) * (1.0 - p).log2() } else { 0.0 };
    rest + p * (level as f64 + 1.0)
}

/// Entropy of the leftmost router of each level, taken just before the copy step of a
/// noiseless uniform query.
pub fn entropy_profile(circuit: &Circuit) -> Result<Vec<EntropyPoint>> {
    let n = circuit.n;
    if n > MAX_ENTROPY_WIDTH {
        return Err(SimError::Guard { what: "entropy profile address width".into(), size: n as u128, limit: MAX_ENTROPY_WIDTH as u128 });
    }
    let Some(copy_block) = circuit.copy_block else {
        return Err(SimError::InvalidParameter(format!("{} has no single route-in stage", circuit.variant.name())));
    };
    let depth = circuit.layout.tree_depth().unwrap_or(0);
    // Route-in is data independent, so any memory contents will do.
    let bound = circuit.bind(&ClassicalData::zeros(n))?;
    let mut state = initial_state(&bound, &Query::uniform(n))?;
    for block in &bound.blocks[..copy_block] {
        apply_block(&mut state, block)?;
    }
    let closed = |level: usize| match circuit.variant {
        Variant::Fanout => Some(1.0),
        Variant::Bb3 => Some(bb3_closed_form(level)),
        _ => None,
    };
    (0..depth)
        .map(|level| {
            let wire = circuit.layout.router(level, 0);
            let rho = state.reduced_density_matrix(wire)?;
            Ok(EntropyPoint { level, router_wire: wire, entropy: entanglement_entropy(&rho)?, closed_form: closed(level) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_bb_circuit, build_fanout_circuit, CopyVariant, RouterLevels};

    #[test]
    fn closed_form_values() {
        assert!((bb3_closed_form(0) - 1.0).abs() < 1e-15);
        assert!((bb3_closed_form(2) - 1.061_278_124_459_133).abs() < 1e-12);
        assert!((bb3_closed_form(3) - 0.668_564_443_199_596_4).abs() < 1e-12);
    }

    #[test]
    fn profiles_match_closed_forms() {
        for n in 1..=MAX_ENTROPY_WIDTH {
            let bb3 = build_bb_circuit(n, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
            for p in entropy_profile(&bb3).unwrap() {
                assert!((p.entropy - p.closed_form.unwrap()).abs() < 1e-9, "n={n} {p:?}");
            }
            for p in entropy_profile(&build_fanout_circuit(n).unwrap()).unwrap() {
                assert!((p.entropy - 1.0).abs() < 1e-9, "n={n} {p:?}");
            }
        }
    }

    #[test]
    fn width_guard() {
        let c = build_fanout_circuit(MAX_ENTROPY_WIDTH + 1).unwrap();
        assert!(matches!(entropy_profile(&c), Err(SimError::Guard { .. })));
    }
}
