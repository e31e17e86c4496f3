//! Exact trajectory sampling of basis-preserving Kraus channels.
//!
//! At a location where the wire carries value distribution `p_v`, the outcome
//! probabilities are `P(m) = sum_v p_v w_m(v)` with `w_m(v) = (K_m^dag K_m)_{vv}`.
//! Writing `w0 = min_v w_0(v)`, every location splits into two stages:
//!
//! 1. with probability `w0` the outcome is `m = 0`, independently of the state;
//! 2. otherwise `m` is drawn from `Q(m) = (P(m) - w0 delta_{m0}) / (1 - w0)`.
//!
//! Stage-1 decisions are i.i.d. Bernoulli, so the gap between consecutive stage-2
//! locations is geometric and can be drawn in one step. Stage-1 outcomes still apply
//! `K_0`; when `K_0` is not a multiple of the identity that factor is accumulated
//! lazily and materialized before the next state-dependent draw.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Result, SimError};
use crate::state::SparseState;

/// Tolerance on `sum_m P(m) - 1` before a draw is refused.
const PROBABILITY_TOL: f64 = 1e-9;

/// One sampled Kraus outcome other than the no-error operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub round: u32,
    pub wire: usize,
    pub kraus: usize,
}

/// The non-trivial outcomes of one trajectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfig {
    pub events: Vec<ErrorEvent>,
    /// Weight of the address branches whose path avoids every faulty router.
    pub lambda_good: Option<f64>,
}

enum K0Action {
    None,
    Diagonal(Vec<num_complex::Complex64>),
    Monomial,
}

/// Stateful sampler; the geometric skip counter persists across rounds.
pub struct KrausSampler<'c> {
    ch: &'c KrausChannel,
    w0: f64,
    geometric: Option<Geometric>,
    k0: K0Action,
    /// Stage-1 locations remaining before the next stage-2 location.
    skip: u64,
}

impl<'c> KrausSampler<'c> {
    pub fn new<R: Rng + ?Sized>(ch: &'c KrausChannel, rng: &mut R) -> Result<Self> {
        ch.ensure_samplable()?;
        let w0 = ch.min_no_error_weight().clamp(0.0, 1.0);
        let geometric = if w0 >= 1.0 {
            None
        } else {
            Some(Geometric::new(1.0 - w0).map_err(|e| SimError::InvalidParameter(e.to_string()))?)
        };
        let k0 = if ch.k0_is_scalar() {
            K0Action::None
        } else if let Some(d) = ch.k0_diagonal() {
            K0Action::Diagonal(d)
        } else {
            K0Action::Monomial
        };
        let mut s = KrausSampler { ch, w0, geometric, k0, skip: 0 };
        s.draw_skip(rng);
        Ok(s)
    }

    fn draw_skip<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.skip = match &self.geometric {
            Some(g) => g.sample(rng),
            None => u64::MAX,
        };
    }

    /// Locations still to be passed before the next state-dependent draw.
    pub fn skip(&self) -> u64 {
        self.skip
    }

    /// Consumes `count` stage-1 locations without touching any state.
    ///
    /// Only valid when the caller accounts for the skipped `K_0` factors separately.
    pub fn advance(&mut self, count: u64) {
        self.skip = self.skip.saturating_sub(count);
    }

    fn materialize(&self, state: &mut SparseState, wires: &[usize]) -> Result<()> {
        if wires.is_empty() {
            return Ok(());
        }
        match &self.k0 {
            K0Action::None => return Ok(()),
            K0Action::Diagonal(d) => state.scale_diagonal(wires, d),
            K0Action::Monomial => {
                for &w in wires {
                    state.apply_local(w, self.ch.monomial(0));
                }
            }
        }
        state.normalize()
    }

    /// Samples one noise round on `wires`, appending non-trivial outcomes to `events`.
    pub fn round<R: Rng + ?Sized>(
        &mut self,
        state: &mut SparseState,
        wires: &[usize],
        round: u32,
        rng: &mut R,
        events: &mut Vec<ErrorEvent>,
    ) -> Result<()> {
        let mut pending_from = 0usize;
        let mut pos = 0usize;
        while pos < wires.len() {
            let remaining = (wires.len() - pos) as u64;
            if self.skip >= remaining {
                self.skip -= remaining;
                break;
            }
            pos += self.skip as usize;
            self.materialize(state, &wires[pending_from..pos])?;
            let wire = wires[pos];
            let m = self.stage_two(state, wire, rng)?;
            if m > 0 {
                events.push(ErrorEvent { round, wire, kraus: m });
            }
            pos += 1;
            pending_from = pos;
            self.draw_skip(rng);
        }
        self.materialize(state, &wires[pending_from..])
    }

    fn stage_two<R: Rng + ?Sized>(&self, state: &mut SparseState, wire: usize, rng: &mut R) -> Result<usize> {
        let dist = state.wire_distribution(wire);
        let dim = self.ch.dim as usize;
        let count = self.ch.kraus_count();
        let mut q = Vec::with_capacity(count);
        let mut total = 0.0;
        for m in 0..count {
            let p: f64 = (0..dim).map(|v| dist[v] * self.ch.weight(m, v)).sum();
            total += p;
            q.push(if m == 0 { (p - self.w0).max(0.0) } else { p.max(0.0) });
        }
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(SimError::ProbabilityDeviation { total });
        }
        let qsum: f64 = q.iter().sum();
        if qsum <= 0.0 {
            return Err(SimError::ZeroNorm);
        }
        let mut u = rng.gen::<f64>() * qsum;
        let mut m = count - 1;
        for (i, &qi) in q.iter().enumerate() {
            if u < qi {
                m = i;
                break;
            }
            u -= qi;
        }
        while q[m] == 0.0 {
            // Rounding pushed the draw past the last positive bucket.
            m -= 1;
        }
        state.apply_local(wire, self.ch.monomial(m));
        state.normalize()?;
        Ok(m)
    }
}

/// Samples a single noise round with a fresh sampler.
pub fn sample_round<R: Rng + ?Sized>(
    state: &SparseState,
    noisy_wires: &[usize],
    ch: &KrausChannel,
    rng: &mut R,
) -> Result<(SparseState, Vec<ErrorEvent>)> {
    for &w in noisy_wires {
        state.layout().check_wire(w)?;
        if state.layout().dim(w) != ch.dim {
            return Err(SimError::LayoutMismatch(format!(
                "channel of dimension {} on wire {w} of dimension {}",
                ch.dim,
                state.layout().dim(w)
            )));
        }
    }
    let mut sampler = KrausSampler::new(ch, rng)?;
    let mut out = state.clone();
    let mut events = Vec::new();
    sampler.round(&mut out, noisy_wires, 0, rng, &mut events)?;
    Ok((out, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_channel, ChannelKind};
    use crate::layout::WireLayout;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn qutrit_state(values: &[u8]) -> SparseState {
        let layout = Arc::new(WireLayout::from_dims(0, vec![3; values.len()]).unwrap());
        SparseState::new(layout, vec![(values.to_vec(), Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn damping_never_fires_on_wait() {
        let ch = make_channel(ChannelKind::Damping, 3, 0.9).unwrap();
        let s = qutrit_state(&[0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (out, ev) = sample_round(&s, &[0, 1, 2], &ch, &mut rng).unwrap();
            assert!(ev.is_empty());
            assert_eq!(out.label(0), &[0, 0, 0]);
        }
    }

    #[test]
    fn single_wire_frequencies_match_probabilities() {
        // |0> on a qutrit under heating never fires; under damping fires with eps.
        let eps = 0.3;
        let ch = make_channel(ChannelKind::Damping, 3, eps).unwrap();
        let s = qutrit_state(&[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 20_000;
        let mut hits = 0;
        for _ in 0..trials {
            let (_, ev) = sample_round(&s, &[0], &ch, &mut rng).unwrap();
            hits += ev.len();
        }
        let f = hits as f64 / trials as f64;
        let sigma = (eps * (1.0 - eps) / trials as f64).sqrt();
        assert!((f - eps).abs() < 4.0 * sigma, "{f}");
    }

    #[test]
    fn zero_epsilon_leaves_state_alone() {
        let ch = make_channel(ChannelKind::Depolarizing, 3, 0.0).unwrap();
        let s = qutrit_state(&[1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (out, ev) = sample_round(&s, &[0, 1], &ch, &mut rng).unwrap();
        assert!(ev.is_empty());
        assert_eq!(out.label(0), &[1, 2]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let ch = make_channel(ChannelKind::Depolarizing, 2, 0.1).unwrap();
        let s = qutrit_state(&[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_round(&s, &[0], &ch, &mut rng).is_err());
    }
}
