//! Monte-Carlo estimation of the query fidelity under a local Kraus channel.
//!
//! Every trajectory shares the deterministic prefix in which no state-dependent draw
//! happens: along it only gates and the no-error operator act. The runner stores that
//! reference path (at checkpoints, under a memory budget) and starts each trajectory
//! at the round of its first state-dependent draw. Trajectories without such a draw
//! reuse the reference fidelity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::circuits::{ideal_output, initial_state, Block, Circuit, ClassicalData, Query};
use crate::error::{Result, SimError};
use crate::fidelity::IdealIndex;
use crate::sampler::{ErrorConfig, ErrorEvent, KrausSampler};
use crate::state::{GateProgram, SparseState};

/// Bytes of reference-path snapshots kept per runner.
const SNAPSHOT_BUDGET: usize = 192 << 20;

/// Where the channel acts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLocations {
    /// Every noisy wire of the circuit in every noise round.
    #[default]
    Circuit,
    /// Only the listed `(round, wire)` pairs.
    Only(Vec<(u32, usize)>),
}

/// Applies one block (with its condition) to `state`.
pub fn apply_block(state: &mut SparseState, block: &Block) -> Result<()> {
    let program = GateProgram::compile(block.gates(), state.layout().wire_dims())?;
    state.run_program(&program, &block.condition);
    Ok(())
}

/// Noise-free evolution of `query` through the circuit bound to `data`.
pub fn run_noiseless(circuit: &Circuit, data: &ClassicalData, query: &Query) -> Result<SparseState> {
    let bound = circuit.bind(data)?;
    let mut state = initial_state(&bound, query)?;
    for block in &bound.blocks {
        apply_block(&mut state, block)?;
    }
    Ok(state)
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Block(usize),
    Round(usize),
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub fidelity: f64,
    pub config: ErrorConfig,
}

/// Sample statistics of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Fidelity of the trajectory in which no state-dependent draw happens.
    pub reference_fidelity: f64,
    /// Mean good-branch weight (tree circuits only).
    pub mean_lambda: Option<f64>,
    /// Per-trajectory fidelities in trajectory order.
    pub per_sample: Vec<f64>,
}

/// Precomputed simulation of one (circuit, data, query, channel) combination.
pub struct TrajectoryRunner {
    circuit: Circuit,
    channel: KrausChannel,
    steps: Vec<Step>,
    rounds: Vec<Vec<usize>>,
    /// Step index of each round.
    round_step: Vec<usize>,
    /// Checkpoints of the reference path: state entering round `r * stride`.
    checkpoints: Vec<SparseState>,
    stride: usize,
    reference_fidelity: f64,
    ideal: IdealIndex,
    address_weights: Vec<(usize, f64)>,
    initial: SparseState,
    programs: Vec<GateProgram>,
}

impl TrajectoryRunner {
    pub fn new(
        circuit: &Circuit,
        channel: &KrausChannel,
        locations: &NoiseLocations,
        data: &ClassicalData,
        query: &Query,
    ) -> Result<Self> {
        channel.ensure_samplable()?;
        let bound = circuit.bind(data)?;
        let t = bound.t() as usize;
        let mut rounds: Vec<Vec<usize>> = match locations {
            NoiseLocations::Circuit => vec![bound.noisy_wires.clone(); t],
            NoiseLocations::Only(list) => {
                let mut r = vec![Vec::new(); t];
                for &(round, wire) in list {
                    let slot = r.get_mut(round as usize).ok_or_else(|| {
                        SimError::InvalidParameter(format!("noise round {round} out of range for T = {t}"))
                    })?;
                    slot.push(wire);
                }
                for w in r.iter_mut() {
                    w.sort_unstable();
                    w.dedup();
                }
                r
            }
        };
        rounds.shrink_to_fit();
        for &w in rounds.iter().flatten() {
            bound.layout.check_wire(w)?;
            if bound.layout.dim(w) != channel.dim {
                return Err(SimError::LayoutMismatch(format!(
                    "channel of dimension {} on wire {w} of dimension {}",
                    channel.dim,
                    bound.layout.dim(w)
                )));
            }
        }
        let mut steps = Vec::new();
        let mut round_step = Vec::with_capacity(t);
        for (b, block) in bound.blocks.iter().enumerate() {
            steps.push(Step::Block(b));
            for _ in 0..block.noise_rounds {
                round_step.push(steps.len());
                steps.push(Step::Round(round_step.len() - 1));
            }
        }
        let ideal_state = ideal_output(&query.address_amps, data, &bound)?;
        let programs = bound
            .blocks
            .iter()
            .map(|b| GateProgram::compile(b.gates(), bound.layout.wire_dims()))
            .collect::<Result<Vec<_>>>()?;
        let initial = initial_state(&bound, query)?;
        let mut runner = TrajectoryRunner {
            circuit: bound,
            channel: channel.clone(),
            steps,
            rounds,
            round_step,
            checkpoints: Vec::new(),
            stride: 1,
            reference_fidelity: 0.0,
            ideal: IdealIndex::new(&ideal_state),
            address_weights: query.address_amps.iter().map(|&(i, a)| (i, a.norm_sqr())).collect(),
            initial,
            programs,
        };
        runner.build_reference()?;
        Ok(runner)
    }

    fn build_reference(&mut self) -> Result<()> {
        let mut sampler_free = self.initial.clone();
        // Gates are bijections and the no-error operator is diagonal or monomial, so the
        // term count along the reference path stays close to the initial one.
        let size = sampler_free.len() * (sampler_free.layout().wire_count() + 16) + 64;
        let t = self.rounds.len().max(1);
        let affordable = (SNAPSHOT_BUDGET / size).max(1);
        self.stride = t.div_ceil(affordable).max(1);
        for i in 0..self.steps.len() {
            match self.steps[i] {
                Step::Block(b) => self.apply(&mut sampler_free, b),
                Step::Round(r) => {
                    if r % self.stride == 0 {
                        self.checkpoints.push(sampler_free.clone());
                    }
                    self.no_error_round(&mut sampler_free, r)?;
                }
            }
        }
        self.reference_fidelity = self.ideal.fidelity(&sampler_free)?;
        Ok(())
    }

    fn no_error_round(&self, state: &mut SparseState, r: usize) -> Result<()> {
        let wires = &self.rounds[r];
        if wires.is_empty() || self.channel.k0_is_scalar() {
            return Ok(());
        }
        match self.channel.k0_diagonal() {
            Some(d) => state.scale_diagonal(wires, &d),
            None => {
                for &w in wires {
                    state.apply_local(w, self.channel.monomial(0));
                }
            }
        }
        state.normalize()
    }

    /// Reference-path state entering round `r`.
    fn reference_state(&self, r: usize) -> Result<SparseState> {
        let c = r / self.stride;
        let mut state = self.checkpoints[c].clone();
        let start = c * self.stride;
        if start == r {
            return Ok(state);
        }
        for i in self.round_step[start]..self.round_step[r] {
            match self.steps[i] {
                Step::Block(b) => self.apply(&mut state, b),
                Step::Round(q) => self.no_error_round(&mut state, q)?,
            }
        }
        Ok(state)
    }

    fn apply(&self, state: &mut SparseState, b: usize) {
        state.run_program(&self.programs[b], &self.circuit.blocks[b].condition);
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn reference_fidelity(&self) -> f64 {
        self.reference_fidelity
    }

    /// Number of noise rounds.
    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    fn rng(master_seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        rng
    }

    /// Runs trajectory `index` of the stream seeded by `master_seed`.
    pub fn run(&self, master_seed: u64, index: u64) -> Result<Trajectory> {
        let mut rng = Self::rng(master_seed, index);
        let mut sampler = KrausSampler::new(&self.channel, &mut rng)?;
        let mut r = 0;
        while r < self.rounds.len() && sampler.skip() >= self.rounds[r].len() as u64 {
            sampler.advance(self.rounds[r].len() as u64);
            r += 1;
        }
        if r == self.rounds.len() {
            return Ok(self.finish(self.reference_fidelity, Vec::new()));
        }
        let mut state = self.reference_state(r)?;
        let mut events = Vec::new();
        self.evolve(&mut state, self.round_step[r], &mut sampler, &mut rng, &mut events)?;
        let f = self.ideal.fidelity(&state)?;
        Ok(self.finish(f, events))
    }

    /// Same trajectory as [`run`](Self::run), simulated from the initial state without
    /// the reference-path shortcut.
    pub fn run_from_scratch(&self, master_seed: u64, index: u64) -> Result<Trajectory> {
        let mut rng = Self::rng(master_seed, index);
        let mut sampler = KrausSampler::new(&self.channel, &mut rng)?;
        let mut state = self.initial.clone();
        let mut events = Vec::new();
        self.evolve(&mut state, 0, &mut sampler, &mut rng, &mut events)?;
        let f = self.ideal.fidelity(&state)?;
        Ok(self.finish(f, events))
    }

    /// Fidelity of one prescribed error configuration.
    ///
    /// Each event applies the normalized operator `K_m` at its round and wire; every
    /// other location is left untouched, which is exact for channels whose no-error
    /// operator is a multiple of the identity.
    pub fn run_configuration(&self, events: &[ErrorEvent]) -> Result<Trajectory> {
        for e in events {
            if e.round as usize >= self.rounds.len() || e.kraus >= self.channel.kraus_count() {
                return Err(SimError::InvalidParameter(format!("event {e:?} outside the circuit or channel")));
            }
            self.circuit.layout.check_wire(e.wire)?;
        }
        let mut state = self.initial.clone();
        for step in &self.steps {
            match *step {
                Step::Block(b) => self.apply(&mut state, b),
                Step::Round(q) => {
                    for e in events.iter().filter(|e| e.round as usize == q) {
                        state.apply_local(e.wire, self.channel.monomial(e.kraus));
                        state.normalize()?;
                    }
                }
            }
        }
        let f = self.ideal.fidelity(&state)?;
        let nontrivial: Vec<ErrorEvent> = events.iter().copied().filter(|e| e.kraus > 0).collect();
        Ok(self.finish(f, nontrivial))
    }

    fn evolve(
        &self,
        state: &mut SparseState,
        from_step: usize,
        sampler: &mut KrausSampler<'_>,
        rng: &mut ChaCha8Rng,
        events: &mut Vec<ErrorEvent>,
    ) -> Result<()> {
        for step in &self.steps[from_step..] {
            match *step {
                Step::Block(b) => self.apply(state, b),
                Step::Round(q) => sampler.round(state, &self.rounds[q], q as u32, rng, events)?,
            }
        }
        Ok(())
    }

    fn finish(&self, fidelity: f64, events: Vec<ErrorEvent>) -> Trajectory {
        let lambda_good = self.circuit.tracks_branches.then(|| self.lambda_good(&events));
        Trajectory { fidelity, config: ErrorConfig { events, lambda_good } }
    }

    /// Weight of the address branches whose root-to-leaf path avoids every router that
    /// suffered a non-trivial outcome.
    pub fn lambda_good(&self, events: &[ErrorEvent]) -> f64 {
        let layout = &self.circuit.layout;
        let depth = layout.tree_depth().unwrap_or(0);
        let bad: Vec<(usize, usize)> = events.iter().filter_map(|e| layout.router_position(e.wire)).collect();
        if bad.is_empty() {
            return compensated_sum(self.address_weights.iter().map(|w| w.1));
        }
        compensated_sum(
            self.address_weights
                .iter()
                .filter(|&&(i, _)| {
                    let low = i & ((1usize << depth) - 1);
                    !bad.iter().any(|&(level, k)| low >> (depth - level) == k)
                })
                .map(|w| w.1),
        )
    }

    /// Runs trajectories `0..samples`, in parallel over `workers` threads.
    ///
    /// Results are identical for any worker count.
    pub fn trajectories(&self, samples: usize, master_seed: u64, workers: usize) -> Result<Vec<Trajectory>> {
        if workers <= 1 {
            return (0..samples as u64).map(|i| self.run(master_seed, i)).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SimError::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| (0..samples as u64).into_par_iter().map(|i| self.run(master_seed, i)).collect())
    }

    pub fn estimate(&self, samples: usize, master_seed: u64, workers: usize) -> Result<FidelityEstimate> {
        if samples == 0 {
            return Err(SimError::InvalidParameter("at least one sample is required".into()));
        }
        let runs = self.trajectories(samples, master_seed, workers)?;
        let values: Vec<f64> = runs.iter().map(|t| t.fidelity).collect();
        let s = samples as f64;
        let mean = compensated_sum(values.iter().copied()) / s;
        let std_error = if samples > 1 {
            let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (s - 1.0);
            (var / s).sqrt()
        } else {
            0.0
        };
        let mean_lambda = self
            .circuit
            .tracks_branches
            .then(|| compensated_sum(runs.iter().filter_map(|t| t.config.lambda_good)) / s);
        Ok(FidelityEstimate {
            mean,
            std_error,
            samples,
            reference_fidelity: self.reference_fidelity,
            mean_lambda,
            per_sample: values,
        })
    }
}

/// Runs a single trajectory with the stream `(seed, 0)`.
pub fn run_trajectory(
    circuit: &Circuit,
    channel: &KrausChannel,
    data: &ClassicalData,
    query: &Query,
    seed: u64,
) -> Result<Trajectory> {
    TrajectoryRunner::new(circuit, channel, &NoiseLocations::Circuit, data, query)?.run(seed, 0)
}

/// One-shot Monte-Carlo estimate.
#[allow(clippy::too_many_arguments)]
pub fn estimate_fidelity(
    circuit: &Circuit,
    channel: &KrausChannel,
    locations: &NoiseLocations,
    data: &ClassicalData,
    query: &Query,
    samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<FidelityEstimate> {
    TrajectoryRunner::new(circuit, channel, locations, data, query)?.estimate(samples, master_seed, workers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_channel, ChannelKind};
    use crate::circuits::{build_bb_circuit, build_fanout_circuit, CopyVariant, RouterLevels};

    #[test]
    fn noiseless_runs_are_perfect() {
        let data = ClassicalData::random(3, 11);
        for c in [
            build_bb_circuit(3, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap(),
            build_bb_circuit(3, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap(),
            build_fanout_circuit(3).unwrap(),
        ] {
            let ch = make_channel(ChannelKind::Depolarizing, c.layout.dim(0), 0.0).unwrap();
            let est = estimate_fidelity(&c, &ch, &NoiseLocations::Circuit, &data, &Query::uniform(3), 20, 1, 1).unwrap();
            assert!((est.mean - 1.0).abs() < 1e-12, "{}", c.variant.name());
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn shortcut_matches_full_simulation() {
        let data = ClassicalData::random(3, 5);
        let c = build_bb_circuit(3, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
        let q = Query::uniform(3);
        for kind in [ChannelKind::Damping, ChannelKind::Depolarizing, ChannelKind::Heating] {
            let ch = make_channel(kind, 3, 0.05).unwrap();
            let runner = TrajectoryRunner::new(&c, &ch, &NoiseLocations::Circuit, &data, &q).unwrap();
            for i in 0..30 {
                let a = runner.run(9, i).unwrap();
                let b = runner.run_from_scratch(9, i).unwrap();
                assert_eq!(a.config.events, b.config.events);
                assert!((a.fidelity - b.fidelity).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let data = ClassicalData::random(2, 3);
        let c = build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
        let ch = make_channel(ChannelKind::Depolarizing, 2, 0.1).unwrap();
        let runner = TrajectoryRunner::new(&c, &ch, &NoiseLocations::Circuit, &data, &Query::uniform(2)).unwrap();
        let a = runner.estimate(64, 4, 1).unwrap();
        let b = runner.estimate(64, 4, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn locations_outside_the_circuit_are_rejected() {
        let c = build_fanout_circuit(1).unwrap();
        let ch = make_channel(ChannelKind::BitFlip, 2, 0.1).unwrap();
        let loc = NoiseLocations::Only(vec![(c.t(), 3)]);
        assert!(TrajectoryRunner::new(&c, &ch, &loc, &ClassicalData::zeros(1), &Query::single(0)).is_err());
    }
}
