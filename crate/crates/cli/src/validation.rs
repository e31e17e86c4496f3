//! Cross-checks of the sparse engine and the Monte-Carlo estimator against the
//! dense reference simulators.

use num_complex::Complex64;
use qramsim::channels::{make_channel, ChannelKind};
use qramsim::circuits::{
    build_bb_circuit, build_double_query_circuit, build_fanout_circuit, build_hybrid_circuit, build_qrom_circuit,
    initial_state, Circuit, ClassicalData, CopyVariant, HybridSub, Query, RouterLevels, TreeInit,
};
use qramsim::oracle::{dense_channel_sim, dense_unitary_sim, enumerate_configs_fidelity, DenseState, GateTable, DENSE_LIMIT};
use qramsim::trajectory::{run_noiseless, NoiseLocations, TrajectoryRunner};
use qramsim::SimError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest amplitude difference accepted between the sparse and dense engines.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Random noiseless cases per circuit family.
    pub cases_per_variant: usize,
    /// Trajectories per Monte-Carlo comparison.
    pub samples: usize,
    /// Error rates of the density-matrix comparison.
    pub epsilons: Vec<f64>,
    /// Error rate of the enumeration comparison.
    pub enumeration_epsilon: f64,
    /// Allowed deviation in standard errors.
    pub sigmas: f64,
    pub seed: u64,
    pub workers: usize,
    /// Gate matrices used by the dense engine.
    pub table: GateTable,
}

impl ValidationOptions {
    /// The complete suite.
    pub fn full(seed: u64, workers: usize) -> Self {
        ValidationOptions {
            cases_per_variant: 50,
            samples: 10_000,
            epsilons: vec![0.01, 0.1],
            enumeration_epsilon: 0.1,
            sigmas: 3.0,
            seed,
            workers,
            table: GateTable::standard(),
        }
    }

    /// A reduced suite that runs in seconds.
    pub fn quick(seed: u64, workers: usize) -> Self {
        ValidationOptions { cases_per_variant: 4, samples: 2_000, epsilons: vec![0.1], ..Self::full(seed, workers) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    /// Observed deviation (absolute amplitude error or |MC - exact|).
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn suite(&self, suite: &str) -> impl Iterator<Item = &Check> {
        let suite = suite.to_string();
        self.checks.iter().filter(move |c| c.suite == suite)
    }
}

pub const SPARSE_VS_DENSE: &str = "sparse_vs_dense";
pub const MC_VS_DENSITY: &str = "mc_vs_density";
pub const MC_VS_ENUMERATION: &str = "mc_vs_enumeration";

/// Runs all three suites.
pub fn run_validation(opts: &ValidationOptions, mut progress: impl FnMut(&Check)) -> Result<ValidationReport, SimError> {
    let mut report = ValidationReport::default();
    for check in sparse_vs_dense(opts)?
        .into_iter()
        .chain(mc_vs_density(opts)?)
        .chain(mc_vs_enumeration(opts)?)
    {
        progress(&check);
        report.checks.push(check);
    }
    Ok(report)
}

type Builder = fn(usize, usize) -> qramsim::Result<Circuit>;
type Family = (&'static str, Builder, Vec<(usize, usize)>);

/// Circuit families with the `(n, m)` pairs tried for each; pairs above the dense
/// guard are dropped at run time.
fn families() -> Vec<Family> {
    let widths = |v: &[usize]| v.iter().map(|&n| (n, 0)).collect::<Vec<_>>();
    let hybrid_pairs = vec![(2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 2), (4, 3)];
    vec![
        ("fanout", |n, _| build_fanout_circuit(n), widths(&[1, 2, 3])),
        ("bb2", |n, _| build_bb_circuit(n, RouterLevels::Two, false, CopyVariant::PlusZ), widths(&[1, 2, 3])),
        ("bb3", |n, _| build_bb_circuit(n, RouterLevels::Three, false, CopyVariant::ZeroXTilde), widths(&[1, 2, 3])),
        ("bb2_modified", |n, _| build_bb_circuit(n, RouterLevels::Two, true, CopyVariant::PlusZ), widths(&[1, 2, 3])),
        ("bb3_modified", |n, _| build_bb_circuit(n, RouterLevels::Three, true, CopyVariant::ZeroXTilde), widths(&[1, 2, 3])),
        ("qrom", |n, _| build_qrom_circuit(n), widths(&[1, 2, 3, 4, 5, 6])),
        ("hybrid_fanout", |n, m| build_hybrid_circuit(n, m, HybridSub::Fanout), hybrid_pairs.clone()),
        ("hybrid_bb2", |n, m| build_hybrid_circuit(n, m, HybridSub::Bb2), hybrid_pairs.clone()),
        ("hybrid_bb3", |n, m| build_hybrid_circuit(n, m, HybridSub::Bb3), hybrid_pairs),
        ("double_query_bb2", |n, _| build_double_query_circuit(n, RouterLevels::Two), widths(&[1, 2, 3])),
        ("double_query_bb3", |n, _| build_double_query_circuit(n, RouterLevels::Three), widths(&[1, 2, 3])),
    ]
}

/// Random normalized superposition over a random non-empty subset of addresses.
pub fn random_query<R: Rng>(n: usize, rng: &mut R) -> Query {
    let big_n = 1usize << n;
    let mut amps: Vec<(usize, Complex64)> = Vec::new();
    for i in 0..big_n {
        if rng.gen_bool(0.7) {
            amps.push((i, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        }
    }
    if amps.is_empty() {
        amps.push((rng.gen_range(0..big_n), Complex64::new(1.0, 0.0)));
    }
    let norm = amps.iter().map(|a| a.1.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-6 {
        amps = vec![(amps[0].0, Complex64::new(1.0, 0.0))];
    } else {
        amps.iter_mut().for_each(|a| a.1 /= norm);
    }
    Query { address_amps: amps, tree_init: TreeInit::Clean }
}

/// Noiseless sparse runs against the dense state vector on random data and queries.
pub fn sparse_vs_dense(opts: &ValidationOptions) -> Result<Vec<Check>, SimError> {
    let mut checks = Vec::new();
    for (idx, (name, build, pairs)) in families().into_iter().enumerate() {
        let mut feasible = Vec::new();
        for (n, m) in pairs {
            let c = build(n, m)?;
            if c.layout.hilbert_dim() <= DENSE_LIMIT {
                feasible.push(c);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(idx as u64);
        let mut worst = 0.0f64;
        for _ in 0..opts.cases_per_variant {
            let circuit = &feasible[rng.gen_range(0..feasible.len())];
            let n = circuit.n;
            let data = ClassicalData::random(n, rng.gen());
            let mut query = random_query(n, &mut rng);
            if circuit.copy_variant == CopyVariant::DoubleQuery {
                query.tree_init = TreeInit::Random { seed: rng.gen() };
            }
            let bound = circuit.bind(&data)?;
            let start = DenseState::from_sparse(&initial_state(&bound, &query)?)?;
            let dense = dense_unitary_sim(&bound, &start, &opts.table)?;
            let sparse = run_noiseless(circuit, &data, &query)?;
            worst = worst.max(dense.max_deviation(&sparse)?);
        }
        checks.push(Check {
            suite: SPARSE_VS_DENSE.into(),
            name: format!("{name} ({} cases)", opts.cases_per_variant),
            passed: worst <= AMPLITUDE_TOLERANCE,
            deviation: worst,
            tolerance: AMPLITUDE_TOLERANCE,
        });
    }
    Ok(checks)
}

fn mc_check(suite: &str, name: String, mc: f64, se: f64, exact: f64, sigmas: f64) -> Check {
    // The floor keeps zero-variance estimates from failing on rounding noise.
    let tolerance = sigmas * se + 1e-12;
    let deviation = (mc - exact).abs();
    Check { suite: suite.into(), name, passed: deviation <= tolerance, deviation, tolerance }
}

/// Monte-Carlo estimates against the exact density-matrix fidelity.
pub fn mc_vs_density(opts: &ValidationOptions) -> Result<Vec<Check>, SimError> {
    let mut checks = Vec::new();
    let families: [(&str, Builder); 2] = [
        ("bb2", |n, _| build_bb_circuit(n, RouterLevels::Two, false, CopyVariant::PlusZ)),
        ("fanout", |n, _| build_fanout_circuit(n)),
    ];
    let mut case = 0u64;
    for (name, build) in families {
        for n in [1, 2] {
            let circuit = build(n, 0)?;
            for &eps in &opts.epsilons {
                for kind in ChannelKind::STANDARD {
                    case += 1;
                    let ch = make_channel(kind, 2, eps)?;
                    let data = ClassicalData::random(n, opts.seed.wrapping_add(case));
                    let query = Query::uniform(n);
                    let exact =
                        dense_channel_sim(&circuit, &ch, &NoiseLocations::Circuit, &data, &query, &opts.table)?.fidelity;
                    let runner = TrajectoryRunner::new(&circuit, &ch, &NoiseLocations::Circuit, &data, &query)?;
                    let est = runner.estimate(opts.samples, opts.seed ^ (case << 32), opts.workers)?;
                    checks.push(mc_check(
                        MC_VS_DENSITY,
                        format!("{name} n={n} {} eps={eps}", kind.name()),
                        est.mean,
                        est.std_error,
                        exact,
                        opts.sigmas,
                    ));
                }
            }
        }
    }
    Ok(checks)
}

/// Monte-Carlo estimates with noise confined to one or two locations against
/// exhaustive enumeration of the error configurations, on a depth-3 three-level tree.
pub fn mc_vs_enumeration(opts: &ValidationOptions) -> Result<Vec<Check>, SimError> {
    let n = 3;
    let circuit = build_bb_circuit(n, RouterLevels::Three, false, CopyVariant::ZeroXTilde)?;
    let l = &circuit.layout;
    let t = circuit.t();
    let (root, left, deep) = (l.router(0, 0), l.router(1, 1), l.router(2, 2));
    let location_sets: Vec<(&str, Vec<(u32, usize)>)> = vec![
        ("single root", vec![(t / 3, root)]),
        ("single level-2", vec![(t - 4, deep)]),
        ("double root+level-1", vec![(2, root), (t / 2, left)]),
        ("double same-round", vec![(t / 2, root), (t / 2, deep)]),
    ];
    let data = ClassicalData::random(n, opts.seed);
    let query = Query::uniform(n);
    let mut checks = Vec::new();
    let mut case = 0u64;
    for kind in ChannelKind::STANDARD {
        let ch = make_channel(kind, 3, opts.enumeration_epsilon)?;
        for (label, locs) in &location_sets {
            case += 1;
            let exact = enumerate_configs_fidelity(&circuit, &ch, locs, &data, &query)?.fidelity;
            let runner = TrajectoryRunner::new(&circuit, &ch, &NoiseLocations::Only(locs.clone()), &data, &query)?;
            let est = runner.estimate(opts.samples, opts.seed ^ (case << 40), opts.workers)?;
            checks.push(mc_check(
                MC_VS_ENUMERATION,
                format!("bb3 n=3 {} {label}", kind.name()),
                est.mean,
                est.std_error,
                exact,
                opts.sigmas,
            ));
        }
    }
    Ok(checks)
}
