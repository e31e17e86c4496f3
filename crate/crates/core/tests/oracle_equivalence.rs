use num_complex::Complex64;
use qramsim::channels::{make_channel, ChannelKind};
use qramsim::circuits::{
    build_bb_circuit, build_double_query_circuit, build_fanout_circuit, build_hybrid_circuit, build_qrom_circuit,
    initial_state, Circuit, ClassicalData, CopyVariant, HybridSub, Query, RouterLevels, TreeInit,
};
use qramsim::oracle::{dense_channel_sim, dense_unitary_sim, enumerate_configs_fidelity, DenseState, GateTable};
use qramsim::trajectory::{run_noiseless, NoiseLocations, TrajectoryRunner};

fn small_circuits() -> Vec<Circuit> {
    vec![
        build_fanout_circuit(2).unwrap(),
        build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap(),
        build_bb_circuit(1, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap(),
        build_bb_circuit(2, RouterLevels::Two, true, CopyVariant::PlusZ).unwrap(),
        build_bb_circuit(1, RouterLevels::Three, true, CopyVariant::ZeroXTilde).unwrap(),
        build_qrom_circuit(4).unwrap(),
        build_hybrid_circuit(3, 1, HybridSub::Fanout).unwrap(),
        build_hybrid_circuit(3, 1, HybridSub::Bb2).unwrap(),
        build_hybrid_circuit(3, 2, HybridSub::Bb3).unwrap(),
        build_double_query_circuit(2, RouterLevels::Two).unwrap(),
        build_double_query_circuit(1, RouterLevels::Three).unwrap(),
    ]
}

fn skewed_query(n: usize) -> Query {
    let big_n = 1usize << n;
    let raw: Vec<Complex64> = (0..big_n).map(|i| Complex64::new(1.0 + i as f64, 0.5 * i as f64 - 1.0)).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Query { address_amps: raw.into_iter().enumerate().map(|(i, a)| (i, a / norm)).collect(), tree_init: TreeInit::Clean }
}

fn dense_deviation(circuit: &Circuit, data: &ClassicalData, query: &Query, table: &GateTable) -> f64 {
    let bound = circuit.bind(data).unwrap();
    let start = DenseState::from_sparse(&initial_state(&bound, query).unwrap()).unwrap();
    let dense = dense_unitary_sim(&bound, &start, table).unwrap();
    let sparse = run_noiseless(circuit, data, query).unwrap();
    dense.max_deviation(&sparse).unwrap()
}

#[test]
fn sparse_engine_matches_dense_state_vector() {
    for c in small_circuits() {
        for seed in 0..3u64 {
            let data = ClassicalData::random(c.n, seed);
            let mut query = if seed == 0 { Query::uniform(c.n) } else { skewed_query(c.n) };
            if c.copy_variant == CopyVariant::DoubleQuery {
                query.tree_init = TreeInit::Random { seed: 40 + seed };
            }
            let d = dense_deviation(&c, &data, &query, &GateTable::standard());
            assert!(d <= 1e-10, "{} n={} seed={seed}: deviation {d}", c.variant.name(), c.n);
        }
    }
}

#[test]
fn corrupted_gate_table_is_detected() {
    let bb = build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
    let data = ClassicalData::random(2, 1);
    assert!(dense_deviation(&bb, &data, &Query::uniform(2), &GateTable::with_fault("CSWAP")) > 0.1);
    // QROM has no controlled swaps, so its fault is injected in the multi-controlled flip.
    let qrom = build_qrom_circuit(3).unwrap();
    let data = ClassicalData::new(vec![1, 0, 1, 1, 0, 0, 1, 0]).unwrap();
    assert!(dense_deviation(&qrom, &data, &Query::uniform(3), &GateTable::with_fault("MCX")) > 0.1);
    assert_eq!(dense_deviation(&qrom, &data, &Query::uniform(3), &GateTable::with_fault("CSWAP")), 0.0);
}

#[test]
fn density_matrix_and_enumeration_agree_on_every_location() {
    let circuit = build_bb_circuit(1, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
    let data = ClassicalData::new(vec![0, 1]).unwrap();
    let query = Query::uniform(1);
    let all: Vec<(u32, usize)> =
        (0..circuit.t()).flat_map(|r| circuit.noisy_wires.iter().map(move |&w| (r, w))).collect();
    for kind in ChannelKind::STANDARD {
        let ch = make_channel(kind, 2, 0.1).unwrap();
        let dense =
            dense_channel_sim(&circuit, &ch, &NoiseLocations::Circuit, &data, &query, &GateTable::standard()).unwrap();
        let en = enumerate_configs_fidelity(&circuit, &ch, &all, &data, &query).unwrap();
        assert!((dense.fidelity - en.fidelity).abs() < 1e-9, "{kind:?}: {} vs {}", dense.fidelity, en.fidelity);
        assert!((en.total_probability - 1.0).abs() < 1e-12);
    }
}

#[test]
fn density_and_enumeration_agree_on_restricted_qutrit_locations() {
    let circuit = build_bb_circuit(2, RouterLevels::Three, false, CopyVariant::ZeroXTilde).unwrap();
    let l = &circuit.layout;
    let locs = vec![(2, l.router(0, 0)), (4, l.router(1, 1)), (5, l.router(0, 0))];
    let data = ClassicalData::new(vec![1, 0, 0, 1]).unwrap();
    let query = skewed_query(2);
    for kind in ChannelKind::STANDARD {
        let ch = make_channel(kind, 3, 0.2).unwrap();
        let only = NoiseLocations::Only(locs.clone());
        let dense = dense_channel_sim(&circuit, &ch, &only, &data, &query, &GateTable::standard()).unwrap();
        let en = enumerate_configs_fidelity(&circuit, &ch, &locs, &data, &query).unwrap();
        assert!((dense.fidelity - en.fidelity).abs() < 1e-9, "{kind:?}: {} vs {}", dense.fidelity, en.fidelity);
    }
}

#[test]
fn density_matrix_stays_a_state() {
    let circuit = build_fanout_circuit(1).unwrap();
    let data = ClassicalData::new(vec![1, 1]).unwrap();
    for kind in ChannelKind::STANDARD {
        let ch = make_channel(kind, 2, 0.3).unwrap();
        let r = dense_channel_sim(&circuit, &ch, &NoiseLocations::Circuit, &data, &Query::uniform(1), &GateTable::standard())
            .unwrap();
        assert!((r.rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{kind:?}");
        assert!(r.rho.hermiticity_residual() < 1e-12);
        assert!(r.rho.min_eigenvalue() > -1e-12);
        assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
    }
}

#[test]
fn zero_noise_is_perfect_everywhere() {
    for c in small_circuits() {
        let dim = c.layout.dim(c.noisy_wires[0]);
        let data = ClassicalData::random(c.n, 3);
        let query = Query::uniform(c.n);
        for kind in ChannelKind::STANDARD {
            let ch = make_channel(kind, dim, 0.0).unwrap();
            let runner = TrajectoryRunner::new(&c, &ch, &NoiseLocations::Circuit, &data, &query).unwrap();
            let est = runner.estimate(20, 1, 1).unwrap();
            assert!((est.mean - 1.0).abs() < 1e-12, "{} {kind:?}: {}", c.variant.name(), est.mean);
            assert!(runner.run(1, 0).unwrap().config.events.is_empty());
        }
    }
}

#[test]
fn monte_carlo_matches_exact_channel_fidelity() {
    let circuit = build_bb_circuit(2, RouterLevels::Two, false, CopyVariant::PlusZ).unwrap();
    let data = ClassicalData::new(vec![0, 1, 1, 0]).unwrap();
    let query = Query::uniform(2);
    for kind in [ChannelKind::Damping, ChannelKind::Dephasing] {
        let ch = make_channel(kind, 2, 0.05).unwrap();
        let exact = dense_channel_sim(&circuit, &ch, &NoiseLocations::Circuit, &data, &query, &GateTable::standard())
            .unwrap()
            .fidelity;
        let est = TrajectoryRunner::new(&circuit, &ch, &NoiseLocations::Circuit, &data, &query)
            .unwrap()
            .estimate(4000, 2024, 1)
            .unwrap();
        assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{kind:?}: {} +/- {} vs {exact}", est.mean, est.std_error);
    }
}
