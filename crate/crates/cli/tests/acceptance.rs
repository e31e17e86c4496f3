//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fmt::Write as _;
use std::process::Command;
use std::time::Instant;

use qramsim::bounds::bounds;
use qramsim::channels::{make_channel, ChannelKind};
use qramsim::circuits::{
    build_bb_circuit, build_double_query_circuit, build_fanout_circuit, ClassicalData, CopyVariant, Query,
    RouterLevels, TreeInit,
};
use qramsim::entropy::{bb3_closed_form, entropy_profile};
use qramsim::fit::loglog_fit;
use qramsim::sampler::ErrorEvent;
use qramsim::trajectory::{NoiseLocations, TrajectoryRunner};
use qramsim_cli::validation::{random_query, run_validation, ValidationOptions};
use qramsim_cli::{run_sweep, ExperimentConfig, SweepPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-4;
const SEED: u64 = 20_240_611;

/// Per-width sample counts for slope fits: small widths have small infidelities and
/// need more trajectories for the same relative error.
const SLOPE_PLAN: [(usize, usize); 6] = [(3, 40_000), (4, 20_000), (5, 10_000), (6, 6_000), (7, 4_000), (8, 4_000)];
const SLOPE_PLAN_DATASETS: usize = 5;
const HEATING_PLAN: [(usize, usize); 6] = [(3, 60_000), (4, 30_000), (5, 20_000), (6, 12_000), (7, 9_000), (8, 9_000)];
const HEATING_PLAN_DATASETS: usize = 3;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn config(variant: &str, kind: &str, n: [usize; 2], big_m: Option<usize>, samples: usize, datasets: usize) -> String {
    let m = big_m.map(|m| format!(r#""M":{m},"#)).unwrap_or_default();
    format!(
        r#"{{"variant":"{variant}","n_range":[{},{}],{m}"channel":{{"kind":"{kind}","epsilon":{EPS}}},
            "samples":{samples},"datasets":{datasets},"master_seed":{SEED},"workers":{}}}"#,
        n[0],
        n[1],
        workers()
    )
}

fn sweep(variant: &str, kind: &str, n: [usize; 2], big_m: Option<usize>, samples: usize, datasets: usize) -> Result<Vec<SweepPoint>, String> {
    let cfg = ExperimentConfig::from_json(&config(variant, kind, n, big_m, samples, datasets)).map_err(|e| e.to_string())?;
    Ok(run_sweep(&cfg, |_| {}).map_err(|e| e.to_string())?.points)
}

fn sweep_plan(variant: &str, kind: &str, plan: &[(usize, usize)], datasets: usize) -> Result<Vec<SweepPoint>, String> {
    let mut points = Vec::new();
    for &(n, samples) in plan {
        points.extend(sweep(variant, kind, [n, n], None, samples, datasets)?);
    }
    Ok(points)
}

fn slope(points: &[SweepPoint]) -> Result<f64, String> {
    let pts: Vec<(usize, f64)> = points.iter().map(|p| (p.n, p.mean_infidelity)).collect();
    Ok(loglog_fit(&pts, 3).map_err(|e| e.to_string())?.slope)
}

/// Separation of two estimates in units of their combined standard error.
fn sigmas(a: &SweepPoint, b: &SweepPoint) -> f64 {
    (b.mean_infidelity - a.mean_infidelity) / a.std_error.hypot(b.std_error)
}

fn mixed_unitary_bound() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for kind in ["depolarizing", "bit_flip", "dephasing"] {
        for p in sweep("bb3", kind, [2, 8], None, 2000, 10)? {
            let margin = p.mean_infidelity - 3.0 * p.std_error - p.bound_eq28;
            worst = worst.max(margin / p.bound_eq28);
            ok &= margin <= 0.0;
        }
    }
    Ok((ok, format!("21 points, largest (infid - 3se - 4eTn)/4eTn = {worst:.3}")))
}

fn general_bound() -> Outcome {
    let mut msg = String::new();
    let mut ok = true;
    for kind in ["damping", "heating"] {
        let points = sweep("bb3", kind, [2, 8], None, 2000, 10)?;
        let worst = points.iter().map(|p| p.mean_infidelity / p.bound_general).fold(0.0, f64::max);
        ok &= points.iter().all(|p| p.mean_infidelity <= p.bound_general);
        write!(msg, "{kind}: max infid/(A'eTn) = {worst:.3}; ").unwrap();
    }
    Ok((ok, msg.trim_end_matches("; ").to_string()))
}

fn two_level_slopes() -> Outcome {
    let mut msg = String::new();
    let mut ok = true;
    for kind in ["depolarizing", "bit_flip", "dephasing", "damping", "heating"] {
        let s = slope(&sweep_plan("bb2", kind, &SLOPE_PLAN, SLOPE_PLAN_DATASETS)?)?;
        ok &= s <= 3.3;
        ok &= match kind {
            "dephasing" => (1.7..=2.3).contains(&s),
            "damping" => (1.5..=2.2).contains(&s),
            _ => true,
        };
        write!(msg, "{kind} {s:.2}, ").unwrap();
    }
    Ok((ok, format!("slopes {}", msg.trim_end_matches(", "))))
}

fn hierarchy() -> Outcome {
    let at6 = |variant: &str, kind: &str, m: Option<usize>, samples: usize| -> Result<SweepPoint, String> {
        sweep(variant, kind, [6, 6], m, samples, 5)?.pop().ok_or_else(|| "empty sweep".to_string())
    };
    let bb3 = at6("bb3", "depolarizing", None, 40_000)?;
    let fanout = at6("fanout", "depolarizing", None, 40_000)?;
    let hyb_bb3 = at6("hybrid_bb3", "depolarizing", Some(8), 100_000)?;
    let hyb_fan = at6("hybrid_fanout", "depolarizing", Some(8), 100_000)?;
    let s_tree = sigmas(&bb3, &fanout);
    let s_hyb = sigmas(&hyb_bb3, &hyb_fan);
    let mut ok = s_tree >= 3.0 && s_hyb >= 3.0;
    let growth = sweep("fanout", "depolarizing", [3, 7], None, 80_000, 5)?;
    let mut ratios = String::new();
    for w in growth.windows(2) {
        let r = w[1].mean_infidelity / w[0].mean_infidelity;
        // Standard error of the ratio to first order.
        let se = r * (w[0].std_error / w[0].mean_infidelity).hypot(w[1].std_error / w[1].mean_infidelity);
        ok &= (1.8..=2.8).contains(&r) && (r - 1.8).min(2.8 - r) >= 3.0 * se;
        write!(ratios, "{r:.2}, ").unwrap();
    }
    Ok((
        ok,
        format!(
            "bb3 {:.2e} < fanout {:.2e} ({s_tree:.1} se); hybrid_bb3 {:.2e} < hybrid_fanout {:.2e} ({s_hyb:.1} se); fanout ratios {}",
            bb3.mean_infidelity,
            fanout.mean_infidelity,
            hyb_bb3.mean_infidelity,
            hyb_fan.mean_infidelity,
            ratios.trim_end_matches(", ")
        ),
    ))
}

fn oracle_suites() -> Outcome {
    let report = run_validation(&ValidationOptions::full(SEED, workers()), |_| {}).map_err(|e| e.to_string())?;
    let failures: Vec<String> = report.failures().map(|c| format!("{} {}", c.suite, c.name)).collect();
    let msg = if failures.is_empty() {
        format!("{} checks", report.checks.len())
    } else {
        format!("{} of {} checks failed: {}", failures.len(), report.checks.len(), failures.join("; "))
    };
    Ok((report.passed(), msg))
}

fn per_configuration_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let kinds = [ChannelKind::Depolarizing, ChannelKind::BitFlip, ChannelKind::Dephasing];
    let (mut applicable, mut violations, mut min_slack) = (0, 0, f64::INFINITY);
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let circuit = build_bb_circuit(n, RouterLevels::Three, false, CopyVariant::ZeroXTilde).map_err(|e| e.to_string())?;
        let ch = make_channel(kind, 3, EPS).map_err(|e| e.to_string())?;
        let data = ClassicalData::random(n, rng.gen());
        let query = random_query(n, &mut rng);
        let runner = TrajectoryRunner::new(&circuit, &ch, &NoiseLocations::Circuit, &data, &query).map_err(|e| e.to_string())?;
        let event = ErrorEvent {
            round: rng.gen_range(0..runner.rounds() as u32),
            wire: circuit.noisy_wires[rng.gen_range(0..circuit.noisy_wires.len())],
            kraus: rng.gen_range(1..ch.kraus_count()),
        };
        let t = runner.run_configuration(&[event]).map_err(|e| e.to_string())?;
        let lambda = t.config.lambda_good.ok_or("tree circuit without branch tracking")?;
        if lambda >= 0.5 {
            applicable += 1;
            let slack = t.fidelity - (2.0 * lambda - 1.0).powi(2);
            min_slack = min_slack.min(slack);
            if slack < -1e-12 {
                violations += 1;
            }
        }
    }
    Ok((violations == 0, format!("200 trials, {applicable} with lambda >= 1/2, {violations} violations, min slack {min_slack:.3e}")))
}

fn entropy_profiles() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut decreasing = true;
    for n in 1..=6 {
        let fan = entropy_profile(&build_fanout_circuit(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst = fan.iter().map(|p| (p.entropy - 1.0).abs()).fold(worst, f64::max);
        let bb3 = build_bb_circuit(n, RouterLevels::Three, false, CopyVariant::ZeroXTilde).map_err(|e| e.to_string())?;
        let prof = entropy_profile(&bb3).map_err(|e| e.to_string())?;
        worst = prof.iter().map(|p| (p.entropy - bb3_closed_form(p.level)).abs()).fold(worst, f64::max);
        decreasing &= prof.iter().skip(1).collect::<Vec<_>>().windows(2).all(|w| w[1].entropy < w[0].entropy);
    }
    Ok((worst <= 1e-9 && decreasing, format!("max deviation {worst:.1e}, strictly decreasing for l >= 1: {decreasing}")))
}

fn robustness_variants() -> Outcome {
    let dep = slope(&sweep("bb3_modified", "depolarizing", [3, 8], None, 4000, 5)?)?;
    let heat = slope(&sweep_plan("bb3_modified", "heating", &HEATING_PLAN, HEATING_PLAN_DATASETS)?)?;
    let mut ok = dep <= 3.3 && heat <= 3.3;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xd0b1e);
    let mut detail = String::new();
    for n in [3, 5] {
        let circuit = build_double_query_circuit(n, RouterLevels::Two).map_err(|e| e.to_string())?;
        let noiseless = make_channel(ChannelKind::Dephasing, 2, 0.0).map_err(|e| e.to_string())?;
        let dephasing = make_channel(ChannelKind::Dephasing, 2, EPS).map_err(|e| e.to_string())?;
        let bound = bounds(EPS, dephasing.epsilon_w, circuit.t(), n, 1).two_level;
        let (mut min_f, mut infid, mut var) = (1.0f64, 0.0, 0.0);
        for _ in 0..20 {
            let data = ClassicalData::random(n, rng.gen());
            let query = Query::uniform(n).with_tree_init(TreeInit::Random { seed: rng.gen() });
            let clean = TrajectoryRunner::new(&circuit, &noiseless, &NoiseLocations::Circuit, &data, &query).map_err(|e| e.to_string())?;
            min_f = min_f.min(clean.reference_fidelity());
            let est = TrajectoryRunner::new(&circuit, &dephasing, &NoiseLocations::Circuit, &data, &query)
                .map_err(|e| e.to_string())?
                .estimate(2000, rng.gen(), workers())
                .map_err(|e| e.to_string())?;
            infid += (1.0 - est.mean) / 20.0;
            var += (est.std_error / 20.0).powi(2);
        }
        ok &= (1.0 - min_f).abs() <= 1e-12 && infid - 3.0 * var.sqrt() <= bound;
        write!(detail, "double query n={n}: min noiseless F {min_f:.12}, infid {infid:.2e} vs bound {bound:.2e}; ").unwrap();
    }
    Ok((ok, format!("modified slopes depolarizing {dep:.2}, heating {heat:.2}; {}", detail.trim_end_matches("; "))))
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, config("bb3", "damping", [2, 6], None, 1000, 3)).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for w in ["1", "4"] {
        let out = dir.path().join(format!("w{w}"));
        let status = Command::new(env!("CARGO_BIN_EXE_qramsim"))
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .args(["--workers", w, "--out"])
            .arg(&out)
            .env_remove("QRAMSIM_WORKERS")
            .env_remove("QRAMSIM_OUT")
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("sweep with {w} workers failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(std::fs::read(out.join("sweep.csv")).map_err(|e| e.to_string())?);
    }
    let same = outputs[0] == outputs[1];
    Ok((same, format!("workers 1 vs 4: {} CSV bytes, identical: {same}", outputs[0].len())))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("mixed-unitary bound on three-level routers", mixed_unitary_bound),
        ("general bound for damping and heating", general_bound),
        ("polylogarithmic scaling exponents", two_level_slopes),
        ("architecture hierarchy", hierarchy),
        ("oracle equivalence", oracle_suites),
        ("per-configuration bound", per_configuration_bound),
        ("router entropy profile", entropy_profiles),
        ("robustness variants", robustness_variants),
        ("worker-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "{} criterion {} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
