//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line to stderr
//! (visible even with captured output) and then asserts.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use dca::automaton::{
    dca_run, dca_step, discrete_run, pca_sample_with, Configuration, DiscreteRule, RuleTable, Topology, SIMPLEX_TOL,
};
use dca::binary::{binary_grad_run, binary_run, BinaryConfig, BinaryRule};
use dca::grad::{grad_run, grad_trajectory};
use dca::gradcheck::{compare, fd_loss_gradient, ABS_FLOOR, FD_STEP, REL_TOL};
use dca::io::{parse_pgm, render_pgm, SpaceTimeDiagram};
use dca::model::{DcaRule, Parameterization};
use dca::optim::{batch_loss_gradient, loss_gradient, random_delta_batch, train, TargetSpec, TrainState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const VALUE_TOL: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-10;
const ZERO_SUM_TOL: f64 = 1e-9;
const INSTANCES: u64 = 24;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("[acceptance {id}] {} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn random_states(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

fn black_bitmap(rows: &[Vec<usize>]) -> Vec<u8> {
    rows.iter().flatten().map(|&s| if s == 1 { 0 } else { 255 }).collect()
}

fn table_rule(p_black_by_code: [f64; 8]) -> RuleTable {
    RuleTable::from_distributions(2, 3, p_black_by_code.iter().flat_map(|&p| [1.0 - p, p]).collect()).unwrap()
}

/// One seeded instance of the gradient criteria: k = 2, three offsets.
struct GradInstance {
    weights: Vec<f64>,
    initial: Configuration,
    target: Configuration,
    topology: Topology,
    steps: usize,
}

fn grad_instance(seed: u64) -> GradInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..=12);
    let steps = rng.random_range(1..=5);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let weights = (0..16).map(|_| normal.sample(&mut rng)).collect();
    let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let target = Configuration::from_states(&random_states(&mut rng, n), 2).unwrap();
    GradInstance {
        weights,
        initial: Configuration::from_black_probs(&p).unwrap(),
        target,
        topology: Topology::elementary(n).unwrap(),
        steps,
    }
}

#[test]
fn c1_deterministic_embedding_all_wolfram_rules() {
    let start = Instant::now();
    let topo = Topology::elementary(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    for number in 0..256 {
        let rule = DiscreteRule::wolfram(number).unwrap();
        let state = random_states(&mut rng, 16);
        let expected = discrete_run(&rule, &state, &topo, 16).unwrap();
        let got = dca_run(&RuleTable::from_discrete(&rule), &Configuration::from_states(&state, 2).unwrap(), &topo, 16).unwrap();
        let identical = got
            .iter()
            .zip(&expected)
            .all(|(x, s)| x == &Configuration::from_states(s, 2).unwrap());
        if !identical {
            mismatches.push(number);
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "deterministic embedding",
        mismatches.is_empty() && elapsed < Duration::from_secs(5),
        &format!("256 rules, n=16, 16 steps, mismatching rules {mismatches:?}, {elapsed:.2?} (limit 5s)"),
    );
}

#[test]
fn c2_rule_30_diagram() {
    let n = 63;
    let topo = Topology::elementary(n).unwrap();
    let mut state = vec![0; n];
    state[n / 2] = 1;
    let rule = DiscreteRule::wolfram(30).unwrap();
    let expected = black_bitmap(&discrete_run(&rule, &state, &topo, 31).unwrap());

    let rows = dca_run(&RuleTable::from_discrete(&rule), &Configuration::from_states(&state, 2).unwrap(), &topo, 31).unwrap();
    let library = parse_pgm(&render_pgm(&SpaceTimeDiagram::new(rows).unwrap(), 1).unwrap()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"topology":{"ring_size":63},"rule":{"wolfram":30},"steps":31,"initial":"centered"}"#).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_dca"))
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
        .output()
        .unwrap()
        .status;
    let cli = parse_pgm(&std::fs::read(out.join("trajectory.pgm")).unwrap()).unwrap();

    let pass = status.success()
        && (library.width, library.height) == (63, 32)
        && library.pixels == expected
        && cli.pixels == expected;
    report(
        2,
        "rule 30 diagram",
        pass,
        &format!("63x32 PGM (library and CLI) vs discrete bitmap, cli exit {:?}", status.code()),
    );
}

#[test]
fn c3_interpolation_endpoints() {
    // P(■) by pattern code, □□□ = 0 through ■■■ = 7.
    let first = |a: f64| [1.0, 1.0, 1.0, 1.0, 1.0, 0.0, a, 0.0];
    let second = |a: f64| [0.0, a, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    // Endpoint Wolfram numbers read off the tables by hand.
    let tables: [(&str, &dyn Fn(f64) -> [f64; 8], u32, u32); 2] =
        [("first", &first, 31, 95), ("second", &second, 172, 174)];

    let n = 31;
    let topo = Topology::elementary(n).unwrap();
    let mut centered = vec![0; n];
    centered[n / 2] = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let starts = [centered, random_states(&mut rng, n)];

    let mut failures = Vec::new();
    for (name, table, at0, at1) in tables {
        for state in &starts {
            let x = Configuration::from_states(state, 2).unwrap();
            for (alpha, number) in [(0.0, at0), (1.0, at1)] {
                let oracle = discrete_run(&DiscreteRule::wolfram(number).unwrap(), state, &topo, 20).unwrap();
                let got = dca_run(&table_rule(table(alpha)), &x, &topo, 20).unwrap();
                if !got.iter().zip(&oracle).all(|(c, s)| c == &Configuration::from_states(s, 2).unwrap()) {
                    failures.push(format!("{name} table alpha={alpha} vs rule {number}"));
                }
            }
            for c in dca_run(&table_rule(table(0.5)), &x, &topo, 20).unwrap() {
                let in_range = c.probs().iter().all(|p| (0.0..=1.0).contains(p));
                let simplex = c.cells().all(|cell| (cell.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL);
                if !(in_range && simplex) {
                    failures.push(format!("{name} table alpha=0.5 left the simplex"));
                }
            }
        }
    }
    report(
        3,
        "interpolation endpoints",
        failures.is_empty(),
        &format!("tables -> rules 31/95 and 172/174, two starts, 20 steps; failures {failures:?}"),
    );
}

#[test]
fn c4_gradient_matches_finite_differences() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_unfloored = 0.0f64;
    let mut worst_abs = 0.0f64;
    for seed in 0..INSTANCES {
        let inst = grad_instance(seed);
        let rule = DcaRule::with_weights(Parameterization::Softmax, 2, 3, inst.weights.clone()).unwrap();
        let target = TargetSpec::Fixed(inst.target.clone());
        let (_, analytic) = loss_gradient(&rule, &inst.initial, &inst.topology, inst.steps, &target).unwrap();
        let numeric = fd_loss_gradient(&rule, &inst.initial, &inst.topology, inst.steps, &target, FD_STEP).unwrap();
        let cmp = compare(&analytic, &numeric, ABS_FLOOR).unwrap();
        worst = worst.max(cmp.max_rel_error);
        worst_abs = worst_abs.max(cmp.max_abs_error);
        for (a, b) in analytic.iter().zip(&numeric) {
            let scale = a.abs().max(b.abs());
            if scale > 1e-6 {
                worst_unfloored = worst_unfloored.max((a - b).abs() / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "gradient vs finite differences",
        worst < REL_TOL && elapsed < Duration::from_secs(30),
        &format!(
            "{INSTANCES} instances, max rel error {worst:.2e} (floor {ABS_FLOOR:e}, limit {REL_TOL:e}), \
             without floor {worst_unfloored:.2e}, max abs {worst_abs:.2e}, {elapsed:.2?} (limit 30s)"
        ),
    );
}

#[test]
fn c5_binary_general_equivalence() {
    let mut value_err = 0.0f64;
    let mut grad_err = 0.0f64;
    for seed in 100..100 + INSTANCES {
        let inst = grad_instance(seed);
        let binary_w: Vec<f64> = inst.weights[..8].to_vec();
        let bridged: Vec<f64> = binary_w.iter().flat_map(|&w| [0.0, w]).collect();
        let fast = BinaryRule::from_weights(3, binary_w.clone()).unwrap();
        let general = RuleTable::from_weights(2, 3, bridged.clone()).unwrap();
        let bx = BinaryConfig::from_configuration(&inst.initial).unwrap();

        let values = binary_run(&fast, &bx, &inst.topology, inst.steps).unwrap();
        let (configs, g_general) = grad_run(&general, &inst.initial, &inst.topology, inst.steps).unwrap();
        for (b, c) in values.iter().zip(&configs) {
            for (pb, pc) in b.p_black().iter().zip(c.symbol_probs(1)) {
                value_err = value_err.max((pb - pc).abs());
            }
        }
        let (_, g_fast) = binary_grad_run(&fast, &bx, &inst.topology, inst.steps).unwrap();
        for g in 0..inst.topology.ring_size() {
            for y in 0..8 {
                grad_err = grad_err.max((g_fast.get(g, y) - g_general.get(g, 1, y, 1)).abs());
            }
        }

        let target = TargetSpec::Fixed(inst.target.clone());
        let sig = DcaRule::with_weights(Parameterization::Sigmoid, 2, 3, binary_w).unwrap();
        let soft = DcaRule::with_weights(Parameterization::Softmax, 2, 3, bridged).unwrap();
        let (l_sig, dl_sig) = loss_gradient(&sig, &inst.initial, &inst.topology, inst.steps, &target).unwrap();
        let (l_soft, dl_soft) = loss_gradient(&soft, &inst.initial, &inst.topology, inst.steps, &target).unwrap();
        value_err = value_err.max((l_sig - l_soft).abs() / l_soft.abs().max(1.0));
        for y in 0..8 {
            grad_err = grad_err.max((dl_sig[y] - dl_soft[2 * y + 1]).abs());
        }
    }
    report(
        5,
        "binary/general equivalence",
        value_err <= VALUE_TOL && grad_err <= GRAD_TOL,
        &format!(
            "{INSTANCES} instances, max value diff {value_err:.2e} (limit {VALUE_TOL:e}), \
             max gradient diff {grad_err:.2e} (limit {GRAD_TOL:e})"
        ),
    );
}

#[test]
fn c6_pca_marginals() {
    const SAMPLES: usize = 100_000;
    let n = 8;
    let topo = Topology::elementary(n).unwrap();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let weights = (0..16).map(|_| normal.sample(&mut rng)).collect();
    let rule = RuleTable::from_weights(2, 3, weights).unwrap();

    let mut worst_sigmas = 0.0f64;
    let mut failures = 0;
    let inputs = [random_states(&mut rng, n), random_states(&mut rng, n), vec![0, 1, 1, 0, 1, 0, 0, 0]];
    for state in &inputs {
        let expected = dca_step(&rule, &Configuration::from_states(state, 2).unwrap(), &topo).unwrap();
        let mut black = vec![0usize; n];
        for _ in 0..SAMPLES {
            for (count, s) in black.iter_mut().zip(pca_sample_with(&rule, state, &topo, &mut rng).unwrap()) {
                *count += s;
            }
        }
        for g in 0..n {
            let p = expected.prob(g, 1);
            let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt();
            let dev = (black[g] as f64 / SAMPLES as f64 - p).abs();
            if dev > 3.0 * sigma {
                failures += 1;
            }
            if sigma > 0.0 {
                worst_sigmas = worst_sigmas.max(dev / sigma);
            }
        }
    }
    report(
        6,
        "PCA marginals",
        failures == 0,
        &format!("{} inputs x {n} cells, {SAMPLES} samples each, worst deviation {worst_sigmas:.2} sigma (limit 3)", inputs.len()),
    );
}

#[test]
fn c7_rule_30_recovery() {
    let start = Instant::now();
    let topo = Topology::elementary(11).unwrap();
    let batch = random_delta_batch(11, 2, 32, 7).unwrap();
    let rule = DcaRule::with_weights(Parameterization::Sigmoid, 2, 3, vec![0.0; 8]).unwrap();
    let target = TargetSpec::RuleAfterSteps(DiscreteRule::wolfram(30).unwrap());
    let state = TrainState::new(rule, 0.5, 0.0, 7, batch).unwrap();

    let outcome = train(state, &topo, 1, &target, 2000, |p| {
        let thresholded = BinaryRule::from_weights(3, p.weights.to_vec()).unwrap().threshold();
        if p.loss < 0.01 && thresholded.wolfram_number() == Some(30) {
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    })
    .unwrap();
    let trained = &outcome.state.rule;
    let (loss, _) = batch_loss_gradient(trained, &outcome.state.batch, &topo, 1, &target).unwrap();
    let number = trained.threshold().wolfram_number();
    let elapsed = start.elapsed();
    report(
        7,
        "rule 30 recovery",
        number == Some(30) && loss < 0.01 && elapsed < Duration::from_secs(60),
        &format!(
            "thresholded rule {number:?} after {} iterations, batch loss {loss:.3e} (limit 0.01), {elapsed:.2?} (limit 60s)",
            outcome.state.step_count
        ),
    );
}

#[test]
fn c8_zero_sum_gradients() {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for seed in 0..INSTANCES {
        let inst = grad_instance(seed);
        let rule = RuleTable::from_weights(2, 3, inst.weights.clone()).unwrap();
        let (_, grads) = grad_trajectory(&rule, &inst.initial, &inst.topology, inst.steps).unwrap();
        for g in &grads {
            worst = worst.max(g.zero_sum_residual());
            checked += 1;
        }
    }
    report(
        8,
        "zero-sum gradients",
        worst <= ZERO_SUM_TOL,
        &format!("{checked} gradients over {INSTANCES} runs, max residual {worst:.2e} (limit {ZERO_SUM_TOL:e})"),
    );
}
