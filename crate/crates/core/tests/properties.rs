use dca::automaton::{
    dca_local, dca_step, discrete_run, pca_sample, CellDistribution, Configuration, DiscreteRule, RuleTable, Topology,
};
use dca::binary::{binary_grad_run, binary_run, BinaryConfig, BinaryRule};
use dca::grad::{grad_run, grad_trajectory};
use dca::gradcheck::{compare, fd_config_gradient, ABS_FLOOR, FD_STEP, REL_TOL};
use dca::model::{DcaRule, Parameterization};
use dca::optim::{batch_loss_gradient, binary_cross_entropy, cross_entropy, loss_gradient, TargetSpec};
use proptest::prelude::*;

/// Random configuration with strictly positive cells.
fn interior_config(n: usize, k: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, k), n).prop_map(move |cells| {
        let probs = cells
            .iter()
            .flat_map(|c| {
                let s: f64 = c.iter().sum();
                c.iter().map(move |v| v / s)
            })
            .collect();
        Configuration::new(k, probs).unwrap()
    })
}

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn softmax_case() -> impl Strategy<Value = (RuleTable, Configuration, Topology)> {
    (2usize..=3, 4usize..=9).prop_flat_map(|(k, n)| {
        (weights(k.pow(3) * k), interior_config(n, k)).prop_map(move |(w, x)| {
            (RuleTable::from_weights(k, 3, w).unwrap(), x, Topology::elementary(n).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_stays_on_simplex((rule, x, topo) in softmax_case()) {
        let y = dca_step(&rule, &x, &topo).unwrap();
        for cell in y.cells() {
            let sum: f64 = cell.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(cell.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn step_commutes_with_rotation((rule, x, topo) in softmax_case(), shift in 0usize..16) {
        let shift = shift % x.ring_size();
        let a = dca_step(&rule, &x.rotated(shift), &topo).unwrap();
        let b = dca_step(&rule, &x, &topo).unwrap().rotated(shift);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn local_map_is_affine_in_each_neighbor(
        (rule, x, _topo) in softmax_case(),
        lambda in 0.0f64..1.0,
        slot in 0usize..3,
    ) {
        let k = rule.k();
        let neighborhood: Vec<CellDistribution> =
            (0..3).map(|i| CellDistribution::new(x.cell(i).to_vec()).unwrap()).collect();
        let other = CellDistribution::new(x.cell(3).to_vec()).unwrap();
        let mixed: Vec<f64> = (0..k)
            .map(|a| lambda * neighborhood[slot].probs()[a] + (1.0 - lambda) * other.probs()[a])
            .collect();

        let mut with_mix = neighborhood.clone();
        with_mix[slot] = CellDistribution::new(mixed).unwrap();
        let mut with_other = neighborhood.clone();
        with_other[slot] = other;

        let lhs = dca_local(&rule, &with_mix).unwrap();
        let p = dca_local(&rule, &neighborhood).unwrap();
        let q = dca_local(&rule, &with_other).unwrap();
        for a in 0..k {
            let rhs = lambda * p.probs()[a] + (1.0 - lambda) * q.probs()[a];
            prop_assert!((lhs.probs()[a] - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn deterministic_rules_embed_exactly(
        outputs in prop::collection::vec(0usize..3, 9),
        state in prop::collection::vec(0usize..3, 5..12),
        steps in 0usize..6,
    ) {
        // k = 3 over a two-cell neighborhood that skips the center.
        let rule = DiscreteRule::new(3, 2, outputs).unwrap();
        let topo = Topology::new(state.len(), vec![-1, 1]).unwrap();
        let table = RuleTable::from_discrete(&rule);
        let mut x = Configuration::from_states(&state, 3).unwrap();
        for expected in discrete_run(&rule, &state, &topo, steps).unwrap().iter().skip(1) {
            x = dca_step(&table, &x, &topo).unwrap();
            prop_assert_eq!(&x, &Configuration::from_states(expected, 3).unwrap());
        }
    }

    #[test]
    fn perturbations_stay_inside_the_light_cone(
        (rule, x, topo) in softmax_case(),
        cell in 0usize..16,
    ) {
        let (n, k) = (x.ring_size(), x.k());
        let cell = cell % n;
        let mut probs = x.probs().to_vec();
        let c = &mut probs[cell * k..(cell + 1) * k];
        c.rotate_left(1);
        let moved = Configuration::new(k, probs).unwrap();
        let a = dca_step(&rule, &x, &topo).unwrap();
        let b = dca_step(&rule, &moved, &topo).unwrap();
        for g in 0..n {
            if topo.distance(g, cell) > 1 {
                prop_assert_eq!(a.cell(g), b.cell(g));
            }
        }
    }

    #[test]
    fn propagated_gradients_sum_to_zero((rule, x, topo) in softmax_case(), steps in 1usize..4) {
        let (_, grads) = grad_trajectory(&rule, &x, &topo, steps).unwrap();
        for g in &grads {
            prop_assert!(g.zero_sum_residual() <= 1e-9);
        }
    }

    #[test]
    fn binary_engine_matches_bridge(
        w in weights(8),
        p in prop::collection::vec(0.0f64..=1.0, 4..10),
        steps in 1usize..5,
    ) {
        let rule = BinaryRule::from_weights(3, w).unwrap();
        let topo = Topology::elementary(p.len()).unwrap();
        let x = BinaryConfig::new(p).unwrap();
        let general = RuleTable::from_weights(2, 3, (0..8).flat_map(|y| [0.0, rule.weights().unwrap()[y]]).collect()).unwrap();
        let fast = binary_run(&rule, &x, &topo, steps).unwrap();
        let (slow, _) = grad_run(&general, &x.to_configuration().unwrap(), &topo, steps).unwrap();
        for (b, s) in fast.iter().zip(&slow) {
            for (pb, ps) in b.p_black().iter().zip(s.symbol_probs(1)) {
                prop_assert!((pb - ps).abs() <= 1e-12);
            }
        }
        let (_, fast_grad) = binary_grad_run(&rule, &x, &topo, steps).unwrap();
        let (_, slow_grad) = grad_run(&general, &x.to_configuration().unwrap(), &topo, steps).unwrap();
        for g in 0..topo.ring_size() {
            for y in 0..8 {
                prop_assert!((fast_grad.get(g, y) - slow_grad.get(g, 1, y, 1)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn binary_cross_entropy_matches_general(
        t in prop::collection::vec(0.0f64..=1.0, 1..12),
        p_seed in prop::collection::vec(0.0f64..=1.0, 12),
    ) {
        let p = &p_seed[..t.len()];
        let general = cross_entropy(
            &Configuration::from_black_probs(&t).unwrap(),
            &Configuration::from_black_probs(p).unwrap(),
        ).unwrap();
        let binary = binary_cross_entropy(&t, p).unwrap();
        prop_assert!((general - binary).abs() <= 1e-12 * general.abs().max(1.0));
    }

    #[test]
    fn batch_gradient_is_additive(
        w in weights(16),
        a in interior_config(7, 2),
        b in interior_config(7, 2),
        steps in 1usize..4,
    ) {
        let rule = DcaRule::with_weights(Parameterization::Softmax, 2, 3, w).unwrap();
        let topo = Topology::elementary(7).unwrap();
        let target = TargetSpec::Majority;
        let (la, ga) = loss_gradient(&rule, &a, &topo, steps, &target).unwrap();
        let (lb, gb) = loss_gradient(&rule, &b, &topo, steps, &target).unwrap();
        let (l, g) = batch_loss_gradient(&rule, &[a, b], &topo, steps, &target).unwrap();
        prop_assert!((l - (la + lb)).abs() <= 1e-12 * l.abs().max(1.0));
        for i in 0..g.len() {
            prop_assert!((g[i] - (ga[i] + gb[i])).abs() <= 1e-12 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn pca_is_reproducible(seed in any::<u64>(), state in prop::collection::vec(0usize..2, 3..20)) {
        let rule = RuleTable::uniform(2, 3).unwrap();
        let topo = Topology::elementary(state.len()).unwrap();
        prop_assert_eq!(
            pca_sample(&rule, &state, &topo, seed).unwrap(),
            pca_sample(&rule, &state, &topo, seed).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn propagated_gradient_matches_finite_differences((rule, x, topo) in softmax_case(), steps in 1usize..4) {
        let (_, analytic) = grad_run(&rule, &x, &topo, steps).unwrap();
        let numeric = fd_config_gradient(&rule, &x, &topo, steps, FD_STEP).unwrap();
        let cmp = compare(analytic.data(), numeric.data(), ABS_FLOOR).unwrap();
        prop_assert!(cmp.passes(REL_TOL), "{cmp:?}");
    }
}

#[test]
fn long_runs_stay_in_range() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let topo = Topology::elementary(40).unwrap();

    let w: Vec<f64> = (0..27 * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
    let rule = RuleTable::from_weights(3, 3, w).unwrap();
    let mut x = Configuration::uniform(40, 3).unwrap();
    for _ in 0..500 {
        x = dca_step(&rule, &x, &topo).unwrap();
        for cell in x.cells() {
            assert!(cell.iter().all(|p| (0.0..=1.0).contains(p)));
            assert!((cell.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        }
    }

    let rule = BinaryRule::from_weights(3, (0..8).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    let start = BinaryConfig::new((0..40).map(|_| rng.random::<f64>()).collect()).unwrap();
    for c in binary_run(&rule, &start, &topo, 500).unwrap() {
        assert!(c.p_black().iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
    }
}
