use proptest::prelude::*;
use qring::qsim::{self, Control, Gate, Polarity, StateVector};
use qring::ring::RingConfig;
use qring::synth::{self, ScheduleSpec};
use qring::verify;

const M: usize = 4;

fn gate() -> impl Strategy<Value = Gate> {
    let q = 0..M;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        (q.clone(), -6.3f64..6.3).prop_map(|(t, a)| Gate::Ry(t, a)),
        (q.clone(), q.clone()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(c, t)| Gate::Cx(c, t)),
        permutation_gate(),
    ]
}

fn permutation_gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        (0..M).prop_map(Gate::X),
        Just(Gate::Ccx(0, 2, 3)),
        (prop::sample::subsequence(vec![0usize, 1, 2], 1..=3), prop::collection::vec(any::<bool>(), 3)).prop_map(
            |(qs, pols)| Gate::Mcx {
                controls: qs
                    .into_iter()
                    .zip(pols)
                    .map(|(qubit, p)| Control {
                        qubit,
                        polarity: if p { Polarity::Positive } else { Polarity::Negative },
                    })
                    .collect(),
                target: 3,
            }
        ),
    ]
}

fn random_state(gates: &[Gate]) -> StateVector {
    let mut s = StateVector::new(M).unwrap();
    for g in gates {
        s.apply(g).unwrap();
    }
    s
}

proptest! {
    #[test]
    fn norm_is_preserved(gates in prop::collection::vec(gate(), 0..40)) {
        prop_assert!((random_state(&gates).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_gates_are_involutions(prep in prop::collection::vec(gate(), 0..12), g in permutation_gate()) {
        let before = random_state(&prep);
        let mut s = before.clone();
        s.apply(&g).unwrap();
        s.apply(&g).unwrap();
        prop_assert_eq!(s, before);
    }

    #[test]
    fn marginals_nest(gates in prop::collection::vec(gate(), 0..30), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3], 2..=4)) {
        let s = random_state(&gates);
        let full = s.probabilities();
        let all = s.marginal(&[0, 1, 2, 3]).unwrap();
        for (k, v) in &full.probs {
            prop_assert!((all.get(k) - v).abs() < 1e-12);
        }
        // marginalizing to `keep` then to its first entry equals marginalizing straight to it
        let once = s.marginal(&keep[..1]).unwrap();
        let mut twice = [0.0; 2];
        for (k, v) in &s.marginal(&keep).unwrap().probs {
            twice[(k.as_bytes()[0] - b'0') as usize] += v;
        }
        prop_assert!((once.get("0") - twice[0]).abs() < 1e-12);
        prop_assert!((once.get("1") - twice[1]).abs() < 1e-12);
    }

    #[test]
    fn density_diagonal_is_the_marginal(gates in prop::collection::vec(gate(), 0..30), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3)) {
        let s = random_state(&gates);
        let rho = s.reduced_density(&keep).unwrap();
        let marginal = s.marginal_dense(&keep).unwrap();
        for (d, p) in rho.diagonal().iter().zip(&marginal) {
            prop_assert!((d - p).abs() < 1e-12);
        }
        prop_assert!(rho.is_hermitian(1e-10));
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn complementary_entropies_match(gates in prop::collection::vec(gate(), 0..30), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3)) {
        let s = random_state(&gates);
        let rest: Vec<usize> = (0..M).filter(|q| !keep.contains(q)).collect();
        let a = s.reduced_density(&keep).unwrap().entropy();
        let b = s.reduced_density(&rest).unwrap().entropy();
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn schedule_circuits_match_the_oracle(n in 2usize..=5, raw in prop::collection::vec(0usize..5, 1..=6)) {
        let order: Vec<usize> = raw.into_iter().map(|i| i % n).collect();
        let spec = ScheduleSpec::new(n, order).unwrap();
        let r = verify::schedule_experiment(&spec, None, 1e-9).unwrap();
        prop_assert!(r.pass, "{:?}", r);
        let e = verify::entanglement_report(&spec).unwrap();
        prop_assert!((e.anc_side_entropy.unwrap() - e.x_vs_anc_entropy).abs() < 1e-9);
        prop_assert!(e.x_marginal_purity > 0.0 && e.x_marginal_purity <= 1.0 + 1e-9);
    }

    #[test]
    fn faults_match_the_oracle(n in 2usize..=4, raw in prop::collection::vec(0usize..4, 0..=4), pos in 0usize..5, target in 0usize..4) {
        let order: Vec<usize> = raw.into_iter().map(|i| i % n).collect();
        let fault = verify::FaultSpec { position: pos % (order.len() + 1), target: target % n };
        let spec = ScheduleSpec::new(n, order).unwrap();
        prop_assert!(verify::schedule_experiment(&spec, Some(&fault), 1e-9).unwrap().pass);
    }

    #[test]
    fn fault_flip_is_an_involution(n in 2usize..=10, word in any::<u64>(), i in 0usize..10) {
        let cfg = RingConfig::from_index(n, word % (1 << n)).unwrap();
        let i = i % n;
        let twice = cfg.inject_bit_fault(i).unwrap().inject_bit_fault(i).unwrap();
        prop_assert_eq!(twice, cfg);
    }
}

#[test]
fn exhaustive_short_schedules_on_three() {
    let mut orders: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..3 {
        let next: Vec<Vec<usize>> = orders
            .iter()
            .flat_map(|o| (0..3).map(move |i| [o.clone(), vec![i]].concat()))
            .collect();
        orders.extend(next.into_iter().filter(|o| o.len() <= 3));
        orders.sort();
        orders.dedup();
    }
    let nonempty: Vec<_> = orders.into_iter().filter(|o| !o.is_empty()).collect();
    assert_eq!(nonempty.len(), 3 + 9 + 27);
    for order in nonempty {
        let spec = ScheduleSpec::new(3, order.clone()).unwrap();
        let c = synth::schedule_circuit(&spec).unwrap();
        let sim = qsim::run(&c).unwrap().marginal(&c.layout().measured()).unwrap();
        let oracle = verify::oracle_distribution(&spec, None).unwrap();
        let r = verify::compare_distributions(&oracle, &sim, 1e-9).unwrap();
        assert!(r.pass, "{order:?}");
    }
}

#[test]
fn repeated_rule_matches_double_application() {
    let spec = ScheduleSpec::new(3, vec![1, 1]).unwrap();
    let c = synth::schedule_circuit(&spec).unwrap();
    let sim = qsim::run(&c).unwrap().marginal(&c.layout().measured()).unwrap();
    let mut dense = [0.0; 8];
    for x in RingConfig::all(3).unwrap() {
        let mut y = x;
        for _ in 0..2 {
            if y.is_privileged(1).unwrap() {
                y = y.apply_move(1).unwrap();
            }
        }
        dense[y.index() as usize] += 0.125;
    }
    for (k, p) in dense.iter().enumerate() {
        assert!((sim.get(&qsim::bitstring(k, 3)) - p).abs() < 1e-9);
    }
}
