use arctic_core::market::PhaseType;
use arctic_core::rational::{int, ratio};
use arctic_core::solver::{EventKind, PhaseStart, SolverState, Step};
use arctic_core::{
    check_invariant, generate_random_instance, solve, solve_with, verify_arctic_kkt, verify_market_clearing,
    MarketInstance, Rational, SolverOptions,
};
use proptest::prelude::*;

fn ints(money: &[i64], u: &[Vec<i64>]) -> MarketInstance {
    MarketInstance::from_ints(money, u).unwrap()
}

fn all(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn checked(inst: &MarketInstance) -> arctic_core::Equilibrium {
    let out = solve_with(inst, &SolverOptions::traced()).unwrap();
    let eq = out.equilibrium;
    assert!(verify_arctic_kkt(inst, &eq).unwrap().overall);
    assert!(verify_market_clearing(inst, &eq).overall);
    assert!(out.stats.termination_cut_min);
    eq
}

#[test]
fn single_pair_is_clearing_forced() {
    let eq = checked(&ints(&[1], &[vec![2]]));
    assert_eq!(eq.prices, all(&[1]));
    assert_eq!(eq.allocation, vec![all(&[1])]);
    assert_eq!(eq.returned, all(&[0]));
    assert_eq!(eq.alpha, all(&[2]));
}

#[test]
fn low_utility_buyer_gets_half_back() {
    let inst = MarketInstance::from_ratios(&[(1, 1)], &[vec![(1, 2)]]).unwrap();
    let out = solve_with(&inst, &SolverOptions::traced()).unwrap();
    let eq = &out.equilibrium;
    assert_eq!(eq.prices, vec![ratio(1, 2)]);
    assert_eq!(eq.allocation, vec![all(&[1])]);
    assert_eq!(eq.returned, vec![ratio(1, 2)]);
    assert_eq!(eq.alpha, all(&[1]));
    assert!(out.stats.phase_types.type3 >= 1);
}

#[test]
fn symmetric_pair_splits_diagonally() {
    let eq = checked(&ints(&[1, 1], &[vec![2, 1], vec![1, 2]]));
    assert_eq!(eq.prices, all(&[1, 1]));
    assert_eq!(eq.allocation, vec![all(&[1, 0]), all(&[0, 1])]);
    assert_eq!(eq.returned, all(&[0, 0]));
}

#[test]
fn surplus_money_beyond_unit_prices_is_returned() {
    let eq = checked(&ints(&[3], &[vec![1, 1]]));
    assert_eq!(eq.prices, all(&[1, 1]));
    assert_eq!(eq.allocation, vec![all(&[1, 1])]);
    assert_eq!(eq.returned, all(&[1]));
}

#[test]
fn covered_buyer_is_fully_refunded() {
    // start price 1 leaves buyer 0 indifferent; buyer 1's money alone pays
    // for the good, so buyer 0 gets everything back
    let inst = ints(&[2, 1], &[vec![1], vec![2]]);
    let out = solve_with(&inst, &SolverOptions::traced()).unwrap();
    let eq = &out.equilibrium;
    assert!(verify_arctic_kkt(&inst, eq).unwrap().overall);
    assert_eq!(eq.prices, all(&[1]));
    assert_eq!(eq.returned, all(&[2, 0]));
    assert_eq!(eq.allocation, vec![all(&[0]), all(&[1])]);
    assert_eq!(out.stats.phase_types.type2, 1);
}

#[test]
fn zero_degree_buyer_leaves_silently() {
    // buyer 0 is indifferent from the start and loses its edge to the
    // richer buyer, then exits with a full refund without a phase ending
    let inst = ints(&[1, 5], &[vec![1], vec![2]]);
    let out = solve_with(&inst, &SolverOptions::traced()).unwrap();
    let eq = &out.equilibrium;
    assert!(verify_arctic_kkt(&inst, eq).unwrap().overall);
    assert_eq!(eq.prices, all(&[2]));
    assert_eq!(eq.returned, all(&[1, 3]));
    assert_eq!(eq.allocation, vec![all(&[0]), all(&[1])]);
    let trace = out.trace.unwrap();
    assert!(trace.rows.iter().any(|r| r.event.to_string() == "z_removal:b0"));
    assert_eq!(out.stats.phase_types.type2, 0);
}

#[test]
fn initial_prices_split_money() {
    let inst = ints(&[1], &[vec![1, 1]]);
    let st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    assert_eq!(st.prices, vec![ratio(1, 2), ratio(1, 2)]);
}

#[test]
fn unwanted_good_is_lowered_to_its_bang_per_buck() {
    let inst = ints(&[1], &[vec![4, 1]]);
    let st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    assert_eq!(st.prices, vec![ratio(1, 2), ratio(1, 8)]);
    assert_eq!(st.alphas(), vec![int(8)]);
    assert_eq!(st.edges(), vec![(0, 0), (1, 0)]);
}

#[test]
fn invariant_holds_after_initialize() {
    for seed in 0..200 {
        let inst = generate_random_instance(seed, 1 + seed as usize % 5, 1 + (seed as usize / 5) % 5, 9);
        let st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
        assert!(check_invariant(&st.network(None)), "seed {seed}");
        assert!(st.alphas().iter().all(|a| a >= &int(1)), "seed {seed}");
    }
}

#[test]
fn equal_surplus_makes_everyone_active() {
    let inst = ints(&[1, 1], &[vec![2, 1], vec![1, 2]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    assert_eq!(st.begin_phase().unwrap(), PhaseStart::Started);
    assert_eq!(st.active_buyers, vec![0, 1]);
    assert!(st.zero_degree.is_empty());
}

#[test]
fn richest_isolated_buyer_is_alone() {
    let inst = ints(&[2, 1], &[vec![2, 0], vec![0, 2]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    st.begin_phase().unwrap();
    assert_eq!(st.active_buyers, vec![0]);
    assert_eq!(st.active_goods, vec![0]);
}

#[test]
fn pruned_buyer_lands_in_zero_degree_set() {
    // one good at 1: the balanced flow gives all of it to buyer 0
    // (surpluses 2 and 1), buyer 0 alone is active and buyer 1 loses its
    // only edge
    let inst = ints(&[3, 1], &[vec![1], vec![1]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    st.begin_phase().unwrap();
    assert_eq!(st.active_buyers, vec![0]);
    assert_eq!(st.zero_degree, vec![1]);
    assert_eq!(st.edges(), vec![(0, 0)]);
}

#[test]
fn cleared_start_needs_no_phase() {
    // start price min(1, 2) = 1 already spends all the money
    let inst = ints(&[1], &[vec![2]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    assert_eq!(st.begin_phase().unwrap(), PhaseStart::Terminated);
    assert_eq!(st.finish().1.phase_count, 0);
}

#[test]
fn tight_set_at_worth_over_price() {
    // p = 1, buyer 1 takes the good (surpluses 1 and 2) and alone is
    // active; the good is paid for when 1·θ = 3, before α = 4/θ reaches 1
    let inst = ints(&[1, 3], &[vec![4], vec![4]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    st.begin_phase().unwrap();
    assert_eq!(st.active_buyers, vec![1]);
    let ev = st.next_event().unwrap();
    assert_eq!(ev.kind, EventKind::TightSet { goods: vec![0] });
    assert_eq!(ev.theta, int(3));
    assert_eq!(st.apply_event(&ev).unwrap(), Step::PhaseEnded(PhaseType::TightSet));
    assert_eq!(st.prices, all(&[3]));
}

#[test]
fn new_edge_fires_where_bang_per_buck_meet() {
    // buyer 0 has all the money; its second good becomes as good as the
    // first once the first has doubled
    let inst = ints(&[8, 1], &[vec![2, 1], vec![0, 1]]);
    let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
    st.begin_phase().unwrap();
    assert_eq!(st.active_buyers, vec![0]);
    let ev = st.next_event().unwrap();
    let p = st.base_prices.clone();
    match ev.kind {
        EventKind::NewEdge { buyer: 0, good: 1 } => {
            assert_eq!(&int(2) / (&p[0] * &ev.theta), &int(1) / &p[1]);
        }
        other => panic!("expected a new edge, got {other}"),
    }
}

#[test]
fn stepping_by_hand_matches_solve() {
    for seed in 0..40 {
        let inst = generate_random_instance(seed, 3, 3, 7);
        let mut st = SolverState::initialize(&inst, SolverOptions::default()).unwrap();
        while st.begin_phase().unwrap() == PhaseStart::Started {
            loop {
                let ev = st.next_event().unwrap();
                assert!(ev.theta >= st.theta, "seed {seed}: event behind θ");
                if let Step::PhaseEnded(_) = st.apply_event(&ev).unwrap() {
                    break;
                }
            }
            assert!(check_invariant(&st.network(None)), "seed {seed}");
        }
        let (eq, stats, _) = st.finish();
        let (eq2, stats2) = solve(&inst).unwrap();
        assert_eq!(eq, eq2, "seed {seed}");
        assert_eq!(stats.phase_count, stats2.phase_count);
    }
}

#[test]
fn type_two_phases_are_at_most_n() {
    for seed in 0..100 {
        let n = 1 + seed as usize % 6;
        let inst = generate_random_instance(seed, n, 1 + seed as usize % 4, 10);
        let (_, stats) = solve(&inst).unwrap();
        assert!(stats.phase_types.type2 <= n, "seed {seed}");
        let t = &stats.phase_types;
        assert_eq!(t.type1 + t.type2 + t.type3, stats.phase_count);
        assert_eq!(stats.potential_trace.len(), stats.phase_count);
    }
}

#[test]
fn phase_limit_is_a_contract_error() {
    let inst = generate_random_instance(3, 4, 4, 10);
    let opts = SolverOptions { max_phases: 0, ..SolverOptions::default() };
    assert!(matches!(solve_with(&inst, &opts), Err(arctic_core::Error::Contract(_))));
}

#[test]
fn invalid_instance_is_rejected() {
    let inst = MarketInstance::new(vec![int(1)], vec![vec![int(0)]]);
    assert!(inst.is_err() || solve(&inst.unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_satisfies_optimality(seed in 0u64..1_000_000, n in 1usize..5, m in 1usize..5, max in 1i64..12) {
        let inst = generate_random_instance(seed, n, m, max);
        let out = solve_with(&inst, &SolverOptions::traced()).unwrap();
        let report = verify_arctic_kkt(&inst, &out.equilibrium).unwrap();
        prop_assert!(report.overall, "{:?}", report.failed());
        prop_assert!(verify_market_clearing(&inst, &out.equilibrium).overall);
        prop_assert!(out.stats.potential_trace.iter().all(|r| r.invariant_held));
        for r in &out.stats.potential_trace {
            if r.phase_type != PhaseType::FullReturn {
                prop_assert!(r.phi_after <= r.phi_before);
            }
        }
    }
}
