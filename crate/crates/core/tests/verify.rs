use arctic_core::market::parse_equilibrium;
use arctic_core::rational::{int, ratio};
use arctic_core::{
    generate_random_instance, oracle_solve, serialize_equilibrium, solve, verify_arctic_kkt, verify_market_clearing,
    Equilibrium, KktReport, MarketInstance, Rational,
};
use num_traits::{Signed, Zero};

fn seeded(k: u64) -> MarketInstance {
    generate_random_instance(500 + k, 1 + k as usize % 3, 1 + (k as usize / 3) % 3, 6)
}

fn assert_caught(report: &KktReport, what: &str) {
    assert!(!report.overall, "{what} slipped through");
    for c in report.failed() {
        assert!(!c.residual.is_zero(), "{what}: {} failed with zero residual", c.name);
        assert!(!c.detail.is_empty(), "{what}: {} failed without detail", c.name);
    }
}

fn rebuilt(inst: &MarketInstance, eq: &Equilibrium, f: impl FnOnce(&mut Vec<Rational>, &mut Vec<Vec<Rational>>, &mut Vec<Rational>)) -> Equilibrium {
    let (mut p, mut x, mut s) = (eq.prices.clone(), eq.allocation.clone(), eq.returned.clone());
    f(&mut p, &mut x, &mut s);
    Equilibrium::assemble(inst, p, x, s)
}

#[test]
fn oracle_points_pass_without_violations() {
    for k in 0..30 {
        let inst = seeded(k);
        let eq = oracle_solve(&inst).unwrap();
        let r = verify_arctic_kkt(&inst, &eq).unwrap();
        assert!(r.overall, "seed {k}: {:?}", r.failed());
        assert!(r.condition_results.iter().all(|c| !c.residual.is_positive()), "seed {k}");
        assert!(r.statements_ok() && r.trichotomy_ok(), "seed {k}");
        assert!(verify_market_clearing(&inst, &eq).overall, "seed {k}");
    }
}

#[test]
fn single_perturbations_are_caught() {
    let bump = ratio(1, 7);
    for k in 0..30 {
        let inst = seeded(k);
        let eq = solve(&inst).unwrap().0;
        let (n, m) = (inst.num_buyers(), inst.num_goods());
        for j in 0..m {
            let e = rebuilt(&inst, &eq, |p, _, _| p[j] += &bump);
            assert_caught(&verify_arctic_kkt(&inst, &e).unwrap(), &format!("seed {k}: price {j} up"));
        }
        for i in 0..n {
            let e = rebuilt(&inst, &eq, |_, _, s| s[i] += &bump);
            assert_caught(&verify_arctic_kkt(&inst, &e).unwrap(), &format!("seed {k}: refund {i} up"));
            if eq.returned[i].is_positive() {
                let e = rebuilt(&inst, &eq, |_, _, s| s[i] = Rational::zero());
                assert_caught(&verify_arctic_kkt(&inst, &e).unwrap(), &format!("seed {k}: refund {i} dropped"));
            }
            for j in 0..m {
                if eq.allocation[i][j].is_positive() {
                    let e = rebuilt(&inst, &eq, |_, x, _| x[i][j] = &x[i][j] / int(2));
                    assert_caught(&verify_arctic_kkt(&inst, &e).unwrap(), &format!("seed {k}: x[{i}][{j}] halved"));
                }
            }
        }
    }
}

#[test]
fn wrong_ratio_names_condition_six() {
    let inst = MarketInstance::from_ratios(&[(1, 1)], &[vec![(1, 2)]]).unwrap();
    let e = Equilibrium::assemble(&inst, vec![ratio(3, 5)], vec![vec![int(1)]], vec![ratio(1, 2)]);
    let r = verify_arctic_kkt(&inst, &e).unwrap();
    let c6 = r.kkt_condition(6).unwrap();
    assert!(!c6.passed);
    assert_eq!(c6.name, "bought_at_best_ratio");
}

#[test]
fn serialized_solutions_round_trip_and_still_verify() {
    for k in 0..20 {
        let inst = seeded(k);
        let (eq, stats) = solve(&inst).unwrap();
        let text = serialize_equilibrium(&eq, &stats);
        let back = parse_equilibrium(&text).unwrap();
        assert_eq!(back, eq, "seed {k}");
        assert!(verify_arctic_kkt(&inst, &back).unwrap().overall);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(doc["prices"].as_array().unwrap().iter().all(|v| v.is_string()));
    }
}

#[test]
fn clearing_catches_halved_allocation() {
    let inst = generate_random_instance(4, 3, 3, 8);
    let eq = solve(&inst).unwrap().0;
    let half = rebuilt(&inst, &eq, |_, x, _| {
        for row in x.iter_mut() {
            for v in row.iter_mut() {
                *v = &*v / int(2);
            }
        }
    });
    assert!(!verify_market_clearing(&inst, &half).overall);
}
