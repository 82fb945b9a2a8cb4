use std::sync::Arc;

use proptest::prelude::*;

use scenario_cover::generate::{desk_spec, generate, Base, Family, GenSpec, Wrap};
use scenario_cover::instance_file::InstanceFile;
use scenario_cover::minsum::{truncate, Schedule};
use scenario_cover::mixed::mixed_greedy;
use scenario_cover::model::{PartialRealization, ScenarioInstance, State};
use scenario_cover::oracle::{optimal_cost_plain, optimal_tree, OracleLimits};
use scenario_cover::par::Parallelism;
use scenario_cover::rational::{int, ratio, Rational};
use scenario_cover::utility::{
    check_adaptive_submodular_with, check_monotone, check_submodular, compute_rho_with, make_gw,
    RhoScope, DEFAULT_ENUMERATION_LIMIT,
};

fn partial(n: usize, k: u8) -> impl Strategy<Value = PartialRealization> {
    prop::collection::vec(prop::option::of(0..k), n).prop_map(PartialRealization::from_entries)
}

fn family() -> impl Strategy<Value = Family> {
    (
        prop_oneof![Just(Base::Coverage), Just(Base::KOfN)],
        prop_oneof![Just(Wrap::None), Just(Wrap::GS), Just(Wrap::GW)],
    )
        .prop_map(|(base, wrap)| Family { base, wrap })
}

fn instance(max_n: usize) -> impl Strategy<Value = ScenarioInstance> {
    (any::<u64>(), 1..=max_n, 2usize..=3, 1usize..=6, family()).prop_map(
        |(seed, n, states, m, family)| {
            let spec = GenSpec {
                states,
                sample_size: m,
                ..GenSpec::new(seed, n, family)
            };
            generate(&spec).unwrap().build().unwrap()
        },
    )
}

fn schedule() -> impl Strategy<Value = Schedule> {
    prop::collection::vec((0usize..6, 1i64..=12), 0..6).prop_map(|pairs| {
        Schedule::new(pairs.into_iter().map(|(i, q)| (i, ratio(q, 4))).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extend_is_an_extension(b in partial(5, 3), i in 0usize..5, s in 0u8..3) {
        match b.extend(i, s) {
            Ok(next) => {
                prop_assert!(b.get(i).is_none());
                prop_assert!(next.is_extension_of(&b).unwrap());
                prop_assert!(!b.is_extension_of(&next).unwrap());
                prop_assert_eq!(next.num_set(), b.num_set() + 1);
                prop_assert!(next.extend(i, s).is_err());
            }
            Err(_) => prop_assert!(b.get(i).is_some()),
        }
    }

    #[test]
    fn extension_is_a_partial_order(a in partial(4, 2), b in partial(4, 2), c in partial(4, 2)) {
        prop_assert!(a.is_extension_of(&a).unwrap());
        if a.is_extension_of(&b).unwrap() && b.is_extension_of(&a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if a.is_extension_of(&b).unwrap() && b.is_extension_of(&c).unwrap() {
            prop_assert!(a.is_extension_of(&c).unwrap());
        }
        prop_assert!(a.is_extension_of(&PartialRealization::empty(4)).unwrap());
    }

    #[test]
    fn scaling_weights_keeps_expected_cost(inst in instance(4), factor in 2u64..6) {
        let tree = mixed_greedy(&inst).unwrap();
        let scaled = ScenarioInstance::new(
            inst.utility().clone(),
            Arc::new(inst.sample().scaled(factor).unwrap()),
            inst.costs().clone(),
            inst.alphabet().clone(),
        ).unwrap();
        prop_assert_eq!(inst.expected_cost(&tree).unwrap(), scaled.expected_cost(&tree).unwrap());
    }

    #[test]
    fn truncation(s in schedule(), num in 0i64..64) {
        let t = ratio(num, 4);
        let once = truncate(&s, &t).unwrap();
        prop_assert_eq!(&truncate(&once, &t).unwrap(), &once);
        if !s.is_empty() && t <= s.length() {
            prop_assert_eq!(once.length(), t.clone());
        } else {
            prop_assert_eq!(&once, &s);
        }
        prop_assert!(truncate(&s, &int(-1)).is_err());
    }

    #[test]
    fn memo_oracle_matches_plain(inst in instance(4)) {
        let (tree, c_star) = optimal_tree(&inst).unwrap();
        prop_assert_eq!(optimal_cost_plain(&inst, OracleLimits::default()).unwrap(), c_star.clone());
        prop_assert_eq!(inst.expected_cost(&tree).unwrap(), c_star.clone());
        let greedy = inst.expected_cost(&mixed_greedy(&inst).unwrap()).unwrap();
        prop_assert!(greedy >= c_star);
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let file = generate(&desk_spec(seed)).unwrap();
        let text = file.emit();
        let back = InstanceFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.emit(), text);
    }

    #[test]
    fn generated_utilities_are_monotone_submodular(inst in instance(4)) {
        prop_assert!(check_monotone(&**inst.utility()).unwrap().holds());
        prop_assert!(check_submodular(&**inst.utility()).unwrap().holds());
    }

    #[test]
    fn checkers_agree_across_schedules(inst in instance(4)) {
        let g = &**inst.utility();
        let gw = make_gw(inst.utility().clone(), inst.sample().clone()).unwrap();
        let seq = check_adaptive_submodular_with(&*gw, inst.sample(), DEFAULT_ENUMERATION_LIMIT, Parallelism::Sequential).unwrap();
        let par = check_adaptive_submodular_with(&*gw, inst.sample(), DEFAULT_ENUMERATION_LIMIT, Parallelism::Rayon).unwrap();
        prop_assert_eq!(seq, par);
        let seq = compute_rho_with(g, RhoScope::Full, DEFAULT_ENUMERATION_LIMIT, Parallelism::Sequential);
        let par = compute_rho_with(g, RhoScope::Full, DEFAULT_ENUMERATION_LIMIT, Parallelism::Rayon);
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn restricted_rho_never_undercuts(inst in instance(4)) {
        let g = &**inst.utility();
        let full = compute_rho_with(g, RhoScope::Full, DEFAULT_ENUMERATION_LIMIT, Parallelism::Sequential);
        let reach = compute_rho_with(g, RhoScope::SampleReachable(inst.sample()), DEFAULT_ENUMERATION_LIMIT, Parallelism::Sequential);
        if let (Ok(full), Ok(reach)) = (full, reach) {
            prop_assert!(reach.rho >= full.rho);
            prop_assert!(!reach.exact);
        }
    }
}

#[test]
fn witness_reproduces_rho() {
    for seed in 0..20 {
        let inst = generate(&desk_spec(seed)).unwrap().build().unwrap();
        let g = &**inst.utility();
        let Ok(r) = compute_rho_with(
            g,
            RhoScope::Full,
            DEFAULT_ENUMERATION_LIMIT,
            Parallelism::Rayon,
        ) else {
            continue;
        };
        let before = g.eval(&r.witness_b);
        let after = g.eval(
            &r.witness_b
                .extend(r.witness_item, r.witness_state as State)
                .unwrap(),
        );
        let expect = Rational::new(
            ((after - before) as i64).into(),
            ((g.goal() - before) as i64).into(),
        );
        assert_eq!(expect, r.rho, "seed {seed}");
    }
}
