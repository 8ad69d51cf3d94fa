use evento_core::{
    enumerate_terraces, event_from_terraces, indicator_event, indicator_policy, zeta, DerivedEvent,
    EventFamily, PolicyMap, TerraceSet,
};
use proptest::prelude::*;

fn family(n: usize, prefix: &str) -> EventFamily {
    EventFamily::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn selection(mask: u64, terraces: usize) -> Vec<u32> {
    (0..terraces as u32).filter(|t| mask & (1 << t) != 0).collect()
}

#[test]
fn reconstruction_roundtrip_is_exact_up_to_four_events() {
    for n in 1..=4 {
        let fam = family(n, "f");
        let terraces = fam.subset_count();
        for mask in 0..(1u64 << terraces) {
            let selected = selection(mask, terraces);
            let event = event_from_terraces(&fam, &selected).unwrap();
            let recovered: Vec<u32> = enumerate_terraces(&fam)
                .iter()
                .filter(|f| indicator_event(&event, f).unwrap() == 1)
                .map(|f| f.bits())
                .collect();
            assert_eq!(recovered, selected);
            assert_eq!(event.terraces().collect::<Vec<_>>(), selected);
            assert_eq!(event_from_terraces(&fam, &recovered).unwrap(), event);
        }
    }
}

#[test]
fn partition_property() {
    for n in 1..=8 {
        let fam = family(n, "f");
        let ts = enumerate_terraces(&fam);
        assert_eq!(ts.len(), 1 << n);
        for (i, t) in ts.iter().enumerate() {
            assert_eq!(t.bits() as usize, i);
        }
        // every outcome pattern of the n events lands in exactly one terrace
        for pattern in 0..(1u32 << n) {
            let hits = ts.iter().filter(|t| zeta(&fam.set(pattern).unwrap(), *t).unwrap() == 1);
            assert_eq!(hits.count(), 1);
        }
    }
}

#[test]
fn zeta_is_a_partial_order_up_to_three_events() {
    for n in 1..=3 {
        let fam = family(n, "f");
        let terraces = fam.subset_count();
        let events: Vec<DerivedEvent> = (0..(1u64 << terraces))
            .map(|m| event_from_terraces(&fam, &selection(m, terraces)).unwrap())
            .collect();
        let k = events.len();
        let mut table = vec![0u8; k * k];
        for (i, a) in events.iter().enumerate() {
            for (j, b) in events.iter().enumerate() {
                table[i * k + j] = zeta(a, b).unwrap();
                assert_eq!(table[i * k + j] == 1, a.subset_of(b));
            }
        }
        for i in 0..k {
            assert_eq!(table[i * k + i], 1, "reflexive");
            for j in 0..k {
                if i != j && table[i * k + j] == 1 {
                    assert_eq!(table[j * k + i], 0, "antisymmetric");
                }
                if table[i * k + j] == 1 {
                    for l in 0..k {
                        if table[j * k + l] == 1 {
                            assert_eq!(table[i * k + l], 1, "transitive");
                        }
                    }
                }
            }
        }
    }
}

/// Σ_{D ∋ d} 1_D(F) = 1_d(F) where d is the decision event induced by the policy.
fn check_indicator_relation(policy: &PolicyMap) {
    let cf = policy.circumstance_family();
    let df = policy.decision_family();
    for d in 0..df.size() {
        let event = policy.decision_event(d).unwrap();
        for f in enumerate_terraces(cf) {
            let lhs: u32 = enumerate_terraces(df)
                .iter()
                .filter(|set| set.contains(d))
                .map(|set| indicator_policy(policy, set, &f).unwrap() as u32)
                .sum();
            assert_eq!(lhs, indicator_event(&event, &f).unwrap() as u32);
        }
    }
}

#[test]
fn indicator_relation_for_all_small_policies() {
    // every policy where the count stays manageable
    for nd in 1..=3 {
        for nf in 1..=2 {
            let df = family(nd, "d");
            let cf = family(nf, "f");
            let choices = df.subset_count() as u64;
            let rows = cf.subset_count() as u32;
            for code in 0..choices.pow(rows) {
                let policy = PolicyMap::from_fn(&cf, &df, |f| {
                    (code / choices.pow(f) % choices) as u32
                })
                .unwrap();
                check_indicator_relation(&policy);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5EED),
        ..ProptestConfig::default()
    })]
    #[test]
    fn indicator_relation_for_random_policies(
        nd in 1usize..=3,
        nf in 1usize..=4,
        seed in prop::collection::vec(any::<u32>(), 16),
    ) {
        let df = family(nd, "d");
        let cf = family(nf, "f");
        let policy = PolicyMap::from_fn(&cf, &df, |f| seed[f as usize] & df.full_mask()).unwrap();
        check_indicator_relation(&policy);
    }

    #[test]
    fn indicator_counts_match_terraces(n in 1usize..=6, picks in prop::collection::vec(any::<u32>(), 0..40)) {
        let fam = family(n, "f");
        let selected: Vec<u32> = picks.iter().map(|p| p & fam.full_mask()).collect();
        let event = event_from_terraces(&fam, &selected).unwrap();
        let total: usize = enumerate_terraces(&fam)
            .iter()
            .map(|f| indicator_event(&event, f).unwrap() as usize)
            .sum();
        prop_assert_eq!(total, event.terrace_count());
        prop_assert_eq!(zeta(&event, &DerivedEvent::omega(&fam)).unwrap(), 1);
        prop_assert_eq!(zeta(&DerivedEvent::empty(&fam), &event).unwrap(), 1);
    }
}
