use evento_core::edist::{
    compose_full_probability, conditional, estimate_edist, estimate_joint, marginalize,
    pushforward_policy, relative_entropy, Axis, ConditionalEDistribution, EDistribution,
};
use evento_core::{EventFamily, EventSet, PolicyMap};
use proptest::prelude::*;

fn family(n: usize, prefix: &str) -> EventFamily {
    EventFamily::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn sets(family: &EventFamily, masks: &[u32]) -> Vec<EventSet> {
    masks.iter().map(|&m| family.set(m & family.full_mask()).unwrap()).collect()
}

fn normalized(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn constant_series_give_a_point_mass_joint() {
    let df = family(2, "d");
    let cf = family(3, "f");
    let joint = estimate_joint::<f64>(&sets(&df, &[2; 5]), &sets(&cf, &[5; 5])).unwrap();
    assert_eq!(joint.prob(2, 5), 1.0);
    assert_eq!(joint.probs().iter().filter(|&&p| p > 0.0).count(), 1);
    let p = marginalize(&joint, Axis::Decisions);
    assert_eq!(p, EDistribution::point_mass(&df, 2).unwrap());
}

#[test]
fn deterministic_coupling_gives_singular_rows() {
    let df = family(2, "d");
    let cf = family(2, "f");
    let fs = [0u32, 1, 2, 3, 1, 1, 2];
    let ds: Vec<u32> = fs.iter().map(|f| (f + 1) % 4).collect();
    let joint = estimate_joint::<f64>(&sets(&df, &ds), &sets(&cf, &fs)).unwrap();
    let cond = conditional(&joint);
    for f in 0..4u32 {
        let row = cond.row(f).unwrap();
        assert_eq!(row[((f + 1) % 4) as usize], 1.0);
    }
}

#[test]
fn pushforward_equals_singular_composition_for_every_policy() {
    // exhaustive over all policies for |D|, |F| <= 2 and |D| = 3, |F| = 1..2
    for nd in 1..=3 {
        for nf in 1..=2 {
            let df = family(nd, "d");
            let cf = family(nf, "f");
            let p = EDistribution::new(
                cf.clone(),
                normalized(&(0..cf.subset_count()).map(|i| (i * 7 % 5 + 1) as f64).collect::<Vec<_>>()),
            )
            .unwrap();
            let choices = df.subset_count() as u64;
            for code in 0..choices.pow(cf.subset_count() as u32) {
                let policy =
                    PolicyMap::from_fn(&cf, &df, |f| (code / choices.pow(f) % choices) as u32).unwrap();
                let direct = pushforward_policy(&p, &policy).unwrap();
                let composed =
                    compose_full_probability(&ConditionalEDistribution::singular(&policy), &p).unwrap();
                assert!(max_abs_diff(direct.probs(), composed.probs()) < 1e-12);
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
    fn chain_identity(
        nd in 1usize..=3,
        nf in 1usize..=3,
        pairs in prop::collection::vec((any::<u32>(), any::<u32>()), 1..=32),
    ) {
        let df = family(nd, "d");
        let cf = family(nf, "f");
        let ds = sets(&df, &pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let cs = sets(&cf, &pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let joint = estimate_joint::<f64>(&ds, &cs).unwrap();
        let q_direct: EDistribution<f64> = estimate_edist(&ds).unwrap();
        let p: EDistribution<f64> = estimate_edist(&cs).unwrap();
        // marginals recover the one-dimensional estimates
        prop_assert!(max_abs_diff(marginalize(&joint, Axis::Decisions).probs(), q_direct.probs()) < 1e-15);
        prop_assert!(max_abs_diff(marginalize(&joint, Axis::Circumstances).probs(), p.probs()) < 1e-15);
        let q = compose_full_probability(&conditional(&joint), &p).unwrap();
        prop_assert!(max_abs_diff(q.probs(), q_direct.probs()) < 1e-12);
        // counts: multiply back by the record count to compare as integers
        let n = pairs.len() as f64;
        for (a, b) in q.probs().iter().zip(q_direct.probs()) {
            prop_assert_eq!((a * n).round(), (b * n).round());
        }
    }

    #[test]
    fn conditional_rows_are_normalized(
        weights in prop::collection::vec(0u32..5, 16),
    ) {
        prop_assume!(weights.iter().any(|&w| w > 0));
        let df = family(2, "d");
        let cf = family(2, "f");
        let total: u32 = weights.iter().sum();
        let probs = weights.iter().map(|&w| w as f64 / total as f64).collect();
        let joint = evento_core::edist::JointEDistribution::new(df, cf, probs).unwrap();
        let cond = conditional(&joint);
        let p = marginalize(&joint, Axis::Circumstances);
        for f in 0..4u32 {
            match cond.row(f) {
                Some(row) => prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12),
                None => prop_assert_eq!(p.prob(f), 0.0),
            }
        }
    }

    #[test]
    fn gibbs_inequality(
        n in 1usize..=4,
        a in prop::collection::vec(0.0f64..1.0, 16),
        b in prop::collection::vec(0.01f64..1.0, 16),
    ) {
        let fam = family(n, "x");
        let k = fam.subset_count();
        prop_assume!(a[..k].iter().sum::<f64>() > 0.0);
        let p = EDistribution::new(fam.clone(), normalized(&a[..k])).unwrap();
        let q = EDistribution::new(fam, normalized(&b[..k])).unwrap();
        let h = relative_entropy(&p, &q).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert_eq!(relative_entropy(&q, &q).unwrap(), 0.0);
        if max_abs_diff(p.probs(), q.probs()) > 1e-3 {
            prop_assert!(h > 1e-9);
        }
    }
}
