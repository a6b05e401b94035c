//! Property tests for the structural invariants: simplex preservation,
//! entropy additivity, split/recombine identities, serialization round
//! trips and search monotonicity.

use belldistill::*;
use proptest::prelude::*;

fn prob_vector(m: usize) -> impl Strategy<Value = BlockDist> {
    let len = 1usize << (2 * m);
    proptest::collection::vec(1e-6..1.0f64, len).prop_map(move |raw| {
        let total: f64 = raw.iter().sum();
        BlockDist::new(m, raw.into_iter().map(|x| x / total).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn pushforward_preserves_simplex_and_entropy(
        d in prob_vector(2),
        pick in 0usize..720,
        t in 0u32..16,
    ) {
        let group = enumerate_label_maps(2).unwrap();
        let linear = &group[pick % group.len()];
        let g = LabelMap::new(2, linear.linear().clone(), t).unwrap();
        let out = apply_label_map(&g, &d).unwrap();
        let total: f64 = out.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
        prop_assert!((out.entropy_bits() - d.entropy_bits()).abs() < 1e-12);
    }

    #[test]
    fn tensor_is_associative_and_entropy_additive(
        a in prob_vector(1),
        b in prob_vector(1),
        c in prob_vector(1),
    ) {
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert_eq!(left.pairs(), right.pairs());
        for (x, y) in left.probs().iter().zip(right.probs()) {
            prop_assert!((x - y).abs() < 1e-15);
        }
        let sum = a.entropy_bits() + b.entropy_bits() + c.entropy_bits();
        prop_assert!((left.entropy_bits() - sum).abs() < 1e-12);
    }

    #[test]
    fn parity_split_recombines_and_obeys_chain_rule(
        d in prob_vector(2),
        bits in 1u32..16,
    ) {
        let mask = ParityMask::new(2, bits).unwrap();
        let split = parity_split(&d, &mask).unwrap();
        prop_assert!((split.mu0 + split.mu1 - 1.0).abs() < 1e-12);
        let mut chain = split.cost;
        for idx in 0..16u32 {
            let mut mixed = 0.0;
            if let Some(b0) = &split.branch0 {
                mixed += split.mu0 * b0.prob(idx);
            }
            if let Some(b1) = &split.branch1 {
                mixed += split.mu1 * b1.prob(idx);
            }
            prop_assert!((mixed - d.prob(idx)).abs() < 1e-12);
        }
        if let Some(b0) = &split.branch0 {
            chain += split.mu0 * b0.entropy_bits();
        }
        if let Some(b1) = &split.branch1 {
            chain += split.mu1 * b1.entropy_bits();
        }
        prop_assert!((chain - d.entropy_bits()).abs() < 1e-12);
    }

    #[test]
    fn measurement_outcomes_mix_back_to_marginals(
        d in prob_vector(2),
        pair in 0usize..2,
    ) {
        let out = bell_measure(&d, pair, MeasuredBit::Phase).unwrap();
        prop_assert!((out.q0 + out.q1 - 1.0).abs() < 1e-12);
        let keep = 1 - pair;
        for rest in 0..4u32 {
            let direct: f64 = (0..4u32)
                .map(|dropped| {
                    let idx = if keep == 0 { rest << 2 | dropped } else { dropped << 2 | rest };
                    d.prob(idx)
                })
                .sum();
            let mut mixed = 0.0;
            if let Some(r) = &out.r0 {
                mixed += out.q0 * r.prob(rest);
            }
            if let Some(r) = &out.r1 {
                mixed += out.q1 * r.prob(rest);
            }
            prop_assert!((mixed - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn two_copy_rate_never_below_hashing(d in prob_vector(1)) {
        let d2c = rate_2copy(&d).unwrap();
        let hash = 1.0 - d.entropy_bits();
        prop_assert!(d2c >= hash - 1e-15);
    }

    #[test]
    fn block_dist_text_round_trip(d in prob_vector(2)) {
        let text = d.to_text();
        let back = BlockDist::from_text(&text).unwrap();
        prop_assert_eq!(&d, &back);
        prop_assert_eq!(text, back.to_text());
    }
}

fn leaf() -> impl Strategy<Value = ProtocolNode> {
    prop_oneof![Just(ProtocolNode::Hash), Just(ProtocolNode::Discard)]
}

fn tree_strategy() -> impl Strategy<Value = ProtocolNode> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (1u32..16, inner.clone(), inner.clone()).prop_map(|(bits, c0, c1)| {
                ProtocolNode::parity_check(ParityMask::new(2, bits).unwrap(), c0, c1)
            }),
            (0usize..2, any::<bool>(), inner.clone(), inner.clone()).prop_map(
                |(pair, amp, c0, c1)| {
                    let which = if amp { MeasuredBit::Amp } else { MeasuredBit::Phase };
                    ProtocolNode::measure(pair, which, c0, c1)
                }
            ),
            (0usize..720, 0u32..16, inner).prop_map(|(pick, t, child)| {
                let group = enumerate_label_maps(2).unwrap();
                let map =
                    LabelMap::new(2, group[pick % group.len()].linear().clone(), t).unwrap();
                ProtocolNode::relabel(map, child)
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn protocol_tree_text_round_trip(tree in tree_strategy()) {
        let text = tree.to_text();
        let back = ProtocolNode::from_text(&text).unwrap();
        prop_assert_eq!(&tree, &back);
        prop_assert_eq!(text, back.to_text());
    }
}

#[test]
fn path_parity_checks_are_bounded_by_block_bits() {
    // four independent masks fit on two pairs; any fifth check on the
    // same path must be rejected as dependent
    let w = werner(0.8).unwrap();
    let ww = w.tensor(&w);
    let masks = [0b1000u32, 0b0100, 0b0010, 0b0001, 0b1111];
    let mut tree = ProtocolNode::Hash;
    for &bits in masks.iter().rev() {
        tree = ProtocolNode::parity_check(
            ParityMask::new(2, bits).unwrap(),
            tree,
            ProtocolNode::Discard,
        );
    }
    assert!(evaluate(&tree, &ww).is_err());
    let mut tree = ProtocolNode::Hash;
    for &bits in masks[..4].iter().rev() {
        tree = ProtocolNode::parity_check(
            ParityMask::new(2, bits).unwrap(),
            tree,
            ProtocolNode::Discard,
        );
    }
    assert!(evaluate(&tree, &ww).is_ok());
}

#[test]
fn search_value_monotone_in_action_set() {
    let base = SearchConfig {
        use_parity_checks: false,
        use_measurements: false,
        use_relabelings: false,
        ..SearchConfig::default()
    };
    let with_pc = SearchConfig {
        use_parity_checks: true,
        ..base.clone()
    };
    let with_meas = SearchConfig {
        use_measurements: true,
        ..with_pc.clone()
    };
    let full = SearchConfig::default();
    for f in [0.62, 0.81, 0.93] {
        let d = werner(f).unwrap();
        let two = d.tensor(&d);
        let mut last = f64::NEG_INFINITY;
        for cfg in [&base, &with_pc, &with_meas, &full] {
            let (v, _) = optimize(&two, cfg).unwrap();
            assert!(
                v >= last - 1e-12,
                "f={}: value fell from {} to {}",
                f,
                last,
                v
            );
            last = v;
        }
    }
}

#[test]
fn memoized_search_matches_raw_on_werner_grid() {
    let canon = SearchConfig::default();
    let raw = SearchConfig {
        canonicalization: false,
        ..SearchConfig::default()
    };
    for i in 0..9 {
        let f = 0.55 + 0.05 * i as f64;
        let d = werner(f).unwrap();
        let two = d.tensor(&d);
        let (a, _) = optimize(&two, &canon).unwrap();
        let (b, _) = optimize(&two, &raw).unwrap();
        assert!((a - b).abs() < 1e-10, "f={}: {} vs {}", f, a, b);
    }
}

#[test]
fn two_pair_group_closure_sampled() {
    let group = enumerate_label_maps(2).unwrap();
    let key = |g: &LabelMap| g.linear().rows().to_vec();
    let keys: std::collections::HashSet<_> = group.iter().map(|g| key(g)).collect();
    for (i, a) in group.iter().enumerate().step_by(53) {
        assert!(keys.contains(&key(&a.inverse())), "inverse of #{} missing", i);
        for b in group.iter().step_by(71) {
            assert!(keys.contains(&key(&a.compose(b).unwrap())));
        }
    }
}
