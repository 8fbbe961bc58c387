mod common;

use std::collections::BTreeSet;

use common::{market_from_keys, raw_pairs, Raw};
use matchbound_core::analysis::employment_rate;
use matchbound_core::digraph::{build_digraph, is_stable_vertex_set};
use matchbound_core::extremal::{
    generate_agreement_at_top, generate_gn, induced_partition, validate_gn_structure, ArbitraryPolicy, ExtensionPlan,
};
use matchbound_core::normal_form::normal_form;
use matchbound_core::solvers::{
    deferred_acceptance, deferred_acceptance_with, enumerate_matchings, enumerate_stable, greedy_maximal,
    maximum_matching, ProposalSchedule, SolveSide,
};
use matchbound_core::{is_maximal, is_stable, parse_market, serialize_market, Market, Matching, Pair};
use proptest::prelude::*;

/// Markets with up to `max_side` agents per side; acceptability density is
/// itself drawn so both sparse and dense markets appear.
fn market(max_side: usize) -> impl Strategy<Value = Market> {
    (1..=max_side, 1..=max_side, 1u32..=9)
        .prop_flat_map(|(nw, nf, density)| {
            let cells = nw * nf;
            (
                Just((nw, nf)),
                prop::collection::vec(prop::bool::weighted(density as f64 / 10.0), cells),
                prop::collection::vec(any::<u32>(), cells),
                prop::collection::vec(any::<u32>(), cells),
            )
        })
        .prop_filter_map("no acceptable pair", |((nw, nf), acc, wk, fk)| {
            market_from_keys(nw, nf, &acc, &wk, &fk)
        })
}

fn small_market() -> impl Strategy<Value = Market> {
    market(5).prop_filter("enumerable", |m| m.num_acceptable_pairs() <= 14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn deferred_acceptance_is_stable(m in market(10)) {
        for side in [SolveSide::WorkerProposing, SolveSide::FirmProposing] {
            let mu = deferred_acceptance(&m, side);
            prop_assert!(is_stable(&m, &mu));
            prop_assert!(Raw::of(&m).is_stable(&raw_pairs(&mu)));
        }
    }

    #[test]
    fn proposal_schedules_agree(m in market(10)) {
        for side in [SolveSide::WorkerProposing, SolveSide::FirmProposing] {
            prop_assert_eq!(
                deferred_acceptance_with(&m, side, ProposalSchedule::Rounds),
                deferred_acceptance_with(&m, side, ProposalSchedule::Stack)
            );
        }
    }

    #[test]
    fn half_size_bound(m in market(10)) {
        let max = maximum_matching(&m).len();
        prop_assert!(deferred_acceptance(&m, SolveSide::WorkerProposing).len() >= max.div_ceil(2));
        prop_assert!(deferred_acceptance(&m, SolveSide::FirmProposing).len() >= max.div_ceil(2));
    }

    #[test]
    fn maximum_matches_brute_force(m in market(4)) {
        let mu = maximum_matching(&m);
        prop_assert!(mu.pairs().iter().all(|p| m.is_acceptable(p.worker, p.firm)));
        prop_assert_eq!(mu.len(), Raw::of(&m).maximum_size());
    }

    #[test]
    fn stable_enumeration_matches_oracle(m in small_market()) {
        let ours: BTreeSet<_> = enumerate_stable(&m, 14).unwrap().iter().map(raw_pairs).collect();
        prop_assert_eq!(ours, Raw::of(&m).stable_matchings());
    }

    #[test]
    fn rural_hospitals(m in small_market()) {
        let all = enumerate_stable(&m, 14).unwrap();
        let first = (all[0].matched_workers(), all[0].matched_firms());
        for mu in &all {
            prop_assert_eq!((mu.matched_workers(), mu.matched_firms()), first.clone());
        }
    }

    #[test]
    fn preference_and_digraph_stability_agree(m in small_market()) {
        let d = build_digraph(&m);
        for mu in enumerate_matchings(&m, 14).unwrap() {
            prop_assert_eq!(is_stable(&m, &mu), is_stable_vertex_set(&d, mu.pairs()));
        }
    }

    #[test]
    fn maximal_matchings_are_at_least_half_maximum(m in small_market()) {
        let raw = Raw::of(&m);
        let max = raw.maximum_size();
        for mu in enumerate_matchings(&m, 14).unwrap() {
            prop_assert_eq!(is_maximal(&m, &mu), raw.is_maximal(&raw_pairs(&mu)));
            if is_maximal(&m, &mu) {
                prop_assert!(2 * mu.len() >= max);
            }
        }
    }

    #[test]
    fn greedy_is_maximal(m in market(8), seed in any::<u64>()) {
        let mut order = m.acceptable_pairs();
        let n = order.len();
        for i in 0..n {
            order.swap(i, i + (seed as usize).wrapping_mul(i + 7) % (n - i));
        }
        let mu = greedy_maximal(&m, &order).unwrap();
        prop_assert!(is_maximal(&m, &mu));
        prop_assert!(2 * mu.len() >= maximum_matching(&m).len());
    }

    #[test]
    fn serialize_parse_round_trip(m in market(8)) {
        let parsed = parse_market(&serialize_market(&m)).unwrap();
        prop_assert!(parsed.pruned.is_empty());
        prop_assert_eq!(parsed.market, m);
    }

    #[test]
    fn normal_form_is_idempotent_and_balanced(m in market(10)) {
        let report = normal_form(&m);
        prop_assert_eq!(report.core.num_workers(), report.core.num_firms());
        prop_assert_eq!(
            report.kept_workers.len() + report.kept_firms.len() + report.removed.len(),
            m.num_workers() + m.num_firms()
        );
        let again = normal_form(&report.core);
        prop_assert!(again.is_identity());
        prop_assert_eq!(again.core, report.core);
    }

    #[test]
    fn normal_form_preserves_stable_matchings(m in small_market()) {
        let report = normal_form(&m);
        let original: BTreeSet<Matching> =
            enumerate_stable(&m, 14).unwrap().iter().map(|mu| report.restrict(mu)).collect();
        let core: BTreeSet<Matching> = enumerate_stable(&report.core, 14).unwrap().into_iter().collect();
        prop_assert_eq!(original, core);
    }

    #[test]
    fn every_market_decomposes(m in market(10)) {
        let (mu, new_w, new_f) = induced_partition(&m);
        let v = validate_gn_structure(&m, &mu, &new_w, &new_f).unwrap();
        prop_assert!(v.is_valid(), "{:?}", v.violations);
    }

    #[test]
    fn extensions_keep_stable_size(
        m in market(4),
        new_workers in 0usize..4,
        new_firms in 0usize..4,
        seed in any::<u64>(),
        density in 0.0f64..=1.0,
        agreement in any::<bool>(),
    ) {
        let base = normal_form(&m).core;
        let mu = deferred_acceptance(&base, SolveSide::WorkerProposing);
        let plan = ExtensionPlan {
            new_workers,
            new_firms,
            seed,
            extra_density: density,
            policy: if agreement { ArbitraryPolicy::AgreementAtTop } else { ArbitraryPolicy::RandomSeeded },
            ..ExtensionPlan::new(base.clone(), mu.clone())
        };
        let out = generate_gn(&plan).unwrap();
        let n = mu.len();
        let sizes: BTreeSet<usize> = enumerate_stable(&out, 64).unwrap().iter().map(Matching::len).collect();
        prop_assert_eq!(sizes, BTreeSet::from([n]));
        let new_w: BTreeSet<usize> = (base.num_workers()..out.num_workers()).collect();
        let new_f: BTreeSet<usize> = (base.num_firms()..out.num_firms()).collect();
        let lifted = Matching::new(out.num_workers(), out.num_firms(), mu.pairs().iter().copied()).unwrap();
        prop_assert!(validate_gn_structure(&out, &lifted, &new_w, &new_f).unwrap().is_valid());
    }

    #[test]
    fn agreement_at_top_keeps_stable_set(
        m in market(4),
        new_workers in 0usize..4,
        new_firms in 0usize..4,
        seed in any::<u64>(),
    ) {
        let base = normal_form(&m).core;
        let mu = deferred_acceptance(&base, SolveSide::FirmProposing);
        let plan = ExtensionPlan { new_workers, new_firms, seed, ..ExtensionPlan::new(base.clone(), mu) };
        let out = generate_agreement_at_top(&plan).unwrap();
        let (nw, nf) = (base.num_workers(), base.num_firms());
        let restricted: BTreeSet<Vec<Pair>> = enumerate_stable(&out, 64)
            .unwrap()
            .iter()
            .map(|mu| mu.pairs().iter().copied().filter(|p| p.worker < nw && p.firm < nf).collect())
            .collect();
        let of_base: BTreeSet<Vec<Pair>> =
            enumerate_stable(&base, 64).unwrap().iter().map(|mu| mu.pairs().to_vec()).collect();
        prop_assert_eq!(restricted, of_base);
    }

    #[test]
    fn employment_rate_falls_as_workers_are_added(m in market(4), seed in any::<u64>()) {
        let base = normal_form(&m).core;
        let mu = deferred_acceptance(&base, SolveSide::WorkerProposing);
        let mut last = None;
        for k in [0, 1, 3, 10] {
            let plan = ExtensionPlan { new_workers: k, seed, ..ExtensionPlan::new(base.clone(), mu.clone()) };
            let out = generate_gn(&plan).unwrap();
            prop_assert_eq!(deferred_acceptance(&out, SolveSide::WorkerProposing).len(), mu.len());
            let rate = employment_rate(&out);
            if let Some(prev) = last {
                prop_assert!(rate < prev);
            }
            last = Some(rate);
        }
    }
}
