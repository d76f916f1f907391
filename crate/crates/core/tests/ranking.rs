use ontoserv_core::catalog::IndexedCatalog;
use ontoserv_core::profile::UserProfile;
use ontoserv_core::reformulate::{EnrichedQuery, Term};
use ontoserv_core::search::{rank, score, RankOptions};
use ontoserv_core::text::Analyzer;
use ontoserv_core::Execution;
use ontoserv_testkit::{gen, oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_profile(rng: &mut ChaCha8Rng) -> UserProfile {
    let mut p = UserProfile::new("u").unwrap();
    for c in gen::concept_pool() {
        if rng.gen_bool(0.4) {
            p.interests.insert(c, rng.gen_range(0..=10) as f64 / 10.0);
        }
    }
    for s in ["customs", "tourism"] {
        if rng.gen_bool(0.4) {
            p.sector_interests.insert(s.into(), rng.gen_range(0..=10) as f64 / 10.0);
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_equals_full_scan(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = IndexedCatalog::new(gen::catalog(&mut rng, 10), Analyzer::default(), Execution::Sequential);
        let query = gen::enriched_query(&mut rng);
        let profile = random_profile(&mut rng);
        let options = RankOptions { k: rng.gen_range(0..=12), alpha: rng.gen_range(0..=4) as f64 / 4.0, ..Default::default() };
        for p in [None, Some(&profile)] {
            let want = oracle::rank(&query, store.catalog(), p, &options);
            prop_assert_eq!(&rank(&query, &store, p, &options, Execution::Sequential), &want);
            prop_assert_eq!(&rank(&query, &store, p, &options, Execution::Parallel), &want);
        }
    }

    #[test]
    fn neutral_personalization_changes_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = IndexedCatalog::new(gen::catalog(&mut rng, 10), Analyzer::default(), Execution::Sequential);
        let query = gen::enriched_query(&mut rng);
        let options = RankOptions { k: 20, ..Default::default() };
        let plain = rank(&query, &store, None, &options, Execution::Sequential);
        let empty = UserProfile::new("u").unwrap();
        prop_assert_eq!(&rank(&query, &store, Some(&empty), &options, Execution::Sequential), &plain);
        let zero = RankOptions { alpha: 0.0, ..options };
        prop_assert_eq!(&rank(&query, &store, Some(&random_profile(&mut rng)), &zero, Execution::Sequential), &plain);
    }

    #[test]
    fn adding_a_term_never_lowers_base(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = IndexedCatalog::new(gen::catalog(&mut rng, 10), Analyzer::default(), Execution::Sequential);
        let query = gen::enriched_query(&mut rng);
        let extra = gen::enriched_query(&mut rng);
        let Some(t) = extra.terms.first() else { return Ok(()) };
        if query.get(&t.key).is_some() {
            return Ok(());
        }
        let mut terms: Vec<Term> = query.terms.clone();
        terms.push(t.clone());
        let bigger = EnrichedQuery::from_terms(query.language, terms);
        let w = RankOptions::default().field_weights;
        for r in store.catalog().iter() {
            let (before, _) = score(&query, &r.id, store.index(), &w);
            let (after, _) = score(&bigger, &r.id, store.index(), &w);
            prop_assert!(after >= before - 1e-12, "{} {} -> {}", r.id, before, after);
        }
    }

    #[test]
    fn results_are_well_formed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = IndexedCatalog::new(gen::catalog(&mut rng, 10), Analyzer::default(), Execution::Sequential);
        let query = gen::enriched_query(&mut rng);
        let results = rank(&query, &store, Some(&random_profile(&mut rng)), &RankOptions::default(), Execution::Parallel);
        for r in &results {
            prop_assert!(r.score > 0.0);
            prop_assert!(!r.matched_terms.is_empty());
            prop_assert!(r.personalization_factor >= 1.0);
        }
        for pair in results.windows(2) {
            prop_assert!(pair[0].score > pair[1].score || (pair[0].score == pair[1].score && pair[0].service < pair[1].service));
        }
    }
}

#[test]
fn generated_cases_are_not_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut nonempty, mut multi) = (0, 0);
    for _ in 0..200 {
        let store = IndexedCatalog::new(gen::catalog(&mut rng, 10), Analyzer::default(), Execution::Sequential);
        let query = gen::enriched_query(&mut rng);
        let r = rank(&query, &store, None, &RankOptions::default(), Execution::Sequential);
        nonempty += usize::from(!r.is_empty());
        multi += usize::from(r.len() > 1);
    }
    assert!(nonempty > 100 && multi > 50, "{nonempty} non-empty, {multi} with several results");
}
