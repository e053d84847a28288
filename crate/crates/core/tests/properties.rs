mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn measures_are_symmetric_and_bounded((a, b) in nonempty_pair()) {
        check_symmetric_and_bounded(&a, &b)?;
    }

    #[test]
    fn identical_lists_score_one(a in move_list(2)) {
        check_identity(&a)?;
    }

    #[test]
    fn footrule_never_exceeds_max_m((a, b) in nonempty_pair()) {
        check_footrule_bound(&a, &b)?;
    }

    #[test]
    fn jsd_matches_entropy_form(a in move_list(1), b in move_list(1)) {
        check_jsd_oracle(&a, &b)?;
    }

    #[test]
    fn raising_threshold_never_adds_games(a in move_list(0), t in 1u64..60) {
        check_threshold_monotone(&a, t)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partitioned_builds_merge_to_the_same_file(
        gs in games(),
        parts in proptest::collection::vec(0usize..4, 30),
        depth in 1u32..12,
    ) {
        check_partitioned_merge(gs, &parts, depth)?;
    }

    #[test]
    fn book_file_round_trips(gs in games(), depth in 1u32..12) {
        check_book_round_trip(gs, depth)?;
    }

    #[test]
    fn san_and_fen_round_trip_along_random_games(choices in proptest::collection::vec(any::<u16>(), 0..80)) {
        check_san_fen_round_trip(&choices)?;
    }
}
