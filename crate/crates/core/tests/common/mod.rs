//! Strategies and checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use openbook::book::{book_bytes, build_book, load_book, merge_books, MoveStats, RankedMoveList};
use openbook::chess::Position;
use openbook::measures::{
    assign_reciprocal_ranks, expected_score, jsd_similarity, m_measure, max_m, normalize_counts, overlap,
    MoveDistribution,
};
use openbook::pgn::{GameRecord, GameResult};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

const POOL: [&str; 16] = [
    "e4", "d4", "Nf3", "c4", "g3", "b3", "f4", "Nc3", "b4", "d3", "e3", "a3", "h3", "c3", "Nh3", "g4",
];

/// A move list of `min..12` moves drawn from `POOL`, with random tallies.
pub fn move_list(min: usize) -> impl Strategy<Value = RankedMoveList> {
    proptest::collection::btree_map(0..POOL.len(), (0u64..40, 0u64..40, 0u64..40), min..12).prop_map(|m| {
        RankedMoveList::from_stats(m.into_iter().map(|(i, (w, d, b))| {
            let d = if w + d + b == 0 { 1 } else { d };
            MoveStats::new(POOL[i], w, d, b)
        }))
    })
}

/// Two lists, at least one of them nonempty.
pub fn nonempty_pair() -> impl Strategy<Value = (RankedMoveList, RankedMoveList)> {
    (move_list(1), move_list(0)).prop_flat_map(|(a, b)| prop_oneof![Just((a.clone(), b.clone())), Just((b, a))])
}

fn entropy(ps: impl Iterator<Item = f64>) -> f64 {
    ps.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Jensen-Shannon divergence as H(mixture) - (H(p) + H(q)) / 2.
pub fn jsd_entropy_form(p: &MoveDistribution, q: &MoveDistribution) -> f64 {
    let mut support: Vec<&str> = p.iter().map(|(s, _)| s).chain(q.iter().map(|(s, _)| s)).collect();
    support.sort();
    support.dedup();
    let mix = support.iter().map(|s| (p.mass(s) + q.mass(s)) / 2.0);
    entropy(mix) - 0.5 * entropy(p.iter().map(|(_, x)| x)) - 0.5 * entropy(q.iter().map(|(_, x)| x))
}

pub fn check_symmetric_and_bounded(a: &RankedMoveList, b: &RankedMoveList) -> Result<(), TestCaseError> {
    let o = overlap(a, b).unwrap();
    prop_assert_eq!(o, overlap(b, a).unwrap());
    prop_assert!((0.0..=1.0).contains(&o));

    let m = m_measure(a, b).ok();
    prop_assert_eq!(m, m_measure(b, a).ok());
    if let Some(m) = m {
        prop_assert!((0.0..=1.0).contains(&m));
    }

    if let (Ok(p), Ok(q)) = (normalize_counts(a, 1), normalize_counts(b, 1)) {
        let j = jsd_similarity(&p, &q);
        prop_assert_eq!(j, jsd_similarity(&q, &p));
        prop_assert!((0.0..=1.0).contains(&j));
    }
    Ok(())
}

pub fn check_identity(a: &RankedMoveList) -> Result<(), TestCaseError> {
    prop_assert_eq!(overlap(a, a).unwrap(), 1.0);
    prop_assert_eq!(m_measure(a, a).unwrap(), 1.0);
    let p = normalize_counts(a, 1).unwrap();
    prop_assert_eq!(jsd_similarity(&p, &p), 1.0);
    Ok(())
}

pub fn check_footrule_bound(a: &RankedMoveList, b: &RankedMoveList) -> Result<(), TestCaseError> {
    let sum = assign_reciprocal_ranks(a, b).footrule_sum();
    prop_assert!(sum <= max_m(a.len(), b.len()).unwrap() + 1e-12);
    Ok(())
}

pub fn check_jsd_oracle(a: &RankedMoveList, b: &RankedMoveList) -> Result<(), TestCaseError> {
    let p = normalize_counts(a, 1).unwrap();
    let q = normalize_counts(b, 1).unwrap();
    let d = 1.0 - jsd_similarity(&p, &q);
    prop_assert!((d * d - jsd_entropy_form(&p, &q)).abs() < 1e-12);
    Ok(())
}

pub fn check_threshold_monotone(a: &RankedMoveList, t: u64) -> Result<(), TestCaseError> {
    let low = expected_score(a, t).map(|e| e.games).unwrap_or(0);
    let high = expected_score(a, t + 1).map(|e| e.games).unwrap_or(0);
    prop_assert!(high <= low);
    Ok(())
}

/// Plays a game by picking moves with the given choice indices; returns the
/// game and every position along it.
pub fn random_game(choices: &[u16], result: u8) -> (GameRecord, Vec<Position>) {
    let mut pos = Position::initial();
    let mut moves = Vec::new();
    let mut seen = vec![pos.clone()];
    for c in choices {
        let legal = pos.legal_moves();
        if legal.is_empty() {
            break;
        }
        let m = legal[*c as usize % legal.len()];
        moves.push(pos.emit_san(&m).unwrap());
        pos = pos.apply_move(&m).unwrap();
        seen.push(pos.clone());
    }
    let result = [GameResult::WhiteWin, GameResult::Draw, GameResult::BlackWin][result as usize % 3];
    (
        GameRecord {
            tags: BTreeMap::new(),
            moves,
            result,
        },
        seen,
    )
}

pub fn games() -> impl Strategy<Value = Vec<GameRecord>> {
    // Small choice indices keep the games close together so positions repeat.
    proptest::collection::vec((proptest::collection::vec(0u16..4, 0..14), any::<u8>()), 0..30)
        .prop_map(|gs| gs.iter().map(|(c, r)| random_game(c, *r).0).collect())
}

pub fn check_partitioned_merge(gs: Vec<GameRecord>, parts: &[usize], depth: u32) -> Result<(), TestCaseError> {
    let whole = build_book(gs.clone(), depth, "corpus").unwrap().book;
    let mut buckets: Vec<Vec<GameRecord>> = vec![Vec::new(); 4];
    for (i, g) in gs.into_iter().enumerate() {
        buckets[parts[i % parts.len()] % 4].push(g);
    }
    let mut merged = build_book(Vec::new(), depth, "corpus").unwrap().book;
    for bucket in buckets.into_iter().rev() {
        let part = build_book(bucket, depth, "corpus").unwrap().book;
        merged = merge_books(&part, &merged).unwrap();
    }
    prop_assert_eq!(book_bytes(&merged), book_bytes(&whole));
    Ok(())
}

pub fn check_book_round_trip(gs: Vec<GameRecord>, depth: u32) -> Result<(), TestCaseError> {
    let book = build_book(gs, depth, "round trip").unwrap().book;
    let bytes = book_bytes(&book);
    let loaded = load_book(bytes.as_slice()).unwrap();
    prop_assert_eq!(&loaded, &book);
    prop_assert_eq!(book_bytes(&loaded), bytes);
    Ok(())
}

pub fn check_san_fen_round_trip(choices: &[u16]) -> Result<(), TestCaseError> {
    let (_, positions) = random_game(choices, 0);
    for p in positions {
        let back = Position::parse_fen(&p.emit_fen()).unwrap();
        prop_assert_eq!(back.position_key(), p.position_key());
        prop_assert_eq!(back.emit_fen(), p.emit_fen());
        for m in p.legal_moves() {
            let san = p.emit_san(&m).unwrap();
            prop_assert_eq!(p.parse_san(&san).unwrap(), m);
        }
    }
    Ok(())
}
