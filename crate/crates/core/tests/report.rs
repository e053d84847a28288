mod common;

use std::fs::File;
use std::io::BufReader;

use openbook::book::{build_book, Book};
use openbook::pgn::PgnReader;
use openbook::report::{compare_books, parse_positions_tsv, CompareOptions, Precision};
use openbook::stats::{mean_std, pearson_slices};
use openbook::suite::parse_epd_suite;

fn book(name: &str) -> Book {
    let file = File::open(common::fixture(name)).unwrap();
    let games = PgnReader::new(BufReader::new(file)).map(Result::unwrap);
    build_book(games, 40, name).unwrap().book
}

#[test]
fn positions_tsv_resummarizes_to_the_same_values() {
    let (a, b) = (book("corpus_pb.pgn"), book("corpus_comp.pgn"));
    let suite = parse_epd_suite(BufReader::new(File::open(common::fixture("suite3.epd")).unwrap())).unwrap();
    let options = CompareOptions {
        min_games: 1,
        resamples: 1000,
        seed: 11,
        exclude: vec!["after-d4".into()],
        precision: Precision::Full,
    };
    let doc = compare_books(&a, &b, &suite, &options);
    let rows = parse_positions_tsv(&doc.positions_table().to_tsv()).unwrap();

    let col = |f: fn(&openbook::report::ParsedRow) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(f).collect() };
    for (name, values) in [
        ("M", col(|r| r.m_measure)),
        ("maxM", col(|r| r.max_m)),
        ("JSD", col(|r| r.jsd)),
        ("overlap", col(|r| r.overlap)),
    ] {
        let s = doc.summaries.iter().find(|s| s.column == name).unwrap();
        assert_eq!(mean_std(&values).unwrap(), *s.summary.as_ref().unwrap(), "{name}");
    }

    let r = pearson_slices(&col(|r| r.m_measure), &col(|r| r.jsd)).unwrap();
    assert_eq!(Ok(r), doc.correlations[0].pearson);
    assert_eq!(doc.correlations.len(), 2);
    assert_eq!(doc.correlations[1].n, 2);
    // Two points cannot be bootstrapped.
    assert!(matches!(doc.correlations[1].bootstrap, Some(Err(_))));
}

#[test]
fn meta_records_the_run() {
    let a = book("tiny.pgn");
    let suite =
        parse_epd_suite("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - id \"26\";\n".as_bytes()).unwrap();
    let doc = compare_books(&a, &a, &suite, &CompareOptions::default());
    let meta = doc.meta_table().to_tsv();
    for needle in [
        "seed\t0\n",
        "rng\tChaCha8",
        "std_denominator\tn-1\n",
        "min_games\t10\n",
        "book1_games\t3\n",
        "undefined_JSD\t1\n",
    ] {
        assert!(meta.contains(needle), "{needle:?} not in\n{meta}");
    }
    let md = doc.to_markdown();
    assert!(md.contains("| 26 | w | 1.000 |"));
}
