use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use openbook::book::{self, book_bytes, load_book, Book, DEFAULT_MAX_DEPTH};
use openbook::chess::Position;
use openbook::measures::DEFAULT_MIN_GAMES;
use openbook::pgn::{GameFilter, PgnError, PgnReader};
use openbook::plot::scatter_svg;
use openbook::report::{compare_books, parse_positions_tsv, write_atomic, CompareOptions, Precision};
use openbook::suite::{parse_epd_line, parse_epd_suite, EpdError};

#[derive(Parser)]
#[command(name = "openbook", version, about = "Build opening books from PGN and compare them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a book file from one or more PGN files.
    Build(BuildArgs),
    /// Print the ranked moves a book has for one position.
    Query(QueryArgs),
    /// Compare two books over an EPD suite and write a report directory.
    Compare(CompareArgs),
    /// Draw the M/JSD scatter plot of a positions.tsv report.
    Plot(PlotArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, required = true, num_args = 1..)]
    pgn: Vec<PathBuf>,
    /// Plies per game that enter the book.
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    depth: u32,
    #[arg(long)]
    out: PathBuf,
    /// Keep only games where both players are rated at least this.
    #[arg(long)]
    min_rating: Option<u32>,
    /// Keep only games whose TimeControl base time is at least this many seconds.
    #[arg(long)]
    min_base_time: Option<u32>,
    /// Drop games without a 1-0, 1/2-1/2 or 0-1 result.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    require_result: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("position").required(true).args(["fen", "epd"]))]
struct QueryArgs {
    #[arg(long)]
    book: PathBuf,
    #[arg(long)]
    fen: Option<String>,
    #[arg(long)]
    epd: Option<String>,
    /// Hide moves played in fewer games.
    #[arg(long, default_value_t = 1)]
    min_games: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    #[value(name = "3")]
    Three,
    Full,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    book1: PathBuf,
    #[arg(long)]
    book2: PathBuf,
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_GAMES)]
    min_games: u64,
    /// Bootstrap resamples (0 disables the confidence intervals).
    #[arg(long, default_value_t = 10_000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Position ids left out of the second correlation.
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    #[arg(long, value_enum, default_value = "3")]
    precision: PrecisionArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Position ids drawn with an outlier arrow.
    #[arg(long, value_delimiter = ',')]
    mark: Vec<String>,
}

/// A failure caused by the input data rather than the command line.
struct DataError(String);

impl<E: std::fmt::Display> From<E> for DataError {
    fn from(e: E) -> Self {
        DataError(e.to_string())
    }
}

fn with_path<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> DataError + '_ {
    move |e| DataError(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Compare(a) => compare(a),
        Command::Plot(a) => plot(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(DataError(msg)) => {
            eprintln!("openbook: {msg}");
            ExitCode::from(2)
        }
    }
}

fn build(args: BuildArgs) -> Result<(), DataError> {
    let mut filter = GameFilter {
        min_rating: args.min_rating,
        require_result: args.require_result,
        ..GameFilter::default()
    };
    if let Some(secs) = args.min_base_time {
        filter = filter.with_min_base_time(secs);
    }

    let mut merged: Option<Book> = None;
    let mut stderr = io::stderr().lock();
    for path in &args.pgn {
        let file = File::open(path).map_err(with_path(path))?;
        let mut games = Vec::new();
        for item in PgnReader::new(BufReader::new(file)) {
            match item {
                Ok(g) if filter.accepts(&g) => games.push(g),
                Ok(_) => {}
                Err(PgnError::Malformed(m)) => {
                    let _ = writeln!(stderr, "{}: skipped {m}", path.display());
                }
                Err(e @ PgnError::Io { .. }) => return Err(with_path(path)(e)),
            }
        }
        let outcome = book::build_book(games, args.depth, &path.display().to_string())?;
        for s in &outcome.skipped {
            let _ = writeln!(stderr, "{}: skipped game {}: {}", path.display(), s.index + 1, s.reason);
        }
        merged = Some(match merged {
            None => outcome.book,
            Some(acc) => book::merge_books(&acc, &outcome.book)?,
        });
    }
    let book = merged.expect("clap requires at least one --pgn");
    write_atomic(&args.out, &book_bytes(&book)).map_err(with_path(&args.out))?;
    println!("games\t{}", book.game_count());
    println!("positions\t{}", book.position_count());
    Ok(())
}

fn read_book(path: &Path) -> Result<Book, DataError> {
    let file = File::open(path).map_err(with_path(path))?;
    load_book(BufReader::new(file)).map_err(with_path(path))
}

fn query(args: QueryArgs) -> Result<(), DataError> {
    let position = match (&args.fen, &args.epd) {
        (Some(fen), _) => Position::parse_fen(fen)?,
        (None, Some(epd)) => match parse_epd_line(epd) {
            Ok(r) => r.position,
            Err(EpdError::Syntax(s)) => return Err(DataError(format!("bad EPD: {s}"))),
            Err(EpdError::Position(e)) => return Err(e.into()),
        },
        (None, None) => unreachable!("clap requires --fen or --epd"),
    };
    let book = read_book(&args.book)?;
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "rank\tsan\tgames\tscore%");
    for m in book.query(&position).iter().filter(|m| m.games() >= args.min_games) {
        let _ = writeln!(out, "{}\t{}\t{}\t{:.3}", m.rank, m.san(), m.games(), m.score_percent());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), DataError> {
    let a = read_book(&args.book1)?;
    let b = read_book(&args.book2)?;
    let file = File::open(&args.suite).map_err(with_path(&args.suite))?;
    let suite = parse_epd_suite(BufReader::new(file)).map_err(with_path(&args.suite))?;
    let options = CompareOptions {
        min_games: args.min_games,
        resamples: args.bootstrap,
        seed: args.seed,
        exclude: args.exclude,
        precision: match args.precision {
            PrecisionArg::Three => Precision::Fixed3,
            PrecisionArg::Full => Precision::Full,
        },
    };
    let doc = compare_books(&a, &b, &suite, &options);
    doc.write_to_dir(&args.out).map_err(with_path(&args.out))?;
    print!("{}", doc.positions_table().to_tsv());
    Ok(())
}

fn plot(args: PlotArgs) -> Result<(), DataError> {
    let text = std::fs::read_to_string(&args.report).map_err(with_path(&args.report))?;
    let rows = parse_positions_tsv(&text).map_err(with_path(&args.report))?;
    let svg = scatter_svg(&rows, &args.mark)?;
    write_atomic(&args.out, svg.as_bytes()).map_err(with_path(&args.out))?;
    let marked_missing: Vec<_> = args.mark.iter().filter(|m| !rows.iter().any(|r| &r.id == *m)).collect();
    if !marked_missing.is_empty() {
        eprintln!("openbook: marked ids not in report: {marked_missing:?}");
    }
    Ok(())
}
