//! The two-book comparison over a suite and its TSV/Markdown renderings.
//!
//! Every number is formatted once into a [`Table`]; the TSV files and the
//! Markdown report are both printed from those tables.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::book::{book_bytes, Book};
use crate::chess::Color;
use crate::measures::{compare_position, expected_score_row, ComparisonRow, ExpectedScoreRow};
use crate::stats::{self, BootstrapResult, PairedSample, StatsError, RNG_ALGORITHM};
use crate::suite::SuiteEntry;

pub const UNDEFINED: &str = "undefined";
pub const POSITIONS_FILE: &str = "positions.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";
pub const CORRELATION_FILE: &str = "correlation.tsv";
pub const META_FILE: &str = "meta.tsv";
pub const MARKDOWN_FILE: &str = "report.md";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Three decimals for measures and percentages.
    #[default]
    Fixed3,
    /// Shortest representation that parses back to the same `f64`.
    Full,
}

impl Precision {
    pub fn format(self, v: f64) -> String {
        match self {
            Precision::Fixed3 => format!("{v:.3}"),
            Precision::Full => format!("{v}"),
        }
    }

    fn cell(self, v: Option<f64>) -> String {
        v.map_or_else(|| UNDEFINED.to_string(), |v| self.format(v))
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::Fixed3 => "3",
            Precision::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub min_games: u64,
    /// Bootstrap resamples; 0 skips the confidence intervals.
    pub resamples: usize,
    pub seed: u64,
    /// Position ids left out of the second correlation block.
    pub exclude: Vec<String>,
    pub precision: Precision,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            min_games: crate::measures::DEFAULT_MIN_GAMES,
            resamples: 10_000,
            seed: 0,
            exclude: Vec::new(),
            precision: Precision::Fixed3,
        }
    }
}

/// One M-vs-JSD correlation, over all rows or with some ids excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBlock {
    pub label: String,
    pub n: usize,
    pub pearson: Result<f64, StatsError>,
    /// `None` when bootstrapping was switched off.
    pub bootstrap: Option<Result<BootstrapResult, StatsError>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub column: &'static str,
    pub defined: usize,
    pub summary: Result<stats::Summary, StatsError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BookDescriptor {
    pub source: String,
    pub games: u64,
    pub positions: u64,
    pub depth: u32,
    pub sha256: String,
}

impl BookDescriptor {
    pub fn of(book: &Book) -> BookDescriptor {
        let bytes = book_bytes(book);
        let text = String::from_utf8_lossy(&bytes);
        let sha256 = text
            .lines()
            .last()
            .and_then(|l| l.strip_prefix("sha256 "))
            .unwrap_or_default()
            .to_string();
        BookDescriptor {
            source: book.source().to_string(),
            games: book.game_count(),
            positions: book.position_count(),
            depth: book.depth(),
            sha256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub options: CompareOptions,
    pub books: [BookDescriptor; 2],
    pub comparisons: Vec<ComparisonRow>,
    pub scores: Vec<ExpectedScoreRow>,
    pub summaries: Vec<ColumnSummary>,
    pub correlations: Vec<CorrelationBlock>,
}

/// Compares the two books at every suite position, in suite order.
pub fn compare_books(a: &Book, b: &Book, suite: &[SuiteEntry], options: &CompareOptions) -> ReportDocument {
    let mut comparisons = Vec::with_capacity(suite.len());
    let mut scores = Vec::with_capacity(suite.len());
    for entry in suite {
        let (la, lb) = (a.query(&entry.position), b.query(&entry.position));
        comparisons.push(compare_position(&entry.id, &la, &lb, options.min_games));
        scores.push(expected_score_row(
            &entry.id,
            entry.side_to_move(),
            &la,
            &lb,
            options.min_games,
        ));
    }

    let columns: [(&'static str, Vec<Option<f64>>); 6] = [
        ("M", comparisons.iter().map(|r| r.m_measure).collect()),
        ("maxM", comparisons.iter().map(|r| r.max_m).collect()),
        ("JSD", comparisons.iter().map(|r| r.jsd).collect()),
        ("overlap", comparisons.iter().map(|r| r.overlap).collect()),
        ("Ew1", scores.iter().map(|r| r.book_a.map(|s| s.percent)).collect()),
        ("Ew2", scores.iter().map(|r| r.book_b.map(|s| s.percent)).collect()),
    ];
    let summaries = columns
        .into_iter()
        .map(|(column, values)| {
            let defined: Vec<f64> = values.into_iter().flatten().collect();
            ColumnSummary {
                column,
                defined: defined.len(),
                summary: stats::mean_std(&defined),
            }
        })
        .collect();

    let sample = m_jsd_sample(&comparisons);
    let mut correlations = vec![correlation_block("all".to_string(), &sample, options)];
    if !options.exclude.is_empty() {
        let label = format!("excluding {}", options.exclude.join(","));
        correlations.push(correlation_block(label, &sample.excluding(&options.exclude), options));
    }

    ReportDocument {
        options: options.clone(),
        books: [BookDescriptor::of(a), BookDescriptor::of(b)],
        comparisons,
        scores,
        summaries,
        correlations,
    }
}

/// The (M, JSD) pairs of rows where both are defined.
pub fn m_jsd_sample(rows: &[ComparisonRow]) -> PairedSample {
    let defined: Vec<_> = rows
        .iter()
        .filter_map(|r| Some((r.id.clone(), r.m_measure?, r.jsd?)))
        .collect();
    PairedSample {
        ids: defined.iter().map(|d| d.0.clone()).collect(),
        x: defined.iter().map(|d| d.1).collect(),
        y: defined.iter().map(|d| d.2).collect(),
    }
}

fn correlation_block(label: String, sample: &PairedSample, options: &CompareOptions) -> CorrelationBlock {
    let bootstrap = (options.resamples > 0)
        .then(|| stats::bootstrap_ci(sample, stats::pearson_slices, options.resamples, options.seed));
    CorrelationBlock {
        label,
        n: sample.len(),
        pearson: stats::pearson(sample),
        bootstrap,
    }
}

/// A header row plus data rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Table {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n", self.header.join(" | "));
        out.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }
}

fn side_char(c: Color) -> String {
    c.fen_char().to_string()
}

fn count_cell(v: Option<u64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

fn error_note(e: &StatsError) -> String {
    format!("{UNDEFINED} ({e})")
}

impl ReportDocument {
    pub fn positions_table(&self) -> Table {
        let p = self.options.precision;
        let mut t = Table::new(&[
            "id", "side", "M", "maxM", "JSD", "overlap", "moves1", "moves2", "Ew1", "games1", "Ew2", "games2",
        ]);
        for (c, s) in self.comparisons.iter().zip(&self.scores) {
            t.rows.push(vec![
                c.id.clone(),
                side_char(s.side_to_move),
                p.cell(c.m_measure),
                p.cell(c.max_m),
                p.cell(c.jsd),
                p.cell(c.overlap),
                c.moves_a.to_string(),
                c.moves_b.to_string(),
                p.cell(s.book_a.map(|e| e.percent)),
                count_cell(s.book_a.map(|e| e.games)),
                p.cell(s.book_b.map(|e| e.percent)),
                count_cell(s.book_b.map(|e| e.games)),
            ]);
        }
        t
    }

    pub fn summary_table(&self) -> Table {
        let p = self.options.precision;
        let mut t = Table::new(&["column", "n", "mean", "std"]);
        for s in &self.summaries {
            let (mean, std) = match &s.summary {
                Ok(sum) => (p.format(sum.mean), p.format(sum.std)),
                Err(_) => (UNDEFINED.to_string(), UNDEFINED.to_string()),
            };
            t.rows
                .push(vec![s.column.to_string(), s.defined.to_string(), mean, std]);
        }
        t
    }

    pub fn correlation_table(&self) -> Table {
        let p = self.options.precision;
        let mut t = Table::new(&[
            "sample",
            "n",
            "pearson",
            "ci_lower",
            "ci_upper",
            "resamples",
            "degenerate",
        ]);
        for c in &self.correlations {
            let pearson = c.pearson.as_ref().map_or_else(error_note, |v| p.format(*v));
            let ci = match &c.bootstrap {
                None => vec!["skipped".to_string(); 4],
                Some(Ok(b)) => vec![
                    p.format(b.lower),
                    p.format(b.upper),
                    b.resamples.to_string(),
                    b.degenerate.to_string(),
                ],
                Some(Err(e)) => vec![
                    error_note(e),
                    UNDEFINED.to_string(),
                    self.options.resamples.to_string(),
                    UNDEFINED.to_string(),
                ],
            };
            let mut row = vec![c.label.clone(), c.n.to_string(), pearson];
            row.extend(ci);
            t.rows.push(row);
        }
        t
    }

    pub fn meta_table(&self) -> Table {
        let mut t = Table::new(&["key", "value"]);
        let mut put = |k: &str, v: String| t.rows.push(vec![k.to_string(), v]);
        put("tool", format!("openbook {}", env!("CARGO_PKG_VERSION")));
        for (i, b) in self.books.iter().enumerate() {
            let n = i + 1;
            put(&format!("book{n}_source"), b.source.clone());
            put(&format!("book{n}_games"), b.games.to_string());
            put(&format!("book{n}_positions"), b.positions.to_string());
            put(&format!("book{n}_depth"), b.depth.to_string());
            put(&format!("book{n}_sha256"), b.sha256.clone());
        }
        put("suite_positions", self.comparisons.len().to_string());
        put("min_games", self.options.min_games.to_string());
        put("min_games_applies_to", "JSD,Ew1,Ew2".to_string());
        put("bootstrap_resamples", self.options.resamples.to_string());
        put(
            "bootstrap_method",
            "percentile, 2.5% and 97.5%, linear interpolation".to_string(),
        );
        put("seed", self.options.seed.to_string());
        put("rng", RNG_ALGORITHM.to_string());
        put("std_denominator", "n-1".to_string());
        put("excluded_ids", self.options.exclude.join(","));
        put("precision", self.options.precision.name().to_string());
        for s in &self.summaries {
            let undefined = self.comparisons.len() - s.defined;
            put(&format!("undefined_{}", s.column), undefined.to_string());
        }
        t
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Book comparison\n\n");
        let _ = writeln!(
            out,
            "Book 1: {} ({} games). Book 2: {} ({} games). Minimum games: {}.\n",
            self.books[0].source,
            self.books[0].games,
            self.books[1].source,
            self.books[1].games,
            self.options.min_games
        );
        for (title, table) in [
            ("Positions", self.positions_table()),
            ("Summary", self.summary_table()),
            ("Correlation of M and JSD", self.correlation_table()),
            ("Run metadata", self.meta_table()),
        ] {
            let _ = writeln!(out, "## {title}\n\n{}", table.to_markdown());
        }
        out
    }

    /// Writes all renderings into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join(POSITIONS_FILE), self.positions_table().to_tsv().as_bytes())?;
        write_atomic(&dir.join(SUMMARY_FILE), self.summary_table().to_tsv().as_bytes())?;
        write_atomic(
            &dir.join(CORRELATION_FILE),
            self.correlation_table().to_tsv().as_bytes(),
        )?;
        write_atomic(&dir.join(META_FILE), self.meta_table().to_tsv().as_bytes())?;
        write_atomic(&dir.join(MARKDOWN_FILE), self.to_markdown().as_bytes())
    }
}

/// Writes through a temporary file in the same directory, so `path` either
/// keeps its old contents or gets the complete new ones.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportParseError {
    #[error("report is empty")]
    Empty,
    #[error("report header lacks column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// One row of a positions TSV read back: id plus the measure cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub id: String,
    pub m_measure: Option<f64>,
    pub max_m: Option<f64>,
    pub jsd: Option<f64>,
    pub overlap: Option<f64>,
}

/// Reads the measure columns of a positions TSV, by header name.
pub fn parse_positions_tsv(text: &str) -> Result<Vec<ParsedRow>, ReportParseError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or(ReportParseError::Empty)?.split('\t').collect();
    let col = |name: &'static str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or(ReportParseError::MissingColumn(name))
    };
    let (id, m, max_m, jsd, overlap) = (col("id")?, col("M")?, col("maxM")?, col("JSD")?, col("overlap")?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != header.len() {
            return Err(ReportParseError::Malformed {
                line: line_no,
                reason: format!("expected {} cells, got {}", header.len(), cells.len()),
            });
        }
        let num = |k: usize| -> Result<Option<f64>, ReportParseError> {
            if cells[k] == UNDEFINED {
                return Ok(None);
            }
            cells[k].parse().map(Some).map_err(|_| ReportParseError::Malformed {
                line: line_no,
                reason: format!("bad number {:?}", cells[k]),
            })
        };
        rows.push(ParsedRow {
            id: cells[id].to_string(),
            m_measure: num(m)?,
            max_m: num(max_m)?,
            jsd: num(jsd)?,
            overlap: num(overlap)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_formats() {
        assert_eq!(Precision::Fixed3.format(0.96937), "0.969");
        assert_eq!(Precision::Full.format(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(Precision::Fixed3.cell(None), UNDEFINED);
    }

    #[test]
    fn table_renderings_share_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec!["1".into(), UNDEFINED.into()]);
        assert_eq!(t.to_tsv(), "a\tb\n1\tundefined\n");
        assert_eq!(t.to_markdown(), "| a | b |\n|---|---|\n| 1 | undefined |\n");
    }

    #[test]
    fn positions_tsv_parses_back() {
        let text = "id\tside\tM\tmaxM\tJSD\toverlap\n26\tw\t0.5\t4\tundefined\t1\n";
        let rows = parse_positions_tsv(text).unwrap();
        assert_eq!(
            rows,
            vec![ParsedRow {
                id: "26".into(),
                m_measure: Some(0.5),
                max_m: Some(4.0),
                jsd: None,
                overlap: Some(1.0),
            }]
        );
        assert_eq!(parse_positions_tsv(""), Err(ReportParseError::Empty));
        assert_eq!(
            parse_positions_tsv("id\tM\n"),
            Err(ReportParseError::MissingColumn("maxM"))
        );
        assert!(matches!(
            parse_positions_tsv("id\tM\tmaxM\tJSD\toverlap\nx\t1\t1\tzz\t1\n"),
            Err(ReportParseError::Malformed { line: 2, .. })
        ));
    }
}
