//! Line-oriented book file format.
//!
//! ```text
//! openbook-diff v1
//! meta source=<string> games=<int> positions=<int> depth=<int>
//! pos <canonical FEN, 4 fields>
//! mv <SAN> <games> <white_wins> <draws> <black_wins>
//! sha256 <hex of all preceding bytes>
//! ```
//!
//! Positions are sorted by FEN (bytewise), moves by rank. The output for a
//! given book is unique, so equal books produce identical files.

use std::io::{self, Read, Write};

use sha2::{Digest, Sha256};

use super::{Book, RankedMoveList, Tally};
use crate::chess::{Position, PositionKey};

pub const FORMAT_HEADER: &str = "openbook-diff v1";

#[derive(Debug, thiserror::Error)]
pub enum BookFormatError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported book version '{0}'")]
    Version(String),
    #[error("book file is truncated: {0}")]
    Truncated(&'static str),
    #[error("checksum mismatch: file says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn malformed(line: usize, reason: impl Into<String>) -> BookFormatError {
    BookFormatError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// Serialized bytes of `book`, checksum line included.
pub fn book_bytes(book: &Book) -> Vec<u8> {
    let mut entries: Vec<(String, RankedMoveList)> = book
        .keys()
        .map(|k| (k.to_position().epd_fields(), book.query_key(k)))
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "meta source={} games={} positions={} depth={}\n",
        book.source(),
        book.game_count(),
        book.position_count(),
        book.depth()
    ));
    for (fen, moves) in &entries {
        out.push_str("pos ");
        out.push_str(fen);
        out.push('\n');
        for m in moves {
            let s = &m.stats;
            out.push_str(&format!(
                "mv {} {} {} {} {}\n",
                s.san, s.games, s.white_wins, s.draws, s.black_wins
            ));
        }
    }
    let digest = hex(&Sha256::digest(out.as_bytes()));
    out.push_str("sha256 ");
    out.push_str(&digest);
    out.push('\n');
    out.into_bytes()
}

pub fn save_book<W: Write>(book: &Book, mut sink: W) -> io::Result<()> {
    sink.write_all(&book_bytes(book))?;
    sink.flush()
}

pub fn load_book<R: Read>(mut source: R) -> Result<Book, BookFormatError> {
    let mut data = Vec::new();
    source.read_to_end(&mut data)?;
    parse_book(&data)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_book(data: &[u8]) -> Result<Book, BookFormatError> {
    let text = std::str::from_utf8(data).map_err(|e| {
        let line = data[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        malformed(line, "invalid UTF-8")
    })?;
    let first = text.lines().next().ok_or(BookFormatError::Truncated("empty file"))?;
    if first != FORMAT_HEADER {
        return match first.strip_prefix("openbook-diff ") {
            Some(v) => Err(BookFormatError::Version(v.to_string())),
            None => Err(malformed(1, "missing 'openbook-diff' header")),
        };
    }

    let body = text
        .strip_suffix('\n')
        .ok_or(BookFormatError::Truncated("missing final newline"))?;
    let split = body
        .rfind('\n')
        .ok_or(BookFormatError::Truncated("missing checksum line"))?;
    let expected = body[split + 1..]
        .strip_prefix("sha256 ")
        .ok_or(BookFormatError::Truncated("missing checksum line"))?;
    let covered = &text[..split + 1];
    let actual = hex(&Sha256::digest(covered.as_bytes()));
    if expected != actual {
        return Err(BookFormatError::Checksum {
            expected: expected.to_string(),
            actual,
        });
    }

    let mut lines = covered.lines().enumerate().map(|(i, l)| (i + 1, l)).skip(1);
    let (meta_no, meta_line) = lines.next().ok_or(BookFormatError::Truncated("missing meta line"))?;
    let meta = parse_meta(meta_no, meta_line)?;
    let mut book = Book::new(&meta.source, meta.depth).map_err(|e| malformed(meta_no, e.to_string()))?;
    if book.source() != meta.source {
        return Err(malformed(meta_no, "source contains control characters"));
    }
    book.set_game_count(meta.games);

    let mut current: Option<(usize, String, PositionKey)> = None;
    let mut last_move: Option<(u64, String)> = None;
    let mut prev_fen: Option<String> = None;
    for (no, line) in lines {
        if let Some(fen) = line.strip_prefix("pos ") {
            close_position(&book, &current)?;
            if prev_fen.as_deref().is_some_and(|p| p >= fen) {
                return Err(malformed(no, "positions not in ascending FEN order"));
            }
            let pos = Position::parse_fen(fen).map_err(|e| malformed(no, e.to_string()))?;
            if fen.split_whitespace().count() != 4 || pos.epd_fields() != fen {
                return Err(malformed(no, format!("non-canonical FEN '{fen}'")));
            }
            prev_fen = Some(fen.to_string());
            current = Some((no, fen.to_string(), pos.position_key()));
            last_move = None;
        } else if let Some(rest) = line.strip_prefix("mv ") {
            let Some((_, _, key)) = &current else {
                return Err(malformed(no, "move before any position"));
            };
            let fields: Vec<&str> = rest.split(' ').collect();
            if fields.len() != 5 || fields[0].is_empty() {
                return Err(malformed(no, "expected 'mv <SAN> <games> <white> <draws> <black>'"));
            }
            let mut nums = [0u64; 4];
            for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
                *slot = f.parse().map_err(|_| malformed(no, format!("bad count '{f}'")))?;
            }
            let [games, white_wins, draws, black_wins] = nums;
            let tally = Tally {
                white_wins,
                draws,
                black_wins,
            };
            if tally.games() != games || games == 0 {
                return Err(malformed(no, "game count does not equal the result tallies"));
            }
            let san = fields[0].to_string();
            if let Some((prev_games, prev_san)) = &last_move {
                let ordered = games < *prev_games || (games == *prev_games && san > *prev_san);
                if !ordered {
                    return Err(malformed(no, "moves not in rank order"));
                }
            }
            last_move = Some((games, san.clone()));
            book.insert_raw(*key, san, tally);
        } else {
            return Err(malformed(no, format!("unrecognized line '{line}'")));
        }
    }
    close_position(&book, &current)?;
    if book.position_count() != meta.positions {
        return Err(malformed(
            meta_no,
            format!(
                "meta says {} positions, file has {}",
                meta.positions,
                book.position_count()
            ),
        ));
    }
    Ok(book)
}

fn close_position(book: &Book, current: &Option<(usize, String, PositionKey)>) -> Result<(), BookFormatError> {
    if let Some((no, fen, key)) = current {
        if book.raw_moves(key).is_none() {
            return Err(malformed(*no, format!("position '{fen}' has no moves")));
        }
    }
    Ok(())
}

struct Meta {
    source: String,
    games: u64,
    positions: u64,
    depth: u32,
}

fn parse_meta(no: usize, line: &str) -> Result<Meta, BookFormatError> {
    let rest = line
        .strip_prefix("meta source=")
        .ok_or_else(|| malformed(no, "expected meta line"))?;
    let mut parts = rest.rsplitn(4, ' ');
    let mut field = |name: &str| -> Result<u64, BookFormatError> {
        parts
            .next()
            .and_then(|p| p.strip_prefix(name))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| malformed(no, format!("bad or missing '{name}'")))
    };
    let depth = field("depth=")?;
    let positions = field("positions=")?;
    let games = field("games=")?;
    let source = parts.next().unwrap_or_default().to_string();
    Ok(Meta {
        source,
        games,
        positions,
        depth: u32::try_from(depth).map_err(|_| malformed(no, "depth out of range"))?,
    })
}
