//! EPD test suites: one position per line, named by the `id` opcode.

use std::collections::HashSet;
use std::io::BufRead;

use crate::chess::{Color, FenError, Position};

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: invalid position: {source}")]
    Position { line: usize, source: FenError },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("suite contains no positions")]
    Empty,
    #[error("read error at line {line}: {source}")]
    Io { line: usize, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub id: String,
    pub position: Position,
}

impl SuiteEntry {
    pub fn side_to_move(&self) -> Color {
        self.position.turn()
    }
}

/// A parsed EPD line: the position plus its opcodes in order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpdRecord {
    pub position: Position,
    pub opcodes: Vec<(String, String)>,
}

impl EpdRecord {
    pub fn opcode(&self, name: &str) -> Option<&str> {
        self.opcodes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpdError {
    Syntax(String),
    Position(FenError),
}

/// Parses `<placement> <side> <castling> <ep> [opcode operands;]...`.
/// Quoted operands keep their spaces and semicolons; quotes are removed.
pub fn parse_epd_line(line: &str) -> Result<EpdRecord, EpdError> {
    let line = line.trim();
    let mut rest = line;
    let mut fields = Vec::with_capacity(4);
    for _ in 0..4 {
        rest = rest.trim_start();
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if end == 0 {
            return Err(EpdError::Syntax(format!(
                "expected 4 position fields, got {}",
                fields.len()
            )));
        }
        fields.push(&rest[..end]);
        rest = &rest[end..];
    }
    let mut opcodes = Vec::new();
    let mut hmvc = None;
    let mut fmvn = None;
    for (name, operand) in split_opcodes(rest)? {
        match name.as_str() {
            "hmvc" => hmvc = Some(operand.clone()),
            "fmvn" => fmvn = Some(operand.clone()),
            _ => {}
        }
        opcodes.push((name, operand));
    }
    let fen = format!(
        "{} {} {}",
        fields.join(" "),
        hmvc.as_deref().unwrap_or("0"),
        fmvn.as_deref().unwrap_or("1")
    );
    let position = Position::parse_fen(&fen).map_err(EpdError::Position)?;
    Ok(EpdRecord { position, opcodes })
}

fn split_opcodes(text: &str) -> Result<Vec<(String, String)>, EpdError> {
    let mut out = Vec::new();
    let mut chars = text.trim().chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut name = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() || c == ';' {
                break;
            }
            name.push(c);
            chars.next();
        }
        if name.is_empty() {
            return Err(EpdError::Syntax("empty opcode".into()));
        }
        let mut operands: Vec<String> = Vec::new();
        let mut current = String::new();
        let mut terminated = false;
        while let Some(c) = chars.next() {
            match c {
                ';' => {
                    terminated = true;
                    break;
                }
                '"' => {
                    let mut quoted = String::new();
                    loop {
                        match chars.next() {
                            Some('"') => break,
                            Some(q) => quoted.push(q),
                            None => return Err(EpdError::Syntax(format!("unterminated string in opcode {name}"))),
                        }
                    }
                    operands.push(quoted);
                }
                c if c.is_whitespace() => {
                    if !current.is_empty() {
                        operands.push(std::mem::take(&mut current));
                    }
                }
                c => current.push(c),
            }
        }
        if !current.is_empty() {
            operands.push(current);
        }
        if !terminated {
            return Err(EpdError::Syntax(format!("opcode {name} is missing its ';'")));
        }
        out.push((name, operands.join(" ")));
    }
}

/// Reads a suite in file order. Blank lines are skipped; entries without an
/// `id` are named `pos<N>` after their 1-based position in the suite.
pub fn parse_epd_suite<R: BufRead>(source: R) -> Result<Vec<SuiteEntry>, SuiteError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| SuiteError::Io { line: line_no, source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_epd_line(&line).map_err(|e| match e {
            EpdError::Syntax(reason) => SuiteError::Malformed { line: line_no, reason },
            EpdError::Position(source) => SuiteError::Position { line: line_no, source },
        })?;
        let id = match record.opcode("id") {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => format!("pos{}", entries.len() + 1),
        };
        if !seen.insert(id.clone()) {
            return Err(SuiteError::DuplicateId { line: line_no, id });
        }
        entries.push(SuiteEntry {
            id,
            position: record.position,
        });
    }
    if entries.is_empty() {
        return Err(SuiteError::Empty);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::INITIAL_FEN;

    const START: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -";

    #[test]
    fn id_opcode_names_the_entry() {
        let s = parse_epd_suite(format!("{START} id \"26\";\n").as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, "26");
        assert_eq!(s[0].position.emit_fen(), INITIAL_FEN);
        assert_eq!(s[0].side_to_move(), Color::White);
    }

    #[test]
    fn missing_id_gets_ordinal() {
        let text = format!("{START}\n\n{START} id \"x\";\n{START} bm e4;\n");
        let s = parse_epd_suite(text.as_bytes()).unwrap();
        let ids: Vec<_> = s.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["pos1", "x", "pos3"]);
    }

    #[test]
    fn empty_suite_is_an_error() {
        assert!(matches!(parse_epd_suite("".as_bytes()), Err(SuiteError::Empty)));
        assert!(matches!(parse_epd_suite("\n  \n".as_bytes()), Err(SuiteError::Empty)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = format!("{START}\nnot a position\n");
        match parse_epd_suite(text.as_bytes()) {
            Err(SuiteError::Malformed { line, .. }) | Err(SuiteError::Position { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{START} id \"a\";\n{START} id \"a\";\n");
        assert!(matches!(
            parse_epd_suite(text.as_bytes()),
            Err(SuiteError::DuplicateId { line: 2, .. })
        ));
        let text = format!("\n{START} id \"a\"\n");
        assert!(matches!(
            parse_epd_suite(text.as_bytes()),
            Err(SuiteError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn quoted_operands_and_clock_opcodes() {
        let r = parse_epd_line(&format!("{START} id \"a; b\"; hmvc 3; fmvn 7; c0 \"x\" \"y\";")).unwrap();
        assert_eq!(r.opcode("id"), Some("a; b"));
        assert_eq!(r.opcode("c0"), Some("x y"));
        assert_eq!(r.position.halfmove_clock(), 3);
        assert_eq!(r.position.fullmove_number(), 7);
        assert!(matches!(parse_epd_line("8/8/8/8 w"), Err(EpdError::Syntax(_))));
        assert!(matches!(
            parse_epd_line(&format!("{START} id \"a;")),
            Err(EpdError::Syntax(_))
        ));
    }
}
