use super::position::Position;
use super::types::{CastleSide, ChessMove, Role, Square};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SanError {
    #[error("malformed SAN '{san}' in {fen}")]
    Syntax { fen: String, san: String },
    #[error("illegal move '{san}' in {fen}")]
    Illegal { fen: String, san: String },
    #[error("ambiguous move '{san}' in {fen}")]
    Ambiguous { fen: String, san: String },
}

#[derive(Debug, PartialEq, Eq)]
enum Pattern {
    Castle(CastleSide),
    Normal {
        role: Role,
        from_file: Option<u8>,
        from_rank: Option<u8>,
        to: Square,
        promotion: Option<Role>,
    },
}

/// Strips check/mate markers, annotation glyphs and a trailing `e.p.`.
fn strip_suffixes(token: &str) -> &str {
    let mut s = token.trim();
    loop {
        let before = s.len();
        s = s.strip_suffix("e.p.").unwrap_or(s).trim_end();
        s = s.trim_end_matches(['+', '#', '!', '?']);
        if s.len() == before {
            return s;
        }
    }
}

fn parse_pattern(token: &str) -> Option<Pattern> {
    let body = strip_suffixes(token);
    match body {
        "O-O" | "0-0" => return Some(Pattern::Castle(CastleSide::King)),
        "O-O-O" | "0-0-0" => return Some(Pattern::Castle(CastleSide::Queen)),
        _ => {}
    }
    let mut chars: Vec<char> = body.chars().filter(|&c| c != 'x' && c != '-').collect();
    let role = match chars.first().copied().and_then(Role::from_upper_char) {
        Some(role) => {
            chars.remove(0);
            role
        }
        None => Role::Pawn,
    };
    let mut promotion = None;
    if role == Role::Pawn {
        if let Some(role) = chars.last().copied().and_then(Role::from_upper_char) {
            promotion = Some(role);
            chars.pop();
            if chars.last() == Some(&'=') {
                chars.pop();
            }
        }
        if matches!(promotion, Some(Role::Pawn | Role::King)) {
            return None;
        }
    }
    if chars.len() < 2 {
        return None;
    }
    let dest: String = chars.split_off(chars.len() - 2).into_iter().collect();
    let to = Square::parse(&dest)?;
    let (mut from_file, mut from_rank) = (None, None);
    for c in chars {
        match c {
            'a'..='h' if from_file.is_none() && from_rank.is_none() => from_file = Some(c as u8 - b'a'),
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return None,
        }
    }
    Some(Pattern::Normal {
        role,
        from_file,
        from_rank,
        to,
        promotion,
    })
}

impl Position {
    /// Resolves a SAN token to the unique legal move it denotes.
    pub fn parse_san(&self, token: &str) -> Result<ChessMove, SanError> {
        let pattern = parse_pattern(token).ok_or_else(|| SanError::Syntax {
            fen: self.emit_fen(),
            san: token.to_string(),
        })?;
        let legal = self.legal_moves();
        let mut found = legal.iter().filter(|m| self.matches(m, &pattern));
        let first = found.next().copied();
        let second = found.next();
        match (first, second) {
            (Some(m), None) => Ok(m),
            (None, _) => Err(SanError::Illegal {
                fen: self.emit_fen(),
                san: token.to_string(),
            }),
            (Some(_), Some(_)) => Err(SanError::Ambiguous {
                fen: self.emit_fen(),
                san: token.to_string(),
            }),
        }
    }

    fn matches(&self, m: &ChessMove, pattern: &Pattern) -> bool {
        match *pattern {
            Pattern::Castle(side) => m.castle == Some(side),
            Pattern::Normal {
                role,
                from_file,
                from_rank,
                to,
                promotion,
            } => {
                m.castle.is_none()
                    && m.to == to
                    && m.promotion == promotion
                    && self.piece_at(m.from).map(|p| p.role) == Some(role)
                    && from_file.is_none_or(|f| m.from.file() == f)
                    && from_rank.is_none_or(|r| m.from.rank() == r)
            }
        }
    }

    /// Standard Algebraic Notation with minimal disambiguation and `+`/`#`.
    pub fn emit_san(&self, m: &ChessMove) -> Result<String, SanError> {
        let legal = self.legal_moves();
        if !legal.contains(m) {
            return Err(SanError::Illegal {
                fen: self.emit_fen(),
                san: m.uci(),
            });
        }
        let mut san = match m.castle {
            Some(CastleSide::King) => "O-O".to_string(),
            Some(CastleSide::Queen) => "O-O-O".to_string(),
            None => self.san_body(m, &legal),
        };
        let next = self.play_unchecked(m);
        if next.is_check() {
            san.push(if next.legal_moves().is_empty() { '#' } else { '+' });
        }
        Ok(san)
    }

    fn san_body(&self, m: &ChessMove, legal: &[ChessMove]) -> String {
        let role = self.piece_at(m.from).expect("legal move has a piece").role;
        let mut s = String::with_capacity(7);
        if role == Role::Pawn {
            if m.capture {
                s.push(m.from.file_char());
            }
        } else {
            s.push(role.upper_char());
            let rivals: Vec<&ChessMove> = legal
                .iter()
                .filter(|o| {
                    o.to == m.to
                        && o.from != m.from
                        && o.castle.is_none()
                        && self.piece_at(o.from).map(|p| p.role) == Some(role)
                })
                .collect();
            if !rivals.is_empty() {
                let file_unique = rivals.iter().all(|o| o.from.file() != m.from.file());
                let rank_unique = rivals.iter().all(|o| o.from.rank() != m.from.rank());
                if file_unique {
                    s.push(m.from.file_char());
                } else if rank_unique {
                    s.push(m.from.rank_char());
                } else {
                    s.push(m.from.file_char());
                    s.push(m.from.rank_char());
                }
            }
        }
        if m.capture {
            s.push('x');
        }
        s.push_str(&m.to.to_string());
        if let Some(promo) = m.promotion {
            s.push('=');
            s.push(promo.upper_char());
        }
        s
    }
}
