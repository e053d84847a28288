use std::fmt;

use super::position::Position;
use super::types::{CastleSide, CastlingRights, Color, Piece, Role, Square};

pub const INITIAL_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FenField {
    Record,
    Placement,
    SideToMove,
    Castling,
    EnPassant,
    HalfmoveClock,
    FullmoveNumber,
}

impl fmt::Display for FenField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FenField::Record => "record",
            FenField::Placement => "piece placement",
            FenField::SideToMove => "side to move",
            FenField::Castling => "castling",
            FenField::EnPassant => "en passant",
            FenField::HalfmoveClock => "halfmove clock",
            FenField::FullmoveNumber => "fullmove number",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid FEN ({field}): {reason}")]
pub struct FenError {
    pub field: FenField,
    pub reason: String,
}

fn err(field: FenField, reason: impl Into<String>) -> FenError {
    FenError {
        field,
        reason: reason.into(),
    }
}

impl Position {
    /// Parses a 6-field FEN, or the 4-field EPD prefix (clocks default to 0 and 1).
    pub fn parse_fen(text: &str) -> Result<Position, FenError> {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if !(4..=6).contains(&fields.len()) {
            return Err(err(
                FenField::Record,
                format!("expected 4 to 6 fields, found {}", fields.len()),
            ));
        }
        Position::from_fields(&fields)
    }

    pub(crate) fn from_fields(fields: &[&str]) -> Result<Position, FenError> {
        let board = parse_placement(fields[0])?;
        let turn = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            other => return Err(err(FenField::SideToMove, format!("'{other}'"))),
        };
        let castling = parse_castling(fields[2])?;
        let ep_square = match fields[3] {
            "-" => None,
            s => Some(Square::parse(s).ok_or_else(|| err(FenField::EnPassant, format!("'{s}'")))?),
        };
        let halfmove_clock = match fields.get(4) {
            None => 0,
            Some(s) => s.parse().map_err(|_| err(FenField::HalfmoveClock, format!("'{s}'")))?,
        };
        let fullmove_number = match fields.get(5) {
            None => 1,
            Some(s) => match s.parse::<u32>() {
                Ok(n) if n >= 1 => n,
                _ => return Err(err(FenField::FullmoveNumber, format!("'{s}'"))),
            },
        };
        let pos = Position {
            board,
            turn,
            castling,
            ep_square,
            halfmove_clock,
            fullmove_number,
        };
        pos.validate()?;
        Ok(pos)
    }

    fn validate(&self) -> Result<(), FenError> {
        for color in [Color::White, Color::Black] {
            let kings = self
                .board
                .iter()
                .filter(|p| **p == Some(Piece::new(color, Role::King)))
                .count();
            if kings != 1 {
                return Err(err(
                    FenField::Placement,
                    format!("{color:?} has {kings} kings, expected exactly one"),
                ));
            }
        }
        for sq in Square::all() {
            if let Some(p) = self.board[sq.index()] {
                if p.role == Role::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                    return Err(err(FenField::Placement, format!("pawn on back rank at {sq}")));
                }
            }
        }
        for color in [Color::White, Color::Black] {
            for side in [CastleSide::King, CastleSide::Queen] {
                if !self.castling.has(color, side) {
                    continue;
                }
                let rank = color.back_rank();
                let king_home = self.piece_at(Square::from_coords(4, rank)) == Some(Piece::new(color, Role::King));
                let rook_home =
                    self.piece_at(Square::from_coords(side.rook_file(), rank)) == Some(Piece::new(color, Role::Rook));
                if !king_home || !rook_home {
                    return Err(err(
                        FenField::Castling,
                        format!("{color:?} {side:?}-side right without king and rook on home squares"),
                    ));
                }
            }
        }
        if let Some(ep) = self.ep_square {
            // The pawn that just moved belongs to the side not to move.
            let mover = self.turn.opposite();
            let expected_rank = if mover == Color::White { 2 } else { 5 };
            if ep.rank() != expected_rank {
                return Err(err(FenField::EnPassant, format!("{ep} is not on the expected rank")));
            }
            let pawn_sq = ep.offset(0, mover.forward()).expect("ep rank is interior");
            let origin = ep.offset(0, -mover.forward()).expect("ep rank is interior");
            if self.piece_at(pawn_sq) != Some(Piece::new(mover, Role::Pawn))
                || self.piece_at(ep).is_some()
                || self.piece_at(origin).is_some()
            {
                return Err(err(
                    FenField::EnPassant,
                    format!("{ep} does not follow a double pawn push"),
                ));
            }
        }
        let them = self.turn.opposite();
        let their_king = self.king_square(them).expect("king count checked");
        if self.is_attacked(their_king, self.turn) {
            return Err(err(FenField::SideToMove, "side not to move is in check"));
        }
        Ok(())
    }

    /// Canonical 6-field FEN; the en-passant field is `-` unless a capture is legal.
    pub fn emit_fen(&self) -> String {
        format!("{} {} {}", self.epd_fields(), self.halfmove_clock, self.fullmove_number)
    }

    /// Canonical 4-field form (placement, side, castling, en passant).
    pub fn epd_fields(&self) -> String {
        self.fields_with_ep(self.legal_ep_square())
    }

    /// FEN as stored, without en-passant normalization.
    pub fn fen_raw(&self) -> String {
        format!(
            "{} {} {}",
            self.fields_with_ep(self.ep_square),
            self.halfmove_clock,
            self.fullmove_number
        )
    }

    fn fields_with_ep(&self, ep: Option<Square>) -> String {
        let mut s = String::with_capacity(80);
        for rank in (0..8u8).rev() {
            let mut empty = 0;
            for file in 0..8u8 {
                match self.board[Square::from_coords(file, rank).index()] {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            s.push(char::from(b'0' + empty));
                            empty = 0;
                        }
                        s.push(p.fen_char());
                    }
                }
            }
            if empty > 0 {
                s.push(char::from(b'0' + empty));
            }
            if rank > 0 {
                s.push('/');
            }
        }
        s.push(' ');
        s.push(self.turn.fen_char());
        s.push(' ');
        s.push_str(&castling_field(&self.castling));
        s.push(' ');
        match ep {
            Some(sq) => s.push_str(&sq.to_string()),
            None => s.push('-'),
        }
        s
    }
}

fn castling_field(c: &CastlingRights) -> String {
    let mut s = String::new();
    if c.white_king {
        s.push('K');
    }
    if c.white_queen {
        s.push('Q');
    }
    if c.black_king {
        s.push('k');
    }
    if c.black_queen {
        s.push('q');
    }
    if s.is_empty() {
        s.push('-');
    }
    s
}

fn parse_placement(text: &str) -> Result<[Option<Piece>; 64], FenError> {
    let mut board = [None; 64];
    let ranks: Vec<&str> = text.split('/').collect();
    if ranks.len() != 8 {
        return Err(err(
            FenField::Placement,
            format!("expected 8 ranks, found {}", ranks.len()),
        ));
    }
    for (i, row) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(err(FenField::Placement, format!("bad empty-run '{c}'")));
                }
                file += d as u8;
            } else if let Some(piece) = Piece::from_fen_char(c) {
                if file >= 8 {
                    return Err(err(FenField::Placement, format!("rank {} too long", rank + 1)));
                }
                board[Square::from_coords(file, rank).index()] = Some(piece);
                file += 1;
            } else {
                return Err(err(FenField::Placement, format!("unexpected character '{c}'")));
            }
            if file > 8 {
                return Err(err(FenField::Placement, format!("rank {} too long", rank + 1)));
            }
        }
        if file != 8 {
            return Err(err(FenField::Placement, format!("rank {} has {file} files", rank + 1)));
        }
    }
    Ok(board)
}

fn parse_castling(text: &str) -> Result<CastlingRights, FenError> {
    let mut rights = CastlingRights::default();
    if text == "-" {
        return Ok(rights);
    }
    for c in text.chars() {
        let (color, side) = match c {
            'K' => (Color::White, CastleSide::King),
            'Q' => (Color::White, CastleSide::Queen),
            'k' => (Color::Black, CastleSide::King),
            'q' => (Color::Black, CastleSide::Queen),
            _ => return Err(err(FenField::Castling, format!("unexpected character '{c}'"))),
        };
        if rights.has(color, side) {
            return Err(err(FenField::Castling, format!("duplicate '{c}'")));
        }
        rights.set(color, side, true);
    }
    Ok(rights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_position_round_trip() {
        let p = Position::parse_fen(INITIAL_FEN).unwrap();
        assert_eq!(p, Position::initial());
        assert_eq!(p.emit_fen(), INITIAL_FEN);
    }

    #[test]
    fn epd_prefix_defaults_clocks() {
        let p = Position::parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -").unwrap();
        assert_eq!(p.halfmove_clock(), 0);
        assert_eq!(p.fullmove_number(), 1);
    }

    #[test]
    fn empty_board_has_no_kings() {
        let e = Position::parse_fen("8/8/8/8/8/8/8/8 w - - 0 1").unwrap_err();
        assert_eq!(e.field, FenField::Placement);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP w KQkq - 0 1", FenField::Placement),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1",
                FenField::SideToMove,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkx - 0 1",
                FenField::Castling,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq z9 0 1",
                FenField::EnPassant,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - x 1",
                FenField::HalfmoveClock,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 0",
                FenField::FullmoveNumber,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBN1 w KQkq - 0 1",
                FenField::Castling,
            ),
            (
                "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e3 0 1",
                FenField::EnPassant,
            ),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR", FenField::Record),
        ];
        for (fen, field) in cases {
            let e = Position::parse_fen(fen).unwrap_err();
            assert_eq!(e.field, field, "{fen}: {e}");
        }
    }

    #[test]
    fn side_not_to_move_in_check_rejected() {
        // White to move while the black king is attacked by the rook on e1.
        let e = Position::parse_fen("4k3/8/8/8/8/8/8/K3R3 w - - 0 1").unwrap_err();
        assert_eq!(e.field, FenField::SideToMove);
    }

    #[test]
    fn ep_field_dropped_when_no_capture_possible() {
        let p = Position::parse_fen("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1").unwrap();
        assert_eq!(p.ep_square(), Square::parse("e3"));
        assert_eq!(
            p.emit_fen(),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1"
        );
        assert_eq!(
            p.fen_raw(),
            "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1"
        );
    }

    #[test]
    fn ep_field_kept_when_capture_legal() {
        let fen = "rnbqkbnr/ppp1pppp/8/8/3pP3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 3";
        assert_eq!(Position::parse_fen(fen).unwrap().emit_fen(), fen);
    }
}
