use super::position::Position;
use super::types::{CastlingRights, Color, Piece, Role, Square};

/// Canonical identity of a position for book lookups.
///
/// Packs the placement (one nibble per square), side to move, castling
/// rights and the en-passant file when, and only when, an en-passant capture
/// is legal. Clocks are not part of the key. The encoding is exact, so keys
/// never collide and can be turned back into a position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionKey([u8; 34]);

fn nibble(p: Option<Piece>) -> u8 {
    match p {
        None => 0,
        Some(p) => {
            let role = p.role as u8 + 1;
            match p.color {
                Color::White => role,
                Color::Black => role | 8,
            }
        }
    }
}

fn piece_from_nibble(n: u8) -> Option<Piece> {
    let role = match n & 7 {
        0 => return None,
        1 => Role::Pawn,
        2 => Role::Knight,
        3 => Role::Bishop,
        4 => Role::Rook,
        5 => Role::Queen,
        _ => Role::King,
    };
    let color = if n & 8 == 0 { Color::White } else { Color::Black };
    Some(Piece::new(color, role))
}

impl Position {
    pub fn position_key(&self) -> PositionKey {
        let mut bytes = [0u8; 34];
        for (byte, pair) in bytes.iter_mut().zip(self.board.chunks_exact(2)) {
            *byte = nibble(pair[0]) | nibble(pair[1]) << 4;
        }
        bytes[32] = (self.turn == Color::Black) as u8 | self.castling.bits() << 1;
        bytes[33] = self.legal_ep_square().map_or(0, |sq| sq.file() + 1);
        PositionKey(bytes)
    }
}

impl PositionKey {
    /// Rebuilds the keyed position with clocks reset to 0 and 1.
    pub fn to_position(&self) -> Position {
        let mut board = [None; 64];
        for i in 0..32 {
            board[2 * i] = piece_from_nibble(self.0[i] & 0x0f);
            board[2 * i + 1] = piece_from_nibble(self.0[i] >> 4);
        }
        let turn = if self.0[32] & 1 == 0 {
            Color::White
        } else {
            Color::Black
        };
        let ep_square = match self.0[33] {
            0 => None,
            f => {
                let rank = if turn == Color::White { 5 } else { 2 };
                Some(Square::from_coords(f - 1, rank))
            }
        };
        Position {
            board,
            turn,
            castling: CastlingRights::from_bits(self.0[32] >> 1),
            ep_square,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    pub fn as_bytes(&self) -> &[u8; 34] {
        &self.0
    }
}

impl std::fmt::Debug for PositionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("PositionKey")
            .field(&self.to_position().epd_fields())
            .finish()
    }
}
