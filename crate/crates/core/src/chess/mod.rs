//! Chess rules: positions, FEN/EPD, legal move generation, SAN and
//! canonical position keys.

mod fen;
mod key;
mod position;
mod san;
mod types;

pub use fen::{FenError, FenField, INITIAL_FEN};
pub use key::PositionKey;
pub use position::Position;
pub use san::SanError;
pub use types::{CastleSide, CastlingRights, ChessMove, Color, Piece, Role, Square};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChessError {
    #[error(transparent)]
    Fen(#[from] FenError),
    #[error(transparent)]
    San(#[from] SanError),
    #[error("illegal move {mv} in {fen}")]
    IllegalMove { fen: String, mv: String },
}

/// Counts leaf nodes of the legal move tree to `depth` plies.
pub fn perft(p: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = p.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|m| perft(&p.play_unchecked(m), depth - 1)).sum()
}
