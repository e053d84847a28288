use super::types::{CastleSide, CastlingRights, ChessMove, Color, Piece, Role, Square};
use super::ChessError;

/// A chess position: placement, side to move, castling rights, en-passant
/// target and the two move clocks.
///
/// The en-passant target is stored as reported by the last double pawn push
/// (or the FEN it was parsed from). Canonical output (`emit_fen`,
/// `position_key`) only keeps it when an en-passant capture is legal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Position {
    pub(crate) board: [Option<Piece>; 64],
    pub(crate) turn: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) ep_square: Option<Square>,
    pub(crate) halfmove_clock: u32,
    pub(crate) fullmove_number: u32,
}

impl Default for Position {
    fn default() -> Self {
        Position::initial()
    }
}

impl std::fmt::Debug for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Position").field(&self.fen_raw()).finish()
    }
}

const BACK_RANK: [Role; 8] = [
    Role::Rook,
    Role::Knight,
    Role::Bishop,
    Role::Queen,
    Role::King,
    Role::Bishop,
    Role::Knight,
    Role::Rook,
];

impl Position {
    pub fn initial() -> Position {
        let mut board = [None; 64];
        for file in 0..8u8 {
            board[Square::from_coords(file, 0).index()] = Some(Piece::new(Color::White, BACK_RANK[file as usize]));
            board[Square::from_coords(file, 1).index()] = Some(Piece::new(Color::White, Role::Pawn));
            board[Square::from_coords(file, 6).index()] = Some(Piece::new(Color::Black, Role::Pawn));
            board[Square::from_coords(file, 7).index()] = Some(Piece::new(Color::Black, BACK_RANK[file as usize]));
        }
        Position {
            board,
            turn: Color::White,
            castling: CastlingRights::ALL,
            ep_square: None,
            halfmove_clock: 0,
            fullmove_number: 1,
        }
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn turn(&self) -> Color {
        self.turn
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    /// En-passant target as recorded, before legality normalization.
    pub fn ep_square(&self) -> Option<Square> {
        self.ep_square
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    /// En-passant target only if some legal move captures en passant.
    pub fn legal_ep_square(&self) -> Option<Square> {
        let ep = self.ep_square?;
        self.legal_moves()
            .iter()
            .any(|m| m.en_passant && m.to == ep)
            .then_some(ep)
    }

    /// Same position with the en-passant target dropped unless a capture is legal.
    pub fn with_normalized_ep(&self) -> Position {
        let mut p = self.clone();
        p.ep_square = self.legal_ep_square();
        p
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        Square::all().find(|&sq| self.board[sq.index()] == Some(Piece::new(color, Role::King)))
    }

    pub fn is_check(&self) -> bool {
        self.king_square(self.turn)
            .is_some_and(|k| self.is_attacked(k, self.turn.opposite()))
    }

    pub fn is_checkmate(&self) -> bool {
        self.is_check() && self.legal_moves().is_empty()
    }

    pub fn is_stalemate(&self) -> bool {
        !self.is_check() && self.legal_moves().is_empty()
    }

    /// Whether `sq` is attacked by any piece of color `by`.
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let is = |s: Option<Square>, role: Role| s.is_some_and(|s| self.board[s.index()] == Some(Piece::new(by, role)));
        // A pawn of `by` attacks sq from one rank behind (from its own viewpoint).
        let back = -by.forward();
        if is(sq.offset(-1, back), Role::Pawn) || is(sq.offset(1, back), Role::Pawn) {
            return true;
        }
        if KNIGHT_DELTAS
            .iter()
            .any(|&(df, dr)| is(sq.offset(df, dr), Role::Knight))
        {
            return true;
        }
        if KING_DELTAS.iter().any(|&(df, dr)| is(sq.offset(df, dr), Role::King)) {
            return true;
        }
        let slider_hit = |deltas: &[(i8, i8)], a: Role| {
            deltas.iter().any(|&(df, dr)| {
                let mut cur = sq;
                while let Some(next) = cur.offset(df, dr) {
                    if let Some(p) = self.board[next.index()] {
                        return p.color == by && (p.role == a || p.role == Role::Queen);
                    }
                    cur = next;
                }
                false
            })
        };
        slider_hit(&ROOK_DELTAS, Role::Rook) || slider_hit(&BISHOP_DELTAS, Role::Bishop)
    }

    /// All legal moves, in generation order (by origin square, then target).
    pub fn legal_moves(&self) -> Vec<ChessMove> {
        let mut pseudo = Vec::with_capacity(48);
        self.pseudo_legal_moves(&mut pseudo);
        let us = self.turn;
        pseudo.retain(|m| {
            let next = self.play_unchecked(m);
            next.king_square(us)
                .is_some_and(|k| !next.is_attacked(k, us.opposite()))
        });
        pseudo
    }

    /// Applies a move after checking it is legal.
    pub fn apply_move(&self, m: &ChessMove) -> Result<Position, ChessError> {
        if self.legal_moves().contains(m) {
            Ok(self.play_unchecked(m))
        } else {
            Err(ChessError::IllegalMove {
                fen: self.fen_raw(),
                mv: m.uci(),
            })
        }
    }

    /// Applies a pseudo-legal move without validating it.
    pub(crate) fn play_unchecked(&self, m: &ChessMove) -> Position {
        let mut next = self.clone();
        let us = self.turn;
        let moving = self.board[m.from.index()].expect("move from an empty square");

        next.board[m.from.index()] = None;
        if m.en_passant {
            let victim = Square::from_coords(m.to.file(), m.from.rank());
            next.board[victim.index()] = None;
        }
        next.board[m.to.index()] = Some(match m.promotion {
            Some(role) => Piece::new(us, role),
            None => moving,
        });
        if let Some(side) = m.castle {
            let rank = us.back_rank();
            let rook_from = Square::from_coords(side.rook_file(), rank);
            let rook_to = Square::from_coords(side.rook_to_file(), rank);
            next.board[rook_from.index()] = None;
            next.board[rook_to.index()] = Some(Piece::new(us, Role::Rook));
        }

        if moving.role == Role::King {
            next.castling.set(us, CastleSide::King, false);
            next.castling.set(us, CastleSide::Queen, false);
        }
        for sq in [m.from, m.to] {
            for color in [Color::White, Color::Black] {
                for side in [CastleSide::King, CastleSide::Queen] {
                    if sq == Square::from_coords(side.rook_file(), color.back_rank()) {
                        next.castling.set(color, side, false);
                    }
                }
            }
        }

        next.ep_square = None;
        if moving.role == Role::Pawn && m.from.rank().abs_diff(m.to.rank()) == 2 {
            next.ep_square = m.from.offset(0, us.forward());
        }

        if moving.role == Role::Pawn || m.capture {
            next.halfmove_clock = 0;
        } else {
            next.halfmove_clock = self.halfmove_clock + 1;
        }
        if us == Color::Black {
            next.fullmove_number = self.fullmove_number + 1;
        }
        next.turn = us.opposite();
        next
    }

    fn pseudo_legal_moves(&self, out: &mut Vec<ChessMove>) {
        let us = self.turn;
        for from in Square::all() {
            let Some(piece) = self.board[from.index()] else {
                continue;
            };
            if piece.color != us {
                continue;
            }
            match piece.role {
                Role::Pawn => self.pawn_moves(from, out),
                Role::Knight => self.step_moves(from, &KNIGHT_DELTAS, out),
                Role::King => {
                    self.step_moves(from, &KING_DELTAS, out);
                    self.castle_moves(from, out);
                }
                Role::Bishop => self.slide_moves(from, &BISHOP_DELTAS, out),
                Role::Rook => self.slide_moves(from, &ROOK_DELTAS, out),
                Role::Queen => {
                    self.slide_moves(from, &ROOK_DELTAS, out);
                    self.slide_moves(from, &BISHOP_DELTAS, out);
                }
            }
        }
    }

    fn plain(from: Square, to: Square, capture: bool) -> ChessMove {
        ChessMove {
            from,
            to,
            promotion: None,
            capture,
            en_passant: false,
            castle: None,
        }
    }

    fn pawn_moves(&self, from: Square, out: &mut Vec<ChessMove>) {
        let us = self.turn;
        let fwd = us.forward();
        let last_rank = us.opposite().back_rank();
        let start_rank = if us == Color::White { 1 } else { 6 };
        let push = |to: Square, capture: bool, out: &mut Vec<ChessMove>| {
            if to.rank() == last_rank {
                for role in Role::PROMOTIONS {
                    out.push(ChessMove {
                        promotion: Some(role),
                        ..Self::plain(from, to, capture)
                    });
                }
            } else {
                out.push(Self::plain(from, to, capture));
            }
        };
        if let Some(one) = from.offset(0, fwd) {
            if self.board[one.index()].is_none() {
                push(one, false, out);
                if from.rank() == start_rank {
                    let two = one.offset(0, fwd).expect("double push stays on board");
                    if self.board[two.index()].is_none() {
                        out.push(Self::plain(from, two, false));
                    }
                }
            }
        }
        for df in [-1, 1] {
            let Some(to) = from.offset(df, fwd) else {
                continue;
            };
            match self.board[to.index()] {
                Some(p) if p.color != us => push(to, true, out),
                None if self.ep_square == Some(to) => out.push(ChessMove {
                    en_passant: true,
                    ..Self::plain(from, to, true)
                }),
                _ => {}
            }
        }
    }

    fn step_moves(&self, from: Square, deltas: &[(i8, i8)], out: &mut Vec<ChessMove>) {
        for &(df, dr) in deltas {
            if let Some(to) = from.offset(df, dr) {
                match self.board[to.index()] {
                    None => out.push(Self::plain(from, to, false)),
                    Some(p) if p.color != self.turn => out.push(Self::plain(from, to, true)),
                    _ => {}
                }
            }
        }
    }

    fn slide_moves(&self, from: Square, deltas: &[(i8, i8)], out: &mut Vec<ChessMove>) {
        for &(df, dr) in deltas {
            let mut cur = from;
            while let Some(to) = cur.offset(df, dr) {
                match self.board[to.index()] {
                    None => out.push(Self::plain(from, to, false)),
                    Some(p) => {
                        if p.color != self.turn {
                            out.push(Self::plain(from, to, true));
                        }
                        break;
                    }
                }
                cur = to;
            }
        }
    }

    fn castle_moves(&self, from: Square, out: &mut Vec<ChessMove>) {
        let us = self.turn;
        let rank = us.back_rank();
        if from != Square::from_coords(4, rank) {
            return;
        }
        let them = us.opposite();
        for side in [CastleSide::King, CastleSide::Queen] {
            if !self.castling.has(us, side) {
                continue;
            }
            let rook_file = side.rook_file();
            let (lo, hi) = if rook_file > 4 {
                (5, rook_file)
            } else {
                (rook_file + 1, 4)
            };
            let clear = (lo..hi).all(|f| self.board[Square::from_coords(f, rank).index()].is_none());
            if !clear {
                continue;
            }
            let king_to = side.king_to_file();
            let (a, b) = if king_to > 4 { (4, king_to) } else { (king_to, 4) };
            let safe = (a..=b).all(|f| !self.is_attacked(Square::from_coords(f, rank), them));
            if safe {
                out.push(ChessMove {
                    castle: Some(side),
                    ..Self::plain(from, Square::from_coords(king_to, rank), false)
                });
            }
        }
    }
}

pub(crate) const KNIGHT_DELTAS: [(i8, i8); 8] =
    [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
pub(crate) const KING_DELTAS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DELTAS: [(i8, i8); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const BISHOP_DELTAS: [(i8, i8); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];
