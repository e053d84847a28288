//! Opening book: per-position, per-move game counts and result tallies.

mod format;

use std::collections::{BTreeMap, HashMap};

use crate::chess::{Position, PositionKey};
use crate::pgn::{GameRecord, GameResult, ReplayError};

pub use format::{book_bytes, load_book, save_book, BookFormatError, FORMAT_HEADER};

/// Default number of plies from the start of each game that feed the book.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

#[derive(Debug, thiserror::Error)]
pub enum BookError {
    #[error("max depth must be at least 1")]
    ZeroDepth,
    #[error("cannot merge books built to different depths ({0} vs {1})")]
    DepthMismatch(u32, u32),
}

/// Results of the games in which one move was played from one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub white_wins: u64,
    pub draws: u64,
    pub black_wins: u64,
}

impl Tally {
    pub fn games(&self) -> u64 {
        self.white_wins + self.draws + self.black_wins
    }

    fn record(&mut self, result: GameResult) {
        match result {
            GameResult::WhiteWin => self.white_wins += 1,
            GameResult::Draw => self.draws += 1,
            GameResult::BlackWin => self.black_wins += 1,
            GameResult::Unknown => unreachable!("unknown results never reach a tally"),
        }
    }

    fn add(&mut self, other: &Tally) {
        self.white_wins += other.white_wins;
        self.draws += other.draws;
        self.black_wins += other.black_wins;
    }
}

/// Statistics for one move: `games == white_wins + draws + black_wins`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveStats {
    pub san: String,
    pub games: u64,
    pub white_wins: u64,
    pub draws: u64,
    pub black_wins: u64,
}

impl MoveStats {
    pub fn new(san: impl Into<String>, white_wins: u64, draws: u64, black_wins: u64) -> MoveStats {
        MoveStats {
            san: san.into(),
            games: white_wins + draws + black_wins,
            white_wins,
            draws,
            black_wins,
        }
    }

    fn from_tally(san: &str, t: &Tally) -> MoveStats {
        MoveStats::new(san, t.white_wins, t.draws, t.black_wins)
    }

    /// Score from White's viewpoint in percent (win 1, draw 1/2).
    pub fn score_percent(&self) -> f64 {
        if self.games == 0 {
            return 0.0;
        }
        100.0 * (self.white_wins as f64 + self.draws as f64 / 2.0) / self.games as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMove {
    /// 1-based popularity rank.
    pub rank: u32,
    pub stats: MoveStats,
}

impl RankedMove {
    pub fn san(&self) -> &str {
        &self.stats.san
    }

    pub fn games(&self) -> u64 {
        self.stats.games
    }

    pub fn score_percent(&self) -> f64 {
        self.stats.score_percent()
    }
}

/// Moves of one position ordered by game count (descending), ties by SAN
/// (ascending), ranked 1..n.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedMoveList {
    entries: Vec<RankedMove>,
}

impl RankedMoveList {
    /// Ranks arbitrary move statistics. Duplicate SANs are summed.
    pub fn from_stats(stats: impl IntoIterator<Item = MoveStats>) -> RankedMoveList {
        let mut merged: BTreeMap<String, Tally> = BTreeMap::new();
        for s in stats {
            merged.entry(s.san).or_default().add(&Tally {
                white_wins: s.white_wins,
                draws: s.draws,
                black_wins: s.black_wins,
            });
        }
        Self::from_tallies(merged.iter().map(|(san, t)| (san.as_str(), t)))
    }

    fn from_tallies<'a>(tallies: impl Iterator<Item = (&'a str, &'a Tally)>) -> RankedMoveList {
        let mut stats: Vec<MoveStats> = tallies.map(|(san, t)| MoveStats::from_tally(san, t)).collect();
        stats.sort_by(|a, b| b.games.cmp(&a.games).then_with(|| a.san.cmp(&b.san)));
        RankedMoveList {
            entries: stats
                .into_iter()
                .enumerate()
                .map(|(i, stats)| RankedMove {
                    rank: i as u32 + 1,
                    stats,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedMove> {
        self.entries.iter()
    }

    pub fn get(&self, san: &str) -> Option<&RankedMove> {
        self.entries.iter().find(|e| e.stats.san == san)
    }

    pub fn total_games(&self) -> u64 {
        self.entries.iter().map(|e| e.stats.games).sum()
    }
}

impl<'a> IntoIterator for &'a RankedMoveList {
    type Item = &'a RankedMove;
    type IntoIter = std::slice::Iter<'a, RankedMove>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// An opening book. Equality compares every count and the metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Book {
    positions: HashMap<PositionKey, BTreeMap<String, Tally>>,
    source: String,
    games: u64,
    depth: u32,
}

impl Book {
    pub fn new(source: &str, depth: u32) -> Result<Book, BookError> {
        if depth == 0 {
            return Err(BookError::ZeroDepth);
        }
        Ok(Book {
            positions: HashMap::new(),
            source: sanitize_source(source),
            games: 0,
            depth,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of games that contributed to the book.
    pub fn game_count(&self) -> u64 {
        self.games
    }

    /// Number of distinct positions with at least one booked move.
    pub fn position_count(&self) -> u64 {
        self.positions.len() as u64
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn query(&self, position: &Position) -> RankedMoveList {
        self.query_key(&position.position_key())
    }

    pub fn query_key(&self, key: &PositionKey) -> RankedMoveList {
        match self.positions.get(key) {
            Some(moves) => RankedMoveList::from_tallies(moves.iter().map(|(s, t)| (s.as_str(), t))),
            None => RankedMoveList::default(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &PositionKey> {
        self.positions.keys()
    }

    /// Adds one game, counting its first `depth` plies. Games without a
    /// known result or that cannot be replayed are rejected untouched.
    pub fn add_game(&mut self, game: &GameRecord) -> Result<(), SkipReason> {
        if game.result == GameResult::Unknown {
            return Err(SkipReason::UnknownResult);
        }
        let plies = game.replay(self.depth as usize).map_err(SkipReason::Replay)?;
        for (pos, m) in &plies {
            let san = pos.emit_san(m).expect("replayed move is legal");
            self.positions
                .entry(pos.position_key())
                .or_default()
                .entry(san)
                .or_default()
                .record(game.result);
        }
        self.games += 1;
        Ok(())
    }

    pub(crate) fn insert_raw(&mut self, key: PositionKey, san: String, tally: Tally) {
        self.positions.entry(key).or_default().insert(san, tally);
    }

    pub(crate) fn set_game_count(&mut self, games: u64) {
        self.games = games;
    }

    pub(crate) fn raw_moves(&self, key: &PositionKey) -> Option<&BTreeMap<String, Tally>> {
        self.positions.get(key)
    }
}

fn sanitize_source(s: &str) -> String {
    s.chars().map(|c| if c.is_control() { ' ' } else { c }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SkipReason {
    #[error("game has no result")]
    UnknownResult,
    #[error(transparent)]
    Replay(ReplayError),
}

/// A game left out of a book, identified by its position in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedGame {
    /// 0-based index in the input sequence.
    pub index: usize,
    pub reason: SkipReason,
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub book: Book,
    pub skipped: Vec<SkippedGame>,
}

/// Builds a book from the first `max_depth` plies of every game.
pub fn build_book<I>(games: I, max_depth: u32, source: &str) -> Result<BuildOutcome, BookError>
where
    I: IntoIterator<Item = GameRecord>,
{
    let mut book = Book::new(source, max_depth)?;
    let mut skipped = Vec::new();
    for (index, game) in games.into_iter().enumerate() {
        if let Err(reason) = book.add_game(&game) {
            skipped.push(SkippedGame { index, reason });
        }
    }
    Ok(BuildOutcome { book, skipped })
}

/// Sums two books built to the same depth. The result keeps `a`'s source
/// when both agree, otherwise joins them with `+`.
pub fn merge_books(a: &Book, b: &Book) -> Result<Book, BookError> {
    if a.depth != b.depth {
        return Err(BookError::DepthMismatch(a.depth, b.depth));
    }
    let mut out = a.clone();
    for (key, moves) in &b.positions {
        let slot = out.positions.entry(*key).or_default();
        for (san, tally) in moves {
            slot.entry(san.clone()).or_default().add(tally);
        }
    }
    out.games += b.games;
    if a.source != b.source {
        out.source = match (a.source.is_empty(), b.source.is_empty()) {
            (true, _) => b.source.clone(),
            (_, true) => a.source.clone(),
            _ => format!("{}+{}", a.source, b.source),
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(moves: &[&str], result: GameResult) -> GameRecord {
        GameRecord {
            tags: Default::default(),
            moves: moves.iter().map(|s| s.to_string()).collect(),
            result,
        }
    }

    #[test]
    fn two_e4_games() {
        let games = vec![
            game(&["e4", "e5"], GameResult::WhiteWin),
            game(&["e4", "c5"], GameResult::Draw),
        ];
        let book = build_book(games, 40, "t").unwrap().book;
        let list = book.query(&Position::initial());
        assert_eq!(list.len(), 1);
        let e4 = list.get("e4").unwrap();
        assert_eq!(e4.rank, 1);
        assert_eq!(e4.stats, MoveStats::new("e4", 1, 1, 0));
        assert!((e4.score_percent() - 75.0).abs() < 1e-12);
        assert_eq!(book.game_count(), 2);
        assert_eq!(book.position_count(), 2);
    }

    #[test]
    fn transpositions_merge() {
        let games = vec![
            game(&["e4", "e5", "Nf3", "Nc6"], GameResult::WhiteWin),
            game(&["Nf3", "e5", "e4", "Nf6"], GameResult::BlackWin),
        ];
        let book = build_book(games, 40, "t").unwrap().book;
        let mut p = Position::initial();
        for san in ["e4", "e5", "Nf3"] {
            p = p.apply_move(&p.parse_san(san).unwrap()).unwrap();
        }
        let list = book.query(&p);
        assert_eq!(list.len(), 2);
        assert_eq!(list.total_games(), 2);
        let sans: Vec<_> = list.iter().map(|m| m.san()).collect();
        assert_eq!(sans, ["Nc6", "Nf6"]);
    }

    #[test]
    fn depth_limits_plies() {
        let book = build_book(vec![game(&["e4", "e5", "Nf3"], GameResult::Draw)], 2, "t")
            .unwrap()
            .book;
        assert_eq!(book.position_count(), 2);
        assert!(build_book(Vec::new(), 0, "t").is_err());
    }

    #[test]
    fn empty_input_gives_empty_book() {
        let out = build_book(Vec::new(), 40, "t").unwrap();
        assert_eq!(out.book.game_count(), 0);
        assert_eq!(out.book.position_count(), 0);
        assert!(out.book.query(&Position::initial()).is_empty());
    }

    #[test]
    fn bad_games_are_skipped() {
        let games = vec![
            game(&["e4"], GameResult::Unknown),
            game(&["e5"], GameResult::Draw),
            game(&["d4"], GameResult::Draw),
        ];
        let out = build_book(games, 40, "t").unwrap();
        assert_eq!(out.book.game_count(), 1);
        assert_eq!(out.skipped.len(), 2);
        assert_eq!(out.skipped[0].reason, SkipReason::UnknownResult);
        assert!(matches!(out.skipped[1].reason, SkipReason::Replay(_)));
    }

    #[test]
    fn ranks_follow_popularity_then_san() {
        let list = RankedMoveList::from_stats([
            MoveStats::new("c4", 0, 78408, 0),
            MoveStats::new("e4", 0, 448923, 0),
            MoveStats::new("Nf3", 0, 103542, 0),
            MoveStats::new("d4", 0, 361246, 0),
        ]);
        let order: Vec<_> = list.iter().map(|m| (m.rank, m.san())).collect();
        assert_eq!(order, [(1, "e4"), (2, "d4"), (3, "Nf3"), (4, "c4")]);

        let tied = RankedMoveList::from_stats([MoveStats::new("g3", 1, 0, 0), MoveStats::new("b3", 0, 1, 0)]);
        assert_eq!(tied.get("b3").unwrap().rank, 1);
        assert_eq!(tied.get("g3").unwrap().rank, 2);
    }

    #[test]
    fn merge_identity_and_depth_check() {
        let b = build_book(vec![game(&["e4", "e5"], GameResult::Draw)], 10, "s")
            .unwrap()
            .book;
        let empty = Book::new("s", 10).unwrap();
        assert_eq!(merge_books(&b, &empty).unwrap(), b);
        assert_eq!(merge_books(&empty, &b).unwrap(), b);
        let other = Book::new("s", 11).unwrap();
        assert!(matches!(merge_books(&b, &other), Err(BookError::DepthMismatch(10, 11))));
    }

    #[test]
    fn merge_sources() {
        let a = Book::new("a", 5).unwrap();
        let b = Book::new("b", 5).unwrap();
        assert_eq!(merge_books(&a, &b).unwrap().source(), "a+b");
        assert_eq!(merge_books(&a, &a).unwrap().source(), "a");
    }
}
