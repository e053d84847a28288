//! Streaming PGN reader.
//!
//! Games are read one at a time from any `BufRead`. Only tag pairs and the
//! mainline survive; comments, NAGs and variations are dropped. Every game
//! is replayed while it is read, so a yielded [`GameRecord`] is always legal.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::{self, BufRead};
use std::sync::Arc;

use crate::chess::{ChessMove, FenError, Position, SanError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameResult {
    WhiteWin,
    Draw,
    BlackWin,
    Unknown,
}

impl GameResult {
    pub fn from_marker(s: &str) -> Option<GameResult> {
        Some(match s {
            "1-0" => GameResult::WhiteWin,
            "0-1" => GameResult::BlackWin,
            "1/2-1/2" => GameResult::Draw,
            "*" => GameResult::Unknown,
            _ => return None,
        })
    }

    pub fn marker(self) -> &'static str {
        match self {
            GameResult::WhiteWin => "1-0",
            GameResult::BlackWin => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unknown => "*",
        }
    }
}

impl fmt::Display for GameResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.marker())
    }
}

/// One game: its tags, the mainline in canonical SAN, and the result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    pub tags: BTreeMap<String, String>,
    pub moves: Vec<String>,
    pub result: GameResult,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("bad FEN tag: {0}")]
    Fen(#[from] FenError),
    #[error("move {ply} ('{san}') cannot be played in {fen}: {source}")]
    Move {
        /// 1-based ply index into the mainline.
        ply: usize,
        san: String,
        fen: String,
        source: SanError,
    },
}

impl GameRecord {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags.get(name).map(String::as_str)
    }

    /// The start position: the `FEN` tag if present, otherwise the initial position.
    pub fn start_position(&self) -> Result<Position, FenError> {
        match self.tag("FEN") {
            Some(fen) => Position::parse_fen(fen),
            None => Ok(Position::initial()),
        }
    }

    /// Replays the first `limit` plies, returning each position before its move.
    pub fn replay(&self, limit: usize) -> Result<Vec<(Position, ChessMove)>, ReplayError> {
        let mut pos = self.start_position()?;
        let mut out = Vec::with_capacity(limit.min(self.moves.len()));
        for (i, san) in self.moves.iter().take(limit).enumerate() {
            let m = pos.parse_san(san).map_err(|source| ReplayError::Move {
                ply: i + 1,
                san: san.clone(),
                fen: pos.emit_fen(),
                source,
            })?;
            let next = pos.apply_move(&m).expect("parsed SAN is legal");
            out.push((std::mem::replace(&mut pos, next), m));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MalformedReason {
    Replay(ReplayError),
    ResultMismatch { tag: String, marker: String },
    Syntax(String),
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MalformedReason::Replay(e) => write!(f, "{e}"),
            MalformedReason::ResultMismatch { tag, marker } => {
                write!(f, "Result tag '{tag}' disagrees with termination marker '{marker}'")
            }
            MalformedReason::Syntax(s) => f.write_str(s),
        }
    }
}

/// A game that was skipped, with enough context to find it in the source.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("game {index} (line {line}): {reason}")]
pub struct MalformedGame {
    /// 1-based index of the game in the stream.
    pub index: usize,
    /// 1-based line where the game starts.
    pub line: usize,
    pub reason: MalformedReason,
}

#[derive(Debug, thiserror::Error)]
pub enum PgnError {
    #[error(transparent)]
    Malformed(#[from] MalformedGame),
    #[error("read error at line {line}: {source}")]
    Io { line: usize, source: io::Error },
}

#[derive(Default)]
struct PendingGame {
    line: usize,
    tags: BTreeMap<String, String>,
    tokens: Vec<String>,
    marker: Option<String>,
    syntax: Option<String>,
}

impl PendingGame {
    fn has_movetext(&self) -> bool {
        !self.tokens.is_empty() || self.marker.is_some()
    }
}

/// Iterator over the games of a PGN stream.
///
/// Yields `Ok(GameRecord)` or `Err(PgnError::Malformed)` once per game; an
/// I/O failure yields `Err(PgnError::Io)` and ends the stream.
pub struct PgnReader<R> {
    source: R,
    line_no: usize,
    buf: Vec<u8>,
    game: Option<PendingGame>,
    in_comment: bool,
    variation_depth: usize,
    ready: VecDeque<Result<GameRecord, PgnError>>,
    games_seen: usize,
    done: bool,
}

impl<R: BufRead> PgnReader<R> {
    pub fn new(source: R) -> PgnReader<R> {
        PgnReader {
            source,
            line_no: 0,
            buf: Vec::new(),
            game: None,
            in_comment: false,
            variation_depth: 0,
            ready: VecDeque::new(),
            games_seen: 0,
            done: false,
        }
    }

    /// Number of games encountered so far (yielded plus reported malformed).
    pub fn games_seen(&self) -> usize {
        self.games_seen
    }

    fn start_game(&mut self) -> &mut PendingGame {
        self.in_comment = false;
        self.variation_depth = 0;
        self.game.insert(PendingGame {
            line: self.line_no,
            ..Default::default()
        })
    }

    fn finish_game(&mut self) {
        let Some(mut game) = self.game.take() else {
            return;
        };
        if self.in_comment {
            game.syntax.get_or_insert_with(|| "unterminated comment".to_string());
        } else if self.variation_depth > 0 {
            game.syntax.get_or_insert_with(|| "unterminated variation".to_string());
        }
        self.in_comment = false;
        self.variation_depth = 0;
        self.games_seen += 1;
        let index = self.games_seen;
        let line = game.line;
        let item = finalize(game).map_err(|reason| PgnError::Malformed(MalformedGame { index, line, reason }));
        self.ready.push_back(item);
    }

    fn process_line(&mut self, line: &str) {
        if line.starts_with('%') {
            return;
        }
        let trimmed = line.trim_start();
        if trimmed.starts_with('[') && looks_like_tag(trimmed) {
            let interrupted = self.in_comment || self.variation_depth > 0;
            let needs_new = match &self.game {
                None => true,
                Some(g) => g.has_movetext() || interrupted,
            };
            if needs_new {
                self.finish_game();
                self.start_game();
            }
            let game = self.game.as_mut().expect("game started");
            parse_tags(trimmed, game);
            return;
        }
        if self.in_comment || !line.trim().is_empty() {
            self.movetext(line);
        }
    }

    fn movetext(&mut self, line: &str) {
        let mut token = String::new();
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            if self.in_comment {
                if c == '}' {
                    self.in_comment = false;
                }
                continue;
            }
            match c {
                '{' | ';' | '(' | ')' | '$' => {
                    self.flush_token(&mut token);
                    match c {
                        '{' => self.in_comment = true,
                        ';' => return,
                        '(' => self.variation_depth += 1,
                        ')' => {
                            if self.variation_depth == 0 {
                                self.ensure_game().syntax.get_or_insert_with(|| "unbalanced ')'".into());
                            } else {
                                self.variation_depth -= 1;
                            }
                        }
                        _ => {
                            while chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                                chars.next();
                            }
                        }
                    }
                }
                c if c.is_whitespace() => self.flush_token(&mut token),
                c => token.push(c),
            }
        }
        self.flush_token(&mut token);
    }

    fn ensure_game(&mut self) -> &mut PendingGame {
        if self.game.is_none() {
            self.start_game();
        }
        self.game.as_mut().expect("game started")
    }

    fn flush_token(&mut self, token: &mut String) {
        if token.is_empty() {
            return;
        }
        let raw = std::mem::take(token);
        if self.variation_depth > 0 {
            return;
        }
        let body = strip_move_number(&raw);
        if body.is_empty() || body.chars().all(|c| c == '.') || body == "e.p." {
            return;
        }
        if GameResult::from_marker(body).is_some() {
            let game = self.ensure_game();
            if game.marker.is_none() {
                game.marker = Some(body.to_string());
            }
            return;
        }
        // Movetext after a termination marker without a tag section starts a new game.
        if self.game.as_ref().is_some_and(|g| g.marker.is_some()) {
            self.finish_game();
        }
        self.ensure_game().tokens.push(body.to_string());
    }

    fn fill(&mut self) {
        while self.ready.is_empty() && !self.done {
            self.buf.clear();
            match self.source.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.finish_game();
                    self.done = true;
                }
                Ok(_) => {
                    self.line_no += 1;
                    let line = decode_line(&self.buf);
                    self.process_line(line.trim_end_matches(['\n', '\r']));
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(source) => {
                    self.game = None;
                    self.done = true;
                    self.ready.push_back(Err(PgnError::Io {
                        line: self.line_no + 1,
                        source,
                    }));
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for PgnReader<R> {
    type Item = Result<GameRecord, PgnError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.fill();
        self.ready.pop_front()
    }
}

/// UTF-8 where valid; each byte of an invalid sequence is read as Latin-1.
fn decode_line(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        out.extend(chunk.invalid().iter().map(|&b| b as char));
    }
    out
}

fn looks_like_tag(line: &str) -> bool {
    let rest = &line[1..];
    let name_len = rest
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
        .count();
    name_len > 0 && rest[name_len..].trim_start().starts_with('"')
}

fn parse_tags(line: &str, game: &mut PendingGame) {
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => return,
            Some('[') => {}
            Some(_) => {
                game.syntax
                    .get_or_insert_with(|| format!("unexpected text in tag line: {line}"));
                return;
            }
        }
        let name: String = std::iter::from_fn(|| chars.next_if(|c| c.is_ascii_alphanumeric() || *c == '_')).collect();
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if name.is_empty() || chars.next() != Some('"') {
            game.syntax.get_or_insert_with(|| format!("malformed tag pair: {line}"));
            return;
        }
        let mut value = String::new();
        let mut closed = false;
        while let Some(c) = chars.next() {
            match c {
                '\\' => {
                    if let Some(escaped) = chars.next() {
                        value.push(escaped);
                    }
                }
                '"' => {
                    closed = true;
                    break;
                }
                c => value.push(c),
            }
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if !closed || chars.next() != Some(']') {
            game.syntax.get_or_insert_with(|| format!("malformed tag pair: {line}"));
            return;
        }
        game.tags.insert(name, value);
    }
}

/// Drops a leading move number such as `12.` or `12...`.
fn strip_move_number(token: &str) -> &str {
    let digits = token.chars().take_while(char::is_ascii_digit).count();
    if digits == 0 {
        return token;
    }
    let rest = &token[digits..];
    if rest.starts_with('.') {
        rest.trim_start_matches('.')
    } else if rest.is_empty() {
        ""
    } else {
        token
    }
}

fn is_null_move(token: &str) -> bool {
    matches!(token, "--" | "Z0" | "0000" | "@@@@")
}

fn finalize(game: PendingGame) -> Result<GameRecord, MalformedReason> {
    if let Some(s) = game.syntax {
        return Err(MalformedReason::Syntax(s));
    }
    let tag_result = game.tags.get("Result").and_then(|r| GameResult::from_marker(r));
    let marker_result = game.marker.as_deref().and_then(GameResult::from_marker);
    let result = match (tag_result, marker_result) {
        (Some(t), Some(m)) if t != GameResult::Unknown && m != GameResult::Unknown && t != m => {
            return Err(MalformedReason::ResultMismatch {
                tag: t.marker().to_string(),
                marker: m.marker().to_string(),
            });
        }
        (_, Some(m)) if m != GameResult::Unknown => m,
        (Some(t), _) => t,
        _ => GameResult::Unknown,
    };

    let mut record = GameRecord {
        tags: game.tags,
        moves: Vec::with_capacity(game.tokens.len()),
        result,
    };
    let mut pos = record
        .start_position()
        .map_err(|e| MalformedReason::Replay(ReplayError::Fen(e)))?;
    for (i, token) in game.tokens.iter().enumerate() {
        if is_null_move(token) {
            break;
        }
        let m = pos.parse_san(token).map_err(|source| {
            MalformedReason::Replay(ReplayError::Move {
                ply: i + 1,
                san: token.clone(),
                fen: pos.emit_fen(),
                source,
            })
        })?;
        record.moves.push(pos.emit_san(&m).expect("parsed move is legal"));
        pos = pos.apply_move(&m).expect("parsed move is legal");
    }
    Ok(record)
}

pub type TagPredicate = Arc<dyn Fn(&BTreeMap<String, String>) -> bool + Send + Sync>;

/// Which games to keep. The default drops games without a known result.
#[derive(Clone)]
pub struct GameFilter {
    /// Both `WhiteElo` and `BlackElo` must be present and at least this.
    pub min_rating: Option<u32>,
    pub tag_predicates: Vec<TagPredicate>,
    pub require_result: bool,
}

impl Default for GameFilter {
    fn default() -> Self {
        GameFilter {
            min_rating: None,
            tag_predicates: Vec::new(),
            require_result: true,
        }
    }
}

impl fmt::Debug for GameFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameFilter")
            .field("min_rating", &self.min_rating)
            .field("tag_predicates", &self.tag_predicates.len())
            .field("require_result", &self.require_result)
            .finish()
    }
}

impl GameFilter {
    /// A filter that keeps every game.
    pub fn accept_all() -> GameFilter {
        GameFilter {
            require_result: false,
            ..GameFilter::default()
        }
    }

    pub fn with_tag_predicate<F>(mut self, f: F) -> GameFilter
    where
        F: Fn(&BTreeMap<String, String>) -> bool + Send + Sync + 'static,
    {
        self.tag_predicates.push(Arc::new(f));
        self
    }

    /// Keeps games whose `TimeControl` base time is at least `seconds`.
    pub fn with_min_base_time(self, seconds: u32) -> GameFilter {
        self.with_tag_predicate(move |tags| {
            tags.get("TimeControl")
                .and_then(|tc| base_time_seconds(tc))
                .is_some_and(|base| base >= seconds)
        })
    }

    pub fn accepts(&self, game: &GameRecord) -> bool {
        if self.require_result && game.result == GameResult::Unknown {
            return false;
        }
        if let Some(min) = self.min_rating {
            let rating = |name| game.tag(name).and_then(|v| v.trim().parse::<u32>().ok());
            match (rating("WhiteElo"), rating("BlackElo")) {
                (Some(w), Some(b)) if w >= min && b >= min => {}
                _ => return false,
            }
        }
        self.tag_predicates.iter().all(|p| p(&game.tags))
    }
}

/// Base time in seconds from a PGN `TimeControl` value (`5400+30`, `40/7200:3600`, `1800`).
pub fn base_time_seconds(tc: &str) -> Option<u32> {
    let first = tc.split(':').next()?;
    let base = first.split('/').next_back()?;
    base.split('+').next()?.trim().parse().ok()
}

pub fn filter_games<'a, I>(games: I, filter: &'a GameFilter) -> impl Iterator<Item = GameRecord> + 'a
where
    I: IntoIterator<Item = GameRecord>,
    I::IntoIter: 'a,
{
    games.into_iter().filter(move |g| filter.accepts(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_all(text: &str) -> Vec<Result<GameRecord, PgnError>> {
        PgnReader::new(text.as_bytes()).collect()
    }

    #[test]
    fn one_game_with_tags() {
        let games = read_all("[Event \"x\"]\n[Result \"1-0\"]\n\n1. e4 e5 2. Nf3 1-0\n");
        assert_eq!(games.len(), 1);
        let g = games[0].as_ref().unwrap();
        assert_eq!(g.moves, ["e4", "e5", "Nf3"]);
        assert_eq!(g.result, GameResult::WhiteWin);
        assert_eq!(g.tag("Event"), Some("x"));
    }

    #[test]
    fn variations_comments_and_nags_are_skipped() {
        let text = "[Result \"*\"]\n1. e4 {best by test} (1. d4 d5 (1... Nf6)) 1... e5 $1 2. Nf3 ; rest\n2... Nc6 *\n";
        let g = read_all(text).remove(0).unwrap();
        assert_eq!(g.moves, ["e4", "e5", "Nf3", "Nc6"]);
        assert_eq!(g.result, GameResult::Unknown);
    }

    #[test]
    fn variation_content_absent() {
        let g = read_all("1. e4 (1... c5) e5 1/2-1/2").remove(0).unwrap();
        assert_eq!(g.moves, ["e4", "e5"]);
        assert_eq!(g.result, GameResult::Draw);
    }

    #[test]
    fn illegal_fifth_move_is_reported() {
        let text = "[Event \"a\"]\n1. e4 e5 2. Nf3 Nc6 3. Ke3 Nf6 1-0\n\n[Event \"b\"]\n1. d4 0-1\n";
        let items = read_all(text);
        assert_eq!(items.len(), 2);
        match &items[0] {
            Err(PgnError::Malformed(m)) => {
                assert_eq!(m.index, 1);
                assert_eq!(m.line, 1);
                match &m.reason {
                    MalformedReason::Replay(ReplayError::Move { ply, fen, .. }) => {
                        assert_eq!(*ply, 5);
                        assert_eq!(fen, "r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3");
                    }
                    other => panic!("unexpected reason {other:?}"),
                }
            }
            other => panic!("expected malformed game, got {other:?}"),
        }
        assert_eq!(items[1].as_ref().unwrap().moves, ["d4"]);
    }

    #[test]
    fn result_mismatch_is_reported() {
        let items = read_all("[Result \"0-1\"]\n1. e4 1-0\n");
        assert!(matches!(
            &items[0],
            Err(PgnError::Malformed(MalformedGame {
                reason: MalformedReason::ResultMismatch { .. },
                ..
            }))
        ));
    }

    #[test]
    fn null_move_truncates_mainline() {
        let g = read_all("1. e4 e5 2. -- Nc6 3. Nf3 1-0").remove(0).unwrap();
        assert_eq!(g.moves, ["e4", "e5"]);
        assert_eq!(g.result, GameResult::WhiteWin);
    }

    #[test]
    fn games_without_tags_are_split_on_markers() {
        let items = read_all("1. e4 1-0 1. d4 0-1\n1. c4 *");
        let moves: Vec<_> = items.iter().map(|g| g.as_ref().unwrap().moves.clone()).collect();
        assert_eq!(moves, [vec!["e4"], vec!["d4"], vec!["c4"]]);
    }

    #[test]
    fn fen_tag_sets_start_position() {
        let text = "[SetUp \"1\"]\n[FEN \"4k3/8/8/8/8/8/4P3/4K3 w - - 0 1\"]\n1. e4 Kd7 1/2-1/2\n";
        let g = read_all(text).remove(0).unwrap();
        assert_eq!(g.moves, ["e4", "Kd7"]);
    }

    #[test]
    fn unterminated_comment_recovers_at_next_header() {
        let text = "[Event \"a\"]\n1. e4 { oops\n\n[Event \"b\"]\n1. d4 1-0\n";
        let items = read_all(text);
        assert_eq!(items.len(), 2);
        assert!(matches!(&items[0], Err(PgnError::Malformed(_))));
        assert_eq!(items[1].as_ref().unwrap().tag("Event"), Some("b"));
    }

    #[test]
    fn canonical_san_is_stored() {
        let g = read_all("1. e4 e5 2. Bc4 Nc6 3. Qh5 Nf6?? 4. Qxf7 1-0")
            .remove(0)
            .unwrap();
        assert_eq!(g.moves.last().unwrap(), "Qxf7#");
    }

    #[test]
    fn latin1_tag_values_are_decoded() {
        let bytes = b"[White \"M\xfcller\"]\n[Black \"J\xc3\xb6rg\"]\n1. e4 1-0\n";
        let items: Vec<_> = PgnReader::new(&bytes[..]).collect();
        let g = items[0].as_ref().unwrap();
        assert_eq!(g.tag("White"), Some("Müller"));
        assert_eq!(g.tag("Black"), Some("Jörg"));
    }

    #[test]
    fn crlf_and_move_number_forms() {
        let g = read_all("1.e4 1...e5\r\n2.Nf3 2... Nc6 3. Bb5 a6 1/2-1/2\r\n")
            .remove(0)
            .unwrap();
        assert_eq!(g.moves, ["e4", "e5", "Nf3", "Nc6", "Bb5", "a6"]);
    }

    #[test]
    fn count_conservation() {
        let text = "[E \"1\"]\n1. e4 1-0\n[E \"2\"]\n1. Ke2 1-0\n[E \"3\"]\n1. d4 *\n";
        let mut reader = PgnReader::new(text.as_bytes());
        let items: Vec<_> = reader.by_ref().collect();
        assert_eq!(items.len(), 3);
        assert_eq!(reader.games_seen(), 3);
    }

    fn game(result: GameResult, tags: &[(&str, &str)]) -> GameRecord {
        GameRecord {
            tags: tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            moves: vec!["e4".into()],
            result,
        }
    }

    #[test]
    fn default_filter_drops_unknown_results() {
        let games = vec![game(GameResult::Unknown, &[]), game(GameResult::Draw, &[])];
        let kept: Vec<_> = filter_games(games, &GameFilter::default()).collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].result, GameResult::Draw);
    }

    #[test]
    fn accept_all_is_identity() {
        let games = vec![
            game(GameResult::Unknown, &[]),
            game(GameResult::WhiteWin, &[("A", "b")]),
        ];
        let kept: Vec<_> = filter_games(games.clone(), &GameFilter::accept_all()).collect();
        assert_eq!(kept, games);
    }

    #[test]
    fn min_rating_needs_both_players() {
        let f = GameFilter {
            min_rating: Some(2400),
            ..GameFilter::default()
        };
        assert!(!f.accepts(&game(GameResult::Draw, &[("WhiteElo", "2100"), ("BlackElo", "2500")])));
        assert!(!f.accepts(&game(GameResult::Draw, &[("WhiteElo", "2500")])));
        assert!(f.accepts(&game(GameResult::Draw, &[("WhiteElo", "2400"), ("BlackElo", "2650")])));
    }

    #[test]
    fn base_time_predicate() {
        assert_eq!(base_time_seconds("1800+10"), Some(1800));
        assert_eq!(base_time_seconds("40/7200:3600"), Some(7200));
        assert_eq!(base_time_seconds("?"), None);
        let f = GameFilter::default().with_min_base_time(1800);
        assert!(f.accepts(&game(GameResult::Draw, &[("TimeControl", "5400+30")])));
        assert!(!f.accepts(&game(GameResult::Draw, &[("TimeControl", "300+2")])));
        assert!(!f.accepts(&game(GameResult::Draw, &[])));
    }
}
