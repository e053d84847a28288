//! Similarity between the move lists two books give for one position.
//!
//! * overlap: shared moves over all moves;
//! * M-measure: a Spearman footrule on reciprocal ranks, normalized by the
//!   footrule of two fully disjoint lists of the same lengths;
//! * JSD similarity: one minus the square root of the Jensen-Shannon
//!   divergence (in bits) between the normalized game counts.
//!
//! All three equal 1 for identical inputs and lie in `[0, 1]`.

use std::collections::{BTreeSet, HashMap};

use crate::book::RankedMoveList;
use crate::chess::Color;

/// Moves played in fewer games than this are ignored by the JSD and the
/// expected score.
pub const DEFAULT_MIN_GAMES: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("both move lists are empty")]
    BothEmpty,
    #[error("no move was played in at least {0} games")]
    NothingSurvives(u64),
    #[error("footrule normalizer is zero for list lengths ({0}, {1})")]
    ZeroNormalizer(usize, usize),
}

fn sans(list: &RankedMoveList) -> BTreeSet<&str> {
    list.iter().map(|m| m.san()).collect()
}

/// `|a ∩ b| / |a ∪ b|` over the moves of the two lists.
pub fn overlap(a: &RankedMoveList, b: &RankedMoveList) -> Result<f64, MeasureError> {
    let (sa, sb) = (sans(a), sans(b));
    let union = sa.union(&sb).count();
    if union == 0 {
        return Err(MeasureError::BothEmpty);
    }
    Ok(sa.intersection(&sb).count() as f64 / union as f64)
}

/// Effective ranks of one move in the two lists. A move missing from a list
/// of length k gets rank k + 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPair {
    pub san: String,
    pub rank_a: u32,
    pub rank_b: u32,
}

impl RankPair {
    pub fn reciprocal_a(&self) -> f64 {
        1.0 / self.rank_a as f64
    }

    pub fn reciprocal_b(&self) -> f64 {
        1.0 / self.rank_b as f64
    }
}

/// Reciprocal ranks over the union of two lists: first the moves of `a` in
/// rank order, then the moves only `b` has, in `b`'s order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankAssignment {
    pub rows: Vec<RankPair>,
    pub len_a: usize,
    pub len_b: usize,
}

impl RankAssignment {
    /// Sum over all moves of `|1/rank_a - 1/rank_b|`. Terms are added in
    /// sorted order so swapping the lists gives a bit-identical sum.
    pub fn footrule_sum(&self) -> f64 {
        let mut terms: Vec<f64> = self
            .rows
            .iter()
            .map(|r| (r.reciprocal_a() - r.reciprocal_b()).abs())
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }
}

pub fn assign_reciprocal_ranks(a: &RankedMoveList, b: &RankedMoveList) -> RankAssignment {
    let absent_a = a.len() as u32 + 1;
    let absent_b = b.len() as u32 + 1;
    let ranks_b: HashMap<&str, u32> = b.iter().map(|m| (m.san(), m.rank)).collect();
    let mut rows: Vec<RankPair> = a
        .iter()
        .map(|m| RankPair {
            san: m.san().to_string(),
            rank_a: m.rank,
            rank_b: ranks_b.get(m.san()).copied().unwrap_or(absent_b),
        })
        .collect();
    rows.extend(b.iter().filter(|m| a.get(m.san()).is_none()).map(|m| RankPair {
        san: m.san().to_string(),
        rank_a: absent_a,
        rank_b: m.rank,
    }));
    RankAssignment {
        rows,
        len_a: a.len(),
        len_b: b.len(),
    }
}

/// Footrule sum of two disjoint lists of lengths `k1` and `k2`: the largest
/// value the reciprocal-rank footrule can take for those lengths.
pub fn max_m(k1: usize, k2: usize) -> Result<f64, MeasureError> {
    if k1 == 0 && k2 == 0 {
        return Err(MeasureError::BothEmpty);
    }
    let side = |k: usize, other: usize| -> f64 {
        let absent = 1.0 / (other as f64 + 1.0);
        (1..=k).map(|i| (1.0 / i as f64 - absent).abs()).sum()
    };
    Ok(side(k1, k2) + side(k2, k1))
}

pub fn m_measure(a: &RankedMoveList, b: &RankedMoveList) -> Result<f64, MeasureError> {
    let norm = max_m(a.len(), b.len())?;
    if norm == 0.0 {
        return Err(MeasureError::ZeroNormalizer(a.len(), b.len()));
    }
    let sum = assign_reciprocal_ranks(a, b).footrule_sum();
    // Rounding can push the ratio a few ulps past 1 for disjoint lists.
    Ok((1.0 - sum / norm).clamp(0.0, 1.0))
}

/// Game counts of the surviving moves divided by their total.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveDistribution {
    masses: Vec<(String, f64)>,
    total_games: u64,
}

impl MoveDistribution {
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.masses.iter().map(|(s, p)| (s.as_str(), *p))
    }

    pub fn mass(&self, san: &str) -> f64 {
        self.masses.iter().find(|(s, _)| s == san).map_or(0.0, |(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Sum of the game counts that were normalized.
    pub fn total_games(&self) -> u64 {
        self.total_games
    }
}

pub fn normalize_counts(list: &RankedMoveList, min_games: u64) -> Result<MoveDistribution, MeasureError> {
    let kept: Vec<_> = list
        .iter()
        .filter(|m| m.games() >= min_games && m.games() > 0)
        .collect();
    let total: u64 = kept.iter().map(|m| m.games()).sum();
    if total == 0 {
        return Err(MeasureError::NothingSurvives(min_games));
    }
    Ok(MoveDistribution {
        masses: kept
            .iter()
            .map(|m| (m.san().to_string(), m.games() as f64 / total as f64))
            .collect(),
        total_games: total,
    })
}

/// `1 - sqrt(JSD(p, q))` with the divergence in bits. Moves missing from
/// one distribution have mass 0 there; `0 log 0` is taken as 0.
pub fn jsd_similarity(p: &MoveDistribution, q: &MoveDistribution) -> f64 {
    let q_mass: HashMap<&str, f64> = q.iter().collect();
    let p_mass: HashMap<&str, f64> = p.iter().collect();
    let term = |x: f64, y: f64| -> f64 {
        if x > 0.0 {
            x * (2.0 * x / (x + y)).ln() / std::f64::consts::LN_2
        } else {
            0.0
        }
    };
    let from_p: f64 = p
        .iter()
        .map(|(s, x)| term(x, q_mass.get(s).copied().unwrap_or(0.0)))
        .sum();
    let from_q: f64 = q
        .iter()
        .map(|(s, y)| term(y, p_mass.get(s).copied().unwrap_or(0.0)))
        .sum();
    let divergence = (0.5 * from_p + 0.5 * from_q).clamp(0.0, 1.0);
    1.0 - divergence.sqrt()
}

/// Expected score of a position over its surviving moves, from White's viewpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedScore {
    pub percent: f64,
    pub games: u64,
}

/// Game-weighted score over moves with at least `min_games` games.
pub fn expected_score(list: &RankedMoveList, min_games: u64) -> Result<ExpectedScore, MeasureError> {
    let (mut points, mut games) = (0.0, 0u64);
    for m in list.iter().filter(|m| m.games() >= min_games) {
        points += m.stats.white_wins as f64 + m.stats.draws as f64 / 2.0;
        games += m.games();
    }
    if games == 0 {
        return Err(MeasureError::NothingSurvives(min_games));
    }
    Ok(ExpectedScore {
        percent: 100.0 * points / games as f64,
        games,
    })
}

/// One position's comparison. `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub id: String,
    pub m_measure: Option<f64>,
    pub max_m: Option<f64>,
    pub jsd: Option<f64>,
    pub overlap: Option<f64>,
    pub moves_a: usize,
    pub moves_b: usize,
}

/// Overlap and M-measure use the full lists; the JSD uses only moves with
/// at least `min_games` games.
pub fn compare_position(id: &str, a: &RankedMoveList, b: &RankedMoveList, min_games: u64) -> ComparisonRow {
    let jsd = match (normalize_counts(a, min_games), normalize_counts(b, min_games)) {
        (Ok(p), Ok(q)) => Some(jsd_similarity(&p, &q)),
        _ => None,
    };
    ComparisonRow {
        id: id.to_string(),
        m_measure: m_measure(a, b).ok(),
        max_m: max_m(a.len(), b.len()).ok(),
        jsd,
        overlap: overlap(a, b).ok(),
        moves_a: a.len(),
        moves_b: b.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedScoreRow {
    pub id: String,
    pub side_to_move: Color,
    pub book_a: Option<ExpectedScore>,
    pub book_b: Option<ExpectedScore>,
}

pub fn expected_score_row(
    id: &str,
    side_to_move: Color,
    a: &RankedMoveList,
    b: &RankedMoveList,
    min_games: u64,
) -> ExpectedScoreRow {
    ExpectedScoreRow {
        id: id.to_string(),
        side_to_move,
        book_a: expected_score(a, min_games).ok(),
        book_b: expected_score(b, min_games).ok(),
    }
}
