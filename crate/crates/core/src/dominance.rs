//! Two-stage reduction of the bid sets: one round of weak dominance with known
//! closed-form bounds, then iterated strict dominance.
//!
//! Strict dominance is interim: bid `b` at value `v` goes when some bid `d` earns
//! strictly more against every monotone opponent profile built from the surviving
//! sets. Two certificates are used. The interval test brackets each opponent's bid
//! distribution between its highest and lowest monotone selections. The exact test
//! walks every surviving opponent profile and runs only within a budget.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::engine::{BidCdf, Outcome, PayoffEngine};
use crate::error::{GameError, Result};
use crate::game::{AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule};
use crate::monotone::{self, Envelope};

/// Why a bid was removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionReason {
    /// Outside the first-round weak-dominance bounds.
    WeaklyDominated,
    /// `by` earns strictly more under the bracketed opponent distributions.
    IntervalDominated { by: usize },
    /// `by` earns strictly more against every surviving opponent profile.
    ExactDominated { by: usize },
    /// No monotone selection from the surviving sets passes through this bid.
    NoMonotoneCompletion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Deletion {
    pub player: usize,
    pub value: usize,
    pub bid: usize,
    pub round: usize,
    pub reason: DeletionReason,
}

/// The exact test was skipped because the opponent profile count exceeded the budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Downgrade {
    pub round: usize,
    pub player: usize,
    pub opponent_profiles: String,
}

/// Surviving bids per player and value, plus the record of how they were reached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedGame {
    allowed: Vec<Vec<Vec<usize>>>,
    pub trace: Vec<Deletion>,
    pub downgrades: Vec<Downgrade>,
    pub rounds: usize,
}

impl ReducedGame {
    /// Every bid allowed at every value.
    pub fn full(spec: &AuctionSpec) -> Self {
        let all: Vec<usize> = (0..spec.num_bids()).collect();
        ReducedGame {
            allowed: vec![vec![all; spec.num_values()]; spec.n],
            trace: Vec::new(),
            downgrades: Vec::new(),
            rounds: 0,
        }
    }

    /// Builds a game from explicit sets, which are sorted and deduplicated.
    pub fn from_sets(spec: &AuctionSpec, mut allowed: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if allowed.len() != spec.n {
            return Err(GameError::ProfileLength {
                expected: spec.n,
                got: allowed.len(),
            });
        }
        for sets in allowed.iter_mut() {
            if sets.len() != spec.num_values() {
                return Err(GameError::FunctionLength {
                    expected: spec.num_values(),
                    got: sets.len(),
                });
            }
            for (value, set) in sets.iter_mut().enumerate() {
                set.sort_unstable();
                set.dedup();
                if set.is_empty() {
                    return Err(GameError::Invalid(format!(
                        "empty bid set at value {value}"
                    )));
                }
                if let Some(&bid) = set.iter().find(|&&b| b >= spec.num_bids()) {
                    return Err(GameError::BidOutOfRange {
                        value,
                        bid,
                        bids: spec.num_bids(),
                    });
                }
            }
        }
        Ok(ReducedGame {
            allowed,
            trace: Vec::new(),
            downgrades: Vec::new(),
            rounds: 0,
        })
    }

    pub fn num_players(&self) -> usize {
        self.allowed.len()
    }

    pub fn num_values(&self) -> usize {
        self.allowed.first().map_or(0, |p| p.len())
    }

    pub fn sets(&self, player: usize) -> &[Vec<usize>] {
        &self.allowed[player]
    }

    pub fn allowed(&self, player: usize, value: usize) -> &[usize] {
        &self.allowed[player][value]
    }

    pub fn is_allowed(&self, player: usize, value: usize, bid: usize) -> bool {
        self.allowed[player][value].binary_search(&bid).is_ok()
    }

    pub fn contains_function(&self, player: usize, f: &BiddingFunction) -> bool {
        f.len() == self.num_values()
            && f.bids()
                .iter()
                .enumerate()
                .all(|(v, &b)| self.is_allowed(player, v, b))
    }

    pub fn contains_profile(&self, profile: &StrategyProfile) -> bool {
        profile.len() == self.num_players()
            && profile
                .players()
                .iter()
                .enumerate()
                .all(|(i, f)| self.contains_function(i, f))
    }

    /// Whether every player has the same sets.
    pub fn is_symmetric(&self) -> bool {
        self.allowed.windows(2).all(|w| w[0] == w[1])
    }

    pub fn envelope(&self, player: usize) -> Option<Envelope> {
        monotone::envelope(&self.allowed[player])
    }

    pub fn monotone_count(&self, player: usize) -> BigInt {
        monotone::count_monotone(&self.allowed[player])
    }

    fn remove(&mut self, d: Deletion) {
        let set = &mut self.allowed[d.player][d.value];
        if set.len() > 1 {
            if let Ok(pos) = set.binary_search(&d.bid) {
                set.remove(pos);
                self.trace.push(d);
            }
        }
    }
}

/// Number of pure strategies per player, the product of the set sizes.
pub fn strategy_count(reduced: &ReducedGame) -> Vec<BigInt> {
    reduced
        .allowed
        .iter()
        .map(|sets| sets.iter().map(|s| BigInt::from(s.len())).product())
        .collect()
}

/// Strategies per player before any reduction: `bids^values`.
pub fn unreduced_strategy_count(spec: &AuctionSpec) -> BigInt {
    num_traits::pow(BigInt::from(spec.num_bids()), spec.num_values())
}

/// Bids that survive weak dominance at value index `v`.
pub(crate) fn round1_set(spec: &AuctionSpec, v: usize, x: usize) -> Vec<usize> {
    match (spec.structure, spec.tie_rule) {
        (Structure::FirstPrice, TieRule::FairTies) => {
            if v == 0 {
                vec![0]
            } else {
                (0..v).collect()
            }
        }
        (Structure::FirstPrice, TieRule::NoWinnerOnTies) => match v {
            0 => vec![0],
            1 => vec![0, 1],
            _ => (0..v).collect(),
        },
        (Structure::AllPay, _) => {
            if v <= 1 {
                vec![0]
            } else {
                (0..v).collect()
            }
        }
        (Structure::SecondPrice, TieRule::FairTies) => vec![v],
        (Structure::SecondPrice, TieRule::NoWinnerOnTies) => {
            let mut s = vec![v, (v + 1).min(x)];
            s.dedup();
            s
        }
    }
}

/// First round: removes the bids that are weakly dominated for every opponent
/// behaviour (overbidding, and bidding one's value in the first-price and all-pay
/// formats; anything but the value or one step above it in second price).
pub fn round1_weak_dominance(spec: &AuctionSpec) -> Result<ReducedGame> {
    let x = spec.x().ok_or(GameError::NonCanonical)?;
    let mut reduced = ReducedGame::full(spec);
    let mut sets = Vec::with_capacity(spec.num_values());
    for v in 0..spec.num_values() {
        sets.push(round1_set(spec, v, x));
    }
    for player in 0..spec.n {
        for (value, keep) in sets.iter().enumerate() {
            for bid in 0..spec.num_bids() {
                if keep.binary_search(&bid).is_err() {
                    reduced.trace.push(Deletion {
                        player,
                        value,
                        bid,
                        round: 1,
                        reason: DeletionReason::WeaklyDominated,
                    });
                }
            }
        }
        reduced.allowed[player] = sets.clone();
    }
    reduced.rounds = 1;
    Ok(reduced)
}

/// Largest number of opponent profiles the exact test will walk.
pub const DEFAULT_EXACT_BUDGET: u64 = 100_000;

/// Runs strict-dominance sweeps until nothing more is deleted.
///
/// Deletions found in a sweep are committed together, in player, value, bid
/// order. When the exact test would exceed `exact_budget` opponent profiles the
/// sweep falls back to the interval test alone and the skip is recorded.
pub fn iterate_strict_dominance(
    spec: &AuctionSpec,
    reduced: &ReducedGame,
    exact_budget: u64,
) -> Result<ReducedGame> {
    if reduced.num_players() != spec.n || reduced.num_values() != spec.num_values() {
        return Err(GameError::Invalid(
            "reduced game does not match the auction".into(),
        ));
    }
    let engine = PayoffEngine::new(spec)?;
    let mut game = reduced.clone();
    loop {
        let round = game.rounds + 1;
        let mut found: Vec<Deletion> = Vec::new();
        let symmetric = game.is_symmetric();
        for player in 0..spec.n {
            if symmetric && player > 0 {
                let copies: Vec<Deletion> = found
                    .iter()
                    .filter(|d| d.player == 0)
                    .map(|d| Deletion {
                        player,
                        ..d.clone()
                    })
                    .collect();
                found.extend(copies);
                continue;
            }
            let (dels, downgrade) = sweep_player(&engine, &game, player, round, exact_budget);
            found.extend(dels);
            if let Some(d) = downgrade {
                game.downgrades.push(d);
            }
        }
        found.sort_by_key(|d| (d.player, d.value, d.bid));
        let before = game.trace.len();
        for d in found {
            game.remove(d);
        }
        for player in 0..spec.n {
            prune_unreachable(&mut game, player, round);
        }
        if game.trace.len() == before {
            return Ok(game);
        }
        game.rounds = round;
    }
}

/// Removes bids that no monotone selection passes through.
fn prune_unreachable(game: &mut ReducedGame, player: usize, round: usize) {
    let Some(env) = game.envelope(player) else {
        return;
    };
    let mut dels = Vec::new();
    for (value, set) in game.allowed[player].iter().enumerate() {
        for &bid in set {
            if bid < env.lo[value] || bid > env.hi[value] {
                dels.push(Deletion {
                    player,
                    value,
                    bid,
                    round,
                    reason: DeletionReason::NoMonotoneCompletion,
                });
            }
        }
    }
    for d in dels {
        game.remove(d);
    }
}

/// Pointwise highest and lowest bid distributions consistent with a player's sets.
/// Falls back to the extreme bids per value if no monotone selection exists.
pub(crate) fn bracket_cdfs(engine: &PayoffEngine, sets: &[Vec<usize>]) -> (BidCdf, BidCdf) {
    let (lo, hi) = match monotone::envelope(sets) {
        Some(env) => (env.lo, env.hi),
        None => (
            sets.iter().map(|s| s[0]).collect(),
            sets.iter()
                .map(|s| *s.last().expect("non-empty set"))
                .collect(),
        ),
    };
    let high = engine.cdf_from_pairs(hi.into_iter().enumerate());
    let low = engine.cdf_from_pairs(lo.into_iter().enumerate());
    (high, low)
}

fn sweep_player(
    engine: &PayoffEngine,
    game: &ReducedGame,
    player: usize,
    round: usize,
    exact_budget: u64,
) -> (Vec<Deletion>, Option<Downgrade>) {
    let n = engine.n();
    let nb = engine.num_bids();
    let own = &game.allowed[player];
    let opponents: Vec<usize> = (0..n).filter(|&j| j != player).collect();

    // Interval certificate.
    let brackets: Vec<(BidCdf, BidCdf)> = opponents
        .iter()
        .map(|&j| bracket_cdfs(engine, &game.allowed[j]))
        .collect();
    let highs: Vec<&BidCdf> = brackets.iter().map(|(h, _)| h).collect();
    let lows: Vec<&BidCdf> = brackets.iter().map(|(_, l)| l).collect();
    let out_high = engine.outcomes(&highs);
    let out_low = engine.outcomes(&lows);

    let mut dels = Vec::new();
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for (v, set) in own.iter().enumerate() {
        if set.len() < 2 {
            continue;
        }
        let ranges: Vec<(i128, i128)> = (0..nb)
            .map(|d| engine.payoff_range(v, d, &out_high[d], &out_low[d]))
            .collect();
        let (best_d, best_lo) = ranges
            .iter()
            .enumerate()
            .map(|(d, r)| (d, r.0))
            .max_by_key(|&(d, lo)| (lo, std::cmp::Reverse(d)))
            .expect("bid grid is never empty");
        for &b in set {
            if best_lo > ranges[b].1 {
                dels.push(Deletion {
                    player,
                    value: v,
                    bid: b,
                    round,
                    reason: DeletionReason::IntervalDominated { by: best_d },
                });
            } else {
                pending.push((v, b));
            }
        }
    }
    if pending.is_empty() {
        return (dels, None);
    }

    // Exact certificate.
    let selection_counts: Vec<BigInt> = opponents.iter().map(|&j| game.monotone_count(j)).collect();
    let identical = opponents
        .windows(2)
        .all(|w| game.allowed[w[0]] == game.allowed[w[1]]);
    let total = if identical {
        multiset_count(&selection_counts[0], opponents.len())
    } else {
        selection_counts.iter().product()
    };
    let within = total.to_u64().is_some_and(|t| t <= exact_budget);
    if !within {
        return (
            dels,
            Some(Downgrade {
                round,
                player,
                opponent_profiles: total.to_string(),
            }),
        );
    }
    let cdf_lists: Vec<Vec<BidCdf>> = opponents
        .iter()
        .map(|&j| {
            let mut list = Vec::new();
            monotone::for_each_monotone(&game.allowed[j], |s| {
                list.push(engine.cdf_from_pairs(s.iter().copied().enumerate()));
                true
            });
            list
        })
        .collect();

    // min_gap[k][d]: smallest payoff(d) - payoff(b) seen so far for pending pair k.
    let mut min_gap: Vec<Vec<i128>> = vec![vec![i128::MAX; nb]; pending.len()];
    let mut live = pending.len();
    let mut alive = vec![true; pending.len()];
    let mut visit = |outcomes: &[Outcome]| -> bool {
        for (k, &(v, b)) in pending.iter().enumerate() {
            if !alive[k] {
                continue;
            }
            let base = engine.payoff(v, &outcomes[b]);
            let mut any = false;
            for (d, o) in outcomes.iter().enumerate() {
                let g = engine.payoff(v, o) - base;
                let slot = &mut min_gap[k][d];
                if g < *slot {
                    *slot = g;
                }
                any |= *slot > 0;
            }
            if !any {
                alive[k] = false;
                live -= 1;
            }
        }
        live > 0
    };
    let m = opponents.len();
    let mut idx = vec![0usize; m];
    'walk: loop {
        let opps: Vec<&BidCdf> = (0..m).map(|j| &cdf_lists[j][idx[j]]).collect();
        if !visit(&engine.outcomes(&opps)) {
            break;
        }
        // Advance the odometer; identical opponents only need non-decreasing tuples.
        let mut j = m;
        loop {
            if j == 0 {
                break 'walk;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < cdf_lists[j].len() {
                if identical {
                    for t in j + 1..m {
                        idx[t] = idx[j];
                    }
                }
                break;
            }
            idx[j] = 0;
        }
    }
    for (k, &(v, b)) in pending.iter().enumerate() {
        if !alive[k] {
            continue;
        }
        let by = (0..nb)
            .filter(|&d| min_gap[k][d] > 0)
            .max_by_key(|&d| (min_gap[k][d], std::cmp::Reverse(d)))
            .expect("alive pairs have a dominator");
        dels.push(Deletion {
            player,
            value: v,
            bid: b,
            round,
            reason: DeletionReason::ExactDominated { by },
        });
    }
    dels.sort_by_key(|d| (d.value, d.bid));
    (dels, None)
}

/// Multisets of size `k` from `n` kinds.
fn multiset_count(n: &BigInt, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n + BigInt::from(i)) / BigInt::from(i + 1);
    }
    acc
}

/// Runs both stages.
pub fn reduce(spec: &AuctionSpec, exact_budget: u64) -> Result<ReducedGame> {
    let first = round1_weak_dominance(spec)?;
    iterate_strict_dominance(spec, &first, exact_budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TieRule;

    fn uniform(structure: Structure, tie: TieRule, n: usize, x: usize) -> AuctionSpec {
        AuctionSpec::uniform(structure, tie, n, x).unwrap()
    }

    #[test]
    fn first_round_sets() {
        let s = uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 2, 2);
        let r = round1_weak_dominance(&s).unwrap();
        assert_eq!(r.sets(0), &[vec![0], vec![0, 1], vec![0, 1]]);
        assert_eq!(strategy_count(&r), vec![BigInt::from(4); 2]);

        let s = uniform(Structure::AllPay, TieRule::FairTies, 2, 2);
        let r = round1_weak_dominance(&s).unwrap();
        assert_eq!(r.sets(1), &[vec![0], vec![0], vec![0, 1]]);

        let s = uniform(Structure::SecondPrice, TieRule::FairTies, 3, 5);
        let r = round1_weak_dominance(&s).unwrap();
        assert_eq!(r.sets(2), &(0..=5).map(|v| vec![v]).collect::<Vec<_>>()[..]);
        assert_eq!(strategy_count(&r), vec![BigInt::one(); 3]);

        let s = uniform(Structure::SecondPrice, TieRule::NoWinnerOnTies, 2, 3);
        let r = round1_weak_dominance(&s).unwrap();
        assert_eq!(r.allowed(0, 3), &[3]);
        assert_eq!(r.allowed(0, 1), &[1, 2]);
    }

    #[test]
    fn unreduced_count_is_k_to_the_k() {
        let s = uniform(Structure::FirstPrice, TieRule::FairTies, 2, 9);
        assert_eq!(
            unreduced_strategy_count(&s),
            BigInt::from(10_000_000_000u64)
        );
    }

    #[test]
    fn zero_bid_at_top_value_goes_when_no_ties() {
        let s = uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 2, 2);
        let r = reduce(&s, DEFAULT_EXACT_BUDGET).unwrap();
        assert!(!r.is_allowed(0, 2, 0));
        assert!(r
            .trace
            .iter()
            .any(|d| d.value == 2 && d.bid == 0 && d.round >= 2));
    }

    #[test]
    fn singleton_sets_need_no_sweep() {
        let s = uniform(Structure::SecondPrice, TieRule::FairTies, 2, 6);
        let first = round1_weak_dominance(&s).unwrap();
        let r = iterate_strict_dominance(&s, &first, DEFAULT_EXACT_BUDGET).unwrap();
        assert_eq!(r.trace.len(), first.trace.len());
    }

    #[test]
    fn half_value_bids_survive() {
        for x in 2..=10 {
            let s = uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 2, x);
            let r = reduce(&s, DEFAULT_EXACT_BUDGET).unwrap();
            for v in 0..=x {
                assert!(r.is_allowed(0, v, v / 2), "x = {x}, v = {v}");
                assert!(r.is_allowed(0, v, v.div_ceil(2)), "x = {x}, v = {v}");
            }
        }
    }

    #[test]
    fn non_canonical_games_are_rejected() {
        use crate::game::ValueDistribution;
        use crate::rational::int;
        let s = AuctionSpec::with_points(
            Structure::FirstPrice,
            TieRule::NoWinnerOnTies,
            2,
            vec![int(0), int(2)],
            ValueDistribution::uniform(2),
            vec![int(0), int(1)],
        )
        .unwrap();
        assert_eq!(round1_weak_dominance(&s), Err(GameError::NonCanonical));
    }
}
