//! Enumeration of every pure-strategy equilibrium of a reduced game.
//!
//! Players are fixed one at a time. After each choice the fixed players are tested
//! against bracketed bid distributions for the players still open, and the branch
//! is cut when one of them already has a strictly better bid. The last player is
//! never enumerated blindly: its best-response sets against the others are exact,
//! so only selections from those sets are tried.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::dominance::ReducedGame;
use crate::engine::{BidCdf, PayoffEngine};
use crate::error::{GameError, Result};
use crate::game::{AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule};
use crate::monotone;
use crate::payoff::{check_with_engine, find_deviation, Verdict};
use crate::rational::{self, Rational};

/// Which bidding functions the search ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Non-decreasing selections from the surviving sets.
    MonotoneUndominated,
    /// Every selection from the surviving sets.
    FullyExhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Complete,
    /// The node budget ran out; the equilibria listed are genuine but maybe not all.
    BudgetExhausted,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub prunes: u64,
    pub verified: u64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationResult {
    pub equilibria: Vec<StrategyProfile>,
    pub exists: bool,
    pub status: SearchStatus,
    pub stats: SearchStats,
    pub scope: Scope,
}

impl EnumerationResult {
    pub fn is_complete(&self) -> bool {
        self.status == SearchStatus::Complete
    }

    /// Symmetric profiles among the equilibria, as bidding functions.
    pub fn symmetric(&self) -> Vec<BiddingFunction> {
        self.equilibria
            .iter()
            .filter(|p| p.is_symmetric())
            .map(|p| p.player(0).clone())
            .collect()
    }

    /// One profile per class of bidder relabellings.
    pub fn up_to_relabelling(&self) -> Vec<StrategyProfile> {
        let mut out: Vec<StrategyProfile> =
            self.equilibria.iter().map(|p| p.sorted_players()).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Default node budget.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

struct Candidate {
    function: BiddingFunction,
    cdf: BidCdf,
}

struct Search<'a> {
    engine: &'a PayoffEngine,
    reduced: &'a ReducedGame,
    scope: Scope,
    candidates: Vec<Vec<Candidate>>,
    /// Highest and lowest admissible bid distribution of each player.
    brackets: Vec<(BidCdf, BidCdf)>,
    budget: u64,
    nodes: AtomicU64,
    prunes: AtomicU64,
    verified: AtomicU64,
    exhausted: AtomicBool,
}

impl Search<'_> {
    fn charge(&self, k: u64) -> bool {
        let used = self.nodes.fetch_add(k, Ordering::Relaxed) + k;
        if used > self.budget {
            self.exhausted.store(true, Ordering::Relaxed);
            false
        } else {
            true
        }
    }

    /// Whether some fixed player already has a strictly better bid at some value,
    /// whatever the open players end up doing.
    fn refuted(&self, fixed: &[usize]) -> bool {
        let n = self.engine.n();
        let depth = fixed.len();
        for k in 0..depth {
            let mut highs: Vec<&BidCdf> = Vec::with_capacity(n - 1);
            let mut lows: Vec<&BidCdf> = Vec::with_capacity(n - 1);
            for j in (0..n).filter(|&j| j != k) {
                if j < depth {
                    let c = &self.candidates[j][fixed[j]].cdf;
                    highs.push(c);
                    lows.push(c);
                } else {
                    highs.push(&self.brackets[j].0);
                    lows.push(&self.brackets[j].1);
                }
            }
            let out_high = self.engine.outcomes(&highs);
            let out_low = self.engine.outcomes(&lows);
            let f = &self.candidates[k][fixed[k]].function;
            let nb = self.engine.num_bids();
            for (v, &b) in f.bids().iter().enumerate() {
                let upper = self.engine.payoff_range(v, b, &out_high[b], &out_low[b]).1;
                let beaten = (0..nb).any(|d| {
                    d != b && self.engine.payoff_range(v, d, &out_high[d], &out_low[d]).0 > upper
                });
                if beaten {
                    return true;
                }
            }
        }
        false
    }

    fn descend(&self, fixed: &mut Vec<usize>, found: &mut Vec<StrategyProfile>) {
        if self.exhausted.load(Ordering::Relaxed) {
            return;
        }
        let n = self.engine.n();
        if fixed.len() == n - 1 {
            self.close(fixed, found);
            return;
        }
        let i = fixed.len();
        for c in 0..self.candidates[i].len() {
            if !self.charge(1) {
                return;
            }
            fixed.push(c);
            if self.refuted(fixed) {
                self.prunes.fetch_add(1, Ordering::Relaxed);
            } else {
                self.descend(fixed, found);
            }
            fixed.pop();
        }
    }

    /// Completes a profile with every best-responding function of the last player.
    fn close(&self, fixed: &[usize], found: &mut Vec<StrategyProfile>) {
        let n = self.engine.n();
        let last = n - 1;
        let opps: Vec<&BidCdf> = fixed
            .iter()
            .enumerate()
            .map(|(j, &c)| &self.candidates[j][c].cdf)
            .collect();
        let outcomes = self.engine.outcomes(&opps);
        let mut sets = Vec::with_capacity(self.engine.num_values());
        for v in 0..self.engine.num_values() {
            let pay: Vec<i128> = outcomes.iter().map(|o| self.engine.payoff(v, o)).collect();
            let best = *pay.iter().max().expect("bid grid is never empty");
            let set: Vec<usize> = self
                .reduced
                .allowed(last, v)
                .iter()
                .copied()
                .filter(|&b| pay[b] == best)
                .collect();
            if set.is_empty() {
                self.prunes.fetch_add(1, Ordering::Relaxed);
                return;
            }
            sets.push(set);
        }
        let mut players: Vec<BiddingFunction> = fixed
            .iter()
            .enumerate()
            .map(|(j, &c)| self.candidates[j][c].function.clone())
            .collect();
        let mut cdfs: Vec<BidCdf> = fixed
            .iter()
            .enumerate()
            .map(|(j, &c)| self.candidates[j][c].cdf.clone())
            .collect();
        let mut try_last = |bids: &[usize]| -> bool {
            if !self.charge(1) {
                return false;
            }
            self.verified.fetch_add(1, Ordering::Relaxed);
            let f = BiddingFunction::new(bids.to_vec());
            cdfs.push(self.engine.cdf_of(&f));
            players.push(f);
            let profile = StrategyProfile::new(players.clone());
            if find_deviation(self.engine, &profile, &cdfs).is_none() {
                found.push(profile);
            }
            players.pop();
            cdfs.pop();
            true
        };
        match self.scope {
            Scope::MonotoneUndominated => monotone::for_each_monotone(&sets, &mut try_last),
            Scope::FullyExhaustive => monotone::for_each_selection(&sets, &mut try_last),
        };
    }
}

fn candidate_functions(
    reduced: &ReducedGame,
    player: usize,
    scope: Scope,
    limit: usize,
) -> Option<Vec<BiddingFunction>> {
    let mut out = Vec::new();
    let mut push = |s: &[usize]| {
        if out.len() == limit {
            return false;
        }
        out.push(BiddingFunction::new(s.to_vec()));
        true
    };
    let finished = match scope {
        Scope::MonotoneUndominated => monotone::for_each_monotone(reduced.sets(player), &mut push),
        Scope::FullyExhaustive => monotone::for_each_selection(reduced.sets(player), &mut push),
    };
    finished.then_some(out)
}

fn brackets_for(engine: &PayoffEngine, sets: &[Vec<usize>], scope: Scope) -> (BidCdf, BidCdf) {
    match scope {
        Scope::MonotoneUndominated => crate::dominance::bracket_cdfs(engine, sets),
        Scope::FullyExhaustive => {
            let hi = sets.iter().map(|s| *s.last().expect("non-empty set"));
            let lo = sets.iter().map(|s| s[0]);
            (
                engine.cdf_from_pairs(hi.enumerate()),
                engine.cdf_from_pairs(lo.enumerate()),
            )
        }
    }
}

/// Every pure equilibrium whose functions lie in `scope` over the surviving sets.
///
/// The search is complete unless the result says the budget ran out. Each
/// candidate function and each verified profile costs one node.
pub fn enumerate_pure_equilibria(
    spec: &AuctionSpec,
    reduced: &ReducedGame,
    scope: Scope,
    budget: u64,
) -> Result<EnumerationResult> {
    if reduced.num_players() != spec.n || reduced.num_values() != spec.num_values() {
        return Err(GameError::Invalid(
            "reduced game does not match the auction".into(),
        ));
    }
    let start = Instant::now();
    let engine = PayoffEngine::new(spec)?;
    let limit = usize::try_from(budget).unwrap_or(usize::MAX);
    let mut candidates = Vec::with_capacity(spec.n);
    let mut exhausted_early = false;
    for player in 0..spec.n - 1 {
        match candidate_functions(reduced, player, scope, limit) {
            Some(list) => candidates.push(
                list.into_iter()
                    .map(|f| Candidate {
                        cdf: engine.cdf_of(&f),
                        function: f,
                    })
                    .collect(),
            ),
            None => {
                exhausted_early = true;
                break;
            }
        }
    }
    if exhausted_early {
        return Ok(EnumerationResult {
            equilibria: Vec::new(),
            exists: false,
            status: SearchStatus::BudgetExhausted,
            stats: SearchStats {
                nodes: budget,
                wall_ms: start.elapsed().as_millis() as u64,
                ..SearchStats::default()
            },
            scope,
        });
    }
    let brackets = (0..spec.n)
        .map(|j| brackets_for(&engine, reduced.sets(j), scope))
        .collect();
    let search = Search {
        engine: &engine,
        reduced,
        scope,
        candidates,
        brackets,
        budget,
        nodes: AtomicU64::new(0),
        prunes: AtomicU64::new(0),
        verified: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
    };

    let mut equilibria: Vec<StrategyProfile> = (0..search.candidates[0].len())
        .into_par_iter()
        .map(|c| {
            let mut found = Vec::new();
            if !search.charge(1) {
                return found;
            }
            let mut fixed = vec![c];
            if spec.n > 2 && search.refuted(&fixed) {
                search.prunes.fetch_add(1, Ordering::Relaxed);
                return found;
            }
            search.descend(&mut fixed, &mut found);
            found
        })
        .flatten()
        .collect();
    equilibria.sort();

    let status = if search.exhausted.load(Ordering::Relaxed) {
        SearchStatus::BudgetExhausted
    } else {
        SearchStatus::Complete
    };
    Ok(EnumerationResult {
        exists: !equilibria.is_empty(),
        equilibria,
        status,
        stats: SearchStats {
            nodes: search.nodes.load(Ordering::Relaxed).min(budget),
            prunes: search.prunes.load(Ordering::Relaxed),
            verified: search.verified.load(Ordering::Relaxed),
            wall_ms: start.elapsed().as_millis() as u64,
        },
        scope,
    })
}

/// The three-bidder first-price equilibrium without ties that tracks `2v/3`.
///
/// Bidder one climbs in steps around each multiple of three, bidder two holds
/// `2m/3` on the three values centred at each multiple `m`, and bidder three holds
/// `2m/3 - 1` on the three values ending at `m`. The profile is verified exactly
/// before it is returned.
pub fn construct_asymmetric_fp3(x: usize) -> Result<StrategyProfile> {
    if x < 4 || x.is_multiple_of(3) {
        return Err(GameError::Invalid(format!(
            "the construction needs x >= 4 and x not a multiple of 3 (got x = {x})"
        )));
    }
    let first = BiddingFunction::from_fn(x + 1, |v| match v {
        0 | 1 => 0,
        _ => match v % 3 {
            0 => 2 * v / 3,
            1 => 2 * (v - 1) / 3 + 1,
            _ => 2 * (v + 1) / 3 - 1,
        },
    });
    let second = BiddingFunction::from_fn(x + 1, |v| match v {
        0 | 1 => 0,
        2 => 1,
        3 | 4 => 2,
        _ => {
            let m = match v % 3 {
                0 => v,
                1 => v - 1,
                _ => v + 1,
            };
            2 * m / 3
        }
    });
    let third = BiddingFunction::from_fn(x + 1, |v| match v {
        0 | 1 => 0,
        2 => 1,
        3 => 2,
        _ => 2 * v.div_ceil(3) - 1,
    });
    let spec = AuctionSpec::uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 3, x)?;
    let profile = StrategyProfile::new(vec![first, second, third]);
    let engine = PayoffEngine::new(&spec)?;
    match check_with_engine(&engine, &profile) {
        Verdict::Equilibrium => Ok(profile),
        Verdict::NotEquilibrium { witness } => Err(GameError::Invalid(format!(
            "constructed profile for x = {x} is not an equilibrium: bidder {} at value {} gains {} by bidding {}",
            witness.player,
            witness.value,
            rational::format(&witness.gain),
            witness.to_bid
        ))),
    }
}

/// One row of the bids-against-values table: bids per bidder and the continuous
/// reference `((n-1)/n) v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BidCurveRow {
    pub value: usize,
    pub bids: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub reference: Rational,
}

pub fn export_bid_curve(profile: &StrategyProfile) -> Vec<BidCurveRow> {
    let n = profile.len() as i64;
    let slope = rational::ratio(n - 1, n);
    let values = profile.players().first().map_or(0, |f| f.len());
    (0..values)
        .map(|v| BidCurveRow {
            value: v,
            bids: profile.players().iter().map(|f| f.bid(v)).collect(),
            reference: &slope * BigRational::from_integer((v as i64).into()),
        })
        .collect()
}

/// CSV with a header `value,bidder_1,...,reference`.
pub fn bid_curve_csv(rows: &[BidCurveRow]) -> String {
    let bidders = rows.first().map_or(0, |r| r.bids.len());
    let mut out = String::from("value");
    for i in 1..=bidders {
        out.push_str(&format!(",bidder_{i}"));
    }
    out.push_str(",reference\n");
    for r in rows {
        out.push_str(&r.value.to_string());
        for b in &r.bids {
            out.push_str(&format!(",{b}"));
        }
        out.push_str(&format!(",{}\n", rational::format(&r.reference)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::{reduce, round1_weak_dominance, DEFAULT_EXACT_BUDGET};
    use crate::payoff::is_equilibrium;

    fn run(structure: Structure, tie: TieRule, n: usize, x: usize) -> EnumerationResult {
        let spec = AuctionSpec::uniform(structure, tie, n, x).unwrap();
        let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
        enumerate_pure_equilibria(
            &spec,
            &reduced,
            Scope::MonotoneUndominated,
            DEFAULT_NODE_BUDGET,
        )
        .unwrap()
    }

    #[test]
    fn second_price_has_truthful_equilibrium() {
        let r = run(Structure::SecondPrice, TieRule::FairTies, 3, 4);
        assert_eq!(r.equilibria.len(), 1);
        assert_eq!(r.equilibria[0].player(0).bids(), &[0, 1, 2, 3, 4]);
        let r = run(Structure::SecondPrice, TieRule::NoWinnerOnTies, 2, 3);
        // Each player picks v or v+1 at v = 0, 1, 2.
        assert_eq!(r.equilibria.len(), 64);
    }

    #[test]
    fn asymmetric_construction_for_thirteen() {
        let p = construct_asymmetric_fp3(13).unwrap();
        assert_eq!(
            p.player(0).bids(),
            &[0, 0, 1, 2, 3, 3, 4, 5, 5, 6, 7, 7, 8, 9]
        );
        assert_eq!(
            p.player(1).bids(),
            &[0, 0, 1, 2, 2, 4, 4, 4, 6, 6, 6, 8, 8, 8]
        );
        assert_eq!(
            p.player(2).bids(),
            &[0, 0, 1, 2, 3, 3, 3, 5, 5, 5, 7, 7, 7, 9]
        );
        assert!(construct_asymmetric_fp3(12).is_err());
        assert!(construct_asymmetric_fp3(2).is_err());

        let rows = export_bid_curve(&p);
        assert_eq!(rows.len(), 14);
        assert_eq!(rows[0].bids, vec![0, 0, 0]);
        assert_eq!(rows[12].bids[0], 8);
        assert_eq!(rows[12].reference, rational::int(8));
        let csv = bid_curve_csv(&rows);
        assert_eq!(
            csv.lines().next(),
            Some("value,bidder_1,bidder_2,bidder_3,reference")
        );
        assert!(csv.lines().nth(2).unwrap().ends_with(",2/3"));
    }

    #[test]
    fn listed_profiles_verify() {
        let spec = AuctionSpec::uniform(Structure::AllPay, TieRule::FairTies, 2, 5).unwrap();
        let reduced = round1_weak_dominance(&spec).unwrap();
        let r = enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, 1_000_000)
            .unwrap();
        assert!(r.is_complete());
        for p in &r.equilibria {
            assert!(is_equilibrium(&spec, p).unwrap().is_equilibrium());
        }
    }

    #[test]
    fn tiny_budget_is_reported() {
        let spec = AuctionSpec::uniform(Structure::FirstPrice, TieRule::FairTies, 2, 8).unwrap();
        let reduced = round1_weak_dominance(&spec).unwrap();
        let r = enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, 10).unwrap();
        assert_eq!(r.status, SearchStatus::BudgetExhausted);
    }
}
