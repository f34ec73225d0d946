//! Symmetric pure-strategy equilibria.
//!
//! Both searches build the common bidding function value by value. Without ties
//! the function can only stay put or rise by one step; with fair ties any monotone
//! undominated function is allowed. A prefix is cut once a value it fixes has a
//! strictly better bid whatever the remaining values do: each open value is
//! bracketed between the last fixed bid and the highest bid still reachable, and
//! win probabilities are monotone in that bracket. Complete functions are verified
//! exactly.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dominance::round1_set;
use crate::engine::{BidCdf, PayoffEngine};
use crate::enumerate::SearchStats;
use crate::error::{GameError, Result};
use crate::game::{AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule};
use crate::monotone;
use crate::payoff::{check_with_engine, Verdict};

/// Why the list of equilibria is complete (or why it might not be).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Every admissible function was either cut or verified.
    Exhausted { stats: SearchStats },
    /// Settled by a dominance argument rather than search.
    Analytic { reason: String },
    /// The grid is above the search cap; nothing is claimed.
    Inconclusive { cap: usize, x: usize },
}

/// Search effort and findings below one choice of the bid at value one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchRecord {
    pub bid_at_one: usize,
    pub nodes: u64,
    pub equilibria: Vec<BiddingFunction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetricSolveReport {
    pub equilibria: Vec<BiddingFunction>,
    pub certificate: Certificate,
    pub branch_log: Vec<BranchRecord>,
    pub notes: Vec<String>,
    /// Structural properties that failed on a reported equilibrium. Always empty
    /// unless something is wrong.
    pub invariant_violations: Vec<String>,
}

impl SymmetricSolveReport {
    pub fn is_inconclusive(&self) -> bool {
        matches!(self.certificate, Certificate::Inconclusive { .. })
    }
}

/// Largest `x` the fair-ties search takes on by default.
pub const DEFAULT_TIES_CAP: usize = 16;

/// Checks a symmetric profile built from `f`.
pub fn verify_symmetric(spec: &AuctionSpec, f: &BiddingFunction) -> Result<Verdict> {
    crate::payoff::is_equilibrium(spec, &StrategyProfile::symmetric(f.clone(), spec.n))
}

/// Second price: bidding one's value weakly dominates, and without ties so does
/// bidding one step above it.
pub fn solve_second_price(spec: &AuctionSpec) -> Result<SymmetricSolveReport> {
    if spec.structure != Structure::SecondPrice {
        return Err(GameError::Unsupported(
            "the second-price solver needs a second-price auction".into(),
        ));
    }
    let x = spec.x().ok_or(GameError::NonCanonical)?;
    let truthful = BiddingFunction::from_fn(x + 1, |v| v);
    let mut equilibria = vec![truthful];
    let mut notes = Vec::new();
    let reason = match spec.tie_rule {
        TieRule::FairTies => {
            "bidding one's value weakly dominates every other function".to_string()
        }
        TieRule::NoWinnerOnTies => {
            let shifted = BiddingFunction::from_fn(x + 1, |v| (v + 1).min(x));
            if shifted != equilibria[0] {
                equilibria.push(shifted);
            }
            notes.push(
                "any function choosing v or min(v+1, x) at each value earns the same; \
                 the two extreme members are listed"
                    .to_string(),
            );
            "bidding one's value or one step above it weakly dominates every other function"
                .to_string()
        }
    };
    let engine = PayoffEngine::new(spec)?;
    let mut invariant_violations = Vec::new();
    for f in &equilibria {
        if let Verdict::NotEquilibrium { witness } =
            check_with_engine(&engine, &StrategyProfile::symmetric(f.clone(), spec.n))
        {
            invariant_violations.push(format!("{f} fails verification: {witness:?}"));
        }
    }
    equilibria.sort();
    Ok(SymmetricSolveReport {
        equilibria,
        certificate: Certificate::Analytic { reason },
        branch_log: Vec::new(),
        notes,
        invariant_violations,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Moves {
    /// Stay or rise by one step.
    Chain,
    /// Any monotone undominated bid.
    Free,
}

struct Dfs<'a> {
    engine: &'a PayoffEngine,
    sets: Vec<Vec<usize>>,
    moves: Moves,
    nodes: AtomicU64,
    prunes: AtomicU64,
    leaves: AtomicU64,
}

impl Dfs<'_> {
    fn choices(&self, prefix: &[usize]) -> Vec<usize> {
        let v = prefix.len();
        let floor = prefix.last().copied().unwrap_or(0);
        self.sets[v]
            .iter()
            .copied()
            .filter(|&c| c >= floor && (self.moves == Moves::Free || v == 0 || c <= floor + 1))
            .collect()
    }

    /// Highest bid reachable at each open value after `prefix`.
    fn ceiling(&self, prefix: &[usize]) -> Vec<usize> {
        let s = self.sets.len();
        let mut out = prefix.to_vec();
        let mut last = *prefix.last().expect("prefix is never empty");
        for v in prefix.len()..s {
            let cap = match self.moves {
                Moves::Chain => last + 1,
                Moves::Free => usize::MAX,
            };
            let top = self.sets[v]
                .iter()
                .rev()
                .find(|&&c| c <= cap)
                .copied()
                .unwrap_or(last);
            last = top.max(last);
            out.push(last);
        }
        out
    }

    /// True when some fixed value already has a strictly better bid.
    fn refuted(&self, prefix: &[usize]) -> bool {
        let s = self.sets.len();
        let n = self.engine.n();
        let last = *prefix.last().expect("prefix is never empty");
        let floor_fn = prefix
            .iter()
            .copied()
            .chain(std::iter::repeat(last))
            .take(s);
        let low: BidCdf = self.engine.cdf_from_pairs(floor_fn.enumerate());
        let high: BidCdf = self
            .engine
            .cdf_from_pairs(self.ceiling(prefix).into_iter().enumerate());
        let highs: Vec<&BidCdf> = vec![&high; n - 1];
        let lows: Vec<&BidCdf> = vec![&low; n - 1];
        let out_high = self.engine.outcomes(&highs);
        let out_low = self.engine.outcomes(&lows);
        let nb = self.engine.num_bids();
        let lower: Vec<Vec<i128>> = prefix
            .iter()
            .enumerate()
            .map(|(w, _)| {
                (0..nb)
                    .map(|d| self.engine.payoff_range(w, d, &out_high[d], &out_low[d]).0)
                    .collect()
            })
            .collect();
        prefix.iter().enumerate().any(|(w, &b)| {
            let upper = self.engine.payoff_range(w, b, &out_high[b], &out_low[b]).1;
            lower[w].iter().any(|&l| l > upper)
        })
    }

    fn explore(&self, prefix: &mut Vec<usize>, found: &mut Vec<BiddingFunction>) {
        self.nodes.fetch_add(1, Ordering::Relaxed);
        if self.refuted(prefix) {
            self.prunes.fetch_add(1, Ordering::Relaxed);
            return;
        }
        if prefix.len() == self.sets.len() {
            self.leaves.fetch_add(1, Ordering::Relaxed);
            let f = BiddingFunction::new(prefix.clone());
            let profile = StrategyProfile::symmetric(f.clone(), self.engine.n());
            if check_with_engine(self.engine, &profile).is_equilibrium() {
                found.push(f);
            }
            return;
        }
        for c in self.choices(prefix) {
            prefix.push(c);
            self.explore(prefix, found);
            prefix.pop();
        }
    }

    /// Prefixes of length `depth` (or complete functions) to hand out to workers.
    fn frontier(&self, prefix: &mut Vec<usize>, depth: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() >= depth || prefix.len() == self.sets.len() {
            out.push(prefix.clone());
            return;
        }
        for c in self.choices(prefix) {
            prefix.push(c);
            self.frontier(prefix, depth, out);
            prefix.pop();
        }
    }
}

fn run_dfs(
    spec: &AuctionSpec,
    moves: Moves,
) -> Result<(Vec<BiddingFunction>, SearchStats, Vec<BranchRecord>)> {
    let start = Instant::now();
    let x = spec.x().ok_or(GameError::NonCanonical)?;
    let engine = PayoffEngine::new(spec)?;
    let dfs = Dfs {
        engine: &engine,
        sets: (0..=x).map(|v| round1_set(spec, v, x)).collect(),
        moves,
        nodes: AtomicU64::new(0),
        prunes: AtomicU64::new(0),
        leaves: AtomicU64::new(0),
    };
    let mut branch_log = Vec::new();
    let mut all = Vec::new();
    // Branch on the bid at value one (the bid at zero is forced).
    let roots: Vec<Vec<usize>> = {
        let mut out = Vec::new();
        dfs.frontier(&mut Vec::new(), 2.min(x + 1), &mut out);
        out
    };
    for root in roots {
        let before = dfs.nodes.load(Ordering::Relaxed);
        let mut tasks = Vec::new();
        dfs.frontier(&mut root.clone(), (x + 1).min(8), &mut tasks);
        let mut found: Vec<BiddingFunction> = tasks
            .into_par_iter()
            .map(|mut prefix| {
                let mut found = Vec::new();
                dfs.explore(&mut prefix, &mut found);
                found
            })
            .flatten()
            .collect();
        found.sort();
        branch_log.push(BranchRecord {
            bid_at_one: root.get(1).copied().unwrap_or(0),
            nodes: dfs.nodes.load(Ordering::Relaxed) - before,
            equilibria: found.clone(),
        });
        all.extend(found);
    }
    all.sort();
    let stats = SearchStats {
        nodes: dfs.nodes.load(Ordering::Relaxed),
        prunes: dfs.prunes.load(Ordering::Relaxed),
        verified: dfs.leaves.load(Ordering::Relaxed),
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok((all, stats, branch_log))
}

/// First-price or all-pay without ties: search over functions that start at zero
/// and never rise by more than one step.
pub fn solve_symmetric_no_ties(spec: &AuctionSpec) -> Result<SymmetricSolveReport> {
    if spec.tie_rule != TieRule::NoWinnerOnTies || spec.structure == Structure::SecondPrice {
        return Err(GameError::Unsupported(
            "this solver handles first-price and all-pay auctions without ties".into(),
        ));
    }
    let (equilibria, stats, branch_log) = run_dfs(spec, Moves::Chain)?;
    let invariant_violations = structural_violations(spec, &equilibria);
    Ok(SymmetricSolveReport {
        equilibria,
        certificate: Certificate::Exhausted { stats },
        branch_log,
        notes: Vec::new(),
        invariant_violations,
    })
}

/// First-price or all-pay with fair ties: search over every monotone undominated
/// function, up to `cap` on `x`.
pub fn solve_symmetric_with_ties(spec: &AuctionSpec, cap: usize) -> Result<SymmetricSolveReport> {
    if spec.tie_rule != TieRule::FairTies || spec.structure == Structure::SecondPrice {
        return Err(GameError::Unsupported(
            "this solver handles first-price and all-pay auctions with fair ties".into(),
        ));
    }
    let x = spec.x().ok_or(GameError::NonCanonical)?;
    if x > cap {
        return Ok(SymmetricSolveReport {
            equilibria: Vec::new(),
            certificate: Certificate::Inconclusive { cap, x },
            branch_log: Vec::new(),
            notes: vec![format!(
                "x = {x} is above the search cap {cap}; raise the cap"
            )],
            invariant_violations: Vec::new(),
        });
    }
    let (equilibria, stats, branch_log) = run_dfs(spec, Moves::Free)?;
    let invariant_violations = structural_violations(spec, &equilibria);
    Ok(SymmetricSolveReport {
        equilibria,
        certificate: Certificate::Exhausted { stats },
        branch_log,
        notes: Vec::new(),
        invariant_violations,
    })
}

/// Dispatches on the auction format and tie rule.
pub fn solve_symmetric(spec: &AuctionSpec, ties_cap: usize) -> Result<SymmetricSolveReport> {
    match (spec.structure, spec.tie_rule) {
        (Structure::SecondPrice, _) => solve_second_price(spec),
        (_, TieRule::NoWinnerOnTies) => solve_symmetric_no_ties(spec),
        (_, TieRule::FairTies) => solve_symmetric_with_ties(spec, ties_cap),
    }
}

/// Every monotone undominated function that is a symmetric equilibrium, found by
/// checking them all with no pruning. Used to cross-check the searches.
pub fn symmetric_by_plain_enumeration(spec: &AuctionSpec) -> Result<Vec<BiddingFunction>> {
    let x = spec.x().ok_or(GameError::NonCanonical)?;
    let engine = PayoffEngine::new(spec)?;
    let sets: Vec<Vec<usize>> = (0..=x).map(|v| round1_set(spec, v, x)).collect();
    let mut found = Vec::new();
    monotone::for_each_monotone(&sets, |bids| {
        let f = BiddingFunction::new(bids.to_vec());
        if check_with_engine(&engine, &StrategyProfile::symmetric(f.clone(), spec.n))
            .is_equilibrium()
        {
            found.push(f);
        }
        true
    });
    found.sort();
    Ok(found)
}

/// Whether `bid >= (2 - sqrt 3) * value`, decided in integers.
pub fn above_jump_threshold(bid: usize, value: usize) -> bool {
    let (b, v) = (bid as u128, value as u128);
    // b >= (2 - sqrt3) v  <=>  sqrt3 v >= 2v - b
    if b >= 2 * v {
        return true;
    }
    let r = 2 * v - b;
    3 * v * v >= r * r
}

/// Properties every reported equilibrium must have: monotone bids; no jumps without
/// ties; at most two (first price) or one (all-pay) equilibria without ties; and,
/// with two bidders in first price with ties, no jump from a value whose bid is at
/// least `(2 - sqrt 3)` times the value.
pub fn structural_violations(spec: &AuctionSpec, equilibria: &[BiddingFunction]) -> Vec<String> {
    let mut out = Vec::new();
    for f in equilibria {
        if !f.is_monotone() {
            out.push(format!("{f} is not monotone"));
        }
        if spec.tie_rule == TieRule::NoWinnerOnTies && !f.has_no_jumps() {
            out.push(format!("{f} jumps"));
        }
        if spec.tie_rule == TieRule::FairTies
            && spec.n == 2
            && spec.structure == Structure::FirstPrice
        {
            for v in 0..f.len().saturating_sub(1) {
                if f.bid(v + 1) > f.bid(v) + 1 && above_jump_threshold(f.bid(v), v) {
                    out.push(format!("{f} jumps at value {v} above the threshold"));
                }
            }
        }
    }
    if spec.tie_rule == TieRule::NoWinnerOnTies {
        let limit = match spec.structure {
            Structure::FirstPrice => 2,
            Structure::AllPay => 1,
            Structure::SecondPrice => usize::MAX,
        };
        if equilibria.len() > limit {
            out.push(format!(
                "{} symmetric equilibria found, at most {limit} expected",
                equilibria.len()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(structure: Structure, tie: TieRule, n: usize, x: usize) -> AuctionSpec {
        AuctionSpec::uniform(structure, tie, n, x).unwrap()
    }

    #[test]
    fn second_price() {
        let r =
            solve_second_price(&uniform(Structure::SecondPrice, TieRule::FairTies, 2, 5)).unwrap();
        assert_eq!(r.equilibria, vec![BiddingFunction::from_fn(6, |v| v)]);
        let r = solve_second_price(&uniform(
            Structure::SecondPrice,
            TieRule::NoWinnerOnTies,
            3,
            5,
        ))
        .unwrap();
        assert_eq!(r.equilibria.len(), 2);
        assert!(r.invariant_violations.is_empty());
        let r = solve_second_price(&uniform(
            Structure::SecondPrice,
            TieRule::NoWinnerOnTies,
            2,
            0,
        ))
        .unwrap();
        assert_eq!(r.equilibria, vec![BiddingFunction::new(vec![0])]);
    }

    #[test]
    fn two_bidder_first_price_without_ties() {
        let r = solve_symmetric_no_ties(&uniform(
            Structure::FirstPrice,
            TieRule::NoWinnerOnTies,
            2,
            10,
        ))
        .unwrap();
        let floor = BiddingFunction::from_fn(11, |v| v / 2);
        let ceil = BiddingFunction::from_fn(11, |v| v.div_ceil(2));
        assert_eq!(r.equilibria, vec![floor, ceil]);
        assert_eq!(r.branch_log.len(), 2);
        assert!(r.invariant_violations.is_empty());
    }

    #[test]
    fn small_all_pay_grid() {
        // Frozen from an exhaustive rational check over all 27 functions on {0,1,2}.
        let f = |b: [usize; 3]| BiddingFunction::new(b.to_vec());
        let cases = [
            (2, TieRule::FairTies, vec![f([0, 0, 0]), f([0, 0, 1])]),
            (3, TieRule::FairTies, vec![f([0, 0, 1])]),
            (4, TieRule::FairTies, vec![f([0, 0, 1])]),
            (5, TieRule::FairTies, vec![]),
            (2, TieRule::NoWinnerOnTies, vec![f([0, 0, 1])]),
            (3, TieRule::NoWinnerOnTies, vec![]),
            (4, TieRule::NoWinnerOnTies, vec![]),
        ];
        for (n, tie, expected) in cases {
            let r =
                solve_symmetric(&uniform(Structure::AllPay, tie, n, 2), DEFAULT_TIES_CAP).unwrap();
            assert_eq!(r.equilibria, expected, "n = {n}, {tie}");
        }
    }

    #[test]
    fn cap_is_reported() {
        let r = solve_symmetric_with_ties(
            &uniform(Structure::FirstPrice, TieRule::FairTies, 2, 12),
            10,
        )
        .unwrap();
        assert!(r.is_inconclusive());
    }

    #[test]
    fn jump_threshold_is_exact() {
        // 2 - sqrt3 ~ 0.2679
        assert!(above_jump_threshold(1, 3));
        assert!(!above_jump_threshold(1, 4));
        assert!(above_jump_threshold(0, 0));
        assert!(!above_jump_threshold(2, 8));
        assert!(above_jump_threshold(3, 11));
        assert!(!above_jump_threshold(3, 12));
    }

    #[test]
    fn pruned_matches_plain() {
        for x in 0..=6 {
            for structure in [Structure::FirstPrice, Structure::AllPay] {
                for tie in [TieRule::FairTies, TieRule::NoWinnerOnTies] {
                    for n in 2..=3 {
                        let spec = uniform(structure, tie, n, x);
                        let r = solve_symmetric(&spec, DEFAULT_TIES_CAP).unwrap();
                        let plain = symmetric_by_plain_enumeration(&spec).unwrap();
                        assert_eq!(r.equilibria, plain, "{}", spec.describe());
                    }
                }
            }
        }
    }
}
