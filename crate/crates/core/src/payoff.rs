//! Interim payoffs, best responses, equilibrium checks and revenue.
//!
//! The functions taking explicit opponent pmfs evaluate directly on rationals; the
//! profile-level functions go through [`PayoffEngine`] and convert back at the end.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::engine::{BidCdf, PayoffEngine};
use crate::error::Result;
use crate::game::{AuctionSpec, BiddingFunction, StrategyProfile, Structure, TieRule};
use crate::rational::{self, Rational};

/// Bid pmf induced by pushing the value pmf through `f`.
pub fn function_bid_pmf(spec: &AuctionSpec, f: &BiddingFunction) -> Result<Vec<Rational>> {
    spec.check_function(f)?;
    let mut pmf = vec![Rational::zero(); spec.num_bids()];
    for (v, &b) in f.bids().iter().enumerate() {
        pmf[b] += &spec.pmf()[v];
    }
    Ok(pmf)
}

/// Bid pmfs of every opponent of `player`, in player order.
pub fn opponent_bid_pmf(
    spec: &AuctionSpec,
    profile: &StrategyProfile,
    player: usize,
) -> Result<Vec<Vec<Rational>>> {
    spec.check_profile(profile)?;
    profile
        .players()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != player)
        .map(|(_, f)| function_bid_pmf(spec, f))
        .collect()
}

fn mass_below(pmf: &[Rational], bid: usize) -> Rational {
    pmf[..bid].iter().sum()
}

/// Probability of winning with `bid` against independent opponents.
///
/// Under fair ties, a dynamic program over opponents tracks how many of them tie
/// at `bid` while the rest bid strictly lower; a `k`-way tie wins with `1/(k+1)`.
pub fn win_probability(bid: usize, opponents: &[Vec<Rational>], tie_rule: TieRule) -> Rational {
    match tie_rule {
        TieRule::NoWinnerOnTies => opponents.iter().map(|pmf| mass_below(pmf, bid)).product(),
        TieRule::FairTies => {
            let mut ways = vec![Rational::zero(); opponents.len() + 1];
            ways[0] = Rational::one();
            for (j, pmf) in opponents.iter().enumerate() {
                let below = mass_below(pmf, bid);
                let tie = pmf[bid].clone();
                for k in (0..=j + 1).rev() {
                    let stay = &ways[k] * &below;
                    let join = if k > 0 {
                        &ways[k - 1] * &tie
                    } else {
                        Rational::zero()
                    };
                    ways[k] = stay + join;
                }
            }
            ways.iter()
                .enumerate()
                .map(|(k, w)| w / Rational::from_integer((k as i64 + 1).into()))
                .sum()
        }
    }
}

/// Expected payment of a bidder who bids `bid` (unconditional on winning).
pub fn expected_payment(spec: &AuctionSpec, bid: usize, opponents: &[Vec<Rational>]) -> Rational {
    let amount = &spec.bid_points()[bid];
    match spec.structure {
        Structure::FirstPrice => amount * win_probability(bid, opponents, spec.tie_rule),
        Structure::AllPay => amount.clone(),
        Structure::SecondPrice => {
            let all_at_most = |m: usize| -> Rational {
                opponents
                    .iter()
                    .map(|pmf| pmf[..=m].iter().sum::<Rational>())
                    .product()
            };
            // Winning outright: price is the highest opponent bid m < bid.
            let mut price = Rational::zero();
            let mut prev = Rational::zero();
            for m in 0..bid {
                let cur = all_at_most(m);
                price += &spec.bid_points()[m] * (&cur - &prev);
                prev = cur;
            }
            // Winning through a tie: price is the tied bid itself.
            let outright = prev;
            let tied = win_probability(bid, opponents, spec.tie_rule) - outright;
            price + amount * tied
        }
    }
}

/// Expected payoff of a bidder with value index `v` bidding `bid`.
pub fn interim_payoff(
    spec: &AuctionSpec,
    v: usize,
    bid: usize,
    opponents: &[Vec<Rational>],
) -> Rational {
    let win = win_probability(bid, opponents, spec.tie_rule);
    &spec.value_points()[v] * win - expected_payment(spec, bid, opponents)
}

/// Every bid attaining the maximal interim payoff at value `v`.
pub fn best_response_set(spec: &AuctionSpec, v: usize, opponents: &[Vec<Rational>]) -> Vec<usize> {
    let payoffs: Vec<Rational> = (0..spec.num_bids())
        .map(|b| interim_payoff(spec, v, b, opponents))
        .collect();
    let best = payoffs.iter().max().expect("bid grid is never empty");
    payoffs
        .iter()
        .enumerate()
        .filter(|(_, p)| *p == best)
        .map(|(b, _)| b)
        .collect()
}

/// A strictly profitable unilateral deviation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub player: usize,
    pub value: usize,
    pub from_bid: usize,
    pub to_bid: usize,
    #[serde(with = "rational::serde_str")]
    pub gain: Rational,
}

/// Result of an equilibrium check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium { witness: Deviation },
}

impl Verdict {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, Verdict::Equilibrium)
    }

    pub fn witness(&self) -> Option<&Deviation> {
        match self {
            Verdict::Equilibrium => None,
            Verdict::NotEquilibrium { witness } => Some(witness),
        }
    }
}

/// Scans players, then values, then bids `0..` and reports the first strict improvement.
pub(crate) fn find_deviation(
    engine: &PayoffEngine,
    profile: &StrategyProfile,
    cdfs: &[BidCdf],
) -> Option<(usize, usize, usize, i128)> {
    let n = profile.len();
    let mut opponents: Vec<&BidCdf> = Vec::with_capacity(n - 1);
    for (i, f) in profile.players().iter().enumerate() {
        if i > 0 && profile.player(i) == profile.player(i - 1) {
            // Same function as the previous player, hence the same opponent multiset.
            continue;
        }
        opponents.clear();
        opponents.extend(
            cdfs.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| c),
        );
        let outcomes = engine.outcomes(&opponents);
        for (v, &b) in f.bids().iter().enumerate() {
            let current = engine.payoff(v, &outcomes[b]);
            for (d, o) in outcomes.iter().enumerate() {
                let p = engine.payoff(v, o);
                if p > current {
                    return Some((i, v, d, p - current));
                }
            }
        }
    }
    None
}

/// Exact equilibrium check: every player's bid at every value must maximise its
/// interim payoff over the whole bid grid.
pub fn is_equilibrium(spec: &AuctionSpec, profile: &StrategyProfile) -> Result<Verdict> {
    spec.check_profile(profile)?;
    let engine = PayoffEngine::new(spec)?;
    Ok(check_with_engine(&engine, profile))
}

pub(crate) fn check_with_engine(engine: &PayoffEngine, profile: &StrategyProfile) -> Verdict {
    let cdfs: Vec<BidCdf> = profile.players().iter().map(|f| engine.cdf_of(f)).collect();
    match find_deviation(engine, profile, &cdfs) {
        None => Verdict::Equilibrium,
        Some((player, value, to_bid, gain)) => Verdict::NotEquilibrium {
            witness: Deviation {
                player,
                value,
                from_bid: profile.player(player).bid(value),
                to_bid,
                gain: engine.money(gain),
            },
        },
    }
}

/// Largest joint outcome space enumerated by [`expected_revenue`].
pub const OUTCOME_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Expected seller revenue. Enumerates joint values when the outcome space is at
/// most [`OUTCOME_ENUMERATION_LIMIT`], otherwise sums per-bidder expected payments.
pub fn expected_revenue(spec: &AuctionSpec, profile: &StrategyProfile) -> Result<Rational> {
    let outcomes = (spec.num_values() as u128).checked_pow(spec.n as u32);
    match outcomes {
        Some(k) if k <= OUTCOME_ENUMERATION_LIMIT => expected_revenue_by_outcomes(spec, profile),
        _ => expected_revenue_by_distribution(spec, profile),
    }
}

/// Revenue as the sum over bidders of expected payments given bid distributions.
pub fn expected_revenue_by_distribution(
    spec: &AuctionSpec,
    profile: &StrategyProfile,
) -> Result<Rational> {
    spec.check_profile(profile)?;
    let engine = PayoffEngine::new(spec)?;
    let cdfs: Vec<BidCdf> = profile.players().iter().map(|f| engine.cdf_of(f)).collect();
    Ok(engine.revenue(&cdfs))
}

/// Revenue by enumerating every joint draw of values and settling each auction.
pub fn expected_revenue_by_outcomes(
    spec: &AuctionSpec,
    profile: &StrategyProfile,
) -> Result<Rational> {
    spec.check_profile(profile)?;
    let n = spec.n;
    let s = spec.num_values();
    let bids = spec.bid_points();
    let mut total = Rational::zero();
    let mut values = vec![0usize; n];
    loop {
        let prob: Rational = values.iter().map(|&v| &spec.pmf()[v]).product();
        let placed: Vec<usize> = (0..n).map(|i| profile.player(i).bid(values[i])).collect();
        let top = *placed.iter().max().expect("n >= 2");
        let tied = placed.iter().filter(|&&b| b == top).count();
        let revenue = match spec.structure {
            Structure::AllPay => placed.iter().map(|&b| bids[b].clone()).sum(),
            Structure::FirstPrice => {
                if tied > 1 && spec.tie_rule == TieRule::NoWinnerOnTies {
                    Rational::zero()
                } else {
                    bids[top].clone()
                }
            }
            Structure::SecondPrice => {
                if tied > 1 {
                    match spec.tie_rule {
                        TieRule::NoWinnerOnTies => Rational::zero(),
                        TieRule::FairTies => bids[top].clone(),
                    }
                } else {
                    let second = placed.iter().filter(|&&b| b != top).max().copied();
                    second
                        .map(|b| bids[b].clone())
                        .unwrap_or_else(Rational::zero)
                }
            }
        };
        total += prob * revenue;

        let mut i = 0;
        loop {
            if i == n {
                return Ok(total);
            }
            values[i] += 1;
            if values[i] < s {
                break;
            }
            values[i] = 0;
            i += 1;
        }
    }
}
