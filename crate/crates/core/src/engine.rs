//! Exact payoff evaluation on scaled 128-bit integers.
//!
//! Probabilities are kept as integer multiples of `1 / (D^(n-1) * L)`, where `D` is
//! the common denominator of the value pmf and `L = lcm(1..=n)` absorbs the `1/m`
//! tie shares. Money amounts are integer multiples of the largest rational unit
//! dividing every value and bid point. Every comparison is therefore an exact
//! integer comparison, and the grid step never influences a decision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{GameError, Result};
use crate::game::{AuctionSpec, BiddingFunction, Structure, TieRule};
use crate::rational::{self, Rational};

/// Cumulative bid distribution of one bidder, in units of `1/D`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BidCdf(Vec<i128>);

impl BidCdf {
    /// Mass strictly below `bid`.
    #[inline]
    pub fn below(&self, bid: usize) -> i128 {
        if bid == 0 {
            0
        } else {
            self.0[bid - 1]
        }
    }

    /// Mass at or below `bid`.
    #[inline]
    pub fn at_most(&self, bid: usize) -> i128 {
        self.0[bid]
    }

    #[inline]
    pub fn at(&self, bid: usize) -> i128 {
        self.at_most(bid) - self.below(bid)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Scaled win probability and expected payment of one bid against fixed opponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub win: i128,
    pub pay: i128,
}

#[derive(Clone, Debug)]
pub struct PayoffEngine {
    structure: Structure,
    tie_rule: TieRule,
    n: usize,
    value_amount: Vec<i128>,
    bid_amount: Vec<i128>,
    mass: Vec<i128>,
    denom: i128,
    tie_weight: Vec<i128>,
    tie_lcm: i128,
    scale: i128,
    unit: Rational,
}

fn to_i128(b: &BigInt, what: &str) -> Result<i128> {
    b.to_i128()
        .ok_or_else(|| GameError::TooLarge(format!("{what} does not fit in 128 bits")))
}

impl PayoffEngine {
    pub fn new(spec: &AuctionSpec) -> Result<Self> {
        let n = spec.n;
        let unit =
            rational::common_unit(spec.value_points().iter().chain(spec.bid_points().iter()));
        let amounts = |pts: &[Rational]| -> Result<Vec<i128>> {
            pts.iter()
                .map(|p| to_i128(&(p / &unit).to_integer(), "money amount"))
                .collect()
        };
        let value_amount = amounts(spec.value_points())?;
        let bid_amount = amounts(spec.bid_points())?;

        let denom_big = rational::lcm_of_denominators(spec.pmf().iter());
        let mass = spec
            .pmf()
            .iter()
            .map(|p| {
                to_i128(
                    &(p * Rational::from_integer(denom_big.clone())).to_integer(),
                    "mass",
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let lcm_big = (1..=n as u64).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)));
        let scale_big = num_traits::pow(denom_big.clone(), n - 1) * &lcm_big;
        let max_amount = value_amount
            .iter()
            .chain(bid_amount.iter())
            .map(|a| a.unsigned_abs())
            .max()
            .unwrap_or(0);
        // Largest intermediate: revenue sums n * D * amount * scale.
        let bound = &scale_big
            * &denom_big
            * BigInt::from(n as u64)
            * BigInt::from(2 * max_amount + 1)
            * BigInt::from(8u32);
        if bound.bits() > 126 {
            return Err(GameError::TooLarge(format!(
                "n = {n} bidders with pmf denominator {denom_big} need about 2^{} headroom",
                bound.bits()
            )));
        }
        let tie_lcm = to_i128(&lcm_big, "tie lcm")?;
        let tie_weight = (0..n).map(|k| tie_lcm / (k as i128 + 1)).collect();
        Ok(PayoffEngine {
            structure: spec.structure,
            tie_rule: spec.tie_rule,
            n,
            value_amount,
            bid_amount,
            mass,
            denom: to_i128(&denom_big, "denominator")?,
            tie_weight,
            tie_lcm,
            scale: to_i128(&scale_big, "scale")?,
            unit,
        })
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_values(&self) -> usize {
        self.value_amount.len()
    }

    pub fn num_bids(&self) -> usize {
        self.bid_amount.len()
    }

    pub fn mass(&self) -> &[i128] {
        &self.mass
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    /// Probability scale `D^(n-1) * L`.
    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn value_amount(&self, v: usize) -> i128 {
        self.value_amount[v]
    }

    pub fn bid_amount(&self, b: usize) -> i128 {
        self.bid_amount[b]
    }

    /// Bid distribution induced by a complete bidding function.
    pub fn cdf_of(&self, f: &BiddingFunction) -> BidCdf {
        self.cdf_from_pairs(f.bids().iter().copied().enumerate())
    }

    /// Bid distribution from `(value, bid)` pairs; each value should appear once.
    pub fn cdf_from_pairs(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> BidCdf {
        let mut pmf = vec![0i128; self.num_bids()];
        for (v, b) in pairs {
            pmf[b] += self.mass[v];
        }
        let mut acc = 0;
        for p in pmf.iter_mut() {
            acc += *p;
            *p = acc;
        }
        BidCdf(pmf)
    }

    /// Scaled probability of winning with `bid`.
    pub fn win(&self, bid: usize, opponents: &[&BidCdf]) -> i128 {
        debug_assert_eq!(opponents.len(), self.n - 1);
        match self.tie_rule {
            TieRule::NoWinnerOnTies => {
                self.tie_lcm * opponents.iter().map(|c| c.below(bid)).product::<i128>()
            }
            TieRule::FairTies => {
                // ways[k]: mass of "exactly k opponents tie at `bid`, the rest are below".
                let mut ways = [0i128; 64];
                let mut ways_vec;
                let ways: &mut [i128] = if self.n <= 64 {
                    &mut ways[..self.n]
                } else {
                    ways_vec = vec![0i128; self.n];
                    &mut ways_vec
                };
                ways[0] = 1;
                for (j, c) in opponents.iter().enumerate() {
                    let below = c.below(bid);
                    let tie = c.at(bid);
                    for k in (0..=j + 1).rev() {
                        let stay = ways[k] * below;
                        let join = if k > 0 { ways[k - 1] * tie } else { 0 };
                        ways[k] = stay + join;
                    }
                }
                ways.iter().zip(&self.tie_weight).map(|(w, t)| w * t).sum()
            }
        }
    }

    /// Win probability and expected payment for every bid.
    pub fn outcomes(&self, opponents: &[&BidCdf]) -> Vec<Outcome> {
        let nb = self.num_bids();
        let wins: Vec<i128> = (0..nb).map(|b| self.win(b, opponents)).collect();
        match self.structure {
            Structure::FirstPrice => wins
                .iter()
                .enumerate()
                .map(|(b, &win)| Outcome {
                    win,
                    pay: self.bid_amount[b] * win,
                })
                .collect(),
            Structure::AllPay => wins
                .iter()
                .enumerate()
                .map(|(b, &win)| Outcome {
                    win,
                    pay: self.bid_amount[b] * self.scale,
                })
                .collect(),
            Structure::SecondPrice => {
                // all_le[m]: scaled probability that every opponent bids at most m.
                let all_le: Vec<i128> = (0..nb)
                    .map(|m| {
                        self.tie_lcm * opponents.iter().map(|c| c.at_most(m)).product::<i128>()
                    })
                    .collect();
                let mut below_price = 0i128; // sum_{m<b} amount[m] * P(max opponent bid = m)
                let mut out = Vec::with_capacity(nb);
                for b in 0..nb {
                    let all_below = if b == 0 { 0 } else { all_le[b - 1] };
                    let tie_part = wins[b] - all_below;
                    out.push(Outcome {
                        win: wins[b],
                        pay: below_price + self.bid_amount[b] * tie_part,
                    });
                    let prev = if b == 0 { 0 } else { all_le[b - 1] };
                    below_price += self.bid_amount[b] * (all_le[b] - prev);
                }
                out
            }
        }
    }

    /// Scaled interim payoff of value `v` given the outcome of its bid.
    #[inline]
    pub fn payoff(&self, v: usize, outcome: &Outcome) -> i128 {
        self.value_amount[v] * outcome.win - outcome.pay
    }

    /// Range of scaled payoffs for `(v, bid)` when each opponent's bid distribution
    /// lies between the `high` configuration (every opponent bids as high as it may)
    /// and the `low` configuration. Win probability is monotone in every opponent's
    /// CDF, so it is bracketed by the two configurations.
    pub fn payoff_range(
        &self,
        v: usize,
        bid: usize,
        high: &Outcome,
        low: &Outcome,
    ) -> (i128, i128) {
        let (w_min, w_max) = (high.win, low.win);
        let value = self.value_amount[v];
        let lin = |coef: i128| {
            let a = coef * w_min;
            let b = coef * w_max;
            (a.min(b), a.max(b))
        };
        match self.structure {
            Structure::FirstPrice => lin(value - self.bid_amount[bid]),
            Structure::AllPay => {
                let (lo, hi) = lin(value);
                let cost = self.bid_amount[bid] * self.scale;
                (lo - cost, hi - cost)
            }
            Structure::SecondPrice => {
                if high == low {
                    let p = self.payoff(v, high);
                    return (p, p);
                }
                // The price on winning lies between the lowest bid and one's own bid.
                let (lo, _) = lin(value - self.bid_amount[bid]);
                let (_, hi) = lin(value - self.bid_amount[0]);
                (lo, hi)
            }
        }
    }

    /// Converts a scaled money quantity back to currency.
    pub fn money(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), BigInt::from(self.scale)) * &self.unit
    }

    pub fn probability(&self, scaled: i128) -> Rational {
        Rational::new(BigInt::from(scaled), BigInt::from(self.scale))
    }

    /// Expected revenue of a profile from per-bidder bid distributions and payments.
    pub fn revenue(&self, cdfs: &[BidCdf]) -> Rational {
        let mut total = 0i128;
        let mut opponents: Vec<&BidCdf> = Vec::with_capacity(self.n - 1);
        for (i, own) in cdfs.iter().enumerate() {
            opponents.clear();
            opponents.extend(
                cdfs.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c),
            );
            let outcomes = self.outcomes(&opponents);
            for (b, o) in outcomes.iter().enumerate() {
                let m = own.at(b);
                if m != 0 {
                    total += m * o.pay;
                }
            }
        }
        let denom = BigInt::from(self.scale) * BigInt::from(self.denom);
        let r = Rational::new(BigInt::from(total), denom) * &self.unit;
        debug_assert!(!r.is_negative());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{AuctionSpec, GridSpec, ValueDistribution};
    use crate::rational::{int, ratio};

    fn spec(structure: Structure, tie: TieRule, n: usize, x: usize) -> AuctionSpec {
        AuctionSpec::uniform(structure, tie, n, x).unwrap()
    }

    #[test]
    fn coin_flip_against_one_opponent() {
        let s = spec(Structure::FirstPrice, TieRule::FairTies, 2, 3);
        let e = PayoffEngine::new(&s).unwrap();
        let opp = e.cdf_of(&BiddingFunction::constant(2, 4));
        assert_eq!(e.probability(e.win(2, &[&opp])), ratio(1, 2));
        assert_eq!(e.probability(e.win(3, &[&opp])), int(1));
        assert_eq!(e.probability(e.win(1, &[&opp])), int(0));
    }

    #[test]
    fn three_way_tie_splits_in_thirds() {
        let s = spec(Structure::FirstPrice, TieRule::FairTies, 3, 3);
        let e = PayoffEngine::new(&s).unwrap();
        let opp = e.cdf_of(&BiddingFunction::constant(1, 4));
        assert_eq!(e.probability(e.win(1, &[&opp, &opp])), ratio(1, 3));
    }

    #[test]
    fn second_price_pays_highest_losing_bid() {
        // Opponent bids its value on {0,1,2,3}; bidding 3 wins against 0,1,2 and ties 3.
        let s = spec(Structure::SecondPrice, TieRule::FairTies, 2, 3);
        let e = PayoffEngine::new(&s).unwrap();
        let opp = e.cdf_of(&BiddingFunction::new(vec![0, 1, 2, 3]));
        let o = e.outcomes(&[&opp])[3];
        assert_eq!(e.probability(o.win), ratio(7, 8));
        // (0 + 1 + 2)/4 + 3 * (1/4) * (1/2)
        assert_eq!(e.money(o.pay), ratio(3, 4) + ratio(3, 8));
    }

    #[test]
    fn amounts_follow_the_grid_step() {
        let s = AuctionSpec::canonical(
            Structure::FirstPrice,
            TieRule::NoWinnerOnTies,
            2,
            GridSpec::new(ratio(7, 3), 2).unwrap(),
            ValueDistribution::uniform(3),
        )
        .unwrap();
        let e = PayoffEngine::new(&s).unwrap();
        let opp = e.cdf_of(&BiddingFunction::new(vec![0, 0, 1]));
        let o = e.outcomes(&[&opp])[1];
        // value 2δ bidding δ wins w.p. 2/3: payoff δ * 2/3
        assert_eq!(e.money(e.payoff(2, &o)), ratio(7, 3) * ratio(2, 3));
    }

    #[test]
    fn rejects_games_beyond_i128() {
        let s = spec(Structure::FirstPrice, TieRule::FairTies, 40, 30);
        assert!(matches!(PayoffEngine::new(&s), Err(GameError::TooLarge(_))));
    }
}
