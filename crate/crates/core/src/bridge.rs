//! Discretisations that keep a continuous symmetric equilibrium intact, and the
//! revenue gap of the two-bidder first-price auction as the grid is refined.
//!
//! Given a value distribution `F` on `[lo, hi]` with equilibrium bid rule `β`, and
//! a step `δ` dividing `hi - lo`, the discrete game draws values from
//! `lo, lo+δ, ..., hi-δ` with `P(value <= v) = F(v + δ)`, allows only the bids
//! `β(lo), β(lo+δ), ..., β(hi)`, and has no winner on ties. Bidding `β(v)` at
//! every value is then an equilibrium, and adding any bid inside the range breaks it.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::PayoffEngine;
use crate::error::{GameError, Result};
use crate::game::{
    AuctionSpec, BiddingFunction, GridSpec, StrategyProfile, Structure, TieRule, ValueDistribution,
};
use crate::payoff::{
    check_with_engine, expected_revenue, interim_payoff, opponent_bid_pmf, Deviation, Verdict,
};
use crate::rational::{self, int, Rational};

pub type RealFn = Arc<dyn Fn(&Rational) -> Rational + Send + Sync>;

/// A continuous symmetric auction, evaluated exactly at the points it is asked about.
#[derive(Clone)]
pub struct ContinuousAuction {
    pub structure: Structure,
    pub n: usize,
    pub lower: Rational,
    pub upper: Rational,
    pub cdf: RealFn,
    pub bid_rule: RealFn,
}

impl fmt::Debug for ContinuousAuction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousAuction")
            .field("structure", &self.structure)
            .field("n", &self.n)
            .field("lower", &rational::format(&self.lower))
            .field("upper", &rational::format(&self.upper))
            .finish_non_exhaustive()
    }
}

impl ContinuousAuction {
    pub fn new(
        structure: Structure,
        n: usize,
        lower: Rational,
        upper: Rational,
        cdf: RealFn,
        bid_rule: RealFn,
    ) -> Result<Self> {
        if n < 2 {
            return Err(GameError::TooFewBidders(n));
        }
        if structure == Structure::SecondPrice {
            return Err(GameError::Unsupported(
                "only first-price and all-pay auctions are discretised".into(),
            ));
        }
        if lower >= upper {
            return Err(GameError::Invalid("value range is empty".into()));
        }
        if !cdf(&lower).is_zero() || !cdf(&upper).is_one() {
            return Err(GameError::Invalid(
                "the distribution must run from 0 at the bottom to 1 at the top".into(),
            ));
        }
        Ok(ContinuousAuction {
            structure,
            n,
            lower,
            upper,
            cdf,
            bid_rule,
        })
    }

    fn uniform_cdf(upper: &Rational) -> RealFn {
        let upper = upper.clone();
        Arc::new(move |v: &Rational| v / &upper)
    }

    /// Uniform values on `[0, upper]`, first price: `β(v) = (n-1) v / n`.
    pub fn uniform_first_price(n: usize, upper: Rational) -> Result<Self> {
        let slope = rational::ratio(n as i64 - 1, n as i64);
        Self::new(
            Structure::FirstPrice,
            n,
            Rational::zero(),
            upper.clone(),
            Self::uniform_cdf(&upper),
            Arc::new(move |v: &Rational| &slope * v),
        )
    }

    /// Uniform values on `[0, upper]`, all-pay: `β(v) = (n-1) v^n / (n upper^(n-1))`.
    pub fn uniform_all_pay(n: usize, upper: Rational) -> Result<Self> {
        let scale = rational::ratio(n as i64 - 1, n as i64) / num_traits::pow(upper.clone(), n - 1);
        Self::new(
            Structure::AllPay,
            n,
            Rational::zero(),
            upper.clone(),
            Self::uniform_cdf(&upper),
            Arc::new(move |v: &Rational| &scale * num_traits::pow(v.clone(), n)),
        )
    }

    /// The points `lower, lower + δ, ..., upper`.
    pub fn sample_points(&self, delta: &Rational, grid_count: usize) -> Result<Vec<Rational>> {
        if grid_count == 0 || !delta.is_positive() {
            return Err(GameError::Invalid(
                "need a positive step and at least one step".into(),
            ));
        }
        let steps = Rational::from_integer((grid_count as i64).into());
        if &self.upper - &self.lower != delta * &steps {
            return Err(GameError::Invalid(format!(
                "{} steps of {} do not span [{}, {}]",
                grid_count,
                rational::format(delta),
                rational::format(&self.lower),
                rational::format(&self.upper)
            )));
        }
        Ok((0..=grid_count)
            .map(|k| &self.lower + delta * int(k as i64))
            .collect())
    }
}

/// The discrete game and the bidding function carried over from the continuum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteAnalogue {
    pub spec: AuctionSpec,
    pub candidate: BiddingFunction,
}

/// Builds the discrete game for step `delta` with `grid_count` steps.
///
/// The bottom point `lower - δ` of the shifted distribution carries no mass and is
/// left out, so values run over `lower, ..., upper - δ`; the value at index `j`
/// bids `β(lower + jδ)`, which is bid index `j`. The top bid `β(upper)` is on
/// offer but unused.
pub fn build_discrete_analogue(
    cont: &ContinuousAuction,
    delta: &Rational,
    grid_count: usize,
) -> Result<DiscreteAnalogue> {
    let points = cont.sample_points(delta, grid_count)?;
    let bids: Vec<Rational> = points.iter().map(|p| (cont.bid_rule)(p)).collect();
    if !bids.windows(2).all(|w| w[0] < w[1]) {
        return Err(GameError::Invalid(
            "the bid rule is not strictly increasing on the grid".into(),
        ));
    }
    if bids[0].is_negative() {
        return Err(GameError::Invalid(
            "the bid rule is negative at the bottom".into(),
        ));
    }
    let values: Vec<Rational> = points[..grid_count].to_vec();
    let mut pmf = Vec::with_capacity(grid_count);
    for v in &values {
        let mass = (cont.cdf)(&(v + delta)) - (cont.cdf)(v);
        pmf.push(mass);
    }
    let dist = ValueDistribution::new(pmf)?;
    let spec = AuctionSpec::with_points(
        cont.structure,
        TieRule::NoWinnerOnTies,
        cont.n,
        values,
        dist,
        bids,
    )?;
    let candidate = BiddingFunction::from_fn(grid_count, |j| j);
    Ok(DiscreteAnalogue { spec, candidate })
}

/// Result of adding one extra bid strictly inside a gap of the bid set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapProbe {
    /// Index of the lower end of the gap in the original bid set.
    pub gap: usize,
    #[serde(with = "rational::serde_str")]
    pub inserted: Rational,
    pub verdict: Verdict,
    /// A bidder whose bid sits just above the gap gains by dropping to the new bid.
    pub downward: Option<Deviation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuumCheck {
    pub verdict: Verdict,
    pub probes: Vec<GapProbe>,
    /// Every probe broke the equilibrium.
    pub tight: bool,
}

impl ContinuumCheck {
    pub fn holds(&self) -> bool {
        self.verdict.is_equilibrium() && self.tight
    }
}

/// Checks that the carried-over function is a symmetric equilibrium and that
/// inserting the midpoint of any adjacent pair of bids destroys it.
pub fn verify_continuum_match(
    spec: &AuctionSpec,
    candidate: &BiddingFunction,
) -> Result<ContinuumCheck> {
    let engine = PayoffEngine::new(spec)?;
    let profile = StrategyProfile::symmetric(candidate.clone(), spec.n);
    spec.check_profile(&profile)?;
    let verdict = check_with_engine(&engine, &profile);
    let bids = spec.bid_points();
    let probes: Vec<GapProbe> = (0..bids.len().saturating_sub(1))
        .into_par_iter()
        .map(|gap| -> Result<GapProbe> {
            let inserted = (&bids[gap] + &bids[gap + 1]) / int(2);
            let mut widened = bids.to_vec();
            widened.insert(gap + 1, inserted.clone());
            let wider = AuctionSpec::with_points(
                spec.structure,
                spec.tie_rule,
                spec.n,
                spec.value_points().to_vec(),
                spec.values().clone(),
                widened,
            )?;
            let moved = BiddingFunction::from_fn(candidate.len(), |v| {
                let b = candidate.bid(v);
                if b > gap {
                    b + 1
                } else {
                    b
                }
            });
            let e = PayoffEngine::new(&wider)?;
            let profile = StrategyProfile::symmetric(moved, spec.n);
            let verdict = check_with_engine(&e, &profile);
            let downward = downward_deviation(&wider, &profile, gap + 1)?;
            Ok(GapProbe {
                gap,
                inserted,
                verdict,
                downward,
            })
        })
        .collect::<Result<_>>()?;
    let tight = probes.iter().all(|p| !p.verdict.is_equilibrium());
    Ok(ContinuumCheck {
        verdict,
        probes,
        tight,
    })
}

fn downward_deviation(
    spec: &AuctionSpec,
    profile: &StrategyProfile,
    inserted: usize,
) -> Result<Option<Deviation>> {
    let opponents = opponent_bid_pmf(spec, profile, 0)?;
    let f = profile.player(0);
    for v in 0..f.len() {
        if f.bid(v) != inserted + 1 {
            continue;
        }
        let gain = interim_payoff(spec, v, inserted, &opponents)
            - interim_payoff(spec, v, inserted + 1, &opponents);
        if gain.is_positive() {
            return Ok(Some(Deviation {
                player: 0,
                value: v,
                from_bid: inserted + 1,
                to_bid: inserted,
                gain,
            }));
        }
    }
    Ok(None)
}

/// One step of the refinement sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    /// Top grid index, `top / δ`.
    pub grid_x: usize,
    #[serde(with = "rational::serde_str")]
    pub revenue: Rational,
    #[serde(with = "rational::serde_str")]
    pub gap: Rational,
}

/// Revenue of the two-bidder first-price auction without ties on `{0, δ, ..., top}`
/// under `floor(v/2)`, against the continuous benchmark `top / 3`.
pub fn revenue_convergence(top: &Rational, deltas: &[Rational]) -> Result<Vec<ConvergenceRow>> {
    let benchmark = top / int(3);
    deltas
        .par_iter()
        .map(|delta| {
            let steps = top / delta;
            if !delta.is_positive() || !steps.is_integer() {
                return Err(GameError::Invalid(format!(
                    "step {} does not divide {}",
                    rational::format(delta),
                    rational::format(top)
                )));
            }
            let x = num_traits::ToPrimitive::to_usize(&steps.to_integer())
                .ok_or_else(|| GameError::TooLarge("grid too fine".into()))?;
            let spec = AuctionSpec::canonical(
                Structure::FirstPrice,
                TieRule::NoWinnerOnTies,
                2,
                GridSpec::new(delta.clone(), x)?,
                ValueDistribution::uniform(x + 1),
            )?;
            let profile = StrategyProfile::symmetric(BiddingFunction::from_fn(x + 1, |v| v / 2), 2);
            let revenue = expected_revenue(&spec, &profile)?;
            let gap = (&revenue - &benchmark).abs();
            Ok(ConvergenceRow {
                delta: delta.clone(),
                grid_x: x,
                revenue,
                gap,
            })
        })
        .collect()
}

/// `top, top/2, top/4, ...`, `count` entries.
pub fn halving_steps(top: &Rational, count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut d = top.clone();
    for _ in 0..count {
        out.push(d.clone());
        d /= int(2);
    }
    out
}

/// Whether the gap column never increases.
pub fn gaps_non_increasing(rows: &[ConvergenceRow]) -> bool {
    rows.windows(2).all(|w| w[1].gap <= w[0].gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn twenty_in_steps_of_two() {
        let cont = ContinuousAuction::uniform_first_price(2, int(20)).unwrap();
        let a = build_discrete_analogue(&cont, &int(2), 10).unwrap();
        let values: Vec<Rational> = (0..10).map(|k| int(2 * k)).collect();
        let bids: Vec<Rational> = (0..=10).map(int).collect();
        assert_eq!(a.spec.value_points(), &values[..]);
        assert_eq!(a.spec.bid_points(), &bids[..]);
        assert!(a.spec.values().is_uniform());
        assert_eq!(a.spec.tie_rule, TieRule::NoWinnerOnTies);
        let check = verify_continuum_match(&a.spec, &a.candidate).unwrap();
        assert!(check.verdict.is_equilibrium());
        assert!(check.tight, "{:?}", check.probes);
        assert_eq!(check.probes.len(), 10);
        // Every gap below the top bid is broken by someone dropping into it.
        for p in &check.probes[..9] {
            let w = p.downward.as_ref().unwrap();
            assert_eq!(
                (w.value, w.from_bid, w.to_bid),
                (p.gap + 1, p.gap + 2, p.gap + 1)
            );
        }
        assert!(check.probes[9].downward.is_none());
    }

    #[test]
    fn one_step_up_also_holds_for_two_uniform_bidders() {
        // Value 2j bidding j+1 earns (j-1)j/10, the same as dropping to j.
        let cont = ContinuousAuction::uniform_first_price(2, int(20)).unwrap();
        let a = build_discrete_analogue(&cont, &int(2), 10).unwrap();
        let shifted = BiddingFunction::from_fn(10, |j| j + 1);
        assert!(verify_continuum_match(&a.spec, &shifted)
            .unwrap()
            .verdict
            .is_equilibrium());
    }

    #[test]
    fn all_pay_counterpart() {
        let cont = ContinuousAuction::uniform_all_pay(2, int(20)).unwrap();
        let a = build_discrete_analogue(&cont, &int(2), 10).unwrap();
        assert_eq!(a.spec.bid_points()[1], ratio(1, 10));
        assert!(verify_continuum_match(&a.spec, &a.candidate)
            .unwrap()
            .holds());
    }

    #[test]
    fn single_step() {
        let cont = ContinuousAuction::uniform_first_price(3, int(3)).unwrap();
        let a = build_discrete_analogue(&cont, &int(3), 1).unwrap();
        assert_eq!(a.spec.num_values(), 1);
        let check = verify_continuum_match(&a.spec, &a.candidate).unwrap();
        assert!(check.verdict.is_equilibrium());
    }

    #[test]
    fn uneven_step_is_rejected() {
        let cont = ContinuousAuction::uniform_first_price(2, int(20)).unwrap();
        assert!(build_discrete_analogue(&cont, &int(3), 7).is_err());
    }

    #[test]
    fn revenue_sweep() {
        let rows = revenue_convergence(&int(12), &halving_steps(&int(12), 5)).unwrap();
        // Joint-outcome sums over the grids, computed independently.
        assert_eq!(rows[0].revenue, int(0));
        assert_eq!(rows[1].revenue, ratio(8, 3));
        assert_eq!(rows[2].revenue, ratio(72, 25));
        assert_eq!(rows[3].revenue, ratio(88, 27));
        assert_eq!(rows[4].revenue, ratio(1032, 289));
        assert!(gaps_non_increasing(&rows));
    }
}
