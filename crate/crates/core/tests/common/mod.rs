//! Brute-force oracles shared by the integration tests.

use discrete_auction::rational::ratio;
use discrete_auction::{
    is_equilibrium, AuctionSpec, BiddingFunction, GridSpec, ReducedGame, StrategyProfile,
    Structure, TieRule, ValueDistribution,
};

pub const STRUCTURES: [Structure; 3] = [
    Structure::FirstPrice,
    Structure::SecondPrice,
    Structure::AllPay,
];
pub const TIES: [TieRule; 2] = [TieRule::FairTies, TieRule::NoWinnerOnTies];

pub fn all_functions(points: usize) -> Vec<BiddingFunction> {
    let total = points.pow(points as u32);
    (0..total)
        .map(|mut k| {
            let mut bids = vec![0; points];
            for b in bids.iter_mut() {
                *b = k % points;
                k /= points;
            }
            BiddingFunction::new(bids)
        })
        .collect()
}

/// Every two-bidder equilibrium over the whole strategy space whose functions use
/// only first-round undominated bids.
pub fn brute_force(spec: &AuctionSpec, undominated: &ReducedGame) -> Vec<StrategyProfile> {
    let functions = all_functions(spec.num_values());
    let mut out = Vec::new();
    for f in &functions {
        for g in &functions {
            let p = StrategyProfile::new(vec![f.clone(), g.clone()]);
            if undominated.contains_profile(&p)
                && is_equilibrium(spec, &p).unwrap().is_equilibrium()
            {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

/// Two-bidder games with at most four grid points, uniform and skewed.
pub fn small_games() -> Vec<AuctionSpec> {
    let mut out = Vec::new();
    for s in STRUCTURES {
        for t in TIES {
            for x in 1..=3 {
                out.push(AuctionSpec::uniform(s, t, 2, x).unwrap());
                let weights: Vec<i64> = (1..=x as i64 + 1).collect();
                let total: i64 = weights.iter().sum();
                let pmf =
                    ValueDistribution::new(weights.iter().map(|&w| ratio(w, total)).collect())
                        .unwrap();
                out.push(AuctionSpec::canonical(s, t, 2, GridSpec::unit(x), pmf).unwrap());
            }
        }
    }
    out
}
