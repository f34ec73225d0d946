//! Game model: grids, value distributions, auction rules and strategies.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::rational::{self, int, Rational};

/// Payment rule of the auction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    FirstPrice,
    SecondPrice,
    AllPay,
}

/// What happens when two or more bids tie for highest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// `m` tied top bidders each win with probability `1/m`.
    FairTies,
    /// A tie at the top means nobody wins and nobody pays (all-pay bids are still paid).
    NoWinnerOnTies,
}

impl FromStr for Structure {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fp" | "fpsb" | "first_price" | "first" => Ok(Structure::FirstPrice),
            "sp" | "spsb" | "second_price" | "second" => Ok(Structure::SecondPrice),
            "ap" | "all_pay" | "allpay" => Ok(Structure::AllPay),
            _ => Err(GameError::Invalid(format!(
                "unknown auction structure {s:?} (expected fp, sp or ap)"
            ))),
        }
    }
}

impl FromStr for TieRule {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fair" | "fair_ties" | "ties" => Ok(TieRule::FairTies),
            "none" | "no_ties" | "no_winner" | "no_winner_on_ties" => Ok(TieRule::NoWinnerOnTies),
            _ => Err(GameError::Invalid(format!(
                "unknown tie rule {s:?} (expected fair or none)"
            ))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::FirstPrice => "first-price",
            Structure::SecondPrice => "second-price",
            Structure::AllPay => "all-pay",
        })
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::FairTies => "fair ties",
            TieRule::NoWinnerOnTies => "no winner on ties",
        })
    }
}

/// Evenly spaced grid `{0, δ, 2δ, ..., xδ}`. Computation works on indices `0..=x`;
/// `delta` only scales amounts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub delta: Rational,
    pub x: usize,
}

impl GridSpec {
    pub fn new(delta: Rational, x: usize) -> Result<Self> {
        if !delta.is_positive() {
            return Err(GameError::NonPositiveStep(rational::format(&delta)));
        }
        Ok(GridSpec { delta, x })
    }

    pub fn unit(x: usize) -> Self {
        GridSpec {
            delta: Rational::one(),
            x,
        }
    }

    /// Number of grid points, `x + 1`.
    pub fn len(&self) -> usize {
        self.x + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, index: usize) -> Rational {
        &self.delta * int(index as i64)
    }

    pub fn points(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Probability mass function over value indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueDistribution {
    pmf: Vec<Rational>,
}

impl ValueDistribution {
    /// Every entry must be strictly positive and the entries must sum to exactly one.
    pub fn new(pmf: Vec<Rational>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(GameError::EmptyGrid { what: "value" });
        }
        for (index, p) in pmf.iter().enumerate() {
            if !p.is_positive() {
                return Err(GameError::NonPositiveMass {
                    index,
                    mass: rational::format(p),
                });
            }
        }
        let total: Rational = pmf.iter().sum();
        if !total.is_one() {
            return Err(GameError::MassNotOne(rational::format(&total)));
        }
        Ok(ValueDistribution { pmf })
    }

    pub fn uniform(points: usize) -> Self {
        assert!(points > 0, "uniform distribution needs at least one point");
        let p = rational::ratio(1, points as i64);
        ValueDistribution {
            pmf: vec![p; points],
        }
    }

    pub fn pmf(&self) -> &[Rational] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.pmf.windows(2).all(|w| w[0] == w[1])
    }
}

/// Full description of a discrete independent-private-value auction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuctionSpec {
    pub structure: Structure,
    pub tie_rule: TieRule,
    pub n: usize,
    grid: Option<GridSpec>,
    value_points: Vec<Rational>,
    values: ValueDistribution,
    bid_points: Vec<Rational>,
}

impl AuctionSpec {
    /// A game whose values and bids both live on `grid`.
    pub fn canonical(
        structure: Structure,
        tie_rule: TieRule,
        n: usize,
        grid: GridSpec,
        values: ValueDistribution,
    ) -> Result<Self> {
        if n < 2 {
            return Err(GameError::TooFewBidders(n));
        }
        if values.len() != grid.len() {
            return Err(GameError::PmfLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let points = grid.points();
        Ok(AuctionSpec {
            structure,
            tie_rule,
            n,
            value_points: points.clone(),
            bid_points: points,
            grid: Some(grid),
            values,
        })
    }

    /// Uniform values on `{0, 1, ..., x}` with `δ = 1`.
    pub fn uniform(structure: Structure, tie_rule: TieRule, n: usize, x: usize) -> Result<Self> {
        Self::canonical(
            structure,
            tie_rule,
            n,
            GridSpec::unit(x),
            ValueDistribution::uniform(x + 1),
        )
    }

    /// A game with distinct value and bid grids.
    pub fn with_points(
        structure: Structure,
        tie_rule: TieRule,
        n: usize,
        value_points: Vec<Rational>,
        values: ValueDistribution,
        bid_points: Vec<Rational>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(GameError::TooFewBidders(n));
        }
        if value_points.is_empty() {
            return Err(GameError::EmptyGrid { what: "value" });
        }
        if bid_points.is_empty() {
            return Err(GameError::EmptyGrid { what: "bid" });
        }
        if values.len() != value_points.len() {
            return Err(GameError::PmfLength {
                expected: value_points.len(),
                got: values.len(),
            });
        }
        if !value_points.windows(2).all(|w| w[0] < w[1]) {
            return Err(GameError::NotIncreasing { what: "value" });
        }
        if !bid_points.windows(2).all(|w| w[0] < w[1]) {
            return Err(GameError::NotIncreasing { what: "bid" });
        }
        Ok(AuctionSpec {
            structure,
            tie_rule,
            n,
            grid: None,
            value_points,
            values,
            bid_points,
        })
    }

    /// Same game with the grid step replaced. Only meaningful for canonical games.
    pub fn with_delta(&self, delta: Rational) -> Result<Self> {
        let grid = self.grid.as_ref().ok_or(GameError::NonCanonical)?;
        let grid = GridSpec::new(delta, grid.x)?;
        Self::canonical(
            self.structure,
            self.tie_rule,
            self.n,
            grid,
            self.values.clone(),
        )
    }

    pub fn with_bidders(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GameError::TooFewBidders(n));
        }
        Ok(AuctionSpec { n, ..self.clone() })
    }

    /// True when bids and values share one evenly spaced grid.
    pub fn is_canonical(&self) -> bool {
        self.grid.is_some()
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    /// Largest grid index of a canonical game.
    pub fn x(&self) -> Option<usize> {
        self.grid.as_ref().map(|g| g.x)
    }

    pub fn num_values(&self) -> usize {
        self.value_points.len()
    }

    pub fn num_bids(&self) -> usize {
        self.bid_points.len()
    }

    pub fn value_points(&self) -> &[Rational] {
        &self.value_points
    }

    pub fn bid_points(&self) -> &[Rational] {
        &self.bid_points
    }

    pub fn values(&self) -> &ValueDistribution {
        &self.values
    }

    pub fn pmf(&self) -> &[Rational] {
        self.values.pmf()
    }

    /// Canonical game with uniformly distributed values.
    pub fn is_uniform_canonical(&self) -> bool {
        self.is_canonical() && self.values.is_uniform()
    }

    pub fn check_function(&self, f: &BiddingFunction) -> Result<()> {
        if f.len() != self.num_values() {
            return Err(GameError::FunctionLength {
                expected: self.num_values(),
                got: f.len(),
            });
        }
        for (value, &bid) in f.bids().iter().enumerate() {
            if bid >= self.num_bids() {
                return Err(GameError::BidOutOfRange {
                    value,
                    bid,
                    bids: self.num_bids(),
                });
            }
        }
        Ok(())
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.len() != self.n {
            return Err(GameError::ProfileLength {
                expected: self.n,
                got: profile.len(),
            });
        }
        profile
            .players()
            .iter()
            .try_for_each(|f| self.check_function(f))
    }

    pub fn describe(&self) -> String {
        let grid = match &self.grid {
            Some(g) => format!("x = {}, delta = {}", g.x, rational::format(&g.delta)),
            None => format!(
                "{} values, {} bids (distinct grids)",
                self.num_values(),
                self.num_bids()
            ),
        };
        let dist = if self.values.is_uniform() {
            "uniform values"
        } else {
            "non-uniform values"
        };
        format!(
            "{} auction, {}, n = {}, {}, {}",
            self.structure, self.tie_rule, self.n, grid, dist
        )
    }
}

/// A strategy: the bid index chosen at each value index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BiddingFunction {
    bids: Vec<usize>,
}

impl BiddingFunction {
    pub fn new(bids: Vec<usize>) -> Self {
        BiddingFunction { bids }
    }

    pub fn constant(bid: usize, values: usize) -> Self {
        BiddingFunction {
            bids: vec![bid; values],
        }
    }

    pub fn from_fn(values: usize, f: impl Fn(usize) -> usize) -> Self {
        BiddingFunction {
            bids: (0..values).map(f).collect(),
        }
    }

    pub fn bids(&self) -> &[usize] {
        &self.bids
    }

    pub fn bid(&self, value: usize) -> usize {
        self.bids[value]
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// Bids never decrease as the value rises.
    pub fn is_monotone(&self) -> bool {
        self.bids.windows(2).all(|w| w[0] <= w[1])
    }

    /// Bids rise by at most one grid step per value step.
    pub fn has_no_jumps(&self) -> bool {
        self.bids.windows(2).all(|w| w[1] <= w[0] + 1)
    }
}

impl fmt::Display for BiddingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.bids.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// One bidding function per bidder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StrategyProfile {
    players: Vec<BiddingFunction>,
}

impl StrategyProfile {
    pub fn new(players: Vec<BiddingFunction>) -> Self {
        StrategyProfile { players }
    }

    pub fn symmetric(f: BiddingFunction, n: usize) -> Self {
        StrategyProfile {
            players: vec![f; n],
        }
    }

    pub fn players(&self) -> &[BiddingFunction] {
        &self.players
    }

    pub fn player(&self, i: usize) -> &BiddingFunction {
        &self.players[i]
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.players.windows(2).all(|w| w[0] == w[1])
    }

    /// Canonical representative under relabelling of the bidders.
    pub fn sorted_players(&self) -> StrategyProfile {
        let mut players = self.players.clone();
        players.sort();
        StrategyProfile { players }
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.players.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// JSON document form of [`AuctionSpec`].
///
/// Canonical games carry `delta` and `x`; games with distinct grids carry
/// `value_points` and `bid_points` instead. Rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub structure: Structure,
    pub tie_rule: TieRule,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    /// Omitted means uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bid_points: Option<Vec<String>>,
}

impl From<&AuctionSpec> for SpecDocument {
    fn from(spec: &AuctionSpec) -> Self {
        let fmt_all = |v: &[Rational]| v.iter().map(rational::format).collect::<Vec<_>>();
        let pmf = Some(fmt_all(spec.pmf()));
        match &spec.grid {
            Some(g) => SpecDocument {
                structure: spec.structure,
                tie_rule: spec.tie_rule,
                n: spec.n,
                delta: Some(rational::format(&g.delta)),
                x: Some(g.x),
                pmf,
                value_points: None,
                bid_points: None,
            },
            None => SpecDocument {
                structure: spec.structure,
                tie_rule: spec.tie_rule,
                n: spec.n,
                delta: None,
                x: None,
                pmf,
                value_points: Some(fmt_all(&spec.value_points)),
                bid_points: Some(fmt_all(&spec.bid_points)),
            },
        }
    }
}

impl TryFrom<SpecDocument> for AuctionSpec {
    type Error = GameError;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        let parse_all = |v: &[String]| {
            v.iter()
                .map(|s| rational::parse(s))
                .collect::<Result<Vec<_>>>()
        };
        match (doc.x, doc.value_points.as_ref(), doc.bid_points.as_ref()) {
            (Some(x), None, None) => {
                let delta = match &doc.delta {
                    Some(d) => rational::parse(d)?,
                    None => Rational::one(),
                };
                let values = match &doc.pmf {
                    Some(p) => ValueDistribution::new(parse_all(p)?)?,
                    None => ValueDistribution::uniform(x + 1),
                };
                AuctionSpec::canonical(
                    doc.structure,
                    doc.tie_rule,
                    doc.n,
                    GridSpec::new(delta, x)?,
                    values,
                )
            }
            (None, Some(vp), Some(bp)) => {
                if doc.delta.is_some() {
                    return Err(GameError::Invalid(
                        "delta is only meaningful together with x".into(),
                    ));
                }
                let value_points = parse_all(vp)?;
                let values = match &doc.pmf {
                    Some(p) => ValueDistribution::new(parse_all(p)?)?,
                    None => ValueDistribution::uniform(value_points.len().max(1)),
                };
                AuctionSpec::with_points(
                    doc.structure,
                    doc.tie_rule,
                    doc.n,
                    value_points,
                    values,
                    parse_all(bp)?,
                )
            }
            _ => Err(GameError::Invalid(
                "a spec needs either `x` (shared grid) or both `value_points` and `bid_points`"
                    .into(),
            )),
        }
    }
}

impl Serialize for AuctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AuctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = SpecDocument::deserialize(d)?;
        AuctionSpec::try_from(doc).map_err(serde::de::Error::custom)
    }
}
