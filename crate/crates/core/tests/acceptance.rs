//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A few checks state expectations that exact computation contradicts. They are
//! listed in `KNOWN_FAILURES` and still print as failures. The run exits non-zero if
//! any other check fails or if a listed check starts passing.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use discrete_auction::bridge::{gaps_non_increasing, halving_steps};
use discrete_auction::dominance::{round1_weak_dominance, DEFAULT_EXACT_BUDGET};
use discrete_auction::patterns::stepped_two_thirds;
use discrete_auction::rational::{int, ratio};
use discrete_auction::symmetric::structural_violations;
use discrete_auction::tables::{compute_cell, reference_cell, Table, COLUMNS};
use discrete_auction::{
    build_discrete_analogue, construct_asymmetric_fp3, enumerate_pure_equilibria, export_bid_curve,
    is_equilibrium, no_ties_first_price_excludes_symmetric, reduce, revenue_convergence,
    solve_symmetric, tied_top_win_probability, tied_top_win_probability_by_ties,
    verify_continuum_match, AuctionSpec, BiddingFunction, Certificate, ContinuousAuction, Rational,
    Scope, StrategyProfile, Structure, TieRule,
};

use common::{brute_force, small_games};

/// Checks that fail because the expectation conflicts with an exact computation.
const KNOWN_FAILURES: &[(&str, &str)] = &[
    (
        "table 1 first-price n=2 10 points",
        "floor(v/2) is an exact equilibrium at x = 9 with fair ties",
    ),
    (
        "all-pay fair ties n=2 x=2 unique (0,0,1)",
        "(0,0,0) is also an equilibrium: the top type is indifferent between bids 0 and 1",
    ),
    (
        "all-pay no ties n=3 x=2 unique (0,0,1)",
        "no symmetric equilibrium: the top type loses 1/9 with bid 1",
    ),
    (
        "all-pay no ties n=4 x=2 unique (0,0,1)",
        "no symmetric equilibrium: the top type loses 11/27 with bid 1",
    ),
];

type Run = fn() -> Criterion;

struct Criterion {
    checks: Vec<(String, bool, String)>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push((name.into(), pass, detail.into()));
    }

    fn failures(&self) -> Vec<&(String, bool, String)> {
        self.checks.iter().filter(|c| !c.1).collect()
    }
}

fn uniform(s: Structure, t: TieRule, n: usize, x: usize) -> AuctionSpec {
    AuctionSpec::uniform(s, t, n, x).unwrap()
}

fn names(fs: &[BiddingFunction]) -> String {
    let v: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
    format!("[{}]", v.join(" "))
}

fn structure_name(s: Structure) -> &'static str {
    match s {
        Structure::FirstPrice => "first-price",
        Structure::SecondPrice => "second-price",
        Structure::AllPay => "all-pay",
    }
}

fn table_reproduction() -> Criterion {
    let mut c = Criterion::new();
    let golden = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/tables.csv"
    ))
    .expect("golden table file");
    let mut seen = 0;
    for line in golden.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let table = Table::from_number(f[0].parse().unwrap()).unwrap();
        let points: usize = f[1].parse().unwrap();
        let n: usize = f[3].parse().unwrap();
        let published = f[4] == "yes";
        let column = COLUMNS
            .iter()
            .position(|&(s, k)| structure_name(s) == f[2] && k == n)
            .expect("known column");
        assert_eq!(
            reference_cell(table, points, column),
            Some(published),
            "golden file and table disagree"
        );
        let cell = compute_cell(table, points, column, 100_000_000).unwrap();
        let name = format!(
            "table {} {} n={} {} points",
            table.number(),
            f[2],
            n,
            points
        );
        c.check(
            name,
            cell.computed == Some(published),
            format!(
                "published {published}, computed {:?} ({} equilibria)",
                cell.computed, cell.equilibria
            ),
        );
        seen += 1;
    }
    assert_eq!(seen, 18);
    c
}

fn two_bidder_first_price() -> Criterion {
    let mut c = Criterion::new();
    for x in 5..=20 {
        let spec = uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 2, x);
        let r = solve_symmetric(&spec, 16).unwrap();
        let want = vec![
            BiddingFunction::from_fn(x + 1, |v| v / 2),
            BiddingFunction::from_fn(x + 1, |v| v.div_ceil(2)),
        ];
        c.check(
            format!("first-price no ties n=2 x={x}"),
            r.equilibria == want && matches!(r.certificate, Certificate::Exhausted { .. }),
            names(&r.equilibria),
        );
    }
    c
}

fn many_bidder_first_price() -> Criterion {
    let mut c = Criterion::new();
    for n in 3..=5 {
        for x in 5..=20 {
            if !no_ties_first_price_excludes_symmetric(n, x) {
                continue;
            }
            let r = solve_symmetric(
                &uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, n, x),
                16,
            )
            .unwrap();
            c.check(
                format!("first-price no ties n={n} x={x} none"),
                r.equilibria.is_empty() && matches!(r.certificate, Certificate::Exhausted { .. }),
                names(&r.equilibria),
            );
        }
    }
    c
}

fn all_pay() -> Criterion {
    let mut c = Criterion::new();
    for t in [TieRule::FairTies, TieRule::NoWinnerOnTies] {
        for n in 2..=4 {
            for x in 10..=14 {
                let r = solve_symmetric(&uniform(Structure::AllPay, t, n, x), 16).unwrap();
                c.check(
                    format!("all-pay {t} n={n} x={x} none"),
                    r.equilibria.is_empty()
                        && matches!(r.certificate, Certificate::Exhausted { .. }),
                    names(&r.equilibria),
                );
            }
        }
    }
    let want = vec![BiddingFunction::new(vec![0, 0, 1])];
    for t in [TieRule::FairTies, TieRule::NoWinnerOnTies] {
        for n in 2..=4 {
            let r = solve_symmetric(&uniform(Structure::AllPay, t, n, 2), 16).unwrap();
            let label = match t {
                TieRule::FairTies => "fair ties",
                TieRule::NoWinnerOnTies => "no ties",
            };
            c.check(
                format!("all-pay {label} n={n} x=2 unique (0,0,1)"),
                r.equilibria == want,
                names(&r.equilibria),
            );
        }
    }
    c
}

fn fair_ties_first_price() -> Criterion {
    let mut c = Criterion::new();
    for x in [9, 11, 13] {
        let r =
            solve_symmetric(&uniform(Structure::FirstPrice, TieRule::FairTies, 2, x), 16).unwrap();
        c.check(
            format!("first-price fair n=2 x={x} floor(v/2)"),
            r.equilibria == vec![BiddingFunction::from_fn(x + 1, |v| v / 2)],
            names(&r.equilibria),
        );
    }
    for x in [10, 12] {
        let r =
            solve_symmetric(&uniform(Structure::FirstPrice, TieRule::FairTies, 2, x), 16).unwrap();
        c.check(
            format!("first-price fair n=2 x={x} none"),
            r.equilibria.is_empty() && !r.is_inconclusive(),
            names(&r.equilibria),
        );
    }
    let r = solve_symmetric(
        &uniform(Structure::FirstPrice, TieRule::FairTies, 3, 12),
        16,
    )
    .unwrap();
    c.check(
        "first-price fair n=3 x=12 none",
        r.equilibria.is_empty() && !r.is_inconclusive(),
        names(&r.equilibria),
    );
    for x in [13, 14] {
        let r =
            solve_symmetric(&uniform(Structure::FirstPrice, TieRule::FairTies, 3, x), 16).unwrap();
        c.check(
            format!("first-price fair n=3 x={x} stepped"),
            r.equilibria == vec![stepped_two_thirds(x)],
            names(&r.equilibria),
        );
    }
    c
}

fn asymmetric_three_bidders() -> Criterion {
    let mut c = Criterion::new();
    match construct_asymmetric_fp3(13) {
        Ok(profile) => {
            let spec = uniform(Structure::FirstPrice, TieRule::NoWinnerOnTies, 3, 13);
            let verdict = is_equilibrium(&spec, &profile).unwrap();
            c.check(
                "x=13 profile is an equilibrium",
                verdict.is_equilibrium(),
                profile.to_string(),
            );
            c.check(
                "x=13 profile is asymmetric",
                !profile.is_symmetric(),
                profile.to_string(),
            );
            let rows = export_bid_curve(&profile);
            let within = rows.iter().all(|r| {
                r.bids.iter().all(|&b| {
                    let gap = Rational::from_integer((b as i64).into()) - &r.reference;
                    gap <= int(2) && gap >= int(-2)
                })
            });
            c.check(
                "x=13 bids within 2 of 2v/3",
                within && rows.len() == 14,
                format!("{} rows", rows.len()),
            );
        }
        Err(e) => c.check("x=13 profile builds", false, e.to_string()),
    }
    c
}

fn continuum_match() -> Criterion {
    let mut c = Criterion::new();
    for n in 2..=4 {
        for grid_count in 4..=12 {
            let delta = int(n as i64);
            let upper = &delta * int(grid_count as i64);
            for (label, cont) in [
                (
                    "first-price",
                    ContinuousAuction::uniform_first_price(n, upper.clone()).unwrap(),
                ),
                (
                    "all-pay",
                    ContinuousAuction::uniform_all_pay(n, upper.clone()).unwrap(),
                ),
            ] {
                let a = build_discrete_analogue(&cont, &delta, grid_count).unwrap();
                let check = verify_continuum_match(&a.spec, &a.candidate).unwrap();
                c.check(
                    format!("{label} n={n} steps={grid_count}"),
                    check.verdict.is_equilibrium() && check.tight,
                    format!(
                        "equilibrium {}, tight {}",
                        check.verdict.is_equilibrium(),
                        check.tight
                    ),
                );
            }
        }
    }
    c
}

fn properties() -> Criterion {
    let mut c = Criterion::new();

    // Grid step does not change which profiles are equilibria.
    let mut invariant = true;
    for s in [
        Structure::FirstPrice,
        Structure::SecondPrice,
        Structure::AllPay,
    ] {
        for t in [TieRule::FairTies, TieRule::NoWinnerOnTies] {
            let spec = uniform(s, t, 3, 4);
            let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
            let base =
                enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, 10_000_000)
                    .unwrap();
            for d in [int(1), ratio(1, 100), ratio(7, 3)] {
                let scaled = spec.with_delta(d).unwrap();
                let r = reduce(&scaled, DEFAULT_EXACT_BUDGET).unwrap();
                let e =
                    enumerate_pure_equilibria(&scaled, &r, Scope::MonotoneUndominated, 10_000_000)
                        .unwrap();
                invariant &= e.equilibria == base.equilibria;
                let probe = StrategyProfile::symmetric(BiddingFunction::from_fn(5, |v| v / 2), 3);
                invariant &= is_equilibrium(&scaled, &probe).unwrap().is_equilibrium()
                    == is_equilibrium(&spec, &probe).unwrap().is_equilibrium();
            }
        }
    }
    c.check(
        "equilibria unchanged by grid step",
        invariant,
        "steps 1, 1/100, 7/3",
    );

    // Shape of every symmetric equilibrium found, including the fair-ties jump bound.
    let mut shape_problems = Vec::new();
    for s in [Structure::FirstPrice, Structure::AllPay] {
        for t in [TieRule::FairTies, TieRule::NoWinnerOnTies] {
            for n in 2..=3 {
                for x in 1..=14 {
                    let spec = uniform(s, t, n, x);
                    let r = solve_symmetric(&spec, 16).unwrap();
                    shape_problems.extend(structural_violations(&spec, &r.equilibria));
                    shape_problems.extend(r.invariant_violations);
                }
            }
        }
    }
    c.check(
        "symmetric equilibria monotone, no jumps without ties, bounded jumps with ties",
        shape_problems.is_empty(),
        shape_problems.join("; "),
    );

    // Closed-form tie share against the subset sum, and its fall in n.
    let mut tie_ok = true;
    for x in 1..=30i64 {
        let p = ratio(1, x + 1);
        let mut prev: Option<Rational> = None;
        for n in 1..=12 {
            let closed = tied_top_win_probability(n, &p).unwrap();
            tie_ok &= closed == tied_top_win_probability_by_ties(n, &p).unwrap();
            if let Some(q) = &prev {
                tie_ok &= &closed < q;
            }
            prev = Some(closed);
        }
    }
    c.check(
        "tie share closed form equals sum and falls with n",
        tie_ok,
        "n <= 12, p = 1/(x+1), x <= 30",
    );

    // Reduction, monotone restriction and pruning lose nothing on small games.
    let mut mismatches = Vec::new();
    for spec in small_games() {
        let undominated = round1_weak_dominance(&spec).unwrap();
        let expected = brute_force(&spec, &undominated);
        let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET).unwrap();
        for (label, r) in [
            (
                "monotone reduced",
                enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, 100_000_000),
            ),
            (
                "exhaustive",
                enumerate_pure_equilibria(&spec, &undominated, Scope::FullyExhaustive, 100_000_000),
            ),
        ] {
            let r = r.unwrap();
            if !r.is_complete() || r.equilibria != expected {
                mismatches.push(format!("{label}: {}", spec.describe()));
            }
        }
    }
    c.check(
        "search equals brute force for two bidders, up to 4 points",
        mismatches.is_empty(),
        mismatches.join("; "),
    );

    // Revenue gap to the continuous benchmark along halving steps.
    let mut gaps_ok = true;
    for top in [int(8), int(10), int(12)] {
        let rows = revenue_convergence(&top, &halving_steps(&top, 6)).unwrap();
        gaps_ok &= gaps_non_increasing(&rows);
    }
    c.check(
        "revenue gap never grows as the step halves",
        gaps_ok,
        "tops 8, 10, 12; six halvings",
    );
    c
}

fn main() {
    let criteria: [(&str, Run); 8] = [
        ("table reproduction", table_reproduction),
        (
            "two-bidder first price without ties",
            two_bidder_first_price,
        ),
        (
            "first price without ties, three to five bidders",
            many_bidder_first_price,
        ),
        ("all-pay", all_pay),
        ("first price with fair ties", fair_ties_first_price),
        (
            "three-bidder asymmetric first-price equilibrium",
            asymmetric_three_bidders,
        ),
        ("matched discretisation of the continuum", continuum_match),
        ("property suites", properties),
    ];
    let known: BTreeSet<&str> = KNOWN_FAILURES.iter().map(|(k, _)| *k).collect();
    let mut unexpected = Vec::new();
    let mut failing_known = BTreeSet::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let failures = c.failures();
        let status = if failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {status}  {title}  ({} of {} checks passed, {:.1}s)",
            i + 1,
            c.checks.len() - failures.len(),
            c.checks.len(),
            start.elapsed().as_secs_f64()
        );
        for (name, _, detail) in failures {
            match KNOWN_FAILURES.iter().find(|(k, _)| k == name) {
                Some((_, why)) => {
                    println!("    failed: {name}: {detail}  [known: {why}]");
                    failing_known.insert(name.as_str().to_owned());
                }
                None => {
                    println!("    failed: {name}: {detail}");
                    unexpected.push(name.clone());
                }
            }
        }
    }
    let stale: Vec<&&str> = known
        .iter()
        .filter(|k| !failing_known.contains(**k))
        .collect();
    for k in &stale {
        println!("known failure now passes, update the list: {k}");
    }
    if !unexpected.is_empty() || !stale.is_empty() {
        std::process::exit(1);
    }
}
