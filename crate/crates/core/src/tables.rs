//! The existence grid: pure-equilibrium existence for first-price and all-pay
//! auctions with two or three bidders and six to ten grid points, under each tie
//! rule, together with the published reference answers.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dominance::{reduce, DEFAULT_EXACT_BUDGET};
use crate::enumerate::{enumerate_pure_equilibria, Scope, SearchStatus};
use crate::error::Result;
use crate::game::{AuctionSpec, Structure, TieRule};

/// First grid size in the grid, counted in points (`x + 1`).
pub const FIRST_ROW: usize = 6;
pub const LAST_ROW: usize = 10;

/// Column order of both grids.
pub const COLUMNS: [(Structure, usize); 4] = [
    (Structure::FirstPrice, 2),
    (Structure::FirstPrice, 3),
    (Structure::AllPay, 2),
    (Structure::AllPay, 3),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    WithTies,
    WithoutTies,
}

impl Table {
    pub const ALL: [Table; 2] = [Table::WithTies, Table::WithoutTies];

    pub fn number(self) -> usize {
        match self {
            Table::WithTies => 1,
            Table::WithoutTies => 2,
        }
    }

    pub fn from_number(k: usize) -> Option<Table> {
        match k {
            1 => Some(Table::WithTies),
            2 => Some(Table::WithoutTies),
            _ => None,
        }
    }

    pub fn tie_rule(self) -> TieRule {
        match self {
            Table::WithTies => TieRule::FairTies,
            Table::WithoutTies => TieRule::NoWinnerOnTies,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Table::WithTies => "with ties",
            Table::WithoutTies => "without ties",
        }
    }
}

// Rows are grid sizes 6..=10, columns follow COLUMNS. None marks an untested cell.
const WITH_TIES: [[Option<bool>; 4]; 5] = [
    [None, Some(true), Some(true), Some(false)],
    [None, Some(false), Some(false), Some(false)],
    [None, Some(true), Some(false), None],
    [None, None, Some(true), None],
    [Some(false), None, None, None],
];

const WITHOUT_TIES: [[Option<bool>; 4]; 5] = [
    [None, Some(true), Some(true), Some(true)],
    [None, Some(true), Some(false), Some(false)],
    [None, None, Some(false), None],
    [None, None, Some(true), None],
    [None, None, None, None],
];

/// The published answer for a cell, if there is one.
pub fn reference_cell(table: Table, points: usize, column: usize) -> Option<bool> {
    if !(FIRST_ROW..=LAST_ROW).contains(&points) || column >= COLUMNS.len() {
        return None;
    }
    let grid = match table {
        Table::WithTies => &WITH_TIES,
        Table::WithoutTies => &WITHOUT_TIES,
    };
    grid[points - FIRST_ROW][column]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableCell {
    pub table: Table,
    /// Number of grid points, `x + 1`.
    pub points: usize,
    pub column: usize,
    pub structure: Structure,
    pub n: usize,
    pub expected: Option<bool>,
    /// None when the search ran out of budget.
    pub computed: Option<bool>,
    pub equilibria: usize,
    pub nodes: u64,
    pub wall_ms: u64,
}

impl TableCell {
    pub fn is_reference(&self) -> bool {
        self.expected.is_some()
    }

    /// Reference cell whose computed answer equals the published one.
    pub fn matches(&self) -> bool {
        self.expected.is_some() && self.expected == self.computed
    }

    pub fn label(&self) -> String {
        format!(
            "{} n={} {} points ({})",
            self.structure,
            self.n,
            self.points,
            self.table.title()
        )
    }
}

/// Cells of `tables` to run: every reference cell, plus the untested ones when
/// `include_untested` is set.
pub fn table_cells(tables: &[Table], include_untested: bool) -> Vec<(Table, usize, usize)> {
    let mut out = Vec::new();
    for &t in tables {
        for points in FIRST_ROW..=LAST_ROW {
            for column in 0..COLUMNS.len() {
                if include_untested || reference_cell(t, points, column).is_some() {
                    out.push((t, points, column));
                }
            }
        }
    }
    out
}

pub fn compute_cell(table: Table, points: usize, column: usize, budget: u64) -> Result<TableCell> {
    let (structure, n) = COLUMNS[column];
    let start = Instant::now();
    let spec = AuctionSpec::uniform(structure, table.tie_rule(), n, points - 1)?;
    let reduced = reduce(&spec, DEFAULT_EXACT_BUDGET)?;
    let result = enumerate_pure_equilibria(&spec, &reduced, Scope::MonotoneUndominated, budget)?;
    let computed = match result.status {
        SearchStatus::Complete => Some(result.exists),
        // An equilibrium found before the budget ran out still settles existence.
        SearchStatus::BudgetExhausted if result.exists => Some(true),
        SearchStatus::BudgetExhausted => None,
    };
    Ok(TableCell {
        table,
        points,
        column,
        structure,
        n,
        expected: reference_cell(table, points, column),
        computed,
        equilibria: result.equilibria.len(),
        nodes: result.stats.nodes,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs the requested cells in parallel, sorted by table, row and column.
pub fn reproduce_tables(
    tables: &[Table],
    include_untested: bool,
    budget: u64,
) -> Result<Vec<TableCell>> {
    let mut cells: Vec<TableCell> = table_cells(tables, include_untested)
        .into_par_iter()
        .map(|(t, p, c)| compute_cell(t, p, c, budget))
        .collect::<Result<_>>()?;
    cells.sort_by_key(|c| (c.table, c.points, c.column));
    Ok(cells)
}

fn cell_text(cell: Option<&TableCell>) -> String {
    let Some(cell) = cell else {
        return "-".into();
    };
    let word = |b: bool| if b { "Yes" } else { "No" };
    match (cell.expected, cell.computed) {
        (Some(e), Some(c)) if e == c => word(c).into(),
        (Some(e), Some(c)) => format!("{} (published: {})", word(c), word(e)),
        (Some(e), None) => format!("? (published: {})", word(e)),
        // Untested cells stay blank in the grid and are listed separately.
        (None, _) => "-".into(),
    }
}

fn header() -> [String; 5] {
    let mut h = [
        String::from("Valuations"),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ];
    for (i, (s, n)) in COLUMNS.iter().enumerate() {
        let name = match s {
            Structure::FirstPrice => "FPSB",
            Structure::AllPay => "All-pay",
            Structure::SecondPrice => "SPSB",
        };
        h[i + 1] = format!("{name}, n = {n}");
    }
    h
}

fn find(cells: &[TableCell], t: Table, points: usize, column: usize) -> Option<&TableCell> {
    cells
        .iter()
        .find(|c| c.table == t && c.points == points && c.column == column)
}

/// Markdown grid per table, followed by a separate list of untested cells that were computed.
pub fn render_markdown(cells: &[TableCell]) -> String {
    let mut out = String::new();
    for t in Table::ALL {
        if !cells.iter().any(|c| c.table == t) {
            continue;
        }
        let _ = writeln!(
            out,
            "Table {}: existence of pure-strategy equilibria {}\n",
            t.number(),
            t.title()
        );
        let _ = writeln!(out, "| {} |", header().join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(5));
        for points in FIRST_ROW..=LAST_ROW {
            let row: Vec<String> = (0..COLUMNS.len())
                .map(|c| cell_text(find(cells, t, points, c)))
                .collect();
            let _ = writeln!(out, "| {} | {} |", points, row.join(" | "));
        }
        out.push('\n');
    }
    let extra: Vec<&TableCell> = cells.iter().filter(|c| !c.is_reference()).collect();
    if !extra.is_empty() {
        let _ = writeln!(out, "Cells without a published answer\n");
        for c in extra {
            let answer = match c.computed {
                Some(true) => format!("Yes ({} equilibria)", c.equilibria),
                Some(false) => "No".into(),
                None => "inconclusive (budget exhausted)".into(),
            };
            let _ = writeln!(out, "- {}: {}", c.label(), answer);
        }
    }
    out
}

fn bool_text(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "",
    }
}

/// One line per cell.
pub fn render_csv(cells: &[TableCell]) -> String {
    let mut out =
        String::from("table,valuations,structure,n,published,computed,equilibria,nodes,wall_ms\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.table.number(),
            c.points,
            c.structure,
            c.n,
            bool_text(c.expected),
            match c.computed {
                Some(_) => bool_text(c.computed),
                None => "inconclusive",
            },
            c.equilibria,
            c.nodes,
            c.wall_ms
        );
    }
    out
}
