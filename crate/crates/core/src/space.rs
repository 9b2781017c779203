//! Flattened product state spaces.
//!
//! Three layouts occur in practice: a single spatial grid, a finite regime
//! set times a grid, and a renewal clock grid times a spatial grid. States are
//! flattened row-major, so the spatial coordinate always varies fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Regimes(usize),
    Grid(Grid1D),
}

impl Factor {
    fn len(&self) -> usize {
        match self {
            Factor::Regimes(n) => *n,
            Factor::Grid(g) => g.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Line,
    Regimes,
    ClockSpace,
}

/// Coordinates of one flattened state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub regime: Option<usize>,
    pub clock: Option<f64>,
    pub x: f64,
    /// Index along the spatial grid.
    pub node: usize,
    /// Index of the line (regime or clock node) the state sits on; 0 for a plain grid.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    factors: Vec<Factor>,
    layout: Layout,
}

impl StateSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let layout = match factors.as_slice() {
            [Factor::Grid(_)] => Layout::Line,
            [Factor::Regimes(n), Factor::Grid(_)] => {
                if *n == 0 {
                    return Err(Error::InvalidSpace("regime set is empty".into()));
                }
                Layout::Regimes
            }
            [Factor::Grid(_), Factor::Grid(_)] => Layout::ClockSpace,
            _ => {
                return Err(Error::InvalidSpace(
                    "supported layouts are [grid], [regimes, grid] and [clock grid, space grid]"
                        .into(),
                ))
            }
        };
        Ok(Self { factors, layout })
    }

    pub fn line(grid: Grid1D) -> Self {
        Self {
            factors: vec![Factor::Grid(grid)],
            layout: Layout::Line,
        }
    }

    pub fn regimes(n: usize, grid: Grid1D) -> Result<Self> {
        Self::new(vec![Factor::Regimes(n), Factor::Grid(grid)])
    }

    pub fn clock_space(clock: Grid1D, space: Grid1D) -> Self {
        Self {
            factors: vec![Factor::Grid(clock), Factor::Grid(space)],
            layout: Layout::ClockSpace,
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(Factor::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The spatial grid (always the last factor).
    pub fn grid(&self) -> &Grid1D {
        match self.factors.last() {
            Some(Factor::Grid(g)) => g,
            _ => unreachable!("layout guarantees a trailing grid"),
        }
    }

    pub fn clock(&self) -> Option<&Grid1D> {
        match (self.layout, &self.factors[0]) {
            (Layout::ClockSpace, Factor::Grid(g)) => Some(g),
            _ => None,
        }
    }

    pub fn regime_count(&self) -> Option<usize> {
        match &self.factors[0] {
            Factor::Regimes(n) => Some(*n),
            _ => None,
        }
    }

    /// Number of lines: regimes, clock nodes, or 1.
    pub fn line_count(&self) -> usize {
        match self.layout {
            Layout::Line => 1,
            _ => self.factors[0].len(),
        }
    }

    pub fn index(&self, line: usize, node: usize) -> usize {
        line * self.grid().len() + node
    }

    /// Flat indices of one line, ordered along the spatial grid.
    pub fn line_indices(&self, line: usize) -> std::ops::Range<usize> {
        let n = self.grid().len();
        line * n..(line + 1) * n
    }

    pub fn state(&self, idx: usize) -> State {
        let n = self.grid().len();
        let (line, node) = (idx / n, idx % n);
        let x = self.grid().nodes()[node];
        match self.layout {
            Layout::Line => State {
                regime: None,
                clock: None,
                x,
                node,
                line: 0,
            },
            Layout::Regimes => State {
                regime: Some(line),
                clock: None,
                x,
                node,
                line,
            },
            Layout::ClockSpace => State {
                regime: None,
                clock: Some(self.clock().expect("clock layout").nodes()[line]),
                x,
                node,
                line,
            },
        }
    }

    /// Elimination order that keeps LU fill small for this layout.
    pub(crate) fn elimination_order(&self) -> Option<Vec<usize>> {
        let n = self.grid().len();
        let lines = self.line_count();
        match self.layout {
            Layout::Line => None,
            // Coupling links equal nodes of different regimes; interleave them.
            Layout::Regimes => Some(
                (0..n)
                    .flat_map(|node| (0..lines).map(move |line| line * n + node))
                    .collect(),
            ),
            // Renewals feed the clock-zero line; eliminate it last.
            Layout::ClockSpace => Some(
                (0..lines)
                    .rev()
                    .flat_map(|line| (0..n).map(move |node| line * n + node))
                    .collect(),
            ),
        }
    }

    pub fn csv_header(&self) -> &'static str {
        match self.layout {
            Layout::Line => "x,value",
            Layout::Regimes => "regime,x,value",
            Layout::ClockSpace => "s,x,value",
        }
    }
}
