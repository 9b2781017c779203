//! Sparse rate matrices approximating Feller generators.
//!
//! Every builder goes through [`GeneratorBuilder`], which takes the
//! off-diagonal jump rates and sets each diagonal to minus the row's exit
//! rate, so conservative rows sum to zero up to rounding.

mod brownian;
mod levy;
mod piecewise;
mod regime;
mod semi_markov;

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::same_space;
use crate::linalg::{accurate_sum, CsrMatrix};
use crate::space::StateSpace;

pub use brownian::{bm_generator, skew_bm_generator, BmBoundary, JumpBoundarySpec};
pub use levy::{compound_poisson_generator, levy_cpd_generator, perturb_generator};
pub use piecewise::{piecewise_diffusion_generator, Coefficient, PiecewiseDiffusionSpec};
pub use regime::{regime_switching_generator, RegimeCouplingSpec};
pub use semi_markov::{clock_horizon, semi_markov_lift_generator, Hazard, SemiMarkovSpec};

/// Slack allowed on row sums and off-diagonal signs.
pub const GENERATOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    space: Arc<StateSpace>,
    entries: CsrMatrix,
    conservative: bool,
}

impl GeneratorMatrix {
    /// Wraps a matrix after checking the positive maximum principle.
    pub fn new(space: Arc<StateSpace>, entries: CsrMatrix) -> Result<Self> {
        let conservative = (0..entries.dim()).all(|i| row_sum(&entries, i).abs() <= GENERATOR_TOL);
        let g = Self {
            space,
            entries,
            conservative,
        };
        let report = validate_generator(&g);
        if !report.is_valid() {
            return Err(Error::InvalidGenerator(report.summary()));
        }
        Ok(g)
    }

    /// No checks at all; for exercising the validator.
    pub fn from_csr_unchecked(space: Arc<StateSpace>, entries: CsrMatrix, conservative: bool) -> Self {
        Self {
            space,
            entries,
            conservative,
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        row_sum(&self.entries, i)
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.entries.row(i).1.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.entries.mul_vec(u)
    }

    /// Debug dump: one JSON header line, then `row,col,rate` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        let header = TripletHeader {
            dim: self.dim(),
            conservative: self.conservative,
            space: (*self.space).clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        writeln!(out, "row,col,rate")?;
        for (i, j, v) in self.entries.triplets() {
            writeln!(out, "{i},{j},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads [`write_triplets`](Self::write_triplets) output and re-validates it.
    pub fn read_triplets<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty triplet file".into()))??;
        let header: TripletHeader = serde_json::from_str(&header_line)?;
        match lines.next() {
            Some(Ok(l)) if l.trim() == "row,col,rate" => {}
            _ => return Err(Error::Parse("missing `row,col,rate` header".into())),
        }
        let mut triplets = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("line {}: `{line}`", k + 3));
            if parts.len() != 3 {
                return Err(bad());
            }
            let i = parts[0].trim().parse().map_err(|_| bad())?;
            let j = parts[1].trim().parse().map_err(|_| bad())?;
            let v = parts[2].trim().parse().map_err(|_| bad())?;
            triplets.push((i, j, v));
        }
        let entries = CsrMatrix::from_triplets(header.dim, &triplets)?;
        let g = Self::new(Arc::new(header.space), entries)?;
        if g.conservative != header.conservative {
            return Err(Error::Parse("conservativity flag disagrees with the rates".into()));
        }
        Ok(g)
    }
}

#[derive(Serialize, Deserialize)]
struct TripletHeader {
    dim: usize,
    conservative: bool,
    space: StateSpace,
}

fn row_sum(m: &CsrMatrix, i: usize) -> f64 {
    accurate_sum(m.row(i).1.iter().copied())
}

/// Collects jump rates row by row and fills in the diagonals.
pub struct GeneratorBuilder {
    space: Arc<StateSpace>,
    rows: Vec<Vec<(usize, f64)>>,
    killing: Vec<f64>,
}

impl GeneratorBuilder {
    pub fn new(space: Arc<StateSpace>) -> Self {
        let n = space.len();
        Self {
            space,
            rows: vec![Vec::new(); n],
            killing: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    /// Adds rate `r` for jumps `i -> j`. Self-jumps are dropped.
    pub fn add(&mut self, i: usize, j: usize, r: f64) -> Result<()> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::NegativeRate(r));
        }
        if i != j && r > 0.0 {
            self.rows[i].push((j, r));
        }
        Ok(())
    }

    /// Extra exit rate with no destination.
    pub fn kill(&mut self, i: usize, r: f64) -> Result<()> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::NegativeRate(r));
        }
        self.killing[i] += r;
        Ok(())
    }

    pub(crate) fn clear_row(&mut self, i: usize) {
        self.rows[i].clear();
        self.killing[i] = 0.0;
    }

    pub fn build(self) -> Result<GeneratorMatrix> {
        let rows = self
            .rows
            .into_iter()
            .zip(self.killing)
            .enumerate()
            .map(|(i, (mut row, kill))| {
                row.sort_by_key(|&(j, _)| j);
                let exit = accurate_sum(row.iter().map(|&(_, r)| r).chain([kill]));
                if exit > 0.0 {
                    row.push((i, -exit));
                }
                row
            })
            .collect();
        GeneratorMatrix::new(self.space, CsrMatrix::from_rows(rows))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DimensionMismatch { space: usize, matrix: usize },
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    PositiveRowSum { row: usize, sum: f64 },
    ConservativityMismatch { claimed: bool, max_abs_row_sum: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Note {
    AbsorbingRow { row: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notes: Vec<Note>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.violations.is_empty() {
            return format!("valid, {} absorbing row(s)", self.notes.len());
        }
        let shown: Vec<String> = self.violations.iter().take(5).map(|v| format!("{v:?}")).collect();
        let more = self.violations.len().saturating_sub(5);
        if more > 0 {
            format!("{} (+{more} more)", shown.join("; "))
        } else {
            shown.join("; ")
        }
    }
}

/// Checks the discrete positive maximum principle.
pub fn validate_generator(g: &GeneratorMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = &g.entries;
    if m.dim() != g.space.len() {
        report.violations.push(Violation::DimensionMismatch {
            space: g.space.len(),
            matrix: m.dim(),
        });
        return report;
    }
    let mut max_abs_sum = 0.0_f64;
    for i in 0..m.dim() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i && v < -GENERATOR_TOL {
                report.violations.push(Violation::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        let sum = accurate_sum(vals.iter().copied());
        if sum > GENERATOR_TOL {
            report.violations.push(Violation::PositiveRowSum { row: i, sum });
        }
        max_abs_sum = max_abs_sum.max(sum.abs());
        if vals.iter().all(|&v| v == 0.0) {
            report.notes.push(Note::AbsorbingRow { row: i });
        }
    }
    if g.conservative != (max_abs_sum <= GENERATOR_TOL) {
        report.violations.push(Violation::ConservativityMismatch {
            claimed: g.conservative,
            max_abs_row_sum: max_abs_sum,
        });
    }
    report
}

pub(crate) fn require_same_space(a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<()> {
    if same_space(&a.space, &b.space) && a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch("generators live on different state spaces".into()))
    }
}
