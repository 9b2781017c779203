//! One-dimensional grids with boundary metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the discrete operator closes at a grid end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Zero-flux closure.
    Reflecting,
    /// Zero generator row: the chain stays put once it gets there.
    Absorbing,
    /// Artificial window edge. Closed like `Reflecting`.
    Truncation,
}

/// Strictly increasing nodes on an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    nodes: Vec<f64>,
    left: BoundaryKind,
    right: BoundaryKind,
    uniform: bool,
}

const UNIFORM_RATIO: f64 = 1.0 + 1e-12;

impl Grid1D {
    pub fn new(nodes: Vec<f64>, left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::TooFewNodes(nodes.len()));
        }
        let mut min_gap = f64::INFINITY;
        let mut max_gap = 0.0_f64;
        for (i, pair) in nodes.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            if !pair[0].is_finite() || !pair[1].is_finite() || gap <= 0.0 {
                return Err(Error::NonIncreasingNodes(i + 1));
            }
            min_gap = min_gap.min(gap);
            max_gap = max_gap.max(gap);
        }
        let uniform = max_gap / min_gap < UNIFORM_RATIO;
        Ok(Self {
            nodes,
            left,
            right,
            uniform,
        })
    }

    /// Uniform grid with a reflecting left end and a truncation right end.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        make_uniform_grid(lo, hi, n)
    }

    pub fn with_boundaries(mut self, left: BoundaryKind, right: BoundaryKind) -> Self {
        self.left = left;
        self.right = right;
        self
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn left_boundary(&self) -> BoundaryKind {
        self.left
    }

    pub fn right_boundary(&self) -> BoundaryKind {
        self.right
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Mean spacing; equals the spacing everywhere on a uniform grid.
    pub fn step(&self) -> f64 {
        (self.hi() - self.lo()) / (self.len() - 1) as f64
    }

    pub fn require_uniform(&self) -> Result<f64> {
        if self.uniform {
            Ok(self.step())
        } else {
            Err(Error::NonUniformGrid)
        }
    }

    /// Index of the node closest to `x`, clamped to the window.
    pub fn nearest_index(&self, x: f64) -> usize {
        if x <= self.lo() {
            return 0;
        }
        if x >= self.hi() {
            return self.len() - 1;
        }
        let upper = self.nodes.partition_point(|&node| node < x);
        let lower = upper - 1;
        if x - self.nodes[lower] <= self.nodes[upper] - x {
            lower
        } else {
            upper
        }
    }

    /// Index of a node within `tol` of `x`, if any.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        ((self.nodes[i] - x).abs() <= tol).then_some(i)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }
}

/// `n` equally spaced nodes on `[lo, hi]`, endpoints included.
pub fn make_uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Grid1D> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidRange { lo, hi });
    }
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    nodes[n - 1] = hi;
    let mut grid = Grid1D::new(nodes, BoundaryKind::Reflecting, BoundaryKind::Truncation)?;
    // Rounding in lo + i*h can leave spacings a few ulps apart.
    grid.uniform = true;
    Ok(grid)
}
