//! Real functions sampled on a [`StateSpace`].

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_csv};
use crate::space::{Layout, State, StateSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    space: Arc<StateSpace>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(space: Arc<StateSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { space, values })
    }

    pub fn constant(space: Arc<StateSpace>, c: f64) -> Self {
        let values = vec![c; space.len()];
        Self { space, values }
    }

    pub fn zeros(space: Arc<StateSpace>) -> Self {
        Self::constant(space, 0.0)
    }

    pub fn from_state_fn(space: Arc<StateSpace>, f: impl Fn(&State) -> f64) -> Result<Self> {
        let values = (0..space.len()).map(|i| f(&space.state(i))).collect();
        Self::new(space, values)
    }

    /// Samples `f(x)` on every state, ignoring regime and clock.
    pub fn from_x_fn(space: Arc<StateSpace>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_state_fn(space, |s| f(s.x))
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    pub fn same_space(&self, other: &SampledFunction) -> bool {
        same_space(&self.space, &other.space)
    }

    /// CSV with the layout's header (`x,value`, `regime,x,value` or `s,x,value`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.len())
            .map(|i| {
                let st = self.space.state(i);
                let mut row = Vec::with_capacity(3);
                match self.space.layout() {
                    Layout::Line => {}
                    Layout::Regimes => row.push(st.line.to_string()),
                    Layout::ClockSpace => row.push(fmt_f64(st.clock.unwrap_or(0.0))),
                }
                row.push(fmt_f64(st.x));
                row.push(fmt_f64(self.values[i]));
                row
            })
            .collect();
        write_csv(out, self.space.csv_header(), &rows)
    }
}

pub(crate) fn same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub fn sup_norm(u: &SampledFunction) -> f64 {
    u.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sup_norm_diff(u: &SampledFunction, v: &SampledFunction) -> Result<f64> {
    if !u.same_space(v) {
        return Err(Error::SpaceMismatch(
            "sup_norm_diff needs functions on one state space".into(),
        ));
    }
    Ok(max_abs_diff(&u.values, &v.values))
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
