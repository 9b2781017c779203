//! Finite discrete probability measures used for jump sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms and {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(a) = atoms.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {a}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn point_mass(atom: f64) -> Result<Self> {
        Self::new(vec![atom], vec![1.0])
    }

    /// Exponential(`gamma`) law binned onto the lattice `h, 2h, 3h, …`.
    ///
    /// Atom `k h` carries the mass of `((k - 1/2) h, (k + 1/2) h]`, the first
    /// atom also takes `(0, h/2]`; the tail beyond `tail` mass is dropped and
    /// the weights renormalized.
    pub fn discretized_exponential(gamma: f64, h: f64, tail: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(h > 0.0) || !(tail > 0.0 && tail < 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "exponential binning needs gamma > 0, h > 0, tail in (0,1); got {gamma}, {h}, {tail}"
            )));
        }
        let survival = |x: f64| (-gamma * x).exp();
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        let mut k = 1usize;
        loop {
            let lo = if k == 1 { 0.0 } else { (k as f64 - 0.5) * h };
            let hi = (k as f64 + 0.5) * h;
            atoms.push(k as f64 * h);
            weights.push(survival(lo) - survival(hi));
            if survival(hi) < tail {
                break;
            }
            k += 1;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(atoms, weights)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn require_positive_atoms(&self) -> Result<()> {
        match self.atoms.iter().find(|a| !(**a > 0.0)) {
            Some(a) => Err(Error::InvalidMeasure(format!(
                "atom {a} must be positive"
            ))),
            None => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(a, w)| a * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_weights() {
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).is_ok());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::point_mass(0.0)
            .unwrap()
            .require_positive_atoms()
            .is_err());
    }

    #[test]
    fn binned_exponential_has_the_right_mean() {
        let m = DiscreteMeasure::discretized_exponential(1.0, 0.01, 1e-14).unwrap();
        let total: f64 = m.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Binning error is O(h).
        assert!((m.mean() - 1.0).abs() < 0.01);
        assert!(m.atoms().iter().all(|&a| a > 0.0));
    }
}
