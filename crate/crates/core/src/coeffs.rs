//! Surrogates represented by coefficients on the truncated tensor basis.
//!
//! Because the basis is orthonormal, the variance of a surrogate is the sum
//! of its squared non-constant coefficients, and the variance carried by an
//! ANOVA group `u` is the sum of squares over the basis functions whose
//! support is exactly `u`.

use std::sync::Arc;

use crate::basis::{Subset, TensorBasis};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CoeffVector {
    basis: Arc<TensorBasis>,
    a: Vec<f64>,
}

impl CoeffVector {
    pub fn new(basis: Arc<TensorBasis>, a: Vec<f64>) -> Result<Self> {
        if a.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: a.len(),
            });
        }
        Ok(Self { basis, a })
    }

    pub fn zeros(basis: Arc<TensorBasis>) -> Self {
        let a = vec![0.0; basis.len()];
        Self { basis, a }
    }

    pub fn basis(&self) -> &Arc<TensorBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    /// Sets the coefficient of the basis function with the given degrees.
    pub fn set(&mut self, degrees: &[u32], value: f64) -> Result<()> {
        let pos = self
            .basis
            .indices()
            .iter()
            .position(|k| k.degrees() == degrees)
            .ok_or_else(|| Error::InvalidConfig(format!("no basis function {degrees:?}")))?;
        self.a[pos] = value;
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let values = self.basis.eval_all(x)?;
        Ok(values.iter().zip(&self.a).map(|(v, a)| v * a).sum())
    }

    /// Sum of squares of all non-constant coefficients.
    pub fn variance(&self) -> f64 {
        self.a
            .iter()
            .enumerate()
            .filter(|&(pos, _)| !self.basis.support(pos).is_empty())
            .map(|(_, a)| a * a)
            .sum()
    }

    /// Energy of the group with support exactly `u`.
    fn energy(&self, u: Subset) -> f64 {
        self.basis.group(u).iter().map(|&p| self.a[p] * self.a[p]).sum()
    }

    /// Closed Sobol index of `u`, normalized by the surrogate's variance.
    pub fn sobol_index(&self, u: Subset) -> Result<f64> {
        if u.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        if u.max_member() > self.basis.dim() {
            return Err(Error::InvalidSubset(format!(
                "{u:?} exceeds dimension {}",
                self.basis.dim()
            )));
        }
        let var = self.variance();
        if var <= 0.0 {
            return Err(Error::Degenerate("surrogate has zero variance".into()));
        }
        Ok(self.energy(u) / var)
    }

    /// Unnormalized energy summed over a family of groups.
    pub fn group_energy(&self, family: &[Subset]) -> Result<f64> {
        let mut total = 0.0;
        for &u in family {
            if u.is_empty() {
                return Err(Error::InvalidSubset("empty subset in family".into()));
            }
            total += self.energy(u);
        }
        Ok(total)
    }
}
