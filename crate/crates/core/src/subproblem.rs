//! Certified lower bound of every admissible surrogate at a query point.
//!
//! The admissible surrogates are the coefficient vectors that interpolate the
//! evaluation history and satisfy the compiled Sobol constraints. Minimizing
//! their value at `x` is a linear objective over that convex set.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::TensorBasis;
use crate::coeffs::CoeffVector;
use crate::constraints::{Ball, CompiledConstraints};
use crate::error::{Error, Result};
use crate::qcqp::{self, QcqpProblem, SolveStatus, SolverOptions};

/// Evaluated points in evaluation order.
#[derive(Clone, Debug, PartialEq)]
pub struct History {
    dim: usize,
    points: Vec<(Vec<f64>, f64)>,
    best: f64,
}

impl History {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
            best: f64::INFINITY,
        }
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(&v) = x.iter().find(|v| v.is_nan() || v.abs() > 1.0 + crate::basis::DOMAIN_SLACK) {
            return Err(Error::Domain { value: v });
        }
        if !y.is_finite() {
            return Err(Error::NonFiniteObjective { x, value: y });
        }
        self.best = self.best.min(y);
        self.points.push((x, y));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(Vec<f64>, f64)] {
        &self.points
    }

    /// Smallest recorded value, `+inf` when empty.
    pub fn best(&self) -> f64 {
        self.best
    }

    /// First point attaining the best value.
    pub fn argmin(&self) -> Option<&[f64]> {
        self.points
            .iter()
            .find(|(_, y)| *y == self.best)
            .map(|(x, _)| x.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertStatus {
    Optimal,
    /// Some admissible surrogate is arbitrarily low at `x`.
    Unbounded,
    /// No truncated surrogate interpolates the history under the constraints.
    Infeasible,
    MaxIter,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound {
    /// `-inf` when unbounded, `+inf` when infeasible.
    pub value: f64,
    pub status: CertStatus,
    /// Solver duality gap at `value`.
    pub gap: f64,
}

/// Relative margin under which `m(x)` and the incumbent are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

impl LowerBound {
    /// Strictly below the incumbent.
    pub fn improves_on(&self, best: f64) -> bool {
        match self.status {
            CertStatus::Unbounded => true,
            CertStatus::Infeasible => false,
            CertStatus::Optimal => self.value < best - TIE_TOL * (1.0 + best.abs()),
            // use the dual side of the gap, which still bounds the optimum from below
            CertStatus::MaxIter => {
                let lower = self.value - self.gap;
                lower < best - TIE_TOL * (1.0 + best.abs())
            }
        }
    }
}

/// Compiled constraints bound to a basis, reusable across queries.
#[derive(Clone, Debug)]
pub struct Certifier {
    basis: Arc<TensorBasis>,
    compiled: CompiledConstraints,
    surviving: Vec<usize>,
    balls: Vec<Ball>,
    options: SolverOptions,
}

impl Certifier {
    pub fn new(basis: Arc<TensorBasis>, compiled: CompiledConstraints) -> Self {
        Self::with_options(basis, compiled, SolverOptions::default())
    }

    pub fn with_options(
        basis: Arc<TensorBasis>,
        compiled: CompiledConstraints,
        options: SolverOptions,
    ) -> Self {
        let surviving = compiled.surviving(basis.len());
        let mut slot = vec![usize::MAX; basis.len()];
        for (i, &p) in surviving.iter().enumerate() {
            slot[p] = i;
        }
        let balls = compiled
            .all_balls()
            .map(|b| Ball {
                positions: b.positions.iter().map(|&p| slot[p]).collect(),
                radius_sq: b.radius_sq,
            })
            .collect();
        Self {
            basis,
            compiled,
            surviving,
            balls,
            options,
        }
    }

    pub fn basis(&self) -> &Arc<TensorBasis> {
        &self.basis
    }

    pub fn compiled(&self) -> &CompiledConstraints {
        &self.compiled
    }

    /// Basis positions that are decision variables, in order.
    pub fn surviving(&self) -> &[usize] {
        &self.surviving
    }

    fn reduced_row(&self, x: &[f64], buf: &mut [f64]) -> Result<Vec<f64>> {
        self.basis.eval_all_into(x, buf)?;
        Ok(self.surviving.iter().map(|&p| buf[p]).collect())
    }

    /// The convex program whose optimum is `m(x)`, over surviving positions.
    pub fn problem(&self, x: &[f64], history: &History) -> Result<QcqpProblem> {
        if history.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: history.dim(),
            });
        }
        let n = self.surviving.len();
        let mut buf = vec![0.0; self.basis.len()];
        let c = DVector::from_vec(self.reduced_row(x, &mut buf)?);
        let mut a = DMatrix::zeros(history.len(), n);
        let mut b = DVector::zeros(history.len());
        for (row, (xj, yj)) in history.points().iter().enumerate() {
            let r = self.reduced_row(xj, &mut buf)?;
            a.row_mut(row).copy_from_slice(&r);
            b[row] = *yj;
        }
        Ok(QcqpProblem {
            c,
            a,
            b,
            balls: self.balls.clone(),
        })
    }

    pub fn lower_bound(&self, x: &[f64], history: &History) -> Result<LowerBound> {
        let problem = self.problem(x, history)?;
        let sol = qcqp::solve_with(&problem, &self.options)?;
        let status = match sol.status {
            SolveStatus::Optimal => CertStatus::Optimal,
            SolveStatus::Unbounded => CertStatus::Unbounded,
            SolveStatus::Infeasible => CertStatus::Infeasible,
            SolveStatus::MaxIter => CertStatus::MaxIter,
        };
        Ok(LowerBound {
            value: sol.value,
            status,
            gap: sol.gap,
        })
    }

    /// A surrogate attaining `m(x)`, with eliminated coefficients set to zero.
    /// `None` unless the solve is optimal.
    pub fn minimizer(&self, x: &[f64], history: &History) -> Result<Option<CoeffVector>> {
        let problem = self.problem(x, history)?;
        let sol = qcqp::solve_with(&problem, &self.options)?;
        match (sol.status, sol.z) {
            (SolveStatus::Optimal, Some(z)) => {
                let mut a = vec![0.0; self.basis.len()];
                for (i, &p) in self.surviving.iter().enumerate() {
                    a[p] = z[i];
                }
                Ok(Some(CoeffVector::new(self.basis.clone(), a)?))
            }
            _ => Ok(None),
        }
    }

    pub fn is_improving(&self, x: &[f64], history: &History) -> Result<bool> {
        Ok(self.lower_bound(x, history)?.improves_on(history.best()))
    }
}

pub fn lower_bound(
    x: &[f64],
    history: &History,
    compiled: &CompiledConstraints,
    basis: &Arc<TensorBasis>,
) -> Result<LowerBound> {
    Certifier::new(basis.clone(), compiled.clone()).lower_bound(x, history)
}

pub fn is_improving(
    x: &[f64],
    history: &History,
    compiled: &CompiledConstraints,
    basis: &Arc<TensorBasis>,
) -> Result<bool> {
    Certifier::new(basis.clone(), compiled.clone()).is_improving(x, history)
}
