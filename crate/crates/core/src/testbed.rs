//! Test objectives and the map from the canonical box `[-1, 1]^d` to user
//! coordinates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Box `[lo, hi]` in user coordinates; canonical `u` maps to
/// `lo + (u + 1) / 2 * (hi - lo)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AffineBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidConfig("box must have at least one coordinate".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::InvalidConfig(format!("box bounds must satisfy lo < hi, got [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn canonical(dim: usize) -> Self {
        Self::uniform(dim, -1.0, 1.0).expect("canonical box is valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn map(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&u, (&l, &h))| l + (u + 1.0) * 0.5 * (h - l))
            .collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&x, (&l, &h))| 2.0 * (x - l) / (h - l) - 1.0)
            .collect()
    }
}

fn check_canonical(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    if let Some(&v) = u.iter().find(|v| v.is_nan() || v.abs() > 1.0 + crate::basis::DOMAIN_SLACK) {
        return Err(Error::Domain { value: v });
    }
    Ok(())
}

/// Normalization that keeps the variance of the 3-D Rosenbrock function on
/// `[-5, 5]^3` below one.
pub const ROSENBROCK_SCALE: f64 = 1.0 / 26000.0;

/// `sum_m 100 (x_{m+1} - x_m^2)^2 + (1 - x_m)^2`, unscaled.
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

/// Scaled Rosenbrock on `[-5, 5]^3`, taking canonical coordinates.
pub fn rosenbrock3_scaled(u: &[f64]) -> Result<f64> {
    check_canonical(u, 3)?;
    let x: Vec<f64> = u.iter().map(|v| 5.0 * v).collect();
    Ok(ROSENBROCK_SCALE * rosenbrock(&x))
}

/// Registered objectives. All but `Rosenbrock3` have closed-form Sobol
/// indices under the uniform measure on `[-1, 1]^d`:
///
/// * `add2`: `sqrt(3) (x1 + x2)`, `S_1 = S_2 = 1/2`
/// * `x1only`: `x1^2`, `S_1 = 1`
/// * `prod12`: `3 x1 x2`, `S_{1,2} = 1`, `S_1 = S_2 = 0`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    Rosenbrock3,
    Add2,
    X1Only,
    Prod12,
}

impl TestFunction {
    pub fn id(self) -> &'static str {
        match self {
            TestFunction::Rosenbrock3 => "rosenbrock3",
            TestFunction::Add2 => "add2",
            TestFunction::X1Only => "x1only",
            TestFunction::Prod12 => "prod12",
        }
    }

    pub fn default_dim(self) -> usize {
        match self {
            TestFunction::Rosenbrock3 => 3,
            TestFunction::Add2 | TestFunction::Prod12 => 2,
            TestFunction::X1Only => 1,
        }
    }

    fn valid_dim(self, dim: usize) -> bool {
        match self {
            TestFunction::Rosenbrock3 => dim == 3,
            TestFunction::Add2 | TestFunction::Prod12 => dim >= 2,
            TestFunction::X1Only => dim >= 1,
        }
    }

    pub fn default_box(self, dim: usize) -> AffineBox {
        match self {
            TestFunction::Rosenbrock3 => AffineBox::uniform(dim, -5.0, 5.0).expect("valid box"),
            _ => AffineBox::canonical(dim),
        }
    }

    /// Value at user coordinates `x`.
    pub fn eval_user(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Rosenbrock3 => ROSENBROCK_SCALE * rosenbrock(x),
            TestFunction::Add2 => 3f64.sqrt() * (x[0] + x[1]),
            TestFunction::X1Only => x[0] * x[0],
            TestFunction::Prod12 => 3.0 * x[0] * x[1],
        }
    }

    /// Closed-form first-order indices on the canonical box, if known.
    pub fn analytic_first_order(self, dim: usize) -> Option<Vec<f64>> {
        let mut s = vec![0.0; dim];
        match self {
            TestFunction::Rosenbrock3 => return None,
            TestFunction::Add2 => {
                s[0] = 0.5;
                s[1] = 0.5;
            }
            TestFunction::X1Only => s[0] = 1.0,
            TestFunction::Prod12 => {}
        }
        Some(s)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rosenbrock3" => Ok(TestFunction::Rosenbrock3),
            "add2" => Ok(TestFunction::Add2),
            "x1only" => Ok(TestFunction::X1Only),
            "prod12" => Ok(TestFunction::Prod12),
            other => Err(Error::UnknownObjective(other.to_string())),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A registered function seen through its box: takes canonical coordinates.
#[derive(Clone, Debug)]
pub struct Objective {
    func: TestFunction,
    bx: AffineBox,
}

impl Objective {
    pub fn new(func: TestFunction, dim: usize, bx: Option<AffineBox>) -> Result<Self> {
        if !func.valid_dim(dim) {
            return Err(Error::InvalidConfig(format!(
                "objective `{func}` does not support dimension {dim}"
            )));
        }
        let bx = bx.unwrap_or_else(|| func.default_box(dim));
        if bx.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bx.dim(),
            });
        }
        Ok(Self { func, bx })
    }

    pub fn from_id(id: &str, dim: Option<usize>) -> Result<Self> {
        let func: TestFunction = id.parse()?;
        Self::new(func, dim.unwrap_or(func.default_dim()), None)
    }

    pub fn function(&self) -> TestFunction {
        self.func
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn domain(&self) -> &AffineBox {
        &self.bx
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        check_canonical(u, self.dim())?;
        Ok(self.func.eval_user(&self.bx.map(u)))
    }
}

/// Objective with documented analytic Sobol structure, by id.
pub fn make_additive(id: &str, dim: usize) -> Result<Objective> {
    Objective::new(id.parse()?, dim, None)
}
