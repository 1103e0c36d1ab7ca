//! Pick-freeze Monte-Carlo estimates of first-order and total Sobol indices.
//!
//! With base matrices `A`, `B` and `AB_i` (A with column `i` taken from B):
//!
//! ```text
//! S_i = mean( f(B) * (f(AB_i) - f(A)) ) / V
//! T_i = mean( (f(A) - f(AB_i))^2 ) / (2 V)
//! ```
//!
//! where `V` is the sample variance of the pooled `f(A)`, `f(B)` values.
//! Estimates are not clipped to `[0, 1]`.

use rand::Rng;

use crate::basis::Subset;
use crate::constraints::SobolConstraint;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityEstimate {
    pub first_order: Vec<f64>,
    pub total: Vec<f64>,
    pub variance: f64,
    pub n_base: usize,
    pub total_evals: usize,
}

impl SensitivityEstimate {
    pub fn dim(&self) -> usize {
        self.first_order.len()
    }
}

fn sample_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Vec<f64> {
    (0..n * d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn estimate<F, R>(f: F, d: usize, n_base: usize, rng: &mut R) -> Result<SensitivityEstimate>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    if n_base < 2 {
        return Err(Error::InvalidConfig(format!("n_base must be >= 2, got {n_base}")));
    }
    if d == 0 {
        return Err(Error::InvalidConfig("dimension must be >= 1".into()));
    }
    let a = sample_matrix(rng, n_base, d);
    let b = sample_matrix(rng, n_base, d);

    let eval = |x: &[f64]| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteObjective {
                x: x.to_vec(),
                value: y,
            })
        }
    };

    let fa = a.chunks(d).map(eval).collect::<Result<Vec<f64>>>()?;
    let fb = b.chunks(d).map(eval).collect::<Result<Vec<f64>>>()?;

    let pooled = fa.iter().chain(&fb);
    let count = (2 * n_base) as f64;
    let mean = pooled.clone().sum::<f64>() / count;
    let variance = pooled.map(|y| (y - mean).powi(2)).sum::<f64>() / (count - 1.0);
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::Degenerate("objective has zero sample variance".into()));
    }

    let n = n_base as f64;
    let mut first_order = Vec::with_capacity(d);
    let mut total = Vec::with_capacity(d);
    let mut row = vec![0.0; d];
    for i in 0..d {
        let mut s_acc = 0.0;
        let mut t_acc = 0.0;
        for j in 0..n_base {
            row.copy_from_slice(&a[j * d..(j + 1) * d]);
            row[i] = b[j * d + i];
            let fab = eval(&row)?;
            s_acc += fb[j] * (fab - fa[j]);
            t_acc += (fa[j] - fab).powi(2);
        }
        first_order.push(s_acc / n / variance);
        total.push(t_acc / (2.0 * n) / variance);
    }

    Ok(SensitivityEstimate {
        first_order,
        total,
        variance,
        n_base,
        total_evals: n_base * (d + 2),
    })
}

/// Estimates below this are treated as zero.
pub const ZERO_INDEX: f64 = 1e-3;

/// Conservative constraints from an estimate: `bound = min(1, est * (1 + margin))`
/// for every singleton `{i}` and for the family of `{i}` together with every
/// pair containing `i`. Bounds never drop below [`ZERO_INDEX`] unless
/// `assume_zero` is set, in which case near-zero first-order indices become
/// eliminations of `{i}` and near-zero total indices eliminate every subset
/// containing `i`.
pub fn suggest_bounds(
    est: &SensitivityEstimate,
    margin: f64,
    assume_zero: bool,
) -> Result<Vec<SobolConstraint>> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidConfig(format!("margin must be >= 0, got {margin}")));
    }
    let d = est.dim();
    if d == 0 || d > Subset::MAX_DIM {
        return Err(Error::InvalidConfig(format!("unsupported dimension {d}")));
    }
    let values = est.first_order.iter().chain(&est.total);
    if est.variance.is_nan() || est.variance <= 0.0 || values.clone().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("estimate is not usable".into()));
    }
    let bound = |v: f64| -> f64 {
        let b = (v * (1.0 + margin)).clamp(0.0, 1.0);
        if assume_zero {
            b
        } else {
            b.max(ZERO_INDEX)
        }
    };
    let singleton = |i: usize| Subset::from_bits(1 << (i - 1));

    let mut out = Vec::with_capacity(2 * d);
    for i in 1..=d {
        let s = est.first_order[i - 1];
        let b = if assume_zero && s < ZERO_INDEX { 0.0 } else { bound(s) };
        out.push(SobolConstraint::new(vec![singleton(i)], b)?);
    }
    for i in 1..=d {
        let t = est.total[i - 1];
        if assume_zero && t < ZERO_INDEX {
            // every subset of {1..d} containing i
            let family: Vec<Subset> = (1u64..(1u64 << d))
                .map(Subset::from_bits)
                .filter(|u| u.contains(i))
                .collect();
            out.push(SobolConstraint::new(family, 0.0)?);
            continue;
        }
        let mut family = vec![singleton(i)];
        for j in (1..=d).filter(|&j| j != i) {
            family.push(Subset::from_bits((1 << (i - 1)) | (1 << (j - 1))));
        }
        family.sort();
        out.push(SobolConstraint::new(family, bound(t))?);
    }
    Ok(out)
}
