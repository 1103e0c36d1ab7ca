//! Normalized Legendre polynomials and their tensor products.
//!
//! `psi(n, x) = sqrt(2n + 1) * P_n(x)` is orthonormal under the uniform
//! probability measure on [-1, 1], so `psi(0, .) == 1`. A multivariate basis
//! function is indexed by a vector of per-coordinate degrees; the set of
//! coordinates with a nonzero degree is its support, which is also the ANOVA
//! group it contributes variance to.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Slack allowed on `|x| <= 1` before a coordinate counts as unmapped.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Default cap on the number of tensor basis functions.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

fn check_domain(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain { value: x });
    }
    Ok(())
}

/// Classical Legendre polynomial by the three-term recurrence.
fn legendre(n: usize, x: f64) -> f64 {
    let mut p_prev = 1.0;
    if n == 0 {
        return p_prev;
    }
    let mut p_curr = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p_curr - kf * p_prev) / (kf + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
    }
    p_curr
}

/// Unit-variance Legendre polynomial of degree `n` at `x`.
pub fn psi(n: usize, x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(((2 * n + 1) as f64).sqrt() * legendre(n, x))
}

/// `psi(0, x) ..= psi(max_degree, x)` in one recurrence pass, into `out`.
fn psi_table_into(max_degree: usize, x: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), max_degree + 1);
    let mut p_prev = 1.0;
    let mut p_curr = x;
    out[0] = 1.0;
    if max_degree == 0 {
        return;
    }
    out[1] = 3f64.sqrt() * x;
    for k in 1..max_degree {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p_curr - kf * p_prev) / (kf + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
        out[k + 1] = ((2 * k + 3) as f64).sqrt() * p_curr;
    }
}

/// All values `psi(0, x) ..= psi(max_degree, x)`.
pub fn psi_table(max_degree: usize, x: f64) -> Result<Vec<f64>> {
    check_domain(x)?;
    let mut out = vec![0.0; max_degree + 1];
    psi_table_into(max_degree, x, &mut out);
    Ok(out)
}

/// A subset of coordinates `{1, ..., d}` stored as a bit mask (bit `i - 1`
/// for coordinate `i`). Supports `d <= 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);
    pub const MAX_DIM: usize = 64;

    /// Builds a subset from 1-based coordinate labels, checking `1 <= i <= dim`.
    pub fn from_members(members: &[usize], dim: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        let mut bits = 0u64;
        for &i in members {
            if i == 0 || i > dim || i > Self::MAX_DIM {
                return Err(Error::InvalidSubset(format!(
                    "coordinate {i} out of range 1..={dim}"
                )));
            }
            bits |= 1 << (i - 1);
        }
        Ok(Subset(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, coord: usize) -> bool {
        (1..=Self::MAX_DIM).contains(&coord) && self.0 & (1 << (coord - 1)) != 0
    }

    /// 1-based coordinate labels in increasing order.
    pub fn members(self) -> Vec<usize> {
        (1..=Self::MAX_DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Largest coordinate label, or 0 for the empty set.
    pub fn max_member(self) -> usize {
        (u64::BITS - self.0.leading_zeros()) as usize
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.members().into_iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Input dimension and maximal per-coordinate degree of the truncated basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisConfig {
    dim: usize,
    degree: usize,
}

impl BasisConfig {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > Subset::MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "dimension must be in 1..={}, got {dim}",
                Subset::MAX_DIM
            )));
        }
        if degree == 0 {
            return Err(Error::InvalidConfig("degree must be >= 1".into()));
        }
        Ok(Self { dim, degree })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(degree + 1)^dim`, saturating in `u128`.
    pub fn size(&self) -> u128 {
        let base = (self.degree + 1) as u128;
        let mut size: u128 = 1;
        for _ in 0..self.dim {
            size = size.saturating_mul(base);
        }
        size
    }
}

/// Per-coordinate degrees of one tensor basis function.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(Vec<u32>);

impl BasisIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        BasisIndex(degrees)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinates with a nonzero degree.
    pub fn support(&self) -> Subset {
        let bits = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .fold(0u64, |acc, (l, _)| acc | (1 << l));
        Subset(bits)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl fmt::Debug for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, k) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Product of `psi(k_l, x_l)` over all coordinates.
pub fn eval_tensor(k: &BasisIndex, x: &[f64]) -> Result<f64> {
    if k.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: x.len(),
        });
    }
    let mut prod = 1.0;
    for (&deg, &xl) in k.degrees().iter().zip(x) {
        prod *= psi(deg as usize, xl)?;
    }
    Ok(prod)
}

/// All multi-indices of the truncated basis in lexicographic order.
pub fn enumerate_basis(cfg: &BasisConfig) -> Result<Vec<BasisIndex>> {
    enumerate_basis_capped(cfg, DEFAULT_BASIS_CAP)
}

pub fn enumerate_basis_capped(cfg: &BasisConfig, cap: usize) -> Result<Vec<BasisIndex>> {
    let size = cfg.size();
    if size > cap as u128 {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let size = size as usize;
    let d = cfg.dim;
    let mut out = Vec::with_capacity(size);
    let mut current = vec![0u32; d];
    for _ in 0..size {
        out.push(BasisIndex(current.clone()));
        // odometer increment, last coordinate fastest
        for l in (0..d).rev() {
            if (current[l] as usize) < cfg.degree {
                current[l] += 1;
                break;
            }
            current[l] = 0;
        }
    }
    Ok(out)
}

/// The enumerated basis together with its support grouping.
#[derive(Clone, Debug)]
pub struct TensorBasis {
    cfg: BasisConfig,
    indices: Vec<BasisIndex>,
    supports: Vec<Subset>,
    groups: BTreeMap<Subset, Vec<usize>>,
}

impl TensorBasis {
    pub fn new(cfg: BasisConfig) -> Result<Self> {
        Self::with_cap(cfg, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(cfg: BasisConfig, cap: usize) -> Result<Self> {
        let indices = enumerate_basis_capped(&cfg, cap)?;
        let supports: Vec<Subset> = indices.iter().map(BasisIndex::support).collect();
        let mut groups: BTreeMap<Subset, Vec<usize>> = BTreeMap::new();
        for (pos, &s) in supports.iter().enumerate() {
            groups.entry(s).or_default().push(pos);
        }
        Ok(Self {
            cfg,
            indices,
            supports,
            groups,
        })
    }

    pub fn config(&self) -> &BasisConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn support(&self, pos: usize) -> Subset {
        self.supports[pos]
    }

    /// Positions whose support is exactly `u` (empty slice if none).
    pub fn group(&self, u: Subset) -> &[usize] {
        self.groups.get(&u).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nonempty supports in increasing bit order.
    pub fn nonempty_supports(&self) -> impl Iterator<Item = Subset> + '_ {
        self.groups.keys().copied().filter(|s| !s.is_empty())
    }

    /// Values of every basis function at `x`, in enumeration order.
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_all_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_all_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        assert_eq!(out.len(), self.len());
        let width = self.cfg.degree + 1;
        let mut tables = vec![0.0; d * width];
        for (l, &xl) in x.iter().enumerate() {
            check_domain(xl)?;
            psi_table_into(self.cfg.degree, xl, &mut tables[l * width..(l + 1) * width]);
        }
        for (slot, k) in out.iter_mut().zip(&self.indices) {
            *slot = k
                .degrees()
                .iter()
                .enumerate()
                .map(|(l, &deg)| tables[l * width + deg as usize])
                .product();
        }
        Ok(())
    }
}
