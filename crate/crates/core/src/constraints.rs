//! Sobol-index constraints and their compilation onto coefficient positions.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{Subset, TensorBasis};
use crate::error::{Error, Result};

/// `sum_{u in family} S_u <= bound`. A zero bound eliminates every
/// coefficient whose support lies in the family.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolConstraint {
    family: Vec<Subset>,
    bound: f64,
}

impl SobolConstraint {
    pub fn new(family: Vec<Subset>, bound: f64) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidSubset("empty family".into()));
        }
        if family.iter().any(|u| u.is_empty()) {
            return Err(Error::InvalidSubset("empty subset in family".into()));
        }
        if !(0.0..=1.0).contains(&bound) {
            return Err(Error::InvalidBound(bound));
        }
        Ok(Self { family, bound })
    }

    /// Builds a constraint from 1-based member lists, e.g. `[[1], [1, 2]]`.
    pub fn from_members(family: &[&[usize]], bound: f64, dim: usize) -> Result<Self> {
        let family = family
            .iter()
            .map(|m| Subset::from_members(m, dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(family, bound)
    }

    pub fn family(&self) -> &[Subset] {
        &self.family
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_elimination(&self) -> bool {
        self.bound == 0.0
    }
}

/// A Euclidean ball `sum_{p in positions} a_p^2 <= radius_sq`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub positions: Vec<usize>,
    pub radius_sq: f64,
}

impl Ball {
    pub fn contains(&self, a: &[f64]) -> bool {
        let energy: f64 = self.positions.iter().map(|&p| a[p] * a[p]).sum();
        energy <= self.radius_sq + BALL_SLACK
    }
}

pub const BALL_SLACK: f64 = 1e-9;
pub const ELIMINATION_SLACK: f64 = 1e-12;

/// Constraint rows on the full coefficient vector (positions in basis order).
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledConstraints {
    pub eliminated: BTreeSet<usize>,
    pub balls: Vec<Ball>,
    pub variance_ball: Ball,
}

impl CompiledConstraints {
    /// Positions left as decision variables, in basis order.
    pub fn surviving(&self, basis_len: usize) -> Vec<usize> {
        (0..basis_len).filter(|p| !self.eliminated.contains(p)).collect()
    }

    /// Every ball, variance ball first.
    pub fn all_balls(&self) -> impl Iterator<Item = &Ball> {
        std::iter::once(&self.variance_ball).chain(self.balls.iter())
    }

    pub fn is_feasible(&self, a: &[f64]) -> bool {
        self.eliminated.iter().all(|&p| a[p].abs() <= ELIMINATION_SLACK)
            && self.all_balls().all(|b| b.contains(a))
    }
}

pub fn compile(constraints: &[SobolConstraint], basis: &TensorBasis) -> Result<CompiledConstraints> {
    let d = basis.dim();
    for c in constraints {
        for u in c.family() {
            if u.max_member() > d {
                return Err(Error::InvalidSubset(format!("{u:?} exceeds dimension {d}")));
            }
        }
    }

    let mut eliminated = BTreeSet::new();
    for c in constraints.iter().filter(|c| c.is_elimination()) {
        for &u in c.family() {
            eliminated.extend(basis.group(u).iter().copied());
        }
    }

    let mut balls = Vec::new();
    for c in constraints.iter().filter(|c| !c.is_elimination()) {
        let family: BTreeSet<Subset> = c.family().iter().copied().collect();
        let positions: Vec<usize> = family
            .iter()
            .flat_map(|&u| basis.group(u).iter().copied())
            .filter(|p| !eliminated.contains(p))
            .collect();
        if positions.is_empty() {
            continue;
        }
        let mut positions = positions;
        positions.sort_unstable();
        balls.push(Ball {
            positions,
            radius_sq: c.bound(),
        });
    }

    let variance_positions: Vec<usize> = (0..basis.len())
        .filter(|&p| !basis.support(p).is_empty() && !eliminated.contains(&p))
        .collect();

    Ok(CompiledConstraints {
        eliminated,
        balls,
        variance_ball: Ball {
            positions: variance_positions,
            radius_sq: 1.0,
        },
    })
}

/// The four constraint sets of the 3-D Rosenbrock study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    A,
    B,
    C,
    D,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::A, Experiment::B, Experiment::C, Experiment::D];

    pub fn constraints(self) -> Vec<SobolConstraint> {
        let c = |fam: &[&[usize]], bound| {
            SobolConstraint::from_members(fam, bound, 3).expect("preset constraints are valid")
        };
        let first_order = || {
            vec![
                c(&[&[1]], 0.42),
                c(&[&[2]], 0.46),
                c(&[&[3]], 0.004),
                c(&[&[1], &[1, 2], &[1, 3]], 0.47),
                c(&[&[2], &[1, 2], &[2, 3]], 0.56),
                c(&[&[3], &[1, 3], &[2, 3]], 0.06),
            ]
        };
        let no_13_interaction = || vec![c(&[&[1, 3]], 0.0), c(&[&[1, 2, 3]], 0.0)];
        match self {
            Experiment::A => Vec::new(),
            Experiment::B => first_order(),
            Experiment::C => {
                let mut v = first_order();
                v.extend(no_13_interaction());
                v
            }
            Experiment::D => no_13_interaction(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::A => "A",
            Experiment::B => "B",
            Experiment::C => "C",
            Experiment::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Experiment::A),
            "B" | "b" => Ok(Experiment::B),
            "C" | "c" => Ok(Experiment::C),
            "D" | "d" => Ok(Experiment::D),
            other => Err(Error::InvalidConfig(format!(
                "preset: unknown experiment `{other}` (expected A, B, C or D)"
            ))),
        }
    }
}

pub fn experiment_preset(tag: Experiment) -> Vec<SobolConstraint> {
    tag.constraints()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisConfig;

    fn basis() -> TensorBasis {
        TensorBasis::new(BasisConfig::new(3, 4).unwrap()).unwrap()
    }

    #[test]
    fn unconstrained_has_only_variance_ball() {
        let cc = compile(&[], &basis()).unwrap();
        assert!(cc.eliminated.is_empty());
        assert!(cc.balls.is_empty());
        assert_eq!(cc.variance_ball.positions.len(), 124);
        assert!(!cc.variance_ball.positions.contains(&0));
        assert_eq!(cc.variance_ball.radius_sq, 1.0);
    }

    #[test]
    fn eliminations_drop_positions() {
        let b = basis();
        let cc = compile(&Experiment::D.constraints(), &b).unwrap();
        assert_eq!(cc.eliminated.len(), 80);
        assert_eq!(cc.variance_ball.positions.len(), 44);
        for &p in &cc.eliminated {
            let s = b.support(p);
            assert!(s.contains(1) && s.contains(3));
        }
    }

    #[test]
    fn singleton_ball() {
        let b = basis();
        let c = SobolConstraint::from_members(&[&[3]], 0.004, 3).unwrap();
        let cc = compile(&[c], &b).unwrap();
        assert_eq!(cc.balls.len(), 1);
        let ball = &cc.balls[0];
        assert_eq!(ball.radius_sq, 0.004);
        let degrees: Vec<Vec<u32>> = ball
            .positions
            .iter()
            .map(|&p| b.indices()[p].degrees().to_vec())
            .collect();
        assert_eq!(degrees, vec![vec![0, 0, 1], vec![0, 0, 2], vec![0, 0, 3], vec![0, 0, 4]]);
    }

    #[test]
    fn overlapping_balls_exclude_eliminated() {
        let b = basis();
        let cc = compile(&Experiment::C.constraints(), &b).unwrap();
        assert_eq!(cc.balls.len(), 6);
        for ball in cc.all_balls() {
            assert!(!ball.positions.contains(&0));
            assert!(ball.positions.iter().all(|p| !cc.eliminated.contains(p)));
        }
        // {3} + {2,3} only, {1,3} is gone
        assert_eq!(cc.balls[5].positions.len(), 4 + 16);
        assert_eq!(cc.balls[3].positions.len(), 4 + 16);
    }

    #[test]
    fn presets() {
        assert!(Experiment::A.constraints().is_empty());
        let b = Experiment::B.constraints();
        assert_eq!(b.len(), 6);
        assert_eq!(b[0], SobolConstraint::from_members(&[&[1]], 0.42, 3).unwrap());
        let c = Experiment::C.constraints();
        assert_eq!(c.len(), 8);
        assert_eq!(&c[..6], &b[..]);
        assert_eq!(c[6], SobolConstraint::from_members(&[&[1, 3]], 0.0, 3).unwrap());
        assert_eq!(c[7], SobolConstraint::from_members(&[&[1, 2, 3]], 0.0, 3).unwrap());
        assert_eq!(Experiment::D.constraints(), c[6..].to_vec());
        assert_eq!("C".parse::<Experiment>().unwrap(), Experiment::C);
        let err = "E".parse::<Experiment>().unwrap_err().to_string();
        assert!(err.contains("preset"));
    }

    #[test]
    fn invalid_constraints() {
        assert!(SobolConstraint::from_members(&[], 0.1, 3).is_err());
        assert!(SobolConstraint::from_members(&[&[4]], 0.1, 3).is_err());
        assert!(SobolConstraint::from_members(&[&[1]], 1.5, 3).is_err());
        assert!(SobolConstraint::from_members(&[&[1]], -0.1, 3).is_err());
        let c = SobolConstraint::from_members(&[&[1, 4]], 0.1, 4).unwrap();
        assert!(compile(&[c], &basis()).is_err());
    }

    #[test]
    fn compile_is_deterministic() {
        let b = basis();
        let c = Experiment::C.constraints();
        assert_eq!(compile(&c, &b).unwrap(), compile(&c, &b).unwrap());
    }
}
