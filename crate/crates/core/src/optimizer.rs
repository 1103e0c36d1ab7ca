//! Sequential minimization with rejection of uncertifiable proposals.
//!
//! The first point is drawn uniformly and evaluated without a solve. After
//! that each uniform proposal costs one certification solve; it is evaluated
//! only when the certified lower bound lies strictly below the incumbent.

use std::sync::Arc;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{BasisConfig, TensorBasis};
use crate::constraints::{compile, SobolConstraint};
use crate::error::{Error, Result};
use crate::qcqp::SolverOptions;
use crate::subproblem::{CertStatus, Certifier, History, LowerBound};

pub const DEFAULT_MAX_CONSECUTIVE_INFEASIBLE: usize = 10;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub basis: BasisConfig,
    /// Number of certification solves allowed.
    pub budget_solves: usize,
    pub constraints: Vec<SobolConstraint>,
    pub seed: u64,
    pub max_consecutive_infeasible: usize,
    pub solver: SolverOptions,
}

impl RunConfig {
    pub fn new(basis: BasisConfig, budget_solves: usize, constraints: Vec<SobolConstraint>, seed: u64) -> Self {
        Self {
            basis,
            budget_solves,
            constraints,
            seed,
            max_consecutive_infeasible: DEFAULT_MAX_CONSECUTIVE_INFEASIBLE,
            solver: SolverOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget_solves == 0 {
            return Err(Error::InvalidConfig("budget_solves must be >= 1".into()));
        }
        if self.max_consecutive_infeasible == 0 {
            return Err(Error::InvalidConfig("max_consecutive_infeasible must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Budget,
    ModelInconsistent,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Budget => "BUDGET",
            Termination::ModelInconsistent => "MODEL_INCONSISTENT",
        }
    }
}

/// One certification: the proposal, its bound and the incumbent it was
/// compared with.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub proposal: Vec<f64>,
    pub bound: LowerBound,
    pub incumbent: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub n_eval: usize,
    pub m_best: f64,
    pub history: History,
    pub solves_used: usize,
    pub termination: Termination,
    pub steps: Vec<Step>,
}

/// Seeded stream of i.i.d. uniform points on `[-1, 1]^d`.
#[derive(Clone, Debug)]
pub struct ProposalStream {
    rng: ChaCha8Rng,
    dim: usize,
}

impl ProposalStream {
    pub fn new(seed: u64, dim: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
        }
    }

    pub fn propose(&mut self) -> Vec<f64> {
        propose(&mut self.rng, self.dim)
    }
}

pub fn propose<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn evaluate<F: FnMut(&[f64]) -> f64>(f: &mut F, x: Vec<f64>, history: &mut History) -> Result<()> {
    let y = f(&x);
    if !y.is_finite() {
        return Err(Error::NonFiniteObjective { x, value: y });
    }
    history.push(x, y)
}

pub fn run<F>(mut f: F, cfg: &RunConfig) -> Result<RunResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let dim = cfg.basis.dim();
    let basis = Arc::new(TensorBasis::new(cfg.basis)?);
    let compiled = compile(&cfg.constraints, &basis)?;
    let certifier = Certifier::with_options(basis, compiled, cfg.solver);

    let mut proposals = ProposalStream::new(cfg.seed, dim);
    let mut history = History::new(dim);
    evaluate(&mut f, proposals.propose(), &mut history)?;

    let mut solves_used = 0;
    let mut consecutive_infeasible = 0;
    let mut termination = Termination::Budget;
    let mut steps = Vec::with_capacity(cfg.budget_solves);

    while solves_used < cfg.budget_solves {
        let x = proposals.propose();
        let bound = certifier.lower_bound(&x, &history)?;
        solves_used += 1;
        let incumbent = history.best();

        if bound.status == CertStatus::Infeasible {
            consecutive_infeasible += 1;
        } else {
            consecutive_infeasible = 0;
        }
        if bound.status == CertStatus::MaxIter {
            warn!("certification hit the Newton cap at {x:?}");
        }

        let accepted = bound.improves_on(incumbent);
        steps.push(Step {
            proposal: x.clone(),
            bound,
            incumbent,
            accepted,
        });
        if accepted {
            debug!("accept {x:?}: m = {} < {incumbent}", bound.value);
            assert!(bound.value < incumbent || bound.status == CertStatus::MaxIter);
            evaluate(&mut f, x, &mut history)?;
        }

        if consecutive_infeasible >= cfg.max_consecutive_infeasible {
            warn!(
                "{consecutive_infeasible} consecutive infeasible certifications: \
                 the objective is not representable in the constrained truncated class"
            );
            termination = Termination::ModelInconsistent;
            break;
        }
    }

    Ok(RunResult {
        n_eval: history.len(),
        m_best: history.best(),
        history,
        solves_used,
        termination,
        steps,
    })
}
