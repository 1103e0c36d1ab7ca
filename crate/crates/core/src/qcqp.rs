//! Dense solver for linear objectives over an affine subspace intersected
//! with centered Euclidean balls:
//!
//! ```text
//! minimize    c^T z
//! subject to  A z = b
//!             sum_{p in G_j} z_p^2 <= r_j      for every ball j
//! ```
//!
//! Equalities are eliminated with an SVD (particular solution plus an
//! orthonormal null-space basis). Directions of the null space that no ball
//! sees are split off: if the objective has a component along them the
//! problem is unbounded below. The remaining bounded problem is solved with a
//! log-barrier Newton method, after a phase-1 search for a strictly feasible
//! point that doubles as the infeasibility certificate.

use nalgebra::{DMatrix, DVector};

use crate::constraints::Ball;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QcqpProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub balls: Vec<Ball>,
}

impl QcqpProblem {
    /// A problem without equality constraints.
    pub fn unconstrained(c: DVector<f64>, balls: Vec<Ball>) -> Self {
        let n = c.len();
        Self {
            c,
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            balls,
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.a.ncols(),
            });
        }
        if self.b.len() != self.a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.a.nrows(),
                got: self.b.len(),
            });
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective".into()));
        }
        if self.a.iter().any(|v| !v.is_finite()) || self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("equality constraints".into()));
        }
        for ball in &self.balls {
            if !ball.radius_sq.is_finite() || ball.radius_sq < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "ball radius_sq must be finite and >= 0, got {}",
                    ball.radius_sq
                )));
            }
            if let Some(&p) = ball.positions.iter().find(|&&p| p >= n) {
                return Err(Error::InvalidConfig(format!(
                    "ball position {p} out of range for {n} variables"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Feasible, but the objective decreases without bound.
    Unbounded,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct QcqpSolution {
    pub status: SolveStatus,
    /// Optimal value; `+inf` when infeasible, `-inf` when unbounded. Under
    /// `MaxIter` it is the objective at the last iterate.
    pub value: f64,
    /// Upper bound on `value - optimum` (duality gap of the barrier).
    pub gap: f64,
    pub z: Option<DVector<f64>>,
    pub eq_multipliers: Option<DVector<f64>>,
    pub ball_multipliers: Vec<f64>,
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

impl QcqpSolution {
    fn terminal(status: SolveStatus, value: f64, newton_steps: usize) -> Self {
        Self {
            status,
            value,
            gap: 0.0,
            z: None,
            eq_multipliers: None,
            ball_multipliers: Vec::new(),
            kkt_residual: f64::NAN,
            newton_steps,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Target duality gap.
    pub tol: f64,
    /// Newton step cap, applied separately to phase 1 and the main phase.
    pub max_newton: usize,
    /// Relative singular-value cutoff for the equality rank.
    pub rank_tol: f64,
    /// Ball violation below which a point counts as feasible.
    pub feas_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_newton: 200,
            rank_tol: 1e-10,
            feas_tol: 1e-9,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_newton == 0 {
            return Err(Error::InvalidConfig("max_newton must be >= 1".into()));
        }
        Ok(())
    }
}

/// Singular values of the ball-coordinate block below this are free directions.
const FREE_DIRECTION_TOL: f64 = 1e-9;
/// Relative objective component along free directions that means unbounded.
const UNBOUNDED_TOL: f64 = 1e-9;
/// Relative equality residual allowed for a consistent system.
const EQ_RESIDUAL_TOL: f64 = 1e-8;
/// Newton decrement (`lambda^2 / 2`) that ends a centering step.
const CENTERING_TOL: f64 = 1e-12;
/// Balls whose barrier multiplier is below this fraction of the largest are
/// treated as inactive when polishing.
const ACTIVE_TOL: f64 = 1e-4;
const POLISH_STEPS: usize = 6;

/// `h(y) = y^T Q y + 2 p^T y + k <= 0`, with `Q` positive semidefinite.
struct QuadConstraint {
    q: DMatrix<f64>,
    p: DVector<f64>,
    k: f64,
}

impl QuadConstraint {
    fn value(&self, y: &DVector<f64>) -> f64 {
        let qy = &self.q * y;
        y.dot(&qy) + 2.0 * self.p.dot(y) + self.k
    }
}

/// SVD-based description of `{ z : A z = b }`.
struct AffineSet {
    z0: DVector<f64>,
    /// Orthonormal null-space basis, `n x k`.
    null: DMatrix<f64>,
    /// Range part of the SVD, for the equality multipliers.
    range_u: DMatrix<f64>,
    range_sigma: Vec<f64>,
    range_v: DMatrix<f64>,
}

impl AffineSet {
    /// `None` if the equalities are inconsistent.
    fn new(a: &DMatrix<f64>, b: &DVector<f64>, rank_tol: f64) -> Option<Self> {
        let (m, n) = a.shape();
        if m == 0 {
            return Some(Self {
                z0: DVector::zeros(n),
                null: DMatrix::identity(n, n),
                range_u: DMatrix::zeros(0, 0),
                range_sigma: Vec::new(),
                range_v: DMatrix::zeros(n, 0),
            });
        }
        // pad to at least n rows so that V^T is a full n x n basis
        let rows = m.max(n);
        let mut padded = DMatrix::zeros(rows, n);
        padded.view_mut((0, 0), (m, n)).copy_from(a);
        let svd = padded.svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let sigma = svd.singular_values;
        let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
        let cutoff = rank_tol * sigma_max;

        let range: Vec<usize> = (0..sigma.len())
            .filter(|&i| sigma_max > 0.0 && sigma[i] > cutoff)
            .collect();
        let null_idx: Vec<usize> = (0..n).filter(|i| !range.contains(i)).collect();

        let mut z0 = DVector::zeros(n);
        for &i in &range {
            let coef = u.view((0, i), (m, 1)).column(0).dot(b) / sigma[i];
            z0.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
        let residual = (a * &z0 - b).amax();
        if residual > EQ_RESIDUAL_TOL * (1.0 + b.amax()) {
            return None;
        }

        let mut null = DMatrix::zeros(n, null_idx.len());
        for (col, &i) in null_idx.iter().enumerate() {
            null.set_column(col, &v_t.row(i).transpose());
        }
        let mut range_u = DMatrix::zeros(m, range.len());
        let mut range_v = DMatrix::zeros(n, range.len());
        for (col, &i) in range.iter().enumerate() {
            range_u.set_column(col, &u.view((0, i), (m, 1)).column(0));
            range_v.set_column(col, &v_t.row(i).transpose());
        }
        let range_sigma = range.iter().map(|&i| sigma[i]).collect();
        Some(Self {
            z0,
            null,
            range_u,
            range_sigma,
            range_v,
        })
    }

    /// Least-squares `nu` with `A^T nu ~= -w`.
    fn multipliers(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut nu = DVector::zeros(self.range_u.nrows());
        for (i, &s) in self.range_sigma.iter().enumerate() {
            let coef = -self.range_v.column(i).dot(w) / s;
            nu.axpy(coef, &self.range_u.column(i), 1.0);
        }
        nu
    }
}

/// A ball restricted to the bounded reduced coordinates `u`:
/// `||e + B u||^2 <= radius_sq`.
struct ReducedBall {
    index: usize,
    bt_b: DMatrix<f64>,
    bt_e: DVector<f64>,
    e_norm_sq: f64,
    radius_sq: f64,
}

impl ReducedBall {
    fn constraint(&self, relax: f64) -> QuadConstraint {
        QuadConstraint {
            q: self.bt_b.clone(),
            p: self.bt_e.clone(),
            k: self.e_norm_sq - self.radius_sq - relax,
        }
    }

    fn phase1_constraint(&self) -> QuadConstraint {
        let r = self.bt_b.nrows();
        let mut q = DMatrix::zeros(r + 1, r + 1);
        q.view_mut((0, 0), (r, r)).copy_from(&self.bt_b);
        let mut p = DVector::zeros(r + 1);
        p.rows_mut(0, r).copy_from(&self.bt_e);
        p[r] = -0.5;
        QuadConstraint {
            q,
            p,
            k: self.e_norm_sq - self.radius_sq,
        }
    }
}

struct Reduced {
    affine: AffineSet,
    /// `n x r` map from bounded reduced coordinates to `z - z0`.
    w: DMatrix<f64>,
    q: DVector<f64>,
    free_component: f64,
    balls: Vec<ReducedBall>,
}

impl Reduced {
    fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.affine.z0 + &self.w * u
    }
}

enum Reduction {
    Infeasible,
    Ready(Box<Reduced>),
}

fn reduce(p: &QcqpProblem, opts: &SolverOptions) -> Reduction {
    let n = p.n();
    let affine = match AffineSet::new(&p.a, &p.b, opts.rank_tol) {
        Some(a) => a,
        None => return Reduction::Infeasible,
    };
    let k = affine.null.ncols();

    let mut union: Vec<usize> = p.balls.iter().flat_map(|b| b.positions.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();

    let full_obj = affine.null.transpose() * &p.c;
    let (v_bound, free_component) = if k == 0 {
        (DMatrix::zeros(0, 0), 0.0)
    } else if union.is_empty() {
        (DMatrix::zeros(k, 0), full_obj.norm())
    } else {
        let rows = union.len().max(k);
        let mut seen = DMatrix::zeros(rows, k);
        for (row, &pos) in union.iter().enumerate() {
            seen.set_row(row, &affine.null.row(pos));
        }
        let svd = seen.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let bounded: Vec<usize> = (0..k)
            .filter(|&i| svd.singular_values[i] > FREE_DIRECTION_TOL)
            .collect();
        let mut v_bound = DMatrix::zeros(k, bounded.len());
        for (col, &i) in bounded.iter().enumerate() {
            v_bound.set_column(col, &v_t.row(i).transpose());
        }
        let mut free_sq = 0.0;
        for i in (0..k).filter(|i| !bounded.contains(i)) {
            free_sq += v_t.row(i).transpose().dot(&full_obj).powi(2);
        }
        (v_bound, free_sq.sqrt())
    };

    let w = if k == 0 {
        DMatrix::zeros(n, 0)
    } else {
        &affine.null * &v_bound
    };
    let q = w.transpose() * &p.c;
    let r = w.ncols();

    let mut balls = Vec::with_capacity(p.balls.len());
    for (index, ball) in p.balls.iter().enumerate() {
        let mut bmat = DMatrix::zeros(ball.positions.len(), r);
        let mut e = DVector::zeros(ball.positions.len());
        for (row, &pos) in ball.positions.iter().enumerate() {
            bmat.set_row(row, &w.row(pos));
            e[row] = affine.z0[pos];
        }
        let e_norm_sq = e.norm_squared();
        if r == 0 || bmat.amax() <= 1e-12 {
            // the ball does not depend on the free coordinates
            if e_norm_sq > ball.radius_sq + opts.feas_tol {
                return Reduction::Infeasible;
            }
            continue;
        }
        balls.push(ReducedBall {
            index,
            bt_b: bmat.transpose() * &bmat,
            bt_e: bmat.transpose() * &e,
            e_norm_sq,
            radius_sq: ball.radius_sq,
        });
    }

    Reduction::Ready(Box::new(Reduced {
        affine,
        w,
        q,
        free_component,
        balls,
    }))
}

enum Outcome {
    Stop,
    Continue,
}

struct BarrierRun {
    y: DVector<f64>,
    t: f64,
    newton_steps: usize,
    hit_cap: bool,
}

/// Path-following log-barrier method for `min w^T y` s.t. `h_j(y) < 0`,
/// starting from a strictly feasible `y`. `t` grows tenfold per centering;
/// `after_centering` decides when to stop.
fn barrier<F>(
    w: &DVector<f64>,
    cons: &[QuadConstraint],
    mut y: DVector<f64>,
    max_newton: usize,
    mut after_centering: F,
) -> BarrierRun
where
    F: FnMut(&DVector<f64>, f64) -> Outcome,
{
    let dim = y.len();
    let mut t = 1.0;
    let mut newton_steps = 0;
    // phi(y + d) - phi(y), formed without the large common terms
    let phi_change = |y: &DVector<f64>, d: &DVector<f64>, t: f64| -> f64 {
        let cand = y + d;
        let mut change = t * w.dot(d);
        for c in cons {
            let h1 = c.value(&cand);
            if h1 >= 0.0 {
                return f64::INFINITY;
            }
            change -= (h1 / c.value(y)).ln();
        }
        change
    };

    loop {
        // centering
        loop {
            if newton_steps >= max_newton {
                return BarrierRun {
                    y,
                    t,
                    newton_steps,
                    hit_cap: true,
                };
            }
            let mut grad = w * t;
            let mut hess = DMatrix::<f64>::zeros(dim, dim);
            for c in cons {
                let qy = &c.q * &y;
                let h = y.dot(&qy) + 2.0 * c.p.dot(&y) + c.k;
                let gh = (qy + &c.p) * 2.0;
                let inv = 1.0 / (-h);
                grad.axpy(inv, &gh, 1.0);
                hess.zip_apply(&c.q, |h, q| *h += 2.0 * inv * q);
                hess.ger(inv * inv, &gh, &gh, 1.0);
            }
            let step = match newton_direction(&hess, &grad) {
                Some(s) => s,
                None => break,
            };
            newton_steps += 1;
            let decrement = -grad.dot(&step);
            if decrement / 2.0 <= CENTERING_TOL {
                break;
            }
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let d = &step * s;
                let change = phi_change(&y, &d, t);
                if change < 0.0 && change <= -0.25 * s * decrement {
                    y += d;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                // no progress possible at this precision
                break;
            }
        }
        if let Outcome::Stop = after_centering(&y, t) {
            return BarrierRun {
                y,
                t,
                newton_steps,
                hit_cap: false,
            };
        }
        t *= 10.0;
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = hess.clone().cholesky() {
        return Some(-ch.solve(grad));
    }
    let scale = hess.diagonal().amax().max(1e-300);
    let mut ridge = 1e-14 * scale;
    for _ in 0..8 {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += ridge;
        }
        if let Some(ch) = h.cholesky() {
            return Some(-ch.solve(grad));
        }
        ridge *= 100.0;
    }
    None
}

/// Strictly feasible starting point for the main phase.
struct Interior {
    u: DVector<f64>,
    relax: f64,
}

enum Phase1Outcome {
    Feasible(Interior),
    Infeasible,
    MaxIter,
}

fn find_interior(red: &Reduced, opts: &SolverOptions) -> (Phase1Outcome, usize) {
    let r = red.w.ncols();
    let u0 = DVector::zeros(r);
    if red.balls.is_empty() {
        return (Phase1Outcome::Feasible(Interior { u: u0, relax: 0.0 }), 0);
    }
    let cons: Vec<QuadConstraint> = red.balls.iter().map(ReducedBall::phase1_constraint).collect();
    let start_violation = red
        .balls
        .iter()
        .map(|b| b.e_norm_sq - b.radius_sq)
        .fold(f64::NEG_INFINITY, f64::max);
    if start_violation < -1e-8 {
        return (Phase1Outcome::Feasible(Interior { u: u0, relax: 0.0 }), 0);
    }

    let mut y0 = DVector::zeros(r + 1);
    y0[r] = start_violation + 1.0;
    let mut obj = DVector::zeros(r + 1);
    obj[r] = 1.0;
    let m = cons.len() as f64;
    let feas_tol = opts.feas_tol;
    let mut verdict: Option<bool> = None;
    let run = barrier(&obj, &cons, y0, opts.max_newton, |y, t| {
        let s = y[r];
        let gap = m / t;
        if s - gap > feas_tol {
            verdict = Some(false);
            return Outcome::Stop;
        }
        if s < 0.0 && gap <= 0.5 * s.abs() {
            verdict = Some(true);
            return Outcome::Stop;
        }
        if gap < 0.1 * feas_tol {
            verdict = Some(s <= feas_tol);
            return Outcome::Stop;
        }
        Outcome::Continue
    });
    let steps = run.newton_steps;
    if run.hit_cap {
        // a strictly feasible iterate is still usable
        if run.y[r] < 0.0 {
            let u = run.y.rows(0, r).into_owned();
            return (Phase1Outcome::Feasible(Interior { u, relax: 0.0 }), steps);
        }
        return (Phase1Outcome::MaxIter, steps);
    }
    match verdict {
        Some(true) => {
            let s = run.y[r];
            let u = run.y.rows(0, r).into_owned();
            // no usable interior: widen the balls by a hair
            let relax = if s > -1e-10 { s.max(0.0) + feas_tol } else { 0.0 };
            (Phase1Outcome::Feasible(Interior { u, relax }), steps)
        }
        _ => (Phase1Outcome::Infeasible, steps),
    }
}

#[derive(Clone, Debug)]
pub struct Phase1Result {
    pub feasible: bool,
    /// A point satisfying the equalities and every ball (within `feas_tol`).
    pub witness: Option<DVector<f64>>,
}

/// Feasibility check for the equality-affine subspace intersected with the
/// balls.
pub fn phase1(p: &QcqpProblem) -> Result<Phase1Result> {
    phase1_with(p, &SolverOptions::default())
}

pub fn phase1_with(p: &QcqpProblem, opts: &SolverOptions) -> Result<Phase1Result> {
    p.validate()?;
    opts.validate()?;
    let red = match reduce(p, opts) {
        Reduction::Infeasible => {
            return Ok(Phase1Result {
                feasible: false,
                witness: None,
            })
        }
        Reduction::Ready(red) => red,
    };
    match find_interior(&red, opts).0 {
        Phase1Outcome::Feasible(interior) => Ok(Phase1Result {
            feasible: true,
            witness: Some(red.point(&interior.u)),
        }),
        // an undecided phase 1 is reported as infeasible
        Phase1Outcome::Infeasible | Phase1Outcome::MaxIter => Ok(Phase1Result {
            feasible: false,
            witness: None,
        }),
    }
}

struct Assessed {
    z: DVector<f64>,
    value: f64,
    ball_multipliers: Vec<f64>,
    eq_multipliers: DVector<f64>,
    kkt_residual: f64,
}

/// KKT quantities of the reduced point `y` with reduced-ball multipliers.
fn assess(p: &QcqpProblem, red: &Reduced, y: &DVector<f64>, lambda: &[f64]) -> Assessed {
    let z = red.point(y);
    let value = p.c.dot(&z);
    let mut ball_multipliers = vec![0.0; p.balls.len()];
    for (rb, &l) in red.balls.iter().zip(lambda) {
        ball_multipliers[rb.index] = l;
    }
    let mut grad = p.c.clone();
    let mut complementarity: f64 = 0.0;
    for (ball, &l) in p.balls.iter().zip(&ball_multipliers) {
        let mut energy = 0.0;
        for &pos in &ball.positions {
            grad[pos] += 2.0 * l * z[pos];
            energy += z[pos] * z[pos];
        }
        complementarity = complementarity.max((l * (energy - ball.radius_sq)).abs());
    }
    let eq_multipliers = red.affine.multipliers(&grad);
    let null = &red.affine.null;
    let stationarity = if null.ncols() == 0 {
        0.0
    } else {
        (null * (null.transpose() * &grad)).amax()
    };
    Assessed {
        z,
        value,
        ball_multipliers,
        eq_multipliers,
        kkt_residual: stationarity.max(complementarity),
    }
}

/// Newton iterations on the KKT system of the balls that are active at the
/// barrier iterate, treating them as equalities. `None` if the active set
/// looks wrong or the system is singular.
fn polish(
    q: &DVector<f64>,
    cons: &[QuadConstraint],
    y: &DVector<f64>,
    lambda: &[f64],
) -> Option<(DVector<f64>, Vec<f64>)> {
    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return None;
    }
    let active: Vec<usize> = (0..cons.len()).filter(|&j| lambda[j] >= ACTIVE_TOL * lmax).collect();
    let r = y.len();
    let na = active.len();
    let mut y = y.clone();
    let mut lam: Vec<f64> = active.iter().map(|&j| lambda[j]).collect();
    for _ in 0..POLISH_STEPS {
        let mut k = DMatrix::zeros(r + na, r + na);
        let mut rhs = DVector::zeros(r + na);
        rhs.rows_mut(0, r).copy_from(&(-q));
        for (col, &j) in active.iter().enumerate() {
            let c = &cons[j];
            let gh = (&c.q * &y + &c.p) * 2.0;
            let mut block = k.view_mut((0, 0), (r, r));
            block.zip_apply(&c.q, |kk, qq| *kk += 2.0 * lam[col] * qq);
            k.view_mut((0, r + col), (r, 1)).copy_from(&gh);
            k.view_mut((r + col, 0), (1, r)).copy_from(&gh.transpose());
            rhs[r + col] = -c.value(&y);
        }
        let sol = k.lu().solve(&rhs)?;
        if !sol.iter().all(|v| v.is_finite()) {
            return None;
        }
        let dy = sol.rows(0, r).into_owned();
        y += &dy;
        for (col, l) in lam.iter_mut().enumerate() {
            *l = sol[r + col];
        }
        if lam.iter().any(|&l| l < 0.0) {
            return None;
        }
        if dy.amax() <= 1e-15 * y.amax().max(1.0) {
            break;
        }
    }
    let mut full = vec![0.0; cons.len()];
    for (col, &j) in active.iter().enumerate() {
        full[j] = lam[col];
    }
    Some((y, full))
}

pub fn solve(p: &QcqpProblem, tol: f64) -> Result<QcqpSolution> {
    solve_with(p, &SolverOptions::with_tol(tol))
}

pub fn solve_with(p: &QcqpProblem, opts: &SolverOptions) -> Result<QcqpSolution> {
    p.validate()?;
    opts.validate()?;
    let red = match reduce(p, opts) {
        Reduction::Infeasible => {
            return Ok(QcqpSolution::terminal(SolveStatus::Infeasible, f64::INFINITY, 0))
        }
        Reduction::Ready(red) => red,
    };

    let (interior, phase1_steps) = match find_interior(&red, opts) {
        (Phase1Outcome::Feasible(i), s) => (i, s),
        (Phase1Outcome::Infeasible, s) => {
            return Ok(QcqpSolution::terminal(SolveStatus::Infeasible, f64::INFINITY, s))
        }
        (Phase1Outcome::MaxIter, s) => {
            return Ok(QcqpSolution::terminal(SolveStatus::MaxIter, f64::NAN, s))
        }
    };

    let c_scale = p.c.amax().max(1.0);
    let q_norm = red.q.norm();
    if red.free_component > UNBOUNDED_TOL * c_scale
        || (red.balls.is_empty() && q_norm > UNBOUNDED_TOL * c_scale)
    {
        return Ok(QcqpSolution::terminal(
            SolveStatus::Unbounded,
            f64::NEG_INFINITY,
            phase1_steps,
        ));
    }

    let cons: Vec<QuadConstraint> = red
        .balls
        .iter()
        .map(|b| b.constraint(interior.relax))
        .collect();
    let m = cons.len() as f64;
    let tol = opts.tol;
    let run = if cons.is_empty() {
        BarrierRun {
            y: interior.u,
            t: f64::INFINITY,
            newton_steps: 0,
            hit_cap: false,
        }
    } else {
        barrier(&red.q, &cons, interior.u, opts.max_newton, |_, t| {
            if m / t < tol {
                Outcome::Stop
            } else {
                Outcome::Continue
            }
        })
    };

    // barrier multipliers: lambda_j = 1 / (t * -h_j)
    let lambda: Vec<f64> = if run.t.is_finite() {
        cons.iter().map(|c| 1.0 / (run.t * (-c.value(&run.y)))).collect()
    } else {
        vec![0.0; cons.len()]
    };
    let mut point = assess(p, &red, &run.y, &lambda);
    if !run.hit_cap {
        if let Some((y2, lambda2)) = polish(&red.q, &cons, &run.y, &lambda) {
            let feasible = cons.iter().all(|c| c.value(&y2) <= opts.feas_tol);
            let candidate = assess(p, &red, &y2, &lambda2);
            if feasible && candidate.kkt_residual < point.kkt_residual {
                point = candidate;
            }
        }
    }
    let Assessed {
        z,
        value,
        ball_multipliers,
        eq_multipliers,
        kkt_residual,
    } = point;

    let status = if run.hit_cap {
        SolveStatus::MaxIter
    } else {
        SolveStatus::Optimal
    };
    let gap = if run.t.is_finite() { m / run.t } else { 0.0 };
    Ok(QcqpSolution {
        status,
        value,
        gap,
        z: Some(z),
        eq_multipliers: Some(eq_multipliers),
        ball_multipliers,
        kkt_residual,
        newton_steps: phase1_steps + run.newton_steps,
    })
}
