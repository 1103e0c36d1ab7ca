#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sensopt::constraints::Ball;
use sensopt::QcqpProblem;

/// Gauss-Legendre nodes and probability weights (summing to 1) on [-1, 1],
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = beta;
        j[(k - 1, k)] = beta;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unit-variance Legendre polynomial from the explicit monomial sum.
pub fn legendre_monomial(n: usize, x: f64) -> f64 {
    let n64 = n as u64;
    let mut p = 0.0;
    for k in 0..=n64 / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        p += sign * binom(n64, k) * binom(2 * n64 - 2 * k, n64) * x.powi((n64 - 2 * k) as i32);
    }
    p / 2f64.powi(n as i32) * ((2 * n + 1) as f64).sqrt()
}

pub fn rosenbrock3_oracle(u: &[f64]) -> f64 {
    let x: Vec<f64> = u.iter().map(|v| 5.0 * v).collect();
    (100.0 * (x[1] - x[0] * x[0]).powi(2)
        + (1.0 - x[0]).powi(2)
        + 100.0 * (x[2] - x[1] * x[1]).powi(2)
        + (1.0 - x[1]).powi(2))
        / 26000.0
}

pub fn uniform_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    // Box-Muller
    (0..n)
        .map(|_| {
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

fn random_positions<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let k = rng.random_range(1..=n);
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    let mut p = all[..k].to_vec();
    p.sort_unstable();
    p
}

/// Random instance with a known strictly feasible point and a ball over every
/// coordinate, so the optimum is finite.
pub fn random_feasible<R: Rng>(rng: &mut R, n: usize, m: usize, n_balls: usize) -> QcqpProblem {
    let z_star = DVector::from_vec(gaussian_vec(rng, n));
    let a = DMatrix::from_vec(m, n, gaussian_vec(rng, m * n));
    let b = &a * &z_star;
    let c = DVector::from_vec(gaussian_vec(rng, n));
    let mut balls = Vec::with_capacity(n_balls);
    for i in 0..n_balls {
        let positions = if i == 0 { (0..n).collect() } else { random_positions(rng, n) };
        let energy: f64 = positions.iter().map(|&p| z_star[p] * z_star[p]).sum();
        let slack = rng.random_range(0.05..2.0);
        balls.push(Ball {
            positions,
            radius_sq: energy + slack,
        });
    }
    QcqpProblem { c, a, b, balls }
}

/// Instance whose equality-affine set misses the full-coordinate ball: the
/// radius is set below the squared minimum norm of the affine set.
pub fn random_infeasible<R: Rng>(rng: &mut R, n: usize, m: usize) -> QcqpProblem {
    let a = DMatrix::from_vec(m, n, gaussian_vec(rng, m * n));
    let b = DVector::from_vec(gaussian_vec(rng, m)) * 3.0;
    let min_norm = a.clone().pseudo_inverse(1e-12).unwrap() * &b;
    let c = DVector::from_vec(gaussian_vec(rng, n));
    let shrink = rng.random_range(0.2..0.9);
    QcqpProblem {
        c,
        a,
        b,
        balls: vec![Ball {
            positions: (0..n).collect(),
            radius_sq: shrink * min_norm.norm_squared(),
        }],
    }
}

/// KKT residual of `(z, lambda)` with the equality multipliers fitted by
/// least squares; also returns the worst primal violation.
pub fn kkt_oracle(p: &QcqpProblem, z: &DVector<f64>, lambda: &[f64]) -> (f64, f64) {
    let mut g = p.c.clone();
    let mut complementarity: f64 = 0.0;
    let mut violation: f64 = 0.0;
    for (ball, &l) in p.balls.iter().zip(lambda) {
        assert!(l >= 0.0, "negative ball multiplier {l}");
        let mut energy = 0.0;
        for &q in &ball.positions {
            g[q] += 2.0 * l * z[q];
            energy += z[q] * z[q];
        }
        complementarity = complementarity.max((l * (energy - ball.radius_sq)).abs());
        violation = violation.max(energy - ball.radius_sq);
    }
    let stationarity = if p.a.nrows() == 0 {
        g.amax()
    } else {
        let at = p.a.transpose();
        let nu = at.clone().pseudo_inverse(1e-12).unwrap() * &g;
        (&g - at * nu).amax()
    };
    let eq = if p.a.nrows() == 0 { 0.0 } else { (&p.a * z - &p.b).amax() };
    (stationarity.max(complementarity), violation.max(eq))
}

fn feasible(p: &QcqpProblem, z: &[f64]) -> bool {
    p.balls.iter().all(|b| {
        let e: f64 = b.positions.iter().map(|&q| z[q] * z[q]).sum();
        e <= b.radius_sq
    })
}

/// Minimum of `c.z` over the balls for `n <= 3` without equalities, by
/// repeatedly refined grids around the best feasible point.
pub fn brute_force(p: &QcqpProblem) -> f64 {
    let n = p.c.len();
    assert!(n <= 3 && p.a.nrows() == 0);
    let reach = p.balls.iter().map(|b| b.radius_sq.sqrt()).fold(0.0, f64::max);
    let mut center = vec![0.0; n];
    let mut half = reach;
    let steps = 20i64;
    let mut best = f64::INFINITY;
    for _ in 0..45 {
        let mut best_pt = center.clone();
        let total = (2 * steps + 1).pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut z = vec![0.0; n];
            for zi in z.iter_mut() {
                let k = rem % (2 * steps + 1) - steps;
                rem /= 2 * steps + 1;
                *zi = k as f64 / steps as f64 * half;
            }
            for (zi, ci) in z.iter_mut().zip(&center) {
                *zi += ci;
            }
            if feasible(p, &z) {
                let v: f64 = z.iter().zip(p.c.iter()).map(|(a, b)| a * b).sum();
                if v < best {
                    best = v;
                    best_pt = z;
                }
            }
        }
        center = best_pt;
        half *= 0.5;
    }
    best
}

/// Pick-freeze first-order estimates with their Monte-Carlo standard errors.
/// Draws A then B row by row, so a generator in the same state reproduces
/// the library's samples.
pub fn saltelli_first_order<R: Rng, F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    n: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let a: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(rng, d)).collect();
    let b: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(rng, d)).collect();
    let fa: Vec<f64> = a.iter().map(|x| f(x)).collect();
    let fb: Vec<f64> = b.iter().map(|x| f(x)).collect();
    let pooled: Vec<f64> = fa.iter().chain(&fb).copied().collect();
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let var = pooled.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (pooled.len() - 1) as f64;
    let mut est = Vec::with_capacity(d);
    let mut se = Vec::with_capacity(d);
    for i in 0..d {
        let terms: Vec<f64> = (0..n)
            .map(|j| {
                let mut x = a[j].clone();
                x[i] = b[j][i];
                fb[j] * (f(&x) - fa[j]) / var
            })
            .collect();
        let m = terms.iter().sum::<f64>() / n as f64;
        let sd = (terms.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        est.push(m);
        se.push(sd / (n as f64).sqrt());
    }
    (est, se)
}
