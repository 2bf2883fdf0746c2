//! Dual active-set (Goldfarb–Idnani) solver for least-distance problems
//!
//! ```text
//! minimize ½‖x‖²  subject to  Eᵢᵀx = eᵢ,  Cⱼᵀx ≥ dⱼ
//! ```
//!
//! The identity Hessian keeps the projections simple: with active normals
//! `N`, the primal step direction is `z = (I − N(NᵀN)⁻¹Nᵀ)n` and the dual
//! step `r = (NᵀN)⁻¹Nᵀn`. Violated inequalities are added lowest index first,
//! and ties in the ratio test drop the earliest-added constraint, so runs are
//! reproducible.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpError {
    Infeasible,
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Indices of active inequality constraints at the optimum.
    pub active_inequalities: Vec<usize>,
    pub iterations: usize,
}

/// Least-distance QP. `eq` rows are `(normal, rhs)` equalities, `ineq` rows
/// `(normal, rhs)` with `normalᵀx ≥ rhs`.
pub fn solve_least_distance(
    n: usize,
    eq: &[(DVector<f64>, f64)],
    ineq: &[(DVector<f64>, f64)],
) -> Result<QpSolution, QpError> {
    let mut solver = Solver {
        n,
        x: DVector::zeros(n),
        active: Vec::new(),
        normals: Vec::new(),
        u: Vec::new(),
    };
    let scale = eq
        .iter()
        .chain(ineq)
        .map(|(_, b)| b.abs())
        .fold(1.0, f64::max);
    let tol = 1e-12 * scale;

    for (i, (a, b)) in eq.iter().enumerate() {
        let s = a.dot(&solver.x) - b;
        let (z, r) = solver.directions(a);
        let zz = z.dot(a);
        if z.norm() <= 1e-12 * a.norm().max(1.0) {
            // Dependent on constraints already active.
            if s.abs() <= 1e-10 * scale {
                continue;
            }
            return Err(QpError::Infeasible);
        }
        let t = -s / zz;
        solver.x += &z * t;
        for (uk, rk) in solver.u.iter_mut().zip(r.iter()) {
            *uk -= t * rk;
        }
        solver.push(Constraint::Equality(i), a.clone(), t);
    }

    let limit = 50 * (n + eq.len() + ineq.len()).max(1);
    let mut iterations = 0;
    loop {
        let violated = ineq
            .iter()
            .enumerate()
            .find(|(j, (c, d))| !solver.is_active(Constraint::Inequality(*j)) && c.dot(&solver.x) - d < -tol);
        let Some((p, (np, dp))) = violated else {
            break;
        };
        let mut u_p = 0.0;
        loop {
            iterations += 1;
            if iterations > limit {
                return Err(QpError::IterationLimit(limit));
            }
            let (z, r) = solver.directions(np);
            // Partial step: largest move keeping active inequality multipliers ≥ 0.
            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (k, c) in solver.active.iter().enumerate() {
                if let Constraint::Inequality(_) = c {
                    if r[k] > 1e-14 {
                        let ratio = solver.u[k] / r[k];
                        if ratio < t1 {
                            t1 = ratio;
                            drop = Some(k);
                        }
                    }
                }
            }
            let s = np.dot(&solver.x) - dp;
            let z_norm = z.norm();
            let t2 = if z_norm > 1e-12 * np.norm().max(1.0) {
                -s / z.dot(np)
            } else {
                f64::INFINITY
            };
            if t1.is_infinite() && t2.is_infinite() {
                return Err(QpError::Infeasible);
            }
            if t2.is_infinite() {
                // Pure dual step.
                for (uk, rk) in solver.u.iter_mut().zip(r.iter()) {
                    *uk -= t1 * rk;
                }
                u_p += t1;
                solver.remove(drop.expect("finite t1 has a blocking constraint"));
                continue;
            }
            let t = t1.min(t2);
            solver.x += &z * t;
            for (uk, rk) in solver.u.iter_mut().zip(r.iter()) {
                *uk -= t * rk;
            }
            u_p += t;
            if t2 <= t1 {
                solver.push(Constraint::Inequality(p), np.clone(), u_p);
                break;
            }
            solver.remove(drop.expect("t1 < t2 has a blocking constraint"));
        }
    }

    let active_inequalities = solver
        .active
        .iter()
        .filter_map(|c| match c {
            Constraint::Inequality(j) => Some(*j),
            Constraint::Equality(_) => None,
        })
        .collect();
    Ok(QpSolution {
        x: solver.x,
        active_inequalities,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Constraint {
    Equality(usize),
    Inequality(usize),
}

struct Solver {
    n: usize,
    x: DVector<f64>,
    active: Vec<Constraint>,
    normals: Vec<DVector<f64>>,
    u: Vec<f64>,
}

impl Solver {
    fn is_active(&self, c: Constraint) -> bool {
        self.active.contains(&c)
    }

    fn push(&mut self, c: Constraint, normal: DVector<f64>, multiplier: f64) {
        self.active.push(c);
        self.normals.push(normal);
        self.u.push(multiplier);
    }

    fn remove(&mut self, k: usize) {
        self.active.remove(k);
        self.normals.remove(k);
        self.u.remove(k);
    }

    /// Primal direction `z` and dual direction `r` for adding normal `np`.
    fn directions(&self, np: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let q = self.normals.len();
        if q == 0 {
            return (np.clone(), DVector::zeros(0));
        }
        let mut nmat = DMatrix::zeros(self.n, q);
        for (k, col) in self.normals.iter().enumerate() {
            nmat.set_column(k, col);
        }
        let gram = nmat.transpose() * &nmat;
        let rhs = nmat.transpose() * np;
        let r = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram
                .pseudo_inverse(1e-14)
                .map(|pinv| pinv * &rhs)
                .unwrap_or_else(|_| DVector::zeros(q)),
        };
        let z = np - &nmat * &r;
        (z, r)
    }
}
