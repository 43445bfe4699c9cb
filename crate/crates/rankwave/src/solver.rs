//! Newton evaluation of implicitly defined solutions `u = f(r)` with
//! `r^A = λ^A_i(u) x^i`, and assembly of their exact first derivatives.

use serde::Serialize;
use thiserror::Error;

use crate::fluid::StateVec;
use crate::linalg::{self, LinalgError, Matrix};

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;
pub const MAX_HALVINGS: usize = 20;
/// `|det(I - r_u f_r)|` below this aborts the solve.
pub const CATASTROPHE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("implicit-function determinant {cond_det:e} is too small (gradient catastrophe)")]
    NearCatastrophe { cond_det: f64 },
    #[error("non-finite value encountered while solving")]
    NonFinite,
    #[error("initial guess has length {got}, expected {expected}")]
    GuessLength { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A wave superposition ansatz: a profile `f: R^k -> R^4` together with
/// `k` covector fields `λ^A(u)` on state space.
pub trait WaveAnsatz: Send + Sync {
    fn wave_count(&self) -> usize;

    fn profile(&self, r: &[f64]) -> [f64; 4];

    /// `∂f^α/∂r^A` as a 4×k matrix.
    fn profile_jac(&self, r: &[f64]) -> Matrix;

    /// Covectors `λ^A_i(u)` as the rows of a k×4 matrix.
    fn covectors(&self, u: &[f64; 4]) -> Matrix;

    /// For each wave, the 4×4 matrix `∂λ^A_i/∂u^α` (rows `i`, columns `α`).
    fn covector_derivs(&self, u: &[f64; 4]) -> Vec<Matrix>;
}

/// An ansatz pinned at one spacetime point `x = (t, x1, x2, x3)`.
#[derive(Clone, Copy)]
pub struct ImplicitProblem<'a> {
    pub ansatz: &'a dyn WaveAnsatz,
    pub x: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicitPoint {
    pub x: [f64; 4],
    pub r: Vec<f64>,
    pub state: StateVec,
    /// `∂u^α/∂x^i`, rows `α` over `(a, u1, u2, u3)`, columns over `(t, x1, x2, x3)`.
    pub jac: Matrix,
    pub cond_det: f64,
}

impl ImplicitPoint {
    pub fn fields(&self) -> [f64; 4] {
        self.state.to_array()
    }
}

/// `r_u[A, α] = Σ_i ∂λ^A_i/∂u^α x^i`.
fn invariant_sensitivity(ansatz: &dyn WaveAnsatz, u: &[f64; 4], x: &[f64; 4]) -> Matrix {
    let derivs = ansatz.covector_derivs(u);
    let mut ru = Matrix::zeros(derivs.len(), 4);
    for (a, d) in derivs.iter().enumerate() {
        for alpha in 0..4 {
            ru[(a, alpha)] = (0..4).map(|i| d[(i, alpha)] * x[i]).sum();
        }
    }
    ru
}

fn newton_residual(ansatz: &dyn WaveAnsatz, r: &[f64], x: &[f64; 4]) -> Vec<f64> {
    let u = ansatz.profile(r);
    let lam = ansatz.covectors(&u);
    let lx = lam.mul_vec(x);
    r.iter().zip(lx).map(|(ri, li)| ri - li).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Default starting point: freeze the covectors at `f(0)`.
pub fn default_guess(prob: &ImplicitProblem<'_>) -> Vec<f64> {
    let k = prob.ansatz.wave_count();
    let u0 = prob.ansatz.profile(&vec![0.0; k]);
    prob.ansatz.covectors(&u0).mul_vec(&prob.x)
}

/// `I_k - r_u f_r`.
fn bracket(prob: &ImplicitProblem<'_>, r: &[f64], u: &[f64; 4]) -> (Matrix, Matrix, Matrix) {
    let k = r.len();
    let fr = prob.ansatz.profile_jac(r);
    let ru = invariant_sensitivity(prob.ansatz, u, &prob.x);
    let m = &Matrix::identity(k) - &(&ru * &fr);
    (m, fr, ru)
}

pub fn solve_point(prob: &ImplicitProblem<'_>, guess: Option<&[f64]>) -> Result<ImplicitPoint, SolverError> {
    let k = prob.ansatz.wave_count();
    let mut r = match guess {
        Some(g) if g.len() != k => {
            return Err(SolverError::GuessLength {
                expected: k,
                got: g.len(),
            })
        }
        Some(g) => g.to_vec(),
        None => default_guess(prob),
    };
    let mut res = newton_residual(prob.ansatz, &r, &prob.x);
    let mut norm = max_abs(&res);
    let mut iterations = 0;
    while norm > NEWTON_TOL {
        if !norm.is_finite() {
            return Err(SolverError::NonFinite);
        }
        if iterations == NEWTON_MAX_ITER {
            return Err(SolverError::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let step = newton_step(prob, &r, &res)?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = r.iter().zip(&step).map(|(ri, si)| ri - scale * si).collect();
            let trial_res = newton_residual(prob.ansatz, &trial, &prob.x);
            let trial_norm = max_abs(&trial_res);
            if trial_norm.is_finite() && trial_norm < norm {
                (r, res, norm) = (trial, trial_res, trial_norm);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NoConvergence {
                iterations,
                residual: norm,
            });
        }
    }
    // A couple of full steps past the tolerance bring r to rounding level,
    // which keeps finite-difference probes of the fields clean.
    for _ in 0..2 {
        let Ok(step) = newton_step(prob, &r, &res) else { break };
        let trial: Vec<f64> = r.iter().zip(&step).map(|(ri, si)| ri - si).collect();
        let trial_res = newton_residual(prob.ansatz, &trial, &prob.x);
        let trial_norm = max_abs(&trial_res);
        if trial_norm.is_nan() || trial_norm >= norm {
            break;
        }
        (r, res, norm) = (trial, trial_res, trial_norm);
    }
    assemble(prob, r)
}

fn newton_step(prob: &ImplicitProblem<'_>, r: &[f64], res: &[f64]) -> Result<Vec<f64>, SolverError> {
    let u = prob.ansatz.profile(r);
    let (m, _, _) = bracket(prob, r, &u);
    let d = linalg::det(&m)?;
    if d.abs() < CATASTROPHE_TOL {
        return Err(SolverError::NearCatastrophe { cond_det: d });
    }
    Ok(linalg::solve(&m, res)?)
}

fn assemble(prob: &ImplicitProblem<'_>, r: Vec<f64>) -> Result<ImplicitPoint, SolverError> {
    let u = prob.ansatz.profile(&r);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let (m, fr, _) = bracket(prob, &r, &u);
    let cond_det = linalg::det(&m)?;
    if cond_det.abs() < CATASTROPHE_TOL {
        return Err(SolverError::NearCatastrophe { cond_det });
    }
    let lam = prob.ansatz.covectors(&u);
    let jac = &fr * &linalg::inverse(&m)?.try_mul(&lam)?;
    Ok(ImplicitPoint {
        x: prob.x,
        r,
        state: StateVec::from_array(u),
        jac,
        cond_det,
    })
}

/// Jacobi matrix in the q-dimensional form `(I_4 - f_r r_u)^{-1} f_r λ`.
pub fn jacobi_matrix(pt: &ImplicitPoint, prob: &ImplicitProblem<'_>) -> Result<Matrix, SolverError> {
    let u = pt.state.to_array();
    let fr = prob.ansatz.profile_jac(&pt.r);
    let ru = invariant_sensitivity(prob.ansatz, &u, &prob.x);
    let m = &Matrix::identity(4) - &(&fr * &ru);
    let d = linalg::det(&m)?;
    if d.abs() < CATASTROPHE_TOL {
        return Err(SolverError::NearCatastrophe { cond_det: d });
    }
    let lam = prob.ansatz.covectors(&u);
    Ok(&linalg::inverse(&m)? * &(&fr * &lam))
}

/// Jacobi matrix in the reduced k-dimensional form `f_r (I_k - r_u f_r)^{-1} λ`.
pub fn jacobi_matrix_reduced(pt: &ImplicitPoint, prob: &ImplicitProblem<'_>) -> Result<Matrix, SolverError> {
    let u = pt.state.to_array();
    let (m, fr, _) = bracket(prob, &pt.r, &u);
    let d = linalg::det(&m)?;
    if d.abs() < CATASTROPHE_TOL {
        return Err(SolverError::NearCatastrophe { cond_det: d });
    }
    let lam = prob.ansatz.covectors(&u);
    Ok(&fr * &(&linalg::inverse(&m)? * &lam))
}

/// Both determinant forms of the implicit-function condition:
/// `det(I_k - r_u f_r)` and `det(I_4 - f_r r_u)`.
pub fn implicit_condition_forms(pt: &ImplicitPoint, prob: &ImplicitProblem<'_>) -> (f64, f64) {
    let u = pt.state.to_array();
    let (m, fr, ru) = bracket(prob, &pt.r, &u);
    let small = linalg::det(&m).unwrap_or(f64::NAN);
    let large = linalg::det(&(&Matrix::identity(4) - &(&fr * &ru))).unwrap_or(f64::NAN);
    (small, large)
}

pub fn implicit_condition(pt: &ImplicitPoint) -> f64 {
    pt.cond_det
}

pub fn solution_rank(pt: &ImplicitPoint, rel_tol: f64) -> usize {
    linalg::numerical_rank(&pt.jac, rel_tol)
}
