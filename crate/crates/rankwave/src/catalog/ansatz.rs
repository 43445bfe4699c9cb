//! Building blocks for superposition ansätze: covector generators and a
//! wrapper turning a profile map into a [`WaveAnsatz`].

use crate::linalg::{dot, Matrix};
use crate::solver::WaveAnsatz;

use super::profiles::ScalarProfile;

/// A covector field `λ(u)` on state space.
#[derive(Clone, Copy)]
pub enum WaveGen {
    /// Sound wave along `e`: `(a + e·u, -e)`.
    Potential { e: [f64; 3] },
    /// Vortex/entropy wave with normal `ℓ`: `(u·ℓ, -ℓ)`.
    Rotational { ell: [f64; 3] },
    /// Anything else, given by value and derivative functions.
    Custom {
        value: fn(&[f64; 4]) -> [f64; 4],
        deriv: fn(&[f64; 4]) -> Matrix,
    },
}

impl WaveGen {
    pub fn covector(&self, u: &[f64; 4]) -> [f64; 4] {
        match self {
            Self::Potential { e } => [u[0] + dot(e, &u[1..]), -e[0], -e[1], -e[2]],
            Self::Rotational { ell } => [dot(ell, &u[1..]), -ell[0], -ell[1], -ell[2]],
            Self::Custom { value, .. } => value(u),
        }
    }

    /// `∂λ_i/∂u^α`, rows `i`, columns `α`.
    pub fn derivative(&self, u: &[f64; 4]) -> Matrix {
        match self {
            Self::Potential { e } => {
                let mut d = Matrix::zeros(4, 4);
                d[(0, 0)] = 1.0;
                for j in 0..3 {
                    d[(0, j + 1)] = e[j];
                }
                d
            }
            Self::Rotational { ell } => {
                let mut d = Matrix::zeros(4, 4);
                for j in 0..3 {
                    d[(0, j + 1)] = ell[j];
                }
                d
            }
            Self::Custom { deriv, .. } => deriv(u),
        }
    }

    /// `(-u_j, e_j)`: the vortex wave whose invariant is `x_j - u_j t`.
    pub fn convected(axis: usize) -> Self {
        let mut ell = [0.0; 3];
        ell[axis] = -1.0;
        Self::Rotational { ell }
    }
}

/// Profile map `r ↦ u` with its Jacobian.
pub trait ProfileMap: Send + Sync {
    fn value(&self, r: &[f64]) -> [f64; 4];
    /// 4×k
    fn jacobian(&self, r: &[f64]) -> Matrix;
}

pub struct SuperpositionAnsatz {
    pub waves: Vec<WaveGen>,
    pub profile: Box<dyn ProfileMap>,
}

impl WaveAnsatz for SuperpositionAnsatz {
    fn wave_count(&self) -> usize {
        self.waves.len()
    }

    fn profile(&self, r: &[f64]) -> [f64; 4] {
        self.profile.value(r)
    }

    fn profile_jac(&self, r: &[f64]) -> Matrix {
        self.profile.jacobian(r)
    }

    fn covectors(&self, u: &[f64; 4]) -> Matrix {
        let rows: Vec<[f64; 4]> = self.waves.iter().map(|w| w.covector(u)).collect();
        Matrix::from_rows(&rows)
    }

    fn covector_derivs(&self, u: &[f64; 4]) -> Vec<Matrix> {
        self.waves.iter().map(|w| w.derivative(u)).collect()
    }
}

/// Generic profile defined by closures, used for one-off families.
pub struct FnProfile<V, J>
where
    V: Fn(&[f64]) -> [f64; 4] + Send + Sync,
    J: Fn(&[f64]) -> Matrix + Send + Sync,
{
    pub value: V,
    pub jacobian: J,
}

impl<V, J> ProfileMap for FnProfile<V, J>
where
    V: Fn(&[f64]) -> [f64; 4] + Send + Sync,
    J: Fn(&[f64]) -> Matrix + Send + Sync,
{
    fn value(&self, r: &[f64]) -> [f64; 4] {
        (self.value)(r)
    }

    fn jacobian(&self, r: &[f64]) -> Matrix {
        (self.jacobian)(r)
    }
}

/// One summand `coeff · shape(r[invariant])` of a [`SeparableProfile`].
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub invariant: usize,
    pub shape: ScalarProfile,
    pub coeff: [f64; 4],
}

/// `f(r) = base + Σ coeff_j · shape_j(r[invariant_j])`.
#[derive(Debug, Clone)]
pub struct SeparableProfile {
    pub base: [f64; 4],
    pub terms: Vec<Term>,
    pub invariants: usize,
}

impl SeparableProfile {
    pub fn new(invariants: usize, base: [f64; 4]) -> Self {
        Self {
            base,
            terms: Vec::new(),
            invariants,
        }
    }

    pub fn term(mut self, invariant: usize, shape: ScalarProfile, coeff: [f64; 4]) -> Self {
        assert!(invariant < self.invariants, "term refers to a missing invariant");
        self.terms.push(Term { invariant, shape, coeff });
        self
    }
}

impl ProfileMap for SeparableProfile {
    fn value(&self, r: &[f64]) -> [f64; 4] {
        let mut out = self.base;
        for t in &self.terms {
            let v = t.shape.value(r[t.invariant]);
            for (o, c) in out.iter_mut().zip(t.coeff) {
                *o += c * v;
            }
        }
        out
    }

    fn jacobian(&self, r: &[f64]) -> Matrix {
        let mut j = Matrix::zeros(4, self.invariants);
        for t in &self.terms {
            let (_, d) = t.shape.eval(r[t.invariant]);
            for alpha in 0..4 {
                j[(alpha, t.invariant)] += t.coeff[alpha] * d;
            }
        }
        j
    }
}
