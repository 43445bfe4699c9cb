//! Isentropic compressible flow written as a first-order system in the
//! sound speed `a` and velocity `u`:
//!
//! ```text
//! a_t + u·∇a + a div(u) / κ = 0
//! u_t + (u·∇)u + κ a ∇a   = 0,      κ = 2 / (γ - 1)
//! ```
//!
//! Covectors on spacetime are stored as `[λ0, λ1, λ2, λ3]`, pairing with
//! `(t, x1, x2, x3)`.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, cross, dot, norm, Matrix};

/// Unit vectors are accepted within this distance of norm one ...
pub const UNIT_TOL: f64 = 1e-12;
/// ... and silently renormalised when within this one.
pub const UNIT_RENORM_TOL: f64 = 1e-9;
const KERNEL_REL_TOL: f64 = 1e-8;
const ROOT_TOL: f64 = 1e-8;

pub type Covector = [f64; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("adiabatic exponent must exceed 1, got {0}")]
    Gamma(f64),
    #[error("sound speed must be positive and finite, got {0}")]
    SoundSpeed(f64),
    #[error("state components must be finite")]
    NonFinite,
    #[error("direction has norm {0}, expected a unit vector")]
    NotUnit(f64),
    #[error("epsilon must be +1 or -1, got {0}")]
    Epsilon(i32),
    #[error("direction vectors are parallel, so the rotational wave is degenerate")]
    ParallelDirections,
    #[error("covector is not a root of the dispersion relation (relative residual {0:e})")]
    NotCharacteristic(f64),
    #[error("wave covectors are linearly dependent")]
    DegenerateWaves,
    #[error("at most 3 waves are supported, got {0}")]
    TooManyWaves(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasParams {
    gamma: f64,
    kappa: f64,
}

impl GasParams {
    pub fn new(gamma: f64) -> Result<Self, FluidError> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(FluidError::Gamma(gamma));
        }
        Ok(Self {
            gamma,
            kappa: 2.0 / (gamma - 1.0),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Default for GasParams {
    /// Monatomic gas, γ = 5/3 and κ = 3.
    fn default() -> Self {
        Self {
            gamma: 5.0 / 3.0,
            kappa: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateVec {
    pub a: f64,
    pub u: [f64; 3],
}

impl StateVec {
    pub fn new(a: f64, u: [f64; 3]) -> Result<Self, FluidError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(FluidError::SoundSpeed(a));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(FluidError::NonFinite);
        }
        Ok(Self { a, u })
    }

    /// Unchecked conversion from `[a, u1, u2, u3]`.
    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            a: v[0],
            u: [v[1], v[2], v[3]],
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.u[0], self.u[1], self.u[2]]
    }

    pub fn magnitude(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveKind {
    Potential { epsilon: i32, e: [f64; 3] },
    Rotational { e: [f64; 3], m: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveVector {
    pub lambda0: f64,
    pub lam: [f64; 3],
    pub kind: WaveKind,
}

impl WaveVector {
    pub fn covector(&self) -> Covector {
        [self.lambda0, self.lam[0], self.lam[1], self.lam[2]]
    }
}

/// Validates (and, within [`UNIT_RENORM_TOL`], renormalises) a direction.
pub fn unit_vector(e: [f64; 3]) -> Result<[f64; 3], FluidError> {
    let n = norm(&e);
    if (n - 1.0).abs() <= UNIT_TOL {
        Ok(e)
    } else if (n - 1.0).abs() <= UNIT_RENORM_TOL {
        Ok([e[0] / n, e[1] / n, e[2] / n])
    } else {
        Err(FluidError::NotUnit(n))
    }
}

/// The spatial coefficient matrices `A^1, A^2, A^3` of the system
/// `u_t + A^i u_{x_i} = 0` in the variables `(a, u1, u2, u3)`.
pub fn coefficient_matrices(state: &StateVec, gas: &GasParams) -> [Matrix; 3] {
    let kappa = gas.kappa();
    std::array::from_fn(|i| {
        let mut m = Matrix::zeros(4, 4);
        for d in 0..4 {
            m[(d, d)] = state.u[i];
        }
        m[(0, i + 1)] = state.a / kappa;
        m[(i + 1, 0)] = kappa * state.a;
        m
    })
}

/// `λ0 I + λi A^i`.
pub fn wave_matrix(state: &StateVec, covector: &Covector, gas: &GasParams) -> Matrix {
    let mats = coefficient_matrices(state, gas);
    let mut w = Matrix::identity(4).scale(covector[0]);
    for (i, a) in mats.iter().enumerate() {
        w = &w + &a.scale(covector[i + 1]);
    }
    w
}

/// Factorised dispersion polynomial `(λ0 + u·λ)^2 [(λ0 + u·λ)^2 - a^2 |λ|^2]`,
/// equal to `det(λ0 I + λi A^i)`.
pub fn dispersion_det(state: &StateVec, covector: &Covector, _gas: &GasParams) -> f64 {
    let lam = [covector[1], covector[2], covector[3]];
    let doppler = covector[0] + dot(&state.u, &lam);
    let d2 = doppler * doppler;
    d2 * (d2 - state.a * state.a * dot(&lam, &lam))
}

/// Natural magnitude of the dispersion polynomial, used to make residuals
/// relative: `(|λ0| + (|u| + a)|λ|)^4`.
pub fn dispersion_scale(state: &StateVec, covector: &Covector) -> f64 {
    let lam = norm(&covector[1..]);
    (covector[0].abs() + (norm(&state.u) + state.a) * lam).powi(4)
}

pub fn potential_wave(state: &StateVec, e: [f64; 3], epsilon: i32) -> Result<WaveVector, FluidError> {
    if epsilon != 1 && epsilon != -1 {
        return Err(FluidError::Epsilon(epsilon));
    }
    let e = unit_vector(e)?;
    Ok(WaveVector {
        lambda0: epsilon as f64 * state.a + dot(&state.u, &e),
        lam: [-e[0], -e[1], -e[2]],
        kind: WaveKind::Potential { epsilon, e },
    })
}

pub fn rotational_wave(state: &StateVec, e: [f64; 3], m: [f64; 3]) -> Result<WaveVector, FluidError> {
    let e = unit_vector(e)?;
    let ell = cross(&e, &m);
    if norm(&ell) <= 1e-12 * norm(&m).max(1.0) {
        return Err(FluidError::ParallelDirections);
    }
    Ok(WaveVector {
        lambda0: dot(&state.u, &ell),
        lam: [-ell[0], -ell[1], -ell[2]],
        kind: WaveKind::Rotational { e, m },
    })
}

/// Orthonormal basis of `ker(λ0 I + λi A^i)`.
pub fn wave_kernel(
    state: &StateVec,
    covector: &Covector,
    gas: &GasParams,
) -> Result<Vec<[f64; 4]>, FluidError> {
    let rel = dispersion_det(state, covector, gas).abs() / dispersion_scale(state, covector).max(1e-300);
    if rel > ROOT_TOL {
        return Err(FluidError::NotCharacteristic(rel));
    }
    let w = wave_matrix(state, covector, gas);
    Ok(linalg::null_space(&w, KERNEL_REL_TOL)
        .into_iter()
        .map(|v| [v[0], v[1], v[2], v[3]])
        .collect())
}

/// Vectors annihilated by every wave covector of a set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalFrame {
    pub xi: Vec<[f64; 4]>,
}

pub fn orthogonal_frame(waves: &[Covector]) -> Result<OrthogonalFrame, FluidError> {
    let k = waves.len();
    if k > 3 {
        return Err(FluidError::TooManyWaves(k));
    }
    if k == 0 {
        return Ok(OrthogonalFrame {
            xi: (0..4)
                .map(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
                .collect(),
        });
    }
    let m = Matrix::from_rows(waves);
    if linalg::numerical_rank(&m, KERNEL_REL_TOL) < k {
        return Err(FluidError::DegenerateWaves);
    }
    let basis = linalg::null_space(&m, KERNEL_REL_TOL);
    if basis.len() != 4 - k {
        return Err(FluidError::DegenerateWaves);
    }
    Ok(OrthogonalFrame {
        xi: basis.into_iter().map(|v| [v[0], v[1], v[2], v[3]]).collect(),
    })
}
