//! Jacobi elliptic functions by the descending Landen transformation.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use thiserror::Error;

const AGM_TOL: f64 = 1e-15;
const HYPERBOLIC_BAND: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("squared modulus {0} lies outside [0, 1]")]
    ModulusOutOfRange(f64),
    #[error("argument must be finite")]
    NonFiniteArgument,
}

/// Elliptic modulus `k`; the functions depend only on `m = k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticModulus {
    k: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, SpecialFnError> {
        Self::from_parameter(k * k).map(|_| Self { k })
    }

    /// Builds the modulus from its square `m = k^2`.
    pub fn from_parameter(m: f64) -> Result<Self, SpecialFnError> {
        if !(0.0..=1.0).contains(&m) {
            return Err(SpecialFnError::ModulusOutOfRange(m));
        }
        Ok(Self { k: m.sqrt() })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn parameter(&self) -> f64 {
        self.k * self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

pub fn jacobi_sn_cn_dn(u: f64, modulus: EllipticModulus) -> Result<JacobiTriple, SpecialFnError> {
    if !u.is_finite() {
        return Err(SpecialFnError::NonFiniteArgument);
    }
    let m = modulus.parameter();
    if m == 0.0 {
        return Ok(JacobiTriple {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        });
    }
    if 1.0 - m < HYPERBOLIC_BAND {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }

    // Forward AGM sweep, keeping c_n / a_n for the backward recurrence.
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut ratios = Vec::with_capacity(16);
    loop {
        let c = 0.5 * (a - b);
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        ratios.push(c / a);
        if c.abs() < AGM_TOL {
            break;
        }
    }

    let mut phi = (ratios.len() as f64).exp2() * a * u;
    for ratio in ratios.iter().rev() {
        phi = 0.5 * (phi + (ratio * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // 1 - m sn^2 written as a sum of nonnegative terms.
    let dn = ((1.0 - m) + m * cn * cn).sqrt();
    Ok(JacobiTriple { sn, cn, dn })
}

/// Complete elliptic integral of the first kind, `K(k)`, via the AGM.
pub fn complete_elliptic_k(modulus: EllipticModulus) -> f64 {
    let m = modulus.parameter();
    if m >= 1.0 {
        return f64::INFINITY;
    }
    let (mut a, mut b) = (1.0_f64, (1.0 - m).sqrt());
    while (a - b).abs() > AGM_TOL * a {
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    FRAC_PI_2 / a
}
