//! Flows whose sound speed depends on time only, and the planar stream
//! functions that generate their velocity fields.

use std::sync::Arc;

use crate::fluid::GasParams;
use crate::linalg::Matrix;

use super::ansatz::{FnProfile, SuperpositionAnsatz, WaveGen};
use super::{variant_param, Built, CatalogError, FamilyId, ParamReader, SuperpositionModel, Window};

pub(super) const VARIANTS: &[&str] = &["default", "nilpotent"];

/// Step of the central-difference Hessian used when no analytic one exists.
pub const FD_HESSIAN_STEP: f64 = 1e-5;

/// Scalar function of two variables with an optional analytic Hessian.
pub trait StreamFunction: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;

    /// `[h_xx, h_xy, h_yy]`.
    fn hessian(&self, _x: f64, _y: f64) -> Option<[f64; 3]> {
        None
    }
}

pub(crate) fn fd_hessian(h: &dyn StreamFunction, x: f64, y: f64) -> [f64; 3] {
    let s = FD_HESSIAN_STEP;
    let f = |dx: f64, dy: f64| h.value(x + dx, y + dy);
    let c = f(0.0, 0.0);
    let hxx = (f(s, 0.0) - 2.0 * c + f(-s, 0.0)) / (s * s);
    let hyy = (f(0.0, s) - 2.0 * c + f(0.0, -s)) / (s * s);
    let hxy = (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
    [hxx, hxy, hyy]
}

/// `ψ = -x^n y^(1-n)`, homogeneous of degree one.
#[derive(Debug, Clone, Copy)]
pub struct HomogeneousStream {
    pub n: f64,
}

impl StreamFunction for HomogeneousStream {
    fn value(&self, x: f64, y: f64) -> f64 {
        -signed_pow(x, self.n) * signed_pow(y, 1.0 - self.n)
    }

    fn hessian(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        let n = self.n;
        let k = -n * (n - 1.0);
        Some([
            k * signed_pow(x, n - 2.0) * signed_pow(y, 1.0 - n),
            -k * signed_pow(x, n - 1.0) * signed_pow(y, -n),
            k * signed_pow(x, n) * signed_pow(y, -n - 1.0),
        ])
    }
}

/// `s^p` with integer powers kept exact so negative bases stay valid.
pub(crate) fn signed_pow(s: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        s.powi(p as i32)
    } else {
        s.powf(p)
    }
}

/// `h = y²/(2q) + b(αx³/6 + βx²/2)` with `q = αx + β`; its Monge-Ampère
/// determinant is the constant `b`.
#[derive(Debug, Clone, Copy)]
pub struct TimeStream {
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
}

impl TimeStream {
    fn q(&self, x: f64) -> f64 {
        self.alpha * x + self.beta
    }

    /// `(h_x, h_y)`.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let q = self.q(x);
        [
            -self.alpha * y * y / (2.0 * q * q) + self.b * (0.5 * self.alpha * x * x + self.beta * x),
            y / q,
        ]
    }
}

impl StreamFunction for TimeStream {
    fn value(&self, x: f64, y: f64) -> f64 {
        y * y / (2.0 * self.q(x)) + self.b * (self.alpha * x.powi(3) / 6.0 + self.beta * x * x / 2.0)
    }

    fn hessian(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        let q = self.q(x);
        Some([
            self.alpha * self.alpha * y * y / q.powi(3) + self.b * q,
            -self.alpha * y / (q * q),
            1.0 / q,
        ])
    }
}

/// `a(t) = A1 (1 + p_{k-1} t + ... + p_0 t^k)^(-1/κ)`.
pub fn rankk_sound_speed(k: usize, p: &[f64], a1: f64, kappa: f64, t: f64) -> Result<f64, CatalogError> {
    if p.len() != k {
        return Err(CatalogError::BadParam {
            key: "p".into(),
            reason: format!("expected {k} coefficients, got {}", p.len()),
        });
    }
    let poly = 1.0 + (1..=k).map(|j| p[k - j] * t.powi(j as i32)).sum::<f64>();
    if poly <= 0.0 {
        return Err(CatalogError::Domain(format!("characteristic polynomial {poly} is not positive at t = {t}")));
    }
    Ok(a1 * poly.powf(-1.0 / kappa))
}

fn time_covector(_u: &[f64; 4]) -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

fn time_covector_deriv(_u: &[f64; 4]) -> Matrix {
    Matrix::zeros(4, 4)
}

/// Horizontal velocity `v = (C r1 + h_y, C r2 - h_x)` with `tr Dv = 2C` and
/// `det Dv = C² + b`, carried along particle paths; `a` follows from
/// continuity.
pub(super) fn time_sound_speed(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::RkTimeA)?;
    let nilpotent = variant == "nilpotent";
    let kappa = gas.kappa();
    let amp = p.positive("A1", 1.0)?;
    let (b_def, c_def) = if nilpotent { (0.0, 0.0) } else { (1.0, 1.0) };
    let b = p.real("B1", b_def)?;
    let c = p.real("C1", c_def)?;
    let alpha = p.real("alpha", 0.25)?;
    let beta = p.real("beta", 1.0)?;
    let stream = TimeStream { alpha, beta, b };
    let coeffs = [c * c + b, 2.0 * c];
    let value = move |r: &[f64]| {
        let [hx, hy] = stream.gradient(r[1], r[2]);
        let a = rankk_sound_speed(2, &coeffs, amp, kappa, r[0]).unwrap_or(f64::NAN);
        [a, c * r[1] + hy, c * r[2] - hx, 0.0]
    };
    let jacobian = move |r: &[f64]| {
        let t = r[0];
        let poly = 1.0 + coeffs[1] * t + coeffs[0] * t * t;
        let a = amp * poly.powf(-1.0 / kappa);
        let da = -a / kappa * (coeffs[1] + 2.0 * coeffs[0] * t) / poly;
        let [hxx, hxy, hyy] = stream.hessian(r[1], r[2]).expect("analytic Hessian");
        Matrix::from_rows(&[
            [da, 0.0, 0.0],
            [0.0, c + hxy, hyy],
            [0.0, -hxx, c - hxy],
            [0.0, 0.0, 0.0],
        ])
    };
    let ansatz = SuperpositionAnsatz {
        waves: vec![
            WaveGen::Custom {
                value: time_covector,
                deriv: time_covector_deriv,
            },
            WaveGen::convected(0),
            WaveGen::convected(1),
        ],
        profile: Box::new(FnProfile { value, jacobian }),
    };
    let model = SuperpositionModel::new(ansatz)
        .with_seed(|x| vec![x[0], x[1], x[2]])
        .with_stream(Box::new(stream), b)
        .with_pivots(vec![0, 1, 2]);
    let window = Window::new((0.0, 1.0), [(-1.0, 1.0); 3]);
    // A varying a(t) adds the time direction to the two velocity directions;
    // with B1 = C1 = 0 the velocity gradient is itself rank one.
    let rank = if b == 0.0 && c == 0.0 { 1 } else { 3 };
    Ok(Built::new(&variant, Arc::new(model), rank, 3, window))
}
