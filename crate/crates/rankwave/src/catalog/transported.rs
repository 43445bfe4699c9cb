//! Triple waves where one invariant is the Lagrangian foot point of a
//! particle path, so the solution is not a plain superposition.
//!
//! Foot points come from a fixed-step RK4 integration backwards to `t = 0`
//! together with its variational equation. The step count is fixed, which
//! keeps the computed fields smooth in `(t, x)`.

use std::sync::Arc;

use crate::fluid::{GasParams, StateVec};
use crate::linalg::Matrix;
use crate::solver::{ImplicitPoint, SolverError, WaveAnsatz, CATASTROPHE_TOL};

use super::ansatz::{FnProfile, SuperpositionAnsatz, WaveGen};
use super::profiles::ScalarProfile;
use super::{variant_param, Branch, Built, CatalogError, FamilyId, FamilyModel, ParamReader, SuperpositionModel, Window};

pub(super) const COLUMN_VARIANTS: &[&str] = &["damped", "linear", "algebraic", "algebraic_corrected"];
pub(super) const SWIRL_VARIANTS: &[&str] = &["transported", "printed"];

/// RK4 steps between `t` and `0` for foot-point integration.
pub const FOOT_STEPS: usize = 128;

const SCALAR_TOL: f64 = 1e-14;

/// Both families carry three invariants, but the horizontal velocity is a
/// unit vector and `a` moves with `u3` (v1) or with the angle (v2), so the
/// Jacobi matrix has rank two.
const JACOBIAN_RANK: usize = 2;

/// Damped scalar Newton on `F(r) = 0` given `F` and `F'`.
fn scalar_newton(mut r: f64, mut f: impl FnMut(f64) -> (f64, f64)) -> Result<f64, SolverError> {
    let (mut val, mut der) = f(r);
    for _ in 0..crate::solver::NEWTON_MAX_ITER {
        if !(val.is_finite() && der.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        if val.abs() <= SCALAR_TOL * (1.0 + r.abs()) {
            return Ok(r);
        }
        if der.abs() < CATASTROPHE_TOL {
            return Err(SolverError::NearCatastrophe { cond_det: der });
        }
        let step = val / der;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=crate::solver::MAX_HALVINGS {
            let trial = r - lambda * step;
            let (tv, td) = f(trial);
            if tv.is_finite() && tv.abs() < val.abs() * (1.0 - 1e-4 * lambda) + 1e-300 {
                r = trial;
                val = tv;
                der = td;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            r -= step;
            (val, der) = f(r);
        }
    }
    if val.abs() <= 1e-10 * (1.0 + r.abs()) {
        Ok(r)
    } else {
        Err(SolverError::NoConvergence {
            iterations: crate::solver::NEWTON_MAX_ITER,
            residual: val.abs(),
        })
    }
}

/// Shear angle `g(r2, r3)` with its partial derivatives.
#[derive(Debug, Clone, Copy)]
enum Shear {
    /// `A R^(-1/2) tan y / sqrt(B + tan² y)`, `R = r2² + r3²`, `y = ln(D R)/2`.
    LogTan { amp: f64, b: f64, d: f64 },
    /// `A (1 + exp(tanh r2 + tanh(r3)/2))^(-1/2)`.
    Logistic { amp: f64 },
    /// `A tanh r2 + B tanh r3`.
    TanhSum { a: f64, b: f64 },
}

impl Shear {
    fn eval(&self, r2: f64, r3: f64) -> Result<(f64, f64, f64), SolverError> {
        match *self {
            Self::LogTan { amp, b, d } => {
                let rr = r2 * r2 + r3 * r3;
                let y = 0.5 * (d * rr).abs().ln();
                if y.is_nan() || y.abs() >= std::f64::consts::FRAC_PI_2 || rr == 0.0 {
                    return Err(SolverError::NonFinite);
                }
                let ty = y.tan();
                let q = b + ty * ty;
                let phi = ty / q.sqrt();
                let dphi = b / (q * q.sqrt());
                let g = amp * phi / rr.sqrt();
                let dg_drr = amp * (-0.5 * phi / (rr * rr.sqrt()) + dphi * (1.0 + ty * ty) / (2.0 * rr * rr.sqrt()));
                Ok((g, 2.0 * r2 * dg_drr, 2.0 * r3 * dg_drr))
            }
            Self::Logistic { amp } => {
                let h = r2.tanh() + 0.5 * r3.tanh();
                let e = h.exp();
                let q = 1.0 + e;
                let dg = -0.5 * amp * e / (q * q.sqrt());
                Ok((amp / q.sqrt(), dg * (1.0 - r2.tanh().powi(2)), dg * 0.5 * (1.0 - r3.tanh().powi(2))))
            }
            Self::TanhSum { a, b } => {
                let (t2, t3) = (r2.tanh(), r3.tanh());
                Ok((a * t2 + b * t3, a * (1.0 - t2 * t2), b * (1.0 - t3 * t3)))
            }
        }
    }
}

fn sound_sheet_covector(u: &[f64; 4]) -> [f64; 4] {
    [u[1] * u[1] + u[2] * u[2], -u[1], -u[2], 0.0]
}

fn sound_sheet_deriv(u: &[f64; 4]) -> Matrix {
    let mut d = Matrix::zeros(4, 4);
    d[(0, 1)] = 2.0 * u[1];
    d[(0, 2)] = 2.0 * u[2];
    d[(1, 1)] = -1.0;
    d[(2, 2)] = -1.0;
    d
}

/// Vertical velocity `f(r1) + w0` carried along columns; horizontal
/// velocity a unit vector at angle `g(r2, r3)`.
struct ColumnTransport {
    vertical: ScalarProfile,
    shear: Shear,
    /// Sign of the second velocity component.
    sign: f64,
    a0: f64,
    w0: f64,
    kappa: f64,
    /// Closed-form foot point for linear `f`: `(x_p(0), x_p'(t), α)`.
    linear_foot: Option<(f64, f64, f64)>,
    ansatz: SuperpositionAnsatz,
}

impl ColumnTransport {
    fn speed(&self, r: f64) -> (f64, f64) {
        let (f, df) = self.vertical.eval(r);
        let k = 1.0 + 1.0 / self.kappa;
        (k * f + self.a0 + self.w0, k * df)
    }

    /// `r1` with `G' = 1 - c'(r1) t`.
    fn first_invariant(&self, t: f64, x3: f64) -> Result<(f64, f64), SolverError> {
        let seed = self.speed(-x3).0 * t - x3;
        let r = scalar_newton(seed, |r| {
            let (c, dc) = self.speed(r);
            (r - c * t + x3, 1.0 - dc * t)
        })?;
        Ok((r, 1.0 - self.speed(r).1 * t))
    }

    /// Vertical particle velocity and its `x3` derivative at `(s, z)`.
    fn column_velocity(&self, s: f64, z: f64) -> Result<(f64, f64), SolverError> {
        let (r, gd) = self.first_invariant(s, z)?;
        let (f, df) = self.vertical.eval(r);
        Ok((f + self.w0, -df / gd))
    }

    /// Foot point `z0` and `dz0/dx3`, in closed form when requested and
    /// available.
    fn foot(&self, t: f64, x3: f64, closed: bool) -> Result<(f64, f64), SolverError> {
        if let (true, Some((xp0, dxp, alpha))) = (closed, self.linear_foot) {
            let p = self.kappa / (self.kappa + 1.0);
            let scale = (1.0 - alpha * t).powf(-p);
            return Ok((xp0 + (x3 - xp0 - dxp * t) * scale, scale));
        }
        let h = -t / FOOT_STEPS as f64;
        let (mut s, mut z, mut j) = (t, x3, 1.0);
        for _ in 0..FOOT_STEPS {
            let (v1, d1) = self.column_velocity(s, z)?;
            let (v2, d2) = self.column_velocity(s + 0.5 * h, z + 0.5 * h * v1)?;
            let (v3, d3) = self.column_velocity(s + 0.5 * h, z + 0.5 * h * v2)?;
            let (v4, d4) = self.column_velocity(s + h, z + h * v3)?;
            let j1 = d1 * j;
            let j2 = d2 * (j + 0.5 * h * j1);
            let j3 = d3 * (j + 0.5 * h * j2);
            let j4 = d4 * (j + h * j3);
            z += h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
            j += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
            s += h;
        }
        Ok((z, j))
    }

    fn point(&self, x: [f64; 4], closed_foot: bool) -> Result<ImplicitPoint, CatalogError> {
        let [t, x1, x2, x3] = x;
        let (r1, g1) = self.first_invariant(t, x3)?;
        if g1.abs() < CATASTROPHE_TOL {
            return Err(SolverError::NearCatastrophe { cond_det: g1 }.into());
        }
        let (c1, _) = self.speed(r1);
        let grad_r1 = [c1 / g1, 0.0, 0.0, -1.0 / g1];
        let (f, df) = self.vertical.eval(r1);
        let (r3, j0) = self.foot(t, x3, closed_foot)?;
        let grad_r3 = [-j0 * (f + self.w0), 0.0, 0.0, j0];
        let mut shear_err = None;
        let r2 = scalar_newton(t, |r2| match self.shear.eval(r2, r3) {
            Ok((g, g2, _)) => (
                r2 - t + x1 * g.sin() - x2 * g.cos(),
                1.0 + (x1 * g.cos() + x2 * g.sin()) * g2,
            ),
            Err(e) => {
                shear_err = Some(e);
                (f64::NAN, f64::NAN)
            }
        });
        let r2 = match (r2, shear_err) {
            (Ok(r), _) => r,
            (Err(_), Some(_)) => return Err(CatalogError::Domain("shear angle undefined along the Newton path".into())),
            (Err(e), None) => return Err(e.into()),
        };
        let (g, g2, g3) = self.shear.eval(r2, r3)?;
        let w = x1 * g.cos() + x2 * g.sin();
        let h2 = 1.0 + w * g2;
        let cond_det = g1 * h2;
        if h2.abs() < CATASTROPHE_TOL || cond_det.abs() < CATASTROPHE_TOL {
            return Err(SolverError::NearCatastrophe { cond_det }.into());
        }
        let base = [1.0, -g.sin(), g.cos(), 0.0];
        let grad_r2: [f64; 4] = std::array::from_fn(|i| (base[i] - w * g3 * grad_r3[i]) / h2);
        let grad_g: [f64; 4] = std::array::from_fn(|i| g2 * grad_r2[i] + g3 * grad_r3[i]);
        let mut jac = Matrix::zeros(4, 4);
        for i in 0..4 {
            jac[(0, i)] = df / self.kappa * grad_r1[i];
            jac[(1, i)] = g.cos() * grad_g[i];
            jac[(2, i)] = -self.sign * g.sin() * grad_g[i];
            jac[(3, i)] = df * grad_r1[i];
        }
        Ok(ImplicitPoint {
            x,
            r: vec![r1, r2, r3],
            state: StateVec::from_array([f / self.kappa + self.a0, g.sin(), self.sign * g.cos(), f + self.w0]),
            jac,
            cond_det,
        })
    }
}

impl FamilyModel for ColumnTransport {
    fn evaluate(&self, x: [f64; 4], _branch: Branch, _guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
        self.point(x, false)
    }

    fn ansatz(&self) -> Option<&dyn WaveAnsatz> {
        Some(&self.ansatz)
    }

    fn closed_form(&self, x: [f64; 4], _branch: Branch) -> Option<[f64; 4]> {
        self.linear_foot?;
        self.point(x, true).ok().map(|p| p.fields())
    }
}

/// The printed superposition form: sound wave along x3, a vortex sheet with
/// covector `(|u_h|², -u_h)`, and convection in x3.
fn column_ansatz(vertical: ScalarProfile, shear: Shear, sign: f64, a0: f64, w0: f64, kappa: f64) -> SuperpositionAnsatz {
    let value = move |r: &[f64]| {
        let f = vertical.value(r[0]);
        let g = shear.eval(r[1], r[2]).map(|v| v.0).unwrap_or(f64::NAN);
        [f / kappa + a0, g.sin(), sign * g.cos(), f + w0]
    };
    let jacobian = move |r: &[f64]| {
        let (_, df) = vertical.eval(r[0]);
        let (g, g2, g3) = shear.eval(r[1], r[2]).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        Matrix::from_rows(&[
            [df / kappa, 0.0, 0.0],
            [0.0, g.cos() * g2, g.cos() * g3],
            [0.0, -sign * g.sin() * g2, -sign * g.sin() * g3],
            [df, 0.0, 0.0],
        ])
    };
    SuperpositionAnsatz {
        waves: vec![
            WaveGen::Potential { e: [0.0, 0.0, 1.0] },
            WaveGen::Custom {
                value: sound_sheet_covector,
                deriv: sound_sheet_deriv,
            },
            WaveGen::convected(2),
        ],
        profile: Box::new(FnProfile { value, jacobian }),
    }
}

pub(super) fn column_transport(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R3E1S2S3V1)?;
    let kappa = gas.kappa();
    let linear = variant == "linear";
    let a0 = p.real("a0", if linear { 1.0 } else { 0.0 })?;
    let w0 = p.real("u30", if linear { 0.2 } else { 0.0 })?;
    let amp = p.real("A1", 0.25)?;
    let (vertical, shear) = if linear {
        (
            ScalarProfile::Linear {
                slope: amp,
                offset: p.real("B1", 0.1)?,
            },
            Shear::TanhSum {
                a: p.real("A2", 0.5)?,
                b: p.real("A3", 0.3)?,
            },
        )
    } else {
        let b1 = p.positive("B1", 1.0)?;
        let vertical = ScalarProfile::CoshRoot {
            amp,
            base: 1.0 + b1,
            stiff: b1,
            rate: p.real("C1", 1.0)?,
            center: 0.0,
        };
        let shear = if variant == "damped" {
            Shear::LogTan {
                amp: p.real("A2", 0.5)?,
                b: p.positive("B2", 1.0)?,
                d: p.positive("D1", 1.0)?,
            }
        } else {
            Shear::Logistic {
                amp: p.real("D1", 0.7)?,
            }
        };
        (vertical, shear)
    };
    let sign = if variant == "algebraic" { 1.0 } else { -1.0 };
    let linear_foot = if let ScalarProfile::Linear { slope, offset } = vertical {
        let xp0 = (offset + kappa * a0) / slope;
        Some((xp0, w0 - kappa * a0, (1.0 + 1.0 / kappa) * slope))
    } else {
        None
    };
    let model = ColumnTransport {
        vertical,
        shear,
        sign,
        a0,
        w0,
        kappa,
        linear_foot,
        ansatz: column_ansatz(vertical, shear, sign, a0, w0, kappa),
    };
    let built = match variant.as_str() {
        "damped" => Built::new(
            &variant,
            Arc::new(model),
            JACOBIAN_RANK,
            3,
            Window::new((0.0, 1.0), [(-0.5, 0.5), (-0.5, 0.5), (1.0, 2.0)]),
        )
        .bounded(true),
        "linear" => {
            let blowup = 1.0 / linear_foot.map(|l| l.2).unwrap_or(f64::INFINITY);
            Built::new(&variant, Arc::new(model), JACOBIAN_RANK, 3, Window::new((0.0, 0.5 * blowup), [(-1.0, 1.0); 3]))
                .singular(vec![blowup])
        }
        "algebraic" => Built::new(&variant, Arc::new(model), JACOBIAN_RANK, 3, Window::new((0.0, 1.0), [(-1.0, 1.0); 3]))
            .bounded(true)
            .flagged("printed sign of the second velocity component is inconsistent with the sheet invariant"),
        _ => Built::new(&variant, Arc::new(model), JACOBIAN_RANK, 3, Window::new((0.0, 1.0), [(-1.0, 1.0); 3])).bounded(true),
    };
    Ok(built)
}

fn swirl_sound_covector(u: &[f64; 4]) -> [f64; 4] {
    [u[0], u[2], -u[1], 0.0]
}

fn swirl_sound_deriv(_u: &[f64; 4]) -> Matrix {
    let mut d = Matrix::zeros(4, 4);
    d[(0, 0)] = 1.0;
    d[(1, 2)] = 1.0;
    d[(2, 1)] = -1.0;
    d
}

/// Horizontal velocity `(sin f, -cos f)` rotating with the sound invariant;
/// `u3` is a function of a Lagrangian label transported by that velocity.
struct SwirlTransport {
    angle: ScalarProfile,
    lift: ScalarProfile,
    a0: f64,
    kappa: f64,
    ansatz: SuperpositionAnsatz,
}

impl SwirlTransport {
    /// `r1` and `G' = 1 - f'(t/κ + x_h·u_h)`.
    fn first_invariant(&self, t: f64, x1: f64, x2: f64) -> Result<(f64, f64), SolverError> {
        let resid = |r: f64| {
            let (f, df) = self.angle.eval(r);
            let along = t / self.kappa + x1 * f.sin() - x2 * f.cos();
            (r - (f / self.kappa + self.a0) * t + x1 * f.cos() + x2 * f.sin(), 1.0 - df * along)
        };
        let f0 = self.angle.value(0.0);
        let seed = (f0 / self.kappa + self.a0) * t - x1 * f0.cos() - x2 * f0.sin();
        let r = scalar_newton(seed, resid)?;
        Ok((r, resid(r).1))
    }

    /// Horizontal velocity at `(s, X)` and its 2×2 spatial Jacobian.
    fn velocity(&self, s: f64, p: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2]), SolverError> {
        let (r, gd) = self.first_invariant(s, p[0], p[1])?;
        let (f, df) = self.angle.eval(r);
        let grad = [-f.cos() / gd, -f.sin() / gd];
        let dir = [f.cos() * df, f.sin() * df];
        Ok((
            [f.sin(), -f.cos()],
            [[dir[0] * grad[0], dir[0] * grad[1]], [dir[1] * grad[0], dir[1] * grad[1]]],
        ))
    }

    /// Foot point and `∂X0/∂x_h`.
    fn foot(&self, t: f64, x: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2]), SolverError> {
        let h = -t / FOOT_STEPS as f64;
        let mut s = t;
        let mut p = x;
        let mut j = [[1.0, 0.0], [0.0, 1.0]];
        let add = |a: [f64; 2], b: [f64; 2], c: f64| [a[0] + c * b[0], a[1] + c * b[1]];
        let madd = |a: [[f64; 2]; 2], b: [[f64; 2]; 2], c: f64| {
            [
                [a[0][0] + c * b[0][0], a[0][1] + c * b[0][1]],
                [a[1][0] + c * b[1][0], a[1][1] + c * b[1][1]],
            ]
        };
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ]
        };
        for _ in 0..FOOT_STEPS {
            let (v1, d1) = self.velocity(s, p)?;
            let (v2, d2) = self.velocity(s + 0.5 * h, add(p, v1, 0.5 * h))?;
            let (v3, d3) = self.velocity(s + 0.5 * h, add(p, v2, 0.5 * h))?;
            let (v4, d4) = self.velocity(s + h, add(p, v3, h))?;
            let k1 = mul(d1, j);
            let k2 = mul(d2, madd(j, k1, 0.5 * h));
            let k3 = mul(d3, madd(j, k2, 0.5 * h));
            let k4 = mul(d4, madd(j, k3, h));
            for i in 0..2 {
                p[i] += h / 6.0 * (v1[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            }
            j = madd(j, madd(madd(k1, k4, 1.0), madd(k2, k3, 1.0), 2.0), h / 6.0);
            s += h;
        }
        Ok((p, j))
    }
}

impl FamilyModel for SwirlTransport {
    fn evaluate(&self, x: [f64; 4], _branch: Branch, _guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
        let [t, x1, x2, _] = x;
        let (r1, gd) = self.first_invariant(t, x1, x2)?;
        if gd.abs() < CATASTROPHE_TOL {
            return Err(SolverError::NearCatastrophe { cond_det: gd }.into());
        }
        let (f, df) = self.angle.eval(r1);
        let grad_r1 = [(f / self.kappa + self.a0) / gd, -f.cos() / gd, -f.sin() / gd, 0.0];
        let (foot, j0) = self.foot(t, [x1, x2])?;
        let (r10, g0) = self.first_invariant(0.0, foot[0], foot[1])?;
        let (f0, df0) = self.angle.eval(r10);
        let label = foot[0] * f0.sin() - foot[1] * f0.cos();
        let dlabel = [
            f0.sin() + r10 * df0 * f0.cos() / g0,
            -f0.cos() + r10 * df0 * f0.sin() / g0,
        ];
        let vel = [f.sin(), -f.cos()];
        // ∂X0/∂t = -J0 u_h(t, x).
        let dfoot_dt = [
            -(j0[0][0] * vel[0] + j0[0][1] * vel[1]),
            -(j0[1][0] * vel[0] + j0[1][1] * vel[1]),
        ];
        let grad_label = [
            dlabel[0] * dfoot_dt[0] + dlabel[1] * dfoot_dt[1],
            dlabel[0] * j0[0][0] + dlabel[1] * j0[1][0],
            dlabel[0] * j0[0][1] + dlabel[1] * j0[1][1],
            0.0,
        ];
        let (w, dw) = self.lift.eval(label);
        let mut jac = Matrix::zeros(4, 4);
        for i in 0..4 {
            jac[(0, i)] = df / self.kappa * grad_r1[i];
            jac[(1, i)] = f.cos() * df * grad_r1[i];
            jac[(2, i)] = f.sin() * df * grad_r1[i];
            jac[(3, i)] = dw * grad_label[i];
        }
        Ok(ImplicitPoint {
            x,
            r: vec![r1, label],
            state: StateVec::from_array([f / self.kappa + self.a0, f.sin(), -f.cos(), w]),
            jac,
            cond_det: gd,
        })
    }

    fn ansatz(&self) -> Option<&dyn WaveAnsatz> {
        Some(&self.ansatz)
    }
}

/// The printed superposition form with `u3 = g(r2 cos f + r3 sin f)`.
fn swirl_ansatz(angle: ScalarProfile, lift: ScalarProfile, a0: f64, kappa: f64) -> SuperpositionAnsatz {
    let value = move |r: &[f64]| {
        let f = angle.value(r[0]);
        let s = r[1] * f.cos() + r[2] * f.sin();
        [f / kappa + a0, f.sin(), -f.cos(), lift.value(s)]
    };
    let jacobian = move |r: &[f64]| {
        let (f, df) = angle.eval(r[0]);
        let s = r[1] * f.cos() + r[2] * f.sin();
        let (_, dw) = lift.eval(s);
        let ds_df = -r[1] * f.sin() + r[2] * f.cos();
        Matrix::from_rows(&[
            [df / kappa, 0.0, 0.0],
            [f.cos() * df, 0.0, 0.0],
            [f.sin() * df, 0.0, 0.0],
            [dw * ds_df * df, dw * f.cos(), dw * f.sin()],
        ])
    };
    SuperpositionAnsatz {
        waves: vec![
            WaveGen::Custom {
                value: swirl_sound_covector,
                deriv: swirl_sound_deriv,
            },
            WaveGen::Rotational { ell: [0.0, 1.0, 0.0] },
            WaveGen::convected(0),
        ],
        profile: Box::new(FnProfile { value, jacobian }),
    }
}

pub(super) fn swirl_transport(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R3E1S2S3V2)?;
    let kappa = gas.kappa();
    let depth = p.real("B1", 0.5)?;
    if depth.abs() >= 1.0 {
        return Err(CatalogError::constraint("|B1| < 1", format!("B1 = {depth}")));
    }
    let angle = ScalarProfile::Periodic {
        amp: p.real("A1", 0.5)?,
        depth,
        freq: p.real("C1", 1.0)?,
    };
    let lift = ScalarProfile::Tanh {
        amp: p.real("A2", 1.0)?,
        rate: 1.0,
    };
    let a0 = p.real("a0", 1.0)?;
    let window = Window::new((0.0, 1.5), [(-1.0, 1.0); 3]);
    let built = if variant == "transported" {
        let model = SwirlTransport {
            angle,
            lift,
            a0,
            kappa,
            ansatz: swirl_ansatz(angle, lift, a0, kappa),
        };
        Built::new(&variant, Arc::new(model), JACOBIAN_RANK, 2, window)
    } else {
        let model = SuperpositionModel::new(swirl_ansatz(angle, lift, a0, kappa));
        Built::new(&variant, Arc::new(model), JACOBIAN_RANK, 3, window)
            .flagged("printed vertical velocity is not transported by the horizontal flow")
    };
    Ok(built.bounded(true))
}
