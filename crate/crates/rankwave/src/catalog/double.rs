//! Families whose Jacobi matrix has rank two.

use std::sync::Arc;

use crate::fluid::GasParams;
use crate::linalg::{cross, dot, Matrix};
use crate::special::{jacobi_sn_cn_dn, EllipticModulus};

use super::ansatz::{FnProfile, ProfileMap, SeparableProfile, SuperpositionAnsatz, WaveGen};
use super::profiles::ScalarProfile;
use super::time_only::{signed_pow, HomogeneousStream};
use super::{
    blowup_times, sound_box_center, variant_param, Branch, Built, CatalogError, FamilyId, ParamReader,
    SuperpositionModel, Window,
};

pub(super) const SOUND_SOUND_VARIANTS: &[&str] = &["linear", "kink"];
pub(super) const SOUND_VORTEX_VARIANTS: &[&str] = &["soliton", "trig"];
pub(super) const MONGE_AMPERE_VARIANTS: &[&str] = &["n2", "npower"];
pub(super) const ADDITIVE_VARIANTS: &[&str] = &["sech", "kink"];

fn with_kappa(kappa: f64, e: [f64; 3]) -> [f64; 4] {
    [1.0, kappa * e[0], kappa * e[1], kappa * e[2]]
}

/// Nonscattering sound waves need `e1·e2 = -1/κ`.
pub(super) fn check_sound_angle(name: &str, a: [f64; 3], b: [f64; 3], kappa: f64) -> Result<(), CatalogError> {
    let gap = dot(&a, &b) + 1.0 / kappa;
    if gap.abs() > 1e-10 {
        return Err(CatalogError::constraint(
            name,
            format!("direction cosine {} differs from -1/kappa by {gap:e}", dot(&a, &b)),
        ));
    }
    Ok(())
}

/// Unit vector in the x1-x2 plane at angle `acos(-1/κ)` from the x1 axis.
pub(super) fn default_partner(kappa: f64) -> [f64; 3] {
    let c = -1.0 / kappa;
    [c, (1.0 - c * c).sqrt(), 0.0]
}

pub(super) fn sound_sound(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2E1E2)?;
    let kappa = gas.kappa();
    let e1 = p.unit("e1", [1.0, 0.0, 0.0])?;
    let e2 = p.unit("e2", default_partner(kappa))?;
    check_sound_angle("e1.e2 = -1/kappa", e1, e2, kappa)?;
    let amps = [p.real("A1", 0.25)?, p.real("A2", 0.25)?];
    let shapes = if variant == "linear" {
        amps.map(|a| ScalarProfile::Linear { slope: a, offset: 0.0 })
    } else {
        [
            ScalarProfile::Kink {
                amp: amps[0],
                stiff: p.positive("B1", 1.0)?,
            },
            ScalarProfile::Kink {
                amp: amps[1],
                stiff: p.positive("B2", 1.0)?,
            },
        ]
    };
    let profile = SeparableProfile::new(2, [0.0; 4])
        .term(0, shapes[0], with_kappa(kappa, e1))
        .term(1, shapes[1], with_kappa(kappa, e2));
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::Potential { e: e1 }, WaveGen::Potential { e: e2 }],
        profile: Box::new(profile),
    };
    let mut model = SuperpositionModel::new(ansatz);
    if variant == "linear" {
        let dirs = [e1, e2];
        model = model.with_closed_form(move |x, _| {
            let mut u = [0.0; 4];
            let mut rs = vec![0.0; 2];
            for i in 0..2 {
                let r = dot(&dirs[i], &x[1..]) / ((1.0 + kappa) * amps[i] * x[0] - 1.0);
                rs[i] = r;
                let ai = amps[i] * r;
                u[0] += ai;
                for j in 0..3 {
                    u[j + 1] += kappa * ai * dirs[i][j];
                }
            }
            Some((u, Some(rs)))
        });
    }
    let singular = blowup_times(&amps.map(|a| (1.0 + kappa) * a));
    let window = Window::centered((0.0, half_first(&singular)), sound_box_center(&[e1, e2], 2.5), 0.5);
    Ok(Built::new(&variant, Arc::new(model), 2, 2, window)
        .singular(singular)
        .bounded(variant == "kink"))
}

/// Half the first positive singular time, or 1 when there is none.
pub(super) fn half_first(times: &[f64]) -> f64 {
    times.iter().copied().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min).min(2.0) * 0.5
}

pub(super) fn sound_vortex(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2E1S2)?;
    let kappa = gas.kappa();
    let phi = std::f64::consts::FRAC_PI_6;
    let e = p.unit("e1", [phi.cos(), phi.sin(), 0.0])?;
    let c1 = p.real("C1", 1.0)?;
    let c2 = p.real("C2", 1.0)?;
    let tilt = c1 * e[0] - e[2];
    if e[1].abs() < 1e-12 || tilt.abs() < 1e-12 {
        return Err(CatalogError::constraint(
            "e1_2 != 0 and C1 e1_1 != e1_3",
            format!("e1 = {e:?}, C1 = {c1}"),
        ));
    }
    let normal = [
        e[0] * e[2] + c1 * (1.0 - e[0] * e[0]),
        e[1] * (e[2] - c1 * e[0]),
        -(1.0 - e[2] * e[2] + c1 * e[0] * e[2]),
    ];
    let slope = -(c1 * e[2] + e[0]) / e[1];
    let shift = -c2 / (e[1] * tilt);
    let soliton = variant == "soliton";
    let a0 = p.real("a0", if soliton { 0.5 } else { 0.0 })?;
    let amp1 = p.real("A1", 0.25)?;
    let amp2 = p.real("A2", 0.5)?;
    let (sound, swirl, blowup) = if soliton {
        let b1 = p.positive("B1", 1.0)?;
        let b2 = p.positive("B2", 1.0)?;
        let d2 = p.real("D2", 1.0)?;
        (
            ScalarProfile::Bump {
                amp: amp1,
                stiff: b1,
                center: 1.0,
            },
            ScalarProfile::CoshRoot {
                amp: amp2,
                base: 1.0,
                stiff: b2,
                rate: d2,
                center: 1.0,
            },
            // Steepening time of the characteristic carrying r = 0.
            (1.0 + b1).powf(1.5) / ((1.0 + kappa) * amp1 * b1),
        )
    } else {
        (
            ScalarProfile::Linear { slope: amp1, offset: 0.0 },
            ScalarProfile::Sech { amp: amp2, rate: 1.0 },
            1.0 / ((1.0 + kappa) * amp1),
        )
    };
    let profile = SeparableProfile::new(2, [a0, 0.0, shift, 0.0])
        .term(0, sound, with_kappa(kappa, e))
        .term(1, swirl, [0.0, 1.0, slope, c1]);
    let closed_profile = profile.clone();
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::Potential { e }, WaveGen::Rotational { ell: normal }],
        profile: Box::new(profile),
    };
    let mut model = SuperpositionModel::new(ansatz);
    if !soliton {
        let drift = a0 + e[1] * shift;
        model = model.with_closed_form(move |x, _| {
            let r1 = (drift * x[0] - dot(&e, &x[1..])) / (1.0 - (1.0 + kappa) * amp1 * x[0]);
            let r2 = c2 * x[0] - dot(&normal, &x[1..]);
            Some((closed_profile.value(&[r1, r2]), Some(vec![r1, r2])))
        });
    }
    let singular = vec![blowup];
    let built = if soliton {
        let window = Window::new((0.0, half_first(&singular)), [(-1.0, 1.0); 3]);
        Built::new(&variant, Arc::new(model), 2, 2, window).bounded(true).note(
            "singular time is where the characteristic with r = 0 steepens; steeper ones break slightly earlier",
        )
    } else {
        let window = Window::centered((0.0, half_first(&singular)), e.map(|c| -2.0 * c), 0.5);
        Built::new(&variant, Arc::new(model), 2, 2, window)
    };
    Ok(built.singular(singular))
}

pub(super) fn vortex_monge_ampere(p: &ParamReader<'_>) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2S1S2Ma)?;
    let quadratic = variant == "n2";
    let n = if quadratic { 2.0 } else { p.real("n", 3.0)? };
    let a0 = p.positive("a0", 1.0)?;
    let swirl = p.real("A3", 0.3)?;
    let value = move |r: &[f64]| {
        let ratio = r[0] / r[1];
        [
            a0,
            (1.0 - n) * signed_pow(ratio, n),
            -n * signed_pow(1.0 / ratio, 1.0 - n),
            swirl * (r[0] - r[1]).tanh(),
        ]
    };
    let jacobian = move |r: &[f64]| {
        let ratio = r[0] / r[1];
        let inv = 1.0 / ratio;
        let k = n * (1.0 - n);
        let du1 = k * signed_pow(ratio, n - 1.0) / r[1];
        let du2 = k * signed_pow(inv, -n) / r[0];
        let sech2 = 1.0 - (r[0] - r[1]).tanh().powi(2);
        Matrix::from_rows(&[
            [0.0, 0.0],
            [du1, -du1 * ratio],
            [du2 * inv, -du2],
            [swirl * sech2, -swirl * sech2],
        ])
    };
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::convected(0), WaveGen::convected(1)],
        profile: Box::new(FnProfile { value, jacobian }),
    };
    let stream = HomogeneousStream { n };
    let mut model = SuperpositionModel::new(ansatz)
        .with_seed(|x| vec![x[1], x[2]])
        .with_stream(Box::new(stream), 0.0);
    let built = if quadratic {
        model = model
            .with_closed_form(move |x, branch| {
                let (t, x1, x2) = (x[0], x[1], x[2]);
                let disc = x2 * x2 + 4.0 * t * x1;
                if disc < 0.0 || t == 0.0 {
                    return None;
                }
                let s = match branch {
                    Branch::Plus => 1.0,
                    Branch::Minus => -1.0,
                    Branch::Auto => {
                        if x2 >= 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                };
                let root = disc.sqrt();
                let u2 = (x2 + s * root) / t;
                let u1 = -(x2 * x2 + 2.0 * t * x1 + s * x2 * root) / (2.0 * t * t);
                let r = vec![x1 - u1 * t, x2 - u2 * t];
                let u3 = swirl * (r[0] - r[1]).tanh();
                Some(([a0, u1, u2, u3], Some(r)))
            })
            .closed_form_selects_sheet();
        let window = Window::new((0.5, 1.5), [(1.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)]);
        Built::new(&variant, Arc::new(model), 2, 2, window)
            .singular(vec![0.0])
            .branch(Branch::Plus)
    } else {
        let window = Window::new((0.02, 0.1), [(1.0, 1.5), (1.0, 1.5), (-1.0, 1.0)]);
        Built::new(&variant, Arc::new(model), 2, 2, window)
    };
    Ok(built)
}

pub(super) fn vortex_additive(p: &ParamReader<'_>) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2S1S2Add)?;
    let l1 = cross(&p.unit("e1", [0.0, 0.0, 1.0])?, &p.vector("m1", [0.5, 1.0, 0.0])?);
    let l2 = cross(&p.unit("e2", [0.6, 0.0, 0.8])?, &p.vector("m2", [0.0, 1.0, 0.0])?);
    let c1 = p.real("C1", 1.0)?;
    let c2 = p.real("C2", 0.5)?;
    let a0 = p.positive("a0", 1.0)?;
    let denom = l1[0] * l2[2] - l1[2] * l2[0];
    if l1[0].abs() < 1e-12 || l2[0].abs() < 1e-12 || denom.abs() < 1e-12 {
        return Err(CatalogError::constraint(
            "vortex normals in general position",
            format!("l1 = {l1:?}, l2 = {l2:?}"),
        ));
    }
    let eta = (l2[0] * l1[1] - l1[0] * l2[1]) / denom;
    let shapes: Vec<ScalarProfile> = if variant == "sech" {
        vec![
            ScalarProfile::Sech {
                amp: p.real("A1", 0.5)?,
                rate: 1.0,
            },
            ScalarProfile::Sech {
                amp: p.real("A2", 0.3)?,
                rate: 1.0,
            },
            ScalarProfile::Sech {
                amp: p.real("A3", 0.4)?,
                rate: 1.0,
            },
        ]
    } else {
        let mut v = Vec::new();
        for (a, b) in [("A1", "B1"), ("A2", "B2"), ("A3", "B3")] {
            v.push(ScalarProfile::Kink {
                amp: p.real(a, 0.25)?,
                stiff: p.positive(b, 1.0)?,
            });
        }
        v
    };
    let profile = SeparableProfile::new(2, [a0, c1 / l1[0] + c2 / l2[0], 0.0, 0.0])
        .term(0, shapes[0], [0.0, -l1[1] / l1[0], 1.0, 0.0])
        .term(0, shapes[1], [0.0, -l1[2] / l1[0], 0.0, 1.0])
        .term(1, shapes[2], [0.0, -(l2[2] * eta + l2[1]) / l2[0], 1.0, eta]);
    let closed_profile = profile.clone();
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::Rotational { ell: l1 }, WaveGen::Rotational { ell: l2 }],
        profile: Box::new(profile),
    };
    // The first wave speed is constant and the second depends on r1 only,
    // because the r2 direction is orthogonal to l2.
    let model = SuperpositionModel::new(ansatz).with_closed_form(move |x, _| {
        let r1 = (c1 + l1[0] * c2 / l2[0]) * x[0] - dot(&l1, &x[1..]);
        let speed2 = dot(&l2, &closed_profile.value(&[r1, 0.0])[1..]);
        let r2 = speed2 * x[0] - dot(&l2, &x[1..]);
        Some((closed_profile.value(&[r1, r2]), Some(vec![r1, r2])))
    });
    let window = Window::new((0.0, 2.0), [(-1.0, 1.0); 3]);
    Ok(Built::new(&variant, Arc::new(model), 2, 2, window).bounded(true))
}

pub(super) fn two_sound_one_vortex(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2E1E2S3)?;
    let kappa = gas.kappa();
    let e1 = p.unit("e1", [1.0, 0.0, 0.0])?;
    let e2 = p.unit("e2", default_partner(kappa))?;
    check_sound_angle("e1.e2 = -1/kappa", e1, e2, kappa)?;
    if e1[2] != 0.0 || e2[2] != 0.0 || (e1[0] - e2[0]).abs() < 1e-12 {
        return Err(CatalogError::constraint(
            "e1, e2 horizontal with distinct x1 components",
            format!("e1 = {e1:?}, e2 = {e2:?}"),
        ));
    }
    let amp = p.real("A1", 0.25)?;
    let swirl = p.real("A3", 0.3)?;
    let lift = p.real("u30", 0.2)?;
    let beta = (1.0 + 1.0 / kappa) / (e1[0] - e2[0]);
    // Horizontal direction w with e1·w = beta and e2·w = -beta.
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let w = [beta * (e2[1] + e1[1]) / det, -beta * (e1[0] + e2[0]) / det];
    let phase = ScalarProfile::Tanh { amp: swirl, rate: 1.0 };
    let profile = SeparableProfile::new(3, [0.0, 0.0, 0.0, lift])
        .term(0, ScalarProfile::Linear { slope: amp, offset: 0.0 }, with_kappa(kappa, e1))
        .term(1, ScalarProfile::Linear { slope: amp, offset: 0.0 }, with_kappa(kappa, e2))
        .term(2, phase, [0.0, w[0], w[1], 0.0]);
    let closed_profile = profile.clone();
    let ansatz = SuperpositionAnsatz {
        waves: vec![
            WaveGen::Potential { e: e1 },
            WaveGen::Potential { e: e2 },
            WaveGen::convected(2),
        ],
        profile: Box::new(profile),
    };
    let model = SuperpositionModel::new(ansatz).with_closed_form(move |x, _| {
        let t = x[0];
        let r3 = x[3] - lift * t;
        let push = beta * phase.value(r3) * t;
        let d = 1.0 - (1.0 + kappa) * amp * t;
        let r1 = (push - dot(&e1, &x[1..])) / d;
        let r2 = (-push - dot(&e2, &x[1..])) / d;
        Some((closed_profile.value(&[r1, r2, r3]), Some(vec![r1, r2, r3])))
    });
    let singular = blowup_times(&[(1.0 + kappa) * amp]);
    let window = Window::centered((0.0, half_first(&singular)), sound_box_center(&[e1, e2], 2.5), 0.5);
    Ok(Built::new(&variant, Arc::new(model), 2, 3, window).singular(singular))
}

pub(super) fn one_sound_two_vortex(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2E1S2S3)?;
    let kappa = gas.kappa();
    let amp = p.real("A1", 0.25)?;
    let shear = p.real("C1", 0.5)?;
    let c2 = p.real("C2", 0.3)?;
    let c3 = p.real("C3", 0.2)?;
    let ratio = p.real("B1", 2.0)?;
    let l2 = p.vector("l2", [1.0, 0.6, 0.8])?;
    let l31 = p.real("l31", 1.0)?;
    if l2[0].abs() < 1e-12 || l2[2].abs() < 1e-12 || l31.abs() < 1e-12 {
        return Err(CatalogError::constraint(
            "l2_1, l2_3, l31 nonzero",
            format!("l2 = {l2:?}, l31 = {l31}"),
        ));
    }
    let l3 = [l31, ratio * l2[1], ratio * l2[2]];
    let drift = c2 / l2[0] + c3 / l3[0];
    let tilt = -l2[1] / l2[2];
    let profile = SeparableProfile::new(3, [0.0, drift, 0.0, 0.0])
        .term(0, ScalarProfile::Linear { slope: amp, offset: 0.0 }, [1.0, kappa, 0.0, 0.0])
        .term(1, ScalarProfile::Linear { slope: shear * l3[0], offset: 0.0 }, [0.0, 0.0, 1.0, tilt])
        .term(2, ScalarProfile::Linear { slope: -shear * l2[0], offset: 0.0 }, [0.0, 0.0, 1.0, tilt]);
    let ansatz = SuperpositionAnsatz {
        waves: vec![
            WaveGen::Potential { e: [1.0, 0.0, 0.0] },
            WaveGen::Rotational { ell: l2 },
            WaveGen::Rotational { ell: l3 },
        ],
        profile: Box::new(profile),
    };
    let model = SuperpositionModel::new(ansatz).with_closed_form(move |x, _| {
        let (t, x1) = (x[0], x[1]);
        let d = 1.0 - amp * (1.0 + kappa) * t;
        let s = l2[1] * x[2] + l2[2] * x[3];
        let q = ratio * l2[0] - l3[0];
        let u2 = shear * q * s;
        Some((
            [
                amp * (drift * t - x1) / d,
                (drift * (1.0 - amp * t) - kappa * amp * x1) / d,
                u2,
                tilt * u2,
            ],
            None,
        ))
    });
    let singular = blowup_times(&[(1.0 + kappa) * amp]);
    let window = Window::new((0.0, half_first(&singular)), [(-2.0, -1.0), (-1.0, 1.0), (-1.0, 1.0)]);
    Ok(Built::new(&variant, Arc::new(model), 2, 3, window).singular(singular))
}

pub(super) fn snoidal(p: &ParamReader<'_>) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R2S1S2S3)?;
    let a0 = p.positive("a0", 1.0)?;
    let amp1 = p.real("A1", 0.5)?;
    let amp2 = p.real("A2", 0.5)?;
    let b1 = p.real("B1", 1.0)?;
    let b2 = p.real("B2", 1.0)?;
    let beta = p.real("beta", 1.0)?;
    let n = p.real("n", 2.0)?;
    let k = p.real("modulus_k", 0.5f64.sqrt())?;
    if !(k * k > 0.0 && k * k < 1.0) {
        return Err(CatalogError::constraint("0 < k^2 < 1", format!("k = {k}")));
    }
    if b1 <= -1.0 || b2 <= -1.0 {
        return Err(CatalogError::constraint("B1, B2 > -1", format!("B1 = {b1}, B2 = {b2}")));
    }
    let modulus = EllipticModulus::new(k)?;
    let jac = move |z: f64| {
        jacobi_sn_cn_dn(z, modulus)
            .map(|j| (j.sn, j.cn * j.dn))
            .unwrap_or((f64::NAN, f64::NAN))
    };
    // b(z) = A1 (1 + B1 sn^2 z)^(-1/2) and g(s) = A2 sn(βs) (1 + B2 sn^2(βs))^(-1/2).
    let lump = move |z: f64| {
        let (s, ds) = jac(z);
        let q = 1.0 + b1 * s * s;
        (amp1 / q.sqrt(), -amp1 * b1 * s * ds / (q * q.sqrt()))
    };
    let shear = move |s: f64| {
        let (sn, ds) = jac(beta * s);
        let q = 1.0 + b2 * sn * sn;
        (amp2 * sn / q.sqrt(), amp2 * beta * ds / (q * q.sqrt()))
    };
    let value = move |r: &[f64]| {
        let g = shear(r[1] - r[2]).0;
        [a0, lump(beta * (r[1] + n * r[2])).0, g, g]
    };
    let jacobian = move |r: &[f64]| {
        let db = beta * lump(beta * (r[1] + n * r[2])).1;
        let dg = shear(r[1] - r[2]).1;
        Matrix::from_rows(&[[0.0, 0.0, 0.0], [0.0, db, n * db], [0.0, dg, -dg], [0.0, dg, -dg]])
    };
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::convected(0), WaveGen::convected(1), WaveGen::convected(2)],
        profile: Box::new(FnProfile { value, jacobian }),
    };
    let model = SuperpositionModel::new(ansatz).with_closed_form(move |x, _| {
        let t = x[0];
        let g = shear(x[2] - x[3]).0;
        let u1 = lump(beta * (x[2] + n * x[3] - (n + 1.0) * t * g)).0;
        Some(([a0, u1, g, g], Some(vec![x[1] - u1 * t, x[2] - g * t, x[3] - g * t])))
    });
    let window = Window::new((0.0, 2.0), [(-1.0, 1.0); 3]);
    Ok(Built::new(&variant, Arc::new(model), 2, 3, window).bounded(true))
}
