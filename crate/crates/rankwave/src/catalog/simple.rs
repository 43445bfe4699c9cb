//! Uniform state and the rank-one families.

use std::sync::Arc;

use crate::fluid::{GasParams, StateVec};
use crate::linalg::{cross, dot, Matrix};
use crate::solver::ImplicitPoint;

use super::ansatz::{SeparableProfile, SuperpositionAnsatz, WaveGen};
use super::profiles::ScalarProfile;
use super::{variant_param, Branch, Built, CatalogError, FamilyId, FamilyModel, ParamReader, SuperpositionModel, Window};

pub(super) const SOUND_VARIANTS: &[&str] = &["linear", "kink"];
pub(super) const VORTEX_VARIANTS: &[&str] = &["sech", "kink"];

struct Uniform {
    state: StateVec,
}

impl FamilyModel for Uniform {
    fn evaluate(&self, x: [f64; 4], _branch: Branch, _guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
        Ok(ImplicitPoint {
            x,
            r: Vec::new(),
            state: self.state,
            jac: Matrix::zeros(4, 4),
            cond_det: 1.0,
        })
    }

    fn closed_form(&self, _x: [f64; 4], _branch: Branch) -> Option<[f64; 4]> {
        Some(self.state.to_array())
    }
}

pub(super) fn constant(p: &ParamReader<'_>) -> Result<Built, CatalogError> {
    variant_param(p, FamilyId::Constant)?;
    let a0 = p.positive("a0", 1.0)?;
    let u0 = p.vector("u0", [0.2, -0.1, 0.05])?;
    let state = StateVec::new(a0, u0)?;
    let window = Window::new((0.0, 1.0), [(-1.0, 1.0); 3]);
    Ok(Built::new("uniform", Arc::new(Uniform { state }), 0, 0, window).bounded(true))
}

/// `a = p(r)`, `u = κ p(r) e`, with `r` carried by the sound wave along `e`.
pub(super) fn rank1_sound(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R1E)?;
    let kappa = gas.kappa();
    let amp = p.real("A1", 0.25)?;
    let e = p.unit("e1", [1.0, 0.0, 0.0])?;
    let shape = match variant.as_str() {
        "linear" => ScalarProfile::Linear { slope: amp, offset: 0.0 },
        _ => ScalarProfile::Kink {
            amp,
            stiff: p.positive("B1", 1.0)?,
        },
    };
    let profile = SeparableProfile::new(1, [0.0; 4]).term(0, shape, [1.0, kappa * e[0], kappa * e[1], kappa * e[2]]);
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::Potential { e }],
        profile: Box::new(profile),
    };
    // Both shapes have their steepest slope `amp` at r = 0.
    let blowup = 1.0 / ((1.0 + kappa) * amp);
    let mut model = SuperpositionModel::new(ansatz);
    if variant == "linear" {
        model = model.with_closed_form(move |x, _| {
            let ex = dot(&e, &x[1..]);
            let r = ex / ((1.0 + kappa) * amp * x[0] - 1.0);
            let a = amp * r;
            Some(([a, kappa * a * e[0], kappa * a * e[1], kappa * a * e[2]], Some(vec![r])))
        });
    }
    let t_end = if blowup > 0.0 { 0.5 * blowup } else { 1.0 };
    let center = e.map(|c| -1.5 * c);
    let window = Window::centered((0.0, t_end), center, 0.5);
    let singular = if blowup > 0.0 { vec![blowup] } else { Vec::new() };
    Ok(Built::new(&variant, Arc::new(model), 1, 1, window)
        .singular(singular)
        .bounded(variant == "kink"))
}

/// Vortex wave with normal `n = e × m`; `u·n = C1` keeps the covector
/// time component constant.
pub(super) fn rank1_vortex(p: &ParamReader<'_>) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R1S)?;
    let e = p.unit("e1", [1.0, 0.0, 0.0])?;
    let m = p.vector("m1", [0.3, 1.0, 0.5])?;
    let flux = p.real("C1", 1.0)?;
    let a0 = p.positive("a0", 1.0)?;
    let n = cross(&e, &m);
    if n[2].abs() < 1e-12 {
        return Err(CatalogError::constraint("(e1 x m1)_3 != 0", format!("e1 x m1 = {n:?}")));
    }
    let (s1, s2) = match variant.as_str() {
        "sech" => (
            ScalarProfile::Sech {
                amp: p.real("A1", 1.0)?,
                rate: p.real("B1", 0.25)?,
            },
            ScalarProfile::Sech {
                amp: p.real("A2", 1.0)?,
                rate: p.real("B2", 0.5)?,
            },
        ),
        _ => (
            ScalarProfile::Kink {
                amp: p.real("A1", 0.25)?,
                stiff: p.positive("B1", 1.0)?,
            },
            ScalarProfile::Kink {
                amp: p.real("A2", 0.25)?,
                stiff: p.positive("B2", 1.0)?,
            },
        ),
    };
    let profile = SeparableProfile::new(1, [a0, 0.0, 0.0, flux / n[2]])
        .term(0, s1, [0.0, 1.0, 0.0, -n[0] / n[2]])
        .term(0, s2, [0.0, 0.0, 1.0, -n[1] / n[2]]);
    let closed_profile = profile.clone();
    let ansatz = SuperpositionAnsatz {
        waves: vec![WaveGen::Rotational { ell: n }],
        profile: Box::new(profile),
    };
    let model = SuperpositionModel::new(ansatz).with_closed_form(move |x, _| {
        use super::ansatz::ProfileMap;
        let r = flux * x[0] - dot(&n, &x[1..]);
        Some((closed_profile.value(&[r]), Some(vec![r])))
    });
    let window = Window::new((0.0, 2.0), [(-2.0, 2.0); 3]);
    Ok(Built::new(&variant, Arc::new(model), 1, 1, window).bounded(true))
}
