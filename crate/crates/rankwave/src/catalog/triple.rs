//! Triple sound wave under pairwise angle conditions.

use std::sync::Arc;

use crate::fluid::GasParams;

use super::ansatz::{SeparableProfile, SuperpositionAnsatz, WaveGen};
use super::double::{check_sound_angle, half_first};
use super::profiles::ScalarProfile;
use super::{blowup_times, sound_box_center, variant_param, Built, CatalogError, FamilyId, ParamReader, SuperpositionModel, Window};

pub(super) const VARIANTS: &[&str] = &["linear", "kink_a", "kink_b"];

/// Three unit vectors with all pairwise cosines equal to `-1/κ`.
pub(super) fn default_triad(kappa: f64) -> [[f64; 3]; 3] {
    let c = -1.0 / kappa;
    let s = (1.0 - c * c).sqrt();
    let y = (c - c * c) / s;
    [[1.0, 0.0, 0.0], [c, s, 0.0], [c, y, (1.0 - c * c - y * y).max(0.0).sqrt()]]
}

pub(super) fn triple_sound(p: &ParamReader<'_>, gas: &GasParams) -> Result<Built, CatalogError> {
    let variant = variant_param(p, FamilyId::R3E1E2E3)?;
    let kappa = gas.kappa();
    let defaults = default_triad(kappa);
    let dirs = [
        p.unit("e1", defaults[0])?,
        p.unit("e2", defaults[1])?,
        p.unit("e3", defaults[2])?,
    ];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        check_sound_angle(&format!("e{}.e{} = -1/kappa", i + 1, j + 1), dirs[i], dirs[j], kappa)?;
    }
    let amps = [p.real("A1", 0.25)?, p.real("A2", 0.25)?, p.real("A3", 0.25)?];
    let stiff = if variant == "linear" {
        [0.0; 3]
    } else {
        [p.real("B1", 1.0)?, p.real("B2", 1.0)?, p.real("B3", 1.0)?]
    };
    let mut profile = SeparableProfile::new(3, [0.0; 4]);
    for i in 0..3 {
        let shape = match variant.as_str() {
            "linear" => ScalarProfile::Linear { slope: amps[i], offset: 0.0 },
            "kink_a" => ScalarProfile::Kink {
                amp: amps[i],
                stiff: stiff[i],
            },
            _ => ScalarProfile::ExpStep {
                amp: amps[i],
                rate: stiff[i],
            },
        };
        let e = dirs[i];
        profile = profile.term(i, shape, [1.0, kappa * e[0], kappa * e[1], kappa * e[2]]);
    }
    let ansatz = SuperpositionAnsatz {
        waves: dirs.iter().map(|&e| WaveGen::Potential { e }).collect(),
        profile: Box::new(profile),
    };
    let rates: Vec<f64> = match variant.as_str() {
        "kink_b" => (0..3)
            .map(|i| -(1.0 + kappa) * amps[i] * stiff[i] / 2f64.powf(2.5))
            .collect(),
        _ => amps.iter().map(|a| (1.0 + kappa) * a).collect(),
    };
    let singular = blowup_times(&rates);
    let window = Window::centered((0.0, half_first(&singular)), sound_box_center(&dirs, 3.0), 0.5);
    let built = Built::new(&variant, Arc::new(SuperpositionModel::new(ansatz)), 3, 3, window)
        .singular(singular)
        .bounded(variant != "linear");
    Ok(if variant == "kink_b" {
        built.note("listed singular times are negative: the r = 0 characteristics steepen only backwards in time")
    } else {
        built
    })
}
