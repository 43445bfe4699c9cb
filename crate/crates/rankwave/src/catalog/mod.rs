//! Registry of closed-form solution families.
//!
//! Every family is built from named real/vector parameters with defaults,
//! validated against its structural constraints, and exposes an evaluator
//! returning an [`ImplicitPoint`] (fields plus exact first derivatives).

mod ansatz;
mod double;
mod profiles;
mod simple;
mod time_only;
mod transported;
mod triple;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fluid::{FluidError, GasParams};
use crate::solver::{self, ImplicitPoint, ImplicitProblem, SolverError, WaveAnsatz};
use crate::special::SpecialFnError;

pub use ansatz::{FnProfile, ProfileMap, SeparableProfile, SuperpositionAnsatz, Term, WaveGen};
pub use profiles::ScalarProfile;
pub use time_only::{rankk_sound_speed, StreamFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("family {family} has no parameter '{key}'")]
    UnknownParam { family: String, key: String },
    #[error("parameter '{key}': {reason}")]
    BadParam { key: String, reason: String },
    #[error("constraint '{name}' violated: {detail}")]
    Constraint { name: String, detail: String },
    #[error("point outside the validity window: {0}")]
    Validity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

impl CatalogError {
    pub(crate) fn constraint(name: &str, detail: impl Into<String>) -> Self {
        Self::Constraint {
            name: name.to_string(),
            detail: detail.into(),
        }
    }

    /// True for errors raised by the near-catastrophe guard.
    pub fn is_near_catastrophe(&self) -> bool {
        matches!(self, Self::Solver(SolverError::NearCatastrophe { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FamilyId {
    #[serde(rename = "CONSTANT")]
    Constant,
    #[serde(rename = "R1_E")]
    R1E,
    #[serde(rename = "R1_S")]
    R1S,
    #[serde(rename = "R2_E1E2")]
    R2E1E2,
    #[serde(rename = "R2_E1S2")]
    R2E1S2,
    #[serde(rename = "R2_S1S2_MA")]
    R2S1S2Ma,
    #[serde(rename = "R2_S1S2_ADD")]
    R2S1S2Add,
    #[serde(rename = "R2_E1E2S3")]
    R2E1E2S3,
    #[serde(rename = "R2_E1S2S3")]
    R2E1S2S3,
    #[serde(rename = "R2_S1S2S3")]
    R2S1S2S3,
    #[serde(rename = "R3_E1E2E3")]
    R3E1E2E3,
    #[serde(rename = "R3_E1S2S3_v1")]
    R3E1S2S3V1,
    #[serde(rename = "R3_E1S2S3_v2")]
    R3E1S2S3V2,
    #[serde(rename = "RK_TIME_A")]
    RkTimeA,
}

impl FamilyId {
    pub const ALL: [FamilyId; 14] = [
        FamilyId::Constant,
        FamilyId::R1E,
        FamilyId::R1S,
        FamilyId::R2E1E2,
        FamilyId::R2E1S2,
        FamilyId::R2S1S2Ma,
        FamilyId::R2S1S2Add,
        FamilyId::R2E1E2S3,
        FamilyId::R2E1S2S3,
        FamilyId::R2S1S2S3,
        FamilyId::R3E1E2E3,
        FamilyId::R3E1S2S3V1,
        FamilyId::R3E1S2S3V2,
        FamilyId::RkTimeA,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Constant => "CONSTANT",
            Self::R1E => "R1_E",
            Self::R1S => "R1_S",
            Self::R2E1E2 => "R2_E1E2",
            Self::R2E1S2 => "R2_E1S2",
            Self::R2S1S2Ma => "R2_S1S2_MA",
            Self::R2S1S2Add => "R2_S1S2_ADD",
            Self::R2E1E2S3 => "R2_E1E2S3",
            Self::R2E1S2S3 => "R2_E1S2S3",
            Self::R2S1S2S3 => "R2_S1S2S3",
            Self::R3E1E2E3 => "R3_E1E2E3",
            Self::R3E1S2S3V1 => "R3_E1S2S3_v1",
            Self::R3E1S2S3V2 => "R3_E1S2S3_v2",
            Self::RkTimeA => "RK_TIME_A",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Self::Constant => "uniform state (reference for the verifier)",
            Self::R1E => "simple sound wave",
            Self::R1S => "simple vortex wave with bounded profiles",
            Self::R2E1E2 => "nonscattering double sound wave under the angle condition",
            Self::R2E1S2 => "sound wave superposed on a vortex wave",
            Self::R2S1S2Ma => "double vortex wave from a homogeneous Monge-Ampere stream function",
            Self::R2S1S2Add => "scattering nonsingular double vortex wave",
            Self::R2E1E2S3 => "two sound waves and one vortex wave, solution rank two",
            Self::R2E1S2S3 => "one sound wave and two vortex waves, solution rank two",
            Self::R2S1S2S3 => "three convected vortex waves with nilpotent profile Jacobian",
            Self::R3E1E2E3 => "triple sound wave under pairwise angle conditions",
            Self::R3E1S2S3V1 => "scattering triple wave with an invariant transported along the flow",
            Self::R3E1S2S3V2 => "triple wave with rotating horizontal velocity",
            Self::RkTimeA => "rank-k flow with sound speed depending on time only",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FamilyId {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| CatalogError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Vector([f64; 3]),
    Text(String),
}

impl FromStr for ParamValue {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Self::Real(v));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() == 3 {
            if let (Ok(a), Ok(b), Ok(c)) = (parts[0].parse(), parts[1].parse(), parts[2].parse()) {
                return Ok(Self::Vector([a, b, c]));
            }
        }
        Ok(Self::Text(s.to_string()))
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Real(v) => write!(f, "{v}"),
            Self::Vector(v) => write!(f, "{},{},{}", v[0], v[1], v[2]),
            Self::Text(s) => f.write_str(s),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Root selector for families with several solution sheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The sheet continuous with the `t → 0+` limit.
    #[default]
    Auto,
    Plus,
    Minus,
}

impl FromStr for Branch {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            other => Err(CatalogError::BadParam {
                key: "branch".into(),
                reason: format!("expected plus, minus or auto, got '{other}'"),
            }),
        }
    }
}

/// Box in spacetime where a family's default parameters give a valid,
/// catastrophe-free solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub t: (f64, f64),
    pub x: [(f64, f64); 3],
}

impl Window {
    pub fn new(t: (f64, f64), x: [(f64, f64); 3]) -> Self {
        Self { t, x }
    }

    /// Axis-aligned box of half-width `half` around `center`.
    pub fn centered(t: (f64, f64), center: [f64; 3], half: f64) -> Self {
        Self {
            t,
            x: center.map(|c| (c - half, c + half)),
        }
    }
}

/// Evaluation strategy of a family.
pub trait FamilyModel: Send + Sync {
    fn evaluate(&self, x: [f64; 4], branch: Branch, guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError>;

    /// Superposition ansatz, when the family is of that form.
    fn ansatz(&self) -> Option<&dyn WaveAnsatz> {
        None
    }

    /// Explicit fields where an independent closed form is known.
    fn closed_form(&self, _x: [f64; 4], _branch: Branch) -> Option<[f64; 4]> {
        None
    }

    /// Covector columns used to normalise the wave basis; `None` lets the
    /// condition checkers choose.
    fn normalization_pivots(&self) -> Option<Vec<usize>> {
        None
    }

    /// Planar stream function generating the velocity, with the constant
    /// its Monge-Ampère determinant should equal.
    fn stream_function(&self) -> Option<(&dyn StreamFunction, f64)> {
        None
    }
}

type ClosedFn = Box<dyn Fn([f64; 4], Branch) -> Option<([f64; 4], Option<Vec<f64>>)> + Send + Sync>;
type SeedFn = Box<dyn Fn([f64; 4]) -> Vec<f64> + Send + Sync>;
type DomainFn = Box<dyn Fn([f64; 4]) -> Result<(), String> + Send + Sync>;

/// Family evaluated by Newton iteration on `r = λ(f(r))·x`, optionally
/// seeded by a closed form that also selects the solution sheet.
pub struct SuperpositionModel {
    pub ansatz: SuperpositionAnsatz,
    closed: Option<ClosedFn>,
    seed: Option<SeedFn>,
    closed_selects_sheet: bool,
    domain: Option<DomainFn>,
    pivots: Option<Vec<usize>>,
    stream: Option<(Box<dyn StreamFunction>, f64)>,
}

impl SuperpositionModel {
    pub fn new(ansatz: SuperpositionAnsatz) -> Self {
        Self {
            ansatz,
            closed: None,
            seed: None,
            closed_selects_sheet: false,
            domain: None,
            pivots: None,
            stream: None,
        }
    }

    /// Closed form returning fields and, when available, the invariants.
    pub fn with_closed_form(
        mut self,
        f: impl Fn([f64; 4], Branch) -> Option<([f64; 4], Option<Vec<f64>>)> + Send + Sync + 'static,
    ) -> Self {
        self.closed = Some(Box::new(f));
        self
    }

    /// Start Newton from the closed-form invariants, which pins the
    /// solution sheet picked by the branch selector.
    pub fn closed_form_selects_sheet(mut self) -> Self {
        self.closed_selects_sheet = true;
        self
    }

    pub fn with_seed(mut self, f: impl Fn([f64; 4]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.seed = Some(Box::new(f));
        self
    }

    pub fn with_domain(mut self, f: impl Fn([f64; 4]) -> Result<(), String> + Send + Sync + 'static) -> Self {
        self.domain = Some(Box::new(f));
        self
    }

    pub fn with_pivots(mut self, pivots: Vec<usize>) -> Self {
        self.pivots = Some(pivots);
        self
    }

    pub fn with_stream(mut self, stream: Box<dyn StreamFunction>, determinant: f64) -> Self {
        self.stream = Some((stream, determinant));
        self
    }
}

impl FamilyModel for SuperpositionModel {
    fn evaluate(&self, x: [f64; 4], branch: Branch, guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
        if let Some(check) = &self.domain {
            check(x).map_err(CatalogError::Domain)?;
        }
        let prob = ImplicitProblem {
            ansatz: &self.ansatz,
            x,
        };
        if self.closed_selects_sheet && self.closed.as_ref().and_then(|c| c(x, branch)).is_none() {
            return Err(CatalogError::Domain("no real solution sheet through this point".into()));
        }
        let sheet_seed = self
            .closed
            .as_ref()
            .filter(|_| self.closed_selects_sheet)
            .and_then(|c| c(x, branch))
            .and_then(|(_, r)| r);
        let start = match (sheet_seed, guess) {
            (Some(r), _) => Some(r),
            (None, Some(g)) => Some(g.to_vec()),
            (None, None) => self.seed.as_ref().map(|s| s(x)),
        };
        Ok(solver::solve_point(&prob, start.as_deref())?)
    }

    fn ansatz(&self) -> Option<&dyn WaveAnsatz> {
        Some(&self.ansatz)
    }

    fn closed_form(&self, x: [f64; 4], branch: Branch) -> Option<[f64; 4]> {
        self.closed.as_ref().and_then(|c| c(x, branch)).map(|(u, _)| u)
    }

    fn normalization_pivots(&self) -> Option<Vec<usize>> {
        self.pivots.clone()
    }

    fn stream_function(&self) -> Option<(&dyn StreamFunction, f64)> {
        self.stream.as_ref().map(|(s, d)| (s.as_ref(), *d))
    }
}

/// A validated, immutable solution family.
#[derive(Clone)]
pub struct FamilySpec {
    pub id: FamilyId,
    pub variant: String,
    pub params: Params,
    pub gas: GasParams,
    /// Declared rank of the Jacobi matrix at generic points.
    pub rank: usize,
    /// Number of Riemann invariants carried by evaluated points.
    pub invariant_count: usize,
    pub singular_times: Vec<f64>,
    /// Fields stay bounded for all time even where derivatives blow up.
    pub bounded: bool,
    pub window: Window,
    pub default_branch: Branch,
    /// Caveats attached to the variant (e.g. a sign that fails the PDE).
    pub notes: Vec<String>,
    /// Variants expected to fail the PDE check, kept for comparison.
    pub flagged: bool,
    model: Arc<dyn FamilyModel>,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("id", &self.id)
            .field("variant", &self.variant)
            .field("params", &self.params)
            .field("rank", &self.rank)
            .field("singular_times", &self.singular_times)
            .finish_non_exhaustive()
    }
}

/// Relative width of the excluded band around each singular time.
pub const SINGULAR_BAND: f64 = 1e-6;

impl FamilySpec {
    pub fn model(&self) -> &dyn FamilyModel {
        self.model.as_ref()
    }

    pub fn ansatz(&self) -> Option<&dyn WaveAnsatz> {
        self.model.ansatz()
    }

    pub fn closed_form(&self, t: f64, x: [f64; 3], branch: Option<Branch>) -> Option<[f64; 4]> {
        self.model
            .closed_form([t, x[0], x[1], x[2]], branch.unwrap_or(self.default_branch))
    }

    pub fn check_time(&self, t: f64) -> Result<(), CatalogError> {
        for &ts in &self.singular_times {
            if (t - ts).abs() < SINGULAR_BAND * ts.abs().max(1.0) {
                return Err(CatalogError::Validity(format!("t = {t} is within the band around singular time {ts}")));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, t: f64, x: [f64; 3], branch: Option<Branch>) -> Result<ImplicitPoint, CatalogError> {
        self.evaluate_from(t, x, branch, None)
    }

    /// Evaluation warm-started from a neighbouring point's invariants.
    pub fn evaluate_from(
        &self,
        t: f64,
        x: [f64; 3],
        branch: Option<Branch>,
        guess: Option<&[f64]>,
    ) -> Result<ImplicitPoint, CatalogError> {
        if !(t.is_finite() && x.iter().all(|v| v.is_finite())) {
            return Err(CatalogError::Validity("non-finite coordinates".into()));
        }
        self.check_time(t)?;
        let pt = self
            .model
            .evaluate([t, x[0], x[1], x[2]], branch.unwrap_or(self.default_branch), guess)?;
        if pt.state.a.is_nan() || pt.state.a <= 0.0 {
            return Err(CatalogError::Validity(format!("sound speed {} is not positive", pt.state.a)));
        }
        Ok(pt)
    }
}

/// Reciprocals of the nonzero steepening rates, sorted and deduplicated.
pub(crate) fn blowup_times(rates: &[f64]) -> Vec<f64> {
    let mut times: Vec<f64> = rates.iter().filter(|r| **r != 0.0).map(|r| 1.0 / r).collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    times
}

/// Box center where every sound direction satisfies `e·x <= -depth`.
pub(crate) fn sound_box_center(dirs: &[[f64; 3]], depth: f64) -> [f64; 3] {
    let sum = dirs.iter().fold([0.0; 3], |acc, e| [acc[0] + e[0], acc[1] + e[1], acc[2] + e[2]]);
    let least = dirs
        .iter()
        .map(|e| crate::linalg::dot(e, &sum))
        .fold(f64::INFINITY, f64::min);
    if least > 1e-6 {
        sum.map(|c| -depth / least * c)
    } else {
        dirs[0].map(|c| -depth * c)
    }
}

/// Evaluates `family` at `(t, x)`.
pub fn evaluate(family: &FamilySpec, t: f64, x: [f64; 3], branch: Option<Branch>) -> Result<ImplicitPoint, CatalogError> {
    family.evaluate(t, x, branch)
}

pub fn singular_times(family: &FamilySpec) -> Vec<f64> {
    family.singular_times.clone()
}

/// Tracks which overrides a builder consumed and records resolved values.
pub(crate) struct ParamReader<'a> {
    overrides: &'a Params,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<Params>,
}

impl<'a> ParamReader<'a> {
    fn new(overrides: &'a Params) -> Self {
        Self {
            overrides,
            used: RefCell::new(BTreeSet::new()),
            resolved: RefCell::new(Params::new()),
        }
    }

    fn take(&self, key: &str) -> Option<&'a ParamValue> {
        self.used.borrow_mut().insert(key.to_string());
        self.overrides.get(key)
    }

    pub fn real(&self, key: &str, default: f64) -> Result<f64, CatalogError> {
        let v = match self.take(key) {
            None => default,
            Some(ParamValue::Real(v)) => *v,
            Some(other) => {
                return Err(CatalogError::BadParam {
                    key: key.into(),
                    reason: format!("expected a real number, got '{other}'"),
                })
            }
        };
        if !v.is_finite() {
            return Err(CatalogError::BadParam {
                key: key.into(),
                reason: "must be finite".into(),
            });
        }
        self.resolved.borrow_mut().insert(key.into(), ParamValue::Real(v));
        Ok(v)
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CatalogError> {
        let v = self.real(key, default)?;
        if v <= 0.0 {
            return Err(CatalogError::constraint(&format!("{key} > 0"), format!("{key} = {v}")));
        }
        Ok(v)
    }

    pub fn vector(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3], CatalogError> {
        let v = match self.take(key) {
            None => default,
            Some(ParamValue::Vector(v)) => *v,
            Some(other) => {
                return Err(CatalogError::BadParam {
                    key: key.into(),
                    reason: format!("expected three comma-separated reals, got '{other}'"),
                })
            }
        };
        if v.iter().any(|c| !c.is_finite()) {
            return Err(CatalogError::BadParam {
                key: key.into(),
                reason: "must be finite".into(),
            });
        }
        self.resolved.borrow_mut().insert(key.into(), ParamValue::Vector(v));
        Ok(v)
    }

    /// A direction that must be a unit vector.
    pub fn unit(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3], CatalogError> {
        let v = self.vector(key, default)?;
        crate::fluid::unit_vector(v).map_err(|_| {
            CatalogError::constraint(&format!("|{key}| = 1"), format!("{key} = {v:?}"))
        })
    }

    pub fn text(&self, key: &str, default: &str, allowed: &[&str]) -> Result<String, CatalogError> {
        let v = match self.take(key) {
            None => default.to_string(),
            Some(ParamValue::Text(s)) => s.clone(),
            Some(other) => other.to_string(),
        };
        if !allowed.contains(&v.as_str()) {
            return Err(CatalogError::BadParam {
                key: key.into(),
                reason: format!("'{v}' is not one of {allowed:?}"),
            });
        }
        self.resolved.borrow_mut().insert(key.into(), ParamValue::Text(v.clone()));
        Ok(v)
    }

    fn finish(self, family: FamilyId) -> Result<Params, CatalogError> {
        let used = self.used.into_inner();
        if let Some(key) = self.overrides.keys().find(|k| !used.contains(*k)) {
            return Err(CatalogError::UnknownParam {
                family: family.tag().into(),
                key: key.clone(),
            });
        }
        Ok(self.resolved.into_inner())
    }
}

/// What a family builder hands back to [`make_family`].
pub(crate) struct Built {
    pub variant: String,
    pub model: Arc<dyn FamilyModel>,
    pub rank: usize,
    pub invariant_count: usize,
    pub singular_times: Vec<f64>,
    pub bounded: bool,
    pub window: Window,
    pub default_branch: Branch,
    pub notes: Vec<String>,
    pub flagged: bool,
}

impl Built {
    pub fn new(variant: &str, model: Arc<dyn FamilyModel>, rank: usize, invariant_count: usize, window: Window) -> Self {
        Self {
            variant: variant.into(),
            model,
            rank,
            invariant_count,
            singular_times: Vec::new(),
            bounded: false,
            window,
            default_branch: Branch::Auto,
            notes: Vec::new(),
            flagged: false,
        }
    }

    pub fn singular(mut self, times: Vec<f64>) -> Self {
        self.singular_times = times;
        self
    }

    pub fn bounded(mut self, yes: bool) -> Self {
        self.bounded = yes;
        self
    }

    pub fn note(mut self, text: &str) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn flagged(mut self, text: &str) -> Self {
        self.flagged = true;
        self.note(text)
    }

    pub fn branch(mut self, b: Branch) -> Self {
        self.default_branch = b;
        self
    }
}

/// Builds a family from registry defaults overridden by `overrides`.
/// The key `gamma` sets the adiabatic exponent, `variant` picks a named
/// preset and `branch` overrides the default solution sheet; all other
/// keys are family parameters.
pub fn make_family(id: FamilyId, overrides: &Params) -> Result<FamilySpec, CatalogError> {
    let reader = ParamReader::new(overrides);
    let gamma = reader.real("gamma", 5.0 / 3.0)?;
    let gas = GasParams::new(gamma).map_err(|e| CatalogError::constraint("gamma > 1", e.to_string()))?;
    let built = match id {
        FamilyId::Constant => simple::constant(&reader)?,
        FamilyId::R1E => simple::rank1_sound(&reader, &gas)?,
        FamilyId::R1S => simple::rank1_vortex(&reader)?,
        FamilyId::R2E1E2 => double::sound_sound(&reader, &gas)?,
        FamilyId::R2E1S2 => double::sound_vortex(&reader, &gas)?,
        FamilyId::R2S1S2Ma => double::vortex_monge_ampere(&reader)?,
        FamilyId::R2S1S2Add => double::vortex_additive(&reader)?,
        FamilyId::R2E1E2S3 => double::two_sound_one_vortex(&reader, &gas)?,
        FamilyId::R2E1S2S3 => double::one_sound_two_vortex(&reader, &gas)?,
        FamilyId::R2S1S2S3 => double::snoidal(&reader)?,
        FamilyId::R3E1E2E3 => triple::triple_sound(&reader, &gas)?,
        FamilyId::R3E1S2S3V1 => transported::column_transport(&reader, &gas)?,
        FamilyId::R3E1S2S3V2 => transported::swirl_transport(&reader, &gas)?,
        FamilyId::RkTimeA => time_only::time_sound_speed(&reader, &gas)?,
    };
    let default_branch = match reader.take("branch") {
        None => built.default_branch,
        Some(v) => {
            let b: Branch = v.to_string().parse()?;
            reader
                .resolved
                .borrow_mut()
                .insert("branch".into(), ParamValue::Text(v.to_string()));
            b
        }
    };
    let params = reader.finish(id)?;
    Ok(FamilySpec {
        id,
        variant: built.variant,
        params,
        gas,
        rank: built.rank,
        invariant_count: built.invariant_count,
        singular_times: built.singular_times,
        bounded: built.bounded,
        window: built.window,
        default_branch,
        notes: built.notes,
        flagged: built.flagged,
        model: built.model,
    })
}

/// Convenience: build from `key=value` strings.
pub fn make_family_from_strs(id: FamilyId, pairs: &[(&str, &str)]) -> Result<FamilySpec, CatalogError> {
    let params = pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.parse().expect("infallible")))
        .collect();
    make_family(id, &params)
}

/// Names of the presets each family accepts through the `variant` key.
pub fn variants(id: FamilyId) -> &'static [&'static str] {
    match id {
        FamilyId::Constant => &["uniform"],
        FamilyId::R1E => simple::SOUND_VARIANTS,
        FamilyId::R1S => simple::VORTEX_VARIANTS,
        FamilyId::R2E1E2 => double::SOUND_SOUND_VARIANTS,
        FamilyId::R2E1S2 => double::SOUND_VORTEX_VARIANTS,
        FamilyId::R2S1S2Ma => double::MONGE_AMPERE_VARIANTS,
        FamilyId::R2S1S2Add => double::ADDITIVE_VARIANTS,
        FamilyId::R2E1E2S3 => &["tanh"],
        FamilyId::R2E1S2S3 => &["linear"],
        FamilyId::R2S1S2S3 => &["snoidal"],
        FamilyId::R3E1E2E3 => triple::VARIANTS,
        FamilyId::R3E1S2S3V1 => transported::COLUMN_VARIANTS,
        FamilyId::R3E1S2S3V2 => transported::SWIRL_VARIANTS,
        FamilyId::RkTimeA => time_only::VARIANTS,
    }
}

/// Every registry entry with default parameters.
pub fn registry() -> Vec<FamilySpec> {
    FamilyId::ALL
        .iter()
        .map(|&id| make_family(id, &Params::new()).expect("registry defaults are valid"))
        .collect()
}

pub(crate) fn variant_param(p: &ParamReader<'_>, id: FamilyId) -> Result<String, CatalogError> {
    let names = variants(id);
    p.text("variant", names[0], names)
}

/// Evaluates a spatial Hessian-based Monge-Ampere residual
/// `max |h11 h22 - h12^2 - b1|` over the sample points.
pub fn monge_ampere_residual(h: &dyn StreamFunction, b1: f64, samples: &[(f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(x, y)| {
            let [hxx, hxy, hyy] = h.hessian(x, y).unwrap_or_else(|| time_only::fd_hessian(h, x, y));
            (hxx * hyy - hxy * hxy - b1).abs()
        })
        .fold(0.0, f64::max)
}
