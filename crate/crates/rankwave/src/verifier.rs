//! Substitutes evaluated families into the fluid equations and probes the
//! onset of gradient catastrophes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{Branch, CatalogError, FamilySpec};
use crate::fluid::GasParams;
use crate::linalg::{self, Matrix};
use crate::solver::ImplicitPoint;

/// Points whose implicit-function determinant is smaller than this are
/// skipped and counted.
pub const SKIP_COND_DET: f64 = 1e-6;
/// Default finite-difference step, multiplied by each axis range.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Default thresholds on the normalised maximum residual.
pub const EXACT_THRESHOLD: f64 = 1e-8;
pub const FD_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("malformed grid term '{0}': expected axis=start:stop:count")]
    Term(String),
    #[error("unknown grid axis '{0}'")]
    Axis(String),
    #[error("grid axis '{0}' given twice")]
    Duplicate(String),
    #[error("grid axis '{0}' is missing")]
    Missing(String),
    #[error("grid axis '{axis}': {reason}")]
    Range { axis: String, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifierError {
    #[error("every one of the {0} points was skipped")]
    Empty(usize),
    #[error("grid spacing {spacing:e} on axis {axis} is below four FD steps ({h:e})")]
    GridTooFine { axis: usize, spacing: f64, h: f64 },
    #[error("step h = {0} must be positive and finite")]
    Step(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// `count` equally spaced values from `start` to `stop`; a single value
/// means the axis is held at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }

    pub fn is_active(&self) -> bool {
        self.count > 1
    }

    pub fn spacing(&self) -> f64 {
        if self.is_active() {
            (self.stop - self.start).abs() / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    fn validate(&self, axis: &str) -> Result<(), GridError> {
        let bad = |reason: &str| GridError::Range {
            axis: axis.into(),
            reason: reason.into(),
        };
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        if self.count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if self.count > 1 && self.start == self.stop {
            return Err(bad("an axis with several points needs distinct bounds"));
        }
        Ok(())
    }
}

pub const AXIS_NAMES: [&str; 4] = ["t", "x1", "x2", "x3"];

/// Rectangular spacetime grid, traversed as an odometer with `t` slowest
/// and `x3` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t: AxisRange,
    pub x: [AxisRange; 3],
}

impl GridSpec {
    pub fn new(t: AxisRange, x: [AxisRange; 3]) -> Result<Self, GridError> {
        let grid = Self { t, x };
        for (axis, name) in grid.axes().iter().zip(AXIS_NAMES) {
            axis.validate(name)?;
        }
        Ok(grid)
    }

    /// Grid spanning a family's validity window.
    pub fn over_window(family: &FamilySpec, nt: usize, nx: usize) -> Self {
        let w = family.window;
        Self {
            t: AxisRange::new(w.t.0, w.t.1, nt),
            x: w.x.map(|(a, b)| AxisRange::new(a, b, nx)),
        }
    }

    pub fn axes(&self) -> [AxisRange; 4] {
        [self.t, self.x[0], self.x[1], self.x[2]]
    }

    pub fn len(&self) -> usize {
        self.axes().iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<[f64; 4]> {
        let vals = self.axes().map(|a| a.values());
        let mut out = Vec::with_capacity(self.len());
        for &t in &vals[0] {
            for &x1 in &vals[1] {
                for &x2 in &vals[2] {
                    for &x3 in &vals[3] {
                        out.push([t, x1, x2, x3]);
                    }
                }
            }
        }
        out
    }
}

impl FromStr for GridSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let mut slots: [Option<AxisRange>; 4] = [None; 4];
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (name, spec) = term.split_once('=').ok_or_else(|| GridError::Term(term.into()))?;
            let name = name.trim();
            let idx = AXIS_NAMES
                .iter()
                .position(|a| *a == name)
                .ok_or_else(|| GridError::Axis(name.into()))?;
            if slots[idx].is_some() {
                return Err(GridError::Duplicate(name.into()));
            }
            let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
            let [a, b, n] = parts[..] else {
                return Err(GridError::Term(term.into()));
            };
            let parse = |v: &str| v.parse::<f64>().map_err(|_| GridError::Term(term.into()));
            let count = n.parse::<usize>().map_err(|_| GridError::Term(term.into()))?;
            slots[idx] = Some(AxisRange::new(parse(a)?, parse(b)?, count));
        }
        let get = |i: usize| slots[i].ok_or_else(|| GridError::Missing(AXIS_NAMES[i].into()));
        Self::new(get(0)?, [get(1)?, get(2)?, get(3)?])
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .axes()
            .iter()
            .zip(AXIS_NAMES)
            .map(|(a, n)| format!("{n}={}:{}:{}", a.start, a.stop, a.count))
            .collect();
        f.write_str(&terms.join(","))
    }
}

/// The four fluid equations at a point: `Da + a div u / κ` and
/// `Du_i + κ a ∂_i a`, with `D = ∂_t + u·∇`.
pub fn fluid_residual(state: &[f64; 4], jac: &Matrix, gas: &GasParams) -> [f64; 4] {
    let kappa = gas.kappa();
    let a = state[0];
    let convective = |row: usize| jac[(row, 0)] + (1..4).map(|i| state[i] * jac[(row, i)]).sum::<f64>();
    let div = jac[(1, 1)] + jac[(2, 2)] + jac[(3, 3)];
    [
        convective(0) + a * div / kappa,
        convective(1) + kappa * a * jac[(0, 1)],
        convective(2) + kappa * a * jac[(0, 2)],
        convective(3) + kappa * a * jac[(0, 3)],
    ]
}

/// `1 + max |field|`.
pub fn field_scale(state: &[f64; 4]) -> f64 {
    1.0 + state.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// How the derivatives entering the residual were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "finite-difference")]
    FiniteDifference { order: FdOrder },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::FiniteDifference { .. } => "finite-difference",
        }
    }

    pub fn default_threshold(&self) -> f64 {
        match self {
            Self::Exact => EXACT_THRESHOLD,
            Self::FiniteDifference { .. } => FD_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum FdOrder {
    #[default]
    Second,
    Fourth,
}

/// Classification of one evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    NearCatastrophe,
    Invalid,
    NoConvergence,
}

impl PointStatus {
    pub fn of(result: &Result<ImplicitPoint, CatalogError>) -> Self {
        match result {
            Ok(p) if p.cond_det.abs() < SKIP_COND_DET => Self::NearCatastrophe,
            Ok(_) => Self::Ok,
            Err(e) if e.is_near_catastrophe() => Self::NearCatastrophe,
            Err(CatalogError::Solver(_)) => Self::NoConvergence,
            Err(_) => Self::Invalid,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NearCatastrophe => "near_catastrophe",
            Self::Invalid => "invalid",
            Self::NoConvergence => "no_convergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EquationStats {
    /// Largest normalised residual.
    pub max: f64,
    /// Mean normalised residual.
    pub mean: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
}

/// Per-equation residual statistics over a point set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub method: Method,
    pub equations: [EquationStats; 4],
    pub points: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub skipped_near_catastrophe: usize,
    pub h: Option<f64>,
    pub grid: Option<GridSpec>,
}

impl ResidualReport {
    /// Largest normalised residual over all equations.
    pub fn max_normalized(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.max))
    }

    pub fn max_abs(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.max_abs))
    }

    pub fn skipped_fraction(&self) -> f64 {
        self.skipped as f64 / self.points.max(1) as f64
    }
}

/// Associative accumulator for the parallel reduction.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    max: [f64; 4],
    sum: [f64; 4],
    max_abs: [f64; 4],
    sum_abs: [f64; 4],
    count: usize,
    skipped: usize,
    catastrophe: usize,
}

impl Acc {
    fn point(res: [f64; 4], scale: f64) -> Self {
        let abs = res.map(f64::abs);
        let norm = abs.map(|v| v / scale);
        Self {
            max: norm,
            sum: norm,
            max_abs: abs,
            sum_abs: abs,
            count: 1,
            ..Self::default()
        }
    }

    fn skip(status: PointStatus) -> Self {
        Self {
            skipped: 1,
            catastrophe: usize::from(status == PointStatus::NearCatastrophe),
            ..Self::default()
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            max: std::array::from_fn(|i| self.max[i].max(o.max[i])),
            sum: std::array::from_fn(|i| self.sum[i] + o.sum[i]),
            max_abs: std::array::from_fn(|i| self.max_abs[i].max(o.max_abs[i])),
            sum_abs: std::array::from_fn(|i| self.sum_abs[i] + o.sum_abs[i]),
            count: self.count + o.count,
            skipped: self.skipped + o.skipped,
            catastrophe: self.catastrophe + o.catastrophe,
        }
    }

    fn report(self, method: Method, h: Option<f64>, grid: Option<GridSpec>) -> Result<ResidualReport, VerifierError> {
        let points = self.count + self.skipped;
        if self.count == 0 {
            return Err(VerifierError::Empty(points));
        }
        let n = self.count as f64;
        Ok(ResidualReport {
            method,
            equations: std::array::from_fn(|i| EquationStats {
                max: self.max[i],
                mean: self.sum[i] / n,
                max_abs: self.max_abs[i],
                mean_abs: self.sum_abs[i] / n,
            }),
            points,
            evaluated: self.count,
            skipped: self.skipped,
            skipped_near_catastrophe: self.catastrophe,
            h,
            grid,
        })
    }
}

fn evaluate_at(family: &FamilySpec, x: &[f64; 4], branch: Option<Branch>, guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
    family.evaluate_from(x[0], [x[1], x[2], x[3]], branch, guess)
}

/// Residuals from the exact Jacobi matrix at each point.
pub fn residual_exact(family: &FamilySpec, points: &[[f64; 4]], branch: Option<Branch>) -> Result<ResidualReport, VerifierError> {
    points
        .par_iter()
        .map(|x| {
            let result = evaluate_at(family, x, branch, None);
            match PointStatus::of(&result) {
                PointStatus::Ok => {
                    let p = result.expect("status ok");
                    let state = p.fields();
                    Acc::point(fluid_residual(&state, &p.jac, &family.gas), field_scale(&state))
                }
                status => Acc::skip(status),
            }
        })
        .reduce(Acc::default, Acc::merge)
        .report(Method::Exact, None, None)
}

/// [`residual_exact`] over every point of a grid.
pub fn residual_exact_grid(family: &FamilySpec, grid: &GridSpec, branch: Option<Branch>) -> Result<ResidualReport, VerifierError> {
    let mut report = residual_exact(family, &grid.points(), branch)?;
    report.grid = Some(*grid);
    Ok(report)
}

/// Per-axis steps: `h` times the axis range, or `h` on inactive axes.
pub fn axis_steps(grid: &GridSpec, h: f64) -> [f64; 4] {
    grid.axes().map(|a| {
        let range = (a.stop - a.start).abs();
        if a.is_active() && range > 0.0 {
            h * range
        } else {
            h
        }
    })
}

/// Residuals with the Jacobi matrix replaced by central differences of
/// the evaluated fields. Neighbouring evaluations are warm-started from
/// the centre point so they stay on its solution sheet.
pub fn residual_fd(
    family: &FamilySpec,
    grid: &GridSpec,
    h: f64,
    order: FdOrder,
    branch: Option<Branch>,
) -> Result<ResidualReport, VerifierError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(VerifierError::Step(h));
    }
    let steps = axis_steps(grid, h);
    for (axis, a) in grid.axes().iter().enumerate() {
        if a.is_active() && a.spacing() < 4.0 * steps[axis] {
            return Err(VerifierError::GridTooFine {
                axis,
                spacing: a.spacing(),
                h: steps[axis],
            });
        }
    }
    let offsets: &[(f64, f64)] = match order {
        FdOrder::Second => &[(1.0, 0.5), (-1.0, -0.5)],
        FdOrder::Fourth => &[(1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (2.0, -1.0 / 12.0), (-2.0, 1.0 / 12.0)],
    };
    grid.points()
        .par_iter()
        .map(|x| {
            let center = evaluate_at(family, x, branch, None);
            let status = PointStatus::of(&center);
            if status != PointStatus::Ok {
                return Acc::skip(status);
            }
            let center = center.expect("status ok");
            let mut jac = Matrix::zeros(4, 4);
            for (axis, &step) in steps.iter().enumerate() {
                for &(mult, weight) in offsets {
                    let mut y = *x;
                    y[axis] += mult * step;
                    let neighbour = evaluate_at(family, &y, branch, Some(&center.r));
                    let Ok(p) = neighbour else {
                        return Acc::skip(PointStatus::of(&neighbour));
                    };
                    let f = p.fields();
                    for row in 0..4 {
                        jac[(row, axis)] += weight * f[row] / step;
                    }
                }
            }
            let state = center.fields();
            Acc::point(fluid_residual(&state, &jac, &family.gas), field_scale(&state))
        })
        .reduce(Acc::default, Acc::merge)
        .report(Method::FiniteDifference { order }, Some(h), Some(*grid))
}

/// Observed order `log2(e(h) / e(h/2))` of the FD residual under step
/// halving, with both maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceOrder {
    pub coarse: f64,
    pub fine: f64,
    /// `None` when the coarse residual already sits at the rounding floor.
    pub order: Option<f64>,
}

/// Residual below which step halving measures rounding rather than
/// truncation, relative to the field scale.
pub const ROUNDING_FLOOR: f64 = 1e-11;

pub fn convergence_order(
    family: &FamilySpec,
    grid: &GridSpec,
    h: f64,
    order: FdOrder,
    branch: Option<Branch>,
) -> Result<ConvergenceOrder, VerifierError> {
    let coarse = residual_fd(family, grid, h, order, branch)?.max_normalized();
    let fine = residual_fd(family, grid, 0.5 * h, order, branch)?.max_normalized();
    let measured = (coarse > ROUNDING_FLOOR && fine > 0.0).then(|| (coarse / fine).log2());
    Ok(ConvergenceOrder {
        coarse,
        fine,
        order: measured,
    })
}

/// Where the characteristics carrying `r = 0` meet at time `t`: the
/// least-norm `x` with `λ(f(0))·(t, x) = 0`. Falls back to the window
/// centre for families without a superposition form.
pub fn focus_point(family: &FamilySpec, t: f64) -> [f64; 3] {
    let center = family.window.x.map(|(a, b)| 0.5 * (a + b));
    let Some(ansatz) = family.ansatz() else { return center };
    let k = ansatz.wave_count();
    let lam = ansatz.covectors(&ansatz.profile(&vec![0.0; k]));
    let spatial = Matrix::from_rows(&(0..k).map(|a| [lam[(a, 1)], lam[(a, 2)], lam[(a, 3)]]).collect::<Vec<_>>());
    let rhs: Vec<f64> = (0..k).map(|a| -lam[(a, 0)] * t).collect();
    let gram = &spatial * &spatial.transpose();
    match linalg::solve(&gram, &rhs) {
        Ok(y) if y.iter().all(|v| v.is_finite()) => {
            let x = spatial.transpose().mul_vec(&y);
            [x[0], x[1], x[2]]
        }
        _ => center,
    }
}

/// Sup-norm of the Jacobi matrix at one time of the probe schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSample {
    pub t: f64,
    pub jac_norm: Option<f64>,
}

/// Result of probing one singular time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeProbe {
    pub predicted: f64,
    /// Bisection estimate; `None` when the predicted time is not ahead.
    pub empirical: Option<f64>,
    pub relative_gap: Option<f64>,
    pub ray: [f64; 3],
    pub norms: Vec<NormSample>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CatastropheReport {
    NotApplicable { reason: String },
    Probed { times: Vec<TimeProbe> },
}

/// Scan resolution and bisection depth of the catastrophe probe.
pub const PROBE_SCAN_STEPS: usize = 128;
pub const PROBE_BISECTIONS: usize = 60;

fn model_point(family: &FamilySpec, t: f64, x: [f64; 3], guess: Option<&[f64]>) -> Result<ImplicitPoint, CatalogError> {
    family
        .model()
        .evaluate([t, x[0], x[1], x[2]], family.default_branch, guess)
}

/// Walks forward in time along the ray `x` from `t = 0`, warm-starting
/// each solve from the previous one, until the solver hits the catastrophe
/// guard or the determinant changes sign; the bracket is then bisected.
pub fn blowup_time(family: &FamilySpec, x: [f64; 3], horizon: f64) -> Option<f64> {
    let start = model_point(family, 0.0, x, None).ok()?;
    let sign = start.cond_det.signum();
    let broken = |p: &Result<ImplicitPoint, CatalogError>| match p {
        Ok(p) => p.cond_det.signum() != sign || p.cond_det.abs() < crate::solver::CATASTROPHE_TOL,
        Err(_) => true,
    };
    let dt = horizon / PROBE_SCAN_STEPS as f64;
    let (mut good_t, mut good_r) = (0.0, start.r.clone());
    let mut bad_t = None;
    for i in 1..=PROBE_SCAN_STEPS {
        let t = dt * i as f64;
        let p = model_point(family, t, x, Some(&good_r));
        if broken(&p) {
            bad_t = Some(t);
            break;
        }
        good_t = t;
        good_r = p.expect("not broken").r;
    }
    let mut bad_t = bad_t?;
    for _ in 0..PROBE_BISECTIONS {
        let mid = 0.5 * (good_t + bad_t);
        let p = model_point(family, mid, x, Some(&good_r));
        if broken(&p) {
            bad_t = mid;
        } else {
            good_t = mid;
            good_r = p.expect("not broken").r;
        }
    }
    Some(0.5 * (good_t + bad_t))
}

/// Probes every listed singular time of a family along the ray through
/// its focus point, or along `ray` when given.
pub fn catastrophe_probe(family: &FamilySpec, ray: Option<[f64; 3]>) -> CatastropheReport {
    if family.singular_times.is_empty() {
        return CatastropheReport::NotApplicable {
            reason: "the family has no finite singular time".into(),
        };
    }
    let times = family
        .singular_times
        .iter()
        .map(|&predicted| {
            let x = ray.unwrap_or_else(|| focus_point(family, predicted));
            if predicted <= 0.0 {
                return TimeProbe {
                    predicted,
                    empirical: None,
                    relative_gap: None,
                    ray: x,
                    norms: Vec::new(),
                    note: Some("singular time is not ahead of t = 0; outside the default window".into()),
                };
            }
            let mut guess: Option<Vec<f64>> = None;
            let norms = (1..=3)
                .map(|j| {
                    let t = predicted * (1.0 - 10f64.powi(-j));
                    let p = model_point(family, t, x, guess.as_deref()).ok();
                    let jac_norm = p.as_ref().map(|p| p.jac.norm_inf());
                    if let Some(p) = p {
                        guess = Some(p.r);
                    }
                    NormSample { t, jac_norm }
                })
                .collect();
            let empirical = blowup_time(family, x, 2.0 * predicted);
            TimeProbe {
                predicted,
                empirical,
                relative_gap: empirical.map(|e| (e - predicted).abs() / predicted.abs()),
                ray: x,
                norms,
                note: None,
            }
        })
        .collect();
    CatastropheReport::Probed { times }
}

/// Largest field magnitude over a window-spanning grid at the initial
/// time and over `[t0, t_end]`, following each spatial point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub initial_max: f64,
    pub overall_max: f64,
    pub t_end: f64,
    pub failed: usize,
}

impl BoundednessReport {
    pub fn ratio(&self) -> f64 {
        self.overall_max / self.initial_max
    }
}

pub fn boundedness_probe(family: &FamilySpec, t_end: f64, nx: usize, nt: usize) -> BoundednessReport {
    let w = family.window;
    let t0 = w.t.0;
    let xs = w.x.map(|(a, b)| AxisRange::new(a, b, nx).values());
    let mut rays = Vec::new();
    for &x1 in &xs[0] {
        for &x2 in &xs[1] {
            for &x3 in &xs[2] {
                rays.push([x1, x2, x3]);
            }
        }
    }
    let per_ray: Vec<(f64, f64, usize)> = rays
        .par_iter()
        .map(|&x| {
            let mag = |p: &ImplicitPoint| p.fields().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let Ok(first) = model_point(family, t0, x, None) else {
                return (0.0, 0.0, nt);
            };
            let init = mag(&first);
            let (mut top, mut failed, mut guess) = (init, 0, first.r);
            for i in 1..nt {
                let t = t0 + (t_end - t0) * i as f64 / (nt - 1) as f64;
                match model_point(family, t, x, Some(&guess)) {
                    Ok(p) => {
                        top = top.max(mag(&p));
                        guess = p.r;
                    }
                    Err(_) => failed += 1,
                }
            }
            (init, top, failed)
        })
        .collect();
    BoundednessReport {
        initial_max: per_ray.iter().fold(0.0, |m, r| m.max(r.0)),
        overall_max: per_ray.iter().fold(0.0, |m, r| m.max(r.1)),
        t_end,
        failed: per_ray.iter().map(|r| r.2).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_grammar_round_trips() {
        let g: GridSpec = "t=0:1:3,x1=-1:1:2,x2=0:0:1,x3=0.5:1.5:2".parse().unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
        let pts = g.points();
        assert_eq!(pts[0], [0.0, -1.0, 0.0, 0.5]);
        assert_eq!(pts[1], [0.0, -1.0, 0.0, 1.5]);
        assert_eq!(pts[11], [1.0, 1.0, 0.0, 1.5]);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        for bad in [
            "",
            "t=0:1:3",
            "t=0:1,x1=0:1:2,x2=0:1:2,x3=0:1:2",
            "t=0:1:3,x1=0:1:2,x2=0:1:2,x4=0:1:2",
            "t=0:1:3,t=0:1:3,x1=0:1:2,x2=0:1:2",
            "t=0:1:0,x1=0:1:2,x2=0:1:2,x3=0:1:2",
            "t=a:1:3,x1=0:1:2,x2=0:1:2,x3=0:1:2",
            "t=1:1:3,x1=0:1:2,x2=0:1:2,x3=0:1:2",
            "t=0:inf:3,x1=0:1:2,x2=0:1:2,x3=0:1:2",
        ] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn accumulator_merge_is_associative() {
        let a = Acc::point([1.0, 2.0, 0.0, 0.5], 2.0);
        let b = Acc::point([3.0, 0.0, 1.0, 0.5], 1.0);
        let c = Acc::skip(PointStatus::NearCatastrophe);
        let left = a.merge(b).merge(c);
        let right = a.merge(b.merge(c));
        assert_eq!(left.max, right.max);
        assert_eq!(left.sum, right.sum);
        assert_eq!((left.count, left.skipped, left.catastrophe), (2, 1, 1));
    }
}
