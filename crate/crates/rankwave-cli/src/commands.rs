use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use rankwave::catalog::{self, make_family, FamilySpec, WaveGen};
use rankwave::conditions::{
    bilinear_rank2_condition, involutivity_check, kernel_columns, kernel_dimensions, AnsatzConfig, Basis,
    ConditionResidual, ConditionsError, CovectorFields, TRACE_TOL,
};
use rankwave::fluid::GasParams;
use rankwave::solver::WaveAnsatz;
use rankwave::verifier::{
    catastrophe_probe, residual_exact_grid, residual_fd, CatastropheReport, GridSpec, Method, PointStatus,
    ResidualReport, AXIS_NAMES,
};

use crate::config::{Format, MethodChoice, RunConfig};
use crate::sampling::{seeded_points, seeded_states};
use crate::{CliError, Outcome};

/// Largest relative gap between predicted and bisected blow-up times that
/// still counts as agreement.
pub const CATASTROPHE_GAP_TOL: f64 = 0.01;

/// Grid used when `--grid` is absent: 5 times by 11 points per space axis.
pub const DEFAULT_NT: usize = 5;
pub const DEFAULT_NX: usize = 11;

fn build_family(cfg: &RunConfig) -> Result<FamilySpec, CliError> {
    Ok(make_family(cfg.family_id()?, &cfg.overrides)?)
}

fn grid_for(cfg: &RunConfig, family: &FamilySpec) -> GridSpec {
    cfg.grid.unwrap_or_else(|| GridSpec::over_window(family, DEFAULT_NT, DEFAULT_NX))
}

/// Writes `doc` to `--out` when given, otherwise returns it for stdout.
fn emit(cfg: &RunConfig, doc: String) -> Result<String, CliError> {
    match &cfg.out {
        Some(path) => {
            write_file(path, &doc)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(doc),
    }
}

fn write_file(path: &Path, doc: &str) -> Result<(), CliError> {
    std::fs::write(path, doc).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Family header shared by the JSON documents.
fn family_header(family: &FamilySpec) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("family".into(), json!(family.id.tag()));
    m.insert("variant".into(), json!(family.variant));
    m.insert("params".into(), json!(family.params));
    m
}

// ---------------------------------------------------------------- list

#[derive(Serialize)]
struct ListRecord {
    id: &'static str,
    description: &'static str,
    rank: usize,
    invariant_count: usize,
    variants: &'static [&'static str],
    params: catalog::Params,
    singular_times: Vec<f64>,
    bounded: bool,
    window: catalog::Window,
    flagged: bool,
    notes: Vec<String>,
}

pub fn cmd_list(format: Format) -> Result<Outcome, CliError> {
    let records: Vec<ListRecord> = catalog::registry()
        .into_iter()
        .map(|f| ListRecord {
            id: f.id.tag(),
            description: f.id.description(),
            rank: f.rank,
            invariant_count: f.invariant_count,
            variants: catalog::variants(f.id),
            params: f.params,
            singular_times: f.singular_times,
            bounded: f.bounded,
            window: f.window,
            flagged: f.flagged,
            notes: f.notes,
        })
        .collect();
    let stdout = match format {
        Format::Json => to_json(&records)?,
        Format::Csv | Format::Text => {
            let mut s = format!("{:<14} {:>4} {:>2}  {:<40} {}\n", "id", "rank", "k", "variants", "description");
            for r in &records {
                let _ = writeln!(
                    s,
                    "{:<14} {:>4} {:>2}  {:<40} {}",
                    r.id,
                    r.rank,
                    r.invariant_count,
                    r.variants.join(","),
                    r.description
                );
            }
            s
        }
    };
    Ok(Outcome::pass_if(true, stdout))
}

// ---------------------------------------------------------------- sample

/// One sampled row: the point, then invariants, fields and determinant
/// when the solve succeeded.
struct SampleRow {
    x: [f64; 4],
    point: Option<(Vec<f64>, [f64; 4], f64)>,
    status: PointStatus,
}

fn sample_rows(family: &FamilySpec, grid: &GridSpec) -> Vec<SampleRow> {
    grid.points()
        .par_iter()
        .map(|x| {
            let result = family.evaluate(x[0], [x[1], x[2], x[3]], None);
            let status = PointStatus::of(&result);
            SampleRow {
                x: *x,
                point: result.ok().map(|p| (p.r.clone(), p.fields(), p.cond_det)),
                status,
            }
        })
        .collect()
}

fn sample_columns(k: usize) -> Vec<String> {
    let mut cols: Vec<String> = AXIS_NAMES.iter().map(|s| s.to_string()).collect();
    cols.extend((1..=k).map(|i| format!("r{i}")));
    cols.extend(["a", "u1", "u2", "u3", "cond_det", "status"].map(String::from));
    cols
}

fn sample_csv(rows: &[SampleRow], k: usize) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(sample_columns(k))?;
    for row in rows {
        let mut rec: Vec<String> = row.x.iter().map(|&v| num(v)).collect();
        match &row.point {
            Some((r, fields, det)) => {
                rec.extend((0..k).map(|i| r.get(i).map_or_else(String::new, |&v| num(v))));
                rec.extend(fields.iter().map(|&v| num(v)));
                rec.push(num(*det));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), k + 5)),
        }
        rec.push(row.status.tag().to_string());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn sample_json(family: &FamilySpec, grid: &GridSpec, rows: &[SampleRow]) -> Result<String, CliError> {
    let points: Vec<Value> = rows
        .iter()
        .map(|row| {
            let (r, fields, det) = match &row.point {
                Some((r, f, d)) => (json!(r), json!(f), json!(d)),
                None => (Value::Null, Value::Null, Value::Null),
            };
            json!({"x": row.x, "r": r, "fields": fields, "cond_det": det, "status": row.status.tag()})
        })
        .collect();
    let mut doc = family_header(family);
    doc.insert("grid".into(), json!(grid.to_string()));
    doc.insert("points".into(), Value::Array(points));
    to_json(&doc)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let family = build_family(cfg)?;
    let grid = grid_for(cfg, &family);
    let rows = sample_rows(&family, &grid);
    let doc = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => sample_csv(&rows, family.invariant_count)?,
        Format::Json => sample_json(&family, &grid, &rows)?,
        Format::Text => return Err(CliError::Usage("sample writes csv or json".into())),
    };
    Ok(Outcome::pass_if(true, emit(cfg, doc)?))
}

// ---------------------------------------------------------------- verify

fn run_verify(cfg: &RunConfig, family: &FamilySpec, grid: &GridSpec) -> Result<ResidualReport, CliError> {
    Ok(match cfg.method {
        MethodChoice::Exact => residual_exact_grid(family, grid, None)?,
        MethodChoice::Fd => residual_fd(family, grid, cfg.h, cfg.order, None)?,
    })
}

fn verify_text(family: &FamilySpec, report: &ResidualReport, threshold: f64, pass: bool) -> String {
    let mut s = format!(
        "{} [{}] method {} over {} points ({} skipped)\n",
        family.id.tag(),
        family.variant,
        report.method.tag(),
        report.points,
        report.skipped
    );
    let _ = writeln!(s, "{:<4} {:>12} {:>12} {:>12} {:>12}", "eq", "max", "mean", "max_abs", "mean_abs");
    for (i, e) in report.equations.iter().enumerate() {
        let _ = writeln!(
            s,
            "eq{:<2} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            i + 1,
            e.max,
            e.mean,
            e.max_abs,
            e.mean_abs
        );
    }
    let _ = writeln!(s, "{} (threshold {threshold:.1e})", if pass { "PASS" } else { "FAIL" });
    s
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let family = build_family(cfg)?;
    let grid = grid_for(cfg, &family);
    let started = Instant::now();
    let report = run_verify(cfg, &family, &grid)?;
    let runtime_ms = started.elapsed().as_millis() as u64;
    let threshold = cfg.threshold.unwrap_or_else(|| report.method.default_threshold());
    let pass = report.max_normalized() <= threshold;
    let doc = match cfg.format.unwrap_or(Format::Json) {
        Format::Text => verify_text(&family, &report, threshold, pass),
        Format::Json | Format::Csv => {
            let residuals: serde_json::Map<String, Value> = report
                .equations
                .iter()
                .enumerate()
                .map(|(i, e)| (format!("eq{}", i + 1), json!(e)))
                .collect();
            let (method, order) = match report.method {
                Method::Exact => ("exact", None),
                Method::FiniteDifference { order } => ("fd", Some(order)),
            };
            let mut doc = family_header(&family);
            doc.insert("grid".into(), json!(grid.to_string()));
            doc.insert("method".into(), json!(method));
            doc.insert("fd_order".into(), json!(order));
            doc.insert("h".into(), json!(report.h));
            doc.insert("residuals".into(), Value::Object(residuals));
            doc.insert("points".into(), json!(report.points));
            doc.insert("skipped".into(), json!(report.skipped));
            doc.insert("skipped_near_catastrophe".into(), json!(report.skipped_near_catastrophe));
            doc.insert("threshold".into(), json!(threshold));
            doc.insert("runtime_ms".into(), json!(runtime_ms));
            doc.insert("pass".into(), json!(pass));
            to_json(&doc)?
        }
    };
    Ok(Outcome::pass_if(pass, emit(cfg, doc)?))
}

// ---------------------------------------------------------------- conditions

#[derive(Debug, Clone, Serialize)]
struct ConditionRow {
    sample: usize,
    condition: String,
    /// Spacetime point for family runs, state for wave-pair runs.
    at: Vec<f64>,
    max_abs: Option<f64>,
    scale: Option<f64>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl ConditionRow {
    fn from_residual(
        sample: usize,
        condition: String,
        at: Vec<f64>,
        result: Result<ConditionResidual, ConditionsError>,
    ) -> Self {
        match result {
            Ok(res) => Self {
                sample,
                condition,
                at,
                max_abs: Some(res.max_abs()),
                scale: Some(res.scale),
                pass: res.passes(TRACE_TOL),
                error: None,
            },
            Err(e) => Self {
                sample,
                condition,
                at,
                max_abs: None,
                scale: None,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConditionSummary {
    condition: String,
    evaluated: usize,
    failures: usize,
    worst_relative: Option<f64>,
}

fn summarize(rows: &[ConditionRow]) -> Vec<ConditionSummary> {
    let mut order: Vec<String> = Vec::new();
    for r in rows {
        if !order.contains(&r.condition) {
            order.push(r.condition.clone());
        }
    }
    order
        .into_iter()
        .map(|condition| {
            let mine: Vec<&ConditionRow> = rows.iter().filter(|r| r.condition == condition).collect();
            let worst = mine
                .iter()
                .filter_map(|r| Some(r.max_abs? / r.scale?))
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            ConditionSummary {
                evaluated: mine.len(),
                failures: mine.iter().filter(|r| !r.pass).count(),
                worst_relative: worst,
                condition,
            }
        })
        .collect()
}

fn involutivity_row<W: CovectorFields + ?Sized>(sample: usize, at: Vec<f64>, waves: &W, gas: &GasParams, state: &[f64; 4]) -> ConditionRow {
    let lambdas = |u: &[f64; 4]| -> Vec<[f64; 4]> {
        let lam = waves.covectors(u);
        (0..lam.rows()).map(|a| std::array::from_fn(|i| lam[(a, i)])).collect()
    };
    let gammas = |u: &[f64; 4]| -> Vec<[f64; 4]> {
        let g = kernel_columns(&waves.covectors(u), u, gas);
        (0..g.cols()).map(|a| std::array::from_fn(|i| g[(i, a)])).collect()
    };
    let rep = involutivity_check(&gammas, &lambdas, state, rankwave::conditions::DEFAULT_FD_STEP);
    let worst = rep
        .pairs
        .iter()
        .flat_map(|p| p.commutator)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    ConditionRow {
        sample,
        condition: "involutivity".into(),
        at,
        max_abs: Some(worst),
        scale: Some(1.0),
        pass: rep.holds(),
        error: None,
    }
}

fn family_condition_rows(cfg: &RunConfig, family: &FamilySpec, notes: &mut Vec<String>) -> Vec<ConditionRow> {
    let Some(ansatz) = family.ansatz() else {
        notes.push("family is not a wave superposition; conditions are vacuous".into());
        return Vec::new();
    };
    let k = ansatz.wave_count();
    let basis = match family.model().normalization_pivots() {
        Some(pivots) => Basis::Normalized { pivots },
        None => Basis::Raw,
    };
    if k == 1 {
        notes.push("single wave: higher-order conditions are identically satisfied".into());
    }
    let acfg = AnsatzConfig {
        ansatz,
        gas: family.gas,
    };
    let points = seeded_points(family, k, cfg.samples, cfg.seed);
    points
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, p)| {
            let at = p.x.to_vec();
            let mut rows = vec![ConditionRow::from_residual(
                i,
                "initial".into(),
                at.clone(),
                rankwave::conditions::trace_condition_initial(&acfg, &p.r, &basis),
            )];
            for s in 1..k {
                rows.push(ConditionRow::from_residual(
                    i,
                    format!("order{s}"),
                    at.clone(),
                    rankwave::conditions::trace_condition_higher(&acfg, &p.r, s, &basis),
                ));
            }
            let state = ansatz.profile(&p.r);
            let lam = WaveAnsatz::covectors(ansatz, &state);
            let simple = kernel_dimensions(&lam, &state, &family.gas).iter().all(|d| *d == Some(1));
            if k == 2 && simple {
                rows.push(ConditionRow::from_residual(
                    i,
                    "bilinear".into(),
                    at.clone(),
                    bilinear_rank2_condition(ansatz, &family.gas, &state),
                ));
            }
            if k >= 2 && simple {
                rows.push(involutivity_row(i, at, ansatz, &family.gas, &state));
            }
            rows
        })
        .collect()
}

/// Parses `potential:e1,e2,e3` or `rotational:l1,l2,l3`.
pub fn parse_wave(s: &str) -> Result<WaveGen, CliError> {
    let bad = || CliError::Usage(format!("wave '{s}' must be potential:x,y,z or rotational:x,y,z"));
    let (kind, dir) = s.split_once(':').ok_or_else(bad)?;
    let v = crate::config::parse_ray(dir).map_err(|_| bad())?;
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    match kind.trim().to_ascii_lowercase().as_str() {
        "potential" if (norm - 1.0).abs() <= 1e-9 => Ok(WaveGen::Potential { e: v }),
        "potential" => Err(CliError::Usage(format!("potential wave direction must be a unit vector, |e| = {norm}"))),
        "rotational" if norm > 0.0 => Ok(WaveGen::Rotational { ell: v }),
        "rotational" => Err(CliError::Usage("rotational wave normal must be nonzero".into())),
        _ => Err(bad()),
    }
}

fn wave_condition_rows(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<Vec<ConditionRow>, CliError> {
    if cfg.waves.len() != 2 {
        return Err(CliError::Usage(format!(
            "the pair checks take exactly two --wave arguments, got {}",
            cfg.waves.len()
        )));
    }
    let waves: Vec<WaveGen> = cfg.waves.iter().map(|w| parse_wave(w)).collect::<Result<_, _>>()?;
    let gas = GasParams::default();
    let states = seeded_states(cfg.samples, cfg.seed);
    let rotational = waves.iter().any(|w| matches!(w, WaveGen::Rotational { .. }));
    if rotational {
        notes.push("a rotational wave has a two-dimensional kernel; only the involutivity of the covectors is checked".into());
    }
    Ok(states
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, state)| {
            let at = state.to_vec();
            let mut rows = Vec::new();
            if !rotational {
                rows.push(ConditionRow::from_residual(
                    i,
                    "bilinear".into(),
                    at.clone(),
                    bilinear_rank2_condition(waves.as_slice(), &gas, state),
                ));
            }
            rows.push(involutivity_row(i, at, waves.as_slice(), &gas, state));
            rows
        })
        .collect())
}

fn conditions_text(header: &str, summary: &[ConditionSummary], notes: &[String], pass: bool) -> String {
    let mut s = format!("{header}\n");
    let _ = writeln!(s, "{:<14} {:>9} {:>9} {:>14}", "condition", "evaluated", "failures", "worst_relative");
    for c in summary {
        let worst = c.worst_relative.map_or_else(|| "-".to_string(), |w| format!("{w:.3e}"));
        let _ = writeln!(s, "{:<14} {:>9} {:>9} {:>14}", c.condition, c.evaluated, c.failures, worst);
    }
    for n in notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "{} (tolerance {TRACE_TOL:.0e} relative)", if pass { "PASS" } else { "FAIL" });
    s
}

pub fn cmd_conditions(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut notes = Vec::new();
    let (mut doc, rows) = if cfg.family.is_none() && !cfg.waves.is_empty() {
        let mut doc = serde_json::Map::new();
        doc.insert("waves".into(), json!(cfg.waves));
        (doc, wave_condition_rows(cfg, &mut notes)?)
    } else {
        let family = build_family(cfg)?;
        let rows = family_condition_rows(cfg, &family, &mut notes);
        (family_header(&family), rows)
    };
    let summary = summarize(&rows);
    let pass = rows.iter().all(|r| r.pass);
    let header = match doc.get("family") {
        Some(f) => format!("{} over {} seeded points (seed {})", f.as_str().unwrap_or("?"), cfg.samples, cfg.seed),
        None => format!("wave pair {} over {} seeded states (seed {})", cfg.waves.join(" "), cfg.samples, cfg.seed),
    };
    let out = match cfg.format.unwrap_or(Format::Json) {
        Format::Text => conditions_text(&header, &summary, &notes, pass),
        Format::Json | Format::Csv => {
            doc.insert("samples".into(), json!(cfg.samples));
            doc.insert("seed".into(), json!(cfg.seed));
            doc.insert("tolerance".into(), json!(TRACE_TOL));
            doc.insert("summary".into(), json!(summary));
            doc.insert("rows".into(), json!(rows));
            doc.insert("notes".into(), json!(notes));
            doc.insert("pass".into(), json!(pass));
            to_json(&doc)?
        }
    };
    Ok(Outcome::pass_if(pass, emit(cfg, out)?))
}

// ---------------------------------------------------------------- catastrophe

pub fn cmd_catastrophe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let family = build_family(cfg)?;
    let report = catastrophe_probe(&family, cfg.ray);
    let pass = match &report {
        CatastropheReport::NotApplicable { .. } => true,
        CatastropheReport::Probed { times } => times
            .iter()
            .filter(|t| t.predicted > 0.0)
            .all(|t| t.relative_gap.is_some_and(|g| g <= CATASTROPHE_GAP_TOL)),
    };
    let doc = match cfg.format.unwrap_or(Format::Json) {
        Format::Text => {
            let mut s = format!("{} [{}]\n", family.id.tag(), family.variant);
            match &report {
                CatastropheReport::NotApplicable { reason } => {
                    let _ = writeln!(s, "not applicable: {reason}");
                }
                CatastropheReport::Probed { times } => {
                    let _ = writeln!(s, "{:>14} {:>14} {:>12}  ray", "predicted", "empirical", "gap");
                    for t in times {
                        let emp = t.empirical.map_or_else(|| "-".into(), |e| format!("{e:.8}"));
                        let gap = t.relative_gap.map_or_else(|| "-".into(), |g| format!("{g:.3e}"));
                        let _ = writeln!(
                            s,
                            "{:>14.8} {:>14} {:>12}  ({:.4}, {:.4}, {:.4}){}",
                            t.predicted,
                            emp,
                            gap,
                            t.ray[0],
                            t.ray[1],
                            t.ray[2],
                            t.note.as_deref().map(|n| format!("  note: {n}")).unwrap_or_default()
                        );
                    }
                }
            }
            let _ = writeln!(s, "{}", if pass { "PASS" } else { "FAIL" });
            s
        }
        Format::Json | Format::Csv => {
            let mut doc = family_header(&family);
            doc.insert("report".into(), json!(report));
            doc.insert("gap_tolerance".into(), json!(CATASTROPHE_GAP_TOL));
            doc.insert("pass".into(), json!(pass));
            to_json(&doc)?
        }
    };
    Ok(Outcome::pass_if(pass, emit(cfg, doc)?))
}
