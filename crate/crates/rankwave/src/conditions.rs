//! Numerical checks of the compatibility conditions a wave superposition
//! must satisfy: trace conditions on `(∂f/∂r, λ, η)`, the profile-free
//! bilinear test for two waves, and the involutivity of the kernel and
//! covector fields.
//!
//! The low-level functions take plain matrices so that systems other than
//! the fluid model can be checked. The coefficient list is `[A^0, A^1, ...]`
//! with `A^0` usually the identity, each `l×q`; `∂f/∂r` is `q×k`, `λ` is
//! `k×p` and `η` holds one `k×q` matrix `∂λ^A_a/∂u^α` per column `a`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::WaveGen;
use crate::fluid::{coefficient_matrices, GasParams, StateVec};
use crate::linalg::{self, LinalgError, Matrix};
use crate::solver::WaveAnsatz;

/// Relative tolerance of the span-membership rank test.
pub const SPAN_RANK_TOL: f64 = 1e-7;
/// Default central-difference step for the involutivity check.
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Relative disagreement between the `h` and `h/2` estimates above which
/// the Richardson combination replaces the `h/2` one.
pub const RICHARDSON_TRIGGER: f64 = 1e-5;
/// Pass threshold of the trace and bilinear residuals, relative to their scale.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ConditionsError {
    #[error("order s = {s} is outside 1..={max} for {k} waves")]
    OrderOutOfRange { s: usize, k: usize, max: usize },
    #[error("expected {expected} waves, got {got}")]
    WaveCount { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("pivot columns {0:?} are invalid for the wave basis")]
    Pivots(Vec<usize>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `out[μ] = Σ_i Σ_α C_i[μ, α] X[α, i]` for `X` of shape `q×p`.
pub fn trace_functional(coeffs: &[Matrix], x: &Matrix) -> Result<Vec<f64>, ConditionsError> {
    if coeffs.len() != x.cols() {
        return Err(ConditionsError::Shape(format!(
            "{} coefficient matrices for {} columns",
            coeffs.len(),
            x.cols()
        )));
    }
    let l = coeffs.first().map_or(0, Matrix::rows);
    let mut out = vec![0.0; l];
    for (i, c) in coeffs.iter().enumerate() {
        if c.rows() != l || c.cols() != x.rows() {
            return Err(ConditionsError::Shape(format!("coefficient {i} is {}x{}", c.rows(), c.cols())));
        }
        for (mu, o) in out.iter_mut().enumerate() {
            *o += (0..x.rows()).map(|alpha| c[(mu, alpha)] * x[(alpha, i)]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Residuals of `tr(A (∂f/∂r) λ)`, one per row of the coefficients.
pub fn initial_residuals(coeffs: &[Matrix], profile_jac: &Matrix, covectors: &Matrix) -> Result<Vec<f64>, ConditionsError> {
    trace_functional(coeffs, &profile_jac.try_mul(covectors)?)
}

/// Nondecreasing index sequences of length `s` over `0..p`.
fn multisets(p: usize, s: usize) -> Vec<Vec<usize>> {
    fn grow(p: usize, s: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for a in start..p {
            cur.push(a);
            grow(p, s, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(p, s, 0, &mut Vec::new(), &mut out);
    out
}

fn distinct_permutations(items: &[usize]) -> BTreeSet<Vec<usize>> {
    if items.len() <= 1 {
        return BTreeSet::from([items.to_vec()]);
    }
    let mut out = BTreeSet::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in distinct_permutations(&rest) {
            tail.insert(0, head);
            out.insert(tail);
        }
    }
    out
}

/// Residuals of the order-`s` condition, symmetrised over the column
/// indices: for every multiset `{a_1..a_s}` the average over its distinct
/// orderings of `(∂f/∂r) η_{a_1} (∂f/∂r) ... η_{a_s} (∂f/∂r) λ` is fed to
/// the trace functional. Multisets are listed in lexicographic order.
pub fn higher_residuals(
    coeffs: &[Matrix],
    profile_jac: &Matrix,
    covectors: &Matrix,
    eta: &[Matrix],
    s: usize,
) -> Result<Vec<f64>, ConditionsError> {
    let k = profile_jac.cols();
    if k <= 1 {
        return Ok(Vec::new());
    }
    if s == 0 || s >= k {
        return Err(ConditionsError::OrderOutOfRange { s, k, max: k - 1 });
    }
    if eta.len() != covectors.cols() {
        return Err(ConditionsError::Shape(format!("{} η matrices for {} columns", eta.len(), covectors.cols())));
    }
    let links: Vec<Matrix> = eta.iter().map(|e| e.try_mul(profile_jac)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for combo in multisets(eta.len(), s) {
        let perms = distinct_permutations(&combo);
        let mut acc = Matrix::zeros(profile_jac.rows(), covectors.cols());
        for perm in &perms {
            let mut chain = profile_jac.clone();
            for &a in perm {
                chain = &chain * &links[a];
            }
            acc = &acc + &(&chain * covectors);
        }
        out.extend(trace_functional(coeffs, &acc.scale(1.0 / perms.len() as f64))?);
    }
    Ok(out)
}

/// Profile-free two-wave test: for each column `a`, with `K_a = η_a Γ`,
/// the residuals of `tr(A Γ (K_a - I tr K_a) λ)`. `Γ` (`q×2`) holds a
/// kernel vector of each wave.
pub fn bilinear_residuals(
    coeffs: &[Matrix],
    kernels: &Matrix,
    covectors: &Matrix,
    eta: &[Matrix],
) -> Result<Vec<f64>, ConditionsError> {
    if kernels.cols() != 2 || covectors.rows() != 2 {
        return Err(ConditionsError::WaveCount {
            expected: 2,
            got: covectors.rows(),
        });
    }
    let mut out = Vec::new();
    for e in eta {
        let kmat = e.try_mul(kernels)?;
        let shifted = &kmat - &Matrix::identity(2).scale(kmat.trace());
        out.extend(trace_functional(coeffs, &(&(kernels * &shifted) * covectors))?);
    }
    Ok(out)
}

/// Covector fields `λ^A(u)` with their state derivatives.
pub trait CovectorFields {
    /// `k×4`, one covector per row.
    fn covectors(&self, u: &[f64; 4]) -> Matrix;
    /// Per wave, `∂λ^A_i/∂u^α` with rows `i` and columns `α`.
    fn covector_derivs(&self, u: &[f64; 4]) -> Vec<Matrix>;
}

impl<T: WaveAnsatz + ?Sized> CovectorFields for T {
    fn covectors(&self, u: &[f64; 4]) -> Matrix {
        WaveAnsatz::covectors(self, u)
    }

    fn covector_derivs(&self, u: &[f64; 4]) -> Vec<Matrix> {
        WaveAnsatz::covector_derivs(self, u)
    }
}

impl CovectorFields for [WaveGen] {
    fn covectors(&self, u: &[f64; 4]) -> Matrix {
        let rows: Vec<[f64; 4]> = self.iter().map(|w| w.covector(u)).collect();
        Matrix::from_rows(&rows)
    }

    fn covector_derivs(&self, u: &[f64; 4]) -> Vec<Matrix> {
        self.iter().map(|w| w.derivative(u)).collect()
    }
}

/// Basis in which the covectors enter the conditions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub enum Basis {
    /// The covectors as given.
    #[default]
    Raw,
    /// `λ̃ = B⁻¹λ` with `B = λ[:, pivots]`, so that `λ̃[:, pivots] = I`.
    /// Unaffected by rescaling or recombining the covectors.
    Normalized { pivots: Vec<usize> },
}

/// A wave superposition as seen by the condition checkers.
#[derive(Clone, Copy)]
pub struct AnsatzConfig<'a> {
    pub ansatz: &'a dyn WaveAnsatz,
    pub gas: GasParams,
}

/// The fluid coefficient list `[I, A^1, A^2, A^3]` at a state.
pub fn fluid_coefficients(state: &[f64; 4], gas: &GasParams) -> Vec<Matrix> {
    let sv = StateVec::from_array(*state);
    let mut out = vec![Matrix::identity(4)];
    out.extend(coefficient_matrices(&sv, gas));
    out
}

/// `η_a[A, α] = ∂λ^A_a/∂u^α`.
fn eta_from_derivs(derivs: &[Matrix]) -> Vec<Matrix> {
    (0..4)
        .map(|a| {
            let mut m = Matrix::zeros(derivs.len(), 4);
            for (wave, d) in derivs.iter().enumerate() {
                for alpha in 0..4 {
                    m[(wave, alpha)] = d[(a, alpha)];
                }
            }
            m
        })
        .collect()
}

/// Everything the trace conditions need at one invariant point.
#[derive(Debug, Clone)]
pub struct AnsatzData {
    pub state: [f64; 4],
    pub coeffs: Vec<Matrix>,
    pub profile_jac: Matrix,
    pub covectors: Matrix,
    pub eta: Vec<Matrix>,
}

impl AnsatzData {
    /// Data at `r`, in the requested basis.
    pub fn at(cfg: &AnsatzConfig<'_>, r: &[f64], basis: &Basis) -> Result<Self, ConditionsError> {
        let k = cfg.ansatz.wave_count();
        if r.len() != k {
            return Err(ConditionsError::WaveCount { expected: k, got: r.len() });
        }
        let state = cfg.ansatz.profile(r);
        let raw = Self {
            state,
            coeffs: fluid_coefficients(&state, &cfg.gas),
            profile_jac: cfg.ansatz.profile_jac(r),
            covectors: WaveAnsatz::covectors(cfg.ansatz, &state),
            eta: eta_from_derivs(&WaveAnsatz::covector_derivs(cfg.ansatz, &state)),
        };
        match basis {
            Basis::Raw => Ok(raw),
            Basis::Normalized { pivots } => raw.normalized(r, pivots),
        }
    }

    /// Rewrites the data for the invariants `r̃ = B⁻¹ r`. Differentiating
    /// `u = f(B(u) r̃)` gives `∂u/∂r̃ = (I - f_r M)⁻¹ f_r B` with
    /// `M[A, α] = Σ_C ∂B[A, C]/∂u^α r̃_C`, and `∂λ̃/∂u = B⁻¹(∂λ - ∂B λ̃)`.
    fn normalized(self, r: &[f64], pivots: &[usize]) -> Result<Self, ConditionsError> {
        let k = self.covectors.rows();
        let q = self.profile_jac.rows();
        let (binv, lam_t, db) = normalize_covectors(&self.covectors, &self.eta, pivots)?;
        let r_t = binv.mul_vec(r);
        let mut m = Matrix::zeros(k, q);
        for (alpha, dba) in db.iter().enumerate() {
            let col = dba.mul_vec(&r_t);
            for a in 0..k {
                m[(a, alpha)] = col[a];
            }
        }
        let lhs = &Matrix::identity(q) - &(&self.profile_jac * &m);
        let bmat = linalg::inverse(&binv)?;
        let fr_t = &linalg::inverse(&lhs)? * &(&self.profile_jac * &bmat);
        let eta_t = normalized_eta(&binv, &lam_t, &self.eta, &db);
        Ok(Self {
            profile_jac: fr_t,
            covectors: lam_t,
            eta: eta_t,
            ..self
        })
    }

    fn magnitude(&self) -> (f64, f64, f64, f64) {
        let coeff = self.coeffs.iter().map(Matrix::norm_max).fold(0.0, f64::max);
        let eta = self.eta.iter().map(Matrix::norm_max).fold(0.0, f64::max);
        (coeff, self.profile_jac.norm_max(), self.covectors.norm_max(), eta)
    }
}

/// `(B⁻¹, λ̃, ∂B/∂u^α for each α)`.
fn normalize_covectors(
    covectors: &Matrix,
    eta: &[Matrix],
    pivots: &[usize],
) -> Result<(Matrix, Matrix, Vec<Matrix>), ConditionsError> {
    let k = covectors.rows();
    let p = covectors.cols();
    let distinct: BTreeSet<_> = pivots.iter().collect();
    if pivots.len() != k || distinct.len() != k || pivots.iter().any(|&c| c >= p) {
        return Err(ConditionsError::Pivots(pivots.to_vec()));
    }
    let cols: Vec<Vec<f64>> = pivots.iter().map(|&c| covectors.col(c)).collect();
    let b = Matrix::from_columns(&cols);
    let binv = linalg::inverse(&b)?;
    let lam_t = &binv * covectors;
    let q = eta.first().map_or(0, Matrix::cols);
    let db = (0..q)
        .map(|alpha| {
            let mut d = Matrix::zeros(k, k);
            for a in 0..k {
                for (c, &col) in pivots.iter().enumerate() {
                    d[(a, c)] = eta[col][(a, alpha)];
                }
            }
            d
        })
        .collect();
    Ok((binv, lam_t, db))
}

/// `η̃_a[A, α] = (B⁻¹(∂λ_a/∂u^α - ∂B/∂u^α λ̃_a))[A]`.
fn normalized_eta(binv: &Matrix, lam_t: &Matrix, eta: &[Matrix], db: &[Matrix]) -> Vec<Matrix> {
    let k = lam_t.rows();
    (0..eta.len())
        .map(|a| {
            let lam_col = lam_t.col(a);
            let mut out = Matrix::zeros(k, db.len());
            for (alpha, dba) in db.iter().enumerate() {
                let corr = dba.mul_vec(&lam_col);
                let raw: Vec<f64> = (0..k).map(|w| eta[a][(w, alpha)] - corr[w]).collect();
                let v = binv.mul_vec(&raw);
                for w in 0..k {
                    out[(w, alpha)] = v[w];
                }
            }
            out
        })
        .collect()
}

/// Residual vector with the magnitude it is judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub values: Vec<f64>,
    pub scale: f64,
}

impl ConditionResidual {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |residual| / scale`.
    pub fn relative(&self) -> f64 {
        self.max_abs() / self.scale
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs() <= tol * self.scale
    }
}

/// Residuals of `tr(A (∂f/∂r) λ)` at `r`. The scale is
/// `(1 + |A|)(1 + |f_r|)(1 + |λ|)` in max-norms.
pub fn trace_condition_initial(cfg: &AnsatzConfig<'_>, r: &[f64], basis: &Basis) -> Result<ConditionResidual, ConditionsError> {
    let data = AnsatzData::at(cfg, r, basis)?;
    let (c, f, l, _) = data.magnitude();
    Ok(ConditionResidual {
        values: initial_residuals(&data.coeffs, &data.profile_jac, &data.covectors)?,
        scale: (1.0 + c) * (1.0 + f) * (1.0 + l),
    })
}

/// Residuals of the order-`s` condition at `r`; empty for a single wave.
/// Each extra `η f_r` link multiplies the scale by `(1 + |η|)(1 + |f_r|)`.
pub fn trace_condition_higher(
    cfg: &AnsatzConfig<'_>,
    r: &[f64],
    s: usize,
    basis: &Basis,
) -> Result<ConditionResidual, ConditionsError> {
    let data = AnsatzData::at(cfg, r, basis)?;
    let (c, f, l, e) = data.magnitude();
    Ok(ConditionResidual {
        values: higher_residuals(&data.coeffs, &data.profile_jac, &data.covectors, &data.eta, s)?,
        scale: (1.0 + c) * (1.0 + f) * (1.0 + l) * ((1.0 + e) * (1.0 + f)).powi(s as i32),
    })
}

/// Right singular vector of the smallest singular value, with its largest
/// component made positive so the choice is reproducible.
pub fn least_singular_vector(m: &Matrix) -> Vec<f64> {
    let mut v = linalg::svd(m).right.pop().unwrap_or_default();
    let lead = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Kernel vector of each wave matrix `λ_0 I + λ_i A^i`, as matrix columns.
pub fn kernel_columns(covectors: &Matrix, state: &[f64; 4], gas: &GasParams) -> Matrix {
    let sv = StateVec::from_array(*state);
    let cols: Vec<Vec<f64>> = (0..covectors.rows())
        .map(|w| {
            let row = covectors.row(w);
            let cov = [row[0], row[1], row[2], row[3]];
            least_singular_vector(&crate::fluid::wave_matrix(&sv, &cov, gas))
        })
        .collect();
    Matrix::from_columns(&cols)
}

/// Dimension of each wave's kernel; `None` for a covector that is not a
/// characteristic at `state`.
pub fn kernel_dimensions(covectors: &Matrix, state: &[f64; 4], gas: &GasParams) -> Vec<Option<usize>> {
    let sv = StateVec::from_array(*state);
    (0..covectors.rows())
        .map(|w| {
            let row = covectors.row(w);
            crate::fluid::wave_kernel(&sv, &[row[0], row[1], row[2], row[3]], gas)
                .ok()
                .map(|k| k.len())
        })
        .collect()
}

/// The two spatial covector columns with the best-conditioned 2×2 block.
fn spatial_pivots(covectors: &Matrix) -> Vec<usize> {
    let mut best = (vec![1, 2], f64::NEG_INFINITY);
    for (i, j) in [(1, 2), (1, 3), (2, 3)] {
        let d = (covectors[(0, i)] * covectors[(1, j)] - covectors[(0, j)] * covectors[(1, i)]).abs();
        if d > best.1 {
            best = (vec![i, j], d);
        }
    }
    best.0
}

/// Profile-free admissibility test of a wave pair at `state`. Kernels come
/// from the covectors as given, the covectors and their derivatives are
/// taken in the basis normalised on the best spatial pivots, so rescaling
/// either covector by a function of the state leaves the result unchanged.
/// Returns one residual per equation and covector column (16 for the fluid).
pub fn bilinear_rank2_condition<W: CovectorFields + ?Sized>(
    waves: &W,
    gas: &GasParams,
    state: &[f64; 4],
) -> Result<ConditionResidual, ConditionsError> {
    let lam = waves.covectors(state);
    if lam.rows() != 2 {
        return Err(ConditionsError::WaveCount {
            expected: 2,
            got: lam.rows(),
        });
    }
    let eta = eta_from_derivs(&waves.covector_derivs(state));
    let kernels = kernel_columns(&lam, state, gas);
    let pivots = spatial_pivots(&lam);
    let (binv, lam_t, db) = normalize_covectors(&lam, &eta, &pivots)?;
    let eta_t = normalized_eta(&binv, &lam_t, &eta, &db);
    let coeffs = fluid_coefficients(state, gas);
    let c = coeffs.iter().map(Matrix::norm_max).fold(0.0, f64::max);
    let e = eta_t.iter().map(Matrix::norm_max).fold(0.0, f64::max);
    Ok(ConditionResidual {
        values: bilinear_residuals(&coeffs, &kernels, &lam_t, &eta_t)?,
        scale: (1.0 + c) * (1.0 + e) * (1.0 + lam_t.norm_max()),
    })
}

/// Outcome of the involutivity check for one unordered pair of waves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInvolutivity {
    pub a: usize,
    pub b: usize,
    /// `[γ_a, γ_b]`.
    pub commutator: [f64; 4],
    pub commutator_in_span: bool,
    /// Whether `L_{γ_b} λ^a` and `L_{γ_a} λ^b` lie in `span{λ^a, λ^b}`.
    pub lie_derivative_in_span: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutivityReport {
    pub pairs: Vec<PairInvolutivity>,
}

impl InvolutivityReport {
    pub fn commutator_in_span(&self) -> Vec<bool> {
        self.pairs.iter().map(|p| p.commutator_in_span).collect()
    }

    pub fn lie_derivative_in_span(&self) -> Vec<bool> {
        self.pairs.iter().flat_map(|p| p.lie_derivative_in_span).collect()
    }

    pub fn holds(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| p.commutator_in_span && p.lie_derivative_in_span.iter().all(|&b| b))
    }
}

/// A family of `k` vectors in `R^4` depending on the state.
pub type FieldFn<'a> = dyn Fn(&[f64; 4]) -> Vec<[f64; 4]> + 'a;

/// Directional derivative of every field along `dir`, by central
/// differences with step `h` and `h/2`; when the two disagree beyond
/// [`RICHARDSON_TRIGGER`] the Richardson combination is returned.
fn directional(fields: &FieldFn<'_>, state: &[f64; 4], dir: &[f64; 4], h: f64) -> Vec<[f64; 4]> {
    let central = |step: f64| -> Vec<[f64; 4]> {
        let plus: [f64; 4] = std::array::from_fn(|i| state[i] + step * dir[i]);
        let minus: [f64; 4] = std::array::from_fn(|i| state[i] - step * dir[i]);
        fields(&plus)
            .iter()
            .zip(fields(&minus))
            .map(|(p, m)| std::array::from_fn(|i| (p[i] - m[i]) / (2.0 * step)))
            .collect()
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            let gap = linalg::norm(&std::array::from_fn::<f64, 4, _>(|i| c[i] - f[i]));
            if gap > RICHARDSON_TRIGGER * linalg::norm(f).max(1e-300) {
                std::array::from_fn(|i| (4.0 * f[i] - c[i]) / 3.0)
            } else {
                *f
            }
        })
        .collect()
}

/// Whether `candidate` adds nothing to the rank of `generators`.
pub fn in_span(generators: &[[f64; 4]], candidate: &[f64; 4]) -> bool {
    let base = Matrix::from_rows(generators);
    let mut rows = generators.to_vec();
    rows.push(*candidate);
    let augmented = Matrix::from_rows(&rows);
    let scale_rank = |m: &Matrix| linalg::numerical_rank(m, SPAN_RANK_TOL);
    scale_rank(&augmented) <= scale_rank(&base)
}

/// Involutivity of the kernel fields `γ_A` and the covector fields `λ^A`
/// at `state`: each commutator `[γ_A, γ_B]` must lie in `span{γ_A, γ_B}`
/// and each Lie derivative `L_{γ_B} λ^A = (∂λ^A/∂u) γ_B` in
/// `span{λ^A, λ^B}`.
pub fn involutivity_check(gammas: &FieldFn<'_>, lambdas: &FieldFn<'_>, state: &[f64; 4], fd_step: f64) -> InvolutivityReport {
    let g = gammas(state);
    let l = lambdas(state);
    let k = g.len().min(l.len());
    let dg: Vec<Vec<[f64; 4]>> = g.iter().map(|dir| directional(gammas, state, dir, fd_step)).collect();
    let dl: Vec<Vec<[f64; 4]>> = g.iter().map(|dir| directional(lambdas, state, dir, fd_step)).collect();
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            // [γ_a, γ_b] = (Dγ_b) γ_a - (Dγ_a) γ_b
            let commutator = std::array::from_fn(|i| dg[a][b][i] - dg[b][a][i]);
            pairs.push(PairInvolutivity {
                a,
                b,
                commutator,
                commutator_in_span: in_span(&[g[a], g[b]], &commutator),
                lie_derivative_in_span: [in_span(&[l[a], l[b]], &dl[b][a]), in_span(&[l[a], l[b]], &dl[a][b])],
            });
        }
    }
    InvolutivityReport { pairs }
}
