//! Neumann solutions with k nodes, continued in the amplitude `h0 = w(0)`.
//!
//! At fixed `h0` the Neumann condition is solved in `λ` through the residual
//! `r(λ) = ρ_c^{(k)}(λ) - R`, where `ρ_c^{(k)}` is the k-th positive critical
//! point of the shot from `w(0) = h0`. A root gives `ẇ(R) = 0` with exactly
//! `k` nodes in `]0, R[`.

mod mixed;
mod probe;
mod region;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

pub use mixed::{first_mixed_eigenvalue, sup_mixed_eigenvalue, MixedKind, MixedSup};
pub use probe::{default_probe_grid, dirichlet_probe, DirichletReport, ProbeRow};
pub use region::{
    admissibility_region, existence_window, AdmissibilityRegion, ExistenceWindow, ExitFace,
};

use crate::error::{Error, Result};
use crate::model::ProblemParams;
use crate::numeric::ode::Tolerances;
use crate::numeric::roots;
use crate::shooting::{self, hump_widths, RadialSolution, Termination};
use crate::specfun::{dirichlet_eigen, neumann_eigen};

/// Sign of `w(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn apply(self, amplitude: f64) -> f64 {
        match self {
            Sign::Plus => amplitude.abs(),
            Sign::Minus => -amplitude.abs(),
        }
    }

    pub fn of(h0: f64) -> Option<Sign> {
        if h0 > 0.0 {
            Some(Sign::Plus)
        } else if h0 < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "pos" => Ok(Sign::Plus),
            "-" | "minus" | "neg" => Ok(Sign::Minus),
            _ => Err(Error::Parameter(format!("sign must be + or -, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchOptions {
    pub radius: f64,
    pub tol: Tolerances,
    /// Shots stop at `rho_max_factor * R` when the k-th critical point is missing.
    pub rho_max_factor: f64,
    /// Cells of the initial λ scan over `[λ̲_k, λ̄_k]`.
    pub scan_cells: usize,
    /// Relative λ tolerance of the root solve.
    pub lambda_rtol: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            radius: 1.0,
            tol: Tolerances::default(),
            rho_max_factor: 3.0,
            scan_cells: 48,
            lambda_rtol: 1e-13,
        }
    }
}

/// `|ẇ(R)| / max|ẇ|` accepted as a Neumann end.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// A certified point of the k-th branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub h0: f64,
    pub k: usize,
    pub sign_class: Sign,
    /// Nodes in `]0, R[` of an independent shot at `(λ, h0)`.
    pub node_count: usize,
    pub sup_w: f64,
    pub inf_w: f64,
    pub e_norm: f64,
    /// `min(1 + √λ w)`.
    pub min_admissibility: f64,
    /// `ẇ(R)` of the independent shot.
    pub boundary_residual: f64,
    pub max_abs_wdot: f64,
    /// `|ρ_c^{(k)}/R - 1|` at the returned λ.
    pub radius_mismatch: f64,
    /// `|ẅ(ρ_c)| (|ρ_c - R| + 4 ulp)`: the `|ẇ(R)|` explained by where `R`
    /// falls relative to the critical point. Near the floor this exceeds any
    /// attainable accuracy of `ẇ(R)`.
    pub boundary_resolution: f64,
    /// Widest hump `[ρ_i, ρ_{i+1}]` with odd `i` (`ρ_0 = 0`, `ρ_{k+1} = R`).
    pub max_odd_hump_width: f64,
    pub certified: bool,
}

impl BranchPoint {
    pub fn relative_boundary_residual(&self) -> f64 {
        self.boundary_residual.abs() / self.max_abs_wdot.max(f64::MIN_POSITIVE)
    }
}

/// Outer λ-bounds for solutions with k nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBounds {
    pub k: usize,
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    /// First mixed eigenvalue on `[0, R]`.
    pub full_mixed: f64,
    /// Subinterval length of the sup.
    pub sub_length: f64,
    pub sup: MixedSup,
}

impl LambdaBounds {
    pub fn contains(&self, lambda: f64) -> bool {
        self.lower <= lambda && lambda <= self.upper
    }
}

fn bounds_cache() -> &'static Mutex<HashMap<(usize, u64), LambdaBounds>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), LambdaBounds>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `λ̲_k = μ̄(0, R)/2` and `λ̄_k = sup μ̄` over subintervals of length `R/(2k)`,
/// with `μ̄` the first mixed Neumann/Dirichlet eigenvalue.
pub fn lambda_bounds(k: usize, radius: f64) -> Result<LambdaBounds> {
    if k == 0 {
        return Err(Error::Parameter("node count k must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let key = (k, radius.to_bits());
    if let Some(b) = bounds_cache().lock().expect("bounds cache").get(&key) {
        return Ok(*b);
    }
    let full = first_mixed_eigenvalue(MixedKind::NeumannDirichlet, 0.0, radius)?;
    let len = radius / (2 * k) as f64;
    let sup = sup_mixed_eigenvalue(radius, len)?;
    let b = LambdaBounds {
        k,
        radius,
        lower: 0.5 * full,
        upper: sup.value,
        full_mixed: full,
        sub_length: len,
        sup,
    };
    bounds_cache().lock().expect("bounds cache").insert(key, b);
    Ok(b)
}

/// `ρ_c^{(k)}(λ) - R`; a missing critical point counts as `rho_max - R`.
pub fn radius_residual(k: usize, h0: f64, lambda: f64, opts: &BranchOptions) -> Result<f64> {
    Ok(critical_shot(k, h0, lambda, opts)?.0)
}

/// Residual and the log-gap at the k-th critical point when it exists.
fn critical_shot(
    k: usize,
    h0: f64,
    lambda: f64,
    opts: &BranchOptions,
) -> Result<(f64, Option<f64>)> {
    let params = ProblemParams::new(lambda, opts.radius)?;
    let rho_max = opts.rho_max_factor * opts.radius;
    let sol = shooting::integrate_to_critical(&params, h0, k, rho_max, opts.tol)?;
    match sol.termination {
        Termination::CriticalPoint => {
            let q = sol.critical_points.last().map(|c| c.log_gap);
            Ok((sol.end_rho - opts.radius, q))
        }
        Termination::Truncated(msg) => Err(Error::NoConvergence {
            what: "radial shooting",
            detail: msg,
        }),
        _ => Ok((rho_max - opts.radius, None)),
    }
}

/// Largest admissible λ for a negative start: `1 + √λ h0 > 0`.
fn lambda_ceiling(h0: f64) -> f64 {
    if h0 < 0.0 {
        (1.0 - 1e-12) / (h0 * h0)
    } else {
        f64::INFINITY
    }
}

fn residual_or_nan(k: usize, h0: f64, lambda: f64, opts: &BranchOptions) -> f64 {
    radius_residual(k, h0, lambda, opts).unwrap_or(f64::NAN)
}

/// Independent shot at `(λ, h0)` summarised as a branch point.
pub fn certify(k: usize, h0: f64, lambda: f64, opts: &BranchOptions) -> Result<BranchPoint> {
    let sign = Sign::of(h0).ok_or_else(|| Error::Parameter("branch points need h0 != 0".into()))?;
    let params = ProblemParams::new(lambda, opts.radius)?;
    let sol = shooting::integrate(&params, h0, opts.tol)?;
    let (res, q_c) = critical_shot(k, h0, lambda, opts)?;
    // |ẅ| at the critical point is |f_λ(w)| = 2√λ |sinh q|
    let resolution = match q_c {
        Some(q) => {
            2.0 * params.sqrt_lambda()
                * q.sinh().abs()
                * (res.abs() + 4.0 * f64::EPSILON * opts.radius)
        }
        None => f64::INFINITY,
    };
    Ok(point_from_solution(
        k,
        sign,
        &sol,
        res.abs() / opts.radius,
        resolution,
    ))
}

fn point_from_solution(
    k: usize,
    sign: Sign,
    sol: &RadialSolution,
    mismatch: f64,
    resolution: f64,
) -> BranchPoint {
    let odd = hump_widths(sol)
        .iter()
        .filter(|h| h.index % 2 == 1)
        .map(|h| h.width())
        .fold(0.0, f64::max);
    let bc = sol.boundary_residual.abs();
    let rel_bc = bc / sol.max_abs_wdot.max(f64::MIN_POSITIVE);
    let certified =
        sol.node_count() == k && mismatch < 1e-8 && (rel_bc < BOUNDARY_TOL || bc <= resolution);
    BranchPoint {
        lambda: sol.params.lambda,
        h0: sol.h0,
        k,
        sign_class: sign,
        node_count: sol.node_count(),
        sup_w: sol.sup_w,
        inf_w: sol.inf_w,
        e_norm: sol.e_norm,
        min_admissibility: sol.min_admissibility(),
        boundary_residual: sol.boundary_residual,
        max_abs_wdot: sol.max_abs_wdot,
        radius_mismatch: mismatch,
        boundary_resolution: resolution,
        max_odd_hump_width: odd,
        certified,
    }
}

fn solve_bracket(
    k: usize,
    h0: f64,
    lo: (f64, f64),
    hi: (f64, f64),
    opts: &BranchOptions,
) -> Result<f64> {
    let mut g = |l: f64| residual_or_nan(k, h0, l, opts);
    roots::brent_with_values(&mut g, lo.0, lo.1, hi.0, hi.1, opts.lambda_rtol * hi.0)
}

/// Every root of the residual in `[λ̲_k, λ̄_k]` found by a uniform scan.
pub fn solve_all_at_amplitude(k: usize, h0: f64, opts: &BranchOptions) -> Result<Vec<BranchPoint>> {
    if h0 == 0.0 {
        return Err(Error::Parameter("amplitude h0 must be nonzero".into()));
    }
    let b = lambda_bounds(k, opts.radius)?;
    let hi = b.upper.min(lambda_ceiling(h0));
    if hi <= b.lower {
        return Err(Error::Inadmissible {
            lambda: b.lower,
            w: h0,
            gap: 1.0 + b.lower.sqrt() * h0,
        });
    }
    let brackets = roots::scan_brackets(
        |l| residual_or_nan(k, h0, l, opts),
        b.lower,
        hi,
        opts.scan_cells,
    );
    if brackets.is_empty() {
        return Err(Error::NotFound(format!(
            "no sign change of rho_c - R for k = {k}, h0 = {h0} on [{}, {hi}] ({} cells)",
            b.lower, opts.scan_cells
        )));
    }
    brackets
        .into_iter()
        .map(|(lo, hi)| {
            let l = solve_bracket(k, h0, lo, hi, opts)?;
            certify(k, h0, l, opts)
        })
        .collect()
}

/// The root with `k` nodes closest to the bifurcation value `μ_k/2`.
pub fn solve_at_amplitude(
    k: usize,
    sign: Sign,
    h0: f64,
    opts: &BranchOptions,
) -> Result<BranchPoint> {
    if Sign::of(h0) != Some(sign) {
        return Err(Error::Parameter(format!(
            "h0 = {h0} does not have sign {sign}"
        )));
    }
    let target = 0.5 * neumann_eigen(k, opts.radius)?.mu;
    let pts = solve_all_at_amplitude(k, h0, opts)?;
    pts.into_iter()
        .filter(|p| p.node_count == k)
        .min_by(|a, b| {
            (a.lambda - target)
                .abs()
                .total_cmp(&(b.lambda - target).abs())
        })
        .ok_or_else(|| Error::NotFound(format!("no root with {k} nodes at h0 = {h0}")))
}

/// Root near a predicted λ: a window around `guess` grown until it brackets.
pub fn solve_near(
    k: usize,
    h0: f64,
    guess: f64,
    window: f64,
    opts: &BranchOptions,
) -> Result<BranchPoint> {
    let b = lambda_bounds(k, opts.radius)?;
    let ceiling = b.upper.min(lambda_ceiling(h0));
    let mut w = window.max(1e-9 * guess);
    for _ in 0..24 {
        let lo = (guess - w).max(b.lower);
        let hi = (guess + w).min(ceiling);
        let flo = residual_or_nan(k, h0, lo, opts);
        let fhi = residual_or_nan(k, h0, hi, opts);
        if flo.is_finite() && fhi.is_finite() && (flo == 0.0 || flo.signum() != fhi.signum()) {
            let l = solve_bracket(k, h0, (lo, flo), (hi, fhi), opts)?;
            return certify(k, h0, l, opts);
        }
        if lo <= b.lower && hi >= ceiling {
            break;
        }
        w *= 2.0;
    }
    let pts = solve_all_at_amplitude(k, h0, opts)?;
    pts.into_iter()
        .filter(|p| p.node_count == k)
        .min_by(|a, b| {
            (a.lambda - guess)
                .abs()
                .total_cmp(&(b.lambda - guess).abs())
        })
        .ok_or_else(|| {
            Error::NotFound(format!(
                "no root with {k} nodes near lambda = {guess}, h0 = {h0}"
            ))
        })
}

/// `n` amplitudes spaced geometrically on `[lo, hi]`.
pub fn geometric_schedule(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::Parameter(format!(
            "bad amplitude schedule [{lo}, {hi}] with {n} points"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitModel {
    /// `λ ≈ c0 + c1 / ln h0`
    InverseLog,
    /// `λ ≈ c0 + c1 / h0`
    Inverse,
}

/// Least-squares fit of the branch tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub model: FitModel,
    pub limit: f64,
    pub slope: f64,
    pub rms: f64,
    pub points: usize,
}

fn fit_tail(pts: &[BranchPoint], model: FitModel) -> Option<TailFit> {
    let xs: Vec<f64> = pts
        .iter()
        .map(|p| {
            let a = p.h0.abs();
            match model {
                FitModel::InverseLog => 1.0 / a.ln(),
                FitModel::Inverse => 1.0 / a,
            }
        })
        .collect();
    if pts.len() < 2 || xs.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let n = pts.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = pts.iter().map(|p| p.lambda).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(pts)
        .map(|(x, p)| (x - mx) * (p.lambda - my))
        .sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(pts)
        .map(|(x, p)| (limit + slope * x - p.lambda).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(TailFit {
        model,
        limit,
        slope,
        rms,
        points: pts.len(),
    })
}

fn aitken(pts: &[BranchPoint]) -> Option<f64> {
    let [a, b, c] = pts.get(pts.len().checked_sub(3)?..)? else {
        return None;
    };
    let (d1, d2) = (b.lambda - a.lambda, c.lambda - b.lambda);
    let den = d2 - d1;
    if den == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return None;
    }
    let v = c.lambda - d2 * d2 / den;
    v.is_finite().then_some(v)
}

/// λ as the amplitude grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptote {
    /// `ν_{(k+1)/2}` (k odd) or `μ_{k/2}` (k even).
    pub target: f64,
    /// Only the positive branch is claimed to approach `target`.
    pub asserted: bool,
    pub last_lambda: f64,
    pub inverse_log: Option<TailFit>,
    pub inverse: Option<TailFit>,
    pub preferred: Option<FitModel>,
    /// Aitken Δ² on the last three points.
    pub richardson: Option<f64>,
    /// `richardson` when available, else the preferred fit.
    pub estimate: Option<f64>,
}

/// λ as the amplitude shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationEnd {
    /// `μ_k/2`.
    pub target: f64,
    pub first_lambda: f64,
    pub first_h0: f64,
    /// Linear extrapolation of the first two points to `h0 = 0`.
    pub extrapolated: f64,
}

/// Local extremum of λ along the amplitude schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fold {
    pub index: usize,
    pub h0: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breakdown {
    pub h0: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub k: usize,
    pub sign_class: Sign,
    pub radius: f64,
    pub bounds: LambdaBounds,
    pub points: Vec<BranchPoint>,
    pub bifurcation_end: Option<BifurcationEnd>,
    pub asymptote: Option<Asymptote>,
    pub folds: Vec<Fold>,
    pub breakdown: Option<Breakdown>,
}

impl Branch {
    pub fn within_bounds(&self) -> bool {
        self.points.iter().all(|p| self.bounds.contains(p.lambda))
    }

    pub fn lambda_range(&self) -> Option<(f64, f64)> {
        let mut it = self.points.iter().map(|p| p.lambda);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), l| (lo.min(l), hi.max(l))))
    }

    /// Point at the amplitude closest to `h0` in log scale.
    pub fn nearest(&self, h0: f64) -> Option<&BranchPoint> {
        self.points.iter().min_by(|a, b| {
            (a.h0.abs() / h0.abs())
                .ln()
                .abs()
                .total_cmp(&(b.h0.abs() / h0.abs()).ln().abs())
        })
    }
}

/// Limit of λ along the k-th positive branch.
pub fn asymptote_target(k: usize, radius: f64) -> Result<f64> {
    if k.is_multiple_of(2) {
        Ok(neumann_eigen(k / 2, radius)?.mu)
    } else {
        Ok(dirichlet_eigen(k.div_ceil(2), radius)?.nu)
    }
}

/// Continues the k-th branch over increasing amplitudes `|h0|`.
///
/// A lost root ends the trace; the points found so far are kept and the
/// failure is recorded in [`Branch::breakdown`].
pub fn trace_branch(
    k: usize,
    sign: Sign,
    schedule: &[f64],
    opts: &BranchOptions,
) -> Result<Branch> {
    let bounds = lambda_bounds(k, opts.radius)?;
    let mut amps: Vec<f64> = schedule.iter().map(|a| a.abs()).collect();
    if amps.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Parameter(
            "amplitudes must be positive and finite".into(),
        ));
    }
    amps.sort_by(f64::total_cmp);
    amps.dedup();

    let mut points: Vec<BranchPoint> = Vec::with_capacity(amps.len());
    let mut breakdown = None;
    for &a in &amps {
        let h0 = sign.apply(a);
        let res = match points.len() {
            0 => solve_at_amplitude(k, sign, h0, opts),
            n => {
                let last = &points[n - 1];
                let guess = if n >= 2 {
                    let prev = &points[n - 2];
                    let t = (a / last.h0.abs()).ln() / (last.h0.abs() / prev.h0.abs()).ln();
                    last.lambda + (last.lambda - prev.lambda) * t
                } else {
                    last.lambda
                };
                let window = (1e-3 * guess).max(2.0 * (guess - last.lambda).abs());
                solve_near(k, h0, guess.clamp(bounds.lower, bounds.upper), window, opts)
            }
        };
        match res {
            Ok(p) if p.node_count == k => points.push(p),
            Ok(p) => {
                breakdown = Some(Breakdown {
                    h0,
                    reason: format!("root has {} nodes, expected {k}", p.node_count),
                });
                break;
            }
            Err(e) => {
                breakdown = Some(Breakdown {
                    h0,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }

    let mut folds = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        let d0 = points[i].lambda - points[i - 1].lambda;
        let d1 = points[i + 1].lambda - points[i].lambda;
        if d0 != 0.0 && d1 != 0.0 && d0.signum() != d1.signum() {
            folds.push(Fold {
                index: i,
                h0: points[i].h0,
                lambda: points[i].lambda,
            });
        }
    }

    let bifurcation_end = match points.as_slice() {
        [] => None,
        [p] => Some(BifurcationEnd {
            target: 0.5 * neumann_eigen(k, opts.radius)?.mu,
            first_lambda: p.lambda,
            first_h0: p.h0,
            extrapolated: p.lambda,
        }),
        [p, q, ..] => {
            let slope = (q.lambda - p.lambda) / (q.h0 - p.h0);
            Some(BifurcationEnd {
                target: 0.5 * neumann_eigen(k, opts.radius)?.mu,
                first_lambda: p.lambda,
                first_h0: p.h0,
                extrapolated: p.lambda - slope * p.h0,
            })
        }
    };

    let asymptote = match points.last() {
        None => None,
        Some(last) => {
            let m = (points.len() / 4).max(3).min(points.len());
            let tail = &points[points.len() - m..];
            let tail: Vec<BranchPoint> =
                tail.iter().filter(|p| p.h0.abs() > 1.0).copied().collect();
            let inverse_log = fit_tail(&tail, FitModel::InverseLog);
            let inverse = fit_tail(&tail, FitModel::Inverse);
            let best = match (inverse_log, inverse) {
                (Some(a), Some(b)) => Some(if a.rms <= b.rms { a } else { b }),
                (a, b) => a.or(b),
            };
            let richardson = aitken(&points);
            Some(Asymptote {
                target: asymptote_target(k, opts.radius)?,
                asserted: sign == Sign::Plus,
                last_lambda: last.lambda,
                inverse_log,
                inverse,
                preferred: best.map(|f| f.model),
                richardson,
                estimate: richardson.or(best.map(|f| f.limit)),
            })
        }
    };

    Ok(Branch {
        k,
        sign_class: sign,
        radius: opts.radius,
        bounds,
        points,
        bifurcation_end,
        asymptote,
        folds,
        breakdown,
    })
}
