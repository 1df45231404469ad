//! Invariant suite behind `radbif verify`.
//!
//! Every check records a value, a limit and the relation between them, so a
//! report can be diffed between runs. Random samples come from a seeded
//! ChaCha8 stream and the report contains no timings, so identical
//! configurations give identical reports.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::branch::{
    self, default_probe_grid, dirichlet_probe, geometric_schedule, trace_branch, Branch,
    BranchOptions, BranchPoint, DirichletReport, Sign,
};
use crate::error::{Error, Result};
use crate::model::{potential_lambda, ProblemParams};
use crate::numeric::ode::Tolerances;
use crate::numeric::quad;
use crate::shooting::{
    self, hump_widths, verify_segment_inequalities, RadialSolution, Termination,
};
use crate::specfun::{bessel_j0, bessel_j0_prime, bessel_j1, dirichlet_eigen, neumann_eigen};
use crate::timemap::{self, phi_bar, phi_level, ScaledLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Specfun,
    Timemap,
    Shooting,
    Branch,
    Dirichlet,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" | "default" => Suite::All,
            "specfun" => Suite::Specfun,
            "timemap" => Suite::Timemap,
            "shooting" => Suite::Shooting,
            "branch" => Suite::Branch,
            "dirichlet" => Suite::Dirichlet,
            _ => return Err(Error::Parameter(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Specfun => "specfun",
            Suite::Timemap => "timemap",
            Suite::Shooting => "shooting",
            Suite::Branch => "branch",
            Suite::Dirichlet => "dirichlet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub seed: u64,
    pub tol: Tolerances,
    /// Relative slack allowed on inequality checks.
    pub slack_tol: f64,
    /// Replaces every pass threshold (falsifiability runs).
    pub threshold_override: Option<f64>,
    pub radius: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 0,
            tol: Tolerances::default(),
            slack_tol: 1e-8,
            threshold_override: None,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `value < limit`
    Below,
    /// `value > limit`
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub config: VerifyConfig,
    pub checks: Vec<CheckRecord>,
    pub failures: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<DirichletReport>,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Recorder {
    cfg: VerifyConfig,
    suite: Suite,
    checks: Vec<CheckRecord>,
}

impl Recorder {
    /// `|value| < tol`, with `tol` replaced by the override if set.
    fn small(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        let limit = self.cfg.threshold_override.unwrap_or(tol);
        let v = value.abs();
        self.push(name.into(), v, Relation::Below, limit, v < limit);
    }

    /// `value > -tol`: a signed margin that must not be too negative.
    fn margin(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        let limit = -self.cfg.threshold_override.unwrap_or(tol);
        self.push(name.into(), value, Relation::Above, limit, value > limit);
    }

    /// A fixed bound that no tolerance relaxes.
    fn bound(&mut self, name: impl Into<String>, value: f64, relation: Relation, limit: f64) {
        let ok = match relation {
            Relation::Below => value < limit,
            Relation::Above => value > limit,
        };
        self.push(name.into(), value, relation, limit, ok);
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.push(
            name.into(),
            if ok { 1.0 } else { 0.0 },
            Relation::Above,
            0.5,
            ok,
        );
    }

    fn error(&mut self, name: impl Into<String>, e: &Error) {
        self.push(
            format!("{}: {e}", name.into()),
            f64::NAN,
            Relation::Below,
            0.0,
            false,
        );
    }

    fn push(&mut self, name: String, value: f64, relation: Relation, limit: f64, passed: bool) {
        self.checks.push(CheckRecord {
            suite: self.suite,
            name,
            value,
            relation,
            limit,
            passed,
        });
    }
}

/// Runs the selected suite.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if !(cfg.slack_tol >= 0.0) {
        return Err(Error::Parameter(format!(
            "slack tolerance must be nonnegative, got {}",
            cfg.slack_tol
        )));
    }
    let mut rec = Recorder {
        cfg: *cfg,
        suite: Suite::All,
        checks: Vec::new(),
    };
    let mut dirichlet = None;
    let order = [
        Suite::Specfun,
        Suite::Timemap,
        Suite::Shooting,
        Suite::Branch,
        Suite::Dirichlet,
    ];
    for s in order.into_iter().filter(|&s| cfg.suite.includes(s)) {
        rec.suite = s;
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let res = match s {
            Suite::Specfun => specfun_checks(&mut rec, &mut rng),
            Suite::Timemap => timemap_checks(&mut rec, &mut rng),
            Suite::Shooting => shooting_checks(&mut rec, &mut rng),
            Suite::Branch => branch_checks(&mut rec, &mut rng),
            Suite::Dirichlet => dirichlet_checks(&mut rec).map(|r| dirichlet = Some(r)),
            Suite::All => Ok(()),
        };
        if let Err(e) = res {
            rec.error(format!("{s} suite aborted"), &e);
        }
    }
    let failures = rec.checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport {
        schema: "v1",
        config: *cfg,
        checks: rec.checks,
        failures,
        passed: failures == 0,
        dirichlet,
    })
}

/// `J0(x) = (1/π)∫₀^π cos(x sin t) dt` and `J1(x) = (1/π)∫₀^π cos(t - x sin t) dt`.
fn bessel_by_integral(order: u8, x: f64) -> Result<f64> {
    let est = quad::integrate(
        |t| {
            if order == 0 {
                (x * t.sin()).cos()
            } else {
                (t - x * t.sin()).cos()
            }
        },
        0.0,
        PI,
        1e-14,
        1e-14,
    )?;
    Ok(est.value / PI)
}

fn specfun_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let r = rec.cfg.radius;
    let n1 = neumann_eigen(1, r)?;
    let d1 = dirichlet_eigen(1, r)?;
    rec.small("J0'(y1)", bessel_j0_prime(n1.zero)?, 1e-11);
    rec.small("J0(z1)", bessel_j0(d1.zero)?, 1e-11);
    let mut gap = f64::INFINITY;
    for k in 1..=10 {
        let mu = neumann_eigen(k, r)?.mu;
        let nu = dirichlet_eigen(k, r)?.nu;
        let nu_next = dirichlet_eigen(k + 1, r)?.nu;
        gap = gap.min(mu - nu).min(nu_next - mu);
    }
    rec.bound(
        "interlacing nu_k < mu_k < nu_k+1, k <= 10 (min gap)",
        gap,
        Relation::Above,
        0.0,
    );
    let mut worst: f64 = 0.0;
    for _ in 0..24 {
        let x = rng.gen_range(0.0..40.0);
        worst = worst.max((bessel_j0(x)? - bessel_by_integral(0, x)?).abs());
        worst = worst.max((bessel_j1(x)? - bessel_by_integral(1, x)?).abs());
    }
    rec.small(
        "J0, J1 against the integral representation, x in [0, 40]",
        worst,
        1e-12,
    );
    Ok(())
}

/// `Φ_{λ,h}(h) = ∫₀^h dξ / √(2(F_λ(ξ) - F_λ(h)))` by direct quadrature.
pub fn phi_direct(params: &ProblemParams, h: f64) -> Result<f64> {
    let fh = potential_lambda(params, h)?;
    // ξ = h(1 - τ²) removes the endpoint singularity
    let g = |tau: f64| {
        let xi = h * (1.0 - tau * tau);
        let d = potential_lambda(params, xi).unwrap_or(f64::NAN) - fh;
        if tau == 0.0 || !(d > 0.0) {
            return 0.0;
        }
        2.0 * h.abs() * tau / (2.0 * d).sqrt()
    };
    let est = quad::integrate(g, 0.0, 1.0, 1e-12, 1e-11)?;
    Ok(h.signum() * est.value)
}

fn timemap_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let p1 = ProblemParams::new(1.0, rec.cfg.radius)?;
    let lim = timemap::limits(1.0);
    rec.small(
        "Phi_{1,h}(h) - pi/(2 sqrt 2) at h = 1e-6",
        timemap::phi(&p1, 1e-6)?.phi - lim.zero_plus,
        1e-4,
    );
    rec.small(
        "Phi_{1,h}(h) - pi/2 at h = 1e6",
        timemap::phi(&p1, 1e6)?.phi - lim.plus_infinity,
        1e-2,
    );
    rec.small(
        "Phi_{1,h}(h) + pi/(2 sqrt 2) at h = -1e-6",
        timemap::phi(&p1, -1e-6)?.phi - lim.zero_minus,
        1e-4,
    );
    // the floor limit is approached only logarithmically in 1 + √λh
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut last = f64::NAN;
    for lg in [-1e1, -1e2, -1e3, -1e4, -1e5] {
        let v = phi_level(1.0, &ScaledLevel::from_log_gap(lg)?, 1e-12)?
            .value
            .abs();
        monotone &= v < prev;
        prev = v;
        last = v;
    }
    rec.flag(
        "|Phi| decreases as ln(1 + sqrt(lambda) h) -> -inf",
        monotone,
    );
    rec.small("|Phi_{1,h}(h)| at ln(1 + h) = -1e5", last, 1e-2);

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = 10f64.powf(rng.gen_range(-1.0..2.0));
        let s = if rng.gen_bool(0.5) {
            rng.gen_range(-0.99..-1e-3)
        } else {
            10f64.powf(rng.gen_range(-3.0..2.0))
        };
        let params = ProblemParams::new(lambda, rec.cfg.radius)?;
        let h = s / params.sqrt_lambda();
        let lhs = 2f64.sqrt() * params.sqrt_lambda() * phi_direct(&params, h)?;
        worst = worst.max((lhs - phi_bar(s)?).abs());
    }
    rec.small(
        "sqrt(2 lambda) Phi_{lambda,h}(h) - Phi_bar(sqrt(lambda) h), 100 random (lambda, h)",
        worst,
        1e-9,
    );
    Ok(())
}

fn shooting_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let r = rec.cfg.radius;
    let tol = rec.cfg.tol;
    for k in 1..=3 {
        let m = neumann_eigen(k, r)?;
        let params = ProblemParams::new(0.5 * m.mu, r)?;
        let h0 = 1e-6;
        let sol = shooting::integrate(&params, h0, tol)?;
        let dist = sol
            .resample(401)?
            .iter()
            .map(|x| (x.w - h0 * m.eval(x.rho)).abs())
            .fold(0.0, f64::max);
        rec.small(
            format!("linearization k={k}: max|w - h0 J0(y_k rho/R)| / h0"),
            dist / h0,
            1e-4,
        );
        rec.small(
            format!("linearization k={k}: |w'(R)|"),
            sol.boundary_residual,
            1e-8,
        );
        rec.bound(
            format!("linearization k={k}: node count"),
            sol.node_count() as f64,
            Relation::Below,
            k as f64 + 0.5,
        );
        rec.bound(
            format!("linearization k={k}: node count "),
            sol.node_count() as f64,
            Relation::Above,
            k as f64 - 0.5,
        );
    }

    let triv = shooting::integrate(&ProblemParams::new(5.0, r)?, 0.0, tol)?;
    rec.flag(
        "w(0) = 0 gives w = 0",
        triv.w.iter().chain(&triv.wdot).all(|&x| x == 0.0),
    );

    let mut worst_energy: f64 = 0.0;
    let mut unstable = 0usize;
    let mut min_gap = f64::INFINITY;
    for _ in 0..20 {
        let lambda = rng.gen_range(1.0..60.0);
        let params = ProblemParams::new(lambda, r)?;
        let lo = -0.9 / params.sqrt_lambda();
        let h0 = rng.gen_range(lo..5.0);
        let a = shooting::integrate(&params, h0, tol)?;
        let b = shooting::integrate(&params, h0, tol.tightened(10.0))?;
        if a.node_count() != b.node_count() {
            unstable += 1;
        }
        for e in a.energy_identity() {
            worst_energy = worst_energy.max(e.relative());
        }
        min_gap = min_gap.min(a.min_log_gap);
    }
    rec.bound(
        "node count changes under 10x tighter tolerances (20 random shots)",
        unstable as f64,
        Relation::Below,
        0.5,
    );
    rec.small(
        "energy identity, 20 random shots (max relative residual)",
        worst_energy,
        1e-7,
    );
    rec.bound(
        "min ln(1 + sqrt(lambda) w) over random shots",
        min_gap,
        Relation::Above,
        f64::NEG_INFINITY,
    );
    Ok(())
}

/// Amplitudes of the branch survey: 33 points from `1e-5` to `1e3`.
pub fn default_schedule() -> Vec<f64> {
    geometric_schedule(1e-5, 1e3, 33).expect("fixed schedule is valid")
}

/// Positive branches `k = 1..=k_max` over [`default_schedule`].
pub fn survey(k_max: usize, opts: &BranchOptions) -> Result<Vec<Branch>> {
    let sched = default_schedule();
    (1..=k_max)
        .map(|k| trace_branch(k, Sign::Plus, &sched, opts))
        .collect()
}

/// `n` distinct points drawn from all branches.
pub fn sample_points(branches: &[Branch], n: usize, seed: u64) -> Vec<BranchPoint> {
    let all: Vec<BranchPoint> = branches
        .iter()
        .flat_map(|b| b.points.iter().copied())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, all.len(), n.min(all.len())).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i]).collect()
}

/// The Neumann solution of a branch point: the shot stopped at its k-th
/// critical point, which lies at `R` to the solver tolerance.
pub fn neumann_solution(p: &BranchPoint, opts: &BranchOptions) -> Result<RadialSolution> {
    let params = ProblemParams::new(p.lambda, opts.radius)?;
    let sol = shooting::integrate_to_critical(
        &params,
        p.h0,
        p.k,
        opts.rho_max_factor * opts.radius,
        opts.tol,
    )?;
    if sol.termination != Termination::CriticalPoint {
        return Err(Error::NotFound(format!(
            "critical point {} missing at lambda = {}, h0 = {}",
            p.k, p.lambda, p.h0
        )));
    }
    Ok(sol)
}

/// Smallest relative slack over every inequality of every segment, with the
/// name of the tightest one, and the number of segments examined.
pub fn inequality_slack(sol: &RadialSolution, samples: usize) -> Result<(f64, String, usize)> {
    if let Some(e) = &sol.classification_error {
        return Err(Error::Classification(e.clone()));
    }
    let mut worst = (f64::INFINITY, String::new());
    for seg in &sol.segments {
        let rep = verify_segment_inequalities(sol, seg, samples)?;
        for c in rep.checks {
            if c.relative() < worst.0 {
                worst = (c.relative(), c.name);
            }
        }
    }
    for hump in hump_widths(sol).iter().filter(|h| h.positive && h.complete) {
        let c = hump.bound_check(sol.params.lambda);
        if c.relative() < worst.0 {
            worst = (c.relative(), c.name);
        }
    }
    Ok((worst.0, worst.1, sol.segments.len()))
}

fn branch_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let opts = BranchOptions {
        radius: rec.cfg.radius,
        tol: rec.cfg.tol,
        ..BranchOptions::default()
    };
    let branches = survey(3, &opts)?;
    for b in &branches {
        let k = b.k;
        if let Some(bd) = &b.breakdown {
            rec.error(
                format!("branch k={k} trace"),
                &Error::NotFound(format!("lost at h0 = {}: {}", bd.h0, bd.reason)),
            );
            continue;
        }
        let mu = neumann_eigen(k, opts.radius)?.mu;
        let first = b
            .points
            .first()
            .ok_or_else(|| Error::NotFound("empty branch".into()))?;
        let last = b.points.last().expect("nonempty");
        rec.small(
            format!("branch k={k}: |lambda(h0=1e-5) - mu_k/2| / mu_k"),
            (first.lambda - 0.5 * mu) / mu,
            1e-3,
        );
        let target = branch::asymptote_target(k, opts.radius)?;
        rec.small(
            format!("branch k={k}: |lambda(h0=1e3) - limit| / limit"),
            (last.lambda - target) / target,
            2e-2,
        );
        let outside = b
            .points
            .iter()
            .filter(|p| !b.bounds.contains(p.lambda))
            .count();
        rec.bound(
            format!("branch k={k}: points outside [lower, upper] bounds"),
            outside as f64,
            Relation::Below,
            0.5,
        );
        let uncertified = b.points.iter().filter(|p| !p.certified).count();
        rec.bound(
            format!("branch k={k}: points failing the independent recheck"),
            uncertified as f64,
            Relation::Below,
            0.5,
        );
        // beyond the last fold the distance to the limit shrinks monotonically
        let start = b.folds.last().map(|f| f.index + 1).unwrap_or(0);
        let errs: Vec<f64> = b.points[start..]
            .iter()
            .map(|p| (p.lambda - target).abs())
            .collect();
        let monotone = errs.windows(2).all(|w| w[1] < w[0]);
        rec.flag(
            format!("branch k={k}: |lambda - limit| decreases past the fold"),
            monotone,
        );
        if let Some(est) = b.asymptote.and_then(|a| a.estimate) {
            rec.small(
                format!("branch k={k}: extrapolated limit, relative error"),
                (est - target) / target,
                1e-4,
            );
        }
    }

    // equivalence lemma observables on the k = 1 tail
    if let Some(b1) = branches.first() {
        let joint = b1.points.iter().find(|p| {
            p.sup_w > 1e2 && p.min_admissibility < 1e-2 && p.max_odd_hump_width < 0.2 * opts.radius
        });
        rec.flag(
            "k=1 tail: sup w > 1e2, min(1 + sqrt(lambda) w) < 1e-2, odd hump < 0.2 R at one point",
            joint.is_some(),
        );
    }

    let seed = rng.gen::<u64>();
    let pts = sample_points(&branches, 50, seed);
    rec.bound(
        "sampled branch solutions",
        pts.len() as f64,
        Relation::Above,
        49.5,
    );
    let mut worst_energy: f64 = 0.0;
    let mut worst_slack = (f64::INFINITY, String::new());
    let mut segments = 0;
    for p in &pts {
        let sol = neumann_solution(p, &opts)?;
        for e in sol.energy_identity() {
            worst_energy = worst_energy.max(e.relative());
        }
        let (s, name, n) = inequality_slack(&sol, 6)?;
        segments += n;
        if s < worst_slack.0 {
            worst_slack = (s, format!("{name} (k={}, h0={:e})", p.k, p.h0));
        }
    }
    rec.small(
        "energy identity on sampled branch solutions (max relative residual)",
        worst_energy,
        1e-7,
    );
    rec.margin(
        format!("inequality suite, tightest: {}", worst_slack.1),
        worst_slack.0,
        rec.cfg.slack_tol,
    );
    rec.bound(
        "classified segments in the sample",
        segments as f64,
        Relation::Above,
        0.5,
    );
    Ok(())
}

fn dirichlet_checks(rec: &mut Recorder) -> Result<DirichletReport> {
    let (lambdas, u0s) = default_probe_grid(20);
    let rep = dirichlet_probe(&lambdas, &u0s, rec.cfg.radius, 1e-6, rec.cfg.tol)?;
    rec.bound(
        "Dirichlet hits u(R) < 1e-6 on a 20x20 grid",
        rep.hits as f64,
        Relation::Below,
        0.5,
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_time_map_matches_the_rescaled_one() {
        let p = ProblemParams::new(2.5, 1.0).unwrap();
        for h in [0.3, -0.4, 7.0] {
            let a = phi_direct(&p, h).unwrap();
            let b = timemap::phi(&p, h).unwrap().phi;
            assert!((a - b).abs() < 1e-10, "{h}: {a} {b}");
        }
    }

    #[test]
    fn suites_parse() {
        assert_eq!("dirichlet".parse::<Suite>().unwrap(), Suite::Dirichlet);
        assert_eq!("default".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn specfun_suite_passes_and_override_fails_it() {
        let cfg = VerifyConfig {
            suite: Suite::Specfun,
            ..VerifyConfig::default()
        };
        let rep = run(&cfg).unwrap();
        assert!(rep.passed, "{:?}", rep.failed_checks().collect::<Vec<_>>());
        let rep = run(&VerifyConfig {
            threshold_override: Some(1e-30),
            ..cfg
        })
        .unwrap();
        assert!(!rep.passed);
        assert!(rep.failed_checks().any(|c| c.name.starts_with("J0")));
    }
}
