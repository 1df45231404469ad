//! Radial shooting for `ẅ + ẇ/ρ = f_λ(w)`, `w(0) = h0`, `ẇ(0) = 0`.
//!
//! The state is integrated in the variables
//!
//! ```text
//!     q = ln(1 + √λ w),   v = ẇ,   dρ/dτ = e^q,
//!     dq/dτ = √λ v,       dv/dτ = -e^q v / ρ + √λ (1 - e^{2q}),
//! ```
//!
//! so that admissibility `1 + √λ w > 0` holds by construction however close
//! a trajectory gets to the floor `w = -1/√λ`. Along with `(ρ, q, v)` the
//! integrator carries `∫ρẇ²`, `∫ρw²` and `∫4ρF_λ(w)` from the origin.
//!
//! The coordinate singularity at `ρ = 0` is skipped with the series
//! `w = h0 + f(h0) ρ²/4 + f'(h0) f(h0) ρ⁴/64`.

mod inequalities;
mod segments;

pub use inequalities::{
    hump_widths, log_inequality, verify_segment_inequalities, Check, HumpWidth, SegmentReport,
    HUMP_BOUND_NAME,
};
pub use segments::{classify_segments, CaseTag, NodalSegment};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    f_lambda, f_lambda_prime, log1p_minus_x, potential_lambda, ProblemParams, Profile,
};
use crate::numeric::ode::{Integrator, OdeSystem, StepRecord, Tolerances};
use crate::numeric::roots;

pub(crate) const DIM: usize = 6;
const RHO: usize = 0;
const Q: usize = 1;
const V: usize = 2;
const GRAD: usize = 3;
const MASS: usize = 4;
const POT: usize = 5;

/// `F_1(e^q - 1)` from the log gap.
pub fn potential_from_log_gap(q: f64) -> f64 {
    if q.abs() < 0.5 {
        let x = q.exp_m1();
        -0.5 * x * x + log1p_minus_x(x)
    } else {
        -0.5 * (2.0 * q).exp_m1() + q
    }
}

pub(crate) struct RadialSystem {
    sl: f64,
}

impl OdeSystem<DIM> for RadialSystem {
    fn rhs(&self, _t: f64, y: &[f64; DIM], dy: &mut [f64; DIM]) {
        let rho = y[RHO];
        let q = y[Q];
        let v = y[V];
        let u = q.exp();
        let w = q.exp_m1() / self.sl;
        dy[RHO] = u;
        dy[Q] = self.sl * v;
        dy[V] = -u * v / rho - self.sl * (2.0 * q).exp_m1();
        dy[GRAD] = u * rho * v * v;
        dy[MASS] = u * rho * w * w;
        dy[POT] = u * 4.0 * rho * potential_from_log_gap(q);
    }
}

/// Where integration ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopRule {
    /// Integrate up to this radius.
    Radius(f64),
    /// Stop at the k-th critical point with `ρ > 0`, or at `rho_max`.
    CriticalPoint { k: usize, rho_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootOptions {
    pub tol: Tolerances,
    pub stop: Option<StopRule>,
    /// Series start radius as a fraction of `R` (upper bound; shrunk near the floor).
    pub start_fraction: f64,
    /// Gap below which a trajectory is reported as touching the floor.
    pub floor_eps: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            stop: None,
            start_fraction: 1e-4,
            floor_eps: 1e-10,
        }
    }
}

/// How the integration ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    /// Reached the requested radius.
    Radius,
    /// Stopped at the requested critical point.
    CriticalPoint,
    /// `rho_max` reached before the requested critical point.
    CriticalPointMissing,
    /// The integrator failed; the trajectory is valid up to `end_rho`.
    Truncated(String),
}

/// A zero of `w` inside the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    pub rho: f64,
    pub wdot: f64,
}

/// A zero of `ẇ` with `ρ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub rho: f64,
    pub w: f64,
    /// `ln(1 + √λ w)`.
    pub log_gap: f64,
}

/// Point sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub rho: f64,
    pub w: f64,
    pub wdot: f64,
    pub log_gap: f64,
}

/// Integrated radial trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub params: ProblemParams,
    pub h0: f64,
    pub tol: Tolerances,
    /// Accepted step ends, starting at `ρ = 0`.
    pub rho: Vec<f64>,
    pub w: Vec<f64>,
    pub wdot: Vec<f64>,
    pub log_gap: Vec<f64>,
    pub nodes: Vec<Node>,
    pub critical_points: Vec<CriticalPoint>,
    pub segments: Vec<NodalSegment>,
    pub classification_error: Option<String>,
    pub end_rho: f64,
    pub termination: Termination,
    /// `ẇ` at `end_rho`.
    pub boundary_residual: f64,
    pub e_norm: f64,
    pub sup_w: f64,
    pub inf_w: f64,
    pub max_abs_wdot: f64,
    /// `min ln(1 + √λ w)`.
    pub min_log_gap: f64,
    pub touches_floor: bool,
    #[serde(skip)]
    steps: Vec<StepRecord<DIM>>,
    #[serde(skip)]
    node_states: Vec<[f64; DIM]>,
    #[serde(skip)]
    start_state: [f64; DIM],
}

/// Integrates to `ρ = R` with the given tolerances.
pub fn integrate(params: &ProblemParams, h0: f64, tol: Tolerances) -> Result<RadialSolution> {
    integrate_with(
        params,
        h0,
        &ShootOptions {
            tol,
            ..ShootOptions::default()
        },
    )
}

/// Integrates up to the k-th critical point (or `rho_max`).
pub fn integrate_to_critical(
    params: &ProblemParams,
    h0: f64,
    k: usize,
    rho_max: f64,
    tol: Tolerances,
) -> Result<RadialSolution> {
    integrate_with(
        params,
        h0,
        &ShootOptions {
            tol,
            stop: Some(StopRule::CriticalPoint { k, rho_max }),
            ..ShootOptions::default()
        },
    )
}

struct Event {
    s: f64,
    kind: EventKind,
    state: [f64; DIM],
}

#[derive(Clone, Copy, PartialEq)]
enum EventKind {
    Node,
    Critical,
    End,
}

fn locate<S: OdeSystem<DIM>>(
    sys: &S,
    rec: &StepRecord<DIM>,
    comp: usize,
    target: f64,
) -> Result<(f64, [f64; DIM])> {
    let g = |s: f64| rec.state_at(sys, s)[comp] - target;
    let f0 = rec.y0[comp] - target;
    let f1 = rec.y1[comp] - target;
    let s = roots::brent_with_values(
        &mut { g },
        0.0,
        f0,
        rec.h,
        f1,
        1e-15 * rec.t1().abs().max(rec.h),
    )?;
    Ok((s, rec.state_at(sys, s)))
}

/// Shoots from `w(0) = h0` under the given options.
pub fn integrate_with(
    params: &ProblemParams,
    h0: f64,
    opts: &ShootOptions,
) -> Result<RadialSolution> {
    params.check_admissible(h0)?;
    let r = params.radius;
    let sl = params.sqrt_lambda();
    let stop = opts.stop.unwrap_or(StopRule::Radius(r));
    let rho_end = match stop {
        StopRule::Radius(x) => x,
        StopRule::CriticalPoint { rho_max, .. } => rho_max,
    };
    if !(rho_end > 0.0 && rho_end.is_finite()) {
        return Err(Error::Parameter(format!(
            "integration end must be positive, got {rho_end}"
        )));
    }
    if let StopRule::CriticalPoint { k: 0, .. } = stop {
        return Err(Error::Parameter("critical point index starts at 1".into()));
    }

    let fa = f_lambda(params, h0)?;
    let fpa = f_lambda_prime(params, h0)?;
    let rho_s = (opts.start_fraction * r)
        .min(1e-3 / fpa.abs().sqrt())
        .min(0.5 * rho_end);
    let b = fa / 4.0;
    let c = fpa * fa / 64.0;
    let w_s = h0 + b * rho_s * rho_s + c * rho_s.powi(4);
    let v_s = 2.0 * b * rho_s + 4.0 * c * rho_s.powi(3);
    let q0 = (sl * h0).ln_1p();
    let q_s = q0 + (sl * (w_s - h0) / params.gap(h0)).ln_1p();
    let y0 = [
        rho_s,
        q_s,
        v_s,
        b * b * rho_s.powi(4),
        0.5 * h0 * h0 * rho_s * rho_s,
        2.0 * potential_lambda(params, h0)? * rho_s * rho_s,
    ];

    let sys = RadialSystem { sl };
    let amp = (sl * h0.abs()).clamp(1e-100, 1.0);
    let scales = [
        r,
        amp,
        amp * sl.max(1.0),
        amp * amp,
        amp * amp / params.lambda,
        amp * amp,
    ];
    let u0 = q_s.exp();
    let mut integ = Integrator::new(&sys, 0.0, y0, 0.1 * rho_s / u0, opts.tol)
        .with_max_step(r / 20.0)
        .with_atol_scales(scales);

    let events_on = h0 != 0.0;
    let mut steps: Vec<StepRecord<DIM>> = Vec::new();
    let mut nodes = Vec::new();
    let mut node_states = Vec::new();
    let mut crits = Vec::new();
    let mut termination = None;

    while termination.is_none() {
        let rec = match integ.advance() {
            Ok(rec) => rec,
            Err(e) => {
                termination = Some(Termination::Truncated(e.to_string()));
                break;
            }
        };
        let mut events: Vec<Event> = Vec::new();
        if events_on {
            let (a, b) = (rec.y0[Q], rec.y1[Q]);
            if a != 0.0 && (a.signum() != b.signum() || b == 0.0) {
                let (s, st) = locate(&sys, &rec, Q, 0.0)?;
                events.push(Event {
                    s,
                    kind: EventKind::Node,
                    state: st,
                });
            }
            let (a, b) = (rec.y0[V], rec.y1[V]);
            if a != 0.0 && (a.signum() != b.signum() || b == 0.0) {
                let (s, st) = locate(&sys, &rec, V, 0.0)?;
                events.push(Event {
                    s,
                    kind: EventKind::Critical,
                    state: st,
                });
            }
        }
        if rec.y1[RHO] >= rho_end {
            let (s, mut st) = locate(&sys, &rec, RHO, rho_end)?;
            st[RHO] = rho_end;
            events.push(Event {
                s,
                kind: EventKind::End,
                state: st,
            });
        }
        events.sort_by(|x, y| x.s.total_cmp(&y.s));
        let mut cut: Option<(f64, [f64; DIM])> = None;
        for ev in events {
            match ev.kind {
                EventKind::Node => {
                    let w = ev.state[Q].exp_m1() / sl;
                    let wdot = ev.state[V];
                    let wscale = h0.abs().max(1e-300);
                    if wdot.abs() <= 1e-12 * wscale && w.abs() <= 1e-12 * wscale {
                        return Err(Error::Classification(format!(
                            "tangential zero of w at rho = {}",
                            ev.state[RHO]
                        )));
                    }
                    nodes.push(Node {
                        rho: ev.state[RHO],
                        wdot,
                    });
                    node_states.push(ev.state);
                }
                EventKind::Critical => {
                    crits.push(CriticalPoint {
                        rho: ev.state[RHO],
                        w: ev.state[Q].exp_m1() / sl,
                        log_gap: ev.state[Q],
                    });
                    if let StopRule::CriticalPoint { k, .. } = stop {
                        if crits.len() == k {
                            cut = Some((ev.s, ev.state));
                            termination = Some(Termination::CriticalPoint);
                            break;
                        }
                    }
                }
                EventKind::End => {
                    cut = Some((ev.s, ev.state));
                    termination = Some(match stop {
                        StopRule::Radius(_) => Termination::Radius,
                        StopRule::CriticalPoint { .. } => Termination::CriticalPointMissing,
                    });
                    break;
                }
            }
        }
        match cut {
            Some((s, st)) => steps.push(StepRecord {
                h: s,
                y1: st,
                ..rec
            }),
            None => steps.push(rec),
        }
    }

    let last = steps.last().map(|s| s.y1).unwrap_or(y0);
    let mut rho = vec![0.0, y0[RHO]];
    let mut q = vec![q0, y0[Q]];
    let mut v = vec![0.0, y0[V]];
    for s in &steps {
        rho.push(s.y1[RHO]);
        q.push(s.y1[Q]);
        v.push(s.y1[V]);
    }
    let w: Vec<f64> = q.iter().map(|&x| x.exp_m1() / sl).collect();
    let sup_w = w
        .iter()
        .copied()
        .chain(crits.iter().map(|c| c.w))
        .fold(f64::NEG_INFINITY, f64::max);
    let inf_w = w
        .iter()
        .copied()
        .chain(crits.iter().map(|c| c.w))
        .fold(f64::INFINITY, f64::min);
    let min_log_gap = q
        .iter()
        .copied()
        .chain(crits.iter().map(|c| c.log_gap))
        .fold(f64::INFINITY, f64::min);
    let max_abs_wdot = v
        .iter()
        .chain(nodes.iter().map(|n| &n.wdot))
        .fold(0.0f64, |m, x| m.max(x.abs()));

    let mut sol = RadialSolution {
        params: *params,
        h0,
        tol: opts.tol,
        rho,
        w,
        wdot: v,
        log_gap: q,
        nodes,
        critical_points: crits,
        segments: Vec::new(),
        classification_error: None,
        end_rho: last[RHO],
        termination: termination.unwrap_or(Termination::Radius),
        boundary_residual: last[V],
        e_norm: (last[GRAD] + last[MASS]).max(0.0).sqrt(),
        sup_w,
        inf_w,
        max_abs_wdot,
        min_log_gap,
        touches_floor: min_log_gap < opts.floor_eps.ln(),
        steps,
        node_states,
        start_state: y0,
    };
    match classify_segments(&sol) {
        Ok(segs) => sol.segments = segs,
        Err(e) => sol.classification_error = Some(e.to_string()),
    }
    Ok(sol)
}

/// Energy identity on one interval `[r1, r2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyResidual {
    pub r1: f64,
    pub r2: f64,
    pub residual: f64,
    pub scale: f64,
}

impl EnergyResidual {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

impl RadialSolution {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `+1`, `-1` or `0` for the trivial solution.
    pub fn sign_class(&self) -> i8 {
        if self.h0 > 0.0 {
            1
        } else if self.h0 < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.h0 == 0.0
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    /// `min(1 + √λ w)` over the trajectory (may underflow to 0).
    pub fn min_admissibility(&self) -> f64 {
        self.min_log_gap.exp()
    }

    fn state_to_sample(&self, st: &[f64; DIM]) -> Sample {
        let sl = self.params.sqrt_lambda();
        Sample {
            rho: st[RHO],
            w: st[Q].exp_m1() / sl,
            wdot: st[V],
            log_gap: st[Q],
        }
    }

    fn full_state_at(&self, rho: f64) -> Result<[f64; DIM]> {
        if !(rho >= 0.0 && rho <= self.end_rho) {
            return Err(Error::Range {
                value: rho,
                lo: 0.0,
                hi: self.end_rho,
            });
        }
        let y0 = self.start_state;
        if rho <= y0[RHO] {
            // inside the series start
            let p = &self.params;
            let fa = f_lambda(p, self.h0)?;
            let fpa = f_lambda_prime(p, self.h0)?;
            let b = fa / 4.0;
            let c = fpa * fa / 64.0;
            let w = self.h0 + b * rho * rho + c * rho.powi(4);
            let q = (p.sqrt_lambda() * self.h0).ln_1p()
                + (p.sqrt_lambda() * (w - self.h0) / p.gap(self.h0)).ln_1p();
            return Ok([
                rho,
                q,
                2.0 * b * rho + 4.0 * c * rho.powi(3),
                b * b * rho.powi(4),
                0.5 * self.h0 * self.h0 * rho * rho,
                2.0 * potential_lambda(p, self.h0)? * rho * rho,
            ]);
        }
        let i = self.steps.partition_point(|s| s.y1[RHO] < rho);
        let rec = match self.steps.get(i) {
            Some(r) => r,
            None => return Ok(self.steps.last().map(|s| s.y1).unwrap_or(y0)),
        };
        if rec.y1[RHO] == rho {
            return Ok(rec.y1);
        }
        let sys = RadialSystem {
            sl: self.params.sqrt_lambda(),
        };
        let (_, st) = locate(&sys, rec, RHO, rho)?;
        Ok(st)
    }

    /// `(w, ẇ)` at any `ρ ∈ [0, end_rho]`, to integration accuracy.
    pub fn sample_at(&self, rho: f64) -> Result<Sample> {
        Ok(self.state_to_sample(&self.full_state_at(rho)?))
    }

    /// Uniform resampling with `n ≥ 2` points on `[0, end_rho]`.
    pub fn resample(&self, n: usize) -> Result<Vec<Sample>> {
        let n = n.max(2);
        (0..n)
            .map(|i| self.sample_at(self.end_rho * i as f64 / (n - 1) as f64))
            .collect()
    }

    /// Uniformly resampled profile for the energy functional.
    pub fn profile(&self, n: usize) -> Result<Profile> {
        let s = self.resample(n)?;
        Profile::new(
            s.iter().map(|x| x.rho).collect(),
            s.iter().map(|x| x.w).collect(),
            s.iter().map(|x| x.wdot).collect(),
        )
    }

    /// `(∫ρẇ², ∫ρw², ∫4ρF_λ(w))` from 0 to `rho`.
    pub fn integrals_at(&self, rho: f64) -> Result<(f64, f64, f64)> {
        let st = self.full_state_at(rho)?;
        Ok((st[GRAD], st[MASS], st[POT]))
    }

    /// `(ρ₂²ẇ₂² - ρ₁²ẇ₁²) - (2ρ₂²F₂ - 2ρ₁²F₁ - ∫4σF)` on every interval
    /// between consecutive points of `{0, nodes, end}`.
    pub fn energy_identity(&self) -> Vec<EnergyResidual> {
        let mut pts: Vec<[f64; DIM]> = Vec::new();
        let mut origin = self.start_state;
        origin[RHO] = 0.0;
        origin[V] = 0.0;
        origin[GRAD] = 0.0;
        origin[MASS] = 0.0;
        origin[POT] = 0.0;
        origin[Q] = (self.params.sqrt_lambda() * self.h0).ln_1p();
        pts.push(origin);
        pts.extend(self.node_states.iter().copied());
        pts.push(self.steps.last().map(|s| s.y1).unwrap_or(self.start_state));
        pts.windows(2)
            .filter(|p| p[1][RHO] > p[0][RHO])
            .map(|p| {
                let (a, b) = (&p[0], &p[1]);
                let lhs_b = b[RHO].powi(2) * b[V].powi(2);
                let lhs_a = a[RHO].powi(2) * a[V].powi(2);
                let fb = 2.0 * b[RHO].powi(2) * potential_from_log_gap(b[Q]);
                let fa = 2.0 * a[RHO].powi(2) * potential_from_log_gap(a[Q]);
                let integral = b[POT] - a[POT];
                let residual = (lhs_b - lhs_a) - (fb - fa - integral);
                let scale = lhs_b
                    .abs()
                    .max(lhs_a.abs())
                    .max(fb.abs())
                    .max(fa.abs())
                    .max(integral.abs())
                    .max(1e-300);
                EnergyResidual {
                    r1: a[RHO],
                    r2: b[RHO],
                    residual,
                    scale,
                }
            })
            .collect()
    }

    /// `sup|w| / ‖w‖_E`.
    pub fn sup_to_energy_norm(&self) -> f64 {
        self.sup_w.abs().max(self.inf_w.abs()) / self.e_norm
    }
}

/// `√(∫ρẇ² + ∫ρw²)` over `[0, end_rho]`.
pub fn e_norm(sol: &RadialSolution) -> f64 {
    sol.e_norm
}

/// Nodes of the trajectory; see [`RadialSolution::nodes`].
pub fn detect_nodes(sol: &RadialSolution) -> Vec<f64> {
    sol.nodes.iter().map(|n| n.rho).collect()
}

/// ρ of the k-th positive critical point, `None` if it lies beyond `rho_max`.
pub fn critical_radius(
    params: &ProblemParams,
    h0: f64,
    k: usize,
    rho_max: f64,
    tol: Tolerances,
) -> Result<Option<f64>> {
    let sol = integrate_to_critical(params, h0, k, rho_max, tol)?;
    Ok(match sol.termination {
        Termination::CriticalPoint => Some(sol.end_rho),
        Termination::Truncated(msg) => {
            return Err(Error::NoConvergence {
                what: "radial shooting",
                detail: msg,
            });
        }
        _ => None,
    })
}
