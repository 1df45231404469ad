//! Slack of every pointwise and integral inequality on a classified piece.
//!
//! The time map here is `Φ_{λ,h}(h) = Φ̄(√λ h)/√(2λ)` (see [`crate::timemap`]),
//! under which the interval estimates read, for instance in case A,
//! `ρ̄ ln(ρ₀/ρ̄) ≤ Φ_{λ,h}(h) ≤ ρ₀ - ρ̄`.

use std::f64::consts::PI;

use serde::Serialize;

use super::segments::{CaseTag, NodalSegment};
use super::{potential_from_log_gap, RadialSolution, Termination};
use crate::error::Result;
use crate::timemap::{phi_level, phi_partial_level, ScaledLevel};

pub const HUMP_BOUND_NAME: &str = "hump-width";

/// One inequality `lhs ≤ rhs` recorded as `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub rho: f64,
    pub slack: f64,
    pub scale: f64,
}

impl Check {
    fn new(name: impl Into<String>, rho: f64, lhs: f64, rhs: f64, scale: f64) -> Self {
        Self {
            name: name.into(),
            rho,
            slack: rhs - lhs,
            scale: scale.max(1e-300),
        }
    }

    pub fn relative(&self) -> f64 {
        self.slack / self.scale
    }

    pub fn passes(&self, slack_tol: f64) -> bool {
        self.slack >= -slack_tol * self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub case_tag: CaseTag,
    pub r1: f64,
    pub r2: f64,
    pub complete: bool,
    pub checks: Vec<Check>,
}

impl SegmentReport {
    pub fn failures(&self, slack_tol: f64) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| !c.passes(slack_tol))
    }

    pub fn min_relative_slack(&self) -> f64 {
        self.checks
            .iter()
            .map(Check::relative)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `((b - a)/b, ln(b/a), (b - a)/a)` for `0 < a < b`.
pub fn log_inequality(a: f64, b: f64) -> (f64, f64, f64) {
    ((b - a) / b, (b / a).ln(), (b - a) / a)
}

/// `ρ̄ ln(x/ρ̄)` with the limit 0 at `ρ̄ = 0`.
fn rbar_log(rho_bar: f64, x: f64) -> f64 {
    if rho_bar == 0.0 {
        0.0
    } else {
        rho_bar * (x / rho_bar).ln()
    }
}

struct Pt {
    rho: f64,
    q: f64,
    p: f64,
}

/// Evaluates AC/BD, interval, derivative, envelope and logarithm inequalities.
///
/// `samples` interior points (uniform in ρ) are used for the pairwise
/// energy inequalities and the envelope.
pub fn verify_segment_inequalities(
    sol: &RadialSolution,
    seg: &NodalSegment,
    samples: usize,
) -> Result<SegmentReport> {
    let tag = seg.case_tag;
    let lambda = sol.params.lambda;
    let mut checks = Vec::new();

    // pairwise (AC)/(BD) on the flat end, interior samples, and the far end
    let mut pts = Vec::with_capacity(samples + 2);
    let (lo_q, lo_p, hi_q, hi_p) = if !seg.complete {
        let a = sol.sample_at(seg.r1)?;
        let b = sol.sample_at(seg.r2)?;
        (a.log_gap, a.wdot * a.wdot, b.log_gap, b.wdot * b.wdot)
    } else if tag.starts_flat() {
        (seg.h_log_gap, 0.0, 0.0, seg.wdot_rho_0.powi(2))
    } else {
        (0.0, seg.wdot_rho_0.powi(2), seg.h_log_gap, 0.0)
    };
    pts.push(Pt {
        rho: seg.r1,
        q: lo_q,
        p: lo_p,
    });
    for i in 1..=samples {
        let rho = seg.r1 + (seg.r2 - seg.r1) * i as f64 / (samples + 1) as f64;
        let s = sol.sample_at(rho)?;
        pts.push(Pt {
            rho,
            q: s.log_gap,
            p: s.wdot * s.wdot,
        });
    }
    pts.push(Pt {
        rho: seg.r2,
        q: hi_q,
        p: hi_p,
    });
    let family = if matches!(tag, CaseTag::A | CaseTag::C) {
        "AC"
    } else {
        "BD"
    };
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (a, b) = (&pts[i], &pts[j]);
            let (ea, eb) = (a.rho * a.rho * a.p, b.rho * b.rho * b.p);
            let (fa, fb) = (potential_from_log_gap(a.q), potential_from_log_gap(b.q));
            let d = eb - ea;
            let lo1 = 2.0 * a.rho * a.rho * (fb - fa);
            let lo2 = 2.0 * b.rho * b.rho * (fb - fa);
            // magnitude of the terms before cancellation
            let scale = ea.max(eb).max(2.0 * b.rho * b.rho * fa.abs().max(fb.abs()));
            let (lower, upper) = if family == "AC" {
                (lo1, lo2)
            } else {
                (lo2, lo1)
            };
            checks.push(Check::new(
                format!("{family}-lower"),
                b.rho,
                lower,
                d,
                scale,
            ));
            checks.push(Check::new(
                format!("{family}-upper"),
                b.rho,
                d,
                upper,
                scale,
            ));
        }
    }

    if seg.complete {
        let (rb, r0) = (seg.rho_bar, seg.rho_0);
        let level = ScaledLevel::from_log_gap(seg.h_log_gap)?;
        let phi_h = phi_level(lambda, &level, 1e-13)?.value;
        let iscale = phi_h.abs().max(r0).max(rb);
        let t = tag.as_char();
        // signed time map oriented so that it is positive
        let phi_pos = if matches!(tag, CaseTag::A | CaseTag::D) {
            phi_h
        } else {
            -phi_h
        };
        if tag.starts_flat() {
            let ln_term = rbar_log(rb, r0);
            checks.push(Check::new(
                format!("interval-{t}-log"),
                r0,
                rb / r0 * (r0 - rb),
                ln_term,
                iscale,
            ));
            checks.push(Check::new(
                format!("interval-{t}-lower"),
                r0,
                ln_term,
                phi_pos,
                iscale,
            ));
            checks.push(Check::new(
                format!("interval-{t}-upper"),
                r0,
                phi_pos,
                r0 - rb,
                iscale,
            ));
        } else {
            let ln_term = rb * (rb / r0).ln();
            checks.push(Check::new(
                format!("interval-{t}-lower"),
                r0,
                rb - r0,
                phi_pos,
                iscale,
            ));
            checks.push(Check::new(
                format!("interval-{t}-upper"),
                r0,
                phi_pos,
                ln_term,
                iscale,
            ));
            checks.push(Check::new(
                format!("interval-{t}-log"),
                r0,
                ln_term,
                rb / r0 * (rb - r0),
                iscale,
            ));
        }

        // derivative at the node
        let big_d = (-2.0 * potential_from_log_gap(seg.h_log_gap)).sqrt();
        let slope = if matches!(tag, CaseTag::A | CaseTag::B) {
            -seg.wdot_rho_0
        } else {
            seg.wdot_rho_0
        };
        let ratio = rb / r0;
        let dscale = big_d * ratio.max(1.0);
        if tag.starts_flat() {
            checks.push(Check::new(
                format!("derivative-{t}-lower"),
                r0,
                ratio * big_d,
                slope,
                dscale,
            ));
            checks.push(Check::new(
                format!("derivative-{t}-upper"),
                r0,
                slope,
                big_d,
                dscale,
            ));
        } else {
            checks.push(Check::new(
                format!("derivative-{t}-lower"),
                r0,
                big_d,
                slope,
                dscale,
            ));
            checks.push(Check::new(
                format!("derivative-{t}-upper"),
                r0,
                slope,
                ratio * big_d,
                dscale,
            ));
        }

        // logarithm inequality on the segment ends
        let (a, b) = if rb < r0 { (rb, r0) } else { (r0, rb) };
        if a > 0.0 {
            let (l, m, u) = log_inequality(a, b);
            checks.push(Check::new("log-lower", r0, l, m, m.abs()));
            checks.push(Check::new("log-upper", r0, m, u, m.abs()));
        }

        // envelopes, compared through the time map: Φ⁻¹(a) ≤ w(ρ) ⟺ a ≤ Φ(w(ρ))
        let (lo_arg, hi_arg) = (phi_h.min(0.0), phi_h.max(0.0));
        let (q_lo, q_hi) = (seg.h_log_gap.min(0.0), seg.h_log_gap.max(0.0));
        for pt in &pts[1..pts.len() - 1] {
            let rho = pt.rho;
            let (a1, a2) = match tag {
                CaseTag::A | CaseTag::B => (phi_h + (rb - rho), phi_h - rbar_log(rb, rho)),
                CaseTag::C | CaseTag::D => (phi_h + rbar_log(rb, rho), phi_h + (rho - rb)),
            };
            let p = ScaledLevel::from_log_gap(pt.q.clamp(q_lo, q_hi))?;
            let phi_w = phi_partial_level(lambda, &level, &p, 1e-13)?;
            let escale = rho.max(phi_h.abs());
            checks.push(Check::new(
                format!("envelope-{t}-lower"),
                rho,
                a1.clamp(lo_arg, hi_arg),
                phi_w,
                escale,
            ));
            checks.push(Check::new(
                format!("envelope-{t}-upper"),
                rho,
                phi_w,
                a2.clamp(lo_arg, hi_arg),
                escale,
            ));
        }
    }

    Ok(SegmentReport {
        case_tag: tag,
        r1: seg.r1,
        r2: seg.r2,
        complete: seg.complete,
        checks,
    })
}

/// Width of the i-th hump `[ρ_i, ρ_{i+1}]` between consecutive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HumpWidth {
    pub index: usize,
    pub r1: f64,
    pub r2: f64,
    pub positive: bool,
    pub complete: bool,
}

impl HumpWidth {
    pub fn width(&self) -> f64 {
        self.r2 - self.r1
    }

    /// Check of `ρ_{i+1} - ρ_i ≥ π/(4√λ)`.
    pub fn bound_check(&self, lambda: f64) -> Check {
        let bound = PI / (4.0 * lambda.sqrt());
        Check::new(HUMP_BOUND_NAME, self.r1, bound, self.width(), bound)
    }
}

/// Humps with `ρ_0 = 0` and `ρ_{k+1} = end_rho`; the last one is complete
/// only when the trajectory ends on a critical point.
pub fn hump_widths(sol: &RadialSolution) -> Vec<HumpWidth> {
    if sol.is_trivial() {
        return Vec::new();
    }
    let mut cuts = vec![0.0];
    cuts.extend(sol.nodes.iter().map(|n| n.rho));
    cuts.push(sol.end_rho);
    let closed_end = sol.termination == Termination::CriticalPoint
        || sol
            .segments
            .last()
            .map(|s| s.complete && !s.case_tag.starts_flat())
            .unwrap_or(false);
    let n = cuts.len() - 1;
    (0..n)
        .map(|i| HumpWidth {
            index: i,
            r1: cuts[i],
            r2: cuts[i + 1],
            positive: (i % 2 == 0) == (sol.h0 > 0.0),
            complete: i + 1 < n || closed_end,
        })
        .collect()
}
