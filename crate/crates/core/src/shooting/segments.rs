//! Splitting a trajectory into monotone pieces of type A, B, C, D.
//!
//! * A: `w(r1) > 0`, `ẇ(r1) = 0`, `ẇ < 0`, `w(r2) = 0`  (`ρ̄ = r1`, `ρ₀ = r2`)
//! * B: `w(r1) = 0`, `ẇ < 0`, `ẇ(r2) = 0`, `w(r2) < 0`  (`ρ₀ = r1`, `ρ̄ = r2`)
//! * C: `w(r1) < 0`, `ẇ(r1) = 0`, `ẇ > 0`, `w(r2) = 0`  (`ρ̄ = r1`, `ρ₀ = r2`)
//! * D: `w(r1) = 0`, `ẇ > 0`, `ẇ(r2) = 0`, `w(r2) > 0`  (`ρ₀ = r1`, `ρ̄ = r2`)

use serde::Serialize;

use super::{RadialSolution, Termination};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    A,
    B,
    C,
    D,
}

impl CaseTag {
    pub fn as_char(self) -> char {
        match self {
            CaseTag::A => 'A',
            CaseTag::B => 'B',
            CaseTag::C => 'C',
            CaseTag::D => 'D',
        }
    }

    /// Flat end first (A, C) or last (B, D).
    pub fn starts_flat(self) -> bool {
        matches!(self, CaseTag::A | CaseTag::C)
    }

    /// Positive hump (A, D) or negative hump (B, C).
    pub fn positive(self) -> bool {
        matches!(self, CaseTag::A | CaseTag::D)
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One monotone piece between a critical point and a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodalSegment {
    pub r1: f64,
    pub r2: f64,
    pub case_tag: CaseTag,
    /// Extremum at the flat end `ρ̄`.
    pub h: f64,
    /// `ln(1 + √λ h)`.
    pub h_log_gap: f64,
    pub rho_bar: f64,
    pub rho_0: f64,
    /// `ẇ(ρ₀)`.
    pub wdot_rho_0: f64,
    /// False for a trailing piece cut by the end of the trajectory.
    pub complete: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Node,
    Critical,
}

#[derive(Clone, Copy)]
struct Point {
    rho: f64,
    kind: Kind,
    w: f64,
    log_gap: f64,
    wdot: f64,
}

/// Relative distance below which a trailing piece is treated as closed.
pub const CLOSING_FRACTION: f64 = 1e-9;
/// `|ẇ(end)| / max|ẇ|` below which the end counts as a critical point.
pub const FLAT_END_FRACTION: f64 = 1e-8;

fn make(a: &Point, b: &Point, complete: bool) -> NodalSegment {
    let (flat, node, tag) = match (a.kind, b.kind) {
        (Kind::Critical, _) => {
            let tag = if a.w > 0.0 { CaseTag::A } else { CaseTag::C };
            (a, b, tag)
        }
        (Kind::Node, _) => {
            let tag = if b.wdot < 0.0 || b.w < 0.0 {
                CaseTag::B
            } else {
                CaseTag::D
            };
            (b, a, tag)
        }
    };
    NodalSegment {
        r1: a.rho,
        r2: b.rho,
        case_tag: tag,
        h: flat.w,
        h_log_gap: flat.log_gap,
        rho_bar: flat.rho,
        rho_0: node.rho,
        wdot_rho_0: node.wdot,
        complete,
    }
}

/// Splits `[0, end_rho]` into pieces of type A–D.
pub fn classify_segments(sol: &RadialSolution) -> Result<Vec<NodalSegment>> {
    if sol.is_trivial() {
        return Ok(Vec::new());
    }
    let mut pts = vec![Point {
        rho: 0.0,
        kind: Kind::Critical,
        w: sol.h0,
        log_gap: sol.log_gap[0],
        wdot: 0.0,
    }];
    let mut ev: Vec<Point> = sol
        .nodes
        .iter()
        .map(|n| Point {
            rho: n.rho,
            kind: Kind::Node,
            w: 0.0,
            log_gap: 0.0,
            wdot: n.wdot,
        })
        .chain(sol.critical_points.iter().map(|c| Point {
            rho: c.rho,
            kind: Kind::Critical,
            w: c.w,
            log_gap: c.log_gap,
            wdot: 0.0,
        }))
        .collect();
    ev.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    pts.extend(ev);
    for p in pts.windows(2) {
        if p[0].kind == p[1].kind {
            return Err(Error::Classification(format!(
                "piece [{}, {}] is not monotone between a critical point and a node",
                p[0].rho, p[1].rho
            )));
        }
    }
    let mut segs: Vec<NodalSegment> = pts.windows(2).map(|p| make(&p[0], &p[1], true)).collect();

    if sol.termination == Termination::CriticalPoint {
        return Ok(segs);
    }
    let last = *pts.last().expect("origin is always present");
    let end = sol.end_rho;
    let tail = end - last.rho;
    if tail <= CLOSING_FRACTION * sol.params.radius {
        return Ok(segs);
    }
    let end_sample = sol.sample_at(end)?;
    let flat_end = sol.boundary_residual.abs() <= FLAT_END_FRACTION * sol.max_abs_wdot;
    let end_point = Point {
        rho: end,
        kind: if last.kind == Kind::Node {
            Kind::Critical
        } else {
            Kind::Node
        },
        w: end_sample.w,
        log_gap: end_sample.log_gap,
        wdot: end_sample.wdot,
    };
    let complete = last.kind == Kind::Node && flat_end;
    segs.push(make(&last, &end_point, complete));
    Ok(segs)
}
