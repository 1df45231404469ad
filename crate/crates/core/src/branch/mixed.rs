//! First eigenvalue of `-(ρw')' = μρw` on `[a, b]` with one Neumann and one
//! Dirichlet end, by shooting in `μ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::ode::{Integrator, OdeSystem, Tolerances};
use crate::numeric::roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MixedKind {
    /// `w'(a) = 0`, `w(b) = 0`.
    NeumannDirichlet,
    /// `w(a) = 0`, `w'(b) = 0`; needs `a > 0`.
    DirichletNeumann,
}

/// State `[w, ρw']`.
struct Bessel0 {
    mu: f64,
}

impl OdeSystem<2> for Bessel0 {
    fn rhs(&self, t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
        dy[0] = y[1] / t;
        dy[1] = -self.mu * t * y[0];
    }
}

fn tolerances() -> Tolerances {
    Tolerances {
        rtol: 1e-12,
        atol: 1e-14,
    }
}

/// `w(b)` (ND) or `ρw'(b)` (DN), both positive at `μ = 0`.
fn boundary_value(kind: MixedKind, a: f64, b: f64, mu: f64) -> Result<f64> {
    let sys = Bessel0 { mu };
    let (t0, y0) = match kind {
        MixedKind::NeumannDirichlet if a == 0.0 => {
            let r = 1e-6 * b;
            (
                r,
                [
                    1.0 - mu * r * r / 4.0 + mu * mu * r.powi(4) / 64.0,
                    -mu * r * r / 2.0 + mu * mu * r.powi(4) / 16.0,
                ],
            )
        }
        MixedKind::NeumannDirichlet => (a, [1.0, 0.0]),
        MixedKind::DirichletNeumann => (a, [0.0, a]),
    };
    let mut integ =
        Integrator::new(&sys, t0, y0, 1e-3 * (b - a), tolerances()).with_max_step((b - a) / 8.0);
    loop {
        let rec = integ.advance()?;
        if rec.t1() >= b {
            let y = rec.state_at(&sys, b - rec.t0);
            return Ok(match kind {
                MixedKind::NeumannDirichlet => y[0],
                MixedKind::DirichletNeumann => y[1],
            });
        }
    }
}

/// First mixed eigenvalue on `[a, b]`.
pub fn first_mixed_eigenvalue(kind: MixedKind, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b > a) || (kind == MixedKind::DirichletNeumann && a == 0.0) {
        return Err(Error::Parameter(format!(
            "bad interval [{a}, {b}] for {kind:?}"
        )));
    }
    let len = b - a;
    let ds = 0.1 / len;
    let mut s0 = 0.0;
    let mut f0 = boundary_value(kind, a, b, 0.0)?;
    for i in 1..=400 {
        let s1 = ds * i as f64;
        let f1 = boundary_value(kind, a, b, s1 * s1)?;
        if f1 == 0.0 {
            return Ok(s1 * s1);
        }
        if f1.signum() != f0.signum() {
            let mut g = |mu: f64| boundary_value(kind, a, b, mu).unwrap_or(f64::NAN);
            return roots::brent_with_values(&mut g, s0 * s0, f0, s1 * s1, f1, 1e-14 * s1 * s1);
        }
        s0 = s1;
        f0 = f1;
    }
    Err(Error::NoConvergence {
        what: "mixed eigensolver",
        detail: format!("no eigenvalue below {} on [{a}, {b}]", (400.0 * ds).powi(2)),
    })
}

/// Largest first mixed eigenvalue over subintervals `[a, a + len] ⊂ [0, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedSup {
    pub value: f64,
    pub a: f64,
    pub kind: MixedKind,
}

pub fn sup_mixed_eigenvalue(radius: f64, len: f64) -> Result<MixedSup> {
    if !(len > 0.0 && len <= radius) {
        return Err(Error::Parameter(format!(
            "subinterval length {len} not in ]0, {radius}]"
        )));
    }
    let eval = |a: f64| -> Result<(f64, MixedKind)> {
        let nd = first_mixed_eigenvalue(MixedKind::NeumannDirichlet, a, a + len)?;
        if a > 0.0 {
            let dn = first_mixed_eigenvalue(MixedKind::DirichletNeumann, a, a + len)?;
            if dn > nd {
                return Ok((dn, MixedKind::DirichletNeumann));
            }
        }
        Ok((nd, MixedKind::NeumannDirichlet))
    };
    let span = radius - len;
    let n = 16;
    let mut best = MixedSup {
        value: f64::NEG_INFINITY,
        a: 0.0,
        kind: MixedKind::NeumannDirichlet,
    };
    let mut best_i = 0;
    for i in 0..=n {
        let a = span * i as f64 / n as f64;
        let (v, kind) = eval(a)?;
        if v > best.value {
            best = MixedSup { value: v, a, kind };
            best_i = i;
        }
    }
    if span > 0.0 {
        // golden-section refinement around the best grid cell
        let cell = span / n as f64;
        let (mut lo, mut hi) = ((best_i as f64 - 1.0) * cell, (best_i as f64 + 1.0) * cell);
        lo = lo.max(0.0);
        hi = hi.min(span);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..40 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            let (v1, k1) = eval(x1)?;
            let (v2, k2) = eval(x2)?;
            for (v, a, kind) in [(v1, x1, k1), (v2, x2, k2)] {
                if v > best.value {
                    best = MixedSup { value: v, a, kind };
                }
            }
            if v1 > v2 {
                hi = x2;
            } else {
                lo = x1;
            }
            if hi - lo < 1e-6 * radius {
                break;
            }
        }
    }
    Ok(best)
}
