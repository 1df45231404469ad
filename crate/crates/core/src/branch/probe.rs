//! Shots of `ü + u̇/ρ = -λu + 1/u` from `u(0) = u0 > 0` looking for `u(R) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProblemParams;
use crate::numeric::ode::Tolerances;
use crate::shooting::{self, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub lambda: f64,
    pub u0: f64,
    pub min_u: f64,
    pub u_at_r: f64,
    pub max_abs_udot: f64,
    /// The shot reached `u ≈ 0` or failed before `R`.
    pub singular: bool,
    /// `u(R) < hit_tol` with a finite derivative.
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletReport {
    pub radius: f64,
    pub hit_tol: f64,
    pub rows: Vec<ProbeRow>,
    pub hits: usize,
    pub singular: usize,
}

/// Scans the grid; the shot from `u0` is the w-shot from `h0 = u0 - 1/√λ`.
pub fn dirichlet_probe(
    lambdas: &[f64],
    u0s: &[f64],
    radius: f64,
    hit_tol: f64,
    tol: Tolerances,
) -> Result<DirichletReport> {
    if lambdas
        .iter()
        .chain(u0s)
        .any(|&x| !(x > 0.0 && x.is_finite()))
    {
        return Err(Error::Parameter(
            "probe grids need positive finite values".into(),
        ));
    }
    let mut rows = Vec::with_capacity(lambdas.len() * u0s.len());
    for &lambda in lambdas {
        let params = ProblemParams::new(lambda, radius)?;
        let sl = params.sqrt_lambda();
        for &u0 in u0s {
            let h0 = u0 - 1.0 / sl;
            let row = match shooting::integrate(&params, h0, tol) {
                Ok(sol) => {
                    let reached = sol.termination == Termination::Radius;
                    let q_end = *sol.log_gap.last().expect("trajectory has points");
                    let u_at_r = q_end.exp() / sl;
                    let singular = !reached || sol.touches_floor;
                    let finite = sol.max_abs_wdot.is_finite();
                    ProbeRow {
                        lambda,
                        u0,
                        min_u: sol.min_log_gap.exp() / sl,
                        u_at_r,
                        max_abs_udot: sol.max_abs_wdot,
                        singular,
                        hit: reached && finite && u_at_r < hit_tol,
                    }
                }
                Err(_) => ProbeRow {
                    lambda,
                    u0,
                    min_u: f64::NAN,
                    u_at_r: f64::NAN,
                    max_abs_udot: f64::NAN,
                    singular: true,
                    hit: false,
                },
            };
            rows.push(row);
        }
    }
    let hits = rows.iter().filter(|r| r.hit).count();
    let singular = rows.iter().filter(|r| r.singular).count();
    Ok(DirichletReport {
        radius,
        hit_tol,
        rows,
        hits,
        singular,
    })
}

/// `λ ∈ [1, 30]` uniform and `u0 ∈ [10⁻², 10]` geometric, `n` values each.
pub fn default_probe_grid(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.max(2);
    let t = |i: usize| i as f64 / (n - 1) as f64;
    let lambdas = (0..n).map(|i| 1.0 + 29.0 * t(i)).collect();
    let u0s = (0..n).map(|i| 10f64.powf(-2.0 + 3.0 * t(i))).collect();
    (lambdas, u0s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_shot_stays_constant() {
        let lambda = 4.0;
        let r = dirichlet_probe(&[lambda], &[0.5], 1.0, 1e-6, Tolerances::default()).unwrap();
        let row = r.rows[0];
        assert!((row.min_u - 0.5).abs() < 1e-15 && (row.u_at_r - 0.5).abs() < 1e-15);
        assert!(!row.hit && !row.singular);
    }

    #[test]
    fn tiny_start_is_flagged() {
        let r = dirichlet_probe(&[4.0], &[1e-12], 1.0, 1e-6, Tolerances::default()).unwrap();
        assert!(r.rows[0].singular);
        assert_eq!(r.hits, 0);
    }
}
