//! Time map of a monotone hump.
//!
//! For an extremum value `h` the time map is
//!
//! ```text
//!     Φ_{λ,h}(h) = Φ̄(√λ h) / √(2λ),     Φ̄(S) = ∫₀¹ S dσ / √(F(σS) - F(S)),
//! ```
//!
//! with `F = F_1` the scaled potential. `Φ̄` is evaluated after the change
//! `σ = 1 - t²`, which removes the inverse square root at `σ = 1`:
//!
//! ```text
//!     Φ̄(S) = sgn(S) ∫₀¹ 2 dt / √K(t),   K(t) = (F((1 - t²)S) - F(S)) / (t² S²),
//! ```
//!
//! and `K` is expanded in `a = -t²S/(1+S)` so that neither `S → 0` nor
//! `S → -1` loses digits. Levels near `S = -1` are carried as
//! [`ScaledLevel`]s holding `ln(1 + S)`, which stays representable when
//! `1 + S` underflows.
//!
//! Limits: `π/(2√(2λ))` as `h → 0⁺`, `π/(2√λ)` as `h → +∞`, `-π/(2√(2λ))`
//! as `h → 0⁻` and `0` as `√λ h → -1⁺`; the last one is approached only
//! like `1/√ln(1/(1 + √λ h))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{log1p_minus_x, ProblemParams};
use crate::numeric::{quad, roots};

/// Default absolute tolerance on `Φ̄`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A scaled amplitude `S = √λ h > -1` together with `ln(1 + S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledLevel {
    pub s: f64,
    pub log_gap: f64,
}

impl ScaledLevel {
    pub fn from_scaled(s: f64) -> Result<Self> {
        if !(s > -1.0 && s.is_finite()) {
            return Err(Error::Domain(format!(
                "scaled level must be finite and > -1, got {s}"
            )));
        }
        Ok(Self {
            s,
            log_gap: s.ln_1p(),
        })
    }

    /// Level with `1 + S = exp(log_gap)`; usable far below the underflow threshold.
    pub fn from_log_gap(log_gap: f64) -> Result<Self> {
        if !log_gap.is_finite() {
            return Err(Error::Domain(format!(
                "log gap must be finite, got {log_gap}"
            )));
        }
        Ok(Self {
            s: log_gap.exp_m1(),
            log_gap,
        })
    }

    pub fn from_amplitude(params: &ProblemParams, h: f64) -> Result<Self> {
        params.check_admissible(h)?;
        Self::from_scaled(params.sqrt_lambda() * h)
    }
}

/// `(ln(1 + a) - a) / a²`.
fn psi(a: f64) -> f64 {
    if a.abs() < 1e-2 {
        // -1/2 + a/3 - a²/4 + ...
        let mut sum = 0.0;
        let mut pow = 1.0;
        for n in 0..12 {
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * pow / (n as f64 + 2.0);
            pow *= a;
        }
        sum
    } else {
        log1p_minus_x(a) / (a * a)
    }
}

/// `K(t)` for the level `lv`, `0 < t ≤ 1`.
fn kernel(lv: &ScaledLevel, t: f64) -> f64 {
    let s = lv.s;
    let qh = lv.log_gap;
    let t2 = t * t;
    let delta = qh.exp();
    let a = if delta > 0.0 {
        -t2 * s / delta
    } else {
        f64::INFINITY
    };
    if a.abs() < 0.5 {
        (1.0 - 0.5 * t2) + (1.0 + t2 * psi(a) / delta) / delta
    } else {
        // ln(u_σ / (1 + S)) with u_σ = 1 + (1 - t²) S
        let log_ratio = if s > 0.0 {
            (s * (1.0 - t) * (1.0 + t)).ln_1p() - qh
        } else {
            let lx = (t2 * s.abs()).ln();
            lx + (qh - lx).exp().ln_1p() - qh
        };
        1.0 - 0.5 * t2 + 1.0 / s + log_ratio / (t2 * s * s)
    }
}

/// `∫_{t_lo}^1 2/√K(t) dt` (unsigned).
fn reduced_integral(lv: &ScaledLevel, t_lo: f64, tol: f64) -> Result<quad::Estimate> {
    if lv.s == 0.0 {
        return Err(Error::Domain("time map is undefined at amplitude 0".into()));
    }
    quad::integrate(|t| 2.0 / kernel(lv, t).sqrt(), t_lo, 1.0, tol, 0.0)
}

/// `Φ̄` at a level, with the quadrature error estimate.
pub fn phi_bar_level(lv: &ScaledLevel, tol: f64) -> Result<quad::Estimate> {
    let est = reduced_integral(lv, 0.0, tol)?;
    Ok(quad::Estimate {
        value: lv.s.signum() * est.value,
        ..est
    })
}

/// `Φ̄(s)` for `s > -1`, `s ≠ 0`, to absolute tolerance [`DEFAULT_TOL`].
pub fn phi_bar(s: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::Domain("phi_bar is undefined at s = 0".into()));
    }
    Ok(phi_bar_level(&ScaledLevel::from_scaled(s)?, DEFAULT_TOL)?.value)
}

/// One evaluation of `Φ_{λ,h}(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeMapSample {
    pub lambda: f64,
    pub h: f64,
    pub phi: f64,
    pub quadrature_error_estimate: f64,
}

/// `Φ_{λ,h}(h)` at a scaled level.
pub fn phi_level(lambda: f64, lv: &ScaledLevel, tol: f64) -> Result<quad::Estimate> {
    let c = 1.0 / (2.0 * lambda).sqrt();
    let est = phi_bar_level(lv, tol / c)?;
    Ok(quad::Estimate {
        value: c * est.value,
        error: c * est.error,
        evaluations: est.evaluations,
    })
}

/// `Φ_{λ,h}(h) = Φ̄(√λ h) / √(2λ)`.
pub fn phi(params: &ProblemParams, h: f64) -> Result<TimeMapSample> {
    phi_with_tol(params, h, DEFAULT_TOL)
}

pub fn phi_with_tol(params: &ProblemParams, h: f64, tol: f64) -> Result<TimeMapSample> {
    if h == 0.0 {
        return Err(Error::Domain("time map requires h ≠ 0".into()));
    }
    let lv = ScaledLevel::from_amplitude(params, h)?;
    let est = phi_level(params.lambda, &lv, tol)?;
    Ok(TimeMapSample {
        lambda: params.lambda,
        h,
        phi: est.value,
        quadrature_error_estimate: est.error,
    })
}

/// `t_s` at which the partial map up to level `p` starts, for the hump level `h`.
///
/// `t_s² = 1 - s/h = e^{q_p} (e^{q_h - q_p} - 1) / (e^{q_h} - 1)` with `q = ln(1 + S)`.
fn t_start(h: &ScaledLevel, p: &ScaledLevel) -> f64 {
    let t2 = if h.log_gap.abs() < 1.0 && p.log_gap.abs() < 1.0 {
        1.0 - p.s / h.s
    } else {
        (p.log_gap + (h.log_gap - p.log_gap).exp_m1().abs().ln() - h.log_gap.exp_m1().abs().ln())
            .exp()
    };
    t2.clamp(0.0, 1.0).sqrt()
}

fn check_between(h: f64, s: f64) -> Result<()> {
    let (lo, hi) = if h > 0.0 { (0.0, h) } else { (h, 0.0) };
    if s >= lo && s <= hi {
        Ok(())
    } else {
        Err(Error::Domain(format!("level {s} is not between 0 and {h}")))
    }
}

/// `Φ_{λ,h}(s) = ∫₀ˢ dξ / √(2(F_λ(ξ) - F_λ(h)))` between levels.
pub fn phi_partial_level(lambda: f64, h: &ScaledLevel, p: &ScaledLevel, tol: f64) -> Result<f64> {
    if p.s == 0.0 {
        return Ok(0.0);
    }
    check_between(h.s, p.s)?;
    let ts = t_start(h, p);
    let c = 1.0 / (2.0 * lambda).sqrt();
    Ok(c * h.s.signum() * reduced_integral(h, ts, tol / c)?.value)
}

/// `Φ_{λ,h}(s)` for `s` between 0 and `h`.
pub fn phi_partial(params: &ProblemParams, h: f64, s: f64) -> Result<f64> {
    if h == 0.0 {
        return Err(Error::Domain("time map requires h ≠ 0".into()));
    }
    check_between(h, s)?;
    let hl = ScaledLevel::from_amplitude(params, h)?;
    let sl = ScaledLevel::from_amplitude(params, s)?;
    phi_partial_level(params.lambda, &hl, &sl, 1e-12)
}

/// Level `p` between 0 and `h` with `Φ_{λ,h}(p) = target`.
pub fn phi_inverse_level(lambda: f64, h: &ScaledLevel, target: f64) -> Result<ScaledLevel> {
    let c = 1.0 / (2.0 * lambda).sqrt();
    let tol = 1e-13;
    let full = c * h.s.signum() * reduced_integral(h, 0.0, tol / c)?.value;
    let (lo, hi) = if full > 0.0 { (0.0, full) } else { (full, 0.0) };
    let slack = 1e-12 * full.abs();
    if !(target >= lo - slack && target <= hi + slack) {
        return Err(Error::Range {
            value: target,
            lo,
            hi,
        });
    }
    let target = target.clamp(lo, hi);
    if target == 0.0 {
        return ScaledLevel::from_scaled(0.0);
    }
    if target == full {
        return Ok(*h);
    }
    let g = |t: f64| -> f64 {
        match reduced_integral(h, t, tol / c) {
            Ok(e) => c * h.s.signum() * e.value - target,
            Err(_) => f64::NAN,
        }
    };
    let t = roots::brent_with_values(&mut { g }, 0.0, full - target, 1.0, -target, 1e-15)?;
    let sigma = (1.0 - t) * (1.0 + t);
    if h.s > 0.0 || h.log_gap > -1.0 {
        ScaledLevel::from_scaled(sigma * h.s)
    } else {
        // 1 + σS = t² + σ(1 + S)
        let lt = (t * t).ln();
        ScaledLevel::from_log_gap(lt + (sigma * (h.log_gap - lt).exp()).ln_1p())
    }
}

/// `s` between 0 and `h` with `Φ_{λ,h}(s) = target`.
pub fn phi_inverse(params: &ProblemParams, h: f64, target: f64) -> Result<f64> {
    if h == 0.0 {
        return Err(Error::Domain("time map requires h ≠ 0".into()));
    }
    let hl = ScaledLevel::from_amplitude(params, h)?;
    let p = phi_inverse_level(params.lambda, &hl, target)?;
    Ok(p.s / params.sqrt_lambda())
}

/// The four limits of `Φ_{λ,h}(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limits {
    pub zero_plus: f64,
    pub plus_infinity: f64,
    pub zero_minus: f64,
    pub floor: f64,
}

pub fn limits(lambda: f64) -> Limits {
    let small = PI / (2.0 * (2.0 * lambda).sqrt());
    Limits {
        zero_plus: small,
        plus_infinity: PI / (2.0 * lambda.sqrt()),
        zero_minus: -small,
        floor: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_branches_agree() {
        for a in [-9.99e-3, 9.99e-3] {
            let series = psi(a);
            let direct = (a.ln_1p() - a) / (a * a);
            assert!((series - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn kernel_branches_agree() {
        // the two forms of K must coincide where |a| = 1/2
        for s in [-0.6, 0.3, 5.0] {
            let lv = ScaledLevel::from_scaled(s).unwrap();
            let t = (0.5 * (1.0 + s) / s.abs()).sqrt();
            if t < 1.0 {
                let k1 = kernel(&lv, t * (1.0 - 1e-12));
                let k2 = kernel(&lv, t * (1.0 + 1e-12));
                assert!((k1 - k2).abs() < 1e-9 * k1.abs(), "{s}: {k1} {k2}");
            }
        }
    }

    #[test]
    fn kernel_matches_naive_form() {
        let f = |x: f64| -0.5 * x * x - x + x.ln_1p();
        for s in [-0.7, -0.2, 0.5, 3.0] {
            let lv = ScaledLevel::from_scaled(s).unwrap();
            for t in [0.3, 0.6, 0.9] {
                let sig = 1.0 - t * t;
                let naive = (f(sig * s) - f(s)) / (t * t * s * s);
                assert!((kernel(&lv, t) - naive).abs() < 1e-10, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn matches_high_precision_reference() {
        // 80-digit Gauss–Legendre on the naive closed form
        let refs = [
            (0.5, 1.7015326704906305),
            (1.0, 1.7867479024956743),
            (10.0, 2.1076353270780088),
            (1e6, 2.2214400548692564),
            (-0.5, -1.3363126624116123),
            (-0.9, -0.88206512452047967),
            (-0.999, -0.4237225943291336),
        ];
        for (s, v) in refs {
            assert!((phi_bar(s).unwrap() - v).abs() < 1e-10, "s = {s}");
        }
        assert!((phi_bar(-1.0 + 1e-9).unwrap() + 0.2263258165).abs() < 1e-6);
        let p = ProblemParams::new(1.0, 1.0).unwrap();
        assert!((phi_partial(&p, 2.0, 1.0).unwrap() - 0.43824938356761792).abs() < 1e-11);
    }

    #[test]
    fn small_amplitude_limit() {
        assert!((phi_bar(1e-6).unwrap() - PI / 2.0).abs() < 1e-5);
        assert!((phi_bar(-1e-6).unwrap() + PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn log_gap_levels_agree_with_plain_levels() {
        let a = phi_bar_level(&ScaledLevel::from_scaled(-0.999).unwrap(), 1e-12).unwrap();
        let b = phi_bar_level(&ScaledLevel::from_log_gap(0.001f64.ln()).unwrap(), 1e-12).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn deep_floor_levels_are_finite() {
        let v = phi_bar_level(&ScaledLevel::from_log_gap(-1e5).unwrap(), 1e-12)
            .unwrap()
            .value;
        assert!(v < 0.0 && v > -1e-2, "{v}");
    }

    #[test]
    fn zero_amplitude_is_rejected() {
        assert!(phi_bar(0.0).is_err());
        assert!(phi_bar(-1.0).is_err());
        let p = ProblemParams::new(1.0, 1.0).unwrap();
        assert!(phi(&p, 0.0).is_err());
        assert!(phi_partial(&p, 1.0, 1.5).is_err());
        assert!(matches!(
            phi_inverse(&p, 1.0, 5.0),
            Err(Error::Range { .. })
        ));
    }
}
