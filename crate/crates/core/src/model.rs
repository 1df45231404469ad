//! Nonlinearity, potential, change of variables, truncation and radial energy.
//!
//! With `u = 1/√λ + w` the problem becomes `w'' + w'/ρ = f_λ(w)` where
//!
//! ```text
//!     f_λ(s) = -λs - λs / (1 + √λ s)
//!     F_λ(s) = -λs²/2 - √λ s + ln(1 + √λ s)          (F_λ' = f_λ, F_λ(0) = 0)
//!     h_λ(s) = λ√λ s² / (1 + √λ s)                     (2λs - h_λ(s) = -f_λ(s))
//!     h_1(s) = s² / (1 + s),   H_1(s) = s²/2 - s + ln(1 + s)
//! ```
//!
//! Every function of `w` is a function of `√λ w` only, which the helpers with
//! suffix `_scaled` exploit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad;

/// `(λ, R)` of one radial problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub lambda: f64,
    pub radius: f64,
}

impl ProblemParams {
    pub fn new(lambda: f64, radius: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { lambda, radius })
    }

    pub fn sqrt_lambda(&self) -> f64 {
        self.lambda.sqrt()
    }

    /// Lower bound `-1/√λ` of admissible values of `w`.
    pub fn admissible_floor(&self) -> f64 {
        -1.0 / self.sqrt_lambda()
    }

    /// `1 + √λ w`.
    pub fn gap(&self, w: f64) -> f64 {
        1.0 + self.sqrt_lambda() * w
    }

    pub fn check_admissible(&self, w: f64) -> Result<()> {
        let gap = self.gap(w);
        if gap > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                lambda: self.lambda,
                w,
                gap,
            })
        }
    }
}

/// `ln(1 + x) - x` without cancellation for small `x`.
pub fn log1p_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // -x²/2 + x³/3 - x⁴/4 + ...
        let mut term = -x * x / 2.0;
        let mut sum = term;
        let mut n = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -x * n / (n + 1.0);
            n += 1.0;
            sum += term;
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// `f_1(x) = -x - x/(1+x)`, so that `f_λ(s) = √λ f_1(√λ s)`.
pub fn f_scaled(x: f64) -> f64 {
    -x - x / (1.0 + x)
}

/// `F_1(x) = -x²/2 - x + ln(1+x)`, so that `F_λ(s) = F_1(√λ s)`.
pub fn potential_scaled(x: f64) -> f64 {
    if x == -1.0 {
        return f64::NEG_INFINITY;
    }
    -0.5 * x * x + log1p_minus_x(x)
}

/// `f_λ(s) = -λs - λs / (1 + √λ s)`.
pub fn f_lambda(params: &ProblemParams, s: f64) -> Result<f64> {
    params.check_admissible(s)?;
    let l = params.lambda;
    Ok(-l * s - l * s / params.gap(s))
}

/// Derivative `f_λ'(s) = -λ - λ / (1 + √λ s)²`.
pub fn f_lambda_prime(params: &ProblemParams, s: f64) -> Result<f64> {
    params.check_admissible(s)?;
    let l = params.lambda;
    Ok(-l - l / params.gap(s).powi(2))
}

/// Potential `F_λ(s) = -λs²/2 - √λ s + ln(1 + √λ s)`; `-∞` exactly at the floor.
pub fn potential_lambda(params: &ProblemParams, s: f64) -> Result<f64> {
    let x = params.sqrt_lambda() * s;
    if x == -1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    params.check_admissible(s)?;
    Ok(potential_scaled(x))
}

fn check_h1(s: f64) -> Result<()> {
    if s > -1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("h_1 requires s > -1, got {s}")))
    }
}

/// `h_1(s) = s² / (1 + s)`.
pub fn h_one(s: f64) -> Result<f64> {
    check_h1(s)?;
    Ok(s * s / (1.0 + s))
}

/// `H_1(s) = s²/2 - s + ln(1 + s)`, the primitive of `h_1` vanishing at 0.
pub fn big_h_one(s: f64) -> Result<f64> {
    check_h1(s)?;
    Ok(0.5 * s * s + log1p_minus_x(s))
}

/// `h_λ(s) = λ√λ s² / (1 + √λ s)`.
pub fn h_lambda(params: &ProblemParams, s: f64) -> Result<f64> {
    params.check_admissible(s)?;
    Ok(params.lambda * params.sqrt_lambda() * s * s / params.gap(s))
}

/// C² extension of `h_1` below `s0` by its second-order Taylor polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub s0: f64,
    /// `h_1(s0)`, `h_1'(s0)`, `h_1''(s0)`.
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        truncate_h(-0.5).expect("default junction is valid")
    }
}

/// Builds the truncation with junction `s0 ∈ ]-1, 0[`.
pub fn truncate_h(s0: f64) -> Result<Truncation> {
    if !(s0 > -1.0 && s0 < 0.0) {
        return Err(Error::Parameter(format!(
            "junction s0 must lie in ]-1, 0[, got {s0}"
        )));
    }
    let d = 1.0 + s0;
    // h_1(s) = s - 1 + 1/(1+s)
    Ok(Truncation {
        s0,
        h0: s0 * s0 / d,
        h1: 1.0 - 1.0 / (d * d),
        h2: 2.0 / (d * d * d),
    })
}

impl Truncation {
    /// `h̃_1(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.s0 {
            s * s / (1.0 + s)
        } else {
            let t = s - self.s0;
            self.h0 + self.h1 * t + 0.5 * self.h2 * t * t
        }
    }

    /// `h̃_1'(s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s >= self.s0 {
            1.0 - 1.0 / (1.0 + s).powi(2)
        } else {
            self.h1 + self.h2 * (s - self.s0)
        }
    }

    /// `h̃_1''(s)`.
    pub fn second_derivative(&self, s: f64) -> f64 {
        if s >= self.s0 {
            2.0 / (1.0 + s).powi(3)
        } else {
            self.h2
        }
    }

    /// `H̃_1(s)` with `H̃_1(0) = 0`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s >= self.s0 {
            0.5 * s * s + log1p_minus_x(s)
        } else {
            let t = s - self.s0;
            let base = 0.5 * self.s0 * self.s0 + log1p_minus_x(self.s0);
            base + self.h0 * t + 0.5 * self.h1 * t * t + self.h2 * t * t * t / 6.0
        }
    }
}

/// `h̃_1(s)` for the given truncation.
pub fn h_tilde(t: &Truncation, s: f64) -> f64 {
    t.eval(s)
}

/// `u = 1/√λ + w`.
pub fn to_u(params: &ProblemParams, w: f64) -> Result<f64> {
    params.check_admissible(w)?;
    Ok(1.0 / params.sqrt_lambda() + w)
}

/// `w = u - 1/√λ`.
pub fn to_w(params: &ProblemParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!(
            "u must be positive and finite, got {u}"
        )));
    }
    Ok(u - 1.0 / params.sqrt_lambda())
}

/// Residual of `-Δu - λu + 1/u` for a radial profile given `u`, `u'`, `u''` at `ρ > 0`.
pub fn pde_residual(params: &ProblemParams, rho: f64, u: f64, du: f64, d2u: f64) -> f64 {
    -(d2u + du / rho) - params.lambda * u + 1.0 / u
}

/// Samples of a radial profile on an increasing grid of `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub rho: Vec<f64>,
    pub w: Vec<f64>,
    pub wdot: Vec<f64>,
}

impl Profile {
    pub fn new(rho: Vec<f64>, w: Vec<f64>, wdot: Vec<f64>) -> Result<Self> {
        if rho.len() != w.len() || rho.len() != wdot.len() || rho.len() < 2 {
            return Err(Error::Parameter(
                "profile arrays must have equal length ≥ 2".into(),
            ));
        }
        if rho.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Parameter(
                "profile grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { rho, w, wdot })
    }

    /// Uniform sampling of closed forms.
    pub fn from_fn(
        radius: f64,
        n: usize,
        w: impl Fn(f64) -> f64,
        wdot: impl Fn(f64) -> f64,
    ) -> Self {
        let n = n.max(2);
        let rho: Vec<f64> = (0..n).map(|i| radius * i as f64 / (n - 1) as f64).collect();
        let wv = rho.iter().map(|&r| w(r)).collect();
        let dv = rho.iter().map(|&r| wdot(r)).collect();
        Self {
            rho,
            w: wv,
            wdot: dv,
        }
    }

    fn integrate(&self, g: impl Fn(usize) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.rho.len()).map(g).collect();
        let n = self.rho.len();
        let h = (self.rho[n - 1] - self.rho[0]) / (n - 1) as f64;
        let uniform = self
            .rho
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * h);
        if uniform {
            quad::simpson_uniform(h, &vals)
        } else {
            quad::trapezoid(&self.rho, &vals)
        }
    }
}

/// Radial quadratic form `½∫ρẇ² - λ∫ρw²`.
pub fn quadratic_form(params: &ProblemParams, p: &Profile) -> f64 {
    p.integrate(|i| p.rho[i] * (0.5 * p.wdot[i].powi(2) - params.lambda * p.w[i].powi(2)))
}

/// Radial energy `½∫ρẇ² - λ∫ρw² + ∫ρ H_1(√λ w) = ∫ρ (ẇ²/2 + F_λ(w))`.
///
/// Its Euler equation is `ẅ + ẇ/ρ = f_λ(w)` with natural Neumann conditions.
pub fn radial_energy(params: &ProblemParams, p: &Profile) -> Result<f64> {
    for &w in &p.w {
        params.check_admissible(w)?;
    }
    let sl = params.sqrt_lambda();
    Ok(quadratic_form(params, p)
        + p.integrate(|i| p.rho[i] * (0.5 * (sl * p.w[i]).powi(2) + log1p_minus_x(sl * p.w[i]))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: f64) -> ProblemParams {
        ProblemParams::new(l, 1.0).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(f_lambda(&p(1.0), 0.0).unwrap(), 0.0);
        assert!((f_lambda(&p(1.0), 1.0).unwrap() + 1.5).abs() < 1e-15);
        assert_eq!(potential_lambda(&p(1.0), 0.0).unwrap(), 0.0);
        assert!((potential_lambda(&p(1.0), 1.0).unwrap() - (-1.5 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(h_one(0.0).unwrap(), 0.0);
        assert_eq!(h_one(1.0).unwrap(), 0.5);
    }

    #[test]
    fn floor_behaviour() {
        let q = p(4.0);
        assert!(matches!(
            f_lambda(&q, -0.5),
            Err(Error::Inadmissible { .. })
        ));
        assert_eq!(potential_lambda(&q, -0.5).unwrap(), f64::NEG_INFINITY);
        assert!(potential_lambda(&q, -0.6).is_err());
        assert!(h_one(-1.0).is_err());
    }

    #[test]
    fn small_argument_potential_keeps_digits() {
        // F_1(x) = -x² + x³/3 - x⁴/4 + ...
        let x: f64 = 1e-7;
        let exact = -x * x + x * x * x / 3.0 - x.powi(4) / 4.0;
        assert!((potential_scaled(x) - exact).abs() < 1e-15 * x * x);
    }

    #[test]
    fn change_of_variables() {
        let q = p(4.0);
        assert_eq!(to_u(&q, 0.5).unwrap(), 1.0);
        assert_eq!(to_u(&q, 0.0).unwrap(), 0.5);
        assert_eq!(pde_residual(&q, 0.3, 0.5, 0.0, 0.0), 0.0);
        assert!(to_u(&q, -0.5).is_err());
        assert!(to_w(&q, 0.0).is_err());
    }

    #[test]
    fn truncation_junction_is_c2() {
        let t = truncate_h(-0.5).unwrap();
        let s0 = t.s0;
        let d = 1.0 + s0;
        assert_eq!(t.h0, s0 * s0 / d);
        assert_eq!(t.h1, 1.0 - 1.0 / (d * d));
        assert_eq!(t.h2, 2.0 / (d * d * d));
        assert!((t.eval(s0 - 1e-300) - t.eval(s0)).abs() < 1e-15);
        assert_eq!(t.derivative(s0), 1.0 - 1.0 / d.powi(2));
        assert!(truncate_h(0.5).is_err());
        assert!(truncate_h(-1.0).is_err());
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.derivative(0.0), 0.0);
        assert_eq!(t.second_derivative(0.0), 2.0);
    }

    #[test]
    fn truncation_second_differences_match() {
        let t = Truncation::default();
        let e = 1e-4;
        let s0 = t.s0;
        let left = (t.eval(s0) - 2.0 * t.eval(s0 - e) + t.eval(s0 - 2.0 * e)) / (e * e);
        let right = (t.eval(s0 + 2.0 * e) - 2.0 * t.eval(s0 + e) + t.eval(s0)) / (e * e);
        assert!((left - right).abs() < 10.0 * e * t.h2.abs().max(1.0));
    }

    #[test]
    fn truncated_primitive_is_primitive() {
        let t = Truncation::default();
        for s in [-3.0, -0.9, -0.5, -0.2, 0.4, 2.0] {
            let e = 1e-5;
            let fd = (t.primitive(s + e) - t.primitive(s - e)) / (2.0 * e);
            assert!((fd - t.eval(s)).abs() < 1e-8, "s = {s}");
        }
    }

    #[test]
    fn constant_profile_energy() {
        let q = p(2.0);
        let z = Profile::from_fn(1.0, 101, |_| 0.0, |_| 0.0);
        assert_eq!(radial_energy(&q, &z).unwrap(), 0.0);
    }
}
