//! Bessel functions `J0`, `J1`, their zeros, and the radial spectra of the disk.
//!
//! Neumann radial eigenvalues `μ_k = (y_k / R)²` come from the zeros `y_k` of
//! `J0' = -J1`, Dirichlet ones `ν_k = (z_k / R)²` from the zeros `z_k` of `J0`.
//! The ordering `ν_k < μ_k < ν_{k+1}` holds for every `k ≥ 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

const SERIES_MAX: f64 = 5.0;
const MILLER_MAX: f64 = 25.0;

fn check(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Bessel argument must be finite, got {x}"
        )))
    }
}

/// Power series for `(J0(x), J1(x))`, `x ≥ 0` small.
fn series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let (mut j0, mut j1) = (t0, t1);
    for k in 1..60 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        j0 += t0;
        j1 += t1;
        if t0.abs() < 1e-18 * j0.abs().max(1e-3) && t1.abs() < 1e-18 {
            break;
        }
    }
    (j0, j1)
}

/// Miller backward recurrence normalized by `J0 + 2 Σ J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64) {
    let mut n = x.ceil() as usize + 40;
    if n % 2 == 1 {
        n += 1;
    }
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for m in (1..=n).rev() {
        // j holds J_m, jp1 holds J_{m+1}
        let jm1 = 2.0 * m as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if m - 1 > 0 && (m - 1) % 2 == 0 {
            norm += 2.0 * j;
        }
        if m - 1 == 1 {
            j1 = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j;
    (j / norm, j1 / norm)
}

/// Hankel asymptotic expansion for order `nu ∈ {0, 1}`: returns `(P, Q)`.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..80 {
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    (p, q)
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(1.0, x);
    // cos/sin of x - π/4 and x - 3π/4 expanded so no large phase is formed
    let c0 = (c + s) * FRAC_1_SQRT_2;
    let s0 = (s - c) * FRAC_1_SQRT_2;
    let c1 = (s - c) * FRAC_1_SQRT_2;
    let s1 = -(s + c) * FRAC_1_SQRT_2;
    (amp * (p0 * c0 - q0 * s0), amp * (p1 * c1 - q1 * s1))
}

fn j0_j1(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax <= SERIES_MAX {
        series(ax)
    } else if ax <= MILLER_MAX {
        miller(ax)
    } else {
        asymptotic(ax)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

/// Bessel function of the first kind of order 0.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(j0_j1(x).0)
}

/// Bessel function of the first kind of order 1.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(j0_j1(x).1)
}

/// `J0'(x) = -J1(x)`.
pub fn bessel_j0_prime(x: f64) -> Result<f64> {
    check(x)?;
    Ok(-j0_j1(x).1)
}

static J0_ZEROS: OnceLock<RwLock<Vec<f64>>> = OnceLock::new();
static J1_ZEROS: OnceLock<RwLock<Vec<f64>>> = OnceLock::new();

/// Bisection on a sign-changing bracket followed by Newton polish.
fn refine_zero<F, D>(f: F, df: D, mut a: f64, mut b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence {
            what: "Bessel zero bracket",
            detail: format!("no sign change on [{a}, {b}]"),
        });
    }
    while b - a > 1e-6 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..8 {
        let dx = f(x) / df(x);
        x -= dx;
        if dx.abs() < 1e-16 * x {
            break;
        }
    }
    if !(x > a - 1e-6 && x < b + 1e-6) {
        return Err(Error::NoConvergence {
            what: "Bessel zero Newton polish",
            detail: format!("iterate {x} left the bracket [{a}, {b}]"),
        });
    }
    Ok(x)
}

fn memo_zero(
    cell: &'static OnceLock<RwLock<Vec<f64>>>,
    k: usize,
    compute: impl Fn(usize) -> Result<f64>,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("zero index starts at 1".into()));
    }
    let lock = cell.get_or_init(|| RwLock::new(Vec::new()));
    if let Some(&z) = lock.read().expect("zero cache poisoned").get(k - 1) {
        return Ok(z);
    }
    let mut cache = lock.write().expect("zero cache poisoned");
    while cache.len() < k {
        let z = compute(cache.len() + 1)?;
        cache.push(z);
    }
    Ok(cache[k - 1])
}

/// k-th positive zero of `J0` (`k ≥ 1`).
pub fn j0_zero(k: usize) -> Result<f64> {
    memo_zero(&J0_ZEROS, k, |k| {
        let kf = k as f64;
        refine_zero(
            |x| j0_j1(x).0,
            |x| -j0_j1(x).1,
            (kf - 0.75) * PI,
            (kf + 0.25) * PI,
        )
    })
}

/// k-th positive zero of `J1`, that is the k-th nontrivial zero of `J0'` (`k ≥ 1`).
pub fn j1_zero(k: usize) -> Result<f64> {
    memo_zero(&J1_ZEROS, k, |k| {
        let kf = k as f64;
        refine_zero(
            |x| j0_j1(x).1,
            |x| {
                let (j0, j1) = j0_j1(x);
                j0 - j1 / x
            },
            (kf - 0.25) * PI,
            (kf + 0.75) * PI,
        )
    })
}

/// Radial Neumann mode `w_k(ρ) = J0(y_k ρ / R)` with eigenvalue `μ_k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NeumannMode {
    pub k: usize,
    pub radius: f64,
    /// `y_k`; zero for `k = 0`.
    pub zero: f64,
    pub mu: f64,
}

impl NeumannMode {
    pub fn eval(&self, rho: f64) -> f64 {
        j0_j1(self.zero * rho / self.radius).0
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        -self.zero / self.radius * j0_j1(self.zero * rho / self.radius).1
    }
}

/// Radial Dirichlet mode `v_k(ρ) = J0(z_k ρ / R)` with eigenvalue `ν_k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DirichletMode {
    pub k: usize,
    pub radius: f64,
    pub zero: f64,
    pub nu: f64,
}

impl DirichletMode {
    pub fn eval(&self, rho: f64) -> f64 {
        j0_j1(self.zero * rho / self.radius).0
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        -self.zero / self.radius * j0_j1(self.zero * rho / self.radius).1
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "radius must be positive and finite, got {radius}"
        )))
    }
}

/// Neumann eigenpair of index `k ≥ 0`; `μ_0 = 0` with `w_0 ≡ 1`.
pub fn neumann_eigen(k: usize, radius: f64) -> Result<NeumannMode> {
    check_radius(radius)?;
    let zero = if k == 0 { 0.0 } else { j1_zero(k)? };
    Ok(NeumannMode {
        k,
        radius,
        zero,
        mu: (zero / radius).powi(2),
    })
}

/// Dirichlet eigenpair of index `k ≥ 1`.
pub fn dirichlet_eigen(k: usize, radius: f64) -> Result<DirichletMode> {
    check_radius(radius)?;
    if k == 0 {
        return Err(Error::Parameter("Dirichlet index starts at 1".into()));
    }
    let zero = j0_zero(k)?;
    Ok(DirichletMode {
        k,
        radius,
        zero,
        nu: (zero / radius).powi(2),
    })
}

/// Both spectra at one index.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectralData {
    pub radius: f64,
    pub k: usize,
    pub y_k: f64,
    pub z_k: f64,
    pub mu_k: f64,
    pub nu_k: f64,
}

impl SpectralData {
    pub fn new(k: usize, radius: f64) -> Result<Self> {
        let n = neumann_eigen(k, radius)?;
        let d = dirichlet_eigen(k, radius)?;
        Ok(Self {
            radius,
            k,
            y_k: n.zero,
            z_k: d.zero,
            mu_k: n.mu,
            nu_k: d.nu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from 30-digit arbitrary precision evaluation
    const REF: [(f64, f64, f64); 14] = [
        (0.1, 0.997501562066040032, 0.049937526036242000321),
        (1.0, 0.76519768655796655145, 0.44005058574493351596),
        (2.5, -0.048383776468197996327, 0.49709410246427403801),
        (4.9, -0.20973832758532620295, -0.3146946710151906549),
        (5.1, -0.14433474706050063629, -0.33709720201823181267),
        (7.3, 0.28821694763501439904, 0.082570430493257831051),
        (12.0, 0.047689310796833536624, -0.22344710449062761237),
        (19.5, 0.17885382704017289297, -0.02087707014809752225),
        (24.9, 0.083245968353015490053, -0.13485569953140886933),
        (25.1, 0.10827567149994945198, -0.11463478413442256746),
        (40.0, 0.0073668905842372895535, 0.12603831803758499921),
        (77.7, 0.005068664664995793793, 0.090408396777184832059),
        (123.4, -0.071525536719260154445, -0.0068509998856543724112),
        (199.0, -0.054139528598386563971, -0.016506653354383840437),
    ];

    fn envelope(x: f64) -> f64 {
        (2.0 / (PI * x.abs())).sqrt().min(1.0)
    }

    #[test]
    fn matches_reference_values() {
        for &(x, j0, j1) in &REF {
            let e = envelope(x);
            assert!((bessel_j0(x).unwrap() - j0).abs() < 1e-13 * e, "J0({x})");
            assert!((bessel_j1(x).unwrap() - j1).abs() < 1e-13 * e, "J1({x})");
        }
    }

    #[test]
    fn regimes_agree_at_switch_points() {
        for x in [SERIES_MAX, MILLER_MAX] {
            let a = if x == SERIES_MAX {
                series(x)
            } else {
                miller(x)
            };
            let b = if x == SERIES_MAX {
                miller(x)
            } else {
                asymptotic(x)
            };
            assert!((a.0 - b.0).abs() < 1e-14, "{x}: {a:?} vs {b:?}");
            assert!((a.1 - b.1).abs() < 1e-14, "{x}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn parity() {
        for x in [0.3, 4.0, 9.0, 30.0] {
            assert_eq!(bessel_j0(-x).unwrap(), bessel_j0(x).unwrap());
            assert_eq!(bessel_j1(-x).unwrap(), -bessel_j1(x).unwrap());
        }
    }

    #[test]
    fn derivative_by_differences() {
        let eps = 1e-5;
        for x in [0.7, 3.0, 6.2, 18.0, 60.0] {
            let fd = (bessel_j0(x + eps).unwrap() - bessel_j0(x - eps).unwrap()) / (2.0 * eps);
            assert!((fd - bessel_j0_prime(x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn non_finite_is_domain_error() {
        assert!(matches!(bessel_j0(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            bessel_j0_prime(f64::INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zeros_match_reference() {
        let z = [
            (1, 2.4048255576957727686, 3.8317059702075123156),
            (2, 5.5200781102863106496, 7.0155866698156187535),
            (3, 8.653727912911012217, 10.173468135062722077),
            (10, 30.634606468431975118, 32.189679910974403627),
        ];
        for (k, z0, z1) in z {
            assert!((j0_zero(k).unwrap() - z0).abs() < 1e-13);
            assert!((j1_zero(k).unwrap() - z1).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvalue_scaling_and_conventions() {
        let m1 = neumann_eigen(1, 1.0).unwrap().mu;
        assert!((m1 - 14.681970642124).abs() < 1e-9);
        assert!((neumann_eigen(1, 2.0).unwrap().mu - m1 / 4.0).abs() < 1e-12);
        let m0 = neumann_eigen(0, 1.0).unwrap();
        assert_eq!(m0.mu, 0.0);
        assert_eq!(m0.eval(0.7), 1.0);
        assert!(dirichlet_eigen(0, 1.0).is_err());
        assert!(neumann_eigen(1, -1.0).is_err());
    }

    #[test]
    fn modes_have_k_interior_zeros() {
        for k in 1..=6 {
            let w = neumann_eigen(k, 1.0).unwrap();
            let n = 4000;
            let changes = (0..n)
                .filter(|&i| {
                    let a = w.eval(i as f64 / n as f64);
                    let b = w.eval((i + 1) as f64 / n as f64);
                    a.signum() != b.signum()
                })
                .count();
            assert_eq!(changes, k);
            assert!(dirichlet_eigen(k, 1.0).unwrap().eval(1.0).abs() < 1e-13);
        }
    }
}
