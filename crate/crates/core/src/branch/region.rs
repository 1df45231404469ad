//! The open sets `𝒪_ε` of the continuation argument and the λ-windows
//! covered by the branches.

use serde::Serialize;

use super::{Branch, BranchPoint};
use crate::error::{Error, Result};
use crate::shooting::RadialSolution;
use crate::specfun::{dirichlet_eigen, neumann_eigen};

/// Boundary face of `𝒪_ε` crossed by a point outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitFace {
    /// `λ ≤ ε` or `λ ≥ 1/ε`.
    Lambda,
    /// `1 + √λ w ≤ ε` somewhere.
    Floor,
    /// `w ≥ 1/ε` somewhere.
    Amplitude,
}

/// `𝒪_ε = {(λ, w) : ε < λ < 1/ε, 1 + √λ w > ε, w < 1/ε on [0, R]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityRegion {
    pub eps: f64,
}

pub fn admissibility_region(eps: f64) -> Result<AdmissibilityRegion> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!(
            "eps must lie in ]0, 1[, got {eps}"
        )));
    }
    Ok(AdmissibilityRegion { eps })
}

impl AdmissibilityRegion {
    /// Faces violated by `(λ, min(1 + √λ w), sup w)`; empty when inside.
    pub fn violated(&self, lambda: f64, min_admissibility: f64, sup_w: f64) -> Vec<ExitFace> {
        let e = self.eps;
        let mut out = Vec::new();
        if !(lambda > e && lambda < 1.0 / e) {
            out.push(ExitFace::Lambda);
        }
        if !(min_admissibility > e) {
            out.push(ExitFace::Floor);
        }
        if !(sup_w < 1.0 / e) {
            out.push(ExitFace::Amplitude);
        }
        out
    }

    pub fn contains(&self, lambda: f64, min_admissibility: f64, sup_w: f64) -> bool {
        self.violated(lambda, min_admissibility, sup_w).is_empty()
    }

    pub fn contains_point(&self, p: &BranchPoint) -> bool {
        self.contains(p.lambda, p.min_admissibility, p.sup_w)
    }

    pub fn contains_solution(&self, s: &RadialSolution) -> bool {
        self.contains(s.params.lambda, s.min_admissibility(), s.sup_w)
    }

    /// First point of the branch outside `𝒪_ε` and the faces it crosses.
    pub fn first_exit(&self, branch: &Branch) -> Option<(usize, Vec<ExitFace>)> {
        branch.points.iter().enumerate().find_map(|(i, p)| {
            let v = self.violated(p.lambda, p.min_admissibility, p.sup_w);
            (!v.is_empty()).then_some((i, v))
        })
    }
}

/// λ-interval in which solutions are predicted by the branch limits:
/// `]ν_h, μ_{2h-1}/2[` (odd, `k = 2h - 1`) or `]μ_h, μ_{2h}/2[` (even, `k = 2h`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceWindow {
    pub h: usize,
    pub k: usize,
    pub odd: bool,
    pub lower: f64,
    pub upper: f64,
    /// λ-range actually covered by a traced branch.
    pub swept: Option<(f64, f64)>,
}

pub fn existence_window(h: usize, odd: bool, radius: f64) -> Result<ExistenceWindow> {
    if h == 0 {
        return Err(Error::Parameter("window index h starts at 1".into()));
    }
    let (k, lower) = if odd {
        (2 * h - 1, dirichlet_eigen(h, radius)?.nu)
    } else {
        (2 * h, neumann_eigen(h, radius)?.mu)
    };
    let upper = 0.5 * neumann_eigen(k, radius)?.mu;
    Ok(ExistenceWindow {
        h,
        k,
        odd,
        lower,
        upper,
        swept: None,
    })
}

impl ExistenceWindow {
    pub fn is_empty(&self) -> bool {
        !(self.lower < self.upper)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lower < lambda && lambda < self.upper
    }

    pub fn with_branch(mut self, branch: &Branch) -> Self {
        self.swept = branch.lambda_range();
        self
    }

    /// Fraction of the window covered by the swept range.
    pub fn coverage(&self) -> Option<f64> {
        let (a, b) = self.swept?;
        let lo = a.max(self.lower);
        let hi = b.min(self.upper);
        Some(((hi - lo) / (self.upper - self.lower)).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_point_is_inside() {
        let r = admissibility_region(1e-3).unwrap();
        let mu = neumann_eigen(1, 1.0).unwrap().mu;
        assert!(r.contains(0.5 * mu, 1.0, 0.0));
        assert_eq!(r.violated(1e-4, 1.0, 0.0), vec![ExitFace::Lambda]);
        assert_eq!(
            r.violated(5.0, 1e-4, 2e3),
            vec![ExitFace::Floor, ExitFace::Amplitude]
        );
        assert!(admissibility_region(1.0).is_err());
    }

    #[test]
    fn windows_are_open_and_nonempty() {
        for h in 1..=4 {
            for odd in [true, false] {
                let w = existence_window(h, odd, 1.0).unwrap();
                assert!(!w.is_empty(), "{w:?}");
            }
        }
        let w = existence_window(1, true, 1.0).unwrap();
        assert!((w.lower - 5.783185962946784).abs() < 1e-9);
        assert!((w.upper - 7.340985321033813).abs() < 1e-9);
    }
}
