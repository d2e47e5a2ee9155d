//! Closed-form solutions on the unit disk and error-table rows.
//!
//! For `h ≡ 4` the constrained torsion problem on the unit disk has the
//! solution `u = 1 − r` on `½ ≤ r ≤ 1`, `u = ¾ − r²` on `r ≤ ½`, with
//! multiplier `λ = 2r − 1` on the outer annulus and zero inside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{self, FemError};
use crate::mesh::{DomainTag, Point};
use crate::problem::ProblemSpec;
use crate::solver::SolveReport;

const RADIUS_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("point at radius {0} lies outside the unit disk")]
    OutsideDisk(f64),
    #[error("h = {0} activates the gradient constraint; the unconstrained formula needs 0 < h <= 2")]
    ConstraintActive(f64),
    #[error("error rows need the h = 4, g = 0 unit-disk problem: {0}")]
    UnsupportedProblem(String),
    #[error(transparent)]
    Fem(#[from] FemError),
}

fn radius(x: Point) -> Result<f64, AnalyticError> {
    let r = x[0].hypot(x[1]);
    if r > 1.0 + RADIUS_TOL {
        Err(AnalyticError::OutsideDisk(r))
    } else {
        Ok(r)
    }
}

fn torsion_u(r: f64) -> f64 {
    if r >= 0.5 {
        1.0 - r
    } else {
        0.75 - r * r
    }
}

fn torsion_grad(x: Point) -> [f64; 2] {
    let r = x[0].hypot(x[1]);
    if r >= 0.5 {
        [-x[0] / r, -x[1] / r]
    } else {
        [-2.0 * x[0], -2.0 * x[1]]
    }
}

fn torsion_lambda(r: f64) -> f64 {
    if r >= 0.5 {
        2.0 * r - 1.0
    } else {
        0.0
    }
}

/// Constrained solution for `h ≡ 4`.
pub fn exact_disk_u(x: Point) -> Result<f64, AnalyticError> {
    radius(x).map(torsion_u)
}

pub fn exact_disk_grad(x: Point) -> Result<[f64; 2], AnalyticError> {
    radius(x).map(|_| torsion_grad(x))
}

/// Multiplier for `h ≡ 4`.
pub fn exact_disk_lambda(x: Point) -> Result<f64, AnalyticError> {
    radius(x).map(torsion_lambda)
}

/// `(h/8)(1 − r²)`, the minimizer of the `p = 2` penalized energy, i.e. the
/// radial solution of `−2Δu = h` with zero boundary values.
pub fn exact_disk_p2(h: f64, x: Point) -> Result<f64, AnalyticError> {
    radius(x).map(|r| h / 8.0 * (1.0 - r * r))
}

pub fn exact_disk_p2_grad(h: f64, x: Point) -> Result<[f64; 2], AnalyticError> {
    radius(x).map(|_| [-h / 4.0 * x[0], -h / 4.0 * x[1]])
}

/// `(h/4)(1 − r²)`, the solution of `−Δu = h`. Its gradient never exceeds
/// `h/2`, so for `h ≤ 2` it is also the constrained minimizer.
pub fn exact_disk_unconstrained(h: f64, x: Point) -> Result<f64, AnalyticError> {
    if !(h > 0.0 && h <= 2.0) {
        return Err(AnalyticError::ConstraintActive(h));
    }
    radius(x).map(|r| h / 4.0 * (1.0 - r * r))
}

pub fn exact_disk_unconstrained_grad(h: f64, x: Point) -> Result<[f64; 2], AnalyticError> {
    if !(h > 0.0 && h <= 2.0) {
        return Err(AnalyticError::ConstraintActive(h));
    }
    radius(x).map(|_| [-h / 2.0 * x[0], -h / 2.0 * x[1]])
}

/// One line of the error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub p: f64,
    pub cells: usize,
    pub dofs: usize,
    pub l2: f64,
    pub h1: f64,
    pub w1_inf: f64,
    pub dual_l1: f64,
    pub dual_linf: f64,
}

/// Primal errors against the constrained disk solution and dual errors of
/// the element multiplier against the exact multiplier at centroids.
pub fn error_row(spec: &ProblemSpec, report: &SolveReport) -> Result<ErrorRow, AnalyticError> {
    let mesh = spec.mesh();
    if mesh.domain != DomainTag::Disk {
        return Err(AnalyticError::UnsupportedProblem(format!("domain is {}", mesh.domain)));
    }
    let params = spec.params();
    if params.h != 4.0 || params.g != 0.0 {
        return Err(AnalyticError::UnsupportedProblem(format!(
            "h = {}, g = {}",
            params.h, params.g
        )));
    }
    if report.multiplier.len() != mesh.num_triangles() {
        return Err(FemError::LengthMismatch {
            what: "multiplier",
            expected: mesh.num_triangles(),
            found: report.multiplier.len(),
        }
        .into());
    }
    let space = spec.space();
    let primal = fem::error_vs_function(
        space,
        &report.u,
        |x| torsion_u(x[0].hypot(x[1])),
        torsion_grad,
    )?;
    let mut dual_l1 = 0.0;
    let mut dual_linf: f64 = 0.0;
    for (t, &lambda) in report.multiplier.values.iter().enumerate() {
        let c = mesh.centroid(t);
        let e = (lambda - torsion_lambda(c[0].hypot(c[1]))).abs();
        dual_l1 += space.areas()[t] * e;
        dual_linf = dual_linf.max(e);
    }
    Ok(ErrorRow {
        p: report.p,
        cells: mesh.num_triangles(),
        dofs: mesh.num_vertices(),
        l2: primal.l2,
        h1: primal.h1,
        w1_inf: primal.w1_inf,
        dual_l1,
        dual_linf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_solution_values() {
        assert_eq!(exact_disk_u([0.0, 0.0]).unwrap(), 0.75);
        assert_eq!(exact_disk_u([1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(exact_disk_u([0.5, 0.0]).unwrap(), 0.5);
        assert_eq!(0.75 - 0.5f64 * 0.5, 0.5);
        assert!(matches!(exact_disk_u([1.0, 0.1]), Err(AnalyticError::OutsideDisk(_))));
    }

    #[test]
    fn disk_multiplier_values() {
        assert_eq!(exact_disk_lambda([1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(exact_disk_lambda([0.25, 0.0]).unwrap(), 0.0);
        assert_eq!(exact_disk_lambda([0.75, 0.0]).unwrap(), 0.5);
        assert!(exact_disk_lambda([0.0, 1.5]).is_err());
    }

    #[test]
    fn quadratic_and_unconstrained() {
        assert_eq!(exact_disk_p2(4.0, [0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(exact_disk_p2(3.0, [0.6, 0.8]).unwrap(), 0.0);
        let g = exact_disk_p2_grad(4.0, [1.0, 0.0]).unwrap();
        assert_eq!(g[0].hypot(g[1]), 1.0);

        assert_eq!(exact_disk_unconstrained(1.0, [0.0, 0.0]).unwrap(), 0.25);
        assert_eq!(exact_disk_unconstrained(1.5, [0.0, -1.0]).unwrap(), 0.0);
        let g = exact_disk_unconstrained_grad(2.0, [0.0, 1.0]).unwrap();
        assert_eq!(g[0].hypot(g[1]), 1.0);
        assert_eq!(
            exact_disk_unconstrained(2.5, [0.0, 0.0]),
            Err(AnalyticError::ConstraintActive(2.5))
        );
    }

    #[test]
    fn sampled_lipschitz_and_complementarity() {
        // deterministic low-discrepancy sample of 10^4 points in the disk
        let golden = 0.5 * (1.0 + 5f64.sqrt());
        for k in 0..10_000 {
            let r = ((k as f64 + 0.5) / 10_000.0).sqrt();
            let theta = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
            let x = [r * theta.cos(), r * theta.sin()];
            let g = exact_disk_grad(x).unwrap();
            let slope = g[0].hypot(g[1]);
            assert!(slope <= 1.0 + 1e-15);
            let lambda = exact_disk_lambda(x).unwrap();
            assert!(lambda >= 0.0);
            assert!(lambda * (1.0 - slope) == 0.0 || (1.0 - slope).abs() < 1e-15);
            if slope < 1.0 - 1e-12 {
                assert_eq!(lambda, 0.0);
            }
        }
        // continuity across r = 1/2
        let eps = 1e-9;
        assert!((exact_disk_u([0.5 - eps, 0.0]).unwrap() - exact_disk_u([0.5 + eps, 0.0]).unwrap()).abs() < 3e-9);
    }
}
