//! Element-wise checks of the limit behaviour as `p` grows: feasibility,
//! complementarity, flux pairings and the alignment of the flux with the
//! gradient of a feasible reference.

use serde::{Deserialize, Serialize};

use crate::fem::{ElementField, FemError, P1Space, ScalarField};
use crate::problem::{ProblemError, ProblemSpec};

/// Slopes within this of 1 are not counted as excess.
pub const SLOPE_TOL: f64 = 1e-12;

fn check(space: &P1Space, u: &ScalarField, per_element: usize) -> Result<(), FemError> {
    if u.len() != space.num_vertices() {
        return Err(FemError::LengthMismatch {
            what: "scalar field",
            expected: space.num_vertices(),
            found: u.len(),
        });
    }
    if per_element != space.num_triangles() {
        return Err(FemError::LengthMismatch {
            what: "element field",
            expected: space.num_triangles(),
            found: per_element,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub max_grad: f64,
    /// Area of the triangles with `|∇u| > 1 + SLOPE_TOL`.
    pub excess_area: f64,
}

pub fn feasibility(space: &P1Space, u: &ScalarField) -> Result<Feasibility, FemError> {
    check(space, u, space.num_triangles())?;
    let mut max_grad: f64 = 0.0;
    let mut excess_area = 0.0;
    for (t, &area) in space.areas().iter().enumerate() {
        let g = space.gradient_on(t, &u.values);
        let norm = g[0].hypot(g[1]);
        max_grad = max_grad.max(norm);
        if norm > 1.0 + SLOPE_TOL {
            excess_area += area;
        }
    }
    Ok(Feasibility {
        max_grad,
        excess_area,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complementarity {
    /// `Σ_T area_T λ_T (1 − |∇u_T|)₊`.
    pub l1_residual: f64,
    /// `max_T λ_T (1 − |∇u_T|)₊`.
    pub sup_residual: f64,
}

pub fn complementarity(
    space: &P1Space,
    u: &ScalarField,
    lambda: &ElementField<f64>,
) -> Result<Complementarity, FemError> {
    check(space, u, lambda.len())?;
    let mut l1_residual = 0.0;
    let mut sup_residual: f64 = 0.0;
    for (t, &area) in space.areas().iter().enumerate() {
        let g = space.gradient_on(t, &u.values);
        let gap = (1.0 - g[0].hypot(g[1])).max(0.0);
        let value = lambda.values[t] * gap;
        l1_residual += area * value;
        sup_residual = sup_residual.max(value);
    }
    Ok(Complementarity {
        l1_residual,
        sup_residual,
    })
}

/// `∫ λ_p ∇u_p·∇v` for each test field `v`. Test fields are expected to
/// vanish on the boundary.
pub fn flux_pairing(
    spec: &ProblemSpec,
    u: &ScalarField,
    test_fields: &[ScalarField],
) -> Result<Vec<f64>, ProblemError> {
    let flux = crate::problem::flux_field(spec, u)?;
    let space = spec.space();
    test_fields
        .iter()
        .map(|v| {
            check(space, v, flux.len())?;
            Ok(space
                .areas()
                .iter()
                .zip(&flux.values)
                .enumerate()
                .map(|(t, (&area, a))| {
                    let g = space.gradient_on(t, &v.values);
                    area * (a[0] * g[0] + a[1] * g[1])
                })
                .sum())
        })
        .collect()
}

/// `Σ_T area_T (|A_T| − A_T·∇u_ref)₊`. Vanishes when the flux is parallel
/// to the gradient of a reference with unit slope wherever `A` is nonzero.
pub fn representation_defect(
    space: &P1Space,
    u_ref: &ScalarField,
    flux: &ElementField<[f64; 2]>,
) -> Result<f64, FemError> {
    check(space, u_ref, flux.len())?;
    Ok(space
        .areas()
        .iter()
        .zip(&flux.values)
        .enumerate()
        .map(|(t, (&area, a))| {
            let g = space.gradient_on(t, &u_ref.values);
            area * (a[0].hypot(a[1]) - (a[0] * g[0] + a[1] * g[1])).max(0.0)
        })
        .sum())
}

/// Auxiliary field `|∇u|²/2 + 2 ((p − 1)/p) |∇u|^p + α φ(u)` with
/// `φ(u) = −h u` evaluated at the centroid. Reported for inspection only.
pub fn psi_field(spec: &ProblemSpec, u: &ScalarField, alpha: f64) -> Result<ElementField<f64>, FemError> {
    let space = spec.space();
    check(space, u, space.num_triangles())?;
    let p = spec.p();
    let h = spec.params().h;
    let mesh = space.mesh();
    let values = mesh
        .triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let g = space.gradient_on(t, &u.values);
            let s = g[0] * g[0] + g[1] * g[1];
            let centroid_value = (u.values[tri[0]] + u.values[tri[1]] + u.values[tri[2]]) / 3.0;
            0.5 * s + 2.0 * (p - 1.0) / p * s.powf(0.5 * p) + alpha * (-h * centroid_value)
        })
        .collect();
    Ok(ElementField { values })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::generate_rectangle;
    use crate::problem::ProblemParams;

    /// Unit square with no Dirichlet vertices, so planes are admissible.
    fn free_square(p: f64, h: f64) -> ProblemSpec {
        let mut mesh = generate_rectangle(1.0, 1.0, 2).unwrap();
        mesh.boundary.iter_mut().for_each(|b| *b = false);
        let space = P1Space::new(Arc::new(mesh)).unwrap();
        ProblemSpec::new(Arc::new(space), ProblemParams::torsion(h, p)).unwrap()
    }

    #[test]
    fn feasibility_cases() {
        let spec = free_square(10.0, 0.0);
        let s = spec.space();
        let zero = feasibility(s, &ScalarField::constant(s, 0.0)).unwrap();
        assert_eq!((zero.max_grad, zero.excess_area), (0.0, 0.0));
        let unit = feasibility(s, &ScalarField::interpolate(s, |p| p[0])).unwrap();
        assert!((unit.max_grad - 1.0).abs() < 1e-14);
        assert_eq!(unit.excess_area, 0.0);
        let steep = feasibility(s, &ScalarField::interpolate(s, |p| 1.2 * p[1])).unwrap();
        assert!((steep.max_grad - 1.2).abs() < 1e-14);
        assert!((steep.excess_area - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complementarity_cases() {
        let spec = free_square(10.0, 0.0);
        let s = spec.space();
        let half = ScalarField::interpolate(s, |p| 0.5 * p[0]);
        let n = s.num_triangles();
        let c = complementarity(s, &half, &ElementField { values: vec![0.0; n] }).unwrap();
        assert_eq!((c.l1_residual, c.sup_residual), (0.0, 0.0));
        let c = complementarity(s, &half, &ElementField { values: vec![1.0; n] }).unwrap();
        assert!((c.l1_residual - 0.5).abs() < 1e-14);
        assert!((c.sup_residual - 0.5).abs() < 1e-14);
    }

    #[test]
    fn flux_pairing_cases() {
        let spec = ProblemSpec::from_mesh(
            generate_rectangle(1.0, 1.0, 3).unwrap(),
            ProblemParams::torsion(4.0, 10.0),
        )
        .unwrap();
        let s = spec.space();
        let bubble = ScalarField::interpolate(s, |p| 4.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]));
        let zero = spec.boundary_field();
        assert_eq!(flux_pairing(&spec, &zero, std::slice::from_ref(&bubble)).unwrap(), vec![0.0]);
        let self_pair = flux_pairing(&spec, &bubble, std::slice::from_ref(&bubble)).unwrap()[0];
        let lambda = crate::problem::multiplier_field(&spec, &bubble).unwrap();
        let expected: f64 = (0..s.num_triangles())
            .map(|t| {
                let g = s.gradient_on(t, &bubble.values);
                s.areas()[t] * lambda.values[t] * (g[0] * g[0] + g[1] * g[1])
            })
            .sum();
        assert!(self_pair >= 0.0);
        assert!((self_pair - expected).abs() < 1e-15);
    }

    #[test]
    fn representation_defect_cases() {
        let spec = free_square(10.0, 0.0);
        let s = spec.space();
        let n = s.num_triangles();
        let u = ScalarField::interpolate(s, |p| p[0]);
        let zero = ElementField { values: vec![[0.0, 0.0]; n] };
        assert_eq!(representation_defect(s, &u, &zero).unwrap(), 0.0);
        let aligned = ElementField { values: vec![[1.0, 0.0]; n] };
        assert!(representation_defect(s, &u, &aligned).unwrap().abs() < 1e-14);
        let orthogonal = ElementField { values: vec![[0.0, 1.0]; n] };
        assert!((representation_defect(s, &u, &orthogonal).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psi_cases() {
        let spec = free_square(10.0, 4.0);
        let s = spec.space();
        let zero = ScalarField::constant(s, 0.0);
        assert!(psi_field(&spec, &zero, 3.0).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(psi_field(&spec, &zero, 0.0).unwrap().values.iter().all(|&v| v == 0.0));
        let spec = free_square(10.0, 0.0);
        let unit = ScalarField::interpolate(spec.space(), |p| p[1]);
        for v in psi_field(&spec, &unit, 2.0).unwrap().values {
            assert!((v - 2.3).abs() < 1e-13);
        }
    }
}
