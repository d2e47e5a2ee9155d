//! The penalized torsion-type energy
//!
//! ```text
//! J_p(u) = ∫ ½|∇u|² + (1/p) ∫ (ε² + |∇u|²)^{p/2} − ∫ h u,   u = g on ∂Ω,
//! ```
//!
//! its exact first variation with respect to the free nodal values, and the
//! multiplier `λ = (ε² + |∇u|²)^{(p−2)/2}` that approximates the Lagrange
//! multiplier of the constraint `|∇u| ≤ 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{self, ElementField, FemError, P1Space, ScalarField, Source};
use crate::mesh::Mesh;

/// Multiplier evaluation refuses `(p − 2) ln(sqrt(ε² + |∇u|²))` above this.
pub const MULTIPLIER_LOG_LIMIT: f64 = 600.0;
/// Energy evaluation refuses `p ln(sqrt(ε² + |∇u|²))` above this.
pub const PENALTY_LOG_LIMIT: f64 = 700.0;
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("penalty exponent p = {0} must be at least 2")]
    InvalidExponent(f64),
    #[error("regularization epsilon = {0} must be non-negative")]
    InvalidEpsilon(f64),
    #[error("{name} = {value} is not finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("vertex {vertex} has value {value}, boundary value is {expected}")]
    BoundaryMismatch {
        vertex: usize,
        value: f64,
        expected: f64,
    },
    #[error("gradient on triangle {triangle} overflows the p = {p} penalty (|grad u| = {grad_norm:e})")]
    Overflow {
        triangle: usize,
        p: f64,
        grad_norm: f64,
    },
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Kind of the gradient energy `W`. Only `W(s) = s / 2` is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    #[default]
    Quadratic,
}

/// Kind of the lower-order term `φ`. Only `φ(u) = −h u` is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    LinearSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Constant source density `h`.
    pub h: f64,
    /// Constant boundary value `g`.
    pub g: f64,
    pub p: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub energy: EnergyKind,
    #[serde(default)]
    pub source: SourceKind,
}

impl ProblemParams {
    pub fn torsion(h: f64, p: f64) -> Self {
        ProblemParams {
            h,
            g: 0.0,
            p,
            epsilon: 0.0,
            energy: EnergyKind::Quadratic,
            source: SourceKind::LinearSource,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        for (name, value) in [("h", self.h), ("g", self.g), ("p", self.p), ("epsilon", self.epsilon)] {
            if !value.is_finite() {
                return Err(ProblemError::NonFinite { name, value });
            }
        }
        if self.p < 2.0 {
            return Err(ProblemError::InvalidExponent(self.p));
        }
        if self.epsilon < 0.0 {
            return Err(ProblemError::InvalidEpsilon(self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    space: Arc<P1Space>,
    params: ProblemParams,
    load: Arc<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new(space: Arc<P1Space>, params: ProblemParams) -> Result<Self, ProblemError> {
        params.validate()?;
        let load = fem::assemble_load(&space, &Source::Constant(params.h))?;
        Ok(ProblemSpec {
            space,
            params,
            load: Arc::new(load),
        })
    }

    pub fn from_mesh(mesh: Mesh, params: ProblemParams) -> Result<Self, ProblemError> {
        let space = P1Space::new(Arc::new(mesh))?;
        Self::new(Arc::new(space), params)
    }

    /// Same mesh and data with a different exponent.
    pub fn with_p(&self, p: f64) -> Result<Self, ProblemError> {
        let params = ProblemParams { p, ..self.params };
        params.validate()?;
        Ok(ProblemSpec {
            space: Arc::clone(&self.space),
            params,
            load: Arc::clone(&self.load),
        })
    }

    pub fn space(&self) -> &P1Space {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<P1Space> {
        &self.space
    }

    pub fn mesh(&self) -> &Mesh {
        self.space.mesh()
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// The field equal to `g` everywhere; it satisfies the boundary condition
    /// and the gradient constraint.
    pub fn boundary_field(&self) -> ScalarField {
        ScalarField::constant(&self.space, self.params.g)
    }

    pub fn check_boundary(&self, u: &ScalarField) -> Result<(), ProblemError> {
        check_field(&self.space, u)?;
        let g = self.params.g;
        for (v, &value) in u.values.iter().enumerate() {
            if self.space.is_boundary(v) && (value - g).abs() > BOUNDARY_TOL {
                return Err(ProblemError::BoundaryMismatch {
                    vertex: v,
                    value,
                    expected: g,
                });
            }
        }
        Ok(())
    }

    /// `ε² + |∇u|²` on triangle `t`.
    #[inline]
    fn regularized_sq(&self, grad: [f64; 2]) -> f64 {
        self.params.epsilon * self.params.epsilon + grad[0] * grad[0] + grad[1] * grad[1]
    }

    fn multiplier_on(&self, t: usize, grad: [f64; 2]) -> Result<f64, ProblemError> {
        let p = self.params.p;
        let s = self.regularized_sq(grad);
        if (p - 2.0) * 0.5 * s.ln() > MULTIPLIER_LOG_LIMIT {
            return Err(ProblemError::Overflow {
                triangle: t,
                p,
                grad_norm: s.sqrt(),
            });
        }
        Ok(s.powf(0.5 * (p - 2.0)))
    }

    fn penalty_on(&self, t: usize, s: f64) -> Result<f64, ProblemError> {
        let p = self.params.p;
        if p * 0.5 * s.ln() > PENALTY_LOG_LIMIT {
            return Err(ProblemError::Overflow {
                triangle: t,
                p,
                grad_norm: s.sqrt(),
            });
        }
        Ok(s.powf(0.5 * p) / p)
    }
}

fn check_field(space: &P1Space, u: &ScalarField) -> Result<(), ProblemError> {
    if u.len() != space.num_vertices() {
        return Err(FemError::LengthMismatch {
            what: "scalar field",
            expected: space.num_vertices(),
            found: u.len(),
        }
        .into());
    }
    if let Some(i) = u.values.iter().position(|v| !v.is_finite()) {
        return Err(FemError::NonFinite(i).into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet_part: f64,
    pub penalty_part: f64,
    pub source_part: f64,
    pub total: f64,
}

pub fn energy(spec: &ProblemSpec, u: &ScalarField) -> Result<EnergyBreakdown, ProblemError> {
    spec.check_boundary(u)?;
    let space = spec.space();
    let mut dirichlet_part = 0.0;
    let mut penalty_part = 0.0;
    for (t, &area) in space.areas().iter().enumerate() {
        let g = space.gradient_on(t, &u.values);
        dirichlet_part += 0.5 * area * (g[0] * g[0] + g[1] * g[1]);
        penalty_part += area * spec.penalty_on(t, spec.regularized_sq(g))?;
    }
    let source_part = -spec.load().iter().zip(&u.values).map(|(b, u)| b * u).sum::<f64>();
    Ok(EnergyBreakdown {
        dirichlet_part,
        penalty_part,
        source_part,
        total: dirichlet_part + penalty_part + source_part,
    })
}

/// `J_p(u + α w) − J_p(u)` for a direction `w` vanishing on the boundary,
/// evaluated term by term so that small decrements do not drown in the
/// rounding error of two nearly equal energies.
pub fn energy_change(
    spec: &ProblemSpec,
    u: &ScalarField,
    w: &ScalarField,
    alpha: f64,
) -> Result<f64, ProblemError> {
    check_field(spec.space(), u)?;
    check_field(spec.space(), w)?;
    let space = spec.space();
    let p = spec.p();
    let mut change = 0.0;
    for (t, &area) in space.areas().iter().enumerate() {
        let gu = space.gradient_on(t, &u.values);
        let gw = space.gradient_on(t, &w.values);
        let cross = gu[0] * gw[0] + gu[1] * gw[1];
        let ww = gw[0] * gw[0] + gw[1] * gw[1];
        // |∇u + α∇w|² − |∇u|²
        let ds = alpha * (2.0 * cross + alpha * ww);
        let s0 = spec.regularized_sq(gu);
        let s1 = (s0 + ds).max(0.0);
        let penalty = if s0 > 0.0 {
            spec.penalty_on(t, s1.max(s0))?;
            s0.powf(0.5 * p) * (0.5 * p * (ds / s0).ln_1p()).exp_m1() / p
        } else {
            spec.penalty_on(t, s1)?
        };
        change += area * (0.5 * ds + penalty);
    }
    change -= alpha * spec.load().iter().zip(&w.values).map(|(b, w)| b * w).sum::<f64>();
    Ok(change)
}

/// Gradient of the energy with respect to the free nodal values; entries at
/// boundary vertices are zero.
pub fn residual(spec: &ProblemSpec, u: &ScalarField) -> Result<Vec<f64>, ProblemError> {
    spec.check_boundary(u)?;
    let space = spec.space();
    let mesh = space.mesh();
    let mut r: Vec<f64> = spec.load().iter().map(|b| -b).collect();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = space.gradient_on(t, &u.values);
        let weight = (1.0 + spec.multiplier_on(t, g)?) * space.areas()[t];
        let basis = space.basis_gradients(t);
        for a in 0..3 {
            r[tri[a]] += weight * (g[0] * basis[a][0] + g[1] * basis[a][1]);
        }
    }
    for (v, ri) in r.iter_mut().enumerate() {
        if space.is_boundary(v) {
            *ri = 0.0;
        }
    }
    Ok(r)
}

/// `λ_T = (ε² + |∇u_T|²)^{(p−2)/2}` per triangle.
pub fn multiplier_field(spec: &ProblemSpec, u: &ScalarField) -> Result<ElementField<f64>, ProblemError> {
    check_field(spec.space(), u)?;
    let space = spec.space();
    let values = (0..space.num_triangles())
        .map(|t| spec.multiplier_on(t, space.gradient_on(t, &u.values)))
        .collect::<Result<_, _>>()?;
    Ok(ElementField { values })
}

/// `A_T = λ_T ∇u_T` per triangle.
pub fn flux_field(spec: &ProblemSpec, u: &ScalarField) -> Result<ElementField<[f64; 2]>, ProblemError> {
    check_field(spec.space(), u)?;
    let space = spec.space();
    let values = (0..space.num_triangles())
        .map(|t| {
            let g = space.gradient_on(t, &u.values);
            spec.multiplier_on(t, g).map(|l| [l * g[0], l * g[1]])
        })
        .collect::<Result<_, _>>()?;
    Ok(ElementField { values })
}
