//! Continuous piecewise-linear elements on triangles.
//!
//! Gradients of P1 functions are constant per triangle, so every integral
//! of a function of `∇u` alone (stiffness, penalty, multiplier) is evaluated
//! exactly as a per-element product with the area. Errors against smooth
//! reference functions use a degree-4 rule.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Point};

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("triangle {triangle} is degenerate or clockwise (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("{what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("negative weight {value} on triangle {triangle}")]
    NegativeWeight { triangle: usize, value: f64 },
}

/// Nodal values of a P1 function, one per mesh vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(space: &P1Space, values: Vec<f64>) -> Result<Self, FemError> {
        check_len("scalar field", space.num_vertices(), values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FemError::NonFinite(i));
        }
        Ok(ScalarField { values })
    }

    pub fn constant(space: &P1Space, value: f64) -> Self {
        ScalarField {
            values: vec![value; space.num_vertices()],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(space: &P1Space, f: impl Fn(Point) -> f64) -> Self {
        ScalarField {
            values: space.mesh().vertices.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn axpy(&mut self, alpha: f64, other: &ScalarField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// One value per triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementField<T> {
    pub values: Vec<T>,
}

impl<T> ElementField<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl ElementField<f64> {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl ElementField<[f64; 2]> {
    pub fn norms(&self) -> ElementField<f64> {
        ElementField {
            values: self.values.iter().map(|g| g[0].hypot(g[1])).collect(),
        }
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), FemError> {
    if expected == found {
        Ok(())
    } else {
        Err(FemError::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Mesh plus the per-element data every P1 computation needs: areas,
/// barycentric gradients and the CSR sparsity pattern of the stiffness matrix.
#[derive(Debug)]
pub struct P1Space {
    mesh: Arc<Mesh>,
    areas: Vec<f64>,
    basis_grads: Vec<[[f64; 2]; 3]>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// CSR slot of local entry `(a, b)` stored at `3 * a + b`.
    slots: Vec<[usize; 9]>,
}

impl P1Space {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self, FemError> {
        check_len("boundary flags", mesh.num_vertices(), mesh.boundary.len())?;
        let mut areas = Vec::with_capacity(mesh.num_triangles());
        let mut basis_grads = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangle_points(t);
            let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if !(area2 > 0.0) {
                return Err(FemError::DegenerateTriangle {
                    triangle: t,
                    area: 0.5 * area2,
                });
            }
            // ∇φ_i = rot90(opposite edge) / (2 area)
            let g = |p: Point, q: Point| [(p[1] - q[1]) / area2, (q[0] - p[0]) / area2];
            basis_grads.push([g(b, c), g(c, a), g(a, b)]);
            areas.push(0.5 * area2);
        }

        let n = mesh.num_vertices();
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        for tri in &mesh.triangles {
            for &i in tri {
                neighbours[i].extend_from_slice(tri);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut neighbours {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let slots = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut s = [0; 9];
                for a in 0..3 {
                    let range = row_ptr[tri[a]]..row_ptr[tri[a] + 1];
                    for b in 0..3 {
                        let k = col_idx[range.clone()].binary_search(&tri[b]).unwrap();
                        s[3 * a + b] = range.start + k;
                    }
                }
                s
            })
            .collect();

        Ok(P1Space {
            mesh,
            areas,
            basis_grads,
            row_ptr,
            col_idx,
            slots,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn num_triangles(&self) -> usize {
        self.mesh.num_triangles()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.basis_grads[t]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.mesh.boundary[v]
    }

    pub fn num_free(&self) -> usize {
        self.mesh.boundary.iter().filter(|&&b| !b).count()
    }

    /// Gradient of the P1 function with nodal values `u` on triangle `t`.
    #[inline]
    pub fn gradient_on(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let tri = &self.mesh.triangles[t];
        let g = &self.basis_grads[t];
        let (a, b, c) = (u[tri[0]], u[tri[1]], u[tri[2]]);
        [
            a * g[0][0] + b * g[1][0] + c * g[2][0],
            a * g[0][1] + b * g[1][1] + c * g[2][1],
        ]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub(crate) fn pattern(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.col_idx)
    }

    pub(crate) fn slots(&self, t: usize) -> &[usize; 9] {
        &self.slots[t]
    }
}

pub fn element_gradients(
    space: &P1Space,
    u: &ScalarField,
) -> Result<ElementField<[f64; 2]>, FemError> {
    check_len("scalar field", space.num_vertices(), u.len())?;
    Ok(ElementField {
        values: (0..space.num_triangles())
            .map(|t| space.gradient_on(t, &u.values))
            .collect(),
    })
}

/// `K_ij = Σ_T w_T ∫_T ∇φ_i·∇φ_j`.
pub fn assemble_weighted_stiffness(space: &P1Space, weight: &[f64]) -> Result<CsrMatrix, FemError> {
    check_len("weight", space.num_triangles(), weight.len())?;
    for (t, &w) in weight.iter().enumerate() {
        if !w.is_finite() {
            return Err(FemError::NonFinite(t));
        }
        if w < 0.0 {
            return Err(FemError::NegativeWeight {
                triangle: t,
                value: w,
            });
        }
    }
    let (row_ptr, col_idx) = space.pattern();
    let mut values = vec![0.0; col_idx.len()];
    for (t, &w) in weight.iter().enumerate() {
        let g = space.basis_gradients(t);
        let scale = w * space.areas[t];
        let slots = space.slots(t);
        for a in 0..3 {
            for b in 0..3 {
                values[slots[3 * a + b]] += scale * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    }
    Ok(CsrMatrix::from_parts(space.num_vertices(), row_ptr.to_vec(), col_idx.to_vec(), values)
        .expect("pattern built from the mesh"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Constant(f64),
    PerElement(Vec<f64>),
}

/// `b_i = Σ_T h_T area_T / 3` over triangles containing vertex `i`.
pub fn assemble_load(space: &P1Space, h: &Source) -> Result<Vec<f64>, FemError> {
    if let Source::PerElement(values) = h {
        check_len("source", space.num_triangles(), values.len())?;
    }
    let mut b = vec![0.0; space.num_vertices()];
    for (t, tri) in space.mesh().triangles.iter().enumerate() {
        let h_t = match h {
            Source::Constant(c) => *c,
            Source::PerElement(v) => v[t],
        };
        let share = h_t * space.areas[t] / 3.0;
        for &i in tri {
            b[i] += share;
        }
    }
    Ok(b)
}

/// Symmetric elimination of the flagged vertices: their rows and columns are
/// zeroed, the diagonal set to 1 and the right-hand side set to `value`,
/// with the eliminated column contributions moved to the free rows.
pub fn apply_dirichlet(
    k: &CsrMatrix,
    b: &[f64],
    boundary: &[bool],
    value: f64,
) -> Result<(CsrMatrix, Vec<f64>), FemError> {
    check_len("right-hand side", k.dim(), b.len())?;
    check_len("boundary flags", k.dim(), boundary.len())?;
    let mut out = k.clone();
    let mut rhs = b.to_vec();
    let row_ptr = k.row_ptr().to_vec();
    let col_idx = k.col_idx().to_vec();
    let values = out.values_mut();
    for i in 0..k.dim() {
        let range = row_ptr[i]..row_ptr[i + 1];
        if boundary[i] {
            for s in range {
                values[s] = if col_idx[s] == i { 1.0 } else { 0.0 };
            }
            rhs[i] = value;
        } else {
            for s in range {
                if boundary[col_idx[s]] {
                    rhs[i] -= values[s] * value;
                    values[s] = 0.0;
                }
            }
        }
    }
    Ok((out, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub w1_inf: f64,
}

/// `L²` norm (edge-midpoint rule, exact for P1 squared), `H¹` seminorm and
/// the largest element gradient.
pub fn norms(space: &P1Space, u: &ScalarField) -> Result<Norms, FemError> {
    check_len("scalar field", space.num_vertices(), u.len())?;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut w1_inf: f64 = 0.0;
    for (t, tri) in space.mesh().triangles.iter().enumerate() {
        let v = [u.values[tri[0]], u.values[tri[1]], u.values[tri[2]]];
        let mids = [0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0])];
        let area = space.areas[t];
        l2 += area / 3.0 * mids.iter().map(|m| m * m).sum::<f64>();
        let g = space.gradient_on(t, &u.values);
        let g2 = g[0] * g[0] + g[1] * g[1];
        h1 += area * g2;
        w1_inf = w1_inf.max(g2.sqrt());
    }
    Ok(Norms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        w1_inf,
    })
}

/// Six-point rule on the reference triangle, exact for degree 4:
/// barycentric coordinates and weights (weights sum to 1).
pub const QUAD6: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const B: f64 = 0.091_576_213_509_771;
    const WA: f64 = 0.223_381_589_678_011;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    /// Full `H¹` norm, `sqrt(l2² + h1_semi²)`.
    pub h1: f64,
    /// `max_T |∇u_T − ∇f(centroid_T)|`.
    pub w1_inf: f64,
}

/// Errors of `u` against a reference function and its gradient.
pub fn error_vs_function(
    space: &P1Space,
    u: &ScalarField,
    f_exact: impl Fn(Point) -> f64,
    grad_exact: impl Fn(Point) -> [f64; 2],
) -> Result<ErrorNorms, FemError> {
    check_len("scalar field", space.num_vertices(), u.len())?;
    let mesh = space.mesh();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut w1_inf: f64 = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let vals = [u.values[tri[0]], u.values[tri[1]], u.values[tri[2]]];
        let g = space.gradient_on(t, &u.values);
        let area = space.areas[t];
        let mut el2 = 0.0;
        let mut eh1 = 0.0;
        for (bary, w) in QUAD6 {
            let x = [
                bary[0] * pts[0][0] + bary[1] * pts[1][0] + bary[2] * pts[2][0],
                bary[0] * pts[0][1] + bary[1] * pts[1][1] + bary[2] * pts[2][1],
            ];
            let uh = bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2];
            let e = uh - f_exact(x);
            el2 += w * e * e;
            let ge = grad_exact(x);
            let (dx, dy) = (g[0] - ge[0], g[1] - ge[1]);
            eh1 += w * (dx * dx + dy * dy);
        }
        l2 += area * el2;
        h1 += area * eh1;
        let gc = grad_exact(mesh.centroid(t));
        w1_inf = w1_inf.max((g[0] - gc[0]).hypot(g[1] - gc[1]));
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        h1: (l2 + h1).sqrt(),
        w1_inf,
    })
}
