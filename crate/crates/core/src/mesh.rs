//! Conforming triangular meshes: uniform red refinement, validation and a
//! plain-text on-disk format.
//!
//! Triangles are stored counter-clockwise. Boundary information is carried
//! twice, as per-vertex flags and as an explicit edge list, and `validate`
//! checks that the two agree with the edge topology.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = [f64; 2];

/// Tolerance used when checking that disk boundary vertices sit on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("non-positive rectangle dimensions {width} x {height}")]
    InvalidDimensions { width: f64, height: f64 },
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex index {index} out of range ({vertices} vertices)")]
    IndexOutOfRange { index: usize, vertices: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Disk,
    Rectangle,
    Lshape,
    Custom,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Disk => "disk",
            DomainTag::Rectangle => "rectangle",
            DomainTag::Lshape => "lshape",
            DomainTag::Custom => "custom",
        }
    }

    /// The built-in domains are all simply connected.
    pub fn is_simply_connected(self) -> bool {
        !matches!(self, DomainTag::Custom)
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainTag {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disk" => Ok(DomainTag::Disk),
            "rectangle" => Ok(DomainTag::Rectangle),
            "lshape" => Ok(DomainTag::Lshape),
            "custom" => Ok(DomainTag::Custom),
            other => Err(MeshError::UnknownDomain(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub boundary_edges: Vec<[usize; 2]>,
    pub domain: DomainTag,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Twice the signed area of the triangle `(a, b, c)`.
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.boundary_edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * signed_area2(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique undirected edges, in order of first appearance.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = edge_key(tri[k], tri[(k + 1) % 3]);
                if seen.insert((a, b)) {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    /// Uniform red refinement: every triangle is split into four through its
    /// edge midpoints. Midpoints of boundary edges become boundary vertices
    /// and, on the disk, are pushed radially onto the unit circle.
    pub fn refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let boundary_set: HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|&[a, b]| edge_key(a, b))
            .collect();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();

        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>, boundary: &mut Vec<bool>| {
            let key = edge_key(a, b);
            if let Some(&m) = midpoints.get(&key) {
                return m;
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            let mut pm = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let on_boundary = boundary_set.contains(&key);
            if on_boundary && self.domain == DomainTag::Disk {
                let r = pm[0].hypot(pm[1]);
                pm = [pm[0] / r, pm[1] / r];
            }
            let m = vertices.len();
            vertices.push(pm);
            boundary.push(on_boundary);
            midpoints.insert(key, m);
            m
        };

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices, &mut boundary);
            let bc = midpoint(b, c, &mut vertices, &mut boundary);
            let ca = midpoint(c, a, &mut vertices, &mut boundary);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }

        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for &[a, b] in &self.boundary_edges {
            let m = midpoints[&edge_key(a, b)];
            boundary_edges.push([a, m]);
            boundary_edges.push([m, b]);
        }

        Mesh {
            vertices,
            triangles,
            boundary,
            boundary_edges,
            domain: self.domain,
        }
    }

    pub fn refined(&self, levels: u32) -> Mesh {
        let mut mesh = self.clone();
        for _ in 0..levels {
            mesh = mesh.refine();
        }
        mesh
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let nv = self.num_vertices();

        if self.boundary.len() != nv {
            violations.push(Violation::FlagCountMismatch {
                flags: self.boundary.len(),
                vertices: nv,
            });
        }
        for tri in &self.triangles {
            for &v in tri {
                if v >= nv {
                    violations.push(Violation::IndexOutOfRange { index: v });
                }
            }
        }
        for e in &self.boundary_edges {
            for &v in e {
                if v >= nv {
                    violations.push(Violation::IndexOutOfRange { index: v });
                }
            }
        }
        if !violations.is_empty() {
            return ValidationReport::with_violations(violations);
        }

        let mut min_area = f64::INFINITY;
        let mut max_area = f64::NEG_INFINITY;
        let mut min_angle = f64::INFINITY;
        let mut total_area = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            total_area += area;
            min_area = min_area.min(area);
            max_area = max_area.max(area);
            if area <= 0.0 {
                violations.push(Violation::NonPositiveArea { triangle: t, area });
            }
            for k in 0..3 {
                let o = self.vertices[tri[k]];
                let p = self.vertices[tri[(k + 1) % 3]];
                let q = self.vertices[tri[(k + 2) % 3]];
                let u = [p[0] - o[0], p[1] - o[1]];
                let v = [q[0] - o[0], q[1] - o[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min_angle = min_angle.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *edge_count.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let listed: HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|&[a, b]| edge_key(a, b))
            .collect();
        let mut keys: Vec<_> = edge_count.iter().map(|(&k, &c)| (k, c)).collect();
        keys.sort_unstable();
        for ((a, b), count) in keys {
            if count > 2 {
                violations.push(Violation::EdgeOverShared { edge: [a, b], count });
            } else if (count == 1) != listed.contains(&(a, b)) {
                violations.push(Violation::BoundaryEdgeMismatch { edge: [a, b] });
            }
        }
        for &[a, b] in &self.boundary_edges {
            if !edge_count.contains_key(&edge_key(a, b)) {
                violations.push(Violation::BoundaryEdgeMismatch { edge: [a, b] });
            }
            for v in [a, b] {
                if !self.boundary[v] {
                    violations.push(Violation::UnflaggedBoundaryVertex { vertex: v });
                }
            }
        }

        if self.domain.is_simply_connected() {
            let euler =
                nv as i64 - edge_count.len() as i64 + self.num_triangles() as i64;
            if euler != 1 {
                violations.push(Violation::EulerCharacteristic { value: euler });
            }
        }
        if self.domain == DomainTag::Disk {
            for (v, p) in self.vertices.iter().enumerate() {
                if self.boundary[v] {
                    let radius = p[0].hypot(p[1]);
                    if (radius - 1.0).abs() > CIRCLE_TOL {
                        violations.push(Violation::OffCircle { vertex: v, radius });
                    }
                }
            }
        }

        ValidationReport {
            violations,
            min_area,
            max_area,
            min_angle_deg: min_angle,
            total_area,
        }
    }

    /// Writes the mesh as a header `V T B` followed by `x y flag`, `i j k`
    /// and `i j` lines (0-based indices).
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} {} {}",
            self.num_vertices(),
            self.num_triangles(),
            self.num_boundary_edges()
        )?;
        for (p, &flag) in self.vertices.iter().zip(&self.boundary) {
            writeln!(out, "{:e} {:e} {}", p[0], p[1], u8::from(flag))?;
        }
        for [i, j, k] in &self.triangles {
            writeln!(out, "{i} {j} {k}")?;
        }
        for [i, j] in &self.boundary_edges {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    /// Reads the text format. Meshes loaded from disk carry the `custom` tag.
    pub fn read_text<R: BufRead>(input: R) -> Result<Mesh, MeshError> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));

        fn fields<const N: usize, T: FromStr>(
            line: usize,
            text: &str,
        ) -> Result<[T; N], MeshError> {
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != N {
                return Err(MeshError::Parse {
                    line,
                    message: format!("expected {N} fields, found {}", parts.len()),
                });
            }
            let mut out = Vec::with_capacity(N);
            for part in parts {
                out.push(part.parse::<T>().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("cannot parse `{part}`"),
                })?);
            }
            out.try_into().map_err(|_| MeshError::Parse {
                line,
                message: "field count".into(),
            })
        }

        let mut next = |what: &str| -> Result<(usize, String), MeshError> {
            match lines.next() {
                Some((n, Ok(text))) => Ok((n, text)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(MeshError::Parse {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };

        let (n, header) = next("header")?;
        let [nv, nt, nb]: [usize; 3] = fields(n, &header)?;

        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, text) = next("vertex")?;
            let [x, y, flag]: [f64; 3] = fields(n, &text)?;
            if !x.is_finite() || !y.is_finite() || (flag != 0.0 && flag != 1.0) {
                return Err(MeshError::Parse {
                    line: n,
                    message: "invalid vertex record".into(),
                });
            }
            vertices.push([x, y]);
            boundary.push(flag == 1.0);
        }
        let check = |index: usize| {
            if index >= nv {
                Err(MeshError::IndexOutOfRange { index, vertices: nv })
            } else {
                Ok(index)
            }
        };
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (n, text) = next("triangle")?;
            let [i, j, k]: [usize; 3] = fields(n, &text)?;
            triangles.push([check(i)?, check(j)?, check(k)?]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (n, text) = next("boundary edge")?;
            let [i, j]: [usize; 2] = fields(n, &text)?;
            boundary_edges.push([check(i)?, check(j)?]);
        }

        Ok(Mesh {
            vertices,
            triangles,
            boundary,
            boundary_edges,
            domain: DomainTag::Custom,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    FlagCountMismatch { flags: usize, vertices: usize },
    IndexOutOfRange { index: usize },
    NonPositiveArea { triangle: usize, area: f64 },
    EdgeOverShared { edge: [usize; 2], count: usize },
    BoundaryEdgeMismatch { edge: [usize; 2] },
    UnflaggedBoundaryVertex { vertex: usize },
    EulerCharacteristic { value: i64 },
    OffCircle { vertex: usize, radius: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FlagCountMismatch { flags, vertices } => {
                write!(f, "{flags} boundary flags for {vertices} vertices")
            }
            Violation::IndexOutOfRange { index } => write!(f, "vertex index {index} out of range"),
            Violation::NonPositiveArea { triangle, area } => {
                write!(f, "triangle {triangle} has signed area {area:e}")
            }
            Violation::EdgeOverShared { edge, count } => {
                write!(f, "edge {edge:?} shared by {count} triangles")
            }
            Violation::BoundaryEdgeMismatch { edge } => {
                write!(f, "edge {edge:?} disagrees with the boundary edge list")
            }
            Violation::UnflaggedBoundaryVertex { vertex } => {
                write!(f, "vertex {vertex} lies on a boundary edge but is not flagged")
            }
            Violation::EulerCharacteristic { value } => {
                write!(f, "V - E + T = {value}, expected 1")
            }
            Violation::OffCircle { vertex, radius } => {
                write!(f, "boundary vertex {vertex} at radius {radius}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub min_area: f64,
    pub max_area: f64,
    pub min_angle_deg: f64,
    pub total_area: f64,
}

impl ValidationReport {
    fn with_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            violations,
            min_area: f64::NAN,
            max_area: f64::NAN,
            min_angle_deg: f64::NAN,
            total_area: f64::NAN,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "violations={} min_area={:e} max_area={:e} min_angle={:.4}deg area={:.12}",
            self.violations.len(),
            self.min_area,
            self.max_area,
            self.min_angle_deg,
            self.total_area
        )?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Structured mesh of `[0, width] x [0, height]`, two triangles split along
/// the diagonal through the origin, then refined uniformly.
pub fn generate_rectangle(width: f64, height: f64, refinements: u32) -> Result<Mesh, MeshError> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(MeshError::InvalidDimensions { width, height });
    }
    let coarse = Mesh {
        vertices: vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]],
        triangles: vec![[0, 1, 2], [0, 2, 3]],
        boundary: vec![true; 4],
        boundary_edges: vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        domain: DomainTag::Rectangle,
    };
    Ok(coarse.refined(refinements))
}

/// Unit disk: a six-triangle fan over the regular hexagon, refined with
/// boundary midpoints snapped to the circle.
pub fn generate_disk(refinements: u32) -> Mesh {
    let mut vertices = vec![[0.0, 0.0]];
    for k in 0..6 {
        let theta = std::f64::consts::FRAC_PI_3 * k as f64;
        vertices.push([theta.cos(), theta.sin()]);
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    let boundary_edges = (0..6).map(|k| [1 + k, 1 + (k + 1) % 6]).collect();
    let mut boundary = vec![true; 7];
    boundary[0] = false;
    Mesh {
        vertices,
        triangles,
        boundary,
        boundary_edges,
        domain: DomainTag::Disk,
    }
    .refined(refinements)
}

/// `[-1, 1]^2` minus the open fourth-quadrant square, with the reentrant
/// corner at the origin. The coarse diagonals all pass through the corner,
/// which keeps the mesh symmetric about the line `y = -x`.
pub fn generate_lshape(refinements: u32) -> Mesh {
    let vertices = vec![
        [-1.0, -1.0], // 0
        [0.0, -1.0],  // 1
        [-1.0, 0.0],  // 2
        [0.0, 0.0],   // 3
        [1.0, 0.0],   // 4
        [-1.0, 1.0],  // 5
        [0.0, 1.0],   // 6
        [1.0, 1.0],   // 7
    ];
    let triangles = vec![
        [0, 1, 3],
        [0, 3, 2],
        [2, 3, 6],
        [2, 6, 5],
        [3, 4, 7],
        [3, 7, 6],
    ];
    let boundary_edges = vec![
        [0, 1],
        [1, 3],
        [3, 4],
        [4, 7],
        [7, 6],
        [6, 5],
        [5, 2],
        [2, 0],
    ];
    Mesh {
        vertices,
        triangles,
        boundary: vec![true; 8],
        boundary_edges,
        domain: DomainTag::Lshape,
    }
    .refined(refinements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(mesh: &Mesh) -> i64 {
        mesh.num_vertices() as i64 - mesh.edges().len() as i64 + mesh.num_triangles() as i64
    }

    #[test]
    fn square_level_zero() {
        let m = generate_rectangle(1.0, 1.0, 0).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices(), m.edges().len()), (2, 4, 5));
        assert_eq!(euler(&m), 1);
        let report = m.validate();
        assert!(report.is_valid(), "{report}");
        assert!((report.min_angle_deg - 45.0).abs() < 1e-12);
    }

    #[test]
    fn square_level_one() {
        let m = generate_rectangle(1.0, 1.0, 1).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices()), (8, 9));
        assert_eq!(m.boundary.iter().filter(|&&b| b).count(), 8);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn coarse_rectangle_is_all_boundary() {
        let m = generate_rectangle(2.0, 1.0, 0).unwrap();
        assert!(m.boundary.iter().all(|&b| b));
    }

    #[test]
    fn rectangle_rejects_bad_dimensions() {
        assert!(generate_rectangle(0.0, 1.0, 0).is_err());
        assert!(generate_rectangle(1.0, -2.0, 1).is_err());
        assert!(generate_rectangle(f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn disk_counts_and_circle() {
        let m0 = generate_disk(0);
        assert_eq!((m0.num_triangles(), m0.num_vertices()), (6, 7));
        let m1 = generate_disk(1);
        assert_eq!(m1.num_triangles(), 24);
        let on_circle: Vec<_> = (0..m1.num_vertices()).filter(|&v| m1.boundary[v]).collect();
        assert_eq!(on_circle.len(), 12);
        for v in on_circle {
            let p = m1.vertices[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() <= CIRCLE_TOL);
        }
        for k in 0..5 {
            let m = generate_disk(k);
            assert_eq!(m.num_triangles(), 6 * 4usize.pow(k));
            let report = m.validate();
            assert!(report.is_valid(), "level {k}: {report}");
        }
    }

    #[test]
    fn disk_area_increases_toward_pi() {
        let mut prev = 0.0;
        for k in 0..7 {
            let area = generate_disk(k).total_area();
            assert!(area > prev && area < std::f64::consts::PI);
            // inscribed polygon deficit is (2 pi^3 / 3) n^-2 for n = 6 * 2^k sides
            assert!(std::f64::consts::PI - area <= 1.1 * 4f64.powi(-(k as i32)));
            prev = area;
        }
    }

    #[test]
    fn polygonal_refinement_preserves_area() {
        let mut m = generate_lshape(0);
        let mut r = generate_rectangle(2.0, 3.0, 0).unwrap();
        for _ in 0..4 {
            m = m.refine();
            r = r.refine();
            assert!((m.total_area() - 3.0).abs() < 1e-12);
            assert!((r.total_area() - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lshape_coarse() {
        let m = generate_lshape(0);
        assert_eq!(m.num_triangles(), 6);
        assert_eq!(euler(&m), 1);
        for k in 0..4 {
            let m = generate_lshape(k);
            let origin = m.vertices.iter().position(|p| p == &[0.0, 0.0]).unwrap();
            assert!(m.boundary[origin]);
            assert!(m.validate().is_valid());
        }
    }

    #[test]
    fn refine_twice_matches_generator() {
        let twice = generate_disk(1).refine().refine();
        let direct = generate_disk(3);
        let sorted = |m: &Mesh| {
            let mut v = m.vertices.clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        assert_eq!(sorted(&twice), sorted(&direct));
    }

    #[test]
    fn refine_disk_snaps_all_boundary_vertices() {
        let m = generate_disk(0).refine();
        let boundary: Vec<_> = (0..m.num_vertices()).filter(|&v| m.boundary[v]).collect();
        assert_eq!(boundary.len(), 12);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn clockwise_triangle_is_reported() {
        let mut m = generate_rectangle(1.0, 1.0, 1).unwrap();
        m.triangles[3].swap(1, 2);
        let report = m.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::NonPositiveArea { triangle: 3, .. }));
    }

    #[test]
    fn missing_boundary_flag_is_reported() {
        let mut m = generate_disk(1);
        let v = m.boundary_edges[0][0];
        m.boundary[v] = false;
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|x| matches!(x, Violation::UnflaggedBoundaryVertex { vertex } if *vertex == v)));
    }

    #[test]
    fn text_round_trip() {
        let m = generate_lshape(2);
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary, m.boundary);
        assert_eq!(back.boundary_edges, m.boundary_edges);
        assert_eq!(back.domain, DomainTag::Custom);
        assert!(back.validate().is_valid());
    }

    #[test]
    fn text_parse_errors() {
        assert!(Mesh::read_text("3 1 0\n0 0 1\n1 0 1\n".as_bytes()).is_err());
        assert!(matches!(
            Mesh::read_text("3 1 0\n0 0 1\n1 0 1\n0 1 1\n0 1 7\n".as_bytes()),
            Err(MeshError::IndexOutOfRange { index: 7, .. })
        ));
        assert!(Mesh::read_text("1 0 0\n0 0 2\n".as_bytes()).is_err());
    }
}
