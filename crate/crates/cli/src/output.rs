//! Report files, error tables and VTK export.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use gradpen::analytic::ErrorRow;
use gradpen::diagnostics::{Complementarity, Feasibility};
use gradpen::domains::{DomainArgs, DomainRegistry};
use gradpen::mesh::Mesh;
use gradpen::problem::ProblemParams;
use gradpen::solver::{SolveReport, SolverConfig};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "p,cells,dofs,L2,H1,W1inf,dualL1,dualLinf";

/// How to rebuild the mesh a report refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    Generated {
        domain: String,
        width: f64,
        height: f64,
        refinements: u32,
    },
    File { path: PathBuf },
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSource::Generated {
                domain,
                width,
                height,
                refinements,
            } => Ok(DomainRegistry::builtin().generate(
                domain,
                &DomainArgs {
                    width: *width,
                    height: *height,
                },
                *refinements,
            )?),
            MeshSource::File { path } => {
                let file = std::fs::File::open(path).with_context(|| format!("opening mesh {}", path.display()))?;
                Ok(Mesh::read_text(std::io::BufReader::new(file))?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub feasibility: Feasibility,
    pub complementarity: Complementarity,
    pub errors: Option<ErrorRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub mesh: MeshSource,
    pub problem: ProblemParams,
    pub solver: SolverConfig,
    pub summary: Summary,
    pub report: SolveReport,
}

pub fn file_stem(p: f64) -> String {
    format!("p{p}")
}

pub fn error_table(discretization: &str, rows: &[ErrorRow]) -> String {
    let mut out = format!("# discretization: {discretization}\n{CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.p, r.cells, r.dofs, r.l2, r.h1, r.w1_inf, r.dual_l1, r.dual_linf
        )
        .unwrap();
    }
    out
}

pub fn discretization_note(refinements: u32) -> String {
    format!("P1 triangles on the unit disk, refinements={refinements}; dofs are vertex counts, not Q2 dofs")
}

/// Legacy ASCII unstructured grid with point data `u` and cell data
/// `grad_norm` and `lambda`.
pub fn vtk(mesh: &Mesh, title: &str, u: &[f64], grad_norm: &[f64], lambda: &[f64]) -> Result<String> {
    let (nv, nt) = (mesh.num_vertices(), mesh.num_triangles());
    if u.len() != nv {
        bail!("field u has {} values, mesh has {nv} vertices", u.len());
    }
    if grad_norm.len() != nt || lambda.len() != nt {
        bail!("cell fields have {}/{} values, mesh has {nt} triangles", grad_norm.len(), lambda.len());
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    writeln!(out, "{title}")?;
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {nv} double")?;
    for v in &mesh.vertices {
        writeln!(out, "{} {} 0", v[0], v[1])?;
    }
    writeln!(out, "CELLS {nt} {}", 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        out.push_str("5\n");
    }
    writeln!(out, "POINT_DATA {nv}")?;
    scalars(&mut out, "u", u);
    writeln!(out, "CELL_DATA {nt}")?;
    scalars(&mut out, "grad_norm", grad_norm);
    scalars(&mut out, "lambda", lambda);
    Ok(out)
}

fn scalars(out: &mut String, name: &str, values: &[f64]) {
    writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
}
