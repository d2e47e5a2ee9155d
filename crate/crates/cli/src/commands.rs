use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use gradpen::analytic::{error_row, AnalyticError, ErrorRow};
use gradpen::diagnostics;
use gradpen::domains::{DomainArgs, DomainRegistry};
use gradpen::fem::{P1Space, ScalarField};
use gradpen::mesh::Mesh;
use gradpen::problem::{ProblemParams, ProblemSpec};
use gradpen::solver::{p_continuation, p_continuation_from, ContinuationOutcome, SolveReport, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::output::{self, MeshSource, ReportFile, Summary};

/// Largest entry of the seeded starting perturbation.
const SEED_NOISE: f64 = 1e-2;

fn exit_for(outcome: &ContinuationOutcome) -> ExitCode {
    if let Some((p, e)) = &outcome.failure {
        eprintln!("stage p = {p} failed: {e}");
    }
    if outcome.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn log_stage(r: &SolveReport) {
    println!(
        "p={} iterations={} residual={:.3e} energy={:.12e} converged={}",
        r.p,
        r.outer_iterations,
        r.final_residual(),
        r.energy_history.last().copied().unwrap_or(f64::NAN),
        r.converged
    );
    eprintln!("p={} wall_time={:.3}s", r.p, r.wall_time.as_secs_f64());
}

fn optional_row(spec: &ProblemSpec, report: &SolveReport) -> Result<Option<ErrorRow>> {
    match error_row(&spec.with_p(report.p)?, report) {
        Ok(row) => Ok(Some(row)),
        Err(AnalyticError::UnsupportedProblem(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn grad_norms(space: &P1Space, u: &ScalarField) -> Vec<f64> {
    (0..space.num_triangles())
        .map(|t| {
            let g = space.gradient_on(t, &u.values);
            g[0].hypot(g[1])
        })
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn solve(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<ExitCode> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(dir) = out {
        config.output_dir = dir;
    }
    if seed.is_some() {
        config.seed = seed;
    }
    config.validate()?;

    let source = match &config.mesh_file {
        Some(path) => MeshSource::File {
            path: fs::canonicalize(path).with_context(|| format!("config key `mesh_file`: {}", path.display()))?,
        },
        None => MeshSource::Generated {
            domain: config.domain.clone(),
            width: config.width,
            height: config.height,
            refinements: config.refinements,
        },
    };
    let spec = ProblemSpec::from_mesh(source.build()?, config.problem())?;
    let solver = config.solver();
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("config key `output_dir`: cannot create {}", config.output_dir.display()))?;

    let mut initial = spec.boundary_field();
    if let Some(seed) = config.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (v, value) in initial.values.iter_mut().enumerate() {
            if !spec.space().is_boundary(v) {
                *value += rng.gen_range(0.0..SEED_NOISE);
            }
        }
    }
    let outcome = p_continuation_from(&spec, &solver, &initial)?;

    let mut rows = Vec::new();
    for report in &outcome.reports {
        log_stage(report);
        let stem = output::file_stem(report.p);
        let space = spec.space();
        let errors = optional_row(&spec, report)?;
        rows.extend(errors);
        if config.export_json {
            let file = ReportFile {
                mesh: source.clone(),
                problem: ProblemParams { p: report.p, ..*spec.params() },
                solver: solver.clone(),
                summary: Summary {
                    feasibility: diagnostics::feasibility(space, &report.u)?,
                    complementarity: diagnostics::complementarity(space, &report.u, &report.multiplier)?,
                    errors,
                },
                report: report.clone(),
            };
            let json = serde_json::to_string_pretty(&file)? + "\n";
            write(&config.output_dir.join(format!("report_{stem}.json")), &json)?;
        }
        if config.export_vtk {
            let text = output::vtk(
                spec.mesh(),
                &format!("gradpen p={}", report.p),
                &report.u.values,
                &grad_norms(space, &report.u),
                &report.multiplier.values,
            )?;
            write(&config.output_dir.join(format!("solution_{stem}.vtk")), &text)?;
        }
    }
    if config.export_csv && !rows.is_empty() {
        let table = output::error_table(&output::discretization_note(config.refinements), &rows);
        write(&config.output_dir.join("errors.csv"), &table)?;
    }
    Ok(exit_for(&outcome))
}

pub fn table1(refinements: u32, mut p_list: Vec<f64>, out: Option<PathBuf>) -> Result<ExitCode> {
    p_list.sort_by(f64::total_cmp);
    p_list.dedup();
    let cfg = SolverConfig {
        p_schedule: p_list,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let mesh = DomainRegistry::builtin().generate("disk", &DomainArgs::default(), refinements)?;
    let spec = ProblemSpec::from_mesh(mesh, ProblemParams::torsion(4.0, 2.0))?;
    let outcome = p_continuation(&spec, &cfg)?;
    let mut rows = Vec::new();
    for report in &outcome.reports {
        eprintln!("p={} wall_time={:.3}s", report.p, report.wall_time.as_secs_f64());
        rows.push(error_row(&spec.with_p(report.p)?, report)?);
    }
    let table = output::error_table(&output::discretization_note(refinements), &rows);
    print!("{table}");
    if let Some(dir) = out {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("table1.csv"), &table)?;
    }
    Ok(exit_for(&outcome))
}

pub fn export_vtk(report_path: &Path, out: Option<PathBuf>) -> Result<ExitCode> {
    let text = fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: ReportFile = serde_path_to_error::deserialize(de)
        .map_err(|e| {
            let field = e.path().to_string();
            anyhow::anyhow!("report field `{field}`: {}", e.into_inner())
        })?;
    let space = P1Space::new(std::sync::Arc::new(file.mesh.build()?))?;
    if file.report.u.len() != space.num_vertices() {
        bail!("report field `u` has {} values, mesh has {} vertices", file.report.u.len(), space.num_vertices());
    }
    let vtk = output::vtk(
        space.mesh(),
        &format!("gradpen p={}", file.report.p),
        &file.report.u.values,
        &grad_norms(&space, &file.report.u),
        &file.report.multiplier.values,
    )?;
    let target = out.unwrap_or_else(|| report_path.with_extension("vtk"));
    write(&target, &vtk)?;
    println!("wrote {}", target.display());
    Ok(ExitCode::SUCCESS)
}

pub fn mesh_info(
    domain: &str,
    refinements: u32,
    args: DomainArgs,
    mesh_file: Option<PathBuf>,
    write_to: Option<PathBuf>,
) -> Result<ExitCode> {
    let mesh = match mesh_file {
        Some(path) => MeshSource::File { path }.build()?,
        None => DomainRegistry::builtin().generate(domain, &args, refinements)?,
    };
    print_mesh(&mesh);
    if let Some(path) = write_to {
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        mesh.write_text(std::io::BufWriter::new(file))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn print_mesh(mesh: &Mesh) {
    println!(
        "cells={} dofs={} boundary_edges={} domain={}",
        mesh.num_triangles(),
        mesh.num_vertices(),
        mesh.num_boundary_edges(),
        mesh.domain
    );
    let report = mesh.validate();
    println!(
        "valid={} violations={} total_area={} min_area={:e} max_area={:e} min_angle_deg={}",
        report.is_valid(),
        report.violations.len(),
        report.total_area,
        report.min_area,
        report.max_area,
        report.min_angle_deg
    );
    for v in &report.violations {
        println!("violation: {v:?}");
    }
}
