//! Run configuration: one flat JSON document.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gradpen::domains::DomainRegistry;
use gradpen::problem::{ProblemError, ProblemParams};
use gradpen::solver::{DirectionRegistry, SolverConfig, SolverError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Registered domain name; ignored when `mesh_file` is set.
    pub domain: String,
    pub width: f64,
    pub height: f64,
    pub refinements: u32,
    pub mesh_file: Option<PathBuf>,
    pub h: f64,
    pub g: f64,
    pub epsilon: f64,
    pub p_schedule: Vec<f64>,
    pub c1: f64,
    pub shrink: f64,
    pub eps_tol: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    pub cg_maxit: Option<usize>,
    pub alpha_init: f64,
    pub direction: String,
    pub output_dir: PathBuf,
    pub export_csv: bool,
    pub export_vtk: bool,
    pub export_json: bool,
    /// Seeds a random perturbation of the starting field.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            domain: "disk".into(),
            width: 2.0,
            height: 1.0,
            refinements: 4,
            mesh_file: None,
            h: 4.0,
            g: 0.0,
            epsilon: 0.0,
            p_schedule: solver.p_schedule,
            c1: solver.c1,
            shrink: solver.shrink,
            eps_tol: solver.eps_tol,
            max_outer: solver.max_outer,
            cg_tol: solver.cg_tol,
            cg_maxit: solver.cg_maxit,
            alpha_init: solver.alpha_init,
            direction: solver.direction,
            output_dir: PathBuf::from("out"),
            export_csv: true,
            export_vtk: true,
            export_json: true,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            anyhow::anyhow!("config key `{key}`: {}", e.into_inner())
        })?;
        Ok(config)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            c1: self.c1,
            shrink: self.shrink,
            eps_tol: self.eps_tol,
            max_outer: self.max_outer,
            cg_tol: self.cg_tol,
            cg_maxit: self.cg_maxit,
            alpha_init: self.alpha_init,
            p_schedule: self.p_schedule.clone(),
            direction: self.direction.clone(),
        }
    }

    /// Problem data at the first exponent of the schedule.
    pub fn problem(&self) -> ProblemParams {
        ProblemParams {
            g: self.g,
            epsilon: self.epsilon,
            ..ProblemParams::torsion(self.h, self.p_schedule.first().copied().unwrap_or(2.0))
        }
    }

    /// Checks every key; errors name the first offending one.
    pub fn validate(&self) -> Result<()> {
        if self.mesh_file.is_none() {
            if DomainRegistry::builtin().get(&self.domain).is_err() {
                let known: Vec<_> = DomainRegistry::builtin().names().collect();
                bail!("config key `domain`: unknown domain `{}` (known: {})", self.domain, known.join(", "));
            }
            for (key, value) in [("width", self.width), ("height", self.height)] {
                if !(value > 0.0 && value.is_finite()) {
                    bail!("config key `{key}`: must be positive, got {value}");
                }
            }
        }
        match self.solver().validate() {
            Ok(()) => {}
            Err(SolverError::InvalidConfig { key, reason }) => bail!("config key `{key}`: {reason}"),
            Err(e) => bail!("config: {e}"),
        }
        if DirectionRegistry::builtin().get(&self.direction).is_err() {
            let known: Vec<_> = DirectionRegistry::builtin().names().collect();
            bail!("config key `direction`: unknown direction `{}` (known: {})", self.direction, known.join(", "));
        }
        match self.problem().validate() {
            Ok(()) => {}
            Err(ProblemError::NonFinite { name, value }) => bail!("config key `{name}`: {value} is not finite"),
            Err(ProblemError::InvalidEpsilon(v)) => bail!("config key `epsilon`: must be non-negative, got {v}"),
            Err(ProblemError::InvalidExponent(p)) => bail!("config key `p_schedule`: exponent {p} is below 2"),
            Err(e) => bail!("config: {e}"),
        }
        Ok(())
    }
}
