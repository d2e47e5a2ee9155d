//! Preconditioned descent for the penalized energy.
//!
//! Each outer step computes the multiplier `λ_n` of the current iterate,
//! converts the residual into a direction by solving in the `(1 + λ_n)`
//! weighted `H¹` metric, and takes an Armijo step on the full penalized
//! energy. Large exponents are reached by continuation in `p`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{self, ElementField, ScalarField};
use crate::linalg::{self, LinalgError, DEFAULT_CG_TOL};
use crate::problem::{self, ProblemError, ProblemSpec};

/// Upper bound on backtracking steps in one line search.
pub const MAX_SHRINKS: u32 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver setting `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("unknown descent direction `{0}`")]
    UnknownDirection(String),
    #[error("direction is not a descent direction (slope {slope:e})")]
    NotDescent { slope: f64 },
    #[error("no sufficient decrease after {shrinks} step reductions (last step {alpha:e})")]
    LineSearchFailed { shrinks: u32, alpha: f64 },
    #[error("inner CG stopped after {iterations} iterations at relative residual {relative_residual:e}")]
    CgNotConverged {
        iterations: usize,
        relative_residual: f64,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<fem::FemError> for SolverError {
    fn from(e: fem::FemError) -> Self {
        SolverError::Problem(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Backtracking factor.
    pub shrink: f64,
    /// Stopping tolerance on the scaled residual norm.
    pub eps_tol: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub cg_maxit: Option<usize>,
    pub alpha_init: f64,
    pub p_schedule: Vec<f64>,
    /// Name of the registered descent direction.
    pub direction: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c1: 1e-4,
            shrink: 0.5,
            eps_tol: 1e-8,
            max_outer: 20_000,
            cg_tol: DEFAULT_CG_TOL,
            cg_maxit: None,
            alpha_init: 1.0,
            p_schedule: vec![2.0, 10.0, 50.0, 100.0, 300.0, 500.0],
            direction: PrimalDual.name().to_string(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |key: &'static str, reason: &str| {
            Err(SolverError::InvalidConfig {
                key,
                reason: reason.to_string(),
            })
        };
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            return bad("c1", "must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", "must lie in (0, 1)");
        }
        if !(self.eps_tol > 0.0 && self.eps_tol.is_finite()) {
            return bad("eps_tol", "must be positive");
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return bad("cg_tol", "must lie in (0, 1)");
        }
        if self.cg_maxit == Some(0) {
            return bad("cg_maxit", "must be positive");
        }
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return bad("alpha_init", "must be positive");
        }
        match self.p_schedule.first() {
            None => return bad("p_schedule", "must not be empty"),
            Some(&p) if !(p >= 2.0) => return bad("p_schedule", "first exponent must be at least 2"),
            _ => {}
        }
        if !self.p_schedule.iter().all(|p| p.is_finite()) {
            return bad("p_schedule", "exponents must be finite");
        }
        if self.p_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad("p_schedule", "must be strictly increasing");
        }
        Ok(())
    }

    fn cg_maxit_for(&self, n: usize) -> usize {
        self.cg_maxit.unwrap_or(10 * n.max(1))
    }
}

/// Turns the residual into a search direction by solving
/// `(Σ_T weight_T ∫_T ∇w·∇v) = −r(v)` over fields vanishing on the boundary.
/// Implementations choose the element weights.
pub trait DescentDirection: Send + Sync {
    fn name(&self) -> &'static str;

    fn weights(&self, multiplier: &ElementField<f64>) -> Vec<f64>;
}

/// Weight `1 + λ_n`: the multiplier of the current iterate preconditions
/// the step.
pub struct PrimalDual;

impl DescentDirection for PrimalDual {
    fn name(&self) -> &'static str {
        "primal-dual"
    }

    fn weights(&self, multiplier: &ElementField<f64>) -> Vec<f64> {
        multiplier.values.iter().map(|l| 1.0 + l).collect()
    }
}

/// Unit weight: the plain `H¹` Riesz representative of the residual.
pub struct H1Gradient;

impl DescentDirection for H1Gradient {
    fn name(&self) -> &'static str {
        "h1-gradient"
    }

    fn weights(&self, multiplier: &ElementField<f64>) -> Vec<f64> {
        vec![1.0; multiplier.len()]
    }
}

pub struct DirectionRegistry {
    entries: BTreeMap<&'static str, Arc<dyn DescentDirection>>,
}

impl DirectionRegistry {
    pub fn builtin() -> Self {
        let mut registry = DirectionRegistry {
            entries: BTreeMap::new(),
        };
        registry.register(Arc::new(PrimalDual));
        registry.register(Arc::new(H1Gradient));
        registry
    }

    pub fn register(&mut self, direction: Arc<dyn DescentDirection>) {
        self.entries.insert(direction.name(), direction);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DescentDirection>, SolverError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| SolverError::UnknownDirection(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for DirectionRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Euclidean norm of the free-vertex residual divided by the square root of
/// the number of free vertices.
pub fn scaled_residual_norm(spec: &ProblemSpec, r: &[f64]) -> f64 {
    let free = spec.space().num_free();
    if free == 0 {
        return 0.0;
    }
    linalg::norm2(r) / (free as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct Direction {
    pub w: ScalarField,
    pub cg_iterations: usize,
}

fn solve_direction(
    spec: &ProblemSpec,
    strategy: &dyn DescentDirection,
    multiplier: &ElementField<f64>,
    r: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<Direction, SolverError> {
    let space = spec.space();
    let weights = strategy.weights(multiplier);
    let metric = fem::assemble_weighted_stiffness(space, &weights)?;
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let (metric, rhs) = fem::apply_dirichlet(&metric, &rhs, &space.mesh().boundary, 0.0)?;
    let out = linalg::cg_solve(&metric, &rhs, x0, cfg.cg_tol, cfg.cg_maxit_for(space.num_vertices()))?;
    if !out.converged {
        return Err(SolverError::CgNotConverged {
            iterations: out.iterations,
            relative_residual: out.relative_residual,
        });
    }
    Ok(Direction {
        w: ScalarField { values: out.x },
        cg_iterations: out.iterations,
    })
}

/// Direction for the iterate `u`, using the strategy named in `cfg`.
pub fn descent_direction(
    spec: &ProblemSpec,
    u: &ScalarField,
    cfg: &SolverConfig,
) -> Result<Direction, SolverError> {
    let strategy = DirectionRegistry::builtin().get(&cfg.direction)?;
    let r = problem::residual(spec, u)?;
    let multiplier = problem::multiplier_field(spec, u)?;
    solve_direction(spec, strategy.as_ref(), &multiplier, &r, &vec![0.0; r.len()], cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub alpha: f64,
    /// `J_p(u + α w) − J_p(u)`.
    pub energy_change: f64,
    pub shrinks: u32,
}

fn backtrack(
    spec: &ProblemSpec,
    u: &ScalarField,
    w: &ScalarField,
    slope: f64,
    cfg: &SolverConfig,
) -> Result<LineSearch, SolverError> {
    if !(slope < 0.0) {
        return Err(SolverError::NotDescent { slope });
    }
    let mut alpha = cfg.alpha_init;
    for shrinks in 0..=MAX_SHRINKS {
        match problem::energy_change(spec, u, w, alpha) {
            Ok(change) if change <= cfg.c1 * alpha * slope => {
                return Ok(LineSearch {
                    alpha,
                    energy_change: change,
                    shrinks,
                })
            }
            Ok(_) | Err(ProblemError::Overflow { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        if shrinks < MAX_SHRINKS {
            alpha *= cfg.shrink;
        }
    }
    Err(SolverError::LineSearchFailed {
        shrinks: MAX_SHRINKS,
        alpha,
    })
}

/// Largest `α = alpha_init · shrinkᵏ`, `k ≤ 60`, with
/// `J_p(u + α w) ≤ J_p(u) + c1 α J_p'(u)[w]`. Trial steps whose penalty
/// would overflow are rejected like any other failed trial.
pub fn armijo_search(
    spec: &ProblemSpec,
    u: &ScalarField,
    w: &ScalarField,
    cfg: &SolverConfig,
) -> Result<LineSearch, SolverError> {
    let r = problem::residual(spec, u)?;
    if w.len() != r.len() {
        return Err(fem::FemError::LengthMismatch {
            what: "direction",
            expected: r.len(),
            found: w.len(),
        }
        .into());
    }
    backtrack(spec, u, w, linalg::dot(&r, &w.values), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub p: f64,
    pub u: ScalarField,
    pub multiplier: ElementField<f64>,
    pub outer_iterations: usize,
    /// `J_p` at every iterate. Entries after the first are accumulated from
    /// `energy_changes`; near convergence the changes fall below the
    /// resolution of `J_p` and consecutive entries may compare equal.
    pub energy_history: Vec<f64>,
    /// `J_p(u_{n+1}) − J_p(u_n)` for every accepted step, each negative.
    pub energy_changes: Vec<f64>,
    /// Scaled residual norm at every iterate.
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub shrink_history: Vec<u32>,
    pub cg_iterations: Vec<usize>,
    pub converged: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    pub fn initial_residual(&self) -> f64 {
        *self.residual_history.first().unwrap_or(&f64::NAN)
    }
}

pub fn solve(spec: &ProblemSpec, cfg: &SolverConfig, u_init: &ScalarField) -> Result<SolveReport, SolverError> {
    let strategy = DirectionRegistry::builtin().get(&cfg.direction)?;
    solve_with(spec, cfg, strategy.as_ref(), u_init)
}

/// Runs the descent until the scaled residual drops below `eps_tol` or
/// `max_outer` steps have been taken; the latter returns an unconverged
/// report rather than an error.
pub fn solve_with(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    strategy: &dyn DescentDirection,
    u_init: &ScalarField,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    let start = Instant::now();
    spec.check_boundary(u_init)?;
    let mut u = u_init.clone();
    let mut energy = problem::energy(spec, &u)?.total;
    let mut report = SolveReport {
        p: spec.p(),
        u: u.clone(),
        multiplier: ElementField { values: Vec::new() },
        outer_iterations: 0,
        energy_history: vec![energy],
        energy_changes: Vec::new(),
        residual_history: Vec::new(),
        step_history: Vec::new(),
        shrink_history: Vec::new(),
        cg_iterations: Vec::new(),
        converged: false,
        wall_time: Duration::ZERO,
    };
    let mut previous = vec![0.0; u.len()];

    let multiplier = loop {
        let multiplier = problem::multiplier_field(spec, &u)?;
        let r = problem::residual(spec, &u)?;
        let norm = scaled_residual_norm(spec, &r);
        report.residual_history.push(norm);
        if norm <= cfg.eps_tol {
            report.converged = true;
            break multiplier;
        }
        if report.outer_iterations >= cfg.max_outer {
            break multiplier;
        }

        let direction = solve_direction(spec, strategy, &multiplier, &r, &previous, cfg)?;
        let slope = linalg::dot(&r, &direction.w.values);
        let step = backtrack(spec, &u, &direction.w, slope, cfg)?;

        u.axpy(step.alpha, &direction.w);
        energy += step.energy_change;
        report.energy_history.push(energy);
        report.energy_changes.push(step.energy_change);
        report.step_history.push(step.alpha);
        report.shrink_history.push(step.shrinks);
        report.cg_iterations.push(direction.cg_iterations);
        report.outer_iterations += 1;
        previous = direction.w.values;
    };

    report.u = u;
    report.multiplier = multiplier;
    report.wall_time = start.elapsed();
    Ok(report)
}

#[derive(Debug)]
pub struct ContinuationOutcome {
    pub reports: Vec<SolveReport>,
    /// Exponent and error of the stage that failed, if any. Reports of the
    /// stages before it are kept.
    pub failure: Option<(f64, SolverError)>,
}

impl ContinuationOutcome {
    pub fn all_converged(&self) -> bool {
        self.failure.is_none() && self.reports.iter().all(|r| r.converged)
    }
}

/// Solves for every exponent of `cfg.p_schedule`, each stage starting from
/// the previous stage's solution. The first stage starts from the `p = 2`
/// solution, itself computed from the constant boundary field.
pub fn p_continuation(template: &ProblemSpec, cfg: &SolverConfig) -> Result<ContinuationOutcome, SolverError> {
    p_continuation_from(template, cfg, &template.boundary_field())
}

/// As [`p_continuation`], with the `p = 2` warm-up started from `initial`.
pub fn p_continuation_from(
    template: &ProblemSpec,
    cfg: &SolverConfig,
    initial: &ScalarField,
) -> Result<ContinuationOutcome, SolverError> {
    cfg.validate()?;
    let strategy = DirectionRegistry::builtin().get(&cfg.direction)?;
    let mut reports = Vec::with_capacity(cfg.p_schedule.len());

    let quadratic = template.with_p(2.0)?;
    let warm_up = match solve_with(&quadratic, cfg, strategy.as_ref(), initial) {
        Ok(report) => report,
        Err(e) => {
            return Ok(ContinuationOutcome {
                reports,
                failure: Some((2.0, e)),
            })
        }
    };
    let mut current = warm_up.u.clone();
    let mut schedule = cfg.p_schedule.as_slice();
    if schedule.first() == Some(&2.0) {
        reports.push(warm_up);
        schedule = &schedule[1..];
    }

    for &p in schedule {
        let stage = template.with_p(p)?;
        match solve_with(&stage, cfg, strategy.as_ref(), &current) {
            Ok(report) => {
                current = report.u.clone();
                reports.push(report);
            }
            Err(e) => {
                return Ok(ContinuationOutcome {
                    reports,
                    failure: Some((p, e)),
                })
            }
        }
    }
    Ok(ContinuationOutcome {
        reports,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk;
    use crate::problem::ProblemParams;

    fn disk(h: f64, p: f64, level: u32) -> ProblemSpec {
        ProblemSpec::from_mesh(generate_disk(level), ProblemParams::torsion(h, p)).unwrap()
    }

    #[test]
    fn config_validation_names_key() {
        let mut cfg = SolverConfig::default();
        cfg.validate().unwrap();
        cfg.c1 = 1.5;
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { key: "c1", .. })));
        let cfg = SolverConfig {
            p_schedule: vec![2.0, 10.0, 10.0],
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { key: "p_schedule", .. })));
        let cfg = SolverConfig {
            p_schedule: vec![1.5],
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            shrink: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(SolverError::InvalidConfig { key: "shrink", .. })));
    }

    #[test]
    fn registry_lookup() {
        let registry = DirectionRegistry::builtin();
        assert_eq!(registry.names().collect::<Vec<_>>(), ["h1-gradient", "primal-dual"]);
        assert!(matches!(registry.get("newton"), Err(SolverError::UnknownDirection(_))));
    }

    #[test]
    fn zero_residual_gives_zero_direction() {
        let spec = disk(0.0, 10.0, 2);
        let d = descent_direction(&spec, &spec.boundary_field(), &SolverConfig::default()).unwrap();
        assert!(d.w.values.iter().all(|&w| w == 0.0));
        assert_eq!(d.cg_iterations, 0);
    }

    #[test]
    fn direction_vanishes_on_boundary_and_descends() {
        let spec = disk(4.0, 10.0, 3);
        let u = spec.boundary_field();
        let d = descent_direction(&spec, &u, &SolverConfig::default()).unwrap();
        for v in 0..u.len() {
            if spec.space().is_boundary(v) {
                assert_eq!(d.w.values[v], 0.0);
            }
        }
        let r = problem::residual(&spec, &u).unwrap();
        assert!(linalg::dot(&r, &d.w.values) < 0.0);
    }

    #[test]
    fn rejects_ascent_direction() {
        let spec = disk(4.0, 10.0, 2);
        let u = spec.boundary_field();
        let mut d = descent_direction(&spec, &u, &SolverConfig::default()).unwrap().w;
        d.values.iter_mut().for_each(|w| *w = -*w);
        assert!(matches!(
            armijo_search(&spec, &u, &d, &SolverConfig::default()),
            Err(SolverError::NotDescent { .. })
        ));
    }

    #[test]
    fn quadratic_step_is_accepted_at_unit_length() {
        let spec = disk(4.0, 2.0, 3);
        let u = spec.boundary_field();
        // c1 = 1/2 is the exact decrease ratio, so stay strictly below it
        for c1 in [1e-4, 0.25, 0.499] {
            let cfg = SolverConfig {
                c1,
                ..SolverConfig::default()
            };
            let d = descent_direction(&spec, &u, &cfg).unwrap();
            let ls = armijo_search(&spec, &u, &d.w, &cfg).unwrap();
            assert_eq!((ls.alpha, ls.shrinks), (1.0, 0));
            // exact decrease of a Newton step on a quadratic is half the slope
            let slope = linalg::dot(&problem::residual(&spec, &u).unwrap(), &d.w.values);
            assert!((ls.energy_change - 0.5 * slope).abs() < 1e-8 * slope.abs());
        }
    }

    #[test]
    fn huge_direction_backtracks() {
        let spec = disk(4.0, 10.0, 3);
        let u = spec.boundary_field();
        let cfg = SolverConfig::default();
        let mut w = descent_direction(&spec, &u, &cfg).unwrap().w;
        w.values.iter_mut().for_each(|x| *x *= 1e6);
        let ls = armijo_search(&spec, &u, &w, &cfg).unwrap();
        assert!(ls.shrinks > 10 && ls.alpha < 1e-4);
        let slope = linalg::dot(&problem::residual(&spec, &u).unwrap(), &w.values);
        assert!(ls.energy_change <= cfg.c1 * ls.alpha * slope);
    }

    #[test]
    fn trivial_problem_converges_immediately() {
        for p in [2.0, 10.0, 100.0] {
            let spec = disk(0.0, p, 3);
            let report = solve(&spec, &SolverConfig::default(), &spec.boundary_field()).unwrap();
            assert!(report.converged);
            assert_eq!(report.outer_iterations, 0);
            assert!(report.u.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn gradient_strategy_also_descends() {
        let spec = disk(4.0, 10.0, 2);
        let cfg = SolverConfig {
            direction: "h1-gradient".into(),
            max_outer: 30,
            ..SolverConfig::default()
        };
        let report = solve(&spec, &cfg, &spec.boundary_field()).unwrap();
        assert!(report.energy_history.windows(2).all(|e| e[1] < e[0]));
    }

    #[test]
    fn max_outer_gives_partial_report() {
        let spec = disk(4.0, 50.0, 2);
        let cfg = SolverConfig {
            max_outer: 2,
            ..SolverConfig::default()
        };
        let report = solve(&spec, &cfg, &spec.boundary_field()).unwrap();
        assert!(!report.converged);
        assert_eq!(report.outer_iterations, 2);
        assert_eq!(report.residual_history.len(), 3);
    }

    #[test]
    fn single_stage_schedule_matches_direct_solve() {
        let spec = disk(4.0, 2.0, 3);
        let cfg = SolverConfig {
            p_schedule: vec![2.0],
            ..SolverConfig::default()
        };
        let out = p_continuation(&spec, &cfg).unwrap();
        assert!(out.all_converged());
        assert_eq!(out.reports.len(), 1);
        let direct = solve(&spec, &cfg, &spec.boundary_field()).unwrap();
        assert_eq!(out.reports[0].u, direct.u);
        assert_eq!(out.reports[0].energy_history, direct.energy_history);
    }
}
