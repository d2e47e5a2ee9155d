//! Continuation sweep on the unit disk with `h = 4`, printing one error row
//! and the solver effort per exponent.
//!
//! ```text
//! cargo run --release -p gradpen --example disk_sweep -- 5 10,50,100,300
//! ```

use gradpen::analytic::error_row;
use gradpen::diagnostics;
use gradpen::mesh::generate_disk;
use gradpen::problem::{ProblemParams, ProblemSpec};
use gradpen::solver::{p_continuation, SolverConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let level: u32 = args.next().map_or(4, |a| a.parse().expect("refinement level"));
    let schedule: Vec<f64> = args.next().map_or(vec![2.0, 10.0, 50.0, 100.0], |a| {
        a.split(',').map(|p| p.parse().expect("exponent")).collect()
    });
    let spec = ProblemSpec::from_mesh(generate_disk(level), ProblemParams::torsion(4.0, 2.0)).unwrap();
    let cfg = SolverConfig {
        p_schedule: schedule,
        ..SolverConfig::default()
    };
    let out = p_continuation(&spec, &cfg).unwrap();
    println!("p cells iters cg_total time_s L2 H1 W1inf dualL1 dualLinf max_grad compl_l1");
    for report in &out.reports {
        let stage = spec.with_p(report.p).unwrap();
        let row = error_row(&stage, report).unwrap();
        let feas = diagnostics::feasibility(stage.space(), &report.u).unwrap();
        let comp = diagnostics::complementarity(stage.space(), &report.u, &report.multiplier).unwrap();
        println!(
            "{} {} {} {} {:.2} {:.3e} {:.3e} {:.3e} {:.3e} {:.3e} {:.6} {:.3e}",
            report.p,
            row.cells,
            report.outer_iterations,
            report.cg_iterations.iter().sum::<usize>(),
            report.wall_time.as_secs_f64(),
            row.l2,
            row.h1,
            row.w1_inf,
            row.dual_l1,
            row.dual_linf,
            feas.max_grad,
            comp.l1_residual
        );
    }
    if let Some((p, e)) = &out.failure {
        eprintln!("stage p = {p} failed: {e}");
    }
}
