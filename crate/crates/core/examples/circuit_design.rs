//! The nine-variable circuit design problem with exponential device
//! equations. Takes about a minute in release mode:
//!
//!     cargo run --release --example circuit_design
use std::time::Instant;

use semiroot::format::parse_system;
use semiroot::transcend::solve_transcendental;

fn main() {
    let path = format!("{}/fixtures/circuit.sys", env!("CARGO_MANIFEST_DIR"));
    let file = parse_system(&std::fs::read_to_string(path).unwrap()).unwrap();
    let sys = file.to_exp_system().unwrap();
    let t = Instant::now();
    let res = solve_transcendental(&sys, &file.transcend_config()).unwrap();
    println!("narrowed box: {:?}", res.narrowing.bx);
    for term in &res.plan.terms {
        println!("  order {} for exp({})", term.order, term.argument);
    }
    println!("paths: {:?}", res.paths);
    for (x, r) in res.points.iter().zip(&res.residuals) {
        for (name, v) in file.vars.iter().zip(x) {
            println!("  {name} = {v:.10}");
        }
        println!("  residual {r:.1e}");
    }
    println!("{:.1} s", t.elapsed().as_secs_f64());
}
