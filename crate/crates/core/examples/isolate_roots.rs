//! Real root isolation: homotopy, complex rejection, Krawczyk boxes.
use semiroot::format::parse_system;
use semiroot::verify::{real_root_isolate, IsolateConfig};

const SYSTEM: &str = "
vars: x1, x2
eq:
  5 + 13*x1 - 10*x2 - 82*x1^2 + 71*x1*x2 + 16*x2^2
  403.22*x1 - 314.64 + 73.16*x1^2 - 269.26*x1*x2 + 300.96*x2 - 48*x1^3 + 53*x1^2*x2 - 28*x2^2*x1 + 95.76*x2^2
";

fn main() {
    let f = parse_system(SYSTEM).unwrap().to_semialg().unwrap().equations;
    let cfg = IsolateConfig::default().with_tau(1e-12);
    let iso = real_root_isolate(&f, &cfg).unwrap();
    println!("paths: {:?}", iso.paths);
    println!("stats: {:?}", iso.stats);
    for (i, b) in iso.boxes.iter().enumerate() {
        println!("X{} = {:?}", i + 1, b.bx);
    }
    if !iso.undecided.is_empty() {
        println!("undecided: {:?}", iso.undecided);
    }
}
