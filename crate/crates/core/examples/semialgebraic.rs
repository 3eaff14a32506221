//! Equations plus `> 0`, `>= 0` and `!= 0` constraints.
use semiroot::format::parse_system;
use semiroot::semialg::real_root_semi;
use semiroot::verify::IsolateConfig;

// piecewise cubic curves restricted to the triangle x <= 0, y <= 0, x + y >= -3
const SYSTEM: &str = "
vars: x, y
eq:
  x^3 - y^3 + 3*y^2 + x*y - 3*x - 4
  x^3 - y^3 + 2*y*x + 4*x^2 - 1
nonneg:
  -x
  -y
  x + y + 3
";

fn main() {
    let sas = parse_system(SYSTEM).unwrap().to_semialg().unwrap();
    let res = real_root_semi(&sas, &IsolateConfig::default()).unwrap();
    println!("isolated {} real roots", res.isolation.boxes.len());
    for r in &res.report.removed {
        println!(
            "  removed {:?} by {:?} #{}: {:?}",
            r.cert.midpoint(),
            r.stage,
            r.constraint,
            r.reason
        );
    }
    for b in res.kept() {
        println!("  kept    {:?}", b.bx);
    }
    println!("sign-test systems solved: {}", res.report.sign_solves);
}
