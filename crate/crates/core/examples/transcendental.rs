//! The exp-term pipeline step by step: narrow the box, pick Taylor orders,
//! solve the polynomial surrogate, refine on the original system.
use semiroot::format::parse_system;
use semiroot::transcend::{narrow, plan_taylor, solve_transcendental, substitute};

const SYSTEM: &str = "
vars: x, y
eq:
  exp(x) - 2*y
  x^2 + y^2 - 4
exp:
  narrow = x
  iters = 8
  budget = 1e-3
  x in [-3, 3]
  y in [-3, 3]
";

fn main() {
    let file = parse_system(SYSTEM).unwrap();
    let sys = file.to_exp_system().unwrap();
    let cfg = file.transcend_config();

    let nar = narrow(&sys, cfg.narrow_iters, &cfg).unwrap();
    println!("narrowed to {:?} after {:?} halvings", nar.bx, nar.halvings);
    println!("root cover: {} boxes", nar.cover.boxes.len());

    let plan = plan_taylor(&sys, &nar.bx, cfg.err_budget, cfg.order_cap).unwrap();
    for t in &plan.terms {
        println!(
            "exp({}) ~ order {} about {:.6}, remainder <= {:.2e}",
            t.argument, t.order, t.center, t.remainder
        );
    }
    let names = vec!["x".to_string(), "y".to_string()];
    for p in substitute(&sys, &plan).polys() {
        println!("  {}", p.display_with(&names));
    }

    let res = solve_transcendental(&sys, &cfg).unwrap();
    println!("paths: {:?}", res.paths);
    for (x, r) in res.points.iter().zip(&res.residuals) {
        println!("root {x:?}  residual {r:.1e}");
    }
}
