//! The text format: parse, inspect, print canonically, run like the CLI.
use semiroot::cli::{run_text, Args};
use semiroot::format::{parse_system, SystemKind};

const TEXT: &str = "
# unit circle against a parabola, upper half only
vars: x, y
eq:
  x^2 + y^2 - 1
  y - x^2 + 1/2
pos:
  y
opts:
  tau = 1e-10
  seed = 7
";

fn main() {
    let file = parse_system(TEXT).unwrap();
    assert_eq!(file.kind(), SystemKind::SemiAlgebraic);
    println!("{}", file.serialize());

    let (code, doc) = run_text(TEXT, &Args::for_file("inline.sys")).unwrap();
    print!("{}", doc.to_text());
    println!("exit code {code}");

    match parse_system("vars: x\neq:\n  x^2 - \n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("bad input: {e}"),
    }
}
