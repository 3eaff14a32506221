//! Sparse multivariate polynomials: arithmetic, derivatives, evaluation.
use semiroot::interval::IntervalBox;
use semiroot::poly::{MultiPoly, PolySystem};

fn main() {
    let names = vec!["x".to_string(), "y".to_string()];
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);

    // f = x^2 + y - 2, g = x + 2y - 3
    let f = &(&x.pow(2) + &y) - &MultiPoly::constant(2, 2.0);
    let g = &(&x + &y.scale(2.0)) - &MultiPoly::constant(2, 3.0);
    let fg = &f * &g;
    println!("f*g       = {}", fg.display_with(&names));
    println!("d(f*g)/dx = {}", fg.derivative(0).display_with(&names));
    println!("deg       = {}", fg.total_degree());

    let sys = PolySystem::new(vec![f, g]).unwrap();
    println!("Bezout    = {}", sys.bezout_number());
    println!("F(1, 1)   = {:?}", sys.eval(&[1.0, 1.0]).unwrap());

    let bx = IntervalBox::from_bounds(&[(0.9, 1.1), (0.9, 1.1)]).unwrap();
    println!("F(box)    = {:?}", sys.eval_interval(&bx).unwrap());
    for (i, row) in sys.jacobian().iter().enumerate() {
        let row: Vec<String> = row.iter().map(|p| p.display_with(&names).to_string()).collect();
        println!("J[{i}]      = [{}]", row.join(", "));
    }
}
