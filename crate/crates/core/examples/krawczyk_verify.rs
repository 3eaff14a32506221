//! Certifying an approximate root: Kantorovich box, then Krawczyk.
use semiroot::interval::IntervalBox;
use semiroot::poly::{MultiPoly, PolySystem};
use semiroot::verify::Verifier;

fn main() {
    // circle x^2 + y^2 = 4 meets the line y = x at (√2, √2)
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);
    let f = PolySystem::new(vec![&(&x.pow(2) + &y.pow(2)) - &MultiPoly::constant(2, 4.0), &x - &y]).unwrap();
    let v = Verifier::new(&f).unwrap();

    let approx = [1.414, 1.415];
    let (bx, k) = v.initial_box(&approx, 1e-13).unwrap();
    println!("Kantorovich: h = {:.3e}, omega = {:.3e}", k.h, k.omega);
    let cert = v.krawczyk(&bx).unwrap();
    println!(
        "K({:?})\n  = {:?}\n  -> {:?}",
        cert.bx, cert.krawczyk_image, cert.status
    );

    let tight = v.tighten(&cert, 1e-14).unwrap();
    println!("tightened: {:?} ({:?})", tight.bx, tight.status);

    // a box with no root is excluded, a much wider one still certifies, and one
    // centred where the Jacobian is singular cannot be tested at all
    for b in [
        IntervalBox::from_bounds(&[(2.0, 3.0), (2.0, 3.0)]).unwrap(),
        IntervalBox::from_bounds(&[(0.5, 3.0), (0.5, 3.0)]).unwrap(),
        IntervalBox::from_bounds(&[(-3.0, 3.0), (-3.0, 3.0)]).unwrap(),
    ] {
        match v.krawczyk(&b) {
            Ok(c) => println!("{b:?}: {:?}", c.status),
            Err(e) => println!("{b:?}: {e}"),
        }
    }
}
