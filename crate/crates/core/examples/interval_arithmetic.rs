//! Outward-rounded interval arithmetic.
use semiroot::interval::{Interval, IntervalBox};

fn main() {
    let x = Interval::new(0.1, 0.2).unwrap();
    let y = Interval::point(3.0);

    // 0.1 is not a float; the enclosures still hold the real results
    println!("x + y      = {}", x + y);
    println!("x * y      = {}", x * y);
    println!("x / y      = {}", x.checked_div(&y).unwrap());
    println!("x^3        = {}", x.powi(3));
    println!("exp(x)     = {}", x.exp());
    println!("ln(x)      = {}", x.ln().unwrap());

    // dependency: x - x is not {0}, but it does contain 0
    let same = x;
    let d = x - same;
    println!("x - x      = {d}  (contains 0: {})", d.contains_zero());

    // division by an interval holding zero is refused
    let z = Interval::new(-1.0, 1.0).unwrap();
    println!("x / [-1,1] = {:?}", x.checked_div(&z).err());

    let b = IntervalBox::from_bounds(&[(0.0, 1.0), (2.0, 4.0)]).unwrap();
    let (l, r) = b.bisect_widest();
    println!("bisect {b:?}\n  -> {l:?}\n     {r:?}");
}
