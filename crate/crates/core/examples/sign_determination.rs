//! Deciding the sign of a polynomial at an isolated root, including the
//! case where it vanishes there.
use semiroot::poly::{augment_sign_system, MultiPoly, PolySystem, SignIndex};
use semiroot::semialg::SignOracle;
use semiroot::verify::{real_root_isolate, IsolateConfig};

fn main() {
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);
    let c = |v| MultiPoly::constant(2, v);
    let f = PolySystem::new(vec![&(&x.pow(2) + &y) - &c(2.0), &(&x + &y.scale(2.0)) - &c(3.0)]).unwrap();
    // h = 3x + y - 4 vanishes at (1, 1) but not at (-1/2, 7/4)
    let h = &(&x.scale(3.0) + &y) - &c(4.0);

    let cfg = IsolateConfig::default().with_tau(1e-12);
    let iso = real_root_isolate(&f, &cfg).unwrap();
    let mut oracle = SignOracle::new(&f, &cfg).unwrap();
    for b in &iso.boxes {
        let plus = oracle.deter_sign(b, &h, SignIndex::Plus).unwrap().map(|s| s.as_i32());
        let minus = oracle.deter_sign(b, &h, SignIndex::Minus).unwrap().map(|s| s.as_i32());
        let verdict = match (plus, minus) {
            (Some(1), Some(1)) => "h = 0",
            (Some(1), Some(-1)) => "h > 0",
            (Some(-1), Some(1)) => "h < 0",
            _ => "undecided",
        };
        println!("{:?}: +1 -> {plus:?}, -1 -> {minus:?}  => {verdict}", b.midpoint());
    }

    // the augmented system behind the +1 test
    let aug = augment_sign_system(&f, &h, SignIndex::Plus).unwrap();
    for z in real_root_isolate(&aug, &cfg).unwrap().boxes {
        println!("Z = {:?}", z.bx);
    }
}
