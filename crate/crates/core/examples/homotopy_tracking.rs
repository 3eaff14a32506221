//! Tracking all complex roots of a square system from a start system.
use semiroot::homotopy::{linear_product_count, linear_product_partition, track_all, StartKind, TrackerConfig};
use semiroot::poly::{MultiPoly, PolySystem};

fn main() {
    // x*(y + z) - 1, x - y*z, y + z - 2
    let v = |i| MultiPoly::var(3, i);
    let one = MultiPoly::constant(3, 1.0);
    let f = PolySystem::new(vec![
        &(&v(0) * &(&v(1) + &v(2))) - &one,
        &v(0) - &(&v(1) * &v(2)),
        &(&v(1) + &v(2)) - &one.scale(2.0),
    ])
    .unwrap();

    println!("total-degree paths:   {}", f.bezout_number());
    println!(
        "linear-product paths: {} (variable groups {:?})",
        linear_product_count(&f),
        linear_product_partition(&f)
    );

    for start in [StartKind::TotalDegree, StartKind::LinearProduct] {
        let cfg = TrackerConfig {
            start,
            ..TrackerConfig::default()
        };
        let res = track_all(&f, &cfg).unwrap();
        println!("\n{start:?}: {:?}", res.stats);
        for c in res.converged() {
            let pt: Vec<String> = c.point.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
            println!("  [{}]  residual {:.1e}", pt.join(", "), c.residual);
        }
    }
}
