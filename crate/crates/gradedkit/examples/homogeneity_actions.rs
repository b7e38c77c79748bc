//! Homogeneity actions: verify the monoid laws, read off the degree and
//! the Taylor frame, and homogenize a non-diagonal action.
//!
//! Run with `cargo run --example homogeneity_actions`.

use gradedkit::lifts::HomAction;
use gradedkit::{Chart, Coordinate, Expr, Parity, Weight};
use std::collections::BTreeMap;

fn main() {
    // The 2-velocities chart (x, xd, xdd) with weights 0, 1, 2.
    let t2m = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("xd", Weight(vec![1]), Parity::Even),
            Coordinate::new("xdd", Weight(vec![2]), Parity::Even),
        ],
    )
    .unwrap();
    let canonical = HomAction::canonical(&t2m, "t");
    let report = canonical.verify().unwrap();
    println!("canonical action verifies: {}", report.passed());
    println!("degree: {}", canonical.degree().unwrap());

    // The same degree-2 structure written in a skew coordinate w = z + x*y:
    // h_t(x, y, w) = (x, t*y, t^2*w + (t - t^2)*x*y).
    let xyw = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("y", Weight(vec![1]), Parity::Even),
            Coordinate::new("w", Weight(vec![2]), Parity::Even),
        ],
    )
    .unwrap();
    let ext = xyw.extend_params(&["t"]);
    let t = Expr::var(&ext, "t").unwrap();
    let x = Expr::var(&ext, "x").unwrap();
    let y = Expr::var(&ext, "y").unwrap();
    let w = Expr::var(&ext, "w").unwrap();
    let mut map = BTreeMap::new();
    map.insert("y".to_string(), t.mul(&y));
    map.insert(
        "w".to_string(),
        t.pow(2).mul(&w).add(&t.sub(&t.pow(2)).mul(&x.mul(&y))),
    );
    let skew = HomAction::new(&xyw, "t", &map).unwrap();
    println!("skew action verifies: {}", skew.verify().unwrap().passed());

    let frame = skew.taylor_frame().unwrap();
    for (name, row) in &frame.rows {
        let rendered: Vec<String> = row.iter().map(|e| e.to_string()).collect();
        println!("Taylor frame of {name}: [{}]", rendered.join(", "));
    }

    // The triangular homogenization recovers the homogeneous coordinate.
    let change = skew.homogenize().unwrap();
    for (i, c) in xyw.coords().iter().enumerate() {
        println!("homogeneous coordinate {} = {}", c.name, change.image(i));
    }
    let residuals = skew.verify_change(&change).unwrap();
    println!(
        "change conjugates the action to the canonical one: {}",
        residuals.iter().all(|(_, e)| e.is_zero())
    );
}
