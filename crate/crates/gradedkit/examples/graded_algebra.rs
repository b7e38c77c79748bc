//! The graded-commutative polynomial engine: Koszul signs, left
//! derivatives, substitution and weight decomposition, all over exact
//! rationals.
//!
//! Run with `cargo run --example graded_algebra`.

use gradedkit::symalg::rat;
use gradedkit::{Chart, Coordinate, Expr, Parity, Substitution, Weight};
use std::collections::BTreeMap;

fn main() {
    let chart = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("xd", Weight(vec![1]), Parity::Even),
            Coordinate::new("th1", Weight(vec![1]), Parity::Odd),
            Coordinate::new("th2", Weight(vec![1]), Parity::Odd),
        ],
    )
    .unwrap()
    .with_func("f", &["x"])
    .unwrap();

    let x = Expr::var(&chart, "x").unwrap();
    let xd = Expr::var(&chart, "xd").unwrap();
    let th1 = Expr::var(&chart, "th1").unwrap();
    let th2 = Expr::var(&chart, "th2").unwrap();
    let f = Expr::func(&chart, "f").unwrap();

    // Koszul antisymmetry and odd squares
    println!("th1*th2 + th2*th1 = {}", th1.mul(&th2).add(&th2.mul(&th1)));
    println!("th1^2 = {}", th1.mul(&th1));

    // left derivatives pick up signs past odd factors
    let prod = th1.mul(&th2);
    println!(
        "d/dth2 (th1*th2) = {}",
        prod.derivative(chart.id_of("th2").unwrap())
    );
    // formal chain rule through opaque symbols
    let e = f.mul(&th1).scale(&rat(3, 2));
    println!(
        "d/dx (3/2 f(x) th1) = {}",
        e.derivative(chart.id_of("x").unwrap())
    );

    // weight decomposition
    let mixed = x.add(&xd).add(&x.mul(&xd).mul(&xd));
    for (w, part) in mixed.weight_decompose().unwrap() {
        println!("weight {w}: {part}");
    }

    // odd substitutions track the sign: swapping th1 and th2 negates
    let mut swap = BTreeMap::new();
    swap.insert("th1".to_string(), th2.clone());
    swap.insert("th2".to_string(), th1.clone());
    let sigma = Substitution::new(&chart, &chart, &swap).unwrap();
    println!("swap applied to th1*th2: {}", sigma.apply(&prod).unwrap());
}
