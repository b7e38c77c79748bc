//! Weighted Lie bi-algebroids and the Courant structure they generate:
//! the triangular pair of a linear Poisson structure, the sharp map as a
//! Q-morphism, and the pairing, Dorfman bracket and anchor on sections.
//!
//! Run with `cargo run --example bialgebroids_courant`.

use gradedkit::algebroids::{
    algebroid_from_structure, bi_algebroid_from_algebroid, courant_from_bi_algebroid,
    triangular_bi_algebroid, AlgebroidData,
};
use gradedkit::lifts;
use gradedkit::symalg::rat;
use gradedkit::{Chart, Coordinate, Expr, Parity, VecField, Weight};
use std::collections::BTreeMap;

fn main() {
    // de Rham algebroid on ΠT R^2
    let mut coords = Vec::new();
    for a in 1..=2 {
        coords.push(Coordinate::new(format!("x{a}"), Weight(vec![0, 0]), Parity::Even));
    }
    for a in 1..=2 {
        coords.push(Coordinate::new(format!("xi{a}"), Weight(vec![0, 1]), Parity::Odd));
    }
    let pitm = Chart::new(2, coords).unwrap();
    let mut anchor = BTreeMap::new();
    for a in 1..=2 {
        anchor.insert((format!("xi{a}"), format!("x{a}")), Expr::one(&pitm));
    }
    let tm = algebroid_from_structure(&pitm, 1, 1, &anchor, &BTreeMap::new()).unwrap();

    // triangular bi-algebroid from the linear Poisson structure {x1,x2} = x1
    let b0 = bi_algebroid_from_algebroid(&tm).unwrap();
    let ct = b0.chart().clone();
    let p = Expr::var(&ct, "x1")
        .unwrap()
        .mul(&Expr::var(&ct, "p_xi1").unwrap())
        .mul(&Expr::var(&ct, "p_xi2").unwrap());
    let b = triangular_bi_algebroid(&tm, &p).unwrap();
    let report = b.verify().unwrap();
    println!("triangular bi-algebroid verifies: {}", report.passed());
    println!("  S = {}", b.s_ham);
    let sharp = b.sharp_map().unwrap();
    println!("  sharp map is a Q-morphism: {}", sharp.passed());
    println!("  dual pair verifies: {}", b.dual().unwrap().verify().unwrap().passed());

    // the Courant structure of T(TM) over the line at lambda = 1
    let line_pitm = Chart::new(
        2,
        vec![
            Coordinate::new("x1", Weight(vec![0, 0]), Parity::Even),
            Coordinate::new("xi1", Weight(vec![0, 1]), Parity::Odd),
        ],
    )
    .unwrap();
    let q = VecField::from_names(&line_pitm, &[("x1", Expr::var(&line_pitm, "xi1").unwrap())])
        .unwrap();
    let t = lifts::tangent_chart(&line_pitm);
    let q_t = lifts::tangent_lift_field(&q, &t).unwrap();
    let d2 = AlgebroidData::new(&t, q_t, 2, 1).unwrap();
    let c = courant_from_bi_algebroid(&bi_algebroid_from_algebroid(&d2).unwrap(), rat(1, 1))
        .unwrap();
    println!("Courant generator Theta = {}", c.theta);
    println!("Courant structure verifies: {}", c.verify().unwrap().passed());

    let ch = c.chart().clone();
    let var = |n: &str| Expr::var(&ch, n).unwrap();
    let chi = var("p_xi1");
    let th = var("xi1");
    println!("pairing <p_xi1, xi1> = {}", c.pairing(&chi, &th).unwrap());
    let sect1 = var("dx1").mul(&var("xi1"));
    let sect2 = var("p_xi1");
    println!(
        "Dorfman bracket [[dx1*xi1, p_xi1]] = {}",
        c.dorfman(&sect1, &sect2).unwrap()
    );
    let f = var("x1").pow(3);
    println!("anchor of the chi-half on x1^3: {}", c.anchor(&chi, &f).unwrap());
}
