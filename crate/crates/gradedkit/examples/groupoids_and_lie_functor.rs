//! Polynomial Lie groupoids and their differentiation: the pair groupoid,
//! the ax+b group, and the weighted pair groupoid whose Lie algebroid
//! inherits the tangent-lifted homogeneity structure.
//!
//! Run with `cargo run --example groupoids_and_lie_functor`.

use gradedkit::algebroids::structure_from_q;
use gradedkit::groupoids::{
    lie_functor, lie_functor_action, pair_groupoid, GroupoidBuilder, WeightedGroupoid,
};
use gradedkit::{Chart, Coordinate, Expr, Parity, Weight};
use std::collections::BTreeMap;

fn main() {
    // pair groupoid over the plane: the algebroid is TM with the identity
    // anchor and vanishing structure functions
    let plane = Chart::new(
        1,
        vec![
            Coordinate::new("x1", Weight(vec![0]), Parity::Even),
            Coordinate::new("x2", Weight(vec![0]), Parity::Even),
        ],
    )
    .unwrap();
    let pair = pair_groupoid(&plane).unwrap();
    let report = pair.verify().unwrap();
    println!(
        "pair groupoid verifies: {} (associativity checked: {})",
        report.passed(),
        report.associativity_checked()
    );
    let algebroid = lie_functor(&pair).unwrap();
    let (anchor, structure) = structure_from_q(&algebroid).unwrap();
    println!("anchor entries: {}, bracket entries: {}", anchor.len(), structure.len());
    println!("Q = {}", algebroid.q());

    // the ax+b group in source-adapted coordinates A = a - 1, b; inversion
    // is rational so it is omitted and reported as not checked
    let point = Chart::new(1, vec![Coordinate::new("pt", Weight(vec![0]), Parity::Even)]).unwrap();
    let axb_chart = Chart::new(
        1,
        vec![
            Coordinate::new("pt", Weight(vec![0]), Parity::Even),
            Coordinate::new("A", Weight(vec![0]), Parity::Even),
            Coordinate::new("b", Weight(vec![0]), Parity::Even),
        ],
    )
    .unwrap();
    let builder = GroupoidBuilder::new(&axb_chart, &point, &BTreeMap::new(), None).unwrap();
    let comp = builder.composable_chart().clone();
    let cvar = |n: &str| Expr::var(&comp, n).unwrap();
    let mut mult = BTreeMap::new();
    mult.insert("pt".to_string(), cvar("pt_r"));
    mult.insert(
        "A".to_string(),
        cvar("A_l").add(&cvar("A_r")).add(&cvar("A_l").mul(&cvar("A_r"))),
    );
    mult.insert(
        "b".to_string(),
        cvar("b_l").add(&cvar("b_r")).add(&cvar("A_l").mul(&cvar("b_r"))),
    );
    let axb = builder.finish(&mult).unwrap();
    let report = axb.verify().unwrap();
    println!(
        "ax+b verifies: {} (inverse checked: {})",
        report.passed(),
        report.inverse_checked()
    );
    let aff1 = lie_functor(&axb).unwrap();
    let (_, structure) = structure_from_q(&aff1).unwrap();
    for ((a, b, c), v) in &structure {
        println!("[{a}, {b}] -> {v} {c}");
    }

    // the weighted pair groupoid of a degree-1 graded bundle: the Lie
    // functor lands on its tangent bundle with the lifted action
    let f1 = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("v", Weight(vec![1]), Parity::Even),
        ],
    )
    .unwrap();
    let wpair = WeightedGroupoid::canonical(pair_groupoid(&f1).unwrap(), "t");
    println!(
        "weighted pair groupoid verifies: {}",
        wpair.verify().unwrap().passed()
    );
    let a = lie_functor(&wpair.spec).unwrap();
    let action = lie_functor_action(&wpair).unwrap();
    let rep = a.verify_weighted_with(Some(&action)).unwrap();
    println!(
        "A(F1 x F1) is a weighted algebroid of degree {}: {}",
        a.degree(),
        rep.passed()
    );
    for c in a.chart().coords() {
        println!("  {} has weight {}", c.name, c.weight);
    }
}
