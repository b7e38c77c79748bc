//! Complete (tangent) lifts of Poisson bivectors and the weight audit for
//! Poisson structures on weighted groupoids.
//!
//! Run with `cargo run --example poisson_lifts`.

use gradedkit::groupoids::{pair_groupoid, poisson_weight_audit, tangent_lift_groupoid, WeightedGroupoid};
use gradedkit::lifts;
use gradedkit::{Chart, Coordinate, Expr, Ham, Parity, Weight};

fn main() {
    let plane = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("y", Weight(vec![0]), Parity::Even),
        ],
    )
    .unwrap();
    let mv = lifts::multivector_chart(&plane);
    let var = |n: &str| Expr::var(&mv, n).unwrap();

    // constant symplectic bivector and its complete lift
    let pi = Ham::new(var("p_x").mul(&var("p_y"))).unwrap();
    let lifted = lifts::tangent_lift_poisson(&pi, 1).unwrap();
    println!("d_T(p_x p_y) = {lifted}");
    println!(
        "weight drop of the lift: {:?}",
        lifts::poisson_weight_drop(&lifted)
    );
    println!("[d_T pi, d_T pi] = {}", lifted.poisson(&lifted).unwrap());

    // a linear Poisson structure stays Poisson after lifting
    let linear = Ham::new(var("x").mul(&var("p_x")).mul(&var("p_y"))).unwrap();
    let lifted_linear = lifts::tangent_lift_poisson(&linear, 1).unwrap();
    println!(
        "[d_T pi_lin, d_T pi_lin] = {}",
        lifted_linear.poisson(&lifted_linear).unwrap()
    );

    // the multiplicative (difference) bivector on the pair groupoid, in
    // source-adapted coordinates, audits at weight -1 on the tangent
    // groupoid
    let pair = pair_groupoid(&plane).unwrap();
    let mv_pair = lifts::multivector_chart(pair.gamma());
    let pvar = |n: &str| Expr::var(&mv_pair, n).unwrap();
    let difference = Ham::new(
        pvar("p_x")
            .mul(&pvar("p_y"))
            .neg()
            .add(&pvar("p_x").mul(&pvar("p_Y_y")))
            .add(&pvar("p_Y_x").mul(&pvar("p_y"))),
    )
    .unwrap();
    println!(
        "[difference, difference] = {}",
        difference.poisson(&difference).unwrap()
    );
    let lifted_diff = lifts::tangent_lift_poisson(&difference, 1).unwrap();
    let weighted = WeightedGroupoid::canonical(tangent_lift_groupoid(&pair).unwrap(), "t");
    let audit = poisson_weight_audit(&weighted, &lifted_diff, 1).unwrap();
    println!(
        "audit passes: {} (multiplicativity checked: {})",
        audit.passed(),
        audit.multiplicativity_checked
    );
}
