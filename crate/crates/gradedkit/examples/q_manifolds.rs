//! Q-manifolds: homological vector fields, the de Rham differential and a
//! Lie algebra presented as a quadratic odd field, with exact residuals.
//!
//! Run with `cargo run --example q_manifolds`.

use gradedkit::symalg::rat;
use gradedkit::{Chart, Coordinate, Expr, Parity, VecField, Weight};

fn main() {
    // ΠT R^2: odd fibre coordinates xi over the base x.
    let chart = Chart::new(
        1,
        vec![
            Coordinate::new("x1", Weight(vec![0]), Parity::Even),
            Coordinate::new("x2", Weight(vec![0]), Parity::Even),
            Coordinate::new("xi1", Weight(vec![1]), Parity::Odd),
            Coordinate::new("xi2", Weight(vec![1]), Parity::Odd),
        ],
    )
    .unwrap();
    let de_rham = VecField::from_names(
        &chart,
        &[
            ("x1", Expr::var(&chart, "xi1").unwrap()),
            ("x2", Expr::var(&chart, "xi2").unwrap()),
        ],
    )
    .unwrap();
    let report = de_rham.is_homological().unwrap();
    println!("de Rham [Q,Q] = {} (pass: {})", report.residual, report.passed());

    // so(3) over a point: Q = 1/2 xi^a xi^b C_ba^c d/dxi^c.
    let so3 = Chart::new(
        1,
        vec![
            Coordinate::new("pt", Weight(vec![0]), Parity::Even),
            Coordinate::new("xi1", Weight(vec![1]), Parity::Odd),
            Coordinate::new("xi2", Weight(vec![1]), Parity::Odd),
            Coordinate::new("xi3", Weight(vec![1]), Parity::Odd),
        ],
    )
    .unwrap();
    let xi = |n: &str| Expr::var(&so3, n).unwrap();
    let q = VecField::from_names(
        &so3,
        &[
            ("xi1", xi("xi2").mul(&xi("xi3")).neg()),
            ("xi2", xi("xi1").mul(&xi("xi3"))),
            ("xi3", xi("xi1").mul(&xi("xi2")).neg()),
        ],
    )
    .unwrap();
    let report = q.is_homological().unwrap();
    println!("so(3) [Q,Q] = {} (pass: {})", report.residual, report.passed());

    // a perturbed structure constant breaks the Jacobi identity; the
    // residual is the obstruction, printed exactly
    let bad = q.add(
        &VecField::from_names(&so3, &[("xi2", xi("xi2").mul(&xi("xi3")).scale(&rat(1, 1)))])
            .unwrap(),
    );
    let report = bad.is_homological().unwrap();
    println!(
        "perturbed so(3) [Q,Q] = {} (pass: {})",
        report.residual,
        report.passed()
    );
}
