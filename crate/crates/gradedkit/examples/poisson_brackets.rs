//! The canonical Poisson bracket on a cotangent chart, symbols of vector
//! fields, Hamiltonian fields and odd (Schouten) brackets on multivector
//! charts.
//!
//! Run with `cargo run --example poisson_brackets`.

use gradedkit::lifts;
use gradedkit::{Chart, Coordinate, Expr, Ham, Parity, VecField, Weight};

fn main() {
    let base = Chart::new(
        1,
        vec![
            Coordinate::new("x", Weight(vec![0]), Parity::Even),
            Coordinate::new("th", Weight(vec![1]), Parity::Odd),
        ],
    )
    .unwrap();

    // phase lift: even momenta, the defining relation {p_c, c} = 1
    let ct = lifts::cotangent_chart(&base);
    let var = |n: &str| Expr::var(&ct, n).unwrap();
    let p_x = Ham::new(var("p_x")).unwrap();
    let x = Ham::new(var("x")).unwrap();
    println!("{{p_x, x}} = {}", p_x.poisson(&x).unwrap());
    let chi = Ham::new(var("p_th")).unwrap();
    let th = Ham::new(var("th")).unwrap();
    println!("{{p_th, th}} = {}", chi.poisson(&th).unwrap());

    // the symbol map sends Lie brackets to Poisson brackets
    let euler = VecField::from_names(&ct, &[("x", var("x")), ("th", var("th"))]).unwrap();
    let shift = VecField::from_names(&ct, &[("x", Expr::one(&ct))]).unwrap();
    let lhs = euler.lie_bracket(&shift).unwrap().symbol().unwrap();
    let rhs = euler
        .symbol()
        .unwrap()
        .poisson(&shift.symbol().unwrap())
        .unwrap();
    println!("symbol([E, d/dx]) = {lhs}");
    println!("{{symbol E, symbol d/dx}} = {rhs}");

    // Hamiltonian fields: {H, .} as a derivation
    let h = Ham::new(var("p_x").mul(&var("p_th")).mul(&var("th"))).unwrap();
    println!("X_H = {}", h.hamiltonian_field().unwrap());

    // the odd bracket: multivector fields with odd conjugate momenta; a
    // bivector Poisson-commutes with itself exactly when it is Poisson
    let plane = Chart::new(
        1,
        vec![
            Coordinate::new("u", Weight(vec![0]), Parity::Even),
            Coordinate::new("v", Weight(vec![0]), Parity::Even),
        ],
    )
    .unwrap();
    let mv = lifts::multivector_chart(&plane);
    let mvar = |n: &str| Expr::var(&mv, n).unwrap();
    let pi = Ham::new(mvar("u").mul(&mvar("p_u")).mul(&mvar("p_v"))).unwrap();
    println!("[pi, pi] = {} (linear Poisson)", pi.poisson(&pi).unwrap());
}
