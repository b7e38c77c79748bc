//! Weighted Lie algebroids: the degree-2 structure on T(ΠTM), section
//! brackets with their weight bookkeeping, and the projection down the
//! tower of levels.
//!
//! Run with `cargo run --example weighted_algebroids`.

use gradedkit::algebroids::{section_bracket, AlgebroidData, Section};
use gradedkit::lifts;
use gradedkit::{Chart, Coordinate, Expr, Parity, VecField, Weight};

fn main() {
    // ΠTM over R^2 with the de Rham field
    let mut coords = Vec::new();
    for a in 1..=2 {
        coords.push(Coordinate::new(format!("x{a}"), Weight(vec![0, 0]), Parity::Even));
    }
    for a in 1..=2 {
        coords.push(Coordinate::new(format!("xi{a}"), Weight(vec![0, 1]), Parity::Odd));
    }
    let pitm = Chart::new(2, coords).unwrap();
    let mut q = VecField::zero(&pitm);
    for a in 1..=2 {
        q.set_component(
            pitm.id_of(&format!("x{a}")).unwrap(),
            Expr::var(&pitm, &format!("xi{a}")).unwrap(),
        );
    }

    // tangent lift: T(ΠTM) is a degree-2 weighted algebroid
    let t = lifts::tangent_chart(&pitm);
    let q_t = lifts::tangent_lift_field(&q, &t).unwrap();
    let algebroid = AlgebroidData::new(&t, q_t, 2, 1).unwrap();
    let report = algebroid.verify_weighted().unwrap();
    println!("T(ΠTM) verifies as a degree-2 weighted algebroid: {}", report.passed());

    // sections and the weight of their bracket: r1 + r2 - k
    let one = Expr::one(&t);
    let dx1 = Expr::var(&t, "dx1").unwrap();
    let s1 = Section::new(&algebroid, 1, &[("dxi1", one.clone())]).unwrap();
    let s2 = Section::new(&algebroid, 2, &[("xi1", one.clone()), ("dxi2", dx1)]).unwrap();
    let bracket = section_bracket(&algebroid, &s1, &s2).unwrap();
    println!(
        "[s_1, s_2] has weight {} and reads {}",
        bracket.weight, bracket.field
    );

    // the tower: level 1 is the ordinary de Rham algebroid
    let level1 = algebroid.tower_project(1).unwrap();
    println!(
        "level-1 projection verifies at degree {}: {}",
        level1.degree(),
        level1.verify_weighted().unwrap().passed()
    );
    println!("level-1 field: {}", level1.q());
}
