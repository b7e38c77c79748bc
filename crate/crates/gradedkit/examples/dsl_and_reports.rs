//! The declaration language end to end: parse a document, run its check
//! directives, print the human report and the deterministic JSON, and
//! differentiate a declared groupoid.
//!
//! Run with `cargo run --example dsl_and_reports`.

use gradedkit::dsl::{self, Command, Output};

const SOURCE: &str = r#"
chart F1 arity 1 {
  coord x weight (0) parity even
  coord v weight (1) parity even
}
chart PairF1 arity 1 {
  coord x weight (0) parity even
  coord v weight (1) parity even
  coord Y_x weight (0) parity even
  coord Y_v weight (1) parity even
}
action hG on PairF1 param t {
  v -> t*v
  Y_v -> t*Y_v
}
action hB on F1 param t {
  v -> t*v
}
groupoid pairF1 on PairF1 over F1 {
  target { x -> x + Y_x ; v -> v + Y_v }
  inverse { x -> x + Y_x ; v -> v + Y_v ; Y_x -> -Y_x ; Y_v -> -Y_v }
  mult { x -> x_r ; v -> v_r ; Y_x -> Y_x_l + Y_x_r ; Y_v -> Y_v_l + Y_v_r }
}
weighted wPairF1 groupoid pairF1 action hG base hB
check groupoid pairF1
check weighted_groupoid wPairF1
"#;

fn main() {
    let doc = dsl::parse(SOURCE).unwrap();

    // round trip: the canonical print re-parses to the same canonical text
    let printed = doc.render();
    let reparsed = dsl::parse(&printed).unwrap();
    assert_eq!(printed, reparsed.render());
    println!("canonical form is stable under re-parsing\n");

    match dsl::run(&doc, &Command::Check).unwrap() {
        Output::Report(report) => {
            print!("{report}");
            println!("exit code would be {}\n", report.exit_code());
            println!("JSON:\n{}", report.to_json());
        }
        Output::Text(_) => unreachable!(),
    }

    match dsl::run(
        &doc,
        &Command::Derive {
            name: "pairF1".into(),
        },
    )
    .unwrap()
    {
        Output::Text(text) => println!("\nderived algebroid:\n{text}"),
        Output::Report(_) => unreachable!(),
    }
}
