//! Command dispatch over a parsed document.

use super::{Check, Document};
use crate::groupoids::{self, lie_functor};
use crate::lifts;
use crate::report::{CheckEntry, Report};
use crate::symalg::Expr;
use std::fmt;

#[derive(Debug, Clone)]
pub enum Command {
    /// Run every check directive.
    Check,
    /// Differentiate a groupoid and emit the algebroid as declarations.
    Derive { name: String },
    /// Lift a chart or an action.
    Lift { name: String, kind: String, order: Option<u32> },
    /// Derived bracket of three named fields.
    Bracket { q: String, a: String, b: String },
    /// Homogenising coordinate change for an action.
    Homogenize { name: String },
}

#[derive(Debug)]
pub enum RunError {
    MissingDeclaration(String),
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::MissingDeclaration(n) => write!(f, "no declaration named `{n}`"),
            RunError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for RunError {}

pub enum Output {
    Report(Report),
    Text(String),
}

fn fail<E: fmt::Display>(e: E) -> RunError {
    RunError::Failed(e.to_string())
}

pub fn run(doc: &Document, cmd: &Command) -> Result<Output, RunError> {
    match cmd {
        Command::Check => Ok(Output::Report(run_checks(doc)?)),
        Command::Derive { name } => run_derive(doc, name),
        Command::Lift { name, kind, order } => run_lift(doc, name, kind, *order),
        Command::Bracket { q, a, b } => run_bracket(doc, q, a, b),
        Command::Homogenize { name } => run_homogenize(doc, name),
    }
}

fn expr_residuals(items: &[(String, Expr)]) -> Vec<(String, Expr)> {
    items.to_vec()
}

fn run_checks(doc: &Document) -> Result<Report, RunError> {
    let mut report = Report::new();
    for check in doc.checks() {
        let mut entry = CheckEntry::new(check.to_string());
        match check {
            Check::Action(n) => {
                let action = &doc.env.actions[n];
                let rep = action.verify().map_err(fail)?;
                entry.residuals("unit", rep.unit_residuals.clone(), |e: &Expr| e.is_zero());
                entry.residuals(
                    "composition",
                    rep.composition_residuals.clone(),
                    |e: &Expr| e.is_zero(),
                );
            }
            Check::Homological(n) => {
                let field = &doc.env.fields[n];
                let rep = field.is_homological().map_err(fail)?;
                let comps: Vec<(String, Expr)> = field
                    .chart()
                    .coords()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.name.clone(), rep.residual.component(i)))
                    .collect();
                entry.residuals("QQ", comps, |e: &Expr| e.is_zero());
            }
            Check::Groupoid(n) => {
                let spec = &doc.env.groupoids[n];
                let rep = spec.verify().map_err(fail)?;
                let z = |e: &Expr| e.is_zero();
                entry.residuals("composability", expr_residuals(&rep.composability), z);
                entry.residuals("source_of_mult", expr_residuals(&rep.source_of_mult), z);
                entry.residuals("target_of_mult", expr_residuals(&rep.target_of_mult), z);
                entry.residuals("left_unit", expr_residuals(&rep.left_unit), z);
                entry.residuals("right_unit", expr_residuals(&rep.right_unit), z);
                match (&rep.left_inverse, &rep.right_inverse, &rep.inv_source_target) {
                    (Some(li), Some(ri), Some(ist)) => {
                        entry.residuals("left_inverse", expr_residuals(li), z);
                        entry.residuals("right_inverse", expr_residuals(ri), z);
                        entry.residuals("inv_source_target", expr_residuals(ist), z);
                    }
                    _ => entry.skip("inverse laws (no inversion supplied)"),
                }
                match &rep.associativity {
                    Some(a) => entry.residuals("associativity", expr_residuals(a), z),
                    None => entry.skip("associativity"),
                }
            }
            Check::WeightedGroupoid(n) => {
                let w = &doc.env.weighted[n];
                let rep = w.verify().map_err(fail)?;
                let z = |e: &Expr| e.is_zero();
                if !rep.action_gamma_ok {
                    entry.fail("action_gamma", "monoid laws fail");
                }
                if !rep.action_base_ok {
                    entry.fail("action_base", "monoid laws fail");
                }
                entry.identities_checked += 2;
                entry.residuals("source", expr_residuals(&rep.source_intertwine), z);
                entry.residuals("target", expr_residuals(&rep.target_intertwine), z);
                entry.residuals("unit", expr_residuals(&rep.unit_compat), z);
                entry.residuals("mult", expr_residuals(&rep.multiplicativity), z);
                entry.residuals("composable", expr_residuals(&rep.composable_compat), z);
            }
            Check::Algebroid(n) => {
                let a = &doc.env.algebroids[n];
                let rep = a.verify_weighted().map_err(fail)?;
                let z = |e: &Expr| e.is_zero();
                let field_residuals = |f: &crate::fields::VecField| -> Vec<(String, Expr)> {
                    f.chart()
                        .coords()
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (c.name.clone(), f.component(i)))
                        .collect()
                };
                entry.residuals("QQ", field_residuals(&rep.homological), z);
                entry.residuals("weight", field_residuals(&rep.weight_residual), z);
                entry.residuals("hat_commutation", expr_residuals(&rep.h_commutation), z);
                entry.residuals("linear_commutation", expr_residuals(&rep.l_commutation), z);
            }
            Check::BiAlgebroid(n) => {
                let b = &doc.env.bialgebroids[n];
                let rep = b.verify().map_err(fail)?;
                if !rep.qq.is_zero() {
                    entry.fail("QQ", rep.qq.expr());
                }
                if !rep.ss.is_zero() {
                    entry.fail("SS", rep.ss.expr());
                }
                if !rep.qs.is_zero() {
                    entry.fail("QS", rep.qs.expr());
                }
                entry.identities_checked += 3;
                entry.audit(rep.q_weight.clone());
                entry.audit(rep.s_weight.clone());
            }
            Check::Sharp(n) => {
                let b = &doc.env.bialgebroids[n];
                let rep = b.sharp_map().map_err(fail)?;
                entry.residuals(
                    "q_morphism",
                    expr_residuals(&rep.residuals),
                    |e: &Expr| e.is_zero(),
                );
                entry.audit(rep.weight_audit.clone());
            }
            Check::Courant(n) => {
                let c = &doc.env.courants[n];
                let rep = c.verify().map_err(fail)?;
                if !rep.theta_theta.is_zero() {
                    entry.fail("theta_theta", rep.theta_theta.expr());
                }
                entry.identities_checked += 1;
                entry.audit(rep.theta_weight.clone());
                entry.audit(rep.pairing_weight.clone());
            }
            Check::PoissonWeight {
                weighted,
                ham,
                degree,
            } => {
                let w = &doc.env.weighted[weighted];
                let h = &doc.env.hams[ham];
                let rep = groupoids::poisson_weight_audit(w, h, *degree).map_err(fail)?;
                if !rep.schouten.is_zero() {
                    entry.fail("schouten", rep.schouten.expr());
                }
                entry.identities_checked += 1;
                entry.audit(rep.weight_audit.clone());
                entry.audit(rep.sharp_audit.clone());
                entry.skip("multiplicativity (needs elimination ideals)");
            }
        }
        report.push(entry);
    }
    Ok(report)
}

/// Emit the Lie algebroid of a groupoid as a declaration block.
fn run_derive(doc: &Document, name: &str) -> Result<Output, RunError> {
    let spec = doc
        .env
        .groupoids
        .get(name)
        .ok_or_else(|| RunError::MissingDeclaration(name.to_string()))?;
    let a = lie_functor(spec).map_err(fail)?;
    Ok(Output::Text(render_algebroid(name, &a)))
}

/// Canonical declaration text for an algebroid (used by `derive` and by
/// the tower-comparison tests).
pub fn render_algebroid(name: &str, a: &crate::algebroids::AlgebroidData) -> String {
    use std::fmt::Write;
    let chart = a.chart();
    let mut out = String::new();
    writeln!(out, "chart A_{name} arity {} {{", chart.arity()).unwrap();
    for c in chart.coords() {
        if c.formal {
            continue;
        }
        writeln!(out, "  coord {} weight {} parity {}", c.name, c.weight, c.parity).unwrap();
    }
    for fdecl in chart.funcs() {
        write!(out, "  func {} (", fdecl.name).unwrap();
        for (i, arg) in fdecl.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}", chart.coord(*arg).name).unwrap();
        }
        writeln!(out, ")").unwrap();
    }
    writeln!(out, "}}").unwrap();
    writeln!(out, "field Q_{name} on A_{name} {{").unwrap();
    for (c, comp) in a.q().components() {
        writeln!(out, "  {} -> {}", chart.coord(c).name, comp).unwrap();
    }
    writeln!(out, "}}").unwrap();
    writeln!(
        out,
        "algebroid {name}_algebroid on A_{name} degree {} linear {} field Q_{name}",
        a.degree(),
        a.linear_component()
    )
    .unwrap();
    out
}

fn run_lift(doc: &Document, name: &str, kind: &str, order: Option<u32>) -> Result<Output, RunError> {
    if let Some(chart) = doc.env.charts.get(name) {
        let lifted = match kind {
            "tangent" => lifts::tangent_chart(chart),
            "cotangent" => lifts::cotangent_chart(chart),
            "multivector" => lifts::multivector_chart(chart),
            "higher" => {
                let k = order.ok_or_else(|| fail("`higher` needs an order"))?;
                lifts::higher_tangent_chart(chart, k)
            }
            other => return Err(fail(format!("unknown lift kind `{other}`"))),
        };
        let mut out = String::new();
        use std::fmt::Write;
        writeln!(out, "chart {name}_{kind} arity {} {{", lifted.arity()).unwrap();
        for c in lifted.coords() {
            if c.formal {
                continue;
            }
            writeln!(out, "  coord {} weight {} parity {}", c.name, c.weight, c.parity).unwrap();
        }
        writeln!(out, "}}").unwrap();
        return Ok(Output::Text(out));
    }
    if let Some(action) = doc.env.actions.get(name) {
        let lifted = match kind {
            "tangent" => lifts::tangent_lift_action(action).map_err(fail)?,
            other => {
                return Err(fail(format!(
                    "actions lift along `tangent` only, not `{other}`"
                )))
            }
        };
        let mut out = String::new();
        use std::fmt::Write;
        writeln!(
            out,
            "action {name}_{kind} on <{}> param {} {{",
            "tangent chart",
            lifted.param_name()
        )
        .unwrap();
        for (i, c) in lifted.chart().coords().iter().enumerate() {
            if c.formal {
                continue;
            }
            writeln!(out, "  {} -> {}", c.name, lifted.image(i)).unwrap();
        }
        writeln!(out, "}}").unwrap();
        return Ok(Output::Text(out));
    }
    Err(RunError::MissingDeclaration(name.to_string()))
}

fn run_bracket(doc: &Document, q: &str, a: &str, b: &str) -> Result<Output, RunError> {
    let get = |n: &str| {
        doc.env
            .fields
            .get(n)
            .ok_or_else(|| RunError::MissingDeclaration(n.to_string()))
    };
    let result = crate::fields::derived_bracket(get(q)?, get(a)?, get(b)?).map_err(fail)?;
    Ok(Output::Text(format!("{result}\n")))
}

fn run_homogenize(doc: &Document, name: &str) -> Result<Output, RunError> {
    let action = doc
        .env
        .actions
        .get(name)
        .ok_or_else(|| RunError::MissingDeclaration(name.to_string()))?;
    match action.homogenize() {
        Ok(change) => {
            let mut out = String::new();
            use std::fmt::Write;
            let chart = action.chart();
            writeln!(out, "map homogenize_{name} from <chart> to <chart> {{").unwrap();
            for (i, c) in chart.coords().iter().enumerate() {
                if c.formal {
                    continue;
                }
                writeln!(out, "  {} -> {}", c.name, change.image(i)).unwrap();
            }
            writeln!(out, "}}").unwrap();
            // verified against the canonical action
            let residuals = action.verify_change(&change).map_err(fail)?;
            if residuals.iter().any(|(_, e)| !e.is_zero()) {
                return Err(fail("homogenization failed its own verification"));
            }
            Ok(Output::Text(out))
        }
        Err(e) => Err(fail(format!("refused: {e}"))),
    }
}
