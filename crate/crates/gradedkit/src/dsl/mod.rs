//! The structure-declaration language.
//!
//! A document is a line-oriented sequence of declarations (charts,
//! actions, expressions, fields, Hamiltonians, lifts, algebroids,
//! groupoids, bi-algebroids, Courant structures) and check directives.
//! Declarations may only reference earlier ones. Printing a parsed
//! document yields canonical text that re-parses to the same document.

mod parse;
mod run;

pub use parse::{parse, ParseError};
pub use run::{render_algebroid, run, Command, Output, RunError};

use crate::algebroids::{AlgebroidData, BiAlgebroidData, CourantData};
use crate::fields::{Ham, VecField};
use crate::grading::Chart;
use crate::groupoids::{GroupoidSpec, WeightedGroupoid};
use crate::lifts::HomAction;
use crate::symalg::{Coeff, Expr, Substitution};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Resolved declarations, by kind and name.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub actions: BTreeMap<String, HomAction>,
    pub exprs: BTreeMap<String, Expr>,
    pub fields: BTreeMap<String, VecField>,
    pub hams: BTreeMap<String, Ham>,
    pub maps: BTreeMap<String, Substitution>,
    pub algebroids: BTreeMap<String, AlgebroidData>,
    pub groupoids: BTreeMap<String, GroupoidSpec>,
    pub weighted: BTreeMap<String, WeightedGroupoid>,
    pub bialgebroids: BTreeMap<String, BiAlgebroidData>,
    pub courants: BTreeMap<String, CourantData>,
}

/// What kind of chart lift a `lift` declaration performs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftKind {
    Tangent,
    Cotangent,
    Multivector,
    Higher(u32),
    Parity(usize),
    Collapse(Vec<usize>),
    Truncate(u32),
}

impl fmt::Display for LiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftKind::Tangent => write!(f, "tangent"),
            LiftKind::Cotangent => write!(f, "cotangent"),
            LiftKind::Multivector => write!(f, "multivector"),
            LiftKind::Higher(k) => write!(f, "higher {k}"),
            LiftKind::Parity(c) => write!(f, "parity {c}"),
            LiftKind::Collapse(cs) => {
                write!(f, "collapse (")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            LiftKind::Truncate(l) => write!(f, "truncate {l}"),
        }
    }
}

/// A check directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Action(String),
    Homological(String),
    Groupoid(String),
    WeightedGroupoid(String),
    Algebroid(String),
    BiAlgebroid(String),
    Sharp(String),
    Courant(String),
    PoissonWeight { weighted: String, ham: String, degree: u32 },
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Action(n) => write!(f, "check action {n}"),
            Check::Homological(n) => write!(f, "check homological {n}"),
            Check::Groupoid(n) => write!(f, "check groupoid {n}"),
            Check::WeightedGroupoid(n) => write!(f, "check weighted_groupoid {n}"),
            Check::Algebroid(n) => write!(f, "check algebroid {n}"),
            Check::BiAlgebroid(n) => write!(f, "check bialgebroid {n}"),
            Check::Sharp(n) => write!(f, "check sharp {n}"),
            Check::Courant(n) => write!(f, "check courant {n}"),
            Check::PoissonWeight {
                weighted,
                ham,
                degree,
            } => write!(f, "check poisson_weight {weighted} {ham} {degree}"),
        }
    }
}

/// One declaration, in document order. The payloads needed for printing
/// are stored here; resolved objects live in the [`Env`].
#[derive(Debug, Clone)]
pub enum Decl {
    Chart {
        name: String,
    },
    Action {
        name: String,
        chart: String,
        param: String,
    },
    ExprDecl {
        name: String,
        chart: String,
    },
    Field {
        name: String,
        chart: String,
    },
    HamDecl {
        name: String,
        chart: String,
    },
    Lift {
        name: String,
        kind: LiftKind,
        of: String,
    },
    MapDecl {
        name: String,
        from: String,
        to: String,
    },
    Algebroid {
        name: String,
        chart: String,
        degree: u32,
        linear: usize,
        field: String,
    },
    Groupoid {
        name: String,
        gamma: String,
        base: String,
    },
    Weighted {
        name: String,
        groupoid: String,
        action: String,
        base_action: String,
    },
    BiAlgebroid {
        name: String,
        of: String,
        poisson: Option<String>,
    },
    Courant {
        name: String,
        of: String,
        lambda: Coeff,
    },
    CheckDecl(Check),
}

/// A parsed, fully-resolved document.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub decls: Vec<Decl>,
    pub env: Env,
}

impl Document {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.decls.iter().filter_map(|d| match d {
            Decl::CheckDecl(c) => Some(c),
            _ => None,
        })
    }

    /// Canonical text of the document; parsing it back yields a document
    /// with identical canonical text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for d in &self.decls {
            self.render_decl(d, &mut out);
        }
        out
    }

    fn render_decl(&self, d: &Decl, out: &mut String) {
        use std::fmt::Write;
        match d {
            Decl::Chart { name } => {
                let chart = &self.env.charts[name];
                let mut inferred = crate::grading::Weight::zero(chart.arity());
                for c in chart.coords() {
                    if !c.formal {
                        inferred = inferred.cmax(&c.weight);
                    }
                }
                if chart.degree_bound() != &inferred {
                    writeln!(
                        out,
                        "chart {name} arity {} bound {} {{",
                        chart.arity(),
                        chart.degree_bound()
                    )
                    .unwrap();
                } else {
                    writeln!(out, "chart {name} arity {} {{", chart.arity()).unwrap();
                }
                for c in chart.coords() {
                    if c.formal {
                        continue;
                    }
                    writeln!(out, "  coord {} weight {} parity {}", c.name, c.weight, c.parity)
                        .unwrap();
                }
                for fdecl in chart.funcs() {
                    write!(out, "  func {} (", fdecl.name).unwrap();
                    for (i, a) in fdecl.args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        write!(out, "{}", chart.coord(*a).name).unwrap();
                    }
                    writeln!(out, ")").unwrap();
                }
                writeln!(out, "}}").unwrap();
            }
            Decl::Action { name, chart, param } => {
                let action = &self.env.actions[name];
                writeln!(out, "action {name} on {chart} param {param} {{").unwrap();
                let src = self.env.charts[chart].clone();
                for (i, c) in src.coords().iter().enumerate() {
                    if c.formal {
                        continue;
                    }
                    let img = action.image(i);
                    let identity = Expr::var(action.extended_chart(), &c.name).ok();
                    if identity.as_ref() == Some(img) {
                        continue;
                    }
                    writeln!(out, "  {} -> {}", c.name, img).unwrap();
                }
                writeln!(out, "}}").unwrap();
            }
            Decl::ExprDecl { name, chart } => {
                writeln!(out, "expr {name} on {chart} = {}", self.env.exprs[name]).unwrap();
            }
            Decl::Field { name, chart } => {
                let field = &self.env.fields[name];
                writeln!(out, "field {name} on {chart} {{").unwrap();
                let src = self.env.charts[chart].clone();
                for (c, comp) in field.components() {
                    writeln!(out, "  {} -> {}", src.coord(c).name, comp).unwrap();
                }
                writeln!(out, "}}").unwrap();
            }
            Decl::HamDecl { name, chart } => {
                writeln!(out, "ham {name} on {chart} = {}", self.env.hams[name]).unwrap();
            }
            Decl::Lift { name, kind, of } => {
                writeln!(out, "lift {name} {kind} of {of}").unwrap();
            }
            Decl::MapDecl { name, from, to } => {
                let sub = &self.env.maps[name];
                writeln!(out, "map {name} from {from} to {to} {{").unwrap();
                let src = self.env.charts[from].clone();
                for (i, c) in src.coords().iter().enumerate() {
                    if c.formal {
                        continue;
                    }
                    writeln!(out, "  {} -> {}", c.name, sub.image(i)).unwrap();
                }
                writeln!(out, "}}").unwrap();
            }
            Decl::Algebroid {
                name,
                chart,
                degree,
                linear,
                field,
            } => {
                writeln!(
                    out,
                    "algebroid {name} on {chart} degree {degree} linear {linear} field {field}"
                )
                .unwrap();
            }
            Decl::Groupoid { name, gamma, base } => {
                let spec = &self.env.groupoids[name];
                writeln!(out, "groupoid {name} on {gamma} over {base} {{").unwrap();
                let g = spec.gamma().clone();
                let b = spec.base().clone();
                writeln!(out, "  source {{").unwrap();
                for (i, c) in b.coords().iter().enumerate() {
                    writeln!(out, "    {} -> {}", c.name, spec.source_image(i)).unwrap();
                }
                writeln!(out, "  }}").unwrap();
                writeln!(out, "  target {{").unwrap();
                for (i, c) in b.coords().iter().enumerate() {
                    writeln!(out, "    {} -> {}", c.name, spec.target_image(i)).unwrap();
                }
                writeln!(out, "  }}").unwrap();
                if let Some(inv) = spec.inv() {
                    writeln!(out, "  inverse {{").unwrap();
                    for (i, c) in g.coords().iter().enumerate() {
                        if c.formal {
                            continue;
                        }
                        writeln!(out, "    {} -> {}", c.name, inv.image(i)).unwrap();
                    }
                    writeln!(out, "  }}").unwrap();
                }
                writeln!(out, "  mult {{").unwrap();
                for (i, c) in g.coords().iter().enumerate() {
                    if c.formal {
                        continue;
                    }
                    writeln!(out, "    {} -> {}", c.name, spec.composable().mult.image(i))
                        .unwrap();
                }
                writeln!(out, "  }}").unwrap();
                writeln!(out, "}}").unwrap();
            }
            Decl::Weighted {
                name,
                groupoid,
                action,
                base_action,
            } => {
                writeln!(
                    out,
                    "weighted {name} groupoid {groupoid} action {action} base {base_action}"
                )
                .unwrap();
            }
            Decl::BiAlgebroid { name, of, poisson } => match poisson {
                Some(p) => writeln!(out, "bialgebroid {name} of {of} poisson {p}").unwrap(),
                None => writeln!(out, "bialgebroid {name} of {of}").unwrap(),
            },
            Decl::Courant { name, of, lambda } => {
                writeln!(out, "courant {name} of {of} lambda {lambda}").unwrap();
            }
            Decl::CheckDecl(c) => {
                use std::fmt::Write as _;
                writeln!(out, "{c}").unwrap();
            }
        }
    }
}
