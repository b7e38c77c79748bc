//! Parser for the declaration language: a hand-rolled lexer and recursive
//! descent with line/column diagnostics.

use super::{Check, Decl, Document, LiftKind};
use crate::algebroids::{
    bi_algebroid_from_algebroid, courant_from_bi_algebroid, triangular_bi_algebroid,
    AlgebroidData,
};
use crate::fields::{Ham, VecField};
use crate::grading::{Chart, Coordinate, Parity, Weight};
use crate::groupoids::{GroupoidBuilder, WeightedGroupoid};
use crate::lifts::{self, HomAction};
use crate::symalg::{Coeff, Expr, FnApp, Substitution};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Arrow,
    Eq,
    Newline,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let bytes: Vec<char> = line.chars().collect();
        let mut i = 0usize;
        let mut emitted = false;
        while i < bytes.len() {
            let c = bytes[i];
            let col = i + 1;
            let mut push = |t: Tok, n: usize| {
                out.push(Spanned {
                    tok: t,
                    line: lineno + 1,
                    col,
                });
                n
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            emitted = true;
            i += match c {
                '(' => push(Tok::LParen, 1),
                ')' => push(Tok::RParen, 1),
                '{' => push(Tok::LBrace, 1),
                '}' => push(Tok::RBrace, 1),
                ',' => push(Tok::Comma, 1),
                '+' => push(Tok::Plus, 1),
                '*' => push(Tok::Star, 1),
                '^' => push(Tok::Caret, 1),
                '/' => push(Tok::Slash, 1),
                '=' => push(Tok::Eq, 1),
                ';' => push(Tok::Newline, 1),
                '-' => {
                    if i + 1 < bytes.len() && bytes[i + 1] == '>' {
                        push(Tok::Arrow, 2)
                    } else {
                        push(Tok::Minus, 1)
                    }
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    let mut j = i;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = bytes[start..j].iter().collect();
                    push(Tok::Int(s.parse().expect("digits")), j - start)
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let start = i;
                    let mut j = i;
                    while j < bytes.len() && (bytes[j].is_alphanumeric() || bytes[j] == '_') {
                        j += 1;
                    }
                    let s: String = bytes[start..j].iter().collect();
                    push(Tok::Ident(s), j - start)
                }
                other => {
                    return Err(ParseError {
                        line: lineno + 1,
                        col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
        }
        if emitted {
            out.push(Spanned {
                tok: Tok::Newline,
                line: lineno + 1,
                col: bytes.len() + 1,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn eat_newlines(&mut self) {
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Newline)) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(s) if s.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(s) => {
                let got = s.tok.clone();
                self.err(format!("expected {tok:?}, found {got:?}"))
            }
            None => self.err(format!("expected {tok:?}, found end of input")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => {
                self.pos += 1;
                Ok(s)
            }
            Some(s) => self.err(format!("expected identifier, found {:?}", s.tok)),
            None => self.err("expected identifier, found end of input"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let name = self.ident()?;
        if name == kw {
            Ok(())
        } else {
            self.pos -= 1;
            self.err(format!("expected `{kw}`, found `{name}`"))
        }
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        match self.peek().cloned() {
            Some(Spanned { tok: Tok::Int(n), .. }) => {
                self.pos += 1;
                n.try_into()
                    .map_err(|_| ParseError {
                        line: 0,
                        col: 0,
                        message: "number too large".into(),
                    })
            }
            _ => self.err("expected a natural number"),
        }
    }

    fn rational(&mut self) -> Result<Coeff, ParseError> {
        let neg = if matches!(self.peek().map(|s| &s.tok), Some(Tok::Minus)) {
            self.pos += 1;
            true
        } else {
            false
        };
        let n = match self.peek().cloned() {
            Some(Spanned { tok: Tok::Int(n), .. }) => {
                self.pos += 1;
                n
            }
            _ => return self.err("expected a rational number"),
        };
        let mut q = Coeff::from(n);
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Slash)) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Spanned { tok: Tok::Int(d), .. }) => {
                    self.pos += 1;
                    q /= Coeff::from(d);
                }
                _ => return self.err("expected a denominator"),
            }
        }
        Ok(if neg { -q } else { q })
    }

    // expression grammar: sum of products of powers
    fn expr(&mut self, chart: &Arc<Chart>) -> Result<Expr, ParseError> {
        let mut acc = self.term(chart)?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term(chart)?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term(chart)?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, chart: &Arc<Chart>) -> Result<Expr, ParseError> {
        let mut acc = self.factor(chart)?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Star)) {
            self.pos += 1;
            acc = acc.mul(&self.factor(chart)?);
        }
        Ok(acc)
    }

    fn factor(&mut self, chart: &Arc<Chart>) -> Result<Expr, ParseError> {
        let base = self.atom(chart)?;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Caret)) {
            self.pos += 1;
            let e = self.nat()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self, chart: &Arc<Chart>) -> Result<Expr, ParseError> {
        match self.peek().cloned().map(|s| s.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor(chart)?.neg())
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let mut q = Coeff::from(n);
                if matches!(self.peek().map(|s| &s.tok), Some(Tok::Slash)) {
                    self.pos += 1;
                    match self.peek().cloned().map(|s| s.tok) {
                        Some(Tok::Int(d)) => {
                            self.pos += 1;
                            q /= Coeff::from(d);
                        }
                        _ => return self.err("expected a denominator"),
                    }
                }
                Ok(Expr::constant(chart, q))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr(chart)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "D" && matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
                    // D(f, x, ...)(args)
                    self.pos += 1;
                    let fname = self.ident()?;
                    let mut derivs = Vec::new();
                    while matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
                        self.pos += 1;
                        let d = self.ident()?;
                        derivs.push(self.coord_id(chart, &d)?);
                    }
                    self.expect(Tok::RParen)?;
                    let args = self.call_args(chart)?;
                    derivs.sort_unstable();
                    return Ok(Expr::fn_app(
                        chart,
                        FnApp {
                            name: fname,
                            args,
                            derivs,
                        },
                    ));
                }
                if chart.fn_id(&name).is_some()
                    && matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen))
                {
                    let args = self.call_args(chart)?;
                    return Ok(Expr::fn_app(
                        chart,
                        FnApp {
                            name,
                            args,
                            derivs: vec![],
                        },
                    ));
                }
                match Expr::var(chart, &name) {
                    Ok(e) => Ok(e),
                    Err(_) => {
                        self.pos -= 1;
                        self.err(format!("unknown identifier `{name}`"))
                    }
                }
            }
            other => self.err(format!("expected an expression, found {other:?}")),
        }
    }

    fn call_args(&mut self, chart: &Arc<Chart>) -> Result<Vec<usize>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            let name = self.ident()?;
            args.push(self.coord_id(chart, &name)?);
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return self.err("expected `,` or `)` in argument list"),
            }
        }
    }

    fn coord_id(&self, chart: &Arc<Chart>, name: &str) -> Result<usize, ParseError> {
        chart
            .id_of(name)
            .ok_or_else(|| {
                let (line, col) = self.here();
                ParseError {
                    line,
                    col,
                    message: format!("unknown coordinate `{name}`"),
                }
            })
    }

    /// `{ name -> expr ... }` with newline/; separators.
    fn map_block(&mut self, chart: &Arc<Chart>) -> Result<BTreeMap<String, Expr>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = BTreeMap::new();
        loop {
            self.eat_newlines();
            if matches!(self.peek().map(|s| &s.tok), Some(Tok::RBrace)) {
                self.pos += 1;
                return Ok(out);
            }
            let name = self.ident()?;
            self.expect(Tok::Arrow)?;
            let e = self.expr(chart)?;
            if out.insert(name.clone(), e).is_some() {
                return self.err(format!("duplicate entry `{name}`"));
            }
        }
    }

    fn weight(&mut self, arity: usize) -> Result<Weight, ParseError> {
        self.expect(Tok::LParen)?;
        let mut comps = Vec::new();
        loop {
            comps.push(self.nat()?);
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected `,` or `)` in weight"),
            }
        }
        if comps.len() != arity {
            return self.err(format!(
                "weight has {} components, chart arity is {arity}",
                comps.len()
            ));
        }
        Ok(Weight(comps))
    }
}

fn lookup<'a, T>(
    map: &'a BTreeMap<String, T>,
    kind: &str,
    name: &str,
    p: &Parser,
) -> Result<&'a T, ParseError> {
    map.get(name).ok_or_else(|| {
        let (line, col) = p.here();
        ParseError {
            line,
            col,
            message: format!("unknown {kind} `{name}`"),
        }
    })
}

/// Parse a document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut doc = Document::default();

    loop {
        p.eat_newlines();
        if p.peek().is_none() {
            return Ok(doc);
        }
        let kw = p.ident()?;
        match kw.as_str() {
            "chart" => parse_chart(&mut p, &mut doc)?,
            "action" => parse_action(&mut p, &mut doc)?,
            "expr" => parse_expr_decl(&mut p, &mut doc)?,
            "field" => parse_field(&mut p, &mut doc)?,
            "ham" => parse_ham(&mut p, &mut doc)?,
            "lift" => parse_lift(&mut p, &mut doc)?,
            "map" => parse_map(&mut p, &mut doc)?,
            "algebroid" => parse_algebroid(&mut p, &mut doc)?,
            "groupoid" => parse_groupoid(&mut p, &mut doc)?,
            "weighted" => parse_weighted(&mut p, &mut doc)?,
            "bialgebroid" => parse_bialgebroid(&mut p, &mut doc)?,
            "courant" => parse_courant(&mut p, &mut doc)?,
            "check" => parse_check(&mut p, &mut doc)?,
            other => {
                p.pos -= 1;
                return p.err(format!("unknown declaration `{other}`"));
            }
        }
    }
}

fn parse_chart(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("arity")?;
    let arity = p.nat()? as usize;
    let declared_bound =
        if matches!(p.peek().map(|s| &s.tok), Some(Tok::Ident(w)) if w == "bound") {
            p.pos += 1;
            Some(p.weight(arity)?)
        } else {
            None
        };
    p.expect(Tok::LBrace)?;
    let mut coords = Vec::new();
    let mut funcs: Vec<(String, Vec<String>)> = Vec::new();
    loop {
        p.eat_newlines();
        if matches!(p.peek().map(|s| &s.tok), Some(Tok::RBrace)) {
            p.pos += 1;
            break;
        }
        let kw = p.ident()?;
        match kw.as_str() {
            "coord" => {
                let cname = p.ident()?;
                p.keyword("weight")?;
                let w = p.weight(arity)?;
                p.keyword("parity")?;
                let par = match p.ident()?.as_str() {
                    "even" => Parity::Even,
                    "odd" => Parity::Odd,
                    other => return p.err(format!("expected parity, found `{other}`")),
                };
                coords.push(Coordinate::new(cname, w, par));
            }
            "func" => {
                let fname = p.ident()?;
                p.expect(Tok::LParen)?;
                let mut args = Vec::new();
                loop {
                    args.push(p.ident()?);
                    match p.peek().map(|s| s.tok.clone()) {
                        Some(Tok::Comma) => p.pos += 1,
                        Some(Tok::RParen) => {
                            p.pos += 1;
                            break;
                        }
                        _ => return p.err("expected `,` or `)`"),
                    }
                }
                funcs.push((fname, args));
            }
            other => return p.err(format!("expected `coord` or `func`, found `{other}`")),
        }
    }
    let mut chart = Chart::with_bound(arity, coords, declared_bound).map_err(|e| {
        let (line, col) = p.here();
        ParseError {
            line,
            col,
            message: e.to_string(),
        }
    })?;
    for (fname, args) in funcs {
        let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        chart = chart.with_func(fname, &arg_refs).map_err(|e| {
            let (line, col) = p.here();
            ParseError {
                line,
                col,
                message: e.to_string(),
            }
        })?;
    }
    if doc.env.charts.insert(name.clone(), chart).is_some() {
        return p.err(format!("chart `{name}` is declared twice"));
    }
    doc.decls.push(Decl::Chart { name });
    Ok(())
}

fn locate<T, E: fmt::Display>(p: &Parser, r: Result<T, E>) -> Result<T, ParseError> {
    r.map_err(|e| {
        let (line, col) = p.here();
        ParseError {
            line,
            col,
            message: e.to_string(),
        }
    })
}

fn parse_action(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let chart_name = p.ident()?;
    let chart = lookup(&doc.env.charts, "chart", &chart_name, p)?.clone();
    p.keyword("param")?;
    let param = p.ident()?;
    let ext = chart.extend_params(&[&param]);
    let map = p.map_block(&ext)?;
    let action = locate(p, HomAction::new(&chart, &param, &map))?;
    doc.env.actions.insert(name.clone(), action);
    doc.decls.push(Decl::Action {
        name,
        chart: chart_name,
        param,
    });
    Ok(())
}

fn parse_expr_decl(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let chart_name = p.ident()?;
    let chart = lookup(&doc.env.charts, "chart", &chart_name, p)?.clone();
    p.expect(Tok::Eq)?;
    let e = p.expr(&chart)?;
    doc.env.exprs.insert(name.clone(), e);
    doc.decls.push(Decl::ExprDecl {
        name,
        chart: chart_name,
    });
    Ok(())
}

fn parse_field(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let chart_name = p.ident()?;
    let chart = lookup(&doc.env.charts, "chart", &chart_name, p)?.clone();
    let map = p.map_block(&chart)?;
    let mut field = VecField::zero(&chart);
    for (cname, comp) in map {
        let id = p.coord_id(&chart, &cname)?;
        field.set_component(id, comp);
    }
    doc.env.fields.insert(name.clone(), field);
    doc.decls.push(Decl::Field {
        name,
        chart: chart_name,
    });
    Ok(())
}

fn parse_ham(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let chart_name = p.ident()?;
    let chart = lookup(&doc.env.charts, "chart", &chart_name, p)?.clone();
    p.expect(Tok::Eq)?;
    let e = p.expr(&chart)?;
    let ham = locate(p, Ham::new(e))?;
    doc.env.hams.insert(name.clone(), ham);
    doc.decls.push(Decl::HamDecl {
        name,
        chart: chart_name,
    });
    Ok(())
}

fn parse_lift(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    let kind_kw = p.ident()?;
    let kind = match kind_kw.as_str() {
        "tangent" => LiftKind::Tangent,
        "cotangent" => LiftKind::Cotangent,
        "multivector" => LiftKind::Multivector,
        "higher" => LiftKind::Higher(p.nat()?),
        "parity" => LiftKind::Parity(p.nat()? as usize),
        "truncate" => LiftKind::Truncate(p.nat()?),
        "collapse" => {
            p.expect(Tok::LParen)?;
            let mut comps = Vec::new();
            loop {
                comps.push(p.nat()? as usize);
                match p.peek().map(|s| s.tok.clone()) {
                    Some(Tok::Comma) => p.pos += 1,
                    Some(Tok::RParen) => {
                        p.pos += 1;
                        break;
                    }
                    _ => return p.err("expected `,` or `)`"),
                }
            }
            LiftKind::Collapse(comps)
        }
        other => return p.err(format!("unknown lift kind `{other}`")),
    };
    p.keyword("of")?;
    let of = p.ident()?;
    let src = lookup(&doc.env.charts, "chart", &of, p)?.clone();
    let lifted = match &kind {
        LiftKind::Tangent => lifts::tangent_chart(&src),
        LiftKind::Cotangent => lifts::cotangent_chart(&src),
        LiftKind::Multivector => lifts::multivector_chart(&src),
        LiftKind::Higher(k) => lifts::higher_tangent_chart(&src, *k),
        LiftKind::Parity(c) => locate(p, lifts::parity_reverse(&src, *c))?,
        LiftKind::Collapse(cs) => lifts::collapse_weights(&src, cs),
        LiftKind::Truncate(l) => lifts::truncate_chart(&src, *l).0,
    };
    if doc.env.charts.insert(name.clone(), lifted).is_some() {
        return p.err(format!("chart `{name}` is declared twice"));
    }
    doc.decls.push(Decl::Lift { name, kind, of });
    Ok(())
}

fn parse_map(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("from")?;
    let from = p.ident()?;
    let src = lookup(&doc.env.charts, "chart", &from, p)?.clone();
    p.keyword("to")?;
    let to = p.ident()?;
    let tgt = lookup(&doc.env.charts, "chart", &to, p)?.clone();
    let map = p.map_block(&tgt)?;
    let sub = locate(p, Substitution::new(&src, &tgt, &map))?;
    doc.env.maps.insert(name.clone(), sub);
    doc.decls.push(Decl::MapDecl { name, from, to });
    Ok(())
}

fn parse_algebroid(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let chart_name = p.ident()?;
    let chart = lookup(&doc.env.charts, "chart", &chart_name, p)?.clone();
    p.keyword("degree")?;
    let degree = p.nat()?;
    p.keyword("linear")?;
    let linear = p.nat()? as usize;
    p.keyword("field")?;
    let field_name = p.ident()?;
    let field = lookup(&doc.env.fields, "field", &field_name, p)?.clone();
    let data = locate(p, AlgebroidData::new(&chart, field, degree, linear))?;
    doc.env.algebroids.insert(name.clone(), data);
    doc.decls.push(Decl::Algebroid {
        name,
        chart: chart_name,
        degree,
        linear,
        field: field_name,
    });
    Ok(())
}

fn parse_groupoid(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("on")?;
    let gamma_name = p.ident()?;
    let gamma = lookup(&doc.env.charts, "chart", &gamma_name, p)?.clone();
    p.keyword("over")?;
    let base_name = p.ident()?;
    let base = lookup(&doc.env.charts, "chart", &base_name, p)?.clone();
    p.expect(Tok::LBrace)?;

    let mut target: Option<BTreeMap<String, Expr>> = None;
    let mut inverse: Option<BTreeMap<String, Expr>> = None;
    let mut mult: Option<BTreeMap<String, Expr>> = None;
    let mut builder: Option<GroupoidBuilder> = None;

    loop {
        p.eat_newlines();
        if matches!(p.peek().map(|s| &s.tok), Some(Tok::RBrace)) {
            p.pos += 1;
            break;
        }
        let kw = p.ident()?;
        match kw.as_str() {
            "source" => {
                // must map each base coordinate to the gamma coordinate of
                // the same name (source-adapted charts)
                let block = p.map_block(&gamma)?;
                for (b, img) in &block {
                    let expect = locate(p, Expr::var(&gamma, b))?;
                    if *img != expect {
                        return p.err(format!(
                            "source block must send `{b}` to the arrow coordinate of the same name"
                        ));
                    }
                }
            }
            "unit" => {
                // validated structurally: base block to itself, fibre to 0
                let block = p.map_block(&base)?;
                for (g, img) in &block {
                    let ok = if base.id_of(g).is_some() {
                        *img == locate(p, Expr::var(&base, g))?
                    } else {
                        img.is_zero()
                    };
                    if !ok {
                        return p.err(format!(
                            "unit block must send `{g}` to itself on the base and 0 on the fibre"
                        ));
                    }
                }
            }
            "target" => {
                if builder.is_some() {
                    return p.err("`target` must come before `mult`");
                }
                target = Some(p.map_block(&gamma)?);
            }
            "inverse" => {
                if builder.is_some() {
                    return p.err("`inverse` must come before `mult`");
                }
                inverse = Some(p.map_block(&gamma)?);
            }
            "mult" => {
                let t = target.clone().unwrap_or_default();
                let b = locate(p, GroupoidBuilder::new(&gamma, &base, &t, inverse.as_ref()))?;
                let comp = b.composable_chart().clone();
                mult = Some(p.map_block(&comp)?);
                builder = Some(b);
            }
            other => {
                return p.err(format!(
                    "expected `source`, `target`, `unit`, `inverse` or `mult`, found `{other}`"
                ))
            }
        }
    }
    let (Some(builder), Some(mult)) = (builder, mult) else {
        return p.err("groupoid block needs a `mult` sub-block (after `target`/`inverse`)");
    };
    let spec = locate(p, builder.finish(&mult))?;
    doc.env.groupoids.insert(name.clone(), spec);
    doc.decls.push(Decl::Groupoid {
        name,
        gamma: gamma_name,
        base: base_name,
    });
    Ok(())
}

fn parse_weighted(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("groupoid")?;
    let gname = p.ident()?;
    let spec = lookup(&doc.env.groupoids, "groupoid", &gname, p)?.clone();
    p.keyword("action")?;
    let aname = p.ident()?;
    let action = lookup(&doc.env.actions, "action", &aname, p)?.clone();
    p.keyword("base")?;
    let bname = p.ident()?;
    let base_action = lookup(&doc.env.actions, "action", &bname, p)?.clone();
    doc.env
        .weighted
        .insert(name.clone(), WeightedGroupoid::new(spec, action, base_action));
    doc.decls.push(Decl::Weighted {
        name,
        groupoid: gname,
        action: aname,
        base_action: bname,
    });
    Ok(())
}

fn parse_bialgebroid(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("of")?;
    let of = p.ident()?;
    let algebroid = lookup(&doc.env.algebroids, "algebroid", &of, p)?.clone();
    let poisson = if matches!(p.peek().map(|s| &s.tok), Some(Tok::Ident(w)) if w == "poisson") {
        p.pos += 1;
        Some(p.ident()?)
    } else {
        None
    };
    let data = match &poisson {
        None => locate(p, bi_algebroid_from_algebroid(&algebroid))?,
        Some(expr_name) => {
            let pexpr = lookup(&doc.env.exprs, "expr", expr_name, p)?.clone();
            locate(p, triangular_bi_algebroid(&algebroid, &pexpr))?
        }
    };
    doc.env.bialgebroids.insert(name.clone(), data);
    doc.decls.push(Decl::BiAlgebroid { name, of, poisson });
    Ok(())
}

fn parse_courant(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let name = p.ident()?;
    p.keyword("of")?;
    let of = p.ident()?;
    let b = lookup(&doc.env.bialgebroids, "bialgebroid", &of, p)?.clone();
    let lambda = if matches!(p.peek().map(|s| &s.tok), Some(Tok::Ident(w)) if w == "lambda") {
        p.pos += 1;
        p.rational()?
    } else {
        Coeff::one()
    };
    let data = locate(p, courant_from_bi_algebroid(&b, lambda.clone()))?;
    doc.env.courants.insert(name.clone(), data);
    doc.decls.push(Decl::Courant { name, of, lambda });
    Ok(())
}

fn parse_check(p: &mut Parser, doc: &mut Document) -> Result<(), ParseError> {
    let kind = p.ident()?;
    let check = match kind.as_str() {
        "action" => {
            let n = p.ident()?;
            lookup(&doc.env.actions, "action", &n, p)?;
            Check::Action(n)
        }
        "homological" => {
            let n = p.ident()?;
            lookup(&doc.env.fields, "field", &n, p)?;
            Check::Homological(n)
        }
        "groupoid" => {
            let n = p.ident()?;
            lookup(&doc.env.groupoids, "groupoid", &n, p)?;
            Check::Groupoid(n)
        }
        "weighted_groupoid" => {
            let n = p.ident()?;
            lookup(&doc.env.weighted, "weighted groupoid", &n, p)?;
            Check::WeightedGroupoid(n)
        }
        "algebroid" => {
            let n = p.ident()?;
            lookup(&doc.env.algebroids, "algebroid", &n, p)?;
            Check::Algebroid(n)
        }
        "bialgebroid" => {
            let n = p.ident()?;
            lookup(&doc.env.bialgebroids, "bialgebroid", &n, p)?;
            Check::BiAlgebroid(n)
        }
        "sharp" => {
            let n = p.ident()?;
            lookup(&doc.env.bialgebroids, "bialgebroid", &n, p)?;
            Check::Sharp(n)
        }
        "courant" => {
            let n = p.ident()?;
            lookup(&doc.env.courants, "courant", &n, p)?;
            Check::Courant(n)
        }
        "poisson_weight" => {
            let weighted = p.ident()?;
            lookup(&doc.env.weighted, "weighted groupoid", &weighted, p)?;
            let ham = p.ident()?;
            lookup(&doc.env.hams, "ham", &ham, p)?;
            let degree = p.nat()?;
            Check::PoissonWeight {
                weighted,
                ham,
                degree,
            }
        }
        other => return p.err(format!("unknown check kind `{other}`")),
    };
    doc.decls.push(Decl::CheckDecl(check));
    Ok(())
}
