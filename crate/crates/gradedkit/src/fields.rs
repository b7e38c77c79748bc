//! Vector fields, graded Lie brackets and the canonical Poisson bracket.
//!
//! A vector field is a derivation of the chart algebra, stored as the
//! map coordinate -> coefficient of the corresponding partial derivative
//! (coefficients stand on the left). Hamiltonians live on charts carrying
//! conjugate-pair metadata; the canonical bracket is fixed by `{p_c, c} = 1`
//! together with graded antisymmetry, and every downstream sign is derived
//! from that single convention.

use crate::grading::{Chart, CoordId, Parity, Shift};
use crate::symalg::{Coeff, Expr, ExprError};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    ChartMismatch,
    NotOdd,
    NoPairing,
    IndefiniteParity,
    Expr(ExprError),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::ChartMismatch => write!(f, "fields live on different charts"),
            FieldError::NotOdd => write!(f, "vector field is not odd"),
            FieldError::NoPairing => write!(f, "chart lacks conjugate pairing metadata"),
            FieldError::IndefiniteParity => write!(f, "object has no definite parity"),
            FieldError::Expr(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FieldError {}

impl From<ExprError> for FieldError {
    fn from(e: ExprError) -> Self {
        FieldError::Expr(e)
    }
}

/// A derivation of the chart algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VecField {
    chart: Arc<Chart>,
    comps: BTreeMap<CoordId, Expr>,
}

impl VecField {
    pub fn zero(chart: &Arc<Chart>) -> VecField {
        VecField {
            chart: chart.clone(),
            comps: BTreeMap::new(),
        }
    }

    pub fn new(chart: &Arc<Chart>, comps: BTreeMap<CoordId, Expr>) -> VecField {
        let mut field = VecField::zero(chart);
        for (c, e) in comps {
            field.set_component(c, e);
        }
        field
    }

    pub fn from_names(
        chart: &Arc<Chart>,
        comps: &[(&str, Expr)],
    ) -> Result<VecField, FieldError> {
        let mut field = VecField::zero(chart);
        for (name, e) in comps {
            let id = chart
                .require(name)
                .map_err(|_| FieldError::Expr(ExprError::UnboundName(name.to_string())))?;
            field.set_component(id, e.clone());
        }
        Ok(field)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn set_component(&mut self, c: CoordId, e: Expr) {
        assert!(Chart::same(e.chart(), &self.chart), "component off-chart");
        if e.is_zero() {
            self.comps.remove(&c);
        } else {
            self.comps.insert(c, e);
        }
    }

    pub fn component(&self, c: CoordId) -> Expr {
        self.comps
            .get(&c)
            .cloned()
            .unwrap_or_else(|| Expr::zero(&self.chart))
    }

    pub fn components(&self) -> impl Iterator<Item = (CoordId, &Expr)> {
        self.comps.iter().map(|(c, e)| (*c, e))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Parity of the derivation, when all components are consistent: the
    /// term `X^c ∂/∂c` has parity `parity(X^c) + parity(c)`.
    pub fn parity(&self) -> Option<Parity> {
        let mut parity: Option<Parity> = None;
        for (c, e) in &self.comps {
            let pe = e.parity()?;
            let p = pe.add(self.chart.coord(*c).parity);
            match parity {
                None => parity = Some(p),
                Some(q) if q == p => {}
                _ => return None,
            }
        }
        Some(parity.unwrap_or(Parity::Even))
    }

    /// Weight shift of the derivation when homogeneous:
    /// `weight(X^c) - weight(c)`, consistent over components.
    pub fn weight(&self) -> Option<Shift> {
        let mut shift: Option<Shift> = None;
        for (c, e) in &self.comps {
            let we = e.homogeneous_weight()?;
            let s = we.shift().sub(&self.chart.coord(*c).weight.shift());
            match &shift {
                None => shift = Some(s),
                Some(q) if *q == s => {}
                _ => return None,
            }
        }
        shift.or_else(|| Some(Shift::zero(self.chart.arity())))
    }

    /// Apply the derivation to a function.
    pub fn apply(&self, f: &Expr) -> Result<Expr, FieldError> {
        if !Chart::same(f.chart(), &self.chart) {
            return Err(FieldError::ChartMismatch);
        }
        let mut out = Expr::zero(&self.chart);
        for (c, coeff) in &self.comps {
            out = out.add(&coeff.mul(&f.derivative(*c)));
        }
        Ok(out)
    }

    pub fn add(&self, other: &VecField) -> VecField {
        assert!(Chart::same(&self.chart, &other.chart));
        let mut out = self.clone();
        for (c, e) in &other.comps {
            out.set_component(*c, out.component(*c).add(e));
        }
        out
    }

    pub fn sub(&self, other: &VecField) -> VecField {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VecField {
        VecField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|(c, e)| (*c, e.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &Coeff) -> VecField {
        let mut out = VecField::zero(&self.chart);
        for (c, e) in &self.comps {
            out.set_component(*c, e.scale(k));
        }
        out
    }

    /// Left-multiply all components.
    pub fn mul_left(&self, f: &Expr) -> VecField {
        let mut out = VecField::zero(&self.chart);
        for (c, e) in &self.comps {
            out.set_component(*c, f.mul(e));
        }
        out
    }

    /// Split into parity-homogeneous derivations (component-wise split of
    /// the coefficient by the parity that makes the term homogeneous).
    fn parity_split(&self) -> [VecField; 2] {
        let mut even = VecField::zero(&self.chart);
        let mut odd = VecField::zero(&self.chart);
        for (c, e) in &self.comps {
            let pc = self.chart.coord(*c).parity;
            // coefficient parity q gives term parity q + pc
            let coeff_for = |term: Parity| e.parity_part(term.add(pc));
            even.set_component(*c, coeff_for(Parity::Even));
            odd.set_component(*c, coeff_for(Parity::Odd));
        }
        [even, odd]
    }

    /// Graded commutator `[X,Y] = X∘Y - (-1)^{X̃Ỹ} Y∘X`, extended
    /// bilinearly over the parity splits of both arguments.
    pub fn lie_bracket(&self, other: &VecField) -> Result<VecField, FieldError> {
        if !Chart::same(&self.chart, &other.chart) {
            return Err(FieldError::ChartMismatch);
        }
        let xs = self.parity_split();
        let ys = other.parity_split();
        let mut out = VecField::zero(&self.chart);
        for (px, x) in [(Parity::Even, &xs[0]), (Parity::Odd, &xs[1])] {
            if x.is_zero() {
                continue;
            }
            for (py, y) in [(Parity::Even, &ys[0]), (Parity::Odd, &ys[1])] {
                if y.is_zero() {
                    continue;
                }
                let sign = px.koszul(py);
                let mut part = VecField::zero(&self.chart);
                for c in 0..self.chart.len() {
                    let xy = x.apply(&y.component(c))?;
                    let yx = y.apply(&x.component(c))?;
                    let term = if sign < 0 { xy.add(&yx) } else { xy.sub(&yx) };
                    part.set_component(c, term);
                }
                out = out.add(&part);
            }
        }
        Ok(out)
    }

    /// Report on `2Q² = [Q,Q] = 0`.
    pub fn is_homological(&self) -> Result<HomologicalReport, FieldError> {
        // the zero field is odd (and even) and trivially homological
        if !self.is_zero() && self.parity() != Some(Parity::Odd) {
            return Err(FieldError::NotOdd);
        }
        let residual = self.lie_bracket(self)?;
        Ok(HomologicalReport { residual })
    }

    /// The symbol: each `∂/∂c` replaced by the conjugate momentum, with
    /// the coefficient kept on the left.
    pub fn symbol(&self) -> Result<Ham, FieldError> {
        let pairing = self.chart.pairing().ok_or(FieldError::NoPairing)?;
        let mut expr = Expr::zero(&self.chart);
        for (c, coeff) in &self.comps {
            let p = pairing.momentum_of(*c).ok_or(FieldError::NoPairing)?;
            expr = expr.add(&coeff.mul(&Expr::coord(&self.chart, p)));
        }
        Ham::new(expr)
    }

    /// Rebuild a field on the same chart after mapping every component
    /// through `f`.
    pub fn map_components(
        &self,
        mut f: impl FnMut(&Expr) -> Result<Expr, FieldError>,
    ) -> Result<VecField, FieldError> {
        let mut out = VecField::zero(&self.chart);
        for (c, e) in &self.comps {
            out.set_component(*c, f(e)?);
        }
        Ok(out)
    }
}

impl fmt::Display for VecField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (c, e) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({e})*d/d{}", self.chart.coord(*c).name)?;
        }
        Ok(())
    }
}

/// Result of the homological check: the residual `[Q,Q]`.
#[derive(Debug, Clone)]
pub struct HomologicalReport {
    pub residual: VecField,
}

impl HomologicalReport {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

/// A Hamiltonian: an expression on a chart with conjugate-pair metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ham {
    expr: Expr,
}

impl Ham {
    pub fn new(expr: Expr) -> Result<Ham, FieldError> {
        if expr.chart().pairing().is_none() {
            return Err(FieldError::NoPairing);
        }
        Ok(Ham { expr })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.expr.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    pub fn add(&self, other: &Ham) -> Ham {
        Ham {
            expr: self.expr.add(&other.expr),
        }
    }

    pub fn scale(&self, k: &Coeff) -> Ham {
        Ham {
            expr: self.expr.scale(k),
        }
    }

    /// Canonical Poisson bracket. The bracket parity is read off the
    /// pairing metadata: phase lifts give the even bracket, parity-reversed
    /// momenta give the odd (Schouten-type) bracket. In both cases
    /// `{p_c, c} = 1`.
    pub fn poisson(&self, other: &Ham) -> Result<Ham, FieldError> {
        if !Chart::same(self.chart(), other.chart()) {
            return Err(FieldError::ChartMismatch);
        }
        Ok(Ham {
            expr: poisson_expr(&self.expr, &other.expr)?,
        })
    }

    /// The derivation `{H, •}`.
    pub fn hamiltonian_field(&self) -> Result<VecField, FieldError> {
        let chart = self.chart().clone();
        let mut comps = BTreeMap::new();
        for c in 0..chart.len() {
            let img = poisson_expr(&self.expr, &Expr::coord(&chart, c))?;
            if !img.is_zero() {
                comps.insert(c, img);
            }
        }
        Ok(VecField::new(&chart, comps))
    }

    /// Inverse of the symbol map on fibre-linear Hamiltonians: reads the
    /// component of `∂/∂c` off the coefficient of `p_c`.
    pub fn fiber_linear_field(&self) -> Result<VecField, FieldError> {
        let pairs = self
            .chart()
            .pairing()
            .ok_or(FieldError::NoPairing)?
            .pairs
            .clone();
        self.fiber_linear_field_with(&pairs)
    }

    /// Same, against an explicit orientation of the conjugate pairs
    /// (`(base, momentum)`); duals read the pairing the other way round.
    pub fn fiber_linear_field_with(
        &self,
        pairs: &[(CoordId, CoordId)],
    ) -> Result<VecField, FieldError> {
        let chart = self.chart().clone();
        let mut rest = self.expr.clone();
        let mut field = VecField::zero(&chart);
        for (c, p) in pairs {
            // coefficient: X^c = (-1)^{p̃·(H̃+p̃)} ∂H/∂p  (left derivative),
            // undoing symbol's left-placed coefficient.
            let d = self.expr.derivative(*p);
            if d.is_zero() {
                continue;
            }
            let p_par = chart.coord(*p).parity;
            let mut comp = Expr::zero(&chart);
            for par in [Parity::Even, Parity::Odd] {
                // X^c = (-1)^{p̃·X̃^c} ∂H/∂p_c, applied per parity part.
                let part = d.parity_part(par);
                if part.is_zero() {
                    continue;
                }
                let signed = if p_par.koszul(par) < 0 { part.neg() } else { part };
                comp = comp.add(&signed);
            }
            field.set_component(*c, comp.clone());
            rest = rest.sub(&comp.mul(&Expr::coord(&chart, *p)));
        }
        if !rest.is_zero() {
            return Err(FieldError::Expr(ExprError::NotHomogeneous));
        }
        Ok(field)
    }

    /// Derived bracket `{{σ1, self}, σ2}`.
    pub fn derived_bracket(&self, s1: &Ham, s2: &Ham) -> Result<Ham, FieldError> {
        s1.poisson(self)?.poisson(s2)
    }
}

impl fmt::Display for Ham {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// `{F, G}` on a paired chart, computed by peeling generator factors off
/// `F` with the graded right Leibniz rule. Generator brackets:
/// `{p_c, G} = ∂G/∂c`, `{c, G} = -(-1)^{c̃·p̃} ∂G/∂p_c`, and opaque
/// symbols bracket through their formal derivatives.
pub fn poisson_expr(f: &Expr, g: &Expr) -> Result<Expr, FieldError> {
    let chart = f.chart().clone();
    let pairing = chart.pairing().ok_or(FieldError::NoPairing)?.clone();
    let beta = pairing.momentum_parity_shift;

    let mut out = Expr::zero(&chart);
    // Bilinear over parity parts of g (the peeling sign needs g̃).
    for pg in [Parity::Even, Parity::Odd] {
        let gp = g.parity_part(pg);
        if gp.is_zero() {
            continue;
        }
        let peel_parity = pg.add(beta);
        for (m, coeff) in f.terms() {
            // Factors of the monomial in canonical order.
            let mut factors: Vec<Factor> = Vec::new();
            for (c, e) in &m.powers {
                factors.push(Factor::Coord(*c, *e));
            }
            for (app, e) in &m.fns {
                factors.push(Factor::Fn(app.clone(), *e));
            }
            // Suffix parities for the right-Leibniz peel sign.
            let n = factors.len();
            let mut suffix_parity = vec![Parity::Even; n + 1];
            for i in (0..n).rev() {
                suffix_parity[i] = suffix_parity[i + 1].add(factor_parity(&chart, &factors[i]));
            }
            for i in 0..n {
                let bracket = factor_bracket(&chart, &pairing, &factors[i], &gp)?;
                if bracket.is_zero() {
                    continue;
                }
                let mut acc = Expr::constant(&chart, coeff.clone());
                for (j, fac) in factors.iter().enumerate() {
                    if j == i {
                        acc = acc.mul(&bracket);
                    } else {
                        acc = acc.mul(&factor_expr(&chart, fac));
                    }
                    if acc.is_zero() {
                        break;
                    }
                }
                if suffix_parity[i + 1].koszul(peel_parity) < 0 {
                    acc = acc.neg();
                }
                out = out.add(&acc);
            }
        }
    }
    Ok(out)
}

enum Factor {
    Coord(CoordId, u32),
    Fn(crate::symalg::FnApp, u32),
}

fn factor_parity(chart: &Chart, f: &Factor) -> Parity {
    match f {
        Factor::Coord(c, e) => {
            if chart.coord(*c).parity.is_odd() && e % 2 == 1 {
                Parity::Odd
            } else {
                Parity::Even
            }
        }
        Factor::Fn(_, _) => Parity::Even,
    }
}

fn factor_expr(chart: &Arc<Chart>, f: &Factor) -> Expr {
    match f {
        Factor::Coord(c, e) => Expr::coord(chart, *c).pow(*e),
        Factor::Fn(app, e) => Expr::fn_app(chart, app.clone()).pow(*e),
    }
}

/// `{z^e, G}` for a single generator factor.
fn factor_bracket(
    chart: &Arc<Chart>,
    pairing: &crate::grading::Pairing,
    f: &Factor,
    g: &Expr,
) -> Result<Expr, FieldError> {
    match f {
        Factor::Coord(z, e) => {
            let single = coord_bracket(chart, pairing, *z, g)?;
            if single.is_zero() {
                return Ok(single);
            }
            if *e == 1 {
                Ok(single)
            } else {
                // z even here (odd powers are 1): {z^e, G} = e z^{e-1} {z, G}.
                Ok(Expr::coord(chart, *z)
                    .pow(*e - 1)
                    .mul(&single)
                    .scale(&Coeff::from(num_bigint::BigInt::from(*e as i64))))
            }
        }
        Factor::Fn(app, e) => {
            // {φ, G} = -Σ_b (-1)^{β(p̃_b+β)} ∂φ/∂x^b ∂G/∂p_b
            let beta = pairing.momentum_parity_shift;
            let mut out = Expr::zero(chart);
            for b in &app.args {
                let Some(p) = pairing.momentum_of(*b) else {
                    continue;
                };
                let dg = g.derivative(p);
                if dg.is_zero() {
                    continue;
                }
                let dphi = Expr::fn_app(chart, app_derived(app, *b));
                let p_par = chart.coord(p).parity;
                let mut term = dphi.mul(&dg).neg();
                if beta.koszul(p_par.add(beta)) < 0 {
                    term = term.neg();
                }
                out = out.add(&term);
            }
            if *e == 1 || out.is_zero() {
                Ok(out)
            } else {
                Ok(Expr::fn_app(chart, app.clone())
                    .pow(*e - 1)
                    .mul(&out)
                    .scale(&Coeff::from(num_bigint::BigInt::from(*e as i64))))
            }
        }
    }
}

fn app_derived(app: &crate::symalg::FnApp, by: CoordId) -> crate::symalg::FnApp {
    let mut d = app.clone();
    d.derivs.push(by);
    d.derivs.sort_unstable();
    d
}

fn coord_bracket(
    chart: &Arc<Chart>,
    pairing: &crate::grading::Pairing,
    z: CoordId,
    g: &Expr,
) -> Result<Expr, FieldError> {
    if let Some(base) = pairing.base_of(z) {
        // z is a momentum: {p_c, G} = ∂G/∂c.
        return Ok(g.derivative(base));
    }
    if let Some(p) = pairing.momentum_of(z) {
        // {c, G} = -(-1)^{c̃·p̃} ∂G/∂p_c.
        let sign = chart.coord(z).parity.koszul(chart.coord(p).parity);
        let d = g.derivative(p);
        return Ok(if sign < 0 { d } else { d.neg() });
    }
    // Unpaired coordinate: central.
    Ok(Expr::zero(chart))
}

/// Nested bracket `[[Q, A], B]`; Loday-type, no symmetry is imposed.
pub fn derived_bracket(
    q: &VecField,
    a: &VecField,
    b: &VecField,
) -> Result<VecField, FieldError> {
    q.lie_bracket(a)?.lie_bracket(b)
}

/// Convenience: `1` as a coefficient.
pub fn one() -> Coeff {
    Coeff::one()
}
