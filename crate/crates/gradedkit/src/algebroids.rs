//! Lie algebroids as graded Q-manifolds, their weighted structure, the
//! tower of levels, sections with derived brackets, bi-algebroid pairs and
//! the associated Courant structure.
//!
//! The encoding follows the Q-manifold picture: an algebroid on a chart
//! with odd fibre coordinates is an odd homological vector field, weighted
//! when the field is homogeneous of weight one in the linear component and
//! weight zero in the rest. Verification operations return residuals, not
//! booleans; the residuals are the structure equations themselves.

use crate::fields::{FieldError, Ham, VecField};
use crate::grading::{Chart, CoordId, Parity, Shift, Weight};
use crate::lifts::{self, HomAction, LiftError};
use crate::symalg::{rat, Coeff, Expr, ExprError, Substitution};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum AlgebroidError {
    NotGlChart(String),
    NotOdd,
    WrongSectionForm(String),
    NotInteriorProduct(String),
    HigherThetaDegree(String),
    Inconsistent(String),
    BadDegree(String),
    NotSection(String),
    Field(FieldError),
    Expr(ExprError),
    Lift(LiftError),
}

impl fmt::Display for AlgebroidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebroidError::NotGlChart(m) => write!(f, "not a ΠGL-bundle chart: {m}"),
            AlgebroidError::NotOdd => write!(f, "field is not odd"),
            AlgebroidError::WrongSectionForm(m) => write!(f, "bad section: {m}"),
            AlgebroidError::NotInteriorProduct(m) => {
                write!(f, "bracket result is not an interior product: {m}")
            }
            AlgebroidError::HigherThetaDegree(m) => {
                write!(f, "higher fibre-degree terms present: {m}")
            }
            AlgebroidError::Inconsistent(m) => write!(f, "internal inconsistency: {m}"),
            AlgebroidError::BadDegree(m) => write!(f, "bad degree: {m}"),
            AlgebroidError::NotSection(m) => write!(f, "not a section: {m}"),
            AlgebroidError::Field(e) => write!(f, "{e}"),
            AlgebroidError::Expr(e) => write!(f, "{e}"),
            AlgebroidError::Lift(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AlgebroidError {}

impl From<FieldError> for AlgebroidError {
    fn from(e: FieldError) -> Self {
        AlgebroidError::Field(e)
    }
}
impl From<ExprError> for AlgebroidError {
    fn from(e: ExprError) -> Self {
        AlgebroidError::Expr(e)
    }
}
impl From<LiftError> for AlgebroidError {
    fn from(e: LiftError) -> Self {
        AlgebroidError::Lift(e)
    }
}

/// A (weighted) Lie algebroid presented as a homological field on a chart
/// with odd fibre coordinates.
#[derive(Debug, Clone)]
pub struct AlgebroidData {
    chart: Arc<Chart>,
    q: VecField,
    /// Declared degree k of the weighted structure.
    degree: u32,
    /// Index of the linear (fibre-counting) weight component.
    linear: usize,
}

impl AlgebroidData {
    /// Wrap a field as algebroid data after the structural chart checks:
    /// the linear component is {0,1}-valued, fibre coordinates are odd and
    /// base coordinates even, and Q is odd. Homological and weight checks
    /// are separate (`verify_weighted`).
    pub fn new(
        chart: &Arc<Chart>,
        q: VecField,
        degree: u32,
        linear: usize,
    ) -> Result<AlgebroidData, AlgebroidError> {
        for c in chart.coords() {
            let v = c.weight.component(linear);
            if v > 1 {
                return Err(AlgebroidError::NotGlChart(format!(
                    "`{}` has linear weight {v}",
                    c.name
                )));
            }
            let want = if v == 1 { Parity::Odd } else { Parity::Even };
            if !c.formal && c.parity != want {
                return Err(AlgebroidError::NotGlChart(format!(
                    "`{}` has parity {} but linear weight {v}",
                    c.name, c.parity
                )));
            }
        }
        if q.parity() != Some(Parity::Odd) && !q.is_zero() {
            return Err(AlgebroidError::NotOdd);
        }
        Ok(AlgebroidData {
            chart: chart.clone(),
            q,
            degree,
            linear,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn q(&self) -> &VecField {
        &self.q
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn linear_component(&self) -> usize {
        self.linear
    }

    pub fn fiber_ids(&self) -> Vec<CoordId> {
        self.chart
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.weight.component(self.linear) == 1)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn base_ids(&self) -> Vec<CoordId> {
        self.chart
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.formal && c.weight.component(self.linear) == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Non-linear ("hat") total weight of a coordinate.
    fn hat_weight(&self, c: CoordId) -> u32 {
        let w = &self.chart.coord(c).weight;
        w.0.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.linear)
            .map(|(_, v)| *v)
            .sum()
    }

    fn hat_total(&self, w: &Weight) -> i64 {
        w.0.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.linear)
            .map(|(_, v)| *v as i64)
            .sum()
    }

    /// The expected weight shift of the homological field: one in the
    /// linear slot, zero elsewhere.
    fn expected_shift(&self) -> Shift {
        let mut s = Shift::zero(self.chart.arity());
        s.0[self.linear] = 1;
        s
    }

    /// Exact residuals of the weighted-algebroid conditions: `[Q,Q]`, the
    /// off-weight part of Q against bi-weight (0,1), and the commutation
    /// of Q with the pullbacks of both homogeneity structures, as
    /// polynomial identities in the parameter.
    pub fn verify_weighted(&self) -> Result<WeightedAlgebroidReport, AlgebroidError> {
        self.verify_weighted_with(None)
    }

    /// Same, but checking commutation against a supplied action for the
    /// hat grading instead of the canonical diagonal one.
    pub fn verify_weighted_with(
        &self,
        hat_action: Option<&HomAction>,
    ) -> Result<WeightedAlgebroidReport, AlgebroidError> {
        let homological = self.q.lie_bracket(&self.q)?;

        // Off-weight residual: parts of each component whose shift differs
        // from (0, ..., 1, ..., 0).
        let want = self.expected_shift();
        let mut weight_residual = VecField::zero(&self.chart);
        for (c, comp) in self.q.components() {
            let cw = self.chart.coord(c).weight.shift();
            let mut bad = Expr::zero(&self.chart);
            for (w, part) in comp.weight_decompose()? {
                if w.shift().sub(&cw) != want {
                    bad = bad.add(&part);
                }
            }
            weight_residual.set_component(c, bad);
        }

        // Commutation with the hat action (canonical on the non-linear
        // grading unless supplied) and with the canonical linear action.
        // Q is invariant along the hat action but carries weight one along
        // the linear one, hence the extra parameter power there:
        // t^0 Q ∘ h_t^* = h_t^* ∘ Q and s^1 Q ∘ l_s^* = l_s^* ∘ Q.
        let hat = match hat_action {
            Some(h) => h.clone(),
            None => self.canonical_hat_action("t"),
        };
        let h_commutation = self.commutation_residuals(&hat, 0)?;
        let l_commutation =
            self.commutation_residuals(&self.canonical_linear_action("s"), 1)?;

        Ok(WeightedAlgebroidReport {
            homological,
            weight_residual,
            h_commutation,
            l_commutation,
        })
    }

    /// Canonical action scaling each coordinate by t^(hat weight).
    pub fn canonical_hat_action(&self, param: &str) -> HomAction {
        let ext = self.chart.extend_params(&[param]);
        let t = Expr::var(&ext, param).unwrap();
        let mut map = BTreeMap::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let w = self.hat_weight(i);
            if w > 0 {
                map.insert(c.name.clone(), t.pow(w).mul(&Expr::coord(&ext, i)));
            }
        }
        HomAction::new(&self.chart, param, &map).expect("canonical action is well-formed")
    }

    fn canonical_linear_action(&self, param: &str) -> HomAction {
        let ext = self.chart.extend_params(&[param]);
        let t = Expr::var(&ext, param).unwrap();
        let mut map = BTreeMap::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let w = c.weight.component(self.linear);
            if w > 0 {
                map.insert(c.name.clone(), t.pow(w).mul(&Expr::coord(&ext, i)));
            }
        }
        HomAction::new(&self.chart, param, &map).expect("canonical action is well-formed")
    }

    /// Residuals of `t^w Q ∘ h_t^* - h_t^* ∘ Q` on every coordinate and
    /// every declared function symbol, where `w` is the weight of Q along
    /// the action being checked.
    fn commutation_residuals(
        &self,
        action: &HomAction,
        q_weight: u32,
    ) -> Result<Vec<(String, Expr)>, AlgebroidError> {
        let ext = action.extended_chart().clone();
        let incl = Substitution::new(&self.chart, &ext, &BTreeMap::new())?;
        let t_pow = Expr::var(&ext, action.param_name())?.pow(q_weight);
        // Q acting on the extended chart (parameter is constant).
        let mut q_ext = VecField::zero(&ext);
        for (c, comp) in self.q.components() {
            let id = ext.require(&self.chart.coord(c).name).map_err(ExprError::from_chart)?;
            q_ext.set_component(id, incl.apply(comp)?);
        }
        let pullback = action.pullback();
        let mut out = Vec::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let lhs = t_pow.mul(&q_ext.apply(action.image(i))?);
            let rhs = pullback.apply(&self.q.component(i))?;
            out.push((c.name.clone(), lhs.sub(&rhs)));
        }
        for fd in self.chart.funcs() {
            let phi = Expr::func(&self.chart, &fd.name)?;
            let lhs = t_pow.mul(&q_ext.apply(&pullback.apply(&phi)?)?);
            let rhs = pullback.apply(&self.q.apply(&phi)?)?;
            out.push((fd.name.clone(), lhs.sub(&rhs)));
        }
        Ok(out)
    }

    /// Project to level `j` of the tower: retain coordinates of hat weight
    /// ≤ j-1 and restrict Q. A retained component depending on a dropped
    /// coordinate contradicts the weight bound and is reported.
    pub fn tower_project(&self, j: u32) -> Result<AlgebroidData, AlgebroidError> {
        if j == 0 || j >= self.degree {
            return Err(AlgebroidError::BadDegree(format!(
                "level {j} outside 1..{}",
                self.degree
            )));
        }
        let keep: Vec<bool> = (0..self.chart.len())
            .map(|i| self.chart.coord(i).formal || self.hat_weight(i) <= j - 1)
            .collect();
        let coords: Vec<_> = self
            .chart
            .coords()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep[*i])
            .map(|(_, c)| c.clone())
            .collect();
        let mut bound = Weight::zero(self.chart.arity());
        for c in &coords {
            bound = bound.cmax(&c.weight);
        }
        let funcs = self
            .chart
            .funcs()
            .iter()
            .filter(|f| f.args.iter().all(|a| keep[*a]))
            .map(|f| crate::grading::FnDecl {
                name: f.name.clone(),
                args: f
                    .args
                    .iter()
                    .map(|a| keep[..*a].iter().filter(|k| **k).count())
                    .collect(),
            })
            .collect();
        let truncated = self
            .chart
            .derive(self.chart.arity(), coords, funcs, bound, None);
        let mut zero_map = BTreeMap::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            if !keep[i] {
                zero_map.insert(c.name.clone(), Expr::zero(&truncated));
            }
        }
        let proj = Substitution::new(&self.chart, &truncated, &zero_map)?;
        let mut q = VecField::zero(&truncated);
        for (c, comp) in self.q.components() {
            if !keep[c] {
                continue;
            }
            for (i, kept) in keep.iter().enumerate() {
                if !kept && comp.depends_on(i) {
                    return Err(AlgebroidError::Inconsistent(format!(
                        "component of `{}` depends on dropped `{}`",
                        self.chart.coord(c).name,
                        self.chart.coord(i).name
                    )));
                }
            }
            let id = truncated
                .id_of(&self.chart.coord(c).name)
                .expect("kept coordinate");
            q.set_component(id, proj.apply(comp)?);
        }
        AlgebroidData::new(&truncated, q, j, self.linear)
    }
}

/// Residuals of the weighted-algebroid verification.
#[derive(Debug, Clone)]
pub struct WeightedAlgebroidReport {
    pub homological: VecField,
    pub weight_residual: VecField,
    pub h_commutation: Vec<(String, Expr)>,
    pub l_commutation: Vec<(String, Expr)>,
}

impl WeightedAlgebroidReport {
    pub fn passed(&self) -> bool {
        self.homological.is_zero()
            && self.weight_residual.is_zero()
            && self.h_commutation.iter().all(|(_, e)| e.is_zero())
            && self.l_commutation.iter().all(|(_, e)| e.is_zero())
    }
}

// Small helper: ChartError -> ExprError for name lookups.
trait FromChart {
    fn from_chart(e: crate::grading::ChartError) -> ExprError;
}
impl FromChart for ExprError {
    fn from_chart(e: crate::grading::ChartError) -> ExprError {
        match e {
            crate::grading::ChartError::UnknownCoordinate(n) => ExprError::UnboundName(n),
            other => ExprError::UnboundName(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Structure functions

/// Assemble `Q = θ^a ρ_a^A ∂/∂x^A + ½ θ^a θ^b C_{ba}^c ∂/∂θ^c` from an
/// anchor and structure functions. `anchor[(a, A)] = ρ_a^A` and
/// `structure[(a, b, c)] = C_{ab}^c`; the latter is antisymmetrised in
/// `(a, b)`. The homological check is not implied.
pub fn algebroid_from_structure(
    chart: &Arc<Chart>,
    linear: usize,
    degree: u32,
    anchor: &BTreeMap<(String, String), Expr>,
    structure: &BTreeMap<(String, String, String), Expr>,
) -> Result<AlgebroidData, AlgebroidError> {
    let mut q = VecField::zero(chart);
    for ((a, big_a), rho) in anchor {
        let theta = Expr::var(chart, a)?;
        let xid = chart
            .id_of(big_a)
            .ok_or_else(|| ExprError::UnboundName(big_a.clone()))?;
        q.set_component(xid, q.component(xid).add(&theta.mul(rho)));
    }
    // antisymmetrise: C~_{ab} = (C_{ab} - C_{ba})/2, then the display uses
    // 1/2 θ^a θ^b C~_{ba}.
    let lookup = |a: &String, b: &String, c: &String| -> Expr {
        structure
            .get(&(a.clone(), b.clone(), c.clone()))
            .cloned()
            .unwrap_or_else(|| Expr::zero(chart))
    };
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for (a, b, c) in structure.keys() {
        keys.push((a.clone(), b.clone(), c.clone()));
        keys.push((b.clone(), a.clone(), c.clone()));
    }
    keys.sort();
    keys.dedup();
    for (a, b, c) in &keys {
        let anti = lookup(a, b, c).sub(&lookup(b, a, c)).scale(&rat(1, 2));
        if anti.is_zero() {
            continue;
        }
        // contribution of C~_{ab}^c: 1/2 θ^b θ^a C~_{ab}
        let tb = Expr::var(chart, b)?;
        let ta = Expr::var(chart, a)?;
        let cid = chart
            .id_of(c)
            .ok_or_else(|| ExprError::UnboundName(c.clone()))?;
        let term = tb.mul(&ta).mul(&anti).scale(&rat(1, 2));
        q.set_component(cid, q.component(cid).add(&term));
    }
    AlgebroidData::new(chart, q, degree, linear)
}

/// Read the anchor and structure functions back off a homological field
/// that is at most linear (resp. quadratic) in the fibre coordinates.
pub fn structure_from_q(
    a: &AlgebroidData,
) -> Result<
    (
        BTreeMap<(String, String), Expr>,
        BTreeMap<(String, String, String), Expr>,
    ),
    AlgebroidError,
> {
    let chart = a.chart();
    let fibers = a.fiber_ids();
    let bases = a.base_ids();
    let theta_free = |e: &Expr| fibers.iter().all(|f| !e.depends_on(*f));
    let mut anchor = BTreeMap::new();
    for &x in &bases {
        let comp = a.q().component(x);
        if comp.is_zero() {
            continue;
        }
        let mut rest = comp.clone();
        for &f in &fibers {
            let rho = comp.derivative(f);
            if !theta_free(&rho) {
                return Err(AlgebroidError::HigherThetaDegree(format!(
                    "anchor block of `{}`",
                    chart.coord(x).name
                )));
            }
            if !rho.is_zero() {
                rest = rest.sub(&Expr::coord(chart, f).mul(&rho));
                anchor.insert(
                    (chart.coord(f).name.clone(), chart.coord(x).name.clone()),
                    rho,
                );
            }
        }
        if !rest.is_zero() {
            return Err(AlgebroidError::HigherThetaDegree(format!(
                "component of `{}` has a fibre-free part",
                chart.coord(x).name
            )));
        }
    }
    let mut structure = BTreeMap::new();
    for &c in &fibers {
        let comp = a.q().component(c);
        if comp.is_zero() {
            continue;
        }
        let mut rest = comp.clone();
        for &bq in &fibers {
            for &aq in &fibers {
                if chart.rank(aq) >= chart.rank(bq) {
                    continue;
                }
                // C_{ba}^c = ∂_{θ^b} ∂_{θ^a} Q^{θ^c}
                let cba = comp.derivative(aq).derivative(bq);
                if !theta_free(&cba) {
                    return Err(AlgebroidError::HigherThetaDegree(format!(
                        "bracket block of `{}`",
                        chart.coord(c).name
                    )));
                }
                if cba.is_zero() {
                    continue;
                }
                // the {a,b} pair contributes θ^a θ^b C_{ba} to Q^{θ^c}
                rest = rest.sub(
                    &Expr::coord(chart, aq)
                        .mul(&Expr::coord(chart, bq))
                        .mul(&cba),
                );
                structure.insert(
                    (
                        chart.coord(bq).name.clone(),
                        chart.coord(aq).name.clone(),
                        chart.coord(c).name.clone(),
                    ),
                    cba.clone(),
                );
                structure.insert(
                    (
                        chart.coord(aq).name.clone(),
                        chart.coord(bq).name.clone(),
                        chart.coord(c).name.clone(),
                    ),
                    cba.neg(),
                );
            }
        }
        if !rest.is_zero() {
            return Err(AlgebroidError::HigherThetaDegree(format!(
                "component of `{}`",
                chart.coord(c).name
            )));
        }
    }
    Ok((anchor, structure))
}

// ---------------------------------------------------------------------------
// Sections

/// A homogeneous linear section in interior-product form:
/// `i_s = Σ s^I(x) ∂/∂θ^I`, carrying a declared weight r. The underlying
/// field has weight shift `(r - k, -1)` in the (hat, linear) bi-grading.
#[derive(Debug, Clone)]
pub struct Section {
    pub weight: u32,
    pub field: VecField,
}

impl Section {
    /// Validate a field as a section of the given weight.
    pub fn from_field(
        a: &AlgebroidData,
        weight: u32,
        field: VecField,
    ) -> Result<Section, AlgebroidError> {
        let chart = a.chart();
        let fibers = a.fiber_ids();
        for (c, comp) in field.components() {
            if !fibers.contains(&c) {
                return Err(AlgebroidError::WrongSectionForm(format!(
                    "component along base coordinate `{}`",
                    chart.coord(c).name
                )));
            }
            for &f in &fibers {
                if comp.depends_on(f) {
                    return Err(AlgebroidError::WrongSectionForm(format!(
                        "coefficient of `{}` depends on fibre `{}`",
                        chart.coord(c).name,
                        chart.coord(f).name
                    )));
                }
            }
            let Some(w) = comp.homogeneous_weight() else {
                return Err(AlgebroidError::WrongSectionForm(format!(
                    "coefficient of `{}` is not homogeneous",
                    chart.coord(c).name
                )));
            };
            let hat = a.hat_total(&w) - a.hat_weight(c) as i64;
            if hat != weight as i64 - a.degree() as i64 {
                return Err(AlgebroidError::WrongSectionForm(format!(
                    "coefficient of `{}` has hat shift {hat}, expected {}",
                    chart.coord(c).name,
                    weight as i64 - a.degree() as i64
                )));
            }
        }
        Ok(Section { weight, field })
    }

    /// Build from named fibre coefficients.
    pub fn new(
        a: &AlgebroidData,
        weight: u32,
        coeffs: &[(&str, Expr)],
    ) -> Result<Section, AlgebroidError> {
        let field = VecField::from_names(a.chart(), coeffs)?;
        Section::from_field(a, weight, field)
    }
}

/// Derived bracket of sections: `i_{[s1,s2]} = [[Q, i_{s1}], i_{s2}]`,
/// returned as a section of weight `r1 + r2 - k`.
pub fn section_bracket(
    a: &AlgebroidData,
    s1: &Section,
    s2: &Section,
) -> Result<Section, AlgebroidError> {
    let nested = a
        .q()
        .lie_bracket(&s1.field)?
        .lie_bracket(&s2.field)?;
    let r = (s1.weight + s2.weight) as i64 - a.degree() as i64;
    if r < 0 && !nested.is_zero() {
        return Err(AlgebroidError::NotInteriorProduct(format!(
            "bracket weight {r} is negative but the bracket is nonzero"
        )));
    }
    Section::from_field(a, r.max(0) as u32, nested)
        .map_err(|e| AlgebroidError::NotInteriorProduct(e.to_string()))
}

/// The anchor applied to a base function: `ρ(s)[f] = [Q, i_s](f)`
/// restricted to the base.
pub fn anchor_apply(
    a: &AlgebroidData,
    s: &Section,
    f: &Expr,
) -> Result<Expr, AlgebroidError> {
    let fibers = a.fiber_ids();
    for &fid in &fibers {
        if f.depends_on(fid) {
            return Err(AlgebroidError::WrongSectionForm(format!(
                "`{f}` depends on a fibre coordinate"
            )));
        }
    }
    let field = a.q().lie_bracket(&s.field)?;
    let applied = field.apply(f)?;
    // restrict to the base: fibre coordinates to zero
    let mut zero = BTreeMap::new();
    for &fid in &fibers {
        zero.insert(
            a.chart().coord(fid).name.clone(),
            Expr::zero(a.chart()),
        );
    }
    let restrict = Substitution::new(a.chart(), a.chart(), &zero)?;
    Ok(restrict.apply(&applied)?)
}

/// The anchor of a section as a vector field on the base block.
pub fn anchor_field(a: &AlgebroidData, s: &Section) -> Result<VecField, AlgebroidError> {
    let field = a.q().lie_bracket(&s.field)?;
    let fibers = a.fiber_ids();
    let mut zero = BTreeMap::new();
    for &fid in &fibers {
        zero.insert(a.chart().coord(fid).name.clone(), Expr::zero(a.chart()));
    }
    let restrict = Substitution::new(a.chart(), a.chart(), &zero)?;
    let mut out = VecField::zero(a.chart());
    for &b in &a.base_ids() {
        out.set_component(b, restrict.apply(&field.component(b))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bi-algebroids

/// A weighted Lie bi-algebroid: odd Hamiltonians of tri-weight
/// `(k-1, 2, 1)` and `(k-1, 1, 2)` on the cotangent lift of the ΠGL chart
/// that Poisson commute.
#[derive(Debug, Clone)]
pub struct BiAlgebroidData {
    /// Cotangent chart of the ΠGL-bundle chart.
    chart: Arc<Chart>,
    /// The underlying ΠGL chart.
    pd_chart: Arc<Chart>,
    pub q_ham: Ham,
    pub s_ham: Ham,
    degree: u32,
    /// Weight component counting fibre (θ) coordinates.
    theta_comp: usize,
    /// Weight component counting momenta (added by the cotangent lift).
    mom_comp: usize,
}

impl BiAlgebroidData {
    pub fn new(
        pd_chart: &Arc<Chart>,
        chart: &Arc<Chart>,
        q_ham: Ham,
        s_ham: Ham,
        degree: u32,
        theta_comp: usize,
        mom_comp: usize,
    ) -> BiAlgebroidData {
        BiAlgebroidData {
            chart: chart.clone(),
            pd_chart: pd_chart.clone(),
            q_ham,
            s_ham,
            degree,
            theta_comp,
            mom_comp,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Expected collapsed tri-weight of a Hamiltonian: everything but the
    /// θ- and momentum components summed into the first slot.
    fn collapsed(&self, w: &Weight) -> (i64, i64, i64) {
        let mut hat = 0i64;
        for (i, v) in w.0.iter().enumerate() {
            if i != self.theta_comp && i != self.mom_comp {
                hat += *v as i64;
            }
        }
        (
            hat,
            w.0[self.theta_comp] as i64,
            w.0[self.mom_comp] as i64,
        )
    }

    fn weight_audit(&self, h: &Ham, want: (i64, i64, i64)) -> Option<String> {
        if h.is_zero() {
            return None;
        }
        match h.expr().homogeneous_weight() {
            Some(w) => {
                let got = self.collapsed(&w);
                if got == want {
                    None
                } else {
                    Some(format!("tri-weight {got:?}, expected {want:?}"))
                }
            }
            None => Some("not homogeneous".to_string()),
        }
    }

    /// Residuals `{Q,Q}`, `{S,S}`, `{Q,S}` plus the tri-weight audits.
    pub fn verify(&self) -> Result<BiAlgebroidReport, AlgebroidError> {
        let k = self.degree as i64;
        Ok(BiAlgebroidReport {
            qq: self.q_ham.poisson(&self.q_ham)?,
            ss: self.s_ham.poisson(&self.s_ham)?,
            qs: self.q_ham.poisson(&self.s_ham)?,
            q_weight: self.weight_audit(&self.q_ham, (k - 1, 2, 1)),
            s_weight: self.weight_audit(&self.s_ham, (k - 1, 1, 2)),
        })
    }

    /// The dual pair: transpose the θ- and momentum weight components and
    /// swap the roles of the generators. The underlying ΠGL chart of the
    /// dual consists of the coordinates with zero momentum weight after
    /// the transposition.
    pub fn dual(&self) -> Result<BiAlgebroidData, AlgebroidError> {
        let swapped = lifts::swap_weight_components(&self.chart, self.theta_comp, self.mom_comp);
        let move_to = Substitution::new(&self.chart, &swapped, &BTreeMap::new())?;
        let pd_coords: Vec<_> = swapped
            .coords()
            .iter()
            .filter(|c| c.weight.component(self.mom_comp) == 0)
            .cloned()
            .map(|mut c| {
                c.weight = Weight(
                    c.weight
                        .0
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != self.mom_comp)
                        .map(|(_, v)| *v)
                        .collect(),
                );
                c
            })
            .collect();
        let mut bound = Weight::zero(swapped.arity() - 1);
        for c in &pd_coords {
            bound = bound.cmax(&c.weight);
        }
        let pd_dual = swapped.derive(swapped.arity() - 1, pd_coords, Vec::new(), bound, None);
        Ok(BiAlgebroidData {
            chart: swapped.clone(),
            pd_chart: pd_dual,
            q_ham: Ham::new(move_to.apply(self.s_ham.expr())?)?,
            s_ham: Ham::new(move_to.apply(self.q_ham.expr())?)?,
            degree: self.degree,
            theta_comp: self.theta_comp,
            mom_comp: self.mom_comp,
        })
    }

    /// Conjugate of a ΠGL coordinate inside the cotangent chart, oriented
    /// so that ΠGL coordinates count as bases: for the dual pair the
    /// stored pairing runs the other way.
    fn conjugate_of(&self, name: &str) -> Result<CoordId, AlgebroidError> {
        let id = self.chart.require(name).map_err(ExprError::from_chart)?;
        let pairing = self.chart.pairing().ok_or(FieldError::NoPairing)?;
        let conj = pairing
            .momentum_of(id)
            .filter(|m| self.pd_chart.id_of(&self.chart.coord(*m).name).is_none())
            .or_else(|| pairing.base_of(id))
            .ok_or_else(|| {
                AlgebroidError::Inconsistent(format!("`{name}` has no conjugate"))
            })?;
        Ok(conj)
    }

    /// The fibre-wise map `S^#` into `ΠT(ΠD)`, as a substitution, along
    /// with the residual of the Q-morphism property: it intertwines
    /// `{𝒬, •}` with the Lie derivative `L_Q = [d, i_Q]` on the target.
    pub fn sharp_map(&self) -> Result<SharpReport, AlgebroidError> {
        let pit = lifts::parity_reverse(
            &lifts::tangent_chart(&self.pd_chart),
            self.pd_chart.arity(),
        )?;
        let vnames = lifts::velocity_names(&self.pd_chart);
        // (S^#)^* sends each velocity coordinate to ∂S/∂(conjugate of the
        // underlying coordinate).
        let mut map = BTreeMap::new();
        for (i, c) in self.pd_chart.coords().iter().enumerate() {
            let mom = self.conjugate_of(&c.name)?;
            map.insert(vnames[i].clone(), self.s_ham.expr().derivative(mom));
        }
        let sharp = Substitution::new(&pit, &self.chart, &map)?;

        // Target homological field: L_Q = [d, i_Q] with d the de Rham field
        // on ΠT(ΠD) and i_Q the contraction with Q = fibre-linear part of 𝒬;
        // the contraction sign makes the Cartan commutator act as Q on
        // pullbacks of base functions.
        let pairs: Vec<(CoordId, CoordId)> = self
            .pd_chart
            .coords()
            .iter()
            .map(|c| {
                Ok((
                    self.chart.require(&c.name).map_err(ExprError::from_chart)?,
                    self.conjugate_of(&c.name)?,
                ))
            })
            .collect::<Result<_, AlgebroidError>>()?;
        let q_field = self.q_ham.fiber_linear_field_with(&pairs)?;
        let incl = Substitution::new(&self.pd_chart, &pit, &BTreeMap::new())?;
        let down = Substitution::new(&self.chart, &self.pd_chart, &BTreeMap::new())?;
        let mut d_field = VecField::zero(&pit);
        let mut iq = VecField::zero(&pit);
        for (i, c) in self.pd_chart.coords().iter().enumerate() {
            let cid = pit.require(&c.name).map_err(ExprError::from_chart)?;
            let vid = pit
                .id_of(&vnames[i])
                .ok_or_else(|| ExprError::UnboundName(vnames[i].clone()))?;
            d_field.set_component(cid, Expr::coord(&pit, vid));
            let qc = q_field.component(self.chart.require(&c.name).map_err(ExprError::from_chart)?);
            let qc_pd = down.apply(&qc)?;
            iq.set_component(vid, incl.apply(&qc_pd)?.neg());
        }
        let lie_q = d_field.lie_bracket(&iq)?;
        let q0 = self.q_ham.hamiltonian_field()?;

        let mut residuals = Vec::new();
        for (i, c) in pit.coords().iter().enumerate() {
            let lhs = sharp.apply(&lie_q.component(i))?;
            let rhs = q0.apply(sharp.image(i))?;
            residuals.push((c.name.clone(), lhs.sub(&rhs)));
        }

        // weight audit of the images
        let mut weight_audit = None;
        for (i, c) in pit.coords().iter().enumerate() {
            let img = sharp.image(i);
            if img.is_zero() {
                continue;
            }
            if img.homogeneous_weight().is_none() {
                weight_audit = Some(format!("image of `{}` is not homogeneous", c.name));
            }
        }
        Ok(SharpReport {
            sharp,
            residuals,
            weight_audit,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BiAlgebroidReport {
    pub qq: Ham,
    pub ss: Ham,
    pub qs: Ham,
    pub q_weight: Option<String>,
    pub s_weight: Option<String>,
}

impl BiAlgebroidReport {
    pub fn passed(&self) -> bool {
        self.qq.is_zero()
            && self.ss.is_zero()
            && self.qs.is_zero()
            && self.q_weight.is_none()
            && self.s_weight.is_none()
    }
}

#[derive(Debug)]
pub struct SharpReport {
    pub sharp: Substitution,
    pub residuals: Vec<(String, Expr)>,
    pub weight_audit: Option<String>,
}

impl SharpReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|(_, e)| e.is_zero()) && self.weight_audit.is_none()
    }
}

/// Lift an algebroid to the symbol picture: `𝒬 = symbol(Q)` on the
/// cotangent chart, with the trivial structure on the dual.
pub fn bi_algebroid_from_algebroid(
    a: &AlgebroidData,
) -> Result<BiAlgebroidData, AlgebroidError> {
    let ct = lifts::cotangent_chart(a.chart());
    let incl = Substitution::new(a.chart(), &ct, &BTreeMap::new())?;
    let mut q_ct = VecField::zero(&ct);
    for (c, comp) in a.q().components() {
        let id = ct.require(&a.chart().coord(c).name).map_err(ExprError::from_chart)?;
        q_ct.set_component(id, incl.apply(comp)?);
    }
    let q_ham = q_ct.symbol()?;
    let s_ham = Ham::new(Expr::zero(&ct))?;
    Ok(BiAlgebroidData::new(
        a.chart(),
        &ct,
        q_ham,
        s_ham,
        a.degree(),
        a.linear_component(),
        ct.arity() - 1,
    ))
}

/// Weighted triangular bi-algebroid: a Poisson function `P` on the dual
/// (a function of base and χ-coordinates of collapsed bi-weight (k-1, 2))
/// generates `S = {𝒬, P}`.
pub fn triangular_bi_algebroid(
    a: &AlgebroidData,
    p: &Expr,
) -> Result<BiAlgebroidData, AlgebroidError> {
    let b = bi_algebroid_from_algebroid(a)?;
    assert!(Chart::same(p.chart(), b.chart()), "P must live on the cotangent chart");
    // audit: P is a function of x and χ only, of collapsed weight (k-1, 0, 2)
    let ph = Ham::new(p.clone())?;
    if let Some(msg) = b.weight_audit(&ph, (b.degree as i64 - 1, 0, 2)) {
        return Err(AlgebroidError::WrongSectionForm(format!(
            "Poisson function: {msg}"
        )));
    }
    let s_ham = b.q_ham.poisson(&ph)?;
    Ok(BiAlgebroidData::new(
        &b.pd_chart,
        &b.chart,
        b.q_ham.clone(),
        s_ham,
        b.degree,
        b.theta_comp,
        b.mom_comp,
    ))
}

// ---------------------------------------------------------------------------
// Courant structures

/// A weighted Courant algebroid: the collapsed bi-weight cotangent chart
/// with an odd generator Θ of bi-degree (k-1, 3) and {Θ,Θ} = 0.
#[derive(Debug, Clone)]
pub struct CourantData {
    chart: Arc<Chart>,
    pub theta: Ham,
    pub lambda: Coeff,
    degree: u32,
}

impl CourantData {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Re-verify `{Θ,Θ} = 0` and the weight audits.
    pub fn verify(&self) -> Result<CourantReport, AlgebroidError> {
        let tt = self.theta.poisson(&self.theta)?;
        let k = self.degree as i64;
        let theta_weight = match self.theta.expr().homogeneous_weight() {
            Some(w) if w.0.len() == 2 && w.0[0] as i64 == k - 1 && w.0[1] == 3 => None,
            Some(w) => Some(format!("Θ has bi-degree {w}, expected ({},3)", k - 1)),
            None => Some("Θ is not homogeneous".to_string()),
        };
        let pairing_weight = {
            let pairing = self.chart.pairing().expect("cotangent chart");
            let mut bad = None;
            for (b, m) in &pairing.pairs {
                let w = self.chart.coord(*b).weight.add(&self.chart.coord(*m).weight);
                if !(w.0.len() == 2 && w.0[0] as i64 == k - 1 && w.0[1] == 2) {
                    bad = Some(format!(
                        "pairing weight {w} at `{}`, expected ({},2)",
                        self.chart.coord(*b).name,
                        k - 1
                    ));
                }
            }
            bad
        };
        Ok(CourantReport {
            theta_theta: tt,
            theta_weight,
            pairing_weight,
        })
    }

    /// Validate the section form: homogeneous of linear weight one (an
    /// odd function linear in the θ- and χ-half, with base coefficients).
    pub fn section(&self, e: &Expr) -> Result<Ham, AlgebroidError> {
        assert!(Chart::same(e.chart(), &self.chart));
        if e.is_zero() {
            return Ok(Ham::new(e.clone())?);
        }
        let Some(w) = e.homogeneous_weight() else {
            return Err(AlgebroidError::NotSection("not homogeneous".into()));
        };
        if w.0[1] != 1 {
            return Err(AlgebroidError::NotSection(format!(
                "has linear weight {}, sections have linear weight 1",
                w.0[1]
            )));
        }
        Ok(Ham::new(e.clone())?)
    }

    /// Natural pairing `⟨σ1, σ2⟩ = {σ1, σ2}`, a base function of weight
    /// drop `(-k+1, -2)`.
    pub fn pairing(&self, s1: &Expr, s2: &Expr) -> Result<Expr, AlgebroidError> {
        let h1 = self.section(s1)?;
        let h2 = self.section(s2)?;
        let out = h1.poisson(&h2)?;
        self.audit_drop(&[s1, s2], out.expr(), &[-(self.degree as i64) + 1, -2])?;
        Ok(out.expr().clone())
    }

    /// Courant-Dorfman bracket `⟦σ1, σ2⟧ = {{σ1, Θ_λ}, σ2}`; closed on
    /// sections of total degree k, with weight drop `(-k+1, -1)`.
    pub fn dorfman(&self, s1: &Expr, s2: &Expr) -> Result<Expr, AlgebroidError> {
        let h1 = self.section(s1)?;
        let h2 = self.section(s2)?;
        let out = self.theta.derived_bracket(&h1, &h2)?;
        // closure: the result is again a section
        self.section(out.expr())
            .map_err(|e| AlgebroidError::NotSection(format!("Dorfman closure failed: {e}")))?;
        self.audit_drop(&[s1, s2], out.expr(), &[-(self.degree as i64) + 1, -1])?;
        Ok(out.expr().clone())
    }

    /// Anchor `ρ_λ(σ)[f] = {{σ, Θ_λ}, f}` on base functions.
    pub fn anchor(&self, s: &Expr, f: &Expr) -> Result<Expr, AlgebroidError> {
        let h = self.section(s)?;
        if !f.is_zero() {
            match f.homogeneous_weight() {
                Some(w) if w.0[1] == 0 => {}
                _ => {
                    // base functions of mixed hat weight are fine; only the
                    // linear weight must vanish termwise
                    for (w, _) in f.weight_decompose()? {
                        if w.0[1] != 0 {
                            return Err(AlgebroidError::NotSection(
                                "anchor argument is not a base function".into(),
                            ));
                        }
                    }
                }
            }
        }
        let fh = Ham::new(f.clone())?;
        Ok(self.theta.derived_bracket(&h, &fh)?.expr().clone())
    }

    fn audit_drop(
        &self,
        inputs: &[&Expr],
        output: &Expr,
        drop: &[i64],
    ) -> Result<(), AlgebroidError> {
        if output.is_zero() {
            return Ok(());
        }
        let mut expect = Shift(drop.to_vec());
        for e in inputs {
            let Some(w) = e.homogeneous_weight() else {
                return Ok(());
            };
            expect = expect.add(&w.shift());
        }
        let Some(got) = output.homogeneous_weight() else {
            return Err(AlgebroidError::Inconsistent(
                "bracket output is not homogeneous".into(),
            ));
        };
        if got.shift() != expect {
            return Err(AlgebroidError::Inconsistent(format!(
                "weight audit failed: got {}, expected {expect}",
                got.shift()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CourantReport {
    pub theta_theta: Ham,
    pub theta_weight: Option<String>,
    pub pairing_weight: Option<String>,
}

impl CourantReport {
    pub fn passed(&self) -> bool {
        self.theta_theta.is_zero()
            && self.theta_weight.is_none()
            && self.pairing_weight.is_none()
    }
}

/// Collapse the tri-weight of a verified bi-algebroid to the bi-weight
/// (hat total, θ-count + momentum-count) and form `Θ_λ = 𝒬 + λ S`.
pub fn courant_from_bi_algebroid(
    b: &BiAlgebroidData,
    lambda: Coeff,
) -> Result<CourantData, AlgebroidError> {
    let src = b.chart();
    let to_bi = |w: &Weight| -> Weight {
        let mut hat = 0u32;
        for (i, v) in w.0.iter().enumerate() {
            if i != b.theta_comp && i != b.mom_comp {
                hat += v;
            }
        }
        Weight(vec![hat, w.0[b.theta_comp] + w.0[b.mom_comp]])
    };
    let coords = src
        .coords()
        .iter()
        .map(|c| crate::grading::Coordinate {
            name: c.name.clone(),
            weight: to_bi(&c.weight),
            parity: c.parity,
            formal: c.formal,
        })
        .collect();
    let collapsed = src.derive(
        2,
        coords,
        src.funcs().to_vec(),
        to_bi(src.degree_bound()),
        src.pairing().cloned(),
    );
    let move_to = Substitution::new(b.chart(), &collapsed, &BTreeMap::new())?;
    let theta_expr = move_to.apply(
        &b.q_ham
            .expr()
            .add(&b.s_ham.expr().scale(&lambda)),
    )?;
    let theta = Ham::new(theta_expr)?;
    let data = CourantData {
        chart: collapsed,
        theta,
        lambda,
        degree: b.degree(),
    };
    // {Θ,Θ} = 0 is guaranteed by the bi-algebroid conditions; re-verified.
    let rep = data.verify()?;
    if !rep.theta_theta.is_zero() {
        return Err(AlgebroidError::Inconsistent(format!(
            "{{Θ,Θ}} = {} is nonzero",
            rep.theta_theta
        )));
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Coordinate;
    use num_traits::{One, Zero};

    fn pi_tm(n: usize) -> Arc<Chart> {
        let mut coords = Vec::new();
        for a in 1..=n {
            coords.push(Coordinate::new(
                format!("x{a}"),
                Weight(vec![0, 0]),
                Parity::Even,
            ));
        }
        for a in 1..=n {
            coords.push(Coordinate::new(
                format!("xi{a}"),
                Weight(vec![0, 1]),
                Parity::Odd,
            ));
        }
        Chart::new(2, coords).unwrap()
    }

    fn de_rham_algebroid(n: usize) -> AlgebroidData {
        let ch = pi_tm(n);
        let mut anchor = BTreeMap::new();
        for a in 1..=n {
            anchor.insert(
                (format!("xi{a}"), format!("x{a}")),
                Expr::one(&ch),
            );
        }
        algebroid_from_structure(&ch, 1, 1, &anchor, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn de_rham_from_structure_and_back() {
        let a = de_rham_algebroid(2);
        assert!(a.q().is_homological().unwrap().passed());
        let (anchor, structure) = structure_from_q(&a).unwrap();
        assert_eq!(anchor.len(), 2);
        assert!(structure.is_empty());
        let rebuilt =
            algebroid_from_structure(a.chart(), 1, 1, &anchor, &structure).unwrap();
        assert_eq!(rebuilt.q(), a.q());
        // ordinary algebroid: the degree-1 weighted check degenerates
        let rep = a.verify_weighted().unwrap();
        assert!(rep.passed());
    }

    fn so3_chart() -> Arc<Chart> {
        Chart::new(
            2,
            vec![
                Coordinate::new("pt", Weight(vec![0, 0]), Parity::Even),
                Coordinate::new("xi1", Weight(vec![0, 1]), Parity::Odd),
                Coordinate::new("xi2", Weight(vec![0, 1]), Parity::Odd),
                Coordinate::new("xi3", Weight(vec![0, 1]), Parity::Odd),
            ],
        )
        .unwrap()
    }

    fn so3_algebroid() -> AlgebroidData {
        let ch = so3_chart();
        let mut structure = BTreeMap::new();
        let eps = |a: usize, b: usize, c: usize| -> i64 {
            match (a, b, c) {
                (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
                (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
                _ => 0,
            }
        };
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 1..=3 {
                    let e = eps(a, b, c);
                    if e != 0 {
                        structure.insert(
                            (format!("xi{a}"), format!("xi{b}"), format!("xi{c}")),
                            Expr::from_int(&ch, e),
                        );
                    }
                }
            }
        }
        algebroid_from_structure(&ch, 1, 1, &BTreeMap::new(), &structure).unwrap()
    }

    #[test]
    fn so3_round_trip_and_sections() {
        let a = so3_algebroid();
        assert!(a.q().is_homological().unwrap().passed());
        let (anchor, structure) = structure_from_q(&a).unwrap();
        assert!(anchor.is_empty(), "the anchor map is trivial");
        let rebuilt = algebroid_from_structure(a.chart(), 1, 1, &anchor, &structure).unwrap();
        assert_eq!(rebuilt.q(), a.q());

        // [e1, e2] = e3 up to the global sign convention.
        let e1 = Section::new(&a, 1, &[("xi1", Expr::one(a.chart()))]).unwrap();
        let e2 = Section::new(&a, 1, &[("xi2", Expr::one(a.chart()))]).unwrap();
        let br = section_bracket(&a, &e1, &e2).unwrap();
        assert_eq!(br.weight, 1);
        let e3 = VecField::from_names(a.chart(), &[("xi3", Expr::one(a.chart()))]).unwrap();
        assert!(br.field == e3 || br.field == e3.neg(), "got {}", br.field);

        // anchor is identically zero
        let pt = Expr::var(a.chart(), "pt").unwrap();
        assert!(anchor_apply(&a, &e1, &pt).unwrap().is_zero());
    }

    #[test]
    fn de_rham_sections_commute_and_anchor_acts() {
        let a = de_rham_algebroid(2);
        let s1 = Section::new(&a, 1, &[("xi1", Expr::one(a.chart()))]).unwrap();
        let s2 = Section::new(&a, 1, &[("xi2", Expr::one(a.chart()))]).unwrap();
        let br = section_bracket(&a, &s1, &s2).unwrap();
        assert!(br.field.is_zero());
        let x1 = Expr::var(a.chart(), "x1").unwrap();
        assert_eq!(anchor_apply(&a, &s1, &x1).unwrap(), Expr::one(a.chart()));
    }

    #[test]
    fn leibniz_rule_for_sections() {
        // [u, f v] = ρ(u)[f] v + f [u, v] on a fixture with opaque
        // coefficients; both sides expanded exactly.
        let ch = pi_tm(2).with_func("g", &["x1", "x2"]).unwrap();
        let mut anchor = BTreeMap::new();
        for a in 1..=2 {
            anchor.insert((format!("xi{a}"), format!("x{a}")), Expr::one(&ch));
        }
        let alg = algebroid_from_structure(&ch, 1, 1, &anchor, &BTreeMap::new()).unwrap();
        let g = Expr::func(&ch, "g").unwrap();
        let u = Section::new(&alg, 1, &[("xi1", Expr::one(&ch))]).unwrap();
        let v = Section::new(&alg, 1, &[("xi2", Expr::one(&ch))]).unwrap();
        let fv = Section::from_field(&alg, 1, v.field.mul_left(&g)).unwrap();
        let lhs = section_bracket(&alg, &u, &fv).unwrap();
        let rho_f = anchor_apply(&alg, &u, &g).unwrap();
        let rhs = v.field.mul_left(&rho_f); // + f*[u,v] which is zero here
        assert_eq!(lhs.field, rhs);
    }

    fn t_pi_tm_fixture(n: usize) -> AlgebroidData {
        // T(ΠTM) with the lifted de Rham differential; degree 2, linear
        // component 0.
        let a = de_rham_algebroid(n);
        // collapse bi-weight to a single grading for the base chart first:
        // ΠTM chart (x:(0,0), xi:(0,1)) -> use component 1 as the linear one,
        // tangent lift appends component 2 as the hat grading.
        let t = lifts::tangent_chart(a.chart());
        let q_t = lifts::tangent_lift_field(a.q(), &t).unwrap();
        AlgebroidData::new(&t, q_t, 2, 1).unwrap()
    }

    #[test]
    fn lifted_de_rham_is_a_degree_two_weighted_algebroid() {
        let a = t_pi_tm_fixture(2);
        let rep = a.verify_weighted().unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn mis_weighted_q_reports_weight_residual() {
        // de Rham Q plus a fibre-degree-3-like wrong-weight term.
        let a = t_pi_tm_fixture(1);
        let ch = a.chart().clone();
        let dx = Expr::var(&ch, "dx1").unwrap();
        let xi = Expr::var(&ch, "xi1").unwrap();
        let mut q = a.q().clone();
        let x_id = ch.id_of("x1").unwrap();
        q.set_component(x_id, q.component(x_id).add(&dx.mul(&xi)));
        let bad = AlgebroidData::new(&ch, q, 2, 1).unwrap();
        let rep = bad.verify_weighted().unwrap();
        assert!(!rep.weight_residual.is_zero());
    }

    #[test]
    fn tower_projects_to_de_rham() {
        let a = t_pi_tm_fixture(2);
        let level1 = a.tower_project(1).unwrap();
        assert!(level1.verify_weighted().unwrap().passed());
        // level 1 of T(ΠTM) is ΠTM with the de Rham field
        let expected = de_rham_algebroid(2);
        assert_eq!(level1.chart().len(), expected.chart().len());
        for (c, comp) in level1.q().components() {
            let name = &level1.chart().coord(c).name;
            let id = expected.chart().id_of(name).unwrap();
            assert_eq!(comp.to_string(), expected.q().component(id).to_string());
        }
    }

    #[test]
    fn weighted_structure_functions_decompose_homogeneously() {
        // the structure functions read off a weighted Q are homogeneous
        // parts indexed by their hat weight, and the read-off round-trips
        let a = t_pi_tm_fixture(2);
        let (anchor, structure) = structure_from_q(&a).unwrap();
        for (_, rho) in &anchor {
            assert!(rho.homogeneous_weight().is_some());
        }
        let rebuilt = algebroid_from_structure(
            a.chart(),
            a.linear_component(),
            a.degree(),
            &anchor,
            &structure,
        )
        .unwrap();
        assert_eq!(rebuilt.q(), a.q());
    }

    #[test]
    fn section_weights_in_lifted_fixture() {
        // On T(ΠTM): sections of weight 1 and 2; bracket weights r1+r2-2.
        let a = t_pi_tm_fixture(2);
        let ch = a.chart().clone();
        let one = Expr::one(&ch);
        let dx1 = Expr::var(&ch, "dx1").unwrap();
        let s1 = Section::new(&a, 1, &[("dxi1", one.clone())]).unwrap();
        let s2 = Section::new(&a, 2, &[("xi1", one.clone()), ("dxi2", dx1.clone())]).unwrap();
        let br = section_bracket(&a, &s1, &s2).unwrap();
        assert_eq!(br.weight, 1);
        let br22 = section_bracket(&a, &s2, &s2).unwrap();
        assert_eq!(br22.weight, 2);
    }

    fn linear_poisson_bi_algebroid() -> BiAlgebroidData {
        // E = TM over R^2, P = x1 * chi_1 * chi_2 encodes {x,y} = x.
        let a = de_rham_algebroid(2);
        let b = bi_algebroid_from_algebroid(&a).unwrap();
        let ct = b.chart().clone();
        let p = Expr::var(&ct, "x1")
            .unwrap()
            .mul(&Expr::var(&ct, "p_xi1").unwrap())
            .mul(&Expr::var(&ct, "p_xi2").unwrap());
        triangular_bi_algebroid(&a, &p).unwrap()
    }

    #[test]
    fn triangular_bi_algebroid_verifies() {
        let b = linear_poisson_bi_algebroid();
        let rep = b.verify().unwrap();
        assert!(rep.passed(), "qq={} ss={} qs={}", rep.qq, rep.ss, rep.qs);
        // duality: swapping the roles is again a bi-algebroid
        let dual = b.dual().unwrap();
        assert!(dual.verify().unwrap().passed());
    }

    #[test]
    fn zero_poisson_bi_algebroid_verifies() {
        let a = de_rham_algebroid(1);
        let b = bi_algebroid_from_algebroid(&a).unwrap();
        assert!(b.verify().unwrap().passed());
    }

    #[test]
    fn perturbed_generator_fails() {
        // Perturb S directly; the {Q,S} residual is nonzero and reported.
        // (Any bivector on the plane is Poisson, so the perturbation has to
        // leave the triangular class.)
        let b0 = linear_poisson_bi_algebroid();
        let ct = b0.chart().clone();
        let x1 = Expr::var(&ct, "x1").unwrap();
        let chi1 = Expr::var(&ct, "p_xi1").unwrap();
        let p_x2 = Expr::var(&ct, "p_x2").unwrap();
        let s_pert = b0
            .s_ham
            .add(&Ham::new(x1.pow(2).mul(&chi1).mul(&p_x2)).unwrap());
        let b = BiAlgebroidData::new(
            &b0.pd_chart,
            &ct,
            b0.q_ham.clone(),
            s_pert,
            b0.degree,
            b0.theta_comp,
            b0.mom_comp,
        );
        let rep = b.verify().unwrap();
        assert!(!rep.qs.is_zero());
    }

    #[test]
    fn sharp_map_is_a_q_morphism() {
        let b = linear_poisson_bi_algebroid();
        let rep = b.sharp_map().unwrap();
        assert!(
            rep.passed(),
            "residuals: {:?}",
            rep.residuals
                .iter()
                .filter(|(_, e)| !e.is_zero())
                .map(|(n, e)| format!("{n}: {e}"))
                .collect::<Vec<_>>()
        );
        // zero S gives the zero map on velocities
        let a = de_rham_algebroid(1);
        let b0 = bi_algebroid_from_algebroid(&a).unwrap();
        let rep0 = b0.sharp_map().unwrap();
        assert!(rep0.passed());
    }

    #[test]
    fn courant_pairing_and_dorfman_on_t_tm() {
        // D = T(TM) over R: bi-algebroid with zero dual structure, λ = 1.
        let a = t_pi_tm_fixture(1);
        let b = bi_algebroid_from_algebroid(&a).unwrap();
        let c = courant_from_bi_algebroid(&b, Coeff::one()).unwrap();
        assert!(c.verify().unwrap().passed());
        let ch = c.chart().clone();
        // Θ reproduces the displayed generator Σ θ p
        let expect = Expr::var(&ch, "xi1")
            .unwrap()
            .mul(&Expr::var(&ch, "p_x1").unwrap())
            .add(
                &Expr::var(&ch, "dxi1")
                    .unwrap()
                    .mul(&Expr::var(&ch, "p_dx1").unwrap()),
            );
        assert_eq!(c.theta.expr(), &expect);

        // pairing of a conjugate pair is ±1
        let chi = Expr::var(&ch, "p_xi1").unwrap();
        let th = Expr::var(&ch, "xi1").unwrap();
        let p = c.pairing(&chi, &th).unwrap();
        assert!(
            p == Expr::one(&ch) || p == Expr::from_int(&ch, -1),
            "got {p}"
        );
        // isotropic half
        let chi2 = Expr::var(&ch, "p_dxi1").unwrap();
        assert!(c.pairing(&chi, &chi2).unwrap().is_zero());

        // zero section brackets to zero
        assert!(c.dorfman(&Expr::zero(&ch), &th).unwrap().is_zero());
    }

    #[test]
    fn degree_two_triangular_structure_and_sharp() {
        // a weighted bivector of collapsed tri-weight (1, 0, 2) on the
        // degree-2 fixture; exercises the sharp map with a nonzero dual
        // structure and velocity-name disambiguation on charts that carry
        // d-prefixed coordinates already
        let a = t_pi_tm_fixture(1);
        let b0 = bi_algebroid_from_algebroid(&a).unwrap();
        let ct = b0.chart().clone();
        let p = Expr::var(&ct, "p_xi1")
            .unwrap()
            .mul(&Expr::var(&ct, "p_dxi1").unwrap());
        let b = triangular_bi_algebroid(&a, &p).unwrap();
        assert!(b.verify().unwrap().passed());
        assert!(b.sharp_map().unwrap().passed());
        assert!(b.dual().unwrap().verify().unwrap().passed());
        assert!(b.dual().unwrap().sharp_map().unwrap().passed());
        let c = courant_from_bi_algebroid(&b, Coeff::one()).unwrap();
        assert!(c.verify().unwrap().passed());
    }

    #[test]
    fn courant_lambda_zero_is_q() {
        let a = de_rham_algebroid(1);
        let b = bi_algebroid_from_algebroid(&a).unwrap();
        let c = courant_from_bi_algebroid(&b, Coeff::zero()).unwrap();
        let moved = Substitution::new(
            b.chart(),
            c.chart(),
            &BTreeMap::new(),
        )
        .unwrap()
        .apply(b.q_ham.expr())
        .unwrap();
        assert_eq!(c.theta.expr(), &moved);
    }
}
