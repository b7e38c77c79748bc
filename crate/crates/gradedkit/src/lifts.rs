//! Homogeneity actions and the chart lifts.
//!
//! A homogeneity action is a polynomial family `h(t, ·)` of chart
//! endomorphisms; verifying `h_1 = id` and `h_t ∘ h_s = h_{ts}` as exact
//! polynomial identities is what makes a chart's grading honest. The rest
//! of the module builds new charts out of old ones: tangent and phase
//! (cotangent) lifts, higher tangents, parity reversion, weight collapsing
//! and the truncation tower.

use crate::fields::{FieldError, Ham, VecField};
use crate::grading::{Chart, ChartError, CoordId, Coordinate, FnDecl, Pairing, Parity, Weight};
use crate::symalg::{int, Expr, ExprError, Substitution};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum LiftError {
    Chart(ChartError),
    Expr(ExprError),
    Field(FieldError),
    NotLinearComponent { coord: String, component: usize },
    ActionNotVerified,
    OutOfSupportedClass { coord: String, detail: String },
    OpaqueSymbolInHigherLift(String),
    NotMomentumQuadratic,
    NotDiagonal(String),
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::Chart(e) => write!(f, "{e}"),
            LiftError::Expr(e) => write!(f, "{e}"),
            LiftError::Field(e) => write!(f, "{e}"),
            LiftError::NotLinearComponent { coord, component } => write!(
                f,
                "weight component {component} of `{coord}` is not in {{0,1}}; no linear structure"
            ),
            LiftError::ActionNotVerified => write!(f, "action failed verification"),
            LiftError::OutOfSupportedClass { coord, detail } => write!(
                f,
                "homogenization out of supported class at `{coord}`: {detail}"
            ),
            LiftError::OpaqueSymbolInHigherLift(n) => write!(
                f,
                "higher tangent lift of opaque symbol `{n}` is unsupported"
            ),
            LiftError::NotMomentumQuadratic => {
                write!(f, "expression is not momentum-quadratic")
            }
            LiftError::NotDiagonal(n) => write!(
                f,
                "action is not diagonal at `{n}`; homogenize it before lifting"
            ),
        }
    }
}

impl std::error::Error for LiftError {}

impl From<ChartError> for LiftError {
    fn from(e: ChartError) -> Self {
        LiftError::Chart(e)
    }
}
impl From<ExprError> for LiftError {
    fn from(e: ExprError) -> Self {
        LiftError::Expr(e)
    }
}
impl From<FieldError> for LiftError {
    fn from(e: FieldError) -> Self {
        LiftError::Field(e)
    }
}

// ---------------------------------------------------------------------------
// Homogeneity actions

/// A polynomial action `h(t, ·)` of the multiplicative monoid of reals.
#[derive(Debug, Clone)]
pub struct HomAction {
    chart: Arc<Chart>,
    /// Chart extended with the formal parameter.
    ext: Arc<Chart>,
    param: CoordId,
    /// Image of each chart coordinate, as an expression on `ext`.
    images: Vec<Expr>,
}

/// Residuals of the monoid-action laws, reported as exact polynomials.
#[derive(Debug, Clone)]
pub struct ActionReport {
    /// `h(1,·) - id`, one residual per coordinate, on the plain chart.
    pub unit_residuals: Vec<(String, Expr)>,
    /// `h_t∘h_s - h_{ts}`, per coordinate, on the chart extended by `t,s`.
    pub composition_residuals: Vec<(String, Expr)>,
}

impl ActionReport {
    pub fn passed(&self) -> bool {
        self.unit_residuals.iter().all(|(_, e)| e.is_zero())
            && self.composition_residuals.iter().all(|(_, e)| e.is_zero())
    }
}

impl HomAction {
    /// Action from a name-keyed coordinate map; entries missing from the
    /// map are fixed points. Images are parsed on the extended chart.
    pub fn new(
        chart: &Arc<Chart>,
        param: &str,
        images: &BTreeMap<String, Expr>,
    ) -> Result<HomAction, LiftError> {
        let ext = chart.extend_params(&[param]);
        let pid = ext.id_of(param).expect("parameter was just added");
        let mut imgs = Vec::with_capacity(chart.len());
        for c in chart.coords() {
            let img = match images.get(&c.name) {
                Some(e) => {
                    assert!(Chart::same(e.chart(), &ext), "image on wrong chart");
                    e.clone()
                }
                None => Expr::var(&ext, &c.name)?,
            };
            match img.parity() {
                Some(p) if img.is_zero() || p == c.parity => {}
                _ => {
                    return Err(LiftError::Expr(ExprError::ParityMismatch {
                        coord: c.name.clone(),
                    }))
                }
            }
            imgs.push(img);
        }
        Ok(HomAction {
            chart: chart.clone(),
            ext,
            param: pid,
            images: imgs,
        })
    }

    /// The canonical action of a chart: scale each coordinate by
    /// `t^{total weight}`.
    pub fn canonical(chart: &Arc<Chart>, param: &str) -> HomAction {
        let ext = chart.extend_params(&[param]);
        let pid = ext.id_of(param).unwrap();
        let t = Expr::coord(&ext, pid);
        let images = chart
            .coords()
            .iter()
            .enumerate()
            .map(|(i, c)| t.pow(c.weight.total()).mul(&Expr::coord(&ext, i)))
            .collect();
        HomAction {
            chart: chart.clone(),
            ext,
            param: pid,
            images,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn extended_chart(&self) -> &Arc<Chart> {
        &self.ext
    }

    pub fn param_name(&self) -> &str {
        &self.ext.coord(self.param).name
    }

    pub fn image(&self, c: CoordId) -> &Expr {
        &self.images[c]
    }

    /// The pullback `h_t^*` as a substitution chart -> extended chart.
    pub fn pullback(&self) -> Substitution {
        let mut map = BTreeMap::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            map.insert(c.name.clone(), self.images[i].clone());
        }
        Substitution::new(&self.chart, &self.ext, &map).expect("parity-preserving by construction")
    }

    /// Verify the monoid laws exactly.
    pub fn verify(&self) -> Result<ActionReport, LiftError> {
        // h_1 = id
        let mut unit_residuals = Vec::new();
        {
            let mut map = BTreeMap::new();
            map.insert(self.param_name().to_string(), Expr::one(&self.chart));
            let at_one = Substitution::new(&self.ext, &self.chart, &map)?;
            for (i, c) in self.chart.coords().iter().enumerate() {
                let img = at_one.apply(&self.images[i])?;
                let res = img.sub(&Expr::coord(&self.chart, i));
                unit_residuals.push((c.name.clone(), res));
            }
        }
        // h_t ∘ h_s = h_{ts} on the chart extended by both parameters.
        let tname = self.param_name().to_string();
        let sname = if tname == "s" { "s2".to_string() } else { "s".to_string() };
        let ext2 = self.chart.extend_params(&[&tname, &sname]);
        let t2 = Expr::var(&ext2, &tname)?;
        let s2 = Expr::var(&ext2, &sname)?;

        // images with parameter renamed
        let to_ext2_t = Substitution::identity(&self.ext);
        let _ = to_ext2_t;
        let reparam = |param_expr: &Expr| -> Result<Vec<Expr>, LiftError> {
            let mut map = BTreeMap::new();
            map.insert(tname.clone(), param_expr.clone());
            let sub = Substitution::new(&self.ext, &ext2, &map)?;
            let mut out = Vec::new();
            for img in &self.images {
                out.push(sub.apply(img)?);
            }
            Ok(out)
        };
        let images_t = reparam(&t2)?;
        let images_s = reparam(&s2)?;
        let images_ts = reparam(&t2.mul(&s2))?;

        // h_t ∘ h_s pullback on x_i: substitute x_j -> images_s[j] into images_t[i].
        let mut smap = BTreeMap::new();
        for (j, c) in self.chart.coords().iter().enumerate() {
            smap.insert(c.name.clone(), images_s[j].clone());
        }
        let sub_s = Substitution::new(&ext2, &ext2, &smap)?;

        let mut composition_residuals = Vec::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let lhs = sub_s.apply(&images_t[i])?;
            let res = lhs.sub(&images_ts[i]);
            composition_residuals.push((c.name.clone(), res));
        }
        Ok(ActionReport {
            unit_residuals,
            composition_residuals,
        })
    }

    /// Maximal power of the parameter across the images; a degree of the
    /// homogeneity structure. Requires a verified action.
    pub fn degree(&self) -> Result<u32, LiftError> {
        if !self.verify()?.passed() {
            return Err(LiftError::ActionNotVerified);
        }
        Ok(self
            .images
            .iter()
            .map(|e| e.degree_in(self.param))
            .max()
            .unwrap_or(0))
    }

    /// Exact Taylor coefficients of each coordinate image in the parameter.
    pub fn taylor_frame(&self) -> Result<TaylorFrame, LiftError> {
        let mut rows = Vec::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let coeffs = self.images[i].coefficients_in(self.param);
            let top = coeffs.keys().max().copied().unwrap_or(0);
            let mut row = Vec::new();
            for j in 0..=top {
                let e = coeffs
                    .get(&j)
                    .cloned()
                    .unwrap_or_else(|| Expr::zero(&self.ext));
                row.push(self.strip_param(&e)?);
            }
            rows.push((c.name.clone(), row));
        }
        Ok(TaylorFrame { rows })
    }

    fn strip_param(&self, e: &Expr) -> Result<Expr, LiftError> {
        let sub = Substitution::new(&self.ext, &self.chart, &BTreeMap::new())
            .expect("name-identity substitution");
        Ok(sub.apply(e)?)
    }

    /// Is the action the canonical diagonal one?
    pub fn is_canonical(&self) -> bool {
        let canon = HomAction::canonical(&self.chart, self.param_name());
        self.images == canon.images
    }

    /// Find a coordinate change making the action canonical. Supported
    /// class: for every coordinate, the Taylor coefficient of the declared
    /// weight is that coordinate plus terms in strictly earlier
    /// coordinates. The inverse is then a unipotent triangular
    /// substitution; composing the change with the action is re-verified
    /// to be canonical by the caller via `verify_change`.
    pub fn homogenize(&self) -> Result<Substitution, LiftError> {
        if !self.verify()?.passed() {
            return Err(LiftError::ActionNotVerified);
        }
        let mut map = BTreeMap::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let w = c.weight.total();
            let coeffs = self.images[i].coefficients_in(self.param);
            let top = coeffs
                .get(&w)
                .cloned()
                .unwrap_or_else(|| Expr::zero(&self.ext));
            let new_coord = self.strip_param(&top)?;
            // triangularity: new_coord = c + (terms in coordinates declared
            // strictly before c)
            let remainder = new_coord.sub(&Expr::coord(&self.chart, i));
            for j in i..self.chart.len() {
                if remainder.depends_on(j) {
                    return Err(LiftError::OutOfSupportedClass {
                        coord: c.name.clone(),
                        detail: format!(
                            "top Taylor coefficient involves `{}`",
                            self.chart.coord(j).name
                        ),
                    });
                }
            }
            map.insert(c.name.clone(), new_coord);
        }
        Ok(Substitution::new(&self.chart, &self.chart, &map)?)
    }

    /// Residuals of `h^*(P_c) - t^{w_c} P_c` for a claimed homogenizing
    /// change; all zero exactly when the change conjugates the action to
    /// the canonical one.
    pub fn verify_change(&self, change: &Substitution) -> Result<Vec<(String, Expr)>, LiftError> {
        let pb = self.pullback();
        let tid = self.param;
        let t = Expr::coord(&self.ext, tid);
        let embed = Substitution::new(&self.chart, &self.ext, &BTreeMap::new())?;
        let mut out = Vec::new();
        for (i, c) in self.chart.coords().iter().enumerate() {
            let p_c = change.image(i);
            let lhs = pb.apply(p_c)?;
            let rhs = t.pow(c.weight.total()).mul(&embed.apply(p_c)?);
            out.push((c.name.clone(), lhs.sub(&rhs)));
        }
        Ok(out)
    }
}

/// Taylor coefficients of a homogeneity action, row per coordinate.
#[derive(Debug, Clone)]
pub struct TaylorFrame {
    pub rows: Vec<(String, Vec<Expr>)>,
}

impl TaylorFrame {
    pub fn row(&self, name: &str) -> Option<&[Expr]> {
        self.rows
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.as_slice())
    }
}

// ---------------------------------------------------------------------------
// Weight vector fields

/// The generator of one grading component: `Σ w_i(c) · c ∂/∂c`.
pub fn weight_vector_field(chart: &Arc<Chart>, component: usize) -> VecField {
    let mut field = VecField::zero(chart);
    for (i, c) in chart.coords().iter().enumerate() {
        let w = c.weight.component(component);
        if w > 0 {
            field.set_component(i, Expr::coord(chart, i).scale(&int(w as i64)));
        }
    }
    field
}

// ---------------------------------------------------------------------------
// Chart lifts

/// Velocity names for every coordinate of a chart, collision-free against
/// the existing names and against each other: `d<name>` with underscores
/// inserted after the `d` until the name is fresh.
pub(crate) fn velocity_names(chart: &Chart) -> Vec<String> {
    let mut taken: std::collections::BTreeSet<String> =
        chart.coords().iter().map(|c| c.name.clone()).collect();
    let mut out = Vec::with_capacity(chart.len());
    for c in chart.coords() {
        if c.formal {
            out.push(String::new());
            continue;
        }
        let mut sep = String::new();
        loop {
            let candidate = format!("d{sep}{}", c.name);
            if !taken.contains(&candidate) {
                taken.insert(candidate.clone());
                out.push(candidate);
                break;
            }
            sep.push('_');
        }
    }
    out
}

/// Jet-copy names of order 0..=k for every coordinate, with the same
/// collision escalation; order 0 is the coordinate itself and order 1 is
/// its velocity name.
pub(crate) fn jet_names(chart: &Chart, k: u32) -> Vec<Vec<String>> {
    let mut taken: std::collections::BTreeSet<String> =
        chart.coords().iter().map(|c| c.name.clone()).collect();
    let mut out: Vec<Vec<String>> = chart
        .coords()
        .iter()
        .map(|c| vec![c.name.clone()])
        .collect();
    for j in 1..=k {
        for (i, c) in chart.coords().iter().enumerate() {
            if c.formal {
                continue;
            }
            let stem = if j == 1 {
                "d".to_string()
            } else {
                format!("d{j}")
            };
            let mut sep = String::new();
            loop {
                let candidate = format!("{stem}{sep}{}", c.name);
                if !taken.contains(&candidate) {
                    taken.insert(candidate.clone());
                    out[i].push(candidate);
                    break;
                }
                sep.push('_');
            }
        }
    }
    out
}

fn momentum_name(name: &str) -> String {
    format!("p_{name}")
}

/// Tangent lift of a chart: each coordinate gains a velocity `d<name>` of
/// the same parity; weights gain a new component, 0 on originals and 1 on
/// velocities.
pub fn tangent_chart(chart: &Arc<Chart>) -> Arc<Chart> {
    let arity = chart.arity() + 1;
    let mut coords = Vec::with_capacity(chart.len() * 2);
    for c in chart.coords() {
        let mut w = c.weight.0.clone();
        w.push(0);
        coords.push(Coordinate {
            name: c.name.clone(),
            weight: Weight(w),
            parity: c.parity,
            formal: c.formal,
        });
    }
    let vnames = velocity_names(chart);
    for (i, c) in chart.coords().iter().enumerate() {
        if c.formal {
            continue;
        }
        let mut w = c.weight.0.clone();
        w.push(1);
        coords.push(Coordinate {
            name: vnames[i].clone(),
            weight: Weight(w),
            parity: c.parity,
            formal: false,
        });
    }
    let mut bound = chart.degree_bound().0.clone();
    bound.push(1);
    chart.derive(arity, coords, chart.funcs().to_vec(), Weight(bound), None)
}

/// Phase (cotangent) lift: adds a momentum `p_<name>` for every
/// coordinate, of the same parity, with weight `degreeBound - weight`
/// in the old components and 1 in the new one. Conjugate pairs are
/// recorded for the canonical Poisson bracket.
pub fn cotangent_chart(chart: &Arc<Chart>) -> Arc<Chart> {
    let arity = chart.arity() + 1;
    let bound = chart.degree_bound();
    let mut coords = Vec::with_capacity(chart.len() * 2);
    for c in chart.coords() {
        let mut w = c.weight.0.clone();
        w.push(0);
        coords.push(Coordinate {
            name: c.name.clone(),
            weight: Weight(w),
            parity: c.parity,
            formal: c.formal,
        });
    }
    let mut pairs = Vec::new();
    let mut next = coords.len();
    for (i, c) in chart.coords().iter().enumerate() {
        if c.formal {
            continue;
        }
        let mut w: Vec<u32> = bound
            .0
            .iter()
            .zip(&c.weight.0)
            .map(|(d, u)| d - u)
            .collect();
        w.push(1);
        coords.push(Coordinate {
            name: momentum_name(&c.name),
            weight: Weight(w),
            parity: c.parity,
            formal: false,
        });
        pairs.push((i, next));
        next += 1;
    }
    let mut db = bound.0.clone();
    db.push(1);
    let lifted = chart.derive(arity, coords, chart.funcs().to_vec(), Weight(db), None);
    lifted.with_pairing(Pairing {
        pairs,
        momentum_parity_shift: Parity::Even,
    })
}

/// The multivector chart `ΠT*`: cotangent lift with parity-reversed
/// momenta, whose canonical bracket is the Schouten bracket.
pub fn multivector_chart(chart: &Arc<Chart>) -> Arc<Chart> {
    let ct = cotangent_chart(chart);
    parity_reverse(&ct, ct.arity() - 1).expect("momentum component is linear")
}

/// Higher tangent lift: `k+1` jet copies of every coordinate, weights
/// shifted by the jet order in a new component.
pub fn higher_tangent_chart(chart: &Arc<Chart>, k: u32) -> Arc<Chart> {
    let arity = chart.arity() + 1;
    let jets = jet_names(chart, k);
    let mut coords = Vec::new();
    for j in 0..=k {
        for (i, c) in chart.coords().iter().enumerate() {
            if c.formal && j > 0 {
                continue;
            }
            let mut w = c.weight.0.clone();
            w.push(j);
            coords.push(Coordinate {
                name: jets[i][j as usize].clone(),
                weight: Weight(w),
                parity: c.parity,
                formal: c.formal && j == 0,
            });
        }
    }
    let mut bound = chart.degree_bound().0.clone();
    bound.push(k);
    chart.derive(arity, coords, chart.funcs().to_vec(), Weight(bound), None)
}

/// Flip the parity of every coordinate whose designated weight component
/// equals one; the component must be `{0,1}`-valued (a linear structure).
pub fn parity_reverse(chart: &Arc<Chart>, component: usize) -> Result<Arc<Chart>, LiftError> {
    let mut coords = Vec::with_capacity(chart.len());
    for c in chart.coords() {
        let v = c.weight.component(component);
        if v > 1 {
            return Err(LiftError::NotLinearComponent {
                coord: c.name.clone(),
                component,
            });
        }
        let parity = if v == 1 { c.parity.add(Parity::Odd) } else { c.parity };
        coords.push(Coordinate {
            name: c.name.clone(),
            weight: c.weight.clone(),
            parity,
            formal: c.formal,
        });
    }
    // Pairing survives when the flip keeps the momentum parity shift
    // uniform.
    let pairing = chart.pairing().and_then(|p| {
        let mut shift: Option<Parity> = None;
        for (b, m) in &p.pairs {
            let s = coords[*b].parity.add(coords[*m].parity);
            match shift {
                None => shift = Some(s),
                Some(q) if q == s => {}
                _ => return None,
            }
        }
        Some(Pairing {
            pairs: p.pairs.clone(),
            momentum_parity_shift: shift.unwrap_or(Parity::Even),
        })
    });
    Ok(chart.derive(
        chart.arity(),
        coords,
        chart.funcs().to_vec(),
        chart.degree_bound().clone(),
        pairing,
    ))
}

/// Sum the designated weight components into the slot of the smallest
/// index; arity drops accordingly.
pub fn collapse_weights(chart: &Arc<Chart>, components: &[usize]) -> Arc<Chart> {
    if components.len() <= 1 {
        return chart.clone();
    }
    let mut comps: Vec<usize> = components.to_vec();
    comps.sort_unstable();
    comps.dedup();
    let slot = comps[0];
    let collapse = |w: &Weight| -> Weight {
        let mut out = Vec::new();
        for (i, v) in w.0.iter().enumerate() {
            if i == slot {
                out.push(comps.iter().map(|&c| w.0[c]).sum());
            } else if !comps.contains(&i) {
                out.push(*v);
            }
        }
        Weight(out)
    };
    let coords = chart
        .coords()
        .iter()
        .map(|c| Coordinate {
            name: c.name.clone(),
            weight: collapse(&c.weight),
            parity: c.parity,
            formal: c.formal,
        })
        .collect();
    chart.derive(
        chart.arity() - comps.len() + 1,
        coords,
        chart.funcs().to_vec(),
        collapse(chart.degree_bound()),
        chart.pairing().cloned(),
    )
}

/// Swap two weight components; used for the bi-algebroid duality.
pub fn swap_weight_components(chart: &Arc<Chart>, i: usize, j: usize) -> Arc<Chart> {
    let swap = |w: &Weight| -> Weight {
        let mut v = w.0.clone();
        v.swap(i, j);
        Weight(v)
    };
    let coords = chart
        .coords()
        .iter()
        .map(|c| Coordinate {
            name: c.name.clone(),
            weight: swap(&c.weight),
            parity: c.parity,
            formal: c.formal,
        })
        .collect();
    chart.derive(
        chart.arity(),
        coords,
        chart.funcs().to_vec(),
        swap(chart.degree_bound()),
        chart.pairing().cloned(),
    )
}

/// Truncate to total weight ≤ l; returns the truncated chart together
/// with the projection substitution (dropped coordinates -> 0).
pub fn truncate_chart(chart: &Arc<Chart>, l: u32) -> (Arc<Chart>, Substitution) {
    let mut coords = Vec::new();
    let mut keep = Vec::new();
    let mut remap: BTreeMap<CoordId, CoordId> = BTreeMap::new();
    for (i, c) in chart.coords().iter().enumerate() {
        if c.weight.total() <= l {
            remap.insert(i, coords.len());
            keep.push(i);
            coords.push(c.clone());
        }
    }
    let funcs = chart
        .funcs()
        .iter()
        .filter(|f| f.args.iter().all(|a| remap.contains_key(a)))
        .map(|f| FnDecl {
            name: f.name.clone(),
            args: f.args.iter().map(|a| remap[a]).collect(),
        })
        .collect();
    let pairing = chart.pairing().and_then(|p| {
        let pairs: Vec<(CoordId, CoordId)> = p
            .pairs
            .iter()
            .filter(|(b, m)| remap.contains_key(b) && remap.contains_key(m))
            .map(|(b, m)| (remap[b], remap[m]))
            .collect();
        if pairs.is_empty() {
            None
        } else {
            Some(Pairing {
                pairs,
                momentum_parity_shift: p.momentum_parity_shift,
            })
        }
    });
    let mut bound = Weight::zero(chart.arity());
    for c in &coords {
        bound = bound.cmax(&c.weight);
    }
    let truncated = chart.derive(chart.arity(), coords, funcs, bound, pairing);
    let mut map = BTreeMap::new();
    for (i, c) in chart.coords().iter().enumerate() {
        if !remap.contains_key(&i) {
            map.insert(c.name.clone(), Expr::zero(&truncated));
        }
    }
    let sub = Substitution::new(chart, &truncated, &map).expect("projection is parity-safe");
    (truncated, sub)
}

/// A substitution renaming coordinates across charts: unmapped names map
/// to the target coordinate of the same name.
pub fn rename_substitution(
    source: &Arc<Chart>,
    target: &Arc<Chart>,
    names: &BTreeMap<String, String>,
) -> Result<Substitution, ExprError> {
    let mut map = BTreeMap::new();
    for c in source.coords() {
        if let Some(newname) = names.get(&c.name) {
            map.insert(c.name.clone(), Expr::var(target, newname)?);
        }
    }
    Substitution::new(source, target, &map)
}

// ---------------------------------------------------------------------------
// Tangent lifts of expressions, fields and actions

/// The pullback inclusion of a chart into its tangent lift (names are
/// preserved on the originals).
pub fn tangent_inclusion(source: &Arc<Chart>, target: &Arc<Chart>) -> Substitution {
    Substitution::new(source, target, &BTreeMap::new()).expect("tangent chart keeps names")
}

/// The velocity derivation `d_T` over the inclusion: coordinates map to
/// their velocities, opaque symbols differentiate by the chain rule.
/// Parity-preserving, so no Koszul signs appear.
pub fn velocity(e: &Expr, target: &Arc<Chart>) -> Result<Expr, LiftError> {
    let source = e.chart().clone();
    let vnames = velocity_names(&source);
    let incl = tangent_inclusion(&source, target);
    let mut out = Expr::zero(target);
    for (m, coeff) in e.terms() {
        // d_T of the monomial: replace one factor at a time.
        let mut factors: Vec<Expr> = Vec::new();
        let mut velocities: Vec<Expr> = Vec::new();
        for (c, exp) in &m.powers {
            let name = &source.coord(*c).name;
            let x = Expr::var(target, name)?;
            let dx = if vnames[*c].is_empty() {
                Expr::zero(target) // formal parameters have no velocity
            } else {
                Expr::var(target, &vnames[*c])?
            };
            for _ in 0..*exp {
                factors.push(x.clone());
                velocities.push(dx.clone());
            }
        }
        for (app, exp) in &m.fns {
            let phi = incl.apply(&Expr::fn_app(&source, app.clone()))?;
            let mut dphi = Expr::zero(target);
            for a in &app.args {
                let mut der = app.clone();
                der.derivs.push(*a);
                der.derivs.sort_unstable();
                let der_t = incl.apply(&Expr::fn_app(&source, der))?;
                let vel = if vnames[*a].is_empty() {
                    Expr::zero(target)
                } else {
                    Expr::var(target, &vnames[*a])?
                };
                dphi = dphi.add(&der_t.mul(&vel));
            }
            for _ in 0..*exp {
                factors.push(phi.clone());
                velocities.push(dphi.clone());
            }
        }
        let mut total = Expr::zero(target);
        for i in 0..factors.len() {
            let mut prod = Expr::constant(target, coeff.clone());
            for (j, f) in factors.iter().enumerate() {
                prod = prod.mul(if j == i { &velocities[i] } else { f });
                if prod.is_zero() {
                    break;
                }
            }
            total = total.add(&prod);
        }
        out = out.add(&total);
    }
    Ok(out)
}

/// Higher-order analogue of [`velocity`]: coefficients of `t^0..t^k` in
/// the image of `e` under `x -> Σ_j t^j d{j}x`. Opaque symbols are
/// rejected for orders above one.
pub fn higher_velocity(e: &Expr, target: &Arc<Chart>, k: u32) -> Result<Vec<Expr>, LiftError> {
    let source = e.chart().clone();
    if k == 0 {
        let incl = Substitution::new(&source, target, &BTreeMap::new())?;
        return Ok(vec![incl.apply(e)?]);
    }
    for (m, _) in e.terms() {
        if let Some((app, _)) = m.fns.iter().next() {
            if k > 1 {
                return Err(LiftError::OpaqueSymbolInHigherLift(app.name.clone()));
            }
        }
    }
    if k == 1 {
        let incl = tangent_inclusion(&source, target);
        return Ok(vec![incl.apply(e)?, velocity(e, target)?]);
    }
    let ext = target.extend_params(&["_jet"]);
    let t = Expr::var(&ext, "_jet")?;
    let jets = jet_names(&source, k);
    let mut map = BTreeMap::new();
    for (i, c) in source.coords().iter().enumerate() {
        if c.formal {
            continue;
        }
        let mut img = Expr::var(&ext, &c.name)?;
        for j in 1..=k {
            img = img.add(&t.pow(j).mul(&Expr::var(&ext, &jets[i][j as usize])?));
        }
        map.insert(c.name.clone(), img);
    }
    let sub = Substitution::new(&source, &ext, &map)?;
    let curve = sub.apply(e)?;
    let tid = ext.id_of("_jet").unwrap();
    let coeffs = curve.coefficients_in(tid);
    let back = Substitution::new(&ext, target, &BTreeMap::new())?;
    let mut out = Vec::new();
    for j in 0..=k {
        let c = coeffs.get(&j).cloned().unwrap_or_else(|| Expr::zero(&ext));
        out.push(back.apply(&c)?);
    }
    Ok(out)
}

/// Complete (tangent) lift of a vector field: the original components are
/// included, the velocity components are their `d_T`-derivatives.
pub fn tangent_lift_field(x: &VecField, target: &Arc<Chart>) -> Result<VecField, LiftError> {
    let source = x.chart().clone();
    let vnames = velocity_names(&source);
    let incl = tangent_inclusion(&source, target);
    let mut out = VecField::zero(target);
    for (c, comp) in x.components() {
        let name = &source.coord(c).name;
        let tid = target.require(name)?;
        out.set_component(tid, incl.apply(comp)?);
        if let Some(vid) = target.id_of(&vnames[c]) {
            out.set_component(vid, velocity(comp, target)?);
        }
    }
    Ok(out)
}

/// Tangent lift of a homogeneity action: originals keep their images,
/// velocities get the `d_T`-derivative of the image.
pub fn tangent_lift_action(h: &HomAction) -> Result<HomAction, LiftError> {
    let tchart = tangent_chart(h.chart());
    let text = tchart.extend_params(&[h.param_name()]);
    // velocity() from h.ext into text: h.ext = chart + t, and text contains
    // both the lifted coordinates and t (with no velocity for t).
    let vnames = velocity_names(h.chart());
    let mut images = BTreeMap::new();
    for (i, c) in h.chart().coords().iter().enumerate() {
        let incl = Substitution::new(h.extended_chart(), &text, &BTreeMap::new())?;
        images.insert(c.name.clone(), incl.apply(h.image(i))?);
        images.insert(vnames[i].clone(), velocity(h.image(i), &text)?);
    }
    HomAction::new(&tchart, h.param_name(), &images)
}

// ---------------------------------------------------------------------------
// Tangent lift of Poisson structures

/// Complete lift `d_T` of a multivector (a Hamiltonian on a `ΠT*`-chart),
/// applied `k` times. The lift is the derivation over the pullback that
/// sends a base coordinate to its velocity and a momentum to itself, while
/// the pullback sends a momentum to its velocity-momentum.
pub fn tangent_lift_poisson(p: &Ham, k: u32) -> Result<Ham, LiftError> {
    let mut current = p.clone();
    for _ in 0..k {
        current = tangent_lift_poisson_once(&current)?;
    }
    Ok(current)
}

fn tangent_lift_poisson_once(p: &Ham) -> Result<Ham, LiftError> {
    // momentum degree 2 check
    let chart = p.chart().clone();
    let pairing = chart.pairing().ok_or(FieldError::NoPairing)?.clone();
    for (m, _) in p.expr().terms() {
        let deg: u32 = m
            .powers
            .iter()
            .filter(|(c, _)| pairing.base_of(*c).is_some())
            .map(|(_, e)| *e)
            .sum();
        if deg != 2 {
            return Err(LiftError::NotMomentumQuadratic);
        }
    }
    // Base chart: strip momenta.
    let base_ids: Vec<CoordId> = pairing.pairs.iter().map(|(b, _)| *b).collect();
    let base_coords: Vec<Coordinate> = base_ids
        .iter()
        .map(|&i| {
            let c = chart.coord(i);
            Coordinate {
                name: c.name.clone(),
                weight: Weight(c.weight.0[..chart.arity() - 1].to_vec()),
                parity: c.parity,
                formal: c.formal,
            }
        })
        .collect();
    let base = chart.derive(
        chart.arity() - 1,
        base_coords,
        chart
            .funcs()
            .iter()
            .map(|f| FnDecl {
                name: f.name.clone(),
                args: f
                    .args
                    .iter()
                    .map(|a| base_ids.iter().position(|b| b == a).unwrap())
                    .collect(),
            })
            .collect(),
        Weight(chart.degree_bound().0[..chart.arity() - 1].to_vec()),
        None,
    );
    let tbase = tangent_chart(&base);
    let target = multivector_chart(&tbase);
    let vnames = velocity_names(&base);
    let vname_of = |gid: CoordId| -> &str {
        let pos = base_ids.iter().position(|b| *b == gid).expect("base coordinate");
        &vnames[pos]
    };

    // iota: x -> x, p_c -> p_{dc}; d_T: x -> dx, p_c -> p_c.
    let mut iota_map = BTreeMap::new();
    let mut dt_map = BTreeMap::new();
    for (b, m) in &pairing.pairs {
        let bname = &chart.coord(*b).name;
        let mname = &chart.coord(*m).name;
        iota_map.insert(
            mname.clone(),
            Expr::var(&target, &momentum_name(vname_of(*b)))?,
        );
        dt_map.insert(mname.clone(), Expr::var(&target, mname)?);
        dt_map.insert(bname.clone(), Expr::var(&target, vname_of(*b))?);
    }
    let iota = Substitution::new(&chart, &target, &iota_map)?;

    // d_T as an iota-derivation over the factors of each monomial. The
    // lift preserves parity in the combined bookkeeping, so factors are
    // replaced one at a time without extra signs; Expr::mul restores the
    // canonical order.
    let mut out = Expr::zero(&target);
    for (m, coeff) in p.expr().terms() {
        let mut factors: Vec<Expr> = Vec::new();
        let mut lifted: Vec<Expr> = Vec::new();
        for (c, e) in &m.powers {
            let name = &chart.coord(*c).name;
            let fx = iota.apply(&Expr::coord(&chart, *c))?;
            let dx = match dt_map.get(name) {
                Some(v) => v.clone(),
                None => Expr::zero(&target),
            };
            for _ in 0..*e {
                factors.push(fx.clone());
                lifted.push(dx.clone());
            }
        }
        for (app, e) in &m.fns {
            let phi = iota.apply(&Expr::fn_app(&chart, app.clone()))?;
            let mut dphi = Expr::zero(&target);
            for a in &app.args {
                let mut der = app.clone();
                der.derivs.push(*a);
                der.derivs.sort_unstable();
                let der_t = iota.apply(&Expr::fn_app(&chart, der))?;
                let vel = Expr::var(&target, vname_of(*a))?;
                dphi = dphi.add(&der_t.mul(&vel));
            }
            for _ in 0..*e {
                factors.push(phi.clone());
                lifted.push(dphi.clone());
            }
        }
        let mut total = Expr::zero(&target);
        for i in 0..factors.len() {
            let mut prod = Expr::constant(&target, coeff.clone());
            for (j, f) in factors.iter().enumerate() {
                prod = prod.mul(if j == i { &lifted[i] } else { f });
                if prod.is_zero() {
                    break;
                }
            }
            total = total.add(&prod);
        }
        out = out.add(&total);
    }
    Ok(Ham::new(out)?)
}

/// Weight drop of a homogeneous Hamiltonian relative to the symplectic
/// pairing: `total(weight(H)) - 2 * total(pairing weight)`. A Poisson
/// structure of weight `-k` has drop `-k`.
pub fn poisson_weight_drop(h: &Ham) -> Option<i64> {
    let chart = h.chart();
    let pairing = chart.pairing()?;
    let (b, m) = pairing.pairs.first()?;
    let pairing_weight =
        chart.coord(*b).weight.total() as i64 + chart.coord(*m).weight.total() as i64;
    let w = h.expr().homogeneous_weight()?;
    Some(w.total() as i64 - 2 * pairing_weight)
}
