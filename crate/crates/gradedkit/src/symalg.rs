//! Exact graded-commutative polynomial algebra.
//!
//! Expressions are canonical sums of rational multiples of monomials over
//! a chart. Odd coordinates square to zero and anticommute; the Koszul
//! sign is absorbed into the coefficient when factors are brought into
//! the canonical order. Opaque function symbols of weight-zero even
//! coordinates are carried along with formal partial derivatives, so
//! structure functions stay symbolic.

use crate::grading::{Chart, CoordId, Parity, Weight};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type Coeff = BigRational;

pub fn rat(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Coeff {
    BigRational::from(BigInt::from(n))
}

/// An application of an opaque function symbol, together with the formal
/// partial derivatives applied to it. Derivatives commute, so `derivs` is
/// a sorted multiset of argument coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnApp {
    pub name: String,
    pub args: Vec<CoordId>,
    pub derivs: Vec<CoordId>,
}

impl FnApp {
    fn derived(&self, by: CoordId) -> FnApp {
        let mut d = self.clone();
        d.derivs.push(by);
        d.derivs.sort_unstable();
        d
    }
}

/// A monomial: coordinate powers sorted by the chart's canonical rank,
/// odd coordinates with power exactly one, plus function applications.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    /// (coordinate, exponent), sorted by chart rank.
    pub powers: Vec<(CoordId, u32)>,
    /// (application, exponent), sorted.
    pub fns: Vec<(FnApp, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.fns.is_empty()
    }

    pub fn parity(&self, chart: &Chart) -> Parity {
        let odd_count = self
            .powers
            .iter()
            .filter(|(c, e)| chart.coord(*c).parity.is_odd() && e % 2 == 1)
            .count();
        if odd_count % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn weight(&self, chart: &Chart) -> Weight {
        let mut w = Weight::zero(chart.arity());
        for (c, e) in &self.powers {
            for _ in 0..*e {
                w = w.add(&chart.coord(*c).weight);
            }
        }
        w
    }

    pub fn degree_in(&self, c: CoordId) -> u32 {
        self.powers
            .iter()
            .find(|(id, _)| *id == c)
            .map(|(_, e)| *e)
            .copied_or_zero()
    }

    fn contains_formal(&self, chart: &Chart) -> bool {
        self.powers.iter().any(|(c, _)| chart.coord(*c).formal)
    }
}

trait CopiedOrZero {
    fn copied_or_zero(self) -> u32;
}
impl CopiedOrZero for Option<u32> {
    fn copied_or_zero(self) -> u32 {
        self.unwrap_or(0)
    }
}

// Canonical term order: by ranked coordinate powers, then by function part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RankedKey(Vec<(u32, u32)>, Vec<(FnApp, u32)>);

fn ranked_key(chart: &Chart, m: &Monomial) -> RankedKey {
    let mut key: Vec<(u32, u32)> = m
        .powers
        .iter()
        .map(|(c, e)| (chart.rank(*c), *e))
        .collect();
    key.sort_unstable();
    RankedKey(key, m.fns.clone())
}

impl PartialOrd for RankedKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RankedKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0).then_with(|| self.1.cmp(&other.1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    ChartMismatch,
    UnboundName(String),
    ParityMismatch { coord: String },
    NotHomogeneous,
    FormalParameterPresent(String),
    OpaqueArgument { func: String, coord: String },
    UnknownFunction(String),
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::ChartMismatch => write!(f, "expressions live on different charts"),
            ExprError::UnboundName(n) => write!(f, "unbound name `{n}`"),
            ExprError::ParityMismatch { coord } => {
                write!(f, "substitution for `{coord}` changes parity")
            }
            ExprError::NotHomogeneous => write!(f, "expression is not homogeneous"),
            ExprError::FormalParameterPresent(n) => {
                write!(f, "formal parameter `{n}` has no weight; decompose after eliminating it")
            }
            ExprError::OpaqueArgument { func, coord } => write!(
                f,
                "cannot substitute a non-coordinate expression for `{coord}` inside opaque `{func}`"
            ),
            ExprError::UnknownFunction(n) => write!(f, "unknown function symbol `{n}`"),
        }
    }
}

impl std::error::Error for ExprError {}

/// A graded-commutative polynomial in canonical form.
#[derive(Clone)]
pub struct Expr {
    chart: Arc<Chart>,
    terms: BTreeMap<RankedKey, (Monomial, Coeff)>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Chart::same(&self.chart, &other.chart)
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((k1, v1), (k2, v2))| k1 == k2 && v1.1 == v2.1 && v1.0 == v2.0)
    }
}
impl Eq for Expr {}

impl Expr {
    pub fn zero(chart: &Arc<Chart>) -> Expr {
        Expr {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Arc<Chart>, c: Coeff) -> Expr {
        let mut e = Expr::zero(chart);
        if !c.is_zero() {
            e.terms
                .insert(ranked_key(chart, &Monomial::one()), (Monomial::one(), c));
        }
        e
    }

    pub fn one(chart: &Arc<Chart>) -> Expr {
        Expr::constant(chart, Coeff::one())
    }

    pub fn from_int(chart: &Arc<Chart>, n: i64) -> Expr {
        Expr::constant(chart, int(n))
    }

    pub fn coord(chart: &Arc<Chart>, id: CoordId) -> Expr {
        let m = Monomial {
            powers: vec![(id, 1)],
            fns: vec![],
        };
        let mut e = Expr::zero(chart);
        e.terms.insert(ranked_key(chart, &m), (m, Coeff::one()));
        e
    }

    pub fn var(chart: &Arc<Chart>, name: &str) -> Result<Expr, ExprError> {
        let id = chart
            .id_of(name)
            .ok_or_else(|| ExprError::UnboundName(name.to_string()))?;
        Ok(Expr::coord(chart, id))
    }

    /// A bare application of a declared function symbol.
    pub fn func(chart: &Arc<Chart>, name: &str) -> Result<Expr, ExprError> {
        let idx = chart
            .fn_id(name)
            .ok_or_else(|| ExprError::UnknownFunction(name.to_string()))?;
        let decl = &chart.funcs()[idx];
        Ok(Expr::fn_app(
            chart,
            FnApp {
                name: decl.name.clone(),
                args: decl.args.clone(),
                derivs: vec![],
            },
        ))
    }

    pub fn fn_app(chart: &Arc<Chart>, app: FnApp) -> Expr {
        let m = Monomial {
            powers: vec![],
            fns: vec![(app, 1)],
        };
        let mut e = Expr::zero(chart);
        e.terms.insert(ranked_key(chart, &m), (m, Coeff::one()));
        e
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.values().map(|(m, c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        // Odd squares vanish.
        if m.powers
            .iter()
            .any(|(id, e)| *e >= 2 && self.chart.coord(*id).parity.is_odd())
        {
            return;
        }
        let key = ranked_key(&self.chart, &m);
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert((m, c));
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().1 += c;
                if o.get().1.is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        assert!(Chart::same(&self.chart, &other.chart), "chart mismatch");
        let mut out = self.clone();
        for (m, c) in other.terms.values() {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        let mut out = Expr::zero(&self.chart);
        for (m, c) in self.terms.values() {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Coeff) -> Expr {
        let mut out = Expr::zero(&self.chart);
        for (m, c) in self.terms.values() {
            out.insert_term(m.clone(), c * k);
        }
        out
    }

    /// Multiply two canonical monomials; returns the sign from sorting the
    /// odd factors, or None when an odd square appears.
    fn mul_monomials(chart: &Chart, a: &Monomial, b: &Monomial) -> Option<(Monomial, i8)> {
        // Odd factor lists in rank order; count inversions of the merge.
        let odd_ranks = |m: &Monomial| -> Vec<u32> {
            let mut v: Vec<u32> = m
                .powers
                .iter()
                .filter(|(c, _)| chart.coord(*c).parity.is_odd())
                .map(|(c, _)| chart.rank(*c))
                .collect();
            v.sort_unstable();
            v
        };
        let la = odd_ranks(a);
        let lb = odd_ranks(b);
        let mut sign = 1i8;
        // Merge: every element of `lb` passes over the remaining tail of `la`.
        {
            let mut i = 0usize;
            for &rb in &lb {
                while i < la.len() && la[i] < rb {
                    i += 1;
                }
                if i < la.len() && la[i] == rb {
                    return None; // odd square
                }
                // rb jumps over la[i..]
                if (la.len() - i) % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        let mut powers: BTreeMap<CoordId, u32> = BTreeMap::new();
        for (c, e) in a.powers.iter().chain(b.powers.iter()) {
            *powers.entry(*c).or_insert(0) += e;
        }
        if powers
            .iter()
            .any(|(c, e)| *e >= 2 && chart.coord(*c).parity.is_odd())
        {
            return None;
        }
        let mut fns: BTreeMap<FnApp, u32> = BTreeMap::new();
        for (f, e) in a.fns.iter().chain(b.fns.iter()) {
            *fns.entry(f.clone()).or_insert(0) += e;
        }
        let mut powers: Vec<(CoordId, u32)> = powers.into_iter().collect();
        powers.sort_by_key(|(c, _)| chart.rank(*c));
        Some((
            Monomial {
                powers,
                fns: fns.into_iter().collect(),
            },
            sign,
        ))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        assert!(Chart::same(&self.chart, &other.chart), "chart mismatch");
        let mut out = Expr::zero(&self.chart);
        for (ma, ca) in self.terms.values() {
            for (mb, cb) in other.terms.values() {
                if let Some((m, sign)) = Self::mul_monomials(&self.chart, ma, mb) {
                    let mut c = ca * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.insert_term(m, c);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut out = Expr::one(&self.chart);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Left partial derivative with respect to a coordinate, including the
    /// formal chain rule through opaque function symbols.
    pub fn derivative(&self, c: CoordId) -> Expr {
        let chart = &self.chart;
        let c_odd = chart.coord(c).parity.is_odd();
        let mut out = Expr::zero(chart);
        for (m, coeff) in self.terms.values() {
            if c_odd {
                // Left derivative: sign counts the odd factors standing in
                // front of `c` in the canonical order.
                if m.degree_in(c) == 1 {
                    let mut sign = 1i8;
                    let mut powers = Vec::with_capacity(m.powers.len() - 1);
                    let c_rank = chart.rank(c);
                    for (id, e) in &m.powers {
                        if *id == c {
                            continue;
                        }
                        if chart.coord(*id).parity.is_odd() && chart.rank(*id) < c_rank {
                            sign = -sign;
                        }
                        powers.push((*id, *e));
                    }
                    let mut cc = coeff.clone();
                    if sign < 0 {
                        cc = -cc;
                    }
                    out.insert_term(
                        Monomial {
                            powers,
                            fns: m.fns.clone(),
                        },
                        cc,
                    );
                }
            } else {
                // Even coordinate: usual power rule, no signs.
                if m.degree_in(c) > 0 {
                    let e = m.degree_in(c);
                    let mut powers = Vec::new();
                    for (id, ee) in &m.powers {
                        if *id == c {
                            if *ee > 1 {
                                powers.push((*id, ee - 1));
                            }
                        } else {
                            powers.push((*id, *ee));
                        }
                    }
                    out.insert_term(
                        Monomial {
                            powers,
                            fns: m.fns.clone(),
                        },
                        coeff * int(e as i64),
                    );
                }
                // Chain rule through each function application.
                for (i, (app, e)) in m.fns.iter().enumerate() {
                    if !app.args.contains(&c) {
                        continue;
                    }
                    let mut fns = Vec::new();
                    for (j, (a, ee)) in m.fns.iter().enumerate() {
                        if i == j {
                            if *ee > 1 {
                                fns.push((a.clone(), ee - 1));
                            }
                        } else {
                            fns.push((a.clone(), *ee));
                        }
                    }
                    fns.push((app.derived(c), 1));
                    fns.sort();
                    // merge equal apps
                    let mut merged: BTreeMap<FnApp, u32> = BTreeMap::new();
                    for (a, ee) in fns {
                        *merged.entry(a).or_insert(0) += ee;
                    }
                    out.insert_term(
                        Monomial {
                            powers: m.powers.clone(),
                            fns: merged.into_iter().collect(),
                        },
                        coeff * int(*e as i64),
                    );
                }
            }
        }
        out
    }

    /// Decompose into homogeneous parts, keyed by weight. Terms containing
    /// a formal parameter are rejected.
    pub fn weight_decompose(&self) -> Result<BTreeMap<Weight, Expr>, ExprError> {
        let mut out: BTreeMap<Weight, Expr> = BTreeMap::new();
        for (m, c) in self.terms.values() {
            if m.contains_formal(&self.chart) {
                let name = m
                    .powers
                    .iter()
                    .find(|(id, _)| self.chart.coord(*id).formal)
                    .map(|(id, _)| self.chart.coord(*id).name.clone())
                    .unwrap_or_default();
                return Err(ExprError::FormalParameterPresent(name));
            }
            let w = m.weight(&self.chart);
            out.entry(w)
                .or_insert_with(|| Expr::zero(&self.chart))
                .insert_term(m.clone(), c.clone());
        }
        out.retain(|_, e| !e.is_zero());
        Ok(out)
    }

    /// The unique weight when the expression is homogeneous, `None`
    /// otherwise. Zero is homogeneous of every weight; reported as `None`
    /// here only for the empty decomposition.
    pub fn homogeneous_weight(&self) -> Option<Weight> {
        let parts = self.weight_decompose().ok()?;
        if parts.len() == 1 {
            parts.into_keys().next()
        } else {
            None
        }
    }

    pub fn is_homogeneous_of(&self, w: &Weight) -> bool {
        if self.is_zero() {
            return true;
        }
        self.homogeneous_weight().as_ref() == Some(w)
    }

    /// Parity when all terms agree; zero is even by convention.
    pub fn parity(&self) -> Option<Parity> {
        let mut parity = None;
        for (m, _) in self.terms.values() {
            let p = m.parity(&self.chart);
            match parity {
                None => parity = Some(p),
                Some(q) if q == p => {}
                _ => return None,
            }
        }
        Some(parity.unwrap_or(Parity::Even))
    }

    pub fn parity_part(&self, p: Parity) -> Expr {
        let mut out = Expr::zero(&self.chart);
        for (m, c) in self.terms.values() {
            if m.parity(&self.chart) == p {
                out.insert_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Degree in a single coordinate (maximal exponent over terms).
    pub fn degree_in(&self, c: CoordId) -> u32 {
        self.terms
            .values()
            .map(|(m, _)| m.degree_in(c))
            .max()
            .unwrap_or(0)
    }

    /// Coefficient extraction: collect terms by the exponent of `c`,
    /// dividing out `c^e`. Used for Taylor frames in the action parameter.
    pub fn coefficients_in(&self, c: CoordId) -> BTreeMap<u32, Expr> {
        let mut out: BTreeMap<u32, Expr> = BTreeMap::new();
        for (m, coeff) in self.terms.values() {
            let e = m.degree_in(c);
            let mut stripped = m.clone();
            stripped.powers.retain(|(id, _)| *id != c);
            out.entry(e)
                .or_insert_with(|| Expr::zero(&self.chart))
                .insert_term(stripped, coeff.clone());
        }
        out.retain(|_, e| !e.is_zero());
        out
    }

    /// Does the expression involve the coordinate at all?
    pub fn depends_on(&self, c: CoordId) -> bool {
        self.terms.values().any(|(m, _)| {
            m.degree_in(c) > 0
                || m.fns
                    .iter()
                    .any(|(app, _)| app.args.contains(&c) || app.derivs.contains(&c))
        })
    }

    /// Constant term as a rational, when the expression is constant.
    pub fn as_constant(&self) -> Option<Coeff> {
        if self.is_zero() {
            return Some(Coeff::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.values().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }
}

/// A substitution: target chart plus, for each source coordinate, an image
/// expression on the target chart. Images must match parity coordinate-wise.
/// A source coordinate without an explicit image maps to the same-named
/// target coordinate; when no such coordinate exists the substitution only
/// fails if that source coordinate actually occurs in the input.
#[derive(Debug, Clone)]
pub struct Substitution {
    source: Arc<Chart>,
    target: Arc<Chart>,
    images: Vec<Option<Expr>>,
}

impl Substitution {
    pub fn new(
        source: &Arc<Chart>,
        target: &Arc<Chart>,
        map: &BTreeMap<String, Expr>,
    ) -> Result<Substitution, ExprError> {
        let mut images = Vec::with_capacity(source.len());
        for c in source.coords() {
            let img = if let Some(e) = map.get(&c.name) {
                assert!(Chart::same(e.chart(), target), "image on wrong chart");
                Some(e.clone())
            } else {
                target.id_of(&c.name).map(|id| Expr::coord(target, id))
            };
            if let Some(img) = &img {
                match img.parity() {
                    Some(p) if img.is_zero() || p == c.parity => {}
                    _ => {
                        return Err(ExprError::ParityMismatch {
                            coord: c.name.clone(),
                        })
                    }
                }
            }
            images.push(img);
        }
        Ok(Substitution {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn identity(chart: &Arc<Chart>) -> Substitution {
        Substitution {
            source: chart.clone(),
            target: chart.clone(),
            images: (0..chart.len())
                .map(|i| Some(Expr::coord(chart, i)))
                .collect(),
        }
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    /// The image of a coordinate; panics when it is unmapped.
    pub fn image(&self, c: CoordId) -> &Expr {
        self.images[c]
            .as_ref()
            .unwrap_or_else(|| panic!("no image for `{}`", self.source.coord(c).name))
    }

    fn image_checked(&self, c: CoordId) -> Result<&Expr, ExprError> {
        self.images[c]
            .as_ref()
            .ok_or_else(|| ExprError::UnboundName(self.source.coord(c).name.clone()))
    }

    pub fn set_image(&mut self, c: CoordId, e: Expr) {
        assert!(Chart::same(e.chart(), &self.target), "image on wrong chart");
        self.images[c] = Some(e);
    }

    /// Apply as an algebra homomorphism. Function symbols are rewritten by
    /// renaming their arguments when every argument maps to a plain
    /// coordinate; anything else is an error.
    pub fn apply(&self, e: &Expr) -> Result<Expr, ExprError> {
        assert!(Chart::same(e.chart(), &self.source), "chart mismatch");
        let mut out = Expr::zero(&self.target);
        for (m, coeff) in e.terms.values() {
            let mut acc = Expr::constant(&self.target, coeff.clone());
            // Factors in canonical order; Expr::mul handles the signs.
            for (c, ee) in &m.powers {
                acc = acc.mul(&self.image_checked(*c)?.pow(*ee));
                if acc.is_zero() {
                    break;
                }
            }
            for (app, ee) in &m.fns {
                let renamed = self.rename_app(app)?;
                acc = acc.mul(&Expr::fn_app(&self.target, renamed).pow(*ee));
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    fn rename_app(&self, app: &FnApp) -> Result<FnApp, ExprError> {
        let mut args = Vec::with_capacity(app.args.len());
        for a in &app.args {
            args.push(self.coord_image(*a, &app.name)?);
        }
        let mut derivs = Vec::with_capacity(app.derivs.len());
        for d in &app.derivs {
            derivs.push(self.coord_image(*d, &app.name)?);
        }
        derivs.sort_unstable();
        Ok(FnApp {
            name: app.name.clone(),
            args,
            derivs,
        })
    }

    fn coord_image(&self, c: CoordId, func: &str) -> Result<CoordId, ExprError> {
        let img = self.image_checked(c)?;
        if img.terms.len() == 1 {
            let (m, k) = img.terms.values().next().unwrap();
            if m.fns.is_empty() && m.powers.len() == 1 && m.powers[0].1 == 1 && k.is_one() {
                return Ok(m.powers[0].0);
            }
        }
        Err(ExprError::OpaqueArgument {
            func: func.to_string(),
            coord: self.source.coord(c).name.clone(),
        })
    }

    /// Composition `self` after `first`: `(self ∘ first)(e) = self(first(e))`.
    pub fn compose_after(&self, first: &Substitution) -> Result<Substitution, ExprError> {
        assert!(Chart::same(&first.target, &self.source));
        let mut images = Vec::with_capacity(first.images.len());
        for img in &first.images {
            images.push(match img {
                Some(e) => Some(self.apply(e)?),
                None => None,
            });
        }
        Ok(Substitution {
            source: first.source.clone(),
            target: self.target.clone(),
            images,
        })
    }
}

// ---------------------------------------------------------------------------
// Rendering: deterministic canonical text.

fn fmt_coeff_times(f: &mut fmt::Formatter<'_>, c: &Coeff, has_monomial: bool) -> fmt::Result {
    let one = Coeff::one();
    if !has_monomial {
        return write!(f, "{c}");
    }
    if *c == one {
        Ok(())
    } else if *c == -one.clone() {
        write!(f, "-")
    } else {
        write!(f, "{c}*")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.values() {
            let positive = c.is_positive();
            if first {
                if !positive {
                    // fall through, coefficient carries its sign
                }
            } else if positive {
                write!(f, " + ")?;
            } else {
                write!(f, " - ")?;
            }
            let c_abs = if first { c.clone() } else { c.abs() };
            first = false;
            if m.is_one() {
                write!(f, "{c_abs}")?;
                continue;
            }
            fmt_coeff_times(f, &c_abs, true)?;
            let mut started = false;
            for (id, e) in &m.powers {
                if started {
                    write!(f, "*")?;
                }
                started = true;
                write!(f, "{}", self.chart.coord(*id).name)?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
            for (app, e) in &m.fns {
                if started {
                    write!(f, "*")?;
                }
                started = true;
                if app.derivs.is_empty() {
                    write!(f, "{}", app.name)?;
                } else {
                    write!(f, "D({}", app.name)?;
                    for d in &app.derivs {
                        write!(f, ",{}", self.chart.coord(*d).name)?;
                    }
                    write!(f, ")")?;
                }
                write!(f, "(")?;
                for (i, a) in app.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", self.chart.coord(*a).name)?;
                }
                write!(f, ")")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::Coordinate;

    fn odd_chart() -> Arc<Chart> {
        Chart::new(
            1,
            vec![
                Coordinate::new("x", Weight(vec![0]), Parity::Even),
                Coordinate::new("th1", Weight(vec![1]), Parity::Odd),
                Coordinate::new("th2", Weight(vec![1]), Parity::Odd),
            ],
        )
        .unwrap()
    }

    #[test]
    fn koszul_antisymmetry() {
        let ch = odd_chart();
        let t1 = Expr::var(&ch, "th1").unwrap();
        let t2 = Expr::var(&ch, "th2").unwrap();
        // th1*th2 + th2*th1 == 0
        assert!(t1.mul(&t2).add(&t2.mul(&t1)).is_zero());
    }

    #[test]
    fn odd_square_vanishes() {
        let ch = odd_chart();
        let t1 = Expr::var(&ch, "th1").unwrap();
        assert!(t1.mul(&t1).is_zero());
    }

    #[test]
    fn even_commutes() {
        let ch = odd_chart();
        let x = Expr::var(&ch, "x").unwrap();
        let t1 = Expr::var(&ch, "th1").unwrap();
        assert!(x.mul(&t1).sub(&t1.mul(&x)).is_zero());
    }

    #[test]
    fn left_derivative_signs() {
        let ch = odd_chart();
        let t1 = Expr::var(&ch, "th1").unwrap();
        let t2 = Expr::var(&ch, "th2").unwrap();
        let prod = t1.mul(&t2);
        let id1 = ch.id_of("th1").unwrap();
        let id2 = ch.id_of("th2").unwrap();
        assert_eq!(prod.derivative(id1), t2);
        // d/dth2 (th1 th2) = -th1, the Koszul-forced sign: expand both
        // orderings th1*th2 = -th2*th1 and differentiate the second.
        assert_eq!(prod.derivative(id2), t1.neg());
    }

    #[test]
    fn formal_chain_rule() {
        let ch = odd_chart().with_func("f", &["x"]).unwrap();
        let f = Expr::func(&ch, "f").unwrap();
        let t1 = Expr::var(&ch, "th1").unwrap();
        let x = ch.id_of("x").unwrap();
        let d = f.mul(&t1).derivative(x);
        let expected = Expr::fn_app(
            &ch,
            FnApp {
                name: "f".into(),
                args: vec![x],
                derivs: vec![x],
            },
        )
        .mul(&t1);
        assert_eq!(d, expected);
    }

    #[test]
    fn substitution_scales_velocities() {
        // On the 2-velocities chart, xd -> t*xd, xdd -> t^2*xdd fixes xdd's
        // image to t^2*xdd.
        let ch = Chart::new(
            1,
            vec![
                Coordinate::new("x", Weight(vec![0]), Parity::Even),
                Coordinate::new("xd", Weight(vec![1]), Parity::Even),
                Coordinate::new("xdd", Weight(vec![2]), Parity::Even),
            ],
        )
        .unwrap();
        let ext = ch.extend_params(&["t"]);
        let t = Expr::var(&ext, "t").unwrap();
        let mut map = BTreeMap::new();
        map.insert("xd".to_string(), t.mul(&Expr::var(&ext, "xd").unwrap()));
        map.insert(
            "xdd".to_string(),
            t.pow(2).mul(&Expr::var(&ext, "xdd").unwrap()),
        );
        let sub = Substitution::new(&ch, &ext, &map).unwrap();
        let xdd = Expr::var(&ch, "xdd").unwrap();
        assert_eq!(
            sub.apply(&xdd).unwrap(),
            t.pow(2).mul(&Expr::var(&ext, "xdd").unwrap())
        );
        // Identity substitution is the identity.
        let idsub = Substitution::identity(&ch);
        assert_eq!(idsub.apply(&xdd).unwrap(), xdd);
    }

    #[test]
    fn odd_swap_picks_up_sign() {
        let ch = odd_chart();
        let t1 = Expr::var(&ch, "th1").unwrap();
        let t2 = Expr::var(&ch, "th2").unwrap();
        let mut map = BTreeMap::new();
        map.insert("th1".to_string(), t2.clone());
        map.insert("th2".to_string(), t1.clone());
        let sub = Substitution::new(&ch, &ch, &map).unwrap();
        let prod = t1.mul(&t2);
        // Direct expansion: th2*th1 = -th1*th2.
        assert_eq!(sub.apply(&prod).unwrap(), prod.neg());
    }

    #[test]
    fn weight_decomposition_buckets() {
        let ch = Chart::new(
            1,
            vec![
                Coordinate::new("x", Weight(vec![0]), Parity::Even),
                Coordinate::new("xd", Weight(vec![1]), Parity::Even),
                Coordinate::new("xdd", Weight(vec![2]), Parity::Even),
            ],
        )
        .unwrap();
        let x = Expr::var(&ch, "x").unwrap();
        let xd = Expr::var(&ch, "xd").unwrap();
        let xdd = Expr::var(&ch, "xdd").unwrap();
        let e = x.add(&xd).add(&x.mul(&xdd));
        let parts = e.weight_decompose().unwrap();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[&Weight(vec![0])], x);
        assert_eq!(parts[&Weight(vec![1])], xd);
        assert_eq!(parts[&Weight(vec![2])], x.mul(&xdd));
        assert!(Expr::zero(&ch).weight_decompose().unwrap().is_empty());
        assert_eq!(x.mul(&xdd).homogeneous_weight(), Some(Weight(vec![2])));
        assert_eq!(x.add(&xd).homogeneous_weight(), None);
    }

    #[test]
    fn formal_parameter_rejected_in_decomposition() {
        let ch = odd_chart().extend_params(&["t"]);
        let t = Expr::var(&ch, "t").unwrap();
        let err = t.weight_decompose().unwrap_err();
        assert_eq!(err, ExprError::FormalParameterPresent("t".into()));
    }

    #[test]
    fn rendering_is_reduced_and_ordered() {
        let ch = odd_chart();
        let x = Expr::var(&ch, "x").unwrap();
        let e = x.pow(2).scale(&rat(3, 2)).sub(&x).add(&Expr::from_int(&ch, 5));
        assert_eq!(e.to_string(), "5 - x + 3/2*x^2");
    }
}
