//! Weights, parities, coordinates and charts.
//!
//! A chart is an ordered list of named coordinates, each carrying a
//! multi-weight (a vector of naturals, one entry per independent grading)
//! and a Grassmann parity. Charts are the substrate every other module
//! builds on: expressions, vector fields, homogeneity actions and the
//! groupoid/algebroid structures all reference a chart.

use std::fmt;
use std::sync::Arc;

/// A multi-weight: one non-negative degree per grading component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<u32>);

impl Weight {
    pub fn zero(arity: usize) -> Self {
        Weight(vec![0; arity])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &Weight) -> Weight {
        assert_eq!(self.arity(), other.arity(), "weight arity mismatch");
        Weight(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Sum of all components.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise maximum.
    pub fn cmax(&self, other: &Weight) -> Weight {
        assert_eq!(self.arity(), other.arity(), "weight arity mismatch");
        Weight(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn component(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Signed view, for weight shifts of operators.
    pub fn shift(&self) -> Shift {
        Shift(self.0.iter().map(|&c| c as i64).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A signed multi-weight. Operators (vector fields, brackets, Hamiltonian
/// flows) shift weights and can shift them downward, so their weights live
/// here rather than in [`Weight`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shift(pub Vec<i64>);

impl Shift {
    pub fn zero(arity: usize) -> Self {
        Shift(vec![0; arity])
    }

    pub fn add(&self, other: &Shift) -> Shift {
        assert_eq!(self.0.len(), other.0.len(), "shift arity mismatch");
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Shift) -> Shift {
        assert_eq!(self.0.len(), other.0.len(), "shift arity mismatch");
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Grassmann parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Koszul factor (-1)^(a*b) for commuting homogeneous objects past
    /// each other.
    pub fn koszul(self, other: Parity) -> i8 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Index of a coordinate within its chart.
pub type CoordId = usize;

/// A single chart coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinate {
    pub name: String,
    pub weight: Weight,
    pub parity: Parity,
    /// Formal parameters (the `t` of a homogeneity action) are even,
    /// weight-zero scalars that do not take part in weight decompositions.
    pub formal: bool,
}

impl Coordinate {
    pub fn new(name: impl Into<String>, weight: Weight, parity: Parity) -> Self {
        Coordinate {
            name: name.into(),
            weight,
            parity,
            formal: false,
        }
    }

    pub fn formal_param(name: impl Into<String>, arity: usize) -> Self {
        Coordinate {
            name: name.into(),
            weight: Weight::zero(arity),
            parity: Parity::Even,
            formal: true,
        }
    }
}

/// An opaque function symbol declared on a chart. Arguments must be
/// weight-zero even coordinates; structure functions like anchors and
/// brackets coefficients are modelled this way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDecl {
    pub name: String,
    pub args: Vec<CoordId>,
}

/// Conjugate-pair metadata for cotangent charts: `pairs[i] = (c, p_c)`.
/// `momentum_parity_shift` records whether momenta carry the parity of
/// their base coordinate (even canonical bracket) or the reversed parity
/// (odd canonical bracket of Schouten type).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(CoordId, CoordId)>,
    pub momentum_parity_shift: Parity,
}

impl Pairing {
    /// The momentum conjugate to `c`, if any.
    pub fn momentum_of(&self, c: CoordId) -> Option<CoordId> {
        self.pairs.iter().find(|(b, _)| *b == c).map(|(_, p)| *p)
    }

    /// The base coordinate whose momentum is `p`, if any.
    pub fn base_of(&self, p: CoordId) -> Option<CoordId> {
        self.pairs.iter().find(|(_, m)| *m == p).map(|(b, _)| *b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChartError {
    DuplicateName(String),
    ArityMismatch { coord: String, expected: usize, got: usize },
    MissingZeroWeight,
    UnknownCoordinate(String),
    NotLinearComponent { coord: String, component: usize },
    BadFunctionArg { func: String, coord: String },
}

impl fmt::Display for ChartError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartError::DuplicateName(n) => write!(f, "duplicate coordinate name `{n}`"),
            ChartError::ArityMismatch { coord, expected, got } => write!(
                f,
                "coordinate `{coord}` has weight arity {got}, chart arity is {expected}"
            ),
            ChartError::MissingZeroWeight => {
                write!(f, "graded chart has no weight-zero coordinate")
            }
            ChartError::UnknownCoordinate(n) => write!(f, "unknown coordinate `{n}`"),
            ChartError::NotLinearComponent { coord, component } => write!(
                f,
                "coordinate `{coord}` has weight component {component} outside {{0,1}}"
            ),
            ChartError::BadFunctionArg { func, coord } => write!(
                f,
                "function `{func}` argument `{coord}` is not a weight-zero even coordinate"
            ),
        }
    }
}

impl std::error::Error for ChartError {}

/// An ordered coordinate system with an `N^n` grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    arity: usize,
    coords: Vec<Coordinate>,
    funcs: Vec<FnDecl>,
    degree_bound: Weight,
    pairing: Option<Pairing>,
    /// Monomial rank of each coordinate: position after sorting by
    /// (total weight, parity, name). Fixes the canonical term order.
    rank: Vec<u32>,
}

impl Chart {
    /// Build a chart, validating names and arities. The degree bound is
    /// the componentwise max of the declared coordinate weights.
    pub fn new(arity: usize, coords: Vec<Coordinate>) -> Result<Arc<Chart>, ChartError> {
        Self::with_bound(arity, coords, None)
    }

    /// Build a chart with an explicitly declared degree bound, so empty
    /// fibre levels stay representable.
    pub fn with_bound(
        arity: usize,
        coords: Vec<Coordinate>,
        degree_bound: Option<Weight>,
    ) -> Result<Arc<Chart>, ChartError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &coords {
            if !seen.insert(c.name.clone()) {
                return Err(ChartError::DuplicateName(c.name.clone()));
            }
            if c.weight.arity() != arity {
                return Err(ChartError::ArityMismatch {
                    coord: c.name.clone(),
                    expected: arity,
                    got: c.weight.arity(),
                });
            }
        }
        let mut bound = degree_bound.unwrap_or_else(|| Weight::zero(arity));
        for c in &coords {
            bound = bound.cmax(&c.weight);
        }
        if !bound.is_zero()
            && !coords.iter().any(|c| !c.formal && c.weight.is_zero())
        {
            return Err(ChartError::MissingZeroWeight);
        }
        let mut chart = Chart {
            arity,
            coords,
            funcs: Vec::new(),
            degree_bound: bound,
            pairing: None,
            rank: Vec::new(),
        };
        chart.recompute_ranks();
        Ok(Arc::new(chart))
    }

    fn recompute_ranks(&mut self) {
        let mut order: Vec<usize> = (0..self.coords.len()).collect();
        order.sort_by(|&a, &b| {
            let ca = &self.coords[a];
            let cb = &self.coords[b];
            (ca.weight.total(), ca.parity, &ca.name).cmp(&(
                cb.weight.total(),
                cb.parity,
                &cb.name,
            ))
        });
        let mut rank = vec![0u32; self.coords.len()];
        for (r, &idx) in order.iter().enumerate() {
            rank[idx] = r as u32;
        }
        self.rank = rank;
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord(&self, id: CoordId) -> &Coordinate {
        &self.coords[id]
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn degree_bound(&self) -> &Weight {
        &self.degree_bound
    }

    pub fn pairing(&self) -> Option<&Pairing> {
        self.pairing.as_ref()
    }

    pub fn funcs(&self) -> &[FnDecl] {
        &self.funcs
    }

    pub fn rank(&self, id: CoordId) -> u32 {
        self.rank[id]
    }

    pub fn id_of(&self, name: &str) -> Option<CoordId> {
        self.coords.iter().position(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<CoordId, ChartError> {
        self.id_of(name)
            .ok_or_else(|| ChartError::UnknownCoordinate(name.to_string()))
    }

    pub fn fn_id(&self, name: &str) -> Option<usize> {
        self.funcs.iter().position(|f| f.name == name)
    }

    /// Coordinate ids sorted by total weight; reproduces the order of the
    /// fibration tower (base coordinates first, top weights last).
    pub fn tower_order(&self) -> Vec<CoordId> {
        let mut order: Vec<usize> = (0..self.coords.len()).collect();
        order.sort_by_key(|&i| self.rank[i]);
        order
    }

    /// Derive a new chart from this one, rebuilding ranks. Used by the
    /// lift constructors.
    pub(crate) fn derive(
        &self,
        arity: usize,
        coords: Vec<Coordinate>,
        funcs: Vec<FnDecl>,
        degree_bound: Weight,
        pairing: Option<Pairing>,
    ) -> Arc<Chart> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &coords {
            assert!(seen.insert(&c.name), "derived chart duplicates `{}`", c.name);
        }
        let mut chart = Chart {
            arity,
            coords,
            funcs,
            degree_bound,
            pairing,
            rank: Vec::new(),
        };
        chart.recompute_ranks();
        Arc::new(chart)
    }

    /// Register an opaque function symbol; all arguments must be
    /// weight-zero even coordinates.
    pub fn with_func(
        self: &Arc<Chart>,
        name: impl Into<String>,
        args: &[&str],
    ) -> Result<Arc<Chart>, ChartError> {
        let name = name.into();
        let mut ids = Vec::new();
        for a in args {
            let id = self.require(a)?;
            let c = self.coord(id);
            if !c.weight.is_zero() || c.parity.is_odd() {
                return Err(ChartError::BadFunctionArg {
                    func: name,
                    coord: c.name.clone(),
                });
            }
            ids.push(id);
        }
        let mut chart = (**self).clone();
        chart.funcs.push(FnDecl { name, args: ids });
        Ok(Arc::new(chart))
    }

    pub(crate) fn with_pairing(self: &Arc<Chart>, pairing: Pairing) -> Arc<Chart> {
        let mut chart = (**self).clone();
        chart.pairing = Some(pairing);
        Arc::new(chart)
    }

    /// Extend the chart with formal parameters (even, weight zero).
    pub fn extend_params(self: &Arc<Chart>, names: &[&str]) -> Arc<Chart> {
        let mut chart = (**self).clone();
        for n in names {
            assert!(
                chart.id_of(n).is_none(),
                "parameter `{n}` clashes with a coordinate"
            );
            chart
                .coords
                .push(Coordinate::formal_param(n.to_string(), chart.arity));
        }
        chart.recompute_ranks();
        Arc::new(chart)
    }

    /// Two charts agree for computational purposes when they are the same
    /// allocation or structurally equal.
    pub fn same(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// Total weight of a multi-weight.
pub fn total_weight(w: &Weight) -> u32 {
    w.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(components: &[u32]) -> Weight {
        Weight(components.to_vec())
    }

    #[test]
    fn higher_tangent_chart_of_degree_two() {
        // (x, xd, xdd) with weights 0,1,2: the 2-velocities chart over R.
        let chart = Chart::new(
            1,
            vec![
                Coordinate::new("x", w(&[0]), Parity::Even),
                Coordinate::new("xd", w(&[1]), Parity::Even),
                Coordinate::new("xdd", w(&[2]), Parity::Even),
            ],
        )
        .unwrap();
        assert_eq!(chart.degree_bound(), &w(&[2]));
        assert_eq!(chart.tower_order(), vec![0, 1, 2]);
    }

    #[test]
    fn degree_zero_chart() {
        let chart = Chart::new(1, vec![Coordinate::new("x", w(&[0]), Parity::Even)]).unwrap();
        assert_eq!(chart.degree_bound(), &w(&[0]));
    }

    #[test]
    fn tri_weight_chart_of_cotangent_type() {
        // T*(Pi D_1) chart at u = 0, cf. the bi-algebroid coordinate table.
        let chart = Chart::new(
            3,
            vec![
                Coordinate::new("x", w(&[0, 0, 0]), Parity::Even),
                Coordinate::new("th", w(&[0, 1, 0]), Parity::Odd),
                Coordinate::new("p", w(&[0, 1, 1]), Parity::Even),
                Coordinate::new("chi", w(&[0, 0, 1]), Parity::Odd),
            ],
        )
        .unwrap();
        assert_eq!(chart.degree_bound(), &w(&[0, 1, 1]));
    }

    #[test]
    fn duplicate_name_rejected() {
        let err = Chart::new(
            1,
            vec![
                Coordinate::new("x", w(&[0]), Parity::Even),
                Coordinate::new("x", w(&[1]), Parity::Even),
            ],
        )
        .unwrap_err();
        assert_eq!(err, ChartError::DuplicateName("x".into()));
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = Chart::new(
            2,
            vec![Coordinate::new("x", w(&[0]), Parity::Even)],
        )
        .unwrap_err();
        assert!(matches!(err, ChartError::ArityMismatch { .. }));
    }

    #[test]
    fn graded_chart_needs_base_coordinate() {
        let err = Chart::new(1, vec![Coordinate::new("y", w(&[1]), Parity::Even)]).unwrap_err();
        assert_eq!(err, ChartError::MissingZeroWeight);
    }

    #[test]
    fn total_weight_examples() {
        assert_eq!(w(&[1, 1]).total(), 2);
        assert_eq!(w(&[0, 0, 0]).total(), 0);
        assert_eq!(w(&[2, 1, 3]).total(), 6);
    }

    #[test]
    fn weight_addition_monoid() {
        // Commutative, associative, identity 0 on a few sampled triples.
        let samples = [w(&[0, 1]), w(&[2, 3]), w(&[5, 0]), w(&[1, 1])];
        let zero = Weight::zero(2);
        for a in &samples {
            assert_eq!(a.add(&zero), *a);
            for b in &samples {
                assert_eq!(a.add(b), b.add(a));
                for c in &samples {
                    assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
                }
            }
        }
    }
}
