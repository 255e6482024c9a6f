//! Quasi-lattice ordered groups: least upper bounds in the positive cone,
//! the most-efficient factorization x = σ(x) τ(x)⁻¹, hereditary and
//! directed sets, and partial representations built from isometric
//! families on finite hereditary corners.
//!
//! Two instances are built in: (ℤ^k, ℕ^k) with the componentwise order
//! and (F_n, F_n⁺) with the prefix order. New instances plug in through
//! the [`QuasiLattice`] trait.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use crate::group::PatternGroup;
use crate::matrix::{CMatrix, Matrix};
use crate::scalar::GaussRational;
use crate::spectrum::RelationPoly;
use crate::words::ReducedWord;
use crate::PdsxError;

/// A least upper bound in the positive cone, or ∞ when no common upper
/// bound exists. ∞ is a value, never an error.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UpperBound<E> {
    Finite(E),
    Infinity,
}

impl<E> UpperBound<E> {
    pub fn finite(self) -> Option<E> {
        match self {
            UpperBound::Finite(e) => Some(e),
            UpperBound::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, UpperBound::Infinity)
    }
}

/// Group arithmetic plus the quasi-lattice order data.
pub trait QuasiLattice: Clone + Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Self::Elem;
    fn in_positive(&self, a: &Self::Elem) -> bool;
    /// The least common upper bound of x and y in the positive cone.
    fn lub(&self, x: &Self::Elem, y: &Self::Elem) -> UpperBound<Self::Elem>;
    /// All positive elements below a positive element (finite for the
    /// built-in instances).
    fn positive_down_set(&self, x: &Self::Elem) -> Vec<Self::Elem>;
    /// Elements of the truncation ball of the given radius.
    fn ball_elems(&self, radius: u32) -> Vec<Self::Elem>;
    fn in_ball(&self, a: &Self::Elem, radius: u32) -> bool;
    fn render_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, PdsxError>;

    /// The order x ≤ y ⟺ x⁻¹y ∈ P.
    fn le(&self, x: &Self::Elem, y: &Self::Elem) -> bool {
        self.in_positive(&self.multiply(&self.invert(x), y))
    }

    /// The most-efficient factorization: σ(x) = x ∨ e and τ(x) = x⁻¹σ(x),
    /// defined exactly when x has an upper bound in the positive cone.
    fn sigma_tau(&self, x: &Self::Elem) -> Option<(Self::Elem, Self::Elem)> {
        match self.lub(x, &self.identity()) {
            UpperBound::Infinity => None,
            UpperBound::Finite(sigma) => {
                let tau = self.multiply(&self.invert(x), &sigma);
                Some((sigma, tau))
            }
        }
    }
}

/// (ℤ^k, ℕ^k) with the componentwise order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZkNk {
    pub k: usize,
}

impl ZkNk {
    pub fn new(k: usize) -> Self {
        ZkNk { k }
    }
}

impl QuasiLattice for ZkNk {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.k]
    }

    fn multiply(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn invert(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }

    fn in_positive(&self, a: &Vec<i64>) -> bool {
        a.iter().all(|&x| x >= 0)
    }

    fn lub(&self, x: &Vec<i64>, y: &Vec<i64>) -> UpperBound<Vec<i64>> {
        UpperBound::Finite(
            x.iter()
                .zip(y)
                .map(|(&a, &b)| a.max(b).max(0))
                .collect(),
        )
    }

    fn positive_down_set(&self, x: &Vec<i64>) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &c in x {
            let mut next = Vec::new();
            for partial in &out {
                for v in 0..=c.max(0) {
                    let mut p = partial.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    fn ball_elems(&self, radius: u32) -> Vec<Vec<i64>> {
        let r = radius as i64;
        let mut out = vec![Vec::new()];
        for _ in 0..self.k {
            let mut next = Vec::new();
            for partial in &out {
                for v in -r..=r {
                    let mut p = partial.clone();
                    p.push(v);
                    next.push(p);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    fn in_ball(&self, a: &Vec<i64>, radius: u32) -> bool {
        a.iter().all(|&x| x.unsigned_abs() <= radius as u64)
    }

    fn render_elem(&self, a: &Vec<i64>) -> String {
        a.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn parse_elem(&self, s: &str) -> Result<Vec<i64>, PdsxError> {
        let v: Vec<i64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| PdsxError::Parse(format!("bad integer vector `{s}`")))
            })
            .collect::<Result<_, _>>()?;
        if v.len() != self.k {
            return Err(PdsxError::Parse(format!(
                "expected {} components, got {}",
                self.k,
                v.len()
            )));
        }
        Ok(v)
    }
}

/// ℤ^k doubles as a pattern group with the sup-norm as length, so its
/// hereditary-directed sets can be cross-checked against the local
/// relation machinery.
impl PatternGroup for ZkNk {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        QuasiLattice::identity(self)
    }

    fn multiply(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        QuasiLattice::multiply(self, a, b)
    }

    fn invert(&self, a: &Vec<i64>) -> Vec<i64> {
        QuasiLattice::invert(self, a)
    }

    fn length(&self, a: &Vec<i64>) -> u32 {
        a.iter().map(|x| x.unsigned_abs() as u32).max().unwrap_or(0)
    }

    fn ball(&self, radius: u32) -> Vec<Vec<i64>> {
        self.ball_elems(radius)
    }

    fn render(&self, a: &Vec<i64>) -> String {
        self.render_elem(a)
    }

    fn parse_elem(&self, s: &str) -> Result<Vec<i64>, PdsxError> {
        QuasiLattice::parse_elem(self, s)
    }
}

/// (F_n, F_n⁺) with the prefix order on positive words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeQl {
    pub rank: u32,
}

impl FreeQl {
    pub fn new(rank: u32) -> Self {
        FreeQl { rank }
    }
}

impl QuasiLattice for FreeQl {
    type Elem = ReducedWord;

    fn identity(&self) -> ReducedWord {
        ReducedWord::identity(self.rank)
    }

    fn multiply(&self, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        a.concat(b).expect("rank-consistent words")
    }

    fn invert(&self, a: &ReducedWord) -> ReducedWord {
        a.inverse()
    }

    fn in_positive(&self, a: &ReducedWord) -> bool {
        a.is_positive()
    }

    fn lub(&self, x: &ReducedWord, y: &ReducedWord) -> UpperBound<ReducedWord> {
        let Some((sx, _)) = x.positive_negative_factor() else {
            return UpperBound::Infinity;
        };
        let Some((sy, _)) = y.positive_negative_factor() else {
            return UpperBound::Infinity;
        };
        // positive words under the prefix order: comparable ⇒ the longer
        if sx.letters().starts_with(sy.letters()) {
            UpperBound::Finite(sx)
        } else if sy.letters().starts_with(sx.letters()) {
            UpperBound::Finite(sy)
        } else {
            UpperBound::Infinity
        }
    }

    fn positive_down_set(&self, x: &ReducedWord) -> Vec<ReducedWord> {
        x.initial_segments()
    }

    fn ball_elems(&self, radius: u32) -> Vec<ReducedWord> {
        crate::words::ball(self.rank, radius)
    }

    fn in_ball(&self, a: &ReducedWord, radius: u32) -> bool {
        a.len() as u32 <= radius
    }

    fn render_elem(&self, a: &ReducedWord) -> String {
        a.render()
    }

    fn parse_elem(&self, s: &str) -> Result<ReducedWord, PdsxError> {
        ReducedWord::parse(self.rank, s)
    }
}

/// An isometric-representation candidate given on finitely many positive
/// elements, with u_x = V_{σ(x)} V_{τ(x)}* (zero off PP⁻¹) as the induced
/// partial representation.
pub struct IsometricFamily<Q: QuasiLattice> {
    group: Q,
    dim: usize,
    values: BTreeMap<Q::Elem, CMatrix>,
}

impl<Q: QuasiLattice> IsometricFamily<Q> {
    pub fn new(group: Q, values: BTreeMap<Q::Elem, CMatrix>) -> Result<Self, PdsxError> {
        if values.keys().any(|p| !group.in_positive(p)) {
            return Err(PdsxError::Semantic(
                "isometric family must be indexed by positive elements".into(),
            ));
        }
        let mut iter = values.values();
        let first = iter
            .next()
            .ok_or_else(|| PdsxError::Semantic("empty isometric family".into()))?;
        let dim = first.dim();
        let exact = first.is_exact();
        for m in iter {
            if m.dim() != dim {
                return Err(PdsxError::Dimension("family dimensions differ".into()));
            }
            if m.is_exact() != exact {
                return Err(PdsxError::MixedMode);
            }
        }
        Ok(IsometricFamily { group, dim, values })
    }

    pub fn value(&self, p: &Q::Elem) -> Result<CMatrix, PdsxError> {
        if *p == self.group.identity() {
            let exact = self.values.values().next().map(CMatrix::is_exact).unwrap_or(true);
            return Ok(if exact {
                CMatrix::identity_exact(self.dim)
            } else {
                CMatrix::identity_float(self.dim)
            });
        }
        self.values.get(p).cloned().ok_or_else(|| {
            PdsxError::Semantic(format!(
                "no isometry value for {}",
                self.group.render_elem(p)
            ))
        })
    }
}

/// Images and trust masks a Nica-relation check needs from a
/// representation over a quasi-lattice group.
pub trait NicaRep<Q: QuasiLattice> {
    fn group(&self) -> &Q;
    fn dim(&self) -> usize;
    /// u_x, with u_x = 0 when x has no upper bound in the positive cone.
    fn image(&self, x: &Q::Elem) -> Result<CMatrix, PdsxError>;

    fn range_projection(&self, x: &Q::Elem) -> Result<CMatrix, PdsxError> {
        let u = self.image(x)?;
        u.mul(&u.adjoint())
    }

    /// States on which the isometry relation for a positive t is decided
    /// by this model (finite corners lose boundary states).
    fn trusted_isometry_states(&self, _t: &Q::Elem) -> Vec<bool> {
        vec![true; self.dim()]
    }

    /// States on which the range projection of x is decided by this model.
    fn trusted_projection_states(&self, _x: &Q::Elem) -> Vec<bool> {
        vec![true; self.dim()]
    }
}

impl<Q: QuasiLattice> NicaRep<Q> for IsometricFamily<Q> {
    fn group(&self) -> &Q {
        &self.group
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn image(&self, x: &Q::Elem) -> Result<CMatrix, PdsxError> {
        partial_rep_from_isometric(self, x)
    }
}

/// The displayed most-efficient formula: u_x = V_{σ(x)} V_{τ(x)}*, and
/// the zero matrix when x has no positive upper bound.
pub fn partial_rep_from_isometric<Q: QuasiLattice>(
    family: &IsometricFamily<Q>,
    x: &Q::Elem,
) -> Result<CMatrix, PdsxError> {
    match family.group.sigma_tau(x) {
        None => Ok(family
            .values
            .values()
            .next()
            .expect("family is nonempty")
            .zero_like()),
        Some((sigma, tau)) => {
            let vs = family.value(&sigma)?;
            let vt = family.value(&tau)?;
            vs.mul(&vt.adjoint())
        }
    }
}

/// A finite hereditary corner of the positive cone carrying the
/// truncated regular isometries V_x e_p = e_{xp} (zero when xp leaves the
/// corner). The honest finite surrogate of the representation on ℓ²(P):
/// checks that a truncation alone would break are masked out through the
/// trust interfaces.
pub struct CornerFamily<Q: QuasiLattice> {
    group: Q,
    basis: Vec<Q::Elem>,
    index: BTreeMap<Q::Elem, usize>,
}

impl<Q: QuasiLattice> CornerFamily<Q> {
    /// The corner over a finite hereditary set of positive elements
    /// containing the identity.
    pub fn new(group: Q, f: BTreeSet<Q::Elem>) -> Result<Self, PdsxError> {
        if !f.contains(&group.identity()) {
            return Err(PdsxError::Semantic("corner must contain the identity".into()));
        }
        for x in &f {
            if !group.in_positive(x) {
                return Err(PdsxError::Semantic(format!(
                    "corner element {} is not positive",
                    group.render_elem(x)
                )));
            }
            for below in group.positive_down_set(x) {
                if !f.contains(&below) {
                    return Err(PdsxError::Semantic(format!(
                        "corner is not hereditary: {} is missing below {}",
                        group.render_elem(&below),
                        group.render_elem(x)
                    )));
                }
            }
        }
        let basis: Vec<Q::Elem> = f.into_iter().collect();
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i))
            .collect();
        Ok(CornerFamily { group, basis, index })
    }

    pub fn basis(&self) -> &[Q::Elem] {
        &self.basis
    }

    /// The truncated isometry V_x as an exact 0/1 matrix.
    pub fn isometry(&self, x: &Q::Elem) -> Result<CMatrix, PdsxError> {
        if !self.group.in_positive(x) {
            return Err(PdsxError::Semantic(
                "corner isometries are indexed by positive elements".into(),
            ));
        }
        let dim = self.basis.len();
        let mut m = Matrix::zero(dim);
        for (p_idx, p) in self.basis.iter().enumerate() {
            let xp = self.group.multiply(x, p);
            if let Some(&q_idx) = self.index.get(&xp) {
                m.set(q_idx, p_idx, GaussRational::from_int(1));
            }
        }
        Ok(CMatrix::Exact(m))
    }

    /// An isometric family holding V on every corner element (enough for
    /// σ/τ values of any element whose factorization stays in the corner).
    pub fn to_family(&self) -> Result<IsometricFamily<Q>, PdsxError> {
        let mut values = BTreeMap::new();
        for p in &self.basis {
            values.insert(p.clone(), self.isometry(p)?);
        }
        IsometricFamily::new(self.group.clone(), values)
    }
}

impl<Q: QuasiLattice> NicaRep<Q> for CornerFamily<Q> {
    fn group(&self) -> &Q {
        &self.group
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn image(&self, x: &Q::Elem) -> Result<CMatrix, PdsxError> {
        match self.group.sigma_tau(x) {
            None => Ok(CMatrix::Exact(Matrix::zero(self.basis.len()))),
            Some((sigma, tau)) => {
                let vs = self.isometry(&sigma)?;
                let vt = self.isometry(&tau)?;
                vs.mul(&vt.adjoint())
            }
        }
    }

    fn trusted_isometry_states(&self, t: &Q::Elem) -> Vec<bool> {
        self.basis
            .iter()
            .map(|p| self.index.contains_key(&self.group.multiply(t, p)))
            .collect()
    }

    fn trusted_projection_states(&self, x: &Q::Elem) -> Vec<bool> {
        // The corner value of e(x) at a state q is
        // [σ ≤ q][σ⁻¹q ∈ F][τ σ⁻¹ q ∈ F]; the untruncated value is
        // [σ ≤ q]. The state is trusted where the two agree for sure:
        // either σ ≰ q, or both corner conditions hold.
        match self.group.sigma_tau(x) {
            None => vec![true; self.basis.len()],
            Some((sigma, tau)) => self
                .basis
                .iter()
                .map(|q| {
                    if self.group.le(&sigma, q) {
                        let rest = self.group.multiply(&self.group.invert(&sigma), q);
                        self.index.contains_key(&rest)
                            && self
                                .index
                                .contains_key(&self.group.multiply(&tau, &rest))
                    } else {
                        true
                    }
                })
                .collect(),
        }
    }
}

/// Hereditarity of a finite set within a ball: x p⁻¹ stays in the set for
/// every member x and positive p, as far as the ball can see.
pub fn is_hereditary<Q: QuasiLattice>(
    group: &Q,
    omega: &BTreeSet<Q::Elem>,
    radius: u32,
) -> bool {
    let positives: Vec<Q::Elem> = group
        .ball_elems(radius)
        .into_iter()
        .filter(|p| group.in_positive(p))
        .collect();
    for x in omega {
        for p in &positives {
            let below = group.multiply(x, &group.invert(p));
            if group.in_ball(&below, radius) && !omega.contains(&below) {
                return false;
            }
        }
    }
    true
}

/// Outcome of the directedness test, with out-of-ball least upper bounds
/// reported as skipped rather than failed.
#[derive(Clone, Debug)]
pub struct DirectedVerdict<E> {
    pub holds: bool,
    pub skipped: Vec<(E, E)>,
}

/// Directedness of a finite set: every pair must have a finite least
/// upper bound lying in the set. Bounds outside the ball are skipped.
pub fn is_directed<Q: QuasiLattice>(
    group: &Q,
    omega: &BTreeSet<Q::Elem>,
    radius: u32,
) -> DirectedVerdict<Q::Elem> {
    let mut skipped = Vec::new();
    let members: Vec<&Q::Elem> = omega.iter().collect();
    for (i, x) in members.iter().enumerate() {
        for y in &members[i..] {
            match group.lub(x, y) {
                UpperBound::Infinity => {
                    return DirectedVerdict {
                        holds: false,
                        skipped,
                    }
                }
                UpperBound::Finite(z) => {
                    if !group.in_ball(&z, radius) {
                        skipped.push(((*x).clone(), (*y).clone()));
                    } else if !omega.contains(&z) {
                        return DirectedVerdict {
                            holds: false,
                            skipped,
                        };
                    }
                }
            }
        }
    }
    DirectedVerdict {
        holds: true,
        skipped,
    }
}

/// The principal hereditary directed set t P⁻¹ = {x : x ≤ t}, cut to the
/// ball.
pub fn principal_point<Q: QuasiLattice>(
    group: &Q,
    t: &Q::Elem,
    radius: u32,
) -> Result<BTreeSet<Q::Elem>, PdsxError> {
    if !group.in_positive(t) {
        return Err(PdsxError::Semantic(format!(
            "{} is not in the positive cone",
            group.render_elem(t)
        )));
    }
    Ok(group
        .ball_elems(radius)
        .into_iter()
        .filter(|x| group.le(x, t))
        .collect())
}

/// The isometry and covariance relations as indicator polynomials over
/// the ball: `1_{t⁻¹} − 1` for positive t, and
/// `1_x 1_y − 1_{x∨y}` for pairs (the last term dropped when x ∨ y = ∞).
pub fn nica_relation_polys<Q: QuasiLattice>(
    group: &Q,
    radius: u32,
) -> Vec<RelationPoly<Q::Elem>>
where
    Q::Elem: Ord,
{
    let ball = group.ball_elems(radius);
    let mut polys = Vec::new();
    for t in ball.iter().filter(|t| group.in_positive(t) && **t != group.identity()) {
        polys.push(
            RelationPoly::indicator(group.invert(t)).minus(RelationPoly::constant(1)),
        );
    }
    for (i, x) in ball.iter().enumerate() {
        for y in &ball[i + 1..] {
            let product = RelationPoly::new(vec![(
                GaussRational::from_int(1),
                vec![x.clone(), y.clone()],
            )]);
            let poly = match group.lub(x, y) {
                UpperBound::Finite(z) => product.minus(RelationPoly::indicator(z)),
                UpperBound::Infinity => product,
            };
            polys.push(poly);
        }
    }
    polys
}
