//! Truncated pattern model of the space of identity-containing subsets of
//! a group, the translation partial action on it, and enumeration of the
//! subsets on which a family of projection relations vanishes locally.
//!
//! For free groups a pattern only records the intersection with a
//! word-length ball, so relation checks that would need elements beyond
//! the ball are skipped and reported rather than failed: the enumeration
//! is an outer approximation. For finite groups the ball is the whole
//! group and everything is exact.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::group::{FiniteGroup, FreeGroup, PatternGroup};
use crate::scalar::{ComplexScalar, GaussRational};
use crate::words::ReducedWord;
use crate::{Limits, PdsxError};

/// A finite truncation `ω ∩ B_k` of an identity-containing subset of the
/// group. On finite groups every element has length zero, so the pattern
/// is the subset itself.
#[derive(Clone, Debug)]
pub struct BallPattern<G: PatternGroup> {
    radius: u32,
    members: BTreeSet<G::Elem>,
}

impl<G: PatternGroup> PartialEq for BallPattern<G> {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.members == other.members
    }
}

impl<G: PatternGroup> Eq for BallPattern<G> {}

impl<G: PatternGroup> PartialOrd for BallPattern<G> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<G: PatternGroup> Ord for BallPattern<G> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.radius
            .cmp(&other.radius)
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl<G: PatternGroup> BallPattern<G> {
    pub fn new(
        group: &G,
        radius: u32,
        members: BTreeSet<G::Elem>,
    ) -> Result<Self, PdsxError> {
        if !members.contains(&group.identity()) {
            return Err(PdsxError::Semantic(
                "pattern must contain the identity".into(),
            ));
        }
        if let Some(bad) = members.iter().find(|m| group.length(m) > radius) {
            return Err(PdsxError::Semantic(format!(
                "member {} lies outside the radius-{radius} ball",
                group.render(bad)
            )));
        }
        Ok(BallPattern { radius, members })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn members(&self) -> &BTreeSet<G::Elem> {
        &self.members
    }

    pub fn contains(&self, x: &G::Elem) -> bool {
        self.members.contains(x)
    }

    /// Restriction to a smaller ball.
    pub fn restrict(&self, group: &G, radius: u32) -> Self {
        BallPattern {
            radius,
            members: self
                .members
                .iter()
                .filter(|m| group.length(m) <= radius)
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self, group: &G) -> Value {
        json!({
            "radius": self.radius,
            "members": self.members.iter().map(|m| group.render(m)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(group: &G, v: &Value) -> Result<Self, PdsxError> {
        let radius = v
            .get("radius")
            .and_then(Value::as_u64)
            .ok_or_else(|| PdsxError::Parse("pattern needs a numeric `radius`".into()))?
            as u32;
        let members = v
            .get("members")
            .and_then(Value::as_array)
            .ok_or_else(|| PdsxError::Parse("pattern needs a `members` array".into()))?
            .iter()
            .map(|m| {
                m.as_str()
                    .ok_or_else(|| PdsxError::Parse("member must be a string".into()))
                    .and_then(|s| group.parse_elem(s))
            })
            .collect::<Result<BTreeSet<_>, _>>()?;
        Self::new(group, radius, members)
    }
}

/// A finite sum of scalar-weighted products of indicator symbols, the
/// relation shape `Σ_i λ_i Π_j 1_{t_ij}`. Evaluated on a pattern, the
/// indicator of `t` is 1 exactly when `t` is a member.
#[derive(Clone, PartialEq, Debug)]
pub struct RelationPoly<E> {
    terms: Vec<(GaussRational, Vec<E>)>,
}

impl<E: Clone + Ord> RelationPoly<E> {
    pub fn new(terms: Vec<(GaussRational, Vec<E>)>) -> Self {
        RelationPoly { terms }
    }

    /// The single indicator `1_t`.
    pub fn indicator(t: E) -> Self {
        RelationPoly {
            terms: vec![(GaussRational::from_int(1), vec![t])],
        }
    }

    pub fn constant(c: i64) -> Self {
        RelationPoly {
            terms: vec![(GaussRational::from_int(c), Vec::new())],
        }
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn minus(self, other: Self) -> Self {
        let negated = RelationPoly {
            terms: other
                .terms
                .into_iter()
                .map(|(c, fs)| (c.neg(), fs))
                .collect(),
        };
        self.plus(negated)
    }

    pub fn scaled(mut self, c: i64) -> Self {
        let c = GaussRational::from_int(c);
        for (coeff, _) in &mut self.terms {
            *coeff = coeff.mul(&c);
        }
        self
    }

    pub fn terms(&self) -> &[(GaussRational, Vec<E>)] {
        &self.terms
    }

    /// Longest factor, by the given length function.
    pub fn max_factor_len(&self, len: impl Fn(&E) -> u32) -> u32 {
        self.terms
            .iter()
            .flat_map(|(_, fs)| fs.iter())
            .map(len)
            .max()
            .unwrap_or(0)
    }
}

/// Evaluates `f` at the pattern: `Σ_i λ_i Π_j [t_ij ∈ ω]`. Errors when a
/// factor cannot be seen inside the pattern's ball.
pub fn evaluate<G: PatternGroup>(
    group: &G,
    f: &RelationPoly<G::Elem>,
    pattern: &BallPattern<G>,
) -> Result<GaussRational, PdsxError> {
    let mut total = GaussRational::from_int(0);
    for (coeff, factors) in &f.terms {
        let mut product = true;
        for t in factors {
            if group.length(t) > pattern.radius {
                return Err(PdsxError::TruncationOverflow(format!(
                    "factor {} exceeds pattern radius {}",
                    group.render(t),
                    pattern.radius
                )));
            }
            if !pattern.contains(t) {
                product = false;
                break;
            }
        }
        if product {
            total = total.add(coeff);
        }
    }
    Ok(total)
}

/// The translation partial action `θ_t(ω) = tω`, defined when `t⁻¹ ∈ ω`.
/// The radius shrinks by |t| so that later checks stay sound.
pub fn translate<G: PatternGroup>(
    group: &G,
    pattern: &BallPattern<G>,
    t: &G::Elem,
) -> Result<Option<BallPattern<G>>, PdsxError> {
    let tlen = group.length(t);
    if tlen > pattern.radius {
        return Err(PdsxError::TruncationOverflow(format!(
            "translating element {} exceeds pattern radius {}",
            group.render(t),
            pattern.radius
        )));
    }
    if !pattern.contains(&group.invert(t)) {
        return Ok(None);
    }
    let radius = pattern.radius - tlen;
    let members = pattern
        .members
        .iter()
        .map(|x| group.multiply(t, x))
        .filter(|y| group.length(y) <= radius)
        .collect();
    Ok(Some(BallPattern { radius, members }))
}

/// One skipped check: the member at which the pattern was translated and
/// the relation that could not be evaluated in the shrunken ball.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SkippedCheck<E> {
    pub at: E,
    pub poly: usize,
}

/// Outcome of the local relation test on one pattern.
#[derive(Clone, Debug)]
pub struct LocalVerdict<E> {
    pub holds: bool,
    pub skipped: Vec<SkippedCheck<E>>,
    /// First failing (member, relation index) when `holds` is false.
    pub failure: Option<(E, usize)>,
}

/// Checks `f(t⁻¹ω) = 0` for every member `t` and every relation, skipping
/// (and reporting) checks the ball is too small to decide.
pub fn satisfies_relations_locally<G: PatternGroup>(
    group: &G,
    pattern: &BallPattern<G>,
    relations: &[RelationPoly<G::Elem>],
) -> LocalVerdict<G::Elem> {
    let mut skipped = Vec::new();
    for t in &pattern.members {
        let translated = match translate(group, pattern, &group.invert(t)) {
            Ok(Some(p)) => p,
            // |t⁻¹| = |t| ≤ radius and t ∈ ω, so translation by t⁻¹ is
            // always defined; this arm is unreachable but harmless.
            _ => continue,
        };
        for (j, f) in relations.iter().enumerate() {
            if f.max_factor_len(|e| group.length(e)) > translated.radius {
                skipped.push(SkippedCheck {
                    at: t.clone(),
                    poly: j,
                });
                continue;
            }
            match evaluate(group, f, &translated) {
                Ok(v) if v.is_zero() => {}
                Ok(_) => {
                    return LocalVerdict {
                        holds: false,
                        skipped,
                        failure: Some((t.clone(), j)),
                    }
                }
                Err(_) => skipped.push(SkippedCheck {
                    at: t.clone(),
                    poly: j,
                }),
            }
        }
    }
    LocalVerdict {
        holds: true,
        skipped,
        failure: None,
    }
}

/// A pattern surviving the local relation test, with its skip report.
#[derive(Clone, Debug)]
pub struct Survivor<G: PatternGroup> {
    pub pattern: BallPattern<G>,
    pub skipped: Vec<SkippedCheck<G::Elem>>,
}

fn enumerate_kernel<G: PatternGroup>(
    group: &G,
    radius: u32,
    relations: &[RelationPoly<G::Elem>],
    parallel: bool,
) -> Result<Vec<Survivor<G>>, PdsxError> {
    let ball = group.ball(radius);
    let identity = group.identity();
    let rest: Vec<G::Elem> = ball.into_iter().filter(|x| *x != identity).collect();
    if rest.len() >= 63 {
        return Err(PdsxError::GuardExceeded(format!(
            "ball of {} elements cannot be enumerated",
            rest.len() + 1
        )));
    }
    let count: u64 = 1u64 << rest.len();
    let survivors = crate::par::filter_map_indices(count, parallel, |mask| {
        let mut members: BTreeSet<G::Elem> = BTreeSet::new();
        members.insert(identity.clone());
        for (i, x) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                members.insert(x.clone());
            }
        }
        let pattern = BallPattern {
            radius,
            members,
        };
        let verdict = satisfies_relations_locally(group, &pattern, relations);
        verdict.holds.then_some(Survivor {
            pattern,
            skipped: verdict.skipped,
        })
    });
    Ok(survivors)
}

/// All subsets of the radius-`radius` ball of F_n containing the identity
/// that survive the local relation test — an outer approximation of the
/// ball truncations of the relation spectrum.
pub fn enumerate_spectrum_ball(
    rank: u32,
    radius: u32,
    relations: &[RelationPoly<ReducedWord>],
    limits: &Limits,
) -> Result<Vec<Survivor<FreeGroup>>, PdsxError> {
    enumerate_spectrum_ball_inner(rank, radius, relations, limits, true)
}

/// Sequential twin of [`enumerate_spectrum_ball`].
pub fn enumerate_spectrum_ball_seq(
    rank: u32,
    radius: u32,
    relations: &[RelationPoly<ReducedWord>],
    limits: &Limits,
) -> Result<Vec<Survivor<FreeGroup>>, PdsxError> {
    enumerate_spectrum_ball_inner(rank, radius, relations, limits, false)
}

fn enumerate_spectrum_ball_inner(
    rank: u32,
    radius: u32,
    relations: &[RelationPoly<ReducedWord>],
    limits: &Limits,
    parallel: bool,
) -> Result<Vec<Survivor<FreeGroup>>, PdsxError> {
    let group = FreeGroup::new(rank);
    let ball_size = crate::words::ball_count(rank, radius);
    if ball_size > limits.max_ball_states as u64 {
        return Err(PdsxError::GuardExceeded(format!(
            "|B_{radius}| = {ball_size} exceeds the enumeration cap of {}",
            limits.max_ball_states
        )));
    }
    enumerate_kernel(&group, radius, relations, parallel)
}

/// Exact spectrum over a finite group: all identity-containing subsets on
/// which every relation vanishes at every translate.
pub fn finite_group_spectrum(
    group: &FiniteGroup,
    relations: &[RelationPoly<usize>],
    limits: &Limits,
) -> Result<Vec<Survivor<FiniteGroup>>, PdsxError> {
    finite_group_spectrum_inner(group, relations, limits, true)
}

/// Sequential twin of [`finite_group_spectrum`].
pub fn finite_group_spectrum_seq(
    group: &FiniteGroup,
    relations: &[RelationPoly<usize>],
    limits: &Limits,
) -> Result<Vec<Survivor<FiniteGroup>>, PdsxError> {
    finite_group_spectrum_inner(group, relations, limits, false)
}

fn finite_group_spectrum_inner(
    group: &FiniteGroup,
    relations: &[RelationPoly<usize>],
    limits: &Limits,
    parallel: bool,
) -> Result<Vec<Survivor<FiniteGroup>>, PdsxError> {
    if group.order() > limits.max_group_order {
        return Err(PdsxError::GuardExceeded(format!(
            "group of order {} exceeds the cap of {}",
            group.order(),
            limits.max_group_order
        )));
    }
    enumerate_kernel(group, 0, relations, parallel)
}

/// The patterns fixed by `t` at truncation level: the translate is
/// defined and agrees with the pattern on the shrunken ball. On finite
/// groups this is exactly `tω = ω`.
pub fn fixed_patterns<G: PatternGroup>(
    group: &G,
    t: &G::Elem,
    patterns: &[BallPattern<G>],
) -> Result<Vec<BallPattern<G>>, PdsxError> {
    let mut fixed = Vec::new();
    for p in patterns {
        match translate(group, p, t)? {
            None => {}
            Some(moved) => {
                if moved == p.restrict(group, moved.radius()) {
                    fixed.push(p.clone());
                }
            }
        }
    }
    Ok(fixed)
}

/// A basic open set of the pattern space: finitely many required members
/// and finitely many forbidden ones.
#[derive(Clone, Debug, Default)]
pub struct BasicOpenSet {
    pub ins: Vec<ReducedWord>,
    pub outs: Vec<ReducedWord>,
}

/// Builds a finite point of the given basic open set that the nontrivial
/// element `t` does not fix, following the explicit choice: the point is
/// the required members plus the identity plus one extra element `c`
/// picked shortlex-least so that `t·c` stays outside the set.
pub fn infinite_group_separation_witness(
    rank: u32,
    open_set: &BasicOpenSet,
    t: &ReducedWord,
) -> Result<BallPattern<FreeGroup>, PdsxError> {
    let group = FreeGroup::new(rank);
    if t.is_empty() {
        return Err(PdsxError::Semantic("t must differ from the identity".into()));
    }
    let identity = group.identity();
    let outs: BTreeSet<ReducedWord> = open_set.outs.iter().cloned().collect();
    if outs.contains(&identity) {
        return Err(PdsxError::Semantic(
            "open set is empty: every pattern contains the identity".into(),
        ));
    }
    let mut ins: BTreeSet<ReducedWord> = open_set.ins.iter().cloned().collect();
    ins.insert(identity.clone());
    if ins.iter().any(|a| outs.contains(a)) {
        return Err(PdsxError::Semantic(
            "open set is inconsistent: an element is both required and forbidden".into(),
        ));
    }
    // Restrict attention to the domain of θ_t when possible.
    let t_inv = t.inverse();
    if !outs.contains(&t_inv) {
        ins.insert(t_inv.clone());
    }

    // Shortlex-least c with c ∉ ins ∪ outs and t·c ∉ ins ∪ {e}.
    let mut radius = 1;
    let c = loop {
        let found = crate::words::ball(rank, radius).into_iter().find(|c| {
            if c.is_empty() || ins.contains(c) || outs.contains(c) {
                return false;
            }
            let tc = group.multiply(t, c);
            !tc.is_empty() && !ins.contains(&tc)
        });
        match found {
            Some(c) => break c,
            None => {
                radius += 1;
                if radius > 64 {
                    return Err(PdsxError::Semantic(
                        "no witness element found (inconsistent constraints)".into(),
                    ));
                }
            }
        }
    };

    let mut members = ins;
    members.insert(c);
    let radius = members.iter().map(|m| m.len() as u32).max().unwrap_or(0);
    let witness = BallPattern::new(&group, radius, members)?;

    // The construction guarantees t·ω ≠ ω as exact sets; keep the check as
    // a safety net.
    let translated: BTreeSet<ReducedWord> = witness
        .members()
        .iter()
        .map(|x| group.multiply(t, x))
        .collect();
    debug_assert_ne!(&translated, witness.members());
    Ok(witness)
}

/// Evaluates all relation polys needed by callers that mix scalar modes.
pub fn poly_to_float_terms<E: Clone>(f: &RelationPoly<E>) -> Vec<(num_complex::Complex64, Vec<E>)> {
    f.terms
        .iter()
        .map(|(c, fs)| (c.to_complex64(), fs.clone()))
        .collect()
}
