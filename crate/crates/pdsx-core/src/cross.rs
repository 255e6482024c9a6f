//! Crossed-product *-algebra at finite scale: formal sums Σ a_t δ_t over
//! a finite state space carrying a partial action, with the convolution
//! product, the star, the conditional expectation onto the δ_e
//! coefficient, covariant-representation evaluation, restriction to
//! invariant subsets, and the constructive compression functions.
//!
//! State spaces are finite, so "open" and "compact" are arbitrary
//! subsets and every function is continuous; the constructions stay
//! nontrivial because fixed-point avoidance and support disjointness do.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::group::{FiniteGroup, PatternGroup};
use crate::matrix::Matrix;
use crate::scalar::{ComplexScalar, GaussRational};
use crate::{Limits, PdsxError};

/// A partial action of a group on a finite state space: a materialized
/// set of group elements (a ball, for free groups with a word cap) and
/// for each one a partial bijection θ_t : U_{t⁻¹} → U_t.
pub struct FiniteSystem<G: PatternGroup> {
    group: G,
    word_cap: u32,
    elements: Vec<G::Elem>,
    index: BTreeMap<G::Elem, usize>,
    state_names: Vec<String>,
    /// domains[i] = U_{elements[i]} (the range of θ_{elements[i]})
    domains: Vec<Vec<bool>>,
    /// maps[i][x] = θ_{elements[i]}(x) for x in U_{elements[i]⁻¹}
    maps: Vec<Vec<Option<usize>>>,
}

impl<G: PatternGroup> FiniteSystem<G> {
    /// Builds and validates a system from explicit partial bijections,
    /// keyed by group element. Unlisted elements act with empty domain;
    /// the identity always acts as the identity; inverses are filled in
    /// automatically (and checked when supplied). Validation enforces
    /// θ_{t⁻¹} = θ_t⁻¹ and that θ_{st} extends θ_s ∘ θ_t whenever st is
    /// materialized.
    pub fn new(
        group: G,
        word_cap: u32,
        state_names: Vec<String>,
        theta: BTreeMap<G::Elem, Vec<(usize, usize)>>,
    ) -> Result<Self, PdsxError> {
        let n = state_names.len();
        if n == 0 {
            return Err(PdsxError::Semantic("state space must be nonempty".into()));
        }
        let elements = group.ball(word_cap);
        let index: BTreeMap<G::Elem, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut maps: Vec<Vec<Option<usize>>> = vec![vec![None; n]; elements.len()];
        let e_idx = *index
            .get(&group.identity())
            .expect("ball contains the identity");
        maps[e_idx] = (0..n).map(Some).collect();

        for (t, pairs) in &theta {
            let Some(&t_idx) = index.get(t) else {
                return Err(PdsxError::Semantic(format!(
                    "element {} is outside the materialized ball",
                    group.render(t)
                )));
            };
            if t_idx == e_idx {
                if pairs.len() != n || pairs.iter().any(|&(x, y)| x != y) {
                    return Err(PdsxError::Semantic(
                        "the identity must act as the identity map".into(),
                    ));
                }
                continue;
            }
            let mut seen_src = vec![false; n];
            let mut seen_dst = vec![false; n];
            for &(x, y) in pairs {
                if x >= n || y >= n {
                    return Err(PdsxError::Semantic(format!(
                        "state index out of range in the map of {}",
                        group.render(t)
                    )));
                }
                if seen_src[x] || seen_dst[y] {
                    return Err(PdsxError::Semantic(format!(
                        "map of {} is not a partial bijection",
                        group.render(t)
                    )));
                }
                seen_src[x] = true;
                seen_dst[y] = true;
                maps[t_idx][x] = Some(y);
            }
        }

        let listed: Vec<bool> = elements
            .iter()
            .map(|t| theta.contains_key(t) || *t == group.identity())
            .collect();

        // fill or verify inverses
        for i in 0..elements.len() {
            let inv = group.invert(&elements[i]);
            let Some(&j) = index.get(&inv) else {
                return Err(PdsxError::Semantic(format!(
                    "inverse of {} is outside the materialized ball",
                    group.render(&elements[i])
                )));
            };
            let listed_i = maps[i].iter().any(Option::is_some);
            let listed_j = maps[j].iter().any(Option::is_some);
            if listed_i && !listed_j {
                for x in 0..n {
                    if let Some(y) = maps[i][x] {
                        maps[j][y] = Some(x);
                    }
                }
            } else if listed_i && listed_j {
                for x in 0..n {
                    if let Some(y) = maps[i][x] {
                        if maps[j][y] != Some(x) {
                            return Err(PdsxError::Semantic(format!(
                                "maps of {} and its inverse are not mutually inverse",
                                group.render(&elements[i])
                            )));
                        }
                    }
                }
                for y in 0..n {
                    if let Some(x) = maps[j][y] {
                        if maps[i][x] != Some(y) {
                            return Err(PdsxError::Semantic(format!(
                                "maps of {} and its inverse are not mutually inverse",
                                group.render(&elements[i])
                            )));
                        }
                    }
                }
            }
        }

        // derive unlisted longer words by composing along a geodesic
        // step: free-group systems list only the generator maps and the
        // rest of the ball completes semisaturatedly (coherence is
        // validated below either way)
        let mut by_length: Vec<usize> = (0..elements.len()).collect();
        by_length.sort_by_key(|&i| group.length(&elements[i]));
        for &i in &by_length {
            let already = maps[i].iter().any(Option::is_some) || listed[i];
            let inv_listed = listed[index[&group.invert(&elements[i])]];
            if already || inv_listed {
                continue;
            }
            let Some((head, rest)) = group.geodesic_split(&elements[i]) else {
                continue;
            };
            let h = index[&head];
            let r = index[&rest];
            for x in 0..n {
                if let Some(y) = maps[r][x] {
                    if let Some(z) = maps[h][y] {
                        maps[i][x] = Some(z);
                    }
                }
            }
        }

        // U_t is the source set of θ_{t⁻¹}
        let domains: Vec<Vec<bool>> = (0..elements.len())
            .map(|i| {
                let j = index[&group.invert(&elements[i])];
                (0..n).map(|x| maps[j][x].is_some()).collect()
            })
            .collect();

        let sys = FiniteSystem {
            group,
            word_cap,
            elements,
            index,
            state_names,
            domains,
            maps,
        };
        sys.validate_extension()?;
        Ok(sys)
    }

    fn validate_extension(&self) -> Result<(), PdsxError> {
        let n = self.state_names.len();
        // θ_{t⁻¹} is the inverse map of θ_t
        for (i, t) in self.elements.iter().enumerate() {
            let j = self.index[&self.group.invert(t)];
            for x in 0..n {
                if let Some(y) = self.maps[i][x] {
                    if self.maps[j][y] != Some(x) {
                        return Err(PdsxError::Semantic(format!(
                            "θ of {} and its inverse are not mutually inverse",
                            self.group.render(t)
                        )));
                    }
                }
            }
        }
        for (si, s) in self.elements.iter().enumerate() {
            for (ti, t) in self.elements.iter().enumerate() {
                let st = self.group.multiply(s, t);
                let Some(&st_idx) = self.index.get(&st) else {
                    continue; // beyond the cap: nothing to extend
                };
                for x in 0..n {
                    if let Some(y) = self.maps[ti][x] {
                        if let Some(z) = self.maps[si][y] {
                            if self.maps[st_idx][x] != Some(z) {
                                return Err(PdsxError::Semantic(format!(
                                    "θ_{{{}·{}}} does not extend the composition at state {}",
                                    self.group.render(s),
                                    self.group.render(t),
                                    self.state_names[x]
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Restriction of a global action on `0..total` to a selected subset
    /// of states: the standard way partial actions arise.
    pub fn restrict_global<F>(
        group: G,
        word_cap: u32,
        act: F,
        total: usize,
        selected: &[usize],
    ) -> Result<Self, PdsxError>
    where
        F: Fn(&G::Elem, usize) -> usize,
    {
        let position: BTreeMap<usize, usize> = selected
            .iter()
            .enumerate()
            .map(|(i, &y)| (y, i))
            .collect();
        if position.len() != selected.len() {
            return Err(PdsxError::Semantic("selected states repeat".into()));
        }
        if selected.iter().any(|&y| y >= total) {
            return Err(PdsxError::Semantic("selected state out of range".into()));
        }
        let names = selected.iter().map(|y| format!("x{y}")).collect();
        let mut theta = BTreeMap::new();
        for t in group.ball(word_cap) {
            let mut pairs = Vec::new();
            for (i, &y) in selected.iter().enumerate() {
                let img = act(&t, y);
                if img >= total {
                    return Err(PdsxError::Semantic("global action leaves the space".into()));
                }
                if let Some(&j) = position.get(&img) {
                    pairs.push((i, j));
                }
            }
            theta.insert(t, pairs);
        }
        Self::new(group, word_cap, names, theta)
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn elements(&self) -> &[G::Elem] {
        &self.elements
    }

    /// U_t as a boolean mask over states.
    pub fn domain(&self, t: &G::Elem) -> Result<&[bool], PdsxError> {
        let idx = self.index.get(t).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", self.group.render(t)))
        })?;
        Ok(&self.domains[*idx])
    }

    /// θ_t(x), defined for x ∈ U_{t⁻¹}.
    pub fn apply(&self, t: &G::Elem, x: usize) -> Result<Option<usize>, PdsxError> {
        let idx = self.index.get(t).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", self.group.render(t)))
        })?;
        Ok(self.maps[*idx][x])
    }

    /// The fixed states of θ_t.
    pub fn fixed_states(&self, t: &G::Elem) -> Result<Vec<usize>, PdsxError> {
        let idx = self.index.get(t).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", self.group.render(t)))
        })?;
        Ok((0..self.states())
            .filter(|&x| self.maps[*idx][x] == Some(x))
            .collect())
    }

    /// Checks the support invariant of an element against this system.
    pub fn validate_element<S: ComplexScalar>(
        &self,
        p: &CrossedElement<S, G::Elem>,
    ) -> Result<(), PdsxError> {
        for (t, coeff) in &p.terms {
            let domain = self.domain(t)?;
            if coeff.len() != self.states() {
                return Err(PdsxError::Dimension(
                    "coefficient length differs from the state count".into(),
                ));
            }
            for (x, v) in coeff.iter().enumerate() {
                if !v.is_zero() && !domain[x] {
                    return Err(PdsxError::Semantic(format!(
                        "coefficient of {} is supported outside its domain at state {}",
                        self.group.render(t),
                        self.state_names[x]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses { "states": [...], "theta": { "t": [[x, y], ...] } } with
    /// states referenced by name or by index.
    pub fn from_json_with_group(group: G, word_cap: u32, v: &Value) -> Result<Self, PdsxError> {
        let names: Vec<String> = v
            .get("states")
            .and_then(Value::as_array)
            .ok_or_else(|| PdsxError::Parse("system needs a `states` array".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .map(String::from)
                    .ok_or_else(|| PdsxError::Parse("state names must be strings".into()))
            })
            .collect::<Result<_, _>>()?;
        let lookup = |v: &Value| -> Result<usize, PdsxError> {
            match v {
                Value::Number(k) => k
                    .as_u64()
                    .map(|k| k as usize)
                    .filter(|&k| k < names.len())
                    .ok_or_else(|| PdsxError::Parse("state index out of range".into())),
                Value::String(s) => names
                    .iter()
                    .position(|n| n == s)
                    .ok_or_else(|| PdsxError::Parse(format!("unknown state `{s}`"))),
                _ => Err(PdsxError::Parse("state must be a name or an index".into())),
            }
        };
        let mut theta = BTreeMap::new();
        if let Some(obj) = v.get("theta").and_then(Value::as_object) {
            for (key, pairs) in obj {
                let elem = group.parse_elem(key)?;
                let pairs = pairs
                    .as_array()
                    .ok_or_else(|| PdsxError::Parse("theta entries must be arrays".into()))?
                    .iter()
                    .map(|pair| {
                        let pair = pair
                            .as_array()
                            .filter(|p| p.len() == 2)
                            .ok_or_else(|| PdsxError::Parse("theta pair must be [x, y]".into()))?;
                        Ok((lookup(&pair[0])?, lookup(&pair[1])?))
                    })
                    .collect::<Result<Vec<_>, PdsxError>>()?;
                theta.insert(elem, pairs);
            }
        }
        Self::new(group, word_cap, names, theta)
    }

    pub fn to_json(&self) -> Value {
        let theta: serde_json::Map<String, Value> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| self.maps[*i].iter().any(Option::is_some))
            .map(|(i, t)| {
                let pairs: Vec<Value> = self.maps[i]
                    .iter()
                    .enumerate()
                    .filter_map(|(x, y)| {
                        y.map(|y| json!([self.state_names[x], self.state_names[y]]))
                    })
                    .collect();
                (self.group.render(t), Value::Array(pairs))
            })
            .collect();
        json!({ "states": self.state_names, "theta": theta })
    }
}

/// A finite formal sum Σ_t a_t δ_t with coefficient functions over the
/// state space, each supported in the domain ideal of its group element.
#[derive(Clone, PartialEq, Debug)]
pub struct CrossedElement<S, E: Ord> {
    terms: BTreeMap<E, Vec<S>>,
}

impl<S: ComplexScalar, E: Clone + Ord> CrossedElement<S, E> {
    pub fn zero() -> Self {
        CrossedElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn single(t: E, coeff: Vec<S>) -> Self {
        let mut terms = BTreeMap::new();
        if coeff.iter().any(|v| !v.is_zero()) {
            terms.insert(t, coeff);
        }
        CrossedElement { terms }
    }

    pub fn from_terms(terms: BTreeMap<E, Vec<S>>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, c)| c.iter().any(|v| !v.is_zero()))
            .collect();
        CrossedElement { terms }
    }

    pub fn terms(&self) -> &BTreeMap<E, Vec<S>> {
        &self.terms
    }

    pub fn coefficient(&self, t: &E, states: usize) -> Vec<S> {
        self.terms
            .get(t)
            .cloned()
            .unwrap_or_else(|| vec![S::zero(); states])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (t, c) in &other.terms {
            match terms.entry(t.clone()) {
                Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                Entry::Occupied(mut e) => {
                    let merged: Vec<S> =
                        e.get().iter().zip(c).map(|(a, b)| a.add(b)).collect();
                    if merged.iter().all(S::is_zero) {
                        e.remove();
                    } else {
                        *e.get_mut() = merged;
                    }
                }
            }
        }
        CrossedElement { terms }
    }

    pub fn neg(&self) -> Self {
        CrossedElement {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), c.iter().map(S::neg).collect()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

/// Sup norm of a coefficient function.
pub fn sup_norm<S: ComplexScalar>(coeff: &[S]) -> f64 {
    coeff
        .iter()
        .map(|v| v.abs_sq_f64().sqrt())
        .fold(0.0, f64::max)
}

/// The convolution product, extended bilinearly from
/// (a δ_t)(b δ_s) = α_t(α_{t⁻¹}(a) b) δ_{ts}. A product whose group part
/// escapes the materialized ball with a nonzero coefficient is an error,
/// never a silent truncation.
pub fn multiply<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    p: &CrossedElement<S, G::Elem>,
    q: &CrossedElement<S, G::Elem>,
) -> Result<CrossedElement<S, G::Elem>, PdsxError> {
    let n = sys.states();
    let mut out: BTreeMap<G::Elem, Vec<S>> = BTreeMap::new();
    for (t, a) in &p.terms {
        let t_inv = sys.group.invert(t);
        let t_inv_idx = *sys.index.get(&t_inv).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", sys.group.render(&t_inv)))
        })?;
        for (s, b) in &q.terms {
            // c(x) = a(x) · b(θ_{t⁻¹}(x)) on U_t
            let mut c = vec![S::zero(); n];
            let mut nonzero = false;
            for x in 0..n {
                if let Some(y) = sys.maps[t_inv_idx][x] {
                    let v = a[x].mul(&b[y]);
                    if !v.is_zero() {
                        nonzero = true;
                    }
                    c[x] = v;
                }
            }
            if !nonzero {
                continue;
            }
            let ts = sys.group.multiply(t, s);
            if !sys.index.contains_key(&ts) {
                return Err(PdsxError::TruncationOverflow(format!(
                    "product {} leaves the materialized ball (cap {})",
                    sys.group.render(&ts),
                    sys.word_cap
                )));
            }
            match out.entry(ts) {
                Entry::Vacant(e) => {
                    e.insert(c);
                }
                Entry::Occupied(mut e) => {
                    let merged: Vec<S> =
                        e.get().iter().zip(&c).map(|(u, v)| u.add(v)).collect();
                    *e.get_mut() = merged;
                }
            }
        }
    }
    let result = CrossedElement::from_terms(out);
    sys.validate_element(&result)?;
    Ok(result)
}

/// The star: (a δ_t)* = α_{t⁻¹}(ā) δ_{t⁻¹}, extended conjugate-linearly.
pub fn star<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    p: &CrossedElement<S, G::Elem>,
) -> Result<CrossedElement<S, G::Elem>, PdsxError> {
    let n = sys.states();
    let mut out: BTreeMap<G::Elem, Vec<S>> = BTreeMap::new();
    for (t, a) in &p.terms {
        let t_idx = *sys.index.get(t).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", sys.group.render(t)))
        })?;
        let t_inv = sys.group.invert(t);
        // c(x) = conj(a(θ_t(x))) for x ∈ U_{t⁻¹}
        let mut c = vec![S::zero(); n];
        for x in 0..n {
            if let Some(y) = sys.maps[t_idx][x] {
                c[x] = a[y].conj();
            }
        }
        out.insert(t_inv, c);
    }
    let result = CrossedElement::from_terms(out);
    sys.validate_element(&result)?;
    Ok(result)
}

/// The conditional expectation: the δ_e coefficient.
pub fn expectation<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    p: &CrossedElement<S, G::Elem>,
) -> Vec<S> {
    p.coefficient(&sys.group.identity(), sys.states())
}

/// A covariant pair: one projection per state point and one operator per
/// materialized group element (keyed by its position in `elements`), on
/// a common space.
pub struct CovariantPair<S> {
    pub projections: Vec<Matrix<S>>,
    pub images: BTreeMap<usize, Matrix<S>>,
}

impl<S: ComplexScalar> CovariantPair<S> {
    fn dim(&self) -> usize {
        self.projections.first().map(Matrix::dim).unwrap_or(0)
    }
}

/// The finite regular-type representation of a system: the space has one
/// basis vector per state, the projections are the coordinate ones, and
/// each group element acts by the partial permutation of its map.
pub fn regular_pair<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
) -> CovariantPair<S> {
    let n = sys.states();
    let projections = (0..n)
        .map(|x| {
            Matrix::from_fn(n, |i, j| {
                if i == x && j == x {
                    S::one()
                } else {
                    S::zero()
                }
            })
        })
        .collect();
    let images = sys
        .elements
        .iter()
        .enumerate()
        .map(|(idx, _)| {
            let mut m = Matrix::zero(n);
            for x in 0..n {
                if let Some(y) = sys.maps[idx][x] {
                    m.set(y, x, S::one());
                }
            }
            (idx, m)
        })
        .collect();
    CovariantPair {
        projections,
        images,
    }
}

fn check_tol<S: ComplexScalar>(dim: usize) -> f64 {
    if S::exact() {
        0.0
    } else {
        crate::pisom::default_tol(dim)
    }
}

fn matrix_vanishes<S: ComplexScalar>(m: &Matrix<S>, tol: f64) -> bool {
    if tol == 0.0 {
        m.is_zero()
    } else {
        m.norm_max() <= tol
    }
}

/// Evaluates Σ_t π(a_t) u_t after checking the covariance conditions on
/// the support: the projections resolve the identity and are orthogonal,
/// u_e = 1, u_{t⁻¹} = u_t*, u_t u_t* projects onto the span of the U_t
/// coordinates, and u_t π_x u_t* = π_{θ_t(x)}. A violation is an error
/// naming the offending element.
pub fn represent<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    pair: &CovariantPair<S>,
    p: &CrossedElement<S, G::Elem>,
) -> Result<Matrix<S>, PdsxError> {
    sys.validate_element(p)?;
    let n = sys.states();
    let dim = pair.dim();
    let tol = check_tol::<S>(dim);
    if pair.projections.len() != n {
        return Err(PdsxError::Dimension(
            "one projection per state point required".into(),
        ));
    }
    // projections: orthogonal resolution of the identity
    let mut sum = Matrix::zero(dim);
    for (x, px) in pair.projections.iter().enumerate() {
        if !matrix_vanishes(&px.mul(px).sub(px), tol)
            || !matrix_vanishes(&px.adjoint().sub(px), tol)
        {
            return Err(PdsxError::Semantic(format!(
                "projection at state {} is not a self-adjoint idempotent",
                sys.state_names[x]
            )));
        }
        for (y, py) in pair.projections.iter().enumerate() {
            if x != y && !matrix_vanishes(&px.mul(py), tol) {
                return Err(PdsxError::Semantic(format!(
                    "projections at states {} and {} are not orthogonal",
                    sys.state_names[x], sys.state_names[y]
                )));
            }
        }
        sum = sum.add(px);
    }
    if !matrix_vanishes(&sum.sub(&Matrix::identity(dim)), tol) {
        return Err(PdsxError::Semantic(
            "projections do not sum to the identity".into(),
        ));
    }

    let image_of = |t: &G::Elem| -> Result<&Matrix<S>, PdsxError> {
        let idx = sys.index.get(t).ok_or_else(|| {
            PdsxError::Semantic(format!("{} is not materialized", sys.group.render(t)))
        })?;
        pair.images.get(idx).ok_or_else(|| {
            PdsxError::Semantic(format!("no operator for {}", sys.group.render(t)))
        })
    };

    let e = sys.group.identity();
    if !matrix_vanishes(&image_of(&e)?.sub(&Matrix::identity(dim)), tol) {
        return Err(PdsxError::Semantic("u(e) is not the identity".into()));
    }

    for t in p.terms.keys() {
        let t_inv = sys.group.invert(t);
        let ut = image_of(t)?;
        let ut_inv = image_of(&t_inv)?;
        if !matrix_vanishes(&ut_inv.sub(&ut.adjoint()), tol) {
            return Err(PdsxError::Semantic(format!(
                "covariance violation at {}: u(t⁻¹) ≠ u(t)*",
                sys.group.render(t)
            )));
        }
        // u_t u_t* = Σ_{x ∈ U_t} π_x
        let mut range = Matrix::zero(dim);
        let domain_mask = sys.domain(t)?;
        for (x, px) in pair.projections.iter().enumerate() {
            if domain_mask[x] {
                range = range.add(px);
            }
        }
        if !matrix_vanishes(&ut.mul(&ut.adjoint()).sub(&range), tol) {
            return Err(PdsxError::Semantic(format!(
                "covariance violation at {}: range projection mismatch",
                sys.group.render(t)
            )));
        }
        // u_t π_x u_t* = π_{θ_t(x)} on the domain
        let t_idx = sys.index[t];
        for x in 0..n {
            if let Some(y) = sys.maps[t_idx][x] {
                let lhs = ut.mul(&pair.projections[x]).mul(&ut.adjoint());
                if !matrix_vanishes(&lhs.sub(&pair.projections[y]), tol) {
                    return Err(PdsxError::Semantic(format!(
                        "covariance violation at {}: conjugation does not move state {} to {}",
                        sys.group.render(t),
                        sys.state_names[x],
                        sys.state_names[y]
                    )));
                }
            }
        }
    }

    let mut total = Matrix::zero(dim);
    for (t, a) in &p.terms {
        let mut pi_a = Matrix::zero(dim);
        for (x, v) in a.iter().enumerate() {
            pi_a = pi_a.add(&pair.projections[x].scale(v));
        }
        total = total.add(&pi_a.mul(image_of(t)?));
    }
    Ok(total)
}

/// Operator norm of an element under the regular-type representation,
/// computed on the floating shadow by power iteration.
pub fn element_norm_op<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    p: &CrossedElement<S, G::Elem>,
) -> Result<f64, PdsxError> {
    let float_pair = regular_pair::<Complex64, G>(sys);
    let float_elem: CrossedElement<Complex64, G::Elem> = CrossedElement {
        terms: p
            .terms
            .iter()
            .map(|(t, c)| (t.clone(), c.iter().map(S::to_complex64).collect()))
            .collect(),
    };
    let m = represent(sys, &float_pair, &float_elem)?;
    Ok(operator_norm(&m))
}

fn operator_norm(m: &Matrix<Complex64>) -> f64 {
    let n = m.dim();
    if n == 0 {
        return 0.0;
    }
    let gram = m.adjoint().mul(m);
    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                w[i] += gram.entry(i, j) * v[j];
            }
        }
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for z in &mut w {
            *z /= norm;
        }
        v = w;
    }
    lambda.sqrt()
}

/// Dimension bookkeeping of the restriction map to an invariant subset.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QuotientDims {
    pub domain: usize,
    pub kernel: usize,
    pub image: usize,
}

/// Restricts the system and an element to an invariant subset of the
/// states, checking invariance θ_s(Ω ∩ U_{s⁻¹}) ⊆ Ω first. Returns the
/// restricted system, the restricted element, and the exactness
/// bookkeeping domain = kernel + image summed over the materialized
/// elements.
pub fn restrict_quotient<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    omega: &[bool],
    p: &CrossedElement<S, G::Elem>,
) -> Result<(FiniteSystem<G>, CrossedElement<S, G::Elem>, QuotientDims), PdsxError> {
    let n = sys.states();
    if omega.len() != n {
        return Err(PdsxError::Dimension("subset mask length mismatch".into()));
    }
    if omega.iter().all(|&b| !b) {
        return Err(PdsxError::Semantic(
            "restriction to the empty set is excluded".into(),
        ));
    }
    sys.validate_element(p)?;
    for (idx, t) in sys.elements.iter().enumerate() {
        for x in 0..n {
            if omega[x] {
                if let Some(y) = sys.maps[idx][x] {
                    if !omega[y] {
                        return Err(PdsxError::Semantic(format!(
                            "subset is not invariant: θ_{} moves {} outside",
                            sys.group.render(t),
                            sys.state_names[x]
                        )));
                    }
                }
            }
        }
    }
    let selected: Vec<usize> = (0..n).filter(|&x| omega[x]).collect();
    let renumber: BTreeMap<usize, usize> = selected
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, i))
        .collect();
    let names = selected
        .iter()
        .map(|&x| sys.state_names[x].clone())
        .collect();
    let mut theta = BTreeMap::new();
    for (idx, t) in sys.elements.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = selected
            .iter()
            .filter_map(|&x| sys.maps[idx][x].map(|y| (renumber[&x], renumber[&y])))
            .collect();
        theta.insert(t.clone(), pairs);
    }
    let restricted = FiniteSystem::new(sys.group.clone(), sys.word_cap, names, theta)?;

    let terms: BTreeMap<G::Elem, Vec<S>> = p
        .terms
        .iter()
        .map(|(t, c)| {
            (
                t.clone(),
                selected.iter().map(|&x| c[x].clone()).collect(),
            )
        })
        .collect();
    let restricted_elem = CrossedElement::from_terms(terms);

    let mut dims = QuotientDims {
        domain: 0,
        kernel: 0,
        image: 0,
    };
    for idx in 0..sys.elements.len() {
        for x in 0..n {
            if sys.domains[idx][x] {
                dims.domain += 1;
                if omega[x] {
                    dims.image += 1;
                } else {
                    dims.kernel += 1;
                }
            }
        }
    }
    Ok((restricted, restricted_elem, dims))
}

/// One obstruction to compression: a support element together with its
/// fixed states inside the near-maximum region.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub element: String,
    pub fixed_states_in_region: Vec<usize>,
}

/// Compression failures separate the structural case (no admissible
/// point) from ordinary input errors.
#[derive(Debug, Error)]
pub enum CompressError {
    #[error("no admissible point: every near-maximum state is fixed by a support element")]
    NoFreePoint { obstructions: Vec<Obstruction> },
    #[error(transparent)]
    Core(#[from] PdsxError),
}

/// The localizing function of the one-term compression step: an
/// indicator h with h(x0) = 1, 0 ≤ h ≤ 1 and ‖h (f δ_t) h‖ ≤ ε, built by
/// the two-case construction (x0 outside the range of θ_t, or moved by
/// it) and verified before returning.
pub fn hlemma_h<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    t: &G::Elem,
    f: &[S],
    x0: usize,
    eps: f64,
) -> Result<Vec<S>, PdsxError> {
    let n = sys.states();
    if *t == sys.group.identity() {
        return Err(PdsxError::Semantic("t must differ from the identity".into()));
    }
    if x0 >= n || f.len() != n {
        return Err(PdsxError::Dimension("state index or coefficient length".into()));
    }
    let u_t = sys.domain(t)?.to_vec();
    if f.iter().enumerate().any(|(x, v)| !v.is_zero() && !u_t[x]) {
        return Err(PdsxError::Semantic("f must be supported in U_t".into()));
    }
    let t_inv = sys.group.invert(t);
    let h = if !u_t[x0] {
        // x0 misses the range of θ_t, so the spike at x0 avoids the set
        // where |f| reaches ε (f vanishes at x0 altogether)
        indicator::<S>(n, x0)
    } else {
        // x0 lies in the range; it must be moved by θ_{t⁻¹}
        let back = sys
            .apply(&t_inv, x0)?
            .expect("x0 in U_t lies in the domain of the inverse map");
        if back == x0 {
            return Err(PdsxError::Semantic(
                "x0 is a fixed point of the action of t".into(),
            ));
        }
        indicator::<S>(n, x0)
    };

    // verify the three postconditions before returning
    if h[x0].is_zero() {
        return Err(PdsxError::Semantic("h(x0) = 1 failed".into()));
    }
    let product_sup = compressed_term_sup(sys, t, f, &h)?;
    if product_sup > eps {
        return Err(PdsxError::Semantic(format!(
            "constructed h fails its bound: {product_sup} > {eps}"
        )));
    }
    Ok(h)
}

fn indicator<S: ComplexScalar>(n: usize, x0: usize) -> Vec<S> {
    (0..n)
        .map(|x| if x == x0 { S::one() } else { S::zero() })
        .collect()
}

/// Sup norm of h (f δ_t) h = (h · f · (h ∘ θ_{t⁻¹})) δ_t.
fn compressed_term_sup<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    t: &G::Elem,
    f: &[S],
    h: &[S],
) -> Result<f64, PdsxError> {
    let t_inv = sys.group.invert(t);
    let t_inv_idx = *sys.index.get(&t_inv).ok_or_else(|| {
        PdsxError::Semantic(format!("{} is not materialized", sys.group.render(&t_inv)))
    })?;
    let mut worst = 0.0f64;
    for x in 0..sys.states() {
        if let Some(y) = sys.maps[t_inv_idx][x] {
            let v = h[x].mul(&f[x]).mul(&h[y]);
            worst = worst.max(v.abs_sq_f64().sqrt());
        }
    }
    Ok(worst)
}

/// A verified compression: the function h, the chosen point, and the
/// certified bounds.
#[derive(Clone, Debug)]
pub struct Compression<S> {
    pub h: Vec<S>,
    pub x0: usize,
    /// sup |h a_e h|, certified ≥ ‖a_e‖ − ε.
    pub diagonal_lower: f64,
    /// Σ_t ‖h a_t δ_t h‖ over the off-diagonal support, certified ≤ ε.
    pub off_diagonal_sum: f64,
    /// ‖h c h − h E(c) h‖ under the regular-type representation.
    pub off_diagonal_norm_op: f64,
}

/// Builds h = Π_{t ∈ supp(c)\{e}} h_t around a near-maximum state of the
/// diagonal coefficient avoiding every relevant fixed set, and verifies
/// the three compression inequalities before returning. When every
/// near-maximum state is blocked by fixed points, the error lists the
/// obstructions.
pub fn hprop_compress<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    c: &CrossedElement<S, G::Elem>,
    eps: f64,
) -> Result<Compression<S>, CompressError> {
    if eps <= 0.0 {
        return Err(CompressError::Core(PdsxError::Semantic(
            "ε must be positive".into(),
        )));
    }
    sys.validate_element(c)?;
    let n = sys.states();
    let identity = sys.group.identity();
    let a_e = expectation(sys, c);
    let norm_ae = sup_norm(&a_e);
    let region: Vec<usize> = (0..n)
        .filter(|&x| a_e[x].abs_sq_f64().sqrt() > norm_ae - eps)
        .collect();
    let off_support: Vec<&G::Elem> = c.terms.keys().filter(|t| **t != identity).collect();
    let t_count = c.terms.len().max(1);

    // candidate points: near-maximum states, best diagonal value first
    let mut candidates = region.clone();
    candidates.sort_by(|&x, &y| {
        a_e[y]
            .abs_sq_f64()
            .partial_cmp(&a_e[x].abs_sq_f64())
            .unwrap()
            .then(x.cmp(&y))
    });
    let mut chosen = None;
    for &cand in &candidates {
        let blocked = off_support.iter().any(|t| {
            sys.fixed_states(t)
                .map(|fs| fs.contains(&cand))
                .unwrap_or(true)
        });
        if !blocked {
            chosen = Some(cand);
            break;
        }
    }
    let Some(x0) = chosen else {
        let obstructions = off_support
            .iter()
            .map(|t| {
                let fixed = sys.fixed_states(t).unwrap_or_default();
                Obstruction {
                    element: sys.group.render(t),
                    fixed_states_in_region: region
                        .iter()
                        .copied()
                        .filter(|x| fixed.contains(x))
                        .collect(),
                }
            })
            .collect();
        return Err(CompressError::NoFreePoint { obstructions });
    };

    // h is the pointwise product of the one-term localizers; all are
    // indicators of {x0}, hence so is h
    let mut h = indicator::<S>(n, x0);
    let term_eps = eps / t_count as f64;
    for t in &off_support {
        let f = c.coefficient(t, n);
        let h_t = hlemma_h(sys, t, &f, x0, term_eps)?;
        h = h.iter().zip(&h_t).map(|(a, b)| a.mul(b)).collect();
    }

    // verification of the three inequalities
    let h_ae_h: Vec<S> = (0..n).map(|x| h[x].mul(&a_e[x]).mul(&h[x])).collect();
    let diagonal_lower = sup_norm(&h_ae_h);
    if diagonal_lower < norm_ae - eps {
        return Err(CompressError::Core(PdsxError::Semantic(format!(
            "compression lost the diagonal: {diagonal_lower} < {norm_ae} - {eps}"
        ))));
    }
    let mut off_diagonal_sum = 0.0;
    for t in &off_support {
        let f = c.coefficient(t, n);
        off_diagonal_sum += compressed_term_sup(sys, t, &f, &h)?;
    }
    if off_diagonal_sum > eps {
        return Err(CompressError::Core(PdsxError::Semantic(format!(
            "compression failed its off-diagonal bound: {off_diagonal_sum} > {eps}"
        ))));
    }
    // the same bound through the regular-type representation
    let h_elem = CrossedElement::single(identity.clone(), h.clone());
    let hch = multiply(sys, &multiply(sys, &h_elem, c)?, &h_elem)?;
    let h_aeh_elem = CrossedElement::single(identity.clone(), h_ae_h);
    let off = hch.sub(&h_aeh_elem);
    let off_diagonal_norm_op = element_norm_op(sys, &off)?;
    if off_diagonal_norm_op > eps + 1e-7 {
        return Err(CompressError::Core(PdsxError::Semantic(format!(
            "representation norm exceeds the bound: {off_diagonal_norm_op} > {eps}"
        ))));
    }
    Ok(Compression {
        h,
        x0,
        diagonal_lower,
        off_diagonal_sum,
        off_diagonal_norm_op,
    })
}

/// Dimension of the partial group algebra of a finite group: the sum
/// over group elements t of the number of identity-containing subsets
/// that contain t.
pub fn partial_group_algebra_dim(
    group: &FiniteGroup,
    limits: &Limits,
) -> Result<u64, PdsxError> {
    let g = group.order();
    if g > limits.max_group_order {
        return Err(PdsxError::GuardExceeded(format!(
            "group of order {g} exceeds the cap of {}",
            limits.max_group_order
        )));
    }
    if g == 1 {
        return Ok(1);
    }
    Ok((1u64 << (g - 1)) + (g as u64 - 1) * (1u64 << (g - 2)))
}

/// Parses { "terms": { "t": { "state": entry, ... } } } with exact
/// (string) entries.
pub fn element_from_json_exact<G: PatternGroup>(
    sys: &FiniteSystem<G>,
    v: &Value,
) -> Result<CrossedElement<GaussRational, G::Elem>, PdsxError> {
    element_from_json(sys, v, |entry| match entry {
        Value::String(s) => GaussRational::parse(s),
        other => Err(PdsxError::Parse(format!(
            "exact coefficients must be strings, got {other}"
        ))),
    })
}

/// Parses the same shape with floating `[re, im]` entries.
pub fn element_from_json_float<G: PatternGroup>(
    sys: &FiniteSystem<G>,
    v: &Value,
) -> Result<CrossedElement<Complex64, G::Elem>, PdsxError> {
    element_from_json(sys, v, |entry| match entry {
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| PdsxError::Parse("bad coefficient".into()))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| PdsxError::Parse("bad coefficient".into()))?;
            Ok(Complex64::new(re, im))
        }
        Value::Number(x) => Ok(Complex64::new(
            x.as_f64()
                .ok_or_else(|| PdsxError::Parse("bad coefficient".into()))?,
            0.0,
        )),
        other => Err(PdsxError::Parse(format!(
            "floating coefficients must be numbers or [re, im], got {other}"
        ))),
    })
}

/// True when every coefficient entry in the JSON is an exact string.
pub fn element_json_is_exact(v: &Value) -> bool {
    v.get("terms")
        .and_then(Value::as_object)
        .map(|terms| {
            terms.values().all(|coeffs| {
                coeffs
                    .as_object()
                    .map(|m| m.values().all(Value::is_string))
                    .unwrap_or(false)
            })
        })
        .unwrap_or(false)
}

fn element_from_json<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    v: &Value,
    parse_entry: impl Fn(&Value) -> Result<S, PdsxError>,
) -> Result<CrossedElement<S, G::Elem>, PdsxError> {
    let terms_json = v
        .get("terms")
        .and_then(Value::as_object)
        .ok_or_else(|| PdsxError::Parse("element needs a `terms` object".into()))?;
    let mut terms = BTreeMap::new();
    for (key, coeffs) in terms_json {
        let t = sys.group().parse_elem(key)?;
        let coeffs = coeffs
            .as_object()
            .ok_or_else(|| PdsxError::Parse("coefficients must be an object".into()))?;
        let mut c = vec![S::zero(); sys.states()];
        for (state, entry) in coeffs {
            let x = sys
                .state_names()
                .iter()
                .position(|n| n == state)
                .ok_or_else(|| PdsxError::Parse(format!("unknown state `{state}`")))?;
            c[x] = parse_entry(entry)?;
        }
        terms.insert(t, c);
    }
    let elem = CrossedElement::from_terms(terms);
    sys.validate_element(&elem)?;
    Ok(elem)
}

/// Renders an element back to the JSON shape, exact entries as strings.
pub fn element_to_json_exact<G: PatternGroup>(
    sys: &FiniteSystem<G>,
    p: &CrossedElement<GaussRational, G::Elem>,
) -> Value {
    let terms: serde_json::Map<String, Value> = p
        .terms
        .iter()
        .map(|(t, c)| {
            let coeffs: serde_json::Map<String, Value> = c
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(x, v)| (sys.state_names()[x].clone(), Value::String(v.render())))
                .collect();
            (sys.group().render(t), Value::Object(coeffs))
        })
        .collect();
    json!({ "terms": terms })
}
