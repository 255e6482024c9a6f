//! Finite-dimensional partial isometries and partial representations:
//! verifying the defining axioms, relation sets, Cuntz-Krieger families
//! and Nica covariance on explicit matrices.
//!
//! Matrices come in an exact Gaussian-rational mode, where every verdict
//! is a tolerance-free equality, and a floating mode with an explicit
//! tolerance. The default tolerance scales with the dimension.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::ck::CkMatrix;
use crate::matrix::CMatrix;
use crate::qlattice::{NicaRep, QuasiLattice, UpperBound};
use crate::spectrum::RelationPoly;
use crate::words::ReducedWord;
use crate::PdsxError;

/// Default tolerance for floating-mode reports: 1e-9 scaled by dimension.
pub fn default_tol(dim: usize) -> f64 {
    1e-9 * dim as f64
}

/// True when ‖M M* M − M‖_max ≤ tol (exactly zero in exact mode with
/// tol = 0).
pub fn is_partial_isometry(m: &CMatrix, tol: f64) -> Result<bool, PdsxError> {
    let residual = m.mul(&m.adjoint())?.mul(m)?.sub(m)?;
    Ok(residual.vanishes(tol))
}

/// How word images are produced: generated from generator images by
/// semisaturation, or read from an explicit word table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepMode {
    Semisaturated,
    ExplicitTable,
}

/// A finite assignment of square matrices to free-group elements.
pub struct PartialRep {
    rank: u32,
    dim: usize,
    mode: RepMode,
    gen_images: BTreeMap<u32, CMatrix>,
    table: BTreeMap<ReducedWord, CMatrix>,
    cache: Mutex<BTreeMap<ReducedWord, CMatrix>>,
}

impl Clone for PartialRep {
    fn clone(&self) -> Self {
        PartialRep {
            rank: self.rank,
            dim: self.dim,
            mode: self.mode.clone(),
            gen_images: self.gen_images.clone(),
            table: self.table.clone(),
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl PartialRep {
    /// The semisaturated representation generated by the given generator
    /// images (one per generator, equal dimensions, one scalar mode).
    pub fn semisaturated(
        rank: u32,
        gen_images: BTreeMap<u32, CMatrix>,
    ) -> Result<Self, PdsxError> {
        if gen_images.len() != rank as usize
            || (1..=rank).any(|i| !gen_images.contains_key(&i))
        {
            return Err(PdsxError::Semantic(format!(
                "need exactly the generator images g1..g{rank}"
            )));
        }
        let dim = check_uniform(gen_images.values())?;
        Ok(PartialRep {
            rank,
            dim,
            mode: RepMode::Semisaturated,
            gen_images,
            table: BTreeMap::new(),
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    /// A representation given by an explicit word table. Images of words
    /// absent from the table are derived only through u(t⁻¹) = u(t)*;
    /// anything else is an error.
    pub fn explicit(
        rank: u32,
        table: BTreeMap<ReducedWord, CMatrix>,
    ) -> Result<Self, PdsxError> {
        if table.keys().any(|w| w.rank() != rank) {
            return Err(PdsxError::Semantic("table word with wrong rank".into()));
        }
        let dim = check_uniform(table.values())?;
        Ok(PartialRep {
            rank,
            dim,
            mode: RepMode::ExplicitTable,
            gen_images: BTreeMap::new(),
            table,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> &RepMode {
        &self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.gen_images
            .values()
            .chain(self.table.values())
            .next()
            .map(CMatrix::is_exact)
            .unwrap_or(true)
    }

    fn identity(&self) -> CMatrix {
        if self.is_exact() {
            CMatrix::identity_exact(self.dim)
        } else {
            CMatrix::identity_float(self.dim)
        }
    }

    /// The image of a word: the ordered product of generator images in
    /// semisaturated mode (a negative letter contributes the adjoint), a
    /// table lookup otherwise.
    pub fn image(&self, t: &ReducedWord) -> Result<CMatrix, PdsxError> {
        if t.rank() != self.rank {
            return Err(PdsxError::Semantic("word rank differs from representation".into()));
        }
        if t.is_empty() {
            return Ok(self.identity());
        }
        match self.mode {
            RepMode::Semisaturated => self.extend(t),
            RepMode::ExplicitTable => {
                if let Some(m) = self.table.get(t) {
                    return Ok(m.clone());
                }
                if let Some(m) = self.table.get(&t.inverse()) {
                    return Ok(m.adjoint());
                }
                Err(PdsxError::Semantic(format!(
                    "no image for {} in the explicit table",
                    t.render()
                )))
            }
        }
    }

    /// Semisaturated extension along the reduced spelling, with caching.
    pub fn extend(&self, t: &ReducedWord) -> Result<CMatrix, PdsxError> {
        if self.mode != RepMode::Semisaturated {
            return Err(PdsxError::Semantic(
                "word extension requires semisaturated mode".into(),
            ));
        }
        if t.is_empty() {
            return Ok(self.identity());
        }
        if let Some(hit) = self.cache.lock().unwrap().get(t) {
            return Ok(hit.clone());
        }
        let mut acc = self.identity();
        for &x in t.letters() {
            let g = x.unsigned_abs();
            let img = &self.gen_images[&g];
            let factor = if x > 0 { img.clone() } else { img.adjoint() };
            acc = acc.mul(&factor)?;
        }
        self.cache
            .lock()
            .unwrap()
            .insert(t.clone(), acc.clone());
        Ok(acc)
    }

    /// The range projection e(t) = u_t u_t*.
    pub fn range_projection(&self, t: &ReducedWord) -> Result<CMatrix, PdsxError> {
        let u = self.image(t)?;
        u.mul(&u.adjoint())
    }

    /// JSON schema: { "rank", "dim", "mode", "generators" | "table" }.
    /// Exact entries are strings `p/q+r/s i`, floating ones `[re, im]`.
    pub fn from_json(v: &Value) -> Result<Self, PdsxError> {
        let rank = v
            .get("rank")
            .and_then(Value::as_u64)
            .ok_or_else(|| PdsxError::Parse("representation needs numeric `rank`".into()))?
            as u32;
        let declared_dim = v.get("dim").and_then(Value::as_u64).map(|d| d as usize);
        let mode = v
            .get("mode")
            .and_then(Value::as_str)
            .unwrap_or("semisaturated");
        let rep = match mode {
            "semisaturated" => {
                let gens = v
                    .get("generators")
                    .and_then(Value::as_object)
                    .ok_or_else(|| {
                        PdsxError::Parse("semisaturated mode needs a `generators` object".into())
                    })?;
                let mut images = BTreeMap::new();
                for (name, rows) in gens {
                    let idx: u32 = name
                        .strip_prefix('g')
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| PdsxError::Parse(format!("bad generator key `{name}`")))?;
                    images.insert(idx, CMatrix::from_json_rows(rows)?);
                }
                Self::semisaturated(rank, images)?
            }
            "table" => {
                let entries = v
                    .get("table")
                    .and_then(Value::as_object)
                    .ok_or_else(|| PdsxError::Parse("table mode needs a `table` object".into()))?;
                let mut table = BTreeMap::new();
                for (name, rows) in entries {
                    let word = ReducedWord::parse(rank, name)?;
                    table.insert(word, CMatrix::from_json_rows(rows)?);
                }
                Self::explicit(rank, table)?
            }
            other => {
                return Err(PdsxError::Parse(format!(
                    "unknown mode `{other}` (expected `semisaturated` or `table`)"
                )))
            }
        };
        if let Some(d) = declared_dim {
            if d != rep.dim {
                return Err(PdsxError::Semantic(format!(
                    "declared dim {d} but matrices have dim {}",
                    rep.dim
                )));
            }
        }
        Ok(rep)
    }

    pub fn to_json(&self) -> Value {
        match self.mode {
            RepMode::Semisaturated => json!({
                "rank": self.rank,
                "dim": self.dim,
                "mode": "semisaturated",
                "generators": self
                    .gen_images
                    .iter()
                    .map(|(i, m)| (format!("g{i}"), m.to_json()))
                    .collect::<serde_json::Map<_, _>>(),
            }),
            RepMode::ExplicitTable => json!({
                "rank": self.rank,
                "dim": self.dim,
                "mode": "table",
                "table": self
                    .table
                    .iter()
                    .map(|(w, m)| (w.render(), m.to_json()))
                    .collect::<serde_json::Map<_, _>>(),
            }),
        }
    }
}

fn check_uniform<'a>(
    mut matrices: impl Iterator<Item = &'a CMatrix>,
) -> Result<usize, PdsxError> {
    let first = matrices
        .next()
        .ok_or_else(|| PdsxError::Semantic("representation needs at least one matrix".into()))?;
    let dim = first.dim();
    let exact = first.is_exact();
    for m in matrices {
        if m.dim() != dim {
            return Err(PdsxError::Dimension(format!(
                "image dimensions differ: {} vs {dim}",
                m.dim()
            )));
        }
        if m.is_exact() != exact {
            return Err(PdsxError::MixedMode);
        }
    }
    Ok(dim)
}

/// One verified identity inside a report, with its residual norm.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub check: String,
    pub residual: f64,
    pub ok: bool,
}

/// Outcome of an axiom or relation verification run: the full residual
/// table.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.ok)
    }

    fn record(&mut self, check: String, residual: &CMatrix, tol: f64) {
        self.entries.push(CheckEntry {
            check,
            residual: residual.norm_max(),
            ok: residual.vanishes(tol),
        });
    }
}

/// Verifies the partial-representation axioms on sampled word pairs:
/// u(e) = 1, u(t⁻¹) = u(t)* for every sampled word, and
/// u(s) u(t) u(t⁻¹) = u(st) u(t⁻¹) for every sampled pair.
pub fn check_partial_rep(
    rep: &PartialRep,
    sample: &[(ReducedWord, ReducedWord)],
    tol: f64,
) -> Result<Report, PdsxError> {
    let mut report = Report::default();
    let identity = if rep.is_exact() {
        CMatrix::identity_exact(rep.dim())
    } else {
        CMatrix::identity_float(rep.dim())
    };
    let e = ReducedWord::identity(rep.rank());
    report.record("u(e) = 1".into(), &rep.image(&e)?.sub(&identity)?, tol);

    let mut words: Vec<ReducedWord> = Vec::new();
    for (s, t) in sample {
        for w in [s, t] {
            if !words.contains(w) {
                words.push(w.clone());
            }
        }
    }
    for t in &words {
        let residual = rep.image(&t.inverse())?.sub(&rep.image(t)?.adjoint())?;
        report.record(format!("u({}⁻¹) = u({})*", t.render(), t.render()), &residual, tol);
    }
    for (s, t) in sample {
        let ut = rep.image(t)?;
        let ut_inv = rep.image(&t.inverse())?;
        let left = rep.image(s)?.mul(&ut)?.mul(&ut_inv)?;
        let st = s.concat(t)?;
        let right = rep.image(&st)?.mul(&ut_inv)?;
        report.record(
            format!("u({s}) u({t}) u({t}⁻¹) = u({st}) u({t}⁻¹)",
                s = s.render(), t = t.render(), st = st.render()),
            &left.sub(&right)?,
            tol,
        );
    }
    Ok(report)
}

/// Evaluates each relation polynomial with e(t) replaced by the range
/// projection u_t u_t*; all evaluations must vanish within tol.
pub fn check_relations(
    rep: &PartialRep,
    relations: &[RelationPoly<ReducedWord>],
    tol: f64,
) -> Result<Report, PdsxError> {
    let mut report = Report::default();
    for (k, f) in relations.iter().enumerate() {
        let mut total = if rep.is_exact() {
            CMatrix::Exact(crate::matrix::Matrix::zero(rep.dim()))
        } else {
            CMatrix::Float(crate::matrix::Matrix::zero(rep.dim()))
        };
        for (coeff, factors) in f.terms() {
            let mut prod = rep.image(&ReducedWord::identity(rep.rank()))?;
            for t in factors {
                prod = prod.mul(&rep.range_projection(t)?)?;
            }
            total = total.add(&prod.scale_scalar(coeff))?;
        }
        report.record(format!("relation #{k}"), &total, tol);
    }
    Ok(report)
}

/// Verifies a Cuntz-Krieger family: each s_i a partial isometry,
/// Σ_j s_j s_j* = 1, and Σ_j a_{ij} s_j s_j* = s_i* s_i per row.
pub fn check_ck_family(
    family: &[CMatrix],
    a: &CkMatrix,
    tol: f64,
) -> Result<Report, PdsxError> {
    if family.len() != a.size() {
        return Err(PdsxError::Dimension(format!(
            "family of {} partial isometries for an n = {} matrix",
            family.len(),
            a.size()
        )));
    }
    let dim = check_uniform(family.iter())?;
    let exact = family[0].is_exact();
    let identity = if exact {
        CMatrix::identity_exact(dim)
    } else {
        CMatrix::identity_float(dim)
    };
    let mut report = Report::default();
    for (i, s) in family.iter().enumerate() {
        let residual = s.mul(&s.adjoint())?.mul(s)?.sub(s)?;
        report.record(format!("s{} is a partial isometry", i + 1), &residual, tol);
    }
    let mut unit = identity.zero_like();
    for s in family {
        unit = unit.add(&s.mul(&s.adjoint())?)?;
    }
    report.record("Σ_j s_j s_j* = 1".into(), &unit.sub(&identity)?, tol);
    for i in 1..=a.size() as u32 {
        let mut lhs = identity.zero_like();
        for j in 1..=a.size() as u32 {
            if a.entry(i, j) {
                let s = &family[(j - 1) as usize];
                lhs = lhs.add(&s.mul(&s.adjoint())?)?;
            }
        }
        let s_i = &family[(i - 1) as usize];
        let rhs = s_i.adjoint().mul(s_i)?;
        report.record(
            format!("Σ_j a_{{{i}j}} s_j s_j* = s{i}* s{i}"),
            &lhs.sub(&rhs)?,
            tol,
        );
    }
    Ok(report)
}

/// One Nica-relation check: pass/fail on the trusted entries plus a count
/// of entries skipped as boundary artifacts of a finite corner.
#[derive(Clone, Debug)]
pub struct NicaCheck {
    pub label: String,
    pub residual: f64,
    pub skipped_entries: usize,
    pub ok: bool,
}

/// Report of the isometry and covariance relations over a quasi-lattice
/// ordered group.
#[derive(Clone, Debug, Default)]
pub struct NicaReport {
    pub checks: Vec<NicaCheck>,
}

impl NicaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn skipped_total(&self) -> usize {
        self.checks.iter().map(|c| c.skipped_entries).sum()
    }
}

fn masked_record(
    report: &mut NicaReport,
    label: String,
    residual: &CMatrix,
    mask: &[bool],
    tol: f64,
) {
    let dim = residual.dim();
    let mut worst = 0.0f64;
    let mut skipped = 0usize;
    let mut exact_ok = true;
    let float = residual.as_float();
    for p in 0..dim {
        for q in 0..dim {
            if mask[p] && mask[q] {
                let mag = float.entry(p, q).norm();
                worst = worst.max(mag);
                if mag != 0.0 {
                    exact_ok = false;
                }
            } else {
                skipped += 1;
            }
        }
    }
    let ok = if tol == 0.0 && residual.is_exact() {
        exact_ok
    } else {
        worst <= tol
    };
    report.checks.push(NicaCheck {
        label,
        residual: worst,
        skipped_entries: skipped,
        ok,
    });
}

/// Checks the isometry relation u_t* u_t = 1 on sampled positive elements
/// and the covariance relation e(x) e(y) = e(x ∨ y) on sampled pairs,
/// with u_∞ = 0. Entries a finite corner cannot decide are skipped and
/// counted, not failed.
pub fn check_nica_relations<Q: QuasiLattice, R: NicaRep<Q>>(
    rep: &R,
    positives: &[Q::Elem],
    pairs: &[(Q::Elem, Q::Elem)],
    tol: f64,
) -> Result<NicaReport, PdsxError> {
    let group = rep.group();
    let dim = rep.dim();
    let mut report = NicaReport::default();
    let exact_identity = |probe: &CMatrix| {
        if probe.is_exact() {
            CMatrix::identity_exact(dim)
        } else {
            CMatrix::identity_float(dim)
        }
    };
    for t in positives {
        if !group.in_positive(t) {
            return Err(PdsxError::Semantic(format!(
                "{} is not in the positive cone",
                group.render_elem(t)
            )));
        }
        let u = rep.image(t)?;
        let residual = u.adjoint().mul(&u)?.sub(&exact_identity(&u))?;
        let mask = rep.trusted_isometry_states(t);
        masked_record(
            &mut report,
            format!("u({t})* u({t}) = 1", t = group.render_elem(t)),
            &residual,
            &mask,
            tol,
        );
    }
    for (x, y) in pairs {
        let ex = rep.range_projection(x)?;
        let ey = rep.range_projection(y)?;
        let lhs = ex.mul(&ey)?;
        let (rhs, lub_label, lub_mask) = match group.lub(x, y) {
            UpperBound::Finite(z) => {
                let mask = rep.trusted_projection_states(&z);
                (rep.range_projection(&z)?, group.render_elem(&z), mask)
            }
            UpperBound::Infinity => (lhs.zero_like(), "∞".to_string(), vec![true; dim]),
        };
        let mut mask = rep.trusted_projection_states(x);
        let my = rep.trusted_projection_states(y);
        for p in 0..dim {
            mask[p] = mask[p] && my[p] && lub_mask[p];
        }
        masked_record(
            &mut report,
            format!(
                "e({}) e({}) = e({})",
                group.render_elem(x),
                group.render_elem(y),
                lub_label
            ),
            &lhs.sub(&rhs)?,
            &mask,
            tol,
        );
    }
    Ok(report)
}

/// True when the ordered product Π_{t∈F} (1 − e(t)) has norm above tol.
/// The factors are sorted shortlex so the floating computation is
/// deterministic.
pub fn diagonal_faithfulness_witness(
    rep: &PartialRep,
    words: &[ReducedWord],
    tol: f64,
) -> Result<bool, PdsxError> {
    if words.iter().any(|t| t.is_empty() || !t.is_positive()) {
        return Err(PdsxError::Semantic(
            "witness words must be nontrivial positive words".into(),
        ));
    }
    let mut sorted: Vec<ReducedWord> = words.to_vec();
    sorted.sort();
    sorted.dedup();
    let identity = if rep.is_exact() {
        CMatrix::identity_exact(rep.dim())
    } else {
        CMatrix::identity_float(rep.dim())
    };
    let mut prod = identity.clone();
    for t in &sorted {
        let factor = identity.sub(&rep.range_projection(t)?)?;
        prod = prod.mul(&factor)?;
    }
    Ok(!prod.vanishes(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalar::GaussRational;

    fn gr(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    fn exact(rows: Vec<Vec<i64>>) -> CMatrix {
        CMatrix::Exact(
            Matrix::from_rows(
                rows.into_iter()
                    .map(|r| r.into_iter().map(GaussRational::from_int).collect())
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn word(rank: u32, letters: &[i32]) -> ReducedWord {
        ReducedWord::reduce(rank, letters).unwrap()
    }

    #[test]
    fn partial_isometry_examples() {
        assert!(is_partial_isometry(&CMatrix::identity_exact(3), 0.0).unwrap());
        assert!(is_partial_isometry(&CMatrix::identity_exact(2).zero_like(), 0.0).unwrap());
        let half = CMatrix::Exact(Matrix::from_rows(vec![vec![gr(1, 2)]]).unwrap());
        assert!(!is_partial_isometry(&half, 0.0).unwrap());
    }

    #[test]
    fn trivial_rep_passes_axioms() {
        // rank 1, u_g = 1 on a one-dimensional space
        let mut gens = BTreeMap::new();
        gens.insert(1, CMatrix::identity_exact(1));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        let sample: Vec<_> = crate::words::ball(1, 2)
            .into_iter()
            .flat_map(|s| crate::words::ball(1, 2).into_iter().map(move |t| (s.clone(), t)))
            .collect();
        assert!(check_partial_rep(&rep, &sample, 0.0).unwrap().passed());
    }

    #[test]
    fn projection_generator_passes() {
        // u_g = diag(1, 0); semisaturated rank 1
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![1, 0], vec![0, 0]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        let sample: Vec<_> = crate::words::ball(1, 2)
            .into_iter()
            .flat_map(|s| crate::words::ball(1, 2).into_iter().map(move |t| (s.clone(), t)))
            .collect();
        assert!(check_partial_rep(&rep, &sample, 0.0).unwrap().passed());
    }

    #[test]
    fn adjoint_mismatch_fails_axiom_two() {
        // explicit table: u_g = nilpotent, u_{g⁻¹} = u_g (not the adjoint)
        let nil = exact(vec![vec![0, 1], vec![0, 0]]);
        let mut table = BTreeMap::new();
        table.insert(word(1, &[1]), nil.clone());
        table.insert(word(1, &[-1]), nil.clone());
        let rep = PartialRep::explicit(1, table).unwrap();
        let sample = vec![(word(1, &[1]), word(1, &[-1]))];
        let report = check_partial_rep(&rep, &sample, 0.0).unwrap();
        assert!(!report.passed());
        assert!(report.violations().any(|v| v.check.contains('*')));
    }

    #[test]
    fn range_projection_examples() {
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 1], vec![0, 0]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        let e_proj = rep.range_projection(&word(1, &[])).unwrap();
        assert_eq!(e_proj, CMatrix::identity_exact(2));
        let g_proj = rep.range_projection(&word(1, &[1])).unwrap();
        assert_eq!(g_proj, exact(vec![vec![1, 0], vec![0, 0]]));
        // a projection squares to itself
        assert!(g_proj.mul(&g_proj).unwrap().sub(&g_proj).unwrap().is_zero());
        assert!(g_proj.adjoint().sub(&g_proj).unwrap().is_zero());

        // a vanishing image has a vanishing range projection
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 0], vec![0, 0]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        assert!(rep.range_projection(&word(1, &[1])).unwrap().is_zero());
    }

    #[test]
    fn nica_relation_checks() {
        use crate::qlattice::{IsometricFamily, ZkNk};

        // the trivial representation on (ℤ, ℕ) passes: every u is 1 and
        // x ∨ y is the maximum
        let group = ZkNk::new(1);
        let positives: Vec<Vec<i64>> = (0..=2).map(|v| vec![v]).collect();
        let values: BTreeMap<Vec<i64>, CMatrix> = positives
            .iter()
            .map(|p| (p.clone(), CMatrix::identity_exact(1)))
            .collect();
        let family = IsometricFamily::new(group.clone(), values).unwrap();
        let pairs = vec![
            (vec![0], vec![1]),
            (vec![-1], vec![1]),
            (vec![2], vec![-2]),
        ];
        let report = check_nica_relations(&family, &positives, &pairs, 0.0).unwrap();
        assert!(report.passed());

        // a truncated shift is not an isometry: u* u ≠ 1 breaks the
        // first relation
        let shift = exact(vec![vec![0, 0], vec![1, 0]]);
        let mut values = BTreeMap::new();
        values.insert(vec![0i64], CMatrix::identity_exact(2));
        values.insert(vec![1i64], shift.clone());
        values.insert(vec![2i64], shift.mul(&shift).unwrap());
        let family = IsometricFamily::new(ZkNk::new(1), values).unwrap();
        let report = check_nica_relations(&family, &[vec![1]], &[], 0.0).unwrap();
        assert!(!report.passed());
        assert!(report.checks[0].label.contains("u(1)* u(1) = 1"));
    }

    #[test]
    fn relation_checks() {
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 1], vec![0, 0]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        // e(e) − 1 always vanishes
        let f = RelationPoly::indicator(word(1, &[])).minus(RelationPoly::constant(1));
        assert!(check_relations(&rep, &[f], 0.0).unwrap().passed());
        // e(g) alone does not vanish for u_g ≠ 0
        let f = RelationPoly::indicator(word(1, &[1]));
        assert!(!check_relations(&rep, &[f], 0.0).unwrap().passed());
    }

    #[test]
    fn ck_family_examples() {
        // A = [[1]], s = [1]: a unitary scalar passes
        let a1 = CkMatrix::new(vec![vec![1]]).unwrap();
        let fam = vec![exact(vec![vec![1]])];
        assert!(check_ck_family(&fam, &a1, 0.0).unwrap().passed());

        // A = identity 2×2 with complementary coordinate projections
        let a2 = CkMatrix::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let fam = vec![
            exact(vec![vec![1, 0], vec![0, 0]]),
            exact(vec![vec![0, 0], vec![0, 1]]),
        ];
        assert!(check_ck_family(&fam, &a2, 0.0).unwrap().passed());

        // s = [1/2] is not a partial isometry
        let fam = vec![CMatrix::Exact(Matrix::from_rows(vec![vec![gr(1, 2)]]).unwrap())];
        assert!(!check_ck_family(&fam, &a1, 0.0).unwrap().passed());
    }

    #[test]
    fn ck_family_extends_to_partial_rep() {
        // swap matrix with the exchange family on ℂ²
        let a = CkMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let fam = vec![
            exact(vec![vec![0, 1], vec![0, 0]]),
            exact(vec![vec![0, 0], vec![1, 0]]),
        ];
        assert!(check_ck_family(&fam, &a, 0.0).unwrap().passed());
        let mut gens = BTreeMap::new();
        gens.insert(1, fam[0].clone());
        gens.insert(2, fam[1].clone());
        let rep = PartialRep::semisaturated(2, gens).unwrap();
        let ball = crate::words::ball(2, 2);
        let sample: Vec<_> = ball
            .iter()
            .flat_map(|s| ball.iter().map(move |t| (s.clone(), t.clone())))
            .collect();
        assert!(check_partial_rep(&rep, &sample, 0.0).unwrap().passed());
        let polys = crate::ck::ck_relation_polys(&a, 2);
        assert!(check_relations(&rep, &polys, 0.0).unwrap().passed());
    }

    #[test]
    fn commuting_range_projections() {
        let a = CkMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let _ = a;
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 1], vec![0, 0]]));
        gens.insert(2, exact(vec![vec![0, 0], vec![1, 0]]));
        let rep = PartialRep::semisaturated(2, gens).unwrap();
        for s in crate::words::ball(2, 2) {
            for t in crate::words::ball(2, 2) {
                let ps = rep.range_projection(&s).unwrap();
                let pt = rep.range_projection(&t).unwrap();
                let comm = ps.mul(&pt).unwrap().sub(&pt.mul(&ps).unwrap()).unwrap();
                assert!(comm.is_zero(), "projections at {s} and {t} do not commute");
            }
        }
    }

    #[test]
    fn semisaturated_multiplicative_on_geodesics() {
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 1], vec![0, 0]]));
        gens.insert(2, exact(vec![vec![0, 0], vec![1, 0]]));
        let rep = PartialRep::semisaturated(2, gens).unwrap();
        for s in crate::words::ball(2, 2) {
            for t in crate::words::ball(2, 2) {
                if s.is_geodesic_product(&t).unwrap() {
                    let st = s.concat(&t).unwrap();
                    let left = rep.image(&st).unwrap();
                    let right = rep.image(&s).unwrap().mul(&rep.image(&t).unwrap()).unwrap();
                    assert!(left.sub(&right).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn faithfulness_witness_examples() {
        // u ≡ 0 on the generator: the product is 1
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        assert!(diagonal_faithfulness_witness(&rep, &[word(1, &[1])], 0.0).unwrap());

        // unitary u_g: 1 − e(g) = 0
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![1]]));
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        assert!(!diagonal_faithfulness_witness(&rep, &[word(1, &[1])], 0.0).unwrap());

        // truncated shift on ℂ³: product over {g, gg} is the projection
        // onto the first basis vector
        let shift = exact(vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
        let mut gens = BTreeMap::new();
        gens.insert(1, shift);
        let rep = PartialRep::semisaturated(1, gens).unwrap();
        assert!(diagonal_faithfulness_witness(
            &rep,
            &[word(1, &[1]), word(1, &[1, 1])],
            0.0
        )
        .unwrap());

        // rejects non-positive words
        assert!(diagonal_faithfulness_witness(&rep, &[word(1, &[-1])], 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut gens = BTreeMap::new();
        gens.insert(1, exact(vec![vec![0, 1], vec![0, 0]]));
        gens.insert(2, exact(vec![vec![0, 0], vec![1, 0]]));
        let rep = PartialRep::semisaturated(2, gens).unwrap();
        let back = PartialRep::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.rank(), 2);
        assert_eq!(back.dim(), 2);
        assert_eq!(
            back.image(&word(2, &[1, 2])).unwrap(),
            rep.image(&word(2, &[1, 2])).unwrap()
        );
    }
}
