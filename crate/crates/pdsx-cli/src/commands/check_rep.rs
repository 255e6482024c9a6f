use std::collections::BTreeMap;

use pdsx_core::ck::ck_relation_polys;
use pdsx_core::matrix::CMatrix;
use pdsx_core::pisom::{
    check_ck_family, check_nica_relations, check_partial_rep, check_relations, default_tol,
    PartialRep, Report,
};
use pdsx_core::qlattice::{IsometricFamily, QuasiLattice};
use pdsx_core::scalar::GaussRational;
use pdsx_core::spectrum::RelationPoly;
use pdsx_core::words::{ball, ReducedWord};
use pdsx_core::PdsxError;
use serde_json::{json, Value};

pub fn run(path: &str, relations: &str, tol: Option<f64>) -> Result<(), PdsxError> {
    let rep = PartialRep::from_json(&crate::parse_json(&crate::read_input(path)?)?)?;
    let tol = match tol {
        Some(t) if t < 0.0 => {
            return Err(PdsxError::Semantic("tolerance must be nonnegative".into()))
        }
        Some(0.0) if !rep.is_exact() => {
            return Err(PdsxError::Semantic(
                "tolerance 0 requires exact (string) matrix entries".into(),
            ));
        }
        Some(t) => t,
        None => {
            if rep.is_exact() {
                0.0
            } else {
                default_tol(rep.dim())
            }
        }
    };

    let (kind, source) = relations
        .split_once(':')
        .ok_or_else(|| PdsxError::Parse("relations must look like kind:source".into()))?;
    let report = match kind {
        "ck" => check_against_ck(&rep, source, tol)?,
        "nica" => check_against_nica(&rep, source, tol)?,
        "file" => check_against_polys(&rep, source, tol)?,
        other => {
            return Err(PdsxError::Parse(format!(
                "unknown relation kind `{other}` (expected ck, nica or file)"
            )))
        }
    };

    let checks: Vec<Value> = report
        .entries
        .iter()
        .map(|e| json!({ "check": e.check, "residual": e.residual, "ok": e.ok }))
        .collect();
    super::print_report(&json!({
        "representation": path,
        "relations": relations,
        "tol": tol,
        "exact": rep.is_exact(),
        "passed": report.passed(),
        "checks": checks,
    }));
    Ok(())
}

fn axiom_sample(rank: u32) -> Vec<(ReducedWord, ReducedWord)> {
    let b = ball(rank, 1);
    b.iter()
        .flat_map(|s| b.iter().map(move |t| (s.clone(), t.clone())))
        .collect()
}

fn check_against_ck(rep: &PartialRep, source: &str, tol: f64) -> Result<Report, PdsxError> {
    let a = super::load_matrix(source)?;
    if a.size() as u32 != rep.rank() {
        return Err(PdsxError::Dimension(format!(
            "matrix size {} differs from representation rank {}",
            a.size(),
            rep.rank()
        )));
    }
    let family: Vec<CMatrix> = (1..=rep.rank())
        .map(|i| rep.image(&ReducedWord::generator(rep.rank(), i)?))
        .collect::<Result<_, _>>()?;
    let mut report = check_ck_family(&family, &a, tol)?;
    let axioms = check_partial_rep(rep, &axiom_sample(rep.rank()), tol)?;
    report.entries.extend(axioms.entries);
    let relations = check_relations(rep, &ck_relation_polys(&a, 2), tol)?;
    report.entries.extend(relations.entries);
    Ok(report)
}

fn check_against_nica(rep: &PartialRep, source: &str, tol: f64) -> Result<Report, PdsxError> {
    match super::qlattice::parse_instance(source)? {
        super::qlattice::Instance::Z(group) => {
            if group.k as u32 != rep.rank() {
                return Err(PdsxError::Dimension(format!(
                    "instance has {} generators but the representation has rank {}",
                    group.k,
                    rep.rank()
                )));
            }
            let gens: Vec<CMatrix> = (1..=rep.rank())
                .map(|i| rep.image(&ReducedWord::generator(rep.rank(), i)?))
                .collect::<Result<_, _>>()?;
            // V on ℕ^k by multiplying generator images; well-definedness
            // (commutation) is checked below as part of the family checks
            let positives: Vec<Vec<i64>> = group
                .ball_elems(2)
                .into_iter()
                .filter(|p| QuasiLattice::in_positive(&group, p))
                .collect();
            let mut values = BTreeMap::new();
            for p in &positives {
                let mut m = identity_like(&gens[0]);
                for (i, &count) in p.iter().enumerate() {
                    for _ in 0..count {
                        m = m.mul(&gens[i])?;
                    }
                }
                values.insert(p.clone(), m);
            }
            let mut report = Report::default();
            for i in 0..gens.len() {
                for j in (i + 1)..gens.len() {
                    let comm = gens[i].mul(&gens[j])?.sub(&gens[j].mul(&gens[i])?)?;
                    report.entries.push(pdsx_core::pisom::CheckEntry {
                        check: format!("V(g{}) V(g{}) = V(g{}) V(g{})", i + 1, j + 1, j + 1, i + 1),
                        residual: comm.norm_max(),
                        ok: comm.vanishes(tol),
                    });
                }
            }
            let family = IsometricFamily::new(group.clone(), values)?;
            let pairs = sample_pairs(&group.ball_elems(1));
            let nica = check_nica_relations(&family, &positives, &pairs, tol)?;
            absorb_nica(&mut report, nica);
            Ok(report)
        }
        super::qlattice::Instance::F(group) => {
            if group.rank != rep.rank() {
                return Err(PdsxError::Dimension(format!(
                    "instance has rank {} but the representation has rank {}",
                    group.rank,
                    rep.rank()
                )));
            }
            let positives: Vec<ReducedWord> = ball(group.rank, 2)
                .into_iter()
                .filter(|w| w.is_positive())
                .collect();
            let mut values = BTreeMap::new();
            for p in &positives {
                values.insert(p.clone(), rep.image(p)?);
            }
            let family = IsometricFamily::new(group.clone(), values)?;
            let pairs = sample_pairs(&group.ball_elems(1));
            let nica = check_nica_relations(&family, &positives, &pairs, tol)?;
            let mut report = Report::default();
            absorb_nica(&mut report, nica);
            Ok(report)
        }
    }
}

fn identity_like(m: &CMatrix) -> CMatrix {
    m.identity_like()
}

fn sample_pairs<E: Clone>(elems: &[E]) -> Vec<(E, E)> {
    elems
        .iter()
        .flat_map(|x| elems.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

fn absorb_nica(report: &mut Report, nica: pdsx_core::pisom::NicaReport) {
    for check in nica.checks {
        report.entries.push(pdsx_core::pisom::CheckEntry {
            check: if check.skipped_entries > 0 {
                format!("{} ({} boundary entries skipped)", check.label, check.skipped_entries)
            } else {
                check.label
            },
            residual: check.residual,
            ok: check.ok,
        });
    }
}

fn check_against_polys(rep: &PartialRep, source: &str, tol: f64) -> Result<Report, PdsxError> {
    let polys = parse_polys(&crate::parse_json(&crate::read_input(source)?)?, rep.rank())?;
    check_relations(rep, &polys, tol)
}

/// Parses a relation-poly file: an array of { "terms": [{ "coeff", "factors" }] }.
pub fn parse_polys(v: &Value, rank: u32) -> Result<Vec<RelationPoly<ReducedWord>>, PdsxError> {
    let arr = v
        .as_array()
        .ok_or_else(|| PdsxError::Parse("relation file must be an array of polys".into()))?;
    arr.iter()
        .map(|poly| {
            let terms = poly
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| PdsxError::Parse("poly needs a `terms` array".into()))?
                .iter()
                .map(|term| {
                    let coeff = match term.get("coeff") {
                        None => GaussRational::from_int(1),
                        Some(Value::String(s)) => GaussRational::parse(s)?,
                        Some(Value::Number(n)) => {
                            let as_int = n.as_i64().ok_or_else(|| {
                                PdsxError::Parse(
                                    "numeric coefficients must be integers; use p/q strings otherwise"
                                        .into(),
                                )
                            })?;
                            GaussRational::from_int(as_int)
                        }
                        Some(other) => {
                            return Err(PdsxError::Parse(format!(
                                "bad coefficient {other}"
                            )))
                        }
                    };
                    let factors = term
                        .get("factors")
                        .and_then(Value::as_array)
                        .ok_or_else(|| PdsxError::Parse("term needs a `factors` array".into()))?
                        .iter()
                        .map(|f| {
                            f.as_str()
                                .ok_or_else(|| PdsxError::Parse("factor must be a word string".into()))
                                .and_then(|s| ReducedWord::parse(rank, s))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((coeff, factors))
                })
                .collect::<Result<Vec<_>, PdsxError>>()?;
            Ok(RelationPoly::new(terms))
        })
        .collect()
}
