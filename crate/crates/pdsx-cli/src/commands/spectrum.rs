use pdsx_core::ck::ck_relation_polys;
use pdsx_core::group::FreeGroup;
use pdsx_core::spectrum::{enumerate_spectrum_ball, RelationPoly};
use pdsx_core::words::ReducedWord;
use pdsx_core::{Limits, PdsxError};
use serde_json::json;

pub fn run(relations: &str, rank: u32, radius: u32, limits: &Limits) -> Result<(), PdsxError> {
    let polys: Vec<RelationPoly<ReducedWord>> = if relations == "empty" {
        Vec::new()
    } else {
        let (kind, source) = relations
            .split_once(':')
            .ok_or_else(|| PdsxError::Parse("relations must be empty, ck:…, or file:…".into()))?;
        match kind {
            "ck" => {
                let a = super::load_matrix(source)?;
                if a.size() as u32 != rank {
                    return Err(PdsxError::Dimension(format!(
                        "matrix size {} differs from rank {rank}",
                        a.size()
                    )));
                }
                ck_relation_polys(&a, radius.max(1))
            }
            "file" => super::check_rep::parse_polys(
                &crate::parse_json(&crate::read_input(source)?)?,
                rank,
            )?,
            other => {
                return Err(PdsxError::Parse(format!(
                    "unknown relation kind `{other}`"
                )))
            }
        }
    };

    let survivors = enumerate_spectrum_ball(rank, radius, &polys, limits)?;
    let group = FreeGroup::new(rank);
    let patterns: Vec<serde_json::Value> = survivors
        .iter()
        .map(|s| {
            let mut p = s.pattern.to_json(&group);
            p["skipped"] = json!(s
                .skipped
                .iter()
                .map(|sk| json!({ "at": sk.at.render(), "poly": sk.poly }))
                .collect::<Vec<_>>());
            p
        })
        .collect();
    super::print_report(&json!({
        "rank": rank,
        "radius": radius,
        "relationCount": polys.len(),
        "count": survivors.len(),
        "survivors": patterns,
    }));
    Ok(())
}
