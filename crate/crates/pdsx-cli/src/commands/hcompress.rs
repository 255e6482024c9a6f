use num_complex::Complex64;
use pdsx_core::cross::{
    element_from_json_exact, element_from_json_float, element_json_is_exact, hprop_compress,
    CompressError, FiniteSystem,
};
use pdsx_core::group::{FiniteGroup, FreeGroup, PatternGroup};
use pdsx_core::scalar::ComplexScalar;
use pdsx_core::PdsxError;
use serde_json::{json, Value};

pub fn run(system_path: &str, element_path: &str, eps: f64) -> Result<(), PdsxError> {
    let system_json = crate::parse_json(&crate::read_input(system_path)?)?;
    let element_json = crate::parse_json(&crate::read_input(element_path)?)?;
    let group_json = system_json
        .get("group")
        .ok_or_else(|| PdsxError::Parse("system needs a `group` descriptor".into()))?;
    match group_json.get("type").and_then(Value::as_str) {
        Some("finite") => {
            let table = group_json
                .get("table")
                .ok_or_else(|| PdsxError::Parse("finite group needs a `table`".into()))?;
            let group = FiniteGroup::from_json(table)?;
            let sys = FiniteSystem::from_json_with_group(group, 0, &system_json)?;
            dispatch(&sys, &element_json, eps)
        }
        Some("free") => {
            let rank = group_json
                .get("rank")
                .and_then(Value::as_u64)
                .ok_or_else(|| PdsxError::Parse("free group needs numeric `rank`".into()))?
                as u32;
            let cap = group_json
                .get("cap")
                .and_then(Value::as_u64)
                .unwrap_or(2) as u32;
            let sys = FiniteSystem::from_json_with_group(FreeGroup::new(rank), cap, &system_json)?;
            dispatch(&sys, &element_json, eps)
        }
        _ => Err(PdsxError::Parse(
            "group descriptor needs `type` of finite or free".into(),
        )),
    }
}

fn dispatch<G: PatternGroup>(
    sys: &FiniteSystem<G>,
    element_json: &Value,
    eps: f64,
) -> Result<(), PdsxError> {
    if element_json_is_exact(element_json) {
        let elem = element_from_json_exact(sys, element_json)?;
        let out = hprop_compress(sys, &elem, eps);
        finish(sys, out, |v| Value::String(v.render()))
    } else {
        let elem = element_from_json_float(sys, element_json)?;
        let out = hprop_compress(sys, &elem, eps);
        finish(sys, out, |v: &Complex64| json!([v.re, v.im]))
    }
}

fn finish<S: ComplexScalar, G: PatternGroup>(
    sys: &FiniteSystem<G>,
    outcome: Result<pdsx_core::cross::Compression<S>, CompressError>,
    render: impl Fn(&S) -> Value,
) -> Result<(), PdsxError> {
    match outcome {
        Ok(comp) => {
            let h: serde_json::Map<String, Value> = comp
                .h
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(x, v)| (sys.state_names()[x].clone(), render(v)))
                .collect();
            super::print_report(&json!({
                "x0": sys.state_names()[comp.x0],
                "h": h,
                "diagonalLower": comp.diagonal_lower,
                "offDiagonalSum": comp.off_diagonal_sum,
                "offDiagonalNormOp": comp.off_diagonal_norm_op,
            }));
            Ok(())
        }
        Err(CompressError::NoFreePoint { obstructions }) => {
            let detail: Vec<Value> = obstructions
                .iter()
                .map(|o| {
                    json!({
                        "element": o.element,
                        "fixedStates": o
                            .fixed_states_in_region
                            .iter()
                            .map(|&x| sys.state_names()[x].clone())
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            eprintln!(
                "obstructed: {}",
                serde_json::to_string(&detail).expect("obstructions serialize")
            );
            Err(PdsxError::Semantic(
                "no admissible compression point; see obstruction list above".into(),
            ))
        }
        Err(CompressError::Core(e)) => Err(e),
    }
}
