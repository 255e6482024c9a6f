use std::time::Instant;

use pdsx_core::ck::{
    condition_i, is_topologically_free, simplicity_verdict, ConditionI, SimplicityVerdict,
    TopologicalFreeness,
};
use pdsx_core::PdsxError;
use serde_json::{json, Value};

pub fn run(path: &str, depth: usize, dot: Option<&str>, timing: bool) -> Result<(), PdsxError> {
    let start = Instant::now();
    let matrix = super::load_matrix(path)?;

    let cond = condition_i(&matrix);
    let cond_json = match &cond {
        ConditionI::Holds => json!({ "holds": true }),
        ConditionI::Fails { witness } => json!({
            "holds": false,
            "witness": witness.to_string(),
        }),
    };

    let free = is_topologically_free(&matrix);
    let free_json = match &free {
        TopologicalFreeness::Holds => json!({ "holds": true }),
        TopologicalFreeness::Fails {
            circuit,
            fixing_word,
            path,
        } => json!({
            "holds": false,
            "witness": {
                "terminalCircuit": circuit.to_string(),
                "fixingWord": fixing_word.render(),
                "fixedPath": path.to_string(),
            },
        }),
    };

    let simplicity = simplicity_verdict(&matrix, depth);
    let simplicity_json = match &simplicity {
        SimplicityVerdict::Simple { reason } => json!({
            "verdict": "simple",
            "reason": reason,
        }),
        SimplicityVerdict::NotSimple { reason, witness } => json!({
            "verdict": "not-simple",
            "reason": reason,
            "witness": witness.iter().map(|c| c.prefix.to_string()).collect::<Vec<_>>(),
        }),
        SimplicityVerdict::Undetermined { reason } => json!({
            "verdict": "undetermined",
            "reason": reason,
        }),
    };

    let mut report = json!({
        "input": matrix.to_json(),
        "conditionI": cond_json,
        "topologicallyFree": free_json,
        "simplicity": simplicity_json,
    });
    if timing {
        report["timingMs"] = Value::from(start.elapsed().as_secs_f64() * 1e3);
    }
    super::print_report(&report);

    if let Some(dot_path) = dot {
        std::fs::write(dot_path, matrix.to_dot())
            .map_err(|e| PdsxError::Semantic(format!("cannot write {dot_path}: {e}")))?;
        eprintln!("wrote digraph to {dot_path}");
    }
    Ok(())
}
