use clap::Subcommand;
use pdsx_core::qlattice::{principal_point, FreeQl, QuasiLattice, UpperBound, ZkNk};
use pdsx_core::{Limits, PdsxError};
use serde_json::json;

#[derive(Subcommand)]
pub enum Query {
    /// Least common upper bound of two elements in the positive cone.
    Lub { x: String, y: String },
    /// Most-efficient factorization x = σ(x) τ(x)⁻¹.
    Sigmatau { x: String },
    /// The principal hereditary directed set of a positive element,
    /// cut to a ball.
    Principal {
        t: String,
        #[arg(long, default_value_t = 3)]
        radius: u32,
    },
}

pub enum Instance {
    Z(ZkNk),
    F(FreeQl),
}

/// Accepts `ZkNk:<k>`, `FreeQL:<n>`, a JSON literal, or a JSON file.
pub fn parse_instance(spec: &str) -> Result<Instance, PdsxError> {
    if let Some(k) = spec.strip_prefix("ZkNk:") {
        let k: usize = k
            .parse()
            .map_err(|_| PdsxError::Parse(format!("bad rank in `{spec}`")))?;
        return Ok(Instance::Z(ZkNk::new(k)));
    }
    if let Some(n) = spec.strip_prefix("FreeQL:") {
        let n: u32 = n
            .parse()
            .map_err(|_| PdsxError::Parse(format!("bad rank in `{spec}`")))?;
        return Ok(Instance::F(FreeQl::new(n)));
    }
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        crate::read_input(spec)?
    };
    let v = crate::parse_json(&text)?;
    match v.get("type").and_then(serde_json::Value::as_str) {
        Some("ZkNk") => {
            let k = v
                .get("k")
                .and_then(serde_json::Value::as_u64)
                .ok_or_else(|| PdsxError::Parse("ZkNk instance needs numeric `k`".into()))?;
            Ok(Instance::Z(ZkNk::new(k as usize)))
        }
        Some("FreeQL") => {
            let n = v
                .get("n")
                .and_then(serde_json::Value::as_u64)
                .ok_or_else(|| PdsxError::Parse("FreeQL instance needs numeric `n`".into()))?;
            Ok(Instance::F(FreeQl::new(n as u32)))
        }
        _ => Err(PdsxError::Parse(
            "instance needs `type` of ZkNk or FreeQL".into(),
        )),
    }
}

pub fn run(instance: &str, query: &Query, limits: &Limits) -> Result<(), PdsxError> {
    match parse_instance(instance)? {
        Instance::Z(group) => run_on(&group, query, limits),
        Instance::F(group) => run_on(&group, query, limits),
    }
}

fn run_on<Q: QuasiLattice>(group: &Q, query: &Query, limits: &Limits) -> Result<(), PdsxError> {
    match query {
        Query::Lub { x, y } => {
            let x = group.parse_elem(x)?;
            let y = group.parse_elem(y)?;
            let result = match group.lub(&x, &y) {
                UpperBound::Finite(z) => json!({ "lub": group.render_elem(&z) }),
                UpperBound::Infinity => json!({ "lub": "infinity" }),
            };
            super::print_report(&result);
        }
        Query::Sigmatau { x } => {
            let x = group.parse_elem(x)?;
            let result = match group.sigma_tau(&x) {
                Some((sigma, tau)) => json!({
                    "sigma": group.render_elem(&sigma),
                    "tau": group.render_elem(&tau),
                }),
                None => json!({ "sigmaTau": "absent" }),
            };
            super::print_report(&result);
        }
        Query::Principal { t, radius } => {
            let t = group.parse_elem(t)?;
            // enumeration walks the whole ball, so cap its size (the
            // pattern cap is for subset enumeration and far too strict
            // for a linear walk; a thousand states is the desk scale)
            let cap = limits.max_ball_states.saturating_mul(40);
            let ball_size = group.ball_elems(*radius).len();
            if ball_size > cap {
                return Err(PdsxError::GuardExceeded(format!(
                    "ball of {ball_size} elements exceeds the cap of {cap}"
                )));
            }
            let points = principal_point(group, &t, *radius)?;
            super::print_report(&json!({
                "element": group.render_elem(&t),
                "radius": radius,
                "members": points.iter().map(|x| group.render_elem(x)).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(())
}
