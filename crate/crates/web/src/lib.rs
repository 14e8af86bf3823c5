//! Browser bindings: check a model, emit TLA+ and replay a counterexample
//! against the mock endpoints. Every function returns a JSON string.

use agentconform::checker::{check, Bounds, Counterexample};
use agentconform::ir::{self, ProtocolModel};
use agentconform::replay::{self, Mode, Profile};
use agentconform::{models, tla};
use serde_json::{json, Value as Json};
use wasm_bindgen::prelude::*;

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn model_from(source: &str) -> Result<ProtocolModel, String> {
    let m = ir::parse_model(source).map_err(|e| e.to_string())?;
    let report = ir::validate(&m);
    if report.is_empty() {
        Ok(m)
    } else {
        Err(report.to_string())
    }
}

fn bounds(spec: &str) -> Result<Bounds, String> {
    Bounds::default().with_overrides(spec)
}

/// Names of the bundled models.
#[wasm_bindgen]
pub fn model_names() -> String {
    json!(models::names()).to_string()
}

/// Source text of a bundled model, for the editor.
#[wasm_bindgen]
pub fn model_source(name: &str) -> String {
    models::source(name).map(str::to_string).unwrap_or_default()
}

pub fn check_json(source: &str, bounds_spec: &str) -> Result<Json, String> {
    let m = model_from(source)?;
    let b = bounds(bounds_spec)?;
    let mut results = Vec::new();
    for p in &m.properties {
        let r = check(&m, p, &b).map_err(|e| format!("{}: {e}", p.id))?;
        results.push(json!({
            "property": p.id,
            "principle": p.principle.as_str(),
            "verdict": r.verdict().as_str(),
            "states": r.states_explored(),
            "counterexample": r.counterexample().map(Counterexample::to_json),
        }));
    }
    Ok(json!({ "model": m.name, "results": results }))
}

/// Checks every property of the model given as IR text.
#[wasm_bindgen]
pub fn check_model(source: &str, bounds_spec: &str) -> String {
    check_json(source, bounds_spec).map_or_else(error, |j| j.to_string())
}

/// TLA+ module text for the model given as IR text.
#[wasm_bindgen]
pub fn emit_tla(source: &str, bounds_spec: &str) -> String {
    let run = || -> Result<Json, String> {
        let m = model_from(source)?;
        let a = tla::emit(&m, &bounds(bounds_spec)?).map_err(|e| e.to_string())?;
        Ok(json!({ "module": a.module_name, "text": a.module_text }))
    };
    run().map_or_else(error, |j| j.to_string())
}

pub fn replay_json(counterexample: &str) -> Result<Json, String> {
    let j: Json = serde_json::from_str(counterexample).map_err(|e| e.to_string())?;
    let cx = Counterexample::from_json(&j).map_err(|e| e.to_string())?;
    let test = replay::generate_test(&cx)?;
    let mut runs = serde_json::Map::new();
    for p in Profile::ALL {
        let r = replay::run(&test, p, &Mode::Mock).map_err(|e| e.to_string())?;
        runs.insert(p.as_str().to_string(), r.to_json());
    }
    Ok(json!({ "test": test.id, "oracle": test.oracle.as_str(), "runs": runs }))
}

/// Replays a counterexample (JSON) against both mock profiles.
#[wasm_bindgen]
pub fn replay_mock(counterexample: &str) -> String {
    replay_json(counterexample).map_or_else(error, |j| j.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_then_replay() {
        let out = check_json(models::source("mcp").unwrap(), "").unwrap();
        let p8 = out["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["principle"] == "P8")
            .unwrap();
        assert_eq!(p8["verdict"], "FAIL");
        let runs = replay_json(&p8["counterexample"].to_string()).unwrap();
        assert_eq!(runs["runs"]["vulnerable"]["outcome"], "VIOLATED");
        assert_eq!(runs["runs"]["hardened"]["outcome"], "UPHELD");
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(check_model("nonsense", "").contains("error"));
        assert!(emit_tla(models::source("a2a").unwrap(), "agents=x").contains("error"));
        assert!(emit_tla(models::source("a2a").unwrap(), "").contains("MODULE a2a"));
    }
}
