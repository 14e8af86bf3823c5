use serde_json::{json, Map, Value as Json};

use super::compile::Compiled;
use super::{Bounds, CheckError, Counterexample, StateVector, TraceStep};
use crate::ir::{ProtocolModel, Property};
use crate::value::{atom, Value};

impl StateVector {
    pub fn to_json(&self) -> Json {
        Json::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect(),
        )
    }

    pub fn from_json(j: &Json) -> Result<Self, CheckError> {
        let obj = j
            .as_object()
            .ok_or_else(|| CheckError::Malformed("state must be an object".into()))?;
        obj.iter()
            .map(|(k, v)| {
                Value::from_json(v)
                    .map(|v| (k.clone(), v))
                    .map_err(|e| CheckError::Malformed(format!("{k}: {e}")))
            })
            .collect::<Result<_, _>>()
            .map(StateVector)
    }
}

impl Counterexample {
    /// The exported counterexample document.
    pub fn to_json(&self) -> Json {
        let steps: Vec<Json> = self
            .steps
            .iter()
            .map(|s| {
                let params: Map<String, Json> = s
                    .params
                    .iter()
                    .map(|(k, a)| (k.clone(), Json::String(a.to_string())))
                    .collect();
                json!({ "action": s.action, "params": params, "state": s.state.to_json() })
            })
            .collect();
        json!({
            "model": self.model,
            "property": self.property,
            "depth": self.depth,
            "initial": self.initial.to_json(),
            "steps": steps,
        })
    }

    pub fn from_json(j: &Json) -> Result<Self, CheckError> {
        let bad = |m: &str| CheckError::Malformed(m.to_string());
        let text = |k: &str| {
            j.get(k)
                .and_then(Json::as_str)
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("missing string `{k}`")))
        };
        let steps = j
            .get("steps")
            .and_then(Json::as_array)
            .ok_or_else(|| bad("missing array `steps`"))?
            .iter()
            .map(|s| {
                let params = s
                    .get("params")
                    .and_then(Json::as_object)
                    .ok_or_else(|| bad("step without `params`"))?
                    .iter()
                    .map(|(k, v)| {
                        v.as_str()
                            .map(|a| (k.clone(), atom(a)))
                            .ok_or_else(|| bad("parameter values must be strings"))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(TraceStep {
                    action: s
                        .get("action")
                        .and_then(Json::as_str)
                        .ok_or_else(|| bad("step without `action`"))?
                        .to_string(),
                    params,
                    state: StateVector::from_json(s.get("state").ok_or_else(|| bad("step without `state`"))?)?,
                })
            })
            .collect::<Result<Vec<_>, CheckError>>()?;
        let depth = j
            .get("depth")
            .and_then(Json::as_u64)
            .ok_or_else(|| bad("missing integer `depth`"))? as usize;
        Ok(Counterexample {
            model: text("model")?,
            property: text("property")?,
            depth,
            initial: StateVector::from_json(j.get("initial").ok_or_else(|| bad("missing `initial`"))?)?,
            steps,
        })
    }
}

/// Replays `cx` against `model`: true iff it starts in the initial state,
/// every step is enabled and produces the recorded state, the property holds
/// before the last state and fails in it.
pub fn validate_trace(
    model: &ProtocolModel,
    cx: &Counterexample,
    bounds: &Bounds,
) -> Result<bool, CheckError> {
    let property = model
        .property(&cx.property)
        .ok_or_else(|| CheckError::UnknownProperty(cx.property.clone()))?;
    validate_trace_for(model, property, cx, bounds)
}

/// As [`validate_trace`] with an explicit property (e.g. one instantiated
/// from the catalog).
pub fn validate_trace_for(
    model: &ProtocolModel,
    property: &Property,
    cx: &Counterexample,
    bounds: &Bounds,
) -> Result<bool, CheckError> {
    let c = Compiled::new(model, bounds)?;
    for step in &cx.steps {
        if c.action_index(&step.action).is_none() {
            return Err(CheckError::UnknownTransition(step.action.clone()));
        }
    }
    if cx.depth != cx.steps.len() || cx.initial != c.initial_state() {
        return Ok(false);
    }
    let mut state = c.initial_state().values();
    for step in &cx.steps {
        if !c.holds(&property.invariant, &state)? {
            return Ok(false);
        }
        let ai = c.action_index(&step.action).expect("checked above");
        let t = &c.actions[ai].transition;
        let names_match = t.params.len() == step.params.len()
            && t.params.iter().zip(&step.params).all(|(p, (n, _))| p.name == *n);
        if !names_match {
            return Ok(false);
        }
        let binding: Vec<_> = step.params.iter().map(|(_, a)| a.clone()).collect();
        if !c.actions[ai].bindings.contains(&binding) {
            return Ok(false);
        }
        match c.fire(ai, &binding, &state)? {
            Some(next) if c.named(&next) == step.state => state = next,
            _ => return Ok(false),
        }
    }
    Ok(!c.holds(&property.invariant, &state)?)
}
