use super::syntax::{scalar, write_literal, write_source};
use super::*;
use crate::expr::{print, Expr};

/// Canonical model text; `parse_model(&serialize_model(m)) == m`.
pub fn serialize_model(m: &ProtocolModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol: {}\nsnapshot: {}\n", m.name, m.snapshot));
    if !m.constants.is_empty() {
        out.push_str("constants {");
        for d in &m.constants {
            out.push_str(&format!(" {}: [{}] ", d.name, d.atoms.join(", ")));
        }
        out.push_str("}\n");
    }
    for v in &m.state_vars {
        out.push_str(&format!("var {} : {} init ", v.name, v.sort));
        let value = match &v.init {
            Init::All(v) => {
                out.push_str("all ");
                v
            }
            Init::Exact(v) => v,
        };
        write_literal(value, &mut out);
        out.push('\n');
    }
    for t in &m.transitions {
        out.push_str(&format!("\ntransition {} {{\n  kind: {}", t.id, t.kind));
        if !t.actor.is_empty() {
            out.push_str(&format!("  actor: {}", scalar(&t.actor)));
        }
        if let Some(m) = t.modality {
            out.push_str(&format!("  modality: {m}"));
        }
        if let Some(a) = t.adversary {
            out.push_str(&format!("  adversary: {a}"));
        }
        out.push('\n');
        if !t.params.is_empty() {
            let ps: Vec<String> = t
                .params
                .iter()
                .map(|p| format!("{} in {}", p.name, p.domain))
                .collect();
            out.push_str(&format!("  params: {}\n", ps.join(", ")));
        }
        if t.guard != Expr::Bool(true) {
            out.push_str(&format!("  guard: {}\n", print(&t.guard)));
        }
        for u in &t.updates {
            out.push_str(&format!("  update: {} := {}\n", update_target(u), print(&u.value)));
        }
        write_sources(&t.sources, &mut out);
        out.push_str("}\n");
    }
    for p in &m.properties {
        out.push_str(&format!(
            "\nproperty {} {{\n  principle: {}  class: {}\n  invariant: {}\n",
            p.id,
            p.principle,
            p.class,
            print(&p.invariant)
        ));
        write_sources(&p.sources, &mut out);
        out.push_str("}\n");
    }
    out
}

pub(crate) fn update_target(u: &Update) -> String {
    let mut s = u.var.clone();
    for idx in &u.path {
        s.push('[');
        s.push_str(&print(idx));
        s.push(']');
    }
    s
}

fn write_sources(sources: &[Source], out: &mut String) {
    for s in sources {
        out.push_str("  source: ");
        write_source(s, out);
        out.push('\n');
    }
}
