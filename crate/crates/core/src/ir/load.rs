use std::collections::BTreeSet;
use std::path::Path;

use super::error::{IrError, IrErrorKind};
use super::syntax::{self, Cursor, Field};
use super::*;
use crate::expr::{self, Expr};

const TRANSITION_REST: &[&str] = &["params", "guard", "update", "source"];
const PROPERTY_REST: &[&str] = &["invariant", "source"];

/// Reads and parses a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ProtocolModel, IrError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| IrError {
        line: 0,
        column: 0,
        kind: IrErrorKind::Io(format!("{}: {e}", path.display())),
    })?;
    parse_model(&src)
}

/// Parses model text. Only syntax is checked here; see [`validate`].
pub fn parse_model(src: &str) -> Result<ProtocolModel, IrError> {
    let mut cur = Cursor::new(src);
    let mut name = None;
    let mut snapshot = None;
    let mut model = ProtocolModel {
        name: String::new(),
        snapshot: String::new(),
        constants: Vec::new(),
        state_vars: Vec::new(),
        transitions: Vec::new(),
        properties: Vec::new(),
    };
    let mut ids = BTreeSet::new();
    loop {
        cur.skip_all();
        if cur.at_end() {
            break;
        }
        let (word, pos) = cur.expect_word("declaration")?;
        match word {
            "protocol" | "snapshot" => {
                cur.expect(':')?;
                let (text, _) = cur.rest_of_line();
                if text.is_empty() {
                    return Err(cur.err(format!("missing value for `{word}`")));
                }
                let slot = if word == "protocol" { &mut name } else { &mut snapshot };
                if slot.replace(text.to_string()).is_some() {
                    return Err(cur.err_at(pos, IrErrorKind::DuplicateId(word.to_string())));
                }
            }
            "constants" => {
                let (start, end) = cur.group('{', '}')?;
                let mut inner = cur.sub(start, end);
                for f in inner.fields(&[])? {
                    if model.domain(&f.key).is_some() {
                        return Err(cur.err_at(f.key_pos, IrErrorKind::DuplicateId(f.key)));
                    }
                    let atoms = syntax::word_list(&mut f.group(&cur, '[')?)?;
                    model.constants.push(Domain {
                        name: f.key.clone(),
                        atoms: atoms.iter().map(|a| atom(a)).collect(),
                    });
                }
                if !inner.at_end() {
                    return Err(inner.unexpected("domain"));
                }
            }
            "var" => {
                let decl = var_decl(&mut cur)?;
                if model.var(&decl.name).is_some() {
                    return Err(cur.err_at(pos, IrErrorKind::DuplicateId(decl.name)));
                }
                model.state_vars.push(decl);
            }
            "transition" | "property" => {
                let (id, id_pos) = cur.expect_word("identifier")?;
                if !ids.insert(id.to_string()) {
                    return Err(cur.err_at(id_pos, IrErrorKind::DuplicateId(id.to_string())));
                }
                if word == "transition" {
                    let fields = cur.block(TRANSITION_REST)?;
                    model.transitions.push(transition(id, id_pos, &fields, &cur)?);
                } else {
                    let fields = cur.block(PROPERTY_REST)?;
                    model.properties.push(property(id, id_pos, &fields, &cur)?);
                }
            }
            other => {
                return Err(IrError::syntax(
                    src,
                    pos,
                    format!("unexpected `{other}` at top level"),
                ))
            }
        }
    }
    model.name = name.ok_or_else(|| IrError::syntax(src, 0, "missing `protocol:` line"))?;
    model.snapshot = snapshot.ok_or_else(|| IrError::syntax(src, 0, "missing `snapshot:` line"))?;
    Ok(model)
}

fn var_decl(cur: &mut Cursor) -> Result<StateVarDecl, IrError> {
    let (name, _) = cur.expect_word("variable name")?;
    cur.expect(':')?;
    let sort = syntax::sort(cur)?;
    cur.keyword("init")?;
    let save = cur.pos;
    let all = matches!(cur.word(), Some(("all", _)));
    if !all {
        cur.pos = save;
    }
    let value = syntax::literal(cur)?;
    if !cur.at_line_end() {
        return Err(cur.unexpected("end of line"));
    }
    Ok(StateVarDecl {
        name: name.to_string(),
        sort,
        init: if all { Init::All(value) } else { Init::Exact(value) },
    })
}

fn expr_at(cur: &Cursor, f: &Field) -> Result<Expr, IrError> {
    let text = f.text(cur)?;
    expr::parse(&text).map_err(|e| IrError::from_expr(cur.src, f.rest_offset(), e))
}

fn params(cur: &Cursor, f: &Field) -> Result<Vec<Param>, IrError> {
    let text = f.text(cur)?;
    let bad = || IrError::syntax(cur.src, f.value_pos, "params must read `name in Domain, ...`");
    text.split(',')
        .map(|p| {
            let words: Vec<&str> = p.split_whitespace().collect();
            match words.as_slice() {
                [name, "in", dom] => Ok(Param {
                    name: name.to_string(),
                    domain: dom.to_string(),
                }),
                _ => Err(bad()),
            }
        })
        .collect()
}

fn update(cur: &Cursor, f: &Field) -> Result<Update, IrError> {
    let text = f.text(cur)?;
    let at = |e| IrError::from_expr(cur.src, f.rest_offset(), e);
    let split = text
        .find(":=")
        .ok_or_else(|| IrError::syntax(cur.src, f.value_pos, "update must read `target := expr`"))?;
    let mut target = expr::parse_term(&text[..split]).map_err(at)?;
    let value = expr::parse(&text[split + 2..])
        .map_err(|e| IrError::from_expr(cur.src, f.rest_offset() + split + 2, e))?;
    let mut path = Vec::new();
    loop {
        match target {
            Expr::Ident(var) => {
                path.reverse();
                return Ok(Update { var, path, value });
            }
            Expr::Index(base, idx) => {
                path.push(*idx);
                target = *base;
            }
            _ => {
                return Err(IrError::syntax(
                    cur.src,
                    f.value_pos,
                    "update target must be a variable or an indexed variable",
                ))
            }
        }
    }
}

fn transition(id: &str, pos: usize, fields: &[Field], cur: &Cursor) -> Result<Transition, IrError> {
    let mut kind = None;
    let mut t = Transition {
        id: id.to_string(),
        kind: TransitionKind::Protocol,
        actor: String::new(),
        params: Vec::new(),
        guard: Expr::Bool(true),
        updates: Vec::new(),
        modality: None,
        adversary: None,
        sources: Vec::new(),
    };
    let mut guards = Vec::new();
    for f in fields {
        match f.key.as_str() {
            "kind" => kind = Some(f.parsed(cur)?),
            "actor" => t.actor = f.text(cur)?,
            "params" => t.params.extend(params(cur, f)?),
            "guard" => guards.push(expr_at(cur, f)?),
            "update" => t.updates.push(update(cur, f)?),
            "modality" => t.modality = Some(f.parsed(cur)?),
            "adversary" => t.adversary = Some(f.parsed(cur)?),
            "source" => t.sources.push(syntax::source(f, cur)?),
            _ => return Err(f.unknown(cur, "transition")),
        }
    }
    t.kind = kind.ok_or_else(|| IrError::syntax(cur.src, pos, format!("transition `{id}` has no `kind`")))?;
    let mut guards = guards.into_iter();
    if let Some(first) = guards.next() {
        t.guard = guards.fold(first, Expr::and);
    }
    Ok(t)
}

fn property(id: &str, pos: usize, fields: &[Field], cur: &Cursor) -> Result<Property, IrError> {
    let (mut principle, mut class, mut invariant) = (None, None, None);
    let mut sources = Vec::new();
    for f in fields {
        match f.key.as_str() {
            "principle" => principle = Some(f.parsed(cur)?),
            "class" => class = Some(f.parsed(cur)?),
            "invariant" => invariant = Some(expr_at(cur, f)?),
            "source" => sources.push(syntax::source(f, cur)?),
            _ => return Err(f.unknown(cur, "property")),
        }
    }
    let missing = |what: &str| IrError::syntax(cur.src, pos, format!("property `{id}` has no `{what}`"));
    Ok(Property {
        id: id.to_string(),
        principle: principle.ok_or_else(|| missing("principle"))?,
        class: class.ok_or_else(|| missing("class"))?,
        invariant: invariant.ok_or_else(|| missing("invariant"))?,
        sources,
    })
}
