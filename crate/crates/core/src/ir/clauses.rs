use std::collections::BTreeMap;
use std::path::Path;

use super::error::{IrError, IrErrorKind};
use super::syntax::{self, quote, scalar, Cursor};
use super::*;

/// Reads a clause file.
pub fn load_clauses(path: impl AsRef<Path>) -> Result<Vec<NormativeClause>, IrError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|e| IrError {
        line: 0,
        column: 0,
        kind: IrErrorKind::Io(format!("{}: {e}", path.display())),
    })?;
    parse_clauses(&src)
}

/// Parses clause text: an optional `protocol:` line, then `clause { ... }` blocks.
///
/// Clauses naming each other under `conflicts` are both marked ambiguous.
pub fn parse_clauses(src: &str) -> Result<Vec<NormativeClause>, IrError> {
    let mut cur = Cursor::new(src);
    let mut protocol: Option<String> = None;
    let mut out: Vec<NormativeClause> = Vec::new();
    let mut positions = BTreeMap::new();
    loop {
        cur.skip_all();
        if cur.at_end() {
            break;
        }
        let (word, pos) = cur.expect_word("`clause` block")?;
        match word {
            "protocol" => {
                cur.expect(':')?;
                protocol = Some(cur.rest_of_line().0.to_string());
            }
            "clause" => {
                let fields = cur.block(&[])?;
                let clause = clause(&fields, &cur, pos, protocol.as_deref())?;
                if positions.insert(clause.id.clone(), pos).is_some() {
                    return Err(cur.err_at(pos, IrErrorKind::DuplicateId(clause.id)));
                }
                out.push(clause);
            }
            other => {
                return Err(IrError::syntax(src, pos, format!("unexpected `{other}`")));
            }
        }
    }
    let mut flagged = Vec::new();
    for c in &out {
        for other in &c.conflicts_with {
            if !positions.contains_key(other) {
                return Err(IrError::syntax(
                    src,
                    positions[&c.id],
                    format!("clause `{}` conflicts with unknown clause `{other}`", c.id),
                ));
            }
            flagged.push(c.id.clone());
            flagged.push(other.clone());
        }
    }
    for c in &mut out {
        if flagged.contains(&c.id) {
            c.ambiguous = true;
        }
    }
    Ok(out)
}

fn clause(
    fields: &[syntax::Field],
    cur: &Cursor,
    pos: usize,
    protocol: Option<&str>,
) -> Result<NormativeClause, IrError> {
    let mut c = NormativeClause {
        id: String::new(),
        protocol: protocol.unwrap_or_default().to_string(),
        modality: Modality::NotSpecified,
        actor: String::new(),
        behavior: String::new(),
        source: SourceRef::default(),
        ambiguous: false,
        precedence: 1,
        conflicts_with: Vec::new(),
    };
    let mut have_source = false;
    for f in fields {
        match f.key.as_str() {
            "id" => c.id = f.text(cur)?,
            "protocol" => c.protocol = f.text(cur)?,
            "modality" => c.modality = f.parsed(cur)?,
            "actor" => c.actor = f.text(cur)?,
            "behavior" => c.behavior = f.text(cur)?,
            "ambiguous" => c.ambiguous = syntax::bool_word(f, cur)?,
            "precedence" => {
                let text = f.text(cur)?;
                let n: i64 = text.parse().map_err(|_| {
                    IrError::syntax(cur.src, f.value_pos, format!("invalid precedence `{text}`"))
                })?;
                if !(1..=5).contains(&n) {
                    return Err(cur.err_at(f.value_pos, IrErrorKind::PrecedenceOutOfRange(n)));
                }
                c.precedence = n as u8;
            }
            "source" => {
                c.source = syntax::source_ref(&mut f.group(cur, '{')?)?;
                have_source = true;
            }
            "conflicts" => c.conflicts_with = syntax::word_list(&mut f.group(cur, '[')?)?,
            _ => return Err(f.unknown(cur, "clause")),
        }
    }
    let missing = |what: &str| IrError::syntax(cur.src, pos, format!("clause is missing `{what}`"));
    if c.id.is_empty() {
        return Err(missing("id"));
    }
    if c.protocol.is_empty() {
        return Err(missing("protocol"));
    }
    if !have_source {
        return Err(missing("source"));
    }
    if c.modality != Modality::NotSpecified && c.source.quote.trim().is_empty() {
        return Err(cur.err_at(pos, IrErrorKind::MissingQuote(c.id)));
    }
    Ok(c)
}

/// Canonical clause-file text for clauses of a single protocol.
pub fn serialize_clauses(clauses: &[NormativeClause]) -> String {
    let mut out = String::new();
    if let Some(first) = clauses.first() {
        out.push_str(&format!("protocol: {}\n", first.protocol));
    }
    for c in clauses {
        out.push_str(&format!(
            "\nclause {{\n  id: {}  modality: {}  actor: {}  precedence: {}  ambiguous: {}\n",
            scalar(&c.id),
            c.modality,
            scalar(&c.actor),
            c.precedence,
            c.ambiguous
        ));
        if clauses.first().is_some_and(|f| f.protocol != c.protocol) {
            out.push_str(&format!("  protocol: {}\n", scalar(&c.protocol)));
        }
        out.push_str(&format!("  behavior: {}\n  source: ", quote(&c.behavior)));
        syntax::write_source(&Source::Ref(c.source.clone()), &mut out);
        out.push('\n');
        if !c.conflicts_with.is_empty() {
            out.push_str(&format!("  conflicts: [{}]\n", c.conflicts_with.join(", ")));
        }
        out.push_str("}\n");
    }
    out
}
