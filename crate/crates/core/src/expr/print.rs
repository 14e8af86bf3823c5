use super::Expr;

// Binding levels, loosest first. A node printed in a context that demands a
// tighter level gets parentheses.
const QUANT: u8 = 0;
const IMPL: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const ATOM: u8 = 5;

/// Prints `e` in canonical concrete syntax; `parse(print(e)) == e` for every
/// expression the parser can produce.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, QUANT, &mut out);
    out
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Quant(..) => QUANT,
        Expr::Implies(..) => IMPL,
        Expr::Or(..) => OR,
        Expr::And(..) => AND,
        Expr::Not(..) => NOT,
        _ => ATOM,
    }
}

fn write_expr(e: &Expr, ctx: u8, out: &mut String) {
    if level(e) < ctx {
        out.push('(');
        write_expr(e, QUANT, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Quant(q, var, dom, body) => {
            out.push_str(match q {
                super::Quantifier::Forall => "forall ",
                super::Quantifier::Exists => "exists ",
            });
            out.push_str(var);
            out.push_str(" in ");
            out.push_str(dom);
            out.push_str(": ");
            write_expr(body, QUANT, out);
        }
        Expr::Implies(l, r) => {
            write_expr(l, OR, out);
            out.push_str(" => ");
            // A trailing quantifier is unambiguous on the right of `=>`.
            let rctx = if matches!(**r, Expr::Quant(..)) { QUANT } else { IMPL };
            write_expr(r, rctx, out);
        }
        Expr::Or(l, r) => {
            write_expr(l, OR, out);
            out.push_str(" or ");
            write_expr(r, AND, out);
        }
        Expr::And(l, r) => {
            write_expr(l, AND, out);
            out.push_str(" and ");
            write_expr(r, NOT, out);
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            write_expr(inner, NOT, out);
        }
        Expr::Compare(op, l, r) => {
            write_term(l, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_term(r, out);
        }
        _ => write_term(e, out),
    }
}

pub(super) fn write_term(e: &Expr, out: &mut String) {
    match e {
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Ident(name) => out.push_str(name),
        Expr::SetLit(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(item, out);
            }
            out.push('}');
        }
        Expr::Index(base, idx) => {
            write_term(base, out);
            out.push('[');
            write_term(idx, out);
            out.push(']');
        }
        Expr::Add(base, n) => {
            write_term(base, out);
            out.push_str(" + ");
            out.push_str(&n.to_string());
        }
        Expr::SetOp(op, l, r) => {
            write_term(l, out);
            out.push(' ');
            out.push_str(op.keyword());
            out.push(' ');
            write_term(r, out);
        }
        // Boolean formula in term position: only reachable for ASTs the
        // parser cannot produce.
        other => {
            out.push('(');
            write_expr(other, QUANT, out);
            out.push(')');
        }
    }
}
