use std::fmt;

use super::lexer::{tokenize, Spanned, Tok};
use super::{Expr, Quantifier, RelOp, SetOp};

/// Syntax error with a 1-based line/column position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let before = &src[..offset.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Shifts the position of an error found in a fragment that starts at
    /// (`line`, `column`) of an enclosing document.
    pub fn offset_by(mut self, line: usize, column: usize) -> Self {
        if self.line == 1 {
            self.column += column - 1;
        }
        self.line += line - 1;
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parses a complete boolean expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a complete term (the right-hand side of an update, an index).
pub fn parse_term(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.term()?;
    p.finish()?;
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Spanned>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Parser {
            src,
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |(_, o)| *o)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.src, self.offset(), msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of expression")),
        }
    }

    // expr := quant | impl
    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Forall) | Some(Tok::Exists) => self.quant(),
            _ => self.implication(),
        }
    }

    fn quant(&mut self) -> Result<Expr, ParseError> {
        let q = if self.eat(&Tok::Forall) {
            Quantifier::Forall
        } else {
            self.expect(Tok::Exists, "quantifier")?;
            Quantifier::Exists
        };
        let var = self.ident("bound variable")?;
        self.expect(Tok::In, "`in`")?;
        let dom = self.ident("domain name")?;
        self.expect(Tok::Colon, "`:`")?;
        let body = self.expr()?;
        Ok(Expr::Quant(q, var, dom, Box::new(body)))
    }

    // impl := disj ("=>" (quant | impl))?
    fn implication(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = match self.peek() {
                Some(Tok::Forall) | Some(Tok::Exists) => self.quant()?,
                _ => self.implication()?,
            };
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat(&Tok::And) {
            let rhs = self.negation()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::Not(Box::new(self.negation()?)));
        }
        self.atom()
    }

    // atom := term (RELOP term)? | "(" expr ")"
    fn atom(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        if matches!(self.peek(), Some(Tok::Forall) | Some(Tok::Exists)) {
            return Err(self.error("quantifier must be parenthesized here"));
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Some(Tok::Eq) => RelOp::Eq,
            Some(Tok::Ne) => RelOp::Ne,
            Some(Tok::Lt) => RelOp::Lt,
            Some(Tok::Le) => RelOp::Le,
            Some(Tok::Gt) => RelOp::Gt,
            Some(Tok::Ge) => RelOp::Ge,
            Some(Tok::In) => RelOp::In,
            Some(Tok::NotIn) => RelOp::NotIn,
            Some(Tok::SubsetEq) => RelOp::SubsetEq,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.term()?;
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    // term := postfix (("union" | "minus") postfix | "+" INT)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.postfix()?;
        loop {
            if self.eat(&Tok::Union) {
                lhs = Expr::SetOp(SetOp::Union, Box::new(lhs), Box::new(self.postfix()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::SetOp(SetOp::Minus, Box::new(lhs), Box::new(self.postfix()?));
            } else if self.eat(&Tok::Plus) {
                match self.peek() {
                    Some(Tok::Int(n)) => {
                        let n = *n;
                        self.pos += 1;
                        lhs = Expr::Add(Box::new(lhs), n);
                    }
                    _ => return Err(self.unexpected("integer literal after `+`")),
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat(&Tok::LBracket) {
            let idx = self.term()?;
            self.expect(Tok::RBracket, "`]`")?;
            e = Expr::Index(Box::new(e), Box::new(idx));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Ident(name))
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(Expr::Bool(true))
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(Expr::Bool(false))
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        items.push(self.term()?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma, "`,` or `}`")?;
                    }
                }
                Ok(Expr::SetLit(items))
            }
            _ => Err(self.unexpected("term")),
        }
    }
}
