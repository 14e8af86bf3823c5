use std::fmt;

use crate::expr::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IrErrorKind {
    Syntax(String),
    UnknownSort(String),
    DuplicateId(String),
    PrecedenceOutOfRange(i64),
    MissingQuote(String),
    Io(String),
}

/// Load failure with a 1-based position (0:0 for I/O errors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrError {
    pub line: usize,
    pub column: usize,
    pub kind: IrErrorKind,
}

impl IrError {
    pub(crate) fn at(src: &str, offset: usize, kind: IrErrorKind) -> Self {
        let p = ParseError::new(src, offset, "");
        IrError {
            line: p.line,
            column: p.column,
            kind,
        }
    }

    pub(crate) fn syntax(src: &str, offset: usize, msg: impl Into<String>) -> Self {
        Self::at(src, offset, IrErrorKind::Syntax(msg.into()))
    }

    /// Lifts an expression error found in a fragment starting at `offset`.
    pub(crate) fn from_expr(src: &str, offset: usize, e: ParseError) -> Self {
        let base = ParseError::new(src, offset, "");
        let e = e.offset_by(base.line, base.column);
        IrError {
            line: e.line,
            column: e.column,
            kind: IrErrorKind::Syntax(e.message),
        }
    }
}

impl fmt::Display for IrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            IrErrorKind::Io(msg) => write!(f, "{msg}"),
            kind => {
                write!(f, "{}:{}: ", self.line, self.column)?;
                match kind {
                    IrErrorKind::Syntax(m) => f.write_str(m),
                    IrErrorKind::UnknownSort(s) => write!(f, "unknown sort `{s}`"),
                    IrErrorKind::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
                    IrErrorKind::PrecedenceOutOfRange(p) => {
                        write!(f, "precedence {p} outside 1..=5")
                    }
                    IrErrorKind::MissingQuote(id) => {
                        write!(f, "clause `{id}` has a normative modality but no quote")
                    }
                    IrErrorKind::Io(_) => unreachable!(),
                }
            }
        }
    }
}

impl std::error::Error for IrError {}
