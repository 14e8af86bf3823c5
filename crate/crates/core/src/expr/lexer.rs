use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Forall,
    Exists,
    In,
    NotIn,
    SubsetEq,
    And,
    Or,
    Not,
    True,
    False,
    Union,
    Minus,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Implies,
    Plus,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::In => "in",
            Tok::NotIn => "notin",
            Tok::SubsetEq => "subseteq",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Union => "union",
            Tok::Minus => "minus",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Ne => "#",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Implies => "=>",
            Tok::Plus => "+",
            Tok::Ident(_) | Tok::Int(_) => "",
        }
    }
}

const KEYWORDS: &[&str] = &[
    "forall", "exists", "in", "notin", "subseteq", "and", "or", "not", "true", "false", "union",
    "minus",
];

/// Token with its byte offset in the source.
pub(crate) type Spanned = (Tok, usize);

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match word {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                "in" => Tok::In,
                "notin" => Tok::NotIn,
                "subseteq" => Tok::SubsetEq,
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                "true" => Tok::True,
                "false" => Tok::False,
                "union" => Tok::Union,
                "minus" => Tok::Minus,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, start));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i]
                .parse()
                .map_err(|_| ParseError::new(src, start, "integer literal out of range"))?;
            out.push((Tok::Int(n), start));
            continue;
        }
        let two: &[u8] = if i + 1 < bytes.len() { &bytes[i..i + 2] } else { b"" };
        let (tok, len) = match two {
            b"<=" => (Tok::Le, 2),
            b">=" => (Tok::Ge, 2),
            b"=>" => (Tok::Implies, 2),
            b"!=" => (Tok::Ne, 2),
            _ => match c {
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'[' => (Tok::LBracket, 1),
                b']' => (Tok::RBracket, 1),
                b'{' => (Tok::LBrace, 1),
                b'}' => (Tok::RBrace, 1),
                b',' => (Tok::Comma, 1),
                b':' => (Tok::Colon, 1),
                b'=' => (Tok::Eq, 1),
                b'#' => (Tok::Ne, 1),
                b'<' => (Tok::Lt, 1),
                b'>' => (Tok::Gt, 1),
                b'+' => (Tok::Plus, 1),
                _ => {
                    let op: String = src[i..]
                        .chars()
                        .take_while(|ch| !ch.is_whitespace() && !ch.is_alphanumeric())
                        .collect();
                    return Err(ParseError::new(
                        src,
                        start,
                        format!("unknown operator `{op}`"),
                    ));
                }
            },
        };
        out.push((tok, start));
        i += len;
    }
    Ok(out)
}

/// True for reserved words of the expression language.
pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}
