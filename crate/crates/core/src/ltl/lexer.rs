use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident { name: String, primed: bool },
    Int(u64),
    Float(f64),
    Bool(bool),
    LParen,
    RParen,
    Plus,
    Minus,
    Cmp(super::CmpOp),
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Until,
    Globally,
    Finally,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident { name, primed } => {
                if *primed {
                    format!("identifier `{name}'`")
                } else {
                    format!("identifier `{name}`")
                }
            }
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Float(x) => format!("float `{x}`"),
            Tok::Bool(b) => format!("`{}`", if *b { "TRUE" } else { "FALSE" }),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Globally => "`G`".into(),
            Tok::Finally => "`F`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    /// Byte offset into the source.
    pub pos: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    use super::CmpOp::*;

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
        let rest = &src[i..];
        // Longest match first among the multi-byte spellings.
        let fixed: &[(&str, Tok)] = &[
            ("<->", Tok::Iff),
            ("↔", Tok::Iff),
            ("->", Tok::Implies),
            ("→", Tok::Implies),
            ("&&", Tok::And),
            ("||", Tok::Or),
            ("==", Tok::Cmp(Eq)),
            ("!=", Tok::Cmp(Ne)),
            ("<=", Tok::Cmp(Le)),
            (">=", Tok::Cmp(Ge)),
            ("<", Tok::Cmp(Lt)),
            (">", Tok::Cmp(Gt)),
            ("=", Tok::Cmp(Eq)),
            ("&", Tok::And),
            ("|", Tok::Or),
            ("~", Tok::Not),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("+", Tok::Plus),
            ("-", Tok::Minus),
        ];
        if let Some((s, tok)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push(Spanned { tok: tok.clone(), pos: start });
            i += s.len();
            continue;
        }
        if c.is_ascii_digit() {
            let (tok, len) = lex_number(rest).ok_or_else(|| {
                ParseError::new(start, vec!["number".into()], format!("malformed number `{}`", word_at(rest)))
            })?;
            out.push(Spanned { tok, pos: start });
            i += len;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            let word = &src[i..j];
            let primed = j < bytes.len() && bytes[j] == b'\'';
            let tok = match (word, primed) {
                ("X", false) => Tok::Next,
                ("U", false) => Tok::Until,
                ("G", false) => Tok::Globally,
                ("F", false) => Tok::Finally,
                ("TRUE" | "true", false) => Tok::Bool(true),
                ("FALSE" | "false", false) => Tok::Bool(false),
                _ => Tok::Ident { name: word.to_string(), primed },
            };
            out.push(Spanned { tok, pos: start });
            i = if primed { j + 1 } else { j };
            continue;
        }
        let ch = rest.chars().next().unwrap_or('?');
        return Err(ParseError::new(start, vec!["token".into()], format!("unexpected character `{ch}`")));
    }
    Ok(out)
}

fn word_at(s: &str) -> &str {
    let end = s
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '.' || c == '_'))
        .unwrap_or(s.len());
    &s[..end]
}

/// `digits [. digits] [(e|E) [+-] digits]`; a number directly followed by an
/// identifier character is malformed.
fn lex_number(s: &str) -> Option<(Tok, usize)> {
    let b = s.as_bytes();
    let digits = |mut k: usize| {
        let from = k;
        while k < b.len() && b[k].is_ascii_digit() {
            k += 1;
        }
        (k, k - from)
    };
    let (mut j, _) = digits(0);
    let mut is_float = false;
    if j < b.len() && b[j] == b'.' {
        let (k, n) = digits(j + 1);
        if n == 0 {
            return None;
        }
        j = k;
        is_float = true;
    }
    if j < b.len() && (b[j] == b'e' || b[j] == b'E') {
        let mut k = j + 1;
        if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
            k += 1;
        }
        let (k2, n) = digits(k);
        if n == 0 {
            return None;
        }
        j = k2;
        is_float = true;
    }
    if j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_' || b[j] == b'.') {
        return None;
    }
    let text = &s[..j];
    let tok = if is_float {
        let x: f64 = text.parse().ok()?;
        if !x.is_finite() {
            return None;
        }
        Tok::Float(x)
    } else {
        Tok::Int(text.parse().ok()?)
    };
    Some((tok, j))
}
