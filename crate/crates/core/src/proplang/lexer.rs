use super::{PropertyError, PropertyErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    LCoal,
    RCoal,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Plus,
    Minus,
    Star,
    Not,
    And,
    Or,
    Query,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Real(r) => format!("`{r}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LCoal => "<<",
            Tok::RCoal => ">>",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Not => "!",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Query => "=?",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Eq => "=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset of the first character.
    pub offset: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, PropertyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = bytes.get(i + 1).copied();
        let (tok, len) = match (b, two) {
            (b'<', Some(b'<')) => (Tok::LCoal, 2),
            (b'>', Some(b'>')) => (Tok::RCoal, 2),
            (b'<', Some(b'=')) => (Tok::Le, 2),
            (b'>', Some(b'=')) => (Tok::Ge, 2),
            (b'=', Some(b'?')) => (Tok::Query, 2),
            (b'<', _) => (Tok::Lt, 1),
            (b'>', _) => (Tok::Gt, 1),
            (b'=', _) => (Tok::Eq, 1),
            (b'[', _) => (Tok::LBrack, 1),
            (b']', _) => (Tok::RBrack, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b':', _) => (Tok::Colon, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'!', _) => (Tok::Not, 1),
            (b'&', _) => (Tok::And, 1),
            (b'|', _) => (Tok::Or, 1),
            (b'"', _) => {
                let end = text[i + 1..].find('"').ok_or_else(|| {
                    PropertyError::new(PropertyErrorKind::Lexical, start, "unterminated string")
                })?;
                (Tok::Str(text[i + 1..i + 1 + end].to_string()), end + 2)
            }
            (c, _) if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let is_real = bytes.get(j) == Some(&b'.')
                    && bytes.get(j + 1).is_some_and(|d| d.is_ascii_digit());
                if is_real {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    let v: f64 = text[i..j].parse().expect("digits and a dot");
                    (Tok::Real(v), j - i)
                } else {
                    let v: u64 = text[i..j].parse().map_err(|_| {
                        PropertyError::new(PropertyErrorKind::Lexical, start, "integer too large")
                    })?;
                    (Tok::Int(v), j - i)
                }
            }
            (c, _) if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                (Tok::Ident(text[i..j].to_string()), j - i)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(PropertyError::new(
                    PropertyErrorKind::Lexical,
                    start,
                    format!("unexpected character `{ch}`"),
                ));
            }
        };
        out.push(Token { tok, offset: start });
        i += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn coalition_and_bound() {
        assert_eq!(
            toks("<<p1:p2>> P>=1.0 [F<=5 \"good\"]"),
            vec![
                Tok::LCoal,
                Tok::Ident("p1".into()),
                Tok::Colon,
                Tok::Ident("p2".into()),
                Tok::RCoal,
                Tok::Ident("P".into()),
                Tok::Ge,
                Tok::Real(1.0),
                Tok::LBrack,
                Tok::Ident("F".into()),
                Tok::Le,
                Tok::Int(5),
                Tok::Str("good".into()),
                Tok::RBrack,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn query_marker() {
        assert_eq!(
            toks("Pmax=?"),
            vec![Tok::Ident("Pmax".into()), Tok::Query, Tok::Eof]
        );
    }

    #[test]
    fn offsets_and_errors() {
        let t = tokenize("  c1 < 3").unwrap();
        assert_eq!(
            t.iter().map(|t| t.offset).collect::<Vec<_>>(),
            vec![2, 5, 7, 8]
        );
        let e = tokenize("c1 # 2").unwrap_err();
        assert_eq!(e.offset, 3);
        assert_eq!(e.kind, PropertyErrorKind::Lexical);
        assert_eq!(tokenize("\"abc").unwrap_err().offset, 0);
    }
}
