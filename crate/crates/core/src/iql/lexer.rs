use super::{is_keyword, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Identifier; `quoted` when written in double quotes.
    Ident { text: String, quoted: bool },
    /// Reserved word, lowercased.
    Keyword(String),
    Str(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident { text, .. } => format!("identifier `{text}`"),
            Tok::Keyword(k) => format!("`{k}`"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

pub fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn err(src: &str, offset: usize, message: String) -> ParseError {
    let (line, column) = position(src, offset);
    ParseError {
        message,
        line,
        column,
        offset,
        expected: Vec::new(),
    }
}

const SYMBOLS: &[(&str, &str)] = &[
    ("<=", "<="),
    (">=", ">="),
    ("!=", "!="),
    ("<>", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("≠", "!="),
    ("(", "("),
    (")", ")"),
    (",", ","),
    (".", "."),
    ("=", "="),
    ("<", "<"),
    (">", ">"),
    (";", ";"),
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    let bytes = src.as_bytes();
    while i < src.len() {
        let c = src[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < src.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            let text = &src[i..j];
            i = j;
            if is_keyword(text) {
                Tok::Keyword(text.to_ascii_lowercase())
            } else {
                Tok::Ident { text: text.to_string(), quoted: false }
            }
        } else if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let mut j = i + 1;
            while j < src.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < src.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                j += 1;
                while j < src.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text = &src[i..j];
            i = j;
            Tok::Number(text.to_string())
        } else if c == '\'' || c == '"' {
            let mut text = String::new();
            let mut j = i + 1;
            loop {
                let Some(d) = src[j..].chars().next() else {
                    return Err(err(src, start, "unterminated quoted text".into()));
                };
                if d == '\n' && c == '"' {
                    return Err(err(src, start, "unterminated quoted identifier".into()));
                }
                j += d.len_utf8();
                if d == c {
                    if src[j..].starts_with(c) {
                        text.push(c);
                        j += c.len_utf8();
                        continue;
                    }
                    break;
                }
                text.push(d);
            }
            i = j;
            if c == '\'' {
                Tok::Str(text)
            } else {
                if text.is_empty() {
                    return Err(err(src, start, "empty quoted identifier".into()));
                }
                Tok::Ident { text, quoted: true }
            }
        } else if let Some((lit, sym)) = SYMBOLS.iter().find(|(lit, _)| src[i..].starts_with(lit)) {
            i += lit.len();
            Tok::Sym(sym)
        } else {
            return Err(err(src, start, format!("unexpected character `{c}`")));
        };
        let (line, column) = position(src, start);
        out.push(Token { tok, offset: start, line, column });
    }
    let (line, column) = position(src, src.len());
    out.push(Token { tok: Tok::Eof, offset: src.len(), line, column });
    Ok(out)
}
