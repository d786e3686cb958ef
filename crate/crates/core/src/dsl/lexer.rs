use super::ast::Pos;
use super::DslError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// Longest first, so that `|||` wins over `|`.
const SYMBOLS: &[&str] = &[
    "|||", "|~|", "[|", "|]", "[]", "->", ":=", "=>", "<=", ">=", "!=", "..", "|", "[", "]", "{", "}", "(", ")", ";",
    "&", "!", "?", "<", ">", "=", "+", "-", "*", "^", "#", ",", ":",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    // End of input is reported just past the last token.
    let mut end = Pos { line: 1, col: 1 };
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if rest.starts_with("//") || rest.starts_with("--") {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
                col += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            end = Pos { line, col };
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| DslError::Syntax {
                line: pos.line,
                col: pos.col,
                expected: "an integer that fits in 64 bits".into(),
                found: text.clone(),
            })?;
            out.push((Tok::Int(n), pos));
            end = Pos { line, col };
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.len(), &chars);
                out.push((Tok::Sym(s), pos));
                end = Pos { line, col };
            }
            None => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, end));
    Ok(out)
}
