//! Invariant files: `key: predicate` lines for `verify-loop`.

use crate::expr::Expr;
use crate::refine::Invariant;

use super::parser::parse_predicate;
use super::{DslError, Model, Pos};

/// A loop invariant, plus an optional observation-predicate spec for the
/// whole process (`spec-pre`, `spec-peri`, `spec-post`).
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantFile {
    pub inv: Invariant,
    pub spec_pre: Option<Expr>,
    pub spec_peri: Option<Expr>,
    pub spec_post: Option<Expr>,
}

impl InvariantFile {
    pub fn has_spec(&self) -> bool {
        self.spec_pre.is_some() || self.spec_peri.is_some() || self.spec_post.is_some()
    }
}

const KEYS: [&str; 6] = ["pre", "peri", "post", "spec-pre", "spec-peri", "spec-post"];

/// Lines that do not start with a key continue the previous entry.
pub fn parse_invariant_file(src: &str, m: &Model) -> Result<InvariantFile, DslError> {
    let mut entries: Vec<(String, usize, String)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") || line.starts_with("--") {
            continue;
        }
        let key = line.split_once(':').map(|(k, _)| k.trim()).filter(|k| KEYS.contains(k));
        match key {
            Some(k) => {
                if entries.iter().any(|(e, _, _)| e == k) {
                    return Err(DslError::Type { pos: Pos { line: i + 1, col: 1 }, msg: format!("`{k}` given twice") });
                }
                let rest = line.split_once(':').unwrap().1;
                entries.push((k.to_string(), i + 1, rest.to_string()));
            }
            None => match entries.last_mut() {
                Some((_, _, text)) => {
                    text.push('\n');
                    text.push_str(raw);
                }
                None => {
                    return Err(DslError::Syntax {
                        line: i + 1,
                        col: 1,
                        expected: format!("one of {}", KEYS.join(", ")),
                        found: line.split_whitespace().next().unwrap_or("").to_string(),
                    })
                }
            },
        }
    }
    let mut get = |k: &str| -> Result<Option<Expr>, DslError> {
        let Some(idx) = entries.iter().position(|(e, _, _)| e == k) else { return Ok(None) };
        let (_, line, text) = entries.remove(idx);
        parse_predicate(&text, m).map(Some).map_err(|e| shift(e, line))
    };
    let missing = |k: &str| DslError::Syntax { line: 1, col: 1, expected: format!("a `{k}:` line"), found: "end of file".into() };
    let pre = get("pre")?;
    let peri = get("peri")?.ok_or_else(|| missing("peri"))?;
    let post = get("post")?.ok_or_else(|| missing("post"))?;
    Ok(InvariantFile {
        inv: Invariant { pre, peri, post },
        spec_pre: get("spec-pre")?,
        spec_peri: get("spec-peri")?,
        spec_post: get("spec-post")?,
    })
}

/// Moves positions reported inside an entry to file lines.
fn shift(e: DslError, line: usize) -> DslError {
    match e {
        DslError::Syntax { line: l, col, expected, found } => DslError::Syntax { line: line + l - 1, col, expected, found },
        DslError::Type { pos, msg } if pos.line == 0 => DslError::Type { pos: Pos { line, col: 1 }, msg },
        DslError::UnknownName { pos, name } if pos.line == 0 => DslError::UnknownName { pos: Pos { line, col: 1 }, name },
        e => e,
    }
}

/// Splits `init ; while b do body` (or a bare loop) into its parts,
/// following process references.
pub fn loop_parts<'a>(a: &'a super::Ast, m: &'a Model) -> Option<(Option<&'a super::Ast>, &'a Expr, &'a super::Ast)> {
    use super::AstKind::*;
    match &a.kind {
        While(b, body) => Some((None, b, body)),
        Seq(init, rest) => match &rest.kind {
            While(b, body) => Some((Some(init), b, body)),
            Ref(n) => {
                let (i2, b, body) = loop_parts(&m.process(n)?.body, m)?;
                i2.is_none().then_some((Some(&**init), b, body))
            }
            _ => None,
        },
        Ref(n) => loop_parts(&m.process(n)?.body, m),
        _ => None,
    }
}
