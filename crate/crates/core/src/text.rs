//! Textual rule syntax.
//!
//! ```text
//! wif -> BLUE
//! x1 fep -> x1 x1
//! u1 zup x2 -> u1 x2
//! ```
//!
//! Slot names are a kind letter (`u` token, `x` string) followed by digits.
//! Names are matched between the two sides by spelling, so `u1 zup x1 -> u1 x1`
//! is accepted and means the same as `u1 zup x2 -> u1 x2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grammar::{validate_grammar, Grammar, Rule, RuleShape, SlotKind};
use crate::symbols::Alphabet;

struct Token<'s> {
    text: &'s str,
    column: usize,
}

fn tokens(s: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    fn flush<'s>(s: &'s str, start: &mut Option<(usize, usize)>, end: usize, out: &mut Vec<Token<'s>>) {
        if let Some((b, c)) = start.take() {
            out.push(Token {
                text: &s[b..end],
                column: c + 1,
            });
        }
    }
    let mut col = 0;
    while col < chars.len() {
        let (byte, ch) = chars[col];
        if ch == '-' && chars.get(col + 1).is_some_and(|&(_, n)| n == '>') {
            flush(s, &mut start, byte, &mut out);
            out.push(Token {
                text: &s[byte..byte + 2],
                column: col + 1,
            });
            col += 2;
            continue;
        }
        if ch.is_whitespace() {
            flush(s, &mut start, byte, &mut out);
        } else if start.is_none() {
            start = Some((byte, col));
        }
        col += 1;
    }
    flush(s, &mut start, s.len(), &mut out);
    out
}

fn slot_kind(name: &str) -> Option<SlotKind> {
    let mut chars = name.chars();
    let kind = match chars.next()? {
        'u' => SlotKind::Token,
        'x' => SlotKind::String,
        _ => return None,
    };
    let digits = chars.as_str();
    (!digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())).then_some(kind)
}

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::RuleSyntax {
        column,
        message: message.into(),
    }
}

/// Parses a single rule. Alphabet membership is not checked here.
pub fn parse_rule(line: &str) -> Result<Rule> {
    let toks = tokens(line);
    let Some(arrow) = toks.iter().position(|t| t.text == "->") else {
        return Err(syntax(line.chars().count() + 1, "expected `->`"));
    };
    if let Some(extra) = toks[arrow + 1..].iter().find(|t| t.text == "->") {
        return Err(syntax(extra.column, "second `->`"));
    }
    let (lhs, rhs) = (&toks[..arrow], &toks[arrow + 1..]);
    let arrow_col = toks[arrow].column;
    if rhs.is_empty() {
        return Err(syntax(arrow_col + 2, "empty right-hand side"));
    }

    let (slots, word): (Vec<&Token>, &Token) = match lhs {
        [] => return Err(syntax(arrow_col, "empty left-hand side")),
        [w] => {
            if slot_kind(w.text).is_some() {
                return Err(syntax(w.column, "primitive rule label looks like a slot"));
            }
            if rhs.len() != 1 {
                return Err(syntax(rhs[1].column, "primitive rule maps to exactly one color"));
            }
            return Ok(Rule::primitive(w.text, rhs[0].text));
        }
        [s, w] => (vec![s], w),
        [s1, w, s2] => (vec![s1, s2], w),
        [.., t] => return Err(syntax(t.column, "at most two slots around the function word")),
    };
    if slot_kind(word.text).is_some() {
        return Err(syntax(word.column, "function word missing between slots"));
    }
    let mut kinds = Vec::with_capacity(slots.len());
    for (i, s) in slots.iter().enumerate() {
        let kind = slot_kind(s.text)
            .ok_or_else(|| syntax(s.column, format!("`{}` is not a slot name", s.text)))?;
        if slots[..i].iter().any(|p| p.text == s.text) {
            return Err(syntax(s.column, format!("slot `{}` bound twice", s.text)));
        }
        kinds.push(kind);
    }
    let mut refs = Vec::with_capacity(rhs.len());
    for t in rhs {
        let pos = slots
            .iter()
            .position(|s| s.text == t.text)
            .ok_or_else(|| syntax(t.column, format!("`{}` is not bound on the left-hand side", t.text)))?;
        refs.push(pos as u8 + 1);
    }
    Ok(Rule::function(word.text, RuleShape::new(kinds, refs)))
}

/// Parses and validates a grammar, one rule per line. Blank lines are skipped.
pub fn parse_grammar<S: AsRef<str>>(lines: &[S], alphabet: Arc<Alphabet>) -> Result<Grammar> {
    let mut rules = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        let rule = parse_rule(line).map_err(|e| match e {
            Error::RuleSyntax { column, message } => Error::Parse {
                line: i + 1,
                column,
                message,
            },
            other => other,
        })?;
        rules.push(rule);
    }
    let g = Grammar::new(alphabet, rules);
    let violations = validate_grammar(&g);
    if violations.is_empty() {
        Ok(g)
    } else {
        Err(Error::InvalidGrammar(violations))
    }
}

/// Parses a whole grammar from newline separated text.
pub fn parse_grammar_text(text: &str, alphabet: Arc<Alphabet>) -> Result<Grammar> {
    let lines: Vec<&str> = text.lines().collect();
    parse_grammar(&lines, alphabet)
}

pub fn write_grammar(g: &Grammar) -> Vec<String> {
    g.rules().iter().map(|r| r.to_string()).collect()
}

/// Parses a rule whose label and colors must belong to `alphabet`.
pub fn parse_rule_in(line: &str, alphabet: &Alphabet) -> Result<Rule> {
    let rule = parse_rule(line)?;
    if alphabet.word_index(rule.word()).is_none() {
        return Err(Error::UnknownWord(rule.word().clone()));
    }
    if let Rule::Primitive { color, .. } = &rule {
        if alphabet.color_index(color).is_none() {
            return Err(Error::UnknownColor(color.clone()));
        }
    }
    Ok(rule)
}
