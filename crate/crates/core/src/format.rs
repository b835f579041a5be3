//! Grammar text format.
//!
//! ```text
//! # optional comment lines
//! SLP <n> <root-id>
//! 0 -> 'a'
//! 1 -> '\x0a'
//! 2 -> 0 1
//! ```
//!
//! Ids are dense in 0..n-1 but lines may appear in any order; if a file
//! references forward, rules are renumbered topologically on read. Terminal
//! payloads are a single UTF-8 scalar in quotes or a `\xNN` byte escape;
//! quote and backslash are always written escaped.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::slp::{Rule, Slp, SlpError, Symbol};

#[derive(Debug)]
pub enum GrammarIoError {
    Parse { line: usize, msg: String },
    UnknownSymbol { line: usize, id: u64 },
    Io(io::Error),
    Invalid(SlpError),
}

impl fmt::Display for GrammarIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarIoError::Parse { line, msg } => write!(f, "parse error on line {line}: {msg}"),
            GrammarIoError::UnknownSymbol { line, id } => {
                write!(f, "line {line} references unknown symbol {id}")
            }
            GrammarIoError::Io(e) => write!(f, "io error: {e}"),
            GrammarIoError::Invalid(e) => write!(f, "grammar invalid: {e}"),
        }
    }
}

impl std::error::Error for GrammarIoError {}

impl From<io::Error> for GrammarIoError {
    fn from(e: io::Error) -> Self {
        GrammarIoError::Io(e)
    }
}

/// Renders one grammar in the text format.
pub fn format_grammar(slp: &Slp) -> String {
    let mut out = String::new();
    out.push_str(&format!("SLP {} {}\n", slp.num_rules(), slp.root()));
    for (i, rule) in slp.rules().iter().enumerate() {
        match *rule {
            Rule::Terminal(c) => {
                out.push_str(&format!("{i} -> '{}'\n", escape_code(c)));
            }
            Rule::Pair(l, r) => out.push_str(&format!("{i} -> {l} {r}\n")),
        }
    }
    out
}

fn escape_code(c: u32) -> String {
    match c {
        0x27 | 0x5c => format!("\\x{c:02x}"),
        0x20..=0x7e => char::from_u32(c).unwrap().to_string(),
        0..=0xff => format!("\\x{c:02x}"),
        _ => match char::from_u32(c) {
            Some(ch) => ch.to_string(),
            // Codes with no scalar form only occur in hand-built grammars;
            // fall back to a wide escape the parser also accepts.
            None => format!("\\x{c:08x}"),
        },
    }
}

pub fn write_grammar(slp: &Slp, path: &Path) -> Result<(), GrammarIoError> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_grammar(slp).as_bytes())?;
    Ok(())
}

pub fn read_grammar(path: &Path) -> Result<Slp, GrammarIoError> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    parse_grammar(&text)
}

/// Parses the text format. Line numbers in errors are 1-based.
pub fn parse_grammar(text: &str) -> Result<Slp, GrammarIoError> {
    enum Raw {
        Terminal(u32),
        Pair(u64, u64),
    }

    let parse_err = |line: usize, msg: &str| GrammarIoError::Parse {
        line,
        msg: msg.to_string(),
    };

    let mut header: Option<(usize, u64, u64)> = None;
    let mut raw: Vec<Option<(usize, Raw)>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header.is_none() {
            let mut parts = trimmed.split_whitespace();
            if parts.next() != Some("SLP") {
                return Err(parse_err(lineno, "expected header `SLP <n> <root>`"));
            }
            let n: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "bad rule count in header"))?;
            let root: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "bad root id in header"))?;
            if parts.next().is_some() {
                return Err(parse_err(lineno, "trailing tokens after header"));
            }
            if n == 0 {
                return Err(parse_err(lineno, "grammar must have at least one rule"));
            }
            raw = (0..n).map(|_| None).collect();
            header = Some((lineno, n, root));
            continue;
        }
        let (_, n, _) = header.unwrap();

        let (lhs, rhs) = trimmed
            .split_once("->")
            .ok_or_else(|| parse_err(lineno, "expected `<id> -> ...`"))?;
        let id: u64 = lhs
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, "bad rule id"))?;
        if id >= n {
            return Err(GrammarIoError::UnknownSymbol { line: lineno, id });
        }
        let rhs = rhs.trim();
        let entry = if let Some(body) = rhs.strip_prefix('\'') {
            let body = body
                .strip_suffix('\'')
                .ok_or_else(|| parse_err(lineno, "unterminated character literal"))?;
            Raw::Terminal(
                parse_char(body).ok_or_else(|| parse_err(lineno, "bad character literal"))?,
            )
        } else {
            let mut parts = rhs.split_whitespace();
            let l: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "expected two child ids"))?;
            let r: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "expected two child ids"))?;
            if parts.next().is_some() {
                return Err(parse_err(lineno, "trailing tokens after rule"));
            }
            for child in [l, r] {
                if child >= n {
                    return Err(GrammarIoError::UnknownSymbol {
                        line: lineno,
                        id: child,
                    });
                }
            }
            Raw::Pair(l, r)
        };
        if raw[id as usize].is_some() {
            return Err(parse_err(lineno, "duplicate rule id"));
        }
        raw[id as usize] = Some((lineno, entry));
    }

    let (header_line, n, root) = header.ok_or_else(|| parse_err(1, "missing `SLP` header"))?;
    if root >= n {
        return Err(GrammarIoError::UnknownSymbol {
            line: header_line,
            id: root,
        });
    }
    let mut rules_raw = Vec::with_capacity(n as usize);
    for (id, slot) in raw.into_iter().enumerate() {
        match slot {
            Some((_, r)) => rules_raw.push(r),
            None => return Err(parse_err(header_line, &format!("rule {id} never defined"))),
        }
    }

    // Renumber topologically so files may list rules in any order.
    let child_table: Vec<Option<(u64, u64)>> = rules_raw
        .iter()
        .map(|r| match r {
            Raw::Terminal(_) => None,
            Raw::Pair(l, r) => Some((*l, *r)),
        })
        .collect();
    let order =
        topo_order(&child_table).ok_or(GrammarIoError::Invalid(SlpError::CyclicReference {
            rule: 0,
            referenced: 0,
        }))?;
    let mut new_id = vec![0u32; rules_raw.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new as u32;
    }
    let mut rules = Vec::with_capacity(rules_raw.len());
    for &old in &order {
        rules.push(match rules_raw[old] {
            Raw::Terminal(c) => Rule::Terminal(c),
            Raw::Pair(l, r) => Rule::Pair(Symbol(new_id[l as usize]), Symbol(new_id[r as usize])),
        });
    }
    let slp = Slp::new(rules, Symbol(new_id[root as usize])).map_err(GrammarIoError::Invalid)?;
    slp.validate().map_err(GrammarIoError::Invalid)?;
    Ok(slp)
}

fn parse_char(body: &str) -> Option<u32> {
    if let Some(hex) = body.strip_prefix("\\x") {
        if hex.is_empty() || hex.len() > 8 {
            return None;
        }
        return u32::from_str_radix(hex, 16).ok();
    }
    let mut chars = body.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    Some(c as u32)
}

fn topo_order(children: &[Option<(u64, u64)>]) -> Option<Vec<usize>> {
    let n = children.len();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if state[start] == 2 {
            continue;
        }
        let mut stack = vec![(start, false)];
        while let Some((v, children_done)) = stack.pop() {
            if children_done {
                state[v] = 2;
                order.push(v);
                continue;
            }
            match state[v] {
                2 => continue,
                1 => return None, // cycle
                _ => {}
            }
            state[v] = 1;
            stack.push((v, true));
            if let Some((l, r)) = children[v] {
                for c in [r, l] {
                    let c = c as usize;
                    if state[c] == 0 {
                        stack.push((c, false));
                    } else if state[c] == 1 {
                        return None;
                    }
                }
            }
        }
    }
    Some(order)
}
