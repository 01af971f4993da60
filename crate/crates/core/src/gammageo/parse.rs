//! Text and JSON encodings of formulas.
//!
//! Text: one formula per line, lines are conjoined, `#` starts a comment and
//! an optional `dim N` line fixes the ambient dimension. Atoms are linear
//! relations such as `2x1 - 3x2 <= 5/2`, possibly chained (`0 <= x < 1`).
//! Variables are `x`, `y`, `z` (coordinates 1–3) or a letter prefix followed
//! by a 1-based index (`x4`, `s2`). Connectives: `&`, `and`, `∧`, `,`;
//! `|`, `or`, `∨`; `!`, `not`, `¬`; parentheses; `true`, `false`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::Value;

use super::{Constraint, Formula, Rel};
use crate::error::{Error, Result};
use crate::rational::{lcm_of_denominators, parse_rational, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFormula {
    pub formula: Formula,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Var(usize),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    And,
    Or,
    Not,
    True,
    False,
    Rel(Rel),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, col });
        match c {
            _ if c.is_whitespace() => {
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '/' {
                    i += 1;
                    let dstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if dstart == i {
                        return Err(Error::malformed(lineno, i + 1, "expected a denominator"));
                    }
                }
                if i < chars.len() && chars[i] == '.' {
                    return Err(Error::malformed(lineno, i + 1, "decimal numbers are not accepted; write p/q"));
                }
                let text: String = chars[start..i].iter().collect();
                let q = parse_rational(&text).map_err(|_| Error::malformed(lineno, col, "zero denominator"))?;
                push(&mut out, Tok::Num(q));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let dstart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[dstart..i].iter().collect();
                let tok = match (word.as_str(), digits.is_empty()) {
                    ("and", true) => Tok::And,
                    ("or", true) => Tok::Or,
                    ("not", true) => Tok::Not,
                    ("true", true) => Tok::True,
                    ("false", true) => Tok::False,
                    ("x", true) => Tok::Var(0),
                    ("y", true) => Tok::Var(1),
                    ("z", true) => Tok::Var(2),
                    (_, false) => {
                        let k: usize = digits
                            .parse()
                            .map_err(|_| Error::malformed(lineno, dstart + 1, "variable index too large"))?;
                        if k == 0 {
                            return Err(Error::malformed(lineno, dstart + 1, "variable indices start at 1"));
                        }
                        Tok::Var(k - 1)
                    }
                    (w, true) => return Err(Error::malformed(lineno, col, format!("unknown identifier {w:?}"))),
                };
                push(&mut out, tok);
            }
            '+' => {
                push(&mut out, Tok::Plus);
                i += 1;
            }
            '-' | '−' => {
                push(&mut out, Tok::Minus);
                i += 1;
            }
            '*' | '·' => {
                push(&mut out, Tok::Star);
                i += 1;
            }
            '(' => {
                push(&mut out, Tok::LParen);
                i += 1;
            }
            ')' => {
                push(&mut out, Tok::RParen);
                i += 1;
            }
            '&' | '∧' | ',' => {
                push(&mut out, Tok::And);
                i += if c == '&' && chars.get(i + 1) == Some(&'&') { 2 } else { 1 };
            }
            '|' | '∨' => {
                push(&mut out, Tok::Or);
                i += if c == '|' && chars.get(i + 1) == Some(&'|') { 2 } else { 1 };
            }
            '!' | '¬' => {
                push(&mut out, Tok::Not);
                i += 1;
            }
            '≤' => {
                push(&mut out, Tok::Rel(Rel::Le));
                i += 1;
            }
            '≥' => {
                push(&mut out, Tok::Rel(Rel::Ge));
                i += 1;
            }
            '<' | '>' | '=' => {
                let eq_next = chars.get(i + 1) == Some(&'=');
                let rel = match (c, eq_next) {
                    ('<', true) => Rel::Le,
                    ('<', false) => Rel::Lt,
                    ('>', true) => Rel::Ge,
                    ('>', false) => Rel::Gt,
                    _ => Rel::Eq,
                };
                push(&mut out, Tok::Rel(rel));
                i += if eq_next { 2 } else { 1 };
            }
            _ => return Err(Error::malformed(lineno, col, format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

/// Sparse linear expression `Σ coeffs[k] x_k + constant`.
#[derive(Debug, Clone, Default)]
struct Linear {
    coeffs: BTreeMap<usize, Rational>,
    constant: Rational,
}

/// An atom before the ambient dimension is known.
#[derive(Debug, Clone)]
struct RawAtom {
    coeffs: BTreeMap<usize, Rational>,
    rel: Rel,
    rhs: Rational,
}

#[derive(Debug, Clone)]
enum Raw {
    True,
    False,
    Atom(RawAtom),
    Not(Box<Raw>),
    And(Vec<Raw>),
    Or(Vec<Raw>),
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::malformed(self.line, self.col(), msg)
    }

    fn formula(&mut self) -> Result<Raw> {
        let mut parts = vec![self.conj()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Raw::Or(parts) })
    }

    fn conj(&mut self) -> Result<Raw> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Raw::And(parts) })
    }

    fn unary(&mut self) -> Result<Raw> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(Raw::True)
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(Raw::False)
            }
            _ => self.chain(),
        }
    }

    fn chain(&mut self) -> Result<Raw> {
        let mut lhs = self.linear()?;
        let mut atoms = Vec::new();
        while let Some(Tok::Rel(rel)) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.linear()?;
            let mut coeffs = lhs.coeffs.clone();
            for (k, v) in &rhs.coeffs {
                *coeffs.entry(*k).or_insert_with(Rational::zero) -= v;
            }
            coeffs.retain(|_, v| !v.is_zero());
            atoms.push(Raw::Atom(RawAtom {
                coeffs,
                rel,
                rhs: &rhs.constant - &lhs.constant,
            }));
            lhs = rhs;
        }
        match atoms.len() {
            0 => Err(self.err("expected a relation")),
            1 => Ok(atoms.pop().unwrap()),
            _ => Ok(Raw::And(atoms)),
        }
    }

    fn linear(&mut self) -> Result<Linear> {
        let mut out = Linear::default();
        let mut sign = Rational::from_integer(1.into());
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                sign = -sign;
            }
            Some(Tok::Plus) => self.pos += 1,
            _ => {}
        }
        loop {
            self.term(&mut out, &sign)?;
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    sign = Rational::from_integer(1.into());
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    sign = Rational::from_integer((-1).into());
                }
                _ => return Ok(out),
            }
        }
    }

    fn term(&mut self, out: &mut Linear, sign: &Rational) -> Result<()> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Star) {
                    self.pos += 1;
                    let Some(Tok::Var(k)) = self.peek().cloned() else {
                        return Err(self.err("expected a variable after '*'"));
                    };
                    self.pos += 1;
                    *out.coeffs.entry(k).or_insert_with(Rational::zero) += sign * q;
                } else if let Some(Tok::Var(k)) = self.peek().cloned() {
                    self.pos += 1;
                    *out.coeffs.entry(k).or_insert_with(Rational::zero) += sign * q;
                } else {
                    out.constant += sign * q;
                }
                Ok(())
            }
            Some(Tok::Var(k)) => {
                self.pos += 1;
                *out.coeffs.entry(k).or_insert_with(Rational::zero) += sign.clone();
                Ok(())
            }
            _ => Err(self.err("expected a number or a variable")),
        }
    }
}

fn max_var(r: &Raw) -> Option<usize> {
    match r {
        Raw::True | Raw::False => None,
        Raw::Atom(a) => a.coeffs.keys().next_back().copied(),
        Raw::Not(f) => max_var(f),
        Raw::And(fs) | Raw::Or(fs) => fs.iter().filter_map(max_var).max(),
    }
}

fn build(r: Raw, dim: usize) -> Formula {
    match r {
        Raw::True => Formula::True,
        Raw::False => Formula::False,
        Raw::Atom(a) => {
            let mut dense = vec![Rational::zero(); dim];
            for (k, v) in a.coeffs {
                dense[k] = v;
            }
            let l = Rational::from_integer(lcm_of_denominators(&dense));
            let ints: Vec<Integer> = dense.iter().map(|q| (q * &l).to_integer()).collect();
            Formula::Atom(Constraint::new(ints, a.rel, a.rhs * l))
        }
        Raw::Not(f) => Formula::Not(Box::new(build(*f, dim))),
        Raw::And(fs) => Formula::And(fs.into_iter().map(|f| build(f, dim)).collect()),
        Raw::Or(fs) => Formula::Or(fs.into_iter().map(|f| build(f, dim)).collect()),
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Raw> {
    let toks = lex(line, lineno)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        line: lineno,
        end_col: line.chars().count() + 1,
    };
    let f = p.formula()?;
    if p.pos != toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

fn parse_dim_line(line: &str, lineno: usize) -> Result<Option<usize>> {
    let mut words = line.split_whitespace();
    if words.next() != Some("dim") {
        return Ok(None);
    }
    let Some(n) = words.next() else {
        return Err(Error::malformed(lineno, line.len() + 1, "expected a dimension after 'dim'"));
    };
    let col = line.find(n).unwrap_or(0) + 1;
    let n: usize = n.parse().map_err(|_| Error::malformed(lineno, col, "dimension must be a nonnegative integer"))?;
    if words.next().is_some() {
        return Err(Error::malformed(lineno, col, "unexpected input after dimension"));
    }
    Ok(Some(n))
}

/// Parses the text format. Without a `dim` line the dimension is the largest
/// variable index used.
pub fn parse_formula(text: &str) -> Result<ParsedFormula> {
    parse_formula_in(text, None)
}

/// Like [`parse_formula`], with the dimension fixed by the caller unless the
/// text has its own `dim` line.
pub fn parse_formula_in(text: &str, ambient: Option<usize>) -> Result<ParsedFormula> {
    let mut parts = Vec::new();
    let mut dim: Option<(usize, usize)> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(n) = parse_dim_line(line, lineno)? {
            if dim.is_some() {
                return Err(Error::malformed(lineno, 1, "dimension given twice"));
            }
            dim = Some((n, lineno));
            continue;
        }
        parts.push((parse_line(line, lineno)?, lineno));
    }
    let used = parts.iter().filter_map(|(r, _)| max_var(r)).max().map_or(0, |k| k + 1);
    let dim = match dim {
        Some((n, lineno)) if used > n => {
            return Err(Error::malformed(lineno, 1, format!("variable x{used} exceeds dimension {n}")));
        }
        Some((n, _)) => n,
        None => match ambient {
            Some(n) if used > n => {
                return Err(Error::malformed(1, 1, format!("variable x{used} exceeds dimension {n}")));
            }
            Some(n) => n,
            None => used,
        },
    };
    let formula = match parts.len() {
        0 => Formula::True,
        1 => build(parts.pop().unwrap().0, dim),
        _ => Formula::And(parts.into_iter().map(|(r, _)| build(r, dim)).collect()),
    };
    Ok(ParsedFormula { formula, dim })
}

fn json_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::malformed(0, 0, format!("{path}: {msg}"))
}

fn raw_from_json(v: &Value, path: &str) -> Result<Raw> {
    match v {
        Value::Bool(true) => Ok(Raw::True),
        Value::Bool(false) => Ok(Raw::False),
        Value::String(s) => {
            let mut lines = s.lines();
            let line = lines.next().unwrap_or("");
            if lines.next().is_some() {
                return Err(json_err(path, "formula strings must be a single line"));
            }
            parse_line(line, 1).map_err(|e| json_err(path, e))
        }
        Value::Object(map) => {
            if let Some(items) = map.get("and").or_else(|| map.get("or")) {
                let Value::Array(items) = items else {
                    return Err(json_err(path, "expected an array"));
                };
                let key = if map.contains_key("and") { "and" } else { "or" };
                if map.len() != 1 {
                    return Err(json_err(path, format!("unexpected keys next to {key:?}")));
                }
                let parts = items
                    .iter()
                    .enumerate()
                    .map(|(i, f)| raw_from_json(f, &format!("{path}.{key}[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(if key == "and" { Raw::And(parts) } else { Raw::Or(parts) });
            }
            if let Some(f) = map.get("not") {
                if map.len() != 1 {
                    return Err(json_err(path, "unexpected keys next to \"not\""));
                }
                return Ok(Raw::Not(Box::new(raw_from_json(f, &format!("{path}.not"))?)));
            }
            atom_from_json(map, path)
        }
        _ => Err(json_err(path, "expected a formula object, a string or a boolean")),
    }
}

fn rational_from_json(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).map_err(|_| json_err(path, "bad number"))
        }
        Value::String(s) => parse_rational(s).map_err(|_| json_err(path, format!("not a rational: {s:?}"))),
        _ => Err(json_err(path, "expected an integer or a \"p/q\" string")),
    }
}

fn atom_from_json(map: &serde_json::Map<String, Value>, path: &str) -> Result<Raw> {
    for k in map.keys() {
        if !matches!(k.as_str(), "coeffs" | "rel" | "rhs") {
            return Err(json_err(path, format!("unknown key {k:?}")));
        }
    }
    let Some(Value::Array(cs)) = map.get("coeffs") else {
        return Err(json_err(path, "missing \"coeffs\" array"));
    };
    let mut coeffs = BTreeMap::new();
    for (i, c) in cs.iter().enumerate() {
        let q = rational_from_json(c, &format!("{path}.coeffs[{i}]"))?;
        if !q.is_integer() {
            return Err(json_err(path, "coefficients must be integers"));
        }
        if !q.is_zero() {
            coeffs.insert(i, q);
        }
    }
    let rel = match map.get("rel") {
        Some(r) => serde_json::from_value::<Rel>(r.clone())
            .or_else(|e| match r.as_str() {
                Some("==") => Ok(Rel::Eq),
                Some("≤") => Ok(Rel::Le),
                Some("≥") => Ok(Rel::Ge),
                _ => Err(e),
            })
            .map_err(|_| json_err(path, "rel must be one of <, <=, =, >=, >"))?,
        None => return Err(json_err(path, "missing \"rel\"")),
    };
    let rhs = match map.get("rhs") {
        Some(v) => rational_from_json(v, &format!("{path}.rhs"))?,
        None => return Err(json_err(path, "missing \"rhs\"")),
    };
    // a trailing zero coefficient still fixes the dimension
    let width = cs.len();
    let mut atom = RawAtom { coeffs, rel, rhs };
    if width > 0 && !atom.coeffs.contains_key(&(width - 1)) {
        atom.coeffs.insert(width - 1, Rational::zero());
    }
    Ok(Raw::Atom(atom))
}

/// Parses the JSON mirror of the text format: `{"and": […]}`, `{"or": […]}`,
/// `{"not": f}`, `true`/`false`, `{"coeffs": […], "rel": "<=", "rhs": "5/2"}`
/// or a one-line text formula. `dim` overrides the inferred dimension.
pub fn formula_from_json(v: &Value, dim: Option<usize>) -> Result<ParsedFormula> {
    let raw = raw_from_json(v, "$")?;
    let used = max_var(&raw).map_or(0, |k| k + 1);
    let dim = match dim {
        Some(n) if used > n => return Err(json_err("$", format!("formula uses {used} coordinates, dimension is {n}"))),
        Some(n) => n,
        None => used,
    };
    Ok(ParsedFormula {
        formula: build(raw, dim),
        dim,
    })
}
