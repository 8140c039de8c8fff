//! Concrete syntax for generalized polynomials.
//!
//! Grammar:
//!
//! ```text
//! expr   := "-"? term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" nat)?
//! atom   := var | coeff | int | "(" expr ")"
//! var    := "X" nat? | "x" | "xinv"
//! coeff  := basis-name | "[" int ("," int)* "]"
//! ```
//!
//! Juxtaposition is not multiplication; `*` is mandatory, which keeps
//! noncommutative products unambiguous. Integer atoms mean `n * 1` reduced
//! mod p. `X` is the first variable and `Xk` is the k-th (1-based). The
//! names `x` and `xinv` are reserved for solver templates, where they denote
//! the identity argument and its inverse; outside templates they are
//! rejected. An optional leading `-` negates the first term.
//!
//! Printing produces canonical text: terms in normal-form order, scalars as
//! residues in `[0, p)`, basis labels where a coefficient is a scalar
//! multiple of a single basis vector, and bracketed coordinate vectors
//! otherwise. `print -> parse` is the identity on canonical forms.

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::genpoly::GenPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Int(u64),
    Ident(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut bump = |i: &mut usize| {
            if chars[*i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            *i += 1;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump(&mut i),
            '+' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::Plus, line: tline, col: tcol });
            }
            '-' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::Minus, line: tline, col: tcol });
            }
            '*' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::Star, line: tline, col: tcol });
            }
            '^' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::Caret, line: tline, col: tcol });
            }
            '(' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::LParen, line: tline, col: tcol });
            }
            ')' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::RParen, line: tline, col: tcol });
            }
            '[' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::LBracket, line: tline, col: tcol });
            }
            ']' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::RBracket, line: tline, col: tcol });
            }
            ',' => {
                bump(&mut i);
                out.push(Spanned { tok: Tok::Comma, line: tline, col: tcol });
            }
            '0'..='9' => {
                let mut n: u64 = 0;
                while i < chars.len() {
                    if let Some(v) = chars[i].to_digit(10) {
                        n = n.checked_mul(10).and_then(|n| n.checked_add(v as u64)).ok_or(
                            Error::Parse {
                                line: tline,
                                col: tcol,
                                msg: "integer literal too large".into(),
                            },
                        )?;
                        bump(&mut i);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Int(n), line: tline, col: tcol });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump(&mut i);
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tline, col: tcol });
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarMode {
    /// Variables are X, X1..Xm; x/xinv are rejected.
    Indexed,
    /// Solver templates: x is variable 0, xinv is variable 1; X* rejected.
    Solver,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    algebra: &'a FiniteAlgebra,
    num_vars: usize,
    mode: VarMode,
    end_line: usize,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn parse_expr(&mut self) -> Result<GenPoly> {
        let negate_first = matches!(self.peek(), Some(Tok::Minus));
        if negate_first {
            self.pos += 1;
        }
        let mut acc = self.parse_term()?;
        if negate_first {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.parse_term()?;
                    acc = acc.sub(&t)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<GenPoly> {
        let mut acc = self.parse_factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.pos += 1;
            let f = self.parse_factor()?;
            acc = acc.mul(&f)?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<GenPoly> {
        let atom = self.parse_atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Int(n)) => {
                    let n = *n;
                    self.pos += 1;
                    atom.pow(n)
                }
                _ => Err(self.err("expected a non-negative integer exponent after '^'")),
            }
        } else {
            Ok(atom)
        }
    }

    fn parse_atom(&mut self) -> Result<GenPoly> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut coords = Vec::new();
                loop {
                    match self.next() {
                        Some(Tok::Int(n)) => coords.push(n),
                        _ => return Err(self.err("expected an integer coordinate")),
                    }
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RBracket) => break,
                        _ => return Err(self.err("expected ',' or ']'")),
                    }
                }
                if coords.len() != self.algebra.dim() {
                    return Err(self.err(format!(
                        "coordinate vector has length {}, algebra dimension is {}",
                        coords.len(),
                        self.algebra.dim()
                    )));
                }
                let elt = self.algebra.from_coords(coords)?;
                GenPoly::constant(&elt, self.num_vars)
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                GenPoly::constant(&self.algebra.scalar(n), self.num_vars)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.resolve_ident(&name)
            }
            _ => Err(self.err("expected a variable, coefficient, integer or '('")),
        }
    }

    fn resolve_ident(&mut self, name: &str) -> Result<GenPoly> {
        // Variable forms first; everything else is a basis label.
        if self.mode == VarMode::Solver {
            match name {
                "x" => return GenPoly::variable(self.algebra, 0, self.num_vars),
                "xinv" => return GenPoly::variable(self.algebra, 1, self.num_vars),
                _ => {}
            }
            if name.starts_with('X')
                && (name.len() == 1 || name[1..].chars().all(|c| c.is_ascii_digit()))
            {
                return Err(self.err("solver templates use the variables x and xinv"));
            }
        } else {
            if name == "x" || name == "xinv" {
                return Err(self.err(format!(
                    "'{name}' is reserved for solver templates; variables are X, X1..X{}",
                    self.num_vars
                )));
            }
            if let Some(rest) = name.strip_prefix('X') {
                if rest.is_empty() {
                    if self.num_vars == 0 {
                        return Err(self.err("expression has no variables"));
                    }
                    return GenPoly::variable(self.algebra, 0, self.num_vars);
                }
                if rest.chars().all(|c| c.is_ascii_digit()) {
                    let idx: usize =
                        rest.parse().map_err(|_| self.err("variable index too large"))?;
                    if idx == 0 || idx > self.num_vars {
                        return Err(self.err(format!(
                            "variable X{idx} out of range: expression has {} variable(s)",
                            self.num_vars
                        )));
                    }
                    return GenPoly::variable(self.algebra, idx - 1, self.num_vars);
                }
            }
        }
        let labels = self.algebra.basis_labels();
        let hits: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == name).collect();
        match hits.len() {
            0 => Err(self.err(format!("unknown basis name '{name}'"))),
            1 => GenPoly::constant(&self.algebra.basis_elem(hits[0]), self.num_vars),
            _ => Err(self.err(format!("ambiguous basis name '{name}'"))),
        }
    }
}

fn parse_with_mode(
    text: &str,
    algebra: &FiniteAlgebra,
    num_vars: usize,
    mode: VarMode,
) -> Result<GenPoly> {
    let toks = lex(text)?;
    let (end_line, end_col) = {
        let mut line = 1;
        let mut col = 1;
        for c in text.chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    };
    let mut p = Parser { toks, pos: 0, algebra, num_vars, mode, end_line, end_col };
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let g = p.parse_expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(g)
}

/// Parse an expression in the variables X, X1..Xm over the given algebra.
pub fn parse_expr(text: &str, algebra: &FiniteAlgebra, num_vars: usize) -> Result<GenPoly> {
    parse_with_mode(text, algebra, num_vars, VarMode::Indexed)
}

/// Parse a solver-template expression in the reserved variables x (slot 0)
/// and xinv (slot 1).
pub fn parse_solver_expr(text: &str, algebra: &FiniteAlgebra) -> Result<GenPoly> {
    parse_with_mode(text, algebra, 2, VarMode::Solver)
}

/// Number of variables an expression mentions, for callers that infer `m`
/// instead of fixing it: X counts as 1, Xk as k.
pub fn infer_num_vars(text: &str) -> Result<usize> {
    let toks = lex(text)?;
    let mut m = 0usize;
    for s in &toks {
        if let Tok::Ident(name) = &s.tok {
            if let Some(rest) = name.strip_prefix('X') {
                if rest.is_empty() {
                    m = m.max(1);
                } else if rest.chars().all(|c| c.is_ascii_digit()) {
                    if let Ok(k) = rest.parse::<usize>() {
                        m = m.max(k);
                    }
                }
            }
        }
    }
    Ok(m)
}

fn label_is_printable(label: &str) -> bool {
    let mut chars = label.chars();
    let Some(first) = chars.next() else { return false };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    // Avoid anything the parser would read as a variable.
    if label == "x" || label == "xinv" {
        return false;
    }
    if let Some(rest) = label.strip_prefix('X') {
        if rest.is_empty() || rest.chars().all(|c| c.is_ascii_digit()) {
            return false;
        }
    }
    true
}

/// Render one coefficient as a factor string: a scalar, `label`, `n*label`,
/// or a bracketed coordinate vector.
fn coeff_str(elt: &Element) -> String {
    let a = elt.algebra();
    for c in 0..a.p() {
        if elt == &a.scalar(c) {
            return format!("{c}");
        }
    }
    let support: Vec<usize> = (0..a.dim()).filter(|&i| elt.coords()[i] != 0).collect();
    if support.len() == 1 {
        let i = support[0];
        let label = &a.basis_labels()[i];
        if label_is_printable(label)
            && a.basis_labels().iter().filter(|l| *l == label).count() == 1
        {
            let c = elt.coords()[i];
            return if c == 1 { label.clone() } else { format!("{c}*{label}") };
        }
    }
    let coords: Vec<String> = elt.coords().iter().map(|c| c.to_string()).collect();
    format!("[{}]", coords.join(","))
}

fn var_str(v: usize, run: usize, num_vars: usize, mode: VarMode) -> String {
    let name = match mode {
        VarMode::Solver => {
            if v == 0 {
                "x".to_string()
            } else {
                "xinv".to_string()
            }
        }
        VarMode::Indexed => {
            if num_vars <= 1 {
                "X".to_string()
            } else {
                format!("X{}", v + 1)
            }
        }
    };
    if run > 1 {
        format!("{name}^{run}")
    } else {
        name
    }
}

fn print_with_mode(g: &GenPoly, mode: VarMode) -> String {
    if g.is_zero_formal() {
        return "0".to_string();
    }
    let a = g.algebra();
    let one = a.one();
    let mut terms = Vec::new();
    for m in g.terms() {
        let coeffs = m.coeffs();
        let vars = m.vars();
        let mut parts: Vec<String> = Vec::new();
        if vars.is_empty() {
            parts.push(coeff_str(&coeffs[0]));
        } else {
            if coeffs[0] != one {
                parts.push(coeff_str(&coeffs[0]));
            }
            let mut t = 0;
            while t < vars.len() {
                let v = vars[t];
                let mut run = 1;
                while t + run < vars.len() && vars[t + run] == v && coeffs[t + run] == one {
                    run += 1;
                }
                parts.push(var_str(v, run, g.num_vars(), mode));
                t += run;
                if coeffs[t] != one {
                    parts.push(coeff_str(&coeffs[t]));
                }
            }
        }
        if parts.is_empty() {
            parts.push("1".to_string());
        }
        terms.push(parts.join("*"));
    }
    terms.join(" + ")
}

/// Canonical textual form; parses back to a polynomial with identical
/// canonical table.
pub fn print_genpoly(g: &GenPoly) -> String {
    print_with_mode(g, VarMode::Indexed)
}

/// Canonical textual form in solver-template variables x/xinv.
pub fn print_solver_expr(g: &GenPoly) -> String {
    print_with_mode(g, VarMode::Solver)
}
