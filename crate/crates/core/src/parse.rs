//! Recursive-descent parser for polynomial and Lipschitz expressions, and the
//! line-oriented germ file format:
//!
//! ```text
//! format 1
//! kind polynomial-map        # or lipschitz-map
//! vars x y
//! component x^4 + y^5
//! component x^2*y
//! ```
//!
//! Expression grammar (whitespace-insensitive, no implicit multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*      '/' only by nonzero constants
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' INT | '^' '(' INT ')')?
//! atom   := INT | IDENT | '(' expr ')' | FUNC '(' expr (',' expr)* ')'
//! ```
//!
//! `FUNC` (`abs`, `min`, `max`) is accepted only for Lipschitz expressions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{GermError, Result};
use crate::germ::MapGerm;
use crate::lipschitz::{LipschitzExpr, LipschitzMap};
use crate::poly::Polynomial;

const MAX_EXPONENT: u32 = 512;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line, column });
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v: BigInt = s.parse().expect("digits parse as an integer");
            out.push(Token {
                tok: Tok::Int(v),
                line,
                column,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                column,
            });
        } else {
            return Err(GermError::parse(
                line,
                column,
                format!("unexpected character '{c}'"),
            ));
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col0 + chars.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [String],
    allow_functions: bool,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T> {
        Err(GermError::parse(t.line, t.column, msg))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            self.err(&t, format!("expected {what}"))
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek().clone();
            return self.err(&t, "expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<LipschitzExpr> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = LipschitzExpr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    acc = LipschitzExpr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<LipschitzExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    acc = LipschitzExpr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    let at = self.next();
                    let d = self.unary()?;
                    let c = match constant_value(&d) {
                        Some(c) if !c.is_zero() => c,
                        Some(_) => return self.err(&at, "division by zero"),
                        None => return self.err(&at, "division only by nonzero constants"),
                    };
                    acc = LipschitzExpr::Mul(
                        Box::new(acc),
                        Box::new(LipschitzExpr::Const(c.recip())),
                    );
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LipschitzExpr> {
        self.enter()?;
        let out = match self.peek().tok {
            Tok::Minus => {
                self.next();
                LipschitzExpr::Neg(Box::new(self.unary()?))
            }
            Tok::Plus => {
                self.next();
                self.unary()?
            }
            _ => self.power()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<LipschitzExpr> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let paren = self.peek().tok == Tok::LParen;
        if paren {
            self.next();
        }
        let t = self.next();
        let e = match &t.tok {
            Tok::Int(v) => match v.to_u32() {
                Some(e) if e <= MAX_EXPONENT => e,
                _ => return self.err(&t, format!("exponent larger than {MAX_EXPONENT}")),
            },
            _ => return self.err(&t, "non-negative integer exponent required"),
        };
        if paren {
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(LipschitzExpr::Pow(Box::new(base), e))
    }

    fn atom(&mut self) -> Result<LipschitzExpr> {
        let t = self.next();
        match t.tok {
            Tok::Int(ref v) => Ok(LipschitzExpr::Const(BigRational::from_integer(v.clone()))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if self.peek().tok == Tok::LParen && matches!(name.as_str(), "abs" | "min" | "max")
                {
                    if !self.allow_functions {
                        return self.err(
                            &t,
                            format!("'{name}' is only allowed in lipschitz-map expressions"),
                        );
                    }
                    return self.function(&t, name.clone());
                }
                match self.vars.iter().position(|v| v == name) {
                    Some(i) => Ok(LipschitzExpr::Var(i)),
                    None => self.err(&t, format!("unknown variable '{name}'")),
                }
            }
            Tok::End => self.err(&t, "unexpected end of expression"),
            _ => self.err(&t, "expected a number, variable or '('"),
        }
    }

    fn function(&mut self, at: &Token, name: String) -> Result<LipschitzExpr> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.expr()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "')'")?;
        let arity = if name == "abs" { 1 } else { 2 };
        if args.len() != arity {
            return self.err(at, format!("'{name}' takes {arity} argument(s)"));
        }
        let mut it = args.into_iter().map(Box::new);
        let a = it.next().expect("arity checked");
        Ok(match name.as_str() {
            "abs" => LipschitzExpr::Abs(a),
            "min" => LipschitzExpr::Min(a, it.next().expect("arity checked")),
            _ => LipschitzExpr::Max(a, it.next().expect("arity checked")),
        })
    }
}

fn constant_value(e: &LipschitzExpr) -> Option<BigRational> {
    use LipschitzExpr::*;
    match e {
        Const(c) => Some(c.clone()),
        Neg(a) => constant_value(a).map(|c| -c),
        Add(a, b) => Some(constant_value(a)? + constant_value(b)?),
        Sub(a, b) => Some(constant_value(a)? - constant_value(b)?),
        Mul(a, b) => Some(constant_value(a)? * constant_value(b)?),
        Pow(a, k) => Some(num_traits::pow(constant_value(a)?, *k as usize)),
        _ => None,
    }
}

fn parse_tree(
    text: &str,
    vars: &[String],
    allow_functions: bool,
    line: usize,
    col0: usize,
) -> Result<LipschitzExpr> {
    let toks = tokenize(text, line, col0)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        allow_functions,
        depth: 0,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return p.err(&t, "unexpected trailing input");
    }
    Ok(e)
}

/// Parses a polynomial in the named variables.
pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial> {
    parse_polynomial_at(text, vars, 1, 1)
}

fn parse_polynomial_at(
    text: &str,
    vars: &[String],
    line: usize,
    col0: usize,
) -> Result<Polynomial> {
    let tree = parse_tree(text, vars, false, line, col0)?;
    Ok(tree
        .to_polynomial(vars.len())
        .expect("function-free trees are polynomial"))
}

/// Parses a Lipschitz expression (polynomial grammar plus `abs`, `min`, `max`).
pub fn parse_lipschitz(text: &str, vars: &[String]) -> Result<LipschitzExpr> {
    parse_tree(text, vars, true, 1, 1)
}

/// Canonical text of a polynomial; `parse_polynomial(print_polynomial(p)) == p`.
pub fn print_polynomial(p: &Polynomial, vars: &[String]) -> String {
    p.to_string_with(vars)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GermKind {
    PolynomialMap,
    LipschitzMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GermFile {
    pub kind: GermKind,
    pub vars: Vec<String>,
    /// Component source text with the line it came from.
    pub components: Vec<(usize, String)>,
    polys: Vec<Polynomial>,
    exprs: Vec<LipschitzExpr>,
}

impl GermFile {
    /// The germ of a `polynomial-map` file.
    pub fn map_germ(&self) -> Result<MapGerm> {
        if self.kind != GermKind::PolynomialMap {
            return Err(GermError::structural("file is not a polynomial-map"));
        }
        MapGerm::new(self.vars.len(), self.polys.clone())
    }

    /// The numeric map; polynomial files are converted exactly.
    pub fn lipschitz_map(&self) -> Result<LipschitzMap> {
        LipschitzMap::new(self.vars.len(), self.exprs.clone())
    }
}

fn valid_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses a germ file (`format 1`).
pub fn parse_germ_file(text: &str) -> Result<GermFile> {
    let mut format_seen = false;
    let mut kind: Option<GermKind> = None;
    let mut vars: Option<Vec<String>> = None;
    let mut components: Vec<(usize, String, usize)> = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let (keyword, rest) = match trimmed.find(char::is_whitespace) {
            Some(k) => (&trimmed[..k], &trimmed[k..]),
            None => (trimmed, ""),
        };
        // 1-based column where `rest` begins
        let rest_col = indent + keyword.chars().count() + 1;
        if !format_seen && keyword != "format" {
            return Err(GermError::parse(
                line,
                indent + 1,
                "expected 'format 1' header",
            ));
        }
        match keyword {
            "format" => {
                if format_seen {
                    return Err(GermError::parse(line, indent + 1, "duplicate format line"));
                }
                if rest.trim() != "1" {
                    return Err(GermError::parse(
                        line,
                        rest_col,
                        "unsupported format version",
                    ));
                }
                format_seen = true;
            }
            "kind" => {
                if kind.is_some() {
                    return Err(GermError::parse(line, indent + 1, "duplicate kind line"));
                }
                kind = Some(match rest.trim() {
                    "polynomial-map" => GermKind::PolynomialMap,
                    "lipschitz-map" => GermKind::LipschitzMap,
                    other => {
                        return Err(GermError::parse(
                            line,
                            rest_col,
                            format!("unknown kind '{other}'"),
                        ))
                    }
                });
            }
            "vars" => {
                if vars.is_some() {
                    return Err(GermError::parse(line, indent + 1, "duplicate vars line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(GermError::parse(line, rest_col, "no variables declared"));
                }
                for (i, n) in names.iter().enumerate() {
                    if !valid_identifier(n) {
                        return Err(GermError::parse(
                            line,
                            rest_col,
                            format!("invalid variable name '{n}'"),
                        ));
                    }
                    if matches!(n.as_str(), "abs" | "min" | "max") {
                        return Err(GermError::parse(
                            line,
                            rest_col,
                            format!("reserved name '{n}'"),
                        ));
                    }
                    if names[..i].contains(n) {
                        return Err(GermError::parse(
                            line,
                            rest_col,
                            format!("duplicate variable '{n}'"),
                        ));
                    }
                }
                vars = Some(names);
            }
            "component" => {
                if vars.is_none() {
                    return Err(GermError::parse(
                        line,
                        indent + 1,
                        "component before vars line",
                    ));
                }
                components.push((line, rest.to_string(), rest_col));
            }
            other => {
                return Err(GermError::parse(
                    line,
                    indent + 1,
                    format!("unknown directive '{other}'"),
                ))
            }
        }
    }

    if !format_seen {
        return Err(GermError::parse(last_line, 1, "missing 'format 1' header"));
    }
    let kind = kind.ok_or_else(|| GermError::parse(last_line, 1, "missing kind line"))?;
    let vars = vars.ok_or_else(|| GermError::parse(last_line, 1, "missing vars line"))?;
    if components.is_empty() {
        return Err(GermError::parse(
            last_line,
            1,
            "empty map: no component lines",
        ));
    }

    let mut exprs = Vec::new();
    let mut polys = Vec::new();
    for (i, (line, src, col)) in components.iter().enumerate() {
        let tree = parse_tree(src, &vars, kind == GermKind::LipschitzMap, *line, *col)?;
        match kind {
            GermKind::PolynomialMap => {
                let p = tree.to_polynomial(vars.len()).expect("function-free");
                if !p.constant_term().is_zero() {
                    return Err(GermError::NotAGerm { component: i });
                }
                polys.push(p);
            }
            GermKind::LipschitzMap => {
                if tree.eval(&vec![0.0; vars.len()]) != 0.0 {
                    return Err(GermError::NotAGerm { component: i });
                }
            }
        }
        exprs.push(tree);
    }
    Ok(GermFile {
        kind,
        vars,
        components: components
            .into_iter()
            .map(|(l, s, _)| (l, s.trim().to_string()))
            .collect(),
        polys,
        exprs,
    })
}

/// Germ file text for a polynomial map.
pub fn write_germ_file(f: &MapGerm, vars: &[String]) -> String {
    let mut out = String::from("format 1\nkind polynomial-map\n");
    out.push_str(&format!("vars {}\n", vars.join(" ")));
    for c in f.components() {
        out.push_str(&format!("component {}\n", print_polynomial(c, vars)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn parses_simple_and_curve_polynomials() {
        let p = parse_polynomial("x^4 + y^5", &xy()).unwrap();
        assert_eq!(
            p,
            Polynomial::from_int_terms(2, &[(&[4, 0], 1), (&[0, 5], 1)])
        );
        let g = parse_polynomial("x^4 - 2*x^2*y^3 - 4*x*y^5 + y^6 + y^7", &xy()).unwrap();
        assert_eq!(
            g,
            Polynomial::from_int_terms(
                2,
                &[
                    (&[4, 0], 1),
                    (&[2, 3], -2),
                    (&[1, 5], -4),
                    (&[0, 6], 1),
                    (&[0, 7], 1)
                ]
            )
        );
    }

    #[test]
    fn rationals_parentheses_and_unary_minus() {
        let p = parse_polynomial("-3/2*x*y + (x+y)^2 - x^(2)", &xy()).unwrap();
        let q = parse_polynomial("1/2*x*y + y^2", &xy()).unwrap();
        assert_eq!(p, q);
        assert_eq!(parse_polynomial("-x^2", &xy()).unwrap().to_string(), "-x^2");
    }

    #[test]
    fn exponent_errors() {
        let e = parse_polynomial("x^(-1)", &xy()).unwrap_err();
        assert_eq!(
            e,
            GermError::parse(1, 4, "non-negative integer exponent required")
        );
        assert!(parse_polynomial("x^y", &xy()).is_err());
        assert!(parse_polynomial("x^1/2", &xy()).is_ok()); // (x^1)/2
        assert!(parse_polynomial("x^99999", &xy()).is_err());
    }

    #[test]
    fn positioned_errors() {
        let e = parse_polynomial("x + z", &xy()).unwrap_err();
        assert_eq!(e, GermError::parse(1, 5, "unknown variable 'z'"));
        let e = parse_polynomial("x y", &xy()).unwrap_err();
        assert!(matches!(e, GermError::Parse { column: 3, .. }));
        assert!(parse_polynomial("2x", &xy()).is_err());
        assert!(parse_polynomial("x/y", &xy()).is_err());
        assert!(parse_polynomial("x/0", &xy()).is_err());
        assert!(parse_polynomial("abs(x)", &xy()).is_err());
        assert!(parse_polynomial("", &xy()).is_err());
        assert!(parse_polynomial("(x", &xy()).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}x{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_polynomial(&text, &xy()).is_err());
        let text = format!("{}x", "-".repeat(5000));
        assert!(parse_polynomial(&text, &xy()).is_err());
    }

    #[test]
    fn lipschitz_functions() {
        let e = parse_lipschitz("x + abs(y)/2", &xy()).unwrap();
        assert_eq!(e.eval(&[1.0, -1.0]), 1.5);
        let m = parse_lipschitz("min(x, y) + max(x, -y)", &xy()).unwrap();
        assert_eq!(m.eval(&[2.0, 3.0]), 4.0);
        assert!(parse_lipschitz("min(x)", &xy()).is_err());
    }

    #[test]
    fn print_examples() {
        let v = xy();
        let p = Polynomial::from_int_terms(2, &[(&[4, 0], 1), (&[0, 5], 1)]);
        assert_eq!(print_polynomial(&p, &v), "x^4 + y^5");
        assert_eq!(print_polynomial(&Polynomial::zero(2), &v), "0");
    }

    #[test]
    fn germ_file_example() {
        let text = "format 1\nkind polynomial-map   # comment\nvars x y\ncomponent x^2+y^3\ncomponent x^2*y\n";
        let f = parse_germ_file(text).unwrap();
        assert_eq!(f.vars, xy());
        let g = f.map_germ().unwrap();
        assert_eq!((g.nvars(), g.ncomps()), (2, 2));
    }

    #[test]
    fn germ_file_errors() {
        let bad = "format 1\nkind polynomial-map\nvars x\ncomponent x^2 + 1\n";
        assert_eq!(
            parse_germ_file(bad).unwrap_err(),
            GermError::NotAGerm { component: 0 }
        );
        let empty = "format 1\nkind polynomial-map\nvars x\n";
        assert!(matches!(
            parse_germ_file(empty),
            Err(GermError::Parse { .. })
        ));
        let dup = "format 1\nkind polynomial-map\nvars x x\ncomponent x\n";
        assert!(matches!(
            parse_germ_file(dup),
            Err(GermError::Parse { line: 3, .. })
        ));
        let nofmt = "kind polynomial-map\nvars x\ncomponent x\n";
        assert!(parse_germ_file(nofmt).is_err());
        let badvar = "format 1\nkind polynomial-map\nvars x 1y\ncomponent x\n";
        assert!(parse_germ_file(badvar).is_err());
        let e = parse_germ_file("format 1\nkind polynomial-map\nvars x y\ncomponent x + w\n")
            .unwrap_err();
        assert_eq!(e, GermError::parse(4, 15, "unknown variable 'w'"));
    }

    #[test]
    fn lipschitz_file() {
        let text = "format 1\nkind lipschitz-map\nvars x y\ncomponent x + abs(y)/2\ncomponent y\n";
        let f = parse_germ_file(text).unwrap();
        let m = f.lipschitz_map().unwrap();
        assert_eq!(m.eval(&[1.0, -1.0]).unwrap(), vec![1.5, -1.0]);
        assert!(f.map_germ().is_err());
        let off = "format 1\nkind lipschitz-map\nvars x\ncomponent abs(x) + 1\n";
        assert!(matches!(
            parse_germ_file(off),
            Err(GermError::NotAGerm { .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let f = MapGerm::new(2, vec![parse_polynomial("x^2 + y^3", &xy()).unwrap()]).unwrap();
        let text = write_germ_file(&f, &xy());
        assert_eq!(parse_germ_file(&text).unwrap().map_germ().unwrap(), f);
    }
}
