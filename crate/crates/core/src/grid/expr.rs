//! A small expression language for building fields.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := atom ('^' factor)?
//! atom    := number | ident | ident '(' args ')' | '(' expr ')'
//! arg     := expr | '[' expr (',' expr)* ']'
//! ```
//!
//! Identifiers: `x y z` (or `x1 x2 x3`) for coordinates, `r` for `|x|`, `pi`, `e`.
//! Functions: `abs(f)`, `pow(f, p)`, `exp(f)`, `sqrt(f)`, `sin(f)`, `cos(f)`, `gaussian(s)` = `exp(-|x|^2/s^2)`,
//! `ball_indicator(c, r)` = `1` on `|x - c| < r`, `box_indicator(lo, hi)` = `1` on
//! `lo <= x_i < hi` for every axis. Centers and corners are either one scalar used
//! on every axis or a bracketed vector.

use super::{GridSpec, SampledField, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord { axis: usize, pos: usize },
    Radius,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Gaussian(Box<Expr>),
    Ball { center: Point, radius: Box<Expr> },
    Box { lo: Point, hi: Point },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Scalar(Box<Expr>),
    Vector(Vec<Expr>, usize),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, tokens: tokenize(src)?, at: 0 };
        let e = p.expr()?;
        match p.peek() {
            Tok::End => Ok(e),
            _ => Err(p.error("unexpected trailing input")),
        }
    }

    /// Largest coordinate axis referenced, with its source position.
    fn max_axis(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        self.visit(&mut |e| {
            if let Expr::Coord { axis, pos } = e {
                if best.is_none_or(|(a, _)| *axis > a) {
                    best = Some((*axis, *pos));
                }
            }
        });
        best
    }

    fn vector_len(&self) -> Option<(usize, usize)> {
        let mut out = None;
        self.visit(&mut |e| {
            let check = |p: &Point| match p {
                Point::Vector(v, pos) => Some((v.len(), *pos)),
                Point::Scalar(_) => None,
            };
            match e {
                Expr::Ball { center, .. } => out = out.or(check(center)),
                Expr::Box { lo, hi } => out = out.or(check(lo)).or(check(hi)),
                _ => {}
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Coord { .. } | Expr::Radius => {}
            Expr::Neg(a)
            | Expr::Abs(a)
            | Expr::Exp(a)
            | Expr::Sqrt(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Gaussian(a) => {
                a.visit(f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Ball { center, radius } => {
                center.visit(f);
                radius.visit(f);
            }
            Expr::Box { lo, hi } => {
                lo.visit(f);
                hi.visit(f);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Coord { axis, .. } => x[*axis],
            Expr::Radius => norm2(x).sqrt(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Gaussian(s) => {
                let s = s.eval(x);
                (-norm2(x) / (s * s)).exp()
            }
            Expr::Ball { center, radius } => {
                let r = radius.eval(x);
                let d2: f64 = (0..x.len())
                    .map(|i| {
                        let d = x[i] - center.component(i, x);
                        d * d
                    })
                    .sum();
                if d2.sqrt() < r {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Box { lo, hi } => {
                let inside =
                    (0..x.len()).all(|i| lo.component(i, x) <= x[i] && x[i] < hi.component(i, x));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl Point {
    fn component(&self, axis: usize, x: &[f64]) -> f64 {
        match self {
            Point::Scalar(e) => e.eval(x),
            Point::Vector(v, _) => v[axis].eval(x),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Point::Scalar(e) => e.visit(f),
            Point::Vector(v, _) => v.iter().for_each(|e| e.visit(f)),
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Parses `src` and evaluates it at every sample of `spec`.
pub fn sample_expression(src: &str, spec: &GridSpec) -> Result<SampledField> {
    let expr = Expr::parse(src)?;
    let dim = spec.dim();
    if let Some((axis, pos)) = expr.max_axis() {
        if axis >= dim {
            return Err(Error::Parse {
                pos,
                msg: format!("coordinate {} is not available on a {dim}-D grid", axis + 1),
            });
        }
    }
    if let Some((len, pos)) = expr.vector_len() {
        if len != dim {
            return Err(Error::Parse {
                pos,
                msg: format!("vector has {len} components, grid has {dim} axes"),
            });
        }
    }
    let mut values = Vec::with_capacity(spec.len());
    for i in 0..spec.len() {
        let x: [f64; MAX_DIM] = spec.point(i);
        let v = expr.eval(&x[..dim]);
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        values.push(v);
    }
    SampledField::new(spec.clone(), values)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = chars.get(i).map_or(src.len(), |&(p, _)| p);
            let text = &src[pos..end];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Parse { pos: chars[start].0, msg: format!("bad number `{text}`") })?;
            out.push((Tok::Num(v), pos));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |&(p, _)| p);
            out.push((Tok::Ident(src[pos..end].to_string()), pos));
        } else if "+-*/^(),[]·".contains(c) {
            out.push((Tok::Sym(if c == '·' { '*' } else { c }), pos));
            i += 1;
        } else {
            return Err(Error::Parse { pos, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    #[allow(dead_code)]
    src: &'a str,
    tokens: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos(), msg: msg.to_string() }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.factor()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    self.bump();
                    self.call(&name, pos)
                } else {
                    self.variable(&name, pos)
                }
            }
            Tok::End => Err(Error::Parse { pos, msg: "unexpected end of expression".into() }),
            Tok::Sym(c) => Err(Error::Parse { pos, msg: format!("unexpected `{c}`") }),
        }
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Expr> {
        let axis = match name {
            "x" | "x1" => 0,
            "y" | "x2" => 1,
            "z" | "x3" => 2,
            "r" => return Ok(Expr::Radius),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "e" => return Ok(Expr::Const(std::f64::consts::E)),
            _ => return Err(Error::Parse { pos, msg: format!("unknown identifier `{name}`") }),
        };
        Ok(Expr::Coord { axis, pos })
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut args = Vec::new();
        if self.eat(')') {
            return Ok(args);
        }
        loop {
            let pos = self.pos();
            if self.eat('[') {
                let mut items = vec![self.expr()?];
                while self.eat(',') {
                    items.push(self.expr()?);
                }
                self.expect(']')?;
                args.push(Arg::Vector(items, pos));
            } else {
                args.push(Arg::Scalar(self.expr()?));
            }
            if self.eat(')') {
                return Ok(args);
            }
            self.expect(',')?;
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr> {
        let args = self.args()?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse {
                    pos,
                    msg: format!("`{name}` takes {n} argument(s), got {}", args.len()),
                })
            }
        };
        let mut it = args.clone().into_iter();
        let mut scalar = || it.next().unwrap().into_scalar();
        match name {
            "abs" | "exp" | "sqrt" | "sin" | "cos" | "gaussian" => {
                arity(1)?;
                let a = Box::new(scalar()?);
                Ok(match name {
                    "abs" => Expr::Abs(a),
                    "exp" => Expr::Exp(a),
                    "sqrt" => Expr::Sqrt(a),
                    "sin" => Expr::Sin(a),
                    "cos" => Expr::Cos(a),
                    _ => Expr::Gaussian(a),
                })
            }
            "pow" => {
                arity(2)?;
                let a = scalar()?;
                let b = scalar()?;
                Ok(Expr::Pow(Box::new(a), Box::new(b)))
            }
            "ball_indicator" => {
                arity(2)?;
                let mut it = args.into_iter();
                let center = it.next().unwrap().into_point();
                let radius = Box::new(it.next().unwrap().into_scalar()?);
                Ok(Expr::Ball { center, radius })
            }
            "box_indicator" => {
                arity(2)?;
                let mut it = args.into_iter();
                let lo = it.next().unwrap().into_point();
                let hi = it.next().unwrap().into_point();
                Ok(Expr::Box { lo, hi })
            }
            _ => Err(Error::Parse { pos, msg: format!("unknown function `{name}`") }),
        }
    }
}

#[derive(Clone)]
enum Arg {
    Scalar(Expr),
    Vector(Vec<Expr>, usize),
}

impl Arg {
    fn into_scalar(self) -> Result<Expr> {
        match self {
            Arg::Scalar(e) => Ok(e),
            Arg::Vector(_, pos) => Err(Error::Parse { pos, msg: "expected a scalar argument".into() }),
        }
    }

    fn into_point(self) -> Point {
        match self {
            Arg::Scalar(e) => Point::Scalar(Box::new(e)),
            Arg::Vector(v, pos) => Point::Vector(v, pos),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(h: f64, lo: f64, hi: f64) -> GridSpec {
        let n = ((hi - lo) / h).round() as usize + 1;
        GridSpec::new(vec![n], vec![h], vec![0.5 * (lo + hi)]).unwrap()
    }

    #[test]
    fn constant_is_all_ones() {
        let spec = GridSpec::tiling(2, 0.0, 1.0, 8).unwrap();
        let f = sample_expression("1", &spec).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ball_indicator_1d() {
        let spec = line(0.01, -2.0, 2.0);
        let f = sample_expression("ball_indicator(0,1)", &spec).unwrap();
        for i in 0..spec.len() {
            let x = spec.coord(0, i);
            let expected = if x.abs() < 1.0 { 1.0 } else { 0.0 };
            assert_eq!(f.values()[i], expected, "x = {x}");
        }
    }

    #[test]
    fn gaussian_matches_pointwise_evaluation() {
        let spec = line(0.05, -3.0, 3.0);
        let f = sample_expression("gaussian(1)", &spec).unwrap();
        let max_err = (0..spec.len())
            .map(|i| {
                let x = spec.coord(0, i);
                (f.values()[i] - (-x * x).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert_eq!(max_err, 0.0);
    }

    #[test]
    fn arithmetic_and_precedence() {
        let e = Expr::parse("2 + 3 * x ^ 2 - -1").unwrap();
        assert_eq!(e.eval(&[2.0]), 2.0 + 12.0 + 1.0);
        let e = Expr::parse("pow(abs(x - 1), 0.5) / 2").unwrap();
        assert_eq!(e.eval(&[5.0]), 1.0);
        let e = Expr::parse("3·x").unwrap();
        assert_eq!(e.eval(&[2.0]), 6.0);
        let e = Expr::parse("1.5e-1 * 2E1").unwrap();
        assert!((e.eval(&[0.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn vector_arguments() {
        let spec = GridSpec::tiling(2, -1.0, 1.0, 4).unwrap();
        let f = sample_expression("box_indicator([0, -1], [1, 0])", &spec).unwrap();
        let hits: Vec<usize> = (0..spec.len()).filter(|&i| f.values()[i] == 1.0).collect();
        assert_eq!(hits.len(), 4);
        let err = sample_expression("ball_indicator([0,0,0], 1)", &spec).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn parse_errors_carry_position() {
        match Expr::parse("1 + * 2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match Expr::parse("gaussian(1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("foo(1)"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(Expr::parse("1 $"), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn coordinate_outside_grid_dimension() {
        let spec = line(0.5, -1.0, 1.0);
        match sample_expression("x + y", &spec) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_names_sample() {
        let spec = line(0.5, -1.0, 1.0); // -1, -0.5, 0, 0.5, 1
        match sample_expression("1 / x", &spec) {
            Err(Error::NonFinite { index }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
    }
}
