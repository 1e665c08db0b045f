//! Plain-text math syntax for scalars and form literals.
//!
//! Grammar sketch: infix + - * /, ^ with integer exponents, juxtaposition as
//! multiplication ("cos(theta) d phi"), named functions A(r), B(r), R(r),
//! f(r) with primes, sin/cos/cot/csc of the Euler angles, sqrt(...), and
//! coordinate differentials "d r", "dpsi", "d phi".
//!
//! Parsing yields an explicit [`Tree`]. The tree folds three ways: to a
//! canonical [`Expr`], to a [`DiffForm`] on a chart, or to a numeric
//! enclosure — the last one never canonicalizes, which makes it an
//! independent check on the canonicalizer.

use crate::atom::{atom_by_name, Atom, Coord};
use crate::error::{Error, Result};
use crate::expr::{Expr, Point};
use crate::forms::{Basis, Chart, DiffForm};
use crate::interval::Iv;
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Num(BigRational),
    Atom(Atom),
    /// An already-built expression injected as a leaf.
    Leaf(Expr),
    D(Coord),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Neg(Box<Tree>),
    Pow(Box<Tree>, i64),
    Sqrt(Box<Tree>),
}

impl Tree {
    pub fn num(n: i64) -> Tree {
        Tree::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn leaf(e: Expr) -> Tree {
        Tree::Leaf(e)
    }

    pub fn add(a: Tree, b: Tree) -> Tree {
        Tree::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Tree, b: Tree) -> Tree {
        Tree::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Tree, b: Tree) -> Tree {
        Tree::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Tree, b: Tree) -> Tree {
        Tree::Div(Box::new(a), Box::new(b))
    }

    /// Fold to a canonical scalar.
    pub fn to_expr(&self) -> Result<Expr> {
        match self {
            Tree::Num(q) => Ok(Expr::from_big_rational(q.clone())),
            Tree::Atom(a) => Ok(Expr::atom(*a)),
            Tree::Leaf(e) => Ok(e.clone()),
            Tree::D(_) => Err(Error::DegreeError(
                "differential in scalar context".into(),
            )),
            Tree::Add(a, b) => Ok(a.to_expr()?.add(&b.to_expr()?)),
            Tree::Sub(a, b) => Ok(a.to_expr()?.sub(&b.to_expr()?)),
            Tree::Mul(a, b) => Ok(a.to_expr()?.mul(&b.to_expr()?)),
            Tree::Div(a, b) => a.to_expr()?.div(&b.to_expr()?),
            Tree::Neg(a) => Ok(a.to_expr()?.neg()),
            Tree::Pow(a, e) => a.to_expr()?.pow(*e),
            Tree::Sqrt(a) => {
                let rad = a.to_expr()?;
                // exact square roots and the registered radicals
                if let Some(root) = rad.try_exact_sqrt() {
                    return Ok(root);
                }
                for cand in [Atom::RadS, Atom::RadT, Atom::RadW, Atom::RadU] {
                    let sq = Expr::atom(cand).mul(&Expr::atom(cand));
                    if sq == rad {
                        return Ok(Expr::atom(cand));
                    }
                }
                Err(Error::DomainError(format!(
                    "unsupported radical: sqrt of {rad}"
                )))
            }
        }
    }

    /// Fold to a differential form on a chart (degree 0 allowed).
    pub fn to_form(&self, chart: &Chart) -> Result<DiffForm> {
        match self {
            Tree::D(c) => DiffForm::d_coord(chart, *c),
            Tree::Add(a, b) => a.to_form(chart)?.add(&b.to_form(chart)?),
            Tree::Sub(a, b) => a.to_form(chart)?.sub(&b.to_form(chart)?),
            Tree::Neg(a) => Ok(a.to_form(chart)?.neg()),
            Tree::Mul(a, b) => {
                let fa = a.to_form(chart)?;
                let fb = b.to_form(chart)?;
                match (fa.degree, fb.degree) {
                    (0, _) => Ok(fb.scale(&fa.coeff(&[]))),
                    (_, 0) => Ok(fa.scale(&fb.coeff(&[]))),
                    _ => fa.wedge(&fb),
                }
            }
            Tree::Div(a, b) => {
                let fa = a.to_form(chart)?;
                let sb = b.to_expr()?;
                if sb.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Ok(fa.scale(&sb.recip()?))
            }
            _ => {
                let e = self.to_expr()?;
                Ok(DiffForm::scalar(chart, e))
            }
        }
    }

    /// Numeric enclosure without canonicalization.
    pub fn eval(&self, point: &Point, bits: u32) -> Result<Iv> {
        match self {
            Tree::Num(q) => Ok(Iv::point(q.clone())),
            Tree::Atom(a) => Expr::atom(*a).eval(point, bits),
            Tree::Leaf(e) => e.eval(point, bits),
            Tree::D(_) => Err(Error::DegreeError(
                "differential in numeric context".into(),
            )),
            Tree::Add(a, b) => Ok(a.eval(point, bits)?.add(&b.eval(point, bits)?)),
            Tree::Sub(a, b) => Ok(a.eval(point, bits)?.sub(&b.eval(point, bits)?)),
            Tree::Mul(a, b) => Ok(a.eval(point, bits)?.mul(&b.eval(point, bits)?)),
            Tree::Div(a, b) => a.eval(point, bits)?.div(&b.eval(point, bits)?),
            Tree::Neg(a) => Ok(a.eval(point, bits)?.neg()),
            Tree::Pow(a, e) => a.eval(point, bits)?.pow(*e),
            Tree::Sqrt(a) => {
                let v = a.eval(point, bits)?;
                if v.is_negative() {
                    return Err(Error::DomainError("negative radicand".into()));
                }
                v.sqrt(bits)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let n: BigInt = chars[i..j].iter().collect::<String>().parse().unwrap();
                out.push(Tok::Num(n));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                out.push(Tok::Ident(chars[i..j].iter().collect()));
                i = j;
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

fn coord_by_name(name: &str) -> Option<Coord> {
    Some(match name {
        "r" => Coord::R,
        "r'" | "rp" => Coord::RPrime,
        "psi" | "psi'" | "psi''" => Coord::Psi,
        "theta" => Coord::Theta,
        "phi" => Coord::Phi,
        _ => None?,
    })
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(x) if x == t => Ok(()),
            other => Err(Error::Parse(format!("expected {t:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Tree> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    acc = Tree::add(acc, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc = Tree::sub(acc, self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Tree> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    acc = Tree::mul(acc, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.next();
                    acc = Tree::div(acc, self.factor()?);
                }
                // juxtaposition: "2 d theta", "cos(theta) d phi"
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = Tree::mul(acc, self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Tree> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                Ok(Tree::Neg(Box::new(self.factor()?)))
            }
            Some(Tok::Plus) => {
                self.next();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Tree> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            let neg = if let Some(Tok::Minus) = self.peek() {
                self.next();
                true
            } else {
                false
            };
            match self.next() {
                Some(Tok::Num(n)) => {
                    let e: i64 = n.try_into().map_err(|_| {
                        Error::Parse("exponent too large".into())
                    })?;
                    Ok(Tree::Pow(Box::new(base), if neg { -e } else { e }))
                }
                other => Err(Error::Parse(format!(
                    "expected integer exponent, found {other:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Tree> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(Tree::Num(BigRational::from_integer(n))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.named(&name),
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }

    /// Consume "(r)" style arguments after formal function names.
    fn skip_arg_r(&mut self) {
        if self.peek() == Some(&Tok::LParen)
            && self.toks.get(self.pos + 1) == Some(&Tok::Ident("r".into()))
            && self.toks.get(self.pos + 2) == Some(&Tok::RParen)
        {
            self.pos += 3;
        }
    }

    fn angle_arg(&mut self) -> Result<Coord> {
        self.expect(Tok::LParen)?;
        let name = match self.next() {
            Some(Tok::Ident(n)) => n,
            other => return Err(Error::Parse(format!("expected angle, found {other:?}"))),
        };
        self.expect(Tok::RParen)?;
        match coord_by_name(&name) {
            Some(c @ (Coord::Psi | Coord::Theta | Coord::Phi)) => Ok(c),
            _ => Err(Error::Parse(format!("'{name}' is not an angle"))),
        }
    }

    fn named(&mut self, name: &str) -> Result<Tree> {
        // differential written as one word: dr, dpsi, dtheta, dphi
        if let Some(rest) = name.strip_prefix('d') {
            if !rest.is_empty() {
                if let Some(c) = coord_by_name(rest) {
                    return Ok(Tree::D(c));
                }
            }
        }
        // differential written as "d <coord>"
        if name == "d" {
            if let Some(Tok::Ident(next_name)) = self.peek().cloned() {
                if let Some(c) = coord_by_name(&next_name) {
                    self.next();
                    return Ok(Tree::D(c));
                }
            }
            return Err(Error::Parse("dangling differential 'd'".into()));
        }
        match name {
            "sin" => {
                let c = self.angle_arg()?;
                Ok(Tree::Atom(match c {
                    Coord::Psi => Atom::SinPsi,
                    Coord::Theta => Atom::SinTheta,
                    _ => Atom::SinPhi,
                }))
            }
            "cos" => {
                let c = self.angle_arg()?;
                Ok(Tree::Atom(match c {
                    Coord::Psi => Atom::CosPsi,
                    Coord::Theta => Atom::CosTheta,
                    _ => Atom::CosPhi,
                }))
            }
            "cot" => {
                let c = self.angle_arg()?;
                let (cosa, sina) = match c {
                    Coord::Psi => (Atom::CosPsi, Atom::SinPsi),
                    Coord::Theta => (Atom::CosTheta, Atom::SinTheta),
                    _ => (Atom::CosPhi, Atom::SinPhi),
                };
                Ok(Tree::div(Tree::Atom(cosa), Tree::Atom(sina)))
            }
            "csc" => {
                let c = self.angle_arg()?;
                let sina = match c {
                    Coord::Psi => Atom::SinPsi,
                    Coord::Theta => Atom::SinTheta,
                    _ => Atom::SinPhi,
                };
                Ok(Tree::div(Tree::num(1), Tree::Atom(sina)))
            }
            "sqrt" => {
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Tree::Sqrt(Box::new(e)))
            }
            _ => match atom_by_name(name) {
                Some(a) => {
                    if matches!(
                        a.kind(),
                        crate::atom::AtomKind::FormalFunction
                            | crate::atom::AtomKind::DerivativeOfFormal
                    ) {
                        self.skip_arg_r();
                    }
                    Ok(Tree::Atom(a))
                }
                None => Err(Error::Parse(format!("unknown name '{name}'"))),
            },
        }
    }
}

/// Parse a scalar or form literal into a tree.
pub fn parse(input: &str) -> Result<Tree> {
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let t = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(t)
}

/// Parse straight to a canonical scalar.
pub fn parse_expr(input: &str) -> Result<Expr> {
    parse(input)?.to_expr()
}

/// Parse straight to a form on a chart.
pub fn parse_form(input: &str, chart: &Chart) -> Result<DiffForm> {
    let f = parse(input)?.to_form(chart)?;
    if f.basis != Basis::Coordinate {
        return Err(Error::BasisMismatch("expected coordinate basis".into()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::concrete_f;

    #[test]
    fn scalar_parsing() {
        let e = parse_expr("(r^2 - 2*m*r - l^2)/(r^2 + l^2)").unwrap();
        assert_eq!(e, concrete_f());
        // cot/csc normalize through sin, cos
        let e = parse_expr("cot(theta) * sin(theta)").unwrap();
        assert_eq!(e, Expr::atom(Atom::CosTheta));
        let e = parse_expr("csc(theta)^2 - cot(theta)^2").unwrap();
        assert!(e.is_one());
        // signed exponent
        let e = parse_expr("r^-2 * r^3").unwrap();
        assert_eq!(e, Expr::atom(Atom::R));
    }

    #[test]
    fn sqrt_forms() {
        let s = parse_expr("sqrt(r^2 - c0)").unwrap();
        assert_eq!(s, Expr::atom(Atom::RadS));
        let t = parse_expr("sqrt(m^2 + l^2)").unwrap();
        assert_eq!(t, Expr::atom(Atom::RadT));
        let u = parse_expr("sqrt(r^2 + l^2)").unwrap();
        assert_eq!(u, Expr::atom(Atom::RadU));
        let two = parse_expr("sqrt(4)").unwrap();
        assert_eq!(two, Expr::int(2));
        let ql = parse_expr("sqrt(l^2)").unwrap();
        assert_eq!(ql, Expr::atom(Atom::L));
        assert!(parse_expr("sqrt(r)").is_err());
    }

    #[test]
    fn form_literals() {
        let ch = Chart::euler4();
        let f = parse_form("B(r)*(d psi + cos(theta) d phi)", &ch).unwrap();
        assert_eq!(f.degree, 1);
        assert_eq!(f.coeff(&[1]), Expr::atom(Atom::B));
        assert_eq!(
            f.coeff(&[3]),
            Expr::atom(Atom::B).mul(&Expr::atom(Atom::CosTheta))
        );
        // wedge via juxtaposition
        let two = parse_form("sin(theta) dtheta dphi", &ch).unwrap();
        assert_eq!(two.degree, 2);
        assert_eq!(two.coeff(&[2, 3]), Expr::atom(Atom::SinTheta));
        // antisymmetry through the parser
        let zero = parse_form("dr dr", &ch).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn tree_eval_matches_expr_eval() {
        let t = parse("(r^2 - 2*m*r - l^2)/(r^2 + l^2) + sin(theta)^2 + cos(theta)^2").unwrap();
        let e = t.to_expr().unwrap();
        let mut p = Point::new();
        p.set_int(Atom::M, 1).set_int(Atom::L, 1).set_int(Atom::R, 4);
        p.set_rat(Atom::CosTheta, 1, 3);
        let via_tree = t.eval(&p, 96).unwrap();
        let via_expr = e.eval(&p, 96).unwrap();
        assert!(via_tree.intersects(&via_expr));
    }

    #[test]
    fn parse_errors() {
        assert!(parse("2 +").is_err());
        assert!(parse("(r").is_err());
        assert!(parse_expr("nonsense_name").is_err());
        assert!(parse("r ^ m").is_err());
    }
}
