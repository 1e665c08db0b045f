//! Exact symbolic scalars as canonical fractions.
//!
//! An `Expr` is a reduced fraction of multivariate polynomials over the
//! rationals in the fixed atom set, normalized so that
//!
//!   * constrained atoms (the sines, `s`, `t`, `w`) appear to degree at most
//!     one, their squares rewritten by the defining relation;
//!   * the denominator is free of constrained atoms (conjugation removes
//!     them) and has no common polynomial factor with the numerator;
//!   * coefficients are integers, jointly primitive, and the denominator's
//!     leading coefficient is positive.
//!
//! Two `Expr` are equal in the underlying function field exactly when their
//! canonical forms are identical, so `==` decides equality and `is_zero` is a
//! decision procedure.

use crate::atom::{Atom, Coord};
use crate::error::{Error, Result};
use crate::interval::{cos_enclosure, sin_enclosure, Iv};
use crate::poly::{gcd, Mono, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Defining relation a^2 = num/den for constrained atoms.
pub fn relation(a: Atom) -> Option<(Poly, Poly)> {
    let one = Poly::one;
    match a {
        Atom::SinPsi => Some((one().sub(&Poly::atom(Atom::CosPsi).pow(2)), one())),
        Atom::SinTheta => Some((one().sub(&Poly::atom(Atom::CosTheta).pow(2)), one())),
        Atom::SinPhi => Some((one().sub(&Poly::atom(Atom::CosPhi).pow(2)), one())),
        Atom::RadS => Some((
            Poly::atom(Atom::R).pow(2).sub(&Poly::atom(Atom::C0)),
            one(),
        )),
        Atom::RadT => Some((
            Poly::atom(Atom::M).pow(2).add(&Poly::atom(Atom::L).pow(2)),
            one(),
        )),
        Atom::RadW => Some((
            Poly::atom(Atom::R)
                .pow(2)
                .sub(&Poly::atom(Atom::M).mul(&Poly::atom(Atom::R)).mul_scalar(&BigRational::from_integer(2.into())))
                .sub(&Poly::atom(Atom::L).pow(2)),
            Poly::atom(Atom::R).pow(2).add(&Poly::atom(Atom::L).pow(2)),
        )),
        Atom::RadU => Some((
            Poly::atom(Atom::R).pow(2).add(&Poly::atom(Atom::L).pow(2)),
            one(),
        )),
        _ => None,
    }
}

const CONSTRAINED: [Atom; 7] = [
    Atom::SinPsi,
    Atom::SinTheta,
    Atom::SinPhi,
    Atom::RadS,
    Atom::RadT,
    Atom::RadW,
    Atom::RadU,
];

/// Reduce constrained squares: returns (n, d, changed) with p = n/d, every
/// constrained atom of degree <= 1 in n, and d constrained-free.
fn reduce_constrained(p: &Poly) -> (Poly, Poly, bool) {
    let mut n = p.clone();
    let mut d = Poly::one();
    let mut changed = false;
    for a in CONSTRAINED {
        if n.max_deg(a) < 2 {
            continue;
        }
        changed = true;
        let (rn, rd) = relation(a).unwrap();
        let coefs = n.coefficients_in(a);
        let j_max = (coefs.len() - 1) / 2;
        let mut acc = Poly::zero();
        for (k, c) in coefs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let j = k / 2;
            let e = k % 2;
            let mut term = c.mul(&rn.pow(j as u32)).mul(&rd.pow((j_max - j) as u32));
            if e == 1 {
                term = term.mul(&Poly::atom(a));
            }
            acc = acc.add(&term);
        }
        n = acc;
        d = d.mul(&rd.pow(j_max as u32));
    }
    (n, d, changed)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Expr {
        Expr { num: Poly::one(), den: Poly::one() }
    }

    pub fn int(n: i64) -> Expr {
        Expr { num: Poly::int(n), den: Poly::one() }
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::from_big_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_big_rational(q: BigRational) -> Expr {
        Expr::new(Poly::constant(q), Poly::one()).expect("constant fraction")
    }

    pub fn atom(a: Atom) -> Expr {
        Expr { num: Poly::atom(a), den: Poly::one() }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    /// Canonicalize a raw fraction.
    pub fn new(num: Poly, den: Poly) -> Result<Expr> {
        let (n1, d1, _) = reduce_constrained(&num);
        let (n2, d2, _) = reduce_constrained(&den);
        let mut n = n1.mul(&d2);
        let mut d = n2.mul(&d1);

        // conjugate constrained atoms out of the denominator
        loop {
            let mut found = None;
            for a in CONSTRAINED {
                if d.contains_atom(a) {
                    found = Some(a);
                    break;
                }
            }
            let a = match found {
                None => break,
                Some(a) => a,
            };
            let coefs = d.coefficients_in(a);
            let d0 = coefs[0].clone();
            let d1p = coefs.get(1).cloned().unwrap_or_else(Poly::zero);
            let (rn, rd) = relation(a).unwrap();
            let conj = d0.sub(&Poly::atom(a).mul(&d1p));
            n = n.mul(&conj).mul(&rd);
            d = d0.pow(2).mul(&rd).sub(&rn.mul(&d1p.pow(2)));
            // the conjugated numerator can hold fresh squares
            let (nn, nd, _) = reduce_constrained(&n);
            n = nn;
            d = d.mul(&nd);
        }

        Expr::finish(n, d, true)
    }

    /// Final normalization. `maybe_common` says whether the pair can still
    /// share a polynomial factor; the fraction-arithmetic paths below prove
    /// coprimality structurally and skip the gcd.
    fn finish(mut n: Poly, mut d: Poly, maybe_common: bool) -> Result<Expr> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if n.is_zero() {
            return Ok(Expr::zero());
        }
        if maybe_common && !d.is_constant() {
            let g = gcd(&n, &d);
            if !g.is_one() {
                n = n.exact_div(&g).expect("gcd divides");
                d = d.exact_div(&g).expect("gcd divides");
            }
        }
        let (nz, cn) = n.primitive_part();
        let (dz, cd) = d.primitive_part();
        let ratio = cn / cd;
        let mut n = nz.mul_scalar(&BigRational::from_integer(ratio.numer().clone()));
        let mut d = dz.mul_scalar(&BigRational::from_integer(ratio.denom().clone()));
        if d.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            n = n.neg();
            d = d.neg();
        }
        Ok(Expr { num: n, den: d })
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::new(p, Poly::one()).expect("polynomial fraction")
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    /// Fraction addition with the small structured gcds; the result is
    /// coprime by construction except in the same-denominator case.
    pub fn add(&self, o: &Expr) -> Expr {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let n = self.num.add(&o.num);
            return Expr::finish(n, self.den.clone(), true).expect("nonzero denominator");
        }
        let g0 = gcd(&self.den, &o.den);
        if g0.is_one() {
            let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            let d = self.den.mul(&o.den);
            return Expr::finish(n, d, false).expect("nonzero denominator");
        }
        let bp = self.den.exact_div(&g0).expect("gcd divides");
        let dp = o.den.exact_div(&g0).expect("gcd divides");
        let mut n = self.num.mul(&dp).add(&o.num.mul(&bp));
        let mut d = self.den.mul(&dp);
        let h = gcd(&n, &g0);
        if !h.is_one() {
            n = n.exact_div(&h).expect("gcd divides");
            d = d.exact_div(&h).expect("gcd divides");
        }
        Expr::finish(n, d, false).expect("nonzero denominator")
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero();
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let a = self.num.exact_div(&g1).expect("gcd divides");
        let c = o.num.exact_div(&g2).expect("gcd divides");
        let b = self.den.exact_div(&g2).expect("gcd divides");
        let d = o.den.exact_div(&g1).expect("gcd divides");
        let raw = a.mul(&c);
        let (n, extra_den, changed) = reduce_constrained(&raw);
        let den = b.mul(&d).mul(&extra_den);
        Expr::finish(n, den, changed).expect("nonzero denominator")
    }

    pub fn neg(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn div(&self, o: &Expr) -> Result<Expr> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let constrained_free = CONSTRAINED.iter().all(|&a| !o.num.contains_atom(a));
        if constrained_free {
            let recip = Expr::finish(o.den.clone(), o.num.clone(), false)?;
            return Ok(self.mul(&recip));
        }
        Expr::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn recip(&self) -> Result<Expr> {
        Expr::one().div(self)
    }

    pub fn pow(&self, e: i64) -> Result<Expr> {
        if e == 0 {
            return Ok(Expr::one());
        }
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Expr::one();
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, n: i64, d: i64) -> Expr {
        self.mul(&Expr::rational(n, d))
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut v = self.num.atoms();
        for a in self.den.atoms() {
            if !v.contains(&a) {
                v.push(a);
            }
        }
        v.sort();
        v
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.num.contains_atom(a) || self.den.contains_atom(a)
    }

    /// Derivative of an atom with respect to a coordinate, as an expression.
    fn atom_derivative(a: Atom, x: Coord) -> Result<Option<Expr>> {
        use Atom::*;
        let atom = |a| Expr::atom(a);
        Ok(match (a, x) {
            (R, Coord::R) | (RPrime, Coord::RPrime) => Some(Expr::one()),
            (SinPsi, Coord::Psi) => Some(atom(CosPsi)),
            (CosPsi, Coord::Psi) => Some(atom(SinPsi).neg()),
            (SinTheta, Coord::Theta) => Some(atom(CosTheta)),
            (CosTheta, Coord::Theta) => Some(atom(SinTheta).neg()),
            (SinPhi, Coord::Phi) => Some(atom(CosPhi)),
            (CosPhi, Coord::Phi) => Some(atom(SinPhi).neg()),
            (A, Coord::R) => Some(atom(A1)),
            (A1, Coord::R) => Some(atom(A2)),
            (B, Coord::R) => Some(atom(B1)),
            (B1, Coord::R) => Some(atom(B2)),
            (RFn, Coord::R) => Some(atom(RFn1)),
            (RFn1, Coord::R) => Some(atom(RFn2)),
            (F, Coord::R) => Some(atom(F1)),
            (A2, Coord::R) | (B2, Coord::R) | (RFn2, Coord::R) => {
                return Err(Error::DerivativeCap(format!(
                    "derivative of {} requested",
                    a.name()
                )))
            }
            (F1, Coord::R) => {
                return Err(Error::DerivativeCap("derivative of f' requested".into()))
            }
            (RadS, Coord::R) => {
                // s' = r/s by implicit differentiation of s^2 = r^2 - c0
                Some(atom(R).div(&atom(RadS))?)
            }
            (RadU, Coord::R) => Some(atom(R).div(&atom(RadU))?),
            (RadW, Coord::R) => {
                // w' = f_c'/(2w) with f_c the concrete metric function
                let fc = concrete_f();
                let fcp = fc.diff(Coord::R)?;
                Some(fcp.div(&atom(RadW).scale(2, 1))?)
            }
            _ => None,
        })
    }

    /// Partial derivative along a chart coordinate.
    pub fn diff(&self, x: Coord) -> Result<Expr> {
        let mut out = Expr::zero();
        let mut atoms = self.num.atoms();
        for a in self.den.atoms() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
        for a in atoms {
            let da = match Expr::atom_derivative(a, x)? {
                None => continue,
                Some(d) => d,
            };
            let dn = self.num.partial(a);
            let dd = self.den.partial(a);
            // (dn*den - num*dd)/den^2 * da
            let piece = Expr::new(
                dn.mul(&self.den).sub(&self.num.mul(&dd)),
                self.den.mul(&self.den),
            )?;
            out = out.add(&piece.mul(&da));
        }
        Ok(out)
    }

    /// Simultaneous substitution with automatic derivative-chain extension
    /// and re-registration of radicals whose defining relation is touched.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
        let mut map = bindings.clone();

        // extend derivative chains from bound heads
        for head in [Atom::A, Atom::B, Atom::RFn, Atom::F] {
            if !map.contains_key(&head) {
                continue;
            }
            let chain = head.chain().unwrap();
            let mut current = map[&head].clone();
            for &next in &chain[1..] {
                let derived = current.diff(Coord::R)?;
                match map.get(&next) {
                    Some(explicit) if explicit != &derived => {
                        return Err(Error::InconsistentBinding(format!(
                            "{} bound inconsistently with the derivative of {}",
                            next.name(),
                            head.name()
                        )));
                    }
                    Some(_) => {}
                    None => {
                        map.insert(next, derived.clone());
                    }
                }
                current = derived;
            }
        }

        // guard: substituting the base coordinate under unbound formal functions
        if map.contains_key(&Atom::R) {
            for a in self.atoms() {
                if matches!(a.kind(), crate::atom::AtomKind::FormalFunction | crate::atom::AtomKind::DerivativeOfFormal)
                    && !map.contains_key(&a)
                {
                    return Err(Error::InconsistentBinding(format!(
                        "cannot substitute r while {} remains formal",
                        a.name()
                    )));
                }
            }
        }

        // refresh radicals whose relation variables are being substituted
        for rad in [Atom::RadS, Atom::RadT, Atom::RadW, Atom::RadU] {
            if map.contains_key(&rad) || !self.contains_atom(rad) {
                continue;
            }
            let (rn, rd) = relation(rad).unwrap();
            let mut touched = false;
            for a in rn.atoms().into_iter().chain(rd.atoms()) {
                if map.contains_key(&a) {
                    touched = true;
                    break;
                }
            }
            if !touched {
                continue;
            }
            let radicand = Expr::new(rn, rd)?.substitute(&map)?;
            match radicand.try_exact_sqrt() {
                Some(root) => {
                    map.insert(rad, root);
                }
                None => {
                    return Err(Error::InconsistentBinding(format!(
                        "substitution leaves {} with a stale defining relation",
                        rad.name()
                    )));
                }
            }
        }
        // same treatment for sines when the matching cosine is bound
        for (sin, cos) in [
            (Atom::SinPsi, Atom::CosPsi),
            (Atom::SinTheta, Atom::CosTheta),
            (Atom::SinPhi, Atom::CosPhi),
        ] {
            if map.contains_key(&sin) || !self.contains_atom(sin) || !map.contains_key(&cos) {
                continue;
            }
            let c = &map[&cos];
            let radicand = Expr::one().sub(&c.mul(c));
            match radicand.try_exact_sqrt() {
                Some(root) => {
                    map.insert(sin, root);
                }
                None => {
                    return Err(Error::InconsistentBinding(format!(
                        "substitution leaves {} with a stale defining relation",
                        sin.name()
                    )));
                }
            }
        }

        let n = poly_substitute(&self.num, &map)?;
        let d = poly_substitute(&self.den, &map)?;
        n.div(&d)
    }

    /// Exact square root when the fraction is a perfect square.
    pub fn try_exact_sqrt(&self) -> Option<Expr> {
        if self.is_zero() {
            return Some(Expr::zero());
        }
        let (nz, cn) = self.num.primitive_part();
        let (dz, cd) = self.den.primitive_part();
        let c = cn / cd;
        if c.is_negative() {
            return None;
        }
        let cnum = c.numer().sqrt();
        let cden = c.denom().sqrt();
        if &(&cnum * &cnum) != c.numer() || &(&cden * &cden) != c.denom() {
            return None;
        }
        let sn = poly_sqrt(&nz)?;
        let sd = poly_sqrt(&dz)?;
        let root = Expr::new(
            sn.mul_scalar(&BigRational::from_integer(cnum)),
            sd.mul_scalar(&BigRational::from_integer(cden)),
        )
        .ok()?;
        Some(root)
    }

    /// Eliminate a formal function through its square: every even combination
    /// of `head`, `head'`, `head''` is rewritten in terms of `square` = head^2
    /// and its derivatives. Odd parity is an error.
    pub fn substitute_square(&self, head: Atom, square: &Expr) -> Result<Expr> {
        let chain = head
            .chain()
            .ok_or_else(|| Error::InconsistentBinding("not a formal function".into()))?;
        let parity = |m: &Mono| -> u32 {
            chain.iter().map(|&a| m.deg(a) as u32).sum::<u32>() % 2
        };
        let split = |p: &Poly| -> (Poly, Poly) {
            let mut even = Poly::zero();
            let mut odd = Poly::zero();
            for (m, c) in &p.terms {
                if parity(m) == 0 {
                    even = even.add(&Poly { terms: [(m.clone(), c.clone())].into_iter().collect() });
                } else {
                    odd = odd.add(&Poly { terms: [(m.clone(), c.clone())].into_iter().collect() });
                }
            }
            (even, odd)
        };

        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let (de, dodd) = split(&den);
        if !dodd.is_zero() {
            let flip = de.sub(&dodd);
            num = num.mul(&flip);
            den = den.mul(&flip);
        }
        let (_, nodd) = split(&num);
        if !nodd.is_zero() {
            return Err(Error::OddParity(format!(
                "expression is odd in the {} family",
                head.name()
            )));
        }
        let (_, dodd2) = split(&den);
        if !dodd2.is_zero() {
            return Err(Error::OddParity(format!(
                "denominator is odd in the {} family",
                head.name()
            )));
        }

        // helper expressions: with F = head^2,
        //   head*head'  = F'/2
        //   head*head'' = F''/2 - F'^2/(4F)
        let f1 = square.diff(Coord::R)?;
        let u1 = f1.scale(1, 2);
        let u2 = if chain.len() >= 3 {
            let f2 = f1.diff(Coord::R)?;
            f2.scale(1, 2).sub(&f1.mul(&f1).div(&square.scale(4, 1))?)
        } else {
            Expr::zero()
        };

        let rewrite = |p: &Poly| -> Result<Expr> {
            let mut out = Expr::zero();
            for (m, c) in &p.terms {
                let e0 = m.deg(chain[0]) as i64;
                let e1 = m.deg(chain[1]) as i64;
                let e2 = if chain.len() >= 3 { m.deg(chain[2]) as i64 } else { 0 };
                let mut rest = m.clone();
                for &a in chain {
                    rest = rest.with_deg(a, 0);
                }
                let mut term = Expr::from_poly(Poly {
                    terms: [(rest, c.clone())].into_iter().collect(),
                });
                if e1 > 0 {
                    term = term.mul(&u1.pow(e1)?);
                }
                if e2 > 0 {
                    term = term.mul(&u2.pow(e2)?);
                }
                let k = e0 - e1 - e2;
                debug_assert!(k % 2 == 0);
                if k != 0 {
                    term = term.mul(&square.pow(k / 2)?);
                }
                out = out.add(&term);
            }
            Ok(out)
        };

        let ne = rewrite(&num)?;
        let de = rewrite(&den)?;
        ne.div(&de)
    }

    /// The transform r -> sqrt(r'^2 + c0): even powers of r map through
    /// r^2 = r'^2 + c0 and the radical s maps to r'. Odd powers of r are a
    /// domain error.
    pub fn transform_r_even(&self) -> Result<Expr> {
        let map_poly = |p: &Poly| -> Result<Poly> {
            let rp2c0 = Poly::atom(Atom::RPrime).pow(2).add(&Poly::atom(Atom::C0));
            let mut out = Poly::zero();
            for (m, c) in &p.terms {
                let er = m.deg(Atom::R);
                if er % 2 != 0 {
                    return Err(Error::OddParity(
                        "odd power of r under the r' transform".into(),
                    ));
                }
                let es = m.deg(Atom::RadS);
                let rest = m.with_deg(Atom::R, 0).with_deg(Atom::RadS, 0).with_deg(
                    Atom::RPrime,
                    m.deg(Atom::RPrime) + es,
                );
                let base = Poly {
                    terms: [(rest, c.clone())].into_iter().collect(),
                };
                out = out.add(&base.mul(&rp2c0.pow((er / 2) as u32)));
            }
            Ok(out)
        };
        Expr::new(map_poly(&self.num)?, map_poly(&self.den)?)
    }

    /// Rigorous interval evaluation at a point.
    pub fn eval(&self, point: &Point, bits: u32) -> Result<Iv> {
        let mut cache: HashMap<Atom, Iv> = HashMap::new();
        let n = eval_poly(&self.num, point, bits, &mut cache)?;
        let d = eval_poly(&self.den, point, bits, &mut cache)?;
        if d.contains_zero() {
            return Err(Error::DomainError(
                "denominator enclosure contains zero".into(),
            ));
        }
        n.div(&d)
    }
}

fn eval_poly(p: &Poly, point: &Point, bits: u32, cache: &mut HashMap<Atom, Iv>) -> Result<Iv> {
    let mut resolve = |a: Atom| -> Result<Iv> { resolve_atom(a, point, bits, cache) };
    p.eval(&mut resolve)
}

fn resolve_atom(
    a: Atom,
    point: &Point,
    bits: u32,
    cache: &mut HashMap<Atom, Iv>,
) -> Result<Iv> {
    if let Some(v) = cache.get(&a) {
        return Ok(v.clone());
    }
    let v = match point.vals.get(&a) {
        Some(pv) => pv.resolve(bits)?,
        None => match a {
            Atom::SinPsi | Atom::CosPsi | Atom::SinTheta | Atom::CosTheta | Atom::SinPhi
            | Atom::CosPhi => {
                let coord = match a {
                    Atom::SinPsi | Atom::CosPsi => Coord::Psi,
                    Atom::SinTheta | Atom::CosTheta => Coord::Theta,
                    _ => Coord::Phi,
                };
                match point.angles.get(&coord) {
                    Some(angle) => match a {
                        Atom::SinPsi | Atom::SinTheta | Atom::SinPhi => {
                            sin_enclosure(angle, bits)?
                        }
                        _ => cos_enclosure(angle, bits)?,
                    },
                    None => {
                        // a sine resolves from a bound cosine on the
                        // positive branch (the dense chart has sin > 0)
                        let partner = match a {
                            Atom::SinPsi => Atom::CosPsi,
                            Atom::SinTheta => Atom::CosTheta,
                            Atom::SinPhi => Atom::CosPhi,
                            _ => return Err(Error::MissingBinding(a.name().to_string())),
                        };
                        let c = resolve_atom(partner, point, bits, cache)?;
                        let one = Iv::from_int(1);
                        let rad = one.sub(&c.mul(&c));
                        if rad.is_negative() {
                            return Err(Error::DomainError(
                                "cosine binding outside [-1, 1]".into(),
                            ));
                        }
                        rad.sqrt(bits)?
                    }
                }
            }
            Atom::RadS | Atom::RadT | Atom::RadW | Atom::RadU => {
                let (rn, rd) = relation(a).unwrap();
                let n = eval_poly(&rn, point, bits, cache)?;
                let d = eval_poly(&rd, point, bits, cache)?;
                let rad = n.div(&d)?;
                if rad.is_negative() {
                    return Err(Error::DomainError(format!(
                        "negative radicand for {}",
                        a.name()
                    )));
                }
                rad.sqrt(bits)?
            }
            _ => return Err(Error::MissingBinding(a.name().to_string())),
        },
    };
    cache.insert(a, v.clone());
    Ok(v)
}

fn poly_substitute(p: &Poly, map: &BTreeMap<Atom, Expr>) -> Result<Expr> {
    let mut out = Expr::zero();
    for (m, c) in &p.terms {
        let mut fixed = Mono::one();
        let mut mapped = Expr::one();
        for &(id, e) in &m.0 {
            let a = Atom::from_index(id);
            match map.get(&a) {
                Some(b) => mapped = mapped.mul(&b.pow(e as i64)?),
                None => fixed = fixed.mul(&Mono::atom(a).with_deg(a, e)),
            }
        }
        let base = Expr::from_poly(Poly {
            terms: [(fixed, c.clone())].into_iter().collect(),
        });
        out = out.add(&base.mul(&mapped));
    }
    Ok(out)
}

/// Exact polynomial square root via leading-term long division.
fn poly_sqrt(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    let (lm, lc) = p.leading()?;
    if lc.is_negative() {
        return None;
    }
    // sqrt of leading term
    let mut half: smallvec::SmallVec<[(u8, u16); 6]> = smallvec::SmallVec::new();
    for &(id, e) in &lm.0 {
        if e % 2 != 0 {
            return None;
        }
        half.push((id, e / 2));
    }
    let cn = lc.numer().sqrt();
    let cd = lc.denom().sqrt();
    if &(&cn * &cn) != lc.numer() || &(&cd * &cd) != lc.denom() {
        return None;
    }
    let lt = Poly {
        terms: [(Mono(half), BigRational::new(cn, cd))].into_iter().collect(),
    };
    let mut s = lt.clone();
    let two_lt = lt.mul_scalar(&BigRational::from_integer(2.into()));
    let mut guard = 0usize;
    loop {
        let r = p.sub(&s.mul(&s));
        if r.is_zero() {
            return Some(s);
        }
        let (rm, rc) = r.leading()?;
        let (tm, tc) = two_lt.leading()?;
        let qm = rm.div(tm)?;
        let qc = rc / tc;
        s.terms.insert(qm, qc);
        guard += 1;
        if guard > p.num_terms() * 4 + 16 {
            return None;
        }
    }
}

/// The concrete metric function f(r) = (r^2 - 2 m r - l^2)/(r^2 + l^2).
pub fn concrete_f() -> Expr {
    let r = Expr::atom(Atom::R);
    let m = Expr::atom(Atom::M);
    let l = Expr::atom(Atom::L);
    let num = r.mul(&r).sub(&m.mul(&r).scale(2, 1)).sub(&l.mul(&l));
    let den = r.mul(&r).add(&l.mul(&l));
    num.div(&den).unwrap()
}

// ---------------------------------------------------------------------------
// numeric points
// ---------------------------------------------------------------------------

/// A value binding: exact rational, or a + b*sqrt(rad) resolved at the
/// requested precision.
#[derive(Debug, Clone)]
pub enum PVal {
    Exact(BigRational),
    Sqrt {
        base: BigRational,
        coef: BigRational,
        radicand: BigRational,
    },
}

impl PVal {
    fn resolve(&self, bits: u32) -> Result<Iv> {
        match self {
            PVal::Exact(q) => Ok(Iv::point(q.clone())),
            PVal::Sqrt { base, coef, radicand } => {
                if radicand.is_negative() {
                    return Err(Error::DomainError("negative radicand in point".into()));
                }
                let root = Iv::point(radicand.clone()).sqrt(bits)?;
                Ok(root.mul(&Iv::point(coef.clone())).add(&Iv::point(base.clone())))
            }
        }
    }
}

/// An evaluation point: direct atom values plus optional angle values for the
/// Euler coordinates (which feed the trig atoms through rigorous enclosures).
#[derive(Debug, Clone, Default)]
pub struct Point {
    pub vals: BTreeMap<Atom, PVal>,
    pub angles: BTreeMap<Coord, BigRational>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn set(&mut self, a: Atom, q: BigRational) -> &mut Self {
        self.vals.insert(a, PVal::Exact(q));
        self
    }

    pub fn set_int(&mut self, a: Atom, n: i64) -> &mut Self {
        self.set(a, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn set_rat(&mut self, a: Atom, n: i64, d: i64) -> &mut Self {
        self.set(a, BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Bind an atom to base + coef*sqrt(radicand).
    pub fn set_sqrt(&mut self, a: Atom, base: BigRational, coef: BigRational, radicand: BigRational) -> &mut Self {
        self.vals.insert(a, PVal::Sqrt { base, coef, radicand });
        self
    }

    pub fn set_angle(&mut self, c: Coord, q: BigRational) -> &mut Self {
        self.angles.insert(c, q);
        self
    }
}

// ---------------------------------------------------------------------------
// operators
// ---------------------------------------------------------------------------

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else if self.num.num_terms() <= 1 {
            write!(f, "{}/({})", self.num, self.den)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn a(at: Atom) -> Expr {
        Expr::atom(at)
    }

    #[test]
    fn pythagorean_identity() {
        let s = a(Atom::SinTheta);
        let c = a(Atom::CosTheta);
        let e = s.mul(&s).add(&c.mul(&c));
        assert!(e.is_one());
    }

    #[test]
    fn radical_square_reduces() {
        let s = a(Atom::RadS);
        let sq = s.mul(&s);
        let want = a(Atom::R).pow(2).unwrap().sub(&a(Atom::C0));
        assert_eq!(sq, want);
    }

    #[test]
    fn radical_in_denominator_rationalizes() {
        // 1/s = s/(r^2 - c0)
        let inv = a(Atom::RadS).recip().unwrap();
        let back = inv.mul(&a(Atom::RadS));
        assert!(back.is_one());
        assert!(!inv.denom().contains_atom(Atom::RadS));
    }

    #[test]
    fn w_squared_is_f() {
        let w = a(Atom::RadW);
        assert_eq!(w.mul(&w), concrete_f());
    }

    #[test]
    fn f_evaluates_to_7_17() {
        // f at m=1, l=1, r=4 is 7/17
        let f = concrete_f();
        let mut bind = BTreeMap::new();
        bind.insert(Atom::M, Expr::one());
        bind.insert(Atom::L, Expr::one());
        bind.insert(Atom::R, Expr::int(4));
        let v = f.substitute(&bind).unwrap();
        assert_eq!(v, Expr::rational(7, 17));
        // and the same numerically
        let mut p = Point::new();
        p.set_int(Atom::M, 1).set_int(Atom::L, 1).set_int(Atom::R, 4);
        let iv = f.eval(&p, 64).unwrap();
        assert!(iv.contains(&BigRational::new(7.into(), 17.into())));
        assert!(iv.width().is_zero());
    }

    #[test]
    fn diff_basics() {
        // d cos(theta)/d theta = -sin(theta)
        let d = a(Atom::CosTheta).diff(Coord::Theta).unwrap();
        assert_eq!(d, a(Atom::SinTheta).neg());
        // Leibniz on A*B
        let ab = a(Atom::A).mul(&a(Atom::B));
        let d = ab.diff(Coord::R).unwrap();
        let want = a(Atom::A1).mul(&a(Atom::B)).add(&a(Atom::A).mul(&a(Atom::B1)));
        assert_eq!(d, want);
        // implicit differentiation: s * ds/dr = r
        let ds = a(Atom::RadS).diff(Coord::R).unwrap();
        assert_eq!(ds.mul(&a(Atom::RadS)), a(Atom::R));
    }

    #[test]
    fn derivative_cap_enforced() {
        let e = a(Atom::A2);
        assert!(matches!(e.diff(Coord::R), Err(Error::DerivativeCap(_))));
    }

    #[test]
    fn mixed_partials_commute() {
        let e = a(Atom::SinTheta)
            .mul(&a(Atom::CosPsi))
            .mul(&a(Atom::R).pow(3).unwrap());
        let d1 = e.diff(Coord::Theta).unwrap().diff(Coord::Psi).unwrap();
        let d2 = e.diff(Coord::Psi).unwrap().diff(Coord::Theta).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn substitution_chains() {
        // A -> 1, B -> 1, R -> 1 sends B'/(A B) to 0
        let e = a(Atom::B1).div(&a(Atom::A).mul(&a(Atom::B))).unwrap();
        let mut bind = BTreeMap::new();
        bind.insert(Atom::A, Expr::one());
        bind.insert(Atom::B, Expr::one());
        bind.insert(Atom::RFn, Expr::one());
        assert!(e.substitute(&bind).unwrap().is_zero());
    }

    #[test]
    fn inconsistent_chain_binding_rejected() {
        let e = a(Atom::B1);
        let mut bind = BTreeMap::new();
        bind.insert(Atom::B, a(Atom::R));
        bind.insert(Atom::B1, Expr::int(7));
        assert!(matches!(
            e.substitute(&bind),
            Err(Error::InconsistentBinding(_))
        ));
    }

    #[test]
    fn horizon_substitution() {
        // r± = m ± t; substituting m = 0 gives ±l
        let rp = a(Atom::M).add(&a(Atom::RadT));
        let mut bind = BTreeMap::new();
        bind.insert(Atom::M, Expr::zero());
        let res = rp.substitute(&bind).unwrap();
        assert_eq!(res, a(Atom::L));
        // f(r+) = 0 symbolically
        let f = concrete_f();
        let mut bind = BTreeMap::new();
        bind.insert(Atom::R, a(Atom::M).add(&a(Atom::RadT)));
        assert!(f.substitute(&bind).unwrap().is_zero());
    }

    #[test]
    fn exact_sqrt() {
        let e = a(Atom::L).pow(2).unwrap();
        assert_eq!(e.try_exact_sqrt().unwrap(), a(Atom::L));
        let q = a(Atom::R).add(&a(Atom::L)).pow(2).unwrap().scale(9, 4);
        let root = q.try_exact_sqrt().unwrap();
        assert_eq!(root.mul(&root), q);
        assert!(a(Atom::R).try_exact_sqrt().is_none());
    }

    #[test]
    fn substitute_square_even_combination() {
        // (B'/B)^2 with B^2 = F: rewrites to (F'/2F)^2... checked against
        // F = r^2: B = r, B'/B = 1/r, square = 1/r^2.
        let e = a(Atom::B1).div(&a(Atom::B)).unwrap().pow(2).unwrap();
        let f = a(Atom::R).pow(2).unwrap();
        let got = e.substitute_square(Atom::B, &f).unwrap();
        assert_eq!(got, a(Atom::R).pow(-2).unwrap());
        // odd combinations are rejected
        let odd = a(Atom::B);
        assert!(matches!(
            odd.substitute_square(Atom::B, &f),
            Err(Error::OddParity(_))
        ));
    }

    #[test]
    fn transform_even_powers() {
        // r^2 - c0 -> r'^2 ; s -> r'
        let e = a(Atom::R).pow(2).unwrap().sub(&a(Atom::C0));
        let t = e.transform_r_even().unwrap();
        assert_eq!(t, a(Atom::RPrime).pow(2).unwrap());
        assert_eq!(a(Atom::RadS).transform_r_even().unwrap(), a(Atom::RPrime));
        assert!(a(Atom::R).transform_r_even().is_err());
    }

    #[test]
    fn eval_with_radical_point() {
        // evaluate r^2 at r = 1 + sqrt(2): encloses 3 + 2 sqrt 2
        let e = a(Atom::R).pow(2).unwrap();
        let mut p = Point::new();
        p.set_sqrt(
            Atom::R,
            BigRational::one(),
            BigRational::one(),
            BigRational::from_integer(2.into()),
        );
        let iv = e.eval(&p, 128).unwrap();
        // 3 + 2*1.41421356... = 5.82842712...
        let lo = BigRational::new(582842712i64.into(), 100_000_000.into());
        let hi = BigRational::new(582842713i64.into(), 100_000_000.into());
        assert!(iv.lo > lo && iv.hi < hi);
    }

    #[test]
    fn division_by_zero_detected() {
        let zero = a(Atom::SinTheta)
            .mul(&a(Atom::SinTheta))
            .add(&a(Atom::CosTheta).mul(&a(Atom::CosTheta)))
            .sub(&Expr::one());
        assert!(zero.is_zero());
        assert!(matches!(Expr::one().div(&zero), Err(Error::DivisionByZero)));
    }
}
