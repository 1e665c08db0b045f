//! Sparse multivariate polynomials over the rationals.
//!
//! Monomials are sorted sparse exponent lists over the fixed atom table and
//! compare in lexicographic order (lower atom index is more significant), a
//! proper monomial order, so leading-term division and sign normalization are
//! well defined. The gcd takes the cheap exits first (monomial content,
//! mutual divisibility, a modular coprimality certificate) and falls back to
//! a primitive polynomial remainder sequence.

use crate::atom::Atom;
use crate::error::Result;
use crate::interval::Iv;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;

/// A monomial: sorted (atom index, exponent) pairs, exponents nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub SmallVec<[(u8, u16); 6]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn atom(a: Atom) -> Mono {
        Mono(SmallVec::from_slice(&[(a.index(), 1)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn deg(&self, a: Atom) -> u16 {
        let i = a.index();
        self.0
            .iter()
            .find(|&&(id, _)| id == i)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn total_deg(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e as u32).sum()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out: SmallVec<[(u8, u16); 6]> = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            let (ia, ea) = self.0[i];
            let (ib, eb) = o.0[j];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    out.push((ia, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((ib, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((ia, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Mono(out)
    }

    /// self / o if o divides self.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut out: SmallVec<[(u8, u16); 6]> = SmallVec::new();
        let mut j = 0;
        for &(ia, ea) in &self.0 {
            while j < o.0.len() && o.0[j].0 < ia {
                return None; // divisor has an atom self lacks
            }
            if j < o.0.len() && o.0[j].0 == ia {
                let eb = o.0[j].1;
                if eb > ea {
                    return None;
                }
                if ea > eb {
                    out.push((ia, ea - eb));
                }
                j += 1;
            } else {
                out.push((ia, ea));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    pub fn with_deg(&self, a: Atom, e: u16) -> Mono {
        let mut v: SmallVec<[(u8, u16); 6]> = SmallVec::new();
        let i = a.index();
        let mut placed = false;
        for &(id, ex) in &self.0 {
            if id == i {
                if e > 0 {
                    v.push((id, e));
                }
                placed = true;
            } else {
                if !placed && id > i && e > 0 {
                    v.push((i, e));
                    placed = true;
                }
                v.push((id, ex));
            }
        }
        if !placed && e > 0 {
            v.push((i, e));
            v.sort_by_key(|&(id, _)| id);
        }
        Mono(v)
    }
}

/// Lexicographic order: smaller atom index is more significant; higher
/// exponent wins. Compatible with multiplication.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return std::cmp::Ordering::Equal,
                (Some(&(ia, ea)), Some(&(ib, eb))) => {
                    if ia == ib {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    } else if ia < ib {
                        // self has a power of a more significant atom
                        return std::cmp::Ordering::Greater;
                    } else {
                        return std::cmp::Ordering::Less;
                    }
                }
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (None, Some(_)) => return std::cmp::Ordering::Less,
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(Mono::one(), c);
        }
        Poly { terms: t }
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn atom(a: Atom) -> Poly {
        let mut t = BTreeMap::new();
        t.insert(Mono::atom(a), BigRational::one());
        Poly { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.is_one())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let (small, large) = if self.terms.len() <= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut out = Poly::zero();
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Formal partial derivative with respect to a single atom.
    pub fn partial(&self, a: Atom) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.deg(a);
            if e > 0 {
                let nm = m.with_deg(a, e - 1);
                out.insert_term(nm, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn max_deg(&self, a: Atom) -> u16 {
        self.terms.keys().map(|m| m.deg(a)).max().unwrap_or(0)
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut seen = [false; crate::atom::ATOM_COUNT];
        for m in self.terms.keys() {
            for &(id, _) in &m.0 {
                seen[id as usize] = true;
            }
        }
        (0..crate::atom::ATOM_COUNT as u8)
            .filter(|&i| seen[i as usize])
            .map(Atom::from_index)
            .collect()
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.terms.keys().any(|m| m.deg(a) > 0)
    }

    /// Coefficients of powers of `a`: index k holds the coefficient of a^k.
    pub fn coefficients_in(&self, a: Atom) -> Vec<Poly> {
        let d = self.max_deg(a) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.deg(a) as usize;
            let rest = m.with_deg(a, 0);
            out[e].insert_term(rest, c.clone());
        }
        out
    }

    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Evaluate over intervals given a resolver for atom values.
    pub fn eval<FR>(&self, resolve: &mut FR) -> Result<Iv>
    where
        FR: FnMut(Atom) -> Result<Iv>,
    {
        let mut acc = Iv::zero();
        for (m, c) in &self.terms {
            let mut term = Iv::point(c.clone());
            for &(id, e) in &m.0 {
                let v = resolve(Atom::from_index(id))?;
                term = term.mul(&v.pow(e as i64)?);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Exact multivariate division; None if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.mul_scalar(&(BigRational::one() / c)));
        }
        let (dm, dc) = d.leading().unwrap();
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            let qm = rm.div(dm)?;
            let qc = rc / dc;
            let piece = d.mul_mono(&qm, &qc);
            quo.insert_term(qm, qc);
            rem = rem.sub(&piece);
        }
        Some(quo)
    }

    /// Rational content: the factor making self integer and primitive.
    pub fn content(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        BigRational::new(num_gcd, den_lcm)
    }

    /// (primitive integer polynomial, content) with self = content * primitive.
    pub fn primitive_part(&self) -> (Poly, BigRational) {
        if self.is_zero() {
            return (Poly::zero(), BigRational::one());
        }
        let c = self.content();
        (self.mul_scalar(&(BigRational::one() / &c)), c)
    }

    /// The largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            None => return Mono::one(),
            Some(m) => m,
        };
        let mut acc: SmallVec<[(u8, u16); 6]> = first.0.clone();
        for m in iter {
            let mut next: SmallVec<[(u8, u16); 6]> = SmallVec::new();
            for &(id, e) in &acc {
                let e2 = m.deg(Atom::from_index(id));
                let k = e.min(e2);
                if k > 0 {
                    next.push((id, k));
                }
            }
            acc = next;
            if acc.is_empty() {
                break;
            }
        }
        Mono(acc)
    }

    fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.div(m).expect("monomial content divides"), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // highest monomial first
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut pieces: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                if mag.denom().is_one() {
                    pieces.push(mag.numer().to_string());
                } else {
                    pieces.push(format!("{}/{}", mag.numer(), mag.denom()));
                }
            }
            for &(id, e) in &m.0 {
                let name = Atom::from_index(id).name();
                if e == 1 {
                    pieces.push(name.to_string());
                } else {
                    pieces.push(format!("{name}^{e}"));
                }
            }
            write!(f, "{}", pieces.join("*"))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// gcd machinery
// ---------------------------------------------------------------------------

const PROBE_PRIME: u64 = 0xFFFF_FFFF_FFFF_FFC5; // largest 64-bit prime

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb: u128 = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u128;
        }
        bb = bb * bb % p as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

fn bigint_mod(n: &BigInt, p: u64) -> u64 {
    let m = n.magnitude() % p;
    let m = m.to_u64_digits().first().copied().unwrap_or(0);
    if n.is_negative() && m != 0 {
        p - m
    } else {
        m
    }
}

/// Evaluate an integer polynomial to a univariate poly in `main` over F_p.
fn eval_to_univariate(p: &Poly, main: Atom, assign: &[u64], prime: u64) -> Vec<u64> {
    let deg = p.max_deg(main) as usize;
    let mut out = vec![0u64; deg + 1];
    for (m, c) in &p.terms {
        let e = m.deg(main) as usize;
        let mut v: u128 = bigint_mod(c.numer(), prime) as u128;
        // coefficients are integers after primitivization
        for &(id, ex) in &m.0 {
            if id == main.index() {
                continue;
            }
            let base = assign[id as usize];
            v = v * mod_pow(base, ex as u64, prime) as u128 % prime as u128;
        }
        out[e] = ((out[e] as u128 + v) % prime as u128) as u64;
    }
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    out
}

fn univariate_gcd_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    fn deg(v: &[u64]) -> Option<usize> {
        v.iter().rposition(|&c| c != 0)
    }
    loop {
        let db = match deg(&b) {
            None => {
                let d = deg(&a).unwrap_or(0);
                a.truncate(d + 1);
                return a;
            }
            Some(d) => d,
        };
        let da = match deg(&a) {
            None => {
                b.truncate(db + 1);
                return b;
            }
            Some(d) => d,
        };
        if da < db {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        // synthetic long division: a mod b
        let inv = mod_inv(b[db], p);
        for k in (db..=da).rev() {
            let q = a[k] as u128 * inv as u128 % p as u128;
            if q == 0 {
                continue;
            }
            for i in 0..=db {
                let sub = b[i] as u128 * q % p as u128;
                let idx = k - db + i;
                a[idx] = ((a[idx] as u128 + p as u128 - sub) % p as u128) as u64;
            }
        }
        a.truncate(db);
        if a.is_empty() {
            a.push(0);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// Verdict of a single-variable modular probe.
#[derive(PartialEq)]
enum Probe {
    /// specialized gcd has degree 0 in this variable — so does the true gcd
    DegreeZero,
    NonTrivial,
    /// leading coefficients kept vanishing; no information
    Unknown,
}

/// Specialize all variables but `main` modulo a word prime and take the
/// univariate gcd. When the leading coefficients survive, the specialized
/// gcd degree bounds the true gcd degree in `main` from above.
fn probe_gcd_degree(p: &Poly, q: &Poly, main: Atom, seed: &mut u64) -> Probe {
    for _attempt in 0..4 {
        let mut assign = [0u64; crate::atom::ATOM_COUNT];
        for slot in assign.iter_mut() {
            *seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            *slot = (*seed >> 16) % 1_000_003 + 2;
        }
        let pe = eval_to_univariate(p, main, &assign, PROBE_PRIME);
        let qe = eval_to_univariate(q, main, &assign, PROBE_PRIME);
        // leading coefficients must survive the specialization
        if pe.len() as u16 != p.max_deg(main) + 1 || qe.len() as u16 != q.max_deg(main) + 1 {
            continue;
        }
        let g = univariate_gcd_mod(pe, qe, PROBE_PRIME);
        return if g.len() == 1 && g[0] != 0 {
            Probe::DegreeZero
        } else {
            Probe::NonTrivial
        };
    }
    Probe::Unknown
}

/// Certify gcd(p, q) = 1: the true gcd must have degree zero in every shared
/// variable, so one degree-zero probe per shared variable suffices.
fn coprime_certificate(p: &Poly, q: &Poly, shared: &[Atom]) -> bool {
    let mut seed: u64 = 0x9E3779B97F4A7C15;
    shared
        .iter()
        .all(|&v| probe_gcd_degree(p, q, v, &mut seed) == Probe::DegreeZero)
}

/// Pseudo-remainder of a by b in the main variable.
fn pseudo_rem(a: &Poly, b: &Poly, main: Atom) -> Poly {
    let db = b.max_deg(main);
    let b_coef = b.coefficients_in(main);
    let lb = &b_coef[db as usize];
    let mut r = a.clone();
    let mut da = r.max_deg(main);
    if da < db {
        return r;
    }
    let steps = da - db + 1;
    // premultiply so every elimination step divides exactly
    r = r.mul(&lb.pow(steps as u32));
    while !r.is_zero() {
        da = r.max_deg(main);
        if da < db {
            break;
        }
        let r_coef = r.coefficients_in(main);
        let lr = &r_coef[da as usize];
        let q = lr.exact_div(lb).expect("premultiplied leading divides");
        // r -= q * x^(da-db) * b
        let shift = Mono::atom(main)
            .with_deg(main, da - db);
        let qb = q.mul(b).mul_mono(&shift, &BigRational::one());
        r = r.sub(&qb);
        debug_assert!(r.max_deg(main) < da || r.is_zero());
    }
    r
}

/// Content of p viewed as univariate in `main` with polynomial coefficients.
fn content_in(p: &Poly, main: Atom) -> Poly {
    let coefs = p.coefficients_in(main);
    let mut g = Poly::zero();
    for c in coefs.iter().filter(|c| !c.is_zero()) {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Multivariate gcd, normalized: integer, primitive, positive leading
/// coefficient. gcd(0, q) = |q| normalized; gcd of constants is 1.
pub fn gcd(p: &Poly, q: &Poly) -> Poly {
    fn normalize(p: &Poly) -> Poly {
        let (mut pp, _) = p.primitive_part();
        if let Some((_, c)) = pp.leading() {
            if c.is_negative() {
                pp = pp.neg();
            }
        }
        pp
    }

    if p.is_zero() {
        return normalize(q);
    }
    if q.is_zero() {
        return normalize(p);
    }

    // factor out monomial content
    let mp = p.monomial_content();
    let mq = q.monomial_content();
    let mut common: SmallVec<[(u8, u16); 6]> = SmallVec::new();
    for &(id, e) in &mp.0 {
        let e2 = mq.deg(Atom::from_index(id));
        let k = e.min(e2);
        if k > 0 {
            common.push((id, k));
        }
    }
    let common = Mono(common);
    let p = normalize(&p.div_mono(&mp));
    let q = normalize(&q.div_mono(&mq));

    let core = gcd_primitive(&p, &q);
    core.mul_mono(&common, &BigRational::one())
}

fn positive_primitive(p: &Poly) -> Poly {
    let (mut g, _) = p.primitive_part();
    if g.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        g = g.neg();
    }
    g
}

/// gcd of two integer-primitive polynomials with trivial monomial content.
fn gcd_primitive(p: &Poly, q: &Poly) -> Poly {
    if p.is_constant() || q.is_constant() {
        return Poly::one();
    }
    if p == q || p == &q.neg() {
        return positive_primitive(p);
    }
    if q.exact_div(p).is_some() {
        return positive_primitive(p);
    }
    if p.exact_div(q).is_some() {
        return positive_primitive(q);
    }

    // shared variables, and the one of least combined degree as main
    let pa = p.atoms();
    let mut shared: Vec<Atom> = Vec::new();
    let mut main: Option<(Atom, u16)> = None;
    for a in pa {
        let dq = q.max_deg(a);
        if dq == 0 {
            continue;
        }
        shared.push(a);
        let dp = p.max_deg(a);
        let score = dp.min(dq);
        if main.map(|(_, s)| score < s).unwrap_or(true) {
            main = Some((a, score));
        }
    }
    let main = match main {
        None => return Poly::one(), // disjoint variables, both primitive
        Some((a, _)) => a,
    };

    if coprime_certificate(p, q, &shared) {
        return Poly::one();
    }

    if let Some(g) = heuristic_gcd(p, q, 0) {
        return positive_primitive(&g);
    }

    prs_gcd(p, q, main)
}

/// Evaluation-reconstruction gcd: evaluate one variable at a large integer,
/// recurse, lift the result xi-adically, and verify by exact division.
/// Returns None when the heuristic fails to verify after a few points.
fn heuristic_gcd(p: &Poly, q: &Poly, depth: usize) -> Option<Poly> {
    if depth > 12 {
        return None;
    }
    let int_content = |x: &Poly| -> BigInt {
        let mut g = BigInt::zero();
        for c in x.terms.values() {
            g = g.gcd(c.numer());
        }
        g
    };
    if p.is_zero() {
        return Some(q.clone());
    }
    if q.is_zero() {
        return Some(p.clone());
    }
    if p.is_constant() || q.is_constant() {
        return Some(Poly::constant(BigRational::from_integer(
            int_content(p).gcd(&int_content(q)),
        )));
    }
    // shared variable of largest min-degree: burn high degrees while the
    // evaluation point is still small
    let mut var: Option<(Atom, u16)> = None;
    for a in p.atoms() {
        let dq = q.max_deg(a);
        if dq == 0 {
            continue;
        }
        let score = p.max_deg(a).min(dq);
        if var.map(|(_, s)| score > s).unwrap_or(true) {
            var = Some((a, score));
        }
    }
    let v = match var {
        None => {
            return Some(Poly::constant(BigRational::from_integer(
                int_content(p).gcd(&int_content(q)),
            )))
        }
        Some((a, _)) => a,
    };

    let max_abs = |x: &Poly| -> BigInt {
        x.terms
            .values()
            .map(|c| c.numer().abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    };
    let mut xi: BigInt = (max_abs(p).min(max_abs(q)) + BigInt::from(29)) * BigInt::from(2);

    for _try in 0..6 {
        let gp = eval_var(p, v, &xi);
        let gq = eval_var(q, v, &xi);
        if let Some(gamma) = heuristic_gcd(&gp, &gq, depth + 1) {
            let h = positive_primitive(&lift_xi_adic(&gamma, v, &xi));
            if !h.is_zero() && p.exact_div(&h).is_some() && q.exact_div(&h).is_some() {
                return Some(h);
            }
        }
        xi = &xi * BigInt::from(3) + BigInt::from(7);
    }
    None
}

/// Substitute an integer for one variable.
fn eval_var(p: &Poly, v: Atom, xi: &BigInt) -> Poly {
    let d = p.max_deg(v) as usize;
    let mut pows: Vec<BigInt> = Vec::with_capacity(d + 1);
    pows.push(BigInt::one());
    for k in 1..=d {
        let next = &pows[k - 1] * xi;
        pows.push(next);
    }
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let e = m.deg(v) as usize;
        let rest = m.with_deg(v, 0);
        out.insert_term(rest, c * BigRational::from_integer(pows[e].clone()));
    }
    out
}

/// Reconstruct a polynomial in v from its value at v = xi, digit by digit in
/// the symmetric residue system.
fn lift_xi_adic(gamma: &Poly, v: Atom, xi: &BigInt) -> Poly {
    let mut rest = gamma.clone();
    let mut out = Poly::zero();
    let half = xi / BigInt::from(2);
    let mut power: u16 = 0;
    while !rest.is_zero() && power < 200 {
        let mut digit = Poly::zero();
        let mut next = Poly::zero();
        for (m, c) in &rest.terms {
            let n = c.numer();
            let mut r = n.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                digit.insert_term(m.clone(), BigRational::from_integer(r.clone()));
            }
            let quo = (n - r) / xi;
            if !quo.is_zero() {
                next.insert_term(m.clone(), BigRational::from_integer(quo));
            }
        }
        for (m, c) in digit.terms {
            let mono = m.with_deg(v, m.deg(v) + power);
            out.insert_term(mono, c);
        }
        rest = next;
        power += 1;
    }
    out
}

/// Primitive polynomial remainder sequence; the correctness fallback.
fn prs_gcd(p: &Poly, q: &Poly, main: Atom) -> Poly {
    let cp = content_in(p, main);
    let cq = content_in(q, main);
    let pp = p.exact_div(&cp).expect("content divides");
    let qq = q.exact_div(&cq).expect("content divides");
    let cont_gcd = gcd(&cp, &cq);

    let (mut a, mut b) = if pp.max_deg(main) >= qq.max_deg(main) {
        (pp, qq)
    } else {
        (qq, pp)
    };
    loop {
        let r = pseudo_rem(&a, &b, main);
        if r.is_zero() {
            let bp = b
                .exact_div(&content_in(&b, main))
                .expect("content divides");
            return positive_primitive(&bp.mul(&cont_gcd));
        }
        if r.max_deg(main) == 0 {
            return cont_gcd;
        }
        let rp = r
            .exact_div(&content_in(&r, main))
            .expect("content divides");
        a = b;
        b = rp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::atom(Atom::R)
    }
    fn y() -> Poly {
        Poly::atom(Atom::M)
    }

    #[test]
    fn mono_order_is_multiplicative() {
        let a = Mono::atom(Atom::R);
        let b = Mono::atom(Atom::M);
        assert!(a > b); // r has smaller index, more significant
        let c = Mono::atom(Atom::L);
        assert_eq!(a.mul(&c).cmp(&b.mul(&c)), a.cmp(&b));
    }

    #[test]
    fn arithmetic_and_partial() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let s = x().add(&y());
        let sq = s.mul(&s);
        assert_eq!(sq.num_terms(), 3);
        let dx = sq.partial(Atom::R);
        // d/dx = 2x + 2y
        assert_eq!(dx, x().add(&y()).mul_scalar(&BigRational::from_integer(2.into())));
    }

    #[test]
    fn exact_division() {
        let s = x().add(&y());
        let prod = s.mul(&s).mul(&x());
        let q = prod.exact_div(&s).unwrap();
        assert_eq!(q, s.mul(&x()));
        assert!(x().add(&Poly::one()).exact_div(&y()).is_none());
    }

    #[test]
    fn gcd_simple() {
        // gcd((x+y)*x, (x+y)*y) = x+y
        let s = x().add(&y());
        let a = s.mul(&x());
        let b = s.mul(&y());
        assert_eq!(gcd(&a, &b), s);
        // coprime
        let g = gcd(&x().add(&Poly::one()), &y().add(&Poly::int(2)));
        assert!(g.is_one());
    }

    #[test]
    fn gcd_with_monomial_content() {
        // gcd(x^3 y, x^2 y^2) = x^2 y
        let a = x().pow(3).mul(&y());
        let b = x().pow(2).mul(&y().pow(2));
        assert_eq!(gcd(&a, &b), x().pow(2).mul(&y()));
    }

    #[test]
    fn gcd_bigger() {
        // gcd((x^2 - y^2)(x + 2), (x + y)(x + 3)) = x + y
        let xmy = x().sub(&y());
        let xpy = x().add(&y());
        let a = xmy.mul(&xpy).mul(&x().add(&Poly::int(2)));
        let b = xpy.mul(&x().add(&Poly::int(3)));
        assert_eq!(gcd(&a, &b), xpy);
    }

    #[test]
    fn content_normalization() {
        let p = x().mul_scalar(&BigRational::new(4.into(), 6.into()));
        let (pp, c) = p.primitive_part();
        assert_eq!(pp, x());
        assert_eq!(c, BigRational::new(2.into(), 3.into()));
    }
}
