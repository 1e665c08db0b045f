//! Rigorous enclosures with exact rational endpoints.
//!
//! Field operations on intervals are exact (no rounding step is ever needed
//! for +, -, *, /), so a chain of rational operations on zero-width inputs
//! stays zero-width. Width enters only through square roots and the
//! sine/cosine of an angle, both of which round outward at a requested bit
//! precision; enclosure width therefore shrinks monotonically as the
//! precision grows.

use crate::error::{Error, Result};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct Iv {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Iv {
    pub fn point(q: BigRational) -> Iv {
        Iv { lo: q.clone(), hi: q }
    }

    pub fn from_int(n: i64) -> Iv {
        Iv::point(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Iv {
        debug_assert!(lo <= hi);
        Iv { lo, hi }
    }

    pub fn zero() -> Iv {
        Iv::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn intersects(&self, other: &Iv) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn neg(&self) -> Iv {
        Iv { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, o: &Iv) -> Iv {
        Iv { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Iv) -> Iv {
        Iv { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn mul(&self, o: &Iv) -> Iv {
        let cands = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Iv { lo, hi }
    }

    pub fn div(&self, o: &Iv) -> Result<Iv> {
        if o.contains_zero() {
            return Err(Error::DomainError("interval division by an enclosure of 0".into()));
        }
        let cands = [
            &self.lo / &o.lo,
            &self.lo / &o.hi,
            &self.hi / &o.lo,
            &self.hi / &o.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Ok(Iv { lo, hi })
    }

    pub fn pow(&self, n: i64) -> Result<Iv> {
        if n == 0 {
            return Ok(Iv::from_int(1));
        }
        let mut base = if n < 0 { Iv::from_int(1).div(self)? } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Iv::from_int(1);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        // even powers of an interval straddling zero still get a correct,
        // if slightly loose, enclosure from the product form; tighten at 0
        if n % 2 == 0 && self.contains_zero() && acc.lo.is_positive() {
            acc.lo = BigRational::zero();
        }
        Ok(acc)
    }

    /// Outward enclosure of the square root at `bits` of precision.
    pub fn sqrt(&self, bits: u32) -> Result<Iv> {
        if self.lo.is_negative() {
            if self.hi.is_negative() {
                return Err(Error::DomainError("square root of a negative enclosure".into()));
            }
            // straddles zero: take [0, sqrt(hi)]
            let hi = sqrt_rational_upper(&self.hi, bits);
            return Ok(Iv { lo: BigRational::zero(), hi });
        }
        Ok(Iv {
            lo: sqrt_rational_lower(&self.lo, bits),
            hi: sqrt_rational_upper(&self.hi, bits),
        })
    }

    /// Decimal rendering of the midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        let mid = self.midpoint();
        let scale = BigInt::from(10).pow(digits);
        let scaled = mid.numer() * &scale;
        let (q, r) = num_integer::Integer::div_rem(&scaled, mid.denom());
        // round half away from zero
        let mut n = q;
        let twice = &r * BigInt::from(2);
        if twice.magnitude() >= mid.denom().magnitude() {
            if scaled.sign() == Sign::Minus {
                n -= BigInt::one();
            } else {
                n += BigInt::one();
            }
        }
        let negative = n.sign() == Sign::Minus;
        let mag = n.magnitude().to_string();
        let mag = if mag.len() <= digits as usize {
            format!("{}{}", "0".repeat(digits as usize + 1 - mag.len()), mag)
        } else {
            mag
        };
        let split = mag.len() - digits as usize;
        let (int_part, frac_part) = mag.split_at(split);
        let body = if digits == 0 {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

/// Lower bound of sqrt(q) for q >= 0, with roughly `bits` bits of accuracy.
fn sqrt_rational_lower(q: &BigRational, bits: u32) -> BigRational {
    if q.is_zero() {
        return BigRational::zero();
    }
    let p = q.numer();
    let d = q.denom();
    // sqrt(p/d) = sqrt(p*d)/d
    let n = p * d;
    let scale = BigInt::one() << bits;
    let s = (&n * (&scale * &scale)).sqrt();
    BigRational::new(s, d * scale)
}

fn sqrt_rational_upper(q: &BigRational, bits: u32) -> BigRational {
    if q.is_zero() {
        return BigRational::zero();
    }
    let p = q.numer();
    let d = q.denom();
    let n = p * d;
    let scale = BigInt::one() << bits;
    let s = (&n * (&scale * &scale)).sqrt() + BigInt::one();
    BigRational::new(s, d * scale)
}

/// Enclosure of sin(x) for rational x, |x| <= 16, by exact Taylor summation
/// with an alternating-tail remainder bound.
pub fn sin_enclosure(x: &BigRational, bits: u32) -> Result<Iv> {
    trig_enclosure(x, bits, true)
}

/// Enclosure of cos(x) under the same conditions as [`sin_enclosure`].
pub fn cos_enclosure(x: &BigRational, bits: u32) -> Result<Iv> {
    trig_enclosure(x, bits, false)
}

fn trig_enclosure(x: &BigRational, bits: u32, odd: bool) -> Result<Iv> {
    let sixteen = BigRational::from_integer(BigInt::from(16));
    if x.abs() > sixteen {
        return Err(Error::DomainError("angle outside the supported range |x| <= 16".into()));
    }
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits + 2));
    let x2 = x * x;
    // first term: x for sine, 1 for cosine
    let mut term = if odd { x.clone() } else { BigRational::one() };
    let mut sum = term.clone();
    let mut k: u64 = 0;
    loop {
        // term_{k+1} = -term_k * x^2 / ((n+1)(n+2)) with n = 2k+1 (sin) or 2k (cos)
        let n = if odd { 2 * k + 1 } else { 2 * k };
        let denom = BigRational::from_integer(BigInt::from((n + 1) * (n + 2)));
        term = -(&term * &x2) / denom;
        sum += &term;
        k += 1;
        let n_next = if odd { 2 * k + 1 } else { 2 * k };
        // once the degree exceeds |x| the terms decrease monotonically, so the
        // alternating-series bound applies with the next term's magnitude
        if BigRational::from_integer(BigInt::from(n_next)) > x.abs() && term.abs() < eps {
            break;
        }
        if k > 400 {
            return Err(Error::Internal("trig series failed to converge".into()));
        }
    }
    let bound = eps;
    Ok(Iv { lo: &sum - &bound, hi: &sum + &bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sqrt_two_encloses() {
        let two = Iv::point(rat(2, 1));
        let s = two.sqrt(128).unwrap();
        assert!(s.lo < s.hi);
        let sq_lo = &s.lo * &s.lo;
        let sq_hi = &s.hi * &s.hi;
        assert!(sq_lo <= rat(2, 1) && rat(2, 1) <= sq_hi);
        assert!(s.width() < rat(1, 1_000_000_000_000_000_000));
    }

    #[test]
    fn sqrt_precision_monotone() {
        let two = Iv::point(rat(2, 1));
        let a = two.sqrt(32).unwrap();
        let b = two.sqrt(64).unwrap();
        assert!(b.width() <= a.width());
    }

    #[test]
    fn sin_zero_and_known_values() {
        let z = sin_enclosure(&rat(0, 1), 64).unwrap();
        assert!(z.contains_zero());
        // sin(1) = 0.8414709848...
        let s1 = sin_enclosure(&rat(1, 1), 96).unwrap();
        assert!(s1.lo > rat(8414709848, 10_000_000_000));
        assert!(s1.hi < rat(8414709849, 10_000_000_000));
        // cos(1) = 0.5403023058...
        let c1 = cos_enclosure(&rat(1, 1), 96).unwrap();
        assert!(c1.lo > rat(5403023058, 10_000_000_000));
        assert!(c1.hi < rat(5403023059, 10_000_000_000));
        // sin^2 + cos^2 = 1
        let one = s1.mul(&s1).add(&c1.mul(&c1));
        assert!(one.contains(&rat(1, 1)));
    }

    #[test]
    fn large_angle_ok() {
        // sin(12) = -0.5365729180...
        let s = sin_enclosure(&rat(12, 1), 128).unwrap();
        assert!(s.lo > rat(-5365729181, 10_000_000_000));
        assert!(s.hi < rat(-5365729180, 10_000_000_000));
    }

    #[test]
    fn division_by_zero_interval_rejected() {
        let a = Iv::from_int(1);
        let b = Iv::new(rat(-1, 2), rat(1, 2));
        assert!(a.div(&b).is_err());
    }

    #[test]
    fn decimal_rendering() {
        let v = Iv::point(rat(-7, 17));
        assert_eq!(v.to_decimal(6), "-0.411765");
        let w = Iv::point(rat(5, 2));
        assert_eq!(w.to_decimal(1), "2.5");
        assert_eq!(w.to_decimal(0), "3");
    }
}
