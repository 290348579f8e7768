//! Truncated Laurent series in fractional powers of `q` with exact rational
//! coefficients.
//!
//! A [`QExpansion`] stores its coefficients densely along the exponent lattice
//! `(offset + i*step) / den`. Below the truncation bound `trunc / den` the data
//! is complete: any exponent that is not stored has coefficient zero. Nothing
//! is ever stored or fabricated at or beyond the bound.
//!
//! Every value is normalized on construction: leading and trailing zeros are
//! stripped and `den` is reduced as far as the lattice and the (exact)
//! truncation bound allow.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent of `q`.
pub type Exponent = Rational64;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "SeriesJson", try_from = "SeriesJson")]
pub struct QExpansion {
    den: i64,
    offset: i64,
    step: i64,
    trunc: i64,
    coeffs: Vec<BigRational>,
}

/// On-disk shape of a series. `offset`, `step` and `trunc` are numerators over
/// `den`; `coeffs[i]` is the coefficient of `q^((offset + i*step)/den)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub den: i64,
    pub offset: i64,
    pub step: i64,
    pub trunc: i64,
    pub coeffs: Vec<String>,
}

impl From<QExpansion> for SeriesJson {
    fn from(s: QExpansion) -> Self {
        SeriesJson {
            den: s.den,
            offset: s.offset,
            step: s.step,
            trunc: s.trunc,
            coeffs: s.coeffs.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl TryFrom<SeriesJson> for QExpansion {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        if j.den <= 0 || j.step <= 0 {
            return Err(Error::Parse("den and step must be positive".into()));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(QExpansion::from_raw(j.den, j.offset, j.step, j.trunc, coeffs))
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn exponent(num: i64, den: i64) -> Exponent {
    Rational64::new(num, den)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    Integer::div_ceil(&a, &b)
}

/// Writes a rational slice as integers over a common denominator.
fn integer_parts(c: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let lcm = c
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = c
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    (ints, lcm)
}

impl QExpansion {
    /// Builds a series from raw lattice data and normalizes it.
    pub fn from_raw(den: i64, offset: i64, step: i64, trunc: i64, coeffs: Vec<BigRational>) -> Self {
        assert!(den > 0 && step > 0, "den and step must be positive");
        QExpansion {
            den,
            offset,
            step,
            trunc,
            coeffs,
        }
        .normalized()
    }

    /// The series `O(q^trunc)`.
    pub fn zero(trunc: Exponent) -> Self {
        let t = trunc.reduced();
        QExpansion::from_raw(*t.denom(), *t.numer(), 1, *t.numer(), Vec::new())
    }

    /// The constant `c + O(q^trunc)`.
    pub fn constant(c: BigRational, trunc: Exponent) -> Self {
        QExpansion::monomial(c, Exponent::zero(), trunc)
    }

    pub fn one(trunc: Exponent) -> Self {
        QExpansion::constant(BigRational::one(), trunc)
    }

    /// `c * q^e + O(q^trunc)`.
    pub fn monomial(c: BigRational, e: Exponent, trunc: Exponent) -> Self {
        let den = e.denom().lcm(trunc.denom());
        let off = e.numer() * (den / e.denom());
        let t = trunc.numer() * (den / trunc.denom());
        QExpansion::from_raw(den, off, 1, t, vec![c])
    }

    /// Integral-grid series `sum coeffs[i] q^(offset+i) + O(q^trunc)`.
    pub fn from_coeffs(offset: i64, coeffs: Vec<BigRational>, trunc: i64) -> Self {
        QExpansion::from_raw(1, offset, 1, trunc, coeffs)
    }

    pub fn from_ints(offset: i64, coeffs: &[i64], trunc: i64) -> Self {
        QExpansion::from_coeffs(
            offset,
            coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            trunc,
        )
    }

    fn normalized(mut self) -> Self {
        let keep = if self.trunc > self.offset {
            ceil_div(self.trunc - self.offset, self.step).max(0) as usize
        } else {
            0
        };
        self.coeffs.truncate(keep);
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            None => {
                self.coeffs.clear();
                self.offset = self.trunc;
                self.step = 1;
                let g = self.den.gcd(&self.trunc);
                if g > 1 {
                    self.den /= g;
                    self.trunc /= g;
                    self.offset = self.trunc;
                }
                return self;
            }
            Some(first) => {
                self.coeffs.drain(..first);
                self.offset += first as i64 * self.step;
            }
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let stride = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(0usize, |g, (i, _)| g.gcd(&i));
        if stride == 0 {
            self.step = self.den;
        } else if stride > 1 {
            self.coeffs = self.coeffs.into_iter().step_by(stride).collect();
            self.step *= stride as i64;
        }
        let g = self.den.gcd(&self.step.gcd(&self.offset.gcd(&self.trunc)));
        if g > 1 {
            self.den /= g;
            self.step /= g;
            self.offset /= g;
            self.trunc /= g;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent bound: coefficients at exponents `>= trunc()` are unknown.
    pub fn trunc(&self) -> Exponent {
        exponent(self.trunc, self.den)
    }

    /// Exponent of the leading nonzero term.
    pub fn leading_exponent(&self) -> Option<Exponent> {
        (!self.is_zero()).then(|| exponent(self.offset, self.den))
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.coeffs.first()
    }

    /// Exponent denominator of the storage lattice.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// True when every stored term sits at an integer exponent.
    pub fn is_integral_grid(&self) -> bool {
        self.is_zero() || (self.offset % self.den == 0 && self.step % self.den == 0)
    }

    /// Coefficient of `q^e`, or `None` when `e` is at or beyond the truncation.
    pub fn coeff(&self, e: Exponent) -> Option<BigRational> {
        if e >= self.trunc() {
            return None;
        }
        let scaled = e * Rational64::from_integer(self.den);
        if !scaled.is_integer() {
            return Some(BigRational::zero());
        }
        let num = scaled.to_integer() - self.offset;
        if num < 0 || num % self.step != 0 {
            return Some(BigRational::zero());
        }
        let idx = (num / self.step) as usize;
        Some(self.coeffs.get(idx).cloned().unwrap_or_else(BigRational::zero))
    }

    /// Coefficient of `q^n` for integer `n`.
    pub fn coeff_at(&self, n: i64) -> Option<BigRational> {
        self.coeff(Exponent::from_integer(n))
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &BigRational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (exponent(self.offset + i as i64 * self.step, self.den), c))
    }

    /// Lowers the truncation bound to `min(trunc(), t)`.
    pub fn truncate(&self, t: Exponent) -> Self {
        let t = t.reduced();
        let den = self.den.lcm(t.denom());
        let f = den / self.den;
        let tt = t.numer() * (den / t.denom());
        QExpansion::from_raw(
            den,
            self.offset * f,
            self.step * f,
            (self.trunc * f).min(tt),
            self.coeffs.clone(),
        )
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &BigRational) -> Self {
        QExpansion::from_raw(
            self.den,
            self.offset,
            self.step,
            self.trunc,
            self.coeffs.iter().map(|x| x * c).collect(),
        )
    }

    pub fn add_constant(&self, c: &BigRational) -> Self {
        self + &QExpansion::constant(c.clone(), self.trunc())
    }

    /// Multiplicative inverse; the relative precision is preserved.
    pub fn invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let n = ceil_div(self.trunc - self.offset, self.step) as usize;
        let (a, d) = integer_parts(&self.coeffs);
        let a0 = a[0].clone();
        let mut a0_pows = Vec::with_capacity(n + 1);
        a0_pows.push(BigInt::one());
        for k in 1..=n {
            let next = &a0_pows[k - 1] * &a0;
            a0_pows.push(next);
        }
        // c[k] = a0^(k+1) * b[k] stays integral.
        let mut c: Vec<BigInt> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                c.push(BigInt::one());
                continue;
            }
            let mut acc = BigInt::zero();
            for j in 1..=k.min(a.len() - 1) {
                if a[j].is_zero() || c[k - j].is_zero() {
                    continue;
                }
                acc += &a[j] * &a0_pows[j - 1] * &c[k - j];
            }
            c.push(-acc);
        }
        let coeffs = c
            .into_iter()
            .enumerate()
            .map(|(k, ck)| BigRational::new(ck * &d, a0_pows[k + 1].clone()))
            .collect();
        Ok(QExpansion::from_raw(
            self.den,
            -self.offset,
            self.step,
            self.trunc - 2 * self.offset,
            coeffs,
        ))
    }

    /// Integer power by repeated squaring; negative powers go through [`invert`](Self::invert).
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k == 0 {
            let rel = self.trunc - self.offset;
            return Ok(QExpansion::from_raw(self.den, 0, 1, rel, vec![BigRational::one()]));
        }
        let mut base = if k < 0 { self.invert()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc: Option<QExpansion> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc.expect("k != 0"))
    }

    /// `q d/dq`, i.e. `(2 pi i)^-1 d/d tau` on q-expansions.
    pub fn q_derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = BigRational::new(
                    BigInt::from(self.offset + i as i64 * self.step),
                    BigInt::from(self.den),
                );
                c * e
            })
            .collect();
        QExpansion::from_raw(self.den, self.offset, self.step, self.trunc, coeffs)
    }

    /// `sum a_n q^n -> sum a_{tn} q^n`.
    pub fn u_operator(&self, t: u64) -> Result<Self> {
        let t = t as i64;
        assert!(t > 0, "U_t needs t >= 1");
        if self.is_zero() {
            let bound = ceil_div(self.trunc, self.den * t);
            return Ok(QExpansion::from_raw(1, bound, 1, bound, Vec::new()));
        }
        if !self.is_integral_grid() {
            return Err(Error::NonIntegralGrid);
        }
        let trunc = ceil_div(self.trunc, self.den * t);
        let start = ceil_div(self.offset, self.den * t);
        let coeffs = (start..trunc)
            .map(|n| self.coeff_at(t * n).expect("below trunc"))
            .collect();
        Ok(QExpansion::from_raw(1, start, 1, trunc, coeffs))
    }

    /// `tau -> t tau`: every exponent is multiplied by `t`.
    pub fn v_operator(&self, t: u64) -> Self {
        let t = t as i64;
        assert!(t > 0, "V_t needs t >= 1");
        if self.is_zero() {
            return QExpansion::from_raw(self.den, self.trunc * t, 1, self.trunc * t, Vec::new());
        }
        QExpansion::from_raw(
            self.den,
            self.offset * t,
            self.step * t,
            self.trunc * t,
            self.coeffs.clone(),
        )
    }

    /// First exponent below the common truncation where the two series differ.
    pub fn first_difference(&self, other: &QExpansion) -> Option<Exponent> {
        (self - other).leading_exponent()
    }

    /// Rescaled lattice data over denominator `den` (a multiple of `self.den`).
    fn lattice_over(&self, den: i64) -> (i64, i64, i64) {
        let f = den / self.den;
        (self.offset * f, self.step * f, self.trunc * f)
    }
}

impl PartialEq for QExpansion {
    fn eq(&self, other: &Self) -> bool {
        self.trunc() == other.trunc() && self.terms().eq(other.terms())
    }
}

impl Eq for QExpansion {}

impl Add for &QExpansion {
    type Output = QExpansion;

    fn add(self, b: &QExpansion) -> QExpansion {
        let a = self;
        if a.is_zero() {
            return b.truncate(a.trunc());
        }
        if b.is_zero() {
            return a.truncate(b.trunc());
        }
        let den = a.den.lcm(&b.den);
        let (ao, a_step, at) = a.lattice_over(den);
        let (bo, b_step, bt) = b.lattice_over(den);
        let trunc = at.min(bt);
        let off = ao.min(bo);
        let step = a_step.gcd(&b_step).gcd(&(ao - bo).abs());
        let n = if trunc > off { ceil_div(trunc - off, step) as usize } else { 0 };
        let mut coeffs = vec![BigRational::zero(); n];
        for (o, s, cs) in [(ao, a_step, &a.coeffs), (bo, b_step, &b.coeffs)] {
            for (i, c) in cs.iter().enumerate() {
                let k = ((o + i as i64 * s - off) / step) as usize;
                if k < n {
                    coeffs[k] += c;
                }
            }
        }
        QExpansion::from_raw(den, off, step, trunc, coeffs)
    }
}

impl Neg for &QExpansion {
    type Output = QExpansion;

    fn neg(self) -> QExpansion {
        QExpansion {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }
}

impl Sub for &QExpansion {
    type Output = QExpansion;

    fn sub(self, b: &QExpansion) -> QExpansion {
        self + &(-b)
    }
}

impl Mul for &QExpansion {
    type Output = QExpansion;

    fn mul(self, b: &QExpansion) -> QExpansion {
        let a = self;
        let den = a.den.lcm(&b.den);
        let (ao, a_step, at) = a.lattice_over(den);
        let (bo, b_step, bt) = b.lattice_over(den);
        let trunc = (at + bo).min(bt + ao);
        if a.is_zero() || b.is_zero() {
            return QExpansion::from_raw(den, trunc, 1, trunc, Vec::new());
        }
        let step = a_step.gcd(&b_step);
        let off = ao + bo;
        let n = if trunc > off { ceil_div(trunc - off, step) as usize } else { 0 };
        let (ai, ad) = integer_parts(&a.coeffs);
        let (bi, bd) = integer_parts(&b.coeffs);
        let ra = (a_step / step) as usize;
        let rb = (b_step / step) as usize;
        let mut acc = vec![BigInt::zero(); n];
        for (i, x) in ai.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let base = i * ra;
            if base >= n {
                break;
            }
            for (j, y) in bi.iter().enumerate() {
                let k = base + j * rb;
                if k >= n {
                    break;
                }
                if !y.is_zero() {
                    acc[k] += x * y;
                }
            }
        }
        let d = ad * bd;
        let coeffs = acc.into_iter().map(|c| BigRational::new(c, d.clone())).collect();
        QExpansion::from_raw(den, off, step, trunc, coeffs)
    }
}

impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let (neg, mag) = if c.is_negative() { (true, -c.clone()) } else { (false, c.clone()) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mono = if e.is_zero() {
                String::new()
            } else if e.is_one() {
                "q".to_string()
            } else {
                format!("q^{}", fmt_exponent(&e))
            };
            match (mag.is_one(), mono.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        let t = self.trunc();
        if t.is_zero() {
            write!(f, "O(1)")
        } else if t.is_one() {
            write!(f, "O(q)")
        } else {
            write!(f, "O(q^{})", fmt_exponent(&t))
        }
    }
}

fn fmt_exponent(e: &Exponent) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("({e})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn s(offset: i64, c: &[i64], trunc: i64) -> QExpansion {
        QExpansion::from_ints(offset, c, trunc)
    }

    fn e(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    #[test]
    fn add_cancels() {
        let a = s(0, &[1, 1], 10);
        let b = s(0, &[1, -1], 10);
        assert_eq!(&a + &b, s(0, &[2], 10));
        let c = s(-1, &[1, 0, 0, 0, 3], 10);
        let d = s(-1, &[1, 0, 0, 0, -3], 10);
        assert_eq!(&c + &d, s(-1, &[2], 10));
    }

    #[test]
    fn add_zero_takes_min_trunc() {
        let a = s(0, &[1, 2, 3], 8);
        let z = QExpansion::zero(e(5, 1));
        let sum = &a + &z;
        assert_eq!(sum.trunc(), e(5, 1));
        assert_eq!(sum, s(0, &[1, 2, 3], 5));
    }

    #[test]
    fn mul_basics() {
        let a = s(0, &[1, 1], 10);
        let b = s(0, &[1, -1], 10);
        assert_eq!(&a * &b, s(0, &[1, 0, -1], 10));
        let qinv = s(-1, &[1], 10);
        let q = s(1, &[1], 10);
        assert_eq!((&qinv * &q).coeff_at(0), Some(int(1)));
        assert_eq!((&qinv * &q).trunc(), e(9, 1));
    }

    #[test]
    fn mul_trunc_rule() {
        let a = s(-1, &[1, 5], 4);
        let b = s(2, &[1], 6);
        let p = &a * &b;
        // min(4 + 2, 6 - 1)
        assert_eq!(p.trunc(), e(5, 1));
        assert_eq!(p.leading_exponent(), Some(e(1, 1)));
    }

    #[test]
    fn invert_geometric() {
        let a = s(0, &[1, -1], 6);
        let b = a.invert().unwrap();
        assert_eq!(b, s(0, &[1, 1, 1, 1, 1, 1], 6));
        assert_eq!((&a * &b), QExpansion::one(e(6, 1)));
        let c = s(0, &[1, -24], 5).invert().unwrap();
        assert_eq!(c.coeff_at(2), Some(int(576)));
        let qi = s(-1, &[1], 5).invert().unwrap();
        assert_eq!(qi, s(1, &[1], 7));
    }

    #[test]
    fn invert_rational_leading() {
        let a = s(0, &[2, 1], 4);
        let b = a.invert().unwrap();
        assert_eq!(b.coeff_at(0), Some(rat(1, 2)));
        assert_eq!(b.coeff_at(1), Some(rat(-1, 4)));
        assert_eq!(b.coeff_at(3), Some(rat(-1, 16)));
        assert!(matches!(QExpansion::zero(e(3, 1)).invert(), Err(Error::ZeroLeadingCoefficient)));
    }

    #[test]
    fn powers() {
        let a = s(0, &[1, 1], 10);
        assert_eq!(a.pow_int(2).unwrap(), s(0, &[1, 2, 1], 10));
        assert_eq!(a.pow_int(0).unwrap(), QExpansion::one(e(10, 1)));
        let q24 = QExpansion::monomial(int(1), e(1, 24), e(2, 1));
        let q = q24.pow_int(24).unwrap();
        assert_eq!(q.leading_exponent(), Some(e(1, 1)));
        assert!(q.is_integral_grid());
        let inv = s(0, &[1, -1], 5).pow_int(-2).unwrap();
        assert_eq!(inv, s(0, &[1, 2, 3, 4, 5], 5));
    }

    #[test]
    fn derivative() {
        let a = s(-1, &[1, 0, 0, 0, 7], 6);
        assert_eq!(a.q_derivative(), s(-1, &[-1, 0, 0, 0, 21], 6));
        assert!(QExpansion::constant(int(5), e(3, 1)).q_derivative().is_zero());
    }

    #[test]
    fn u_and_v() {
        let a = s(-2, &[1, 0, 0, 3, 5], 5);
        let u = a.u_operator(2).unwrap();
        assert_eq!(u, s(-1, &[1, 0, 5], 3));
        assert_eq!(a.u_operator(1).unwrap(), a);
        let b = s(0, &[1, 1], 6);
        assert_eq!(b.v_operator(2), s(0, &[1, 0, 1], 12));
        assert_eq!(b.v_operator(1), b);
        assert_eq!(b.v_operator(3).u_operator(3).unwrap(), b);
        let frac = QExpansion::monomial(int(1), e(1, 24), e(2, 1));
        assert!(matches!(frac.u_operator(2), Err(Error::NonIntegralGrid)));
    }

    #[test]
    fn coefficient_lookup() {
        let a = QExpansion::monomial(int(3), e(1, 24), e(1, 1));
        assert_eq!(a.coeff(e(1, 24)), Some(int(3)));
        assert_eq!(a.coeff(e(1, 12)), Some(int(0)));
        assert_eq!(a.coeff(e(1, 1)), None);
    }

    #[test]
    fn json_round_trip() {
        let a = &s(-1, &[1, 0, 744, 196884], 3) + &QExpansion::monomial(rat(-7, 2), e(1, 24), e(3, 1));
        let text = serde_json::to_string(&a).unwrap();
        let b: QExpansion = serde_json::from_str(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&b).unwrap(), text);
        assert!(text.contains("\"-7/2\""));
    }

    #[test]
    fn display() {
        let a = s(-1, &[1, 0, -3, 1], 3);
        assert_eq!(a.to_string(), "q^-1 - 3*q + q^2 + O(q^3)");
    }
}
