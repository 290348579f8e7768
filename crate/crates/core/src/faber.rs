//! Faber polynomials: the monic `phi_m` with `phi_m(J) = q^-m + O(q)` for a
//! hauptmodul `J`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::etaq::{hauptmodul_series, HauptmodulId};
use crate::series::{Exponent, QExpansion};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaberPolynomial {
    pub id: HauptmodulId,
    pub m: u32,
    /// Ascending coefficients; `coeffs[m] == 1`.
    pub coeffs: Vec<BigInt>,
}

impl FaberPolynomial {
    /// `phi_m(x)` by Horner's rule.
    pub fn eval_series(&self, x: &QExpansion) -> QExpansion {
        let far = x.trunc() + Exponent::from_integer(1_000_000);
        let mut acc = QExpansion::zero(far);
        for c in self.coeffs.iter().rev() {
            acc = (&acc * x).add_constant(&BigRational::from_integer(c.clone()));
        }
        acc
    }

    /// `q^-m + sum_{n >= 1} b_n q^n` below `q^trunc`.
    pub fn expansion(&self, trunc: i64) -> Result<QExpansion> {
        let j = hauptmodul_series(self.id, required_trunc(self.m, trunc)?)?;
        Ok(self.eval_series(&j).truncate(Exponent::from_integer(trunc)))
    }
}

impl fmt::Display for FaberPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &BigInt::zero();
            let mag = if neg { -c } else { c.clone() };
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}X", if show_mag { "*" } else { "" })?,
                _ => write!(f, "{}X^{i}", if show_mag { "*" } else { "" })?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Hauptmodul truncation needed so that `J^m` is known below `q^trunc`.
fn required_trunc(m: u32, trunc: i64) -> Result<i64> {
    if m == 0 {
        return Err(Error::InvalidArgument("Faber index m must be positive".into()));
    }
    if trunc < 1 {
        return Err(Error::InsufficientTruncation {
            needed: "1".into(),
            have: trunc.to_string(),
        });
    }
    Ok(trunc + m as i64 - 1)
}

/// Eliminates `q^{-m+1} .. q^0` from `J^m` using lower powers of `J`.
pub fn faber_from_series(id: HauptmodulId, m: u32, j: &QExpansion) -> Result<FaberPolynomial> {
    if j.trunc() < Exponent::from_integer(m as i64) {
        return Err(Error::InsufficientTruncation {
            needed: m.to_string(),
            have: j.trunc().to_string(),
        });
    }
    let mut powers = vec![QExpansion::one(j.trunc() + Exponent::from_integer(m as i64))];
    for k in 1..=m as usize {
        let next = &powers[k - 1] * j;
        powers.push(next);
    }
    let mut coeffs = vec![BigRational::zero(); m as usize + 1];
    coeffs[m as usize] = BigRational::one();
    let mut residual = powers[m as usize].clone();
    for k in (0..m as usize).rev() {
        let c = residual
            .coeff_at(-(k as i64))
            .ok_or_else(|| Error::InsufficientTruncation {
                needed: "1".into(),
                have: residual.trunc().to_string(),
            })?;
        if !c.is_zero() {
            residual = &residual - &powers[k].scale(&c);
            coeffs[k] -= c;
        }
    }
    if residual.trunc() < Exponent::one() {
        return Err(Error::InsufficientTruncation {
            needed: "1".into(),
            have: residual.trunc().to_string(),
        });
    }
    let mut ints = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        if !c.is_integer() {
            return Err(Error::InvalidArgument(format!(
                "Faber polynomial of {id}, m = {m} has non-integral coefficient {c}"
            )));
        }
        ints.push(c.to_integer());
    }
    Ok(FaberPolynomial { id, m, coeffs: ints })
}

type FaberCache = Mutex<HashMap<(HauptmodulId, u32), Arc<FaberPolynomial>>>;

fn cache() -> &'static FaberCache {
    static CACHE: OnceLock<FaberCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `phi_m` for the given hauptmodul, memoized.
pub fn faber(id: HauptmodulId, m: u32) -> Result<Arc<FaberPolynomial>> {
    if let Some(hit) = cache().lock().expect("faber cache").get(&(id, m)) {
        return Ok(hit.clone());
    }
    let j = hauptmodul_series(id, required_trunc(m, 1)?)?;
    let poly = Arc::new(faber_from_series(id, m, &j)?);
    cache()
        .lock()
        .expect("faber cache")
        .entry((id, m))
        .or_insert_with(|| poly.clone());
    Ok(poly)
}
