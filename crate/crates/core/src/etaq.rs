//! Concrete q-expansions: the Dedekind eta function and its quotients, the
//! hauptmoduln of the supported levels, weight-2 Eisenstein series and theta
//! series.

use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{int, sigma};
use crate::error::{Error, Result};
use crate::series::{Exponent, QExpansion};

/// Levels with a genus-zero `Gamma_0(N)`, square-free, plus the full modular group.
pub const SUPPORTED_LEVELS: [u32; 8] = [1, 2, 3, 5, 6, 7, 10, 13];

/// `prod eta(t tau)^r` over `(t, r)` factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotient {
    factors: Vec<(u32, i32)>,
}

impl EtaQuotient {
    pub fn new(factors: Vec<(u32, i32)>) -> Result<Self> {
        let mut seen = Vec::new();
        for &(t, r) in &factors {
            if t == 0 || r == 0 || seen.contains(&t) {
                return Err(Error::InvalidArgument(format!(
                    "eta quotient factors need distinct positive scales and nonzero exponents: {factors:?}"
                )));
            }
            seen.push(t);
        }
        Ok(EtaQuotient { factors })
    }

    pub fn factors(&self) -> &[(u32, i32)] {
        &self.factors
    }

    /// `(sum t*r) / 24`.
    pub fn leading_exponent(&self) -> Exponent {
        let s: i64 = self.factors.iter().map(|&(t, r)| t as i64 * r as i64).sum();
        Exponent::new(s, 24)
    }

    pub fn inverse(&self) -> Self {
        EtaQuotient {
            factors: self.factors.iter().map(|&(t, r)| (t, -r)).collect(),
        }
    }
}

/// A hauptmodul of `Gamma_0(N)` (unstarred) or of the Fricke group `Gamma_0*(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HauptmodulId {
    level: u32,
    starred: bool,
}

/// How a hauptmodul is assembled from eta quotients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HauptmodulRecipe {
    /// `E_4^3 / eta^24`.
    KleinJ,
    /// `Q + constant + fricke * Q^-1`, the last term only when `fricke` is set.
    Eta {
        quotient: EtaQuotient,
        constant: i64,
        fricke: Option<i64>,
    },
}

impl HauptmodulId {
    pub fn new(level: u32, starred: bool) -> Result<Self> {
        if !SUPPORTED_LEVELS.contains(&level) {
            return Err(Error::UnsupportedLevel(level));
        }
        Ok(HauptmodulId {
            level,
            starred: starred && level != 1,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn starred(&self) -> bool {
        self.starred
    }

    pub fn recipe(&self) -> HauptmodulRecipe {
        let q = |f: Vec<(u32, i32)>| EtaQuotient::new(f).expect("static recipe");
        match (self.level, self.starred) {
            (1, _) => HauptmodulRecipe::KleinJ,
            (6, false) => HauptmodulRecipe::Eta {
                quotient: q(vec![(1, -3), (2, 3), (3, 9), (6, -9)]),
                constant: -3,
                fricke: None,
            },
            (6, true) => HauptmodulRecipe::Eta {
                quotient: q(vec![(1, 6), (2, -6), (3, 6), (6, -6)]),
                constant: 6,
                fricke: Some(64),
            },
            (10, false) => HauptmodulRecipe::Eta {
                quotient: q(vec![(1, -1), (2, 1), (5, 5), (10, -5)]),
                constant: -1,
                fricke: None,
            },
            (10, true) => HauptmodulRecipe::Eta {
                quotient: q(vec![(1, 4), (2, -4), (5, 4), (10, -4)]),
                constant: 4,
                fricke: Some(16),
            },
            (p, starred) => {
                let k = 24 / (p as i32 - 1);
                HauptmodulRecipe::Eta {
                    quotient: q(vec![(1, k), (p, -k)]),
                    constant: k as i64,
                    fricke: starred.then(|| (p as i64).pow((k / 2) as u32)),
                }
            }
        }
    }
}

impl fmt::Display for HauptmodulId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 1 {
            write!(f, "j")
        } else if self.starred {
            write!(f, "j_{}*", self.level)
        } else {
            write!(f, "j_{}", self.level)
        }
    }
}

/// `q^(1/24) prod (1 - q^n)`, via the pentagonal number theorem.
pub fn eta_series(trunc: Exponent) -> Result<QExpansion> {
    let first = Exponent::new(1, 24);
    if trunc <= first {
        return Err(Error::InsufficientTruncation {
            needed: format!("> {first}"),
            have: trunc.to_string(),
        });
    }
    let den = 24i64.lcm(trunc.denom());
    let t = trunc.numer() * (den / trunc.denom());
    let offset = den / 24;
    let n = Integer::div_ceil(&(t - offset), &den) as usize;
    let mut coeffs = vec![BigRational::zero(); n];
    let mut k: i64 = 0;
    loop {
        let mut hit = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let g = (kk * (3 * kk - 1) / 2) as usize;
            if g < n {
                coeffs[g] = int(if kk.rem_euclid(2) == 0 { 1 } else { -1 });
                hit = true;
            }
        }
        if !hit {
            break;
        }
        k += 1;
    }
    Ok(QExpansion::from_raw(den, offset, den, t, coeffs))
}

/// `prod eta(t tau)^r` expanded to `trunc`.
pub fn eta_quotient_series(quotient: &EtaQuotient, trunc: Exponent) -> Result<QExpansion> {
    let lead = quotient.leading_exponent();
    let rel = trunc - lead;
    if rel <= Exponent::zero() {
        return Err(Error::InsufficientTruncation {
            needed: format!("> {lead}"),
            have: trunc.to_string(),
        });
    }
    let mut acc: Option<QExpansion> = None;
    for &(t, r) in quotient.factors() {
        let base = eta_series(Exponent::new(1, 24) + rel / Exponent::from_integer(t as i64))?
            .v_operator(t as u64);
        let factor = base.pow_int(r as i64)?;
        acc = Some(match acc {
            None => factor,
            Some(a) => &a * &factor,
        });
    }
    Ok(acc.unwrap_or_else(|| QExpansion::one(trunc)))
}

/// `1 + 240 sum sigma_3(n) q^n`.
pub fn e4_series(trunc: i64) -> QExpansion {
    let coeffs = (0..trunc.max(0))
        .map(|n| {
            if n == 0 {
                BigRational::one()
            } else {
                BigRational::from_integer(sigma(3, n) * 240)
            }
        })
        .collect();
    QExpansion::from_coeffs(0, coeffs, trunc)
}

/// `1 - 24 sum sigma_1(n) q^n`.
pub fn e2_series(trunc: i64) -> QExpansion {
    let coeffs = (0..trunc.max(0))
        .map(|n| {
            if n == 0 {
                BigRational::one()
            } else {
                BigRational::from_integer(sigma(1, n) * -24)
            }
        })
        .collect();
    QExpansion::from_coeffs(0, coeffs, trunc)
}

/// `N E_2(N tau) - E_2(tau) = (N - 1) + 24 sum sigma_1^(N)(n) q^n`.
pub fn eisenstein_e2n(level: u32, trunc: i64) -> QExpansion {
    let n = level as i64;
    let scaled = e2_series(Integer::div_ceil(&trunc, &n))
        .v_operator(level as u64)
        .scale(&int(n));
    &scaled - &e2_series(trunc)
}

/// `sum_{r in Z} q^(r^2)`.
pub fn theta0_series(trunc: i64) -> QExpansion {
    let mut coeffs = vec![BigRational::zero(); trunc.max(0) as usize];
    let mut r = 0i64;
    while r * r < trunc {
        coeffs[(r * r) as usize] = int(if r == 0 { 1 } else { 2 });
        r += 1;
    }
    QExpansion::from_coeffs(0, coeffs, trunc)
}

/// `sum_{r = parity mod 2} q^(r^2/4)`.
pub fn theta_quarter_series(odd: bool, trunc: Exponent) -> QExpansion {
    let den = 4i64.lcm(trunc.denom());
    let t = trunc.numer() * (den / trunc.denom());
    let f = den / 4;
    let mut terms = Vec::new();
    let mut r: i64 = if odd { 1 } else { 0 };
    while r * r * f < t {
        terms.push((r * r * f, if r == 0 { 1 } else { 2 }));
        r += 2;
    }
    let mut coeffs = vec![BigRational::zero(); t.max(0) as usize];
    for (e, c) in terms {
        coeffs[e as usize] = int(c);
    }
    QExpansion::from_raw(den, 0, 1, t, coeffs)
}

/// Hauptmodul expansion `q^-1 + c_0 + c_1 q + ...` below `q^trunc`.
pub fn hauptmodul_series(id: HauptmodulId, trunc: i64) -> Result<QExpansion> {
    if trunc <= -1 {
        return Err(Error::InsufficientTruncation {
            needed: "> -1".into(),
            have: trunc.to_string(),
        });
    }
    let t = Exponent::from_integer(trunc);
    let series = match id.recipe() {
        HauptmodulRecipe::KleinJ => {
            let delta = eta_quotient_series(&EtaQuotient::new(vec![(1, 24)])?, t + 2)?;
            &e4_series(trunc + 1).pow_int(3)? * &delta.invert()?
        }
        HauptmodulRecipe::Eta {
            quotient,
            constant,
            fricke,
        } => {
            let mut s = eta_quotient_series(&quotient, t)?.add_constant(&int(constant));
            if let Some(c) = fricke {
                let inverse = quotient.inverse();
                if t > inverse.leading_exponent() {
                    let inv = eta_quotient_series(&inverse, t)?;
                    s = &s + &inv.scale(&int(c));
                }
            }
            s
        }
    };
    if !series.is_integral_grid()
        || series.leading_exponent() != Some(Exponent::from_integer(-1))
        || !series.leading_coefficient().is_some_and(|c| c.is_one())
    {
        return Err(Error::InvalidArgument(format!(
            "{id} did not normalize to q^-1 + O(1) on the integral grid"
        )));
    }
    Ok(series)
}

/// Constant term of the hauptmodul as produced by its recipe.
pub fn hauptmodul_constant_term(id: HauptmodulId) -> Result<BigRational> {
    Ok(hauptmodul_series(id, 1)?.coeff_at(0).expect("trunc 1"))
}
