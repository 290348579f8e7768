//! Modular trace tables `t_m^(N)(d)` and `t_m^(N*)(d)`, their boundary values
//! at `d <= 0`, and the generating series assembled from them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, pow2, sigma1};
use crate::cmnum::{faber_value_at, rational_round, CMPoint, PrecisionContext};
use crate::error::{Error, Result};
use crate::etaq::{theta_quarter_series, HauptmodulId};
use crate::faber::{faber, FaberPolynomial};
use crate::quadforms::{
    classes_gamma0, evaluation_form, fricke_orbits, heegner_point, mu, valid_residues, FormClass,
};
use crate::series::{Exponent, QExpansion};

/// Largest denominator accepted when reconstructing an unstarred trace.
pub const MAX_TRACE_DENOMINATOR: u32 = 12;

/// Whether `-d` is a square modulo `4N`, i.e. `Q_{d,N}` is nonempty.
pub fn admissible(d: i64, level: u32) -> bool {
    d > 0 && !valid_residues(d, level).is_empty()
}

fn class_value(poly: &FaberPolynomial, class: &FormClass, ctx: &PrecisionContext) -> Result<Complex> {
    let form = evaluation_form(&class.rep, class.level);
    let point = CMPoint::new(heegner_point(&form)?)?;
    faber_value_at(poly, &point, ctx)
}

/// Rounds a complex sum of CM values to the rational it must equal.
fn reconstruct(sum: &Complex, d: i64, level: u32, ctx: &PrecisionContext) -> Result<BigRational> {
    let tol = ctx.tolerance();
    let imag = Float::with_val(ctx.bits, sum.imag().abs_ref());
    if imag > tol {
        return Err(Error::NonRealTrace {
            d,
            level,
            imag: imag.to_string_radix(10, Some(10)),
        });
    }
    rational_round(sum.real(), MAX_TRACE_DENOMINATOR, &tol)
}

fn faber_star(level: u32, m: u32) -> Result<std::sync::Arc<FaberPolynomial>> {
    faber(HauptmodulId::new(level, true)?, m)
}

/// `sum over Q_{d,N,h}/Gamma_0(N)` of `phi_m(j_N*(alpha_Q)) / |stab|`.
pub fn trace_unstarred(level: u32, m: u32, d: i64, h: i64, ctx: &PrecisionContext) -> Result<BigRational> {
    let poly = faber_star(level, m)?;
    let classes = classes_gamma0(d, level, h)?;
    let prec = ctx.bits + 16;
    let mut sum = Complex::with_val(prec, 0);
    for class in &classes {
        sum += class_value(&poly, class, ctx)? / class.stabilizer_order;
    }
    reconstruct(&sum, d, level, ctx)
}

/// `2^-mu_N(d)` times the unstarred trace for any valid residue.
pub fn trace_starred(level: u32, m: u32, d: i64, ctx: &PrecisionContext) -> Result<BigRational> {
    match valid_residues(d, level).first() {
        Some(&h) => Ok(trace_unstarred(level, m, d, h, ctx)? * pow2(-(mu(level, d) as i32))),
        None => Ok(BigRational::zero()),
    }
}

/// Starred trace summed directly over `Gamma_0*(N)`-orbits, with each orbit's
/// stabilizer order `|stab in Gamma_0(N)| * #{W_e fixing the class}`.
pub fn trace_starred_by_orbits(level: u32, m: u32, d: i64, ctx: &PrecisionContext) -> Result<BigRational> {
    let poly = faber_star(level, m)?;
    let prec = ctx.bits + 16;
    let mut sum = Complex::with_val(prec, 0);
    for (members, fixing) in fricke_orbits(d, level)? {
        let first = &members[0];
        sum += class_value(&poly, first, ctx)? / (first.stabilizer_order * fixing);
    }
    reconstruct(&sum, d, level, ctx)
}

/// Unstarred and starred values at `d = 0` and `d = -kappa^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryValues {
    pub unstarred: BTreeMap<i64, BigRational>,
    pub starred: BTreeMap<i64, BigRational>,
}

/// Boundary traces of a form with principal part `sum a(-n) q^-n`, given as
/// `n -> a(-n)`:
/// `t(0) = 2 sum_n a(-n) sum_{e | N} e sigma_1(n/e)` and
/// `t(-kappa^2) = -2^mu_N(kappa) kappa sum_{kappa | n} a(-n)`.
/// Starred values divide by `2^mu_N(d)` with `mu_N(0) = omega(N)`.
pub fn boundary_traces(level: u32, principal_part: &BTreeMap<i64, BigRational>) -> BoundaryValues {
    let mut unstarred = BTreeMap::new();
    let mut t0 = BigRational::zero();
    for (&n, a) in principal_part {
        for e in divisors(level as u64) {
            let x = BigRational::new(BigInt::from(n), BigInt::from(e));
            t0 += a * sigma1(&x) * BigInt::from(e) * BigInt::from(2);
        }
    }
    unstarred.insert(0, t0);
    let kmax = principal_part.keys().copied().max().unwrap_or(0);
    for kappa in 1..=kmax {
        let s: BigRational = principal_part
            .iter()
            .filter(|(&n, _)| n % kappa == 0)
            .fold(BigRational::zero(), |acc, (_, a)| acc + a);
        if !s.is_zero() {
            let v = -(s * BigInt::from(kappa)) * pow2(mu(level, kappa) as i32);
            unstarred.insert(-kappa * kappa, v);
        }
    }
    let starred = unstarred
        .iter()
        .map(|(&d, v)| (d, v * pow2(-(mu(level, d) as i32))))
        .collect();
    BoundaryValues { unstarred, starred }
}

/// Principal part `q^-m` of `phi_m`.
pub fn faber_principal_part(m: u32) -> BTreeMap<i64, BigRational> {
    BTreeMap::from([(m as i64, BigRational::from_integer(1.into()))])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Computed,
    BoundaryFormula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub unstarred: BigRational,
    pub starred: BigRational,
    pub provenance: Provenance,
}

/// Exact traces `t_m^(N)(d)` and `t_m^(N*)(d)` for `d <= d_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTable {
    pub level: u32,
    pub m: u32,
    pub d_max: i64,
    pub entries: BTreeMap<i64, TraceEntry>,
}

impl TraceTable {
    fn lookup(&self, d: i64) -> Result<Option<&TraceEntry>> {
        if d > self.d_max {
            return Err(Error::InsufficientTable {
                needed: d,
                have: self.d_max,
            });
        }
        Ok(self.entries.get(&d))
    }

    /// `t_m^(N)(d)`; zero for indices without forms.
    pub fn unstarred(&self, d: i64) -> Result<BigRational> {
        Ok(self.lookup(d)?.map(|e| e.unstarred.clone()).unwrap_or_else(BigRational::zero))
    }

    /// `t_m^(N*)(d)`; zero for indices without forms.
    pub fn starred(&self, d: i64) -> Result<BigRational> {
        Ok(self.lookup(d)?.map(|e| e.starred.clone()).unwrap_or_else(BigRational::zero))
    }

    pub fn get(&self, d: i64, starred: bool) -> Result<BigRational> {
        if starred {
            self.starred(d)
        } else {
            self.unstarred(d)
        }
    }

    /// Smallest index with a possibly nonzero entry.
    pub fn min_index(&self) -> i64 {
        self.entries.keys().next().copied().unwrap_or(0)
    }
}

/// All admissible `0 < d <= d_max` plus the boundary indices, computed in parallel.
pub fn trace_table(level: u32, m: u32, d_max: i64, ctx: &PrecisionContext) -> Result<TraceTable> {
    if d_max < 0 {
        return Err(Error::InvalidArgument(format!("d_max must be nonnegative, got {d_max}")));
    }
    HauptmodulId::new(level, true)?;
    faber_star(level, m)?;
    let ds: Vec<i64> = (1..=d_max).filter(|&d| admissible(d, level)).collect();
    let computed: Vec<(i64, BigRational)> = ds
        .par_iter()
        .map(|&d| {
            let h = valid_residues(d, level)[0];
            trace_unstarred(level, m, d, h, ctx).map(|t| (d, t))
        })
        .collect::<Result<_>>()?;
    let mut entries = BTreeMap::new();
    let boundary = boundary_traces(level, &faber_principal_part(m));
    for (d, u) in boundary.unstarred {
        entries.insert(
            d,
            TraceEntry {
                unstarred: u,
                starred: boundary.starred[&d].clone(),
                provenance: Provenance::BoundaryFormula,
            },
        );
    }
    for (d, u) in computed {
        let starred = &u * pow2(-(mu(level, d) as i32));
        entries.insert(
            d,
            TraceEntry {
                unstarred: u,
                starred,
                provenance: Provenance::Computed,
            },
        );
    }
    Ok(TraceTable {
        level,
        m,
        d_max,
        entries,
    })
}

/// `sum_n (sum_r t(4n - r^2)) q^n` for `n <= n_max`, using starred or
/// unstarred entries.
pub fn generating_series(table: &TraceTable, n_max: i64, starred: bool) -> Result<QExpansion> {
    series_with_stride(table, n_max, starred, 1)
}

/// `sum_n (sum_r t(4 s n - r^2)) q^n`: the inner sums of the level-`s`
/// inclusion-exclusion terms.
pub fn series_with_stride(table: &TraceTable, n_max: i64, starred: bool, stride: i64) -> Result<QExpansion> {
    let low = table.min_index();
    let n_min = (low + 4 * stride - 1).div_euclid(4 * stride);
    let mut coeffs = Vec::new();
    for n in n_min..=n_max {
        let mut total = BigRational::zero();
        let mut r = 0i64;
        while 4 * stride * n - r * r >= low {
            let v = table.get(4 * stride * n - r * r, starred)?;
            total += if r == 0 { v } else { v * BigInt::from(2) };
            r += 1;
        }
        coeffs.push(total);
    }
    Ok(QExpansion::from_coeffs(n_min, coeffs, n_max + 1))
}

/// `G_2^(N*) = sum_{n >= -1} (sum_r t*(4n - r^2)) q^n`.
pub fn g2_series(table: &TraceTable, n_max: i64) -> Result<QExpansion> {
    generating_series(table, n_max, true)
}

/// Zagier's generating function `sum_d t_m(d) q^d` over all indices, boundary
/// terms included, for a level-one table.
pub fn zagier_series(table: &TraceTable) -> Result<QExpansion> {
    if table.level != 1 {
        return Err(Error::InvalidArgument("the Zagier series needs a level-one table".into()));
    }
    let low = table.min_index();
    let coeffs = (low..=table.d_max).map(|d| table.unstarred(d)).collect::<Result<Vec<_>>>()?;
    Ok(QExpansion::from_coeffs(low, coeffs, table.d_max + 1))
}

/// Theta decomposition data of the index-`N` Jacobi form built from the table.
#[derive(Clone, Debug)]
pub struct ThetaComponents {
    pub level: u32,
    /// `h_mu = sum_{d = -mu^2 (4N)} t^(N)(d) q^(d/4N)` for `mu = 0..2N`.
    pub h_mu: Vec<QExpansion>,
    /// `sum_{mu even} h_mu(N tau)`.
    pub split_even: QExpansion,
    /// `sum_{mu odd} h_mu(N tau)`.
    pub split_odd: QExpansion,
    /// `sum_{r even} q^(r^2/4)`.
    pub theta_even: QExpansion,
    /// `sum_{r odd} q^(r^2/4)`.
    pub theta_odd: QExpansion,
}

pub fn theta_decomposition(table: &TraceTable, d_max: i64) -> Result<ThetaComponents> {
    let n = table.level as i64;
    if d_max > table.d_max {
        return Err(Error::InsufficientTable {
            needed: d_max,
            have: table.d_max,
        });
    }
    let den = 4 * n;
    let low = table.min_index();
    let mut h_mu = Vec::new();
    for mu in 0..2 * n {
        let target = (-mu * mu).rem_euclid(den);
        let first = low + (target - low).rem_euclid(den);
        let mut coeffs = Vec::new();
        let mut d = first;
        while d <= d_max {
            coeffs.push(table.unstarred(d)?);
            d += den;
        }
        h_mu.push(QExpansion::from_raw(den, first, den, d_max + 1, coeffs));
    }
    let trunc = Exponent::new(d_max + 1, 4);
    let mut split_even = QExpansion::zero(trunc);
    let mut split_odd = QExpansion::zero(trunc);
    for (mu, h) in h_mu.iter().enumerate() {
        let v = h.v_operator(n as u64);
        if mu % 2 == 0 {
            split_even = &split_even + &v;
        } else {
            split_odd = &split_odd + &v;
        }
    }
    let theta_trunc = trunc + Exponent::from_integer(-low.min(0)) + 1;
    Ok(ThetaComponents {
        level: table.level,
        h_mu,
        split_even,
        split_odd,
        theta_even: theta_quarter_series(false, theta_trunc),
        theta_odd: theta_quarter_series(true, theta_trunc),
    })
}

impl ThetaComponents {
    /// `split_even * theta_even + split_odd * theta_odd`.
    pub fn recombined(&self) -> QExpansion {
        &(&self.split_even * &self.theta_even) + &(&self.split_odd * &self.theta_odd)
    }
}

/// Entrywise check of `t* = 2^-mu t` over the computed range.
pub fn starred_relation_holds(table: &TraceTable) -> bool {
    table.entries.iter().all(|(&d, e)| {
        e.starred == &e.unstarred * pow2(-(mu(table.level, d) as i32))
    })
}
