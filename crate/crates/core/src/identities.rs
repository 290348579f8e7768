//! Coefficient-by-coefficient verification of the trace identities, the
//! Eisenstein residuals and the `U_p` relations between hauptmoduln. Every
//! comparison is between exact rationals.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::arith::{divisors, int, moebius, omega, pow2, prime_factors, rat, sigma1, sigma1_level};
use crate::cmnum::PrecisionContext;
use crate::error::{Error, Result};
use crate::etaq::{eisenstein_e2n, hauptmodul_series, theta0_series, HauptmodulId, SUPPORTED_LEVELS};
use crate::quadforms::{mu, valid_residues};
use crate::series::{Exponent, QExpansion};
use crate::traces::{
    admissible, g2_series, series_with_stride, theta_decomposition, trace_unstarred, zagier_series, TraceTable,
};

fn ser_rat<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_rats<S: Serializer>(r: &Option<Vec<BigRational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        None => s.serialize_none(),
        Some(v) => s.collect_seq(v.iter().map(|x| x.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientRecord {
    pub n: i64,
    #[serde(serialize_with = "ser_rat")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub rhs: BigRational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub level: u32,
    pub n_min: i64,
    pub n_max: i64,
    pub records: Vec<CoefficientRecord>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(serialize_with = "ser_rats", skip_serializing_if = "Option::is_none")]
    pub basis_coefficients: Option<Vec<BigRational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    fn new(identity: &str, level: u32, records: Vec<CoefficientRecord>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        VerificationReport {
            identity: identity.to_string(),
            level,
            n_min: records.first().map_or(0, |r| r.n),
            n_max: records.last().map_or(0, |r| r.n),
            records,
            pass,
            precision_bits: None,
            basis_coefficients: None,
            note: None,
        }
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = Some(bits);
        self
    }

    /// First failing coefficient index, if any.
    pub fn first_failure(&self) -> Option<i64> {
        self.records.iter().find(|r| !r.pass).map(|r| r.n)
    }
}

fn record(n: i64, lhs: BigRational, rhs: BigRational) -> CoefficientRecord {
    let pass = lhs == rhs;
    CoefficientRecord { n, lhs, rhs, pass }
}

fn require_table(table: &TraceTable, needed: i64) -> Result<()> {
    if table.d_max < needed {
        return Err(Error::InsufficientTable {
            needed,
            have: table.d_max,
        });
    }
    Ok(())
}

fn check_level(table: &TraceTable, allow_one: bool) -> Result<()> {
    if (table.level == 1 && !allow_one) || !SUPPORTED_LEVELS.contains(&table.level) {
        return Err(Error::UnsupportedLevel(table.level));
    }
    if table.m != 2 {
        return Err(Error::InvalidArgument(format!("identities need m = 2 traces, got m = {}", table.m)));
    }
    Ok(())
}

fn sigma_level_at(level: u32, n: i64, div: i64) -> BigRational {
    sigma1_level(level, &rat(n, div))
}

/// The divisor-sum correction added to the starred trace sums for `2n c_n^(N)`.
pub fn sigma_correction(level: u32, n: i64) -> BigRational {
    match level {
        6 => int(7) * sigma_level_at(6, n, 1) + int(26) * sigma_level_at(3, n, 2)
            - int(3) * sigma_level_at(2, n, 3),
        10 => int(4) * sigma_level_at(10, n, 1) + int(12) * sigma_level_at(5, n, 2),
        p => {
            let p_ = p as i64;
            let factor = int(24) * (int(3) - int(p_) * sigma1(&rat(2, p_))) / int(p_ - 1);
            factor * sigma_level_at(p, n, 1)
        }
    }
}

fn coefficient(series: &QExpansion, n: i64) -> Result<BigRational> {
    series.coeff_at(n).ok_or_else(|| Error::InsufficientTruncation {
        needed: (n + 1).to_string(),
        have: series.trunc().to_string(),
    })
}

/// `2n c_n^(N) = sum_r t*(4n - r^2) + sigma correction` for `-1 <= n <= n_max`.
pub fn verify_hauptmodul_coefficients(table: &TraceTable, n_max: i64) -> Result<VerificationReport> {
    check_level(table, false)?;
    require_table(table, 4 * n_max)?;
    let j = hauptmodul_series(HauptmodulId::new(table.level, false)?, n_max + 1)?;
    let g = g2_series(table, n_max)?;
    let records = (-1..=n_max)
        .map(|n| {
            let lhs = coefficient(&j, n)? * int(2 * n);
            let rhs = coefficient(&g, n)? + sigma_correction(table.level, n);
            Ok(record(n, lhs, rhs))
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new("hauptmodul-coefficients", table.level, records))
}

/// `2n c_n^(N*) = sum_{e | N} mu(e) sum_r t*(4en - r^2)` for `-1 <= n <= n_max`.
pub fn verify_fricke_coefficients(table: &TraceTable, n_max: i64) -> Result<VerificationReport> {
    check_level(table, false)?;
    let level = table.level as i64;
    require_table(table, 4 * level * n_max)?;
    let j = hauptmodul_series(HauptmodulId::new(table.level, true)?, n_max + 1)?;
    let mut rhs = QExpansion::zero(Exponent::from_integer(n_max + 1));
    for e in divisors(table.level as u64) {
        let s = series_with_stride(table, n_max, true, e as i64)?;
        rhs = &rhs + &s.scale(&int(moebius(e)));
    }
    let records = (-1..=n_max)
        .map(|n| Ok(record(n, coefficient(&j, n)? * int(2 * n), coefficient(&rhs, n)?)))
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new("fricke-coefficients", table.level, records))
}

/// `2n c_n = sum_r t_2(4n - r^2)` for `j - 744`, together with
/// `(1/2) U_4(g_2 theta_0) = q dj/dq` on the same range.
pub fn verify_kaneko(table: &TraceTable, n_max: i64) -> Result<VerificationReport> {
    if table.level != 1 {
        return Err(Error::InvalidArgument("Kaneko's identity needs a level-one table".into()));
    }
    check_level(table, true)?;
    require_table(table, 4 * n_max)?;
    let j = hauptmodul_series(HauptmodulId::new(1, false)?, n_max + 1)?.add_constant(&int(-744));
    let sums = g2_series(table, n_max)?;
    let mut records: Vec<CoefficientRecord> = (-1..=n_max)
        .map(|n| Ok(record(n, coefficient(&j, n)? * int(2 * n), coefficient(&sums, n)?)))
        .collect::<Result<_>>()?;

    let g2 = zagier_series(table)?.truncate(Exponent::from_integer(4 * n_max + 1));
    let theta = theta0_series(4 * n_max + 5);
    let product = (&g2 * &theta).u_operator(4)?.scale(&rat(1, 2));
    let derivative = j.q_derivative();
    let mut note = None;
    for n in -1..=n_max {
        let (a, b) = (coefficient(&product, n)?, coefficient(&derivative, n)?);
        if a != b {
            note = Some(format!("weight-2 product form differs from q dj/dq at q^{n}"));
            records.push(record(n, b, a));
            break;
        }
    }
    let mut report = VerificationReport::new("kaneko", 1, records);
    report.note = note.or_else(|| Some("(1/2) U_4(g_2 theta_0) = q dj/dq on the checked range".into()));
    Ok(report)
}

/// Result of decomposing `2 q dj_N/dq - G_2^(N*)` in the Eisenstein basis of
/// `M_2(Gamma_0(N))`.
#[derive(Clone, Debug)]
pub struct EisensteinResidual {
    pub level: u32,
    pub residual: QExpansion,
    pub basis_names: Vec<String>,
    pub coefficients: Vec<BigRational>,
    /// `residual - sum coefficients * basis`; identically zero when the identity holds.
    pub remainder: QExpansion,
}

impl EisensteinResidual {
    /// Errors with the first surviving exponent unless the remainder vanishes.
    pub fn require_zero(&self) -> Result<()> {
        match self.remainder.leading_exponent() {
            None => Ok(()),
            Some(e) => Err(Error::ResidualNonzero {
                first_exponent: e.to_string(),
            }),
        }
    }
}

fn eisenstein_basis(level: u32, trunc: i64) -> (Vec<String>, Vec<QExpansion>) {
    let primes = prime_factors(level as u64);
    if primes.len() == 1 {
        return (vec![format!("E2^({level})")], vec![eisenstein_e2n(level, trunc)]);
    }
    let (p1, p2) = (primes[0], primes[1]);
    let names = vec![
        format!("E2^({level})(tau)"),
        format!("E2^({p2})({p1} tau)"),
        format!("E2^({p1})({p2} tau)"),
    ];
    let v = |p: u64, t: u64| eisenstein_e2n(p as u32, (trunc + t as i64 - 1) / t as i64).v_operator(t).truncate(Exponent::from_integer(trunc));
    let basis = vec![eisenstein_e2n(level, trunc), v(p2, p1), v(p1, p2)];
    (names, basis)
}

/// Solves the square system `A x = b` over the rationals.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidArgument("Eisenstein basis matrix is singular".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row).skip(col) {
                    *x -= &f * p;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Fits the residual on its first `dim` coefficients and returns the remainder
/// over the full range below `q^(n_max + 1)`.
pub fn eisenstein_residual(table: &TraceTable, n_max: i64) -> Result<EisensteinResidual> {
    check_level(table, false)?;
    require_table(table, 4 * n_max)?;
    let trunc = n_max + 1;
    let j = hauptmodul_series(HauptmodulId::new(table.level, false)?, trunc)?;
    let residual = &j.q_derivative().scale(&int(2)) - &g2_series(table, n_max)?;
    let (basis_names, basis) = eisenstein_basis(table.level, trunc);
    let dim = basis.len() as i64;
    if trunc < dim {
        return Err(Error::InsufficientTruncation {
            needed: dim.to_string(),
            have: trunc.to_string(),
        });
    }
    let a = (0..dim)
        .map(|n| basis.iter().map(|e| coefficient(e, n)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let b = (0..dim).map(|n| coefficient(&residual, n)).collect::<Result<Vec<_>>>()?;
    let coefficients = solve(a, b)?;
    let mut remainder = residual.clone();
    for (c, e) in coefficients.iter().zip(&basis) {
        remainder = &remainder - &e.scale(c);
    }
    Ok(EisensteinResidual {
        level: table.level,
        residual,
        basis_names,
        coefficients,
        remainder,
    })
}

/// Coefficients of the residual in the Eisenstein basis that the closed forms predict.
pub fn expected_residual_coefficients(level: u32) -> Vec<BigRational> {
    match level {
        6 => vec![rat(7, 24), rat(13, 12), rat(-1, 8)],
        10 => vec![rat(1, 6), rat(1, 2), BigRational::zero()],
        p => {
            let p_ = p as i64;
            vec![(int(3) - int(p_) * sigma1(&rat(2, p_))) / int(p_ - 1)]
        }
    }
}

/// Per-coefficient comparison of the residual against its Eisenstein fit, plus
/// a check of the fitted coefficients against the closed forms.
pub fn verify_eisenstein(table: &TraceTable, n_max: i64) -> Result<VerificationReport> {
    let fit = eisenstein_residual(table, n_max)?;
    let combination = &fit.residual - &fit.remainder;
    let records = (-1..=n_max)
        .map(|n| Ok(record(n, coefficient(&fit.residual, n)?, coefficient(&combination, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("eisenstein", table.level, records);
    let expected = expected_residual_coefficients(table.level);
    let coeffs_ok = fit.coefficients == expected;
    let remainder_ok = fit.remainder.is_zero();
    report.pass = report.pass && coeffs_ok && remainder_ok;
    report.note = Some(format!(
        "basis [{}]; expected coefficients [{}]{}",
        fit.basis_names.join(", "),
        expected.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
        if remainder_ok {
            String::new()
        } else {
            format!("; remainder starts at q^{}", fit.remainder.leading_exponent().expect("nonzero"))
        }
    ));
    report.basis_coefficients = Some(fit.coefficients);
    Ok(report)
}

/// `j_N* = sum_{e | N} mu(e) e U_e(j_N)` as series below `q^trunc`.
pub fn verify_u_relations(level: u32, trunc: i64) -> Result<VerificationReport> {
    if level == 1 || !SUPPORTED_LEVELS.contains(&level) {
        return Err(Error::UnsupportedLevel(level));
    }
    let n = level as i64;
    let j = hauptmodul_series(HauptmodulId::new(level, false)?, n * trunc)?;
    let star = hauptmodul_series(HauptmodulId::new(level, true)?, trunc)?;
    let mut rhs = QExpansion::zero(Exponent::from_integer(trunc));
    for e in divisors(level as u64) {
        let term = j.u_operator(e)?.scale(&int(moebius(e) * e as i64));
        rhs = &rhs + &term;
    }
    let records = (-1..trunc)
        .map(|k| Ok(record(k, coefficient(&star, k)?, coefficient(&rhs, k)?)))
        .collect::<Result<_>>()?;
    Ok(VerificationReport::new("u-relations", level, records))
}

/// `sum_{mu even} h_mu(N tau) theta_even + sum_{mu odd} h_mu(N tau) theta_odd
///  = 2^omega(N) G_2^(N*)` below `q^trunc`.
pub fn verify_split_identity(table: &TraceTable, trunc: i64) -> Result<VerificationReport> {
    check_level(table, false)?;
    let d_max = 4 * trunc + 4;
    require_table(table, d_max)?;
    let theta = theta_decomposition(table, d_max)?;
    let lhs = theta.recombined();
    let rhs = g2_series(table, trunc - 1)?.scale(&pow2(omega(table.level as u64) as i32));
    let records = (-1..trunc)
        .map(|n| Ok(record(n, coefficient(&lhs, n)?, coefficient(&rhs, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("split-identity", table.level, records);
    let fractional = lhs
        .truncate(Exponent::from_integer(trunc))
        .terms()
        .any(|(e, _)| !e.is_integer());
    if fractional {
        report.pass = false;
        report.note = Some("recombined theta series has fractional exponents".into());
    }
    Ok(report)
}

/// Unstarred traces for every valid residue `h`, compared with the first one.
/// Each record is one `(d, h)` pair with `n = d`.
pub fn verify_h_independence(level: u32, m: u32, d_max: i64, ctx: &PrecisionContext) -> Result<VerificationReport> {
    let mut records = Vec::new();
    for d in (1..=d_max).filter(|&d| admissible(d, level)) {
        let hs = valid_residues(d, level);
        let base = trace_unstarred(level, m, d, hs[0], ctx)?;
        for &h in &hs[1..] {
            records.push(record(d, base.clone(), trace_unstarred(level, m, d, h, ctx)?));
        }
    }
    let mut report = VerificationReport::new("h-independence", level, records);
    report.n_min = 1;
    report.n_max = d_max;
    Ok(report)
}

/// `2^mu_N(d) t*(d) = t(d)` entrywise, including the boundary indices.
pub fn verify_scalar_relation(table: &TraceTable) -> VerificationReport {
    let records = table
        .entries
        .iter()
        .map(|(&d, e)| {
            let scaled = &e.starred * pow2(mu(table.level, d) as i32);
            record(d, e.unstarred.clone(), scaled)
        })
        .collect();
    VerificationReport::new("scalar-relation", table.level, records)
}
