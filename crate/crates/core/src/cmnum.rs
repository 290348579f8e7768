//! Multiprecision evaluation of eta quotients, hauptmoduln and Faber
//! polynomials at CM points, and recovery of exact rationals from the results.
//!
//! Working precision is chosen per evaluation from the requested accuracy, the
//! cancellation in the pentagonal sum near the real axis and the size of the
//! intermediate values, so that the absolute error of the final value stays
//! below `2^-bits`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::etaq::{HauptmodulId, HauptmodulRecipe};
use crate::faber::FaberPolynomial;
use crate::quadforms::HeegnerPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    pub bits: u32,
    pub guard_bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            bits: 256,
            guard_bits: 64,
        }
    }
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < 64 {
            return Err(Error::PrecisionTooLow(bits));
        }
        Ok(PrecisionContext {
            bits,
            ..Default::default()
        })
    }

    /// Number `K` of pentagonal pairs `k = 1..K` needed at `Im tau = y` so that
    /// the tail is below `2^-(bits + guard_bits)`.
    pub fn eta_terms(&self, y: f64) -> usize {
        assert!(y > 0.0, "eta_terms needs Im tau > 0");
        let target = (self.bits + self.guard_bits) as f64;
        // log2 |q|
        let lq = -2.0 * std::f64::consts::PI * y / std::f64::consts::LN_2;
        let tail_den = -(1.0 - lq.exp2()).log2();
        let mut k: usize = 1;
        loop {
            let n = (k * (3 * k - 1) / 2) as f64;
            if 1.0 + n * lq + tail_den < -target {
                return k - 1;
            }
            k += 1;
        }
    }

    /// Bits lost to cancellation when summing the eta series at `Im tau = y`.
    fn cancellation_bits(&self, y: f64) -> u32 {
        (std::f64::consts::PI / (12.0 * y * std::f64::consts::LN_2)).ceil() as u32 + 8
    }

    /// Default reconstruction tolerance `2^-(bits/2)`.
    pub fn tolerance(&self) -> Float {
        Float::with_val(self.bits, 1) >> (self.bits / 2)
    }
}

/// A Heegner point together with its complex value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMPoint {
    pub exact: HeegnerPoint,
}

impl CMPoint {
    pub fn new(exact: HeegnerPoint) -> Result<Self> {
        if exact.d <= 0 || exact.den <= 0 {
            return Err(Error::NotUpperHalfPlane);
        }
        Ok(CMPoint { exact })
    }

    pub fn imag_f64(&self) -> f64 {
        (self.exact.d as f64).sqrt() / self.exact.den as f64
    }

    pub fn value(&self, prec: u32) -> Complex {
        let re = Float::with_val(prec, self.exact.x) / self.exact.den;
        let im = Float::with_val(prec, self.exact.d).sqrt() / self.exact.den;
        Complex::with_val(prec, (re, im))
    }
}

fn imag_of(tau: &Complex) -> Result<f64> {
    let y = tau.imag().to_f64();
    if y.is_nan() || y <= 0.0 {
        return Err(Error::NotUpperHalfPlane);
    }
    Ok(y)
}

fn two_pi_i(prec: u32) -> Complex {
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    Complex::with_val(prec, (Float::new(prec), two_pi))
}

fn log2_abs(z: &Complex) -> f64 {
    let a = Float::with_val(64, z.abs_ref());
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        a.log2().to_f64()
    }
}

fn eta_at(tau: &Complex, ctx: &PrecisionContext, prec: u32) -> Result<Complex> {
    let y = imag_of(tau)?;
    let k_max = ctx.eta_terms(y);
    let w = two_pi_i(prec) * tau;
    let q = Complex::with_val(prec, w.exp_ref());
    let q24 = Complex::with_val(prec, (w / 24u32).exp_ref());
    let q3 = Complex::with_val(prec, q.clone().pow(3u32));
    let mut sum = Complex::with_val(prec, 1);
    let mut pent = Complex::with_val(prec, 1); // q^(k(3k-1)/2)
    let mut step = q.clone(); // q^(3k-2)
    let mut qk = Complex::with_val(prec, 1); // q^k
    for k in 1..=k_max {
        pent *= &step;
        step *= &q3;
        qk *= &q;
        let pair = Complex::with_val(prec, &pent * &qk) + &pent;
        if k % 2 == 1 {
            sum -= pair;
        } else {
            sum += pair;
        }
    }
    Ok(sum * q24)
}

/// `eta(tau)` with absolute error below `2^-bits`.
pub fn eta_value(tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let y = imag_of(tau)?;
    let prec = ctx.bits + ctx.guard_bits + ctx.cancellation_bits(y);
    let v = eta_at(tau, ctx, prec)?;
    Ok(Complex::with_val(ctx.bits, v))
}

/// Pieces of a hauptmodul value: the eta quotient `A` (if any) and the total.
struct Parts {
    total: Complex,
    magnitude_bits: f64,
}

fn e4_at(tau: &Complex, ctx: &PrecisionContext, prec: u32) -> Result<Complex> {
    let y = imag_of(tau)?;
    let q = Complex::with_val(prec, (two_pi_i(prec) * tau).exp_ref());
    let lq = -2.0 * std::f64::consts::PI * y / std::f64::consts::LN_2;
    let target = (prec + ctx.guard_bits) as f64;
    let mut sum = Complex::with_val(prec, 0);
    let mut qn = Complex::with_val(prec, 1);
    let mut n: u64 = 1;
    loop {
        qn *= &q;
        let denom = Complex::with_val(prec, 1) - &qn;
        let term = Complex::with_val(prec, &qn / &denom) * (n * n * n);
        sum += term;
        let nb = n as f64;
        if 3.0 * nb.log2() + nb * lq + 2.0 < -target && nb * -lq > 8.0 {
            break;
        }
        n += 1;
    }
    Ok(sum * 240u32 + 1u32)
}

fn hauptmodul_parts(id: HauptmodulId, tau: &Complex, ctx: &PrecisionContext, prec: u32) -> Result<Parts> {
    match id.recipe() {
        HauptmodulRecipe::KleinJ => {
            let e4 = e4_at(tau, ctx, prec)?;
            let eta = eta_at(tau, ctx, prec)?;
            let delta = Complex::with_val(prec, eta.pow(24u32));
            let total = Complex::with_val(prec, e4.pow(3u32)) / delta;
            let magnitude_bits = log2_abs(&total).max(0.0);
            Ok(Parts { total, magnitude_bits })
        }
        HauptmodulRecipe::Eta {
            quotient,
            constant,
            fricke,
        } => {
            let mut a = Complex::with_val(prec, 1);
            for &(t, r) in quotient.factors() {
                let scaled = Complex::with_val(prec, tau * t);
                let e = eta_at(&scaled, ctx, prec)?;
                a *= e.pow(r);
            }
            let mut total = Complex::with_val(prec, &a + constant);
            let mut magnitude_bits = log2_abs(&a).max(0.0);
            if let Some(c) = fricke {
                let b = Complex::with_val(prec, c) / &a;
                magnitude_bits = magnitude_bits.max(log2_abs(&b));
                total += b;
            }
            magnitude_bits = magnitude_bits.max(log2_abs(&total));
            Ok(Parts { total, magnitude_bits })
        }
    }
}

fn horner(poly: &FaberPolynomial, x: &Complex, prec: u32) -> Complex {
    let mut acc = Complex::with_val(prec, 0);
    for c in poly.coeffs.iter().rev() {
        acc *= x;
        acc += Float::with_val(prec, rug::Integer::from_str_radix(&c.to_str_radix(16), 16).expect("hex"));
    }
    acc
}

/// Evaluates `value(x)` where `x` is the hauptmodul at `tau`, raising the
/// working precision until it covers the observed magnitudes. `tau_at` must
/// produce the point at the requested precision.
fn evaluate_adaptive<T, F>(
    id: HauptmodulId,
    tau_at: T,
    ctx: &PrecisionContext,
    degree: u32,
    coeff_bits: u32,
    value: F,
) -> Result<Complex>
where
    T: Fn(u32) -> Complex,
    F: Fn(&Complex, u32) -> Complex,
{
    let y = imag_of(&tau_at(64))?;
    let base = ctx.bits + ctx.guard_bits + ctx.cancellation_bits(y) + coeff_bits;
    let mut extra = 0u32;
    for _ in 0..4 {
        let prec = base + extra;
        let parts = hauptmodul_parts(id, &tau_at(prec), ctx, prec)?;
        let needed = (parts.magnitude_bits * degree.max(1) as f64).ceil() as u32 + 8;
        if needed <= extra {
            return Ok(Complex::with_val(ctx.bits, value(&parts.total, prec)));
        }
        extra = needed;
    }
    Err(Error::InvalidArgument(format!(
        "working precision for {id} at Im tau = {y} did not stabilize"
    )))
}

/// Value of the hauptmodul `id` at `tau`.
pub fn hauptmodul_value(id: HauptmodulId, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    evaluate_adaptive(id, |p| Complex::with_val(p, tau), ctx, 1, 0, |x, _| x.clone())
}

fn coeff_bits(poly: &FaberPolynomial) -> u32 {
    poly.coeffs.iter().map(|c| c.bits() as u32).max().unwrap_or(0)
}

/// `phi_m(J(tau))` for the polynomial's hauptmodul `J`.
pub fn faber_value(poly: &FaberPolynomial, tau: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    evaluate_adaptive(
        poly.id,
        |p| Complex::with_val(p, tau),
        ctx,
        poly.m,
        coeff_bits(poly),
        |x, prec| horner(poly, x, prec),
    )
}

/// `phi_m(J(alpha))` at an exact CM point, with the point itself computed at
/// the working precision.
pub fn faber_value_at(poly: &FaberPolynomial, point: &CMPoint, ctx: &PrecisionContext) -> Result<Complex> {
    evaluate_adaptive(
        poly.id,
        |p| point.value(p),
        ctx,
        poly.m,
        coeff_bits(poly),
        |x, prec| horner(poly, x, prec),
    )
}

fn float_to_bigint(x: &Float) -> BigInt {
    let i = x.to_integer().expect("finite float");
    BigInt::parse_bytes(i.to_string_radix(16).as_bytes(), 16).expect("hex digits")
}

/// Closest rational with denominator at most `max_den`, provided it lies
/// within `tol` of `x`.
pub fn rational_round(x: &Float, max_den: u32, tol: &Float) -> Result<BigRational> {
    if max_den == 0 || !x.is_finite() {
        return Err(Error::InvalidArgument("rational_round needs max_den >= 1 and finite input".into()));
    }
    let prec = x.prec().max(64);
    let mut best: Option<(Float, BigRational)> = None;
    for q in 1..=max_den {
        let scaled = Float::with_val(prec, x * q);
        let p = Float::with_val(prec, scaled.round_ref());
        let err = Float::with_val(prec, (Float::with_val(prec, &p / q) - x).abs_ref());
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, BigRational::new(float_to_bigint(&p), BigInt::from(q))));
        }
    }
    let (err, r) = best.expect("max_den >= 1");
    if err > *tol {
        return Err(Error::ReconstructionFailure {
            value: x.to_string_radix(10, Some(30)),
            max_den,
            tol: tol.to_string_radix(10, Some(6)),
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::faber::faber;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn point(x: i64, d: i64, den: i64) -> Complex {
        CMPoint::new(HeegnerPoint { x, d, den }).unwrap().value(400)
    }

    fn within(z: &Complex, re: i64, bits: u32) -> bool {
        let dr = Float::with_val(400, z.real() - re).abs();
        let di = Float::with_val(400, z.imag().abs_ref());
        let tol = Float::with_val(400, 1) >> bits;
        dr < tol && di < tol
    }

    #[test]
    fn eta_at_i_matches_gamma_quarter() {
        let prec = 300;
        let gamma = Float::with_val(prec, Float::with_val(prec, 0.25).gamma_ref());
        let pi = Float::with_val(prec, Constant::Pi);
        let oracle = gamma / (Float::with_val(prec, pi.pow(Float::with_val(prec, 0.75))) * 2u32);
        let v = eta_value(&point(0, 4, 2), &ctx()).unwrap();
        let err = Float::with_val(prec, v.real() - &oracle).abs();
        assert!(err < Float::with_val(prec, 1) >> 250u32);
        assert!(v.imag().clone().abs() < Float::with_val(prec, 1) >> 250u32);
        assert!((oracle.to_f64() - 0.768225422326).abs() < 1e-11);
    }

    #[test]
    fn eta_translation_phase() {
        let c = ctx();
        let tau = Complex::with_val(300, (0.3, 0.45));
        let shifted = Complex::with_val(300, &tau + 1u32);
        let pi = Float::with_val(300, Constant::Pi);
        let phase = Complex::with_val(300, (Float::new(300), pi / 12u32)).exp();
        let lhs = eta_value(&shifted, &c).unwrap();
        let rhs = Complex::with_val(300, eta_value(&tau, &c).unwrap() * phase);
        let diff = Float::with_val(300, Complex::with_val(300, lhs - rhs).abs_ref());
        assert!(diff < Float::with_val(300, 1) >> 240u32);
        let pure = eta_value(&Complex::with_val(300, (0, 2)), &c).unwrap();
        assert!(pure.imag().is_zero() || pure.imag().clone().abs() < Float::with_val(300, 1) >> 250u32);
        assert!(pure.real().is_sign_positive());
        assert!(eta_value(&Complex::with_val(64, (0.5, -0.1)), &c).is_err());
    }

    #[test]
    fn hauptmodul_spot_values() {
        let c = ctx();
        let j6 = hauptmodul_value(HauptmodulId::new(6, true).unwrap(), &point(4, 8, 12), &c).unwrap();
        assert!(within(&j6, -10, 128));
        let j10 = hauptmodul_value(HauptmodulId::new(10, true).unwrap(), &point(6, 4, 20), &c).unwrap();
        assert!(within(&j10, -4, 128));
        let j = HauptmodulId::new(1, false).unwrap();
        assert!(within(&hauptmodul_value(j, &point(-1, 3, 2), &c).unwrap(), 0, 128));
        assert!(within(&hauptmodul_value(j, &point(0, 4, 2), &c).unwrap(), 1728, 128));
    }

    #[test]
    fn faber_spot_values() {
        let c = ctx();
        let f6 = faber(HauptmodulId::new(6, true).unwrap(), 2).unwrap();
        assert!(within(&faber_value(&f6, &point(4, 8, 12), &c).unwrap(), -58, 128));
        let f10 = faber(HauptmodulId::new(10, true).unwrap(), 2).unwrap();
        assert!(within(&faber_value(&f10, &point(6, 4, 20), &c).unwrap(), -28, 128));
        let f1 = faber(HauptmodulId::new(1, false).unwrap(), 1).unwrap();
        assert!(within(&faber_value(&f1, &point(0, 4, 2), &c).unwrap(), 984, 128));
    }

    #[test]
    fn rounding() {
        let tol = Float::with_val(64, 1e-6);
        let f = |x: f64| Float::with_val(64, x);
        assert_eq!(rational_round(&f(-28.9999999999), 12, &tol).unwrap(), int(-29));
        assert_eq!(rational_round(&f(2.5000000001), 2, &tol).unwrap(), rat(5, 2));
        assert!(matches!(
            rational_round(&f(0.3333333), 2, &tol),
            Err(Error::ReconstructionFailure { .. })
        ));
        assert_eq!(rational_round(&f(-7.0 / 12.0), 12, &tol).unwrap(), rat(-7, 12));
    }

    #[test]
    fn context_limits() {
        assert!(matches!(PrecisionContext::new(32), Err(Error::PrecisionTooLow(32))));
        let c = ctx();
        assert!(c.eta_terms(0.05) > c.eta_terms(1.0));
        assert!(c.eta_terms(10.0) >= 1);
    }
}
