//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::{Complex, Float};

use modtrace::arith::{ext_gcd, int, rat};
use modtrace::cmnum::{hauptmodul_value, CMPoint, PrecisionContext};
use modtrace::etaq::hauptmodul_series;
use modtrace::identities::{
    verify_eisenstein, verify_h_independence, verify_kaneko, verify_scalar_relation, verify_split_identity,
    verify_hauptmodul_coefficients, verify_fricke_coefficients, verify_u_relations, eisenstein_residual,
    expected_residual_coefficients, VerificationReport,
};
use modtrace::quadforms::{
    act, canonical_label, classes_gamma0, heegner_point, valid_residues, Form, GroupElement,
};
use modtrace::traces::{
    admissible, boundary_traces, faber_principal_part, trace_starred, trace_starred_by_orbits, trace_table,
    TraceTable,
};
use modtrace::{HauptmodulId, Result};

const LEVELS: [u32; 7] = [2, 3, 5, 6, 7, 10, 13];
const PART1_N_MAX: i64 = 12;
const PART2_N_MAX: i64 = 6;

type Outcome = std::result::Result<(), String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn report_ok(r: &VerificationReport) -> Outcome {
    check(r.pass, || {
        format!(
            "{} at N = {} fails first at n = {:?}{}",
            r.identity,
            r.level,
            r.first_failure(),
            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        )
    })
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

struct Tables {
    by_level: BTreeMap<u32, TraceTable>,
    kaneko: TraceTable,
    built_in: Duration,
}

fn build_tables(ctx: &PrecisionContext) -> std::result::Result<Tables, String> {
    let start = Instant::now();
    let mut by_level = BTreeMap::new();
    for level in LEVELS {
        let d_max = (4 * PART1_N_MAX).max(4 * level as i64 * PART2_N_MAX);
        by_level.insert(level, lift(trace_table(level, 2, d_max, ctx))?);
    }
    let kaneko = lift(trace_table(1, 2, 4 * PART1_N_MAX, ctx))?;
    Ok(Tables {
        by_level,
        kaneko,
        built_in: start.elapsed(),
    })
}

fn criterion1() -> Outcome {
    let j = lift(hauptmodul_series(lift(HauptmodulId::new(1, false))?, 4))?;
    for (n, c) in [(0, 744i64), (1, 196884), (2, 21493760), (3, 864299970)] {
        check(j.coeff_at(n) == Some(int(c)), || format!("j coefficient of q^{n}"))?;
    }
    let j2 = lift(hauptmodul_series(lift(HauptmodulId::new(2, true))?, 4))?;
    for (n, c) in [(-1, 1i64), (0, 0), (1, 4372), (2, 96256), (3, 1240002)] {
        check(j2.coeff_at(n) == Some(int(c)), || format!("j_2* coefficient of q^{n}"))?;
    }
    Ok(())
}

fn within(z: &Complex, target: i64, bits: u32) -> bool {
    let tol = Float::with_val(512, 1) >> bits;
    let dr = Float::with_val(512, z.real() - target).abs();
    let di = Float::with_val(512, z.imag().abs_ref());
    dr < tol && di < tol
}

fn criterion2(ctx: &PrecisionContext) -> Outcome {
    let spot = |level: u32, form: Form, expected: i64| -> Outcome {
        let point = lift(CMPoint::new(lift(heegner_point(&form))?))?;
        let value = lift(hauptmodul_value(lift(HauptmodulId::new(level, true))?, &point.value(ctx.bits + 64), ctx))?;
        check(within(&value, expected, 128), || format!("j_{level}* at {form} is not {expected}"))
    };
    spot(6, Form::new(6, -4, 1), -10)?;
    spot(10, Form::new(10, -6, 1), -4)?;
    let t6 = lift(trace_starred(6, 2, 8, ctx))?;
    check(t6 == int(-29), || format!("t*(8) at N = 6 is {t6}"))?;
    let t10 = lift(trace_starred(10, 2, 4, ctx))?;
    check(t10 == int(-7), || format!("t*(4) at N = 10 is {t10}"))
}

fn criterion3() -> Outcome {
    let pp = faber_principal_part(2);
    for level in LEVELS {
        let b = boundary_traces(level, &pp);
        let star0 = match level {
            2 => int(5),
            6 | 10 => rat(5, 2),
            _ => int(3),
        };
        let even = level % 2 == 0;
        let expected = [
            (&b.starred, 0, star0),
            (&b.starred, -1, int(-1)),
            (&b.starred, -4, int(-2)),
            (&b.unstarred, 0, int(if even { 10 } else { 6 })),
            (&b.unstarred, -1, int(-1)),
            (&b.unstarred, -4, int(if even { -4 } else { -2 })),
        ];
        for (map, d, value) in expected {
            check(map.get(&d) == Some(&value), || format!("boundary value at N = {level}, d = {d}"))?;
        }
    }
    Ok(())
}

fn criterion4(tables: &Tables) -> Outcome {
    report_ok(&lift(verify_kaneko(&tables.kaneko, PART1_N_MAX))?)
}

fn criterion5(tables: &Tables) -> Outcome {
    for t in tables.by_level.values() {
        report_ok(&lift(verify_hauptmodul_coefficients(t, PART1_N_MAX))?)?;
    }
    Ok(())
}

fn criterion6(tables: &Tables) -> Outcome {
    for t in tables.by_level.values() {
        report_ok(&lift(verify_fricke_coefficients(t, PART2_N_MAX))?)?;
    }
    Ok(())
}

fn criterion7(tables: &Tables) -> Outcome {
    let n_max = 12;
    for t in tables.by_level.values() {
        report_ok(&lift(verify_eisenstein(t, n_max))?)?;
        let fit = lift(eisenstein_residual(t, n_max))?;
        check(fit.coefficients == expected_residual_coefficients(t.level), || {
            format!("basis coefficients at N = {}", t.level)
        })?;
        lift(fit.require_zero())?;
        let head: &[(i64, BigRational)] = match t.level {
            2 => &[(0, BigRational::from_integer(1.into()))],
            6 => &[(0, rat(7, 2)), (1, int(7)), (2, int(47))],
            10 => &[(0, rat(7, 2)), (1, int(4)), (2, int(24))],
            _ => &[],
        };
        for (n, c) in head {
            check(fit.residual.coeff_at(*n).as_ref() == Some(c), || {
                format!("residual coefficient of q^{n} at N = {}", t.level)
            })?;
        }
    }
    Ok(())
}

fn criterion8() -> Outcome {
    for level in LEVELS {
        report_ok(&lift(verify_u_relations(level, 20))?)?;
    }
    Ok(())
}

fn random_gamma0(rng: &mut StdRng, level: u32) -> GroupElement {
    loop {
        let c = level as i64 * rng.gen_range(-12..=12);
        let d = rng.gen_range(-40i64..=40);
        let (g, x, y) = ext_gcd(d, c);
        if g != 1 {
            continue;
        }
        // d x + c y = 1, so [[x, -y], [c, d]] has determinant 1.
        let k = rng.gen_range(-5..=5);
        let base = GroupElement { a: x, b: -y, c, d };
        return GroupElement::translation(k).mul(&base);
    }
}

fn criterion9(tables: &Tables) -> Outcome {
    let ctx = PrecisionContext::default();

    // h-independence over every computed d.
    for level in LEVELS {
        let d_max = tables.by_level[&level].d_max;
        report_ok(&lift(verify_h_independence(level, 2, d_max, &ctx))?)?;
    }

    // Scalar relation entrywise on the full tables.
    for t in tables.by_level.values() {
        report_ok(&verify_scalar_relation(t))?;
    }

    // Summing over Fricke orbits agrees with the scalar relation at prime levels, p | d.
    for p in [2u32, 3, 5, 7, 13] {
        let p_ = p as i64;
        for d in (1..=8).map(|k| k * p_).filter(|&d| admissible(d, p)) {
            let a = lift(trace_starred(p, 2, d, &ctx))?;
            let b = lift(trace_starred_by_orbits(p, 2, d, &ctx))?;
            check(a == b, || format!("orbit sum at N = {p}, d = {d}: {a} vs {b}"))?;
        }
    }

    // Split identity to q^10.
    for t in tables.by_level.values() {
        report_ok(&lift(verify_split_identity(t, 11))?)?;
    }

    // Canonical labels are Gamma_0(N)-invariant.
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for level in LEVELS {
        let mut forms = Vec::new();
        for d in (3..=40).filter(|&d| admissible(d, level)) {
            for h in valid_residues(d, level) {
                forms.extend(lift(classes_gamma0(d, level, h))?.into_iter().map(|c| c.rep));
            }
        }
        for i in 0..120 {
            let q = forms[i % forms.len()];
            let g = random_gamma0(&mut rng, level);
            check(g.in_gamma0(level) && g.det() == 1, || "bad random element".into())?;
            let moved = act(&q, &g);
            check(canonical_label(&moved, level) == canonical_label(&q, level), || {
                format!("label of {q} changes under {g:?} at N = {level}")
            })?;
        }
    }

    // Every reconstructed rational is stable when the working precision doubles.
    let doubled = lift(PrecisionContext::new(512))?;
    for level in LEVELS {
        let lo = &tables.by_level[&level];
        let d_max = lo.d_max;
        let hi = lift(trace_table(level, 2, d_max, &doubled))?;
        for (d, e) in &hi.entries {
            check(lo.entries.get(d) == Some(e), || format!("precision drift at N = {level}, d = {d}"))?;
        }
    }
    let k_hi = lift(trace_table(1, 2, tables.kaneko.d_max, &doubled))?;
    check(k_hi == tables.kaneko, || "precision drift at level 1".into())
}

fn main() -> ExitCode {
    let ctx = PrecisionContext::default();
    let mut failures = 0;
    let mut line = |n: u32, name: &str, elapsed: Duration, outcome: Outcome| {
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {n}: PASS  {name} ({secs:.2}s)"),
            Err(why) => {
                failures += 1;
                println!("criterion {n}: FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    };
    let timed = |f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let out = f();
        (start.elapsed(), out)
    };

    let (t, o) = timed(&criterion1);
    line(1, "hauptmodul coefficients", t, o);
    let (t, o) = timed(&|| criterion2(&ctx));
    line(2, "trace spot values and CM values", t, o);
    let (t, o) = timed(&criterion3);
    line(3, "boundary conventions", t, o);

    match build_tables(&ctx) {
        Err(why) => {
            for (n, name) in [(4, "Kaneko"), (5, "first family"), (6, "Fricke family"), (7, "Eisenstein residuals")] {
                line(n, name, Duration::ZERO, Err(format!("trace tables: {why}")));
            }
            let (t, o) = timed(&criterion8);
            line(8, "U relations", t, o);
            line(9, "property suite", Duration::ZERO, Err(format!("trace tables: {why}")));
        }
        Ok(tables) => {
            println!("trace tables built in {:.2}s", tables.built_in.as_secs_f64());
            let (t, o) = timed(&|| criterion4(&tables));
            line(4, "Kaneko identity, n in [-1, 12]", t, o);
            let (t, o) = timed(&|| criterion5(&tables));
            line(5, "coefficient identity for j_N, n in [-1, 12]", t, o);
            let (t, o) = timed(&|| criterion6(&tables));
            line(6, "coefficient identity for j_N*, n in [-1, 6]", t, o);
            let (t, o) = timed(&|| criterion7(&tables));
            line(7, "Eisenstein residuals to q^12", t, o);
            let (t, o) = timed(&criterion8);
            line(8, "U relations to q^20", t, o);
            let (t, o) = timed(&|| criterion9(&tables));
            line(9, "property suite", t, o);
        }
    }

    if failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria fail");
        ExitCode::FAILURE
    }
}
