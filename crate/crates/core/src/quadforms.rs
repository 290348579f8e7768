//! Positive definite binary quadratic forms, their `SL_2(Z)` and `Gamma_0(N)`
//! classes, Heegner points and Atkin-Lehner involutions.
//!
//! Forms are acted on from the right: `act(Q, g)(X, Y) = Q(aX + bY, cX + dY)`
//! for `g = [[a, b], [c, d]]`, so `act(act(Q, g), h) = act(Q, g h)`. The
//! `Gamma_0(N)`-classes of forms `R o x` with `R` reduced are then indexed by the
//! left cosets `x Gamma_0(N)`, i.e. by the first column of `x` in `P^1(Z/N)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, ext_gcd, omega};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        Form { a, b, c }
    }

    /// `b^2 - 4ac`.
    pub fn discriminant(&self) -> i64 {
        narrow(self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.discriminant() < 0
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        let v = self.a as i128 * (x as i128 * x as i128)
            + self.b as i128 * (x as i128 * y as i128)
            + self.c as i128 * (y as i128 * y as i128);
        narrow(v)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

fn narrow(v: i128) -> i64 {
    i64::try_from(v).expect("quadratic form entry overflowed i64")
}

/// A determinant-one integer matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GroupElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let g = GroupElement { a, b, c, d };
        if g.det() != 1 {
            return Err(Error::InvalidArgument(format!("determinant of {g:?} is not 1")));
        }
        Ok(g)
    }

    pub const IDENTITY: GroupElement = GroupElement { a: 1, b: 0, c: 0, d: 1 };
    /// `[[0, -1], [1, 0]]`.
    pub const S: GroupElement = GroupElement { a: 0, b: -1, c: 1, d: 0 };
    /// `[[0, -1], [1, 1]]`, of projective order 3.
    pub const U: GroupElement = GroupElement { a: 0, b: -1, c: 1, d: 1 };

    pub fn translation(k: i64) -> Self {
        GroupElement { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        narrow(self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128)
    }

    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        let m = |x: i64, y: i64, z: i64, w: i64| narrow(x as i128 * y as i128 + z as i128 * w as i128);
        GroupElement {
            a: m(self.a, o.a, self.b, o.c),
            b: m(self.a, o.b, self.b, o.d),
            c: m(self.c, o.a, self.d, o.c),
            d: m(self.c, o.b, self.d, o.d),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn in_gamma0(&self, level: u32) -> bool {
        self.c.rem_euclid(level as i64) == 0
    }
}

/// `b^2 - 4ac`.
pub fn discriminant(q: &Form) -> i64 {
    q.discriminant()
}

/// `Q(aX + bY, cX + dY)`; `g` may have any nonzero determinant.
pub fn act(q: &Form, g: &GroupElement) -> Form {
    let (a, b, c) = (q.a as i128, q.b as i128, q.c as i128);
    let (al, be, ga, de) = (g.a as i128, g.b as i128, g.c as i128, g.d as i128);
    Form {
        a: narrow(a * al * al + b * al * ga + c * ga * ga),
        b: narrow(2 * a * al * be + b * (al * de + be * ga) + 2 * c * ga * de),
        c: narrow(a * be * be + b * be * de + c * de * de),
    }
}

/// Gauss reduction. Returns `(R, g)` with `act(Q, g) == R`, `|b| <= a <= c`
/// and `b >= 0` whenever `|b| == a` or `a == c`.
pub fn sl2_reduce(q: &Form) -> (Form, GroupElement) {
    assert!(q.is_positive_definite(), "sl2_reduce needs a positive definite form, got {q}");
    let mut r = *q;
    let mut g = GroupElement::IDENTITY;
    loop {
        let k = (r.a - r.b).div_euclid(2 * r.a);
        if k != 0 {
            let t = GroupElement::translation(k);
            r = act(&r, &t);
            g = g.mul(&t);
        }
        if r.a > r.c || (r.a == r.c && r.b < 0) {
            r = act(&r, &GroupElement::S);
            g = g.mul(&GroupElement::S);
        } else {
            return (r, g);
        }
    }
}

pub fn is_reduced(q: &Form) -> bool {
    q.is_positive_definite()
        && -q.a < q.b
        && q.b <= q.a
        && q.a <= q.c
        && !(q.a == q.c && q.b < 0)
}

/// Elements of the projective stabilizer of a reduced form, identity first.
pub fn reduced_stabilizer(r: &Form) -> Vec<GroupElement> {
    let mut out = vec![GroupElement::IDENTITY];
    if r.b == 0 && r.a == r.c {
        out.push(GroupElement::S);
    } else if r.a == r.b && r.b == r.c {
        out.push(GroupElement::U);
        out.push(GroupElement::U.mul(&GroupElement::U));
    }
    out
}

fn check_discriminant(d: i64) -> Result<()> {
    if d <= 0 || !matches!((-d).rem_euclid(4), 0 | 1) {
        return Err(Error::BadDiscriminant(d));
    }
    Ok(())
}

/// Label of a `Gamma_0(N)`-class: the reduced form and a coset index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub reduced: Form,
    pub coset: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.reduced, self.coset)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormClass {
    pub rep: Form,
    pub level: u32,
    /// Residue of `b` modulo `2N`; absent for plain `SL_2(Z)` classes.
    pub h: Option<i64>,
    pub stabilizer_order: u32,
    pub label: Label,
}

/// Reduced forms of discriminant `-d`, imprimitive ones included.
pub fn classes_sl2(d: i64) -> Result<Vec<FormClass>> {
    check_discriminant(d)?;
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= d {
        for b in -a + 1..=a {
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = Form::new(a, b, num / (4 * a));
            if is_reduced(&f) {
                out.push(FormClass {
                    rep: f,
                    level: 1,
                    h: None,
                    stabilizer_order: reduced_stabilizer(&f).len() as u32,
                    label: Label { reduced: f, coset: 0 },
                });
            }
        }
        a += 1;
    }
    out.sort_by_key(|c| c.rep);
    Ok(out)
}

/// The cosets `x Gamma_0(N)` of `SL_2(Z)`, keyed by `P^1(Z/N)`.
#[derive(Clone, Debug)]
pub struct Cosets {
    level: u32,
    units: Vec<i64>,
    keys: Vec<(i64, i64)>,
    reps: Vec<GroupElement>,
}

impl Cosets {
    pub fn new(level: u32) -> Self {
        let n = level as i64;
        let units: Vec<i64> = (1..=n.max(1)).filter(|&u| ext_gcd(u, n).0 == 1).collect();
        let mut cosets = Cosets {
            level,
            units,
            keys: Vec::new(),
            reps: Vec::new(),
        };
        let mut keys = BTreeSet::new();
        for u in 0..n {
            for v in 0..n {
                if ext_gcd(ext_gcd(u, v).0, n).0 == 1 {
                    keys.insert(cosets.key(u, v));
                }
            }
        }
        if n == 1 {
            keys.insert((0, 0));
        }
        cosets.keys = keys.into_iter().collect();
        cosets.reps = if n == 1 {
            vec![GroupElement::IDENTITY]
        } else {
            cosets.keys.iter().map(|&(u, v)| lift(u, v, n)).collect()
        };
        cosets
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    fn key(&self, u: i64, v: i64) -> (i64, i64) {
        let n = self.level as i64;
        self.units
            .iter()
            .map(|&l| ((l * u).rem_euclid(n), (l * v).rem_euclid(n)))
            .min()
            .expect("unit group is nonempty")
    }

    /// Index of the coset `g Gamma_0(N)`.
    pub fn index(&self, g: &GroupElement) -> usize {
        let k = self.key(g.a, g.c);
        self.keys.binary_search(&k).expect("every first column lies in P^1(Z/N)")
    }
}

/// A matrix in `SL_2(Z)` whose first column reduces to `(u, v)` modulo `n`.
fn lift(u: i64, v: i64, n: i64) -> GroupElement {
    for k in 0.. {
        for t in 0..=k {
            for (al, ga) in [(u + n * t, v + n * (k - t)), (u - n * t, v + n * (k - t))] {
                let (g, x, y) = ext_gcd(al, ga);
                if g == 1 {
                    return GroupElement { a: al, b: -y, c: ga, d: x };
                }
            }
        }
    }
    unreachable!()
}

/// `N prod (1 + 1/p)` coset representatives of `Gamma_0(N)` in `SL_2(Z)`.
pub fn coset_reps(level: u32) -> Vec<GroupElement> {
    Cosets::new(level).reps
}

/// Whether `g1 Gamma_0(N) == g2 Gamma_0(N)`.
pub fn same_coset(g1: &GroupElement, g2: &GroupElement, level: u32) -> bool {
    g1.inverse().mul(g2).in_gamma0(level)
}

fn label_with(q: &Form, cosets: &Cosets) -> Label {
    let (r, g) = sl2_reduce(q);
    let x = g.inverse();
    let coset = reduced_stabilizer(&r)
        .iter()
        .map(|s| cosets.index(&s.mul(&x)))
        .min()
        .expect("stabilizer contains the identity");
    Label { reduced: r, coset }
}

/// Complete invariant of the `Gamma_0(N)`-class of `Q`.
pub fn canonical_label(q: &Form, level: u32) -> Label {
    label_with(q, &Cosets::new(level))
}

fn check_residue(d: i64, level: u32, h: i64) -> Result<()> {
    check_discriminant(d)?;
    let m = 4 * level as i64;
    if (h * h + d).rem_euclid(m) != 0 {
        return Err(Error::BadResidue { d, level, h });
    }
    Ok(())
}

/// Residues `h` modulo `2N` with `h^2 = -d (mod 4N)`.
pub fn valid_residues(d: i64, level: u32) -> Vec<i64> {
    let n2 = 2 * level as i64;
    (0..n2).filter(|&h| (h * h + d).rem_euclid(2 * n2) == 0).collect()
}

/// Form of least `a` in the `Gamma_0(N)`-class of `Q`, with `-a < b <= a`;
/// ties are broken towards small `|b|`, then positive `b`.
pub fn gamma0_minimize(q: &Form, level: u32) -> Form {
    let n = level as i64;
    let d = -q.discriminant();
    let bound = q.a;
    // Q(x, y) = a (x + b y / 2a)^2 + d y^2 / 4a.
    let ymax = ((4.0 * q.a as f64 * bound as f64 / d as f64).sqrt() + 1.0) as i64;
    let mut best: Option<((i64, i64, i64), Form)> = None;
    let mut k = 0;
    while n * k <= ymax {
        let y = n * k;
        let centre = -(q.b as f64) * y as f64 / (2.0 * q.a as f64);
        let rest = (bound as f64 - d as f64 * (y * y) as f64 / (4.0 * q.a as f64)).max(0.0);
        let width = (rest / q.a as f64).sqrt() + 1.0;
        let lo = (centre - width).floor() as i64;
        let hi = (centre + width).ceil() as i64;
        for x in lo..=hi {
            if q.eval(x, y) > bound {
                continue;
            }
            let (g, s, t) = ext_gcd(x, y);
            if g != 1 {
                continue;
            }
            let m = GroupElement { a: x, b: -t, c: y, d: s };
            let f = act(q, &m);
            let k2 = (f.a - f.b).div_euclid(2 * f.a);
            let f = act(&f, &GroupElement::translation(k2));
            let key = (f.a, f.b.abs(), -f.b);
            if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                best = Some((key, f));
            }
        }
        k += 1;
    }
    best.expect("x = 1, y = 0 always qualifies").1
}

/// `Gamma_0(N)`-classes of forms `[a, b, c]` of discriminant `-d` with
/// `N | a` and `b = h (mod 2N)`, sorted by representative.
pub fn classes_gamma0(d: i64, level: u32, h: i64) -> Result<Vec<FormClass>> {
    check_residue(d, level, h)?;
    let cosets = Cosets::new(level);
    let n = level as i64;
    let hh = h.rem_euclid(2 * n);
    let mut out = Vec::new();
    for r in classes_sl2(d)? {
        let r = r.rep;
        let stab = reduced_stabilizer(&r);
        let mut seen = BTreeSet::new();
        for x in cosets.reps() {
            let q = act(&r, x);
            if q.a.rem_euclid(n) != 0 || q.b.rem_euclid(2 * n) != hh {
                continue;
            }
            let orbit: Vec<usize> = stab.iter().map(|s| cosets.index(&s.mul(x))).collect();
            let coset = *orbit.iter().min().expect("nonempty");
            if !seen.insert(coset) {
                continue;
            }
            let own = cosets.index(x);
            let stabilizer_order = orbit.iter().filter(|&&i| i == own).count() as u32;
            out.push(FormClass {
                rep: gamma0_minimize(&q, level),
                level,
                h: Some(hh),
                stabilizer_order,
                label: Label { reduced: r, coset },
            });
        }
    }
    out.sort_by_key(|c| c.rep);
    Ok(out)
}

/// Labels found by scanning `a in {N, 2N, ..}` up to `scale * N (ceil(sqrt(d/3)) + 2)`
/// and `|b| <= scale * (2a + 2N)`. Used to cross-check [`classes_gamma0`].
pub fn scan_gamma0_labels(d: i64, level: u32, h: i64, scale: i64) -> Result<BTreeSet<Label>> {
    check_residue(d, level, h)?;
    let cosets = Cosets::new(level);
    let n = level as i64;
    let amax = scale * n * ((d as f64 / 3.0).sqrt().ceil() as i64 + 2);
    let mut labels = BTreeSet::new();
    let mut a = n;
    while a <= amax {
        let bmax = scale * (2 * a + 2 * n);
        let mut b = -bmax + (h + bmax).rem_euclid(2 * n);
        while b <= bmax {
            let num = b * b + d;
            if num % (4 * a) == 0 {
                labels.insert(label_with(&Form::new(a, b, num / (4 * a)), &cosets));
            }
            b += 2 * n;
        }
        a += n;
    }
    Ok(labels)
}

/// Atkin-Lehner involution `W_e` for an exact divisor `e` of `N`, acting on
/// forms with `N | a`: `Q o W_e / e` where `W_e = [[e, y], [N, e w]]`, `e w - (N/e) y = 1`.
pub fn atkin_lehner(q: &Form, e: u32, level: u32) -> Result<Form> {
    let (e_, n) = (e as i64, level as i64);
    if e == 0 || n % e_ != 0 || ext_gcd(e_, n / e_).0 != 1 {
        return Err(Error::InvalidArgument(format!("{e} is not an exact divisor of {level}")));
    }
    if q.a % n != 0 {
        return Err(Error::NotDivisible { a: q.a, p: n });
    }
    let (_, w, y) = ext_gcd(e_, n / e_);
    let m = GroupElement { a: e_, b: -y, c: n, d: e_ * w };
    let f = act(q, &m);
    if f.a % e_ != 0 || f.b % e_ != 0 || f.c % e_ != 0 {
        return Err(Error::NotDivisible { a: f.a, p: e_ });
    }
    Ok(Form::new(f.a / e_, f.b / e_, f.c / e_))
}

/// `[c p, -b, a / p]`, the Fricke involution at prime level `p`.
pub fn atkin_lehner_prime(q: &Form, p: i64) -> Result<Form> {
    if p <= 0 || q.a % p != 0 {
        return Err(Error::NotDivisible { a: q.a, p });
    }
    Ok(Form::new(q.c * p, -q.b, q.a / p))
}

/// A form in the `Gamma_0*(N)`-orbit of `Q` whose leading coefficient is as small
/// as the Atkin-Lehner maps and `Gamma_0(N)` allow; its Heegner point has
/// maximal imaginary part among those reached.
pub fn evaluation_form(q: &Form, level: u32) -> Form {
    let mut best = gamma0_minimize(q, level);
    loop {
        let mut improved = false;
        for e in divisors(level as u64).into_iter().skip(1) {
            if let Ok(w) = atkin_lehner(&best, e as u32, level) {
                let cand = gamma0_minimize(&w, level);
                if cand.a < best.a {
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            return best;
        }
    }
}

/// Exact CM point `(-b + i sqrt(d)) / (2a)` stored as `(-b, d, 2a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeegnerPoint {
    pub x: i64,
    pub d: i64,
    pub den: i64,
}

impl fmt::Display for HeegnerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + sqrt(-{}))/{}", self.x, self.d, self.den)
    }
}

pub fn heegner_point(q: &Form) -> Result<HeegnerPoint> {
    if !q.is_positive_definite() {
        return Err(Error::NotUpperHalfPlane);
    }
    Ok(HeegnerPoint {
        x: -q.b,
        d: -q.discriminant(),
        den: 2 * q.a,
    })
}

/// Number of distinct primes dividing `gcd(N, d)`, with `gcd(N, 0) = N`.
pub fn mu(level: u32, d: i64) -> u32 {
    let g = ext_gcd(level as i64, d.abs()).0;
    omega(g as u64)
}

/// `Gamma_0(N)`-classes of all residues `h`, grouped by `Gamma_0*(N)`-orbit. Each
/// entry lists the member classes and the number of Atkin-Lehner involutions
/// fixing the orbit's first class.
pub fn fricke_orbits(d: i64, level: u32) -> Result<Vec<(Vec<FormClass>, u32)>> {
    check_discriminant(d)?;
    let cosets = Cosets::new(level);
    let mut by_label: BTreeMap<Label, FormClass> = BTreeMap::new();
    for h in valid_residues(d, level) {
        for c in classes_gamma0(d, level, h)? {
            by_label.insert(c.label, c);
        }
    }
    let involutions: Vec<u32> = divisors(level as u64).into_iter().map(|e| e as u32).collect();
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for (label, class) in &by_label {
        if done.contains(label) {
            continue;
        }
        let mut members = Vec::new();
        let mut fixing = 0;
        for &e in &involutions {
            let img = label_with(&atkin_lehner(&class.rep, e, level)?, &cosets);
            if img == *label {
                fixing += 1;
            }
            if done.insert(img) {
                members.push(by_label[&img].clone());
            }
        }
        out.push((members, fixing));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminants_and_action() {
        assert_eq!(discriminant(&Form::new(1, 1, 1)), -3);
        assert_eq!(discriminant(&Form::new(6, -4, 1)), -8);
        assert_eq!(discriminant(&Form::new(10, -6, 1)), -4);
        let q = Form::new(6, -4, 1);
        assert_eq!(act(&q, &GroupElement::IDENTITY), q);
        let t = GroupElement::translation(1);
        assert_eq!(act(&q, &t), Form::new(6, 8, 3));
        assert_eq!(act(&act(&q, &t), &t.inverse()), q);
    }

    #[test]
    fn reduction() {
        let (r, g) = sl2_reduce(&Form::new(6, -4, 1));
        assert_eq!(r, Form::new(1, 0, 2));
        assert_eq!(act(&Form::new(6, -4, 1), &g), r);
        assert_eq!(sl2_reduce(&Form::new(1, 1, 1)).0, Form::new(1, 1, 1));
        assert_eq!(sl2_reduce(&Form::new(2, 2, 3)).0, Form::new(2, 2, 3));
        assert_eq!(sl2_reduce(&Form::new(3, -2, 3)).0, Form::new(3, 2, 3));
    }

    #[test]
    fn sl2_classes() {
        let c3 = classes_sl2(3).unwrap();
        assert_eq!(c3.len(), 1);
        assert_eq!((c3[0].rep, c3[0].stabilizer_order), (Form::new(1, 1, 1), 3));
        let c4 = classes_sl2(4).unwrap();
        assert_eq!((c4[0].rep, c4[0].stabilizer_order), (Form::new(1, 0, 1), 2));
        let c16: Vec<Form> = classes_sl2(16).unwrap().iter().map(|c| c.rep).collect();
        assert_eq!(c16, vec![Form::new(1, 0, 4), Form::new(2, 0, 2)]);
        assert!(matches!(classes_sl2(5), Err(Error::BadDiscriminant(5))));
    }

    #[test]
    fn coset_counts() {
        assert_eq!(coset_reps(1), vec![GroupElement::IDENTITY]);
        for (n, idx) in [(2, 3), (3, 4), (5, 6), (6, 12), (7, 8), (10, 18), (13, 14)] {
            let reps = coset_reps(n);
            assert_eq!(reps.len(), idx);
            for (i, g) in reps.iter().enumerate() {
                assert_eq!(g.det(), 1);
                for h in &reps[i + 1..] {
                    assert!(!same_coset(g, h, n));
                }
            }
        }
    }

    #[test]
    fn labels_of_spot_forms() {
        let q = Form::new(6, -4, 1);
        let g = GroupElement::new(1, 0, 6, 1).unwrap();
        assert_eq!(canonical_label(&q, 6), canonical_label(&act(&q, &g), 6));
        assert_eq!(canonical_label(&q, 1).reduced, Form::new(1, 0, 2));
        let c = classes_gamma0(8, 6, 8).unwrap();
        assert!(c.iter().any(|k| k.label == canonical_label(&q, 6)));
        let q10 = Form::new(10, -6, 1);
        let h = q10.b.rem_euclid(20);
        assert!(classes_gamma0(4, 10, h).unwrap().iter().any(|k| k.label == canonical_label(&q10, 10)));
        assert!(matches!(classes_gamma0(8, 6, 1), Err(Error::BadResidue { .. })));
    }

    #[test]
    fn spot_stabilizers() {
        let c = classes_gamma0(8, 6, 8).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].stabilizer_order, 1);
        let c = classes_gamma0(4, 10, 14).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].stabilizer_order, 2);
        let hurwitz: f64 = classes_gamma0(3, 1, 1).unwrap().iter().map(|c| 1.0 / c.stabilizer_order as f64).sum();
        assert_eq!(hurwitz, 1.0 / 3.0);
    }

    #[test]
    fn atkin_lehner_maps() {
        assert_eq!(atkin_lehner_prime(&Form::new(2, 2, 1), 2).unwrap(), Form::new(2, -2, 1));
        assert_eq!(atkin_lehner_prime(&Form::new(6, -4, 1), 2).unwrap(), Form::new(2, 4, 3));
        let q = Form::new(14, 6, 1);
        let twice = atkin_lehner_prime(&atkin_lehner_prime(&q, 7).unwrap(), 7).unwrap();
        assert_eq!(twice, q);
        assert!(matches!(atkin_lehner_prime(&Form::new(3, 1, 1), 2), Err(Error::NotDivisible { .. })));
        for e in [1u32, 2, 3, 6] {
            let w = atkin_lehner(&Form::new(6, -4, 1), e, 6).unwrap();
            assert_eq!(w.discriminant(), -8);
            assert_eq!(w.a % 6, 0);
        }
        let back = atkin_lehner(&atkin_lehner(&Form::new(6, -4, 1), 2, 6).unwrap(), 2, 6).unwrap();
        assert_eq!(canonical_label(&back, 6), canonical_label(&Form::new(6, -4, 1), 6));
    }

    #[test]
    fn heegner_and_mu() {
        assert_eq!(heegner_point(&Form::new(6, -4, 1)).unwrap(), HeegnerPoint { x: 4, d: 8, den: 12 });
        assert_eq!(heegner_point(&Form::new(10, -6, 1)).unwrap(), HeegnerPoint { x: 6, d: 4, den: 20 });
        assert_eq!(heegner_point(&Form::new(1, 0, 1)).unwrap(), HeegnerPoint { x: 0, d: 4, den: 2 });
        assert!(heegner_point(&Form::new(1, 3, 1)).is_err());
        assert_eq!(mu(6, 8), 1);
        assert_eq!(mu(6, 0), 2);
        assert_eq!(mu(5, 7), 0);
    }

    #[test]
    fn minimization_and_evaluation_form() {
        let q = Form::new(6, -4, 1);
        let m = gamma0_minimize(&act(&q, &GroupElement::new(1, 0, 12, 1).unwrap()), 6);
        assert_eq!(m, Form::new(6, -4, 1));
        let e = evaluation_form(&q, 6);
        assert_eq!(e.discriminant(), -8);
        assert!(e.a <= 6);
    }

    #[test]
    fn fricke_orbit_stabilizers() {
        let orbits = fricke_orbits(8, 6).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].0.len() as u32 * orbits[0].1, 4);
        assert_eq!(orbits[0].0[0].stabilizer_order * orbits[0].1, 2);
        let orbits = fricke_orbits(4, 10).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].0[0].stabilizer_order * orbits[0].1, 4);
    }
}
