//! Seifert symbols, Dedekind sums, Hansen's formula for τ_r and the
//! closed forms and vanishing criterion for uniform cone orders.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cyclo::is_near_integer;
use crate::Error;

/// (g; (a_1, b_1), ..., (a_n, b_n)) with orientable base and fibration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeifertSymbol {
    g: u32,
    pairs: Vec<(i64, i64)>,
}

impl SeifertSymbol {
    pub fn new(g: u32, pairs: Vec<(i64, i64)>) -> Result<SeifertSymbol, Error> {
        for &(a, b) in &pairs {
            if a < 1 {
                return Err(Error::Parse(format!("cone order {a} must be positive")));
            }
            if a.gcd(&b) != 1 {
                return Err(Error::Parse(format!("pair ({a},{b}) is not coprime")));
            }
        }
        Ok(SeifertSymbol { g, pairs })
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }

    /// The common cone order when all pairs share one.
    pub fn uniform_order(&self) -> Option<i64> {
        let a = self.pairs.first()?.0;
        self.pairs.iter().all(|p| p.0 == a).then_some(a)
    }

    /// lcm of the cone orders (1 when there are none).
    pub fn order(&self) -> i64 {
        self.pairs.iter().fold(1, |acc, p| acc.lcm(&p.0))
    }

    pub fn negated(&self) -> SeifertSymbol {
        SeifertSymbol { g: self.g, pairs: self.pairs.iter().map(|&(a, b)| (a, -b)).collect() }
    }

    /// Normal form: b_j reduced into 0..a_j for a_j > 1, sorted, integer
    /// parts collected into one trailing (1, e) term.
    pub fn canonical(&self) -> (u32, Vec<(i64, i64)>, i64) {
        let mut e = 0;
        let mut out = Vec::new();
        for &(a, b) in &self.pairs {
            if a == 1 {
                e += b;
            } else {
                let (q, r) = b.div_mod_floor(&a);
                e += q;
                out.push((a, r));
            }
        }
        out.sort();
        (self.g, out, e)
    }
}

impl fmt::Display for SeifertSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.g)?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            write!(f, "{}{a}/{b}", if i == 0 { " " } else { ", " })?;
        }
        Ok(())
    }
}

impl FromStr for SeifertSymbol {
    type Err = Error;

    /// Parses `"g; a1/b1, a2/b2, ..."`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<SeifertSymbol, Error> {
        let bad = || Error::Parse(format!("invalid Seifert symbol {s:?}"));
        let t = s.trim();
        let t = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t);
        let (g, rest) = t.split_once(';').unwrap_or((t, ""));
        let g: u32 = g.trim().parse().map_err(|_| bad())?;
        let mut pairs = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (a, b) = item.split_once('/').ok_or_else(bad)?;
            pairs.push((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?));
        }
        SeifertSymbol::new(g, pairs)
    }
}

/// Rational Euler number −Σ b_j/a_j.
pub fn euler_number(sym: &SeifertSymbol) -> BigRational {
    -sym.pairs.iter().map(|&(a, b)| BigRational::new(b.into(), a.into())).sum::<BigRational>()
}

/// True when the symbols are related by reordering, (1,0) insertion, transfer
/// of integers between pairs, or global negation.
pub fn same_manifold(a: &SeifertSymbol, b: &SeifertSymbol) -> bool {
    let ca = a.canonical();
    ca == b.canonical() || ca == b.negated().canonical()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Dedekind sum s(b, a) by the reciprocity recursion.
pub fn dedekind_sum(b: i64, a: i64) -> Result<BigRational, Error> {
    if a < 1 || a.gcd(&b) != 1 {
        return Err(Error::Hypothesis(format!("dedekind sum needs a >= 1 and gcd(b, a) = 1, got ({b}, {a})")));
    }
    let mut sign = 1;
    let (mut b, mut a) = (b.rem_euclid(a), a);
    let mut acc = BigRational::zero();
    while a > 1 {
        // s(b,a) = (a/b + b/a + 1/(ab))/12 − 1/4 − s(a mod b, b), 0 < b < a
        let term = (rat(a, b) + rat(b, a) + rat(1, a * b)) / rat(12, 1) - rat(1, 4);
        if sign > 0 {
            acc += term;
        } else {
            acc -= term;
        }
        sign = -sign;
        let nb = a % b;
        a = b;
        b = nb;
    }
    Ok(acc)
}

/// e^{iπq} with q reduced modulo 2 before conversion.
fn expi_pi(q: &BigRational) -> Complex64 {
    let two = BigRational::from_integer(BigInt::from(2));
    let red = q - (q / &two).floor() * &two;
    let x = red.to_f64().unwrap() * std::f64::consts::PI;
    Complex64::new(x.cos(), x.sin())
}

fn expi_frac(num: i128, den: i128) -> Complex64 {
    let m = num.rem_euclid(2 * den);
    let x = m as f64 / den as f64 * std::f64::consts::PI;
    Complex64::new(x.cos(), x.sin())
}

fn inverse_mod(b: i64, a: i64) -> i64 {
    if a == 1 {
        return 0;
    }
    let g = b.rem_euclid(a).extended_gcd(&a);
    g.x.rem_euclid(a)
}

/// Least non-negative congruence inverses b*_j of b_j modulo a_j.
pub fn default_inverses(sym: &SeifertSymbol) -> Vec<i64> {
    sym.pairs.iter().map(|&(a, b)| inverse_mod(b, a)).collect()
}

fn check_r(r: u32) -> Result<(), Error> {
    if r < 3 {
        Err(Error::LevelTooSmall(r as i64))
    } else {
        Ok(())
    }
}

/// Z_r as a sum over γ of a product over the pairs of their (μ, m) sums.
pub fn z_full(sym: &SeifertSymbol, r: u32, inverses: &[i64]) -> Result<Complex64, Error> {
    check_r(r)?;
    let e = euler_number(sym);
    let (en, ed) = (e.numer().to_i128().unwrap(), e.denom().to_i128().unwrap());
    let r = r as i128;
    let n = sym.pairs.len() as i32;
    let mut z = Complex64::zero();
    for gamma in 1..r {
        let sin = (std::f64::consts::PI * gamma as f64 / r as f64).sin();
        let mut term = expi_frac(gamma * gamma * en, 2 * r * ed) / sin.powi(n + 2 * sym.g as i32 - 2);
        for (&(a, _), &bs) in sym.pairs.iter().zip(inverses) {
            let (a, bs) = (a as i128, bs as i128);
            let mut f = Complex64::zero();
            for mu in [1i128, -1] {
                for m in 0..a {
                    let num = -(2 * r * m + mu) * gamma - 2 * r * (r * m * m + mu * m) * bs;
                    f += expi_frac(num, a * r) * mu as f64;
                }
            }
            term *= f;
        }
        z += term;
    }
    Ok(z)
}

/// Z_r for uniform cone order a dividing r and vanishing Euler number.
pub fn z_simplified(sym: &SeifertSymbol, r: u32) -> Result<Complex64, Error> {
    check_r(r)?;
    let a = sym.uniform_order().unwrap_or(1);
    if r as i64 % a != 0 || !euler_number(sym).is_zero() {
        return Err(Error::Hypothesis("needs a uniform cone order dividing r and zero Euler number".into()));
    }
    let inv = default_inverses(sym);
    let n = sym.pairs.len();
    let (a, r) = (a as i128, r as i128);
    let mut z = Complex64::zero();
    for gamma in 1..r {
        let sin = (std::f64::consts::PI * gamma as f64 / r as f64).sin();
        let denom = sin.powi(n as i32 + 2 * sym.g as i32 - 2);
        for signs in 0u32..1 << n {
            let mu: Vec<i128> = (0..n).map(|j| if signs >> j & 1 == 0 { 1 } else { -1 }).collect();
            let total: i128 = mu.iter().sum();
            let sign: i128 = mu.iter().product();
            let mut term = expi_frac(-gamma * total, a * r) * sign as f64 / denom;
            for j in 0..n {
                let mut s = Complex64::zero();
                for m in 0..a {
                    s += expi_frac(-2 * (gamma + inv[j] as i128 * mu[j]) * m, a);
                }
                term *= s;
            }
            z += term;
        }
    }
    Ok(z)
}

/// The framing factor U_r.
pub fn u_factor(sym: &SeifertSymbol, r: u32) -> Result<Complex64, Error> {
    let e = euler_number(sym);
    let sgn = if e.is_positive() {
        1
    } else if e.is_negative() {
        -1
    } else {
        0
    };
    let mut ded = BigRational::zero();
    for &(a, b) in &sym.pairs {
        ded += dedekind_sum(b, a)?;
    }
    let r = r as i64;
    let sign = if sym.pairs.len() % 2 == 0 { 1.0 } else { -1.0 };
    let orient = expi_pi(&rat(sgn * (6 - 3 * r), 4 * r));
    let framing = expi_pi(&((e + ded * rat(12, 1)) / rat(2 * r, 1)));
    Ok(orient * framing * sign)
}

/// τ_r(M)/τ_r(S²×S¹) with explicit congruence inverses b*_j.
pub fn hansen_ratio_with(sym: &SeifertSymbol, r: u32, inverses: &[i64]) -> Result<Complex64, Error> {
    let z = z_full(sym, r, inverses)?;
    let u = u_factor(sym, r)?;
    let prod: f64 = sym.pairs.iter().map(|p| p.0 as f64).product();
    let n = sym.pairs.len() as i32;
    let g = sym.g as i32;
    Ok(u * z * (r as f64).powi(g - 1) / (2f64.powi(n + g - 1) * prod.sqrt()))
}

/// τ_r(M)/τ_r(S²×S¹) with M oriented by its base and fibers.
pub fn hansen_ratio(sym: &SeifertSymbol, r: u32) -> Result<Complex64, Error> {
    hansen_ratio_with(sym, r, &default_inverses(sym))
}

/// TV_{r,1}(M) = |τ_r(M)/τ_r(S²×S¹)|².
pub fn tv_seifert(sym: &SeifertSymbol, r: u32) -> Result<f64, Error> {
    Ok(hansen_ratio(sym, r)?.norm_sqr())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitCertificate {
    pub b_star: i64,
    pub nu: Vec<i64>,
}

impl UnitCertificate {
    pub fn verify(&self, sym: &SeifertSymbol, a: i64) -> bool {
        self.b_star.gcd(&a) == 1
            && self.nu.len() == sym.pairs.len()
            && sym.pairs.iter().zip(&self.nu).all(|(&(_, b), &nu)| (self.b_star * b - nu).rem_euclid(a) == 0)
    }
}

/// Checks the hypotheses of the uniform-order closed form: all a_j = a ≥ 3,
/// Σ b_j = 0, n < a.
fn uniform_hypotheses(sym: &SeifertSymbol, a: i64) -> Result<(), Error> {
    if a < 3 {
        return Err(Error::Hypothesis(format!("cone order {a} must be at least 3")));
    }
    if sym.pairs.iter().any(|p| p.0 != a) {
        return Err(Error::Hypothesis(format!("cone orders are not all equal to {a}")));
    }
    if sym.pairs.iter().map(|p| p.1).sum::<i64>() != 0 {
        return Err(Error::Hypothesis("the b_j do not sum to zero".into()));
    }
    if sym.pairs.len() as i64 >= a {
        return Err(Error::Hypothesis(format!("{} pairs is not fewer than the cone order {a}", sym.pairs.len())));
    }
    Ok(())
}

/// Searches b* in (Z/a)^× with b*·b_j ≡ ±1 (mod a) for every j.
pub fn check_unit_criterion(sym: &SeifertSymbol, a: i64) -> Result<Option<UnitCertificate>, Error> {
    uniform_hypotheses(sym, a)?;
    for b_star in (1..a).filter(|x| x.gcd(&a) == 1) {
        let mut nu = Vec::new();
        for &(_, b) in &sym.pairs {
            match (b_star * b).rem_euclid(a) {
                1 => nu.push(1),
                x if x == a - 1 => nu.push(-1),
                _ => break,
            }
        }
        if nu.len() == sym.pairs.len() {
            return Ok(Some(UnitCertificate { b_star, nu }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ClosedForm {
    Value(f64),
    Vanishing,
}

impl ClosedForm {
    pub fn value(&self) -> f64 {
        match self {
            ClosedForm::Value(v) => *v,
            ClosedForm::Vanishing => 0.0,
        }
    }
}

/// Closed form of TV_{r,s} (or TV'_{r,s}) for uniform cone order a: a value at
/// r = a when a unit certificate exists, vanishing for every r divisible by a
/// otherwise. With no pairs the cone order is taken to be r.
pub fn tv_closed_form(sym: &SeifertSymbol, r: u32, s: i64, refined: bool) -> Result<ClosedForm, Error> {
    check_r(r)?;
    let r = r as i64;
    let a = sym.uniform_order().unwrap_or(r);
    if s.gcd(&r) != 1 {
        return Err(Error::NotCoprime { s, r });
    }
    if refined && (r % 2 == 0 || s % 2 != 0) {
        return Err(Error::Hypothesis("the refined invariant needs r odd and s even".into()));
    }
    match check_unit_criterion(sym, a)? {
        Some(cert) => {
            if r != a {
                return Err(Error::Hypothesis(format!("the closed form holds at r = {a} only")));
            }
            let n = sym.pairs.len() as i32;
            let g = sym.g as i32;
            let sin = (std::f64::consts::PI * (cert.b_star * s) as f64 / a as f64).sin();
            let two = if refined { 2 * n + 4 * g - 4 } else { 2 * n + 2 * g - 4 };
            Ok(ClosedForm::Value(
                (a as f64).powi(n + 2 * g - 2) / 2f64.powi(two) / sin.powi(2 * n + 4 * g - 4),
            ))
        }
        None if r % a == 0 => Ok(ClosedForm::Vanishing),
        None => Err(Error::Hypothesis(format!("vanishing holds for r divisible by {a} only"))),
    }
}

fn odd_zero_euler(sym: &SeifertSymbol) -> Result<(), Error> {
    if sym.pairs.iter().any(|p| p.0 % 2 == 0) {
        return Err(Error::Hypothesis("an even cone order is present".into()));
    }
    if !euler_number(sym).is_zero() {
        return Err(Error::Hypothesis("the Euler number is not zero".into()));
    }
    Ok(())
}

/// (TV_{3,1}, TV_{3,2}) = (2^{2g}, 2^{2g}) for odd cone orders and E = 0.
pub fn tv3_seifert(sym: &SeifertSymbol) -> Result<(f64, f64), Error> {
    odd_zero_euler(sym)?;
    let v = 4f64.powi(sym.g as i32);
    Ok((v, v))
}

/// TV'_{r,s} for r odd and s even, as TV_{r,r-s}/TV_{3,1}.
pub fn tv_prime_seifert(sym: &SeifertSymbol, r: u32, s: i64, tol: f64) -> Result<f64, Error> {
    odd_zero_euler(sym)?;
    check_r(r)?;
    let ri = r as i64;
    if ri % 2 == 0 || s % 2 != 0 || s.gcd(&ri) != 1 {
        return Err(Error::Hypothesis("needs r odd and s even coprime to r".into()));
    }
    let a = sym.uniform_order().unwrap_or(ri);
    if ri % a == 0 && uniform_hypotheses(sym, a).is_ok() {
        return tv_closed_form(sym, r, s, true).map(|c| c.value());
    }
    if ri.gcd(&sym.order()) != 1 {
        return Err(Error::Hypothesis(format!("no formula covers r = {r} for this symbol")));
    }
    let base = tv_seifert(sym, r)? / tv3_seifert(sym)?.0;
    if s.rem_euclid(2 * ri) == ri - 1 || is_near_integer(Complex64::new(base, 0.0), tol).is_some() {
        Ok(base)
    } else {
        Err(Error::Hypothesis("the value at s = r - 1 is not rational, so other s are not determined".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sym(s: &str) -> SeifertSymbol {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        let s = sym("0; 5/1, 5/1, 5/-2");
        assert_eq!(s.pairs(), &[(5, 1), (5, 1), (5, -2)]);
        assert_eq!(s.to_string(), "0; 5/1, 5/1, 5/-2");
        assert_eq!(sym("(2;)").to_string(), "2;");
        assert!("0; 4/2".parse::<SeifertSymbol>().is_err());
        assert!("x; 5/1".parse::<SeifertSymbol>().is_err());
    }

    #[test]
    fn euler_examples() {
        assert!(euler_number(&sym("0; 5/1, 5/1, 5/-2")).is_zero());
        assert_eq!(euler_number(&sym("0; 1/1")), rat(-1, 1));
        assert!(euler_number(&sym("2;")).is_zero());
    }

    #[test]
    fn moves() {
        assert!(same_manifold(&sym("0; 5/1, 5/-1"), &sym("0; 5/1, 5/4, 1/-1")));
        assert!(same_manifold(&sym("0; 5/1, 5/1, 5/-1, 5/-1"), &sym("0; 5/4, 5/4, 5/1, 5/1, 1/-2")));
        assert!(!same_manifold(&sym("0; 5/1, 5/-1"), &sym("0; 5/2, 5/-2")));
        assert!(same_manifold(&sym("0; 5/2, 5/-2"), &sym("0; 5/-2, 5/2, 1/0")));
    }

    #[test]
    fn dedekind_examples() {
        assert_eq!(dedekind_sum(1, 5).unwrap(), rat(1, 5));
        assert_eq!(dedekind_sum(-1, 7).unwrap(), -dedekind_sum(1, 7).unwrap());
        assert!(dedekind_sum(3, 1).unwrap().is_zero());
        assert!(dedekind_sum(2, 4).is_err());
        for a in 2..40i64 {
            assert_eq!(dedekind_sum(1, a).unwrap(), rat((a - 1) * (a - 2), 12 * a));
        }
    }

    #[test]
    fn anchors() {
        let s3 = sym("0; 1/1");
        for r in 3..9 {
            let want = 2.0 / r as f64 * (PI / r as f64).sin().powi(2);
            assert!((tv_seifert(&s3, r).unwrap() - want).abs() < 1e-12);
            assert!((hansen_ratio(&sym("0;"), r).unwrap() - 1.0).norm() < 1e-12);
        }
        assert!((tv_seifert(&s3, 5).unwrap() - 0.138197).abs() < 1e-6);
        let a = tv_seifert(&sym("0; 7/1, 7/1, 7/-1, 7/-1"), 7).unwrap();
        assert!((a - 49.0 / 16.0 / (PI / 7.0).sin().powi(4)).abs() < 1e-8 * a);
        assert!(tv_seifert(&sym("0; 5/1, 5/1, 5/-2"), 5).unwrap() < 1e-18);
        assert!(hansen_ratio(&s3, 2).is_err());
    }

    #[test]
    fn certificates() {
        let c = check_unit_criterion(&sym("0; 5/1, 5/1, 5/-1, 5/-1"), 5).unwrap().unwrap();
        assert_eq!(c, UnitCertificate { b_star: 1, nu: vec![1, 1, -1, -1] });
        assert!(check_unit_criterion(&sym("0; 5/1, 5/1, 5/-2"), 5).unwrap().is_none());
        let s = sym("0; 7/4, 7/4, 7/-4, 7/-4");
        let c = check_unit_criterion(&s, 7).unwrap().unwrap();
        assert_eq!(c, UnitCertificate { b_star: 2, nu: vec![1, 1, -1, -1] });
        assert!(c.verify(&s, 7));
        assert!(check_unit_criterion(&sym("0; 5/1, 5/2"), 5).is_err());
        assert!(check_unit_criterion(&sym("0; 5/1, 7/-1"), 5).is_err());
        assert!(check_unit_criterion(&sym("0; 3/1, 3/1, 3/-2"), 3).is_err());
    }

    #[test]
    fn closed_forms() {
        let a = sym("0; 7/1, 7/1, 7/-1, 7/-1");
        let v1 = tv_closed_form(&a, 7, 1, false).unwrap().value();
        let v2 = tv_closed_form(&a, 7, 2, false).unwrap().value();
        assert!((v1 - 86.409).abs() < 1e-2 && (v2 - 8.197).abs() < 1e-2);
        assert_eq!(tv_closed_form(&sym("0; 5/1, 5/1, 5/-2"), 10, 3, false).unwrap(), ClosedForm::Vanishing);
        let t = tv_closed_form(&sym("1; 5/1, 5/-1"), 5, 1, false).unwrap().value();
        assert!((t - 25.0 / 4.0 / (PI / 5.0).sin().powi(4)).abs() < 1e-9);
        assert!(tv_closed_form(&a, 14, 1, false).is_err());
        assert!(tv_closed_form(&a, 7, 1, true).is_err());
    }

    #[test]
    fn level_three_and_refined() {
        assert_eq!(tv3_seifert(&sym("0; 5/1, 5/1, 5/-2")).unwrap(), (1.0, 1.0));
        assert_eq!(tv3_seifert(&sym("1; 7/1, 7/-1")).unwrap(), (4.0, 4.0));
        assert!(tv3_seifert(&sym("0; 4/1, 4/-1")).is_err());
        let a = sym("0; 5/1, 5/1, 5/-1, 5/-1");
        let full = tv_closed_form(&a, 5, 2, true).unwrap().value();
        assert!((tv_prime_seifert(&a, 5, 2, 1e-6).unwrap() - full).abs() < 1e-12);
        let t = sym("1; 5/1, 5/-1");
        let want = tv_closed_form(&t, 5, 2, false).unwrap().value() / 4.0;
        assert!((tv_prime_seifert(&t, 5, 2, 1e-6).unwrap() - want).abs() < 1e-9);
        assert_eq!(tv_prime_seifert(&sym("0; 5/1, 5/1, 5/-2"), 5, 2, 1e-6).unwrap(), 0.0);
    }
}
