//! Exact arithmetic in Q(q^{1/2}) and its complex specializations.
//!
//! An element is a polynomial in the abstract root `z = q^{1/2}` (order 2r) with
//! rational coefficients, reduced modulo `M_r`: `Phi_{2r}` for even r and
//! `Phi_{2r} * Phi_r` for odd r. The second factor keeps evaluation at
//! `e^{i pi s / r}` a ring map for even s as well as odd s.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

/// Integer coefficients (low degree first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    assert!(n >= 1);
    // x^n - 1 divided by Phi_d for every proper divisor d
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = BigInt::from(-1);
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let (q, rem) = divrem_monic(&p, &cyclotomic_poly(d));
            debug_assert!(rem.iter().all(Zero::is_zero));
            p = q;
        }
    }
    p
}

fn divrem_monic(p: &[BigInt], m: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let dm = m.len() - 1;
    let mut rem = p.to_vec();
    if rem.len() <= dm {
        rem.resize(dm, BigInt::zero());
        return (vec![BigInt::zero()], rem);
    }
    let mut q = vec![BigInt::zero(); rem.len() - dm];
    for d in (dm..rem.len()).rev() {
        let c = std::mem::take(&mut rem[d]);
        if c.is_zero() {
            continue;
        }
        for (i, mi) in m.iter().enumerate().take(dm) {
            rem[d - dm + i] -= &c * mi;
        }
        q[d - dm] = c;
    }
    rem.truncate(dm);
    (q, rem)
}

/// Reduction data for one level r.
#[derive(Debug)]
pub struct Field {
    pub r: u32,
    pub modulus: Vec<BigInt>,
    pub phi_2r: Vec<BigInt>,
    pub phi_r: Option<Vec<BigInt>>,
}

impl Field {
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }
}

/// Shared reduction data for level r.
pub fn field(r: u32) -> Arc<Field> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(r)
        .or_insert_with(|| {
            let phi_2r = cyclotomic_poly(2 * r);
            let phi_r = (r % 2 == 1).then(|| cyclotomic_poly(r));
            let modulus = match &phi_r {
                Some(p) => poly_mul(&phi_2r, p),
                None => phi_2r.clone(),
            };
            Arc::new(Field { r, modulus, phi_2r, phi_r })
        })
        .clone()
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Element of Q(q^{1/2}) at level r, in canonical form.
///
/// `num` has length `deg M_r`; `den > 0` and is coprime to the content of `num`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloNum {
    r: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloNum(r={}, [", self.r)?;
        for (k, c) in self.num.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]/{})", self.den)
    }
}

impl CycloNum {
    fn from_raw(r: u32, mut num: Vec<BigInt>, mut den: BigInt) -> CycloNum {
        let f = field(r);
        if num.len() > f.degree() {
            num = divrem_monic(&num, &f.modulus).1;
        } else {
            num.resize(f.degree(), BigInt::zero());
        }
        if den.is_negative() {
            den = -den;
            num.iter_mut().for_each(|c| *c = -&*c);
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if num.iter().all(Zero::is_zero) {
            den = BigInt::one();
        } else if !g.is_one() {
            num.iter_mut().for_each(|c| *c = &*c / &g);
            den /= &g;
        }
        CycloNum { r, num, den }
    }

    pub fn zero(r: u32) -> CycloNum {
        CycloNum::from_int(r, 0)
    }

    pub fn one(r: u32) -> CycloNum {
        CycloNum::from_int(r, 1)
    }

    pub fn from_int(r: u32, n: i64) -> CycloNum {
        CycloNum::from_raw(r, vec![BigInt::from(n)], BigInt::one())
    }

    pub fn from_ratio(r: u32, n: BigInt, d: BigInt) -> CycloNum {
        assert!(!d.is_zero(), "zero denominator");
        CycloNum::from_raw(r, vec![n], d)
    }

    /// `z^k` for any integer k, where z is the abstract root q^{1/2}.
    pub fn zeta_pow(r: u32, k: i64) -> CycloNum {
        let e = k.rem_euclid(2 * r as i64) as usize;
        let mut num = vec![BigInt::zero(); e + 1];
        num[e] = BigInt::one();
        CycloNum::from_raw(r, num, BigInt::one())
    }

    /// Build from coefficients of z^0, z^1, ... (any length).
    pub fn from_coeffs(r: u32, coeffs: &[BigRational]) -> CycloNum {
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        CycloNum::from_raw(r, num, den)
    }

    pub fn level(&self) -> u32 {
        self.r
    }

    /// Order of the abstract root z = q^{1/2}.
    pub fn order(&self) -> u32 {
        2 * self.r
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    fn check_level(&self, other: &CycloNum) {
        assert_eq!(self.r, other.r, "mixing levels {} and {}", self.r, other.r);
    }

    pub fn inverse(&self) -> Option<CycloNum> {
        let f = field(self.r);
        let a: Vec<BigRational> = self.coeffs();
        let m: Vec<BigRational> = f.modulus.iter().map(|c| BigRational::from(c.clone())).collect();
        rpoly::inverse_mod(&a, &m).map(|inv| CycloNum::from_coeffs(self.r, &inv))
    }

    pub fn pow(&self, e: u32) -> CycloNum {
        let mut acc = CycloNum::one(self.r);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Galois action z -> z^k (k coprime to 2r).
    pub fn galois(&self, k: i64) -> CycloNum {
        let n = 2 * self.r as i64;
        assert_eq!(k.gcd(&n), 1, "galois exponent must be coprime to {n}");
        let mut num = vec![BigInt::zero(); n as usize];
        for (j, c) in self.num.iter().enumerate() {
            num[(j as i64 * k).rem_euclid(n) as usize] += c;
        }
        CycloNum::from_raw(self.r, num, self.den.clone())
    }

    /// Evaluate at z = e^{i pi s / r}.
    pub fn ev(&self, s: i64) -> Result<Complex64, Error> {
        if s.gcd(&(self.r as i64)) != 1 {
            return Err(Error::NotCoprime { s, r: self.r as i64 });
        }
        let n = 2 * self.r as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (k as i64 * s).rem_euclid(n);
            let theta = std::f64::consts::PI * e as f64 / self.r as f64;
            acc += Complex64::from_polar(1.0, theta) * ratio_f64(c, &BigInt::one());
        }
        Ok(acc / ratio_f64(&self.den, &BigInt::one()))
    }

    /// Integer coefficients modulo Phi_n (n = 2r, or n = r for odd r), if integral.
    pub fn residue_integral(&self, n: u32) -> Option<Vec<BigInt>> {
        let f = field(self.r);
        let phi = if n == 2 * self.r {
            &f.phi_2r
        } else if n == self.r && f.phi_r.is_some() {
            f.phi_r.as_ref().unwrap()
        } else {
            panic!("{n} is not a component order at level {}", self.r)
        };
        let rem = divrem_monic(&self.num, phi).1;
        let mut out = Vec::with_capacity(rem.len());
        for c in rem {
            let (q, m) = c.div_rem(&self.den);
            if !m.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    /// Reassemble from residues modulo Phi_{2r} and (odd r) Phi_r.
    pub fn from_residues(r: u32, mod_2r: &[BigInt], mod_r: Option<&[BigInt]>) -> CycloNum {
        let f = field(r);
        let to_q = |v: &[BigInt]| -> Vec<BigRational> {
            v.iter().map(|c| BigRational::from(c.clone())).collect()
        };
        let a = to_q(mod_2r);
        match (&f.phi_r, mod_r) {
            (None, _) => CycloNum::from_coeffs(r, &a),
            (Some(phi_r), Some(b)) => {
                // x = b + Phi_r * ((a - b) * Phi_r^{-1} mod Phi_2r)
                let b = to_q(b);
                let p2 = to_q(&f.phi_2r);
                let p1 = to_q(phi_r);
                let u = rpoly::inverse_mod(&p1, &p2).expect("coprime cyclotomic factors");
                let diff = rpoly::sub(&a, &b);
                let t = rpoly::rem(&rpoly::mul(&diff, &u), &p2);
                let x = rpoly::add(&b, &rpoly::mul(&p1, &t));
                CycloNum::from_coeffs(r, &x)
            }
            (Some(_), None) => panic!("odd level needs both residues"),
        }
    }
}

fn ratio_f64(n: &BigInt, d: &BigInt) -> f64 {
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => BigRational::new(n.clone(), d.clone()).to_f64().unwrap_or(f64::NAN),
    }
}

impl Add for &CycloNum {
    type Output = CycloNum;
    fn add(self, o: &CycloNum) -> CycloNum {
        self.check_level(o);
        let num = self
            .num
            .iter()
            .zip(&o.num)
            .map(|(a, b)| a * &o.den + b * &self.den)
            .collect();
        CycloNum::from_raw(self.r, num, &self.den * &o.den)
    }
}

impl Sub for &CycloNum {
    type Output = CycloNum;
    fn sub(self, o: &CycloNum) -> CycloNum {
        self + &(-o)
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum { r: self.r, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Mul for &CycloNum {
    type Output = CycloNum;
    fn mul(self, o: &CycloNum) -> CycloNum {
        self.check_level(o);
        CycloNum::from_raw(self.r, poly_mul(&self.num, &o.num), &self.den * &o.den)
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for CycloNum {
            type Output = CycloNum;
            fn $m(self, o: CycloNum) -> CycloNum {
                (&self).$m(&o)
            }
        }
        impl $tr<&CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, o: &CycloNum) -> CycloNum {
                (&self).$m(o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        -&self
    }
}

/// Quantum integer [n] = z^{n-1} + z^{n-3} + ... + z^{1-n}.
pub fn quantum_int(n: u32, r: u32) -> Result<CycloNum, Error> {
    if r < 3 {
        return Err(Error::LevelTooSmall(r as i64));
    }
    if n >= r {
        return Err(Error::OutOfRange { what: "quantum integer", value: n as i64, r });
    }
    let m = 2 * r as i64;
    let mut num = vec![BigInt::zero(); m as usize];
    let mut e = n as i64 - 1;
    while e >= 1 - n as i64 {
        num[e.rem_euclid(m) as usize] += 1;
        e -= 2;
    }
    Ok(CycloNum::from_raw(r, num, BigInt::one()))
}

pub fn quantum_factorial(n: u32, r: u32) -> Result<CycloNum, Error> {
    if r < 3 {
        return Err(Error::LevelTooSmall(r as i64));
    }
    if n >= r {
        return Err(Error::OutOfRange { what: "quantum factorial", value: n as i64, r });
    }
    let mut acc = CycloNum::one(r);
    for k in 2..=n {
        acc = &acc * &quantum_int(k, r)?;
    }
    Ok(acc)
}

/// Nearest integer to z when z is within tol of it (real and imaginary parts).
pub fn is_near_integer(z: Complex64, tol: f64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() < tol && z.im.abs() < tol && n.abs() < 9.0e18 {
        Some(n as i64)
    } else {
        None
    }
}

/// Dense polynomials over Q, low degree first.
pub(crate) mod rpoly {
    use num_rational::BigRational;
    use num_traits::Zero;

    pub fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        p
    }

    pub fn add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        let z = BigRational::zero();
        trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        let z = BigRational::zero();
        trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(out)
    }

    pub fn divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let b = trim(b.to_vec());
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let lead = b[db].clone();
        let mut q = vec![BigRational::zero(); r.len() - db];
        while r.len() > db {
            let d = r.len() - 1;
            let c = &r[d] / &lead;
            for (i, bi) in b.iter().enumerate() {
                r[d - db + i] -= &c * bi;
            }
            q[d - db] = c;
            r.pop();
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        divrem(a, b).1
    }

    /// Inverse of a modulo m, when gcd(a, m) = 1.
    pub fn inverse_mod(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
        let (mut r0, mut r1) = (trim(m.to_vec()), rem(a, m));
        let (mut t0, mut t1): (Vec<BigRational>, Vec<BigRational>) =
            (Vec::new(), vec![BigRational::from_integer(1.into())]);
        while !r1.is_empty() {
            let (q, r2) = divrem(&r0, &r1);
            let t2 = sub(&t0, &mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = &r0[0];
        Some(rem(&t0.iter().map(|t| t / c).collect::<Vec<_>>(), m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cyclotomic_small() {
        let p = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        assert_eq!(cyclotomic_poly(1), p(&[-1, 1]));
        assert_eq!(cyclotomic_poly(6), p(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(10), p(&[1, -1, 1, -1, 1]));
        assert_eq!(cyclotomic_poly(8), p(&[1, 0, 0, 0, 1]));
    }

    #[test]
    fn quantum_examples() {
        assert!(quantum_int(1, 5).unwrap().is_one());
        assert!(quantum_int(0, 5).unwrap().is_zero());
        let q2 = quantum_int(2, 5).unwrap().ev(1).unwrap();
        assert!((q2.re - 2.0 * (PI / 5.0).cos()).abs() < 1e-12);
        let q3 = quantum_int(3, 5).unwrap().ev(2).unwrap();
        assert!((q3.re - (6.0 * PI / 5.0).sin() / (2.0 * PI / 5.0).sin()).abs() < 1e-12);
        assert!(quantum_factorial(0, 7).unwrap().is_one());
        assert!(quantum_factorial(1, 7).unwrap().is_one());
        assert!(quantum_int(5, 5).is_err());
        assert!(quantum_factorial(7, 7).is_err());
    }

    #[test]
    fn ev_zeta() {
        let z = CycloNum::zeta_pow(3, 1).ev(1).unwrap();
        assert!((z - Complex64::new(0.5, 3f64.sqrt() / 2.0)).norm() < 1e-12);
        assert!(CycloNum::one(6).ev(2).is_err());
        assert!((CycloNum::one(5).ev(3).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn zeta_order() {
        for r in 3..10 {
            assert!(CycloNum::zeta_pow(r, 2 * r as i64).is_one());
            assert!(!CycloNum::zeta_pow(r, r as i64).is_one());
            let half = CycloNum::zeta_pow(r, r as i64);
            assert_eq!(half == -CycloNum::one(r), r % 2 == 0);
            assert_eq!(half.ev(1).unwrap().re.round(), -1.0);
            if r % 2 == 1 {
                assert_eq!(half.ev(2).unwrap().re.round(), 1.0);
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        for r in 3..10 {
            for n in 1..r {
                let q = quantum_int(n, r).unwrap();
                let inv = q.inverse().unwrap();
                assert!((&q * &inv).is_one(), "r={r} n={n}");
            }
            assert!(CycloNum::zero(r).inverse().is_none());
        }
    }

    #[test]
    fn residues_roundtrip() {
        for r in [5u32, 7, 9] {
            let x = &quantum_factorial(r - 1, r).unwrap() + &CycloNum::zeta_pow(r, 3);
            let a = x.residue_integral(2 * r).unwrap();
            let b = x.residue_integral(r).unwrap();
            assert_eq!(CycloNum::from_residues(r, &a, Some(&b)), x);
        }
    }

    #[test]
    fn near_integer() {
        assert_eq!(is_near_integer(Complex64::new(2.0000000003, 0.0), 1e-6), Some(2));
        assert_eq!(is_near_integer(Complex64::new(2.3, 0.0), 1e-6), None);
        assert_eq!(is_near_integer(Complex64::new(1.0, 1e-3), 1e-6), None);
    }
}
