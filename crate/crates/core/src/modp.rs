//! Word-size prime fields with Montgomery multiplication.

/// A prime p < 2^63 with precomputed Montgomery constants (R = 2^64).
#[derive(Clone, Copy, Debug)]
pub struct Mont {
    pub p: u64,
    ninv: u64,
    r2: u64,
}

impl Mont {
    pub fn new(p: u64) -> Mont {
        assert!(p % 2 == 1 && p < 1 << 63);
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Mont { p, ninv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.ninv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    pub fn from_mont(&self, a: u64) -> u64 {
        self.mul(a, 1)
    }
}

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &b in &BASES {
        let mut x = pow_mod(b, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The largest `count` primes below 2^63 congruent to 1 modulo `m`.
pub fn primes_one_mod(m: u64, count: usize) -> Vec<u64> {
    let top = (1u64 << 63) - 1;
    let mut p = top - (top - 1) % m;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if is_prime(p) {
            out.push(p);
        }
        p -= m;
    }
    out
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element of exact multiplicative order `n` modulo a prime p ≡ 1 (mod n).
pub fn root_of_order(n: u64, p: u64) -> u64 {
    assert_eq!((p - 1) % n, 0);
    let qs = prime_factors(n);
    (2..p)
        .map(|g| pow_mod(g, (p - 1) / n, p))
        .find(|&w| qs.iter().all(|&q| pow_mod(w, n / q, p) != 1))
        .expect("a root exists")
}

/// Solves sum_i c_i x_j^i = v_j for c (distinct nodes x_j, all mod p).
pub fn interpolate(xs: &[u64], vs: &[u64], p: u64) -> Vec<u64> {
    let d = xs.len();
    let mut m: Vec<Vec<u64>> = xs
        .iter()
        .zip(vs)
        .map(|(&x, &v)| {
            let mut row: Vec<u64> = (0..d as u64).map(|i| pow_mod(x, i, p)).collect();
            row.push(v % p);
            row
        })
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&i| m[i][col] != 0).expect("distinct nodes");
        m.swap(col, piv);
        let inv = inv_mod(m[col][col], p);
        for k in col..=d {
            m[col][k] = mul_mod(m[col][k], inv, p);
        }
        for i in 0..d {
            if i != col && m[i][col] != 0 {
                let f = m[i][col];
                for k in col..=d {
                    m[i][k] = (m[i][k] + p - mul_mod(f, m[col][k], p)) % p;
                }
            }
        }
    }
    m.into_iter().map(|row| row[d]).collect()
}
