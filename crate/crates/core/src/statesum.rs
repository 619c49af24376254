//! Turaev-Viro state sums TV_{r,s} and TV'_{r,s} over a triangulation.
//!
//! Two engines compute the same exact sum of |T|_c over admissible colorings:
//! a plain enumeration of colorings, and a frontier sweep that processes
//! tetrahedra one at a time and sums out each edge after its last tetrahedron.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::complex3::{admissible, enumerate_partition, Coloring, Triangulation, TET_FACE_SLOTS};
use crate::cyclo::{quantum_factorial, quantum_int, CycloNum};
use crate::Error;

/// Relative reality tolerance for computed invariants.
pub const REALITY_TOL: f64 = 1e-9;

fn check_level(r: u32) -> Result<(), Error> {
    if r < 3 {
        Err(Error::LevelTooSmall(r as i64))
    } else {
        Ok(())
    }
}

fn check_color(c: u8, r: u32) -> Result<(), Error> {
    if c as u32 + 2 > r {
        Err(Error::OutOfRange { what: "color", value: c as i64, r })
    } else {
        Ok(())
    }
}

/// (-1)^i [i+1].
pub fn edge_weight(i: u8, r: u32) -> Result<CycloNum, Error> {
    check_level(r)?;
    check_color(i, r)?;
    let q = quantum_int(i as u32 + 1, r)?;
    Ok(if i % 2 == 0 { q } else { -q })
}

/// (-1)^S [S-i]! [S-j]! [S-k]! / [S+1]! with S = (i+j+k)/2.
pub fn face_weight(i: u8, j: u8, k: u8, r: u32) -> Result<CycloNum, Error> {
    check_level(r)?;
    if !admissible(i, j, k, r) {
        return Err(Error::Inadmissible(format!("face ({i},{j},{k}) at r={r}")));
    }
    let s = (i as u32 + j as u32 + k as u32) / 2;
    let num = quantum_factorial(s - i as u32, r)?
        * quantum_factorial(s - j as u32, r)?
        * quantum_factorial(s - k as u32, r)?;
    let den = quantum_factorial(s + 1, r)?.inverse().expect("quantum factorials below r are units");
    let w = num * den;
    Ok(if s % 2 == 0 { w } else { -w })
}

fn tet_bounds(c: [u8; 6]) -> ([u32; 4], [u32; 3]) {
    let [i, j, k, l, m, n] = c.map(u32::from);
    (
        [(i + j + k) / 2, (i + m + n) / 2, (j + l + n) / 2, (k + l + m) / 2],
        [(i + j + l + m) / 2, (i + k + l + n) / 2, (j + k + m + n) / 2],
    )
}

fn tet_admissible(c: [u8; 6], r: u32) -> bool {
    TET_FACE_SLOTS.iter().all(|f| admissible(c[f[0]], c[f[1]], c[f[2]], r))
}

/// Tetrahedron weight for colors (i,j,k,l,m,n); i/l, j/m, k/n are opposite edges.
pub fn tet_weight(c: [u8; 6], r: u32) -> Result<CycloNum, Error> {
    check_level(r)?;
    if !tet_admissible(c, r) {
        return Err(Error::Inadmissible(format!("tetrahedron {c:?} at r={r}")));
    }
    let (t, q) = tet_bounds(c);
    let lo = *t.iter().max().unwrap();
    let hi = *q.iter().min().unwrap();
    let mut acc = CycloNum::zero(r);
    for z in lo..=hi {
        if z + 1 >= r {
            break;
        }
        let mut den = CycloNum::one(r);
        for &ta in &t {
            den = den * quantum_factorial(z - ta, r)?;
        }
        for &qb in &q {
            den = den * quantum_factorial(qb - z, r)?;
        }
        let term = quantum_factorial(z + 1, r)? * den.inverse().expect("unit");
        acc = if z % 2 == 0 { acc + term } else { acc - term };
    }
    Ok(acc)
}

/// Memoized weights at one level; one table per worker.
pub struct WeightMemo {
    r: u32,
    fact: Vec<CycloNum>,
    inv_fact: Vec<CycloNum>,
    edges: Vec<CycloNum>,
    faces: HashMap<[u8; 3], CycloNum>,
    tets: HashMap<[u8; 6], CycloNum>,
}

impl WeightMemo {
    pub fn new(r: u32) -> Result<WeightMemo, Error> {
        check_level(r)?;
        let fact: Vec<CycloNum> = (0..r).map(|n| quantum_factorial(n, r)).collect::<Result<_, _>>()?;
        let inv_fact = fact.iter().map(|f| f.inverse().expect("unit")).collect();
        let edges = (0..=(r - 2) as u8).map(|i| edge_weight(i, r)).collect::<Result<_, _>>()?;
        Ok(WeightMemo { r, fact, inv_fact, edges, faces: HashMap::new(), tets: HashMap::new() })
    }

    pub fn level(&self) -> u32 {
        self.r
    }

    pub fn edge(&self, i: u8) -> &CycloNum {
        &self.edges[i as usize]
    }

    pub fn face(&mut self, i: u8, j: u8, k: u8) -> CycloNum {
        let mut key = [i, j, k];
        key.sort_unstable();
        if let Some(w) = self.faces.get(&key) {
            return w.clone();
        }
        debug_assert!(admissible(i, j, k, self.r));
        let s = (i as usize + j as usize + k as usize) / 2;
        let w = &(&(&self.fact[s - i as usize] * &self.fact[s - j as usize]) * &self.fact[s - k as usize])
            * &self.inv_fact[s + 1];
        let w = if s % 2 == 0 { w } else { -w };
        self.faces.insert(key, w.clone());
        w
    }

    pub fn tet(&mut self, c: [u8; 6]) -> CycloNum {
        if let Some(w) = self.tets.get(&c) {
            return w.clone();
        }
        debug_assert!(tet_admissible(c, self.r));
        let (t, q) = tet_bounds(c);
        let lo = *t.iter().max().unwrap();
        let hi = *q.iter().min().unwrap();
        let mut acc = CycloNum::zero(self.r);
        for z in lo..=hi {
            if z + 1 >= self.r {
                break;
            }
            let mut term = self.fact[z as usize + 1].clone();
            for &ta in &t {
                term = &term * &self.inv_fact[(z - ta) as usize];
            }
            for &qb in &q {
                term = &term * &self.inv_fact[(qb - z) as usize];
            }
            acc = if z % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        self.tets.insert(c, acc.clone());
        acc
    }
}

pub fn weight_edge(c: &Coloring, e: usize) -> Result<CycloNum, Error> {
    edge_weight(c.colors[e], c.level_r)
}

pub fn weight_face(c: &Coloring, t: &Triangulation, f: usize) -> Result<CycloNum, Error> {
    let [a, b, d] = t.face_edges()[f];
    face_weight(c.colors[a], c.colors[b], c.colors[d], c.level_r)
}

pub fn weight_tet(c: &Coloring, t: &Triangulation, ti: usize) -> Result<CycloNum, Error> {
    tet_weight(c.tet_colors(t, ti), c.level_r)
}

/// |T|_c, the product of all edge, face and tetrahedron weights.
pub fn coloring_weight(t: &Triangulation, c: &Coloring, memo: &mut WeightMemo) -> CycloNum {
    let mut acc = CycloNum::one(memo.level());
    for &x in &c.colors {
        acc = &acc * memo.edge(x);
    }
    for f in t.face_edges() {
        acc = &acc * &memo.face(c.colors[f[0]], c.colors[f[1]], c.colors[f[2]]);
    }
    for ti in 0..t.tetrahedra().len() {
        acc = &acc * &memo.tet(c.tet_colors(t, ti));
    }
    acc
}

/// (z - z^{-1})^2 / (-2r), or / (-r) for the refined sum.
pub fn prefactor(r: u32, refined: bool) -> CycloNum {
    let d = &CycloNum::zeta_pow(r, 1) - &CycloNum::zeta_pow(r, -1);
    let scale = if refined { -(r as i64) } else { -2 * r as i64 };
    &(&d * &d) * &CycloNum::from_ratio(r, BigInt::from(1), BigInt::from(scale))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    /// Enumerate admissible colorings and add up their weights.
    Enumerate,
    /// Sweep tetrahedra, summing out edges as they close.
    #[default]
    Frontier,
}

/// Exact state sum over A_r (or A'_r) as an element of Q(q^{1/2}).
#[derive(Clone, Debug)]
pub struct ExactSum {
    pub r: u32,
    pub refined: bool,
    pub vertex_count: usize,
    pub sum: CycloNum,
    pub colorings: u128,
}

impl ExactSum {
    /// The abstract invariant: prefactor^{|V|} times the sum.
    pub fn invariant(&self) -> CycloNum {
        &prefactor(self.r, self.refined).pow(self.vertex_count as u32) * &self.sum
    }

    pub fn evaluate(&self, s: i64) -> Result<StateSumResult, Error> {
        check_s(self.r, s, self.refined)?;
        let raw = self.invariant().ev(s)?;
        StateSumResult::new(self.r, s, self.refined, raw, self.colorings)
    }
}

fn check_s(r: u32, s: i64, refined: bool) -> Result<(), Error> {
    if num_integer::Integer::gcd(&s, &(r as i64)) != 1 {
        return Err(Error::NotCoprime { s, r: r as i64 });
    }
    if refined && (r % 2 == 0 || s.rem_euclid(2) != 0) {
        return Err(Error::Hypothesis(format!("the refined invariant needs odd r and even s, got r={r}, s={s}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSumResult {
    pub r: u32,
    pub s: i64,
    pub refined: bool,
    pub value: f64,
    pub raw: Complex64,
    pub coloring_count: u128,
}

impl StateSumResult {
    fn new(r: u32, s: i64, refined: bool, raw: Complex64, colorings: u128) -> Result<StateSumResult, Error> {
        if raw.im.abs() >= REALITY_TOL * (1.0 + raw.norm()) {
            return Err(Error::Hypothesis(format!("state sum is not real: {raw}")));
        }
        Ok(StateSumResult { r, s, refined, value: raw.re, raw, coloring_count: colorings })
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "r": self.r,
            "s": self.s,
            "refined": self.refined,
            "value": self.value,
            "colorings": self.coloring_count as u64,
        })
        .to_string()
    }
}

/// Exact sum of |T|_c over A_r, or A'_r when `refined`.
pub fn state_sum(t: &Triangulation, r: u32, refined: bool, engine: Engine) -> Result<ExactSum, Error> {
    check_level(r)?;
    if refined && r % 2 == 0 {
        return Err(Error::Hypothesis(format!("the refined invariant needs odd r, got {r}")));
    }
    let (sum, colorings) = match engine {
        Engine::Enumerate => enumerate_sum(t, r, refined)?,
        Engine::Frontier => match frontier::exact(t, r, refined) {
            Ok(x) => x,
            Err(frontier::Unsupported) => enumerate_sum(t, r, refined)?,
        },
    };
    Ok(ExactSum { r, refined, vertex_count: t.vertex_count(), sum, colorings })
}

fn enumerate_sum(t: &Triangulation, r: u32, refined: bool) -> Result<(CycloNum, u128), Error> {
    let step = if refined { 2 } else { 1 };
    let firsts: Vec<u8> = (0..=(r - 2) as u8).step_by(step).collect();
    let parts: Vec<(CycloNum, u128)> = firsts
        .par_iter()
        .map(|&c0| {
            let mut memo = WeightMemo::new(r).unwrap();
            let mut acc = CycloNum::zero(r);
            let mut n = 0u128;
            for c in enumerate_partition(t, r, refined, Some(c0)).unwrap() {
                acc = &acc + &coloring_weight(t, &c, &mut memo);
                n += 1;
            }
            (acc, n)
        })
        .collect();
    let mut acc = CycloNum::zero(r);
    let mut n = 0;
    for (x, k) in parts {
        acc = &acc + &x;
        n += k;
    }
    Ok((acc, n))
}

/// TV_{r,s}(T), exact path.
pub fn tv(t: &Triangulation, r: u32, s: i64) -> Result<StateSumResult, Error> {
    check_level(r)?;
    check_s(r, s, false)?;
    state_sum(t, r, false, Engine::Frontier)?.evaluate(s)
}

/// TV'_{r,s}(T) for odd r and even s, exact path.
pub fn tv_prime(t: &Triangulation, r: u32, s: i64) -> Result<StateSumResult, Error> {
    check_level(r)?;
    check_s(r, s, true)?;
    state_sum(t, r, true, Engine::Frontier)?.evaluate(s)
}

/// Complex double-precision state sum. Integrality checks need the exact path.
pub fn tv_float(t: &Triangulation, r: u32, s: i64, refined: bool) -> Result<StateSumResult, Error> {
    check_level(r)?;
    check_s(r, s, refined)?;
    let (sum, n) = frontier::float(t, r, s, refined)?;
    let sin = (PI * s as f64 / r as f64).sin();
    let y = 4.0 * sin * sin / if refined { r as f64 } else { 2.0 * r as f64 };
    StateSumResult::new(r, s, refined, sum * y.powi(t.vertex_count() as i32), n)
}

pub mod frontier {
    use super::*;
    use crate::modp::{self, Mont};

    #[derive(Debug)]
    pub struct Unsupported;

    /// Where a tetrahedron slot's color comes from during a step.
    #[derive(Clone, Copy, Debug)]
    enum Src {
        Old(u8),
        Pin(u8),
        New(u8),
    }

    #[derive(Debug)]
    struct Step {
        slots: [Src; 6],
        new_slots: Vec<usize>,
        /// face slots to check once `q` new edges are colored
        checks: Vec<Vec<usize>>,
        new_faces: u8,
        new_edges: u8,
        keep: Vec<(u8, u8)>,
        new_pos: Vec<Option<u8>>,
    }

    #[derive(Debug)]
    pub struct Plan {
        pinned: Vec<usize>,
        steps: Vec<Step>,
        max_frontier: usize,
    }

    /// Greedy order: each next tetrahedron leaves the fewest live edges.
    pub fn tet_order(t: &Triangulation) -> Vec<usize> {
        let nt = t.tetrahedra().len();
        let ne = t.edges().len();
        let mut remaining = vec![0usize; ne];
        for ti in 0..nt {
            for e in t.tet_edges(ti) {
                remaining[e] += 1;
            }
        }
        let mut face_tets: HashMap<usize, Vec<usize>> = HashMap::new();
        for ti in 0..nt {
            for f in t.tet_faces(ti) {
                face_tets.entry(f).or_default().push(ti);
            }
        }
        let mut done = vec![false; nt];
        let mut seen = vec![false; ne];
        let mut live = 0usize;
        let mut order = Vec::with_capacity(nt);
        let mut face_seen = vec![false; t.faces().len()];
        let mut start_next = 0;
        while order.len() < nt {
            let candidates: Vec<usize> = {
                let adj: Vec<usize> = (0..nt)
                    .filter(|&ti| !done[ti] && t.tet_faces(ti).iter().any(|&f| face_seen[f]))
                    .collect();
                if adj.is_empty() {
                    while done[start_next] {
                        start_next += 1;
                    }
                    vec![start_next]
                } else {
                    adj
                }
            };
            let best = candidates
                .into_iter()
                .min_by_key(|&ti| {
                    let te = t.tet_edges(ti);
                    let mut after = live as i64;
                    for e in te {
                        if !seen[e] {
                            after += 1;
                        }
                        if remaining[e] == 1 {
                            after -= 1;
                        }
                    }
                    let shared = t.tet_faces(ti).iter().filter(|&&f| face_seen[f]).count();
                    (after, std::cmp::Reverse(shared), ti)
                })
                .unwrap();
            done[best] = true;
            for e in t.tet_edges(best) {
                if !seen[e] {
                    seen[e] = true;
                    live += 1;
                }
                remaining[e] -= 1;
                if remaining[e] == 0 {
                    live -= 1;
                }
            }
            for f in t.tet_faces(best) {
                face_seen[f] = true;
            }
            order.push(best);
        }
        order
    }

    impl Plan {
        /// `max_pins` long-lived edges are fixed per partition to bound memory.
        pub fn new(t: &Triangulation, max_pins: usize) -> Plan {
            let order = tet_order(t);
            let ne = t.edges().len();
            let mut first = vec![usize::MAX; ne];
            let mut last = vec![0; ne];
            for (p, &ti) in order.iter().enumerate() {
                for e in t.tet_edges(ti) {
                    first[e] = first[e].min(p);
                    last[e] = p;
                }
            }
            let mut by_span: Vec<usize> = (0..ne).collect();
            by_span.sort_by_key(|&e| (std::cmp::Reverse(last[e] - first[e]), e));
            let pinned: Vec<usize> = by_span
                .into_iter()
                .take(max_pins)
                .filter(|&e| 2 * (last[e] - first[e]) > order.len())
                .collect();
            let mut pin_index = vec![None; ne];
            for (k, &e) in pinned.iter().enumerate() {
                pin_index[e] = Some(k as u8);
            }

            let mut frontier: Vec<usize> = Vec::new();
            let mut seen_e = vec![false; ne];
            let mut seen_f = vec![false; t.faces().len()];
            let mut steps = Vec::with_capacity(order.len());
            let mut max_frontier = 0;
            for (p, &ti) in order.iter().enumerate() {
                let te = t.tet_edges(ti);
                let tf = t.tet_faces(ti);
                let mut slots = [Src::New(0); 6];
                let mut new_slots = Vec::new();
                let mut new_edges = 0u8;
                for (s, &e) in te.iter().enumerate() {
                    slots[s] = if let Some(k) = pin_index[e] {
                        Src::Pin(k)
                    } else if let Some(pos) = frontier.iter().position(|&x| x == e) {
                        Src::Old(pos as u8)
                    } else if let Some(q) = new_slots.iter().position(|&s2| te[s2] == e) {
                        Src::New(q as u8)
                    } else {
                        new_slots.push(s);
                        Src::New((new_slots.len() - 1) as u8)
                    };
                    if !seen_e[e] {
                        seen_e[e] = true;
                        if pin_index[e].is_none() {
                            new_edges |= 1 << s;
                        }
                    }
                }
                let mut checks = vec![Vec::new(); new_slots.len() + 1];
                let mut new_faces = 0u8;
                for (fs, &f) in tf.iter().enumerate() {
                    if seen_f[f] {
                        continue;
                    }
                    seen_f[f] = true;
                    new_faces |= 1 << fs;
                    let q = TET_FACE_SLOTS[fs]
                        .iter()
                        .map(|&s| match slots[s] {
                            Src::New(q) => q as usize + 1,
                            _ => 0,
                        })
                        .max()
                        .unwrap();
                    checks[q].push(fs);
                }
                let mut next: Vec<usize> = Vec::new();
                let mut keep = Vec::new();
                for (pos, &e) in frontier.iter().enumerate() {
                    if last[e] != p {
                        keep.push((pos as u8, next.len() as u8));
                        next.push(e);
                    }
                }
                let mut new_pos = Vec::new();
                for &s in &new_slots {
                    let e = te[s];
                    if last[e] != p {
                        new_pos.push(Some(next.len() as u8));
                        next.push(e);
                    } else {
                        new_pos.push(None);
                    }
                }
                max_frontier = max_frontier.max(frontier.len() + new_slots.len());
                frontier = next;
                steps.push(Step { slots, new_slots, checks, new_faces, new_edges, keep, new_pos });
            }
            debug_assert!(frontier.is_empty());
            Plan { pinned, steps, max_frontier }
        }

        pub fn max_frontier(&self) -> usize {
            self.max_frontier
        }

        pub fn pinned(&self) -> &[usize] {
            &self.pinned
        }
    }

    /// Additive/multiplicative structure carried through the sweep.
    pub trait Value: Clone + Send + Sync {
        type Ctx: Sync;
        fn zero(ctx: &Self::Ctx) -> Self;
        /// acc += a * b; false on overflow.
        fn mul_add(acc: &mut Self, a: &Self, b: &Self, ctx: &Self::Ctx) -> bool;
        fn add(acc: &mut Self, a: &Self, ctx: &Self::Ctx) -> bool;
    }

    impl Value for CycloNum {
        type Ctx = u32;
        fn zero(r: &u32) -> Self {
            CycloNum::zero(*r)
        }
        fn mul_add(acc: &mut Self, a: &Self, b: &Self, _: &u32) -> bool {
            *acc = &*acc + &(a * b);
            true
        }
        fn add(acc: &mut Self, a: &Self, _: &u32) -> bool {
            *acc = &*acc + a;
            true
        }
    }

    impl Value for Complex64 {
        type Ctx = ();
        fn zero(_: &()) -> Self {
            Complex64::new(0.0, 0.0)
        }
        fn mul_add(acc: &mut Self, a: &Self, b: &Self, _: &()) -> bool {
            *acc += a * b;
            true
        }
        fn add(acc: &mut Self, a: &Self, _: &()) -> bool {
            *acc += a;
            true
        }
    }

    /// Evaluations of an integral element at every complex embedding modulo
    /// a word-size prime; lane arithmetic is pointwise.
    #[derive(Clone, Copy, Debug)]
    pub struct Lanes<const K: usize>([u64; K]);

    /// Lane layout: for each cyclotomic component, its primitive roots mod p.
    pub struct LaneCtx {
        mont: Mont,
        comps: Vec<u32>,
        nodes: Vec<Vec<u64>>,
    }

    impl<const K: usize> Value for Lanes<K> {
        type Ctx = LaneCtx;
        fn zero(_: &LaneCtx) -> Self {
            Lanes([0; K])
        }
        #[inline]
        fn mul_add(acc: &mut Self, a: &Self, b: &Self, ctx: &LaneCtx) -> bool {
            let m = &ctx.mont;
            for k in 0..K {
                acc.0[k] = m.add(acc.0[k], m.mul(a.0[k], b.0[k]));
            }
            true
        }
        fn add(acc: &mut Self, a: &Self, ctx: &LaneCtx) -> bool {
            for k in 0..K {
                acc.0[k] = ctx.mont.add(acc.0[k], a.0[k]);
            }
            true
        }
    }

    fn components(r: u32) -> Vec<u32> {
        if r % 2 == 1 {
            vec![2 * r, r]
        } else {
            vec![2 * r]
        }
    }

    fn lane_ctx(r: u32, p: u64) -> LaneCtx {
        let comps = components(r);
        let nodes = comps
            .iter()
            .map(|&n| {
                let w = modp::root_of_order(n as u64, p);
                (1..n)
                    .filter(|&k| num_integer::gcd(k, n) == 1)
                    .map(|k| modp::pow_mod(w, k as u64, p))
                    .collect()
            })
            .collect();
        LaneCtx { mont: Mont::new(p), comps, nodes }
    }

    fn lane_count(r: u32) -> usize {
        components(r).iter().map(|&n| (1..n).filter(|&k| num_integer::gcd(k, n) == 1).count()).sum()
    }

    fn to_lanes<const K: usize>(x: &CycloNum, ctx: &LaneCtx) -> Option<Lanes<K>> {
        let p = ctx.mont.p;
        let big_p = BigInt::from(p);
        let mut out = [0u64; K];
        let mut k = 0;
        for (ci, &n) in ctx.comps.iter().enumerate() {
            let coeffs: Vec<u64> = x
                .residue_integral(n)?
                .iter()
                .map(|c| {
                    let v = c % &big_p;
                    (if v.sign() == num_bigint::Sign::Minus { v + &big_p } else { v }).to_u64().unwrap()
                })
                .collect();
            for &x in &ctx.nodes[ci] {
                let acc = coeffs.iter().rev().fold(0u64, |acc, &c| (modp::mul_mod(acc, x, p) + c) % p);
                out[k] = ctx.mont.to_mont(acc);
                k += 1;
            }
        }
        Some(Lanes(out))
    }

    /// Power-basis residues of each component modulo p.
    fn lane_residues<const K: usize>(v: &Lanes<K>, ctx: &LaneCtx) -> Vec<Vec<u64>> {
        let mut k = 0;
        ctx.nodes
            .iter()
            .map(|xs| {
                let vals: Vec<u64> = (0..xs.len()).map(|j| ctx.mont.from_mont(v.0[k + j])).collect();
                k += xs.len();
                modp::interpolate(xs, &vals, ctx.mont.p)
            })
            .collect()
    }

    /// Accumulates residues by CRT; a lift is accepted once every coefficient
    /// is below the modulus by a margin of 2^11.
    pub(crate) struct Crt {
        modulus: BigInt,
        coeffs: Vec<Vec<BigInt>>,
    }

    impl Crt {
        pub(crate) fn empty() -> Crt {
            Crt { modulus: BigInt::from(1), coeffs: Vec::new() }
        }

        pub(crate) fn absorb(&mut self, res: &[Vec<u64>], p: u64) {
            let bp = BigInt::from(p);
            if self.coeffs.is_empty() {
                self.coeffs = res.iter().map(|c| c.iter().map(|&x| BigInt::from(x)).collect()).collect();
                self.modulus = bp;
                return;
            }
            let m_mod_p = (&self.modulus % &bp).to_u64().unwrap();
            let inv = BigInt::from(modp::inv_mod(m_mod_p, p));
            for (cs, rs) in self.coeffs.iter_mut().zip(res) {
                for (c, &x) in cs.iter_mut().zip(rs) {
                    let t = ((BigInt::from(x) - &*c) % &bp + &bp) % &bp * &inv % &bp;
                    *c += &self.modulus * t;
                }
            }
            self.modulus *= bp;
        }

        pub(crate) fn lift(&self) -> Option<Vec<Vec<BigInt>>> {
            let half = &self.modulus / 2;
            let bound: BigInt = &self.modulus >> 11usize;
            let mut out = Vec::new();
            for cs in &self.coeffs {
                let mut v = Vec::new();
                for c in cs {
                    let x = if c > &half { c - &self.modulus } else { c.clone() };
                    if x.magnitude() > bound.magnitude() {
                        return None;
                    }
                    v.push(x);
                }
                out.push(v);
            }
            Some(out)
        }
    }

    const MAX_PRIMES: usize = 6;

    /// Local weights per step pattern, indexed by the base-(r-1) code of the six colors.
    struct Tables<V> {
        by_pattern: HashMap<(u8, u8), Vec<Option<V>>>,
        pinned_edges: Vec<V>,
        one: V,
    }

    fn exact_tables(plan: &Plan, r: u32, refined: bool) -> Tables<CycloNum> {
        let nc = (r - 1) as usize;
        let mut memo = WeightMemo::new(r).unwrap();
        let values: Vec<u8> = color_values(r, refined);
        let mut by_pattern = HashMap::new();
        for st in &plan.steps {
            let key = (st.new_faces, st.new_edges);
            if by_pattern.contains_key(&key) {
                continue;
            }
            let mut table = vec![None; nc.pow(6)];
            for code in 0..values.len().pow(6) {
                let mut c = [0u8; 6];
                let mut x = code;
                for slot in c.iter_mut() {
                    *slot = values[x % values.len()];
                    x /= values.len();
                }
                if !tet_admissible(c, r) {
                    continue;
                }
                let mut w = memo.tet(c);
                for (fs, f) in TET_FACE_SLOTS.iter().enumerate() {
                    if st.new_faces & (1 << fs) != 0 {
                        w = &w * &memo.face(c[f[0]], c[f[1]], c[f[2]]);
                    }
                }
                for (s, &col) in c.iter().enumerate() {
                    if st.new_edges & (1 << s) != 0 {
                        w = &w * memo.edge(col);
                    }
                }
                table[index(&c, nc)] = Some(w);
            }
            by_pattern.insert(key, table);
        }
        let pinned_edges = (0..=(r - 2) as u8).map(|i| memo.edge(i).clone()).collect();
        Tables { by_pattern, pinned_edges, one: CycloNum::one(r) }
    }

    fn map_tables<V, F: Fn(&CycloNum) -> Option<V>>(tables: &Tables<CycloNum>, f: F) -> Option<Tables<V>> {
        let mut by_pattern = HashMap::new();
        for (k, tab) in &tables.by_pattern {
            let mut out = Vec::with_capacity(tab.len());
            for w in tab {
                out.push(match w {
                    Some(w) => Some(f(w)?),
                    None => None,
                });
            }
            by_pattern.insert(*k, out);
        }
        let pinned_edges = tables.pinned_edges.iter().map(&f).collect::<Option<_>>()?;
        Some(Tables { by_pattern, pinned_edges, one: f(&tables.one)? })
    }

    fn color_values(r: u32, refined: bool) -> Vec<u8> {
        (0..=(r - 2) as u8).step_by(if refined { 2 } else { 1 }).collect()
    }

    #[inline]
    fn index(c: &[u8; 6], nc: usize) -> usize {
        c.iter().rev().fold(0, |acc, &x| acc * nc + x as usize)
    }

    fn bits_for(r: u32) -> u32 {
        32 - (r - 2).leading_zeros().min(31)
    }

    /// Memory allowed for the two live state maps of one sweep.
    const MEMORY_BUDGET: usize = 2 << 30;

    fn state_cap<V>(heap: usize) -> usize {
        let entry = 2 * std::mem::size_of::<(u128, u32)>() + 32 + std::mem::size_of::<V>() + heap;
        (MEMORY_BUDGET / (3 * entry)).min(u32::MAX as usize)
    }

    /// Pinned-edge color assignments consistent with faces spanned by pinned edges.
    fn pin_assignments(t: &Triangulation, plan: &Plan, r: u32, refined: bool) -> Vec<Vec<u8>> {
        let values = color_values(r, refined);
        let mut pin_of = HashMap::new();
        for (k, &e) in plan.pinned.iter().enumerate() {
            pin_of.insert(e, k);
        }
        let faces: Vec<[usize; 3]> = t
            .face_edges()
            .iter()
            .filter_map(|f| {
                let a = *pin_of.get(&f[0])?;
                let b = *pin_of.get(&f[1])?;
                let c = *pin_of.get(&f[2])?;
                Some([a, b, c])
            })
            .collect();
        let mut out = vec![Vec::new()];
        for k in 0..plan.pinned.len() {
            let mut next = Vec::new();
            for partial in out {
                for &v in &values {
                    let mut p: Vec<u8> = partial.clone();
                    p.push(v);
                    let ok = faces.iter().all(|f| {
                        if f.iter().all(|&x| x <= k) {
                            admissible(p[f[0]], p[f[1]], p[f[2]], r)
                        } else {
                            true
                        }
                    });
                    if ok {
                        next.push(p);
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Frontier states: a key index over dense value and count columns.
    struct StateBuf<V> {
        index: FxHashMap<u128, u32>,
        keys: Vec<u128>,
        vals: Vec<V>,
        counts: Vec<u128>,
    }

    impl<V: Value> StateBuf<V> {
        fn new() -> Self {
            StateBuf { index: FxHashMap::default(), keys: Vec::new(), vals: Vec::new(), counts: Vec::new() }
        }

        fn clear(&mut self) {
            self.index.clear();
            self.keys.clear();
            self.vals.clear();
            self.counts.clear();
        }

        fn push(&mut self, key: u128, v: V, count: u128) {
            self.index.insert(key, self.keys.len() as u32);
            self.keys.push(key);
            self.vals.push(v);
            self.counts.push(count);
        }

        #[inline]
        fn slot(&mut self, key: u128, ctx: &V::Ctx) -> usize {
            let n = self.keys.len();
            let j = *self.index.entry(key).or_insert(n as u32) as usize;
            if j == n {
                self.keys.push(key);
                self.vals.push(V::zero(ctx));
                self.counts.push(0);
            }
            j
        }
    }

    enum Abort {
        Overflow,
        Memory,
    }

    struct Job<'a, V: Value> {
        plan: &'a Plan,
        tables: &'a Tables<V>,
        r: u32,
        refined: bool,
        ctx: &'a V::Ctx,
        cap: usize,
    }

    /// For every coloring of a step's old slots (mixed-radix code), the admissible
    /// colorings of its new slots as (frontier bits, weight table index).
    fn extensions<V>(
        st: &Step,
        old: &[(usize, u8)],
        pins: &[u8],
        values: &[u8],
        table: &[Option<V>],
        r: u32,
        b: u32,
    ) -> Vec<Vec<(u128, u32)>> {
        let nc = (r - 1) as usize;
        let n = st.new_slots.len();
        let check = |c: &[u8; 6], q: usize| {
            st.checks[q].iter().all(|&fs| {
                let f = TET_FACE_SLOTS[fs];
                admissible(c[f[0]], c[f[1]], c[f[2]], r)
            })
        };
        let mut out = vec![Vec::new(); nc.pow(old.len() as u32)];
        for (code, list) in out.iter_mut().enumerate() {
            let mut c = [0u8; 6];
            let mut x = code;
            for &(s, _) in old {
                c[s] = (x % nc) as u8;
                x /= nc;
            }
            for s in 0..6 {
                if let Src::Pin(k) = st.slots[s] {
                    c[s] = pins[k as usize];
                }
            }
            if !old.iter().all(|&(s, _)| values.contains(&c[s])) || !check(&c, 0) {
                continue;
            }
            let mut vi = [0usize; 7];
            let mut q = 0usize;
            loop {
                if q == n {
                    let ti = index(&c, nc);
                    if table[ti].is_some() {
                        let mut bits = 0u128;
                        for (qq, &s) in st.new_slots.iter().enumerate() {
                            if let Some(pos) = st.new_pos[qq] {
                                bits |= (c[s] as u128) << (pos as u32 * b);
                            }
                        }
                        list.push((bits, ti as u32));
                    }
                    if n == 0 {
                        break;
                    }
                    q -= 1;
                    continue;
                }
                if vi[q] < values.len() {
                    c[st.new_slots[q]] = values[vi[q]];
                    vi[q] += 1;
                    if check(&c, q + 1) {
                        q += 1;
                        if q < n {
                            vi[q] = 0;
                        }
                    }
                } else if q == 0 {
                    break;
                } else {
                    q -= 1;
                }
            }
        }
        out
    }

    /// Sweep one partition, returning the weighted sum and the coloring count.
    fn sweep<V: Value>(job: &Job<V>, pins: &[u8]) -> Result<(V, u128), Abort> {
        let (plan, tables, r, ctx) = (job.plan, job.tables, job.r, job.ctx);
        let nc = (r - 1) as usize;
        let b = bits_for(r);
        let mask: u128 = (1u128 << b) - 1;
        let values = color_values(r, job.refined);
        let mut init = tables.one.clone();
        for &c in pins {
            let mut acc = V::zero(ctx);
            if !V::mul_add(&mut acc, &init, &tables.pinned_edges[c as usize], ctx) {
                return Err(Abort::Overflow);
            }
            init = acc;
        }
        let mut state = StateBuf::new();
        let mut next = StateBuf::new();
        state.push(0, init, 1);
        for st in &plan.steps {
            let table = &tables.by_pattern[&(st.new_faces, st.new_edges)];
            next.clear();
            let old: Vec<(usize, u8)> = (0..6)
                .filter_map(|s| match st.slots[s] {
                    Src::Old(pos) => Some((s, pos)),
                    _ => None,
                })
                .collect();
            let ext = extensions(st, &old, pins, &values, table, r, b);
            for i in 0..state.keys.len() {
                let key = state.keys[i];
                let mut code = 0usize;
                for &(_, pos) in old.iter().rev() {
                    code = code * nc + ((key >> (pos as u32 * b)) & mask) as usize;
                }
                let list = &ext[code];
                if list.is_empty() {
                    continue;
                }
                let mut base: u128 = 0;
                for &(from, to) in &st.keep {
                    base |= ((key >> (from as u32 * b)) & mask) << (to as u32 * b);
                }
                for &(bits, ti) in list {
                    let j = next.slot(base | bits, ctx);
                    let w = table[ti as usize].as_ref().unwrap();
                    if !V::mul_add(&mut next.vals[j], &state.vals[i], w, ctx) {
                        return Err(Abort::Overflow);
                    }
                    next.counts[j] += state.counts[i];
                }
                if next.keys.len() > job.cap {
                    return Err(Abort::Memory);
                }
            }
            std::mem::swap(&mut state, &mut next);
        }
        match state.index.get(&0) {
            Some(&j) => Ok((state.vals[j as usize].clone(), state.counts[j as usize])),
            None => Ok((V::zero(ctx), 0)),
        }
    }

    fn run<V: Value>(job: &Job<V>, partitions: &[Vec<u8>]) -> Result<(V, u128), Abort> {
        let parts: Vec<Result<(V, u128), Abort>> = partitions.par_iter().map(|pins| sweep(job, pins)).collect();
        let mut acc = V::zero(job.ctx);
        let mut n = 0;
        for p in parts {
            let (v, k) = p?;
            if !V::add(&mut acc, &v, job.ctx) {
                return Err(Abort::Overflow);
            }
            n += k;
        }
        Ok((acc, n))
    }

    fn check_width(t: &Triangulation, r: u32) -> Result<(), Unsupported> {
        let width = Plan::new(t, 0).max_frontier() as u32 * bits_for(r);
        if width > 128 || r > 255 {
            return Err(Unsupported);
        }
        Ok(())
    }

    /// Runs the sweep, pinning more edges whenever the state outgrows the memory budget.
    fn adaptive<V: Value, F: Fn(&Tables<CycloNum>) -> Option<Tables<V>>>(
        t: &Triangulation,
        r: u32,
        refined: bool,
        ctx: &V::Ctx,
        heap: usize,
        convert: F,
    ) -> Option<(V, u128)> {
        let mut pins = 0;
        loop {
            let plan = Plan::new(t, pins);
            let more = Plan::new(t, pins + 1).pinned().len() > plan.pinned().len();
            let parts = pin_assignments(t, &plan, r, refined);
            let tables = convert(&exact_tables(&plan, r, refined))?;
            let cap = if more { state_cap::<V>(heap) } else { usize::MAX };
            let job = Job { plan: &plan, tables: &tables, r, refined, ctx, cap };
            match run(&job, &parts) {
                Ok(v) => return Some(v),
                Err(Abort::Overflow) => return None,
                Err(Abort::Memory) => pins += 1,
            }
        }
    }

    fn lanes_exact<const K: usize>(t: &Triangulation, r: u32, refined: bool) -> Option<(CycloNum, u128)> {
        let mut crt = Crt::empty();
        for p in modp::primes_one_mod(2 * r as u64, MAX_PRIMES) {
            let ctx = lane_ctx(r, p);
            let (v, n) =
                adaptive::<Lanes<K>, _>(t, r, refined, &ctx, 0, |tab| map_tables(tab, |w| to_lanes(w, &ctx)))?;
            crt.absorb(&lane_residues(&v, &ctx), p);
            if let Some(res) = crt.lift() {
                return Some((CycloNum::from_residues(r, &res[0], res.get(1).map(|v| v.as_slice())), n));
            }
        }
        None
    }

    pub fn exact(t: &Triangulation, r: u32, refined: bool) -> Result<(CycloNum, u128), Unsupported> {
        check_width(t, r)?;
        let fast = match lane_count(r) {
            2 => lanes_exact::<2>(t, r, refined),
            4 => lanes_exact::<4>(t, r, refined),
            8 => lanes_exact::<8>(t, r, refined),
            12 => lanes_exact::<12>(t, r, refined),
            16 => lanes_exact::<16>(t, r, refined),
            20 => lanes_exact::<20>(t, r, refined),
            24 => lanes_exact::<24>(t, r, refined),
            32 => lanes_exact::<32>(t, r, refined),
            _ => None,
        };
        if let Some(v) = fast {
            return Ok(v);
        }
        let heap = 48 * crate::cyclo::field(r).modulus.len();
        Ok(adaptive::<CycloNum, _>(t, r, refined, &r, heap, |tab| map_tables(tab, |w| Some(w.clone())))
            .expect("exact arithmetic cannot overflow"))
    }

    pub fn float(t: &Triangulation, r: u32, s: i64, refined: bool) -> Result<(Complex64, u128), Error> {
        check_width(t, r).map_err(|_| Error::Hypothesis("triangulation too wide for the sweep".into()))?;
        adaptive::<Complex64, _>(t, r, refined, &(), 0, |tab| map_tables(tab, |w| w.ev(s).ok()))
            .ok_or(Error::NotCoprime { s, r: r as i64 })
    }

    /// Maximum frontier width of the unpinned sweep.
    pub fn plan_width(t: &Triangulation) -> usize {
        Plan::new(t, 0).max_frontier()
    }

    pub fn exact_with_pins(t: &Triangulation, r: u32, refined: bool, pins: usize) -> (CycloNum, u128) {
        let plan = Plan::new(t, pins);
        let parts = pin_assignments(t, &plan, r, refined);
        let tables = exact_tables(&plan, r, refined);
        let job = Job { plan: &plan, tables: &tables, r, refined, ctx: &r, cap: usize::MAX };
        run(&job, &parts).ok().unwrap()
    }
}

pub use frontier::plan_width;
