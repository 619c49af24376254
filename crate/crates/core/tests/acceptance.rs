//! Acceptance report: one PASS/FAIL line per criterion, with independent oracles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quantum3::complex3::{
    count_admissible, enumerate_admissible, load_triangulation, normal_surface_euler_parity, split_coloring,
    Triangulation,
};
use quantum3::hempel::{report, Status, Verdict};
use quantum3::seifert::{dedekind_sum, hansen_ratio, SeifertSymbol};
use quantum3::statesum::{coloring_weight, state_sum, Engine, ExactSum, WeightMemo};

fn asset(name: &str) -> Triangulation {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(name);
    load_triangulation(std::fs::File::open(p).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn ev(sum: &ExactSum, s: i64) -> f64 {
    sum.evaluate(s).unwrap().value
}

fn units(r: u32) -> Vec<i64> {
    (1..r as i64).filter(|s| s.gcd(&(r as i64)) == 1).collect()
}

fn sym(text: &str) -> SeifertSymbol {
    text.parse().unwrap()
}

/// Closed-form value at r = a, s = 1, with b* found by direct search; None if no b* exists.
fn uniform_closed_form(g: u32, a: i64, bs: &[i64]) -> Option<f64> {
    let b_star = (1..a).filter(|x| x.gcd(&a) == 1).find(|x| {
        bs.iter().all(|b| {
            let v = (x * b).rem_euclid(a);
            v == 1 || v == a - 1
        })
    })?;
    let (n, g) = (bs.len() as i32, g as i32);
    Some(
        (a as f64).powi(n + 2 * g - 2)
            / 2f64.powi(2 * n + 2 * g - 4)
            / (PI * b_star as f64 / a as f64).sin().powi(2 * n + 4 * g - 4),
    )
}

fn c1() -> (bool, String) {
    let start = Instant::now();
    let t = asset("s3_boundary4simplex.json");
    let mut worst = 0f64;
    for r in 3..=7 {
        let v = ev(&state_sum(&t, r, false, Engine::Frontier).unwrap(), 1);
        worst = worst.max(rel(v, 2.0 / r as f64 * (PI / r as f64).sin().powi(2)));
    }
    for r in [5u32, 7] {
        let v = ev(&state_sum(&t, r, true, Engine::Frontier).unwrap(), r as i64 - 1);
        worst = worst.max(rel(v, 4.0 / r as f64 * (PI / r as f64).sin().powi(2)));
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < 1e-9 && secs < 60.0, format!("max rel err {worst:.2e}, {secs:.1}s"))
}

fn c2() -> (bool, String) {
    let t = asset("s2xs1.json");
    let worst = (3..=5)
        .map(|r| rel(ev(&state_sum(&t, r, false, Engine::Frontier).unwrap(), 1), 1.0))
        .fold(0f64, f64::max);
    (worst < 1e-8, format!("max rel err {worst:.2e}"))
}

fn c3() -> (bool, String) {
    let mut worst = 0f64;
    let mut n = 0;
    for name in ["s3_boundary4simplex.json", "s2xs1.json"] {
        let t = asset(name);
        let three = state_sum(&t, 3, false, Engine::Frontier).unwrap();
        for r in [5u32, 7] {
            let full = state_sum(&t, r, false, Engine::Frontier).unwrap();
            let prime = state_sum(&t, r, true, Engine::Frontier).unwrap();
            for s in units(r) {
                let rhs = if s % 2 == 0 {
                    ev(&three, 2) * ev(&prime, s)
                } else {
                    ev(&three, 1) * ev(&prime, r as i64 - s)
                };
                worst = worst.max(rel(ev(&full, s), rhs));
                n += 1;
            }
        }
    }
    (worst < 1e-9, format!("{n} identities, max rel err {worst:.2e}"))
}

fn c4() -> (bool, String) {
    let t = asset("s3_boundary4simplex.json");
    let mut memo = WeightMemo::new(5).unwrap();
    let (mut bad, mut total) = (0, 0);
    for c in enumerate_admissible(&t, 5, false).unwrap() {
        let w = coloring_weight(&t, &c, &mut memo);
        let (c3, _) = split_coloring(&c).unwrap();
        let sign = if normal_surface_euler_parity(&t, &c3).unwrap() == 0 { 1.0 } else { -1.0 };
        let (a, b) = (w.ev(1).unwrap(), w.ev(4).unwrap());
        if (a - b * sign).norm() > 1e-10 * (1.0 + a.norm()) {
            bad += 1;
        }
        total += 1;
    }
    (bad == 0, format!("{bad} of {total} colorings violate the law"))
}

fn c5() -> (bool, String) {
    let mut failed = Vec::new();
    let mut n = 0;
    for a in [5i64, 7] {
        for g in [0u32, 1] {
            for k in [0usize, 2, 4] {
                let bs: Vec<i64> = (0..k).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect();
                let s = SeifertSymbol::new(g, bs.iter().map(|&b| (a, b)).collect()).unwrap();
                let h = hansen_ratio(&s, a as u32).unwrap().norm_sqr();
                let want = uniform_closed_form(g, a, &bs).unwrap();
                n += 1;
                if (h - want).abs() > 1e-8 * want.abs().max(h.abs()) {
                    failed.push(format!("({s}) hansen={h:.6} closed={want:.6}"));
                }
            }
        }
    }
    let detail = if failed.is_empty() {
        format!("{n} symbols agree")
    } else {
        format!("{} of {n} symbols disagree: {}", failed.len(), failed.join("; "))
    };
    (failed.is_empty(), detail)
}

fn c6() -> (bool, String) {
    let mut worst = 0f64;
    for (text, a) in [("0; 5/1, 5/1, 5/-2", 5u32), ("0; 7/1, 7/1, 7/1, 7/-3", 7)] {
        for r in [a, 2 * a] {
            worst = worst.max(hansen_ratio(&sym(text), r).unwrap().norm());
        }
    }
    (worst < 1e-9, format!("max |ratio| {worst:.2e}"))
}

fn c7() -> (bool, String) {
    let rep = report(&sym("0; 7/1, 7/1, 7/-1, 7/-1"), 2, 7, 1e-8).unwrap();
    let row = rep.rows.iter().find(|x| x.r == 7 && x.s == 1 && !x.refined).unwrap();
    let (va, vb) = (row.value_a.unwrap(), row.value_b.unwrap());
    let oracle_a = uniform_closed_form(0, 7, &[1, 1, -1, -1]).unwrap();
    let oracle_b = uniform_closed_form(0, 7, &[4, 4, -4, -4]).unwrap();
    let ratio = (2.0 * PI / 7.0).sin().powi(4) / (PI / 7.0).sin().powi(4);
    let ok = matches!(rep.verdict, Verdict::Distinguishable { .. })
        && rel(va, oracle_a) < 1e-8
        && rel(vb, oracle_b) < 1e-8
        && (va - 86.409).abs() / 86.409 < 1e-4
        && (vb - 8.197).abs() / 8.197 < 1e-4
        && (va / vb - ratio).abs() < 1e-8 * ratio;
    (ok, format!("{:?}: A={va:.6} B={vb:.6} A/B={:.10} want {ratio:.10}", rep.verdict, va / vb))
}

fn c8() -> (bool, String) {
    let rep = report(&sym("0; 5/1, 5/1, 5/-2"), 2, 12, 1e-8).unwrap();
    let mut ok = matches!(rep.verdict, Verdict::IndistinguishableUpTo(12));
    for x in &rep.rows {
        if x.status == Status::OutOfScope {
            ok = false;
            continue;
        }
        let (a, b) = (x.value_a.unwrap(), x.value_b.unwrap());
        ok &= rel(a, b) < 1e-8;
        if x.r % 5 == 0 {
            ok &= a == 0.0 && b == 0.0;
        } else {
            ok &= (a - a.round()).abs() < 1e-6 && (b - b.round()).abs() < 1e-6;
        }
    }
    (ok, format!("{:?}, {} rows", rep.verdict, rep.rows.len()))
}

fn cot_sum(b: i64, a: i64) -> f64 {
    (1..a)
        .map(|l| 1.0 / ((PI * l as f64 / a as f64).tan() * (PI * (l * b).rem_euclid(a) as f64 / a as f64).tan()))
        .sum::<f64>()
        / (4 * a) as f64
}

fn c9() -> (bool, String) {
    let mut rng = StdRng::seed_from_u64(2024);
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let (mut worst, mut exact_ok, mut n) = (0f64, true, 0);
    while n < 200 {
        let (a, b) = (rng.gen_range(1..=5000i64), rng.gen_range(1..=5000i64));
        if a.gcd(&b) != 1 {
            continue;
        }
        n += 1;
        let sab = dedekind_sum(b, a).unwrap();
        worst = worst.max((sab.to_f64().unwrap() - cot_sum(b, a)).abs());
        exact_ok &= sab + dedekind_sum(a, b).unwrap() == (q(a, b) + q(b, a) + q(1, a * b)) / q(12, 1) - q(1, 4);
    }
    (worst < 1e-9 && exact_ok, format!("max abs err {worst:.2e}, reciprocity exact: {exact_ok}"))
}

fn brute_force(t: &Triangulation, r: u32) -> u64 {
    let n = t.edges().len();
    let index: HashMap<[usize; 2], usize> = t.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let faces: Vec<[usize; 3]> = t
        .faces()
        .iter()
        .map(|f| [index[&[f[0], f[1]]], index[&[f[1], f[2]]], index[&[f[0], f[2]]]])
        .collect();
    let base = (r - 1) as u64;
    (0..base.pow(n as u32))
        .filter(|&code| {
            let mut x = code;
            let c: Vec<u32> = (0..n)
                .map(|_| {
                    let v = (x % base) as u32;
                    x /= base;
                    v
                })
                .collect();
            faces.iter().all(|f| {
                let (i, j, k) = (c[f[0]], c[f[1]], c[f[2]]);
                (i + j + k) % 2 == 0 && i <= j + k && j <= i + k && k <= i + j && i + j + k <= 2 * r - 4
            })
        })
        .count() as u64
}

fn c10() -> (bool, String) {
    let t = asset("s3_boundary4simplex.json");
    let mut ok = true;
    let mut parts = Vec::new();
    for r in 3..=5 {
        let (fast, slow) = (count_admissible(&t, r, false).unwrap(), brute_force(&t, r));
        ok &= fast == slow;
        parts.push(format!("|A_{r}|={fast}/{slow}"));
    }
    let three = count_admissible(&t, 3, false).unwrap();
    for r in [5, 7] {
        let (full, prime) = (count_admissible(&t, r, false).unwrap(), count_admissible(&t, r, true).unwrap());
        ok &= full == three * prime;
        parts.push(format!("{full}={three}x{prime}"));
    }
    (ok, parts.join(" "))
}

fn main() {
    let criteria: [(&str, fn() -> (bool, String)); 10] = [
        ("S3 anchor", c1),
        ("S2xS1 anchor", c2),
        ("splitting", c3),
        ("sign change", c4),
        ("hansen vs closed form", c5),
        ("vanishing", c6),
        ("distinguishable pair", c7),
        ("indistinguishable pair", c8),
        ("dedekind sums", c9),
        ("enumeration", c10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f();
        failures += usize::from(!pass);
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
}
