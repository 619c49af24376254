//! Named verification suites, each a list of checked properties.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::complex3::{
    count_admissible, enumerate_admissible, Coloring, load_triangulation, normal_surface_euler_parity, split_coloring,
    Triangulation,
};
use crate::hempel::{iterate, report, Status, Verdict};
use crate::seifert::{dedekind_sum, hansen_ratio, tv_closed_form, tv_seifert, ClosedForm, SeifertSymbol};
use crate::statesum::{coloring_weight, state_sum, Engine, ExactSum, WeightMemo};
use crate::Error;

pub const SUITES: [&str; 7] =
    ["splitting", "hansen-vs-statesum", "vanishing", "sign-change", "dedekind", "hempel-examples", "enumeration"];

pub const S3_ASSET: &str = "s3_boundary4simplex.json";
pub const S2XS1_ASSET: &str = "s2xs1.json";

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub tol: f64,
    pub r: Option<u32>,
    pub file: Option<PathBuf>,
    pub assets: PathBuf,
}

/// Asset directory: $QUANTUM3_ASSETS, else the repository's `assets/`.
pub fn asset_dir() -> PathBuf {
    std::env::var_os("QUANTUM3_ASSETS")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets"))
}

/// Opens `path` as given, or relative to the asset directory.
pub fn load(path: &Path, assets: &Path) -> Result<Triangulation, Error> {
    let found = if path.exists() {
        path.to_path_buf()
    } else {
        let by_name = assets.join(path.file_name().unwrap_or(path.as_os_str()));
        if by_name.exists() {
            by_name
        } else {
            path.to_path_buf()
        }
    };
    load_triangulation(std::fs::File::open(found)?)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn value(sum: &ExactSum, s: i64) -> Result<f64, Error> {
    Ok(sum.evaluate(s)?.value)
}

fn coprime(r: u32) -> impl Iterator<Item = i64> {
    (1..r as i64).filter(move |s| s.gcd(&(r as i64)) == 1)
}

fn triangulations(opts: &Options) -> Result<Vec<(String, Triangulation)>, Error> {
    match &opts.file {
        Some(f) => Ok(vec![(f.display().to_string(), load(f, &opts.assets)?)]),
        None => [S3_ASSET, S2XS1_ASSET]
            .iter()
            .map(|n| Ok((n.to_string(), load(Path::new(n), &opts.assets)?)))
            .collect(),
    }
}

/// TV_{r,s} = TV_{3,2}·TV'_{r,s} (s even) and TV_{3,1}·TV'_{r,r−s} (s odd).
pub fn splitting(opts: &Options) -> Result<Vec<Check>, Error> {
    let levels = opts.r.map(|r| vec![r]).unwrap_or(vec![5, 7]);
    let mut out = Vec::new();
    for (name, t) in triangulations(opts)? {
        let three = state_sum(&t, 3, false, Engine::Frontier)?;
        let (t31, t32) = (value(&three, 1)?, value(&three, 2)?);
        for &r in &levels {
            if r % 2 == 0 {
                out.push(Check::new(format!("splitting {name} r={r}"), false, "splitting needs odd r"));
                continue;
            }
            let full = state_sum(&t, r, false, Engine::Frontier)?;
            let prime = state_sum(&t, r, true, Engine::Frontier)?;
            for s in coprime(r) {
                let lhs = value(&full, s)?;
                let rhs = if s % 2 == 0 { t32 * value(&prime, s)? } else { t31 * value(&prime, r as i64 - s)? };
                out.push(Check::new(
                    format!("splitting {name} r={r} s={s}"),
                    rel_close(lhs, rhs, opts.tol),
                    format!("TV={lhs:.12} product={rhs:.12}"),
                ));
            }
        }
    }
    Ok(out)
}

/// State sums against the S³ and S²×S¹ anchors and Hansen's formula, and
/// Hansen's formula against the closed form at r = a.
pub fn hansen_vs_statesum(opts: &Options) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    let s3 = load(Path::new(S3_ASSET), &opts.assets)?;
    let s2s1 = load(Path::new(S2XS1_ASSET), &opts.assets)?;
    let sphere: SeifertSymbol = "0; 1/1".parse()?;
    let product: SeifertSymbol = "0;".parse()?;
    for r in opts.r.map(|r| vec![r]).unwrap_or((3..=7).collect()) {
        let v = value(&state_sum(&s3, r, false, Engine::Frontier)?, 1)?;
        let want = 2.0 / r as f64 * (PI / r as f64).sin().powi(2);
        let h = tv_seifert(&sphere, r)?;
        out.push(Check::new(
            format!("S3 r={r}"),
            rel_close(v, want, opts.tol) && rel_close(h, want, opts.tol),
            format!("statesum={v:.12} hansen={h:.12} formula={want:.12}"),
        ));
    }
    for r in opts.r.filter(|r| r % 2 == 1).map(|r| vec![r]).unwrap_or(vec![5, 7]) {
        let v = value(&state_sum(&s3, r, true, Engine::Frontier)?, r as i64 - 1)?;
        let want = 4.0 / r as f64 * (PI / r as f64).sin().powi(2);
        out.push(Check::new(
            format!("S3 refined r={r}"),
            rel_close(v, want, opts.tol),
            format!("statesum={v:.12} formula={want:.12}"),
        ));
    }
    for r in opts.r.map(|r| vec![r]).unwrap_or(vec![3, 4, 5]) {
        let v = value(&state_sum(&s2s1, r, false, Engine::Frontier)?, 1)?;
        let h = tv_seifert(&product, r)?;
        out.push(Check::new(
            format!("S2xS1 r={r}"),
            rel_close(v, 1.0, opts.tol) && rel_close(h, 1.0, opts.tol),
            format!("statesum={v:.12} hansen={h:.12}"),
        ));
    }
    for a in [5i64, 7] {
        for g in [0u32, 1] {
            for n in [0usize, 2, 4] {
                let pairs = (0..n).map(|j| (a, if j % 2 == 0 { 1 } else { -1 })).collect();
                let sym = SeifertSymbol::new(g, pairs)?;
                let h = tv_seifert(&sym, a as u32)?;
                let c = tv_closed_form(&sym, a as u32, 1, false)?.value();
                out.push(Check::new(
                    format!("closed form {sym}"),
                    rel_close(h, c, opts.tol),
                    format!("hansen={h:.12} closed={c:.12}"),
                ));
            }
        }
    }
    Ok(out)
}

pub const VANISHING_SYMBOLS: [&str; 2] = ["0; 5/1, 5/1, 5/-2", "0; 7/1, 7/1, 7/1, 7/-3"];

/// |τ_r/τ_r(S²×S¹)| vanishes at r ∈ {a, 2a} when no unit certificate exists.
pub fn vanishing(_opts: &Options) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    for text in VANISHING_SYMBOLS {
        let sym: SeifertSymbol = text.parse()?;
        let a = sym.uniform_order().unwrap() as u32;
        for r in [a, 2 * a] {
            let h = hansen_ratio(&sym, r)?.norm();
            let c = tv_closed_form(&sym, r, 1, false)?;
            out.push(Check::new(
                format!("vanishing {sym} r={r}"),
                h < 1e-9 && c == ClosedForm::Vanishing,
                format!("|ratio|={h:.3e}"),
            ));
        }
    }
    Ok(out)
}

/// ev_{r,1}(|T|_c) = (−1)^{parity(S(c3))}·ev_{r,r−1}(|T|_c) for every coloring.
pub fn sign_change(opts: &Options) -> Result<Vec<Check>, Error> {
    let t = match &opts.file {
        Some(f) => load(f, &opts.assets)?,
        None => load(Path::new(S3_ASSET), &opts.assets)?,
    };
    let mut out = Vec::new();
    for r in opts.r.map(|r| vec![r]).unwrap_or(vec![5]) {
        let mut memo = WeightMemo::new(r)?;
        let mut bad = 0usize;
        let mut total = 0usize;
        for c in enumerate_admissible(&t, r, false)? {
            let w = coloring_weight(&t, &c, &mut memo);
            let (c3, _) = split_coloring(&c)?;
            let sign = if normal_surface_euler_parity(&t, &c3)? == 0 { 1.0 } else { -1.0 };
            let lhs = w.ev(1)?;
            let rhs = w.ev(r as i64 - 1)? * sign;
            total += 1;
            if (lhs - rhs).norm() > 1e-10 * (1.0 + lhs.norm()) {
                bad += 1;
            }
        }
        out.push(Check::new(format!("sign change r={r}"), bad == 0, format!("{bad} of {total} colorings differ")));
    }
    Ok(out)
}

/// s(b,a) by the cotangent sum, in floating point.
pub fn dedekind_cot(b: i64, a: i64) -> f64 {
    (1..a)
        .map(|l| {
            let x = PI * l as f64 / a as f64;
            let y = PI * (l * b).rem_euclid(a) as f64 / a as f64;
            1.0 / (x.tan() * y.tan())
        })
        .sum::<f64>()
        / (4 * a) as f64
}

/// Recursion against the cotangent sum, and exact reciprocity.
pub fn dedekind(opts: &Options) -> Result<Vec<Check>, Error> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0f64;
    let mut recip_ok = true;
    let mut pairs = 0;
    while pairs < 200 {
        let a: i64 = rng.gen_range(1..=5000);
        let b: i64 = rng.gen_range(-5000..=5000);
        if a.gcd(&b) != 1 {
            continue;
        }
        pairs += 1;
        let exact = dedekind_sum(b, a)?;
        let err = (exact.to_f64().unwrap() - dedekind_cot(b, a)).abs();
        worst = worst.max(err);
        if b > 0 {
            let lhs = exact + dedekind_sum(a, b)?;
            let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
            let rhs = (q(a, b) + q(b, a) + q(1, a * b)) / q(12, 1) - q(1, 4);
            recip_ok &= lhs == rhs;
        }
    }
    Ok(vec![
        Check::new("dedekind cotangent oracle", worst < opts.tol.max(1e-9), format!("max error {worst:.3e} over 200 pairs")),
        Check::new("dedekind reciprocity", recip_ok, "exact rational identity"),
    ])
}

/// The distinguishable (d = 7) and indistinguishable (p = 5) examples.
pub fn hempel_examples(opts: &Options) -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    let a: SeifertSymbol = "0; 7/1, 7/1, 7/-1, 7/-1".parse()?;
    let rep = report(&a, 2, 7, opts.tol)?;
    let row = rep.rows.iter().find(|x| x.r == 7 && x.s == 1 && !x.refined);
    let (va, vb) = row.map(|x| (x.value_a.unwrap_or(0.0), x.value_b.unwrap_or(0.0))).unwrap_or((0.0, 0.0));
    let ratio = (2.0 * PI / 7.0).sin().powi(4) / (PI / 7.0).sin().powi(4);
    out.push(Check::new(
        "distinguishable d=7 k=2",
        matches!(rep.verdict, Verdict::Distinguishable { .. })
            && rel_close(va, 49.0 / 16.0 / (PI / 7.0).sin().powi(4), 1e-8)
            && rel_close(vb, 49.0 / 16.0 / (2.0 * PI / 7.0).sin().powi(4), 1e-8)
            && rel_close(va, 86.409, 1e-4)
            && rel_close(vb, 8.197, 1e-4)
            && rel_close(va / vb, ratio, 1e-8),
        format!("verdict={:?} A={va:.9} B={vb:.9} ratio={:.12}", rep.verdict, va / vb),
    ));
    let p: SeifertSymbol = "0; 5/1, 5/1, 5/-2".parse()?;
    let rep = report(&p, 2, 12, opts.tol)?;
    let mut ok = matches!(rep.verdict, Verdict::IndistinguishableUpTo(_));
    for x in &rep.rows {
        let (va, vb) = (x.value_a.unwrap_or(f64::NAN), x.value_b.unwrap_or(f64::NAN));
        ok &= x.status != Status::OutOfScope && rel_close(va, vb, 1e-8);
        if x.r % 5 == 0 {
            ok &= va == 0.0 && vb == 0.0;
        } else {
            ok &= (va - va.round()).abs() < 1e-6 && (vb - vb.round()).abs() < 1e-6;
        }
    }
    out.push(Check::new(
        "indistinguishable p=5 k=2",
        ok,
        format!("verdict={:?} rows={} B={}", rep.verdict, rep.rows.len(), iterate(&p, 2)?),
    ));
    Ok(out)
}

/// Counts admissible colorings by filtering every assignment of colors to edges.
pub fn brute_force_count(t: &Triangulation, r: u32) -> u64 {
    let n = t.edges().len();
    let mut c = Coloring { level_r: r, colors: vec![0; n] };
    let mut count = 0;
    loop {
        if c.is_admissible(t) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            c.colors[i] += 1;
            if c.colors[i] as u32 <= r - 2 {
                break;
            }
            c.colors[i] = 0;
            i += 1;
        }
    }
}

/// Backtracking counts against brute force, and |A_r| = |A_3|·|A'_r|.
pub fn enumeration(opts: &Options) -> Result<Vec<Check>, Error> {
    let t = match &opts.file {
        Some(f) => load(f, &opts.assets)?,
        None => load(Path::new(S3_ASSET), &opts.assets)?,
    };
    let mut out = Vec::new();
    if t.edges().len() <= 12 {
        for r in [3, 4, 5] {
            let fast = count_admissible(&t, r, false)?;
            let slow = brute_force_count(&t, r);
            out.push(Check::new(format!("backtracking vs brute force r={r}"), fast == slow, format!("{fast} vs {slow}")));
        }
    }
    let three = count_admissible(&t, 3, false)?;
    for r in opts.r.map(|r| vec![r]).unwrap_or(vec![5, 7]) {
        let full = count_admissible(&t, r, false)?;
        let prime = count_admissible(&t, r, true)?;
        out.push(Check::new(
            format!("coloring bijection r={r}"),
            r % 2 == 1 && full == three * prime,
            format!("|A_r|={full} |A_3|={three} |A'_r|={prime}"),
        ));
    }
    Ok(out)
}

pub fn run_suite(name: &str, opts: &Options) -> Result<Vec<Check>, Error> {
    match name {
        "splitting" => splitting(opts),
        "hansen-vs-statesum" => hansen_vs_statesum(opts),
        "vanishing" => vanishing(opts),
        "sign-change" => sign_change(opts),
        "dedekind" => dedekind(opts),
        "hempel-examples" => hempel_examples(opts),
        "enumeration" => enumeration(opts),
        _ => Err(Error::Parse(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}
