//! Periodic mapping classes through their mapping-torus symbols, iterates,
//! and TV comparison reports for Hempel pairs.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclo::is_near_integer;
use crate::seifert::{
    check_unit_criterion, euler_number, tv_closed_form, tv_prime_seifert, tv_seifert, ClosedForm, SeifertSymbol,
};
use crate::Error;

/// Absolute tolerance for flagging a value as an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicClass {
    pub symbol: String,
    pub order_d: i64,
    pub surface_genus: i64,
}

/// Order and surface genus of the periodic class whose mapping torus has `sym`.
pub fn periodic_class(sym: &SeifertSymbol) -> Result<PeriodicClass, Error> {
    if !euler_number(sym).is_zero() {
        return Err(Error::Hypothesis(format!("symbol {sym} has nonzero Euler number")));
    }
    let d = sym.order();
    let mut genus = BigRational::from_integer((1 + (sym.genus() as i64 - 1) * d).into());
    for &(a, _) in sym.pairs() {
        genus += BigRational::new((d - d / a).into(), 2.into());
    }
    if !genus.is_integer() || genus < BigRational::zero() {
        return Err(Error::Hypothesis(format!("symbol {sym} gives genus {genus}")));
    }
    Ok(PeriodicClass { symbol: sym.to_string(), order_d: d, surface_genus: genus.to_integer().to_i64().unwrap() })
}

fn inverse_mod(k: i64, d: i64) -> Result<i64, Error> {
    if k.gcd(&d) != 1 {
        return Err(Error::Hypothesis(format!("k = {k} is not coprime to the order {d}")));
    }
    if d == 1 {
        return Ok(1);
    }
    let x = k.rem_euclid(d).extended_gcd(&d).x.rem_euclid(d);
    Ok(x)
}

/// Symbol of the mapping torus of the k-th iterate: (g; (a_j, b_j k*)).
pub fn iterate(sym: &SeifertSymbol, k: i64) -> Result<SeifertSymbol, Error> {
    let ks = inverse_mod(k, sym.order())?;
    SeifertSymbol::new(sym.genus(), sym.pairs().iter().map(|&(a, b)| (a, b * ks)).collect())
}

/// True iff k ≡ ±1 (mod d).
pub fn is_trivial_pair(sym: &SeifertSymbol, k: i64) -> bool {
    let d = sym.order();
    let k = k.rem_euclid(d);
    d <= 2 || k == 1 || k == d - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    ClosedForm,
    Vanishing,
    Hansen,
    OutOfScope,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::ClosedForm => "closed_form",
            Status::Vanishing => "vanishing",
            Status::Hansen => "hansen",
            Status::OutOfScope => "out_of_scope",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub r: u32,
    pub s: i64,
    pub refined: bool,
    pub value_a: Option<f64>,
    pub value_b: Option<f64>,
    pub equal: Option<bool>,
    pub int_a: Option<i64>,
    pub int_b: Option<i64>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Trivial,
    Distinguishable { r: u32, s: i64, refined: bool },
    IndistinguishableUpTo(u32),
}

#[derive(Clone, Debug, Serialize)]
pub struct HempelReport {
    pub symbol_a: String,
    pub symbol_b: String,
    pub k: i64,
    pub k_star: i64,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() < tol * (1.0 + a.abs().max(b.abs()))
}

fn integer(v: f64) -> Option<i64> {
    is_near_integer(Complex64::new(v, 0.0), INTEGRALITY_TOL)
}

fn row(r: u32, s: i64, refined: bool, a: f64, b: f64, tol: f64, status: Status) -> Row {
    let ints = status == Status::Hansen;
    Row {
        r,
        s,
        refined,
        value_a: Some(a),
        value_b: Some(b),
        equal: Some(close(a, b, tol)),
        int_a: if ints { integer(a) } else { None },
        int_b: if ints { integer(b) } else { None },
        status,
    }
}

fn out_of_scope(r: u32) -> Row {
    Row {
        r,
        s: 1,
        refined: false,
        value_a: None,
        value_b: None,
        equal: None,
        int_a: None,
        int_b: None,
        status: Status::OutOfScope,
    }
}

fn closed_rows(a: &SeifertSymbol, b: &SeifertSymbol, r: u32, tol: f64) -> Result<Vec<Row>, Error> {
    let ri = r as i64;
    let mut rows = Vec::new();
    for s in (1..ri).filter(|s| s.gcd(&ri) == 1) {
        let mut modes = vec![false];
        if ri % 2 == 1 && s % 2 == 0 {
            modes.push(true);
        }
        for refined in modes {
            let va = tv_closed_form(a, r, s, refined)?;
            let vb = tv_closed_form(b, r, s, refined)?;
            let status = if va == ClosedForm::Vanishing && vb == ClosedForm::Vanishing {
                Status::Vanishing
            } else {
                Status::ClosedForm
            };
            rows.push(row(r, s, refined, va.value(), vb.value(), tol, status));
        }
    }
    Ok(rows)
}

fn rows_at(a: &SeifertSymbol, b: &SeifertSymbol, r: u32, tol: f64) -> Vec<Row> {
    let ri = r as i64;
    let d = a.order();
    if let Some(order) = a.uniform_order() {
        if ri % order == 0 && check_unit_criterion(a, order).is_ok() {
            return closed_rows(a, b, r, tol).unwrap_or_else(|_| vec![out_of_scope(r)]);
        }
    }
    if ri.gcd(&d) != 1 {
        return vec![out_of_scope(r)];
    }
    let (Ok(va), Ok(vb)) = (tv_seifert(a, r), tv_seifert(b, r)) else {
        return vec![out_of_scope(r)];
    };
    let mut rows = vec![row(r, 1, false, va, vb, tol, Status::Hansen)];
    if ri % 2 == 1 {
        if let (Ok(pa), Ok(pb)) = (tv_prime_seifert(a, r, ri - 1, tol), tv_prime_seifert(b, r, ri - 1, tol)) {
            rows.push(row(r, ri - 1, true, pa, pb, tol, Status::Hansen));
        }
    }
    rows
}

/// Compares TV values of the mapping tori of [f] and [f^k] for 3 ≤ r ≤ r_max.
pub fn report(sym: &SeifertSymbol, k: i64, r_max: u32, tol: f64) -> Result<HempelReport, Error> {
    if r_max < 3 {
        return Err(Error::LevelTooSmall(r_max as i64));
    }
    periodic_class(sym)?;
    let k_star = inverse_mod(k, sym.order())?;
    let b = iterate(sym, k)?;
    let mut rows: Vec<Row> = (3..=r_max).into_par_iter().flat_map_iter(|r| rows_at(sym, &b, r, tol)).collect();
    rows.sort_by_key(|x| (x.r, x.s, x.refined));
    let verdict = if is_trivial_pair(sym, k) {
        Verdict::Trivial
    } else {
        match rows.iter().find(|x| x.equal == Some(false)) {
            Some(x) => Verdict::Distinguishable { r: x.r, s: x.s, refined: x.refined },
            None => Verdict::IndistinguishableUpTo(r_max),
        }
    };
    Ok(HempelReport { symbol_a: sym.to_string(), symbol_b: b.to_string(), k, k_star, rows, verdict })
}

/// Decimal rendering with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, v)
    } else {
        format!("{:.11e}", v)
    }
}

impl HempelReport {
    pub const CSV_HEADER: &'static str = "r,s,refined,value_A,value_B,equal,int_A,int_B,status";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        let int = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for x in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                x.r,
                x.s,
                x.refined,
                opt(x.value_a),
                opt(x.value_b),
                x.equal.map(|e| e.to_string()).unwrap_or_default(),
                int(x.int_a),
                int(x.int_b),
                x.status.as_str()
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
