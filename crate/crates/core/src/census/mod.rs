//! Exhaustive bounded-height point enumeration and the counting census.

mod lattice;
mod product;

pub use lattice::{covering_count, greedy_cover, lattice_ball_count, mw_sublattice, sample_ball, MWLattice};
pub use product::{product_census, segre_height, ProductFactor};

use rug::Integer;
use serde::Serialize;

use crate::bounds::{log_ceiling, ConstantsReport};
use crate::elliptic::{CurveModel, RationalPoint};
use crate::heights::{HeightContext, DEFAULT_TOL};
use crate::precision::{Interval, Precision};
use crate::{Error, Result};

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct CensusConfig {
    /// Largest admissible height bound `B`.
    pub cap: u64,
    /// Worker threads; `None` uses the global pool and `Some(1)` runs on
    /// the calling thread.
    pub workers: Option<usize>,
    pub tol: f64,
    pub precision: Precision,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            cap: DEFAULT_CAP,
            workers: None,
            tol: DEFAULT_TOL,
            precision: Precision::default(),
        }
    }
}

/// An affine point `(m/e², n/e³)` with `gcd(m, e) = 1` and its height
/// `max(|m e|, |n|, e³)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPoint {
    pub m: Integer,
    pub e: Integer,
    pub n: Integer,
    pub height: Integer,
}

impl WeightedPoint {
    fn new(m: Integer, e: Integer, n: Integer) -> Self {
        let me = Integer::from(&m * &e).abs();
        let e3 = e.pow_ref_u(3);
        let height = me.max(Integer::from(n.abs_ref())).max(e3);
        WeightedPoint { m, e, n, height }
    }

    pub fn point(&self) -> RationalPoint {
        RationalPoint::from_weighted(&self.m, &self.e, &self.n)
    }
}

trait PowU {
    fn pow_ref_u(&self, k: u32) -> Integer;
}

impl PowU for Integer {
    fn pow_ref_u(&self, k: u32) -> Integer {
        use rug::ops::Pow;
        Integer::from(self.pow(k))
    }
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Send>(items: Vec<u64>, workers: Option<usize>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    if workers == Some(1) {
        return items.into_iter().map(f).collect();
    }
    in_pool(workers, || items.into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T: Send>(items: Vec<u64>, _workers: Option<usize>, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    items.into_iter().map(f).collect()
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn maybe_square_mod64(v: u128) -> bool {
    const QR64: u64 = {
        let mut mask = 0u64;
        let mut i = 0;
        while i < 64 {
            mask |= 1 << ((i * i) % 64);
            i += 1;
        }
        mask
    };
    QR64 >> (v % 64) as u64 & 1 == 1
}

/// Points with `e` fixed, small-coefficient fast path in `i128`.
fn scan_e_small(a: i128, b: i128, e: u64, bound: u64) -> Vec<(i128, u64, u128)> {
    let mut out = Vec::new();
    let ei = e as i128;
    let e4 = ei.pow(4);
    let e6 = ei.pow(6);
    let mmax = (bound / e) as i128;
    for m in -mmax..=mmax {
        if e > 1 && gcd_u64(m.unsigned_abs() as u64, e) != 1 {
            continue;
        }
        let rhs = m * m * m + a * m * e4 + b * e6;
        if rhs < 0 {
            continue;
        }
        let r = rhs as u128;
        if !maybe_square_mod64(r) {
            continue;
        }
        let n = r.isqrt();
        if n * n != r || n > bound as u128 {
            continue;
        }
        out.push((m, e, n));
    }
    out
}

fn scan_e_big(a: &Integer, b: &Integer, e: u64, bound: u64) -> Vec<(Integer, u64, Integer)> {
    let mut out = Vec::new();
    let ei = Integer::from(e);
    let e4 = ei.pow_ref_u(4);
    let e6 = ei.pow_ref_u(6);
    let ae4 = Integer::from(a * &e4);
    let be6 = Integer::from(b * &e6);
    let mmax = (bound / e) as i64;
    for m in -mmax..=mmax {
        if e > 1 && gcd_u64(m.unsigned_abs(), e) != 1 {
            continue;
        }
        let mi = Integer::from(m);
        let rhs = mi.pow_ref_u(3) + Integer::from(&mi * &ae4) + &be6;
        if rhs < 0 || !rhs.is_perfect_square() {
            continue;
        }
        let n = rhs.sqrt();
        if n > bound {
            continue;
        }
        out.push((mi, e, n));
    }
    out
}

/// All affine points of height at most `bound`, ordered by `e`, then `m`,
/// then the sign of `y` (negative first).
pub fn enumerate_weighted(c: &CurveModel, bound: u64, cfg: &CensusConfig) -> Result<Vec<WeightedPoint>> {
    let es: Vec<u64> = (1..).take_while(|e: &u64| e.saturating_pow(3) <= bound).collect();
    let bf = bound as f64;
    let coeff = c.a().to_f64().abs() + c.b().to_f64().abs();
    let small = bf.powi(3) + coeff * bf * bf < 1e37 && c.a().to_i64().is_some() && c.b().to_i64().is_some();
    let mut out = Vec::new();
    let mut push = |m: Integer, e: u64, n: Integer| {
        let e = Integer::from(e);
        if n != 0 {
            out.push(WeightedPoint::new(m.clone(), e.clone(), Integer::from(-&n)));
        }
        out.push(WeightedPoint::new(m, e, n));
    };
    if small {
        let a = c.a().to_i64().unwrap() as i128;
        let b = c.b().to_i64().unwrap() as i128;
        for block in map_ordered(es, cfg.workers, |e| scan_e_small(a, b, e, bound)) {
            for (m, e, n) in block {
                push(Integer::from(m), e, Integer::from(n));
            }
        }
    } else {
        let (a, b) = (c.a().clone(), c.b().clone());
        for block in map_ordered(es, cfg.workers, |e| scan_e_big(&a, &b, e, bound)) {
            for (m, e, n) in block {
                push(m, e, n);
            }
        }
    }
    Ok(out)
}

fn check_bound(b: f64, cap: u64) -> Result<u64> {
    if !(b >= 1.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("height bound {b} must be at least 1")));
    }
    if b > cap as f64 {
        return Err(Error::CapExceeded { what: "height bound", cap: cap.to_string() });
    }
    Ok(b.floor() as u64)
}

/// The complete set `{P : H(P) ≤ B}`, infinity first.
pub fn enumerate_points(c: &CurveModel, b: f64, cfg: &CensusConfig) -> Result<Vec<RationalPoint>> {
    let bound = check_bound(b, cfg.cap)?;
    let mut pts = vec![RationalPoint::Infinity];
    pts.extend(enumerate_weighted(c, bound, cfg)?.iter().map(WeightedPoint::point));
    Ok(pts)
}

/// A point together with its naive and canonical heights.
#[derive(Clone, Debug)]
pub struct MeasuredPoint {
    pub point: RationalPoint,
    pub naive: Integer,
    pub canonical: f64,
    pub canonical_error: f64,
}

/// Every point of naive height `≤ bound` with its canonical height, infinity first.
pub fn measured_points(c: &CurveModel, bound: u64, cfg: &CensusConfig) -> Result<Vec<MeasuredPoint>> {
    let ctx = HeightContext::new(c);
    let pts = enumerate_weighted(c, bound, cfg)?;
    let mut out = vec![MeasuredPoint {
        point: RationalPoint::Infinity,
        naive: Integer::from(1),
        canonical: 0.0,
        canonical_error: 0.0,
    }];
    for w in pts {
        let p = w.point();
        let (h, err) = ctx.canonical(&p, cfg.tol)?;
        out.push(MeasuredPoint { point: p, naive: w.height, canonical: h, canonical_error: err });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "Nhat")]
    pub nhat: u64,
    /// `log₁₀` of the ceiling `B^{C/log log B}`, lower end.
    #[serde(rename = "log10_ceilC")]
    pub log10_ceil_c: f64,
    #[serde(rename = "log10_ceilCprime")]
    pub log10_ceil_cprime: f64,
    #[serde(rename = "verdictN")]
    pub verdict_n: bool,
    #[serde(rename = "verdictNhat")]
    pub verdict_nhat: bool,
}

#[derive(Clone, Debug)]
pub struct CensusTable {
    pub curve_id: String,
    pub rows: Vec<CensusRow>,
    pub constants: Vec<ConstantsReport>,
}

impl CensusTable {
    pub const CSV_HEADER: &'static str = "B,N,Nhat,ceilC,ceilCprime,verdictN,verdictNhat";

    pub fn grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.b).collect()
    }

    pub fn all_true(&self) -> bool {
        self.rows.iter().all(|r| r.verdict_n && r.verdict_nhat)
    }

    /// Ceilings are written as `10^x` since they overflow every float format.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},10^{:.6e},10^{:.6e},{},{}\n",
                r.b, r.n, r.nhat, r.log10_ceil_c, r.log10_ceil_cprime, r.verdict_n, r.verdict_nhat
            ));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "curve": self.curve_id,
            "rows": self.rows,
            "all_verdicts_true": self.all_true(),
            "constants": self.constants.iter().map(ConstantsReport::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `log N ≤ C log B / log log B`, decided only when certain.
pub(crate) fn verdict(count: u64, c: &Interval, b: f64, p: Precision) -> (bool, f64) {
    let lc = log_ceiling(c, b, p);
    let ln_count = Interval::int(count, p).ln();
    let log10 = (&lc / &Interval::int(10, p).ln()).lo_f64();
    (ln_count.certainly_le(&lc), log10)
}

pub(crate) fn check_grid(grid: &[f64], threshold: &Interval) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty B grid".into()));
    }
    for &b in grid {
        if !(b >= threshold.hi_f64()) {
            return Err(Error::BelowThreshold { b, threshold: threshold.hi_f64() });
        }
    }
    Ok(())
}

/// `{e^e k : k = 1..count} ∩ [threshold, bmax]`, each point rounded up to
/// the next double so it never falls below `e^e k`.
pub fn standard_grid(threshold: f64, bmax: f64, count: u32) -> Vec<f64> {
    let p = Precision::default();
    let ee = Interval::e(p).exp();
    (1..=count)
        .map(|k| (&ee * &Interval::int(k, p)).hi_f64())
        .filter(|&b| b >= threshold && b <= bmax)
        .collect()
}

/// Exact `N(B)` and `N̂(B)` on a grid, with the theorem's ceilings and verdicts.
pub fn census(c: &CurveModel, grid: &[f64], constants: &ConstantsReport, cfg: &CensusConfig) -> Result<CensusTable> {
    let p = constants.precision;
    check_grid(grid, &constants.threshold())?;
    let bmax = grid.iter().cloned().fold(0.0, f64::max);
    check_bound(bmax, cfg.cap)?;
    // ĥ ≤ log B forces h ≤ log B + d
    let reach = (bmax * constants.k.d.hi_f64().exp()).floor() as u64;
    let pts = measured_points(c, reach, cfg)?;
    let mut rows = Vec::new();
    for &b in grid {
        let bi = b.floor() as u64;
        let n = pts.iter().filter(|q| q.naive <= bi).count() as u64;
        let lb = b.ln();
        let nhat = pts.iter().filter(|q| q.canonical <= lb).count() as u64;
        let (vn, l10p) = verdict(n, &constants.k.c_prime, b, p);
        let (vh, l10c) = verdict(nhat, &constants.k.c, b, p);
        rows.push(CensusRow {
            b,
            n,
            nhat,
            log10_ceil_c: l10c,
            log10_ceil_cprime: l10p,
            verdict_n: vn,
            verdict_nhat: vh,
        });
    }
    Ok(CensusTable { curve_id: c.id(), rows, constants: vec![constants.clone()] })
}
