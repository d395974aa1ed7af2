//! Naive, canonical and Faltings heights.

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::arith::{self, int_valuation};
use crate::elliptic::{CurveModel, RationalPoint};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Number of doublings used by [`doubling_oracle`] by default.
pub const ORACLE_DOUBLINGS: u32 = 6;
const WORK_BITS: u32 = 192;

/// Multiplicative height of the cleared triple `(x : y : 1)`.
pub fn naive_height(p: &RationalPoint) -> Integer {
    match p {
        RationalPoint::Infinity => Integer::from(1),
        RationalPoint::Affine { x, y } => {
            let l = Integer::from(x.denom().lcm_ref(y.denom()));
            let xs = x.numer() * Integer::from(&l / x.denom());
            let ys = y.numer() * Integer::from(&l / y.denom());
            let g = Integer::from(xs.gcd_ref(&ys)).gcd(&l);
            let m = Integer::from(xs.abs_ref()).max(Integer::from(ys.abs_ref())).max(l);
            m / g
        }
    }
}

pub fn log_height(p: &RationalPoint) -> f64 {
    arith::ln_integer(&naive_height(p))
}

/// `log max(|num x|, |den x|)`
pub fn x_height(p: &RationalPoint) -> f64 {
    match p.x() {
        None => 0.0,
        Some(x) => {
            let m = Integer::from(x.numer().abs_ref()).max(x.denom().clone());
            arith::ln_integer(&m)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZimmerConstant {
    pub nu: f64,
    pub d: f64,
}

/// `d = (3ν + 7 n log 2)/2`, where the ν sum for a curve over the rationals
/// viewed over a degree-`n` field is `n` times the rational one.
pub fn zimmer_d(c: &CurveModel, field_degree: u32) -> ZimmerConstant {
    let n = field_degree.max(1) as f64;
    let arch = |q: &Integer| -> Option<f64> {
        (*q != 0).then(|| -arith::ln_integer(&Integer::from(q.abs_ref())))
    };
    let mut nu = 0.0;
    let va = arch(c.a()).map(|v| v / 2.0);
    let vb = arch(c.b()).map(|v| v / 3.0);
    let m = match (va, vb) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => f64::INFINITY,
    };
    nu -= m.min(0.0);
    // finite places: v_p(q) log p, never negative for an integral model
    for p in c.local_data().iter().map(|l| &l.prime) {
        let lp = arith::ln_integer(p);
        let fa = int_valuation(c.a(), p).finite().map(|v| v as f64 * lp / 2.0);
        let fb = int_valuation(c.b(), p).finite().map(|v| v as f64 * lp / 3.0);
        let m = fa.into_iter().chain(fb).fold(f64::INFINITY, f64::min);
        nu -= m.min(0.0);
    }
    let nu = nu * n;
    ZimmerConstant {
        nu,
        d: (3.0 * nu + 7.0 * n * std::f64::consts::LN_2) / 2.0,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightProfile {
    pub point: RationalPoint,
    #[serde(serialize_with = "crate::elliptic::ser_integer")]
    pub naive_multiplicative: Integer,
    pub logarithmic: f64,
    pub canonical: f64,
    pub canonical_error: f64,
}

impl HeightProfile {
    /// The x-coordinate normalization, `2/3` of the projective one.
    pub fn canonical_x(&self) -> f64 {
        self.canonical * 2.0 / 3.0
    }

    pub const CSV_HEADER: &'static str = "point,H,h,hhat,error";

    pub fn csv_row(&self) -> String {
        format!(
            "\"{}\",{},{:.12},{:.12},{:.3e}",
            self.point, self.naive_multiplicative, self.logarithmic, self.canonical, self.canonical_error
        )
    }
}

/// Per-curve data reused across many height evaluations.
#[derive(Clone, Debug)]
pub struct HeightContext {
    a: Integer,
    b: Integer,
    /// `(p, v_p(4D), log p)` for `p = 2` and the primes of `D = 4a^3 + 27b^2`
    primes: Vec<(Integer, u32, f64)>,
    /// bound on the archimedean step `|log max(|φ|,|ψ|)|` on the unit square
    arch_bound: f64,
}

impl HeightContext {
    pub fn new(c: &CurveModel) -> Self {
        let a = c.a().clone();
        let b = c.b().clone();
        let d = Integer::from(c.discriminant() / -4i32);
        let mut primes = Vec::new();
        for l in c.local_data() {
            let v = int_valuation(&d, &l.prime).finite().unwrap_or(0) as u32;
            if v > 0 {
                primes.push((l.prime.clone(), v, arith::ln_integer(&l.prime)));
            }
        }
        let to_f = |x: &Integer| x.to_f64().abs();
        let (af, bf) = (to_f(&a), to_f(&b));
        let upper = (1.0 + 2.0 * af + 8.0 * bf + af * af).max(4.0 * (1.0 + af + bf));
        let d0 = to_f(&Integer::from(&d / 4i32));
        let big_d = d0;
        // coefficient sums of the cofactors in
        //   4D Z^7 = f1 φ - g1 ψ,  4D X^7 = f2 φ + g2 ψ
        let s1 = (12.0 + 16.0 * af) + (3.0 + 5.0 * af + 27.0 * bf);
        let a3 = af.powi(3);
        let b2 = bf * bf;
        let s2 = 4.0 * big_d
            + 4.0 * af * af * bf
            + 4.0 * af * (3.0 * a3 + 22.0 * b2)
            + 12.0 * bf * (a3 + 8.0 * b2)
            + af * af * bf
            + af * (5.0 * a3 + 32.0 * b2)
            + 2.0 * bf * (13.0 * a3 + 96.0 * b2)
            + 3.0 * af * af * (a3 + 8.0 * b2);
        let lower = 4.0 * big_d / s1.max(s2);
        let arch_bound = upper.ln().max(-lower.ln()).max(0.0);
        HeightContext {
            a,
            b,
            primes,
            arch_bound,
        }
    }

    /// Doubling map on `x = X/Z`.
    fn phi_psi_int(&self, x: &Integer, z: &Integer) -> (Integer, Integer) {
        let (a, b) = (&self.a, &self.b);
        let x2 = Integer::from(x * x);
        let z2 = Integer::from(z * z);
        let xz = Integer::from(x * z);
        let z3 = Integer::from(&z2 * z);
        let phi = Integer::from(&x2 * &x2) - Integer::from(2 * a) * &x2 * &z2
            - Integer::from(8 * b) * &xz * &z2
            + Integer::from(a * a) * &z2 * &z2;
        let psi = Integer::from(4 * z)
            * (Integer::from(&x2 * x) + Integer::from(a * &xz) * z + Integer::from(b * &z3));
        (phi, psi)
    }

    fn terms_for(&self, tol_x: f64) -> u32 {
        let total = self.arch_bound
            + self
                .primes
                .iter()
                .map(|(_, v, lp)| (*v as f64 + 2.0) * lp)
                .sum::<f64>()
            + 1.0;
        let n = ((2.0 * total / (3.0 * tol_x)).ln() / 4f64.ln()).ceil();
        n.max(4.0) as u32 + 1
    }

    fn arch_sum(&self, num: &Integer, den: &Integer, terms: u32) -> Float {
        let prec = WORK_BITS;
        let af = Float::with_val(prec, &self.a);
        let bf = Float::with_val(prec, &self.b);
        let mut x = Float::with_val(prec, num);
        let mut z = Float::with_val(prec, den);
        let m = Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, z.abs_ref()));
        x /= &m;
        z /= &m;
        let mut sum = Float::new(prec);
        let mut w = Float::with_val(prec, 0.25);
        for _ in 0..terms {
            let x2 = Float::with_val(prec, &x * &x);
            let z2 = Float::with_val(prec, &z * &z);
            let xz = Float::with_val(prec, &x * &z);
            let phi = Float::with_val(prec, &x2 * &x2)
                - Float::with_val(prec, &x2 * &z2) * Float::with_val(prec, 2 * &af)
                - Float::with_val(prec, &xz * &z2) * Float::with_val(prec, 8 * &bf)
                + Float::with_val(prec, &z2 * &z2) * Float::with_val(prec, &af * &af);
            let psi = Float::with_val(prec, 4 * &z)
                * (Float::with_val(prec, &x2 * &x)
                    + Float::with_val(prec, &xz * &z) * &af
                    + Float::with_val(prec, &z2 * &z) * &bf);
            let m = Float::with_val(prec, phi.abs_ref()).max(&Float::with_val(prec, psi.abs_ref()));
            sum += Float::with_val(prec, m.ln_ref()) * &w;
            x = phi / &m;
            z = psi / &m;
            w /= 4;
        }
        sum
    }

    /// `Σ 4^{-(k+1)} e_k` for the valuation drops at `p`.
    fn padic_sum(&self, num: &Integer, den: &Integer, p: &Integer, v: u32, terms: u32) -> Result<f64> {
        let mut k = (terms + 2) * v + 2;
        let mut modulus = Integer::from(p.pow(k));
        let mut x = Integer::from(num % &modulus);
        let mut z = Integer::from(den % &modulus);
        let mut sum = 0.0;
        let mut w = 0.25;
        for _ in 0..terms {
            let (phi, psi) = self.phi_psi_int(&x, &z);
            let phi = phi % &modulus;
            let psi = psi % &modulus;
            let e = int_valuation(&phi, p).min(int_valuation(&psi, p));
            let e = match e.finite() {
                Some(e) if (e as u32) < k => e as u32,
                _ => return Err(Error::Precision(format!("p-adic precision exhausted at {p}"))),
            };
            let pe = Integer::from(p.pow(e));
            k -= e;
            modulus = Integer::from(p.pow(k));
            x = Integer::from(phi.div_exact_ref(&pe)) % &modulus;
            z = Integer::from(psi.div_exact_ref(&pe)) % &modulus;
            sum += w * e as f64;
            w /= 4.0;
        }
        Ok(sum)
    }

    /// x-normalized canonical height with a certified error bound.
    pub fn canonical_x(&self, p: &RationalPoint, tol_x: f64) -> Result<(f64, f64)> {
        if !(tol_x > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if tol_x < 1e-40 {
            return Err(Error::Precision(format!("tolerance {tol_x:e} below working precision")));
        }
        let x = match p.x() {
            None => return Ok((0.0, 0.0)),
            Some(x) => x,
        };
        let (num, den) = (x.numer(), x.denom());
        let terms = self.terms_for(tol_x);
        let h0 = Integer::from(num.abs_ref()).max(den.clone());
        let mut total = ln_big(&h0);
        total += self.arch_sum(num, den, terms);
        let mut err = self.arch_bound;
        for (q, v, lq) in &self.primes {
            let s = self.padic_sum(num, den, q, *v, terms)?;
            total -= Float::with_val(WORK_BITS, s) * Float::with_val(WORK_BITS, *lq);
            err += *v as f64 * lq;
        }
        let tail = err * 0.25f64.powi(terms as i32) / 3.0 + 1e-30;
        Ok((total.to_f64().max(0.0), tail))
    }

    pub fn canonical(&self, p: &RationalPoint, tol: f64) -> Result<(f64, f64)> {
        let (hx, e) = self.canonical_x(p, tol / 1.5)?;
        Ok((1.5 * hx, 1.5 * e))
    }
}

fn ln_big(n: &Integer) -> Float {
    let f = Float::with_val(WORK_BITS, n);
    f.ln()
}

/// The projective canonical height of `p`, to within `tol`.
pub fn canonical_height(c: &CurveModel, p: &RationalPoint, tol: f64) -> Result<HeightProfile> {
    if !c.contains(p) {
        return Err(Error::NotOnCurve);
    }
    let ctx = HeightContext::new(c);
    profile_with(&ctx, p, tol)
}

pub fn profile_with(ctx: &HeightContext, p: &RationalPoint, tol: f64) -> Result<HeightProfile> {
    let (canonical, err) = ctx.canonical(p, tol)?;
    let naive = naive_height(p);
    Ok(HeightProfile {
        point: p.clone(),
        logarithmic: arith::ln_integer(&naive),
        naive_multiplicative: naive,
        canonical,
        canonical_error: err,
    })
}

/// `4^{-n} h(2^n P)` together with its error bound `d/4^n`.
pub fn doubling_oracle(c: &CurveModel, p: &RationalPoint, n: u32) -> (f64, f64) {
    let mut q = p.clone();
    for _ in 0..n {
        q = c.double(&q);
    }
    let scale = 0.25f64.powi(n as i32);
    (log_height(&q) * scale, zimmer_d(c, 1).d * scale)
}

/// Canonical-height pairing `<P,Q> = (ĥ(P+Q) - ĥ(P) - ĥ(Q)) / 2`.
pub fn height_pairing(ctx: &HeightContext, c: &CurveModel, p: &RationalPoint, q: &RationalPoint, tol: f64) -> Result<f64> {
    let s = c.add(p, q);
    let (hs, _) = ctx.canonical(&s, tol)?;
    let (hp, _) = ctx.canonical(p, tol)?;
    let (hq, _) = ctx.canonical(q, tol)?;
    Ok((hs - hp - hq) / 2.0)
}

// Faltings height --------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
    fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
}

fn nome(tau: C64) -> C64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = (-two_pi * tau.im).exp();
    C64::new(r * (two_pi * tau.re).cos(), r * (two_pi * tau.re).sin())
}

/// `log|q ∏(1-q^n)^24|`
fn log_abs_delta(tau: C64) -> f64 {
    let q = nome(tau);
    let mut acc = 0.0;
    let mut qn = q;
    for _ in 0..200 {
        let f = C64::new(1.0, 0.0).sub(qn);
        acc += 24.0 * f.abs().ln();
        if qn.abs() < 1e-30 {
            break;
        }
        qn = qn.mul(q);
    }
    q.abs().ln() + acc
}

fn eisenstein(tau: C64) -> (C64, C64) {
    let q = nome(tau);
    let mut e4 = C64::new(1.0, 0.0);
    let mut e6 = C64::new(1.0, 0.0);
    let mut qn = q;
    for n in 1..400u32 {
        let (mut s3, mut s5) = (0.0, 0.0);
        for d in 1..=n {
            if n % d == 0 {
                let df = d as f64;
                s3 += df.powi(3);
                s5 += df.powi(5);
            }
        }
        e4 = e4.add(qn.scale(240.0 * s3));
        e6 = e6.sub(qn.scale(504.0 * s5));
        if qn.abs() * (n as f64).powi(6) < 1e-30 {
            break;
        }
        qn = qn.mul(q);
    }
    (e4, e6)
}

fn j_of(tau: C64) -> f64 {
    let (e4, e6) = eisenstein(tau);
    let e43 = e4.mul(e4).mul(e4);
    let v = e43.scale(1728.0).div(e43.sub(e6.mul(e6)));
    v.re
}

/// A point `τ` of the fundamental domain with `j(τ) = j`.
fn tau_from_j(j: f64) -> Result<C64> {
    let bisect = |lo: f64, hi: f64, path: &dyn Fn(f64) -> C64, increasing: bool| -> C64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = j_of(path(mid)) > j;
            if above == increasing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        path(0.5 * (lo + hi))
    };
    if !j.is_finite() {
        return Err(Error::NonConvergent(format!("j = {j}")));
    }
    let tau = if j >= 1728.0 {
        let top = (j.max(1.0).ln() / (2.0 * std::f64::consts::PI)) + 2.0;
        bisect(1.0, top, &|t| C64::new(0.0, t), true)
    } else if j >= 0.0 {
        let third = std::f64::consts::PI / 3.0;
        bisect(third, std::f64::consts::FRAC_PI_2, &|th| C64::new(th.cos(), th.sin()), true)
    } else {
        let lo = 3f64.sqrt() / 2.0;
        let top = ((-j).ln() / (2.0 * std::f64::consts::PI)).max(lo) + 2.0;
        // j decreases from 0 towards -∞ along this path
        bisect(lo, top, &|t| C64::new(-0.5, t), false)
    };
    let check = j_of(tau);
    if (check - j).abs() > 1e-6 * j.abs().max(1728.0) {
        return Err(Error::NonConvergent(format!("j inversion reached {check} for {j}")));
    }
    Ok(tau)
}

fn faltings_core(c: &CurveModel, log_disc: f64) -> Result<f64> {
    let j = c.j_invariant().to_f64();
    let tau = tau_from_j(j)?;
    let inv = log_abs_delta(tau) + 6.0 * tau.im.ln();
    Ok((log_disc - inv) / 12.0 - (2.0 * std::f64::consts::PI).ln())
}

/// Stable Faltings height: the discriminant term is `log den(j)`.
pub fn faltings_height(c: &CurveModel) -> Result<f64> {
    let j = c.j_invariant();
    faltings_core(c, arith::ln_integer(j.denom()))
}

/// Faltings height of the global minimal model over the rationals.
pub fn faltings_height_minimal(c: &CurveModel) -> Result<f64> {
    faltings_core(c, arith::ln_integer(&Integer::from(c.minimal_discriminant().abs_ref())))
}
