//! Explicit constants: height lower bounds, rank bounds, Lehmer-type bounds
//! and the counting constants `C`, `C'`.

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::elliptic::CurveModel;
use crate::fields::{Source, TorsionFieldData};
use crate::heights::{faltings_height, zimmer_d};
use crate::precision::{Interval, Precision};
use crate::{Error, Result};

/// Coefficient of the prime-divisor estimate `ω(m) ≤ 13841 log m / log log m`.
pub const OMEGA_COEFF: u32 = 13841;
/// Coefficient of `[L:Q][K:Q]` in `c2`.
pub const RANK_COEFF: u32 = 221456;
pub const PETSCHE_C3: u64 = 1_000_000_000_000_000;
pub const PETSCHE_C4: u32 = 104613;
/// Absolute accuracy assumed for a Faltings height computed in double precision.
const FALTINGS_ERR: f64 = 1e-8;
const PHI_MAX_CAP: f64 = 1e12;

/// Which end of an enclosure a reported constant is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
    Exact,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub name: &'static str,
    pub value: String,
    pub side: Side,
    pub formula: &'static str,
    pub flags: Vec<String>,
}

fn entry(name: &'static str, v: &Interval, side: Side, formula: &'static str) -> ReportEntry {
    let value = match side {
        Side::Upper => v.fmt_side(true),
        Side::Lower | Side::Exact => v.fmt_side(false),
    };
    ReportEntry { name, value, side, formula, flags: Vec::new() }
}

/// `λ / (10¹⁵ n³ σ⁶ log²(104613 n σ²))`.
pub fn petsche_lower_bound(lambda_disc: &Interval, sigma: &Interval, n: u32, p: Precision) -> Interval {
    let n_i = Interval::int(n, p);
    let c3 = &Interval::int(PETSCHE_C3, p) * &n_i.powi(3);
    let c4 = &Interval::int(PETSCHE_C4, p) * &n_i;
    let lg = (&c4 * &sigma.powi(2)).ln().powi(2);
    lambda_disc / &(&(&c3 * &sigma.powi(6)) * &lg)
}

/// `n ((6g)⁸ n max{1, h_F, log n})^{-2g}`.
pub fn gr_lower_bound(n: u32, g: u32, h_f: &Interval, p: Precision) -> Interval {
    let n_i = Interval::int(n, p);
    let m = Interval::int(1, p).max(h_f).max(&n_i.ln());
    let base = &(&Interval::int(6 * g, p).powi(8) * &n_i) * &m;
    &n_i * &base.powi(-2 * g as i32)
}

/// `2g(2[L:Q] + [L:K] ω₁ + ρ)`.
pub fn rank_upper_bound(g: u64, deg_l_q: u64, deg_l_k: u64, omega1: u64, rho: u64) -> u64 {
    2 * g * (2 * deg_l_q + deg_l_k * omega1 + rho)
}

/// `t + (1 + 2/√c₁)·2g(2[L:Q] + [L:K] ω₁ + ρ)`.
pub fn abelian_counting_constant(
    t: u32,
    g: u32,
    deg_l_q: u32,
    deg_l_k: u32,
    omega1: u32,
    rho: u32,
    c1: &Interval,
    p: Precision,
) -> Result<Interval> {
    if !c1.is_positive() {
        return Err(Error::InvalidArgument("c1 must be positive".into()));
    }
    let r = rank_upper_bound(g as u64, deg_l_q as u64, deg_l_k as u64, omega1 as u64, rho as u64);
    let factor = &Interval::int(1, p) + &(&Interval::int(2, p) / &c1.sqrt());
    Ok(&Interval::int(t, p) + &(&factor * &Interval::int(r, p)))
}

/// Numeric inputs of the counting constants; curve-free so general field
/// degrees can be evaluated.
#[derive(Clone, Debug)]
pub struct CountingInputs {
    pub t: u32,
    pub n: u32,
    pub g: u32,
    pub deg_l_q: u32,
    pub rho: u32,
    pub nu: Interval,
}

/// The constants of the counting theorem for one curve and one prime.
#[derive(Clone, Debug)]
pub struct CountingConstants {
    pub c2: Interval,
    pub c3: Interval,
    pub c4: Interval,
    pub c5: Interval,
    pub c6: Interval,
    pub c7: Interval,
    pub c8: Interval,
    pub c9: Interval,
    pub c10: Interval,
    pub c11: Interval,
    pub alpha_l: Interval,
    pub beta_l: Interval,
    pub c1_big: Interval,
    pub c2_big: Interval,
    pub c: Interval,
    pub d: Interval,
    pub c_prime: Interval,
}

pub fn assemble_counting(inp: &CountingInputs, p: Precision) -> CountingConstants {
    let int = |v: u64| Interval::int(v, p);
    let n = int(inp.n as u64);
    let l = int(inp.deg_l_q as u64);
    let rho = int(inp.rho as u64);
    let two_rho = &int(2) * &rho;

    let c2 = &int(2 * inp.g as u64) * &(&(&(&int(2) * &l) + &(&(&int(RANK_COEFF as u64) * &l) * &n)) + &rho);
    let c3 = &int(PETSCHE_C3) * &n.powi(3);
    let c4 = &int(PETSCHE_C4 as u64) * &n;
    let c5 = &c3 * &c4.powi(2);
    let c6 = &(&int(8) * &n) * &c5.sqrt();
    let c6_4n4 = &c6 * &(&int(4) * &n).powi(4);
    let c7 = &c6_4n4 / &Interval::ln2(p).powi(5);
    let c8 = int(5);
    let c9 = c6_4n4.powf(&Interval::rational(&Rational::from((1, 5)), p));
    let c10 = &int(5) * &(&(&int(6) * &l) + &two_rho);
    let inv_log13 = int(13).ln().recip();
    let c11 = &c2 * &(&int(1) + &inv_log13);
    let alpha_l = &(&int(30) * &l) + &two_rho;
    let beta_l = &(&int(4) * &l) + &two_rho;

    let t = int(inp.t as u64);
    let c1_big = &t + &(&(&c7 + &c8) * &alpha_l);
    let c2_big = &t + &(&c10 * &c11);
    let c = c1_big.max(&c2_big);
    let d = &(&(&int(3) * &inp.nu) + &(&(&int(7) * &n) * &Interval::ln2(p))) / &int(2);
    let c_prime = &(&d + &int(1)) * &c;
    CountingConstants {
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c10,
        c11,
        alpha_l,
        beta_l,
        c1_big,
        c2_big,
        c,
        d,
        c_prime,
    }
}

/// Every explicit constant for one (curve, p) pair.
#[derive(Clone, Debug)]
pub struct ConstantsReport {
    pub curve_id: String,
    pub p: u32,
    pub t: u32,
    pub n: u32,
    pub g: u32,
    pub deg_l_q: u32,
    pub deg_l_k: u32,
    pub rho: u32,
    pub rho_is_exact: bool,
    pub torsion_field_source: Source,
    pub omega1: u32,
    pub sigma: Interval,
    pub lambda_disc: Interval,
    pub lambda_cond: Interval,
    pub h0: Interval,
    pub faltings: f64,
    pub petsche_lower: Interval,
    pub gr_lower: Interval,
    pub rank_bound: u64,
    pub abelian_c: Interval,
    pub nu: Interval,
    pub k: CountingConstants,
    pub precision: Precision,
}

fn disc_logs(c: &CurveModel, p: Precision) -> Result<(Interval, Interval)> {
    if *c.conductor() == 1 {
        return Err(Error::TrivialConductor);
    }
    let lam = Interval::int(Integer::from(c.minimal_discriminant().abs_ref()), p).ln();
    let lam_n = Interval::int(c.conductor().clone(), p).ln();
    Ok((lam, lam_n))
}

/// `σ = log|Δ_min| / log N`.
pub fn szpiro_interval(c: &CurveModel, p: Precision) -> Result<Interval> {
    let (lam, lam_n) = disc_logs(c, p)?;
    Ok(&lam / &lam_n)
}

/// `H₀ = |Δ_min|^{1/4n}`.
pub fn h0(c: &CurveModel, n: u32, p: Precision) -> Interval {
    let dm = Interval::int(Integer::from(c.minimal_discriminant().abs_ref()), p);
    dm.powf(&Interval::rational(&Rational::from((1, 4 * n)), p))
}

/// Petsche's bound for a curve, with `λ = log|Δ_min|`.
pub fn petsche_for_curve(c: &CurveModel, p: Precision) -> Result<Interval> {
    let (lam, lam_n) = disc_logs(c, p)?;
    Ok(petsche_lower_bound(&lam, &(&lam / &lam_n), 1, p))
}

/// Gaudron–Rémond bound for a single curve with its stable Faltings height.
pub fn gr_for_curve(c: &CurveModel, p: Precision) -> Result<Interval> {
    let hf = faltings_height(c)?;
    Ok(gr_lower_bound(1, 1, &Interval::f64_with_error(hf, FALTINGS_ERR, p), p))
}

pub fn counting_constants(c: &CurveModel, tfd: &TorsionFieldData, p: u32, prec: Precision) -> Result<ConstantsReport> {
    if tfd.p != p {
        return Err(Error::InvalidArgument(format!("torsion field data is for p = {}, not {p}", tfd.p)));
    }
    let (lambda_disc, lambda_cond) = disc_logs(c, prec)?;
    let tors = c.torsion();
    if !tors.has_p_torsion(p) {
        return Err(Error::NoRationalTorsion(p as u64));
    }
    let sigma = &lambda_disc / &lambda_cond;
    let z = zimmer_d(c, 1);
    let nu = Interval::f64_with_error(z.nu, 1e-13 * z.nu.abs(), prec);
    let inputs = CountingInputs { t: tors.order, n: 1, g: 1, deg_l_q: tfd.degree_over_q, rho: tfd.rho_p, nu: nu.clone() };
    let k = assemble_counting(&inputs, prec);
    let hf = faltings_height(c)?;
    let gr = gr_lower_bound(1, 1, &Interval::f64_with_error(hf, FALTINGS_ERR, prec), prec);
    let omega1 = c.omega1() as u32;
    let rank_bound = rank_upper_bound(1, tfd.degree_over_q as u64, tfd.degree_over_k as u64, omega1 as u64, tfd.rho_p as u64);
    let abelian_c = abelian_counting_constant(tors.order, 1, tfd.degree_over_q, tfd.degree_over_k, omega1, tfd.rho_p, &gr, prec)?;
    Ok(ConstantsReport {
        curve_id: c.id(),
        p,
        t: tors.order,
        n: 1,
        g: 1,
        deg_l_q: tfd.degree_over_q,
        deg_l_k: tfd.degree_over_k,
        rho: tfd.rho_p,
        rho_is_exact: tfd.rho_is_exact,
        torsion_field_source: tfd.source,
        omega1,
        petsche_lower: petsche_lower_bound(&lambda_disc, &sigma, 1, prec),
        sigma,
        lambda_disc,
        lambda_cond,
        h0: h0(c, 1, prec),
        faltings: hf,
        gr_lower: gr,
        rank_bound,
        abelian_c,
        nu,
        k,
        precision: prec,
    })
}

impl ConstantsReport {
    /// `max(e^e, H₀)`.
    pub fn threshold(&self) -> Interval {
        Interval::e(self.precision).exp().max(&self.h0)
    }

    /// `c₂ log B / log log B`, valid for `B ≥ max(e^e, H₀)`.
    pub fn rank_bound_in_b(&self, b: f64) -> Result<Interval> {
        let th = self.threshold();
        if !(b >= th.hi_f64()) {
            return Err(Error::BelowThreshold { b, threshold: th.hi_f64() });
        }
        let lb = Interval::f64(b, self.precision).ln();
        Ok(&(&self.k.c2 * &lb) / &lb.ln())
    }

    /// `log max φ` on `[13, α(B)]` with `γ = c₉ log B`, paired with the
    /// ceiling `(1 + 1/log 13) α(B)`, where `α(B) = c₂ log B / log log B`.
    pub fn phi_check(&self, b: f64) -> Result<(Interval, Interval)> {
        let p = self.precision;
        let alpha = self.rank_bound_in_b(b)?;
        let gamma = (&self.k.c9 * &Interval::f64(b, p).ln()).hi_f64();
        let m = phi_max(gamma, 13.0, alpha.hi_f64(), p)?;
        let one = Interval::int(1, p);
        let factor = &one + &Interval::int(13, p).ln().recip();
        Ok((m.log_value, &alpha * &factor))
    }

    pub fn entries(&self) -> Vec<ReportEntry> {
        use Side::*;
        let ex = |name, v: u64, formula| ReportEntry {
            name,
            value: v.to_string(),
            side: Exact,
            formula,
            flags: Vec::new(),
        };
        let k = &self.k;
        let mut out = vec![
            ex("t", self.t as u64, "#E_tors(Q)"),
            ex("n", self.n as u64, "[K:Q]"),
            ex("g", self.g as u64, "dimension"),
            ex("degL_Q", self.deg_l_q as u64, "[L:Q], L = Q(E[p])"),
            ex("degL_K", self.deg_l_k as u64, "[L:K]"),
            ex("rho", self.rho as u64, "rho(Cl_L[p])"),
            ex("omega1", self.omega1 as u64, "omega_1(conductor)"),
            entry("sigma", &self.sigma, Upper, "log|Delta_min| / log N"),
            entry("lambda_disc", &self.lambda_disc, Lower, "log|N(Delta_min)|"),
            entry("lambda_cond", &self.lambda_cond, Lower, "log|N(conductor)|"),
            entry("H0", &self.h0, Upper, "|N(Delta_min)|^(1/(4n))"),
            entry("petsche_lower", &self.petsche_lower, Lower, "lambda / (1e15 n^3 sigma^6 log^2(104613 n sigma^2))"),
            entry("gr_lower", &self.gr_lower, Lower, "n ((6g)^8 n max{1, h_F, log n})^(-2g)"),
            ex("rank_bound", self.rank_bound, "2g(2[L:Q] + [L:K] omega_1 + rho)"),
            entry("abelian_C", &self.abelian_c, Upper, "t + (1 + 2/sqrt(c1)) 2g(2[L:Q] + [L:K] omega_1 + rho)"),
            entry("alphaL", &k.alpha_l, Exact, "30[L:Q] + 2 rho"),
            entry("betaL", &k.beta_l, Exact, "4[L:Q] + 2 rho"),
            entry("c2", &k.c2, Upper, "2g(2[L:Q] + 221456 [L:Q][K:Q] + rho)"),
            entry("c3", &k.c3, Upper, "1e15 n^3"),
            entry("c4", &k.c4, Upper, "104613 n"),
            entry("c5", &k.c5, Upper, "c3 c4^2"),
            entry("c6", &k.c6, Upper, "8 n sqrt(c5)"),
            entry("c7", &k.c7, Upper, "c6 (4n)^4 / (log 2)^5"),
            entry("c8", &k.c8, Exact, "5"),
            entry("c9", &k.c9, Upper, "(c6 (4n)^4)^(1/5)"),
            entry("c10", &k.c10, Upper, "5(6[L:Q] + 2 rho)"),
            entry("c11", &k.c11, Upper, "c2 (1 + 1/log 13)"),
            entry("C1", &k.c1_big, Upper, "t + (c7 + c8)(30[L:Q] + 2 rho)"),
            entry("C2", &k.c2_big, Upper, "t + c10 c11"),
            entry("C", &k.c, Upper, "max(C1, C2)"),
            entry("nu", &self.nu, Upper, "sum over places of max(0, -v(a)/2, -v(b)/3)"),
            entry("d", &k.d, Upper, "(3 nu + 7 n log 2) / 2"),
            entry("Cprime", &k.c_prime, Upper, "(d + 1) C"),
        ];
        let mut flags = Vec::new();
        if self.torsion_field_source == Source::External {
            flags.push("external".to_string());
        }
        if !self.rho_is_exact {
            flags.push("rho_upper_bound".to_string());
        }
        if !flags.is_empty() {
            for e in out.iter_mut() {
                if matches!(e.name, "rho" | "rank_bound" | "abelian_C" | "alphaL" | "betaL" | "c2" | "c10" | "c11" | "C1" | "C2" | "C" | "Cprime") {
                    e.flags = flags.clone();
                }
            }
        }
        out.push(ReportEntry {
            name: "h_F",
            value: format!("{:.12}", self.faltings),
            side: Exact,
            formula: "stable Faltings height",
            flags: vec![format!("abs_err<={FALTINGS_ERR:e}")],
        });
        out
    }

    /// One constant per line: `name = value | formula | side | flags`.
    pub fn to_key_value(&self) -> String {
        let mut s = format!("curve = {}\np = {}\nprecision_digits = {}\n", self.curve_id, self.p, self.precision.decimal_digits());
        for e in self.entries() {
            let side = match e.side {
                Side::Upper => "upper",
                Side::Lower => "lower",
                Side::Exact => "exact",
            };
            s.push_str(&format!("{} = {} | {} | {} | {}\n", e.name, e.value, e.formula, side, e.flags.join(",")));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "curve": self.curve_id,
            "p": self.p,
            "precision_digits": self.precision.decimal_digits(),
            "constants": self.entries(),
        })
    }
}

/// Product-of-curves lower bound: `C_{A,1} / (10¹⁵ n³ C_{A,2}⁶ log²(104613 n C_{A,2}²))`.
pub fn product_lower_bound(lambdas: &[Interval], sigmas: &[Interval], n: u32, p: Precision) -> Result<Interval> {
    if lambdas.is_empty() || lambdas.len() != sigmas.len() {
        return Err(Error::InvalidArgument("need equal-length nonempty lists".into()));
    }
    let ca1 = lambdas.iter().skip(1).fold(lambdas[0].clone(), |m, x| m.min(x));
    let ca2 = sigmas.iter().skip(1).fold(sigmas[0].clone(), |m, x| m.max(x));
    Ok(petsche_lower_bound(&ca1, &ca2, n, p))
}

pub fn product_lower_for_curves(curves: &[CurveModel], p: Precision) -> Result<Interval> {
    let mut lam = Vec::new();
    let mut sig = Vec::new();
    for c in curves {
        let (l, ln) = disc_logs(c, p)?;
        sig.push(&l / &ln);
        lam.push(l);
    }
    product_lower_bound(&lam, &sig, 1, p)
}

/// `(1/(c(c+1)²)) / (D log D)^{2g}`.
pub fn lehmer_bound(c: f64, d: u64, g: u32, p: Precision) -> Result<Interval> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("c must be positive".into()));
    }
    if d < 3 {
        return Err(Error::InvalidArgument(format!("D = {d} must be at least 3")));
    }
    let ci = Interval::f64(c, p);
    let cc = (&ci * &(&ci + &Interval::int(1, p)).powi(2)).recip();
    let di = Interval::int(d, p);
    let den = (&di * &di.ln()).powi(2 * g as i32);
    Ok(&cc / &den)
}

#[derive(Clone, Debug)]
pub struct BoundedDegree {
    /// Smallest admissible `c`, enclosed by the final bisection bracket.
    pub c: Interval,
    /// `1/c⁴` evaluated at the admissible end of the bracket.
    pub big_c: Interval,
}

/// Minimal `c ≥ max(c0, (17f)^{2/3}, e²)` with `2√c/(3 log c) > f^{g+1/2} (log f)^g`.
pub fn bounded_degree_constant(c0: f64, f: u32, g: u32, p: Precision) -> Result<BoundedDegree> {
    if !(c0 > 0.0) || f < 2 || g == 0 {
        return Err(Error::InvalidArgument("need c0 > 0, f >= 2, g >= 1".into()));
    }
    let bits = p.bits();
    let fl = Float::with_val(bits, f);
    let target = Float::with_val(bits, fl.pow_ref_f(g as f64 + 0.5)) * Float::with_val(bits, fl.ln_ref()).pow_u(g);
    let phi = |c: &Float| -> Float {
        let num = Float::with_val(bits, c.sqrt_ref()) * 2u32;
        let den = Float::with_val(bits, c.ln_ref()) * 3u32;
        num / den
    };
    let floor17 = Float::with_val(bits, 17 * f).pow_ref_f(2.0 / 3.0);
    let e2 = Float::with_val(bits, 2).exp();
    let mut lo = Float::with_val(bits, c0).max(&floor17).max(&e2);
    if phi(&lo) > target {
        let c = Interval::new(lo.clone(), lo.clone());
        return Ok(BoundedDegree { big_c: c.powi(4).recip(), c });
    }
    let mut hi = Float::with_val(bits, &lo * 2u32);
    let mut guard = 0;
    while phi(&hi) <= target {
        hi *= 2u32;
        guard += 1;
        if guard > 4096 {
            return Err(Error::NonConvergent("bounded-degree bracket".into()));
        }
    }
    for _ in 0..(bits + 64) {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if phi(&mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = Interval::new(lo, hi.clone());
    let at_hi = Interval::new(hi.clone(), hi);
    Ok(BoundedDegree { big_c: at_hi.powi(4).recip(), c })
}

trait PowF {
    fn pow_ref_f(&self, e: f64) -> Float;
    fn pow_u(self, e: u32) -> Float;
}

impl PowF for Float {
    fn pow_ref_f(&self, e: f64) -> Float {
        let ln = Float::with_val(self.prec(), self.ln_ref());
        Float::with_val(self.prec(), ln * e).exp()
    }
    fn pow_u(self, e: u32) -> Float {
        let p = self.prec();
        let mut acc = Float::with_val(p, 1);
        for _ in 0..e {
            acc *= &self;
        }
        acc
    }
}

/// Minimal integer `M ≥ 3` with `D^ε ≥ (log D)^{2g}` for every integer `D ≥ M`.
pub fn epsilon_threshold(epsilon: f64, g: u32, p: Precision) -> Result<Integer> {
    if !(epsilon > 0.0) || !epsilon.is_finite() || g == 0 {
        return Err(Error::InvalidArgument("need epsilon > 0 and g >= 1".into()));
    }
    let two_g = 2.0 * g as f64;
    // work in u = log D, where F(u) = ε u − 2g log u is convex with minimum at 2g/ε
    let ustar = two_g / epsilon;
    let f64_f = |u: f64| epsilon * u - two_g * u.ln();
    let ln3 = 3f64.ln();
    let three = Integer::from(3);
    if ustar <= ln3 {
        if f64_f(ln3) > 1e-9 {
            return Ok(three);
        }
    } else if f64_f(ustar) > 1e-9 {
        return Ok(three);
    }
    // upper root estimate in doubles to size the working precision
    let mut hi = ustar.max(ln3) * 2.0 + 2.0;
    while f64_f(hi) < 0.0 {
        hi *= 2.0;
    }
    let bits = p.bits() + 2 * (hi / std::f64::consts::LN_2).ceil() as u32 + 64;
    let eps = Float::with_val(bits, epsilon);
    let fd = |d: &Float| -> Float {
        let l = Float::with_val(bits, d.ln_ref());
        let ll = Float::with_val(bits, l.ln_ref());
        Float::with_val(bits, &eps * &l) - Float::with_val(bits, ll * two_g)
    };
    let mut lo = Float::with_val(bits, ustar.max(ln3)).exp();
    let mut hi_f = Float::with_val(bits, hi).exp();
    for _ in 0..(2 * bits) {
        let mid = Float::with_val(bits, &lo + &hi_f) / 2u32;
        if mid == lo || mid == hi_f {
            break;
        }
        if fd(&mid).is_sign_negative() {
            lo = mid;
        } else {
            hi_f = mid;
        }
    }
    let to_f = |m: &Integer| Float::with_val(bits, m);
    let mut m = Float::with_val_round(bits, &lo, Round::Up).0.ceil().to_integer().expect("finite");
    m = m.max(three.clone());
    let mut guard = 0;
    while fd(&to_f(&m)).is_sign_negative() {
        m += 1;
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::NonConvergent("epsilon threshold upward scan".into()));
        }
    }
    while m > 3 && !fd(&to_f(&Integer::from(&m - 1u32))).is_sign_negative() {
        m -= 1;
        guard += 1;
        if guard > 2_000_000 {
            return Err(Error::NonConvergent("epsilon threshold downward scan".into()));
        }
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct PhiMax {
    pub xstar: f64,
    /// Enclosure of `max x(log γ − log(x log x))` over the window, i.e. `log φ`.
    pub log_value: Interval,
}

/// Maximum of `φ(x) = (γ/(x log x))^x` on `[lo, hi]`, located by the sign of
/// `log γ − log(x log x) − 1 − 1/log x`, which decreases strictly in `x`.
pub fn phi_max(gamma: f64, lo: f64, hi: f64, p: Precision) -> Result<PhiMax> {
    if !(gamma > 0.0) || !(lo >= 13.0) || !(hi > lo) || hi > PHI_MAX_CAP {
        return Err(Error::InvalidArgument(format!("phi_max needs gamma > 0, 13 <= lo < hi <= {PHI_MAX_CAP:e}")));
    }
    let bits = p.bits();
    let lg = Float::with_val(bits, gamma).ln();
    let deriv = |x: &Float| -> Float {
        let lx = Float::with_val(bits, x.ln_ref());
        let xlx = Float::with_val(bits, x * &lx);
        Float::with_val(bits, &lg - xlx.ln()) - 1u32 - lx.recip()
    };
    let mut a = Float::with_val(bits, lo);
    let mut b = Float::with_val(bits, hi);
    let (xa, xb) = if !deriv(&a).is_sign_positive() {
        (a.clone(), a)
    } else if !deriv(&b).is_sign_negative() {
        (b.clone(), b)
    } else {
        for _ in 0..(bits + 64) {
            let mid = Float::with_val(bits, &a + &b) / 2u32;
            if mid == a || mid == b {
                break;
            }
            if deriv(&mid).is_sign_positive() {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a, b)
    };
    let x = Interval::new(xa.clone(), xb);
    let lgi = Interval::f64(gamma, p).ln();
    let v = &x * &(&lgi - &(&x * &x.ln()).ln());
    Ok(PhiMax { xstar: xa.to_f64(), log_value: v })
}

/// The ceiling exponent `C log B / log log B` of `B^{C/log log B}`, in log form.
pub fn log_ceiling(c: &Interval, b: f64, p: Precision) -> Interval {
    let lb = Interval::f64(b, p).ln();
    &(c * &lb) / &lb.ln()
}

/// `π(m) ≥ m / log m`.
pub fn check_prime_counting(m: u64) -> Result<bool> {
    let pi = crate::arith::prime_pi(m as f64)?;
    Ok(pi as f64 * (m as f64).ln() >= m as f64)
}

/// `p(r) ≥ r^r`, with `p(r)` the product of the first `r` primes.
pub fn check_primorial(r: usize) -> Result<bool> {
    use rug::ops::Pow;
    let pr = crate::arith::primorial(r)?;
    Ok(pr >= Integer::from(r).pow(r as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::build_curve_i64;
    use crate::fields::torsion_field;

    fn prec() -> Precision {
        Precision::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn petsche_examples() {
        let p = prec();
        let v = petsche_lower_bound(&Interval::int(64, p).ln(), &Interval::rational(&Rational::from((6, 5)), p), 1, p);
        assert!(rel(v.mid_f64(), 9.798113443262411e-18) < 1e-12);
        let w = petsche_lower_bound(&Interval::ln2(p), &Interval::int(1, p), 1, p);
        assert!(rel(w.mid_f64(), 5.188697406995462e-18) < 1e-12);
        let w2 = petsche_lower_bound(&(&Interval::ln2(p) * &Interval::int(2, p)), &Interval::int(1, p), 1, p);
        assert!(rel(w2.mid_f64(), 2.0 * w.mid_f64()) < 1e-14);
    }

    #[test]
    fn gr_examples() {
        let p = prec();
        let v = gr_lower_bound(1, 1, &Interval::f64(0.5, p), p);
        assert!(rel(v.mid_f64(), 1.0 / 1679616f64.powi(2)) < 1e-12);
        let e = gr_lower_bound(1, 1, &Interval::e(p), p);
        assert!(rel(e.mid_f64(), 4.7972354029501235e-14) < 1e-12);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_upper_bound(1, 1, 1, 1, 0), 6);
        assert_eq!(rank_upper_bound(1, 1, 1, 2, 0), 8);
        assert_eq!(rank_upper_bound(1, 1, 1, 0, 0), 4);
    }

    #[test]
    fn constants_for_minus1_0() {
        let p = prec();
        let c = build_curve_i64(-1, 0).unwrap();
        let tfd = torsion_field(&c, 2).unwrap();
        let r = counting_constants(&c, &tfd, 2, p).unwrap();
        assert!(rel(r.k.c1_big.mid_f64(), 1.270309536328272e18) < 1e-12);
        assert!(rel(r.k.c2_big.mid_f64(), 18467890.373851478) < 1e-12);
        assert!(rel(r.k.c11.mid_f64(), 615596.2124617159) < 1e-12);
        assert!(rel(r.k.c10.mid_f64(), 30.0) < 1e-15);
        assert!(rel(r.k.d.mid_f64(), 2.4260151319598084) < 1e-14);
        assert!(rel(r.k.c_prime.mid_f64(), 4.352099693733508e18) < 1e-12);
        assert_eq!(r.rank_bound, 6);
        assert!(r.k.c.lo_f64() >= r.t as f64 && r.k.c_prime.lo_f64() >= r.k.c.hi_f64());
        assert!(r.k.c1_big.width() / r.k.c1_big.mid_f64() < 1e-40);
        let kv = r.to_key_value();
        assert!(kv.lines().any(|l| l.starts_with("C1 = 127030953632827")));
    }

    #[test]
    fn abelian_example() {
        let p = prec();
        let c1 = Interval::f64(3.5447e-13, p);
        let v = abelian_counting_constant(4, 1, 1, 1, 1, 0, &c1, p).unwrap();
        assert!(rel(v.mid_f64(), 2.0156e7) < 1e-3);
        let big = abelian_counting_constant(4, 1, 1, 1, 1, 0, &Interval::f64(1e12, p), p).unwrap();
        assert!(rel(big.mid_f64(), 10.0) < 0.01);
    }

    #[test]
    fn rank_in_b_for_minus25_0() {
        let p = prec();
        let c = build_curve_i64(-25, 0).unwrap();
        let tfd = torsion_field(&c, 2).unwrap();
        let r = counting_constants(&c, &tfd, 2, p).unwrap();
        let v = r.rank_bound_in_b(1e6).unwrap();
        assert!(rel(v.mid_f64(), 2330386.7456353265) < 1e-12);
        assert!(matches!(r.rank_bound_in_b(10.0), Err(Error::BelowThreshold { .. })));
        let one = build_curve_i64(0, 0);
        assert!(one.is_err());
    }

    #[test]
    fn lehmer_examples() {
        let p = prec();
        let v = lehmer_bound(1.0, 3, 1, p).unwrap();
        assert!(rel(v.mid_f64(), 0.25 / (3.0 * 3f64.ln()).powi(2)) < 1e-12);
        assert!((v.mid_f64() - 0.02302).abs() < 1e-5);
        assert!(lehmer_bound(1.0, 2, 1, p).is_err());
        let a = lehmer_bound(1.0, 10, 1, p).unwrap();
        assert!(a.hi_f64() < v.lo_f64());
    }

    #[test]
    fn bounded_degree_examples() {
        let p = prec();
        let b2 = bounded_degree_constant(1.0, 2, 1, p).unwrap();
        assert!(rel(b2.c.mid_f64(), 271.6399904342235) < 1e-12);
        let b3 = bounded_degree_constant(1.0, 3, 1, p).unwrap();
        assert!(rel(b3.c.mid_f64(), 5420.255978857238) < 1e-12);
        assert!(b3.c.lo_f64() >= 51f64.powf(2.0 / 3.0));
        assert!(b2.big_c.hi_f64() <= 1.0);
    }

    #[test]
    fn epsilon_examples() {
        let p = prec();
        assert_eq!(epsilon_threshold(0.1, 1, p).unwrap().to_string(), "1214444953114284469304393367806859112537");
        assert_eq!(epsilon_threshold(0.5, 1, p).unwrap(), 5504);
        assert_eq!(epsilon_threshold(1.0, 1, p).unwrap(), 3);
        assert_eq!(epsilon_threshold(4.0, 2, p).unwrap(), 3);
    }

    #[test]
    fn phi_max_example() {
        let p = prec();
        let gamma = 13.0 * 13f64.ln() * std::f64::consts::E.powi(2) * 20.0;
        let r = phi_max(gamma, 13.0, 400.0, p).unwrap();
        assert!((r.xstar - 270.73039).abs() < 1e-2);
        assert!(rel(r.log_value.mid_f64(), 319.063809745674) < 1e-9);
        let small = phi_max(10.0, 13.0, 20.0, p).unwrap();
        assert_eq!(small.xstar, 13.0);
    }

    #[test]
    fn product_examples() {
        let p = prec();
        let a = build_curve_i64(-1, 0).unwrap();
        let b = build_curve_i64(-25, 0).unwrap();
        let single = product_lower_for_curves(std::slice::from_ref(&a), p).unwrap();
        let alone = petsche_for_curve(&a, p).unwrap();
        assert_eq!(single, alone);
        let twice = product_lower_for_curves(&[a.clone(), a.clone()], p).unwrap();
        assert_eq!(twice, alone);
        let mixed = product_lower_for_curves(&[a, b], p).unwrap();
        assert!(rel(mixed.mid_f64(), 3.1526679039371247e-19) < 1e-12);
        assert!(product_lower_bound(&[], &[], 1, p).is_err());
    }
}
