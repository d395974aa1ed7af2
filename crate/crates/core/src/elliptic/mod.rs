//! Elliptic curves `y^2 = x^3 + ax + b` over the rationals.

mod tate;
mod torsion;

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::arith::{self, Factorization};
use crate::{Error, Result};

pub use tate::{Kodaira, LongModel};
pub use torsion::{point_order, TorsionData};

/// Local reduction data at one prime dividing the discriminant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalReduction {
    #[serde(serialize_with = "ser_integer")]
    pub prime: Integer,
    pub kodaira: Kodaira,
    pub conductor_exponent: u32,
    pub min_disc_valuation: u32,
    pub tamagawa: u32,
}

pub(crate) fn ser_integer<S: serde::Serializer>(
    n: &Integer,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

#[derive(Clone, Debug)]
pub struct CurveModel {
    a: Integer,
    b: Integer,
    discriminant: Integer,
    local_data: Vec<LocalReduction>,
    minimal_discriminant: Integer,
    conductor: Integer,
    minimal_model: LongModel,
}

impl PartialEq for CurveModel {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}

impl Eq for CurveModel {}

/// Builds the curve and runs Tate's algorithm at every prime dividing the discriminant.
pub fn build_curve(a: &Integer, b: &Integer) -> Result<CurveModel> {
    let disc = short_discriminant(a, b);
    if disc == 0 {
        return Err(Error::Singular);
    }
    let fact = arith::factorize(&disc)?;
    CurveModel::with_factorization(a, b, &fact)
}

pub fn build_curve_i64(a: i64, b: i64) -> Result<CurveModel> {
    build_curve(&Integer::from(a), &Integer::from(b))
}

fn short_discriminant(a: &Integer, b: &Integer) -> Integer {
    let a3 = Integer::from(a * a) * a;
    let b2 = Integer::from(b * b);
    Integer::from(-16) * ((4 * a3) + (27 * b2))
}

impl CurveModel {
    /// Same as [`build_curve`], with the factorization of the discriminant
    /// supplied by the caller (for discriminants beyond the factoring cap).
    pub fn with_factorization(a: &Integer, b: &Integer, disc_factors: &Factorization) -> Result<Self> {
        let disc = short_discriminant(a, b);
        if disc == 0 {
            return Err(Error::Singular);
        }
        if disc_factors.value().clone().abs() != disc.clone().abs() {
            return Err(Error::InvalidArgument(
                "factorization does not match the discriminant".into(),
            ));
        }
        let mut model = LongModel::short(a, b);
        let mut local_data = Vec::new();
        let mut minimal_discriminant = Integer::from(disc.signum_ref());
        let mut conductor = Integer::from(1);
        for p in disc_factors.primes() {
            let out = tate::tate(&model, p);
            model = out.model;
            minimal_discriminant *= Integer::from(p.pow(out.min_disc_valuation));
            conductor *= Integer::from(p.pow(out.conductor_exponent));
            local_data.push(LocalReduction {
                prime: p.clone(),
                kodaira: out.kodaira,
                conductor_exponent: out.conductor_exponent,
                min_disc_valuation: out.min_disc_valuation,
                tamagawa: out.tamagawa,
            });
        }
        debug_assert_eq!(model.discriminant(), minimal_discriminant);
        Ok(CurveModel {
            a: a.clone(),
            b: b.clone(),
            discriminant: disc,
            local_data,
            minimal_discriminant,
            conductor,
            minimal_model: model,
        })
    }

    /// Clears denominators of rational `a, b` by the smallest `(u^4, u^6)` scaling.
    pub fn from_rational(a: &Rational, b: &Rational) -> Result<Self> {
        let mut u = Integer::from(1);
        let den = Integer::from(a.denom() * b.denom());
        let f = arith::factorize(&den)?;
        for p in f.primes() {
            let va = arith::padic_valuation(a, p)?.finite().unwrap_or(i64::MAX);
            let vb = arith::padic_valuation(b, p)?.finite().unwrap_or(i64::MAX);
            let need_a = if va < 0 { (-va + 3) / 4 } else { 0 };
            let need_b = if vb < 0 { (-vb + 5) / 6 } else { 0 };
            u *= Integer::from(p.pow(need_a.max(need_b) as u32));
        }
        let u4 = Integer::from((&u).pow(4));
        let u6 = Integer::from((&u).pow(6));
        let a2 = Rational::from(a * u4);
        let b2 = Rational::from(b * u6);
        debug_assert!(*a2.denom() == 1 && *b2.denom() == 1);
        build_curve(a2.numer(), b2.numer())
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }

    pub fn b(&self) -> &Integer {
        &self.b
    }

    /// `-16(4a^3 + 27b^2)` of the given model.
    pub fn discriminant(&self) -> &Integer {
        &self.discriminant
    }

    pub fn minimal_discriminant(&self) -> &Integer {
        &self.minimal_discriminant
    }

    pub fn conductor(&self) -> &Integer {
        &self.conductor
    }

    /// Reduction data at every prime dividing the discriminant of the given
    /// model, including primes where that model is merely non-minimal.
    pub fn local_data(&self) -> &[LocalReduction] {
        &self.local_data
    }

    pub fn local_at(&self, p: &Integer) -> Option<&LocalReduction> {
        self.local_data.iter().find(|l| l.prime == *p)
    }

    pub fn minimal_model(&self) -> &LongModel {
        &self.minimal_model
    }

    pub fn bad_primes(&self) -> impl Iterator<Item = &Integer> {
        self.local_data
            .iter()
            .filter(|l| l.conductor_exponent > 0)
            .map(|l| &l.prime)
    }

    /// Number of distinct primes dividing the conductor.
    pub fn omega1(&self) -> usize {
        self.bad_primes().count()
    }

    pub fn c4_minimal(&self) -> Integer {
        self.minimal_model.c4()
    }

    pub fn j_invariant(&self) -> Rational {
        let a3 = Integer::from((&self.a).pow(3));
        let num = Integer::from(6912 * &a3);
        let den = (4 * a3) + (27 * Integer::from((&self.b).pow(2)));
        Rational::from((num, den))
    }

    /// `log|Δ_min| / log N`.
    pub fn szpiro_ratio(&self) -> Result<f64> {
        if self.conductor == 1 {
            return Err(Error::TrivialConductor);
        }
        Ok(arith::ln_integer(&Integer::from(self.minimal_discriminant.abs_ref()))
            / arith::ln_integer(&self.conductor))
    }

    /// `"a,b"`
    pub fn id(&self) -> String {
        format!("{},{}", self.a, self.b)
    }

    pub fn contains(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Infinity => true,
            RationalPoint::Affine { x, y } => {
                let lhs = Rational::from(y * y);
                let rhs = Rational::from(x * x) * x + Rational::from(&self.a * x) + &self.b;
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => RationalPoint::Affine {
                x: x.clone(),
                y: Rational::from(-y),
            },
        }
    }

    pub fn add(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (RationalPoint::Infinity, _) => return q.clone(),
            (_, RationalPoint::Infinity) => return p.clone(),
            (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            if *y1 == Rational::from(-y2) {
                return RationalPoint::Infinity;
            }
            ((3 * Rational::from(x1 * x1)) + &self.a) / Rational::from(2 * y1)
        } else {
            Rational::from(y2 - y1) / Rational::from(x2 - x1)
        };
        let x3 = Rational::from(&lambda * &lambda) - x1 - x2;
        let y3 = lambda * Rational::from(x1 - &x3) - y1;
        RationalPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &RationalPoint) -> RationalPoint {
        self.add(p, p)
    }

    pub fn sub(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        self.add(p, &self.neg(q))
    }

    pub fn mul(&self, k: i64, p: &RationalPoint) -> RationalPoint {
        let mut base = if k < 0 { self.neg(p) } else { p.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = RationalPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    pub fn torsion(&self) -> TorsionData {
        torsion::torsion(self)
    }

    /// `y^2 = x^3 + a d^2 x + b d^3`.
    pub fn quadratic_twist(&self, d: &Integer) -> Result<CurveModel> {
        if *d == 0 || !arith::is_squarefree(d)? {
            return Err(Error::NotSquarefree(d.to_string()));
        }
        let d2 = Integer::from(d * d);
        let d3 = Integer::from(&d2 * d);
        build_curve(&(&self.a * d2), &(&self.b * d3))
    }

    /// Parses `"a,b"`.
    pub fn parse(s: &str) -> Result<CurveModel> {
        let (a, b) = parse_pair(s)?;
        build_curve(&a, &b)
    }
}

/// Integer (equivalently rational) roots of `x^3 + ax + b`, increasing.
pub fn cubic_integer_roots(a: &Integer, b: &Integer) -> Vec<Integer> {
    torsion::integer_roots(a, b)
}

pub(crate) fn parse_pair(s: &str) -> Result<(Integer, Integer)> {
    let mut it = s.split(',').map(str::trim);
    let bad = || Error::Parse(format!("expected \"a,b\", got {s:?}"));
    let a = it.next().ok_or_else(bad)?;
    let b = it.next().ok_or_else(bad)?;
    if it.next().is_some() {
        return Err(bad());
    }
    let a = Integer::from_str(a).map_err(|_| bad())?;
    let b = Integer::from_str(b).map_err(|_| bad())?;
    Ok((a, b))
}

/// A rational point, or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl RationalPoint {
    pub fn affine(x: impl Into<Rational>, y: impl Into<Rational>) -> Self {
        RationalPoint::Affine {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&Rational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { y, .. } => Some(y),
        }
    }

    /// Builds the point `(m/e^2, n/e^3)`.
    pub fn from_weighted(m: &Integer, e: &Integer, n: &Integer) -> Self {
        let e2 = Integer::from(e * e);
        let e3 = Integer::from(&e2 * e);
        RationalPoint::Affine {
            x: Rational::from((m.clone(), e2)),
            y: Rational::from((n.clone(), e3)),
        }
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Infinity => write!(f, "inf"),
            RationalPoint::Affine { x, y } => write!(f, "({x}:{y})"),
        }
    }
}

impl FromStr for RationalPoint {
    type Err = Error;

    /// Accepts `inf` or `x,y` / `(x:y)` with rational coordinates.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "O" {
            return Ok(RationalPoint::Infinity);
        }
        let t = t.trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = t.split([',', ':']).map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("bad point {s:?}")));
        }
        let x = Rational::from_str(parts[0]).map_err(|_| Error::Parse(format!("bad x in {s:?}")))?;
        let y = Rational::from_str(parts[1]).map_err(|_| Error::Parse(format!("bad y in {s:?}")))?;
        Ok(RationalPoint::Affine { x, y })
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> RationalPoint {
        RationalPoint::affine(x, y)
    }

    #[test]
    fn table_curves() {
        let e = build_curve_i64(-1, 0).unwrap();
        assert_eq!(*e.discriminant(), 64);
        assert_eq!(*e.minimal_discriminant(), 64);
        assert_eq!(*e.conductor(), 32);

        let e = build_curve_i64(0, 1).unwrap();
        assert_eq!(*e.discriminant(), -432);
        assert_eq!(*e.minimal_discriminant(), -432);
        assert_eq!(*e.conductor(), 36);

        let e = build_curve_i64(-25, 0).unwrap();
        assert_eq!(*e.discriminant(), 1_000_000);
        assert_eq!(*e.conductor(), 800);
        assert_eq!(e.omega1(), 2);
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(build_curve_i64(-3, 2).unwrap_err(), Error::Singular);
        assert_eq!(build_curve_i64(0, 0).unwrap_err(), Error::Singular);
    }

    #[test]
    fn two_torsion_sum() {
        let e = build_curve_i64(-1, 0).unwrap();
        assert_eq!(e.add(&pt(-1, 0), &pt(0, 0)), pt(1, 0));
        assert_eq!(e.add(&pt(1, 0), &RationalPoint::Infinity), pt(1, 0));
        assert_eq!(e.double(&pt(1, 0)), RationalPoint::Infinity);
    }

    #[test]
    fn doubling_on_congruent_curve() {
        let e = build_curve_i64(-25, 0).unwrap();
        let two_p = e.double(&pt(-4, 6));
        assert_eq!(
            two_p,
            RationalPoint::affine(Rational::from((1681, 144)), Rational::from((-62279, 1728)))
        );
        assert!(e.contains(&two_p));
        assert_eq!(e.mul(2, &pt(-4, 6)), two_p);
        assert_eq!(e.mul(-3, &pt(-4, 6)), e.neg(&e.mul(3, &pt(-4, 6))));
        assert_eq!(e.mul(0, &pt(-4, 6)), RationalPoint::Infinity);
    }

    #[test]
    fn twists() {
        let e = build_curve_i64(-1, 0).unwrap();
        let t = e.quadratic_twist(&Integer::from(-1)).unwrap();
        assert_eq!((t.a().to_i64(), t.b().to_i64()), (Some(-1), Some(0)));
        let e = build_curve_i64(0, 1).unwrap();
        let t = e.quadratic_twist(&Integer::from(2)).unwrap();
        assert_eq!((t.a().to_i64(), t.b().to_i64()), (Some(0), Some(8)));
        let e = build_curve_i64(-25, 0).unwrap();
        let t = e.quadratic_twist(&Integer::from(5)).unwrap();
        assert_eq!((t.a().to_i64(), t.b().to_i64()), (Some(-625), Some(0)));
        assert!(matches!(
            e.quadratic_twist(&Integer::from(12)),
            Err(Error::NotSquarefree(_))
        ));
    }

    #[test]
    fn rational_coefficients_are_cleared() {
        // a = -1/16 needs u = 2: (-1/16)*16 = -1
        let e = CurveModel::from_rational(&Rational::from((-1, 16)), &Rational::new()).unwrap();
        assert_eq!(*e.a(), -1);
        assert_eq!(*e.b(), 0);
    }

    #[test]
    fn szpiro_and_j() {
        let e = build_curve_i64(-1, 0).unwrap();
        assert!((e.szpiro_ratio().unwrap() - 1.2).abs() < 1e-12);
        assert_eq!(e.j_invariant(), 1728);
        let e = build_curve_i64(0, 1).unwrap();
        assert_eq!(e.j_invariant(), 0);
    }

    #[test]
    fn point_parsing() {
        let p: RationalPoint = "(1681/144:-62279/1728)".parse().unwrap();
        assert_eq!(p.to_string(), "(1681/144:-62279/1728)");
        let q: RationalPoint = "-4,6".parse().unwrap();
        assert_eq!(q, pt(-4, 6));
        assert_eq!("inf".parse::<RationalPoint>().unwrap(), RationalPoint::Infinity);
    }
}
