use rug::Integer;
use serde::Serialize;

use super::{CurveModel, RationalPoint};
use crate::arith::int_valuation;

/// The rational torsion subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionData {
    pub order: u32,
    /// one or two cyclic factor orders, the first dividing the second
    pub structure: Vec<u32>,
    /// every torsion point, infinity first
    pub points: Vec<RationalPoint>,
}

impl TorsionData {
    pub fn has_p_torsion(&self, p: u32) -> bool {
        p > 0 && self.order.is_multiple_of(p)
    }
}

const MAZUR_CAP: u32 = 12;

/// Order of `p` if it is at most 12, otherwise `None`.
pub fn point_order(c: &CurveModel, p: &RationalPoint) -> Option<u32> {
    let mut q = p.clone();
    for k in 1..=MAZUR_CAP {
        if q.is_infinity() {
            return Some(k);
        }
        q = c.add(&q, p);
    }
    None
}

pub(super) fn torsion(c: &CurveModel) -> TorsionData {
    let a = c.a();
    let b = c.b();
    // D = 4a^3 + 27b^2 = -disc/16; its primes are among those of the discriminant
    let d = Integer::from(c.discriminant() / -16i32);
    let mut ys = vec![Integer::new()];
    let mut half_powers: Vec<(Integer, u32)> = Vec::new();
    for l in c.local_data() {
        let v = int_valuation(&d, &l.prime).finite().unwrap_or(0) as u32;
        if v >= 2 {
            half_powers.push((l.prime.clone(), v / 2));
        }
    }
    let mut divs = vec![Integer::from(1)];
    for (p, e) in &half_powers {
        let mut next = Vec::new();
        for dv in &divs {
            let mut pk = Integer::from(1);
            for _ in 0..=*e {
                next.push(Integer::from(dv * &pk));
                pk *= p;
            }
        }
        divs = next;
    }
    ys.extend(divs);

    let mut points = vec![RationalPoint::Infinity];
    let mut two_torsion = 0u32;
    for y in &ys {
        let y2 = Integer::from(y * y);
        let c0 = Integer::from(b - &y2);
        for x in integer_roots(a, &c0) {
            let p = RationalPoint::affine(x.clone(), y.clone());
            if point_order(c, &p).is_none() {
                continue;
            }
            if *y == 0 {
                two_torsion += 1;
                points.push(p);
            } else {
                points.push(RationalPoint::affine(x.clone(), Integer::from(-y)));
                points.push(p);
            }
        }
    }
    points[1..].sort_by(|p, q| {
        let (px, py) = (p.x().unwrap(), p.y().unwrap());
        let (qx, qy) = (q.x().unwrap(), q.y().unwrap());
        px.cmp(qx).then(py.cmp(qy))
    });
    let order = points.len() as u32;
    let structure = if two_torsion == 3 {
        vec![2, order / 2]
    } else {
        vec![order]
    };
    TorsionData {
        order,
        structure,
        points,
    }
}

fn eval(a: &Integer, c: &Integer, x: &Integer) -> Integer {
    Integer::from(x * x) * x + Integer::from(a * x) + c
}

/// Integer roots of `x^3 + a x + c`, in increasing order.
pub(crate) fn integer_roots(a: &Integer, c: &Integer) -> Vec<Integer> {
    let bound = Integer::from(a.abs_ref()).max(Integer::from(c.abs_ref())) + 1u32;
    let mut roots = Vec::new();
    let mut check = |lo: Integer, hi: Integer, increasing: bool| {
        if lo > hi {
            return;
        }
        if let Some(r) = monotone_root(a, c, lo, hi, increasing) {
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    };
    if *a >= 0 {
        check(Integer::from(-&bound), bound, true);
    } else {
        // turning points at ±sqrt(-a/3)
        let k = (Integer::from(-a) / 3u32).sqrt();
        check(Integer::from(-&bound), Integer::from(-&k) - 1u32, true);
        check(Integer::from(-&k), k.clone(), false);
        check(k + 1u32, bound, true);
    }
    roots.sort();
    roots
}

fn monotone_root(a: &Integer, c: &Integer, mut lo: Integer, mut hi: Integer, increasing: bool) -> Option<Integer> {
    let sgn = |x: &Integer| {
        let v = eval(a, c, x);
        if increasing {
            v.cmp0()
        } else {
            v.cmp0().reverse()
        }
    };
    use std::cmp::Ordering::*;
    while lo < hi {
        let mid = Integer::from(&lo + &hi) >> 1u32;
        match sgn(&mid) {
            Equal => return Some(mid),
            Less => lo = mid + 1u32,
            Greater => hi = mid,
        }
    }
    (sgn(&lo) == Equal).then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::build_curve_i64;

    #[test]
    fn full_two_torsion() {
        let t = build_curve_i64(-1, 0).unwrap().torsion();
        assert_eq!(t.order, 4);
        assert_eq!(t.structure, vec![2, 2]);
        assert_eq!(
            t.points,
            vec![
                RationalPoint::Infinity,
                RationalPoint::affine(-1, 0),
                RationalPoint::affine(0, 0),
                RationalPoint::affine(1, 0),
            ]
        );
    }

    #[test]
    fn cyclic_six() {
        let c = build_curve_i64(0, 1).unwrap();
        let t = c.torsion();
        assert_eq!(t.order, 6);
        assert_eq!(t.structure, vec![6]);
        assert!(t.points.contains(&RationalPoint::affine(2, 3)));
        assert!(t.points.contains(&RationalPoint::affine(0, -1)));
        assert!(t.points.contains(&RationalPoint::affine(-1, 0)));
        for p in &t.points {
            assert_eq!(c.mul(6, p), RationalPoint::Infinity);
        }
        assert!(t.has_p_torsion(2) && t.has_p_torsion(3) && !t.has_p_torsion(5));
    }

    #[test]
    fn trivial_torsion() {
        let t = build_curve_i64(0, -2).unwrap().torsion();
        assert_eq!(t.order, 1);
        assert_eq!(t.structure, vec![1]);
    }

    #[test]
    fn cubic_roots() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let r = integer_roots(&Integer::from(-7), &Integer::from(6));
        assert_eq!(r, vec![Integer::from(-3), Integer::from(1), Integer::from(2)]);
        // x^3 - x
        let r = integer_roots(&Integer::from(-1), &Integer::new());
        assert_eq!(r, vec![Integer::from(-1), Integer::from(0), Integer::from(1)]);
        assert!(integer_roots(&Integer::new(), &Integer::from(2)).is_empty());
        // double root: (x-1)^2 (x+2) = x^3 - 3x + 2
        let r = integer_roots(&Integer::from(-3), &Integer::from(2));
        assert_eq!(r, vec![Integer::from(-2), Integer::from(1)]);
    }
}
