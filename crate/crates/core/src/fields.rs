//! The 2-torsion field of a curve and class groups of quadratic fields.

use std::collections::{BTreeMap, HashMap};

use rug::{Float, Integer};
use serde::Serialize;

use crate::arith;
use crate::elliptic::CurveModel;
use crate::{Error, Result};

pub const CLASS_GROUP_CAP: i64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Computed,
    External,
}

/// Data of `L = Q(E[p])` consumed by the rank and counting bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionFieldData {
    pub p: u32,
    pub degree_over_q: u32,
    pub degree_over_k: u32,
    pub defining_discriminant: Option<i64>,
    pub class_number: Option<u64>,
    pub rho_p: u32,
    pub rho_is_exact: bool,
    pub source: Source,
}

impl TorsionFieldData {
    pub fn external(p: u32, degree_over_q: u32, degree_over_k: u32, rho_p: u32) -> Self {
        TorsionFieldData {
            p,
            degree_over_q,
            degree_over_k,
            defining_discriminant: None,
            class_number: None,
            rho_p,
            rho_is_exact: false,
            source: Source::External,
        }
    }
}

/// Computes the `p`-torsion field data for `p = 2`; other primes need [`TorsionFieldData::external`].
pub fn torsion_field(c: &CurveModel, p: u32) -> Result<TorsionFieldData> {
    if p != 2 {
        return Err(Error::MissingTorsionFieldData(p as u64));
    }
    let roots = crate::elliptic::cubic_integer_roots(c.a(), c.b());
    match roots.len() {
        0 => Err(Error::NoRationalTorsion(2)),
        3 => Ok(TorsionFieldData {
            p,
            degree_over_q: 1,
            degree_over_k: 1,
            defining_discriminant: None,
            class_number: Some(1),
            rho_p: 0,
            rho_is_exact: true,
            source: Source::Computed,
        }),
        _ => {
            // x^3 + ax + b = (x - r)(x^2 + r x + r^2 + a)
            let r = &roots[0];
            let delta = (-3 * Integer::from(r * r)) - Integer::from(4 * c.a());
            let s = arith::squarefree_part(&delta)?;
            let disc = if s.mod_u(4) == 1 { s } else { s * 4u32 };
            let disc = disc
                .to_i64()
                .ok_or_else(|| Error::CapExceeded { what: "class group discriminant", cap: CLASS_GROUP_CAP.to_string() })?;
            let cg = quadratic_class_group(disc)?;
            Ok(TorsionFieldData {
                p,
                degree_over_q: 2,
                degree_over_k: 2,
                defining_discriminant: Some(disc),
                class_number: Some(cg.class_number),
                rho_p: cg.p_rank(p as u64),
                rho_is_exact: cg.exact,
                source: Source::Computed,
            })
        }
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let sf = |m: i64| arith::is_squarefree(&Integer::from(m)).unwrap_or(false);
    match d.rem_euclid(4) {
        1 => sf(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && sf(m)
        }
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroup {
    pub discriminant: i64,
    /// order of the (wide) class group
    pub class_number: u64,
    /// order of the narrow class group
    pub narrow_class_number: u64,
    /// invariant factors, largest first, empty for the trivial group
    pub structure: Vec<u64>,
    pub p_ranks: BTreeMap<u64, u32>,
    pub exact: bool,
}

impl ClassGroup {
    pub fn p_rank(&self, p: u64) -> u32 {
        self.p_ranks.get(&p).copied().unwrap_or(0)
    }
}

/// A primitive binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Form {
    a: i64,
    b: i64,
    c: i64,
}

fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, u, v) with u a + v b = g >= 0
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Dirichlet composition; the result is not reduced.
fn compose(f: Form, g: Form, disc: i64) -> Form {
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let d = disc as i128;
    let beta = (b1 + b2) / 2;
    let (e1, x1, y1) = xgcd(a1, a2);
    let (e, x2, y2) = xgcd(e1, beta);
    // u a1 + v a2 + w beta = e
    let (u, v, w) = (x2 * x1, x2 * y1, y2);
    let a3 = a1 * a2 / (e * e);
    let num = u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + d) / 2;
    debug_assert_eq!(num % e, 0);
    let m = 2 * a3.abs();
    let mut b3 = (num / e).rem_euclid(m);
    if b3 > a3.abs() {
        b3 -= m;
    }
    let c3 = (b3 * b3 - d) / (4 * a3);
    debug_assert_eq!(b3 * b3 - 4 * a3 * c3, d);
    Form {
        a: a3 as i64,
        b: b3 as i64,
        c: c3 as i64,
    }
}

fn reduce_definite(mut f: Form) -> Form {
    loop {
        if f.b > f.a || f.b <= -f.a {
            // normalize b into (-a, a]
            let two_a = 2 * f.a;
            let mut b = f.b.rem_euclid(two_a);
            if b > f.a {
                b -= two_a;
            }
            let disc = f.b * f.b - 4 * f.a * f.c;
            f = Form { a: f.a, b, c: (b * b - disc) / (4 * f.a) };
        }
        if f.a > f.c {
            f = Form { a: f.c, b: -f.b, c: f.a };
            continue;
        }
        if f.a == f.c && f.b < 0 {
            f.b = -f.b;
        }
        return f;
    }
}

struct Indefinite {
    d: i64,
    s: i64,
}

impl Indefinite {
    fn lt_sqrt(&self, x: i64) -> bool {
        x < 0 || (x as i128) * (x as i128) < self.d as i128
    }
    fn gt_sqrt(&self, x: i64) -> bool {
        x > 0 && (x as i128) * (x as i128) > self.d as i128
    }
    fn is_reduced(&self, f: Form) -> bool {
        let a = f.a.abs();
        f.b > 0 && self.lt_sqrt(f.b) && self.gt_sqrt(2 * a + f.b) && self.lt_sqrt(2 * a - f.b)
    }
    fn rho(&self, f: Form) -> Form {
        let c = f.c;
        let m = 2 * c.abs();
        let b = if self.gt_sqrt(c.abs()) {
            let mut b = (-f.b).rem_euclid(m);
            if b > c.abs() {
                b -= m;
            }
            b
        } else {
            self.s - (self.s + f.b).rem_euclid(m)
        };
        Form { a: c, b, c: (b * b - self.d) / (4 * c) }
    }
    fn reduce(&self, mut f: Form) -> Form {
        let mut guard = 0;
        while !self.is_reduced(f) {
            f = self.rho(f);
            guard += 1;
            assert!(guard < 10_000, "indefinite reduction did not terminate");
        }
        f
    }
    fn cycle(&self, f: Form) -> Vec<Form> {
        let mut out = vec![f];
        let mut g = self.rho(f);
        while g != f {
            out.push(g);
            g = self.rho(g);
        }
        out
    }
}

struct FormGroup {
    disc: i64,
    elements: Vec<Form>,
    index: HashMap<Form, usize>,
    identity: usize,
    indefinite: Option<Indefinite>,
    canon_of: HashMap<Form, Form>,
}

impl FormGroup {
    fn canonical(&self, f: Form) -> Form {
        match &self.indefinite {
            None => reduce_definite(f),
            Some(ind) => {
                let r = ind.reduce(f);
                self.canon_of[&r]
            }
        }
    }

    fn mul(&self, i: usize, j: usize) -> usize {
        let f = compose(self.elements[i], self.elements[j], self.disc);
        self.index[&self.canonical(f)]
    }

    fn order_mod(&self, g: usize, subgroup: &[usize]) -> u64 {
        let mut acc = g;
        let mut m = 1;
        while !subgroup.contains(&acc) {
            acc = self.mul(acc, g);
            m += 1;
        }
        m
    }
}

fn build_group(d: i64) -> FormGroup {
    if d < 0 {
        let n = -d;
        let mut elements = Vec::new();
        let mut a = 1i64;
        while 3 * a * a <= n {
            for b in (-a + 1)..=a {
                if (b - d).rem_euclid(2) != 0 {
                    continue;
                }
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || ((a == c || b.abs() == a) && b < 0) {
                    continue;
                }
                elements.push(Form { a, b, c });
            }
            a += 1;
        }
        elements.sort();
        let index: HashMap<Form, usize> = elements.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let b0 = d.rem_euclid(2);
        let id = reduce_definite(Form { a: 1, b: b0, c: (b0 * b0 - d) / 4 });
        FormGroup {
            disc: d,
            identity: index[&id],
            elements,
            index,
            indefinite: None,
            canon_of: HashMap::new(),
        }
    } else {
        let s = (d as f64).sqrt() as i64;
        let s = (s - 2..=s + 2).filter(|&x| x >= 0 && x * x <= d).max().unwrap();
        let ind = Indefinite { d, s };
        let mut reduced = Vec::new();
        for b in 1..=s {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let m = (d - b * b) / 4;
            for a in 1..=m {
                if m % a != 0 {
                    continue;
                }
                for sa in [a, -a] {
                    let f = Form { a: sa, b, c: -m / sa };
                    if ind.is_reduced(f) {
                        reduced.push(f);
                    }
                }
            }
        }
        reduced.sort();
        let mut canon_of = HashMap::new();
        let mut elements = Vec::new();
        for f in &reduced {
            if canon_of.contains_key(f) {
                continue;
            }
            let cyc = ind.cycle(*f);
            let rep = *cyc.iter().min().unwrap();
            for g in cyc {
                canon_of.insert(g, rep);
            }
            elements.push(rep);
        }
        elements.sort();
        let index: HashMap<Form, usize> = elements.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let b0 = d.rem_euclid(2);
        let mut grp = FormGroup {
            disc: d,
            identity: 0,
            elements,
            index,
            indefinite: Some(ind),
            canon_of,
        };
        let id = grp.canonical(Form { a: 1, b: b0, c: (b0 * b0 - d) / 4 });
        grp.identity = grp.index[&id];
        grp
    }
}

/// Invariant factors of a finite abelian group given the orders of its elements.
fn structure_from_orders(orders: &[u64]) -> Vec<u64> {
    let h = orders.len() as u64;
    let fh = arith::factorize(&Integer::from(h)).expect("nonzero");
    let mut per_prime: Vec<Vec<u32>> = Vec::new();
    let mut primes = Vec::new();
    for (p, e) in fh.factors() {
        let p = p.to_u64().unwrap();
        let mut ranks = vec![0u32];
        for k in 1..=*e {
            let pk = p.pow(k);
            let count = orders.iter().filter(|&&o| pk % o == 0).count() as u64;
            let mut r = 0;
            let mut c = count;
            while c > 1 {
                c /= p;
                r += 1;
            }
            ranks.push(r);
        }
        // number of cyclic factors of order >= p^k is ranks[k] - ranks[k-1]
        let mut exps = Vec::new();
        for k in (1..=*e as usize).rev() {
            let ge_k = ranks[k] - ranks[k - 1];
            let ge_k1 = if k < *e as usize { ranks[k + 1] - ranks[k] } else { 0 };
            for _ in 0..(ge_k - ge_k1) {
                exps.push(k as u32);
            }
        }
        primes.push(p);
        per_prime.push(exps);
    }
    let len = per_prime.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            primes
                .iter()
                .zip(&per_prime)
                .map(|(p, ex)| ex.get(i).map_or(1, |&e| p.pow(e)))
                .product()
        })
        .collect()
}

/// Class group of the quadratic field of fundamental discriminant `d`.
pub fn quadratic_class_group(d: i64) -> Result<ClassGroup> {
    if d.abs() > CLASS_GROUP_CAP {
        return Err(Error::CapExceeded { what: "class group discriminant", cap: CLASS_GROUP_CAP.to_string() });
    }
    if !is_fundamental_discriminant(d) {
        return Err(Error::NotFundamental(d));
    }
    let g = build_group(d);
    let narrow = g.elements.len() as u64;
    let mut kernel = vec![g.identity];
    if d > 0 {
        let b0 = d.rem_euclid(2);
        let neg = g.canonical(Form { a: -1, b: b0, c: (d - b0 * b0) / 4 });
        let k = g.index[&neg];
        if k != g.identity {
            kernel.push(k);
        }
    }
    // cosets of the kernel, represented by their smallest member
    let mut coset_reps = Vec::new();
    let mut seen = vec![false; g.elements.len()];
    for i in 0..g.elements.len() {
        if seen[i] {
            continue;
        }
        for &k in &kernel {
            seen[g.mul(i, k)] = true;
        }
        coset_reps.push(i);
    }
    let orders: Vec<u64> = coset_reps.iter().map(|&i| g.order_mod(i, &kernel)).collect();
    let structure: Vec<u64> = structure_from_orders(&orders).into_iter().filter(|&x| x > 1).collect();
    let mut p_ranks = BTreeMap::new();
    let h = orders.len() as u64;
    for (p, _) in arith::factorize(&Integer::from(h)).expect("nonzero").factors() {
        let p = p.to_u64().unwrap();
        let r = structure.iter().filter(|&&x| x % p == 0).count() as u32;
        p_ranks.insert(p, r);
    }
    Ok(ClassGroup {
        discriminant: d,
        class_number: h,
        narrow_class_number: narrow,
        structure,
        p_ranks,
        exact: true,
    })
}

/// Class number from the analytic class number formula, independent of forms.
pub fn class_number_analytic(d: i64) -> Result<u64> {
    if !is_fundamental_discriminant(d) {
        return Err(Error::NotFundamental(d));
    }
    if d.abs() > CLASS_GROUP_CAP {
        return Err(Error::CapExceeded { what: "class group discriminant", cap: CLASS_GROUP_CAP.to_string() });
    }
    let dd = Integer::from(d);
    let chi = |n: i64| dd.kronecker(&Integer::from(n)) as i64;
    if d < 0 {
        let n = -d;
        let w: i64 = match d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        };
        let s: i128 = (1..n).map(|k| chi(k) as i128 * k as i128).sum();
        let h = (w as i128 * s.abs()) / (2 * n as i128);
        return Ok(h as u64);
    }
    let prec = 128;
    let log_eps = log_fundamental_unit(d, prec);
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let mut s = Float::new(prec);
    for k in 1..d {
        let c = chi(k);
        if c == 0 {
            continue;
        }
        let x = Float::with_val(prec, &pi * k) / d;
        let l = x.sin().ln();
        if c > 0 {
            s -= l;
        } else {
            s += l;
        }
    }
    let h = s.to_f64() / (2.0 * log_eps.to_f64());
    Ok(h.round() as u64)
}

/// `log ε` for the fundamental unit `ε > 1` of the real quadratic order of discriminant `d`.
pub fn log_fundamental_unit(d: i64, prec: u32) -> Float {
    // continued fraction of (P0 + sqrt(n)) / Q0
    let (n, p0, q0) = if d % 4 == 0 { (d / 4, 0i64, 1i64) } else { (d, 1, 2) };
    let n_i = Integer::from(n);
    let s = Integer::from(n_i.sqrt_ref());
    let (mut p, mut q) = (Integer::from(p0), Integer::from(q0));
    let (mut a_prev2, mut a_prev1) = (Integer::new(), Integer::from(1));
    let (mut b_prev2, mut b_prev1) = (Integer::from(1), Integer::new());
    loop {
        let a = Integer::from(&p + &s) / &q;
        let a_i = Integer::from(&a * &a_prev1) + &a_prev2;
        let b_i = Integer::from(&a * &b_prev1) + &b_prev2;
        let p_next = Integer::from(&a * &q) - &p;
        let q_next = (Integer::from(&n_i) - Integer::from(&p_next * &p_next)) / &q;
        if q_next == q0 {
            let g = Integer::from(q0 * &a_i) - Integer::from(p0 * &b_i);
            let root = Float::with_val(prec, &n_i).sqrt();
            let eps = (Float::with_val(prec, &g) + root * Float::with_val(prec, &b_i)) / q0;
            return eps.ln();
        }
        a_prev2 = std::mem::replace(&mut a_prev1, a_i);
        b_prev2 = std::mem::replace(&mut b_prev1, b_i);
        p = p_next;
        q = q_next;
    }
}

/// One line of an override file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Override {
    pub curve: Option<(Integer, Integer)>,
    pub data: TorsionFieldData,
}

/// Parses lines `p degQ degK rho`, optionally prefixed by `a,b`.
/// Blank lines and `#` comments are skipped.
pub fn parse_overrides(text: &str) -> Result<Vec<Override>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split_whitespace().collect();
        let curve = if fields.first().is_some_and(|f| f.contains(',')) {
            let c = crate::elliptic::parse_pair(fields.remove(0))?;
            Some(c)
        } else {
            None
        };
        if fields.len() != 4 {
            return Err(Error::Parse(format!("override line {}: expected \"p degQ degK rho\"", lineno + 1)));
        }
        let nums: Vec<u32> = fields
            .iter()
            .map(|f| f.parse::<u32>().map_err(|_| Error::Parse(format!("override line {}: bad number {f:?}", lineno + 1))))
            .collect::<Result<_>>()?;
        if nums[1] == 0 || nums[2] == 0 {
            return Err(Error::Parse(format!("override line {}: degrees must be positive", lineno + 1)));
        }
        out.push(Override {
            curve,
            data: TorsionFieldData::external(nums[0], nums[1], nums[2], nums[3]),
        });
    }
    Ok(out)
}
