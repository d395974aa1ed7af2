//! Exact integer services: factorization, primality, valuations, prime
//! counting and primorials.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use rug::integer::IsPrime;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Default bound on `|n|` accepted by [`factorize`].
pub const FACTOR_CAP_BITS: u32 = 128;
/// Largest argument accepted by [`prime_pi`].
pub const SIEVE_CAP: u64 = 10_000_000;
/// Largest index accepted by [`primorial`].
pub const PRIMORIAL_CAP: usize = 10_000;

const TRIAL_LIMIT: u32 = 1 << 16;
const RHO_ITERATIONS: u64 = 1 << 22;

/// Miller-Rabin bases that are deterministic below 3.3 * 10^24.
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// A complete prime factorization of a nonzero integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    value: Integer,
    factors: Vec<(Integer, u32)>,
}

impl Factorization {
    /// Builds a factorization from externally supplied prime powers, checking
    /// that it is complete and that every listed base is prime.
    pub fn from_parts(value: Integer, mut factors: Vec<(Integer, u32)>) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroInput);
        }
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("repeated prime {}", w[0].0)));
            }
        }
        for (p, e) in &factors {
            if *e == 0 {
                return Err(Error::InvalidArgument(format!("zero exponent for {p}")));
            }
            if !is_prime(p)? {
                return Err(Error::NotPrime(p.to_string()));
            }
        }
        let f = Factorization { value, factors };
        if f.rebuild() != f.value.clone().abs() {
            return Err(Error::InvalidArgument(format!(
                "factors do not multiply to |{}|",
                f.value
            )));
        }
        Ok(f)
    }

    pub fn value(&self) -> &Integer {
        &self.value
    }

    /// Prime powers in strictly increasing order of the prime.
    pub fn factors(&self) -> &[(Integer, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn exponent_of(&self, p: &Integer) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }

    /// Product of the prime powers, i.e. `|value|`.
    pub fn rebuild(&self) -> Integer {
        self.factors
            .iter()
            .fold(Integer::from(1), |acc, (p, e)| acc * p.clone().pow(*e))
    }

    /// The squarefree kernel `prod p`.
    pub fn radical(&self) -> Integer {
        self.factors
            .iter()
            .fold(Integer::from(1), |acc, (p, _)| acc * p)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value < 0 {
            write!(f, "-")?;
        }
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Factors `n` completely, refusing inputs with more than 128 bits.
pub fn factorize(n: &Integer) -> Result<Factorization> {
    factorize_with_cap(n, FACTOR_CAP_BITS)
}

pub fn factorize_i64(n: i64) -> Result<Factorization> {
    factorize(&Integer::from(n))
}

pub fn factorize_with_cap(n: &Integer, cap_bits: u32) -> Result<Factorization> {
    if *n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut rest = n.clone().abs();
    if rest.significant_bits() > cap_bits {
        return Err(Error::CapExceeded {
            what: "factorization input",
            cap: format!("2^{cap_bits}"),
        });
    }
    let mut found: Vec<(Integer, u32)> = Vec::new();
    let e = rest.find_one(0).unwrap_or(0);
    if e > 0 {
        rest >>= e;
        found.push((Integer::from(2), e));
    }
    let mut d = 3u32;
    while d < TRIAL_LIMIT && rest > 1 {
        if Integer::from(d).square() > rest {
            break;
        }
        if rest.is_divisible_u(d) {
            let mut k = 0;
            while rest.is_divisible_u(d) {
                rest.div_exact_u_mut(d);
                k += 1;
            }
            found.push((Integer::from(d), k));
        }
        d += 2;
    }
    if rest > 1 {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(&m)? {
                match found.iter_mut().find(|(p, _)| *p == m) {
                    Some(slot) => slot.1 += 1,
                    None => found.push((m, 1)),
                }
                continue;
            }
            if m.is_perfect_square() {
                let r = m.clone().sqrt();
                stack.push(r.clone());
                stack.push(r);
                continue;
            }
            let f = pollard_brent(&m).ok_or_else(|| Error::Unfactored(m.to_string()))?;
            let g = Integer::from(&m / &f);
            stack.push(f);
            stack.push(g);
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Factorization {
        value: n.clone(),
        factors: found,
    })
}

fn pollard_brent(n: &Integer) -> Option<Integer> {
    if n.is_even() {
        return Some(Integer::from(2));
    }
    for c in 1u32..20 {
        let f = |x: &Integer| -> Integer { (x.clone().square() + c) % n };
        let mut y = Integer::from(2);
        let mut r: u64 = 1;
        let mut q = Integer::from(1);
        let mut g = Integer::from(1);
        let mut x = Integer::new();
        let mut ys = Integer::new();
        let m: u64 = 128;
        let mut spent: u64 = 0;
        while g == 1 {
            x.clone_from(&y);
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys.clone_from(&y);
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * Integer::from(&x - &y).abs()) % n;
                }
                g = q.clone().gcd(n);
                k += m;
            }
            r *= 2;
            spent += r;
            if spent > RHO_ITERATIONS {
                break;
            }
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = Integer::from(&x - &ys).abs().gcd(n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g != *n {
            return Some(g);
        }
    }
    None
}

fn miller_rabin(n: &Integer, base: u32) -> bool {
    let n1 = Integer::from(n - 1u32);
    let s = n1.find_one(0).unwrap_or(0);
    let d = Integer::from(&n1 >> s);
    let mut x = match Integer::from(base).pow_mod(&d, n) {
        Ok(x) => x,
        Err(_) => return false,
    };
    if x == 1 || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = x.square() % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test.
///
/// Below 3.3e24 the fixed Miller-Rabin base set is a proof. Above that a
/// Pocklington certificate is built from a partial factorization of `n - 1`;
/// failure to certify is reported as an error rather than a guess.
pub fn is_prime(n: &Integer) -> Result<bool> {
    if *n < 2 {
        return Ok(false);
    }
    for &p in &MR_BASES {
        if *n == p {
            return Ok(true);
        }
        if n.is_divisible_u(p) {
            return Ok(false);
        }
    }
    if !MR_BASES.iter().all(|&a| miller_rabin(n, a)) {
        return Ok(false);
    }
    let bound: Integer = "3317044064679887385961981".parse().unwrap();
    if *n < bound {
        return Ok(true);
    }
    if n.is_probably_prime(40) == IsPrime::No {
        return Ok(false);
    }
    pocklington(n)
}

fn pocklington(n: &Integer) -> Result<bool> {
    let n1 = Integer::from(n - 1u32);
    // Split n - 1 = F * R with F fully factored and F^2 > n.
    let mut rest = n1.clone();
    let mut f_part = Integer::from(1);
    let mut primes: Vec<Integer> = Vec::new();
    let mut d = 2u32;
    while d < TRIAL_LIMIT && rest > 1 {
        if rest.is_divisible_u(d) {
            primes.push(Integer::from(d));
            while rest.is_divisible_u(d) {
                rest.div_exact_u_mut(d);
                f_part *= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    while Integer::from(f_part.square_ref()) <= *n && rest > 1 {
        if is_prime(&rest)? {
            primes.push(rest.clone());
            f_part *= &rest;
            break;
        }
        match pollard_brent(&rest) {
            Some(g) => {
                let fz = factorize_with_cap(&g, u32::MAX)?;
                for (p, _) in fz.factors() {
                    primes.push(p.clone());
                    while rest.is_divisible(p) {
                        rest.div_exact_mut(p);
                        f_part *= p;
                    }
                }
            }
            None => return Err(Error::Unfactored(n.to_string())),
        }
    }
    if Integer::from(f_part.square_ref()) <= *n {
        return Err(Error::Unfactored(n.to_string()));
    }
    'prime: for q in &primes {
        let e = Integer::from(&n1 / q);
        for a in 2u32..200 {
            let a = Integer::from(a);
            if a.clone().pow_mod(&n1, n).map_or(true, |v| v != 1) {
                return Ok(false);
            }
            let t = a.pow_mod(&e, n).unwrap() - 1u32;
            if t.gcd(n) == 1 {
                continue 'prime;
            }
        }
        return Err(Error::Unfactored(n.to_string()));
    }
    Ok(true)
}

/// A p-adic valuation, with `Infinite` standing for `v(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Exponent of `p` in an integer; `Infinite` for zero.
pub fn int_valuation(n: &Integer, p: &Integer) -> Valuation {
    if *n == 0 {
        return Valuation::Infinite;
    }
    let mut m = n.clone();
    let mut k = 0i64;
    while m.is_divisible(p) {
        m.div_exact_mut(p);
        k += 1;
    }
    Valuation::Finite(k)
}

pub fn int_valuation_u(n: &Integer, p: u64) -> Valuation {
    int_valuation(n, &Integer::from(p))
}

/// `v_p(q) = v_p(numerator) - v_p(denominator)`, with `Infinite` for 0.
pub fn padic_valuation(q: &Rational, p: &Integer) -> Result<Valuation> {
    if !is_prime(p)? {
        return Err(Error::NotPrime(p.to_string()));
    }
    if *q.numer() == 0 {
        return Ok(Valuation::Infinite);
    }
    let num = int_valuation(q.numer(), p).finite().unwrap();
    let den = int_valuation(q.denom(), p).finite().unwrap();
    Ok(Valuation::Finite(num - den))
}

struct Sieve {
    /// bit i set iff i is composite (i < limit)
    composite: Vec<u64>,
    /// number of primes <= 64 * w - 1, for each word index w
    prefix: Vec<u32>,
    limit: u64,
}

impl Sieve {
    fn build(limit: u64) -> Sieve {
        let n = limit as usize + 1;
        let words = n.div_ceil(64);
        let mut composite = vec![0u64; words];
        composite[0] |= 0b11;
        let mut i = 2usize;
        while i * i < n {
            if composite[i / 64] >> (i % 64) & 1 == 0 {
                let mut j = i * i;
                while j < n {
                    composite[j / 64] |= 1 << (j % 64);
                    j += i;
                }
            }
            i += 1;
        }
        // mark the padding beyond `limit` as composite
        for j in n..words * 64 {
            composite[j / 64] |= 1 << (j % 64);
        }
        let mut prefix = Vec::with_capacity(words + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for w in &composite {
            acc += (!w).count_ones();
            prefix.push(acc);
        }
        Sieve {
            composite,
            prefix,
            limit,
        }
    }

    fn is_prime(&self, n: u64) -> bool {
        n <= self.limit && self.composite[(n / 64) as usize] >> (n % 64) & 1 == 0
    }

    fn count(&self, x: u64) -> u64 {
        let w = (x / 64) as usize;
        let bit = x % 64;
        let mask = if bit == 63 { u64::MAX } else { (1u64 << (bit + 1)) - 1 };
        (self.prefix[w] + ((!self.composite[w]) & mask).count_ones()) as u64
    }
}

fn sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(|| Sieve::build(SIEVE_CAP))
}

/// Exact count of primes `<= x` for `2 <= x <= 10^7`.
pub fn prime_pi(x: f64) -> Result<u64> {
    if !(x >= 2.0) {
        return Err(Error::InvalidArgument(format!("prime_pi needs x >= 2, got {x}")));
    }
    if x > SIEVE_CAP as f64 {
        return Err(Error::CapExceeded {
            what: "prime_pi argument",
            cap: SIEVE_CAP.to_string(),
        });
    }
    Ok(sieve().count(x.floor() as u64))
}

pub fn is_small_prime(n: u64) -> bool {
    if n <= SIEVE_CAP {
        sieve().is_prime(n)
    } else {
        is_prime(&Integer::from(n)).unwrap_or(false)
    }
}

/// The first `n` primes, in order.
pub fn first_primes(n: usize) -> Result<Vec<u64>> {
    if n > PRIMORIAL_CAP {
        return Err(Error::CapExceeded {
            what: "prime index",
            cap: PRIMORIAL_CAP.to_string(),
        });
    }
    let s = sieve();
    Ok((2..=s.limit).filter(|&k| s.is_prime(k)).take(n).collect())
}

/// Product of the first `n` primes.
pub fn primorial(n: usize) -> Result<Integer> {
    Ok(first_primes(n)?
        .into_iter()
        .fold(Integer::from(1), |acc, p| acc * p))
}

/// Squarefree part of a nonzero integer, keeping the sign.
pub fn squarefree_part(n: &Integer) -> Result<Integer> {
    let f = factorize(n)?;
    let mut out = Integer::from(n.cmp0() as i32);
    for (p, e) in f.factors() {
        if e % 2 == 1 {
            out *= p;
        }
    }
    Ok(out)
}

pub fn is_squarefree(n: &Integer) -> Result<bool> {
    Ok(factorize(n)?.factors().iter().all(|(_, e)| *e == 1))
}

/// All positive divisors of the factored integer, ascending.
pub fn divisors(f: &Factorization) -> Vec<Integer> {
    let mut out = vec![Integer::from(1)];
    for (p, e) in f.factors() {
        let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
        for d in &out {
            let mut pk = Integer::from(1);
            for _ in 0..=*e {
                next.push(Integer::from(d * &pk));
                pk *= p;
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Natural logarithm of a positive big integer, accurate to f64 precision
/// even when the integer is far outside the f64 range.
pub fn ln_integer(n: &Integer) -> f64 {
    debug_assert!(*n > 0);
    let bits = n.significant_bits();
    if bits <= 1000 {
        return n.to_f64().ln();
    }
    let shift = bits - 64;
    let top = Integer::from(n >> shift).to_f64();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
