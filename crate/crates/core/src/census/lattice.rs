use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use crate::elliptic::{CurveModel, RationalPoint};
use crate::heights::{height_pairing, HeightContext};
use crate::{Error, Result};

/// `⌊(1 + 2R/ρ)ⁿ⌋`, computed exactly from the binary values of `R` and `ρ`.
pub fn covering_count(n: u32, r: f64, rho: f64) -> Result<Integer> {
    if n == 0 || n > 32 {
        return Err(Error::InvalidArgument(format!("dimension {n} outside 1..=32")));
    }
    if !(r > 0.0 && rho > 0.0) || !r.is_finite() || !rho.is_finite() {
        return Err(Error::InvalidArgument("R and rho must be positive".into()));
    }
    let rr = Rational::from_f64(r).expect("finite");
    let rq = Rational::from_f64(rho).expect("finite");
    let base = Rational::from(1) + (2 * rr) / rq;
    let mut acc = Rational::from(1);
    for _ in 0..n {
        acc *= &base;
    }
    Ok(acc.floor().numer().clone())
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `count` points drawn uniformly from the closed ball `B_dim(0, r)` by
/// rejection from the cube, reproducible from `seed`.
pub fn sample_ball(seed: u64, count: usize, dim: usize, r: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-r..=r)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= r * r {
            out.push(v);
        }
    }
    out
}

/// Greedy cover by balls of radius `ρ`: a point not yet within `ρ` of a
/// chosen centre becomes a centre. Returns indices into `points`.
pub fn greedy_cover(points: &[Vec<f64>], r: f64, rho: f64) -> Result<Vec<usize>> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument("rho must be positive".into()));
    }
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim) || dim > 8 {
        return Err(Error::InvalidArgument("points must share a dimension of at most 8".into()));
    }
    if points.len() > 100_000 {
        return Err(Error::CapExceeded { what: "point count", cap: "100000".into() });
    }
    let r2 = r * r * (1.0 + 1e-12);
    if points.iter().any(|p| p.iter().map(|x| x * x).sum::<f64>() > r2) {
        return Err(Error::InvalidArgument(format!("a point lies outside the ball of radius {r}")));
    }
    let rho2 = rho * rho;
    let mut centres: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !centres.iter().any(|&c| dist2(&points[c], p) <= rho2) {
            centres.push(i);
        }
    }
    Ok(centres)
}

/// The Mordell–Weil lattice spanned by a set of generators under the height
/// pairing.
#[derive(Clone, Debug)]
pub struct MWLattice {
    pub rank: usize,
    pub gram: Vec<Vec<f64>>,
    pub torsion: u32,
}

impl MWLattice {
    pub fn new(gram: Vec<Vec<f64>>, torsion: u32) -> Result<Self> {
        let r = gram.len();
        if gram.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidArgument("gram matrix must be square".into()));
        }
        for i in 0..r {
            for j in 0..i {
                if (gram[i][j] - gram[j][i]).abs() > 1e-9 * (1.0 + gram[i][j].abs()) {
                    return Err(Error::InvalidArgument("gram matrix must be symmetric".into()));
                }
            }
        }
        let l = MWLattice { rank: r, gram, torsion };
        l.cholesky()?;
        Ok(l)
    }

    /// Upper-triangular `q` with `vᵀGv = Σᵢ q[i][i](vᵢ + Σ_{j>i} q[i][j] vⱼ)²`.
    fn cholesky(&self) -> Result<Vec<Vec<f64>>> {
        let r = self.rank;
        let mut q = self.gram.clone();
        for i in 0..r {
            if !(q[i][i] > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            for j in (i + 1)..r {
                q[j][i] = q[i][j];
                q[i][j] /= q[i][i];
            }
            for k in (i + 1)..r {
                for l in k..r {
                    q[k][l] -= q[k][i] * q[i][l];
                }
            }
        }
        Ok(q)
    }

    pub fn norm(&self, v: &[i64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += self.gram[i][j] * v[i] as f64 * v[j] as f64;
            }
        }
        s
    }
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = 1.0;
    for i in 0..n {
        let piv = (i..n).max_by(|&x, &y| a[x][i].abs().total_cmp(&a[y][i].abs())).expect("nonempty");
        if a[piv][i] == 0.0 {
            return 0.0;
        }
        if piv != i {
            a.swap(piv, i);
            d = -d;
        }
        d *= a[i][i];
        for r in (i + 1)..n {
            let f = a[r][i] / a[i][i];
            for c in i..n {
                a[r][c] -= f * a[i][c];
            }
        }
    }
    d
}

/// Greedy independent subset of `candidates` under the height pairing, taken
/// in order of increasing canonical height, together with its lattice.
/// A point joins when it raises the Gram determinant by a relative factor
/// above `1e-6`; torsion points never do.
pub fn mw_sublattice(
    c: &CurveModel,
    candidates: &[RationalPoint],
    torsion: u32,
    tol: f64,
) -> Result<(Vec<RationalPoint>, MWLattice)> {
    let ctx = HeightContext::new(c);
    let mut hs = Vec::new();
    for p in candidates {
        hs.push((ctx.canonical(p, tol)?.0, p));
    }
    hs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut basis: Vec<RationalPoint> = Vec::new();
    let mut gram: Vec<Vec<f64>> = Vec::new();
    let mut d_prev = 1.0;
    for (h, p) in hs {
        if h < 1e-6 {
            continue;
        }
        let mut row = Vec::with_capacity(basis.len() + 1);
        for q in &basis {
            row.push(height_pairing(&ctx, c, p, q, tol)?);
        }
        let mut g = gram.clone();
        for (r, x) in g.iter_mut().zip(&row) {
            r.push(*x);
        }
        row.push(h);
        g.push(row);
        let d = det(&g);
        if d > 1e-6 * d_prev * h {
            basis.push(p.clone());
            gram = g;
            d_prev = d;
        }
    }
    Ok((basis, MWLattice::new(gram, torsion)?))
}

/// Number of integer vectors `v` with `vᵀGv ≤ R²`.
pub fn lattice_ball_count(l: &MWLattice, radius: f64) -> Result<u64> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument("radius must be nonnegative".into()));
    }
    let q = l.cholesky()?;
    let r = l.rank;
    if r == 0 {
        return Ok(1);
    }
    let bound = radius * radius;
    let slack = 1e-9 * bound.max(1.0);
    let mut v = vec![0i64; r];
    let mut count = 0u64;
    fn rec(i: usize, rem: f64, q: &[Vec<f64>], v: &mut Vec<i64>, l: &MWLattice, bound: f64, slack: f64, count: &mut u64) {
        let r = q.len();
        let c: f64 = -((i + 1)..r).map(|j| q[i][j] * v[j] as f64).sum::<f64>();
        let w = ((rem + slack).max(0.0) / q[i][i]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for x in lo..=hi {
            v[i] = x;
            let t = x as f64 - c;
            let used = q[i][i] * t * t;
            if i == 0 {
                if l.norm(v) <= bound + slack {
                    *count += 1;
                }
            } else {
                rec(i - 1, rem - used, q, v, l, bound, slack, count);
            }
        }
        v[i] = 0;
    }
    rec(r - 1, bound, &q, &mut v, l, bound, slack, &mut count);
    Ok(count)
}
