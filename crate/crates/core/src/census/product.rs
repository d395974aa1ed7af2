use rug::Integer;

use super::{check_bound, check_grid, measured_points, verdict, CensusConfig, CensusRow, CensusTable, MeasuredPoint};
use crate::bounds::counting_constants;
use crate::elliptic::{CurveModel, RationalPoint};
use crate::fields::TorsionFieldData;
use crate::{Error, Result};

fn cleared(p: &RationalPoint) -> [Integer; 3] {
    match p {
        RationalPoint::Infinity => [Integer::new(), Integer::from(1), Integer::new()],
        RationalPoint::Affine { x, y } => {
            let l = Integer::from(x.denom().lcm_ref(y.denom()));
            let xs = x.numer() * Integer::from(&l / x.denom()) ;
            let ys = y.numer() * Integer::from(&l / y.denom()) ;
            let g = Integer::from(xs.gcd_ref(&ys)).gcd(&l);
            [xs / &g, ys / &g, l / g]
        }
    }
}

/// Height of the Segre image of `(P₁, …, P_g)`, from the `3^g` coordinate
/// products of the cleared triples.
pub fn segre_height(points: &[(&CurveModel, &RationalPoint)]) -> Result<Integer> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point list".into()));
    }
    let mut coords = vec![Integer::from(1)];
    for (c, p) in points {
        if !c.contains(p) {
            return Err(Error::NotOnCurve);
        }
        let t = cleared(p);
        coords = coords.iter().flat_map(|x| t.iter().map(move |y| Integer::from(x * y))).collect();
    }
    let g = coords.iter().fold(Integer::new(), |g, x| g.gcd(x));
    let m = coords.iter().map(|x| Integer::from(x.abs_ref())).max().expect("nonempty");
    Ok(m / g)
}

/// One factor of a product of curves, with its torsion-field data.
#[derive(Clone, Debug)]
pub struct ProductFactor {
    pub curve: CurveModel,
    pub tfd: TorsionFieldData,
}

fn count_products(lists: &[Vec<Integer>], bound: &Integer) -> u64 {
    fn rec(i: usize, lists: &[Vec<Integer>], rem: &Integer) -> u64 {
        if i == lists.len() {
            return 1;
        }
        let mut total = 0;
        for h in &lists[i] {
            if h > rem {
                break;
            }
            total += rec(i + 1, lists, &Integer::from(rem / h));
        }
        total
    }
    rec(0, lists, bound)
}

fn count_sums(lists: &[Vec<f64>], bound: f64) -> u64 {
    fn rec(i: usize, lists: &[Vec<f64>], rem: f64) -> u64 {
        if i == lists.len() {
            return 1;
        }
        let mut total = 0;
        for &h in &lists[i] {
            if h > rem {
                break;
            }
            total += rec(i + 1, lists, rem - h);
        }
        total
    }
    rec(0, lists, bound)
}

/// Counts on `E₁ × … × E_g` with the Segre height `∏ Hᵢ` and `ĥ = Σ ĥᵢ`;
/// the constants are the sums of the factors' constants.
pub fn product_census(factors: &[ProductFactor], grid: &[f64], p: u32, cfg: &CensusConfig) -> Result<CensusTable> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("no factors".into()));
    }
    let prec = cfg.precision;
    let reports = factors
        .iter()
        .map(|f| counting_constants(&f.curve, &f.tfd, p, prec))
        .collect::<Result<Vec<_>>>()?;
    let threshold = reports.iter().skip(1).fold(reports[0].threshold(), |m, r| m.max(&r.threshold()));
    check_grid(grid, &threshold)?;
    let bmax = grid.iter().cloned().fold(0.0, f64::max);
    check_bound(bmax, cfg.cap)?;
    let c_sum = reports.iter().skip(1).fold(reports[0].k.c.clone(), |s, r| &s + &r.k.c);
    let cp_sum = reports.iter().skip(1).fold(reports[0].k.c_prime.clone(), |s, r| &s + &r.k.c_prime);

    let mut naive_lists = Vec::new();
    let mut hat_lists = Vec::new();
    for (f, r) in factors.iter().zip(&reports) {
        let reach = (bmax * r.k.d.hi_f64().exp()).floor() as u64;
        let pts: Vec<MeasuredPoint> = measured_points(&f.curve, reach, cfg)?;
        let mut hs: Vec<Integer> = pts.iter().filter(|q| q.naive <= bmax.floor() as u64).map(|q| q.naive.clone()).collect();
        hs.sort();
        let mut hh: Vec<f64> = pts.iter().map(|q| q.canonical).collect();
        hh.sort_by(f64::total_cmp);
        naive_lists.push(hs);
        hat_lists.push(hh);
    }
    let mut rows = Vec::new();
    for &b in grid {
        let n = count_products(&naive_lists, &Integer::from(b.floor() as u64));
        let nhat = count_sums(&hat_lists, b.ln());
        let (vn, l10p) = verdict(n, &cp_sum, b, prec);
        let (vh, l10c) = verdict(nhat, &c_sum, b, prec);
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
    let id = factors.iter().map(|f| format!("[{}]", f.curve.id())).collect::<Vec<_>>().join("x");
    Ok(CensusTable { curve_id: id, rows, constants: reports })
}
