//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit when any criterion fails.

use std::process::ExitCode;

use ellcount::arith::{is_small_prime, ln_integer};
use ellcount::bounds::{
    check_primorial, counting_constants, gr_for_curve, petsche_for_curve, rank_upper_bound, ConstantsReport,
};
use ellcount::census::{
    census, covering_count, enumerate_points, greedy_cover, lattice_ball_count, measured_points, mw_sublattice,
    product_census, sample_ball, segre_height, standard_grid, CensusConfig, MWLattice, ProductFactor,
};
use ellcount::elliptic::{build_curve_i64, CurveModel, RationalPoint};
use ellcount::fields::torsion_field;
use ellcount::heights::{doubling_oracle, naive_height, zimmer_d, HeightContext, ORACLE_DOUBLINGS};
use ellcount::precision::Precision;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;
use serde_json::Value;

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const BMAX: f64 = 1e4;
const COUNT_FIXTURES: [(i64, i64); 5] = [(-1, 0), (0, 1), (-25, 0), (-2, 1), (-7, 6)];

fn oracle() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).expect("fixture parses")
}

fn int(v: &Value) -> Integer {
    v.to_string().parse().expect("integer fixture")
}

fn curve(a: i64, b: i64) -> CurveModel {
    build_curve_i64(a, b).expect("fixture curve")
}

fn constants(c: &CurveModel) -> ConstantsReport {
    let tfd = torsion_field(c, 2).expect("2-torsion fixture");
    counting_constants(c, &tfd, 2, Precision::default()).expect("constants")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reduction_data(o: &Value) -> Outcome {
    let named = [((-1, 0), "64", "32", vec![2, 2]), ((0, 1), "-432", "36", vec![6]), ((-25, 0), "1000000", "800", vec![2, 2])];
    for ((a, b), disc, cond, structure) in named {
        let c = curve(a, b);
        let mut s = c.torsion().structure;
        s.sort_unstable();
        ensure(
            c.minimal_discriminant().to_string() == disc && c.conductor().to_string() == cond && s == structure,
            || format!("{} gave ({}, {}, {:?})", c.id(), c.minimal_discriminant(), c.conductor(), s),
        )?;
    }
    let recs = o["curves"].as_array().expect("curves");
    for r in recs {
        let c = curve(r["a"].as_i64().unwrap(), r["b"].as_i64().unwrap());
        let t = c.torsion();
        ensure(
            *c.minimal_discriminant() == int(&r["minimal_discriminant"])
                && *c.conductor() == int(&r["conductor"])
                && t.order as u64 == r["torsion_order"].as_u64().unwrap(),
            || format!("{} disagrees with its pinned record", c.id()),
        )?;
    }
    Ok(format!("3 named curves and {} pinned curves match exactly", recs.len()))
}

/// Curves with a known point of infinite order.
fn rank_positive() -> Vec<(CurveModel, Vec<RationalPoint>)> {
    vec![
        (curve(-25, 0), vec![RationalPoint::affine(-4, 6)]),
        (curve(0, -2), vec![RationalPoint::affine(3, 5)]),
        (curve(0, 17), vec![RationalPoint::affine(-2, 3), RationalPoint::affine(-1, 4)]),
    ]
}

fn height_axioms(o: &Value) -> Outcome {
    let cfg = CensusConfig::default();
    let mut sampled = 0;
    let (mut par, mut quad): (f64, f64) = (0.0, 0.0);
    for (c, gens) in rank_positive() {
        let ctx = HeightContext::new(&c);
        let h = |p: &RationalPoint| ctx.canonical(p, 1e-12).map(|r| r.0).map_err(|e| e.to_string());
        let tors = c.torsion().points;
        let mut pts = Vec::new();
        for k in -6i64..=6 {
            for t in &tors {
                let base = c.add(&c.mul(k, &gens[0]), t);
                pts.push(match gens.get(1) {
                    Some(g2) => c.add(&base, &c.mul(1 - k.abs(), g2)),
                    None => base,
                });
            }
        }
        if pts.len() < 40 {
            let extra: Vec<RationalPoint> = pts.iter().map(|p| c.add(p, &gens[0])).collect();
            pts.extend(extra);
        }
        for w in pts.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            let lhs = h(&c.add(p, q))? + h(&c.sub(p, q))?;
            par = par.max((lhs - 2.0 * h(p)? - 2.0 * h(q)?).abs());
            for m in [2i64, 3] {
                quad = quad.max((h(&c.mul(m, p))? - (m * m) as f64 * h(p)?).abs());
            }
        }
        sampled += pts.len();
    }
    ensure(sampled >= 100, || format!("only {sampled} sampled points"))?;
    ensure(par <= 1e-8 && quad <= 1e-8, || format!("parallelogram {par:e}, quadraticity {quad:e}"))?;

    let mut worst_t: f64 = 0.0;
    for r in o["curves"].as_array().unwrap() {
        let c = curve(r["a"].as_i64().unwrap(), r["b"].as_i64().unwrap());
        let ctx = HeightContext::new(&c);
        for t in c.torsion().points {
            worst_t = worst_t.max(ctx.canonical(&t, 1e-12).map_err(|e| e.to_string())?.0.abs());
        }
    }
    ensure(worst_t <= 1e-10, || format!("torsion height {worst_t:e}"))?;

    let mut violations = 0;
    let mut census_points = 0;
    for (a, b) in COUNT_FIXTURES.iter().copied().chain([(0, -2), (0, 17)]) {
        let c = curve(a, b);
        let d = zimmer_d(&c, 1).d;
        for q in measured_points(&c, BMAX as u64, &cfg).map_err(|e| e.to_string())? {
            census_points += 1;
            if (q.canonical - ln_integer(&q.naive)).abs() > d {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} points with |hhat - h| > d"))?;
    Ok(format!(
        "{sampled} sampled points: parallelogram {par:.1e}, quadraticity {quad:.1e}; torsion max {worst_t:.1e}; {census_points} census points, 0 Zimmer violations"
    ))
}

fn two_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (c, gens) in rank_positive().into_iter().take(2) {
        let ctx = HeightContext::new(&c);
        for k in 1..=3 {
            for t in c.torsion().points {
                let p = c.add(&c.mul(k, &gens[0]), &t);
                let v = ctx.canonical(&p, 1e-12).map_err(|e| e.to_string())?.0;
                let (w, err) = doubling_oracle(&c, &p, ORACLE_DOUBLINGS);
                let gap = (v - w).abs();
                ensure(gap <= err + 1e-10, || format!("{} at {p}: gap {gap:e} > {err:e}", c.id()))?;
                worst = worst.max(gap / err);
                n += 1;
            }
        }
    }
    Ok(format!("{n} points, largest gap is {:.3} of the allowed d/4^{ORACLE_DOUBLINGS}", worst))
}

fn lower_bounds() -> Outcome {
    let cfg = CensusConfig::default();
    let p = Precision::default();
    let mut report = Vec::new();
    for (a, b) in COUNT_FIXTURES.iter().copied().chain([(0, -2)]) {
        let c = curve(a, b);
        let tors = c.torsion().points;
        let min = measured_points(&c, BMAX as u64, &cfg)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|q| !tors.contains(&q.point))
            .map(|q| q.canonical)
            .fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            report.push(format!("{}: no non-torsion point", c.id()));
            continue;
        }
        let pet = petsche_for_curve(&c, p).map_err(|e| e.to_string())?.hi_f64();
        let gr = gr_for_curve(&c, p).map_err(|e| e.to_string())?.hi_f64();
        ensure(min > pet && min > gr, || format!("{}: min {min} vs {pet:e}, {gr:e}", c.id()))?;
        report.push(format!(
            "{}: min {min:.6}, margins 10^{:.1} and 10^{:.1}",
            c.id(),
            (min / pet).log10(),
            (min / gr).log10()
        ));
    }
    Ok(report.join("; "))
}

fn census_verdicts() -> Outcome {
    let cfg = CensusConfig::default();
    let mut rows = 0;
    for (a, b) in COUNT_FIXTURES {
        let c = curve(a, b);
        let k = constants(&c);
        let grid = standard_grid(k.threshold().hi_f64(), BMAX, 10);
        let t = census(&c, &grid, &k, &cfg).map_err(|e| e.to_string())?;
        ensure(t.all_true(), || format!("{} has a false verdict", c.id()))?;
        rows += t.rows.len();
    }
    Ok(format!("{rows} grid rows over {} curves, all verdicts true", COUNT_FIXTURES.len()))
}

fn exact_census() -> Outcome {
    let cfg = CensusConfig::default();
    let got: Vec<String> = enumerate_points(&curve(-25, 0), 50.0, &cfg).unwrap().iter().map(ToString::to_string).collect();
    ensure(got == ["inf", "(-5:0)", "(-4:-6)", "(-4:6)", "(0:0)", "(5:0)"], || format!("(-25,0), B=50: {got:?}"))?;
    let n = enumerate_points(&curve(-1, 0), 10.0, &cfg).unwrap().len();
    ensure(n == 4, || format!("(-1,0), B=10: {n} points"))?;
    Ok("(-25,0) B=50 gives the 6 listed points; (-1,0) B=10 gives 4".into())
}

fn rank_bounds() -> Outcome {
    let known = [((-1, 0), 0u64), ((0, 1), 0), ((-25, 0), 1)];
    let mut parts = Vec::new();
    for ((a, b), r) in known {
        let k = constants(&curve(a, b));
        ensure(k.rank_bound >= r, || format!("({a},{b}): {} < {r}", k.rank_bound))?;
        parts.push(format!("({a},{b}) {} >= {r}", k.rank_bound));
    }
    let c = curve(0, -2);
    let ub = rank_upper_bound(1, 6, 6, c.omega1() as u64, 0);
    ensure(ub >= 1, || format!("(0,-2): {ub} < 1"))?;
    parts.push(format!("(0,-2) {ub} >= 1"));
    let mut checked = 0;
    for (a, b) in COUNT_FIXTURES {
        let k = constants(&curve(a, b));
        let rank = if (a, b) == (-25, 0) { 1.0 } else { 0.0 };
        for bb in standard_grid(k.threshold().hi_f64(), BMAX, 10) {
            let v = k.rank_bound_in_b(bb).map_err(|e| e.to_string())?;
            ensure(v.lo_f64() >= rank, || format!("({a},{b}) at B={bb}"))?;
            checked += 1;
        }
    }
    Ok(format!("{}; rank_bound_in_B at {checked} grid points", parts.join(", ")))
}

fn constants_regression(o: &Value) -> Outcome {
    let k = constants(&curve(-1, 0)).k;
    let want = &o["constants_minus1_0"];
    for (name, iv) in [
        ("C1", &k.c1_big),
        ("C2", &k.c2_big),
        ("d", &k.d),
        ("C", &k.c),
        ("Cprime", &k.c_prime),
        ("c10", &k.c10),
        ("c11", &k.c11),
    ] {
        let w = want[name].as_f64().unwrap();
        let rel = (iv.mid_f64() / w - 1.0).abs();
        ensure(rel <= 1e-6, || format!("{name}: {} vs {w} (rel {rel:e})", iv.mid_f64()))?;
    }
    Ok(format!("C1 = {:.6e}, C2 = {:.6e}, d = {:.6}", k.c1_big.mid_f64(), k.c2_big.mid_f64(), k.d.mid_f64()))
}

fn covering_and_lattice() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let r = rng.gen_range(0.5..4.0);
        let rho = rng.gen_range(0.2..2.0);
        let count = rng.gen_range(1..300);
        let pts = sample_ball(rng.gen(), count, n, r);
        let g = greedy_cover(&pts, r, rho).map_err(|e| e.to_string())?.len();
        let bound = covering_count(n as u32, r, rho).map_err(|e| e.to_string())?;
        ensure(bound >= g as u64, || format!("trial {trial}: {g} > {bound}"))?;
    }
    let id2 = MWLattice::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1).map_err(|e| e.to_string())?;
    let c13 = lattice_ball_count(&id2, 2.0).map_err(|e| e.to_string())?;
    ensure(c13 == 13, || format!("identity lattice gave {c13}"))?;

    let cfg = CensusConfig::default();
    let c = curve(-25, 0);
    let k = constants(&c);
    let tors = c.torsion();
    let free: Vec<RationalPoint> = enumerate_points(&c, 100.0, &cfg)
        .unwrap()
        .into_iter()
        .filter(|p| !tors.points.contains(p))
        .collect();
    let (basis, lattice) = mw_sublattice(&c, &free, tors.order, 1e-12).map_err(|e| e.to_string())?;
    ensure(basis.len() == 1, || format!("expected rank 1, found {}", basis.len()))?;
    let grid: Vec<f64> = standard_grid(k.threshold().hi_f64(), BMAX, 10).into_iter().rev().take(5).collect();
    let t = census(&c, &grid, &k, &cfg).map_err(|e| e.to_string())?;
    let mut shown = Vec::new();
    for row in &t.rows {
        let lat = lattice_ball_count(&lattice, row.b.ln().sqrt()).map_err(|e| e.to_string())?;
        ensure(row.nhat == tors.order as u64 * lat, || format!("B={}: {} vs {} x {lat}", row.b, row.nhat, tors.order))?;
        shown.push(format!("{}={}x{lat}", row.nhat, tors.order));
    }
    Ok(format!("200 greedy trials within bound; I2 count 13; (-25,0) Nhat: {}", shown.join(", ")))
}

fn proof_machinery() -> Outcome {
    let mut pi = 0u64;
    for m in 2u64..=1_000_000 {
        if is_small_prime(m) {
            pi += 1;
        }
        if m >= 17 && (pi as f64) * (m as f64).ln() < m as f64 {
            return Err(format!("pi({m}) = {pi} < m/log m"));
        }
    }
    for r in 13..=200 {
        ensure(check_primorial(r).map_err(|e| e.to_string())?, || format!("primorial({r}) < r^r"))?;
    }
    let mut pairs = 0;
    for (a, b) in COUNT_FIXTURES {
        let k = constants(&curve(a, b));
        for bb in standard_grid(k.threshold().hi_f64(), BMAX, 10) {
            let (phi, ceil) = k.phi_check(bb).map_err(|e| e.to_string())?;
            ensure(phi.certainly_le(&ceil), || format!("({a},{b}) at B={bb}"))?;
            pairs += 1;
        }
    }
    ensure(pairs >= 20, || format!("only {pairs} (curve, B) pairs"))?;
    Ok(format!("pi(m) for 17..=1e6; primorial for 13..=200; phi_max on {pairs} (curve, B) pairs"))
}

fn segre_and_products() -> Outcome {
    let pool: Vec<(CurveModel, Vec<RationalPoint>)> = rank_positive()
        .into_iter()
        .map(|(c, gens)| {
            let mut pts = c.torsion().points;
            for k in -4i64..=4 {
                pts.push(c.mul(k, &gens[0]));
            }
            (c, pts)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let g = rng.gen_range(1..=4);
        let picks: Vec<(&CurveModel, &RationalPoint)> = (0..g)
            .map(|_| {
                let (c, pts) = &pool[rng.gen_range(0..pool.len())];
                (c, &pts[rng.gen_range(0..pts.len())])
            })
            .collect();
        let want = picks.iter().fold(Integer::from(1), |acc, (_, p)| acc * naive_height(p));
        let got = segre_height(&picks).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("tuple {i}: {got} vs {want}"))?;
    }
    let c = curve(-1, 0);
    let f = ProductFactor { tfd: torsion_field(&c, 2).unwrap(), curve: c.clone() };
    let grid = standard_grid(constants(&c).threshold().hi_f64(), 1e3, 10);
    let t = product_census(&[f.clone(), f], &grid, 2, &CensusConfig::default()).map_err(|e| e.to_string())?;
    ensure(t.rows.iter().all(|r| r.nhat == 16), || "product count differs from 16".into())?;
    Ok(format!("1000 tuples exact; (-1,0)^2 gives 16 at {} grid points", t.rows.len()))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir();
    let mut outs = Vec::new();
    for w in ["1", "3"] {
        let path = dir.join(format!("ellcount-acceptance-{}-{w}.json", std::process::id()));
        let args = [
            "ellcount", "verify", "--curve", "-25,0", "--curve", "-7,6", "--bmax", "3000", "--format", "json", "--workers", w,
            "--out",
        ];
        let code = ellcount::cli::run(args.iter().map(|s| s.to_string()).chain([path.display().to_string()]));
        ensure(code == 0, || format!("verify exited {code}"))?;
        outs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        let _ = std::fs::remove_file(&path);
    }
    ensure(outs[0] == outs[1], || "reports differ between worker counts".into())?;
    Ok(format!("two verify reports of {} bytes are identical", outs[0].len()))
}

fn main() -> ExitCode {
    let o = oracle();
    let criteria: Vec<Check> = vec![
        ("reduction data", Box::new(|| reduction_data(&o))),
        ("height axioms", Box::new(|| height_axioms(&o))),
        ("two height oracles", Box::new(two_oracles)),
        ("height lower bounds", Box::new(lower_bounds)),
        ("census verdicts", Box::new(census_verdicts)),
        ("exact small census", Box::new(exact_census)),
        ("rank bounds", Box::new(rank_bounds)),
        ("constants regression", Box::new(|| constants_regression(&o))),
        ("covering and lattice", Box::new(covering_and_lattice)),
        ("proof machinery", Box::new(proof_machinery)),
        ("segre and products", Box::new(segre_and_products)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
