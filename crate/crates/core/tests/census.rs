use ellcount::bounds::counting_constants;
use ellcount::census::{census, standard_grid, enumerate_points, enumerate_weighted, measured_points, CensusConfig};
use ellcount::elliptic::{build_curve_i64, CurveModel};
use ellcount::fields::torsion_field;
use ellcount::heights::zimmer_d;
use ellcount::precision::Precision;
use serde_json::Value;

fn oracle() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap()
}

fn curve(id: &str) -> CurveModel {
    CurveModel::parse(id).unwrap()
}

#[test]
fn counts_match_brute_force() {
    let o = oracle();
    let cfg = CensusConfig::default();
    for (id, rows) in o["census"].as_object().unwrap() {
        let c = curve(id);
        let tfd = torsion_field(&c, 2).unwrap();
        let k = counting_constants(&c, &tfd, 2, Precision::default()).unwrap();
        let grid = standard_grid(k.threshold().hi_f64(), 1e4, 10);
        let rows = rows.as_array().unwrap();
        assert_eq!(grid.len(), rows.len(), "{id}");
        let t = census(&c, &grid, &k, &cfg).unwrap();
        for (row, want) in t.rows.iter().zip(rows) {
            assert!((row.b - want["B"].as_f64().unwrap()).abs() < 1e-12);
            assert_eq!(row.n, want["N"].as_u64().unwrap(), "{id} N at B={}", row.b);
            assert_eq!(row.nhat, want["Nhat"].as_u64().unwrap(), "{id} Nhat at B={}", row.b);
        }
        assert!(t.all_true(), "{id}");
    }
}

#[test]
fn small_census_matches() {
    let o = oracle();
    let cfg = CensusConfig::default();
    for (key, a, b, bound) in [("m25_0_B50", -25, 0, 50u64), ("m1_0_B10", -1, 0, 10)] {
        let c = build_curve_i64(a, b).unwrap();
        let mut got: Vec<(i64, i64, i64)> = enumerate_weighted(&c, bound, &cfg)
            .unwrap()
            .iter()
            .map(|w| (w.m.to_i64().unwrap(), w.e.to_i64().unwrap(), w.n.to_i64().unwrap()))
            .collect();
        got.sort();
        let want: Vec<(i64, i64, i64)> = o["small_census"][key]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| (t[0].as_i64().unwrap(), t[1].as_i64().unwrap(), t[2].as_i64().unwrap()))
            .collect();
        assert_eq!(got, want, "{key}");
    }
}

#[test]
fn enumeration_is_closed_under_negation() {
    let cfg = CensusConfig::default();
    for id in ["-25,0", "-2,1", "-7,6", "0,-2"] {
        let c = curve(id);
        let pts = enumerate_points(&c, 2000.0, &cfg).unwrap();
        for p in &pts {
            assert!(pts.contains(&c.neg(p)), "{id} {p}");
        }
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let c = curve("-7,6");
    let base = enumerate_points(&c, 20000.0, &CensusConfig { workers: Some(1), ..Default::default() }).unwrap();
    for w in [2, 3, 8] {
        let other = enumerate_points(&c, 20000.0, &CensusConfig { workers: Some(w), ..Default::default() }).unwrap();
        assert_eq!(base, other);
    }
}

#[test]
fn naive_count_is_dominated_by_shifted_canonical_count() {
    let cfg = CensusConfig::default();
    for id in ["-25,0", "-2,1", "-7,6"] {
        let c = curve(id);
        let d = zimmer_d(&c, 1).d;
        for b in [20.0f64, 60.0, 150.0] {
            let reach = (b * (2.0 * d).exp()).floor() as u64;
            let pts = measured_points(&c, reach, &cfg).unwrap();
            let n = pts.iter().filter(|q| q.naive <= b.floor() as u64).count();
            let nhat_shift = pts.iter().filter(|q| q.canonical <= b.ln() + d).count();
            assert!(n <= nhat_shift, "{id} B={b}");
            for q in &pts {
                let h = ellcount::arith::ln_integer(&q.naive);
                assert!((q.canonical - h).abs() <= d + 1e-9, "{id} {}", q.point);
            }
        }
    }
}
