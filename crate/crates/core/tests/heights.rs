use ellcount::elliptic::{build_curve_i64, RationalPoint};
use ellcount::heights::{self, HeightContext};
use serde_json::Value;

fn oracle() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap()
}

fn point(rec: &Value) -> RationalPoint {
    format!("{},{}", rec["x"].as_str().unwrap(), rec["y"].as_str().unwrap())
        .parse()
        .unwrap()
}

#[test]
fn canonical_heights_match_tables() {
    let o = oracle();
    let pts = o["heights"].as_array().unwrap();
    assert!(pts.len() >= 80);
    for rec in pts {
        let c = build_curve_i64(rec["a"].as_i64().unwrap(), rec["b"].as_i64().unwrap()).unwrap();
        let p = point(rec);
        let prof = heights::canonical_height(&c, &p, 1e-11).unwrap();
        let want = rec["height"].as_f64().unwrap();
        assert!((prof.canonical - want).abs() < 1e-9, "{} {}: {} vs {}", c.id(), p, prof.canonical, want);
        let want_x = rec["height_x"].as_f64().unwrap();
        assert!((prof.canonical_x() - want_x).abs() < 1e-9);
    }
}

#[test]
fn doubling_oracle_agrees() {
    let o = oracle();
    for rec in o["heights"].as_array().unwrap().iter().step_by(3) {
        let c = build_curve_i64(rec["a"].as_i64().unwrap(), rec["b"].as_i64().unwrap()).unwrap();
        let p = point(rec);
        let (h, _) = HeightContext::new(&c).canonical(&p, 1e-10).unwrap();
        let (o, err) = heights::doubling_oracle(&c, &p, heights::ORACLE_DOUBLINGS);
        assert!((h - o).abs() <= err + 1e-10, "{} {}", c.id(), p);
    }
}

#[test]
fn faltings_heights_match_periods() {
    let o = oracle();
    for rec in o["curves"].as_array().unwrap() {
        let c = build_curve_i64(rec["a"].as_i64().unwrap(), rec["b"].as_i64().unwrap()).unwrap();
        let st = heights::faltings_height(&c).unwrap();
        let mn = heights::faltings_height_minimal(&c).unwrap();
        assert!((st - rec["faltings_stable"].as_f64().unwrap()).abs() < 1e-8, "{} stable {st}", c.id());
        assert!((mn - rec["faltings_minimal"].as_f64().unwrap()).abs() < 1e-8, "{} minimal {mn}", c.id());
    }
}
