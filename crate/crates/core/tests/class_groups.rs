use ellcount::fields::{class_number_analytic, quadratic_class_group};
use serde_json::Value;

#[test]
fn class_groups_match_tables_and_analytic_formula() {
    let o: Value = serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap();
    let recs = o["class_groups"].as_array().unwrap();
    assert!(recs.len() > 1000);
    for rec in recs {
        let d = rec["D"].as_i64().unwrap();
        let g = quadratic_class_group(d).unwrap();
        let cyc: Vec<u64> = rec["cyc"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        assert_eq!(g.class_number, rec["h"].as_u64().unwrap(), "D = {d}");
        assert_eq!(g.structure, cyc, "D = {d}");
        assert_eq!(class_number_analytic(d).unwrap(), g.class_number, "D = {d}");
        for (&p, &r) in &g.p_ranks {
            assert_eq!(g.class_number % p.pow(r), 0);
            assert!(r as f64 <= (g.class_number as f64).ln() / (p as f64).ln() + 1e-9);
        }
        if d > 0 {
            assert!(g.narrow_class_number == g.class_number || g.narrow_class_number == 2 * g.class_number);
        }
    }
}
