use fracurv_web::{measures, pair_measure, svg};

#[test]
fn uset_pair_matches_oracle() {
    let v: serde_json::Value =
        serde_json::from_str(&pair_measure("uset", 0.0, 1.0 / 45.0, 0.0, "1,2").unwrap()).unwrap();
    assert_eq!(v["oracle"], 0.5);
    assert!((v["variation"].as_f64().unwrap() - 0.5).abs() < 0.025);
}

#[test]
fn measures_and_svg() {
    let v: serde_json::Value =
        serde_json::from_str(&measures("cantor-square", 1.0 / 3.0, 0.16, 0.0).unwrap()).unwrap();
    assert_eq!(v["c0"], 4.0);
    let s = svg("uset", 0.0, 1.0 / 45.0, 0.0, "1,2").unwrap();
    assert!(s.starts_with("<svg") && s.contains("#d62728"));
}

#[test]
fn bad_input() {
    assert!(svg("nope", 0.0, 0.1, 0.0, "").is_err());
    assert!(pair_measure("uset", 0.0, 0.01, 0.0, "1").is_err());
    assert!(measures("koch", 0.0, 0.1, 0.5).is_err());
}
