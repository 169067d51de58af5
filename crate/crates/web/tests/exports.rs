use mubforge_web::{anomaly_json, density_json, seesaw_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("exports return valid JSON")
}

#[test]
fn exports_are_deterministic() {
    assert_eq!(seesaw_json(3, 2, 4, 50).unwrap(), seesaw_json(3, 2, 4, 50).unwrap());
    assert_eq!(density_json(3, 3, 30, 7, 5).unwrap(), density_json(3, 3, 30, 7, 5).unwrap());
    assert_ne!(density_json(3, 3, 30, 7, 5).unwrap(), density_json(3, 3, 30, 8, 5).unwrap());
}

#[test]
fn seesaw_reaches_the_mub_value_for_qubits() {
    let v = parse(&seesaw_json(3, 2, 0, 300).unwrap());
    assert!(v["qbar"].as_f64().unwrap() > 0.9999);
    let last = v["trajectory"].as_array().unwrap().last().unwrap();
    assert!((last.as_f64().unwrap() - v["pbar"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn prime_dimension_has_no_anomaly() {
    let v = parse(&anomaly_json(3, 2).unwrap());
    assert_eq!(v["anomalous"], false);
    assert_eq!(v["bins"].as_array().unwrap().len(), 1);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(seesaw_json(1, 2, 0, 10).is_err());
    assert!(density_json(3, 3, 10, 0, 0).is_err());
    assert!(anomaly_json(4, 9).is_err());
}
