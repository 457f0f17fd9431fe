//! Shipped spec files parse, validate and round-trip canonically.

use rlfde::catalog::EXAMPLES;
use rlfde::specfile::SpecFile;

#[test]
fn shipped_specs_round_trip() {
    for e in &EXAMPLES {
        let file = SpecFile::from_json(e.spec_json).unwrap();
        file.problem().unwrap();
        let cfg = file.solver_config().unwrap();
        assert_eq!(cfg.t_max, 1e6, "{}", e.id);
        let once = file.to_json().unwrap();
        let again = SpecFile::from_json(&once).unwrap();
        assert_eq!(again, file);
        assert_eq!(again.to_json().unwrap(), once);
    }
}

#[test]
fn shipped_specs_on_disk_match_catalog() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("specs");
    for e in &EXAMPLES {
        let on_disk = SpecFile::read(&dir.join(e.file_name())).unwrap();
        assert_eq!(on_disk, e.spec_file());
    }
}

#[test]
fn general_rhs_rejects_structured_keys() {
    let text = r#"{"beta": 0.5, "x0": 1, "rhs": {"kind": "general", "f": "x", "phi": "x"}}"#;
    assert!(SpecFile::from_json(text).unwrap().problem().is_err());
    let text = r#"{"beta": 1.5, "x0": 1, "rhs": {"kind": "general", "f": "x"}}"#;
    assert!(SpecFile::from_json(text).unwrap().problem().is_err());
}
