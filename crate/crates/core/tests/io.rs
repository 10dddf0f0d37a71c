use std::sync::Arc;

use supergauss_core::cases::{family, FamilyOptions};
use supergauss_core::io::{read_bundle, read_field_file, write_bundle, write_field_file};
use supergauss_core::*;

#[test]
fn bundles_round_trip_through_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(ConformalGrid::new([0.1, -0.2], 0.8, 17).unwrap());
    for tag in [CaseTag::EucF2, CaseTag::HypF3C1, CaseTag::HypF3C2] {
        let spec = CaseSpec::default_for(tag);
        let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
        let path = write_bundle(&dir.path().join(tag.name()), &spec, &b).unwrap();
        let (spec2, b2) = read_bundle(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(
            b2.names().collect::<Vec<_>>(),
            b.names().collect::<Vec<_>>()
        );
        for (name, f) in b.iter() {
            let f2 = b2.get(name).unwrap();
            assert_eq!(f2.exactness(), f.exactness(), "{name}");
            assert_eq!((f2 - f).max_abs(), 0.0, "{name}");
        }
        let r1 = verify_case(&spec, &b, None).unwrap();
        let r2 = verify_case(&spec2, &b2, None).unwrap();
        assert_eq!(r1.overall_max, r2.overall_max);
    }
}

#[test]
fn manifest_is_plain_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(ConformalGrid::unit_square(9).unwrap());
    let spec = CaseSpec::CurF0 { c: -0.5 };
    let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
    let path = write_bundle(dir.path(), &spec, &b).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["case"], "cur-f0");
    assert_eq!(v["c"], -0.5);
    assert_eq!(v["grid"]["n"], 9);
    assert!(v["fields"]["u"]["file"].as_str().unwrap().ends_with(".csv"));
}

#[test]
fn field_file_with_wrong_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = Arc::new(ConformalGrid::unit_square(9).unwrap());
    let p = dir.path().join("f.csv");
    write_field_file(&p, &Field::from_fn(&g, |x| x * x)).unwrap();
    assert!(read_field_file(&p, &g).is_ok());
    let shifted = Arc::new(ConformalGrid::new([0.5, 0.0], 1.0, 9).unwrap());
    assert!(matches!(read_field_file(&p, &shifted), Err(Error::Grid(_))));
}
