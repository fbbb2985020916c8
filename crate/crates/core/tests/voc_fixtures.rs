use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use synchroflow::perception::{derive_contacts, parse_voc, render_overlay, serialize_voc, Label};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn voc_fixtures() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir().join("voc"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "xml"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(p).unwrap())
        })
        .collect()
}

#[test]
fn parse_serialize_parse_is_a_fixed_point() {
    let fixtures = voc_fixtures();
    assert!(fixtures.len() >= 5);
    let mut labels = BTreeSet::new();
    let mut multi_object = 0;
    for (name, xml) in &fixtures {
        let first = parse_voc(xml).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = serialize_voc(&first);
        let second = parse_voc(&text).unwrap();
        assert_eq!(first, second, "{name}");
        assert_eq!(serialize_voc(&second), text, "{name}");
        labels.extend(first.objects.iter().map(|b| b.label));
        if first.objects.len() > 1 {
            multi_object += 1;
        }
    }
    assert_eq!(labels, Label::ALL.into_iter().collect());
    assert!(multi_object >= 2);
}

#[test]
fn overlay_matches_golden() {
    let xml = std::fs::read_to_string(fixture_dir().join("voc/desktop_open_case.xml")).unwrap();
    let annotation = parse_voc(&xml).unwrap();
    let plans: Vec<_> = annotation
        .objects
        .iter()
        .map(|b| derive_contacts(b).unwrap())
        .collect();
    let svg = render_overlay(&annotation, &plans);
    let golden = fixture_dir().join("golden/desktop_open_case.svg");
    if std::env::var_os("SYNCHROFLOW_BLESS").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, std::fs::read_to_string(golden).unwrap());
}

#[test]
fn plans_one_per_box_with_points_inside() {
    for (name, xml) in voc_fixtures() {
        let annotation = parse_voc(&xml).unwrap();
        for b in &annotation.objects {
            let plan = derive_contacts(b).unwrap();
            assert!(!plan.points.is_empty(), "{name}");
            assert!(plan.points.iter().all(|p| b.contains(*p)), "{name}: {b:?}");
        }
    }
}
