use std::path::Path;

use blockspot::dataset::{annotations_to_string, load_annotations, parse_annotations, save_annotations, AnnotationRecord};
use blockspot::image_io::{load_image, save_png};
use blockspot_core::blockgen::{TextBlock, TextInstance};
use blockspot_core::{Polygon, RasterImage};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = AnnotationRecord> {
    let inst = (0u32..90, 0u32..40, 1u32..10, 1u32..10, "[A-Z ]{0,6}", any::<bool>()).prop_map(|(x, y, w, h, t, ig)| {
        let p = Polygon::rect(x as f64 + 0.25, y as f64, (x + w) as f64, (y + h) as f64 + 0.5).unwrap();
        TextInstance::new(p, t, ig)
    });
    ("[a-z]{1,8}\\.png", prop::collection::vec(inst, 0..5), any::<bool>()).prop_map(|(image, instances, with_blocks)| {
        let blocks = with_blocks.then(|| {
            instances
                .iter()
                .enumerate()
                .map(|(i, t)| TextBlock {
                    polygon: t.polygon.clone(),
                    members: vec![i],
                    text: t.text.clone(),
                    ignore: t.ignore,
                })
                .collect()
        });
        AnnotationRecord {
            image,
            width: 100,
            height: 50,
            instances,
            blocks,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn save_then_load_is_identity(records in prop::collection::vec(record(), 0..6)) {
        let text = annotations_to_string(&records);
        let back = parse_annotations(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(annotations_to_string(&back), text);
    }
}

#[test]
fn empty_file_loads_as_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.jsonl");
    std::fs::write(&p, "").unwrap();
    assert!(load_annotations(&p).unwrap().is_empty());
}

#[test]
fn single_record_round_trips_bytewise() {
    let dir = tempfile::tempdir().unwrap();
    let line = r#"{"image":"a.png","width":40,"height":20,"instances":[{"polygon":[[1.0,2.0],[30.0,2.0],[15.5,19.0]],"text":"EXIT","ignore":true}]}"#;
    let p = dir.path().join("one.jsonl");
    std::fs::write(&p, format!("{line}\n")).unwrap();
    let recs = load_annotations(&p).unwrap();
    assert!(recs[0].instances[0].ignore);
    assert_eq!(recs[0].instances[0].polygon.len(), 3);
    let q = dir.path().join("two.jsonl");
    save_annotations(&recs, &q).unwrap();
    assert_eq!(std::fs::read_to_string(q).unwrap(), format!("{line}\n"));
}

#[test]
fn block_members_must_exist() {
    let line = r#"{"image":"a","width":9,"height":9,"instances":[],"blocks":[{"polygon":[[0,0],[4,0],[4,4]],"members":[0],"text":""}]}"#;
    assert!(parse_annotations(line, Path::new("m")).is_err());
}

#[test]
fn png_round_trip_is_exact_on_byte_levels() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<f64> = (0..4 * 3 * 3).map(|i| ((i * 37) % 256) as f64 / 255.0).collect();
    let img = RasterImage::new(4, 3, 3, data).unwrap();
    let p = dir.path().join("x.png");
    save_png(&img, &p).unwrap();
    assert_eq!(load_image(&p).unwrap(), img);
}

#[test]
fn ppm_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.ppm");
    let mut bytes = b"P6\n2 1\n255\n".to_vec();
    bytes.extend_from_slice(&[255, 0, 0, 0, 0, 255]);
    std::fs::write(&p, bytes).unwrap();
    let img = load_image(&p).unwrap();
    assert_eq!((img.width(), img.height(), img.channels()), (2, 1, 3));
    assert_eq!(img.pixel(0, 0), &[1.0, 0.0, 0.0]);
    assert!(load_image(&dir.path().join("missing.png")).is_err());
}
