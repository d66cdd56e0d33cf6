mod common;

use std::fs;

use blockspot::dataset::load_annotations;
use blockspot::image_io::save_png;
use blockspot::toy::ToyConfig;
use blockspot_core::synth::synth_sample_with;
use common::{code, ok};

const TOY: &[&str] = &["--samples", "2", "--steps", "400", "--height", "16", "--width", "32", "--max-words", "1", "--max-word-len", "4"];

#[test]
fn synth_blockgen_crop_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--count", "6", "--seed", "4", "--out-dir", "s"], d);
    let synth = load_annotations(&d.join("s/synth.jsonl")).unwrap();
    assert_eq!(synth.len(), 6);
    assert!(d.join("s/images/00005.png").exists());

    ok(&["blockgen", "--input", "s/synth.jsonl", "--images", "s", "--output", "b.jsonl"], d);
    let blocks = load_annotations(&d.join("b.jsonl")).unwrap();
    assert_eq!(blocks.len(), synth.len());
    for (b, s) in blocks.iter().zip(&synth) {
        assert_eq!(b.instances, s.instances);
        let mut members: Vec<usize> = b.blocks.as_ref().unwrap().iter().flat_map(|x| x.members.clone()).collect();
        members.sort_unstable();
        assert_eq!(members, (0..s.instances.len()).collect::<Vec<_>>());
    }

    let out = ok(&["crop", "--input", "b.jsonl", "--images", "s", "--out-dir", "c"], d);
    let crops = load_annotations(&d.join("c/crops.jsonl")).unwrap();
    let n_blocks: usize = blocks.iter().map(|r| r.blocks.as_ref().unwrap().len()).sum();
    assert_eq!(crops.len(), n_blocks);
    assert_eq!(out.trim(), format!("{n_blocks} crops"));
    let first = blockspot::image_io::load_image(&d.join("c").join(&crops[0].image)).unwrap();
    assert_eq!((first.width(), first.height()), (256, 64));

    let out = ok(&["eval", "--gt", "s/synth.jsonl", "--pred", "s/synth.jsonl", "--out-dir", "e"], d);
    assert!(out.contains("NS: 1.0000") && out.contains("GF@0.4: 1.0000"), "{out}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("e/report.json")).unwrap()).unwrap();
    assert_eq!(report["ns"], 1.0);
    assert_eq!(report["gf"]["f"], 1.0);
    assert!(d.join("e/report.txt").exists());

    let out = ok(&["eval", "--gt", "s/synth.jsonl", "--pred", "b.jsonl", "--protocol", "ns", "--out-dir", "e2"], d);
    assert!(out.contains("NS: 1.0000") && !out.contains("GF"), "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--count", "1", "--out-dir", "s"], d);
    assert_eq!(code(&["--help"], d), 0);
    assert_eq!(code(&["frobnicate"], d), 2);
    assert_eq!(code(&["eval", "--gt", "s/synth.jsonl", "--pred", "nope.jsonl"], d), 2);
    assert_eq!(code(&["blockgen", "--input", "s/synth.jsonl", "--images", "s", "--output", "o", "--eps", "0"], d), 2);
    assert_eq!(code(&["blockgen", "--input", "s/synth.jsonl", "--images", "missing", "--output", "o"], d), 2);
    fs::write(d.join("bad.jsonl"), "{\"image\": 1}\n").unwrap();
    let out = common::blockspot(&["blockgen", "--input", "bad.jsonl", "--images", "s", "--output", "o"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.jsonl:1"));
    assert!(out.stdout.is_empty());
    fs::write(d.join("cfg.json"), "{\"blockgen\": {\"eps\": -1}}").unwrap();
    assert_eq!(code(&["--config", "cfg.json", "blockgen", "--input", "s/synth.jsonl", "--images", "s", "--output", "o"], d), 2);
    fs::write(d.join("cfg.json"), "{\"blockgen\": {\"epsilon\": 1}}").unwrap();
    assert_eq!(code(&["--config", "cfg.json", "synth", "--out-dir", "x"], d), 2);
    assert_eq!(code(&["synth", "--out-dir", "x", "--height", "12"], d), 2);
    assert_eq!(code(&["train-toy", "--height", "12"], d), 2);
    fs::write(d.join("corrupt.ckpt"), b"BSPTCKPT\x05\0\0\0\0\0\0\0{}").unwrap();
    assert_eq!(code(&["decode", "--checkpoint", "corrupt.ckpt", "--image", "s/images/00000.png"], d), 2);
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), r#"{"synth": {"count": 3, "seed": 8, "height": 16, "width": 64, "max_words": 2, "max_word_len": 3}}"#).unwrap();
    ok(&["--config", "cfg.json", "synth", "--out-dir", "a"], d);
    ok(&["--config", "cfg.json", "synth", "--out-dir", "b", "--count", "2"], d);
    let a = load_annotations(&d.join("a/synth.jsonl")).unwrap();
    let b = load_annotations(&d.join("b/synth.jsonl")).unwrap();
    assert_eq!((a.len(), b.len()), (3, 2));
    assert_eq!((a[0].width, a[0].height), (64, 16));
    assert_eq!(a[..2], b[..]);
}

#[test]
fn train_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut args = vec!["train-toy", "--seed", "5", "--out-dir", "t"];
    args.extend_from_slice(TOY);
    let summary = ok(&args, d);
    assert!(summary.contains("accuracy 1 "), "{summary}");
    let csv = fs::read_to_string(d.join("t/loss_curve.csv")).unwrap();
    assert!(csv.starts_with("step,loss,accuracy\n"));

    // Decode the first training image from disk.
    let cfg = ToyConfig { seed: 5, height: 16, width: 32, max_words: 1, max_word_len: 4, ..ToyConfig::default() };
    let sample = synth_sample_with(cfg.sample_seed(0), &cfg.synth()).unwrap();
    save_png(&sample.image, &d.join("x.png")).unwrap();
    let greedy = ok(&["decode", "--checkpoint", "t/model.ckpt", "--image", "x.png", "--beam", "1"], d);
    assert_eq!(greedy.trim_end_matches('\n'), sample.text);
    let beam = ok(&["decode", "--checkpoint", "t/model.ckpt", "--image", "x.png", "--beam", "4"], d);
    assert_eq!(beam, greedy);

    let mut causal = vec!["train-toy", "--seed", "5", "--mask", "causal", "--out-dir", "tc"];
    causal.extend_from_slice(TOY);
    ok(&causal, d);
    let csv_c = fs::read_to_string(d.join("tc/loss_curve.csv")).unwrap();
    assert!(csv_c.starts_with("step,loss,accuracy\n"));
    assert_ne!(csv, csv_c);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut outs = Vec::new();
    for (threads, out) in [("1", "a"), ("3", "b")] {
        let mut args = vec!["train-toy", "--steps", "30", "--no-early-stop", "--out-dir", out];
        args.extend_from_slice(&TOY[..2]);
        args.extend_from_slice(&TOY[4..]);
        let st = std::process::Command::new(common::BIN)
            .args(&args)
            .current_dir(d)
            .env("BLOCKSPOT_THREADS", threads)
            .output()
            .unwrap();
        assert!(st.status.success());
        outs.push((
            fs::read(d.join(out).join("model.ckpt")).unwrap(),
            fs::read(d.join(out).join("loss_curve.csv")).unwrap(),
        ));
    }
    assert_eq!(outs[0], outs[1]);
}
