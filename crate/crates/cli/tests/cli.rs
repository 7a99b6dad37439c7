use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cds_core::eval::{disk_fixture, generate_synthetic_scribbles, jaccard, ScribbleProtocol};
use cds_core::graph::{example_graph, write_graph};
use cds_core::segmentation::{Annotation, BoxRect, Diagnostics, SegmentationMask};
use tempfile::TempDir;

fn cds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn graph_file(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("example.graph");
    std::fs::write(&p, write_graph(&example_graph())).unwrap();
    p
}

struct DiskFiles {
    image: PathBuf,
    truth: SegmentationMask,
    scribble: PathBuf,
    boxed: PathBuf,
    rect: BoxRect,
}

fn disk_files(dir: &Path) -> DiskFiles {
    let f = disk_fixture();
    let image = dir.join("disk.png");
    f.image.save(&image).unwrap();
    let scribble = dir.join("scribble.json");
    let ann = generate_synthetic_scribbles(&f.truth, &ScribbleProtocol::default())
        .unwrap()
        .foreground_only();
    std::fs::write(&scribble, ann.to_json()).unwrap();
    let boxed = dir.join("box.json");
    std::fs::write(&boxed, Annotation::bounding_box(f.rect).to_json()).unwrap();
    DiskFiles {
        image,
        truth: f.truth,
        scribble,
        boxed,
        rect: f.rect,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_one_based_seed_five_reports_four_clique_union() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir);
    let o = cds(&[
        "extract",
        "--graph",
        s(&g),
        "--seeds",
        "5",
        "--one-based",
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["union"], serde_json::json!([4, 5, 6, 7, 8]));
    assert_eq!(v["leftover"], serde_json::json!([]));

    let text = cds(&[
        "extract",
        "--graph",
        s(&g),
        "--seeds",
        "5",
        "--one-based",
        "--dynamics",
        "pairwise",
    ]);
    assert_eq!(code(&text), 0);
    assert!(String::from_utf8_lossy(&text.stdout).contains("union: {4,5,6,7,8}"));
}

#[test]
fn extract_zero_based_matches_one_based() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir);
    let o = cds(&["extract", "--graph", s(&g), "--seeds", "1,4,7", "--json"]);
    assert_eq!(code(&o), 0);
    let zero: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let o = cds(&[
        "extract",
        "--graph",
        s(&g),
        "--seeds",
        "2,5,8",
        "--one-based",
        "--json",
    ]);
    let one: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let shifted: Vec<u64> = zero["union"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() + 1)
        .collect();
    assert_eq!(one["union"], serde_json::json!(shifted));
}

#[test]
fn extract_exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir);
    assert_eq!(
        code(&cds(&["extract", "--graph", s(&g), "--seeds", ""])),
        64
    );
    assert_eq!(
        code(&cds(&["extract", "--graph", s(&g), "--seeds", "x"])),
        64
    );
    assert_eq!(
        code(&cds(&[
            "extract",
            "--graph",
            s(&g),
            "--seeds",
            "0",
            "--one-based"
        ])),
        64
    );
    assert_eq!(
        code(&cds(&[
            "extract",
            "--graph",
            s(&g),
            "--seeds",
            "1",
            "--margin",
            "0"
        ])),
        64
    );
    assert_eq!(
        code(&cds(&["extract", "--graph", s(&g), "--seeds", "99"])),
        64
    );
    assert_eq!(code(&cds(&["extract", "--seeds", "1"])), 64);

    let missing = dir.path().join("missing.graph");
    let o = cds(&["extract", "--graph", s(&missing), "--seeds", "1"]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());

    let bad = dir.path().join("bad.graph");
    std::fs::write(&bad, "3 1\n0 1 banana\n").unwrap();
    assert_eq!(
        code(&cds(&["extract", "--graph", s(&bad), "--seeds", "1"])),
        1
    );
}

#[test]
fn segment_disk_scribble_writes_mask_and_diagnostics() {
    let dir = TempDir::new().unwrap();
    let d = disk_files(dir.path());
    let out = dir.path().join("mask.png");
    let o = cds(&[
        "segment",
        "--image",
        s(&d.image),
        "--annotation",
        s(&d.scribble),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mask = SegmentationMask::load(&out).unwrap();
    let j = jaccard(&mask, &d.truth).unwrap();
    assert!(j >= 0.9, "IoU {j}");
    let diag: Diagnostics =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mask.json")).unwrap())
            .unwrap();
    assert_eq!(diag.foreground_pixels, mask.count());
    assert!(diag.cluster_count >= 1);
}

#[test]
fn segment_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let d = disk_files(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(format!("{name}.png"));
        let o = cds(&[
            "segment",
            "--image",
            s(&d.image),
            "--annotation",
            s(&d.boxed),
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join(format!("{name}.json"))).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn looseness_flag_dilates_the_box() {
    let dir = TempDir::new().unwrap();
    let d = disk_files(dir.path());
    let out = dir.path().join("loose.png");
    let o = cds(&[
        "segment",
        "--image",
        s(&d.image),
        "--annotation",
        s(&d.boxed),
        "--out",
        s(&out),
        "--looseness",
        "120",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let diag: Diagnostics =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("loose.json")).unwrap())
            .unwrap();
    let used = diag.rect.expect("box modes report their box");
    assert!(used.area() > d.rect.area(), "{used:?} vs {:?}", d.rect);
}

#[test]
fn segment_usage_errors() {
    let dir = TempDir::new().unwrap();
    let d = disk_files(dir.path());
    let out = dir.path().join("m.png");
    let base = [
        "segment",
        "--image",
        s(&d.image),
        "--out",
        s(&out),
        "--annotation",
    ];
    let with = |ann: &Path, extra: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.push(s(ann));
        args.extend_from_slice(extra);
        code(&cds(&args))
    };
    assert_eq!(with(&d.scribble, &["--looseness", "120"]), 64);
    assert_eq!(with(&d.scribble, &["--sigma", "0.1"]), 64);
    assert_eq!(with(&d.scribble, &["--sigma-mode", "single"]), 64);
    assert_eq!(
        with(
            &d.scribble,
            &["--sigma-mode", "single", "--knn", "3", "--sigma", "0.1"]
        ),
        64
    );
    assert_eq!(with(&d.scribble, &["--sigma-mode", "best"]), 64);
    assert_eq!(with(&d.boxed, &["--looseness", "-5"]), 64);
    assert!(!out.exists());

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"kind":"scribble-foreground","strokes":[]}"#).unwrap();
    assert_eq!(with(&broken, &[]), 1);
    assert_eq!(with(&dir.path().join("nope.json"), &[]), 1);
}

#[test]
fn best_sigma_uses_truth() {
    let dir = TempDir::new().unwrap();
    let d = disk_files(dir.path());
    let truth = dir.path().join("truth.png");
    d.truth.save_png(&truth).unwrap();
    let out = dir.path().join("best.png");
    let o = cds(&[
        "segment",
        "--image",
        s(&d.image),
        "--annotation",
        s(&d.scribble),
        "--out",
        s(&out),
        "--sigma-mode",
        "best",
        "--truth",
        s(&truth),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mask = SegmentationMask::load(&out).unwrap();
    assert!(jaccard(&mask, &d.truth).unwrap() >= 0.9);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&cds(&["--help"])), 0);
    assert_eq!(code(&cds(&["frobnicate"])), 64);
}
