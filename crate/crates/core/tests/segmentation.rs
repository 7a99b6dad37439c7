use cds_core::eval::{
    disk_fixture, generate_synthetic_scribbles, jaccard, Fixture, ScribbleProtocol,
};
use cds_core::segmentation::{
    annotation_to_constraints, segment, segment_error_tolerant, Annotation, AnnotationKind,
    BoxRect, OutputMode, PreparedImage, SegmentSettings, SegmentationMask, Stroke, StrokeTag,
};
use cds_core::Error;

fn point(tag: StrokeTag, x: i64, y: i64) -> Stroke {
    Stroke {
        tag,
        points: vec![[x, y]],
    }
}

/// Foreground samples spread over the disk.
fn disk_scribble() -> Annotation {
    generate_synthetic_scribbles(&disk().truth, &ScribbleProtocol::default())
        .unwrap()
        .foreground_only()
}

fn disk() -> Fixture {
    disk_fixture()
}

#[test]
fn disk_scribble_recovers_the_disk() {
    let f = disk();
    let seg = segment(&f.image, &disk_scribble(), &SegmentSettings::default()).unwrap();
    let j = jaccard(&seg.mask, &f.truth).unwrap();
    assert!(j >= 0.9, "IoU {j}");
    assert_eq!(seg.diagnostics.mode, OutputMode::Foreground);
    assert_eq!(seg.diagnostics.foreground_pixels, seg.mask.count());
    assert!(seg
        .diagnostics
        .clusters
        .iter()
        .all(|c| c.converged && c.kkt_residual < 1e-6));
}

#[test]
fn disk_box_recovers_the_disk() {
    let f = disk();
    let seg = segment(
        &f.image,
        &Annotation::bounding_box(f.rect),
        &SegmentSettings::default(),
    )
    .unwrap();
    let j = jaccard(&seg.mask, &f.truth).unwrap();
    assert!(j >= 0.9, "IoU {j}");
    assert_eq!(seg.diagnostics.mode, OutputMode::Complement);
    assert_eq!(seg.diagnostics.rect, Some(f.rect));
}

#[test]
fn box_output_stays_inside_the_box_domain() {
    let f = disk();
    let prepared = PreparedImage::new(f.image.clone(), 200).unwrap();
    for ann in [
        Annotation::bounding_box(f.rect),
        Annotation::loose_box(f.rect, 240.0),
    ] {
        let c = annotation_to_constraints(&ann, prepared.superpixels()).unwrap();
        let domain = c.domain.clone().expect("box modes restrict the graph");
        assert!(c.seeds.is_subset(&domain));
        let seg = segment(&f.image, &ann, &SegmentSettings::default()).unwrap();
        // mask and extracted union partition the domain
        let fg = prepared
            .superpixels()
            .mask_of(&domain.difference(&seg.extracted));
        assert_eq!(fg, seg.mask);
        assert!(seg.extracted.is_subset(&domain));
        assert!(
            c.seeds.is_subset(&seg.extracted),
            "every ring superpixel is captured"
        );
        let outside = prepared.superpixels().mask_of(&domain).complement();
        assert!(seg.mask.bits().zip(outside.bits()).all(|(m, o)| !(m && o)));
    }
}

#[test]
fn seeds_everywhere_give_the_full_image() {
    let f = disk();
    let prepared = PreparedImage::new(f.image.clone(), 200).unwrap();
    let sp = prepared.superpixels();
    let strokes = sp
        .members()
        .iter()
        .map(|pixels| {
            let p = pixels[0] as i64;
            point(StrokeTag::Fg, p % sp.width() as i64, p / sp.width() as i64)
        })
        .collect();
    let ann = Annotation {
        kind: AnnotationKind::ScribbleForeground,
        strokes,
        rect: None,
        looseness: 0.0,
    };
    let seg = segment(&f.image, &ann, &SegmentSettings::default()).unwrap();
    assert_eq!(seg.mask.count(), seg.mask.len());
}

#[test]
fn error_tolerant_discards_clusters_with_background_strokes() {
    let f = disk();
    let settings = SegmentSettings::default();
    let mut ann = disk_scribble();
    ann.kind = AnnotationKind::ScribbleWithErrors;
    ann.strokes.push(point(StrokeTag::Bg, 5, 5));
    let clean = segment_error_tolerant(&f.image, &ann, &settings).unwrap();
    assert!(clean.diagnostics.clusters.iter().all(|c| !c.discarded));
    assert!(jaccard(&clean.mask, &f.truth).unwrap() >= 0.9);

    // a foreground stroke that strays into the background pulls in a
    // background cluster; the background stroke marks it for removal
    let mut noisy = ann.clone();
    noisy.strokes.push(point(StrokeTag::Fg, 6, 6));
    let noisy = segment_error_tolerant(&f.image, &noisy, &settings).unwrap();
    let discarded: Vec<_> = noisy
        .diagnostics
        .clusters
        .iter()
        .filter(|c| c.discarded)
        .collect();
    assert!(!discarded.is_empty());
    let bg = &noisy.diagnostics.background_superpixels;
    for c in &noisy.diagnostics.clusters {
        assert_eq!(c.discarded, c.superpixels.iter().any(|v| bg.contains(v)));
    }
    assert!(jaccard(&noisy.mask, &f.truth).unwrap() >= 0.9);
}

#[test]
fn error_tolerant_everything_discarded_warns() {
    let f = disk();
    let ann = Annotation {
        kind: AnnotationKind::ScribbleWithErrors,
        strokes: vec![point(StrokeTag::Fg, 64, 64), point(StrokeTag::Bg, 64, 64)],
        rect: None,
        looseness: 0.0,
    };
    let seg = segment_error_tolerant(&f.image, &ann, &SegmentSettings::default()).unwrap();
    assert_eq!(seg.mask.count(), 0);
    assert!(seg
        .diagnostics
        .warnings
        .iter()
        .any(|w| w.contains("background")));
}

#[test]
fn error_tolerant_needs_its_kind() {
    let f = disk();
    let err = segment_error_tolerant(&f.image, &disk_scribble(), &SegmentSettings::default())
        .unwrap_err();
    assert!(matches!(err, Error::Annotation(_)));
}

#[test]
fn invalid_annotations_are_rejected() {
    let f = disk();
    let settings = SegmentSettings::default();
    let empty = Annotation {
        kind: AnnotationKind::ScribbleForeground,
        strokes: vec![],
        rect: None,
        looseness: 0.0,
    };
    assert!(segment(&f.image, &empty, &settings).is_err());
    let flat_box = Annotation::bounding_box(BoxRect::new(10, 10, 0, 20));
    assert!(segment(&f.image, &flat_box, &settings).is_err());
    let off_image = Annotation::scribble(vec![[500, 500]]);
    assert!(segment(&f.image, &off_image, &settings).is_err());
}

#[test]
fn segmentation_is_deterministic() {
    let f = disk();
    let settings = SegmentSettings::default();
    for ann in [disk_scribble(), Annotation::loose_box(f.rect, 120.0)] {
        let a = segment(&f.image, &ann, &settings).unwrap();
        let b = segment(&f.image, &ann, &settings).unwrap();
        assert_eq!(
            a.mask.to_png_bytes().unwrap(),
            b.mask.to_png_bytes().unwrap()
        );
        assert_eq!(
            serde_json::to_string(&a.diagnostics).unwrap(),
            serde_json::to_string(&b.diagnostics).unwrap()
        );
    }
}

#[test]
fn mask_png_round_trip() {
    let f = disk();
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("truth.png");
    f.truth.save_png(&path).unwrap();
    assert_eq!(SegmentationMask::load(&path).unwrap(), f.truth);
}

#[test]
fn ui_annotation_json_matches_hand_built() {
    let f = disk();
    let prepared = PreparedImage::new(f.image.clone(), 200).unwrap();
    let sp = prepared.superpixels();
    let cases = [
        (
            r#"{"kind":"scribble-foreground","strokes":[{"tag":"fg","points":[[50,64],[78,64]]}]}"#,
            Annotation::scribble(vec![[50, 64], [78, 64]]),
        ),
        (
            r#"{"kind":"bounding-box","box":[28,28,72,72]}"#,
            Annotation::bounding_box(BoxRect::new(28, 28, 72, 72)),
        ),
        (
            r#"{"kind":"loose-box","box":[28,28,72,72],"looseness":120}"#,
            Annotation::loose_box(BoxRect::new(28, 28, 72, 72), 120.0),
        ),
        (
            r#"{"kind":"scribble-with-errors","strokes":[{"tag":"foreground","points":[[64,64]]},{"tag":"background","points":[[3,3],[9,3]]}]}"#,
            Annotation {
                kind: AnnotationKind::ScribbleWithErrors,
                strokes: vec![
                    point(StrokeTag::Fg, 64, 64),
                    Stroke {
                        tag: StrokeTag::Bg,
                        points: vec![[3, 3], [9, 3]],
                    },
                ],
                rect: None,
                looseness: 0.0,
            },
        ),
    ];
    for (json, built) in cases {
        let parsed = Annotation::from_json(json).unwrap();
        assert_eq!(parsed, built);
        assert_eq!(Annotation::from_json(&built.to_json()).unwrap(), built);
        assert_eq!(
            annotation_to_constraints(&parsed, sp).unwrap(),
            annotation_to_constraints(&built, sp).unwrap()
        );
    }
}
