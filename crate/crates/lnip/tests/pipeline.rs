// End-to-end flow across modules: render PNGs to disk, load them back
// as a tiled dataset, index, persist, query, and evaluate. Everything
// here goes through the public API only.

use std::fs;

use lnip::descriptors::{extract_feature, DescriptorKind};
use lnip::evaluation::{emit_curves, emit_report, evaluate};
use lnip::imaging::{load_dataset, save_png, GrayImage};
use lnip::retrieval::{build_index, load_index, query, save_index};
use lnip::similarity::DistanceMetric;

fn stripes(period: usize) -> GrayImage {
    GrayImage::from_fn(64, 64, |_, y| {
        if (y / period).is_multiple_of(2) {
            200
        } else {
            60
        }
    })
}

fn checks(cell: usize) -> GrayImage {
    GrayImage::from_fn(64, 64, |x, y| {
        if (x / cell + y / cell).is_multiple_of(2) {
            220
        } else {
            40
        }
    })
}

#[test]
fn png_roundtrip_through_dataset_index_store_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for (category, imgs) in [
        ("checks", [checks(4), checks(5)]),
        ("stripes", [stripes(4), stripes(5)]),
    ] {
        fs::create_dir(root.join(category)).unwrap();
        for (i, img) in imgs.iter().enumerate() {
            save_png(img, &root.join(category).join(format!("s{i}.png"))).unwrap();
        }
    }

    // 4 sources x 4 tiles of 32x32.
    let items = load_dataset(root, Some((32, 32))).unwrap();
    assert_eq!(items.len(), 16);
    assert_eq!(items[0].id, "checks/s0.png#0");
    assert_eq!(items[0].category, "checks");
    assert!(items.windows(2).all(|w| w[0].id < w[1].id));

    let index = build_index(&items, DescriptorKind::Lnip).unwrap();
    let store = root.join("lnip.store");
    save_index(&index, &store).unwrap();
    let loaded = load_index(&store).unwrap();
    assert_eq!(loaded, index);

    // A tile queried against the store ranks itself first at distance 0
    // (exact duplicates tie, and ties keep index order).
    let q = extract_feature(&items[0].image, DescriptorKind::Lnip).unwrap();
    let result = query(&loaded, "probe", &q, DistanceMetric::D1, 3, false).unwrap();
    assert_eq!(result.query_id, "probe");
    assert_eq!(result.ranked[0].id, items[0].id);
    assert_eq!(result.ranked[0].distance, 0.0);
    assert_eq!(result.ranked.len(), 3);

    // Two clearly distinct classes retrieve perfectly at n = 8.
    let reports = evaluate(&loaded, DistanceMetric::D1, &[4, 8], false).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1].n_retrieved, 8);
    assert_eq!(reports[1].p_total, 1.0);
    assert_eq!(reports[1].r_total, 1.0);

    let csv = root.join("report.csv");
    emit_report(&reports, &csv).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    // Header + (2 categories + TOTAL) per report.
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.starts_with("kind,metric,n_retrieved,category,avg_precision,avg_recall"));
    assert!(text.lines().last().unwrap().starts_with("lnip,d1,8,TOTAL,"));

    let curves = root.join("curves.csv");
    emit_curves(&reports, &curves).unwrap();
    let text = fs::read_to_string(&curves).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().any(|l| l == "lnip,d1,8,1.000000,1.000000"));
}

#[test]
fn manifest_dataset_feeds_the_same_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    save_png(&stripes(4), &root.join("a.png")).unwrap();
    save_png(&checks(4), &root.join("b.png")).unwrap();
    fs::write(root.join("manifest.tsv"), "a.png\tstripes\nb.png\tchecks\n").unwrap();

    // Manifest order follows the listed paths.
    let items = load_dataset(root, None).unwrap();
    assert_eq!(items.len(), 2);
    assert_eq!(items[0].category, "stripes");
    assert_eq!(items[1].category, "checks");

    let index = build_index(&items, DescriptorKind::Lbp).unwrap();
    let reports = evaluate(&index, DistanceMetric::ChiSquare, &[1], false).unwrap();
    assert_eq!(reports[0].p_total, 1.0);
}
