use mrweb_core::eval::{
    area_difference, evaluate_pair, match_resources, position_offset, rer, text_difference, PageInputs,
    SeriesStatus,
};
use mrweb_core::raster::RasterImage;
use mrweb_core::resource::{BoundingBox, ResourceEntry, ResourceKind, ResourceList};
use mrweb_oracles::lcs_exhaustive;
use proptest::prelude::*;

fn list_strategy(max: usize) -> impl Strategy<Value = ResourceList> {
    prop::collection::vec((0usize..5, 0usize..4, 0.0f64..900.0, 0.0f64..1900.0, 1.0f64..100.0), 0..max).prop_map(
        |items| {
            let mut list = ResourceList::new("https://a.com", 1000.0, 2000.0);
            for (kind, url, x, y, size) in items {
                list.entries.push(ResourceEntry::new(
                    BoundingBox::new(x, y, x + size, y + size / 2.0),
                    ResourceKind::ALL[kind],
                    format!("/r{url}"),
                ));
            }
            list
        },
    )
}

/// Reference list of `n` distinct URLs, alternating link and image kinds.
pub fn matchable_list(n: usize) -> ResourceList {
    let mut list = ResourceList::new("https://a.com", 1000.0, 2000.0);
    for i in 0..n {
        let kind = if i % 2 == 0 { ResourceKind::InternalLink } else { ResourceKind::Image };
        let y = 90.0 * i as f64;
        list.entries.push(ResourceEntry::new(BoundingBox::new(10.0, y, 200.0, y + 40.0), kind, format!("/item/{i}")));
    }
    list
}

#[test]
fn rer_perturbation_law_exhaustive() {
    for n in 1..=20usize {
        let reference = matchable_list(n);
        for k in 0..=n {
            let mut generated = reference.clone();
            // Remove k entries spread across the list.
            let doomed: Vec<usize> = (0..k).map(|i| i * n / k.max(1)).collect();
            generated.entries = generated
                .entries
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !doomed.contains(i))
                .map(|(_, e)| e)
                .collect();
            assert_eq!(generated.len(), n - k);
            let m = match_resources(&reference, &generated);
            assert_eq!(rer(&m, n), Some((n - k) as f64 / n as f64), "n={n} k={k}");
        }
    }
}

#[test]
fn self_evaluation_is_perfect() {
    let img = RasterImage::from_fn(64, 48, |x, y| [(x * 3) as u8, (y * 5) as u8, 99]);
    let mut list = ResourceList::new("https://a.com", 64.0, 48.0);
    list.entries.push(
        ResourceEntry::new(BoundingBox::new(2.0, 2.0, 30.0, 10.0), ResourceKind::InternalLink, "/x").with_text("Go"),
    );
    list.entries.push(ResourceEntry::new(BoundingBox::new(5.0, 20.0, 60.0, 40.0), ResourceKind::Image, "/i.png"));
    let page = PageInputs {
        image: img,
        resources: list,
        embedding: None,
    };
    let report = evaluate_pair("p", &page, &page, 42).unwrap();
    assert_eq!(report.visual.mae, 0.0);
    assert_eq!(report.visual.nemd, 1.0);
    assert!((report.visual.ssim - 1.0).abs() < 1e-9);
    assert_eq!(report.rer, Some(1.0));
    for series in [
        &report.fine_grained.position_offset,
        &report.fine_grained.area_difference,
        &report.fine_grained.color_difference,
        &report.fine_grained.text_difference,
    ] {
        assert!(series.mean.unwrap().abs() < 1e-9);
    }
}

#[test]
fn empty_generated_list_has_no_pairs() {
    let img = RasterImage::filled(32, 32, [200, 10, 10]);
    let reference = PageInputs {
        image: img.clone(),
        resources: matchable_list(3),
        embedding: None,
    };
    let generated = PageInputs {
        image: img,
        resources: ResourceList::new("https://a.com", 32.0, 32.0),
        embedding: None,
    };
    let report = evaluate_pair("p", &reference, &generated, 1).unwrap();
    assert_eq!(report.rer, Some(0.0));
    assert_eq!(report.fine_grained.position_offset.status, SeriesStatus::NoPairs);
    assert_eq!(report.fine_grained.position_offset.mean, None);
    assert!(report.flags.iter().any(|f| f.contains("no pairs")));
}

proptest! {
    #[test]
    fn matching_invariants_hold(reference in list_strategy(12), generated in list_strategy(12)) {
        let m = match_resources(&reference, &generated);
        prop_assert!(m.is_consistent(reference.len(), generated.len()));
        for &(i, j) in &m.pairs {
            prop_assert_eq!(&reference.entries[i].url, &generated.entries[j].url);
            prop_assert!(reference.entries[i].kind.compatible_with(generated.entries[j].kind));
        }
        prop_assert_eq!(match_resources(&reference, &generated), m);
    }

    #[test]
    fn identical_entries_have_zero_geometry_error(list in list_strategy(6)) {
        for e in &list.entries {
            prop_assert_eq!(position_offset(e, e, list.width, list.height), 0.0);
            prop_assert_eq!(area_difference(e, e), Some(0.0));
        }
    }

    #[test]
    fn text_difference_bounds_and_oracle(a in "[ab ]{0,8}", b in "[abc ]{0,8}") {
        let d = text_difference(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d == 0.0, a.trim() == b.trim());
        let (ta, tb) = (a.trim(), b.trim());
        if !(ta.is_empty() && tb.is_empty()) {
            let m = lcs_exhaustive(ta, tb) as f64;
            let want = 1.0 - 2.0 * m / (ta.chars().count() + tb.chars().count()) as f64;
            prop_assert!((d - want).abs() < 1e-12);
        }
    }
}
