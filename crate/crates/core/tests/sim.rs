use std::collections::BTreeMap;

use proptest::prelude::*;

use lineage_ilp::eval::match_iou;
use lineage_ilp::sim::{corrupt, event_counts, simulate, Border, CorruptionConfig, SimConfig};

fn small(seed: u64) -> SimConfig {
    SimConfig {
        seed,
        frames: 25,
        width: 90,
        height: 80,
        initial_cells: 6,
        division_rate: 0.05,
        ..Default::default()
    }
}

#[test]
fn same_seed_same_sequence() {
    let a = simulate(&small(7)).unwrap();
    let b = simulate(&small(7)).unwrap();
    assert_eq!(a, b);
    let c = simulate(&small(8)).unwrap();
    assert_ne!(a.1, c.1);
}

#[test]
fn sequential_and_parallel_agree() {
    let a = simulate(&small(3)).unwrap();
    let b = lineage_ilp::par::sequential(|| simulate(&small(3)).unwrap());
    assert_eq!(a, b);
}

#[test]
fn default_sequence_has_every_event_kind() {
    let (frames, gt) = simulate(&SimConfig::default()).unwrap();
    assert_eq!(frames.len(), 50);
    let ev = event_counts(&gt);
    assert!(ev.divisions >= 1 && ev.enters >= 1 && ev.exits >= 1, "{ev:?}");
}

#[test]
fn clean_corruption_is_the_reference() {
    let (frames, gt) = simulate(&small(2)).unwrap();
    let props = corrupt(&gt, &frames, &CorruptionConfig::default()).unwrap();
    let cells: usize = gt.markers.iter().map(Vec::len).sum();
    assert_eq!(props.len(), cells);
    let v = match_iou(&props, &gt, 0.5).unwrap();
    assert_eq!((v.tp(), v.fp(), v.fn_()), (cells, 0, 0));
    for p in &props {
        let regions = gt.label_grids[&p.t].masks_by_label();
        assert!(regions.values().any(|m| *m == p.mask));
    }
}

#[test]
fn corruption_is_seeded() {
    let (frames, gt) = simulate(&small(2)).unwrap();
    let cfg = CorruptionConfig {
        seed: 1,
        drop: 0.1,
        clutter: 0.2,
        merge: 0.2,
        split: 0.2,
        jitter: 1.0,
        score_noise: 0.1,
    };
    let a = corrupt(&gt, &frames, &cfg).unwrap();
    assert_eq!(a, corrupt(&gt, &frames, &cfg).unwrap());
    assert_ne!(
        a,
        corrupt(&gt, &frames, &CorruptionConfig { seed: 2, ..cfg.clone() }).unwrap()
    );
    let mut ids: Vec<u64> = a.iter().map(|p| p.id).collect();
    ids.dedup();
    assert_eq!(ids.len(), a.len());
    assert!(a
        .iter()
        .all(|p| (0.0..=1.0).contains(&p.score) && p.mask.fits_in(90, 80)));
}

#[test]
fn bad_rates_are_config_errors() {
    let cfg = SimConfig {
        division_rate: 1.5,
        ..small(0)
    };
    assert!(matches!(simulate(&cfg), Err(lineage_ilp::Error::Config(_))));
    let (frames, gt) = simulate(&small(0)).unwrap();
    let bad = CorruptionConfig {
        drop: -0.1,
        ..Default::default()
    };
    assert!(matches!(
        corrupt(&gt, &frames, &bad),
        Err(lineage_ilp::Error::Config(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn annotation_is_self_consistent(seed in 0u64..10_000, reflecting: bool) {
        let cfg = SimConfig {
            border: if reflecting { Border::Reflecting } else { Border::Absorbing },
            ..small(seed)
        };
        let (frames, gt) = simulate(&cfg).unwrap();
        prop_assert!(gt.validate().is_ok());
        prop_assert_eq!(frames.len(), cfg.frames);
        let last = cfg.frames - 1;
        let children = gt.children();
        for (t, markers) in gt.markers.iter().enumerate() {
            let grid = &gt.label_grids[&t];
            for m in markers {
                // every marker lies on its own cell
                prop_assert_eq!(grid.get(m.x, m.y), m.track_id);
            }
            let labels: Vec<u32> = grid.masks_by_label().into_keys().collect();
            let mut expect: Vec<u32> = markers.iter().map(|m| m.track_id).collect();
            expect.sort_unstable();
            prop_assert_eq!(labels, expect);
        }
        let by_label: BTreeMap<u32, _> = gt.tracks.iter().map(|r| (r.label, *r)).collect();
        for r in &gt.tracks {
            if r.parent != 0 {
                prop_assert_eq!(by_label[&r.parent].end + 1, r.birth);
            }
            if let Some(kids) = children.get(&r.label) {
                prop_assert_eq!(kids.len(), 2);
            }
            let short = r.end - r.birth + 1 < cfg.min_lifetime;
            prop_assert!(!short || r.parent != 0 || children.contains_key(&r.label) || r.end == last);
        }
    }
}
