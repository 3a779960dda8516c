mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crowdseg::aggregation::{aggregate_partitions, superpixel_scores, NormalizationScope, WeightedClicks};
use crowdseg::candidates::generate_candidates;
use crowdseg::clicks::{ClickRecord, Label};
use crowdseg::dataset::{LabeledImage, PreparedImage};
use crowdseg::evaluation::{calibrate_threshold, threshold_grid};
use crowdseg::imaging::{BinaryMask, Raster};
use crowdseg::quality::click_error_rate;
use crowdseg::simulation::{
    generate_scene, simulate_clicks, simulate_dataset, SceneSpec, Shape, SimulationConfig, WorkerKind, WorkerModel,
};
use crowdseg::superpixels::{felzenszwalb, FelzParams, MultiscaleConfig, Partition};

use common::{connected_subset_count, disc_pixel_count, felzenszwalb_oracle, prepare_scenes};

fn hand_jaccard(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let inter = a.bits().iter().zip(b.bits()).filter(|(x, y)| **x && **y).count();
    let union = a.bits().iter().zip(b.bits()).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[test]
fn felzenszwalb_matches_predicate_oracle_on_tiny_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // a small palette makes equal edge weights, and therefore tie-breaking, common
    let palette = [[0u8, 0, 0], [30, 30, 30], [200, 10, 10], [255, 255, 255]];
    for case in 0..2000 {
        let (w, h) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let px = (0..w * h).map(|_| palette[rng.random_range(0..palette.len())]).collect();
        let r = Raster::new(w, h, px).unwrap();
        let k = [0.5, 10.0, 40.0, 150.0, 400.0, 1e6][rng.random_range(0..6)];
        let min_size = rng.random_range(1..=4);
        let got = felzenszwalb(&r, &FelzParams { k, sigma: 0.0, min_size }).unwrap();
        let want = felzenszwalb_oracle(&r, k, min_size);
        assert_eq!(got.labels(), &want[..], "case {case}: {w}x{h}, k={k}, min_size={min_size}");
    }
}

#[test]
fn felzenszwalb_black_white_fixtures() {
    let px = (0..64).map(|i| if i % 8 < 4 { [0, 0, 0] } else { [255, 255, 255] }).collect();
    let r = Raster::new(8, 8, px).unwrap();
    for (k, n) in [(10.0, 2), (1e6, 1)] {
        let got = felzenszwalb(&r, &FelzParams { k, sigma: 0.0, min_size: 1 }).unwrap();
        assert_eq!(got.labels(), &felzenszwalb_oracle(&r, k, 1)[..]);
        assert_eq!(got.count(), n);
    }
}

#[test]
fn grid_candidates_match_subset_enumeration() {
    // 3x3 blocks of 3x3 pixels
    let labels = (0..81).map(|i| ((i / 9) / 3 * 3 + (i % 9) / 3) as u32).collect();
    let p = Partition::new(9, 9, labels).unwrap();
    let adjacency: Vec<Vec<usize>> = p
        .adjacency()
        .into_iter()
        .map(|v| v.into_iter().map(|u| u as usize).collect())
        .collect();
    let expected = connected_subset_count(&adjacency, 3);
    assert_eq!(expected, 9 + 12 + 22);
    assert_eq!(generate_candidates([&p], 10_000).unwrap().len(), expected);
}

#[test]
fn disc_truth_matches_rasterization() {
    let spec = SceneSpec {
        width: 64,
        height: 64,
        shape: Shape::Disc {
            cx: 32.0,
            cy: 32.0,
            radius: 16.0,
        },
        noise_level: 5.0,
        contrast: 80.0,
        seed: 3,
    };
    let scene = generate_scene(&spec).unwrap();
    assert_eq!(scene.truth.count_ones(), disc_pixel_count(32.0, 32.0, 16.0, 64, 64));
}

#[test]
fn mixed_bucket_averages_contributions() {
    let p = Partition::new(2, 1, vec![0, 0]).unwrap();
    let clicks = vec![
        ClickRecord::new("img", "a", 0, 0, Label::Foreground),
        ClickRecord::new("img", "b", 1, 0, Label::Background),
    ];
    let q = [("a".to_string(), 0.8), ("b".to_string(), 0.6)].into_iter().collect();
    let weighted = WeightedClicks::new(clicks.clone(), q).unwrap();
    // per-click accumulation
    let mut sum = 0.0;
    for c in &clicks {
        let qw = if c.worker_id == "a" { 0.8 } else { 0.6 };
        sum += if c.label.is_foreground() { qw } else { 1.0 - qw };
    }
    let expected = sum / clicks.len() as f64;
    let got = superpixel_scores(&p, &weighted).unwrap()[0].unwrap();
    assert!((got - expected).abs() < 1e-12 && (got - 0.6).abs() < 1e-12);
}

fn gold_scene(seed: u64) -> (String, crowdseg::simulation::SyntheticScene) {
    let ds = simulate_dataset(
        &SimulationConfig {
            n_test: 1,
            n_gold: 1,
            ..Default::default()
        },
        seed,
    )
    .unwrap();
    ds.gold.into_iter().next().unwrap()
}

fn truth_only(id: &str, scene: &crowdseg::simulation::SyntheticScene) -> Vec<PreparedImage> {
    let config = MultiscaleConfig {
        felzenszwalb_k: vec![100.0],
        slic_region_sizes: vec![],
        ..Default::default()
    };
    vec![PreparedImage::prepare(
        LabeledImage::new(id, scene.raster.clone(), Some(scene.truth.clone())).unwrap(),
        &config,
    )
    .unwrap()]
}

#[test]
fn spammer_error_rate_is_binomial() {
    let (id, scene) = gold_scene(21);
    let gold = truth_only(&id, &scene);
    let n = 1000;
    let model = WorkerModel::new(WorkerKind::Spammer, n, 4);
    let clicks = simulate_clicks(&model, &scene, &id, "s").unwrap();
    let rate = click_error_rate(&clicks, &gold, 0.0).unwrap();
    let sigma = (0.25 / n as f64).sqrt();
    assert!((rate - 0.5).abs() <= 3.0 * sigma, "rate {rate}, 3 sigma = {}", 3.0 * sigma);

    for (kind, want) in [(WorkerKind::Perfect, 0.0), (WorkerKind::Adversarial, 1.0)] {
        let clicks = simulate_clicks(&WorkerModel::new(kind, 200, 4), &scene, &id, "x").unwrap();
        assert_eq!(click_error_rate(&clicks, &gold, 0.0).unwrap(), want);
    }
}

#[test]
fn sloppy_error_rate_grows_with_jitter() {
    let sigmas = [0.0, 1.0, 2.0, 3.0, 5.0, 8.0];
    let mut means = vec![0.0; sigmas.len()];
    for seed in 0..10 {
        let (id, scene) = gold_scene(seed);
        let gold = truth_only(&id, &scene);
        for (i, &s) in sigmas.iter().enumerate() {
            let model = WorkerModel {
                jitter_sigma: s,
                ..WorkerModel::new(WorkerKind::Sloppy, 400, seed)
            };
            let clicks = simulate_clicks(&model, &scene, &id, "w").unwrap();
            means[i] += click_error_rate(&clicks, &gold, 0.0).unwrap() / 10.0;
        }
    }
    assert_eq!(means[0], 0.0);
    for pair in means.windows(2) {
        assert!(pair[0] <= pair[1], "error rates by sigma: {means:?}");
    }
}

#[test]
fn error_rate_ignores_order_and_grows_under_corruption() {
    let (id, scene) = gold_scene(8);
    let gold = truth_only(&id, &scene);
    let clicks = simulate_clicks(&WorkerModel::new(WorkerKind::Perfect, 60, 1), &scene, &id, "w").unwrap();
    let base = click_error_rate(&clicks, &gold, 0.0).unwrap();
    let mut reversed = clicks.clone();
    reversed.reverse();
    assert_eq!(click_error_rate(&reversed, &gold, 0.0).unwrap(), base);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut prev = base;
    let mut corrupted = clicks.clone();
    for _ in 0..10 {
        for c in corrupted.iter_mut() {
            if rng.random_bool(0.1) && c.label == clicks[0].label {
                c.label = c.label.flipped();
            }
        }
        let rate = click_error_rate(&corrupted, &gold, 0.0).unwrap();
        assert!(rate >= prev);
        prev = rate;
    }
}

#[test]
fn calibration_matches_exhaustive_reevaluation() {
    let ds = simulate_dataset(
        &SimulationConfig {
            n_test: 1,
            n_gold: 3,
            ..Default::default()
        },
        13,
    )
    .unwrap();
    let gold = prepare_scenes(&ds.gold, &MultiscaleConfig::default());
    let ids: Vec<&str> = gold.iter().map(|g| g.id()).collect();
    let on_gold: Vec<ClickRecord> = ds
        .traces
        .clicks
        .iter()
        .filter(|c| ids.contains(&c.image_id.as_str()))
        .cloned()
        .collect();
    let weighted = WeightedClicks::uniform(on_gold, 0.9).unwrap();
    let cal = calibrate_threshold(&gold, &weighted, NormalizationScope::AllSuperpixels).unwrap();

    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for t in threshold_grid() {
        let mut sum = 0.0;
        for g in &gold {
            let agg = aggregate_partitions(g.partitions(), &weighted.for_image(g.id()), t, NormalizationScope::AllSuperpixels)
                .unwrap();
            sum += hand_jaccard(&agg.mask, g.image.truth().unwrap());
        }
        let mean = sum / gold.len() as f64;
        if mean > best.1 {
            best = (t, mean);
        }
    }
    assert_eq!(cal.threshold, best.0);
    assert!((cal.mean_jaccard - best.1).abs() < 1e-12);
}
