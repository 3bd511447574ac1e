//! Property tests for the metric, distortion and harness invariants.

use std::fs;

use mrqa::distort::{apply, DistortionKind, DistortionSpec};
use mrqa::harness::{aggregate_median, run_on, BenchmarkConfig, ImageSet, Models, ResultRow};
use mrqa::image::{make_phantom, save_raster, ImageGrid, RasterFormat};
use mrqa::quality::{
    brisque_features, mean_line_correlation, mean_shifted_line_correlation, mean_total_variation,
};
use mrqa::reference::{cw_ssim, error_metrics, ms_ssim, nmi, pcc, psnr, ssim};
use mrqa::{evaluate, Metric, MetricContext, Normalization};
use proptest::prelude::*;

fn image(side: usize) -> impl Strategy<Value = ImageGrid> {
    proptest::collection::vec(-1e3f64..1e3, side * side)
        .prop_filter("nonconstant", |v| v.iter().any(|x| *x != v[0]))
        .prop_map(move |v| ImageGrid::new(side, side, v).unwrap())
}

fn pair(side: usize) -> impl Strategy<Value = (ImageGrid, ImageGrid)> {
    (image(side), image(side))
}

fn joint_range(a: &ImageGrid, b: &ImageGrid) -> f64 {
    a.max().max(b.max()) - a.min().min(b.min())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_values(i in image(24)) {
        let l = i.range();
        prop_assert!((ssim(&i, &i, l).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((cw_ssim(&i, &i).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((pcc(&i, &i).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((nmi(&i, &i, 256).unwrap() - 2.0).abs() < 1e-9);
        let e = error_metrics(&i, &i).unwrap();
        prop_assert_eq!((e.mae, e.mse, e.rmse, e.nmse), (0.0, 0.0, 0.0, Some(0.0)));
        prop_assert_eq!(psnr(&i, &i, l).unwrap(), f64::INFINITY);
    }

    #[test]
    fn symmetric_metrics((a, b) in pair(16)) {
        let (ab, ba) = (error_metrics(&a, &b).unwrap(), error_metrics(&b, &a).unwrap());
        prop_assert_eq!(ab.mse, ba.mse);
        prop_assert_eq!(ab.mae, ba.mae);
        prop_assert_eq!(ab.rmse, ba.rmse);
        prop_assert_eq!(pcc(&a, &b).unwrap(), pcc(&b, &a).unwrap());
        prop_assert_eq!(nmi(&a, &b, 256).unwrap(), nmi(&b, &a, 256).unwrap());
        let l = joint_range(&a, &b);
        prop_assert_eq!(ssim(&a, &b, l).unwrap(), ssim(&b, &a, l).unwrap());
    }

    #[test]
    fn joint_scaling_invariance((a, b) in pair(16), s in 0.01f64..100.0) {
        let l = joint_range(&a, &b);
        let sa = a.map(|v| s * v).unwrap();
        let sb = b.map(|v| s * v).unwrap();
        prop_assert!((ssim(&sa, &sb, s * l).unwrap() - ssim(&a, &b, l).unwrap()).abs() < 1e-9);
        let p = psnr(&a, &b, l).unwrap();
        prop_assert!((psnr(&sa, &sb, s * l).unwrap() - p).abs() < 1e-9 * p.abs().max(1.0));
    }

    #[test]
    fn nmi_and_pcc_survive_normalization((a, b) in pair(16)) {
        let base_nmi = nmi(&a, &b, 256).unwrap();
        let base_pcc = pcc(&a, &b).unwrap();
        for norm in [
            Normalization::minmax(),
            Normalization::CMinmax { lower: 0.0, upper: 100.0, target: (0.0, 1.0) },
            Normalization::Zscore,
            Normalization::Quantile,
        ] {
            let (na, nb) = (norm.apply(&a).unwrap(), norm.apply(&b).unwrap());
            prop_assert!((nmi(&na, &nb, 256).unwrap() - base_nmi).abs() < 1e-9, "{}", norm);
            prop_assert!((pcc(&na, &nb).unwrap() - base_pcc).abs() < 1e-9, "{}", norm);
        }
    }

    #[test]
    fn line_correlations_are_affine_invariant(i in image(16), s in prop_oneof![0.01f64..100.0, -100.0f64..-0.01], t in -1e3f64..1e3) {
        let j = i.map(|v| s * v + t).unwrap();
        prop_assert!((mean_line_correlation(&i).unwrap() - mean_line_correlation(&j).unwrap()).abs() < 1e-12);
        prop_assert!(
            (mean_shifted_line_correlation(&i).unwrap() - mean_shifted_line_correlation(&j).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn mtv_is_linear_in_scale(i in image(16), s in 0.01f64..100.0) {
        let scaled = mean_total_variation(&i.map(|v| s * v).unwrap());
        let expected = s * mean_total_variation(&i);
        prop_assert!((scaled - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn brisque_features_ignore_shifts(seed in 0u64..1000, shift in -500.0f64..500.0) {
        let img = make_phantom(seed, 64, 64).unwrap();
        let a = brisque_features(&img).unwrap();
        let b = brisque_features(&img.map(|v| v + shift).unwrap()).unwrap();
        for (x, y) in a.0.iter().zip(&b.0) {
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn nr_metrics_are_deterministic(seed in 0u64..1000) {
        let img = make_phantom(seed, 64, 64).unwrap();
        let ctx = MetricContext::default();
        for m in Metric::ALL.into_iter().filter(|m| !m.is_reference() && *m != Metric::Niqe && *m != Metric::Brisque) {
            let a = evaluate(m, &img, None, &ctx).map(f64::to_bits).map_err(|e| e.to_string());
            let b = evaluate(m, &img, None, &ctx).map(f64::to_bits).map_err(|e| e.to_string());
            prop_assert_eq!(a, b, "{}", m);
        }
    }

    #[test]
    fn distortions_are_pure_and_range_aware(seed in 0u64..1000, strength in 1.0f64..=5.0) {
        let img = make_phantom(seed % 7, 64, 64).unwrap();
        for kind in DistortionKind::ALL {
            let spec = DistortionSpec::new(kind, strength, seed).unwrap();
            prop_assert_eq!(apply(&img, &spec).unwrap(), apply(&img, &spec).unwrap());
        }
        let f = 0.05 + (strength - 1.0) / 4.0 * 0.20;
        let shifted = apply(&img, &DistortionSpec::new(DistortionKind::ShiftIntensity, strength, seed).unwrap()).unwrap();
        prop_assert!((shifted.min() - img.min() - f * img.range()).abs() < 1e-9 * img.range());
        prop_assert!((shifted.max() - img.max() - f * img.range()).abs() < 1e-9 * img.range());
        for kind in [DistortionKind::GammaHigh, DistortionKind::GammaLow] {
            let out = apply(&img, &DistortionSpec::new(kind, strength, seed).unwrap()).unwrap();
            prop_assert!((out.min() - img.min()).abs() < 1e-9);
            prop_assert!((out.max() - img.max()).abs() < 1e-9);
        }
        let replaced = apply(&img, &DistortionSpec::new(DistortionKind::ReplaceArtifact, strength, seed).unwrap()).unwrap();
        for r in 0..64 {
            for c in 0..=32 {
                prop_assert_eq!(replaced.get(r, c).to_bits(), img.get(r, c).to_bits());
            }
        }
    }

    #[test]
    fn median_is_permutation_invariant(scores in proptest::collection::vec(prop_oneof![4 => -1e3f64..1e3, 1 => Just(f64::INFINITY)], 1..40), rot in 0usize..40) {
        let rows: Vec<ResultRow> = scores
            .iter()
            .enumerate()
            .map(|(k, &s)| ResultRow {
                image_id: format!("i{k}"),
                distortion: Some(DistortionKind::ALL[k % 3]),
                strength: 1.0,
                normalization: "none".into(),
                metric: Metric::Psnr,
                score: Ok(s),
            })
            .collect();
        let mut shuffled = rows.clone();
        shuffled.rotate_left(rot % rows.len());
        shuffled.reverse();
        prop_assert_eq!(aggregate_median(&rows).unwrap(), aggregate_median(&shuffled).unwrap());
    }
}

#[test]
fn ms_ssim_identity_on_phantoms() {
    for seed in 0..3 {
        let img = make_phantom(seed, 192, 192).unwrap();
        assert!((ms_ssim(&img, &img, img.range()).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn mse_grows_with_noise_level() {
    let img = make_phantom(5, 64, 64).unwrap();
    let mut rng_strengths: Vec<f64> = (0..1000).map(|k| 1.0 + 4.0 * k as f64 / 999.0).collect();
    rng_strengths.dedup();
    for (k, pair) in rng_strengths.windows(2).enumerate() {
        let seed = k as u64;
        let mse = |s: f64| {
            let noisy = apply(&img, &DistortionSpec::new(DistortionKind::GaussianNoise, s, seed).unwrap()).unwrap();
            error_metrics(&noisy, &img).unwrap().mse
        };
        assert!(mse(pair[1]) > mse(pair[0]), "strengths {pair:?} seed {seed}");
    }
}

fn tiny_config(metrics: Vec<Metric>) -> BenchmarkConfig {
    let mut c = BenchmarkConfig::phantoms(1, metrics);
    c.phantom_size = 64;
    c.distortions = vec![DistortionKind::GaussianBlur, DistortionKind::Ghosting];
    c.strengths = vec![1.0, 3.0, 5.0];
    c
}

#[test]
fn unreadable_image_loses_only_its_rows() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let img = make_phantom(seed, 64, 64).unwrap();
        save_raster(&img, dir.path().join(format!("img{seed}.npy")), RasterFormat::Npy).unwrap();
    }
    fs::write(dir.path().join("img1b.npy"), b"not an npy file").unwrap();
    let set = ImageSet::from_dir(dir.path()).unwrap();
    assert_eq!(set.ids, vec!["img0", "img1", "img2"]);
    assert_eq!(set.failures.len(), 1);
    assert_eq!(set.failures[0].0, "img1b");

    let c = tiny_config(vec![Metric::Ssim, Metric::Mtv]);
    let rows = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
    // per image: 1 reference mtv row + 2 kinds x 3 strengths x 2 metrics
    assert_eq!(rows.len(), 3 * 13);
}

#[test]
fn pooled_count_matches_images_times_strengths_minus_errors() {
    let c = tiny_config(vec![Metric::Pcc, Metric::Dsc]);
    let set = ImageSet::phantoms(2, 64, 0).unwrap();
    let rows = run_on(&c, &set, &[Normalization::None], &Models::default()).unwrap();
    let table = aggregate_median(&rows).unwrap();
    for cell in &table.cells {
        let errors = rows
            .iter()
            .filter(|r| r.distortion == cell.distortion && r.metric == cell.metric && r.score.is_err())
            .count();
        assert_eq!(cell.count, 2 * 3 - errors, "{:?} {}", cell.distortion, cell.metric);
    }
    // DSC on intensity images is undefined, every row is an error
    assert!(table.cells.iter().filter(|c| c.metric == Metric::Dsc).all(|c| c.count == 0));
}
