//! Property suites, one function per module. Each runs at least 128
//! generated cases from a fixed seed and reports the first failure.

use ares::autoencoder::{tabular_architecture, TABULAR_DEPTH};
use ares::datasets::{make_split, standardize, LabelledDataset, SplitParams, Standardizer};
use ares::density::{fit_gaussians, knn_distance_score, GdMetric, LofModel};
use ares::eval::{auc, wilcoxon_one_sided};
use ares::latent::LatentIndex;
use ares::math::{fit_pca, median, DenseMatrix};
use ares::nn::{train, AdamConfig, AdamState, Mode, TrainConfig};
use ares::scoring::{local_reconstruction_from_errors, AresConfig, AresScorer};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use super::oracles::{euclid, gradient_check};
use super::{heteroscedastic_run, matrix, random_network, rng, uniform_rows};

pub const CASES: u32 = 128;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn rows_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n, 1..=max_d).prop_flat_map(|(n, d)| proptest::collection::vec(proptest::collection::vec(-10.0..10.0f64, d), n))
}

pub type Suite = (&'static str, &'static str, fn() -> Result<(), String>);

/// Suites as (module, name, runner) triples.
pub fn all() -> Vec<Suite> {
    vec![
        ("core_math", "pca full reconstruction", pca_full_reconstruction),
        ("core_math", "pca cumulative ratios", pca_cumulative_ratios),
        ("core_math", "median permutation and bounds", median_permutation_and_bounds),
        ("neuralnet", "gradient check per layer type", gradient_check_per_layer),
        ("neuralnet", "adam quadratic descent", adam_quadratic_descent),
        ("neuralnet", "eval forward is pure", eval_forward_pure),
        ("neuralnet", "best epoch has minimum val loss", best_epoch_is_minimum),
        ("autoencoder", "architecture invariants", architecture_invariants),
        ("autoencoder", "anomalies reconstruct worse", anomalies_reconstruct_worse),
        ("latent_index", "distances sorted and exact", knn_distances_sorted_and_exact),
        ("latent_index", "self exclusion", knn_self_exclusion),
        ("latent_index", "deterministic queries", knn_deterministic),
        ("density", "uniform sample lof band", lof_uniform_band),
        ("density", "lof scale invariance", lof_scale_invariance),
        ("density", "knn distance monotone in k", knn_monotone_in_k),
        ("density", "multimodal gd is a minimum", gd_multimodal_minimum),
        ("scoring", "shift property", scoring_shift_property),
        ("scoring", "test-set independence", scoring_test_set_independence),
        ("scoring", "ares beats raw error on heteroscedastic data", scoring_heteroscedastic_auc),
        ("evaluation", "auc monotone transforms", auc_monotone_transforms),
        ("evaluation", "auc complement", auc_complement),
        ("evaluation", "wilcoxon monotone in advantage", wilcoxon_monotone),
        ("datasets", "split disjoint and 80:20", split_disjoint_ratio),
        ("datasets", "no test leakage into scaling", standardize_no_leakage),
        ("cli", "config json round trip", config_round_trip),
        ("cli", "unknown keys rejected", config_unknown_keys),
    ]
}

pub fn pca_full_reconstruction() -> Result<(), String> {
    check(CASES, rows_strategy(30, 6), |rows| {
        let x = matrix(&rows);
        let r = x.rows().min(x.cols());
        let Ok(pca) = fit_pca(&x, r) else { return Ok(()) };
        if r < x.cols() {
            return Ok(());
        }
        for row in &rows {
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().max(1.0);
            let err = pca.reconstruction_error(row).unwrap();
            prop_assert!(err / norm < 1e-16, "relative error {}", err / norm);
        }
        Ok(())
    })
}

pub fn pca_cumulative_ratios() -> Result<(), String> {
    check(CASES, rows_strategy(30, 6), |rows| {
        let x = matrix(&rows);
        let r = x.rows().min(x.cols());
        let Ok(pca) = fit_pca(&x, r) else { return Ok(()) };
        let mut cum = 0.0;
        for v in pca.explained_variance_ratio() {
            prop_assert!(v >= -1e-12);
            cum += v;
        }
        if r == x.cols() {
            prop_assert!((cum - 1.0).abs() <= 1e-9, "cumulative {cum}");
        }
        let c = &pca.components;
        for i in 0..c.cols() {
            for j in 0..c.cols() {
                let dot: f64 = (0..c.rows()).map(|k| c.get(k, i) * c.get(k, j)).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8);
            }
        }
        prop_assert!(pca.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        Ok(())
    })
}

pub fn median_permutation_and_bounds() -> Result<(), String> {
    let s = proptest::collection::vec(-1e6..1e6f64, 1..60).prop_flat_map(|v| {
        let n = v.len();
        (Just(v), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    check(CASES, s, |(v, perm)| {
        let m = median(&v).unwrap();
        let shuffled: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
        prop_assert_eq!(m, median(&shuffled).unwrap());
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m && m <= hi);
        Ok(())
    })
}

pub fn gradient_check_per_layer() -> Result<(), String> {
    // 0: dense only, 1: dense + leaky relu, 2: dense + leaky relu + batch norm
    check(CASES, (0..3usize, any::<u64>(), 2..5usize), |(variant, seed, width)| {
        let widths = [3, width, 2];
        let net = match variant {
            0 => {
                let mut r = rng(seed);
                ares::nn::Network::new(vec![ares::nn::Layer::Dense(ares::nn::DenseLayer::init(3, 2, 0.01, &mut r))]).unwrap()
            }
            1 => random_network(&widths, false, seed),
            _ => random_network(&widths, true, seed),
        };
        let mut r = rng(seed ^ 1);
        let x = matrix(&uniform_rows(8, 3, &mut r));
        let t = matrix(&uniform_rows(8, 2, &mut r));
        let err = gradient_check(&net, &x, &t, 1e-5);
        prop_assert!(err < 1e-4, "variant {variant}: relative error {err}");
        Ok(())
    })
}

pub fn adam_quadratic_descent() -> Result<(), String> {
    let mut w = vec![1.0, 1.0];
    let mut adam = AdamState::new(AdamConfig::default(), &[2]);
    let mut prev = f64::INFINITY;
    for step in 0..50 {
        let loss: f64 = w.iter().map(|v| v * v).sum();
        if loss >= prev {
            return Err(format!("loss did not decrease at step {step}"));
        }
        prev = loss;
        let g: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        adam.step(vec![w.as_mut_slice()], &[g.as_slice()]).map_err(|e| e.to_string())?;
    }
    Ok(())
}

pub fn eval_forward_pure() -> Result<(), String> {
    check(CASES, any::<u64>(), |seed| {
        let net = random_network(&[4, 5, 3, 4], true, seed);
        let x = matrix(&uniform_rows(6, 4, &mut rng(seed)));
        let a = net.forward(&x, Mode::Eval).unwrap().0;
        let b = net.forward(&x, Mode::Eval).unwrap().0;
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn best_epoch_is_minimum() -> Result<(), String> {
    check(CASES, (any::<u64>(), 1..4usize), |(seed, patience)| {
        let mut net = random_network(&[3, 2, 3], true, seed);
        let mut r = rng(seed);
        let x = matrix(&uniform_rows(24, 3, &mut r));
        let v = matrix(&uniform_rows(8, 3, &mut r));
        let config = TrainConfig {
            max_epochs: 12,
            patience,
            batch_size: 8,
            seed,
            ..TrainConfig::default()
        };
        let report = train(&mut net, &x, &v, &config).unwrap();
        let min = report.history.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(report.best_val_loss, min);
        let best = report.history.iter().find(|e| e.epoch == report.best_epoch).unwrap();
        prop_assert_eq!(best.val_loss, min);
        Ok(())
    })
}

pub fn architecture_invariants() -> Result<(), String> {
    check(CASES, (2..400usize).prop_flat_map(|d| (Just(d), 1..d)), |(d, b)| {
        let a = tabular_architecture(d, b).unwrap();
        prop_assert_eq!(a.encoder_sizes.len(), TABULAR_DEPTH + 1);
        prop_assert_eq!(a.encoder_sizes[0], d);
        prop_assert_eq!(*a.encoder_sizes.last().unwrap(), b);
        prop_assert!(a.encoder_sizes.windows(2).all(|w| w[0] >= w[1]));
        let rev: Vec<usize> = a.encoder_sizes.iter().rev().copied().collect();
        prop_assert_eq!(&a.decoder_sizes, &rev);
        let model = ares::autoencoder::AutoencoderModel::new(a, 0).unwrap();
        // the output layer carries no activation or normalization
        prop_assert!(matches!(model.network().layers().last(), Some(ares::nn::Layer::Dense(_))));
        Ok(())
    })
}

pub fn anomalies_reconstruct_worse() -> Result<(), String> {
    let run = heteroscedastic_run();
    let train_mean = ares::math::mean(run.index.recon_errors());
    let anomalies: Vec<usize> = (0..run.test_labels.len()).filter(|&i| run.test_labels[i]).collect();
    let errs = run.model.reconstruction_errors(&run.test_x.select_rows(&anomalies)).map_err(|e| e.to_string())?;
    let anomaly_mean = ares::math::mean(&errs);
    if train_mean <= anomaly_mean {
        Ok(())
    } else {
        Err(format!("train mean {train_mean} > anomaly mean {anomaly_mean}"))
    }
}

fn index_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize)> {
    (3..60usize, 1..5usize)
        .prop_flat_map(|(n, d)| {
            (
                proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, d), n),
                proptest::collection::vec(-6.0..6.0f64, d),
                1..n,
            )
        })
}

fn index_of(rows: &[Vec<f64>]) -> LatentIndex {
    LatentIndex::from_parts(matrix(rows), vec![0.0; rows.len()], None).unwrap()
}

pub fn knn_distances_sorted_and_exact() -> Result<(), String> {
    check(CASES, index_strategy(), |(rows, z, k)| {
        let n = index_of(&rows).query_knn(&z, k).unwrap();
        prop_assert_eq!(n.len(), k);
        prop_assert!(n.distances.windows(2).all(|w| w[0] <= w[1]));
        for (i, d) in n.indices.iter().zip(&n.distances) {
            prop_assert!((euclid(&rows[*i], &z) - d).abs() <= 1e-12 * (1.0 + d));
        }
        let mut seen = n.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), k);
        Ok(())
    })
}

pub fn knn_self_exclusion() -> Result<(), String> {
    check(CASES, index_strategy(), |(rows, _, k)| {
        let idx = index_of(&rows);
        for i in 0..rows.len() {
            let n = idx.training_neighbours(i, k.min(rows.len() - 1)).unwrap();
            prop_assert!(!n.indices.contains(&i));
        }
        Ok(())
    })
}

pub fn knn_deterministic() -> Result<(), String> {
    check(CASES, index_strategy(), |(rows, z, k)| {
        let idx = index_of(&rows);
        prop_assert_eq!(idx.query_knn(&z, k).unwrap(), idx.query_knn(&z, k).unwrap());
        Ok(())
    })
}

/// Training-point LOF on i.i.d. uniform samples (n = 1000, k = 10): at least
/// 95% of values inside (0.8, 1.3), checked on five samples in 2-d.
pub fn lof_uniform_band() -> Result<(), String> {
    for seed in 0..5u64 {
        let rows = uniform_rows(1000, 2, &mut rng(100 + seed));
        let idx = index_of(&rows);
        let lof = LofModel::fit(&idx, 10).map_err(|e| e.to_string())?;
        let scores = lof.training_scores(&idx).map_err(|e| e.to_string())?;
        let inside = scores.iter().filter(|&&s| s > 0.8 && s < 1.3).count() as f64 / scores.len() as f64;
        if inside < 0.95 {
            return Err(format!("seed {seed}: only {:.3} of LOF values in (0.8, 1.3)", inside));
        }
    }
    Ok(())
}

pub fn lof_scale_invariance() -> Result<(), String> {
    let s = (12..60usize, 1..4usize, 0.01..100.0f64).prop_flat_map(|(n, d, c)| {
        (
            proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, d), n),
            proptest::collection::vec(-6.0..6.0f64, d),
            Just(c),
            prop_oneof![Just(3usize), Just(10usize)],
        )
    });
    check(CASES, s, |(rows, z, c, k)| {
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let zs: Vec<f64> = z.iter().map(|v| v * c).collect();
        let a = LofModel::fit(&index_of(&rows), k).unwrap();
        let b = LofModel::fit(&index_of(&scaled), k).unwrap();
        let la = a.score(&index_of(&rows), &z).unwrap();
        let lb = b.score(&index_of(&scaled), &zs).unwrap();
        prop_assert!((la - lb).abs() <= 1e-9 * la.abs().max(1.0), "{la} vs {lb}");
        Ok(())
    })
}

pub fn knn_monotone_in_k() -> Result<(), String> {
    check(CASES, index_strategy(), |(rows, z, _)| {
        let idx = index_of(&rows);
        let mut prev = 0.0;
        for k in 1..=rows.len() {
            let d = knn_distance_score(&idx, &z, k).unwrap();
            prop_assert!(d >= prev);
            prev = d;
        }
        Ok(())
    })
}

pub fn gd_multimodal_minimum() -> Result<(), String> {
    let s = (2..5usize, 1..4usize).prop_flat_map(|(classes, d)| {
        (
            proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, d), classes * 6),
            proptest::collection::vec(-6.0..6.0f64, d),
            Just(classes),
        )
    });
    check(CASES, s, |(rows, z, classes)| {
        let ids: Vec<u32> = (0..rows.len()).map(|i| (i % classes) as u32).collect();
        let idx = LatentIndex::from_parts(matrix(&rows), vec![0.0; rows.len()], Some(ids)).unwrap();
        let comps = fit_gaussians(&idx, true).unwrap();
        prop_assert_eq!(comps.len(), classes);
        for metric in [GdMetric::Euclidean, GdMetric::Mahalanobis] {
            let m = ares::density::gaussian_distance_score(&comps, &z, metric).unwrap();
            for c in &comps {
                prop_assert!(m <= c.distance(&z, metric));
            }
        }
        Ok(())
    })
}

pub fn scoring_shift_property() -> Result<(), String> {
    let s = (proptest::collection::vec(0.0..10.0f64, 1..30), 0.0..10.0f64, 1e-3..5.0f64, -3.0..3.0f64);
    check(CASES, s, |(neigh, e, delta, c)| {
        let (r0, _) = local_reconstruction_from_errors(e, &neigh).unwrap();
        let (r1, _) = local_reconstruction_from_errors(e + delta, &neigh).unwrap();
        prop_assert!(r1 > r0);
        prop_assert!(((r1 - r0) - delta).abs() < 1e-9);
        // shifting the test error and every stored error together leaves r alone
        let shifted: Vec<f64> = neigh.iter().map(|v| v + c).collect();
        let (r2, _) = local_reconstruction_from_errors(e + c, &shifted).unwrap();
        prop_assert!((r2 - r0).abs() < 1e-9);
        Ok(())
    })
}

pub fn scoring_test_set_independence() -> Result<(), String> {
    let model = ares::autoencoder::AutoencoderModel::new(
        ares::autoencoder::ArchitectureSpec::new(ares::autoencoder::DataKind::Tabular, vec![5, 4, 2]).unwrap(),
        3,
    )
    .unwrap();
    let train = matrix(&uniform_rows(80, 5, &mut rng(9)));
    let index = LatentIndex::build(&model, &train, None).unwrap();
    let config = AresConfig::default();
    let scorer = AresScorer::fit(&model, &index, &config).unwrap();
    let s = (2..20usize).prop_flat_map(|n| (proptest::collection::vec(proptest::collection::vec(-2.0..2.0f64, 5), n), 0..n));
    check(CASES, s, |(rows, drop)| {
        let full = scorer.score_batch(&matrix(&rows)).unwrap();
        let kept: Vec<Vec<f64>> = rows.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, r)| r.clone()).collect();
        let part = scorer.score_batch(&matrix(&kept)).unwrap();
        let expected: Vec<_> = full.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, s)| *s).collect();
        prop_assert_eq!(part, expected);
        Ok(())
    })
}

pub fn scoring_heteroscedastic_auc() -> Result<(), String> {
    let run = heteroscedastic_run();
    let scorer = AresScorer::fit(&run.model, &run.index, &AresConfig::default()).map_err(|e| e.to_string())?;
    let scores = scorer.score_batch(&run.test_x).map_err(|e| e.to_string())?;
    let ares_auc = auc(&scores.iter().map(|s| s.total).collect::<Vec<_>>(), &run.test_labels).unwrap();
    let raw_auc = auc(&scores.iter().map(|s| s.raw_reconstruction).collect::<Vec<_>>(), &run.test_labels).unwrap();
    if ares_auc > raw_auc {
        Ok(())
    } else {
        Err(format!("AUC(ARES) {ares_auc:.4} <= AUC(raw) {raw_auc:.4}"))
    }
}

fn labelled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (4..80usize).prop_flat_map(|n| {
        (
            proptest::collection::vec(-5.0..5.0f64, n),
            proptest::collection::vec(any::<bool>(), n).prop_filter("both classes", |l| l.iter().any(|&x| x) && l.iter().any(|&x| !x)),
        )
    })
}

pub fn auc_monotone_transforms() -> Result<(), String> {
    check(CASES, (labelled_scores(), 0.1..10.0f64, -5.0..5.0f64), |((s, l), a, b)| {
        let base = auc(&s, &l).unwrap();
        let exp: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let affine: Vec<f64> = s.iter().map(|v| a * v + b).collect();
        prop_assert_eq!(auc(&exp, &l).unwrap(), base);
        prop_assert!((auc(&affine, &l).unwrap() - base).abs() < 1e-12);
        Ok(())
    })
}

pub fn auc_complement() -> Result<(), String> {
    check(CASES, labelled_scores(), |(s, l)| {
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(());
        }
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((auc(&s, &l).unwrap() + auc(&neg, &l).unwrap() - 1.0).abs() < 1e-12);
        Ok(())
    })
}

pub fn wilcoxon_monotone() -> Result<(), String> {
    let s = (5..30usize).prop_flat_map(|n| {
        (
            proptest::collection::vec(-1.0..1.0f64, n),
            proptest::collection::vec(-1.0..1.0f64, n),
            0.001..0.5f64,
        )
    });
    check(CASES, s, |(a, b, c)| {
        let p0 = wilcoxon_one_sided(&a, &b).unwrap();
        let better: Vec<f64> = a.iter().map(|v| v + c).collect();
        let p1 = wilcoxon_one_sided(&better, &b).unwrap();
        prop_assert!(p1 <= p0 + 1e-12, "p rose from {p0} to {p1}");
        Ok(())
    })
}

pub fn split_disjoint_ratio() -> Result<(), String> {
    let s = (20..400usize, 1..200usize, any::<u64>(), 0.0..5.0f64);
    check(CASES, s, |(n_normal, n_anom, seed, contamination)| {
        let normal: Vec<usize> = (0..n_normal).collect();
        let anomalies: Vec<usize> = (n_normal..n_normal + n_anom).collect();
        let params = SplitParams {
            contamination_percent: contamination,
            ..SplitParams::default()
        };
        let Ok(split) = make_split(&normal, &anomalies, &params, seed) else { return Ok(()) };
        let mut all: Vec<usize> = split.train_indices.clone();
        all.extend(&split.val_indices);
        all.extend(&split.test_normal_indices);
        all.extend(&split.test_anomaly_indices);
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), total);
        let train_normals = split.train_indices.len() - split.contaminant_indices.len();
        let pool = train_normals + split.val_indices.len();
        let expected_train = pool as f64 * 0.8;
        prop_assert!((train_normals as f64 - expected_train).abs() <= 1.0);
        prop_assert_eq!(split.test_normal_indices.len(), split.test_anomaly_indices.len());
        Ok(())
    })
}

pub fn standardize_no_leakage() -> Result<(), String> {
    check(CASES, (any::<u64>(), -100.0..100.0f64), |(seed, shift)| {
        let rows = uniform_rows(60, 3, &mut rng(seed));
        let ids: Vec<u32> = (0..60).map(|i| if i < 45 { 0 } else { 1 }).collect();
        let data = LabelledDataset::new(matrix(&rows), ids.clone(), ares::autoencoder::DataKind::Tabular).unwrap();
        let normal: Vec<usize> = (0..45).collect();
        let anomalies: Vec<usize> = (45..60).collect();
        let split = make_split(&normal, &anomalies, &SplitParams::default(), seed).unwrap();
        let a = standardize(&data, &split).unwrap();
        let mut moved = rows.clone();
        let test_rows: Vec<usize> = split.test_normal_indices.iter().chain(&split.test_anomaly_indices).copied().collect();
        for &i in &test_rows {
            for v in moved[i].iter_mut() {
                *v += shift;
            }
        }
        let data2 = LabelledDataset::new(matrix(&moved), ids, ares::autoencoder::DataKind::Tabular).unwrap();
        let b = standardize(&data2, &split).unwrap();
        prop_assert_eq!(&a.scaling, &b.scaling);
        let direct = Standardizer::fit(&DenseMatrix::from_rows(&rows).unwrap(), &split.train_indices).unwrap();
        prop_assert_eq!(a.scaling, ares::datasets::FeatureScaling::Zscore(direct));
        Ok(())
    })
}

fn config_strategy() -> impl Strategy<Value = ares::cli::RunConfig> {
    let density = prop_oneof![
        (1..200usize).prop_map(|k| ares::density::DensityMethod::Lof { k }),
        (1..200usize).prop_map(|k| ares::density::DensityMethod::Knn { k }),
        (any::<bool>(), any::<bool>()).prop_map(|(m, multimodal)| ares::density::DensityMethod::GaussianDistance {
            metric: if m { GdMetric::Mahalanobis } else { GdMetric::Euclidean },
            multimodal,
        }),
    ];
    (any::<u64>(), 1..500usize, 0.0..10.0f64, density, 20..400usize, 0.01..0.99f64, any::<bool>())
        .prop_map(|(seed, k, alpha, density, epochs, test_fraction, one_class)| {
            let mut c = ares::cli::RunConfig {
                seed,
                ..Default::default()
            };
            c.ares.k_reconstruction = k;
            c.ares.alpha = alpha;
            c.ares.density = density;
            c.train.max_epochs = epochs;
            c.experiment.test_fraction = test_fraction;
            if one_class {
                c.experiment.normality = ares::eval::Normality::OneClass;
            }
            c.compare = vec!["ares,ae".into()];
            c
        })
}

pub fn config_round_trip() -> Result<(), String> {
    check(CASES, config_strategy(), |c| {
        let back = ares::cli::RunConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        let resolved = c.resolve().unwrap();
        prop_assert_eq!(ares::cli::RunConfig::from_json(&resolved.to_json()).unwrap(), resolved);
        Ok(())
    })
}

pub fn config_unknown_keys() -> Result<(), String> {
    let sections = ["", "train", "ares", "experiment", "architecture", "dataset"];
    check(CASES, (config_strategy(), 0..sections.len(), "[a-z]{3,12}_x"), |(c, section, key)| {
        let mut value: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        let target = match sections[section] {
            "" => &mut value,
            s => &mut value[s],
        };
        target.as_object_mut().unwrap().insert(key.clone(), serde_json::json!(1));
        let err = ares::cli::RunConfig::from_json(&value.to_string()).unwrap_err();
        prop_assert_eq!(err.exit_code(), 2);
        prop_assert!(err.to_string().contains(&key), "{} does not name {}", err, key);
        Ok(())
    })
}
