use super::*;
use crate::mask::Provenance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_mask(width: usize) -> FeatureMask {
    FeatureMask::new((1..=width).collect(), Provenance::Full).unwrap()
}

fn identity_scaling(width: usize) -> ScalingModel {
    ScalingModel::from_bounds(vec![(0.0, 1.0); width]).unwrap()
}

/// Two tight clusters around (0.1, 0.1) and (0.9, 0.9), 10 points each.
fn separable_clusters() -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..10 {
        rows.push(vec![
            0.1 + rng.gen::<f64>() * 0.1,
            0.1 + rng.gen::<f64>() * 0.1,
        ]);
        labels.push(-1);
        rows.push(vec![
            0.8 + rng.gen::<f64>() * 0.1,
            0.8 + rng.gen::<f64>() * 0.1,
        ]);
        labels.push(1);
    }
    (rows, labels)
}

fn xor_fixture() -> (Vec<Vec<f64>>, Vec<i8>) {
    (
        vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ],
        vec![-1, -1, 1, 1],
    )
}

fn xor_config() -> TrainConfig {
    TrainConfig {
        c: 10.0,
        gamma: 1.0,
        ..TrainConfig::for_feature_count(2)
    }
}

fn train_toy(rows: &[Vec<f64>], labels: &[i8], cfg: &TrainConfig) -> (SvmModel, TrainSummary) {
    let width = rows[0].len();
    train(rows, labels, cfg, toy_mask(width), identity_scaling(width)).unwrap()
}

fn training_accuracy(model: &SvmModel, rows: &[Vec<f64>], labels: &[i8]) -> f64 {
    let preds = model.predict_rows(rows).unwrap();
    let hits = preds
        .iter()
        .zip(labels)
        .filter(|(p, &y)| p.label == y)
        .count();
    hits as f64 / labels.len() as f64
}

#[test]
fn separable_clusters_reach_full_training_accuracy() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 3,
        ..TrainConfig::for_feature_count(2)
    };
    let (model, summary) = train_toy(&rows, &labels, &cfg);
    assert!(summary.converged, "summary: {summary:?}");
    assert_eq!(training_accuracy(&model, &rows, &labels), 1.0);
}

#[test]
fn xor_reaches_full_training_accuracy() {
    let (rows, labels) = xor_fixture();
    let (model, summary) = train_toy(&rows, &labels, &xor_config());
    assert!(summary.converged);
    assert_eq!(training_accuracy(&model, &rows, &labels), 1.0);
    // spot check one attack point
    let pred = model.predict_rows(&[vec![0.0, 1.0]]).unwrap()[0];
    assert_eq!(pred.label, 1);
}

#[test]
fn dual_feasibility_and_kkt_hold_after_training() {
    let (rows, labels) = xor_fixture();
    let cfg = xor_config();
    let (model, summary) = train_toy(&rows, &labels, &cfg);

    let alpha_y: f64 = summary
        .alphas
        .iter()
        .zip(&labels)
        .map(|(&a, &y)| a * f64::from(y))
        .sum();
    assert!(alpha_y.abs() < 1e-6, "sum alpha*y = {alpha_y}");

    for (i, &alpha) in summary.alphas.iter().enumerate() {
        assert!((0.0..=cfg.c).contains(&alpha), "alpha[{i}] = {alpha}");
        let margin = f64::from(labels[i]) * model.decision_value(&rows[i]).unwrap();
        if alpha == 0.0 {
            assert!(margin >= 1.0 - cfg.tolerance, "free point margin {margin}");
        } else if alpha < cfg.c {
            assert!(
                (margin - 1.0).abs() <= cfg.tolerance,
                "on-margin point {margin}"
            );
        } else {
            assert!(margin <= 1.0 + cfg.tolerance, "bound point margin {margin}");
        }
    }
}

#[test]
fn identical_rows_with_mixed_labels_degrade_to_majority_vote() {
    let rows = vec![vec![0.5, 0.5]; 5];
    let labels = vec![-1, -1, -1, 1, 1];
    let cfg = TrainConfig::for_feature_count(2);
    let (model, summary) = train_toy(&rows, &labels, &cfg);
    assert!(!summary.converged);
    assert!(summary.remaining_violations > 0);
    assert_eq!(model.support_vector_count(), 0);
    let pred = model.predict_rows(&[vec![0.5, 0.5]]).unwrap()[0];
    assert_eq!(pred.label, -1); // three of five are negative
}

#[test]
fn dual_objective_never_decreases_across_steps() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        c: 2.0,
        seed: 17,
        ..TrainConfig::for_feature_count(2)
    };
    let mut last = 0.0; // objective at alpha = 0
    let mut steps = 0u64;
    let (_, summary) = train_with_observer(
        &rows,
        &labels,
        &cfg,
        toy_mask(2),
        identity_scaling(2),
        |step| {
            let objective = dual_objective(&rows, &labels, step.alphas, cfg.gamma);
            assert!(
                objective >= last - 1e-9,
                "objective fell from {last} to {objective} at update {}",
                step.update
            );
            last = objective;
            steps += 1;
        },
    )
    .unwrap();
    assert!(steps > 0);
    assert_eq!(steps, summary.updates);
}

#[test]
fn negating_labels_negates_decision_values() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 29,
        ..TrainConfig::for_feature_count(2)
    };
    let (model_a, _) = train_toy(&rows, &labels, &cfg);
    let negated: Vec<i8> = labels.iter().map(|&y| -y).collect();
    let (model_b, _) = train_toy(&rows, &negated, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let probe = vec![rng.gen::<f64>(), rng.gen::<f64>()];
        let fa = model_a.decision_value(&probe).unwrap();
        let fb = model_b.decision_value(&probe).unwrap();
        assert!((fa + fb).abs() < 1e-6, "f(x)={fa}, negated f(x)={fb}");
    }
}

#[test]
fn training_is_deterministic_for_a_seed() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 41,
        ..TrainConfig::for_feature_count(2)
    };
    let (a, sa) = train_toy(&rows, &labels, &cfg);
    let (b, sb) = train_toy(&rows, &labels, &cfg);
    assert_eq!(a, b);
    assert_eq!(sa.updates, sb.updates);
}

#[test]
fn prediction_is_invariant_under_uniform_input_rescaling() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 7,
        ..TrainConfig::for_feature_count(2)
    };

    let fit = |raw: &[Vec<f64>]| {
        let scaling = fit_scaling(raw).unwrap();
        let scaled = scaling.scale_rows(raw).unwrap();
        train(&scaled, &labels, &cfg, toy_mask(2), scaling)
            .unwrap()
            .0
    };
    let rescale = |factor: f64| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().map(|v| v * factor).collect())
            .collect()
    };
    let model_a = fit(&rows);
    let preds_a = model_a.predict_rows(&rows).unwrap();

    // power-of-two factor: min-max normalization cancels it bit-exactly
    let doubled = rescale(1024.0);
    let preds_pow2 = fit(&doubled).predict_rows(&doubled).unwrap();
    for (pa, pb) in preds_a.iter().zip(&preds_pow2) {
        assert_eq!(pa.label, pb.label);
        assert!((pa.value - pb.value).abs() < 1e-12);
    }

    // arbitrary factor: the scaled inputs agree only to rounding, so the
    // solver may stop at a different tolerance-level optimum; the predicted
    // signs still match
    let odd = rescale(37.5);
    let preds_odd = fit(&odd).predict_rows(&odd).unwrap();
    for (pa, pb) in preds_a.iter().zip(&preds_odd) {
        assert_eq!(pa.label, pb.label);
    }
}

#[test]
fn per_class_weights_raise_the_box_for_that_class() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        c: 0.05, // tight box so weights visibly matter
        positive_weight: 8.0,
        seed: 19,
        ..TrainConfig::for_feature_count(2)
    };
    let (_, summary) = train_toy(&rows, &labels, &cfg);
    let mut max_pos: f64 = 0.0;
    for (&alpha, &y) in summary.alphas.iter().zip(&labels) {
        if y > 0 {
            assert!(alpha <= cfg.c * cfg.positive_weight + 1e-12);
            max_pos = max_pos.max(alpha);
        } else {
            assert!(alpha <= cfg.c + 1e-12);
        }
    }
    assert!(max_pos > cfg.c, "weighted class never used the larger box");
    let alpha_y: f64 = summary
        .alphas
        .iter()
        .zip(&labels)
        .map(|(&a, &y)| a * f64::from(y))
        .sum();
    assert!(alpha_y.abs() < 1e-6);
}

#[test]
fn single_class_and_bad_labels_are_rejected() {
    let rows = vec![vec![0.0], vec![1.0]];
    let cfg = TrainConfig::for_feature_count(1);
    assert!(matches!(
        train(&rows, &[1, 1], &cfg, toy_mask(1), identity_scaling(1)),
        Err(SvmError::SingleClass)
    ));
    assert!(matches!(
        train(&rows, &[1, 0], &cfg, toy_mask(1), identity_scaling(1)),
        Err(SvmError::BadLabel(0))
    ));
    assert!(matches!(
        train(&[], &[], &cfg, toy_mask(1), identity_scaling(1)),
        Err(SvmError::EmptyData)
    ));
}

#[test]
fn save_load_round_trip_preserves_predictions() {
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 13,
        ..TrainConfig::for_feature_count(2)
    };
    let (model, _) = train_toy(&rows, &labels, &cfg);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let probe = vec![rng.gen::<f64>(), rng.gen::<f64>()];
        let a = model.decision_value(&probe).unwrap();
        let b = loaded.decision_value(&probe).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn truncated_model_file_is_a_format_error() {
    let (rows, labels) = xor_fixture();
    let (model, _) = train_toy(&rows, &labels, &xor_config());
    let text = model_io::model_to_text(&model).unwrap();
    let truncated: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
    assert!(matches!(
        model_io::model_from_text(&truncated),
        Err(SvmError::FormatVersion(_))
    ));
    assert!(matches!(
        model_io::model_from_text("not a model"),
        Err(SvmError::FormatVersion(_))
    ));
}

#[test]
fn zero_support_vector_model_is_rejected_at_save() {
    let rows = vec![vec![0.5]; 4];
    let labels = vec![1, 1, -1, -1];
    let cfg = TrainConfig::for_feature_count(1);
    let (model, _) = train_toy(&rows, &labels, &cfg);
    assert_eq!(model.support_vector_count(), 0);
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        save_model(&model, &dir.path().join("m.txt")),
        Err(SvmError::NoSupportVectors)
    ));
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_batch_prediction_matches_sequential() {
    use crate::kdd::{AttackClass, NumericInstance};
    let (rows, labels) = separable_clusters();
    let cfg = TrainConfig {
        seed: 23,
        ..TrainConfig::for_feature_count(2)
    };
    // mask features 1,2 out of full instances
    let mask = FeatureMask::new(vec![1, 2], Provenance::Full).unwrap();
    let instances: Vec<NumericInstance> = rows
        .iter()
        .zip(&labels)
        .map(|(r, &y)| {
            let mut features = [0.0; 41];
            features[0] = r[0];
            features[1] = r[1];
            let class = if y > 0 {
                AttackClass::DoS
            } else {
                AttackClass::Normal
            };
            NumericInstance { features, class }
        })
        .collect();
    let (model, _) = train_instances(&instances, &mask, &cfg).unwrap();
    let serial = model.predict_batch(&instances);
    let parallel = model.par_predict_batch(&instances);
    assert_eq!(serial.len(), parallel.len());
    for (a, b) in serial.iter().zip(&parallel) {
        assert_eq!(a.label, b.label);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

mod sparse_round_trip {
    use super::super::sparse::{parse_sparse_values, sparse_line};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn export_then_parse_restores_rows(
            row in proptest::collection::vec(
                prop_oneof![3 => Just(0.0f64), 7 => 0.001f64..1.0], 1..30),
            positive in proptest::bool::ANY,
        ) {
            let label: i8 = if positive { 1 } else { -1 };
            let line = sparse_line(label, &row);
            let (head, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
            let parsed_label: i8 = head.parse().unwrap();
            let parsed = parse_sparse_values(rest, row.len()).unwrap();
            prop_assert_eq!(parsed_label, label);
            prop_assert_eq!(parsed, row);
        }
    }
}
