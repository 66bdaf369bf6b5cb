use std::fs;

use refattn_core::{generate_many, preset_config, welch_t, RolloutMode, Sample, Split, TaskId};
use refattn_harness::scripted::{oracle_weights, uniform_weights};
use refattn_harness::{dump_paths, evaluate, write_dump, EvalOptions, HarnessError, Prediction};

fn raw() -> EvalOptions {
    EvalOptions { rollout: RolloutMode::Raw, alpha: 0.05 }
}

fn samples(task: TaskId, split: Split, n: usize) -> Vec<Sample> {
    generate_many(&preset_config(task, split), n, 100).unwrap()
}

fn wrong(s: &Sample) -> Prediction {
    let mut p = Prediction::perfect(s);
    p.predicted = p.predicted.chars().rev().chain("x".chars()).collect();
    p
}

#[test]
fn oracle_dumps_and_perfect_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Multiplication, Split::Ood, 30);
    for s in &data {
        write_dump(dir.path(), &s.key(), &oracle_weights(s), 0).unwrap();
    }
    let preds: Vec<Prediction> = data.iter().map(Prediction::perfect).collect();
    let report = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    let e = report.entry(TaskId::Multiplication, Split::Ood).unwrap();
    assert_eq!(e.exact_match_pct, 100.0);
    assert_eq!(e.token_accuracy_pct, 100.0);
    assert_eq!(e.mean_attention, Some(1.0));
    assert_eq!(e.pooled_attention, Some(1.0));
    assert_eq!((e.correct.n, e.error.n, e.error.mean), (30, 0, None));
    assert!(e.welch.is_none());
}

#[test]
fn uniform_dumps_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::ValueAssignment, Split::Id, 20);
    for s in &data {
        write_dump(dir.path(), &s.key(), &uniform_weights(s), 0).unwrap();
    }
    let preds: Vec<Prediction> = data.iter().map(Prediction::perfect).collect();
    let report = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    let expected: Vec<f64> = data
        .iter()
        .map(|s| {
            let rows: Vec<f64> = s
                .mask
                .iter()
                .enumerate()
                .map(|(i, refs)| refs.len() as f64 / s.target_position(i) as f64)
                .collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        })
        .collect();
    let mean = expected.iter().sum::<f64>() / expected.len() as f64;
    let got = report.entries[0].mean_attention.unwrap();
    assert!((got - mean).abs() < 1e-9, "{got} vs {mean}");
}

#[test]
fn groups_feed_welch_directly() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Reversal, Split::Ood, 40);
    let mut preds = Vec::new();
    for (k, s) in data.iter().enumerate() {
        // correct answers get oracle attention, wrong ones uniform
        let ok = k % 3 != 0;
        let w = if ok { oracle_weights(s) } else { uniform_weights(s) };
        write_dump(dir.path(), &s.key(), &w, 0).unwrap();
        preds.push(if ok { Prediction::perfect(s) } else { wrong(s) });
    }
    let report = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    let e = &report.entries[0];
    assert_eq!(e.n_correct + e.n_error, e.n_samples);
    assert_eq!(e.correct.n + e.error.n, e.n_scored);
    assert_eq!(e.correct.mean, Some(1.0));

    let again = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    assert_eq!(again, report);

    // recompute the error-group means independently
    let error_means: Vec<f64> = data
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 3 == 0)
        .map(|(_, s)| {
            let rows: Vec<f64> = (0..s.target.len()).map(|i| 1.0 / s.target_position(i) as f64).collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        })
        .collect();
    let correct_means = vec![1.0; e.correct.n];
    let w = welch_t(&correct_means, &error_means);
    // the correct group has no spread but the error group does
    let direct = w.unwrap();
    let got = e.welch.as_ref().unwrap();
    assert!((got.t - direct.t).abs() < 1e-9 * direct.t.abs());
    assert!((got.p - direct.p).abs() < 1e-12);
    assert_eq!(e.significant, Some(true));
}

#[test]
fn missing_dumps_only_touch_attention() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Successor, Split::Id, 10);
    let mut preds: Vec<Prediction> = data.iter().map(Prediction::perfect).collect();
    preds[1] = wrong(&data[1]);
    for s in &data {
        write_dump(dir.path(), &s.key(), &oracle_weights(s), 0).unwrap();
    }
    let full = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    for s in &data[..3] {
        let (h, b) = dump_paths(dir.path(), &s.key());
        fs::remove_file(h).unwrap();
        fs::remove_file(b).unwrap();
    }
    let partial = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    let (f, p) = (&full.entries[0], &partial.entries[0]);
    assert_eq!(p.exact_match_pct, f.exact_match_pct);
    assert_eq!(p.token_accuracy_pct, f.token_accuracy_pct);
    assert_eq!((p.n_scored, p.n_missing_dumps), (7, 3));
    assert_eq!(f.n_missing_dumps, 0);
    assert_eq!(p.exact_match_pct, 90.0);

    let none = evaluate(&data, &preds, None, &raw()).unwrap();
    assert_eq!(none.entries[0].mean_attention, None);
    assert_eq!(none.entries[0].exact_match_pct, 90.0);
}

#[test]
fn prefix_rows_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Fflm, Split::Id, 5);
    for s in &data {
        let w = oracle_weights(s);
        let n = s.seq_len();
        let prefix = 3;
        let mut padded = ndarray::Array4::<f32>::zeros((1, 1, n + prefix, n + prefix));
        for q in 0..prefix {
            padded[[0, 0, q, q]] = 1.0;
        }
        for q in 0..n {
            for k in 0..n {
                padded[[0, 0, q + prefix, k + prefix]] = w[[0, 0, q, k]];
            }
        }
        write_dump(dir.path(), &s.key(), &padded, prefix).unwrap();
    }
    let preds: Vec<Prediction> = data.iter().map(Prediction::perfect).collect();
    let report = evaluate(&data, &preds, Some(dir.path()), &raw()).unwrap();
    assert_eq!(report.entries[0].mean_attention, Some(1.0));
}

#[test]
fn mismatched_inputs_are_errors() {
    let data = samples(TaskId::Addition, Split::Id, 3);
    let mut stray = Prediction::perfect(&data[0]);
    stray.seed = 999_999;
    assert!(matches!(evaluate(&data, &[stray], None, &raw()), Err(HarnessError::Mismatch(_))));
    let twice = vec![Prediction::perfect(&data[0]), Prediction::perfect(&data[0])];
    assert!(matches!(evaluate(&data, &twice, None, &raw()), Err(HarnessError::Mismatch(_))));
    let dup = vec![data[0].clone(), data[0].clone()];
    assert!(matches!(evaluate(&dup, &[], None, &raw()), Err(HarnessError::Mismatch(_))));
}

#[test]
fn bad_dump_fails_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Reversal, Split::Id, 2);
    for s in &data {
        write_dump(dir.path(), &s.key(), &uniform_weights(s), 0).unwrap();
    }
    let (_, payload) = dump_paths(dir.path(), &data[1].key());
    let bytes = fs::read(&payload).unwrap();
    fs::write(&payload, &bytes[..bytes.len() - 4]).unwrap();
    let preds: Vec<Prediction> = data.iter().map(Prediction::perfect).collect();
    assert!(matches!(
        evaluate(&data, &preds, Some(dir.path()), &raw()),
        Err(HarnessError::Format { .. })
    ));
}

#[test]
fn wrong_length_dump_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = samples(TaskId::Reversal, Split::Id, 2);
    write_dump(dir.path(), &data[0].key(), &uniform_weights(&data[1]), 0).unwrap();
    let preds = vec![Prediction::perfect(&data[0])];
    if data[0].seq_len() != data[1].seq_len() {
        assert!(evaluate(&data, &preds, Some(dir.path()), &raw()).is_err());
    }
}
