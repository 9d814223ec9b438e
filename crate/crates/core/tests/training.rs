//! Epoch loop: determinism, early stopping, reports and failure paths.

use grec::data::{generate_synthetic, split_dataset, SessionBatch, Split, SynthSpec};
use grec::model::{ModelConfig, ModelKind, Network};
use grec::train::{evaluate_last_item, load_report, save_report, train, write_log_csv, TrainConfig, Trainer, LOG_HEADER};
use grec::Error;

fn small_split() -> Split {
    let spec = SynthSpec {
        vocab_size: 30,
        n_sessions: 300,
        len: 12,
        ..SynthSpec::default()
    };
    split_dataset(generate_synthetic(&spec).unwrap().rows, [0.8, 0.1, 0.1], 1).unwrap()
}

fn small_model(kind: ModelKind) -> ModelConfig {
    ModelConfig::new(kind, 30, 12).with_width(16).with_dilations(&[1, 2, 4, 8])
}

#[test]
fn same_seed_reproduces_log_and_metrics() {
    let split = small_split();
    for kind in [ModelKind::Grec, ModelKind::NextItNetPlus, ModelKind::TNextItNet, ModelKind::EncoderOnly] {
        let cfg = TrainConfig {
            batch_size: 32,
            max_epochs: 2,
            seed: 4,
            ..TrainConfig::default()
        };
        let a = train(small_model(kind), &cfg, &split.train, &split.valid).unwrap();
        let b = train(small_model(kind), &cfg, &split.train, &split.valid).unwrap();
        assert_eq!(a.log, b.log, "{kind}");
        assert_eq!(a.best.params(), b.best.params());
        let ra = evaluate_last_item(&a.best, &split.test).unwrap();
        let rb = evaluate_last_item(&b.best, &split.test).unwrap();
        assert_eq!(ra, rb);
    }
}

#[test]
fn frozen_learning_rate_stops_after_two_epochs() {
    let split = small_split();
    let cfg = TrainConfig {
        learning_rate: 0.0,
        batch_size: 64,
        max_epochs: 10,
        patience: 1,
        seed: 0,
    };
    let out = train(small_model(ModelKind::Grec), &cfg, &split.train, &split.valid).unwrap();
    assert_eq!(out.epochs_run, 2);
    assert_eq!(out.log.len(), 2);
    assert_eq!(out.best_epoch, 1);
    assert_eq!(out.log[0].val_mrr5, out.log[1].val_mrr5);
}

#[test]
fn log_counts_optimizer_steps() {
    let split = small_split();
    let cfg = TrainConfig {
        batch_size: 50,
        max_epochs: 2,
        patience: 5,
        ..TrainConfig::default()
    };
    let out = train(small_model(ModelKind::NextItNet), &cfg, &split.train, &split.valid).unwrap();
    let per_epoch = split.train.len().div_ceil(50);
    assert_eq!(out.log[0].step, per_epoch);
    assert_eq!(out.log[1].step, 2 * per_epoch);
}

#[test]
fn non_finite_loss_is_reported() {
    let rows = small_split().train;
    let mut net = Network::<f32>::new(small_model(ModelKind::NextItNet), 0).unwrap();
    net.params_mut().get_mut("softmax.bias").unwrap().data_mut()[3] = f32::NAN;
    let mut trainer = Trainer::new(net, 1e-3);
    let err = trainer.step(&SessionBatch::from_rows(&rows[..8]), &[]).unwrap_err();
    assert!(matches!(err, Error::NonFiniteLoss { .. }), "{err}");
}

#[test]
fn invalid_training_settings_are_rejected() {
    let split = small_split();
    let bad = [
        TrainConfig { patience: 0, ..TrainConfig::default() },
        TrainConfig { batch_size: 0, ..TrainConfig::default() },
        TrainConfig { max_epochs: 0, ..TrainConfig::default() },
        TrainConfig { learning_rate: f64::NAN, ..TrainConfig::default() },
    ];
    for cfg in bad {
        assert!(train(small_model(ModelKind::Grec), &cfg, &split.train, &split.valid).is_err());
    }
    let cfg = TrainConfig::default();
    assert!(train(small_model(ModelKind::Grec), &cfg, &split.train, &[]).is_err());
    assert!(train(small_model(ModelKind::Grec), &cfg, &[], &split.valid).is_err());
}

#[test]
fn report_and_log_files() {
    let dir = tempfile::tempdir().unwrap();
    let split = small_split();
    let cfg = TrainConfig {
        batch_size: 64,
        max_epochs: 1,
        ..TrainConfig::default()
    };
    let out = train(small_model(ModelKind::NextItNet), &cfg, &split.train, &split.valid).unwrap();
    let mut report = evaluate_last_item(&out.best, &split.test).unwrap();
    report.model = "nextitnet".into();
    assert!(report.is_monotone());
    let path = dir.path().join("report.txt");
    save_report(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    for key in ["mrr5", "mrr20", "hr5", "hr20", "ndcg5", "ndcg20"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key}="))), "{key}");
    }
    assert_eq!(load_report(&path).unwrap(), report);

    let log = dir.path().join("log.csv");
    write_log_csv(&log, &out.log).unwrap();
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().next().unwrap(), LOG_HEADER);
    assert_eq!(text.lines().count(), 2);
}
