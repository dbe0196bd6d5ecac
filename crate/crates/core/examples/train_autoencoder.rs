//! Trains a tabular autoencoder with early stopping, saves it and checks
//! that the reloaded model encodes identically.

use ares::datasets::Standardizer;
use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::gaussian_classes(1, 10, 2000), 3)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    let (train_rows, val_rows) = rows.split_at(1600);
    let scaler = Standardizer::fit(&data.features, train_rows)?;
    let x = scaler.transform(&data.features)?;
    let (train, val) = (x.select_rows(train_rows), x.select_rows(val_rows));

    let arch = build_architecture(10, DataKind::Tabular, Some(&fit_pca(&train, 10)?))?;
    let config = TrainConfig {
        max_epochs: 100,
        ..TrainConfig::default()
    };
    let model = AutoencoderModel::fit(arch, &train, &val, &config)?;
    let report = &model.training.as_ref().expect("trained").report;
    for e in report.history.iter().step_by(10) {
        println!("epoch {:>3}  train {:.5}  val {:.5}", e.epoch, e.train_loss, e.val_loss);
    }
    println!("best epoch {} (val {:.5}), {} epochs run", report.best_epoch, report.best_val_loss, report.history.len());

    let path = std::env::temp_dir().join("ares-example-model.bin");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    assert_eq!(loaded.encode(&val)?, model.encode(&val)?);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
