//! Explained variance of a tabular dataset and the autoencoder widths it
//! leads to.

use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::multi_cluster_benchmark(), 1)?;
    let pca = fit_pca(&data.features, data.dim())?;
    let mut cumulative = 0.0;
    for (i, r) in pca.explained_variance_ratio().iter().enumerate() {
        cumulative += r;
        println!("component {:>2}: {:.4} (cumulative {:.4})", i + 1, r, cumulative);
    }
    let arch = build_architecture(data.dim(), DataKind::Tabular, Some(&pca))?;
    println!("encoder {:?}", arch.encoder_sizes);
    println!("decoder {:?}", arch.decoder_sizes);
    Ok(())
}
