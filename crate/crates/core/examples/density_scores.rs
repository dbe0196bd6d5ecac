//! Compares the latent density scores on a point inside a cluster and one
//! far away.

use ares::density::{fit_gaussians, knn_distance_score, lof_score};
use ares::prelude::*;

fn main() -> ares::Result<()> {
    let data = make_synthetic(&SyntheticSpec::gaussian_classes(2, 3, 300), 2)?;
    let index = LatentIndex::from_parts(data.features.clone(), vec![0.0; data.len()], Some(data.class_ids.clone()))?;
    let inside = data.features.row(0).to_vec();
    let outside: Vec<f64> = inside.iter().map(|v| v + 6.0).collect();

    let gaussians = fit_gaussians(&index, true)?;
    for (name, z) in [("inside", &inside), ("outside", &outside)] {
        println!(
            "{name:>8}: lof {:.3}  knn {:.3}  gd-euclidean {:.3}  gd-mahalanobis {:.3}",
            lof_score(&index, z, 10)?,
            knn_distance_score(&index, z, 20)?,
            ares::density::gaussian_distance_score(&gaussians, z, GdMetric::Euclidean)?,
            ares::density::gaussian_distance_score(&gaussians, z, GdMetric::Mahalanobis)?,
        );
    }
    Ok(())
}
