//! Exact nearest-neighbour queries against a latent index.

use ares::prelude::*;

fn main() -> ares::Result<()> {
    let points: Vec<Vec<f64>> = (0..8).flat_map(|i| (0..8).map(move |j| vec![i as f64, j as f64])).collect();
    let errors: Vec<f64> = (0..points.len()).map(|i| 0.01 * i as f64).collect();
    let index = LatentIndex::from_parts(DenseMatrix::from_rows(&points)?, errors, None)?;

    let n = index.query_knn(&[3.2, 4.9], 5)?;
    for (i, d) in n.indices.iter().zip(&n.distances) {
        println!("neighbour {:>2} at {:?}, distance {:.4}, stored error {:.2}", i, index.encoding(*i), d, index.recon_errors()[*i]);
    }
    // training-point queries leave the point itself out
    println!("k-distance of point 0 for k = 3: {}", index.k_distance(0, 3)?);
    Ok(())
}
