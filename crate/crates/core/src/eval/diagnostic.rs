use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::AutoencoderModel;
use crate::error::{ensure, Result};
use crate::latent::LatentIndex;
use crate::math::{mean, pearson, DenseMatrix};

/// Reconstruction error of each test row next to the mean stored error of its
/// `k` nearest training encodings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodDiagnostic {
    pub k: usize,
    pub test_errors: Vec<f64>,
    pub mean_neighbour_errors: Vec<f64>,
    /// Pearson correlation of the two columns; `None` when either is constant.
    pub correlation: Option<f64>,
}

pub fn neighbourhood_error_diagnostic(
    model: &AutoencoderModel,
    index: &LatentIndex,
    x_test: &DenseMatrix,
    k: usize,
) -> Result<NeighbourhoodDiagnostic> {
    ensure!(x_test.rows() > 0, InvalidArgument, "no test rows");
    let (z, test_errors) = model.encode_with_errors(x_test)?;
    let mean_neighbour_errors = (0..z.rows())
        .into_par_iter()
        .map(|i| {
            let n = index.query_knn(z.row(i), k)?;
            let errs: Vec<f64> = n.indices.iter().map(|&j| index.recon_errors()[j]).collect();
            Ok(mean(&errs))
        })
        .collect::<Result<Vec<f64>>>()?;
    let correlation = pearson(&test_errors, &mean_neighbour_errors);
    Ok(NeighbourhoodDiagnostic {
        k,
        test_errors,
        mean_neighbour_errors,
        correlation,
    })
}

impl NeighbourhoodDiagnostic {
    pub fn len(&self) -> usize {
        self.test_errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.test_errors.is_empty()
    }

    /// `row,test_error,mean_neighbour_error` plot data.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "test_error", "mean_neighbour_error"])
            .map_err(super::csv_error)?;
        for (i, (a, b)) in self.test_errors.iter().zip(&self.mean_neighbour_errors).enumerate() {
            w.write_record([i.to_string(), format!("{a:?}"), format!("{b:?}")])
                .map_err(super::csv_error)?;
        }
        super::finish_csv(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{ArchitectureSpec, DataKind};
    use crate::nn::{DenseLayer, Layer, Network};

    fn identity_model(d: usize) -> AutoencoderModel {
        let dense = || {
            let l = DenseLayer::new(DenseMatrix::identity(d), vec![0.0; d]).unwrap();
            Network::new(vec![Layer::Dense(l)]).unwrap()
        };
        let arch = ArchitectureSpec::new(DataKind::Tabular, vec![d, d]).unwrap();
        AutoencoderModel::from_parts(arch, dense(), dense()).unwrap()
    }

    #[test]
    fn identity_model_gives_zero_pairs() {
        let model = identity_model(2);
        let train = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]).unwrap();
        let index = LatentIndex::build(&model, &train, None).unwrap();
        let test = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![3.0, 1.0]]).unwrap();
        let diag = neighbourhood_error_diagnostic(&model, &index, &test, 2).unwrap();
        assert_eq!(diag.len(), 2);
        assert!(diag.test_errors.iter().all(|&e| e == 0.0));
        assert!(diag.mean_neighbour_errors.iter().all(|&e| e == 0.0));
        assert_eq!(diag.correlation, None);
        assert_eq!(diag.to_csv().unwrap().lines().count(), 3);
    }
}
