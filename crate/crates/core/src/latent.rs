//! Frozen store of training encodings and reconstruction errors with exact
//! k-nearest-neighbour search in the latent space.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;

use crate::autoencoder::AutoencoderModel;
use crate::binio::{write_file, Reader, Writer};
use crate::error::{ensure, AresError, Result};
use crate::math::{squared_distance, DenseMatrix};

pub const INDEX_MAGIC: &[u8; 8] = b"ARESIDX1";
pub const INDEX_FORMAT_VERSION: u32 = 1;

/// Neighbours ordered by distance, ties broken by ascending training index.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighbourSet {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighbourSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Distance to the farthest (k-th) neighbour.
    pub fn kth_distance(&self) -> f64 {
        *self.distances.last().expect("non-empty neighbour set")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatentIndex {
    encodings: DenseMatrix,
    recon_errors: Vec<f64>,
    class_ids: Option<Vec<u32>>,
}

impl LatentIndex {
    pub fn from_parts(encodings: DenseMatrix, recon_errors: Vec<f64>, class_ids: Option<Vec<u32>>) -> Result<Self> {
        ensure!(encodings.rows() > 0, InvalidArgument, "index needs at least one training point");
        ensure!(
            recon_errors.len() == encodings.rows(),
            Dimension,
            "{} errors for {} encodings",
            recon_errors.len(),
            encodings.rows()
        );
        ensure!(
            recon_errors.iter().all(|e| *e >= 0.0 && e.is_finite()),
            InvalidArgument,
            "reconstruction errors must be finite and non-negative"
        );
        if let Some(c) = &class_ids {
            ensure!(
                c.len() == encodings.rows(),
                Dimension,
                "{} class ids for {} encodings",
                c.len(),
                encodings.rows()
            );
        }
        Ok(Self {
            encodings,
            recon_errors,
            class_ids,
        })
    }

    /// Encodes every training row and stores its reconstruction error.
    pub fn build(model: &AutoencoderModel, train_data: &DenseMatrix, class_ids: Option<Vec<u32>>) -> Result<Self> {
        ensure!(train_data.rows() > 0, InvalidArgument, "empty training set");
        let (encodings, errors) = model.encode_with_errors(train_data)?;
        Self::from_parts(encodings, errors, class_ids)
    }

    pub fn len(&self) -> usize {
        self.encodings.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.encodings.cols()
    }

    pub fn encodings(&self) -> &DenseMatrix {
        &self.encodings
    }

    pub fn recon_errors(&self) -> &[f64] {
        &self.recon_errors
    }

    pub fn class_ids(&self) -> Option<&[u32]> {
        self.class_ids.as_deref()
    }

    pub fn encoding(&self, i: usize) -> &[f64] {
        self.encodings.row(i)
    }

    /// The `k` training encodings closest to `z` (Euclidean).
    pub fn query_knn(&self, z: &[f64], k: usize) -> Result<NeighbourSet> {
        self.knn_impl(z, k, None)
    }

    /// As [`query_knn`](Self::query_knn) but never returns training point `exclude`.
    pub fn query_knn_excluding(&self, z: &[f64], k: usize, exclude: usize) -> Result<NeighbourSet> {
        self.knn_impl(z, k, Some(exclude))
    }

    /// Neighbours of training point `i` among the other training points.
    pub fn training_neighbours(&self, i: usize, k: usize) -> Result<NeighbourSet> {
        ensure!(i < self.len(), InvalidArgument, "point {i} out of range");
        self.knn_impl(self.encoding(i), k, Some(i))
    }

    /// Distance from training point `i` to its k-th nearest other training point.
    pub fn k_distance(&self, i: usize, k: usize) -> Result<f64> {
        Ok(self.training_neighbours(i, k)?.kth_distance())
    }

    fn knn_impl(&self, z: &[f64], k: usize, exclude: Option<usize>) -> Result<NeighbourSet> {
        ensure!(
            z.len() == self.dim(),
            Dimension,
            "query has {} dimensions, index has {}",
            z.len(),
            self.dim()
        );
        let available = self.len() - usize::from(exclude.is_some());
        ensure!(
            k >= 1 && k <= available,
            InvalidArgument,
            "k = {k} but only {available} candidate neighbours"
        );
        let mut cand: Vec<(f64, usize)> = self
            .encodings
            .iter_rows()
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, row)| (squared_distance(row, z), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering { a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) };
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, cmp);
            cand.truncate(k);
        }
        cand.sort_unstable_by(cmp);
        Ok(NeighbourSet {
            indices: cand.iter().map(|c| c.1).collect(),
            distances: cand.iter().map(|c| c.0.sqrt()).collect(),
        })
    }

    /// One query per row of `queries`, fanned out across threads; output order
    /// follows the input.
    pub fn query_knn_batch(&self, queries: &DenseMatrix, k: usize) -> Result<Vec<NeighbourSet>> {
        (0..queries.rows())
            .into_par_iter()
            .map(|i| self.query_knn(queries.row(i), k))
            .collect()
    }

    /// Writes the `ARESIDX1` sidecar (encodings, errors, optional class ids).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = Writer::default();
        w.tensor(self.encodings.rows(), self.encodings.cols(), self.encodings.data());
        w.tensor(1, self.recon_errors.len(), &self.recon_errors);
        match &self.class_ids {
            Some(c) => {
                w.u8(1);
                for id in c {
                    w.u32(*id);
                }
            }
            None => w.u8(0),
        }
        write_file(path.as_ref(), &w.finish(INDEX_MAGIC, INDEX_FORMAT_VERSION))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut r = Reader::open(&bytes, INDEX_MAGIC, INDEX_FORMAT_VERSION)?;
        let (rows, cols, enc) = r.tensor()?;
        let errors = r.vector(rows)?;
        let class_ids = match r.u8()? {
            0 => None,
            1 => Some((0..rows).map(|_| r.u32()).collect::<Result<Vec<_>>>()?),
            t => return Err(AresError::Corrupt(format!("bad class-id flag {t}"))),
        };
        r.finish()?;
        let encodings = DenseMatrix::new(rows, cols, enc).map_err(|e| AresError::Corrupt(e.to_string()))?;
        Self::from_parts(encodings, errors, class_ids).map_err(|e| AresError::Corrupt(e.to_string()))
    }
}
