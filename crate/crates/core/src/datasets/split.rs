use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, AresError, Result};

/// Row indices of one normal/anomaly arrangement.
///
/// `contaminant_indices` are anomalies mixed into the training set; they are
/// also listed in `train_indices` and are treated as normal during training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub test_normal_indices: Vec<usize>,
    pub test_anomaly_indices: Vec<usize>,
    pub contaminant_indices: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    /// Fraction of the normal pool held out as test normals.
    pub test_fraction: f64,
    /// Fraction of the remaining normals used for validation.
    pub val_fraction: f64,
    /// Anomalies added to the training set, as a percentage of its size.
    pub contamination_percent: f64,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            val_fraction: 0.2,
            contamination_percent: 0.0,
        }
    }
}

const ANOMALY_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Splits a normal pool into test/train/validation and draws an equal number
/// of test anomalies.
///
/// Test normals are all kept unless anomalies are scarcer, in which case the
/// normals are cut down to match. Test anomalies and contaminants come from
/// one seeded shuffle of the anomaly pool, so the test set does not depend on
/// the contamination level.
pub fn make_split(
    normal_pool: &[usize],
    anomaly_pool: &[usize],
    params: &SplitParams,
    seed: u64,
) -> Result<SplitAssignment> {
    ensure!(
        params.test_fraction > 0.0 && params.test_fraction < 1.0,
        Config,
        "test_fraction must be in (0, 1)"
    );
    ensure!(
        params.val_fraction > 0.0 && params.val_fraction < 1.0,
        Config,
        "val_fraction must be in (0, 1)"
    );
    ensure!(
        params.contamination_percent >= 0.0 && params.contamination_percent <= 100.0,
        Config,
        "contamination must be a percentage"
    );

    let mut normals = normal_pool.to_vec();
    normals.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    normals.shuffle(&mut rng);

    let n_test = (params.test_fraction * normals.len() as f64).round() as usize;
    let rest = &normals[n_test..];
    let n_val = (params.val_fraction * rest.len() as f64).round() as usize;
    let n_train = rest.len() - n_val;
    if n_test == 0 || n_val == 0 || n_train < 2 {
        return Err(AresError::Data(format!(
            "normal pool of {} rows is too small to split",
            normals.len()
        )));
    }
    let train_normals = rest[..n_train].to_vec();
    let val_indices = rest[n_train..].to_vec();

    let mut anomalies = anomaly_pool.to_vec();
    anomalies.sort_unstable();
    let mut arng = ChaCha8Rng::seed_from_u64(seed ^ ANOMALY_STREAM);
    anomalies.shuffle(&mut arng);
    if anomalies.is_empty() {
        return Err(AresError::Data("anomaly pool is empty".into()));
    }

    let n_pairs = n_test.min(anomalies.len());
    let test_normal_indices = normals[..n_pairs].to_vec();
    let test_anomaly_indices = anomalies[..n_pairs].to_vec();

    let n_contam = (params.contamination_percent / 100.0 * n_train as f64).round() as usize;
    let available = anomalies.len() - n_pairs;
    if n_contam > available {
        return Err(AresError::InvalidArgument(format!(
            "{}% contamination needs {n_contam} anomalies but only {available} remain after the test draw",
            params.contamination_percent
        )));
    }
    let contaminant_indices = anomalies[n_pairs..n_pairs + n_contam].to_vec();
    let mut train_indices = train_normals;
    train_indices.extend_from_slice(&contaminant_indices);

    Ok(SplitAssignment {
        train_indices,
        val_indices,
        test_normal_indices,
        test_anomaly_indices,
        contaminant_indices,
        seed,
    })
}

impl SplitAssignment {
    /// Test rows (normals first) and their anomaly labels.
    pub fn test_rows(&self) -> (Vec<usize>, Vec<bool>) {
        let mut rows = self.test_normal_indices.clone();
        rows.extend_from_slice(&self.test_anomaly_indices);
        let mut labels = vec![false; self.test_normal_indices.len()];
        labels.extend(std::iter::repeat_n(true, self.test_anomaly_indices.len()));
        (rows, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn scarce_anomalies_cut_test_normals() {
        let normals: Vec<usize> = (0..100).collect();
        let anomalies: Vec<usize> = (100..105).collect();
        let s = make_split(&normals, &anomalies, &SplitParams::default(), 1).unwrap();
        assert_eq!(s.test_normal_indices.len(), 5);
        assert_eq!(s.test_anomaly_indices.len(), 5);
    }

    #[test]
    fn contamination_count_and_shortage() {
        let normals: Vec<usize> = (0..1000).collect();
        let anomalies: Vec<usize> = (1000..1400).collect();
        let p = SplitParams {
            contamination_percent: 10.0,
            ..SplitParams::default()
        };
        let s = make_split(&normals, &anomalies, &p, 9).unwrap();
        let n_train_normal = s.train_indices.len() - s.contaminant_indices.len();
        assert_eq!(n_train_normal, 640);
        assert_eq!(s.contaminant_indices.len(), 64);
        // test draw is unaffected by contamination
        let clean = make_split(&normals, &anomalies, &SplitParams::default(), 9).unwrap();
        assert_eq!(clean.test_anomaly_indices, s.test_anomaly_indices);
        assert_eq!(clean.test_normal_indices, s.test_normal_indices);
        let p = SplitParams {
            contamination_percent: 50.0,
            ..SplitParams::default()
        };
        assert!(make_split(&normals, &anomalies, &p, 9).is_err());
    }

    proptest! {
        #[test]
        fn disjoint_and_eighty_twenty(n_normal in 20usize..600, n_anom in 1usize..300, seed in any::<u64>()) {
            let normals: Vec<usize> = (0..n_normal).collect();
            let anomalies: Vec<usize> = (n_normal..n_normal + n_anom).collect();
            let s = make_split(&normals, &anomalies, &SplitParams::default(), seed).unwrap();
            let sets = [&s.train_indices, &s.val_indices, &s.test_normal_indices, &s.test_anomaly_indices];
            let mut seen = HashSet::new();
            for set in sets {
                for &i in set.iter() {
                    prop_assert!(seen.insert(i), "index {} appears twice", i);
                }
            }
            let fit = (s.train_indices.len() + s.val_indices.len()) as f64;
            let expect_train = 0.8 * fit;
            prop_assert!((s.train_indices.len() as f64 - expect_train).abs() <= 1.0);
            prop_assert_eq!(s.test_normal_indices.len(), s.test_anomaly_indices.len());
            prop_assert!(s.test_normal_indices.iter().all(|i| *i < n_normal));
            prop_assert!(s.test_anomaly_indices.iter().all(|i| *i >= n_normal));
        }
    }
}
