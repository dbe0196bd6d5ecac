//! Direct, slow reference implementations used to check the library.

use ares::math::DenseMatrix;
use ares::nn::{mse_loss, Mode, Network};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// Sample covariance (divisor n - 1) of row vectors.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in &mut c {
        for v in row.iter_mut() {
            *v /= n - 1.0;
        }
    }
    c
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The `k` nearest points by full sort on (distance, index), optionally
/// skipping one index.
pub fn sorted_neighbours(points: &[Vec<f64>], z: &[f64], k: usize, skip: Option<usize>) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, p)| (i, euclid(p, z)))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Local outlier factor written out term by term: k-distance, reachability
/// distance (floored at 1e-12), local reachability density, and the ratio.
pub fn brute_lof(points: &[Vec<f64>], z: &[f64], k: usize) -> f64 {
    let k_distance = |b: usize| sorted_neighbours(points, &points[b], k, Some(b))[k - 1].1;
    let reach = |d: f64, b: usize| f64::max(k_distance(b), d).max(1e-12);
    let lrd_of_training = |a: usize| {
        let n = sorted_neighbours(points, &points[a], k, Some(a));
        let s: f64 = n.iter().map(|&(b, d)| reach(d, b)).sum();
        1.0 / (s / k as f64)
    };
    let n = sorted_neighbours(points, z, k, None);
    let s: f64 = n.iter().map(|&(b, d)| reach(d, b)).sum();
    let lrd_z = 1.0 / (s / k as f64);
    let mean_lrd: f64 = n.iter().map(|&(b, _)| lrd_of_training(b)).sum::<f64>() / k as f64;
    mean_lrd / lrd_z
}

/// AUC by comparing every anomaly with every normal.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                credit += 1.0;
            } else if si == sj {
                credit += 0.5;
            }
        }
    }
    credit / pairs
}

/// One-sided signed-rank p-value by enumerating all 2^n sign patterns.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    let mag: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // average rank = (#smaller) + (#equal + 1) / 2, doubled to stay integral
    let doubled: Vec<i64> = mag
        .iter()
        .map(|m| {
            let less = mag.iter().filter(|o| *o < m).count() as i64;
            let equal = mag.iter().filter(|o| *o == m).count() as i64;
            2 * less + equal + 1
        })
        .collect();
    let observed: i64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| doubled[i]).sum();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let w: i64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| doubled[i]).sum();
        if w >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Worst relative error between backprop and central differences of the MSE
/// loss, over every parameter and every input entry.
#[allow(clippy::needless_range_loop)]
pub fn gradient_check(net: &Network, x: &DenseMatrix, target: &DenseMatrix, step: f64) -> f64 {
    let loss = |n: &Network, input: &DenseMatrix| {
        let (out, _) = n.forward(input, Mode::Train).unwrap();
        mse_loss(&out, target).unwrap().0
    };
    let (out, cache) = net.forward(x, Mode::Train).unwrap();
    let (_, grad_out) = mse_loss(&out, target).unwrap();
    let (grads, input_grad) = net.backward(&cache, &grad_out).unwrap();
    let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();

    // Central differences at step 1e-5 carry roundoff near 1e-11; gradients
    // below 1e-6 (exact zeros in front of batch norm) are compared against
    // that floor instead of their own magnitude.
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst = 0.0f64;
    let mut probe = net.clone();
    for (p, grad) in analytic.iter().enumerate() {
        for i in 0..grad.len() {
            let orig = probe.params()[p][i];
            probe.params_mut()[p][i] = orig + step;
            let up = loss(&probe, x);
            probe.params_mut()[p][i] = orig - step;
            let down = loss(&probe, x);
            probe.params_mut()[p][i] = orig;
            worst = worst.max(rel(grad[i], (up - down) / (2.0 * step)));
        }
    }
    let mut xp = x.clone();
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let orig = x.get(r, c);
            xp = set(xp, r, c, orig + step);
            let up = loss(net, &xp);
            xp = set(xp, r, c, orig - step);
            let down = loss(net, &xp);
            xp = set(xp, r, c, orig);
            worst = worst.max(rel(input_grad.get(r, c), (up - down) / (2.0 * step)));
        }
    }
    worst
}

fn set(m: DenseMatrix, r: usize, c: usize, v: f64) -> DenseMatrix {
    let (rows, cols) = m.shape();
    let mut data = m.into_data();
    data[r * cols + c] = v;
    DenseMatrix::new(rows, cols, data).unwrap()
}
