//! Clustering agreement metrics. All three are invariant to relabelling of
//! either argument.

use crate::dataset::relabel_first_appearance;
use crate::error::{Error, Result};

fn check_lengths(pred: &[usize], truth: &[usize], min: usize) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "label length mismatch: {} predicted vs {} true",
            pred.len(),
            truth.len()
        )));
    }
    if pred.len() < min {
        return Err(Error::InvalidInput(format!(
            "need at least {min} labels, got {}",
            pred.len()
        )));
    }
    Ok(())
}

/// Contingency table `counts[p][t]` over compacted ids, with the number of
/// distinct predicted and true clusters.
pub fn contingency(pred: &[usize], truth: &[usize]) -> (Vec<Vec<usize>>, usize, usize) {
    let p = relabel_first_appearance(pred);
    let t = relabel_first_appearance(truth);
    let kp = p.iter().max().map_or(0, |m| m + 1);
    let kt = t.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; kt]; kp];
    for (&a, &b) in p.iter().zip(&t) {
        table[a][b] += 1;
    }
    (table, kp, kt)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalised by `sqrt(H(pred) H(truth))`.
///
/// Two single-cluster partitions score 1; a single-cluster partition against
/// anything else scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth, 1)?;
    let n = pred.len() as f64;
    let (table, kp, kt) = contingency(pred, truth);
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..kt).map(|b| table.iter().map(|r| r[b]).sum()).collect();
    let h_pred = entropy(row.iter().copied(), n);
    let h_truth = entropy(col.iter().copied(), n);
    if kp == 1 && kt == 1 {
        return Ok(1.0);
    }
    if kp == 1 || kt == 1 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for a in 0..kp {
        for b in 0..kt {
            let c = table[a][b];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (row[a] as f64 * col[b] as f64)).ln();
            }
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// method with potentials, `O(k³)`). Returns `assignment[row] = col`.
pub fn hungarian_max(weights: &[Vec<f64>]) -> Vec<usize> {
    let k = weights.len();
    if k == 0 {
        return Vec::new();
    }
    let top = weights
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    // minimise top - w, 1-based arrays with a sentinel column 0
    let cost = |i: usize, j: usize| top - weights[i - 1][j - 1];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut matched = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        matched[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; k];
    for j in 1..=k {
        assignment[matched[j] - 1] = j - 1;
    }
    assignment
}

/// Best fraction of agreeing samples over one-to-one id mappings.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth, 1)?;
    let (table, kp, kt) = contingency(pred, truth);
    let k = kp.max(kt);
    let weights: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    if a < kp && b < kt {
                        table[a][b] as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let assignment = hungarian_max(&weights);
    let hits: f64 = assignment
        .iter()
        .enumerate()
        .map(|(a, &b)| weights[a][b])
        .sum();
    Ok(hits / pred.len() as f64)
}

fn pairs(c: usize) -> u64 {
    let c = c as u64;
    c * c.saturating_sub(1) / 2
}

/// Pairwise F-measure over unordered sample pairs.
///
/// Two all-singleton partitions have no co-clustered pairs at all; they are
/// identical, so they score 1.
pub fn pairwise_fscore(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth, 2)?;
    let (table, _, kt) = contingency(pred, truth);
    let tp: u64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let pred_pairs: u64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let truth_pairs: u64 = (0..kt)
        .map(|b| pairs(table.iter().map(|r| r[b]).sum()))
        .sum();
    if pred_pairs == 0 && truth_pairs == 0 {
        return Ok(1.0);
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / pred_pairs as f64;
    let recall = tp as f64 / truth_pairs as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Whether two labelings describe the same set partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && relabel_first_appearance(a) == relabel_first_appearance(b)
}
