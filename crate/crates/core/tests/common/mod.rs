//! Reference implementations written independently of the library, used as
//! oracles by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajmine::corpus::{PaperRecord, VenueKind};

/// Peaks as `(logical_year, height)` by brute force: find every maximal run
/// of equal values, keep runs higher than whatever lies on either side, drop
/// those under `fraction` of the tallest, then merge close neighbours.
/// Values within `tie` of each other are equal.
pub fn reference_peaks(values: &[f64], fraction: f64, separation: usize, tie: f64) -> Vec<(usize, f64)> {
    let n = values.len();
    let same = |a: f64, b: f64| (a - b).abs() <= tie;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        if i > 0 && same(values[i - 1], values[i]) && runs.last().is_some_and(|r| same(values[r.0], values[i])) {
            continue;
        }
        let end = (i..n).take_while(|&j| same(values[j], values[i])).last().unwrap();
        runs.push((i, end));
    }
    let mut candidates: Vec<(usize, f64)> = runs
        .into_iter()
        .filter(|&(s, e)| {
            let v = values[s];
            let left_ok = s == 0 || values[s - 1] < v - tie;
            let right_ok = e + 1 == n || values[e + 1] < v - tie;
            v > tie && left_ok && right_ok
        })
        .map(|(s, _)| (s + 1, values[s]))
        .collect();
    let top = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    candidates.retain(|c| c.1 >= fraction * top - tie);

    let mut out: Vec<(usize, f64)> = Vec::new();
    for c in candidates {
        let len = out.len();
        if len > 0 && c.0 - out[len - 1].0 <= separation {
            if c.1 > out[len - 1].1 + tie {
                out[len - 1] = c;
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// h-index by sorting descending and scanning.
pub fn reference_h_index(counts: &[usize]) -> usize {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.iter().enumerate().take_while(|(i, &c)| c > *i).count()
}

/// Truncated centered moving average from prefix sums.
pub fn reference_centered_ma(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let half = window / 2;
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Random series over a coarse grid so plateaus and ties are common,
/// scaled so the maximum is 1 (or all zeros).
pub fn random_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| f64::from(rng.random_range(0..6u8))).collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        raw
    } else {
        raw.iter().map(|v| v / max).collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn paper(id: &str, year: i32, authors: &[&str], refs: &[&str]) -> PaperRecord {
    PaperRecord {
        id: id.to_string(),
        year,
        venue_kind: VenueKind::Journal,
        author_ids: authors.iter().map(|a| a.to_string()).collect(),
        reference_ids: refs.iter().map(|r| r.to_string()).collect(),
    }
}

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in 0..n {
            if row != col {
                let f = a[row][col] / pivot_row[col];
                for (x, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Ridge in original units: `[1 X]'[1 X] + diag(0, lambda * var_j)`, where
/// the penalty on standardized coefficients becomes a per-column weight.
pub fn ridge_oracle(xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> Vec<f64> {
    let n = xs.len() as f64;
    let d = xs[0].len();
    let design: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| std::iter::once(1.0).chain(x.iter().copied()).collect())
        .collect();
    let mut a = vec![vec![0.0; d + 1]; d + 1];
    let mut b = vec![0.0; d + 1];
    for (row, y) in design.iter().zip(ys) {
        for i in 0..=d {
            b[i] += row[i] * y;
            for j in 0..=d {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for j in 0..d {
        let m = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - m).powi(2)).sum::<f64>() / n;
        a[j + 1][j + 1] += lambda * var;
    }
    solve_dense(a, b)
}
