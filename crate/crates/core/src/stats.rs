//! Empirical distribution utilities shared by the experiments: CCDF
//! construction, stochastic-dominance comparison and rank correlation.

use crate::error::{Error, Result};

/// Empirical complementary CDF: Pr(sample > threshold) per threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub prob: Vec<f64>,
    pub n_samples: usize,
}

/// Builds the empirical CCDF of `samples` over `thresholds`.
///
/// Exceedance is strict: a sample equal to the threshold does not count.
pub fn ccdf(samples: &[f64], thresholds: &[f64]) -> Result<CcdfCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    validate_thresholds(thresholds)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    let prob = thresholds
        .iter()
        .map(|&t| {
            let not_above = sorted.partition_point(|&s| s <= t);
            (sorted.len() - not_above) as f64 / n
        })
        .collect();
    Ok(CcdfCurve {
        thresholds: thresholds.to_vec(),
        prob,
        n_samples: sorted.len(),
    })
}

fn validate_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("empty threshold list".into()));
    }
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite threshold".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "thresholds must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Default plotting sweep: 81 evenly spaced thresholds spanning one dB
/// beyond the sample range on each side.
pub fn default_thresholds(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    Ok((0..81).map(|i| lo + i as f64 * (hi - lo) / 80.0).collect())
}

/// Whether curve `a` exceeds curve `b` at every threshold, up to `slack`.
pub fn dominates(a: &CcdfCurve, b: &CcdfCurve, slack: f64) -> Result<bool> {
    if a.thresholds != b.thresholds {
        return Err(Error::MismatchedThresholds);
    }
    Ok(a.prob
        .iter()
        .zip(&b.prob)
        .all(|(&pa, &pb)| pa >= pb - slack))
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(
            "rank correlation needs equal-length inputs".into(),
        ));
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter(
            "rank correlation needs at least two points".into(),
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..x.len() {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::InvalidParameter(
            "rank correlation undefined for constant input".into(),
        ));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks, averaged over the tie group [i, j].
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}
