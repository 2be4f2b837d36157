use serde::{Deserialize, Serialize};

/// Dispersion summary of all penalty entries at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyStats {
    pub mean: f64,
    /// Interquartile range divided by the mean.
    pub normalized_iqr: f64,
    /// Population standard deviation divided by the mean.
    pub cv: f64,
    /// Set when there were no entries to summarize.
    pub empty: bool,
}

/// Summarizes penalty entries. Ratios are reported as 0 when the mean is 0.
pub fn penalty_stats(entries: impl IntoIterator<Item = f64>) -> PenaltyStats {
    let mut values: Vec<f64> = entries.into_iter().collect();
    if values.is_empty() {
        return PenaltyStats { empty: true, ..PenaltyStats::default() };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return PenaltyStats { mean, ..PenaltyStats::default() };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    values.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&values, 0.75) - quantile_sorted(&values, 0.25);
    PenaltyStats { mean, normalized_iqr: iqr / mean, cv: var.sqrt() / mean, empty: false }
}

/// Linear interpolation between closest ranks.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
