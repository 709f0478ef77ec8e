use super::ExperimentError;
use crate::model::Summary;

/// Percentile `p ∈ [0, 1]` of sorted data by linear interpolation between
/// order statistics.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median, 2.5th and 97.5th percentiles, and mean.
pub fn summarize(values: &[f64]) -> Result<Summary, ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        median: percentile_sorted(&sorted, 0.5),
        lower: percentile_sorted(&sorted, 0.025),
        upper: percentile_sorted(&sorted, 0.975),
        mean: values.iter().sum::<f64>() / values.len() as f64,
    })
}

/// Like [`summarize`] but ignoring non-finite entries (e.g. the mean wait of
/// a replication that counted no passengers); all-NaN when nothing is left.
pub(crate) fn summarize_finite(values: impl IntoIterator<Item = f64>) -> Summary {
    let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
    summarize(&finite).unwrap_or(Summary {
        median: f64::NAN,
        lower: f64::NAN,
        upper: f64::NAN,
        mean: f64::NAN,
    })
}

/// Formats a number with four significant digits.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let fmt = |magnitude: i32| {
        let decimals = 3 - magnitude;
        if decimals >= 0 {
            format!("{:.*}", decimals as usize, x)
        } else {
            let scale = 10f64.powi(-decimals);
            format!("{:.0}", (x / scale).round() * scale)
        }
    };
    let magnitude = x.abs().log10().floor() as i32;
    let s = fmt(magnitude);
    // Rounding can carry into a new leading digit (9.9996 -> 10.000).
    match s.parse::<f64>() {
        Ok(y) if y != 0.0 && y.abs().log10().floor() as i32 > magnitude => fmt(magnitude + 1),
        _ => s,
    }
}
