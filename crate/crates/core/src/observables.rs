//! Counters evaluated on field samples and batch-means error bars.

use serde::{Deserialize, Serialize};

use crate::lattice::{classify_zeros, level_census, typical_heights, Field, Parameters};

/// `|phi^{-1}([H + m, inf))|`.
pub fn upward_excess(field: &Field, params: &Parameters, m: i64) -> usize {
    let h = typical_heights(params).typical as i64;
    level_census(field).count_at_least(h + m)
}

/// `|phi^{-1}([0, H - m])|`.
pub fn downward_excess(field: &Field, params: &Parameters, m: i64) -> usize {
    let h = typical_heights(params).typical as i64;
    level_census(field).count_between(0, h - m)
}

/// `|phi^{-1}([1, H_w - m])|`, the downward count used at the wetting threshold.
pub fn critical_downward_excess(field: &Field, params: &Parameters, m: i64) -> usize {
    let hw = typical_heights(params).critical as i64;
    level_census(field).count_between(1, hw - m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCounts {
    pub isolated: usize,
    pub non_isolated: usize,
    pub total: usize,
}

pub fn zero_counts(field: &Field) -> ZeroCounts {
    let z = classify_zeros(field);
    ZeroCounts {
        isolated: z.isolated.len(),
        non_isolated: z.non_isolated.len(),
        total: z.zero_count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeHeights {
    /// Most frequent height, ties toward the larger height.
    pub mode: u32,
    pub fraction_at_mode: f64,
    pub fraction_at_mode_minus_1: f64,
}

impl ModeHeights {
    pub fn two_level_fraction(&self) -> f64 {
        self.fraction_at_mode + self.fraction_at_mode_minus_1
    }
}

pub fn mode_heights(field: &Field) -> ModeHeights {
    let census = level_census(field);
    let mode = census.mode();
    let total = census.total() as f64;
    ModeHeights {
        mode,
        fraction_at_mode: census.count(mode) as f64 / total,
        fraction_at_mode_minus_1: mode.checked_sub(1).map_or(0, |k| census.count(k)) as f64 / total,
    }
}

/// Fraction of sites at heights `level - 1` or `level`.
pub fn two_level_fraction(field: &Field, level: u32) -> f64 {
    let census = level_census(field);
    census.count_between(level as i64 - 1, level as i64) as f64 / census.total() as f64
}

/// Indicators of the large-deviation events for one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremEvents {
    /// `upward_excess > e^{-2 beta m} N^2`.
    pub upward: bool,
    /// `downward_excess > 2 e^{-2 beta m} N^2`.
    pub downward: bool,
    /// `|q2+| >= C N`.
    pub non_isolated_linear: bool,
    /// `|phi^{-1}(0)| <= C N^{4/3}` and `|phi^{-1}([1, H_w - m])| >= 2 e^{-2 beta m} N^2`.
    pub critical_joint: bool,
}

pub fn theorem_events(field: &Field, params: &Parameters, m: i64, c: f64) -> TheoremEvents {
    let n = params.n() as f64;
    let n2 = n * n;
    let decay = (-2.0 * params.beta() * m as f64).exp();
    let zeros = zero_counts(field);
    TheoremEvents {
        upward: upward_excess(field, params, m) as f64 > decay * n2,
        downward: downward_excess(field, params, m) as f64 > 2.0 * decay * n2,
        non_isolated_linear: zeros.non_isolated as f64 >= c * n,
        critical_joint: zeros.total as f64 <= c * n.powf(4.0 / 3.0)
            && critical_downward_excess(field, params, m) as f64 >= 2.0 * decay * n2,
    }
}

/// Mean with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub mean: f64,
    /// NaN when fewer than [`BatchSummary::MIN_BATCHES`] samples exist.
    pub std_error: f64,
    pub batches: usize,
    pub samples: usize,
}

impl BatchSummary {
    pub const MIN_BATCHES: usize = 20;

    /// Splits the series into `clamp(floor(sqrt n), 20, n)` consecutive batches
    /// of equal length (a trailing remainder joins no batch) and uses the
    /// spread of the batch averages.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / n as f64
        };
        if n < Self::MIN_BATCHES {
            return Self {
                mean,
                std_error: f64::NAN,
                batches: 0,
                samples: n,
            };
        }
        let batches = ((n as f64).sqrt().floor() as usize).clamp(Self::MIN_BATCHES, n);
        let len = n / batches;
        let means: Vec<f64> = values
            .chunks_exact(len)
            .take(batches)
            .map(|b| b.iter().sum::<f64>() / len as f64)
            .collect();
        let grand = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
        Self {
            mean,
            std_error: (var / batches as f64).sqrt(),
            batches,
            samples: n,
        }
    }

    /// Whether `[mean - k se, mean + k se]` lies entirely above the band of `other`.
    pub fn exceeds(&self, other: &BatchSummary, k: f64) -> bool {
        self.mean - k * self.std_error > other.mean + k * other.std_error
    }
}

/// A named per-sample series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, value: f64) {
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn summary(&self) -> BatchSummary {
        BatchSummary::from_values(&self.values)
    }
}
