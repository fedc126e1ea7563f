use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    #[default]
    Auto,
    Fixed(f64),
}

/// Quartiles and a Gaussian kernel density on an even grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinSummary {
    pub variable: String,
    pub group: String,
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    /// Density on `grid`, rescaled to unit trapezoid mass.
    pub density: Vec<f64>,
}

impl ViolinSummary {
    pub fn labeled(mut self, variable: impl Into<String>, group: impl Into<String>) -> Self {
        self.variable = variable.into();
        self.group = group.into();
        self
    }
}

/// Linear interpolation between order statistics at position `(n − 1)·p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `0.9 · min(sd, IQR/1.34) · n^(−1/5)` with the sample standard deviation.
/// When the IQR is zero the standard deviation is used alone; `None` for
/// constant data.
pub fn silverman_bandwidth(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match sd.min(iqr / 1.34) {
        s if s > 0.0 => s,
        _ => sd,
    };
    (spread > 0.0).then(|| 0.9 * spread * (n as f64).powf(-0.2))
}

pub fn trapezoid(grid: &[f64], density: &[f64]) -> f64 {
    grid.windows(2)
        .zip(density.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Kernel density on `grid_points` evenly spaced points over
/// `[min − 3h, max + 3h]`. Constant data under [`Bandwidth::Auto`] falls back
/// to `h = 1e-3 · max(1, |value|)`.
pub fn violin_summary(
    values: &[f64],
    grid_points: usize,
    bandwidth: Bandwidth,
) -> Result<ViolinSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("violin summary of no values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "violin values must be finite".into(),
        ));
    }
    if grid_points < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least 2 points".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let h = match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {h} must be positive"
            )))
        }
        Bandwidth::Auto => silverman_bandwidth(&sorted).unwrap_or(1e-3 * min.abs().max(1.0)),
    };
    let lo = min - 3.0 * h;
    let hi = max + 3.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + step * i as f64).collect();
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            norm * sorted
                .iter()
                .map(|&v| (-0.5 * ((x - v) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    // rescale to unit mass on the grid
    let mass = trapezoid(&grid, &density);
    for d in &mut density {
        *d /= mass;
    }
    Ok(ViolinSummary {
        variable: String::new(),
        group: String::new(),
        n: sorted.len(),
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        bandwidth: h,
        grid,
        density,
    })
}
