use crate::{Error, Result};

/// Wasserstein-1 distance between two empirical distributions, computed as
/// `∫₀¹ |F_a⁻¹(t) − F_b⁻¹(t)| dt` over the step quantile functions.
pub fn distribution_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "distribution distance needs two non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as u128, b.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        // quantile breakpoints (i+1)/na and (j+1)/nb, compared exactly
        let lhs = (i as u128 + 1) * nb;
        let rhs = (j as u128 + 1) * na;
        let next = if lhs <= rhs {
            (i + 1) as f64 / na as f64
        } else {
            (j + 1) as f64 / nb as f64
        };
        total += (next - t) * (a[i] - b[j]).abs();
        t = next;
        if lhs <= rhs {
            i += 1;
        }
        if rhs <= lhs {
            j += 1;
        }
    }
    Ok(total)
}
