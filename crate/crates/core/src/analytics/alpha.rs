//! Krippendorff's alpha for interval data, via the coincidence matrix.

use super::AnalyticsError;

/// Agreement over units of grades, `1 - D_o / D_e` with `delta(c, k) = (c - k)^2`.
///
/// Units holding fewer than two grades are not pairable and are ignored. When no
/// disagreement is expected (every grade is the same value) the result is 1.
pub fn krippendorff_alpha(units: &[Vec<u8>]) -> Result<f64, AnalyticsError> {
    let pairable: Vec<&Vec<u8>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.len() < 2 {
        return Err(AnalyticsError::InsufficientData);
    }

    let mut values: Vec<u8> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    values.sort_unstable();
    values.dedup();
    let index_of = |v: u8| values.binary_search(&v).expect("value collected above");
    let k = values.len();

    // o[c][k] = sum over units of (pairs c-k in the unit) / (m_u - 1)
    let mut coincidence = vec![vec![0.0f64; k]; k];
    for unit in &pairable {
        let mut counts = vec![0.0f64; k];
        for &v in unit.iter() {
            counts[index_of(v)] += 1.0;
        }
        let norm = (unit.len() - 1) as f64;
        for c in 0..k {
            if counts[c] == 0.0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1.0)
                } else {
                    counts[c] * counts[d]
                };
                coincidence[c][d] += pairs / norm;
            }
        }
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let delta = |c: usize, d: usize| {
        let diff = f64::from(values[c]) - f64::from(values[d]);
        diff * diff
    };

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            observed += coincidence[c][d] * delta(c, d);
            expected += marginals[c] * marginals[d] * delta(c, d);
        }
    }
    observed /= n;
    expected /= n * (n - 1.0);

    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - observed / expected)
}
