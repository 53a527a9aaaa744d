//! Least-squares power-law envelopes for decay profiles.

use crate::{Error, Result};

/// Result of fitting `value ≈ c·t^{−alpha}`: `c` is inflated by the worst
/// log-deviation so that `value ≤ c·t^{−alpha}` holds at every sample.
#[derive(Clone, Debug)]
pub struct DecayProfile {
    pub samples: Vec<(f64, f64)>,
    pub alpha: f64,
    pub c: f64,
    pub residual: f64,
}

impl DecayProfile {
    pub fn envelope_at(&self, t: f64) -> f64 {
        self.c * t.powf(-self.alpha)
    }
}

/// Fit a decay exponent to positive samples `(t, value)` spanning at least
/// two decades in `t`, with at least five samples.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<DecayProfile> {
    if samples.len() < 5 {
        return Err(Error::Parameter(format!(
            "power-law fit needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    let mut t_min = f64::INFINITY;
    let mut t_max = 0.0f64;
    for &(t, v) in samples {
        if !(t.is_finite() && t > 0.0 && v.is_finite() && v > 0.0) {
            return Err(Error::Parameter(format!(
                "power-law fit needs positive finite samples, got ({t}, {v})"
            )));
        }
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    if t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!(
            "power-law fit needs two decades of frequencies, got [{t_min}, {t_max}]"
        )));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in samples {
        let x = t.ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mut residual = 0.0f64;
    for &(t, v) in samples {
        residual = residual.max((v.ln() - (intercept + slope * t.ln())).abs());
    }
    Ok(DecayProfile {
        samples: samples.to_vec(),
        alpha: -slope,
        c: (intercept + residual).exp(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponent_and_envelopes_samples() {
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 10.0 * 10f64.powf(i as f64 / 13.0);
                let wiggle = 1.0 + 0.05 * (i as f64).sin();
                (t, 3.0 * t.powf(-0.5) * wiggle)
            })
            .collect();
        let fit = fit_power_law(&samples).unwrap();
        assert!((fit.alpha - 0.5).abs() < 0.01, "alpha {}", fit.alpha);
        for &(t, v) in &samples {
            assert!(v <= fit.envelope_at(t) * (1.0 + 1e-12));
        }
        assert!(fit.residual < 0.06);
    }

    #[test]
    fn rejects_degenerate_input() {
        let short: Vec<(f64, f64)> = (0..4).map(|i| (10f64.powi(i), 1.0)).collect();
        assert!(fit_power_law(&short).is_err());

        let narrow: Vec<(f64, f64)> = (0..10).map(|i| (10.0 + i as f64, 1.0)).collect();
        assert!(fit_power_law(&narrow).is_err());

        let negative = vec![(1.0, 1.0), (10.0, -1.0), (100.0, 1.0), (1e3, 1.0), (1e4, 1.0)];
        assert!(fit_power_law(&negative).is_err());
    }
}
