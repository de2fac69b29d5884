use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Ordinary least squares of `ln(value)` on the predictor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    /// Half-width of the 95% normal interval on the slope; zero for an
    /// exact fit or two points.
    pub slope_ci: f64,
    pub points: usize,
}

pub const MIN_POINTS: usize = 4;

/// Fits `ln v = slope·x + intercept`. Pass `x = t` for decay in time and
/// `x = ln ε` for power laws.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<DecayFit> {
    fit_with_min(series, MIN_POINTS)
}

/// Same fit, for the acceptance grids that only have three points.
pub fn loglog_fit(series: &[(f64, f64)]) -> Result<DecayFit> {
    fit_with_min(series, 2)
}

fn fit_with_min(series: &[(f64, f64)], min: usize) -> Result<DecayFit> {
    if series.len() < min {
        return Err(HarnessError::Fit(format!("{} points, need at least {min}", series.len())));
    }
    if let Some(&(x, v)) = series.iter().find(|(x, v)| !(x.is_finite() && v.is_finite() && *v > 0.0)) {
        return Err(HarnessError::Fit(format!("bad point ({x}, {v})")));
    }
    let n = series.len() as f64;
    let mx = series.iter().map(|p| p.0).sum::<f64>() / n;
    let my = series.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = series.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(HarnessError::Fit("predictor has no spread".into()));
    }
    let sxy: f64 = series.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = series.iter().map(|p| (p.1.ln() - intercept - slope * p.0).powi(2)).sum();
    let slope_ci = if series.len() > 2 {
        1.96 * (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(DecayFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
        slope_ci,
        points: series.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<(f64, f64)> = (0..6).map(|t| (t as f64, (-2.0 * t as f64).exp())).collect();
        let f = decay_fit(&s).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let s: Vec<(f64, f64)> = (0..5).map(|t| (t as f64, 0.3)).collect();
        assert!(decay_fit(&s).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn degenerate_series() {
        assert!(decay_fit(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(decay_fit(&[(1.0, 1.0); 5]).is_err());
        assert!(decay_fit(&[(0.0, 1.0), (1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
    }
}
