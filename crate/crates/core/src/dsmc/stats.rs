use crate::market::{MarketError, PriceSeries};
use crate::scalar::Scalar;

/// Descriptive statistics of a price path, computed over daily changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean_change: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub change_std: f64,
    /// Pearson correlation between consecutive changes; 0 when undefined.
    pub lag1_autocorrelation: f64,
    pub max_drawup: f64,
    /// Largest peak-to-later-trough fall, as a non-negative number.
    pub max_drawdown: f64,
    /// Longest streak of consecutive changes with the same non-zero sign.
    pub longest_monotone_run: usize,
}

pub fn summary_stats<T: Scalar>(series: &PriceSeries<T>) -> Result<SummaryStats, MarketError> {
    if series.len() < 3 {
        return Err(MarketError::InsufficientHistory {
            day: 3,
            have: series.len(),
        });
    }
    let p: Vec<f64> = series
        .prices()
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    let d: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);

    let (mut low, mut high) = (p[0], p[0]);
    let (mut drawup, mut drawdown) = (0.0f64, 0.0f64);
    for &x in &p {
        low = low.min(x);
        high = high.max(x);
        drawup = drawup.max(x - low);
        drawdown = drawdown.max(high - x);
    }

    let mut longest = 0usize;
    let mut run = 0usize;
    let mut prev_sign = 0.0f64;
    for &x in &d {
        let s = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        run = if s == 0.0 {
            0
        } else if s == prev_sign {
            run + 1
        } else {
            1
        };
        prev_sign = s;
        longest = longest.max(run);
    }

    Ok(SummaryStats {
        mean_change: mean,
        change_std: var.sqrt(),
        lag1_autocorrelation: pearson(&d[..d.len() - 1], &d[1..]),
        max_drawup: drawup,
        max_drawdown: drawdown,
        longest_monotone_run: longest,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
