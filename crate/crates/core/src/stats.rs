//! Cross-position statistics: correlation, bootstrap intervals, column
//! summaries and a log-linear fit of move popularity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the resampling generator, recorded alongside bootstrap results.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3)";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("column lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined: a column is constant")]
    ConstantColumn,
    #[error("need at least {need} resamples, got {got}")]
    TooFewResamples { need: usize, got: usize },
    #[error("{degenerate} of {resamples} resamples were degenerate")]
    MostlyDegenerate { degenerate: usize, resamples: usize },
    #[error("non-positive count {0} cannot be fitted")]
    NonPositiveCount(f64),
}

/// Paired observations `(x_i, y_i)` labelled by position id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub ids: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PairedSample {
    pub fn new(ids: Vec<String>, x: Vec<f64>, y: Vec<f64>) -> Result<PairedSample, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch(x.len(), y.len()));
        }
        if ids.len() != x.len() {
            return Err(StatsError::LengthMismatch(ids.len(), x.len()));
        }
        Ok(PairedSample { ids, x, y })
    }

    /// Ids are 1, 2, ... in order.
    pub fn numbered(x: Vec<f64>, y: Vec<f64>) -> Result<PairedSample, StatsError> {
        let ids = (1..=x.len()).map(|i| i.to_string()).collect();
        PairedSample::new(ids, x, y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The sample without the listed ids.
    pub fn excluding<S: AsRef<str>>(&self, ids: &[S]) -> PairedSample {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !ids.iter().any(|id| id.as_ref() == self.ids[i]))
            .collect();
        PairedSample {
            ids: keep.iter().map(|&i| self.ids[i].clone()).collect(),
            x: keep.iter().map(|&i| self.x[i]).collect(),
            y: keep.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

/// Product-moment correlation of two equal-length columns.
pub fn pearson_slices(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(StatsError::TooFew { need: 2, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantColumn);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson(s: &PairedSample) -> Result<f64, StatsError> {
    pearson_slices(&s.x, &s.y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub resamples: usize,
    /// Resamples skipped because the statistic was undefined on them.
    pub degenerate: usize,
    pub seed: u64,
}

pub const MIN_RESAMPLES: usize = 1000;

/// Percentile bootstrap 95% interval for `statistic` over pairs drawn with
/// replacement. Resamples on which the statistic fails are skipped; more
/// than half failing is an error.
pub fn bootstrap_ci<F>(
    s: &PairedSample,
    statistic: F,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapResult, StatsError>
where
    F: Fn(&[f64], &[f64]) -> Result<f64, StatsError>,
{
    let n = s.len();
    if n < 3 {
        return Err(StatsError::TooFew { need: 3, got: n });
    }
    if resamples < MIN_RESAMPLES {
        return Err(StatsError::TooFewResamples {
            need: MIN_RESAMPLES,
            got: resamples,
        });
    }
    let estimate = statistic(&s.x, &s.y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(resamples);
    let (mut xs, mut ys) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..resamples {
        for k in 0..n {
            let i = rng.gen_range(0..n);
            xs[k] = s.x[i];
            ys[k] = s.y[i];
        }
        if let Ok(v) = statistic(&xs, &ys) {
            values.push(v);
        }
    }
    let degenerate = resamples - values.len();
    if degenerate * 2 > resamples {
        return Err(StatsError::MostlyDegenerate { degenerate, resamples });
    }
    values.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        estimate,
        lower: quantile_sorted(&values, 0.025),
        upper: quantile_sorted(&values, 0.975),
        resamples,
        degenerate,
        seed,
    })
}

/// Linear-interpolation quantile of sorted data (the `(n-1)p` rule).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `ln(count) = intercept + slope * rank`, fitted by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// Fits log counts against ranks 1, 2, ... in the given order.
pub fn exp_fit(counts: &[f64]) -> Result<FitResult, StatsError> {
    if counts.len() < 3 {
        return Err(StatsError::TooFew {
            need: 3,
            got: counts.len(),
        });
    }
    if let Some(&c) = counts.iter().find(|&&c| c.is_nan() || c < 1.0) {
        return Err(StatsError::NonPositiveCount(c));
    }
    let x: Vec<f64> = (1..=counts.len()).map(|i| i as f64).collect();
    let y: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let r = pearson_slices(&x, &y)?;
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok(FitResult {
        intercept: my - slope * mx,
        slope,
        r_squared: r * r,
    })
}

/// Mean and sample (n − 1) standard deviation of a column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn mean_std(values: &[f64]) -> Result<Summary, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFew { need: 2, got: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(Summary {
        mean,
        std: (ss / (n - 1) as f64).sqrt(),
        n,
    })
}
