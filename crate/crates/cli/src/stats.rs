//! Summary statistics and distribution tests for experiment reports.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Expected counts below this are pooled into one cell before the
/// chi-square test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Significance level of the distribution test.
pub const ALPHA: f64 = 0.001;

/// Sample mean, variance, and the standard error of the mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub max: f64,
}

impl Moments {
    pub fn of<I: IntoIterator<Item = f64>>(xs: I) -> Self {
        // Welford
        let (mut n, mut mean, mut m2, mut max) = (0u64, 0.0, 0.0, f64::NEG_INFINITY);
        for x in xs {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
            max = max.max(x);
        }
        let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Moments { count: n, mean, variance, max: if n == 0 { 0.0 } else { max } }
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance / self.count as f64).sqrt()
    }
}

/// Total variation distance between empirical counts and a distribution.
pub fn tv_distance(counts: &[u64], p: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts.iter().zip(p).map(|(&c, &px)| (c as f64 / total as f64 - px).abs()).sum::<f64>() / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Pearson goodness of fit. Cells with zero probability must be empty (any
/// hit there gives p = 0); cells with small expected counts are pooled.
pub fn chi_square(counts: &[u64], p: &[f64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&c, &px) in counts.iter().zip(p) {
        if px <= 0.0 {
            if c > 0 {
                return ChiSquare { statistic: f64::INFINITY, df: 0, p_value: 0.0 };
            }
            continue;
        }
        let e = px * n;
        if e < MIN_EXPECTED {
            pooled.0 += c as f64;
            pooled.1 += e;
        } else {
            cells.push((c as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return ChiSquare { statistic: 0.0, df: 0, p_value: 1.0 };
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = cells.len() as u64 - 1;
    let p_value = ChiSquared::new(df as f64).map(|d| d.sf(statistic)).unwrap_or(0.0);
    ChiSquare { statistic, df, p_value }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// How a bound row is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Empirical mean ≤ bound + 3σ.
    MeanAtMost,
    /// Empirical value ≤ bound, no slack.
    AtMost,
    /// Empirical value ≥ bound, no slack.
    AtLeast,
    /// Empirical value equals the bound.
    Equal,
}

/// One bound comparison in a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub name: String,
    /// The formula the bound comes from.
    pub formula: String,
    pub bound: f64,
    pub empirical: f64,
    pub sigma: f64,
    pub check: Check,
    pub pass: bool,
}

impl BoundRow {
    /// `mean ≤ bound` with `3σ` of slack.
    pub fn mean_at_most(name: &str, formula: &str, bound: f64, m: &Moments) -> Self {
        let sigma = m.std_err();
        let pass = m.mean <= bound + 3.0 * sigma;
        BoundRow { name: name.into(), formula: formula.into(), bound, empirical: m.mean, sigma, check: Check::MeanAtMost, pass }
    }

    pub fn exact(name: &str, formula: &str, bound: f64, empirical: f64, check: Check) -> Self {
        let pass = match check {
            Check::AtMost | Check::MeanAtMost => empirical <= bound,
            Check::AtLeast => empirical >= bound,
            Check::Equal => empirical == bound,
        };
        BoundRow { name: name.into(), formula: formula.into(), bound, empirical, sigma: 0.0, check, pass }
    }

    pub fn line(&self) -> String {
        let op = match self.check {
            Check::MeanAtMost => format!("<= {:.4} (+3σ = {:.4})", self.bound, 3.0 * self.sigma),
            Check::AtMost => format!("<= {}", self.bound),
            Check::AtLeast => format!(">= {}", self.bound),
            Check::Equal => format!("== {}", self.bound),
        };
        format!("{} {:<28} {:.4} {}  [{}]", if self.pass { "PASS" } else { "FAIL" }, self.name, self.empirical, op, self.formula)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.max, 4.0);
        assert_eq!(Moments::of([]).std_err(), 0.0);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[5, 5], &[0.5, 0.5]), 0.0);
        assert_eq!(tv_distance(&[10, 0], &[0.5, 0.5]), 0.5);
    }

    #[test]
    fn chi_square_examples() {
        let fair = chi_square(&[5000, 5000], &[0.5, 0.5]);
        assert_eq!(fair.statistic, 0.0);
        assert_eq!(fair.df, 1);
        assert!((fair.p_value - 1.0).abs() < 1e-12);
        // 3.841 is the 95% quantile with one degree of freedom
        let c = chi_square(&[5098, 4902], &[0.5, 0.5]);
        assert!((c.statistic - 3.8416).abs() < 1e-3);
        assert!((c.p_value - 0.05).abs() < 1e-3);
        assert_eq!(chi_square(&[9, 1], &[1.0, 0.0]).p_value, 0.0);
    }

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = (2..7).map(|m| (m as f64, 3.0 * (m as f64).powi(2))).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_half_quarter_quarter() {
        assert_eq!(entropy(&[0.5, 0.25, 0.25]), 1.5);
    }
}
