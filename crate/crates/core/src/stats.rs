//! Small statistics toolkit: normal percentiles, dispersion, chi-square
//! tests and a least-squares fit.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum expected count per chi-square cell; sparser cells are pooled
/// with their neighbours.
pub const MIN_EXPECTED: f64 = 5.0;

/// Standard normal quantile by Acklam's rational approximation.
///
/// Two rational functions (central region and tails, split at p = 0.02425)
/// with relative error below 1.15e-9 over (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// `z^(1-alpha)`, the 100(1-alpha)th standard-normal percentile.
pub fn z_percentile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(normal_quantile(1.0 - alpha))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the `len - 1` denominator.
pub fn sample_std_dev(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewReplications(values.len()));
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let ln_choose = statrs::function::factorial::ln_binomial(n, k);
    let ln_p = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let ln_q = if n == k { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    (ln_choose + ln_p + ln_q).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn rejects(&self, significance: f64) -> bool {
        self.p_value < significance
    }

    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
        };
        Self { statistic, dof, p_value }
    }
}

/// Group adjacent cells so each group's `weight` reaches `min`; a short
/// remainder joins the last group.
fn pool_cells(weights: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        current.push(i);
        acc += w;
        if acc >= min {
            groups.push(std::mem::take(&mut current));
            acc = 0.0;
        }
    }
    if !current.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(current),
            None => groups.push(current),
        }
    }
    groups
}

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::Unsupported("observed and expected cells differ in number".into()));
    }
    let total: u64 = observed.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    let mut statistic = 0.0;
    let groups = pool_cells(&expected, MIN_EXPECTED);
    for g in &groups {
        let o: f64 = g.iter().map(|&i| observed[i] as f64).sum();
        let e: f64 = g.iter().map(|&i| expected[i]).sum();
        if e > 0.0 {
            statistic += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    Ok(ChiSquareResult::from_statistic(statistic, groups.len().saturating_sub(1)))
}

/// Pearson chi-square test of homogeneity between two histograms over the
/// same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Unsupported("histograms differ in number of cells".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let grand = na + nb;
    let pooled: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64).collect();
    // Smallest expected cell in a column is its total times the smaller row share.
    let share = na.min(nb) / grand;
    let weights: Vec<f64> = pooled.iter().map(|c| c * share).collect();
    let groups = pool_cells(&weights, MIN_EXPECTED);
    let mut statistic = 0.0;
    for g in &groups {
        let oa: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let ob: f64 = g.iter().map(|&i| b[i] as f64).sum();
        let col = oa + ob;
        if col == 0.0 {
            continue;
        }
        let ea = col * na / grand;
        let eb = col * nb / grand;
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    Ok(ChiSquareResult::from_statistic(statistic, groups.len().saturating_sub(1)))
}

/// Ordinary least squares `y = slope * x + intercept`; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}
