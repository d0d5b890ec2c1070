//! Monte Carlo estimates, correlation curves and power-law decay fits.

use rand::Rng;
use serde::Serialize;

use crate::analytic::{
    classify_exponent, fnbn_correlation, fnbn_correlation_asymptotic, fnbp_correlation, fnbp_covariance_limit,
    fnbp_variance, fpn_correlation, fpn_covariance_asymptotic, fpn_variance, fpn_variance_asymptotic, fpp_correlation,
    fpp_variance, theoretical_exponent, DependenceLabel, FnbnParams, FnbpParams, FpnParams, FppParams, ProcessKind,
};
use crate::error::{Error, Result};
use crate::sim::{increment_path, run_replications, sample_process_path, PathSpec, ProcessModel, Seed};
use crate::specfun::{beta_fn, sum_compensated, QuadConfig};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Usable-point floor for analytic curves in [`fit_power_law`].
pub const ANALYTIC_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 5;

// Bootstrap resampling uses its own stream so it never overlaps a replication.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// Replication settings shared by the Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOptions {
    pub reps: u64,
    pub root: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Overrides the default stable-subordinator step.
    pub stable_step: Option<f64>,
}

impl McOptions {
    pub fn new(reps: u64, root: u64) -> Self {
        McOptions { reps, root, threads: 0, stable_step: None }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn stable_step(mut self, step: Option<f64>) -> Self {
        self.stable_step = step;
        self
    }

    fn spec(&self, model: ProcessModel, grid: Vec<f64>) -> Result<PathSpec> {
        let spec = PathSpec::new(model, grid)?;
        match self.stable_step {
            Some(step) => spec.with_stable_step(step),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replications: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Source {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrPoint {
    pub t: f64,
    pub corr: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub s: f64,
    pub delta: Option<f64>,
    pub points: Vec<CorrPoint>,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub d_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub label: DependenceLabel,
    /// Standard error of the fitted slope.
    pub d_std_error: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaRow {
    pub m: u64,
    pub delta_value: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaTable {
    pub n: u64,
    pub rows: Vec<DeltaRow>,
    pub source: Source,
}

/// Sample mean and the standard error of the mean.
pub fn mean_estimate(xs: &[f64]) -> Result<MonteCarloEstimate> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 replications, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mean = sum_compensated(xs.iter().copied()) / n;
    let var = sum_compensated(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
    Ok(MonteCarloEstimate { value: mean, std_error: (var / n).sqrt(), replications: xs.len() as u64 })
}

/// Unbiased sample variance with the large-sample standard error
/// `sqrt((m₄ − σ⁴)/n)`.
pub fn variance_estimate(xs: &[f64]) -> Result<MonteCarloEstimate> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 replications, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mean = sum_compensated(xs.iter().copied()) / n;
    let m2 = sum_compensated(xs.iter().map(|x| (x - mean).powi(2))) / n;
    let m4 = sum_compensated(xs.iter().map(|x| (x - mean).powi(4))) / n;
    let var = m2 * n / (n - 1.0);
    Ok(MonteCarloEstimate { value: var, std_error: ((m4 - m2 * m2).max(0.0) / n).sqrt(), replications: xs.len() as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub mean: MonteCarloEstimate,
    pub variance: MonteCarloEstimate,
}

/// Empirical mean and variance at each grid time.
pub fn mc_moments(spec: &PathSpec, reps: u64, root: u64, threads: usize) -> Result<Vec<MomentRow>> {
    spec.validate()?;
    let paths = run_replications(reps, root, threads, |seed| Ok(sample_process_path(spec, seed)?.values))?;
    spec.t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let col: Vec<f64> = paths.iter().map(|p| p[i]).collect();
            Ok(MomentRow { t, mean: mean_estimate(&col)?, variance: variance_estimate(&col)? })
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64], idx: Option<&[usize]>) -> Option<f64> {
    let n = idx.map_or(x.len(), |i| i.len()) as f64;
    let get = |v: &[f64], k: usize| match idx {
        Some(i) => v[i[k]],
        None => v[k],
    };
    let len = n as usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..len {
        sx += get(x, k);
        sy += get(y, k);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for k in 0..len {
        let dx = get(x, k) - mx;
        let dy = get(y, k) - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Empirical `Corr[X(s), X(t)]` (or of the width-`delta` increments) for each
/// `t` in `t_grid`, with bootstrap standard errors.
pub fn mc_correlation(
    model: ProcessModel,
    s: f64,
    t_grid: &[f64],
    delta: Option<f64>,
    opts: &McOptions,
) -> Result<CorrelationCurve> {
    let McOptions { reps, root, threads, .. } = *opts;
    if reps < 100 {
        return Err(Error::domain("mc_correlation", format!("need reps >= 100, got {reps}")));
    }
    if t_grid.is_empty() {
        return Err(Error::domain("mc_correlation", "t grid is empty"));
    }
    let width = delta.unwrap_or(0.0);
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let s_ok = match delta {
        Some(_) => s >= 0.0 && s + width <= t_min,
        None => s > 0.0 && s < t_min,
    };
    if !s_ok {
        return Err(Error::domain("mc_correlation", format!("s={s} (delta {width}) must lie below every t (min {t_min})")));
    }

    let mut sim_grid: Vec<f64> = std::iter::once(s).chain(t_grid.iter().copied()).collect();
    if delta.is_some() {
        sim_grid.extend(std::iter::once(s + width).chain(t_grid.iter().map(|t| t + width)));
    }
    sim_grid.retain(|&t| t > 0.0);
    sim_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sim_grid.dedup();
    let spec = opts.spec(model, sim_grid)?;

    let starts: Vec<f64> = std::iter::once(s).chain(t_grid.iter().copied()).collect();
    let rows = run_replications(reps, root, threads, |seed| {
        let path = sample_process_path(&spec, seed)?;
        match delta {
            Some(d) => Ok(increment_path(&path, d, &starts)?.values),
            None => starts.iter().map(|&t| path.value_at(t)).collect(),
        }
    })?;

    // column-major: cols[0] is X(s)
    let cols: Vec<Vec<f64>> = (0..starts.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let xs = &cols[0];
    if pearson(xs, xs, None).is_none() {
        return Err(Error::DegenerateVariance(format!("sample variance at s={s} is zero")));
    }
    let mut corrs = Vec::with_capacity(t_grid.len());
    for (j, &t) in t_grid.iter().enumerate() {
        let c = pearson(xs, &cols[j + 1], None)
            .ok_or_else(|| Error::DegenerateVariance(format!("sample variance at t={t} is zero")))?;
        corrs.push(c);
    }

    let mut rng = Seed::new(root, BOOTSTRAP_STREAM).rng();
    let n = rows.len();
    let mut boot = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); t_grid.len()];
    let mut idx = vec![0usize; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for i in idx.iter_mut() {
            *i = rng.random_range(0..n);
        }
        for (j, b) in boot.iter_mut().enumerate() {
            if let Some(c) = pearson(xs, &cols[j + 1], Some(&idx)) {
                b.push(c);
            }
        }
    }
    let points = t_grid
        .iter()
        .zip(corrs)
        .zip(boot)
        .map(|((&t, corr), b)| CorrPoint { t, corr, std_error: sample_sd(&b) })
        .collect();
    Ok(CorrelationCurve { s, delta, points, source: Source::Empirical })
}

fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Least squares of `ln|corr|` on `ln t` over points with `t ≥ t_min` whose
/// magnitude clears the floor (`1e-12` for analytic curves, two standard
/// errors for empirical ones).
pub fn fit_power_law(curve: &CorrelationCurve, t_min: f64) -> Result<ExponentFit> {
    let candidates: Vec<&CorrPoint> = curve.points.iter().filter(|p| p.t >= t_min && p.t > 0.0).collect();
    if candidates.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points with t >= {t_min}; need at least {MIN_FIT_POINTS}",
            candidates.len()
        )));
    }
    let usable: Vec<(f64, f64)> = candidates
        .iter()
        .filter(|p| {
            let floor = match (curve.source, p.std_error) {
                (Source::Empirical, Some(se)) => (2.0 * se).max(ANALYTIC_FLOOR),
                _ => ANALYTIC_FLOOR,
            };
            p.corr.is_finite() && p.corr.abs() > floor
        })
        .map(|p| (p.t.ln(), p.corr.abs().ln()))
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData("every point lies below the noise floor".into()));
    }
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "only {} points above the noise floor; need at least {MIN_FIT_POINTS}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all usable points share one t".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let d_std_error = if usable.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    let d_hat = -slope;
    Ok(ExponentFit {
        d_hat,
        c_hat: intercept.exp(),
        r_squared,
        label: classify_exponent(d_hat),
        d_std_error,
        points_used: usable.len(),
    })
}

/// Default lower cutoff of the fit range, `100·max(s, δ)`.
pub fn default_t_min(s: f64, delta: Option<f64>) -> f64 {
    100.0 * s.max(delta.unwrap_or(0.0))
}

/// A process together with the parameters its correlation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum CorrelationModel {
    Fpp(FppParams),
    Fpn(FpnParams),
    Fnbp(FnbpParams),
    Fnbn(FnbnParams),
}

impl CorrelationModel {
    pub fn kind(&self) -> ProcessKind {
        match self {
            CorrelationModel::Fpp(_) => ProcessKind::Fpp,
            CorrelationModel::Fpn(_) => ProcessKind::Fpn,
            CorrelationModel::Fnbp(_) => ProcessKind::Fnbp,
            CorrelationModel::Fnbn(_) => ProcessKind::Fnbn,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            CorrelationModel::Fpp(p) => p.beta,
            CorrelationModel::Fpn(n) => n.base.beta,
            CorrelationModel::Fnbp(p) => p.fpp.beta,
            CorrelationModel::Fnbn(n) => n.base.fpp.beta,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self {
            CorrelationModel::Fpn(n) => Some(n.delta),
            CorrelationModel::Fnbn(n) => Some(n.delta),
            _ => None,
        }
    }

    pub fn theoretical_exponent(&self) -> f64 {
        theoretical_exponent(self.kind(), self.beta())
    }

    /// The level process to simulate; noises are formed from its increments.
    pub fn sim_model(&self) -> ProcessModel {
        match self {
            CorrelationModel::Fpp(p) => ProcessModel::Fpp(*p),
            CorrelationModel::Fpn(n) => ProcessModel::Fpp(n.base),
            CorrelationModel::Fnbp(p) => ProcessModel::Fnbp(*p),
            CorrelationModel::Fnbn(n) => ProcessModel::Fnbp(n.base),
        }
    }

    /// Exact correlation between times `s` and `t`.
    pub fn correlation(&self, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
        match self {
            CorrelationModel::Fpp(p) => fpp_correlation(p, s, t),
            CorrelationModel::Fpn(n) => fpn_correlation(n, s, t, cfg),
            CorrelationModel::Fnbp(p) => fnbp_correlation(p, s, t, cfg),
            CorrelationModel::Fnbn(n) => fnbn_correlation(n, s, t, cfg),
        }
    }

    /// Correlation with the covariance and the variance at `t` replaced by
    /// their leading large-`t` terms; the variance at `s` stays exact.
    pub fn correlation_asymptotic(&self, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
        match self {
            CorrelationModel::Fpp(p) => {
                let b = p.beta;
                let q = p.q();
                let cov = q * s.powf(b) + q * q * b * s.powf(2.0 * b) * beta_fn(b, 1.0 + b)?;
                let var_t = if p.is_poisson() { p.lambda * t } else { p.r() * t.powf(2.0 * b) };
                Ok(cov / (fpp_variance(p, s)? * var_t).sqrt())
            }
            CorrelationModel::Fpn(n) => {
                let cov = fpn_covariance_asymptotic(n, s, t)?.value;
                Ok(cov / (fpn_variance(n, s)? * fpn_variance_asymptotic(n, t)?.value).sqrt())
            }
            CorrelationModel::Fnbp(p) => {
                let cov = fnbp_covariance_limit(p, s)?;
                let var_t = if p.fpp.is_poisson() { fnbp_variance(p, t)? } else { p.d1() * t.powf(2.0 * p.fpp.beta) };
                Ok(cov / (fnbp_variance(p, s)? * var_t).sqrt())
            }
            CorrelationModel::Fnbn(n) => fnbn_correlation_asymptotic(n, s, t, cfg),
        }
    }
}

fn build_curve(
    model: &CorrelationModel,
    s: f64,
    t_grid: &[f64],
    f: impl Fn(f64) -> Result<f64>,
) -> Result<CorrelationCurve> {
    if t_grid.is_empty() {
        return Err(Error::domain("correlation curve", "t grid is empty"));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("correlation curve", "t grid must be strictly increasing"));
    }
    let points = t_grid
        .iter()
        .map(|&t| Ok(CorrPoint { t, corr: f(t)?, std_error: None }))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationCurve { s, delta: model.delta(), points, source: Source::Analytic })
}

pub fn analytic_curve(model: &CorrelationModel, s: f64, t_grid: &[f64], cfg: &QuadConfig) -> Result<CorrelationCurve> {
    build_curve(model, s, t_grid, |t| model.correlation(s, t, cfg))
}

pub fn asymptotic_curve(model: &CorrelationModel, s: f64, t_grid: &[f64], cfg: &QuadConfig) -> Result<CorrelationCurve> {
    build_curve(model, s, t_grid, |t| model.correlation_asymptotic(s, t, cfg))
}

fn block_delta(block: &[f64], unit: &[Vec<f64>], idx: Option<&[usize]>) -> Option<f64> {
    let n = idx.map_or(block.len(), |i| i.len());
    let pick = |k: usize| idx.map_or(k, |i| i[k]);
    let var = |col: &dyn Fn(usize) -> f64| {
        let mut s = 0.0;
        let mut ss = 0.0;
        for k in 0..n {
            let v = col(pick(k));
            s += v;
            ss += v * v;
        }
        let nf = n as f64;
        ((ss - s * s / nf) / (nf - 1.0)).max(0.0)
    };
    let num = var(&|r| block[r]);
    let den: f64 = unit.iter().map(|u| var(&|r| u[r])).sum();
    (den > 0.0).then(|| num / den)
}

/// Empirical block-variance ratio from simulated FPP paths on an integer
/// grid. Numerator and denominator use the same paths; standard errors come
/// from a bootstrap over replications.
pub fn delta_empirical(
    params: &FppParams,
    n: u64,
    m_values: &[u64],
    opts: &McOptions,
) -> Result<DeltaTable> {
    let McOptions { reps, root, threads, .. } = *opts;
    if n < 1 {
        return Err(Error::domain("delta_empirical", "n must be >= 1"));
    }
    if reps < 1000 {
        return Err(Error::domain("delta_empirical", format!("need reps >= 1000, got {reps}")));
    }
    if m_values.is_empty() || m_values.contains(&0) {
        return Err(Error::domain("delta_empirical", "m values must be a nonempty list of positive integers"));
    }
    let mut rows = Vec::with_capacity(m_values.len());
    for (k, &m) in m_values.iter().enumerate() {
        let lo = (n - 1) * m;
        let grid: Vec<f64> = (lo.max(1)..=n * m).map(|j| j as f64).collect();
        let spec = opts.spec(ProcessModel::Fpp(*params), grid)?;
        // distinct root per m so tables for different m are independent
        let seed_root = root.wrapping_add(k as u64);
        let paths = run_replications(reps, seed_root, threads, |seed| {
            let path = sample_process_path(&spec, seed)?;
            let mut incs = Vec::with_capacity(m as usize);
            let mut prev = if lo == 0 { 0.0 } else { path.values[0] };
            let offset = if lo == 0 { 0 } else { 1 };
            for v in &path.values[offset..] {
                incs.push(v - prev);
                prev = *v;
            }
            Ok(incs)
        })?;
        let block: Vec<f64> = paths.iter().map(|p| p.iter().sum()).collect();
        let unit: Vec<Vec<f64>> = (0..m as usize).map(|j| paths.iter().map(|p| p[j]).collect()).collect();
        let value = block_delta(&block, &unit, None)
            .ok_or_else(|| Error::DegenerateVariance(format!("unit increments have zero variance at m={m}")))?;

        let mut rng = Seed::new(seed_root, BOOTSTRAP_STREAM).rng();
        let r = block.len();
        let mut idx = vec![0usize; r];
        let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for i in idx.iter_mut() {
                *i = rng.random_range(0..r);
            }
            if let Some(d) = block_delta(&block, &unit, Some(&idx)) {
                boot.push(d);
            }
        }
        rows.push(DeltaRow { m, delta_value: value, std_error: sample_sd(&boot) });
    }
    Ok(DeltaTable { n, rows, source: Source::Empirical })
}

/// Exact block-variance ratios for each `m`.
pub fn delta_analytic(params: &FppParams, n: u64, m_values: &[u64]) -> Result<DeltaTable> {
    let rows = m_values
        .iter()
        .map(|&m| Ok(DeltaRow { m, delta_value: crate::analytic::delta_statistic(params, n, m)?, std_error: None }))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaTable { n, rows, source: Source::Analytic })
}

/// `count` points from `start` to `stop` inclusive, evenly spaced in `ln t`.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && stop.is_finite()) || count < 2 {
        return Err(Error::domain("geometric_grid", format!("need 0 < start < stop and count >= 2, got {start}, {stop}, {count}")));
    }
    let (a, b) = (start.ln(), stop.ln());
    let last = count - 1;
    Ok((0..count)
        .map(|i| match i {
            0 => start,
            i if i == last => stop,
            i => (a + (b - a) * i as f64 / last as f64).exp(),
        })
        .collect())
}
