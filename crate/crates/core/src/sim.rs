//! Seeded path simulation through the subordination identities
//! `N(t) = P(E(t))` and `Q(t) = N(Y(t))`, where `P` is a Poisson process,
//! `E` an inverse β-stable subordinator and `Y` a gamma subordinator.
//!
//! Every replication draws from its own ChaCha8 stream selected by
//! [`Seed`], so results never depend on how replications are scheduled.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{FnbpParams, FppParams, GammaParams};
use crate::error::{Error, Result};

/// Expected number of stable increments needed to reach the largest time.
pub const DEFAULT_STEPS_PER_HORIZON: f64 = 1e4;
/// Upper limit on stable increments per path.
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Seed {
    pub root: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(root: u64, stream: u64) -> Self {
        Seed { root, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SamplePath {
    /// Value at a grid time, matched to within a relative `1e-12`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.index_of(t).map(|i| self.values[i])
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        let i = self.times.partition_point(|&x| x < t - tol);
        match self.times.get(i) {
            Some(&x) if (x - t).abs() <= tol => Ok(i),
            _ => Err(Error::GridMismatch(format!("time {t} is not on the path grid"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ProcessModel {
    Poisson { lambda: f64 },
    Gamma(GammaParams),
    InverseStable { beta: f64 },
    Fpp(FppParams),
    Nb { lambda: f64, gamma: GammaParams },
    Fnbp(FnbpParams),
}

impl ProcessModel {
    fn beta(&self) -> Option<f64> {
        match self {
            ProcessModel::InverseStable { beta } => Some(*beta),
            ProcessModel::Fpp(p) => Some(p.beta),
            ProcessModel::Fnbp(p) => Some(p.fpp.beta),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("ProcessModel", format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            ProcessModel::Poisson { lambda } => positive("lambda", *lambda),
            ProcessModel::Gamma(g) => GammaParams::new(g.alpha, g.p).map(|_| ()),
            ProcessModel::InverseStable { beta } => FppParams::new(*beta, 1.0).map(|_| ()),
            ProcessModel::Fpp(p) => FppParams::new(p.beta, p.lambda).map(|_| ()),
            ProcessModel::Nb { lambda, gamma } => {
                positive("lambda", *lambda)?;
                GammaParams::new(gamma.alpha, gamma.p).map(|_| ())
            }
            ProcessModel::Fnbp(p) => FnbpParams::new(p.fpp.beta, p.fpp.lambda, p.gamma.alpha, p.gamma.p).map(|_| ()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSpec {
    pub model: ProcessModel,
    pub t_grid: Vec<f64>,
    /// Step `Δr` of the discretized stable subordinator; `None` picks one so
    /// that about [`DEFAULT_STEPS_PER_HORIZON`] steps reach the last time.
    pub stable_step: Option<f64>,
    pub max_steps: u64,
}

impl PathSpec {
    pub fn new(model: ProcessModel, t_grid: Vec<f64>) -> Result<Self> {
        let spec = PathSpec { model, t_grid, stable_step: None, max_steps: DEFAULT_MAX_STEPS };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_stable_step(mut self, step: f64) -> Result<Self> {
        self.stable_step = Some(step);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        validate_grid(&self.t_grid)?;
        if let Some(step) = self.stable_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::domain("PathSpec", format!("stable_step must be positive, got {step}")));
            }
        }
        Ok(())
    }

    /// The stable step actually used for this spec.
    pub fn effective_stable_step(&self) -> Option<f64> {
        let beta = self.model.beta()?;
        let t_max = *self.t_grid.last()?;
        let horizon = match self.model {
            ProcessModel::Fnbp(p) => p.gamma.p * t_max / p.gamma.alpha,
            _ => t_max,
        };
        // an all-zero grid never steps; any positive step will do
        let horizon = if horizon > 0.0 { horizon } else { 1.0 };
        Some(self.stable_step.unwrap_or_else(|| default_stable_step(beta, horizon)))
    }
}

/// Step giving about 10⁴ stable increments before first passage of `horizon`.
pub fn default_stable_step(beta: f64, horizon: f64) -> f64 {
    horizon.powf(beta) / (libm::tgamma(1.0 + beta) * DEFAULT_STEPS_PER_HORIZON)
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("t_grid", "grid is empty"));
    }
    if !t_grid.iter().all(|t| *t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("t_grid", "grid times must be nonnegative and finite"));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("t_grid", "grid must be strictly increasing"));
    }
    Ok(())
}

fn check_stable_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("stable sampler", format!("beta must lie in (0, 1], got {beta}")))
    }
}

/// One draw with `E[exp(−uS)] = exp(−u^β)` (Kanter's representation), computed
/// in logs. Assumes `0 < β < 1`.
fn stable_draw<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(Open01);
    let w: f64 = rng.sample(Exp1);
    let ln_s = (beta * PI * v).sin().ln() - (PI * v).sin().ln() / beta
        + (1.0 - beta) / beta * (((1.0 - beta) * PI * v).sin().ln() - w.ln());
    ln_s.exp()
}

/// Positive β-stable variable with Laplace transform `exp(−u^β)`; the point
/// mass at 1 when `β = 1`.
pub fn sample_positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> Result<f64> {
    check_stable_beta(beta)?;
    if beta == 1.0 {
        return Ok(1.0);
    }
    Ok(stable_draw(beta, rng))
}

/// `E(t)` at a single time, using `E(t) = (t/S)^β` in law.
pub fn sample_inverse_stable_marginal<R: Rng + ?Sized>(beta: f64, t: f64, rng: &mut R) -> Result<f64> {
    check_stable_beta(beta)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("sample_inverse_stable_marginal", format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if beta == 1.0 {
        return Ok(t);
    }
    Ok((t / stable_draw(beta, rng)).powf(beta))
}

/// First passage of the discretized stable subordinator over each level.
/// `levels` must be nondecreasing.
fn first_passage<R: Rng + ?Sized>(
    beta: f64,
    levels: &[f64],
    step: f64,
    max_steps: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if beta == 1.0 {
        return Ok(levels.iter().map(|&l| l.max(0.0)).collect());
    }
    let scale = step.powf(1.0 / beta);
    let mut d = 0.0;
    let mut k: u64 = 0;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        // E(0) = 0: the subordinator leaves 0 immediately
        if level <= 0.0 {
            out.push(0.0);
            continue;
        }
        while d <= level {
            if k >= max_steps {
                return Err(Error::Resource(format!(
                    "inverse stable path needs more than {max_steps} steps of size {step:e} to pass level {level}"
                )));
            }
            d += scale * stable_draw(beta, rng);
            k += 1;
        }
        out.push(k as f64 * step);
    }
    Ok(out)
}

/// Inverse stable subordinator on `t_grid`, from one stable path sampled on
/// `r_k = k·stable_step`: `E(t) = r_k` for the first `k` with `D(r_k) > t`.
pub fn sample_inverse_stable_path<R: Rng + ?Sized>(
    beta: f64,
    t_grid: &[f64],
    stable_step: f64,
    max_steps: u64,
    rng: &mut R,
) -> Result<SamplePath> {
    check_stable_beta(beta)?;
    validate_grid(t_grid)?;
    if !(stable_step > 0.0 && stable_step.is_finite()) {
        return Err(Error::domain("sample_inverse_stable_path", format!("stable_step must be positive, got {stable_step}")));
    }
    let values = first_passage(beta, t_grid, stable_step, max_steps, rng)?;
    Ok(SamplePath { times: t_grid.to_vec(), values })
}

fn gamma_increments<R: Rng + ?Sized>(g: &GammaParams, t_grid: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut prev_t = 0.0;
    let mut y = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let shape = g.p * (t - prev_t);
        if shape == 0.0 {
            out.push(y);
            continue;
        }
        let dist = Gamma::new(shape, 1.0 / g.alpha)
            .map_err(|e| Error::domain("sample_gamma_path", format!("gamma({shape}, {}): {e}", 1.0 / g.alpha)))?;
        y += dist.sample(rng);
        out.push(y);
        prev_t = t;
    }
    Ok(out)
}

/// Gamma subordinator on `t_grid` from independent `Gamma(p·Δt, rate α)`
/// increments.
pub fn sample_gamma_path<R: Rng + ?Sized>(g: &GammaParams, t_grid: &[f64], rng: &mut R) -> Result<SamplePath> {
    validate_grid(t_grid)?;
    let values = gamma_increments(g, t_grid, rng)?;
    Ok(SamplePath { times: t_grid.to_vec(), values })
}

/// Poisson count with the given mean (`λ × duration`).
pub fn sample_poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::domain("sample_poisson_count", format!("mean must be >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::domain("sample_poisson_count", format!("mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Poisson process with rate `lambda` read at nondecreasing internal times.
fn poisson_at<R: Rng + ?Sized>(lambda: f64, clock: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut prev = 0.0;
    let mut n: u64 = 0;
    let mut out = Vec::with_capacity(clock.len());
    for &c in clock {
        n += sample_poisson_count(lambda * (c - prev), rng)?;
        out.push(n as f64);
        prev = c;
    }
    Ok(out)
}

/// One path of the requested process on `spec.t_grid`.
pub fn sample_process_path(spec: &PathSpec, seed: Seed) -> Result<SamplePath> {
    let mut rng = seed.rng();
    let grid = &spec.t_grid;
    let step = spec.effective_stable_step();
    let values = match spec.model {
        ProcessModel::Poisson { lambda } => poisson_at(lambda, grid, &mut rng)?,
        ProcessModel::Gamma(g) => gamma_increments(&g, grid, &mut rng)?,
        ProcessModel::InverseStable { beta } => {
            first_passage(beta, grid, step.expect("stable model"), spec.max_steps, &mut rng)?
        }
        ProcessModel::Fpp(p) => {
            let e = first_passage(p.beta, grid, step.expect("stable model"), spec.max_steps, &mut rng)?;
            poisson_at(p.lambda, &e, &mut rng)?
        }
        ProcessModel::Nb { lambda, gamma } => {
            let y = gamma_increments(&gamma, grid, &mut rng)?;
            poisson_at(lambda, &y, &mut rng)?
        }
        ProcessModel::Fnbp(p) => {
            let y = gamma_increments(&p.gamma, grid, &mut rng)?;
            let e = first_passage(p.fpp.beta, &y, step.expect("stable model"), spec.max_steps, &mut rng)?;
            poisson_at(p.fpp.lambda, &e, &mut rng)?
        }
    };
    Ok(SamplePath { times: grid.clone(), values })
}

/// Width-`delta` increments `X(t+δ) − X(t)` for each `t` in `starts`. Both
/// `t` and `t+δ` must lie on the path grid.
pub fn increment_path(path: &SamplePath, delta: f64, starts: &[f64]) -> Result<SamplePath> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain("increment_path", format!("delta must be positive, got {delta}")));
    }
    let mut values = Vec::with_capacity(starts.len());
    for &t in starts {
        let hi = path.value_at(t + delta)?;
        let lo = if t == 0.0 { 0.0 } else { path.value_at(t)? };
        values.push(hi - lo);
    }
    Ok(SamplePath { times: starts.to_vec(), values })
}

/// Runs `f` once per replication stream `0..reps` on a pool of `threads`
/// workers (0 = all cores). Output order follows the stream index.
pub fn run_replications<T, F>(reps: u64, root: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Seed) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..reps).into_par_iter().map(|i| f(Seed::new(root, i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn seeds_are_reproducible() {
        let a: Vec<u64> = (0..5).map(|_| Seed::new(7, 3).rng().random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = Seed::new(7, 3).rng().random();
        let y: u64 = Seed::new(7, 4).rng().random();
        assert_ne!(x, y);
    }

    #[test]
    fn stable_laplace_transform() {
        let mut rng = Seed::new(1, 0).rng();
        for &beta in &[0.3, 0.5, 0.7] {
            let draws: Vec<f64> = (0..100_000).map(|_| sample_positive_stable(beta, &mut rng).unwrap()).collect();
            assert!(draws.iter().all(|&s| s > 0.0));
            for &u in &[0.5, 1.0, 2.0] {
                let lt: Vec<f64> = draws.iter().map(|s| (-u * s).exp()).collect();
                let (m, se) = mean_se(&lt);
                let want = (-u.powf(beta)).exp();
                assert!((m - want).abs() < 4.0 * se, "beta={beta} u={u}: {m} vs {want} (se {se})");
            }
        }
        assert!(sample_positive_stable(0.0, &mut rng).is_err());
        assert_eq!(sample_positive_stable(1.0, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn inverse_stable_marginal_mean() {
        let mut rng = Seed::new(2, 0).rng();
        let xs: Vec<f64> = (0..200_000).map(|_| sample_inverse_stable_marginal(0.5, 1.0, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&xs);
        let want = 2.0 / PI.sqrt();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
        assert_eq!(sample_inverse_stable_marginal(0.5, 0.0, &mut rng).unwrap(), 0.0);
        assert_eq!(sample_inverse_stable_marginal(1.0, 2.5, &mut rng).unwrap(), 2.5);
    }

    #[test]
    fn inverse_stable_path_is_monotone_with_right_mean() {
        let grid = [0.5, 1.0, 2.0, 4.0];
        let step = default_stable_step(0.6, 4.0) * 10.0;
        let mut sums = [0.0; 4];
        let reps = 4000;
        for i in 0..reps {
            let mut rng = Seed::new(3, i).rng();
            let p = sample_inverse_stable_path(0.6, &grid, step, DEFAULT_MAX_STEPS, &mut rng).unwrap();
            assert!(p.values.windows(2).all(|w| w[0] <= w[1]));
            for (s, v) in sums.iter_mut().zip(&p.values) {
                *s += v;
            }
        }
        for (t, s) in grid.iter().zip(sums) {
            let want = t.powf(0.6) / libm::tgamma(1.6);
            let got = s / reps as f64;
            assert!((got / want - 1.0).abs() < 0.05, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn resource_cap_is_enforced() {
        let mut rng = Seed::new(4, 0).rng();
        let err = sample_inverse_stable_path(0.5, &[100.0], 1e-6, 1000, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn gamma_path_moments() {
        let g = GammaParams::new(1.0, 1.0).unwrap();
        let mut at2 = Vec::new();
        let mut sqrt2 = Vec::new();
        for i in 0..50_000 {
            let mut rng = Seed::new(5, i).rng();
            let p = sample_gamma_path(&g, &[0.5, 2.0], &mut rng).unwrap();
            assert!(p.values[0] <= p.values[1]);
            at2.push(p.values[1]);
            sqrt2.push(p.values[1].sqrt());
        }
        let (m, se) = mean_se(&at2);
        assert!((m - 2.0).abs() < 4.0 * se);
        let (m, se) = mean_se(&sqrt2);
        let want = 0.75 * PI.sqrt();
        assert!((m - want).abs() < 4.0 * se);
    }

    #[test]
    fn poisson_counts() {
        let mut rng = Seed::new(6, 0).rng();
        assert_eq!(sample_poisson_count(0.0, &mut rng).unwrap(), 0);
        assert!(sample_poisson_count(-1.0, &mut rng).is_err());
        let xs: Vec<f64> = (0..100_000).map(|_| sample_poisson_count(4.0, &mut rng).unwrap() as f64).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 4.0).abs() < 4.0 * se);
        let zeros: Vec<f64> = xs.iter().map(|&x| if x == 0.0 { 1.0 } else { 0.0 }).collect();
        let (m, se) = mean_se(&zeros);
        assert!((m - (-4f64).exp()).abs() < 4.0 * se);
    }

    #[test]
    fn process_paths_are_deterministic_and_monotone() {
        let p = FnbpParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let spec = PathSpec::new(ProcessModel::Fnbp(p), vec![1.0, 2.0, 5.0]).unwrap();
        let a = sample_process_path(&spec, Seed::new(9, 11)).unwrap();
        let b = sample_process_path(&spec, Seed::new(9, 11)).unwrap();
        assert_eq!(a, b);
        assert!(a.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.values.iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn poisson_reduction_of_fpp_path() {
        let spec = PathSpec::new(ProcessModel::Fpp(FppParams::new(1.0, 2.0).unwrap()), vec![1.0, 3.0]).unwrap();
        let xs: Vec<f64> = (0..20_000).map(|i| sample_process_path(&spec, Seed::new(10, i)).unwrap().values[1]).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 6.0).abs() < 4.0 * se);
    }

    #[test]
    fn spec_validation() {
        assert!(PathSpec::new(ProcessModel::Poisson { lambda: 1.0 }, vec![]).is_err());
        assert!(PathSpec::new(ProcessModel::Poisson { lambda: 1.0 }, vec![2.0, 1.0]).is_err());
        assert!(PathSpec::new(ProcessModel::Poisson { lambda: -1.0 }, vec![1.0]).is_err());
        assert!(PathSpec::new(ProcessModel::InverseStable { beta: 1.5 }, vec![1.0]).is_err());
        let s = PathSpec::new(ProcessModel::Poisson { lambda: 1.0 }, vec![1.0]).unwrap();
        assert!(s.with_stable_step(0.0).is_err());
    }

    #[test]
    fn increments() {
        let path = SamplePath { times: vec![1.0, 2.0, 3.0, 4.0], values: vec![1.0, 1.0, 4.0, 6.0] };
        let inc = increment_path(&path, 1.0, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(inc.values, vec![0.0, 3.0, 2.0]);
        assert_eq!(inc.values.iter().sum::<f64>(), 6.0 - 1.0);
        let from_zero = increment_path(&path, 2.0, &[0.0]).unwrap();
        assert_eq!(from_zero.values, vec![1.0]);
        assert!(matches!(increment_path(&path, 1.5, &[1.0]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn replication_order_is_independent_of_threads() {
        let f = |s: Seed| -> Result<u64> { Ok(s.rng().random::<u64>()) };
        let one = run_replications(64, 5, 1, f).unwrap();
        let many = run_replications(64, 5, 4, f).unwrap();
        assert_eq!(one, many);
    }
}
