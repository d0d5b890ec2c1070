//! Exact and large-`t` moment formulas.
//!
//! Notation: `N` is the fractional Poisson process (FPP) with index `β` and
//! rate `λ`; `Y` is a gamma subordinator with rate `α` and shape rate `p`;
//! `Q(t) = N(Y(t))` is the fractional negative binomial process (FNBP). The
//! width-`δ` increments of `N` and `Q` are the FPN and FNBN noises.
//!
//! All covariances between disjoint increments are computed without
//! differencing large covariances, so they stay accurate for `t ≫ s`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{
    adaptive_quad, adaptive_quad_breaks, beta_fn, gamma_frac_moment, inc_beta, log_beta,
    log_gamma_ratio, log_gen_binom, power_diff, sum_compensated, QuadConfig,
};

fn check_time(func: &'static str, name: &str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("{name} must be a finite time >= 0, got {t}")))
    }
}

fn check_positive_time(func: &'static str, name: &str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("{name} must be a finite time > 0, got {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FppParams {
    pub beta: f64,
    pub lambda: f64,
}

impl FppParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain("FppParams", format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain("FppParams", format!("lambda must be positive, got {lambda}")));
        }
        Ok(FppParams { beta, lambda })
    }

    /// `λ / Γ(1+β)`, the mean coefficient.
    pub fn q(&self) -> f64 {
        (self.lambda.ln() - libm::lgamma(1.0 + self.beta)).exp()
    }

    /// `β q² B(β, 1+β)`.
    pub fn d(&self) -> f64 {
        let b = self.beta;
        b * self.q().powi(2) * beta_fn(b, 1.0 + b).expect("beta in (0,1]")
    }

    /// `2β q² / (β+1)`.
    pub fn c(&self) -> f64 {
        2.0 * self.beta * self.q().powi(2) / (self.beta + 1.0)
    }

    /// Coefficient of `t^(2β)` in the variance, `2d − q²`. Zero at `β = 1`.
    pub fn r(&self) -> f64 {
        let b = self.beta;
        let inv_g2b = (-libm::lgamma(2.0 * b)).exp();
        let inv_bgb2 = (-(b.ln() + 2.0 * libm::lgamma(b))).exp();
        self.lambda.powi(2) / b * (inv_g2b - inv_bgb2)
    }

    pub fn is_poisson(&self) -> bool {
        self.beta == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub p: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain("GammaParams", format!("alpha must be positive, got {alpha}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain("GammaParams", format!("p must be positive, got {p}")));
        }
        Ok(GammaParams { alpha, p })
    }

    /// `E[Y(t)^m]`.
    pub fn moment(&self, m: f64, t: f64) -> Result<f64> {
        gamma_frac_moment(m, self.alpha, self.p * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FnbpParams {
    pub fpp: FppParams,
    pub gamma: GammaParams,
}

impl FnbpParams {
    pub fn new(beta: f64, lambda: f64, alpha: f64, p: f64) -> Result<Self> {
        Ok(FnbpParams { fpp: FppParams::new(beta, lambda)?, gamma: GammaParams::new(alpha, p)? })
    }

    /// `λ / (α + λ)`.
    pub fn eta(&self) -> f64 {
        self.fpp.lambda / (self.gamma.alpha + self.fpp.lambda)
    }

    /// `(p/α)^(2β) R`, the large-`t` variance coefficient.
    pub fn d1(&self) -> f64 {
        (self.gamma.p / self.gamma.alpha).powf(2.0 * self.fpp.beta) * self.fpp.r()
    }
}

/// Width-`δ` increment process built on a base process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Noise<P> {
    pub base: P,
    pub delta: f64,
}

impl<P> Noise<P> {
    pub fn new(base: P, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::domain("Noise", format!("delta must be positive, got {delta}")));
        }
        Ok(Noise { base, delta })
    }
}

pub type FpnParams = Noise<FppParams>;
pub type FnbnParams = Noise<FnbpParams>;

/// Leading large-`t` term `prefactor · t^exponent`, evaluated at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub exponent: f64,
    pub prefactor: f64,
    pub validity_note: String,
}

impl AsymptoticValue {
    fn at(t: f64, prefactor: f64, exponent: f64, note: impl Into<String>) -> Self {
        AsymptoticValue { value: prefactor * t.powf(exponent), exponent, prefactor, validity_note: note.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DependenceLabel {
    Lrd,
    Srd,
    Unclassified,
}

impl fmt::Display for DependenceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DependenceLabel::Lrd => "LRD",
            DependenceLabel::Srd => "SRD",
            DependenceLabel::Unclassified => "UNCLASSIFIED",
        })
    }
}

/// LRD for a decay exponent in `(0, 1)`, SRD in `(1, 2)`.
pub fn classify_exponent(d: f64) -> DependenceLabel {
    if d > 0.0 && d < 1.0 {
        DependenceLabel::Lrd
    } else if d > 1.0 && d < 2.0 {
        DependenceLabel::Srd
    } else {
        DependenceLabel::Unclassified
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Fpp,
    Fpn,
    Fnbp,
    Fnbn,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::Fpp => "fpp",
            ProcessKind::Fpn => "fpn",
            ProcessKind::Fnbp => "fnbp",
            ProcessKind::Fnbn => "fnbn",
        })
    }
}

/// Decay exponent `d` of `Corr[X(s), X(t)] ~ c(s) t^(−d)`.
///
/// For the level processes `Cov` tends to a constant while `Var(t)` grows
/// like `t^(2β)`, giving `d = β`; at `β = 1` the variance is linear and
/// `d = 1/2`. For the noises the covariance decays like `t^(β−2)` and the
/// variance like `t^(β−1)`, giving `d = (3−β)/2` (the value `1` at `β = 1` is
/// formal: Poisson increments are uncorrelated).
pub fn theoretical_exponent(kind: ProcessKind, beta: f64) -> f64 {
    match kind {
        ProcessKind::Fpp | ProcessKind::Fnbp if beta >= 1.0 => 0.5,
        ProcessKind::Fpp | ProcessKind::Fnbp => beta,
        ProcessKind::Fpn | ProcessKind::Fnbn => (3.0 - beta) / 2.0,
    }
}

// ---------------------------------------------------------------------------
// FPP

pub fn fpp_mean(p: &FppParams, t: f64) -> Result<f64> {
    check_time("fpp_mean", "t", t)?;
    Ok(p.q() * t.powf(p.beta))
}

pub fn fpp_variance(p: &FppParams, t: f64) -> Result<f64> {
    check_time("fpp_variance", "t", t)?;
    let tb = t.powf(p.beta);
    Ok(p.q() * tb + p.r() * tb * tb)
}

/// `β t^(2β) B(β,1+β; s/t) − (st)^β`.
///
/// For `s/t ≤ 3/4` the leading `(st)^β` cancels analytically and the rest is
/// summed as a series, so `F ≈ −β²/(β+1) s^(β+1) t^(β−1)` is obtained without
/// cancellation when `s ≪ t`.
pub fn fpp_f(p: &FppParams, s: f64, t: f64) -> Result<f64> {
    check_time("fpp_F", "s", s)?;
    check_positive_time("fpp_F", "t", t)?;
    if s > t {
        return Err(Error::domain("fpp_F", format!("need s <= t, got s={s}, t={t}")));
    }
    let b = p.beta;
    let x = s / t;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= 0.75 {
        // B(β,1+β;x) = x^β Σ c_k x^k / (β+k), c_k = (−1)^k C(β,k)
        let mut ck = 1.0;
        let mut xk = 1.0;
        let mut terms = Vec::with_capacity(128);
        for k in 1..5000 {
            let kf = k as f64;
            ck *= (kf - 1.0 - b) / kf;
            xk *= x;
            let term = ck * xk / (b + kf);
            terms.push(term);
            if term == 0.0 || (term.abs() < 1e-18 * terms[0].abs() && k > 2) {
                break;
            }
        }
        Ok(b * t.powf(2.0 * b) * x.powf(b) * sum_compensated(terms))
    } else {
        Ok(b * t.powf(2.0 * b) * inc_beta(b, 1.0 + b, x)? - (s * t).powf(b))
    }
}

/// `Cov[N(s), N(t)]`; arguments may be given in either order.
pub fn fpp_covariance(p: &FppParams, s: f64, t: f64) -> Result<f64> {
    check_time("fpp_covariance", "s", s)?;
    check_time("fpp_covariance", "t", t)?;
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if s == 0.0 {
        return Ok(0.0);
    }
    let b = p.beta;
    let q = p.q();
    let s2b = s.powf(2.0 * b);
    Ok(q * s.powf(b) + q * q * (b * s2b * beta_fn(b, 1.0 + b)? + fpp_f(p, s, t)?))
}

/// `Corr[N(s), N(t)]`; undefined at `s = 0` where `N(0) = 0`.
pub fn fpp_correlation(p: &FppParams, s: f64, t: f64) -> Result<f64> {
    check_positive_time("fpp_correlation", "s", s)?;
    check_positive_time("fpp_correlation", "t", t)?;
    let cov = fpp_covariance(p, s, t)?;
    Ok(cov / (fpp_variance(p, s)? * fpp_variance(p, t)?).sqrt())
}

/// `E[(N(t)−N(s))(N(t)−N(s)−1)] = 2βq² ∫ₛᵗ (t−r)^β r^(β−1) dr`.
///
/// Closed form via the upper incomplete beta tail, evaluated directly as
/// `B(1+β, β; (t−s)/t)` so short increments keep full relative accuracy.
pub fn fpp_increment_factorial_moment(p: &FppParams, s: f64, t: f64) -> Result<f64> {
    check_time("fpp_increment_factorial_moment", "s", s)?;
    check_positive_time("fpp_increment_factorial_moment", "t", t)?;
    if s > t {
        return Err(Error::domain("fpp_increment_factorial_moment", format!("need s <= t, got s={s}, t={t}")));
    }
    if s == t {
        return Ok(0.0);
    }
    let b = p.beta;
    let tail = inc_beta(1.0 + b, b, (t - s) / t)?;
    Ok(2.0 * b * p.q().powi(2) * t.powf(2.0 * b) * tail)
}

/// `t^β − s^β` without cancellation when `s ≈ t`.
fn pow_gap(beta: f64, s: f64, t: f64) -> f64 {
    if s == 0.0 {
        t.powf(beta)
    } else {
        -t.powf(beta) * (beta * (s / t).ln()).exp_m1()
    }
}

/// `Var[N(b) − N(a)]` for `0 ≤ a < b`.
pub fn fpp_increment_variance(p: &FppParams, a: f64, b: f64) -> Result<f64> {
    let fm = fpp_increment_factorial_moment(p, a, b)?;
    if p.is_poisson() {
        // fm and mean² cancel exactly; skip the rounding
        return Ok(p.lambda * (b - a));
    }
    let mean = p.q() * pow_gap(p.beta, a, b);
    Ok(fm + mean - mean * mean)
}

// ---------------------------------------------------------------------------
// FPN

fn check_disjoint(func: &'static str, s: f64, t: f64, delta: f64) -> Result<()> {
    check_time(func, "s", s)?;
    check_time(func, "t", t)?;
    if t < s + delta {
        return Err(Error::domain(func, format!("windows overlap: need t >= s + delta, got s={s}, t={t}, delta={delta}")));
    }
    Ok(())
}

/// `(t+δ−r)^β − (t−r)^β − [(t+δ)^β − t^β]` for `0 ≤ r < t`.
fn window_kernel(beta: f64, delta: f64, t: f64, r: f64) -> f64 {
    if delta / (t - r) <= 0.5 {
        // Σ_k C(β,k) δ^k t^(β−k) [(1 − r/t)^(β−k) − 1]
        let lr = (-r / t).ln_1p();
        let mut bk = 1.0;
        let mut dk = 1.0;
        let mut acc = 0.0;
        for k in 1..400 {
            let kf = k as f64;
            bk *= (beta - kf + 1.0) / kf;
            dk *= delta / t;
            let term = bk * dk * t.powf(beta) * ((beta - kf) * lr).exp_m1();
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() || bk == 0.0 {
                break;
            }
        }
        acc
    } else {
        ((t + delta - r).powf(beta) - (t - r).powf(beta)) - ((t + delta).powf(beta) - t.powf(beta))
    }
}

/// Covariance of FPN values on disjoint windows `[s, s+δ]`, `[t, t+δ]`.
///
/// Evaluated as `βq² ∫ₛ^{s+δ} r^(β−1) h(r) dr` with `h` the window kernel;
/// this equals the four-term combination of [`fpp_covariance`] but does not
/// lose digits to cancellation for `t ≫ s`.
pub fn fpn_covariance(noise: &FpnParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let delta = noise.delta;
    check_disjoint("fpn_covariance", s, t, delta)?;
    let p = &noise.base;
    if p.is_poisson() {
        return Ok(0.0);
    }
    let b = p.beta;
    let integral = adaptive_quad(|r| r.powf(b - 1.0) * window_kernel(b, delta, t, r), s, s + delta, cfg)?;
    Ok(b * p.q().powi(2) * integral)
}

/// `K = βq²δ((s+δ)^(β+1) − s^(β+1))`.
pub fn fpn_k(noise: &FpnParams, s: f64) -> f64 {
    let p = &noise.base;
    let b = p.beta;
    b * p.q().powi(2) * noise.delta * ((s + noise.delta).powf(b + 1.0) - s.powf(b + 1.0))
}

/// Leading term `K β(1−β)/(β+1) · t^(β−2)` of [`fpn_covariance`].
pub fn fpn_covariance_asymptotic(noise: &FpnParams, s: f64, t: f64) -> Result<AsymptoticValue> {
    check_disjoint("fpn_covariance_asymptotic", s, t, noise.delta)?;
    let b = noise.base.beta;
    let prefactor = fpn_k(noise, s) * b * (1.0 - b) / (b + 1.0);
    Ok(AsymptoticValue::at(t, prefactor, b - 2.0, "leading term for t >> s + delta; relative error O((s+delta)/t)"))
}

pub fn fpn_variance(noise: &FpnParams, t: f64) -> Result<f64> {
    check_time("fpn_variance", "t", t)?;
    fpp_increment_variance(&noise.base, t, t + noise.delta)
}

/// Leading term of [`fpn_variance`]: `t^(β−1) [βδq + 2βq²δ^(β+1)/(β+1)]`.
///
/// The second bracket term comes from the increment's factorial moment and
/// is of the same order as the first. At `β = 1` the variance is exactly
/// `λδ` for all `t`.
pub fn fpn_variance_asymptotic(noise: &FpnParams, t: f64) -> Result<AsymptoticValue> {
    check_positive_time("fpn_variance_asymptotic", "t", t)?;
    let p = &noise.base;
    let delta = noise.delta;
    if p.is_poisson() {
        return Ok(AsymptoticValue::at(t, p.lambda * delta, 0.0, "exact for Poisson increments"));
    }
    let b = p.beta;
    let q = p.q();
    let prefactor = b * delta * q + 2.0 * b * q * q * delta.powf(b + 1.0) / (b + 1.0);
    Ok(AsymptoticValue::at(t, prefactor, b - 1.0, "leading term for t >> delta; not meaningful below t = 10 delta"))
}

pub fn fpn_correlation(noise: &FpnParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let cov = fpn_covariance(noise, s, t, cfg)?;
    Ok(cov / (fpn_variance(noise, s)? * fpn_variance(noise, t)?).sqrt())
}

// ---------------------------------------------------------------------------
// Block-variance ratio

/// `Δₙ^(m) = Var[N(nm) − N((n−1)m)] / Σⱼ Var[N(j) − N(j−1)]`, the sum over
/// the `m` unit increments inside the block. Cost is `O(m)`.
pub fn delta_statistic(p: &FppParams, n: u64, m: u64) -> Result<f64> {
    if n < 1 || m < 1 {
        return Err(Error::domain("delta_statistic", format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    let lo = ((n - 1) * m) as f64;
    let hi = (n * m) as f64;
    let num = fpp_increment_variance(p, lo, hi)?;
    let first = (n - 1) * m + 1;
    let terms = (first..=n * m)
        .map(|j| fpp_increment_variance(p, (j - 1) as f64, j as f64))
        .collect::<Result<Vec<_>>>()?;
    let den = sum_compensated(terms);
    if !(den > f64::MIN_POSITIVE) || !den.is_finite() {
        return Err(Error::numerical("delta_statistic", format!("denominator {den} is not a positive normal number")));
    }
    Ok(num / den)
}

/// `C(n,β)² / C(n,2β)` with `C(x,y) = x^y − (x−1)^y`.
pub fn delta_reference_bound(beta: f64, n: u64) -> Result<f64> {
    let n = n as f64;
    Ok(power_diff(n, beta)?.powi(2) / power_diff(n, 2.0 * beta)?)
}

// ---------------------------------------------------------------------------
// FNBP

/// `P[Q(t) = n]` at `β = 1`: negative binomial with shape `pt`, success `η`.
pub fn nb_pmf(params: &FnbpParams, n: u64, t: f64) -> Result<f64> {
    check_positive_time("nb_pmf", "t", t)?;
    let pt = params.gamma.p * t;
    let eta = params.eta();
    let ln_one_minus_eta = (params.gamma.alpha / (params.gamma.alpha + params.fpp.lambda)).ln();
    let ln = log_gen_binom(n as f64 + pt - 1.0, n)? + n as f64 * eta.ln() + pt * ln_one_minus_eta;
    Ok(ln.exp())
}

pub fn fnbp_mean(params: &FnbpParams, t: f64) -> Result<f64> {
    check_positive_time("fnbp_mean", "t", t)?;
    Ok(params.fpp.q() * params.gamma.moment(params.fpp.beta, t)?)
}

pub fn fnbp_variance(params: &FnbpParams, t: f64) -> Result<f64> {
    check_positive_time("fnbp_variance", "t", t)?;
    let b = params.fpp.beta;
    let q = params.fpp.q();
    let m1 = params.gamma.moment(b, t)?;
    let m2 = params.gamma.moment(2.0 * b, t)?;
    let v = q * m1 * (1.0 - q * m1) + 2.0 * params.fpp.d() * m2;
    if v < 0.0 || !v.is_finite() {
        return Err(Error::numerical("fnbp_variance", format!("variance formula gave {v} at t={t}")));
    }
    Ok(v)
}

/// Quadrature break points on `(0, 1/2)` for a Beta(a, b) density whose
/// mode sits near `mean` with spread `sd`.
fn beta_breaks(mean: f64, sd: f64) -> Vec<f64> {
    let mut pts = vec![0.0, 0.5];
    let mut x = mean / 8.0;
    while x < 0.5 {
        pts.push(x);
        x *= 2.0;
    }
    for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
        pts.push(mean - k * sd);
        pts.push(mean + k * sd);
    }
    pts.retain(|&v| (0.0..=0.5).contains(&v));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    pts
}

/// `E[B(β, 1+β; V)]` for `V ~ Beta(a, b)`.
fn expected_inc_beta(beta: f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let lnb = log_beta(a, b)?;
    let full = beta_fn(beta, 1.0 + beta)?;
    let n = a + b;
    let sd = (a * b / (n * n * (n + 1.0))).sqrt();

    // v in (0, 1/2)
    let lower = |v: f64| {
        let dens = ((a - 1.0) * v.ln() + (b - 1.0) * (-v).ln_1p() - lnb).exp();
        if dens == 0.0 {
            return 0.0;
        }
        inc_beta(beta, 1.0 + beta, v).unwrap_or(f64::NAN) * dens
    };
    // v = 1 − w, w in (0, 1/2): B(β,1+β;1−w) = B(β,1+β) − B(1+β,β;w). The
    // constant part integrates to a regularized incomplete beta in closed
    // form, which keeps the w^(b−1) singularity out of the quadrature when
    // b = p(t−s) is small.
    let upper = |w: f64| {
        let dens = ((b - 1.0) * w.ln() + (a - 1.0) * (-w).ln_1p() - lnb).exp();
        if dens == 0.0 {
            return 0.0;
        }
        inc_beta(1.0 + beta, beta, w).unwrap_or(f64::NAN) * dens
    };
    let lo = adaptive_quad_breaks(lower, &beta_breaks(a / n, sd), cfg)?;
    let mass = (inc_beta(b, a, 0.5)?.ln() - lnb).exp();
    let hi = full * mass - adaptive_quad_breaks(upper, &beta_breaks(b / n, sd), cfg)?;
    Ok(lo + hi)
}

/// `E[Y(t)^(2β) B(β, 1+β; Y(s)/Y(t))]` for `0 < s < t`.
///
/// `Y(s)/Y(t) ~ Beta(ps, p(t−s))` is independent of `Y(t)`, so the
/// expectation factors into a gamma moment and a one-dimensional integral.
pub fn gamma_inc_beta_moment(params: &FnbpParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_positive_time("gamma_inc_beta_moment", "s", s)?;
    check_positive_time("gamma_inc_beta_moment", "t", t)?;
    if s >= t {
        return Err(Error::domain("gamma_inc_beta_moment", format!("need s < t, got s={s}, t={t}")));
    }
    let b = params.fpp.beta;
    let g = &params.gamma;
    let eb = expected_inc_beta(b, g.p * s, g.p * (t - s), cfg)?;
    Ok(g.moment(2.0 * b, t)? * eb)
}

/// `E[Y(s)^β Y(t)^β]` for `0 < s ≤ t`, exact.
pub fn gamma_joint_moment(g: &GammaParams, beta: f64, s: f64, t: f64) -> Result<f64> {
    check_positive_time("gamma_joint_moment", "s", s)?;
    check_positive_time("gamma_joint_moment", "t", t)?;
    if s > t {
        return Err(Error::domain("gamma_joint_moment", format!("need s <= t, got s={s}, t={t}")));
    }
    if s == t {
        return g.moment(2.0 * beta, t);
    }
    // E[V^β] for V ~ Beta(ps, p(t−s))
    let ev = (log_gamma_ratio(g.p * s, beta)? - log_gamma_ratio(g.p * t, beta)?).exp();
    Ok(ev * g.moment(2.0 * beta, t)?)
}

/// `Cov[Q(s), Q(t)]`; arguments may be given in either order.
pub fn fnbp_covariance(params: &FnbpParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_positive_time("fnbp_covariance", "s", s)?;
    check_positive_time("fnbp_covariance", "t", t)?;
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if s == t {
        return fnbp_variance(params, t);
    }
    let b = params.fpp.beta;
    let q = params.fpp.q();
    let g = &params.gamma;
    let m1s = g.moment(b, s)?;
    let m1t = g.moment(b, t)?;
    let m2s = g.moment(2.0 * b, s)?;
    let mix = gamma_inc_beta_moment(params, s, t, cfg)?;
    Ok(sum_compensated([q * m1s, params.fpp.d() * m2s, -q * q * m1s * m1t, q * q * b * mix]))
}

/// `lim_{t→∞} Cov[Q(s), Q(t)] = qE[Y^β(s)] + dE[Y^(2β)(s)]`.
pub fn fnbp_covariance_limit(params: &FnbpParams, s: f64) -> Result<f64> {
    check_positive_time("fnbp_covariance_limit", "s", s)?;
    let b = params.fpp.beta;
    Ok(params.fpp.q() * params.gamma.moment(b, s)? + params.fpp.d() * params.gamma.moment(2.0 * b, s)?)
}

pub fn fnbp_correlation(params: &FnbpParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let cov = fnbp_covariance(params, s, t, cfg)?;
    Ok(cov / (fnbp_variance(params, s)? * fnbp_variance(params, t)?).sqrt())
}

// ---------------------------------------------------------------------------
// FNBN

/// `Cov[Q(a), Q(b)]` with `Q(0) = 0`.
fn fnbp_cov0(params: &FnbpParams, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if a == 0.0 || b == 0.0 {
        Ok(0.0)
    } else {
        fnbp_covariance(params, a, b, cfg)
    }
}

/// Exact covariance of FNBN values on disjoint windows, as the four-term
/// combination of FNBP covariances. Loses relative accuracy once the result
/// is small compared with the individual covariances (`t ≫ s`).
pub fn fnbn_covariance(noise: &FnbnParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let d = noise.delta;
    check_disjoint("fnbn_covariance", s, t, d)?;
    let p = &noise.base;
    Ok(sum_compensated([
        fnbp_cov0(p, s + d, t + d, cfg)?,
        fnbp_cov0(p, s, t, cfg)?,
        -fnbp_cov0(p, s + d, t, cfg)?,
        -fnbp_cov0(p, s, t + d, cfg)?,
    ]))
}

pub fn fnbn_variance(noise: &FnbnParams, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_time("fnbn_variance", "t", t)?;
    let p = &noise.base;
    let u = t + noise.delta;
    if t == 0.0 {
        return fnbp_variance(p, u);
    }
    let v = sum_compensated([fnbp_variance(p, u)?, fnbp_variance(p, t)?, -2.0 * fnbp_covariance(p, t, u, cfg)?]);
    if v < 0.0 {
        return Err(Error::numerical("fnbn_variance", format!("variance combination gave {v} at t={t}")));
    }
    Ok(v)
}

pub fn fnbn_correlation(noise: &FnbnParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let cov = fnbn_covariance(noise, s, t, cfg)?;
    Ok(cov / (fnbn_variance(noise, s, cfg)? * fnbn_variance(noise, t, cfg)?).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnbnAsymptotics {
    pub cov: AsymptoticValue,
    pub var: AsymptoticValue,
    pub corr_exponent: f64,
}

/// Leading large-`t` terms of the FNBN covariance and variance.
///
/// Covariance: `t^(β−2) · q²β²(1−β)δ p^(β−1) α^(−β) / (β+1) ·
/// [(p(s+δ)−1) E[Y^β(s+δ)] − (ps−1) E[Y^β(s)]]`, which may be negative when
/// `ps < 1`.
///
/// Variance: `t^(β−1) (p/α)^(β−1) [βqpδ/α + 2βq² E[G^(β+1)]/(β+1)]` with
/// `G ~ Gamma(rate α, shape pδ)` the subordinator increment over the window.
pub fn fnbn_asymptotics(noise: &FnbnParams, s: f64, t: f64) -> Result<FnbnAsymptotics> {
    let delta = noise.delta;
    check_disjoint("fnbn_asymptotics", s, t, delta)?;
    let params = &noise.base;
    let b = params.fpp.beta;
    let q = params.fpp.q();
    let g = &params.gamma;
    let (alpha, p) = (g.alpha, g.p);
    let corr_exponent = theoretical_exponent(ProcessKind::Fnbn, b);

    if params.fpp.is_poisson() {
        let var = fnbp_variance(params, delta)?;
        return Ok(FnbnAsymptotics {
            cov: AsymptoticValue::at(t, 0.0, b - 2.0, "negative binomial increments are uncorrelated"),
            var: AsymptoticValue::at(t, var, 0.0, "exact: stationary increments"),
            corr_exponent,
        });
    }

    let m = |u: f64| if u == 0.0 { Ok(0.0) } else { g.moment(b, u) };
    let bracket = (p * (s + delta) - 1.0) * m(s + delta)? - (p * s - 1.0) * m(s)?;
    let cov_pref = q * q * b * b * (1.0 - b) * delta * p.powf(b - 1.0) * alpha.powf(-b) / (b + 1.0) * bracket;

    let window_moment = gamma_frac_moment(b + 1.0, alpha, p * delta)?;
    let var_pref = (p / alpha).powf(b - 1.0) * (b * q * p * delta / alpha + 2.0 * b * q * q * window_moment / (b + 1.0));

    Ok(FnbnAsymptotics {
        cov: AsymptoticValue::at(t, cov_pref, b - 2.0, "leading term for t >> s + delta"),
        var: AsymptoticValue::at(t, var_pref, b - 1.0, "leading term for t >> delta"),
        corr_exponent,
    })
}

/// Large-`t` FNBN correlation: asymptotic covariance over the exact
/// variance at `s` and the asymptotic variance at `t`.
pub fn fnbn_correlation_asymptotic(noise: &FnbnParams, s: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    let a = fnbn_asymptotics(noise, s, t)?;
    Ok(a.cov.value / (fnbn_variance(noise, s, cfg)? * a.var.value).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fpp(b: f64, l: f64) -> FppParams {
        FppParams::new(b, l).unwrap()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn params_validate() {
        assert!(FppParams::new(0.0, 1.0).is_err());
        assert!(FppParams::new(1.01, 1.0).is_err());
        assert!(FppParams::new(0.5, 0.0).is_err());
        assert!(GammaParams::new(-1.0, 1.0).is_err());
        assert!(Noise::new(fpp(0.5, 1.0), 0.0).is_err());
    }

    #[test]
    fn derived_constants() {
        let p = fpp(0.5, 1.0);
        assert_relative_eq!(p.q(), 2.0 / PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(p.r(), 2.0 * p.d() - p.q().powi(2), max_relative = 1e-12);
        assert_eq!(fpp(1.0, 3.0).r(), 0.0);
        let nb = FnbpParams::new(0.5, 1.0, 3.0, 2.0).unwrap();
        assert_relative_eq!(nb.eta(), 0.25);
    }

    #[test]
    fn fpp_moments_examples() {
        assert_relative_eq!(fpp_mean(&fpp(1.0, 2.0), 3.0).unwrap(), 6.0, max_relative = 1e-14);
        assert_eq!(fpp_mean(&fpp(0.3, 2.0), 0.0).unwrap(), 0.0);
        assert_relative_eq!(fpp_mean(&fpp(0.5, 1.0), 4.0).unwrap(), 4.0 / PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(fpp_variance(&fpp(1.0, 2.0), 3.0).unwrap(), 6.0, max_relative = 1e-14);
        assert_relative_eq!(fpp_variance(&fpp(0.5, 1.0), 1.0).unwrap(), 1.855_139_622_360_35, max_relative = 1e-13);
        assert!(fpp_mean(&fpp(0.5, 1.0), -1.0).is_err());
    }

    #[test]
    fn f_examples() {
        let p1 = fpp(1.0, 1.0);
        assert_relative_eq!(fpp_f(&p1, 0.4, 3.0).unwrap(), -0.08, max_relative = 1e-13);
        assert_relative_eq!(fpp_f(&p1, 2.9, 3.0).unwrap(), -4.205, max_relative = 1e-13);
        assert_eq!(fpp_f(&fpp(0.5, 1.0), 0.0, 5.0).unwrap(), 0.0);
        assert_relative_eq!(fpp_f(&fpp(0.5, 1.0), 1.0, 100.0).unwrap(), -0.016_691_756_388_910_305, max_relative = 1e-12);
        assert_relative_eq!(fpp_f(&fpp(0.3, 1.0), 2.0, 2.5).unwrap(), -0.112_371_554_346_385_13, max_relative = 1e-12);
        assert!(fpp_f(&fpp(0.5, 1.0), 2.0, 1.0).is_err());
    }

    #[test]
    fn f_series_matches_direct_form_at_switch() {
        for &b in &[0.1, 0.5, 0.9] {
            let p = fpp(b, 1.0);
            let x = 0.75;
            let direct = b * inc_beta(b, 1.0 + b, x).unwrap() - x.powf(b);
            assert_relative_eq!(fpp_f(&p, x, 1.0).unwrap(), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn f_small_ratio_expansion() {
        // F ≈ −β²/(β+1) s^(β+1) t^(β−1)
        let b = 0.5;
        let (s, t) = (1.0f64, 1e6f64);
        let lead = -b * b / (b + 1.0) * s.powf(b + 1.0) * t.powf(b - 1.0);
        assert_relative_eq!(fpp_f(&fpp(b, 1.0), s, t).unwrap(), lead, max_relative = 1e-5);
    }

    #[test]
    fn fpp_covariance_examples() {
        let p = fpp(1.0, 2.5);
        assert_relative_eq!(fpp_covariance(&p, 1.5, 4.0).unwrap(), 3.75, max_relative = 1e-13);
        assert_relative_eq!(fpp_covariance(&p, 4.0, 1.5).unwrap(), 3.75, max_relative = 1e-13);
        assert_eq!(fpp_covariance(&fpp(0.4, 1.0), 0.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(fpp_covariance(&fpp(0.5, 1.0), 1.0, 10.0).unwrap(), 2.060_229_162_830_628_4, max_relative = 1e-12);
        for &t in &[0.5, 1.0, 10.0, 100.0] {
            let p = fpp(0.35, 1.7);
            assert_relative_eq!(fpp_covariance(&p, t, t).unwrap(), fpp_variance(&p, t).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn factorial_moment_examples() {
        assert_eq!(fpp_increment_factorial_moment(&fpp(0.5, 1.0), 2.0, 2.0).unwrap(), 0.0);
        let v = fpp_increment_factorial_moment(&fpp(1.0, 1.5), 1.0, 3.0).unwrap();
        assert_relative_eq!(v, 9.0, max_relative = 1e-13);
        let v = fpp_increment_factorial_moment(&fpp(0.5, 1.0), 1.0, 3.0).unwrap();
        assert_relative_eq!(v, 1.848_408_055_502_144, max_relative = 1e-12);
    }

    #[test]
    fn fpn_examples() {
        let c = cfg();
        let n = Noise::new(fpp(1.0, 2.0), 0.5).unwrap();
        assert_eq!(fpn_covariance(&n, 1.0, 3.0, &c).unwrap(), 0.0);
        assert_relative_eq!(fpn_variance(&n, 7.0).unwrap(), 1.0, max_relative = 1e-12);

        let n = Noise::new(fpp(0.2, 1.0), 1.0).unwrap();
        assert_relative_eq!(fpn_covariance(&n, 1.0, 1e4, &c).unwrap(), 2.589_503_525_596_830_7e-9, max_relative = 1e-8);
        let n = Noise::new(fpp(0.5, 2.0), 0.5).unwrap();
        assert_relative_eq!(fpn_covariance(&n, 0.0, 3.0, &c).unwrap(), 0.013_839_379_959_864_748, max_relative = 1e-8);
        let n = Noise::new(fpp(0.7, 1.0), 1.0).unwrap();
        assert_relative_eq!(fpn_covariance(&n, 3.0, 50.0, &c).unwrap(), 0.002_735_983_944_454_183_5, max_relative = 1e-8);

        let n = Noise::new(fpp(0.3, 1.0), 1.0).unwrap();
        assert_relative_eq!(fpn_variance(&n, 1e6).unwrap(), 5.724_563_651_657_830_6e-5, max_relative = 1e-9);
        let n = Noise::new(fpp(0.5, 1.0), 1.0).unwrap();
        assert_relative_eq!(fpn_variance(&n, 2.0).unwrap(), 0.780_344_292_068_976, max_relative = 1e-12);
        assert_relative_eq!(fpn_variance(&n, 0.0).unwrap(), fpp_variance(&n.base, 1.0).unwrap(), max_relative = 1e-13);

        assert!(fpn_covariance(&n, 1.0, 1.5, &c).is_err());
    }

    #[test]
    fn fpn_covariance_matches_four_term_combination() {
        let c = cfg();
        for &(b, l, d, s, t) in &[(0.3, 1.0, 1.0, 0.5, 3.0), (0.6, 2.0, 0.25, 1.0, 1.4), (0.9, 0.7, 2.0, 0.0, 2.0)] {
            let n = Noise::new(fpp(b, l), d).unwrap();
            let p = &n.base;
            let four = fpp_covariance(p, s + d, t + d).unwrap() + fpp_covariance(p, s, t).unwrap()
                - fpp_covariance(p, s + d, t).unwrap()
                - fpp_covariance(p, s, t + d).unwrap();
            assert_relative_eq!(fpn_covariance(&n, s, t, &c).unwrap(), four, max_relative = 1e-9);
        }
    }

    #[test]
    fn fpn_asymptotics() {
        let n = Noise::new(fpp(0.5, 1.0), 1.0).unwrap();
        assert_relative_eq!(fpn_k(&n, 2.0), 1.507_340_740_216_526, max_relative = 1e-13);
        let n0 = Noise::new(fpp(0.4, 1.3), 0.7).unwrap();
        let q = n0.base.q();
        assert_relative_eq!(fpn_k(&n0, 0.0), 0.4 * q * q * 0.7f64.powf(2.4), max_relative = 1e-13);

        let c = cfg();
        let n = Noise::new(fpp(0.2, 1.0), 1.0).unwrap();
        let t = 1e6;
        let a = fpn_covariance_asymptotic(&n, 1.0, t).unwrap();
        assert_eq!(a.exponent, 0.2 - 2.0);
        let ratio = fpn_covariance(&n, 1.0, t, &c).unwrap() / a.value;
        assert!((ratio - 1.0).abs() < 1e-5, "ratio {ratio}");

        let n = Noise::new(fpp(0.3, 1.0), 1.0).unwrap();
        let a = fpn_variance_asymptotic(&n, 1e6).unwrap();
        let ratio = fpn_variance(&n, 1e6).unwrap() / a.value;
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn fpn_correlation_bounds() {
        let c = cfg();
        let n = Noise::new(fpp(0.2, 1.0), 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for &t in &[10.0, 100.0, 1e3, 1e4] {
            let r = fpn_correlation(&n, 1.0, t, &c).unwrap();
            assert!(r > 0.0 && r < prev);
            prev = r;
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify_exponent(0.5), DependenceLabel::Lrd);
        assert_eq!(classify_exponent(1.25), DependenceLabel::Srd);
        assert_eq!(classify_exponent(1.0), DependenceLabel::Unclassified);
        assert_eq!(classify_exponent(0.0), DependenceLabel::Unclassified);
        assert_eq!(classify_exponent(2.0), DependenceLabel::Unclassified);
        assert_eq!(theoretical_exponent(ProcessKind::Fnbn, 0.5), 1.25);
        assert_eq!(theoretical_exponent(ProcessKind::Fnbn, 1.0), 1.0);
        assert_eq!(theoretical_exponent(ProcessKind::Fnbp, 0.5), 0.5);
        assert_eq!(DependenceLabel::Srd.to_string(), "SRD");
    }

    #[test]
    fn delta_examples() {
        let p = fpp(1.0, 2.0);
        for &(n, m) in &[(1, 1), (2, 10), (3, 7)] {
            assert_relative_eq!(delta_statistic(&p, n, m).unwrap(), 1.0, max_relative = 1e-12);
        }
        assert_relative_eq!(delta_statistic(&fpp(0.5, 1.0), 1, 1).unwrap(), 1.0, max_relative = 1e-14);
        let d = delta_statistic(&fpp(0.5, 1.0), 2, 10).unwrap();
        assert_relative_eq!(d, 1.880_544_802_518_955_3, max_relative = 1e-10);
        let bound = delta_reference_bound(0.5, 2).unwrap();
        assert_relative_eq!(bound, 0.171_572_875_253_809_9, max_relative = 1e-10);
        assert!(delta_statistic(&p, 0, 1).is_err());
    }

    #[test]
    fn nb_pmf_examples() {
        let p = FnbpParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(nb_pmf(&p, 3, 2.0).unwrap(), 0.125, max_relative = 1e-13);
        assert_relative_eq!(nb_pmf(&p, 0, 2.0).unwrap(), 0.25, max_relative = 1e-13);
        // pt = 1: geometric
        assert_relative_eq!(nb_pmf(&p, 4, 1.0).unwrap(), 0.5f64.powi(5), max_relative = 1e-13);
        let total: f64 = (0..400).map(|n| nb_pmf(&p, n, 7.3).unwrap()).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn fnbp_moment_examples() {
        let p = FnbpParams::new(1.0, 1.5, 2.0, 0.5).unwrap();
        assert_relative_eq!(fnbp_mean(&p, 4.0).unwrap(), 1.5 * 2.0 / 2.0, max_relative = 1e-13);
        // β = 1: λpt/α + λ²pt/α²
        let (l, a, pt) = (1.5, 2.0, 2.0);
        assert_relative_eq!(fnbp_variance(&p, 4.0).unwrap(), l * pt / a + l * l * pt / (a * a), max_relative = 1e-12);

        let p = FnbpParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(fnbp_mean(&p, 2.0).unwrap(), 1.5, max_relative = 1e-13);
        let r = fnbp_mean(&p, 1e6).unwrap() / (p.fpp.q() * 1e3);
        assert!((r - 1.0).abs() < 1e-4);
        // the linear term makes the relative gap O(t^(−β))
        let r = fnbp_variance(&p, 1e6).unwrap() / (1e6 * p.d1());
        assert!((r - 1.0).abs() < 2e-3);
        let p = FnbpParams::new(0.7, 1.0, 1.0, 1.0).unwrap();
        let r = fnbp_variance(&p, 1e6).unwrap() / (1e6f64.powf(1.4) * p.d1());
        assert!((r - 1.0).abs() < 1e-3);

        let p = FnbpParams::new(0.5, 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(fnbp_variance(&p, 3.0).unwrap(), 2.568_012_714_724_776_6, max_relative = 1e-12);
    }

    #[test]
    fn fnbp_covariance_examples() {
        let c = cfg();
        let p = FnbpParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(fnbp_covariance(&p, 1.0, 50.0, &c).unwrap(), 2.0, max_relative = 1e-8);
        assert_relative_eq!(fnbp_covariance_limit(&p, 1.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(fnbp_covariance(&p, 3.0, 3.0, &c).unwrap(), fnbp_variance(&p, 3.0).unwrap(), max_relative = 1e-12);
        // continuity toward s = t
        let near = fnbp_covariance(&p, 3.0 - 1e-7, 3.0, &c).unwrap();
        assert_relative_eq!(near, fnbp_variance(&p, 3.0).unwrap(), max_relative = 1e-6);

        let p = FnbpParams::new(0.3, 2.0, 1.5, 0.7).unwrap();
        assert_relative_eq!(fnbp_covariance(&p, 2.0, 5.0, &c).unwrap(), 5.923_673_615_584_345, max_relative = 1e-8);
        let p = FnbpParams::new(0.7, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(fnbp_covariance(&p, 0.5, 7.0, &c).unwrap(), 1.057_728_369_898_870_6, max_relative = 1e-8);
    }

    #[test]
    fn fnbp_covariance_poisson_gamma() {
        // β = 1: Cov[Q(s),Q(t)] = Var[Q(s)] for the negative binomial process
        let c = cfg();
        let p = FnbpParams::new(1.0, 1.2, 0.8, 1.5).unwrap();
        assert_relative_eq!(fnbp_covariance(&p, 1.0, 4.0, &c).unwrap(), fnbp_variance(&p, 1.0).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn gamma_joint_moment_matches_quadrature_identity() {
        let g = GammaParams::new(1.0, 1.0).unwrap();
        let p = FnbpParams { fpp: fpp(0.5, 1.0), gamma: g };
        // at t → s the mixture term tends to B(β,1+β) E[Y^(2β)]
        let j = gamma_joint_moment(&g, 0.5, 2.0, 2.0).unwrap();
        assert_relative_eq!(j, g.moment(1.0, 2.0).unwrap(), max_relative = 1e-14);
        let j = gamma_joint_moment(&g, 0.5, 1.0, 100.0).unwrap();
        let denom = g.moment(0.5, 1.0).unwrap() * g.moment(0.5, 99.0).unwrap();
        assert!((j / denom - 1.007_57).abs() < 1e-4);
        let mix = gamma_inc_beta_moment(&p, 1.0, 100.0, &cfg()).unwrap();
        assert!((0.5 * mix / denom - 1.005_05).abs() < 1e-4);
    }

    #[test]
    fn fnbn_examples() {
        let c = cfg();
        let n = Noise::new(FnbpParams::new(0.5, 1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(fnbn_covariance(&n, 1.0, 100.0, &c).unwrap(), 1.415_790_929_880_829_4e-4, max_relative = 1e-5);
        assert_relative_eq!(fnbn_variance(&n, 1.0, &c).unwrap(), 1.25, max_relative = 1e-9);
        assert_relative_eq!(fnbn_variance(&n, 3.0, &c).unwrap(), 0.839_843_75, max_relative = 1e-9);
        let n2 = Noise::new(FnbpParams::new(0.4, 1.0, 2.0, 1.5).unwrap(), 0.5).unwrap();
        assert_relative_eq!(fnbn_covariance(&n2, 1.0, 20.0, &c).unwrap(), 1.840_467_251_530_896e-4, max_relative = 1e-5);

        let a = fnbn_asymptotics(&n, 1.0, 1e4).unwrap();
        assert_relative_eq!(a.cov.prefactor, 0.141_047, max_relative = 1e-5);
        assert_eq!(a.cov.exponent, -1.5);
        assert_relative_eq!(a.var.prefactor, 1.692_569, max_relative = 1e-5);
        assert_eq!(a.var.exponent, -0.5);
        assert_eq!(a.corr_exponent, 1.25);
        assert_eq!(classify_exponent(a.corr_exponent), DependenceLabel::Srd);

        let n1 = Noise::new(FnbpParams::new(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let a = fnbn_asymptotics(&n1, 1.0, 10.0).unwrap();
        assert_eq!(a.corr_exponent, 1.0);
        assert_eq!(a.cov.value, 0.0);
    }

    #[test]
    fn fnbn_exact_approaches_leading_term() {
        let c = cfg();
        let n = Noise::new(FnbpParams::new(0.5, 1.0, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let t = 1e3;
        let a = fnbn_asymptotics(&n, 1.0, t).unwrap();
        let exact = fnbn_covariance(&n, 1.0, t, &c).unwrap();
        assert!((exact / a.cov.value - 1.0).abs() < 0.05, "{exact} vs {}", a.cov.value);
        let exact = fnbn_variance(&n, t, &c).unwrap();
        assert!((exact / a.var.value - 1.0).abs() < 0.05, "{exact} vs {}", a.var.value);
    }
}
