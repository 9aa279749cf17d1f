//! Survival probabilities from the initial values.
//!
//! `phi(1..=m)` are partial sums of `pi`, `phi(0)` follows from the
//! recurrence at `u = 0`, and larger `u` come from
//!
//! ```text
//! phi(u) = (phi(u-m) - sum_{i=1}^{u-1} phi(i) f(u-m-i)) / f(-m)
//! ```
//!
//! That recurrence excites the modes `alpha^-u` of the unit-disk roots, so
//! rounding error grows like `(1/min|alpha|)^u / f(-m)`. Past the estimated
//! stability horizon the table is continued from the factored generating
//! function `Xi(s) = R(1) / ((1 - s) R(s))`, whose series is stable because
//! every root of `R` lies outside the unit disk.

use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::initial_values::{outer_factor, reciprocal_series, InitialValues};
use crate::model::{ParametricDist, Pmf, RiskModel};
use crate::pgf::RootSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurvivalKind {
    Ultimate,
    Finite { t: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalTable {
    /// `phi(0), ..., phi(u_max)`
    pub phis: Vec<f64>,
    pub kind: SurvivalKind,
    /// Max recurrence residual (ultimate) or 0 (finite).
    pub residual: f64,
    /// First `u` taken from the factored series instead of the recurrence.
    pub fallback_from: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UltimateOptions {
    /// Continue from the factored series past the stability horizon.
    pub fallback: bool,
    /// Slack on `[0, 1]` bounds and monotonicity.
    pub bound_tol: f64,
    /// Error budget for the recurrence.
    pub recurrence_budget: f64,
}

impl Default for UltimateOptions {
    fn default() -> Self {
        Self { fallback: true, bound_tol: 1e-9, recurrence_budget: 1e-10 }
    }
}

/// Ultimate survival `phi(0..=u_max)`.
pub fn ultimate_survival(
    model: &RiskModel,
    roots: &RootSet,
    init: &InitialValues,
    u_max: usize,
    opts: &UltimateOptions,
) -> Result<SurvivalTable> {
    model.require_net_profit()?;
    let m = model.m();
    if init.pi.len() != m {
        return Err(Error::MalformedModel(format!(
            "{} initial values for m = {m}",
            init.pi.len()
        )));
    }
    let fm = model.f(-(m as i64));
    let len = u_max.max(m) + 1;
    let mut phi = vec![0.0; len];
    let mut acc = Dd::new(0.0);
    for (i, p) in init.extended_pi().iter().enumerate() {
        acc += *p;
        phi[i + 1] = acc.to_f64();
    }
    phi[0] = (1..=m).map(|i| phi[i] * model.f(-(i as i64))).sum();

    let end = if opts.fallback {
        stability_horizon(model, init, opts.recurrence_budget).min(u_max)
    } else {
        u_max
    };
    let max_step = model.max_step();
    for u in (m + 1)..=end {
        let lo = (u as i64 - m as i64 - max_step).max(1) as usize;
        let s: f64 = (lo..u)
            .map(|i| phi[i] * model.f(u as i64 - m as i64 - i as i64))
            .sum();
        phi[u] = (phi[u - m] - s) / fm;
    }

    let mut fallback_from = None;
    let from = end.max(m) + 1;
    if opts.fallback && from <= u_max {
        let tail = factored_survival(model, roots, u_max)?;
        phi[from..=u_max].copy_from_slice(&tail[from..=u_max]);
        fallback_from = Some(from);
    }
    phi.truncate(u_max + 1);
    check_table(&phi, opts.bound_tol)?;
    let residual = recurrence_residual(model, &phi);
    Ok(SurvivalTable { phis: phi, kind: SurvivalKind::Ultimate, residual, fallback_from })
}

/// `phi(0..=u_max)` from `Xi(s) = R(1) / ((1 - s) R(s))`.
pub fn factored_survival(model: &RiskModel, roots: &RootSet, u_max: usize) -> Result<Vec<f64>> {
    let m = model.m();
    let r = outer_factor(model, roots)?;
    let at_one = r.iter().fold(Dd::new(0.0), |acc, c| acc + *c);
    let n = u_max.max(m);
    let y = reciprocal_series(&r, n);
    let mut phi = vec![0.0; n + 1];
    let mut acc = Dd::new(0.0);
    for (k, v) in y.iter().enumerate() {
        acc += *v * at_one;
        phi[k + 1] = acc.to_f64();
    }
    phi[0] = (1..=m).map(|i| phi[i] * model.f(-(i as i64))).sum();
    phi.truncate(u_max + 1);
    Ok(phi)
}

/// Largest `u` the forward recurrence may reach while its estimated error
/// stays within `budget`.
pub fn stability_horizon(model: &RiskModel, init: &InitialValues, budget: f64) -> usize {
    let m = model.m();
    let Some(r) = init.min_root_modulus else {
        return usize::MAX;
    };
    if r >= 1.0 {
        return usize::MAX;
    }
    let fm = model.f(-(m as i64));
    let base = (init.residual + 4.0 * f64::EPSILON) / fm;
    if base >= budget {
        return m;
    }
    let steps = ((budget / base).ln() / (1.0 / r).ln()).floor();
    m + steps.min(1e9) as usize
}

fn check_table(phi: &[f64], tol: f64) -> Result<()> {
    for (u, &v) in phi.iter().enumerate() {
        if !(v >= -tol && v <= 1.0 + tol) {
            return Err(Error::NumericalBlowup { u, value: v, reason: "outside [0, 1]".into() });
        }
        if u > 0 && v < phi[u - 1] - tol {
            return Err(Error::NumericalBlowup {
                u,
                value: v,
                reason: format!("decreases from phi({}) = {}", u - 1, phi[u - 1]),
            });
        }
    }
    Ok(())
}

/// `max_u |phi(u) - sum_{i=1}^{u+m} phi(i) f(u-i)|` over `u <= len - 1 - m`.
pub fn recurrence_residual(model: &RiskModel, phi: &[f64]) -> f64 {
    let m = model.m();
    if phi.len() <= m {
        return 0.0;
    }
    (0..phi.len() - m)
        .map(|u| {
            let s: f64 = (1..=u + m).map(|i| phi[i] * model.f(u as i64 - i as i64)).sum();
            (phi[u] - s).abs()
        })
        .fold(0.0, f64::max)
}

/// Runs the backward finite-time recursion, handing each level's
/// `phi(0..=u_max, t)` to `visit`.
fn finite_levels(
    model: &RiskModel,
    u_max: usize,
    t_max: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    if t_max == 0 {
        return Err(Error::ParameterDomain("horizon T must be >= 1".into()));
    }
    let m = model.m();
    let step = model.step();
    let lo = step.min_support();
    let hi = step.max_support();
    let width = |t: usize| u_max + (t_max - t) * m;
    if width(1).saturating_mul(t_max) > 500_000_000 {
        return Err(Error::Resource(format!("finite-time lattice {} x {t_max}", width(1))));
    }
    // phi(u, 1) = F(u - 1)
    let mut cur: Vec<f64> = (0..=width(1)).map(|u| model.cdf(u as i64 - 1)).collect();
    visit(1, &cur[..=u_max]);
    for t in 2..=t_max {
        let w = width(t);
        let mut next = vec![0.0; w + 1];
        for (u, slot) in next.iter_mut().enumerate() {
            // sum_{k=-m}^{u-1} phi(u-k, t-1) f(k)
            let k_hi = (u as i64 - 1).min(hi);
            *slot = (lo..=k_hi)
                .map(|k| cur[(u as i64 - k) as usize] * step.get(k))
                .sum();
        }
        cur = next;
        visit(t, &cur[..=u_max]);
    }
    Ok(())
}

/// `phi(u, T)` for `u = 0..=u_max`.
pub fn finite_survival(model: &RiskModel, u_max: usize, t: usize) -> Result<SurvivalTable> {
    let mut out = Vec::new();
    finite_levels(model, u_max, t, |level, phis| {
        if level == t {
            out = phis.to_vec();
        }
    })?;
    Ok(SurvivalTable { phis: out, kind: SurvivalKind::Finite { t }, residual: 0.0, fallback_from: None })
}

/// Tables for every horizon `T = 1..=t_max`.
pub fn finite_survival_grid(model: &RiskModel, u_max: usize, t_max: usize) -> Result<Vec<SurvivalTable>> {
    let mut out = Vec::with_capacity(t_max);
    finite_levels(model, u_max, t_max, |t, phis| {
        out.push(SurvivalTable {
            phis: phis.to_vec(),
            kind: SurvivalKind::Finite { t },
            residual: 0.0,
            fallback_from: None,
        })
    })?;
    Ok(out)
}

/// Numerator of `Xi(s)` after clearing `s^m`:
/// `sum_i pi_i sum_{j=0}^{m-i-1} s^(j+i) F(-m+j)`.
fn xi_numerator(model: &RiskModel, init: &InitialValues) -> Vec<Dd> {
    let m = model.m();
    let mut cdf = Vec::with_capacity(m);
    let mut acc = Dd::new(0.0);
    for j in 0..m {
        acc += Dd::new(model.f(j as i64 - m as i64));
        cdf.push(acc);
    }
    let mut num = vec![Dd::new(0.0); m];
    for (i, p) in init.extended_pi().iter().enumerate() {
        for j in 0..(m - i) {
            num[i + j] += *p * cdf[j];
        }
    }
    num
}

/// First `n` Taylor coefficients of `Xi(s) = sum_i phi(i+1) s^i`.
///
/// `Xi = N / P` where both vanish at the unit-disk roots. Expanding that
/// quotient directly excites the modes `alpha^-k` through any rounding left
/// in `N(alpha)`, so the common factor `prod (s - alpha_j)` is cancelled
/// first: `N` reduces to its leading coefficient and `P` to
/// `(s - 1) R(s)`, whose series is stable.
pub fn xi_coeffs(model: &RiskModel, roots: &RootSet, init: &InitialValues, n: usize) -> Result<Vec<f64>> {
    model.require_net_profit()?;
    let num = xi_numerator(model, init);
    let lead = num.last().copied().unwrap_or(Dd::new(0.0));
    let r = outer_factor(model, roots)?;
    // (s - 1) R(s)
    let mut den = vec![Dd::new(0.0); r.len() + 1];
    for (k, c) in r.iter().enumerate() {
        den[k + 1] += *c;
        den[k] -= *c;
    }
    Ok(reciprocal_series(&den, n).into_iter().map(|v| (v * lead).to_f64()).collect())
}

/// `P(X - c*theta <= -m - 1)` for the untruncated interarrival law.
pub fn original_step_tail(claim: &Pmf, interarrival: &ParametricDist, m: i64) -> f64 {
    let mut total = 0.0;
    let mut k = m + 1;
    loop {
        let pk = interarrival.pmf(k);
        total += pk * claim.cdf(k - m - 1);
        if interarrival.upper_tail(k + 1) < 1e-300 || k > m + 100_000 {
            break;
        }
        if let Some(max) = interarrival.support_max() {
            if k >= max {
                break;
            }
        }
        k += 1;
    }
    total
}

/// Bounds on `phi(0) - sum_{i=1}^m phi(i) f(-i)`: the truncated mass
/// `original_tail` above, and `inf_{i>m} phi(i) * original_tail` below
/// (the infimum taken at `phi(m+1)`, or the last entry if shorter).
pub fn truncation_bounds(
    model_truncated: &RiskModel,
    original_tail: f64,
    phis: &SurvivalTable,
) -> (f64, f64) {
    if original_tail == 0.0 || phis.phis.is_empty() {
        return (0.0, original_tail);
    }
    let idx = (model_truncated.m() + 1).min(phis.phis.len() - 1);
    (phis.phis[idx] * original_tail, original_tail)
}
