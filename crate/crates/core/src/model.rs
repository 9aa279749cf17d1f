//! Discrete distributions and the renewal risk model built from them.
//!
//! Every distribution lives on the integer lattice as a dense weight vector
//! with an offset (`weights[k] = P(V = offset + k)`). Infinite-support
//! families are materialized with an explicit `tail_mass` so the truncation
//! error is always visible.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `sum(weights) + tail_mass == 1`.
pub const MASS_TOL: f64 = 1e-12;

/// Interarrival weights at or below this level beyond the last significant
/// point are folded back into it when the model is built.
pub const INTERARRIVAL_DUST: f64 = 1e-14;

/// Default tail budget for materializing infinite families.
pub const DEFAULT_TAIL_EPS: f64 = 1e-15;

/// A finitely supported probability mass function on the integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    offset: i64,
    weights: Vec<f64>,
    tail_mass: f64,
}

impl Pmf {
    /// Builds a pmf, trimming exact zeros from both ends.
    pub fn new(offset: i64, weights: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidPmf(format!("weight[{k}] = {w} is not a probability")));
        }
        if !tail_mass.is_finite() || tail_mass < 0.0 {
            return Err(Error::InvalidPmf(format!("tail mass {tail_mass} is not a probability")));
        }
        let total: f64 = weights.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!("total mass {total} differs from 1")));
        }
        Ok(Self::trimmed(offset, weights, tail_mass))
    }

    /// Point mass at `value`.
    pub fn point(value: i64) -> Self {
        Self { offset: value, weights: vec![1.0], tail_mass: 0.0 }
    }

    fn trimmed(mut offset: i64, mut weights: Vec<f64>, tail_mass: f64) -> Self {
        while weights.last() == Some(&0.0) {
            weights.pop();
        }
        let lead = weights.iter().take_while(|w| **w == 0.0).count();
        if lead > 0 {
            weights.drain(..lead);
            offset += lead as i64;
        }
        Self { offset, weights, tail_mass }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn min_support(&self) -> i64 {
        self.offset
    }

    pub fn max_support(&self) -> i64 {
        self.offset + self.weights.len() as i64 - 1
    }

    /// `P(V = j)`.
    pub fn get(&self, j: i64) -> f64 {
        let k = j - self.offset;
        if k < 0 {
            return 0.0;
        }
        self.weights.get(k as usize).copied().unwrap_or(0.0)
    }

    /// `P(V <= j)`, counting listed weights only.
    pub fn cdf(&self, j: i64) -> f64 {
        let k = j - self.offset;
        if k < 0 {
            return 0.0;
        }
        let end = ((k + 1) as usize).min(self.weights.len());
        self.weights[..end].iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.tail_mass
    }

    /// Mean over the listed support (the tail is not counted).
    pub fn mean(&self) -> f64 {
        self.iter().map(|(j, w)| j as f64 * w).sum()
    }

    /// Iterates `(value, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (self.offset + k as i64, w))
    }

    /// Moves the tail mass onto the largest support point.
    pub fn fold_tail(&self) -> Pmf {
        let mut weights = self.weights.clone();
        if let Some(last) = weights.last_mut() {
            *last += self.tail_mass;
        }
        Self { offset: self.offset, weights, tail_mass: 0.0 }
    }
}

/// Named distribution families accepted for claims and interarrival times.
#[derive(Debug, Clone, PartialEq)]
pub enum ParametricDist {
    /// `P(V = k) = (1 - p)^k p`, k >= 0.
    Geometric { p: f64 },
    Poisson { lambda: f64 },
    Binomial { n: u32, p: f64 },
    Explicit(Pmf),
}

// terms below this fraction of the running sum end a series
const SERIES_REL_EPS: f64 = 1e-40;

impl ParametricDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ParametricDist::Geometric { p } if !(p > 0.0 && p <= 1.0) => {
                Err(Error::ParameterDomain(format!("geometric p = {p} must lie in (0, 1]")))
            }
            ParametricDist::Poisson { lambda } if !(lambda > 0.0 && lambda <= 700.0) => Err(
                Error::ParameterDomain(format!("poisson lambda = {lambda} must lie in (0, 700]")),
            ),
            ParametricDist::Binomial { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(Error::ParameterDomain(format!("binomial p = {p} must lie in [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Largest support point, `None` for infinite support.
    pub fn support_max(&self) -> Option<i64> {
        match self {
            ParametricDist::Geometric { p } if *p == 1.0 => Some(0),
            ParametricDist::Geometric { .. } | ParametricDist::Poisson { .. } => None,
            ParametricDist::Binomial { n, p } => Some(if *p == 0.0 { 0 } else { *n as i64 }),
            ParametricDist::Explicit(pmf) => Some(pmf.max_support()),
        }
    }

    /// `P(V = k)`.
    pub fn pmf(&self, k: i64) -> f64 {
        if k < 0 && !matches!(self, ParametricDist::Explicit(_)) {
            return 0.0;
        }
        match *self {
            ParametricDist::Geometric { p } => (1.0 - p).powi(k as i32) * p,
            ParametricDist::Poisson { lambda } => {
                let mut term = (-lambda).exp();
                for i in 1..=k {
                    term *= lambda / i as f64;
                }
                term
            }
            ParametricDist::Binomial { n, p } => binomial_weights(n, p)
                .get(k as usize)
                .copied()
                .unwrap_or(0.0),
            ParametricDist::Explicit(ref pmf) => pmf.get(k),
        }
    }

    /// Leading weights `P(V = 0), P(V = 1), ...` up to the point where the
    /// remaining terms are negligible, with accurate suffix sums.
    fn series(&self, at_least: usize) -> Vec<f64> {
        match *self {
            ParametricDist::Geometric { p } => {
                let q = 1.0 - p;
                let mut out = Vec::new();
                let mut term = p;
                let mut sum = 0.0;
                while out.len() < at_least || term > SERIES_REL_EPS * sum {
                    out.push(term);
                    sum += term;
                    term *= q;
                    if term == 0.0 {
                        break;
                    }
                }
                out
            }
            ParametricDist::Poisson { lambda } => {
                let mut out = Vec::new();
                let mut term = (-lambda).exp();
                let mut sum = 0.0;
                let mut k = 0usize;
                while out.len() < at_least || (k as f64) <= lambda || term > SERIES_REL_EPS * sum {
                    out.push(term);
                    sum += term;
                    k += 1;
                    term *= lambda / k as f64;
                    if term == 0.0 && k as f64 > lambda {
                        break;
                    }
                }
                out
            }
            ParametricDist::Binomial { n, p } => binomial_weights(n, p),
            ParametricDist::Explicit(ref pmf) => {
                let mut out = vec![0.0; (pmf.max_support().max(0) + 1) as usize];
                for (j, w) in pmf.iter() {
                    if j >= 0 {
                        out[j as usize] = w;
                    }
                }
                out
            }
        }
    }

    /// `P(V >= k)`.
    pub fn upper_tail(&self, k: i64) -> f64 {
        if k <= 0 && !matches!(self, ParametricDist::Explicit(_)) {
            return 1.0;
        }
        match self {
            ParametricDist::Geometric { p } => (1.0 - p).powi(k as i32),
            ParametricDist::Explicit(pmf) => {
                pmf.iter().filter(|(j, _)| *j >= k).map(|(_, w)| w).sum::<f64>() + pmf.tail_mass()
            }
            _ => {
                let terms = self.series(k as usize + 1);
                terms.iter().skip(k as usize).rev().sum()
            }
        }
    }

    /// `E[(V - m)^+] = sum_{i >= 1} i P(V = m + i)`.
    pub fn excess_mean(&self, m: i64) -> f64 {
        match *self {
            ParametricDist::Geometric { p } => (1.0 - p).powi(m as i32 + 1) / p,
            ParametricDist::Explicit(ref pmf) => pmf
                .iter()
                .filter(|(j, _)| *j > m)
                .map(|(j, w)| (j - m) as f64 * w)
                .sum(),
            _ => {
                let terms = self.series(m.max(0) as usize + 2);
                terms
                    .iter()
                    .enumerate()
                    .skip(m.max(0) as usize + 1)
                    .rev()
                    .map(|(k, w)| (k as i64 - m) as f64 * w)
                    .sum()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ParametricDist::Geometric { p } => (1.0 - p) / p,
            ParametricDist::Poisson { lambda } => lambda,
            ParametricDist::Binomial { n, p } => n as f64 * p,
            ParametricDist::Explicit(ref pmf) => pmf.mean(),
        }
    }
}

fn binomial_weights(n: u32, p: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![1.0];
    }
    if p == 1.0 {
        let mut w = vec![0.0; n as usize + 1];
        w[n as usize] = 1.0;
        return w;
    }
    let ratio = p / (1.0 - p);
    let mut w = Vec::with_capacity(n as usize + 1);
    let mut term = (1.0 - p).powi(n as i32);
    for k in 0..=n {
        w.push(term);
        term *= (n - k) as f64 / (k + 1) as f64 * ratio;
    }
    w
}

/// Turns a parametric family into a dense pmf whose discarded upper tail is
/// at most `tail_eps`. Finite families come back exact with zero tail.
pub fn materialize(dist: &ParametricDist, tail_eps: f64) -> Result<Pmf> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
        return Err(Error::ParameterDomain(format!("tail_eps = {tail_eps} must lie in (0, 1e-6]")));
    }
    dist.validate()?;
    match dist {
        ParametricDist::Explicit(pmf) => Ok(pmf.clone()),
        ParametricDist::Binomial { n, p } => Pmf::new(0, binomial_weights(*n, *p), 0.0),
        ParametricDist::Geometric { p } if *p == 1.0 => Ok(Pmf::point(0)),
        _ => {
            let terms = dist.series(1);
            // suffix[k] = P(V >= k) restricted to the generated terms
            let mut suffix = vec![0.0; terms.len() + 1];
            for k in (0..terms.len()).rev() {
                suffix[k] = suffix[k + 1] + terms[k];
            }
            let keep = (0..terms.len())
                .find(|&k| suffix[k + 1] <= tail_eps)
                .unwrap_or(terms.len() - 1);
            Ok(Pmf::trimmed(0, terms[..=keep].to_vec(), suffix[keep + 1]))
        }
    }
}

/// Distribution of `X - c*theta` for independent `X` and `c*theta`.
///
/// `f(j) = sum_k P(X = j + k) P(c*theta = k)`, with support starting at
/// `min X - max c*theta`.
pub fn step_pmf(claim: &Pmf, interarrival: &Pmf) -> Pmf {
    let offset = claim.min_support() - interarrival.max_support();
    let len = claim.weights.len() + interarrival.weights.len() - 1;
    let mut weights = vec![0.0; len];
    for (a, pa) in claim.iter() {
        for (b, pb) in interarrival.iter() {
            weights[(a - b - offset) as usize] += pa * pb;
        }
    }
    let tail = claim.tail_mass + interarrival.tail_mass - claim.tail_mass * interarrival.tail_mass;
    Pmf::trimmed(offset, weights, tail)
}

/// Caps a non-negative distribution at `m`, moving `P(V >= m)` onto `m`.
pub fn truncate(dist: &ParametricDist, m: i64) -> Result<Pmf> {
    if m <= 0 {
        return Err(Error::ParameterDomain(format!("truncation point m = {m} must be >= 1")));
    }
    dist.validate()?;
    if let ParametricDist::Explicit(pmf) = dist {
        if pmf.min_support() < 0 {
            return Err(Error::InvalidPmf("cannot truncate a pmf with negative support".into()));
        }
        if pmf.max_support() <= m && pmf.tail_mass() == 0.0 {
            return Ok(pmf.clone());
        }
    }
    if let Some(max) = dist.support_max() {
        if max <= m && !matches!(dist, ParametricDist::Explicit(_)) {
            return materialize(dist, DEFAULT_TAIL_EPS);
        }
    }
    let mut weights: Vec<f64> = (0..m).map(|k| dist.pmf(k)).collect();
    weights.push(dist.upper_tail(m));
    Ok(Pmf::trimmed(0, weights, 0.0))
}

/// Mean-preserving claim adjustment for a truncated interarrival time.
///
/// Moves `delta = E[(c*theta - m)^+] / l` from value `l` to value 0, so that
/// `E(X_m - c*theta_m) = E(X - c*theta)`.
pub fn rebalance_claim(
    claim: &ParametricDist,
    interarrival: &ParametricDist,
    m: i64,
    l: i64,
    tail_eps: f64,
) -> Result<Pmf> {
    if l <= 0 {
        return Err(Error::ParameterDomain(format!("rebalance value l = {l} must be >= 1")));
    }
    if m <= 0 {
        return Err(Error::ParameterDomain(format!("truncation point m = {m} must be >= 1")));
    }
    interarrival.validate()?;
    let claim = materialize(claim, tail_eps)?;
    if claim.min_support() < 0 {
        return Err(Error::InvalidPmf("claim must be non-negative".into()));
    }
    let excess = interarrival.excess_mean(m);
    let delta = excess / l as f64;
    if delta == 0.0 {
        return Ok(claim);
    }

    let top = claim.max_support().max(l) as usize;
    let mut dense = vec![0.0; top + 1];
    for (j, w) in claim.iter() {
        dense[j as usize] = w;
    }
    let adjusted = dense[l as usize] - delta;
    if adjusted < -MASS_TOL {
        let min_feasible_l = dense
            .iter()
            .enumerate()
            .skip(1)
            .find(|(k, w)| **w * *k as f64 >= excess)
            .map(|(k, _)| k as i64);
        return Err(Error::InfeasibleRebalance { l, delta, min_feasible_l });
    }
    dense[l as usize] = adjusted.max(0.0);
    dense[0] += delta;
    Ok(Pmf::trimmed(0, dense, claim.tail_mass()))
}

/// The discrete renewal risk model: claim `X`, premium-scaled interarrival
/// time `c*theta` with finite support, and the derived step `X - c*theta`.
#[derive(Debug, Clone)]
pub struct RiskModel {
    claim: Pmf,
    interarrival: Pmf,
    step: Pmf,
    step_cdf: Vec<f64>,
    m: usize,
    drift: f64,
}

impl RiskModel {
    /// Builds the model. The claim tail (if any) is folded onto its largest
    /// support point and interarrival dust beyond the last weight above
    /// [`INTERARRIVAL_DUST`] is folded back, so `f(-m) > 0` holds.
    pub fn new(claim: Pmf, interarrival: Pmf) -> Result<Self> {
        if claim.min_support() < 0 {
            return Err(Error::InvalidPmf("claim X must be non-negative".into()));
        }
        if interarrival.min_support() < 0 {
            return Err(Error::InvalidPmf("interarrival c*theta must be non-negative".into()));
        }
        if interarrival.tail_mass() > 0.0 {
            return Err(Error::ModelDegenerate(
                "interarrival has infinite support; truncate it first".into(),
            ));
        }
        let claim = claim.fold_tail();
        let interarrival = trim_dust(interarrival);
        let step = step_pmf(&claim, &interarrival);
        let m = (-step.min_support()).max(0) as usize;
        let mut acc = 0.0;
        let step_cdf = step
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let drift = step.mean();
        Ok(Self { claim, interarrival, step, step_cdf, m, drift })
    }

    pub fn claim(&self) -> &Pmf {
        &self.claim
    }

    pub fn interarrival(&self) -> &Pmf {
        &self.interarrival
    }

    pub fn step(&self) -> &Pmf {
        &self.step
    }

    /// Depth of the largest downward step: `P(X - c*theta >= -m) = 1` and
    /// `f(-m) > 0`. Equals the interarrival bound when `P(X = 0) > 0`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest support point of `c*theta`.
    pub fn interarrival_bound(&self) -> i64 {
        self.interarrival.max_support()
    }

    /// `E(X - c*theta)`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// `c E(theta) - E(X)`, positive under the net profit condition.
    pub fn drift_pos(&self) -> f64 {
        -self.drift
    }

    /// `f(j) = P(X - c*theta = j)`.
    pub fn f(&self, j: i64) -> f64 {
        self.step.get(j)
    }

    /// `F(j) = P(X - c*theta <= j)`.
    pub fn cdf(&self, j: i64) -> f64 {
        let k = j - self.step.offset;
        if k < 0 {
            0.0
        } else if k as usize >= self.step_cdf.len() {
            *self.step_cdf.last().unwrap()
        } else {
            self.step_cdf[k as usize]
        }
    }

    /// Largest step value with positive mass.
    pub fn max_step(&self) -> i64 {
        self.step.max_support()
    }

    pub fn require_net_profit(&self) -> Result<()> {
        if self.drift < 0.0 && self.m >= 1 {
            Ok(())
        } else {
            Err(Error::NetProfit { drift: self.drift })
        }
    }
}

fn trim_dust(pmf: Pmf) -> Pmf {
    let Some(last) = pmf.weights.iter().rposition(|w| *w > INTERARRIVAL_DUST) else {
        return pmf;
    };
    if last + 1 == pmf.weights.len() {
        return pmf;
    }
    let dust: f64 = pmf.weights[last + 1..].iter().sum();
    let mut weights = pmf.weights[..=last].to_vec();
    weights[last] += dust;
    Pmf::trimmed(pmf.offset, weights, pmf.tail_mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(offset: i64, w: &[f64]) -> Pmf {
        Pmf::new(offset, w.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn explicit_materializes_to_itself() {
        let p = pmf(0, &[0.5, 0.5]);
        let out = materialize(&ParametricDist::Explicit(p.clone()), 1e-12).unwrap();
        assert_eq!(out, p);
        assert_eq!(out.tail_mass(), 0.0);
    }

    #[test]
    fn geometric_half_keeps_forty_terms() {
        let out = materialize(&ParametricDist::Geometric { p: 0.5 }, 1e-12).unwrap();
        assert_eq!(out.weights().len(), 40);
        for (k, w) in out.weights().iter().enumerate() {
            assert_eq!(*w, 0.5f64.powi(k as i32 + 1));
        }
        assert!(out.tail_mass() <= 1e-12);
        assert!((out.tail_mass() / 2f64.powi(-40) - 1.0).abs() < 1e-12, "{}", out.tail_mass());
    }

    #[test]
    fn poisson_materialize_first_weight_and_mass() {
        let out = materialize(&ParametricDist::Poisson { lambda: 1.01 }, 1e-15).unwrap();
        assert!((out.weights()[0] - (-1.01f64).exp()).abs() < 1e-16);
        assert!((out.weights()[0] - 0.36422).abs() < 1e-5);
        assert!(out.tail_mass() <= 1e-15);
        // independent oracle: factorial-form terms summed directly
        let mut fact = 1.0;
        let mut direct = 0.0;
        for k in 0..out.weights().len() {
            if k > 0 {
                fact *= k as f64;
            }
            direct += (-1.01f64).exp() * 1.01f64.powi(k as i32) / fact;
        }
        assert!(direct >= 1.0 - 1e-15 - 1e-16);
    }

    #[test]
    fn materialize_rejects_bad_eps_and_params() {
        assert!(materialize(&ParametricDist::Poisson { lambda: 1.0 }, 0.0).is_err());
        assert!(materialize(&ParametricDist::Poisson { lambda: 1.0 }, 1e-3).is_err());
        assert!(matches!(
            materialize(&ParametricDist::Geometric { p: 0.0 }, 1e-12),
            Err(Error::ParameterDomain(_))
        ));
        assert!(materialize(&ParametricDist::Poisson { lambda: -1.0 }, 1e-12).is_err());
        assert!(materialize(&ParametricDist::Binomial { n: 3, p: 1.5 }, 1e-12).is_err());
    }

    #[test]
    fn binomial_is_exact() {
        let out = materialize(&ParametricDist::Binomial { n: 4, p: 0.5 }, 1e-12).unwrap();
        assert_eq!(out.weights(), &[1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0]);
        assert_eq!(out.tail_mass(), 0.0);
    }

    #[test]
    fn pmf_trims_and_validates() {
        let p = Pmf::new(0, vec![0.0, 0.5, 0.5, 0.0], 0.0).unwrap();
        assert_eq!(p.offset(), 1);
        assert_eq!(p.weights(), &[0.5, 0.5]);
        assert!(Pmf::new(0, vec![0.5, 0.6], 0.0).is_err());
        assert!(Pmf::new(0, vec![-0.1, 1.1], 0.0).is_err());
        assert!(Pmf::new(0, vec![f64::NAN, 1.0], 0.0).is_err());
    }

    #[test]
    fn step_of_point_masses() {
        let s = step_pmf(&Pmf::point(0), &Pmf::point(1));
        assert_eq!(s.offset(), -1);
        assert_eq!(s.weights(), &[1.0]);
    }

    #[test]
    fn step_of_example_one() {
        let s = step_pmf(&pmf(0, &[0.5, 0.5]), &pmf(0, &[0.5, 0.0, 0.5]));
        assert_eq!(s.offset(), -2);
        assert_eq!(s.weights(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn step_of_example_two_lowest_point() {
        let claim = materialize(&ParametricDist::Geometric { p: 0.5 }, 1e-15).unwrap();
        let inter = materialize(&ParametricDist::Binomial { n: 4, p: 0.5 }, 1e-15).unwrap();
        let s = step_pmf(&claim, &inter);
        assert_eq!(s.offset(), -4);
        assert_eq!(s.get(-4), 1.0 / 32.0);
    }

    #[test]
    fn truncate_poisson_puts_tail_at_m() {
        let d = ParametricDist::Poisson { lambda: 1.01 };
        let t = truncate(&d, 10).unwrap();
        assert_eq!(t.max_support(), 10);
        // oracle: 1 - sum of the first ten terms, via factorial form
        let mut fact = 1.0;
        let mut head = 0.0;
        for k in 0..10 {
            if k > 0 {
                fact *= k as f64;
            }
            head += (-1.01f64).exp() * 1.01f64.powi(k) / fact;
        }
        assert!((t.get(10) - (1.0 - head)).abs() < 1e-15);
        for k in 0..10 {
            assert!((t.get(k) - d.pmf(k)).abs() < 1e-18);
        }
        assert_eq!(t.tail_mass(), 0.0);
    }

    #[test]
    fn truncate_finite_below_m_is_identity() {
        let p = pmf(0, &[0.25, 0.5, 0.25]);
        assert_eq!(truncate(&ParametricDist::Explicit(p.clone()), 5).unwrap(), p);
        assert!(truncate(&ParametricDist::Explicit(p), 0).is_err());
    }

    #[test]
    fn truncated_poisson_drift_m15() {
        let claim = materialize(&ParametricDist::Poisson { lambda: 1.0 }, 1e-15).unwrap();
        let inter = truncate(&ParametricDist::Poisson { lambda: 1.01 }, 15).unwrap();
        let model = RiskModel::new(claim, inter).unwrap();
        assert!((model.drift() - (-0.00999999999998)).abs() < 5e-15, "{}", model.drift());
    }

    #[test]
    fn rebalance_no_excess_is_identity() {
        let claim = pmf(0, &[0.5, 0.5]);
        let inter = ParametricDist::Explicit(pmf(0, &[0.5, 0.0, 0.5]));
        let out = rebalance_claim(&ParametricDist::Explicit(claim.clone()), &inter, 2, 1, 1e-15)
            .unwrap();
        assert_eq!(out, claim);
    }

    #[test]
    fn rebalance_preserves_drift_poisson() {
        let claim = ParametricDist::Poisson { lambda: 1.0 };
        let inter = ParametricDist::Poisson { lambda: 1.01 };
        let xm = rebalance_claim(&claim, &inter, 10, 1, 1e-15).unwrap();
        let model = RiskModel::new(xm, truncate(&inter, 10).unwrap()).unwrap();
        assert!((model.drift() + 0.01).abs() < 1e-10, "{}", model.drift());
    }

    #[test]
    fn rebalance_preserves_drift_geometric() {
        let claim = ParametricDist::Geometric { p: 0.5 };
        let inter = ParametricDist::Poisson { lambda: 1.01 };
        let xm = rebalance_claim(&claim, &inter, 10, 2, 1e-15).unwrap();
        let model = RiskModel::new(xm, truncate(&inter, 10).unwrap()).unwrap();
        assert!((model.drift() - (1.0 - 1.01)).abs() < 1e-10, "{}", model.drift());
    }

    #[test]
    fn rebalance_infeasible_names_min_l() {
        // P(X=1) = 0.01 cannot absorb E[(c*theta - 1)^+] = 0.5 at l = 1
        let claim = ParametricDist::Explicit(pmf(0, &[0.49, 0.01, 0.5]));
        let inter = ParametricDist::Explicit(pmf(0, &[0.5, 0.0, 0.5]));
        match rebalance_claim(&claim, &inter, 1, 1, 1e-15) {
            Err(Error::InfeasibleRebalance { min_feasible_l, .. }) => {
                assert_eq!(min_feasible_l, Some(2))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(rebalance_claim(&claim, &inter, 1, 0, 1e-15).is_err());
    }

    #[test]
    fn dust_is_folded_back() {
        let inter = Pmf::new(0, vec![0.5, 0.5 - 1e-16, 1e-16], 0.0).unwrap();
        let model = RiskModel::new(Pmf::point(0), inter).unwrap();
        assert_eq!(model.m(), 1);
        assert_eq!(model.interarrival_bound(), 1);
    }

    #[test]
    fn shifted_claim_reduces_depth() {
        let model = RiskModel::new(pmf(1, &[0.5, 0.5]), pmf(3, &[1.0])).unwrap();
        assert_eq!(model.m(), 2);
        assert_eq!(model.interarrival_bound(), 3);
        assert!(model.f(-2) > 0.0);
    }

    #[test]
    fn net_profit_check() {
        let model = RiskModel::new(Pmf::point(1), Pmf::point(1)).unwrap();
        assert!(matches!(model.require_net_profit(), Err(Error::NetProfit { .. })));
    }

    #[test]
    fn excess_mean_matches_direct_sum() {
        let d = ParametricDist::Poisson { lambda: 1.01 };
        let direct: f64 = (11..60).map(|k| (k - 10) as f64 * d.pmf(k)).sum();
        assert!((d.excess_mean(10) / direct - 1.0).abs() < 1e-12, "{} {direct}", d.excess_mean(10));
        let g = ParametricDist::Geometric { p: 0.3 };
        let direct: f64 = (4..400).map(|k| (k - 3) as f64 * g.pmf(k)).sum();
        assert!((g.excess_mean(3) - direct).abs() < 1e-12);
    }
}
