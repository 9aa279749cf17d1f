#![allow(dead_code)]

use ruinwalk::initial_values::{self, InitialValues};
use ruinwalk::model::{materialize, truncate, ParametricDist, Pmf, RiskModel, DEFAULT_TAIL_EPS};
use ruinwalk::pgf::{unit_disk_roots, RootConfig, RootSet};

pub fn pmf(offset: i64, w: &[f64]) -> Pmf {
    Pmf::new(offset, w.to_vec(), 0.0).unwrap()
}

/// Claims 0/1 with equal odds, premium-scaled interarrival 0/2.
pub fn example_one() -> RiskModel {
    RiskModel::new(pmf(0, &[0.5, 0.5]), pmf(0, &[0.5, 0.0, 0.5])).unwrap()
}

/// Geometric(1/2) claims, binomial(4, 1/2) interarrival.
pub fn example_two() -> RiskModel {
    let claim = materialize(&ParametricDist::Geometric { p: 0.5 }, DEFAULT_TAIL_EPS).unwrap();
    let inter = materialize(&ParametricDist::Binomial { n: 4, p: 0.5 }, DEFAULT_TAIL_EPS).unwrap();
    RiskModel::new(claim, inter).unwrap()
}

/// Two-point claim tuned so the characteristic polynomial has a double root.
pub fn example_three(p: f64) -> RiskModel {
    let x0 = (-1.0 + p + (1.0 - p).sqrt()) / (2.0 * p);
    RiskModel::new(pmf(0, &[x0, 1.0 - x0]), pmf(1, &[p, 0.0, 1.0 - p])).unwrap()
}

pub fn example_three_root(p: f64) -> f64 {
    -(1.0 - p) / (1.0 - p + (1.0 - p).sqrt())
}

/// Poisson(1) claims, Poisson(1.01) interarrival capped at `m`.
pub fn example_four(m: i64) -> RiskModel {
    let claim = materialize(&ParametricDist::Poisson { lambda: 1.0 }, DEFAULT_TAIL_EPS).unwrap();
    let inter = truncate(&ParametricDist::Poisson { lambda: 1.01 }, m).unwrap();
    RiskModel::new(claim, inter).unwrap()
}

pub fn solve(model: &RiskModel) -> (RootSet, InitialValues) {
    let roots = unit_disk_roots(model, &RootConfig::default()).unwrap();
    let init = initial_values::solve(model, &roots).unwrap();
    (roots, init)
}

/// Small deterministic generator for randomized model suites.
pub struct Gen(rand_pcg::Pcg64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(rand_pcg::Pcg64::new(seed as u128, 0x0a02_bdbf_7bb3_c0a7))
    }

    pub fn uniform(&mut self) -> f64 {
        use rand_core::Rng;
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }

    /// Weights on `0..=len-1` with the listed indices forced positive and
    /// the others zero with probability `sparsity`.
    pub fn weights(&mut self, len: usize, keep: &[usize], sparsity: f64) -> Vec<f64> {
        let mut w: Vec<f64> = (0..len)
            .map(|k| {
                if keep.contains(&k) || self.uniform() >= sparsity {
                    0.05 + self.uniform()
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    }
}

/// Model with interarrival bound exactly `m`, `P(X = 0) > 0` and drift at
/// most `-0.05`. Retries until the drift condition holds.
pub fn random_model(g: &mut Gen, m: usize, claim_len: usize, sparsity: f64) -> RiskModel {
    loop {
        let inter = g.weights(m + 1, &[m], sparsity);
        let claim = g.weights(claim_len, &[0], sparsity);
        let model = RiskModel::new(pmf(0, &claim), pmf(0, &inter)).unwrap();
        if model.drift() <= -0.05 {
            return model;
        }
    }
}

/// Like [`random_model`], but only models whose unit-disk roots are all
/// simple and at least `sep` apart.
pub fn random_simple_model(g: &mut Gen, m: usize, claim_len: usize, sep: f64) -> (RiskModel, RootSet) {
    loop {
        let model = random_model(g, m, claim_len, 0.0);
        let Ok(roots) = unit_disk_roots(&model, &RootConfig::default()) else { continue };
        let v = roots.values();
        let separated = v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).norm() > sep));
        if roots.all_simple() && separated {
            return (model, roots);
        }
    }
}
