//! Independent checks for the analytic pipeline: Monte Carlo simulation of
//! the walk's running maximum, and exact dynamic programming over the
//! partial-sum distribution.
//!
//! The generator is PCG64 (XSL-RR 128/64). Shard `k` uses stream `k` with
//! initial state `seed`, so results depend only on `(seed, shards)`.

use rand_core::Rng;
use rand_pcg::Pcg64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::RiskModel;

pub const DEFAULT_SEED: u64 = 0x5EED_2024_0001;

/// Cell budget for [`enumerate_finite`].
pub const LATTICE_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub horizon_t: usize,
    pub seed: u64,
    pub u_values: Vec<i64>,
    pub shards: usize,
}

impl SimConfig {
    pub fn new(n_paths: u64, horizon_t: usize, seed: u64, u_values: Vec<i64>) -> Self {
        Self { n_paths, horizon_t, seed, u_values, shards: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub u_values: Vec<i64>,
    /// Fraction of paths with `max_{1<=n<=T} S_n < u`.
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub paths: u64,
}

/// Inverse-cdf sampler over the step pmf.
struct StepSampler {
    offset: i64,
    cum: Vec<f64>,
}

impl StepSampler {
    fn new(model: &RiskModel) -> Self {
        let step = model.step();
        let mut acc = 0.0;
        let mut cum: Vec<f64> = step.weights().iter().map(|w| { acc += w; acc }).collect();
        let total = acc;
        for c in &mut cum {
            *c /= total;
        }
        Self { offset: step.offset(), cum }
    }

    fn sample(&self, rng: &mut Pcg64) -> i64 {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let idx = self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1);
        self.offset + idx as i64
    }
}

fn run_shard(sampler: &StepSampler, cfg: &SimConfig, shard: usize, paths: u64) -> Vec<u64> {
    let mut rng = Pcg64::new(cfg.seed as u128, shard as u128);
    let stop = cfg.u_values.iter().copied().max().unwrap_or(0);
    let mut survived = vec![0u64; cfg.u_values.len()];
    for _ in 0..paths {
        let mut s = 0i64;
        let mut max = i64::MIN;
        for _ in 0..cfg.horizon_t {
            s += sampler.sample(&mut rng);
            if s > max {
                max = s;
                if max >= stop {
                    break;
                }
            }
        }
        for (count, &u) in survived.iter_mut().zip(&cfg.u_values) {
            if max < u {
                *count += 1;
            }
        }
    }
    survived
}

/// Estimates `phi(u, T)` for every requested `u` from one set of paths.
pub fn simulate(model: &RiskModel, cfg: &SimConfig) -> Result<SimResult> {
    if cfg.n_paths == 0 || cfg.horizon_t == 0 || cfg.shards == 0 {
        return Err(Error::ParameterDomain("paths, horizon and shards must be >= 1".into()));
    }
    let sampler = StepSampler::new(model);
    let shards = cfg.shards as u64;
    let share = |k: u64| cfg.n_paths / shards + u64::from(k < cfg.n_paths % shards);
    let counts: Vec<Vec<u64>> = if cfg.shards == 1 {
        vec![run_shard(&sampler, cfg, 0, cfg.n_paths)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|k| {
                    let sampler = &sampler;
                    scope.spawn(move || run_shard(sampler, cfg, k as usize, share(k)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
        })
    };
    let n = cfg.n_paths as f64;
    let mut estimates = Vec::with_capacity(cfg.u_values.len());
    let mut std_errors = Vec::with_capacity(cfg.u_values.len());
    for j in 0..cfg.u_values.len() {
        let total: u64 = counts.iter().map(|c| c[j]).sum();
        let p = total as f64 / n;
        estimates.push(p);
        std_errors.push((p * (1.0 - p) / n).sqrt());
    }
    Ok(SimResult { u_values: cfg.u_values.clone(), estimates, std_errors, paths: cfg.n_paths })
}

/// Exact `P(max_{1<=n<=T} S_n < u)` by pushing the partial-sum distribution
/// forward and discarding mass that reaches `u`.
pub fn enumerate_finite(model: &RiskModel, u: i64, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::ParameterDomain("horizon T must be >= 1".into()));
    }
    let step = model.step();
    let lo_step = step.min_support();
    // surviving sums lie in [t * lo_step, u - 1]; the origin is not tested
    let lo = (t as i64) * lo_step.min(0);
    let hi = (u - 1).max(0);
    if u <= lo {
        return Ok(0.0);
    }
    let width = (hi - lo + 1) as usize;
    if width.saturating_mul(t) > LATTICE_LIMIT {
        return Err(Error::Resource(format!("lattice {width} x {t} exceeds {LATTICE_LIMIT} cells")));
    }
    let support: Vec<(i64, f64)> = step.iter().filter(|(_, w)| *w > 0.0).collect();
    let mut mass = vec![0.0; width];
    mass[(0 - lo) as usize] = 1.0;
    let mut next = vec![0.0; width];
    for _ in 0..t {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &p) in mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let s = lo + i as i64;
            for &(k, w) in &support {
                let target = s + k;
                if target < u {
                    next[(target - lo) as usize] += p * w;
                }
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    Ok(mass.iter().sum())
}
