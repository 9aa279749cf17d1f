//! Generating functions of the step distribution and the roots of
//! `G_{X-c*theta}(s) = 1` inside the closed unit disk.
//!
//! Root finding runs on the polynomial `P(s) = s^m (G_{X-c*theta}(s) - 1)`,
//! which has exactly `m - 1` roots (with multiplicity) in `|s| <= 1` other
//! than `s = 1` whenever `f(-m) > 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{self, Cdd, Dd};
use crate::error::{Error, Result};
use crate::model::{Pmf, RiskModel};
use crate::poly;

/// `G(s) = sum_k P(V = k) s^k` for a finitely supported pmf.
pub fn pgf_eval(p: &Pmf, s: Complex64) -> Result<Complex64> {
    if p.offset() < 0 && s.norm() == 0.0 {
        return Err(Error::Singularity);
    }
    let body = poly::eval(p.weights(), s);
    Ok(body * s.powi(p.offset() as i32))
}

/// `P(s) = s^m (G_{X-c*theta}(s) - 1)` as an ordinary polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPoly {
    pub coeffs: Vec<f64>,
    pub m: usize,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.coeffs, s)
    }

    pub fn derivative(&self, order: usize) -> Vec<f64> {
        poly::derivative(&self.coeffs, order)
    }

    /// Coefficients in double-double, with the `-1` at `s^m` applied
    /// exactly rather than rounded into `f(0) - 1`.
    pub fn extended(&self, model: &RiskModel) -> Vec<Dd> {
        let mut out: Vec<Dd> = self.coeffs.iter().map(|c| Dd::new(*c)).collect();
        out[self.m] = Dd::new(model.f(0)) - Dd::new(1.0);
        out
    }
}

fn derivative_dd(coeffs: &[Dd], order: usize) -> Vec<Dd> {
    if order >= coeffs.len() {
        return vec![Dd::new(0.0)];
    }
    (order..coeffs.len())
        .map(|k| coeffs[k] * Dd::new(poly::falling_factorial(k, order)))
        .collect()
}

/// Builds `P(s)`. Its coefficients are `c_k = f(k - m)` with `1` subtracted
/// at `s^m`, i.e. `G_X(s) * sum_k P(c*theta = k) s^(m-k) - s^m` divided by
/// the common power `s^(min X)`.
pub fn char_poly(model: &RiskModel) -> Result<CharPoly> {
    let m = model.m();
    if m == 0 || model.f(-(m as i64)) <= 0.0 {
        return Err(Error::ModelDegenerate(format!(
            "step distribution has no mass at -m (m = {m})"
        )));
    }
    let step = model.step();
    let degree = (step.max_support() + m as i64).max(m as i64) as usize;
    let mut coeffs = vec![0.0; degree + 1];
    for (j, w) in step.iter() {
        coeffs[(j + m as i64) as usize] += w;
    }
    coeffs[m] -= 1.0;
    Ok(CharPoly { coeffs, m })
}

/// Tolerances used by [`unit_disk_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootConfig {
    /// Roots closer than this are merged into one multiple root.
    pub cluster_tol: f64,
    /// Roots within this distance of `s = 1` are the trivial root.
    pub unit_exclusion: f64,
    /// Slack on `|s| <= 1`.
    pub boundary_tol: f64,
    /// Bound on `|G_{X-c*theta}(root) - 1|`.
    pub residual_tol: f64,
    /// Largest move allowed to the Newton polish.
    pub max_polish_move: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-6,
            unit_exclusion: 1e-7,
            boundary_tol: 1e-9,
            residual_tol: 1e-8,
            max_polish_move: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|G_{X-c*theta}(value) - 1|`
    pub residual: f64,
    /// What rounding `value` to `f64` dropped.
    #[serde(skip)]
    pub tail: Complex64,
}

impl Root {
    pub fn new(value: Complex64, multiplicity: usize) -> Self {
        Self { value, multiplicity, residual: 0.0, tail: Complex64::new(0.0, 0.0) }
    }

    pub fn extended(&self) -> Cdd {
        dd::cdd_split(self.value, self.tail)
    }
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// The `m - 1` non-trivial roots in the closed unit disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub m: usize,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.roots.iter().all(|r| r.multiplicity == 1)
    }

    /// Root values repeated by multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }

    pub fn extended_values(&self) -> Vec<Cdd> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.extended(), r.multiplicity))
            .collect()
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.roots.iter().map(|r| r.value.norm()).reduce(f64::min)
    }
}

/// Finds the roots of `G_{X-c*theta}(s) = 1` with `|s| <= 1`, `s != 1`.
pub fn unit_disk_roots(model: &RiskModel, cfg: &RootConfig) -> Result<RootSet> {
    model.require_net_profit()?;
    let cp = char_poly(model)?;
    let m = cp.m;
    let found = poly::aberth(&cp.coeffs);

    let clusters = cluster(&found.roots, cfg.cluster_tol);
    let mut inside = Vec::new();
    for members in clusters {
        let center = members.iter().sum::<Complex64>() / members.len() as f64;
        if center.norm() > 1.0 + cfg.boundary_tol || (center - 1.0).norm() <= cfg.unit_exclusion {
            continue;
        }
        let value = refine(&cp, center, members.len(), cfg)?;
        inside.push((value, members.len()));
    }

    let total: usize = inside.iter().map(|(_, r)| r).sum();
    if total != m - 1 {
        let mut all: Vec<(Complex64, f64)> = found.roots.iter().map(|z| (*z, z.norm())).collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1));
        return Err(Error::RootCount { expected: m - 1, found: total, all });
    }

    let inside = conjugate_close(inside, cfg.cluster_tol)?;
    let ext = cp.extended(model);
    let mut roots = Vec::with_capacity(inside.len());
    for (start, multiplicity) in inside {
        let z = polish_extended(&ext, start, multiplicity);
        let (value, tail) = (dd::to_c64(z), dd::tail_of(z));
        let residual = (pgf_eval(model.step(), value)? - 1.0).norm();
        if !(residual <= cfg.residual_tol) {
            return Err(Error::RootQuality(format!(
                "|G(s) - 1| = {residual:.3e} at s = {value}"
            )));
        }
        roots.push(Root { value, multiplicity, residual, tail });
    }
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(RootSet { roots, m })
}

/// Single-linkage clustering under `tol`.
fn cluster(points: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(points[i]);
    }
    groups
}

/// Newton polish on `P^(r-1)`, where the root of multiplicity `r` is simple,
/// then confirmation that the lower derivatives vanish there.
fn refine(cp: &CharPoly, start: Complex64, r: usize, cfg: &RootConfig) -> Result<Complex64> {
    let target = cp.derivative(r - 1);
    let slope = cp.derivative(r);
    let mut z = start;
    let steps = if r == 1 { 1 } else { 3 };
    for _ in 0..steps {
        let d = poly::eval(&slope, z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - poly::eval(&target, z) / d;
        if !next.is_finite() {
            break;
        }
        z = next;
    }
    if (z - start).norm() > cfg.max_polish_move {
        return Err(Error::RootQuality(format!(
            "Newton polish moved root {start} by {:.3e}",
            (z - start).norm()
        )));
    }
    if r > 1 {
        let top = poly::eval(&cp.derivative(r), z).norm();
        for k in 1..r {
            let lower = poly::eval(&cp.derivative(k), z).norm();
            if lower > cfg.cluster_tol.powi((r - k) as i32) * top.max(f64::MIN_POSITIVE) {
                return Err(Error::RootQuality(format!(
                    "cluster of {r} roots at {z} is not a root of multiplicity {r}: \
                     |P^({k})| = {lower:.3e}, |P^({r})| = {top:.3e}"
                )));
            }
        }
    }
    Ok(z)
}

/// Newton steps in double-double on `P^(r-1)`. Conjugate starts give
/// exactly conjugate results and real starts stay real.
fn polish_extended(coeffs: &[Dd], start: Complex64, r: usize) -> Cdd {
    let target = derivative_dd(coeffs, r - 1);
    let slope = derivative_dd(coeffs, r);
    let mut z = dd::cdd(start);
    for _ in 0..3 {
        let d = dd::horner(&slope, z);
        if dd::mag(d) == 0.0 {
            break;
        }
        let next = z - dd::horner(&target, z) / d;
        if !dd::to_c64(next).is_finite() || dd::mag(next - z) > 1e-10 * dd::mag(z).max(1e-300) {
            break;
        }
        z = next;
    }
    z
}

/// Snaps near-real roots onto the real axis and averages conjugate partners.
fn conjugate_close(
    roots: Vec<(Complex64, usize)>,
    tol: f64,
) -> Result<Vec<(Complex64, usize)>> {
    let mut out = Vec::with_capacity(roots.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (z, r) in roots {
        if z.im.abs() <= tol {
            out.push((Complex64::new(z.re, 0.0), r));
        } else if z.im > 0.0 {
            upper.push((z, r));
        } else {
            lower.push((z, r));
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::RootQuality("complex roots are not closed under conjugation".into()));
    }
    for (z, r) in upper {
        let (idx, _) = lower
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (i, (z - w.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::RootQuality("unpaired complex root".into()))?;
        let (w, rw) = lower.swap_remove(idx);
        if rw != r || (z - w.conj()).norm() > tol {
            return Err(Error::RootQuality(format!("root {z} has no conjugate partner (closest {w})")));
        }
        let avg = (z + w.conj()) / 2.0;
        out.push((avg, r));
        out.push((avg.conj(), r));
    }
    Ok(out)
}
