//! Dense polynomials with coefficients in ascending order (`c[k]` multiplies
//! `s^k`) and a simultaneous root finder.

use num_complex::Complex64;

/// Horner evaluation of a real polynomial at a complex point.
pub fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Horner evaluation of a complex polynomial.
pub fn eval_complex(coeffs: &[Complex64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Coefficients of the `order`-th derivative.
pub fn derivative(coeffs: &[f64], order: usize) -> Vec<f64> {
    if order >= coeffs.len() {
        return vec![0.0];
    }
    (order..coeffs.len())
        .map(|k| coeffs[k] * falling_factorial(k, order))
        .collect()
}

/// `k (k-1) ... (k-n+1)`, zero when `n > k`.
pub fn falling_factorial(k: usize, n: usize) -> f64 {
    if n > k {
        return 0.0;
    }
    ((k - n + 1)..=k).fold(1.0, |acc, v| acc * v as f64)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Outcome of [`aberth`].
#[derive(Debug, Clone)]
pub struct AberthRoots {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_ITERATIONS: usize = 1000;

/// All roots of a real polynomial by the Aberth-Ehrlich iteration.
///
/// Starting points are spread on circles whose radii come from the upper
/// convex hull of `(k, log|c_k|)` (the Newton polygon), which keeps the
/// iteration well behaved when the coefficients span many orders of
/// magnitude. A root stops moving once `|p(z)|` is below the rounding-error
/// bound of its Horner evaluation. Points outside the unit circle are
/// evaluated through the reversed polynomial to avoid overflow.
pub fn aberth(coeffs: &[f64]) -> AberthRoots {
    let top = match coeffs.iter().rposition(|c| *c != 0.0) {
        Some(t) => t,
        None => return AberthRoots { roots: Vec::new(), iterations: 0, converged: true },
    };
    let zeros = coeffs.iter().take_while(|c| **c == 0.0).count();
    let p: Vec<f64> = coeffs[zeros..=top].to_vec();
    let degree = p.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if degree == 0 {
        return AberthRoots { roots, iterations: 0, converged: true };
    }

    let abs_p: Vec<f64> = p.iter().map(|c| c.abs()).collect();
    let rev: Vec<f64> = p.iter().rev().copied().collect();
    let abs_rev: Vec<f64> = abs_p.iter().rev().copied().collect();

    let mut z = initial_guesses(&p);
    let mut done = vec![false; degree];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let (ratio, small) = if zi.norm() <= 1.0 {
                let (v, d, bound) = horner_with_bound(&p, &abs_p, zi);
                (v / d, v.norm() <= bound)
            } else {
                // p(z) = z^n q(1/z), p'(z) = z^(n-1) (n q(y) - y q'(y))
                let y = zi.inv();
                let (q, dq, bound) = horner_with_bound(&rev, &abs_rev, y);
                (zi * q / (q * degree as f64 - y * dq), q.norm() <= bound)
            };
            if small {
                done[i] = true;
                continue;
            }
            if !ratio.is_finite() {
                continue;
            }
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| (zi - z[j]).inv())
                .filter(|v| v.is_finite())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            let step = if step.is_finite() { step } else { ratio };
            z[i] = zi - step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
    }
    let converged = done.iter().all(|d| *d);
    roots.extend(z);
    AberthRoots { roots, iterations, converged }
}

/// Value, derivative and a running rounding-error bound for Horner's rule.
fn horner_with_bound(p: &[f64], abs_p: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let r = z.norm();
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    for (c, a) in p.iter().zip(abs_p).rev() {
        d = d * z + v;
        v = v * z + c;
        e = e * r + a;
    }
    (v, d, 4.0 * f64::EPSILON * e)
}

fn initial_guesses(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    // upper convex hull of (k, log|c_k|) over nonzero coefficients
    let pts: Vec<(usize, f64)> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, c.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as f64 - x1 as f64) * (pt.1 - y1) - (y2 - y1) * (pt.0 as f64 - x1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let count = k2 - k1;
        let radius = ((y1 - y2) / count as f64).exp();
        for j in 0..count {
            let angle = std::f64::consts::TAU * j as f64 / count as f64
                + std::f64::consts::TAU * k1 as f64 / n as f64
                + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}
