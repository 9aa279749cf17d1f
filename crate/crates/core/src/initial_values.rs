//! Initial values `pi_i = P(M = i)`, `i < m`, of the maximum of the walk.
//!
//! Each root `alpha` of `G_{X-c*theta}(s) = 1` in the unit disk gives the
//! linear condition
//!
//! ```text
//! sum_i pi_i sum_{j=0}^{m-i-1} alpha^(j+i) F(-m+j) = 0
//! ```
//!
//! (plus derivative conditions for repeated roots), and the mean condition
//! `sum_i pi_i sum_{j>i} (j-i) f(-j) = c E(theta) - E(X)` closes the system.
//!
//! Three routes are provided. The pivoted linear solve handles every case.
//! The closed form through elementary symmetric polynomials needs simple
//! roots. The factored route divides the unit-disk roots and `s = 1` out of
//! `P(s)`, leaving `R(s)` with all roots outside the disk, and reads
//! `pi_k = R(1) [s^k] 1/R(s)`.
//!
//! The first two recover `pi` by undoing a convolution with `F(-m + .)`,
//! which amplifies errors in the roots roughly by `1/f(-m)`. All three
//! therefore run in double-double arithmetic on roots polished to the same
//! precision.

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::Serialize;

use crate::dd::{self, Cdd, Dd};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::RiskModel;
use crate::pgf::{char_poly, RootSet};
use crate::poly::falling_factorial;

/// Pivot threshold on the equilibrated system.
pub const PIVOT_TOL: f64 = 1e-13;
/// Largest imaginary part tolerated before a `pi_i` is declared non-real.
pub const IMAG_TOL: f64 = 1e-9;
/// Largest disagreement between the linear and factored routes before
/// [`solve`] prefers the factored one.
pub const ROUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RowKind {
    /// `order`-th derivative of the root condition at `alpha = (re, im)`.
    Root { alpha: (f64, f64), order: usize },
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Linear,
    ClosedForm,
    Factored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSystem {
    pub matrix: Matrix,
    pub rhs: Vec<Complex64>,
    pub row_kinds: Vec<RowKind>,
    /// The same matrix in double-double; empty for systems built by hand.
    pub extended: Vec<Vec<Cdd>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialValues {
    pub pi: Vec<f64>,
    /// `c E(theta) - E(X)`
    pub drift_pos: f64,
    /// `max |A pi - B|`
    pub residual: f64,
    /// Largest imaginary part stripped from the solution.
    pub max_imag: f64,
    /// Smallest root modulus; controls error growth of the forward recurrence.
    pub min_root_modulus: Option<f64>,
    pub route: Route,
    /// `max_i |pi_i(linear) - pi_i(factored)|` when [`solve`] compared them.
    pub route_gap: Option<f64>,
    /// Low parts of `pi` in double-double, when the route produced them.
    #[serde(skip)]
    pub pi_tail: Vec<f64>,
}

impl InitialValues {
    pub fn extended_pi(&self) -> Vec<Dd> {
        self.pi
            .iter()
            .enumerate()
            .map(|(i, p)| Dd::new(*p) + Dd::new(self.pi_tail.get(i).copied().unwrap_or(0.0)))
            .collect()
    }
}

fn check_roots(model: &RiskModel, roots: &RootSet) -> Result<usize> {
    model.require_net_profit()?;
    let m = model.m();
    if roots.m != m || roots.total_multiplicity() != m - 1 {
        return Err(Error::MalformedModel(format!(
            "root set (m = {}, {} roots) does not match model (m = {m})",
            roots.m,
            roots.total_multiplicity()
        )));
    }
    Ok(m)
}

/// `F(-m + j)` for `j = 0..=m`, summed in double-double.
fn lower_cdf(model: &RiskModel, m: usize) -> Vec<Dd> {
    let mut acc = Dd::new(0.0);
    (0..=m)
        .map(|j| {
            acc += Dd::new(model.f(j as i64 - m as i64));
            acc
        })
        .collect()
}

fn real(v: Dd) -> Cdd {
    Complex::new(v, Dd::new(0.0))
}

/// Row for derivative order `n` at `alpha`: column `i` holds
/// `d^n/ds^n [ sum_j s^(j+i) F(-m+j) ]`.
fn root_row(cdf: &[Dd], m: usize, alpha: Cdd, n: usize) -> Vec<Cdd> {
    let mut powers = Vec::with_capacity(m);
    let mut p = real(Dd::new(1.0));
    for _ in 0..m {
        powers.push(p);
        p = p * alpha;
    }
    (0..m)
        .map(|i| {
            let mut acc = Cdd::zero();
            for j in 0..(m - i) {
                let power = j + i;
                if power < n {
                    continue;
                }
                let coef = cdf[j] * Dd::new(falling_factorial(power, n));
                acc = acc + powers[power - n] * real(coef);
            }
            acc
        })
        .collect()
}

fn mean_row(model: &RiskModel, m: usize) -> Vec<Cdd> {
    (0..m)
        .map(|i| {
            let mut v = Dd::new(0.0);
            for j in (i + 1)..=m {
                v += Dd::new((j - i) as f64) * Dd::new(model.f(-(j as i64)));
            }
            real(v)
        })
        .collect()
}

/// Assembles the `m x m` system: one row per root and derivative order,
/// then the mean row.
pub fn build_system(model: &RiskModel, roots: &RootSet) -> Result<InitSystem> {
    let m = check_roots(model, roots)?;
    let cdf = lower_cdf(model, m);
    let mut extended = Vec::with_capacity(m);
    let mut row_kinds = Vec::with_capacity(m);
    for root in &roots.roots {
        for order in 0..root.multiplicity {
            extended.push(root_row(&cdf, m, root.extended(), order));
            row_kinds.push(RowKind::Root { alpha: (root.value.re, root.value.im), order });
        }
    }
    extended.push(mean_row(model, m));
    row_kinds.push(RowKind::Mean);
    let matrix = extended.iter().map(|row| row.iter().map(|v| dd::to_c64(*v)).collect()).collect();
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    rhs[m - 1] = Complex64::new(model.drift_pos(), 0.0);
    Ok(InitSystem { matrix, rhs, row_kinds, extended })
}

fn residual(sys: &InitSystem, pi: &[f64]) -> f64 {
    let x: Vec<Complex64> = pi.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    linalg::mat_vec(&sys.matrix, &x)
        .iter()
        .zip(&sys.rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Strips imaginary dust and checks `pi_i >= 0`, `sum pi_i <= 1`.
/// Returns the real parts, their low parts and the largest imaginary part.
fn to_real(solution: &[Cdd]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut max_imag = 0.0f64;
    let mut pi = Vec::with_capacity(solution.len());
    let mut tail = Vec::with_capacity(solution.len());
    for (index, v) in solution.iter().enumerate() {
        let imag = v.im.to_f64();
        if !(imag.abs() <= IMAG_TOL) {
            return Err(Error::NonReal { index, imag });
        }
        max_imag = max_imag.max(imag.abs());
        let re = v.re.to_f64();
        pi.push(re);
        tail.push((v.re - Dd::new(re)).to_f64());
    }
    if let Some((i, v)) = pi.iter().enumerate().find(|(_, v)| **v < -1e-10) {
        return Err(Error::NumericalBlowup {
            u: i + 1,
            value: *v,
            reason: format!("initial value pi_{i} is negative"),
        });
    }
    let total: f64 = pi.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::NumericalBlowup {
            u: pi.len(),
            value: total,
            reason: "initial values sum above 1".into(),
        });
    }
    Ok((pi, tail, max_imag))
}

fn min_modulus_of(kinds: &[RowKind]) -> Option<f64> {
    kinds
        .iter()
        .filter_map(|k| match k {
            RowKind::Root { alpha, .. } => Some(alpha.0.hypot(alpha.1)),
            RowKind::Mean => None,
        })
        .reduce(f64::min)
}

fn singular(sys: &InitSystem) -> impl Fn(linalg::Singular) -> Error + '_ {
    move |s| Error::SystemSingular { column: s.column, pivot: s.pivot, row_kinds: sys.row_kinds.clone() }
}

/// Solves the system by pivoted Gaussian elimination.
pub fn solve_linear(sys: &InitSystem) -> Result<InitialValues> {
    let x: Vec<Cdd> = if sys.extended.is_empty() {
        linalg::solve(&sys.matrix, &sys.rhs, PIVOT_TOL)
            .map_err(singular(sys))?
            .into_iter()
            .map(dd::cdd)
            .collect()
    } else {
        let rhs: Vec<Cdd> = sys.rhs.iter().map(|v| dd::cdd(*v)).collect();
        linalg::solve(&sys.extended, &rhs, PIVOT_TOL).map_err(singular(sys))?
    };
    let (pi, pi_tail, max_imag) = to_real(&x)?;
    Ok(InitialValues {
        residual: residual(sys, &pi),
        drift_pos: sys.rhs.last().map(|v| v.re).unwrap_or(0.0),
        min_root_modulus: min_modulus_of(&sys.row_kinds),
        pi,
        max_imag,
        route: Route::Linear,
        route_gap: None,
        pi_tail,
    })
}

/// `e_0 = 1, e_1, ..., e_n` of the given values.
pub fn elementary_symmetric(values: &[Complex64]) -> Vec<Complex64> {
    let ext: Vec<Cdd> = values.iter().map(|v| dd::cdd(*v)).collect();
    elementary_symmetric_dd(&ext).into_iter().map(dd::to_c64).collect()
}

fn elementary_symmetric_dd(values: &[Cdd]) -> Vec<Cdd> {
    let mut e = vec![Cdd::zero(); values.len() + 1];
    e[0] = real(Dd::new(1.0));
    for (n, a) in values.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            let prev = e[k - 1];
            e[k] = e[k] + prev * *a;
        }
    }
    e
}

fn finish(model: &RiskModel, roots: &RootSet, x: &[Cdd], route: Route) -> Result<InitialValues> {
    let (pi, pi_tail, max_imag) = to_real(x)?;
    let sys = build_system(model, roots)?;
    Ok(InitialValues {
        residual: residual(&sys, &pi),
        drift_pos: model.drift_pos(),
        min_root_modulus: roots.min_modulus(),
        pi,
        max_imag,
        route,
        route_gap: None,
        pi_tail,
    })
}

/// Closed-form initial values for simple roots:
///
/// ```text
/// pi~_k = (-1)^k e_{m-1-k} / (f(-m) prod_j (alpha_j - 1))
///         - (1/f(-m)) sum_{i<k} pi~_i F(-m+k-i)
/// pi_k  = pi~_k (c E(theta) - E(X))
/// ```
pub fn solve_closed_form(model: &RiskModel, roots: &RootSet) -> Result<InitialValues> {
    let m = check_roots(model, roots)?;
    if !roots.all_simple() {
        return Err(Error::NotApplicable(
            "multiple roots present; use the linear solve".into(),
        ));
    }
    let alphas = roots.extended_values();
    let e = elementary_symmetric_dd(&alphas);
    let cdf = lower_cdf(model, m);
    let fm = real(cdf[0]);
    let one = real(Dd::new(1.0));
    let denom = alphas.iter().fold(one, |acc, a| acc * (*a - one)) * fm;
    let mut scaled: Vec<Cdd> = Vec::with_capacity(m);
    for k in 0..m {
        let sign = if k % 2 == 0 { one } else { -one };
        let mut v = e[m - 1 - k] * sign / denom;
        for (i, p) in scaled.iter().enumerate() {
            v = v - *p * real(cdf[k - i]) / fm;
        }
        scaled.push(v);
    }
    let drift = real(Dd::new(model.drift_pos()));
    let x: Vec<Cdd> = scaled.iter().map(|v| *v * drift).collect();
    finish(model, roots, &x, Route::ClosedForm)
}

/// `R(s)` with `P(s) = (s - 1) prod_j (s - alpha_j) R(s)`, in double-double.
///
/// Division runs from the leading coefficient down, which is stable for
/// divisors with `|alpha| <= 1`.
pub fn outer_factor(model: &RiskModel, roots: &RootSet) -> Result<Vec<Dd>> {
    check_roots(model, roots)?;
    let cp = char_poly(model)?;
    let mut p: Vec<Cdd> = cp.extended(model).into_iter().map(real).collect();
    let mut divisors = roots.extended_values();
    divisors.push(real(Dd::new(1.0)));
    for a in divisors {
        let n = p.len() - 1;
        let mut q = vec![Cdd::zero(); n];
        q[n - 1] = p[n];
        for k in (1..n).rev() {
            q[k - 1] = p[k] + a * q[k];
        }
        p = q;
    }
    Ok(p.into_iter().map(|c| c.re).collect())
}

/// First `n` Taylor coefficients of `1 / r(s)`.
pub fn reciprocal_series(r: &[Dd], n: usize) -> Vec<Dd> {
    let mut y: Vec<Dd> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = if k == 0 { Dd::new(1.0) } else { Dd::new(0.0) };
        for i in 1..=k.min(r.len() - 1) {
            v -= r[i] * y[k - i];
        }
        y.push(v / r[0]);
    }
    y
}

/// Initial values from the outer factor: `pi_k = R(1) [s^k] 1/R(s)`.
pub fn solve_factored(model: &RiskModel, roots: &RootSet) -> Result<InitialValues> {
    let m = check_roots(model, roots)?;
    let r = outer_factor(model, roots)?;
    let at_one = r.iter().fold(Dd::new(0.0), |acc, c| acc + *c);
    let x: Vec<Cdd> = reciprocal_series(&r, m).into_iter().map(|y| real(y * at_one)).collect();
    finish(model, roots, &x, Route::Factored)
}

/// Default route: the linear solve, checked against the factored route.
/// When they disagree by more than [`ROUTE_TOL`], or the linear solve fails
/// numerically, the factored values are returned instead, with the gap
/// recorded in `route_gap`.
pub fn solve(model: &RiskModel, roots: &RootSet) -> Result<InitialValues> {
    solve_checked(model, roots, ROUTE_TOL)
}

/// [`solve`] with an explicit agreement tolerance.
pub fn solve_checked(model: &RiskModel, roots: &RootSet, route_tol: f64) -> Result<InitialValues> {
    let sys = build_system(model, roots)?;
    let factored = solve_factored(model, roots);
    let linear = solve_linear(&sys);
    match (linear, factored) {
        (Ok(mut lin), Ok(mut fac)) => {
            let gap = lin.pi.iter().zip(&fac.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if gap <= route_tol {
                lin.route_gap = Some(gap);
                Ok(lin)
            } else {
                fac.route_gap = Some(gap);
                Ok(fac)
            }
        }
        (Err(e), Ok(fac)) if e.is_numerical() => Ok(fac),
        (Ok(lin), Err(_)) => Ok(lin),
        (Err(e), _) => Err(e),
    }
}

/// Direct determinant of the system matrix next to the product formula
/// `(-1)^(m-1) f(-m)^m prod_j (alpha_j - 1) prod_{i<j} (alpha_j - alpha_i)`.
pub fn determinant_identity(model: &RiskModel, roots: &RootSet) -> Result<(Complex64, Complex64)> {
    let sys = build_system(model, roots)?;
    let m = sys.matrix.len();
    let lhs = linalg::determinant(&sys.matrix);
    let alphas = roots.values();
    let fm = model.f(-(m as i64));
    let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut rhs = Complex64::new(sign * fm.powi(m as i32), 0.0);
    for (j, a) in alphas.iter().enumerate() {
        rhs *= a - 1.0;
        for b in &alphas[..j] {
            rhs *= a - b;
        }
    }
    Ok((lhs, rhs))
}

/// Left side of the generating-function identity at each root,
/// `sum_i pi_i sum_{j=i+1}^m (1 - alpha^(i-j)) f(-j)`, which must vanish.
pub fn root_identity_residuals(model: &RiskModel, roots: &RootSet, init: &InitialValues) -> Vec<f64> {
    let m = model.m();
    roots
        .roots
        .iter()
        .map(|root| {
            let a = root.value;
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, p) in init.pi.iter().enumerate() {
                for j in (i + 1)..=m {
                    let term = Complex64::new(1.0, 0.0) - a.powi(i as i32 - j as i32);
                    acc += term * model.f(-(j as i64)) * p;
                }
            }
            acc.norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pmf;
    use crate::pgf::{unit_disk_roots, RootConfig};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn example_one() -> RiskModel {
        RiskModel::new(
            Pmf::new(0, vec![0.5, 0.5], 0.0).unwrap(),
            Pmf::new(0, vec![0.5, 0.0, 0.5], 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_small_cases() {
        assert_eq!(elementary_symmetric(&[c(7.0)]), vec![c(1.0), c(7.0)]);
        assert_eq!(elementary_symmetric(&[c(2.0), c(3.0)]), vec![c(1.0), c(5.0), c(6.0)]);
        assert_eq!(elementary_symmetric(&[]), vec![c(1.0)]);
    }

    #[test]
    fn identity_system() {
        let sys = InitSystem {
            matrix: vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]],
            rhs: vec![c(1.0), c(0.0)],
            row_kinds: vec![RowKind::Root { alpha: (0.5, 0.0), order: 0 }, RowKind::Mean],
            extended: Vec::new(),
        };
        let iv = solve_linear(&sys).unwrap();
        assert_eq!(iv.pi, vec![1.0, 0.0]);
        assert_eq!(iv.residual, 0.0);
    }

    #[test]
    fn singular_system_reports_rows() {
        let sys = InitSystem {
            matrix: vec![vec![c(1.0), c(1.0)], vec![c(1.0), c(1.0)]],
            rhs: vec![c(0.0), c(1.0)],
            row_kinds: vec![RowKind::Root { alpha: (0.5, 0.0), order: 0 }, RowKind::Mean],
            extended: Vec::new(),
        };
        match solve_linear(&sys) {
            Err(Error::SystemSingular { row_kinds, .. }) => assert_eq!(row_kinds.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn example_one_both_routes() {
        let model = example_one();
        let roots = unit_disk_roots(&model, &RootConfig::default()).unwrap();
        let lin = solve_linear(&build_system(&model, &roots).unwrap()).unwrap();
        let cf = solve_closed_form(&model, &roots).unwrap();
        let want = 2.0 - 2f64.sqrt();
        assert!((lin.pi[0] - want).abs() < 1e-14);
        assert!((cf.pi[0] - want).abs() < 1e-14);
        let fac = solve_factored(&model, &roots).unwrap();
        assert!((fac.pi[0] - want).abs() < 1e-15);
        let chosen = solve(&model, &roots).unwrap();
        assert_eq!(chosen.route, Route::Linear);
        assert!(chosen.route_gap.unwrap() < 1e-15);
    }

    #[test]
    fn outer_factor_example_one() {
        // P(s) = (s - 1)(s - alpha)(s - (1 + sqrt 2)) / 4
        let model = example_one();
        let roots = unit_disk_roots(&model, &RootConfig::default()).unwrap();
        let r = outer_factor(&model, &roots).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[1].to_f64() - 0.25).abs() < 1e-16);
        assert!((r[0].to_f64() + (1.0 + 2f64.sqrt()) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_of_one_minus_s() {
        let y = reciprocal_series(&[Dd::new(1.0), Dd::new(-1.0)], 5);
        assert!(y.iter().all(|v| v.to_f64() == 1.0));
    }

    #[test]
    fn single_mean_row_when_m_is_one() {
        // X in {0, 1}, c*theta = 1: pi_0 = (1 - EX) / P(X = 0)
        let model = RiskModel::new(Pmf::new(0, vec![0.7, 0.3], 0.0).unwrap(), Pmf::point(1))
            .unwrap();
        let roots = unit_disk_roots(&model, &RootConfig::default()).unwrap();
        let sys = build_system(&model, &roots).unwrap();
        assert_eq!(sys.row_kinds, vec![RowKind::Mean]);
        let lin = solve_linear(&sys).unwrap();
        assert!((lin.pi[0] - 0.7 / 0.7).abs() < 1e-15);
        let cf = solve_closed_form(&model, &roots).unwrap();
        assert!((cf.pi[0] - lin.pi[0]).abs() < 1e-15);
        let (lhs, rhs) = determinant_identity(&model, &roots).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
        assert!((lhs - model.f(-1)).norm() < 1e-15);
    }
}
