//! Small dense complex linear algebra: Gaussian elimination with partial
//! pivoting and determinants, in `f64` or double-double precision.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::dd::{self, Cdd};

pub type Matrix = Vec<Vec<Complex64>>;

/// Field element the eliminator works over.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn scaled(self, s: f64) -> Self;
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Cdd {
    fn zero() -> Self {
        <Cdd as Zero>::zero()
    }
    fn magnitude(self) -> f64 {
        dd::mag(self)
    }
    fn scaled(self, s: f64) -> Self {
        dd::scale(self, s)
    }
}

/// Elimination hit a pivot below the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub column: usize,
    pub pivot: f64,
}

/// LU factors with row permutation, stored in place.
struct Lu<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
    swaps: usize,
}

fn factor<T: Scalar>(mut a: Vec<Vec<T>>, pivot_tol: f64) -> Result<Lu<T>, Singular> {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[i][k].magnitude()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if !(best >= pivot_tol) || best == 0.0 {
            return Err(Singular { column: k, pivot: best });
        }
        if p != k {
            a.swap(p, k);
            perm.swap(p, k);
            swaps += 1;
        }
        let pivot = a[k][k];
        for i in (k + 1)..n {
            let factor = a[i][k] / pivot;
            a[i][k] = factor;
            for j in (k + 1)..n {
                let t = a[k][j];
                a[i][j] = a[i][j] - factor * t;
            }
        }
    }
    Ok(Lu { lu: a, perm, swaps })
}

impl<T: Scalar> Lu<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.len();
        let mut x: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = x[j];
                x[i] = x[i] - self.lu[i][j] * t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let t = x[j];
                x[i] = x[i] - self.lu[i][j] * t;
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }
}

pub fn mat_vec<T: Scalar>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (a, x)| acc + *a * *x))
        .collect()
}

/// Solves `A x = b`.
///
/// Rows and columns are scaled to unit max-modulus before elimination, so
/// `pivot_tol` is relative to the scale of the system. One step of
/// iterative refinement follows the first solve.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T], pivot_tol: f64) -> Result<Vec<T>, Singular> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let inv_max = |m: f64| if m > 0.0 { 1.0 / m } else { 1.0 };
    let row_scale: Vec<f64> = a
        .iter()
        .map(|row| inv_max(row.iter().map(|v| v.magnitude()).fold(0.0, f64::max)))
        .collect();
    let col_scale: Vec<f64> = (0..n)
        .map(|j| inv_max((0..n).map(|i| a[i][j].scaled(row_scale[i]).magnitude()).fold(0.0, f64::max)))
        .collect();
    let scaled: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j].scaled(row_scale[i]).scaled(col_scale[j])).collect())
        .collect();
    let lu = factor(scaled.clone(), pivot_tol)?;
    let rhs: Vec<T> = b.iter().zip(&row_scale).map(|(v, s)| v.scaled(*s)).collect();
    let mut y = lu.solve(&rhs);
    let ay = mat_vec(&scaled, &y);
    let r: Vec<T> = rhs.iter().zip(&ay).map(|(b, v)| *b - *v).collect();
    let dy = lu.solve(&r);
    for (yi, d) in y.iter_mut().zip(dy) {
        *yi = *yi + d;
    }
    Ok(y.iter().zip(&col_scale).map(|(v, s)| v.scaled(*s)).collect())
}

/// Determinant by LU; exactly zero when elimination finds a zero column.
pub fn determinant(a: &Matrix) -> Complex64 {
    match factor(a.clone(), 0.0) {
        Ok(lu) => {
            let diag: Complex64 = (0..a.len()).map(|i| lu.lu[i][i]).product();
            if lu.swaps % 2 == 1 { -diag } else { diag }
        }
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_solve() {
        let a = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
        let x = solve(&a, &[c(1.0), c(0.0)], 1e-13).unwrap();
        assert_eq!(x, vec![c(1.0), c(0.0)]);
    }

    #[test]
    fn pivoting_required() {
        let a = vec![vec![c(0.0), c(1.0)], vec![c(2.0), c(3.0)]];
        let x = solve(&a, &[c(1.0), c(5.0)], 1e-13).unwrap();
        assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 1.0).norm() < 1e-15);
        assert!((determinant(&a) + 2.0).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![c(1.0), c(2.0)], vec![c(2.0), c(4.0)]];
        let err = solve(&a, &[c(1.0), c(1.0)], 1e-13).unwrap_err();
        assert_eq!(err.column, 1);
        assert_eq!(determinant(&a), c(0.0));
    }

    #[test]
    fn complex_system() {
        let i = Complex64::new(0.0, 1.0);
        let a = vec![vec![i, c(1.0)], vec![c(1.0), -i]];
        let want = vec![c(2.0) + i, c(-1.0)];
        let b = mat_vec(&a, &want);
        let x = solve(&a, &b, 1e-13);
        // a is singular: i*(-i) - 1 = 0
        assert!(x.is_err());
        let a = vec![vec![i, c(1.0)], vec![c(1.0), i]];
        let b = mat_vec(&a, &want);
        let x = solve(&a, &b, 1e-13).unwrap();
        for (u, v) in x.iter().zip(&want) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
