//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi) / 2`, giving about 32 significant digits.
//!
//! Used where rounding the roots to `f64` is not good enough: the initial
//! values depend on the roots through a deconvolution whose error
//! amplification grows like `(1 / f(-m))`, so models with a tiny `f(-m)`
//! need the roots and the system to carry extra digits.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub type Cdd = Complex<Dd>;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 { -self } else { self }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Self::new(v)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::new(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, o: Dd) -> Dd {
        let q = (self / o).to_f64().trunc();
        self - o * Dd::new(q)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, o: Dd) {
        *self = *self + o;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, o: Dd) {
        *self = *self - o;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, o: Dd) {
        *self = *self * o;
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::new(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::new(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::new)
    }
}

pub fn cdd(z: Complex64) -> Cdd {
    Complex::new(Dd::new(z.re), Dd::new(z.im))
}

/// Extended value from a rounded part and its remainder.
pub fn cdd_split(value: Complex64, tail: Complex64) -> Cdd {
    Complex::new(Dd::renorm(value.re, tail.re), Dd::renorm(value.im, tail.im))
}

pub fn to_c64(z: Cdd) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

/// Low parts left over after rounding to `f64`.
pub fn tail_of(z: Cdd) -> Complex64 {
    let r = to_c64(z);
    Complex64::new((z.re - Dd::new(r.re)).to_f64(), (z.im - Dd::new(r.im)).to_f64())
}

/// Modulus to `f64` accuracy.
pub fn mag(z: Cdd) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

pub fn scale(z: Cdd, s: f64) -> Cdd {
    Complex::new(z.re * Dd::new(s), z.im * Dd::new(s))
}

/// Horner evaluation of a polynomial with extended coefficients.
pub fn horner(coeffs: &[Dd], z: Cdd) -> Cdd {
    coeffs
        .iter()
        .rev()
        .fold(Cdd::zero(), |acc, &c| acc * z + Complex::new(c, Dd::zero()))
}
