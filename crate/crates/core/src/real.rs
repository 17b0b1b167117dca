//! Scalar abstraction used by the discretized geometry.
//!
//! The evolution identities involve up to six derivatives of marker
//! positions, so the grid tier is generic over [`Real`] and can run in plain
//! `f64` or in the double-double type [`Dd`] (about 32 significant digits).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Floating-point scalar used by the grid tier.
pub trait Real:
    Copy
    + fmt::Debug
    + fmt::Display
    + Default
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// `self^e` for positive `self`.
    fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return Self::one();
        }
        if e == 1.0 {
            return self;
        }
        if e == 2.0 {
            return self * self;
        }
        if e == -1.0 {
            return Self::one() / self;
        }
        if e == 0.5 {
            return self.sqrt();
        }
        (self.ln() * Self::from_f64(e)).exp()
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON / 2.0;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Double-double number: the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

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
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Exact product via Dekker splitting; avoids depending on hardware FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

const DD_LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };
const DD_PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const DD_2PI: Dd = Dd { hi: std::f64::consts::TAU, lo: 2.449_293_598_294_706_4e-16 };
const DD_PI_2: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123_233_995_736_766e-17 };

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    fn sqr(self) -> Dd {
        let (p1, p2) = two_prod(self.hi, self.hi);
        let (hi, lo) = quick_two_sum(p1, p2 + 2.0 * self.hi * self.lo + self.lo * self.lo);
        Dd { hi, lo }
    }

    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    /// Taylor series for sin and cos on `|x| <= pi/4`.
    fn sin_cos_reduced(x: Dd) -> (Dd, Dd) {
        let x2 = x.sqr();
        let mut term = x;
        let mut sin = x;
        let mut k = 1.0;
        loop {
            term = -(term * x2) / Dd::from(((k + 1.0) * (k + 2.0)) as f64);
            k += 2.0;
            sin += term;
            if term.hi.abs() < 1e-33 * sin.hi.abs().max(1e-300) {
                break;
            }
        }
        let mut term = Dd::from(1.0);
        let mut cos = term;
        let mut k = 0.0;
        loop {
            term = -(term * x2) / Dd::from((k + 1.0) * (k + 2.0));
            k += 2.0;
            cos += term;
            if term.hi.abs() < 1e-33 {
                break;
            }
        }
        (sin, cos)
    }

    /// Reduces to `r + j*pi/2` with `|r| <= pi/4`, returning `(sin x, cos x)`.
    fn sin_cos(self) -> (Dd, Dd) {
        if self.hi == 0.0 {
            return (Dd::from(0.0), Dd::from(1.0));
        }
        let z = (self / DD_2PI).hi.round();
        let r = self - DD_2PI.mul_f64(z);
        let q = (r.hi / DD_PI_2.hi).round();
        let t = r - DD_PI_2.mul_f64(q);
        let (s, c) = Dd::sin_cos_reduced(t);
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p1, p2 + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            #[inline]
            fn $m(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::from(0.0), |a, b| a + b)
    }
}

impl Real for Dd {
    const EPSILON: f64 = 4.93e-32; // 2^-104

    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn pi() -> Self {
        DD_PI
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            if self.hi == 0.0 {
                return Dd::from(0.0);
            }
            return Dd::from(f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let corr = (self - Dd::from(ax).sqr()).hi * (x * 0.5);
        let (hi, lo) = two_sum(ax, corr);
        Dd { hi, lo }
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::from(0.0);
        }
        let m = (self.hi / DD_LN2.hi).round();
        // e^x = 2^m * (e^(r/512))^512
        let r = (self - DD_LN2.mul_f64(m)).ldexp(-9);
        let mut s = r;
        let mut term = r;
        let mut k = 2.0;
        loop {
            term = term * r / Dd::from(k);
            s += term;
            k += 1.0;
            if term.hi.abs() <= 1e-34 * s.hi.abs().max(1e-300) || k > 40.0 {
                break;
            }
        }
        // (1 + s)^2 - 1 = 2s + s^2, applied nine times
        for _ in 0..9 {
            s = s.ldexp(1) + s.sqr();
        }
        (s + Dd::from(1.0)).ldexp(m as i32)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Dd::from(1.0);
        }
        x
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

/// `T::from_f64` shorthand.
#[inline]
pub fn r<T: Real>(x: f64) -> T {
    T::from_f64(x)
}
