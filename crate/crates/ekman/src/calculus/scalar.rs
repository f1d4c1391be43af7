//! Scalar types used to evaluate closed-form fields with exact derivatives.
//!
//! Every field in the crate is written once, generically over [`Scalar`], and
//! evaluated with one of three number types:
//!
//! * `f64` for plain values,
//! * [`Series`], a truncated univariate Taylor series (radial profiles and
//!   their ρ-derivatives),
//! * [`Jet`], a second-order forward-mode jet in the three Cartesian space
//!   variables (gradients, Hessians, Laplacians).
//!
//! Elementary functions are routed through [`Scalar::compose`], which applies
//! a function from its Taylor coefficients at the current value. This keeps
//! the chain rule in one place for all three types.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of Taylor coefficients carried by [`Series`] and by composition tables.
pub const ORDER: usize = 6;

/// Taylor coefficients `f^(k)(x0)/k!` for `k < ORDER`.
pub type Taylor = [f64; ORDER];

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    /// `f(self)` where `c[k] = f^(k)(self.val())/k!`.
    fn compose(&self, c: &Taylor) -> Self;

    fn exp(self) -> Self {
        let e = self.val().exp();
        self.compose(&scaled_factorials(|_| e))
    }
    fn ln(self) -> Self {
        let x = self.val();
        let mut c = [0.0; ORDER];
        c[0] = x.ln();
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *ck = sign / (k as f64 * x.powi(k as i32));
        }
        self.compose(&c)
    }
    fn sin(self) -> Self {
        let (s, co) = self.val().sin_cos();
        let d = [s, co, -s, -co];
        self.compose(&scaled_factorials(|k| d[k % 4]))
    }
    fn cos(self) -> Self {
        let (s, co) = self.val().sin_cos();
        let d = [co, -s, -co, s];
        self.compose(&scaled_factorials(|k| d[k % 4]))
    }
    /// `self^p` for a real exponent; requires a positive value unless `p` is a
    /// non-negative integer.
    fn powf(self, p: f64) -> Self {
        let x = self.val();
        let mut c = [0.0; ORDER];
        let mut coef = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = coef * x.powf(p - k as f64);
            coef *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&c)
    }
    fn sqrt(self) -> Self {
        self.powf(0.5)
    }
    fn recip(self) -> Self {
        let x = self.val();
        let mut c = [0.0; ORDER];
        for (k, ck) in c.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ck = sign / x.powi(k as i32 + 1);
        }
        self.compose(&c)
    }
    fn tanh(self) -> Self {
        let e = (self * (-2.0)).exp();
        (-e + 1.0) / (e + 1.0)
    }
    fn square(self) -> Self {
        self * self
    }
}

fn scaled_factorials(d: impl Fn(usize) -> f64) -> Taylor {
    let mut c = [0.0; ORDER];
    let mut fact = 1.0;
    for (k, ck) in c.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *ck = d(k) / fact;
    }
    c
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn val(&self) -> f64 {
        *self
    }
    #[inline]
    fn compose(&self, c: &Taylor) -> Self {
        c[0]
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Truncated Taylor series `Σ c[k] h^k` about an implicit base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series(pub Taylor);

impl Series {
    /// The identity series `x0 + h`.
    pub fn var(x0: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = x0;
        c[1] = 1.0;
        Series(c)
    }

    /// `k`-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for j in 2..=k {
            f *= j as f64;
        }
        self.0[k] * f
    }

    /// Series of the derivative; the top coefficient is lost.
    pub fn deriv(&self) -> Self {
        let mut c = [0.0; ORDER];
        for k in 0..ORDER - 1 {
            c[k] = (k as f64 + 1.0) * self.0[k + 1];
        }
        Series(c)
    }

    /// Series of the antiderivative taking the value `c0` at the base point.
    pub fn integral(&self, c0: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = c0;
        for k in 1..ORDER {
            c[k] = self.0[k - 1] / k as f64;
        }
        Series(c)
    }

    /// Evaluates the polynomial at offset `h`.
    pub fn at(&self, h: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }
}

impl Scalar for Series {
    fn cst(v: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = v;
        Series(c)
    }
    fn val(&self) -> f64 {
        self.0[0]
    }
    fn compose(&self, c: &Taylor) -> Self {
        let mut d = *self;
        d.0[0] = 0.0;
        let mut r = Series::cst(c[ORDER - 1]);
        for k in (0..ORDER - 1).rev() {
            r = r * d + c[k];
        }
        r
    }
}

impl Add for Series {
    type Output = Series;
    fn add(mut self, o: Series) -> Series {
        for k in 0..ORDER {
            self.0[k] += o.0[k];
        }
        self
    }
}
impl Sub for Series {
    type Output = Series;
    fn sub(mut self, o: Series) -> Series {
        for k in 0..ORDER {
            self.0[k] -= o.0[k];
        }
        self
    }
}
impl Mul for Series {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        let mut c = [0.0; ORDER];
        for i in 0..ORDER {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..ORDER - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(c)
    }
}
impl Div for Series {
    type Output = Series;
    fn div(self, o: Series) -> Series {
        // Long division: q = a/b with q_k = (a_k - Σ_{j<k} q_j b_{k-j}) / b_0.
        let mut q = [0.0; ORDER];
        for k in 0..ORDER {
            let mut s = self.0[k];
            for j in 0..k {
                s -= q[j] * o.0[k - j];
            }
            q[k] = s / o.0[0];
        }
        Series(q)
    }
}
impl Neg for Series {
    type Output = Series;
    fn neg(mut self) -> Series {
        for c in self.0.iter_mut() {
            *c = -*c;
        }
        self
    }
}
impl Add<f64> for Series {
    type Output = Series;
    fn add(mut self, o: f64) -> Series {
        self.0[0] += o;
        self
    }
}
impl Sub<f64> for Series {
    type Output = Series;
    fn sub(mut self, o: f64) -> Series {
        self.0[0] -= o;
        self
    }
}
impl Mul<f64> for Series {
    type Output = Series;
    fn mul(mut self, o: f64) -> Series {
        for c in self.0.iter_mut() {
            *c *= o;
        }
        self
    }
}
impl Div<f64> for Series {
    type Output = Series;
    fn div(self, o: f64) -> Series {
        self * (1.0 / o)
    }
}

/// Second-order jet in the Cartesian variables `(x, y, z)`.
///
/// `h` stores the symmetric Hessian as `[xx, xy, xz, yy, yz, zz]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [f64; 6],
}

const HIDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
const HPAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

impl Jet {
    /// The coordinate function `x_i` evaluated at `v`.
    pub fn var(i: usize, v: f64) -> Self {
        let mut g = [0.0; 3];
        g[i] = 1.0;
        Jet { v, g, h: [0.0; 6] }
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[HIDX[i][j]]
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0] + self.h[3] + self.h[5]
    }
}

impl Scalar for Jet {
    #[inline]
    fn cst(v: f64) -> Self {
        Jet { v, g: [0.0; 3], h: [0.0; 6] }
    }
    #[inline]
    fn val(&self) -> f64 {
        self.v
    }
    #[inline]
    fn compose(&self, c: &Taylor) -> Self {
        let f1 = c[1];
        let f2 = 2.0 * c[2];
        let mut h = [0.0; 6];
        for (k, &(i, j)) in HPAIRS.iter().enumerate() {
            h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
        }
        Jet {
            v: c[0],
            g: [f1 * self.g[0], f1 * self.g[1], f1 * self.g[2]],
            h,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..3 {
            self.g[i] += o.g[i];
        }
        for k in 0..6 {
            self.h[k] += o.h[k];
        }
        self
    }
}
impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, o: Jet) -> Jet {
        self.v -= o.v;
        for i in 0..3 {
            self.g[i] -= o.g[i];
        }
        for k in 0..6 {
            self.h[k] -= o.h[k];
        }
        self
    }
}
impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let mut h = [0.0; 6];
        for (k, &(i, j)) in HPAIRS.iter().enumerate() {
            h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
        }
        Jet {
            v: self.v * o.v,
            g: [
                self.v * o.g[0] + o.v * self.g[0],
                self.v * o.g[1] + o.v * self.g[1],
                self.v * o.g[2] + o.v * self.g[2],
            ],
            h,
        }
    }
}
impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}
impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self * -1.0
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, o: f64) -> Jet {
        self.v += o;
        self
    }
}
impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, o: f64) -> Jet {
        self.v -= o;
        self
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(mut self, o: f64) -> Jet {
        self.v *= o;
        for i in 0..3 {
            self.g[i] *= o;
        }
        for k in 0..6 {
            self.h[k] *= o;
        }
        self
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: f64) -> Jet {
        self * (1.0 / o)
    }
}

/// Applies the `d`-th derivative of the function whose Taylor series at
/// `x.val()` is `s` to the argument `x`.
pub fn apply_derivative<T: Scalar>(s: &Series, d: usize, x: &T) -> T {
    let mut c = [0.0; ORDER];
    for (k, ck) in c.iter_mut().enumerate() {
        let j = k + d;
        if j >= ORDER {
            break;
        }
        // coefficient of h^k in f^(d)(x0+h) = s_j * j!/k!
        let mut f = 1.0;
        for m in (k + 1)..=j {
            f *= m as f64;
        }
        *ck = s.0[j] * f;
    }
    x.compose(&c)
}
