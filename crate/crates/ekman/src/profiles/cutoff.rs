//! Cut-off functions: the shore cut-off χ and the layer cut-off k with its
//! antiderivatives.

use std::sync::OnceLock;

use crate::calculus::quadrature::{gauss_legendre, Rule};
use crate::calculus::scalar::{Scalar, Series, ORDER};
use crate::calculus::smooth::{mollifier, step01};

pub use crate::calculus::smooth::chi;

/// `χ′` at `x`.
pub fn chi_prime<T: Scalar>(x: T) -> T {
    let s = chi(Series::var(x.val()));
    crate::calculus::scalar::apply_derivative(&s, 1, &x)
}

const TABLE_N: usize = 4096;
const LEFT: f64 = -2.0;
/// Below this point `k` vanishes identically.
const SUPPORT: f64 = -1.9;

/// `k = 1` on `[-1, 0]`, supported in `(-2, 0]`, with `∫k = ∫ζk′ = 0`.
///
/// Built as a plateau falling to zero on `[-1.6, -1]` plus a negative bump
/// on `(-1.9, -1.7)` whose weight cancels the mean.
#[derive(Debug)]
pub struct CutoffK {
    bump_weight: f64,
    /// `K(ζ_j) = ∫_{ζ_j}^0 k` on the uniform grid over `[-2, 0]`.
    table: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

/// `exp(1 - 1/(1-y²))` with `y = (ζ+1.8)/0.1`: unit peak, support `(-1.9, -1.7)`.
fn bump<T: Scalar>(z: T) -> T {
    let y = (z + 1.8) / 0.1;
    mollifier(-(y * y) + 1.0) * std::f64::consts::E
}

fn plateau<T: Scalar>(z: T) -> T {
    step01((-z - 1.0) / 0.6)
}

impl CutoffK {
    fn build() -> CutoffK {
        let p = Rule::uniform(-1.6, -1.0, 400, 20).integrate(plateau::<f64>) + 1.0;
        let b = Rule::uniform(-1.9, -1.7, 400, 20).integrate(bump::<f64>);
        let mut k = CutoffK {
            bump_weight: -p / b,
            table: vec![0.0; TABLE_N + 1],
            gl: gauss_legendre(8),
        };
        let h = -LEFT / TABLE_N as f64;
        for j in (0..TABLE_N).rev() {
            let a = LEFT + j as f64 * h;
            k.table[j] = k.table[j + 1] + k.integral(a, a + h);
        }
        k
    }

    /// Process-wide instance; the table is built on first use.
    pub fn shared() -> &'static CutoffK {
        static K: OnceLock<CutoffK> = OnceLock::new();
        K.get_or_init(CutoffK::build)
    }

    pub fn bump_weight(&self) -> f64 {
        self.bump_weight
    }

    pub fn k<T: Scalar>(&self, z: T) -> T {
        plateau(z) + bump(z) * self.bump_weight
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.gl
            .0
            .iter()
            .zip(&self.gl.1)
            .map(|(x, w)| w * h * self.k(c + h * x))
            .sum()
    }

    fn k_value(&self, z: f64) -> f64 {
        if z <= SUPPORT {
            return 0.0;
        }
        if z >= -1.0 {
            return -z;
        }
        let h = -LEFT / TABLE_N as f64;
        let j = (((z - LEFT) / h).floor() as usize).min(TABLE_N - 1);
        let right = LEFT + (j + 1) as f64 * h;
        self.table[j + 1] + self.integral(z, right)
    }

    /// `K(ζ) = ∫_ζ^0 k`.
    pub fn big_k<T: Scalar>(&self, z: T) -> T {
        let v = z.val();
        let ks = self.k(Series::var(v));
        let mut c = [0.0; ORDER];
        c[0] = self.k_value(v);
        for j in 1..ORDER {
            c[j] = -ks.0[j - 1] / j as f64;
        }
        z.compose(&c)
    }

    /// `K₁(ζ) = ∫_ζ^0 σ k′(σ) dσ = -ζ k(ζ) - K(ζ)`.
    pub fn big_k1<T: Scalar>(&self, z: T) -> T {
        -(z * self.k(z)) - self.big_k(z)
    }

    /// `∫_{-2}^0 k` recomputed by an independent high-order rule.
    pub fn mean_moment(&self) -> f64 {
        Rule::uniform(LEFT, 0.0, 2000, 20).integrate(|z| self.k(z))
    }

    /// `∫_{-2}^0 ζ k′(ζ) dζ` by quadrature of the derivative series.
    pub fn first_moment(&self) -> f64 {
        Rule::uniform(LEFT, 0.0, 2000, 20).integrate(|z| z * self.k(Series::var(z)).0[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::scalar::Jet;

    #[test]
    fn k_shape() {
        let k = CutoffK::shared();
        for i in 0..=100 {
            assert_eq!(k.k(-(i as f64) / 100.0), 1.0);
        }
        for &z in &[-1.95, -2.0, -3.0, -1.91] {
            assert_eq!(k.k(z), 0.0);
        }
        assert!(k.k(-1.8) < 0.0);
    }

    #[test]
    fn moments_vanish() {
        let k = CutoffK::shared();
        assert!(k.mean_moment().abs() <= 1e-10, "{}", k.mean_moment());
        assert!(k.first_moment().abs() <= 1e-10, "{}", k.first_moment());
    }

    #[test]
    fn antiderivative_endpoints() {
        let k = CutoffK::shared();
        assert_eq!(k.big_k(0.0), 0.0);
        assert!(k.big_k(-2.0).abs() <= 1e-10);
        assert!(k.big_k1(-2.0).abs() <= 1e-10);
        assert!((k.big_k(-0.5) - 0.5).abs() < 1e-15);
        // Continuity across the support edge.
        assert!((k.k_value(SUPPORT + 1e-9)).abs() < 1e-10);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let k = CutoffK::shared();
        for &z in &[-1.234, -1.55, -1.75, -1.8, -1.85, -1.0001] {
            let q = Rule::uniform(z, 0.0, 200, 20).integrate(|s| k.k(s));
            assert!((k.big_k(z) - q).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn antiderivative_jet_derivatives() {
        let k = CutoffK::shared();
        let z = Jet::var(2, -1.72);
        let kk = k.big_k(z);
        assert!((kk.g[2] + k.k(-1.72)).abs() < 1e-12);
        let dk = k.k(Series::var(-1.72)).derivative(1);
        assert!((kk.h[5] + dk).abs() < 1e-9 * (1.0 + dk.abs()));
    }

    #[test]
    fn chi_prime_vanishes_on_plateaus() {
        assert_eq!(chi_prime(0.3), 0.0);
        assert_eq!(chi_prime(1.3), 0.0);
        assert!(chi_prime(0.75) < 0.0);
    }
}
