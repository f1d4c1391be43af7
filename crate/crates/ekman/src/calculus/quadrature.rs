//! Gauss–Legendre rules and composite panels.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// A 1-D quadrature rule: nodes with positive weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Composite rule with `n` Gauss points on each panel `[b[i], b[i+1]]`.
    pub fn composite(breaks: &[f64], n: usize) -> Rule {
        let (x, w) = gauss_legendre(n);
        let mut r = Rule::default();
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            if b <= a {
                continue;
            }
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                r.nodes.push(c + h * xi);
                r.weights.push(h * wi);
            }
        }
        r
    }

    /// Composite rule on `[a, b]` with `panels` equal panels.
    pub fn uniform(a: f64, b: f64, panels: usize, n: usize) -> Rule {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Rule::composite(&breaks, n)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn extend(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// Splits `[a, b]` into panels no wider than `h`, keeping every interior
/// break point in `extra` that falls strictly inside.
pub fn breaks_with(a: f64, b: f64, h: f64, extra: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = extra.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.push(b);
    let mut prev = a;
    for x in inner {
        if x - prev < 1e-14 * (1.0 + x.abs()) {
            continue;
        }
        let m = ((x - prev) / h).ceil().max(1.0) as usize;
        for k in 1..=m {
            cuts.push(prev + (x - prev) * k as f64 / m as f64);
        }
        prev = x;
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn composite_integrates_exponential() {
        let r = Rule::uniform(0.0, 3.0, 6, 8);
        let q = r.integrate(|x| (-x).exp());
        assert!((q - (1.0 - (-3.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn breaks_respect_width_and_extras() {
        let b = breaks_with(0.0, 1.0, 0.3, &[0.45, 2.0]);
        assert_eq!(b.first(), Some(&0.0));
        assert_eq!(b.last(), Some(&1.0));
        assert!(b.iter().any(|&x| (x - 0.45).abs() < 1e-15));
        assert!(b.windows(2).all(|p| p[1] - p[0] <= 0.3 + 1e-15 && p[1] > p[0]));
    }
}
