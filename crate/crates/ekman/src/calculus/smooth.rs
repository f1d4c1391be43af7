//! Smooth step and bump primitives built from `exp(-1/s)`.

use super::scalar::Scalar;

/// `exp(-1/s)` for `s > 0`, zero otherwise.
pub fn mollifier<T: Scalar>(s: T) -> T {
    if s.val() <= 0.0 {
        T::cst(0.0)
    } else {
        (s.recip() * -1.0).exp()
    }
}

/// Smooth step from 1 (for `y <= 0`) to 0 (for `y >= 1`).
pub fn step01<T: Scalar>(y: T) -> T {
    let v = y.val();
    if v <= 0.0 {
        T::cst(1.0)
    } else if v >= 1.0 {
        T::cst(0.0)
    } else {
        let a = mollifier(-y + 1.0);
        let b = mollifier(y);
        a / (a + b)
    }
}

/// Shore cut-off: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn chi<T: Scalar>(x: T) -> T {
    step01(x * 2.0 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::scalar::Series;

    #[test]
    fn chi_plateaus() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.0), 0.0);
        assert_eq!(chi(3.0), 0.0);
        assert!((chi(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_is_monotone() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = chi(0.5 + 0.5 * i as f64 / 1000.0);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn chi_series_matches_finite_differences() {
        let x = 0.7;
        let s = chi(Series::var(x));
        let h = 1e-5;
        let fd = (chi(x + h) - chi(x - h)) / (2.0 * h);
        assert!((s.derivative(1) - fd).abs() < 1e-7);
        let fd2 = (chi(x + h) - 2.0 * chi(x) + chi(x - h)) / (h * h);
        assert!((s.derivative(2) - fd2).abs() < 1e-3);
    }
}
