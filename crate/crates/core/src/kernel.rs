//! Squared Euclidean distance and the Gaussian radial basis function
//! `k(x, y) = exp(-||x - y||^2 / (2 sigma^2))`.

use crate::error::{Error, Result};

/// Width of a Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernelParams {
    sigma: f64,
}

impl GaussianKernelParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "kernel width must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Kernel value for an already computed squared distance.
    #[inline]
    pub fn eval_sq(&self, sq_dist: f64) -> f64 {
        gaussian_from_sq(sq_dist, self.sigma)
    }
}

pub fn sq_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(sq_dist(x, y))
}

pub fn gaussian(x: &[f64], y: &[f64], p: GaussianKernelParams) -> Result<f64> {
    Ok(p.eval_sq(sq_euclidean(x, y)?))
}

/// Unchecked squared distance; callers guarantee equal lengths.
#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

#[inline]
pub(crate) fn gaussian_from_sq(sq_dist: f64, sigma: f64) -> f64 {
    (-sq_dist / (2.0 * sigma * sigma)).exp()
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: f64) -> GaussianKernelParams {
        GaussianKernelParams::new(s).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(sq_euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(sq_euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert!(matches!(
            sq_euclidean(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(gaussian(&[0.3, -1.0], &[0.3, -1.0], p(0.7)).unwrap(), 1.0);
        // ||x - y||^2 = 2 sigma^2 with sigma = 1
        let v = gaussian(&[0.0, 0.0], &[1.0, 1.0], p(1.0)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
        assert!(GaussianKernelParams::new(0.0).is_err());
        assert!(GaussianKernelParams::new(-1.0).is_err());
        assert!(GaussianKernelParams::new(f64::INFINITY).is_err());
    }

    #[test]
    fn width_limits() {
        let (x, y) = ([0.0, 1.0], [2.0, -1.0]);
        let mut last = 0.0;
        for i in -6..=12 {
            let s = 10f64.powf(i as f64 / 2.0);
            let v = gaussian(&x, &y, p(s)).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(gaussian(&x, &y, p(1e6)).unwrap() > 1.0 - 1e-11);
        assert_eq!(gaussian(&x, &y, p(1e-3)).unwrap(), 0.0);
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, 2)
    }

    proptest! {
        #[test]
        fn symmetric(x in vec2(), y in vec2(), s in 0.01f64..10.0) {
            prop_assert_eq!(sq_euclidean(&x, &y).unwrap(), sq_euclidean(&y, &x).unwrap());
            prop_assert_eq!(gaussian(&x, &y, p(s)).unwrap(), gaussian(&y, &x, p(s)).unwrap());
        }

        #[test]
        fn positive_and_bounded(x in vec2(), y in vec2(), s in 0.5f64..10.0) {
            let v = gaussian(&x, &y, p(s)).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
            if x != y {
                prop_assert!(v < 1.0 || sq_euclidean(&x, &y).unwrap() < 1e-15 * s * s);
            }
        }

        #[test]
        fn increasing_in_width(x in vec2(), y in vec2(), s in 0.5f64..5.0) {
            prop_assume!(sq_euclidean(&x, &y).unwrap() > 1e-3);
            prop_assert!(gaussian(&x, &y, p(s)).unwrap() < gaussian(&x, &y, p(s * 1.1)).unwrap());
        }

        #[test]
        fn rotation_invariant(x in vec2(), y in vec2(), angle in 0.0f64..std::f64::consts::TAU, s in 0.5f64..5.0) {
            let (c, sn) = (angle.cos(), angle.sin());
            let rot = |v: &[f64]| vec![c * v[0] - sn * v[1], sn * v[0] + c * v[1]];
            let a = gaussian(&x, &y, p(s)).unwrap();
            let b = gaussian(&rot(&x), &rot(&y), p(s)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
