//! Radix-2 fast Fourier transform.
//!
//! The forward transform computes the unnormalized DFT
//!
//! ```text
//! X_k = Σ_{j=0}^{n-1} x_j exp(-2πi jk / n),
//! ```
//!
//! and the inverse applies the conjugate kernel together with the 1/n factor,
//! so `inverse(forward(x)) = x`. Lengths are restricted to powers of two; the
//! iterative Cooley-Tukey butterfly needs no scratch allocation and the
//! twiddle factors are cached per plan, which matters because spectral
//! differentiation re-runs transforms of the same length many times.

use num_complex::Complex;

use crate::scalar::{idx, Scalar};
use crate::{Error, Result};

/// Transform plan for one fixed length.
#[derive(Debug, Clone)]
pub struct Fft<T> {
    n: usize,
    /// `exp(-2πi k / n)` for `k` in `0..n/2`.
    twiddles: Vec<Complex<T>>,
}

impl<T: Scalar> Fft<T> {
    /// Plans a transform of length `n`, which must be a power of two.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("transform length must be a power of two, got {n}"),
            });
        }
        let two_pi = T::PI() + T::PI();
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -two_pi * idx::<T>(k) / idx::<T>(n);
                Complex::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { n, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward DFT, in place.
    ///
    /// Panics if `data.len()` differs from the planned length.
    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        self.transform(data, false);
    }

    /// Inverse DFT, in place; applies the 1/n normalization.
    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        self.transform(data, true);
        let scale = T::one() / idx::<T>(self.n);
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }

    /// Forward DFT of real samples.
    pub fn forward_real(&self, samples: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<Complex<T>> = samples
            .iter()
            .map(|&x| Complex::new(x, T::zero()))
            .collect();
        self.forward_in_place(&mut data);
        data
    }

    fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n, "data length does not match the plan");
        if n == 1 {
            return;
        }

        // Decimation in time: permute into bit-reversed order first.
        let log2n = n.trailing_zeros();
        for i in 0..n {
            let j = (i.reverse_bits() >> (usize::BITS - log2n)) as usize;
            if i < j {
                data.swap(i, j);
            }
        }

        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev(data: &[Complex<f64>], expected: impl Fn(usize) -> Complex<f64>) -> f64 {
        data.iter()
            .enumerate()
            .map(|(k, z)| (z - expected(k)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fft::<f64>::new(12).is_err());
        assert!(Fft::<f64>::new(0).is_err());
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let fft = Fft::<f64>::new(16).unwrap();
        let mut data = vec![Complex::new(0.0, 0.0); 16];
        data[0] = Complex::new(1.0, 0.0);
        fft.forward_in_place(&mut data);
        assert!(max_dev(&data, |_| Complex::new(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn cosine_concentrates_on_conjugate_pair() {
        let n = 64;
        let fft = Fft::<f64>::new(n).unwrap();
        let samples: Vec<f64> = (0..n)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let spectrum = fft.forward_real(&samples);
        let half = n as f64 / 2.0;
        let dev = max_dev(&spectrum, |k| {
            if k == 1 || k == n - 1 {
                Complex::new(half, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(dev < 1e-12, "dev = {dev:e}");
    }

    #[test]
    fn round_trip_recovers_input() {
        let n = 256;
        let fft = Fft::<f64>::new(n).unwrap();
        let original: Vec<Complex<f64>> = (0..n)
            .map(|j| {
                let t = j as f64 * 0.7311;
                Complex::new(t.sin() + 0.3 * (3.1 * t).cos(), (1.3 * t).sin())
            })
            .collect();
        let mut data = original.clone();
        fft.forward_in_place(&mut data);
        fft.inverse_in_place(&mut data);
        let dev = data
            .iter()
            .zip(&original)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12, "dev = {dev:e}");
    }

    #[test]
    fn single_point_transform_is_identity() {
        let fft = Fft::<f64>::new(1).unwrap();
        let mut data = vec![Complex::new(2.5, -1.0)];
        fft.forward_in_place(&mut data);
        assert_eq!(data[0], Complex::new(2.5, -1.0));
    }

    #[test]
    fn matches_direct_dft() {
        let n = 32;
        let fft = Fft::<f64>::new(n).unwrap();
        let input: Vec<Complex<f64>> = (0..n)
            .map(|j| Complex::new((j as f64).cos(), (2.0 * j as f64).sin()))
            .collect();
        let mut fast = input.clone();
        fft.forward_in_place(&mut fast);
        for k in 0..n {
            let mut direct = Complex::new(0.0, 0.0);
            for (j, z) in input.iter().enumerate() {
                let angle = -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
                direct += z * Complex::new(angle.cos(), angle.sin());
            }
            assert!((fast[k] - direct).norm() < 1e-11);
        }
    }
}
