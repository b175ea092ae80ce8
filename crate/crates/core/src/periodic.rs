//! Real periodic functions on a uniform grid.
//!
//! A [`PeriodicFunction`] holds `N` samples of an `L`-periodic real function
//! at `x_j = jL/N` and is identified with its trigonometric interpolant
//!
//! ```text
//! s(x) = Σ_{|k| < N/2} ŝ_k e^{ikκx} + ŝ_{N/2} cos((N/2) κx),    κ = 2π/L,
//! ```
//!
//! so Fourier coefficients beyond the Nyquist index are zero by definition
//! and every derived quantity (mean, fluctuation norm, maximum, derivative)
//! refers to the interpolant. For the band-limited source terms this library
//! targets the interpolant and the underlying function agree to rounding once
//! `N` resolves the highest harmonic.
//!
//! Sample counts are powers of two (the transforms are radix-2) and at least
//! 8 so a parabolic peak is still bracketed by the grid. Two norm conventions
//! coexist in the stability criteria, differing by a factor of `L`:
//!
//! ```text
//! ‖f‖²_int  = ∫₀ᴸ f(x)² dx,        ‖f‖²_mean = (1/L) ∫₀ᴸ f(x)² dx,
//! ```
//!
//! and the grid sum evaluates both integrals exactly for trigonometric
//! polynomials below the Nyquist frequency.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::fft::Fft;
use crate::scalar::{flt, idx, neumaier_sum, Scalar};
use crate::{Error, Result};

/// Default sample count used by constructors that pick the grid themselves.
pub const DEFAULT_SAMPLES: usize = 256;

/// Normalization of the L² norm (and the inner products built on it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormConvention {
    /// `‖f‖² = ∫₀ᴸ f²`.
    Integral,
    /// `‖f‖² = (1/L) ∫₀ᴸ f²`.
    Mean,
}

impl fmt::Display for NormConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormConvention::Integral => write!(f, "integral"),
            NormConvention::Mean => write!(f, "mean"),
        }
    }
}

impl FromStr for NormConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integral" => Ok(NormConvention::Integral),
            "mean" => Ok(NormConvention::Mean),
            other => Err(Error::InvalidParameter {
                name: "convention",
                reason: format!("expected \"integral\" or \"mean\", got \"{other}\""),
            }),
        }
    }
}

/// An `L`-periodic real function, stored as uniform samples.
#[derive(Debug, Clone)]
pub struct PeriodicFunction<T> {
    samples: Vec<T>,
    period: T,
    /// Fourier coefficients of the samples in FFT bin order, scaled by 1/N.
    coeffs: OnceLock<Vec<Complex<T>>>,
}

impl<T: Scalar> PeriodicFunction<T> {
    /// Wraps samples taken at `x_j = j·period/len`.
    pub fn from_samples(samples: Vec<T>, period: T) -> Result<Self> {
        let n = samples.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidSampleCount { n });
        }
        if !(period.is_finite() && period > T::zero()) {
            return Err(Error::InvalidPeriod {
                period: period.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            samples,
            period,
            coeffs: OnceLock::new(),
        })
    }

    /// Samples `f` on the uniform grid of `n` points over one period.
    pub fn from_fn(f: impl Fn(T) -> T, period: T, n: usize) -> Result<Self> {
        let step = period / idx::<T>(n.max(1));
        let samples = (0..n).map(|j| f(step * idx(j))).collect();
        Self::from_samples(samples, period)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> T {
        self.period
    }

    /// Fundamental wavenumber `κ = 2π/L`.
    pub fn kappa(&self) -> T {
        (T::PI() + T::PI()) / self.period
    }

    /// Mean value `⟨s⟩ = (1/L) ∫₀ᴸ s`.
    pub fn mean(&self) -> T {
        neumaier_sum(self.samples.iter().copied()) / idx(self.len())
    }

    /// Zero-mean part `δs = s − ⟨s⟩`.
    ///
    /// The subtraction runs twice so the residual mean of the result is at
    /// the rounding floor rather than one ulp of `⟨s⟩` times the sample size.
    pub fn fluctuation(&self) -> Self {
        let m = self.mean();
        let mut samples: Vec<T> = self.samples.iter().map(|&x| x - m).collect();
        let residual = neumaier_sum(samples.iter().copied()) / idx(self.len());
        for x in &mut samples {
            *x -= residual;
        }
        Self {
            samples,
            period: self.period,
            coeffs: OnceLock::new(),
        }
    }

    /// Squared L² norm under the given convention.
    pub fn norm_sq(&self, convention: NormConvention) -> T {
        let mean_square = neumaier_sum(self.samples.iter().map(|&x| x * x)) / idx(self.len());
        match convention {
            NormConvention::Integral => mean_square * self.period,
            NormConvention::Mean => mean_square,
        }
    }

    /// Global maximum of the interpolant.
    ///
    /// Grid maxima locate the candidates; a golden-section pass between the
    /// neighbouring grid points then resolves the off-grid peak. Three
    /// candidates are refined because the true maximum can sit at a slightly
    /// lower grid sample than a competing peak.
    pub fn max_value(&self) -> T {
        let n = self.len();
        let s = &self.samples;
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&j| s[j] >= s[(j + n - 1) % n] && s[j] >= s[(j + 1) % n])
            .collect();
        peaks.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).expect("samples are finite"));
        peaks.truncate(3);

        let step = self.period / idx::<T>(n);
        let mut best = s.iter().copied().fold(s[0], T::max);
        for &j in &peaks {
            let center = step * idx::<T>(j);
            best = best.max(self.golden_max(center - step, center + step));
        }
        best
    }

    /// Maximizes the interpolant on `[a, b]` by golden-section search.
    fn golden_max(&self, mut a: T, mut b: T) -> T {
        let inv_phi = (flt::<T>(5.0).sqrt() - T::one()) / flt(2.0);
        let tol = flt::<T>(1e-10).max(T::epsilon() * self.period * flt(4.0));
        let mut c = b - (b - a) * inv_phi;
        let mut d = a + (b - a) * inv_phi;
        let mut fc = self.eval(c);
        let mut fd = self.eval(d);
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * inv_phi;
                fc = self.eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * inv_phi;
                fd = self.eval(d);
            }
        }
        fc.max(fd)
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    pub fn eval(&self, x: T) -> T {
        let n = self.len();
        let half = n / 2;
        let coeffs = self.coeffs();
        let kappa = self.kappa();
        let two = flt::<T>(2.0);

        let mut acc = coeffs[0].re;
        for (k, c) in coeffs.iter().enumerate().take(half).skip(1) {
            let (sin, cos) = (kappa * idx::<T>(k) * x).sin_cos();
            acc += two * (c.re * cos - c.im * sin);
        }
        // The Nyquist bin aliases ±N/2; representing it as a pure cosine
        // keeps the interpolant real.
        acc + coeffs[half].re * (kappa * idx::<T>(half) * x).cos()
    }

    /// Fourier coefficient `ŝ_k = (1/L) ∫₀ᴸ s(x) e^{-ikκx} dx` of the
    /// interpolant, for any signed index.
    ///
    /// Indices beyond the Nyquist frequency return zero. The returned values
    /// are Hermitian-symmetrized, so `coeff(-k)` is exactly the conjugate of
    /// `coeff(k)` even in the presence of rounding noise; downstream spectral
    /// matrices are then exactly Hermitian.
    pub fn coeff(&self, k: i64) -> Complex<T> {
        let n = self.len() as i64;
        let half = n / 2;
        let zero = Complex::new(T::zero(), T::zero());
        if k.abs() > half {
            return zero;
        }
        let coeffs = self.coeffs();
        if k.abs() == half {
            // The single stored Nyquist bin is split evenly across ±N/2.
            return Complex::new(coeffs[half as usize].re / flt(2.0), T::zero());
        }
        let pos = coeffs[k.rem_euclid(n) as usize];
        let neg = coeffs[(-k).rem_euclid(n) as usize];
        (pos + neg.conj()).scale(T::one() / flt(2.0))
    }

    /// Spectral derivative `s'`, as a function on the same grid.
    pub fn derivative(&self) -> Self {
        let n = self.len();
        let fft = Fft::new(n).expect("length was validated at construction");
        let mut spec = fft.forward_real(&self.samples);
        let kappa = self.kappa();
        for (k, bin) in spec.iter_mut().enumerate() {
            if k == n / 2 {
                // The Nyquist mode is an even cosine on this grid; its odd
                // derivative vanishes at every sample point.
                *bin = Complex::new(T::zero(), T::zero());
                continue;
            }
            let signed = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            let factor = Complex::new(T::zero(), kappa * flt(signed as f64));
            *bin *= factor;
        }
        fft.inverse_in_place(&mut spec);
        let samples = spec.into_iter().map(|z| z.re).collect();
        Self {
            samples,
            period: self.period,
            coeffs: OnceLock::new(),
        }
    }

    fn coeffs(&self) -> &[Complex<T>] {
        self.coeffs.get_or_init(|| {
            let n = self.len();
            let fft = Fft::new(n).expect("length was validated at construction");
            let mut bins = fft.forward_real(&self.samples);
            let scale = T::one() / idx::<T>(n);
            for b in &mut bins {
                *b = b.scale(scale);
            }
            bins
        })
    }
}
