//! Fourier-Galerkin discretization of the Bloch eigenvalue problem.
//!
//! Writing a perturbation as `e^{ipx} u(x)` with `u` sharing the period `L`
//! of the source and expanding `u(x) = Σ_m c_m e^{iκmx}` turns
//!
//! ```text
//! -λ u = [ s(x) - p² + 2ip ∂x + ∂xx ] u
//! ```
//!
//! into the Hermitian matrix eigenvalue problem `H c = λ c` with
//!
//! ```text
//! H_{mn} = (p + κm)² δ_{mn} - ŝ_{m-n},      m, n ∈ {-M, …, M}.
//! ```
//!
//! The decay rates λ are the eigenvalues of `H` in ascending order; the
//! steady state is linearly stable exactly when the smallest one, `λ₀₀`
//! (attained at `p = 0`), is nonnegative.
//!
//! Truncation at half-width `M` is self-validating: [`lambda00`] doubles `M`
//! until the eigenvalue stops moving and reports the final increment in a
//! [`ConvergenceCertificate`], so a returned value is accurate to the stated
//! tolerance or the call fails loudly. For even sources the matrix is real
//! symmetric and the solve runs in real arithmetic, which parameter scans
//! rely on.

use num_complex::Complex;
use rayon::prelude::*;

use crate::eigen::{hermitian_eigen, HermitianEigen};
use crate::periodic::PeriodicFunction;
use crate::scalar::{flt, Scalar};
use crate::{Error, Result};

/// Hard ceiling on the truncation half-width before a certificate fails.
pub const MAX_HALF_WIDTH: usize = 1024;

/// Default starting half-width for certified eigenvalue computations.
pub const DEFAULT_HALF_WIDTH: usize = 64;

fn certificate_tol<T: Scalar>() -> T {
    flt::<T>(1e-10).max(T::epsilon() * flt(100.0))
}

/// Truncated Bloch operator at one Bloch wavenumber.
#[derive(Debug, Clone)]
pub struct BlochMatrix<T> {
    /// Row-major entries, dimension `(2M+1) × (2M+1)`.
    entries: Vec<Complex<T>>,
    m: usize,
    p: T,
}

impl<T: Scalar> BlochMatrix<T> {
    /// Assembles the truncated operator for Bloch wavenumber `p` and
    /// half-width `m`.
    ///
    /// `p` must lie in the closed first Brillouin zone `[-κ/2, κ/2]` and `m`
    /// must be at least 4. Fourier coefficients of `s` beyond its Nyquist
    /// index are zero, so any `m` is admissible for any grid.
    pub fn assemble(s: &PeriodicFunction<T>, p: T, m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::TruncationTooSmall { m });
        }
        let kappa = s.kappa();
        let half_zone = kappa / flt(2.0);
        if p.abs() > half_zone * (T::one() + flt(1e-12)) {
            return Err(Error::OutsideBrillouinZone {
                p: p.to_f64().unwrap_or(f64::NAN),
                half_zone: half_zone.to_f64().unwrap_or(f64::NAN),
            });
        }

        // Gather ŝ_{-2M}..ŝ_{2M} once; the matrix is (anti)diagonal-constant
        // in the coefficient index.
        let mut coeffs: Vec<Complex<T>> = (-(2 * m as i64)..=2 * m as i64)
            .map(|k| s.coeff(k))
            .collect();

        // Even sources have real coefficients up to FFT rounding; snapping
        // the stray imaginary parts to zero lets the eigensolver take its
        // real symmetric path, which is roughly eight times cheaper.
        let max_abs = coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let max_im = coeffs
            .iter()
            .map(|c| c.im.abs())
            .fold(T::zero(), T::max);
        let snap_tol = max_abs.max(T::one()) * flt::<T>(1e-14).max(T::epsilon() * flt(100.0));
        if max_im <= snap_tol {
            for c in &mut coeffs {
                c.im = T::zero();
            }
        }

        let d = 2 * m + 1;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); d * d];
        for i in 0..d {
            let mi = i as i64 - m as i64;
            for j in 0..d {
                let mj = j as i64 - m as i64;
                let mut h = -coeffs[(mi - mj + 2 * m as i64) as usize];
                if i == j {
                    let freq = p + kappa * flt(mi as f64);
                    h += Complex::new(freq * freq, T::zero());
                }
                entries[i * d + j] = h;
            }
        }
        Ok(Self { entries, m, p })
    }

    /// Matrix dimension `2M + 1`.
    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }

    /// Truncation half-width `M`.
    pub fn half_width(&self) -> usize {
        self.m
    }

    /// Bloch wavenumber this operator was assembled at.
    pub fn bloch_wavenumber(&self) -> T {
        self.p
    }

    /// Row-major matrix entries.
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// All decay rates in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian_eigen(&self.entries, self.dim(), false)?.values)
    }

    /// Decay rates together with the Fourier coefficients of the modes.
    pub fn eigensystem(&self) -> Result<Eigensystem<T>> {
        let HermitianEigen { values, vectors } = hermitian_eigen(&self.entries, self.dim(), true)?;
        Ok(Eigensystem {
            values,
            vectors: vectors.expect("vectors were requested"),
            m: self.m,
        })
    }
}

/// Full eigendecomposition of one truncated Bloch operator.
///
/// Mode vectors are unit in ℓ², which for the underlying function means
/// `(1/L) ∫₀ᴸ |u|² = 1` by Parseval.
#[derive(Debug, Clone)]
pub struct Eigensystem<T> {
    /// Decay rates in ascending order.
    pub values: Vec<T>,
    /// Column-major eigenvectors of Fourier coefficients.
    vectors: Vec<Complex<T>>,
    m: usize,
}

impl<T: Scalar> Eigensystem<T> {
    pub fn half_width(&self) -> usize {
        self.m
    }

    /// Coefficient vector of band `band`, indexed by row `i = m + M`.
    pub fn vector(&self, band: usize) -> &[Complex<T>] {
        let d = 2 * self.m + 1;
        &self.vectors[band * d..(band + 1) * d]
    }

    /// Fourier coefficient `c_mode` of band `band`; zero outside the
    /// truncation window.
    pub fn coefficient(&self, band: usize, mode: i64) -> Complex<T> {
        if mode.abs() > self.m as i64 {
            return Complex::new(T::zero(), T::zero());
        }
        self.vector(band)[(mode + self.m as i64) as usize]
    }
}

/// Evidence that a reported eigenvalue has converged in the truncation.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceCertificate<T> {
    /// Final half-width the value was computed at.
    pub half_width: usize,
    /// `|λ(M) - λ(M/2)|` at the final doubling.
    pub last_increment: T,
    /// Threshold the increment was tested against.
    pub tol: T,
}

/// Least decay rate `λ₀₀` with its truncation certificate.
#[derive(Debug, Clone, Copy)]
pub struct Lambda00<T> {
    pub value: T,
    pub certificate: ConvergenceCertificate<T>,
}

/// Certified least eigenvalue of the Bloch operator at `p = 0`.
pub fn lambda00<T: Scalar>(s: &PeriodicFunction<T>) -> Result<Lambda00<T>> {
    lambda00_with(s, DEFAULT_HALF_WIDTH)
}

/// [`lambda00`] with an explicit starting half-width.
///
/// A smaller start saves a large constant factor in parameter scans over
/// smooth sources; the doubling loop still runs until the certificate tol
/// is met, so the start only trades speed, never accuracy.
pub fn lambda00_with<T: Scalar>(s: &PeriodicFunction<T>, initial_m: usize) -> Result<Lambda00<T>> {
    let (values, cert) = converged_bands(s, T::zero(), 1, initial_m)?;
    Ok(Lambda00 {
        value: values[0],
        certificate: cert,
    })
}

/// Doubles the half-width until the lowest `n_bands` eigenvalues at `p`
/// move by less than the certificate tolerance.
fn converged_bands<T: Scalar>(
    s: &PeriodicFunction<T>,
    p: T,
    n_bands: usize,
    initial_m: usize,
) -> Result<(Vec<T>, ConvergenceCertificate<T>)> {
    let tol = certificate_tol::<T>();
    let mut m = initial_m.max(4).max(n_bands).min(MAX_HALF_WIDTH / 2);
    let mut prev = BlochMatrix::assemble(s, p, m)?.eigenvalues()?;
    let mut last_increment = T::infinity();
    loop {
        let m2 = 2 * m;
        if m2 > MAX_HALF_WIDTH {
            return Err(Error::CertificateNonConvergence {
                m_cap: MAX_HALF_WIDTH,
                last_increment: last_increment.to_f64().unwrap_or(f64::NAN),
            });
        }
        let next = BlochMatrix::assemble(s, p, m2)?.eigenvalues()?;
        last_increment = prev
            .iter()
            .zip(&next)
            .take(n_bands)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        if last_increment < tol {
            return Ok((
                next[..n_bands].to_vec(),
                ConvergenceCertificate {
                    half_width: m2,
                    last_increment,
                    tol,
                },
            ));
        }
        m = m2;
        prev = next;
    }
}

/// Ground state at `p = 0`: the certified `λ₀₀` and the Fourier
/// coefficients of its mode.
#[derive(Debug, Clone)]
pub struct GroundMode<T> {
    pub lambda: Lambda00<T>,
    coefficients: Vec<Complex<T>>,
    m: usize,
}

impl<T: Scalar> GroundMode<T> {
    pub fn half_width(&self) -> usize {
        self.m
    }

    /// Coefficient vector `c_{-M}..c_M`, unit in ℓ².
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// Fourier coefficient `c_mode`; zero outside the truncation window.
    pub fn coefficient(&self, mode: i64) -> Complex<T> {
        if mode.abs() > self.m as i64 {
            return Complex::new(T::zero(), T::zero());
        }
        self.coefficients[(mode + self.m as i64) as usize]
    }
}

/// Certified ground mode of the Bloch operator at `p = 0`.
pub fn ground_mode<T: Scalar>(s: &PeriodicFunction<T>) -> Result<GroundMode<T>> {
    let lambda = lambda00(s)?;
    let m = lambda.certificate.half_width;
    let sys = BlochMatrix::assemble(s, T::zero(), m)?.eigensystem()?;
    debug_assert!(
        (sys.values[0] - lambda.value).abs() < flt::<T>(1e-9).max(T::epsilon() * flt(1e4)),
        "eigensystem and certified value disagree"
    );
    Ok(GroundMode {
        lambda,
        coefficients: sys.vector(0).to_vec(),
        m,
    })
}

/// Lowest bands of the Bloch operator over the first Brillouin zone.
#[derive(Debug, Clone)]
pub struct BandStructure<T> {
    /// Bloch wavenumbers, symmetric about zero.
    pub p_values: Vec<T>,
    /// `bands[b][i]` is the `b`-th decay rate at `p_values[i]`.
    pub bands: Vec<Vec<T>>,
    /// Largest truncation half-width any column required.
    pub half_width: usize,
}

impl<T: Scalar> BandStructure<T> {
    /// Global minimum over the lowest band, as `(p, λ)`.
    pub fn minimum(&self) -> (T, T) {
        let band = &self.bands[0];
        let mut at = 0;
        for (i, &v) in band.iter().enumerate() {
            if v < band[at] {
                at = i;
            }
        }
        (self.p_values[at], band[at])
    }

    /// Writes `p,band0,band1,…` rows; floats carry 17 significant digits so
    /// a read-back reproduces them exactly.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write!(w, "p")?;
        for b in 0..self.bands.len() {
            write!(w, ",band{b}")?;
        }
        writeln!(w)?;
        for (i, p) in self.p_values.iter().enumerate() {
            write!(w, "{:.16e}", p.to_f64().unwrap_or(f64::NAN))?;
            for band in &self.bands {
                write!(w, ",{:.16e}", band[i].to_f64().unwrap_or(f64::NAN))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Lowest `n_bands` decay rates at `n_p` evenly spaced Bloch wavenumbers
/// spanning `[-κ/2, κ/2]`.
///
/// `n_p` must be odd so `p = 0` (where the global minimum sits) is sampled
/// exactly. Columns converge independently and run in parallel.
pub fn band_structure<T: Scalar>(
    s: &PeriodicFunction<T>,
    n_bands: usize,
    n_p: usize,
) -> Result<BandStructure<T>> {
    if n_bands == 0 || n_bands > MAX_HALF_WIDTH {
        return Err(Error::InvalidBandCount {
            n_bands,
            max: MAX_HALF_WIDTH,
        });
    }
    if n_p < 3 || n_p % 2 == 0 {
        return Err(Error::InvalidZoneSampleCount { n_p });
    }

    let kappa = s.kappa();
    let p_values: Vec<T> = (0..n_p)
        .map(|i| {
            // (2i - (n_p-1)) / (2(n_p-1)) is exactly zero at the center.
            let num = 2 * i as i64 - (n_p as i64 - 1);
            kappa * flt::<T>(num as f64) / flt(2.0 * (n_p as f64 - 1.0))
        })
        .collect();

    // Warm the coefficient cache before fanning out.
    let _ = s.coeff(0);

    let columns: Result<Vec<(Vec<T>, ConvergenceCertificate<T>)>> = p_values
        .par_iter()
        .map(|&p| converged_bands(s, p, n_bands, DEFAULT_HALF_WIDTH))
        .collect();
    let columns = columns?;

    let half_width = columns
        .iter()
        .map(|(_, cert)| cert.half_width)
        .max()
        .unwrap_or(0);
    let mut bands = vec![vec![T::zero(); n_p]; n_bands];
    for (i, (vals, _)) in columns.into_iter().enumerate() {
        for (b, v) in vals.into_iter().enumerate() {
            bands[b][i] = v;
        }
    }

    Ok(BandStructure {
        p_values,
        bands,
        half_width,
    })
}
