//! Dense symmetric and Hermitian eigensolvers.
//!
//! The real path is the classical pair of Householder tridiagonalization and
//! implicit-shift QL iteration; eigenvalue-only solves skip the transform
//! accumulation and the per-rotation vector updates, which makes them several
//! times cheaper, and parameter scans lean on that.
//!
//! A complex Hermitian matrix `H = A + iB` is solved through the real
//! symmetric embedding
//!
//! ```text
//! [ A  -B ]
//! [ B   A ]   ∈ ℝ^{2d×2d},
//! ```
//!
//! whose spectrum is that of `H` with every eigenvalue doubled: the embedded
//! eigenspace for λ is the realification {(Re w, Im w) : Hw = λw}. Sorted
//! eigenvalues are therefore consumed in consecutive pairs (asserted to agree
//! to rounding) and embedded vectors map back through `(x, y) ↦ x + iy`.
//! Within a degenerate cluster two embedded columns can map to the same
//! complex direction, so the map is followed by a pivoted Gram-Schmidt pass
//! over the cluster's candidates.

use num_complex::Complex;

use crate::scalar::{flt, Scalar};
use crate::{Error, Result};

/// Sorted eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, column-major: column `j` starts at `j*d`.
    pub vectors: Option<Vec<T>>,
}

impl<T: Scalar> SymmetricEigen<T> {
    /// Eigenvector for `values[j]`.
    ///
    /// Panics if vectors were not requested.
    pub fn vector(&self, j: usize) -> &[T] {
        let d = self.values.len();
        &self.vectors.as_ref().expect("eigenvectors were not computed")[j * d..(j + 1) * d]
    }
}

/// Sorted eigendecomposition of a complex Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Eigenvalues in ascending order (real by Hermiticity).
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, column-major: column `j` starts at `j*d`.
    pub vectors: Option<Vec<Complex<T>>>,
}

impl<T: Scalar> HermitianEigen<T> {
    /// Eigenvector for `values[j]`.
    ///
    /// Panics if vectors were not requested.
    pub fn vector(&self, j: usize) -> &[Complex<T>] {
        let d = self.values.len();
        &self.vectors.as_ref().expect("eigenvectors were not computed")[j * d..(j + 1) * d]
    }
}

/// Fortran-style transfer of sign: `|a|` carrying the sign of `b`.
fn sign_of<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigendecomposition of a real symmetric matrix in row-major flat storage.
///
/// The matrix is checked against its transpose and then symmetrized exactly,
/// so rounding-level asymmetry from the caller is absorbed rather than
/// amplified.
pub fn symmetric_eigen<T: Scalar>(
    matrix: &[T],
    d: usize,
    want_vectors: bool,
) -> Result<SymmetricEigen<T>> {
    assert!(d >= 1, "matrix dimension must be positive");
    assert_eq!(matrix.len(), d * d, "flat matrix has wrong length");

    let mut max_abs = T::zero();
    let mut defect = T::zero();
    for i in 0..d {
        for j in 0..d {
            max_abs = max_abs.max(matrix[i * d + j].abs());
            defect = defect.max((matrix[i * d + j] - matrix[j * d + i]).abs());
        }
    }
    let tol = hermiticity_tol(max_abs);
    if defect > tol {
        return Err(Error::HermiticityViolation {
            defect: defect.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut a = matrix.to_vec();
    let half = T::one() / flt(2.0);
    for i in 0..d {
        for j in 0..i {
            let m = (a[i * d + j] + a[j * d + i]) * half;
            a[i * d + j] = m;
            a[j * d + i] = m;
        }
    }

    let mut diag = vec![T::zero(); d];
    let mut off = vec![T::zero(); d];
    tridiagonalize(&mut a, d, &mut diag, &mut off, want_vectors);
    ql_implicit(&mut diag, &mut off, d, want_vectors.then_some(&mut a[..]))?;

    let vectors = want_vectors.then(|| {
        // Transpose-free column extraction: `a` holds vectors in columns of
        // the row-major layout, re-pack as flat column-major.
        let mut cols = vec![T::zero(); d * d];
        for j in 0..d {
            for i in 0..d {
                cols[j * d + i] = a[i * d + j];
            }
        }
        cols
    });

    let mut out = SymmetricEigen {
        values: diag,
        vectors,
    };
    sort_ascending(&mut out.values, out.vectors.as_deref_mut(), d);
    Ok(out)
}

/// Eigendecomposition of a complex Hermitian matrix in row-major flat storage.
///
/// When every imaginary part is exactly zero the solve runs entirely in real
/// arithmetic on the original dimension, which is roughly eight times cheaper
/// than the embedding.
pub fn hermitian_eigen<T: Scalar>(
    matrix: &[Complex<T>],
    d: usize,
    want_vectors: bool,
) -> Result<HermitianEigen<T>> {
    assert!(d >= 1, "matrix dimension must be positive");
    assert_eq!(matrix.len(), d * d, "flat matrix has wrong length");

    let mut max_abs = T::zero();
    let mut defect = T::zero();
    for i in 0..d {
        for j in 0..d {
            let z = matrix[i * d + j];
            max_abs = max_abs.max(z.re.abs().max(z.im.abs()));
            let dz = z - matrix[j * d + i].conj();
            defect = defect.max(dz.re.abs().max(dz.im.abs()));
        }
    }
    let tol = hermiticity_tol(max_abs);
    if defect > tol {
        return Err(Error::HermiticityViolation {
            defect: defect.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }

    if matrix.iter().all(|z| z.im == T::zero()) {
        let real: Vec<T> = matrix.iter().map(|z| z.re).collect();
        let se = symmetric_eigen(&real, d, want_vectors)?;
        return Ok(HermitianEigen {
            values: se.values,
            vectors: se
                .vectors
                .map(|v| v.into_iter().map(|x| Complex::new(x, T::zero())).collect()),
        });
    }

    // Real symmetric embedding of H = A + iB.
    let n2 = 2 * d;
    let mut emb = vec![T::zero(); n2 * n2];
    for i in 0..d {
        for j in 0..d {
            let z = matrix[i * d + j];
            emb[i * n2 + j] = z.re;
            emb[(i + d) * n2 + (j + d)] = z.re;
            emb[i * n2 + (j + d)] = -z.im;
            emb[(i + d) * n2 + j] = z.im;
        }
    }
    let se = symmetric_eigen(&emb, n2, want_vectors)?;

    let scale = se
        .values
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let pair_tol = flt::<T>(1e-12).max(T::epsilon() * flt(100.0)) * T::one().max(scale);
    for i in 0..d {
        let gap = (se.values[2 * i + 1] - se.values[2 * i]).abs();
        assert!(
            gap <= pair_tol,
            "embedded eigenvalues failed to pair: gap {gap:?} at index {i}"
        );
    }
    let values: Vec<T> = (0..d).map(|i| se.values[2 * i]).collect();

    let vectors = if want_vectors {
        Some(extract_complex_vectors(&se, &values, d)?)
    } else {
        None
    };

    Ok(HermitianEigen { values, vectors })
}

fn hermiticity_tol<T: Scalar>(max_abs: T) -> T {
    flt::<T>(1e-12).max(T::epsilon() * flt(100.0)) * T::one().max(max_abs)
}

/// Maps embedded eigenvectors back to complex ones, one per eigenvalue pair,
/// re-orthonormalizing inside degenerate clusters.
fn extract_complex_vectors<T: Scalar>(
    se: &SymmetricEigen<T>,
    values: &[T],
    d: usize,
) -> Result<Vec<Complex<T>>> {
    let scale = values.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let cluster_tol = flt::<T>(1e-10).max(T::epsilon() * flt(1000.0)) * T::one().max(scale);

    let mut out = vec![Complex::new(T::zero(), T::zero()); d * d];
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        let m = end - start;

        // All 2m embedded columns of the cluster, mapped to complex space.
        let mut candidates: Vec<Vec<Complex<T>>> = (2 * start..2 * end)
            .map(|col| {
                let v = se.vector(col);
                (0..d).map(|i| Complex::new(v[i], v[i + d])).collect()
            })
            .collect();

        let mut chosen: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
        while chosen.len() < m {
            // Pivot: orthogonalize every remaining candidate and keep the one
            // with the largest residual. The candidates span the eigenspace,
            // so a usable pivot always exists.
            let mut best: Option<(usize, T, Vec<Complex<T>>)> = None;
            for (ci, cand) in candidates.iter().enumerate() {
                let mut v = cand.clone();
                for q in &chosen {
                    let proj = dot_conj(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= qi * proj;
                    }
                }
                let norm = vec_norm(&v);
                if best.as_ref().map_or(true, |(_, n, _)| norm > *n) {
                    best = Some((ci, norm, v));
                }
            }
            let (ci, norm, mut v) = best.expect("cluster has candidates");
            assert!(
                norm > flt::<T>(1e-6),
                "degenerate cluster produced no independent direction"
            );
            let inv = T::one() / norm;
            for z in &mut v {
                *z = z.scale(inv);
            }
            fix_phase(&mut v);
            chosen.push(v);
            candidates.swap_remove(ci);
        }

        for (offset, v) in chosen.into_iter().enumerate() {
            let col = start + offset;
            out[col * d..(col + 1) * d].copy_from_slice(&v);
        }
        start = end;
    }
    Ok(out)
}

fn dot_conj<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

fn vec_norm<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Rotates the global phase so the largest-magnitude entry is real positive;
/// ties go to the lowest index, keeping the output deterministic.
fn fix_phase<T: Scalar>(v: &mut [Complex<T>]) {
    let mut j = 0;
    let mut best = T::zero();
    for (i, z) in v.iter().enumerate() {
        let a = z.norm_sqr();
        if a > best {
            best = a;
            j = i;
        }
    }
    let r = v[j].norm();
    if r > T::zero() {
        let rot = v[j].conj().scale(T::one() / r);
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Householder reduction to tridiagonal form, in place.
///
/// On return `diag`/`off` hold the tridiagonal matrix (`off[0] = 0`). With
/// `want_vectors` the accumulated orthogonal transform is left in `a`;
/// without it `a` holds only scratch and must not be read.
fn tridiagonalize<T: Scalar>(
    a: &mut [T],
    n: usize,
    diag: &mut [T],
    off: &mut [T],
    want_vectors: bool,
) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == T::zero() {
                off[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                off[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f_acc = T::zero();
                for j in 0..=l {
                    if want_vectors {
                        a[j * n + i] = a[i * n + j] / h;
                    }
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    off[j] = g / h;
                    f_acc += off[j] * a[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = off[j] - hh * f;
                    off[j] = g;
                    for k in 0..=j {
                        a[j * n + k] = a[j * n + k] - (f * off[k] + g * a[i * n + k]);
                    }
                }
            }
        } else {
            off[i] = a[i * n + l];
        }
        diag[i] = h;
    }
    if want_vectors {
        diag[0] = T::zero();
    }
    off[0] = T::zero();
    for i in 0..n {
        if want_vectors {
            // diag[i] still holds the Householder norm h for step i and
            // doubles as the "was a reflector applied" flag.
            if diag[i] != T::zero() {
                for j in 0..i {
                    let mut g = T::zero();
                    for k in 0..i {
                        g += a[i * n + k] * a[k * n + j];
                    }
                    for k in 0..i {
                        a[k * n + j] = a[k * n + j] - g * a[k * n + i];
                    }
                }
            }
            diag[i] = a[i * n + i];
            a[i * n + i] = T::one();
            for j in 0..i {
                a[j * n + i] = T::zero();
                a[i * n + j] = T::zero();
            }
        } else {
            diag[i] = a[i * n + i];
        }
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix.
///
/// `z`, when present, must hold the orthogonal matrix accumulated by
/// [`tridiagonalize`]; rotations are applied to its columns so it ends as the
/// eigenvector matrix.
fn ql_implicit<T: Scalar>(
    diag: &mut [T],
    off: &mut [T],
    n: usize,
    mut z: Option<&mut [T]>,
) -> Result<()> {
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = T::zero();
    let eps = T::epsilon();
    const MAX_SWEEPS: usize = 64;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::EigenNonConvergence {
                    max_sweeps: MAX_SWEEPS,
                });
            }

            let mut g = (diag[l + 1] - diag[l]) / (off[l] + off[l]);
            let mut r = g.hypot(T::one());
            g = diag[m] - diag[l] + off[l] / (g + sign_of(r, g));
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == T::zero() {
                    // Recover from a vanishing rotation by deflating early.
                    diag[i + 1] -= p;
                    off[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + (c + c) * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = T::zero();
        }
    }
    Ok(())
}

/// Sorts eigenvalues ascending, permuting vector columns along.
fn sort_ascending<T: Scalar>(values: &mut [T], vectors: Option<&mut [T]>, d: usize) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));

    let sorted: Vec<T> = order.iter().map(|&i| values[i]).collect();
    values.copy_from_slice(&sorted);

    if let Some(v) = vectors {
        let mut cols = vec![T::zero(); v.len()];
        for (new, &old) in order.iter().enumerate() {
            cols[new * d..(new + 1) * d].copy_from_slice(&v[old * d..(old + 1) * d]);
        }
        v.copy_from_slice(&cols);
    }
}
