//! Dense Hermitian operator algebra on finite-dimensional site spaces.
//!
//! Everything downstream (spatial means, entropy surfaces, spectral counting,
//! commuting approximants) is built from the four primitives in this module:
//! validated Hermitian matrices, their spectral decompositions, Kronecker
//! embeddings into a window of chain sites, and functional calculus.
//!
//! The eigensolver is backed by `faer`'s dense self-adjoint decomposition; the
//! surrounding code enforces the validation, ordering, and tolerance contract
//! (ascending eigenvalues, unitarity and reconstruction checked against
//! `tol::EIG_RELATIVE * dim` in the test suite).

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub(crate) type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A validated Hermitian matrix.
///
/// Construction symmetrizes `(M + M*)/2` only when the hermiticity defect
/// (max-abs entry of `M - M*`) is within [`tol::HERMITICITY`]; larger
/// violations are rejected so that silently "fixing" a wrong input is
/// impossible. The diagonal is real after construction.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<C64>,
}

impl HermitianOperator {
    /// Validates and symmetrizes a square complex matrix.
    pub fn new(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dim = mat.nrows();
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        check_dense_cap(dim, tol::MAX_DENSE_DIM)?;
        if !all_finite(mat.as_ref()) {
            return Err(Error::NonFinite);
        }
        let defect = hermiticity_defect(mat.as_ref());
        if defect > tol::HERMITICITY {
            return Err(Error::NotHermitian {
                defect,
                tol: tol::HERMITICITY,
            });
        }
        Ok(Self::from_computed(mat))
    }

    /// Symmetrizes without a tolerance gate.
    ///
    /// Reserved for matrices that are Hermitian by construction (sums of
    /// embeddings, `U f(D) U*`, compressions `V* H V`), where the defect is
    /// rounding noise that may exceed the strict input tolerance at large
    /// dimension.
    pub(crate) fn from_computed(mat: Mat<C64>) -> Self {
        let dim = mat.nrows();
        let sym = Mat::from_fn(dim, dim, |i, j| (mat[(i, j)] + mat[(j, i)].conj()) * 0.5);
        Self { mat: sym }
    }

    /// Real diagonal matrix.
    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_dense_cap(diag.len(), tol::MAX_DENSE_DIM)?;
        let mat = Mat::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        });
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_real_diagonal(&vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub(crate) fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    /// Trace (real by hermiticity).
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_dim(rhs)?;
        let dim = self.dim();
        let mat = Mat::from_fn(dim, dim, |i, j| self.mat[(i, j)] + rhs.mat[(i, j)]);
        Ok(Self { mat })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_dim(rhs)?;
        let dim = self.dim();
        let mat = Mat::from_fn(dim, dim, |i, j| self.mat[(i, j)] - rhs.mat[(i, j)]);
        Ok(Self { mat })
    }

    pub fn scale(&self, s: f64) -> Self {
        let dim = self.dim();
        let mat = Mat::from_fn(dim, dim, |i, j| self.mat[(i, j)] * s);
        Self { mat }
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self.mat.as_ref())
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs(self.mat.as_ref())
    }

    fn check_same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(())
    }
}

/// Spectral decomposition `H = U diag(eigenvalues) U*` with eigenvalues in
/// ascending order and `U` unitary.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<C64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigenvectors.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(values) U*` for arbitrary real `values` (one per eigenvalue).
    pub fn recombine(&self, values: &[f64]) -> Result<HermitianOperator> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: self.dim(),
            });
        }
        let dim = self.dim();
        let u = self.eigenvectors.as_ref();
        // U * diag(values), scaling columns, then * U^*.
        let scaled = Mat::from_fn(dim, dim, |i, j| u[(i, j)] * values[j]);
        let out = &scaled * u.adjoint();
        Ok(HermitianOperator::from_computed(out))
    }

    /// Reconstructs the original operator; used by the residual audits.
    pub fn reconstruct(&self) -> Result<HermitianOperator> {
        self.recombine(&self.eigenvalues.clone())
    }

    /// Max-abs entry of `U* U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.eigenvectors.as_ref();
        let gram = u.adjoint() * u;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(expected, 0.0)).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let evd = h
        .mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eig(format!("{e:?}")))?;
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    let raw: Vec<f64> = (0..dim).map(|i| evd.S()[i].re).collect();
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eig("non-finite eigenvalue".into()));
    }
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw[k]).collect();
    let u = evd.U();
    let eigenvectors = Mat::from_fn(dim, dim, |i, j| u[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Operator norm = max |eigenvalue| (valid for Hermitian input only).
pub fn operator_norm(h: &HermitianOperator) -> Result<f64> {
    let dec = hermitian_eig(h)?;
    Ok(dec
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs())))
}

/// The Hermitian operator `i[A, B]` (the commutator of Hermitian matrices is
/// anti-Hermitian; multiplying by `i` restores hermiticity).
pub fn commutator_i(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let ab = a.mat() * b.mat();
    let ba = b.mat() * a.mat();
    let dim = a.dim();
    let i = C64::new(0.0, 1.0);
    let mat = Mat::from_fn(dim, dim, |r, c| (ab[(r, c)] - ba[(r, c)]) * i);
    Ok(HermitianOperator::from_computed(mat))
}

/// `|| [A, B] ||` via the spectrum of `i[A, B]`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    operator_norm(&commutator_i(a, b)?)
}

/// Functional calculus `f(H) = U diag(f(lambda)) U*`.
///
/// Non-finite values of `f` on the spectrum are rejected (`NaN` or infinite
/// results would silently poison every downstream norm).
pub fn apply_function<F: Fn(f64) -> f64>(h: &HermitianOperator, f: F) -> Result<HermitianOperator> {
    let dec = hermitian_eig(h)?;
    apply_function_to(&dec, f)
}

/// Functional calculus on an existing decomposition.
pub fn apply_function_to<F: Fn(f64) -> f64>(
    dec: &SpectralDecomposition,
    f: F,
) -> Result<HermitianOperator> {
    let mut values = Vec::with_capacity(dec.dim());
    for &lambda in dec.eigenvalues() {
        let v = f(lambda);
        if !v.is_finite() {
            return Err(Error::NonFiniteFunctionValue {
                value: v,
                at: lambda,
            });
        }
        values.push(v);
    }
    dec.recombine(&values)
}

/// Dimension of the window `[-n, n]`: `2n + 1` sites.
pub fn window_sites(n: u32) -> u32 {
    2 * n + 1
}

/// `d^(2n+1)` with overflow and cap checks.
///
/// `max_dim` lets callers lower the cap below the hard limit
/// [`tol::MAX_DENSE_DIM`]; it can never raise it.
pub fn window_dim(d: usize, n: u32, max_dim: usize) -> Result<usize> {
    let sites = window_sites(n);
    let mut dim: usize = 1;
    for _ in 0..sites {
        dim = dim
            .checked_mul(d)
            .ok_or(Error::DimensionOverflow { d, sites })?;
    }
    check_dense_cap(dim, max_dim.min(tol::MAX_DENSE_DIM))?;
    Ok(dim)
}

fn check_dense_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::DimensionCap {
            dim,
            cap,
            bytes: (dim as u128) * (dim as u128) * 16,
        })
    } else {
        Ok(())
    }
}

/// Embeds a one-site operator at `site` of the window `[-n, n]`:
/// `I ⊗ ... ⊗ A ⊗ ... ⊗ I` with `A` in slot `site + n` (sites ordered
/// left to right from `-n` to `n`).
pub fn embed_at_site(
    a: &HermitianOperator,
    site: i64,
    n: u32,
    max_dim: usize,
) -> Result<HermitianOperator> {
    embed_on_block(a, a.dim(), site, 1, n, max_dim)
}

/// Embeds an operator acting on `block_len` consecutive sites starting at
/// `left_site` into the window `[-n, n]`, tensoring with identities elsewhere.
pub fn embed_on_block(
    block: &HermitianOperator,
    d: usize,
    left_site: i64,
    block_len: u32,
    n: u32,
    max_dim: usize,
) -> Result<HermitianOperator> {
    let total = window_dim(d, n, max_dim)?;
    let mut mat = Mat::<C64>::zeros(total, total);
    add_embedded_block(&mut mat, block, d, left_site, block_len, n, 1.0)?;
    Ok(HermitianOperator { mat })
}

/// Accumulates `weight * (I ⊗ block ⊗ I)` into `dst` (dimension `d^(2n+1)`).
///
/// This is the inner loop of every mean-observable builder: it touches only
/// the `d^block_len * total` nonzero entries of the embedding instead of
/// materializing full Kronecker factors.
pub(crate) fn add_embedded_block(
    dst: &mut Mat<C64>,
    block: &HermitianOperator,
    d: usize,
    left_site: i64,
    block_len: u32,
    n: u32,
    weight: f64,
) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(
            "site dimension d must be >= 2".into(),
        ));
    }
    let right_site = left_site + i64::from(block_len) - 1;
    if block_len == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    if left_site < -i64::from(n) || right_site > i64::from(n) {
        if block_len == 1 {
            return Err(Error::SiteOutsideWindow { site: left_site, n });
        }
        return Err(Error::BlockOutsideWindow {
            left: left_site,
            right: right_site,
            n,
        });
    }
    let block_dim = checked_pow(d, block_len).ok_or(Error::DimensionOverflow {
        d,
        sites: block_len,
    })?;
    if block.dim() != block_dim {
        return Err(Error::DimensionMismatch {
            left: block.dim(),
            right: block_dim,
        });
    }
    // Number of sites strictly left / right of the block.
    let left_sites = (left_site + i64::from(n)) as u32;
    let right_sites = (i64::from(n) - right_site) as u32;
    let dl = checked_pow(d, left_sites).ok_or(Error::DimensionOverflow {
        d,
        sites: left_sites,
    })?;
    let dr = checked_pow(d, right_sites).ok_or(Error::DimensionOverflow {
        d,
        sites: right_sites,
    })?;
    debug_assert_eq!(dl * block_dim * dr, dst.nrows());
    let b = block.entries();
    for a in 0..dl {
        for u in 0..block_dim {
            for v in 0..block_dim {
                let entry = b[(u, v)] * weight;
                if entry == ZERO {
                    continue;
                }
                let row_base = (a * block_dim + u) * dr;
                let col_base = (a * block_dim + v) * dr;
                for r in 0..dr {
                    dst[(row_base + r, col_base + r)] += entry;
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn checked_pow(base: usize, exp: u32) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub(crate) fn all_finite(m: MatRef<'_, C64>) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return false;
            }
        }
    }
    true
}

/// Max-abs entry of `M - M*`.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

pub(crate) fn frobenius_norm(m: MatRef<'_, C64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// The Pauli matrix `sigma_x`.
pub fn pauli_x() -> HermitianOperator {
    let mut m = Mat::<C64>::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    m[(1, 0)] = C64::new(1.0, 0.0);
    HermitianOperator { mat: m }
}

/// The Pauli matrix `sigma_y`.
pub fn pauli_y() -> HermitianOperator {
    let mut m = Mat::<C64>::zeros(2, 2);
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    HermitianOperator { mat: m }
}

/// The Pauli matrix `sigma_z`.
pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[1.0, -1.0]).expect("static data")
}
