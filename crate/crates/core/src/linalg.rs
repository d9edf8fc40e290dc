//! Dense complex matrix helpers shared by every other module.
//!
//! Composite indices are A-major: for a product space `A ⊗ B` the basis state
//! `|a⟩|b⟩` sits at `a * dim_b + b`, and `kron(x, y)` puts `x` on the left factor.

use faer::complex_native::c64;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Entries with modulus at or below this are skipped when fixing eigenvector phases.
const PHASE_EPS: f64 = 1e-10;
/// Eigenvalues closer than this are treated as tied when ordering eigenvectors.
const TIE_EPS: f64 = 1e-12;
/// Rounding scale for the lexicographic tie-break key.
const TIE_ROUND: f64 = 1e9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.kronecker(y)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// Projector `|v⟩⟨v|`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = ONE;
    v
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_distance(x: &CMatrix, y: &CMatrix) -> f64 {
    assert_eq!(x.shape(), y.shape(), "frobenius_distance: shape mismatch");
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Largest entrywise modulus of `x - y`.
pub fn max_abs_diff(x: &CMatrix, y: &CMatrix) -> f64 {
    assert_eq!(x.shape(), y.shape(), "max_abs_diff: shape mismatch");
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// `max_ij |m_ij - conj(m_ji)|`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max_ij |(U†U)_ij - δ_ij|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// `U ρ U†`.
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// `(U ⊗ V) M (U ⊗ V)†` without forming the Kronecker product.
pub fn conjugate_product(m: &CMatrix, u: &CMatrix, v: &CMatrix) -> CMatrix {
    let half = apply_product(m, u, v);
    apply_product(&half.adjoint(), u, v).adjoint()
}

/// `(U ⊗ V) M`: each column, viewed as a `d_U x d_V` matrix `X`, becomes `U X Vᵀ`.
fn apply_product(m: &CMatrix, u: &CMatrix, v: &CMatrix) -> CMatrix {
    let (du, dv) = (u.ncols(), v.ncols());
    let vt = v.transpose();
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, col) in m.column_iter().enumerate() {
        let x = CMatrix::from_row_slice(du, dv, col.as_slice());
        let y = u * x * &vt;
        for i in 0..du {
            for j in 0..dv {
                out[(i * dv + j, k)] = y[(i, j)];
            }
        }
    }
    out
}

/// Deterministic Hermitian eigendecomposition.
///
/// Eigenvalues come back in descending order. Every eigenvector has its first
/// entry of modulus above `1e-10` rotated to be real and positive. Runs of tied
/// eigenvalues are ordered by a descending lexicographic comparison of their
/// rounded `(re, im)` entries.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    assert!(h.is_square(), "eigh: matrix must be square");
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let mut cols = hermitian_eigenpairs(h);
    for (_, v) in cols.iter_mut() {
        fix_phase(v);
    }
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cols[end - 1].0 - cols[end].0 <= TIE_EPS {
            end += 1;
        }
        if end - start > 1 {
            cols[start..end].sort_by_key(|col| std::cmp::Reverse(tie_key(&col.1)));
        }
        start = end;
    }

    let values = cols.iter().map(|(l, _)| *l).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, (_, v)) in cols.iter().enumerate() {
        vectors.set_column(k, v);
    }
    (values, vectors)
}

/// Eigenvalues only, descending.
pub fn eigvalsh(h: &CMatrix) -> Vec<f64> {
    let mut vals = to_faer(h).selfadjoint_eigenvalues(faer::Side::Lower);
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// The Hermitian part of `h` as a faer matrix.
fn to_faer(h: &CMatrix) -> faer::Mat<c64> {
    faer::Mat::from_fn(h.nrows(), h.ncols(), |i, j| {
        let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        c64::new(z.re, z.im)
    })
}

/// Eigenpairs of a Hermitian matrix. nalgebra's solvers are avoided here:
/// the complex one returns wrong eigenvectors for some inputs, and the real
/// one stalls on matrices with many entries near `1e-20`.
fn hermitian_eigenpairs(h: &CMatrix) -> Vec<(f64, CVector)> {
    let n = h.nrows();
    let eig = to_faer(h).selfadjoint_eigendecomposition(faer::Side::Lower);
    let (u, s) = (eig.u(), eig.s().column_vector());
    (0..n)
        .map(|k| {
            let v = CVector::from_fn(n, |i, _| {
                let z = u.read(i, k);
                c(z.re, z.im)
            });
            (s.read(k).re, v)
        })
        .collect()
}

/// Rotate `v` so that its first non-negligible entry is real and positive.
pub fn fix_phase(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > PHASE_EPS).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

fn tie_key(v: &CVector) -> Vec<i64> {
    v.iter()
        .flat_map(|z| {
            [
                (z.re * TIE_ROUND).round() as i64,
                (z.im * TIE_ROUND).round() as i64,
            ]
        })
        .collect()
}

/// Build a Hermitian `k x k` matrix from `k²` reals: the diagonal first, then
/// `(re, im)` pairs for each strictly-upper entry in row-major order.
pub fn hermitian_from_params(k: usize, params: &[f64]) -> CMatrix {
    assert_eq!(
        params.len(),
        k * k,
        "hermitian_from_params: need k² parameters"
    );
    let mut h = CMatrix::zeros(k, k);
    for i in 0..k {
        h[(i, i)] = real(params[i]);
    }
    let mut p = k;
    for i in 0..k {
        for j in (i + 1)..k {
            let z = c(params[p], params[p + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            p += 2;
        }
    }
    h
}

/// `exp(i H)` for Hermitian `H` (Padé scaling and squaring).
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    h.map(|z| z * Complex64::i()).exp()
}

/// `exp(i H(params))` with `H` built by [`hermitian_from_params`].
pub fn unitary_from_params(k: usize, params: &[f64]) -> CMatrix {
    if k == 1 {
        return CMatrix::from_element(1, 1, c(params[0].cos(), params[0].sin()));
    }
    expi_hermitian(&hermitian_from_params(k, params))
}

/// Number of real parameters for an `n x n` unitary.
pub fn unitary_param_count(n: usize) -> usize {
    n * n
}

/// Number of real parameters for an isometry from `r` into `n` dimensions.
pub fn isometry_param_count(n: usize, r: usize) -> usize {
    r * r + 2 * r * (n - r)
}

/// Isometry `r -> n` as the first `r` columns of `base · exp(i H)`, where the
/// generator `H = [[X, Y†], [Y, 0]]` only couples the first `r` coordinates
/// with the rest. `X` is `r x r` Hermitian, `Y` is a complex `(n - r) x r` block.
/// Zero parameters reproduce the first `r` columns of `base`.
///
/// With the thin QR factorization `Y = Q R`, the subspace `C^r ⊕ range(Q)` is
/// invariant under `H`, so the exponential is taken of the small matrix
/// `[[X, R†], [R, 0]]` and mapped back through `Q`.
pub fn isometry_from_params(base: &CMatrix, r: usize, params: &[f64]) -> CMatrix {
    let n = base.nrows();
    assert!(r <= n && base.is_square());
    assert_eq!(params.len(), isometry_param_count(n, r));
    let x = hermitian_from_params(r, &params[..r * r]);
    if r == n {
        return base * expi_hermitian(&x);
    }
    let mut y = CMatrix::zeros(n - r, r);
    let mut p = r * r;
    for i in 0..(n - r) {
        for j in 0..r {
            y[(i, j)] = c(params[p], params[p + 1]);
            p += 2;
        }
    }
    let qr = y.qr();
    let q = qr.q();
    let rr = qr.r();
    let s = q.ncols();
    let mut small = CMatrix::zeros(r + s, r + s);
    small.view_mut((0, 0), (r, r)).copy_from(&x);
    small.view_mut((r, 0), (s, r)).copy_from(&rr);
    small.view_mut((0, r), (r, s)).copy_from(&rr.adjoint());
    let e = expi_hermitian(&small);
    let mut cols = CMatrix::zeros(n, r);
    cols.view_mut((0, 0), (r, r))
        .copy_from(&e.view((0, 0), (r, r)));
    cols.view_mut((r, 0), (n - r, r))
        .copy_from(&(&q * e.view((r, 0), (s, r))));
    base * cols
}

/// Complete the orthonormal columns of `w` (`n x r`) to an `n x n` unitary
/// whose first `r` columns are exactly `w`.
pub fn complete_to_unitary(w: &CMatrix) -> CMatrix {
    let (n, r) = w.shape();
    let mut cols: Vec<CVector> = (0..r).map(|k| w.column(k).into_owned()).collect();
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = basis_vector(n, k);
        for _ in 0..2 {
            for u in &cols {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / real(norm));
        }
    }
    let mut out = CMatrix::zeros(n, n);
    for (k, v) in cols.iter().enumerate() {
        out.set_column(k, v);
    }
    out
}

/// Modified Gram–Schmidt on the columns of `m`. Returns `None` when the columns
/// are numerically dependent.
pub fn gram_schmidt(m: &CMatrix) -> Option<CMatrix> {
    let mut q = m.clone();
    for k in 0..q.ncols() {
        for j in 0..k {
            let qj = q.column(j).into_owned();
            let overlap = qj.dotc(&q.column(k));
            let mut col = q.column_mut(k);
            col -= qj * overlap;
        }
        let norm = q.column(k).norm();
        if norm < 1e-12 {
            return None;
        }
        q.column_mut(k).unscale_mut(norm);
    }
    Some(q)
}

/// Sum of `|m_ij|` over `i != j`.
pub fn offdiag_l1(m: &CMatrix) -> f64 {
    let mut total = 0.0;
    for (j, col) in m.column_iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            if i != j {
                total += z.norm();
            }
        }
    }
    total
}
