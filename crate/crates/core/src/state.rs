//! Validated density matrices on products of subsystems.

use crate::error::{QccError, Result, Violation};
use crate::linalg::{self, CMatrix, CVector};

/// Absolute tolerance for the Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-9;
/// Rank threshold used by [`DensityMatrix::purify`].
pub const RANK_TOL: f64 = 1e-10;
/// Negative eigenvalues above this are floating-point noise and left alone.
pub const CLAMP_FLOOR: f64 = -1e-12;

/// Which side of the A|B cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

/// A density matrix on `d_1 ⊗ ... ⊗ d_n` with an optional A|B cut.
///
/// `split = Some(b)` means subsystems `0..b` form A and `b..n` form B.
/// Subsystems of dimension one are allowed; they stand for trivial ancillas.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
    dims: Vec<usize>,
    split: Option<usize>,
    clamped: bool,
}

/// Residuals measured by [`check_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

/// Measure how far `data` is from a density matrix.
pub fn check_density(data: &CMatrix) -> DensityReport {
    let hermiticity = linalg::hermiticity_residual(data);
    let trace_error = (linalg::trace(data) - linalg::ONE).norm();
    let min_eigenvalue = linalg::eigvalsh(data).last().copied().unwrap_or(0.0);
    DensityReport {
        hermiticity,
        trace_error,
        min_eigenvalue,
    }
}

fn check_dims(n: usize, dims: &[usize], split: Option<usize>) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(QccError::InvalidArgument(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let product: usize = dims.iter().product();
    if product != n {
        return Err(QccError::InvalidState(vec![Violation::DimMismatch {
            expected: product,
            found: n,
        }]));
    }
    if let Some(b) = split {
        if b == 0 || b >= dims.len() {
            return Err(QccError::InvalidArgument(format!(
                "bipartition marker {b} must lie strictly inside 1..{}",
                dims.len()
            )));
        }
    }
    Ok(())
}

impl DensityMatrix {
    /// Validate `data` as a density matrix on `dims` with cut `split`.
    ///
    /// Every violated invariant is reported with its residual. Eigenvalues in
    /// `[-1e-9, -1e-12)` are accepted, clamped to zero and flagged (see
    /// [`Self::was_clamped`]); smaller negative values are left untouched so
    /// that valid input is stored bit for bit.
    pub fn new(data: CMatrix, dims: Vec<usize>, split: Option<usize>) -> Result<Self> {
        if !data.is_square() {
            return Err(QccError::InvalidState(vec![Violation::DimMismatch {
                expected: data.nrows(),
                found: data.ncols(),
            }]));
        }
        check_dims(data.nrows(), &dims, split)?;
        let report = check_density(&data);
        let mut violations = Vec::new();
        if report.hermiticity > STATE_TOL {
            violations.push(Violation::NonHermitian(report.hermiticity));
        }
        if report.trace_error > STATE_TOL {
            violations.push(Violation::TraceNotOne(report.trace_error));
        }
        // Eigenvalues of a non-Hermitian matrix say nothing about positivity.
        if report.hermiticity <= STATE_TOL && report.min_eigenvalue < -STATE_TOL {
            violations.push(Violation::NotPsd(report.min_eigenvalue));
        }
        if !violations.is_empty() {
            return Err(QccError::InvalidState(violations));
        }
        if report.min_eigenvalue < CLAMP_FLOOR {
            let (vals, vecs) = linalg::eigh(&data);
            let lam =
                CVector::from_iterator(vals.len(), vals.iter().map(|&l| linalg::real(l.max(0.0))));
            let clamped = &vecs * CMatrix::from_diagonal(&lam) * vecs.adjoint();
            let norm = linalg::trace(&clamped).re;
            return Ok(Self {
                data: clamped.unscale(norm),
                dims,
                split,
                clamped: true,
            });
        }
        Ok(Self {
            data,
            dims,
            split,
            clamped: false,
        })
    }

    /// Bipartite state with A = `dims_a`, B = `dims_b`.
    pub fn bipartite(data: CMatrix, dims_a: &[usize], dims_b: &[usize]) -> Result<Self> {
        let dims: Vec<usize> = dims_a.iter().chain(dims_b).copied().collect();
        Self::new(data, dims, Some(dims_a.len()))
    }

    /// Construct without validation. Callers guarantee the invariants hold.
    pub(crate) fn from_parts(data: CMatrix, dims: Vec<usize>, split: Option<usize>) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self {
            data,
            dims,
            split,
            clamped: false,
        }
    }

    pub fn pure(psi: &CVector, dims: Vec<usize>, split: Option<usize>) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-14 {
            return Err(QccError::InvalidArgument("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        check_dims(v.len(), &dims, split)?;
        Ok(Self::from_parts(linalg::projector(&v), dims, split))
    }

    pub fn maximally_mixed(dims: Vec<usize>, split: Option<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        check_dims(n, &dims, split)?;
        Ok(Self::from_parts(
            linalg::identity(n).unscale(n as f64),
            dims,
            split,
        ))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn split(&self) -> Option<usize> {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// True when validation clamped slightly negative eigenvalues.
    pub fn was_clamped(&self) -> bool {
        self.clamped
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    fn require_split(&self) -> Result<usize> {
        self.split.ok_or(QccError::NotBipartite)
    }

    /// Subsystem indices on the given side of the cut.
    pub fn side_indices(&self, side: Side) -> Result<Vec<usize>> {
        let b = self.require_split()?;
        Ok(match side {
            Side::A => (0..b).collect(),
            Side::B => (b..self.dims.len()).collect(),
        })
    }

    /// Total dimension of one side of the cut.
    pub fn side_dim(&self, side: Side) -> Result<usize> {
        Ok(self
            .side_indices(side)?
            .iter()
            .map(|&k| self.dims[k])
            .product())
    }

    /// Same matrix viewed on a different factorization of the same dimension.
    pub fn reshape(&self, dims: Vec<usize>, split: Option<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims, split)?;
        Ok(Self {
            dims,
            split,
            ..self.clone()
        })
    }

    /// Same matrix with a different cut.
    pub fn with_split(&self, split: Option<usize>) -> Result<Self> {
        check_dims(self.dim(), &self.dims, split)?;
        Ok(Self {
            split,
            ..self.clone()
        })
    }

    /// Regroup as a plain two-subsystem state `D_A ⊗ D_B`.
    pub fn as_two_party(&self) -> Result<Self> {
        let da = self.side_dim(Side::A)?;
        let db = self.side_dim(Side::B)?;
        Ok(Self::from_parts(self.data.clone(), vec![da, db], Some(1)))
    }

    /// `self ⊗ other`; dims concatenate and the cut falls between the two factors.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        let split = Some(self.dims.len());
        Self::from_parts(linalg::kron(&self.data, &other.data), dims, split)
    }

    /// Trace out the subsystems listed in `drop`.
    pub fn partial_trace(&self, drop: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        for &k in drop {
            if k >= n {
                return Err(QccError::BadSubsystemIndex { index: k, count: n });
            }
        }
        let keep: Vec<usize> = (0..n).filter(|k| !drop.contains(k)).collect();
        if keep.is_empty() {
            return Err(QccError::InvalidArgument(
                "cannot trace out every subsystem".into(),
            ));
        }
        let data = partial_trace_matrix(&self.data, &self.dims, &keep);
        let dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let split = self.split.and_then(|b| {
            let kept_a = keep.iter().filter(|&&k| k < b).count();
            (kept_a > 0 && kept_a < keep.len()).then_some(kept_a)
        });
        Ok(Self::from_parts(data, dims, split))
    }

    /// Reduced state of one side of the cut.
    pub fn marginal(&self, side: Side) -> Result<DensityMatrix> {
        let other = match side {
            Side::A => Side::B,
            Side::B => Side::A,
        };
        self.partial_trace(&self.side_indices(other)?)
    }

    /// `U ρ U†` with `U` acting on the product of the listed subsystems
    /// (in the listed order) and identity elsewhere.
    pub fn apply_unitary(&self, u: &CMatrix, on: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        for &k in on {
            if k >= n {
                return Err(QccError::BadSubsystemIndex { index: k, count: n });
            }
        }
        let target: usize = on.iter().map(|&k| self.dims[k]).product();
        if u.nrows() != target || !u.is_square() {
            return Err(QccError::DimMismatch {
                expected: target,
                found: u.nrows(),
            });
        }
        let res = linalg::unitarity_residual(u);
        if res > STATE_TOL {
            return Err(QccError::NotUnitary(res));
        }
        let full = embed_operator(u, &self.dims, on);
        Ok(Self {
            data: linalg::conjugate(&full, &self.data),
            ..self.clone()
        })
    }

    /// Reorder subsystems: subsystem `order[k]` of `self` becomes subsystem `k`.
    pub fn permute(&self, order: &[usize], split: Option<usize>) -> Result<DensityMatrix> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(QccError::InvalidArgument(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let perm = permutation_indices(&self.dims, order);
        let d = self.dim();
        let data = CMatrix::from_fn(d, d, |i, j| self.data[(perm[i], perm[j])]);
        let dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        check_dims(d, &dims, split)?;
        Ok(Self::from_parts(data, dims, split))
    }

    /// Exchange the A and B halves; requires `dim(A) == dim(B)`.
    /// The result keeps the cut in the same place, so the dims list becomes B's then A's.
    pub fn swap_bipartite(&self) -> Result<DensityMatrix> {
        let da = self.side_dim(Side::A)?;
        let db = self.side_dim(Side::B)?;
        if da != db {
            return Err(QccError::DimMismatch {
                expected: da,
                found: db,
            });
        }
        let b = self.require_split()?;
        let data = swap_halves(&self.data, da);
        let dims: Vec<usize> = self.dims[b..]
            .iter()
            .chain(&self.dims[..b])
            .copied()
            .collect();
        let split = Some(self.dims.len() - b);
        Ok(Self::from_parts(data, dims, split))
    }

    /// Purification on `system ⊗ ancilla` with ancilla dimension equal to the
    /// numerical rank (threshold `1e-10`). The ancilla is appended as the last
    /// subsystem and the original cut is kept.
    pub fn purify(&self) -> Purification {
        let (vals, vecs) = linalg::eigh(&self.data);
        let rank = vals.iter().filter(|&&l| l > RANK_TOL).count().max(1);
        let d = self.dim();
        let mut psi = CVector::zeros(d * rank);
        for k in 0..rank {
            let w = vals[k].max(0.0).sqrt();
            for i in 0..d {
                psi[i * rank + k] += vecs[(i, k)] * w;
            }
        }
        let norm = psi.norm();
        psi.unscale_mut(norm);
        let mut dims = self.dims.clone();
        dims.push(rank);
        Purification {
            vector: psi,
            dims,
            split: self.split,
            ancilla_dim: rank,
        }
    }
}

/// Pure state on `system ⊗ ancilla` returned by [`DensityMatrix::purify`].
#[derive(Debug, Clone)]
pub struct Purification {
    pub vector: CVector,
    pub dims: Vec<usize>,
    pub split: Option<usize>,
    pub ancilla_dim: usize,
}

impl Purification {
    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_parts(linalg::projector(&self.vector), self.dims.clone(), None)
    }

    /// Trace out the ancilla.
    pub fn reduced(&self) -> DensityMatrix {
        let n = self.dims.len();
        let keep: Vec<usize> = (0..n - 1).collect();
        let data = partial_trace_matrix(&linalg::projector(&self.vector), &self.dims, &keep);
        DensityMatrix::from_parts(data, self.dims[..n - 1].to_vec(), self.split)
    }
}

/// Frobenius distance between two states of equal dimension.
pub fn frobenius_distance(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(QccError::DimMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(linalg::frobenius_distance(x.matrix(), y.matrix()))
}

/// Multi-index digits of `index` for the given dims (most significant first).
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn compose(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (digit, dim)| acc * dim + digit)
}

/// Partial trace of a raw matrix on `dims`, keeping the listed subsystems in order.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let d = m.nrows();
    let drop: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let mut kept_idx = vec![0usize; d];
    let mut drop_idx = vec![0usize; d];
    for i in 0..d {
        let dg = digits(i, dims);
        kept_idx[i] = compose(keep.iter().map(|&k| (dg[k], dims[k])));
        drop_idx[i] = compose(drop.iter().map(|&k| (dg[k], dims[k])));
    }
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for j in 0..d {
        for i in 0..d {
            if drop_idx[i] == drop_idx[j] {
                out[(kept_idx[i], kept_idx[j])] += m[(i, j)];
            }
        }
    }
    out
}

/// For every new composite index, the old composite index it came from.
fn permutation_indices(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let d: usize = dims.iter().product();
    (0..d)
        .map(|new| {
            let nd = digits(new, &new_dims);
            let mut old = vec![0usize; dims.len()];
            for (pos, &k) in order.iter().enumerate() {
                old[k] = nd[pos];
            }
            compose(old.iter().zip(dims).map(|(&g, &dm)| (g, dm)))
        })
        .collect()
}

/// Swap the two equal halves of a `(d·d) x (d·d)` matrix: `|i,j⟩ -> |j,i⟩`.
pub fn swap_halves(m: &CMatrix, d: usize) -> CMatrix {
    let n = d * d;
    debug_assert_eq!(m.nrows(), n);
    let map = |i: usize| (i % d) * d + i / d;
    CMatrix::from_fn(n, n, |i, j| m[(map(i), map(j))])
}

/// Full-space operator acting as `u` on the listed subsystems (in listed order).
pub fn embed_operator(u: &CMatrix, dims: &[usize], on: &[usize]) -> CMatrix {
    let d: usize = dims.iter().product();
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !on.contains(k)).collect();
    let mut t_idx = vec![0usize; d];
    let mut r_idx = vec![0usize; d];
    for i in 0..d {
        let dg = digits(i, dims);
        t_idx[i] = compose(on.iter().map(|&k| (dg[k], dims[k])));
        r_idx[i] = compose(rest.iter().map(|&k| (dg[k], dims[k])));
    }
    CMatrix::from_fn(d, d, |i, j| {
        if r_idx[i] == r_idx[j] {
            u[(t_idx[i], t_idx[j])]
        } else {
            linalg::ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real, ONE, ZERO};

    fn qubit(data: [f64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &data.map(real))
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        assert!(DensityMatrix::new(linalg::identity(2).scale(0.5), vec![2], None).is_ok());
    }

    #[test]
    fn injected_asymmetry_is_reported() {
        let mut m = qubit([0.5, 0.5, 0.5, 0.5]);
        m[(0, 1)] += real(1e-6);
        let err = DensityMatrix::new(m, vec![2], None).unwrap_err();
        match err.violations() {
            [Violation::NonHermitian(r)] => assert!((r - 1e-6).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_eigenvalue_is_reported() {
        let err = DensityMatrix::new(qubit([0.5, 0.6, 0.6, 0.5]), vec![2], None).unwrap_err();
        match err.violations() {
            [Violation::NotPsd(r)] => assert!((r + 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trace_and_dim_errors() {
        let err = DensityMatrix::new(qubit([0.6, 0.0, 0.0, 0.6]), vec![2], None).unwrap_err();
        assert!(matches!(err.violations(), [Violation::TraceNotOne(_)]));
        let err =
            DensityMatrix::new(linalg::identity(4).scale(0.25), vec![2, 3], Some(1)).unwrap_err();
        assert!(matches!(
            err.violations(),
            [Violation::DimMismatch {
                expected: 6,
                found: 4
            }]
        ));
    }

    #[test]
    fn roundoff_negative_eigenvalue_is_clamped() {
        let m = qubit([1.0 + 5e-10, 0.0, 0.0, -5e-10]);
        let rho = DensityMatrix::new(m, vec![2], None).unwrap();
        assert!(rho.was_clamped());
        assert!(linalg::eigvalsh(rho.matrix()).iter().all(|&l| l >= -1e-15));
    }

    #[test]
    fn kron_of_basis_states() {
        let zero = DensityMatrix::new(qubit([1.0, 0.0, 0.0, 0.0]), vec![2], None).unwrap();
        let one = DensityMatrix::new(qubit([0.0, 0.0, 0.0, 1.0]), vec![2], None).unwrap();
        let prod = zero.kron(&one);
        assert_eq!(prod.dims(), &[2, 2]);
        assert_eq!(prod.matrix()[(1, 1)], ONE);
        assert!((linalg::trace(prod.matrix()) - ONE).norm() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(vec![2], None).unwrap();
        let quarter = mixed.kron(&mixed);
        assert!(linalg::max_abs_diff(quarter.matrix(), &linalg::identity(4).scale(0.25)) < 1e-16);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![real(s), ZERO, ZERO, real(s)]);
        let bell = DensityMatrix::pure(&psi, vec![2, 2], Some(1)).unwrap();
        let a = bell.partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), &linalg::identity(2).scale(0.5)) < 1e-15);
        assert_eq!(bell.swap_bipartite().unwrap().matrix(), bell.matrix());
    }

    #[test]
    fn bad_subsystem_index() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2], Some(1)).unwrap();
        assert!(matches!(
            rho.partial_trace(&[2]),
            Err(QccError::BadSubsystemIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn x_on_a_flips_first_qubit() {
        let rho = DensityMatrix::pure(&linalg::basis_vector(4, 0), vec![2, 2], Some(1)).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let out = rho.apply_unitary(&x, &[0]).unwrap();
        assert_eq!(out.matrix()[(2, 2)], ONE);
        let not_unitary = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(
            rho.apply_unitary(&not_unitary, &[0]),
            Err(QccError::NotUnitary(_))
        ));
    }

    #[test]
    fn swap_requires_equal_sides() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 3], Some(1)).unwrap();
        assert!(matches!(
            rho.swap_bipartite(),
            Err(QccError::DimMismatch { .. })
        ));
    }

    #[test]
    fn purify_pure_and_mixed() {
        let psi = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let pure = DensityMatrix::pure(&psi, vec![2], None).unwrap();
        let p = pure.purify();
        assert_eq!(p.ancilla_dim, 1);
        assert!(linalg::max_abs_diff(p.reduced().matrix(), pure.matrix()) < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(vec![2], None).unwrap();
        let p = mixed.purify();
        assert_eq!(p.ancilla_dim, 2);
        assert!(linalg::max_abs_diff(p.reduced().matrix(), mixed.matrix()) < 1e-12);
    }

    #[test]
    fn frobenius_distance_of_orthogonal_projectors() {
        let zero = DensityMatrix::new(qubit([1.0, 0.0, 0.0, 0.0]), vec![2], None).unwrap();
        let one = DensityMatrix::new(qubit([0.0, 0.0, 0.0, 1.0]), vec![2], None).unwrap();
        assert!((frobenius_distance(&zero, &one).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_distance(&zero, &zero).unwrap(), 0.0);
    }
}
