//! l1-norm coherence, projective dephasing, and the falsification harness for
//! maximal coherence loss under local dephasing.

use crate::basis::{LocalBasis, ProductBasisChoice};
use crate::error::{QccError, Result};
use crate::linalg::{self, CMatrix};
use crate::par::{self, Execution};
use crate::rng::{CounterRng, Seed};
use crate::state::{self, DensityMatrix};

/// Slack allowed by [`max_loss_certificate`].
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Default number of Haar-sampled bases for [`max_loss_certificate`].
pub const DEFAULT_SAMPLES: usize = 200;

/// Reference frame in which coherence is measured.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// One basis for the whole space.
    Full(&'a LocalBasis),
    /// Product of an A basis and a B basis.
    Product(&'a ProductBasisChoice),
    /// One basis per subsystem, in subsystem order.
    PerSubsystem(&'a [LocalBasis]),
}

impl<'a> From<&'a LocalBasis> for Reference<'a> {
    fn from(b: &'a LocalBasis) -> Self {
        Reference::Full(b)
    }
}

impl<'a> From<&'a ProductBasisChoice> for Reference<'a> {
    fn from(b: &'a ProductBasisChoice) -> Self {
        Reference::Product(b)
    }
}

impl<'a> From<&'a [LocalBasis]> for Reference<'a> {
    fn from(b: &'a [LocalBasis]) -> Self {
        Reference::PerSubsystem(b)
    }
}

impl<'a> From<&'a Vec<LocalBasis>> for Reference<'a> {
    fn from(b: &'a Vec<LocalBasis>) -> Self {
        Reference::PerSubsystem(b)
    }
}

impl Reference<'_> {
    /// Basis of the full space as matrix columns.
    pub fn full_matrix(&self) -> CMatrix {
        match self {
            Reference::Full(b) => b.matrix().clone(),
            Reference::Product(p) => p.full(),
            Reference::PerSubsystem(list) => list
                .iter()
                .skip(1)
                .fold(list[0].matrix().clone(), |acc, b| {
                    linalg::kron(&acc, b.matrix())
                }),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Reference::Full(b) => b.dim(),
            Reference::Product(p) => p.basis_a.dim() * p.basis_b.dim(),
            Reference::PerSubsystem(list) => list.iter().map(LocalBasis::dim).product(),
        }
    }
}

/// `ρ` written in the coordinates of `basis` (columns): `B† ρ B`.
pub fn in_basis(rho: &CMatrix, basis: &CMatrix) -> CMatrix {
    basis.adjoint() * rho * basis
}

/// `C_l1(ρ) = Σ_{i≠j} |⟨i|ρ|j⟩|` in the given reference frame.
pub fn l1_coherence<'a>(rho: &DensityMatrix, reference: impl Into<Reference<'a>>) -> Result<f64> {
    let reference = reference.into();
    if reference.dim() != rho.dim() {
        return Err(QccError::DimMismatch {
            expected: rho.dim(),
            found: reference.dim(),
        });
    }
    Ok(l1_in_basis(rho.matrix(), &reference.full_matrix()))
}

pub(crate) fn l1_in_basis(rho: &CMatrix, basis: &CMatrix) -> f64 {
    linalg::offdiag_l1(&in_basis(rho, basis))
}

/// `(B_A ⊗ B_B)† ρ (B_A ⊗ B_B)`, one factor at a time.
pub fn in_product_basis(rho: &CMatrix, ba: &CMatrix, bb: &CMatrix) -> CMatrix {
    linalg::conjugate_product(rho, &ba.adjoint(), &bb.adjoint())
}

pub(crate) fn l1_in_product_basis(rho: &CMatrix, ba: &CMatrix, bb: &CMatrix) -> f64 {
    linalg::offdiag_l1(&in_product_basis(rho, ba, bb))
}

/// `Π(ρ) = Σ_i |i⟩⟨i| ρ |i⟩⟨i|` for the given frame.
pub fn dephase<'a>(
    rho: &DensityMatrix,
    reference: impl Into<Reference<'a>>,
) -> Result<DensityMatrix> {
    let reference = reference.into();
    if reference.dim() != rho.dim() {
        return Err(QccError::DimMismatch {
            expected: rho.dim(),
            found: reference.dim(),
        });
    }
    let b = reference.full_matrix();
    let coords = in_basis(rho.matrix(), &b);
    let diag = CMatrix::from_diagonal(&coords.diagonal());
    let data = &b * diag * b.adjoint();
    Ok(DensityMatrix::from_parts(
        data,
        rho.dims().to_vec(),
        rho.split(),
    ))
}

/// `Σ_j (1 ⊗ |j⟩⟨j|_k ⊗ 1) ρ (1 ⊗ |j⟩⟨j|_k ⊗ 1)` for a basis of subsystem `k`.
pub fn dephase_subsystem(
    rho: &DensityMatrix,
    k: usize,
    local_basis: &LocalBasis,
) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if k >= dims.len() {
        return Err(QccError::BadSubsystemIndex {
            index: k,
            count: dims.len(),
        });
    }
    if local_basis.dim() != dims[k] {
        return Err(QccError::DimMismatch {
            expected: dims[k],
            found: local_basis.dim(),
        });
    }
    let u = state::embed_operator(local_basis.matrix(), dims, &[k]);
    let mut coords = in_basis(rho.matrix(), &u);
    let digit: Vec<usize> = (0..rho.dim()).map(|i| state::digits(i, dims)[k]).collect();
    for j in 0..rho.dim() {
        for i in 0..rho.dim() {
            if digit[i] != digit[j] {
                coords[(i, j)] = linalg::ZERO;
            }
        }
    }
    let data = &u * coords * u.adjoint();
    Ok(DensityMatrix::from_parts(data, dims.to_vec(), rho.split()))
}

/// Outcome of [`max_loss_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxLossReport {
    /// Smallest coherence left after dephasing subsystem `k` in a sampled basis.
    pub min_sampled_coherence: f64,
    /// Coherence left after dephasing subsystem `k` in its reference basis.
    pub ref_coherence: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Sample `n_samples` Haar-random bases on subsystem `k`, dephase in each and
/// measure the remaining coherence in the reference frame `ref_bases` (one
/// basis per subsystem). Passes iff dephasing in the reference basis of `k`
/// leaves no more coherence than any sample, up to `1e-9`.
pub fn max_loss_certificate(
    rho: &DensityMatrix,
    k: usize,
    ref_bases: &[LocalBasis],
    n_samples: usize,
    seed: Seed,
    exec: Execution,
) -> Result<MaxLossReport> {
    let dims = rho.dims();
    if ref_bases.len() != dims.len() {
        return Err(QccError::DimMismatch {
            expected: dims.len(),
            found: ref_bases.len(),
        });
    }
    for (b, &d) in ref_bases.iter().zip(dims) {
        if b.dim() != d {
            return Err(QccError::DimMismatch {
                expected: d,
                found: b.dim(),
            });
        }
    }
    if k >= dims.len() {
        return Err(QccError::BadSubsystemIndex {
            index: k,
            count: dims.len(),
        });
    }
    let frame = Reference::PerSubsystem(ref_bases).full_matrix();
    let ref_coherence = l1_in_basis(dephase_subsystem(rho, k, &ref_bases[k])?.matrix(), &frame);
    let sampled = par::map_indexed(exec, n_samples, |m| {
        let basis = LocalBasis::haar(dims[k], CounterRng::derive(seed, m as u64));
        dephase_subsystem(rho, k, &basis).map(|out| l1_in_basis(out.matrix(), &frame))
    });
    let mut min_sampled = f64::INFINITY;
    for value in sampled {
        min_sampled = min_sampled.min(value?);
    }
    let pass = ref_coherence <= min_sampled + CERTIFICATE_SLACK;
    Ok(MaxLossReport {
        min_sampled_coherence: min_sampled,
        ref_coherence,
        samples: n_samples,
        pass,
    })
}
