//! Correlated coherence: total l1 coherence minus the local l1 coherences of
//! the two marginals, evaluated in the local eigenbases, plus the discord-zero
//! classifiers built on it.
//!
//! When a marginal is degenerate its eigenbasis is not unique. The canonical
//! value is then the minimum over all eigenbases, i.e. over unitary rotations
//! inside each degeneracy block ([`CanonicalBasisMode::MinimizedOverDegeneracy`]).

use crate::basis::{LocalBasis, ProductBasisChoice};
use crate::coherence::{self, l1_in_basis, l1_in_product_basis};
use crate::error::{QccError, Result};
use crate::linalg::{self, CMatrix};
use crate::optim::{self, LocalMinimum, OptimizerConfig, OptimizerReport};
use crate::rng::CounterRng;
use crate::state::{DensityMatrix, Side};

/// Default threshold of the discord-zero classifiers.
pub const CLASSIFIER_TOL: f64 = 1e-7;
/// Eigenvalues at or below this belong to the kernel of a marginal; rotating
/// inside the kernel cannot change any coherence, so those blocks are skipped.
const KERNEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CanonicalBasisMode {
    /// The deterministic eigenbasis returned by [`linalg::eigh`].
    Fixed,
    /// Minimum over all eigenbases (rotations within degeneracy blocks).
    #[default]
    MinimizedOverDegeneracy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CCResult {
    pub value: f64,
    pub basis_used: ProductBasisChoice,
    pub mode: CanonicalBasisMode,
    pub optimizer_report: Option<OptimizerReport>,
}

/// `C(ρ_AB) - C(ρ_A) - C(ρ_B)` in the given product basis.
pub fn correlated_coherence(rho: &DensityMatrix, basis: &ProductBasisChoice) -> Result<f64> {
    let da = rho.side_dim(Side::A)?;
    let db = rho.side_dim(Side::B)?;
    if basis.basis_a.dim() != da {
        return Err(QccError::DimMismatch {
            expected: da,
            found: basis.basis_a.dim(),
        });
    }
    if basis.basis_b.dim() != db {
        return Err(QccError::DimMismatch {
            expected: db,
            found: basis.basis_b.dim(),
        });
    }
    Ok(cc_raw(
        rho.matrix(),
        da,
        db,
        basis.basis_a.matrix(),
        basis.basis_b.matrix(),
    ))
}

pub(crate) fn cc_raw(m: &CMatrix, da: usize, db: usize, ba: &CMatrix, bb: &CMatrix) -> f64 {
    let (ra, rb) = two_party_marginals(m, da, db);
    l1_in_product_basis(m, ba, bb) - l1_in_basis(&ra, ba) - l1_in_basis(&rb, bb)
}

/// Marginals of a matrix on `da ⊗ db`.
pub(crate) fn two_party_marginals(m: &CMatrix, da: usize, db: usize) -> (CMatrix, CMatrix) {
    let mut ra = CMatrix::zeros(da, da);
    let mut rb = CMatrix::zeros(db, db);
    for a1 in 0..da {
        for a2 in 0..da {
            for b1 in 0..db {
                for b2 in 0..db {
                    let z = m[(a1 * db + b1, a2 * db + b2)];
                    if b1 == b2 {
                        ra[(a1, a2)] += z;
                    }
                    if a1 == a2 {
                        rb[(b1, b2)] += z;
                    }
                }
            }
        }
    }
    (ra, rb)
}

/// Eigenbasis of one marginal, with degeneracy blocks.
pub fn local_eigenbasis(rho: &DensityMatrix, side: Side) -> Result<LocalBasis> {
    Ok(LocalBasis::eigenbasis(rho.marginal(side)?.matrix()))
}

/// Correlated coherence in the canonical local eigenbases.
pub fn correlated_coherence_canonical(
    rho: &DensityMatrix,
    mode: CanonicalBasisMode,
    config: &OptimizerConfig,
) -> Result<CCResult> {
    config.validate()?;
    let da = rho.side_dim(Side::A)?;
    let db = rho.side_dim(Side::B)?;
    canonical_raw(rho.matrix(), da, db, mode, config)
}

pub(crate) fn canonical_raw(
    m: &CMatrix,
    da: usize,
    db: usize,
    mode: CanonicalBasisMode,
    config: &OptimizerConfig,
) -> Result<CCResult> {
    let (ra, rb) = two_party_marginals(m, da, db);
    let ea = LocalBasis::eigenbasis(&ra);
    let eb = LocalBasis::eigenbasis(&rb);
    let fixed = cc_raw(m, da, db, ea.matrix(), eb.matrix());
    if mode == CanonicalBasisMode::Fixed {
        return Ok(CCResult {
            value: fixed,
            basis_used: ProductBasisChoice::new(ea, eb),
            mode,
            optimizer_report: None,
        });
    }

    let blocks_a = active_blocks(&ea);
    let blocks_b = active_blocks(&eb);
    let sizes: Vec<usize> = blocks_a.iter().chain(&blocks_b).map(Vec::len).collect();
    let n_params: usize = sizes.iter().map(|k| k * k).sum();
    let build = |bases: &[CMatrix], x: &[f64]| -> (LocalBasis, LocalBasis) {
        let mut off = 0;
        let mut us = Vec::with_capacity(sizes.len());
        for (base, &k) in bases.iter().zip(&sizes) {
            us.push(base * linalg::unitary_from_params(k, &x[off..off + k * k]));
            off += k * k;
        }
        let (ua, ub) = us.split_at(blocks_a.len());
        (
            ea.rotate_blocks(&blocks_a, ua),
            eb.rotate_blocks(&blocks_b, ub),
        )
    };

    let (report, (basis_a, basis_b)) = optim::multistart(config, |restart| {
        let mut rng = CounterRng::stream(config.seed, restart as u64);
        let bases: Vec<CMatrix> = sizes
            .iter()
            .map(|&k| {
                if restart == 0 {
                    linalg::identity(k)
                } else {
                    crate::basis::haar_unitary(k, &mut rng)
                }
            })
            .collect();
        let objective = |x: &[f64]| {
            let (ba, bb) = build(&bases, x);
            cc_raw(m, da, db, ba.matrix(), bb.matrix())
        };
        let local: LocalMinimum = if n_params == 0 {
            let v = objective(&[]);
            LocalMinimum {
                x: Vec::new(),
                value: v,
                iterations: 0,
                evaluations: 1,
                converged: true,
                trace: vec![v],
            }
        } else {
            optim::nelder_mead(objective, &vec![0.0; n_params], config.initial_step, config)
        };
        let bases_out = build(&bases, &local.x);
        (local, bases_out)
    });
    if !report.any_converged() {
        return Err(QccError::OptimizerDidNotConverge {
            best: report.best_value,
        });
    }
    Ok(CCResult {
        value: report.best_value,
        basis_used: ProductBasisChoice::new(basis_a, basis_b),
        mode,
        optimizer_report: Some(report),
    })
}

/// Degeneracy blocks of size at least two outside the kernel.
fn active_blocks(basis: &LocalBasis) -> Vec<Vec<usize>> {
    let vals = basis.eigenvalues().unwrap_or(&[]);
    basis
        .degeneracy_blocks()
        .iter()
        .filter(|b| b.len() > 1 && vals.get(b[0]).is_none_or(|&l| l > KERNEL_EPS))
        .cloned()
        .collect()
}

/// Outcome of a discord-zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDiscordVerdict {
    pub zero: bool,
    pub cc: CCResult,
}

/// Zero symmetric discord iff the canonical (minimized) correlated coherence is at most `tol`.
pub fn symmetric_discord_zero(
    rho: &DensityMatrix,
    tol: f64,
    config: &OptimizerConfig,
) -> Result<SymmetricDiscordVerdict> {
    let cc =
        correlated_coherence_canonical(rho, CanonicalBasisMode::MinimizedOverDegeneracy, config)?;
    Ok(SymmetricDiscordVerdict {
        zero: cc.value <= tol,
        cc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetricDiscordVerdict {
    /// `C_cc(ρ) - C_cc(Π(ρ))`, both in the canonical basis of `ρ`.
    pub delta: f64,
    pub zero: bool,
    pub measured_side: Side,
    pub cc_state: f64,
    pub cc_measured: f64,
    pub basis_used: ProductBasisChoice,
}

/// Correlated-coherence loss when `side` is dephased in its canonical eigenbasis.
pub fn asymmetric_discord_delta(
    rho: &DensityMatrix,
    side: Side,
    tol: f64,
    config: &OptimizerConfig,
) -> Result<AsymmetricDiscordVerdict> {
    let two = rho.as_two_party()?;
    let cc =
        correlated_coherence_canonical(&two, CanonicalBasisMode::MinimizedOverDegeneracy, config)?;
    let (k, local) = match side {
        Side::A => (0, &cc.basis_used.basis_a),
        Side::B => (1, &cc.basis_used.basis_b),
    };
    let measured = coherence::dephase_subsystem(&two, k, local)?;
    let cc_measured = correlated_coherence(&measured, &cc.basis_used)?;
    let delta = cc.value - cc_measured;
    Ok(AsymmetricDiscordVerdict {
        delta,
        zero: delta <= tol,
        measured_side: side,
        cc_state: cc.value,
        cc_measured,
        basis_used: cc.basis_used,
    })
}
