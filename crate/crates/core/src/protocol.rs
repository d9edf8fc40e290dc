//! Building blocks of one-way LOCC rounds: projective measurements as a
//! CNOT-type dilation, copying a classical register to the other party, and a
//! probe comparing entanglement-of-coherence upper bounds before and after a round.

use crate::basis::LocalBasis;
use crate::coherence;
use crate::error::{QccError, Result};
use crate::extension::{self, ExtensionOptions, ExtensionResult};
use crate::linalg::{self, CMatrix};
use crate::optim::OptimizerConfig;
use crate::state::{self, DensityMatrix, Side};

/// Off-block mass tolerated on a classical register.
pub const REGISTRY_TOL: f64 = 1e-9;
/// Optimizer noise allowed by the monotonicity check of [`locc_round_probe`].
pub const MONOTONE_SLACK: f64 = 5e-2;

/// Insert a `|0⟩` subsystem of dimension `d` at position `at`. An ancilla
/// inserted at the cut joins side A.
pub fn insert_ancilla(rho: &DensityMatrix, d: usize, at: usize) -> Result<DensityMatrix> {
    let n = rho.num_subsystems();
    if at > n {
        return Err(QccError::BadSubsystemIndex {
            index: at,
            count: n + 1,
        });
    }
    let ground = DensityMatrix::pure(&linalg::basis_vector(d, 0), vec![d], None)?;
    let joined = rho.kron(&ground);
    let mut order: Vec<usize> = (0..n).collect();
    order.insert(at, n);
    let split = rho.split().map(|b| if at <= b { b + 1 } else { b });
    joined.permute(&order, split)
}

/// `Σ_i |b_i⟩⟨b_i| ⊗ X^i`, the generalized CNOT copying the `basis` label into
/// a computational-basis target.
fn controlled_copy(basis: &CMatrix) -> CMatrix {
    let d = basis.nrows();
    let mut u = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        let p = linalg::projector(&basis.column(i).into_owned());
        let mut shift = CMatrix::zeros(d, d);
        for t in 0..d {
            shift[((t + i) % d, t)] = linalg::ONE;
        }
        u += linalg::kron(&p, &shift);
    }
    u
}

/// Measure subsystem `k` in `basis` through its dilation: append an ancilla in
/// `|0⟩` right after `k`, then apply `U|b_i, 0⟩ = |b_i, i⟩`. Tracing out the
/// ancilla (index `k + 1` of the result) gives the dephased state.
pub fn projection_dilation(
    rho: &DensityMatrix,
    k: usize,
    basis: &LocalBasis,
) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if k >= dims.len() {
        return Err(QccError::BadSubsystemIndex {
            index: k,
            count: dims.len(),
        });
    }
    if basis.dim() != dims[k] {
        return Err(QccError::DimMismatch {
            expected: dims[k],
            found: basis.dim(),
        });
    }
    let joint = insert_ancilla(rho, dims[k], k + 1)?;
    joint.apply_unitary(&controlled_copy(basis.matrix()), &[k, k + 1])
}

/// Frobenius norm of the part of `rho` off the diagonal blocks of `basis` on subsystem `k`.
pub fn off_block_mass(rho: &DensityMatrix, k: usize, basis: &LocalBasis) -> Result<f64> {
    let dephased = coherence::dephase_subsystem(rho, k, basis)?;
    Ok(linalg::frobenius_distance(rho.matrix(), dephased.matrix()))
}

/// Copy the classical register `registry` (an A-side subsystem, classical in
/// `registry_basis`) to a new last subsystem on side B:
/// `Σ_i p_i |i⟩⟨i| ⊗ ψ_i  ↦  Σ_i p_i |i⟩⟨i| ⊗ ψ_i ⊗ |i⟩⟨i|`.
pub fn classical_copy(
    rho: &DensityMatrix,
    registry: usize,
    registry_basis: &LocalBasis,
) -> Result<DensityMatrix> {
    let a_side = rho.side_indices(Side::A)?;
    if !a_side.contains(&registry) {
        return Err(QccError::BadSubsystemIndex {
            index: registry,
            count: a_side.len(),
        });
    }
    let mass = off_block_mass(rho, registry, registry_basis)?;
    if mass > REGISTRY_TOL {
        return Err(QccError::NotClassicalOnRegistry(mass));
    }
    let d = rho.dims()[registry];
    let n = rho.num_subsystems();
    let joint = insert_ancilla(rho, d, n)?;
    let full = state::embed_operator(
        &controlled_copy(registry_basis.matrix()),
        joint.dims(),
        &[registry, n],
    );
    let data = linalg::conjugate(&full, joint.matrix());
    DensityMatrix::new(data, joint.dims().to_vec(), joint.split())
}

/// One Alice-to-Bob round: Alice couples a measurement register `M_A` (in
/// `|0⟩`) to her system, measures it in `registry_basis`, sends the outcome,
/// and Bob applies `bob_unitaries[i]` on outcome `i`.
#[derive(Debug, Clone)]
pub struct LoccRound {
    /// Unitary on `M_A ⊗ A`, register first.
    pub alice_unitary: CMatrix,
    pub registry_basis: LocalBasis,
    /// One unitary on B per outcome.
    pub bob_unitaries: Vec<CMatrix>,
}

impl LoccRound {
    /// The round doing nothing.
    pub fn identity(da: usize, db: usize) -> Self {
        Self {
            alice_unitary: linalg::identity(da),
            registry_basis: LocalBasis::computational(1),
            bob_unitaries: vec![linalg::identity(db)],
        }
    }

    pub fn outcomes(&self) -> usize {
        self.registry_basis.dim()
    }

    fn validate(&self, da: usize, db: usize) -> Result<()> {
        let m = self.outcomes();
        if self.alice_unitary.nrows() != m * da || !self.alice_unitary.is_square() {
            return Err(QccError::DimMismatch {
                expected: m * da,
                found: self.alice_unitary.nrows(),
            });
        }
        if self.bob_unitaries.len() != m {
            return Err(QccError::InvalidArgument(format!(
                "{} outcomes but {} conditional unitaries",
                m,
                self.bob_unitaries.len()
            )));
        }
        if let Some(u) = self
            .bob_unitaries
            .iter()
            .find(|u| u.nrows() != db || !u.is_square())
        {
            return Err(QccError::DimMismatch {
                expected: db,
                found: u.nrows(),
            });
        }
        Ok(())
    }

    /// Output state and, per outcome, its probability and normalized post-round state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<RoundOutput> {
        let two = rho.as_two_party()?;
        let da = two.side_dim(Side::A)?;
        let db = two.side_dim(Side::B)?;
        self.validate(da, db)?;
        let m = self.outcomes();
        // [M, A, B]; the dilation ancilla (index 1) is traced right away.
        let with_register = insert_ancilla(&two, m, 0)?;
        let coupled = with_register.apply_unitary(&self.alice_unitary, &[0, 1])?;
        let measured =
            projection_dilation(&coupled, 0, &self.registry_basis)?.partial_trace(&[1])?;
        // [M, A, B, M_B]
        let copied = classical_copy(&measured, 0, &self.registry_basis)?;
        let mut controlled = CMatrix::zeros(db * m, db * m);
        for (i, v) in self.bob_unitaries.iter().enumerate() {
            controlled += linalg::kron(v, &linalg::projector(&linalg::basis_vector(m, i)));
        }
        let corrected = copied.apply_unitary(&controlled, &[2, 3])?;
        let output = corrected
            .partial_trace(&[0, 3])?
            .reshape(rho.dims().to_vec(), rho.split())?;

        let mut branches = Vec::with_capacity(m);
        let labelled = corrected.partial_trace(&[0])?;
        for i in 0..m {
            let p = linalg::projector(&linalg::basis_vector(m, i));
            let proj = state::embed_operator(&p, labelled.dims(), &[2]);
            let block = &proj * labelled.matrix() * &proj;
            let reduced = state::partial_trace_matrix(&block, labelled.dims(), &[0, 1]);
            let prob = linalg::trace(&reduced).re;
            let branch = if prob > 1e-12 {
                Some(DensityMatrix::new(
                    reduced.unscale(prob),
                    rho.dims().to_vec(),
                    rho.split(),
                )?)
            } else {
                None
            };
            branches.push((prob, branch));
        }
        Ok(RoundOutput {
            state: output,
            branches,
        })
    }
}

/// Result of [`LoccRound::apply`].
#[derive(Debug, Clone)]
pub struct RoundOutput {
    pub state: DensityMatrix,
    /// `(probability, state)` per outcome; the state is absent for impossible outcomes.
    pub branches: Vec<(f64, Option<DensityMatrix>)>,
}

/// Upper bounds on the entanglement of coherence before and after one round.
#[derive(Debug, Clone)]
pub struct LoccProbeReport {
    pub before: f64,
    /// Smaller of the direct search on the output and the flagged mixture of per-outcome extensions.
    pub after: f64,
    pub after_direct: Option<f64>,
    pub after_branch_mixture: Option<f64>,
    pub monotone_ok: bool,
    pub output: DensityMatrix,
    pub before_extension: ExtensionResult,
    pub after_extension: ExtensionResult,
}

/// Run `round` on `rho` and compare entanglement-of-coherence upper bounds
/// (same options and config on both sides).
///
/// Besides a direct search on the output state, the outcome branches are
/// bounded one by one and combined with [`extension::flagged_mixture`], whose
/// value `Σ_i p_i ub(ρ_i)` is itself a certified bound for the output at a
/// larger ancilla. `monotone_ok` is `after ≤ before + slack`.
pub fn locc_round_probe(
    rho: &DensityMatrix,
    round: &LoccRound,
    options: &ExtensionOptions,
    config: &OptimizerConfig,
    slack: f64,
) -> Result<LoccProbeReport> {
    let before = extension::eoc_upper_bound(rho, options, config)?;
    let out = round.apply(rho)?;

    let direct = extension::eoc_upper_bound(&out.state, options, config);
    let mut exts = Vec::new();
    let mut weights = Vec::new();
    let mut mixture = None;
    for (p, branch) in &out.branches {
        if let Some(b) = branch {
            match extension::eoc_upper_bound(b, options, config) {
                Ok(e) => {
                    exts.push(e);
                    weights.push(*p);
                }
                Err(_) => {
                    exts.clear();
                    break;
                }
            }
        }
    }
    if !exts.is_empty() {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mix = extension::flagged_mixture(&exts, &weights)?;
        if mix.is_symmetric() && mix.is_extension() {
            mixture = Some(mix);
        }
    }

    let after_direct = direct.as_ref().ok().map(|e| e.cc_value);
    let after_branch_mixture = mixture.as_ref().map(|e| e.cc_value);
    let after_extension = match (direct, mixture) {
        (Ok(d), Some(m)) => {
            if m.cc_value < d.cc_value {
                m
            } else {
                d
            }
        }
        (Ok(d), None) => d,
        (Err(_), Some(m)) => m,
        (Err(e), None) => return Err(e),
    };
    let after = after_extension.cc_value;
    Ok(LoccProbeReport {
        before: before.cc_value,
        after,
        after_direct,
        after_branch_mixture,
        monotone_ok: after <= before.cc_value + slack,
        output: out.state,
        before_extension: before,
        after_extension,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};
    use crate::state::DensityMatrix;

    fn plus() -> DensityMatrix {
        let v = crate::linalg::CVector::from_vec(vec![real(0.5f64.sqrt()), real(0.5f64.sqrt())]);
        DensityMatrix::pure(&v, vec![2], None).unwrap()
    }

    #[test]
    fn dilation_of_plus_is_bell_like() {
        let joint = projection_dilation(&plus(), 0, &LocalBasis::computational(2)).unwrap();
        let m = joint.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(i, j)] - real(0.5)).norm() < 1e-15);
        }
        let back = joint.partial_trace(&[1]).unwrap();
        assert!(
            crate::linalg::max_abs_diff(back.matrix(), &crate::linalg::identity(2).unscale(2.0))
                < 1e-15
        );
    }

    #[test]
    fn copy_rejects_coherent_registry() {
        let rho = plus().kron(&plus());
        let err = classical_copy(&rho, 0, &LocalBasis::computational(2)).unwrap_err();
        assert!(matches!(err, QccError::NotClassicalOnRegistry(m) if m > 0.1));
    }

    #[test]
    fn copy_of_trivial_registry_appends_ground() {
        let one = DensityMatrix::pure(&linalg::basis_vector(1, 0), vec![1], None).unwrap();
        let rho = one.kron(&plus());
        let copied = classical_copy(
            &rho.with_split(Some(1)).unwrap(),
            0,
            &LocalBasis::computational(1),
        )
        .unwrap();
        assert_eq!(copied.dims(), &[1, 2, 1]);
        assert!(crate::linalg::max_abs_diff(copied.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn round_branches_average_to_output() {
        let psi = crate::linalg::CVector::from_vec(vec![
            real(0.6),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.8, 0.0),
        ]);
        let rho = DensityMatrix::pure(&psi, vec![2, 2], Some(1)).unwrap();
        let u = crate::stategen::random_unitary(4, 3);
        let round = LoccRound {
            alice_unitary: u,
            registry_basis: LocalBasis::computational(2),
            bob_unitaries: vec![
                crate::stategen::random_unitary(2, 4),
                crate::stategen::random_unitary(2, 5),
            ],
        };
        let out = round.apply(&rho).unwrap();
        let mut sum = CMatrix::zeros(4, 4);
        for (p, b) in &out.branches {
            if let Some(b) = b {
                sum += b.matrix().scale(*p);
            }
        }
        assert!(crate::linalg::max_abs_diff(&sum, out.state.matrix()) < 1e-12);
        assert!((linalg::trace(out.state.matrix()).re - 1.0).abs() < 1e-12);
    }
}
