//! Seeded generators for the state families used throughout the tests and the CLI.
//!
//! All randomness comes from [`CounterRng`], so a given seed produces the same
//! matrix bit for bit.

use crate::basis::{self, LocalBasis, ProductBasisChoice};
use crate::error::{QccError, Result};
use crate::extension::{SeparableDecomposition, SeparableTerm};
use crate::linalg::{self, real, CMatrix, CVector, ZERO};
use crate::rng::{CounterRng, Seed};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl std::str::FromStr for BellState {
    type Err = QccError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "phiplus" | "phi_plus" => Ok(BellState::PhiPlus),
            "phi-" | "phiminus" | "phi_minus" => Ok(BellState::PhiMinus),
            "psi+" | "psiplus" | "psi_plus" => Ok(BellState::PsiPlus),
            "psi-" | "psiminus" | "psi_minus" | "singlet" => Ok(BellState::PsiMinus),
            other => Err(QccError::InvalidArgument(format!(
                "unknown Bell state '{other}'"
            ))),
        }
    }
}

pub fn bell_vector(which: BellState) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = match which {
        BellState::PhiPlus => [s, 0.0, 0.0, s],
        BellState::PhiMinus => [s, 0.0, 0.0, -s],
        BellState::PsiPlus => [0.0, s, s, 0.0],
        BellState::PsiMinus => [0.0, s, -s, 0.0],
    };
    CVector::from_iterator(4, v.into_iter().map(real))
}

pub fn bell(which: BellState) -> DensityMatrix {
    DensityMatrix::from_parts(linalg::projector(&bell_vector(which)), vec![2, 2], Some(1))
}

/// `p |Ψ⁻⟩⟨Ψ⁻| + (1 - p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QccError::InvalidArgument(format!(
            "Werner weight {p} outside [0, 1]"
        )));
    }
    let singlet = linalg::projector(&bell_vector(BellState::PsiMinus));
    let data = singlet.scale(p) + linalg::identity(4).scale((1.0 - p) / 4.0);
    Ok(DensityMatrix::from_parts(data, vec![2, 2], Some(1)))
}

/// `Σ_ij p_ij |i⟩⟨i| ⊗ |j⟩⟨j|` with `|i⟩`, `|j⟩` the columns of the given bases.
pub fn cc_state(weights: &[Vec<f64>], basis: &ProductBasisChoice) -> Result<DensityMatrix> {
    let da = basis.basis_a.dim();
    let db = basis.basis_b.dim();
    if weights.len() != da || weights.iter().any(|row| row.len() != db) {
        return Err(QccError::DimMismatch {
            expected: da * db,
            found: weights.iter().map(Vec::len).sum(),
        });
    }
    check_probabilities(weights.iter().flatten().copied())?;
    let mut diag = CVector::zeros(da * db);
    for (i, row) in weights.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            diag[i * db + j] = real(p);
        }
    }
    let u = basis.full();
    let data = &u * CMatrix::from_diagonal(&diag) * u.adjoint();
    Ok(DensityMatrix::from_parts(data, vec![da, db], Some(1)))
}

/// `Σ_i p_i |i⟩⟨i| ⊗ ρ_B^i` with `|i⟩` computational on A.
pub fn cq_state(weights: &[f64], bob_states: &[DensityMatrix]) -> Result<DensityMatrix> {
    if weights.len() != bob_states.len() || weights.is_empty() {
        return Err(QccError::DimMismatch {
            expected: weights.len(),
            found: bob_states.len(),
        });
    }
    check_probabilities(weights.iter().copied())?;
    let db = bob_states[0].dim();
    if bob_states.iter().any(|s| s.dim() != db) {
        return Err(QccError::InvalidArgument(
            "Bob's states must share one dimension".into(),
        ));
    }
    let da = weights.len();
    let mut data = CMatrix::zeros(da * db, da * db);
    for (i, (p, s)) in weights.iter().zip(bob_states).enumerate() {
        let proj = linalg::projector(&linalg::basis_vector(da, i));
        data += linalg::kron(&proj, s.matrix()).scale(*p);
    }
    Ok(DensityMatrix::from_parts(data, vec![da, db], Some(1)))
}

fn check_probabilities(ps: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for p in ps {
        if p.is_nan() || p < 0.0 {
            return Err(QccError::InvalidArgument(format!("negative weight {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-10 {
        return Err(QccError::InvalidArgument(format!(
            "weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn gaussian_vector(d: usize, rng: &mut CounterRng) -> CVector {
    CVector::from_iterator(d, (0..d).map(|_| rng.complex_normal()))
}

/// Haar-random pure state of dimension `d` (normalized complex Gaussian vector).
pub fn random_pure_vector(d: usize, seed: Seed) -> CVector {
    let mut rng = CounterRng::new(seed);
    let v = gaussian_vector(d, &mut rng);
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure(d: usize, seed: Seed) -> DensityMatrix {
    DensityMatrix::from_parts(
        linalg::projector(&random_pure_vector(d, seed)),
        vec![d],
        None,
    )
}

/// `G G† / Tr(G G†)` with `G` a complex Gaussian `d x rank` matrix, filled column by column.
pub fn random_mixed(d: usize, rank: usize, seed: Seed) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(QccError::InvalidArgument(format!(
            "rank {rank} outside 1..={d}"
        )));
    }
    let mut rng = CounterRng::new(seed);
    let mut g = CMatrix::zeros(d, rank);
    for j in 0..rank {
        for i in 0..d {
            g[(i, j)] = rng.complex_normal();
        }
    }
    let gg = &g * g.adjoint();
    let tr = linalg::trace(&gg).re;
    Ok(DensityMatrix::from_parts(gg.unscale(tr), vec![d], None))
}

pub fn random_unitary(d: usize, seed: Seed) -> CMatrix {
    basis::haar_unitary(d, &mut CounterRng::new(seed))
}

/// Random weights on the probability simplex (normalized exponentials).
pub fn random_weights(n: usize, rng: &mut CounterRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random separable state `Σ_i p_i |α_i⟩⟨α_i| ⊗ |β_i⟩⟨β_i|` together with the
/// decomposition that generated it.
pub fn random_separable(
    n_terms: usize,
    dims: (usize, usize),
    seed: Seed,
) -> Result<(DensityMatrix, SeparableDecomposition)> {
    if n_terms == 0 {
        return Err(QccError::InvalidArgument("need at least one term".into()));
    }
    let mut rng = CounterRng::new(seed);
    let weights = random_weights(n_terms, &mut rng);
    let terms = weights
        .into_iter()
        .map(|weight| {
            let a = gaussian_vector(dims.0, &mut rng);
            let b = gaussian_vector(dims.1, &mut rng);
            SeparableTerm {
                weight,
                alpha: a.unscale(a.norm()),
                beta: b.unscale(b.norm()),
            }
        })
        .collect();
    let decomp = SeparableDecomposition::new(terms)?;
    Ok((decomp.state(), decomp))
}

/// Random cc-state on `da ⊗ db`: random weights in Haar-random local bases.
pub fn random_cc_state(da: usize, db: usize, seed: Seed) -> DensityMatrix {
    let mut rng = CounterRng::new(seed);
    let flat = random_weights(da * db, &mut rng);
    let weights: Vec<Vec<f64>> = flat.chunks(db).map(<[f64]>::to_vec).collect();
    let basis = ProductBasisChoice::new(
        LocalBasis::haar(da, CounterRng::derive(seed, 1)),
        LocalBasis::haar(db, CounterRng::derive(seed, 2)),
    );
    cc_state(&weights, &basis).expect("generated weights are a distribution")
}

/// Random cq-state on `da ⊗ db` with generic (full-rank, non-commuting) Bob states.
pub fn random_cq_state(da: usize, db: usize, seed: Seed) -> DensityMatrix {
    let mut rng = CounterRng::new(seed);
    let weights = random_weights(da, &mut rng);
    let bobs: Vec<DensityMatrix> = (0..da)
        .map(|i| random_mixed(db, db, CounterRng::derive(seed, i as u64 + 1)).expect("valid rank"))
        .collect();
    cq_state(&weights, &bobs).expect("generated weights are a distribution")
}

/// Random pure state on `da ⊗ db`.
pub fn random_pure_bipartite(da: usize, db: usize, seed: Seed) -> DensityMatrix {
    random_pure(da * db, seed)
        .reshape(vec![da, db], Some(1))
        .expect("dimensions multiply out")
}

/// Random mixed state on `da ⊗ db` of the given rank.
pub fn random_mixed_bipartite(
    da: usize,
    db: usize,
    rank: usize,
    seed: Seed,
) -> Result<DensityMatrix> {
    random_mixed(da * db, rank, seed)?.reshape(vec![da, db], Some(1))
}

/// Single-qubit pure state with a real amplitude vector, for fixtures.
pub fn qubit(v0: f64, v1: f64) -> DensityMatrix {
    let v = CVector::from_vec(vec![real(v0), real(v1)]);
    DensityMatrix::pure(&v, vec![2], None).expect("non-zero vector")
}

/// `|0⟩⟨0|` on dimension `d`.
pub fn ground(d: usize) -> DensityMatrix {
    let mut m = CMatrix::from_element(d, d, ZERO);
    m[(0, 0)] = linalg::ONE;
    DensityMatrix::from_parts(m, vec![d], None)
}
