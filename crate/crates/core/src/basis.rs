//! Local reference bases and their products.

use crate::error::{QccError, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::{CounterRng, Seed};

/// Orthonormality tolerance for [`LocalBasis::new`].
pub const ORTHO_TOL: f64 = 1e-9;
/// Eigenvalues within this gap are grouped into one degeneracy block.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Orthonormal basis of one (possibly composite) subsystem, stored as the
/// columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    vectors: CMatrix,
    degeneracy_blocks: Vec<Vec<usize>>,
    eigenvalues: Option<Vec<f64>>,
}

impl LocalBasis {
    pub fn new(vectors: CMatrix) -> Result<Self> {
        let res = linalg::unitarity_residual(&vectors);
        if res > ORTHO_TOL {
            return Err(QccError::NotUnitary(res));
        }
        Ok(Self {
            vectors,
            degeneracy_blocks: Vec::new(),
            eigenvalues: None,
        })
    }

    pub fn computational(d: usize) -> Self {
        Self {
            vectors: linalg::identity(d),
            degeneracy_blocks: Vec::new(),
            eigenvalues: None,
        }
    }

    /// Eigenbasis of a Hermitian matrix, with degeneracy blocks built from
    /// chains of consecutive eigenvalues closer than [`DEGENERACY_GAP`].
    pub fn eigenbasis(h: &CMatrix) -> Self {
        let (vals, vecs) = linalg::eigh(h);
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (k, &l) in vals.iter().enumerate() {
            match blocks.last_mut() {
                Some(block) if vals[*block.last().unwrap()] - l <= DEGENERACY_GAP => block.push(k),
                _ => blocks.push(vec![k]),
            }
        }
        Self {
            vectors: vecs,
            degeneracy_blocks: blocks,
            eigenvalues: Some(vals),
        }
    }

    /// Haar-random basis: Gram–Schmidt on a complex Gaussian matrix, columns
    /// phase-fixed like [`linalg::eigh`].
    pub fn haar(d: usize, seed: Seed) -> Self {
        let mut u = haar_unitary(d, &mut CounterRng::new(seed));
        for mut col in u.column_iter_mut() {
            let mut v = col.clone_owned();
            linalg::fix_phase(&mut v);
            col.copy_from(&v);
        }
        Self {
            vectors: u,
            degeneracy_blocks: Vec::new(),
            eigenvalues: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Basis vectors as matrix columns.
    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    /// Groups of column indices with equal source eigenvalue; empty unless
    /// built by [`Self::eigenbasis`].
    pub fn degeneracy_blocks(&self) -> &[Vec<usize>] {
        &self.degeneracy_blocks
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    /// Replace the columns of each block by `block_unitaries[k]` applied within it.
    /// Blocks and eigenvalues carry over.
    pub fn rotate_blocks(&self, blocks: &[Vec<usize>], unitaries: &[CMatrix]) -> Self {
        let mut out = self.vectors.clone();
        for (block, u) in blocks.iter().zip(unitaries) {
            let sub = CMatrix::from_fn(self.dim(), block.len(), |i, j| self.vectors[(i, block[j])]);
            let rotated = sub * u;
            for (j, &col) in block.iter().enumerate() {
                out.set_column(col, &rotated.column(j));
            }
        }
        Self {
            vectors: out,
            ..self.clone()
        }
    }

    /// `B ⊗ C` as a basis of the composite space.
    pub fn kron(&self, other: &LocalBasis) -> LocalBasis {
        LocalBasis {
            vectors: linalg::kron(&self.vectors, &other.vectors),
            degeneracy_blocks: Vec::new(),
            eigenvalues: None,
        }
    }

    /// Multiply each basis vector by a phase.
    pub fn with_phases(&self, phases: &[f64]) -> LocalBasis {
        let mut v = self.vectors.clone();
        for (k, mut col) in v.column_iter_mut().enumerate() {
            col *= linalg::c(phases[k].cos(), phases[k].sin());
        }
        Self {
            vectors: v,
            ..self.clone()
        }
    }
}

/// Local reference bases for the two sides of a bipartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasisChoice {
    pub basis_a: LocalBasis,
    pub basis_b: LocalBasis,
}

impl ProductBasisChoice {
    pub fn new(basis_a: LocalBasis, basis_b: LocalBasis) -> Self {
        Self { basis_a, basis_b }
    }

    pub fn computational(da: usize, db: usize) -> Self {
        Self::new(LocalBasis::computational(da), LocalBasis::computational(db))
    }

    /// Product basis of the full space.
    pub fn full(&self) -> CMatrix {
        linalg::kron(self.basis_a.matrix(), self.basis_b.matrix())
    }
}

/// Haar-distributed unitary from Gram–Schmidt on a complex Gaussian matrix
/// (positive-diagonal R factor). Entries are drawn column by column.
pub fn haar_unitary(d: usize, rng: &mut CounterRng) -> CMatrix {
    loop {
        let mut g = CMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                g[(i, j)] = rng.complex_normal();
            }
        }
        if let Some(q) = linalg::gram_schmidt(&g) {
            return q;
        }
    }
}
