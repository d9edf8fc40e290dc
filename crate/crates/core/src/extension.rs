//! Extensions `ρ_AA'BB'` of bipartite states, unitary swap symmetry, the
//! minimum-correlated-coherence separability search and upper bounds on the
//! entanglement of coherence.
//!
//! Layout of every extension state: the A subsystems of the original state,
//! then one ancilla `A'`, then the B subsystems, then one ancilla `B'`, with the
//! cut after `A'`. Several ancillas on one side are merged into a single one.
//!
//! Searches parameterize extensions as `Tr_G[(1_AB ⊗ W)|ψ⟩⟨ψ|(1_AB ⊗ W)†]`,
//! where `|ψ⟩` is the canonical purification of `ρ_AB` and `W` an isometry from
//! the purifying register into `A' ⊗ B' ⊗ G`. Every value they return is an
//! upper bound on the true minimum at the given ancilla dimensions.

use crate::basis::{haar_unitary, LocalBasis, ProductBasisChoice};
use crate::correlated::{self, CanonicalBasisMode};
use crate::error::{QccError, Result};
use crate::linalg::{self, real, CMatrix, CVector};
use crate::optim::{self, OptimizerConfig, OptimizerReport, RestartTrace};
use crate::par::Execution;
use crate::rng::CounterRng;
use crate::state::{self, DensityMatrix, Side, RANK_TOL};

/// Largest symmetry residual an accepted symmetric extension may have.
pub const SYMMETRY_GATE: f64 = 1e-4;
/// Marginal residual above which a candidate is not an extension.
pub const MARGINAL_GATE: f64 = 1e-8;
/// Two marginal spectra further apart than this cannot be swap-related.
pub const SPECTRAL_GAP_TOL: f64 = 1e-8;
/// Objective value treated as zero: a start at or below it is returned
/// without searching, and a restart reaching it stops. Both objectives are
/// non-negative; witness extensions of larger states land around `1e-11`
/// from roundoff alone.
const OBJECTIVE_FLOOR: f64 = 1e-9;

/// One product term `p |α⟩⟨α| ⊗ |β⟩⟨β|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    pub alpha: CVector,
    pub beta: CVector,
}

/// Convex decomposition of a separable state into product pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn new(terms: Vec<SeparableTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| QccError::InvalidArgument("empty decomposition".into()))?;
        let (da, db) = (first.alpha.len(), first.beta.len());
        let mut total = 0.0;
        for t in &terms {
            if t.weight.is_nan() || t.weight <= 0.0 {
                return Err(QccError::InvalidArgument(format!(
                    "non-positive weight {}",
                    t.weight
                )));
            }
            if t.alpha.len() != da || t.beta.len() != db {
                return Err(QccError::DimMismatch {
                    expected: da * db,
                    found: t.alpha.len() * t.beta.len(),
                });
            }
            if (t.alpha.norm() - 1.0).abs() > 1e-10 || (t.beta.norm() - 1.0).abs() > 1e-10 {
                return Err(QccError::InvalidArgument(
                    "decomposition vectors must be normalized".into(),
                ));
            }
            total += t.weight;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(QccError::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.terms[0].alpha.len(), self.terms[0].beta.len())
    }

    /// `Σ_i p_i |α_i⟩⟨α_i| ⊗ |β_i⟩⟨β_i|`.
    pub fn state(&self) -> DensityMatrix {
        let (da, db) = self.dims();
        let mut m = CMatrix::zeros(da * db, da * db);
        for t in &self.terms {
            m += linalg::projector(&t.alpha.kronecker(&t.beta)).scale(t.weight);
        }
        DensityMatrix::from_parts(m, vec![da, db], Some(1))
    }
}

/// An extension together with the quantities certified for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult {
    /// State on `A A' | B B'`.
    pub state: DensityMatrix,
    /// The bipartite state this extends.
    pub extends: DensityMatrix,
    pub ancilla_dims: (usize, usize),
    /// Correlated coherence of `state` in `basis`, an eigenbasis pair of its marginals.
    pub cc_value: f64,
    pub basis: ProductBasisChoice,
    /// Frobenius distance between the swapped-and-rotated state and itself, when evaluated.
    pub symmetry_residual: Option<f64>,
    /// Local unitaries `(U_AA', U_BB')` achieving `symmetry_residual`.
    pub symmetry_unitaries: Option<(CMatrix, CMatrix)>,
    /// Frobenius distance between `Tr_{A'B'}(state)` and `extends`.
    pub marginal_residual: f64,
    pub optimizer_report: Option<OptimizerReport>,
}

impl ExtensionResult {
    /// `Tr_{A'B'}` of the extension.
    pub fn marginal(&self) -> DensityMatrix {
        let b = self.state.split().expect("extensions are bipartite");
        let last = self.state.num_subsystems() - 1;
        self.state
            .partial_trace(&[b - 1, last])
            .expect("ancilla indices are in range")
    }

    pub fn is_extension(&self) -> bool {
        self.marginal_residual <= MARGINAL_GATE
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_residual.is_some_and(|r| r <= SYMMETRY_GATE)
    }
}

/// Dims and cut of an extension of `rho` with ancillas `(a, b)`.
fn extension_layout(rho: &DensityMatrix, ancilla: (usize, usize)) -> Result<(Vec<usize>, usize)> {
    let split = rho.split().ok_or(QccError::NotBipartite)?;
    let mut dims: Vec<usize> = rho.dims()[..split].to_vec();
    dims.push(ancilla.0);
    dims.extend_from_slice(&rho.dims()[split..]);
    dims.push(ancilla.1);
    Ok((dims, split + 1))
}

/// Wrap a raw matrix on `A A' | B B'` as an extension of `rho` and certify it.
/// The correlated coherence is taken in canonical (degeneracy-minimized) eigenbases.
pub fn evaluate_extension(
    state_matrix: CMatrix,
    rho: &DensityMatrix,
    ancilla: (usize, usize),
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    let (dims, split) = extension_layout(rho, ancilla)?;
    let state = DensityMatrix::new(state_matrix, dims, Some(split))?;
    let da = state.side_dim(Side::A)?;
    let db = state.side_dim(Side::B)?;
    let cc = correlated::canonical_raw(
        state.matrix(),
        da,
        db,
        CanonicalBasisMode::MinimizedOverDegeneracy,
        &degeneracy_config(config),
    )?;
    let mut out = ExtensionResult {
        state,
        extends: rho.clone(),
        ancilla_dims: ancilla,
        cc_value: cc.value,
        basis: cc.basis_used,
        symmetry_residual: None,
        symmetry_unitaries: None,
        marginal_residual: 0.0,
        optimizer_report: None,
    };
    out.marginal_residual = linalg::frobenius_distance(out.marginal().matrix(), rho.matrix());
    Ok(out)
}

fn degeneracy_config(config: &OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: optim::DEGENERACY_RESTARTS,
        max_iters: 3000,
        ..config.clone()
    }
}

/// `‖(U ⊗ V) S(ρ) (U ⊗ V)† − ρ‖_F` for a state on `d ⊗ d`.
pub fn symmetry_residual_with(m: &CMatrix, d: usize, u: &CMatrix, v: &CMatrix) -> f64 {
    symmetry_residual_sq(m, &state::swap_halves(m, d), u, v).sqrt()
}

fn symmetry_residual_sq(m: &CMatrix, swapped: &CMatrix, u: &CMatrix, v: &CMatrix) -> f64 {
    let rotated = linalg::conjugate_product(swapped, u, v);
    rotated
        .iter()
        .zip(m.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum()
}

/// Outcome of [`unitary_symmetry_residual`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub residual: f64,
    /// Minimizing `(U_AA', U_BB')`; absent for a spectral certificate.
    pub unitaries: Option<(CMatrix, CMatrix)>,
    /// True when the marginal spectra already differ, in which case `residual`
    /// is the lower bound `max_k |λ_k(ρ_AA') − λ_k(ρ_BB')| / sqrt(d)` and no
    /// optimization ran.
    pub spectral_certificate: bool,
}

/// Minimum over local unitaries of the distance between `ρ` and its rotated swap.
pub fn unitary_symmetry_residual(
    ext: &DensityMatrix,
    config: &OptimizerConfig,
) -> Result<SymmetryCheck> {
    unitary_symmetry_residual_seeded(ext, &[], config)
}

/// As [`unitary_symmetry_residual`], with extra starting points for the search.
pub fn unitary_symmetry_residual_seeded(
    ext: &DensityMatrix,
    seeds: &[(CMatrix, CMatrix)],
    config: &OptimizerConfig,
) -> Result<SymmetryCheck> {
    config.validate()?;
    let da = ext.side_dim(Side::A)?;
    let db = ext.side_dim(Side::B)?;
    if da != db {
        return Err(QccError::DimMismatch {
            expected: da,
            found: db,
        });
    }
    let (ra, rb) = correlated::two_party_marginals(ext.matrix(), da, db);
    let gap = linalg::eigvalsh(&ra)
        .iter()
        .zip(linalg::eigvalsh(&rb))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if gap > SPECTRAL_GAP_TOL {
        return Ok(SymmetryCheck {
            residual: gap / (da as f64).sqrt(),
            unitaries: None,
            spectral_certificate: true,
        });
    }
    let (residual, u, v, _) = minimize_symmetry(ext.matrix(), da, seeds, config);
    Ok(SymmetryCheck {
        residual,
        unitaries: Some((u, v)),
        spectral_certificate: false,
    })
}

/// `(E_A E_B†, E_B E_A†)` from the marginal eigenbases: exact for states
/// whose swap-symmetry maps eigenvectors to eigenvectors, up to phases and
/// rotations inside degenerate blocks.
fn aligned_unitaries(m: &CMatrix, d: usize) -> (CMatrix, CMatrix) {
    let (ra, rb) = correlated::two_party_marginals(m, d, d);
    let (_, ea) = linalg::eigh(&ra);
    let (_, eb) = linalg::eigh(&rb);
    (&ea * eb.adjoint(), &eb * ea.adjoint())
}

/// Multi-restart search over `(U, V)`. The first restarts start at the
/// supplied seeds, then at the eigenbasis alignment, then at the identity,
/// the rest at Haar-random unitaries.
fn minimize_symmetry(
    m: &CMatrix,
    d: usize,
    seeds: &[(CMatrix, CMatrix)],
    config: &OptimizerConfig,
) -> (f64, CMatrix, CMatrix, OptimizerReport) {
    let swapped = state::swap_halves(m, d);
    let np = linalg::unitary_param_count(d);
    let cfg = OptimizerConfig {
        tolerance: 1e-24,
        ..config.clone()
    };
    let (report, (u, v)) = optim::multistart(&cfg, |restart| {
        let (u0, v0) = if let Some(s) = seeds.get(restart) {
            s.clone()
        } else if restart == seeds.len() {
            aligned_unitaries(m, d)
        } else if restart == seeds.len() + 1 {
            (linalg::identity(d), linalg::identity(d))
        } else {
            let mut rng = CounterRng::stream(config.seed ^ 0x5157, restart as u64);
            (haar_unitary(d, &mut rng), haar_unitary(d, &mut rng))
        };
        let build = |x: &[f64]| {
            (
                &u0 * linalg::unitary_from_params(d, &x[..np]),
                &v0 * linalg::unitary_from_params(d, &x[np..]),
            )
        };
        let f = |x: &[f64]| {
            let (u, v) = build(x);
            symmetry_residual_sq(m, &swapped, &u, &v)
        };
        let local =
            optim::nelder_mead_until(f, &vec![0.0; 2 * np], config.initial_step, &cfg, 1e-24);
        let uv = build(&local.x);
        (local, uv)
    });
    (report.best_value.max(0.0).sqrt(), u, v, report)
}

/// Orthonormal tagged vectors `x_i ⊗ |i⟩` (ancilla of dimension `anc`) as matrix columns.
fn tagged_columns(vectors: impl Iterator<Item = CVector>, anc: usize) -> CMatrix {
    let cols: Vec<CVector> = vectors
        .enumerate()
        .map(|(i, x)| x.kronecker(&linalg::basis_vector(anc, i)))
        .collect();
    let d = cols[0].len();
    let mut out = CMatrix::zeros(d, cols.len());
    for (k, c) in cols.iter().enumerate() {
        out.set_column(k, c);
    }
    out
}

/// Ancilla dims `(a', b')` with `a' ≥ n`, `b' ≥ n` and `d_A a' = d_B b'`.
fn witness_ancillas(n: usize, da: usize, db: usize) -> (usize, usize) {
    let l = lcm(da, db);
    (n * (l / da), n * (l / db))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// The extension `Σ_i p_i |α_i, i⟩⟨α_i, i| ⊗ |β_i, i⟩⟨β_i, i|` of a separable
/// state, whose correlated coherence vanishes in its eigenbases, together with
/// the explicit swap-restoring unitaries. When `d_A != d_B` the ancillas are
/// enlarged (with unused levels) until both sides have equal dimension.
pub fn separable_extension(decomp: &SeparableDecomposition) -> Result<ExtensionResult> {
    separable_extension_with(decomp, &OptimizerConfig::degeneracy())
}

pub fn separable_extension_with(
    decomp: &SeparableDecomposition,
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    let (da, db) = decomp.dims();
    let n = decomp.terms().len();
    let (a, b) = witness_ancillas(n, da, db);
    let mu = tagged_columns(decomp.terms().iter().map(|t| t.alpha.clone()), a);
    let nu = tagged_columns(decomp.terms().iter().map(|t| t.beta.clone()), b);
    let mut m = CMatrix::zeros(da * a * db * b, da * a * db * b);
    for (k, t) in decomp.terms().iter().enumerate() {
        let v = mu.column(k).kronecker(&nu.column(k));
        m += linalg::projector(&v).scale(t.weight);
    }
    let rho = decomp.state();
    let mut out = evaluate_extension(m, &rho, (a, b), config)?;
    let cm = linalg::complete_to_unitary(&mu);
    let cn = linalg::complete_to_unitary(&nu);
    let u = &cm * cn.adjoint();
    let v = u.adjoint();
    out.symmetry_residual = Some(symmetry_residual_with(out.state.matrix(), da * a, &u, &v));
    out.symmetry_unitaries = Some((u, v));
    Ok(out)
}

/// Options shared by [`min_cc_extension`] and [`eoc_upper_bound`].
#[derive(Debug, Clone, Default)]
pub struct ExtensionOptions {
    /// `(d_A', d_B')`; `None` uses `(d_A, d_B)`.
    pub ancilla: Option<(usize, usize)>,
    /// Dimension of the traced-out register `G`; `None` uses `max(rank, d_A' d_B')`.
    pub garbage_dim: Option<usize>,
    /// Separable decomposition of the input, used to seed one restart with its witness extension.
    pub witness: Option<SeparableDecomposition>,
}

impl ExtensionOptions {
    pub fn with_ancilla(a: usize, b: usize) -> Self {
        Self {
            ancilla: Some((a, b)),
            ..Self::default()
        }
    }

    pub fn witness(mut self, decomp: SeparableDecomposition) -> Self {
        self.witness = Some(decomp);
        self
    }
}

/// The purification-plus-isometry parameterization of extensions.
struct ExtensionModel {
    /// Columns `√λ_k |e_k⟩` of the canonical purification.
    psi: CMatrix,
    lambdas: Vec<f64>,
    da: usize,
    db: usize,
    a: usize,
    b: usize,
    g: usize,
}

impl ExtensionModel {
    fn new(rho: &DensityMatrix, ancilla: (usize, usize), garbage: Option<usize>) -> Result<Self> {
        let da = rho.side_dim(Side::A)?;
        let db = rho.side_dim(Side::B)?;
        let (vals, vecs) = linalg::eigh(rho.matrix());
        let r = vals.iter().filter(|&&l| l > RANK_TOL).count().max(1);
        let lambdas: Vec<f64> = vals[..r].iter().map(|l| l.max(0.0)).collect();
        let mut psi = vecs.columns(0, r).into_owned();
        for (k, mut col) in psi.column_iter_mut().enumerate() {
            col *= real(lambdas[k].sqrt());
        }
        // Renormalize so the discarded tail does not leave Tr ≠ 1.
        let total: f64 = lambdas.iter().sum();
        psi.unscale_mut(total.sqrt());
        let lambdas = lambdas.iter().map(|l| l / total).collect();
        let (a, b) = ancilla;
        if a == 0 || b == 0 {
            return Err(QccError::InvalidArgument(
                "ancilla dimensions must be at least 1".into(),
            ));
        }
        let g = garbage.unwrap_or(r.max(a * b)).max(r);
        Ok(Self {
            psi,
            lambdas,
            da,
            db,
            a,
            b,
            g,
        })
    }

    fn rank(&self) -> usize {
        self.psi.ncols()
    }

    fn n(&self) -> usize {
        self.a * self.b * self.g
    }

    fn side(&self) -> (usize, usize) {
        (self.da * self.a, self.db * self.b)
    }

    /// Extension state for the isometry `w` (`n x r`).
    fn state(&self, w: &CMatrix) -> CMatrix {
        let x = &self.psi * w.transpose();
        let (sa, sb) = self.side();
        let mut y = CMatrix::zeros(sa * sb, self.g);
        for ia in 0..self.da {
            for ib in 0..self.db {
                let row = ia * self.db + ib;
                for al in 0..self.a {
                    for be in 0..self.b {
                        let out = (ia * self.a + al) * sb + ib * self.b + be;
                        let col0 = (al * self.b + be) * self.g;
                        for gm in 0..self.g {
                            y[(out, gm)] = x[(row, col0 + gm)];
                        }
                    }
                }
            }
        }
        &y * y.adjoint()
    }

    /// Isometry realizing the separable witness extension, if it fits.
    fn witness_isometry(&self, decomp: &SeparableDecomposition) -> Result<CMatrix> {
        let n_terms = decomp.terms().len();
        if n_terms > self.a || n_terms > self.b || n_terms > self.g {
            return Err(QccError::InvalidArgument(format!(
                "witness with {n_terms} terms needs ancillas and garbage of dimension at least {n_terms}"
            )));
        }
        if decomp.dims() != (self.da, self.db) {
            let (x, y) = decomp.dims();
            return Err(QccError::DimMismatch {
                expected: self.da * self.db,
                found: x * y,
            });
        }
        let r = self.rank();
        let mut w = CMatrix::zeros(self.n(), r);
        for (i, t) in decomp.terms().iter().enumerate() {
            let ab = t.alpha.kronecker(&t.beta);
            let tag = (i * self.b + i) * self.g + i;
            for k in 0..r {
                let overlap = self.psi.column(k).dotc(&ab);
                w[(tag, k)] += overlap * t.weight.sqrt() / self.lambdas[k];
            }
        }
        let res = linalg::max_abs_diff(&(w.adjoint() * &w), &linalg::identity(r));
        if res > 1e-6 {
            return Err(QccError::InvalidArgument(format!(
                "decomposition does not reproduce the state (isometry defect {res:.2e})"
            )));
        }
        // Re-orthonormalize away the roundoff.
        Ok(linalg::gram_schmidt(&w).unwrap_or(w))
    }

    /// Isometry giving `ρ_AB ⊗ ρ^swap_A'B'`, where `A'` holds a copy of `B` and
    /// `B'` one of `A`. This extension is swap-symmetric for every state, and
    /// needs `d_A' ≥ d_B`, `d_B' ≥ d_A` and a garbage register of at least `rank²`.
    fn swap_copy_isometry(&self) -> Option<CMatrix> {
        let r = self.rank();
        if self.a < self.db || self.b < self.da || self.g < r * r {
            return None;
        }
        let mut w = CMatrix::zeros(self.n(), r);
        // psi rows are indexed (a, b); the copy puts b on A' and a on B'.
        for k in 0..r {
            for j in 0..r {
                for ia in 0..self.da {
                    for ib in 0..self.db {
                        let tag = (ib * self.b + ia) * self.g + k * r + j;
                        w[(tag, k)] = self.psi[(ia * self.db + ib, j)];
                    }
                }
            }
        }
        Some(w)
    }

    /// Isometry giving `Σ_k λ_k |e_k⟩⟨e_k| ⊗ |k, k⟩⟨k, k|_A'B'`, each eigenvector
    /// of `ρ_AB` with its own flag. Needs ancillas and garbage of at least the rank.
    fn spectral_flag_isometry(&self) -> Option<CMatrix> {
        let r = self.rank();
        if self.a < r || self.b < r || self.g < r {
            return None;
        }
        let mut w = CMatrix::zeros(self.n(), r);
        for k in 0..r {
            w[((k * self.b + k) * self.g + k, k)] = linalg::ONE;
        }
        Some(w)
    }

    /// Side unitaries restoring the swap-copy extension after a side swap.
    fn swap_copy_unitaries(&self) -> (CMatrix, CMatrix) {
        let s = self.da * self.a;
        let mut pu = CMatrix::zeros(s, self.da * self.db);
        let mut pv = CMatrix::zeros(s, self.da * self.db);
        for x in 0..self.db {
            for y in 0..self.da {
                // U: (x on B, y on B') -> (y on A, x on A').
                pu[(y * self.a + x, x * self.da + y)] = linalg::ONE;
                // V: (y on A, x on A') -> (x on B, y on B').
                pv[(x * self.b + y, y * self.db + x)] = linalg::ONE;
            }
        }
        (
            complete_from_map(&pu, self.db, self.b, self.da),
            complete_from_map(&pv, self.da, self.a, self.db),
        )
    }
}

/// Extend a partial permutation (`pu`, column `x * d2 + y` the image of the
/// pair `(x, y)`) to a unitary on the full side space, where the source layout is
/// `(x < d1) x (y < d2)` inside `d1 x stride`.
fn complete_from_map(pu: &CMatrix, d1: usize, stride: usize, d2: usize) -> CMatrix {
    let s = pu.nrows();
    let mut partial = CMatrix::zeros(s, s);
    let mut sources = Vec::new();
    for x in 0..d1 {
        for y in 0..d2 {
            sources.push(x * stride + y);
        }
    }
    for (k, &src) in sources.iter().enumerate() {
        partial.set_column(src, &pu.column(k));
    }
    let targets: Vec<usize> = (0..s).filter(|t| !sources.contains(t)).collect();
    let images: Vec<usize> = (0..s)
        .filter(|&t| (0..pu.ncols()).all(|k| pu[(t, k)] == linalg::ZERO))
        .collect();
    for (&src, &img) in targets.iter().zip(&images) {
        partial[(img, src)] = linalg::ONE;
    }
    partial
}

/// A structured starting point: an `n x r` isometry plus optional side unitaries.
struct Start {
    iso: CMatrix,
    unitaries: Option<(CMatrix, CMatrix)>,
}

/// Starts tried before the random ones: the trivial extension
/// `ρ ⊗ |0⟩⟨0| ⊗ |0⟩⟨0|`, the separable witness, the flagged eigen-decomposition
/// and the swap copy, each when supplied and when it fits.
fn structured_starts(
    model: &ExtensionModel,
    options: &ExtensionOptions,
    with_swap_copy: bool,
) -> Result<Vec<Start>> {
    let n = model.n();
    let trivial = linalg::identity(n).columns(0, model.rank()).into_owned();
    let mut starts = vec![Start {
        iso: trivial,
        unitaries: None,
    }];
    if let Some(decomp) = &options.witness {
        let w = model.witness_isometry(decomp)?;
        starts.push(Start {
            iso: w,
            unitaries: Some(witness_symmetry(decomp, (model.a, model.b))),
        });
    }
    if model.rank() > 1 {
        if let Some(w) = model.spectral_flag_isometry() {
            let (sa, sb) = model.side();
            let unitaries = (sa == sb).then(|| aligned_unitaries(&model.state(&w), sa));
            starts.push(Start { iso: w, unitaries });
        }
    }
    if with_swap_copy {
        if let Some(w) = model.swap_copy_isometry() {
            starts.push(Start {
                iso: w,
                unitaries: Some(model.swap_copy_unitaries()),
            });
        }
    }
    Ok(starts)
}

fn restart_base(starts: &[Start], restart: usize, n: usize, seed: u64) -> CMatrix {
    match starts.get(restart) {
        Some(s) => linalg::complete_to_unitary(&s.iso),
        None => haar_unitary(n, &mut CounterRng::stream(seed, restart as u64)),
    }
}

/// Report for a search settled by its last structured start without iterating.
fn start_report(values: &[f64]) -> OptimizerReport {
    let k = values.len() - 1;
    let restarts = values
        .iter()
        .enumerate()
        .map(|(j, &v)| RestartTrace {
            restart: j,
            initial_value: v,
            final_value: v,
            iterations: 0,
            evaluations: 1,
            converged: j == k,
            trace: vec![v],
        })
        .collect();
    OptimizerReport {
        best_value: values[k],
        best_restart: k,
        restarts,
    }
}

fn cc_fixed(m: &CMatrix, sa: usize, sb: usize) -> f64 {
    let (ra, rb) = correlated::two_party_marginals(m, sa, sb);
    let ea = LocalBasis::eigenbasis(&ra);
    let eb = LocalBasis::eigenbasis(&rb);
    correlated::cc_raw(m, sa, sb, ea.matrix(), eb.matrix())
}

/// `(d_A, d_B)`, or the witness ancillas when a decomposition is supplied.
fn default_ancilla(options: &ExtensionOptions, da: usize, db: usize) -> (usize, usize) {
    match (&options.ancilla, &options.witness) {
        (Some(a), _) => *a,
        (None, Some(w)) => {
            let (a, b) = witness_ancillas(w.terms().len(), da, db);
            (a.max(da), b.max(db))
        }
        (None, None) => (da, db),
    }
}

/// `max(rank, a·b)`, raised for a witness and, when it fits, the swap copy.
/// Ancillas sized from a witness alone get just `max(rank, terms)`: they
/// can be large and the witness already settles the search.
fn default_garbage(
    options: &ExtensionOptions,
    ancilla: (usize, usize),
    rank: usize,
    swap_copy: Option<(usize, usize)>,
) -> usize {
    if let (None, Some(w)) = (&options.ancilla, &options.witness) {
        return options.garbage_dim.unwrap_or(rank.max(w.terms().len()));
    }
    let mut g = rank.max(ancilla.0 * ancilla.1);
    if let Some(w) = &options.witness {
        g = g.max(w.terms().len());
    }
    if let Some((da, db)) = swap_copy {
        if ancilla.0 >= db && ancilla.1 >= da {
            g = g.max(rank * rank);
        }
    }
    options.garbage_dim.unwrap_or(g)
}

fn rank_of(rho: &DensityMatrix) -> usize {
    linalg::eigvalsh(rho.matrix())
        .iter()
        .filter(|&&l| l > RANK_TOL)
        .count()
        .max(1)
}

/// Minimum correlated coherence over extensions with the given ancillas,
/// without any symmetry requirement. Zero (within optimizer tolerance)
/// signals a separable input; the result is an upper bound.
pub fn min_cc_extension(
    rho: &DensityMatrix,
    options: &ExtensionOptions,
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    config.validate()?;
    let da = rho.side_dim(Side::A)?;
    let db = rho.side_dim(Side::B)?;
    let ancilla = default_ancilla(options, da, db);
    let garbage = default_garbage(options, ancilla, rank_of(rho), None);
    let model = ExtensionModel::new(rho, ancilla, Some(garbage))?;
    let starts = structured_starts(&model, options, false)?;
    let (sa, sb) = model.side();
    let r = model.rank();
    let np = linalg::isometry_param_count(model.n(), r);

    // Correlated coherence is non-negative, so a start already at zero is optimal.
    let mut seen = Vec::new();
    for start in &starts {
        let ext = model.state(&start.iso);
        seen.push(cc_fixed(&ext, sa, sb));
        if seen[seen.len() - 1] <= OBJECTIVE_FLOOR {
            let mut out = evaluate_extension(ext, rho, ancilla, config)?;
            out.optimizer_report = Some(start_report(&seen));
            return Ok(out);
        }
    }

    let (report, best_state) = optim::multistart(config, |restart| {
        let base = restart_base(&starts, restart, model.n(), config.seed);
        let f = |x: &[f64]| {
            cc_fixed(
                &model.state(&linalg::isometry_from_params(&base, r, x)),
                sa,
                sb,
            )
        };
        let local = optim::nelder_mead_until(
            f,
            &vec![0.0; np],
            config.initial_step,
            config,
            OBJECTIVE_FLOOR,
        );
        let state = model.state(&linalg::isometry_from_params(&base, r, &local.x));
        (local, state)
    });
    if !report.any_converged() {
        return Err(QccError::OptimizerDidNotConverge {
            best: report.best_value,
        });
    }
    let mut out = evaluate_extension(best_state, rho, ancilla, config)?;
    out.optimizer_report = Some(report);
    Ok(out)
}

/// Upper bound on the entanglement of coherence: minimum correlated coherence
/// over extensions that are unitarily swap-symmetric within [`SYMMETRY_GATE`].
///
/// The search minimizes `cc + μ · residual²` jointly over the extension
/// isometry and the two local unitaries, then re-minimizes the residual for
/// each restart's extension and keeps the lowest canonical `cc` among those
/// passing the gate. Ancillas are enlarged when needed so that
/// `dim(AA') = dim(BB')`.
pub fn eoc_upper_bound(
    rho: &DensityMatrix,
    options: &ExtensionOptions,
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    config.validate()?;
    let da = rho.side_dim(Side::A)?;
    let db = rho.side_dim(Side::B)?;
    let ancilla = pad_to_equal_sides(default_ancilla(options, da, db), da, db);
    let garbage = default_garbage(options, ancilla, rank_of(rho), Some((da, db)));
    let model = ExtensionModel::new(rho, ancilla, Some(garbage))?;
    let starts = structured_starts(&model, options, true)?;
    let (s, _) = model.side();
    let r = model.rank();
    let nw = linalg::isometry_param_count(model.n(), r);
    let nu = linalg::unitary_param_count(s);
    let mu = config.penalty_weight;
    let deg = degeneracy_config(config);

    let mut seen = Vec::new();
    for start in &starts {
        let ext = model.state(&start.iso);
        let value = cc_fixed(&ext, s, s);
        seen.push(value);
        if let Some((u, v)) = &start.unitaries {
            let residual = symmetry_residual_with(&ext, s, u, v);
            if value <= OBJECTIVE_FLOOR && residual <= SYMMETRY_GATE {
                let mut out = evaluate_extension(ext, rho, ancilla, config)?;
                out.symmetry_residual = Some(residual);
                out.symmetry_unitaries = Some((u.clone(), v.clone()));
                out.optimizer_report = Some(start_report(&seen));
                return Ok(out);
            }
        }
    }

    let (report, candidates) = optim::multistart_all(config, |restart| {
        let base = restart_base(&starts, restart, model.n(), config.seed);
        let (u0, v0) = match starts.get(restart).and_then(|st| st.unitaries.clone()) {
            Some(uv) => uv,
            None => (linalg::identity(s), linalg::identity(s)),
        };
        let build = |x: &[f64]| {
            let ext = model.state(&linalg::isometry_from_params(&base, r, &x[..nw]));
            let u = &u0 * linalg::unitary_from_params(s, &x[nw..nw + nu]);
            let v = &v0 * linalg::unitary_from_params(s, &x[nw + nu..]);
            (ext, u, v)
        };
        let residual_sq = |ext: &CMatrix, u: &CMatrix, v: &CMatrix| {
            symmetry_residual_sq(ext, &state::swap_halves(ext, s), u, v)
        };
        let polish = OptimizerConfig {
            restarts: POLISH_RESTARTS,
            execution: Execution::Sequential,
            seed: config.seed ^ restart as u64,
            ..config.clone()
        };
        // Re-minimize the residual with the extension held fixed, then score it.
        let finish = |ext: CMatrix, u: CMatrix, v: CMatrix| {
            let (residual, u, v, _) = minimize_symmetry(&ext, s, &[(u, v)], &polish);
            let cc = if residual <= SYMMETRY_GATE {
                correlated::canonical_raw(
                    &ext,
                    s,
                    s,
                    CanonicalBasisMode::MinimizedOverDegeneracy,
                    &deg,
                )
                .map_or(f64::INFINITY, |c| c.value)
            } else {
                f64::INFINITY
            };
            Candidate {
                ext,
                u,
                v,
                residual,
                cc,
            }
        };
        let mut found = Vec::new();
        let x0 = vec![0.0; nw + 2 * nu];
        if restart < starts.len() {
            let (ext, u, v) = build(&x0);
            found.push(finish(ext, u, v));
        }

        // Penalty continuation: raise μ tenfold until the residual clears the gate.
        let mut x = x0;
        let mut step = config.initial_step;
        let mut weight = mu;
        let mut iterations = 0;
        let mut evaluations = 0;
        let mut local = None;
        for _ in 0..=PENALTY_STEPS {
            let f = |x: &[f64]| {
                let (ext, u, v) = build(x);
                cc_fixed(&ext, s, s) + weight * residual_sq(&ext, &u, &v)
            };
            let phase = optim::nelder_mead_until(f, &x, step, config, OBJECTIVE_FLOOR);
            iterations += phase.iterations;
            evaluations += phase.evaluations;
            x.clone_from(&phase.x);
            let (ext, u, v) = build(&x);
            let done = residual_sq(&ext, &u, &v).sqrt() <= 0.5 * SYMMETRY_GATE;
            local = Some(phase);
            if done {
                break;
            }
            weight *= 10.0;
            step *= 0.3;
        }
        let mut local = local.expect("at least one penalty phase");
        local.iterations = iterations;
        local.evaluations = evaluations;
        let (ext, u, v) = build(&x);
        found.push(finish(ext, u, v));
        (local, found)
    });
    let candidates: Vec<Candidate> = candidates.into_iter().flatten().collect();
    let best_residual = candidates
        .iter()
        .map(|c| c.residual)
        .fold(f64::INFINITY, f64::min);
    let chosen = candidates
        .into_iter()
        .filter(|c| c.residual <= SYMMETRY_GATE)
        .min_by(|x, y| x.cc.total_cmp(&y.cc))
        .ok_or(QccError::NoSymmetricCandidateFound { best_residual })?;
    let mut out = evaluate_extension(chosen.ext, rho, ancilla, config)?;
    out.symmetry_residual = Some(chosen.residual);
    out.symmetry_unitaries = Some((chosen.u, chosen.v));
    out.optimizer_report = Some(report);
    Ok(out)
}

/// Restarts of the symmetry polish run after each extension restart.
const POLISH_RESTARTS: usize = 4;
/// Tenfold increases of the penalty weight tried after the first phase.
const PENALTY_STEPS: usize = 4;

struct Candidate {
    ext: CMatrix,
    u: CMatrix,
    v: CMatrix,
    residual: f64,
    cc: f64,
}

fn pad_to_equal_sides(requested: (usize, usize), da: usize, db: usize) -> (usize, usize) {
    let l = lcm(da, db);
    let need = (da * requested.0).max(db * requested.1);
    let total = need.div_ceil(l) * l;
    (total / da, total / db)
}

/// Swap-restoring unitaries of the witness extension laid out with ancillas `ancilla`.
fn witness_symmetry(
    decomp: &SeparableDecomposition,
    ancilla: (usize, usize),
) -> (CMatrix, CMatrix) {
    let mu = tagged_columns(decomp.terms().iter().map(|t| t.alpha.clone()), ancilla.0);
    let nu = tagged_columns(decomp.terms().iter().map(|t| t.beta.clone()), ancilla.1);
    let u = linalg::complete_to_unitary(&mu) * linalg::complete_to_unitary(&nu).adjoint();
    let v = u.adjoint();
    (u, v)
}

/// Apply `U_A ⊗ 1_A' ⊗ U_B ⊗ 1_B'` to an extension. The result extends the
/// rotated state; its symmetry unitaries become `U_A U U_B†` and `U_B V U_A†`.
pub fn transport_extension(
    ext: &ExtensionResult,
    ua: &CMatrix,
    ub: &CMatrix,
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    let (a, b) = ext.ancilla_dims;
    let wa = linalg::kron(ua, &linalg::identity(a));
    let wb = linalg::kron(ub, &linalg::identity(b));
    let full = linalg::kron(&wa, &wb);
    if linalg::unitarity_residual(&full) > 1e-9 {
        return Err(QccError::NotUnitary(linalg::unitarity_residual(&full)));
    }
    if full.nrows() != ext.state.dim() {
        return Err(QccError::DimMismatch {
            expected: ext.state.dim(),
            found: full.nrows(),
        });
    }
    let extends = DensityMatrix::new(
        linalg::kron(ua, ub) * ext.extends.matrix() * linalg::kron(ua, ub).adjoint(),
        ext.extends.dims().to_vec(),
        ext.extends.split(),
    )?;
    let moved = &full * ext.state.matrix() * full.adjoint();
    let mut out = evaluate_extension(moved, &extends, ext.ancilla_dims, config)?;
    if let Some((u, v)) = &ext.symmetry_unitaries {
        let u2 = &wa * u * wb.adjoint();
        let v2 = &wb * v * wa.adjoint();
        out.symmetry_residual = Some(symmetry_residual_with(
            out.state.matrix(),
            wa.nrows(),
            &u2,
            &v2,
        ));
        out.symmetry_unitaries = Some((u2, v2));
    }
    Ok(out)
}

/// View an extension of `ρ_{A_1 .. A_n B}` as an extension of the state with
/// the listed A subsystems traced out, by moving them into the ancilla `A'`.
/// The symmetry unitaries follow the reordering of Alice's factors.
pub fn restrict_extension(
    ext: &ExtensionResult,
    drop_a: &[usize],
    config: &OptimizerConfig,
) -> Result<ExtensionResult> {
    let split = ext.extends.split().ok_or(QccError::NotBipartite)?;
    if let Some(&bad) = drop_a.iter().find(|&&k| k >= split) {
        return Err(QccError::BadSubsystemIndex {
            index: bad,
            count: split,
        });
    }
    if drop_a.len() >= split {
        return Err(QccError::InvalidArgument(
            "cannot trace out every subsystem of A".into(),
        ));
    }
    let dims = ext.state.dims().to_vec();
    let keep: Vec<usize> = (0..split).filter(|k| !drop_a.contains(k)).collect();
    let mut order = keep.clone();
    order.extend_from_slice(drop_a);
    order.extend(split..dims.len());
    let permuted = ext
        .state
        .permute(&order, Some(keep.len() + drop_a.len() + 1))?;
    let dropped: usize = drop_a.iter().map(|&k| dims[k]).product();
    let a2 = dropped * ext.ancilla_dims.0;
    let mut new_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    new_dims.push(a2);
    new_dims.extend_from_slice(&dims[split + 1..]);
    let target = ext.extends.partial_trace(drop_a)?;
    let mut out = evaluate_extension(
        permuted.into_matrix(),
        &target,
        (a2, ext.ancilla_dims.1),
        config,
    )?;
    debug_assert_eq!(out.state.dims(), new_dims.as_slice());
    if let Some((u, v)) = &ext.symmetry_unitaries {
        let side_a: Vec<usize> = dims[..=split].to_vec();
        let mut side_order = order[..=split].to_vec();
        side_order.retain(|&k| k <= split);
        let p = permutation_matrix(&side_a, &side_order);
        let u2 = &p * u;
        let v2 = v * p.adjoint();
        out.symmetry_residual = Some(symmetry_residual_with(
            out.state.matrix(),
            p.nrows(),
            &u2,
            &v2,
        ));
        out.symmetry_unitaries = Some((u2, v2));
    }
    Ok(out)
}

/// Unitary reordering tensor factors with `dims` into `order`.
fn permutation_matrix(dims: &[usize], order: &[usize]) -> CMatrix {
    let d: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut p = CMatrix::zeros(d, d);
    for i in 0..d {
        let dg = state::digits(i, dims);
        let j = order
            .iter()
            .zip(&new_dims)
            .fold(0, |acc, (&k, &nd)| acc * nd + dg[k]);
        p[(j, i)] = linalg::ONE;
    }
    p
}

/// The flagged mixture `λ ρ* ⊗ |00⟩⟨00| + (1 − λ) σ* ⊗ |11⟩⟨11|` of two
/// extensions on equal-shaped spaces. Each flag joins its side's ancilla.
pub fn mixture_extension(
    ext_rho: &ExtensionResult,
    ext_sigma: &ExtensionResult,
    lambda: f64,
) -> Result<ExtensionResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(QccError::InvalidArgument(format!(
            "mixing weight {lambda} outside [0, 1]"
        )));
    }
    flagged_mixture(
        &[ext_rho.clone(), ext_sigma.clone()],
        &[lambda, 1.0 - lambda],
    )
}

/// `Σ_k w_k ρ*_k ⊗ |k k⟩⟨k k|` for extensions on equal-shaped spaces.
///
/// The correlated coherence is evaluated in the block basis built from the
/// inputs' bases, which is an eigenbasis pair of the mixture's marginals, so
/// it equals `Σ_k w_k cc(ρ*_k)`. Symmetry unitaries, when every input carries
/// them, are the flag-controlled `Σ_k U_k ⊗ |k⟩⟨k|`.
pub fn flagged_mixture(exts: &[ExtensionResult], weights: &[f64]) -> Result<ExtensionResult> {
    let first = exts
        .first()
        .ok_or_else(|| QccError::InvalidArgument("nothing to mix".into()))?;
    if exts.len() != weights.len() {
        return Err(QccError::InvalidArgument(format!(
            "{} extensions but {} weights",
            exts.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (total - 1.0).abs() > 1e-10 {
        return Err(QccError::InvalidArgument(
            "mixing weights must be a probability vector".into(),
        ));
    }
    for e in exts {
        if e.state.dims() != first.state.dims() || e.state.split() != first.state.split() {
            return Err(QccError::DimMismatch {
                expected: first.state.dim(),
                found: e.state.dim(),
            });
        }
    }
    let n = exts.len();
    let sa = first.state.side_dim(Side::A)?;
    let sb = first.state.side_dim(Side::B)?;
    let flag = |k: usize| linalg::projector(&linalg::basis_vector(n, k));
    let map = |k: usize, f: usize| ((k / sb) * n + f) * n * sb + (k % sb) * n + f;
    let d = n * n * sa * sb;
    let mut m = CMatrix::zeros(d, d);
    let mut ba = CMatrix::zeros(n * sa, n * sa);
    let mut bb = CMatrix::zeros(n * sb, n * sb);
    let mut extends = CMatrix::zeros(first.extends.dim(), first.extends.dim());
    for (f, (e, &w)) in exts.iter().zip(weights).enumerate() {
        let src = e.state.matrix();
        for i in 0..sa * sb {
            for j in 0..sa * sb {
                m[(map(i, f), map(j, f))] = src[(i, j)] * w;
            }
        }
        ba += linalg::kron(e.basis.basis_a.matrix(), &flag(f));
        bb += linalg::kron(e.basis.basis_b.matrix(), &flag(f));
        extends += e.extends.matrix().scale(w);
    }
    let basis = ProductBasisChoice::new(LocalBasis::new(ba)?, LocalBasis::new(bb)?);
    let extends = DensityMatrix::new(
        extends,
        first.extends.dims().to_vec(),
        first.extends.split(),
    )?;
    let ancilla = (n * first.ancilla_dims.0, n * first.ancilla_dims.1);
    let (dims, split) = extension_layout(&extends, ancilla)?;
    let state = DensityMatrix::new(m, dims, Some(split))?;
    let cc_value = correlated::cc_raw(
        state.matrix(),
        n * sa,
        n * sb,
        basis.basis_a.matrix(),
        basis.basis_b.matrix(),
    );
    let mut out = ExtensionResult {
        state,
        extends,
        ancilla_dims: ancilla,
        cc_value,
        basis,
        symmetry_residual: None,
        symmetry_unitaries: None,
        marginal_residual: 0.0,
        optimizer_report: None,
    };
    out.marginal_residual =
        linalg::frobenius_distance(out.marginal().matrix(), out.extends.matrix());
    if sa == sb && exts.iter().all(|e| e.symmetry_unitaries.is_some()) {
        let mut wa = CMatrix::zeros(n * sa, n * sa);
        let mut wb = CMatrix::zeros(n * sb, n * sb);
        for (f, e) in exts.iter().enumerate() {
            let (u, v) = e.symmetry_unitaries.as_ref().expect("checked above");
            wa += linalg::kron(u, &flag(f));
            wb += linalg::kron(v, &flag(f));
        }
        out.symmetry_residual = Some(symmetry_residual_with(out.state.matrix(), n * sa, &wa, &wb));
        out.symmetry_unitaries = Some((wa, wb));
    }
    Ok(out)
}
