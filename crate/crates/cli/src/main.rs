//! `qcc`: coherence, correlated coherence, discord and entanglement-of-coherence
//! bounds for states stored as JSON files.
//!
//! Every command prints one JSON document on stdout. Exit codes: 0 success,
//! 2 invalid input, 3 when the optimizer could not certify a feasible result.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcc_core::basis::{LocalBasis, ProductBasisChoice};
use qcc_core::correlated::{self, CanonicalBasisMode, CLASSIFIER_TOL};
use qcc_core::extension::{self, ExtensionOptions, ExtensionResult};
use qcc_core::stategen::{self, BellState};
use qcc_core::{coherence, par, DensityMatrix, OptimizerConfig, QccError, Side};
use serde_json::{json, Value};

const EXIT_INVALID: u8 = 2;
const EXIT_GATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qcc",
    version,
    about = "Correlated coherence and entanglement-of-coherence toolkit"
)]
struct Cli {
    /// Refuse to run randomized commands without an explicit --seed.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// l1-norm coherence.
    Coherence {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BasisArg::Computational)]
        basis: BasisArg,
    },
    /// Correlated coherence in the canonical local eigenbases.
    Cc {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Min)]
        mode: ModeArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Zero-discord tests.
    Discord {
        file: PathBuf,
        /// Symmetric discord (measurements on both sides).
        #[arg(long, conflicts_with = "asym")]
        sym: bool,
        /// Asymmetric discord with the measurement on side A or B.
        #[arg(long, value_enum)]
        asym: Option<SideArg>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Upper bound on the entanglement of coherence.
    Eoc {
        file: PathBuf,
        /// Ancilla dimensions on A and B.
        #[arg(long, num_args = 2, value_names = ["DA", "DB"])]
        ancilla: Option<Vec<usize>>,
        /// Penalty weight on the symmetry residual.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Separable decomposition used to seed the search.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Write the extension found to this file.
        #[arg(long)]
        extension_out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Generate a state file.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        seed: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Check whether a state extends another, and how far it is from unitary swap symmetry.
    CheckExtension {
        ext_file: PathBuf,
        #[arg(long)]
        marginal: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct SearchArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Subcommand)]
enum Family {
    Bell {
        #[arg(value_enum, default_value_t = BellArg::PhiPlus)]
        which: BellArg,
    },
    Werner {
        #[arg(long)]
        p: f64,
    },
    RandomPure {
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
    },
    RandomMixed {
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Random separable state; optionally writes its decomposition and the symmetric witness extension.
    Separable {
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
        #[arg(long, default_value_t = 2)]
        terms: usize,
        #[arg(long)]
        decomposition_out: Option<PathBuf>,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    CcState {
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
    },
    CqState {
        #[arg(long, default_value_t = 2)]
        da: usize,
        #[arg(long, default_value_t = 2)]
        db: usize,
    },
}

impl Family {
    fn randomized(&self) -> bool {
        !matches!(self, Family::Bell { .. } | Family::Werner { .. })
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum BasisArg {
    Computational,
    /// Product of the marginal eigenbases.
    Eigen,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Fixed,
    Min,
}

#[derive(ValueEnum, Clone, Copy)]
enum SideArg {
    A,
    B,
}

#[derive(ValueEnum, Clone, Copy)]
enum BellArg {
    #[value(name = "phi+")]
    PhiPlus,
    #[value(name = "phi-")]
    PhiMinus,
    #[value(name = "psi+")]
    PsiPlus,
    #[value(name = "psi-")]
    PsiMinus,
}

impl From<BellArg> for BellState {
    fn from(b: BellArg) -> Self {
        match b {
            BellArg::PhiPlus => BellState::PhiPlus,
            BellArg::PhiMinus => BellState::PhiMinus,
            BellArg::PsiPlus => BellState::PsiPlus,
            BellArg::PsiMinus => BellState::PsiMinus,
        }
    }
}

enum Failure {
    Invalid(anyhow::Error),
    Gate(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let gate = e.chain().any(|c| {
            matches!(
                c.downcast_ref::<QccError>(),
                Some(
                    QccError::NoSymmetricCandidateFound { .. }
                        | QccError::OptimizerDidNotConverge { .. }
                )
            )
        });
        if gate {
            Failure::Gate(e)
        } else {
            Failure::Invalid(e)
        }
    }
}

impl From<QccError> for Failure {
    fn from(e: QccError) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(t) = std::env::var("QCC_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                par::configure_threads(n);
            }
            _ => {
                eprintln!("error: QCC_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(EXIT_INVALID);
            }
        }
    }
    match run(&cli) {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Gate(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_GATE)
        }
    }
}

fn config(search: &SearchArgs, strict: bool) -> Result<OptimizerConfig, Failure> {
    if strict && search.seed.is_none() {
        return Err(Failure::Invalid(anyhow!(
            "--strict requires --seed for this command"
        )));
    }
    let mut cfg = OptimizerConfig::default().with_seed(search.seed.unwrap_or(0));
    if let Some(r) = search.restarts {
        cfg = cfg.with_restarts(r);
    }
    Ok(cfg)
}

fn basis_json(b: &LocalBasis) -> Value {
    let m = b.matrix();
    let rows = |part: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| m.row(i).iter().map(part).collect())
            .collect()
    };
    json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

fn run(cli: &Cli) -> Result<String, Failure> {
    if let Command::Gen {
        family,
        seed,
        output,
    } = &cli.command
    {
        return gen(cli.strict, family, *seed, output.as_deref());
    }
    command(cli).map(|v| v.to_string())
}

fn command(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Coherence { file, basis } => {
            let rho = io::read_state(file)?;
            let c = match basis {
                BasisArg::Computational => {
                    let bases: Vec<LocalBasis> = rho
                        .dims()
                        .iter()
                        .map(|&d| LocalBasis::computational(d))
                        .collect();
                    coherence::l1_coherence(&rho, &bases)?
                }
                BasisArg::Eigen => {
                    let pb = ProductBasisChoice::new(
                        correlated::local_eigenbasis(&rho, Side::A)?,
                        correlated::local_eigenbasis(&rho, Side::B)?,
                    );
                    coherence::l1_coherence(&rho.as_two_party()?, &pb)?
                }
            };
            Ok(json!({ "c_l1": c }))
        }
        Command::Cc { file, mode, search } => {
            let rho = io::read_state(file)?.as_two_party()?;
            let mode = match mode {
                ModeArg::Fixed => CanonicalBasisMode::Fixed,
                ModeArg::Min => CanonicalBasisMode::MinimizedOverDegeneracy,
            };
            let mut cfg = config(
                search,
                cli.strict && mode == CanonicalBasisMode::MinimizedOverDegeneracy,
            )?;
            if search.restarts.is_none() {
                cfg.restarts = qcc_core::optim::DEGENERACY_RESTARTS;
            }
            let r = correlated::correlated_coherence_canonical(&rho, mode, &cfg)?;
            Ok(json!({
                "value": r.value,
                "mode": match r.mode { CanonicalBasisMode::Fixed => "fixed", _ => "min" },
                "basis_a": basis_json(&r.basis_used.basis_a),
                "basis_b": basis_json(&r.basis_used.basis_b),
                "restarts_used": r.optimizer_report.as_ref().map_or(0, |rep| rep.restarts.len()),
            }))
        }
        Command::Discord {
            file,
            sym,
            asym,
            tol,
            search,
        } => {
            let rho = io::read_state(file)?.as_two_party()?;
            let mut cfg = config(search, cli.strict)?;
            if search.restarts.is_none() {
                cfg.restarts = qcc_core::optim::DEGENERACY_RESTARTS;
            }
            let tol = tol.unwrap_or(CLASSIFIER_TOL);
            match (sym, asym) {
                (false, None) => Err(Failure::Invalid(anyhow!("choose --sym or --asym A|B"))),
                (_, Some(side)) => {
                    let side = match side {
                        SideArg::A => Side::A,
                        SideArg::B => Side::B,
                    };
                    let v = correlated::asymmetric_discord_delta(&rho, side, tol, &cfg)?;
                    Ok(
                        json!({ "kind": "asymmetric", "side": format!("{side:?}"), "value": v.delta, "zero": v.zero }),
                    )
                }
                (true, None) => {
                    let v = correlated::symmetric_discord_zero(&rho, tol, &cfg)?;
                    Ok(json!({ "kind": "symmetric", "value": v.cc.value, "zero": v.zero }))
                }
            }
        }
        Command::Eoc {
            file,
            ancilla,
            mu,
            max_iters,
            decomposition,
            extension_out,
            search,
        } => {
            let rho = io::read_state(file)?.as_two_party()?;
            let mut cfg = config(search, cli.strict)?;
            if let Some(mu) = mu {
                cfg.penalty_weight = *mu;
            }
            if let Some(n) = max_iters {
                cfg.max_iters = *n;
            }
            let mut opts = ExtensionOptions::default();
            if let Some(a) = ancilla {
                opts = ExtensionOptions::with_ancilla(a[0], a[1]);
            }
            if let Some(path) = decomposition {
                opts = opts.witness(io::read_decomposition(path)?);
            }
            let ext = extension::eoc_upper_bound(&rho, &opts, &cfg)?;
            if let Some(path) = extension_out {
                write_file(path, &io::render_state(&ext.state)?)?;
            }
            Ok(extension_summary(&ext))
        }
        Command::Gen { .. } => unreachable!("handled in run"),
        Command::CheckExtension {
            ext_file,
            marginal,
            search,
        } => {
            let rho = io::read_state(marginal)?.as_two_party()?;
            let ext = io::read_state(ext_file)?;
            let mut cfg = config(search, cli.strict)?;
            if search.restarts.is_none() {
                cfg.restarts = qcc_core::optim::DEGENERACY_RESTARTS;
            }
            let ancilla = ancilla_of(&ext, &rho)?;
            let result = extension::evaluate_extension(ext.matrix().clone(), &rho, ancilla, &cfg)?;
            let symmetry = if result.state.side_dim(Side::A)? == result.state.side_dim(Side::B)? {
                let check = extension::unitary_symmetry_residual(&result.state, &cfg)?;
                Some(check.residual)
            } else {
                None
            };
            Ok(json!({
                "is_extension": result.is_extension(),
                "marginal_residual": result.marginal_residual,
                "symmetry_residual": symmetry,
                "cc_value": result.cc_value,
            }))
        }
    }
}

/// Ancilla dims `(a', b')` such that `ext` lives on `A a' | B b'` for `rho` on `A | B`.
fn ancilla_of(ext: &DensityMatrix, rho: &DensityMatrix) -> Result<(usize, usize), Failure> {
    let (ea, eb) = (ext.side_dim(Side::A)?, ext.side_dim(Side::B)?);
    let (ra, rb) = (rho.side_dim(Side::A)?, rho.side_dim(Side::B)?);
    if ea % ra != 0 || eb % rb != 0 {
        return Err(Failure::Invalid(anyhow!(
            "extension sides ({ea}, {eb}) are not multiples of the marginal sides ({ra}, {rb})"
        )));
    }
    Ok((ea / ra, eb / rb))
}

fn extension_summary(ext: &ExtensionResult) -> Value {
    let report = ext.optimizer_report.as_ref();
    json!({
        "value": ext.cc_value,
        "upper_bound": true,
        "symmetry_residual": ext.symmetry_residual,
        "marginal_residual": ext.marginal_residual,
        "ancilla": [ext.ancilla_dims.0, ext.ancilla_dims.1],
        "restarts_used": report.map_or(0, |r| r.restarts.len()),
        "best_restart": report.map(|r| r.best_restart),
    })
}

/// Generated states go to `output`, or verbatim to stdout.
fn gen(
    strict: bool,
    family: &Family,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<String, Failure> {
    if strict && family.randomized() && seed.is_none() {
        return Err(Failure::Invalid(anyhow!(
            "--strict requires --seed for random families"
        )));
    }
    let rho = generate(family, seed.unwrap_or(0))?;
    let text = io::render_state(&rho)?;
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(json!({ "written": path.display().to_string(), "dim": rho.dim() }).to_string())
        }
        None => Ok(text),
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(family: &Family, seed: u64) -> Result<DensityMatrix, Failure> {
    let rho = match family {
        Family::Bell { which } => stategen::bell((*which).into()),
        Family::Werner { p } => stategen::werner(*p)?,
        Family::RandomPure { da, db } => {
            positive(&[*da, *db])?;
            stategen::random_pure_bipartite(*da, *db, seed)
        }
        Family::RandomMixed { da, db, rank } => {
            positive(&[*da, *db])?;
            stategen::random_mixed_bipartite(*da, *db, rank.unwrap_or(da * db), seed)?
        }
        Family::Separable {
            da,
            db,
            terms,
            decomposition_out,
            witness_out,
        } => {
            positive(&[*da, *db])?;
            let (rho, decomp) = stategen::random_separable(*terms, (*da, *db), seed)?;
            if let Some(path) = decomposition_out {
                write_file(path, &io::render_decomposition(&decomp))?;
            }
            if let Some(path) = witness_out {
                let ext = extension::separable_extension(&decomp)?;
                write_file(path, &io::render_state(&ext.state)?)?;
            }
            rho
        }
        Family::CcState { da, db } => {
            positive(&[*da, *db])?;
            stategen::random_cc_state(*da, *db, seed)
        }
        Family::CqState { da, db } => {
            positive(&[*da, *db])?;
            stategen::random_cq_state(*da, *db, seed)
        }
    };
    Ok(rho)
}

fn positive(dims: &[usize]) -> Result<(), Failure> {
    if dims.contains(&0) {
        return Err(Failure::Invalid(anyhow!("dimensions must be positive")));
    }
    Ok(())
}
