//! State and decomposition files.
//!
//! Numbers are written with 17 significant digits so that a write followed by
//! a read gives back the same doubles.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use qcc_core::extension::{SeparableDecomposition, SeparableTerm};
use qcc_core::linalg::{c, CMatrix, CVector};
use qcc_core::DensityMatrix;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims_a: Vec<usize>,
    pub dims_b: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn to_state(&self) -> anyhow::Result<DensityMatrix> {
        if self.dims_a.is_empty() || self.dims_b.is_empty() {
            bail!("dims_a and dims_b must be non-empty");
        }
        if self.dims_a.iter().chain(&self.dims_b).any(|&d| d == 0) {
            bail!("subsystem dimensions must be positive");
        }
        let d: usize = self.dims_a.iter().chain(&self.dims_b).product();
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            bail!(
                "re and im must both be {d}x{d} for dims {:?} | {:?}",
                self.dims_a,
                self.dims_b
            );
        }
        let m = CMatrix::from_fn(d, d, |i, j| c(self.re[i][j], self.im[i][j]));
        Ok(DensityMatrix::bipartite(m, &self.dims_a, &self.dims_b)?)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn num_list(xs: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = xs.map(num).collect();
    format!("[{}]", parts.join(", "))
}

fn dims_list(dims: &[usize]) -> String {
    let parts: Vec<String> = dims.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn matrix_rows(m: &CMatrix, part: fn(&num_complex::Complex64) -> f64) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| format!("    {}", num_list(m.row(i).iter().map(part))))
        .collect();
    format!("[\n{}\n  ]", rows.join(",\n"))
}

/// Serialize a bipartite state. Fails if `rho` carries no A|B cut.
pub fn render_state(rho: &DensityMatrix) -> anyhow::Result<String> {
    let split = rho.split().context("state has no A|B cut")?;
    let (a, b) = rho.dims().split_at(split);
    let m = rho.matrix();
    let mut out = String::from("{\n");
    writeln!(out, "  \"dims_a\": {},", dims_list(a))?;
    writeln!(out, "  \"dims_b\": {},", dims_list(b))?;
    writeln!(out, "  \"re\": {},", matrix_rows(m, |z| z.re))?;
    writeln!(out, "  \"im\": {}", matrix_rows(m, |z| z.im))?;
    out.push_str("}\n");
    Ok(out)
}

pub fn read_state(path: &Path) -> anyhow::Result<DensityMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: StateFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_state()
        .with_context(|| format!("validating {}", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    weight: f64,
    alpha_re: Vec<f64>,
    alpha_im: Vec<f64>,
    beta_re: Vec<f64>,
    beta_im: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionFile {
    terms: Vec<TermFile>,
}

fn vector(re: &[f64], im: &[f64]) -> anyhow::Result<CVector> {
    if re.len() != im.len() {
        bail!("real and imaginary parts differ in length");
    }
    Ok(CVector::from_iterator(
        re.len(),
        re.iter().zip(im).map(|(&x, &y)| c(x, y)),
    ))
}

pub fn render_decomposition(decomp: &SeparableDecomposition) -> String {
    let terms: Vec<String> = decomp
        .terms()
        .iter()
        .map(|t| {
            format!(
                "    {{\"weight\": {}, \"alpha_re\": {}, \"alpha_im\": {}, \"beta_re\": {}, \"beta_im\": {}}}",
                num(t.weight),
                num_list(t.alpha.iter().map(|z| z.re)),
                num_list(t.alpha.iter().map(|z| z.im)),
                num_list(t.beta.iter().map(|z| z.re)),
                num_list(t.beta.iter().map(|z| z.im)),
            )
        })
        .collect();
    format!("{{\n  \"terms\": [\n{}\n  ]\n}}\n", terms.join(",\n"))
}

pub fn read_decomposition(path: &Path) -> anyhow::Result<SeparableDecomposition> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: DecompositionFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let terms = file
        .terms
        .iter()
        .map(|t| {
            Ok(SeparableTerm {
                weight: t.weight,
                alpha: vector(&t.alpha_re, &t.alpha_im)?,
                beta: vector(&t.beta_re, &t.beta_im)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SeparableDecomposition::new(terms)?)
}
