use std::path::{Path, PathBuf};

use mereo_core::doubleket::GammaOperator;
use mereo_core::random::{ginibre, stream_rng};
use mereo_core::{ComplexMatrix, SystemDims, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TOL_ENV: &str = "MEREO_TOL_OVERRIDE";

/// Row-major complex matrix as parallel real and imaginary arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: m.real_parts(),
            im: m.imag_parts(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        ComplexMatrix::from_parts(self.rows, self.cols, &self.re, &self.im)
            .map_err(|e| CliError::Input(format!("matrix: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `I/√2`, the Bell state.
    Bell2,
    /// `|0⟩⟨0|`, a product state.
    Product2,
    /// `I/√3`.
    Maxent3,
}

impl Preset {
    pub fn gamma(self) -> GammaOperator {
        match self {
            Preset::Bell2 => GammaOperator::maximally_entangled(2),
            Preset::Product2 => GammaOperator::new(ComplexMatrix::real_diag(&[1.0, 0.0])).expect("unit norm"),
            Preset::Maxent3 => GammaOperator::maximally_entangled(3),
        }
    }
}

/// Where Γ came from, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GammaSource {
    File { path: PathBuf },
    Preset { name: Preset },
    Random { seed: u64, dims: SystemDims },
}

impl GammaSource {
    pub fn load(&self) -> Result<GammaOperator, CliError> {
        match self {
            GammaSource::Preset { name } => Ok(name.gamma()),
            GammaSource::Random { seed, dims } => {
                let mut rng = stream_rng(*seed, 0);
                GammaOperator::normalized(&ginibre(dims.d_a, dims.d_b, &mut rng)).map_err(CliError::from)
            }
            GammaSource::File { path } => {
                let m: MatrixJson = read_json(path)?;
                let m = m.to_matrix()?;
                SystemDims::for_holism(m.rows(), m.cols()).map_err(CliError::from)?;
                GammaOperator::normalized(&m).map_err(CliError::from)
            }
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Defaults, then the environment override, then an explicit `tol_rank`.
pub fn tolerances(tol_rank: Option<f64>) -> Result<Tolerances, CliError> {
    let mut tol = match std::env::var(TOL_ENV) {
        Ok(raw) => serde_json::from_str::<Tolerances>(&raw)
            .map_err(|e| CliError::Input(format!("{TOL_ENV}: {e}")))?,
        Err(_) => Tolerances::default(),
    };
    if let Some(r) = tol_rank {
        tol = tol.with_rank(r);
    }
    if !tol.is_valid() {
        return Err(CliError::Input(format!("tolerances must be positive and finite: {tol:?}")));
    }
    Ok(tol)
}
