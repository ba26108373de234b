//! Matrix export and the saved-state file read by `fcmsc export`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fcmsc_core::dataset::write_matrix_csv;
use fcmsc_core::{build_affinity, DenseMatrix, SolverState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixKind {
    Z,
    C,
    Ex,
    Ez,
    Affinity,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 5] = [
        MatrixKind::Z,
        MatrixKind::C,
        MatrixKind::Ex,
        MatrixKind::Ez,
        MatrixKind::Affinity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Z => "Z",
            MatrixKind::C => "C",
            MatrixKind::Ex => "E_x",
            MatrixKind::Ez => "E_z",
            MatrixKind::Affinity => "affinity",
        }
    }

    /// Parses a comma-separated list such as `Z,C,affinity`.
    pub fn parse_list(s: &str) -> Result<Vec<MatrixKind>> {
        let mut out: Vec<MatrixKind> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let kind = part.parse()?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "").to_ascii_lowercase();
        MatrixKind::ALL
            .into_iter()
            .find(|k| k.name().replace('_', "").to_ascii_lowercase() == key)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown matrix {s:?}; expected Z, C, E_x, E_z or affinity"
                ))
            })
    }
}

/// Writes each requested matrix as `<name>.csv` in `dir` (created if
/// needed) and returns the written paths in request order. The affinity is
/// the symmetrised `(|C| + |Cᵀ|) / 2`.
pub fn export_matrices(state: &SolverState, which: &[MatrixKind], dir: &Path) -> Result<Vec<PathBuf>> {
    if which.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut manifest = Vec::with_capacity(which.len());
    for &kind in which {
        let affinity;
        let m: &DenseMatrix = match kind {
            MatrixKind::Z => &state.z,
            MatrixKind::C => &state.c,
            MatrixKind::Ex => &state.e_x,
            MatrixKind::Ez => &state.e_z,
            MatrixKind::Affinity => {
                affinity = build_affinity(&state.c)?;
                &affinity
            }
        };
        let path = dir.join(format!("{}.csv", kind.name()));
        write_matrix_csv(&path, m)?;
        manifest.push(path);
    }
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    /// Column-major entries.
    pub data: Vec<f64>,
}

impl From<&DenseMatrix> for MatrixData {
    fn from(m: &DenseMatrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl MatrixData {
    fn to_matrix(&self, what: &str) -> Result<DenseMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Config(format!(
                "state matrix {what} has {} entries, expected {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(DenseMatrix::from_column_slice(self.rows, self.cols, &self.data))
    }
}

/// The primal variables of a finished run, as written by
/// `fcmsc run --save-state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedState {
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub z: MatrixData,
    pub c: MatrixData,
    pub e_x: MatrixData,
    pub e_z: MatrixData,
    pub j: MatrixData,
}

impl SavedState {
    pub fn new(method: &str, trial: usize, seed: u64, state: &SolverState) -> Self {
        Self {
            method: method.to_string(),
            trial,
            seed,
            iterations: state.iter,
            converged: state.converged,
            z: (&state.z).into(),
            c: (&state.c).into(),
            e_x: (&state.e_x).into(),
            e_z: (&state.e_z).into(),
            j: (&state.j).into(),
        }
    }

    /// Rebuilds a solver state; multipliers come back as zeros.
    pub fn to_solver_state(&self) -> Result<SolverState> {
        let z = self.z.to_matrix("z")?;
        let (n, d) = (z.nrows(), self.e_x.rows);
        let mut s = SolverState::zeros(d, n, z, 0.0);
        s.c = self.c.to_matrix("c")?;
        s.e_x = self.e_x.to_matrix("e_x")?;
        s.e_z = self.e_z.to_matrix("e_z")?;
        s.j = self.j.to_matrix("j")?;
        for (what, m) in [("c", &s.c), ("e_z", &s.e_z), ("j", &s.j)] {
            if m.shape() != (n, n) {
                return Err(CliError::Config(format!(
                    "state matrix {what} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if s.e_x.ncols() != n {
            return Err(CliError::Config(format!(
                "state matrix e_x has {} columns, expected {n}",
                s.e_x.ncols()
            )));
        }
        s.iter = self.iterations;
        s.converged = self.converged;
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let text = serde_json::to_string(self).expect("state serialises");
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}
