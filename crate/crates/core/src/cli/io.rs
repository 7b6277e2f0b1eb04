//! Matrix, weight and probability-vector files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distances::ProbabilityVector;
use crate::linalg::{HermitianMatrix, SpdMatrix};
use crate::means::WeightVector;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: crate::Error,
    },
    #[error("{path}: {reason}")]
    Shape { path: PathBuf, reason: String },
}

/// One matrix per file: `{"dim": n, "real": [[..]..], "imag": [[..]..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    /// Serialize a Hermitian matrix, omitting `imag` when it is identically zero.
    pub fn from_hermitian(h: &HermitianMatrix) -> Self {
        let n = h.dim();
        let m = h.matrix();
        let real = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let imag: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        let any_imag = imag.iter().flatten().any(|&v| v != 0.0);
        Self {
            dim: n,
            real,
            imag: any_imag.then_some(imag),
        }
    }

    fn flatten(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<Vec<f64>, String> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(format!("`{what}` must be a {dim}x{dim} array"));
        }
        Ok(rows.iter().flatten().copied().collect())
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix, String> {
        if self.dim == 0 {
            return Err("`dim` must be positive".into());
        }
        let real = Self::flatten(&self.real, self.dim, "real")?;
        let imag = self.imag.as_ref().map(|im| Self::flatten(im, self.dim, "imag")).transpose()?;
        HermitianMatrix::from_parts(self.dim, &real, imag.as_deref()).map_err(|e| e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Read {
        path: path.to_owned(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|source| InputError::Json {
        path: path.to_owned(),
        source,
    })
}

/// A loaded input together with its raw bytes (for the report digest).
pub struct Loaded<T> {
    pub value: T,
    pub bytes: Vec<u8>,
}

pub fn read_hermitian(path: &Path) -> Result<Loaded<HermitianMatrix>, InputError> {
    let text = read_text(path)?;
    let file: MatrixFile = parse_json(path, &text)?;
    let value = file.to_hermitian().map_err(|reason| InputError::Shape {
        path: path.to_owned(),
        reason,
    })?;
    Ok(Loaded {
        value,
        bytes: text.into_bytes(),
    })
}

pub fn read_spd(path: &Path) -> Result<Loaded<SpdMatrix>, InputError> {
    let h = read_hermitian(path)?;
    let value = SpdMatrix::new(h.value).map_err(|source| InputError::Invalid {
        path: path.to_owned(),
        source,
    })?;
    Ok(Loaded { value, bytes: h.bytes })
}

pub fn read_probability(path: &Path) -> Result<Loaded<ProbabilityVector>, InputError> {
    let text = read_text(path)?;
    let entries: Vec<f64> = parse_json(path, &text)?;
    let value = ProbabilityVector::new(entries).map_err(|source| InputError::Invalid {
        path: path.to_owned(),
        source,
    })?;
    Ok(Loaded {
        value,
        bytes: text.into_bytes(),
    })
}

/// Weights file: a JSON array of positive numbers.
pub fn read_weights(path: &Path) -> Result<Loaded<WeightVector>, InputError> {
    let text = read_text(path)?;
    let raw: Vec<f64> = parse_json(path, &text)?;
    let value = WeightVector::new(raw).map_err(|source| InputError::Invalid {
        path: path.to_owned(),
        source,
    })?;
    Ok(Loaded {
        value,
        bytes: text.into_bytes(),
    })
}

pub fn write_matrix(path: &Path, h: &HermitianMatrix) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_hermitian(h)).expect("matrix serializes");
    fs::write(path, text + "\n")
}
