//! Role manifests naming one MatrixMarket file per system matrix.
//!
//! ```toml
//! form = "standard"            # or "descriptor"
//! initial_state_convention = "transformed"   # descriptor only
//!
//! [matrices]
//! J = "J.mtx"
//! D = "D.mtx"
//! H = "H.mtx"                  # descriptor form: E and Q instead
//! B = "B.mtx"
//! x0 = "x0.mtx"                # optional, N x 1
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use phmor::phcore::{descriptor_to_standard, DescriptorPhSystem, InitialStateConvention, ValidationReport};
use phmor::{PhMatrices, PhSystem, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, ParseError};
use crate::mtx::{parse_matrix_market, write_matrix_market, MtxError, MtxFormat, MtxHeader, MtxSymmetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelForm {
    Standard,
    Descriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Transformed,
    Literal,
}

impl From<Convention> for InitialStateConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Transformed => Self::Transformed,
            Convention::Literal => Self::Literal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleManifest {
    pub form: ModelForm,
    #[serde(default)]
    pub initial_state_convention: Convention,
    pub matrices: BTreeMap<String, PathBuf>,
}

impl RoleManifest {
    fn roles(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self.form {
            ModelForm::Standard => (&["J", "D", "H", "B"], &["x0"]),
            ModelForm::Descriptor => (&["E", "Q", "J", "D", "B"], &["x0"]),
        }
    }

    fn check_roles(&self) -> Result<(), String> {
        let (required, optional) = self.roles();
        for role in required {
            if !self.matrices.contains_key(*role) {
                return Err(format!("missing matrix role '{role}'"));
            }
        }
        for role in self.matrices.keys() {
            if !required.contains(&role.as_str()) && !optional.contains(&role.as_str()) {
                return Err(format!("unknown matrix role '{role}' for {:?} form", self.form));
            }
        }
        Ok(())
    }
}

/// 1-based line of a byte offset.
pub(crate) fn line_at(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

pub(crate) fn toml_parse_error(text: &str, err: &toml::de::Error) -> ParseError {
    let line = err.span().map_or(1, |s| line_at(text, s.start));
    ParseError::new(line, err.message().to_string())
}

/// Parses and checks a role manifest.
pub fn parse_manifest(text: &str) -> Result<RoleManifest, ParseError> {
    let m: RoleManifest = toml::from_str(text).map_err(|e| toml_parse_error(text, &e))?;
    m.check_roles().map_err(|reason| {
        let line = text
            .lines()
            .position(|l| l.trim_start().starts_with("[matrices]"))
            .map_or(1, |i| i + 1);
        ParseError::new(line, reason)
    })?;
    Ok(m)
}

fn read_text(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

/// Reads one MatrixMarket file.
pub fn load_matrix(path: &Path, dense_limit: usize) -> Result<DMatrix<f64>, BenchError> {
    let text = read_text(path)?;
    parse_matrix_market(&text, dense_limit).map_err(|e| match e {
        MtxError::Parse(source) => BenchError::Parse {
            path: path.to_path_buf(),
            source,
        },
        MtxError::DenseLimitExceeded { rows, cols, limit } => BenchError::DenseLimitExceeded {
            n: rows.max(cols),
            limit,
        },
    })
}

/// A model read from disk.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub system: PhSystem,
    /// The original descriptor system when the manifest used that form.
    pub descriptor: Option<DescriptorPhSystem>,
}

fn column(m: DMatrix<f64>, role: &str) -> Result<DVector<f64>, BenchError> {
    if m.ncols() != 1 {
        return Err(BenchError::InvalidParameter(format!(
            "{role} must be a single column, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.column(0).into_owned())
}

/// Matrices read from disk, before any structural check.
#[derive(Debug, Clone)]
pub struct RawModel {
    pub manifest: RoleManifest,
    pub matrices: BTreeMap<String, DMatrix<f64>>,
}

/// Parses a role manifest and reads every matrix it names.
pub fn read_model(manifest_path: &Path, dense_limit: usize) -> Result<RawModel, BenchError> {
    let text = read_text(manifest_path)?;
    let manifest = parse_manifest(&text).map_err(|source| BenchError::Parse {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut matrices = BTreeMap::new();
    for (role, rel) in &manifest.matrices {
        matrices.insert(role.clone(), load_matrix(&base.join(rel), dense_limit)?);
    }
    Ok(RawModel { manifest, matrices })
}

enum Assembled {
    Standard(PhMatrices),
    Descriptor(DescriptorPhSystem),
}

impl RawModel {
    fn assemble(&self) -> Result<Assembled, BenchError> {
        let take = |role: &str| self.matrices[role].clone();
        let n = self.matrices["J"].nrows();
        let x0 = match self.matrices.get("x0") {
            Some(m) => column(m.clone(), "x0")?,
            None => DVector::zeros(n),
        };
        // shapes beyond the column check are validated by phcore
        Ok(match self.manifest.form {
            ModelForm::Standard => Assembled::Standard(PhMatrices {
                j: take("J"),
                d: take("D"),
                h: take("H"),
                b: take("B"),
                x0,
            }),
            ModelForm::Descriptor => Assembled::Descriptor(DescriptorPhSystem {
                e: take("E"),
                q: take("Q"),
                j: take("J"),
                d: take("D"),
                b: take("B"),
                x0_tilde: x0,
            }),
        })
    }

    /// Structural checks of the matrices as given.
    pub fn validate(&self, tol: &Tolerances) -> Result<ValidationReport, BenchError> {
        Ok(match self.assemble()? {
            Assembled::Standard(m) => m.validate(tol)?,
            Assembled::Descriptor(d) => d.validate(tol)?,
        })
    }

    /// Builds the standard-form system; descriptor systems are converted.
    pub fn into_model(self, tol: Tolerances) -> Result<LoadedModel, BenchError> {
        Ok(match self.assemble()? {
            Assembled::Standard(m) => LoadedModel {
                system: PhSystem::from_matrices(m, tol)?,
                descriptor: None,
            },
            Assembled::Descriptor(dsys) => LoadedModel {
                system: descriptor_to_standard(&dsys, self.manifest.initial_state_convention.into(), tol)?,
                descriptor: Some(dsys),
            },
        })
    }
}

/// Loads and validates the model named by a role manifest. Descriptor
/// systems are converted to standard form.
pub fn load_matrices(manifest_path: &Path, dense_limit: usize, tol: Tolerances) -> Result<LoadedModel, BenchError> {
    read_model(manifest_path, dense_limit)?.into_model(tol)
}

fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

/// Writes `sys` as `J.mtx`, `D.mtx`, `H.mtx`, `B.mtx`, `x0.mtx` plus
/// `manifest.toml` into `dir` and returns the manifest path.
pub fn write_matrices(sys: &PhSystem, dir: &Path) -> Result<PathBuf, BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let coord = |symmetry| MtxHeader {
        format: MtxFormat::Coordinate,
        symmetry,
    };
    let x0 = DMatrix::from_column_slice(sys.dim(), 1, sys.x0().as_slice());
    let files: [(&str, &DMatrix<f64>, MtxHeader); 5] = [
        ("J", sys.j(), coord(MtxSymmetry::SkewSymmetric)),
        ("D", sys.d(), coord(MtxSymmetry::Symmetric)),
        ("H", sys.h(), coord(MtxSymmetry::Symmetric)),
        ("B", sys.b(), coord(MtxSymmetry::General)),
        (
            "x0",
            &x0,
            MtxHeader {
                format: MtxFormat::Array,
                symmetry: MtxSymmetry::General,
            },
        ),
    ];
    let mut manifest = RoleManifest {
        form: ModelForm::Standard,
        initial_state_convention: Convention::default(),
        matrices: BTreeMap::new(),
    };
    for (role, m, header) in files {
        let name = format!("{role}.mtx");
        write_file(&dir.join(&name), &write_matrix_market(m, header))?;
        manifest.matrices.insert(role.to_string(), PathBuf::from(name));
    }
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).map_err(|e| BenchError::Config(e.to_string()))?;
    write_file(&path, &text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roles() {
        let ok = "form = \"standard\"\n[matrices]\nJ = \"J.mtx\"\nD = \"D.mtx\"\nH = \"H.mtx\"\nB = \"B.mtx\"\n";
        let m = parse_manifest(ok).unwrap();
        assert_eq!(m.form, ModelForm::Standard);
        assert_eq!(m.matrices.len(), 4);

        let missing = "form = \"standard\"\n[matrices]\nJ = \"J.mtx\"\n";
        assert_eq!(parse_manifest(missing).unwrap_err().line, 2);

        let unknown =
            "form = \"descriptor\"\n[matrices]\nE = \"a\"\nQ = \"a\"\nJ = \"a\"\nD = \"a\"\nB = \"a\"\nH = \"a\"\n";
        assert!(parse_manifest(unknown)
            .unwrap_err()
            .reason
            .contains("unknown matrix role 'H'"));
    }

    #[test]
    fn manifest_syntax_error_line() {
        let bad = "form = \"standard\"\n\n[matrices\nJ = 1\n";
        assert_eq!(parse_manifest(bad).unwrap_err().line, 3);
        let wrong_form = "form = \"sparse\"\n[matrices]\n";
        assert_eq!(parse_manifest(wrong_form).unwrap_err().line, 1);
    }

    #[test]
    fn line_numbers() {
        assert_eq!(line_at("a\nb\nc", 0), 1);
        assert_eq!(line_at("a\nb\nc", 2), 2);
        assert_eq!(line_at("a\nb\nc", 100), 3);
    }
}
