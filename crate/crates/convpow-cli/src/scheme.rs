//! Scheme sources: named presets or JSON files.

use std::path::Path;

use convpow::schemes::{implicit_centered, lax_friedrichs};
use convpow::{Complex64, ConvolutionOperator, SchemePair};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A coefficient written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coeff> for Complex64 {
    fn from(c: Coeff) -> Self {
        match c {
            Coeff::Real(re) => Complex64::new(re, 0.0),
            Coeff::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `coeffs[i]` is the coefficient of offset `i - r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub r: usize,
    pub p: usize,
    pub coeffs: Vec<Coeff>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    #[serde(default)]
    pub name: Option<String>,
    pub q0: OperatorFile,
    pub q1: OperatorFile,
}

impl OperatorFile {
    fn from_operator(op: &ConvolutionOperator) -> Self {
        OperatorFile {
            r: op.r(),
            p: op.p(),
            coeffs: op
                .coeffs()
                .iter()
                .map(|c| Coeff::Complex([c.re, c.im]))
                .collect(),
        }
    }

    fn to_operator(&self) -> convpow::Result<ConvolutionOperator> {
        ConvolutionOperator::new(
            self.r,
            self.p,
            self.coeffs.iter().map(|&c| c.into()).collect(),
        )
    }
}

impl SchemeFile {
    pub fn from_pair(pair: &SchemePair) -> Self {
        SchemeFile {
            name: Some(pair.name.clone()),
            q0: OperatorFile::from_operator(pair.q0()),
            q1: OperatorFile::from_operator(pair.q1()),
        }
    }

    pub fn to_pair(&self, fallback_name: &str) -> convpow::Result<SchemePair> {
        let name = self
            .name
            .clone()
            .unwrap_or_else(|| fallback_name.to_string());
        SchemePair::new(name, self.q0.to_operator()?, self.q1.to_operator()?)
    }
}

/// Resolves `lf:<lambda>`, `imp:<lambda>` or a path to a JSON scheme file.
pub fn load_scheme(source: &str) -> Result<SchemePair, CliError> {
    if let Some((kind, value)) = source.split_once(':') {
        let builder: Option<fn(f64) -> convpow::Result<SchemePair>> = match kind {
            "lf" => Some(lax_friedrichs),
            "imp" => Some(implicit_centered),
            _ => None,
        };
        if let Some(build) = builder {
            let lambda: f64 = value
                .parse()
                .map_err(|_| CliError::usage(format!("invalid lambda in scheme '{source}'")))?;
            return build(lambda).map_err(|e| CliError::usage(e.to_string()));
        }
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read scheme '{source}': {e}")))?;
    let file: SchemeFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid scheme file '{source}': {e}")))?;
    file.to_pair(source)
        .map_err(|e| CliError::usage(e.to_string()))
}
