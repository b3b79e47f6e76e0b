//! Serializable views of the library reports.

use convpow::assumptions::{AssumptionReport, TangencyPoint};
use convpow::envelope::{FarFieldReport, Theorem1Report};
use convpow::spectral::SplittingReport;
use serde::Serialize;

use crate::scheme::SchemeFile;

#[derive(Debug, Serialize)]
pub struct TangencyJson {
    pub kappa: [f64; 2],
    pub z: [f64; 2],
    pub theta: f64,
    pub alpha: f64,
    pub mu: usize,
    pub beta: f64,
    pub group: Vec<usize>,
}

impl From<&TangencyPoint> for TangencyJson {
    fn from(t: &TangencyPoint) -> Self {
        TangencyJson {
            kappa: [t.kappa.re, t.kappa.im],
            z: [t.z.re, t.z.im],
            theta: t.theta,
            alpha: t.alpha,
            mu: t.mu,
            beta: t.beta,
            group: t.group.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FailureJson {
    pub code: &'static str,
    pub location: String,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeJson {
    pub scheme: SchemeFile,
    pub passed: bool,
    pub q1_invertible: bool,
    pub index_zero: bool,
    pub endpoints_ok: bool,
    pub support_ok: bool,
    pub tangencies_ok: bool,
    pub grouping_ok: bool,
    pub tangencies: Vec<TangencyJson>,
    pub failures: Vec<FailureJson>,
}

impl AnalyzeJson {
    pub fn new(scheme: SchemeFile, r: &AssumptionReport) -> Self {
        AnalyzeJson {
            scheme,
            passed: r.passed(),
            q1_invertible: r.q1_invertible,
            index_zero: r.index_zero,
            endpoints_ok: r.endpoints_ok,
            support_ok: r.support_ok,
            tangencies_ok: r.tangencies_ok,
            grouping_ok: r.grouping_ok,
            tangencies: r.tangencies.iter().map(TangencyJson::from).collect(),
            failures: r
                .failures
                .iter()
                .map(|f| FailureJson {
                    code: f.code,
                    location: f.location.clone(),
                    detail: f.detail.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FitPointJson {
    pub n: usize,
    pub constant: f64,
    pub worst_j: i64,
}

#[derive(Debug, Serialize)]
pub struct EnvelopeFitJson {
    pub constant: f64,
    pub rate: f64,
    pub n_list: Vec<usize>,
    pub points: Vec<FitPointJson>,
}

#[derive(Debug, Serialize)]
pub struct TestPointJson {
    pub n: usize,
    pub max_ratio: f64,
    pub worst_j: i64,
    pub sector: String,
}

#[derive(Debug, Serialize)]
pub struct EnvelopeJson {
    pub fit: EnvelopeFitJson,
    pub saddle_bound: Option<f64>,
    pub inflation: f64,
    pub tests: Vec<TestPointJson>,
    pub passed: bool,
}

impl EnvelopeJson {
    pub fn new(r: &Theorem1Report, inflation: f64) -> Self {
        EnvelopeJson {
            fit: EnvelopeFitJson {
                constant: r.fit.constant,
                rate: r.fit.rate,
                n_list: r.fit.n_list.clone(),
                points: r
                    .fit
                    .points
                    .iter()
                    .map(|p| FitPointJson {
                        n: p.n,
                        constant: p.constant,
                        worst_j: p.worst_j,
                    })
                    .collect(),
            },
            saddle_bound: r.saddle_bound,
            inflation,
            tests: r
                .tests
                .iter()
                .map(|t| TestPointJson {
                    n: t.n,
                    max_ratio: t.max_ratio,
                    worst_j: t.worst_j,
                    sector: t.sector.clone(),
                })
                .collect(),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SplittingJson {
    pub samples: usize,
    pub seed: u64,
    pub min_circle_gap: f64,
    pub violations: usize,
    pub passed: bool,
}

impl SplittingJson {
    pub fn new(r: &SplittingReport, seed: u64) -> Self {
        SplittingJson {
            samples: r.samples,
            seed,
            min_circle_gap: r.min_circle_gap,
            violations: r.violations.len(),
            passed: r.passed(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FarFieldJson {
    pub radius: f64,
    pub rate: f64,
    pub constant: f64,
    pub reach: f64,
    pub max_ratio: f64,
    pub worst_n: usize,
    pub worst_j: i64,
    pub passed: bool,
}

impl From<&FarFieldReport> for FarFieldJson {
    fn from(r: &FarFieldReport) -> Self {
        FarFieldJson {
            radius: r.fit.radius,
            rate: r.fit.rate,
            constant: r.fit.constant,
            reach: r.fit.reach,
            max_ratio: r.max_ratio,
            worst_n: r.worst.0,
            worst_j: r.worst.1,
            passed: r.passed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub scheme: String,
    pub splitting: SplittingJson,
    pub envelope: EnvelopeJson,
    pub far_field: Option<FarFieldJson>,
    pub passed: bool,
}
