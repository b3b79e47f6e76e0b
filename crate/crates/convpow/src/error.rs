//! Error type shared by every analysis layer.

use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient table has length {len}, expected r + p + 1 = {expected}")]
    StencilLength { len: usize, expected: usize },
    #[error("operator has no nonzero coefficient")]
    ZeroOperator,
    #[error("symbol evaluated at kappa = 0 with r = {r} > 0")]
    ZeroArgument { r: usize },
    #[error("Q1 symbol nearly vanishes at kappa = {kappa} (|Q1| = {modulus:e})")]
    SymbolPole { kappa: Complex64, modulus: f64 },
    #[error("index {index} lies outside the stencil [-{r}, {p}]")]
    IndexOutOfStencil { index: i64, r: usize, p: usize },
    #[error("symbol vanishes on the unit circle (min modulus {min_modulus:e})")]
    ZeroOnCircle { min_modulus: f64 },
    #[error("winding number is ambiguous (residual {residual:.3}); refine the grid")]
    AmbiguousWinding { residual: f64 },
    #[error("kernel tail above {tol:e} at half-width {half_width}")]
    TailNotResolved { tol: f64, half_width: usize },
    #[error("|F| is constant on the unit circle")]
    ConstantModulus,
    #[error("|F| exceeds one at xi = {xi} (1 - |F|^2 = {g:e})")]
    ModulusExceedsOne { xi: f64, g: f64 },
    #[error("tangency points at xi = {first} and xi = {second} coalesce")]
    CoalescedTangencies { first: f64, second: f64 },
    #[error("drift vanishes at kappa = {kappa}")]
    ZeroDrift { kappa: Complex64 },
    #[error("no dissipative even order up to {max_order} at kappa = {kappa}")]
    NotDissipative { kappa: Complex64, max_order: usize },
    #[error("local expansion at kappa = {kappa} has leading real term of order {order}")]
    ExpansionShapeViolated { kappa: Complex64, order: usize },
    #[error("local expansion at kappa = {kappa} is unstable under radius refinement")]
    ExpansionUnstable { kappa: Complex64 },
    #[error("tangency class {class:?} violates the grouping rule")]
    Hyp4Violation { class: Vec<usize> },
    #[error("leading dispersion coefficient A_p(z) vanishes at z = {z}")]
    LeadingCoefficientZero { z: Complex64 },
    #[error("trailing dispersion coefficient A_-r(z) vanishes at z = {z}")]
    TrailingCoefficientZero { z: Complex64 },
    #[error("root finder did not converge within {iterations} iterations")]
    RootFindingDiverged { iterations: usize },
    #[error("branch continuation lost the root near z = {z}")]
    BranchLost { z: Complex64 },
    #[error("z = {z} lies outside the branch radius {radius}")]
    OutsideBranchRadius { z: Complex64, radius: f64 },
    #[error("z = {z} is numerically on the spectrum")]
    NearSpectrum { z: Complex64 },
    #[error("truncated solve did not converge up to half-width {half_width}")]
    NotConverged { half_width: usize },
    #[error("dispersion roots at z = {z} are not simple")]
    DegenerateRoots { z: Complex64 },
    #[error("root split at z = {z} is ({stable}, {circle}, {unstable}), expected ({r}, 0, {p})")]
    SplitMismatch {
        z: Complex64,
        stable: usize,
        circle: usize,
        unstable: usize,
        r: usize,
        p: usize,
    },
    #[error("fit window needs at least {needed} points per side, got {got}")]
    WindowTooShort { needed: usize, got: usize },
    #[error("profile value at j = {j} is below the fitting floor")]
    Underflow { j: i64 },
    #[error("banded system is numerically singular at pivot {row}")]
    SolverSingular { row: usize },
    #[error("required window half-width {half_width} exceeds the cap {cap}")]
    WindowOverflow { half_width: usize, cap: usize },
    #[error("contour point tau = {tau} crosses the spectrum curve")]
    SpectrumCrossing { tau: Complex64 },
    #[error("tangency balls of radius {epsilon} overlap or no admissible sector exists")]
    DegenerateSector { epsilon: f64 },
    #[error("quadrature did not converge on a contour piece after {panels} panels")]
    QuadratureStalled { panels: usize },
    #[error("no envelope constant C below the cap {cap:e} for any candidate rate")]
    NoValidEnvelope { cap: f64 },
    #[error("parameter {name} = {value} is out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },
    #[error("scheme fails the structural assumptions: {0}")]
    AssumptionsFailed(String),
}

impl Error {
    /// Machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SymbolPole { .. } | Error::ZeroOnCircle { .. } => "Q1_SINGULAR",
            Error::ConstantModulus => "CONSTANT_MODULUS",
            Error::ModulusExceedsOne { .. } => "MODULUS_GT_ONE",
            Error::ZeroDrift { .. } => "ZERO_DRIFT",
            Error::Hyp4Violation { .. } => "HYP4_VIOLATION",
            Error::NotDissipative { .. } => "NOT_DISSIPATIVE",
            Error::ExpansionShapeViolated { .. } | Error::ExpansionUnstable { .. } => {
                "EXPANSION_SHAPE"
            }
            Error::CoalescedTangencies { .. } => "COALESCED_TANGENCIES",
            Error::StencilLength { .. }
            | Error::ZeroOperator
            | Error::ParameterOutOfRange { .. } => "INVALID_INPUT",
            Error::AssumptionsFailed(_) => "ASSUMPTIONS_FAILED",
            Error::SpectrumCrossing { .. } => "SPECTRUM_CROSSING",
            Error::QuadratureStalled { .. } => "QUADRATURE_STALLED",
            Error::NoValidEnvelope { .. } => "NO_VALID_ENVELOPE",
            Error::NearSpectrum { .. } => "NEAR_SPECTRUM",
            _ => "NUMERICAL_FAILURE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
