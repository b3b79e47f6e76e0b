//! Built-in example schemes.

use crate::error::{Error, Result};
use crate::symbols::{ConvolutionOperator, SchemePair};

/// Lax-Friedrichs: `Q1 = I`, `Q0 = ((1 + lambda)/2) S^{-1} + ((1 - lambda)/2) S`.
pub fn lax_friedrichs(lambda: f64) -> Result<SchemePair> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    let q0 =
        ConvolutionOperator::from_real(1, 1, &[(1.0 + lambda) / 2.0, 0.0, (1.0 - lambda) / 2.0])?;
    let q1 = ConvolutionOperator::from_real(1, 1, &[0.0, 1.0, 0.0])?;
    SchemePair::new(format!("lax-friedrichs(lambda={lambda})"), q0, q1)
}

/// Implicit centered scheme: `Q1 = I + (lambda/2)(S - S^{-1})`, `Q0 = I`.
pub fn implicit_centered(lambda: f64) -> Result<SchemePair> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    let q0 = ConvolutionOperator::from_real(1, 1, &[0.0, 1.0, 0.0])?;
    let q1 = ConvolutionOperator::from_real(1, 1, &[-lambda / 2.0, 1.0, lambda / 2.0])?;
    SchemePair::new(format!("implicit-centered(lambda={lambda})"), q0, q1)
}
