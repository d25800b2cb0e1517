use crate::error::{FeccError, Result};

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub young: f64,
    pub poisson: f64,
    pub lambda: f64,
    pub mu: f64,
}

/// Lamé constants from Young's modulus and Poisson's ratio.
pub fn lame_constants(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(FeccError::InvalidArgument(format!(
            "Young's modulus must be positive (got {young})"
        )));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(FeccError::InvalidArgument(format!(
            "Poisson's ratio must satisfy 0 <= nu < 0.5 (got {poisson})"
        )));
    }
    let lambda = poisson * young / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    Ok((lambda, mu))
}

impl MaterialParams {
    pub fn from_young_poisson(young: f64, poisson: f64) -> Result<Self> {
        let (lambda, mu) = lame_constants(young, poisson)?;
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
        })
    }

    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
            return Err(FeccError::InvalidArgument(format!(
                "Lamé constants must be positive and finite (got lambda = {lambda}, mu = {mu})"
            )));
        }
        Ok(Self {
            young: mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu),
            poisson: lambda / (2.0 * (lambda + mu)),
            lambda,
            mu,
        })
    }
}
