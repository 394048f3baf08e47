//! Infrared sector of Hořava–Lifshitz gravity with a constant α-gauge.
//!
//! The α-term shifts the 3D cosmological constant to
//! `Λ_α = Λ_W − 2α/(μ w²)`. Everything in the IR bracket, and the emergent
//! constants read off from it, depends on α only through `Λ_α`.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::homogeneous::{geometry, HomMetric};
use crate::tensor::SymMat3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoravaError {
    #[error("w² must be nonzero")]
    ZeroCsCoupling,
    #[error("μ must be nonzero")]
    ZeroMu,
    #[error("λ = 1/3 makes 1 − 3λ vanish")]
    SingularLambda,
    #[error("complex emergent speed: (Λ_W − 2α/(μw²))/(1 − 3λ) = {radicand:e} < 0")]
    ComplexSpeed { radicand: f64 },
    #[error("non-finite parameter")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoravaParams {
    pub kappa: f64,
    pub mu: f64,
    pub w2: f64,
    pub lambda_w: f64,
    /// Kinetic-term parameter λ.
    pub lambda: f64,
    pub alpha: f64,
}

impl HoravaParams {
    pub fn validate(&self) -> Result<(), HoravaError> {
        let all = [self.kappa, self.mu, self.w2, self.lambda_w, self.lambda, self.alpha];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(HoravaError::NonFinite);
        }
        if self.w2 == 0.0 {
            return Err(HoravaError::ZeroCsCoupling);
        }
        if self.mu == 0.0 {
            return Err(HoravaError::ZeroMu);
        }
        if 1.0 - 3.0 * self.lambda == 0.0 {
            return Err(HoravaError::SingularLambda);
        }
        Ok(())
    }

    /// `Λ_W − 2α/(μw²)`, written as `(μw²Λ_W − 2α)/(μw²)` so that it is
    /// exactly zero at [`critical_alpha`].
    pub fn shifted_lambda(&self) -> f64 {
        let p = self.mu * self.w2;
        (p * self.lambda_w - 2.0 * self.alpha) / p
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }
}

/// Newton constant, or the flagged state `G_N = ∞` reached at `c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NewtonConstant {
    Finite(f64),
    Infinite,
}

impl fmt::Display for NewtonConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonConstant::Finite(g) => write!(f, "{g:.17e}"),
            NewtonConstant::Infinite => f.write_str("INF"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergentConstants {
    pub c: f64,
    pub g_newton: NewtonConstant,
    pub lambda: f64,
    /// `G_N c = κ²/(32π)`, finite even when `c = 0`.
    pub g_times_c: f64,
}

pub fn emergent_constants(p: &HoravaParams) -> Result<EmergentConstants, HoravaError> {
    p.validate()?;
    let lambda = p.shifted_lambda();
    let radicand = lambda / (1.0 - 3.0 * p.lambda);
    if radicand < 0.0 {
        return Err(HoravaError::ComplexSpeed { radicand });
    }
    let c = p.kappa * p.kappa * p.mu / 4.0 * radicand.sqrt();
    let g_times_c = p.kappa * p.kappa / (32.0 * PI);
    let g_newton = if c == 0.0 { NewtonConstant::Infinite } else { NewtonConstant::Finite(g_times_c / c) };
    Ok(EmergentConstants { c, g_newton, lambda, g_times_c })
}

/// `α* = μ w² Λ_W / 2`, where the IR sector vanishes.
pub fn critical_alpha(mu: f64, w2: f64, lambda_w: f64) -> Result<f64, HoravaError> {
    if w2 == 0.0 {
        return Err(HoravaError::ZeroCsCoupling);
    }
    Ok(mu * w2 * lambda_w / 2.0)
}

/// Coefficients of `R` and of the constant term in
/// `κ²μ²/(8(1−3λ)) Λ_α [R − 3Λ_α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrCoefficients {
    pub coef_r: f64,
    pub coef_const: f64,
}

pub fn ir_coefficients(p: &HoravaParams) -> Result<IrCoefficients, HoravaError> {
    p.validate()?;
    let pre = p.kappa * p.kappa * p.mu * p.mu / (8.0 * (1.0 - 3.0 * p.lambda));
    let l = p.shifted_lambda();
    Ok(IrCoefficients { coef_r: pre * l, coef_const: -3.0 * pre * l * l })
}

/// `E^ij = C^ij / w² − μ (G^ij + Λ_W g^ij)` in Milnor-frame components.
///
/// The second term is the metric gradient of `μ ∫ √g (R − 2Λ_W)`, whose sign
/// the tests pin against a finite-difference variation of that action.
pub fn e_tensor(m: &HomMetric, mu: f64, w2: f64, lambda_w: f64) -> Result<SymMat3, HoravaError> {
    if w2 == 0.0 {
        return Err(HoravaError::ZeroCsCoupling);
    }
    let geo = geometry(m);
    let ginv = SymMat3::diag(m.g.map(|g| 1.0 / g), crate::tensor::Basis::Frame);
    let eh = geo.einstein_upper() + ginv.scale(lambda_w);
    Ok(geo.cotton_upper().scale(1.0 / w2) - eh.scale(mu))
}
