//! Clipped transformation between real-valued relations and `[0, 1]`-valued
//! relations.
//!
//! `∇(x) = 0` for `x ≤ −b`, `σ(x)` on `(−b, b)` and `1` for `x ≥ b`, where
//! `σ` is an increasing bijection `[−b, b] → [0, 1]` with `σ(x) = 1 − σ(−x)`.
//! An antisymmetric `h` therefore yields a reciprocal relation and a
//! symmetric `h` a symmetric one.

use crate::error::{Error, Result};

/// Shape of the increasing isomorphism used inside `(−b, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    /// `σ(x) = (x + b) / (2b)`.
    Linear,
    /// `σ(x) = 1/2 + tanh(s·x) / (2·tanh(s·b))`.
    Tanh { steepness: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NablaTransform {
    b: f64,
    sigma: Sigma,
}

impl Default for NablaTransform {
    fn default() -> Self {
        NablaTransform {
            b: 1.0,
            sigma: Sigma::Linear,
        }
    }
}

impl NablaTransform {
    pub fn new(b: f64, sigma: Sigma) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale b must be positive, got {b}")));
        }
        if let Sigma::Tanh { steepness } = sigma {
            if !(steepness > 0.0 && steepness.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tanh steepness must be positive, got {steepness}"
                )));
            }
        }
        Ok(NablaTransform { b, sigma })
    }

    pub fn linear(b: f64) -> Result<Self> {
        NablaTransform::new(b, Sigma::Linear)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    fn sigma_eval(&self, x: f64) -> f64 {
        match self.sigma {
            Sigma::Linear => (x + self.b) / (2.0 * self.b),
            Sigma::Tanh { steepness } => {
                0.5 + (steepness * x).tanh() / (2.0 * (steepness * self.b).tanh())
            }
        }
    }

    /// `∇(x)`, total on the reals.
    pub fn apply(&self, x: f64) -> f64 {
        if x <= -self.b {
            0.0
        } else if x >= self.b {
            1.0
        } else {
            self.sigma_eval(x)
        }
    }

    /// `∇⁻¹(q)` for `q` strictly inside `(0, 1)`.
    pub fn inverse(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::OutOfDomain(q));
        }
        Ok(match self.sigma {
            Sigma::Linear => 2.0 * self.b * q - self.b,
            Sigma::Tanh { steepness } => {
                let t = (2.0 * q - 1.0) * (steepness * self.b).tanh();
                t.atanh() / steepness
            }
        })
    }
}

pub fn nabla(x: f64, t: &NablaTransform) -> f64 {
    t.apply(x)
}

pub fn nabla_inverse(q: f64, t: &NablaTransform) -> Result<f64> {
    t.inverse(q)
}
