//! Free energies from quantum and classical treatments.

pub mod classical;
pub mod quantum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Treatment {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    SpectrumSum,
    EulerMaclaurin,
    Quadrature,
    SaddlePoint,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SpectrumSum => "spectrum_sum",
            Method::EulerMaclaurin => "euler_maclaurin",
            Method::Quadrature => "quadrature",
            Method::SaddlePoint => "saddle_point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub treatment: Treatment,
    pub method: Method,
    /// Absolute uncertainty, same units as `value`.
    pub err_estimate: f64,
}

impl FreeEnergy {
    pub fn new(value: f64, treatment: Treatment, method: Method, err_estimate: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParams(format!("free energy is not finite ({value})")));
        }
        if !(err_estimate >= 0.0) {
            return Err(Error::InvalidParams(format!("negative error estimate {err_estimate}")));
        }
        Ok(FreeEnergy { value, treatment, method, err_estimate })
    }

    pub(crate) fn shifted(self, c: f64) -> Self {
        FreeEnergy { value: self.value + c, ..self }
    }
}
