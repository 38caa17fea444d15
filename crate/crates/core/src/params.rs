//! Physical parameters of the generalized Rabi Hamiltonian
//! `H = ħω a†a + ħΩ/2 σz + ħg1 (a σ+ + a† σ-) + ħg2 (a† σ+ + a σ-)`
//! and their dimensionless re-parameterization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// |q - 1| below this is classified as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Full parameter set. Frequencies and couplings are in units of energy/ħ,
/// `beta` is `1/(k_B T)` with `k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    pub g1: f64,
    pub g2: f64,
    pub hbar: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Normal,
    Critical,
    Superradiant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "jc")]
    JC,
    #[serde(rename = "ajc")]
    AJC,
    #[serde(rename = "rabi")]
    Rabi,
    #[serde(rename = "generalized")]
    Generalized,
}

impl ModelKind {
    /// Mixing fraction `g1/(g1+g2)` that defines this kind, if it is fixed.
    pub fn fixed_eta(self) -> Option<f64> {
        match self {
            ModelKind::JC => Some(1.0),
            ModelKind::AJC => Some(0.0),
            ModelKind::Rabi => Some(0.5),
            ModelKind::Generalized => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::JC => "jc",
            ModelKind::AJC => "ajc",
            ModelKind::Rabi => "rabi",
            ModelKind::Generalized => "generalized",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jc" => Ok(ModelKind::JC),
            "ajc" => Ok(ModelKind::AJC),
            "rabi" => Ok(ModelKind::Rabi),
            "generalized" | "general" => Ok(ModelKind::Generalized),
            other => Err(Error::InvalidParams(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Frequency ratio Ω/ω.
    pub x: f64,
    /// Critical coupling √(ωΩ).
    pub gc: f64,
    /// Total coupling (g1+g2)/gc.
    pub q: f64,
    /// Mixing g1/(g1+g2); 0 when both couplings vanish.
    pub eta: f64,
    pub phase: Phase,
}

pub fn classify(q: f64) -> Phase {
    if (q - 1.0).abs() <= CRITICAL_TOLERANCE {
        Phase::Critical
    } else if q < 1.0 {
        Phase::Normal
    } else {
        Phase::Superradiant
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be non-negative and finite, got {v}")))
    }
}

impl ModelParams {
    pub fn new(omega: f64, big_omega: f64, g1: f64, g2: f64, hbar: f64, beta: f64) -> Result<Self> {
        let p = ModelParams { omega, big_omega, g1, g2, hbar, beta };
        p.validate()?;
        Ok(p)
    }

    /// Dimensionless defaults: ħ = 1.
    pub fn dimensionless(omega: f64, big_omega: f64, g1: f64, g2: f64, beta: f64) -> Result<Self> {
        Self::new(omega, big_omega, g1, g2, 1.0, beta)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega", self.omega)?;
        positive("Omega", self.big_omega)?;
        positive("beta", self.beta)?;
        positive("hbar", self.hbar)?;
        non_negative("g1", self.g1)?;
        non_negative("g2", self.g2)
    }

    /// Build from `(x, q, eta, gc)`: ω = gc/√x, Ω = gc√x, g1 = ηq·gc, g2 = (1-η)q·gc.
    pub fn from_dimensionless(x: f64, q: f64, eta: f64, gc: f64, beta: f64, hbar: f64) -> Result<Self> {
        positive("x", x)?;
        positive("gc", gc)?;
        non_negative("q", q)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!("eta must lie in [0, 1], got {eta}")));
        }
        let sx = x.sqrt();
        Self::new(gc / sx, gc * sx, eta * q * gc, (1.0 - eta) * q * gc, hbar, beta)
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let gc = (self.omega * self.big_omega).sqrt();
        let total = self.g1 + self.g2;
        let q = total / gc;
        let eta = if total > 0.0 { self.g1 / total } else { 0.0 };
        Ok(DerivedParams {
            x: self.big_omega / self.omega,
            gc,
            q,
            eta,
            phase: classify(q),
        })
    }

    /// Classification by which couplings vanish. With both couplings zero the
    /// model is reported as JC.
    pub fn kind(&self) -> ModelKind {
        if self.g2 == 0.0 {
            ModelKind::JC
        } else if self.g1 == 0.0 {
            ModelKind::AJC
        } else if self.g1 == self.g2 {
            ModelKind::Rabi
        } else {
            ModelKind::Generalized
        }
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.omega, self.big_omega, self.g1, self.g2, self.hbar, beta)
    }

    /// Energy scale ħ·gc.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * (self.omega * self.big_omega).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn derive_jc_example() {
        let d = ModelParams::dimensionless(0.2, 5.0, 0.6, 0.0, 1.0).unwrap().derive().unwrap();
        assert!(close(d.x, 25.0, 1e-14));
        assert!(close(d.gc, 1.0, 1e-14));
        assert!(close(d.q, 0.6, 1e-14));
        assert_eq!(d.eta, 1.0);
        assert_eq!(d.phase, Phase::Normal);
    }

    #[test]
    fn derive_symmetric_point_is_critical() {
        let d = ModelParams::dimensionless(1.0, 1.0, 0.5, 0.5, 1.0).unwrap().derive().unwrap();
        assert_eq!(d.x, 1.0);
        assert_eq!(d.eta, 0.5);
        assert_eq!(d.phase, Phase::Critical);
    }

    #[test]
    fn derive_superradiant() {
        let d = ModelParams::dimensionless(0.1, 10.0, 0.75, 0.75, 1.0).unwrap().derive().unwrap();
        assert!(close(d.q, 1.5, 1e-14));
        assert_eq!(d.phase, Phase::Superradiant);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ModelParams::dimensionless(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::dimensionless(1.0, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::dimensionless(1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::dimensionless(1.0, 1.0, -0.1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn from_dimensionless_examples() {
        let p = ModelParams::from_dimensionless(25.0, 0.6, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(close(p.omega, 0.2, 1e-14) && close(p.big_omega, 5.0, 1e-14));
        assert!(close(p.g1, 0.6, 1e-14) && p.g2 == 0.0);

        let p = ModelParams::from_dimensionless(4.0, 1.0, 0.0, 2.0, 1.0, 1.0).unwrap();
        assert!(close(p.omega, 1.0, 1e-14) && close(p.big_omega, 4.0, 1e-14));
        assert!(p.g1 == 0.0 && close(p.g2, 2.0, 1e-14));

        let p = ModelParams::from_dimensionless(100.0, 0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(close(p.omega, 0.1, 1e-14) && close(p.big_omega, 10.0, 1e-14));
        assert!(close(p.g1, 0.25, 1e-14) && close(p.g2, 0.25, 1e-14));
        assert_eq!(p.kind(), ModelKind::Rabi);
    }

    #[test]
    fn rejects_eta_out_of_range() {
        assert!(ModelParams::from_dimensionless(4.0, 1.0, 1.5, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::from_dimensionless(4.0, 1.0, -0.1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kinds() {
        let k = |g1, g2| ModelParams::dimensionless(1.0, 1.0, g1, g2, 1.0).unwrap().kind();
        assert_eq!(k(0.3, 0.0), ModelKind::JC);
        assert_eq!(k(0.0, 0.3), ModelKind::AJC);
        assert_eq!(k(0.3, 0.3), ModelKind::Rabi);
        assert_eq!(k(0.3, 0.1), ModelKind::Generalized);
        assert_eq!("aJC".parse::<ModelKind>().unwrap(), ModelKind::AJC);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(x in 1e-2f64..1e6, q in 0.0f64..3.0, eta in 0.0f64..=1.0, gc in 1e-2f64..1e2) {
                let p = ModelParams::from_dimensionless(x, q, eta, gc, 1.0, 1.0).unwrap();
                let d = p.derive().unwrap();
                let rel = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1e-300) * 4.0;
                prop_assert!(rel(d.x, x));
                prop_assert!(rel(d.gc, gc));
                prop_assert!((d.q - q).abs() <= 4e-14 * q.max(1e-300) || q == 0.0);
                if q > 0.0 {
                    prop_assert!((d.eta - eta).abs() <= 1e-14);
                }
                prop_assert!(rel(d.gc * d.gc, p.omega * p.big_omega));
            }

            #[test]
            fn phase_scale_invariant(w in 0.1f64..10.0, big in 0.1f64..10.0, g1 in 0.0f64..3.0, g2 in 0.0f64..3.0, s in 1e-3f64..1e3) {
                let a = ModelParams::dimensionless(w, big, g1, g2, 1.0).unwrap().derive().unwrap();
                let b = ModelParams::dimensionless(s * w, s * big, s * g1, s * g2, 1.0).unwrap().derive().unwrap();
                // skip points within rounding of the boundary
                prop_assume!((a.q - 1.0).abs() > 1e-9);
                prop_assert_eq!(a.phase, b.phase);
            }
        }
    }
}
