//! Classical phase-space partition function.
//!
//! The spin enters through its two instantaneous eigenvalues, so for each
//! oscillator point a there are two branches
//! `E±(a) = ħω|a|² ± ħ√(|g1 a + g2 a*|² + Ω²/4)`,
//! integrated with the measure `d²a/π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ModelParams, Phase};
use crate::quadrature::{integrate_segments, GkOptions};
use crate::thermo::quantum::check_closed_inputs;
use crate::thermo::{FreeEnergy, Method, Treatment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub re_a: f64,
    pub im_a: f64,
}

impl PhasePoint {
    pub fn norm_sqr(&self) -> f64 {
        self.re_a * self.re_a + self.im_a * self.im_a
    }
}

/// Constant under the square root: `Ω²/4` from the spin eigenvalues, or the
/// `Ω²` variant found in some derivations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassicalConvention {
    #[default]
    QuarterOmegaSquared,
    FullOmegaSquared,
}

impl ClassicalConvention {
    fn constant(self, big_omega: f64) -> f64 {
        match self {
            ClassicalConvention::QuarterOmegaSquared => 0.25 * big_omega * big_omega,
            ClassicalConvention::FullOmegaSquared => big_omega * big_omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Radial cutoff in |a|; chosen from the Boltzmann weight when `None`.
    pub r_max: Option<f64>,
    /// Minimum number of radial nodes per ray.
    pub n_r: usize,
    /// Initial number of angular nodes; doubled until converged.
    pub n_theta: usize,
    pub rel_tol: f64,
    pub convention: ClassicalConvention,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { r_max: None, n_r: 64, n_theta: 64, rel_tol: 1e-12, convention: ClassicalConvention::default() }
    }
}

const MAX_THETA_NODES: usize = 1 << 16;
/// A ray is integrated out to where the weight has dropped below e^-CUTOFF.
const CUTOFF: f64 = 60.0;

/// `(E+, E−)` at a phase-space point.
pub fn classical_energies(p: &ModelParams, a: PhasePoint) -> (f64, f64) {
    classical_energies_with(p, a, ClassicalConvention::default())
}

pub fn classical_energies_with(p: &ModelParams, a: PhasePoint, conv: ClassicalConvention) -> (f64, f64) {
    let s = a.norm_sqr();
    // |g1 a + g2 a*|² = (g1² + g2²)|a|² + 2 g1 g2 Re(a²)
    let re_a2 = a.re_a * a.re_a - a.im_a * a.im_a;
    let coupling = (p.g1 * p.g1 + p.g2 * p.g2) * s + 2.0 * p.g1 * p.g2 * re_a2;
    let root = (coupling.max(0.0) + conv.constant(p.big_omega)).sqrt();
    let h = p.hbar;
    (h * (p.omega * s + root), h * (p.omega * s - root))
}

struct Ray {
    g2: f64,
    c: f64,
    omega: f64,
    hbar: f64,
}

impl Ray {
    fn lower(&self, s: f64) -> f64 {
        self.hbar * (self.omega * s - (self.g2 * s + self.c).sqrt())
    }
    fn upper(&self, s: f64) -> f64 {
        self.hbar * (self.omega * s + (self.g2 * s + self.c).sqrt())
    }
    /// Minimizer of the lower branch in s = |a|².
    fn s_star(&self) -> f64 {
        if self.g2 == 0.0 {
            return 0.0;
        }
        (self.g2 / (4.0 * self.omega * self.omega) - self.c / self.g2).max(0.0)
    }
}

fn ray(p: &ModelParams, theta: f64, conv: ClassicalConvention) -> Ray {
    let g2 = p.g1 * p.g1 + p.g2 * p.g2 + 2.0 * p.g1 * p.g2 * (2.0 * theta).cos();
    Ray { g2: g2.max(0.0), c: conv.constant(p.big_omega), omega: p.omega, hbar: p.hbar }
}

/// Global minimum of the lower branch and a point that attains it.
pub fn saddle_minimize(p: &ModelParams) -> (PhasePoint, f64) {
    saddle_minimize_with(p, ClassicalConvention::default())
}

pub fn saddle_minimize_with(p: &ModelParams, conv: ClassicalConvention) -> (PhasePoint, f64) {
    // the effective coupling is largest along the real axis
    let r = ray(p, 0.0, conv);
    let s = r.s_star();
    (PhasePoint { re_a: s.sqrt(), im_a: 0.0 }, r.lower(s))
}

/// First s beyond `from` where β(E(s) − e_min) ≥ CUTOFF, for increasing E.
fn cutoff_point(e: &dyn Fn(f64) -> f64, from: f64, e_min: f64, beta: f64, scale: f64) -> f64 {
    let mut step = scale.max(1e-300);
    let mut s = from + step;
    while beta * (e(s) - e_min) < CUTOFF {
        step *= 2.0;
        s = from + step;
    }
    s
}

struct RayIntegral {
    value: f64,
    error: f64,
    s_max: f64,
}

fn integrate_ray(r: &Ray, beta: f64, e_min: f64, spec: &QuadratureSpec) -> Result<RayIntegral> {
    let opts = GkOptions { rel_tol: spec.rel_tol, abs_tol: 0.0, ..Default::default() };
    let panels = (spec.n_r / 15).max(2);
    // thermal width in s: 1/(βħω)
    let width = 1.0 / (beta * r.hbar * r.omega);
    let s_star = r.s_star();
    let lower = |s: f64| r.lower(s);
    let upper = |s: f64| r.upper(s);
    let fixed = spec.r_max.map(|rm| rm * rm);

    let s_lo = fixed.unwrap_or_else(|| cutoff_point(&lower, s_star, e_min, beta, width));
    let mut pts = breakpoints(0.0, s_star.min(s_lo), panels);
    pts.extend(breakpoints(s_star.min(s_lo), s_lo, panels).into_iter().skip(1));
    let lo = integrate_segments(&|s| (-beta * (r.lower(s) - e_min)).exp(), &pts, &opts)?;

    let mut value = lo.value;
    let mut error = lo.error;
    let mut s_max = s_lo;
    if beta * (r.upper(0.0) - e_min) < 700.0 {
        let s_up = fixed.unwrap_or_else(|| cutoff_point(&upper, 0.0, e_min, beta, width));
        let up = integrate_segments(&|s| (-beta * (r.upper(s) - e_min)).exp(), &breakpoints(0.0, s_up, panels), &opts)?;
        value += up.value;
        error += up.error;
        s_max = s_max.max(s_up);
    }
    Ok(RayIntegral { value, error, s_max })
}

fn breakpoints(a: f64, b: f64, panels: usize) -> Vec<f64> {
    if b <= a {
        return vec![a];
    }
    (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect()
}

/// Classical free energy by quadrature over phase space.
pub fn fc_quadrature(p: &ModelParams, beta: f64, spec: &QuadratureSpec) -> Result<FreeEnergy> {
    Ok(fc_quadrature_detailed(p, beta, spec)?.free_energy)
}

#[derive(Debug, Clone, Copy)]
pub struct ClassicalResult {
    pub free_energy: FreeEnergy,
    pub e_min: f64,
    /// Largest radial cutoff actually used.
    pub r_max: f64,
    pub theta_nodes: usize,
}

pub fn fc_quadrature_detailed(p: &ModelParams, beta: f64, spec: &QuadratureSpec) -> Result<ClassicalResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    if spec.n_r < 64 || spec.n_theta < 64 {
        return Err(Error::InvalidParams(format!(
            "quadrature needs at least 64 radial and 64 angular nodes, got {} and {}",
            spec.n_r, spec.n_theta
        )));
    }
    if let Some(rm) = spec.r_max {
        if !(rm > 0.0 && rm.is_finite()) {
            return Err(Error::InvalidParams(format!("r_max must be positive, got {rm}")));
        }
    }
    if !(spec.rel_tol > 0.0 && spec.rel_tol < 1.0) {
        return Err(Error::InvalidParams(format!("relative tolerance must lie in (0, 1), got {}", spec.rel_tol)));
    }
    let (_, e_min) = saddle_minimize_with(p, spec.convention);

    // Z e^{βE_min} = (1/2π) ∫ dθ ∫ ds Σ± e^{−β(E± − E_min)}
    let (z, err, s_max, nodes) = if p.g1 == 0.0 || p.g2 == 0.0 {
        let r = integrate_ray(&ray(p, 0.0, spec.convention), beta, e_min, spec)?;
        (r.value, r.error, r.s_max, 1)
    } else {
        let mut n = spec.n_theta;
        let mut sum = 0.0;
        let mut err_sum = 0.0;
        let mut s_max: f64 = 0.0;
        let mut add = |k: usize, n: usize, sum: &mut f64, err_sum: &mut f64| -> Result<()> {
            let r = integrate_ray(&ray(p, 2.0 * PI * k as f64 / n as f64, spec.convention), beta, e_min, spec)?;
            *sum += r.value;
            *err_sum += r.error;
            s_max = s_max.max(r.s_max);
            Ok(())
        };
        for k in 0..n {
            add(k, n, &mut sum, &mut err_sum)?;
        }
        let mut t = sum / n as f64;
        loop {
            // nested trapezoid: the new nodes are the odd ones
            let m = 2 * n;
            if m > MAX_THETA_NODES {
                return Err(Error::QuadratureUnconverged { estimate: t, tolerance: spec.rel_tol });
            }
            for k in (1..m).step_by(2) {
                add(k, m, &mut sum, &mut err_sum)?;
            }
            let t2 = sum / m as f64;
            let diff = (t2 - t).abs();
            n = m;
            t = t2;
            if diff <= spec.rel_tol * t2.abs() {
                break (t2, diff + err_sum / m as f64, s_max, m);
            }
        }
    };
    if !(z > 0.0) {
        return Err(Error::QuadratureUnconverged { estimate: z, tolerance: spec.rel_tol });
    }
    let value = e_min - z.ln() / beta;
    let free_energy = FreeEnergy::new(value, Treatment::Classical, Method::Quadrature, err / (beta * z))?;
    Ok(ClassicalResult { free_energy, e_min, r_max: s_max.sqrt(), theta_nodes: nodes })
}

/// Closed-form classical cells.
pub fn fc_closed(phase: Phase, x: f64, q: f64, beta: f64, gc: f64, hbar: f64) -> Result<FreeEnergy> {
    check_closed_inputs(phase, x, q, beta, gc, hbar)?;
    let sx = x.sqrt();
    let value = match phase {
        Phase::Normal => -hbar * gc * sx / 2.0 - (sx / (hbar * gc * beta * (1.0 - q * q))).ln() / beta,
        Phase::Superradiant => {
            -(1.0 + q.powi(4)) * hbar * gc * sx / (4.0 * q * q)
                - (q * (PI / (beta * hbar * gc)).sqrt() * x.powf(0.75)).ln() / beta
        }
        Phase::Critical => unreachable!("rejected above"),
    };
    FreeEnergy::new(value, Treatment::Classical, Method::ClosedForm, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(re_a: f64, im_a: f64) -> PhasePoint {
        PhasePoint { re_a, im_a }
    }

    #[test]
    fn energies_match_complex_form() {
        let p = ModelParams::new(1.3, 0.7, 0.4, 0.9, 1.0, 1.0).unwrap();
        for a in [pp(0.3, -1.2), pp(2.0, 0.5), pp(0.0, 0.0), pp(-1.1, 0.8)] {
            // |g1 a + g2 a*|² by complex arithmetic
            let (re, im) = (p.g1 * a.re_a + p.g2 * a.re_a, p.g1 * a.im_a - p.g2 * a.im_a);
            let root = (re * re + im * im + 0.25 * p.big_omega * p.big_omega).sqrt();
            let (ep, em) = classical_energies(&p, a);
            let s = a.norm_sqr();
            assert!((ep - (p.omega * s + root)).abs() < 1e-14);
            assert!((em - (p.omega * s - root)).abs() < 1e-14);
        }
    }

    #[test]
    fn saddle_spec_example() {
        // ω=1, Ω=1, g1=g2=0.5 stays at the origin
        let p = ModelParams::dimensionless(1.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        let (a, e) = saddle_minimize(&p);
        assert_eq!(a.norm_sqr(), 0.0);
        assert!((e + 0.5).abs() < 1e-15);
    }

    #[test]
    fn saddle_jc_superradiant() {
        let (w, big, g) = (0.2, 5.0, 1.5);
        let p = ModelParams::dimensionless(w, big, g, 0.0, 1.0).unwrap();
        let (_, e) = saddle_minimize(&p);
        let want = -g * g / (4.0 * w) - big * big * w / (4.0 * g * g);
        assert!((e - want).abs() < 1e-12, "{e} vs {want}");
    }

    #[test]
    fn decoupled_gaussian() {
        for (w, big, beta) in [(1.0, 1.0, 1.0), (0.2, 5.0, 2.0), (3.0, 0.5, 0.3)] {
            let p = ModelParams::dimensionless(w, big, 0.0, 0.0, beta).unwrap();
            let f = fc_quadrature(&p, beta, &QuadratureSpec::default()).unwrap();
            let want = -(2.0 * (beta * big / 2.0).cosh() / (beta * w)).ln() / beta;
            assert!((f.value - want).abs() < 1e-11, "{w} {big} {beta}: {} vs {want}", f.value);
            assert!(f.err_estimate < 1e-10);
        }
    }

    #[test]
    fn closed_frozen_value() {
        let f = fc_closed(Phase::Normal, 25.0, 0.0, 2.0, 1.0, 1.0).unwrap();
        assert!((f.value - (-2.5 - 0.5 * 2.5f64.ln())).abs() < 1e-14);
        assert!((f.value - -2.958_145_365_937_077_6).abs() < 1e-12);
        assert!(matches!(fc_closed(Phase::Critical, 25.0, 1.0, 2.0, 1.0, 1.0), Err(Error::Critical(_))));
    }

    #[test]
    fn quadrature_approaches_closed_at_large_x() {
        for (q, phase) in [(0.5, Phase::Normal), (1.5, Phase::Superradiant)] {
            let x = 1e4;
            let p = ModelParams::from_dimensionless(x, q, 1.0, 1.0, 2.0, 1.0).unwrap();
            let f = fc_quadrature(&p, 2.0, &QuadratureSpec::default()).unwrap().value;
            let c = fc_closed(phase, x, q, 2.0, 1.0, 1.0).unwrap().value;
            assert!((f - c).abs() < 1e-2, "{q}: {f} vs {c}");
        }
    }

    #[test]
    fn rabi_angular_convergence_and_bound() {
        let p = ModelParams::from_dimensionless(25.0, 0.6, 0.5, 1.0, 5.0, 1.0).unwrap();
        let r = fc_quadrature_detailed(&p, 5.0, &QuadratureSpec::default()).unwrap();
        assert!(r.theta_nodes >= 128);
        assert!(r.free_energy.value <= r.e_min);
        let f = r.free_energy.value;
        assert!((f - -2.542_973_813).abs() < 1e-8, "{f}");
    }

    #[test]
    fn fixed_cutoff_and_bad_spec() {
        let p = ModelParams::dimensionless(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let f = fc_quadrature(&p, 1.0, &QuadratureSpec { r_max: Some(12.0), ..Default::default() }).unwrap();
        let want = -(2.0 * 0.5f64.cosh()).ln();
        assert!((f.value - want).abs() < 1e-11);
        assert!(fc_quadrature(&p, 1.0, &QuadratureSpec { n_r: 10, ..Default::default() }).is_err());
        assert!(fc_quadrature(&p, 1.0, &QuadratureSpec { n_theta: 8, ..Default::default() }).is_err());
        assert!(fc_quadrature(&p, -1.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn full_omega_convention_lowers_less() {
        // a larger constant under the root lowers the minimum
        let p = ModelParams::from_dimensionless(25.0, 1.2, 1.0, 1.0, 2.0, 1.0).unwrap();
        let (_, quarter) = saddle_minimize_with(&p, ClassicalConvention::QuarterOmegaSquared);
        let (_, full) = saddle_minimize_with(&p, ClassicalConvention::FullOmegaSquared);
        assert!(full < quarter);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coupling_swap_symmetry(w in 0.2f64..3.0, big in 0.2f64..3.0, g1 in 0.05f64..1.5, g2 in 0.05f64..1.5, beta in 0.3f64..4.0) {
            let a = ModelParams::dimensionless(w, big, g1, g2, beta).unwrap();
            let b = ModelParams::dimensionless(w, big, g2, g1, beta).unwrap();
            let fa = fc_quadrature(&a, beta, &QuadratureSpec::default()).unwrap().value;
            let fb = fc_quadrature(&b, beta, &QuadratureSpec::default()).unwrap().value;
            prop_assert!((fa - fb).abs() <= 1e-10 * (1.0 + fa.abs()));
        }

    }
}
