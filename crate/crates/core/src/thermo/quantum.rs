//! Quantum partition functions and free energies.

use crate::error::{Error, Result};
use crate::params::{ModelKind, ModelParams, Phase};
use crate::quadrature::{integrate_segments, GkOptions};
use crate::spectra::{
    self, ajc_block_levels, ajc_levels, block_cross_check, jc_block_levels, jc_levels, rabi_spectrum_with,
    shifted_log_partition, Spectrum, TruncationOptions, DEFAULT_ANALYTIC_CAP,
};
use crate::thermo::{FreeEnergy, Method, Treatment};

/// Default tail tolerance for numeric free energies.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Operator ordering of the oscillator term on the quantum side.
///
/// `Symmetric` uses ħω(a†a + ½), whose phase-space symbol is the classical
/// ħω|a|²; `Normal` uses ħω a†a as written in the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    Symmetric,
    Normal,
}

impl Ordering {
    pub fn offset(self, p: &ModelParams) -> f64 {
        match self {
            Ordering::Symmetric => 0.5 * p.hbar * p.omega,
            Ordering::Normal => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NumericOptions {
    pub ordering: Ordering,
    pub fock: TruncationOptions,
    pub analytic_cap: usize,
    /// Fock cutoff of the diagonalization used to verify block levels.
    pub cross_check_n_max: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            ordering: Ordering::Symmetric,
            fock: TruncationOptions::default(),
            analytic_cap: DEFAULT_ANALYTIC_CAP,
            cross_check_n_max: 128,
        }
    }
}

/// `F = E_min − (1/β) ln Σ exp(−β(E − E_min))`.
pub fn partition_sum(spec: &Spectrum, beta: f64) -> Result<FreeEnergy> {
    if spec.levels.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    let (e_min, ln_z) = shifted_log_partition(&spec.levels, beta);
    let err = if spec.tail_bound.is_finite() { spec.tail_bound / beta } else { f64::INFINITY };
    FreeEnergy::new(e_min - ln_z / beta, Treatment::Quantum, Method::SpectrumSum, err)
}

/// A smooth function of a continuous level index. Derivatives default to
/// five-point central differences.
pub trait SmoothSummand {
    fn value(&self, n: f64) -> f64;

    fn d1(&self, n: f64) -> f64 {
        let h = 1e-3;
        (-self.value(n + 2.0 * h) + 8.0 * self.value(n + h) - 8.0 * self.value(n - h) + self.value(n - 2.0 * h))
            / (12.0 * h)
    }

    fn d3(&self, n: f64) -> f64 {
        let h = 2e-3;
        (self.value(n + 2.0 * h) - 2.0 * self.value(n + h) + 2.0 * self.value(n - h) - self.value(n - 2.0 * h))
            / (2.0 * h * h * h)
    }
}

impl<F: Fn(f64) -> f64> SmoothSummand for F {
    fn value(&self, n: f64) -> f64 {
        self(n)
    }
}

/// Summand with analytic first and third derivatives.
pub struct Analytic<F, D1, D3> {
    pub f: F,
    pub d1: D1,
    pub d3: D3,
}

impl<F, D1, D3> SmoothSummand for Analytic<F, D1, D3>
where
    F: Fn(f64) -> f64,
    D1: Fn(f64) -> f64,
    D3: Fn(f64) -> f64,
{
    fn value(&self, n: f64) -> f64 {
        (self.f)(n)
    }
    fn d1(&self, n: f64) -> f64 {
        (self.d1)(n)
    }
    fn d3(&self, n: f64) -> f64 {
        (self.d3)(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmOrder {
    First,
    Second,
}

/// Number of leading terms summed directly before the Euler–Maclaurin tail.
pub const EM_HEAD: usize = 8;

/// Euler–Maclaurin estimate of `Σ_{n ≥ n0} f(n)`. The first `EM_HEAD`
/// terms are summed directly; the rest is
/// `∫_{m}^∞ f + f(m)/2 − f′(m)/12 (+ f‴(m)/720)` with `m = n0 + EM_HEAD`.
pub fn euler_maclaurin_sum<S: SmoothSummand + ?Sized>(f: &S, n0: f64, order: EmOrder) -> Result<f64> {
    euler_maclaurin_sum_with(f, n0, order, EM_HEAD)
}

pub fn euler_maclaurin_sum_with<S: SmoothSummand + ?Sized>(f: &S, n0: f64, order: EmOrder, head: usize) -> Result<f64> {
    let direct: f64 = (0..head).map(|k| f.value(n0 + k as f64)).sum();
    let m = n0 + head as f64;
    let mut points = vec![m];
    let mut peak = f.value(m).abs();
    let mut last = peak;
    let mut k = 0;
    loop {
        let upper = m + 2f64.powi(k);
        let v = f.value(upper);
        if !v.is_finite() {
            return Err(Error::NotDecaying { upper });
        }
        points.push(upper);
        peak = peak.max(v.abs());
        if peak == 0.0 || (v.abs() <= 1e-18 * peak && v.abs() <= last) {
            break;
        }
        last = v.abs();
        k += 1;
        if k > 60 {
            return Err(Error::NotDecaying { upper });
        }
    }
    if peak == 0.0 {
        return Ok(direct);
    }
    let integral = integrate_segments(&|n| f.value(n), &points, &GkOptions { rel_tol: 1e-12, ..Default::default() })?;
    let mut total = integral.value + 0.5 * f.value(m) - f.d1(m) / 12.0;
    if order == EmOrder::Second {
        total += f.d3(m) / 720.0;
    }
    Ok(direct + total)
}

/// Closed-form quantum cells for JC/aJC in the normal or superradiant phase.
pub fn fq_closed(kind: ModelKind, phase: Phase, x: f64, q: f64, beta: f64, gc: f64, hbar: f64) -> Result<FreeEnergy> {
    check_closed_inputs(phase, x, q, beta, gc, hbar)?;
    let sx = x.sqrt();
    let q2 = q * q;
    let value = match (kind, phase) {
        (ModelKind::JC, Phase::Normal) => {
            -hbar * gc * sx / 2.0 - (sx / (hbar * gc * beta * (1.0 - q2))).ln() / beta
                + hbar * gc * q2 / (2.0 * sx)
                + (hbar * hbar * beta * beta * gc * gc * (q2 - 1.0).powi(3) + 24.0 * q2) / (24.0 * beta * (q2 - 1.0) * x)
        }
        (ModelKind::AJC, Phase::Normal) => {
            -hbar * gc * sx / 2.0 - (sx / (hbar * beta * gc * (1.0 - q2))).ln() / beta
                - hbar * gc * q2 / (2.0 * sx)
                + (-hbar * hbar * beta * beta * gc * gc * (q2 - 1.0).powi(3) + 24.0 * q2 * (2.0 * q2 + 1.0))
                    / (24.0 * x * beta * (1.0 - q2))
        }
        (ModelKind::JC, Phase::Superradiant) => {
            -hbar * gc * (x * (q2 * q2 * x + x - 2.0) + 1.0) / (4.0 * q2 * x.powf(1.5))
                - (q * (std::f64::consts::PI / (hbar * beta * gc)).sqrt() * x.powf(0.75)).ln() / beta
        }
        (ModelKind::AJC, Phase::Superradiant) => {
            -hbar * gc * (x * (q2 * q2 * x + x + 2.0) + 1.0) / (4.0 * q2 * x.powf(1.5))
                - (q * (std::f64::consts::PI / (hbar * beta * gc)).sqrt() * x.powf(0.75)).ln() / beta
        }
        (_, Phase::Critical) => unreachable!("rejected above"),
        (other, _) => {
            return Err(Error::ModelMismatch(format!("no closed form for the {} model", other.name())));
        }
    };
    FreeEnergy::new(value, Treatment::Quantum, Method::ClosedForm, 0.0)
}

pub(crate) fn check_closed_inputs(phase: Phase, x: f64, q: f64, beta: f64, gc: f64, hbar: f64) -> Result<()> {
    for (name, v) in [("x", x), ("beta", beta), ("gc", gc), ("hbar", hbar)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
        }
    }
    match phase {
        Phase::Critical => Err(Error::Critical("no closed-form cell at q = 1")),
        Phase::Normal if !(0.0..1.0).contains(&q) => {
            Err(Error::InvalidParams(format!("normal-phase cell needs 0 <= q < 1, got {q}")))
        }
        Phase::Superradiant if !(q > 1.0 && q.is_finite()) => {
            Err(Error::InvalidParams(format!("superradiant cell needs q > 1, got {q}")))
        }
        _ => Ok(()),
    }
}

/// Numeric quantum free energy.
///
/// JC/aJC parameters sum the exact block levels (verified against a
/// diagonalization of the same Hamiltonian); every other point sums an
/// adaptively truncated diagonalization.
pub fn fq_numeric(p: &ModelParams, beta: f64, eps: f64) -> Result<FreeEnergy> {
    fq_numeric_with(p, beta, eps, &NumericOptions::default())
}

pub fn fq_numeric_with(p: &ModelParams, beta: f64, eps: f64, opts: &NumericOptions) -> Result<FreeEnergy> {
    let p = p.with_beta(beta)?;
    let spectrum = quantum_spectrum(&p, beta, eps, opts)?;
    Ok(partition_sum(&spectrum, beta)?.shifted(opts.ordering.offset(&p)))
}

/// The spectrum `fq_numeric` sums.
pub fn quantum_spectrum(p: &ModelParams, beta: f64, eps: f64, opts: &NumericOptions) -> Result<Spectrum> {
    let p = p.with_beta(beta)?;
    match p.kind() {
        ModelKind::JC | ModelKind::AJC => {
            let dev = block_cross_check(&p, opts.cross_check_n_max)?;
            if dev > 1e-9 {
                return Err(Error::CrossCheck { deviation: dev });
            }
            if p.kind() == ModelKind::JC {
                spectra::grow_ladder(&p, beta, eps, opts.analytic_cap, |n| jc_block_levels(&p, n))
            } else {
                spectra::grow_ladder(&p, beta, eps, opts.analytic_cap, |n| ajc_block_levels(&p, n))
            }
        }
        _ => rabi_spectrum_with(&p, beta, eps, &opts.fock),
    }
}

/// Spectrum sum over the literal JC/aJC level formulas (no ordering offset:
/// those levels carry their own convention).
pub fn fq_printed_sum(p: &ModelParams, beta: f64, eps: f64) -> Result<FreeEnergy> {
    let p = p.with_beta(beta)?;
    let spectrum = match p.kind() {
        ModelKind::JC => spectra::grow_ladder(&p, beta, eps, DEFAULT_ANALYTIC_CAP, |n| jc_levels(&p, n))?,
        ModelKind::AJC => spectra::grow_ladder(&p, beta, eps, DEFAULT_ANALYTIC_CAP, |n| ajc_levels(&p, n as i64))?,
        other => return Err(Error::ModelMismatch(format!("literal level formulas exist only for JC/aJC, not {}", other.name()))),
    };
    partition_sum(&spectrum, beta)
}

/// Euler–Maclaurin evaluation of the same sum as `fq_printed_sum`.
pub fn fq_euler_maclaurin(p: &ModelParams, beta: f64) -> Result<FreeEnergy> {
    let h = p.hbar;
    let (w, big) = (p.omega, p.big_omega);
    // branches as functions of a continuous index, with the ladder start
    let (lower, upper, n0): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>, f64) = match p.kind() {
        ModelKind::JC => {
            let g = p.g1;
            let root = move |n: f64| h * (g * g * (n + 1.0) + (w - big).powi(2) / 4.0).sqrt();
            (Box::new(move |n| h * (n + 1.0) * w - root(n)), Box::new(move |n| h * (n + 1.0) * w + root(n)), 0.0)
        }
        ModelKind::AJC => {
            let g = p.g2;
            let root = move |n: f64| (4.0 * h * h * g * g * (n + 1.0) + h * h * (w + big).powi(2)).sqrt();
            (
                Box::new(move |n| (n + 0.5) * h * w + 0.5 * (h * w - root(n))),
                Box::new(move |n| (n + 0.5) * h * w - 0.5 * (h * w - root(n))),
                -1.0,
            )
        }
        other => return Err(Error::ModelMismatch(format!("literal level formulas exist only for JC/aJC, not {}", other.name()))),
    };
    // the lower branch is convex in n; the reference energy only needs to be near its minimum
    let e_ref = ladder_minimum(&*lower, n0);
    let lw = |n: f64| (-beta * (lower(n) - e_ref)).exp();
    let uw = |n: f64| (-beta * (upper(n) - e_ref)).exp();
    let z = euler_maclaurin_sum(&lw, n0, EmOrder::Second)? + euler_maclaurin_sum(&uw, n0, EmOrder::Second)?;
    FreeEnergy::new(e_ref - z.ln() / beta, Treatment::Quantum, Method::EulerMaclaurin, 0.0)
}

fn ladder_minimum(e: &dyn Fn(f64) -> f64, n0: f64) -> f64 {
    // golden-section on a bracket found by doubling
    let mut hi = n0 + 1.0;
    while e(hi) < e(hi - 1.0) && hi < 1e15 {
        hi = n0 + 2.0 * (hi - n0);
    }
    let (mut a, mut b) = (n0, hi);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if e(c) < e(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let m = 0.5 * (a + b);
    e(m.floor().max(n0)).min(e(m.ceil().max(n0)))
}
