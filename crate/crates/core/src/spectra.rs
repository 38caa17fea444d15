//! Energy spectra of the generalized Rabi Hamiltonian.
//!
//! Three sources are provided:
//! * the literal level formulas for the JC and aJC limits (`jc_levels`,
//!   `ajc_levels`), evaluated verbatim,
//! * the exact 2x2-block eigenvalues of the same limits (`jc_block_levels`,
//!   `ajc_block_levels`), which coincide with diagonalization,
//! * Fock-space diagonalization of the full Hamiltonian.
//!
//! The literal formulas are centered at ħ(n+1)ω while the Hamiltonian with
//! `ħω a†a` gives blocks centered at ħ(n+½)ω; the two routes are kept
//! separate and their difference is reported, not corrected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, tridiagonal_eigenvalues, SymmetricMatrix, Tridiagonal};
use crate::params::ModelParams;

/// Default hard cap on Fock states for diagonalization.
pub const DEFAULT_FOCK_CAP: usize = 16_384;
/// Cap for closed-form level lists, which cost O(n).
pub const DEFAULT_ANALYTIC_CAP: usize = 1 << 22;

const EIGEN_TOL: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrumSource {
    AnalyticJC,
    AnalyticAJC,
    BlockJC,
    BlockAJC,
    Diagonalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub levels: Vec<f64>,
    pub source: SpectrumSource,
    pub n_max: Option<usize>,
    pub converged: bool,
    /// Estimated relative weight in Z of levels past the truncation.
    pub tail_bound: f64,
}

impl Spectrum {
    fn new(mut levels: Vec<f64>, source: SpectrumSource, n_max: Option<usize>, tail_bound: f64) -> Self {
        levels.sort_by(|a, b| a.total_cmp(b));
        Spectrum { levels, source, n_max, converged: false, tail_bound }
    }

    pub fn ground(&self) -> f64 {
        self.levels[0]
    }
}

/// `(E_min, ln Σ exp(-β(E - E_min)))`, summed from the ground level up.
pub(crate) fn shifted_log_partition(levels: &[f64], beta: f64) -> (f64, f64) {
    let e_min = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = levels.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    // smallest first keeps the sum accurate
    weights.sort_by(|a, b| a.total_cmp(b));
    let z: f64 = weights.iter().sum();
    (e_min, z.ln())
}

fn free_energy_of(levels: &[f64], beta: f64) -> f64 {
    let (e_min, ln_z) = shifted_log_partition(levels, beta);
    e_min - ln_z / beta
}

/// Geometric estimate of the weight of a ladder continued past its last two
/// terms, relative to `z`. Infinite while the ladder is still growing.
fn geometric_tail(last: f64, before: f64, z: f64) -> f64 {
    if last == 0.0 {
        return 0.0;
    }
    let r = last / before;
    if !(r < 1.0) {
        return f64::INFINITY;
    }
    last * r / (1.0 - r) / z
}

/// Tail bound of a spectrum given as two branch ladders indexed by n.
fn ladder_tail(lower: &[f64], upper: &[f64], beta: f64) -> f64 {
    let mut all = Vec::with_capacity(lower.len() + upper.len());
    all.extend_from_slice(lower);
    all.extend_from_slice(upper);
    let (e_min, ln_z) = shifted_log_partition(&all, beta);
    let z = ln_z.exp();
    let w = |e: f64| (-beta * (e - e_min)).exp();
    let branch = |b: &[f64]| {
        if b.len() < 2 {
            return if b.is_empty() { 0.0 } else { f64::INFINITY };
        }
        geometric_tail(w(b[b.len() - 1]), w(b[b.len() - 2]), z)
    };
    branch(lower) + branch(upper)
}

fn require_jc(p: &ModelParams) -> Result<()> {
    if p.g2 != 0.0 {
        return Err(Error::ModelMismatch(format!("JC levels need g2 = 0, got g2 = {}", p.g2)));
    }
    Ok(())
}

fn require_ajc(p: &ModelParams) -> Result<()> {
    if p.g1 != 0.0 {
        return Err(Error::ModelMismatch(format!("aJC levels need g1 = 0, got g1 = {}", p.g1)));
    }
    Ok(())
}

/// JC levels from the literal formula: `E_n± = ħ(n+1)ω ± ħ√(g1²(n+1) + (ω-Ω)²/4)`, n = 0..=n_max.
pub fn jc_levels(p: &ModelParams, n_max: usize) -> Result<Spectrum> {
    require_jc(p)?;
    let (lower, upper) = jc_literal_branches(p, n_max);
    let tail = ladder_tail(&lower, &upper, p.beta);
    Ok(Spectrum::new([lower, upper].concat(), SpectrumSource::AnalyticJC, Some(n_max), tail))
}

fn jc_literal_branches(p: &ModelParams, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let det = (p.omega - p.big_omega).powi(2) / 4.0;
    let mut lower = Vec::with_capacity(n_max + 1);
    let mut upper = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let m = (n + 1) as f64;
        let centre = p.hbar * m * p.omega;
        let split = p.hbar * (p.g1 * p.g1 * m + det).sqrt();
        lower.push(centre - split);
        upper.push(centre + split);
    }
    (lower, upper)
}

/// aJC levels from the literal formula:
/// `E_n± = (n+½)ħω ± ½(ħω − √(4ħ²g2²(n+1) + ħ²(ω+Ω)²))` for n = -1..=n_max.
pub fn ajc_levels(p: &ModelParams, n_max: i64) -> Result<Spectrum> {
    require_ajc(p)?;
    if n_max < -1 {
        return Err(Error::InvalidParams(format!("aJC n_max must be >= -1, got {n_max}")));
    }
    let (lower, upper) = ajc_literal_branches(p, n_max);
    let tail = ladder_tail(&lower, &upper, p.beta);
    Ok(Spectrum::new(
        [lower, upper].concat(),
        SpectrumSource::AnalyticAJC,
        Some((n_max + 1) as usize),
        tail,
    ))
}

/// Returns the "+" branch of the formula first: it is the lower one.
fn ajc_literal_branches(p: &ModelParams, n_max: i64) -> (Vec<f64>, Vec<f64>) {
    let h = p.hbar;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for n in -1..=n_max {
        let nf = n as f64;
        let root = (4.0 * h * h * p.g2 * p.g2 * (nf + 1.0) + h * h * (p.omega + p.big_omega).powi(2)).sqrt();
        let centre = (nf + 0.5) * h * p.omega;
        let half = 0.5 * (h * p.omega - root);
        plus.push(centre + half);
        minus.push(centre - half);
    }
    (plus, minus)
}

/// Exact JC eigenvalues of the Hamiltonian: the unpaired |0,↓⟩ at −ħΩ/2 and
/// blocks {|n+1,↓⟩, |n,↑⟩}, n = 0..=n_max, at
/// `ħω(n+½) ± √(ħ²g1²(n+1) + ħ²(ω−Ω)²/4)`.
pub fn jc_block_levels(p: &ModelParams, n_max: usize) -> Result<Spectrum> {
    require_jc(p)?;
    let (lower, upper) = block_branches(p, p.g1, p.omega - p.big_omega, n_max);
    let tail = ladder_tail(&lower, &upper, p.beta);
    let mut levels = [lower, upper].concat();
    levels.push(-0.5 * p.hbar * p.big_omega);
    Ok(Spectrum::new(levels, SpectrumSource::BlockJC, Some(n_max), tail))
}

/// Exact aJC eigenvalues: the unpaired |0,↑⟩ at +ħΩ/2 and blocks
/// {|n,↓⟩, |n+1,↑⟩} at `ħω(n+½) ± √(ħ²g2²(n+1) + ħ²(ω+Ω)²/4)`.
pub fn ajc_block_levels(p: &ModelParams, n_max: usize) -> Result<Spectrum> {
    require_ajc(p)?;
    let (lower, upper) = block_branches(p, p.g2, p.omega + p.big_omega, n_max);
    let tail = ladder_tail(&lower, &upper, p.beta);
    let mut levels = [lower, upper].concat();
    levels.push(0.5 * p.hbar * p.big_omega);
    Ok(Spectrum::new(levels, SpectrumSource::BlockAJC, Some(n_max), tail))
}

fn block_branches(p: &ModelParams, g: f64, detuning: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let h = p.hbar;
    let det = detuning * detuning / 4.0;
    let mut lower = Vec::with_capacity(n_max + 1);
    let mut upper = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let centre = h * p.omega * (n as f64 + 0.5);
        let split = h * (g * g * (n as f64 + 1.0) + det).sqrt();
        lower.push(centre - split);
        upper.push(centre + split);
    }
    (lower, upper)
}

/// Dense matrix of the Hamiltonian in the basis |n,s⟩, index `2n + s` with
/// s = 0 for ↓ and 1 for ↑, n = 0..=n_max.
pub fn build_hamiltonian(p: &ModelParams, n_max: usize) -> SymmetricMatrix {
    let dim = 2 * (n_max + 1);
    let h = p.hbar;
    let mut m = SymmetricMatrix::zeros(dim);
    for n in 0..=n_max {
        let nf = n as f64;
        m.set(2 * n, 2 * n, h * p.omega * nf - 0.5 * h * p.big_omega);
        m.set(2 * n + 1, 2 * n + 1, h * p.omega * nf + 0.5 * h * p.big_omega);
        if n < n_max {
            let s = (nf + 1.0).sqrt();
            // ⟨n,↑|H|n+1,↓⟩ and ⟨n+1,↑|H|n,↓⟩
            m.set(2 * n + 1, 2 * (n + 1), h * p.g1 * s);
            m.set(2 * (n + 1) + 1, 2 * n, h * p.g2 * s);
        }
    }
    m
}

/// The two parity sectors of the truncated Hamiltonian. Each sector is a
/// chain |0,s⟩, |1,s̄⟩, |2,s⟩, ... that is exactly tridiagonal; together they
/// are a permutation of `build_hamiltonian(p, n_max)`.
pub fn parity_chains(p: &ModelParams, n_max: usize) -> [Tridiagonal; 2] {
    let h = p.hbar;
    let chain = |start_up: bool| {
        let mut diag = Vec::with_capacity(n_max + 1);
        let mut off = Vec::with_capacity(n_max);
        for j in 0..=n_max {
            let up = start_up ^ (j % 2 == 1);
            let spin = if up { 0.5 } else { -0.5 };
            diag.push(h * (p.omega * j as f64 + spin * p.big_omega));
            if j < n_max {
                let s = ((j + 1) as f64).sqrt();
                // from ↓ the link to |j+1,↑⟩ is counter-rotating, from ↑ to |j+1,↓⟩ rotating
                off.push(if up { h * p.g1 * s } else { h * p.g2 * s });
            }
        }
        Tridiagonal::new(diag, off)
    };
    [chain(false), chain(true)]
}

/// Eigenvalues of the Hamiltonian truncated at `n_max`, via the parity chains.
pub fn fock_eigenvalues(p: &ModelParams, n_max: usize) -> Result<Vec<f64>> {
    let [even, odd] = parity_chains(p, n_max);
    let mut levels = tridiagonal_eigenvalues(&even, EIGEN_TOL)?;
    levels.extend(tridiagonal_eigenvalues(&odd, EIGEN_TOL)?);
    levels.sort_by(|a, b| a.total_cmp(b));
    Ok(levels)
}

/// Same as `fock_eigenvalues` through the dense Householder route.
pub fn dense_eigenvalues(p: &ModelParams, n_max: usize) -> Result<Vec<f64>> {
    sym_eigenvalues(&build_hamiltonian(p, n_max), EIGEN_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenPath {
    ParityChains,
    Dense,
}

#[derive(Debug, Clone, Copy)]
pub struct TruncationOptions {
    /// Hard cap on the number of Fock states n_max + 1.
    pub cap: usize,
    pub path: EigenPath,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions { cap: DEFAULT_FOCK_CAP, path: EigenPath::ParityChains }
    }
}

/// First Fock cutoff tried by the adaptive routines: the thermal range
/// `20/(βħω)`, plus the coherent displacement |a*|² and its spread when the
/// couplings put the model in the superradiant phase.
pub fn initial_n_max(p: &ModelParams, beta: f64) -> usize {
    let mut guess = (20.0 / (beta * p.hbar * p.omega)).ceil();
    let g = p.g1 + p.g2;
    if g * g > p.omega * p.big_omega {
        let s_star = g * g / (4.0 * p.omega * p.omega) - p.big_omega * p.big_omega / (4.0 * g * g);
        guess += (s_star + 8.0 * s_star.sqrt()).ceil();
    }
    if guess.is_finite() && guess < 1e15 {
        (guess as usize).max(64)
    } else {
        usize::MAX / 4
    }
}

/// Relative weight in Z of the top decile of `levels` (ascending).
fn top_decile_weight(levels: &[f64], beta: f64) -> f64 {
    let (e_min, ln_z) = shifted_log_partition(levels, beta);
    let k = (levels.len() / 10).max(1);
    let top: f64 = levels[levels.len() - k..].iter().map(|&e| (-beta * (e - e_min)).exp()).sum();
    top / ln_z.exp()
}

/// Doubling sequence n, 2n, 4n, ... clipped to the cap; errors once the
/// cap has already been tried.
fn next_n_max(n: usize, cap: usize) -> Result<usize> {
    let limit = cap - 1;
    if n >= limit {
        return Err(Error::Truncation { requested: 2 * (n + 1), cap });
    }
    Ok((2 * n).min(limit))
}

/// Diagonalizes with an adaptive Fock cutoff. Starting at
/// [`initial_n_max`] the cutoff is doubled until the top decile of kept
/// levels carries less than `eps` of Z and F changed by less than `eps/β`.
pub fn rabi_spectrum(p: &ModelParams, beta: f64, eps: f64) -> Result<Spectrum> {
    rabi_spectrum_with(p, beta, eps, &TruncationOptions::default())
}

pub fn rabi_spectrum_with(p: &ModelParams, beta: f64, eps: f64, opts: &TruncationOptions) -> Result<Spectrum> {
    check_eps(eps)?;
    check_beta(beta)?;
    let wanted = initial_n_max(p, beta);
    if wanted >= opts.cap || opts.cap < 2 {
        return Err(Error::Truncation { requested: wanted.saturating_add(1), cap: opts.cap });
    }
    let mut n = wanted;
    let mut previous: Option<f64> = None;
    loop {
        let levels = match opts.path {
            EigenPath::ParityChains => fock_eigenvalues(p, n)?,
            EigenPath::Dense => dense_eigenvalues(p, n)?,
        };
        let f = free_energy_of(&levels, beta);
        let tail = top_decile_weight(&levels, beta);
        if let Some(prev) = previous {
            if tail < eps && (f - prev).abs() < eps / beta {
                let mut s = Spectrum::new(levels, SpectrumSource::Diagonalization, Some(n), tail);
                s.converged = true;
                return Ok(s);
            }
        }
        previous = Some(f);
        n = next_n_max(n, opts.cap)?;
    }
}

/// Grows a closed-form ladder until its geometric tail estimate is below
/// `eps` and F is stable to `eps/β` between doublings.
pub(crate) fn grow_ladder<G>(p: &ModelParams, beta: f64, eps: f64, cap: usize, mut make: G) -> Result<Spectrum>
where
    G: FnMut(usize) -> Result<Spectrum>,
{
    check_eps(eps)?;
    check_beta(beta)?;
    let mut n = initial_n_max(p, beta).min(cap.saturating_sub(1));
    let mut previous: Option<f64> = None;
    loop {
        let mut s = make(n)?;
        let f = free_energy_of(&s.levels, beta);
        if let Some(prev) = previous {
            if s.tail_bound < eps && (f - prev).abs() < eps / beta {
                s.converged = true;
                return Ok(s);
            }
        }
        previous = Some(f);
        n = next_n_max(n, cap)?;
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("tail tolerance must lie in (0, 1), got {eps}")))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("beta must be positive, got {beta}")))
    }
}

/// Levels of the truncated diagonalization that a JC/aJC block list predicts:
/// the blocks below the cutoff, the unpaired level and the lone top state.
fn predicted_truncated_levels(p: &ModelParams, fock_n_max: usize) -> Result<Vec<f64>> {
    let h = p.hbar;
    let top = h * p.omega * fock_n_max as f64;
    let mut levels = if p.g2 == 0.0 {
        let mut v = if fock_n_max == 0 { vec![-0.5 * h * p.big_omega] } else { jc_block_levels(p, fock_n_max - 1)?.levels };
        v.push(top + 0.5 * h * p.big_omega);
        v
    } else {
        let mut v = if fock_n_max == 0 { vec![0.5 * h * p.big_omega] } else { ajc_block_levels(p, fock_n_max - 1)?.levels };
        v.push(top - 0.5 * h * p.big_omega);
        v
    };
    levels.sort_by(|a, b| a.total_cmp(b));
    Ok(levels)
}

/// Compares block levels with diagonalization at a Fock cutoff; returns the
/// largest deviation relative to ħ·max(ω, Ω, g).
pub fn block_cross_check(p: &ModelParams, fock_n_max: usize) -> Result<f64> {
    if p.g1 != 0.0 && p.g2 != 0.0 {
        return Err(Error::ModelMismatch("block decomposition needs g1 = 0 or g2 = 0".into()));
    }
    let predicted = predicted_truncated_levels(p, fock_n_max)?;
    let diag = fock_eigenvalues(p, fock_n_max)?;
    let scale = p.hbar * p.omega.max(p.big_omega).max(p.g1).max(p.g2) * (fock_n_max as f64 + 1.0);
    let dev = predicted.iter().zip(&diag).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(dev / scale)
}
