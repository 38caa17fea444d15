//! Quantumness ΔQC = F_Q − F_C, the large-x scaling fit, and the scans
//! built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{classify, ModelKind, ModelParams, Phase};
use crate::thermo::classical::{fc_closed, fc_quadrature, QuadratureSpec};
use crate::thermo::quantum::{fq_closed, fq_numeric};
use crate::thermo::FreeEnergy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantumness {
    pub f_q: FreeEnergy,
    pub f_c: FreeEnergy,
    pub value: f64,
    pub err: f64,
}

/// ΔQC at one parameter point. The tolerance is split evenly between the
/// two treatments.
pub fn delta_qc(p: &ModelParams, beta: f64, route: Route, eps: f64) -> Result<Quantumness> {
    let p = p.with_beta(beta)?;
    let (f_q, f_c) = match route {
        Route::Numeric => {
            let f_q = fq_numeric(&p, beta, eps / 2.0)?;
            let spec = QuadratureSpec { rel_tol: (eps / 2.0).max(1e-13), ..Default::default() };
            (f_q, fc_quadrature(&p, beta, &spec)?)
        }
        Route::ClosedForm => {
            let kind = p.kind();
            if !matches!(kind, ModelKind::JC | ModelKind::AJC) {
                return Err(Error::ModelMismatch(format!("closed forms exist only for JC/aJC, not {}", kind.name())));
            }
            let d = p.derive()?;
            let gc = d.gc;
            (fq_closed(kind, d.phase, d.x, d.q, beta, gc, p.hbar)?, fc_closed(d.phase, d.x, d.q, beta, gc, p.hbar)?)
        }
    };
    Ok(Quantumness { f_q, f_c, value: f_q.value - f_c.value, err: f_q.err_estimate + f_c.err_estimate })
}

/// Free particle in a box: quantum and classical partition functions are the
/// same integral, so ΔQC vanishes for every β, m and V.
pub fn oracle_free_particle(beta: f64, mass: f64, volume: f64) -> Result<f64> {
    for (name, v) in [("beta", beta), ("mass", mass), ("volume", volume)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(0.0)
}

/// Harmonic oscillator: `(exact, series)` with
/// exact = (1/β) ln(2 sinh(u/2)/u), series = u²/(24β) − u⁴/(2880β), u = βħω.
pub fn oracle_harmonic(omega: f64, beta: f64, hbar: f64) -> (f64, f64) {
    let u = beta * hbar * omega;
    let h = 0.5 * u;
    // ln(sinh(h)/h) without cancellation: sinh(h)/h − 1 by its series for small h
    let ratio = if h < 1.0 {
        let (mut term, mut sum, mut k) = (1.0, 0.0, 1.0);
        loop {
            term *= h * h / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            k += 1.0;
        }
        sum.ln_1p()
    } else {
        (h.sinh() / h).ln()
    };
    let exact = ratio / beta;
    let series = (hbar * omega).powi(2) * beta / 24.0 - (hbar * omega).powi(4) * beta.powi(3) / 2880.0;
    (exact, series)
}

/// `exact − series` of `oracle_harmonic`, evaluated in double-double
/// arithmetic. Near u → 0 the two agree to far below an f64 ulp of either,
/// so their f64 difference is dominated by rounding.
pub fn harmonic_series_gap(omega: f64, beta: f64, hbar: f64) -> f64 {
    let u = beta * hbar * omega;
    let h = 0.5 * u;
    if h >= 1.0 {
        let (exact, series) = oracle_harmonic(omega, beta, hbar);
        return exact - series;
    }
    let h2 = dd::Dd::prod(h, h);
    // sinh(h)/h − 1 = Σ_{k≥1} h^{2k}/(2k+1)!
    let mut term = dd::Dd::from(1.0);
    let mut s = dd::Dd::from(0.0);
    for k in 1..60 {
        term = (term * h2).div_f((2 * k) as f64 * (2 * k + 1) as f64);
        s = s + term;
        if term.hi.abs() < 1e-34 * s.hi.abs() {
            break;
        }
    }
    // ln(1 + s) = Σ (−1)^{k+1} s^k / k
    let mut power = s;
    let mut log = dd::Dd::from(0.0);
    for k in 1..200 {
        let t = power.div_f(k as f64);
        log = if k % 2 == 1 { log + t } else { log - t };
        if t.hi.abs() < 1e-34 * log.hi.abs() {
            break;
        }
        power = power * s;
    }
    let u2 = dd::Dd::prod(u, u);
    let series = u2.div_f(24.0) - (u2 * u2).div_f(2880.0);
    (log - series).div_f(beta).hi
}

mod dd {
    use std::ops::{Add, Mul, Sub};

    /// Unevaluated sum `hi + lo` with |lo| ≤ ulp(hi)/2.
    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn quick(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    impl From<f64> for Dd {
        fn from(v: f64) -> Dd {
            Dd { hi: v, lo: 0.0 }
        }
    }

    impl Dd {
        pub fn prod(a: f64, b: f64) -> Dd {
            let p = a * b;
            Dd { hi: p, lo: a.mul_add(b, -p) }
        }

        pub fn div_f(self, d: f64) -> Dd {
            let q1 = self.hi / d;
            let r = self - Dd::prod(q1, d);
            let q2 = r.hi / d;
            quick(q1, q2)
        }
    }

    impl Add for Dd {
        type Output = Dd;
        fn add(self, o: Dd) -> Dd {
            let s = two_sum(self.hi, o.hi);
            quick(s.hi, s.lo + self.lo + o.lo)
        }
    }

    impl Sub for Dd {
        type Output = Dd;
        fn sub(self, o: Dd) -> Dd {
            self + Dd { hi: -o.hi, lo: -o.lo }
        }
    }

    impl Mul for Dd {
        type Output = Dd;
        fn mul(self, o: Dd) -> Dd {
            let p = Dd::prod(self.hi, o.hi);
            quick(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
        }
    }
}

/// Closed-form large-x coefficients `(A, B)` for JC and aJC.
pub fn coeff_closed(kind: ModelKind, q: f64, beta: f64, gc: f64, hbar: f64) -> Result<(f64, f64)> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidParams(format!("q must be non-negative, got {q}")));
    }
    if classify(q) == Phase::Critical {
        return Err(Error::Critical("B diverges at the critical coupling q = 1"));
    }
    let e = hbar * gc;
    let q2 = q * q;
    let sign = match kind {
        ModelKind::JC => 1.0,
        ModelKind::AJC => -1.0,
        other => return Err(Error::ModelMismatch(format!("no coefficient formula for the {} model", other.name()))),
    };
    if q > 1.0 {
        return Ok((sign * e / (2.0 * q2), 0.0));
    }
    let a = sign * e * q2 / 2.0;
    let cube = e * e * beta * beta * (q2 - 1.0).powi(3);
    let b = match kind {
        ModelKind::JC => (cube + 24.0 * q2) / (24.0 * beta * (q2 - 1.0)),
        _ => (cube - 24.0 * (2.0 * q2 + q2 * q2)) / (24.0 * beta * (q2 - 1.0)),
    };
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub residual_rms: f64,
    pub x_grid: Vec<f64>,
    pub beta: f64,
}

/// Least squares of `delta` on the basis {x^{-1/2}, x^{-1}}.
pub fn fit_ab(x: &[f64], delta: &[f64], beta: f64) -> Result<ScalingFit> {
    fit_ab_weighted(x, delta, None, beta)
}

/// As `fit_ab`, with optional per-point weights (e.g. 1/err²).
pub fn fit_ab_weighted(x: &[f64], delta: &[f64], weights: Option<&[f64]>, beta: f64) -> Result<ScalingFit> {
    if x.len() != delta.len() || weights.is_some_and(|w| w.len() != x.len()) {
        return Err(Error::InvalidParams("fit inputs differ in length".into()));
    }
    if x.len() < 4 {
        return Err(Error::InvalidParams(format!("fit needs at least 4 points, got {}", x.len())));
    }
    if x.iter().any(|v| !(*v > 0.0 && v.is_finite())) || delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParams("fit points must be finite with x > 0".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("x grid must be strictly increasing".into()));
    }
    if x[x.len() - 1] / x[0] < 10.0 {
        return Err(Error::InvalidParams("x grid must span at least one decade".into()));
    }
    let sw: Vec<f64> = match weights {
        Some(w) if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
            return Err(Error::InvalidParams("weights must be positive".into()))
        }
        Some(w) => w.iter().map(|v| v.sqrt()).collect(),
        None => vec![1.0; x.len()],
    };
    // modified Gram–Schmidt on the two weighted columns
    let mut c1: Vec<f64> = x.iter().zip(&sw).map(|(x, w)| w / x.sqrt()).collect();
    let mut c2: Vec<f64> = x.iter().zip(&sw).map(|(x, w)| w / x).collect();
    let y: Vec<f64> = delta.iter().zip(&sw).map(|(d, w)| w * d).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>();
    let r11 = norm(&c1);
    c1.iter_mut().for_each(|v| *v /= r11);
    let r12 = dot(&c1, &c2);
    c2.iter_mut().zip(&c1).for_each(|(v, u)| *v -= r12 * u);
    let r22 = norm(&c2);
    if r22 <= 1e-12 * r11 {
        return Err(Error::RankDeficient);
    }
    c2.iter_mut().for_each(|v| *v /= r22);
    let q1 = dot(&c1, &y);
    let q2 = dot(&c2, &y);
    let b = q2 / r22;
    let a = (q1 - r12 * b) / r11;
    let ss: f64 = x.iter().zip(delta).map(|(x, d)| (d - a / x.sqrt() - b / x).powi(2)).sum();
    Ok(ScalingFit { a, b, residual_rms: (ss / x.len() as f64).sqrt(), x_grid: x.to_vec(), beta })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (l + (h - l) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Default fit grid: wide for the exactly solvable models, narrower where
/// each point needs a diagonalization.
pub fn default_x_grid(kind: ModelKind) -> Vec<f64> {
    match kind {
        ModelKind::JC | ModelKind::AJC => log_grid(1e2, 1e4, 8),
        _ => log_grid(25.0, 400.0, 8),
    }
}

pub fn default_x_grid_for_eta(eta: f64) -> Vec<f64> {
    if eta == 0.0 || eta == 1.0 {
        default_x_grid(ModelKind::JC)
    } else {
        default_x_grid(ModelKind::Rabi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub q: f64,
    pub eta: f64,
    pub gc: f64,
    pub beta: f64,
    pub hbar: f64,
}

impl ScanPoint {
    pub fn dimensionless(x: f64, q: f64, eta: f64, beta: f64) -> Self {
        ScanPoint { x, q, eta, gc: 1.0, beta, hbar: 1.0 }
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::from_dimensionless(self.x, self.q, self.eta, self.gc, self.beta, self.hbar)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub point: ScanPoint,
    pub f_q: FreeEnergy,
    pub f_c: FreeEnergy,
    pub delta_qc: f64,
    pub err: f64,
    /// ΔQC/F_C, filled by the experiment estimate.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn x(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.point.x).collect()
    }

    pub fn delta(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta_qc).collect()
    }
}

/// Evaluates ΔQC at every point concurrently; rows come back in input
/// order. The first failing point aborts the scan.
pub fn scan(points: &[ScanPoint], route: Route, eps: f64) -> Result<ScanTable> {
    let rows: Vec<Result<ScanRow>> = points.par_iter().map(|pt| scan_row(pt, route, eps)).collect();
    Ok(ScanTable { rows: rows.into_iter().collect::<Result<_>>()? })
}

/// As `scan`, but keeps going past failures and returns them per row.
pub fn scan_lenient(points: &[ScanPoint], route: Route, eps: f64) -> Vec<Result<ScanRow>> {
    points.par_iter().map(|pt| scan_row(pt, route, eps)).collect()
}

fn scan_row(pt: &ScanPoint, route: Route, eps: f64) -> Result<ScanRow> {
    let p = pt.params()?;
    let v = delta_qc(&p, pt.beta, route, eps)?;
    Ok(ScanRow { point: *pt, f_q: v.f_q, f_c: v.f_c, delta_qc: v.f_q.value - v.f_c.value, err: v.err, ratio: None })
}

/// Fit of ΔQC over `x_grid` at fixed (q, η, β) by the numeric route.
pub fn fit_at(q: f64, eta: f64, beta: f64, x_grid: &[f64], eps: f64) -> Result<(ScanTable, ScalingFit)> {
    let points: Vec<ScanPoint> = x_grid.iter().map(|&x| ScanPoint::dimensionless(x, q, eta, beta)).collect();
    let table = scan(&points, Route::Numeric, eps)?;
    let fit = fit_ab(&table.x(), &table.delta(), beta)?;
    Ok((table, fit))
}

/// Fitted A for each η, all on the same x grid.
pub fn a_of_eta(q: f64, beta: f64, eta_grid: &[f64], x_grid: &[f64], eps: f64) -> Result<Vec<(f64, ScalingFit)>> {
    if eta_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::InvalidParams("eta grid must lie in [0, 1]".into()));
    }
    eta_grid.iter().map(|&eta| Ok((eta, fit_at(q, eta, beta, x_grid, eps)?.1))).collect()
}

/// Largest deviation of fitted A(η) from the straight line through the
/// fitted endpoints, relative to |A(1)|. The grid must contain 0 and 1.
pub fn linearity_deviation(fits: &[(f64, ScalingFit)]) -> Result<f64> {
    let at = |eta: f64| fits.iter().find(|(e, _)| *e == eta).map(|(_, f)| f.a);
    let (a0, a1) = match (at(0.0), at(1.0)) {
        (Some(a0), Some(a1)) => (a0, a1),
        _ => return Err(Error::InvalidParams("eta grid must include both endpoints".into())),
    };
    Ok(fits.iter().map(|(eta, f)| (f.a - (a0 * (1.0 - eta) + a1 * eta)).abs()).fold(0.0, f64::max) / a1.abs())
}

pub const DEFAULT_CRITICAL_X: f64 = 100.0;

/// ΔQC across the critical coupling at fixed η, β and x.
pub fn critical_scan(eta: f64, beta: f64, x: f64, q_grid: &[f64], eps: f64) -> Result<ScanTable> {
    let points: Vec<ScanPoint> = q_grid.iter().map(|&q| ScanPoint::dimensionless(x, q, eta, beta)).collect();
    scan(&points, Route::Numeric, eps)
}

/// Rabi model (η = ½) in physical units over a grid of total couplings g,
/// with ratio ΔQC/F_C per row.
pub fn experiment_estimate(omega: f64, big_omega: f64, beta: f64, hbar: f64, g_grid: &[f64], eps: f64) -> Result<ScanTable> {
    let base = ModelParams::new(omega, big_omega, 0.0, 0.0, hbar, beta)?;
    let d = base.derive()?;
    let points: Vec<ScanPoint> = g_grid
        .iter()
        .map(|&g| ScanPoint { x: d.x, q: g / d.gc, eta: 0.5, gc: d.gc, beta, hbar })
        .collect();
    let mut table = scan(&points, Route::Numeric, eps)?;
    for row in &mut table.rows {
        row.ratio = Some(row.delta_qc / row.f_c.value);
    }
    Ok(table)
}
