//! Dense real symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by QL iteration with
//! implicit Wilkinson shifts. Both stages are sequential and therefore
//! bitwise deterministic for fixed input.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Dense symmetric matrix, row-major. `set` writes both triangles so the
/// storage is always exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        SymmetricMatrix { n, data: vec![0.0; n * n] }
    }

    /// Builds from the lower triangle given by `f(i, j)` with `j <= i`.
    pub fn from_lower<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn add_diagonal(&mut self, c: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += c;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// Symmetric tridiagonal matrix: `diag` has length n, `off[i]` couples
/// rows i and i+1 (length n-1).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n-1");
        Tridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> SymmetricMatrix {
        let n = self.dim();
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, self.diag[i]);
            if i + 1 < n {
                m.set(i + 1, i, self.off[i]);
            }
        }
        m
    }
}

/// Householder reduction. On return `d`, `e` hold the tridiagonal form with
/// `e[i]` coupling rows i-1 and i (`e[0] = 0`). With `want_q`, `a` is
/// overwritten by the orthogonal transform whose columns map tridiagonal
/// eigenvectors back.
fn householder(a: &mut [f64], n: usize, want_q: bool) -> (Vec<f64>, Vec<f64>) {
    let idx = |i: usize, j: usize| i * n + j;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let mut f = a[idx(i, l)];
                let mut g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                f = 0.0;
                for j in 0..=l {
                    if want_q {
                        a[idx(j, i)] = a[idx(i, j)] / h;
                    }
                    g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if want_q {
            if d[i] != 0.0 {
                for j in 0..i {
                    let g: f64 = (0..i).map(|k| a[idx(i, k)] * a[idx(k, j)]).sum();
                    for k in 0..i {
                        a[idx(k, j)] -= g * a[idx(k, i)];
                    }
                }
            }
            d[i] = a[idx(i, i)];
            a[idx(i, i)] = 1.0;
            for j in 0..i {
                a[idx(j, i)] = 0.0;
                a[idx(i, j)] = 0.0;
            }
        } else {
            d[i] = a[idx(i, i)];
        }
    }
    (d, e)
}

/// QL with implicit shifts on (d, e) where `e[i]` couples i and i+1 on
/// entry (length n, last entry ignored). `rows`, when given, holds n vectors
/// of length n stored as rows; the rotations are applied to them.
fn implicit_ql(d: &mut [f64], e: &mut [f64], tol: f64, mut rows: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let tol = tol.max(f64::EPSILON);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= tol * dd || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::EigenNoConvergence { index: l });
            }
            sweeps += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_ascending(values: &mut [f64]) {
    values.sort_by(|a, b| a.total_cmp(b));
}

/// All eigenvalues of `m` in ascending order. `tol` is the relative
/// deflation threshold of the QL stage (clamped below at machine epsilon),
/// which bounds the residual of the implied eigenpairs by roughly `tol·‖m‖`.
pub fn sym_eigenvalues(m: &SymmetricMatrix, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    let n = m.dim();
    let mut a = m.data.clone();
    let (mut d, e) = householder(&mut a, n, false);
    // shift e so e[i] couples i and i+1
    let mut e: Vec<f64> = e[1..].iter().copied().chain(std::iter::once(0.0)).collect();
    implicit_ql(&mut d, &mut e, tol, None)?;
    sort_ascending(&mut d);
    Ok(d)
}

pub fn tridiagonal_eigenvalues(t: &Tridiagonal, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    let mut d = t.diag.clone();
    let mut e: Vec<f64> = t.off.iter().copied().chain(std::iter::once(0.0)).collect();
    implicit_ql(&mut d, &mut e, tol, None)?;
    sort_ascending(&mut d);
    Ok(d)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("eigensolver tolerance must be positive, got {tol}")))
    }
}

/// Outcome of a residual-checked decomposition. Eigenvectors are computed
/// internally and only their quality is reported.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCheck {
    pub values: Vec<f64>,
    /// max_k ‖m v_k − λ_k v_k‖ / ‖m‖₂
    pub max_residual: f64,
    /// max_{j,k} |v_jᵀ v_k − δ_jk|
    pub max_orthogonality_error: f64,
}

pub fn sym_eigen_checked(m: &SymmetricMatrix, tol: f64) -> Result<EigenCheck> {
    check_tol(tol)?;
    let n = m.dim();
    let mut a = m.data.clone();
    let (mut d, e) = householder(&mut a, n, true);
    let mut e: Vec<f64> = e[1..].iter().copied().chain(std::iter::once(0.0)).collect();
    // rows of the transposed transform are the vectors the rotations act on
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            z[j * n + i] = a[i * n + j];
        }
    }
    implicit_ql(&mut d, &mut e, tol, Some(&mut z))?;

    let norm = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut max_res = 0.0f64;
    let mut mv = vec![0.0; n];
    for k in 0..n {
        let v = &z[k * n..(k + 1) * n];
        m.mul_vec(v, &mut mv);
        let r = mv.iter().zip(v).map(|(a, b)| (a - d[k] * b).powi(2)).sum::<f64>().sqrt();
        max_res = max_res.max(r);
    }
    let mut max_orth = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let dot: f64 = (0..n).map(|i| z[j * n + i] * z[k * n + i]).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            max_orth = max_orth.max((dot - target).abs());
        }
    }
    sort_ascending(&mut d);
    Ok(EigenCheck {
        values: d,
        max_residual: if norm > 0.0 { max_res / norm } else { max_res },
        max_orthogonality_error: max_orth,
    })
}
