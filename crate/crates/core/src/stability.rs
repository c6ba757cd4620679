//! Exact Jacobian of the population flow and closed-form spectra at the
//! origin and on the solution manifold.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::flow_rhs;
use crate::error::{CoreError, Result};
use crate::linalg::{eigvals, eigvalsh};
use crate::net::SignPattern;

/// Default residual tolerance when asserting manifold membership.
pub const MANIFOLD_TOL: f64 = 1e-10;

/// Jacobian of the flow in the fixed vectorization vec(W1) index
/// (i, j) -> i*M + j (hidden index outer), followed by the N entries of W2.
#[derive(Debug, Clone)]
pub struct JacobianMatrix {
    pub entries: Array2<f64>,
    pub m: usize,
    pub n: usize,
}

impl JacobianMatrix {
    pub fn dim(&self) -> usize {
        self.n * self.m + self.n
    }

    pub fn asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let r = self.entries[(i, j)] - self.entries[(j, i)];
                acc += 2.0 * r * r;
            }
        }
        acc.sqrt()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Sorted by real part ascending, imaginary part as tie-break.
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub n_zero: usize,
    pub classification: Classification,
}

impl SpectrumReport {
    /// Classify with |lambda| < tol counted as zero.
    pub fn from_eigenvalues(mut ev: Vec<Complex64>, tol: f64) -> Self {
        ev.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        let n_zero = ev.iter().filter(|z| z.norm() < tol).count();
        let max_real_part = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let classification = if max_real_part > tol {
            Classification::Unstable
        } else if max_real_part < -tol {
            Classification::Stable
        } else {
            Classification::Marginal
        };
        Self {
            eigenvalues: ev,
            max_real_part,
            n_zero,
            classification,
        }
    }

    /// Nonzero eigenvalues under the report's own zero tolerance.
    pub fn nonzero(&self, tol: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|z| z.norm() >= tol)
            .collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            eigenvalues: Vec<Entry>,
            max_real_part: f64,
            n_zero: usize,
            classification: &'a Classification,
        }
        let doc = Doc {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|z| Entry { re: z.re, im: z.im })
                .collect(),
            max_real_part: self.max_real_part,
            n_zero: self.n_zero,
            classification: &self.classification,
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

/// Analytic Jacobian blocks:
/// J11 = -(W2^T W2) (x) D1,
/// [J12]_{(ij),h} = delta_{hi} E_j d1_j - W2_i W1_{hj} d1_j,
/// [J21]_{l,(pq)} = delta_{lp} E_q d2_l - W2_p W1_{lq} d2_l,
/// J22 = -D2 W1 W1^T, with E = s - W2 W1.
pub fn assemble_jacobian(
    w1: &Array2<f64>,
    w2: &Array1<f64>,
    s: &Array1<f64>,
    signs: &SignPattern,
) -> Result<JacobianMatrix> {
    let (n, m) = w1.dim();
    if w2.len() != n || s.len() != m || signs.d1.len() != m || signs.d2.len() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "jacobian shapes: w1 {n}x{m}, w2 {}, s {}, signs ({}, {})",
            w2.len(),
            s.len(),
            signs.d1.len(),
            signs.d2.len()
        )));
    }
    let e = s - &w2.dot(w1);
    let dim = n * m + n;
    let mut j = Array2::zeros((dim, dim));

    for i in 0..n {
        for jj in 0..m {
            let row = i * m + jj;
            // J11 columns (h, k): nonzero only at k = jj.
            for h in 0..n {
                j[(row, h * m + jj)] = -w2[i] * w2[h] * signs.d1[jj];
            }
            // J12 columns h.
            for h in 0..n {
                let mut v = -w2[i] * w1[(h, jj)] * signs.d1[jj];
                if h == i {
                    v += e[jj] * signs.d1[jj];
                }
                j[(row, n * m + h)] = v;
            }
        }
    }
    for l in 0..n {
        let row = n * m + l;
        // J21 columns (p, q).
        for p in 0..n {
            for q in 0..m {
                let mut v = -w2[p] * w1[(l, q)] * signs.d2[l];
                if p == l {
                    v += e[q] * signs.d2[l];
                }
                j[(row, p * m + q)] = v;
            }
        }
        // J22 columns h.
        for h in 0..n {
            let mut dot = 0.0;
            for q in 0..m {
                dot += w1[(l, q)] * w1[(h, q)];
            }
            j[(row, n * m + h)] = -signs.d2[l] * dot;
        }
    }
    Ok(JacobianMatrix { entries: j, m, n })
}

/// Central-difference Jacobian of the flow; independent oracle for
/// `assemble_jacobian`.
pub fn jacobian_fd(
    w1: &Array2<f64>,
    w2: &Array1<f64>,
    s: &Array1<f64>,
    signs: &SignPattern,
    h: f64,
) -> Result<JacobianMatrix> {
    if !(h > 0.0) {
        return Err(CoreError::InvalidConfig("finite-difference step must be > 0".into()));
    }
    let (n, m) = w1.dim();
    let dim = n * m + n;
    let mut j = Array2::zeros((dim, dim));
    let pack = |d1: &Array2<f64>, d2: &Array1<f64>| -> Vec<f64> {
        d1.iter().chain(d2.iter()).copied().collect()
    };
    for col in 0..dim {
        let mut w1p = w1.clone();
        let mut w2p = w2.clone();
        let mut w1m = w1.clone();
        let mut w2m = w2.clone();
        if col < n * m {
            let (i, jj) = (col / m, col % m);
            w1p[(i, jj)] += h;
            w1m[(i, jj)] -= h;
        } else {
            w2p[col - n * m] += h;
            w2m[col - n * m] -= h;
        }
        let (fp1, fp2) = flow_rhs(&w1p, &w2p, s, signs)?;
        let (fm1, fm2) = flow_rhs(&w1m, &w2m, s, signs)?;
        let plus = pack(&fp1, &fp2);
        let minus = pack(&fm1, &fm2);
        for row in 0..dim {
            j[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(JacobianMatrix { entries: j, m, n })
}

/// Origin spectrum: MN - N zeros plus N pairs +-sqrt(d2_i * Sigma) with
/// Sigma = sum_j d1_j s_j^2; negative radicand gives an imaginary pair.
pub fn origin_spectrum_closed(s: &Array1<f64>, signs: &SignPattern) -> Result<SpectrumReport> {
    let m = signs.d1.len();
    let n = signs.d2.len();
    if s.len() != m {
        return Err(CoreError::DimensionMismatch(format!(
            "teacher length {} vs d1 length {m}",
            s.len()
        )));
    }
    let sigma: f64 = s.iter().zip(signs.d1.iter()).map(|(sj, d)| d * sj * sj).sum();
    let mut ev = vec![Complex64::new(0.0, 0.0); n * m - n];
    for i in 0..n {
        let rad = signs.d2[i] * sigma;
        if rad >= 0.0 {
            let r = rad.sqrt();
            ev.push(Complex64::new(r, 0.0));
            ev.push(Complex64::new(-r, 0.0));
        } else {
            let r = (-rad).sqrt();
            ev.push(Complex64::new(0.0, r));
            ev.push(Complex64::new(0.0, -r));
        }
    }
    let scale: f64 = s.iter().map(|v| v * v).sum::<f64>().max(1.0);
    Ok(SpectrumReport::from_eigenvalues(ev, 1e-9 * scale))
}

/// Reduced matrix on the manifold: A = ||W2||^2 D1 + W1^T D2 W1 (M x M,
/// symmetric); nonzero Jacobian eigenvalues are the spectrum of -A, padded
/// with MN + N - M zeros.
pub fn manifold_reduced_matrix(
    w1: &Array2<f64>,
    w2: &Array1<f64>,
    signs: &SignPattern,
) -> Result<Array2<f64>> {
    let (n, m) = w1.dim();
    if w2.len() != n || signs.d1.len() != m || signs.d2.len() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "reduced-matrix shapes: w1 {n}x{m}, w2 {}, signs ({}, {})",
            w2.len(),
            signs.d1.len(),
            signs.d2.len()
        )));
    }
    let w2sq: f64 = w2.iter().map(|v| v * v).sum();
    let mut a = Array2::zeros((m, m));
    for j in 0..m {
        a[(j, j)] = w2sq * signs.d1[j];
    }
    for j in 0..m {
        for k in 0..m {
            let mut dot = 0.0;
            for i in 0..n {
                dot += w1[(i, j)] * signs.d2[i] * w1[(i, k)];
            }
            a[(j, k)] += dot;
        }
    }
    Ok(a)
}

/// Closed-form spectrum at a manifold point. When `s` is supplied, the
/// residual ||s - W2 W1|| is checked against `MANIFOLD_TOL`.
pub fn manifold_spectrum_closed(
    w1: &Array2<f64>,
    w2: &Array1<f64>,
    signs: &SignPattern,
    s: Option<&Array1<f64>>,
) -> Result<SpectrumReport> {
    let (n, m) = w1.dim();
    if let Some(s) = s {
        let e = s - &w2.dot(w1);
        let residual = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > MANIFOLD_TOL {
            return Err(CoreError::OffManifold {
                residual,
                tol: MANIFOLD_TOL,
            });
        }
    }
    let a = manifold_reduced_matrix(w1, w2, signs)?;
    let w = eigvalsh(&a)?;
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let mut ev = vec![Complex64::new(0.0, 0.0); n * m + n - m];
    ev.extend(w.iter().map(|&x| Complex64::new(-x, 0.0)));
    Ok(SpectrumReport::from_eigenvalues(ev, 1e-9 * scale))
}

/// Dense eigensolve of an assembled Jacobian; zero tolerance
/// 1e-9 * ||J||_F.
pub fn eig_full(j: &JacobianMatrix) -> Result<SpectrumReport> {
    if j.entries.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Degenerate("non-finite Jacobian entries".into()));
    }
    let ev = eigvals(&j.entries)?;
    let tol = 1e-9 * j.frobenius().max(1.0);
    Ok(SpectrumReport::from_eigenvalues(ev, tol))
}
