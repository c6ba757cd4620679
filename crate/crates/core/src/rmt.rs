//! Free-probability predictions for the limiting spectrum of
//! X = D1 + W1^T W1 on the solution manifold, and the derived stability
//! phase boundaries.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::eigvalsh;
use crate::net::SignPattern;

/// Parameters of the edge problem for X = D1 + W1^T W1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EdgeProblem {
    pub c: f64,
    pub alpha_h: f64,
    /// delta = (1 - alpha_h) - alpha_h, the mean of D1.
    pub delta: f64,
}

impl EdgeProblem {
    pub fn new(c: f64, alpha_h: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(CoreError::InvalidConfig(format!("c must be positive, got {c}")));
        }
        if !(0.0..=1.0).contains(&alpha_h) {
            return Err(CoreError::InvalidConfig(format!(
                "alpha_h must lie in [0, 1], got {alpha_h}"
            )));
        }
        Ok(Self {
            c,
            alpha_h,
            delta: 1.0 - 2.0 * alpha_h,
        })
    }
}

/// Union of disjoint real intervals bounding the limiting density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub intervals: Vec<(f64, f64)>,
}

impl SupportInterval {
    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv.0)
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.1)
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| x >= lo - slack && x <= hi + slack)
    }

    /// Support of -X given the support of X.
    pub fn negated(&self) -> Self {
        let mut intervals: Vec<(f64, f64)> =
            self.intervals.iter().map(|&(lo, hi)| (-hi, -lo)).collect();
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Self { intervals }
    }
}

/// Marcenko-Pastur support of W1^T W1 (W1 entries of variance 1/M,
/// aspect ratio c = M/N): [(1-sqrt(c))^2/c, (1+sqrt(c))^2/c].
pub fn mp_support(c: f64) -> Result<SupportInterval> {
    if !(c > 0.0) {
        return Err(CoreError::InvalidConfig(format!("c must be positive, got {c}")));
    }
    let r = c.sqrt();
    Ok(SupportInterval {
        intervals: vec![((1.0 - r).powi(2) / c, (1.0 + r).powi(2) / c)],
    })
}

/// R-transform of the two-atom law of D1:
/// R(w) = (+-sqrt(1 + 4 w (w + delta)) - 1) / (2 w), with R(0) = delta.
/// The sign is the branch on which B(w) = R(w) + 1/w actually inverts the
/// Cauchy transform; the principal square root alone is wrong once the
/// spurious quadratic root crosses the true one (e.g. delta = -1, w > 1/2).
pub fn r_transform_d1(w: f64, delta: f64) -> Result<f64> {
    let rad = 1.0 + 4.0 * w * (w + delta);
    if rad < 0.0 {
        return Err(CoreError::NegativeRadicand(rad));
    }
    if w.abs() < 1e-12 {
        // Limit w -> 0: first moment of D1.
        return Ok(delta);
    }
    // Two-atom law: mass (1+delta)/2 at +1, (1-delta)/2 at -1.
    let g = |z: f64| ((1.0 + delta) / 2.0) / (z - 1.0) + ((1.0 - delta) / 2.0) / (z + 1.0);
    let root = rad.sqrt();
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    for sgn in [1.0, -1.0] {
        let z = (1.0 + sgn * root) / (2.0 * w);
        let err = (g(z) - w).abs();
        if err < best_err {
            best_err = err;
            best = z;
        }
    }
    Ok(best - 1.0 / w)
}

/// Coefficients (a4, a3, a2, a1) of the quartic P_x(omega) whose roots
/// locate the Cauchy transform of X at spectral parameter x; a0 = 0 always.
pub fn quartic_coeffs(x: f64, c: f64, delta: f64) -> (f64, f64, f64, f64) {
    let a4 = 4.0 * (x * x - 1.0);
    let a3 = (-4.0 * delta * c - 8.0 * c * x * x - 4.0 * c * x + 8.0 * c + 8.0 * x) / c;
    let a2 = (8.0 * delta * c * c + 4.0 * c * c * x * x + 8.0 * c * c * x - 4.0 * c * c
        - 8.0 * c * x
        - 4.0 * c
        + 4.0)
        / (c * c);
    let a1 = (-4.0 * delta * c - 4.0 * c * x + 4.0) / c;
    (a4, a3, a2, a1)
}

/// Discriminant of the cubic left after factoring omega = 0 out of the
/// quartic. Negative discriminant (one real root + complex pair) marks x
/// inside the support.
fn cubic_disc(x: f64, c: f64, delta: f64) -> f64 {
    let (a, b, cc, d) = quartic_coeffs(x, c, delta);
    18.0 * a * b * cc * d - 4.0 * b.powi(3) * d + b * b * cc * cc
        - 4.0 * a * cc.powi(3)
        - 27.0 * a * a * d * d
}

/// Point masses of the limiting law of X when c > 1 makes W1^T W1 rank
/// deficient: mass max(0, (1 - alpha_h) - 1/c) at +1 and
/// max(0, alpha_h - 1/c) at -1.
pub fn atoms(c: f64, alpha_h: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let plus = (1.0 - alpha_h) - 1.0 / c;
    let minus = alpha_h - 1.0 / c;
    if minus > 1e-12 {
        out.push((-1.0, minus));
    }
    if plus > 1e-12 {
        out.push((1.0, plus));
    }
    out
}

/// Absolutely-continuous support of X = D1 + W1^T W1: scan the cubic
/// discriminant over x, bisect its sign changes, and keep intervals where
/// the discriminant is negative.
pub fn spectral_edges(c: f64, alpha_h: f64) -> Result<SupportInterval> {
    let prob = EdgeProblem::new(c, alpha_h)?;
    let delta = prob.delta;
    let mp_hi = (1.0 + c.sqrt()).powi(2) / c;
    let lo = -2.0 - mp_hi;
    let hi = 2.0 + mp_hi;
    let ngrid = 20001usize;
    let step = (hi - lo) / (ngrid - 1) as f64;

    let mut roots = Vec::new();
    let mut prev = cubic_disc(lo, c, delta);
    for k in 1..ngrid {
        let x = lo + step * k as f64;
        let cur = cubic_disc(x, c, delta);
        if prev == 0.0 {
            roots.push(x - step);
        } else if prev * cur < 0.0 {
            let (mut a, mut b) = (x - step, x);
            let fa = cubic_disc(a, c, delta);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if fa * cubic_disc(mid, c, delta) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = cur;
    }
    if roots.is_empty() {
        return Err(CoreError::NoConvergence(format!(
            "no discriminant sign changes over [{lo}, {hi}] for c={c}, alpha_h={alpha_h}"
        )));
    }

    let mut pts = vec![lo];
    pts.extend(roots.iter().copied());
    pts.push(hi);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if cubic_disc(mid, c, delta) < 0.0 {
            // Merge through tangency points where the discriminant touches
            // zero without changing sign.
            if let Some(last) = intervals.last_mut() {
                if (last.1 - w[0]).abs() < 1e-9 {
                    last.1 = w[1];
                    continue;
                }
            }
            intervals.push((w[0], w[1]));
        }
    }
    if intervals.is_empty() {
        return Err(CoreError::NoConvergence(format!(
            "discriminant never negative for c={c}, alpha_h={alpha_h}"
        )));
    }
    if (intervals.first().unwrap().0 - lo).abs() < 1e-9
        || (intervals.last().unwrap().1 - hi).abs() < 1e-9
    {
        return Err(CoreError::NoConvergence(
            "support touches the scan window; widen the bracket".into(),
        ));
    }
    Ok(SupportInterval { intervals })
}

/// Smallest point of the limiting law of X, including any atoms.
pub fn min_spectral_point(c: f64, alpha_h: f64) -> Result<f64> {
    let edges = spectral_edges(c, alpha_h)?;
    let mut lo = edges.min().unwrap();
    for (loc, _) in atoms(c, alpha_h) {
        lo = lo.min(loc);
    }
    Ok(lo)
}

/// Critical compression ratio where the smallest point of X crosses zero
/// (the manifold loses stability once part of -X becomes positive).
pub fn hidden_boundary(alpha_h: f64, c_lo: f64, c_hi: f64, tol: f64) -> Result<f64> {
    if !(c_lo > 0.0 && c_hi > c_lo && tol > 0.0) {
        return Err(CoreError::InvalidConfig(format!(
            "need 0 < c_lo < c_hi and tol > 0, got ({c_lo}, {c_hi}, {tol})"
        )));
    }
    let stable = |c: f64| -> Result<bool> { Ok(min_spectral_point(c, alpha_h)? > 0.0) };
    let s_lo = stable(c_lo)?;
    let s_hi = stable(c_hi)?;
    if s_lo == s_hi {
        return Err(CoreError::NoCrossing { lo: c_lo, hi: c_hi });
    }
    let (mut a, mut b) = (c_lo, c_hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if stable(mid)? == s_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// One draw of the manifold spectrum -(||W2||^2 D1 + W1^T D2 W1) at matrix
/// size m, with hidden width n = round(m / c).
pub fn empirical_spectrum(
    c: f64,
    alpha_h: f64,
    alpha_r: f64,
    m: usize,
    seed: u64,
) -> Result<Array1<f64>> {
    if m < 2 {
        return Err(CoreError::InvalidConfig("matrix size must be >= 2".into()));
    }
    let n = (m as f64 / c).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = Normal::new(0.0, (1.0 / m as f64).sqrt()).unwrap();
    let n2 = Normal::new(0.0, (1.0 / n as f64).sqrt()).unwrap();
    let w1 = Array2::from_shape_fn((n, m), |_| n1.sample(&mut rng));
    let w2 = Array1::from_shape_fn(n, |_| n2.sample(&mut rng));
    let signs = SignPattern::with_fractions(m, n, alpha_h, alpha_r, seed.wrapping_add(0x5eed));
    let w2sq: f64 = w2.iter().map(|v| v * v).sum();

    // A = ||W2||^2 D1 + W1^T D2 W1, assembled as (D2^{1/2}-signed rows).
    let mut signed = w1.clone();
    for i in 0..n {
        if signs.d2[i] < 0.0 {
            signed.row_mut(i).mapv_inplace(|v| -v);
        }
    }
    let mut a = w1.t().dot(&signed);
    // Symmetrize against rounding; W1^T D2 W1 is symmetric exactly.
    for j in 0..m {
        for k in (j + 1)..m {
            let v = 0.5 * (a[(j, k)] + a[(k, j)]);
            a[(j, k)] = v;
            a[(k, j)] = v;
        }
    }
    for j in 0..m {
        a[(j, j)] += w2sq * signs.d1[j];
    }
    let mut ev = eigvalsh(&a)?;
    ev.mapv_inplace(|v| -v);
    let mut v = ev.to_vec();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(Array1::from_vec(v))
}

/// Fraction of sampled manifold matrices -(||W2||^2 I + W1^T D2 W1) with a
/// positive eigenvalue, i.e. unstable draws under readout-only flips.
pub fn readout_boundary_mc(
    alpha_r: f64,
    c: f64,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(CoreError::InvalidConfig("n_samples must be >= 1".into()));
    }
    let mut unstable = 0usize;
    for k in 0..n_samples {
        let ev = empirical_spectrum(c, 0.0, alpha_r, m, seed.wrapping_add(k as u64))?;
        if ev[ev.len() - 1] > 0.0 {
            unstable += 1;
        }
    }
    Ok(unstable as f64 / n_samples as f64)
}
