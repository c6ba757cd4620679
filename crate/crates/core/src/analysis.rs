//! Trajectory diagnostics: fluctuation order parameter, autocorrelation,
//! PCA projection, convergence speed, and significance testing.

use ndarray::{Array1, Array2};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dynamics::Trajectory;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Converged,
    Oscillatory,
    Chaotic,
    Diverged,
}

/// Thresholds separating regimes; defaults picked from the pilot gap
/// between converged and chaotic runs.
#[derive(Debug, Clone, Copy)]
pub struct RegimeThresholds {
    /// q below this (with small final loss) counts as converged.
    pub converged_q: f64,
    /// q above this (with decaying autocorrelation) counts as chaotic.
    pub chaotic_q: f64,
    /// Final/initial test-loss ratio for convergence.
    pub loss_ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            converged_q: 1e-3,
            chaotic_q: 1.0,
            loss_ratio: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub q: f64,
    /// Lag at which the mean weight autocorrelation first drops below 1/e;
    /// infinite when it never does.
    pub autocorr_decay: f64,
    pub regime: Regime,
}

impl RegimeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Default burn-in: discard the first half of the recorded epochs.
pub fn default_burn_in(traj: &Trajectory) -> usize {
    traj.len() / 2
}

/// Fluctuation order parameter
/// q = E_k[ Var_t(w_k) ] / Var_k[ Mean_t(w_k) ],
/// with t over post-burn-in snapshots and k over weight indices.
pub fn order_parameter_q(traj: &Trajectory, burn_in: usize) -> Result<f64> {
    let t0 = burn_in;
    let t = traj.len();
    if t < t0 + 2 {
        return Err(CoreError::Degenerate(format!(
            "need >= 2 recorded epochs after burn-in, have {} of {t}",
            t.saturating_sub(t0)
        )));
    }
    let steps = t - t0;
    let dim = traj.flat_weights(t0).len();
    let mut mean = Array1::<f64>::zeros(dim);
    for ti in t0..t {
        mean += &traj.flat_weights(ti);
    }
    mean /= steps as f64;
    let mut tvar = Array1::<f64>::zeros(dim);
    for ti in t0..t {
        let w = traj.flat_weights(ti);
        for k in 0..dim {
            let d = w[k] - mean[k];
            tvar[k] += d * d;
        }
    }
    tvar /= steps as f64;

    let mm = mean.sum() / dim as f64;
    let vmean = mean.iter().map(|v| (v - mm) * (v - mm)).sum::<f64>() / dim as f64;
    if vmean <= 0.0 {
        return Err(CoreError::Degenerate(
            "across-weight variance of temporal means is zero; q undefined".into(),
        ));
    }
    Ok(tvar.sum() / dim as f64 / vmean)
}

/// Normalized autocovariance; element 0 is exactly 1.
pub fn autocorr(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 || series.len() <= max_lag {
        return Err(CoreError::Degenerate(format!(
            "need length > max_lag >= 1, got length {} and max_lag {max_lag}",
            series.len()
        )));
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return Err(CoreError::Degenerate("zero-variance series".into()));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut acc = 0.0;
        for i in 0..(n - lag) {
            acc += (series[i] - mean) * (series[i + lag] - mean);
        }
        out.push(acc / (n as f64 * var));
    }
    out[0] = 1.0;
    Ok(out)
}

/// Mean autocorrelation over up to `max_weights` weight series of the
/// post-burn-in trajectory.
pub fn mean_weight_autocorr(
    traj: &Trajectory,
    burn_in: usize,
    max_lag: usize,
    max_weights: usize,
) -> Result<Vec<f64>> {
    let t0 = burn_in;
    let t = traj.len();
    if t <= t0 + max_lag {
        return Err(CoreError::Degenerate(
            "trajectory too short for the requested lag window".into(),
        ));
    }
    let dim = traj.flat_weights(t0).len();
    let stride = (dim / max_weights.max(1)).max(1);
    let mut sum = vec![0.0; max_lag + 1];
    let mut used = 0usize;
    for k in (0..dim).step_by(stride) {
        let series: Vec<f64> = (t0..t).map(|ti| traj.flat_weights(ti)[k]).collect();
        match autocorr(&series, max_lag) {
            Ok(ac) => {
                for (s, v) in sum.iter_mut().zip(ac.iter()) {
                    *s += v;
                }
                used += 1;
            }
            Err(_) => continue, // frozen weight; skip
        }
    }
    if used == 0 {
        return Err(CoreError::Degenerate("all weight series are constant".into()));
    }
    Ok(sum.into_iter().map(|v| v / used as f64).collect())
}

/// First lag after which the autocorrelation stays below 1/e for the rest
/// of the window; infinity when it keeps returning (periodic series).
pub fn autocorr_decay_lag(ac: &[f64]) -> f64 {
    let thresh = std::f64::consts::E.recip();
    let first_drop = match ac.iter().position(|&v| v < thresh) {
        Some(k) => k,
        None => return f64::INFINITY,
    };
    // A periodic series climbs back above the threshold after the drop; a
    // mixing one does not.
    if ac[first_drop..].iter().any(|&v| v >= thresh) {
        return f64::INFINITY;
    }
    first_drop as f64
}

/// Projection of the flattened weight snapshots onto their top two
/// principal components. Returns (projections T x 2, explained-variance
/// ratios, rank_deficient flag).
pub fn pca2(traj: &Trajectory) -> Result<(Array2<f64>, [f64; 2], bool)> {
    let t = traj.len();
    if t < 3 {
        return Err(CoreError::Degenerate("pca2 needs >= 3 snapshots".into()));
    }
    let dim = traj.flat_weights(0).len();
    let mut x = Array2::zeros((t, dim));
    for ti in 0..t {
        x.row_mut(ti).assign(&traj.flat_weights(ti));
    }
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
    for mut row in x.rows_mut() {
        row -= &mean;
    }
    // Gram trick: eigenvectors of X X^T give the projections directly
    // (T is much smaller than the weight count).
    let gram = x.dot(&x.t());
    let (w, v) = crate::linalg::eigh(&gram)?;
    let total: f64 = w.iter().map(|x| x.max(0.0)).sum();
    let (l1, l2) = (w[t - 1].max(0.0), w[t - 2].max(0.0));
    let rank_deficient = total <= 0.0 || l2 / total.max(1e-300) < 1e-12;
    let mut proj = Array2::zeros((t, 2));
    if total > 0.0 {
        // Projection onto PC k is U_k * sqrt(lambda_k) (scores of the SVD).
        for ti in 0..t {
            proj[(ti, 0)] = v[(ti, t - 1)] * l1.sqrt();
            proj[(ti, 1)] = if rank_deficient {
                0.0
            } else {
                v[(ti, t - 2)] * l2.sqrt()
            };
        }
    }
    let ev = if total > 0.0 {
        [l1 / total, l2 / total]
    } else {
        [0.0, 0.0]
    };
    Ok((proj, ev, rank_deficient))
}

/// First recorded epoch whose test loss falls below `threshold`.
pub fn convergence_epochs(traj: &Trajectory, threshold: f64) -> Option<usize> {
    if threshold <= 0.0 {
        return None;
    }
    for ti in 0..traj.len() {
        if traj.test_loss[ti] < threshold {
            return Some(traj.epochs_recorded[ti]);
        }
    }
    None
}

/// Two-sided paired t-test; returns (t statistic, p value).
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(CoreError::Degenerate(format!(
            "paired samples need equal lengths >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(CoreError::Degenerate("zero variance of paired differences".into()));
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| CoreError::Degenerate(e.to_string()))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok((t, p))
}

/// Aggregate diagnosis of one trajectory.
pub fn classify_regime(traj: &Trajectory, thresholds: &RegimeThresholds) -> RegimeReport {
    if traj.diverged {
        return RegimeReport {
            q: f64::NAN,
            autocorr_decay: f64::NAN,
            regime: Regime::Diverged,
        };
    }
    let burn_in = default_burn_in(traj);
    let q = order_parameter_q(traj, burn_in).unwrap_or(0.0);
    let max_lag = ((traj.len() - burn_in) / 3).max(1).min(200);
    let decay = match mean_weight_autocorr(traj, burn_in, max_lag, 50) {
        Ok(ac) => autocorr_decay_lag(&ac),
        Err(_) => f64::INFINITY,
    };
    let initial = traj.test_loss.first().copied().unwrap_or(f64::NAN);
    let final_loss = traj.test_loss.last().copied().unwrap_or(f64::NAN);
    let regime = if final_loss < thresholds.loss_ratio * initial && q < thresholds.converged_q {
        Regime::Converged
    } else if q > thresholds.chaotic_q && decay.is_finite() {
        Regime::Chaotic
    } else if q > thresholds.converged_q {
        Regime::Oscillatory
    } else {
        Regime::Converged
    };
    RegimeReport {
        q,
        autocorr_decay: decay,
        regime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn traj_from_series(snapshots: Vec<Array1<f64>>, losses: Vec<f64>) -> Trajectory {
        let t = snapshots.len();
        Trajectory {
            epochs_recorded: (0..t).collect(),
            w1_snapshots: snapshots
                .iter()
                .map(|v| {
                    Array2::from_shape_vec((1, v.len()), v.to_vec()).unwrap()
                })
                .collect(),
            w2_snapshots: vec![Array1::zeros(0); t],
            train_loss: losses.clone(),
            test_loss: losses,
            diverged: false,
        }
    }

    #[test]
    fn q_zero_for_frozen_weights() {
        let w = array![1.0, -2.0, 0.5];
        let traj = traj_from_series(vec![w.clone(), w.clone(), w.clone(), w], vec![1.0; 4]);
        let q = order_parameter_q(&traj, 1).unwrap();
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn q_errors_on_identical_means() {
        // Every weight has the same temporal mean: denominator is zero.
        let a = array![1.0, 1.0];
        let b = array![-1.0, -1.0];
        let traj = traj_from_series(vec![a.clone(), b.clone(), a, b], vec![1.0; 4]);
        assert!(order_parameter_q(&traj, 0).is_err());
    }

    #[test]
    fn q_large_for_fluctuating_weights() {
        // Means spread slightly, fluctuations large: q >> 1.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let snaps: Vec<Array1<f64>> = (0..100)
            .map(|_| {
                Array1::from_shape_fn(10, |k| {
                    0.01 * k as f64 + rng.gen::<f64>() * 2.0 - 1.0
                })
            })
            .collect();
        let traj = traj_from_series(snaps, vec![1.0; 100]);
        let q = order_parameter_q(&traj, 50).unwrap();
        assert!(q > 10.0, "q = {q}");
    }

    #[test]
    fn q_invariant_under_weight_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let snaps: Vec<Array1<f64>> = (0..50)
            .map(|_| Array1::from_shape_fn(8, |_| rng.gen::<f64>()))
            .collect();
        let perm = [3usize, 1, 7, 0, 5, 2, 6, 4];
        let permuted: Vec<Array1<f64>> = snaps
            .iter()
            .map(|w| Array1::from_shape_fn(8, |k| w[perm[k]]))
            .collect();
        let q1 = order_parameter_q(&traj_from_series(snaps, vec![1.0; 50]), 10).unwrap();
        let q2 = order_parameter_q(&traj_from_series(permuted, vec![1.0; 50]), 10).unwrap();
        assert_abs_diff_eq!(q1, q2, epsilon = 1e-12);
    }

    #[test]
    fn autocorr_constant_series_errors() {
        assert!(autocorr(&[2.0; 50], 5).is_err());
    }

    #[test]
    fn autocorr_sinusoid() {
        let period = 50usize;
        let series: Vec<f64> = (0..2000)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / period as f64).sin())
            .collect();
        let ac = autocorr(&series, period).unwrap();
        assert_abs_diff_eq!(ac[0], 1.0, epsilon = 1e-15);
        assert!(ac[period] > 0.95, "full period: {}", ac[period]);
        assert!(ac[period / 2] < -0.95, "half period: {}", ac[period / 2]);
    }

    #[test]
    fn autocorr_white_noise_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let series: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>() - 0.5).collect();
        let ac = autocorr(&series, 20).unwrap();
        for (lag, v) in ac.iter().enumerate().skip(1) {
            assert!(v.abs() < 0.05, "lag {lag}: {v}");
        }
    }

    #[test]
    fn autocorr_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let series: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        for v in autocorr(&series, 100).unwrap() {
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn pca_line_and_circle() {
        // Line: all variance in one direction.
        let snaps: Vec<Array1<f64>> = (0..20)
            .map(|i| {
                let t = i as f64;
                array![t, 2.0 * t, -t, 0.5 * t]
            })
            .collect();
        let traj = traj_from_series(snaps, vec![1.0; 20]);
        let (_, ev, flagged) = pca2(&traj).unwrap();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(ev[1], 0.0, epsilon = 1e-10);
        assert!(flagged);

        // Circle in a 2-plane: explained variance (1/2, 1/2).
        let snaps: Vec<Array1<f64>> = (0..200)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 200.0;
                array![t.cos(), t.sin(), 0.0, 0.0]
            })
            .collect();
        let traj = traj_from_series(snaps, vec![1.0; 200]);
        let (proj, ev, flagged) = pca2(&traj).unwrap();
        assert!(!flagged);
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-6);
        // Projections preserve the circle radius.
        for ti in 0..200 {
            let r = (proj[(ti, 0)].powi(2) + proj[(ti, 1)].powi(2)).sqrt();
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn pca_preserves_pairwise_distances_in_plane() {
        // For data exactly in a 2-plane, projected distances equal the
        // original distances.
        let snaps: Vec<Array1<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 / 5.0;
                array![t.cos() + 0.3 * t, t.sin(), 2.0 * t.cos(), 0.0]
            })
            .collect();
        let orig = snaps.clone();
        let traj = traj_from_series(snaps, vec![1.0; 30]);
        let (proj, ev, _) = pca2(&traj).unwrap();
        if ev[0] + ev[1] > 0.999 {
            for a in 0..30 {
                for b in (a + 1)..30 {
                    let d0: f64 = orig[a]
                        .iter()
                        .zip(orig[b].iter())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    let dp = ((proj[(a, 0)] - proj[(b, 0)]).powi(2)
                        + (proj[(a, 1)] - proj[(b, 1)]).powi(2))
                    .sqrt();
                    assert_abs_diff_eq!(d0, dp, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn convergence_epoch_rules() {
        let traj = traj_from_series(
            (0..11).map(|i| array![i as f64]).collect(),
            (0..11).map(|i| 1.0 * 0.5f64.powi(i)).collect(),
        );
        // Starts below a huge threshold.
        assert_eq!(convergence_epochs(&traj, 10.0), Some(0));
        // Halving from 1.0: first below 1e-3 at epoch 10 (2^-10).
        assert_eq!(convergence_epochs(&traj, 1e-3), Some(10));
        // Never reached.
        assert_eq!(convergence_epochs(&traj, 1e-9), None);
        // Monotone in threshold.
        let e1 = convergence_epochs(&traj, 1e-1).unwrap();
        let e2 = convergence_epochs(&traj, 1e-2).unwrap();
        assert!(e1 <= e2);
    }

    #[test]
    fn ttest_identical_errors() {
        let a = [1.0, 2.0, 3.0];
        assert!(paired_ttest(&a, &a).is_err());
    }

    #[test]
    fn ttest_constant_shift_is_significant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..10).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 1.0 + 1e-6 * rng.gen::<f64>()).collect();
        let (t, p) = paired_ttest(&a, &b).unwrap();
        assert!(t < 0.0);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn ttest_calibration_under_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut below = 0usize;
        let trials = 1000;
        for _ in 0..trials {
            let a: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
            let (_, p) = paired_ttest(&a, &b).unwrap();
            if p < 0.05 {
                below += 1;
            }
        }
        let frac = below as f64 / trials as f64;
        assert!((frac - 0.05).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn classify_diverged_flag_dominates() {
        let mut traj = traj_from_series(vec![array![0.0]; 4], vec![1.0; 4]);
        traj.diverged = true;
        assert_eq!(classify_regime(&traj, &RegimeThresholds::default()).regime, Regime::Diverged);
    }

    #[test]
    fn classify_converged_series() {
        let snaps: Vec<Array1<f64>> = (0..40).map(|_| array![1.0, -0.5, 0.2]).collect();
        let mut losses = vec![1.0];
        for i in 1..40 {
            losses.push(1.0 * 0.5f64.powi(i));
        }
        let traj = traj_from_series(snaps, losses);
        let rep = classify_regime(&traj, &RegimeThresholds::default());
        assert_eq!(rep.regime, Regime::Converged);
    }

    #[test]
    fn classify_oscillatory_orbit() {
        let snaps: Vec<Array1<f64>> = (0..400)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 40.0;
                array![t.cos(), t.sin(), 0.5 * t.cos(), 1.0]
            })
            .collect();
        let traj = traj_from_series(snaps, vec![0.3; 400]);
        let rep = classify_regime(&traj, &RegimeThresholds::default());
        assert_eq!(rep.regime, Regime::Oscillatory);
        assert!(rep.q > 1e-3);
    }

    #[test]
    fn classify_chaotic_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let snaps: Vec<Array1<f64>> = (0..400)
            .map(|_| Array1::from_shape_fn(20, |k| 0.001 * k as f64 + rng.gen::<f64>()))
            .collect();
        let traj = traj_from_series(snaps, vec![0.5; 400]);
        let rep = classify_regime(&traj, &RegimeThresholds::default());
        assert_eq!(rep.regime, Regime::Chaotic);
        assert!(rep.autocorr_decay.is_finite());
    }
}
