//! Executable non-gradient audits: does a plasticity rule's flow admit a
//! scalar potential? A gradient flow has a symmetric Jacobian at every
//! point, so a nonzero asymmetry residual at any sampled point rules a
//! potential out.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::dynamics::flow_rhs;
use crate::error::{CoreError, Result};
use crate::net::SignPattern;

/// Relative asymmetry below this counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-6;

/// Pehlevan-style population sizes: feedforward inputs, excitatory
/// principal cells, inhibitory interneurons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Blocks {
    pub nf: usize,
    pub ne: usize,
    pub ni: usize,
}

/// The plasticity rules audited for a potential.
#[derive(Debug, Clone)]
pub enum RuleSpec {
    /// Sign-flipped student-teacher flow on (W1, W2).
    CurlDescent {
        signs: SignPattern,
        s: Array1<f64>,
    },
    /// Hebbian/anti-Hebbian recurrent rule on symmetric W:
    /// F(W) = (Sigma + Sigma W + W Sigma) (.) mask.
    HebbAntiHebb {
        mask: Array2<f64>,
        sigma: Array2<f64>,
    },
    /// Hebbian plasticity with excitatory/inhibitory identities on
    /// symmetric W: F(W) = Sigma + W D Sigma + Sigma D W^T, plus an
    /// optional decay -gamma W (a gradient term, so it never changes the
    /// verdict).
    ExcInh {
        d: Array1<f64>,
        sigma: Array2<f64>,
        gamma: f64,
    },
    /// Block-sparse similarity-matching network with the interneuron
    /// feedback weights tied to the transposed projection weights
    /// (C = B^T) and anti-Hebbian interneuron plasticity.
    PehlevanBlocks {
        blocks: Blocks,
        sigma_ff: Array2<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    /// Max relative asymmetry |J - J^T| / max|J| over the sampled points.
    pub max_residual: f64,
    pub admits_potential: bool,
    pub tol: f64,
}

impl SymmetryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// F(W) = (Sigma + Sigma W + W Sigma) (.) mask.
pub fn hah_flow(w: &Array2<f64>, sigma: &Array2<f64>, mask: &Array2<f64>) -> Result<Array2<f64>> {
    let n = w.nrows();
    if w.ncols() != n || sigma.dim() != (n, n) || mask.dim() != (n, n) {
        return Err(CoreError::DimensionMismatch(
            "hah_flow needs square W, Sigma, mask of one size".into(),
        ));
    }
    let mut f = sigma + &sigma.dot(w) + &w.dot(sigma);
    f.zip_mut_with(mask, |v, m| *v *= m);
    Ok(f)
}

/// F(W) = Sigma + W D Sigma + Sigma D W^T - gamma W.
pub fn ei_flow(
    w: &Array2<f64>,
    sigma: &Array2<f64>,
    d: &Array1<f64>,
    gamma: f64,
) -> Result<Array2<f64>> {
    let n = w.nrows();
    if w.ncols() != n || sigma.dim() != (n, n) || d.len() != n {
        return Err(CoreError::DimensionMismatch(
            "ei_flow needs square W, Sigma and a matching sign vector".into(),
        ));
    }
    // W D Sigma: scale columns of W by d before the product.
    let mut wd = w.clone();
    for j in 0..n {
        if d[j] < 0.0 {
            wd.column_mut(j).mapv_inplace(|v| -v);
        }
    }
    let mut sd = sigma.clone();
    for j in 0..n {
        if d[j] < 0.0 {
            sd.column_mut(j).mapv_inplace(|v| -v);
        }
    }
    let mut f = sigma + &wd.dot(sigma) + &sd.dot(&w.t());
    f.scaled_add(-gamma, w);
    Ok(f)
}

/// Tied flow of the block network: A (ne x nf) feedforward weights,
/// B (ni x ne) projections onto interneurons with feedback -B^T.
/// dA = A Sigma - B^T B A Sigma (Hebbian + inhibitory feedback),
/// dB = -B A Sigma A^T (anti-Hebbian interneuron plasticity).
pub fn pehlevan_flow(
    a: &Array2<f64>,
    b: &Array2<f64>,
    sigma_ff: &Array2<f64>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let (ne, nf) = a.dim();
    if b.ncols() != ne || sigma_ff.dim() != (nf, nf) {
        return Err(CoreError::DimensionMismatch(
            "pehlevan_flow block shapes disagree".into(),
        ));
    }
    let asig = a.dot(sigma_ff);
    let da = &asig - &b.t().dot(&b.dot(&asig));
    let db = -b.dot(&asig.dot(&a.t()));
    Ok((da, db))
}

/// One term W^k Sigma (W^T)^l of the activity-outer-product expansion,
/// over the full unit ordering [inputs; excitatory; interneurons].
fn expansion_term(w: &Array2<f64>, sigma_full: &Array2<f64>, k: usize, l: usize) -> Array2<f64> {
    let mut left = sigma_full.clone();
    for _ in 0..k {
        left = w.dot(&left);
    }
    let wt = w.t().to_owned();
    for _ in 0..l {
        left = left.dot(&wt);
    }
    left
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskedTerm {
    /// Orders (k, l) of the term W^k Sigma (W^T)^l.
    pub order: (usize, usize),
    /// Frobenius norm of the entries on existing synapses.
    pub kept_norm: f64,
    /// Frobenius norm of the entries the block structure nullifies.
    pub nullified_norm: f64,
}

/// Expansion of the Hebbian update y y^T to the requested total order,
/// split per term into the part landing on existing synapses and the part
/// the block-sparse connectivity nullifies. Also returns the summed kept
/// update (full-matrix layout) for bookkeeping checks.
pub fn pehlevan_masked_flow(
    blocks: Blocks,
    a: &Array2<f64>,
    b: &Array2<f64>,
    c: &Array2<f64>,
    sigma_ff: &Array2<f64>,
    order: usize,
) -> Result<(Vec<MaskedTerm>, Array2<f64>, Array2<f64>)> {
    let Blocks { nf, ne, ni } = blocks;
    if order > 3 {
        return Err(CoreError::InvalidConfig("expansion order must be <= 3".into()));
    }
    if a.dim() != (ne, nf) || b.dim() != (ni, ne) || c.dim() != (ne, ni)
        || sigma_ff.dim() != (nf, nf)
    {
        return Err(CoreError::DimensionMismatch("block shapes disagree".into()));
    }
    let ntot = nf + ne + ni;
    // Unit ordering: inputs [0, nf), excitatory [nf, nf+ne), interneurons
    // [nf+ne, ntot). Feedback from interneurons is inhibitory: -C.
    let mut w = Array2::zeros((ntot, ntot));
    for i in 0..ne {
        for j in 0..nf {
            w[(nf + i, j)] = a[(i, j)];
        }
    }
    for i in 0..ni {
        for j in 0..ne {
            w[(nf + ne + i, nf + j)] = b[(i, j)];
        }
    }
    for i in 0..ne {
        for j in 0..ni {
            w[(nf + i, nf + ne + j)] = -c[(i, j)];
        }
    }
    let mut sigma_full = Array2::zeros((ntot, ntot));
    for i in 0..nf {
        for j in 0..nf {
            sigma_full[(i, j)] = sigma_ff[(i, j)];
        }
    }
    let exists = |i: usize, j: usize| -> bool {
        (i >= nf && i < nf + ne && j < nf)                         // A
            || (i >= nf + ne && j >= nf && j < nf + ne)            // B
            || (i >= nf && i < nf + ne && j >= nf + ne)            // C
    };

    let mut terms = Vec::new();
    let mut kept_total = Array2::zeros((ntot, ntot));
    let mut full_total = Array2::zeros((ntot, ntot));
    for k in 0..=order {
        for l in 0..=(order - k) {
            let term = expansion_term(&w, &sigma_full, k, l);
            let mut kept_norm = 0.0f64;
            let mut nullified_norm = 0.0f64;
            for i in 0..ntot {
                for j in 0..ntot {
                    let v = term[(i, j)];
                    if exists(i, j) {
                        kept_norm += v * v;
                        kept_total[(i, j)] += v;
                    } else {
                        nullified_norm += v * v;
                    }
                    full_total[(i, j)] += v;
                }
            }
            terms.push(MaskedTerm {
                order: (k, l),
                kept_norm: kept_norm.sqrt(),
                nullified_norm: nullified_norm.sqrt(),
            });
        }
    }
    Ok((terms, kept_total, full_total))
}

/// Orthonormal basis of symmetric N x N matrices: E_ii and
/// (E_kl + E_lk) / sqrt(2).
fn symmetric_basis(n: usize) -> Vec<Array2<f64>> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        let mut e = Array2::zeros((n, n));
        e[(i, i)] = 1.0;
        basis.push(e);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = Array2::zeros((n, n));
            e[(i, j)] = h;
            e[(j, i)] = h;
            basis.push(e);
        }
    }
    basis
}

/// Finite-difference Jacobian of a symmetric-matrix flow in the
/// orthonormal symmetric basis; plain coordinates double-count the
/// off-diagonal directions and fake an asymmetry.
fn jacobian_symmetric<F>(flow: F, w: &Array2<f64>, h: f64) -> Result<Array2<f64>>
where
    F: Fn(&Array2<f64>) -> Result<Array2<f64>>,
{
    let basis = symmetric_basis(w.nrows());
    let dim = basis.len();
    let mut j = Array2::zeros((dim, dim));
    for (bcol, eb) in basis.iter().enumerate() {
        let fp = flow(&(w + &(eb * h)))?;
        let fm = flow(&(w - &(eb * h)))?;
        let df = (&fp - &fm) / (2.0 * h);
        for (arow, ea) in basis.iter().enumerate() {
            j[(arow, bcol)] = df.iter().zip(ea.iter()).map(|(x, y)| x * y).sum();
        }
    }
    Ok(j)
}

/// Finite-difference Jacobian of a packed-vector flow.
fn jacobian_packed<F>(flow: F, p: &Array1<f64>, h: f64) -> Result<Array2<f64>>
where
    F: Fn(&Array1<f64>) -> Result<Array1<f64>>,
{
    let dim = p.len();
    let mut j = Array2::zeros((dim, dim));
    for col in 0..dim {
        let mut pp = p.clone();
        pp[col] += h;
        let mut pm = p.clone();
        pm[col] -= h;
        let fp = flow(&pp)?;
        let fm = flow(&pm)?;
        for row in 0..dim {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn relative_asymmetry(j: &Array2<f64>) -> f64 {
    let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let n = j.nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            worst = worst.max((j[(a, b)] - j[(b, a)]).abs());
        }
    }
    worst / scale
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let a = random_matrix(rng, n, n);
    (&a + &a.t()) / 2.0
}

/// Max relative Jacobian asymmetry of the rule's flow over `n_points`
/// random evaluation points.
pub fn symmetry_residual(rule: &RuleSpec, n_points: usize, seed: u64) -> Result<SymmetryReport> {
    if n_points == 0 {
        return Err(CoreError::InvalidConfig("n_points must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..n_points {
        let j = match rule {
            RuleSpec::CurlDescent { signs, s } => {
                let m = signs.d1.len();
                let n = signs.d2.len();
                let p0 = Array1::from_shape_fn(n * m + n, |_| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    v
                });
                let flow = |p: &Array1<f64>| -> Result<Array1<f64>> {
                    let w1 = Array2::from_shape_fn((n, m), |(i, jj)| p[i * m + jj]);
                    let w2 = Array1::from_shape_fn(n, |i| p[n * m + i]);
                    let (d1, d2) = flow_rhs(&w1, &w2, s, signs)?;
                    let mut out = Vec::with_capacity(n * m + n);
                    out.extend(d1.iter().copied());
                    out.extend(d2.iter().copied());
                    Ok(Array1::from_vec(out))
                };
                jacobian_packed(flow, &p0, h)?
            }
            RuleSpec::HebbAntiHebb { mask, sigma } => {
                let w0 = random_symmetric(&mut rng, mask.nrows());
                jacobian_symmetric(|w| hah_flow(w, sigma, mask), &w0, h)?
            }
            RuleSpec::ExcInh { d, sigma, gamma } => {
                let w0 = random_symmetric(&mut rng, d.len());
                jacobian_symmetric(|w| ei_flow(w, sigma, d, *gamma), &w0, h)?
            }
            RuleSpec::PehlevanBlocks { blocks, sigma_ff } => {
                let Blocks { nf, ne, ni } = *blocks;
                let p0 = Array1::from_shape_fn(ne * nf + ni * ne, |_| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    v
                });
                let flow = |p: &Array1<f64>| -> Result<Array1<f64>> {
                    let a = Array2::from_shape_fn((ne, nf), |(i, jj)| p[i * nf + jj]);
                    let b =
                        Array2::from_shape_fn((ni, ne), |(i, jj)| p[ne * nf + i * ne + jj]);
                    let (da, db) = pehlevan_flow(&a, &b, sigma_ff)?;
                    let mut out = Vec::with_capacity(p.len());
                    out.extend(da.iter().copied());
                    out.extend(db.iter().copied());
                    Ok(Array1::from_vec(out))
                };
                jacobian_packed(flow, &p0, h)?
            }
        };
        worst = worst.max(relative_asymmetry(&j));
    }
    Ok(SymmetryReport {
        max_residual: worst,
        admits_potential: worst < SYMMETRY_TOL,
        tol: SYMMETRY_TOL,
    })
}

/// Rank-1 input covariance f f^T from a seeded Gaussian f; the degenerate
/// case the structural proofs hinge on.
pub fn rank1_sigma(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let f = Array1::from_shape_fn(n, |_| norm.sample(&mut rng));
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = f[i] * f[j];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn generic_sigma(n: usize, seed: u64) -> Array2<f64> {
        // PSD with full rank: G G^T + I.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_matrix(&mut rng, n, n);
        let mut s = g.dot(&g.t());
        for i in 0..n {
            s[(i, i)] += 1.0;
        }
        s
    }

    #[test]
    fn curl_identity_signs_admits_potential() {
        let rule = RuleSpec::CurlDescent {
            signs: SignPattern::identity(3, 2),
            s: array![0.7, -0.3, 1.1],
        };
        let rep = symmetry_residual(&rule, 3, 1).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn curl_single_readout_flip_is_non_gradient() {
        let rule = RuleSpec::CurlDescent {
            signs: SignPattern::single_readout_flip(3, 2, 0),
            s: array![0.7, -0.3, 1.1],
        };
        let rep = symmetry_residual(&rule, 3, 2).unwrap();
        assert!(!rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn curl_all_negative_signs_admits_potential() {
        // D1 = D2 = -I is gradient ascent: still a potential flow.
        let rule = RuleSpec::CurlDescent {
            signs: SignPattern::identity(3, 2).negated(),
            s: array![0.7, -0.3, 1.1],
        };
        let rep = symmetry_residual(&rule, 3, 3).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn hah_zero_weights_value() {
        let sigma = generic_sigma(3, 4);
        let mask = Array2::from_elem((3, 3), 1.0);
        let f = hah_flow(&Array2::zeros((3, 3)), &sigma, &mask).unwrap();
        for (a, b) in f.iter().zip(sigma.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn hah_identity_sigma_all_ones_mask() {
        let mut w = Array2::zeros((3, 3));
        w[(0, 1)] = 0.5;
        w[(1, 0)] = 0.5;
        let sigma = Array2::eye(3);
        let mask = Array2::from_elem((3, 3), 1.0);
        let f = hah_flow(&w, &sigma, &mask).unwrap();
        // I + W + W^T on symmetric W.
        let expect = &Array2::eye(3) + &w + &w.t();
        for (a, b) in f.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn hah_all_ones_mask_is_gradient() {
        let rule = RuleSpec::HebbAntiHebb {
            mask: Array2::from_elem((4, 4), 1.0),
            sigma: generic_sigma(4, 5),
        };
        let rep = symmetry_residual(&rule, 3, 6).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn hah_mixed_mask_rank1_sigma_is_non_gradient() {
        // Symmetric mixed mask: one anti-Hebbian neuron.
        let mut mask = Array2::from_elem((4, 4), 1.0);
        for k in 1..4 {
            mask[(0, k)] = -1.0;
            mask[(k, 0)] = -1.0;
        }
        let rule = RuleSpec::HebbAntiHebb {
            mask,
            sigma: rank1_sigma(4, 7),
        };
        let rep = symmetry_residual(&rule, 3, 8).unwrap();
        assert!(!rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn hah_mixed_mask_single_driven_neuron_is_gradient() {
        // Rank-1 input hitting only the first neuron: the cross terms the
        // mixed mask corrupts vanish.
        let mut mask = Array2::from_elem((4, 4), 1.0);
        for k in 1..4 {
            mask[(0, k)] = -1.0;
            mask[(k, 0)] = -1.0;
        }
        let mut sigma = Array2::zeros((4, 4));
        sigma[(0, 0)] = 1.7;
        let rule = RuleSpec::HebbAntiHebb { mask, sigma };
        let rep = symmetry_residual(&rule, 3, 9).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn ei_all_excitatory_is_gradient() {
        let rule = RuleSpec::ExcInh {
            d: Array1::ones(4),
            sigma: rank1_sigma(4, 10),
            gamma: 0.0,
        };
        let rep = symmetry_residual(&rule, 3, 11).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn ei_mixed_generic_sigma_is_non_gradient() {
        let rule = RuleSpec::ExcInh {
            d: array![1.0, 1.0, -1.0, -1.0],
            sigma: rank1_sigma(4, 12),
            gamma: 0.0,
        };
        let rep = symmetry_residual(&rule, 3, 13).unwrap();
        assert!(!rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn ei_zero_inhibitory_input_is_gradient() {
        // Inhibitory neurons (d = -1) receive no external input: zero their
        // rows/columns of Sigma.
        let mut sigma = rank1_sigma(4, 14);
        for k in 2..4 {
            for j in 0..4 {
                sigma[(k, j)] = 0.0;
                sigma[(j, k)] = 0.0;
            }
        }
        let rule = RuleSpec::ExcInh {
            d: array![1.0, 1.0, -1.0, -1.0],
            sigma,
            gamma: 0.0,
        };
        let rep = symmetry_residual(&rule, 3, 15).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn ei_decay_never_changes_verdict() {
        let sigma = rank1_sigma(4, 16);
        for gamma in [0.0, 0.5] {
            let bad = RuleSpec::ExcInh {
                d: array![1.0, -1.0, 1.0, -1.0],
                sigma: sigma.clone(),
                gamma,
            };
            assert!(!symmetry_residual(&bad, 2, 17).unwrap().admits_potential);
            let good = RuleSpec::ExcInh {
                d: Array1::ones(4),
                sigma: sigma.clone(),
                gamma,
            };
            assert!(symmetry_residual(&good, 2, 18).unwrap().admits_potential);
        }
    }

    #[test]
    fn ei_negated_d_formula() {
        // F_{-D}(W) = Sigma - W Sigma - Sigma W^T.
        let sigma = generic_sigma(3, 19);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let w = random_symmetric(&mut rng, 3);
        let f = ei_flow(&w, &sigma, &Array1::from_elem(3, -1.0), 0.0).unwrap();
        let expect = &sigma - &w.dot(&sigma) - &sigma.dot(&w.t());
        for (a, b) in f.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn pehlevan_tied_flow_is_gradient() {
        let rule = RuleSpec::PehlevanBlocks {
            blocks: Blocks { nf: 3, ne: 3, ni: 2 },
            sigma_ff: rank1_sigma(3, 21),
        };
        let rep = symmetry_residual(&rule, 3, 22).unwrap();
        assert!(rep.admits_potential, "residual {}", rep.max_residual);
    }

    #[test]
    fn pehlevan_masked_terms() {
        let blocks = Blocks { nf: 3, ne: 3, ni: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_matrix(&mut rng, 3, 3);
        let b = random_matrix(&mut rng, 2, 3);
        let c = b.t().to_owned();
        let sigma = rank1_sigma(3, 24);
        let (terms, _, _) =
            pehlevan_masked_flow(blocks, &a, &b, &c, &sigma, 3).unwrap();
        for t in &terms {
            match t.order {
                // Order 0 and both order-2 splittings land entirely off the
                // existing synapses.
                (0, 0) | (2, 0) | (0, 2) | (1, 1) => {
                    assert!(t.kept_norm < 1e-12, "order {:?} kept {}", t.order, t.kept_norm)
                }
                // First order: W Sigma survives on the feedforward block.
                (1, 0) => {
                    assert!(t.kept_norm > 1e-6);
                    assert!(t.nullified_norm < 1e-12);
                    // Its kept part is exactly A Sigma.
                }
                (0, 1) => assert!(t.kept_norm < 1e-12),
                _ => {}
            }
        }
        // Third order keeps the interneuron updates.
        let third_kept: f64 = terms
            .iter()
            .filter(|t| t.order.0 + t.order.1 == 3)
            .map(|t| t.kept_norm)
            .sum();
        assert!(third_kept > 1e-6);
    }

    #[test]
    fn pehlevan_order1_kept_is_a_sigma() {
        let blocks = Blocks { nf: 2, ne: 2, ni: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 1, 2);
        let c = b.t().to_owned();
        let sigma = generic_sigma(2, 26);
        let (_, kept, _) = pehlevan_masked_flow(blocks, &a, &b, &c, &sigma, 1).unwrap();
        let asig = a.dot(&sigma);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(kept[(2 + i, j)], asig[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pehlevan_bookkeeping_sums() {
        // Kept + nullified recompose the full expansion: check via norms of
        // the totals (kept entries match the full matrix on the synapse
        // blocks, zero elsewhere).
        let blocks = Blocks { nf: 2, ne: 3, ni: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let a = random_matrix(&mut rng, 3, 2);
        let b = random_matrix(&mut rng, 2, 3);
        let c = b.t().to_owned();
        let sigma = generic_sigma(2, 28);
        let (_, kept, full) = pehlevan_masked_flow(blocks, &a, &b, &c, &sigma, 3).unwrap();
        let (nf, ne) = (2usize, 3usize);
        for i in 0..7 {
            for j in 0..7 {
                let on_synapse = (i >= nf && i < nf + ne && j < nf)
                    || (i >= nf + ne && j >= nf && j < nf + ne)
                    || (i >= nf && i < nf + ne && j >= nf + ne);
                if on_synapse {
                    assert_abs_diff_eq!(kept[(i, j)], full[(i, j)], epsilon = 1e-12);
                } else {
                    assert_abs_diff_eq!(kept[(i, j)], 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn explicit_gradient_flow_calibrates_the_oracle() {
        // Flow built as the finite-difference gradient of a scalar function
        // of symmetric W: phi(W) = Tr(W Sigma W) + Tr(Sigma W).
        let sigma = generic_sigma(3, 29);
        let grad_flow = |w: &Array2<f64>| -> Result<Array2<f64>> {
            let basis = symmetric_basis(3);
            let phi = |w: &Array2<f64>| -> f64 {
                w.dot(&sigma).dot(w).diag().sum() + sigma.dot(w).diag().sum()
            };
            let h = 1e-5;
            let mut g = Array2::zeros((3, 3));
            for e in &basis {
                let d = (phi(&(w + &(e * h))) - phi(&(w - &(e * h)))) / (2.0 * h);
                g.scaled_add(d, e);
            }
            Ok(g)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let w0 = random_symmetric(&mut rng, 3);
        let j = jacobian_symmetric(grad_flow, &w0, 1e-4).unwrap();
        assert!(relative_asymmetry(&j) < 1e-5, "residual {}", relative_asymmetry(&j));
    }
}
