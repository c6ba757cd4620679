//! Two-layer student-teacher setup: weight containers, sampling, forward
//! pass, loss, and renormalization.

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{CoreError, Result};

/// Standard deviation of the input distribution used in the simulations.
/// "N(0, 1/sqrt(2))" is read as a standard deviation (variance 1/2); see
/// `sample_inputs` for the override.
pub const INPUT_STD: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Linear,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative evaluated at preactivation `z`.
    #[inline]
    pub fn deriv(self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Input width M, hidden width N, hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub m: usize,
    pub n: usize,
    pub activation: Activation,
}

impl Architecture {
    pub fn new(m: usize, n: usize, activation: Activation) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(CoreError::InvalidConfig(format!(
                "widths must be positive, got m={m}, n={n}"
            )));
        }
        Ok(Self { m, n, activation })
    }

    /// Compression ratio c = M/N.
    pub fn compression_ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

/// Weights of one two-layer network: hidden `w1` (N x M) and readout `w2`
/// (length N, a 1 x N row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub w1: Array2<f64>,
    pub w2: Array1<f64>,
}

impl NetworkState {
    pub fn new(w1: Array2<f64>, w2: Array1<f64>) -> Result<Self> {
        if w1.nrows() != w2.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "w1 has {} rows but w2 has length {}",
                w1.nrows(),
                w2.len()
            )));
        }
        Ok(Self { w1, w2 })
    }

    pub fn zeros(arch: &Architecture) -> Self {
        Self {
            w1: Array2::zeros((arch.n, arch.m)),
            w2: Array1::zeros(arch.n),
        }
    }

    pub fn m(&self) -> usize {
        self.w1.ncols()
    }

    pub fn n(&self) -> usize {
        self.w1.nrows()
    }

    /// Effective linear map s = W2 W1 (length M).
    pub fn product(&self) -> Array1<f64> {
        self.w2.dot(&self.w1)
    }

    pub fn frobenius_w1(&self) -> f64 {
        self.w1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_w2(&self) -> f64 {
        self.w2.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().all(|v| v.is_finite()) && self.w2.iter().all(|v| v.is_finite())
    }

    /// Add i.i.d. uniform noise of amplitude `eps` to every weight.
    pub fn perturbed(&self, eps: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        out.w1.mapv_inplace(|v| v + eps * (rng.gen::<f64>() * 2.0 - 1.0));
        out.w2.mapv_inplace(|v| v + eps * (rng.gen::<f64>() * 2.0 - 1.0));
        out
    }

    /// JSON export: {m, n, activation, w1 row-major, w2}.
    pub fn to_json(&self, activation: Activation) -> String {
        let doc = NetworkStateJson {
            m: self.m(),
            n: self.n(),
            activation,
            w1: self.w1.iter().copied().collect(),
            w2: self.w2.to_vec(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<(Self, Activation)> {
        let doc: NetworkStateJson =
            serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
        if doc.w1.len() != doc.m * doc.n || doc.w2.len() != doc.n {
            return Err(CoreError::Parse("weight array lengths disagree with m, n".into()));
        }
        let w1 = Array2::from_shape_vec((doc.n, doc.m), doc.w1)
            .map_err(|e| CoreError::Parse(e.to_string()))?;
        Ok((Self::new(w1, Array1::from_vec(doc.w2))?, doc.activation))
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkStateJson {
    m: usize,
    n: usize,
    activation: Activation,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

/// Diagonal +-1 sign matrices D1 (length M) and D2 (length N) selecting
/// which presynaptic neurons follow the flipped rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub d1: Array1<f64>,
    pub d2: Array1<f64>,
}

impl SignPattern {
    pub fn new(d1: Array1<f64>, d2: Array1<f64>) -> Result<Self> {
        if d1.iter().chain(d2.iter()).any(|&v| v != 1.0 && v != -1.0) {
            return Err(CoreError::InvalidConfig("sign entries must be +-1".into()));
        }
        Ok(Self { d1, d2 })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            d1: Array1::ones(m),
            d2: Array1::ones(n),
        }
    }

    /// Flip `round(alpha_h * m)` hidden and `round(alpha_r * n)` readout
    /// signs at uniformly chosen positions.
    pub fn with_fractions(m: usize, n: usize, alpha_h: f64, alpha_r: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            d1: random_signs(m, alpha_h, &mut rng),
            d2: random_signs(n, alpha_r, &mut rng),
        }
    }

    /// Flip exactly one readout sign (index `k`).
    pub fn single_readout_flip(m: usize, n: usize, k: usize) -> Self {
        let mut s = Self::identity(m, n);
        s.d2[k] = -1.0;
        s
    }

    pub fn alpha_h(&self) -> f64 {
        self.d1.iter().filter(|&&v| v < 0.0).count() as f64 / self.d1.len() as f64
    }

    pub fn alpha_r(&self) -> f64 {
        self.d2.iter().filter(|&&v| v < 0.0).count() as f64 / self.d2.len() as f64
    }

    pub fn negated(&self) -> Self {
        Self {
            d1: self.d1.mapv(|v| -v),
            d2: self.d2.mapv(|v| -v),
        }
    }
}

fn random_signs(len: usize, alpha: f64, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let flips = (alpha * len as f64).round() as usize;
    let mut idx: Vec<usize> = (0..len).collect();
    // Fisher-Yates
    for i in (1..len).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let mut d = Array1::ones(len);
    for &i in idx.iter().take(flips.min(len)) {
        d[i] = -1.0;
    }
    d
}

/// Inputs as columns (M x P) with one scalar target per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Array1<f64>,
}

impl Dataset {
    pub fn new(inputs: Array2<f64>, targets: Array1<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        if inputs.ncols() != targets.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "{} input columns vs {} targets",
                inputs.ncols(),
                targets.len()
            )));
        }
        Ok(Self { inputs, targets })
    }

    pub fn p(&self) -> usize {
        self.targets.len()
    }

    /// Label the given inputs with a teacher network's outputs.
    pub fn from_teacher(
        teacher: &NetworkState,
        inputs: Array2<f64>,
        activation: Activation,
    ) -> Result<Self> {
        let targets = forward_batch(teacher, &inputs, activation)?;
        Self::new(inputs, targets)
    }

    /// CSV export with header `x_1..x_M,y`, one sample per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = self.inputs.nrows();
        let header: Vec<String> = (1..=m).map(|i| format!("x_{i}")).collect();
        writeln!(out, "{},y", header.join(","))?;
        for p in 0..self.p() {
            for i in 0..m {
                write!(out, "{:.17e},", self.inputs[(i, p)])?;
            }
            writeln!(out, "{:.17e}", self.targets[p])?;
        }
        Ok(())
    }

    pub fn to_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or(CoreError::EmptyDataset)?
            .map_err(CoreError::Io)?;
        let m = header.split(',').count() - 1;
        if m == 0 || !header.ends_with(",y") && header != "y" {
            return Err(CoreError::Parse(format!("unexpected CSV header: {header}")));
        }
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut targets = Vec::new();
        for line in lines {
            let line = line.map_err(CoreError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| CoreError::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if vals.len() != m + 1 {
                return Err(CoreError::Parse(format!(
                    "row has {} fields, expected {}",
                    vals.len(),
                    m + 1
                )));
            }
            cols.push(vals[..m].to_vec());
            targets.push(vals[m]);
        }
        if targets.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        let p = targets.len();
        let mut inputs = Array2::zeros((m, p));
        for (j, row) in cols.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                inputs[(i, j)] = v;
            }
        }
        Self::new(inputs, Array1::from_vec(targets))
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Teacher weights: (W1)_ij ~ N(0, 1/M), (W2)_i ~ N(0, 1/N), each entry
/// scaled by `scale`. `scale = 0` gives the zero teacher.
pub fn sample_teacher(arch: &Architecture, scale: f64, seed: u64) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = Normal::new(0.0, (1.0 / arch.m as f64).sqrt()).unwrap();
    let n2 = Normal::new(0.0, (1.0 / arch.n as f64).sqrt()).unwrap();
    let w1 = Array2::from_shape_fn((arch.n, arch.m), |_| scale * n1.sample(&mut rng));
    let w2 = Array1::from_shape_fn(arch.n, |_| scale * n2.sample(&mut rng));
    NetworkState { w1, w2 }
}

/// Students draw from the same distribution as teachers.
pub fn sample_student(arch: &Architecture, scale: f64, seed: u64) -> NetworkState {
    sample_teacher(arch, scale, seed)
}

/// Input matrix with i.i.d. N(0, std) entries. `std` defaults to
/// [`INPUT_STD`] at the call sites that follow the simulation protocol.
pub fn sample_inputs(m: usize, p: usize, std: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, std).unwrap();
    Array2::from_shape_fn((m, p), |_| dist.sample(&mut rng))
}

/// Forward pass on one input: h = phi(W1 x), yhat = W2 h.
pub fn forward(
    net: &NetworkState,
    x: ArrayView1<f64>,
    activation: Activation,
) -> Result<(Array1<f64>, f64)> {
    if x.len() != net.m() {
        return Err(CoreError::DimensionMismatch(format!(
            "input length {} vs M={}",
            x.len(),
            net.m()
        )));
    }
    let mut h = net.w1.dot(&x);
    h.mapv_inplace(|z| activation.apply(z));
    let yhat = net.w2.dot(&h);
    Ok((h, yhat))
}

/// Predictions for every column of `inputs`.
pub fn forward_batch(
    net: &NetworkState,
    inputs: &Array2<f64>,
    activation: Activation,
) -> Result<Array1<f64>> {
    if inputs.nrows() != net.m() {
        return Err(CoreError::DimensionMismatch(format!(
            "input rows {} vs M={}",
            inputs.nrows(),
            net.m()
        )));
    }
    let mut z = net.w1.dot(inputs);
    if activation != Activation::Linear {
        z.mapv_inplace(|v| activation.apply(v));
    }
    Ok(net.w2.dot(&z))
}

/// Quadratic loss (1/2P) sum_p (yhat_p - y_p)^2.
pub fn loss_mse(net: &NetworkState, data: &Dataset, activation: Activation) -> Result<f64> {
    if data.p() == 0 {
        return Err(CoreError::EmptyDataset);
    }
    let preds = forward_batch(net, &data.inputs, activation)?;
    let sum: f64 = preds
        .iter()
        .zip(data.targets.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / (2.0 * data.p() as f64))
}

/// Rescale each layer independently so its Frobenius norm matches the target.
pub fn renormalize(net: &NetworkState, target_f1: f64, target_f2: f64) -> Result<NetworkState> {
    if target_f1 <= 0.0 || target_f2 <= 0.0 {
        return Err(CoreError::InvalidConfig("target norms must be positive".into()));
    }
    let f1 = net.frobenius_w1();
    let f2 = net.frobenius_w2();
    if f1 == 0.0 || f2 == 0.0 {
        return Err(CoreError::ZeroNorm);
    }
    Ok(NetworkState {
        w1: &net.w1 * (target_f1 / f1),
        w2: &net.w2 * (target_f2 / f2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn arch(m: usize, n: usize) -> Architecture {
        Architecture::new(m, n, Activation::Linear).unwrap()
    }

    #[test]
    fn zero_scale_gives_zero_teacher() {
        let t = sample_teacher(&arch(5, 3), 0.0, 7);
        assert!(t.w1.iter().all(|&v| v == 0.0));
        assert!(t.w2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn teacher_frobenius_concentrates() {
        // E||W1||_F^2 = N*M*(1/M) = N; at M=N=10000 the sample value is
        // within 5%.
        let a = Architecture::new(1000, 1000, Activation::Linear).unwrap();
        let t = sample_teacher(&a, 1.0, 42);
        let sq = t.frobenius_w1().powi(2);
        assert!((sq - a.n as f64).abs() / (a.n as f64) < 0.05, "got {sq}");
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let a = arch(6, 4);
        assert_eq!(sample_teacher(&a, 1.3, 11), sample_teacher(&a, 1.3, 11));
        assert_eq!(sample_inputs(4, 9, INPUT_STD, 5), sample_inputs(4, 9, INPUT_STD, 5));
        assert_ne!(sample_teacher(&a, 1.3, 11), sample_teacher(&a, 1.3, 12));
    }

    #[test]
    fn input_variance_matches_std() {
        let x = sample_inputs(1, 1_000_000, INPUT_STD, 3);
        let mean = x.mean().unwrap();
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() - 1) as f64;
        assert!((var - 0.5).abs() / 0.5 < 0.02, "sample variance {var}");
    }

    #[test]
    fn single_column_inputs() {
        let x = sample_inputs(7, 1, INPUT_STD, 0);
        assert_eq!(x.dim(), (7, 1));
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn forward_zero_input() {
        let net = sample_teacher(&arch(4, 3), 1.0, 1);
        for act in [Activation::Linear, Activation::Tanh, Activation::Relu] {
            let (h, y) = forward(&net, Array1::zeros(4).view(), act).unwrap();
            assert!(h.iter().all(|&v| v == 0.0));
            assert_eq!(y, 0.0);
        }
    }

    #[test]
    fn forward_identity_composition() {
        // W1 = [I; 0], W2 = all ones on the copied rows -> yhat = sum(x).
        let mut w1 = Array2::zeros((3, 3));
        for i in 0..3 {
            w1[(i, i)] = 1.0;
        }
        let net = NetworkState::new(w1, Array1::ones(3)).unwrap();
        let x = array![1.0, -2.0, 0.5];
        let (_, y) = forward(&net, x.view(), Activation::Linear).unwrap();
        assert_abs_diff_eq!(y, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn tanh_saturates() {
        let w1 = Array2::from_elem((2, 3), 50.0);
        let net = NetworkState::new(w1, Array1::ones(2)).unwrap();
        let (h, _) = forward(&net, array![1.0, 1.0, 1.0].view(), Activation::Tanh).unwrap();
        for &v in h.iter() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_dimension_mismatch() {
        let net = sample_teacher(&arch(4, 3), 1.0, 1);
        assert!(forward(&net, Array1::zeros(5).view(), Activation::Linear).is_err());
    }

    #[test]
    fn loss_zero_for_matching_student() {
        let a = arch(4, 3);
        let t = sample_teacher(&a, 1.0, 2);
        let data =
            Dataset::from_teacher(&t, sample_inputs(4, 20, INPUT_STD, 3), Activation::Linear)
                .unwrap();
        assert_abs_diff_eq!(loss_mse(&t, &data, Activation::Linear).unwrap(), 0.0, epsilon = 1e-28);
    }

    #[test]
    fn loss_constant_error() {
        // Student = teacher shifted so e_p = k for all p: loss = k^2/2.
        // Construct via targets shifted by k on a zero network.
        let net = NetworkState::zeros(&arch(2, 2));
        let data = Dataset::new(Array2::zeros((2, 5)), Array1::from_elem(5, 3.0)).unwrap();
        assert_abs_diff_eq!(
            loss_mse(&net, &data, Activation::Linear).unwrap(),
            4.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn loss_matches_scalar_loop_oracle() {
        let a = arch(3, 3);
        let student = sample_teacher(&a, 0.7, 10);
        let teacher = sample_teacher(&a, 1.0, 11);
        let data =
            Dataset::from_teacher(&teacher, sample_inputs(3, 5, INPUT_STD, 12), Activation::Linear)
                .unwrap();
        // Independent scalar-loop oracle.
        let mut acc = 0.0;
        for p in 0..5 {
            let mut yhat = 0.0;
            for i in 0..3 {
                let mut h = 0.0;
                for j in 0..3 {
                    h += student.w1[(i, j)] * data.inputs[(j, p)];
                }
                yhat += student.w2[i] * h;
            }
            let e = yhat - data.targets[p];
            acc += e * e;
        }
        acc /= 2.0 * 5.0;
        let got = loss_mse(&student, &data, Activation::Linear).unwrap();
        assert_abs_diff_eq!(got, acc, epsilon = 1e-12);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        assert!(Dataset::new(Array2::zeros((2, 0)), Array1::zeros(0)).is_err());
    }

    #[test]
    fn renormalize_identity_and_inverse() {
        let net = sample_teacher(&arch(4, 3), 1.0, 9);
        let (f1, f2) = (net.frobenius_w1(), net.frobenius_w2());
        let same = renormalize(&net, f1, f2).unwrap();
        assert_abs_diff_eq!(same.frobenius_w1(), f1, epsilon = 1e-12);

        let doubled = NetworkState {
            w1: &net.w1 * 2.0,
            w2: net.w2.clone(),
        };
        let back = renormalize(&doubled, f1, f2).unwrap();
        for (a, b) in back.w1.iter().zip(net.w1.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn renormalize_hits_targets() {
        let net = sample_teacher(&arch(5, 4), 2.3, 17);
        let out = renormalize(&net, 1.7, 0.9).unwrap();
        assert_abs_diff_eq!(out.frobenius_w1(), 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(out.frobenius_w2(), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn renormalize_zero_layer_errors() {
        let net = NetworkState::zeros(&arch(3, 2));
        assert!(matches!(renormalize(&net, 1.0, 1.0), Err(CoreError::ZeroNorm)));
    }

    #[test]
    fn renormalize_is_idempotent() {
        let net = sample_teacher(&arch(5, 4), 1.1, 23);
        let once = renormalize(&net, 2.0, 3.0).unwrap();
        let twice = renormalize(&once, 2.0, 3.0).unwrap();
        for (a, b) in once.w1.iter().zip(twice.w1.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn forward_linear_is_linear() {
        let net = sample_teacher(&arch(4, 3), 1.0, 31);
        let x1 = sample_inputs(4, 1, 1.0, 1).column(0).to_owned();
        let x2 = sample_inputs(4, 1, 1.0, 2).column(0).to_owned();
        let (a, b) = (0.7, -1.3);
        let combo = &x1 * a + &x2 * b;
        let (_, y) = forward(&net, combo.view(), Activation::Linear).unwrap();
        let (_, y1) = forward(&net, x1.view(), Activation::Linear).unwrap();
        let (_, y2) = forward(&net, x2.view(), Activation::Linear).unwrap();
        assert_abs_diff_eq!(y, a * y1 + b * y2, epsilon = 1e-12);
    }

    #[test]
    fn sign_pattern_fractions() {
        let s = SignPattern::with_fractions(10, 5, 0.3, 0.4, 99);
        assert_abs_diff_eq!(s.alpha_h(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.alpha_r(), 0.4, epsilon = 1e-15);
        let neg = s.negated();
        assert_abs_diff_eq!(neg.alpha_h(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn dataset_csv_roundtrip() {
        let t = sample_teacher(&arch(3, 2), 1.0, 4);
        let data =
            Dataset::from_teacher(&t, sample_inputs(3, 7, INPUT_STD, 5), Activation::Linear)
                .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(std::io::BufReader::new(&buf[..])).unwrap();
        for (a, b) in data.inputs.iter().zip(back.inputs.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn network_json_roundtrip() {
        let t = sample_teacher(&arch(3, 2), 1.0, 4);
        let text = t.to_json(Activation::Tanh);
        let (back, act) = NetworkState::from_json(&text).unwrap();
        assert_eq!(act, Activation::Tanh);
        assert_eq!(t, back);
    }
}
