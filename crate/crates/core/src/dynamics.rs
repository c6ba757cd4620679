//! Discrete-epoch training with sign-flipped updates and continuous-time
//! population-flow integration.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{CoreError, Result};
use crate::net::{loss_mse, renormalize, Activation, Dataset, NetworkState, SignPattern};

/// Weights larger than this mark a run as diverged; keeps chaotic-regime
/// sweeps from aborting on overflow.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub renormalize_each_epoch: bool,
    /// Snapshot stride; bounds memory on long runs.
    pub record_every: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(CoreError::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(CoreError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.record_every == 0 {
            return Err(CoreError::InvalidConfig("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Recorded weight and loss time series of one run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub epochs_recorded: Vec<usize>,
    pub w1_snapshots: Vec<Array2<f64>>,
    pub w2_snapshots: Vec<Array1<f64>>,
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    pub diverged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.epochs_recorded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs_recorded.is_empty()
    }

    fn push(&mut self, epoch: usize, net: &NetworkState, train: f64, test: f64) {
        self.epochs_recorded.push(epoch);
        self.w1_snapshots.push(net.w1.clone());
        self.w2_snapshots.push(net.w2.clone());
        self.train_loss.push(train);
        self.test_loss.push(test);
    }

    /// Flatten snapshot `t` into one weight vector (vec(W1) then W2).
    pub fn flat_weights(&self, t: usize) -> Array1<f64> {
        let w1 = &self.w1_snapshots[t];
        let w2 = &self.w2_snapshots[t];
        let mut v = Vec::with_capacity(w1.len() + w2.len());
        v.extend(w1.iter().copied());
        v.extend(w2.iter().copied());
        Array1::from_vec(v)
    }

    /// CSV export: epoch, train_loss, test_loss.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,train_loss,test_loss")?;
        for t in 0..self.len() {
            writeln!(
                out,
                "{},{:e},{:e}",
                self.epochs_recorded[t], self.train_loss[t], self.test_loss[t]
            )?;
        }
        Ok(())
    }
}

fn state_ok(net: &NetworkState) -> bool {
    net.w1
        .iter()
        .chain(net.w2.iter())
        .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_THRESHOLD)
}

/// Batch-averaged negative gradient of the quadratic loss. Returned updates
/// are the steps taken per unit learning rate.
pub fn grad_step(
    net: &NetworkState,
    data: &Dataset,
    activation: Activation,
) -> Result<(Array2<f64>, Array1<f64>)> {
    curl_step(
        net,
        data,
        activation,
        &SignPattern::identity(net.m(), net.n()),
    )
}

/// Gradient updates with column j of dW1 scaled by d1_j and entry i of dW2
/// scaled by d2_i.
pub fn curl_step(
    net: &NetworkState,
    data: &Dataset,
    activation: Activation,
    signs: &SignPattern,
) -> Result<(Array2<f64>, Array1<f64>)> {
    let (m, n, p) = (net.m(), net.n(), data.p());
    if data.inputs.nrows() != m {
        return Err(CoreError::DimensionMismatch(format!(
            "input rows {} vs M={m}",
            data.inputs.nrows()
        )));
    }
    if signs.d1.len() != m || signs.d2.len() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "sign pattern ({}, {}) vs architecture ({m}, {n})",
            signs.d1.len(),
            signs.d2.len()
        )));
    }
    let z = net.w1.dot(&data.inputs);
    let h = if activation == Activation::Linear {
        z.clone()
    } else {
        z.mapv(|v| activation.apply(v))
    };
    let e = net.w2.dot(&h) - &data.targets;
    let inv_p = 1.0 / p as f64;

    // Backpropagated hidden-layer error: G_{ip} = w2_i phi'(z_{ip}) e_p.
    let mut g = Array2::zeros((n, p));
    for i in 0..n {
        let w2i = net.w2[i];
        for q in 0..p {
            g[(i, q)] = w2i * activation.deriv(z[(i, q)]) * e[q];
        }
    }
    let mut dw1 = g.dot(&data.inputs.t());
    dw1.mapv_inplace(|v| -v * inv_p);
    for j in 0..m {
        if signs.d1[j] < 0.0 {
            dw1.column_mut(j).mapv_inplace(|v| -v);
        }
    }

    let mut dw2 = h.dot(&e);
    for i in 0..n {
        dw2[i] *= -inv_p * signs.d2[i];
    }
    Ok((dw1, dw2))
}

/// Full-batch sign-flipped training with optional per-epoch renormalization
/// to the initial Frobenius norms.
pub fn train(
    student: &NetworkState,
    dataset: &Dataset,
    test_dataset: &Dataset,
    signs: &SignPattern,
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut net = student.clone();
    let f1 = net.frobenius_w1();
    let f2 = net.frobenius_w2();
    let mut traj = Trajectory::default();
    for epoch in 0..cfg.epochs {
        if !state_ok(&net) {
            traj.diverged = true;
            break;
        }
        if epoch % cfg.record_every == 0 {
            let train = loss_mse(&net, dataset, activation)?;
            let test = loss_mse(&net, test_dataset, activation)?;
            if !train.is_finite() || !test.is_finite() {
                traj.diverged = true;
                break;
            }
            traj.push(epoch, &net, train, test);
        }
        let (dw1, dw2) = curl_step(&net, dataset, activation, signs)?;
        net.w1.scaled_add(cfg.learning_rate, &dw1);
        net.w2.scaled_add(cfg.learning_rate, &dw2);
        if cfg.renormalize_each_epoch {
            match renormalize(&net, f1, f2) {
                Ok(next) => net = next,
                Err(_) => {
                    traj.diverged = true;
                    break;
                }
            }
        }
    }
    if !traj.diverged {
        if state_ok(&net) {
            let train = loss_mse(&net, dataset, activation)?;
            let test = loss_mse(&net, test_dataset, activation)?;
            traj.push(cfg.epochs, &net, train, test);
        } else {
            traj.diverged = true;
        }
    }
    Ok(traj)
}

/// Population flow under whitened inputs:
/// dW1 = W2^T (s - W2 W1) D1, dW2 = (s - W2 W1) W1^T D2.
pub fn flow_rhs(
    w1: &Array2<f64>,
    w2: &Array1<f64>,
    s: &Array1<f64>,
    signs: &SignPattern,
) -> Result<(Array2<f64>, Array1<f64>)> {
    let (n, m) = w1.dim();
    if w2.len() != n || s.len() != m || signs.d1.len() != m || signs.d2.len() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "flow_rhs shapes: w1 {n}x{m}, w2 {}, s {}, d1 {}, d2 {}",
            w2.len(),
            s.len(),
            signs.d1.len(),
            signs.d2.len()
        )));
    }
    let e = s - &w2.dot(w1);
    let ed1 = &e * &signs.d1;
    let mut dw1 = Array2::zeros((n, m));
    for i in 0..n {
        let w2i = w2[i];
        for j in 0..m {
            dw1[(i, j)] = w2i * ed1[j];
        }
    }
    let dw2 = &w1.dot(&e) * &signs.d2;
    Ok((dw1, dw2))
}

/// Population loss 0.5 ||s - W2 W1||^2 of the whitened-input flow.
pub fn population_loss(w1: &Array2<f64>, w2: &Array1<f64>, s: &Array1<f64>) -> f64 {
    let e = s - &w2.dot(w1);
    0.5 * e.iter().map(|v| v * v).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    Euler,
    Rk4,
}

/// Fixed-step integration of the population flow; records every step.
pub fn integrate_flow(
    init: &NetworkState,
    s: &Array1<f64>,
    signs: &SignPattern,
    dt: f64,
    steps: usize,
    method: Integrator,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(CoreError::InvalidConfig("dt must be > 0".into()));
    }
    let mut w1 = init.w1.clone();
    let mut w2 = init.w2.clone();
    let mut traj = Trajectory::default();
    for step in 0..=steps {
        let loss = population_loss(&w1, &w2, s);
        if !loss.is_finite()
            || w1.iter().chain(w2.iter()).any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD)
        {
            traj.diverged = true;
            break;
        }
        traj.epochs_recorded.push(step);
        traj.w1_snapshots.push(w1.clone());
        traj.w2_snapshots.push(w2.clone());
        traj.train_loss.push(loss);
        traj.test_loss.push(loss);
        if step == steps {
            break;
        }
        match method {
            Integrator::Euler => {
                let (k1, l1) = flow_rhs(&w1, &w2, s, signs)?;
                w1.scaled_add(dt, &k1);
                w2.scaled_add(dt, &l1);
            }
            Integrator::Rk4 => {
                let (k1, l1) = flow_rhs(&w1, &w2, s, signs)?;
                let (k2, l2) =
                    flow_rhs(&(&w1 + &(&k1 * (dt / 2.0))), &(&w2 + &(&l1 * (dt / 2.0))), s, signs)?;
                let (k3, l3) =
                    flow_rhs(&(&w1 + &(&k2 * (dt / 2.0))), &(&w2 + &(&l2 * (dt / 2.0))), s, signs)?;
                let (k4, l4) = flow_rhs(&(&w1 + &(&k3 * dt)), &(&w2 + &(&l3 * dt)), s, signs)?;
                w1.scaled_add(dt / 6.0, &(&k1 + &(&k2 * 2.0) + &(&k3 * 2.0) + &k4));
                w2.scaled_add(dt / 6.0, &(&l1 + &(&l2 * 2.0) + &(&l3 * 2.0) + &l4));
            }
        }
    }
    Ok(traj)
}
