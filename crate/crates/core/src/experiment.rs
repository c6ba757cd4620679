//! Configured sweeps behind every figure-class experiment, with
//! manifest/CSV/SVG emission.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    classify_regime, convergence_epochs, paired_ttest, RegimeThresholds,
};
use crate::dynamics::{integrate_flow, train, Integrator, TrainConfig};
use crate::error::{CoreError, Result};
use crate::net::{
    sample_inputs, sample_teacher, Activation, Architecture, Dataset, NetworkState, SignPattern,
    INPUT_STD,
};
use crate::plot::{svg_heatmap, svg_lines, svg_scatter, Series};
use crate::potential::{symmetry_residual, rank1_sigma, Blocks, RuleSpec};
use crate::rmt::{
    atoms, empirical_spectrum, hidden_boundary, readout_boundary_mc, spectral_edges,
};

fn default_record_every() -> usize {
    10
}

fn default_threshold_factor() -> f64 {
    1e-4
}

fn default_true() -> bool {
    true
}

/// Configuration of one experiment; the `kind` tag selects the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    /// Scalar-model phase portraits: gradient flow vs flipped readout rule.
    Toy {
        s: f64,
        dt: f64,
        steps: usize,
        inits: Vec<(f64, f64)>,
    },
    /// (c, alpha_h) sweep of trained linear networks with hidden-layer
    /// flips, plus the analytic stability boundary overlay.
    PhaseHidden {
        c_values: Vec<f64>,
        alpha_values: Vec<f64>,
        seeds: usize,
        total_neurons: usize,
        n_train: usize,
        epochs: usize,
        #[serde(default = "default_record_every")]
        record_every: usize,
        #[serde(default = "default_true")]
        renormalize: bool,
        /// Step size; defaults to 0.1 / n_train.
        #[serde(default)]
        learning_rate: Option<f64>,
    },
    /// (c, alpha_r) sweep with readout-layer flips and a Monte-Carlo
    /// spectral boundary overlay.
    PhaseReadout {
        c_values: Vec<f64>,
        alpha_values: Vec<f64>,
        seeds: usize,
        total_neurons: usize,
        n_train: usize,
        epochs: usize,
        #[serde(default = "default_record_every")]
        record_every: usize,
        #[serde(default = "default_true")]
        renormalize: bool,
        /// Step size; defaults to 0.1 / n_train.
        #[serde(default)]
        learning_rate: Option<f64>,
        /// Matrix size of the Monte-Carlo boundary samples.
        mc_size: usize,
        mc_samples: usize,
    },
    /// Analytic support edges vs sampled extreme eigenvalues.
    Spectrum {
        c_values: Vec<f64>,
        alpha_values: Vec<f64>,
        matrix_size: usize,
    },
    /// Critical compression ratio per hidden flip fraction.
    Boundary {
        alpha_values: Vec<f64>,
        c_lo: f64,
        c_hi: f64,
        tol: f64,
    },
    /// Convergence-speed comparison: gradient vs single flipped readout
    /// weight.
    Speed {
        m: usize,
        n: usize,
        n_train: usize,
        epochs: usize,
        #[serde(default = "default_record_every")]
        record_every: usize,
        seeds: usize,
        activation: Activation,
        student_scale: f64,
        teacher_scale: f64,
        #[serde(default = "default_true")]
        renormalize: bool,
        #[serde(default = "default_threshold_factor")]
        threshold_factor: f64,
        /// Step size; defaults to 0.1 / n_train.
        #[serde(default)]
        learning_rate: Option<f64>,
    },
    /// Jacobian-symmetry audit of the plasticity-rule corpus.
    Audit { n_points: usize, size: usize },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |v: &[f64], name: &str| -> Result<()> {
            if v.is_empty() {
                Err(CoreError::InvalidConfig(format!("{name} grid is empty")))
            } else {
                Ok(())
            }
        };
        match self {
            ExperimentConfig::Toy { dt, steps, inits, .. } => {
                if !(*dt > 0.0) || *steps == 0 || inits.is_empty() {
                    return Err(CoreError::InvalidConfig(
                        "toy runs need dt > 0, steps >= 1 and at least one init".into(),
                    ));
                }
            }
            ExperimentConfig::PhaseHidden {
                c_values,
                alpha_values,
                seeds,
                total_neurons,
                n_train,
                epochs,
                ..
            }
            | ExperimentConfig::PhaseReadout {
                c_values,
                alpha_values,
                seeds,
                total_neurons,
                n_train,
                epochs,
                ..
            } => {
                nonempty(c_values, "c")?;
                nonempty(alpha_values, "alpha")?;
                if *seeds == 0 || *total_neurons < 4 || *n_train == 0 || *epochs == 0 {
                    return Err(CoreError::InvalidConfig(
                        "phase sweeps need seeds, neurons, samples and epochs >= 1".into(),
                    ));
                }
            }
            ExperimentConfig::Spectrum { c_values, alpha_values, matrix_size } => {
                nonempty(c_values, "c")?;
                nonempty(alpha_values, "alpha")?;
                if *matrix_size < 2 {
                    return Err(CoreError::InvalidConfig("matrix_size must be >= 2".into()));
                }
            }
            ExperimentConfig::Boundary { alpha_values, c_lo, c_hi, tol } => {
                nonempty(alpha_values, "alpha")?;
                if !(*c_lo > 0.0 && c_hi > c_lo && *tol > 0.0) {
                    return Err(CoreError::InvalidConfig(
                        "boundary needs 0 < c_lo < c_hi and tol > 0".into(),
                    ));
                }
            }
            ExperimentConfig::Speed { m, n, n_train, epochs, seeds, .. } => {
                if *m == 0 || *n == 0 || *n_train == 0 || *epochs == 0 || *seeds < 2 {
                    return Err(CoreError::InvalidConfig(
                        "speed runs need positive sizes and >= 2 seeds".into(),
                    ));
                }
            }
            ExperimentConfig::Audit { n_points, size } => {
                if *n_points == 0 || *size < 4 {
                    return Err(CoreError::InvalidConfig(
                        "audit needs n_points >= 1 and size >= 4".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn slug(&self) -> &'static str {
        match self {
            ExperimentConfig::Toy { .. } => "toy",
            ExperimentConfig::PhaseHidden { .. } => "phase-hidden",
            ExperimentConfig::PhaseReadout { .. } => "phase-readout",
            ExperimentConfig::Spectrum { .. } => "spectrum",
            ExperimentConfig::Boundary { .. } => "boundary",
            ExperimentConfig::Speed { .. } => "speed",
            ExperimentConfig::Audit { .. } => "audit",
        }
    }
}

/// Outcome of one `run`: paths written plus an optional summary document.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub manifest: PathBuf,
    pub results_csv: PathBuf,
    pub plots: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Split M + N = total at compression ratio c = M/N.
pub fn split_neurons(total: usize, c: f64) -> (usize, usize) {
    let n = ((total as f64) / (1.0 + c)).round().max(1.0) as usize;
    let n = n.min(total - 1);
    (total - n, n)
}

struct TrainCell {
    q: f64,
    regime: String,
    final_test: f64,
    initial_test: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_train_cell(
    m: usize,
    n: usize,
    alpha_h: f64,
    alpha_r: f64,
    n_train: usize,
    epochs: usize,
    record_every: usize,
    renormalize: bool,
    learning_rate: Option<f64>,
    seed: u64,
) -> Result<TrainCell> {
    let arch = Architecture::new(m, n, Activation::Linear)?;
    let teacher = sample_teacher(&arch, 1.0, seed);
    let student = sample_teacher(&arch, 1.0, seed.wrapping_add(1));
    let data = Dataset::from_teacher(
        &teacher,
        sample_inputs(m, n_train, INPUT_STD, seed.wrapping_add(2)),
        Activation::Linear,
    )?;
    let test = Dataset::from_teacher(
        &teacher,
        sample_inputs(m, 1000, INPUT_STD, seed.wrapping_add(3)),
        Activation::Linear,
    )?;
    let signs = SignPattern::with_fractions(m, n, alpha_h, alpha_r, seed.wrapping_add(4));
    let cfg = TrainConfig {
        epochs,
        learning_rate: learning_rate.unwrap_or(0.1 / n_train as f64),
        renormalize_each_epoch: renormalize,
        record_every,
        seed,
    };
    let traj = train(&student, &data, &test, &signs, Activation::Linear, &cfg)?;
    let rep = classify_regime(&traj, &RegimeThresholds::default());
    let initial_test = traj.test_loss.first().copied().unwrap_or(f64::NAN);
    Ok(TrainCell {
        q: rep.q,
        regime: format!("{:?}", rep.regime),
        final_test: traj.test_loss.last().copied().unwrap_or(f64::NAN),
        initial_test,
    })
}

/// Execute the experiment and write `manifest.json`, `results.csv`, and the
/// figure SVGs into `out_dir`.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
    seed_base: u64,
) -> Result<RunOutput> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let (csv, plots, summary) = match config {
        ExperimentConfig::Toy { s, dt, steps, inits } => run_toy(*s, *dt, *steps, inits, out_dir)?,
        ExperimentConfig::PhaseHidden {
            c_values,
            alpha_values,
            seeds,
            total_neurons,
            n_train,
            epochs,
            record_every,
            renormalize,
            learning_rate,
        } => run_phase(
            c_values,
            alpha_values,
            *seeds,
            *total_neurons,
            *n_train,
            *epochs,
            *record_every,
            *renormalize,
            *learning_rate,
            true,
            None,
            out_dir,
            jobs,
            seed_base,
        )?,
        ExperimentConfig::PhaseReadout {
            c_values,
            alpha_values,
            seeds,
            total_neurons,
            n_train,
            epochs,
            record_every,
            renormalize,
            learning_rate,
            mc_size,
            mc_samples,
        } => run_phase(
            c_values,
            alpha_values,
            *seeds,
            *total_neurons,
            *n_train,
            *epochs,
            *record_every,
            *renormalize,
            *learning_rate,
            false,
            Some((*mc_size, *mc_samples)),
            out_dir,
            jobs,
            seed_base,
        )?,
        ExperimentConfig::Spectrum { c_values, alpha_values, matrix_size } => {
            run_spectrum(c_values, alpha_values, *matrix_size, out_dir, seed_base)?
        }
        ExperimentConfig::Boundary { alpha_values, c_lo, c_hi, tol } => {
            run_boundary(alpha_values, *c_lo, *c_hi, *tol, out_dir)?
        }
        ExperimentConfig::Speed {
            m,
            n,
            n_train,
            epochs,
            record_every,
            seeds,
            activation,
            student_scale,
            teacher_scale,
            renormalize,
            threshold_factor,
            learning_rate,
        } => run_speed(
            *m,
            *n,
            *n_train,
            *epochs,
            *record_every,
            *seeds,
            *activation,
            *student_scale,
            *teacher_scale,
            *renormalize,
            *threshold_factor,
            *learning_rate,
            out_dir,
            seed_base,
        )?,
        ExperimentConfig::Audit { n_points, size } => {
            run_audit(*n_points, *size, out_dir, seed_base)?
        }
    };

    let results_csv = out_dir.join("results.csv");
    fs::write(&results_csv, csv)?;

    let config_json = serde_json::to_string_pretty(config).expect("serializable");
    let manifest = out_dir.join("manifest.json");
    let manifest_doc = serde_json::json!({
        "experiment": config.slug(),
        "config": serde_json::from_str::<serde_json::Value>(&config_json).unwrap(),
        "seed_base": seed_base,
        "jobs": jobs,
        "content_hash": format!("{:016x}", fnv1a(config_json.as_bytes())),
        "outputs": {
            "results": "results.csv",
            "plots": plots.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        },
        "summary": summary,
    });
    fs::write(&manifest, serde_json::to_string_pretty(&manifest_doc).unwrap())?;
    Ok(RunOutput {
        manifest,
        results_csv,
        plots,
        summary,
    })
}

type ExperimentArtifacts = (String, Vec<PathBuf>, serde_json::Value);

fn run_toy(
    s: f64,
    dt: f64,
    steps: usize,
    inits: &[(f64, f64)],
    out_dir: &Path,
) -> Result<ExperimentArtifacts> {
    let teacher = Array1::from_vec(vec![s]);
    let mut csv = String::from("variant,init_w1,init_w2,step,w1,w2,loss\n");
    let mut orbit_series = Vec::new();
    for (variant, d2) in [("gradient", 1.0f64), ("flipped", -1.0)] {
        let signs = SignPattern::new(Array1::ones(1), Array1::from_vec(vec![d2]))?;
        for &(w1v, w2v) in inits {
            let init = NetworkState::new(
                Array2::from_elem((1, 1), w1v),
                Array1::from_vec(vec![w2v]),
            )?;
            let traj = integrate_flow(&init, &teacher, &signs, dt, steps, Integrator::Rk4)?;
            let stride = (traj.len() / 400).max(1);
            let mut pts = Vec::new();
            for t in (0..traj.len()).step_by(stride) {
                let a = traj.w1_snapshots[t][(0, 0)];
                let b = traj.w2_snapshots[t][0];
                csv.push_str(&format!(
                    "{variant},{w1v:e},{w2v:e},{},{a:e},{b:e},{:e}\n",
                    traj.epochs_recorded[t], traj.train_loss[t]
                ));
                pts.push((a, b));
            }
            orbit_series.push(Series {
                label: format!("{variant} ({w1v:.2},{w2v:.2})"),
                points: pts,
            });
        }
    }
    let svg = svg_lines(&orbit_series, "Scalar-model weight-space orbits", "w1", "w2")?;
    let plot = out_dir.join("toy_orbits.svg");
    fs::write(&plot, svg)?;
    Ok((csv, vec![plot], serde_json::json!({})))
}

/// Run a parallel map over cells, preserving order.
fn par_map<T, F>(cells: Vec<T>, jobs: usize, f: F) -> Vec<String>
where
    T: Send + Sync,
    F: Fn(&T) -> String + Sync,
{
    let jobs = jobs.max(1);
    if jobs == 1 || cells.len() <= 1 {
        return cells.iter().map(&f).collect();
    }
    let mut out: Vec<Option<String>> = (0..cells.len()).map(|_| None).collect();
    let chunk = cells.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        for (cell_chunk, out_chunk) in cells.chunks(chunk).zip(out.chunks_mut(chunk)) {
            scope.spawn(|| {
                for (c, o) in cell_chunk.iter().zip(out_chunk.iter_mut()) {
                    *o = Some(f(c));
                }
            });
        }
    });
    out.into_iter().map(|o| o.unwrap()).collect()
}

#[allow(clippy::too_many_arguments)]
fn run_phase(
    c_values: &[f64],
    alpha_values: &[f64],
    seeds: usize,
    total_neurons: usize,
    n_train: usize,
    epochs: usize,
    record_every: usize,
    renormalize: bool,
    learning_rate: Option<f64>,
    hidden: bool,
    mc: Option<(usize, usize)>,
    out_dir: &Path,
    jobs: usize,
    seed_base: u64,
) -> Result<ExperimentArtifacts> {
    let mut cells = Vec::new();
    for (ci, &c) in c_values.iter().enumerate() {
        for (ai, &alpha) in alpha_values.iter().enumerate() {
            for si in 0..seeds {
                cells.push((ci, ai, si, c, alpha));
            }
        }
    }
    let rows = par_map(cells, jobs, |&(ci, ai, si, c, alpha)| {
        let (m, n) = split_neurons(total_neurons, c);
        let seed = seed_base
            .wrapping_add((ci as u64) << 40)
            .wrapping_add((ai as u64) << 24)
            .wrapping_add((si as u64) << 4);
        let (alpha_h, alpha_r) = if hidden { (alpha, 0.0) } else { (0.0, alpha) };
        match run_train_cell(
            m, n, alpha_h, alpha_r, n_train, epochs, record_every, renormalize, learning_rate,
            seed,
        ) {
            Ok(cell) => format!(
                "{c:e},{alpha:e},{si},{:e},{},{:e},{:e},ok\n",
                cell.q, cell.regime, cell.final_test, cell.initial_test
            ),
            Err(e) => format!("{c:e},{alpha:e},{si},nan,Error,nan,nan,error: {e}\n"),
        }
    });
    let mut csv = String::from("c,alpha,seed,q,regime,final_test_loss,initial_test_loss,status\n");
    for r in &rows {
        csv.push_str(r);
    }

    // Mean log final test loss per cell for the heatmap.
    let mut grid = vec![vec![f64::NAN; c_values.len()]; alpha_values.len()];
    for (ci, &_c) in c_values.iter().enumerate() {
        for (ai, &_a) in alpha_values.iter().enumerate() {
            let mut acc = 0.0;
            let mut count = 0usize;
            for si in 0..seeds {
                let row = &rows[(ci * alpha_values.len() + ai) * seeds + si];
                let parts: Vec<&str> = row.trim_end().split(',').collect();
                if parts[7].starts_with("ok") {
                    if let Ok(v) = parts[5].parse::<f64>() {
                        if v.is_finite() && v > 0.0 {
                            acc += v.log10();
                            count += 1;
                        }
                    }
                }
            }
            if count > 0 {
                grid[ai][ci] = acc / count as f64;
            }
        }
    }

    // Analytic (hidden) or Monte-Carlo (readout) boundary overlay.
    let mut overlay_pts = Vec::new();
    if hidden {
        for &alpha in alpha_values {
            if alpha <= 0.0 {
                continue;
            }
            if let Ok(c_star) = hidden_boundary(alpha, 0.02, 3.0, 1e-3) {
                overlay_pts.push((c_star, alpha));
            }
        }
    } else if let Some((mc_size, mc_samples)) = mc {
        for &c in c_values {
            // Smallest alpha_r with >= 50% unstable draws.
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            let f_hi = readout_boundary_mc(hi, c, mc_size, mc_samples, seed_base)?;
            if f_hi < 0.5 {
                continue;
            }
            for _ in 0..12 {
                let mid = 0.5 * (lo + hi);
                let f = readout_boundary_mc(mid, c, mc_size, mc_samples, seed_base)?;
                if f >= 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            overlay_pts.push((c, 0.5 * (lo + hi)));
        }
    }
    overlay_pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let overlay = Series {
        label: "stability boundary".into(),
        points: overlay_pts.clone(),
    };
    let svg = svg_heatmap(
        c_values,
        alpha_values,
        &grid,
        if hidden {
            "Hidden-layer flips: mean log10 final test loss"
        } else {
            "Readout flips: mean log10 final test loss"
        },
        "c = M/N",
        if hidden { "alpha_h" } else { "alpha_r" },
        if overlay.points.is_empty() { None } else { Some(&overlay) },
    )?;
    let plot = out_dir.join("phase.svg");
    fs::write(&plot, svg)?;
    let summary = serde_json::json!({"boundary": overlay_pts});
    Ok((csv, vec![plot], summary))
}

fn run_spectrum(
    c_values: &[f64],
    alpha_values: &[f64],
    matrix_size: usize,
    out_dir: &Path,
    seed_base: u64,
) -> Result<ExperimentArtifacts> {
    let mut csv = String::from(
        "c,alpha_h,analytic_min,analytic_max,sampled_min,sampled_max,n_intervals,status\n",
    );
    let mut analytic_pts = Vec::new();
    let mut sampled_pts = Vec::new();
    for &c in c_values {
        for &alpha in alpha_values {
            match (spectral_edges(c, alpha), empirical_spectrum(c, alpha, 0.0, matrix_size, seed_base)) {
                (Ok(support), Ok(ev)) => {
                    // Jacobian spectrum is -X; include atoms in the extremes.
                    let mut x_min = support.min().unwrap();
                    let mut x_max = support.max().unwrap();
                    for (loc, _) in atoms(c, alpha) {
                        x_min = x_min.min(loc);
                        x_max = x_max.max(loc);
                    }
                    let (a_min, a_max) = (-x_max, -x_min);
                    csv.push_str(&format!(
                        "{c:e},{alpha:e},{a_min:e},{a_max:e},{:e},{:e},{},ok\n",
                        ev[0],
                        ev[ev.len() - 1],
                        support.intervals.len()
                    ));
                    analytic_pts.push((a_min, a_max));
                    sampled_pts.push((ev[0], ev[ev.len() - 1]));
                }
                (e1, e2) => {
                    let msg = e1.err().or(e2.err()).map(|e| e.to_string()).unwrap_or_default();
                    csv.push_str(&format!("{c:e},{alpha:e},nan,nan,nan,nan,0,error: {msg}\n"));
                }
            }
        }
    }
    let series = [
        Series {
            label: "analytic (min,max)".into(),
            points: analytic_pts,
        },
        Series {
            label: "sampled (min,max)".into(),
            points: sampled_pts,
        },
    ];
    let svg = svg_scatter(
        &series,
        "Analytic vs sampled spectrum extremes",
        "min eigenvalue",
        "max eigenvalue",
    )?;
    let plot = out_dir.join("spectrum.svg");
    fs::write(&plot, svg)?;
    Ok((csv, vec![plot], serde_json::json!({})))
}

fn run_boundary(
    alpha_values: &[f64],
    c_lo: f64,
    c_hi: f64,
    tol: f64,
    out_dir: &Path,
) -> Result<ExperimentArtifacts> {
    let mut csv = String::from("alpha_h,c_star,status\n");
    let mut pts = Vec::new();
    for &alpha in alpha_values {
        match hidden_boundary(alpha, c_lo, c_hi, tol) {
            Ok(c_star) => {
                csv.push_str(&format!("{alpha:e},{c_star:e},ok\n"));
                pts.push((alpha, c_star));
            }
            Err(e) => csv.push_str(&format!("{alpha:e},nan,error: {e}\n")),
        }
    }
    let svg = svg_lines(
        &[Series {
            label: "c*(alpha_h)".into(),
            points: pts,
        }],
        "Hidden-layer stability boundary",
        "alpha_h",
        "critical c",
    )?;
    let plot = out_dir.join("boundary.svg");
    fs::write(&plot, svg)?;
    Ok((csv, vec![plot], serde_json::json!({})))
}

/// Paired gradient-vs-curl training for one seed; both runs share teacher,
/// data, and initialization.
#[allow(clippy::too_many_arguments)]
pub fn speed_pair(
    m: usize,
    n: usize,
    n_train: usize,
    epochs: usize,
    record_every: usize,
    activation: Activation,
    student_scale: f64,
    teacher_scale: f64,
    renormalize: bool,
    threshold_factor: f64,
    learning_rate: Option<f64>,
    seed: u64,
) -> Result<(Option<usize>, Option<usize>, f64)> {
    let arch = Architecture::new(m, n, activation)?;
    let teacher = sample_teacher(&arch, teacher_scale, seed);
    let student = sample_teacher(&arch, student_scale, seed.wrapping_add(1));
    let data = Dataset::from_teacher(
        &teacher,
        sample_inputs(m, n_train, INPUT_STD, seed.wrapping_add(2)),
        activation,
    )?;
    let test = Dataset::from_teacher(
        &teacher,
        sample_inputs(m, 1000, INPUT_STD, seed.wrapping_add(3)),
        activation,
    )?;
    let cfg = TrainConfig {
        epochs,
        learning_rate: learning_rate.unwrap_or(0.1 / n_train as f64),
        renormalize_each_epoch: renormalize,
        record_every,
        seed,
    };
    let grad_traj = train(
        &student,
        &data,
        &test,
        &SignPattern::identity(m, n),
        activation,
        &cfg,
    )?;
    let curl_traj = train(
        &student,
        &data,
        &test,
        &SignPattern::single_readout_flip(m, n, 0),
        activation,
        &cfg,
    )?;
    let initial = grad_traj.test_loss.first().copied().unwrap_or(f64::NAN);
    let threshold = threshold_factor * initial;
    Ok((
        convergence_epochs(&grad_traj, threshold),
        convergence_epochs(&curl_traj, threshold),
        threshold,
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_speed(
    m: usize,
    n: usize,
    n_train: usize,
    epochs: usize,
    record_every: usize,
    seeds: usize,
    activation: Activation,
    student_scale: f64,
    teacher_scale: f64,
    renormalize: bool,
    threshold_factor: f64,
    learning_rate: Option<f64>,
    out_dir: &Path,
    seed_base: u64,
) -> Result<ExperimentArtifacts> {
    let mut csv = String::from("seed,grad_epochs,curl_epochs,threshold,status\n");
    let mut grad = Vec::new();
    let mut curl = Vec::new();
    for si in 0..seeds {
        let seed = seed_base.wrapping_add(137 * si as u64);
        match speed_pair(
            m,
            n,
            n_train,
            epochs,
            record_every,
            activation,
            student_scale,
            teacher_scale,
            renormalize,
            threshold_factor,
            learning_rate,
            seed,
        ) {
            Ok((g, c, thr)) => {
                let gs = g.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
                let cs = c.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
                csv.push_str(&format!("{si},{gs},{cs},{thr:e},ok\n"));
                if let (Some(g), Some(c)) = (g, c) {
                    grad.push(g as f64);
                    curl.push(c as f64);
                }
            }
            Err(e) => csv.push_str(&format!("{si},nan,nan,nan,error: {e}\n")),
        }
    }
    let summary = if grad.len() >= 2 {
        let mg = grad.iter().sum::<f64>() / grad.len() as f64;
        let mc = curl.iter().sum::<f64>() / curl.len() as f64;
        match paired_ttest(&curl, &grad) {
            Ok((t, p)) => serde_json::json!({
                "pairs": grad.len(),
                "mean_grad_epochs": mg,
                "mean_curl_epochs": mc,
                "t_stat": t,
                "p_value": p,
            }),
            Err(e) => serde_json::json!({
                "pairs": grad.len(),
                "mean_grad_epochs": mg,
                "mean_curl_epochs": mc,
                "t_test_error": e.to_string(),
            }),
        }
    } else {
        serde_json::json!({"pairs": grad.len()})
    };
    let series = [
        Series {
            label: "gradient".into(),
            points: grad.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect(),
        },
        Series {
            label: "curl".into(),
            points: curl.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect(),
        },
    ];
    let svg = svg_lines(
        &series,
        "Convergence epochs per seed",
        "seed index",
        "epochs to threshold",
    )?;
    let plot = out_dir.join("speed.svg");
    fs::write(&plot, svg)?;
    Ok((csv, vec![plot], summary))
}

/// The audited rule corpus, in a fixed order.
pub fn audit_cases(size: usize, seed: u64) -> Vec<(String, RuleSpec)> {
    let m = size;
    let n = size.max(2) / 2;
    let mut mixed_mask = Array2::from_elem((size, size), 1.0);
    for k in 1..size {
        mixed_mask[(0, k)] = -1.0;
        mixed_mask[(k, 0)] = -1.0;
    }
    let mut d_mixed = Array1::ones(size);
    for k in size / 2..size {
        d_mixed[k] = -1.0;
    }
    let mut sigma_zero_inhib = rank1_sigma(size, seed.wrapping_add(2));
    for k in size / 2..size {
        for j in 0..size {
            sigma_zero_inhib[(k, j)] = 0.0;
            sigma_zero_inhib[(j, k)] = 0.0;
        }
    }
    let s = Array1::from_shape_fn(m, |j| 0.5 + 0.1 * j as f64);
    vec![
        (
            "curl mixed d2".into(),
            RuleSpec::CurlDescent {
                signs: SignPattern::single_readout_flip(m, n, 0),
                s: s.clone(),
            },
        ),
        (
            "curl uniform signs".into(),
            RuleSpec::CurlDescent {
                signs: SignPattern::identity(m, n),
                s,
            },
        ),
        (
            "hebb anti-hebb all-ones mask".into(),
            RuleSpec::HebbAntiHebb {
                mask: Array2::from_elem((size, size), 1.0),
                sigma: rank1_sigma(size, seed),
            },
        ),
        (
            "exc-inh mixed d generic input".into(),
            RuleSpec::ExcInh {
                d: d_mixed.clone(),
                sigma: rank1_sigma(size, seed.wrapping_add(1)),
                gamma: 0.0,
            },
        ),
        (
            "exc-inh mixed d zero inhibitory input".into(),
            RuleSpec::ExcInh {
                d: d_mixed,
                sigma: sigma_zero_inhib,
                gamma: 0.0,
            },
        ),
        (
            "tied block network".into(),
            RuleSpec::PehlevanBlocks {
                blocks: Blocks {
                    nf: size / 2 + 1,
                    ne: size / 2 + 1,
                    ni: size / 2,
                },
                sigma_ff: rank1_sigma(size / 2 + 1, seed.wrapping_add(3)),
            },
        ),
    ]
}

fn run_audit(
    n_points: usize,
    size: usize,
    out_dir: &Path,
    seed_base: u64,
) -> Result<ExperimentArtifacts> {
    let mut csv = String::from("case,max_residual,admits_potential,status\n");
    let mut reports = Vec::new();
    for (idx, (name, rule)) in audit_cases(size, seed_base).into_iter().enumerate() {
        match symmetry_residual(&rule, n_points, seed_base.wrapping_add(idx as u64)) {
            Ok(rep) => {
                csv.push_str(&format!(
                    "{name},{:e},{},ok\n",
                    rep.max_residual, rep.admits_potential
                ));
                reports.push(serde_json::json!({
                    "case": name,
                    "max_residual": rep.max_residual,
                    "admits_potential": rep.admits_potential,
                    "tol": rep.tol,
                }));
            }
            Err(e) => csv.push_str(&format!("{name},nan,false,error: {e}\n")),
        }
    }
    let reports_path = out_dir.join("audit_reports.json");
    fs::write(
        &reports_path,
        serde_json::to_string_pretty(&serde_json::Value::Array(reports.clone())).unwrap(),
    )?;
    Ok((csv, vec![], serde_json::json!({"reports": reports})))
}
