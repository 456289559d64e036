//! Stage-wise training on temporally subsampled sequences.
//!
//! Stage `s` trains on every sequence subsampled with stride `r_s` (by
//! indexing or by block pooling) while the model step size follows
//! `Δ_s = Δ_init · r_s / r_1`. Strides decrease to `1`, so the last stage sees
//! full-resolution data with step `Δ_init / r_1`.

use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dynsys::{sample_dataset, DatasetOptions, SystemKind, SystemParams};
use crate::fmt::sig17;
use crate::rng::{streams, SeededStream};
use crate::ssm::{discretize_entry, s4d_lin_poles, Method, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Indexing,
    Pooling,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Indexing => "indexing",
            Strategy::Pooling => "pooling",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indexing" => Ok(Strategy::Indexing),
            "pooling" => Ok(Strategy::Pooling),
            other => Err(Error::invalid(format!(
                "unknown strategy `{other}` (indexing, pooling)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSchedule {
    strides: Vec<usize>,
    epochs: Vec<usize>,
    strategy: Strategy,
}

impl StageSchedule {
    /// Strides must strictly decrease to `1`; one positive epoch count per stage.
    pub fn new(strides: Vec<usize>, epochs: Vec<usize>, strategy: Strategy) -> Result<Self> {
        if strides.is_empty() {
            return Err(Error::invalid("at least one stage is required"));
        }
        if strides.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("strides must be strictly decreasing"));
        }
        if *strides.last().expect("nonempty") != 1 {
            return Err(Error::invalid("the last stride must be 1"));
        }
        if epochs.len() != strides.len() {
            return Err(Error::LengthMismatch {
                expected: strides.len(),
                actual: epochs.len(),
            });
        }
        if epochs.contains(&0) {
            return Err(Error::invalid("every stage needs at least one epoch"));
        }
        Ok(Self {
            strides,
            epochs,
            strategy,
        })
    }

    /// Equal epoch budget per stage.
    pub fn uniform(strides: Vec<usize>, epochs_per_stage: usize, strategy: Strategy) -> Result<Self> {
        let n = strides.len();
        Self::new(strides, vec![epochs_per_stage; n], strategy)
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn epochs(&self) -> &[usize] {
        &self.epochs
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn stages(&self) -> usize {
        self.strides.len()
    }

    /// `m_s = r_s / r_{s−1}` with `r_0 = r_1`.
    pub fn delta_multipliers(&self) -> Vec<f64> {
        let mut prev = self.strides[0];
        self.strides
            .iter()
            .map(|&r| {
                let m = r as f64 / prev as f64;
                prev = r;
                m
            })
            .collect()
    }

    /// Sequence length after subsampling a length-`len` sequence at stage `s`.
    pub fn stage_len(&self, s: usize, len: usize) -> usize {
        let r = self.strides[s];
        match self.strategy {
            Strategy::Indexing => (len - 1) / r + 1,
            Strategy::Pooling => len.div_ceil(r),
        }
    }
}

/// `Δ_s = Δ_init · r_s / r_1` for every stage.
pub fn delta_schedule(sched: &StageSchedule, delta_init: f64) -> Result<Vec<f64>> {
    if !(delta_init > 0.0 && delta_init.is_finite()) {
        return Err(Error::invalid("delta_init must be positive and finite"));
    }
    let r1 = sched.strides[0] as f64;
    Ok(sched.strides.iter().map(|&r| delta_init * (r as f64 / r1)).collect())
}

/// Elements at indices `0, r, 2r, …`.
pub fn subsample_index<T: Clone>(seq: &[T], r: usize) -> Result<Vec<T>> {
    if r == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if seq.is_empty() {
        return Err(Error::invalid("cannot subsample an empty sequence"));
    }
    Ok(seq.iter().step_by(r).cloned().collect())
}

/// Types that can be averaged block-wise.
pub trait Average: Clone {
    fn mean_of(items: &[Self]) -> Self;
}

impl Average for f64 {
    fn mean_of(items: &[f64]) -> f64 {
        items.iter().sum::<f64>() / items.len() as f64
    }
}

impl Average for Vec<f64> {
    fn mean_of(items: &[Vec<f64>]) -> Vec<f64> {
        let mut acc = vec![0.0; items[0].len()];
        for it in items {
            for (a, x) in acc.iter_mut().zip(it) {
                *a += x;
            }
        }
        let n = items.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

/// Means of consecutive length-`r` blocks; a trailing partial block is
/// averaged over its own length.
pub fn subsample_pool<T: Average>(seq: &[T], r: usize) -> Result<Vec<T>> {
    if r == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if seq.is_empty() {
        return Err(Error::invalid("cannot subsample an empty sequence"));
    }
    Ok(seq.chunks(r).map(T::mean_of).collect())
}

pub fn subsample<T: Average>(seq: &[T], r: usize, strategy: Strategy) -> Result<Vec<T>> {
    match strategy {
        Strategy::Indexing => subsample_index(seq, r),
        Strategy::Pooling => subsample_pool(seq, r),
    }
}

/// One labelled scalar sequence.
pub type Example = (Vec<f64>, f64);

/// A model that can be retargeted to a new step size and refit.
pub trait Trainer {
    fn set_delta(&mut self, delta: f64) -> Result<()>;
    /// Runs `epochs` epochs warm-started from the current state and returns
    /// the training MSE.
    fn train(&mut self, data: &[Example], epochs: usize) -> Result<f64>;
    fn evaluate(&self, data: &[Example]) -> Result<f64>;
}

/// Frozen random S4 features (final hidden state) with a ridge readout.
///
/// Each sequence is fed through `x_{k+1} = Ā x_k + B̄ u_k` with ZOH at step
/// `Δ`, poles `−1/2 + iπj` and a seeded complex `b`. The readout minimizes
/// `(1/N)‖Xw − y‖² + λ‖w − w_prev‖²` where `w_prev` is the current weight
/// vector (the intercept is not penalized). One epoch is one closed-form refit.
#[derive(Clone, Debug)]
pub struct RidgeS4Trainer {
    a: Vec<C64>,
    b: Vec<C64>,
    delta: f64,
    lambda: f64,
    weights: Vec<f64>,
}

pub const DEFAULT_LAMBDA: f64 = 1e-3;

impl RidgeS4Trainer {
    pub fn new(n_states: usize, lambda: f64, rng_seed: u64) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::invalid("n_states must be at least 1"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda must be nonnegative and finite"));
        }
        let mut rng = SeededStream::new(rng_seed, streams::FEATURES);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let b = (0..n_states)
            .map(|_| C64::new(rng.normal() * scale, rng.normal() * scale))
            .collect();
        Ok(Self {
            a: s4d_lin_poles(n_states),
            b,
            delta: 1.0,
            lambda,
            weights: vec![0.0; 2 * n_states + 1],
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `[1, Re x_L, Im x_L]` for one sequence.
    pub fn features(&self, seq: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut abar = Vec::with_capacity(n);
        let mut bbar = Vec::with_capacity(n);
        for (&a, &b) in self.a.iter().zip(&self.b) {
            let (ab, beta) = discretize_entry(a, self.delta, Method::Zoh);
            abar.push(ab);
            bbar.push(beta * b);
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for &u in seq {
            for j in 0..n {
                x[j] = abar[j] * x[j] + bbar[j] * u;
            }
        }
        let mut f = Vec::with_capacity(2 * n + 1);
        f.push(1.0);
        f.extend(x.iter().map(|z| z.re));
        f.extend(x.iter().map(|z| z.im));
        f
    }

    fn design(&self, data: &[Example]) -> Result<DMatrix<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset("stage dataset is empty"));
        }
        let rows: Vec<Vec<f64>> = data.par_iter().map(|(s, _)| self.features(s)).collect();
        let p = self.weights.len();
        Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
    }

    fn predict_rows(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * DVector::from_column_slice(&self.weights)
    }
}

fn mse(pred: &DVector<f64>, data: &[Example]) -> f64 {
    pred.iter().zip(data).map(|(p, (_, y))| (p - y).powi(2)).sum::<f64>() / data.len() as f64
}

impl Trainer for RidgeS4Trainer {
    fn set_delta(&mut self, delta: f64) -> Result<()> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta must be positive and finite"));
        }
        self.delta = delta;
        Ok(())
    }

    fn train(&mut self, data: &[Example], epochs: usize) -> Result<f64> {
        let x = self.design(data)?;
        let y = DVector::from_iterator(data.len(), data.iter().map(|(_, t)| *t));
        let nf = data.len() as f64;
        let p = self.weights.len();
        let mut gram = x.transpose() * &x / nf;
        let xty = x.transpose() * &y / nf;
        for j in 1..p {
            gram[(j, j)] += self.lambda;
        }
        for _ in 0..epochs {
            let mut rhs = xty.clone();
            for j in 1..p {
                rhs[j] += self.lambda * self.weights[j];
            }
            let w = match gram.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => gram.clone().lu().solve(&rhs).ok_or(Error::SingularSolve)?,
            };
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::TrainerDivergence("non-finite ridge weights".into()));
            }
            self.weights = w.iter().copied().collect();
        }
        let train = mse(&self.predict_rows(&x), data);
        if !train.is_finite() {
            return Err(Error::TrainerDivergence("non-finite training loss".into()));
        }
        Ok(train)
    }

    fn evaluate(&self, data: &[Example]) -> Result<f64> {
        let x = self.design(data)?;
        Ok(mse(&self.predict_rows(&x), data))
    }
}

/// Seeded 90/10 train/validation split (at least one example on each side).
pub fn split_train_val(data: &[Example], rng_seed: u64) -> Result<(Vec<Example>, Vec<Example>)> {
    if data.len() < 2 {
        return Err(Error::EmptyDataset("need at least two examples to split"));
    }
    let n_val = ((data.len() as f64 * 0.1).round() as usize).clamp(1, data.len() - 1);
    let mut idx: Vec<usize> = (0..data.len()).collect();
    SeededStream::new(rng_seed, streams::SPLIT).shuffle(&mut idx);
    let (val_idx, train_idx) = idx.split_at(n_val);
    let pick = |ids: &[usize]| {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.into_iter().map(|i| data[i].clone()).collect::<Vec<_>>()
    };
    Ok((pick(train_idx), pick(val_idx)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    /// One-based stage number.
    pub stage: usize,
    pub stride: usize,
    pub delta: f64,
    pub epochs: usize,
    pub seq_len: usize,
    pub cum_wall_time_s: f64,
    pub train_mse: f64,
    pub val_mse: f64,
}

pub const CSV_HEADER: &str = "stage,stride,delta,epochs,cum_wall_time_s,train_mse,val_mse";

impl StageReport {
    /// With `timing` off the wall-time column is written as `0` so the file
    /// depends only on the seed and flags.
    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.stage,
            self.stride,
            sig17(self.delta),
            self.epochs,
            if timing {
                sig17(self.cum_wall_time_s)
            } else {
                "0".into()
            },
            sig17(self.train_mse),
            sig17(self.val_mse)
        )
    }
}

pub fn write_csv(reports: &[StageReport], timing: bool, mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row(timing))?;
    }
    Ok(())
}

fn subsample_examples(data: &[Example], r: usize, strategy: Strategy) -> Result<Vec<Example>> {
    data.iter().map(|(s, y)| Ok((subsample(s, r, strategy)?, *y))).collect()
}

/// Runs every stage on a seeded 90/10 split, warm-starting the trainer.
pub fn run_stagewise(
    dataset: &[Example],
    sched: &StageSchedule,
    delta_init: f64,
    trainer: &mut dyn Trainer,
    rng_seed: u64,
) -> Result<Vec<StageReport>> {
    let (train, val) = split_train_val(dataset, rng_seed)?;
    let deltas = delta_schedule(sched, delta_init)?;
    let start = Instant::now();
    let mut out = Vec::with_capacity(sched.stages());
    for (s, ((&r, &epochs), &delta)) in sched.strides.iter().zip(&sched.epochs).zip(&deltas).enumerate() {
        trainer.set_delta(delta)?;
        let train_s = subsample_examples(&train, r, sched.strategy)?;
        let val_s = subsample_examples(&val, r, sched.strategy)?;
        let train_mse = trainer.train(&train_s, epochs)?;
        let val_mse = trainer.evaluate(&val_s)?;
        out.push(StageReport {
            stage: s + 1,
            stride: r,
            delta,
            epochs,
            seq_len: train_s[0].0.len(),
            cum_wall_time_s: start.elapsed().as_secs_f64(),
            train_mse,
            val_mse,
        });
    }
    Ok(out)
}

/// Damped-harmonic trajectories from `x0 = 1, v0 = 0` labelled with their `ω`.
pub fn omega_recovery_dataset(count: usize, horizon: f64, rng_seed: u64) -> Result<Vec<Example>> {
    let opts = DatasetOptions {
        horizon,
        tau0: 0.01,
        overrides: vec![("x0".into(), 1.0), ("v0".into(), 0.0)],
    };
    sample_dataset(SystemKind::DampedHarmonic, count, rng_seed, &opts)?
        .into_iter()
        .map(|(traj, params)| match params {
            SystemParams::DampedHarmonic { omega, .. } => Ok((traj.into_values(), omega)),
            _ => Err(Error::invalid("expected damped-harmonic parameters")),
        })
        .collect()
}
