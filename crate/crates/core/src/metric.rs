//! Lag-similarity continuity score for sequence datasets.
//!
//! For lag `t`, with kernel `K` and background `β`,
//!
//! ```text
//! μ_t = (E_u E_k K(u_k, u_{k+t}) − β) / (E_u E_k K(u_k, u_k) − β)
//! ```
//!
//! where `β` is the mean kernel value over pairs more than `gap` positions
//! apart. The aggregate score is `Σ_t w_t μ_t`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::rng::{streams, SeededStream};
use crate::ssm::Trajectory;
use crate::{Error, Result};

/// Dimension of the continuous/quantized embedding.
pub const EMBED_DIM: usize = 16;

/// A sequence of equal-dimension real tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSample {
    tokens: Vec<Vec<f64>>,
}

impl SequenceSample {
    pub fn new(tokens: Vec<Vec<f64>>) -> Result<Self> {
        if tokens.len() < 2 {
            return Err(Error::invalid("a sequence needs at least two tokens"));
        }
        let d = tokens[0].len();
        if d == 0 {
            return Err(Error::invalid("token dimension must be at least 1"));
        }
        if tokens.iter().any(|t| t.len() != d) {
            return Err(Error::invalid("tokens differ in dimension"));
        }
        Ok(Self { tokens })
    }

    /// One-dimensional tokens from a scalar series.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn tokens(&self) -> &[Vec<f64>] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tokens[0].len()
    }

    pub fn into_tokens(self) -> Vec<Vec<f64>> {
        self.tokens
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kernel {
    #[default]
    Cosine,
}

impl Kernel {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kernel::Cosine => kernel_cosine(x, y),
        }
    }
}

/// `(1 + cos∠(x, y)) / 2`; `0.5` when either vector is (numerically) zero.
pub fn kernel_cosine(x: &[f64], y: &[f64]) -> f64 {
    let (mut dot, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        xx += a * a;
        yy += b * b;
    }
    let (nx, ny) = (xx.sqrt(), yy.sqrt());
    if nx < 1e-15 || ny < 1e-15 {
        return 0.5;
    }
    let cos = (dot / (nx * ny)).clamp(-1.0, 1.0);
    0.5 * (1.0 + cos)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricConfig {
    pub max_lag: usize,
    /// `w_t` for `t = 1..=max_lag`; uniform `1/T` when `None`.
    pub weights: Option<Vec<f64>>,
    /// Far-pair gap `ϱ`; defaults to `max(4T, L/4)` clamped below `L − 1`.
    pub gap: Option<usize>,
    pub far_pair_samples: usize,
    pub kernel: Kernel,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            max_lag: 16,
            weights: None,
            gap: None,
            far_pair_samples: 10_000,
            kernel: Kernel::Cosine,
        }
    }
}

impl MetricConfig {
    pub fn weights(&self) -> Result<Vec<f64>> {
        match &self.weights {
            None => Ok(vec![1.0 / self.max_lag as f64; self.max_lag]),
            Some(w) if w.len() != self.max_lag => Err(Error::LengthMismatch {
                expected: self.max_lag,
                actual: w.len(),
            }),
            Some(w) if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) => {
                Err(Error::invalid("lag weights must be nonnegative and finite"))
            }
            Some(w) => Ok(w.clone()),
        }
    }

    /// The gap used for a dataset whose shortest sequence has `len` tokens.
    pub fn resolve_gap(&self, len: usize) -> usize {
        self.gap
            .unwrap_or_else(|| (4 * self.max_lag).max(len / 4).min(len.saturating_sub(2)))
    }
}

/// Dataset-level quantities shared by every lag.
#[derive(Clone, Debug, PartialEq)]
pub struct Background {
    pub beta: f64,
    pub self_similarity: f64,
    pub gap: usize,
}

fn check_data(data: &[SequenceSample]) -> Result<usize> {
    let first = data.first().ok_or(Error::EmptyDataset("no sequences"))?;
    let d = first.dim();
    if data.iter().any(|s| s.dim() != d) {
        return Err(Error::invalid("sequences differ in token dimension"));
    }
    Ok(data.iter().map(SequenceSample::len).min().unwrap_or(0))
}

/// Ordered mean of per-sequence values (sequence order, not completion order).
fn mean_over_sequences(data: &[SequenceSample], f: impl Fn(&SequenceSample) -> f64 + Sync + Send) -> f64 {
    let per_seq: Vec<f64> = data.par_iter().map(f).collect();
    per_seq.iter().sum::<f64>() / per_seq.len() as f64
}

/// Draws an unordered pair `(k, k + m)` uniformly among pairs with `m > gap`.
fn far_pair(rng: &mut SeededStream, len: usize, gap: usize) -> (usize, usize) {
    // Offsets m = len - j for j = 1..=J carry j pairs each, J = len - gap - 1.
    let big_j = (len - gap - 1) as u64;
    let total = big_j * (big_j + 1) / 2;
    let r = rng.index_u64(total);
    // smallest j with j (j + 1) / 2 > r
    let mut j = (((8.0 * r as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
    while j * (j + 1) / 2 <= r {
        j += 1;
    }
    while j > 1 && (j - 1) * j / 2 > r {
        j -= 1;
    }
    let m = len - j as usize;
    let k = rng.index(j as usize);
    (k, k + m)
}

/// Estimates `β` from seeded far pairs and the mean self-similarity.
pub fn background(data: &[SequenceSample], cfg: &MetricConfig, rng_seed: u64) -> Result<Background> {
    let min_len = check_data(data)?;
    if cfg.max_lag == 0 {
        return Err(Error::invalid("max_lag must be at least 1"));
    }
    let gap = cfg.resolve_gap(min_len);
    if gap <= cfg.max_lag {
        return Err(Error::invalid(format!(
            "gap {gap} must exceed the largest lag {} (sequences too short?)",
            cfg.max_lag
        )));
    }
    if min_len <= gap + 1 {
        return Err(Error::invalid(format!(
            "sequences of length {min_len} are too short for gap {gap}"
        )));
    }
    if cfg.far_pair_samples == 0 {
        return Err(Error::invalid("far_pair_samples must be at least 1"));
    }
    let mut rng = SeededStream::new(rng_seed, streams::METRIC_PAIRS);
    let mut sum = 0.0;
    for _ in 0..cfg.far_pair_samples {
        let seq = &data[rng.index(data.len())];
        let (k, k2) = far_pair(&mut rng, seq.len(), gap);
        sum += cfg.kernel.eval(&seq.tokens[k], &seq.tokens[k2]);
    }
    let beta = sum / cfg.far_pair_samples as f64;
    let self_similarity = mean_over_sequences(data, |s| {
        s.tokens.iter().map(|x| cfg.kernel.eval(x, x)).sum::<f64>() / s.len() as f64
    });
    Ok(Background {
        beta,
        self_similarity,
        gap,
    })
}

/// Mean lag-`t` similarity over all sequences and valid positions.
pub fn lag_similarity(data: &[SequenceSample], t: usize, kernel: Kernel) -> Result<f64> {
    let min_len = check_data(data)?;
    if t == 0 || t >= min_len {
        return Err(Error::invalid(format!("lag {t} outside 1..{min_len}")));
    }
    Ok(mean_over_sequences(data, |s| {
        let n = s.len() - t;
        (0..n).map(|k| kernel.eval(&s.tokens[k], &s.tokens[k + t])).sum::<f64>() / n as f64
    }))
}

fn normalized(lagged: f64, bg: &Background) -> Result<f64> {
    let den = bg.self_similarity - bg.beta;
    if den.abs() < 1e-9 {
        return Err(Error::DegenerateSimilarity(den.abs()));
    }
    Ok((lagged - bg.beta) / den)
}

/// `μ_t` for one lag.
pub fn mu_lag(data: &[SequenceSample], t: usize, cfg: &MetricConfig, rng_seed: u64) -> Result<f64> {
    let bg = background(data, cfg, rng_seed)?;
    normalized(lag_similarity(data, t, cfg.kernel)?, &bg)
}

/// Every `μ_t` for `t = 1..=max_lag` plus the weighted aggregate, with one
/// shared background estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricProfile {
    pub background: Background,
    pub mu_by_lag: Vec<f64>,
    pub total: f64,
}

pub fn mu_profile(data: &[SequenceSample], cfg: &MetricConfig, rng_seed: u64) -> Result<MetricProfile> {
    let weights = cfg.weights()?;
    let bg = background(data, cfg, rng_seed)?;
    let mu_by_lag = (1..=cfg.max_lag)
        .map(|t| normalized(lag_similarity(data, t, cfg.kernel)?, &bg))
        .collect::<Result<Vec<_>>>()?;
    let total = weights.iter().zip(&mu_by_lag).map(|(w, m)| w * m).sum();
    Ok(MetricProfile {
        background: bg,
        mu_by_lag,
        total,
    })
}

/// `Σ_t w_t μ_t`.
pub fn mu_aggregate(data: &[SequenceSample], cfg: &MetricConfig, rng_seed: u64) -> Result<f64> {
    mu_profile(data, cfg, rng_seed).map(|p| p.total)
}

/// Fixed random unit vector `v`, orthonormal basis `q_1..q_16`, and the 16
/// equal bins of `[-1, 1]` (left-closed, the last one closed at `1`).
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpec {
    v: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl EmbeddingSpec {
    pub fn new(v: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        if v.len() != EMBED_DIM || basis.len() != EMBED_DIM || basis.iter().any(|q| q.len() != EMBED_DIM) {
            return Err(Error::invalid(format!(
                "embedding needs {EMBED_DIM}-dimensional vectors"
            )));
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        if (dot(&v, &v).sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("v must be a unit vector"));
        }
        for i in 0..EMBED_DIM {
            for j in 0..=i {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(&basis[i], &basis[j]) - want).abs() > 1e-12 {
                    return Err(Error::invalid("basis is not orthonormal"));
                }
            }
        }
        Ok(Self { v, basis })
    }

    /// Gaussian unit vector and the Q factor of a Gaussian matrix.
    pub fn random(rng_seed: u64) -> Self {
        let mut rng = SeededStream::new(rng_seed, streams::EMBEDDING);
        let mut v: Vec<f64> = (0..EMBED_DIM).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let g = DMatrix::from_fn(EMBED_DIM, EMBED_DIM, |_, _| rng.normal());
        let q = g.qr().q();
        let basis = (0..EMBED_DIM).map(|j| q.column(j).iter().copied().collect()).collect();
        Self::new(v, basis).expect("QR factor is orthonormal")
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }
}

/// Zero-based bin of `u ∈ [-1, 1]`.
pub fn bin_index(u: f64) -> usize {
    let width = 2.0 / EMBED_DIM as f64;
    (((u + 1.0) / width).floor() as usize).min(EMBED_DIM - 1)
}

/// `η u v + (1 − η) q_{bin(u)}`.
pub fn embed(u: f64, eta: f64, spec: &EmbeddingSpec) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain {
            value: u,
            domain: "[-1, 1]",
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            value: eta,
            domain: "[0, 1]",
        });
    }
    let q = &spec.basis[bin_index(u)];
    Ok(spec
        .v
        .iter()
        .zip(q)
        .map(|(v, q)| eta * u * v + (1.0 - eta) * q)
        .collect())
}

/// Min-max normalizes a series to `[-1, 1]`; a constant series maps to zeros.
pub fn normalize_unit(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values
        .iter()
        .map(|&x| (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
        .collect()
}

pub fn embed_trajectory(traj: &Trajectory, eta: f64, spec: &EmbeddingSpec) -> Result<SequenceSample> {
    let tokens = normalize_unit(traj.values())
        .into_iter()
        .map(|u| embed(u, eta, spec))
        .collect::<Result<Vec<_>>>()?;
    SequenceSample::new(tokens)
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn alternating(len: usize) -> SequenceSample {
        let mut q1 = vec![0.0; 16];
        let mut q2 = vec![0.0; 16];
        q1[0] = 1.0;
        q2[1] = 1.0;
        SequenceSample::new(
            (0..len)
                .map(|k| if k % 2 == 0 { q1.clone() } else { q2.clone() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_kernel_examples() {
        let x = [1.0, 2.0, -0.5];
        assert_abs_diff_eq!(kernel_cosine(&x, &x), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel_cosine(&[1.0, 0.0], &[0.0, 3.0]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel_cosine(&x, &[-1.0, -2.0, 0.5]), 0.0, epsilon = 1e-15);
        assert_eq!(kernel_cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.5);
    }

    #[test]
    fn far_pairs_respect_gap_and_cover_range() {
        let mut rng = SeededStream::new(1, 0);
        let (len, gap) = (50, 40);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..20_000 {
            let (k, k2) = far_pair(&mut rng, len, gap);
            assert!(k2 < len && k2 - k > gap);
            seen.insert((k, k2));
        }
        // pairs with offset 41..=49: 9 + 8 + ... + 1
        assert_eq!(seen.len(), 45);
    }

    #[test]
    fn far_pairs_are_uniform() {
        let mut rng = SeededStream::new(2, 0);
        let (len, gap) = (12, 8);
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            *counts.entry(far_pair(&mut rng, len, gap)).or_insert(0usize) += 1;
        }
        let expected = draws as f64 / counts.len() as f64;
        assert_eq!(counts.len(), 6);
        for c in counts.values() {
            assert!((*c as f64 - expected).abs() < 5.0 * expected.sqrt());
        }
    }

    #[test]
    fn alternating_fixture() {
        let data = vec![alternating(2048)];
        let cfg = MetricConfig {
            max_lag: 2,
            gap: Some(64),
            far_pair_samples: 1_000_000,
            ..Default::default()
        };
        let profile = mu_profile(&data, &cfg, 3).unwrap();
        assert_abs_diff_eq!(profile.mu_by_lag[0], -1.0, epsilon = 0.02);
        assert_abs_diff_eq!(profile.mu_by_lag[1], 1.0, epsilon = 0.02);
        assert_abs_diff_eq!(profile.total, 0.0, epsilon = 0.02);
        let only_first = MetricConfig {
            weights: Some(vec![1.0, 0.0]),
            ..cfg.clone()
        };
        assert_eq!(
            mu_aggregate(&data, &only_first, 3).unwrap(),
            mu_lag(&data, 1, &cfg, 3).unwrap()
        );
    }

    #[test]
    fn constant_sequence_is_degenerate() {
        let data = vec![SequenceSample::new(vec![vec![1.0, 2.0]; 200]).unwrap()];
        assert!(matches!(
            mu_lag(&data, 1, &MetricConfig::default(), 0),
            Err(Error::DegenerateSimilarity(_))
        ));
    }

    #[test]
    fn iid_tokens_have_no_continuity() {
        let mut rng = SeededStream::new(10, 0);
        let tokens = (0..4096)
            .map(|_| (0..16).map(|_| rng.normal()).collect::<Vec<f64>>())
            .collect();
        let data = vec![SequenceSample::new(tokens).unwrap()];
        let mu1 = mu_lag(&data, 1, &MetricConfig::default(), 10).unwrap();
        assert!(mu1.abs() < 0.05, "{mu1}");
    }

    #[test]
    fn constant_lag_profile_aggregates_to_constant() {
        // all-orthogonal cyclic sequence: every lag < period has kernel 0.5
        let period = 16;
        let tokens = (0..1024)
            .map(|k| {
                let mut e = vec![0.0; 16];
                e[k % period] = 1.0;
                e
            })
            .collect();
        let data = vec![SequenceSample::new(tokens).unwrap()];
        let cfg = MetricConfig {
            max_lag: 4,
            ..Default::default()
        };
        let p = mu_profile(&data, &cfg, 1).unwrap();
        let c = p.mu_by_lag[0];
        assert!(p.mu_by_lag.iter().all(|m| (m - c).abs() < 1e-12));
        assert_abs_diff_eq!(p.total, c, epsilon = 1e-12);
    }

    #[test]
    fn scaling_invariance() {
        let spec = EmbeddingSpec::random(4);
        let traj = Trajectory::uniform(0.01, (0..800).map(|k| (k as f64 * 0.03).sin()).collect()).unwrap();
        let seq = embed_trajectory(&traj, 0.6, &spec).unwrap();
        let scaled = SequenceSample::new(
            seq.tokens()
                .iter()
                .map(|t| t.iter().map(|x| x * 7.3).collect())
                .collect(),
        )
        .unwrap();
        let cfg = MetricConfig::default();
        for t in [1, 5] {
            let a = mu_lag(std::slice::from_ref(&seq), t, &cfg, 2).unwrap();
            let b = mu_lag(std::slice::from_ref(&scaled), t, &cfg, 2).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn short_sequences_are_rejected() {
        let data = vec![alternating(18)];
        assert!(mu_lag(&data, 1, &MetricConfig::default(), 0).is_err());
        assert!(mu_lag(&[], 1, &MetricConfig::default(), 0).is_err());
    }

    #[test]
    fn embedding_spec_is_orthonormal() {
        let spec = EmbeddingSpec::random(99);
        assert!(EmbeddingSpec::new(spec.v().to_vec(), spec.basis().to_vec()).is_ok());
        let mut bad = spec.basis().to_vec();
        bad[0][0] += 1e-6;
        assert!(EmbeddingSpec::new(spec.v().to_vec(), bad).is_err());
    }

    #[test]
    fn embed_examples() {
        let spec = EmbeddingSpec::random(1);
        assert!(embed(0.0, 1.0, &spec).unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(embed(-1.0, 0.0, &spec).unwrap(), spec.basis()[0]);
        assert_eq!(embed(1.0, 0.0, &spec).unwrap(), spec.basis()[15]);
        let got = embed(0.3, 0.5, &spec).unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(got[i], 0.15 * spec.v()[i] + 0.5 * spec.basis()[10][i], epsilon = 1e-15);
        }
        assert!(embed(1.1, 0.5, &spec).is_err());
        assert!(embed(0.0, 1.5, &spec).is_err());
    }

    #[test]
    fn bin_boundaries() {
        assert_eq!(bin_index(-1.0), 0);
        assert_eq!(bin_index(-0.875), 1);
        assert_eq!(bin_index(0.0), 8);
        assert_eq!(bin_index(0.3), 10);
        assert_eq!(bin_index(0.999), 15);
        assert_eq!(bin_index(1.0), 15);
    }

    #[test]
    fn embed_is_linear_in_eta() {
        let spec = EmbeddingSpec::random(5);
        for &u in &[-0.7, 0.0, 0.42, 1.0] {
            let e0 = embed(u, 0.0, &spec).unwrap();
            let e1 = embed(u, 1.0, &spec).unwrap();
            for &eta in &[0.1, 0.5, 0.9] {
                let e = embed(u, eta, &spec).unwrap();
                for i in 0..16 {
                    assert_abs_diff_eq!(e[i], eta * e1[i] + (1.0 - eta) * e0[i], epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn embed_trajectory_examples() {
        let spec = EmbeddingSpec::random(6);
        let flat = Trajectory::uniform(0.1, vec![3.0; 10]).unwrap();
        let seq = embed_trajectory(&flat, 0.0, &spec).unwrap();
        assert!(seq.tokens().iter().all(|t| t == &spec.basis()[8]));

        let traj = Trajectory::uniform(0.1, vec![2.0, -4.0, 0.5, 6.0]).unwrap();
        let seq = embed_trajectory(&traj, 1.0, &spec).unwrap();
        let norm = normalize_unit(traj.values());
        assert_eq!(norm[1], -1.0);
        assert_eq!(norm[3], 1.0);
        for (tok, u) in seq.tokens().iter().zip(&norm) {
            for i in 0..16 {
                assert_abs_diff_eq!(tok[i], u * spec.v()[i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn spearman_examples() {
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.0]).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }
}
