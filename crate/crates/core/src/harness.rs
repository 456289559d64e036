//! Refinement study: discretization error against a fine RK4 reference,
//! first-order error bounds, and fitted convergence orders.

use rayon::prelude::*;

use crate::fmt::sig17;
use crate::rng::{streams, SeededStream};
use crate::signals::{ChebyshevSignal, Signal};
use crate::ssm::{
    discretize, run_discrete, sample_at, simulate_continuous, softplus, ContinuousSsm, Flavor, Method, StepSize,
    Trajectory,
};
use crate::{Error, Result};

/// Lipschitz constants and maximum moduli entering the first-order bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub l_u: f64,
    pub l_b: f64,
    pub l_c: f64,
    pub l_delta: f64,
    pub m_u: f64,
    pub m_b: f64,
    pub m_c: f64,
    pub m_delta: f64,
    pub a_norm: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.l_u,
            self.l_b,
            self.l_c,
            self.l_delta,
            self.m_u,
            self.m_b,
            self.m_c,
            self.m_delta,
            self.a_norm,
        ];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("bound inputs must be finite and nonnegative"));
        }
        if self.m_delta <= 0.0 || self.a_norm <= 0.0 {
            return Err(Error::invalid("m_delta and a_norm must be positive"));
        }
        Ok(())
    }
}

/// `(e^x − 1) / x`, accurate near zero.
fn expm1_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x / 2.0
    } else {
        x.exp_m1() / x
    }
}

/// Coefficient of `τ` in the general first-order bound:
///
/// ```text
/// M_C [M_Δ (L_B M_u + M_B) L_u + L_Δ L_u M_B M_u e^{M_Δ‖A‖}] / (M_Δ‖A‖) · (e^{M_Δ‖A‖} − 1)
/// ```
///
/// Large exponents overflow to `inf`, which is still a valid bound.
pub fn bound_general(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let x = inp.m_delta * inp.a_norm;
    let bracket =
        inp.m_delta * (inp.l_b * inp.m_u + inp.m_b) * inp.l_u + inp.l_delta * inp.l_u * inp.m_b * inp.m_u * x.exp();
    if bracket == 0.0 || inp.m_c == 0.0 {
        return Ok(0.0);
    }
    Ok(inp.m_c * bracket * expm1_ratio(x))
}

/// `‖C‖‖B‖ L_u (e^{Δ‖A‖} − 1) / ‖A‖`.
pub fn s4_coefficient(b_norm: f64, c_norm: f64, delta: f64, a_norm: f64, l_u: f64) -> f64 {
    let x = delta * a_norm;
    c_norm * b_norm * l_u * delta * expm1_ratio(x)
}

/// `‖W_C‖‖W_B‖ M_u² L_u (2M_Δ + |w| M_u e^{M_Δ‖A‖}) / (M_Δ‖A‖) · (e^{M_Δ‖A‖} − 1)`
/// with `M_Δ = softplus(|w| M_u + b_Δ)`.
pub fn s6_coefficient(wb_norm: f64, wc_norm: f64, w: f64, b_delta: f64, a_norm: f64, l_u: f64, m_u: f64) -> f64 {
    let m_delta = softplus(w.abs() * m_u + b_delta);
    let x = m_delta * a_norm;
    if m_u == 0.0 || l_u == 0.0 {
        return 0.0;
    }
    wc_norm * wb_norm * m_u * m_u * l_u * (2.0 * m_delta + w.abs() * m_u * x.exp()) * expm1_ratio(x)
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and nonnegative")))
    }
}

pub fn bound_s4(sys: &ContinuousSsm, l_u: f64) -> Result<f64> {
    check_nonnegative("l_u", l_u)?;
    match sys.step() {
        StepSize::Constant(delta) => Ok(s4_coefficient(sys.b_norm(), sys.c_norm(), delta, sys.a_norm(), l_u)),
        StepSize::Selective { .. } => Err(Error::WrongFlavor { expected: "S4" }),
    }
}

pub fn bound_s6(sys: &ContinuousSsm, l_u: f64, m_u: f64) -> Result<f64> {
    check_nonnegative("l_u", l_u)?;
    check_nonnegative("m_u", m_u)?;
    match sys.step() {
        StepSize::Selective { w, b } => Ok(s6_coefficient(sys.b_norm(), sys.c_norm(), w, b, sys.a_norm(), l_u, m_u)),
        StepSize::Constant(_) => Err(Error::WrongFlavor { expected: "S6" }),
    }
}

fn check_pair(y_disc: &[f64], y_ref: &[f64]) -> Result<()> {
    if y_disc.len() != y_ref.len() {
        return Err(Error::LengthMismatch {
            expected: y_ref.len(),
            actual: y_disc.len(),
        });
    }
    if y_ref.is_empty() {
        return Err(Error::invalid("sequences are empty"));
    }
    Ok(())
}

/// `max_{k≥1} |y_disc[k] − y_ref[k]|`.
pub fn abs_max_error(y_disc: &[f64], y_ref: &[f64]) -> Result<f64> {
    check_pair(y_disc, y_ref)?;
    Ok(y_disc
        .iter()
        .zip(y_ref)
        .skip(1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `max_{k≥1} |y_disc[k] − y_ref[k]| / max_{k≥1} |y_ref[k]|`.
pub fn rel_max_error(y_disc: &[f64], y_ref: &[f64]) -> Result<f64> {
    let num = abs_max_error(y_disc, y_ref)?;
    let den = y_ref.iter().skip(1).map(|y| y.abs()).fold(0.0, f64::max);
    if !(den > 0.0) {
        return Err(Error::DegenerateReference);
    }
    Ok(num / den)
}

/// Least-squares slope of `ln(error)` against `ln(τ)`.
pub fn fit_order(taus: &[f64], errors: &[f64]) -> Result<f64> {
    if taus.len() != errors.len() {
        return Err(Error::LengthMismatch {
            expected: taus.len(),
            actual: errors.len(),
        });
    }
    let mut distinct = taus.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: distinct.len(),
        });
    }
    if taus.iter().chain(errors).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("step sizes and errors must be positive and finite"));
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

/// Samples `u(τ k)` for `k = 0..=⌊1/τ⌋`.
pub fn grid_samples(u: &dyn Signal, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = (1.0 / tau + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * tau).collect();
    let values = times.iter().map(|&t| u.value(t)).collect();
    (times, values)
}

/// Discrete output along the grid of step `tau` together with the reference
/// sampled at the same timestamps.
pub fn compare_on_grid(
    sys: &ContinuousSsm,
    u: &dyn Signal,
    reference: &Trajectory,
    tau: f64,
    method: Method,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (times, samples) = grid_samples(u, tau);
    let dsys = discretize(sys, &samples, tau, method)?;
    let y = run_discrete(&dsys, &samples)?.into_values();
    let y_ref = sample_at(reference, &times)?;
    Ok((y, y_ref))
}

pub const REF_TAU: f64 = 1.0 / 16384.0;

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub n_pairs: usize,
    pub taus: Vec<f64>,
    pub scales: Vec<f64>,
    pub methods: Vec<Method>,
    pub n_states: usize,
    pub tau_ref: f64,
    pub seed: u64,
}

impl StudyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n_pairs: 20,
            taus: (2..=10).rev().map(|e| 2f64.powi(-e)).collect(),
            scales: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            methods: vec![Method::Zoh, Method::Bilinear],
            n_states: 8,
            tau_ref: REF_TAU,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::invalid("n_pairs must be at least 1"));
        }
        if self.taus.is_empty() || self.scales.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid("taus, scales and methods must be nonempty"));
        }
        if self.n_states == 0 {
            return Err(Error::invalid("n_states must be at least 1"));
        }
        if !(self.tau_ref > 0.0 && self.tau_ref <= 1.0) {
            return Err(Error::invalid("tau_ref must lie in (0, 1]"));
        }
        for &tau in &self.taus {
            let ratio = tau / self.tau_ref;
            if !(tau > 0.0 && tau <= 1.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                return Err(Error::invalid(format!(
                    "tau {tau} is not a multiple of the reference step {}",
                    self.tau_ref
                )));
            }
        }
        if self.scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("scales must be positive and finite"));
        }
        Ok(())
    }
}

/// The random S4/S6 pair and input for one study index.
pub fn study_case(seed: u64, pair: usize, n_states: usize) -> Result<(ContinuousSsm, ContinuousSsm, ChebyshevSignal)> {
    let mut sys_rng = SeededStream::new(seed, streams::SYSTEM + pair as u64);
    let (s4, s6) = ContinuousSsm::sample_pair(&mut sys_rng, n_states)?;
    let mut sig_rng = SeededStream::new(seed, streams::SIGNAL + pair as u64);
    Ok((s4, s6, ChebyshevSignal::sample(&mut sig_rng)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub pair_id: usize,
    pub flavor: Flavor,
    pub method: Method,
    pub tau: f64,
    pub scale: f64,
    pub rel_max_error: f64,
    pub abs_max_error: f64,
    /// Bound coefficient times `τ`.
    pub bound: f64,
    /// Records sharing this id differ only in `τ`.
    pub order_fit_group: usize,
    /// Set when the reference or discrete run diverged; error fields are NaN.
    pub diverged: bool,
}

pub const CSV_HEADER: &str = "pair_id,flavor,method,tau,scale,rel_max_error,abs_max_error,bound,order_fit_group";

impl ConvergenceRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.pair_id,
            self.flavor.name(),
            self.method.name(),
            sig17(self.tau),
            sig17(self.scale),
            sig17(self.rel_max_error),
            sig17(self.abs_max_error),
            sig17(self.bound),
            self.order_fit_group
        )
    }
}

fn flavor_index(f: Flavor) -> usize {
    match f {
        Flavor::S4 => 0,
        Flavor::S6 => 1,
    }
}

fn method_index(m: Method) -> usize {
    match m {
        Method::Zoh => 0,
        Method::Bilinear => 1,
    }
}

fn run_pair(cfg: &StudyConfig, pair: usize) -> Result<Vec<ConvergenceRecord>> {
    let (s4, s6, base) = study_case(cfg.seed, pair, cfg.n_states)?;
    let mut out = Vec::new();
    for sys in [&s4, &s6] {
        let flavor = sys.flavor();
        for (si, &scale) in cfg.scales.iter().enumerate() {
            let u = base.scaled(scale);
            let l_u = u.lipschitz_bound();
            let coeff = match flavor {
                Flavor::S4 => bound_s4(sys, l_u)?,
                Flavor::S6 => bound_s6(sys, l_u, u.amplitude_bound())?,
            };
            let reference = match simulate_continuous(sys, &u, cfg.tau_ref) {
                Ok(r) => Some(r),
                Err(Error::Divergence { .. }) => None,
                Err(e) => return Err(e),
            };
            for &method in &cfg.methods {
                let group = ((pair * 2 + flavor_index(flavor)) * 2 + method_index(method)) * cfg.scales.len() + si;
                for &tau in &cfg.taus {
                    let errors = match &reference {
                        Some(r) => {
                            let (y, y_ref) = compare_on_grid(sys, &u, r, tau, method)?;
                            if y.iter().all(|v| v.is_finite()) {
                                Some((rel_max_error(&y, &y_ref)?, abs_max_error(&y, &y_ref)?))
                            } else {
                                None
                            }
                        }
                        None => None,
                    };
                    let (rel, abs) = errors.unwrap_or((f64::NAN, f64::NAN));
                    out.push(ConvergenceRecord {
                        pair_id: pair,
                        flavor,
                        method,
                        tau,
                        scale,
                        rel_max_error: rel,
                        abs_max_error: abs,
                        bound: coeff * tau,
                        order_fit_group: group,
                        diverged: errors.is_none(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Runs every (pair, flavor, method, τ, scale) combination. Rows are sorted
/// by pair, flavor, method, ascending τ and scale regardless of thread count.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let per_pair = (0..cfg.n_pairs)
        .into_par_iter()
        .map(|p| run_pair(cfg, p))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRecord> = per_pair.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.pair_id, flavor_index(a.flavor), method_index(a.method))
            .cmp(&(b.pair_id, flavor_index(b.flavor), method_index(b.method)))
            .then(a.tau.total_cmp(&b.tau))
            .then(a.scale.total_cmp(&b.scale))
    });
    Ok(rows)
}

pub fn write_csv(records: &[ConvergenceRecord], mut w: impl std::io::Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Median relative error over non-diverged pairs for one configuration.
pub fn median_error(
    records: &[ConvergenceRecord],
    flavor: Flavor,
    method: Method,
    tau: f64,
    scale: f64,
) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| !r.diverged && r.flavor == flavor && r.method == method && r.tau == tau && r.scale == scale)
        .map(|r| r.rel_max_error)
        .collect();
    median(&mut v)
}

/// Fitted order per `order_fit_group`, restricted to `τ` within `[tau_min, tau_max]`.
/// Groups with diverged rows are skipped.
pub fn fit_orders(records: &[ConvergenceRecord], tau_min: f64, tau_max: f64) -> Vec<(usize, Result<f64>)> {
    let mut groups: std::collections::BTreeMap<usize, (Vec<f64>, Vec<f64>, bool)> = Default::default();
    for r in records.iter().filter(|r| r.tau >= tau_min && r.tau <= tau_max) {
        let g = groups.entry(r.order_fit_group).or_default();
        g.0.push(r.tau);
        g.1.push(r.rel_max_error);
        g.2 |= r.diverged;
    }
    groups
        .into_iter()
        .filter(|(_, (_, _, div))| !div)
        .map(|(id, (t, e, _))| (id, fit_order(&t, &e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssm::C64;
    use approx::assert_abs_diff_eq;

    fn unit_s4(delta: f64) -> ContinuousSsm {
        let one = C64::new(1.0, 0.0);
        ContinuousSsm::s4(vec![C64::new(-1.0, 0.0)], vec![one], vec![one], 0.0, delta).unwrap()
    }

    #[test]
    fn rel_error_examples() {
        let y = [0.0, 1.0, -2.0, 3.0];
        assert_eq!(rel_max_error(&y, &y).unwrap(), 0.0);
        let scaled: Vec<f64> = y.iter().map(|v| 1.1 * v).collect();
        assert_abs_diff_eq!(rel_max_error(&scaled, &y).unwrap(), 0.1, epsilon = 1e-12);
        // index 0 does not count
        assert_eq!(abs_max_error(&[5.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            rel_max_error(&[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::DegenerateReference)
        ));
        assert!(rel_max_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rel_error_matches_two_pass_scan() {
        let mut rng = SeededStream::new(8, 0);
        let a: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let mut num: f64 = 0.0;
        for k in 1..a.len() {
            num = num.max((a[k] - b[k]).abs());
        }
        let mut den: f64 = 0.0;
        for k in 1..b.len() {
            den = den.max(b[k].abs());
        }
        assert_eq!(rel_max_error(&a, &b).unwrap(), num / den);
    }

    #[test]
    fn general_bound_examples() {
        let s4_style = BoundInputs {
            l_u: 1.0,
            l_b: 0.0,
            l_c: 0.0,
            l_delta: 0.0,
            m_u: 3.0,
            m_b: 1.0,
            m_c: 1.0,
            m_delta: 1.0,
            a_norm: 1.0,
        };
        assert_abs_diff_eq!(
            bound_general(&s4_style).unwrap(),
            std::f64::consts::E - 1.0,
            epsilon = 1e-12
        );
        assert_eq!(bound_general(&BoundInputs { l_u: 0.0, ..s4_style }).unwrap(), 0.0);

        let g = BoundInputs {
            l_u: 1.7,
            l_b: 0.4,
            l_c: 2.0,
            l_delta: 0.3,
            m_u: 2.5,
            m_b: 1.2,
            m_c: 0.8,
            m_delta: 0.6,
            a_norm: 2.2,
        };
        let e = (0.6f64 * 2.2).exp();
        let oracle = 0.8 * (0.6 * (0.4 * 2.5 + 1.2) * 1.7 + 0.3 * 1.7 * 1.2 * 2.5 * e) / (0.6 * 2.2) * (e - 1.0);
        assert_abs_diff_eq!(bound_general(&g).unwrap(), oracle, epsilon = 1e-12 * oracle);
        assert!(bound_general(&BoundInputs { a_norm: 0.0, ..g }).is_err());
        assert!(bound_general(&BoundInputs { l_b: -1.0, ..g }).is_err());
    }

    #[test]
    fn s4_bound_examples() {
        let sys = unit_s4(1.0);
        assert_abs_diff_eq!(bound_s4(&sys, 1.0).unwrap(), std::f64::consts::E - 1.0, epsilon = 1e-12);
        assert_eq!(bound_s4(&sys, 2.0).unwrap(), 2.0 * bound_s4(&sys, 1.0).unwrap());
        assert!(matches!(bound_s6(&sys, 1.0, 1.0), Err(Error::WrongFlavor { .. })));
    }

    #[test]
    fn s4_bound_reduces_to_general() {
        let mut rng = SeededStream::new(3, 0);
        let (s4, _) = ContinuousSsm::sample_pair(&mut rng, 8).unwrap();
        let got = bound_s4(&s4, 2.5).unwrap();
        let want = bound_general(&BoundInputs {
            l_u: 2.5,
            l_b: 0.0,
            l_c: 0.0,
            l_delta: 0.0,
            m_u: 1.0,
            m_b: s4.b_norm(),
            m_c: s4.c_norm(),
            m_delta: 0.01,
            a_norm: s4.a_norm(),
        })
        .unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-12 * want);
    }

    #[test]
    fn s6_bound_reduction_without_selectivity() {
        let mut rng = SeededStream::new(4, 0);
        let (s4, _) = ContinuousSsm::sample_pair(&mut rng, 8).unwrap();
        let b_delta = 0.3;
        let s6 = ContinuousSsm::s6(s4.a().to_vec(), s4.b().to_vec(), s4.c().to_vec(), 0.0, 0.0, b_delta).unwrap();
        let (l_u, m_u) = (1.5, 2.0);
        let got = bound_s6(&s6, l_u, m_u).unwrap();
        let delta = softplus(b_delta);
        // B(u) = b u has L_B = ‖b‖, M_B = ‖b‖ M_u; likewise C; Δ constant.
        let general = bound_general(&BoundInputs {
            l_u,
            l_b: s6.b_norm(),
            l_c: s6.c_norm(),
            l_delta: 0.0,
            m_u,
            m_b: s6.b_norm() * m_u,
            m_c: s6.c_norm() * m_u,
            m_delta: delta,
            a_norm: s6.a_norm(),
        })
        .unwrap();
        assert_abs_diff_eq!(got, general, epsilon = 1e-12 * general);
        let s4_style = s4_coefficient(s6.b_norm(), s6.c_norm(), delta, s6.a_norm(), l_u);
        assert_abs_diff_eq!(got, 2.0 * s4_style * m_u * m_u, epsilon = 1e-12 * got);
        assert_eq!(bound_s6(&s6, l_u, 0.0).unwrap(), 0.0);
        assert!(matches!(bound_s4(&s6, 1.0), Err(Error::WrongFlavor { .. })));
    }

    #[test]
    fn s6_bound_monotone_in_amplitude() {
        let mut rng = SeededStream::new(5, 0);
        let (_, s6) = ContinuousSsm::sample_pair(&mut rng, 8).unwrap();
        let mut prev = 0.0;
        for k in 0..6 {
            let b = bound_s6(&s6, 1.0, 2f64.powi(k)).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn fit_order_examples() {
        let taus: Vec<f64> = (2..8).map(|e| 2f64.powi(-e)).collect();
        let lin: Vec<f64> = taus.iter().map(|t| 3.0 * t).collect();
        let quad: Vec<f64> = taus.iter().map(|t| 0.5 * t * t).collect();
        assert_abs_diff_eq!(fit_order(&taus, &lin).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit_order(&taus, &quad).unwrap(), 2.0, epsilon = 1e-9);
        assert!(matches!(
            fit_order(&[0.1, 0.1, 0.2], &[1.0, 1.0, 2.0]),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn study_row_count_and_order() {
        let cfg = StudyConfig {
            n_pairs: 2,
            taus: vec![0.25, 0.125, 1.0 / 64.0],
            scales: vec![1.0, 4.0],
            tau_ref: 1.0 / 1024.0,
            ..StudyConfig::new(11)
        };
        let rows = run_convergence_study(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 3 * 2);
        assert!(rows.windows(2).all(|w| {
            let key = |r: &ConvergenceRecord| (r.pair_id, flavor_index(r.flavor), method_index(r.method));
            key(&w[0]) < key(&w[1])
                || (key(&w[0]) == key(&w[1])
                    && (w[0].tau < w[1].tau || (w[0].tau == w[1].tau && w[0].scale < w[1].scale)))
        }));
        let groups: std::collections::BTreeSet<usize> = rows.iter().map(|r| r.order_fit_group).collect();
        assert_eq!(groups.len(), 2 * 2 * 2 * 2);
    }

    #[test]
    fn off_grid_tau_is_rejected() {
        let cfg = StudyConfig {
            taus: vec![0.3],
            ..StudyConfig::new(0)
        };
        assert!(run_convergence_study(&cfg).is_err());
        assert!(StudyConfig {
            n_pairs: 0,
            ..StudyConfig::new(0)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
