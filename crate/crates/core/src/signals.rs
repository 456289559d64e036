//! Smooth random inputs on `[0, 1]` and their zero-order holds.
//!
//! A [`ChebyshevSignal`] is `u(t) = scale * sum_{j=1..20} C_j T_j(2t - 1)`,
//! i.e. a shifted Chebyshev expansion with no constant term.

use crate::rng::{streams, SeededStream};
use crate::{Error, Result};

/// Number of Chebyshev terms in a random input.
pub const N_TERMS: usize = 20;

/// Grid used for Lipschitz and amplitude estimates: `2^14 + 1` points.
pub const SCAN_POINTS: usize = (1 << 14) + 1;

/// Multiplicative margin on grid-estimated suprema.
pub const SAFETY: f64 = 1.01;

/// A scalar input evaluable anywhere on `[0, 1]`.
///
/// `value_before` is the left limit at `t`. Continuous signals use the
/// default; piecewise-constant signals override it so that a solver step
/// ending exactly on a breakpoint still sees the value held over that step.
pub trait Signal: Sync {
    fn value(&self, t: f64) -> f64;

    fn value_before(&self, t: f64) -> f64 {
        self.value(t)
    }
}

impl<F: Fn(f64) -> f64 + Sync> Signal for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSignal {
    coeffs: Vec<f64>,
    scale: f64,
}

impl ChebyshevSignal {
    /// `coeffs[j - 1]` multiplies `T_j`, for `j = 1..=20`.
    pub fn new(coeffs: Vec<f64>, scale: f64) -> Result<Self> {
        if coeffs.len() != N_TERMS {
            return Err(Error::invalid(format!(
                "expected {N_TERMS} Chebyshev coefficients, got {}",
                coeffs.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("signal scale must be positive and finite"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite Chebyshev coefficient"));
        }
        Ok(Self { coeffs, scale })
    }

    /// Only `C_j = 1`, all other coefficients zero.
    pub fn unit(j: usize) -> Result<Self> {
        if !(1..=N_TERMS).contains(&j) {
            return Err(Error::invalid(format!("Chebyshev index {j} outside 1..={N_TERMS}")));
        }
        let mut coeffs = vec![0.0; N_TERMS];
        coeffs[j - 1] = 1.0;
        Self::new(coeffs, 1.0)
    }

    /// Twenty i.i.d. standard-normal coefficients, scale 1.
    pub fn sample(rng: &mut SeededStream) -> Self {
        let coeffs = (0..N_TERMS).map(|_| rng.normal()).collect();
        Self { coeffs, scale: 1.0 }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Returns a copy with the scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            scale: self.scale * factor,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        let s = 2.0 * t - 1.0;
        let (mut prev, mut cur) = (1.0, s);
        let mut sum = 0.0;
        for &c in &self.coeffs {
            sum += c * cur;
            let next = 2.0 * s * cur - prev;
            prev = cur;
            cur = next;
        }
        self.scale * sum
    }

    /// `du/dt`, using `T_j'(s) = j U_{j-1}(s)` and `ds/dt = 2`.
    pub fn derivative(&self, t: f64) -> f64 {
        let s = 2.0 * t - 1.0;
        let (mut prev, mut cur) = (0.0, 1.0); // U_{-1}, U_0
        let mut sum = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            sum += c * (i + 1) as f64 * cur;
            let next = 2.0 * s * cur - prev;
            prev = cur;
            cur = next;
        }
        2.0 * self.scale * sum
    }

    /// Grid estimate of the Lipschitz constant, with a 1% margin.
    pub fn lipschitz_bound(&self) -> f64 {
        SAFETY * grid_max(SCAN_POINTS, |t| self.derivative(t).abs())
    }

    /// Grid estimate of `sup |u(t)|`, with a 1% margin.
    pub fn amplitude_bound(&self) -> f64 {
        SAFETY * grid_max(SCAN_POINTS, |t| self.eval_unchecked(t).abs())
    }

    /// The piecewise-constant hold `v(t) = u(tau * floor(t / tau))`.
    pub fn hold(&self, tau: f64) -> Result<HeldSignal> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::invalid(format!("hold step {tau} outside (0, 1]")));
        }
        Ok(HeldSignal {
            base: self.clone(),
            tau,
        })
    }
}

impl Signal for ChebyshevSignal {
    fn value(&self, t: f64) -> f64 {
        self.eval_unchecked(t.clamp(0.0, 1.0))
    }
}

/// Draws a signal from the dedicated signal stream of `seed`.
pub fn sample_signal(seed: u64) -> ChebyshevSignal {
    ChebyshevSignal::sample(&mut SeededStream::new(seed, streams::SIGNAL))
}

pub(crate) fn grid_max(points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let last = (points - 1) as f64;
    (0..points).map(|i| f(i as f64 / last)).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct HeldSignal {
    base: ChebyshevSignal,
    tau: f64,
}

impl HeldSignal {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Index of the hold interval containing `t`, snapping to breakpoints
    /// within a relative `1e-9` so that `k * tau` lands on interval `k`.
    fn interval(&self, t: f64) -> (f64, bool) {
        let q = t / self.tau;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * r.abs().max(1.0) {
            (r, true)
        } else {
            (q.floor(), false)
        }
    }
}

impl Signal for HeldSignal {
    fn value(&self, t: f64) -> f64 {
        let (k, _) = self.interval(t);
        self.base.value(k * self.tau)
    }

    fn value_before(&self, t: f64) -> f64 {
        match self.interval(t) {
            (k, true) if k > 0.0 => self.base.value((k - 1.0) * self.tau),
            (k, _) => self.base.value(k * self.tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_signals() {
        let t1 = ChebyshevSignal::unit(1).unwrap();
        assert_abs_diff_eq!(t1.eval(0.75).unwrap(), 0.5, epsilon = 1e-15);
        let t2 = ChebyshevSignal::unit(2).unwrap();
        assert_abs_diff_eq!(t2.eval(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(t1.eval(1.5).is_err());
        assert!(t1.eval(-0.1).is_err());
    }

    #[test]
    fn matches_trigonometric_form() {
        let sig = sample_signal(3);
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let s: f64 = 2.0 * t - 1.0;
            let direct: f64 = sig
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * s.acos()).cos())
                .sum();
            assert_abs_diff_eq!(sig.eval(t).unwrap(), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_signal(11), sample_signal(11));
        assert_ne!(sample_signal(11).coeffs(), sample_signal(12).coeffs());
    }

    #[test]
    fn coefficient_statistics() {
        let n = 10_000;
        let c1: Vec<f64> = (0..n).map(|s| sample_signal(s).coeffs()[0]).collect();
        let mean = c1.iter().sum::<f64>() / n as f64;
        let var = c1.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let sig = sample_signal(5);
        let h = 1e-6;
        for i in 1..50 {
            let t = i as f64 / 50.0;
            let fd = (sig.value(t + h) - sig.value(t - h)) / (2.0 * h);
            let d = sig.derivative(t);
            assert!((fd - d).abs() <= 1e-5 * d.abs().max(1.0), "{t}: {fd} vs {d}");
        }
    }

    #[test]
    fn lipschitz_examples() {
        let t1 = ChebyshevSignal::unit(1).unwrap();
        assert_abs_diff_eq!(t1.lipschitz_bound(), 2.02, epsilon = 1e-12);
        let sig = sample_signal(9);
        assert_eq!(sig.scaled(32.0).lipschitz_bound(), 32.0 * sig.lipschitz_bound());
    }

    #[test]
    fn lipschitz_grid_is_converged() {
        let sig = sample_signal(21);
        let coarse = grid_max(SCAN_POINTS, |t| sig.derivative(t).abs());
        let fine = grid_max(10 * (SCAN_POINTS - 1) + 1, |t| sig.derivative(t).abs());
        assert!((fine - coarse).abs() <= 0.01 * fine, "{coarse} vs {fine}");
        assert!(sig.lipschitz_bound() >= fine);
    }

    #[test]
    fn hold_examples() {
        let sig = sample_signal(2);
        let tau = 0.125;
        let held = sig.hold(tau).unwrap();
        for &t in &[0.0, 0.01, 0.1, 0.124] {
            assert_eq!(held.value(t), sig.eval(0.0).unwrap());
        }
        let whole = sig.hold(1.0).unwrap();
        assert_eq!(whole.value(0.7), sig.eval(0.0).unwrap());
        assert_eq!(held.value_before(0.25), sig.eval(0.125).unwrap());
        assert_eq!(held.value(0.25), sig.eval(0.25).unwrap());
    }

    #[test]
    fn hold_error_within_lipschitz_bound() {
        let sig = sample_signal(4);
        let lu = sig.lipschitz_bound();
        let tau = 1.0 / 64.0;
        let held = sig.hold(tau).unwrap();
        let mut rng = SeededStream::new(4, 99);
        for _ in 0..1000 {
            let t = rng.uniform();
            assert!((sig.value(t) - held.value(t)).abs() <= lu * tau);
        }
    }

    proptest! {
        #[test]
        fn eval_is_linear_in_scale(seed in 0u64..1000, c in 0.1f64..50.0, t in 0.0f64..=1.0) {
            let sig = sample_signal(seed);
            let lhs = sig.scaled(c).eval(t).unwrap();
            let rhs = c * sig.eval(t).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn hold_reproduces_grid_points(seed in 0u64..1000, exp in 1i32..10, k in 0usize..1024) {
            let tau = 2f64.powi(-exp);
            let k = k % ((1usize << exp) + 1);
            let sig = sample_signal(seed);
            let held = sig.hold(tau).unwrap();
            let t = k as f64 * tau;
            prop_assert_eq!(held.value(t), sig.eval(t).unwrap());
        }

        #[test]
        fn lipschitz_dominates_secants(seed in 0u64..200, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            prop_assume!((t1 - t2).abs() > 1e-9);
            let sig = sample_signal(seed);
            let secant = (sig.value(t1) - sig.value(t2)).abs() / (t1 - t2).abs();
            prop_assert!(secant <= sig.lipschitz_bound());
        }
    }
}
