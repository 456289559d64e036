//! Trajectory generators for four benchmark dynamical systems.
//!
//! Deterministic systems are integrated with RK4 at `tau0 / 10` and emitted
//! every `tau0`; the Ornstein-Uhlenbeck process uses exponential
//! Euler-Maruyama (exact drift propagation `x e^{-θh}` plus a `σ √h` Gaussian
//! increment) at the same internal step. Only the position coordinate is
//! emitted.

use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use crate::fmt::sig17;
use crate::rng::{streams, SeededStream};
use crate::ssm::Trajectory;
use crate::{Error, Result};

/// Internal integration steps per emitted sample.
pub const SUBSTEPS: usize = 10;

const MAX_ATTEMPTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    VanDerPol,
    DampedHarmonic,
    OrnsteinUhlenbeck,
    ForcedDuffing,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::VanDerPol,
        SystemKind::DampedHarmonic,
        SystemKind::OrnsteinUhlenbeck,
        SystemKind::ForcedDuffing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::VanDerPol => "vdp",
            SystemKind::DampedHarmonic => "harmonic",
            SystemKind::OrnsteinUhlenbeck => "ou",
            SystemKind::ForcedDuffing => "duffing",
        }
    }

    fn index(self) -> u64 {
        match self {
            SystemKind::VanDerPol => 0,
            SystemKind::DampedHarmonic => 1,
            SystemKind::OrnsteinUhlenbeck => 2,
            SystemKind::ForcedDuffing => 3,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vdp" | "vanderpol" => Ok(SystemKind::VanDerPol),
            "harmonic" | "damped-harmonic" => Ok(SystemKind::DampedHarmonic),
            "ou" => Ok(SystemKind::OrnsteinUhlenbeck),
            "duffing" => Ok(SystemKind::ForcedDuffing),
            other => Err(Error::invalid(format!("unknown system kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemParams {
    VanDerPol {
        mu: f64,
    },
    DampedHarmonic {
        omega: f64,
        zeta: f64,
    },
    OrnsteinUhlenbeck {
        theta: f64,
        sigma: f64,
    },
    ForcedDuffing {
        delta: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        omega: f64,
    },
}

impl SystemParams {
    pub fn kind(&self) -> SystemKind {
        match self {
            SystemParams::VanDerPol { .. } => SystemKind::VanDerPol,
            SystemParams::DampedHarmonic { .. } => SystemKind::DampedHarmonic,
            SystemParams::OrnsteinUhlenbeck { .. } => SystemKind::OrnsteinUhlenbeck,
            SystemParams::ForcedDuffing { .. } => SystemKind::ForcedDuffing,
        }
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        match *self {
            SystemParams::VanDerPol { mu } => vec![("mu", mu)],
            SystemParams::DampedHarmonic { omega, zeta } => vec![("omega", omega), ("zeta", zeta)],
            SystemParams::OrnsteinUhlenbeck { theta, sigma } => vec![("theta", theta), ("sigma", sigma)],
            SystemParams::ForcedDuffing {
                delta,
                alpha,
                beta,
                gamma,
                omega,
            } => vec![
                ("delta", delta),
                ("alpha", alpha),
                ("beta", beta),
                ("gamma", gamma),
                ("omega", omega),
            ],
        }
    }

    /// Compact `key=value;key=value` form.
    pub fn to_kv_string(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k}={}", sig17(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SystemParams::VanDerPol { mu } => mu > 0.0,
            SystemParams::DampedHarmonic { omega, zeta } => omega > 0.0 && zeta >= 0.0,
            SystemParams::OrnsteinUhlenbeck { theta, sigma } => theta > 0.0 && sigma >= 0.0,
            SystemParams::ForcedDuffing { .. } => true,
        };
        let finite = self.entries().iter().all(|(_, v)| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid parameters {}", self.to_kv_string())))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynSysSpec {
    pub params: SystemParams,
    pub x0: f64,
    /// Initial velocity; ignored by the first-order OU process.
    pub v0: f64,
    pub horizon: f64,
    pub tau0: f64,
}

impl DynSysSpec {
    pub fn new(params: SystemParams, x0: f64, v0: f64) -> Self {
        Self {
            params,
            x0,
            v0,
            horizon: 10.0,
            tau0: 0.01,
        }
    }

    pub fn with_grid(mut self, horizon: f64, tau0: f64) -> Self {
        self.horizon = horizon;
        self.tau0 = tau0;
        self
    }

    /// Number of emitted samples, `floor(horizon / tau0) + 1`.
    pub fn n_samples(&self) -> usize {
        (self.horizon / self.tau0 + 1e-9).floor() as usize + 1
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::invalid("tau0 must be positive"));
        }
        if !(self.horizon >= self.tau0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon must be at least tau0"));
        }
        if !(self.x0.is_finite() && self.v0.is_finite()) {
            return Err(Error::invalid("non-finite initial condition"));
        }
        self.params.validate()
    }
}

/// Second-order vector field `(x, v, t) -> (x', v')`.
fn field(params: &SystemParams) -> impl Fn(f64, f64, f64) -> (f64, f64) + '_ {
    move |x, v, t| match *params {
        SystemParams::VanDerPol { mu } => (v, mu * (1.0 - x * x) * v - x),
        SystemParams::DampedHarmonic { omega, zeta } => (v, -2.0 * zeta * omega * v - omega * omega * x),
        SystemParams::ForcedDuffing {
            delta,
            alpha,
            beta,
            gamma,
            omega,
        } => (v, -delta * v - alpha * x - beta * x * x * x + gamma * (omega * t).cos()),
        SystemParams::OrnsteinUhlenbeck { .. } => unreachable!("OU is integrated stochastically"),
    }
}

/// Generates one trajectory. `rng_seed` drives the OU noise and is unused by
/// the deterministic systems.
pub fn generate(spec: &DynSysSpec, rng_seed: u64) -> Result<Trajectory> {
    let mut noise = SeededStream::new(rng_seed, streams::DYNSYS_NOISE);
    generate_with(spec, &mut noise)
}

/// Like [`generate`], with an explicit internal step count per emitted sample.
pub fn generate_substeps(spec: &DynSysSpec, rng_seed: u64, substeps: usize) -> Result<Trajectory> {
    let mut noise = SeededStream::new(rng_seed, streams::DYNSYS_NOISE);
    integrate(spec, &mut noise, substeps)
}

fn generate_with(spec: &DynSysSpec, noise: &mut SeededStream) -> Result<Trajectory> {
    integrate(spec, noise, SUBSTEPS)
}

fn integrate(spec: &DynSysSpec, noise: &mut SeededStream, substeps: usize) -> Result<Trajectory> {
    spec.validate()?;
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let n = spec.n_samples();
    let h = spec.tau0 / substeps as f64;
    let mut out = Vec::with_capacity(n);
    out.push(spec.x0);

    match spec.params {
        SystemParams::OrnsteinUhlenbeck { theta, sigma } => {
            let decay = (-theta * h).exp();
            let kick = sigma * h.sqrt();
            let mut x = spec.x0;
            for i in 1..n {
                for _ in 0..substeps {
                    x = decay * x + kick * noise.normal();
                }
                if !x.is_finite() {
                    return Err(Error::Divergence {
                        time: i as f64 * spec.tau0,
                    });
                }
                out.push(x);
            }
        }
        ref params => {
            let f = field(params);
            let (mut x, mut v) = (spec.x0, spec.v0);
            for i in 1..n {
                for s in 0..substeps {
                    let t = (i - 1) as f64 * spec.tau0 + s as f64 * h;
                    let (k1x, k1v) = f(x, v, t);
                    let (k2x, k2v) = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v, t + 0.5 * h);
                    let (k3x, k3v) = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v, t + 0.5 * h);
                    let (k4x, k4v) = f(x + h * k3x, v + h * k3v, t + h);
                    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                }
                if !(x.is_finite() && v.is_finite()) {
                    return Err(Error::Divergence {
                        time: i as f64 * spec.tau0,
                    });
                }
                out.push(x);
            }
        }
    }
    Trajectory::uniform(spec.tau0, out)
}

/// Options for [`sample_dataset`]. `overrides` pins named parameters (and
/// `x0` / `v0`) instead of drawing them.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetOptions {
    pub horizon: f64,
    pub tau0: f64,
    pub overrides: Vec<(String, f64)>,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            tau0: 0.01,
            overrides: Vec::new(),
        }
    }
}

fn known_keys(kind: SystemKind) -> &'static [&'static str] {
    match kind {
        SystemKind::VanDerPol => &["mu", "x0", "v0"],
        SystemKind::DampedHarmonic => &["omega", "zeta", "x0", "v0"],
        SystemKind::OrnsteinUhlenbeck => &["theta", "sigma", "x0"],
        SystemKind::ForcedDuffing => &["delta", "alpha", "beta", "gamma", "omega", "x0", "v0"],
    }
}

/// Draws parameters from the documented ranges and initial conditions from
/// `[-1, 1]`:
///
/// | kind     | ranges                                                     |
/// |----------|------------------------------------------------------------|
/// | vdp      | `mu ∈ [0.5, 3]`                                            |
/// | harmonic | `omega ∈ [π, 4π]`, `zeta ∈ [0.05, 0.5]`                    |
/// | ou       | `theta ∈ [0.5, 3]`, `sigma ∈ [0.1, 1]`                     |
/// | duffing  | `(delta, alpha, beta, omega) = (0.3, −1, 1, 1.2)`, `gamma ∈ [0.2, 0.65]` |
pub fn sample_spec(kind: SystemKind, rng: &mut SeededStream, opts: &DatasetOptions) -> Result<DynSysSpec> {
    use std::f64::consts::PI;
    let keys = known_keys(kind);
    if let Some((k, _)) = opts.overrides.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
        return Err(Error::invalid(format!("unknown parameter `{k}` for {kind}")));
    }
    let pick = |name: &str, drawn: f64| {
        opts.overrides
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map_or(drawn, |(_, v)| *v)
    };
    // Draw every random quantity unconditionally so overrides never shift the stream.
    let params = match kind {
        SystemKind::VanDerPol => SystemParams::VanDerPol {
            mu: pick("mu", rng.uniform_in(0.5, 3.0)),
        },
        SystemKind::DampedHarmonic => {
            let omega = rng.uniform_in(PI, 4.0 * PI);
            let zeta = rng.uniform_in(0.05, 0.5);
            SystemParams::DampedHarmonic {
                omega: pick("omega", omega),
                zeta: pick("zeta", zeta),
            }
        }
        SystemKind::OrnsteinUhlenbeck => {
            let theta = rng.uniform_in(0.5, 3.0);
            let sigma = rng.uniform_in(0.1, 1.0);
            SystemParams::OrnsteinUhlenbeck {
                theta: pick("theta", theta),
                sigma: pick("sigma", sigma),
            }
        }
        SystemKind::ForcedDuffing => SystemParams::ForcedDuffing {
            delta: pick("delta", 0.3),
            alpha: pick("alpha", -1.0),
            beta: pick("beta", 1.0),
            gamma: pick("gamma", rng.uniform_in(0.2, 0.65)),
            omega: pick("omega", 1.2),
        },
    };
    let x0 = pick("x0", rng.uniform_in(-1.0, 1.0));
    let v0 = pick("v0", rng.uniform_in(-1.0, 1.0));
    let spec = DynSysSpec::new(params, x0, v0).with_grid(opts.horizon, opts.tau0);
    spec.validate()?;
    Ok(spec)
}

/// Draws `count` trajectories with their ground-truth parameters.
///
/// Sample `i` uses its own parameter and noise streams, so results do not
/// depend on the thread count. A diverging draw is redrawn up to ten times.
pub fn sample_dataset(
    kind: SystemKind,
    count: usize,
    rng_seed: u64,
    opts: &DatasetOptions,
) -> Result<Vec<(Trajectory, SystemParams)>> {
    if count == 0 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let offset = kind.index() << 28;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut params_rng = SeededStream::new(rng_seed, streams::DYNSYS_PARAMS + offset + i as u64);
            let mut noise = SeededStream::new(rng_seed, streams::DYNSYS_NOISE + offset + i as u64);
            let mut last_err = None;
            for _ in 0..MAX_ATTEMPTS {
                let spec = sample_spec(kind, &mut params_rng, opts)?;
                match generate_with(&spec, &mut noise) {
                    Ok(traj) => return Ok((traj, spec.params)),
                    Err(e @ Error::Divergence { .. }) => last_err = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last_err.expect("at least one attempt"))
        })
        .collect()
}
