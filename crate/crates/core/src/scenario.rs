//! Serializable scenario configuration with the built-in flux and initial
//! data catalogs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::flux::{Polynomial, SmoothFluxPair};
use crate::profile::{Profile, Topology};
use crate::tracker::TrackerConfig;
use crate::{Error, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxSpec {
    /// `f = u²/2`, `g = f + gap`.
    BurgersShifted {
        #[serde(default = "one")]
        gap: f64,
    },
    /// `f = u(1 − u)`, `g = f + gap`.
    TrafficConcave {
        #[serde(default = "one")]
        gap: f64,
    },
    /// `f ≡ 0`, `g ≡ gap`.
    ConstantGap {
        #[serde(default = "one")]
        gap: f64,
    },
    /// `f = u³/3`, `g = f + gap`.
    Cubic {
        #[serde(default = "one")]
        gap: f64,
    },
    /// Monomial coefficients, lowest degree first.
    Custom { f: Vec<f64>, g: Vec<f64> },
}

impl FluxSpec {
    pub fn polynomials(&self) -> (Polynomial, Polynomial) {
        let shifted = |f: Polynomial, gap: f64| (f.clone(), f.add_constant(gap));
        match self {
            FluxSpec::BurgersShifted { gap } => shifted(Polynomial::new(vec![0.0, 0.0, 0.5]), *gap),
            FluxSpec::TrafficConcave { gap } => shifted(Polynomial::new(vec![0.0, 1.0, -1.0]), *gap),
            FluxSpec::ConstantGap { gap } => shifted(Polynomial::constant(0.0), *gap),
            FluxSpec::Cubic { gap } => shifted(Polynomial::new(vec![0.0, 0.0, 0.0, 1.0 / 3.0]), *gap),
            FluxSpec::Custom { f, g } => (Polynomial::new(f.clone()), Polynomial::new(g.clone())),
        }
    }

    /// Flux pair checked on `[−m, m]`.
    pub fn build(&self, m: f64) -> Result<SmoothFluxPair> {
        let (f, g) = self.polynomials();
        let m = m.abs().max(1.0);
        SmoothFluxPair::new(f, g, (-m, m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Block of `height` on `[left, right)`, zero elsewhere.
    SquareWave {
        #[serde(default = "one")]
        height: f64,
        left: f64,
        right: f64,
    },
    /// `steps` equal upward steps from 0 to `height` across `[left, right)`,
    /// then back to zero.
    Staircase {
        steps: usize,
        #[serde(default = "one")]
        height: f64,
        left: f64,
        right: f64,
    },
    /// Uniform breakpoints in `[left, right)` and values in
    /// `[−amplitude, amplitude]`, zero outside (the whole period is used on a
    /// circle).
    RandomPiecewise {
        seed: u64,
        n_jumps: usize,
        amplitude: f64,
        #[serde(default)]
        left: f64,
        #[serde(default = "one")]
        right: f64,
    },
    /// `e^x` for `x < 0`, `−e^{−x}` for `x > 0`, truncated to `[−5, 5]` and
    /// built directly on the grid `2^-ν ℤ`.
    Example31 { nu: u32 },
    Custom { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl InitialSpec {
    pub fn build(&self, topology: Topology) -> Result<Profile> {
        match *self {
            InitialSpec::SquareWave { height, left, right } => blocks(topology, &[(left, right, height)]),
            InitialSpec::Staircase {
                steps,
                height,
                left,
                right,
            } => {
                if steps == 0 {
                    return Err(Error::Config("staircase needs at least one step".into()));
                }
                let w = (right - left) / steps as f64;
                let b: Vec<(f64, f64, f64)> = (0..steps)
                    .map(|k| {
                        let a = left + k as f64 * w;
                        (a, a + w, height * (k + 1) as f64 / steps as f64)
                    })
                    .collect();
                blocks(topology, &b)
            }
            InitialSpec::RandomPiecewise {
                seed,
                n_jumps,
                amplitude,
                left,
                right,
            } => random_piecewise(topology, seed, n_jumps, amplitude, (left, right)),
            InitialSpec::Example31 { nu } => {
                if topology != Topology::Line {
                    return Err(Error::Config("example31 is posed on the line".into()));
                }
                example31(nu)
            }
            InitialSpec::Custom {
                ref breakpoints,
                ref values,
            } => Profile::new(topology, breakpoints.clone(), values.clone()),
        }
    }
}

fn blocks(topology: Topology, b: &[(f64, f64, f64)]) -> Result<Profile> {
    let line = Profile::line_from_blocks(b)?;
    match topology {
        Topology::Line => Ok(line),
        Topology::Periodic { period } => {
            let (lo, hi) = (line.breakpoints()[0], *line.breakpoints().last().unwrap());
            if hi - lo > period {
                return Err(Error::Config(format!("blocks span {} > period {period}", hi - lo)));
            }
            Profile::normalized(
                topology,
                line.breakpoints().to_vec(),
                line.values()[..line.values().len() - 1].to_vec(),
                0.0,
            )
        }
    }
}

/// Seeded random piecewise constant data.
pub fn random_piecewise(
    topology: Topology,
    seed: u64,
    n_jumps: usize,
    amplitude: f64,
    (left, right): (f64, f64),
) -> Result<Profile> {
    if !(amplitude >= 0.0) || !(right > left) {
        return Err(Error::Config("random data needs amplitude ≥ 0 and left < right".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match topology {
        Topology::Line => {
            let n = n_jumps.max(2);
            let mut bps: Vec<f64> = (0..n).map(|_| rng.gen_range(left..right)).collect();
            bps.sort_by(f64::total_cmp);
            let mut vals = vec![0.0];
            vals.extend((0..n - 1).map(|_| rng.gen_range(-amplitude..=amplitude)));
            vals.push(0.0);
            Profile::normalized(topology, bps, vals, 0.0)
        }
        Topology::Periodic { period } => {
            let n = n_jumps.max(2);
            let mut bps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..period)).collect();
            bps.sort_by(f64::total_cmp);
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
            Profile::normalized(topology, bps, vals, 0.0)
        }
    }
}

/// Grid-exact version of `e^x` (x < 0), `−e^{−x}` (x > 0) on `[−5, 5]`:
/// every cell holds the value truncated toward zero on `2^-ν ℤ`.
pub fn example31(nu: u32) -> Result<Profile> {
    let h = (-(nu as f64)).exp2();
    let k_lo = ((-5f64).exp() / h).floor() as i64;
    let k_hi = (1.0 / h).ceil() as i64 - 1;
    // left half: value k·h on [ln(k h), ln((k+1) h)) ∩ [−5, 0)
    let mut bps = vec![-5.0];
    let mut vals = vec![0.0, k_lo as f64 * h];
    for k in k_lo + 1..=k_hi {
        bps.push((k as f64 * h).ln());
        vals.push(k as f64 * h);
    }
    // right half mirrors it with a sign flip
    bps.push(0.0);
    vals.push(-(k_hi as f64) * h);
    for k in (k_lo + 1..=k_hi).rev() {
        bps.push(-(k as f64 * h).ln());
        vals.push(-((k - 1) as f64) * h);
    }
    bps.push(5.0);
    *vals.last_mut().unwrap() = -(k_lo as f64) * h;
    vals.push(0.0);
    Profile::normalized(Topology::Line, bps, vals, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscousSpec {
    pub n_cells: usize,
    /// `(ε, δ)` pairs in ladder order.
    pub rungs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesSpec {
    pub trials: usize,
    pub seed: u64,
    pub nu: u32,
    #[serde(default = "default_max_jumps")]
    pub max_jumps: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_max_jumps() -> usize {
    20
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub flux: FluxSpec,
    pub initial: InitialSpec,
    pub topology: Topology,
    #[serde(default)]
    pub nu: Option<u32>,
    #[serde(default)]
    pub nu_ladder: Vec<u32>,
    pub horizon: f64,
    /// Explicit sample times in `[0, horizon]`.
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// Additional uniformly spaced samples `k·horizon/n`, `k = 1..n`.
    #[serde(default)]
    pub n_samples: usize,
    #[serde(default)]
    pub viscous: Option<ViscousSpec>,
    #[serde(default)]
    pub properties: Option<PropertiesSpec>,
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default)]
    pub output_dir: Option<String>,
}

pub const MAX_NU: u32 = 24;

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let c: Self = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be finite and non-negative, got {}", self.horizon));
        }
        if let Topology::Periodic { period } = self.topology {
            if !(period > 0.0 && period.is_finite()) {
                return bad(format!("period must be positive, got {period}"));
            }
        }
        if self.nu.is_some_and(|n| n > MAX_NU) || self.nu_ladder.iter().any(|&n| n > MAX_NU) {
            return bad(format!("ν above {MAX_NU} is not supported"));
        }
        if self.nu_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return bad("ν ladder must be strictly increasing".into());
        }
        if self.sample_times.iter().any(|&t| !(0.0..=self.horizon).contains(&t)) {
            return bad("sample times must lie in [0, horizon]".into());
        }
        if let Some(v) = &self.viscous {
            if v.n_cells < 3 {
                return bad("viscous grid needs at least 3 cells".into());
            }
            if v.rungs.iter().any(|&(e, d)| !(e > 0.0 && d >= 0.0 && e.is_finite() && d.is_finite())) {
                return bad("viscous rungs need ε > 0 and δ ≥ 0".into());
            }
        }
        if let Some(p) = &self.properties {
            if p.nu > MAX_NU {
                return bad(format!("ν above {MAX_NU} is not supported"));
            }
        }
        if self.tracker.restart_cap == 0 {
            return bad("restart cap must be positive".into());
        }
        Ok(())
    }

    pub fn initial_profile(&self) -> Result<Profile> {
        self.initial.build(self.topology)
    }

    pub fn flux_pair(&self, initial: &Profile) -> Result<SmoothFluxPair> {
        self.flux.build(initial.linf() + 1.0)
    }

    /// Single-run resolution: `nu`, else the finest ladder rung, else 8.
    pub fn resolution(&self) -> u32 {
        self.nu.or(self.nu_ladder.last().copied()).unwrap_or(8)
    }

    /// Sorted, deduplicated sample times including the uniform ones.
    pub fn all_sample_times(&self) -> Vec<f64> {
        let mut t = self.sample_times.clone();
        let n = self.n_samples;
        t.extend((1..=n).map(|k| self.horizon * k as f64 / n as f64));
        t.push(0.0);
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

/// Sets `key` (dot separated) in a JSON document to `raw`, parsed as JSON
/// when possible and as a string otherwise.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::Config(format!("empty path segment in '{key}'")));
        }
        let map = match cur {
            Value::Object(m) => m,
            _ => return Err(Error::Config(format!("'{key}' does not address an object field"))),
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one segment")
}
